//! The four experiment drivers.

use std::path::Path;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use polydisk_core::automorphisms::AutomorphismSequence;
use polydisk_core::dsl::{parse_function_dsl, to_dsl};
use polydisk_core::engine::{run_universality, verify_orbit, IndexSet, OrbitEntry, UniversalityRun};
use polydisk_core::inner_tools::{good_inner_trend, radial_modulus_report};
use polydisk_core::{CompactProbe, HoloFunction};

use crate::config::{EngineSection, Mode, RunConfig, SequenceSpec};
use crate::report::{
    fmt_f64, GoodInnerEntry, OrbitSection, RadialEntry, RandomCheck, Report, SelectionRecord,
    StageEntry, Table, UniversalSection, VerificationRow,
};
use crate::{CliError, Outcome};

pub fn run_mode(cfg: &RunConfig, base: &Path) -> Result<Outcome, CliError> {
    match cfg.mode {
        Mode::DiagnoseInner => diagnose_inner(cfg),
        Mode::GoodInner => good_inner(cfg),
        Mode::ConstructUniversal => construct_universal(cfg),
        Mode::VerifyOrbit => verify(cfg, base),
    }
}

fn outcome(report: Report, tables: Vec<Table>, summary: Vec<String>, phases: Vec<(String, f64)>) -> Outcome {
    Outcome {
        report,
        tables,
        summary,
        phases,
        exit_code: 0,
    }
}

fn diagnostic_functions(cfg: &RunConfig) -> Result<Vec<(String, HoloFunction)>, CliError> {
    let texts = if cfg.diagnostics.functions.is_empty() {
        &cfg.targets
    } else {
        &cfg.diagnostics.functions
    };
    if texts.is_empty() {
        return Err(CliError::ConfigInvalid(
            "no functions to diagnose: set diagnostics.functions or targets".into(),
        ));
    }
    let fs = cfg.parse_functions(texts)?;
    Ok(texts.iter().cloned().zip(fs).collect())
}

fn diagnose_inner(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let t0 = Instant::now();
    let d = &cfg.diagnostics;
    let mut entries = Vec::new();
    let mut table = Table::new("radial_modulus.csv", &["function", "radius", "deviation"]);
    let mut summary = Vec::new();
    for (text, f) in diagnostic_functions(cfg)? {
        let rep = radial_modulus_report(&f, &d.radii, d.nodes).map_err(CliError::Config)?;
        for (r, dev) in rep.radii.iter().zip(&rep.deviations) {
            table.push(vec![text.clone(), fmt_f64(*r), fmt_f64(*dev)]);
        }
        summary.push(format!(
            "{text}: deviation at r = {} is {:.3e}",
            rep.radii.last().copied().unwrap_or(f64::NAN),
            rep.deviations.last().copied().unwrap_or(f64::NAN)
        ));
        entries.push(RadialEntry {
            function: text,
            structurally_inner: f.is_inner(),
            angles_per_dim: rep.angles_per_dim,
            decreasing: rep.is_decreasing(),
            radii: rep.radii,
            deviations: rep.deviations,
        });
    }
    let mut report = Report::new(cfg.mode.name(), cfg.seed, Some(cfg.clone()));
    report.diagnose_inner = Some(entries);
    Ok(outcome(
        report,
        vec![table],
        summary,
        vec![("diagnose".into(), t0.elapsed().as_secs_f64())],
    ))
}

fn good_inner(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let t0 = Instant::now();
    let d = &cfg.diagnostics;
    let mut entries = Vec::new();
    let mut table = Table::new("good_inner.csv", &["function", "radius", "integral", "clamped"]);
    let mut summary = Vec::new();
    for (text, f) in diagnostic_functions(cfg)? {
        let rep = good_inner_trend(&f, &d.radii, d.nodes, d.clamp, d.tolerance).map_err(CliError::Config)?;
        for ((r, v), c) in rep.radii.iter().zip(&rep.values).zip(&rep.clamped) {
            table.push(vec![text.clone(), fmt_f64(*r), fmt_f64(*v), c.to_string()]);
        }
        summary.push(format!(
            "{text}: I(r) = {:?}, {}",
            rep.values,
            if rep.passes { "passes" } else { "fails" }
        ));
        entries.push(GoodInnerEntry {
            function: text,
            radii: rep.radii,
            values: rep.values,
            clamped: rep.clamped,
            clamp: rep.clamp,
            nodes_per_dim: rep.nodes_per_dim,
            tolerance: rep.tolerance,
            passes: rep.passes,
        });
    }
    let mut report = Report::new(cfg.mode.name(), cfg.seed, Some(cfg.clone()));
    report.good_inner = Some(entries);
    Ok(outcome(
        report,
        vec![table],
        summary,
        vec![("good-inner".into(), t0.elapsed().as_secs_f64())],
    ))
}

fn pair(c: Complex64) -> [f64; 2] {
    [c.re, c.im]
}

/// Uniform points in the polydisk of the probe radius.
fn random_points(probe: &CompactProbe, count: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<Complex64>> {
    (0..count)
        .map(|_| {
            (0..probe.dimension())
                .map(|_| {
                    let rho = probe.radius() * rng.gen::<f64>().sqrt();
                    Complex64::from_polar(rho, std::f64::consts::TAU * rng.gen::<f64>())
                })
                .collect()
        })
        .collect()
}

/// `sup |x∘φ_k − f|` over seeded random points, independent of the grid.
fn random_check(
    x: &HoloFunction,
    seq: &AutomorphismSequence,
    targets: &[HoloFunction],
    entries: &[OrbitEntry],
    probe: &CompactProbe,
    count: usize,
    seed: u64,
) -> Result<Vec<RandomCheck>, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = random_points(probe, count, &mut rng);
    let mut out = Vec::new();
    for (e, f) in entries.iter().zip(targets) {
        let Some(phi) = seq.get(e.best_index) else {
            continue;
        };
        let moved = x.compose(&phi).map_err(CliError::Engine)?;
        let mut sup = 0.0f64;
        for z in &pts {
            let v = moved.eval(z).map_err(CliError::Engine)? - f.eval(z).map_err(CliError::Engine)?;
            sup = sup.max(v.norm());
        }
        out.push(RandomCheck {
            target: e.target + 1,
            index: e.best_index,
            points: count,
            sup,
        });
    }
    Ok(out)
}

fn verification_rows(entries: &[OrbitEntry], texts: &[String], bounds: Option<&[f64]>) -> Vec<VerificationRow> {
    entries
        .iter()
        .map(|e| VerificationRow {
            target: e.target + 1,
            function: texts[e.target].clone(),
            best_index: e.best_index,
            value: e.value,
            bound: bounds.map(|b| b[e.target]),
        })
        .collect()
}

fn verification_table(rows: &[VerificationRow]) -> Table {
    let mut t = Table::new("verification.csv", &["target", "function", "best_index", "value", "bound"]);
    for r in rows {
        t.push(vec![
            r.target.to_string(),
            r.function.clone(),
            r.best_index.to_string(),
            fmt_f64(r.value),
            r.bound.map(fmt_f64).unwrap_or_default(),
        ]);
    }
    t
}

fn stage_entries(run: &UniversalityRun) -> Vec<StageEntry> {
    run.stages
        .iter()
        .map(|s| StageEntry {
            stage: s.stage,
            index: s.index,
            target: to_dsl(&s.target),
            tolerance: s.tolerance,
            budget: s.budget,
            condition_a: s.condition_a,
            condition_b: s.condition_b,
            projection_error: s.projection_error,
            own_error: s.own_error,
            interference: s.interference.clone(),
            retroactive: s.retroactive.clone(),
            inverse_law_residual: s.inverse_law_residual,
            projected_corrector_index: s.projected.index,
            projected: to_dsl(&s.projected.product),
            factor_corrector_index: s.factor.index,
            factor: to_dsl(&s.factor.product),
            factor_pin_residual: s.factor.pin_residual,
            escalations: s.escalations,
            search_evaluations: s.search_evaluations,
        })
        .collect()
}

fn stage_table(stages: &[StageEntry]) -> Table {
    let mut t = Table::new(
        "stages.csv",
        &[
            "stage",
            "index",
            "tolerance",
            "budget",
            "condition_a",
            "condition_b",
            "projection_error",
            "own_error",
            "interference_max",
            "retroactive_max",
            "inverse_law_residual",
            "projected_corrector_index",
            "factor_corrector_index",
            "escalations",
        ],
    );
    let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    for s in stages {
        t.push(vec![
            s.stage.to_string(),
            s.index.to_string(),
            fmt_f64(s.tolerance),
            fmt_f64(s.budget),
            fmt_f64(s.condition_a),
            fmt_f64(s.condition_b),
            fmt_f64(s.projection_error),
            fmt_f64(s.own_error),
            fmt_f64(max(&s.interference)),
            fmt_f64(max(&s.retroactive)),
            fmt_f64(s.inverse_law_residual),
            s.projected_corrector_index.to_string(),
            s.factor_corrector_index.to_string(),
            s.escalations.to_string(),
        ]);
    }
    t
}

fn construct_universal(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let t0 = Instant::now();
    let engine = cfg.engine_config()?;
    let mut report = Report::new(cfg.mode.name(), cfg.seed, Some(cfg.clone()));
    let run = match run_universality(&engine) {
        Ok(run) => run,
        Err(e) => {
            let err = CliError::Engine(e);
            report.status = "engine-failure";
            report.error = Some((&err).into());
            report.universal = Some(UniversalSection {
                selection: None,
                stages: Vec::new(),
                indices: Vec::new(),
                product: None,
                verification: Vec::new(),
                random_check: Vec::new(),
            });
            let mut o = outcome(report, Vec::new(), Vec::new(), Vec::new());
            o.exit_code = 2;
            return Ok(o);
        }
    };
    let t_run = t0.elapsed().as_secs_f64();

    let done = run.stages.len();
    let bounds: Vec<f64> = (1..=done).map(|j| engine.stage_tolerance(j) + engine.delta).collect();
    let rows = verification_rows(&run.verification, &cfg.targets, Some(&bounds));
    let checks = match &run.product {
        Some(x) => random_check(
            x,
            &engine.sequence,
            &engine.targets[..done],
            &run.verification,
            &engine.probe,
            cfg.engine.random_points,
            cfg.seed,
        )?,
        None => Vec::new(),
    };
    let stages = stage_entries(&run);
    let sel = &run.selection;
    let mut summary: Vec<String> = stages
        .iter()
        .map(|s| {
            format!(
                "stage {}: n = {}, (a) {:.3e}, (b) {:.3e}, budget {:.3e}, corrector indices {}/{}",
                s.stage,
                s.index,
                s.condition_a,
                s.condition_b,
                s.budget,
                s.projected_corrector_index,
                s.factor_corrector_index
            )
        })
        .collect();
    for r in &rows {
        summary.push(format!(
            "target {} ({}): min error {:.6e} at k = {} (bound {:.3e})",
            r.target,
            r.function,
            r.value,
            r.best_index,
            r.bound.unwrap_or(f64::NAN)
        ));
    }
    let tables = vec![stage_table(&stages), verification_table(&rows)];
    report.universal = Some(UniversalSection {
        selection: Some(SelectionRecord {
            permutation: sel.permutation.one_based(),
            scanned_members: sel.indices.len(),
            angle_tol: sel.angle_tol,
            angle_cell: sel.angle_cell.clone(),
            limit_angles: sel.limit_angles.clone(),
            lambda: sel.lambda.coords().iter().copied().map(pair).collect(),
            gamma: sel.gamma.coords().iter().copied().map(pair).collect(),
            boundary_gap: sel.boundary_gap,
        }),
        indices: run.indices(),
        product: run.product.as_ref().map(to_dsl),
        stages,
        verification: rows,
        random_check: checks,
    });
    let mut exit_code = 0;
    if let Some(e) = &run.failure {
        let err = CliError::Engine(e.clone());
        report.status = "engine-failure";
        report.error = Some((&err).into());
        exit_code = 2;
    }
    let mut o = outcome(
        report,
        tables,
        summary,
        vec![
            ("engine".into(), t_run),
            ("verification".into(), t0.elapsed().as_secs_f64() - t_run),
        ],
    );
    o.exit_code = exit_code;
    Ok(o)
}

/// Pieces of an earlier construction report used by verify-orbit.
struct FromReport {
    x: Option<String>,
    indices: Option<Vec<u64>>,
    targets: Vec<String>,
    sequence: Option<SequenceSpec>,
    engine: Option<EngineSection>,
}

fn load_report(path: &Path) -> Result<FromReport, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => CliError::ConfigNotFound(path.display().to_string()),
        _ => CliError::Io(format!("{}: {e}", path.display())),
    })?;
    let v: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::ConfigParse(format!("{}: {e}", path.display())))?;
    let bad = |what: &str| CliError::ConfigInvalid(format!("{}: malformed {what}", path.display()));
    let universal = &v["universal"];
    let config = &v["config"];
    Ok(FromReport {
        x: universal["product"].as_str().map(str::to_string),
        indices: match &universal["indices"] {
            serde_json::Value::Null => None,
            other => Some(serde_json::from_value(other.clone()).map_err(|_| bad("indices"))?),
        },
        targets: match &config["targets"] {
            serde_json::Value::Null => Vec::new(),
            other => serde_json::from_value(other.clone()).map_err(|_| bad("targets"))?,
        },
        sequence: match &config["sequence"] {
            serde_json::Value::Null => None,
            other => Some(serde_json::from_value(other.clone()).map_err(|_| bad("sequence"))?),
        },
        engine: match &config["engine"] {
            serde_json::Value::Null => None,
            other => Some(serde_json::from_value(other.clone()).map_err(|_| bad("engine"))?),
        },
    })
}

fn verify(cfg: &RunConfig, base: &Path) -> Result<Outcome, CliError> {
    let t0 = Instant::now();
    let mut eff = cfg.clone();
    let mut x_text = cfg.verify.x.clone();
    let mut indices = cfg.verify.indices.clone();
    if let Some(rel) = &cfg.verify.from_report {
        let loaded = load_report(&base.join(rel))?;
        x_text = x_text.or(loaded.x);
        if indices.is_none() && cfg.verify.up_to.is_none() {
            indices = loaded.indices;
        }
        if eff.targets.is_empty() {
            eff.targets = loaded.targets;
        }
        if eff.sequence.is_none() {
            eff.sequence = loaded.sequence;
        }
        if let Some(e) = loaded.engine {
            eff.engine.probe_radius = e.probe_radius;
            eff.engine.probe_points = e.probe_points;
        }
    }
    let x_text = x_text.ok_or_else(|| CliError::ConfigInvalid("verify-orbit needs verify.x or verify.from_report".into()))?;
    let x = parse_function_dsl(&x_text, eff.dimension).map_err(CliError::Config)?;
    let set = match (indices, cfg.verify.up_to) {
        (Some(v), _) => IndexSet::Listed(v),
        (None, Some(k)) => IndexSet::UpTo(k),
        (None, None) => {
            return Err(CliError::ConfigInvalid(
                "verify-orbit needs verify.indices, verify.up_to or verify.from_report".into(),
            ))
        }
    };
    let seq = eff.build_sequence()?;
    let targets = eff.parse_functions(&eff.targets)?;
    let probe = eff.probe()?;
    let entries = verify_orbit(&x, &seq, &targets, &probe, &set).map_err(CliError::Engine)?;
    let rows = verification_rows(&entries, &eff.targets, None);
    let summary = rows
        .iter()
        .map(|r| {
            format!(
                "target {} ({}): min error {:.6e} at k = {}",
                r.target, r.function, r.value, r.best_index
            )
        })
        .collect();
    let mut report = Report::new(cfg.mode.name(), cfg.seed, Some(eff.clone()));
    report.orbit = Some(OrbitSection {
        x: x_text,
        indices: match &set {
            IndexSet::UpTo(k) => format!("1..={k}"),
            IndexSet::Listed(v) => v.iter().map(u64::to_string).collect::<Vec<_>>().join(","),
        },
        verification: rows.clone(),
    });
    Ok(outcome(
        report,
        vec![verification_table(&rows)],
        summary,
        vec![("verify".into(), t0.elapsed().as_secs_f64())],
    ))
}
