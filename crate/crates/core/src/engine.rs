//! Staged construction of a finite product `x = ∏ x_j` whose orbit
//! `{x∘φ_k}` comes close to each prescribed target on a compact probe.
//!
//! Stage `j` projects the target `f_j` onto the family pinned at `γ`
//! (giving `f̃_j`), picks an index `n_j` at which the earlier factors are
//! invisible after composing with `φ_{n_j}` and `f̃_j∘φ_{n_j}⁻¹` is close to 1,
//! then takes `x_j` from the family pinned at `λ` approximating the pullback
//! `f̃_j∘φ_{n_j}⁻¹`. Because `C_φ C_{φ⁻¹}` is the identity,
//! `x_j∘φ_{n_j} ≈ f̃_j`.

use num_complex::Complex64;

use crate::automorphisms::{select_subsequence, SubsequenceSelection};
use crate::automorphisms::{AutomorphismSequence, PolydiskAutomorphism};
use crate::error::{Error, Result};
use crate::geometry::{probe_sup, CompactProbe, TorusPoint};
use crate::holo::{taylor_coeffs_along, CompositionOperator, HoloFunction, BALL_TOL};
use crate::inner_tools::MAX_CORRECTOR_INDEX;
use crate::inner_tools::{make_generating_element, schur_project_adaptive, GeneratingElement};

/// Default absolute cap on sequence indices. The pins of successive stages
/// force `n_j` to grow extremely fast, so the cap sits near the largest
/// index at which `1 − 1/(k+1)` is still distinct from 1 in binary64.
pub const DEFAULT_K_MAX: u64 = 1_000_000_000_000_000;

/// Escalations of the search floor after an interference failure.
pub const MAX_ESCALATIONS: u32 = 5;

/// Factor applied to the search floor on each escalation.
pub const ESCALATION_FACTOR: u64 = 4;

/// Raw indices scanned when looking for the next subsequence member.
const MEMBER_SCAN: u64 = 1 << 16;

#[derive(Debug, Clone)]
pub struct EngineConfig {
    pub sequence: AutomorphismSequence,
    pub targets: Vec<HoloFunction>,
    pub probe: CompactProbe,
    /// `ε`, with stage tolerance `ε_j = ε/2^j`.
    pub epsilon: f64,
    /// `δ`, with per-stage interference budget `δ/2^j`.
    pub delta: f64,
    pub j_min: u32,
    pub k_max: u64,
    pub schur_depth: usize,
    pub selection_horizon: u64,
    pub angle_tol: f64,
    pub boundary_threshold: f64,
}

impl EngineConfig {
    /// Defaults: probe radius 0.3, `ε = 0.05`, `δ = 0.01`, `j_min = 12`, depth 16.
    pub fn new(sequence: AutomorphismSequence, targets: Vec<HoloFunction>) -> Result<Self> {
        let probe = CompactProbe::with_default_resolution(0.3, sequence.dimension())?;
        Ok(EngineConfig {
            sequence,
            targets,
            probe,
            epsilon: 0.05,
            delta: 0.01,
            j_min: 12,
            k_max: DEFAULT_K_MAX,
            schur_depth: 16,
            selection_horizon: 1000,
            angle_tol: 0.01,
            boundary_threshold: 0.01,
        })
    }

    pub fn stage_tolerance(&self, j: usize) -> f64 {
        self.epsilon / 2f64.powi(j as i32)
    }

    pub fn stage_budget(&self, j: usize) -> f64 {
        self.delta / 2f64.powi(j as i32)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.sequence.dimension();
        if self.probe.dimension() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.probe.dimension(),
            });
        }
        if self.targets.is_empty() {
            return Err(Error::Validity("at least one target is required".into()));
        }
        for (name, v) in [("epsilon", self.epsilon), ("delta", self.delta)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Validity(format!("{name} must be positive, got {v}")));
            }
        }
        if self.j_min == 0 || self.j_min as usize + self.targets.len() > MAX_CORRECTOR_INDEX as usize {
            return Err(Error::Validity(format!(
                "j_min {} with {} targets exceeds the corrector index range 1..={MAX_CORRECTOR_INDEX}",
                self.j_min,
                self.targets.len()
            )));
        }
        if self.schur_depth == 0 || self.k_max == 0 || self.selection_horizon == 0 {
            return Err(Error::Validity(
                "schur_depth, k_max and selection_horizon must be positive".into(),
            ));
        }
        let zero = HoloFunction::constant(n, Complex64::new(0.0, 0.0))?;
        for (i, f) in self.targets.iter().enumerate() {
            if f.dimension() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: f.dimension(),
                });
            }
            let sup = probe_sup(f, &zero, &self.probe)?;
            if sup > 1.0 + BALL_TOL {
                return Err(Error::Validity(format!(
                    "target {} has sup {sup} > 1 on the probe",
                    i + 1
                )));
            }
        }
        Ok(())
    }
}

/// One completed stage.
#[derive(Debug, Clone)]
pub struct StageRecord {
    pub stage: usize,
    pub index: u64,
    pub target: HoloFunction,
    /// `f̃_j`, pinned at `γ`.
    pub projected: GeneratingElement,
    /// `x_j`, pinned at `λ`.
    pub factor: GeneratingElement,
    pub tolerance: f64,
    pub budget: f64,
    /// Condition (a) at the chosen index: `max_{i<j} sup|x_i∘φ_{n_j} − 1|`.
    pub condition_a: f64,
    /// Condition (b) at the chosen index: `sup|f̃_j∘φ_{n_j}⁻¹ − 1|`.
    pub condition_b: f64,
    /// `sup|f̃_j − f_j|`.
    pub projection_error: f64,
    /// `sup|x_j∘φ_{n_j} − f̃_j|`.
    pub own_error: f64,
    /// `sup|x_i∘φ_{n_j} − 1|` for each `i < j`.
    pub interference: Vec<f64>,
    /// `sup over φ_{n_m}(probe) of |x_j − 1|` for each `m < j`.
    pub retroactive: Vec<f64>,
    /// `sup|C_φ(C_{φ⁻¹} f̃_j) − f̃_j|` at `φ = φ_{n_j}`, as evaluated.
    pub inverse_law_residual: f64,
    pub escalations: u32,
    pub search_evaluations: usize,
}

/// Minimum over an index set of `probe_sup(x∘φ_k, f)` for one target.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitEntry {
    pub target: usize,
    pub best_index: u64,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct UniversalityRun {
    pub selection: SubsequenceSelection,
    pub stages: Vec<StageRecord>,
    /// `∏ x_j` over completed stages; a single stage gives its factor itself.
    pub product: Option<HoloFunction>,
    /// One entry per target of a completed stage, minimised over the chosen indices.
    pub verification: Vec<OrbitEntry>,
    pub failure: Option<Error>,
}

impl UniversalityRun {
    pub fn is_complete(&self) -> bool {
        self.failure.is_none()
    }

    pub fn indices(&self) -> Vec<u64> {
        self.stages.iter().map(|s| s.index).collect()
    }
}

/// Indices over which an orbit is examined.
#[derive(Debug, Clone, PartialEq)]
pub enum IndexSet {
    UpTo(u64),
    Listed(Vec<u64>),
}

impl IndexSet {
    fn iter(&self) -> Box<dyn Iterator<Item = u64> + '_> {
        match self {
            IndexSet::UpTo(k) => Box::new(1..=*k),
            IndexSet::Listed(v) => Box::new(v.iter().copied()),
        }
    }
}

fn images(phi: &PolydiskAutomorphism, probe: &CompactProbe) -> Result<Vec<Vec<Complex64>>> {
    probe.grid().iter().map(|z| phi.eval(z)).collect()
}

fn sup_minus_one(f: &HoloFunction, points: &[Vec<Complex64>]) -> Result<f64> {
    let mut sup = 0.0f64;
    for w in points {
        sup = sup.max((f.eval(w)? - 1.0).norm());
    }
    Ok(sup)
}

/// `sup_{probe} |x_i∘φ − 1|` for each prior factor.
pub fn interference_values(
    prior: &[HoloFunction],
    phi: &PolydiskAutomorphism,
    probe: &CompactProbe,
) -> Result<Vec<f64>> {
    let w = images(phi, probe)?;
    prior.iter().map(|x| sup_minus_one(x, &w)).collect()
}

/// Condition (a): `max_i sup_{probe} |x_i∘φ − 1|`, zero without prior factors.
pub fn condition_a(prior: &[HoloFunction], phi: &PolydiskAutomorphism, probe: &CompactProbe) -> Result<f64> {
    Ok(interference_values(prior, phi, probe)?.into_iter().fold(0.0, f64::max))
}

/// Condition (b): `sup_{probe} |f̃∘φ⁻¹ − 1|`.
pub fn condition_b(projected: &HoloFunction, phi: &PolydiskAutomorphism, probe: &CompactProbe) -> Result<f64> {
    sup_minus_one(projected, &images(&phi.inverse(), probe)?)
}

/// Projects `f` onto the generating family pinned at `pin` with corrector
/// index `j`.
///
/// Inner targets are used as their own approximant. In one variable a
/// non-inner target goes through the Schur projector at depth `depth`. In
/// several variables the non-inner factors of a product must each depend on
/// at most one coordinate; factors sharing a coordinate are projected
/// together and constants join coordinate 1.
pub fn project_to_family(
    f: &HoloFunction,
    pin: &TorusPoint,
    j: u32,
    tol: f64,
    depth: usize,
    probe: &CompactProbe,
) -> Result<GeneratingElement> {
    let n = f.dimension();
    let approximant = if f.is_inner() {
        f.clone()
    } else {
        let mut kept = Vec::new();
        let mut groups: Vec<Vec<HoloFunction>> = vec![Vec::new(); n];
        for factor in f.factors() {
            if factor.is_inner() {
                kept.push(factor);
                continue;
            }
            let deps = factor.dependencies();
            if deps.len() > 1 {
                return Err(Error::UnsupportedTargetShape(format!(
                    "a non-inner factor depends on coordinates {:?}",
                    deps.iter().map(|d| d + 1).collect::<Vec<_>>()
                )));
            }
            groups[deps.first().copied().unwrap_or(0)].push(factor);
        }
        for (c, group) in groups.into_iter().enumerate() {
            if group.is_empty() {
                continue;
            }
            let g = if group.len() == 1 {
                group.into_iter().next().expect("one factor")
            } else {
                HoloFunction::product(group)?
            };
            let coeffs = taylor_coeffs_along(&g, c + 1, 2 * depth)?;
            let proj = schur_project_adaptive(&coeffs, depth, Complex64::new(1.0, 0.0), n, c + 1)?;
            kept.push(proj.function);
        }
        if kept.len() == 1 {
            kept.pop().expect("one factor")
        } else {
            HoloFunction::product(kept)?
        }
    };
    let achieved = probe_sup(&approximant, f, probe)?;
    if achieved > tol {
        return Err(Error::ProjectionFailed {
            achieved,
            tolerance: tol,
        });
    }
    make_generating_element(j, pin, &approximant)
}

/// Everything the index search needs besides the stage data.
#[derive(Debug, Clone, Copy)]
pub struct SearchContext<'a> {
    pub sequence: &'a AutomorphismSequence,
    pub selection: &'a SubsequenceSelection,
    pub probe: &'a CompactProbe,
    pub k_max: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexChoice {
    pub index: u64,
    pub condition_a: f64,
    pub condition_b: f64,
    pub evaluations: usize,
}

/// Smallest admissible subsequence member `≥ floor`, found by geometric
/// skipping (`floor + 2^i − 1`) followed by bisection. Admissible means both
/// condition (a) and condition (b) are within `budget`.
pub fn choose_stage_index(
    ctx: &SearchContext<'_>,
    prior: &[HoloFunction],
    projected: &HoloFunction,
    stage: usize,
    floor: u64,
    budget: f64,
) -> Result<IndexChoice> {
    let mut evaluations = 0usize;
    let mut best = (f64::INFINITY, f64::INFINITY);
    let mut check = |k: u64, best: &mut (f64, f64)| -> Result<Option<(f64, f64)>> {
        let Some(phi) = ctx.sequence.get(k) else {
            return Ok(None);
        };
        evaluations += 1;
        let a = condition_a(prior, &phi, ctx.probe)?;
        let b = condition_b(projected, &phi, ctx.probe)?;
        if a.max(b) < best.0.max(best.1) {
            *best = (a, b);
        }
        Ok(Some((a, b)))
    };
    let exhausted = |best: (f64, f64)| Error::SequenceExhausted {
        stage,
        horizon: ctx.k_max,
        best_a: best.0,
        best_b: best.1,
        budget,
    };
    let member = |from: u64| -> Option<u64> {
        let k = ctx.selection.next_member(ctx.sequence, from, MEMBER_SCAN)?;
        (k <= ctx.k_max).then_some(k)
    };

    let floor = floor.max(1);
    let mut lo: Option<u64> = None;
    let mut step = 1u64;
    let (hi, mut hi_vals) = loop {
        let cand = floor.saturating_add(step - 1);
        if cand > ctx.k_max {
            return Err(exhausted(best));
        }
        let Some(k) = member(cand) else {
            return Err(exhausted(best));
        };
        match check(k, &mut best)? {
            Some((a, b)) if a <= budget && b <= budget => break (k, (a, b)),
            Some(_) => lo = Some(k),
            None => return Err(exhausted(best)),
        }
        step = step.saturating_mul(2);
    };

    let mut hi = hi;
    if let Some(mut lo) = lo {
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            let k = member(mid).filter(|&k| k < hi);
            let Some(k) = k else {
                // no member in [mid, hi): the answer is hi or lies below mid
                match member(lo + 1).filter(|&k| k < mid) {
                    None => break,
                    Some(k) => match check(k, &mut best)? {
                        Some((a, b)) if a <= budget && b <= budget => {
                            hi = k;
                            hi_vals = (a, b);
                        }
                        _ => lo = k,
                    },
                }
                continue;
            };
            match check(k, &mut best)? {
                Some((a, b)) if a <= budget && b <= budget => {
                    hi = k;
                    hi_vals = (a, b);
                }
                _ => lo = k,
            }
        }
    }
    Ok(IndexChoice {
        index: hi,
        condition_a: hi_vals.0,
        condition_b: hi_vals.1,
        evaluations,
    })
}

/// A built factor with its measured errors.
#[derive(Debug, Clone)]
pub struct FactorBuild {
    pub element: GeneratingElement,
    pub own_error: f64,
    pub retroactive: Vec<f64>,
}

/// Builds `x_j` from the pullback `h = f̃_j∘φ_{n_j}⁻¹` pinned at `λ`.
///
/// The corrector index starts at `max(j_min, j + j_min)` and rises until
/// `sup|x_j∘φ_{n_j} − f̃_j| ≤ ε_j/2`; the pin corrector must sit much closer
/// to `λ` than `φ_{n_j}(probe)` does. The factor must then stay within
/// `δ/2^j` of 1 on every earlier image `φ_{n_m}(probe)`.
#[allow(clippy::too_many_arguments)]
pub fn build_factor(
    ctx: &SearchContext<'_>,
    stage: usize,
    index: u64,
    projected: &GeneratingElement,
    lambda: &TorusPoint,
    j_min: u32,
    tolerance: f64,
    budget: f64,
    prior_indices: &[u64],
) -> Result<FactorBuild> {
    let phi = ctx
        .sequence
        .get(index)
        .ok_or_else(|| Error::Validity(format!("sequence has no element {index}")))?;
    let pullback = CompositionOperator::inverse(&phi).apply(&projected.product)?;
    let here = images(&phi, ctx.probe)?;
    let reference = ctx
        .probe
        .grid()
        .iter()
        .map(|z| projected.product.eval(z))
        .collect::<Result<Vec<_>>>()?;

    let start = j_min.max(j_min + stage as u32).min(MAX_CORRECTOR_INDEX);
    let mut best_err = f64::INFINITY;
    let mut chosen = None;
    for jj in start..=MAX_CORRECTOR_INDEX {
        let element = make_generating_element(jj, lambda, &pullback)?;
        let mut err = 0.0f64;
        for (w, r) in here.iter().zip(&reference) {
            err = err.max((element.product.eval(w)? - r).norm());
        }
        best_err = best_err.min(err);
        if err <= tolerance / 2.0 {
            chosen = Some((element, err));
            break;
        }
    }
    let Some((element, own_error)) = chosen else {
        return Err(Error::ProjectionFailed {
            achieved: best_err,
            tolerance: tolerance / 2.0,
        });
    };

    let mut retroactive = Vec::with_capacity(prior_indices.len());
    for &m in prior_indices {
        let phi_m = ctx
            .sequence
            .get(m)
            .ok_or_else(|| Error::Validity(format!("sequence has no element {m}")))?;
        let v = sup_minus_one(&element.product, &images(&phi_m, ctx.probe)?)?;
        if v > budget {
            return Err(Error::InterferenceBudgetExceeded {
                stage,
                value: v,
                budget,
            });
        }
        retroactive.push(v);
    }
    Ok(FactorBuild {
        element,
        own_error,
        retroactive,
    })
}

fn assemble(stages: &[StageRecord]) -> Result<Option<HoloFunction>> {
    match stages.len() {
        0 => Ok(None),
        1 => Ok(Some(stages[0].factor.product.clone())),
        _ => Ok(Some(HoloFunction::product(
            stages.iter().map(|s| s.factor.product.clone()).collect(),
        )?)),
    }
}

fn run_stage(
    config: &EngineConfig,
    ctx: &SearchContext<'_>,
    stage: usize,
    done: &[StageRecord],
) -> Result<StageRecord> {
    let target = &config.targets[stage - 1];
    let tolerance = config.stage_tolerance(stage);
    let budget = config.stage_budget(stage);
    let projected = project_to_family(
        target,
        &ctx.selection.gamma,
        config.j_min + stage as u32,
        tolerance / 2.0,
        config.schur_depth,
        ctx.probe,
    )?;
    let projection_error = probe_sup(&projected.product, target, ctx.probe)?;
    let prior: Vec<HoloFunction> = done.iter().map(|s| s.factor.product.clone()).collect();
    let prior_indices: Vec<u64> = done.iter().map(|s| s.index).collect();

    let mut floor = prior_indices.last().map_or(1, |k| k + 1);
    let mut evaluations = 0;
    for escalations in 0..=MAX_ESCALATIONS {
        let choice = choose_stage_index(ctx, &prior, &projected.product, stage, floor, budget)?;
        evaluations += choice.evaluations;
        match build_factor(
            ctx,
            stage,
            choice.index,
            &projected,
            &ctx.selection.lambda,
            config.j_min,
            tolerance,
            budget,
            &prior_indices,
        ) {
            Ok(built) => {
                let phi = config.sequence.get(choice.index).expect("chosen index exists");
                let round_trip = CompositionOperator::forward(&phi)
                    .apply(&CompositionOperator::inverse(&phi).apply(&projected.product)?)?;
                return Ok(StageRecord {
                    stage,
                    index: choice.index,
                    target: target.clone(),
                    inverse_law_residual: probe_sup(&round_trip, &projected.product, ctx.probe)?,
                    projected,
                    factor: built.element,
                    tolerance,
                    budget,
                    condition_a: choice.condition_a,
                    condition_b: choice.condition_b,
                    projection_error,
                    own_error: built.own_error,
                    interference: interference_values(&prior, &phi, ctx.probe)?,
                    retroactive: built.retroactive,
                    escalations,
                    search_evaluations: evaluations,
                });
            }
            Err(Error::InterferenceBudgetExceeded { .. }) if escalations < MAX_ESCALATIONS => {
                floor = choice.index.saturating_mul(ESCALATION_FACTOR);
            }
            Err(e) => return Err(e),
        }
    }
    unreachable!("the final escalation returns")
}

/// Runs stages `1..=J` for the `J` targets. Failures after subsequence
/// selection yield a partial run with the error attached.
pub fn run_universality(config: &EngineConfig) -> Result<UniversalityRun> {
    config.validate()?;
    let selection = select_subsequence(
        &config.sequence,
        config.selection_horizon,
        config.angle_tol,
        config.boundary_threshold,
    )?;
    let ctx = SearchContext {
        sequence: &config.sequence,
        selection: &selection,
        probe: &config.probe,
        k_max: config.k_max,
    };
    let mut stages: Vec<StageRecord> = Vec::new();
    let mut failure = None;
    for stage in 1..=config.targets.len() {
        match run_stage(config, &ctx, stage, &stages) {
            Ok(rec) => stages.push(rec),
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }
    let product = assemble(&stages)?;
    let verification = match &product {
        Some(x) => {
            let indices = IndexSet::Listed(stages.iter().map(|s| s.index).collect());
            verify_orbit(x, &config.sequence, &config.targets[..stages.len()], &config.probe, &indices)?
        }
        None => Vec::new(),
    };
    Ok(UniversalityRun {
        selection,
        stages,
        product,
        verification,
        failure,
    })
}

/// For each target, the smallest `probe_sup(x∘φ_k, f)` over `indices`
/// (first minimiser on ties). Indices absent from the sequence are skipped;
/// an empty scan reports index 0 and an infinite value.
pub fn verify_orbit(
    x: &HoloFunction,
    sequence: &AutomorphismSequence,
    targets: &[HoloFunction],
    probe: &CompactProbe,
    indices: &IndexSet,
) -> Result<Vec<OrbitEntry>> {
    let mut out: Vec<OrbitEntry> = (0..targets.len())
        .map(|t| OrbitEntry {
            target: t,
            best_index: 0,
            value: f64::INFINITY,
        })
        .collect();
    for k in indices.iter() {
        let Some(phi) = sequence.get(k) else {
            continue;
        };
        let moved = CompositionOperator::forward(&phi).apply(x)?;
        for (entry, f) in out.iter_mut().zip(targets) {
            let v = probe_sup(&moved, f, probe)?;
            if v < entry.value {
                entry.value = v;
                entry.best_index = k;
            }
        }
    }
    Ok(out)
}
