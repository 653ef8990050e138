//! End-to-end engine runs checked against their stated invariants.

use num_complex::Complex64;
use polydisk_core::automorphisms::{AngleSchedule, AutomorphismSequence, Permutation, RadialProfile, SequenceGenerator};
use polydisk_core::dsl::to_dsl;
use polydisk_core::engine::{run_universality, verify_orbit, EngineConfig, IndexSet, UniversalityRun};
use polydisk_core::geometry::probe_sup;
use polydisk_core::inner_tools::radial_modulus_report;
use polydisk_core::{CompositionOperator, HoloFunction, TorusPoint};

fn radial(n: usize, perm: Permutation) -> AutomorphismSequence {
    AutomorphismSequence::Generated(
        SequenceGenerator::new(
            TorusPoint::ones(n),
            RadialProfile::Converging { rate: 1.0 },
            AngleSchedule::Constant(vec![0.0; n]),
            vec![perm],
        )
        .unwrap(),
    )
}

fn one_variable_config() -> EngineConfig {
    let targets = vec![
        HoloFunction::constant(1, Complex64::new(0.5, 0.0)).unwrap(),
        HoloFunction::coordinate(1, 1).unwrap(),
    ];
    EngineConfig::new(radial(1, Permutation::identity(1)), targets).unwrap()
}

fn run(cfg: &EngineConfig) -> UniversalityRun {
    let run = run_universality(cfg).unwrap();
    assert!(run.is_complete(), "{:?}", run.failure);
    run
}

#[test]
fn indices_increase_and_runs_repeat() {
    let cfg = one_variable_config();
    let (a, b) = (run(&cfg), run(&cfg));
    assert!(a.indices().windows(2).all(|w| w[0] < w[1]), "{:?}", a.indices());
    assert_eq!(a.indices(), b.indices());
    for (s, t) in a.stages.iter().zip(&b.stages) {
        assert_eq!(to_dsl(s.factor.function()), to_dsl(t.factor.function()));
        assert_eq!(to_dsl(s.projected.function()), to_dsl(t.projected.function()));
        assert_eq!(s.own_error.to_bits(), t.own_error.to_bits());
        assert_eq!(s.interference, t.interference);
        assert_eq!(s.retroactive, t.retroactive);
    }
}

#[test]
fn stage_errors_stay_within_their_parts() {
    let cfg = one_variable_config();
    let run = run(&cfg);
    let x = run.product.as_ref().unwrap();
    for (s, f) in run.stages.iter().zip(&cfg.targets) {
        let phi = cfg.sequence.get(s.index).unwrap();
        let moved = CompositionOperator::forward(&phi).apply(x).unwrap();
        let err = probe_sup(&moved, f, &cfg.probe).unwrap();
        assert!(err <= s.tolerance + cfg.delta + s.projection_error, "stage {}: {err}", s.stage);
        assert!(s.condition_a <= s.budget && s.condition_b <= s.budget);
        assert!(s.retroactive.iter().all(|r| *r <= s.budget), "{:?}", s.retroactive);
    }
    for (e, s) in run.verification.iter().zip(&run.stages) {
        assert!(e.value <= s.tolerance + cfg.delta, "target {}: {}", e.target, e.value);
    }
}

#[test]
fn inverse_law_holds_at_the_first_index() {
    let run = run(&one_variable_config());
    assert!(run.stages[0].inverse_law_residual <= 1e-10, "{}", run.stages[0].inverse_law_residual);
    assert!(run.stages.iter().all(|s| s.inverse_law_residual.is_finite()));
}

#[test]
fn product_deviation_is_bounded_by_its_factors() {
    let run = run(&one_variable_config());
    let radii = [0.9, 0.99, 0.999];
    let x = run.product.as_ref().unwrap();
    let whole = radial_modulus_report(x, &radii, 512).unwrap().deviations[2];
    let parts: f64 = run
        .stages
        .iter()
        .map(|s| radial_modulus_report(s.factor.function(), &radii, 512).unwrap().deviations[2])
        .sum();
    assert!(whole <= parts + 1e-15, "{whole} > {parts}");
}

#[test]
fn last_factor_does_work() {
    let cfg = one_variable_config();
    let run = run(&cfg);
    let indices = IndexSet::Listed(run.indices());
    let last = cfg.targets.len() - 1;
    let with = run.verification[last].value;
    // dropping x_J leaves x_1 alone when J = 2
    let truncated = run.stages[0].factor.function();
    let without = verify_orbit(truncated, &cfg.sequence, &cfg.targets, &cfg.probe, &indices).unwrap()[last].value;
    assert!((without - with).abs() > cfg.delta, "{with} vs {without}");
}

#[test]
fn swap_run_in_two_variables() {
    let targets = vec![
        HoloFunction::constant(2, Complex64::new(0.5, 0.0)).unwrap(),
        HoloFunction::product(vec![
            HoloFunction::coordinate(2, 1).unwrap(),
            HoloFunction::coordinate(2, 2).unwrap(),
        ])
        .unwrap(),
    ];
    let mut cfg = EngineConfig::new(radial(2, Permutation::new(vec![1, 0]).unwrap()), targets).unwrap();
    cfg.probe = polydisk_core::CompactProbe::with_default_resolution(0.25, 2).unwrap();
    let run = run(&cfg);
    assert_eq!(run.selection.permutation, Permutation::new(vec![1, 0]).unwrap());
    assert!(run.verification.iter().all(|e| e.value <= 0.1), "{:?}", run.verification);
}
