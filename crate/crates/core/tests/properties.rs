use std::f64::consts::PI;

use num_complex::Complex64;
use polydisk_core::automorphisms::{MobiusFactor, Permutation, PolydiskAutomorphism};
use polydisk_core::dsl::{auto_to_dsl, parse_auto_dsl, parse_function_dsl, to_dsl};
use polydisk_core::{CompositionOperator, HoloFunction};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn in_disk(rng: &mut ChaCha8Rng, max_modulus: f64) -> Complex64 {
    Complex64::from_polar(max_modulus * rng.gen::<f64>().sqrt(), rng.gen_range(-PI..PI))
}

fn random_auto(rng: &mut ChaCha8Rng, n: usize) -> PolydiskAutomorphism {
    let mut map: Vec<usize> = (0..n).collect();
    map.shuffle(rng);
    let factors = (0..n)
        .map(|_| MobiusFactor::new(in_disk(rng, 0.9), rng.gen_range(-PI..PI)).unwrap())
        .collect();
    PolydiskAutomorphism::new(Permutation::new(map).unwrap(), factors).unwrap()
}

/// Random tree of bounded depth using every node kind.
fn random_tree(rng: &mut ChaCha8Rng, n: usize, depth: u32) -> HoloFunction {
    let j = rng.gen_range(1..=n);
    let pick = if depth == 0 { rng.gen_range(0..3) } else { rng.gen_range(0..6) };
    match pick {
        0 => HoloFunction::constant(n, in_disk(rng, 1.0)).unwrap(),
        1 => HoloFunction::coordinate(n, j).unwrap(),
        2 => HoloFunction::blaschke(n, j, in_disk(rng, 0.95), rng.gen_range(-PI..PI)).unwrap(),
        3 => {
            let k = rng.gen_range(2..=3);
            HoloFunction::product((0..k).map(|_| random_tree(rng, n, depth - 1)).collect()).unwrap()
        }
        4 => random_tree(rng, n, depth - 1).power(rng.gen_range(1..=4)).unwrap(),
        _ => random_tree(rng, n, depth - 1).compose(&random_auto(rng, n)).unwrap(),
    }
}

fn point(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| in_disk(rng, 0.99)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn dsl_round_trip_is_exact(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_tree(&mut rng, n, 3);
        let text = to_dsl(&f);
        let back = parse_function_dsl(&text, n).unwrap();
        prop_assert_eq!(&back, &f);
        prop_assert_eq!(to_dsl(&back), text);
    }

    #[test]
    fn automorphism_dsl_round_trip(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phi = random_auto(&mut rng, n);
        prop_assert_eq!(parse_auto_dsl(&auto_to_dsl(&phi), n).unwrap(), phi);
    }

    #[test]
    fn trees_stay_in_the_ball(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_tree(&mut rng, n, 3);
        for _ in 0..20 {
            let v = f.eval(&point(&mut rng, n)).unwrap();
            prop_assert!(v.norm() <= 1.0 + 1e-12, "|f| = {}", v.norm());
        }
    }

    #[test]
    fn composition_is_multiplicative(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_tree(&mut rng, n, 2);
        let g = random_tree(&mut rng, n, 2);
        let op = CompositionOperator::forward(&random_auto(&mut rng, n));
        let fg = HoloFunction::product(vec![f.clone(), g.clone()]).unwrap();
        let lhs = op.apply(&fg).unwrap();
        let (tf, tg) = (op.apply(&f).unwrap(), op.apply(&g).unwrap());
        for _ in 0..20 {
            let z = point(&mut rng, n);
            let d = (lhs.eval(&z).unwrap() - tf.eval(&z).unwrap() * tg.eval(&z).unwrap()).norm();
            prop_assert!(d <= 1e-12, "defect {d}");
        }
    }

    #[test]
    fn composition_reverses_order(seed in any::<u64>(), n in 1usize..=3) {
        // f∘(φ∘ψ) = (f∘φ)∘ψ, i.e. C_{φ∘ψ} = C_ψ C_φ
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_tree(&mut rng, n, 2);
        let (phi, psi) = (random_auto(&mut rng, n), random_auto(&mut rng, n));
        let joint = CompositionOperator::forward(&phi.compose(&psi).unwrap()).apply(&f).unwrap();
        let chained = CompositionOperator::forward(&psi)
            .apply(&CompositionOperator::forward(&phi).apply(&f).unwrap())
            .unwrap();
        for _ in 0..20 {
            let z = point(&mut rng, n);
            let d = (joint.eval(&z).unwrap() - chained.eval(&z).unwrap()).norm();
            prop_assert!(d <= 1e-10, "defect {d}");
        }
    }

    #[test]
    fn compose_is_associative(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b, c) = (random_auto(&mut rng, n), random_auto(&mut rng, n), random_auto(&mut rng, n));
        let left = a.compose(&b).unwrap().compose(&c).unwrap();
        let right = a.compose(&b.compose(&c).unwrap()).unwrap();
        prop_assert_eq!(left.permutation(), right.permutation());
        for _ in 0..20 {
            let z = point(&mut rng, n);
            let (l, r) = (left.eval(&z).unwrap(), right.eval(&z).unwrap());
            let d = l.iter().zip(&r).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            prop_assert!(d <= 1e-12, "defect {d}");
        }
    }
}
