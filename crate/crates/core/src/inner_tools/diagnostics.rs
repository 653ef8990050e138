use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::holo::HoloFunction;

/// Natural-log clamp applied to `log|g|` inside torus means.
pub const DEFAULT_CLAMP: f64 = 40.0;

/// Worst-case `| 1 − |f(r e^{iθ_1}, …, r e^{iθ_n})| |` per radius.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialReport {
    pub radii: Vec<f64>,
    pub deviations: Vec<f64>,
    pub angles_per_dim: usize,
}

impl RadialReport {
    /// Deviations shrink (weakly) as the radius grows.
    pub fn is_decreasing(&self) -> bool {
        self.deviations.windows(2).all(|w| w[1] <= w[0])
    }
}

/// Visits every point `(r ω^{t_1}, …, r ω^{t_n})` of the tensor grid, `ω = e^{2πi/Q}`.
fn for_each_torus_point(
    n: usize,
    r: f64,
    q: usize,
    mut visit: impl FnMut(&[Complex64]) -> Result<()>,
) -> Result<()> {
    let ring: Vec<Complex64> = (0..q)
        .map(|t| Complex64::from_polar(r, 2.0 * PI * t as f64 / q as f64))
        .collect();
    let mut idx = vec![0usize; n];
    let mut z = vec![ring[0]; n];
    loop {
        visit(&z)?;
        let mut d = 0;
        loop {
            if d == n {
                return Ok(());
            }
            idx[d] += 1;
            if idx[d] < q {
                z[d] = ring[idx[d]];
                break;
            }
            idx[d] = 0;
            z[d] = ring[0];
            d += 1;
        }
    }
}

pub fn radial_modulus_report(
    f: &HoloFunction,
    radii: &[f64],
    angles_per_dim: usize,
) -> Result<RadialReport> {
    check_radii(radii)?;
    if angles_per_dim == 0 {
        return Err(Error::Validity("need at least one angle per dimension".into()));
    }
    let mut deviations = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut worst = 0.0f64;
        for_each_torus_point(f.dimension(), r, angles_per_dim, |z| {
            worst = worst.max((1.0 - f.eval(z)?.norm()).abs());
            Ok(())
        })?;
        deviations.push(worst);
    }
    Ok(RadialReport {
        radii: radii.to_vec(),
        deviations,
        angles_per_dim,
    })
}

fn check_radii(radii: &[f64]) -> Result<()> {
    if radii.is_empty() {
        return Err(Error::Validity("radius schedule is empty".into()));
    }
    if radii.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
        return Err(Error::Validity(format!("radii must lie in (0,1): {radii:?}")));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Validity(format!("radii must increase strictly: {radii:?}")));
    }
    Ok(())
}

/// Torus mean of the clamped log-modulus and how many nodes hit the clamp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusMean {
    pub value: f64,
    pub clamped: usize,
}

/// `(1/Qⁿ) Σ max(log|g(rζ)|, −L)` over the tensor grid of Q-th roots of unity.
///
/// The trapezoid rule on the torus is exact for trigonometric polynomials of
/// degree `< Q` in each variable.
pub fn good_inner_integral(g: &HoloFunction, r: f64, q: usize, clamp: f64) -> Result<TorusMean> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Validity(format!("radius {r} not in (0,1)")));
    }
    if q < 16 {
        return Err(Error::Validity(format!("need Q ≥ 16 nodes, got {q}")));
    }
    if !(clamp > 0.0) {
        return Err(Error::Validity(format!("clamp level {clamp} must be positive")));
    }
    let mut sum = 0.0;
    let mut clamped = 0usize;
    let mut count = 0usize;
    for_each_torus_point(g.dimension(), r, q, |z| {
        let l = g.eval(z)?.norm().ln();
        if l <= -clamp || l.is_nan() {
            clamped += 1;
            sum -= clamp;
        } else {
            sum += l;
        }
        count += 1;
        Ok(())
    })?;
    Ok(TorusMean {
        value: sum / count as f64,
        clamped,
    })
}

/// Jensen's formula for a one-variable function with the given zeros:
/// `log|g(0)| + Σ_{|z_k| < r} log(r/|z_k|)`.
pub fn jensen_oracle(zeros: &[Complex64], value_at_0_modulus: f64, r: f64) -> Result<f64> {
    let mut total = value_at_0_modulus.ln();
    for z in zeros {
        let m = z.norm();
        if (m - r).abs() < 1e-6 {
            return Err(Error::RadiusOnZeroModulus { radius: r });
        }
        if m < r {
            total += (r / m).ln();
        }
    }
    Ok(total)
}

/// Torus means `I(r)` along a radius schedule and the good-inner trend verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct GoodInnerReport {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub clamped: Vec<usize>,
    pub clamp: f64,
    pub nodes_per_dim: usize,
    pub tolerance: f64,
    pub passes: bool,
}

/// Passes when `|I(r_last)| < tolerance` and `|I(r)|` is nonincreasing over
/// the last three radii.
pub fn good_inner_trend(
    g: &HoloFunction,
    radii: &[f64],
    q: usize,
    clamp: f64,
    tolerance: f64,
) -> Result<GoodInnerReport> {
    check_radii(radii)?;
    let mut values = Vec::with_capacity(radii.len());
    let mut clamped = Vec::with_capacity(radii.len());
    for &r in radii {
        let m = good_inner_integral(g, r, q, clamp)?;
        values.push(m.value);
        clamped.push(m.clamped);
    }
    let last = values.last().copied().unwrap_or(f64::NAN);
    let tail = &values[values.len().saturating_sub(3)..];
    let monotone = tail.windows(2).all(|w| w[1].abs() <= w[0].abs());
    Ok(GoodInnerReport {
        radii: radii.to_vec(),
        values,
        clamped,
        clamp,
        nodes_per_dim: q,
        tolerance,
        passes: last.abs() < tolerance && monotone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automorphisms::{MobiusFactor, Permutation, PolydiskAutomorphism};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn radial_examples() {
        let z = HoloFunction::coordinate(1, 1).unwrap();
        let rep = radial_modulus_report(&z, &[0.5, 0.9, 0.99], 64).unwrap();
        for (r, d) in rep.radii.iter().zip(&rep.deviations) {
            assert!((d - (1.0 - r)).abs() < 1e-15);
        }
        assert!(rep.is_decreasing());

        let half = HoloFunction::constant(1, c(0.5, 0.0)).unwrap();
        let rep = radial_modulus_report(&half, &[0.5, 0.999], 16).unwrap();
        assert!(rep.deviations.iter().all(|d| (d - 0.5).abs() < 1e-15));

        let b = HoloFunction::blaschke(1, 1, c(0.5, 0.0), 0.0).unwrap();
        let rep = radial_modulus_report(&b, &[0.999], 256).unwrap();
        assert!(rep.deviations[0] < 0.005);
        assert!(radial_modulus_report(&b, &[0.9, 0.5], 16).is_err());
    }

    #[test]
    fn integral_examples() {
        let z = HoloFunction::coordinate(1, 1).unwrap();
        for r in [0.3, 0.9, 0.999] {
            let m = good_inner_integral(&z, r, 64, DEFAULT_CLAMP).unwrap();
            assert!((m.value - r.ln()).abs() < 1e-14);
            assert_eq!(m.clamped, 0);
        }
        let zz = HoloFunction::product(vec![
            HoloFunction::coordinate(2, 1).unwrap(),
            HoloFunction::coordinate(2, 2).unwrap(),
        ])
        .unwrap();
        let m = good_inner_integral(&zz, 0.9, 32, DEFAULT_CLAMP).unwrap();
        assert!((m.value - 2.0 * 0.9f64.ln()).abs() < 1e-13);

        let b = HoloFunction::blaschke(1, 1, c(0.5, 0.0), 0.0).unwrap();
        let m = good_inner_integral(&b, 0.9, 512, DEFAULT_CLAMP).unwrap();
        assert!((m.value - 0.9f64.ln()).abs() < 1e-6);
        assert!(good_inner_integral(&b, 0.9, 8, DEFAULT_CLAMP).is_err());
    }

    #[test]
    fn clamp_counts_zero_on_node() {
        // zero exactly on a node of the r = 0.5 grid
        let b = HoloFunction::blaschke(1, 1, c(0.5, 0.0), 0.0).unwrap();
        let m = good_inner_integral(&b, 0.5, 16, 10.0).unwrap();
        assert_eq!(m.clamped, 1);
        assert!(m.value.is_finite());
    }

    #[test]
    fn jensen_examples() {
        let v = jensen_oracle(&[c(0.5, 0.0)], 0.5, 0.9).unwrap();
        assert!((v - 0.9f64.ln()).abs() < 1e-15);
        assert!((v + 0.10536051565782628).abs() < 1e-15);
        assert_eq!(jensen_oracle(&[], 1.0, 0.7).unwrap(), 0.0);
        let v = jensen_oracle(&[c(0.5, 0.0)], 0.5, 0.3).unwrap();
        assert!((v - 0.5f64.ln()).abs() < 1e-15);
        assert!(matches!(
            jensen_oracle(&[c(0.5, 0.0)], 0.5, 0.5),
            Err(Error::RadiusOnZeroModulus { .. })
        ));
    }

    #[test]
    fn trend_examples() {
        let radii = [0.9, 0.99, 0.999];
        let z5 = HoloFunction::coordinate(1, 1).unwrap().power(5).unwrap();
        let rep = good_inner_trend(&z5, &radii, 64, DEFAULT_CLAMP, 0.02).unwrap();
        assert!(rep.passes);
        for (r, v) in radii.iter().zip(&rep.values) {
            assert!((v - 5.0 * r.ln()).abs() < 1e-12);
        }

        let phi = PolydiskAutomorphism::new(
            Permutation::identity(1),
            vec![MobiusFactor::new(c(-0.3, 0.6), 2.0).unwrap()],
        )
        .unwrap();
        let g = HoloFunction::blaschke(1, 1, c(0.5, 0.0), 0.0)
            .unwrap()
            .compose(&phi)
            .unwrap();
        assert!(good_inner_trend(&g, &radii, 512, DEFAULT_CLAMP, 0.02).unwrap().passes);

        let half = HoloFunction::constant(1, c(0.5, 0.0)).unwrap();
        let rep = good_inner_trend(&half, &radii, 64, DEFAULT_CLAMP, 0.02).unwrap();
        assert!(!rep.passes);
        assert!(rep.values.iter().all(|v| (v - 0.5f64.ln()).abs() < 1e-15));
    }
}
