//! Automorphisms of the polydisk in normal form: a coordinate permutation
//! followed by one disk automorphism per coordinate,
//! `φ(z)_j = e^{iθ_j} (α_j − z_{p(j)}) / (1 − conj(α_j) z_{p(j)})`.

mod selection;
mod sequence;

pub use selection::{select_subsequence, SubsequenceSelection};
pub use sequence::{AngleSchedule, AutomorphismSequence, RadialProfile, SequenceGenerator};

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

// inside the closed polydisk |1 − ᾱz| ≥ 1 − |α| > 0, so only a true pole trips this
const POLE_TOL: f64 = f64::MIN_POSITIVE;

/// Maps an angle into `(−π, π]`.
pub fn normalize_angle(theta: f64) -> f64 {
    let mut t = theta % (2.0 * PI);
    if t <= -PI {
        t += 2.0 * PI;
    } else if t > PI {
        t -= 2.0 * PI;
    }
    t
}

/// Disk automorphism `σ(z) = e^{iθ}(α − z)/(1 − ᾱz)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobiusFactor {
    alpha: Complex64,
    theta: f64,
    rotation: Complex64,
}

impl MobiusFactor {
    pub fn new(alpha: Complex64, theta: f64) -> Result<Self> {
        if !(alpha.norm() < 1.0) || !theta.is_finite() {
            return Err(Error::Validity(format!(
                "Möbius factor needs |alpha| < 1 and finite theta (alpha = {alpha}, theta = {theta})"
            )));
        }
        let theta = normalize_angle(theta);
        Ok(MobiusFactor {
            alpha,
            theta,
            rotation: Complex64::from_polar(1.0, theta),
        })
    }

    /// `α = 0, θ = π`, i.e. `z ↦ z`.
    pub fn identity() -> Self {
        MobiusFactor {
            alpha: Complex64::new(0.0, 0.0),
            theta: PI,
            rotation: Complex64::new(-1.0, 0.0),
        }
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn rotation(&self) -> Complex64 {
        self.rotation
    }

    /// Converts the `(α − λz)/(1 − ᾱλz)` placement of the unimodular constant
    /// into normal form: that map equals `e^{iθ}(α' − z)/(1 − ᾱ'z)` with
    /// `α' = conj(λ)α` and `e^{iθ} = λ`.
    pub fn from_inner_rotation(alpha: Complex64, lambda: Complex64) -> Result<Self> {
        if (lambda.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::Validity(format!("rotation {lambda} is not unimodular")));
        }
        MobiusFactor::new(lambda.conj() * alpha, lambda.arg())
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let den = Complex64::new(1.0, 0.0) - self.alpha.conj() * z;
        if den.norm() < POLE_TOL {
            return Err(Error::PoleHit { z: z.to_string() });
        }
        Ok(self.rotation * (self.alpha - z) / den)
    }

    pub fn inverse(&self) -> Self {
        MobiusFactor::new(self.rotation * self.alpha, -self.theta)
            .expect("inverse of a valid factor is valid")
    }

    /// Normal form of `z ↦ self(other(z))`.
    pub fn compose(&self, other: &MobiusFactor) -> Result<Self> {
        // zero of the composite: other(α) = self⁻¹(0) = self.alpha
        let alpha = other.inverse().eval(self.alpha)?;
        let z0 = if alpha.re >= 0.0 {
            Complex64::new(-0.5, 0.0)
        } else {
            Complex64::new(0.5, 0.0)
        };
        let tau = self.eval(other.eval(z0)?)?;
        let rot = tau * (Complex64::new(1.0, 0.0) - alpha.conj() * z0) / (alpha - z0);
        MobiusFactor::new(alpha, rot.arg())
    }
}

impl fmt::Display for MobiusFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "σ(α={}, θ={})", self.alpha, self.theta)
    }
}

pub fn mobius_eval(f: &MobiusFactor, z: Complex64) -> Result<Complex64> {
    f.eval(z)
}

pub fn mobius_inverse(f: &MobiusFactor) -> MobiusFactor {
    f.inverse()
}

/// Bijection of `{0..n-1}`; `p[j]` is the source coordinate feeding output `j`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &i in &map {
            if i >= n || seen[i] {
                return Err(Error::Validity(format!("{map:?} is not a permutation")));
            }
            seen[i] = true;
        }
        Ok(Permutation(map))
    }

    /// From 1-based images, as written in configs and the DSL.
    pub fn from_one_based(map: &[usize]) -> Result<Self> {
        if map.iter().any(|&i| i == 0) {
            return Err(Error::Validity(format!("{map:?} is not 1-based")));
        }
        Permutation::new(map.iter().map(|i| i - 1).collect())
    }

    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, j: usize) -> usize {
        self.0[j]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|i| i + 1).collect()
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (j, &i) in self.0.iter().enumerate() {
            inv[i] = j;
        }
        Permutation(inv)
    }
}

/// Automorphism of 𝔻ⁿ in normal form.
#[derive(Debug, Clone, PartialEq)]
pub struct PolydiskAutomorphism {
    permutation: Permutation,
    factors: Vec<MobiusFactor>,
}

impl PolydiskAutomorphism {
    pub fn new(permutation: Permutation, factors: Vec<MobiusFactor>) -> Result<Self> {
        if permutation.len() != factors.len() || factors.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: permutation.len(),
                got: factors.len(),
            });
        }
        Ok(PolydiskAutomorphism {
            permutation,
            factors,
        })
    }

    pub fn identity(n: usize) -> Self {
        PolydiskAutomorphism {
            permutation: Permutation::identity(n),
            factors: vec![MobiusFactor::identity(); n],
        }
    }

    pub fn dimension(&self) -> usize {
        self.factors.len()
    }

    pub fn permutation(&self) -> &Permutation {
        &self.permutation
    }

    pub fn factors(&self) -> &[MobiusFactor] {
        &self.factors
    }

    pub fn eval(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        if z.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: z.len(),
            });
        }
        self.factors
            .iter()
            .enumerate()
            .map(|(j, f)| f.eval(z[self.permutation.get(j)]))
            .collect()
    }

    pub fn inverse(&self) -> Self {
        let pinv = self.permutation.inverse();
        let factors = (0..self.dimension())
            .map(|i| self.factors[pinv.get(i)].inverse())
            .collect();
        PolydiskAutomorphism {
            permutation: pinv,
            factors,
        }
    }

    /// Normal form of `z ↦ self(other(z))`.
    pub fn compose(&self, other: &PolydiskAutomorphism) -> Result<Self> {
        if self.dimension() != other.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: other.dimension(),
            });
        }
        let n = self.dimension();
        let mut perm = Vec::with_capacity(n);
        let mut factors = Vec::with_capacity(n);
        for j in 0..n {
            let pj = self.permutation.get(j);
            perm.push(other.permutation.get(pj));
            factors.push(self.factors[j].compose(&other.factors[pj])?);
        }
        PolydiskAutomorphism::new(Permutation(perm), factors)
    }

    /// Limit point on 𝕋ⁿ of `φ(0) = (e^{iθ_j} α_j)_j` after radial projection.
    pub fn image_of_origin(&self) -> Vec<Complex64> {
        self.factors.iter().map(|f| f.rotation * f.alpha).collect()
    }
}

pub fn auto_eval(phi: &PolydiskAutomorphism, z: &[Complex64]) -> Result<Vec<Complex64>> {
    phi.eval(z)
}

pub fn auto_inverse(phi: &PolydiskAutomorphism) -> PolydiskAutomorphism {
    phi.inverse()
}

pub fn auto_compose(
    phi: &PolydiskAutomorphism,
    psi: &PolydiskAutomorphism,
) -> Result<PolydiskAutomorphism> {
    phi.compose(psi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn angles_land_in_half_open_interval() {
        assert_eq!(normalize_angle(PI), PI);
        assert_eq!(normalize_angle(-PI), PI);
        assert!((normalize_angle(3.0 * PI) - PI).abs() < 1e-15);
        assert!((normalize_angle(-0.5) + 0.5).abs() < 1e-15);
        assert!((normalize_angle(7.0) - (7.0 - 2.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn mobius_eval_examples() {
        let s = MobiusFactor::new(c(0.5, 0.0), 0.0).unwrap();
        assert!((s.eval(c(0.0, 0.0)).unwrap() - c(0.5, 0.0)).norm() < 1e-15);
        assert!(s.eval(c(0.5, 0.0)).unwrap().norm() < 1e-15);
        assert!((s.eval(c(1.0, 0.0)).unwrap() - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn mobius_pole_is_reported() {
        let s = MobiusFactor::new(c(0.5, 0.0), 0.0).unwrap();
        assert!(matches!(s.eval(c(2.0, 0.0)), Err(Error::PoleHit { .. })));
    }

    #[test]
    fn mobius_rejects_alpha_on_circle() {
        assert!(MobiusFactor::new(c(1.0, 0.0), 0.0).is_err());
        assert!(MobiusFactor::new(c(0.6, 0.8), 0.0).is_err());
    }

    #[test]
    fn mobius_inverse_examples() {
        let s = MobiusFactor::new(c(0.0, 0.0), 0.0).unwrap();
        let si = s.inverse();
        assert_eq!(si.alpha(), c(0.0, 0.0));
        assert_eq!(si.theta(), 0.0);

        let s = MobiusFactor::new(c(0.5, 0.0), PI / 2.0).unwrap();
        let si = s.inverse();
        assert!((si.alpha() - c(0.0, 0.5)).norm() < 1e-15);
        assert!((si.theta() + PI / 2.0).abs() < 1e-15);

        // σ with θ = 0 is an involution
        let s = MobiusFactor::new(c(0.5, 0.0), 0.0).unwrap();
        let si = s.inverse();
        assert!((si.alpha() - c(0.5, 0.0)).norm() < 1e-15);
        assert_eq!(si.theta(), 0.0);
        for k in 0..100 {
            let z = Complex64::from_polar(0.9 * (k % 10) as f64 / 10.0, k as f64 * 0.7);
            assert!((s.eval(s.eval(z).unwrap()).unwrap() - z).norm() < 1e-12);
        }
    }

    #[test]
    fn inner_rotation_convention_matches() {
        let alpha = c(0.3, -0.2);
        let lambda = Complex64::from_polar(1.0, 1.1);
        let f = MobiusFactor::from_inner_rotation(alpha, lambda).unwrap();
        for k in 0..20 {
            let z = Complex64::from_polar(0.8, k as f64);
            let direct = (alpha - lambda * z) / (1.0 - alpha.conj() * lambda * z);
            assert!((f.eval(z).unwrap() - direct).norm() < 1e-14);
        }
    }

    #[test]
    fn auto_eval_examples() {
        let z = [c(0.3, -0.1), c(0.2, 0.4)];
        let id = PolydiskAutomorphism::identity(2);
        let w = id.eval(&z).unwrap();
        assert!((w[0] - z[0]).norm() < 1e-15 && (w[1] - z[1]).norm() < 1e-15);

        let swap = PolydiskAutomorphism::new(
            Permutation::from_one_based(&[2, 1]).unwrap(),
            vec![MobiusFactor::new(c(0.0, 0.0), PI).unwrap(); 2],
        )
        .unwrap();
        let w = swap.eval(&[c(0.1, 0.0), c(0.0, 0.2)]).unwrap();
        assert!((w[0] - c(0.0, 0.2)).norm() < 1e-15);
        assert!((w[1] - c(0.1, 0.0)).norm() < 1e-15);

        let phi = PolydiskAutomorphism::new(
            Permutation::identity(1),
            vec![MobiusFactor::new(c(0.5, 0.0), 0.0).unwrap()],
        )
        .unwrap();
        // (1/2 - 1/4)/(1 - 1/8) = 2/7
        let w = phi.eval(&[c(0.25, 0.0)]).unwrap();
        assert!((w[0] - c(2.0 / 7.0, 0.0)).norm() < 1e-15);
        assert!(phi.eval(&[c(0.0, 0.0), c(0.0, 0.0)]).is_err());
    }

    #[test]
    fn auto_inverse_examples() {
        let id = PolydiskAutomorphism::identity(3);
        let inv = id.inverse();
        assert_eq!(inv.permutation(), id.permutation());
        for f in inv.factors() {
            assert_eq!(f.alpha(), c(0.0, 0.0));
            assert!((f.theta().abs() - PI).abs() < 1e-15);
        }

        let phi = PolydiskAutomorphism::new(
            Permutation::identity(1),
            vec![MobiusFactor::new(c(0.5, 0.0), PI / 2.0).unwrap()],
        )
        .unwrap();
        let inv = phi.inverse();
        assert!((inv.factors()[0].alpha() - c(0.0, 0.5)).norm() < 1e-15);
        assert!((inv.factors()[0].theta() + PI / 2.0).abs() < 1e-15);

        let phi = PolydiskAutomorphism::new(
            Permutation::from_one_based(&[2, 1]).unwrap(),
            vec![
                MobiusFactor::new(c(0.3, 0.2), 0.4).unwrap(),
                MobiusFactor::new(c(-0.6, 0.1), -2.0).unwrap(),
            ],
        )
        .unwrap();
        let inv = phi.inverse();
        assert_eq!(inv.permutation().one_based(), vec![2, 1]);
        for a in 0..10 {
            for b in 0..10 {
                let z = [
                    Complex64::from_polar(0.09 * a as f64, a as f64 * 0.61),
                    Complex64::from_polar(0.09 * b as f64, b as f64 * 1.37),
                ];
                let back = phi.eval(&inv.eval(&z).unwrap()).unwrap();
                assert!((back[0] - z[0]).norm() < 1e-12);
                assert!((back[1] - z[1]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn compose_examples() {
        let rot = PolydiskAutomorphism::new(
            Permutation::identity(1),
            vec![MobiusFactor::new(c(0.0, 0.0), PI).unwrap()],
        )
        .unwrap();
        let r = rot.compose(&rot).unwrap();
        assert!(r.factors()[0].alpha().norm() < 1e-15);
        assert!((r.factors()[0].theta() - PI).abs() < 1e-12);

        let s = PolydiskAutomorphism::new(
            Permutation::identity(1),
            vec![MobiusFactor::new(c(0.5, 0.0), 0.0).unwrap()],
        )
        .unwrap();
        let ss = s.compose(&s).unwrap();
        assert!(ss.factors()[0].alpha().norm() < 1e-15);
        assert!((ss.factors()[0].theta().abs() - PI).abs() < 1e-12);
        for k in 0..50 {
            let z = [Complex64::from_polar(0.02 * k as f64, 0.3 * k as f64)];
            let w = ss.eval(&z).unwrap();
            assert!((w[0] - z[0]).norm() < 1e-12);
        }
    }

    #[test]
    fn permutation_validation() {
        assert!(Permutation::new(vec![0, 0]).is_err());
        assert!(Permutation::from_one_based(&[0, 1]).is_err());
        let p = Permutation::from_one_based(&[2, 3, 1]).unwrap();
        assert_eq!(p.inverse().one_based(), vec![3, 1, 2]);
    }
}
