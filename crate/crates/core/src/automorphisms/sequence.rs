use num_complex::Complex64;

use super::{normalize_angle, MobiusFactor, Permutation, PolydiskAutomorphism};
use crate::error::{Error, Result};
use crate::geometry::TorusPoint;

/// Angle vectors `θ^k` of a generated sequence.
#[derive(Debug, Clone, PartialEq)]
pub enum AngleSchedule {
    Constant(Vec<f64>),
    /// `θ^k = limit + amplitude / (k+1)`.
    Decaying { limit: Vec<f64>, amplitude: Vec<f64> },
    /// `θ^k = values[(k-1) mod len]`.
    Cyclic(Vec<Vec<f64>>),
}

impl AngleSchedule {
    fn dimension_ok(&self, n: usize) -> bool {
        match self {
            AngleSchedule::Constant(v) => v.len() == n,
            AngleSchedule::Decaying { limit, amplitude } => limit.len() == n && amplitude.len() == n,
            AngleSchedule::Cyclic(vs) => !vs.is_empty() && vs.iter().all(|v| v.len() == n),
        }
    }

    pub fn at(&self, k: u64) -> Vec<f64> {
        let raw = match self {
            AngleSchedule::Constant(v) => v.clone(),
            AngleSchedule::Decaying { limit, amplitude } => limit
                .iter()
                .zip(amplitude)
                .map(|(l, a)| l + a / (k as f64 + 1.0))
                .collect(),
            AngleSchedule::Cyclic(vs) => vs[((k - 1) % vs.len() as u64) as usize].clone(),
        };
        raw.into_iter().map(normalize_angle).collect()
    }

    /// Closed-form limit, when the schedule converges.
    pub fn limit(&self) -> Option<Vec<f64>> {
        match self {
            AngleSchedule::Constant(v) => Some(v.iter().copied().map(normalize_angle).collect()),
            AngleSchedule::Decaying { limit, .. } => {
                Some(limit.iter().copied().map(normalize_angle).collect())
            }
            AngleSchedule::Cyclic(vs) if vs.len() == 1 => {
                Some(vs[0].iter().copied().map(normalize_angle).collect())
            }
            AngleSchedule::Cyclic(_) => None,
        }
    }
}

/// Moduli of the Möbius zeros along a generated sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadialProfile {
    /// `|α^k_j| = 1 − c/(k+1)`, `c ∈ (0, 1]`.
    Converging { rate: f64 },
    /// `|α^k_j| = m` for every k; never reaches the boundary.
    Fixed { modulus: f64 },
}

impl RadialProfile {
    pub fn modulus(&self, k: u64) -> f64 {
        match *self {
            RadialProfile::Converging { rate } => 1.0 - rate / (k as f64 + 1.0),
            RadialProfile::Fixed { modulus } => modulus,
        }
    }
}

/// Closed-form description of an infinite automorphism sequence, indexed from 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceGenerator {
    direction: TorusPoint,
    radial: RadialProfile,
    angles: AngleSchedule,
    permutations: Vec<Permutation>,
}

impl SequenceGenerator {
    pub fn new(
        direction: TorusPoint,
        radial: RadialProfile,
        angles: AngleSchedule,
        permutations: Vec<Permutation>,
    ) -> Result<Self> {
        let n = direction.dimension();
        match radial {
            RadialProfile::Converging { rate } if !(rate > 0.0 && rate <= 1.0) => {
                return Err(Error::Validity(format!("radial rate {rate} not in (0,1]")));
            }
            RadialProfile::Fixed { modulus } if !(0.0..1.0).contains(&modulus) => {
                return Err(Error::Validity(format!("fixed modulus {modulus} not in [0,1)")));
            }
            _ => {}
        }
        if !angles.dimension_ok(n) {
            return Err(Error::Validity("angle schedule dimension mismatch".into()));
        }
        if permutations.is_empty() || permutations.iter().any(|p| p.len() != n) {
            return Err(Error::Validity("permutation schedule dimension mismatch".into()));
        }
        Ok(SequenceGenerator {
            direction,
            radial,
            angles,
            permutations,
        })
    }

    pub fn direction(&self) -> &TorusPoint {
        &self.direction
    }

    pub fn radial(&self) -> RadialProfile {
        self.radial
    }

    pub fn angles(&self) -> &AngleSchedule {
        &self.angles
    }

    pub fn permutations(&self) -> &[Permutation] {
        &self.permutations
    }

    pub fn dimension(&self) -> usize {
        self.direction.dimension()
    }

    pub fn permutation_at(&self, k: u64) -> &Permutation {
        &self.permutations[((k - 1) % self.permutations.len() as u64) as usize]
    }

    pub fn alphas_at(&self, k: u64) -> Vec<Complex64> {
        let m = self.radial.modulus(k);
        self.direction.coords().iter().map(|d| d * m).collect()
    }

    pub fn at(&self, k: u64) -> Result<PolydiskAutomorphism> {
        let factors = self
            .alphas_at(k)
            .into_iter()
            .zip(self.angles.at(k))
            .map(|(a, t)| MobiusFactor::new(a, t))
            .collect::<Result<Vec<_>>>()?;
        PolydiskAutomorphism::new(self.permutation_at(k).clone(), factors)
    }
}

/// A sequence `φ_1, φ_2, …` of polydisk automorphisms (1-based).
#[derive(Debug, Clone, PartialEq)]
pub enum AutomorphismSequence {
    Explicit(Vec<PolydiskAutomorphism>),
    Generated(SequenceGenerator),
}

impl AutomorphismSequence {
    pub fn explicit(items: Vec<PolydiskAutomorphism>) -> Result<Self> {
        let Some(first) = items.first() else {
            return Err(Error::Validity("explicit sequence is empty".into()));
        };
        let n = first.dimension();
        if let Some(bad) = items.iter().find(|a| a.dimension() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: bad.dimension(),
            });
        }
        Ok(AutomorphismSequence::Explicit(items))
    }

    pub fn dimension(&self) -> usize {
        match self {
            AutomorphismSequence::Explicit(v) => v[0].dimension(),
            AutomorphismSequence::Generated(g) => g.dimension(),
        }
    }

    /// Number of elements, `None` when unbounded.
    pub fn len(&self) -> Option<u64> {
        match self {
            AutomorphismSequence::Explicit(v) => Some(v.len() as u64),
            AutomorphismSequence::Generated(_) => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    /// Element with 1-based index `k`.
    pub fn get(&self, k: u64) -> Option<PolydiskAutomorphism> {
        if k == 0 {
            return None;
        }
        match self {
            AutomorphismSequence::Explicit(v) => v.get((k - 1) as usize).cloned(),
            AutomorphismSequence::Generated(g) => g.at(k).ok(),
        }
    }

    pub fn permutation_at(&self, k: u64) -> Option<Permutation> {
        match self {
            AutomorphismSequence::Explicit(v) => {
                v.get((k.checked_sub(1)?) as usize).map(|a| a.permutation().clone())
            }
            AutomorphismSequence::Generated(g) if k > 0 => Some(g.permutation_at(k).clone()),
            AutomorphismSequence::Generated(_) => None,
        }
    }

    pub fn angles_at(&self, k: u64) -> Option<Vec<f64>> {
        match self {
            AutomorphismSequence::Explicit(v) => v
                .get((k.checked_sub(1)?) as usize)
                .map(|a| a.factors().iter().map(|f| f.theta()).collect()),
            AutomorphismSequence::Generated(g) if k > 0 => Some(g.angles().at(k)),
            AutomorphismSequence::Generated(_) => None,
        }
    }

    pub fn alphas_at(&self, k: u64) -> Option<Vec<Complex64>> {
        match self {
            AutomorphismSequence::Explicit(v) => v
                .get((k.checked_sub(1)?) as usize)
                .map(|a| a.factors().iter().map(|f| f.alpha()).collect()),
            AutomorphismSequence::Generated(g) if k > 0 => Some(g.alphas_at(k)),
            AutomorphismSequence::Generated(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_elements_follow_schedules() {
        let g = SequenceGenerator::new(
            TorusPoint::ones(2),
            RadialProfile::Converging { rate: 1.0 },
            AngleSchedule::Decaying {
                limit: vec![0.0, 1.0],
                amplitude: vec![1.0, 0.0],
            },
            vec![
                Permutation::identity(2),
                Permutation::from_one_based(&[2, 1]).unwrap(),
            ],
        )
        .unwrap();
        let seq = AutomorphismSequence::Generated(g);
        let phi = seq.get(3).unwrap();
        assert_eq!(phi.permutation(), &Permutation::identity(2));
        assert!((phi.factors()[0].alpha().re - 0.75).abs() < 1e-15);
        assert!((phi.factors()[0].theta() - 0.25).abs() < 1e-15);
        assert_eq!(seq.permutation_at(4).unwrap().one_based(), vec![2, 1]);
        assert!(seq.get(0).is_none());
        assert_eq!(seq.len(), None);
    }

    #[test]
    fn generator_validation() {
        assert!(SequenceGenerator::new(
            TorusPoint::ones(1),
            RadialProfile::Converging { rate: 1.5 },
            AngleSchedule::Constant(vec![0.0]),
            vec![Permutation::identity(1)],
        )
        .is_err());
        assert!(SequenceGenerator::new(
            TorusPoint::ones(2),
            RadialProfile::Fixed { modulus: 0.5 },
            AngleSchedule::Constant(vec![0.0]),
            vec![Permutation::identity(2)],
        )
        .is_err());
    }

    #[test]
    fn explicit_sequence_bounds() {
        let seq = AutomorphismSequence::explicit(vec![PolydiskAutomorphism::identity(1); 3]).unwrap();
        assert_eq!(seq.len(), Some(3));
        assert!(seq.get(3).is_some());
        assert!(seq.get(4).is_none());
        assert!(AutomorphismSequence::explicit(vec![]).is_err());
    }
}
