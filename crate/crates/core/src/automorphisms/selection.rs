use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use super::{normalize_angle, AutomorphismSequence, Permutation};
use crate::error::{Error, Result};
use crate::geometry::TorusPoint;

/// Subsequence along which the permutation is frozen and the angles settle,
/// together with the boundary limit points of `φ_k` and `φ_k⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsequenceSelection {
    /// Selected indices within the scanned horizon.
    pub indices: Vec<u64>,
    pub permutation: Permutation,
    pub angle_tol: f64,
    /// Half-open angle cell `[−π + c·tol, −π + (c+1)·tol)` per coordinate.
    pub angle_cell: Vec<i64>,
    pub limit_angles: Vec<f64>,
    /// Limit of `α^{k_l}` on 𝕋ⁿ.
    pub limit_moduli: TorusPoint,
    /// Limit of `φ_{k_l}` on compacts: `λ_j = e^{iθ_j} α_j`.
    pub lambda: TorusPoint,
    /// Limit of `φ_{k_l}⁻¹` on compacts: `γ_i = α_{p⁻¹(i)}`.
    pub gamma: TorusPoint,
    /// `max_j (1 − |α_j|)` at the last selected index.
    pub boundary_gap: f64,
}

fn cell_of(angles: &[f64], tol: f64) -> Vec<i64> {
    angles
        .iter()
        .map(|t| ((t + PI) / tol).floor() as i64)
        .collect()
}

fn boundary_gap(alphas: &[Complex64]) -> f64 {
    alphas.iter().map(|a| 1.0 - a.norm()).fold(0.0, f64::max)
}

impl SubsequenceSelection {
    /// Membership of an arbitrary index, including beyond the scanned horizon.
    pub fn contains(&self, seq: &AutomorphismSequence, k: u64) -> bool {
        match (seq.permutation_at(k), seq.angles_at(k)) {
            (Some(p), Some(t)) => p == self.permutation && cell_of(&t, self.angle_tol) == self.angle_cell,
            _ => false,
        }
    }

    /// Smallest member `k ≥ from`, scanning at most `max_scan` raw indices.
    pub fn next_member(&self, seq: &AutomorphismSequence, from: u64, max_scan: u64) -> Option<u64> {
        let from = from.max(1);
        let end = match seq.len() {
            Some(len) => len.min(from.saturating_add(max_scan)),
            None => from.saturating_add(max_scan),
        };
        (from..=end).find(|&k| self.contains(seq, k))
    }
}

/// Freezes the permutation (most frequent, ties to the lexicographically
/// smallest), bins the angle vectors of that fiber into cells of side
/// `angle_tol`, keeps the fullest cell and checks that the Möbius zeros have
/// reached within `boundary_threshold` of 𝕋ⁿ by the end of the horizon.
pub fn select_subsequence(
    seq: &AutomorphismSequence,
    horizon: u64,
    angle_tol: f64,
    boundary_threshold: f64,
) -> Result<SubsequenceSelection> {
    if !(angle_tol > 0.0) {
        return Err(Error::Validity(format!("angle tolerance {angle_tol} must be positive")));
    }
    let horizon = seq.len().map_or(horizon, |len| len.min(horizon));
    if horizon == 0 {
        return Err(Error::EmptySelection { horizon: 0 });
    }

    let mut by_perm: BTreeMap<Permutation, Vec<u64>> = BTreeMap::new();
    for k in 1..=horizon {
        let p = seq.permutation_at(k).expect("index within horizon");
        by_perm.entry(p).or_default().push(k);
    }
    // BTreeMap iterates in lexicographic order; strict > keeps the first maximum
    let mut best: Option<(&Permutation, &Vec<u64>)> = None;
    for (p, ks) in &by_perm {
        if best.map_or(true, |(_, b)| ks.len() > b.len()) {
            best = Some((p, ks));
        }
    }
    let (permutation, fiber) = best.expect("nonempty horizon");
    if fiber.len() < 2 {
        return Err(Error::EmptySelection {
            horizon: horizon as usize,
        });
    }

    let mut cells: BTreeMap<Vec<i64>, Vec<u64>> = BTreeMap::new();
    for &k in fiber {
        let t = seq.angles_at(k).expect("index within horizon");
        cells.entry(cell_of(&t, angle_tol)).or_default().push(k);
    }
    let mut best_cell: Option<(&Vec<i64>, &Vec<u64>)> = None;
    for (c, ks) in &cells {
        if best_cell.map_or(true, |(_, b)| ks.len() > b.len()) {
            best_cell = Some((c, ks));
        }
    }
    let (angle_cell, indices) = best_cell.expect("nonempty fiber");

    let last = *indices.last().expect("nonempty cell");
    let last_alphas = seq.alphas_at(last).expect("index within horizon");
    let gap = boundary_gap(&last_alphas);
    if gap > boundary_threshold {
        return Err(Error::NoBoundaryConvergence {
            horizon: horizon as usize,
            worst_gap: gap,
            threshold: boundary_threshold,
        });
    }

    let centroid = {
        let n = seq.dimension();
        let mut acc = vec![0.0; n];
        for &k in indices {
            for (a, t) in acc.iter_mut().zip(seq.angles_at(k).expect("in horizon")) {
                *a += t;
            }
        }
        acc.into_iter()
            .map(|a| normalize_angle(a / indices.len() as f64))
            .collect::<Vec<_>>()
    };
    let limit_angles = match seq {
        AutomorphismSequence::Generated(g) => match g.angles().limit() {
            Some(lim) if cell_of(&lim, angle_tol) == *angle_cell => lim,
            _ => centroid,
        },
        AutomorphismSequence::Explicit(_) => centroid,
    };

    let limit_moduli = TorusPoint::from_directions(&last_alphas)?;
    let lambda = TorusPoint::new(
        limit_moduli
            .coords()
            .iter()
            .zip(&limit_angles)
            .map(|(a, t)| Complex64::from_polar(1.0, *t) * a)
            .collect(),
    )?;
    let pinv = permutation.inverse();
    let gamma = TorusPoint::new(
        (0..seq.dimension())
            .map(|i| limit_moduli.coords()[pinv.get(i)])
            .collect(),
    )?;

    Ok(SubsequenceSelection {
        indices: indices.clone(),
        permutation: permutation.clone(),
        angle_tol,
        angle_cell: angle_cell.clone(),
        limit_angles,
        limit_moduli,
        lambda,
        gamma,
        boundary_gap: gap,
    })
}
