//! Points of the closed polydisk, compact exhaustion probes and the grid
//! pseudo-metric standing in for the compact-open topology.

use std::f64::consts::PI;
use std::ops::Deref;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::holo::HoloFunction;

/// Tolerance for unimodularity of distinguished-boundary coordinates.
pub const TORUS_TOL: f64 = 1e-12;

/// A point of ℂⁿ, usually of the closed polydisk.
#[derive(Debug, Clone, PartialEq)]
pub struct CPoint(pub Vec<Complex64>);

impl CPoint {
    pub fn new(coords: Vec<Complex64>) -> Self {
        CPoint(coords)
    }

    pub fn origin(n: usize) -> Self {
        CPoint(vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    /// True when every coordinate lies in the open unit disk.
    pub fn is_interior(&self) -> bool {
        self.0.iter().all(|z| z.norm() < 1.0)
    }
}

impl Deref for CPoint {
    type Target = [Complex64];
    fn deref(&self) -> &[Complex64] {
        &self.0
    }
}

/// A point of the distinguished boundary 𝕋ⁿ.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusPoint(Vec<Complex64>);

impl TorusPoint {
    pub fn new(coords: Vec<Complex64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Validity("torus point needs at least one coordinate".into()));
        }
        for (j, z) in coords.iter().enumerate() {
            if (z.norm() - 1.0).abs() > TORUS_TOL {
                return Err(Error::Validity(format!(
                    "coordinate {} of torus point has modulus {}",
                    j + 1,
                    z.norm()
                )));
            }
        }
        Ok(TorusPoint(coords))
    }

    /// Projects each coordinate radially onto the unit circle.
    pub fn from_directions(coords: &[Complex64]) -> Result<Self> {
        let mut out = Vec::with_capacity(coords.len());
        for z in coords {
            let r = z.norm();
            if r == 0.0 || !r.is_finite() {
                return Err(Error::Validity("zero vector has no boundary direction".into()));
            }
            out.push(z / r);
        }
        TorusPoint::new(out)
    }

    pub fn ones(n: usize) -> Self {
        TorusPoint(vec![Complex64::new(1.0, 0.0); n])
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.0
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    pub fn to_point(&self) -> CPoint {
        CPoint(self.0.clone())
    }
}

/// Default angular resolution per dimension.
pub fn default_points_per_dim(n: usize) -> usize {
    match n {
        1 => 64,
        2 => 24,
        3 => 12,
        _ => 8,
    }
}

/// Closed sub-polydisk of a given radius together with its sampling grid.
///
/// The one-dimensional node set is `{0} ∪ {ρ e^{2πit/Q} : ρ ∈ {r/2, r}}`; the
/// probe grid is its n-fold tensor power. Doubling `Q` yields a superset.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactProbe {
    radius: f64,
    points_per_dim: usize,
    dimension: usize,
    grid: Vec<CPoint>,
}

impl CompactProbe {
    pub fn new(radius: f64, points_per_dim: usize, dimension: usize) -> Result<Self> {
        if !(radius > 0.0 && radius < 1.0) {
            return Err(Error::Validity(format!("probe radius {radius} not in (0,1)")));
        }
        if points_per_dim == 0 || dimension == 0 {
            return Err(Error::Validity("probe needs positive resolution and dimension".into()));
        }
        let nodes = ring_nodes(radius, points_per_dim);
        let mut grid = vec![CPoint(Vec::with_capacity(dimension))];
        for _ in 0..dimension {
            let mut next = Vec::with_capacity(grid.len() * nodes.len());
            for p in &grid {
                for z in &nodes {
                    let mut c = p.0.clone();
                    c.push(*z);
                    next.push(CPoint(c));
                }
            }
            grid = next;
        }
        Ok(CompactProbe {
            radius,
            points_per_dim,
            dimension,
            grid,
        })
    }

    pub fn with_default_resolution(radius: f64, dimension: usize) -> Result<Self> {
        Self::new(radius, default_points_per_dim(dimension), dimension)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn points_per_dim(&self) -> usize {
        self.points_per_dim
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn grid(&self) -> &[CPoint] {
        &self.grid
    }

    /// Max over the grid of `|f(z) - g(z)|`.
    pub fn sup_distance(&self, f: &HoloFunction, g: &HoloFunction) -> Result<f64> {
        probe_sup(f, g, self)
    }
}

fn ring_nodes(radius: f64, q: usize) -> Vec<Complex64> {
    let mut nodes = Vec::with_capacity(2 * q + 1);
    nodes.push(Complex64::new(0.0, 0.0));
    for rho in [radius / 2.0, radius] {
        for t in 0..q {
            nodes.push(Complex64::from_polar(rho, 2.0 * PI * t as f64 / q as f64));
        }
    }
    nodes
}

/// Max of `|f - g|` over the probe grid.
pub fn probe_sup(f: &HoloFunction, g: &HoloFunction, probe: &CompactProbe) -> Result<f64> {
    for h in [f, g] {
        if h.dimension() != probe.dimension() {
            return Err(Error::DimensionMismatch {
                expected: probe.dimension(),
                got: h.dimension(),
            });
        }
    }
    let mut sup = 0.0f64;
    for z in probe.grid() {
        if !z.is_interior() {
            return Err(Error::EvaluationOutsideDomain {
                point: format!("{:?}", z.0),
            });
        }
        let d = (f.eval(z)? - g.eval(z)?).norm();
        if d.is_nan() {
            return Ok(f64::NAN);
        }
        sup = sup.max(d);
    }
    Ok(sup)
}

/// Truncated compact-open pseudo-metric
/// `d(f,g) = Σ_{m=1..M} 2^{-m} min(1, sup_{K_m} |f-g|)` with `K_m` of radius `m/(m+1)`.
#[derive(Debug, Clone)]
pub struct COMetric {
    probes: Vec<CompactProbe>,
}

impl COMetric {
    pub fn new(levels: usize, points_per_dim: usize, dimension: usize) -> Result<Self> {
        if levels == 0 {
            return Err(Error::Validity("metric needs at least one level".into()));
        }
        let probes = (1..=levels)
            .map(|m| CompactProbe::new(m as f64 / (m as f64 + 1.0), points_per_dim, dimension))
            .collect::<Result<Vec<_>>>()?;
        Ok(COMetric { probes })
    }

    /// Eight levels with the default resolution for the dimension.
    pub fn standard(dimension: usize) -> Result<Self> {
        Self::new(8, default_points_per_dim(dimension), dimension)
    }

    pub fn levels(&self) -> usize {
        self.probes.len()
    }

    pub fn probes(&self) -> &[CompactProbe] {
        &self.probes
    }

    pub fn distance(&self, f: &HoloFunction, g: &HoloFunction) -> Result<f64> {
        metric_distance(f, g, self)
    }
}

pub fn metric_distance(f: &HoloFunction, g: &HoloFunction, metric: &COMetric) -> Result<f64> {
    let mut total = 0.0;
    let mut weight = 1.0;
    for probe in &metric.probes {
        weight *= 0.5;
        total += weight * probe_sup(f, g, probe)?.min(1.0);
    }
    Ok(total)
}
