//! Bounded holomorphic functions on 𝔻ⁿ as closed expression trees, and the
//! composition operators `C_φ` acting on them.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::automorphisms::{MobiusFactor, PolydiskAutomorphism};
use crate::error::{Error, Result};

/// Slack allowed on `|c| ≤ 1` for constants.
pub const BALL_TOL: f64 = 1e-12;

/// Expression node. Coordinates are 0-based internally.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Constant(Complex64),
    Coordinate(usize),
    Blaschke { factor: MobiusFactor, coord: usize },
    Product(Vec<Expr>),
    /// `outer ∘ inner`.
    Composed {
        inner: PolydiskAutomorphism,
        outer: Box<Expr>,
    },
    Power(Box<Expr>, u32),
}

impl Expr {
    fn eval(&self, z: &[Complex64]) -> Result<Complex64> {
        match self {
            Expr::Constant(c) => Ok(*c),
            Expr::Coordinate(j) => Ok(z[*j]),
            Expr::Blaschke { factor, coord } => factor.eval(z[*coord]),
            Expr::Product(children) => {
                let mut acc = Complex64::new(1.0, 0.0);
                for c in children {
                    acc *= c.eval(z)?;
                }
                Ok(acc)
            }
            Expr::Composed { inner, outer } => outer.eval(&inner.eval(z)?),
            Expr::Power(child, m) => Ok(child.eval(z)?.powu(*m)),
        }
    }

    fn is_inner(&self) -> bool {
        match self {
            Expr::Constant(c) => (c.norm() - 1.0).abs() <= BALL_TOL,
            Expr::Coordinate(_) | Expr::Blaschke { .. } => true,
            Expr::Product(children) => children.iter().all(Expr::is_inner),
            Expr::Composed { outer, .. } => outer.is_inner(),
            Expr::Power(child, _) => child.is_inner(),
        }
    }

    fn dependencies(&self, out: &mut BTreeSet<usize>) {
        match self {
            Expr::Constant(_) => {}
            Expr::Coordinate(j) => {
                out.insert(*j);
            }
            Expr::Blaschke { coord, .. } => {
                out.insert(*coord);
            }
            Expr::Product(children) => children.iter().for_each(|c| c.dependencies(out)),
            Expr::Composed { inner, outer } => {
                let mut sub = BTreeSet::new();
                outer.dependencies(&mut sub);
                for j in sub {
                    out.insert(inner.permutation().get(j));
                }
            }
            Expr::Power(child, _) => child.dependencies(out),
        }
    }

    fn node_count(&self) -> usize {
        match self {
            Expr::Constant(_) | Expr::Coordinate(_) | Expr::Blaschke { .. } => 1,
            Expr::Product(children) => 1 + children.iter().map(Expr::node_count).sum::<usize>(),
            Expr::Composed { outer, .. } => 1 + outer.node_count(),
            Expr::Power(child, _) => 1 + child.node_count(),
        }
    }
}

/// Element of the closed unit ball of `H^∞(𝔻ⁿ)` built from the node grammar.
///
/// Every node maps the polydisk into the closed disk, so products, powers and
/// compositions with automorphisms stay in the ball by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct HoloFunction {
    dimension: usize,
    expr: Expr,
}

impl HoloFunction {
    fn check_coord(dimension: usize, j: usize) -> Result<usize> {
        if j == 0 || j > dimension {
            return Err(Error::Validity(format!(
                "coordinate index {j} outside 1..={dimension}"
            )));
        }
        Ok(j - 1)
    }

    /// Wraps a raw expression after validating coordinates and dimensions.
    pub fn from_expr(dimension: usize, expr: Expr) -> Result<Self> {
        fn check(e: &Expr, n: usize) -> Result<()> {
            match e {
                Expr::Constant(c) => {
                    if !(c.norm() <= 1.0 + BALL_TOL) {
                        return Err(Error::Validity(format!("constant {c} has modulus > 1")));
                    }
                }
                Expr::Coordinate(j) | Expr::Blaschke { coord: j, .. } => {
                    if *j >= n {
                        return Err(Error::Validity(format!(
                            "coordinate index {} outside 1..={n}",
                            j + 1
                        )));
                    }
                }
                Expr::Product(children) => {
                    if children.is_empty() {
                        return Err(Error::Validity("empty product".into()));
                    }
                    for c in children {
                        check(c, n)?;
                    }
                }
                Expr::Composed { inner, outer } => {
                    if inner.dimension() != n {
                        return Err(Error::DimensionMismatch {
                            expected: n,
                            got: inner.dimension(),
                        });
                    }
                    check(outer, n)?;
                }
                Expr::Power(child, m) => {
                    if *m == 0 {
                        return Err(Error::Validity("power exponent must be ≥ 1".into()));
                    }
                    check(child, n)?;
                }
            }
            Ok(())
        }
        if dimension == 0 {
            return Err(Error::Validity("dimension must be positive".into()));
        }
        check(&expr, dimension)?;
        Ok(HoloFunction { dimension, expr })
    }

    pub fn constant(dimension: usize, c: Complex64) -> Result<Self> {
        Self::from_expr(dimension, Expr::Constant(c))
    }

    pub fn one(dimension: usize) -> Self {
        HoloFunction {
            dimension,
            expr: Expr::Constant(Complex64::new(1.0, 0.0)),
        }
    }

    /// `z_j`, 1-based.
    pub fn coordinate(dimension: usize, j: usize) -> Result<Self> {
        let j = Self::check_coord(dimension, j)?;
        Ok(HoloFunction {
            dimension,
            expr: Expr::Coordinate(j),
        })
    }

    /// `e^{iθ}(α − z_j)/(1 − ᾱ z_j)`, 1-based `j`.
    pub fn blaschke(dimension: usize, j: usize, alpha: Complex64, theta: f64) -> Result<Self> {
        let coord = Self::check_coord(dimension, j)?;
        Ok(HoloFunction {
            dimension,
            expr: Expr::Blaschke {
                factor: MobiusFactor::new(alpha, theta)?,
                coord,
            },
        })
    }

    pub fn product(children: Vec<HoloFunction>) -> Result<Self> {
        let Some(first) = children.first() else {
            return Err(Error::Validity("empty product".into()));
        };
        let n = first.dimension;
        if let Some(bad) = children.iter().find(|c| c.dimension != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: bad.dimension,
            });
        }
        Ok(HoloFunction {
            dimension: n,
            expr: Expr::Product(children.into_iter().map(|c| c.expr).collect()),
        })
    }

    pub fn power(&self, m: u32) -> Result<Self> {
        Self::from_expr(self.dimension, Expr::Power(Box::new(self.expr.clone()), m))
    }

    /// `self ∘ φ`.
    pub fn compose(&self, phi: &PolydiskAutomorphism) -> Result<Self> {
        if phi.dimension() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: phi.dimension(),
            });
        }
        Ok(HoloFunction {
            dimension: self.dimension,
            expr: Expr::Composed {
                inner: phi.clone(),
                outer: Box::new(self.expr.clone()),
            },
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn eval(&self, z: &[Complex64]) -> Result<Complex64> {
        if z.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: z.len(),
            });
        }
        self.expr.eval(z)
    }

    /// Inner and continuous on the closed polydisk, decided structurally:
    /// unimodular constants, coordinates, Blaschke factors and their
    /// products, powers and automorphic compositions.
    pub fn is_inner(&self) -> bool {
        self.expr.is_inner()
    }

    /// 0-based coordinates the function actually depends on.
    pub fn dependencies(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.expr.dependencies(&mut out);
        out
    }

    pub fn node_count(&self) -> usize {
        self.expr.node_count()
    }

    /// Immediate factors when the root is a product, otherwise the function itself.
    pub fn factors(&self) -> Vec<HoloFunction> {
        match &self.expr {
            Expr::Product(children) => children
                .iter()
                .map(|e| HoloFunction {
                    dimension: self.dimension,
                    expr: e.clone(),
                })
                .collect(),
            _ => vec![self.clone()],
        }
    }
}

pub fn eval(f: &HoloFunction, z: &[Complex64]) -> Result<Complex64> {
    f.eval(z)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `T = C_φ : f ↦ f∘φ`.
    Forward,
    /// `R = C_{φ⁻¹} : f ↦ f∘φ⁻¹`.
    Inverse,
}

/// Composition operator restricted to the ball; a multiplicative semigroup
/// homomorphism whose inverse-direction twin is an exact right inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositionOperator {
    map: PolydiskAutomorphism,
    direction: Direction,
}

impl CompositionOperator {
    pub fn forward(phi: &PolydiskAutomorphism) -> Self {
        CompositionOperator {
            map: phi.clone(),
            direction: Direction::Forward,
        }
    }

    pub fn inverse(phi: &PolydiskAutomorphism) -> Self {
        CompositionOperator {
            map: phi.inverse(),
            direction: Direction::Inverse,
        }
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// The automorphism actually substituted (`φ` or `φ⁻¹`).
    pub fn map(&self) -> &PolydiskAutomorphism {
        &self.map
    }

    pub fn apply(&self, f: &HoloFunction) -> Result<HoloFunction> {
        f.compose(&self.map)
    }
}

pub fn apply_operator(op: &CompositionOperator, f: &HoloFunction) -> Result<HoloFunction> {
    op.apply(f)
}

/// Fixed sampling radius for Taylor extraction.
pub const TAYLOR_RADIUS: f64 = 0.75;

/// First `N+1` Taylor coefficients of a one-variable ball function by discrete
/// Fourier inversion on `|z| = 0.75` with `Q = 4(N+1)` nodes.
pub fn taylor_coeffs(f: &HoloFunction, order: usize) -> Result<Vec<Complex64>> {
    if f.dimension() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: f.dimension(),
        });
    }
    taylor_coeffs_along(f, 1, order)
}

/// Taylor coefficients in `z_coord` (1-based) with every other coordinate set
/// to 0; for a function of that coordinate alone this is its full expansion.
pub fn taylor_coeffs_along(f: &HoloFunction, coord: usize, order: usize) -> Result<Vec<Complex64>> {
    let coord = HoloFunction::check_coord(f.dimension(), coord)?;
    let q = 4 * (order + 1);
    let rho = TAYLOR_RADIUS;
    let mut z = vec![Complex64::new(0.0, 0.0); f.dimension()];
    let samples = (0..q)
        .map(|t| {
            z[coord] = Complex64::from_polar(rho, 2.0 * PI * t as f64 / q as f64);
            f.eval(&z)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((0..=order)
        .map(|m| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (t, s) in samples.iter().enumerate() {
                // reduce the exponent index first to keep the twiddle angle small
                let idx = (m * t) % q;
                acc += s * Complex64::from_polar(1.0, -2.0 * PI * idx as f64 / q as f64);
            }
            acc / q as f64 / rho.powi(m as i32)
        })
        .collect())
}
