//! Schur algorithm on truncated Taylor series and reconstruction of the
//! finite Blaschke product with prescribed Schur parameters and unimodular tail.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::holo::HoloFunction;

/// Parameters at or beyond this modulus end the recursion.
const BOUNDARY_TOL: f64 = 1e-12;

type Series = Vec<Complex64>;

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

/// `a / b` truncated to `len` terms; `b[0]` must be nonzero.
fn series_div(a: &[Complex64], b: &[Complex64], len: usize) -> Series {
    let mut q = vec![Complex64::new(0.0, 0.0); len];
    for m in 0..len {
        let mut acc = a.get(m).copied().unwrap_or_default();
        for k in 1..=m.min(b.len() - 1) {
            acc -= b[k] * q[m - k];
        }
        q[m] = acc / b[0];
    }
    q
}

enum Step {
    Continue(Series),
    Boundary,
}

/// One step `f ↦ (f − γ)/(z(1 − γ̄ f))` with `γ = f(0)`.
fn schur_step(f: &[Complex64]) -> (Complex64, Step) {
    let gamma = f[0];
    if gamma.norm() >= 1.0 - BOUNDARY_TOL || f.len() < 2 {
        return (gamma, Step::Boundary);
    }
    let num: Series = f[1..].to_vec();
    let den: Series = f
        .iter()
        .enumerate()
        .map(|(i, c)| if i == 0 { one() } else { Complex64::new(0.0, 0.0) } - gamma.conj() * c)
        .collect();
    (gamma, Step::Continue(series_div(&num, &den, f.len() - 1)))
}

/// Schur parameters `γ_0 … γ_{d−1}` of the series `c_0, c_1, …`.
pub fn schur_parameters(coeffs: &[Complex64], depth: usize) -> Result<Vec<Complex64>> {
    check_input(coeffs, depth)?;
    let mut f = coeffs.to_vec();
    let mut out = Vec::with_capacity(depth);
    for k in 0..depth {
        match schur_step(&f) {
            (g, Step::Continue(next)) => {
                out.push(g);
                f = next;
            }
            (g, Step::Boundary) => {
                return Err(Error::SchurParameterOutOfDisk {
                    index: k,
                    modulus: g.norm(),
                })
            }
        }
    }
    Ok(out)
}

fn check_input(coeffs: &[Complex64], depth: usize) -> Result<()> {
    if coeffs.len() < depth + 1 {
        return Err(Error::Validity(format!(
            "depth {depth} needs at least {} coefficients, got {}",
            depth + 1,
            coeffs.len()
        )));
    }
    if coeffs[0].norm() > 1.0 + BOUNDARY_TOL {
        return Err(Error::Validity(format!("c_0 = {} is outside the disk", coeffs[0])));
    }
    Ok(())
}

/// Result of a Schur projection onto finite Blaschke products.
#[derive(Debug, Clone)]
pub struct SchurProjection {
    pub parameters: Vec<Complex64>,
    pub tail: Complex64,
    pub zeros: Vec<Complex64>,
    pub unimodular: Complex64,
    /// `u ∏ (z − a_k)/(1 − ā_k z)` as an expression tree in coordinate `coord`.
    pub function: HoloFunction,
}

impl SchurProjection {
    pub fn degree(&self) -> usize {
        self.zeros.len()
    }
}

/// Runs the Schur recursion to depth `d` and closes it with the unimodular
/// tail `η`, giving a finite Blaschke product of degree `d` whose first `d`
/// Taylor coefficients match the input.
pub fn schur_project(coeffs: &[Complex64], depth: usize, tail: Complex64) -> Result<SchurProjection> {
    let params = schur_parameters(coeffs, depth)?;
    reconstruct(params, tail, 1, 1)
}

/// Like [`schur_project`], but a parameter reaching the unit circle at step
/// `k < d` ends the recursion there and becomes the tail: the input is then a
/// Blaschke product of degree `k` and is reproduced exactly.
///
/// The result acts on coordinate `coord` (1-based) of 𝔻ⁿ.
pub fn schur_project_adaptive(
    coeffs: &[Complex64],
    depth: usize,
    tail: Complex64,
    dimension: usize,
    coord: usize,
) -> Result<SchurProjection> {
    check_input(coeffs, depth)?;
    let mut f = coeffs.to_vec();
    let mut params = Vec::with_capacity(depth);
    let mut tail = tail;
    for _ in 0..depth {
        match schur_step(&f) {
            (g, Step::Continue(next)) => {
                params.push(g);
                f = next;
            }
            (g, Step::Boundary) => {
                tail = if g.norm() > 0.0 { g / g.norm() } else { tail };
                break;
            }
        }
    }
    reconstruct(params, tail, dimension, coord)
}

fn poly_eval(p: &[Complex64], z: Complex64) -> Complex64 {
    p.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
}

fn poly_roots(p: &[Complex64]) -> Vec<Complex64> {
    let d = p.len() - 1;
    if d == 0 {
        return Vec::new();
    }
    let lead = p[d];
    let companion = DMatrix::<Complex64>::from_fn(d, d, |i, j| {
        if j == d - 1 {
            -p[i] / lead
        } else if i == j + 1 {
            one()
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let eig = companion
        .schur()
        .eigenvalues()
        .expect("complex Schur form is triangular");
    let dp: Vec<Complex64> = (1..=d).map(|k| p[k] * k as f64).collect();
    eig.iter()
        .map(|&z0| {
            let mut z = z0;
            for _ in 0..4 {
                let pz = poly_eval(p, z);
                let dz = poly_eval(&dp, z);
                if dz.norm() == 0.0 {
                    break;
                }
                let next = z - pz / dz;
                if poly_eval(p, next).norm() < pz.norm() {
                    z = next;
                } else {
                    break;
                }
            }
            z
        })
        .collect()
}

fn reconstruct(
    params: Vec<Complex64>,
    tail: Complex64,
    dimension: usize,
    coord: usize,
) -> Result<SchurProjection> {
    if (tail.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::Validity(format!("tail {tail} is not unimodular")));
    }
    // f_k = (γ_k Q + z P)/(Q + γ̄_k z P), starting from P = η, Q = 1
    let mut p: Series = vec![tail];
    let mut q: Series = vec![one()];
    for g in params.iter().rev() {
        let mut np = vec![Complex64::new(0.0, 0.0); p.len() + 1];
        let mut nq = vec![Complex64::new(0.0, 0.0); p.len() + 1];
        for (i, c) in q.iter().enumerate() {
            np[i] += g * c;
            nq[i] += c;
        }
        for (i, c) in p.iter().enumerate() {
            np[i + 1] += c;
            nq[i + 1] += g.conj() * c;
        }
        p = np;
        q = nq;
    }
    let zeros: Vec<Complex64> = poly_roots(&p)
        .into_iter()
        .map(|a| {
            // roots of a Blaschke numerator lie inside the disk; pull back rounding spill
            let m = a.norm();
            if m >= 1.0 - 1e-15 {
                a / m * (1.0 - 1e-15)
            } else {
                a
            }
        })
        .collect();

    // unimodular constant from a reference point far from every zero
    let z0 = (0..8)
        .map(|k| Complex64::from_polar(1.0, PI * k as f64 / 4.0))
        .max_by(|a, b| {
            let da = zeros.iter().map(|z| (a - z).norm()).fold(f64::INFINITY, f64::min);
            let db = zeros.iter().map(|z| (b - z).norm()).fold(f64::INFINITY, f64::min);
            da.total_cmp(&db)
        })
        .expect("eight candidates");
    let mut value = poly_eval(&p, z0) / poly_eval(&q, z0);
    for a in &zeros {
        value /= (z0 - a) / (one() - a.conj() * z0);
    }
    let unimodular = value / value.norm();

    let mut children = vec![HoloFunction::constant(dimension, unimodular)?];
    for a in &zeros {
        children.push(HoloFunction::blaschke(dimension, coord, *a, PI)?);
    }
    let function = if children.len() == 1 {
        children.pop().expect("one child")
    } else {
        HoloFunction::product(children)?
    };
    Ok(SchurProjection {
        parameters: params,
        tail,
        zeros,
        unimodular,
        function,
    })
}
