//! Pin correctors `Ψ_j` and generating elements `G_{j,ξ} = A · Ψ_{j,ξ}`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::TorusPoint;
use crate::holo::HoloFunction;

/// Tolerance on `|A(ξ)| = 1` and on the pin condition `G(ξ) = 1`.
pub const PIN_TOL: f64 = 1e-9;

const MAX_BISECTIONS: usize = 200;

/// Largest corrector index for which `1 − 2^{-j}` is still below 1 in binary64.
pub const MAX_CORRECTOR_INDEX: u32 = 52;

fn corrector_node(r: f64, phase: f64, xi: Complex64, dimension: usize) -> Result<HoloFunction> {
    // ψ(ξ̄ z) = e^{−iφ} ξ̄ (ξa − z)/(1 − conj(ξa) z),  a = r e^{iφ}
    let alpha = xi * Complex64::from_polar(r, phase);
    HoloFunction::blaschke(dimension, 1, alpha, -phase - xi.arg())
}

fn value_at_pin(node: &HoloFunction, xi: Complex64) -> Result<Complex64> {
    let mut z = vec![Complex64::new(0.0, 0.0); node.dimension()];
    z[0] = xi;
    node.eval(&z)
}

/// Builds `Ψ(z) = ψ(ξ̄ z_1)` with `ψ(z) = e^{−iφ}(a − z)/(1 − āz)`,
/// `a = (1 − 2^{−j}) e^{iφ}`, so that `ψ(0) = 1 − 2^{−j}` and `ψ(1) = w`.
///
/// The phase map `φ ↦ arg(−ψ_φ(1))` decreases strictly from `π` to `−π` on
/// `(−π, π)`, so `φ` is found by bisection on that interval.
pub fn make_corrector(j: u32, xi: Complex64, w: Complex64, dimension: usize) -> Result<HoloFunction> {
    if j == 0 || j > MAX_CORRECTOR_INDEX {
        return Err(Error::Validity(format!(
            "corrector index {j} outside 1..={MAX_CORRECTOR_INDEX}"
        )));
    }
    for (name, v) in [("pin", xi), ("target", w)] {
        if (v.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::Validity(format!("corrector {name} {v} is not unimodular")));
        }
    }
    let r = 1.0 - 0.5f64.powi(j as i32);
    let target = (-w).arg();
    let residual = |phase: f64| -> Result<f64> {
        let v = value_at_pin(&corrector_node(r, phase, xi, dimension)?, xi)?;
        Ok((-v).arg() - target)
    };

    let (mut lo, mut hi) = (-PI, PI);
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if residual(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut best: Option<(f64, HoloFunction)> = None;
    for phase in [lo, hi] {
        let node = corrector_node(r, phase, xi, dimension)?;
        let err = (value_at_pin(&node, xi)? - w).norm();
        if best.as_ref().map_or(true, |(e, _)| err < *e) {
            best = Some((err, node));
        }
    }
    let (err, node) = best.expect("two candidates");
    // rounding of a near-boundary zero limits accuracy to roughly 2^j ulp
    if err > 1e-6 {
        return Err(Error::RootFindFailure { residual: err });
    }
    Ok(node)
}

/// `G = A · Ψ`, an element of the generating family pinned to 1 at `ξ`.
#[derive(Debug, Clone)]
pub struct GeneratingElement {
    pub index: u32,
    pub pin: TorusPoint,
    pub approximant: HoloFunction,
    pub corrector: HoloFunction,
    pub product: HoloFunction,
    /// `|G(ξ) − 1|` as evaluated.
    pub pin_residual: f64,
}

impl GeneratingElement {
    pub fn function(&self) -> &HoloFunction {
        &self.product
    }
}

/// Rotates a corrector onto the pin so that `G(ξ) = A(ξ) Ψ(ξ) = 1` and
/// `Ψ(0) = 1 − 2^{−j}`.
pub fn make_generating_element(
    j: u32,
    pin: &TorusPoint,
    approximant: &HoloFunction,
) -> Result<GeneratingElement> {
    if pin.dimension() != approximant.dimension() {
        return Err(Error::DimensionMismatch {
            expected: approximant.dimension(),
            got: pin.dimension(),
        });
    }
    let a = approximant.eval(pin.coords())?;
    if (a.norm() - 1.0).abs() > PIN_TOL {
        return Err(Error::PinNotUnimodular { modulus: a.norm() });
    }
    let w = a.conj() / a.norm();
    let corrector = make_corrector(j, pin.coords()[0], w, approximant.dimension())?;
    let product = HoloFunction::product(vec![approximant.clone(), corrector.clone()])?;
    let pin_residual = (product.eval(pin.coords())? - 1.0).norm();
    Ok(GeneratingElement {
        index: j,
        pin: pin.clone(),
        approximant: approximant.clone(),
        corrector,
        product,
        pin_residual,
    })
}
