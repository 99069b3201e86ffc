//! Bubble profiles, their parameter derivatives, the nonlinearity and the
//! dimension/order dependent constants.

use crate::error::{Error, Result};
use crate::quadrature::AdaptiveGauss;
use crate::special::{gamma, ln_gamma};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Dimension, order and every constant derived from them.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FracDims {
    pub dim: usize,
    pub order: f64,
    /// Critical exponent (N+2s)/(N−2s).
    pub exponent: f64,
    /// Dilation exponent 1/(N−2s).
    pub dilation: f64,
    /// Decay rate N−2s of the bubble and of the free kernel.
    pub decay: f64,
    pub amplitude: f64,
    /// Constant of the free kernel c/|x−y|^{N−2s}.
    pub riesz_const: f64,
    /// ∫ w^{p+1}
    pub energy_mass: f64,
    /// ∫ w^p
    pub source_mass: f64,
    /// ∫ w^{p+1} log w
    pub log_moment: f64,
    /// Sharp Sobolev constant used downstream, energy_mass^{−s/N}.
    pub sobolev: f64,
    /// The same constant from the Gamma-function closed form.
    pub sobolev_formula: f64,
}

pub const SOBOLEV_FLAG_TOL: f64 = 1e-6;

/// Checks N > 2s and 0 < s < 1.
pub fn validate(dim: usize, order: f64) -> Result<()> {
    if dim == 0 {
        return Err(Error::Config("dimension must be at least 1".into()));
    }
    if !(order > 0.0 && order < 1.0) {
        return Err(Error::Config(format!("order s = {order} outside (0, 1)")));
    }
    if dim as f64 <= 2.0 * order {
        return Err(Error::Config(format!(
            "N > 2s violated: N = {dim}, 2s = {}",
            2.0 * order
        )));
    }
    Ok(())
}

/// Closed-form amplitude making w solve (−Δ)^s w = w^p in R^N.
pub fn closed_form_amplitude(dim: usize, order: f64) -> f64 {
    let n = dim as f64;
    let q = n - 2.0 * order;
    let ratio = ln_gamma((n + 2.0 * order) / 2.0) - ln_gamma(q / 2.0);
    2f64.powf(q / 2.0) * (ratio * q / (4.0 * order)).exp()
}

pub fn riesz_constant(dim: usize, order: f64) -> f64 {
    let n = dim as f64;
    2f64.powf(1.0 - 2.0 * order) * gamma((n - 2.0 * order) / 2.0)
        / (2.0 * PI.powf(n / 2.0) * gamma(order))
}

pub fn sobolev_closed_form(dim: usize, order: f64) -> f64 {
    let n = dim as f64;
    let s = order;
    2f64.powf(-s)
        * PI.powf(-s / 2.0)
        * (gamma((n - 2.0 * s) / 2.0) / gamma((n + 2.0 * s) / 2.0)).sqrt()
        * (gamma(n) / gamma(n / 2.0)).powf(s / n)
}

fn unit_sphere_area(dim: usize) -> f64 {
    let n = dim as f64;
    2.0 * PI.powf(n / 2.0) / gamma(n / 2.0)
}

/// Order of the panel rules used for radial integrals.
pub const RADIAL_ORDER: usize = 10;

/// ∫_{R^N} f(|x|) dx: adaptive Gauss on r ∈ [0, 1] and on u = ln r ∈ [0, 700],
/// which turns slow algebraic tails into exponential ones.
pub fn radial_integral<F: Fn(f64) -> f64>(dim: usize, order: usize, f: F) -> Result<f64> {
    let q = AdaptiveGauss::new(order, 1e-13, 1e-300);
    let area = unit_sphere_area(dim);
    let finite = |v: f64| if v.is_finite() { v } else { 0.0 };
    let core = q.integrate(0.0, 1.0, |r| finite(f(r) * r.powi(dim as i32 - 1)))?;
    let breaks: Vec<f64> = (0..=14).map(|k| 50.0 * k as f64).collect();
    let tail = q.integrate_breaks(&breaks, |u| {
        let r = u.exp();
        finite(f(r) * r.powi(dim as i32))
    })?;
    Ok(area * (core.value + tail.value))
}

impl FracDims {
    pub fn new(dim: usize, order: f64) -> Result<Self> {
        validate(dim, order)?;
        Self::with_amplitude(dim, order, closed_form_amplitude(dim, order))
    }

    /// Constants built around an explicit amplitude (used for negative controls).
    pub fn with_amplitude(dim: usize, order: f64, amplitude: f64) -> Result<Self> {
        Self::build(dim, order, amplitude, RADIAL_ORDER)
    }

    /// Same as `new` with a different radial panel order, for convergence checks.
    pub fn with_radial_order(dim: usize, order: f64, radial_order: usize) -> Result<Self> {
        validate(dim, order)?;
        Self::build(dim, order, closed_form_amplitude(dim, order), radial_order)
    }

    fn build(dim: usize, order: f64, amplitude: f64, radial_order: usize) -> Result<Self> {
        validate(dim, order)?;
        let n = dim as f64;
        let decay = n - 2.0 * order;
        let exponent = (n + 2.0 * order) / decay;
        let mut dims = FracDims {
            dim,
            order,
            exponent,
            dilation: 1.0 / decay,
            decay,
            amplitude,
            riesz_const: riesz_constant(dim, order),
            energy_mass: 0.0,
            source_mass: 0.0,
            log_moment: 0.0,
            sobolev: 0.0,
            sobolev_formula: sobolev_closed_form(dim, order),
        };
        let unit = BubbleParams::centered(dim, 1.0);
        let w = |r: f64| dims.radial_value(&unit, r);
        let c0 = radial_integral(dim, radial_order, |r| w(r).powf(exponent + 1.0))?;
        let c1 = radial_integral(dim, radial_order, |r| w(r).powf(exponent))?;
        let clog = radial_integral(dim, radial_order, |r| {
            let v = w(r);
            v.powf(exponent + 1.0) * v.ln()
        })?;
        dims.energy_mass = c0;
        dims.source_mass = c1;
        dims.log_moment = clog;
        dims.sobolev = c0.powf(-order / n);
        Ok(dims)
    }

    pub fn sobolev_mismatch(&self) -> f64 {
        (self.sobolev_formula - self.sobolev).abs() / self.sobolev
    }

    pub fn sobolev_flagged(&self) -> bool {
        self.sobolev_mismatch() > SOBOLEV_FLAG_TOL
    }

    /// Bubble value as a function of the distance to its center.
    pub fn radial_value(&self, params: &BubbleParams, r: f64) -> f64 {
        let l = params.lambda;
        self.amplitude * (l / (l * l + r * r)).powf(self.decay / 2.0)
    }

    pub fn f_eps(&self, eps: f64, t: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        t.abs().powf(self.exponent - 1.0 - eps) * t
    }

    pub fn f_eps_prime(&self, eps: f64, t: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        (self.exponent - eps) * t.abs().powf(self.exponent - 1.0 - eps)
    }

    /// Primitive F_ε(t) = |t|^{p+1−ε}/(p+1−ε).
    pub fn big_f_eps(&self, eps: f64, t: f64) -> f64 {
        let e = self.exponent + 1.0 - eps;
        t.abs().powf(e) / e
    }
}

/// Concentration scale and center of one bubble.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BubbleParams {
    pub lambda: f64,
    pub xi: Vec<f64>,
}

impl BubbleParams {
    pub fn new(lambda: f64, xi: Vec<f64>) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Config(format!("concentration scale {lambda} must be positive")));
        }
        Ok(BubbleParams { lambda, xi })
    }

    pub fn centered(dim: usize, lambda: f64) -> Self {
        BubbleParams { lambda, xi: vec![0.0; dim] }
    }

    fn dist2(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.xi).map(|(a, b)| (a - b) * (a - b)).sum()
    }
}

pub fn bubble_value(dims: &FracDims, params: &BubbleParams, x: &[f64]) -> f64 {
    dims.radial_value(params, params.dist2(x).sqrt())
}

/// Derivatives of the bubble in λ (first) and in each center coordinate.
pub fn bubble_gradients(dims: &FracDims, params: &BubbleParams, x: &[f64]) -> (f64, Vec<f64>) {
    let l = params.lambda;
    let r2 = params.dist2(x);
    let q = dims.decay;
    let den = (l * l + r2).powf(q / 2.0 + 1.0);
    let psi0 = dims.amplitude * (q / 2.0) * l.powf(q / 2.0 - 1.0) * (r2 - l * l) / den;
    let psi = x
        .iter()
        .zip(&params.xi)
        .map(|(xj, cj)| dims.amplitude * q * l.powf(q / 2.0) * (xj - cj) / den)
        .collect();
    (psi0, psi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dims() -> FracDims {
        FracDims::new(1, 0.4).unwrap()
    }

    #[test]
    fn value_at_center_is_amplitude() {
        let d = dims();
        let v = bubble_value(&d, &BubbleParams::centered(1, 1.0), &[0.0]);
        assert_eq!(v, d.amplitude);
    }

    #[test]
    fn exponents() {
        let d = dims();
        assert!((d.exponent - 9.0).abs() < 1e-13);
        assert!((d.dilation - 5.0).abs() < 1e-13);
    }

    #[test]
    fn psi0_at_center_unit_scale() {
        let d = dims();
        let (psi0, psi) = bubble_gradients(&d, &BubbleParams::centered(1, 1.0), &[0.0]);
        assert!((psi0 + d.amplitude * d.decay / 2.0).abs() < 1e-15);
        assert_eq!(psi[0], 0.0);
    }

    #[test]
    fn invalid_dims_rejected() {
        let e = FracDims::new(1, 0.6).unwrap_err();
        assert!(e.to_string().contains("N > 2s violated"));
        assert!(FracDims::new(1, 1.2).is_err());
    }

    #[test]
    fn f_eps_zero_derivative_at_origin() {
        let d = dims();
        assert_eq!(d.f_eps_prime(0.01, 0.0), 0.0);
        let h = 1e-5;
        let fd = (d.f_eps(0.01, 1.7 + h) - d.f_eps(0.01, 1.7 - h)) / (2.0 * h);
        assert!((fd - d.f_eps_prime(0.01, 1.7)).abs() < 1e-6);
    }

    #[test]
    fn sobolev_closed_form_matches_derived() {
        let d = dims();
        assert!(!d.sobolev_flagged(), "mismatch {}", d.sobolev_mismatch());
    }
}
