//! Reduced finite-dimensional functionals of the concentration parameters.

use crate::error::{Error, Result};
use crate::green::GreenEvaluator;
use crate::spectral::BoxDomain;
use serde::{Deserialize, Serialize};

/// Bubble count, signs, subcritical parameter and a point (λ, σ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedConfig {
    pub k: usize,
    pub signs: Vec<f64>,
    pub eps: f64,
    pub eta: f64,
    pub lambdas: Vec<f64>,
    pub sigmas: Vec<Vec<f64>>,
}

impl ReducedConfig {
    pub fn new(signs: Vec<f64>, eps: f64, eta: f64, lambdas: Vec<f64>, sigmas: Vec<Vec<f64>>) -> Result<Self> {
        let k = signs.len();
        if k == 0 || lambdas.len() != k || sigmas.len() != k {
            return Err(Error::Config(format!(
                "need matching signs/lambdas/sigmas, got {}/{}/{}",
                k,
                lambdas.len(),
                sigmas.len()
            )));
        }
        if signs.iter().any(|a| *a != 1.0 && *a != -1.0) {
            return Err(Error::Config("signs must be +1 or -1".into()));
        }
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::Config(format!("separation eta = {eta} outside (0, 1)")));
        }
        if !(eps > 0.0) {
            return Err(Error::Config(format!("eps = {eps} must be positive")));
        }
        Ok(ReducedConfig { k, signs, eps, eta, lambdas, sigmas })
    }

    /// Membership in the admissible set.
    pub fn check_admissible(&self, domain: &BoxDomain) -> Result<()> {
        for (i, s) in self.sigmas.iter().enumerate() {
            if !domain.contains(s) || domain.boundary_distance(s) <= self.eta {
                return Err(Error::Admissibility(format!("center {i} at {s:?} is within eta of the boundary")));
            }
            let l = self.lambdas[i];
            if !(l > self.eta && l < 1.0 / self.eta) {
                return Err(Error::Admissibility(format!("scale {i} = {l:e} outside (eta, 1/eta)")));
            }
            for (j, t) in self.sigmas.iter().enumerate().skip(i + 1) {
                let d: f64 = s.iter().zip(t).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                if d <= self.eta {
                    return Err(Error::Admissibility(format!("centers {i} and {j} closer than eta")));
                }
            }
        }
        Ok(())
    }
}

/// Υ_k(λ, σ).
pub fn upsilon_k(ev: &GreenEvaluator, cfg: &ReducedConfig) -> Result<f64> {
    cfg.check_admissible(&ev.domain)?;
    Ok(upsilon_raw(ev, &cfg.signs, &cfg.lambdas, &cfg.sigmas))
}

pub(crate) fn upsilon_raw(ev: &GreenEvaluator, signs: &[f64], lambdas: &[f64], sigmas: &[Vec<f64>]) -> f64 {
    let d = &ev.dims;
    let q = d.decay;
    let c1 = d.source_mass;
    let mut quad = 0.0;
    let mut logs = 0.0;
    for i in 0..signs.len() {
        quad += lambdas[i].powf(q) * ev.regular_unchecked(&sigmas[i], &sigmas[i]);
        logs += lambdas[i].ln();
        for h in 0..signs.len() {
            if h != i {
                let g = ev.free_kernel(&sigmas[i], &sigmas[h]).unwrap_or(f64::INFINITY)
                    - ev.regular_unchecked(&sigmas[i], &sigmas[h]);
                quad -= signs[i] * signs[h] * g * (lambdas[i] * lambdas[h]).powf(q / 2.0);
            }
        }
    }
    c1 * c1 * quad - d.energy_mass * q / (d.exponent + 1.0) * logs
}

/// The two-bubble, opposite-sign functional written out directly.
pub fn upsilon2(ev: &GreenEvaluator, l1: f64, l2: f64, s1: &[f64], s2: &[f64]) -> Result<f64> {
    let d = &ev.dims;
    let q = d.decay;
    let c1 = d.source_mass;
    let h1 = ev.robin(s1)?;
    let h2 = ev.robin(s2)?;
    let g = ev.green(s1, s2)?;
    Ok(c1 * c1 * (h1 * l1.powf(q) + h2 * l2.powf(q) + 2.0 * g * (l1 * l2).powf(q / 2.0))
        - d.energy_mass * q / (d.exponent + 1.0) * (l1 * l2).ln())
}

/// Gradient of Υ_k: scale components as λ_i ∂Υ/∂λ_i, then center components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpsilonGradient {
    pub scale: Vec<f64>,
    pub center: Vec<f64>,
    /// Some center step was shrunk to stay admissible.
    pub shrunk: bool,
}

impl UpsilonGradient {
    pub fn flat(&self) -> Vec<f64> {
        self.scale.iter().chain(&self.center).cloned().collect()
    }

    pub fn norm(&self) -> f64 {
        self.flat().iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

pub fn grad_upsilon(ev: &GreenEvaluator, cfg: &ReducedConfig) -> Result<UpsilonGradient> {
    cfg.check_admissible(&ev.domain)?;
    let h = ev.grad_step;
    let f = |l: &[f64], s: &[Vec<f64>]| upsilon_raw(ev, &cfg.signs, l, s);
    let mut scale = Vec::with_capacity(cfg.k);
    for i in 0..cfg.k {
        let mut lp = cfg.lambdas.clone();
        let mut lm = cfg.lambdas.clone();
        lp[i] *= h.exp();
        lm[i] *= (-h).exp();
        scale.push((f(&lp, &cfg.sigmas) - f(&lm, &cfg.sigmas)) / (2.0 * h));
    }
    let mut center = Vec::new();
    let mut shrunk = false;
    for i in 0..cfg.k {
        for a in 0..cfg.sigmas[i].len() {
            let mut room = f64::INFINITY;
            let x = cfg.sigmas[i][a];
            room = room.min(x - cfg.eta).min(ev.domain.lengths[a] - cfg.eta - x);
            for (j, t) in cfg.sigmas.iter().enumerate() {
                if j != i {
                    let dist: f64 = cfg.sigmas[i].iter().zip(t).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
                    room = room.min(dist - cfg.eta);
                }
            }
            let step = if h < 0.5 * room {
                h
            } else {
                shrunk = true;
                0.5 * room
            };
            let mut sp = cfg.sigmas.clone();
            let mut sm = cfg.sigmas.clone();
            sp[i][a] += step;
            sm[i][a] -= step;
            center.push((f(&cfg.lambdas, &sp) - f(&cfg.lambdas, &sm)) / (2.0 * step));
        }
    }
    Ok(UpsilonGradient { scale, center, shrunk })
}

/// Stationary scale of a single bubble at σ: λ^{N−2s} = c₀/((p+1)c₁²H(σ,σ)).
pub fn single_bubble_scale(ev: &GreenEvaluator, sigma: &[f64]) -> Result<f64> {
    let d = &ev.dims;
    let h = ev.robin(sigma)?;
    Ok((d.energy_mass / ((d.exponent + 1.0) * d.source_mass.powi(2) * h)).powf(1.0 / d.decay))
}

/// Scales minimizing Υ₂ at fixed centers (closed form of the λ-subproblem).
pub fn pair_scales(ev: &GreenEvaluator, s1: &[f64], s2: &[f64]) -> Result<(f64, f64)> {
    let d = &ev.dims;
    let h1 = ev.robin(s1)?;
    let h2 = ev.robin(s2)?;
    let phi = ev.varphi(s1, s2)?;
    let kappa = d.energy_mass / ((d.exponent + 1.0) * d.source_mass.powi(2));
    // with X_i = λ_i^{(N−2s)/2}: X₁² = κ√H₂/(√H₁ φ), X₂² = κ√H₁/(√H₂ φ)
    let x1 = kappa * (h2 / h1).sqrt() / phi;
    let x2 = kappa * (h1 / h2).sqrt() / phi;
    Ok((x1.powf(1.0 / d.decay), x2.powf(1.0 / d.decay)))
}
