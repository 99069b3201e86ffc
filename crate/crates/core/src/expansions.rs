//! Expansion checks for projected bubbles along an ε ladder.

use crate::bubble::FracDims;
use crate::error::{Error, Result};
use crate::grid::{FixedGrid, GridSpec, Point};
use crate::projection::{Profile, ProjectedBubble, ProjectionOptions};
use crate::rate::{check_ladder, default_ladder, rate_case, RateCase, RateReport, RateRule};
use serde::{Deserialize, Serialize};

/// k projected bubbles a_i P_ε w_i at one ε, with a grid resolving all of them.
#[derive(Debug, Clone)]
pub struct Ansatz {
    pub dims: FracDims,
    pub length: f64,
    pub eps: f64,
    pub mu: f64,
    pub signs: Vec<f64>,
    pub bubbles: Vec<ProjectedBubble>,
    pub grid: FixedGrid,
}

/// Radius of the refinement windows: half the room around the closest center.
pub fn window_radius(length: f64, sigmas: &[f64]) -> f64 {
    let mut room = f64::INFINITY;
    for (i, s) in sigmas.iter().enumerate() {
        room = room.min(*s).min(length - s);
        for t in &sigmas[i + 1..] {
            room = room.min(0.5 * (s - t).abs());
        }
    }
    0.5 * room
}

impl Ansatz {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        dims: &FracDims,
        length: f64,
        signs: &[f64],
        lambdas: &[f64],
        sigmas: &[f64],
        eps: f64,
        popts: ProjectionOptions,
        gspec: GridSpec,
    ) -> Result<Self> {
        if signs.len() != lambdas.len() || signs.len() != sigmas.len() || signs.is_empty() {
            return Err(Error::Config("signs, lambdas and sigmas must have equal nonzero length".into()));
        }
        let bubbles = lambdas
            .iter()
            .zip(sigmas)
            .map(|(&l, &s)| ProjectedBubble::new(dims, length, Profile::Bubble, eps, l, s, popts))
            .collect::<Result<Vec<_>>>()?;
        let mu = bubbles[0].mu;
        let centers: Vec<(f64, f64)> = bubbles.iter().map(|b| (b.sigma, b.scale)).collect();
        let grid = FixedGrid::new(length, &centers, window_radius(length, sigmas), gspec);
        Ok(Ansatz { dims: dims.clone(), length, eps, mu, signs: signs.to_vec(), bubbles, grid })
    }

    pub fn free_values(&self, pt: &Point) -> Vec<f64> {
        self.bubbles.iter().map(|b| b.free_at(pt)).collect()
    }

    pub fn corrections(&self, pt: &Point) -> Vec<f64> {
        let x = pt.value();
        self.bubbles.iter().map(|b| if x <= 0.0 || x >= self.length { f64::NAN } else { b.correction(x) }).collect()
    }

    /// Σ a_i P̂w_i in the fixed frame.
    pub fn value(&self, pt: &Point) -> f64 {
        self.bubbles.iter().zip(&self.signs).map(|(b, a)| a * b.value(pt)).sum()
    }

    /// Index of the bubble with the largest free value at the point.
    pub fn dominant(&self, free: &[f64]) -> usize {
        let mut h = 0;
        for i in 1..free.len() {
            if free[i] > free[h] {
                h = i;
            }
        }
        h
    }

    /// Σ a_i P̂w_i written as a_h ŵ_h (1 + ρ) with h dominant; returns (h, ρ).
    pub fn relative_split(&self, pt: &Point) -> (usize, f64) {
        let free = self.free_values(pt);
        let corr = self.corrections(pt);
        let h = self.dominant(&free);
        let a = self.signs[h];
        let mut delta = a * corr[h];
        for i in 0..free.len() {
            if i != h {
                delta += self.signs[i] * (free[i] + corr[i]);
            }
        }
        (h, a * delta / free[h])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Suite {
    ProjectionRemainder,
    FarField,
    CriticalNorm,
    KernelProjection,
    Interaction,
    LinearizedInteraction,
    SubcriticalDefect,
}

impl Suite {
    pub fn all() -> Vec<Suite> {
        vec![Suite::ProjectionRemainder, Suite::FarField, Suite::CriticalNorm, Suite::KernelProjection, Suite::Interaction, Suite::LinearizedInteraction, Suite::SubcriticalDefect]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionConfig {
    pub dims: FracDims,
    pub length: f64,
    pub signs: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub ladder: Vec<f64>,
    pub slack: f64,
    pub margin: f64,
    pub projection: ProjectionOptions,
    pub grid: GridSpec,
}

impl ExpansionConfig {
    pub fn interval(dims: &FracDims) -> Self {
        ExpansionConfig {
            dims: dims.clone(),
            length: 1.0,
            signs: vec![1.0, -1.0],
            lambdas: vec![1.0, 1.0],
            sigmas: vec![0.3, 0.7],
            ladder: default_ladder(),
            slack: 0.15,
            margin: 0.05,
            projection: ProjectionOptions::default(),
            grid: GridSpec::default(),
        }
    }

    pub fn refined(&self) -> Self {
        ExpansionConfig { projection: self.projection.refined(), grid: self.grid.refined(), ..self.clone() }
    }
}

fn f0(p: f64, t: f64) -> f64 {
    t.abs().powf(p - 1.0) * t
}

/// Per-ε left-hand sides, keyed by case tag.
#[derive(Debug, Default, Clone)]
struct LadderValues {
    rows: Vec<(String, f64)>,
}

impl LadderValues {
    fn push(&mut self, tag: &str, v: f64) {
        self.rows.push((tag.to_string(), v));
    }
}

fn interior_points(length: f64, sigma: f64) -> Vec<f64> {
    let mut xs: Vec<f64> = (1..40).map(|j| length * j as f64 / 40.0).collect();
    xs.push(sigma);
    xs
}

fn evaluate_at(cfg: &ExpansionConfig, eps: f64, suites: &[Suite]) -> Result<LadderValues> {
    let d = &cfg.dims;
    let q = d.decay;
    let p = d.exponent;
    let l = cfg.length;
    let ans = Ansatz::new(d, l, &cfg.signs, &cfg.lambdas, &cfg.sigmas, eps, cfg.projection, cfg.grid)?;
    let mu = ans.mu;
    let first = &ans.bubbles[0];
    let sigma = first.sigma;
    let mut out = LadderValues::default();
    let r_crit = 2.0 / q; // 2N/(N−2s)
    let r_dual = 2.0 / (1.0 + 2.0 * d.order); // 2N/(N+2s)
    let r_lin = 1.0 / (2.0 * d.order); // N/(2s)

    if suites.contains(&Suite::ProjectionRemainder) {
        let mut m: f64 = 0.0;
        for x in interior_points(l, sigma) {
            m = m.max(first.leading_remainder(x)?.abs());
        }
        out.push("projection_remainder", mu.powf(q / 2.0) * m);
    }
    if suites.contains(&Suite::FarField) {
        let mut m: f64 = 0.0;
        let window = 0.2 * l;
        for x in interior_points(l, sigma) {
            if (x - sigma).abs() < window || x.min(l - x) < 0.1 * l {
                continue;
            }
            let r = (x - sigma).abs();
            let lam = first.scale;
            // ŵ − aΛ^{q/2} r^{−q} without cancellation
            let near = d.amplitude * lam.powf(q / 2.0) * r.powf(-q) * (-(q / 2.0) * (lam / r).powi(2).ln_1p()).exp_m1();
            m = m.max((near + first.leading_remainder(x)?).abs());
        }
        out.push("far_field_remainder", mu.powf(q / 2.0) * m);
    }
    if suites.contains(&Suite::CriticalNorm) {
        let lhs = ans.grid.lp_norm(r_crit, |pt| first.value(pt));
        let rhs = ans.grid.lp_norm(r_crit, |pt| first.free_at(pt));
        out.push("critical_norm_ratio", lhs / rhs);
    }
    let need_psi = suites.contains(&Suite::KernelProjection) || suites.contains(&Suite::LinearizedInteraction);
    let psis: Vec<(usize, Profile, ProjectedBubble)> = if need_psi {
        let mut v = Vec::new();
        for (h, b) in ans.bubbles.iter().enumerate() {
            if h > 0 && !suites.contains(&Suite::LinearizedInteraction) {
                break;
            }
            for prof in [Profile::Dilation, Profile::Translation] {
                v.push((h, prof, ProjectedBubble::new(d, l, prof, eps, b.lambda, b.sigma, cfg.projection)?));
            }
        }
        v
    } else {
        Vec::new()
    };
    if suites.contains(&Suite::KernelProjection) {
        for (h, prof, pb) in &psis {
            if *h != 0 {
                continue;
            }
            let norm = ans.grid.lp_norm(r_crit, |pt| pb.correction(pt.value()));
            // pullback: μ^{e − N/r} with e = q/2 + 1 and N/r = q/2
            let tag = if *prof == Profile::Translation { "kernel_projection_translation" } else { "kernel_projection_dilation" };
            out.push(tag, mu * norm);
        }
    }
    if suites.contains(&Suite::Interaction) {
        let v = ans.grid.integrate(|pt| {
            let free = ans.free_values(pt);
            let (h, rho) = ans.relative_split(pt);
            let a = ans.signs[h];
            let lead = if rho > -1.0 {
                a * free[h].powf(p) * (p * rho.ln_1p()).exp_m1()
            } else {
                f0(p, ans.value(pt)) - a * f0(p, free[h])
            };
            let others: f64 = (0..free.len()).filter(|&i| i != h).map(|i| ans.signs[i] * f0(p, free[i])).sum();
            (lead - others).abs().powf(r_dual)
        });
        out.push("nonlinear_interaction", v.powf(1.0 / r_dual));
    }
    if suites.contains(&Suite::LinearizedInteraction) {
        // literal form Σ a_i f₀'(w_i) and the even form Σ f₀'(w_i)
        for (tag, signed) in [("linearized_interaction", true), ("linearized_interaction_even", false)] {
            let mut worst: f64 = 0.0;
            for (_, _, pb) in &psis {
                let v = ans.grid.integrate(|pt| {
                    let free = ans.free_values(pt);
                    let total = ans.value(pt);
                    let mut diff = p * total.abs().powf(p - 1.0);
                    for (i, w) in free.iter().enumerate() {
                        let a = if signed { ans.signs[i] } else { 1.0 };
                        diff -= a * p * w.powf(p - 1.0);
                    }
                    (diff * pb.value(pt)).abs().powf(r_dual)
                });
                worst = worst.max(mu * v.powf(1.0 / r_dual));
            }
            out.push(tag, worst);
        }
    }
    if suites.contains(&Suite::SubcriticalDefect) {
        let v = ans.grid.integrate(|pt| {
            let t = ans.value(pt);
            if t == 0.0 {
                return 0.0;
            }
            let log_dilated = 0.5 * q * mu.ln() + t.abs().ln();
            (f0(p, t) * (-eps * log_dilated).exp_m1()).abs().powf(r_dual)
        });
        out.push("subcritical_defect", v.powf(1.0 / r_dual));
        let v = ans.grid.integrate(|pt| {
            let t = ans.value(pt);
            if t == 0.0 {
                return 0.0;
            }
            let log_dilated = 0.5 * q * mu.ln() + t.abs().ln();
            let fe = (p - eps) * (-eps * log_dilated).exp() - p;
            (fe * t.abs().powf(p - 1.0)).abs().powf(r_lin)
        });
        out.push("subcritical_defect_derivative", v.powf(1.0 / r_lin));
    }
    Ok(out)
}

/// Runs the requested suites along the ladder and fits rates.
pub fn expansion_report(cfg: &ExpansionConfig, suites: &[Suite]) -> Result<RateReport> {
    check_ladder(&cfg.ladder)?;
    if cfg.dims.dim != 1 {
        return Err(Error::Usage("expansion suites run on intervals (N = 1)".into()));
    }
    let per_eps = cfg.ladder.iter().map(|&e| evaluate_at(cfg, e, suites)).collect::<Result<Vec<_>>>()?;
    let d = &cfg.dims;
    let q = d.decay;
    let a0 = d.dilation;
    let n = 1.0;
    let s = d.order;
    let mut cases: Vec<RateCase> = Vec::new();
    let tags: Vec<String> = per_eps[0].rows.iter().map(|(t, _)| t.clone()).collect();
    for tag in tags {
        let lhs: Vec<f64> = per_eps.iter().map(|v| v.rows.iter().find(|(t, _)| *t == tag).map(|r| r.1).unwrap_or(f64::NAN)).collect();
        let (predicted, rule) = match tag.as_str() {
            "projection_remainder" | "far_field_remainder" => (q * a0, RateRule::Above { margin: cfg.margin }),
            "critical_norm_ratio" => (0.0, RateRule::RatioAtMostOne),
            "kernel_projection_translation" => ((q + 2.0) * a0 / 2.0, RateRule::Within { slack: cfg.slack }),
            "kernel_projection_dilation" => (q * a0 / 2.0, RateRule::Within { slack: cfg.slack }),
            "nonlinear_interaction" => {
                let e = if n > 6.0 * s {
                    (n + 2.0 * s) * a0 / 2.0
                } else {
                    q * a0
                };
                (e, RateRule::Within { slack: cfg.slack })
            }
            "linearized_interaction" | "linearized_interaction_even" => ((n + 2.0 * s) * a0 / 2.0, RateRule::ReportOnly),
            "subcritical_defect" | "subcritical_defect_derivative" => (1.0, RateRule::BoundedOverEpsLog { slack: cfg.slack }),
            _ => (f64::NAN, RateRule::ReportOnly),
        };
        cases.push(rate_case(&tag, &cfg.ladder, &lhs, predicted, rule));
    }
    Ok(RateReport::new(cases))
}
