//! Log–log rate fits and their pass rules.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RateRule {
    /// |slope − predicted| ≤ slack.
    Within { slack: f64 },
    /// slope ≥ predicted + margin (little-o statements).
    Above { margin: f64 },
    /// LHS / (ε |ln ε|) does not grow as ε decreases, up to slack in slope.
    BoundedOverEpsLog { slack: f64 },
    /// Every LHS value (a ratio) is at most one; slope reported only.
    RatioAtMostOne,
    /// Fitted and reported, never fails.
    ReportOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateCase {
    pub tag: String,
    pub eps: Vec<f64>,
    pub lhs: Vec<f64>,
    pub slope: f64,
    pub predicted: f64,
    pub rule: RateRule,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub cases: Vec<RateCase>,
    pub pass: bool,
}

impl RateReport {
    pub fn new(cases: Vec<RateCase>) -> Self {
        let pass = cases.iter().all(|c| c.pass);
        RateReport { cases, pass }
    }

    pub fn case(&self, tag: &str) -> Option<&RateCase> {
        self.cases.iter().find(|c| c.tag == tag)
    }

    /// CSV with one (ε, LHS) row per ladder point.
    pub fn case_csv(case: &RateCase) -> String {
        let mut s = String::from("eps,lhs\n");
        for (e, l) in case.eps.iter().zip(&case.lhs) {
            s.push_str(&format!("{e:.17e},{l:.17e}\n"));
        }
        s
    }
}

/// Least-squares slope of log y against log x.
pub fn fit_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Usage("slope fit needs at least two matched points".into()));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::Numeric("slope fit needs positive finite values".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    Ok(sxy / sxx)
}

pub fn check_ladder(eps: &[f64]) -> Result<()> {
    if eps.len() < 4 {
        return Err(Error::Usage(format!("epsilon ladder needs at least 4 values, got {}", eps.len())));
    }
    if eps.windows(2).any(|w| !(w[1] < w[0])) || eps.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
        return Err(Error::Usage("epsilon ladder must be strictly decreasing inside (0, 1)".into()));
    }
    Ok(())
}

pub fn rate_case(tag: &str, eps: &[f64], lhs: &[f64], predicted: f64, rule: RateRule) -> RateCase {
    let (slope, pass) = match rule {
        RateRule::BoundedOverEpsLog { slack } => {
            let scaled: Vec<f64> = eps.iter().zip(lhs).map(|(e, l)| l / (e * e.ln().abs())).collect();
            let slope = fit_slope(eps, lhs).unwrap_or(f64::NAN);
            let drift = fit_slope(eps, &scaled).unwrap_or(f64::NAN);
            (slope, drift >= -slack)
        }
        RateRule::RatioAtMostOne => {
            let deficit: Vec<f64> = lhs.iter().map(|v| 1.0 - v).collect();
            (fit_slope(eps, &deficit).unwrap_or(f64::NAN), lhs.iter().all(|v| *v <= 1.0))
        }
        _ => {
            let slope = fit_slope(eps, lhs).unwrap_or(f64::NAN);
            let pass = match rule {
                RateRule::Within { slack } => (slope - predicted).abs() <= slack,
                RateRule::Above { margin } => slope >= predicted + margin,
                RateRule::ReportOnly => true,
                RateRule::RatioAtMostOne => unreachable!(),
                RateRule::BoundedOverEpsLog { .. } => unreachable!(),
            };
            (slope, pass)
        }
    };
    RateCase { tag: tag.into(), eps: eps.to_vec(), lhs: lhs.to_vec(), slope, predicted, rule, pass }
}

/// The default ladder {10⁻², 10⁻²·⁵, 10⁻³, 10⁻³·⁵}.
pub fn default_ladder() -> Vec<f64> {
    vec![1e-2, 10f64.powf(-2.5), 1e-3, 10f64.powf(-3.5)]
}
