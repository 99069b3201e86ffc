//! Multistart projected quasi-Newton search for concentration points.

use crate::error::{Error, Result};
use crate::green::GreenEvaluator;
use crate::reduced::upsilon_raw;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimOptions {
    pub seeds_per_coord: usize,
    /// Gradient tolerance relative to the objective magnitude at the start.
    pub tol_rel: f64,
    pub max_iter: usize,
}

impl Default for OptimOptions {
    fn default() -> Self {
        OptimOptions { seeds_per_coord: 5, tol_rel: 1e-7, max_iter: 400 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub location: Vec<f64>,
    pub value: f64,
    pub gradient_norm: f64,
    pub tol_grad: f64,
    pub hessian_pd: bool,
    pub multiplicity_note: String,
    /// Symmetry images of `location` with their objective values.
    pub orbit: Vec<(Vec<f64>, f64)>,
    /// Representatives of further local minima tying with the best value.
    pub tied: Vec<Vec<f64>>,
    pub warnings: Vec<String>,
}

/// Box-constrained smooth objective; `None` marks an inadmissible point.
struct Problem<'a> {
    lower: Vec<f64>,
    upper: Vec<f64>,
    steps: Vec<f64>,
    f: &'a (dyn Fn(&[f64]) -> Option<f64> + Sync),
}

#[derive(Debug, Clone)]
struct Local {
    x: Vec<f64>,
    value: f64,
    on_bound: bool,
}

impl Problem<'_> {
    fn dim(&self) -> usize {
        self.lower.len()
    }

    fn eval(&self, x: &[f64]) -> Option<f64> {
        (self.f)(x).filter(|v| v.is_finite())
    }

    fn project(&self, x: &mut [f64]) {
        for i in 0..x.len() {
            x[i] = x[i].clamp(self.lower[i], self.upper[i]);
        }
    }

    fn gradient(&self, x: &[f64], fx: f64) -> Option<Vec<f64>> {
        let mut g = vec![0.0; x.len()];
        let mut y = x.to_vec();
        for i in 0..x.len() {
            let room_lo = x[i] - self.lower[i];
            let room_hi = self.upper[i] - x[i];
            let h = self.steps[i];
            let c = x[i];
            if room_lo >= h && room_hi >= h {
                y[i] = c + h;
                let fp = self.eval(&y);
                y[i] = c - h;
                let fm = self.eval(&y);
                y[i] = c;
                g[i] = match (fp, fm) {
                    (Some(a), Some(b)) => (a - b) / (2.0 * h),
                    _ => self.one_sided(&mut y, i, h, fx, room_hi >= room_lo)?,
                };
            } else {
                let (dir, room) = if room_hi >= room_lo { (true, room_hi) } else { (false, room_lo) };
                g[i] = self.one_sided(&mut y, i, h.min(0.5 * room), fx, dir)?;
            }
        }
        Some(g)
    }

    fn one_sided(&self, y: &mut [f64], i: usize, h: f64, fx: f64, up: bool) -> Option<f64> {
        let c = y[i];
        let s = if up { h } else { -h };
        y[i] = c + s;
        let f1 = self.eval(y);
        y[i] = c + 2.0 * s;
        let f2 = self.eval(y);
        y[i] = c;
        Some((-3.0 * fx + 4.0 * f1? - f2?) / (2.0 * s))
    }

    /// Projected gradient: components pushing out of an active bound are dropped.
    fn projected(&self, x: &[f64], g: &[f64]) -> Vec<f64> {
        (0..x.len())
            .map(|i| {
                let at_lo = x[i] <= self.lower[i] && g[i] > 0.0;
                let at_hi = x[i] >= self.upper[i] && g[i] < 0.0;
                if at_lo || at_hi {
                    0.0
                } else {
                    g[i]
                }
            })
            .collect()
    }

    fn minimize(&self, x0: &[f64], tol: f64, max_iter: usize, max_step: f64) -> Option<Local> {
        let n = self.dim();
        let mut x = x0.to_vec();
        self.project(&mut x);
        let mut fx = self.eval(&x)?;
        let mut g = self.gradient(&x, fx)?;
        let mut pg = self.projected(&x, &g);
        let mut b = DMatrix::<f64>::identity(n, n);
        let mut fresh = true;
        for _ in 0..max_iter {
            let pg_norm = norm(&pg);
            if pg_norm <= tol {
                break;
            }
            let free: Vec<usize> = (0..n).filter(|&i| pg[i] != 0.0 || g[i] == 0.0).collect();
            let d = newton_direction(&b, &pg, &free, max_step);
            let mut accepted = None;
            let mut alpha = 1.0;
            for _ in 0..50 {
                let mut xn: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + alpha * b).collect();
                self.project(&mut xn);
                if let Some(fnew) = self.eval(&xn) {
                    let decrease: f64 = g.iter().zip(xn.iter().zip(&x)).map(|(gi, (a, b))| gi * (a - b)).sum();
                    if fnew <= fx + 1e-4 * decrease {
                        accepted = Some((xn, fnew, None));
                        break;
                    }
                    // Near the rounding floor of f, accept a step that clearly shrinks the gradient.
                    if fnew <= fx + 8.0 * f64::EPSILON * fx.abs() {
                        if let Some(gn) = self.gradient(&xn, fnew) {
                            if norm(&self.projected(&xn, &gn)) < 0.9 * pg_norm {
                                accepted = Some((xn, fnew, Some(gn)));
                                break;
                            }
                        }
                    }
                }
                alpha *= 0.5;
            }
            let Some((xn, fnew, gn)) = accepted else {
                if fresh {
                    break;
                }
                b = DMatrix::identity(n, n);
                fresh = true;
                continue;
            };
            let gn = match gn {
                Some(v) => v,
                None => self.gradient(&xn, fnew)?,
            };
            let s = DVector::from_iterator(n, xn.iter().zip(&x).map(|(a, b)| a - b));
            let y = DVector::from_iterator(n, gn.iter().zip(&g).map(|(a, b)| a - b));
            if fresh {
                let sy = s.dot(&y);
                if sy > 0.0 {
                    b = DMatrix::identity(n, n) * (y.dot(&y) / sy);
                }
                fresh = false;
            }
            let r = &y - &b * &s;
            let rs = r.dot(&s);
            if rs.abs() >= 1e-8 * r.norm() * s.norm() && rs != 0.0 {
                b += &r * r.transpose() / rs;
            }
            x = xn;
            fx = fnew;
            g = gn;
            pg = self.projected(&x, &g);
        }
        let on_bound = (0..n).any(|i| x[i] <= self.lower[i] || x[i] >= self.upper[i]);
        Some(Local { x, value: fx, on_bound })
    }

    /// Central second-difference Hessian.
    fn hessian(&self, x: &[f64], h: f64) -> Option<DMatrix<f64>> {
        let n = x.len();
        let f0 = self.eval(x)?;
        let mut m = DMatrix::zeros(n, n);
        let mut y = x.to_vec();
        for i in 0..n {
            y[i] = x[i] + h;
            let fp = self.eval(&y)?;
            y[i] = x[i] - h;
            let fm = self.eval(&y)?;
            y[i] = x[i];
            m[(i, i)] = (fp - 2.0 * f0 + fm) / (h * h);
            for j in 0..i {
                let mut corner = |si: f64, sj: f64| {
                    y[i] = x[i] + si * h;
                    y[j] = x[j] + sj * h;
                    let v = self.eval(&y);
                    y[i] = x[i];
                    y[j] = x[j];
                    v
                };
                let v = (corner(1.0, 1.0)? - corner(1.0, -1.0)? - corner(-1.0, 1.0)? + corner(-1.0, -1.0)?)
                    / (4.0 * h * h);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Some(m)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn newton_direction(b: &DMatrix<f64>, pg: &[f64], free: &[usize], max_step: f64) -> Vec<f64> {
    let m = free.len();
    let mut d = vec![0.0; pg.len()];
    if m == 0 {
        return d;
    }
    let sub = DMatrix::from_fn(m, m, |i, j| b[(free[i], free[j])]);
    let eig = SymmetricEigen::new(sub);
    let top = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
    let rhs = DVector::from_iterator(m, free.iter().map(|&i| pg[i]));
    let coeffs = eig.eigenvectors.transpose() * rhs;
    let scaled = DVector::from_iterator(
        m,
        coeffs.iter().zip(eig.eigenvalues.iter()).map(|(c, l)| -c / l.abs().max(1e-10 * top)),
    );
    let step = &eig.eigenvectors * scaled;
    let len = step.norm();
    let shrink = if len > max_step { max_step / len } else { 1.0 };
    for (k, &i) in free.iter().enumerate() {
        d[i] = step[k] * shrink;
    }
    d
}

/// Tensor grid of `per` interior points per coordinate.
fn seed_grid(lower: &[f64], upper: &[f64], per: usize) -> Vec<Vec<f64>> {
    let n = lower.len();
    let total = per.pow(n as u32);
    (0..total)
        .map(|mut idx| {
            (0..n)
                .map(|i| {
                    let k = idx % per;
                    idx /= per;
                    lower[i] + (upper[i] - lower[i]) * (k as f64 + 0.5) / per as f64
                })
                .collect::<Vec<f64>>()
        })
        .collect()
}

/// Isometries of the box: axis reflections composed with permutations of equal-length axes.
fn box_symmetries(lengths: &[f64]) -> Vec<Box<dyn Fn(&[f64]) -> Vec<f64> + Sync>> {
    let n = lengths.len();
    let mut perms: Vec<Vec<usize>> = vec![(0..n).collect()];
    if n == 2 && lengths[0] == lengths[1] {
        perms.push(vec![1, 0]);
    } else if n == 3 {
        perms = permutations3()
            .into_iter()
            .filter(|p| (0..3).all(|i| lengths[p[i]] == lengths[i]))
            .collect();
    }
    let mut out: Vec<Box<dyn Fn(&[f64]) -> Vec<f64> + Sync>> = Vec::new();
    for p in perms {
        for mask in 0..(1usize << n) {
            let l = lengths.to_vec();
            let p = p.clone();
            out.push(Box::new(move |x: &[f64]| {
                (0..n)
                    .map(|i| {
                        let v = x[p[i]];
                        if mask >> i & 1 == 1 {
                            l[i] - v
                        } else {
                            v
                        }
                    })
                    .collect()
            }));
        }
    }
    out
}

fn permutations3() -> Vec<Vec<usize>> {
    vec![vec![0, 1, 2], vec![0, 2, 1], vec![1, 0, 2], vec![1, 2, 0], vec![2, 0, 1], vec![2, 1, 0]]
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

/// Layout of a pair search vector: `scale_slots` leading log-scale coordinates, then σ₁, σ₂.
struct PairLayout {
    dim: usize,
    scale_slots: usize,
}

impl PairLayout {
    fn centers<'a>(&self, z: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        let o = self.scale_slots;
        (&z[o..o + self.dim], &z[o + self.dim..o + 2 * self.dim])
    }

    /// Images of z under box isometries and the bubble swap.
    fn images(&self, z: &[f64], lengths: &[f64]) -> Vec<Vec<f64>> {
        let (s1, s2) = self.centers(z);
        let mut out = Vec::new();
        for g in box_symmetries(lengths) {
            let (a, b) = (g(s1), g(s2));
            for swap in [false, true] {
                let mut v = Vec::with_capacity(z.len());
                if self.scale_slots == 2 {
                    if swap {
                        v.extend([z[1], z[0]]);
                    } else {
                        v.extend([z[0], z[1]]);
                    }
                }
                if swap {
                    v.extend(&b);
                    v.extend(&a);
                } else {
                    v.extend(&a);
                    v.extend(&b);
                }
                out.push(v);
            }
        }
        out
    }
}

fn separation_penalty(d: f64, eta: f64, scale: f64) -> Option<f64> {
    if d <= eta {
        return None;
    }
    let zone = 1.2 * eta;
    if d >= zone {
        Some(0.0)
    } else {
        let t = (zone - d) / (0.2 * eta);
        Some(scale * t.powi(4))
    }
}

fn check_eta(ev: &GreenEvaluator, eta: f64) -> Result<()> {
    if !(eta > 0.0 && eta < 0.5 * ev.domain.min_side()) {
        return Err(Error::Config(format!("eta = {eta} outside (0, half the shortest side)")));
    }
    Ok(())
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Runs the multistart search for a pair problem and assembles the report.
fn pair_search(
    ev: &GreenEvaluator,
    layout: PairLayout,
    lower: Vec<f64>,
    upper: Vec<f64>,
    steps: Vec<f64>,
    objective: &(dyn Fn(&[f64]) -> Option<f64> + Sync),
    eta: f64,
    opts: &OptimOptions,
) -> Result<CriticalPoint> {
    let seeds: Vec<Vec<f64>> = seed_grid(&lower, &upper, opts.seeds_per_coord)
        .into_iter()
        .filter(|z| {
            let (a, b) = layout.centers(z);
            dist(a, b) > 1.2 * eta
        })
        .collect();
    if seeds.is_empty() {
        return Err(Error::Config("no admissible seeds; increase seeds_per_coord or decrease eta".into()));
    }
    let scale = seeds.iter().filter_map(|z| objective(z)).map(f64::abs).fold(0.0, f64::max).max(1e-300);
    let scale_start = objective(&seeds[0]).map(f64::abs).unwrap_or(scale).max(1e-300);
    let tol = opts.tol_rel * scale_start;
    let penalized = |z: &[f64]| -> Option<f64> {
        let (a, b) = layout.centers(z);
        let p = separation_penalty(dist(a, b), eta, scale)?;
        Some(objective(z)? + p)
    };
    let problem = Problem { lower: lower.clone(), upper: upper.clone(), steps: steps.clone(), f: &penalized };
    let max_step = 0.1 * ev.domain.min_side().max(1.0);
    let locals: Vec<Local> = seeds
        .par_iter()
        .filter_map(|z| problem.minimize(z, tol, opts.max_iter, max_step))
        .collect();
    if locals.is_empty() {
        return Err(Error::Numeric("every start failed to evaluate".into()));
    }
    let mut warnings = Vec::new();
    let near_sep = |z: &[f64]| {
        let (a, b) = layout.centers(z);
        dist(a, b) < 1.2 * eta
    };
    if locals.iter().all(|l| l.on_bound || near_sep(&l.x)) {
        warnings.push("every start ended on the constraint boundary; eta may be too large or the regular part under-resolved".into());
    }
    // merge: min by value, ties broken lexicographically
    let best = locals
        .iter()
        .fold(None::<&Local>, |acc, l| match acc {
            None => Some(l),
            Some(a) if l.value < a.value || (l.value == a.value && lex_less(&l.x, &a.x)) => Some(l),
            acc => acc,
        })
        .expect("nonempty");
    let polished = problem.minimize(&best.x, 1e-3 * tol, opts.max_iter, max_step).unwrap_or_else(|| best.clone());
    let best = if polished.value <= best.value { polished } else { best.clone() };

    let tie = 1e-8 * best.value.abs().max(1e-300);
    let far = 1e-2 * ev.domain.min_side();
    let mut orbit: Vec<(Vec<f64>, f64)> = Vec::new();
    for img in layout.images(&best.x, &ev.domain.lengths) {
        if orbit.iter().any(|(o, _)| close(o, &img, 1e-6 * ev.domain.min_side())) {
            continue;
        }
        if let Some(v) = objective(&img) {
            orbit.push((img, v));
        }
    }
    orbit.sort_by(|a, b| if lex_less(&a.0, &b.0) { std::cmp::Ordering::Less } else { std::cmp::Ordering::Greater });
    let location = orbit[0].0.clone();
    let mut tied: Vec<Vec<f64>> = Vec::new();
    for l in &locals {
        let known = |x: &[f64]| {
            orbit.iter().any(|(o, _)| close(o, x, far))
                || tied.iter().any(|t| layout.images(t, &ev.domain.lengths).iter().any(|i| close(i, x, far)))
        };
        if l.value - best.value <= tie && !known(&l.x) {
            tied.push(l.x.clone());
        }
    }
    let value = objective(&location).ok_or_else(|| Error::Numeric("reported location not evaluable".into()))?;
    let plain = Problem { lower, upper, steps, f: objective };
    let grad = plain.gradient(&location, value).ok_or_else(|| Error::Numeric("gradient failed".into()))?;
    let gradient_norm = norm(&plain.projected(&location, &grad));
    let hessian_pd = plain
        .hessian(&location, 1e-3 * ev.domain.min_side())
        .map(|h| SymmetricEigen::new(h).eigenvalues.iter().all(|&v| v > 0.0))
        .unwrap_or(false);
    let mut multiplicity_note = format!("orbit of {} point(s) under box isometries and bubble swap", orbit.len());
    if !tied.is_empty() {
        multiplicity_note.push_str(&format!("; {} further tied orbit(s), none canonical", tied.len()));
    }
    Ok(CriticalPoint { location, value, gradient_norm, tol_grad: tol, hessian_pd, multiplicity_note, orbit, tied, warnings })
}

fn center_box(ev: &GreenEvaluator, eta: f64, copies: usize) -> (Vec<f64>, Vec<f64>) {
    let pad = eta * (1.0 + 1e-9);
    let lo: Vec<f64> = (0..copies).flat_map(|_| ev.domain.lengths.iter().map(|_| pad)).collect();
    let hi: Vec<f64> = (0..copies).flat_map(|_| ev.domain.lengths.iter().map(|l| l - pad)).collect();
    (lo, hi)
}

/// Minimizes φ over pairs of admissible, η-separated centers.
pub fn minimize_varphi(ev: &GreenEvaluator, eta: f64, opts: &OptimOptions) -> Result<CriticalPoint> {
    minimize_scaled_varphi(ev, eta, 1.0, opts)
}

/// Minimizes c·φ; the location must not depend on c > 0.
pub fn minimize_scaled_varphi(ev: &GreenEvaluator, eta: f64, factor: f64, opts: &OptimOptions) -> Result<CriticalPoint> {
    check_eta(ev, eta)?;
    let n = ev.domain.dim();
    let (lo, hi) = center_box(ev, eta, 2);
    let f = |z: &[f64]| ev.varphi(&z[..n], &z[n..]).ok().map(|v| factor * v);
    let steps = vec![ev.grad_step; 2 * n];
    pair_search(ev, PairLayout { dim: n, scale_slots: 0 }, lo, hi, steps, &f, eta, opts)
}

/// Minimizes Υ₂ (signs +1, −1) in (log λ₁, log λ₂, σ₁, σ₂).
pub fn minimize_upsilon2(ev: &GreenEvaluator, eta: f64, opts: &OptimOptions) -> Result<CriticalPoint> {
    check_eta(ev, eta)?;
    let n = ev.domain.dim();
    let (clo, chi) = center_box(ev, eta, 2);
    let span = -eta.ln() * (1.0 - 1e-12);
    let mut lo = vec![-span, -span];
    let mut hi = vec![span, span];
    lo.extend(clo);
    hi.extend(chi);
    let signs = [1.0, -1.0];
    let f = |z: &[f64]| -> Option<f64> {
        let s = [z[2..2 + n].to_vec(), z[2 + n..].to_vec()];
        if dist(&s[0], &s[1]) == 0.0 {
            return None;
        }
        let v = upsilon_raw(ev, &signs, &[z[0].exp(), z[1].exp()], &s);
        v.is_finite().then_some(v)
    };
    let mut steps = vec![1e-4, 1e-4];
    steps.extend(vec![ev.grad_step; 2 * n]);
    pair_search(ev, PairLayout { dim: n, scale_slots: 2 }, lo, hi, steps, &f, eta, opts)
}

/// Minimizes the Robin function over centers at distance ≥ η from the boundary.
pub fn minimize_robin(ev: &GreenEvaluator, eta: f64, opts: &OptimOptions) -> Result<CriticalPoint> {
    check_eta(ev, eta)?;
    let (lo, hi) = center_box(ev, eta, 1);
    let f = |z: &[f64]| ev.robin(z).ok();
    let problem = Problem { lower: lo.clone(), upper: hi.clone(), steps: vec![ev.grad_step; lo.len()], f: &f };
    let seeds = seed_grid(&lo, &hi, opts.seeds_per_coord);
    let tol = opts.tol_rel * f(&seeds[0]).unwrap_or(1.0).abs();
    let locals: Vec<Local> = seeds.par_iter().filter_map(|z| problem.minimize(z, tol, opts.max_iter, 0.1)).collect();
    let best = locals
        .iter()
        .fold(None::<&Local>, |acc, l| match acc {
            None => Some(l),
            Some(a) if l.value < a.value || (l.value == a.value && lex_less(&l.x, &a.x)) => Some(l),
            acc => acc,
        })
        .ok_or_else(|| Error::Numeric("every start failed to evaluate".into()))?;
    let g = problem.gradient(&best.x, best.value).unwrap_or_default();
    let mut orbit: Vec<(Vec<f64>, f64)> = Vec::new();
    for s in box_symmetries(&ev.domain.lengths) {
        let img = s(&best.x);
        if !orbit.iter().any(|(o, _)| close(o, &img, 1e-6 * ev.domain.min_side())) {
            let v = f(&img).unwrap_or(f64::NAN);
            orbit.push((img, v));
        }
    }
    orbit.sort_by(|a, b| if lex_less(&a.0, &b.0) { std::cmp::Ordering::Less } else { std::cmp::Ordering::Greater });
    let hessian_pd = problem
        .hessian(&best.x, 1e-3 * ev.domain.min_side())
        .map(|h| SymmetricEigen::new(h).eigenvalues.iter().all(|&v| v > 0.0))
        .unwrap_or(false);
    let warnings = if locals.iter().all(|l| l.on_bound) { vec!["every start ended on the boundary".to_string()] } else { vec![] };
    Ok(CriticalPoint {
        location: orbit[0].0.clone(),
        value: best.value,
        gradient_norm: norm(&problem.projected(&best.x, &g)),
        tol_grad: tol,
        hessian_pd,
        multiplicity_note: format!("orbit of {} point(s) under box isometries", orbit.len()),
        orbit,
        tied: vec![],
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenterConsistency {
    pub centers: Vec<f64>,
    pub grad_norm: f64,
    pub grad_limit: f64,
    pub gap: f64,
    pub gap_limit: f64,
    pub pass: bool,
}

/// Checks that the centers of a Υ₂ critical point are critical for φ and attain min φ.
pub fn verify_center_consistency(ev: &GreenEvaluator, upsilon_cp: &CriticalPoint, varphi_cp: &CriticalPoint) -> Result<CenterConsistency> {
    let centers = upsilon_cp.location[2..].to_vec();
    check_centers_against(ev, &centers, varphi_cp)
}

/// The same check for an arbitrary center pair (σ₁, σ₂) flattened.
pub fn check_centers_against(ev: &GreenEvaluator, centers: &[f64], varphi_cp: &CriticalPoint) -> Result<CenterConsistency> {
    let n = ev.domain.dim();
    let g = ev.grad_varphi(&centers[..n], &centers[n..])?;
    let grad_norm = norm(&g);
    let gap = ev.varphi(&centers[..n], &centers[n..])? - varphi_cp.value;
    let grad_limit = 10.0 * varphi_cp.tol_grad;
    let gap_limit = 1e-6 * varphi_cp.value.abs();
    Ok(CenterConsistency {
        centers: centers.to_vec(),
        grad_norm,
        grad_limit,
        gap,
        gap_limit,
        pass: grad_norm <= grad_limit && gap <= gap_limit,
    })
}

/// φ on a uniform grid over the admissible square (N = 1); inadmissible cells are `None`.
pub fn varphi_grid(ev: &GreenEvaluator, eta: f64, per_axis: usize) -> Result<Vec<Vec<Option<f64>>>> {
    if ev.domain.dim() != 1 {
        return Err(Error::Usage("the φ grid is defined for N = 1".into()));
    }
    check_eta(ev, eta)?;
    let l = ev.domain.lengths[0];
    let coord = |i: usize| eta + (l - 2.0 * eta) * (i as f64 + 0.5) / per_axis as f64;
    Ok((0..per_axis)
        .into_par_iter()
        .map(|i| {
            (0..per_axis)
                .map(|j| {
                    let (a, b) = (coord(i), coord(j));
                    if (a - b).abs() <= eta {
                        None
                    } else {
                        ev.varphi(&[a], &[b]).ok()
                    }
                })
                .collect()
        })
        .collect())
}

/// Cell centers of `varphi_grid`.
pub fn grid_coordinate(ev: &GreenEvaluator, eta: f64, per_axis: usize, i: usize) -> f64 {
    let l = ev.domain.lengths[0];
    eta + (l - 2.0 * eta) * (i as f64 + 0.5) / per_axis as f64
}
