//! Discrete reduction: a Nyström realization of the Dirichlet Green operator
//! on a graded fixed-frame grid, the constraint space spanned by the
//! projected kernel directions, the constrained linear operator, the
//! correction solve and residual diagnostics.
//!
//! Everything is written in the fixed frame with the dilated normalization:
//! a function f on Ω_ε is stored as f̂ with f(y) = μ^{q/2} f̂(μy). Then
//! (−Δ)^s f̂ = μ^{−εq/2} |f̂|^{p−1−ε} f̂ is the equation, and H^s pairings
//! ∫ f̂ (−Δ)^s ĝ over Ω equal their dilated-frame values.

use crate::bubble::FracDims;
use crate::error::{Error, Result};
use crate::expansions::Ansatz;
use crate::grid::{FixedGrid, GridSpec, Point};
use crate::images::ImageKernel;
use crate::projection::{source_density, Profile, ProjectionOptions};
use crate::quadrature::{Barycentric, GaussRule};
use crate::rate::{check_ladder, default_ladder, rate_case, RateReport, RateRule};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionConfig {
    pub dims: FracDims,
    pub length: f64,
    pub signs: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub ladder: Vec<f64>,
    pub slack: f64,
    pub projection: ProjectionOptions,
    pub grid: GridSpec,
    /// Taylor order of the regular part around each center.
    pub taylor_order: usize,
    pub solver: SolveOptions,
}

impl ReductionConfig {
    /// Two opposite bubbles at (0.3, 0.7) on (0, 1).
    pub fn interval(dims: &FracDims) -> Self {
        ReductionConfig {
            dims: dims.clone(),
            length: 1.0,
            signs: vec![1.0, -1.0],
            lambdas: vec![1.0, 1.0],
            sigmas: vec![0.3, 0.7],
            ladder: default_ladder(),
            slack: 0.15,
            projection: ProjectionOptions::default(),
            grid: GridSpec { order: 10, ratio: 3.0, edge_floor: 1e-8, bulk_panels: 8 },
            taylor_order: 30,
            solver: SolveOptions::default(),
        }
    }

    /// One positive bubble at the midpoint.
    pub fn single(dims: &FracDims) -> Self {
        ReductionConfig { signs: vec![1.0], lambdas: vec![1.0], sigmas: vec![0.5], ..Self::interval(dims) }
    }

    pub fn refined(&self) -> Self {
        let mut grid = self.grid;
        grid.order += 4;
        grid.edge_floor *= 1e-2;
        ReductionConfig { grid, taylor_order: self.taylor_order + 6, projection: self.projection.refined(), ..self.clone() }
    }

    fn check(&self) -> Result<()> {
        let k = self.signs.len();
        if k == 0 || self.lambdas.len() != k || self.sigmas.len() != k {
            return Err(Error::Config("signs, lambdas and sigmas must have equal nonzero length".into()));
        }
        if self.dims.dim != 1 {
            return Err(Error::Usage("the reduction solver runs on intervals (N = 1)".into()));
        }
        for (i, s) in self.sigmas.iter().enumerate() {
            if !(*s > 0.0 && *s < self.length) {
                return Err(Error::Admissibility(format!("center {i} at {s} is outside the interval")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Stop when successive iterates differ by at most this in H^s.
    pub tol: f64,
    /// Fixed-point sweeps before switching to Newton.
    pub max_iter: usize,
    pub newton_iter: usize,
    /// Initial relaxation of the fixed-point step; halved when the step grows.
    pub damping: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-10, max_iter: 50, newton_iter: 20, damping: 1.0 }
    }
}

/// Grid, Green matrix and ansatz data at one ε.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub dims: FracDims,
    pub eps: f64,
    pub mu: f64,
    pub ansatz: Ansatz,
    pub points: Vec<Point>,
    pub weights: DVector<f64>,
    /// (G g)(x_i) = Σ_j green[(i, j)] g(x_j).
    pub green: DMatrix<f64>,
    /// Σ a_i P̂ŵ_i
    pub profile: DVector<f64>,
    /// Σ a_i ŵ_i^p
    pub base_source: DVector<f64>,
    /// f₀'(Σ a_i P̂ŵ_i)
    pub potential: DVector<f64>,
}

impl Discretization {
    pub fn new(cfg: &ReductionConfig, eps: f64) -> Result<Self> {
        cfg.check()?;
        let d = &cfg.dims;
        let p = d.exponent;
        let ansatz = Ansatz::new(d, cfg.length, &cfg.signs, &cfg.lambdas, &cfg.sigmas, eps, cfg.projection, cfg.grid)?;
        let grid = &ansatz.grid;
        let points: Vec<Point> = grid.nodes.iter().map(|n| n.point).collect();
        let weights = DVector::from_iterator(points.len(), grid.nodes.iter().map(|n| n.weight));
        let centers: Vec<f64> = ansatz.bubbles.iter().map(|b| b.sigma).collect();
        let green = green_matrix(d, grid, &centers, cfg.taylor_order);
        let profile = DVector::from_iterator(points.len(), points.iter().map(|pt| ansatz.value(pt)));
        let base_source = DVector::from_iterator(
            points.len(),
            points.iter().map(|pt| ansatz.bubbles.iter().zip(&ansatz.signs).map(|(b, a)| a * b.source_at(pt)).sum()),
        );
        let potential = profile.map(|v| p * v.abs().powf(p - 1.0));
        let mu = ansatz.mu;
        Ok(Discretization { dims: d.clone(), eps, mu, ansatz, points, weights, green, profile, base_source, potential })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// μ^{−εq/2} |t|^{p−1−ε} t
    pub fn nonlinearity(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        let d = &self.dims;
        let e = d.exponent - 1.0 - self.eps;
        (-self.eps * 0.5 * d.decay * self.mu.ln() + e * t.abs().ln()).exp() * t
    }

    pub fn nonlinearity_prime(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        let d = &self.dims;
        let e = d.exponent - 1.0 - self.eps;
        (d.exponent - self.eps) * (-self.eps * 0.5 * d.decay * self.mu.ln() + e * t.abs().ln()).exp()
    }

    /// f_ε(V + Φ) − f₀'(V)Φ − Σ a_i w_i^p: everything the linear operator leaves out.
    pub fn remainder(&self, phi: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.len(),
            (0..self.len()).map(|j| {
                self.nonlinearity(self.profile[j] + phi[j]) - self.potential[j] * phi[j] - self.base_source[j]
            }),
        )
    }

    /// ∫ u g, the H^s pairing of u with the function whose (−Δ)^s is g.
    pub fn pair(&self, u: &DVector<f64>, g: &DVector<f64>) -> f64 {
        (0..self.len()).map(|j| self.weights[j] * u[j] * g[j]).sum()
    }
}

/// Nyström matrix of the Dirichlet Green operator on the grid. The free
/// kernel uses product integration on panels near the target; the regular
/// part uses Taylor expansions around the centers where either node sits in
/// a center window, and direct image sums elsewhere.
pub fn green_matrix(dims: &FracDims, grid: &FixedGrid, centers: &[f64], taylor_order: usize) -> DMatrix<f64> {
    let q = dims.decay;
    let c = dims.riesz_const;
    let n = grid.nodes.len();
    let order = grid.order;
    let leg = GaussRule::legendre(order);
    let bary = Barycentric::new(&leg.nodes);
    let sub = GaussRule::legendre(order + 4);
    let jac = GaussRule::jacobi(order / 2 + 3, 0.0, -q);
    let kernel = ImageKernel::new(dims, grid.length);

    let window_of = |pt: &Point| centers.iter().position(|&s| s == pt.anchor);
    let taylor: Vec<Vec<Vec<f64>>> = grid
        .nodes
        .iter()
        .map(|nd| centers.iter().map(|&s| kernel.taylor(nd.point.value(), s, taylor_order)).collect())
        .collect();
    let horner = |coeffs: &[f64], t: f64| coeffs.iter().rev().fold(0.0, |acc, a| acc * t + a);

    let mut g = DMatrix::<f64>::zeros(n, n);
    let mut local = vec![0.0; order];
    let mut basis = vec![0.0; order];
    for i in 0..n {
        let xi = grid.nodes[i].point;
        let wi = window_of(&xi);
        for (k, panel) in grid.panels.iter().enumerate() {
            let t = xi.offset_from(panel.anchor);
            let h = panel.b - panel.a;
            let dist = (panel.a - t).max(t - panel.b).max(0.0);
            let start = k * order;
            if dist >= h {
                for j in 0..order {
                    let z = grid.nodes[start + j].point.offset;
                    g[(i, start + j)] = c * grid.nodes[start + j].weight * (t - z).abs().powf(-q);
                }
            } else {
                near_weights(t, panel.a, panel.b, q, &bary, &sub, &jac, &mut local, &mut basis);
                for j in 0..order {
                    g[(i, start + j)] = c * local[j];
                }
            }
        }
        for j in 0..n {
            let zj = grid.nodes[j].point;
            let hval = match (window_of(&zj), wi) {
                (Some(cz), _) => horner(&taylor[i][cz], zj.offset),
                (None, Some(cx)) => horner(&taylor[j][cx], xi.offset),
                (None, None) => kernel.h(xi.value(), zj.value()),
            };
            g[(i, j)] -= grid.nodes[j].weight * hval;
        }
    }
    g
}

/// ∫_a^b |t − z|^{−q} ℓ_j(z) dz for the Lagrange basis on the panel's Gauss nodes.
#[allow(clippy::too_many_arguments)]
fn near_weights(
    t: f64,
    a: f64,
    b: f64,
    q: f64,
    bary: &Barycentric,
    sub: &GaussRule,
    jac: &GaussRule,
    out: &mut [f64],
    basis: &mut [f64],
) {
    out.iter_mut().for_each(|v| *v = 0.0);
    let to_ref = |z: f64| (2.0 * z - a - b) / (b - a);
    let mut add = |z: f64, w: f64, out: &mut [f64]| {
        bary.basis(to_ref(z), basis);
        for (o, l) in out.iter_mut().zip(basis.iter()) {
            *o += w * l;
        }
    };
    if t > a && t < b {
        // split at the target; Gauss–Jacobi absorbs the endpoint singularity
        for (len, dir) in [(b - t, 1.0), (t - a, -1.0)] {
            let half = 0.5 * len;
            let scale = half.powf(1.0 - q);
            for (x, w) in jac.nodes.iter().zip(&jac.weights) {
                let u = half * (1.0 + x);
                add(t + dir * u, scale * w, out);
            }
        }
        return;
    }
    // target outside at distance dist < b − a: subpanels doubling away from it
    let (near, dir, dist) = if t <= a { (a, 1.0, a - t) } else { (b, -1.0, t - b) };
    let h = b - a;
    let mut lo = 0.0;
    let mut step = dist.max(1e-300);
    while lo < h {
        let hi = (lo + step).min(h);
        for (u, w) in sub.mapped(lo, hi) {
            add(near + dir * u, w * (dist + u).powf(-q), out);
        }
        lo = hi;
        step *= 2.0;
    }
}

/// Projected kernel directions P ψ_h^l and their sources, with the Gram matrix.
#[derive(Debug, Clone)]
pub struct ConstraintSpace {
    /// (h, l): bubble h, l = 0 scale direction, l = 1 translation.
    pub labels: Vec<(usize, usize)>,
    /// Nodal values of the discrete P ψ, n × m.
    pub vectors: DMatrix<f64>,
    /// (−Δ)^s P ψ = f₀'(w_h) ψ_h, n × m.
    pub sources: DMatrix<f64>,
    /// Quadrature-weighted sources: Cᵀu is the H^s pairing with each P ψ.
    pub functionals: DMatrix<f64>,
    pub gram: DMatrix<f64>,
    pub gram_condition: f64,
    gram_inv: DMatrix<f64>,
}

pub const GRAM_CONDITION_LIMIT: f64 = 1e8;

pub fn build_constraint_space(disc: &Discretization) -> Result<ConstraintSpace> {
    let d = &disc.dims;
    let n = disc.len();
    let bubbles = &disc.ansatz.bubbles;
    let mut labels = Vec::new();
    let mut sources = DMatrix::<f64>::zeros(n, 2 * bubbles.len());
    for (h, b) in bubbles.iter().enumerate() {
        for (l, prof) in [Profile::Dilation, Profile::Translation].into_iter().enumerate() {
            let col = labels.len();
            for (j, pt) in disc.points.iter().enumerate() {
                // μ carries the fixed-frame ∂/∂Λ and ∂/∂σ to dilated-frame λ and ξ
                sources[(j, col)] = disc.mu * source_density(d, prof, b.scale, pt.offset_from(b.sigma));
            }
            labels.push((h, l));
        }
    }
    let vectors = &disc.green * &sources;
    let mut functionals = sources.clone();
    for j in 0..n {
        for c in 0..labels.len() {
            functionals[(j, c)] *= disc.weights[j];
        }
    }
    let gram = functionals.transpose() * &vectors;
    let sym = 0.5 * (&gram + gram.transpose());
    let eig = sym.symmetric_eigenvalues();
    let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v.abs()), hi.max(v.abs())));
    let gram_condition = hi / lo;
    if !(gram_condition <= GRAM_CONDITION_LIMIT) {
        return Err(Error::Config(format!(
            "constraint Gram matrix condition {gram_condition:e} exceeds {GRAM_CONDITION_LIMIT:e}; bubbles too close for the grid"
        )));
    }
    let gram_inv = gram.clone().try_inverse().ok_or_else(|| Error::Singular("constraint Gram matrix".into()))?;
    Ok(ConstraintSpace { labels, vectors, sources, functionals, gram, gram_condition, gram_inv })
}

impl ConstraintSpace {
    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    /// Coefficients α with Π u = u − Σ α_a P ψ_a.
    pub fn coefficients(&self, u: &DVector<f64>) -> DVector<f64> {
        &self.gram_inv * (self.functionals.transpose() * u)
    }

    pub fn project(&self, u: &DVector<f64>) -> DVector<f64> {
        u - &self.vectors * self.coefficients(u)
    }

    /// Largest |⟨u, P ψ_a⟩_{H^s}| / (‖u‖ ‖P ψ_a‖) given the source of u.
    pub fn orthogonality_defect(&self, disc: &Discretization, u: &DVector<f64>, u_source: &DVector<f64>) -> f64 {
        let nu = disc.pair(u, u_source).abs().sqrt();
        if nu == 0.0 {
            return 0.0;
        }
        let pairs = self.functionals.transpose() * u;
        (0..self.dim()).map(|a| pairs[a].abs() / (nu * self.gram[(a, a)].abs().sqrt())).fold(0.0, f64::max)
    }
}

/// Π(φ − G(f₀'(V) φ)).
pub fn apply_l(space: &ConstraintSpace, disc: &Discretization, phi: &DVector<f64>) -> DVector<f64> {
    let g = phi.component_mul(&disc.potential);
    space.project(&(phi - &disc.green * g))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coercivity {
    /// Dense singular values of the restricted operator.
    pub sigma_min: f64,
    /// Seeded block inverse iteration on the same operator.
    pub sigma_min_probe: f64,
    /// Without the constraint projection.
    pub sigma_min_full: f64,
    /// Smallest singular values of the unrestricted operator, ascending.
    pub full_spectrum_low: Vec<f64>,
    pub flagged: bool,
}

pub const COERCIVITY_FLOOR: f64 = 1e-6;

/// Symmetric form √(wf₀') G √(f₀'/w) of G f₀'(V): same spectrum, and
/// singular values equal eigenvalue moduli up to discretization.
fn symmetric_form(disc: &Discretization) -> DMatrix<f64> {
    let n = disc.len();
    let left: Vec<f64> = (0..n).map(|j| (disc.weights[j] * disc.potential[j]).sqrt()).collect();
    let right: Vec<f64> = (0..n).map(|j| (disc.potential[j] / disc.weights[j]).sqrt()).collect();
    let mut b = DMatrix::<f64>::identity(n, n);
    for j in 0..n {
        for i in 0..n {
            b[(i, j)] -= left[i] * disc.green[(i, j)] * right[j];
        }
    }
    b
}

/// Smallest singular value of L on the complement of the kernel directions,
/// by a dense SVD and by seeded block inverse iteration.
pub fn coercivity_check(space: &ConstraintSpace, disc: &Discretization) -> Result<Coercivity> {
    let n = disc.len();
    let m = space.dim();
    let mut b = symmetric_form(disc);
    let full = b.clone().singular_values();
    let mut low: Vec<f64> = full.iter().copied().collect();
    low.sort_by(f64::total_cmp);
    low.truncate(m + 2);

    // Householder reflections taking the kernel directions to the first m axes
    let mut y = DMatrix::<f64>::zeros(n, m);
    for a in 0..m {
        for j in 0..n {
            y[(j, a)] = (disc.weights[j] * disc.potential[j]).sqrt() * space.vectors[(j, a)];
        }
    }
    for k in 0..m {
        let mut v = DVector::<f64>::zeros(n);
        let norm = (k..n).map(|j| y[(j, k)] * y[(j, k)]).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::Singular("kernel direction vanishes on the grid".into()));
        }
        let alpha = if y[(k, k)] > 0.0 { -norm } else { norm };
        for j in k..n {
            v[j] = y[(j, k)];
        }
        v[k] -= alpha;
        let vn = v.norm();
        v /= vn;
        // y ← (I − 2vvᵀ) y and b ← (I − 2vvᵀ) b (I − 2vvᵀ)
        let vy = v.transpose() * &y;
        y -= 2.0 * &v * vy;
        let vb = v.transpose() * &b;
        b -= 2.0 * &v * vb;
        let bv = &b * &v;
        b -= 2.0 * bv * v.transpose();
    }
    let restricted = b.view((m, m), (n - m, n - m)).into_owned();
    let sv = restricted.clone().singular_values();
    let sigma_min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let sigma_min_probe = probe_sigma_min(&restricted, 6, 60)?;
    Ok(Coercivity {
        sigma_min,
        sigma_min_probe,
        sigma_min_full: low[0],
        full_spectrum_low: low,
        flagged: sigma_min < COERCIVITY_FLOOR,
    })
}

/// Block inverse iteration on MᵀM from a seeded random block, then
/// Rayleigh–Ritz on the converged subspace.
fn probe_sigma_min(m: &DMatrix<f64>, block: usize, sweeps: usize) -> Result<f64> {
    let n = m.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut x = DMatrix::<f64>::from_fn(n, block, |_, _| rng.random::<f64>() - 0.5);
    let lu = m.clone().lu();
    let lut = m.transpose().lu();
    for _ in 0..sweeps {
        let z = lut.solve(&x).ok_or_else(|| Error::Singular("restricted operator".into()))?;
        let z = lu.solve(&z).ok_or_else(|| Error::Singular("restricted operator".into()))?;
        x = z.qr().q();
    }
    let mx = m * &x;
    Ok(mx.singular_values().iter().copied().fold(f64::INFINITY, f64::min))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiSolution {
    pub eps: f64,
    /// Nodal values of Φ̂.
    pub values: Vec<f64>,
    /// (−Δ)^s Φ̂ at the nodes.
    pub source: Vec<f64>,
    /// Multipliers of the projected kernel directions.
    pub multipliers: Vec<f64>,
    pub hs_norm: f64,
    pub iterations: usize,
    /// H^s distance between the last two iterates.
    pub residual: f64,
    pub newton: bool,
    pub orthogonality: f64,
}

/// Bordered matrix [[A, −Ψ], [Cᵀ, 0]] for the constrained linear solves.
fn bordered(space: &ConstraintSpace, a: DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let m = space.dim();
    let mut out = DMatrix::<f64>::zeros(n + m, n + m);
    out.view_mut((0, 0), (n, n)).copy_from(&a);
    out.view_mut((0, n), (n, m)).copy_from(&(-&space.vectors));
    out.view_mut((n, 0), (m, n)).copy_from(&space.functionals.transpose());
    out
}

fn operator_matrix(disc: &Discretization, diag: &DVector<f64>) -> DMatrix<f64> {
    let n = disc.len();
    let mut a = -&disc.green;
    for j in 0..n {
        for i in 0..n {
            a[(i, j)] *= diag[j];
        }
        a[(j, j)] += 1.0;
    }
    a
}

/// Solves Π{Φ − G[f_ε(V + Φ) − Σ a_i w_i^p]} = 0 with Φ orthogonal to the kernel
/// directions: fixed-point sweeps Φ ← L⁻¹ Π G[remainder(Φ)], then Newton.
pub fn solve_phi(space: &ConstraintSpace, disc: &Discretization, opts: &SolveOptions) -> Result<PhiSolution> {
    let n = disc.len();
    let m = space.dim();
    let lu = bordered(space, operator_matrix(disc, &disc.potential)).lu();
    let mut phi = DVector::<f64>::zeros(n);
    let mut mult = DVector::<f64>::zeros(m);
    // (−Δ)^s Φ of the current iterate
    let mut xi = DVector::<f64>::zeros(n);
    let mut theta = opts.damping;
    let mut last_step = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        iterations += 1;
        let rem = disc.remainder(&phi);
        let mut rhs = DVector::<f64>::zeros(n + m);
        rhs.rows_mut(0, n).copy_from(&(&disc.green * &rem));
        let sol = lu.solve(&rhs).ok_or_else(|| Error::Singular("bordered linear operator".into()))?;
        let phi_new = sol.rows(0, n).into_owned();
        let mult_new = sol.rows(n, m).into_owned();
        let xi_new = phi_new.component_mul(&disc.potential) + &rem + &space.sources * &mult_new;
        let dphi = theta * (&phi_new - &phi);
        let dxi = theta * (&xi_new - &xi);
        let step = disc.pair(&dphi, &dxi).abs().sqrt();
        phi += &dphi;
        xi += &dxi;
        mult += theta * (&mult_new - &mult);
        if step <= opts.tol {
            last_step = step;
            converged = true;
            break;
        }
        if step > last_step {
            theta = (0.5 * theta).max(1.0 / 16.0);
        }
        last_step = step;
    }
    let mut newton = false;
    if !converged {
        newton = true;
        for _ in 0..opts.newton_iter {
            iterations += 1;
            let total = &disc.profile + &phi;
            let fp = total.map(|t| disc.nonlinearity_prime(t));
            let f = total.map(|t| disc.nonlinearity(t));
            let src = &f - &disc.base_source;
            let mut res = DVector::<f64>::zeros(n + m);
            res.rows_mut(0, n).copy_from(&(&phi - &disc.green * &src - &space.vectors * &mult));
            res.rows_mut(n, m).copy_from(&(space.functionals.transpose() * &phi));
            let jac = bordered(space, operator_matrix(disc, &fp)).lu();
            let delta = jac.solve(&res).ok_or_else(|| Error::Singular("Newton system".into()))?;
            let dphi = -delta.rows(0, n).into_owned();
            let dmult = -delta.rows(n, m).into_owned();
            let dxi = dphi.component_mul(&fp) + &space.sources * &dmult;
            let step = disc.pair(&dphi, &dxi).abs().sqrt();
            phi += &dphi;
            mult += &dmult;
            last_step = step;
            if step <= opts.tol {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return Err(Error::Numeric(format!("correction solve did not converge; last step {last_step:e}")));
    }
    // exact source of the converged Φ
    let total = &disc.profile + &phi;
    let exact = total.map(|t| disc.nonlinearity(t)) - &disc.base_source + &space.sources * &mult;
    let hs_norm = disc.pair(&phi, &exact).abs().sqrt();
    let orthogonality = space.orthogonality_defect(disc, &phi, &exact);
    Ok(PhiSolution {
        eps: disc.eps,
        values: phi.iter().copied().collect(),
        source: exact.iter().copied().collect(),
        multipliers: mult.iter().copied().collect(),
        hs_norm,
        iterations,
        residual: last_step,
        newton,
        orthogonality,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assembly {
    pub eps: f64,
    /// ‖(−Δ)^s v − f_ε(v)‖_{H^{−s}}
    pub residual_dual: f64,
    /// The same after removing the kernel directions.
    pub constrained_residual: f64,
    /// c_{hl} from projecting the defect onto each P ψ_h^l.
    pub multipliers: Vec<f64>,
    pub labels: Vec<(usize, usize)>,
    pub positive_bumps: usize,
    pub negative_bumps: usize,
    /// Sign of v at each center.
    pub center_signs: Vec<f64>,
    pub shape_ok: bool,
}

/// Residual of v = Σ a_i P w_i + Φ and the kernel-direction multipliers.
pub fn assemble_and_residual(space: &ConstraintSpace, disc: &Discretization, phi: &PhiSolution) -> Assembly {
    let n = disc.len();
    let phiv = DVector::from_column_slice(&phi.values);
    let total = &disc.profile + &phiv;
    // (−Δ)^s v − f_ε(v) with (−Δ)^s Φ from the discrete equation
    let xi = phiv.component_mul(&disc.potential) + disc.remainder(&phiv) + &space.sources * DVector::from_column_slice(&phi.multipliers);
    let defect = &disc.base_source + &xi - total.map(|t| disc.nonlinearity(t));
    let gd = &disc.green * &defect;
    let residual_dual = disc.pair(&gd, &defect).abs().sqrt();
    let alpha = space.coefficients(&gd);
    let rest = &gd - &space.vectors * &alpha;
    let rest_src = &defect - &space.sources * &alpha;
    let constrained_residual = disc.pair(&rest, &rest_src).abs().sqrt();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (disc.points[i], disc.points[j]);
        a.value().total_cmp(&b.value()).then(if a.anchor == b.anchor { a.offset.total_cmp(&b.offset) } else { std::cmp::Ordering::Equal })
    });
    let vals: Vec<f64> = order.iter().map(|&i| total[i]).collect();
    let (positive_bumps, negative_bumps) = count_bumps(&vals);
    let centers: Vec<f64> = disc.ansatz.bubbles.iter().map(|b| b.sigma).collect();
    let center_signs: Vec<f64> = centers
        .iter()
        .map(|&s| {
            let j = (0..n).filter(|&j| disc.points[j].anchor == s).min_by(|&a, &b| disc.points[a].offset.abs().total_cmp(&disc.points[b].offset.abs()));
            j.map(|j| total[j].signum()).unwrap_or(0.0)
        })
        .collect();
    let want_pos = disc.ansatz.signs.iter().filter(|a| **a > 0.0).count();
    let want_neg = disc.ansatz.signs.len() - want_pos;
    let shape_ok = positive_bumps == want_pos
        && negative_bumps == want_neg
        && center_signs.iter().zip(&disc.ansatz.signs).all(|(s, a)| s == a);
    Assembly {
        eps: disc.eps,
        residual_dual,
        constrained_residual,
        multipliers: alpha.iter().copied().collect(),
        labels: space.labels.clone(),
        positive_bumps,
        negative_bumps,
        center_signs,
        shape_ok,
    }
}

/// Sign lobes of significant size: maximal runs of one sign among the
/// values above 10⁻³ of the peak.
pub fn count_bumps(vals: &[f64]) -> (usize, usize) {
    let peak = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = 1e-3 * peak;
    let (mut pos, mut neg) = (0, 0);
    let mut current = 0.0;
    for &v in vals {
        if v.abs() < floor || v.signum() == current {
            continue;
        }
        current = v.signum();
        if current > 0.0 {
            pos += 1;
        } else {
            neg += 1;
        }
    }
    (pos, neg)
}

/// Fixed-frame samples (x, V, Φ, V + Φ) sorted by position.
pub fn profile_rows(disc: &Discretization, phi: &PhiSolution) -> Vec<[f64; 4]> {
    let mut rows: Vec<[f64; 4]> = (0..disc.len())
        .map(|j| [disc.points[j].value(), disc.profile[j], phi.values[j], disc.profile[j] + phi.values[j]])
        .collect();
    rows.sort_by(|a, b| a[0].total_cmp(&b[0]));
    rows
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderPoint {
    pub eps: f64,
    pub nodes: usize,
    pub hs_norm: f64,
    pub iterations: usize,
    pub newton: bool,
    pub orthogonality: f64,
    pub gram_condition: f64,
    pub coercivity: Option<Coercivity>,
    pub assembly: Assembly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub rates: RateReport,
    pub points: Vec<LadderPoint>,
    /// (max − min)/max of σ_min along the ladder.
    pub coercivity_variation: Option<f64>,
    pub coercivity_pass: bool,
    /// At every ε the unconstrained operator has k(N+1) singular values below
    /// half the constrained σ_min.
    pub kernel_detected: bool,
    pub multipliers_decrease: bool,
    pub pass: bool,
}

pub const COERCIVITY_VARIATION_LIMIT: f64 = 0.5;

/// Predicted exponent of ‖Φ‖ in ε.
pub fn phi_exponent(dims: &FracDims) -> f64 {
    let n = dims.dim as f64;
    let s = dims.order;
    if n > 6.0 * s {
        (n + 2.0 * s) * dims.dilation / 2.0
    } else {
        1.0
    }
}

/// Solves along the ladder, fits ‖Φ‖ against ε and checks coercivity.
pub fn phi_rate_report(cfg: &ReductionConfig, with_coercivity: bool) -> Result<ReductionReport> {
    check_ladder(&cfg.ladder)?;
    let mut points = Vec::new();
    for &eps in &cfg.ladder {
        let disc = Discretization::new(cfg, eps)?;
        let space = build_constraint_space(&disc)?;
        let coercivity = if with_coercivity { Some(coercivity_check(&space, &disc)?) } else { None };
        let phi = solve_phi(&space, &disc, &cfg.solver)?;
        let assembly = assemble_and_residual(&space, &disc, &phi);
        points.push(LadderPoint {
            eps,
            nodes: disc.len(),
            hs_norm: phi.hs_norm,
            iterations: phi.iterations,
            newton: phi.newton,
            orthogonality: phi.orthogonality,
            gram_condition: space.gram_condition,
            coercivity,
            assembly,
        });
    }
    let norms: Vec<f64> = points.iter().map(|p| p.hs_norm).collect();
    let case = rate_case("phi_norm", &cfg.ladder, &norms, phi_exponent(&cfg.dims), RateRule::Within { slack: cfg.slack });
    let rates = RateReport::new(vec![case]);
    let (coercivity_variation, coercivity_pass, kernel_detected) = if with_coercivity {
        let sig: Vec<f64> = points.iter().map(|p| p.coercivity.as_ref().map(|c| c.sigma_min).unwrap_or(f64::NAN)).collect();
        let hi = sig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = sig.iter().copied().fold(f64::INFINITY, f64::min);
        let var = (hi - lo) / hi;
        let m = 2 * cfg.signs.len();
        let kernel = points.iter().all(|p| {
            p.coercivity
                .as_ref()
                .map(|c| c.full_spectrum_low.iter().filter(|v| **v < 0.5 * c.sigma_min).count() >= m)
                .unwrap_or(false)
        });
        let flagged = points.iter().any(|p| p.coercivity.as_ref().map(|c| c.flagged).unwrap_or(true));
        (Some(var), var < COERCIVITY_VARIATION_LIMIT && !flagged, kernel)
    } else {
        (None, true, true)
    };
    let mags: Vec<f64> = points.iter().map(|p| p.assembly.multipliers.iter().fold(0.0f64, |m, c| m.max(c.abs()))).collect();
    let multipliers_decrease = mags.windows(2).all(|w| w[1] < w[0]);
    let pass = rates.pass && coercivity_pass && kernel_detected;
    Ok(ReductionReport { rates, points, coercivity_variation, coercivity_pass, kernel_detected, multipliers_decrease, pass })
}
