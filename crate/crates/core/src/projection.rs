//! Projected bubbles on the dilated interval, realized in the fixed frame.
//!
//! For a source g concentrated at σ with scale Λ = μλ (μ = ε^{α₀}), the
//! projection is P g = ∫_Ω G(·, z) g(z) dz. Writing G = Γ − H and using
//! that Γ * g reproduces the free profile on the whole line,
//!
//!   P g(x) = free(x) − T(x) − ∫_Ω H(x, z) g(z) dz,
//!
//! with T the exterior part of Γ * g. The H-integral is split into a
//! Taylor-moment near field and a direct far field so that no term suffers
//! cancellation even when Λ is far below the float spacing near σ.

use crate::bubble::FracDims;
use crate::error::{Error, Result};
use crate::grid::{edge_graded_panels, geometric_breaks, Point};
use crate::images::ImageKernel;
use crate::quadrature::{AdaptiveGauss, Barycentric, GaussRule};
use crate::spectral::{CoeffVector, SpectralBasis};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// w itself, source w^p.
    Bubble,
    /// ∂w/∂λ, source p w^{p−1} ∂w/∂λ.
    Dilation,
    /// ∂w/∂σ, source p w^{p−1} ∂w/∂σ.
    Translation,
}

impl Profile {
    /// e with view_ε(y) = μ^e · fixed(μy).
    pub fn pullback_exponent(&self, dims: &FracDims) -> f64 {
        match self {
            Profile::Bubble => dims.decay / 2.0,
            _ => dims.decay / 2.0 + 1.0,
        }
    }
}

/// Dilation factor μ = ε^{α₀}.
pub fn dilation(dims: &FracDims, eps: f64) -> f64 {
    eps.powf(dims.dilation)
}

/// Free profile at offset r from the center, scale Λ.
pub fn free_profile(dims: &FracDims, profile: Profile, scale: f64, r: f64) -> f64 {
    let q = dims.decay;
    let a = dims.amplitude;
    let den = scale * scale + r * r;
    match profile {
        Profile::Bubble => a * scale.powf(q / 2.0) * den.powf(-q / 2.0),
        Profile::Dilation => a * 0.5 * q * scale.powf(q / 2.0 - 1.0) * (r * r - scale * scale) * den.powf(-q / 2.0 - 1.0),
        Profile::Translation => a * q * scale.powf(q / 2.0) * r * den.powf(-q / 2.0 - 1.0),
    }
}

/// Right-hand side whose whole-line Riesz potential is the free profile.
pub fn source_density(dims: &FracDims, profile: Profile, scale: f64, r: f64) -> f64 {
    let p = dims.exponent;
    let w = free_profile(dims, Profile::Bubble, scale, r);
    match profile {
        Profile::Bubble => w.powf(p),
        _ => p * w.powf(p - 1.0) * free_profile(dims, profile, scale, r),
    }
}

/// ∫_ℝ of the source density.
pub fn whole_mass(dims: &FracDims, profile: Profile, scale: f64) -> f64 {
    let q = dims.decay;
    match profile {
        Profile::Bubble => dims.source_mass * scale.powf(q / 2.0),
        Profile::Dilation => dims.source_mass * 0.5 * q * scale.powf(q / 2.0 - 1.0),
        Profile::Translation => 0.0,
    }
}

/// Numerical parameters of the fixed-frame realization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionOptions {
    pub taylor_order: usize,
    /// Near-field radius relative to the distance from σ to the boundary.
    pub taylor_radius: f64,
    pub near_order: usize,
    pub far_order: usize,
    pub ratio: f64,
    /// Smallest interpolation panel at an endpoint, relative to the length.
    pub edge_floor: f64,
    pub interp_nodes: usize,
    pub exterior_tol: f64,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        ProjectionOptions {
            taylor_order: 6,
            taylor_radius: 1e-3,
            near_order: 16,
            far_order: 14,
            ratio: 3.0,
            edge_floor: 1e-10,
            interp_nodes: 12,
            exterior_tol: 1e-12,
        }
    }
}

impl ProjectionOptions {
    pub fn refined(&self) -> Self {
        ProjectionOptions {
            near_order: self.near_order + 8,
            far_order: self.far_order + 8,
            ratio: self.ratio.sqrt(),
            interp_nodes: self.interp_nodes + 4,
            exterior_tol: self.exterior_tol * 1e-1,
            ..*self
        }
    }
}

#[derive(Debug, Clone)]
struct Panel {
    a: f64,
    b: f64,
    nodes: Vec<f64>,
    values: Vec<f64>,
    interp: Barycentric,
}

/// Pieces of the correction at one point.
#[derive(Debug, Clone, Copy)]
pub struct CorrectionParts {
    /// Exterior part of the whole-line potential.
    pub exterior: f64,
    /// H(x, σ).
    pub h_center: f64,
    /// ∫_Ω (H(x, z) − H(x, σ)) g(z) dz.
    pub h_spread: f64,
}

/// P_ε applied to one bubble profile, realized on the fixed interval (0, L).
#[derive(Debug, Clone)]
pub struct ProjectedBubble {
    pub dims: FracDims,
    pub length: f64,
    pub profile: Profile,
    /// Scale in the dilated frame.
    pub lambda: f64,
    pub sigma: f64,
    pub eps: f64,
    pub mu: f64,
    /// Fixed-frame scale μλ.
    pub scale: f64,
    pub whole_mass: f64,
    pub exterior_mass: f64,
    kernel: ImageKernel,
    options: ProjectionOptions,
    moments: Vec<f64>,
    far: Vec<(f64, f64)>,
    panels: Vec<Panel>,
}

impl ProjectedBubble {
    pub fn new(
        dims: &FracDims,
        length: f64,
        profile: Profile,
        eps: f64,
        lambda: f64,
        sigma: f64,
        options: ProjectionOptions,
    ) -> Result<Self> {
        if dims.dim != 1 {
            return Err(Error::Usage("projected bubbles are realized on intervals (N = 1)".into()));
        }
        if !(sigma > 0.0 && sigma < length) {
            return Err(Error::Admissibility(format!("center {sigma} outside (0, {length})")));
        }
        if !(eps > 0.0 && eps < 1.0) || !(lambda > 0.0) {
            return Err(Error::Config(format!("need eps in (0,1) and lambda > 0, got {eps}, {lambda}")));
        }
        let mu = dilation(dims, eps);
        Self::with_scale(dims, length, profile, mu * lambda, sigma, options).map(|mut pb| {
            pb.eps = eps;
            pb.mu = mu;
            pb.lambda = lambda;
            pb
        })
    }

    /// Fixed-frame construction from the scale Λ directly (ε and μ left at 1).
    pub fn with_scale(
        dims: &FracDims,
        length: f64,
        profile: Profile,
        scale: f64,
        sigma: f64,
        options: ProjectionOptions,
    ) -> Result<Self> {
        let kernel = ImageKernel::new(dims, length);
        let dist = sigma.min(length - sigma);
        let rho = options.taylor_radius * dist;
        let g = |r: f64| source_density(dims, profile, scale, r);

        // near-field moments ∫_{|r|<ρ} g r^k
        let rule = GaussRule::legendre(options.near_order);
        let mut moments = vec![0.0; options.taylor_order + 1];
        let first = (0.25 * scale).min(rho);
        for w in geometric_breaks(first, rho, options.ratio).windows(2) {
            for (t, wt) in rule.mapped(w[0], w[1]) {
                let (gp, gm) = (g(t), g(-t));
                let mut tk = 1.0;
                for (k, m) in moments.iter_mut().enumerate() {
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    *m += wt * tk * (gp + sign * gm);
                    tk *= t;
                }
            }
        }

        // far field on each side: geometric from ρ outward, graded again into the endpoint
        let far_rule = GaussRule::legendre(options.far_order);
        let mut far = Vec::new();
        for (side, reach) in [(-1.0, sigma), (1.0, length - sigma)] {
            let mut breaks = geometric_breaks(rho, 0.5 * reach, options.ratio);
            breaks.remove(0);
            let mut outer: Vec<f64> = geometric_breaks(1e-6 * reach, 0.5 * reach, options.ratio)
                .into_iter()
                .map(|u| reach - u)
                .rev()
                .collect();
            outer.remove(0);
            breaks.extend(outer);
            for w in breaks.windows(2) {
                for (t, wt) in far_rule.mapped(w[0], w[1]) {
                    let r = side * t;
                    far.push((sigma + r, wt * g(r)));
                }
            }
        }

        let mut pb = ProjectedBubble {
            dims: dims.clone(),
            length,
            profile,
            lambda: scale,
            sigma,
            eps: 1.0,
            mu: 1.0,
            scale,
            whole_mass: whole_mass(dims, profile, scale),
            exterior_mass: 0.0,
            kernel,
            options,
            moments,
            far,
            panels: Vec::new(),
        };
        pb.exterior_mass = pb.exterior_integral(None)?;
        pb.panels = pb.build_panels()?;
        Ok(pb)
    }

    fn source(&self, r: f64) -> f64 {
        source_density(&self.dims, self.profile, self.scale, r)
    }

    /// ∫ over ℝ∖Ω of g, or of Γ(x − z) g(z) when `x` is given.
    fn exterior_integral(&self, x: Option<f64>) -> Result<f64> {
        let l = self.length;
        let q = self.dims.decay;
        let quad = AdaptiveGauss::new(15, self.options.exterior_tol, 0.0);
        let mut total = 0.0;
        // t ≥ 0 is the distance past the endpoint: Gauss panels on [0, 1] graded
        // from t ~ d, then t = e^v on the algebraic tail
        for left in [true, false] {
            let d = match x {
                Some(x) if left => x,
                Some(x) => l - x,
                None => 1.0,
            };
            let f = |t: f64| {
                let r = if left { -t - self.sigma } else { l + t - self.sigma };
                let kern = match x {
                    Some(_) => (d + t).powf(-q),
                    None => 1.0,
                };
                kern * self.source(r)
            };
            let mut breaks = vec![0.0];
            let mut t = 0.25 * d;
            while t < 1.0 {
                breaks.push(t);
                t *= 4.0;
            }
            breaks.push(1.0);
            total += quad.integrate_breaks(&breaks, f)?.value;
            let tail: Vec<f64> = (0..=14).map(|k| 50.0 * k as f64).collect();
            total += quad
                .integrate_breaks(&tail, |v| {
                    let t = v.exp();
                    let y = f(t) * t;
                    if y.is_finite() {
                        y
                    } else {
                        0.0
                    }
                })?
                .value;
        }
        Ok(match x {
            Some(_) => self.dims.riesz_const * total,
            None => total,
        })
    }

    /// Exterior potential, H(x, σ) and the H-spread integral at x.
    pub fn parts(&self, x: f64) -> Result<CorrectionParts> {
        let k = &self.kernel;
        let coeffs = k.taylor(x, self.sigma, self.options.taylor_order);
        let h_center = coeffs[0];
        let mut spread: f64 = coeffs[1..].iter().zip(&self.moments[1..]).map(|(c, m)| c * m).sum();
        for &(z, wg) in &self.far {
            spread += wg * (k.h(x, z) - h_center);
        }
        Ok(CorrectionParts { exterior: self.exterior_integral(Some(x))?, h_center, h_spread: spread })
    }

    /// P g − free at x, computed directly.
    pub fn correction_direct(&self, x: f64) -> Result<f64> {
        let p = self.parts(x)?;
        Ok(-p.exterior - p.h_center * (self.whole_mass - self.exterior_mass) - p.h_spread)
    }

    /// P g − free + H(x, σ) ∫_ℝ g: what remains after the leading Robin-type correction.
    pub fn leading_remainder(&self, x: f64) -> Result<f64> {
        let p = self.parts(x)?;
        Ok(-p.exterior + p.h_center * self.exterior_mass - p.h_spread)
    }

    fn build_panels(&self) -> Result<Vec<Panel>> {
        let n = self.options.interp_nodes;
        let cheb: Vec<f64> = (0..n).map(|j| -((2 * j + 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos()).collect();
        let mut panels = Vec::new();
        for (a, b) in edge_graded_panels(self.length, self.options.edge_floor, self.options.ratio, 8) {
            let nodes: Vec<f64> = cheb.iter().map(|t| 0.5 * (a + b) + 0.5 * (b - a) * t).collect();
            let values = nodes.iter().map(|&x| self.correction_direct(x)).collect::<Result<Vec<f64>>>()?;
            let interp = Barycentric::new(&nodes);
            panels.push(Panel { a, b, nodes, values, interp });
        }
        Ok(panels)
    }

    /// Interpolated correction P g − free at x ∈ [0, L].
    pub fn correction(&self, x: f64) -> f64 {
        let idx = self.panels.partition_point(|p| p.b < x).min(self.panels.len() - 1);
        let p = &self.panels[idx];
        let mut basis = vec![0.0; p.nodes.len()];
        p.interp.basis(x.clamp(p.a, p.b), &mut basis);
        basis.iter().zip(&p.values).map(|(b, v)| b * v).sum()
    }

    /// Free profile at a point.
    pub fn free_at(&self, pt: &Point) -> f64 {
        free_profile(&self.dims, self.profile, self.scale, pt.offset_from(self.sigma))
    }

    /// Fixed-frame value P_ε(profile)(x).
    pub fn value(&self, pt: &Point) -> f64 {
        let x = pt.value();
        if x <= 0.0 || x >= self.length {
            return 0.0;
        }
        self.free_at(pt) + self.correction(x)
    }

    /// Dilated-frame view at y ∈ Ω_ε: μ^e times the fixed-frame value at μy.
    pub fn view(&self, y: f64) -> f64 {
        self.mu.powf(self.profile.pullback_exponent(&self.dims)) * self.value(&Point::at(self.mu * y))
    }

    /// Dilated-frame view at δ + t with δ = σ/μ, keeping the offset exact.
    pub fn view_near_center(&self, t: f64) -> f64 {
        let pt = Point { anchor: self.sigma, offset: self.mu * t };
        self.mu.powf(self.profile.pullback_exponent(&self.dims)) * self.value(&pt)
    }

    /// Source density at a point.
    pub fn source_at(&self, pt: &Point) -> f64 {
        self.source(pt.offset_from(self.sigma))
    }
}

/// Spectral route: solve (−Δ)^s u = g in coefficients on the basis.
pub fn spectral_projection(basis: &SpectralBasis, dims: &FracDims, profile: Profile, scale: f64, sigma: f64) -> Result<CoeffVector> {
    if basis.domain.dim() != 1 {
        return Err(Error::Usage("spectral cross-check is set up for N = 1".into()));
    }
    let samples = basis.sample(|x| source_density(dims, profile, scale, x[0] - sigma));
    let g = basis.to_coeffs(&samples)?;
    basis.fractional_solve(&g, dims.order)
}
