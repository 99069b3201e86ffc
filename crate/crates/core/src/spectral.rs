//! Dirichlet sine eigenbasis of −Δ on a box, coefficient transforms and the
//! spectral fractional power.

use crate::cache::DiskCache;
use crate::error::{Error, Result};
use crate::quadrature::GaussRule;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BoxDomain {
    pub lengths: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lengths: Vec<f64>) -> Result<Self> {
        if lengths.is_empty() || lengths.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(Error::Config(format!("box side lengths must be positive, got {lengths:?}")));
        }
        Ok(BoxDomain { lengths })
    }

    pub fn unit(dim: usize) -> Self {
        BoxDomain { lengths: vec![1.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.lengths.len()
    }

    pub fn min_side(&self) -> f64 {
        self.lengths.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(&self.lengths).all(|(v, l)| *v > 0.0 && *v < *l)
    }

    /// Distance from an interior point to the boundary.
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.lengths)
            .map(|(v, l)| v.min(l - v))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Normalized sine eigenfunction on one axis.
pub fn sine_mode(length: f64, k: usize, x: f64) -> f64 {
    (2.0 / length).sqrt() * (k as f64 * PI * x / length).sin()
}

/// Coefficients in a `SpectralBasis`, stored in the basis mode order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffVector {
    pub values: Vec<f64>,
}

impl CoeffVector {
    pub fn zeros(n: usize) -> Self {
        CoeffVector { values: vec![0.0; n] }
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone)]
struct AxisGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// table[k * n + i] = φ_{k+1}(x_i)
    table: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SpectralBasis {
    pub domain: BoxDomain,
    pub cutoff: usize,
    pub grid_resolution: usize,
    /// Multi-indices (1-based per axis), ordered by eigenvalue with
    /// lexicographic tie-break.
    pub modes: Vec<Vec<usize>>,
    pub eigenvalues: Vec<f64>,
    axes: Vec<AxisGrid>,
    /// position in `modes` of each lexicographic multi-index
    lex_to_mode: Vec<usize>,
}

/// Minimum grid points per half-wave of the top mode.
pub const MIN_RESOLUTION: usize = 4;

impl SpectralBasis {
    pub fn build(domain: &BoxDomain, cutoff: usize, grid_resolution: usize) -> Result<Self> {
        Self::build_cached(domain, cutoff, grid_resolution, None)
    }

    /// Builds the basis. Each axis grid is composite Gauss–Legendre with
    /// `grid_resolution` nodes per half-wave of the top mode, grouped two
    /// half-waves per panel.
    pub fn build_cached(
        domain: &BoxDomain,
        cutoff: usize,
        grid_resolution: usize,
        cache: Option<&DiskCache>,
    ) -> Result<Self> {
        if cutoff == 0 {
            return Err(Error::Config("mode cutoff must be at least 1".into()));
        }
        if grid_resolution < MIN_RESOLUTION {
            return Err(Error::Config(format!(
                "grid resolution {grid_resolution} under-resolves the top mode (need at least {MIN_RESOLUTION} points per half-wave)"
            )));
        }
        let rule = GaussRule::legendre(2 * grid_resolution);
        let panels = cutoff.div_ceil(2);
        let mut axes = Vec::with_capacity(domain.dim());
        for &len in &domain.lengths {
            let key = serde_json::json!({
                "lengths": len, "cutoff": cutoff, "grid_resolution": grid_resolution
            });
            let mut nodes = Vec::with_capacity(panels * rule.len());
            let mut weights = Vec::with_capacity(panels * rule.len());
            let h = len / panels as f64;
            for p in 0..panels {
                for (x, w) in rule.mapped(p as f64 * h, (p + 1) as f64 * h) {
                    nodes.push(x);
                    weights.push(w);
                }
            }
            let n = nodes.len();
            let cached = cache.and_then(|c| c.load("sine-table", &key)).filter(|t| t.len() == cutoff * n);
            let table = match cached {
                Some(t) => t,
                None => {
                    let mut t = vec![0.0; cutoff * n];
                    for k in 0..cutoff {
                        for (i, &x) in nodes.iter().enumerate() {
                            t[k * n + i] = sine_mode(len, k + 1, x);
                        }
                    }
                    if let Some(c) = cache {
                        c.store("sine-table", &key, &t)?;
                    }
                    t
                }
            };
            axes.push(AxisGrid { nodes, weights, table });
        }

        let dim = domain.dim();
        let total = cutoff.pow(dim as u32);
        let mut lex: Vec<Vec<usize>> = Vec::with_capacity(total);
        for flat in 0..total {
            let mut idx = vec![0; dim];
            let mut r = flat;
            for a in (0..dim).rev() {
                idx[a] = r % cutoff + 1;
                r /= cutoff;
            }
            lex.push(idx);
        }
        let eig = |m: &Vec<usize>| -> f64 {
            m.iter()
                .zip(&domain.lengths)
                .map(|(k, l)| (*k as f64 * PI / l).powi(2))
                .sum()
        };
        let mut order: Vec<usize> = (0..total).collect();
        // stable sort keeps lexicographic order among equal eigenvalues
        order.sort_by(|a, b| eig(&lex[*a]).total_cmp(&eig(&lex[*b])));
        let mut lex_to_mode = vec![0; total];
        for (pos, &l) in order.iter().enumerate() {
            lex_to_mode[l] = pos;
        }
        let modes: Vec<Vec<usize>> = order.iter().map(|&l| lex[l].clone()).collect();
        let eigenvalues = modes.iter().map(eig).collect();
        Ok(SpectralBasis {
            domain: domain.clone(),
            cutoff,
            grid_resolution,
            modes,
            eigenvalues,
            axes,
            lex_to_mode,
        })
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn grid_shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.nodes.len()).collect()
    }

    pub fn grid_len(&self) -> usize {
        self.grid_shape().iter().product()
    }

    /// Grid points in row-major order (first axis slowest).
    pub fn grid_points(&self) -> Vec<Vec<f64>> {
        let shape = self.grid_shape();
        (0..self.grid_len())
            .map(|flat| {
                let idx = unflatten(flat, &shape);
                idx.iter().enumerate().map(|(a, &i)| self.axes[a].nodes[i]).collect()
            })
            .collect()
    }

    pub fn grid_weights(&self) -> Vec<f64> {
        let shape = self.grid_shape();
        (0..self.grid_len())
            .map(|flat| {
                let idx = unflatten(flat, &shape);
                idx.iter().enumerate().map(|(a, &i)| self.axes[a].weights[i]).product()
            })
            .collect()
    }

    pub fn sample<F: Fn(&[f64]) -> f64>(&self, f: F) -> Vec<f64> {
        self.grid_points().iter().map(|x| f(x)).collect()
    }

    pub fn to_coeffs(&self, grid_fn: &[f64]) -> Result<CoeffVector> {
        if grid_fn.len() != self.grid_len() {
            return Err(Error::Usage(format!(
                "grid function has {} samples, basis grid has {}",
                grid_fn.len(),
                self.grid_len()
            )));
        }
        let mut data = grid_fn.to_vec();
        let mut shape = self.grid_shape();
        for (a, ax) in self.axes.iter().enumerate() {
            let n = ax.nodes.len();
            data = contract_axis(&data, &shape, a, self.cutoff, |k, i| ax.weights[i] * ax.table[k * n + i]);
            shape[a] = self.cutoff;
        }
        let mut out = vec![0.0; self.len()];
        for (l, v) in data.into_iter().enumerate() {
            out[self.lex_to_mode[l]] = v;
        }
        Ok(CoeffVector { values: out })
    }

    pub fn from_coeffs(&self, v: &CoeffVector) -> Result<Vec<f64>> {
        self.check(v)?;
        let mut data = vec![0.0; self.len()];
        for (l, slot) in data.iter_mut().enumerate() {
            *slot = v.values[self.lex_to_mode[l]];
        }
        let mut shape = vec![self.cutoff; self.domain.dim()];
        for (a, ax) in self.axes.iter().enumerate() {
            let n = ax.nodes.len();
            data = contract_axis(&data, &shape, a, n, |i, k| ax.table[k * n + i]);
            shape[a] = n;
        }
        Ok(data)
    }

    /// Evaluates the expansion at an arbitrary point.
    pub fn evaluate(&self, v: &CoeffVector, x: &[f64]) -> Result<f64> {
        self.check(v)?;
        Ok(self
            .modes
            .iter()
            .zip(&v.values)
            .map(|(m, c)| c * self.mode_value(m, x))
            .sum())
    }

    pub fn mode_value(&self, mode: &[usize], x: &[f64]) -> f64 {
        mode.iter()
            .zip(x)
            .zip(&self.domain.lengths)
            .map(|((k, xi), l)| sine_mode(*l, *k, *xi))
            .product()
    }

    fn check(&self, v: &CoeffVector) -> Result<()> {
        if v.values.len() != self.len() {
            return Err(Error::Usage(format!(
                "coefficient vector has {} entries, basis has {}",
                v.values.len(),
                self.len()
            )));
        }
        Ok(())
    }

    fn multiplier(&self, v: &CoeffVector, s: f64, sign: f64) -> Result<CoeffVector> {
        self.check(v)?;
        check_order(s)?;
        Ok(CoeffVector {
            values: v
                .values
                .iter()
                .zip(&self.eigenvalues)
                .map(|(c, l)| c * l.powf(sign * s))
                .collect(),
        })
    }

    pub fn fractional_apply(&self, v: &CoeffVector, s: f64) -> Result<CoeffVector> {
        self.multiplier(v, s, 1.0)
    }

    pub fn fractional_solve(&self, g: &CoeffVector, s: f64) -> Result<CoeffVector> {
        self.multiplier(g, s, -1.0)
    }

    pub fn hs_inner(&self, u: &CoeffVector, v: &CoeffVector, s: f64) -> Result<f64> {
        self.check(u)?;
        self.check(v)?;
        check_order(s)?;
        Ok(u.values
            .iter()
            .zip(&v.values)
            .zip(&self.eigenvalues)
            .map(|((a, b), l)| a * b * l.powf(s))
            .sum())
    }

    /// Dual (H^{-s}) norm of a coefficient vector.
    pub fn dual_norm(&self, g: &CoeffVector, s: f64) -> Result<f64> {
        let z = self.fractional_solve(g, s)?;
        Ok(g.values.iter().zip(&z.values).map(|(a, b)| a * b).sum::<f64>().sqrt())
    }
}

fn check_order(s: f64) -> Result<()> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::Usage(format!("fractional order {s} outside (0, 1]")));
    }
    Ok(())
}

fn unflatten(mut flat: usize, shape: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; shape.len()];
    for a in (0..shape.len()).rev() {
        idx[a] = flat % shape[a];
        flat /= shape[a];
    }
    idx
}

/// Contracts axis `axis` of a row-major tensor with a matrix given by
/// `m(new_index, old_index)`, producing `new_len` entries along that axis.
fn contract_axis<F: Fn(usize, usize) -> f64>(
    data: &[f64],
    shape: &[usize],
    axis: usize,
    new_len: usize,
    m: F,
) -> Vec<f64> {
    let pre: usize = shape[..axis].iter().product();
    let old = shape[axis];
    let post: usize = shape[axis + 1..].iter().product();
    let mut out = vec![0.0; pre * new_len * post];
    for a in 0..pre {
        for k in 0..new_len {
            let dst = &mut out[(a * new_len + k) * post..(a * new_len + k + 1) * post];
            for i in 0..old {
                let c = m(k, i);
                let src = &data[(a * old + i) * post..(a * old + i + 1) * post];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += c * s;
                }
            }
        }
    }
    out
}

/// Truncated eigen-series Σ φ_k(x) φ_k(y) λ_k^{-s} over |k|∞ ≤ cutoff.
/// Valid for any s in (0, 1]; used as the s = 1 limit oracle.
pub fn kernel_series(domain: &BoxDomain, s: f64, cutoff: usize, x: &[f64], y: &[f64]) -> f64 {
    let dim = domain.dim();
    let total = cutoff.pow(dim as u32);
    let mut sum = 0.0;
    for flat in 0..total {
        let idx = unflatten(flat, &vec![cutoff; dim]);
        let mut prod = 1.0;
        let mut lam = 0.0;
        for a in 0..dim {
            let k = idx[a] + 1;
            let l = domain.lengths[a];
            prod *= sine_mode(l, k, x[a]) * sine_mode(l, k, y[a]);
            lam += (k as f64 * PI / l).powi(2);
        }
        sum += prod * lam.powf(-s);
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_eigenvalues() {
        let b = SpectralBasis::build(&BoxDomain::unit(1), 3, 8).unwrap();
        for (k, l) in b.eigenvalues.iter().enumerate() {
            let expect = ((k + 1) as f64 * PI).powi(2);
            assert!((l - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn square_first_eigenvalue() {
        let b = SpectralBasis::build(&BoxDomain::unit(2), 4, 8).unwrap();
        assert_eq!(b.modes[0], vec![1, 1]);
        assert!((b.eigenvalues[0] - 2.0 * PI * PI).abs() < 1e-12);
        assert!(b.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        // equal eigenvalues keep lexicographic order
        assert_eq!(b.modes[1], vec![1, 2]);
        assert_eq!(b.modes[2], vec![2, 1]);
    }

    #[test]
    fn under_resolved_grid_rejected() {
        assert!(matches!(
            SpectralBasis::build(&BoxDomain::unit(1), 8, 3),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn mode_samples_map_to_unit_vectors() {
        let b = SpectralBasis::build(&BoxDomain::unit(1), 16, 8).unwrap();
        let f = b.sample(|x| sine_mode(1.0, 2, x[0]));
        let c = b.to_coeffs(&f).unwrap();
        for (i, v) in c.values.iter().enumerate() {
            let e = if i == 1 { 1.0 } else { 0.0 };
            assert!((v - e).abs() < 1e-12);
        }
    }

    #[test]
    fn shape_mismatch_is_usage_error() {
        let b = SpectralBasis::build(&BoxDomain::unit(1), 4, 8).unwrap();
        assert!(matches!(b.to_coeffs(&[1.0; 3]), Err(Error::Usage(_))));
    }

    #[test]
    fn classical_green_limit() {
        // s = 1 on (0,1): G(0.3, 0.7) = 0.3 · 0.3
        let g = kernel_series(&BoxDomain::unit(1), 1.0, 4096, &[0.3], &[0.7]);
        assert!((g - 0.09).abs() < 1e-4, "{g}");
    }
}
