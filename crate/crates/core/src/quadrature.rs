//! Gauss rules and adaptive integration.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};
use std::collections::BinaryHeap;

/// Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn legendre(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussRule { nodes, weights }
    }

    /// Gauss–Jacobi rule for the weight (1 − x)^alpha (1 + x)^beta on [-1, 1],
    /// built from the three-term recurrence (Golub–Welsch).
    pub fn jacobi(n: usize, alpha: f64, beta: f64) -> Self {
        assert!(n >= 1 && alpha > -1.0 && beta > -1.0);
        let ab = alpha + beta;
        let mut jm = DMatrix::<f64>::zeros(n, n);
        for k in 0..n {
            let kf = k as f64;
            let diag = if k == 0 {
                (beta - alpha) / (ab + 2.0)
            } else {
                (beta * beta - alpha * alpha) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
            };
            jm[(k, k)] = diag;
            if k + 1 < n {
                let j = kf + 1.0;
                let t = 2.0 * j + ab;
                let off = (4.0 * j * (j + alpha) * (j + beta) * (j + ab)
                    / (t * t * (t + 1.0) * (t - 1.0)))
                    .sqrt();
                jm[(k, k + 1)] = off;
                jm[(k + 1, k)] = off;
            }
        }
        let mu0 = 2f64.powf(ab + 1.0)
            * (crate::special::ln_gamma(alpha + 1.0) + crate::special::ln_gamma(beta + 1.0)
                - crate::special::ln_gamma(ab + 2.0))
            .exp();
        let eig = SymmetricEigen::new(jm);
        let mut pairs: Vec<(f64, f64)> = (0..n)
            .map(|i| (eig.eigenvalues[i], mu0 * eig.eigenvectors[(0, i)].powi(2)))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        GaussRule {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped affinely to [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let h = 0.5 * (b - a);
        let c = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (c + h * x, h * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Barycentric Lagrange interpolation on fixed nodes.
#[derive(Debug, Clone)]
pub struct Barycentric {
    nodes: Vec<f64>,
    bw: Vec<f64>,
}

impl Barycentric {
    pub fn new(nodes: &[f64]) -> Self {
        let n = nodes.len();
        let mut bw = vec![1.0; n];
        for j in 0..n {
            for k in 0..n {
                if k != j {
                    bw[j] /= nodes[j] - nodes[k];
                }
            }
        }
        Barycentric { nodes: nodes.to_vec(), bw }
    }

    /// Values of all Lagrange basis polynomials at x.
    pub fn basis(&self, x: f64, out: &mut [f64]) {
        let n = self.nodes.len();
        for j in 0..n {
            if x == self.nodes[j] {
                out.iter_mut().for_each(|v| *v = 0.0);
                out[j] = 1.0;
                return;
            }
        }
        let mut ell = 1.0;
        for j in 0..n {
            ell *= x - self.nodes[j];
        }
        for j in 0..n {
            out[j] = ell * self.bw[j] / (x - self.nodes[j]);
        }
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Quad {
    pub value: f64,
    pub error: f64,
    pub evals: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&o.error)
    }
}

/// Globally adaptive Gauss–Legendre integration. Each panel is integrated
/// with an `order`-point and a `2·order`-point rule; the difference is the
/// panel's error estimate and the finer value is kept.
#[derive(Debug, Clone)]
pub struct AdaptiveGauss {
    coarse: GaussRule,
    fine: GaussRule,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl AdaptiveGauss {
    pub fn new(order: usize, rel_tol: f64, abs_tol: f64) -> Self {
        AdaptiveGauss {
            coarse: GaussRule::legendre(order),
            fine: GaussRule::legendre(2 * order),
            rel_tol,
            abs_tol,
            max_panels: 4000,
        }
    }

    fn panel<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, f: &mut F) -> Panel {
        let c = self.coarse.integrate(a, b, &mut *f);
        let v = self.fine.integrate(a, b, &mut *f);
        Panel { a, b, value: v, error: (v - c).abs() }
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> Result<Quad> {
        self.integrate_breaks(&[a, b], &mut f)
    }

    /// Integrates over consecutive intervals of `breaks` as one adaptive problem.
    pub fn integrate_breaks<F: FnMut(f64) -> f64>(&self, breaks: &[f64], mut f: F) -> Result<Quad> {
        let per = self.coarse.len() + self.fine.len();
        let mut heap = BinaryHeap::new();
        for w in breaks.windows(2) {
            heap.push(self.panel(w[0], w[1], &mut f));
        }
        let mut evals = per * heap.len();
        loop {
            let total: f64 = heap.iter().map(|p| p.value).sum();
            let err: f64 = heap.iter().map(|p| p.error).sum();
            if err <= self.abs_tol.max(self.rel_tol * total.abs()) {
                return Ok(Quad { value: total, error: err, evals });
            }
            if heap.len() >= self.max_panels {
                return Err(Error::Numeric(format!(
                    "adaptive quadrature did not converge: value {total:e}, error estimate {err:e} after {evals} evaluations"
                )));
            }
            let worst = heap.pop().expect("non-empty panel heap");
            let m = 0.5 * (worst.a + worst.b);
            if m <= worst.a || m >= worst.b {
                // cannot split further in floating point; accept as is
                heap.push(Panel { error: 0.0, ..worst });
                continue;
            }
            heap.push(self.panel(worst.a, m, &mut f));
            heap.push(self.panel(m, worst.b, &mut f));
            evals += 2 * per;
        }
    }
}
