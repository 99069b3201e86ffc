//! Regular part on an interval by the method of images, with z-derivatives.

use crate::bubble::FracDims;
use crate::special::hurwitz_zeta;

/// H(x, z) on (0, L) written as four Hurwitz zeta terms in z.
#[derive(Debug, Clone, Copy)]
pub struct ImageKernel {
    pub length: f64,
    prefactor: f64,
    decay: f64,
}

impl ImageKernel {
    pub fn new(dims: &FracDims, length: f64) -> Self {
        assert_eq!(dims.dim, 1, "image kernel is one-dimensional");
        let q = dims.decay;
        ImageKernel { length, prefactor: dims.riesz_const * (2.0 * length).powf(-q), decay: q }
    }

    /// (sign, α, β) with the k-th term sign·ζ(q, α + βz).
    fn terms(&self, x: f64) -> [(f64, f64, f64); 4] {
        let t = 2.0 * self.length;
        [
            (1.0, x / t, 1.0 / t),
            (1.0, 1.0 - x / t, -1.0 / t),
            (-1.0, 1.0 + x / t, -1.0 / t),
            (-1.0, 1.0 - x / t, 1.0 / t),
        ]
    }

    pub fn h(&self, x: f64, z: f64) -> f64 {
        let q = self.decay;
        let mut sum = 0.0;
        for (sg, a, b) in self.terms(x) {
            sum += sg * hurwitz_zeta(q, a + b * z);
        }
        self.prefactor * sum
    }

    /// Taylor coefficients of z ↦ H(x, z) at z = center, orders 0..=order.
    pub fn taylor(&self, x: f64, center: f64, order: usize) -> Vec<f64> {
        let q = self.decay;
        let terms = self.terms(x);
        let mut out = Vec::with_capacity(order + 1);
        // (q)_k / k!
        let mut ratio = 1.0;
        for k in 0..=order {
            if k > 0 {
                ratio *= (q + k as f64 - 1.0) / k as f64;
            }
            let mut sum = 0.0;
            for (sg, a, b) in terms {
                sum += sg * (-b).powi(k as i32) * hurwitz_zeta(q + k as f64, a + b * center);
            }
            out.push(self.prefactor * ratio * sum);
        }
        out
    }
}
