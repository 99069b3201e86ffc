//! Special functions: Gamma (via statrs), Hurwitz zeta, incomplete gamma.

use num_complex::Complex64;

pub use statrs::function::gamma::{gamma, ln_gamma};

/// Regularized upper incomplete gamma Q(a, x).
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    statrs::function::gamma::gamma_ur(a, x)
}

/// Regularized lower incomplete gamma P(a, x).
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    statrs::function::gamma::gamma_lr(a, x)
}

// B_2, B_4, ..., B_16
const BERNOULLI_EVEN: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

/// Hurwitz zeta ζ(q, a) = Σ_{n≥0} (n + a)^{-q} for a > 0 and q ≠ 1,
/// analytically continued to q < 1 through Euler–Maclaurin summation.
pub fn hurwitz_zeta(q: f64, a: f64) -> f64 {
    debug_assert!(a > 0.0 && (q - 1.0).abs() > 1e-12);
    let shift = if a >= 12.0 { 0 } else { (12.0 - a).ceil() as usize };
    let mut head = 0.0;
    for n in 0..shift {
        head += (n as f64 + a).powf(-q);
    }
    let b = shift as f64 + a;
    let mut tail = b.powf(1.0 - q) / (q - 1.0) + 0.5 * b.powf(-q);
    // rising factorial (q)_{2j-1} and b^{-q-2j+1}, updated incrementally
    let mut rising = q;
    let mut power = b.powf(-q - 1.0);
    let mut fact = 2.0;
    for (j, bern) in BERNOULLI_EVEN.iter().enumerate() {
        let term = bern / fact * rising * power;
        tail += term;
        let m = 2.0 * (j as f64 + 1.0);
        rising *= (q + m - 1.0) * (q + m);
        power /= b * b;
        fact *= (m + 1.0) * (m + 2.0);
    }
    head + tail
}

/// Upper incomplete gamma Γ(b, z) for real b and complex z with Re z ≥ 0, z ≠ 0.
pub fn upper_gamma_complex(b: f64, z: Complex64) -> Complex64 {
    if z.norm() < 2.5 {
        // Γ(b) − γ(b, z), γ(b, z) = z^b Σ (−z)^n / (n! (b + n))
        let mut sum = Complex64::new(0.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0);
        for n in 0..200 {
            let add = term / (b + n as f64);
            sum += add;
            if add.norm() < 1e-17 * sum.norm() {
                break;
            }
            term *= -z / (n as f64 + 1.0);
        }
        Complex64::new(gamma(b), 0.0) - z.powf(b) * sum
    } else {
        // modified Lentz evaluation of the Legendre continued fraction
        let tiny = 1e-300;
        let mut bb = z + 1.0 - b;
        let mut c = Complex64::new(1.0 / tiny, 0.0);
        let mut d = 1.0 / bb;
        let mut h = d;
        for i in 1..2000 {
            let an = -(i as f64) * (i as f64 - b);
            bb += 2.0;
            d = an * d + bb;
            if d.norm() < tiny {
                d = Complex64::new(tiny, 0.0);
            }
            c = bb + an / c;
            if c.norm() < tiny {
                c = Complex64::new(tiny, 0.0);
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).norm() < 1e-16 {
                break;
            }
        }
        (-z).exp() * z.powf(b) * h
    }
}
