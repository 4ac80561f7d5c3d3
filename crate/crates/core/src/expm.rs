//! Matrix exponential and its first integral.
//!
//! Scaling-and-squaring over a truncated Taylor series, targeting
//! relative 1e−12. Floating-point rigor is not claimed here; the
//! flowpipe recurrence adds a configurable safety inflation on top.

use nalgebra::DMatrix;

/// `(e^{At}, Φ₁(A,t))` with `Φ₁(A,t) = ∫₀ᵗ e^{As} ds`.
///
/// `Φ₁` maps a constant input to its exact contribution over one step:
/// `x(t) = e^{At} x₀ + Φ₁(A,t) u`.
pub fn exp_and_phi(a: &DMatrix<f64>, t: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    let norm = a.iter().map(|v| v.abs()).fold(0.0, f64::max) * (n as f64) * t.abs();
    let doublings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let tau = t / f64::from(1u32 << doublings.min(63));

    // Taylor at step tau: E = Σ (Aτ)^i / i!, Φ = τ·Σ (Aτ)^i / (i+1)!.
    let at = a * tau;
    let mut term = DMatrix::<f64>::identity(n, n);
    let mut e = DMatrix::<f64>::identity(n, n);
    let mut phi = DMatrix::<f64>::identity(n, n) * tau;
    for i in 1..=40 {
        term = (&term * &at) / (i as f64);
        e += &term;
        phi += &term * (tau / (i as f64 + 1.0));
        let tn = term.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let en = e.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if tn <= 1e-16 * en {
            break;
        }
    }

    // Doubling: E(2τ) = E(τ)², Φ(2τ) = (I + E(τ))·Φ(τ).
    for _ in 0..doublings {
        phi = (&e + DMatrix::<f64>::identity(n, n)) * &phi;
        e = &e * &e;
    }
    (e, phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn matches_scalar_exponential() {
        for lam in [-3.0, -1.0, 0.0, 0.5, 2.0] {
            let a = DMatrix::from_row_slice(1, 1, &[lam]);
            let (e, phi) = exp_and_phi(&a, 0.7);
            assert_relative_eq!(e[(0, 0)], (lam * 0.7f64).exp(), max_relative = 1e-12);
            let expect_phi = if lam == 0.0 {
                0.7
            } else {
                ((lam * 0.7f64).exp() - 1.0) / lam
            };
            assert_relative_eq!(phi[(0, 0)], expect_phi, max_relative = 1e-11);
        }
    }

    #[test]
    fn rotation_block() {
        // A = [[0, -w], [w, 0]]: e^{At} is a rotation by wt.
        let w = 2.0;
        let a = DMatrix::from_row_slice(2, 2, &[0.0, -w, w, 0.0]);
        let t = 0.9;
        let (e, _) = exp_and_phi(&a, t);
        let (c, s) = ((w * t).cos(), (w * t).sin());
        assert_relative_eq!(e[(0, 0)], c, epsilon = 1e-12);
        assert_relative_eq!(e[(0, 1)], -s, epsilon = 1e-12);
        assert_relative_eq!(e[(1, 0)], s, epsilon = 1e-12);
        assert_relative_eq!(e[(1, 1)], c, epsilon = 1e-12);
    }

    #[test]
    fn phi_against_quadrature() {
        // Φ₁ column-wise equals ∫ e^{As} ds; cross-check with Simpson.
        let a = DMatrix::from_row_slice(2, 2, &[0.3, -1.2, 0.7, -0.4]);
        let t = 0.5;
        let (_, phi) = exp_and_phi(&a, t);
        let steps = 2000;
        let mut acc = DMatrix::<f64>::zeros(2, 2);
        for k in 0..=steps {
            let s = t * k as f64 / steps as f64;
            let (es, _) = exp_and_phi(&a, s);
            let w = if k == 0 || k == steps {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc += es * w;
        }
        acc *= t / (3.0 * steps as f64);
        for i in 0..2 {
            for j in 0..2 {
                assert_relative_eq!(phi[(i, j)], acc[(i, j)], epsilon = 1e-8);
            }
        }
    }
}
