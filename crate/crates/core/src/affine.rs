//! Mixed affine/interval forms for tight residual enclosures.
//!
//! A form is `c₀ + Σ cᵢ εᵢ ± err` over one noise symbol `εᵢ ∈ [−1, 1]`
//! per input axis, with all non-affine and rounding contributions
//! collapsed into the scalar `err`. Evaluating `f(x) − N(x)` on forms
//! that share the input symbols cancels the common linear part exactly,
//! which plain interval subtraction cannot do; enclosure widths then
//! shrink quadratically with the box width wherever the expression is
//! smooth, instead of linearly.
//!
//! Nonlinear unary primitives are replaced by their secant line plus a
//! sound deviation radius: `w²·sup|g″|/8` where a second-derivative
//! bound is available on the interval, otherwise the interval-arithmetic
//! enclosure of `g − secant`. Both are sound; the minimum is used.
//! ReLU straddling zero uses the convex-hull secant relaxation.
//!
//! Outward rounding follows the same slack policy as [`crate::interval`].

use alloc::vec;
use alloc::vec::Vec;

use crate::expr::{Exponent, Expr};
use crate::interval::{DomainError, Interval, IntervalBox, ABS_SLACK, REL_SLACK, SQRT_CLAMP};
use crate::math;
use crate::net::NeuralNet;

#[derive(Debug, Clone)]
pub(crate) struct AffineForm {
    center: f64,
    coeffs: Vec<f64>,
    err: f64,
}

impl AffineForm {
    fn constant(c: f64, dim: usize) -> Self {
        Self {
            center: c,
            coeffs: vec![0.0; dim],
            err: 0.0,
        }
    }

    /// Input symbol for axis `i` spanning the box interval.
    fn input(bx: &IntervalBox, i: usize) -> Self {
        let iv = bx.axis(i);
        let mut coeffs = vec![0.0; bx.dim()];
        coeffs[i] = iv.radius();
        Self {
            center: iv.midpoint(),
            coeffs,
            err: 0.0,
        }
    }

    fn lin_radius(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).sum()
    }

    fn radius(&self) -> f64 {
        self.lin_radius() + self.err
    }

    pub(crate) fn range(&self) -> Interval {
        let r = self.radius();
        Interval::new(self.center - r, self.center + r)
    }

    fn round_slack(&mut self) {
        self.err += (self.center.abs() + self.radius()) * REL_SLACK + ABS_SLACK;
    }

    fn neg(&self) -> Self {
        Self {
            center: -self.center,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            err: self.err,
        }
    }

    fn add(&self, o: &Self) -> Self {
        let mut out = Self {
            center: self.center + o.center,
            coeffs: self
                .coeffs
                .iter()
                .zip(&o.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
            err: self.err + o.err,
        };
        out.round_slack();
        out
    }

    fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    #[allow(dead_code)]
    fn add_scalar(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.center += s;
        out.round_slack();
        out
    }

    fn scale(&self, s: f64) -> Self {
        let mut out = Self {
            center: s * self.center,
            coeffs: self.coeffs.iter().map(|c| s * c).collect(),
            err: s.abs() * self.err,
        };
        out.round_slack();
        out
    }

    fn mul(&self, o: &Self) -> Self {
        let (ra, rb) = (self.lin_radius() + self.err, o.lin_radius() + o.err);
        let mut out = Self {
            center: self.center * o.center,
            coeffs: self
                .coeffs
                .iter()
                .zip(&o.coeffs)
                .map(|(a, b)| self.center * b + o.center * a)
                .collect(),
            err: self.center.abs() * o.err + o.center.abs() * self.err + ra * rb,
        };
        out.round_slack();
        out
    }

    /// Replace by `α·self + ζ ± d` (sound linearisation of a unary map).
    fn linearized(&self, alpha: f64, zeta: f64, d: f64) -> Self {
        let mut out = Self {
            center: alpha * self.center + zeta,
            coeffs: self.coeffs.iter().map(|c| alpha * c).collect(),
            err: alpha.abs() * self.err + d,
        };
        out.round_slack();
        out
    }
}

/// Secant linearisation of `g` over the form's range. `curvature` is a
/// sound bound on `sup |g″|` over that range (infinite to disable), and
/// `enclose` the sound interval version of `g` used as fallback.
fn unary(
    x: &AffineForm,
    g: impl Fn(f64) -> f64,
    curvature: f64,
    enclose: impl Fn(Interval) -> Result<Interval, DomainError>,
) -> Result<AffineForm, DomainError> {
    let iv = x.range();
    let (l, u) = (iv.lo, iv.hi);
    let w = u - l;
    let ivg = enclose(iv)?;
    if w <= 0.0 {
        return Ok(AffineForm {
            center: ivg.midpoint(),
            coeffs: vec![0.0; x.coeffs.len()],
            err: ivg.radius(),
        });
    }
    let (gl, gu) = (g(l), g(u));
    let alpha = (gu - gl) / w;
    // Deviation of g from the secant: curvature bound when finite, else
    // the interval enclosure of g minus the secant's range.
    let d_curv = 0.125 * w * w * curvature;
    let secant_at = |v: f64| gl + alpha * (v - l);
    let sec_range = Interval::new(secant_at(l).min(secant_at(u)), secant_at(l).max(secant_at(u)));
    let d_fallback = ivg.sub(sec_range).abs_max();
    let d = d_curv.min(d_fallback);
    // ζ places the line exactly on the secant; d is measured against it.
    let zeta = gl - alpha * l;
    Ok(x.linearized(alpha, zeta, d))
}

fn pow_int_form(x: &AffineForm, n: i32) -> Result<AffineForm, DomainError> {
    if n == 0 {
        return Ok(AffineForm::constant(1.0, x.coeffs.len()));
    }
    if n < 0 {
        let denom = pow_int_form(x, -n)?;
        return recip(&denom);
    }
    // Binary exponentiation over AA multiplication.
    let mut acc: Option<AffineForm> = None;
    let mut base = x.clone();
    let mut k = n as u32;
    loop {
        if k & 1 == 1 {
            acc = Some(match acc {
                None => base.clone(),
                Some(a) => a.mul(&base),
            });
        }
        k >>= 1;
        if k == 0 {
            break;
        }
        base = base.mul(&base);
    }
    Ok(acc.expect("n > 0"))
}

fn recip(x: &AffineForm) -> Result<AffineForm, DomainError> {
    let iv = x.range();
    if iv.lo <= 0.0 && 0.0 <= iv.hi {
        return Err(DomainError::new("division by an interval containing zero"));
    }
    let bound = iv.abs_min();
    let curvature = 2.0 / (bound * bound * bound).abs();
    unary(x, |v| 1.0 / v, curvature, |i| {
        Interval::point(1.0).div(i)
    })
}

fn pow_ratio_form(x: &AffineForm, p: i32, q: u32) -> Result<AffineForm, DomainError> {
    if p == 0 {
        return Ok(AffineForm::constant(1.0, x.coeffs.len()));
    }
    if p < 0 {
        let denom = pow_ratio_form(x, -p, q)?;
        return recip(&denom);
    }
    let e = f64::from(p) / f64::from(q);
    let iv = x.range();
    let g = move |v: f64| {
        let m = math::powf(v.abs(), e);
        if p % 2 == 0 || v >= 0.0 {
            m
        } else {
            -m
        }
    };
    // |g″| = e(e−1)|x|^{e−2} (up to sign pattern), singular at 0.
    let curvature = if iv.lo <= 0.0 && 0.0 <= iv.hi {
        f64::INFINITY
    } else {
        let m = iv.abs_min();
        (e * (e - 1.0)).abs() * math::powf(m, e - 2.0)
    };
    unary(x, g, curvature, |i| i.pow_ratio(p, q))
}

fn eval_expr(e: &Expr, inputs: &[AffineForm], dim: usize) -> Result<AffineForm, DomainError> {
    Ok(match e {
        Expr::Const(c) => AffineForm::constant(*c, dim),
        Expr::Var(i) => inputs[*i].clone(),
        Expr::Neg(a) => eval_expr(a, inputs, dim)?.neg(),
        Expr::Add(a, b) => eval_expr(a, inputs, dim)?.add(&eval_expr(b, inputs, dim)?),
        Expr::Sub(a, b) => eval_expr(a, inputs, dim)?.sub(&eval_expr(b, inputs, dim)?),
        Expr::Mul(a, b) => eval_expr(a, inputs, dim)?.mul(&eval_expr(b, inputs, dim)?),
        Expr::Div(a, b) => {
            let num = eval_expr(a, inputs, dim)?;
            let den = eval_expr(b, inputs, dim)?;
            num.mul(&recip(&den)?)
        }
        Expr::Pow(a, Exponent::Int(n)) => pow_int_form(&eval_expr(a, inputs, dim)?, *n)?,
        Expr::Pow(a, Exponent::Ratio { num, den }) => {
            pow_ratio_form(&eval_expr(a, inputs, dim)?, *num, *den)?
        }
        Expr::Sin(a) => {
            let x = eval_expr(a, inputs, dim)?;
            unary(&x, math::sin, 1.0, |i| Ok(i.sin()))?
        }
        Expr::Cos(a) => {
            let x = eval_expr(a, inputs, dim)?;
            unary(&x, math::cos, 1.0, |i| Ok(i.cos()))?
        }
        Expr::Exp(a) => {
            let x = eval_expr(a, inputs, dim)?;
            let curvature = math::exp(x.range().hi);
            unary(&x, math::exp, curvature, |i| Ok(i.exp()))?
        }
        Expr::Sqrt(a) => {
            let x = eval_expr(a, inputs, dim)?;
            let iv = x.range();
            if iv.lo < SQRT_CLAMP {
                return Err(DomainError::new("sqrt of a negative interval"));
            }
            let curvature = if iv.lo <= 0.0 {
                f64::INFINITY
            } else {
                0.25 / (iv.lo * math::sqrt(iv.lo))
            };
            unary(
                &x,
                |v| math::sqrt(v.max(0.0)),
                curvature,
                |i| i.sqrt(),
            )?
        }
        Expr::Cbrt(a) => {
            let x = eval_expr(a, inputs, dim)?;
            let iv = x.range();
            let curvature = if iv.lo <= 0.0 && 0.0 <= iv.hi {
                f64::INFINITY
            } else {
                let m = iv.abs_min();
                (2.0 / 9.0) * math::powf(m, -5.0 / 3.0)
            };
            unary(&x, math::cbrt, curvature, |i| Ok(i.cbrt()))?
        }
    })
}

fn net_forward(net: &NeuralNet, inputs: &[AffineForm], dim: usize) -> Vec<AffineForm> {
    let mut layer: Vec<AffineForm> = inputs.to_vec();
    let last = net.weights().len() - 1;
    for (li, (w, b)) in net.weights().iter().zip(net.biases()).enumerate() {
        let mut next = Vec::with_capacity(w.nrows());
        for row in 0..w.nrows() {
            let mut acc = AffineForm::constant(b[row], dim);
            for (col, x) in layer.iter().enumerate() {
                let coeff = w[(row, col)];
                if coeff != 0.0 {
                    acc = acc.add(&x.scale(coeff));
                }
            }
            if li < last {
                acc = relu_form(&acc);
            }
            next.push(acc);
        }
        layer = next;
    }
    layer
}

/// ReLU relaxation: identity or zero when the sign is fixed, otherwise
/// the convex-hull secant `α(x − l)` with symmetric deviation
/// `|l|·u / (2(u − l))`.
fn relu_form(x: &AffineForm) -> AffineForm {
    let iv = x.range();
    let (l, u) = (iv.lo, iv.hi);
    if l >= 0.0 {
        return x.clone();
    }
    if u <= 0.0 {
        return AffineForm::constant(0.0, x.coeffs.len());
    }
    let alpha = u / (u - l);
    let d = 0.5 * alpha * (-l);
    // Line α·x − α·l overshoots relu by at most α·(−l); recentre so the
    // deviation is symmetric: α·x + α·(−l)/2 ± α·(−l)/2.
    x.linearized(alpha, 0.5 * alpha * (-l), d)
}

/// Sound per-component enclosure of `f(x) − N(x)` over the box, with the
/// linear parts of `f` and `N` cancelled against each other.
pub(crate) fn residual_enclosure(
    flow: &[Expr],
    net: &NeuralNet,
    bx: &IntervalBox,
) -> Result<Vec<Interval>, DomainError> {
    let dim = bx.dim();
    let inputs: Vec<AffineForm> = (0..dim).map(|i| AffineForm::input(bx, i)).collect();
    let net_out = net_forward(net, &inputs, dim);
    let mut out = Vec::with_capacity(flow.len());
    for (e, n) in flow.iter().zip(&net_out) {
        let f = eval_expr(e, &inputs, dim)?;
        out.push(f.sub(n).range());
    }
    Ok(out)
}

/// Sound per-component enclosure of `f(x) − (Ax + b)` over the box.
pub(crate) fn residual_affine_enclosure(
    flow: &[Expr],
    a: &nalgebra::DMatrix<f64>,
    b: &nalgebra::DVector<f64>,
    bx: &IntervalBox,
) -> Result<Vec<Interval>, DomainError> {
    let dim = bx.dim();
    let inputs: Vec<AffineForm> = (0..dim).map(|i| AffineForm::input(bx, i)).collect();
    let mut out = Vec::with_capacity(flow.len());
    for (row, e) in flow.iter().enumerate() {
        let mut lin = AffineForm::constant(b[row], dim);
        for (col, x) in inputs.iter().enumerate() {
            let coeff = a[(row, col)];
            if coeff != 0.0 {
                lin = lin.add(&x.scale(coeff));
            }
        }
        let f = eval_expr(e, &inputs, dim)?;
        out.push(f.sub(&lin).range());
    }
    Ok(out)
}
