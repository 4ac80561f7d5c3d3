//! Sound interval arithmetic over `f64`.
//!
//! Every primitive operation returns an enclosure of the exact real
//! result and then widens it outward by a 1-ulp-scale slack
//! ([`REL_SLACK`] relative, [`ABS_SLACK`] absolute floor) instead of
//! switching the FPU rounding mode. The slack constants are public so
//! downstream tests can assert the exact policy.
//!
//! Non-Lipschitz primitives get dedicated treatment: `sqrt` tolerates a
//! tiny negative lower endpoint (floating noise on domains touching
//! zero, see [`SQRT_CLAMP`]), and rational powers `x^{p/q}` with odd `q`
//! are evaluated through the magnitude of `x` so that enclosures of
//! `∛(x²)` stay tight around the non-Lipschitz point at the origin.

use alloc::string::String;
use alloc::vec::Vec;

use crate::math;

/// Relative outward-widening slack applied to every primitive result.
pub const REL_SLACK: f64 = 1e-14;
/// Absolute floor of the outward-widening slack.
pub const ABS_SLACK: f64 = 1e-300;
/// Lower endpoints of `sqrt` arguments in `[SQRT_CLAMP, 0)` are clamped
/// to zero; anything below raises a domain error.
pub const SQRT_CLAMP: f64 = -1e-12;

/// Evaluation outside a partial function's domain (negative `sqrt`
/// argument, zero divisor, and friends).
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("domain error: {reason}")]
pub struct DomainError {
    pub reason: String,
}

impl DomainError {
    pub fn new(reason: impl Into<String>) -> Self {
        Self {
            reason: reason.into(),
        }
    }
}

#[inline]
fn slack(v: f64) -> f64 {
    (v.abs() * REL_SLACK).max(ABS_SLACK)
}

/// A closed interval `[lo, hi]` with `lo ≤ hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "interval endpoints out of order: [{lo}, {hi}]");
        Self { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    /// Smallest interval containing both operands.
    pub fn hull(self, other: Self) -> Self {
        Self {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    pub fn width(self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn radius(self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    pub fn contains(self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn contains_interval(self, other: Self) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersects(self, other: Self) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn intersect(self, other: Self) -> Option<Self> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Self { lo, hi })
    }

    /// Largest absolute value attained on the interval.
    pub fn abs_max(self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// Smallest absolute value attained on the interval.
    pub fn abs_min(self) -> f64 {
        if self.lo <= 0.0 && 0.0 <= self.hi {
            0.0
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    /// Outward widening by the documented slack.
    #[inline]
    pub fn widen(self) -> Self {
        Self {
            lo: self.lo - slack(self.lo),
            hi: self.hi + slack(self.hi),
        }
    }

    pub fn add(self, o: Self) -> Self {
        Self::new(self.lo + o.lo, self.hi + o.hi).widen()
    }

    pub fn sub(self, o: Self) -> Self {
        Self::new(self.lo - o.hi, self.hi - o.lo).widen()
    }

    pub fn neg(self) -> Self {
        Self::new(-self.hi, -self.lo)
    }

    pub fn mul(self, o: Self) -> Self {
        let p1 = self.lo * o.lo;
        let p2 = self.lo * o.hi;
        let p3 = self.hi * o.lo;
        let p4 = self.hi * o.hi;
        Self::new(p1.min(p2).min(p3).min(p4), p1.max(p2).max(p3).max(p4)).widen()
    }

    pub fn div(self, o: Self) -> Result<Self, DomainError> {
        if o.lo <= 0.0 && 0.0 <= o.hi {
            return Err(DomainError::new("division by an interval containing zero"));
        }
        let p1 = self.lo / o.lo;
        let p2 = self.lo / o.hi;
        let p3 = self.hi / o.lo;
        let p4 = self.hi / o.hi;
        Ok(Self::new(p1.min(p2).min(p3).min(p4), p1.max(p2).max(p3).max(p4)).widen())
    }

    /// Integer power with the even-power tightening: `x²` on `[−1, 1]`
    /// is `[0, 1]`, not the naive product `[−1, 1]`.
    pub fn pow_int(self, n: i32) -> Result<Self, DomainError> {
        if n == 0 {
            return Ok(Self::point(1.0));
        }
        if n < 0 {
            return self.pow_int(-n)?.div_into_one();
        }
        let r = if n % 2 == 0 {
            let m = self.abs_min();
            let mm = self.abs_max();
            let w = Self::new(math::powi(m, n), math::powi(mm, n)).widen();
            Self::new(w.lo.max(0.0), w.hi)
        } else {
            Self::new(math::powi(self.lo, n), math::powi(self.hi, n)).widen()
        };
        Ok(r)
    }

    fn div_into_one(self) -> Result<Self, DomainError> {
        Interval::point(1.0).div(self)
    }

    /// Rational power `x^{p/q}` with odd `q`, evaluated through `|x|` so
    /// the result is exact-monotone on each sign. Covers `∛(x²)` as
    /// `p/q = 2/3` with enclosure `[min|x|^{2/3}, max|x|^{2/3}]`.
    pub fn pow_ratio(self, p: i32, q: u32) -> Result<Self, DomainError> {
        debug_assert!(q % 2 == 1, "rational powers require an odd denominator");
        if p == 0 {
            return Ok(Self::point(1.0));
        }
        if p < 0 {
            return self.pow_ratio(-p, q)?.div_into_one();
        }
        let e = f64::from(p) / f64::from(q);
        let r = if p % 2 == 0 {
            // Even numerator: x^{p/q} = |x|^{p/q}.
            let w = Self::new(math::powf(self.abs_min(), e), math::powf(self.abs_max(), e)).widen();
            Self::new(w.lo.max(0.0), w.hi)
        } else {
            // Odd/odd: sign-preserving and increasing.
            let f = |v: f64| v.signum() * math::powf(v.abs(), e);
            Self::new(f(self.lo), f(self.hi)).widen()
        };
        Ok(r)
    }

    pub fn sqrt(self) -> Result<Self, DomainError> {
        let lo = if self.lo < 0.0 {
            if self.lo >= SQRT_CLAMP {
                0.0
            } else {
                return Err(DomainError::new("sqrt of a negative interval"));
            }
        } else {
            self.lo
        };
        let hi = self.hi.max(lo);
        let r = Self::new(math::sqrt(lo), math::sqrt(hi)).widen();
        Ok(Self::new(r.lo.max(0.0), r.hi))
    }

    pub fn cbrt(self) -> Self {
        Self::new(math::cbrt(self.lo), math::cbrt(self.hi)).widen()
    }

    pub fn exp(self) -> Self {
        let r = Self::new(math::exp(self.lo), math::exp(self.hi)).widen();
        Self::new(r.lo.max(0.0), r.hi)
    }

    /// Enclosure of `sin` by monotone-piece analysis: endpoint values,
    /// snapped to ±1 whenever a critical point lies inside.
    pub fn sin(self) -> Self {
        trig_enclosure(
            self,
            math::sin,
            core::f64::consts::FRAC_PI_2,
            -core::f64::consts::FRAC_PI_2,
        )
    }

    /// Enclosure of `cos`; peaks at `2kπ`, troughs at `π + 2kπ`.
    pub fn cos(self) -> Self {
        trig_enclosure(self, math::cos, 0.0, core::f64::consts::PI)
    }
}

/// Does `phase + 2πk` hit `[lo − m, hi + m]` for some integer `k`?
/// The margin `m` absorbs the inexactness of float π; it can only add
/// candidate extrema, which keeps the enclosure sound.
fn has_critical_point(iv: Interval, phase: f64) -> bool {
    const MARGIN: f64 = 1e-9;
    let two_pi = core::f64::consts::TAU;
    let k = math::ceil((iv.lo - MARGIN - phase) / two_pi);
    phase + k * two_pi <= iv.hi + MARGIN
}

fn trig_enclosure(iv: Interval, f: fn(f64) -> f64, peak_phase: f64, trough_phase: f64) -> Interval {
    if iv.width() >= core::f64::consts::TAU {
        return Interval::new(-1.0, 1.0);
    }
    let (a, b) = (f(iv.lo), f(iv.hi));
    let mut lo = a.min(b);
    let mut hi = a.max(b);
    if has_critical_point(iv, peak_phase) {
        hi = 1.0;
    }
    if has_critical_point(iv, trough_phase) {
        lo = -1.0;
    }
    let r = Interval::new(lo, hi).widen();
    Interval::new(r.lo.max(-1.0), r.hi.min(1.0))
}

/// An axis-aligned box: one interval per state dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalBox {
    axes: Vec<Interval>,
}

impl IntervalBox {
    pub fn new(axes: Vec<Interval>) -> Self {
        Self { axes }
    }

    pub fn from_bounds(bounds: &[(f64, f64)]) -> Self {
        Self {
            axes: bounds.iter().map(|&(lo, hi)| Interval::new(lo, hi)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Interval] {
        &self.axes
    }

    pub fn axis(&self, i: usize) -> Interval {
        self.axes[i]
    }

    pub fn widths(&self) -> Vec<f64> {
        self.axes.iter().map(|a| a.width()).collect()
    }

    pub fn max_width(&self) -> f64 {
        self.axes.iter().map(|a| a.width()).fold(0.0, f64::max)
    }

    pub fn midpoint(&self) -> Vec<f64> {
        self.axes.iter().map(|a| a.midpoint()).collect()
    }

    pub fn volume(&self) -> f64 {
        self.axes.iter().map(|a| a.width()).product()
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.dim()
            && self
                .axes
                .iter()
                .zip(x)
                .all(|(a, &v)| a.lo - tol <= v && v <= a.hi + tol)
    }

    pub fn contains_box(&self, other: &IntervalBox) -> bool {
        self.axes
            .iter()
            .zip(other.axes.iter())
            .all(|(a, b)| a.contains_interval(*b))
    }

    pub fn intersects(&self, other: &IntervalBox) -> bool {
        self.axes
            .iter()
            .zip(other.axes.iter())
            .all(|(a, b)| a.intersects(*b))
    }

    pub fn intersect(&self, other: &IntervalBox) -> Option<IntervalBox> {
        let mut axes = Vec::with_capacity(self.dim());
        for (a, b) in self.axes.iter().zip(other.axes.iter()) {
            axes.push(a.intersect(*b)?);
        }
        Some(IntervalBox::new(axes))
    }

    pub fn hull(&self, other: &IntervalBox) -> IntervalBox {
        IntervalBox::new(
            self.axes
                .iter()
                .zip(other.axes.iter())
                .map(|(a, b)| a.hull(*b))
                .collect(),
        )
    }

    /// Bisect along `axis` at the midpoint; the lower half comes first.
    pub fn split(&self, axis: usize) -> (IntervalBox, IntervalBox) {
        let m = self.axes[axis].midpoint();
        let mut lo = self.clone();
        let mut hi = self.clone();
        lo.axes[axis] = Interval::new(self.axes[axis].lo, m);
        hi.axes[axis] = Interval::new(m, self.axes[axis].hi);
        (lo, hi)
    }

    /// Clamp a point into the box.
    pub fn clamp(&self, x: &mut [f64]) {
        for (a, v) in self.axes.iter().zip(x.iter_mut()) {
            *v = v.max(a.lo).min(a.hi);
        }
    }

    pub fn sample_uniform<R: rand::Rng>(&self, rng: &mut R) -> Vec<f64> {
        self.axes
            .iter()
            .map(|a| {
                if a.width() == 0.0 {
                    a.lo
                } else {
                    rng.random_range(a.lo..=a.hi)
                }
            })
            .collect()
    }

    /// The `2^n` corner points, in lexicographic bit order.
    pub fn corners(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut out = Vec::with_capacity(1 << n);
        for mask in 0..1usize << n {
            out.push(
                (0..n)
                    .map(|i| {
                        if mask >> i & 1 == 1 {
                            self.axes[i].hi
                        } else {
                            self.axes[i].lo
                        }
                    })
                    .collect(),
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn even_power_rule() {
        let x = Interval::new(-1.0, 1.0);
        let r = x.pow_int(2).unwrap();
        assert_eq!(r.lo, 0.0);
        assert!(r.hi >= 1.0 && r.hi <= 1.0 + 1e-13);
    }

    #[test]
    fn odd_power_monotone() {
        let x = Interval::new(-1.0, 2.0);
        let r = x.pow_int(3).unwrap();
        assert!(r.lo <= -1.0 && r.lo >= -1.0 - 1e-13);
        assert!(r.hi >= 8.0 && r.hi <= 8.0 + 1e-12);
    }

    #[test]
    fn sqrt_monotone_and_clamped() {
        let r = Interval::new(0.0, 4.0).sqrt().unwrap();
        assert_eq!(r.lo, 0.0);
        assert_relative_eq!(r.hi, 2.0, max_relative = 1e-12);

        // Floating-noise tolerance at the boundary.
        let r = Interval::new(-1e-13, 1.0).sqrt().unwrap();
        assert_eq!(r.lo, 0.0);
        assert!(Interval::new(-1e-9, 1.0).sqrt().is_err());
    }

    #[test]
    fn sin_snaps_to_peak() {
        // π/2 lies inside [0, 3.2], so the upper bound is exactly 1.
        let r = Interval::new(0.0, 3.2).sin();
        assert_eq!(r.hi, 1.0);
        assert!(r.lo <= (3.2f64).sin());
    }

    #[test]
    fn cos_trough() {
        let r = Interval::new(3.0, 3.3).cos();
        assert_eq!(r.lo, -1.0);
    }

    #[test]
    fn cbrt_of_square_composite() {
        // |x|^{2/3} on [-8, 1]: min 0 (straddles 0), max 8^{2/3} = 4.
        let r = Interval::new(-8.0, 1.0).pow_ratio(2, 3).unwrap();
        assert_eq!(r.lo, 0.0);
        assert_relative_eq!(r.hi, 4.0, max_relative = 1e-12);
    }

    #[test]
    fn division_by_zero_interval() {
        assert!(Interval::new(1.0, 2.0).div(Interval::new(-1.0, 1.0)).is_err());
        let r = Interval::new(1.0, 2.0).div(Interval::new(2.0, 4.0)).unwrap();
        assert!(r.lo <= 0.25 && r.hi >= 1.0);
    }

    #[test]
    fn box_split_tiles_exactly() {
        let b = IntervalBox::from_bounds(&[(-1.0, 1.0), (0.0, 3.0)]);
        let (lo, hi) = b.split(1);
        assert_eq!(lo.axis(1).hi, hi.axis(1).lo);
        assert_eq!(lo.axis(1).lo, 0.0);
        assert_eq!(hi.axis(1).hi, 3.0);
    }
}
