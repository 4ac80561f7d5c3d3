//! Float math routed through `std` when available and `libm` otherwise.

#![allow(dead_code)]

macro_rules! shim {
    ($($name:ident),* $(,)?) => {
        $(
            #[cfg(feature = "std")]
            #[inline(always)]
            pub(crate) fn $name(x: f64) -> f64 {
                f64::$name(x)
            }
            #[cfg(not(feature = "std"))]
            #[inline(always)]
            pub(crate) fn $name(x: f64) -> f64 {
                libm::$name(x)
            }
        )*
    };
}

shim!(sin, cos, exp, sqrt, cbrt, floor, ceil, round);

#[cfg(feature = "std")]
#[inline(always)]
pub(crate) fn powf(x: f64, y: f64) -> f64 {
    x.powf(y)
}

#[cfg(not(feature = "std"))]
#[inline(always)]
pub(crate) fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

/// Sign-exact integer power by binary exponentiation; the same code path
/// on std and no_std builds keeps results bit-identical across both.
pub(crate) fn powi(x: f64, n: i32) -> f64 {
    if n < 0 {
        return 1.0 / powi(x, -n);
    }
    let mut base = x;
    let mut n = n as u32;
    let mut acc = 1.0f64;
    while n > 0 {
        if n & 1 == 1 {
            acc *= base;
        }
        base *= base;
        n >>= 1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn powi_matches_std() {
        for &x in &[-2.5, -1.0, 0.0, 0.5, 3.0] {
            for n in -3..=6 {
                let got = powi(x, n);
                let want = x.powi(n);
                if want.is_finite() {
                    assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0));
                }
            }
        }
    }
}
