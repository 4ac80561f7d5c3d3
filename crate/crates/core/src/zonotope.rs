//! Zonotopes: centrally symmetric sets `{c + Gλ : λ ∈ [−1,1]^m}`.
//!
//! Closed under linear maps and Minkowski sums — exactly the two
//! operations the affine flowpipe recurrence needs.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::interval::{Interval, IntervalBox};
use crate::simplex::{maximize, LpError, LpOutcome};

#[derive(Debug, Clone, PartialEq)]
pub struct Zonotope {
    center: DVector<f64>,
    /// One generator per column.
    generators: DMatrix<f64>,
}

impl Zonotope {
    pub fn new(center: DVector<f64>, generators: DMatrix<f64>) -> Self {
        debug_assert_eq!(center.len(), generators.nrows());
        Self { center, generators }
    }

    pub fn point(center: DVector<f64>) -> Self {
        let n = center.len();
        Self {
            center,
            generators: DMatrix::zeros(n, 0),
        }
    }

    pub fn from_box(b: &IntervalBox) -> Self {
        let n = b.dim();
        let center = DVector::from_iterator(n, b.axes().iter().map(|a| a.midpoint()));
        let radii: Vec<(usize, f64)> = (0..n)
            .filter(|&i| b.axis(i).radius() > 0.0)
            .map(|i| (i, b.axis(i).radius()))
            .collect();
        let mut generators = DMatrix::zeros(n, radii.len());
        for (col, (axis, r)) in radii.into_iter().enumerate() {
            generators[(axis, col)] = r;
        }
        Self { center, generators }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn num_generators(&self) -> usize {
        self.generators.ncols()
    }

    /// Generator count over dimension, rounded up.
    pub fn order(&self) -> usize {
        self.num_generators().div_ceil(self.dim().max(1))
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    pub fn generators(&self) -> &DMatrix<f64> {
        &self.generators
    }

    /// Exact per-axis projection: `c_i ± Σ_j |G_ij|`.
    pub fn bbox(&self) -> IntervalBox {
        IntervalBox::new(
            (0..self.dim())
                .map(|i| {
                    let r: f64 = self.generators.row(i).iter().map(|v| v.abs()).sum();
                    Interval::new(self.center[i] - r, self.center[i] + r)
                })
                .collect(),
        )
    }

    /// `sup { d·x : x ∈ Z }`.
    pub fn support(&self, dir: &[f64]) -> f64 {
        let d = DVector::from_column_slice(dir);
        let mut s = self.center.dot(&d);
        for j in 0..self.num_generators() {
            s += self.generators.column(j).dot(&d).abs();
        }
        s
    }

    pub fn linear_map(&self, a: &DMatrix<f64>) -> Self {
        Self {
            center: a * &self.center,
            generators: a * &self.generators,
        }
    }

    pub fn translate(&self, v: &DVector<f64>) -> Self {
        Self {
            center: &self.center + v,
            generators: self.generators.clone(),
        }
    }

    /// Minkowski sum with an axis-aligned box of the given radii.
    pub fn minkowski_box(&self, radii: &[f64]) -> Self {
        let n = self.dim();
        let extra: Vec<(usize, f64)> = radii
            .iter()
            .enumerate()
            .filter(|(_, r)| **r > 0.0)
            .map(|(i, r)| (i, *r))
            .collect();
        let mut generators = DMatrix::zeros(n, self.num_generators() + extra.len());
        generators
            .view_mut((0, 0), (n, self.num_generators()))
            .copy_from(&self.generators);
        for (col, (axis, r)) in extra.into_iter().enumerate() {
            generators[(axis, self.num_generators() + col)] = r;
        }
        Self {
            center: self.center.clone(),
            generators,
        }
    }

    /// Enclosure of the convex hull of two zonotopes (Girard):
    /// `((c₁+c₂)/2, [(G₁+G₂)/2 | (G₁−G₂)/2 | (c₁−c₂)/2])`, after
    /// zero-padding to a common generator count.
    pub fn hull_enclosure(&self, other: &Self) -> Self {
        let n = self.dim();
        let m = self.num_generators().max(other.num_generators());
        let pad = |z: &Self| {
            let mut g = DMatrix::zeros(n, m);
            g.view_mut((0, 0), (n, z.num_generators()))
                .copy_from(&z.generators);
            g
        };
        let (g1, g2) = (pad(self), pad(other));
        let mut generators = DMatrix::zeros(n, 2 * m + 1);
        for j in 0..m {
            for i in 0..n {
                generators[(i, j)] = 0.5 * (g1[(i, j)] + g2[(i, j)]);
                generators[(i, m + j)] = 0.5 * (g1[(i, j)] - g2[(i, j)]);
            }
        }
        let half_diff = 0.5 * (&self.center - &other.center);
        generators.column_mut(2 * m).copy_from(&half_diff);
        Self {
            center: 0.5 * (&self.center + &other.center),
            generators,
        }
    }

    /// Girard order reduction: keep the largest generators, replace the
    /// rest by their interval hull. Sound (the result contains `self`).
    pub fn reduce(&self, max_order: usize) -> Self {
        let n = self.dim();
        let m = self.num_generators();
        let budget = max_order * n;
        if m <= budget {
            return self.clone();
        }
        // Keep the (budget − n) most significant generators and box the
        // remainder into n axis generators.
        let keep = budget.saturating_sub(n);
        let mut scored: Vec<(f64, usize)> = (0..m)
            .map(|j| {
                let col = self.generators.column(j);
                let l1: f64 = col.iter().map(|v| v.abs()).sum();
                let linf = col.iter().map(|v| v.abs()).fold(0.0, f64::max);
                (l1 - linf, j)
            })
            .collect();
        // Largest score = least box-like, reduced last.
        scored.sort_by(|a, b| {
            b.0.partial_cmp(&a.0)
                .unwrap_or(core::cmp::Ordering::Equal)
                .then(a.1.cmp(&b.1))
        });
        let kept_idx: Vec<usize> = scored[..keep].iter().map(|&(_, j)| j).collect();
        let boxed_idx: Vec<usize> = scored[keep..].iter().map(|&(_, j)| j).collect();
        let mut generators = DMatrix::zeros(n, keep + n);
        for (col, &j) in kept_idx.iter().enumerate() {
            generators.column_mut(col).copy_from(&self.generators.column(j));
        }
        for i in 0..n {
            let r: f64 = boxed_idx
                .iter()
                .map(|&j| self.generators[(i, j)].abs())
                .sum();
            generators[(i, keep + i)] = r;
        }
        Self {
            center: self.center.clone(),
            generators,
        }
    }

    /// Exact membership via LP over the generator coefficients.
    pub fn contains(&self, x: &[f64], tol: f64) -> Result<bool, LpError> {
        let n = self.dim();
        let m = self.num_generators();
        if m == 0 {
            return Ok(self
                .center
                .iter()
                .zip(x)
                .all(|(c, v)| (c - v).abs() <= tol));
        }
        // Quick reject via the exact bounding box.
        if !self.bbox().contains(x, tol) {
            return Ok(false);
        }
        let mut rows = Vec::with_capacity(2 * n);
        let mut rhs = Vec::with_capacity(2 * n);
        for i in 0..n {
            let row: Vec<f64> = (0..m).map(|j| self.generators[(i, j)]).collect();
            let d = x[i] - self.center[i];
            rows.push(row.clone());
            rhs.push(d + tol);
            rows.push(row.into_iter().map(|v| -v).collect());
            rhs.push(-d + tol);
        }
        let bounds = vec![(-1.0, 1.0); m];
        let zeros = vec![0.0; m];
        Ok(matches!(
            maximize(&zeros, &rows, &rhs, &bounds)?,
            LpOutcome::Optimal { .. }
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    fn rand_zonotope<R: Rng>(rng: &mut R, n: usize, m: usize) -> Zonotope {
        Zonotope::new(
            DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0)),
            DMatrix::from_fn(n, m, |_, _| rng.random_range(-0.3..0.3)),
        )
    }

    fn rand_point_inside<R: Rng>(rng: &mut R, z: &Zonotope) -> Vec<f64> {
        let lambda = DVector::from_fn(z.num_generators(), |_, _| rng.random_range(-1.0..1.0));
        (z.center() + z.generators() * lambda).as_slice().to_vec()
    }

    #[test]
    fn bbox_is_exact_projection() {
        let z = Zonotope::new(
            DVector::from_column_slice(&[1.0, 2.0]),
            DMatrix::from_row_slice(2, 2, &[0.5, 0.25, 0.0, 1.0]),
        );
        let b = z.bbox();
        assert_relative_eq!(b.axis(0).lo, 0.25);
        assert_relative_eq!(b.axis(0).hi, 1.75);
        assert_relative_eq!(b.axis(1).lo, 1.0);
        assert_relative_eq!(b.axis(1).hi, 3.0);
    }

    #[test]
    fn support_matches_bbox_on_axes() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let z = rand_zonotope(&mut rng, 3, 7);
        let b = z.bbox();
        for i in 0..3 {
            let mut d = vec![0.0; 3];
            d[i] = 1.0;
            assert_relative_eq!(z.support(&d), b.axis(i).hi, epsilon = 1e-12);
            d[i] = -1.0;
            assert_relative_eq!(z.support(&d), -b.axis(i).lo, epsilon = 1e-12);
        }
    }

    #[test]
    fn hull_enclosure_contains_both() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let a = rand_zonotope(&mut rng, 2, 4);
            let b = rand_zonotope(&mut rng, 2, 6);
            let h = a.hull_enclosure(&b);
            for _ in 0..30 {
                let pa = rand_point_inside(&mut rng, &a);
                let pb = rand_point_inside(&mut rng, &b);
                assert!(h.contains(&pa, 1e-9).unwrap());
                assert!(h.contains(&pb, 1e-9).unwrap());
            }
        }
    }

    #[test]
    fn reduction_is_sound_and_caps_order() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        for _ in 0..10 {
            let z = rand_zonotope(&mut rng, 2, 23);
            let r = z.reduce(5);
            assert!(r.num_generators() <= 10);
            for _ in 0..50 {
                let p = rand_point_inside(&mut rng, &z);
                assert!(r.contains(&p, 1e-9).unwrap());
            }
        }
    }

    #[test]
    fn membership_distinguishes_inside_outside() {
        let z = Zonotope::new(
            DVector::from_column_slice(&[0.0, 0.0]),
            DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]),
        );
        assert!(z.contains(&[0.0, 0.0], 1e-12).unwrap());
        assert!(z.contains(&[2.0, 1.0], 1e-9).unwrap()); // λ = (1, 1)
        assert!(!z.contains(&[2.0, -1.0], 1e-9).unwrap());
        assert!(!z.contains(&[0.0, 1.5], 1e-9).unwrap());
    }
}
