//! Convex geometry substrate: halfspaces, polyhedra, LP feasibility,
//! Chebyshev centres, and bounding boxes.
//!
//! Every polyhedron in the pipeline is bounded because it carries the
//! domain box facets; variable bounds for the simplex are recovered from
//! those axis-aligned halfspaces.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DVector;

use crate::interval::IntervalBox;
use crate::simplex::{maximize, LpOutcome};

pub use crate::simplex::LpError;

/// The set `{ y : a·y ≤ c }`. A zero normal is the trivial full space
/// (`c ≥ 0`) or the empty set (`c < 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    pub normal: DVector<f64>,
    pub offset: f64,
}

impl Halfspace {
    pub fn new(normal: DVector<f64>, offset: f64) -> Self {
        Self { normal, offset }
    }

    pub fn from_slice(normal: &[f64], offset: f64) -> Self {
        Self::new(DVector::from_column_slice(normal), offset)
    }

    /// Signed slack `a·x − c`; non-positive inside.
    pub fn violation(&self, x: &[f64]) -> f64 {
        self.normal
            .iter()
            .zip(x)
            .map(|(a, v)| a * v)
            .sum::<f64>()
            - self.offset
    }

    pub fn is_trivial(&self) -> bool {
        self.normal.iter().all(|&v| v == 0.0)
    }
}

/// Intersection of halfspaces over `ℝⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyhedron {
    dim: usize,
    halfspaces: Vec<Halfspace>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility {
    Feasible(Vec<f64>),
    Infeasible,
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }
}

impl Polyhedron {
    pub fn new(dim: usize, halfspaces: Vec<Halfspace>) -> Self {
        debug_assert!(halfspaces.iter().all(|h| h.normal.len() == dim));
        Self { dim, halfspaces }
    }

    /// 2n facets of a box.
    pub fn from_box(b: &IntervalBox) -> Self {
        let dim = b.dim();
        let mut halfspaces = Vec::with_capacity(2 * dim);
        for i in 0..dim {
            let mut up = DVector::zeros(dim);
            up[i] = 1.0;
            halfspaces.push(Halfspace::new(up, b.axis(i).hi));
            let mut down = DVector::zeros(dim);
            down[i] = -1.0;
            halfspaces.push(Halfspace::new(down, -b.axis(i).lo));
        }
        Self { dim, halfspaces }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    pub fn push(&mut self, h: Halfspace) {
        debug_assert_eq!(h.normal.len(), self.dim);
        self.halfspaces.push(h);
    }

    pub fn intersect(&self, h: Halfspace) -> Self {
        let mut out = self.clone();
        out.push(h);
        out
    }

    /// Intersection with every facet of another polyhedron.
    pub fn intersect_poly(&self, other: &Polyhedron) -> Self {
        let mut out = self.clone();
        out.halfspaces.extend(other.halfspaces.iter().cloned());
        out
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.halfspaces.iter().all(|h| h.violation(x) <= tol)
    }

    /// Variable bounds recovered from axis-aligned facets, falling back
    /// to a large box for axes without them.
    fn var_bounds(&self) -> Vec<(f64, f64)> {
        const BIG: f64 = 1e12;
        let mut bounds = vec![(-BIG, BIG); self.dim];
        for h in &self.halfspaces {
            let mut nz = h.normal.iter().enumerate().filter(|(_, v)| **v != 0.0);
            if let (Some((j, &a)), None) = (nz.next(), nz.next()) {
                let b = h.offset / a;
                if a > 0.0 {
                    bounds[j].1 = bounds[j].1.min(b);
                } else {
                    bounds[j].0 = bounds[j].0.max(b);
                }
            }
        }
        for (lo, hi) in bounds.iter_mut() {
            if *lo > *hi {
                // Empty on this axis; keep a degenerate sliver so the LP
                // reports infeasibility through the row constraints.
                *hi = *lo;
            }
        }
        bounds
    }

    /// Dense (rows, rhs) of the non-axis-aligned, non-trivial facets,
    /// row-scaled to unit max coefficient.
    fn lp_rows(&self) -> Option<(Vec<Vec<f64>>, Vec<f64>)> {
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for h in &self.halfspaces {
            if h.is_trivial() {
                if h.offset < 0.0 {
                    return None; // trivially empty
                }
                continue;
            }
            let scale = h.normal.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            rows.push(h.normal.iter().map(|v| v / scale).collect());
            rhs.push(h.offset / scale);
        }
        Some((rows, rhs))
    }
}

/// LP feasibility with a witness point. `Infeasible` means the phase-1
/// optimum stayed strictly positive beyond tolerance.
pub fn lp_feasible(p: &Polyhedron) -> Result<Feasibility, LpError> {
    let Some((rows, rhs)) = p.lp_rows() else {
        return Ok(Feasibility::Infeasible);
    };
    let zeros = vec![0.0; p.dim()];
    match maximize(&zeros, &rows, &rhs, &p.var_bounds())? {
        LpOutcome::Optimal { x, .. } => Ok(Feasibility::Feasible(x)),
        LpOutcome::Infeasible => Ok(Feasibility::Infeasible),
        LpOutcome::Unbounded => unreachable!("feasibility LP has a constant objective"),
    }
}

/// Centre and radius of the largest inscribed ball: maximise `r` s.t.
/// `a·y + ‖a‖₂ r ≤ c` over every facet.
pub fn chebyshev(p: &Polyhedron) -> Result<Option<(Vec<f64>, f64)>, LpError> {
    let Some((rows, rhs)) = p.lp_rows() else {
        return Ok(None);
    };
    let n = p.dim();
    let mut bounds = p.var_bounds();
    let diameter = bounds
        .iter()
        .map(|(lo, hi)| hi - lo)
        .fold(0.0f64, f64::max);
    bounds.push((0.0, diameter.max(1.0)));

    let mut ext_rows = Vec::with_capacity(rows.len());
    for row in &rows {
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut r = row.clone();
        r.push(norm);
        ext_rows.push(r);
    }
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    match maximize(&c, &ext_rows, &rhs, &bounds)? {
        LpOutcome::Optimal { x, objective } => {
            let center = x[..n].to_vec();
            Ok(Some((center, objective.max(0.0))))
        }
        LpOutcome::Infeasible => Ok(None),
        LpOutcome::Unbounded => unreachable!("radius is bounded by the box diameter"),
    }
}

/// Tight bounding box via `2n` LPs.
pub fn bbox(p: &Polyhedron) -> Result<Option<IntervalBox>, LpError> {
    let Some((rows, rhs)) = p.lp_rows() else {
        return Ok(None);
    };
    let n = p.dim();
    let bounds = p.var_bounds();
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let mut c = vec![0.0; n];
        c[j] = -1.0;
        let lo = match maximize(&c, &rows, &rhs, &bounds)? {
            LpOutcome::Optimal { objective, .. } => -objective,
            LpOutcome::Infeasible => return Ok(None),
            LpOutcome::Unbounded => unreachable!("bounded vars"),
        };
        c[j] = 1.0;
        let hi = match maximize(&c, &rows, &rhs, &bounds)? {
            LpOutcome::Optimal { objective, .. } => objective,
            LpOutcome::Infeasible => return Ok(None),
            LpOutcome::Unbounded => unreachable!("bounded vars"),
        };
        out.push(crate::interval::Interval::new(lo.min(hi), hi.max(lo)));
    }
    Ok(Some(IntervalBox::new(out)))
}

/// Maximum of a linear objective over the polyhedron, if nonempty.
pub fn linear_max(p: &Polyhedron, objective: &[f64]) -> Result<Option<f64>, LpError> {
    let Some((rows, rhs)) = p.lp_rows() else {
        return Ok(None);
    };
    match maximize(objective, &rows, &rhs, &p.var_bounds())? {
        LpOutcome::Optimal { objective, .. } => Ok(Some(objective)),
        LpOutcome::Infeasible => Ok(None),
        LpOutcome::Unbounded => unreachable!("bounded vars"),
    }
}

/// Drop halfspaces that cannot be active: one LP per constraint.
pub fn remove_redundant(p: &Polyhedron) -> Result<Polyhedron, LpError> {
    let mut kept: Vec<Halfspace> = Vec::new();
    for (i, h) in p.halfspaces.iter().enumerate() {
        if h.is_trivial() {
            continue;
        }
        let mut rest = Vec::new();
        rest.extend(kept.iter().cloned());
        rest.extend(p.halfspaces[i + 1..].iter().cloned());
        let without = Polyhedron::new(p.dim, rest);
        let scale = h.normal.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let obj: Vec<f64> = h.normal.iter().map(|v| v / scale).collect();
        match linear_max(&without, &obj)? {
            Some(max) if max <= h.offset / scale + 1e-9 => {
                // Never active; drop it.
            }
            _ => kept.push(h.clone()),
        }
    }
    Ok(Polyhedron::new(p.dim, kept))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    fn unit_box(n: usize) -> IntervalBox {
        IntervalBox::from_bounds(&vec![(-1.0, 1.0); n])
    }

    #[test]
    fn empty_constraint_set_is_feasible_in_box() {
        let p = Polyhedron::from_box(&unit_box(2));
        match lp_feasible(&p).unwrap() {
            Feasibility::Feasible(w) => assert!(p.contains(&w, 1e-9)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn contradictory_halfspaces_infeasible() {
        let mut p = Polyhedron::from_box(&IntervalBox::from_bounds(&[(-1.0, 1.0)]));
        p.push(Halfspace::from_slice(&[1.0], 0.0)); // x <= 0
        p.push(Halfspace::from_slice(&[-1.0], -1.0)); // x >= 1
        assert_eq!(lp_feasible(&p).unwrap(), Feasibility::Infeasible);
    }

    #[test]
    fn chebyshev_of_unit_box() {
        let p = Polyhedron::from_box(&unit_box(2));
        let (center, radius) = chebyshev(&p).unwrap().unwrap();
        assert_relative_eq!(radius, 1.0, epsilon = 1e-9);
        assert!(center.iter().all(|c| c.abs() <= 1e-9));
    }

    #[test]
    fn chebyshev_of_slab_is_thin_direction() {
        let p = Polyhedron::from_box(&IntervalBox::from_bounds(&[(-1.0, 1.0), (-0.1, 0.1)]));
        let (_, radius) = chebyshev(&p).unwrap().unwrap();
        assert_relative_eq!(radius, 0.1, epsilon = 1e-9);
    }

    #[test]
    fn chebyshev_matches_triangle_inradius() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            // Random triangle from three non-collinear points.
            let pts: Vec<[f64; 2]> = (0..3)
                .map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
                .collect();
            let area2 = ((pts[1][0] - pts[0][0]) * (pts[2][1] - pts[0][1])
                - (pts[2][0] - pts[0][0]) * (pts[1][1] - pts[0][1]))
                .abs();
            if area2 < 0.1 {
                continue;
            }
            let mut p = Polyhedron::from_box(&IntervalBox::from_bounds(&[(-2.0, 2.0), (-2.0, 2.0)]));
            let centroid = [
                (pts[0][0] + pts[1][0] + pts[2][0]) / 3.0,
                (pts[0][1] + pts[1][1] + pts[2][1]) / 3.0,
            ];
            let mut perimeter = 0.0;
            for i in 0..3 {
                let (a, b) = (pts[i], pts[(i + 1) % 3]);
                let edge = [b[0] - a[0], b[1] - a[1]];
                perimeter += (edge[0] * edge[0] + edge[1] * edge[1]).sqrt();
                // Inward normal: reject the side not containing the centroid.
                let mut n = [edge[1], -edge[0]];
                let mut c = n[0] * a[0] + n[1] * a[1];
                if n[0] * centroid[0] + n[1] * centroid[1] > c {
                    n = [-n[0], -n[1]];
                    c = -c;
                }
                p.push(Halfspace::from_slice(&n, c));
            }
            let inradius = area2 / perimeter; // area / semiperimeter
            let (_, radius) = chebyshev(&p).unwrap().unwrap();
            assert_relative_eq!(radius, inradius, epsilon = 1e-6);
        }
    }

    #[test]
    fn bbox_of_halfspace_cut() {
        let mut p = Polyhedron::from_box(&unit_box(2));
        p.push(Halfspace::from_slice(&[1.0, 0.0], 0.3));
        let b = bbox(&p).unwrap().unwrap();
        assert_relative_eq!(b.axis(0).lo, -1.0, epsilon = 1e-9);
        assert_relative_eq!(b.axis(0).hi, 0.3, epsilon = 1e-9);
        assert_relative_eq!(b.axis(1).hi, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn bbox_of_simplex() {
        // x, y >= 0, x + y <= 1 inside [0, 1]^2.
        let mut p = Polyhedron::from_box(&IntervalBox::from_bounds(&[(0.0, 1.0), (0.0, 1.0)]));
        p.push(Halfspace::from_slice(&[1.0, 1.0], 1.0));
        let b = bbox(&p).unwrap().unwrap();
        assert_relative_eq!(b.axis(0).lo, 0.0, epsilon = 1e-9);
        assert_relative_eq!(b.axis(0).hi, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn feasibility_matches_sampling_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for case in 0..60 {
            let mut p = Polyhedron::from_box(&unit_box(2));
            for _ in 0..20 {
                let n = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
                let c = rng.random_range(-0.3..1.0);
                p.push(Halfspace::from_slice(&n, c));
            }
            let mut oracle_point = None;
            for _ in 0..100_000 {
                let x = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
                if p.contains(&x, 0.0) {
                    oracle_point = Some(x);
                    break;
                }
            }
            match (lp_feasible(&p).unwrap(), oracle_point) {
                (Feasibility::Feasible(w), _) => {
                    assert!(p.contains(&w, 1e-9), "case {case}: witness outside");
                }
                (Feasibility::Infeasible, Some(x)) => {
                    panic!("case {case}: oracle found {x:?} but LP says infeasible");
                }
                (Feasibility::Infeasible, None) => {}
            }
        }
    }

    #[test]
    fn monotone_under_added_constraints() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(29);
        for _ in 0..40 {
            let mut p = Polyhedron::from_box(&unit_box(2));
            for _ in 0..6 {
                let n = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
                p.push(Halfspace::from_slice(&n, rng.random_range(-0.5..0.5)));
            }
            let cut = Halfspace::from_slice(
                &[rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)],
                rng.random_range(-0.5..0.5),
            );
            let q = p.intersect(cut);
            if lp_feasible(&p).unwrap() == Feasibility::Infeasible {
                assert_eq!(lp_feasible(&q).unwrap(), Feasibility::Infeasible);
            }
            if let (Some((_, rp)), Some((_, rq))) =
                (chebyshev(&p).unwrap(), chebyshev(&q).unwrap())
            {
                assert!(rq <= rp + 1e-9);
            }
        }
    }

    #[test]
    fn redundant_facets_removed() {
        let mut p = Polyhedron::from_box(&unit_box(2));
        p.push(Halfspace::from_slice(&[1.0, 0.0], 5.0)); // implied by x <= 1
        let r = remove_redundant(&p).unwrap();
        assert_eq!(r.halfspaces().len(), 4);
    }
}
