//! Affine simplicial-mesh baseline.
//!
//! Kuhn-triangulates a grid over the domain (`n!·gⁿ` simplices for
//! resolution `g`), interpolates the vector field affinely between the
//! vertices of each simplex, and certifies the interpolation residual
//! per simplex with the interval branch-and-bound engine restricted to
//! the simplex polyhedron. The certified global bound is the maximum
//! over simplices — a residual-based certificate rather than an a
//! priori second-derivative bound, so it is never looser than one.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::certify::{bound_sup, CertBudget, CertError, ErrorBound, ResidualSystem};

use crate::interval::{DomainError, Interval, IntervalBox};
use crate::model::DynamicalModel;
use crate::poly::{Halfspace, LpError, Polyhedron};

#[derive(Debug, Clone)]
pub struct Simplex {
    pub vertex_ids: Vec<usize>,
    /// Affine interpolant `x ↦ Ax + c` matching `f` at the vertices.
    pub affine_a: DMatrix<f64>,
    pub affine_c: DVector<f64>,
    pub poly: Polyhedron,
    pub bbox: IntervalBox,
}

#[derive(Debug, Clone)]
pub struct SimplicialMesh {
    pub resolution: usize,
    pub vertices: Vec<Vec<f64>>,
    pub simplices: Vec<Simplex>,
    pub domain: IntervalBox,
}

#[derive(Debug, thiserror::Error)]
pub enum MeshError {
    #[error("grid resolution must be at least 1")]
    ZeroResolution,
    #[error("simplex {index} has a singular interpolation system")]
    SingularSimplex { index: usize },
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Cert(#[from] CertError),
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..n).collect();
    fn heap(k: usize, items: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(items.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, items, out);
            if k % 2 == 0 {
                items.swap(i, k - 1);
            } else {
                items.swap(0, k - 1);
            }
        }
    }
    heap(n, &mut items, &mut out);
    out.sort();
    out
}

/// Kuhn triangulation of a `g`-per-axis grid over the model domain,
/// with per-simplex affine maps interpolating `f` at the vertices.
pub fn build_mesh(model: &DynamicalModel, g: usize) -> Result<SimplicialMesh, MeshError> {
    if g == 0 {
        return Err(MeshError::ZeroResolution);
    }
    let n = model.dim();
    let domain = model.domain.clone();
    let lo: Vec<f64> = domain.axes().iter().map(|a| a.lo).collect();
    let w: Vec<f64> = domain.axes().iter().map(|a| a.width() / g as f64).collect();

    // Grid vertices, flattened with axis 0 fastest.
    let verts_per_axis = g + 1;
    let total_vertices = verts_per_axis.pow(n as u32);
    let mut vertices = Vec::with_capacity(total_vertices);
    let mut values = Vec::with_capacity(total_vertices);
    for flat in 0..total_vertices {
        let mut rem = flat;
        let mut p = vec![0.0; n];
        for (i, v) in p.iter_mut().enumerate() {
            let idx = rem % verts_per_axis;
            rem /= verts_per_axis;
            *v = lo[i] + w[i] * idx as f64;
        }
        values.push(model.eval(&p)?);
        vertices.push(p);
    }
    let vertex_id = |idx: &[usize]| -> usize {
        idx.iter()
            .rev()
            .fold(0, |acc, &i| acc * verts_per_axis + i)
    };

    let perms = permutations(n);
    let mut simplices = Vec::new();
    let mut cell = vec![0usize; n];
    loop {
        let base: Vec<f64> = (0..n).map(|i| lo[i] + w[i] * cell[i] as f64).collect();
        for perm in &perms {
            // Vertex chain: start at the cell base, add one axis at a
            // time in permutation order.
            let mut idx = cell.clone();
            let mut ids = vec![vertex_id(&idx)];
            for &axis in perm {
                idx[axis] += 1;
                ids.push(vertex_id(&idx));
            }

            // Interpolation: solve [V 1] β = y per component.
            let mut sys = DMatrix::zeros(n + 1, n + 1);
            for (r, &id) in ids.iter().enumerate() {
                for c in 0..n {
                    sys[(r, c)] = vertices[id][c];
                }
                sys[(r, n)] = 1.0;
            }
            let lu = sys.lu();
            let mut affine_a = DMatrix::zeros(n, n);
            let mut affine_c = DVector::zeros(n);
            for comp in 0..n {
                let rhs = DVector::from_iterator(n + 1, ids.iter().map(|&id| values[id][comp]));
                let beta = lu.solve(&rhs).ok_or(MeshError::SingularSimplex {
                    index: simplices.len(),
                })?;
                for c in 0..n {
                    affine_a[(comp, c)] = beta[c];
                }
                affine_c[comp] = beta[n];
            }

            // n + 1 facets in local coordinates l_k = (x_k − base_k)/w_k:
            // l_{π1} ≤ 1, l_{π(k+1)} ≤ l_{πk}, l_{πn} ≥ 0.
            let mut poly = Polyhedron::new(n, Vec::new());
            let mut top = DVector::zeros(n);
            top[perm[0]] = 1.0 / w[perm[0]];
            poly.push(Halfspace::new(top, 1.0 + base[perm[0]] / w[perm[0]]));
            for k in 0..n - 1 {
                let (hi_axis, lo_axis) = (perm[k], perm[k + 1]);
                let mut normal = DVector::zeros(n);
                normal[lo_axis] = 1.0 / w[lo_axis];
                normal[hi_axis] = -1.0 / w[hi_axis];
                poly.push(Halfspace::new(
                    normal,
                    base[lo_axis] / w[lo_axis] - base[hi_axis] / w[hi_axis],
                ));
            }
            let mut bottom = DVector::zeros(n);
            bottom[perm[n - 1]] = -1.0 / w[perm[n - 1]];
            poly.push(Halfspace::new(bottom, -base[perm[n - 1]] / w[perm[n - 1]]));

            let bbox = IntervalBox::new(
                (0..n)
                    .map(|i| {
                        let (mut mn, mut mx) = (f64::INFINITY, f64::NEG_INFINITY);
                        for &id in &ids {
                            mn = mn.min(vertices[id][i]);
                            mx = mx.max(vertices[id][i]);
                        }
                        Interval::new(mn, mx)
                    })
                    .collect(),
            );

            simplices.push(Simplex {
                vertex_ids: ids,
                affine_a,
                affine_c,
                poly,
                bbox,
            });
        }
        // Next cell in lexicographic order.
        let mut axis = 0;
        loop {
            if axis == n {
                return Ok(SimplicialMesh {
                    resolution: g,
                    vertices,
                    simplices,
                    domain,
                });
            }
            cell[axis] += 1;
            if cell[axis] < g {
                break;
            }
            cell[axis] = 0;
            axis += 1;
        }
    }
}

struct InterpolantResidual<'a> {
    model: &'a DynamicalModel,
    a: &'a DMatrix<f64>,
    c: &'a DVector<f64>,
}

impl ResidualSystem for InterpolantResidual<'_> {
    fn components(&self) -> usize {
        self.model.dim()
    }

    fn enclosure(&self, bx: &IntervalBox) -> Result<Vec<Interval>, DomainError> {
        let aa = crate::affine::residual_affine_enclosure(&self.model.flow, self.a, self.c, bx)?;
        let f = self.model.eval_interval(bx)?;
        Ok(aa
            .iter()
            .enumerate()
            .map(|(row, aiv)| {
                // Plain interval route as an intersection partner.
                let mut lin_lo = self.c[row];
                let mut lin_hi = self.c[row];
                for (col, iv) in bx.axes().iter().enumerate() {
                    let coeff = self.a[(row, col)];
                    if coeff >= 0.0 {
                        lin_lo += coeff * iv.lo;
                        lin_hi += coeff * iv.hi;
                    } else {
                        lin_lo += coeff * iv.hi;
                        lin_hi += coeff * iv.lo;
                    }
                }
                let plain = f[row].sub(Interval::new(lin_lo, lin_hi));
                aiv.intersect(plain).unwrap_or_else(|| aiv.hull(plain))
            })
            .collect())
    }

    fn point(&self, x: &[f64]) -> Result<Vec<f64>, DomainError> {
        let f = self.model.eval(x)?;
        let lin = self.a * DVector::from_column_slice(x) + self.c;
        Ok(f.iter().zip(lin.iter()).map(|(a, b)| a - b).collect())
    }
}

#[derive(Debug, Clone)]
pub struct SimplexCert {
    pub index: usize,
    /// Certified per-component residual bound over the simplex.
    pub upper: Vec<f64>,
    /// `‖upper‖₂`: certified 2-norm bound on this simplex.
    pub eps2: f64,
    /// Bound meets the target thresholds.
    pub certified: bool,
    pub boxes_processed: u64,
}

#[derive(Debug, Clone)]
pub struct AsmReport {
    pub per_simplex: Vec<SimplexCert>,
    /// Certified global 2-norm bound: max over simplices of `eps2`.
    pub global_eps2: f64,
    /// Per-component maxima across simplices.
    pub per_component: Vec<f64>,
    pub all_certified: bool,
    pub boxes_processed: u64,
}

/// Certify the interpolation residual simplex by simplex. The box
/// budget is divided across simplices; bounds are tightened to a 2%
/// relative gap against the best concrete evaluation.
pub fn certify_asm(
    model: &DynamicalModel,
    mesh: &SimplicialMesh,
    target: &ErrorBound,
    budget: &CertBudget,
) -> Result<AsmReport, MeshError> {
    let thresholds = target.thresholds()?;
    let per_budget = CertBudget {
        max_boxes: (budget.max_boxes / mesh.simplices.len() as u64).max(5_000),
        ..budget.clone()
    };
    let mut per_simplex = Vec::with_capacity(mesh.simplices.len());
    let mut per_component = vec![0.0f64; model.dim()];
    let mut global_eps2 = 0.0f64;
    let mut all_certified = true;
    let mut boxes = 0;
    for (index, s) in mesh.simplices.iter().enumerate() {
        let residual = InterpolantResidual {
            model,
            a: &s.affine_a,
            c: &s.affine_c,
        };
        let bound = bound_sup(&residual, &s.bbox, Some(&s.poly), &per_budget, 0.02, 1e-6)?;
        let eps2 = bound.upper.iter().map(|u| u * u).sum::<f64>().sqrt();
        let certified = bound
            .upper
            .iter()
            .zip(&thresholds)
            .all(|(u, t)| u <= t);
        all_certified &= certified;
        for (g, u) in per_component.iter_mut().zip(&bound.upper) {
            *g = g.max(*u);
        }
        global_eps2 = global_eps2.max(eps2);
        boxes += bound.boxes_processed;
        per_simplex.push(SimplexCert {
            index,
            upper: bound.upper,
            eps2,
            certified,
            boxes_processed: bound.boxes_processed,
        });
    }
    Ok(AsmReport {
        per_simplex,
        global_eps2,
        per_component,
        all_certified,
        boxes_processed: boxes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use approx::assert_relative_eq;

    fn model_1d(flow: &str, lo: f64, hi: f64) -> DynamicalModel {
        DynamicalModel {
            name: "m".into(),
            variables: vec!["x".into()],
            flow: vec![parse(flow, &["x"]).unwrap()],
            delta: 0.0,
            domain: IntervalBox::from_bounds(&[(lo, hi)]),
            init: IntervalBox::from_bounds(&[(lo, lo)]),
            bad: IntervalBox::from_bounds(&[(hi, hi)]),
            horizon: 1.0,
        }
    }

    fn model_2d() -> DynamicalModel {
        let vars = ["x", "y"];
        DynamicalModel {
            name: "jet".into(),
            variables: vec!["x".into(), "y".into()],
            flow: vec![
                parse("-y - 1.5*x^2 - 0.5*x^3 - 0.1", &vars).unwrap(),
                parse("3*x - y", &vars).unwrap(),
            ],
            delta: 0.0,
            domain: IntervalBox::from_bounds(&[(-1.0, 1.0), (-1.0, 1.0)]),
            init: IntervalBox::from_bounds(&[(0.45, 0.5), (-0.6, -0.55)]),
            bad: IntervalBox::from_bounds(&[(0.3, 0.35), (0.5, 0.6)]),
            horizon: 1.5,
        }
    }

    #[test]
    fn partition_counts_follow_factorial_formula() {
        // 2D, g = 2: 2!·2² = 8 simplices.
        let mesh = build_mesh(&model_2d(), 2).unwrap();
        assert_eq!(mesh.simplices.len(), 8);
        // 1D: g segments.
        let mesh = build_mesh(&model_1d("x^2", -1.0, 1.0), 5).unwrap();
        assert_eq!(mesh.simplices.len(), 5);
    }

    #[test]
    fn simplices_tile_the_domain() {
        for g in [1, 2, 3] {
            let mesh = build_mesh(&model_2d(), g).unwrap();
            let total: f64 = mesh
                .simplices
                .iter()
                .map(|s| {
                    let v0 = &mesh.vertices[s.vertex_ids[0]];
                    let m = DMatrix::from_fn(2, 2, |r, c| {
                        mesh.vertices[s.vertex_ids[c + 1]][r] - v0[r]
                    });
                    m.determinant().abs() / 2.0
                })
                .sum();
            assert_relative_eq!(total, 4.0, max_relative = 1e-9);
        }
    }

    #[test]
    fn interpolant_matches_vertices() {
        let mesh = build_mesh(&model_2d(), 2).unwrap();
        let model = model_2d();
        for s in &mesh.simplices {
            for &id in &s.vertex_ids {
                let v = &mesh.vertices[id];
                let f = model.eval(v).unwrap();
                let lin = &s.affine_a * DVector::from_column_slice(v) + &s.affine_c;
                for i in 0..2 {
                    assert!((f[i] - lin[i]).abs() < 1e-12);
                }
                assert!(s.poly.contains(v, 1e-9));
            }
        }
    }

    #[test]
    fn affine_field_certifies_to_zero() {
        let model = DynamicalModel {
            flow: vec![
                parse("2*x - y", &["x", "y"]).unwrap(),
                parse("x + 0.5", &["x", "y"]).unwrap(),
            ],
            ..model_2d()
        };
        let mesh = build_mesh(&model, 2).unwrap();
        let target = ErrorBound::new(vec![1e-9, 1e-9], 0.0).unwrap();
        let report = certify_asm(&model, &mesh, &target, &CertBudget::default()).unwrap();
        assert!(report.all_certified, "global {}", report.global_eps2);
        assert!(report.global_eps2 <= 1e-9);
    }

    #[test]
    fn chord_error_of_square() {
        // f = x² on [−1, 1], g = 2: chords on [−1,0] and [0,1] miss by
        // (b−a)²/8 · max f″ = 1/4 at the midpoints.
        let model = model_1d("x^2", -1.0, 1.0);
        let mesh = build_mesh(&model, 2).unwrap();
        let target = ErrorBound::new(vec![0.26], 0.0).unwrap();
        let report = certify_asm(&model, &mesh, &target, &CertBudget::default()).unwrap();
        assert!(report.all_certified);
        assert!(
            report.global_eps2 >= 0.25 && report.global_eps2 <= 0.26,
            "bound {}",
            report.global_eps2
        );
    }

    #[test]
    fn refinement_never_loosens() {
        let model = model_2d();
        let target = ErrorBound::uniform(10.0, 2, 0.0).unwrap();
        let mut prev = f64::INFINITY;
        for g in [2, 4] {
            let mesh = build_mesh(&model, g).unwrap();
            let report = certify_asm(&model, &mesh, &target, &CertBudget::default()).unwrap();
            assert!(
                report.global_eps2 <= prev + 1e-12,
                "g={g}: {} > {prev}",
                report.global_eps2
            );
            prev = report.global_eps2;
        }
    }
}
