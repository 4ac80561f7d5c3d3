//! Sound certification of the approximation error bound.
//!
//! The certifier decides whether `|f_i(x) − N_i(x)| ≤ e_i − δ` holds for
//! every `x` in the domain by interval branch-and-bound: a box whose
//! residual enclosure meets every component bound is certified; a box
//! whose midpoint or residual-maximising corner concretely violates a
//! bound yields a counterexample; otherwise the box splits along the
//! axis with the largest width × sensitivity score.
//!
//! Soundness is inherited from the interval evaluators: a `Certified`
//! verdict means the processed leaves tile the domain and each carries a
//! proven residual enclosure within the bound. There are no false
//! certificates; budget exhaustion is reported as `Inconclusive`, never
//! as success.

use alloc::vec;
use alloc::vec::Vec;

use crate::clock::Clock;
use crate::interval::{DomainError, Interval, IntervalBox};
use crate::model::DynamicalModel;
use crate::net::NeuralNet;
use crate::poly::Polyhedron;

/// Per-component error bound `e` with the concrete disturbance radius
/// `δ` it must absorb. The scalar reported to the outside is `‖e‖₂`;
/// certification itself is per-component: `|f_i − N_i| ≤ e_i − δ`, which
/// is what the downstream box disturbance `∏[−e_i, e_i]` consumes.
/// (`‖d‖ ≤ δ` implies `|d_i| ≤ δ` for the 2- and ∞-norms, so absorbing
/// the full δ per component is sound.)
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorBound {
    per_component: Vec<f64>,
    delta: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CertError {
    #[error("error bound component {component} = {value} does not exceed the disturbance radius {delta}")]
    TargetBelowDisturbance {
        component: usize,
        value: f64,
        delta: f64,
    },
    #[error("error bound component {component} = {value} is not a finite non-negative value")]
    InvalidBound { component: usize, value: f64 },
    #[error("all box widths are below the minimum split width")]
    DegenerateBox,
    #[error(transparent)]
    Domain(#[from] DomainError),
}

impl ErrorBound {
    pub fn new(per_component: Vec<f64>, delta: f64) -> Result<Self, CertError> {
        for (component, &value) in per_component.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(CertError::InvalidBound { component, value });
            }
        }
        Ok(Self {
            per_component,
            delta,
        })
    }

    /// Split a scalar 2-norm target evenly: `e_i = ε / √n`.
    pub fn uniform(eps: f64, dim: usize, delta: f64) -> Result<Self, CertError> {
        let share = eps / (dim as f64).sqrt();
        Self::new(vec![share; dim], delta)
    }

    /// Split a scalar 2-norm target proportionally to non-negative
    /// weights, preserving `‖e‖₂ = ε`.
    pub fn weighted(eps: f64, weights: &[f64], delta: f64) -> Result<Self, CertError> {
        let norm = weights.iter().map(|w| w * w).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Self::uniform(eps, weights.len(), delta);
        }
        Self::new(weights.iter().map(|w| eps * w / norm).collect(), delta)
    }

    pub fn per_component(&self) -> &[f64] {
        &self.per_component
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `‖e‖₂`, the scalar error reported for comparability.
    pub fn reported_eps(&self) -> f64 {
        self.per_component.iter().map(|e| e * e).sum::<f64>().sqrt()
    }

    /// `e_i − δ`, the residual bounds certification must prove.
    pub fn thresholds(&self) -> Result<Vec<f64>, CertError> {
        self.per_component
            .iter()
            .enumerate()
            .map(|(component, &value)| {
                if value > self.delta {
                    Ok(value - self.delta)
                } else {
                    Err(CertError::TargetBelowDisturbance {
                        component,
                        value,
                        delta: self.delta,
                    })
                }
            })
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.per_component.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertBudget {
    /// Maximum number of boxes processed before giving up.
    pub max_boxes: u64,
    /// Minimum box width per axis, relative to the domain width.
    pub min_width_rel: f64,
    /// Worker count for wave processing; results are identical for any
    /// value (waves are mapped order-preservingly).
    pub threads: usize,
    /// Keep certified leaves and their enclosures as a proof artifact.
    pub collect_leaves: bool,
}

impl Default for CertBudget {
    fn default() -> Self {
        Self {
            max_boxes: 2_000_000,
            min_width_rel: 1e-4,
            threads: 1,
            collect_leaves: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CertVerdict {
    Certified,
    Counterexample {
        point: Vec<f64>,
        violated: Vec<usize>,
        /// `max_i (|r_i| − (e_i − δ))` at the point; strictly positive.
        margin: f64,
    },
    Inconclusive {
        worst_box: IntervalBox,
        overshoot: f64,
        reason: InconclusiveReason,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InconclusiveReason {
    /// Boxes at minimum width that neither certify nor concretely violate.
    MinWidth,
    BoxBudget,
    Deadline,
}

/// A certified leaf box with its residual enclosure (proof artifact).
#[derive(Debug, Clone)]
pub struct CertLeaf {
    pub bx: IntervalBox,
    pub residual: Vec<Interval>,
}

#[derive(Debug, Clone)]
pub struct CertResult {
    pub verdict: CertVerdict,
    pub boxes_processed: u64,
    /// Per-component maximum of the residual-enclosure upper bounds over
    /// all processed leaves. Under a `Certified` verdict this is itself
    /// a certified global residual bound (≤ the target thresholds).
    pub max_residual_upper: Vec<f64>,
    pub leaves: Option<Vec<CertLeaf>>,
}

impl CertResult {
    pub fn is_certified(&self) -> bool {
        matches!(self.verdict, CertVerdict::Certified)
    }
}

/// Anything with a pointwise residual and a sound interval enclosure of
/// it. The certifier proper works against this; the network residual
/// and the mesh-interpolant residual both implement it.
pub(crate) trait ResidualSystem: Sync {
    fn components(&self) -> usize;
    fn enclosure(&self, bx: &IntervalBox) -> Result<Vec<Interval>, DomainError>;
    fn point(&self, x: &[f64]) -> Result<Vec<f64>, DomainError>;
}

pub(crate) struct NetResidual<'a> {
    pub model: &'a DynamicalModel,
    pub net: &'a NeuralNet,
}

impl ResidualSystem for NetResidual<'_> {
    fn components(&self) -> usize {
        self.model.dim()
    }

    fn enclosure(&self, bx: &IntervalBox) -> Result<Vec<Interval>, DomainError> {
        // Affine forms cancel the common linear part of f and N; the
        // plain interval route is kept as an intersection partner (both
        // are sound, so their intersection is too).
        let aa = crate::affine::residual_enclosure(&self.model.flow, self.net, bx)?;
        let f = self.model.eval_interval(bx)?;
        let n = self
            .net
            .interval_forward(bx.axes())
            .expect("network dimension matches model");
        Ok(aa
            .iter()
            .zip(f.iter().zip(&n))
            .map(|(a, (fi, ni))| {
                let plain = fi.sub(*ni);
                a.intersect(plain).unwrap_or_else(|| a.hull(plain))
            })
            .collect())
    }

    fn point(&self, x: &[f64]) -> Result<Vec<f64>, DomainError> {
        let f = self.model.eval(x)?;
        let n = self.net.forward(x).expect("network dimension matches model");
        Ok(f.iter().zip(&n).map(|(fi, ni)| fi - ni).collect())
    }
}

/// Branching heuristic: the axis maximising split-eligible width times
/// sensitivity, ties to the lowest index.
pub fn pick_split(
    bx: &IntervalBox,
    residual_widths: &[f64],
    min_widths: &[f64],
) -> Result<usize, CertError> {
    let mut best: Option<(usize, f64)> = None;
    for axis in 0..bx.dim() {
        let width = bx.axis(axis).width();
        if width < min_widths[axis] {
            continue;
        }
        let score = width * residual_widths[axis].max(1e-300);
        match best {
            Some((_, s)) if score <= s => {}
            _ => best = Some((axis, score)),
        }
    }
    best.map(|(axis, _)| axis).ok_or(CertError::DegenerateBox)
}

/// Decide the bound over the model domain. See module docs.
pub fn certify(
    model: &DynamicalModel,
    net: &NeuralNet,
    target: &ErrorBound,
    budget: &CertBudget,
) -> Result<CertResult, CertError> {
    certify_deadline(model, net, target, budget, &crate::clock::NoClock, f64::INFINITY)
}

/// [`certify`] with a wall-clock deadline (in `clock` seconds). Hitting
/// the deadline aborts with `Inconclusive`; it never alters the content
/// of a completed verdict.
pub fn certify_deadline(
    model: &DynamicalModel,
    net: &NeuralNet,
    target: &ErrorBound,
    budget: &CertBudget,
    clock: &dyn Clock,
    deadline_secs: f64,
) -> Result<CertResult, CertError> {
    let residual = NetResidual { model, net };
    decide(
        &residual,
        &model.domain,
        None,
        target,
        budget,
        clock,
        deadline_secs,
    )
}

/// Outcome of processing one box.
enum BoxOutcome {
    Certified { upper: Vec<f64> },
    Cex { point: Vec<f64>, violated: Vec<usize>, margin: f64 },
    Split { axis: usize, upper: Vec<f64> },
    MinWidth { overshoot: f64, upper: Vec<f64> },
    OutsideRegion,
}

pub(crate) fn decide(
    residual: &dyn ResidualSystem,
    domain: &IntervalBox,
    region: Option<&Polyhedron>,
    target: &ErrorBound,
    budget: &CertBudget,
    clock: &dyn Clock,
    deadline_secs: f64,
) -> Result<CertResult, CertError> {
    let thresholds = target.thresholds()?;
    let min_widths: Vec<f64> = domain
        .widths()
        .iter()
        .map(|w| w * budget.min_width_rel)
        .collect();

    let mut frontier = vec![domain.clone()];
    let mut processed: u64 = 0;
    let mut sup = vec![0.0f64; residual.components()];
    let mut worst: Option<(IntervalBox, f64)> = None;
    let mut leaves: Option<Vec<CertLeaf>> = budget.collect_leaves.then(Vec::new);
    let mut inconclusive_reason: Option<InconclusiveReason> = None;

    while !frontier.is_empty() {
        if clock.elapsed_secs() > deadline_secs {
            inconclusive_reason = Some(InconclusiveReason::Deadline);
            let bx = frontier.swap_remove(0);
            worst = Some(worst_of(worst, (bx, f64::INFINITY)));
            break;
        }
        let slots = (budget.max_boxes - processed) as usize;
        if slots == 0 {
            inconclusive_reason = Some(InconclusiveReason::BoxBudget);
            let bx = frontier.swap_remove(0);
            worst = Some(worst_of(worst, (bx, f64::INFINITY)));
            break;
        }
        let take = frontier.len().min(slots);
        let wave: Vec<IntervalBox> = frontier.drain(..take).collect();
        processed += wave.len() as u64;

        let outcomes = process_wave(residual, &wave, region, &thresholds, &min_widths, budget)?;

        let mut next = Vec::new();
        for (bx, outcome) in wave.into_iter().zip(outcomes) {
            match outcome {
                BoxOutcome::Certified { upper } => {
                    fold_sup(&mut sup, &upper);
                    if let Some(ls) = leaves.as_mut() {
                        let residual_enc = residual.enclosure(&bx)?;
                        ls.push(CertLeaf {
                            bx,
                            residual: residual_enc,
                        });
                    }
                }
                BoxOutcome::Cex {
                    point,
                    violated,
                    margin,
                } => {
                    return Ok(CertResult {
                        verdict: CertVerdict::Counterexample {
                            point,
                            violated,
                            margin,
                        },
                        boxes_processed: processed,
                        max_residual_upper: sup,
                        leaves,
                    });
                }
                BoxOutcome::Split { axis, upper } => {
                    fold_sup(&mut sup, &upper);
                    let (lo, hi) = bx.split(axis);
                    next.push(lo);
                    next.push(hi);
                }
                BoxOutcome::MinWidth { overshoot, upper } => {
                    fold_sup(&mut sup, &upper);
                    inconclusive_reason.get_or_insert(InconclusiveReason::MinWidth);
                    worst = Some(worst_of(worst, (bx, overshoot)));
                }
                BoxOutcome::OutsideRegion => {}
            }
        }
        // Depth-first flavour: children precede untouched frontier tail.
        next.extend(frontier);
        frontier = next;
    }

    let verdict = match (inconclusive_reason, worst) {
        (None, None) => CertVerdict::Certified,
        (Some(reason), Some((worst_box, overshoot))) => CertVerdict::Inconclusive {
            worst_box,
            overshoot,
            reason,
        },
        (Some(reason), None) => CertVerdict::Inconclusive {
            worst_box: domain.clone(),
            overshoot: f64::INFINITY,
            reason,
        },
        (None, Some((worst_box, overshoot))) => CertVerdict::Inconclusive {
            worst_box,
            overshoot,
            reason: InconclusiveReason::MinWidth,
        },
    };
    Ok(CertResult {
        verdict,
        boxes_processed: processed,
        max_residual_upper: sup,
        leaves,
    })
}

fn worst_of(
    current: Option<(IntervalBox, f64)>,
    candidate: (IntervalBox, f64),
) -> (IntervalBox, f64) {
    match current {
        Some(c) if c.1 >= candidate.1 => c,
        _ => candidate,
    }
}

fn fold_sup(sup: &mut [f64], upper: &[f64]) {
    for (s, u) in sup.iter_mut().zip(upper) {
        *s = s.max(*u);
    }
}

fn process_wave(
    residual: &dyn ResidualSystem,
    wave: &[IntervalBox],
    region: Option<&Polyhedron>,
    thresholds: &[f64],
    min_widths: &[f64],
    budget: &CertBudget,
) -> Result<Vec<BoxOutcome>, CertError> {
    #[cfg(feature = "rayon")]
    if budget.threads > 1 {
        use rayon::prelude::*;
        return wave
            .par_iter()
            .map(|bx| process_box(residual, bx, region, thresholds, min_widths))
            .collect();
    }
    let _ = budget;
    wave.iter()
        .map(|bx| process_box(residual, bx, region, thresholds, min_widths))
        .collect()
}

/// Interval lower bound of `a·x − c` over a box; positive means the box
/// lies strictly outside the halfspace.
fn halfspace_min_violation(h: &crate::poly::Halfspace, bx: &IntervalBox) -> f64 {
    let mut lo = -h.offset;
    for (a, iv) in h.normal.iter().zip(bx.axes()) {
        lo += if *a >= 0.0 { a * iv.lo } else { a * iv.hi };
    }
    lo
}

fn box_outside_region(region: &Polyhedron, bx: &IntervalBox) -> bool {
    region
        .halfspaces()
        .iter()
        .any(|h| halfspace_min_violation(h, bx) > 0.0)
}

fn process_box(
    residual: &dyn ResidualSystem,
    bx: &IntervalBox,
    region: Option<&Polyhedron>,
    thresholds: &[f64],
    min_widths: &[f64],
) -> Result<BoxOutcome, CertError> {
    if let Some(r) = region {
        if box_outside_region(r, bx) {
            return Ok(BoxOutcome::OutsideRegion);
        }
    }
    let enc = residual.enclosure(bx)?;
    let upper: Vec<f64> = enc.iter().map(|iv| iv.abs_max()).collect();
    if upper.iter().zip(thresholds).all(|(u, t)| u <= t) {
        return Ok(BoxOutcome::Certified { upper });
    }

    // Concrete counterexample candidates: midpoint, then the corner the
    // sensitivity signs point at for the worst component.
    let mid = bx.midpoint();
    let in_region = |x: &[f64]| region.is_none_or(|r| r.contains(x, 1e-12));
    let mid_res = residual.point(&mid)?;
    if in_region(&mid) {
        if let Some((violated, margin)) = violation(&mid_res, thresholds) {
            return Ok(BoxOutcome::Cex {
                point: mid,
                violated,
                margin,
            });
        }
    }

    let worst_component = upper
        .iter()
        .zip(thresholds)
        .enumerate()
        .max_by(|(_, (u1, t1)), (_, (u2, t2))| {
            (*u1 - *t1).partial_cmp(&(*u2 - *t2)).unwrap()
        })
        .map(|(i, _)| i)
        .unwrap_or(0);

    // Per-axis sensitivity by central differences at the midpoint; also
    // steers the corner pick.
    let n = bx.dim();
    let mut sens = vec![0.0f64; n];
    let mut corner = mid.clone();
    for axis in 0..n {
        let h = 0.25 * bx.axis(axis).width();
        if h == 0.0 {
            continue;
        }
        let mut plus = mid.clone();
        plus[axis] += h;
        let mut minus = mid.clone();
        minus[axis] -= h;
        let (rp, rm) = (residual.point(&plus)?, residual.point(&minus)?);
        sens[axis] = rp
            .iter()
            .zip(&rm)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        corner[axis] = if rp[worst_component].abs() >= rm[worst_component].abs() {
            bx.axis(axis).hi
        } else {
            bx.axis(axis).lo
        };
    }
    if in_region(&corner) {
        let corner_res = residual.point(&corner)?;
        if let Some((violated, margin)) = violation(&corner_res, thresholds) {
            return Ok(BoxOutcome::Cex {
                point: corner,
                violated,
                margin,
            });
        }
    }

    match pick_split(bx, &sens, min_widths) {
        Ok(axis) => Ok(BoxOutcome::Split { axis, upper }),
        Err(CertError::DegenerateBox) => {
            let overshoot = upper
                .iter()
                .zip(thresholds)
                .map(|(u, t)| u - t)
                .fold(f64::NEG_INFINITY, f64::max);
            Ok(BoxOutcome::MinWidth { overshoot, upper })
        }
        Err(e) => Err(e),
    }
}

fn violation(res: &[f64], thresholds: &[f64]) -> Option<(Vec<usize>, f64)> {
    let mut violated = Vec::new();
    let mut margin = 0.0f64;
    for (i, (r, t)) in res.iter().zip(thresholds).enumerate() {
        let over = r.abs() - t;
        if over > 0.0 {
            violated.push(i);
            margin = margin.max(over);
        }
    }
    (!violated.is_empty()).then_some((violated, margin))
}

/// Tighten a certified sup: branch-and-bound that refines until the gap
/// between the certified upper bound and the best concrete evaluation is
/// below `gap_rel`/`gap_abs`, then reports per-component sup bounds.
/// Used by the mesh baseline, where the interesting output is the bound
/// itself rather than a pass/fail verdict.
pub(crate) fn bound_sup(
    residual: &dyn ResidualSystem,
    domain: &IntervalBox,
    region: Option<&Polyhedron>,
    budget: &CertBudget,
    gap_rel: f64,
    gap_abs: f64,
) -> Result<BoundSupResult, CertError> {
    let ncomp = residual.components();
    let min_widths: Vec<f64> = domain
        .widths()
        .iter()
        .map(|w| w * budget.min_width_rel)
        .collect();
    let mut frontier = vec![domain.clone()];
    let mut upper = vec![0.0f64; ncomp]; // sup of leaf upper bounds
    let mut lower = vec![0.0f64; ncomp]; // best concrete |residual|
    let mut processed: u64 = 0;
    let mut truncated = false;

    while !frontier.is_empty() {
        let slots = (budget.max_boxes - processed) as usize;
        if slots == 0 {
            truncated = true;
            // Remaining boxes still contribute their enclosure bounds.
            for bx in &frontier {
                if region.is_some_and(|r| box_outside_region(r, bx)) {
                    continue;
                }
                let enc = residual.enclosure(bx)?;
                for (u, iv) in upper.iter_mut().zip(&enc) {
                    *u = u.max(iv.abs_max());
                }
            }
            break;
        }
        let take = frontier.len().min(slots);
        let wave: Vec<IntervalBox> = frontier.drain(..take).collect();
        processed += wave.len() as u64;

        let mut next = Vec::new();
        for bx in wave {
            if region.is_some_and(|r| box_outside_region(r, &bx)) {
                continue;
            }
            let enc = residual.enclosure(&bx)?;
            let box_upper: Vec<f64> = enc.iter().map(|iv| iv.abs_max()).collect();
            let mid = bx.midpoint();
            if region.is_none_or(|r| r.contains(&mid, 1e-12)) {
                let res = residual.point(&mid)?;
                for (l, r) in lower.iter_mut().zip(&res) {
                    *l = l.max(r.abs());
                }
            }
            let keep_refining = box_upper.iter().zip(&lower).any(|(u, l)| {
                *u > l + gap_abs.max(gap_rel * l)
            });
            let splittable = bx
                .widths()
                .iter()
                .zip(&min_widths)
                .any(|(w, m)| w >= m);
            if keep_refining && splittable {
                let sens = vec![1.0; bx.dim()];
                let axis = pick_split(&bx, &sens, &min_widths)?;
                let (lo, hi) = bx.split(axis);
                next.push(lo);
                next.push(hi);
            } else {
                for (u, bu) in upper.iter_mut().zip(&box_upper) {
                    *u = u.max(*bu);
                }
            }
        }
        next.extend(frontier);
        frontier = next;
    }

    Ok(BoundSupResult {
        upper,
        lower,
        boxes_processed: processed,
        truncated,
    })
}

#[derive(Debug, Clone)]
#[allow(dead_code)]
pub(crate) struct BoundSupResult {
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
    pub boxes_processed: u64,
    pub truncated: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::train::random_net;
    use nalgebra::{DMatrix, DVector};
    use rand::SeedableRng;

    fn square_model() -> DynamicalModel {
        DynamicalModel {
            name: "sq".into(),
            variables: vec!["x".into()],
            flow: vec![parse("x^2", &["x"]).unwrap()],
            delta: 0.0,
            domain: IntervalBox::from_bounds(&[(-1.0, 1.0)]),
            init: IntervalBox::from_bounds(&[(-0.1, 0.1)]),
            bad: IntervalBox::from_bounds(&[(0.9, 1.0)]),
            horizon: 1.0,
        }
    }

    fn zero_net() -> NeuralNet {
        NeuralNet::new(
            vec![DMatrix::zeros(1, 1), DMatrix::zeros(1, 1)],
            vec![DVector::zeros(1), DVector::zeros(1)],
        )
        .unwrap()
    }

    #[test]
    fn certifies_square_against_zero_net() {
        // max |x^2 - 0| = 1 at x = ±1; bound 1 + 1e-9 certifies.
        let model = square_model();
        let target = ErrorBound::new(vec![1.0 + 1e-9], 0.0).unwrap();
        let result = certify(&model, &zero_net(), &target, &CertBudget::default()).unwrap();
        assert!(result.is_certified(), "{:?}", result.verdict);
        assert!(result.max_residual_upper[0] <= 1.0 + 1e-9);
        assert!(result.max_residual_upper[0] >= 0.99);
    }

    #[test]
    fn finds_counterexample_beyond_threshold() {
        let model = square_model();
        let target = ErrorBound::new(vec![0.5], 0.0).unwrap();
        let result = certify(&model, &zero_net(), &target, &CertBudget::default()).unwrap();
        match result.verdict {
            CertVerdict::Counterexample { point, margin, .. } => {
                assert!(point[0].abs() > 0.7071, "cex at {point:?}");
                assert!(margin > 0.0);
                // Re-validate under exact evaluation.
                let r = model.eval(&point).unwrap()[0];
                assert!(r.abs() > 0.5);
            }
            other => panic!("expected counterexample, got {other:?}"),
        }
    }

    #[test]
    fn exact_representation_certifies_any_bound() {
        // N(x) = relu(x) - relu(-x) = x exactly; f(x) = x.
        let net = NeuralNet::new(
            vec![
                DMatrix::from_row_slice(2, 1, &[1.0, -1.0]),
                DMatrix::from_row_slice(1, 2, &[1.0, -1.0]),
            ],
            vec![DVector::zeros(2), DVector::zeros(1)],
        )
        .unwrap();
        let model = DynamicalModel {
            flow: vec![parse("x", &["x"]).unwrap()],
            ..square_model()
        };
        let target = ErrorBound::new(vec![1e-6], 0.0).unwrap();
        let result = certify(&model, &net, &target, &CertBudget::default()).unwrap();
        assert!(result.is_certified(), "{:?}", result.verdict);
    }

    #[test]
    fn rejects_bound_at_disturbance() {
        let target = ErrorBound::new(vec![0.0], 0.0).unwrap();
        let err = certify(
            &square_model(),
            &zero_net(),
            &target,
            &CertBudget::default(),
        )
        .unwrap_err();
        assert!(matches!(err, CertError::TargetBelowDisturbance { .. }));
    }

    #[test]
    fn pick_split_prefers_dominant_width() {
        let bx = IntervalBox::from_bounds(&[(-1.0, 1.0), (-0.01, 0.01)]);
        let axis = pick_split(&bx, &[1.0, 1.0], &[1e-6, 1e-6]).unwrap();
        assert_eq!(axis, 0);
    }

    #[test]
    fn pick_split_follows_sensitivity() {
        let bx = IntervalBox::from_bounds(&[(0.0, 1.0), (0.0, 1.0), (0.0, 1.0)]);
        let axis = pick_split(&bx, &[0.1, 0.2, 5.0], &[1e-6; 3]).unwrap();
        assert_eq!(axis, 2);
    }

    #[test]
    fn pick_split_ties_to_lowest_index() {
        let bx = IntervalBox::from_bounds(&[(0.0, 1.0), (0.0, 1.0)]);
        let axis = pick_split(&bx, &[1.0, 1.0], &[1e-6, 1e-6]).unwrap();
        assert_eq!(axis, 0);
    }

    #[test]
    fn pick_split_degenerate() {
        let bx = IntervalBox::from_bounds(&[(0.0, 1e-9), (0.0, 1e-9)]);
        assert!(matches!(
            pick_split(&bx, &[1.0, 1.0], &[1e-3, 1e-3]),
            Err(CertError::DegenerateBox)
        ));
    }

    /// Monotonicity: a certificate at `e` implies one at any `e' ≥ e`.
    #[test]
    fn certification_monotone_in_bound() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let model = DynamicalModel {
            variables: vec!["x".into(), "y".into()],
            flow: vec![
                parse("sin(x) + y^2", &["x", "y"]).unwrap(),
                parse("x - y", &["x", "y"]).unwrap(),
            ],
            domain: IntervalBox::from_bounds(&[(-1.0, 1.0), (-1.0, 1.0)]),
            init: IntervalBox::from_bounds(&[(-0.1, 0.1), (-0.1, 0.1)]),
            bad: IntervalBox::from_bounds(&[(0.9, 1.0), (0.9, 1.0)]),
            ..square_model()
        };
        let net = random_net(&[2, 6, 2], &mut rng);
        let budget = CertBudget {
            max_boxes: 100_000,
            ..CertBudget::default()
        };
        for eps in [1.0, 1.5, 2.5, 4.0] {
            let t1 = ErrorBound::uniform(eps, 2, 0.0).unwrap();
            let t2 = ErrorBound::uniform(eps * 1.5, 2, 0.0).unwrap();
            let r1 = certify(&model, &net, &t1, &budget).unwrap();
            let r2 = certify(&model, &net, &t2, &budget).unwrap();
            if r1.is_certified() {
                assert!(r2.is_certified(), "eps={eps}: tighter certified but looser not");
            }
        }
    }
}
