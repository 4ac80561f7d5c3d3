//! Flowpipe reachability of the abstract automaton, plus the concrete
//! RK4 simulator used as a validation oracle.
//!
//! Within a mode `ẋ = A x + b + d`, `d ∈ ∏[−e_i, e_i]`, the discrete
//! recurrence is
//!
//! ```text
//! X_{k+1} = e^{Ah}·X_k ⊕ {Φ₁(A,h)·b} ⊕ D_h,   D_h = □(Φ₁(|A|,h)·e)
//! ```
//!
//! which is sound because `x(h) = e^{Ah}x₀ + Φ₁(A,h)b + ∫₀ʰe^{A(h−s)}d(s)ds`
//! and the disturbance integral is bounded entrywise by `Φ₁(|A|,h)·e`.
//! The segment covering `[t_k, t_{k+1}]` is the convex-hull enclosure of
//! `X_k` and `X_{k+1}` bloated by `α_h + α_b`, the standard first-order
//! curvature bounds (`α_h = (e^{rh}−1−rh)·max‖x‖∞`, `α_b` the matching
//! input term), plus a configurable safety inflation absorbing the
//! non-rigorous matrix exponential.
//!
//! Mode switching is conservative: whenever a segment may meet a
//! transition's guard (the destination invariant), the box hull of the
//! intersection seeds a successor branch. Successors spawned into the
//! same (mode, step) merge by box hull; spawned branches carry an entry
//! jitter of one merge window, implemented by hulling consecutive
//! segments, so trajectories entering anywhere in the window stay
//! covered despite the time realignment. A branch ends when its segment
//! provably leaves the mode invariant (trajectories beyond that point
//! are covered by successors, or have left the domain and stopped being
//! trajectories of the model). The verdict is `Safe` or `Unknown`,
//! never `Unsafe`: the abstraction overapproximates, so only safety
//! transfers to the concrete model.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::expm::exp_and_phi;
use crate::hybrid::{HybridAutomaton, Mode};
use crate::interval::{DomainError, IntervalBox};
use crate::model::DynamicalModel;
use crate::poly::{bbox as poly_bbox, LpError, Polyhedron};
use crate::zonotope::Zonotope;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SafetyVerdict {
    Safe,
    Unknown,
}

#[derive(Debug, Clone)]
pub struct ReachSegment {
    pub mode: usize,
    /// Branch that produced the segment (diagnostics).
    pub branch: usize,
    pub t_lo: f64,
    pub t_hi: f64,
    pub set: Zonotope,
    pub bbox: IntervalBox,
    /// Bounding box provably inside the mode invariant (no crossing
    /// checks needed).
    pub fully_inside: bool,
}

#[derive(Debug, Clone, Default)]
pub struct ReachStats {
    pub branches: usize,
    /// (start_step, mode, entry box) per launched branch (diagnostics).
    pub branch_log: Vec<(usize, usize, IntervalBox)>,
    pub segments: usize,
    pub merges: usize,
    pub max_order: usize,
    pub branch_cap_hit: bool,
    /// Index of the first segment that could not be separated from the
    /// bad set, when the verdict is `Unknown`.
    pub first_hit: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Flowpipe {
    pub segments: Vec<ReachSegment>,
    pub verdict: SafetyVerdict,
    pub stats: ReachStats,
}

#[derive(Debug, Clone)]
pub struct ReachConfig {
    pub step: f64,
    /// Cap on spawned branches; beyond it the verdict is `Unknown`.
    pub branch_cap: usize,
    /// Zonotope order cap for propagated sets.
    pub order_cap: usize,
    /// Order cap for stored segment sets (memory control).
    pub store_order: usize,
    /// Absolute bloating added each step, absorbing the non-rigorous
    /// matrix exponential.
    pub safety_inflation: f64,
}

impl Default for ReachConfig {
    fn default() -> Self {
        Self {
            step: 0.01,
            branch_cap: 10_000,
            order_cap: 20,
            store_order: 6,
            safety_inflation: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReachError {
    #[error("the initial set intersects no mode invariant")]
    EmptyInit,
    #[error("zonotope order {order} exceeded the cap {cap} after reduction")]
    OrderOverflow { order: usize, cap: usize },
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Precomputed one-step operator for a mode.
struct StepOp {
    e_ah: DMatrix<f64>,
    phi_b: DVector<f64>,
    dist_radii: Vec<f64>,
    /// `e^{rh} − 1 − rh` with `r = ‖A‖∞`.
    curvature: f64,
    /// Input chord-deviation radius `((e^{rh}−1−rh)/r)·‖b‖∞`.
    input_dev: f64,
    inflation: f64,
}

impl StepOp {
    fn new(mode: &Mode, h: f64, inflation: f64) -> Self {
        Self::with_extra_disturbance(mode, h, inflation, &[])
    }

    /// Step operator with additional per-component disturbance radii on
    /// top of the mode's own box (used for mode-disagreement terms).
    fn with_extra_disturbance(mode: &Mode, h: f64, inflation: f64, extra: &[f64]) -> Self {
        let (e_ah, phi) = exp_and_phi(&mode.flow_a, h);
        let phi_b = &phi * &mode.flow_b;
        let abs_a = mode.flow_a.abs();
        let (_, phi_abs) = exp_and_phi(&abs_a, h);
        let e_vec = DVector::from_iterator(
            mode.disturbance.dim(),
            mode.disturbance
                .axes()
                .iter()
                .enumerate()
                .map(|(i, a)| a.hi + extra.get(i).copied().unwrap_or(0.0)),
        );
        let dist = &phi_abs * &e_vec;
        let r = (0..mode.flow_a.nrows())
            .map(|i| mode.flow_a.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0f64, f64::max);
        let rh = r * h;
        let curvature = if rh > 1e-300 { rh.exp() - 1.0 - rh } else { 0.0 };
        let b_norm = mode.flow_b.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let input_dev = if r > 1e-300 { curvature / r * b_norm } else { 0.0 };
        Self {
            e_ah,
            phi_b,
            dist_radii: dist.iter().map(|v| v + inflation).collect(),
            curvature,
            input_dev,
            inflation,
        }
    }

    fn advance(&self, x: &Zonotope, order_cap: usize) -> Zonotope {
        x.linear_map(&self.e_ah)
            .translate(&self.phi_b)
            .minkowski_box(&self.dist_radii)
            .reduce(order_cap)
    }

    fn segment_set(&self, x: &Zonotope, x_next: &Zonotope) -> Zonotope {
        let r_k = x
            .bbox()
            .axes()
            .iter()
            .map(|a| a.abs_max())
            .fold(0.0, f64::max);
        let gamma = self.curvature * r_k + self.input_dev + self.inflation;
        let radii = vec![gamma; x.dim()];
        x.hull_enclosure(x_next).minkowski_box(&radii)
    }
}

/// Tight bounding box of `set ∩ guard`, solved as an LP over the
/// zonotope's generator coefficients; `None` when the intersection is
/// empty. Much sharper than boxing the zonotope first when the set is
/// elongated diagonally.
fn zonotope_guard_bbox(
    set: &Zonotope,
    guard: &Polyhedron,
) -> Result<Option<IntervalBox>, LpError> {
    use crate::simplex::{maximize, LpOutcome};
    let n = set.dim();
    let m = set.num_generators();
    let center = set.center();
    if m == 0 {
        let point: Vec<f64> = center.iter().copied().collect();
        if guard.contains(&point, 1e-9) {
            return Ok(Some(IntervalBox::new(
                point
                    .iter()
                    .map(|&v| crate::interval::Interval::new(v, v))
                    .collect(),
            )));
        }
        return Ok(None);
    }
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for h in guard.halfspaces() {
        if h.is_trivial() {
            if h.offset < 0.0 {
                return Ok(None);
            }
            continue;
        }
        let row: Vec<f64> = (0..m)
            .map(|j| h.normal.dot(&set.generators().column(j)))
            .collect();
        let scale = row
            .iter()
            .fold(0.0f64, |a, v| a.max(v.abs()))
            .max(1e-300);
        rhs.push((h.offset - h.normal.dot(center)) / scale);
        rows.push(row.into_iter().map(|v| v / scale).collect::<Vec<f64>>());
    }
    let bounds = vec![(-1.0, 1.0); m];
    let mut axes = Vec::with_capacity(n);
    for i in 0..n {
        let obj: Vec<f64> = (0..m).map(|j| set.generators()[(i, j)]).collect();
        let neg: Vec<f64> = obj.iter().map(|v| -v).collect();
        let hi = match maximize(&obj, &rows, &rhs, &bounds)? {
            LpOutcome::Optimal { objective, .. } => center[i] + objective,
            _ => return Ok(None),
        };
        let lo = match maximize(&neg, &rows, &rhs, &bounds)? {
            LpOutcome::Optimal { objective, .. } => center[i] - objective,
            _ => return Ok(None),
        };
        axes.push(crate::interval::Interval::new(lo.min(hi), hi.max(lo)));
    }
    Ok(Some(IntervalBox::new(axes)))
}

/// Interval check: is the box provably outside the polyhedron?
fn box_outside(poly: &Polyhedron, bx: &IntervalBox) -> bool {
    poly.halfspaces().iter().any(|h| {
        let mut lo = -h.offset;
        for (a, iv) in h.normal.iter().zip(bx.axes()) {
            lo += if *a >= 0.0 { a * iv.lo } else { a * iv.hi };
        }
        lo > 0.0
    })
}

/// Interval check: is the box provably inside the polyhedron?
fn box_inside(poly: &Polyhedron, bx: &IntervalBox, tol: f64) -> bool {
    poly.halfspaces().iter().all(|h| {
        let mut hi = -h.offset;
        for (a, iv) in h.normal.iter().zip(bx.axes()) {
            hi += if *a >= 0.0 { a * iv.hi } else { a * iv.lo };
        }
        hi <= tol
    })
}

pub struct ModeRun {
    pub segments: Vec<ReachSegment>,
    /// The propagation stopped because the set provably left the
    /// invariant (as opposed to reaching the horizon).
    pub exited: bool,
}

/// Propagate one branch inside one mode from `t0` to the horizon.
pub fn mode_flowpipe(
    mode: &Mode,
    init: &Zonotope,
    t0: f64,
    horizon: f64,
    cfg: &ReachConfig,
) -> Result<ModeRun, ReachError> {
    let start = (t0 / cfg.step).round() as usize;
    let total = total_steps(horizon, cfg.step);
    let op = StepOp::new(mode, cfg.step, cfg.safety_inflation);
    propagate(mode, &op, init, start, total, cfg)
}

fn total_steps(horizon: f64, h: f64) -> usize {
    ((horizon / h) - 1e-9).ceil().max(1.0) as usize
}

fn propagate(
    mode: &Mode,
    op: &StepOp,
    init: &Zonotope,
    start_step: usize,
    total_steps: usize,
    cfg: &ReachConfig,
) -> Result<ModeRun, ReachError> {
    let mut x = init.reduce(cfg.order_cap);
    let mut segments = Vec::new();
    let mut exited = false;

    for k in start_step..total_steps {
        let x_next = op.advance(&x, cfg.order_cap);
        if x_next.order() > cfg.order_cap {
            return Err(ReachError::OrderOverflow {
                order: x_next.order(),
                cap: cfg.order_cap,
            });
        }
        let set = op.segment_set(&x, &x_next);
        match finish_segment(mode, set, k, cfg)? {
            Some(seg) => segments.push(seg),
            None => {
                exited = true;
                break;
            }
        }
        x = x_next;
    }
    Ok(ModeRun { segments, exited })
}

/// Clip, classify, and package a segment set; `None` when the set is
/// provably outside the invariant (the branch ends there).
fn finish_segment(
    mode: &Mode,
    set: Zonotope,
    k: usize,
    cfg: &ReachConfig,
) -> Result<Option<ReachSegment>, ReachError> {
    let raw_bbox = set.bbox();
    if box_outside(&mode.invariant, &raw_bbox) {
        return Ok(None);
    }
    let fully_inside = box_inside(&mode.invariant, &raw_bbox, 1e-9);
    // Trajectories attributed to this mode satisfy its invariant, so
    // the reported extent may be clipped to it; this removes the
    // overhang a set straddling the boundary would otherwise drag into
    // the safety check.
    let bbox = if fully_inside {
        raw_bbox
    } else {
        let meet = mode
            .invariant
            .intersect_poly(&Polyhedron::from_box(&raw_bbox));
        match poly_bbox(&meet)? {
            Some(clipped) => clipped,
            None => return Ok(None),
        }
    };
    Ok(Some(ReachSegment {
        mode: mode.id,
        branch: 0,
        t_lo: k as f64 * cfg.step,
        t_hi: (k + 1) as f64 * cfg.step,
        set: set.reduce(cfg.store_order),
        bbox,
        fully_inside,
    }))
}

/// Region against which flowpipe segments are tested.
#[derive(Debug, Clone)]
pub enum BadRegion {
    Box(IntervalBox),
    Polyhedron(Polyhedron),
}

#[derive(Debug, Clone)]
pub struct SafetyCheck {
    pub verdict: SafetyVerdict,
    pub first_hit: Option<usize>,
}

/// Conservative emptiness test of every segment against the bad set:
/// bounding-box disjointness first, then support-function separation
/// along the bad region's facet normals. `Safe` only when every segment
/// is provably separated.
pub fn check_safety(segments: &[ReachSegment], bad: &BadRegion) -> SafetyCheck {
    for (idx, seg) in segments.iter().enumerate() {
        let separated = match bad {
            BadRegion::Box(b) => !seg.bbox.intersects(b),
            BadRegion::Polyhedron(p) => {
                if let Ok(Some(bb)) = poly_bbox(p) {
                    if !seg.bbox.intersects(&bb) {
                        true
                    } else {
                        separated_by_facet(&seg.set, p)
                    }
                } else {
                    separated_by_facet(&seg.set, p)
                }
            }
        };
        if !separated {
            return SafetyCheck {
                verdict: SafetyVerdict::Unknown,
                first_hit: Some(idx),
            };
        }
    }
    SafetyCheck {
        verdict: SafetyVerdict::Safe,
        first_hit: None,
    }
}

/// Some facet `a·x ≤ c` of the bad polyhedron has `min_Z a·x > c`.
fn separated_by_facet(set: &Zonotope, bad: &Polyhedron) -> bool {
    bad.halfspaces().iter().any(|h| {
        if h.is_trivial() {
            return false;
        }
        let neg: Vec<f64> = h.normal.iter().map(|v| -v).collect();
        let min = -set.support(&neg);
        min > h.offset
    })
}

/// Reachability of the abstract automaton as a single-pipe integrator
/// of the piecewise-affine differential inclusion.
///
/// The automaton's trajectories satisfy `ẋ ∈ A_{C(x)} x + b_{C(x)} ⊕ D`
/// with the mode map `C(x)` given by the invariant partition. Per step,
/// the modes the current set may touch are collected; the step runs
/// with the dominant mode's matrices while every other touched mode
/// contributes its pointwise disagreement `(A_m − A_*)x + (b_m − b_*)`,
/// bounded over the swept region intersected with that mode's
/// invariant, as extra disturbance. ReLU networks are continuous, so
/// adjacent modes agree on their shared boundary and the disagreement
/// term stays proportional to how deep the set straddles — the pipe
/// pays for crossings exactly while they happen, and no branching or
/// successor re-anchoring is needed at all.
pub fn reach(ha: &HybridAutomaton, cfg: &ReachConfig) -> Result<Flowpipe, ReachError> {
    let total = total_steps(ha.horizon, cfg.step);
    if !ha.modes.iter().any(|m| m.inv_bbox.intersects(&ha.init)) {
        return Err(ReachError::EmptyInit);
    }

    let mut stats = ReachStats::default();
    stats.branches = 1;
    let mut segments: Vec<ReachSegment> = Vec::new();
    let mut x = Zonotope::from_box(&ha.init);

    for k in 0..total {
        let bbox = x.bbox();
        if !bbox.intersects(&ha.domain) {
            break; // every trajectory has left the domain
        }
        // Modes the step may touch: grow the current extent by a sound
        // one-step motion bound, iterated to a fixpoint.
        let mut swept = bbox.clone();
        let mut touched: Vec<usize> = Vec::new();
        for _ in 0..ha.modes.len() {
            let now: Vec<usize> = ha
                .modes
                .iter()
                .filter(|m| swept.intersects(&m.inv_bbox) && !box_outside(&m.invariant, &swept))
                .map(|m| m.id)
                .collect();
            let rate = now
                .iter()
                .map(|&m| mode_rate_bound(&ha.modes[m], &swept))
                .fold(0.0f64, f64::max);
            let grown = inflate_box(&bbox, 1.2 * rate * cfg.step);
            if now == touched && grown.axes().iter().zip(swept.axes()).all(|(a, b)| {
                a.lo >= b.lo - 1e-12 && a.hi <= b.hi + 1e-12
            }) {
                break;
            }
            touched = now;
            swept = grown.hull(&swept);
        }
        if touched.is_empty() {
            break; // outside every invariant: outside the domain
        }

        // Dominant mode: the one whose invariant holds the centre.
        let center: Vec<f64> = x.center().iter().copied().collect();
        let dominant = touched
            .iter()
            .copied()
            .find(|&m| ha.modes[m].invariant.contains(&center, 1e-9))
            .unwrap_or(touched[0]);
        let main = &ha.modes[dominant];

        // Disagreement of every other touched mode over the part of the
        // swept region inside its invariant.
        let mut extra = vec![0.0f64; ha.domain.dim()];
        for &m in &touched {
            if m == dominant {
                continue;
            }
            let other = &ha.modes[m];
            let Some(region) = swept.intersect(&other.inv_bbox) else {
                continue;
            };
            for i in 0..extra.len() {
                let mut dev = (other.flow_b[i] - main.flow_b[i]).abs();
                let mut hi = other.flow_b[i] - main.flow_b[i];
                let mut lo = hi;
                for j in 0..extra.len() {
                    let da = other.flow_a[(i, j)] - main.flow_a[(i, j)];
                    let iv = region.axis(j);
                    if da >= 0.0 {
                        lo += da * iv.lo;
                        hi += da * iv.hi;
                    } else {
                        lo += da * iv.hi;
                        hi += da * iv.lo;
                    }
                }
                dev = dev.max(lo.abs()).max(hi.abs());
                extra[i] = extra[i].max(dev);
            }
        }

        let op = StepOp::with_extra_disturbance(main, cfg.step, cfg.safety_inflation, &extra);
        let x_next = op.advance(&x, cfg.order_cap);
        if x_next.order() > cfg.order_cap {
            return Err(ReachError::OrderOverflow {
                order: x_next.order(),
                cap: cfg.order_cap,
            });
        }
        let set = op.segment_set(&x, &x_next);
        let raw_bbox = set.bbox();
        // Trajectories live inside the domain; clip the reported extent.
        let Some(clipped) = raw_bbox.intersect(&ha.domain) else {
            break;
        };
        stats.max_order = stats.max_order.max(set.order());
        segments.push(ReachSegment {
            mode: dominant,
            branch: 0,
            t_lo: k as f64 * cfg.step,
            t_hi: (k + 1) as f64 * cfg.step,
            set: set.reduce(cfg.store_order),
            bbox: clipped,
            fully_inside: touched.len() == 1,
        });
        x = x_next;
    }

    stats.segments = segments.len();
    let check = check_safety(&segments, &BadRegion::Box(ha.bad.clone()));
    stats.first_hit = check.first_hit;
    Ok(Flowpipe {
        segments,
        verdict: check.verdict,
        stats,
    })
}

/// Sound bound on `max |ẋ_i|` of a mode over a box (disturbance
/// included).
fn mode_rate_bound(mode: &Mode, bx: &IntervalBox) -> f64 {
    let n = bx.dim();
    let mut worst = 0.0f64;
    for i in 0..n {
        let mut mag = mode.flow_b[i].abs() + mode.disturbance.axis(i).hi;
        for j in 0..n {
            mag += mode.flow_a[(i, j)].abs() * bx.axis(j).abs_max();
        }
        worst = worst.max(mag);
    }
    worst
}

fn inflate_box(bx: &IntervalBox, pad: f64) -> IntervalBox {
    IntervalBox::new(
        bx.axes()
            .iter()
            .map(|a| crate::interval::Interval::new(a.lo - pad, a.hi + pad))
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrajectoryExit {
    LeftDomain { t: f64 },
    Undefined { t: f64 },
}

/// Fixed-step RK4 trace of the concrete model (d ≡ 0).
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub exit: Option<TrajectoryExit>,
}

/// Classical RK4 with fixed step; halts early when the state exits the
/// domain or the vector field becomes undefined.
pub fn simulate_concrete(
    model: &DynamicalModel,
    x0: &[f64],
    horizon: f64,
    h: f64,
) -> Trajectory {
    let steps = (horizon / h).round() as usize;
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut x = x0.to_vec();
    times.push(0.0);
    states.push(x.clone());
    let mut exit = None;

    'outer: for k in 0..steps {
        let t = k as f64 * h;
        let stage = |p: &[f64]| -> Result<Vec<f64>, DomainError> { model.eval(p) };
        let k1 = match stage(&x) {
            Ok(v) => v,
            Err(_) => {
                exit = Some(TrajectoryExit::Undefined { t });
                break 'outer;
            }
        };
        let mid1: Vec<f64> = x.iter().zip(&k1).map(|(a, b)| a + 0.5 * h * b).collect();
        let k2 = match stage(&mid1) {
            Ok(v) => v,
            Err(_) => {
                exit = Some(TrajectoryExit::Undefined { t });
                break 'outer;
            }
        };
        let mid2: Vec<f64> = x.iter().zip(&k2).map(|(a, b)| a + 0.5 * h * b).collect();
        let k3 = match stage(&mid2) {
            Ok(v) => v,
            Err(_) => {
                exit = Some(TrajectoryExit::Undefined { t });
                break 'outer;
            }
        };
        let end: Vec<f64> = x.iter().zip(&k3).map(|(a, b)| a + h * b).collect();
        let k4 = match stage(&end) {
            Ok(v) => v,
            Err(_) => {
                exit = Some(TrajectoryExit::Undefined { t });
                break 'outer;
            }
        };
        for i in 0..x.len() {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let t_next = (k + 1) as f64 * h;
        if !model.domain.contains(&x, 0.0) {
            exit = Some(TrajectoryExit::LeftDomain { t: t_next });
            break;
        }
        times.push(t_next);
        states.push(x.clone());
    }
    Trajectory {
        times,
        states,
        exit,
    }
}
