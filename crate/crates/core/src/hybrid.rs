//! Translation of a certified abstraction into a hybrid automaton.
//!
//! Every ReLU neuron splits the input space along a hyperplane; an
//! activation configuration (one bit per neuron) therefore fixes the
//! network to one affine function on one polyhedral region. Modes are
//! the feasible configurations; their invariants come from propagating
//! each neuron's halfspace backward through the affine restriction of
//! the layers below it (H = Σhᵢ halfspaces total, no projection step);
//! flows are the per-configuration affine maps; the disturbance box
//! `∏[−e_i, e_i]` absorbs the certified approximation error. A directed
//! transition exists wherever two closed invariants meet, with the
//! guard equal to the destination invariant.
//!
//! Feasible configurations are found by depth-first search over the
//! neuron tree: each node intersects the current region with one side
//! of a neuron's hyperplane and prunes when the intersection drops
//! below the degeneracy threshold; a neuron whose hyperplane misses the
//! region entirely is fixed to the surviving side instead of branched.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::cegis::NeuralAbstraction;
use crate::interval::IntervalBox;
use crate::model::DynamicalModel;
use crate::net::NeuralNet;
use crate::poly::{bbox, chebyshev, lp_feasible, linear_max, Halfspace, LpError, Polyhedron};

/// Activation configuration: one boolean per hidden neuron, layer by
/// layer; `true` = active (pre-activation ≥ 0, ties to active).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Configuration {
    layers: Vec<Vec<bool>>,
}

impl Configuration {
    pub fn new(layers: Vec<Vec<bool>>) -> Self {
        Self { layers }
    }

    pub fn layers(&self) -> &[Vec<bool>] {
        &self.layers
    }

    /// Concatenated bits, first layer first.
    pub fn bitstring(&self) -> String {
        self.layers
            .iter()
            .flatten()
            .map(|b| if *b { '1' } else { '0' })
            .collect()
    }

    pub fn from_bitstring(s: &str, hidden_dims: &[usize]) -> Option<Self> {
        if s.len() != hidden_dims.iter().sum::<usize>() {
            return None;
        }
        let mut bits = s.chars().map(|c| match c {
            '0' => Some(false),
            '1' => Some(true),
            _ => None,
        });
        let mut layers = Vec::with_capacity(hidden_dims.len());
        for &h in hidden_dims {
            let mut layer = Vec::with_capacity(h);
            for _ in 0..h {
                layer.push(bits.next()??);
            }
            layers.push(layer);
        }
        Some(Self { layers })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HybridError {
    #[error("feasible mode count exceeds the cap of {cap}; the network is too large for downstream reachability")]
    ModeExplosion { cap: usize },
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// The configuration realised by exact forward evaluation at a point.
pub fn config_at(net: &NeuralNet, x: &[f64]) -> Configuration {
    let pre = net
        .preactivations(x)
        .expect("input dimension matches the network");
    Configuration {
        layers: pre
            .iter()
            .map(|z| z.iter().map(|&v| v >= 0.0).collect())
            .collect(),
    }
}

/// Affine map `(A_C, b_C)` the network computes on configuration `C`:
/// `A_C = W_{k+1} ∏ diag(c_i) W_i`, with the matching bias chain.
pub fn affine_restriction(net: &NeuralNet, config: &Configuration) -> (DMatrix<f64>, DVector<f64>) {
    let n = net.input_dim();
    let mut m = DMatrix::<f64>::identity(n, n);
    let mut v = DVector::<f64>::zeros(n);
    let last = net.weights().len() - 1;
    for (i, (w, b)) in net.weights()[..last]
        .iter()
        .zip(&net.biases()[..last])
        .enumerate()
    {
        let mut wm = w * m;
        let mut wv = w * v + b;
        for (row, &active) in config.layers[i].iter().enumerate() {
            if !active {
                wm.row_mut(row).fill(0.0);
                wv[row] = 0.0;
            }
        }
        m = wm;
        v = wv;
    }
    let a = &net.weights()[last] * m;
    let b = &net.weights()[last] * v + &net.biases()[last];
    (a, b)
}

const ZERO_ROW_TOL: f64 = 1e-12;

/// Input-space halfspace a neuron contributes for a given bit, or
/// `None` when it is trivially satisfied. A zero propagated row makes
/// the neuron constant: the bit is then decided by the offset sign
/// alone (ties to active), and the losing bit gets a trivially empty
/// halfspace.
fn neuron_halfspace(row: DVector<f64>, offset: f64, active: bool) -> Option<Halfspace> {
    let zero_row = row.iter().all(|v| v.abs() <= ZERO_ROW_TOL);
    if zero_row {
        let holds = if active { offset >= 0.0 } else { offset < 0.0 };
        if holds {
            return None;
        }
        return Some(Halfspace::new(DVector::zeros(row.len()), -1.0));
    }
    if active {
        // row·x + offset ≥ 0  ⇔  −row·x ≤ offset
        Some(Halfspace::new(-row, offset))
    } else {
        // row·x + offset ≤ 0  ⇔  row·x ≤ −offset
        Some(Halfspace::new(row, -offset))
    }
}

/// `𝒳_C`: the domain box intersected with one halfspace per neuron,
/// obtained by backward propagation through the affine restriction —
/// `O(H)` linear algebra, no projection.
pub fn invariant_polyhedron(
    net: &NeuralNet,
    config: &Configuration,
    domain: &IntervalBox,
) -> Polyhedron {
    let n = net.input_dim();
    let mut poly = Polyhedron::from_box(domain);
    let mut m = DMatrix::<f64>::identity(n, n);
    let mut v = DVector::<f64>::zeros(n);
    let last = net.weights().len() - 1;
    for (i, (w, b)) in net.weights()[..last]
        .iter()
        .zip(&net.biases()[..last])
        .enumerate()
    {
        let wm = w * &m;
        let wv = w * &v + b;
        for j in 0..w.nrows() {
            let row = wm.row(j).transpose();
            if let Some(h) = neuron_halfspace(row, wv[j], config.layers[i][j]) {
                poly.push(h);
            }
        }
        // Apply the configuration before the next layer.
        let mut nm = wm;
        let mut nv = wv;
        for (row, &active) in config.layers[i].iter().enumerate() {
            if !active {
                nm.row_mut(row).fill(0.0);
                nv[row] = 0.0;
            }
        }
        m = nm;
        v = nv;
    }
    poly
}

#[derive(Debug, Clone)]
pub struct EnumLimits {
    /// Hard cap on the number of feasible modes.
    pub max_modes: usize,
    /// Chebyshev radius below this fraction of the widest domain axis
    /// marks a region as degenerate (dropped; neighbours' closed
    /// invariants cover its boundary set).
    pub radius_threshold_frac: f64,
}

impl Default for EnumLimits {
    fn default() -> Self {
        Self {
            max_modes: 4096,
            radius_threshold_frac: 1e-7,
        }
    }
}

/// All feasible configurations with their invariant polyhedra, in
/// canonical bit order, by pruned depth-first search.
pub fn enumerate_modes(
    net: &NeuralNet,
    domain: &IntervalBox,
    limits: &EnumLimits,
) -> Result<Vec<(Configuration, Polyhedron)>, HybridError> {
    let hidden = net.hidden_dims();
    let threshold = limits.radius_threshold_frac * domain.max_width();
    let mut out = Vec::new();

    struct Dfs<'a> {
        net: &'a NeuralNet,
        hidden: &'a [usize],
        threshold: f64,
        max_modes: usize,
    }

    impl Dfs<'_> {
        #[allow(clippy::too_many_arguments)]
        fn layer(
            &self,
            layer_idx: usize,
            m: &DMatrix<f64>,
            v: &DVector<f64>,
            bits: &mut Vec<Vec<bool>>,
            region: &Polyhedron,
            out: &mut Vec<(Configuration, Polyhedron)>,
        ) -> Result<(), HybridError> {
            if layer_idx == self.hidden.len() {
                if out.len() >= self.max_modes {
                    return Err(HybridError::ModeExplosion {
                        cap: self.max_modes,
                    });
                }
                out.push((Configuration::new(bits.clone()), region.clone()));
                return Ok(());
            }
            let w = &self.net.weights()[layer_idx];
            let b = &self.net.biases()[layer_idx];
            let wm = w * m;
            let wv = w * v + b;
            bits.push(Vec::new());
            self.neuron(layer_idx, 0, &wm, &wv, bits, region.clone(), out)?;
            bits.pop();
            Ok(())
        }

        #[allow(clippy::too_many_arguments)]
        fn neuron(
            &self,
            layer_idx: usize,
            j: usize,
            wm: &DMatrix<f64>,
            wv: &DVector<f64>,
            bits: &mut Vec<Vec<bool>>,
            region: Polyhedron,
            out: &mut Vec<(Configuration, Polyhedron)>,
        ) -> Result<(), HybridError> {
            if j == wm.nrows() {
                // Layer complete: apply the configuration and descend.
                let mut nm = wm.clone();
                let mut nv = wv.clone();
                for (row, &active) in bits.last().unwrap().iter().enumerate() {
                    if !active {
                        nm.row_mut(row).fill(0.0);
                        nv[row] = 0.0;
                    }
                }
                return self.layer(layer_idx + 1, &nm, &nv, bits, &region, out);
            }
            let row = wm.row(j).transpose();
            // Inactive (bit 0) first keeps leaves in canonical order.
            for &active in &[false, true] {
                let child = match neuron_halfspace(row.clone(), wv[j], active) {
                    None => region.clone(),
                    Some(h) => {
                        if h.is_trivial() {
                            continue; // trivially empty side
                        }
                        region.intersect(h)
                    }
                };
                let radius = chebyshev(&child)?.map(|(_, r)| r);
                if radius.is_none_or(|r| r < self.threshold) {
                    continue;
                }
                bits.last_mut().unwrap().push(active);
                self.neuron(layer_idx, j + 1, wm, wv, bits, child, out)?;
                bits.last_mut().unwrap().pop();
            }
            Ok(())
        }
    }

    let n = net.input_dim();
    let dfs = Dfs {
        net,
        hidden: &hidden,
        threshold,
        max_modes: limits.max_modes,
    };
    let mut bits = Vec::new();
    dfs.layer(
        0,
        &DMatrix::identity(n, n),
        &DVector::zeros(n),
        &mut bits,
        &Polyhedron::from_box(domain),
        &mut out,
    )?;
    Ok(out)
}

/// One discrete mode of the automaton.
#[derive(Debug, Clone)]
pub struct Mode {
    pub id: usize,
    pub config: Configuration,
    pub invariant: Polyhedron,
    pub flow_a: DMatrix<f64>,
    pub flow_b: DVector<f64>,
    /// Box disturbance `∏[−e_i, e_i]` from the certified bound.
    pub disturbance: IntervalBox,
    pub inv_bbox: IntervalBox,
    pub chebyshev_radius: f64,
}

/// Directed edge; the guard is the destination mode's invariant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transition {
    pub src: usize,
    pub dst: usize,
}

#[derive(Debug, Clone)]
pub struct HybridAutomaton {
    pub modes: Vec<Mode>,
    pub transitions: Vec<Transition>,
    pub domain: IntervalBox,
    pub init: IntervalBox,
    pub bad: IntervalBox,
    pub horizon: f64,
}

impl HybridAutomaton {
    /// Guard of a transition: definitionally the destination invariant.
    pub fn guard(&self, t: Transition) -> &Polyhedron {
        &self.modes[t.dst].invariant
    }

    pub fn transitions_from(&self, src: usize) -> impl Iterator<Item = Transition> + '_ {
        self.transitions.iter().copied().filter(move |t| t.src == src)
    }
}

/// Directed transitions wherever two closed invariants intersect
/// (LP-feasible). At least as inclusive as vertex-sharing adjacency,
/// hence sound for overapproximation.
pub fn build_transitions(modes: &[Mode]) -> Result<Vec<Transition>, LpError> {
    let mut out = Vec::new();
    for i in 0..modes.len() {
        for j in i + 1..modes.len() {
            let meet = modes[i].invariant.intersect_poly(&modes[j].invariant);
            if !modes[i].inv_bbox.intersects(&modes[j].inv_bbox) {
                continue;
            }
            if lp_feasible(&meet)?.is_feasible() {
                out.push(Transition { src: i, dst: j });
                out.push(Transition { src: j, dst: i });
            }
        }
    }
    Ok(out)
}

/// Optional pruning pass: drop `i → j` when the shared set lies in a
/// single hyperplane of `j`'s invariant and the source flow, inflated
/// by the disturbance box, points strictly away from `j` everywhere on
/// it. Off by default in the build options.
pub fn prune_transitions_lie(
    modes: &[Mode],
    transitions: &[Transition],
) -> Result<Vec<Transition>, LpError> {
    let mut kept = Vec::new();
    'outer: for &t in transitions {
        let (src, dst) = (&modes[t.src], &modes[t.dst]);
        let shared = src.invariant.intersect_poly(&dst.invariant);
        for h in dst.invariant.halfspaces() {
            if h.is_trivial() {
                continue;
            }
            let scale = h.normal.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let obj: Vec<f64> = h.normal.iter().map(|v| v / scale).collect();
            let neg: Vec<f64> = obj.iter().map(|v| -v).collect();
            let (Some(max), Some(negmin)) =
                (linear_max(&shared, &obj)?, linear_max(&shared, &neg)?)
            else {
                continue 'outer; // empty shared set; keep conservatively
            };
            let c = h.offset / scale;
            let tol = 1e-7;
            if (max - c).abs() > tol || (-negmin - c).abs() > tol {
                continue; // shared set not inside this hyperplane
            }
            // Entering j means decreasing a·x. Max of −a·ẋ over the
            // shared set under the worst-case disturbance:
            let into_a = {
                let mut lin = vec![0.0; obj.len()];
                for (k, l) in lin.iter_mut().enumerate() {
                    for (r, o) in obj.iter().enumerate() {
                        *l -= o * src.flow_a[(r, k)];
                    }
                }
                let drift: f64 = obj
                    .iter()
                    .enumerate()
                    .map(|(r, o)| -o * src.flow_b[r])
                    .sum();
                let dist: f64 = obj
                    .iter()
                    .enumerate()
                    .map(|(r, o)| o.abs() * dst.disturbance.axis(r).hi)
                    .sum();
                linear_max(&shared, &lin)?.map(|m| m + drift + dist)
            };
            if let Some(best) = into_a {
                if best < 0.0 {
                    continue 'outer; // flow cannot cross into j here
                }
            }
        }
        kept.push(t);
    }
    Ok(kept)
}

#[derive(Debug, Clone, Default)]
pub struct BuildOptions {
    pub limits: EnumLimits,
    /// Apply the Lie-derivative transition pruning pass.
    pub lie_pruning: bool,
}

/// Compile a certified abstraction into the hybrid automaton: modes
/// from the feasible configurations, affine flows from the restriction,
/// disturbance from the certified bound, safety query from the model.
pub fn build_automaton(
    abs: &NeuralAbstraction,
    model: &DynamicalModel,
    opts: &BuildOptions,
) -> Result<HybridAutomaton, HybridError> {
    let enumerated = enumerate_modes(&abs.net, &abs.domain, &opts.limits)?;
    let e = abs.bound.per_component();
    let disturbance = IntervalBox::new(
        e.iter()
            .map(|&ei| crate::interval::Interval::new(-ei, ei))
            .collect(),
    );
    let mut modes = Vec::with_capacity(enumerated.len());
    for (id, (config, invariant)) in enumerated.into_iter().enumerate() {
        let (flow_a, flow_b) = affine_restriction(&abs.net, &config);
        let inv_bbox = bbox(&invariant)
            .map_err(HybridError::Lp)?
            .expect("enumerated invariants are nonempty");
        let chebyshev_radius = chebyshev(&invariant)
            .map_err(HybridError::Lp)?
            .map(|(_, r)| r)
            .unwrap_or(0.0);
        modes.push(Mode {
            id,
            config,
            invariant,
            flow_a,
            flow_b,
            disturbance: disturbance.clone(),
            inv_bbox,
            chebyshev_radius,
        });
    }
    let mut transitions = build_transitions(&modes)?;
    if opts.lie_pruning {
        transitions = prune_transitions_lie(&modes, &transitions)?;
    }
    Ok(HybridAutomaton {
        modes,
        transitions,
        domain: model.domain.clone(),
        init: model.init.clone(),
        bad: model.bad.clone(),
        horizon: model.horizon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::train::random_net;
    use rand::{Rng, SeedableRng};

    fn single_neuron_net(w: &[f64], b: f64) -> NeuralNet {
        let n = w.len();
        NeuralNet::new(
            vec![
                DMatrix::from_row_slice(1, n, w),
                DMatrix::from_fn(n, 1, |_, _| 1.0),
            ],
            vec![DVector::from_column_slice(&[b]), DVector::zeros(n)],
        )
        .unwrap()
    }

    #[test]
    fn config_at_signs_and_tie() {
        let net = single_neuron_net(&[1.0], 0.0);
        assert_eq!(config_at(&net, &[1.0]).layers(), &[vec![true]]);
        assert_eq!(config_at(&net, &[-1.0]).layers(), &[vec![false]]);
        // Exactly on the hyperplane: ties to active.
        assert_eq!(config_at(&net, &[0.0]).layers(), &[vec![true]]);
    }

    #[test]
    fn affine_restriction_inactive_annihilates() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let net = random_net(&[2, 5, 2], &mut rng);
        let all_off = Configuration::new(vec![vec![false; 5]]);
        let (a, b) = affine_restriction(&net, &all_off);
        assert!(a.iter().all(|v| *v == 0.0));
        assert_eq!(b, net.biases()[1]);

        let all_on = Configuration::new(vec![vec![true; 5]]);
        let (a, b) = affine_restriction(&net, &all_on);
        let expect_a = &net.weights()[1] * &net.weights()[0];
        let expect_b = &net.weights()[1] * &net.biases()[0] + &net.biases()[1];
        assert!((a - expect_a).abs().max() < 1e-12);
        assert!((b - expect_b).abs().max() < 1e-12);
    }

    #[test]
    fn restriction_matches_forward_at_own_config() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let net = random_net(&[2, 6, 6, 2], &mut rng);
            for _ in 0..50 {
                let x = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
                let config = config_at(&net, &x);
                let (a, b) = affine_restriction(&net, &config);
                let lin = a * DVector::from_column_slice(&x) + b;
                let fwd = net.forward(&x).unwrap();
                for i in 0..2 {
                    assert!(
                        (lin[i] - fwd[i]).abs() <= 1e-9,
                        "mismatch {} vs {}",
                        lin[i],
                        fwd[i]
                    );
                }
            }
        }
    }

    #[test]
    fn invariant_of_single_neuron_is_halfplane() {
        let net = single_neuron_net(&[1.0, 0.0], 0.0);
        let domain = IntervalBox::from_bounds(&[(-1.0, 1.0), (-1.0, 1.0)]);
        let active = Configuration::new(vec![vec![true]]);
        let poly = invariant_polyhedron(&net, &active, &domain);
        // 4 box facets + 1 neuron halfspace: x0 >= 0.
        assert_eq!(poly.halfspaces().len(), 5);
        assert!(poly.contains(&[0.5, 0.0], 1e-12));
        assert!(!poly.contains(&[-0.5, 0.0], 1e-12));
    }

    #[test]
    fn zero_weight_layer_constant_preactivation() {
        // W1 = 0, b1 > 0: active config covers the whole domain, the
        // inactive config is empty.
        let net = NeuralNet::new(
            vec![DMatrix::zeros(1, 1), DMatrix::from_row_slice(1, 1, &[1.0])],
            vec![DVector::from_column_slice(&[0.5]), DVector::zeros(1)],
        )
        .unwrap();
        let domain = IntervalBox::from_bounds(&[(-1.0, 1.0)]);
        let active = invariant_polyhedron(&net, &Configuration::new(vec![vec![true]]), &domain);
        assert_eq!(active.halfspaces().len(), 2); // box facets only
        let inactive =
            invariant_polyhedron(&net, &Configuration::new(vec![vec![false]]), &domain);
        assert_eq!(
            lp_feasible(&inactive).unwrap(),
            crate::poly::Feasibility::Infeasible
        );
        let modes = enumerate_modes(&net, &domain, &EnumLimits::default()).unwrap();
        assert_eq!(modes.len(), 1);
        assert_eq!(modes[0].0.layers(), &[vec![true]]);
    }

    #[test]
    fn one_crossing_neuron_two_modes() {
        let net = single_neuron_net(&[1.0, 0.0], 0.0);
        let domain = IntervalBox::from_bounds(&[(-1.0, 1.0), (-1.0, 1.0)]);
        let modes = enumerate_modes(&net, &domain, &EnumLimits::default()).unwrap();
        assert_eq!(modes.len(), 2);
    }

    #[test]
    fn hyperplane_outside_domain_one_mode() {
        let net = single_neuron_net(&[1.0, 0.0], 5.0); // x0 + 5 >= 0 always on [-1,1]^2
        let domain = IntervalBox::from_bounds(&[(-1.0, 1.0), (-1.0, 1.0)]);
        let modes = enumerate_modes(&net, &domain, &EnumLimits::default()).unwrap();
        assert_eq!(modes.len(), 1);
        assert_eq!(modes[0].0.layers(), &[vec![true]]);
    }

    /// Exhaustive oracle: the DFS finds exactly the configurations whose
    /// invariant clears the degeneracy threshold.
    #[test]
    fn enumeration_matches_brute_force() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let domain = IntervalBox::from_bounds(&[(-1.0, 1.0), (-1.0, 1.0)]);
        let limits = EnumLimits::default();
        let threshold = limits.radius_threshold_frac * domain.max_width();
        for _ in 0..10 {
            let h = rng.random_range(2..=6);
            let net = random_net(&[2, h, 2], &mut rng);
            let dfs: Vec<String> = enumerate_modes(&net, &domain, &limits)
                .unwrap()
                .into_iter()
                .map(|(c, _)| c.bitstring())
                .collect();
            let mut brute = Vec::new();
            for mask in 0..1u32 << h {
                let bits: Vec<bool> = (0..h).map(|i| mask >> (h - 1 - i) & 1 == 1).collect();
                let config = Configuration::new(vec![bits]);
                let poly = invariant_polyhedron(&net, &config, &domain);
                if let Some((_, r)) = chebyshev(&poly).unwrap() {
                    if r >= threshold {
                        brute.push(config.bitstring());
                    }
                }
            }
            brute.sort();
            assert_eq!(dfs, brute);
        }
    }

    fn mode_stub(id: usize, invariant: Polyhedron) -> Mode {
        let inv_bbox = bbox(&invariant).unwrap().unwrap();
        let radius = chebyshev(&invariant).unwrap().map(|(_, r)| r).unwrap_or(0.0);
        Mode {
            id,
            config: Configuration::new(vec![]),
            invariant,
            flow_a: DMatrix::zeros(2, 2),
            flow_b: DVector::zeros(2),
            disturbance: IntervalBox::from_bounds(&[(0.0, 0.0), (0.0, 0.0)]),
            inv_bbox,
            chebyshev_radius: radius,
        }
    }

    #[test]
    fn halfplane_modes_transition_both_ways() {
        let domain = IntervalBox::from_bounds(&[(-1.0, 1.0), (-1.0, 1.0)]);
        let left = Polyhedron::from_box(&domain).intersect(Halfspace::from_slice(&[1.0, 0.0], 0.0));
        let right =
            Polyhedron::from_box(&domain).intersect(Halfspace::from_slice(&[-1.0, 0.0], 0.0));
        let modes = vec![mode_stub(0, left), mode_stub(1, right)];
        let ts = build_transitions(&modes).unwrap();
        assert!(ts.contains(&Transition { src: 0, dst: 1 }));
        assert!(ts.contains(&Transition { src: 1, dst: 0 }));
    }

    #[test]
    fn separated_modes_no_transition() {
        let a = Polyhedron::from_box(&IntervalBox::from_bounds(&[(-1.0, -0.5), (-1.0, 1.0)]));
        let b = Polyhedron::from_box(&IntervalBox::from_bounds(&[(0.5, 1.0), (-1.0, 1.0)]));
        let modes = vec![mode_stub(0, a), mode_stub(1, b)];
        assert!(build_transitions(&modes).unwrap().is_empty());
    }

    /// Three-region topology from a hand-built two-neuron net: two
    /// hyperplanes meeting on the domain boundary give a wedge, its
    /// complement, and the remaining half, pairwise adjacent (the third
    /// pair shares exactly one point). The degenerate fourth
    /// configuration is pruned.
    #[test]
    fn three_region_adjacency_triangle() {
        let net = NeuralNet::new(
            vec![
                DMatrix::from_row_slice(2, 2, &[1.0, 0.0, -1.0, 1.0]),
                DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]),
            ],
            vec![
                DVector::from_column_slice(&[0.0, -1.0]),
                DVector::zeros(2),
            ],
        )
        .unwrap();
        let domain = IntervalBox::from_bounds(&[(-1.0, 1.0), (-1.0, 1.0)]);
        let enumerated = enumerate_modes(&net, &domain, &EnumLimits::default()).unwrap();
        assert_eq!(enumerated.len(), 3, "wedge, lower-left, right half");
        let modes: Vec<Mode> = enumerated
            .into_iter()
            .enumerate()
            .map(|(id, (_, inv))| mode_stub(id, inv))
            .collect();
        let ts = build_transitions(&modes).unwrap();
        let mut undirected: Vec<(usize, usize)> = ts
            .iter()
            .map(|t| (t.src.min(t.dst), t.src.max(t.dst)))
            .collect();
        undirected.sort();
        undirected.dedup();
        assert_eq!(undirected, vec![(0, 1), (0, 2), (1, 2)]);
        assert_eq!(ts.len(), 6);
    }

    #[test]
    fn guard_is_destination_invariant() {
        let domain = IntervalBox::from_bounds(&[(-1.0, 1.0), (-1.0, 1.0)]);
        let left = Polyhedron::from_box(&domain).intersect(Halfspace::from_slice(&[1.0, 0.0], 0.0));
        let right =
            Polyhedron::from_box(&domain).intersect(Halfspace::from_slice(&[-1.0, 0.0], 0.0));
        let modes = vec![mode_stub(0, left), mode_stub(1, right)];
        let transitions = build_transitions(&modes).unwrap();
        let ha = HybridAutomaton {
            modes,
            transitions,
            domain: domain.clone(),
            init: domain.clone(),
            bad: domain.clone(),
            horizon: 1.0,
        };
        for t in &ha.transitions {
            assert_eq!(ha.guard(*t), &ha.modes[t.dst].invariant);
        }
    }
}
