//! Learner–certifier alternation.
//!
//! `synthesize` trains a candidate network on samples of the vector
//! field, asks the certifier to prove the error bound over the whole
//! domain, and on refutation augments the dataset around the returned
//! counterexample and repeats. A successful run hands back a
//! [`NeuralAbstraction`]: the network, the certified per-component
//! bound, and provenance (seeds, per-phase seconds, iteration trace)
//! sufficient to reproduce the certificate from scratch.

use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::certify::{
    certify_deadline, CertBudget, CertError, CertVerdict, ErrorBound,
};
use crate::clock::Clock;
use crate::interval::{DomainError, IntervalBox};
use crate::model::DynamicalModel;
use crate::net::{NetError, NeuralNet};
use crate::train::{random_net, sample_domain, train, Dataset, Stopping, TrainConfig};

/// A certified overapproximation of the concrete dynamics: the neural
/// ODE `ẋ = N(x) + d` with `d` ranging over the box `∏[−e_i, e_i]`
/// contains every trajectory of the concrete model on the domain.
#[derive(Debug, Clone)]
pub struct NeuralAbstraction {
    pub net: NeuralNet,
    pub bound: ErrorBound,
    pub domain: IntervalBox,
    pub provenance: Provenance,
}

#[derive(Debug, Clone)]
pub struct Provenance {
    pub seed: u64,
    pub iterations: usize,
    pub learner_secs: f64,
    pub certifier_secs: f64,
    pub dataset_size: usize,
    pub trace: Vec<IterationRecord>,
}

#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub iteration: usize,
    pub dataset_size: usize,
    pub train_epochs: usize,
    pub train_max_err: Vec<f64>,
    /// Per-component bound attempted this iteration.
    pub target: Vec<f64>,
    pub verdict: IterationVerdict,
    pub boxes_processed: u64,
    pub learner_secs: f64,
    pub certifier_secs: f64,
}

#[derive(Debug, Clone)]
pub enum IterationVerdict {
    Certified,
    Counterexample { point: Vec<f64>, margin: f64 },
    /// Budgeted out; the worst unresolved box's midpoint is fed back to
    /// the learner as a pseudo-counterexample. Soundness is unaffected
    /// because Inconclusive never certifies.
    Inconclusive { pseudo: Vec<f64> },
}

#[derive(Debug, Clone)]
pub struct LoopConfig {
    pub initial_samples: usize,
    /// Extra points sampled around each counterexample.
    pub n_aug: usize,
    /// Augmentation spread as a fraction of each axis width.
    pub sigma_frac: f64,
    pub max_iters: usize,
    pub time_budget_secs: f64,
    pub train: TrainConfig,
    pub cert: CertBudget,
    /// Train until the sample error is below this fraction of the
    /// certification threshold, leaving generalisation margin.
    pub train_margin: f64,
    /// Reallocate the scalar ε across components proportionally to the
    /// observed training residuals (keeping ‖e‖₂ fixed); exactly
    /// representable components then stop hogging budget the hard ones
    /// need. Only applies when δ = 0.
    pub adaptive_split: bool,
    /// After success, retry certification at 3% above the proven sup to
    /// report a tighter certified ε.
    pub tighten: bool,
    pub seed: u64,
}

impl Default for LoopConfig {
    fn default() -> Self {
        Self {
            initial_samples: 1000,
            n_aug: 50,
            sigma_frac: 0.05,
            max_iters: 20,
            time_budget_secs: 300.0,
            train: TrainConfig::default(),
            cert: CertBudget::default(),
            train_margin: 0.8,
            adaptive_split: true,
            tighten: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub enum SynthesisOutcome {
    Success(NeuralAbstraction),
    Failure(SynthesisFailure),
}

impl SynthesisOutcome {
    pub fn success(self) -> Option<NeuralAbstraction> {
        match self {
            SynthesisOutcome::Success(a) => Some(a),
            SynthesisOutcome::Failure(_) => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthesisFailure {
    pub reason: FailureReason,
    /// Best (uncertified) max sample error seen, per component.
    pub best_max_err: Vec<f64>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureReason {
    IterationLimitExceeded,
    TimeBudgetExceeded,
}

#[derive(Debug, thiserror::Error)]
pub enum SynthesisError {
    #[error(transparent)]
    Cert(#[from] CertError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

#[derive(Debug, Clone)]
pub struct AugmentConfig {
    pub n_aug: usize,
    pub sigma_frac: f64,
    pub seed: u64,
}

/// Append the counterexample plus `n_aug` truncated-Gaussian neighbours
/// (σ = `sigma_frac` of each axis width), all inside the domain;
/// deterministic for a fixed seed.
pub fn augment(
    model: &DynamicalModel,
    data: &Dataset,
    cex: &[f64],
    cfg: &AugmentConfig,
) -> Result<Dataset, DomainError> {
    let mut out = data.clone();
    out.push(cex.to_vec(), model.eval(cex)?);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let domain = &model.domain;
    for _ in 0..cfg.n_aug {
        let mut p = vec![0.0; domain.dim()];
        for (i, v) in p.iter_mut().enumerate() {
            let axis = domain.axis(i);
            let sigma = cfg.sigma_frac * axis.width();
            if sigma == 0.0 {
                *v = cex[i];
                continue;
            }
            let dist = Normal::new(cex[i], sigma).expect("sigma is positive");
            // Truncation by resampling, clamped after a bounded number
            // of rejections.
            let mut accepted = None;
            for _ in 0..32 {
                let candidate = dist.sample(&mut rng);
                if axis.contains(candidate) {
                    accepted = Some(candidate);
                    break;
                }
            }
            *v = accepted.unwrap_or_else(|| candidate_clamp(dist.sample(&mut rng), axis));
        }
        let y = model.eval(&p)?;
        out.push(p, y);
    }
    Ok(out)
}

fn candidate_clamp(v: f64, axis: crate::interval::Interval) -> f64 {
    v.max(axis.lo).min(axis.hi)
}

/// Run the CEGIS loop for a network with the given hidden layer widths.
pub fn synthesize(
    model: &DynamicalModel,
    hidden: &[usize],
    target: &ErrorBound,
    cfg: &LoopConfig,
    clock: &dyn Clock,
) -> Result<SynthesisOutcome, SynthesisError> {
    let n = model.dim();
    // Rejects bounds at or below the disturbance before any training.
    target.thresholds()?;

    let mut dims = vec![n];
    dims.extend_from_slice(hidden);
    dims.push(n);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut net = random_net(&dims, &mut rng);
    let mut data = sample_domain(model, cfg.initial_samples, cfg.seed)?;

    let eps_target = target.reported_eps();
    let mut bound = target.clone();
    let mut trace: Vec<IterationRecord> = Vec::new();
    let mut learner_secs = 0.0;
    let mut certifier_secs = 0.0;
    let mut best_max_err: Vec<f64> = vec![f64::INFINITY; n];

    let mut reason = FailureReason::IterationLimitExceeded;
    for iteration in 0..cfg.max_iters {
        if clock.elapsed_secs() > cfg.time_budget_secs {
            reason = FailureReason::TimeBudgetExceeded;
            break;
        }

        let thresholds = bound.thresholds()?;
        // Iteration 0 trains hot (full schedule, regularisers active);
        // refinements after a counterexample fine-tune the converged
        // net instead — a hot restart with row shrinkage reliably
        // destroys it.
        let train_cfg = if iteration == 0 {
            TrainConfig {
                stopping: Stopping::TargetError(
                    thresholds.iter().map(|t| t * cfg.train_margin).collect(),
                ),
                seed: cfg.seed,
                ..cfg.train.clone()
            }
        } else {
            TrainConfig {
                stopping: Stopping::TargetError(
                    thresholds.iter().map(|t| t * cfg.train_margin).collect(),
                ),
                seed: cfg.seed.wrapping_add(iteration as u64),
                learning_rate: (cfg.train.learning_rate * 0.2).max(1e-3),
                group_lasso: 0.0,
                weight_decay: 0.0,
                min_epochs: 0,
                ..cfg.train.clone()
            }
        };
        let t0 = clock.elapsed_secs();
        let report = train(&net, &data, &train_cfg)?;
        let train_secs = clock.elapsed_secs() - t0;
        learner_secs += train_secs;
        net = report.net.clone();
        if norm2(&report.max_component_err) < norm2(&best_max_err) {
            best_max_err = report.max_component_err.clone();
        }

        if cfg.adaptive_split && model.delta == 0.0 && n > 1 {
            let max = report
                .max_component_err
                .iter()
                .fold(0.0f64, |a, b| a.max(*b));
            if max > 0.0 {
                let weights: Vec<f64> = report
                    .max_component_err
                    .iter()
                    .map(|e| e.max(0.1 * max))
                    .collect();
                bound = ErrorBound::weighted(eps_target, &weights, model.delta)?;
            }
        }

        let t1 = clock.elapsed_secs();
        let cert = certify_deadline(
            model,
            &net,
            &bound,
            &cfg.cert,
            clock,
            cfg.time_budget_secs,
        )?;
        let cert_secs = clock.elapsed_secs() - t1;
        certifier_secs += cert_secs;

        let (verdict, feedback) = match &cert.verdict {
            CertVerdict::Certified => (IterationVerdict::Certified, None),
            CertVerdict::Counterexample { point, margin, .. } => (
                IterationVerdict::Counterexample {
                    point: point.clone(),
                    margin: *margin,
                },
                Some(point.clone()),
            ),
            CertVerdict::Inconclusive { worst_box, .. } => {
                let pseudo = worst_box.midpoint();
                (
                    IterationVerdict::Inconclusive {
                        pseudo: pseudo.clone(),
                    },
                    Some(pseudo),
                )
            }
        };
        trace.push(IterationRecord {
            iteration,
            dataset_size: data.len(),
            train_epochs: report.epochs_run,
            train_max_err: report.max_component_err.clone(),
            target: bound.per_component().to_vec(),
            verdict,
            boxes_processed: cert.boxes_processed,
            learner_secs: train_secs,
            certifier_secs: cert_secs,
        });

        match feedback {
            None => {
                // Certified. Optionally tighten to just above the proven
                // sup so the reported ε reflects the real residual.
                let mut final_bound = bound.clone();
                if cfg.tighten {
                    let candidate: Vec<f64> = cert
                        .max_residual_upper
                        .iter()
                        .map(|s| (s * 1.03).max(1e-9) + model.delta)
                        .collect();
                    if let Ok(tighter) = ErrorBound::new(candidate, model.delta) {
                        if tighter.reported_eps() < 0.97 * final_bound.reported_eps() {
                            let t2 = clock.elapsed_secs();
                            let recheck = certify_deadline(
                                model,
                                &net,
                                &tighter,
                                &cfg.cert,
                                clock,
                                cfg.time_budget_secs,
                            )?;
                            certifier_secs += clock.elapsed_secs() - t2;
                            if recheck.is_certified() {
                                final_bound = tighter;
                            }
                        }
                    }
                }
                return Ok(SynthesisOutcome::Success(NeuralAbstraction {
                    net,
                    bound: final_bound,
                    domain: model.domain.clone(),
                    provenance: Provenance {
                        seed: cfg.seed,
                        iterations: iteration + 1,
                        learner_secs,
                        certifier_secs,
                        dataset_size: data.len(),
                        trace,
                    },
                }));
            }
            Some(point) => {
                let aug = AugmentConfig {
                    n_aug: cfg.n_aug,
                    sigma_frac: cfg.sigma_frac,
                    seed: cfg.seed.wrapping_add(0x9e37_79b9).wrapping_add(iteration as u64),
                };
                data = augment(model, &data, &point, &aug)?;
            }
        }
    }

    Ok(SynthesisOutcome::Failure(SynthesisFailure {
        reason,
        best_max_err,
        provenance: Provenance {
            seed: cfg.seed,
            iterations: trace.len(),
            learner_secs,
            certifier_secs,
            dataset_size: data.len(),
            trace,
        },
    }))
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// One attempt of the iterative error-tightening protocol.
#[derive(Debug, Clone)]
pub struct TighteningAttempt {
    pub target_eps: f64,
    pub achieved_eps: Option<f64>,
}

/// Repeatedly synthesize, multiplying the target ε by `shrink` after
/// each success, until the time budget runs out; returns all attempts
/// plus the tightest certified abstraction.
pub fn synthesize_tightening(
    model: &DynamicalModel,
    hidden: &[usize],
    initial_eps: f64,
    shrink: f64,
    cfg: &LoopConfig,
    clock: &dyn Clock,
) -> Result<(Vec<TighteningAttempt>, Option<NeuralAbstraction>), SynthesisError> {
    let mut eps = initial_eps;
    let mut attempts = Vec::new();
    let mut best: Option<NeuralAbstraction> = None;
    while clock.elapsed_secs() < cfg.time_budget_secs {
        let target = ErrorBound::uniform(eps, model.dim(), model.delta)?;
        match synthesize(model, hidden, &target, cfg, clock)? {
            SynthesisOutcome::Success(abs) => {
                attempts.push(TighteningAttempt {
                    target_eps: eps,
                    achieved_eps: Some(abs.bound.reported_eps()),
                });
                eps = abs.bound.reported_eps().min(eps) * shrink;
                best = Some(abs);
            }
            SynthesisOutcome::Failure(_) => {
                attempts.push(TighteningAttempt {
                    target_eps: eps,
                    achieved_eps: None,
                });
                break;
            }
        }
    }
    Ok((attempts, best))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::NoClock;
    use crate::expr::parse;

    fn affine_model() -> DynamicalModel {
        DynamicalModel {
            name: "affine".into(),
            variables: vec!["x".into()],
            flow: vec![parse("2*x + 1", &["x"]).unwrap()],
            delta: 0.0,
            domain: IntervalBox::from_bounds(&[(-1.0, 1.0)]),
            init: IntervalBox::from_bounds(&[(-0.1, 0.1)]),
            bad: IntervalBox::from_bounds(&[(0.9, 1.0)]),
            horizon: 1.0,
        }
    }

    #[test]
    fn synthesizes_affine_within_three_iterations() {
        let model = affine_model();
        let target = ErrorBound::new(vec![0.05], 0.0).unwrap();
        let cfg = LoopConfig {
            max_iters: 3,
            train: TrainConfig {
                max_epochs: 3000,
                ..TrainConfig::default()
            },
            ..LoopConfig::default()
        };
        let out = synthesize(&model, &[8], &target, &cfg, &NoClock).unwrap();
        let abs = out.success().expect("affine target is ReLU-representable");
        assert!(abs.bound.reported_eps() <= 0.05 + 1e-12);
        assert!(abs.provenance.iterations <= 3);
        // The stored bound re-certifies from scratch.
        let re = crate::certify::certify(
            &model,
            &abs.net,
            &abs.bound,
            &CertBudget::default(),
        )
        .unwrap();
        assert!(re.is_certified());
    }

    #[test]
    fn zero_bound_rejected_before_training() {
        let model = affine_model();
        let target = ErrorBound::new(vec![0.0], 0.0).unwrap();
        let err = synthesize(&model, &[4], &target, &LoopConfig::default(), &NoClock);
        assert!(matches!(
            err,
            Err(SynthesisError::Cert(CertError::TargetBelowDisturbance { .. }))
        ));
    }

    #[test]
    fn augment_grows_by_one_without_neighbours() {
        let model = affine_model();
        let data = sample_domain(&model, 10, 0).unwrap();
        let out = augment(
            &model,
            &data,
            &[0.5],
            &AugmentConfig {
                n_aug: 0,
                sigma_frac: 0.05,
                seed: 1,
            },
        )
        .unwrap();
        assert_eq!(out.len(), 11);
    }

    #[test]
    fn augment_clips_to_domain_and_centres_on_cex() {
        let model = affine_model();
        let data = sample_domain(&model, 1, 0).unwrap();
        // Counterexample on the boundary: all neighbours stay inside.
        let out = augment(
            &model,
            &data,
            &[1.0],
            &AugmentConfig {
                n_aug: 50,
                sigma_frac: 0.05,
                seed: 2,
            },
        )
        .unwrap();
        assert_eq!(out.len(), 52);
        for (p, _) in out.points() {
            assert!(model.domain.contains(p, 0.0));
        }

        // Interior counterexample: the cloud mean lands near it.
        let out = augment(
            &model,
            &data,
            &[0.25],
            &AugmentConfig {
                n_aug: 50,
                sigma_frac: 0.05,
                seed: 3,
            },
        )
        .unwrap();
        let sigma = 0.05 * 2.0;
        let mean: f64 = out.points()[1..].iter().map(|(p, _)| p[0]).sum::<f64>() / 51.0;
        assert!(
            (mean - 0.25).abs() < 2.0 * sigma / (50.0f64).sqrt() + 0.05,
            "mean {mean}"
        );
    }

    #[test]
    fn dataset_grows_monotonically_across_iterations() {
        let model = affine_model();
        // Impossible bound forces several refutation rounds.
        let target = ErrorBound::new(vec![1e-7], 0.0).unwrap();
        let cfg = LoopConfig {
            max_iters: 4,
            initial_samples: 50,
            train: TrainConfig {
                max_epochs: 200,
                ..TrainConfig::default()
            },
            cert: CertBudget {
                max_boxes: 10_000,
                ..CertBudget::default()
            },
            ..LoopConfig::default()
        };
        match synthesize(&model, &[4], &target, &cfg, &NoClock).unwrap() {
            SynthesisOutcome::Failure(f) => {
                assert_eq!(f.reason, FailureReason::IterationLimitExceeded);
                let sizes: Vec<usize> =
                    f.provenance.trace.iter().map(|r| r.dataset_size).collect();
                for w in sizes.windows(2) {
                    assert!(w[1] > w[0], "dataset sizes {sizes:?}");
                }
            }
            SynthesisOutcome::Success(_) => panic!("1e-7 should not certify at this budget"),
        }
    }
}
