use na_core::cegis::{synthesize, IterationVerdict, LoopConfig, SynthesisOutcome};
use na_core::certify::ErrorBound;
use na_core::clock::WallClock;
use na_core::expr::parse;
use na_core::interval::IntervalBox;
use na_core::model::DynamicalModel;
use na_core::train::TrainConfig;

fn main() {
    let vars = ["x", "y"];
    let model = DynamicalModel {
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
    };
    let clock = WallClock::start();
    let target = ErrorBound::uniform(0.15, 2, 0.0).unwrap();
    let cfg = LoopConfig {
        seed: 0,
        max_iters: 6,
        train: TrainConfig { group_lasso: 3e-2, min_epochs: 8000, ..TrainConfig::default() },
        ..LoopConfig::default()
    };
    match synthesize(&model, &[10, 16], &target, &cfg, &clock).unwrap() {
        SynthesisOutcome::Success(abs) => println!("success eps={}", abs.bound.reported_eps()),
        SynthesisOutcome::Failure(f) => {
            println!("failure: {:?}", f.reason);
            for r in &f.provenance.trace {
                let v = match &r.verdict {
                    IterationVerdict::Certified => "certified".to_string(),
                    IterationVerdict::Counterexample { point, margin } => format!("cex at {point:?} margin {margin:.4}"),
                    IterationVerdict::Inconclusive { pseudo } => format!("inconclusive pseudo {pseudo:?}"),
                };
                println!("iter {}: train_err={:?} target={:?} epochs={} boxes={} {v}",
                    r.iteration,
                    r.train_max_err.iter().map(|x| (x*1e4).round()/1e4).collect::<Vec<_>>(),
                    r.target.iter().map(|x| (x*1e4).round()/1e4).collect::<Vec<_>>(),
                    r.train_epochs, r.boxes_processed);
            }
        }
    }
}
