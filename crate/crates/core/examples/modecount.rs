use na_core::cegis::{synthesize, LoopConfig, SynthesisOutcome};
use na_core::certify::ErrorBound;
use na_core::clock::WallClock;
use na_core::expr::parse;
use na_core::hybrid::{enumerate_modes, EnumLimits};
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
    for wd in [1e-2, 3e-2, 6e-2] {
        for seed in 0..4u64 {
            let clock = WallClock::start();
            let target = ErrorBound::uniform(0.15, 2, 0.0).unwrap();
            let cfg = LoopConfig {
                seed,
                train: TrainConfig { group_lasso: wd, min_epochs: 8000, ..TrainConfig::default() },
                ..LoopConfig::default()
            };
            match synthesize(&model, &[10, 16], &target, &cfg, &clock).unwrap() {
                SynthesisOutcome::Success(abs) => {
                    let modes = enumerate_modes(&abs.net, &abs.domain, &EnumLimits::default()).unwrap();
                    println!("wd={wd:.0e} seed={seed}: modes={} eps={:.3} iters={}", modes.len(), abs.bound.reported_eps(), abs.provenance.iterations);
                }
                SynthesisOutcome::Failure(f) => println!("wd={wd:.0e} seed={seed}: FAIL {:?}", f.best_max_err),
            }
        }
    }
}
