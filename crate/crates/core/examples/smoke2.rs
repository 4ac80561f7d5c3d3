use na_core::cegis::{synthesize, LoopConfig, SynthesisOutcome};
use na_core::certify::ErrorBound;
use na_core::clock::WallClock;
use na_core::expr::parse;
use na_core::hybrid::{build_automaton, BuildOptions};
use na_core::interval::IntervalBox;
use na_core::model::DynamicalModel;
use na_core::reach::{reach, simulate_concrete, ReachConfig, SafetyVerdict};
use std::time::Instant;

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
    model.validate().unwrap();
    let eps = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.15f64);
    let arch: Vec<usize> = std::env::args().nth(2).map(|s| s.split(',').map(|v| v.parse().unwrap()).collect()).unwrap_or(vec![10, 16]);
    for seed in 0..5u64 {
        let t0 = Instant::now();
        let clock = WallClock::start();
        let target = ErrorBound::uniform(eps, 2, 0.0).unwrap();
        let cfg = LoopConfig {
            seed,
            time_budget_secs: 300.0,
            train: na_core::train::TrainConfig {
                group_lasso: 6e-2,
                min_epochs: 8000,
                ..na_core::train::TrainConfig::default()
            },
            ..LoopConfig::default()
        };
        match synthesize(&model, &arch, &target, &cfg, &clock).unwrap() {
            SynthesisOutcome::Success(abs) => {
                let t_synth = t0.elapsed().as_secs_f64();
                let ha = build_automaton(&abs, &model, &BuildOptions::default()).unwrap();
                let t_build = t0.elapsed().as_secs_f64();
                let fp = reach(&ha, &ReachConfig::default()).unwrap();
                let t_reach = t0.elapsed().as_secs_f64();
                println!(
                    "seed {seed}: eps={:.4} e={:?} iters={} modes={} verdict={:?} branches={} segs={} | synth {:.1}s build {:.1}s reach {:.1}s",
                    abs.bound.reported_eps(),
                    abs.bound.per_component().iter().map(|v| (v*1000.0).round()/1000.0).collect::<Vec<_>>(),
                    abs.provenance.iterations,
                    ha.modes.len(),
                    fp.verdict,
                    fp.stats.branches,
                    fp.stats.segments,
                    t_synth, t_build - t_synth, t_reach - t_build,
                );
                if fp.verdict == SafetyVerdict::Safe {
                    let traj = simulate_concrete(&model, &[0.47, -0.57], 1.5, 1e-3);
                    let mut ok = true;
                    for (t, s) in traj.times.iter().zip(&traj.states).step_by(10) {
                        let inside = fp.segments.iter().any(|seg| {
                            seg.t_lo <= *t && *t <= seg.t_hi && seg.bbox.contains(s, 1e-9)
                        });
                        if !inside { ok = false; println!("  !! escape at t={t} x={s:?}"); break; }
                    }
                    println!("  oracle contained: {ok}");
                }
            }
            SynthesisOutcome::Failure(f) => {
                println!("seed {seed}: FAILURE {:?} best={:?} ({:.1}s)", f.reason, f.best_max_err, t0.elapsed().as_secs_f64());
            }
        }
    }
}
