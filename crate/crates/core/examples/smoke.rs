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
    let model = DynamicalModel {
        name: "water".into(),
        variables: vec!["x".into()],
        flow: vec![parse("1.5 - sqrt(x)", &["x"]).unwrap()],
        delta: 0.0,
        domain: IntervalBox::from_bounds(&[(0.0, 3.0)]),
        init: IntervalBox::from_bounds(&[(0.0, 0.01)]),
        bad: IntervalBox::from_bounds(&[(2.0, 3.0)]),
        horizon: 2.0,
    };
    model.validate().unwrap();
    for seed in 0..5u64 {
        let t0 = Instant::now();
        let clock = WallClock::start();
        let target = ErrorBound::uniform(0.1, 1, 0.0).unwrap();
        let cfg = LoopConfig { seed, ..LoopConfig::default() };
        match synthesize(&model, &[12], &target, &cfg, &clock).unwrap() {
            SynthesisOutcome::Success(abs) => {
                let t_synth = t0.elapsed().as_secs_f64();
                let ha = build_automaton(&abs, &model, &BuildOptions::default()).unwrap();
                let t_build = t0.elapsed().as_secs_f64();
                let fp = reach(&ha, &ReachConfig::default()).unwrap();
                let t_reach = t0.elapsed().as_secs_f64();
                println!(
                    "seed {seed}: eps={:.4} iters={} modes={} trans={} verdict={:?} branches={} segs={} | synth {:.1}s build {:.1}s reach {:.1}s",
                    abs.bound.reported_eps(),
                    abs.provenance.iterations,
                    ha.modes.len(),
                    ha.transitions.len(),
                    fp.verdict,
                    fp.stats.branches,
                    fp.stats.segments,
                    t_synth, t_build - t_synth, t_reach - t_build,
                );
                if fp.verdict == SafetyVerdict::Safe {
                    // quick containment sanity: one RK4 trajectory inside pipe
                    let traj = simulate_concrete(&model, &[0.005], 2.0, 1e-3);
                    let mut ok = true;
                    for (t, s) in traj.times.iter().zip(&traj.states).step_by(10) {
                        let inside = fp.segments.iter().any(|seg| {
                            seg.t_lo <= *t && *t <= seg.t_hi && seg.bbox.contains(s, 1e-9)
                        });
                        if !inside { ok = false; println!("  !! escape at t={t} x={s:?}"); break; }
                    }
                    if ok { println!("  oracle trajectory contained"); }
                    break;
                }
            }
            SynthesisOutcome::Failure(f) => {
                println!("seed {seed}: FAILURE {:?} best={:?} ({:.1}s)", f.reason, f.best_max_err, t0.elapsed().as_secs_f64());
            }
        }
    }
}
