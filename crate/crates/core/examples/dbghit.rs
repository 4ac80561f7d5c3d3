use na_core::cegis::{synthesize, LoopConfig, SynthesisOutcome};
use na_core::certify::ErrorBound;
use na_core::clock::WallClock;
use na_core::expr::parse;
use na_core::hybrid::{build_automaton, BuildOptions};
use na_core::interval::IntervalBox;
use na_core::model::DynamicalModel;
use na_core::reach::{reach, simulate_concrete, ReachConfig};
use na_core::train::TrainConfig;
use rand::{Rng, SeedableRng};

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

    // RK4 ensemble envelope for reference
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
    let mut min_d = f64::INFINITY;
    for _ in 0..200 {
        let x0 = [rng.random_range(0.45..0.5), rng.random_range(-0.6..-0.55)];
        let tr = simulate_concrete(&model, &x0, 1.5, 1e-3);
        for s in &tr.states {
            let dx = (s[0] - 0.325f64).abs() - 0.025;
            let dy = (s[1] - 0.55f64).abs() - 0.05;
            min_d = min_d.min(dx.max(dy));
        }
    }
    println!("concrete min distance to bad box (inf-norm margin): {min_d:.4}");

    for eps in [0.15f64, 0.10, 0.07, 0.05] {
        let clock = WallClock::start();
        let target = ErrorBound::uniform(eps, 2, 0.0).unwrap();
        let cfg = LoopConfig {
            seed: 1,
            time_budget_secs: 600.0,
            train: TrainConfig { group_lasso: 6e-2, min_epochs: 8000, ..TrainConfig::default() },
            ..LoopConfig::default()
        };
        match synthesize(&model, &[10, 16], &target, &cfg, &clock).unwrap() {
            SynthesisOutcome::Success(abs) => {
                let ha = build_automaton(&abs, &model, &BuildOptions::default()).unwrap();
                let fp = reach(&ha, &ReachConfig::default()).unwrap();
                print!(
                    "eps={eps}: e={:?} modes={} verdict={:?} branches={}",
                    abs.bound.per_component().iter().map(|v| (v*1e3).round()/1e3).collect::<Vec<_>>(),
                    ha.modes.len(), fp.verdict, fp.stats.branches,
                );
                if let Some(idx) = fp.stats.first_hit {
                    let seg = &fp.segments[idx];
                    println!(
                        " | first hit: t=[{:.2},{:.2}] mode={} branch={} box=[{:.2},{:.2}]x[{:.2},{:.2}]",
                        seg.t_lo, seg.t_hi, seg.mode, seg.branch,
                        seg.bbox.axis(0).lo, seg.bbox.axis(0).hi,
                        seg.bbox.axis(1).lo, seg.bbox.axis(1).hi
                    );
                    // walk the genealogy: print the branch entry + its widths
                    let mut b = seg.branch;
                    for _ in 0..6 {
                        let (start, mode, entry) = &fp.stats.branch_log[b];
                        println!("    branch {b}: start_step={start} mode={mode} entry=[{:.3},{:.3}]x[{:.3},{:.3}] (w={:.3},{:.3})",
                            entry.axis(0).lo, entry.axis(0).hi, entry.axis(1).lo, entry.axis(1).hi,
                            entry.axis(0).width(), entry.axis(1).width());
                        if b == 0 { break; }
                        // find a plausible parent: the branch with largest id < b whose mode differs... just stop
                        if *start == 0 { break; }
                        // no explicit parent pointers; stop after first
                        break;
                    }
                } else {
                    println!();
                }
            }
            SynthesisOutcome::Failure(f) => println!("eps={eps}: synth FAIL best={:?}", f.best_max_err),
        }
    }
}
