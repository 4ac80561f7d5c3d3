use na_core::cegis::{synthesize, LoopConfig, SynthesisOutcome};
use na_core::certify::ErrorBound;
use na_core::clock::WallClock;
use na_core::expr::parse;
use na_core::hybrid::{build_automaton, BuildOptions};
use na_core::interval::IntervalBox;
use na_core::model::DynamicalModel;
use na_core::reach::{reach, ReachConfig};
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
        seed: 1,
        train: TrainConfig { group_lasso: 6e-2, min_epochs: 8000, ..TrainConfig::default() },
        ..LoopConfig::default()
    };
    let abs = synthesize(&model, &[10, 16], &target, &cfg, &clock).unwrap().success().unwrap();
    let ha = build_automaton(&abs, &model, &BuildOptions::default()).unwrap();
    println!("modes: {}", ha.modes.len());
    for m in &ha.modes {
        println!("  mode {}: bbox=[{:.2},{:.2}]x[{:.2},{:.2}] radius={:.3}", m.id,
            m.inv_bbox.axis(0).lo, m.inv_bbox.axis(0).hi, m.inv_bbox.axis(1).lo, m.inv_bbox.axis(1).hi, m.chebyshev_radius);
    }
    let fp = reach(&ha, &ReachConfig::default()).unwrap();
    println!("verdict {:?} branches {}", fp.verdict, fp.stats.branches);
    // per-branch: report first/last segment and max y width
    let mut info: std::collections::BTreeMap<usize, (f64, f64, f64, usize)> = Default::default();
    for seg in &fp.segments {
        let e = info.entry(seg.branch).or_insert((seg.t_lo, seg.t_hi, 0.0, seg.mode));
        e.1 = e.1.max(seg.t_hi);
        e.2 = f64::max(e.2, seg.bbox.axis(1).width());
    }
    for (b, (t0, t1, w, mode)) in info.iter().take(30) {
        let (start, _, entry) = &fp.stats.branch_log[*b];
        println!("branch {b}: mode={mode} t=[{t0:.2},{t1:.2}] start={start} entry_w=({:.3},{:.3}) max_ywidth={w:.3}",
            entry.axis(0).width(), entry.axis(1).width());
    }
}
