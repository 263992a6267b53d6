use berger_flow::flow::*;
use berger_flow::mesh::*;
use berger_flow::curvature::*;

fn run_with(dt_scale: f64, steps: usize) {
    let n = 512usize;
    let grid = build_grid(n, 8.0, 2.0).unwrap();
    let x = grid.nodes().to_vec();
    let b: Vec<f64> = x.iter().map(|x| x.tanh()).collect();
    let st = MetricState::new(0.0, vec![1.0; n], b.clone(), b, grid, OriginKind::SmoothOrigin).unwrap();
    let mut flow = FlowState::new(st, OuterBoundary::Pinned);
    let cf0 = curvature_field(&flow.state).unwrap();
    let dt0 = select_dt(&flow.state, &cf0, &StepControl::default()).unwrap() * dt_scale;
    let mut last_rm = cf0.rm_max;
    for k in 0..steps {
        if step(&mut flow, &StepControl::default(), dt0).is_err() { println!("  scale {dt_scale}: died at step {k}, t={:.3e}", flow.state.t); return; }
        if k % (steps/8) == 0 {
            let cf = curvature_field(&flow.state).unwrap();
            last_rm = cf.rm_max;
            println!("  scale {dt_scale}: step {k} t={:.3e} rm={:.4e}@{}", flow.state.t, cf.rm_max, cf.rm_argmax);
        }
    }
    println!("  scale {dt_scale}: done, rm={last_rm:.4e}");
}

fn main() {
    run_with(1.0, 200);
    run_with(0.25, 800);
    run_with(0.0625, 3200);
}
