use berger_flow::flow::*;
use berger_flow::mesh::*;
use berger_flow::curvature::*;

fn main() {
    let n = 512usize;
    let grid = build_grid(n, 8.0, 2.0).unwrap();
    let x = grid.nodes().to_vec();
    let b: Vec<f64> = x.iter().map(|x| x.tanh()).collect();
    let st = MetricState::new(0.0, vec![1.0; n], b.clone(), b, grid, OriginKind::SmoothOrigin).unwrap();
    let mut flow = FlowState::new(st, OuterBoundary::Pinned);
    for k in 0..1000 {
        let cf = curvature_field(&flow.state).unwrap();
        let dt = match select_dt(&flow.state, &cf, &StepControl::default()) {
            Ok(dt) => dt,
            Err(e) => { println!("step {k}: {e}; rm_max={:.3e} at node {} (x={:.3})", cf.rm_max, cf.rm_argmax, flow.state.grid.nodes()[cf.rm_argmax]); break; }
        };
        if k % 100 == 0 {
            println!("step {k}: t={:.3e} dt={:.3e} rm={:.3e}@{} xi_min={:.3e} xi_max={:.3e}", flow.state.t, dt, cf.rm_max, cf.rm_argmax,
                flow.state.xi.iter().cloned().fold(f64::INFINITY, f64::min),
                flow.state.xi.iter().cloned().fold(0.0, f64::max));
        }
        if let Err(e) = step(&mut flow, &StepControl::default(), dt) { println!("step {k} failed: {e}"); break; }
    }
}
