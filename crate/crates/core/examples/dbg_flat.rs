use berger_flow::flow::*;
use berger_flow::mesh::*;
use berger_flow::curvature::*;

fn main() {
    let n = 512usize;
    let grid = build_grid(n, 10.0, 1.0).unwrap();
    let x = grid.nodes().to_vec();
    let st = MetricState::new(0.0, vec![1.0; n], x.clone(), x.clone(), grid, OriginKind::SmoothOrigin).unwrap();
    let mut flow = FlowState::new(st, OuterBoundary::Pinned);
    let cf = curvature_field(&flow.state).unwrap();
    let dt = select_dt(&flow.state, &cf, &StepControl::default()).unwrap();
    println!("dt = {dt:.3e}, rm_max = {:.3e}", cf.rm_max);
    for step_i in 0..50 {
        step(&mut flow, &StepControl::default(), dt).unwrap();
        if step_i % 10 == 0 || step_i == 49 {
            let mut worst = (0usize, 0.0f64);
            for i in 0..n {
                let rel = (flow.state.b[i] - x[i]).abs() / x[i];
                if rel > worst.1 { worst = (i, rel); }
            }
            println!("step {step_i}: worst drift {:.3e} at node {} (x={:.4})", worst.1, worst.0, x[worst.0]);
            let i = worst.0;
            if i > 1 && i < n-1 {
              println!("   b around: {:.6e} {:.6e} {:.6e}", flow.state.b[i-1]-x[i-1], flow.state.b[i]-x[i], flow.state.b[i+1]-x[i+1]);
              println!("   xi around: {:.6e} {:.6e} {:.6e}", flow.state.xi[i-1]-1.0, flow.state.xi[i]-1.0, flow.state.xi[i+1]-1.0);
            }
        }
    }
}
