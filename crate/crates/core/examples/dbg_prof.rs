use berger_flow::flow::*;
use berger_flow::mesh::*;
use berger_flow::curvature::*;
use std::time::Instant;

fn main() {
    let n = 2048usize;
    let grid = build_grid(n, 20.0, 2.0).unwrap();
    let x = grid.nodes().to_vec();
    let b: Vec<f64> = x.iter().map(|x| x.tanh()).collect();
    let st = MetricState::new(0.0, vec![1.0; n], b.clone(), b, grid, OriginKind::SmoothOrigin).unwrap();
    let mut flow = FlowState::new(st, OuterBoundary::Pinned);
    let ctl = StepControl::default();

    let t0 = Instant::now();
    for _ in 0..200 { let _ = curvature_field(&flow.state).unwrap(); }
    println!("curvature_field: {:.1} us", t0.elapsed().as_micros() as f64 / 200.0);

    let t0 = Instant::now();
    for _ in 0..200 { let _ = rhs(&flow.state).unwrap(); }
    println!("rhs: {:.1} us", t0.elapsed().as_micros() as f64 / 200.0);

    let cf = curvature_field(&flow.state).unwrap();
    let dt = select_dt(&flow.state, &cf, &ctl).unwrap();
    let t0 = Instant::now();
    for _ in 0..1000 { step(&mut flow, &ctl, dt).unwrap(); }
    println!("step: {:.1} us  (dt = {dt:.2e})", t0.elapsed().as_micros() as f64 / 1000.0);
    println!("  -> steps to t=0.25: {:.1e}, est minutes: {:.1}", 0.25/dt, 0.25/dt * (t0.elapsed().as_micros() as f64/1000.0) / 6e7);
}
