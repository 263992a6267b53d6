use berger_flow::flow::*;
use berger_flow::mesh::*;
use berger_flow::curvature::*;

fn main() {
    let (n, xm, gamma) = (128usize, 10.0f64, 2.0f64);
    let grid = build_grid(n, xm, gamma).unwrap();
    let x = grid.nodes().to_vec();
    let st = MetricState::new(0.0, vec![1.0; n], x.clone(), x.clone(), grid, OriginKind::SmoothOrigin).unwrap();
    let mut flow = FlowState::new(st, OuterBoundary::Pinned);
    let ctl = StepControl::default();
    let cf = curvature_field(&flow.state).unwrap();
    let dt = select_dt(&flow.state, &cf, &ctl).unwrap();
    println!("dt = {dt:.3e}");
    step(&mut flow, &ctl, dt).unwrap();
    let mut wb = (0usize, 0.0f64); let mut wx = (0usize, 0.0f64);
    for i in 0..n {
        let db = (flow.state.b[i] - x[i]).abs();
        let dx = (flow.state.xi[i] - 1.0).abs();
        if db > wb.1 { wb = (i, db); }
        if dx > wx.1 { wx = (i, dx); }
    }
    println!("after 1 step: max|b-x| = {:.3e}@{}  max|xi-1| = {:.3e}@{}", wb.1, wb.0, wx.1, wx.0);
    for i in (wb.0.saturating_sub(2))..(wb.0+3).min(n) {
        println!("  node {i}: x={:.4} b-x={:+.3e} xi-1={:+.3e}", x[i], flow.state.b[i]-x[i], flow.state.xi[i]-1.0);
    }
    let cf = curvature_field(&flow.state).unwrap();
    println!("rm after 1 step: {:.3e}@{}", cf.rm_max, cf.rm_argmax);
}
