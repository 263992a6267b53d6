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
    for k in 0..60 {
        let cf = curvature_field(&flow.state).unwrap();
        let dt = select_dt(&flow.state, &cf, &StepControl::default()).unwrap_or(1e-12);
        if k % 10 == 0 {
            let d = metric_derivs(&flow.state).unwrap();
            let xim = flow.state.xi.iter().enumerate().max_by(|a,b| a.1.total_cmp(b.1)).unwrap();
            println!("step {k}: dt={dt:.2e} rm={:.3e}@{} xi_max={:.4}@{}", cf.rm_max, cf.rm_argmax, xim.1, xim.0);
            print!("  bs[0..6]  = "); for i in 0..6 { print!("{:+.5} ", d.b_s[i]); } println!();
            print!("  b/x[0..6] = "); for i in 0..6 { print!("{:+.5} ", flow.state.b[i]/x[i]); } println!();
            print!("  xi[0..6]  = "); for i in 0..6 { print!("{:+.5} ", flow.state.xi[i]); } println!();
            print!("  k12[0..6] = "); for i in 0..6 { print!("{:+.3e} ", cf.k12[i]); } println!();
        }
        step(&mut flow, &StepControl::default(), dt).unwrap();
    }
}
