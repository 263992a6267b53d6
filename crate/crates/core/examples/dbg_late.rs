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
    let ctl = StepControl::default();
    let mut printed = 0;
    loop {
        let cf = curvature_field(&flow.state).unwrap();
        if cf.rm_max > 1e3 && printed < 3 {
            printed += 1;
            println!("t={:.5e} rm={:.3e}@{}", flow.state.t, cf.rm_max, cf.rm_argmax);
            println!("   i     x        b/x       xi      k12       k01");
            for i in 0..12 {
                println!("  {i:2} {:.5} {:+.6} {:+.6} {:+.3e} {:+.3e}", x[i], flow.state.b[i]/x[i], flow.state.xi[i], cf.k12[i], cf.k01[i]);
            }
        }
        if cf.rm_max > 5e3 { break; }
        let dt = match select_dt(&flow.state, &cf, &ctl) { Ok(d)=>d, Err(e)=>{println!("{e}");break;} };
        if let Err(e) = step(&mut flow, &ctl, dt) { println!("{e} at t={:.4e}", flow.state.t); break; }
    }
}
