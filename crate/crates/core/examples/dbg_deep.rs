use berger_flow::flow::*;
use berger_flow::mesh::*;
use berger_flow::curvature::*;
use std::time::Instant;

fn main() {
    let n = 2048usize;
    let grid = build_grid(n, 20.0, 4.0).unwrap();
    let x = grid.nodes().to_vec();
    let b: Vec<f64> = x.iter().map(|x| x.tanh()).collect();
    let st = MetricState::new(0.0, vec![1.0; n], b.clone(), b, grid, OriginKind::SmoothOrigin).unwrap();
    let mut flow = FlowState::new(st, OuterBoundary::Pinned);
    let ctl = StepControl::default();
    let rm0 = curvature_field(&flow.state).unwrap().rm_max;
    let t0 = Instant::now();
    let mut next_decade = 10.0 * rm0;
    loop {
        let cf = match curvature_field(&flow.state) { Ok(c)=>c, Err(e)=>{println!("{e}");break;} };
        if cf.rm_max > 1e4 * rm0 { println!("reached rm growth 1e4 at t={:.6}", flow.state.t); break; }
        if cf.rm_max >= next_decade {
            next_decade *= 10.0;
            let d = metric_derivs(&flow.state).unwrap();
            let mut min_h = f64::INFINITY; let mut min_bs = f64::INFINITY;
            let mut ratio_max = 0.0f64; let mut bc_drift = 0.0f64;
            for i in 0..n {
                min_h = min_h.min(cf.mean_h[i]);
                min_bs = min_bs.min(d.b_s[i]);
                ratio_max = ratio_max.max(flow.state.c[i]/flow.state.b[i]);
                bc_drift = bc_drift.max((flow.state.b[i]-flow.state.c[i]).abs()/flow.state.b[i]);
            }
            let ch0 = flow.state.c[0]*cf.mean_h[0];
            println!("t={:.5} rm={:.3e}@{} steps={} minH={:+.2e} min_bs={:+.2e} ratio_max-1={:+.2e} bc={:.1e} cH0={:.4} wall={:.1}s",
                flow.state.t, cf.rm_max, cf.rm_argmax, flow.step_count, min_h, min_bs, ratio_max-1.0, bc_drift, ch0, t0.elapsed().as_secs_f64());
        }
        let dt = match select_dt(&flow.state, &cf, &ctl) { Ok(d)=>d, Err(e)=>{println!("{e} at t={:.5} steps={}", flow.state.t, flow.step_count); break;} };
        if let Err(e) = step(&mut flow, &ctl, dt) { println!("{e} t={:.5}", flow.state.t); break; }
        if t0.elapsed().as_secs_f64() > 600.0 { println!("timeout at t={:.5} steps={}", flow.state.t, flow.step_count); break; }
    }
    println!("total steps {} wall {:.1}s", flow.step_count, t0.elapsed().as_secs_f64());
}
