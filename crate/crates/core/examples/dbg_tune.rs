use berger_flow::flow::*;
use berger_flow::mesh::*;
use berger_flow::curvature::*;

fn run(sigma_warp: f64, cfl: f64, t_end: f64) {
    let n = 512usize;
    let grid = build_grid(n, 8.0, 2.0).unwrap();
    let x = grid.nodes().to_vec();
    let b: Vec<f64> = x.iter().map(|x| x.tanh()).collect();
    let st = MetricState::new(0.0, vec![1.0; n], b.clone(), b, grid, OriginKind::SmoothOrigin).unwrap();
    let mut flow = FlowState::new(st, OuterBoundary::Pinned);
    let ctl = StepControl { cfl_factor: cfl, warp_dissipation: sigma_warp, ..Default::default() };
    let mut steps = 0u64;
    let mut rm_seen = 0.0f64;
    while flow.state.t < t_end {
        let cf = match curvature_field(&flow.state) { Ok(c) => c, Err(e) => { println!("sw={sigma_warp} cfl={cfl}: cf err {e} at t={:.3e}", flow.state.t); return; } };
        rm_seen = rm_seen.max(cf.rm_max);
        if cf.rm_max > 1e5 { println!("sw={sigma_warp} cfl={cfl}: rm exploded {:.2e}@{} at t={:.4e} ({} steps)", cf.rm_max, cf.rm_argmax, flow.state.t, steps); return; }
        let dt = match select_dt(&flow.state, &cf, &ctl) { Ok(d) => d, Err(e) => { println!("sw={sigma_warp} cfl={cfl}: {e} t={:.3e}", flow.state.t); return; } };
        if let Err(e) = step(&mut flow, &ctl, dt) { println!("sw={sigma_warp} cfl={cfl}: {e} at t={:.4e}", flow.state.t); return; }
        steps += 1;
    }
    let cf = curvature_field(&flow.state).unwrap();
    println!("sw={sigma_warp} cfl={cfl}: OK to t={t_end} rm={:.4e}@{} (max seen {:.2e}) b0/x0={:.6} ({} steps)", cf.rm_max, cf.rm_argmax, rm_seen, flow.state.b[0]/x[0], steps);
}

fn main() {
    for sw in [2.0, 8.0, 16.0] {
        run(sw, 0.2, 0.05);
    }
}
