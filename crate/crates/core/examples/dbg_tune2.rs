use berger_flow::flow::*;
use berger_flow::mesh::*;
use berger_flow::curvature::*;

fn run(sx: f64, sw: f64, t_end: f64) {
    let n = 512usize;
    let grid = build_grid(n, 8.0, 2.0).unwrap();
    let x = grid.nodes().to_vec();
    let b: Vec<f64> = x.iter().map(|x| x.tanh()).collect();
    let st = MetricState::new(0.0, vec![1.0; n], b.clone(), b, grid, OriginKind::SmoothOrigin).unwrap();
    let mut flow = FlowState::new(st, OuterBoundary::Pinned);
    let ctl = StepControl { xi_dissipation: sx, warp_dissipation: sw, ..Default::default() };
    let mut steps = 0u64;
    let mut rm_interior_seen = 0.0f64;
    while flow.state.t < t_end {
        let cf = match curvature_field(&flow.state) { Ok(c) => c, Err(e) => { println!("sx={sx} sw={sw}: cf err {e} t={:.3e}", flow.state.t); return; } };
        // interior rm away from the pinned boundary layer
        let rm_int = cf.rm_max_node[..n-8].iter().cloned().fold(0.0f64, f64::max);
        rm_interior_seen = rm_interior_seen.max(rm_int);
        if rm_int > 1e4 { println!("sx={sx} sw={sw}: interior rm {:.2e} at t={:.4e} ({} steps)", rm_int, flow.state.t, steps); return; }
        let dt = match select_dt(&flow.state, &cf, &ctl) { Ok(d) => d, Err(e) => { println!("sx={sx} sw={sw}: {e} t={:.3e}", flow.state.t); return; } };
        if let Err(e) = step(&mut flow, &ctl, dt) { println!("sx={sx} sw={sw}: {e} t={:.4e}", flow.state.t); return; }
        steps += 1;
    }
    println!("sx={sx} sw={sw}: OK t={t_end} rm_int={rm_interior_seen:.3e} b0/x0={:.5} ({steps} steps)", flow.state.b[0]/x[0]);
}

fn main() {
    for sx in [8.0, 16.0, 32.0] {
        for sw in [2.0, 8.0, 16.0] {
            run(sx, sw, 0.05);
        }
    }
}
