use berger_flow::curvature::*;
use berger_flow::flow::*;
use berger_flow::initial::*;
use berger_flow::mesh::*;
use berger_flow::monitor::*;

fn residuals(n: usize, sx: f64, sw: f64) -> [f64; 7] {
    let grid = build_grid(n, 12.0, 2.0).unwrap();
    let st = construct_initial(Family::CapCylinder { b_scale: 1.0, squash: 0.3 }, grid).unwrap();
    let mut flow = FlowState::new(st, OuterBoundary::Pinned);
    let ctl = StepControl { xi_dissipation: sx, warp_dissipation: sw, ..Default::default() };
    while flow.state.t < 4e-3 {
        let cf = curvature_field(&flow.state).unwrap();
        let dt = select_dt(&flow.state, &cf, &ctl).unwrap();
        step(&mut flow, &ctl, dt).unwrap();
    }
    let mut window = Vec::new();
    for k in 0..3 {
        if k > 0 {
            for _ in 0..2 {
                let cf = curvature_field(&flow.state).unwrap();
                let dt = select_dt(&flow.state, &cf, &ctl).unwrap();
                step(&mut flow, &ctl, dt).unwrap();
            }
        }
        let cf = curvature_field(&flow.state).unwrap();
        window.push((flow.state.clone(), cf));
    }
    verify_evolution_identities(&window).unwrap().residuals
}

fn main() {
    for (sx, sw) in [(16.0, 16.0)] {
        println!("sx={sx} sw={sw}:");
        let c = residuals(2048, sx, sw);
        let f = residuals(4096, sx, sw);
        let g = f.clone();
        let _ = &g;
        for k in 0..7 {
            println!("  {:10} 2048: {:.3e}  4096: {:.3e}  ratio {:.2}", IDENTITY_NAMES[k], c[k], f[k], c[k]/f[k]);
        }
    }
}
