use berger_flow::flow::*;
use berger_flow::mesh::*;

fn drift_after(n: usize, x_max: f64, dt_frac: f64, steps: usize) -> f64 {
    let grid = build_grid(n, x_max, 1.0).unwrap();
    let x = grid.nodes().to_vec();
    let h = x[1] - x[0];
    let st = MetricState::new(0.0, vec![1.0; n], x.clone(), x.clone(), grid, OriginKind::SmoothOrigin).unwrap();
    let mut flow = FlowState::new(st, OuterBoundary::Pinned);
    let dt = dt_frac * h * h;
    for _ in 0..steps {
        if step(&mut flow, &StepControl::default(), dt).is_err() { return f64::INFINITY; }
    }
    let mut worst = 0.0f64;
    for i in 0..n {
        worst = worst.max((flow.state.b[i] - x[i]).abs() / x[i]);
    }
    worst
}

fn main() {
    for frac in [0.05, 0.04, 0.035, 0.03, 0.025, 0.02, 0.015, 0.01] {
        let d = drift_after(512, 10.0, frac, 2000);
        println!("dt = {frac} h^2 -> drift {d:.3e}");
    }
}
