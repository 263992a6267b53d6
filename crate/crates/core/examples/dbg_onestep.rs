use berger_flow::flow::*;
use berger_flow::mesh::*;

fn main() {
    for (n, xm, gamma) in [(128usize, 10.0f64, 2.0f64), (128, 10.0, 1.0), (512, 10.0, 2.0), (128, 20.0, 2.0)] {
        let grid = build_grid(n, xm, gamma).unwrap();
        let x = grid.nodes().to_vec();
        let st = MetricState::new(0.0, vec![1.0; n], x.clone(), x.clone(), grid, OriginKind::SmoothOrigin).unwrap();
        // inspect the raw rhs first
        let out = rhs(&st).unwrap();
        let mut worst = (0usize, 0.0f64);
        for i in 0..n {
            if out.dlnxi_dt[i].abs() > worst.1 { worst = (i, out.dlnxi_dt[i].abs()); }
        }
        let mut worstb = (0usize, 0.0f64);
        for i in 0..n {
            if out.db_dt[i].abs() > worstb.1 { worstb = (i, out.db_dt[i].abs()); }
        }
        println!("n={n} xm={xm} g={gamma}: max|dlnxi|={:.3e}@{} max|db|={:.3e}@{} (x={:.3})",
            worst.1, worst.0, worstb.1, worstb.0, x[worstb.0]);
    }
}
