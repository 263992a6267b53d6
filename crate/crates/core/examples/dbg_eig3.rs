use berger_flow::flow::*;
use berger_flow::mesh::*;
use berger_flow::curvature::*;

fn pack(st: &MetricState) -> Vec<f64> {
    let mut v = st.b.clone();
    v.extend_from_slice(&st.c);
    v.extend(st.xi.iter().map(|x| x.ln()));
    v
}

fn main() {
    let n = 512usize;
    let grid = build_grid(n, 8.0, 2.0).unwrap();
    let x = grid.nodes().to_vec();
    let b: Vec<f64> = x.iter().map(|x| x.tanh()).collect();
    let st = MetricState::new(0.0, vec![1.0; n], b.clone(), b, grid, OriginKind::SmoothOrigin).unwrap();
    let mut flow = FlowState::new(st, OuterBoundary::Pinned);
    let ctl = StepControl::default();
    // evolve to t = 1.5e-3 (just before the observed blow-up)
    while flow.state.t < 1.5e-3 {
        let cf = curvature_field(&flow.state).unwrap();
        let dt = select_dt(&flow.state, &cf, &ctl).unwrap();
        step(&mut flow, &ctl, dt).unwrap();
    }
    let base = flow.clone();
    let cf = curvature_field(&base.state).unwrap();
    let dt = select_dt(&base.state, &cf, &ctl).unwrap();
    println!("base t = {:.4e}, rm = {:.3e}@{}, dt = {dt:.3e}", base.state.t, cf.rm_max, cf.rm_argmax);

    let step_map = |v: &[f64], eps: f64| -> Vec<f64> {
        let mut fp = base.clone();
        for i in 0..n {
            fp.state.b[i] += eps*v[i];
            fp.state.c[i] += eps*v[n+i];
            fp.state.xi[i] = (fp.state.xi[i].ln() + eps*v[2*n+i]).exp();
        }
        step(&mut fp, &ctl, dt).unwrap();
        let up = pack(&fp.state);
        let mut f0 = base.clone();
        step(&mut f0, &ctl, dt).unwrap();
        let u0 = pack(&f0.state);
        up.iter().zip(&u0).map(|(a,b)| (a-b)/eps).collect()
    };

    let n3 = 3*n;
    let mut v: Vec<f64> = (0..n3).map(|i| ((i*2654435761usize) as f64 / usize::MAX as f64) - 0.5).collect();
    let mut mult = 0.0;
    for it in 0..1200 {
        let nrm0 = v.iter().map(|a| a*a).sum::<f64>().sqrt();
        for a in v.iter_mut() { *a /= nrm0; }
        let w = step_map(&v, 1e-7);
        mult = w.iter().map(|a| a*a).sum::<f64>().sqrt();
        v = w;
        if it % 400 == 399 { println!("iter {it}: multiplier {mult:.6}"); }
    }
    let nrm = v.iter().map(|a| a*a).sum::<f64>().sqrt();
    for a in v.iter_mut() { *a /= nrm; }
    println!("mode at nodes 0..10 (db, dc, dlnxi):");
    for i in 0..10 {
        println!("  node {i:2} x={:.4}: {:+.3e} {:+.3e} {:+.3e}", x[i], v[i], v[n+i], v[2*n+i]);
    }
    for (name, lo, hi) in [("b",0,n), ("c",n,2*n), ("xi",2*n,3*n)] {
        let (am, im) = v[lo..hi].iter().enumerate().fold((0.0f64, 0usize), |(m,mi),(i,a)| if a.abs()>m {(a.abs(),i)} else {(m,mi)});
        println!("{name}: max |comp| {am:.3e} at node {im}");
    }
}
