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
    let n = 256usize;
    let grid = build_grid(n, 8.0, 2.0).unwrap();
    let x = grid.nodes().to_vec();
    let b: Vec<f64> = x.iter().map(|x| x.tanh()).collect();
    let st = MetricState::new(0.0, vec![1.0; n], b.clone(), b.clone(), grid.clone(), OriginKind::SmoothOrigin).unwrap();
    let ctl = StepControl::default();
    let cf = curvature_field(&st).unwrap();
    let dt = select_dt(&st, &cf, &ctl).unwrap();
    println!("dt = {dt:.3e}");
    let n3 = 3*n;

    let step_map = |v: &[f64], eps: f64| -> Vec<f64> {
        // perturbed step
        let mut stp = st.clone();
        for i in 0..n {
            stp.b[i] += eps*v[i];
            stp.c[i] += eps*v[n+i];
            stp.xi[i] = (stp.xi[i].ln() + eps*v[2*n+i]).exp();
        }
        let mut fp = FlowState::new(stp, OuterBoundary::Pinned);
        step(&mut fp, &ctl, dt).unwrap();
        let up = pack(&fp.state);
        // reference step
        let mut f0 = FlowState::new(st.clone(), OuterBoundary::Pinned);
        step(&mut f0, &ctl, dt).unwrap();
        let u0 = pack(&f0.state);
        up.iter().zip(&u0).map(|(a,b)| (a-b)/eps).collect()
    };

    let mut v: Vec<f64> = (0..n3).map(|i| ((i*2654435761usize) as f64 / usize::MAX as f64) - 0.5).collect();
    let mut mult = 0.0;
    for it in 0..3000 {
        let nrm0 = v.iter().map(|a| a*a).sum::<f64>().sqrt();
        for a in v.iter_mut() { *a /= nrm0; }
        let w = step_map(&v, 1e-6);
        mult = w.iter().map(|a| a*a).sum::<f64>().sqrt();
        v = w;
        if it % 750 == 749 { println!("iter {it}: multiplier {mult:.6} rate {:.3e}", (mult as f64).ln()/dt); }
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
