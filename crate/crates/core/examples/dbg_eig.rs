use berger_flow::flow::*;
use berger_flow::mesh::*;

fn pack(st: &MetricState) -> Vec<f64> {
    let mut v = st.b.clone();
    v.extend_from_slice(&st.c);
    v.extend(st.xi.iter().map(|x| x.ln()));
    v
}
fn unpack(base: &MetricState, v: &[f64]) -> MetricState {
    let n = base.len();
    let mut st = base.clone();
    st.b.copy_from_slice(&v[0..n]);
    st.c.copy_from_slice(&v[n..2*n]);
    for i in 0..n { st.xi[i] = v[2*n+i].exp(); }
    st
}
fn rhs_vec(st: &MetricState) -> Vec<f64> {
    let r = rhs(st).unwrap();
    let mut v = r.db_dt;
    v.extend_from_slice(&r.dc_dt);
    v.extend_from_slice(&r.dlnxi_dt);
    v
}

fn main() {
    let n = 256usize;
    let grid = build_grid(n, 8.0, 2.0).unwrap();
    let x = grid.nodes().to_vec();
    let b: Vec<f64> = x.iter().map(|x| x.tanh()).collect();
    let st = MetricState::new(0.0, vec![1.0; n], b.clone(), b, grid, OriginKind::SmoothOrigin).unwrap();
    let u0 = pack(&st);
    let f0 = rhs_vec(&st);
    let n3 = 3*n;
    // J v via finite difference; exclude the pinned last node of b,c,xi rows
    let jv = |v: &[f64]| -> Vec<f64> {
        let nrm = v.iter().map(|a| a*a).sum::<f64>().sqrt();
        let eps = 1e-7 / nrm.max(1e-300);
        let up: Vec<f64> = u0.iter().zip(v).map(|(u, d)| u + eps*d).collect();
        let stp = unpack(&st, &up);
        let f1 = rhs_vec(&stp);
        let mut out: Vec<f64> = f1.iter().zip(&f0).map(|(a,b)| (a-b)/eps).collect();
        for k in 0..3 { out[k*n + n-1] = 0.0; } // pinned boundary rows
        out
    };
    // power iteration on exp(tau J)
    let tau = 5e-7;
    let substeps = 4; // tau_sub small for stability of the explicit exp approx
    let mut v: Vec<f64> = (0..n3).map(|i| ((i*2654435761usize) as f64 / usize::MAX as f64) - 0.5).collect();
    for k in 0..3 { v[k*n + n-1] = 0.0; }
    let mut rate = 0.0;
    for it in 0..4000 {
        for _ in 0..substeps {
            let w = jv(&v);
            for i in 0..n3 { v[i] += tau/substeps as f64 * w[i]; }
        }
        let nrm = v.iter().map(|a| a*a).sum::<f64>().sqrt();
        rate = nrm.ln() / tau;
        for a in v.iter_mut() { *a /= nrm; }
        if it % 1000 == 999 { println!("iter {it}: growth rate {rate:.4e}  (1/x0^2 = {:.3e})", 1.0/(x[0]*x[0])); }
    }
    // show mode structure near origin
    println!("mode (b, c, lnxi) at nodes 0..8:");
    for i in 0..8 {
        println!("  node {i} x={:.4}: db={:+.4e} dc={:+.4e} dlnxi={:+.4e}", x[i], v[i], v[n+i], v[2*n+i]);
    }
    let bmax = v[0..n].iter().cloned().fold(0.0f64, |m,a| m.max(a.abs()));
    let cmax = v[n..2*n].iter().cloned().fold(0.0f64, |m,a| m.max(a.abs()));
    let xmax = v[2*n..3*n].iter().cloned().fold(0.0f64, |m,a| m.max(a.abs()));
    println!("component maxima: b {bmax:.3e} c {cmax:.3e} lnxi {xmax:.3e}");
}
