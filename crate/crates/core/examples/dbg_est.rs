use berger_flow::io::read_timeseries;
use berger_flow::singularity::*;
use std::path::Path;

fn main() {
    let dir = std::env::temp_dir().join("dbg_cyl_run");
    let ts = read_timeseries(&dir.join("timeseries.dat")).unwrap();
    let path = dir.join("timeseries.dat");
    let samples = ts.series_samples(&path).unwrap();
    println!("samples {}", samples.len());
    let rm_last = samples.last().unwrap().rm_max;
    let rm_first = samples.first().unwrap().rm_max;
    println!("rm first {:.3e} last {:.3e}", rm_first, rm_last);
    // replicate window logic
    let mut window: Vec<&SeriesSample> = Vec::new();
    for s in samples.iter().filter(|s| s.rm_max >= rm_last / 10.0) {
        if window.last().map_or(true, |p: &&SeriesSample| s.t > p.t) { window.push(s); }
    }
    println!("window len {}", window.len());
    if window.len() > 2 {
        let t0 = window[0];
        let t1 = window[window.len()-1];
        println!("window t [{:.17}, {:.17}]", t0.t, t1.t);
        println!("window 1/rm [{:.3e}, {:.3e}]", 1.0/t0.rm_max, 1.0/t1.rm_max);
        println!("window b2 [{:.3e}, {:.3e}]", t0.b2_peak, t1.b2_peak);
    }
    let est = estimate_t(&samples).unwrap();
    println!("singular {} t_est {} method {:?}", est.singular, est.t_est, est.method);
}
