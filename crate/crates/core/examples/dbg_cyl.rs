use berger_flow::config::parse_config;
use berger_flow::runner::run;

fn main() {
    let dir = std::env::temp_dir().join("dbg_cyl_run");
    let _ = std::fs::remove_dir_all(&dir);
    let cfg = parse_config(&format!(
        "family = cylinder\nradius = 1.0\nn_nodes = 64\nx_max = 10.0\nt_max = 1.0\nmax_rescales = 24\noutput_dir = {}\n",
        dir.display()
    )).unwrap();
    match run(&cfg) {
        Ok(r) => {
            println!("termination {:?} ({})", r.termination, r.termination_detail);
            println!("steps {} rescales {} final_t {:.6}", r.steps, r.rescales, r.final_t);
            println!("singular {} t_est {:?}", r.estimate.singular, r.estimate.t_est);
            let ts = berger_flow::io::read_timeseries(&r.timeseries_path).unwrap();
            let rm = ts.column("rm_max").unwrap();
            println!("rm first {:.3e} last {:.3e} max {:.3e}", rm[0], rm[rm.len()-1], rm.iter().cloned().fold(0.0f64, f64::max));
        }
        Err(e) => println!("run error: {e}"),
    }
}
