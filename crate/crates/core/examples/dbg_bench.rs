use berger_flow::config::parse_config;
use berger_flow::runner::run;
use std::io::Write;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(1024);
    let a: f64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(0.3);
    let dir = std::env::temp_dir().join(format!("bench_g_{n}_{a}"));
    let _ = std::fs::remove_dir_all(&dir);
    let cfg = parse_config(&format!(
        "family = cap_cylinder\nB = 1.0\na = {a}\nn_nodes = {n}\nx_max = 20.0\ncluster_factor = 2.0\nt_max = 1.0\nmax_rescales = 40\noutput_dir = {}\n",
        dir.display()
    )).unwrap();
    let t0 = std::time::Instant::now();
    match run(&cfg) {
        Ok(r) => {
            println!("termination {:?} ({}) wall {:.1}s", r.termination, r.termination_detail, t0.elapsed().as_secs_f64());
            println!("steps {} rescales {} final_t {:.6}", r.steps, r.rescales, r.final_t);
            println!("class {:?} ratio_floor {:.4}", r.class.verdict, r.class.ratio_floor);
            println!("singular {} t_est {:.6} +/- {:.2e} method {:?} type {:?} slope {:.3}",
                r.estimate.singular, r.estimate.t_est, r.estimate.uncertainty, r.estimate.method, r.estimate.type_verdict, r.estimate.type_slope);
            println!("untrusted_after {:?}", r.untrusted_after);
            println!("monitor failures: {:?}", r.monitor_failures.iter().take(3).collect::<Vec<_>>());
            for f in &r.frames {
                println!("frame t={:.6} lambda={:.3e} d_bry={:.4} d_cyl={:.4} defect={:.3e} slope={:.4}",
                    f.t_frame, f.lambda, f.d_bryant, f.d_cylinder, f.symmetry_defect, f.slope_at_base);
            }
            std::io::stdout().flush().unwrap();
        }
        Err(e) => println!("run error: {e}"),
    }
}
