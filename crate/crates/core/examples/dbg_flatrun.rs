use berger_flow::config::parse_config;
use berger_flow::runner::run;

fn main() {
    let dir = std::env::temp_dir().join("dbg_flat_run");
    let _ = std::fs::remove_dir_all(&dir);
    let cfg = parse_config(&format!(
        "family = flat\nn_nodes = 128\nx_max = 10.0\nt_max = 1e-4\noutput_dir = {}\n",
        dir.display()
    )).unwrap();
    println!("cluster_factor = {}", cfg.cluster_factor);
    match run(&cfg) {
        Ok(r) => println!("ok: {:?} steps {} rescales {}", r.termination, r.steps, r.rescales),
        Err(e) => println!("ERR: {e}"),
    }
}
