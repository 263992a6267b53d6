//! Run configuration: a flat `key = value` text format with `#` comments.
//! Unknown keys are rejected with their line number; every omitted key is
//! filled from the documented default and `serialize` echoes the complete
//! configuration back out (17 significant digits, so a round trip is
//! exact).

use std::collections::HashMap;

use crate::error::{FlowError, Result};
use crate::flow::{OuterBoundary, StepControl};
use crate::initial::Family;
use crate::monitor::MonitorTolerances;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub family: Family,
    pub n_nodes: usize,
    pub x_max: f64,
    pub cluster_factor: f64,
    pub step: StepControl,
    pub t_max: f64,
    /// Snapshots per decade of rm_max growth (0 disables growth-triggered
    /// snapshots).
    pub snapshots_per_decade: f64,
    /// Fixed-interval snapshot cadence in physical time.
    pub snapshot_dt: f64,
    pub monitor_tol: MonitorTolerances,
    pub output_dir: String,
    /// Seed recorded for synthetic-noise tests; the flow itself never
    /// draws random numbers.
    pub seed: u64,
    pub max_rescales: u32,
    /// Rescale when rm_max crosses this factor times its value at the
    /// last rescale.
    pub rescale_trigger: f64,
    /// Peak resolution target after a rescale, nodes per unit rescaled
    /// arclength.
    pub nodes_per_unit: f64,
    pub outer_boundary: OuterBoundary,
    /// Euclidean radii at which b is tracked into the time series.
    pub track_radii: Vec<f64>,
    /// Frame truncation in rescaled arclength.
    pub sigma_max: f64,
    /// Profile-comparison window.
    pub sigma_cmp: f64,
}

/// Pool of family parameters with their defaults; the parser reads every
/// family key into this and then builds the `Family` the config names.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyParams {
    pub b_scale: f64,
    pub squash: f64,
    pub q: f64,
    pub ell: f64,
    pub mu0: f64,
    pub r_n: f64,
    pub depth: f64,
    pub x0: f64,
    pub width: f64,
    pub radius: f64,
}

impl Default for FamilyParams {
    fn default() -> Self {
        FamilyParams {
            b_scale: 1.0,
            squash: 0.0,
            q: 0.0,
            ell: 1.0,
            mu0: 1.0,
            r_n: 0.2,
            depth: 0.6,
            x0: 3.0,
            width: 1.0,
            radius: 1.0,
        }
    }
}

struct Entry {
    value: String,
    line: usize,
    used: bool,
}

struct KvMap {
    entries: HashMap<String, Entry>,
}

impl KvMap {
    fn parse(text: &str) -> Result<KvMap> {
        let mut entries = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let Some(eq) = line.find('=') else {
                return Err(FlowError::Config {
                    line: line_no,
                    reason: format!("expected 'key = value', got '{line}'"),
                });
            };
            let key = line[..eq].trim().to_string();
            let value = line[eq + 1..].trim().to_string();
            if key.is_empty() {
                return Err(FlowError::Config { line: line_no, reason: "empty key".into() });
            }
            if entries
                .insert(key.clone(), Entry { value, line: line_no, used: false })
                .is_some()
            {
                return Err(FlowError::Config {
                    line: line_no,
                    reason: format!("duplicate key '{key}'"),
                });
            }
        }
        Ok(KvMap { entries })
    }

    fn take_f64(&mut self, key: &str, default: f64) -> Result<(f64, usize)> {
        match self.entries.get_mut(key) {
            None => Ok((default, 0)),
            Some(e) => {
                e.used = true;
                let v = e.value.parse::<f64>().map_err(|_| FlowError::Config {
                    line: e.line,
                    reason: format!("key '{key}': expected a number, got '{}'", e.value),
                })?;
                Ok((v, e.line))
            }
        }
    }

    fn take_usize(&mut self, key: &str, default: usize) -> Result<(usize, usize)> {
        match self.entries.get_mut(key) {
            None => Ok((default, 0)),
            Some(e) => {
                e.used = true;
                let v = e.value.parse::<usize>().map_err(|_| FlowError::Config {
                    line: e.line,
                    reason: format!("key '{key}': expected a nonnegative integer, got '{}'", e.value),
                })?;
                Ok((v, e.line))
            }
        }
    }

    fn take_string(&mut self, key: &str) -> Option<(String, usize)> {
        self.entries.get_mut(key).map(|e| {
            e.used = true;
            (e.value.clone(), e.line)
        })
    }

    fn reject_unknown(&self) -> Result<()> {
        let mut unknown: Vec<(&String, usize)> = self
            .entries
            .iter()
            .filter(|(_, e)| !e.used)
            .map(|(k, e)| (k, e.line))
            .collect();
        unknown.sort_by_key(|(_, line)| *line);
        if let Some((key, line)) = unknown.first() {
            return Err(FlowError::Config { line: *line, reason: format!("unknown key '{key}'") });
        }
        Ok(())
    }
}

fn range_err(key: &str, line: usize, reason: String) -> FlowError {
    FlowError::Config { line, reason: format!("key '{key}': {reason}") }
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut kv = KvMap::parse(text)?;

    let Some((family_name, family_line)) = kv.take_string("family") else {
        return Err(FlowError::Config { line: 0, reason: "missing required key 'family'".into() });
    };

    let mut p = FamilyParams::default();
    let (v, l) = kv.take_f64("B", p.b_scale)?;
    p.b_scale = v;
    let b_line = l;
    let (v, _) = kv.take_f64("a", p.squash)?;
    p.squash = v;
    let (v, _) = kv.take_f64("q", p.q)?;
    p.q = v;
    let (v, _) = kv.take_f64("ell", p.ell)?;
    p.ell = v;
    let (v, _) = kv.take_f64("mu0", p.mu0)?;
    p.mu0 = v;
    let (v, _) = kv.take_f64("r_n", p.r_n)?;
    p.r_n = v;
    let (v, _) = kv.take_f64("d", p.depth)?;
    p.depth = v;
    let (v, _) = kv.take_f64("x0", p.x0)?;
    p.x0 = v;
    let (v, _) = kv.take_f64("w", p.width)?;
    p.width = v;
    let (v, _) = kv.take_f64("radius", p.radius)?;
    p.radius = v;

    let family = match family_name.as_str() {
        "cap_cylinder" => Family::CapCylinder { b_scale: p.b_scale, squash: p.squash },
        "taubnut_like" => Family::TaubnutLike { q: p.q, ell: p.ell, mu0: p.mu0 },
        "neck" => Family::Neck { r_n: p.r_n, depth: p.depth, x0: p.x0, width: p.width },
        "cylinder" => Family::Cylinder { radius: p.radius },
        "flat" => Family::Flat,
        other => {
            return Err(FlowError::Config {
                line: family_line,
                reason: format!(
                    "unknown family '{other}' (expected cap_cylinder, taubnut_like, neck, cylinder or flat)"
                ),
            })
        }
    };
    if let Family::CapCylinder { b_scale, .. } = family {
        if !(b_scale > 0.0) {
            return Err(range_err("B", b_line, format!("need > 0, got {b_scale}")));
        }
    }

    let (n_nodes, _) = kv.take_usize("n_nodes", 2048)?;
    let (x_max, x_max_line) = kv.take_f64("x_max", 20.0)?;
    let (cluster_factor, cf_line) = kv.take_f64("cluster_factor", 2.0)?;

    let mut step = StepControl::default();
    let (v, _) = kv.take_f64("cfl_factor", step.cfl_factor)?;
    step.cfl_factor = v;
    let (v, _) = kv.take_f64("curvature_factor", step.curvature_factor)?;
    step.curvature_factor = v;
    let (v, _) = kv.take_f64("dt_min", step.dt_min)?;
    step.dt_min = v;
    let (v, _) = kv.take_f64("dt_max", step.dt_max)?;
    step.dt_max = v;
    let (v, _) = kv.take_f64("xi_dissipation", step.xi_dissipation)?;
    step.xi_dissipation = v;
    let (v, _) = kv.take_f64("warp_dissipation", step.warp_dissipation)?;
    step.warp_dissipation = v;

    let (t_max, t_max_line) = kv.take_f64("t_max", 1.0)?;
    let (snapshots_per_decade, _) = kv.take_f64("snapshots_per_decade", 4.0)?;
    let (snapshot_dt, snap_dt_line) = kv.take_f64("snapshot_dt", 0.05)?;

    let mut monitor_tol = MonitorTolerances::default();
    let (v, _) = kv.take_f64("monitor_tol", monitor_tol.rel)?;
    monitor_tol.rel = v;
    let (v, _) = kv.take_f64("phi4_rate_tol", monitor_tol.phi4_rate)?;
    monitor_tol.phi4_rate = v;

    let output_dir = kv
        .take_string("output_dir")
        .map(|(s, _)| s)
        .unwrap_or_else(|| "run-out".to_string());
    let (seed, _) = kv.take_usize("seed", 0)?;
    let (max_rescales, _) = kv.take_usize("max_rescales", 40)?;
    let (rescale_trigger, trig_line) = kv.take_f64("rescale_trigger", 4.0)?;
    let (nodes_per_unit, npu_line) = kv.take_f64("nodes_per_unit", 64.0)?;

    let outer_boundary = match kv.take_string("outer_boundary") {
        None => match family {
            Family::Cylinder { .. } => OuterBoundary::Reflect,
            _ => OuterBoundary::Pinned,
        },
        Some((s, line)) => match s.as_str() {
            "pinned" => OuterBoundary::Pinned,
            "reflect" => OuterBoundary::Reflect,
            other => {
                return Err(FlowError::Config {
                    line,
                    reason: format!("outer_boundary must be pinned or reflect, got '{other}'"),
                })
            }
        },
    };

    let track_radii = match kv.take_string("track_radii") {
        None => Vec::new(),
        Some((s, line)) => {
            let mut out = Vec::new();
            for item in s.split(',') {
                let item = item.trim();
                if item.is_empty() {
                    continue;
                }
                let r: f64 = item.parse().map_err(|_| FlowError::Config {
                    line,
                    reason: format!("track_radii: bad entry '{item}'"),
                })?;
                if !(r > 0.0) {
                    return Err(FlowError::Config {
                        line,
                        reason: format!("track_radii: radius must be > 0, got {r}"),
                    });
                }
                out.push(r);
            }
            out
        }
    };

    let (sigma_max, _) = kv.take_f64("sigma_max", 20.0)?;
    let (sigma_cmp, sc_line) = kv.take_f64("sigma_cmp", 5.0)?;

    kv.reject_unknown()?;

    // range validation
    if n_nodes < 16 {
        return Err(range_err("n_nodes", 0, format!("need >= 16, got {n_nodes}")));
    }
    if !(x_max > 0.0 && x_max.is_finite()) {
        return Err(range_err("x_max", x_max_line, format!("need finite > 0, got {x_max}")));
    }
    if !(cluster_factor >= 1.0 && cluster_factor.is_finite()) {
        return Err(range_err(
            "cluster_factor",
            cf_line,
            format!("need finite >= 1, got {cluster_factor}"),
        ));
    }
    step.validate().map_err(|e| FlowError::Config { line: 0, reason: e.to_string() })?;
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(range_err("t_max", t_max_line, format!("need finite > 0, got {t_max}")));
    }
    if !(snapshot_dt > 0.0) {
        return Err(range_err("snapshot_dt", snap_dt_line, "need > 0".into()));
    }
    if !(rescale_trigger > 1.0) {
        return Err(range_err(
            "rescale_trigger",
            trig_line,
            format!("need > 1, got {rescale_trigger}"),
        ));
    }
    if !(nodes_per_unit >= 1.0) {
        return Err(range_err("nodes_per_unit", npu_line, "need >= 1".into()));
    }
    if !(sigma_cmp > 0.0 && sigma_cmp <= sigma_max) {
        return Err(range_err(
            "sigma_cmp",
            sc_line,
            format!("need 0 < sigma_cmp <= sigma_max, got {sigma_cmp}"),
        ));
    }

    Ok(RunConfig {
        family,
        n_nodes,
        x_max,
        cluster_factor,
        step,
        t_max,
        snapshots_per_decade,
        snapshot_dt,
        monitor_tol,
        output_dir,
        seed: seed as u64,
        max_rescales: max_rescales as u32,
        rescale_trigger,
        nodes_per_unit,
        outer_boundary,
        track_radii,
        sigma_max,
        sigma_cmp,
    })
}

fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn serialize_config(cfg: &RunConfig) -> String {
    let mut out = String::new();
    let mut push = |k: &str, v: String| {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(&v);
        out.push('\n');
    };
    push("family", cfg.family.name().to_string());
    match cfg.family {
        Family::CapCylinder { b_scale, squash } => {
            push("B", fmt_f(b_scale));
            push("a", fmt_f(squash));
        }
        Family::TaubnutLike { q, ell, mu0 } => {
            push("q", fmt_f(q));
            push("ell", fmt_f(ell));
            push("mu0", fmt_f(mu0));
        }
        Family::Neck { r_n, depth, x0, width } => {
            push("r_n", fmt_f(r_n));
            push("d", fmt_f(depth));
            push("x0", fmt_f(x0));
            push("w", fmt_f(width));
        }
        Family::Cylinder { radius } => push("radius", fmt_f(radius)),
        Family::Flat => {}
    }
    push("n_nodes", cfg.n_nodes.to_string());
    push("x_max", fmt_f(cfg.x_max));
    push("cluster_factor", fmt_f(cfg.cluster_factor));
    push("cfl_factor", fmt_f(cfg.step.cfl_factor));
    push("curvature_factor", fmt_f(cfg.step.curvature_factor));
    push("dt_min", fmt_f(cfg.step.dt_min));
    push("dt_max", fmt_f(cfg.step.dt_max));
    push("xi_dissipation", fmt_f(cfg.step.xi_dissipation));
    push("warp_dissipation", fmt_f(cfg.step.warp_dissipation));
    push("t_max", fmt_f(cfg.t_max));
    push("snapshots_per_decade", fmt_f(cfg.snapshots_per_decade));
    push("snapshot_dt", fmt_f(cfg.snapshot_dt));
    push("monitor_tol", fmt_f(cfg.monitor_tol.rel));
    push("phi4_rate_tol", fmt_f(cfg.monitor_tol.phi4_rate));
    push("output_dir", cfg.output_dir.clone());
    push("seed", cfg.seed.to_string());
    push("max_rescales", cfg.max_rescales.to_string());
    push("rescale_trigger", fmt_f(cfg.rescale_trigger));
    push("nodes_per_unit", fmt_f(cfg.nodes_per_unit));
    push(
        "outer_boundary",
        match cfg.outer_boundary {
            OuterBoundary::Pinned => "pinned".to_string(),
            OuterBoundary::Reflect => "reflect".to_string(),
        },
    );
    if !cfg.track_radii.is_empty() {
        let items: Vec<String> = cfg.track_radii.iter().map(|r| fmt_f(*r)).collect();
        push("track_radii", items.join(", "));
    }
    push("sigma_max", fmt_f(cfg.sigma_max));
    push("sigma_cmp", fmt_f(cfg.sigma_cmp));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = parse_config("family = cap_cylinder\nB = 1.0\nn_nodes = 512\n").unwrap();
        assert_eq!(cfg.family, Family::CapCylinder { b_scale: 1.0, squash: 0.0 });
        assert_eq!(cfg.n_nodes, 512);
        assert_eq!(cfg.x_max, 20.0);
        assert_eq!(cfg.step.cfl_factor, 0.2);
        assert_eq!(cfg.max_rescales, 40);
        assert_eq!(cfg.outer_boundary, OuterBoundary::Pinned);
    }

    #[test]
    fn comments_and_blanks_are_ignored() {
        let text = "# a run\nfamily = flat\n\nn_nodes = 64 # inline comment\n";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.family, Family::Flat);
        assert_eq!(cfg.n_nodes, 64);
    }

    #[test]
    fn unknown_key_is_rejected_with_line() {
        let err = parse_config("family = flat\nbogus_key = 3\n").unwrap_err();
        match err {
            FlowError::Config { line, reason } => {
                assert_eq!(line, 2);
                assert!(reason.contains("bogus_key"));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn out_of_range_value_names_the_key() {
        let err = parse_config("family = flat\ncluster_factor = -1\n").unwrap_err();
        match err {
            FlowError::Config { line, reason } => {
                assert_eq!(line, 2);
                assert!(reason.contains("cluster_factor"), "{reason}");
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn type_mismatch_names_the_key() {
        let err = parse_config("family = flat\nn_nodes = many\n").unwrap_err();
        match err {
            FlowError::Config { line, reason } => {
                assert_eq!(line, 2);
                assert!(reason.contains("n_nodes"));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn missing_family_is_an_error() {
        assert!(parse_config("n_nodes = 64\n").is_err());
    }

    #[test]
    fn cylinder_family_defaults_to_reflecting_boundary() {
        let cfg = parse_config("family = cylinder\nradius = 1.0\n").unwrap();
        assert_eq!(cfg.outer_boundary, OuterBoundary::Reflect);
    }

    #[test]
    fn explicit_round_trip() {
        let text = "family = neck\nr_n = 0.25\nd = 0.5\nx0 = 2.5\nw = 0.8\nn_nodes = 333\nt_max = 0.125\ntrack_radii = 0.5, 1.5\n";
        let cfg = parse_config(text).unwrap();
        let echoed = serialize_config(&cfg);
        let cfg2 = parse_config(&echoed).unwrap();
        assert_eq!(cfg, cfg2);
    }

    proptest! {
        #[test]
        fn round_trip_property(
            b_scale in 0.1f64..5.0,
            squash in 0.0f64..0.5,
            n_nodes in 16usize..5000,
            x_max in 0.5f64..100.0,
            cluster in 1.0f64..16.0,
            t_max in 1e-3f64..10.0,
            trig in 1.5f64..16.0,
            seed in 0u64..u64::MAX / 2,
        ) {
            let cfg = RunConfig {
                family: Family::CapCylinder { b_scale, squash },
                n_nodes,
                x_max,
                cluster_factor: cluster,
                step: StepControl::default(),
                t_max,
                snapshots_per_decade: 4.0,
                snapshot_dt: 0.05,
                monitor_tol: MonitorTolerances::default(),
                output_dir: "out".to_string(),
                seed,
                max_rescales: 40,
                rescale_trigger: trig,
                nodes_per_unit: 64.0,
                outer_boundary: OuterBoundary::Pinned,
                track_radii: vec![0.5, 1.0],
                sigma_max: 20.0,
                sigma_cmp: 5.0,
            };
            let text = serialize_config(&cfg);
            let cfg2 = parse_config(&text).unwrap();
            prop_assert_eq!(cfg, cfg2);
        }
    }
}
