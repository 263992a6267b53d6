//! Snapshot and time-series persistence.
//!
//! Everything is delimited text: one table per snapshot (node columns) with
//! a key = value sidecar manifest, one table per run for the time series,
//! and a key = value result summary. Floats are printed with 17
//! significant digits so a read inverts a write exactly; identical runs
//! produce byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::curvature::CurvatureField;
use crate::error::{FlowError, Result};
use crate::mesh::{Grid, MetricState, OriginKind};
use crate::monitor::MonitorReport;
use crate::singularity::SeriesSample;

pub const FORMAT_VERSION: u32 = 1;

pub fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

/// Bookkeeping stored in the snapshot manifest next to the monitor fields.
#[derive(Debug, Clone, Copy)]
pub struct SnapshotMeta {
    pub step: u64,
    pub lambda_total: f64,
    pub dt: f64,
}

const SNAPSHOT_COLUMNS: [&str; 11] =
    ["x", "xi", "b", "c", "s", "k01", "k03", "k12", "k13", "R", "H"];

/// Write one snapshot table plus its manifest; returns the table path.
/// State and curvature are expected in physical units.
pub fn write_snapshot(
    state: &MetricState,
    cf: &CurvatureField,
    report: &MonitorReport,
    meta: SnapshotMeta,
    dir: &Path,
    index: usize,
) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let s_arr = crate::mesh::arclength(state).values;
    let n = state.len();
    let mut table = String::with_capacity(n * 24 * 11);
    table.push_str(&SNAPSHOT_COLUMNS.join(" "));
    table.push('\n');
    for i in 0..n {
        let row = [
            state.grid.nodes()[i],
            state.xi[i],
            state.b[i],
            state.c[i],
            s_arr[i],
            cf.k01[i],
            cf.k03[i],
            cf.k12[i],
            cf.k13[i],
            cf.scalar[i],
            cf.mean_h[i],
        ];
        let mut first = true;
        for v in row {
            if !first {
                table.push(' ');
            }
            first = false;
            let _ = write!(table, "{v:.16e}");
        }
        table.push('\n');
    }
    let dat_path = dir.join(format!("snapshot_{index:04}.dat"));
    fs::write(&dat_path, table)?;

    let mut m = String::new();
    let mut kv = |k: &str, v: String| {
        m.push_str(k);
        m.push_str(" = ");
        m.push_str(&v);
        m.push('\n');
    };
    kv("format_version", FORMAT_VERSION.to_string());
    kv("n_nodes", n.to_string());
    kv("t", fmt_f(state.t));
    kv("step", meta.step.to_string());
    kv("lambda_total", fmt_f(meta.lambda_total));
    kv("dt", fmt_f(meta.dt));
    kv(
        "origin",
        match state.origin {
            OriginKind::SmoothOrigin => "smooth".to_string(),
            OriginKind::ReflectionPlane => "reflection".to_string(),
        },
    );
    kv("cluster_factor", fmt_f(state.grid.cluster_factor()));
    kv("ratio_min", fmt_f(report.ratio_min));
    kv("ratio_max", fmt_f(report.ratio_max));
    kv("min_bs", fmt_f(report.min_bs));
    kv("min_h", fmt_f(report.min_h));
    kv("sup_abs_bs", fmt_f(report.sup_abs_bs));
    kv("sup_abs_cs", fmt_f(report.sup_abs_cs));
    kv("sup_abs_h", fmt_f(report.sup_abs_h));
    kv("sup_b", fmt_f(report.sup_b));
    kv("sup_pos_phi4", fmt_f(report.sup_pos_phi4));
    kv("sup_symm0", fmt_f(report.sup_symm0));
    kv("sup_symm1", fmt_f(report.sup_symm1));
    kv("sup_symm2", fmt_f(report.sup_symm2));
    kv("sup_phi1", fmt_f(report.sup_phi1));
    kv("sup_b2rm", fmt_f(report.sup_b2rm));
    kv("min_clogc", fmt_f(report.min_clogc));
    kv("min_blogb", fmt_f(report.min_blogb));
    kv("ch_origin", fmt_f(report.ch_origin));
    fs::write(manifest_path(&dat_path), m)?;
    Ok(dat_path)
}

fn manifest_path(dat: &Path) -> PathBuf {
    dat.with_extension("manifest")
}

fn parse_kv_file(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some(eq) = line.find('=') else {
            return Err(FlowError::FileFormat {
                path: path.display().to_string(),
                reason: format!("bad line '{line}'"),
            });
        };
        out.push((line[..eq].trim().to_string(), line[eq + 1..].trim().to_string()));
    }
    Ok(out)
}

fn kv_get<'a>(kv: &'a [(String, String)], key: &str, path: &Path) -> Result<&'a str> {
    kv.iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
        .ok_or_else(|| FlowError::FileFormat {
            path: path.display().to_string(),
            reason: format!("missing key '{key}'"),
        })
}

fn kv_f64(kv: &[(String, String)], key: &str, path: &Path) -> Result<f64> {
    kv_get(kv, key, path)?.parse::<f64>().map_err(|_| FlowError::FileFormat {
        path: path.display().to_string(),
        reason: format!("key '{key}' is not a number"),
    })
}

/// Read back a snapshot written by `write_snapshot`; values equal the
/// written ones exactly as printed.
pub fn read_snapshot(
    dat_path: &Path,
) -> Result<(MetricState, CurvatureField, MonitorReport, SnapshotMeta)> {
    let mpath = manifest_path(dat_path);
    let kv = parse_kv_file(&mpath)?;
    let version: u32 =
        kv_get(&kv, "format_version", &mpath)?.parse().map_err(|_| FlowError::FileFormat {
            path: mpath.display().to_string(),
            reason: "bad format_version".into(),
        })?;
    if version != FORMAT_VERSION {
        return Err(FlowError::FileFormat {
            path: mpath.display().to_string(),
            reason: format!("format_version {version}, expected {FORMAT_VERSION}"),
        });
    }
    let n: usize = kv_get(&kv, "n_nodes", &mpath)?.parse().map_err(|_| FlowError::FileFormat {
        path: mpath.display().to_string(),
        reason: "bad n_nodes".into(),
    })?;

    let text = fs::read_to_string(dat_path)?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| FlowError::FileFormat {
        path: dat_path.display().to_string(),
        reason: "empty file".into(),
    })?;
    let cols: Vec<&str> = header.split_whitespace().collect();
    for want in SNAPSHOT_COLUMNS {
        if !cols.contains(&want) {
            return Err(FlowError::FileFormat {
                path: dat_path.display().to_string(),
                reason: format!("missing column '{want}'"),
            });
        }
    }
    let col_of = |name: &str| cols.iter().position(|c| *c == name).unwrap();
    let mut data: Vec<Vec<f64>> = vec![Vec::with_capacity(n); cols.len()];
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != cols.len() {
            return Err(FlowError::FileFormat {
                path: dat_path.display().to_string(),
                reason: format!("row has {} fields, expected {}", fields.len(), cols.len()),
            });
        }
        for (j, f) in fields.iter().enumerate() {
            let v: f64 = f.parse().map_err(|_| FlowError::FileFormat {
                path: dat_path.display().to_string(),
                reason: format!("bad number '{f}'"),
            })?;
            data[j].push(v);
        }
    }
    if data[0].len() != n {
        return Err(FlowError::FileFormat {
            path: dat_path.display().to_string(),
            reason: format!("truncated table: {} rows, manifest says {n}", data[0].len()),
        });
    }

    let x = data[col_of("x")].clone();
    let cluster = kv_f64(&kv, "cluster_factor", &mpath)?;
    let grid = Arc::new(Grid::from_nodes(x, cluster)?);
    let origin = match kv_get(&kv, "origin", &mpath)? {
        "smooth" => OriginKind::SmoothOrigin,
        "reflection" => OriginKind::ReflectionPlane,
        other => {
            return Err(FlowError::FileFormat {
                path: mpath.display().to_string(),
                reason: format!("unknown origin kind '{other}'"),
            })
        }
    };
    let t = kv_f64(&kv, "t", &mpath)?;
    let mut state = MetricState::new(
        t,
        data[col_of("xi")].clone(),
        data[col_of("b")].clone(),
        data[col_of("c")].clone(),
        grid,
        origin,
    )?;
    state.t = t;

    let k01 = data[col_of("k01")].clone();
    let k03 = data[col_of("k03")].clone();
    let k12 = data[col_of("k12")].clone();
    let k13 = data[col_of("k13")].clone();
    let mut rm_max_node = vec![0.0; n];
    let mut rm_max = 0.0f64;
    let mut rm_argmax = 0usize;
    for i in 0..n {
        rm_max_node[i] = k01[i].abs().max(k03[i].abs()).max(k12[i].abs()).max(k13[i].abs());
        if rm_max_node[i] > rm_max {
            rm_max = rm_max_node[i];
            rm_argmax = i;
        }
    }
    let mut ds2_min = f64::INFINITY;
    for (xi, dx) in state.xi.iter().zip(state.grid.local_dx()) {
        ds2_min = ds2_min.min((xi * dx) * (xi * dx));
    }
    let cf = CurvatureField {
        k01,
        k03,
        k12,
        k13,
        scalar: data[col_of("R")].clone(),
        mean_h: data[col_of("H")].clone(),
        rm_max_node,
        rm_max,
        rm_argmax,
        noise_floor: 64.0 * f64::EPSILON / ds2_min,
    };

    let report = MonitorReport {
        t,
        ratio_min: kv_f64(&kv, "ratio_min", &mpath)?,
        ratio_min_node: 0,
        ratio_max: kv_f64(&kv, "ratio_max", &mpath)?,
        ratio_max_node: 0,
        min_bs: kv_f64(&kv, "min_bs", &mpath)?,
        min_bs_node: 0,
        min_h: kv_f64(&kv, "min_h", &mpath)?,
        min_h_node: 0,
        sup_abs_bs: kv_f64(&kv, "sup_abs_bs", &mpath)?,
        sup_abs_cs: kv_f64(&kv, "sup_abs_cs", &mpath)?,
        sup_abs_h: kv_f64(&kv, "sup_abs_h", &mpath)?,
        sup_b: kv_f64(&kv, "sup_b", &mpath)?,
        sup_pos_phi4: kv_f64(&kv, "sup_pos_phi4", &mpath)?,
        sup_symm0: kv_f64(&kv, "sup_symm0", &mpath)?,
        sup_symm1: kv_f64(&kv, "sup_symm1", &mpath)?,
        sup_symm2: kv_f64(&kv, "sup_symm2", &mpath)?,
        sup_phi1: kv_f64(&kv, "sup_phi1", &mpath)?,
        sup_b2rm: kv_f64(&kv, "sup_b2rm", &mpath)?,
        min_clogc: kv_f64(&kv, "min_clogc", &mpath)?,
        min_blogb: kv_f64(&kv, "min_blogb", &mpath)?,
        ch_origin: kv_f64(&kv, "ch_origin", &mpath)?,
    };
    let meta = SnapshotMeta {
        step: kv_get(&kv, "step", &mpath)?.parse().unwrap_or(0),
        lambda_total: kv_f64(&kv, "lambda_total", &mpath)?,
        dt: kv_f64(&kv, "dt", &mpath)?,
    };
    Ok((state, cf, report, meta))
}

/// One row of the per-step time series, all in physical units.
#[derive(Debug, Clone)]
pub struct TimeseriesRow {
    pub t: f64,
    pub dt: f64,
    pub rm_max: f64,
    pub r_origin: f64,
    pub min_h: f64,
    pub min_bs: f64,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub sup_b2rm: f64,
    pub sup_pos_phi4: f64,
    pub sup_b: f64,
    pub b2_peak: f64,
    pub sup_symm0: f64,
    pub sup_symm1: f64,
    pub sup_symm2: f64,
    pub sup_phi1: f64,
    pub sup_abs_bs: f64,
    pub sup_abs_cs: f64,
    pub min_clogc: f64,
    pub min_blogb: f64,
    pub ch_origin: f64,
    pub lambda_total: f64,
    pub b_at_track: Vec<f64>,
}

const TS_FIXED_COLUMNS: [&str; 22] = [
    "t",
    "dt",
    "rm_max",
    "r_origin",
    "min_h",
    "min_bs",
    "ratio_min",
    "ratio_max",
    "sup_b2rm",
    "sup_pos_phi4",
    "sup_b",
    "b2_peak",
    "sup_symm0",
    "sup_symm1",
    "sup_symm2",
    "sup_phi1",
    "sup_abs_bs",
    "sup_abs_cs",
    "min_clogc",
    "min_blogb",
    "ch_origin",
    "lambda_total",
];

/// Write the run's time series; `n_of_t` appends the N(t) column when a
/// singular-time estimate exists. Returns the file path.
pub fn emit_timeseries(
    rows: &[TimeseriesRow],
    track_radii: &[f64],
    n_of_t: Option<&[f64]>,
    dir: &Path,
) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let mut out = String::with_capacity(rows.len() * 24 * 24);
    out.push_str(&TS_FIXED_COLUMNS.join(" "));
    for (k, _) in track_radii.iter().enumerate() {
        let _ = write!(out, " b_track{k}");
    }
    if n_of_t.is_some() {
        out.push_str(" n_t");
    }
    out.push('\n');
    for (i, r) in rows.iter().enumerate() {
        let fixed = [
            r.t,
            r.dt,
            r.rm_max,
            r.r_origin,
            r.min_h,
            r.min_bs,
            r.ratio_min,
            r.ratio_max,
            r.sup_b2rm,
            r.sup_pos_phi4,
            r.sup_b,
            r.b2_peak,
            r.sup_symm0,
            r.sup_symm1,
            r.sup_symm2,
            r.sup_phi1,
            r.sup_abs_bs,
            r.sup_abs_cs,
            r.min_clogc,
            r.min_blogb,
            r.ch_origin,
            r.lambda_total,
        ];
        let mut first = true;
        for v in fixed.iter().chain(r.b_at_track.iter()) {
            if !first {
                out.push(' ');
            }
            first = false;
            let _ = write!(out, "{v:.16e}");
        }
        if let Some(ns) = n_of_t {
            let _ = write!(out, " {:.16e}", ns[i]);
        }
        out.push('\n');
    }
    let path = dir.join("timeseries.dat");
    fs::write(&path, out)?;
    Ok(path)
}

/// Columns and data of a time-series file, read back for analysis.
#[derive(Debug, Clone)]
pub struct Timeseries {
    pub columns: Vec<String>,
    /// Column-major data.
    pub data: Vec<Vec<f64>>,
}

impl Timeseries {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().position(|c| c == name).map(|j| self.data[j].as_slice())
    }

    pub fn series_samples(&self, path: &Path) -> Result<Vec<SeriesSample>> {
        let need = |name: &str| {
            self.column(name).ok_or_else(|| FlowError::FileFormat {
                path: path.display().to_string(),
                reason: format!("missing column '{name}'"),
            })
        };
        let t = need("t")?;
        let rm = need("rm_max")?;
        let b2 = need("b2_peak")?;
        Ok(t.iter()
            .zip(rm)
            .zip(b2)
            .map(|((t, rm), b2)| SeriesSample { t: *t, rm_max: *rm, b2_peak: *b2 })
            .collect())
    }
}

pub fn read_timeseries(path: &Path) -> Result<Timeseries> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| FlowError::FileFormat {
        path: path.display().to_string(),
        reason: "empty file".into(),
    })?;
    let columns: Vec<String> = header.split_whitespace().map(|s| s.to_string()).collect();
    let mut data = vec![Vec::new(); columns.len()];
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != columns.len() {
            return Err(FlowError::FileFormat {
                path: path.display().to_string(),
                reason: format!("row has {} fields, expected {}", fields.len(), columns.len()),
            });
        }
        for (j, f) in fields.iter().enumerate() {
            data[j].push(f.parse::<f64>().map_err(|_| FlowError::FileFormat {
                path: path.display().to_string(),
                reason: format!("bad number '{f}'"),
            })?);
        }
    }
    Ok(Timeseries { columns, data })
}

/// Write a reference profile as a three-column table.
pub fn write_profile(profile: &crate::oracles::Profile, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let mut out = String::new();
    out.push_str("sigma phi dphi\n");
    for i in 0..profile.sigma.len() {
        let _ = writeln!(
            out,
            "{:.16e} {:.16e} {:.16e}",
            profile.sigma[i], profile.phi[i], profile.dphi[i]
        );
    }
    fs::write(path, out)?;
    Ok(())
}

/// List snapshot tables in a run directory in index order.
pub fn list_snapshots(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if let Some(name) = path.file_name().and_then(|n| n.to_str()) {
            if name.starts_with("snapshot_") && name.ends_with(".dat") {
                out.push(path);
            }
        }
    }
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::curvature_field;
    use crate::mesh::build_grid;
    use crate::monitor::monitor_report;

    fn flat_state(n: usize, x_max: f64) -> MetricState {
        let grid = build_grid(n, x_max, 1.0).unwrap();
        let x = grid.nodes().to_vec();
        MetricState::new(0.0, vec![1.0; n], x.clone(), x, grid, OriginKind::SmoothOrigin).unwrap()
    }

    #[test]
    fn snapshot_round_trip_is_exact_as_printed() {
        let dir = tempfile::tempdir().unwrap();
        let st = flat_state(64, 2.0);
        let cf = curvature_field(&st).unwrap();
        let rep = monitor_report(&st, &cf).unwrap();
        let meta = SnapshotMeta { step: 17, lambda_total: 1.0, dt: 1e-5 };
        let path = write_snapshot(&st, &cf, &rep, meta, dir.path(), 0).unwrap();
        let (st2, cf2, rep2, meta2) = read_snapshot(&path).unwrap();
        assert_eq!(st.b, st2.b);
        assert_eq!(st.c, st2.c);
        assert_eq!(st.xi, st2.xi);
        assert_eq!(cf.k12, cf2.k12);
        assert_eq!(rep.sup_b, rep2.sup_b);
        assert_eq!(meta2.step, 17);
    }

    #[test]
    fn cylinder_manifest_carries_rm() {
        let dir = tempfile::tempdir().unwrap();
        let grid = build_grid(64, 2.0, 1.0).unwrap();
        let r = 0.5;
        let st = MetricState::new(
            0.0,
            vec![1.0; 64],
            vec![r; 64],
            vec![r; 64],
            grid,
            OriginKind::ReflectionPlane,
        )
        .unwrap();
        let cf = curvature_field(&st).unwrap();
        let rep = monitor_report(&st, &cf).unwrap();
        let meta = SnapshotMeta { step: 0, lambda_total: 1.0, dt: 1e-4 };
        let path = write_snapshot(&st, &cf, &rep, meta, dir.path(), 3).unwrap();
        let (_, cf2, _, _) = read_snapshot(&path).unwrap();
        assert!((cf2.rm_max - 1.0 / (r * r)).abs() < 1e-9);
    }

    #[test]
    fn missing_column_is_a_schema_error() {
        let dir = tempfile::tempdir().unwrap();
        let st = flat_state(64, 2.0);
        let cf = curvature_field(&st).unwrap();
        let rep = monitor_report(&st, &cf).unwrap();
        let meta = SnapshotMeta { step: 0, lambda_total: 1.0, dt: 1e-5 };
        let path = write_snapshot(&st, &cf, &rep, meta, dir.path(), 0).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let butchered = text.replacen("x xi b c s", "x xi b c arc", 1);
        fs::write(&path, butchered).unwrap();
        let err = read_snapshot(&path).unwrap_err();
        match err {
            FlowError::FileFormat { reason, .. } => assert!(reason.contains("'s'"), "{reason}"),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn truncated_snapshot_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let st = flat_state(64, 2.0);
        let cf = curvature_field(&st).unwrap();
        let rep = monitor_report(&st, &cf).unwrap();
        let meta = SnapshotMeta { step: 0, lambda_total: 1.0, dt: 1e-5 };
        let path = write_snapshot(&st, &cf, &rep, meta, dir.path(), 0).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let cut: Vec<&str> = text.lines().take(30).collect();
        fs::write(&path, cut.join("\n")).unwrap();
        assert!(matches!(read_snapshot(&path), Err(FlowError::FileFormat { .. })));
    }

    #[test]
    fn version_mismatch_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let st = flat_state(64, 2.0);
        let cf = curvature_field(&st).unwrap();
        let rep = monitor_report(&st, &cf).unwrap();
        let meta = SnapshotMeta { step: 0, lambda_total: 1.0, dt: 1e-5 };
        let path = write_snapshot(&st, &cf, &rep, meta, dir.path(), 0).unwrap();
        let mpath = path.with_extension("manifest");
        let text = fs::read_to_string(&mpath).unwrap();
        fs::write(&mpath, text.replacen("format_version = 1", "format_version = 99", 1)).unwrap();
        assert!(matches!(read_snapshot(&path), Err(FlowError::FileFormat { .. })));
    }

    #[test]
    fn timeseries_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let rows: Vec<TimeseriesRow> = (0..10)
            .map(|k| TimeseriesRow {
                t: k as f64 * 0.1,
                dt: 0.1,
                rm_max: 1.0 + k as f64,
                r_origin: 0.5,
                min_h: 0.1,
                min_bs: 0.0,
                ratio_min: 0.7,
                ratio_max: 1.0,
                sup_b2rm: 1.0,
                sup_pos_phi4: 0.0,
                sup_b: 1.0,
                b2_peak: 1.0 / (1.0 + k as f64),
                sup_symm0: 0.3,
                sup_symm1: 0.1,
                sup_symm2: 0.2,
                sup_phi1: -0.5,
                sup_abs_bs: 1.0,
                sup_abs_cs: 1.0,
                min_clogc: -0.1,
                min_blogb: -0.2,
                ch_origin: 3.0,
                lambda_total: 1.0,
                b_at_track: vec![0.4, 0.9],
            })
            .collect();
        let path = emit_timeseries(&rows, &[0.5, 1.0], None, dir.path()).unwrap();
        let ts = read_timeseries(&path).unwrap();
        assert_eq!(ts.column("rm_max").unwrap()[9], 10.0);
        assert_eq!(ts.column("b_track1").unwrap()[0], 0.9);
        let samples = ts.series_samples(&path).unwrap();
        assert_eq!(samples.len(), 10);
        assert_eq!(samples[3].rm_max, 4.0);
    }
}
