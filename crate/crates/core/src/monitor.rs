//! Evaluation of every functional known to be controlled along warped
//! Berger Ricci flows, plus verdicts on their monotonicity and a residual
//! check of the evolution identities that those controls rest on.
//!
//! The controls watched per time slice:
//!   c/b in [eps0, 1]; b_s >= 0 and H >= 0; sup((b_s^2-4)/b)_+ and sup b
//!   non-increasing; b^2 |Rm|, (1/b)(b/c-1), |c_s/c - b_s/b|, b|k01-k03|,
//!   (b_s^2-1)/b all bounded; c_ss c log c and b_ss b log b bounded below
//!   where the log is negative; |b_s|, |c_s| bounded; cH -> 3 at the
//!   origin.
//!
//! The controls are stated with existential constants; the monitor turns
//! them into falsifiable assertions by comparing against reference values
//! captured along the run (bands relative to a reference time).

use crate::curvature::CurvatureField;
use crate::error::{FlowError, Result};
use crate::flow::{metric_derivs, MetricDerivs};
use crate::initial::ClassVerdict;
use crate::mesh::{deriv_s, MetricState, Parity, RadialField};

/// One time slice of every monitored functional. Locations are node
/// indices on the grid the report was taken on.
#[derive(Debug, Clone)]
pub struct MonitorReport {
    pub t: f64,
    pub ratio_min: f64,
    pub ratio_min_node: usize,
    pub ratio_max: f64,
    pub ratio_max_node: usize,
    pub min_bs: f64,
    pub min_bs_node: usize,
    pub min_h: f64,
    pub min_h_node: usize,
    pub sup_abs_bs: f64,
    pub sup_abs_cs: f64,
    pub sup_abs_h: f64,
    pub sup_b: f64,
    /// sup ((b_s^2 - 4)/b)_+
    pub sup_pos_phi4: f64,
    /// sup (1/b)(b/c - 1)
    pub sup_symm0: f64,
    /// sup |c_s/c - b_s/b|
    pub sup_symm1: f64,
    /// sup b |k01 - k03|
    pub sup_symm2: f64,
    /// sup (b_s^2 - 1)/b
    pub sup_phi1: f64,
    /// sup b^2 max(|k01|,|k03|,|k12|,|k13|)
    pub sup_b2rm: f64,
    /// min of c_ss c log c over nodes with c < 1 (0 if no such node)
    pub min_clogc: f64,
    /// min of b_ss b log b over nodes with b < 1 (0 if no such node)
    pub min_blogb: f64,
    /// c H extrapolated to the origin in x^2 from the two innermost nodes
    pub ch_origin: f64,
}

pub fn monitor_report(state: &MetricState, cf: &CurvatureField) -> Result<MonitorReport> {
    let d = metric_derivs(state)?;
    monitor_report_with(state, cf, &d)
}

pub fn monitor_report_with(
    state: &MetricState,
    cf: &CurvatureField,
    d: &MetricDerivs,
) -> Result<MonitorReport> {
    let n = state.len();
    let mut r = MonitorReport {
        t: state.t,
        ratio_min: f64::INFINITY,
        ratio_min_node: 0,
        ratio_max: f64::NEG_INFINITY,
        ratio_max_node: 0,
        min_bs: f64::INFINITY,
        min_bs_node: 0,
        min_h: f64::INFINITY,
        min_h_node: 0,
        sup_abs_bs: 0.0,
        sup_abs_cs: 0.0,
        sup_abs_h: 0.0,
        sup_b: 0.0,
        sup_pos_phi4: 0.0,
        sup_symm0: f64::NEG_INFINITY,
        sup_symm1: 0.0,
        sup_symm2: 0.0,
        sup_phi1: f64::NEG_INFINITY,
        sup_b2rm: 0.0,
        min_clogc: 0.0,
        min_blogb: 0.0,
        ch_origin: 0.0,
    };
    for i in 0..n {
        let (b, c) = (state.b[i], state.c[i]);
        let (bs, cs) = (d.b_s[i], d.c_s[i]);
        let ratio = c / b;
        if ratio < r.ratio_min {
            r.ratio_min = ratio;
            r.ratio_min_node = i;
        }
        if ratio > r.ratio_max {
            r.ratio_max = ratio;
            r.ratio_max_node = i;
        }
        if bs < r.min_bs {
            r.min_bs = bs;
            r.min_bs_node = i;
        }
        let h = cf.mean_h[i];
        if h < r.min_h {
            r.min_h = h;
            r.min_h_node = i;
        }
        r.sup_abs_bs = r.sup_abs_bs.max(bs.abs());
        r.sup_abs_cs = r.sup_abs_cs.max(cs.abs());
        r.sup_abs_h = r.sup_abs_h.max(h.abs());
        r.sup_b = r.sup_b.max(b);
        r.sup_pos_phi4 = r.sup_pos_phi4.max(((bs * bs - 4.0) / b).max(0.0));
        r.sup_symm0 = r.sup_symm0.max((b / c - 1.0) / b);
        r.sup_symm1 = r.sup_symm1.max((cs / c - bs / b).abs());
        r.sup_symm2 = r.sup_symm2.max(b * (cf.k01[i] - cf.k03[i]).abs());
        r.sup_phi1 = r.sup_phi1.max((bs * bs - 1.0) / b);
        r.sup_b2rm = r.sup_b2rm.max(b * b * cf.rm_max_node[i]);
        if c < 1.0 {
            r.min_clogc = r.min_clogc.min(d.c_ss[i] * c * c.ln());
        }
        if b < 1.0 {
            r.min_blogb = r.min_blogb.min(d.b_ss[i] * b * b.ln());
        }
    }
    // even extrapolation of cH to x = 0 through the two innermost nodes
    let x = state.grid.nodes();
    let ch0 = state.c[0] * cf.mean_h[0];
    let ch1 = state.c[1] * cf.mean_h[1];
    let (x0, x1) = (x[0], x[1]);
    r.ch_origin = (ch0 * x1 * x1 - ch1 * x0 * x0) / (x1 * x1 - x0 * x0);
    for (name, v) in [
        ("ratio_min", r.ratio_min),
        ("min_bs", r.min_bs),
        ("min_h", r.min_h),
        ("sup_b2rm", r.sup_b2rm),
        ("ch_origin", r.ch_origin),
    ] {
        if !v.is_finite() {
            return Err(FlowError::invalid("monitor", format!("{name} non-finite")));
        }
    }
    Ok(r)
}

/// A single monotone/band verdict.
#[derive(Debug, Clone)]
pub struct MonitorVerdict {
    pub name: &'static str,
    pub pass: bool,
    /// Hard verdicts abort the run (ratio bounds); soft ones mark it
    /// untrusted from the failing time onward.
    pub hard: bool,
    pub detail: String,
}

/// Tolerances applied by the monotone checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorTolerances {
    /// Relative tolerance, scaled by the magnitude of each quantity.
    pub rel: f64,
    /// Allowed increase of sup((b_s^2-4)/b)_+ per unit time.
    pub phi4_rate: f64,
}

impl Default for MonitorTolerances {
    fn default() -> Self {
        MonitorTolerances { rel: 1e-3, phi4_rate: 1e-2 }
    }
}

/// Incremental monotonicity tracker; `check_monotone` is the batch wrapper.
#[derive(Debug, Clone)]
pub struct MonitorTracker {
    class: ClassVerdict,
    tol: MonitorTolerances,
    ratio_floor0: f64,
    phi4_ref: f64,
    t_ref: f64,
    sup_b_min_seen: f64,
    started: bool,
}

impl MonitorTracker {
    pub fn new(class: ClassVerdict, tol: MonitorTolerances) -> MonitorTracker {
        MonitorTracker {
            class,
            tol,
            ratio_floor0: 0.0,
            phi4_ref: 0.0,
            t_ref: 0.0,
            sup_b_min_seen: f64::INFINITY,
            started: false,
        }
    }

    pub fn initial_ratio_floor(&self) -> f64 {
        self.ratio_floor0
    }

    /// Ingest one report; returns the failing verdicts (empty when all
    /// checks pass). The first report only sets the reference values.
    pub fn observe(&mut self, r: &MonitorReport) -> Vec<MonitorVerdict> {
        if !self.started {
            self.started = true;
            self.ratio_floor0 = r.ratio_min;
            self.phi4_ref = r.sup_pos_phi4;
            self.t_ref = r.t;
            self.sup_b_min_seen = r.sup_b;
            return Vec::new();
        }
        let mut fails = Vec::new();
        let tol = self.tol.rel;

        if r.ratio_max > 1.0 + tol {
            fails.push(MonitorVerdict {
                name: "ratio_upper",
                pass: false,
                hard: true,
                detail: format!(
                    "c/b = {} > 1 + {tol} at node {} (t = {})",
                    r.ratio_max, r.ratio_max_node, r.t
                ),
            });
        }
        if r.ratio_min < self.ratio_floor0 * (1.0 - 1e-3) {
            fails.push(MonitorVerdict {
                name: "ratio_lower",
                pass: false,
                hard: true,
                detail: format!(
                    "c/b = {} below initial floor {} at node {} (t = {})",
                    r.ratio_min, self.ratio_floor0, r.ratio_min_node, r.t
                ),
            });
        }

        let monotone_class =
            matches!(self.class, ClassVerdict::Bounded | ClassVerdict::Unbounded);
        if monotone_class {
            if r.min_bs < -tol * r.sup_abs_bs.max(1e-30) {
                fails.push(MonitorVerdict {
                    name: "min_bs",
                    pass: false,
                    hard: false,
                    detail: format!("b_s = {} at node {} (t = {})", r.min_bs, r.min_bs_node, r.t),
                });
            }
            if r.min_h < -tol * r.sup_abs_h.max(1e-30) {
                fails.push(MonitorVerdict {
                    name: "min_h",
                    pass: false,
                    hard: false,
                    detail: format!("H = {} at node {} (t = {})", r.min_h, r.min_h_node, r.t),
                });
            }
            let budget = self.phi4_ref
                + self.tol.phi4_rate * (1.0 + self.phi4_ref) * (r.t - self.t_ref).max(0.0)
                + tol;
            if r.sup_pos_phi4 > budget {
                fails.push(MonitorVerdict {
                    name: "phi4_monotone",
                    pass: false,
                    hard: false,
                    detail: format!(
                        "sup((b_s^2-4)/b)_+ = {} above budget {budget} (t = {})",
                        r.sup_pos_phi4, r.t
                    ),
                });
            }
            if self.class == ClassVerdict::Bounded && r.sup_b > self.sup_b_min_seen * (1.0 + tol)
            {
                fails.push(MonitorVerdict {
                    name: "sup_b_monotone",
                    pass: false,
                    hard: false,
                    detail: format!(
                        "sup b = {} above running min {} (t = {})",
                        r.sup_b, self.sup_b_min_seen, r.t
                    ),
                });
            }
        }
        self.sup_b_min_seen = self.sup_b_min_seen.min(r.sup_b);
        fails
    }
}

/// Batch verdicts over a history of reports. Needs at least two reports.
/// For neck/other classes only the ratio checks apply.
pub fn check_monotone(
    history: &[MonitorReport],
    class: ClassVerdict,
    tol: MonitorTolerances,
) -> Result<Vec<MonitorVerdict>> {
    if history.len() < 2 {
        return Err(FlowError::invalid("history", "need >= 2 reports"));
    }
    let mut tracker = MonitorTracker::new(class, tol);
    let mut out = Vec::new();
    for r in history {
        out.extend(tracker.observe(r));
    }
    if out.is_empty() {
        out.push(MonitorVerdict {
            name: "all",
            pass: true,
            hard: false,
            detail: format!("{} reports, no violations", history.len()),
        });
    }
    Ok(out)
}

/// Names of the evolution identities checked by
/// `verify_evolution_identities`, in report order.
pub const IDENTITY_NAMES: [&str; 7] =
    ["log(c/b)", "(c/b)b_s", "cH", "b_s", "c_s", "k01", "k03"];

#[derive(Debug, Clone)]
pub struct IdentityReport {
    /// Max-norm residual per identity over the interior (outer 10% of
    /// nodes excluded), evaluated at the centre of the window.
    pub residuals: [f64; 7],
    pub t_mid: f64,
}

struct Slice<'a> {
    state: &'a MetricState,
    cf: &'a CurvatureField,
    d: MetricDerivs,
}

fn quantity(sl: &Slice, which: usize, i: usize) -> f64 {
    let (b, c) = (sl.state.b[i], sl.state.c[i]);
    match which {
        0 => (c / b).ln(),
        1 => (c / b) * sl.d.b_s[i],
        2 => c * sl.cf.mean_h[i],
        3 => sl.d.b_s[i],
        4 => sl.d.c_s[i],
        5 => sl.cf.k01[i],
        6 => sl.cf.k03[i],
        _ => unreachable!(),
    }
}

/// Residuals of the evolution identities over a window of at least three
/// consecutive accepted steps on one fixed grid: centred time difference
/// of each quantity against its analytic right-hand side at the middle
/// slice, with every spatial derivative taken by the same arclength
/// stencils the flow itself uses.
pub fn verify_evolution_identities(
    window: &[(MetricState, CurvatureField)],
) -> Result<IdentityReport> {
    if window.len() < 3 {
        return Err(FlowError::invalid("window", "need >= 3 consecutive slices"));
    }
    let m = window.len() / 2;
    let nodes0 = window[0].0.grid.nodes();
    for (st, _) in window {
        if st.grid.nodes() != nodes0 {
            return Err(FlowError::invalid(
                "window",
                "grid changed inside window (rescale not allowed)",
            ));
        }
    }
    let prev = Slice {
        state: &window[m - 1].0,
        cf: &window[m - 1].1,
        d: metric_derivs(&window[m - 1].0)?,
    };
    let mid = Slice { state: &window[m].0, cf: &window[m].1, d: metric_derivs(&window[m].0)? };
    let next = Slice {
        state: &window[m + 1].0,
        cf: &window[m + 1].1,
        d: metric_derivs(&window[m + 1].0)?,
    };
    let (t0, t1, t2) = (prev.state.t, mid.state.t, next.state.t);
    if !(t0 < t1 && t1 < t2) {
        return Err(FlowError::invalid("window", "times not increasing"));
    }
    // nonuniform centred time-derivative weights at t1
    let (hm, hp) = (t1 - t0, t2 - t1);
    let wm = -hp / (hm * (hm + hp));
    let w0 = (hp - hm) / (hm * hp);
    let wp = hm / (hp * (hm + hp));

    let st = mid.state;
    let n = st.len();
    let interior = n - n / 10;
    // the innermost nodes of smooth-origin states are rewritten each step
    // by the axis regularity conditions (nodes 0..2, stencil reach +2),
    // so the check targets the undoctored bulk; the cut is a fixed
    // fraction of the grid so refinement studies compare the same
    // physical region
    let inner_start = match st.origin {
        crate::mesh::OriginKind::SmoothOrigin => (n / 100).max(5).min(n / 4),
        crate::mesh::OriginKind::ReflectionPlane => 0,
    };
    let mut residuals = [0.0f64; 7];

    for which in 0..7 {
        let q_mid: Vec<f64> = (0..n).map(|i| quantity(&mid, which, i)).collect();
        let dq_dt: Vec<f64> = (0..n)
            .map(|i| {
                wm * quantity(&prev, which, i) + w0 * q_mid[i] + wp * quantity(&next, which, i)
            })
            .collect();
        // all seven quantities are even across the axis
        let qf = RadialField::new(q_mid.clone(), Parity::Even);
        let q_s = deriv_s(&qf, st, 1)?;
        let q_ss = deriv_s(&qf, st, 2)?;
        let mut worst = 0.0f64;
        let mut worst_i = 0usize;
        for i in inner_start..interior {
            let (b, c) = (st.b[i], st.c[i]);
            let (bs, cs) = (mid.d.b_s[i], mid.d.c_s[i]);
            let (b2, c2) = (b * b, c * c);
            let b4 = b2 * b2;
            let lap = q_ss.values[i] + (2.0 * bs / b + cs / c) * q_s.values[i];
            let rhs = match which {
                0 => lap + 4.0 / b2 * (1.0 - c2 / b2),
                1 => {
                    q_ss.values[i]
                        + q_s.values[i] * (2.0 * bs / b - cs / c)
                        + q_mid[i] / b2 * (8.0 - 10.0 * c2 / b2 - 2.0 * bs * bs)
                        + 4.0 * c2 / b4 * cs
                }
                2 => {
                    q_ss.values[i]
                        + q_s.values[i] * (2.0 * bs / b - cs / c)
                        + 2.0 * q_mid[i] / b2 * (c2 / b2 - bs * bs)
                        + 16.0 / b2 * (c / b) * bs * (1.0 - c2 / b2)
                }
                3 => {
                    lap - 2.0 * (bs / b) * q_s.values[i]
                        + (4.0 / b2 - bs * bs / b2 - cs * cs / c2 - 6.0 * c2 / b4) * bs
                        + 4.0 * c / (b2 * b) * cs
                }
                4 => {
                    lap - 2.0 * (cs / c) * q_s.values[i]
                        - (6.0 * c2 / b4 + 2.0 * bs * bs / b2) * cs
                        + 8.0 * c2 * c / (b4 * b) * bs
                }
                5 => {
                    let k01 = mid.cf.k01[i];
                    let k03 = mid.cf.k03[i];
                    lap + 2.0 * k01 * k01
                        + k01
                            * (8.0 / b2 - 8.0 * c2 / b4 - 2.0 * cs * cs / c2
                                - 4.0 * bs * bs / b2)
                        + k03 * (4.0 * c2 / b4 - 2.0 * bs * cs / (b * c))
                        - 4.0 * cs * cs / b4
                        + 24.0 * c * bs * cs / (b4 * b)
                        - 2.0 * bs * cs * cs * cs / (b * c2 * c)
                        - 24.0 * c2 * bs * bs / (b4 * b2)
                        + 8.0 * bs * bs / b4
                        - 2.0 * bs * bs * bs * bs / b4
                }
                6 => {
                    let k01 = mid.cf.k01[i];
                    let k03 = mid.cf.k03[i];
                    lap + 2.0 * k03 * k03
                        - 4.0 * k03 * (bs * bs / b2 + c2 / b4)
                        + 4.0 * k01 * (2.0 * c2 / b4 - bs * cs / (b * c))
                        + 12.0 * cs * cs / b4
                        + 40.0 * c2 * bs * bs / (b4 * b2)
                        - 48.0 * c * bs * cs / (b4 * b)
                        - 4.0 * bs * bs * bs * cs / (b2 * b * c)
                }
                _ => unreachable!(),
            };
            let r = (dq_dt[i] - rhs).abs();
            if r > worst {
                worst = r;
                worst_i = i;
            }
        }
        if std::env::var("IDENTITY_DEBUG").is_ok() {
            eprintln!("  [{}] worst {worst:.3e} at node {worst_i} (x = {:.4})", IDENTITY_NAMES[which], st.grid.nodes()[worst_i]);
        }
        if which == 5 && std::env::var("IDENTITY_PROFILE").is_ok() {
            for i in (inner_start..inner_start + 60).step_by(4) {
                let (b, c) = (st.b[i], st.c[i]);
                let (bs, cs) = (mid.d.b_s[i], mid.d.c_s[i]);
                let lap = q_ss.values[i] + (2.0 * bs / b + cs / c) * q_s.values[i];
                let k01 = mid.cf.k01[i];
                let k03 = mid.cf.k03[i];
                let (b2, c2) = (b * b, c * c);
                let b4 = b2 * b2;
                let rhs = lap + 2.0 * k01 * k01
                    + k01 * (8.0 / b2 - 8.0 * c2 / b4 - 2.0 * cs * cs / c2 - 4.0 * bs * bs / b2)
                    + k03 * (4.0 * c2 / b4 - 2.0 * bs * cs / (b * c))
                    - 4.0 * cs * cs / b4
                    + 24.0 * c * bs * cs / (b4 * b)
                    - 2.0 * bs * cs * cs * cs / (b * c2 * c)
                    - 24.0 * c2 * bs * bs / (b4 * b2)
                    + 8.0 * bs * bs / b4
                    - 2.0 * bs * bs * bs * bs / b4;
                eprintln!("    k01 res[{i}] x={:.4} = {:.3e} (dqdt {:.3e} rhs {:.3e})", st.grid.nodes()[i], (dq_dt[i] - rhs).abs(), dq_dt[i], rhs);
            }
        }
        residuals[which] = worst;
    }
    Ok(IdentityReport { residuals, t_mid: t1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::curvature_field;
    use crate::flow::{select_dt, step, FlowState, OuterBoundary, StepControl};
    use crate::mesh::{build_grid, MetricState, OriginKind};

    fn flat_state(n: usize, x_max: f64) -> MetricState {
        let grid = build_grid(n, x_max, 1.0).unwrap();
        let x = grid.nodes().to_vec();
        MetricState::new(0.0, vec![1.0; n], x.clone(), x, grid, OriginKind::SmoothOrigin).unwrap()
    }

    fn cylinder_state(n: usize, x_max: f64, r: f64) -> MetricState {
        let grid = build_grid(n, x_max, 1.0).unwrap();
        MetricState::new(
            0.0,
            vec![1.0; n],
            vec![r; n],
            vec![r; n],
            grid,
            OriginKind::ReflectionPlane,
        )
        .unwrap()
    }

    #[test]
    fn flat_report_values() {
        let st = flat_state(2048, 20.0);
        let cf = curvature_field(&st).unwrap();
        let r = monitor_report(&st, &cf).unwrap();
        assert!((r.ratio_min - 1.0).abs() < 1e-14);
        assert!((r.ratio_max - 1.0).abs() < 1e-14);
        assert!(r.min_h > 0.0);
        assert!(r.sup_pos_phi4 == 0.0, "{}", r.sup_pos_phi4);
        assert!((r.ch_origin - 3.0).abs() < 1e-6, "cH(0) = {}", r.ch_origin);
    }

    #[test]
    fn cylinder_report_values() {
        let r0 = 0.5;
        let st = cylinder_state(256, 8.0, r0);
        let cf = curvature_field(&st).unwrap();
        let r = monitor_report(&st, &cf).unwrap();
        assert!(r.min_bs.abs() < 1e-10);
        assert!(r.min_h.abs() < 1e-10);
        assert!(r.sup_pos_phi4 == 0.0);
        // b^2 rm = r^2 (1/r^2) = 1
        assert!((r.sup_b2rm - 1.0).abs() < 1e-8, "{}", r.sup_b2rm);
    }

    #[test]
    fn cap_report_values() {
        let grid = build_grid(2048, 20.0, 1.0).unwrap();
        let st = crate::initial::construct_initial(
            crate::initial::Family::CapCylinder { b_scale: 1.0, squash: 0.3 },
            grid,
        )
        .unwrap();
        let cf = curvature_field(&st).unwrap();
        let r = monitor_report(&st, &cf).unwrap();
        assert!(r.min_bs >= -1e-12, "{}", r.min_bs);
        assert!(r.min_h >= -1e-12, "{}", r.min_h);
        assert!((r.ratio_min - 0.7).abs() < 1e-6);
        assert!((r.ch_origin - 3.0).abs() < 1e-5, "cH(0) = {}", r.ch_origin);
    }

    #[test]
    fn two_flat_reports_pass_all_checks() {
        let st = flat_state(256, 10.0);
        let cf = curvature_field(&st).unwrap();
        let r1 = monitor_report(&st, &cf).unwrap();
        let mut r2 = r1.clone();
        r2.t = 0.1;
        let verdicts =
            check_monotone(&[r1, r2], ClassVerdict::Unbounded, MonitorTolerances::default())
                .unwrap();
        assert!(verdicts.iter().all(|v| v.pass), "{verdicts:?}");
    }

    #[test]
    fn fabricated_h_drop_fails_with_named_verdict() {
        let st = flat_state(256, 10.0);
        let cf = curvature_field(&st).unwrap();
        let r1 = monitor_report(&st, &cf).unwrap();
        let mut r2 = r1.clone();
        r2.t = 0.05;
        r2.min_h = -1.0;
        let verdicts =
            check_monotone(&[r1, r2], ClassVerdict::Bounded, MonitorTolerances::default())
                .unwrap();
        let fail = verdicts.iter().find(|v| !v.pass).expect("expected a failure");
        assert_eq!(fail.name, "min_h");
        assert!(!fail.hard);
    }

    #[test]
    fn ratio_violation_is_hard() {
        let st = flat_state(256, 10.0);
        let cf = curvature_field(&st).unwrap();
        let r1 = monitor_report(&st, &cf).unwrap();
        let mut r2 = r1.clone();
        r2.t = 0.05;
        r2.ratio_max = 1.01;
        let verdicts =
            check_monotone(&[r1, r2], ClassVerdict::Neck, MonitorTolerances::default()).unwrap();
        let fail = verdicts.iter().find(|v| !v.pass).unwrap();
        assert_eq!(fail.name, "ratio_upper");
        assert!(fail.hard);
    }

    #[test]
    fn neck_class_skips_monotone_checks() {
        let st = flat_state(256, 10.0);
        let cf = curvature_field(&st).unwrap();
        let r1 = monitor_report(&st, &cf).unwrap();
        let mut r2 = r1.clone();
        r2.t = 0.05;
        r2.min_h = -5.0; // necks legitimately have H < 0
        let verdicts =
            check_monotone(&[r1, r2], ClassVerdict::Neck, MonitorTolerances::default()).unwrap();
        assert!(verdicts.iter().all(|v| v.pass), "{verdicts:?}");
    }

    fn window_of(
        state0: MetricState,
        outer: OuterBoundary,
        steps_between: usize,
    ) -> Vec<(MetricState, CurvatureField)> {
        let mut flow = FlowState::new(state0, outer);
        let ctl = StepControl::default();
        let mut out = Vec::new();
        for k in 0..3 {
            if k > 0 {
                for _ in 0..steps_between {
                    let cf = curvature_field(&flow.state).unwrap();
                    let dt = select_dt(&flow.state, &cf, &ctl).unwrap();
                    step(&mut flow, &ctl, dt).unwrap();
                }
            }
            let cf = curvature_field(&flow.state).unwrap();
            out.push((flow.state.clone(), cf));
        }
        out
    }

    #[test]
    fn flat_window_residuals_vanish() {
        let window = window_of(flat_state(512, 10.0), OuterBoundary::Pinned, 5);
        let rep = verify_evolution_identities(&window).unwrap();
        for (name, r) in IDENTITY_NAMES.iter().zip(rep.residuals) {
            assert!(r < 1e-5, "{name}: residual {r}");
        }
    }

    #[test]
    fn cylinder_window_residuals_vanish_for_scale_free_identities() {
        let window = window_of(cylinder_state(256, 8.0, 1.0), OuterBoundary::Reflect, 5);
        let rep = verify_evolution_identities(&window).unwrap();
        // f = log(c/b) = 0 and cH = 0 identically on the cylinder
        assert!(rep.residuals[0] < 1e-9, "f residual {}", rep.residuals[0]);
        assert!(rep.residuals[2] < 1e-9, "cH residual {}", rep.residuals[2]);
        // (c/b) b_s, b_s and c_s stay zero as well
        assert!(rep.residuals[1] < 1e-9);
        assert!(rep.residuals[3] < 1e-9);
        assert!(rep.residuals[4] < 1e-9);
    }

    #[test]
    fn generic_window_residuals_shrink_under_refinement() {
        let residuals_at = |n: usize| -> [f64; 7] {
            let grid = build_grid(n, 12.0, 2.0).unwrap();
            let st = crate::initial::construct_initial(
                crate::initial::Family::CapCylinder { b_scale: 1.0, squash: 0.3 },
                grid,
            )
            .unwrap();
            // advance to a fixed physical time so the windows are comparable
            let mut flow = FlowState::new(st, OuterBoundary::Pinned);
            let ctl = StepControl::default();
            while flow.state.t < 4e-3 {
                let cf = curvature_field(&flow.state).unwrap();
                let dt = select_dt(&flow.state, &cf, &ctl).unwrap();
                step(&mut flow, &ctl, dt).unwrap();
            }
            let window = window_of(flow.state.clone(), OuterBoundary::Pinned, 2);
            verify_evolution_identities(&window).unwrap().residuals
        };
        let coarse = residuals_at(1024);
        let fine = residuals_at(2048);
        for k in 0..7 {
            let ratio = coarse[k] / fine[k];
            // this pair is pre-asymptotic for the curvature identities;
            // the acceptance suite holds the 2048/4096 pair to the ~4x
            // expectation, here the residuals just have to fall
            assert!(
                ratio > 1.25,
                "{}: coarse {} fine {} ratio {ratio}",
                IDENTITY_NAMES[k],
                coarse[k],
                fine[k]
            );
        }
    }

    #[test]
    fn window_rejects_mixed_grids() {
        let w1 = window_of(flat_state(256, 10.0), OuterBoundary::Pinned, 2);
        let w2 = window_of(flat_state(512, 10.0), OuterBoundary::Pinned, 2);
        let mixed = vec![w1[0].clone(), w2[1].clone(), w1[2].clone()];
        assert!(verify_evolution_identities(&mixed).is_err());
    }
}
