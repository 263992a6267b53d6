//! Singular-time estimation, Type-I/Type-II classification, blow-up frames
//! and profile comparison against the reference solitons.
//!
//! The singular time is extrapolated two ways — linearly in 1/rm_max and
//! linearly in b^2 at the tracked curvature peak — over the last decade of
//! curvature growth; when the two roots agree to 20% the b^2 root is used
//! (it is the smoother series), otherwise the 1/rm root with doubled
//! uncertainty. The classification fits the slope of log N against
//! log(T - t) with N = (T - t) rm_max over the final two decades of
//! growth: flat N is the Type-I signature, steeply growing N indicates
//! Type-II. Blow-up frames rescale by the scalar curvature at the base
//! point, so a frame and the unit-normalized reference profiles share
//! units without refitting.

use crate::curvature::CurvatureField;
use crate::error::{FlowError, Result};
use crate::flow::metric_derivs;
use crate::mesh::{arclength, MetricState};
use crate::oracles::Profile;

/// One row of the blow-up diagnostics series: physical time, curvature
/// proxy max, and b^2 at the curvature peak.
#[derive(Debug, Clone, Copy)]
pub struct SeriesSample {
    pub t: f64,
    pub rm_max: f64,
    pub b2_peak: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateMethod {
    LinearInvRm,
    LinearB2,
    None,
}

impl std::fmt::Display for EstimateMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            EstimateMethod::LinearInvRm => "linear-1/rm",
            EstimateMethod::LinearB2 => "linear-b2",
            EstimateMethod::None => "none",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TypeVerdict {
    TypeI,
    TypeIIIndicated,
    Undetermined,
}

impl std::fmt::Display for TypeVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            TypeVerdict::TypeI => "TypeI",
            TypeVerdict::TypeIIIndicated => "TypeII-indicated",
            TypeVerdict::Undetermined => "undetermined",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone)]
pub struct SingularityEstimate {
    pub singular: bool,
    pub t_est: f64,
    /// Half-width of the uncertainty on t_est.
    pub uncertainty: f64,
    pub method: EstimateMethod,
    pub type_verdict: TypeVerdict,
    /// Slope of log N vs log(T_est - t) over the classification window.
    pub type_slope: f64,
    /// Sampled (t, (T_est - t) rm_max).
    pub n_series: Vec<(f64, f64)>,
}

impl SingularityEstimate {
    pub fn not_singular() -> SingularityEstimate {
        SingularityEstimate {
            singular: false,
            t_est: f64::NAN,
            uncertainty: f64::NAN,
            method: EstimateMethod::None,
            type_verdict: TypeVerdict::Undetermined,
            type_slope: f64::NAN,
            n_series: Vec::new(),
        }
    }
}

/// Least-squares line in the x-centred frame: y = a + m (x - x_mean).
/// Returns (x_mean, a, m, var_a, var_m); centring keeps the normal
/// equations conditioned when the x-spread is tiny against x itself
/// (times deep in a blow-up), and makes the coefficient covariance zero.
fn linear_fit_centred(xs: &[f64], ys: &[f64]) -> (f64, f64, f64, f64, f64) {
    let n = xs.len() as f64;
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - x_mean;
        sxx += dx * dx;
        sxy += dx * (y - y_mean);
    }
    let m = sxy / sxx;
    let a = y_mean;
    let mut ss = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let r = y - (a + m * (x - x_mean));
        ss += r * r;
    }
    let dof = (xs.len() as f64 - 2.0).max(1.0);
    let s2 = ss / dof;
    (x_mean, a, m, s2 / n, s2 / sxx)
}

/// Root of the fitted line with its 1-sigma uncertainty.
fn fitted_root(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let (x_mean, a, m, var_a, var_m) = linear_fit_centred(xs, ys);
    if !(m < 0.0) {
        return None;
    }
    let offset = -a / m;
    let root = x_mean + offset;
    let var = (var_a + offset * offset * var_m) / (m * m);
    Some((root, var.max(0.0).sqrt()))
}

/// Minimum overall curvature growth before a singularity is diagnosed.
const MIN_GROWTH: f64 = 1e3;

pub fn estimate_t(series: &[SeriesSample]) -> Result<SingularityEstimate> {
    if series.len() < 20 {
        return Err(FlowError::invalid("series", format!("need >= 20 samples, got {}", series.len())));
    }
    let rm_first = series.first().unwrap().rm_max.max(f64::MIN_POSITIVE);
    let rm_last = series.last().unwrap().rm_max;
    let rm_peak = series.iter().fold(0.0f64, |m, s| m.max(s.rm_max));
    if !(rm_last >= MIN_GROWTH * rm_first) || rm_last < 0.5 * rm_peak {
        // curvature not growing into the final sample: no singularity
        return Ok(SingularityEstimate::not_singular());
    }

    // fit window: last decade of rm growth, keeping only samples whose
    // time is resolvable (dt can underflow the clock near deep blow-up)
    let mut window: Vec<&SeriesSample> = Vec::new();
    for s in series.iter().filter(|s| s.rm_max >= rm_last / 10.0) {
        if window.last().map_or(true, |p: &&SeriesSample| s.t > p.t) {
            window.push(s);
        }
    }
    if window.len() < 8 {
        return Ok(SingularityEstimate::not_singular());
    }
    let ts: Vec<f64> = window.iter().map(|s| s.t).collect();
    let inv_rm: Vec<f64> = window.iter().map(|s| 1.0 / s.rm_max).collect();
    let b2: Vec<f64> = window.iter().map(|s| s.b2_peak).collect();
    let t_last = *ts.last().unwrap();

    let root_rm = fitted_root(&ts, &inv_rm).filter(|(r, _)| *r > t_last);
    let root_b2 = fitted_root(&ts, &b2).filter(|(r, _)| *r > t_last);

    let (t_est, uncertainty, method) = match (root_rm, root_b2) {
        (Some((t_rm, u_rm)), Some((t_b2, u_b2))) => {
            let agree = (t_rm - t_b2).abs() <= 0.2 * t_rm.abs().max(t_b2.abs());
            if agree {
                (t_b2, u_b2.max((t_rm - t_b2).abs()), EstimateMethod::LinearB2)
            } else {
                (t_rm, 2.0 * u_rm.max((t_rm - t_b2).abs()), EstimateMethod::LinearInvRm)
            }
        }
        (Some((t_rm, u_rm)), None) => (t_rm, 2.0 * u_rm, EstimateMethod::LinearInvRm),
        (None, Some((t_b2, u_b2))) => (t_b2, 2.0 * u_b2, EstimateMethod::LinearB2),
        (None, None) => return Ok(SingularityEstimate::not_singular()),
    };

    let n_series: Vec<(f64, f64)> =
        series.iter().map(|s| (s.t, (t_est - s.t) * s.rm_max)).collect();

    let mut est = SingularityEstimate {
        singular: true,
        t_est,
        uncertainty: uncertainty.max(f64::MIN_POSITIVE),
        method,
        type_verdict: TypeVerdict::Undetermined,
        type_slope: f64::NAN,
        n_series,
    };
    let (verdict, slope) = classify_type_inner(series, &est);
    est.type_verdict = verdict;
    est.type_slope = slope;
    Ok(est)
}

/// Slope thresholds of the classification, configurable in principle but
/// fixed here: |m| <= 0.1 reads Type-I, m <= -0.3 indicates Type-II.
const TYPE1_SLOPE: f64 = 0.1;
const TYPE2_SLOPE: f64 = -0.3;

fn classify_type_inner(
    series: &[SeriesSample],
    est: &SingularityEstimate,
) -> (TypeVerdict, f64) {
    if !est.singular {
        return (TypeVerdict::Undetermined, f64::NAN);
    }
    let rm_last = series.last().unwrap().rm_max;
    // final two decades of rm growth, deduplicated in t
    let mut window: Vec<&SeriesSample> = Vec::new();
    for s in series
        .iter()
        .filter(|s| s.rm_max >= rm_last / 100.0 && est.t_est > s.t && s.rm_max > 0.0)
    {
        if window.last().map_or(true, |p: &&SeriesSample| s.t > p.t) {
            window.push(s);
        }
    }
    if window.len() < 8 {
        return (TypeVerdict::Undetermined, f64::NAN);
    }
    let span = (est.t_est - window.first().unwrap().t) / (est.t_est - window.last().unwrap().t);
    if span < 10.0 {
        // less than one decade of (T - t): undetermined
        return (TypeVerdict::Undetermined, f64::NAN);
    }
    let xs: Vec<f64> = window.iter().map(|s| (est.t_est - s.t).ln()).collect();
    let ys: Vec<f64> = window.iter().map(|s| ((est.t_est - s.t) * s.rm_max).ln()).collect();
    let (_, _, m, _, _) = linear_fit_centred(&xs, &ys);
    let verdict = if m.abs() <= TYPE1_SLOPE {
        TypeVerdict::TypeI
    } else if m <= TYPE2_SLOPE {
        TypeVerdict::TypeIIIndicated
    } else {
        TypeVerdict::Undetermined
    };
    (verdict, m)
}

/// Classification by itself, for series whose estimate is already known.
pub fn classify_type(series: &[SeriesSample], est: &SingularityEstimate) -> (TypeVerdict, f64) {
    classify_type_inner(series, est)
}

/// A parabolically rescaled profile around a base point.
#[derive(Debug, Clone)]
pub struct BlowupFrame {
    /// Node index of the base: innermost node for origin frames, the
    /// curvature-peak node otherwise.
    pub base_node: usize,
    pub at_origin: bool,
    pub t_frame: f64,
    /// Rescale factor: scalar curvature at the base.
    pub lambda: f64,
    /// sqrt(lambda) (s - s_base); s_base = 0 for origin frames.
    pub sigma: Vec<f64>,
    pub b_tilde: Vec<f64>,
    pub c_tilde: Vec<f64>,
    /// d b_tilde / d sigma at the innermost frame node.
    pub slope_at_base: f64,
}

/// Default truncation of frames in rescaled arclength.
pub const SIGMA_MAX_DEFAULT: f64 = 20.0;

pub fn blowup_frame(
    state: &MetricState,
    cf: &CurvatureField,
    at_origin: bool,
    sigma_max: f64,
) -> Result<BlowupFrame> {
    let base_node = if at_origin { 0 } else { cf.rm_argmax };
    let lambda = cf.scalar[base_node];
    if !(lambda > 100.0 * cf.noise_floor) {
        return Err(FlowError::invalid(
            "lambda",
            format!("scalar curvature {lambda} at base node {base_node} not positive"),
        ));
    }
    let s_arr = arclength(state).values;
    let s_base = if at_origin { 0.0 } else { s_arr[base_node] };
    let root = lambda.sqrt();
    let mut sigma = Vec::new();
    let mut b_tilde = Vec::new();
    let mut c_tilde = Vec::new();
    for i in base_node..state.len() {
        let sg = root * (s_arr[i] - s_base);
        if sg > sigma_max {
            break;
        }
        sigma.push(sg);
        b_tilde.push(root * state.b[i]);
        c_tilde.push(root * state.c[i]);
    }
    if sigma.len() < 4 {
        return Err(FlowError::invalid("sigma_max", "frame holds fewer than 4 nodes"));
    }
    let d = metric_derivs(state)?;
    // the rescaling cancels in the slope
    let slope_at_base = d.b_s[base_node];
    Ok(BlowupFrame {
        base_node,
        at_origin,
        t_frame: state.t,
        lambda,
        sigma,
        b_tilde,
        c_tilde,
        slope_at_base,
    })
}

/// Comparison of a frame against a reference profile on [0, sigma_cmp]:
/// sup of |b_tilde - phi| / max(phi, 0.1) and likewise for c_tilde, plus
/// the rescaled rotational-symmetry defect sup |b_tilde/c_tilde - 1|.
#[derive(Debug, Clone)]
pub struct ProfileDistance {
    pub d_b: f64,
    pub d_c: f64,
    pub symmetry_defect: f64,
    pub sigma_cmp: f64,
}

pub fn compare_profile(
    frame: &BlowupFrame,
    oracle: &Profile,
    sigma_cmp: f64,
) -> Result<ProfileDistance> {
    if oracle.sigma_max() < sigma_cmp {
        return Err(FlowError::invalid(
            "sigma_cmp",
            format!("oracle covers sigma <= {}, requested {sigma_cmp}", oracle.sigma_max()),
        ));
    }
    if *frame.sigma.last().unwrap() < sigma_cmp {
        return Err(FlowError::invalid(
            "sigma_cmp",
            format!(
                "frame covers sigma <= {}, requested {sigma_cmp}",
                frame.sigma.last().unwrap()
            ),
        ));
    }
    let mut d_b = 0.0f64;
    let mut d_c = 0.0f64;
    let mut defect = 0.0f64;
    for (j, &sg) in frame.sigma.iter().enumerate() {
        if sg > sigma_cmp {
            break;
        }
        let phi = oracle.phi_at(sg)?;
        let denom = phi.max(0.1);
        d_b = d_b.max((frame.b_tilde[j] - phi).abs() / denom);
        d_c = d_c.max((frame.c_tilde[j] - phi).abs() / denom);
        defect = defect.max((frame.b_tilde[j] / frame.c_tilde[j] - 1.0).abs());
    }
    Ok(ProfileDistance { d_b, d_c, symmetry_defect: defect, sigma_cmp })
}

/// Radii (in x) where the mean curvature changes sign, located by linear
/// interpolation between nodes; empty when min H >= 0.
pub fn detect_minimal_spheres(state: &MetricState, cf: &CurvatureField) -> Vec<f64> {
    let x = state.grid.nodes();
    let h = &cf.mean_h;
    let mut out = Vec::new();
    for i in 1..state.len() {
        if h[i - 1] == 0.0 {
            continue;
        }
        if h[i - 1] * h[i] < 0.0 {
            let f = h[i - 1] / (h[i - 1] - h[i]);
            out.push(x[i - 1] + f * (x[i] - x[i - 1]));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::curvature_field;
    use crate::initial::{construct_initial, Family};
    use crate::mesh::{build_grid, MetricState, OriginKind};
    use crate::oracles::{bryant_profile, cylinder_profile};

    /// Exact shrinking-cylinder series: rm = 1/(4(T - t)), b^2 = 4(T - t).
    fn cylinder_series(t_end_frac: f64, n: usize) -> Vec<SeriesSample> {
        let t_sing = 0.25;
        (0..n)
            .map(|k| {
                let t = t_sing * t_end_frac * k as f64 / (n - 1) as f64;
                SeriesSample { t, rm_max: 1.0 / (4.0 * (t_sing - t)), b2_peak: 4.0 * (t_sing - t) }
            })
            .collect()
    }

    #[test]
    fn cylinder_series_gives_exact_t() {
        // run until rm has grown by 4e3
        let series = cylinder_series(1.0 - 1e-4 / 0.25, 4000);
        let est = estimate_t(&series).unwrap();
        assert!(est.singular);
        assert!((est.t_est - 0.25).abs() < 1e-3, "T_est = {}", est.t_est);
        assert_eq!(est.method, EstimateMethod::LinearB2);
        // N = 1/4 on the nose
        for (_, n) in est.n_series.iter().rev().take(100) {
            assert!((n - 0.25).abs() < 0.01, "N = {n}");
        }
        assert_eq!(est.type_verdict, TypeVerdict::TypeI);
        assert!(est.type_slope.abs() < 0.05);
    }

    #[test]
    fn flat_series_is_not_singular() {
        let series: Vec<SeriesSample> = (0..100)
            .map(|k| SeriesSample { t: k as f64 * 0.01, rm_max: 1e-9, b2_peak: 1.0 })
            .collect();
        let est = estimate_t(&series).unwrap();
        assert!(!est.singular);
        assert_eq!(est.method, EstimateMethod::None);
    }

    #[test]
    fn synthetic_type_ii_series() {
        // rm = (T - t)^{-3/2}, b2 = alpha (T - t): N = (T-t)^{-1/2}
        let t_sing = 0.25f64;
        let n = 6000;
        let series: Vec<SeriesSample> = (0..n)
            .map(|k| {
                // sample log-uniformly in T - t over five decades
                let u = k as f64 / (n - 1) as f64;
                let tau = 0.2 * (10.0f64).powf(-5.0 * u);
                SeriesSample {
                    t: t_sing - tau,
                    rm_max: tau.powf(-1.5),
                    b2_peak: 0.3 * tau,
                }
            })
            .collect();
        let est = estimate_t(&series).unwrap();
        assert!(est.singular);
        assert!((est.t_est - t_sing).abs() < 0.05 * t_sing, "T_est = {}", est.t_est);
        // b2 is the exact law here: preferred when the two roots agree
        assert_eq!(est.method, EstimateMethod::LinearB2);
        assert_eq!(est.type_verdict, TypeVerdict::TypeIIIndicated);
        assert!((est.type_slope + 0.5).abs() < 0.1, "slope {}", est.type_slope);
    }

    #[test]
    fn noisy_type_i_series_still_reads_type_i() {
        // 5% multiplicative noise from a little deterministic LCG
        let mut lcg: u64 = 0x9e3779b97f4a7c15;
        let mut rand = move || {
            lcg = lcg.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((lcg >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let mut series = cylinder_series(1.0 - 1e-3, 3000);
        for s in series.iter_mut() {
            s.rm_max *= 1.0 + 0.05 * rand();
            s.b2_peak *= 1.0 + 0.05 * rand();
        }
        let est = estimate_t(&series).unwrap();
        assert!(est.singular);
        assert_eq!(est.type_verdict, TypeVerdict::TypeI, "slope {}", est.type_slope);
    }

    #[test]
    fn estimate_requires_enough_samples() {
        let series = cylinder_series(0.9, 10);
        assert!(estimate_t(&series).is_err());
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
    fn cylinder_frame_is_constant_sqrt6() {
        let r = 0.35;
        let st = cylinder_state(512, 30.0, r);
        let cf = curvature_field(&st).unwrap();
        let frame = blowup_frame(&st, &cf, false, 10.0).unwrap();
        assert!((frame.lambda - 6.0 / (r * r)).abs() < 1e-8 * frame.lambda);
        for (b, c) in frame.b_tilde.iter().zip(&frame.c_tilde) {
            assert!((b - 6.0f64.sqrt()).abs() < 1e-7, "{b}");
            assert!((c - 6.0f64.sqrt()).abs() < 1e-7);
        }
    }

    #[test]
    fn flat_state_has_no_frame() {
        let grid = build_grid(256, 10.0, 1.0).unwrap();
        let st = construct_initial(Family::Flat, grid).unwrap();
        let cf = curvature_field(&st).unwrap();
        assert!(blowup_frame(&st, &cf, true, 10.0).is_err());
    }

    #[test]
    fn origin_frame_of_cap_has_unit_slope() {
        let grid = build_grid(2048, 20.0, 2.0).unwrap();
        let st = construct_initial(Family::CapCylinder { b_scale: 1.0, squash: 0.3 }, grid)
            .unwrap();
        let cf = curvature_field(&st).unwrap();
        let frame = blowup_frame(&st, &cf, true, 10.0).unwrap();
        assert!((frame.slope_at_base - 1.0).abs() < 1e-3, "slope {}", frame.slope_at_base);
        assert!(frame.sigma[0] > 0.0 && frame.sigma[0] < 0.1);
    }

    #[test]
    fn cylinder_frame_matches_cylinder_oracle_and_not_bryant() {
        let st = cylinder_state(512, 40.0, 0.5);
        let cf = curvature_field(&st).unwrap();
        let frame = blowup_frame(&st, &cf, false, 12.0).unwrap();
        let cyl = cylinder_profile(6.0f64.sqrt(), 12.0).unwrap();
        let d = compare_profile(&frame, &cyl, 5.0).unwrap();
        assert!(d.d_b < 1e-7, "{}", d.d_b);
        assert!(d.symmetry_defect < 1e-12);

        let bry = bryant_profile(12.0, 1e-9).unwrap();
        let d = compare_profile(&frame, &bry, 5.0).unwrap();
        assert!(d.d_b > 0.2, "cylinder vs bryant distance {}", d.d_b);
    }

    #[test]
    fn profile_range_mismatch_is_an_error() {
        let st = cylinder_state(256, 4.0, 0.5);
        let cf = curvature_field(&st).unwrap();
        let frame = blowup_frame(&st, &cf, false, 12.0).unwrap();
        let cyl = cylinder_profile(6.0f64.sqrt(), 2.0).unwrap();
        assert!(compare_profile(&frame, &cyl, 5.0).is_err());
    }

    #[test]
    fn minimal_spheres_on_the_neck_family() {
        let grid = build_grid(2048, 12.0, 1.0).unwrap();
        let st = construct_initial(
            Family::Neck { r_n: 0.2, depth: 0.6, x0: 3.0, width: 1.0 },
            grid.clone(),
        )
        .unwrap();
        let cf = curvature_field(&st).unwrap();
        let crossings = detect_minimal_spheres(&st, &cf);
        assert!(
            (1..=2).contains(&crossings.len()),
            "expected 1-2 crossings, got {crossings:?}"
        );
        for r in &crossings {
            assert!((r - 3.0).abs() < 1.5, "crossing at {r}");
        }

        // flat state: H = 3/x > 0, no crossings
        let flat = construct_initial(Family::Flat, grid).unwrap();
        let cf = curvature_field(&flat).unwrap();
        assert!(detect_minimal_spheres(&flat, &cf).is_empty());
    }
}
