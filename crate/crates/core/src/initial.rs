//! Construction and classification of initial metrics.
//!
//! Three closed-form families cover the regimes of interest:
//!
//! * `cap_cylinder` — b = B tanh(x/B), c = b (1 - a tanh^2(x/B)): a smooth
//!   cap that saturates at a round (or squashed) cylinder of radius B; the
//!   no-neck class with b bounded.
//! * `taubnut_like` — b = x (1 + x^2/l^2)^q, c = mu0 tanh(x/mu0): b grows
//!   without bound while the Hopf fibre length saturates at mu0 and the
//!   curvature decays; qualitatively the Taub-NUT regime.
//! * `neck` — b = c = sqrt(x^2 + r_n^2) (1 - d exp(-(x - x0)^2/w^2)): a
//!   rotationally symmetric profile with a pinched neck at x0, carried on a
//!   reflection-symmetric domain (the profile does not close at x = 0).
//! * `flat` — b = c = x: the Euclidean metric, the null test of the flow.
//!
//! `validate_class` applies finite-grid proxies of the class definitions:
//! nonnegative b_s and H, boundedness of b read off from its outer slope,
//! curvature decay over the outer quarter, and a Hopf-fibre floor.

use std::fmt;
use std::sync::Arc;

use crate::curvature::{curvature_field, CurvatureField};
use crate::error::{FlowError, Result};
use crate::flow::metric_derivs;
use crate::mesh::{Grid, MetricState, OriginKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    CapCylinder { b_scale: f64, squash: f64 },
    TaubnutLike { q: f64, ell: f64, mu0: f64 },
    Neck { r_n: f64, depth: f64, x0: f64, width: f64 },
    /// Homogeneous round cylinder b = c = radius on a doubled (reflection
    /// symmetric) domain; the exactly solvable control case.
    Cylinder { radius: f64 },
    Flat,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::CapCylinder { .. } => "cap_cylinder",
            Family::TaubnutLike { .. } => "taubnut_like",
            Family::Neck { .. } => "neck",
            Family::Cylinder { .. } => "cylinder",
            Family::Flat => "flat",
        }
    }
}

/// Verdict of the class membership tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassVerdict {
    /// No necks, b bounded: finite-time singularity expected.
    Bounded,
    /// No necks, curvature decay, fibre floor: immortal regime.
    Unbounded,
    /// Mean curvature changes sign.
    Neck,
    Other,
}

impl fmt::Display for ClassVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ClassVerdict::Bounded => "bounded-no-neck",
            ClassVerdict::Unbounded => "unbounded-no-neck",
            ClassVerdict::Neck => "neck",
            ClassVerdict::Other => "other",
        };
        write!(f, "{s}")
    }
}

impl ClassVerdict {
    pub fn parse(s: &str) -> Option<ClassVerdict> {
        match s {
            "bounded-no-neck" => Some(ClassVerdict::Bounded),
            "unbounded-no-neck" => Some(ClassVerdict::Unbounded),
            "neck" => Some(ClassVerdict::Neck),
            "other" => Some(ClassVerdict::Other),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ClassValidation {
    /// b_s and c_s within 1e-4 of 1 at the innermost node (odd closure).
    pub smooth_at_origin: bool,
    pub origin_slope_residual: f64,
    pub min_bs: f64,
    pub min_h: f64,
    pub sup_b: f64,
    /// Whether sup_b is taken as finite: outer slope of b below threshold.
    pub sup_b_finite: bool,
    /// min c/b over the grid.
    pub ratio_floor: f64,
    /// rm over the outer quarter < 1e-2 of the global max.
    pub curvature_decay_ok: bool,
    /// min of c over the outer quarter.
    pub fiber_floor: f64,
    pub verdict: ClassVerdict,
}

pub fn construct_initial(family: Family, grid: Arc<Grid>) -> Result<MetricState> {
    let x = grid.nodes().to_vec();
    let n = x.len();
    let (b, c, origin): (Vec<f64>, Vec<f64>, OriginKind) = match family {
        Family::CapCylinder { b_scale, squash } => {
            if !(b_scale > 0.0 && b_scale.is_finite()) {
                return Err(FlowError::invalid("b_scale", format!("need > 0, got {b_scale}")));
            }
            if !(0.0..=0.5).contains(&squash) {
                return Err(FlowError::invalid("squash", format!("need in [0, 0.5], got {squash}")));
            }
            let b: Vec<f64> = x.iter().map(|x| b_scale * (x / b_scale).tanh()).collect();
            let c = x
                .iter()
                .zip(&b)
                .map(|(x, b)| {
                    let th = (x / b_scale).tanh();
                    b * (1.0 - squash * th * th)
                })
                .collect();
            (b, c, OriginKind::SmoothOrigin)
        }
        Family::TaubnutLike { q, ell, mu0 } => {
            if !(0.0..=0.25).contains(&q) {
                return Err(FlowError::invalid("q", format!("need in [0, 1/4], got {q}")));
            }
            if !(ell > 0.0) || !(mu0 > 0.0) {
                return Err(FlowError::invalid("ell/mu0", "need > 0".to_string()));
            }
            let b: Vec<f64> = x.iter().map(|x| x * (1.0 + x * x / (ell * ell)).powf(q)).collect();
            let c: Vec<f64> = x.iter().map(|x| mu0 * (x / mu0).tanh()).collect();
            (b, c, OriginKind::SmoothOrigin)
        }
        Family::Neck { r_n, depth, x0, width } => {
            if !(r_n > 0.0) {
                return Err(FlowError::invalid("r_n", format!("need > 0, got {r_n}")));
            }
            if !(0.0 < depth && depth < 1.0) {
                return Err(FlowError::invalid("depth", format!("need in (0,1), got {depth}")));
            }
            if !(width > 0.0) || !x0.is_finite() {
                return Err(FlowError::invalid("neck", "x0 finite, width > 0".to_string()));
            }
            let b: Vec<f64> = x
                .iter()
                .map(|x| {
                    let g = (-(x - x0) * (x - x0) / (width * width)).exp();
                    (x * x + r_n * r_n).sqrt() * (1.0 - depth * g)
                })
                .collect();
            (b.clone(), b, OriginKind::ReflectionPlane)
        }
        Family::Cylinder { radius } => {
            if !(radius > 0.0 && radius.is_finite()) {
                return Err(FlowError::invalid("radius", format!("need > 0, got {radius}")));
            }
            (vec![radius; n], vec![radius; n], OriginKind::ReflectionPlane)
        }
        Family::Flat => (x.clone(), x.clone(), OriginKind::SmoothOrigin),
    };
    for (i, (&bi, &ci)) in b.iter().zip(&c).enumerate() {
        if !(bi > 0.0) || !(ci > 0.0) {
            return Err(FlowError::PositivityLost {
                what: "initial data",
                node: i,
                value: bi.min(ci),
            });
        }
    }
    let st = MetricState::new(0.0, vec![1.0; n], b, c, grid, origin)?;
    Ok(st)
}

/// Tolerances used by the classifier; artifact choices, documented here.
const DECAY_RATIO: f64 = 1e-2;
const OUTER_SLOPE_BOUNDED: f64 = 1e-2;
const SIGN_TOL_FRAC: f64 = 1e-8;

pub fn validate_class(state: &MetricState) -> Result<ClassValidation> {
    let cf = curvature_field(state)?;
    validate_class_with(state, &cf)
}

pub fn validate_class_with(state: &MetricState, cf: &CurvatureField) -> Result<ClassValidation> {
    let d = metric_derivs(state)?;
    let n = state.len();

    let origin_slope_residual = if state.origin == OriginKind::SmoothOrigin {
        // even extrapolation of the slopes to x = 0 removes the O(x0^2)
        // sampling offset of the staggered innermost node
        let x = state.grid.nodes();
        let (w0, w1) = (x[1] * x[1], x[0] * x[0]);
        let bs0 = (d.b_s[0] * w0 - d.b_s[1] * w1) / (w0 - w1);
        let cs0 = (d.c_s[0] * w0 - d.c_s[1] * w1) / (w0 - w1);
        (bs0 - 1.0).abs().max((cs0 - 1.0).abs())
    } else {
        f64::INFINITY
    };
    let smooth_at_origin = origin_slope_residual < 1e-4;

    let mut min_bs = f64::INFINITY;
    let mut min_h = f64::INFINITY;
    let mut sup_b = 0.0f64;
    let mut ratio_floor = f64::INFINITY;
    let mut max_abs_h = 0.0f64;
    for i in 0..n {
        min_bs = min_bs.min(d.b_s[i]);
        min_h = min_h.min(cf.mean_h[i]);
        max_abs_h = max_abs_h.max(cf.mean_h[i].abs());
        sup_b = sup_b.max(state.b[i]);
        ratio_floor = ratio_floor.min(state.c[i] / state.b[i]);
    }

    let outer_start = 3 * n / 4;
    let mut outer_rm = 0.0f64;
    let mut fiber_floor = f64::INFINITY;
    let mut outer_slope = 0.0f64;
    for i in outer_start..n {
        outer_rm = outer_rm.max(cf.rm_max_node[i]);
        fiber_floor = fiber_floor.min(state.c[i]);
        outer_slope = outer_slope.max(d.b_s[i].abs());
    }
    let curvature_decay_ok = outer_rm < DECAY_RATIO * cf.rm_max + cf.noise_floor;
    let sup_b_finite = outer_slope < OUTER_SLOPE_BOUNDED;

    let sign_tol = SIGN_TOL_FRAC * (1.0 + max_abs_h) + cf.noise_floor;
    let no_necks = min_h >= -sign_tol && min_bs >= -sign_tol;

    let verdict = if min_h < -sign_tol {
        ClassVerdict::Neck
    } else if smooth_at_origin && no_necks && sup_b_finite {
        ClassVerdict::Bounded
    } else if smooth_at_origin
        && no_necks
        && !sup_b_finite
        && curvature_decay_ok
        && fiber_floor > 1e-3 * sup_b
    {
        ClassVerdict::Unbounded
    } else {
        ClassVerdict::Other
    };

    Ok(ClassValidation {
        smooth_at_origin,
        origin_slope_residual,
        min_bs,
        min_h,
        sup_b,
        sup_b_finite,
        ratio_floor,
        curvature_decay_ok,
        fiber_floor,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_grid;

    fn grid(n: usize, x_max: f64) -> Arc<Grid> {
        build_grid(n, x_max, 1.0).unwrap()
    }

    #[test]
    fn cap_cylinder_round_case_is_bounded_class() {
        let st = construct_initial(
            Family::CapCylinder { b_scale: 1.0, squash: 0.0 },
            grid(2048, 20.0),
        )
        .unwrap();
        // rotationally symmetric: c = b exactly
        for (b, c) in st.b.iter().zip(&st.c) {
            assert_eq!(b, c);
        }
        let v = validate_class(&st).unwrap();
        assert!(v.smooth_at_origin, "residual {}", v.origin_slope_residual);
        assert!((v.sup_b - 1.0).abs() < 1e-8);
        assert!(v.sup_b_finite);
        assert_eq!(v.verdict, ClassVerdict::Bounded);
    }

    #[test]
    fn squashed_cap_has_ratio_floor_one_minus_a() {
        let st = construct_initial(
            Family::CapCylinder { b_scale: 1.0, squash: 0.3 },
            grid(2048, 20.0),
        )
        .unwrap();
        let v = validate_class(&st).unwrap();
        assert_eq!(v.verdict, ClassVerdict::Bounded);
        assert!((v.ratio_floor - 0.7).abs() < 1e-6, "floor {}", v.ratio_floor);
        assert!(v.min_bs >= -1e-12, "{}", v.min_bs);
        assert!(v.min_h >= -1e-12, "{}", v.min_h);
    }

    #[test]
    fn taubnut_like_is_unbounded_class() {
        let st = construct_initial(
            Family::TaubnutLike { q: 0.0, ell: 1.0, mu0: 1.0 },
            grid(2048, 120.0),
        )
        .unwrap();
        // b = x, c = tanh x, c <= b
        for (i, x) in st.grid.nodes().iter().enumerate() {
            assert!((st.b[i] - x).abs() < 1e-14);
            assert!(st.c[i] <= st.b[i] + 1e-14);
        }
        let v = validate_class(&st).unwrap();
        assert!(v.smooth_at_origin);
        assert!(!v.sup_b_finite);
        assert!(v.curvature_decay_ok);
        assert_eq!(v.verdict, ClassVerdict::Unbounded);
    }

    #[test]
    fn neck_family_shows_mean_curvature_sign_change() {
        let st = construct_initial(
            Family::Neck { r_n: 0.2, depth: 0.6, x0: 3.0, width: 1.0 },
            grid(2048, 12.0),
        )
        .unwrap();
        let cf = curvature_field(&st).unwrap();
        let v = validate_class_with(&st, &cf).unwrap();
        assert_eq!(v.verdict, ClassVerdict::Neck);
        assert!(v.min_h < 0.0);
        // min H sits near the neck
        let argmin = cf
            .mean_h
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        let x_min = st.grid.nodes()[argmin];
        assert!((x_min - 3.0).abs() < 1.0, "min H at {x_min}");
    }

    #[test]
    fn flat_state_classified_unbounded() {
        let st = construct_initial(Family::Flat, grid(2048, 40.0)).unwrap();
        let v = validate_class(&st).unwrap();
        assert_eq!(v.verdict, ClassVerdict::Unbounded);
    }

    #[test]
    fn classes_are_mutually_exclusive_by_construction() {
        // the bounded and unbounded verdicts disagree on sup_b finiteness,
        // so no state can receive both; spot check both representatives
        let bounded = validate_class(
            &construct_initial(Family::CapCylinder { b_scale: 1.0, squash: 0.2 }, grid(1024, 20.0))
                .unwrap(),
        )
        .unwrap();
        let unbounded = validate_class(
            &construct_initial(
                Family::TaubnutLike { q: 0.1, ell: 2.0, mu0: 1.0 },
                grid(1024, 120.0),
            )
            .unwrap(),
        )
        .unwrap();
        assert!(bounded.sup_b_finite && !unbounded.sup_b_finite);
    }

    #[test]
    fn smoothness_residual_below_budget_for_odd_families() {
        for fam in [
            Family::CapCylinder { b_scale: 1.0, squash: 0.3 },
            Family::TaubnutLike { q: 0.25, ell: 1.0, mu0: 0.5 },
            Family::Flat,
        ] {
            let st = construct_initial(fam, grid(2048, 20.0)).unwrap();
            let v = validate_class(&st).unwrap();
            assert!(
                v.origin_slope_residual < 1e-4,
                "{}: residual {}",
                fam.name(),
                v.origin_slope_residual
            );
        }
    }

    #[test]
    fn parameter_validation() {
        assert!(construct_initial(
            Family::CapCylinder { b_scale: -1.0, squash: 0.0 },
            grid(64, 1.0)
        )
        .is_err());
        assert!(construct_initial(
            Family::CapCylinder { b_scale: 1.0, squash: 0.9 },
            grid(64, 1.0)
        )
        .is_err());
        assert!(construct_initial(
            Family::Neck { r_n: 0.2, depth: 1.5, x0: 3.0, width: 1.0 },
            grid(64, 8.0)
        )
        .is_err());
        assert!(construct_initial(
            Family::TaubnutLike { q: 0.5, ell: 1.0, mu0: 1.0 },
            grid(64, 8.0)
        )
        .is_err());
    }
}
