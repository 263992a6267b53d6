//! Curvature of a warped Berger metric.
//!
//! With the metric ds^2 + b^2 (sigma_1^2 + sigma_2^2) + c^2 sigma_3^2 the
//! distinct sectional curvatures along the Milnor frame are
//!
//!   k12 = (4 b^2 - 3 c^2) / b^4 - b_s^2 / b^2      (vertical, k12)
//!   k13 = c^2 / b^4 - b_s c_s / (b c)              (vertical, k13 = k23)
//!   k01 = -b_ss / b                                (mixed, k01 = k02)
//!   k03 = -c_ss / c                                (mixed)
//!
//! and the scalar curvature is R = 2 (2 k01 + k03 + k12 + 2 k13). The mean
//! curvature of the centred hypersphere is H = 2 b_s / b + c_s / c. The
//! |Rm| proxy used throughout is the max of the four distinct sectional
//! magnitudes; for this diagonal ansatz it is equivalent to the curvature
//! norm up to a fixed constant.

use crate::error::{FlowError, Result};
use crate::mesh::{deriv_s, MetricState, RadialField};

#[derive(Debug, Clone)]
pub struct CurvatureField {
    pub k01: Vec<f64>,
    pub k03: Vec<f64>,
    pub k12: Vec<f64>,
    pub k13: Vec<f64>,
    pub scalar: Vec<f64>,
    pub mean_h: Vec<f64>,
    /// max(|k01|, |k03|, |k12|, |k13|) per node
    pub rm_max_node: Vec<f64>,
    pub rm_max: f64,
    pub rm_argmax: usize,
    /// Rounding-noise scale of the second-derivative stencils on this grid,
    /// used as an absolute floor by the sign verdicts.
    pub noise_floor: f64,
}

pub fn curvature_field(state: &MetricState) -> Result<CurvatureField> {
    let n = state.len();
    let wp = state.warp_parity();
    let b = RadialField::new(state.b.clone(), wp);
    let c = RadialField::new(state.c.clone(), wp);
    let b_s = deriv_s(&b, state, 1)?;
    let c_s = deriv_s(&c, state, 1)?;
    let b_ss = deriv_s(&b, state, 2)?;
    let c_ss = deriv_s(&c, state, 2)?;

    let mut ds2_min = f64::INFINITY;
    for (xi, dx) in state.xi.iter().zip(state.grid.local_dx()) {
        let ds = xi * dx;
        ds2_min = ds2_min.min(ds * ds);
    }
    let mut cf = CurvatureField {
        k01: vec![0.0; n],
        k03: vec![0.0; n],
        k12: vec![0.0; n],
        k13: vec![0.0; n],
        scalar: vec![0.0; n],
        mean_h: vec![0.0; n],
        rm_max_node: vec![0.0; n],
        rm_max: 0.0,
        rm_argmax: 0,
        noise_floor: 64.0 * f64::EPSILON / ds2_min,
    };

    for i in 0..n {
        let (b, c) = (state.b[i], state.c[i]);
        let (bs, cs) = (b_s.values[i], c_s.values[i]);
        let b2 = b * b;
        let b4 = b2 * b2;
        let k01 = -b_ss.values[i] / b;
        let k03 = -c_ss.values[i] / c;
        let k12 = (4.0 * b2 - 3.0 * c * c) / b4 - bs * bs / b2;
        let k13 = c * c / b4 - bs * cs / (b * c);
        cf.k01[i] = k01;
        cf.k03[i] = k03;
        cf.k12[i] = k12;
        cf.k13[i] = k13;
        cf.scalar[i] = 2.0 * (2.0 * k01 + k03 + k12 + 2.0 * k13);
        cf.mean_h[i] = 2.0 * bs / b + cs / c;
        cf.rm_max_node[i] = k01.abs().max(k03.abs()).max(k12.abs()).max(k13.abs());
    }

    for (i, &v) in cf.rm_max_node.iter().enumerate() {
        if !v.is_finite() {
            return Err(FlowError::Breakdown {
                what: "curvature",
                node: i,
                x: state.grid.nodes()[i],
            });
        }
        if v > cf.rm_max {
            cf.rm_max = v;
            cf.rm_argmax = i;
        }
    }
    for (i, &h) in cf.mean_h.iter().enumerate() {
        if !h.is_finite() {
            return Err(FlowError::Breakdown {
                what: "mean curvature",
                node: i,
                x: state.grid.nodes()[i],
            });
        }
    }
    Ok(cf)
}

/// Sign statistics for each sectional curvature family.
#[derive(Debug, Clone)]
pub struct SignSummary {
    /// (negative-node count, minimum value, argmin) per quantity,
    /// ordered k01, k03, k12, k13
    pub per_quantity: [(usize, f64, usize); 4],
    /// sign tolerance used: 1e-8 * rm_max (discretization noise floor)
    pub tolerance: f64,
    pub all_nonnegative: bool,
}

pub fn curvature_sign_summary(cf: &CurvatureField) -> SignSummary {
    let tolerance = 1e-8 * cf.rm_max + cf.noise_floor;
    let mut per_quantity = [(0usize, f64::INFINITY, 0usize); 4];
    for (q, arr) in [&cf.k01, &cf.k03, &cf.k12, &cf.k13].into_iter().enumerate() {
        let mut neg = 0usize;
        let mut min = f64::INFINITY;
        let mut argmin = 0usize;
        for (i, &v) in arr.iter().enumerate() {
            if v < -tolerance {
                neg += 1;
            }
            if v < min {
                min = v;
                argmin = i;
            }
        }
        per_quantity[q] = (neg, min, argmin);
    }
    let all_nonnegative = per_quantity.iter().all(|&(_, min, _)| min >= -tolerance);
    SignSummary { per_quantity, tolerance, all_nonnegative }
}

/// b^2 |Rm| proxy per node; its sup is the orbit-curvature coupling
/// functional watched by the monitor.
pub fn b2_rm(state: &MetricState, cf: &CurvatureField) -> Vec<f64> {
    state
        .b
        .iter()
        .zip(&cf.rm_max_node)
        .map(|(b, rm)| b * b * rm)
        .collect()
}

/// Scalar curvature recomputed as the plain sum over all six sectional
/// curvatures, kept separate from `curvature_field`'s collapsed form so the
/// R identity has an independent route.
pub fn scalar_curvature_direct(state: &MetricState) -> Result<Vec<f64>> {
    let wp = state.warp_parity();
    let b = RadialField::new(state.b.clone(), wp);
    let c = RadialField::new(state.c.clone(), wp);
    let b_s = deriv_s(&b, state, 1)?;
    let c_s = deriv_s(&c, state, 1)?;
    let b_ss = deriv_s(&b, state, 2)?;
    let c_ss = deriv_s(&c, state, 2)?;
    let n = state.len();
    let mut r = vec![0.0; n];
    for i in 0..n {
        let (b, c) = (state.b[i], state.c[i]);
        let (bs, cs) = (b_s.values[i], c_s.values[i]);
        let k01 = -b_ss.values[i] / b;
        let k02 = -b_ss.values[i] / b;
        let k03 = -c_ss.values[i] / c;
        let k12 = (4.0 * b * b - 3.0 * c * c) / (b * b * b * b) - bs * bs / (b * b);
        let k13 = c * c / (b * b * b * b) - bs * cs / (b * c);
        let k23 = c * c / (b * b * b * b) - bs * cs / (b * c);
        r[i] = 2.0 * (k01 + k02 + k03 + k12 + k13 + k23);
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_grid, MetricState, OriginKind};

    fn flat_state(n: usize, x_max: f64) -> MetricState {
        let grid = build_grid(n, x_max, 1.0).unwrap();
        let x = grid.nodes().to_vec();
        MetricState::new(0.0, vec![1.0; n], x.clone(), x, grid, OriginKind::SmoothOrigin).unwrap()
    }

    fn constant_state(n: usize, x_max: f64, b: f64, c: f64) -> MetricState {
        let grid = build_grid(n, x_max, 1.0).unwrap();
        MetricState::new(
            0.0,
            vec![1.0; n],
            vec![b; n],
            vec![c; n],
            grid,
            OriginKind::ReflectionPlane,
        )
        .unwrap()
    }

    #[test]
    fn flat_metric_has_zero_curvature_and_three_over_x_mean() {
        let st = flat_state(2048, 10.0);
        let cf = curvature_field(&st).unwrap();
        let x = st.grid.nodes();
        // interior nodes, away from the one-sided outer row
        for i in 0..st.len() - 4 {
            assert!(cf.rm_max_node[i] < 1e-7, "node {i}: {}", cf.rm_max_node[i]);
            assert!(cf.scalar[i].abs() < 1e-6);
            let h = cf.mean_h[i];
            assert!((h - 3.0 / x[i]).abs() < 1e-6 * (3.0 / x[i]), "H at {i}");
        }
        let summary = curvature_sign_summary(&cf);
        assert!(summary.all_nonnegative);
    }

    #[test]
    fn constant_berger_slice_matches_hand_substitution() {
        // b = 1, c = 1/2: k12 = 4 - 3/4 = 13/4, k13 = 1/4, k01 = k03 = 0,
        // R = 2(13/4 + 2/4) = 15/2
        let st = constant_state(128, 4.0, 1.0, 0.5);
        let cf = curvature_field(&st).unwrap();
        let mid = 64;
        assert!((cf.k12[mid] - 3.25).abs() < 1e-12);
        assert!((cf.k13[mid] - 0.25).abs() < 1e-12);
        assert!(cf.k01[mid].abs() < 1e-10);
        assert!(cf.k03[mid].abs() < 1e-10);
        assert!((cf.scalar[mid] - 7.5).abs() < 1e-10);
    }

    #[test]
    fn round_cylinder_slice() {
        // b = c = r: k12 = k13 = 1/r^2, R = 6/r^2, H = 0
        let r = 0.37;
        let st = constant_state(128, 4.0, r, r);
        let cf = curvature_field(&st).unwrap();
        let mid = 77;
        assert!((cf.k12[mid] - 1.0 / (r * r)).abs() < 1e-10);
        assert!((cf.k13[mid] - 1.0 / (r * r)).abs() < 1e-10);
        assert!((cf.scalar[mid] - 6.0 / (r * r)).abs() < 1e-9);
        assert!(cf.mean_h[mid].abs() < 1e-10);
        let summary = curvature_sign_summary(&cf);
        assert!(summary.all_nonnegative);
        // min of k01 sits at zero for the cylinder
        assert!(summary.per_quantity[0].1.abs() < 1e-9);
    }

    #[test]
    fn scalar_identity_matches_brute_force() {
        // a genuinely non-symmetric smooth state
        let grid = build_grid(512, 6.0, 2.0).unwrap();
        let x = grid.nodes().to_vec();
        let b: Vec<f64> = x.iter().map(|x| x / (1.0 + 0.3 * x * x).sqrt()).collect();
        let c: Vec<f64> = x.iter().map(|x| (0.8 * x).tanh()).collect();
        let xi: Vec<f64> = x.iter().map(|x| 1.0 + 0.05 * x).collect();
        let st = MetricState::new(0.0, xi, b, c, grid, OriginKind::SmoothOrigin).unwrap();
        let cf = curvature_field(&st).unwrap();
        let direct = scalar_curvature_direct(&st).unwrap();
        for i in 0..st.len() {
            let scale = 1.0 + cf.scalar[i].abs();
            assert!(
                (cf.scalar[i] - direct[i]).abs() < 1e-11 * scale,
                "node {i}: {} vs {}",
                cf.scalar[i],
                direct[i]
            );
        }
    }

    #[test]
    fn symmetric_states_have_matching_sectionals_at_second_order() {
        let err_at = |n: usize| -> f64 {
            let grid = build_grid(n, 5.0, 1.0).unwrap();
            let x = grid.nodes().to_vec();
            let b: Vec<f64> = x.iter().map(|x| x.tanh()).collect();
            let st = MetricState::new(
                0.0,
                vec![1.0; n],
                b.clone(),
                b,
                grid,
                OriginKind::SmoothOrigin,
            )
            .unwrap();
            let cf = curvature_field(&st).unwrap();
            let mut e = 0.0f64;
            for i in 0..n {
                e = e.max((cf.k12[i] - cf.k13[i]).abs());
                e = e.max((cf.k01[i] - cf.k03[i]).abs());
            }
            e
        };
        let (e1, e2) = (err_at(256), err_at(512));
        // for b = c the two families agree analytically; here the arrays
        // are identical so the gap sits at rounding scale
        assert!(e1 < 1e-9, "{e1}");
        assert!(e2 < 1e-9, "{e2}");
    }

    #[test]
    fn deep_neck_shows_negative_k12() {
        // neck family evaluated directly: b_s^2 large vs 4b^2 - 3c^2
        let grid = build_grid(1024, 8.0, 1.0).unwrap();
        let x = grid.nodes().to_vec();
        let f = |x: f64| (x * x + 0.04f64).sqrt() * (1.0 - 0.6 * (-(x - 3.0) * (x - 3.0)).exp());
        let b: Vec<f64> = x.iter().map(|&x| f(x)).collect();
        let st = MetricState::new(
            0.0,
            vec![1.0; 1024],
            b.clone(),
            b,
            grid,
            OriginKind::ReflectionPlane,
        )
        .unwrap();
        let cf = curvature_field(&st).unwrap();
        let summary = curvature_sign_summary(&cf);
        let (neg_count, min_k12, _) = summary.per_quantity[2];
        assert!(neg_count > 0, "expected negative k12 nodes on the neck");
        assert!(min_k12 < -0.01);
        assert!(!summary.all_nonnegative);
    }

    #[test]
    fn breakdown_reported_with_node_location() {
        let mut st = flat_state(64, 1.0);
        st.b[20] = f64::INFINITY;
        // validate() catches it first in normal flow; force the curvature path
        let err = curvature_field(&st).unwrap_err();
        assert!(matches!(err, FlowError::Breakdown { .. }));
    }
}
