//! Reference blow-up profiles: the Bryant steady soliton on R^4 and the
//! shrinking round cylinder R x S^3.
//!
//! The Bryant profile solves the rotationally symmetric steady gradient
//! soliton system for ds^2 + phi^2 g_{S^3} with potential f:
//!
//!   3 phi_ss / phi = f_ss,
//!   phi_ss / phi + 2 (phi_s^2 - 1) / phi^2 = f_s phi_s / phi,
//!
//! integrated outward from the regular origin series
//! phi = sigma - kappa3 sigma^3 + ..., f_s = -18 kappa3 sigma + ... with
//! kappa3 fixed by the normalization R(0) = 1 (kappa3 = 1/72, since
//! R(0) = 72 kappa3 for this ansatz). In the translation-reduced phase
//! plane (W, z) = (phi_s, phi f_s) the origin is a saddle whose unique
//! unstable direction is the soliton trajectory, so outward integration is
//! self-correcting; a bisection on a small perturbation of the origin
//! coefficient is kept as a safety net in case the integrator drifts off
//! the admissible strip phi_s in [0, 1].

use crate::error::{FlowError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    Bryant,
    Cylinder,
}

/// A radial reference profile phi(sigma) with its derivative.
#[derive(Debug, Clone)]
pub struct Profile {
    pub sigma: Vec<f64>,
    pub phi: Vec<f64>,
    pub dphi: Vec<f64>,
    pub kind: ProfileKind,
    pub normalization: String,
}

impl Profile {
    /// Cubic Hermite interpolation of phi at `sigma` (phi and dphi are both
    /// stored, so the evaluation is fourth order); errors outside the range.
    pub fn phi_at(&self, sigma: f64) -> Result<f64> {
        let (j, t, h) = self.locate(sigma)?;
        let (t2, t3) = (t * t, t * t * t);
        Ok((2.0 * t3 - 3.0 * t2 + 1.0) * self.phi[j - 1]
            + (t3 - 2.0 * t2 + t) * h * self.dphi[j - 1]
            + (-2.0 * t3 + 3.0 * t2) * self.phi[j]
            + (t3 - t2) * h * self.dphi[j])
    }

    pub fn dphi_at(&self, sigma: f64) -> Result<f64> {
        let (j, t, _) = self.locate(sigma)?;
        Ok(self.dphi[j - 1] + t * (self.dphi[j] - self.dphi[j - 1]))
    }

    fn locate(&self, x: f64) -> Result<(usize, f64, f64)> {
        let xs = &self.sigma;
        let lo = xs[0];
        let hi = *xs.last().unwrap();
        if x < lo - 1e-12 || x > hi + 1e-12 {
            return Err(FlowError::Extrapolation { target: x, lo, hi });
        }
        let x = x.clamp(lo, hi);
        let j = match xs.binary_search_by(|v| v.total_cmp(&x)) {
            Ok(j) => j.max(1),
            Err(j) => j.clamp(1, xs.len() - 1),
        };
        let h = xs[j] - xs[j - 1];
        Ok((j, (x - xs[j - 1]) / h, h))
    }

    pub fn sigma_max(&self) -> f64 {
        *self.sigma.last().unwrap()
    }
}

/// State vector for the soliton ODE: (phi, W = phi_s, u = f_s).
#[derive(Debug, Clone, Copy)]
struct SolitonState {
    phi: f64,
    w: f64,
    u: f64,
}

fn soliton_rhs(y: SolitonState) -> [f64; 3] {
    let dphi = y.w;
    let dw = y.u * y.w - 2.0 * (y.w * y.w - 1.0) / y.phi;
    let du = 3.0 * dw / y.phi;
    [dphi, dw, du]
}

/// One Cash-Karp RK45 step with embedded error estimate.
fn rk45_step(y: SolitonState, h: f64) -> (SolitonState, f64) {
    const A: [[f64; 5]; 5] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0],
        [3.0 / 10.0, -9.0 / 10.0, 6.0 / 5.0, 0.0, 0.0],
        [-11.0 / 54.0, 5.0 / 2.0, -70.0 / 27.0, 35.0 / 27.0, 0.0],
        [
            1631.0 / 55296.0,
            175.0 / 512.0,
            575.0 / 13824.0,
            44275.0 / 110592.0,
            253.0 / 4096.0,
        ],
    ];
    const B5: [f64; 6] = [37.0 / 378.0, 0.0, 250.0 / 621.0, 125.0 / 594.0, 0.0, 512.0 / 1771.0];
    const B4: [f64; 6] = [
        2825.0 / 27648.0,
        0.0,
        18575.0 / 48384.0,
        13525.0 / 55296.0,
        277.0 / 14336.0,
        1.0 / 4.0,
    ];

    let mut k = [[0.0f64; 3]; 6];
    k[0] = soliton_rhs(y);
    for stage in 1..6 {
        let mut ys = y;
        for (j, kj) in k.iter().enumerate().take(stage) {
            let a = A[stage - 1][j] * h;
            ys.phi += a * kj[0];
            ys.w += a * kj[1];
            ys.u += a * kj[2];
        }
        k[stage] = soliton_rhs(ys);
    }
    let mut y5 = y;
    let mut err = 0.0f64;
    for comp in 0..3 {
        let mut s5 = 0.0;
        let mut s4 = 0.0;
        for stage in 0..6 {
            s5 += B5[stage] * k[stage][comp];
            s4 += B4[stage] * k[stage][comp];
        }
        match comp {
            0 => y5.phi += h * s5,
            1 => y5.w += h * s5,
            _ => y5.u += h * s5,
        }
        err = err.max((h * (s5 - s4)).abs());
    }
    (y5, err)
}

const KAPPA3: f64 = 1.0 / 72.0;

/// Outcome of one outward integration attempt.
enum Shot {
    /// Reached sigma_max on the admissible strip.
    Done(Vec<(f64, SolitonState)>),
    /// phi_s fell through 0 (trajectory closed up): parameter too low.
    FellLow,
    /// phi_s exceeded 1 (trajectory opened conically): parameter too high.
    FellHigh,
}

fn shoot(theta: f64, sigma_max: f64, tol: f64) -> Shot {
    // starting closer to 0 loses the 1 - w information to rounding and
    // silently lands on a differently normalized trajectory; 1e-2 keeps
    // the series error at ~kappa3^3 sigma0^7 while 1 - w ~ 4e-6 is still
    // fully representable
    let sigma0 = 1e-2;
    let s2 = sigma0 * sigma0;
    // series through fifth order: phi = s - k3 s^3 + 2.1 k3^2 s^5,
    // u = -18 k3 s + 36 k3^2 s^3
    let y0 = SolitonState {
        phi: sigma0 * (1.0 - KAPPA3 * s2 + 2.1 * KAPPA3 * KAPPA3 * s2 * s2),
        w: 1.0 - 3.0 * KAPPA3 * s2 + 10.5 * KAPPA3 * KAPPA3 * s2 * s2,
        u: -18.0 * KAPPA3 * sigma0 * (1.0 + theta) + 36.0 * KAPPA3 * KAPPA3 * s2 * sigma0,
    };
    let mut out = vec![(sigma0, y0)];
    let mut sigma = sigma0;
    let mut y = y0;
    let mut h = sigma0 / 4.0;
    while sigma < sigma_max {
        h = h.min(sigma_max - sigma);
        let (y_new, err) = rk45_step(y, h);
        // error-per-unit-sigma control with a margin that leaves the
        // accumulated fifth-order error below tol over the whole range
        let scale = tol * h * (1.0 + y.phi.abs().max(y.w.abs()).max(y.u.abs())) / 256.0;
        if err > scale {
            h *= 0.9 * (scale / err).powf(0.25).max(0.2);
            continue;
        }
        sigma += h;
        y = y_new;
        out.push((sigma, y));
        if y.w < -1e-9 {
            return Shot::FellLow;
        }
        if y.w > 1.0 + 1e-9 {
            return Shot::FellHigh;
        }
        if err > 0.0 {
            h *= 0.9 * (scale / err).powf(0.25).min(5.0);
        } else {
            h *= 2.0;
        }
        // near the regular singular point the solution varies on scale
        // sigma itself
        h = h.min(0.05 * (1.0 + sigma)).min(0.25 * sigma);
    }
    Shot::Done(out)
}

/// Bryant steady soliton profile, normalized to scalar curvature 1 at the
/// tip, integrated out to `sigma_max` with the stated local error tolerance.
pub fn bryant_profile(sigma_max: f64, tolerance: f64) -> Result<Profile> {
    if !(sigma_max > 0.0) || sigma_max > 1e3 {
        return Err(FlowError::invalid("sigma_max", format!("need 0 < sigma_max <= 1e3, got {sigma_max}")));
    }
    if !(tolerance >= 1e-10) {
        return Err(FlowError::invalid("tolerance", format!("need >= 1e-10, got {tolerance}")));
    }

    let mut lo = -0.5;
    let mut hi = 0.5;
    let mut theta = 0.0;
    for _ in 0..200 {
        match shoot(theta, sigma_max, tolerance) {
            Shot::Done(path) => return assemble_bryant(path, tolerance),
            Shot::FellLow => lo = theta,
            Shot::FellHigh => hi = theta,
        }
        theta = 0.5 * (lo + hi);
    }
    Err(FlowError::ShootingFailed(format!(
        "bisection exhausted in [{lo}, {hi}] for sigma_max = {sigma_max}"
    )))
}

fn assemble_bryant(path: Vec<(f64, SolitonState)>, tolerance: f64) -> Result<Profile> {
    let mut sigma = Vec::with_capacity(path.len() + 1);
    let mut phi = Vec::with_capacity(path.len() + 1);
    let mut dphi = Vec::with_capacity(path.len() + 1);
    sigma.push(0.0);
    phi.push(0.0);
    dphi.push(1.0);
    for (s, y) in &path {
        sigma.push(*s);
        phi.push(y.phi);
        dphi.push(y.w);
    }
    // residual check via the steady-soliton first integral R + f_s^2 = R(0);
    // skipped below sigma = 0.1 where the check divides near-cancelling
    // terms by phi^2 and only amplifies rounding
    for (s, y) in &path {
        if *s < 0.1 {
            continue;
        }
        let dw = y.u * y.w - 2.0 * (y.w * y.w - 1.0) / y.phi;
        let r = -6.0 * dw / y.phi + 6.0 * (1.0 - y.w * y.w) / (y.phi * y.phi);
        let residual = (r + y.u * y.u - 1.0).abs();
        if residual > 1e4 * tolerance * (1.0 + *s) {
            return Err(FlowError::ShootingFailed(format!(
                "first-integral residual {residual} at sigma = {s} exceeds budget"
            )));
        }
    }
    // monotonicity post-checks: phi increasing, dphi in (0, 1) decreasing
    for i in 1..phi.len() {
        if phi[i] <= phi[i - 1] {
            return Err(FlowError::ShootingFailed(format!("phi not increasing at sigma = {}", sigma[i])));
        }
        if dphi[i] >= dphi[i - 1] + 1e-12 {
            return Err(FlowError::ShootingFailed(format!("dphi not decreasing at sigma = {}", sigma[i])));
        }
        if !(dphi[i] > 0.0 && dphi[i] <= 1.0) {
            return Err(FlowError::ShootingFailed(format!("dphi left (0, 1] at sigma = {}", sigma[i])));
        }
    }
    Ok(Profile {
        sigma,
        phi,
        dphi,
        kind: ProfileKind::Bryant,
        normalization: "R(0) = 1 (kappa3 = 1/72 origin series)".to_string(),
    })
}

/// Constant-radius cylinder profile on [0, sigma_max]. Radius sqrt(6) is the
/// unit-scalar-curvature normalization (R = 6 / r^2).
pub fn cylinder_profile(radius: f64, sigma_max: f64) -> Result<Profile> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(FlowError::invalid("radius", format!("need > 0, got {radius}")));
    }
    if !(sigma_max > 0.0 && sigma_max.is_finite()) {
        return Err(FlowError::invalid("sigma_max", format!("need > 0, got {sigma_max}")));
    }
    let n = 512usize;
    let sigma: Vec<f64> = (0..=n).map(|i| sigma_max * i as f64 / n as f64).collect();
    Ok(Profile {
        phi: vec![radius; n + 1],
        dphi: vec![0.0; n + 1],
        sigma,
        kind: ProfileKind::Cylinder,
        normalization: format!("constant radius {radius}"),
    })
}
