//! Radial grid, field storage and parity-aware differentiation.
//!
//! The radial coordinate x labels grid nodes once and for all; the geometric
//! coordinate is the metric arclength s with ds = xi dx. Nodes are staggered
//! so none sits at x = 0: the singular orbit is represented only through a
//! ghost node at -x[0] whose value is the parity reflection of the innermost
//! node. Derivative stencils are nonuniform three-point formulas with
//! coefficients precomputed per node, so the evolution kernels reduce to
//! tight loops over coefficient tables.

use std::sync::Arc;

use crate::error::{FlowError, Result};

/// Reflection behaviour of a radial field across x = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Odd,
    Even,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Odd => -1.0,
            Parity::Even => 1.0,
        }
    }

    pub fn flipped(self) -> Parity {
        match self {
            Parity::Odd => Parity::Even,
            Parity::Even => Parity::Odd,
        }
    }
}

/// How the inner end of the domain closes.
///
/// `SmoothOrigin` is the R^4 case: b and c extend to odd functions of x with
/// unit slope and xi is even. `ReflectionPlane` models data that is mirror
/// symmetric across x = 0 (b, c, xi all even); it is used by the cylinder and
/// neck families whose profiles do not vanish at the inner boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OriginKind {
    SmoothOrigin,
    ReflectionPlane,
}

impl OriginKind {
    /// Parity of the warping fields b and c for this closure.
    pub fn warp_parity(self) -> Parity {
        match self {
            OriginKind::SmoothOrigin => Parity::Odd,
            OriginKind::ReflectionPlane => Parity::Even,
        }
    }
}

/// Finite-difference weights for the `order`-th derivative at offset 0,
/// given node offsets `z` (relative to the evaluation point). Solves the
/// moment conditions sum_j w_j z_j^p = p! [p == order] exactly for as many
/// moments as there are nodes. Offsets are rescaled by their largest
/// magnitude before the solve to keep the Vandermonde system conditioned.
fn fd_weights(z: &[f64], order: usize) -> Vec<f64> {
    let k = z.len();
    assert!(order < k);
    let href = z.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let zs: Vec<f64> = z.iter().map(|v| v / href).collect();
    // Vandermonde system A[p][j] = z_j^p.
    let mut a = vec![vec![0.0; k + 1]; k];
    for (p, row) in a.iter_mut().enumerate() {
        for (j, zj) in zs.iter().enumerate() {
            row[j] = zj.powi(p as i32);
        }
        row[k] = if p == order {
            (1..=order).product::<usize>() as f64
        } else {
            0.0
        };
    }
    // Gaussian elimination with partial pivoting; k <= 5.
    for col in 0..k {
        let piv = (col..k)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        let d = a[col][col];
        for p in (col..=k).rev() {
            a[col][p] /= d;
        }
        for row in 0..k {
            if row != col {
                let f = a[row][col];
                if f != 0.0 {
                    for p in col..=k {
                        a[row][p] -= f * a[col][p];
                    }
                }
            }
        }
    }
    let scale = href.powi(order as i32);
    (0..k).map(|j| a[j][k] / scale).collect()
}

/// Number of innermost nodes differentiated with wide (five-point,
/// parity-folded) stencils. Three-point stencils are second order, but next
/// to the singular orbit their O(h^2) slope error meets the 1/s^2 factors
/// of the curvature formulas head-on and stops converging in max norm;
/// fourth-order slopes restore uniform O(h^2) there.
const WIDE_ROWS: usize = 6;

/// One term of a near-origin stencil row: weight, source node index, and
/// whether the source sits on the reflected side of x = 0 (parity sign
/// applies to its value).
#[derive(Debug, Clone, Copy)]
struct FoldedTerm {
    w: f64,
    src: usize,
    reflected: bool,
}

/// Per-node stencil row. `c` multiplies (left, centre, right) neighbours;
/// at node 0 "left" is the parity ghost at -x[0].
#[derive(Debug, Clone, Copy)]
struct StencilRow {
    c: [f64; 3],
}

/// Radial grid with precomputed derivative stencils.
///
/// Invariants: nodes strictly increasing, nodes[0] > 0, adjacent spacing
/// ratio within [1/2, 2]; `x_max` is the outermost node.
#[derive(Debug)]
pub struct Grid {
    nodes: Vec<f64>,
    cluster_factor: f64,
    x_max: f64,
    d1: Vec<StencilRow>,
    d2: Vec<StencilRow>,
    /// Wide parity-folded rows for the first WIDE_ROWS nodes.
    d1_wide: Vec<[FoldedTerm; 5]>,
    d2_wide: Vec<[FoldedTerm; 5]>,
    /// Parity-folded fourth-difference rows (fourth-derivative stencils
    /// scaled by local_dx^4 / 16) for nodes 0..n-2, used by the
    /// grid-mode dissipation; exact zero on cubics regardless of
    /// stretching, and the classic (1,-4,6,-4,1)/16 on uniform spacing.
    d4_rows: Vec<[FoldedTerm; 5]>,
    /// One-sided 3-point first-derivative row at the last node,
    /// acting on nodes (n-3, n-2, n-1).
    d1_last: [f64; 3],
    /// One-sided 4-point second-derivative row at the last node,
    /// acting on nodes (n-4, n-3, n-2, n-1).
    d2_last: [f64; 4],
    /// Local spacing per node, used by the CFL bound: min of the gaps to
    /// the two neighbours (the ghost gap 2 x[0] at the innermost node).
    local_dx: Vec<f64>,
}

impl Grid {
    /// Assemble a grid from explicit node positions, checking invariants.
    pub fn from_nodes(nodes: Vec<f64>, cluster_factor: f64) -> Result<Grid> {
        let n = nodes.len();
        if n < 16 {
            return Err(FlowError::invalid("n_nodes", format!("need >= 16, got {n}")));
        }
        if !nodes.iter().all(|x| x.is_finite()) {
            return Err(FlowError::invalid("nodes", "non-finite node position"));
        }
        if nodes[0] <= 0.0 {
            return Err(FlowError::invalid("nodes", "innermost node must be > 0"));
        }
        for i in 1..n {
            if nodes[i] <= nodes[i - 1] {
                return Err(FlowError::invalid("nodes", format!("not increasing at index {i}")));
            }
        }
        for i in 2..n {
            let r = (nodes[i] - nodes[i - 1]) / (nodes[i - 1] - nodes[i - 2]);
            if !(0.5..=2.0).contains(&r) {
                return Err(FlowError::invalid(
                    "nodes",
                    format!("spacing ratio {r} at index {i} outside [1/2, 2]"),
                ));
            }
        }

        let mut d1 = Vec::with_capacity(n);
        let mut d2 = Vec::with_capacity(n);
        for i in 0..n {
            let xl = if i == 0 { -nodes[0] } else { nodes[i - 1] };
            let (a, b) = (nodes[i] - xl, *nodes.get(i + 1).unwrap_or(&nodes[i]) - nodes[i]);
            if i + 1 < n {
                let z = [-a, 0.0, b];
                let w1 = fd_weights(&z, 1);
                let w2 = fd_weights(&z, 2);
                d1.push(StencilRow { c: [w1[0], w1[1], w1[2]] });
                d2.push(StencilRow { c: [w2[0], w2[1], w2[2]] });
            } else {
                // placeholder rows; the last node uses the one-sided tables
                d1.push(StencilRow { c: [0.0; 3] });
                d2.push(StencilRow { c: [0.0; 3] });
            }
        }

        // wide rows: nodes (i-2 .. i+2) with negative indices reflected
        // across x = 0
        let folded_offsets = |i: usize| -> ([(usize, bool); 5], [f64; 5]) {
            let mut src = [(0usize, false); 5];
            let mut z = [0.0f64; 5];
            for (m, off) in (-2i64..=2).enumerate() {
                let j = i as i64 + off;
                let (idx, reflected) =
                    if j >= 0 { (j as usize, false) } else { ((-j - 1) as usize, true) };
                src[m] = (idx, reflected);
                let xj = if reflected { -nodes[idx] } else { nodes[idx] };
                z[m] = xj - nodes[i];
            }
            (src, z)
        };
        let pack = |w: &[f64], src: &[(usize, bool); 5]| -> [FoldedTerm; 5] {
            let mut row = [FoldedTerm { w: 0.0, src: 0, reflected: false }; 5];
            for m in 0..5 {
                row[m] = FoldedTerm { w: w[m], src: src[m].0, reflected: src[m].1 };
            }
            row
        };
        let mut d1_wide = Vec::with_capacity(WIDE_ROWS);
        let mut d2_wide = Vec::with_capacity(WIDE_ROWS);
        for i in 0..WIDE_ROWS.min(n - 2) {
            let (src, z) = folded_offsets(i);
            d1_wide.push(pack(&fd_weights(&z, 1), &src));
            d2_wide.push(pack(&fd_weights(&z, 2), &src));
        }
        let z1 = [nodes[n - 3] - nodes[n - 1], nodes[n - 2] - nodes[n - 1], 0.0];
        let w = fd_weights(&z1, 1);
        let d1_last = [w[0], w[1], w[2]];
        let z2 = [
            nodes[n - 4] - nodes[n - 1],
            nodes[n - 3] - nodes[n - 1],
            nodes[n - 2] - nodes[n - 1],
            0.0,
        ];
        let w = fd_weights(&z2, 2);
        let d2_last = [w[0], w[1], w[2], w[3]];

        let mut local_dx = Vec::with_capacity(n);
        for i in 0..n {
            let left = if i == 0 { 2.0 * nodes[0] } else { nodes[i] - nodes[i - 1] };
            let right = if i + 1 < n { nodes[i + 1] - nodes[i] } else { left };
            local_dx.push(left.min(right));
        }

        let mut d4_rows = Vec::with_capacity(n - 2);
        for i in 0..n - 2 {
            let (src, z) = folded_offsets(i);
            let mut w4 = fd_weights(&z, 4);
            let h4 = local_dx[i].powi(4) / 16.0;
            for w in w4.iter_mut() {
                *w *= h4;
            }
            d4_rows.push(pack(&w4, &src));
        }

        let x_max = nodes[n - 1];
        Ok(Grid {
            nodes,
            cluster_factor,
            x_max,
            d1,
            d2,
            d1_wide,
            d2_wide,
            d4_rows,
            d1_last,
            d2_last,
            local_dx,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn cluster_factor(&self) -> f64 {
        self.cluster_factor
    }

    pub fn local_dx(&self) -> &[f64] {
        &self.local_dx
    }

    /// Fourth-difference of `f` at node i (zero for the last two nodes),
    /// normalized so a unit-amplitude checkerboard on uniform spacing maps
    /// to ~1; exact zero on cubics for any smooth stretching.
    pub fn fourth_difference(&self, f: &[f64], parity: Parity, i: usize) -> f64 {
        let Some(row) = self.d4_rows.get(i) else { return 0.0 };
        let sign = parity.sign();
        let mut acc = 0.0;
        for term in row {
            let v = if term.reflected { sign * f[term.src] } else { f[term.src] };
            acc += term.w * v;
        }
        acc
    }

    /// Raw x-derivative of `f` using the parity ghost at the inner end and
    /// the one-sided row at the outer end.
    pub fn dx(&self, f: &[f64], parity: Parity) -> Result<Vec<f64>> {
        self.apply(f, parity, 1)
    }

    /// Raw second x-derivative, same boundary treatment.
    pub fn dxx(&self, f: &[f64], parity: Parity) -> Result<Vec<f64>> {
        self.apply(f, parity, 2)
    }

    fn apply(&self, f: &[f64], parity: Parity, order: usize) -> Result<Vec<f64>> {
        let n = self.nodes.len();
        if f.len() != n {
            return Err(FlowError::LengthMismatch { expected: n, got: f.len() });
        }
        let (tab, wide) = if order == 1 {
            (&self.d1, &self.d1_wide)
        } else {
            (&self.d2, &self.d2_wide)
        };
        let sign = parity.sign();
        let mut out = vec![0.0; n];
        for (i, row) in wide.iter().enumerate() {
            let mut acc = 0.0;
            for term in row {
                let v = if term.reflected { sign * f[term.src] } else { f[term.src] };
                acc += term.w * v;
            }
            out[i] = acc;
        }
        for i in wide.len()..n - 1 {
            let r = &tab[i];
            out[i] = r.c[0] * f[i - 1] + r.c[1] * f[i] + r.c[2] * f[i + 1];
        }
        if order == 1 {
            let w = &self.d1_last;
            out[n - 1] = w[0] * f[n - 3] + w[1] * f[n - 2] + w[2] * f[n - 1];
        } else {
            let w = &self.d2_last;
            out[n - 1] = w[0] * f[n - 4] + w[1] * f[n - 3] + w[2] * f[n - 2] + w[3] * f[n - 1];
        }
        Ok(out)
    }
}

/// Build a staggered grid on (0, x_max] with geometric clustering toward the
/// origin. With cluster_factor = gamma the map is
///   x(u) = x_max (gamma^u - 1) / (gamma - 1),  u = (i + 1/2) / n,
/// so the outermost spacing is gamma times the innermost one; gamma = 1 is
/// the uniform staggered grid x = x_max (i + 1/2) / n.
pub fn build_grid(n_nodes: usize, x_max: f64, cluster_factor: f64) -> Result<Arc<Grid>> {
    if n_nodes < 16 {
        return Err(FlowError::invalid("n_nodes", format!("need >= 16, got {n_nodes}")));
    }
    if !x_max.is_finite() || x_max <= 0.0 {
        return Err(FlowError::invalid("x_max", format!("need finite > 0, got {x_max}")));
    }
    if !cluster_factor.is_finite() || cluster_factor < 1.0 {
        return Err(FlowError::invalid(
            "cluster_factor",
            format!("need finite >= 1, got {cluster_factor}"),
        ));
    }
    let n = n_nodes as f64;
    let nodes: Vec<f64> = (0..n_nodes)
        .map(|i| {
            let u = (i as f64 + 0.5) / n;
            if cluster_factor == 1.0 {
                x_max * u
            } else {
                x_max * (cluster_factor.powf(u) - 1.0) / (cluster_factor - 1.0)
            }
        })
        .collect();
    Ok(Arc::new(Grid::from_nodes(nodes, cluster_factor)?))
}

/// A scalar field sampled on the grid nodes, together with its reflection
/// parity across x = 0.
#[derive(Debug, Clone)]
pub struct RadialField {
    pub values: Vec<f64>,
    pub parity: Parity,
}

impl RadialField {
    pub fn new(values: Vec<f64>, parity: Parity) -> RadialField {
        RadialField { values, parity }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// The flowing metric: xi, b, c on a shared grid at time t.
#[derive(Debug, Clone)]
pub struct MetricState {
    pub t: f64,
    pub xi: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub grid: Arc<Grid>,
    pub origin: OriginKind,
}

impl MetricState {
    pub fn new(
        t: f64,
        xi: Vec<f64>,
        b: Vec<f64>,
        c: Vec<f64>,
        grid: Arc<Grid>,
        origin: OriginKind,
    ) -> Result<MetricState> {
        let st = MetricState { t, xi, b, c, grid, origin };
        st.validate()?;
        Ok(st)
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Check finiteness, positivity and alignment of all components.
    pub fn validate(&self) -> Result<()> {
        let n = self.grid.len();
        for (name, arr) in [("xi", &self.xi), ("b", &self.b), ("c", &self.c)] {
            if arr.len() != n {
                return Err(FlowError::LengthMismatch { expected: n, got: arr.len() });
            }
            for (i, &v) in arr.iter().enumerate() {
                if !v.is_finite() {
                    return Err(FlowError::Breakdown { what: name, node: i, x: self.grid.nodes()[i] });
                }
                if v <= 0.0 {
                    return Err(FlowError::PositivityLost { what: name, node: i, value: v });
                }
            }
        }
        Ok(())
    }

    /// Parity of the warp fields b and c at this state's inner closure.
    pub fn warp_parity(&self) -> Parity {
        self.origin.warp_parity()
    }
}

/// First or second derivative of a field with respect to arclength s,
/// i.e. d/ds = (1/xi) d/dx applied `order` times. The second derivative is
/// assembled directly as f_xx / xi^2 - f_x xi_x / xi^3 so the stencil stays
/// three-point.
pub fn deriv_s(field: &RadialField, state: &MetricState, order: u8) -> Result<RadialField> {
    let n = state.len();
    if field.len() != n {
        return Err(FlowError::LengthMismatch { expected: n, got: field.len() });
    }
    match order {
        1 => {
            let fx = state.grid.dx(&field.values, field.parity)?;
            let values = fx.iter().zip(&state.xi).map(|(fx, xi)| fx / xi).collect();
            Ok(RadialField::new(values, field.parity.flipped()))
        }
        2 => {
            let fx = state.grid.dx(&field.values, field.parity)?;
            let fxx = state.grid.dxx(&field.values, field.parity)?;
            let xix = state.grid.dx(&state.xi, Parity::Even)?;
            let values = (0..n)
                .map(|i| {
                    let xi = state.xi[i];
                    fxx[i] / (xi * xi) - fx[i] * xix[i] / (xi * xi * xi)
                })
                .collect();
            Ok(RadialField::new(values, field.parity))
        }
        _ => Err(FlowError::invalid("order", format!("order must be 1 or 2, got {order}"))),
    }
}

/// Arclength s(x_i) = integral of xi from 0 to x_i (trapezoid rule; the
/// first cell uses an even quadratic fit of xi through the two innermost
/// nodes so the integral from the origin stays second order).
pub fn arclength(state: &MetricState) -> RadialField {
    let x = state.grid.nodes();
    let xi = &state.xi;
    let n = x.len();
    let mut s = vec![0.0; n];
    // xi(x) ~ a0 + a2 x^2 on [0, x0]
    let a2 = (xi[1] - xi[0]) / (x[1] * x[1] - x[0] * x[0]);
    let a0 = xi[0] - a2 * x[0] * x[0];
    s[0] = a0 * x[0] + a2 * x[0] * x[0] * x[0] / 3.0;
    for i in 1..n {
        s[i] = s[i - 1] + 0.5 * (xi[i] + xi[i - 1]) * (x[i] - x[i - 1]);
    }
    RadialField::new(s, Parity::Odd)
}
