//! Back from characteristic to physical coordinates.
//!
//! The physical position and time of a lattice node follow from the exact
//! differentials
//!
//!   x_X = (1 + cos w) p / 4,    x_Y = -(1 + cos z) q / 4,
//!   t_X = (1 + cos w) p / 4c,   t_Y = +(1 + cos z) q / 4c,
//!
//! anchored at the curve point with physical parameter 0, which is the
//! lattice origin (X, Y) = (0, 0) with (t, x) = (0, 0). Since the integrands
//! are nonnegative (resp. nonpositive), t grows along both lattice
//! directions and x grows in X and shrinks in Y. A constant-time slice is
//! therefore a monotone staircase in the lattice, from which the physical
//! solution u(tau, .) is read off.

use crate::error::{Error, Result};
use crate::goursat::CharGrid;
use crate::numerics::{interp_clamped, Kahan};
use crate::speed::SpeedFamily;
use std::f64::consts::PI;

/// Reconstructing R = tan(w/2) blows up as w approaches pi (energy
/// concentration); angles this close to pi are reported as infinite.
pub const ANGLE_GUARD: f64 = 1e-6;

/// Physical coordinates of every lattice node, in lattice layout.
#[derive(Debug, Clone)]
pub struct XtFields {
    pub x: Vec<f64>,
    pub t: Vec<f64>,
}

/// Cumulative trapezoidal integration of a differential form (fx dX + fy dY)
/// from the origin node, visiting rows first or columns first.
fn integrate_form(
    grid: &CharGrid,
    fx: &dyn Fn(usize) -> f64,
    fy: &dyn Fn(usize) -> f64,
    row_first: bool,
) -> Vec<f64> {
    let n = grid.lat.n;
    let h = grid.lat.h;
    let o = grid.lat.origin();
    let mut out = vec![0.0; n * n];

    let line = |out: &mut Vec<f64>, start: usize, step_of: &dyn Fn(usize) -> usize, len: usize, form: &dyn Fn(usize) -> f64, forward: bool| {
        // walk `len` nodes away from `start` along `step_of`, accumulating
        // h/2 (f_prev + f_cur) with compensation; `forward` flips the sign
        // (integrating toward negative coordinates subtracts).
        let mut acc = Kahan::new();
        acc.add(out[start]);
        let sign = if forward { 0.5 * h } else { -0.5 * h };
        let mut prev = start;
        for k in 1..=len {
            let cur = step_of(k);
            acc.add(sign * (form(prev) + form(cur)));
            out[cur] = acc.value();
            prev = cur;
        }
    };

    if row_first {
        let axis = o * n;
        line(&mut out, axis + o, &|k| axis + o + k, n - 1 - o, fx, true);
        line(&mut out, axis + o, &|k| axis + o - k, o, fx, false);
        for i in 0..n {
            line(&mut out, axis + i, &|k| axis + i + k * n, n - 1 - o, fy, true);
            line(&mut out, axis + i, &|k| axis + i - k * n, o, fy, false);
        }
    } else {
        line(&mut out, o * n + o, &|k| (o + k) * n + o, n - 1 - o, fy, true);
        line(&mut out, o * n + o, &|k| (o - k) * n + o, o, fy, false);
        for j in 0..n {
            let row = j * n;
            line(&mut out, row + o, &|k| row + o + k, n - 1 - o, fx, true);
            line(&mut out, row + o, &|k| row + o - k, o, fx, false);
        }
    }
    out
}

fn average_in_place(mut a: Vec<f64>, b: Vec<f64>) -> Vec<f64> {
    for (va, vb) in a.iter_mut().zip(&b) {
        *va = 0.5 * (*va + *vb);
    }
    a
}

/// Integrate x and t over the whole lattice. Each field is computed twice —
/// rows-then-columns and columns-then-rows — and the two are averaged, which
/// cancels the leading-order skew between the routes (the residual skew is
/// what `commutator_residual` measures).
pub fn integrate_xt(grid: &CharGrid, fam: &SpeedFamily) -> XtFields {
    let xx = |id: usize| 0.25 * (1.0 + grid.w[id].cos()) * grid.p[id];
    let xy = |id: usize| -0.25 * (1.0 + grid.z[id].cos()) * grid.q[id];
    let x = average_in_place(
        integrate_form(grid, &xx, &xy, true),
        integrate_form(grid, &xx, &xy, false),
    );
    let tx = |id: usize| 0.25 * (1.0 + grid.w[id].cos()) * grid.p[id] / fam.c(grid.u[id]);
    let ty = |id: usize| 0.25 * (1.0 + grid.z[id].cos()) * grid.q[id] / fam.c(grid.u[id]);
    let t = average_in_place(
        integrate_form(grid, &tx, &ty, true),
        integrate_form(grid, &tx, &ty, false),
    );
    XtFields { x, t }
}

/// Worst cross-derivative mismatch of the coordinate differentials, per unit
/// h: cells (all four corners integrated nodes) compare the Y-variation of
/// the X-form against the X-variation of the Y-form. First-order small on
/// smooth runs; identically zero when c' = 0 (then w rides columns and z
/// rides rows, so both variations vanish).
#[derive(Debug, Clone, Copy)]
pub struct CommutatorResidual {
    pub x: f64,
    pub t: f64,
}

impl CommutatorResidual {
    pub fn max(&self) -> f64 {
        self.x.max(self.t)
    }
}

pub fn commutator_residual(grid: &CharGrid, fam: &SpeedFamily) -> CommutatorResidual {
    use crate::charmap::NodeMask;
    let n = grid.lat.n;
    let h = grid.lat.h;
    let xx = |id: usize| 0.25 * (1.0 + grid.w[id].cos()) * grid.p[id];
    let xy = |id: usize| -0.25 * (1.0 + grid.z[id].cos()) * grid.q[id];
    let mut worst_x: f64 = 0.0;
    let mut worst_t: f64 = 0.0;
    for j in 0..n - 1 {
        for i in 0..n - 1 {
            let ids = [
                grid.idx(i, j),
                grid.idx(i + 1, j),
                grid.idx(i + 1, j + 1),
                grid.idx(i, j + 1),
            ];
            if ids
                .iter()
                .any(|&id| grid.mask[id] != NodeMask::Interior)
            {
                continue;
            }
            let [bl, br, tr, tl] = ids;
            let dy_fx = 0.5 * ((xx(tl) + xx(tr)) - (xx(bl) + xx(br)));
            let dx_fy = 0.5 * ((xy(br) + xy(tr)) - (xy(bl) + xy(tl)));
            worst_x = worst_x.max(((dy_fx - dx_fy) / h).abs());
            let c = |id: usize| fam.c(grid.u[id]);
            let dy_tx = 0.5 * ((xx(tl) / c(tl) + xx(tr) / c(tr)) - (xx(bl) / c(bl) + xx(br) / c(br)));
            let dx_ty = 0.5 * ((-xy(br) / c(br) - xy(tr) / c(tr)) - (-xy(bl) / c(bl) - xy(tl) / c(tl)));
            worst_t = worst_t.max(((dy_tx - dx_ty) / h).abs());
        }
    }
    CommutatorResidual {
        x: worst_x,
        t: worst_t,
    }
}

/// Count of lattice edges (both endpoints non-outer) on which t fails to be
/// nondecreasing in +X or +Y, or x fails to be nondecreasing in +X /
/// nonincreasing in +Y, beyond round-off slack.
pub fn monotonicity_violations(grid: &CharGrid, xt: &XtFields) -> usize {
    let n = grid.lat.n;
    let slack = |v: f64| 1e-12 * (1.0 + v.abs());
    let mut count = 0;
    for j in 0..n {
        for i in 0..n {
            let id = grid.idx(i, j);
            if grid.is_outer(i, j) {
                continue;
            }
            if i + 1 < n && !grid.is_outer(i + 1, j) {
                let r = grid.idx(i + 1, j);
                if xt.t[r] < xt.t[id] - slack(xt.t[id]) || xt.x[r] < xt.x[id] - slack(xt.x[id]) {
                    count += 1;
                }
            }
            if j + 1 < n && !grid.is_outer(i, j + 1) {
                let u = grid.idx(i, j + 1);
                if xt.t[u] < xt.t[id] - slack(xt.t[id]) || xt.x[u] > xt.x[id] + slack(xt.x[id]) {
                    count += 1;
                }
            }
        }
    }
    count
}

/// Largest reachable time: t at the top-right lattice corner.
pub fn t_max(grid: &CharGrid, xt: &XtFields) -> f64 {
    xt.t[grid.idx(grid.lat.n - 1, grid.lat.n - 1)]
}

/// Staircase of lattice nodes hugging the set {t < tau} from above: per
/// column the highest node still below tau, descending between columns so
/// the path is monotone (X up, Y down) in the physical-x direction. Columns
/// whose entire lattice range stays below tau (the slice leaves through the
/// lattice top) are skipped.
pub fn level_curve(grid: &CharGrid, xt: &XtFields, tau: f64) -> Result<Vec<(usize, usize)>> {
    let tm = t_max(grid, xt);
    if !(tau.is_finite() && tau >= 0.0 && tau <= tm) {
        return Err(Error::TimeOutOfRange { tau, t_max: tm });
    }
    let n = grid.lat.n;
    // highest j with t < tau, per column; full scan keeps this well defined
    // even if round-off dents strict monotonicity somewhere
    let mut frontier = Vec::with_capacity(n);
    for i in 0..n {
        let mut best: Option<usize> = None;
        for j in 0..n {
            if xt.t[grid.idx(i, j)] < tau {
                best = Some(j);
            }
        }
        frontier.push(best);
    }
    let mut path = Vec::new();
    let mut prev_j: Option<usize> = None;
    for i in 0..n {
        let Some(mut j) = frontier[i] else { continue };
        if j == n - 1 {
            continue; // slice exits the lattice top in this column
        }
        if let Some(pj) = prev_j {
            j = j.min(pj); // enforce the staircase against round-off dents
            for jj in (j..pj).rev() {
                path.push((i - 1, jj)); // descend the previous column first
            }
        }
        path.push((i, j));
        prev_j = Some(j);
    }
    if path.is_empty() {
        return Err(Error::TimeOutOfRange { tau, t_max: tm });
    }
    Ok(path)
}

/// A constant-time slice of the physical solution.
#[derive(Debug, Clone)]
pub struct PhysicalFrame {
    pub tau: f64,
    /// Strictly increasing sample positions.
    pub xs: Vec<f64>,
    pub us: Vec<f64>,
    /// Gradient combinations R, S; +-infinity marks angles within
    /// `ANGLE_GUARD` of +-pi (concentration points).
    pub rs: Vec<f64>,
    pub ss: Vec<f64>,
    /// The lattice staircase realizing the slice.
    pub path: Vec<(usize, usize)>,
}

fn angle_to_gradient(a: f64) -> f64 {
    if a >= PI - ANGLE_GUARD {
        f64::INFINITY
    } else if a <= -(PI - ANGLE_GUARD) {
        f64::NEG_INFINITY
    } else {
        (0.5 * a).tan()
    }
}

/// Walk the tau-slice and resample (u, R, S) onto `samples` uniform x-points.
/// Where the slice crosses a degenerate plateau (x constant along several
/// nodes because 1 + cos w or 1 + cos z vanishes), the first node in X-order
/// speaks for the plateau; the construction guarantees the alternatives
/// agree up to discretization error.
pub fn sample_frame(
    grid: &CharGrid,
    xt: &XtFields,
    tau: f64,
    samples: usize,
) -> Result<PhysicalFrame> {
    if samples < 2 {
        return Err(Error::InvalidParam(format!(
            "a frame needs at least 2 samples, got {samples}"
        )));
    }
    let path = level_curve(grid, xt, tau)?;
    let mut node_x = Vec::with_capacity(path.len());
    let mut node_u = Vec::with_capacity(path.len());
    let mut node_w = Vec::with_capacity(path.len());
    let mut node_z = Vec::with_capacity(path.len());
    for &(i, j) in &path {
        let id = grid.idx(i, j);
        let x = xt.x[id];
        if node_x.last().map_or(true, |&last| x > last) {
            node_x.push(x);
            node_u.push(grid.u[id]);
            node_w.push(grid.w[id]);
            node_z.push(grid.z[id]);
        }
    }
    if node_x.len() < 2 {
        return Err(Error::InvalidParam(format!(
            "tau = {tau} slice collapses to a single point"
        )));
    }
    let (x_lo, x_hi) = (node_x[0], *node_x.last().unwrap());
    let step = (x_hi - x_lo) / (samples - 1) as f64;
    let mut xs = Vec::with_capacity(samples);
    let mut us = Vec::with_capacity(samples);
    let mut rs = Vec::with_capacity(samples);
    let mut ss = Vec::with_capacity(samples);
    for k in 0..samples {
        let x = x_lo + step * k as f64;
        xs.push(x);
        us.push(interp_clamped(&node_x, &node_u, x));
        rs.push(angle_to_gradient(interp_clamped(&node_x, &node_w, x)));
        ss.push(angle_to_gradient(interp_clamped(&node_x, &node_z, x)));
    }
    Ok(PhysicalFrame {
        tau,
        xs,
        us,
        rs,
        ss,
        path,
    })
}
