//! Run-level invariants and dissipation measurements.
//!
//! Everything here is read-only over a finished characteristic grid: energy
//! carried across constant-time slices, residuals of the exact semilinear
//! equations, flatness of the fields on the trapped (post-concentration)
//! set, trapping bookkeeping, weak-form residuals against smooth test bumps,
//! and translation moduli used to document compactness of regularized runs.

use crate::charmap::NodeMask;
use crate::error::{Error, Result};
use crate::goursat::{theta_eps, theta_sharp, CharGrid, Mode};
use crate::inverse_map::{level_curve, t_max, PhysicalFrame, XtFields};
use crate::numerics::{interp_clamped, Kahan};
use crate::speed::SpeedFamily;
use std::f64::consts::PI;

/// Energy bookkeeping along constant-time slices of one run.
#[derive(Debug, Clone)]
pub struct EnergyReport {
    pub mode: Mode,
    pub taus: Vec<f64>,
    /// Absolutely continuous part: the trace integral restricted to nodes
    /// whose angle stays below pi.
    pub energy_ac: Vec<f64>,
    /// Unrestricted trace integral (transported total, conserved in the
    /// conservative mode).
    pub energy_total: Vec<f64>,
    /// Lattice measure of {w >= pi} along the slice, weighted like the
    /// energy form (p/4 per unit X).
    pub sing_w: Vec<f64>,
    /// Same for {z >= pi} with q/4 per unit Y.
    pub sing_z: Vec<f64>,
}

/// Integrate the energy 1-form (1-cos w)p/8 dX - (1-cos z)q/8 dY along each
/// tau-slice. Eastward steps carry the w-part, downward steps the z-part
/// (with dY = -h the sign comes out positive), trapezoidal in both. The
/// angle-restricted and unrestricted sums are recorded together with the
/// weighted measure of the concentration sets.
pub fn energy_trace(grid: &CharGrid, xt: &XtFields, taus: &[f64]) -> Result<EnergyReport> {
    let h = grid.lat.h;
    let mut report = EnergyReport {
        mode: grid.cfg.mode,
        taus: taus.to_vec(),
        energy_ac: Vec::with_capacity(taus.len()),
        energy_total: Vec::with_capacity(taus.len()),
        sing_w: Vec::with_capacity(taus.len()),
        sing_z: Vec::with_capacity(taus.len()),
    };
    for &tau in taus {
        let path = level_curve(grid, xt, tau)?;
        let mut ac = Kahan::new();
        let mut total = Kahan::new();
        let mut sw = Kahan::new();
        let mut sz = Kahan::new();
        for pair in path.windows(2) {
            let a = grid.idx(pair[0].0, pair[0].1);
            let b = grid.idx(pair[1].0, pair[1].1);
            if pair[1].0 == pair[0].0 + 1 {
                // eastward: dX = +h, w-part of the form
                for id in [a, b] {
                    let f = (1.0 - grid.w[id].cos()) * grid.p[id] / 8.0;
                    total.add(0.5 * h * f);
                    if grid.w[id] < PI {
                        ac.add(0.5 * h * f);
                    } else {
                        sw.add(0.5 * h * grid.p[id] / 4.0);
                    }
                }
            } else {
                // downward: dY = -h, z-part of the form
                for id in [a, b] {
                    let f = (1.0 - grid.z[id].cos()) * grid.q[id] / 8.0;
                    total.add(0.5 * h * f);
                    if grid.z[id] < PI {
                        ac.add(0.5 * h * f);
                    } else {
                        sz.add(0.5 * h * grid.q[id] / 4.0);
                    }
                }
            }
        }
        report.energy_ac.push(ac.value());
        report.energy_total.push(total.value());
        report.sing_w.push(sw.value());
        report.sing_z.push(sz.value());
    }
    Ok(report)
}

/// Residual of the exact characteristic equations, evaluated with centered
/// differences on the smooth set (interior nodes with both angles below pi
/// and a full non-outer 5-point stencil). The five terms compare w_Y, z_X,
/// p_Y, q_X and u_Y against their closed-form right-hand sides with the
/// cutoff at 1; regularized runs therefore report ~2*epsilon here (the
/// drift), smooth conservative runs report O(h^2).
///
/// Returns (max, mean) over the smooth set.
pub fn lambda_residual(grid: &CharGrid, fam: &SpeedFamily) -> (f64, f64) {
    let n = grid.lat.n;
    let two_h = 2.0 * grid.lat.h;
    let mut worst: f64 = 0.0;
    let mut sum = Kahan::new();
    let mut count = 0usize;
    for j in 1..n - 1 {
        for i in 1..n - 1 {
            let id = grid.idx(i, j);
            if grid.mask[id] != NodeMask::Interior
                || grid.w[id].max(grid.z[id]) >= PI
                || grid.is_outer(i - 1, j)
                || grid.is_outer(i + 1, j)
                || grid.is_outer(i, j - 1)
                || grid.is_outer(i, j + 1)
            {
                continue;
            }
            let e = grid.idx(i + 1, j);
            let w_ = grid.idx(i - 1, j);
            let no = grid.idx(i, j + 1);
            let so = grid.idx(i, j - 1);
            let k = fam.source_coeff(grid.u[id]);
            let (sw, cw) = grid.w[id].sin_cos();
            let (szn, cz) = grid.z[id].sin_cos();
            let c = fam.c(grid.u[id]);
            let lam = ((grid.w[no] - grid.w[so]) / two_h - k * (cz - cw) * grid.q[id]).abs()
                + ((grid.z[e] - grid.z[w_]) / two_h - k * (cw - cz) * grid.p[id]).abs()
                + ((grid.p[no] - grid.p[so]) / two_h - k * (szn - sw) * grid.p[id] * grid.q[id])
                    .abs()
                + ((grid.q[e] - grid.q[w_]) / two_h - k * (sw - szn) * grid.p[id] * grid.q[id])
                    .abs()
                + ((grid.u[no] - grid.u[so]) / two_h - szn / (4.0 * c) * grid.q[id]).abs();
            worst = worst.max(lam);
            sum.add(lam);
            count += 1;
        }
    }
    let mean = if count == 0 {
        0.0
    } else {
        sum.value() / count as f64
    };
    (worst, mean)
}

/// On the trapped set {max(w, z) >= pi}, the sharp dynamics freeze w, p
/// along Y and z, q along X. This returns the largest forward difference
/// per unit h of those four fields over node pairs that BOTH lie in the
/// trapped set (the discrete reading of the almost-everywhere statement);
/// the scheme makes it exactly zero. Errors with EmptySingularSet when no
/// node is trapped — that simply means the run never concentrated.
pub fn singular_flatness(grid: &CharGrid) -> Result<f64> {
    let n = grid.lat.n;
    let h = grid.lat.h;
    let trapped =
        |id: usize| !matches!(grid.mask[id], NodeMask::Outer) && grid.w[id].max(grid.z[id]) >= PI;
    let mut any = false;
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in 0..n {
            let id = grid.idx(i, j);
            if !trapped(id) {
                continue;
            }
            any = true;
            if j + 1 < n && trapped(grid.idx(i, j + 1)) {
                let up = grid.idx(i, j + 1);
                worst = worst.max(((grid.w[up] - grid.w[id]) / h).abs());
                worst = worst.max(((grid.p[up] - grid.p[id]) / h).abs());
            }
            if i + 1 < n && trapped(grid.idx(i + 1, j)) {
                let e = grid.idx(i + 1, j);
                worst = worst.max(((grid.z[e] - grid.z[id]) / h).abs());
                worst = worst.max(((grid.q[e] - grid.q[id]) / h).abs());
            }
        }
    }
    if !any {
        return Err(Error::EmptySingularSet);
    }
    Ok(worst)
}

/// Regularized analogue of `singular_flatness`: past the cutoff ramp
/// (max(w, z) >= pi + epsilon^3) the angles grow at exactly the drift rate
/// and p, q freeze. Returns the largest deviation |dw/dY - eps|,
/// |dz/dX - eps|, |dp/dY|, |dq/dX| over pairs fully past the ramp.
pub fn regularized_flatness(grid: &CharGrid) -> Result<f64> {
    let eps = grid.cfg.epsilon;
    if grid.cfg.mode != Mode::Regularized {
        return Err(Error::InvalidParam(
            "regularized_flatness needs a regularized-mode grid".into(),
        ));
    }
    let n = grid.lat.n;
    let h = grid.lat.h;
    let cut = PI + eps * eps * eps;
    let past = |id: usize| {
        !matches!(grid.mask[id], NodeMask::Outer) && grid.w[id].max(grid.z[id]) >= cut
    };
    let mut any = false;
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in 0..n {
            let id = grid.idx(i, j);
            if !past(id) {
                continue;
            }
            any = true;
            if j + 1 < n && past(grid.idx(i, j + 1)) {
                let up = grid.idx(i, j + 1);
                worst = worst.max(((grid.w[up] - grid.w[id]) / h - eps).abs());
                worst = worst.max(((grid.p[up] - grid.p[id]) / h).abs());
            }
            if i + 1 < n && past(grid.idx(i + 1, j)) {
                let e = grid.idx(i + 1, j);
                worst = worst.max(((grid.z[e] - grid.z[id]) / h - eps).abs());
                worst = worst.max(((grid.q[e] - grid.q[id]) / h).abs());
            }
        }
    }
    if !any {
        return Err(Error::EmptySingularSet);
    }
    Ok(worst)
}

/// Count lattice edges violating the trapping property of the sharp mode:
/// above a node with w >= pi, w and p must be bitwise frozen; east of a node
/// with z >= pi, z and q must be. Zero on every well-formed sharp run (and
/// trivially zero when nothing trapped).
pub fn trapping_violations(grid: &CharGrid) -> usize {
    let n = grid.lat.n;
    let mut count = 0;
    for j in 0..n {
        for i in 0..n {
            let id = grid.idx(i, j);
            if grid.is_outer(i, j) {
                continue;
            }
            if grid.w[id] >= PI && j + 1 < n {
                let up = grid.idx(i, j + 1);
                if grid.mask[up] == NodeMask::Interior
                    && (grid.w[up] != grid.w[id] || grid.p[up] != grid.p[id])
                {
                    count += 1;
                }
            }
            if grid.z[id] >= PI && i + 1 < n {
                let e = grid.idx(i + 1, j);
                if grid.mask[e] == NodeMask::Interior
                    && (grid.z[e] != grid.z[id] || grid.q[e] != grid.q[id])
                {
                    count += 1;
                }
            }
        }
    }
    count
}

/// Smooth compactly supported test function in physical (t, x) coordinates:
/// a tensor product of (1 - s^2)^3 profiles, C^2 with cheap exact partials.
#[derive(Debug, Clone, Copy)]
pub struct TestBump {
    pub t0: f64,
    pub x0: f64,
    pub rt: f64,
    pub rx: f64,
}

fn profile(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        let m = 1.0 - s * s;
        m * m * m
    }
}

fn profile_d(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        let m = 1.0 - s * s;
        -6.0 * s * m * m
    }
}

impl TestBump {
    pub fn value(&self, t: f64, x: f64) -> f64 {
        profile((t - self.t0) / self.rt) * profile((x - self.x0) / self.rx)
    }
    pub fn dt(&self, t: f64, x: f64) -> f64 {
        profile_d((t - self.t0) / self.rt) / self.rt * profile((x - self.x0) / self.rx)
    }
    pub fn dx(&self, t: f64, x: f64) -> f64 {
        profile((t - self.t0) / self.rt) * profile_d((x - self.x0) / self.rx) / self.rx
    }
}

/// Five bumps spread across the middle of the run's physical image: centered
/// halfway up in time with supports inside (0, t_max), x-centers staggered
/// across the part of the x-range common to the early and late slices.
pub fn default_bumps(grid: &CharGrid, xt: &XtFields) -> Result<Vec<TestBump>> {
    let tm = t_max(grid, xt);
    let t0 = 0.5 * tm;
    let rt = 0.35 * tm;
    let slice_range = |tau: f64| -> Result<(f64, f64)> {
        let path = level_curve(grid, xt, tau)?;
        let first = grid.idx(path[0].0, path[0].1);
        let last = grid.idx(path[path.len() - 1].0, path[path.len() - 1].1);
        Ok((xt.x[first], xt.x[last]))
    };
    let early = slice_range(t0 - rt)?;
    let late = slice_range(t0 + rt)?;
    let lo = early.0.max(late.0);
    let hi = early.1.min(late.1);
    if !(hi > lo) {
        return Err(Error::InvalidParam(
            "physical image too thin to place test bumps".into(),
        ));
    }
    let span = hi - lo;
    Ok((0..5)
        .map(|k| TestBump {
            t0,
            x0: lo + span * (0.3 + 0.1 * k as f64),
            rt,
            rx: 0.25 * span,
        })
        .collect())
}

fn theta_of(grid: &CharGrid, id: usize) -> f64 {
    match grid.cfg.mode {
        Mode::Conservative => 1.0,
        Mode::Sharp => theta_sharp(grid.w[id], grid.z[id]),
        Mode::Regularized => theta_eps(grid.w[id], grid.z[id], grid.cfg.epsilon),
    }
}

/// Lattice quadrature of the weak-form integrand
///   p sin(w)/2 phi_Y + q sin(z)/2 phi_X + theta (c' p q / 8c^2)(cos(w - z) - 1) phi
/// against each test bump, with phi pulled back through the physical
/// coordinates (chain rule with the closed-form x_X, x_Y, t_X, t_Y). The
/// continuum value is zero for compactly supported phi; the quadrature
/// reports the discretization defect. Returns the worst |integral| over the
/// test set.
pub fn weakform_residual(
    grid: &CharGrid,
    xt: &XtFields,
    fam: &SpeedFamily,
    bumps: &[TestBump],
) -> f64 {
    let n = grid.lat.n;
    let h = grid.lat.h;
    let mut worst: f64 = 0.0;
    for bump in bumps {
        let mut acc = Kahan::new();
        for j in 0..n {
            for i in 0..n {
                let id = grid.idx(i, j);
                let (t, x) = (xt.t[id], xt.x[id]);
                let phi = bump.value(t, x);
                let phi_t = bump.dt(t, x);
                let phi_x = bump.dx(t, x);
                if phi == 0.0 && phi_t == 0.0 && phi_x == 0.0 {
                    continue;
                }
                let c = fam.c(grid.u[id]);
                let (sw, cw) = grid.w[id].sin_cos();
                let (sz, cz) = grid.z[id].sin_cos();
                let x_x = 0.25 * (1.0 + cw) * grid.p[id];
                let x_y = -0.25 * (1.0 + cz) * grid.q[id];
                let t_x = x_x / c;
                let t_y = -x_y / c;
                let phi_cap_x = phi_t * t_x + phi_x * x_x;
                let phi_cap_y = phi_t * t_y + phi_x * x_y;
                let source = theta_of(grid, id)
                    * fam.source_coeff(grid.u[id])
                    * grid.p[id]
                    * grid.q[id]
                    * ((grid.w[id] - grid.z[id]).cos() - 1.0);
                acc.add(
                    h * h
                        * (0.5 * grid.p[id] * sw * phi_cap_y
                            + 0.5 * grid.q[id] * sz * phi_cap_x
                            + source * phi),
                );
            }
        }
        worst = worst.max(acc.value().abs());
    }
    worst
}

/// Pointwise divergence identity of the scheme: centered differences of
/// p sin(w)/2 along Y plus q sin(z)/2 along X must balance the cutoff
/// source (plus the drift contribution in regularized mode). Checked at
/// interior nodes whose full stencil is non-outer and where the cutoff is
/// locally constant; returns the worst deviation.
pub fn source_identity_residual(grid: &CharGrid, fam: &SpeedFamily) -> f64 {
    let n = grid.lat.n;
    let two_h = 2.0 * grid.lat.h;
    let mut worst: f64 = 0.0;
    for j in 1..n - 1 {
        for i in 1..n - 1 {
            let id = grid.idx(i, j);
            if grid.mask[id] != NodeMask::Interior
                || grid.is_outer(i - 1, j)
                || grid.is_outer(i + 1, j)
                || grid.is_outer(i, j - 1)
                || grid.is_outer(i, j + 1)
            {
                continue;
            }
            let stencil = [
                id,
                grid.idx(i + 1, j),
                grid.idx(i - 1, j),
                grid.idx(i, j + 1),
                grid.idx(i, j - 1),
            ];
            let thetas = stencil.map(|s| theta_of(grid, s));
            if thetas.iter().any(|&t| t != thetas[0]) {
                continue; // cutoff switches inside the stencil
            }
            let f = |s: usize| 0.5 * grid.p[s] * grid.w[s].sin();
            let g = |s: usize| 0.5 * grid.q[s] * grid.z[s].sin();
            let div = (f(stencil[3]) - f(stencil[4])) / two_h
                + (g(stencil[1]) - g(stencil[2])) / two_h;
            let mut rhs = thetas[0]
                * fam.source_coeff(grid.u[id])
                * grid.p[id]
                * grid.q[id]
                * ((grid.w[id] - grid.z[id]).cos() - 1.0);
            if grid.cfg.mode == Mode::Regularized {
                // the drift feeds the angles, hence the divergence too
                rhs += 0.5
                    * grid.cfg.epsilon
                    * (grid.p[id] * grid.w[id].cos() + grid.q[id] * grid.z[id].cos());
            }
            worst = worst.max((div - rhs).abs());
        }
    }
    worst
}

/// Translation moduli across a family of runs: for each run, the L1 norm
/// (summed over u, w, z, p, q) of the field shifted by a physical offset
/// minus the field itself. Offsets are given in characteristic-plane units
/// and snapped to each run's own lattice, so runs at different resolutions
/// are comparable. Bounded tables as the regularization parameter shrinks
/// are the measurable footprint of compactness.
#[derive(Debug, Clone)]
pub struct CompactnessReport {
    pub epsilons: Vec<f64>,
    /// Physical (X, Y) offsets as requested (before lattice snapping).
    pub shifts: Vec<(f64, f64)>,
    /// `l1[e][s]`: modulus of run e under shift s.
    pub l1: Vec<Vec<f64>>,
}

impl CompactnessReport {
    /// Largest modulus of run `e` over all shifts.
    pub fn row_max(&self, e: usize) -> f64 {
        self.l1[e].iter().fold(0.0_f64, |m, &v| m.max(v))
    }
}

/// Modulus of one run under each physical shift, over the largest window
/// every snapped shift keeps inside the lattice.
pub fn translation_modulus(grid: &CharGrid, shifts: &[(f64, f64)]) -> Result<Vec<f64>> {
    let lat = grid.lat;
    let snap = |v: f64| (v / lat.h).round() as i64;
    let snapped: Vec<(i64, i64)> = shifts.iter().map(|&(a, b)| (snap(a), snap(b))).collect();
    let margin = snapped
        .iter()
        .map(|&(a, b)| a.abs().max(b.abs()) as usize)
        .max()
        .unwrap_or(0);
    if 2 * margin + 1 >= lat.n {
        return Err(Error::InvalidParam(format!(
            "shift of {margin} lattice steps leaves no window on an n = {} lattice",
            lat.n
        )));
    }
    let h2 = lat.h * lat.h;
    let mut out = Vec::with_capacity(shifts.len());
    for &(si, sj) in &snapped {
        let mut acc = Kahan::new();
        for j in margin..lat.n - margin {
            for i in margin..lat.n - margin {
                let a = grid.idx(i, j);
                let b = grid.idx((i as i64 + si) as usize, (j as i64 + sj) as usize);
                acc.add(
                    h2 * ((grid.u[b] - grid.u[a]).abs()
                        + (grid.w[b] - grid.w[a]).abs()
                        + (grid.z[b] - grid.z[a]).abs()
                        + (grid.p[b] - grid.p[a]).abs()
                        + (grid.q[b] - grid.q[a]).abs()),
                );
            }
        }
        out.push(acc.value());
    }
    Ok(out)
}

/// Stack `translation_modulus` rows for a family of runs (typically an
/// epsilon sweep) into one table.
pub fn translation_table(
    runs: &[(f64, &CharGrid)],
    shifts: &[(f64, f64)],
) -> Result<CompactnessReport> {
    if runs.is_empty() {
        return Err(Error::InvalidParam("translation_table needs runs".into()));
    }
    let mut l1 = Vec::with_capacity(runs.len());
    for (_, grid) in runs {
        l1.push(translation_modulus(grid, shifts)?);
    }
    Ok(CompactnessReport {
        epsilons: runs.iter().map(|&(e, _)| e).collect(),
        shifts: shifts.to_vec(),
        l1,
    })
}

fn bilinear(lat: &crate::lattice::Lattice, v: &[f64], x: f64, y: f64) -> f64 {
    let fx = (x / lat.h - lat.lo as f64).clamp(0.0, (lat.n - 1) as f64);
    let fy = (y / lat.h - lat.lo as f64).clamp(0.0, (lat.n - 1) as f64);
    let i0 = (fx.floor() as usize).min(lat.n - 2);
    let j0 = (fy.floor() as usize).min(lat.n - 2);
    let (ax, ay) = (fx - i0 as f64, fy - j0 as f64);
    let at = |i: usize, j: usize| v[j * lat.n + i];
    (1.0 - ay) * ((1.0 - ax) * at(i0, j0) + ax * at(i0 + 1, j0))
        + ay * ((1.0 - ax) * at(i0, j0 + 1) + ax * at(i0 + 1, j0 + 1))
}

/// L1 distance between two runs, summed over the five fields. Grids on the
/// same lattice are compared node by node; otherwise the finer run is
/// sampled bilinearly at the coarser run's nodes over the window both cover.
pub fn l1_distance(a: &CharGrid, b: &CharGrid) -> Result<f64> {
    if a.lat == b.lat {
        let h2 = a.lat.h * a.lat.h;
        let mut acc = Kahan::new();
        for id in 0..a.lat.n_total() {
            acc.add(
                h2 * ((a.u[id] - b.u[id]).abs()
                    + (a.w[id] - b.w[id]).abs()
                    + (a.z[id] - b.z[id]).abs()
                    + (a.p[id] - b.p[id]).abs()
                    + (a.q[id] - b.q[id]).abs()),
            );
        }
        return Ok(acc.value());
    }
    let (coarse, fine) = if a.lat.h >= b.lat.h { (a, b) } else { (b, a) };
    let lo = coarse.lat.coord(0).max(fine.lat.coord(0));
    let hi = coarse
        .lat
        .coord(coarse.lat.n - 1)
        .min(fine.lat.coord(fine.lat.n - 1));
    if !(hi > lo) {
        return Err(Error::InvalidParam(
            "l1_distance windows do not overlap".into(),
        ));
    }
    let h2 = coarse.lat.h * coarse.lat.h;
    let mut acc = Kahan::new();
    for j in 0..coarse.lat.n {
        let y = coarse.lat.coord(j);
        if y < lo || y > hi {
            continue;
        }
        for i in 0..coarse.lat.n {
            let x = coarse.lat.coord(i);
            if x < lo || x > hi {
                continue;
            }
            let id = coarse.idx(i, j);
            acc.add(
                h2 * ((coarse.u[id] - bilinear(&fine.lat, &fine.u, x, y)).abs()
                    + (coarse.w[id] - bilinear(&fine.lat, &fine.w, x, y)).abs()
                    + (coarse.z[id] - bilinear(&fine.lat, &fine.z, x, y)).abs()
                    + (coarse.p[id] - bilinear(&fine.lat, &fine.p, x, y)).abs()
                    + (coarse.q[id] - bilinear(&fine.lat, &fine.q, x, y)).abs()),
            );
        }
    }
    Ok(acc.value())
}

/// L2 distance between two sampled frames' u-profiles over the overlap of
/// their windows, by trapezoid on a uniform refinement.
pub fn frame_l2_distance(a: &PhysicalFrame, b: &PhysicalFrame) -> f64 {
    let lo = a.xs[0].max(b.xs[0]);
    let hi = a.xs[a.xs.len() - 1].min(b.xs[b.xs.len() - 1]);
    if !(hi > lo) {
        return 0.0;
    }
    let m = a.xs.len().max(b.xs.len());
    let step = (hi - lo) / (m - 1) as f64;
    let mut acc = Kahan::new();
    let mut prev = 0.0;
    for k in 0..m {
        let x = lo + step * k as f64;
        let d = interp_clamped(&a.xs, &a.us, x) - interp_clamped(&b.xs, &b.us, x);
        let sq = d * d;
        if k > 0 {
            acc.add(0.5 * step * (prev + sq));
        }
        prev = sq;
    }
    acc.value().sqrt()
}
