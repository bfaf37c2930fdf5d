//! Reference solvers on the physical (t, x) grid.
//!
//! These deliberately share nothing with the characteristic-coordinate
//! pipeline: a closed-form d'Alembert evaluator for constant speed, and a
//! first-order upwind scheme for the R/S balance laws
//!
//!   R_t - c(u) R_x =  (c'(u)/4c(u)) (R^2 - S^2),
//!   S_t + c(u) S_x = -(c'(u)/4c(u)) (R^2 - S^2),
//!   u_t = (R + S)/2.
//!
//! Agreement between this family and the characteristic solver is evidence
//! that neither discretization is fooling itself.

use crate::error::{Error, Result};
use crate::numerics::{cumtrapz, interp_clamped};
use crate::speed::SpeedFamily;
use crate::wavefield::{InitialData, InvariantField};

/// Exact constant-speed solution sampled at the points `xs`:
/// u(tau, x) = (u0(x - c0 tau) + u0(x + c0 tau))/2
///           + (V(x + c0 tau) - V(x - c0 tau))/(2 c0),  V(x) = int u1.
///
/// Evaluations outside the data grid clamp to the edge, which is exact for
/// compactly supported data: u0 vanishes there and V is constant there.
pub fn dalembert(data: &InitialData, c0: f64, tau: f64, xs: &[f64]) -> Result<Vec<f64>> {
    if !(c0.is_finite() && c0 > 0.0 && tau.is_finite() && tau >= 0.0) {
        return Err(Error::InvalidParam(format!(
            "d'Alembert needs c0 > 0 and tau >= 0, got c0 = {c0}, tau = {tau}"
        )));
    }
    let grid_xs = data.grid.xs();
    let v = cumtrapz(data.grid.dx, &data.u1);
    let u0 = |x: f64| interp_clamped(&grid_xs, &data.u0, x);
    let vat = |x: f64| interp_clamped(&grid_xs, &v, x);
    Ok(xs
        .iter()
        .map(|&x| {
            let (xl, xr) = (x - c0 * tau, x + c0 * tau);
            0.5 * (u0(xl) + u0(xr)) + (vat(xr) - vat(xl)) / (2.0 * c0)
        })
        .collect())
}

/// Settings for the upwind marcher.
#[derive(Debug, Clone, Copy)]
pub struct UpwindConfig {
    /// Courant number; the step is dt = cfl * dx / max c over the family range.
    pub cfl: f64,
    /// Declare blow-up when |R| or |S| exceeds this (or goes non-finite).
    pub ceiling: f64,
    /// When false the quadratic source terms are dropped (pure transport),
    /// which isolates the advection part for testing.
    pub sources: bool,
}

impl Default for UpwindConfig {
    fn default() -> Self {
        UpwindConfig {
            cfl: 0.45,
            ceiling: 1e3,
            sources: true,
        }
    }
}

/// March R, S, u to t = tau with first-order upwinding (R moves left, S moves
/// right) and forward-Euler sources. The step count is chosen up front from
/// the family-wide maximum speed, so the run is deterministic and lands on
/// tau exactly.
pub fn upwind_rs(
    inv: &InvariantField,
    fam: &SpeedFamily,
    tau: f64,
    cfg: &UpwindConfig,
) -> Result<InvariantField> {
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(Error::InvalidParam(format!(
            "upwind marcher needs tau >= 0, got {tau}"
        )));
    }
    if !(cfg.cfl > 0.0 && cfg.cfl <= 1.0) {
        return Err(Error::InvalidParam(format!(
            "Courant number must lie in (0, 1], got {}",
            cfg.cfl
        )));
    }
    if !(cfg.ceiling > 0.0) {
        return Err(Error::InvalidParam(format!(
            "blow-up ceiling must be positive, got {}",
            cfg.ceiling
        )));
    }
    let n = inv.grid.n;
    let dx = inv.grid.dx;
    let mut u = inv.u.clone();
    let mut r = inv.r.clone();
    let mut s = inv.s.clone();
    if tau == 0.0 {
        return InvariantField::new(inv.grid, u, r, s);
    }
    let dt_cap = cfg.cfl * dx / fam.c_max();
    let steps = (tau / dt_cap).ceil() as usize;
    let dt = tau / steps as f64;

    let mut ru = vec![0.0; n];
    let mut su = vec![0.0; n];
    let mut uu = vec![0.0; n];
    for step in 0..steps {
        for i in 0..n {
            let c = fam.c(u[i]);
            let src = if cfg.sources {
                fam.c_prime(u[i]) / (4.0 * c) * (r[i] * r[i] - s[i] * s[i])
            } else {
                0.0
            };
            // zero-gradient edges: exact for data whose causal cone stays
            // inside the grid
            let r_right = if i + 1 < n { r[i + 1] } else { r[i] };
            let s_left = if i > 0 { s[i - 1] } else { s[i] };
            ru[i] = r[i] + dt * (c * (r_right - r[i]) / dx + src);
            su[i] = s[i] + dt * (-c * (s[i] - s_left) / dx - src);
            uu[i] = u[i] + dt * 0.5 * (r[i] + s[i]);
        }
        std::mem::swap(&mut r, &mut ru);
        std::mem::swap(&mut s, &mut su);
        std::mem::swap(&mut u, &mut uu);
        for i in 0..n {
            let bad = |v: f64| !v.is_finite() || v.abs() > cfg.ceiling;
            if bad(r[i]) || bad(s[i]) {
                return Err(Error::BlowupDetected {
                    t: (step + 1) as f64 * dt,
                    ceiling: cfg.ceiling,
                });
            }
        }
    }
    InvariantField::new(inv.grid, u, r, s)
}
