//! Change to characteristic coordinates at t = 0.
//!
//! Each data point x is sent to (X(x), Y(x)) with
//!
//!   X(x) = int_0^x (1 + R^2) dy,   Y(x) = -int_0^x (1 + S^2) dy,
//!
//! so X is strictly increasing, Y strictly decreasing, and x = 0 lands on
//! (0, 0). The image is the graph Y = phi(X) of a strictly decreasing
//! function; the solver's unknowns are prescribed on it (the traces) and the
//! region below it is filled by a static extension: u, w, p are copied down
//! vertical lines, z and q across horizontal lines, so every lattice node has
//! a well-defined value before integration starts.

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::numerics::{interp_clamped, interp_clamped_desc, Kahan};
use crate::wavefield::{to_angle, total_energy, InvariantField};

/// The t = 0 curve in the (X, Y) plane with its trace data.
#[derive(Debug, Clone)]
pub struct BoundaryCurve {
    /// Physical parameter of the curve (the data grid points).
    pub x_param: Vec<f64>,
    /// X(x), strictly increasing, 0 at x = 0.
    pub bx: Vec<f64>,
    /// Y(x), strictly decreasing, 0 at x = 0.
    pub by: Vec<f64>,
    /// Angle traces 2 arctan R and 2 arctan S along the curve.
    pub wbar: Vec<f64>,
    pub zbar: Vec<f64>,
    /// u along the curve.
    pub ubar: Vec<f64>,
    /// Total energy of the data; |X + phi(X)| never exceeds 4 e0.
    pub e0: f64,
}

/// Integrate the curve from the R/S description of the data. The parameter
/// grid must carry x = 0 as an exact node so that (0, 0) is on the curve
/// bitwise.
pub fn build_boundary(inv: &InvariantField) -> Result<BoundaryCurve> {
    let n = inv.grid.n;
    let dx = inv.grid.dx;
    let i0 = (0..n)
        .find(|&i| inv.grid.x(i).abs() <= 1e-9 * dx)
        .ok_or_else(|| {
            Error::InvalidParam("data grid has no node at x = 0 to anchor the curve".into())
        })?;

    let fx: Vec<f64> = inv.r.iter().map(|r| 1.0 + r * r).collect();
    let fy: Vec<f64> = inv.s.iter().map(|s| 1.0 + s * s).collect();
    let mut bx = vec![0.0; n];
    let mut by = vec![0.0; n];
    let (mut kx, mut ky) = (Kahan::new(), Kahan::new());
    for i in i0 + 1..n {
        kx.add(0.5 * dx * (fx[i - 1] + fx[i]));
        ky.add(0.5 * dx * (fy[i - 1] + fy[i]));
        bx[i] = kx.value();
        by[i] = -ky.value();
    }
    let (mut kx, mut ky) = (Kahan::new(), Kahan::new());
    for i in (0..i0).rev() {
        kx.add(0.5 * dx * (fx[i] + fx[i + 1]));
        ky.add(0.5 * dx * (fy[i] + fy[i + 1]));
        bx[i] = -kx.value();
        by[i] = ky.value();
    }
    for i in 1..n {
        if !(bx[i] > bx[i - 1]) || !(by[i] < by[i - 1]) {
            return Err(Error::InvalidParam(format!(
                "curve lost strict monotonicity near x = {}",
                inv.grid.x(i)
            )));
        }
    }
    Ok(BoundaryCurve {
        x_param: inv.grid.xs(),
        bx,
        by,
        wbar: inv.r.iter().map(|&r| to_angle(r)).collect(),
        zbar: inv.s.iter().map(|&s| to_angle(s)).collect(),
        ubar: inv.u.clone(),
        e0: total_energy(inv),
    })
}

impl BoundaryCurve {
    /// Y = phi(X): the curve as a graph. Outside the sampled range it is
    /// continued with slope -1, the exact vacuum slope (R = S = 0 there).
    pub fn phi(&self, x_char: f64) -> f64 {
        let (first, last) = (self.bx[0], *self.bx.last().unwrap());
        if x_char <= first {
            self.by[0] + (first - x_char)
        } else if x_char >= last {
            *self.by.last().unwrap() - (x_char - last)
        } else {
            interp_clamped(&self.bx, &self.by, x_char)
        }
    }

    /// X = phi^{-1}(Y), with the same slope -1 continuation.
    pub fn phi_inv(&self, y_char: f64) -> f64 {
        let (first, last) = (self.by[0], *self.by.last().unwrap());
        if y_char >= first {
            self.bx[0] - (y_char - first)
        } else if y_char <= last {
            *self.bx.last().unwrap() + (last - y_char)
        } else {
            interp_clamped_desc(&self.by, &self.bx, y_char)
        }
    }

    /// Traces extended off the curve: w and u ride vertical lines (functions
    /// of X alone), z rides horizontal lines (a function of Y alone); p and q
    /// are 1 on the curve and keep that value in the extension.
    pub fn w_at(&self, x_char: f64) -> f64 {
        interp_clamped(&self.bx, &self.wbar, x_char)
    }

    pub fn u_at(&self, x_char: f64) -> f64 {
        interp_clamped(&self.bx, &self.ubar, x_char)
    }

    pub fn z_at(&self, y_char: f64) -> f64 {
        interp_clamped_desc(&self.by, &self.zbar, y_char)
    }

    /// Coordinate range [min(phi_inv(m), phi(m)), m] that a square lattice
    /// must span so it contains the whole arc of the curve visible below
    /// X = m and Y = m.
    pub fn char_range(&self, m: f64) -> Result<(f64, f64)> {
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::InvalidParam(format!(
                "domain half-width must be positive, got {m}"
            )));
        }
        Ok((self.phi_inv(m).min(self.phi(m)), m))
    }
}

/// Role of a lattice node in the integration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum NodeMask {
    /// Below the curve: holds extension values, never integrated.
    Outer,
    /// First layer on or above the curve (or on the lattice edge): holds
    /// seed values transported from the curve to the node.
    Boundary,
    /// Integrated from the nodes below and to the left.
    Interior,
}

/// Classify every node. A node is outer when it lies strictly below the
/// curve; a non-outer node is boundary when integration cannot reach it
/// (lattice edge, or a needed neighbor is outer).
pub fn classify(lat: &Lattice, curve: &BoundaryCurve) -> Vec<NodeMask> {
    let n = lat.n;
    let phis: Vec<f64> = (0..n).map(|i| curve.phi(lat.coord(i))).collect();
    let mut mask = vec![NodeMask::Interior; n * n];
    for j in 0..n {
        let y = lat.coord(j);
        for i in 0..n {
            if y < phis[i] {
                mask[lat.idx(i, j)] = NodeMask::Outer;
            }
        }
    }
    for j in 0..n {
        for i in 0..n {
            let id = lat.idx(i, j);
            if mask[id] == NodeMask::Outer {
                continue;
            }
            let seed = i == 0
                || j == 0
                || mask[lat.idx(i, j - 1)] == NodeMask::Outer
                || mask[lat.idx(i - 1, j)] == NodeMask::Outer;
            if seed {
                mask[id] = NodeMask::Boundary;
            }
        }
    }
    mask
}
