//! Square uniform lattice in the characteristic plane (X, Y).
//!
//! Node coordinates are exact integer multiples of the mesh width h, with
//! (X, Y) = (0, 0) always a node: the coordinate change is anchored there,
//! and keeping it exact avoids a systematic phase error in every run.

use crate::error::{Error, Result};

/// Hard cap on lattice size; past this the five solution fields plus the
/// physical-coordinate fields no longer fit comfortably in memory.
pub const MAX_NODES: usize = 48_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    /// Index-0 coordinate in units of h: coord(0) = lo * h.
    pub lo: i64,
    /// Nodes per side (the lattice is square: X and Y share the range).
    pub n: usize,
    /// Mesh width.
    pub h: f64,
}

impl Lattice {
    /// Smallest lattice whose coordinate range covers [min_val, max_val] on
    /// both axes with two spare cells on each side.
    pub fn cover(min_val: f64, max_val: f64, h: f64) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidParam(format!(
                "mesh width must be positive, got {h}"
            )));
        }
        if !(min_val.is_finite() && max_val.is_finite() && min_val < max_val) {
            return Err(Error::InvalidParam(format!(
                "lattice range needs min < max, got [{min_val}, {max_val}]"
            )));
        }
        if min_val > 0.0 || max_val < 0.0 {
            return Err(Error::InvalidParam(
                "lattice range must contain 0 (anchor of the coordinate change)".into(),
            ));
        }
        let lo = (min_val / h).floor() as i64 - 2;
        let hi = (max_val / h).ceil() as i64 + 2;
        let n = (hi - lo) as usize + 1;
        if n * n > MAX_NODES {
            return Err(Error::InvalidParam(format!(
                "lattice of {n} x {n} nodes exceeds the {MAX_NODES}-node budget; \
                 coarsen h or shrink the domain"
            )));
        }
        Ok(Lattice { lo, n, h })
    }

    /// Coordinate of index k on either axis.
    #[inline]
    pub fn coord(&self, k: usize) -> f64 {
        (self.lo + k as i64) as f64 * self.h
    }

    /// Index whose coordinate is exactly 0.
    #[inline]
    pub fn origin(&self) -> usize {
        (-self.lo) as usize
    }

    /// Flat index of node (i, j) = (X index, Y index); storage is Y-major.
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    pub fn n_total(&self) -> usize {
        self.n * self.n
    }
}
