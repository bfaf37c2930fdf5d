//! Characteristic-coordinate solver for the variational wave equation
//! u_tt - c(u)(c(u)u_x)_x = 0.
//!
//! Gradients of this equation can blow up in finite time while the solution
//! itself stays continuous, so the solver never works in (t, x) directly.
//! Instead it:
//!
//! 1. converts initial data into Riemann-invariant form R = u_t + c u_x,
//!    S = u_t - c u_x ([`wavefield`]),
//! 2. maps the t = 0 line onto a monotone curve in characteristic
//!    coordinates (X, Y), where blow-up of R, S becomes the angle variables
//!    w = 2 arctan R, z = 2 arctan S reaching pi ([`charmap`]),
//! 3. integrates a semilinear system for (u, w, z, p, q) over an (X, Y)
//!    lattice ([`goursat`]) in one of three modes: conservative,
//!    sharp-dissipative (sources switch off where an angle reaches pi, which
//!    removes concentrated energy permanently), or regularized (a Lipschitz
//!    approximation of the sharp switch),
//! 4. rebuilds the physical coordinates x(X, Y), t(X, Y) and samples
//!    constant-time slices of u ([`inverse_map`]),
//! 5. measures every invariant the construction promises: energy traces and
//!    their dissipation, closure of the p dX - q dY form, residuals of the
//!    integrated system, flatness on the trapped set, weak-form residuals,
//!    and translation-compactness moduli ([`diagnostics`]),
//! 6. cross-checks against independent (t, x)-space reference solvers
//!    ([`oracle`]).
//!
//! The `charwave` binary drives the pipeline from a small config-file format
//! and writes CSV/JSON artifacts ([`cli`]).

pub mod charmap;
pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod goursat;
pub mod inverse_map;
pub mod lattice;
pub mod numerics;
pub mod oracle;
pub mod speed;
pub mod wavefield;

pub use error::{Error, Result};
