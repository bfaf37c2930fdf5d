//! Initial data on a 1-D x-grid and its gradient-variable description.
//!
//! For u_tt - c(u)(c(u)u_x)_x = 0 the combinations R = u_t + c(u)u_x and
//! S = u_t - c(u)u_x carry all gradient information. Their finite-time
//! blow-up is compactified by the angles w = 2 arctan R, z = 2 arctan S,
//! which the characteristic-coordinate solver evolves instead.

use crate::error::{Error, Result};
use crate::numerics;
use crate::speed::SpeedFamily;

/// Uniform 1-D grid x_i = x0 + i * dx.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1d {
    pub x0: f64,
    pub dx: f64,
    pub n: usize,
}

impl Grid1d {
    pub fn new(x0: f64, dx: f64, n: usize) -> Result<Self> {
        if !(x0.is_finite() && dx.is_finite() && dx > 0.0) || n < 3 {
            return Err(Error::InvalidParam(format!(
                "grid needs finite x0, dx > 0 and n >= 3, got x0 = {x0}, dx = {dx}, n = {n}"
            )));
        }
        Ok(Grid1d { x0, dx, n })
    }

    /// Grid covering [lo, hi] with two extra cells of padding on each side,
    /// with nodes aligned to integer multiples of dx.
    pub fn covering(lo: f64, hi: f64, dx: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidParam(format!(
                "grid range needs lo < hi, got [{lo}, {hi}]"
            )));
        }
        let i0 = (lo / dx).floor() as i64 - 2;
        let i1 = (hi / dx).ceil() as i64 + 2;
        Grid1d::new(i0 as f64 * dx, dx, (i1 - i0) as usize + 1)
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    pub fn x_end(&self) -> f64 {
        self.x(self.n - 1)
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }
}

/// Position u0 and velocity u1 at t = 0, compactly supported inside
/// [support.0, support.1]. The grid must contain x = 0: that point anchors
/// the change to characteristic coordinates.
#[derive(Debug, Clone)]
pub struct InitialData {
    pub grid: Grid1d,
    pub u0: Vec<f64>,
    pub u1: Vec<f64>,
    pub support: (f64, f64),
}

impl InitialData {
    pub fn new(grid: Grid1d, u0: Vec<f64>, u1: Vec<f64>, support: (f64, f64)) -> Result<Self> {
        if u0.len() != grid.n || u1.len() != grid.n {
            return Err(Error::InvalidParam(format!(
                "data length {} / {} does not match grid size {}",
                u0.len(),
                u1.len(),
                grid.n
            )));
        }
        let (lo, hi) = support;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidParam(format!(
                "support needs lo < hi, got [{lo}, {hi}]"
            )));
        }
        if lo < grid.x0 || hi > grid.x_end() {
            return Err(Error::InvalidParam(format!(
                "support [{lo}, {hi}] not contained in grid [{}, {}]",
                grid.x0,
                grid.x_end()
            )));
        }
        if grid.x0 > 0.0 || grid.x_end() < 0.0 {
            return Err(Error::InvalidParam(
                "grid must contain x = 0 (anchor of the coordinate change)".into(),
            ));
        }
        for i in 0..grid.n {
            if !(u0[i].is_finite() && u1[i].is_finite()) {
                return Err(Error::InvalidParam(format!(
                    "non-finite data sample at x = {}",
                    grid.x(i)
                )));
            }
            let x = grid.x(i);
            if (x < lo || x > hi) && (u0[i] != 0.0 || u1[i] != 0.0) {
                return Err(Error::InvalidParam(format!(
                    "data does not vanish outside the declared support at x = {x}"
                )));
            }
        }
        Ok(InitialData {
            grid,
            u0,
            u1,
            support,
        })
    }

    pub fn zero(grid: Grid1d, support: (f64, f64)) -> Result<Self> {
        let z = vec![0.0; grid.n];
        InitialData::new(grid, z.clone(), z, support)
    }

    /// u0 = amp0 exp(-(x-center)^2 / (2 w0^2)), u1 likewise with (amp1, w1).
    /// Samples outside the support are clamped to exactly zero.
    pub fn gaussian(
        grid: Grid1d,
        amp0: f64,
        w0: f64,
        amp1: f64,
        w1: f64,
        center: f64,
        support: (f64, f64),
    ) -> Result<Self> {
        if w0 <= 0.0 || w1 <= 0.0 {
            return Err(Error::InvalidParam(format!(
                "gaussian widths must be positive, got {w0}, {w1}"
            )));
        }
        let bump = |amp: f64, w: f64, x: f64| {
            let s = (x - center) / w;
            amp * (-0.5 * s * s).exp()
        };
        let (u0, u1) = sample_supported(&grid, support, |x| {
            (bump(amp0, w0, x), bump(amp1, w1, x))
        });
        InitialData::new(grid, u0, u1, support)
    }

    /// u0 = amp exp(-x^2/(2 width^2)) cos(freq x), u1 = 0.
    pub fn sine_packet(
        grid: Grid1d,
        amp: f64,
        width: f64,
        freq: f64,
        support: (f64, f64),
    ) -> Result<Self> {
        if width <= 0.0 {
            return Err(Error::InvalidParam(format!(
                "sine-packet width must be positive, got {width}"
            )));
        }
        let (u0, u1) = sample_supported(&grid, support, |x| {
            let s = x / width;
            (amp * (-0.5 * s * s).exp() * (freq * x).cos(), 0.0)
        });
        InitialData::new(grid, u0, u1, support)
    }

    /// u0 = 0, u1 = amp on [center - halfwidth, center + halfwidth].
    pub fn square_pulse(
        grid: Grid1d,
        amp: f64,
        halfwidth: f64,
        center: f64,
        support: (f64, f64),
    ) -> Result<Self> {
        if halfwidth <= 0.0 {
            return Err(Error::InvalidParam(format!(
                "square-pulse halfwidth must be positive, got {halfwidth}"
            )));
        }
        let (u0, u1) = sample_supported(&grid, support, |x| {
            if (x - center).abs() <= halfwidth {
                (0.0, amp)
            } else {
                (0.0, 0.0)
            }
        });
        InitialData::new(grid, u0, u1, support)
    }
}

fn sample_supported(
    grid: &Grid1d,
    support: (f64, f64),
    f: impl Fn(f64) -> (f64, f64),
) -> (Vec<f64>, Vec<f64>) {
    let mut u0 = vec![0.0; grid.n];
    let mut u1 = vec![0.0; grid.n];
    for i in 0..grid.n {
        let x = grid.x(i);
        if x >= support.0 && x <= support.1 {
            let (a, b) = f(x);
            u0[i] = a;
            u1[i] = b;
        }
    }
    (u0, u1)
}

/// R and S sampled on the data grid, together with u0 (the speed and its
/// derivative are evaluated at u throughout).
#[derive(Debug, Clone)]
pub struct InvariantField {
    pub grid: Grid1d,
    pub u: Vec<f64>,
    pub r: Vec<f64>,
    pub s: Vec<f64>,
}

impl InvariantField {
    pub fn new(grid: Grid1d, u: Vec<f64>, r: Vec<f64>, s: Vec<f64>) -> Result<Self> {
        if u.len() != grid.n || r.len() != grid.n || s.len() != grid.n {
            return Err(Error::InvalidParam(
                "invariant field length does not match grid".into(),
            ));
        }
        if grid.x0 > 0.0 || grid.x_end() < 0.0 {
            return Err(Error::InvalidParam(
                "grid must contain x = 0 (anchor of the coordinate change)".into(),
            ));
        }
        if u.iter().chain(&r).chain(&s).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParam(
                "invariant field contains non-finite samples".into(),
            ));
        }
        Ok(InvariantField { grid, u, r, s })
    }
}

/// R = u1 + c(u0) D_x u0 and S = u1 - c(u0) D_x u0 with a centered second
/// order D_x (one-sided at the two grid ends).
pub fn riemann_invariants(data: &InitialData, fam: &SpeedFamily) -> InvariantField {
    let n = data.grid.n;
    let dx = data.grid.dx;
    let mut r = vec![0.0; n];
    let mut s = vec![0.0; n];
    for i in 0..n {
        let ux = if i == 0 {
            (data.u0[1] - data.u0[0]) / dx
        } else if i == n - 1 {
            (data.u0[n - 1] - data.u0[n - 2]) / dx
        } else {
            (data.u0[i + 1] - data.u0[i - 1]) / (2.0 * dx)
        };
        let cux = fam.c(data.u0[i]) * ux;
        r[i] = data.u1[i] + cux;
        s[i] = data.u1[i] - cux;
    }
    InvariantField {
        grid: data.grid,
        u: data.u0.clone(),
        r,
        s,
    }
}

/// Angle variable of a gradient value: 2 arctan(v), in (-pi, pi]. The value
/// +inf (the blown-up-gradient sentinel) maps to exactly pi.
#[inline]
pub fn to_angle(v: f64) -> f64 {
    2.0 * v.atan()
}

/// Pointwise energy density E = (R^2 + S^2)/4 and momentum-flux density
/// M = (S^2 - R^2)/(4c).
#[derive(Debug, Clone)]
pub struct EnergyDensity {
    pub e: Vec<f64>,
    pub m: Vec<f64>,
}

pub fn energy_density(inv: &InvariantField, fam: &SpeedFamily) -> EnergyDensity {
    let n = inv.grid.n;
    let mut e = vec![0.0; n];
    let mut m = vec![0.0; n];
    for i in 0..n {
        let (r2, s2) = (inv.r[i] * inv.r[i], inv.s[i] * inv.s[i]);
        e[i] = 0.25 * (r2 + s2);
        m[i] = (s2 - r2) / (4.0 * fam.c(inv.u[i]));
    }
    EnergyDensity { e, m }
}

/// Total energy E0 = (1/4) integral of R^2 + S^2 dx (trapezoid rule).
pub fn total_energy(inv: &InvariantField) -> f64 {
    let f: Vec<f64> = inv
        .r
        .iter()
        .zip(&inv.s)
        .map(|(r, s)| 0.25 * (r * r + s * s))
        .collect();
    numerics::trapz(inv.grid.dx, &f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn grid_construction_and_padding() {
        let g = Grid1d::covering(-1.0, 1.0, 0.25).unwrap();
        assert!(g.x0 <= -1.5 + 1e-12 && g.x_end() >= 1.5 - 1e-12);
        assert!(Grid1d::new(0.0, 0.0, 10).is_err());
        assert!(Grid1d::new(0.0, -0.1, 10).is_err());
        assert!(Grid1d::new(0.0, 0.1, 2).is_err());
    }

    #[test]
    fn data_validation_catches_support_violations() {
        let g = Grid1d::covering(-1.0, 1.0, 0.1).unwrap();
        let mut u0 = vec![0.0; g.n];
        u0[0] = 0.5; // outside the declared support
        let u1 = vec![0.0; g.n];
        let err = InitialData::new(g, u0, u1, (-0.5, 0.5));
        assert!(err.is_err());
    }

    #[test]
    fn data_requires_anchor_point() {
        let g = Grid1d::new(1.0, 0.1, 30).unwrap(); // [1, 3.9], misses x = 0
        let res = InitialData::zero(g, (1.5, 2.0));
        assert!(res.is_err());
    }

    #[test]
    fn gaussian_is_clamped_outside_support() {
        let g = Grid1d::covering(-2.0, 2.0, 0.01).unwrap();
        let d = InitialData::gaussian(g, 1.0, 0.3, 0.0, 0.3, 0.0, (-1.5, 1.5)).unwrap();
        for i in 0..g.n {
            let x = g.x(i);
            if x < -1.5 || x > 1.5 {
                assert_eq!(d.u0[i], 0.0);
            }
        }
        assert!((d.u0[((0.0 - g.x0) / g.dx).round() as usize] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invariants_of_still_bump_are_mirror_symmetric() {
        // u1 = 0 and even u0: u0' is odd, so S(x) = R(-x). Support edges sit
        // halfway between nodes (so clamping is mirror symmetric) and the
        // width keeps the tail below round-off there.
        let g = Grid1d::covering(-2.0, 2.0, 0.01).unwrap();
        let d = InitialData::gaussian(g, 0.4, 0.2, 0.0, 0.2, 0.0, (-1.805, 1.805)).unwrap();
        let fam = SpeedFamily::constant(1.0).unwrap();
        let inv = riemann_invariants(&d, &fam);
        let n = g.n;
        // the grid is symmetric about 0 by construction of `covering`
        for i in 0..n {
            let j = n - 1 - i;
            assert!(
                (inv.s[i] - inv.r[j]).abs() < 1e-13,
                "mirror identity fails at i = {i}"
            );
        }
    }

    #[test]
    fn velocity_only_data_has_r_equal_s() {
        let g = Grid1d::covering(-1.0, 1.0, 0.01).unwrap();
        let d = InitialData::gaussian(g, 0.0, 0.3, 2.0, 0.25, 0.1, (-0.9, 0.9)).unwrap();
        let fam = SpeedFamily::affine_tanh(2.0, 1.0).unwrap();
        let inv = riemann_invariants(&d, &fam);
        for i in 0..g.n {
            assert_eq!(inv.r[i], inv.s[i]);
        }
    }

    #[test]
    fn to_angle_range_and_sentinel() {
        assert_eq!(to_angle(0.0), 0.0);
        assert_eq!(to_angle(f64::INFINITY), PI);
        assert_eq!(to_angle(f64::NEG_INFINITY), -PI);
        assert!((to_angle(1.0) - PI / 2.0).abs() < 1e-15);
        for v in [-1e9, -5.0, -0.3, 0.0, 0.7, 42.0, 1e12] {
            let a = to_angle(v);
            assert!(a > -PI && a <= PI);
            // tan near the pole amplifies angle round-off by 1 + v^2
            assert!(((a / 2.0).tan() - v).abs() <= 1e-14 * (1.0 + v * v));
        }
    }

    #[test]
    fn energy_density_identities() {
        let g = Grid1d::covering(-1.0, 1.0, 0.05).unwrap();
        let d = InitialData::gaussian(g, 0.3, 0.4, 0.2, 0.3, 0.0, (-0.9, 0.9)).unwrap();
        let fam = SpeedFamily::affine_tanh(2.0, 1.0).unwrap();
        let inv = riemann_invariants(&d, &fam);
        let ed = energy_density(&inv, &fam);
        for i in 0..g.n {
            let c = fam.c(inv.u[i]);
            // E + cM = S^2/2 and E - cM = R^2/2
            assert!((ed.e[i] + c * ed.m[i] - 0.5 * inv.s[i] * inv.s[i]).abs() < 1e-14);
            assert!((ed.e[i] - c * ed.m[i] - 0.5 * inv.r[i] * inv.r[i]).abs() < 1e-14);
        }
    }

    /// Independent high-order quadrature used to pin the trapezoid value.
    fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        fn simpson(f: &dyn Fn(f64) -> f64, a: f64, m: f64, b: f64) -> f64 {
            (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b))
        }
        fn rec(
            f: &dyn Fn(f64) -> f64,
            a: f64,
            m: f64,
            b: f64,
            whole: f64,
            tol: f64,
            depth: usize,
        ) -> f64 {
            let lm = 0.5 * (a + m);
            let rm = 0.5 * (m + b);
            let left = simpson(f, a, lm, m);
            let right = simpson(f, m, rm, b);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                rec(f, a, lm, m, left, tol / 2.0, depth - 1)
                    + rec(f, m, rm, b, right, tol / 2.0, depth - 1)
            }
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, b, simpson(f, a, m, b), tol, 40)
    }

    #[test]
    fn total_energy_matches_independent_quadrature() {
        // Smooth rapidly decaying R, S sampled directly; the trapezoid rule is
        // superalgebraically accurate for these, so agreement is tight.
        let g = Grid1d::covering(-4.0, 4.0, 1e-3).unwrap();
        let rf = |x: f64| 1.3 * (-x * x / (2.0 * 0.4 * 0.4)).exp();
        let sf = |x: f64| -0.7 * (-(x - 0.2) * (x - 0.2) / (2.0 * 0.25 * 0.25)).exp();
        let xs = g.xs();
        let inv = InvariantField::new(
            g,
            vec![0.0; g.n],
            xs.iter().map(|&x| rf(x)).collect(),
            xs.iter().map(|&x| sf(x)).collect(),
        )
        .unwrap();
        let got = total_energy(&inv);
        let want = adaptive_simpson(
            &|x| 0.25 * (rf(x) * rf(x) + sf(x) * sf(x)),
            -4.0,
            4.0,
            1e-13,
        );
        assert!(
            (got - want).abs() < 1e-8,
            "trapezoid {got} vs quadrature {want}"
        );
    }

    #[test]
    fn total_energy_quadratic_scaling() {
        let g = Grid1d::covering(-1.0, 1.0, 0.01).unwrap();
        let xs = g.xs();
        let r: Vec<f64> = xs.iter().map(|&x| (-x * x).exp()).collect();
        let s: Vec<f64> = xs.iter().map(|&x| x * (-x * x).exp()).collect();
        let inv = InvariantField::new(g, vec![0.0; g.n], r.clone(), s.clone()).unwrap();
        let half = InvariantField::new(
            g,
            vec![0.0; g.n],
            r.iter().map(|v| v / 2.0f64.sqrt()).collect(),
            s.iter().map(|v| v / 2.0f64.sqrt()).collect(),
        )
        .unwrap();
        let (e, eh) = (total_energy(&inv), total_energy(&half));
        assert!((eh - 0.5 * e).abs() < 1e-12 * e.max(1.0));
    }
}
