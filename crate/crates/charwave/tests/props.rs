//! Generative properties of the small algebraic building blocks: whatever
//! state the integrator visits, these identities must hold exactly or to
//! stated tolerance, so they are checked over randomized inputs.

use proptest::prelude::*;

use charwave::charmap::build_boundary;
use charwave::goursat::{rhs, theta_eps, theta_sharp, Mode, State};
use charwave::lattice::Lattice;
use charwave::numerics::interp_clamped;
use charwave::speed::SpeedFamily;
use charwave::wavefield::{riemann_invariants, Grid1d, InitialData};

fn arb_state() -> impl Strategy<Value = State> {
    (
        -2.0..2.0f64,
        -6.0..6.0f64,
        -6.0..6.0f64,
        0.05..20.0f64,
        0.05..20.0f64,
    )
        .prop_map(|(u, w, z, p, q)| State { u, w, z, p, q })
}

fn arb_family() -> impl Strategy<Value = SpeedFamily> {
    prop_oneof![
        (0.2..5.0f64).prop_map(|c0| SpeedFamily::constant(c0).unwrap()),
        (1.0..4.0f64, 0.1..0.9f64)
            .prop_map(|(a, b)| SpeedFamily::affine_tanh(a, a * b).unwrap()),
        (0.2..3.0f64, 0.05..0.95f64)
            .prop_map(|(a, frac)| SpeedFamily::exp_soft(a, a * frac).unwrap()),
    ]
}

fn arb_mode_eps() -> impl Strategy<Value = (Mode, f64)> {
    prop_oneof![
        Just((Mode::Conservative, 0.0)),
        Just((Mode::Sharp, 0.0)),
        (0.01..0.8f64).prop_map(|e| (Mode::Regularized, e)),
    ]
}

proptest! {
    /// The two transported weights always satisfy q_X = -p_Y bitwise, in
    /// every mode and at every state.
    #[test]
    fn qx_cancels_py_bitwise(st in arb_state(), fam in arb_family(), me in arb_mode_eps()) {
        let r = rhs(&fam, &st, me.0, me.1);
        prop_assert_eq!(r.q_x.to_bits(), (-r.p_y).to_bits());
        prop_assert!(r.w_y.is_finite() && r.z_x.is_finite() && r.u_x.is_finite() && r.u_y.is_finite());
    }

    /// Equal angles silence every source: only the regularized drift
    /// survives in w_Y and z_X, and the weights do not move at all.
    #[test]
    fn equal_angles_leave_only_drift(
        u in -2.0..2.0f64,
        a in -6.0..6.0f64,
        p in 0.05..20.0f64,
        q in 0.05..20.0f64,
        fam in arb_family(),
        me in arb_mode_eps(),
    ) {
        let st = State { u, w: a, z: a, p, q };
        let r = rhs(&fam, &st, me.0, me.1);
        prop_assert_eq!(r.w_y, me.1);
        prop_assert_eq!(r.z_x, me.1);
        prop_assert_eq!(r.p_y, 0.0);
        prop_assert_eq!(r.q_x, 0.0);
    }

    /// The regularized cutoff is 1 below the blow-up angle, 0 past the ramp
    /// of width eps^3, affine in between, and never leaves [0, 1].
    #[test]
    fn ramp_cutoff_profile(w in -7.0..7.0f64, z in -7.0..7.0f64, eps in 0.05..1.0f64) {
        let t = theta_eps(w, z, eps);
        let m = w.max(z);
        let pi = std::f64::consts::PI;
        prop_assert!((0.0..=1.0).contains(&t));
        if m <= pi {
            prop_assert_eq!(t, 1.0);
        } else if m >= pi + eps.powi(3) {
            prop_assert_eq!(t, 0.0);
        } else {
            let expected = 1.0 - (m - pi) / eps.powi(3);
            prop_assert!((t - expected).abs() <= 1e-12);
        }
        // the sharp cutoff is the ramp's zero-width limit
        prop_assert_eq!(theta_sharp(w, z), if m >= pi { 0.0 } else { 1.0 });
    }

    /// Every family stays inside its declared speed band and below its
    /// declared source-coefficient supremum.
    #[test]
    fn speed_band_and_source_sup(fam in arb_family(), u in -50.0..50.0f64) {
        let c = fam.c(u);
        prop_assert!(c > 0.0);
        prop_assert!(c >= fam.c_min() - 1e-12 && c <= fam.c_max() + 1e-12);
        prop_assert!(fam.source_coeff(u).abs() <= fam.source_coeff_sup() + 1e-12);
    }

    /// Clamped interpolation reproduces its nodes, clamps outside the table,
    /// and never leaves the convex hull of the bracketing values.
    #[test]
    fn interpolation_clamps_and_brackets(
        start in -5.0..5.0f64,
        steps in proptest::collection::vec(0.01..1.0f64, 2..20),
        ys in proptest::collection::vec(-10.0..10.0f64, 2..20),
        x in -20.0..20.0f64,
    ) {
        let n = steps.len().min(ys.len());
        let mut xs = Vec::with_capacity(n);
        let mut acc = start;
        for s in steps.iter().take(n) {
            xs.push(acc);
            acc += s;
        }
        let ys = &ys[..n];
        for k in 0..n {
            prop_assert_eq!(interp_clamped(&xs, ys, xs[k]), ys[k]);
        }
        let v = interp_clamped(&xs, ys, x);
        if x <= xs[0] {
            prop_assert_eq!(v, ys[0]);
        } else if x >= xs[n - 1] {
            prop_assert_eq!(v, ys[n - 1]);
        } else {
            let k = xs.iter().rposition(|&t| t <= x).unwrap();
            let (lo, hi) = (ys[k].min(ys[k + 1]), ys[k].max(ys[k + 1]));
            prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
        }
    }

    /// The lattice covers the requested range with padding, its coordinates
    /// are exact multiples of the spacing, and indexing round-trips.
    #[test]
    fn lattice_covers_and_round_trips(
        lo in -10.0..-0.1f64,
        hi in 0.1..10.0f64,
        h in 0.005..0.5f64,
        frac in 0.0..1.0f64,
    ) {
        let lat = Lattice::cover(lo, hi, h).unwrap();
        prop_assert!(lat.coord(0) <= lo && lat.coord(lat.n - 1) >= hi);
        let k = ((lat.n - 1) as f64 * frac) as usize;
        let c = lat.coord(k);
        prop_assert!((c / h - (c / h).round()).abs() < 1e-9);
        let (i, j) = (k, lat.n - 1 - k);
        prop_assert_eq!(lat.idx(i, j) % lat.n, i);
        prop_assert_eq!(lat.idx(i, j) / lat.n, j);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// For any bump data, the boundary curve is an invertible graph whose
    /// two parameterizations cancel, and it stays inside the energy funnel
    /// |X + phi(X)| <= 4 E0.
    #[test]
    fn curve_inverts_and_stays_in_funnel(
        amp0 in 0.0..0.8f64,
        w0 in 0.15..0.5f64,
        amp1 in 0.0..1.5f64,
        w1 in 0.15..0.5f64,
        fam in arb_family(),
        xq in -3.0..3.0f64,
    ) {
        let g = Grid1d::covering(-2.4, 2.4, 4e-3).unwrap();
        let data = InitialData::gaussian(g, amp0, w0, amp1, w1, 0.0, (-2.0, 2.0)).unwrap();
        let curve = build_boundary(&riemann_invariants(&data, &fam)).unwrap();
        let y = curve.phi(xq);
        prop_assert!((curve.phi_inv(y) - xq).abs() < 1e-9);
        prop_assert!((xq + y).abs() <= 4.0 * curve.e0 + 1e-9);
    }
}
