//! Wave-speed families c(u) and the constants derived from them.
//!
//! The solver assumes a smooth, bounded, strictly positive speed. The two
//! genuinely nonlinear families also have c'(u) > 0 everywhere; the constant
//! family has c' = 0 and is admitted only as a degenerate cross-check case
//! (it turns every source term off, so closed-form solutions are available).

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpeedFamily {
    /// c(u) = c0. Degenerate: c' = 0, kept for oracle comparisons.
    Constant { c0: f64 },
    /// c(u) = a + b tanh(u), requires a > b > 0.
    AffineTanh { a: f64, b: f64 },
    /// c(u) = a + b u / sqrt(1 + u^2), requires a > b > 0.
    ExpSoft { a: f64, b: f64 },
}

impl SpeedFamily {
    pub fn constant(c0: f64) -> Result<Self> {
        if !c0.is_finite() || c0 <= 0.0 {
            return Err(Error::InvalidParam(format!(
                "constant speed needs c0 > 0, got {c0}"
            )));
        }
        Ok(SpeedFamily::Constant { c0 })
    }

    pub fn affine_tanh(a: f64, b: f64) -> Result<Self> {
        check_ab("affine-tanh", a, b)?;
        Ok(SpeedFamily::AffineTanh { a, b })
    }

    pub fn exp_soft(a: f64, b: f64) -> Result<Self> {
        check_ab("exp-soft", a, b)?;
        Ok(SpeedFamily::ExpSoft { a, b })
    }

    /// True for the c' = 0 family that violates the strict-monotonicity
    /// assumption and is only meant for cross-checks.
    pub fn is_degenerate(&self) -> bool {
        matches!(self, SpeedFamily::Constant { .. })
    }

    #[inline]
    pub fn c(&self, u: f64) -> f64 {
        match *self {
            SpeedFamily::Constant { c0 } => c0,
            SpeedFamily::AffineTanh { a, b } => a + b * u.tanh(),
            SpeedFamily::ExpSoft { a, b } => a + b * u / (1.0 + u * u).sqrt(),
        }
    }

    #[inline]
    pub fn c_prime(&self, u: f64) -> f64 {
        match *self {
            SpeedFamily::Constant { .. } => 0.0,
            SpeedFamily::AffineTanh { b, .. } => {
                let t = u.tanh();
                b * (1.0 - t * t)
            }
            SpeedFamily::ExpSoft { b, .. } => {
                let d = 1.0 + u * u;
                b / (d * d.sqrt())
            }
        }
    }

    /// Infimum of c over all of R (positive by construction).
    pub fn c_min(&self) -> f64 {
        match *self {
            SpeedFamily::Constant { c0 } => c0,
            SpeedFamily::AffineTanh { a, b } | SpeedFamily::ExpSoft { a, b } => a - b,
        }
    }

    /// Supremum of c over all of R.
    pub fn c_max(&self) -> f64 {
        match *self {
            SpeedFamily::Constant { c0 } => c0,
            SpeedFamily::AffineTanh { a, b } | SpeedFamily::ExpSoft { a, b } => a + b,
        }
    }

    /// The coefficient k(u) = c'(u) / (8 c(u)^2) that multiplies every source
    /// term of the characteristic-coordinate system.
    #[inline]
    pub fn source_coeff(&self, u: f64) -> f64 {
        let c = self.c(u);
        self.c_prime(u) / (8.0 * c * c)
    }

    /// Upper bound C0 >= sup_u c'(u) / (8 c(u)^2), valid on any u-range.
    /// The a priori bounds on p and q are exp(+-8 C0 (M + 2 E0)).
    pub fn source_coeff_sup(&self) -> f64 {
        match *self {
            SpeedFamily::Constant { .. } => 0.0,
            // With s = tanh(u) the coefficient is b (1 - s^2) / (8 (a + b s)^2),
            // maximized at s = -b/a with value b / (8 (a^2 - b^2)).
            SpeedFamily::AffineTanh { a, b } => b / (8.0 * (a * a - b * b)),
            // No convenient closed form; the coefficient decays like |u|^-3,
            // so a dense scan over a wide interval brackets the maximum.
            SpeedFamily::ExpSoft { .. } => {
                let mut best = self.source_coeff(0.0);
                let (mut lo, mut hi) = (-64.0_f64, 64.0_f64);
                for _ in 0..4 {
                    let mut arg = 0.0;
                    let n = 8192;
                    for k in 0..=n {
                        let u = lo + (hi - lo) * k as f64 / n as f64;
                        let v = self.source_coeff(u);
                        if v > best {
                            best = v;
                            arg = u;
                        }
                    }
                    let step = (hi - lo) / n as f64;
                    lo = arg - 2.0 * step;
                    hi = arg + 2.0 * step;
                }
                best * (1.0 + 1e-12)
            }
        }
    }
}

fn check_ab(name: &str, a: f64, b: f64) -> Result<()> {
    if !(a.is_finite() && b.is_finite() && a > b && b > 0.0) {
        return Err(Error::InvalidParam(format!(
            "{name} speed needs a > b > 0, got a = {a}, b = {b}"
        )));
    }
    Ok(())
}
