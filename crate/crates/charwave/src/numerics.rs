//! Small shared numerical kernels: compensated summation, trapezoid
//! integration on uniform grids, monotone linear interpolation.

/// Kahan compensated accumulator. Cumulative integrals along lattice rows can
/// run over thousands of cells; plain summation drift would show up in the
/// round-off-level identities the zero-data run is required to satisfy.
#[derive(Debug, Clone, Copy)]
pub struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    pub fn new() -> Self {
        Kahan { sum: 0.0, c: 0.0 }
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        let y = v - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum
    }
}

impl Default for Kahan {
    fn default() -> Self {
        Self::new()
    }
}

/// Trapezoid rule on a uniform grid with spacing `dx`.
pub fn trapz(dx: f64, f: &[f64]) -> f64 {
    if f.len() < 2 {
        return 0.0;
    }
    let mut acc = Kahan::new();
    for k in 0..f.len() - 1 {
        acc.add(0.5 * dx * (f[k] + f[k + 1]));
    }
    acc.value()
}

/// Cumulative trapezoid integral, `F[0] = 0`, on a uniform grid.
pub fn cumtrapz(dx: f64, f: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(f.len());
    let mut acc = Kahan::new();
    out.push(0.0);
    for k in 0..f.len().saturating_sub(1) {
        acc.add(0.5 * dx * (f[k] + f[k + 1]));
        out.push(acc.value());
    }
    out
}

/// Linear interpolation on strictly increasing `xs`, clamped to the end
/// values outside the table.
pub fn interp_clamped(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    // partition_point returns the first index with xs[i] > x; the bracketing
    // cell is [k-1, k].
    let k = xs.partition_point(|&v| v <= x);
    let (x0, x1) = (xs[k - 1], xs[k]);
    let (y0, y1) = (ys[k - 1], ys[k]);
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// Linear interpolation on strictly decreasing `xs`, clamped outside.
pub fn interp_clamped_desc(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if x >= xs[0] {
        return ys[0];
    }
    if x <= xs[n - 1] {
        return ys[n - 1];
    }
    let k = xs.partition_point(|&v| v >= x);
    let (x0, x1) = (xs[k - 1], xs[k]);
    let (y0, y1) = (ys[k - 1], ys[k]);
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}
