//! Quadrature on uniform grids and Gauss–Legendre panels.

use crate::scalar::Real;

/// Composite trapezoid rule on uniformly spaced samples.
pub fn trapezoid<T: Real>(values: &[T], h: T) -> T {
    let n = values.len();
    if n < 2 {
        return T::zero();
    }
    let inner = values[1..n - 1].iter().fold(T::zero(), |s, &v| s + v);
    h * (inner + (values[0] + values[n - 1]) * T::lit(0.5))
}

/// Trapezoid weight of node `i` among `n` nodes with spacing `h`.
#[inline]
pub fn trapezoid_weight<T: Real>(i: usize, n: usize, h: T) -> T {
    if i == 0 || i + 1 == n {
        h * T::lit(0.5)
    } else {
        h
    }
}

/// `out[i] = ∫_{x_i}^{x_last} f` by the trapezoid rule.
pub fn tail_integrals<T: Real>(values: &[T], h: T) -> Vec<T> {
    let n = values.len();
    let mut out = vec![T::zero(); n];
    let half = T::lit(0.5) * h;
    for i in (0..n.saturating_sub(1)).rev() {
        out[i] = out[i + 1] + half * (values[i] + values[i + 1]);
    }
    out
}

/// `out[i] = ∫_{x_0}^{x_i} f` by the trapezoid rule.
pub fn cumulative<T: Real>(values: &[T], h: T) -> Vec<T> {
    let n = values.len();
    let mut out = vec![T::zero(); n];
    let half = T::lit(0.5) * h;
    for i in 1..n {
        out[i] = out[i - 1] + half * (values[i] + values[i - 1]);
    }
    out
}

/// Cumulative integral with the Euler–Maclaurin endpoint correction, fourth
/// order for smooth integrands. `derivative` holds samples of `f'`.
pub fn cumulative_corrected<T: Real>(values: &[T], derivative: &[T], h: T) -> Vec<T> {
    let mut out = cumulative(values, h);
    let c = h * h / T::lit(12.0);
    for i in 1..out.len() {
        out[i] -= c * (derivative[i] - derivative[0]);
    }
    out
}

/// Central finite-difference derivative; fourth order inside, second order
/// one node from the boundary and one-sided at the ends.
pub fn derivative<T: Real>(values: &[T], h: T) -> Vec<T> {
    let n = values.len();
    let mut d = vec![T::zero(); n];
    if n < 3 {
        return d;
    }
    let two = T::lit(2.0);
    d[0] = (-T::lit(3.0) * values[0] + T::lit(4.0) * values[1] - values[2]) / (two * h);
    d[n - 1] = (T::lit(3.0) * values[n - 1] - T::lit(4.0) * values[n - 2] + values[n - 3]) / (two * h);
    for i in 1..n - 1 {
        d[i] = if i >= 2 && i + 2 < n {
            (values[i - 2] - T::lit(8.0) * values[i - 1] + T::lit(8.0) * values[i + 1]
                - values[i + 2])
                / (T::lit(12.0) * h)
        } else {
            (values[i + 1] - values[i - 1]) / (two * h)
        };
    }
    d
}

/// Second derivative by the fourth-order five-point stencil (second order near the ends).
pub fn second_derivative<T: Real>(values: &[T], h: T) -> Vec<T> {
    let n = values.len();
    let mut d = vec![T::zero(); n];
    if n < 3 {
        return d;
    }
    let h2 = h * h;
    for i in 1..n - 1 {
        d[i] = if i >= 2 && i + 2 < n {
            (-values[i - 2] + T::lit(16.0) * values[i - 1] - T::lit(30.0) * values[i]
                + T::lit(16.0) * values[i + 1]
                - values[i + 2])
                / (T::lit(12.0) * h2)
        } else {
            (values[i + 1] - T::lit(2.0) * values[i] + values[i - 1]) / h2
        };
    }
    d[0] = d[1];
    d[n - 1] = d[n - 2];
    d
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Gauss–Legendre panel rule on `[a, b]` with panels no wider than `width`.
pub fn gl_panels(a: f64, b: f64, width: f64, per_panel: usize) -> (Vec<f64>, Vec<f64>) {
    let (gx, gw) = gauss_legendre(per_panel);
    let panels = (((b - a) / width).ceil() as usize).max(1);
    let pw = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * per_panel);
    let mut weights = Vec::with_capacity(panels * per_panel);
    for p in 0..panels {
        let lo = a + p as f64 * pw;
        for (x, w) in gx.iter().zip(&gw) {
            nodes.push(lo + 0.5 * pw * (x + 1.0));
            weights.push(0.5 * pw * w);
        }
    }
    (nodes, weights)
}
