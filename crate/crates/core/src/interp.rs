//! Interpolation on tabulated data.

use num_complex::Complex;

use crate::error::{Result, ScatterError};
use crate::scalar::Real;

/// Monotone piecewise cubic Hermite interpolant (Fritsch–Carlson slopes).
#[derive(Debug, Clone)]
pub struct Pchip<T> {
    x: Vec<T>,
    y: Vec<T>,
    d: Vec<T>,
}

impl<T: Real> Pchip<T> {
    pub fn new(x: Vec<T>, y: Vec<T>) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(ScatterError::input("pchip needs at least two matching samples"));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ScatterError::input("pchip abscissae must be strictly increasing"));
        }
        let h: Vec<T> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let del: Vec<T> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
        let mut d = vec![T::zero(); n];
        if n == 2 {
            d[0] = del[0];
            d[1] = del[0];
        } else {
            let two = T::lit(2.0);
            for k in 1..n - 1 {
                if del[k - 1] * del[k] > T::zero() {
                    let w1 = two * h[k] + h[k - 1];
                    let w2 = h[k] + two * h[k - 1];
                    d[k] = (w1 + w2) / (w1 / del[k - 1] + w2 / del[k]);
                }
            }
            d[0] = end_slope(h[0], h[1], del[0], del[1]);
            d[n - 1] = end_slope(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
        }
        Ok(Self { x, y, d })
    }

    pub fn domain(&self) -> (T, T) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    /// Evaluates the interpolant; values outside the table are clamped to the ends.
    pub fn eval(&self, t: T) -> T {
        let n = self.x.len();
        let k = match self
            .x
            .binary_search_by(|p| p.partial_cmp(&t).unwrap_or(std::cmp::Ordering::Less))
        {
            Ok(i) => return self.y[i],
            Err(0) => return self.y[0],
            Err(i) if i >= n => return self.y[n - 1],
            Err(i) => i - 1,
        };
        let h = self.x[k + 1] - self.x[k];
        let s = (t - self.x[k]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let h00 = two * s3 - three * s2 + T::one();
        let h10 = s3 - two * s2 + s;
        let h01 = -two * s3 + three * s2;
        let h11 = s3 - s2;
        h00 * self.y[k] + h10 * h * self.d[k] + h01 * self.y[k + 1] + h11 * h * self.d[k + 1]
    }
}

fn end_slope<T: Real>(h0: T, h1: T, del0: T, del1: T) -> T {
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let d = ((two * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d * del0 <= T::zero() {
        T::zero()
    } else if del0 * del1 <= T::zero() && d.abs() > (three * del0).abs() {
        three * del0
    } else {
        d
    }
}

/// Four-point Lagrange interpolation on a uniform grid starting at `x0` with spacing `h`.
/// Returns `None` outside `[x0, x0 + (n-1) h]`.
pub fn lagrange4<T: Real>(values: &[T], x0: T, h: T, t: T) -> Option<T> {
    let (k, w) = lagrange4_weights(values.len(), x0, h, t)?;
    Some((0..4).fold(T::zero(), |s, j| s + w[j] * values[k + j]))
}

/// Complex counterpart of [`lagrange4`].
pub fn lagrange4_complex<T: Real>(
    values: &[Complex<T>],
    x0: T,
    h: T,
    t: T,
) -> Option<Complex<T>> {
    let (k, w) = lagrange4_weights(values.len(), x0, h, t)?;
    Some((0..4).fold(Complex::new(T::zero(), T::zero()), |s, j| {
        s + values[k + j] * w[j]
    }))
}

/// Stencil start and weights for four-point Lagrange interpolation.
pub fn lagrange4_weights<T: Real>(n: usize, x0: T, h: T, t: T) -> Option<(usize, [T; 4])> {
    if n < 4 {
        return None;
    }
    let s = (t - x0) / h;
    let last = T::from_count(n - 1);
    let tol = T::lit(1e-9);
    if s < -tol || s > last + tol {
        return None;
    }
    let s = s.max(T::zero()).min(last);
    let i = s.floor().to_usize().unwrap_or(0).min(n - 2);
    let k = i.saturating_sub(1).min(n - 4);
    let u = s - T::from_count(k);
    let one = T::one();
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let six = T::lit(6.0);
    let w0 = -(u - one) * (u - two) * (u - three) / six;
    let w1 = u * (u - two) * (u - three) / two;
    let w2 = -u * (u - one) * (u - three) / two;
    let w3 = u * (u - one) * (u - two) / six;
    Some((k, [w0, w1, w2, w3]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pchip_preserves_monotonicity_and_nodes() {
        let x: Vec<f64> = vec![0.0, 1.0, 2.0, 3.0, 4.0];
        let y = vec![0.0, 0.1, 0.2, 5.0, 5.1];
        let p = Pchip::new(x.clone(), y.clone()).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((p.eval(*a) - b).abs() < 1e-15);
        }
        let mut prev = -1.0;
        for k in 0..=400 {
            let v = p.eval(k as f64 / 100.0);
            assert!(v >= prev - 1e-15);
            prev = v;
        }
    }

    #[test]
    fn lagrange_is_exact_for_cubics() {
        let h = 0.1;
        let vals: Vec<f64> = (0..20).map(|i| (i as f64 * h).powi(3) - 2.0 * i as f64 * h).collect();
        for t in [0.0, 0.03, 0.55, 1.87, 1.9] {
            let v = lagrange4(&vals, 0.0, h, t).unwrap();
            assert!((v - (t * t * t - 2.0 * t)).abs() < 1e-12, "{t}");
        }
        assert!(lagrange4(&vals, 0.0, h, 2.5).is_none());
    }
}
