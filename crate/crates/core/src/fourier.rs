//! Fourier transforms with the convention `ĝ(λ) = ∫ e^{-iλx} g(x) dx`.

use rustfft::FftPlanner;

use crate::grid::Grid;
use crate::scalar::{cis, cre, Real, C};

/// `ĝ(λ_k)` by the trapezoid rule over the grid, for arbitrary frequencies.
pub fn dft_at<T: Real>(grid: &Grid<T>, g: &[C<T>], lambdas: &[T]) -> Vec<C<T>> {
    lambdas.iter().map(|&l| dft_one(grid, g, l)).collect()
}

/// `∫ e^{-iλx} g(x) dx` for one frequency, with a phase recurrence refreshed every 64 nodes.
pub fn dft_one<T: Real>(grid: &Grid<T>, g: &[C<T>], lambda: T) -> C<T> {
    let h = grid.h();
    let step = cis(-lambda * h);
    let mut acc = cre(T::zero());
    let mut ph = cre(T::one());
    for (i, v) in g.iter().enumerate() {
        if i % 64 == 0 {
            ph = cis(-lambda * grid.x(i));
        }
        acc += *v * ph * grid.weight(i);
        ph *= step;
    }
    acc
}

/// Angular frequencies of an FFT of length `n` with sample spacing `h`.
pub fn fft_frequencies<T: Real>(n: usize, h: T) -> Vec<T> {
    let dk = T::lit(2.0) * T::PI() / (T::from_count(n) * h);
    (0..n)
        .map(|k| {
            if 2 * k < n {
                T::from_count(k) * dk
            } else {
                -(T::from_count(n - k) * dk)
            }
        })
        .collect()
}

/// Applies the Fourier multiplier `mult(k)` to samples `g` after zero-padding by `pad`.
/// Frequencies at or beyond the Nyquist index are passed to `mult` with their signed value;
/// the exact Nyquist bin is zeroed.
pub fn fft_multiplier<T: Real>(g: &[C<T>], h: T, pad: usize, mult: impl Fn(T) -> C<T>) -> Vec<C<T>> {
    let n = g.len();
    let len = (n * pad.max(1)).next_power_of_two();
    let mut buf = vec![cre(T::zero()); len];
    buf[..n].copy_from_slice(g);
    let mut planner = FftPlanner::<T>::new();
    planner.plan_fft_forward(len).process(&mut buf);
    let freqs = fft_frequencies(len, h);
    for (k, b) in buf.iter_mut().enumerate() {
        *b = if 2 * k == len { cre(T::zero()) } else { *b * mult(freqs[k]) };
    }
    planner.plan_fft_inverse(len).process(&mut buf);
    let scale = T::one() / T::from_count(len);
    buf.truncate(n);
    buf.iter_mut().for_each(|b| *b *= scale);
    buf
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_transform() {
        let g = Grid::new(-20.0f64, 20.0, 801).unwrap();
        let vals: Vec<_> = g.points().iter().map(|x| cre((-x * x / 2.0).exp())).collect();
        for l in [0.0, 1.0, 2.5] {
            let v = dft_one(&g, &vals, l);
            let exact = (2.0 * std::f64::consts::PI).sqrt() * (-l * l / 2.0f64).exp();
            assert!((v.re - exact).abs() < 1e-12 && v.im.abs() < 1e-12);
        }
    }

    #[test]
    fn multiplier_derivative() {
        let g = Grid::new(-20.0f64, 20.0, 1024).unwrap();
        let vals: Vec<_> = g.points().iter().map(|x| cre((-x * x / 2.0).exp())).collect();
        let d = fft_multiplier(&vals, g.h(), 2, |k| C::new(0.0, k));
        for (i, x) in g.points().iter().enumerate() {
            assert!((d[i].re + x * (-x * x / 2.0).exp()).abs() < 1e-10);
        }
    }
}
