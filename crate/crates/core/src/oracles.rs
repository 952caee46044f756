//! Closed-form reference solutions for the Pöschl–Teller well and for
//! piecewise-constant potentials.

use num_complex::Complex64;

use crate::error::{Result, ScatterError};

#[inline]
fn sech(x: f64) -> f64 {
    1.0 / x.cosh()
}

/// Reference data for `V = -2 sech^2 x` (reflectionless, one bound state, zero-energy resonance).
#[derive(Debug, Clone, Copy, Default)]
pub struct PoschlTeller;

impl PoschlTeller {
    const I: Complex64 = Complex64::new(0.0, 1.0);

    pub fn potential(&self, x: f64) -> f64 {
        -2.0 * sech(x).powi(2)
    }

    pub fn m_plus(&self, z: Complex64, x: f64) -> Complex64 {
        (z + Self::I * x.tanh()) / (z + Self::I)
    }

    pub fn m_minus(&self, z: Complex64, x: f64) -> Complex64 {
        (z - Self::I * x.tanh()) / (z + Self::I)
    }

    pub fn dm_plus(&self, z: Complex64, x: f64) -> Complex64 {
        Self::I * sech(x).powi(2) / (z + Self::I)
    }

    pub fn dm_minus(&self, z: Complex64, x: f64) -> Complex64 {
        -Self::I * sech(x).powi(2) / (z + Self::I)
    }

    /// `W(z) = -2iz (z - i)/(z + i)`.
    pub fn wronskian(&self, z: Complex64) -> Complex64 {
        -2.0 * Self::I * z * (z - Self::I) / (z + Self::I)
    }

    pub fn bound_energy(&self) -> f64 {
        -1.0
    }

    /// Normalized bound state `sech(x)/sqrt 2`.
    pub fn bound_state(&self, x: f64) -> f64 {
        sech(x) / std::f64::consts::SQRT_2
    }

    /// Marchenko kernel `B_+(xi, x) = -2 (1 - tanh x) e^{-2 xi}` for `xi > 0`.
    pub fn b_plus(&self, xi: f64, x: f64) -> f64 {
        if xi < 0.0 {
            0.0
        } else {
            -2.0 * (1.0 - x.tanh()) * (-2.0 * xi).exp()
        }
    }

    /// `||B_+(., x)||_1 = 1 - tanh x`.
    pub fn b_plus_l1(&self, x: f64) -> f64 {
        1.0 - x.tanh()
    }

    /// `||2 i xi B_+(., x)||_1 = 1 - tanh x`.
    pub fn c_plus_l1(&self, x: f64) -> f64 {
        1.0 - x.tanh()
    }

    /// Constant relating the zero-energy solutions, `m_-(0,x) = c0 m_+(0,x)`.
    pub fn resonance_constant(&self) -> f64 {
        -1.0
    }
}

/// Piecewise-constant potential: `values[k]` on `(breaks[k], breaks[k+1])`, zero outside.
#[derive(Debug, Clone)]
pub struct PiecewiseConstant {
    breaks: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseConstant {
    pub fn new(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breaks.len() != values.len() + 1 || values.is_empty() {
            return Err(ScatterError::input("need one more break than value"));
        }
        if breaks.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ScatterError::input("breaks must increase"));
        }
        Ok(Self { breaks, values })
    }

    /// `-depth` on `|x| < half_width`.
    pub fn square_well(depth: f64, half_width: f64) -> Self {
        Self { breaks: vec![-half_width, half_width], values: vec![-depth] }
    }

    pub fn potential(&self, x: f64) -> f64 {
        for k in 0..self.values.len() {
            if x > self.breaks[k] && x < self.breaks[k + 1] {
                return self.values[k];
            }
        }
        0.0
    }

    fn value_between(&self, a: f64, b: f64) -> f64 {
        self.potential(0.5 * (a + b))
    }

    /// `(f, f')` propagated from `x0` to `x1` through the layers.
    fn propagate(&self, z: Complex64, x0: f64, x1: f64, mut state: [Complex64; 2]) -> [Complex64; 2] {
        let mut pts = vec![x0];
        let (lo, hi) = if x0 < x1 { (x0, x1) } else { (x1, x0) };
        let mut inner: Vec<f64> = self.breaks.iter().copied().filter(|b| *b > lo && *b < hi).collect();
        if x0 > x1 {
            inner.reverse();
        }
        pts.extend(inner);
        pts.push(x1);
        for w in pts.windows(2) {
            let v = self.value_between(w[0], w[1]);
            state = slab(z, v, w[1] - w[0], state);
        }
        state
    }

    fn left(&self) -> f64 {
        self.breaks[0]
    }

    fn right(&self) -> f64 {
        self.breaks[self.breaks.len() - 1]
    }

    /// `(f_+, f_+')` with `f_+ = e^{izx}` to the right of the support.
    pub fn f_plus(&self, z: Complex64, x: f64) -> [Complex64; 2] {
        let i = Complex64::i();
        let r = self.right().max(x);
        let e = (i * z * r).exp();
        self.propagate(z, r, x, [e, i * z * e])
    }

    /// `(f_-, f_-')` with `f_- = e^{-izx}` to the left of the support.
    pub fn f_minus(&self, z: Complex64, x: f64) -> [Complex64; 2] {
        let i = Complex64::i();
        let l = self.left().min(x);
        let e = (-i * z * l).exp();
        self.propagate(z, l, x, [e, -i * z * e])
    }

    /// `m_+ = e^{-izx} f_+` and its derivative.
    pub fn m_plus(&self, z: Complex64, x: f64) -> [Complex64; 2] {
        let i = Complex64::i();
        let [f, df] = self.f_plus(z, x);
        let e = (-i * z * x).exp();
        [e * f, e * (df - i * z * f)]
    }

    /// `m_- = e^{izx} f_-` and its derivative.
    pub fn m_minus(&self, z: Complex64, x: f64) -> [Complex64; 2] {
        let i = Complex64::i();
        let [f, df] = self.f_minus(z, x);
        let e = (i * z * x).exp();
        [e * f, e * (df + i * z * f)]
    }

    /// `W = f_+ f_-' - f_+' f_-`, independent of the evaluation point.
    pub fn wronskian(&self, z: Complex64) -> Complex64 {
        let x = 0.5 * (self.left() + self.right());
        let [fp, dfp] = self.f_plus(z, x);
        let [fm, dfm] = self.f_minus(z, x);
        fp * dfm - dfp * fm
    }

    /// Closed-form square-well Wronskian `-2iz e^{2izw}[cos 2kw - i (z^2+k^2)/(2zk) sin 2kw]`, `k^2 = z^2 + depth`.
    pub fn square_well_wronskian(depth: f64, half_width: f64, z: Complex64) -> Complex64 {
        let i = Complex64::i();
        let k = (z * z + depth).sqrt();
        let w2 = 2.0 * half_width;
        let e = (i * z * w2).exp();
        if z.norm() < 1e-14 {
            return -k * (k * w2).sin();
        }
        -2.0 * i * z * e * ((k * w2).cos() - i * (z * z + k * k) / (2.0 * z * k) * (k * w2).sin())
    }
}

/// Transfer of `(f, f')` across a layer of constant potential `v` and signed width `d`.
fn slab(z: Complex64, v: f64, d: f64, s: [Complex64; 2]) -> [Complex64; 2] {
    let k = (z * z - v).sqrt();
    let kd = k * d;
    let (c, sk, ks) = if kd.norm() < 1e-6 {
        let kd2 = kd * kd;
        (
            1.0 - kd2 / 2.0 + kd2 * kd2 / 24.0,
            d * (1.0 - kd2 / 6.0 + kd2 * kd2 / 120.0),
            -k * k * d * (1.0 - kd2 / 6.0),
        )
    } else {
        (kd.cos(), kd.sin() / k, -k * kd.sin())
    };
    [c * s[0] + sk * s[1], ks * s[0] + c * s[1]]
}

/// Free Schrödinger evolution `i u_t = -u_xx` of `e^{ik₀x} e^{-(x-x₀)²/(2σ²)}`.
pub fn free_gaussian(x: f64, t: f64, x0: f64, k0: f64, sigma: f64) -> Complex64 {
    let a = Complex64::new(sigma * sigma, 2.0 * t);
    let y = x - x0;
    let b = y - 2.0 * k0 * t;
    let phase = Complex64::new(0.0, k0 * y - k0 * k0 * t + k0 * x0).exp();
    sigma / a.sqrt() * (-(b * b) / (2.0 * a)).exp() * phase
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pt_wronskian_matches_m_form() {
        let pt = PoschlTeller;
        for &l in &[0.3, 1.0, 2.5] {
            let z = Complex64::new(l, 0.0);
            let x = 0.7;
            let w = pt.m_plus(z, x) * pt.dm_minus(z, x) - pt.dm_plus(z, x) * pt.m_minus(z, x)
                - 2.0 * Complex64::i() * z * pt.m_plus(z, x) * pt.m_minus(z, x);
            assert!((w - pt.wronskian(z)).norm() < 1e-13);
        }
        assert!((pt.wronskian(Complex64::new(1.0, 0.0)) + 2.0).norm() < 1e-14);
    }

    #[test]
    fn square_well_transfer_matches_closed_form() {
        let well = PiecewiseConstant::square_well(0.3, 1.0);
        for &l in &[0.0, 0.2, 1.0, 3.0] {
            let z = Complex64::new(l, 0.0);
            let a = well.wronskian(z);
            let b = PiecewiseConstant::square_well_wronskian(0.3, 1.0, z);
            assert!((a - b).norm() < 1e-12, "{l}: {a} vs {b}");
        }
    }

    #[test]
    fn resonant_square_well_has_vanishing_zero_energy_wronskian() {
        let depth = (std::f64::consts::PI / 2.0).powi(2);
        let w = PiecewiseConstant::square_well_wronskian(depth, 1.0, Complex64::new(0.0, 0.0));
        assert!(w.norm() < 1e-12);
    }
}
