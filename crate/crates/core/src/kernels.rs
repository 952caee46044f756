//! Fourier kernels of the Jost functions.
//!
//! With `m_+(λ,x) - 1 = ∫_0^∞ B_+(ξ,x) e^{2iλξ} dξ`, the kernel is
//! `B_+(ξ,x) = (1/π)∫ e^{-2iλξ}(m_+(λ,x) - 1) dλ`, supported in `ξ ≥ 0`, and solves
//! `B_+(ξ,x) = ∫_{x+ξ}^∞ V + ∫_0^ξ dz ∫_{x+ξ-z}^∞ V(t) B_+(z,t) dt`.
//! The minus kernels are the mirror images: `B_-(ξ,x) = B̃_+(-ξ,-x)` for `Ṽ(y) = V(-y)`.
//! Minus kernels are stored at `ξ = -xi[k]`, so every field uses a nonnegative `xi` axis.

use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Result, ScatterError};
use crate::grid::Grid;
use crate::interp::lagrange4_complex;
use crate::jost::{JostField, ScatteringData, Side};
use crate::potential::SampledPotential;
use crate::quad;
use crate::resolvent::CutoffSpec;
use crate::scalar::{cis, cre, cx, Real, C};
use crate::signal::ComplexSignal;

/// How a kernel field was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KernelMethod {
    Marchenko,
    Fourier,
}

/// `B_±` sampled on `xi ≥ 0` at a set of `x` positions.
#[derive(Debug, Clone)]
pub struct KernelField<T> {
    pub method: KernelMethod,
    pub xi: Vec<T>,
    pub x: Vec<T>,
    /// `b_plus[s][k] = B_+(xi[k], x[s])`.
    pub b_plus: Vec<Vec<C<T>>>,
    /// `b_minus[s][k] = B_-(-xi[k], x[s])`.
    pub b_minus: Vec<Vec<C<T>>>,
    /// Largest `|B_±|` found on the wrong half-line (Fourier route only).
    pub support_leakage: T,
}

/// Which kernel family to measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KernelKind {
    /// `B_±`.
    B,
    /// `C_± = ±2iξ B_±`, the kernel of `∂_λ m_±`.
    C,
    /// `C̃_±`, the kernel of `n_± = (m_±(λ) - m_±(0))/λ`.
    CTilde,
}

/// Marchenko solution for `B_+` at the sample indices, by marching in `ξ = kh`.
/// Implicit trapezoid in both integration variables; cost `O(N²/2)`.
fn marchenko_plus<T: Real>(v: &SampledPotential<T>, samples: &[usize]) -> Vec<Vec<T>> {
    let n = v.grid.n;
    let last = n - 1;
    let h = v.h();
    let half = T::lit(0.5) * h;
    let eta_s = v.signed_tail();
    let vv = &v.values;
    let mut out: Vec<Vec<T>> = samples.iter().map(|&i| vec![T::zero(); last - i + 1]).collect();
    let mut g = vec![T::zero(); n];
    let mut jprev = vec![T::zero(); n + 1];
    let mut jcur = vec![T::zero(); n + 1];
    let mut b = vec![T::zero(); n + 1];
    // level 0
    for i in 0..n {
        b[i] = eta_s[i];
    }
    jprev[n] = T::zero();
    for i in (0..n).rev() {
        let next = if i + 1 < n { vv[i + 1] * b[i + 1] } else { T::zero() };
        jprev[i] = jprev[i + 1] + half * (vv[i] * b[i] + next);
    }
    for (s, &i) in samples.iter().enumerate() {
        out[s][0] = b[i];
    }
    let denom: Vec<T> = vv.iter().map(|&x| T::one() - half * half * x).collect();
    for k in 1..n {
        let top = last - k;
        let mut b_next = T::zero();
        let mut j_next = T::zero();
        for i in (0..=top).rev() {
            let jj = i + k;
            let i_prev = jprev[i + 1];
            let v_next = if i < top { vv[i + 1] } else { T::zero() };
            let r = eta_s[jj] + g[jj] + half * i_prev + half * (j_next + half * v_next * b_next);
            let bi = r / denom[i];
            let ji = j_next + half * (vv[i] * bi + v_next * b_next);
            g[jj] += half * (i_prev + ji);
            b[i] = bi;
            jcur[i] = ji;
            b_next = bi;
            j_next = ji;
        }
        jcur[top + 1] = T::zero();
        std::mem::swap(&mut jprev, &mut jcur);
        for (s, &i) in samples.iter().enumerate() {
            if i <= top {
                out[s][k] = b[i];
            }
        }
    }
    out
}

/// Zeroth Marchenko iterate `∫_{x+ξ}^∞ V` at `ξ = kh`, `k = 0..`, for the grid point nearest `x`.
pub fn marchenko_zeroth<T: Real>(v: &SampledPotential<T>, x: T) -> Result<Vec<T>> {
    let i = require_samples(&v.grid, &[x])?[0];
    Ok(v.signed_tail()[i..].to_vec())
}

/// `B_+(ξ_k, x)` with `ξ_k = kh` for the grid point nearest `x`.
/// The discrete equations are lower triangular in `ξ`, so the march is a direct solve.
pub fn marchenko_solve<T: Real>(v: &SampledPotential<T>, x: T) -> Result<Vec<T>> {
    let i = require_samples(&v.grid, &[x])?[0];
    Ok(marchenko_plus(v, &[i]).pop().expect("one sample"))
}

fn require_samples<T: Real>(grid: &Grid<T>, x: &[T]) -> Result<Vec<usize>> {
    if x.is_empty() {
        return Err(ScatterError::input("no kernel sample positions"));
    }
    x.iter()
        .map(|&p| {
            if grid.contains(p) {
                Ok(grid.nearest(p))
            } else {
                Err(ScatterError::Range(format!("sample x = {p} outside the grid")))
            }
        })
        .collect()
}

impl<T: Real> KernelField<T> {
    /// Solves the Marchenko equations; samples are snapped to the nearest grid point.
    pub fn marchenko(v: &SampledPotential<T>, x: &[T]) -> Result<Self> {
        let idx = require_samples(&v.grid, x)?;
        let n = v.grid.n;
        let h = v.h();
        let plus = marchenko_plus(v, &idx);
        let refl = v.reflected();
        let ridx: Vec<usize> = idx.iter().map(|&i| n - 1 - i).collect();
        let minus = marchenko_plus(&refl, &ridx);
        let pad = |col: Vec<T>| -> Vec<C<T>> {
            let mut c: Vec<C<T>> = col.into_iter().map(cre).collect();
            c.resize(n, cre(T::zero()));
            c
        };
        Ok(Self {
            method: KernelMethod::Marchenko,
            xi: (0..n).map(|k| T::from_count(k) * h).collect(),
            x: idx.iter().map(|&i| v.grid.x(i)).collect(),
            b_plus: plus.into_iter().map(pad).collect(),
            b_minus: minus.into_iter().map(pad).collect(),
            support_leakage: T::zero(),
        })
    }

    /// Transforms the computed `m_± - 1` in `λ`, with the analytic `1/(λ+i)` and `1/(λ+i)²` tails removed first.
    pub fn fourier(jost: &JostField<T>, v: &SampledPotential<T>, x: &[T], pad: usize) -> Result<Self> {
        let idx = require_samples(&v.grid, x)?;
        let tail = v.signed_tail();
        let head = v.signed_head();
        let mut b_plus = Vec::new();
        let mut b_minus = Vec::new();
        let mut leak = T::zero();
        let mut xi_out = Vec::new();
        for &i in &idx {
            for side in [Side::Plus, Side::Minus] {
                let eta = if side == Side::Plus { tail[i] } else { head[i] };
                // m - 1 ≈ c/(λ+i) + d/(λ+i)² with c = (i/2)η, d = V/4 - η/2 - η²/8 at large λ
                let c = cx(T::zero(), T::lit(0.5) * eta);
                let d = v.values[i] * T::lit(0.25) - eta * T::lit(0.5) - eta * eta * T::lit(0.125);
                let samples: Vec<C<T>> = jost
                    .lambda
                    .iter()
                    .zip(&jost.columns)
                    .map(|(&l, col)| {
                        let m = if side == Side::Plus { col.m_plus[i] } else { col.m_minus[i] };
                        let p = cx(l, T::one());
                        m - cre(T::one()) - c / p - cre(d) / (p * p)
                    })
                    .collect();
                let (xi, vals) = lambda_transform(&jost.lambda, &samples, pad)?;
                let (pos, neg) =
                    split_half_lines(&xi, &vals, |x| (eta - T::lit(4.0) * d * x) * (-T::lit(2.0) * x).exp());
                leak = leak.max(neg);
                if xi_out.is_empty() {
                    xi_out = xi.iter().copied().filter(|x| *x >= T::zero()).collect();
                }
                if side == Side::Plus {
                    b_plus.push(pos);
                } else {
                    b_minus.push(pos);
                }
            }
        }
        Ok(Self {
            method: KernelMethod::Fourier,
            xi: xi_out,
            x: idx.iter().map(|&i| v.grid.x(i)).collect(),
            b_plus,
            b_minus,
            support_leakage: leak,
        })
    }

    pub fn b(&self, side: Side) -> &[Vec<C<T>>] {
        match side {
            Side::Plus => &self.b_plus,
            Side::Minus => &self.b_minus,
        }
    }

    /// Kernel values of the requested family at sample `s`, on `xi`.
    pub fn kernel(&self, side: Side, kind: KernelKind, s: usize) -> Vec<C<T>> {
        let b = &self.b(side)[s];
        match kind {
            KernelKind::B => b.clone(),
            KernelKind::C => b
                .iter()
                .zip(&self.xi)
                .map(|(v, &x)| *v * cx(T::zero(), T::lit(2.0) * x))
                .collect(),
            KernelKind::CTilde => {
                let h = self.xi_step();
                let n = b.len();
                let mut out = vec![cre(T::zero()); n];
                let two_i = cx(T::zero(), T::lit(2.0));
                let mut acc = cre(T::zero());
                for k in (0..n.saturating_sub(1)).rev() {
                    acc += (b[k] + b[k + 1]) * (T::lit(0.5) * h);
                    out[k] = two_i * acc;
                }
                out
            }
        }
    }

    fn xi_step(&self) -> T {
        if self.xi.len() > 1 {
            self.xi[1] - self.xi[0]
        } else {
            T::one()
        }
    }

    /// `||K(·, x_s)||_{L¹(dξ)}` for every sample.
    pub fn l1_by_x(&self, side: Side, kind: KernelKind) -> Vec<T> {
        let h = self.xi_step();
        (0..self.x.len())
            .map(|s| {
                let k = self.kernel(side, kind, s);
                let a: Vec<T> = k.iter().map(|z| z.norm()).collect();
                quad::trapezoid(&a, h)
            })
            .collect()
    }

    /// Interpolates `B_±(·, x_s)` onto other nonnegative `ξ` values (four-point Lagrange; zero beyond the axis).
    pub fn interpolate_b(&self, side: Side, s: usize, xi: &[T]) -> Vec<C<T>> {
        let b = &self.b(side)[s];
        let h = self.xi_step();
        xi.iter()
            .map(|&q| lagrange4_complex(b, self.xi[0], h, q).unwrap_or(cre(T::zero())))
            .collect()
    }
}

/// `(1/π) ∫ e^{-2iλξ} q(λ) dλ` by zero-padded FFT over a uniform `λ` grid.
/// Both `m_± - 1` are boundary values of functions analytic in `Im λ > 0`, so the same
/// transform yields `B_+(ξ)` and the mirrored `B_-(-ξ)`.
fn lambda_transform<T: Real>(lambda: &[T], q: &[C<T>], pad: usize) -> Result<(Vec<T>, Vec<C<T>>)> {
    let n = lambda.len();
    if n < 4 {
        return Err(ScatterError::input("lambda grid too short for a transform"));
    }
    let dl = lambda[1] - lambda[0];
    let len = (n * pad.max(1)).next_power_of_two();
    let mut buf = vec![cre(T::zero()); len];
    for k in 0..n {
        let w = if k == 0 || k + 1 == n { T::lit(0.5) } else { T::one() };
        let v = q[k] * (w * dl / T::PI());
        buf[k] = v;
    }
    FftPlanner::<T>::new().plan_fft_forward(len).process(&mut buf);
    let dw = T::lit(2.0) * T::PI() / (T::from_count(len) * dl);
    let half = len / 2;
    let mut xi = Vec::with_capacity(len);
    let mut vals = Vec::with_capacity(len);
    for j in 0..len {
        let m = j as i64 - half as i64;
        let idx = (j + half) % len;
        let omega = T::lit(m as f64) * dw;
        xi.push(omega * T::lit(0.5));
        vals.push(buf[idx] * cis(-lambda[0] * omega));
    }
    Ok((xi, vals))
}

/// Splits a two-sided transform into the `ξ ≥ 0` part (plus the analytic tail) and
/// the largest modulus on `ξ < 0`.
fn split_half_lines<T: Real>(xi: &[T], vals: &[C<T>], analytic: impl Fn(T) -> T) -> (Vec<C<T>>, T) {
    let mut pos = Vec::new();
    let mut neg = T::zero();
    for (&x, &v) in xi.iter().zip(vals) {
        if x >= T::zero() {
            pos.push(v + cre(analytic(x)));
        } else {
            neg = neg.max(v.norm());
        }
    }
    (pos, neg)
}

/// `C̃_±(·, x)` directly from the transform of `n_±`, with the `a/(λ+i)` tail removed (`a = 1 - m_±(0,x)`).
pub fn c_tilde_fourier<T: Real>(
    jost: &JostField<T>,
    x_index: usize,
    side: Side,
    pad: usize,
) -> Result<(Vec<T>, Vec<C<T>>)> {
    let n = jost.compute_n(side)?;
    let k0 = jost.zero_index().expect("checked by compute_n");
    let m0 = match side {
        Side::Plus => jost.columns[k0].m_plus[x_index],
        Side::Minus => jost.columns[k0].m_minus[x_index],
    };
    let a = cre(T::one()) - m0;
    let samples: Vec<C<T>> = jost
        .lambda
        .iter()
        .zip(&n)
        .map(|(&l, col)| col[x_index] - a / cx(l, T::one()))
        .collect();
    let (xi, vals) = lambda_transform(&jost.lambda, &samples, pad)?;
    let two_i = cx(T::zero(), -T::lit(2.0));
    let mut out_xi = Vec::new();
    let mut out = Vec::new();
    for (x, v) in xi.into_iter().zip(vals) {
        if x >= T::zero() {
            let analytic = two_i * a * (-T::lit(2.0) * x).exp();
            out_xi.push(x);
            out.push(v + analytic);
        }
    }
    Ok((out_xi, out))
}

/// Power-law growth of `||K(·,x)||_1` on the unfavourable half-line.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthTable {
    pub side: Side,
    pub kind: KernelKind,
    pub x: Vec<f64>,
    pub l1: Vec<f64>,
    /// Least-squares slope of `ln ||K||_1` against `ln <x>` over the fit window.
    pub exponent: f64,
    pub exponent_stderr: f64,
    /// True when every norm vanishes (zero potential).
    pub degenerate: bool,
}

/// Fits the growth exponent over `|x| ∈ [x_lo, x_hi]` on `x < 0` for the plus side and `x > 0` for the minus side.
pub fn growth_table<T: Real>(
    field: &KernelField<T>,
    side: Side,
    kind: KernelKind,
    x_lo: f64,
    x_hi: f64,
) -> Result<GrowthTable> {
    let norms = field.l1_by_x(side, kind);
    let xs: Vec<f64> = field.x.iter().map(|x| x.as_f64()).collect();
    let l1: Vec<f64> = norms.iter().map(|v| v.as_f64()).collect();
    let degenerate = l1.iter().all(|v| *v == 0.0);
    let window: Vec<(f64, f64)> = xs
        .iter()
        .zip(&l1)
        .filter(|(x, _)| {
            let unfavourable = if side == Side::Plus { **x < 0.0 } else { **x > 0.0 };
            unfavourable && x.abs() >= x_lo && x.abs() <= x_hi
        })
        .map(|(x, v)| (*x, *v))
        .collect();
    if degenerate {
        return Ok(GrowthTable { side, kind, x: xs, l1, exponent: 0.0, exponent_stderr: 0.0, degenerate });
    }
    if window.len() < 4 {
        return Err(ScatterError::Fit(format!("{} points in the growth window; need at least 4", window.len())));
    }
    if window.iter().any(|(_, v)| *v <= 0.0) {
        return Err(ScatterError::Fit("zero kernel norm inside the fit window".into()));
    }
    let pts: Vec<(f64, f64)> = window.iter().map(|(x, v)| ((1.0 + x * x).sqrt().ln(), v.ln())).collect();
    let fit = crate::fit::line_fit(&pts)?;
    Ok(GrowthTable { side, kind, x: xs, l1, exponent: fit.slope, exponent_stderr: fit.slope_stderr, degenerate })
}

/// Operand of the Wiener-algebra estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum QuotientMode {
    /// `χ(λ)/W(λ)`, nonresonant case.
    InverseW,
    /// `χ(λ) λ / W(λ)`, resonant case.
    LambdaOverW,
}

/// Result of a Wiener-norm evaluation.
#[derive(Debug, Clone, Serialize)]
pub struct WienerReport {
    pub mode: QuotientMode,
    /// `||ĝ||_{L¹}` with `ĝ(ω) = ∫ e^{-iλω} g(λ) dλ`.
    pub norm: f64,
    /// Largest `|ĝ|` in the outer tenth of the frequency window relative to the peak.
    pub tail_ratio: f64,
}

/// `||F[χ/W]||_{L¹}` or `||F[χλ/W]||_{L¹}` with `χ` the low-energy cutoff.
pub fn wiener_quotient_norm<T: Real>(
    sd: &ScatteringData<T>,
    cutoff: &CutoffSpec<T>,
    mode: QuotientMode,
    pad: usize,
) -> Result<WienerReport> {
    let resonant = sd.resonance.as_ref().map(|r| r.resonant).ok_or_else(|| {
        ScatterError::precondition("resonance classification requires lambda = 0 in the grid")
    })?;
    match (mode, resonant) {
        (QuotientMode::InverseW, true) => {
            return Err(ScatterError::precondition("1/W is singular at a zero-energy resonance"))
        }
        (QuotientMode::LambdaOverW, false) => {
            return Err(ScatterError::precondition("lambda/W mode applies only in the resonant case"))
        }
        _ => {}
    }
    let lam = &sd.lambda;
    let n = lam.len();
    let lmax = lam[n - 1];
    if cutoff.low_edge() > lmax {
        return Err(ScatterError::Range("cutoff support exceeds the lambda grid".into()));
    }
    let k0 = lam.iter().position(|l| l.abs() <= lmax * T::lit(1e-9));
    let mut q: Vec<C<T>> = lam
        .iter()
        .zip(&sd.wronskian)
        .enumerate()
        .map(|(k, (&l, &w))| {
            let chi = cutoff.phi_low(l);
            if Some(k) == k0 && mode == QuotientMode::LambdaOverW {
                return cre(T::zero());
            }
            match mode {
                QuotientMode::InverseW => cre(chi) / w,
                QuotientMode::LambdaOverW => cre(chi * l) / w,
            }
        })
        .collect();
    if let (Some(k), QuotientMode::LambdaOverW) = (k0, mode) {
        if k < 2 || k + 2 >= n {
            return Err(ScatterError::Range("lambda = 0 too close to the grid edge".into()));
        }
        q[k] = ((q[k + 1] + q[k - 1]) * T::lit(4.0) - (q[k + 2] + q[k - 2])) / T::lit(6.0);
    }
    let dl = lam[1] - lam[0];
    let len = (n * pad.max(1)).next_power_of_two();
    let mut buf = vec![cre(T::zero()); len];
    for k in 0..n {
        buf[k] = q[k] * dl;
    }
    FftPlanner::<T>::new().plan_fft_forward(len).process(&mut buf);
    let dw = T::lit(2.0) * T::PI() / (T::from_count(len) * dl);
    let mags: Vec<f64> = buf.iter().map(|z| z.norm().as_f64()).collect();
    let norm = mags.iter().sum::<f64>() * dw.as_f64();
    let peak = mags.iter().cloned().fold(0.0, f64::max);
    let tenth = len / 20;
    let tail = mags[len / 2 - tenth..len / 2 + tenth].iter().cloned().fold(0.0, f64::max);
    Ok(WienerReport { mode, norm, tail_ratio: if peak > 0.0 { tail / peak } else { 0.0 } })
}

/// Output of the discrete Hilbert transform.
#[derive(Debug, Clone)]
pub struct HilbertOutput<T> {
    pub signal: ComplexSignal<T>,
    /// `max(|g(x_min)|, |g(x_max)|) / ||g||_∞`.
    pub boundary_ratio: T,
    /// Set when the input does not decay at the grid edges.
    pub truncation_warning: bool,
}

/// Hilbert transform (multiplier `-i sgn ω`, so `cos ↦ sin`) with a Tukey taper over
/// the outer 5% of the grid and fourfold zero padding.
pub fn hilbert_transform<T: Real>(g: &ComplexSignal<T>, tail_tol: T) -> HilbertOutput<T> {
    let n = g.grid.n;
    let taper = (n / 20).max(1);
    let sup = g.sup_norm();
    let edge = g.values[0].norm().max(g.values[n - 1].norm());
    let boundary_ratio = if sup > T::zero() { edge / sup } else { T::zero() };
    let vals: Vec<C<T>> = g
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let d = i.min(n - 1 - i);
            if d >= taper {
                *v
            } else {
                let t = T::from_count(d) / T::from_count(taper);
                *v * (T::lit(0.5) * (T::one() - (T::PI() * t).cos()))
            }
        })
        .collect();
    let out = crate::fourier::fft_multiplier(&vals, g.grid.h(), 4, |k| {
        if k > T::zero() {
            cx(T::zero(), -T::one())
        } else if k < T::zero() {
            cx(T::zero(), T::one())
        } else {
            cre(T::zero())
        }
    });
    HilbertOutput {
        signal: ComplexSignal { grid: g.grid, values: out },
        boundary_ratio,
        truncation_warning: boundary_ratio > tail_tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jost::{lambda_grid, JostOptions};
    use crate::oracles::PoschlTeller;

    #[test]
    fn marchenko_matches_poschl_teller() {
        let v = SampledPotential::poschl_teller(Grid::new(-20.0, 20.0, 2049).unwrap(), 1.0);
        let xs = [-5.0, -1.0, 0.0, 2.0];
        let f = KernelField::marchenko(&v, &xs).unwrap();
        let o = PoschlTeller;
        for (s, &x) in f.x.iter().enumerate() {
            let mut err: f64 = 0.0;
            for (k, &xi) in f.xi.iter().enumerate().take(800) {
                err = err.max((f.b_plus[s][k].re - o.b_plus(xi, x)).abs());
                // reflection symmetry of the even potential
                err = err.max((f.b_minus[s][k].re - o.b_plus(xi, -x)).abs());
            }
            assert!(err < 1e-3, "x = {x}: {err}");
            let l1 = f.l1_by_x(Side::Plus, KernelKind::B)[s];
            assert!((l1 - o.b_plus_l1(x)).abs() < 3e-3);
        }
    }

    #[test]
    fn zero_potential_gives_zero_kernels() {
        let v = SampledPotential::<f64>::zero(Grid::new(-5.0, 5.0, 101).unwrap());
        let f = KernelField::marchenko(&v, &[-1.0, 1.0]).unwrap();
        assert!(f.b_plus.iter().flatten().all(|z| z.norm() == 0.0));
        let g = growth_table(&f, Side::Plus, KernelKind::B, 5.0, 30.0).unwrap();
        assert!(g.degenerate);
    }

    #[test]
    fn c_tilde_norm_bounded_by_c_norm() {
        let v = SampledPotential::square_well(Grid::new(-20.0, 20.0, 2001).unwrap(), 0.3, 1.0).unwrap();
        let f = KernelField::marchenko(&v, &[-8.0, -3.0, 0.0, 4.0]).unwrap();
        let ct = f.l1_by_x(Side::Plus, KernelKind::CTilde);
        let c = f.l1_by_x(Side::Plus, KernelKind::C);
        // equality holds for single-signed B; allow the quadrature mismatch at the kinks of B
        for (a, b) in ct.iter().zip(&c) {
            assert!(*a <= *b * (1.0 + 1e-3), "{a} > {b}");
        }
    }

    #[test]
    fn fourier_route_matches_closed_form() {
        let v = SampledPotential::poschl_teller(Grid::new(-20.0, 20.0, 2049).unwrap(), 1.0);
        let lam = lambda_grid(8.0, 513).unwrap();
        let jost = JostField::solve(&v, &lam, &JostOptions::default()).unwrap();
        let f = KernelField::fourier(&jost, &v, &[-2.0, 1.0], 4).unwrap();
        let o = PoschlTeller;
        for (s, &x) in f.x.iter().enumerate() {
            for (k, &xi) in f.xi.iter().enumerate().take(400) {
                assert!((f.b_plus[s][k].re - o.b_plus(xi, x)).abs() < 1e-4);
            }
        }
        assert!(f.support_leakage < 1e-4);
        let (xi, ct) = c_tilde_fourier(&jost, v.grid.nearest(-2.0), Side::Plus, 4).unwrap();
        let xg = v.grid.x(v.grid.nearest(-2.0));
        for (q, c) in xi.iter().zip(&ct).take(300).skip(1) {
            // C̃(ξ) = 2i ∫_ξ^∞ B = -2i (1 - tanh x) e^{-2ξ}
            let exact = -2.0 * (1.0 - xg.tanh()) * (-2.0 * q).exp();
            assert!((c.im - exact).abs() < 1e-3 && c.re.abs() < 1e-3, "{q}: {c} vs {exact}");
        }
    }

    #[test]
    fn hilbert_of_cosine_packet_is_sine_packet() {
        let g = Grid::new(-40.0, 40.0, 4096).unwrap();
        let s = ComplexSignal::from_real(g, |x: f64| (3.0 * x).cos() * (-x * x / 8.0).exp());
        let out = hilbert_transform(&s, 1e-6);
        for i in (500..3500).step_by(37) {
            let x = g.x(i);
            let exact: f64 = (3.0 * x).sin() * (-x * x / 8.0).exp();
            assert!((out.signal.values[i].re - exact).abs() < 1e-6);
        }
        assert!(!out.truncation_warning);
        let twice = hilbert_transform(&out.signal, 1e-6);
        for i in (500..3500).step_by(37) {
            assert!((twice.signal.values[i] + s.values[i]).norm() < 1e-6);
        }
    }

    #[test]
    fn zeroth_iterate_is_signed_tail() {
        let v = SampledPotential::poschl_teller(Grid::new(-10.0, 10.0, 2001).unwrap(), 1.0);
        let z = marchenko_zeroth(&v, -2.0).unwrap();
        for (k, val) in z.iter().enumerate() {
            let s: f64 = -2.0 + 0.01 * k as f64;
            let exact = -2.0 * (1.0 - s.tanh()) + 2.0 * (1.0 - 10f64.tanh());
            assert!((*val - exact).abs() < 5e-5, "{s}: {val} vs {exact}");
        }
        let b = marchenko_solve(&SampledPotential::<f64>::zero(v.grid), 0.5).unwrap();
        assert!(b.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn marchenko_and_fourier_agree_at_origin() {
        let v = SampledPotential::poschl_teller(Grid::new(-20.0, 20.0, 4097).unwrap(), 1.0);
        let b = marchenko_solve(&v, 0.0).unwrap();
        let lam = lambda_grid(8.0, 1025).unwrap();
        let jost = JostField::solve(&v, &lam, &JostOptions::default()).unwrap();
        let f = KernelField::fourier(&jost, &v, &[0.0], 4).unwrap();
        let at_one: f64 = f.interpolate_b(Side::Plus, 0, &[1.0])[0].re;
        let h = v.h();
        let m = lagrange4_complex(&b.iter().map(|x| cre(*x)).collect::<Vec<_>>(), 0.0, h, 1.0).unwrap().re;
        assert!((at_one - m).abs() < 1e-4, "{at_one} vs {m}");
    }

    #[test]
    fn c_tilde_is_scaling_average_of_c() {
        let g = Grid::new(-20.0, 20.0, 4001).unwrap();
        let v = SampledPotential::from_fn(g, |x: f64| -0.8 * (-x * x).exp()).unwrap();
        let f = KernelField::marchenko(&v, &[-3.0]).unwrap();
        let c = f.kernel(Side::Plus, KernelKind::C, 0);
        let ct = f.kernel(Side::Plus, KernelKind::CTilde, 0);
        let (nodes, weights) = quad::gauss_legendre(64);
        for &q in &[0.3, 1.0, 2.5] {
            // C̃(ξ) = ∫_0^1 C(ξ/s) ds/s, substituted s = e^{-u} on u ∈ [0, ln(ξmax/ξ)]
            let umax = (35.0f64 / q).ln();
            let mut avg = cre(0.0);
            for (t, w) in nodes.iter().zip(&weights) {
                let u = 0.5 * umax * (t + 1.0);
                let val = lagrange4_complex(&c, 0.0, f.xi[1], q * u.exp()).unwrap_or(cre(0.0));
                avg += val * (0.5 * umax * w);
            }
            let k = (q / f.xi[1]).round() as usize;
            assert!((avg - ct[k]).norm() < 1e-4 * (1.0 + ct[k].norm()), "{q}: {avg} vs {}", ct[k]);
        }
    }

    #[test]
    fn parseval_between_m_and_b() {
        let g = Grid::new(-20.0, 20.0, 4001).unwrap();
        let v = SampledPotential::poschl_teller(g, 1.0);
        let f = KernelField::marchenko(&v, &[0.0]).unwrap();
        let b2: f64 = quad::trapezoid(&f.b_plus[0].iter().map(|z| z.norm_sqr()).collect::<Vec<_>>(), f.xi[1]);
        // ||m - 1||² = π (1 - tanh x)² for the closed form, so ||B||₂ = ||m - 1||₂ / √π
        let m2 = std::f64::consts::PI;
        assert!((b2.sqrt() - (m2 / std::f64::consts::PI).sqrt()).abs() < 1e-3);
    }

    #[test]
    fn wiener_norm_of_free_quotient() {
        let g = Grid::new(-10.0, 10.0, 201).unwrap();
        let v = SampledPotential::<f64>::zero(g);
        let lam = lambda_grid(8.0, 1601).unwrap();
        let jost = JostField::solve(&v, &lam, &JostOptions::default()).unwrap();
        let sd = ScatteringData::from_field(&jost, &v, &JostOptions::default()).unwrap();
        let cut = CutoffSpec { lambda0: 1.0, width: 1.0 };
        let r = wiener_quotient_norm(&sd, &cut, QuotientMode::LambdaOverW, 4).unwrap();
        // ||χ̂||₁ by direct quadrature of the cutoff transform
        let chi: Vec<C<f64>> = lam.iter().map(|&l| cre(cut.phi_low(l))).collect();
        let grid_w: Vec<f64> = (0..4000).map(|k| -100.0 + 0.05 * k as f64).collect();
        let dl = lam[1] - lam[0];
        let l1: f64 = grid_w
            .iter()
            .map(|&w| chi.iter().zip(&lam).map(|(c, &l)| *c * cis(-l * w)).sum::<C<f64>>().norm() * dl)
            .sum::<f64>()
            * 0.05;
        assert!((r.norm - l1 / 2.0).abs() < 1e-3 * l1, "{} vs {}", r.norm, l1 / 2.0);
        assert!(wiener_quotient_norm(&sd, &cut, QuotientMode::InverseW, 4).is_err());
    }

    #[test]
    fn wiener_norm_stable_under_refinement() {
        let v = SampledPotential::square_well(Grid::new(-10.0, 10.0, 801).unwrap(), 1.0, 1.0).unwrap();
        let cut = CutoffSpec::for_potential(&v);
        let mut norms = Vec::new();
        for pts in [801, 1601] {
            let lam = lambda_grid(8.0, pts).unwrap();
            let jost = JostField::solve(&v, &lam, &JostOptions::default()).unwrap();
            let sd = ScatteringData::from_field(&jost, &v, &JostOptions::default()).unwrap();
            assert!(!sd.resonant());
            norms.push(wiener_quotient_norm(&sd, &cut, QuotientMode::InverseW, 4).unwrap().norm);
        }
        assert!(((norms[1] - norms[0]) / norms[1]).abs() < 0.05, "{norms:?}");
    }

    #[test]
    fn hilbert_parity_and_wide_packet() {
        let g = Grid::new(-60.0, 60.0, 4096).unwrap();
        let gauss = ComplexSignal::from_real(g, |x: f64| (-x * x).exp());
        let hg = hilbert_transform(&gauss, 1e-6).signal;
        for i in 0..g.n {
            assert!((hg.values[i] + hg.values[g.n - 1 - i]).norm() < 1e-10);
        }
        let s = ComplexSignal::from_real(g, |x: f64| x.cos() * (-x * x / 100.0).exp());
        let out = hilbert_transform(&s, 1e-6);
        for i in (1000..3000).step_by(11) {
            let x = g.x(i);
            assert!((out.signal.values[i].re - x.sin() * (-x * x / 100.0).exp()).abs() < 1e-3);
        }
        let flat = ComplexSignal::from_real(g, |_| 1.0);
        assert!(hilbert_transform(&flat, 1e-6).truncation_warning);
    }
}
