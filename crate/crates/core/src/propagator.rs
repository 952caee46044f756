//! Spectral calculus of `H = -d²/dx² + V`: Schrödinger and Klein–Gordon evolution, `P_ac`,
//! Besov norms and dispersive-decay fits.
//!
//! The continuous part uses the outgoing eigenfunctions `φ(λ) = T(|λ|) f_{sgn λ}(|λ|, ·)` with
//! `F(H)P_ac f = (1/2π) ∫ F(λ²) <φ(λ), f> φ(λ) dλ`, sampled by the midpoint rule on each half-line.
//! Eigenfunctions are evaluated on arbitrary output grids: inside the potential grid `m_±` is
//! interpolated, outside it is continued by the free solution matching `m_±` and `∂m_±` at the edge.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, ScatterError};
use crate::fit::line_fit;
use crate::fourier::{dft_one, fft_multiplier};
use crate::grid::Grid;
use crate::interp::lagrange4_complex;
use crate::jost::{bound_states, BoundState, JostColumn, JostOptions};
use crate::potential::SampledPotential;
use crate::resolvent::{smooth_step, transmission};
use crate::scalar::{cis, cre, cx, sup_norm, Real, C};
use crate::signal::ComplexSignal;

/// Bound states and the potential they belong to.
#[derive(Debug, Clone)]
pub struct SpectralData<T> {
    pub potential: SampledPotential<T>,
    pub bound_states: Vec<BoundState<T>>,
    pub jost: JostOptions<T>,
}

impl<T: Real> SpectralData<T> {
    pub fn new(v: &SampledPotential<T>, jost: &JostOptions<T>) -> Result<Self> {
        let bound = bound_states(v, jost)?;
        if let Some(b) = bound.iter().find(|b| !(b.energy < T::zero())) {
            return Err(ScatterError::Spectral(format!("eigenvalue {} is not negative", b.energy)));
        }
        Ok(Self { potential: v.clone(), bound_states: bound, jost: *jost })
    }

    pub fn energies(&self) -> Vec<T> {
        self.bound_states.iter().map(|b| b.energy).collect()
    }

    pub fn grid(&self) -> Grid<T> {
        self.potential.grid
    }

    /// Bound state `j` sampled on `grid` (zero outside the potential grid).
    pub fn bound_state_on(&self, j: usize, grid: &Grid<T>) -> Vec<C<T>> {
        let own = self.grid();
        let psi: Vec<C<T>> = self.bound_states[j].psi.iter().map(|&p| cre(p)).collect();
        if *grid == own {
            return psi;
        }
        (0..grid.n)
            .map(|i| lagrange4_complex(&psi, own.x_min, own.h(), grid.x(i)).unwrap_or(cre(T::zero())))
            .collect()
    }

    /// `<ψ_j, f>` for every bound state.
    pub fn bound_coefficients(&self, f: &ComplexSignal<T>) -> Vec<C<T>> {
        (0..self.bound_states.len())
            .map(|j| crate::signal::inner(&self.bound_state_on(j, &f.grid), &f.values, &f.grid))
            .collect()
    }

    /// `f` minus its bound-state components.
    pub fn project_ac(&self, f: &ComplexSignal<T>) -> ComplexSignal<T> {
        let mut out = f.clone();
        for (j, c) in self.bound_coefficients(f).into_iter().enumerate() {
            let psi = self.bound_state_on(j, &f.grid);
            out.values.iter_mut().zip(&psi).for_each(|(o, p)| *o -= *p * c);
        }
        out
    }
}

/// `(e^{iθ} - 1)/(iθ)` times `d`, with `θ = 2kd`, stable as `k → 0`.
fn free_continuation<T: Real>(k: T, d: T) -> C<T> {
    let theta = T::lit(2.0) * k * d;
    if theta.abs() < T::lit(1e-4) {
        cx(d, d * theta * T::lit(0.5))
    } else {
        (cis(theta) - cre(T::one())) / cx(T::zero(), T::lit(2.0) * k)
    }
}

/// Jost solutions at one `k > 0`, evaluable anywhere on the line.
struct JostEvaluator<'a, T> {
    grid: Grid<T>,
    k: T,
    col: JostColumn<T>,
    transmission: C<T>,
    _v: &'a SampledPotential<T>,
}

impl<'a, T: Real> JostEvaluator<'a, T> {
    fn new(v: &'a SampledPotential<T>, k: T, opts: &JostOptions<T>) -> Result<Self> {
        let col = JostColumn::solve(v, cre(k), opts)?;
        let w = col.wronskian(&v.grid);
        if w.norm() < T::lit(1e-14) {
            return Err(ScatterError::NearSingular { lambda: k.as_f64(), modulus: w.norm().as_f64() });
        }
        Ok(Self { grid: v.grid, k, transmission: transmission(k, w), col, _v: v })
    }

    fn m_plus(&self, x: T) -> C<T> {
        let g = &self.grid;
        if x >= g.x_max {
            return self.col.m_plus[g.n - 1];
        }
        if x < g.x_min {
            let d = x - g.x_min;
            // m_+ = a + b e^{-2ikx} on the left of the grid
            let fc = free_continuation(-self.k, d);
            return self.col.m_plus[0] + self.col.dm_plus[0] * fc;
        }
        lagrange4_complex(&self.col.m_plus, g.x_min, g.h(), x).expect("inside the grid")
    }

    fn m_minus(&self, x: T) -> C<T> {
        let g = &self.grid;
        if x <= g.x_min {
            return self.col.m_minus[0];
        }
        if x > g.x_max {
            let d = x - g.x_max;
            let fc = free_continuation(self.k, d);
            return self.col.m_minus[g.n - 1] + self.col.dm_minus[g.n - 1] * fc;
        }
        lagrange4_complex(&self.col.m_minus, g.x_min, g.h(), x).expect("inside the grid")
    }

    /// `(φ(k, ·), φ(-k, ·))` on `out`.
    fn pair_on(&self, out: &Grid<T>) -> (Vec<C<T>>, Vec<C<T>>) {
        let same = *out == self.grid;
        let mut plus = Vec::with_capacity(out.n);
        let mut minus = Vec::with_capacity(out.n);
        for i in 0..out.n {
            let x = out.x(i);
            let (mp, mm) = if same { (self.col.m_plus[i], self.col.m_minus[i]) } else { (self.m_plus(x), self.m_minus(x)) };
            let e = cis(self.k * x);
            plus.push(e * mp * self.transmission);
            minus.push(e.conj() * mm * self.transmission);
        }
        (plus, minus)
    }
}

/// Midpoint nodes `λ_k = (k + ½)Δλ` on `(0, Λ]`.
pub fn midpoint_nodes<T: Real>(lambda_max: T, dlambda: T) -> Vec<T> {
    let n = (lambda_max / dlambda).ceil().to_usize().unwrap_or(1).max(1);
    (0..n).map(|k| (T::from_count(k) + T::lit(0.5)) * dlambda).collect()
}

/// Frequency resolution of the continuous expansion.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SpectralPlan<T> {
    pub lambda_max: T,
    pub dlambda: T,
}

impl<T: Real> SpectralPlan<T> {
    /// `Δλ = 0.8π / X` with `X` the largest distance reached by any input or output feature,
    /// so that the periodic images of the midpoint rule stay outside every window.
    pub fn for_extent(lambda_max: T, extent: T) -> Self {
        Self { lambda_max, dlambda: T::lit(0.8) * T::PI() / extent.max(T::one()) }
    }
}

fn spectrum_samples<T: Real>(f: &ComplexSignal<T>) -> (Vec<T>, Vec<T>) {
    let nyq = T::PI() / f.grid.h();
    let samples = 400;
    let lam: Vec<T> = (0..=samples).map(|k| nyq * T::from_count(k) / T::from_count(samples)).collect();
    let mags = lam
        .par_iter()
        .map(|&l| dft_one(&f.grid, &f.values, l).norm().max(dft_one(&f.grid, &f.values, -l).norm()))
        .collect();
    (lam, mags)
}

fn band_above<T: Real>(lam: &[T], mags: &[T], threshold: T) -> T {
    let last = mags.iter().rposition(|m| *m > threshold).unwrap_or(0);
    lam[(last + 1).min(lam.len() - 1)]
}

/// `|λ|` beyond which `|f̂|` stays below `rel_tol · max|f̂|` (sampled up to the grid Nyquist frequency).
pub fn effective_band<T: Real>(f: &ComplexSignal<T>, rel_tol: T) -> T {
    let (lam, mags) = spectrum_samples(f);
    let peak = mags.iter().cloned().fold(T::zero(), T::max);
    band_above(&lam, &mags, rel_tol * peak)
}

impl<T: Real> SpectralData<T> {
    /// `|λ|` beyond which the distorted coefficients of `f` stay below `rel_tol · max|f̂|`.
    /// Past the free band, `<φ(λ), f> - f̂(λ)` behaves like the transform of `η f / (2λ)`
    /// with `η` the integral of `|V|` over either half-line.
    pub fn band(&self, f: &ComplexSignal<T>, rel_tol: T) -> T {
        let (lam, mags) = spectrum_samples(f);
        let peak = mags.iter().cloned().fold(T::zero(), T::max);
        let mut band = band_above(&lam, &mags, rel_tol * peak);
        let v = &self.potential;
        if v.is_zero() {
            return band;
        }
        let eta = v.eta();
        let l1 = v.l1_norm();
        for right in [true, false] {
            let q = ComplexSignal::from_fn(f.grid, |x| {
                let tail = v.eta_at(&eta, x);
                let w = if right { tail } else { l1 - tail };
                cre(w) * f.values[f.grid.nearest(x)]
            });
            let (_, qm) = spectrum_samples(&q);
            let scaled: Vec<T> = qm.iter().zip(&lam).map(|(m, l)| *m / (T::lit(2.0) * l.max(T::one()))).collect();
            band = band.max(band_above(&lam, &scaled, rel_tol * peak));
        }
        band
    }
}

/// Radius of the smallest centred interval carrying all of `|f| > rel_tol · max|f|`.
pub fn support_radius<T: Real>(f: &ComplexSignal<T>, rel_tol: T) -> T {
    let peak = f.sup_norm();
    (0..f.grid.n)
        .filter(|&i| f.values[i].norm() > rel_tol * peak)
        .map(|i| f.grid.x(i).abs())
        .fold(T::zero(), T::max)
}

/// `Σ_j b_j(E_j) <ψ_j, f> ψ_j + (1/2π) ∫ m_j(λ) <φ(λ), f> φ(λ) dλ` on each output grid `j`.
/// `multiplier(j, λ)` and `bound(j, E)` select the function of `H` per output.
pub fn spectral_synthesis<T: Real>(
    spec: &SpectralData<T>,
    f: &ComplexSignal<T>,
    outputs: &[Grid<T>],
    plan: &SpectralPlan<T>,
    multiplier: impl Fn(usize, T) -> C<T> + Sync,
    bound: Option<&dyn Fn(usize, T) -> C<T>>,
) -> Result<Vec<ComplexSignal<T>>> {
    let v = &spec.potential;
    let nodes = midpoint_nodes(plan.lambda_max, plan.dlambda);
    let weight = plan.dlambda / (T::lit(2.0) * T::PI());
    // all outputs are evaluated as windows of the widest one when they share its spacing
    let widest = outputs
        .iter()
        .copied()
        .max_by(|a, b| (a.x_max - a.x_min).partial_cmp(&(b.x_max - b.x_min)).expect("finite"))
        .ok_or_else(|| ScatterError::input("no output grids"))?;
    let windows: Vec<Option<usize>> = outputs.iter().map(|g| window_offset(&widest, g)).collect();
    let chunk = 64;
    let partials: Vec<Vec<Vec<C<T>>>> = nodes
        .par_chunks(chunk)
        .map(|ks| {
            let mut acc: Vec<Vec<C<T>>> = outputs.iter().map(|g| vec![cre(T::zero()); g.n]).collect();
            for &k in ks {
                let ev = JostEvaluator::new(v, k, &spec.jost)?;
                let (fp, fm) = ev.pair_on(&f.grid);
                let cp = crate::signal::inner(&fp, &f.values, &f.grid) * weight;
                let cm = crate::signal::inner(&fm, &f.values, &f.grid) * weight;
                let wide = ev.pair_on(&widest);
                for (j, g) in outputs.iter().enumerate() {
                    let ap = cp * multiplier(j, k);
                    let am = cm * multiplier(j, -k);
                    match windows[j] {
                        Some(off) => {
                            let (p, m) = (&wide.0[off..off + g.n], &wide.1[off..off + g.n]);
                            for i in 0..g.n {
                                acc[j][i] += p[i] * ap + m[i] * am;
                            }
                        }
                        None => {
                            let (p, m) = ev.pair_on(g);
                            for i in 0..g.n {
                                acc[j][i] += p[i] * ap + m[i] * am;
                            }
                        }
                    }
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut out: Vec<Vec<C<T>>> = outputs.iter().map(|g| vec![cre(T::zero()); g.n]).collect();
    for p in partials {
        for (o, q) in out.iter_mut().zip(p) {
            o.iter_mut().zip(q).for_each(|(a, b)| *a += b);
        }
    }
    if let Some(bf) = bound {
        let coef = spec.bound_coefficients(f);
        for (j, g) in outputs.iter().enumerate() {
            for (b, (c, st)) in coef.iter().zip(&spec.bound_states).enumerate() {
                let psi = spec.bound_state_on(b, g);
                let a = *c * bf(j, st.energy);
                out[j].iter_mut().zip(&psi).for_each(|(o, p)| *o += *p * a);
            }
        }
    }
    Ok(out.into_iter().zip(outputs).map(|(values, g)| ComplexSignal { grid: *g, values }).collect())
}

/// Offset of `inner` inside `outer` when its points are a contiguous run of `outer`'s points.
fn window_offset<T: Real>(outer: &Grid<T>, inner: &Grid<T>) -> Option<usize> {
    let h = outer.h();
    if inner.n > outer.n || (inner.h() - h).abs() > T::lit(1e-12) * h {
        return None;
    }
    let s = (inner.x_min - outer.x_min) / h;
    let off = s.round();
    if (s - off).abs() > T::lit(1e-9) || off < T::zero() {
        return None;
    }
    let off = off.to_usize()?;
    (off + inner.n <= outer.n).then_some(off)
}

/// Time-stepping method.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Method<T> {
    DistortedFourier,
    /// Crank–Nicolson with the given time step.
    CrankNicolson { dt: T },
}

/// Plan covering `f` evolved up to `|t| = t_max` and observed on `out`.
pub fn plan_for<T: Real>(f: &ComplexSignal<T>, out: &Grid<T>, t_max: T) -> SpectralPlan<T> {
    plan_with_band(f, out, t_max, effective_band(f, T::lit(1e-9)))
}

/// [`plan_for`] with the band widened to the distorted spectrum of `f`.
pub fn plan_for_spectrum<T: Real>(spec: &SpectralData<T>, f: &ComplexSignal<T>, out: &Grid<T>, t_max: T) -> SpectralPlan<T> {
    plan_with_band(f, out, t_max, spec.band(f, T::lit(1e-9)))
}

fn plan_with_band<T: Real>(f: &ComplexSignal<T>, out: &Grid<T>, t_max: T, band: T) -> SpectralPlan<T> {
    let reach = support_radius(f, T::lit(1e-12))
        + out.x_max.abs().max(out.x_min.abs())
        + T::lit(2.0) * band * t_max.abs()
        + T::lit(10.0);
    SpectralPlan::for_extent(band, reach)
}

/// `e^{-itH} f` on the grid of `f`.
pub fn evolve_schrodinger<T: Real>(spec: &SpectralData<T>, f: &ComplexSignal<T>, t: T, method: Method<T>) -> Result<ComplexSignal<T>> {
    match method {
        Method::DistortedFourier => {
            let plan = plan_for_spectrum(spec, f, &f.grid, t);
            let b = |_: usize, e: T| cis(-t * e);
            let mut out = spectral_synthesis(spec, f, &[f.grid], &plan, |_, l| cis(-t * l * l), Some(&b))?;
            Ok(out.remove(0))
        }
        Method::CrankNicolson { dt } => crank_nicolson(&spec.potential, f, t, dt),
    }
}

/// `e^{-itH} P_ac f` at several times, each on its own output grid.
pub fn evolve_ac_many<T: Real>(
    spec: &SpectralData<T>,
    f: &ComplexSignal<T>,
    times: &[T],
    outputs: &[Grid<T>],
    plan: &SpectralPlan<T>,
) -> Result<Vec<ComplexSignal<T>>> {
    spectral_synthesis(spec, f, outputs, plan, |j, l| cis(-times[j] * l * l), None)
}

/// Klein–Gordon solution `u(t) = sin(t√(H+1))/√(H+1) g`, i.e. `u(0) = 0`, `u_t(0) = g`.
pub fn evolve_klein_gordon<T: Real>(spec: &SpectralData<T>, g: &ComplexSignal<T>, t: T) -> Result<ComplexSignal<T>> {
    check_kg(spec)?;
    let plan = plan_for_spectrum(spec, g, &g.grid, t);
    let b = |_: usize, e: T| kg_multiplier(t, e);
    let mut out = spectral_synthesis(spec, g, &[g.grid], &plan, |_, l| kg_multiplier(t, l * l), Some(&b))?;
    Ok(out.remove(0))
}

fn check_kg<T: Real>(spec: &SpectralData<T>) -> Result<()> {
    if let Some(b) = spec.bound_states.iter().find(|b| b.energy <= -T::one()) {
        return Err(ScatterError::Spectral(format!(
            "bound state energy {} <= -1: H + 1 is not positive",
            b.energy
        )));
    }
    Ok(())
}

fn kg_multiplier<T: Real>(t: T, energy: T) -> C<T> {
    let w = (energy + T::one()).sqrt();
    cre((t * w).sin() / w)
}

/// Crank–Nicolson for `i u_t = H u` with the fourth-order five-point Laplacian and Dirichlet ends.
pub fn crank_nicolson<T: Real>(v: &SampledPotential<T>, f: &ComplexSignal<T>, t: T, dt: T) -> Result<ComplexSignal<T>> {
    if f.grid != v.grid {
        return Err(ScatterError::input("Crank-Nicolson needs the signal on the potential grid"));
    }
    if !(dt > T::zero()) {
        return Err(ScatterError::Step("time step must be positive".into()));
    }
    if t == T::zero() {
        return Ok(f.clone());
    }
    let band = effective_band(f, T::lit(1e-9));
    let stiffness = dt * (band * band + v.max_abs());
    let cap = T::lit(0.5);
    if stiffness > cap {
        return Err(ScatterError::Step(format!(
            "dt (Λ² + max|V|) = {stiffness} exceeds {cap}; use dt <= {}",
            cap / (band * band + v.max_abs())
        )));
    }
    let steps = (t.abs() / dt).ceil().to_usize().unwrap_or(1).max(1);
    let dt = t / T::from_count(steps);
    let n = f.grid.n;
    let h = f.grid.h();
    let c = T::one() / (T::lit(12.0) * h * h);
    // H = -D² + V, D² stencil (-1, 16, -30, 16, -1)/(12h²)
    let off1 = -(T::lit(16.0) * c);
    let off2 = c;
    let diag: Vec<T> = v.values.iter().map(|&p| T::lit(30.0) * c + p).collect();
    let half = cx(T::zero(), dt * T::lit(0.5));
    let lhs = Penta::factor(
        diag.iter().map(|&d| cre(T::one()) + half * d).collect(),
        half * off1,
        half * off2,
    )?;
    let mut u = f.values.clone();
    let mut rhs = vec![cre(T::zero()); n];
    for _ in 0..steps {
        for i in 0..n {
            let mut hu = u[i] * diag[i];
            if i >= 1 {
                hu += u[i - 1] * off1;
            }
            if i + 1 < n {
                hu += u[i + 1] * off1;
            }
            if i >= 2 {
                hu += u[i - 2] * off2;
            }
            if i + 2 < n {
                hu += u[i + 2] * off2;
            }
            rhs[i] = u[i] - half * hu;
        }
        lhs.solve(&mut rhs);
        std::mem::swap(&mut u, &mut rhs);
    }
    Ok(ComplexSignal { grid: f.grid, values: u })
}

/// LU factors of a pentadiagonal matrix with constant off-diagonals, no pivoting.
struct Penta<T> {
    // L has unit diagonal and sub-diagonals l1, l2; U has diagonal d and super-diagonals u1, u2
    l1: Vec<C<T>>,
    l2: Vec<C<T>>,
    d: Vec<C<T>>,
    u1: Vec<C<T>>,
    u2: C<T>,
}

impl<T: Real> Penta<T> {
    fn factor(diag: Vec<C<T>>, a1: C<T>, a2: C<T>) -> Result<Self> {
        let n = diag.len();
        let mut l1 = vec![cre(T::zero()); n];
        let mut l2 = vec![cre(T::zero()); n];
        let mut d = vec![cre(T::zero()); n];
        let mut u1 = vec![cre(T::zero()); n];
        for i in 0..n {
            if i >= 2 {
                l2[i] = a2 / d[i - 2];
            }
            if i >= 1 {
                let mut s = a1;
                if i >= 2 {
                    s -= l2[i] * u1[i - 2];
                }
                l1[i] = s / d[i - 1];
            }
            let mut di = diag[i];
            if i >= 1 {
                di -= l1[i] * u1[i - 1];
            }
            if i >= 2 {
                di -= l2[i] * a2;
            }
            if di.norm() < T::lit(1e-300_f64.max(T::epsilon().as_f64() * 1e-3)) {
                return Err(ScatterError::Step("singular Crank-Nicolson matrix".into()));
            }
            d[i] = di;
            let mut ui = a1;
            if i >= 1 {
                ui -= l1[i] * a2;
            }
            u1[i] = ui;
        }
        Ok(Self { l1, l2, d, u1, u2: a2 })
    }

    fn solve(&self, b: &mut [C<T>]) {
        let n = b.len();
        for i in 0..n {
            let mut s = b[i];
            if i >= 1 {
                s -= self.l1[i] * b[i - 1];
            }
            if i >= 2 {
                s -= self.l2[i] * b[i - 2];
            }
            b[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            if i + 1 < n {
                s -= self.u1[i] * b[i + 1];
            }
            if i + 2 < n {
                s -= self.u2 * b[i + 2];
            }
            b[i] = s / self.d[i];
        }
    }
}

/// Settings of a decay fit.
#[derive(Debug, Clone, Serialize)]
pub struct DecayOptions<T> {
    pub times: Vec<T>,
    /// Spacing of the output windows.
    pub spacing: T,
    /// Norms below this are treated as numerical noise.
    pub noise_floor: T,
    /// Which evolution is measured.
    pub equation: Equation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Equation {
    Schrodinger,
    KleinGordon,
}

impl<T: Real> DecayOptions<T> {
    /// 16 log-spaced times in `[1, 100]`.
    pub fn standard(equation: Equation) -> Self {
        Self { times: log_times(T::one(), T::lit(100.0), 16), spacing: T::lit(0.15), noise_floor: T::lit(1e-12), equation }
    }
}

pub fn log_times<T: Real>(t0: T, t1: T, n: usize) -> Vec<T> {
    let (a, b) = (t0.ln(), t1.ln());
    (0..n).map(|k| (a + (b - a) * T::from_count(k) / T::from_count(n.max(2) - 1)).exp()).collect()
}

/// Result of a decay fit.
#[derive(Debug, Clone, Serialize)]
pub struct DecayFit {
    pub q: f64,
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    pub fitted: Vec<f64>,
    pub alpha_hat: f64,
    /// `1/q - 1/2`.
    pub alpha_theory: f64,
    /// 95% interval from the slope standard error.
    pub ci: (f64, f64),
    pub equation: Equation,
}

/// Fits `||P_ac u(t)||_q ≈ C t^α` over the option's times.
pub fn decay_fit<T: Real>(spec: &SpectralData<T>, f: &ComplexSignal<T>, q: T, opts: &DecayOptions<T>) -> Result<DecayFit> {
    decay_fit_weighted(spec, f, q, opts, None)
}

/// [`decay_fit`] with the norm `(∫ ρ |u|^q)^{1/q}`, where `density(x)` gives `ρ`.
pub fn decay_fit_weighted<T: Real>(
    spec: &SpectralData<T>,
    f: &ComplexSignal<T>,
    q: T,
    opts: &DecayOptions<T>,
    density: Option<&(dyn Fn(T) -> T + Sync)>,
) -> Result<DecayFit> {
    if q < T::lit(2.0) {
        return Err(ScatterError::input("decay fits need q >= 2"));
    }
    let times = &opts.times;
    if times.len() < 4 || times.iter().any(|t| !(*t > T::zero())) {
        return Err(ScatterError::Fit("need at least 4 positive times".into()));
    }
    let (tmin, tmax) = times.iter().fold((T::infinity(), T::zero()), |(a, b), &t| (a.min(t), b.max(t)));
    if (tmax / tmin).log10() < T::lit(1.5) {
        return Err(ScatterError::Fit("times must span at least 1.5 decades".into()));
    }
    if opts.equation == Equation::KleinGordon {
        check_kg(spec)?;
    }
    let band = effective_band(f, T::lit(1e-9));
    let radius = support_radius(f, T::lit(1e-12)) + T::lit(5.0);
    // KG group velocity is below 1; Schrödinger travels at 2λ
    let speed = match opts.equation {
        Equation::Schrodinger => T::lit(2.0) * band,
        Equation::KleinGordon => T::one(),
    };
    let h = opts.spacing;
    let outer_half = ((radius + speed * tmax) / h).ceil();
    let outputs: Vec<Grid<T>> = times
        .iter()
        .map(|&t| {
            let m = ((radius + speed * t) / h).ceil();
            Grid::new(-m * h, m * h, (T::lit(2.0) * m).to_usize().unwrap_or(2) + 1)
        })
        .collect::<Result<_>>()?;
    let reach = radius + outer_half * h + T::lit(2.0) * band * tmax;
    // the omitted distorted tail changes each norm by well under the fit noise
    let plan = SpectralPlan::for_extent(band, reach);
    let states = match opts.equation {
        Equation::Schrodinger => evolve_ac_many(spec, f, times, &outputs, &plan)?,
        Equation::KleinGordon => spectral_synthesis(spec, f, &outputs, &plan, |j, l| kg_multiplier(times[j], l * l), None)?,
    };
    let norms: Vec<f64> = states
        .iter()
        .map(|u| match density {
            None => u.lp_norm(q).as_f64(),
            Some(rho) => {
                let g = &u.grid;
                let s = (0..g.n).fold(T::zero(), |s, i| s + g.weight(i) * rho(g.x(i)) * u.values[i].norm().powf(q));
                s.powf(T::one() / q).as_f64()
            }
        })
        .collect();
    if norms.iter().any(|n| !(*n > opts.noise_floor.as_f64())) {
        return Err(ScatterError::Fit("a norm is below the noise floor".into()));
    }
    let pts: Vec<(f64, f64)> = times.iter().zip(&norms).map(|(t, n)| (t.as_f64().ln(), n.ln())).collect();
    let fit = line_fit(&pts)?;
    let fitted = pts.iter().map(|p| (fit.intercept + fit.slope * p.0).exp()).collect();
    let half = 1.96 * fit.slope_stderr;
    Ok(DecayFit {
        q: q.as_f64(),
        times: times.iter().map(|t| t.as_f64()).collect(),
        norms,
        fitted,
        alpha_hat: fit.slope,
        alpha_theory: 1.0 / q.as_f64() - 0.5,
        ci: (fit.slope - half, fit.slope + half),
        equation: opts.equation,
    })
}

/// Besov indices `B^s_{p,r}`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BesovSpec<T> {
    pub s: T,
    pub p: T,
    /// `r = ∞` takes the supremum over `j`.
    pub r: T,
}

/// `χ(λ)`: one on `|λ| ≤ 1`, zero for `|λ| ≥ 2`.
fn dyadic_base<T: Real>(lambda: T) -> T {
    T::one() - smooth_step(lambda.abs() - T::one())
}

/// Littlewood–Paley cutoff `φ_j`: `φ₀ = χ`, `φ_j(λ) = χ(λ/2^j) - χ(λ/2^{j-1})`, so `Σ_j φ_j = 1`.
pub fn dyadic_cutoff<T: Real>(j: usize, lambda: T) -> T {
    if j == 0 {
        return dyadic_base(lambda);
    }
    let s = T::lit(2.0).powi(j as i32);
    dyadic_base(lambda / s) - dyadic_base(lambda * T::lit(2.0) / s)
}

/// Number of dyadic pieces needed to cover `|λ| ≤ band`.
pub fn dyadic_count<T: Real>(band: T) -> usize {
    let mut j = 0;
    while T::lit(2.0).powi(j as i32) < band {
        j += 1;
    }
    j + 1
}

/// `(Σ_j 2^{jsr} ||φ_j(√H•) f||_p^r)^{1/r}` with `H• = H₀` or, if `perturbed`, `H`.
/// Bound-state components are assigned to `φ₀`.
pub fn besov_norm<T: Real>(f: &ComplexSignal<T>, b: &BesovSpec<T>, perturbed: Option<&SpectralData<T>>) -> Result<T> {
    if f.values.iter().all(|z| z.norm() == T::zero()) {
        return Ok(T::zero());
    }
    let band = effective_band(f, T::lit(1e-10));
    let count = dyadic_count(band);
    let pieces: Vec<ComplexSignal<T>> = match perturbed {
        None => (0..count)
            .map(|j| ComplexSignal {
                grid: f.grid,
                values: fft_multiplier(&f.values, f.grid.h(), 2, |k| cre(dyadic_cutoff(j, k))),
            })
            .collect(),
        Some(spec) => {
            let outputs = vec![f.grid; count];
            let plan = plan_for_spectrum(spec, f, &f.grid, T::zero());
            let bnd = |j: usize, _: T| cre(if j == 0 { T::one() } else { T::zero() });
            spectral_synthesis(spec, f, &outputs, &plan, |j, l| cre(dyadic_cutoff(j, l)), Some(&bnd))?
        }
    };
    let terms: Vec<T> = pieces
        .iter()
        .enumerate()
        .map(|(j, u)| T::lit(2.0).powf(T::from_count(j) * b.s) * u.lp_norm(b.p))
        .collect();
    if b.r.is_infinite() {
        return Ok(terms.iter().cloned().fold(T::zero(), T::max));
    }
    Ok(terms.iter().map(|t| t.powf(b.r)).fold(T::zero(), |a, x| a + x).powf(T::one() / b.r))
}

/// `||a - b||₂ / ||b||₂`.
pub fn relative_error<T: Real>(a: &ComplexSignal<T>, b: &ComplexSignal<T>) -> T {
    let d = a.sub(b);
    d.l2_norm() / b.l2_norm()
}

/// Largest pointwise modulus, for diagnostics.
pub fn sup<T: Real>(u: &ComplexSignal<T>) -> T {
    sup_norm(&u.values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::free_gaussian;

    fn packet(g: Grid<f64>, x0: f64, k0: f64, s: f64) -> ComplexSignal<f64> {
        ComplexSignal::from_fn(g, |x| free_gaussian(x, 0.0, x0, k0, s))
    }

    #[test]
    fn free_evolution_matches_closed_form() {
        let g = Grid::new(-30.0, 30.0, 1201).unwrap();
        let spec = SpectralData::new(&SampledPotential::zero(g), &JostOptions::default()).unwrap();
        let f = packet(g, -2.0, 1.0, 1.0);
        let t = 3.0;
        let u = evolve_schrodinger(&spec, &f, t, Method::DistortedFourier).unwrap();
        let exact = ComplexSignal::from_fn(g, |x| free_gaussian(x, t, -2.0, 1.0, 1.0));
        assert!(relative_error(&u, &exact) < 1e-5, "{}", relative_error(&u, &exact));
        let cn = evolve_schrodinger(&spec, &f, t, Method::CrankNicolson { dt: 2e-3 }).unwrap();
        assert!(relative_error(&cn, &exact) < 1e-3, "{}", relative_error(&cn, &exact));
        let same = evolve_schrodinger(&spec, &f, 0.0, Method::CrankNicolson { dt: 1e-2 }).unwrap();
        assert_eq!(same.values, f.values);
    }

    #[test]
    fn methods_agree_with_poschl_teller() {
        let g = Grid::new(-30.0, 30.0, 1537).unwrap();
        let v = SampledPotential::poschl_teller(g, 1.0);
        let spec = SpectralData::new(&v, &JostOptions::default()).unwrap();
        assert_eq!(spec.bound_states.len(), 1);
        let f = packet(g, -3.0, 1.5, 1.2);
        for t in [0.5, 2.0] {
            let a = evolve_schrodinger(&spec, &f, t, Method::DistortedFourier).unwrap();
            let b = evolve_schrodinger(&spec, &f, t, Method::CrankNicolson { dt: 1e-3 }).unwrap();
            assert!(relative_error(&a, &b) < 1e-3, "t = {t}: {}", relative_error(&a, &b));
            assert!((a.l2_norm() - f.l2_norm()).abs() < 1e-6 * f.l2_norm() * 10.0);
        }
    }

    #[test]
    fn ac_projection() {
        let g = Grid::new(-20.0, 20.0, 1025).unwrap();
        let v = SampledPotential::poschl_teller(g, 1.0);
        let spec = SpectralData::new(&v, &JostOptions::default()).unwrap();
        let psi = ComplexSignal::from_real(g, |x: f64| 1.0 / (x.cosh() * 2f64.sqrt()));
        assert!(spec.project_ac(&psi).l2_norm() < 1e-6);
        let f = packet(g, 1.0, 0.5, 1.0);
        let p = spec.project_ac(&f);
        assert!(relative_error(&spec.project_ac(&p), &p) < 1e-10);
        let free = SpectralData::new(&SampledPotential::zero(g), &JostOptions::default()).unwrap();
        assert_eq!(free.project_ac(&f).values, f.values);
    }

    #[test]
    fn step_cap_is_enforced() {
        let g = Grid::new(-10.0, 10.0, 401).unwrap();
        let v = SampledPotential::zero(g);
        let f = packet(g, 0.0, 3.0, 1.0);
        assert!(matches!(crank_nicolson(&v, &f, 1.0, 0.2), Err(ScatterError::Step(_))));
    }

    #[test]
    fn klein_gordon_free_multiplier() {
        let g = Grid::new(-30.0, 30.0, 1201).unwrap();
        let spec = SpectralData::new(&SampledPotential::zero(g), &JostOptions::default()).unwrap();
        let f = packet(g, 0.0, 0.0, 1.5);
        let t = 4.0;
        let u = evolve_klein_gordon(&spec, &f, t).unwrap();
        let exact = fft_multiplier(&f.values, g.h(), 4, |k| kg_multiplier(t, k * k));
        let e = ComplexSignal { grid: g, values: exact };
        assert!(relative_error(&u, &e) < 1e-5, "{}", relative_error(&u, &e));
        assert!(evolve_klein_gordon(&spec, &f, 0.0).unwrap().l2_norm() < 1e-12);
        let pt = SpectralData::new(&SampledPotential::poschl_teller(g, 1.0), &JostOptions::default()).unwrap();
        assert!(matches!(evolve_klein_gordon(&pt, &f, 1.0), Err(ScatterError::Spectral(_))));
    }

    #[test]
    fn dyadic_partition_sums_to_one() {
        for k in 0..200 {
            let l = 0.05 * k as f64;
            let s: f64 = (0..8).map(|j| dyadic_cutoff(j, l)).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
        assert_eq!(dyadic_cutoff(3, 3.9), 0.0);
    }

    #[test]
    fn besov_l2_is_comparable_to_l2() {
        let g = Grid::new(-30.0, 30.0, 1201).unwrap();
        let f = packet(g, 0.0, 2.0, 1.0);
        let b = BesovSpec { s: 0.0, p: 2.0, r: 2.0 };
        let n = besov_norm(&f, &b, None).unwrap();
        let l2 = f.l2_norm();
        assert!(n >= l2 / 3f64.sqrt() && n <= l2 * (1.0 + 1e-9), "{n} vs {l2}");
        let zero = ComplexSignal::zeros(g);
        assert_eq!(besov_norm(&zero, &b, None).unwrap(), 0.0);
    }

    #[test]
    fn free_decay_exponent() {
        let g = Grid::new(-15.0, 15.0, 601).unwrap();
        let spec = SpectralData::new(&SampledPotential::zero(g), &JostOptions::default()).unwrap();
        let f = packet(g, 0.0, 0.0, 1.0);
        let mut opts = DecayOptions::standard(Equation::Schrodinger);
        opts.times = log_times(1.0, 40.0, 8);
        let two = decay_fit(&spec, &f, 2.0, &opts).unwrap();
        assert!(two.alpha_hat.abs() < 0.02, "{}", two.alpha_hat);
        let big = decay_fit(&spec, &f, 16.0, &opts).unwrap();
        assert!((big.alpha_hat - big.alpha_theory).abs() < 0.05, "{}", big.alpha_hat);
        opts.times = log_times(1.0, 5.0, 8);
        assert!(matches!(decay_fit(&spec, &f, 4.0, &opts), Err(ScatterError::Fit(_))));
    }
}
