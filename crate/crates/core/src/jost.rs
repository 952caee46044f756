//! Jost solutions `f_± = e^{±iλx} m_±` from the Volterra equations for `m_±`.
//!
//! The Volterra kernel vanishes on the diagonal, so the trapezoid discretization is
//! triangular and is solved exactly by marching from the far end. Running sums keep
//! the cost linear in the number of grid points. An Euler–Maclaurin correction at the
//! moving endpoint makes the scheme fourth order for smooth potentials.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, ScatterError};
use crate::grid::Grid;
use crate::potential::SampledPotential;
use crate::scalar::{cis, cre, cx, Real, C};

/// Which Jost solution: `+` normalized at `+∞`, `-` at `-∞`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    Plus,
    Minus,
}

/// Solver controls for the Volterra equations.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct JostOptions<T> {
    /// Accepted relative defect of the discrete fixed point.
    pub tol: T,
    /// Picard refinement sweeps allowed when the defect check fails.
    pub max_iter: usize,
}

impl<T: Real> Default for JostOptions<T> {
    fn default() -> Self {
        let tol = if T::epsilon() < T::lit(1e-10) { T::lit(1e-10) } else { T::lit(1e-4) };
        Self { tol, max_iter: 50 }
    }
}

/// `m_±` and `∂_x m_±` on the grid at one spectral parameter `z`.
#[derive(Debug, Clone)]
pub struct JostColumn<T> {
    pub z: C<T>,
    pub m_plus: Vec<C<T>>,
    pub dm_plus: Vec<C<T>>,
    pub m_minus: Vec<C<T>>,
    pub dm_minus: Vec<C<T>>,
}

struct Prepared<'a, T> {
    v: &'a [T],
    dv: Vec<T>,
    h: T,
}

fn prepare<T: Real>(v: &SampledPotential<T>) -> Prepared<'_, T> {
    Prepared { v: &v.values, dv: v.derivative(), h: v.h() }
}

#[inline]
fn czero<T: Real>() -> C<T> {
    cx(T::zero(), T::zero())
}

/// Largest `|2z| * span` for which the Taylor form of the kernel is used.
fn series_threshold<T: Real>() -> T {
    (T::lit(120.0) * T::epsilon()).powf(T::lit(0.25))
}

/// Weighted sums over `j > i` used by the marcher.
struct Sums<T> {
    /// `Σ w_j e^{2iz(x_j - x_i)} V_j m_j`.
    e: C<T>,
    /// `Σ w_j (x_j - x_i)^k V_j m_j`, k = 0..4.
    mom: [C<T>; 5],
}

impl<T: Real> Sums<T> {
    fn new() -> Self {
        Self { e: czero(), mom: [czero(); 5] }
    }

    /// Shifts the base point from `x_{i+1}` to `x_i` after adding the node `i+1` term `f`.
    fn shift(&mut self, f: C<T>, phase: C<T>, h: T, with_moments: bool) {
        self.e = phase * (self.e + f);
        if with_moments {
            let mut s = self.mom;
            s[0] += f;
            let binom = [[1.0, 0.0, 0.0, 0.0, 0.0], [1.0, 1.0, 0.0, 0.0, 0.0], [1.0, 2.0, 1.0, 0.0, 0.0], [1.0, 3.0, 3.0, 1.0, 0.0], [1.0, 4.0, 6.0, 4.0, 1.0]];
            let mut out = [czero(); 5];
            for k in 0..5 {
                let mut acc = czero();
                let mut hp = T::one();
                for l in (0..=k).rev() {
                    acc += s[l] * (T::lit(binom[k][l]) * hp);
                    hp *= h;
                }
                out[k] = acc;
            }
            self.mom = out;
        } else {
            self.mom[0] += f;
        }
    }

    /// Trapezoid value of `∫_{x_i}^∞ D_z(t - x_i) V m dt` (diagonal term excluded).
    fn integral(&self, z: C<T>, h: T, series: bool) -> C<T> {
        let two_iz = cx(T::zero(), T::lit(2.0)) * z;
        if series {
            let iz = two_iz * T::lit(0.5);
            let m = &self.mom;
            (m[1] + iz * m[2] + two_iz * two_iz * m[3] / T::lit(6.0)
                + two_iz * two_iz * two_iz * m[4] / T::lit(24.0))
                * h
        } else {
            (self.e - self.mom[0]) * h / two_iz
        }
    }
}

/// Solves for `m_+` on indices `stop..n`, returning full-length arrays (zeros below `stop`).
fn march_plus<T: Real>(p: &Prepared<'_, T>, z: C<T>, stop: usize) -> (Vec<C<T>>, Vec<C<T>>) {
    let n = p.v.len();
    let last = n - 1;
    let h = p.h;
    let mut m = vec![czero(); n];
    let mut dm = vec![czero(); n];
    m[last] = cre(T::one());
    let two_iz = cx(T::zero(), T::lit(2.0)) * z;
    let span = h * T::from_count(last - stop.min(last));
    let series = T::lit(2.0) * z.norm() * span < series_threshold::<T>();
    let phase = (two_iz * h).exp();
    let c12 = h * h / T::lit(12.0);
    let half = T::lit(0.5);
    let mut sums = Sums::new();
    for i in (stop..last).rev() {
        let w = if i + 1 == last { half } else { T::one() };
        let f = m[i + 1] * (w * p.v[i + 1]);
        sums.shift(f, phase, h, series);
        let t = sums.integral(z, h, series);
        let vi = p.v[i];
        let mi = (cre(T::one()) + t) / (T::one() - c12 * vi);
        let tp = (mi * (half * vi) + sums.e) * h;
        let corr = (two_iz * vi + cre(p.dv[i])) * mi * c12;
        m[i] = mi;
        dm[i] = -(tp + corr) / (T::one() + c12 * vi);
    }
    (m, dm)
}

/// `1 + K[m]` for the corrected discrete Volterra operator (plus side).
fn apply_volterra_plus<T: Real>(p: &Prepared<'_, T>, z: C<T>, m: &[C<T>]) -> Vec<C<T>> {
    let n = p.v.len();
    let last = n - 1;
    let h = p.h;
    let two_iz = cx(T::zero(), T::lit(2.0)) * z;
    let series = T::lit(2.0) * z.norm() * h * T::from_count(last) < series_threshold::<T>();
    let phase = (two_iz * h).exp();
    let c12 = h * h / T::lit(12.0);
    let mut out = vec![cre(T::one()); n];
    let mut sums = Sums::new();
    for i in (0..last).rev() {
        let w = if i + 1 == last { T::lit(0.5) } else { T::one() };
        sums.shift(m[i + 1] * (w * p.v[i + 1]), phase, h, series);
        out[i] = cre(T::one()) + sums.integral(z, h, series) + m[i] * (c12 * p.v[i]);
    }
    out
}

fn reflect<T: Real>(v: &SampledPotential<T>) -> SampledPotential<T> {
    v.reflected()
}

fn defect<T: Real>(a: &[C<T>], b: &[C<T>]) -> T {
    let scale = a.iter().fold(T::one(), |s, z| s.max(z.norm()));
    a.iter().zip(b).fold(T::zero(), |s, (x, y)| s.max((*x - *y).norm())) / scale
}

fn solve_plus_checked<T: Real>(
    p: &Prepared<'_, T>,
    z: C<T>,
    opts: &JostOptions<T>,
) -> Result<(Vec<C<T>>, Vec<C<T>>)> {
    let (mut m, mut dm) = march_plus(p, z, 0);
    let mut next = apply_volterra_plus(p, z, &m);
    let mut res = defect(&next, &m);
    let mut it = 0;
    while !(res <= opts.tol) {
        if it >= opts.max_iter || !res.is_finite() {
            return Err(ScatterError::Divergence {
                what: format!("Volterra solve at z = {:?}", (z.re.as_f64(), z.im.as_f64())),
                iterations: it,
                residual: res.as_f64(),
            });
        }
        m = next;
        next = apply_volterra_plus(p, z, &m);
        res = defect(&next, &m);
        it += 1;
        dm = derivative_from_m(p, z, &m);
    }
    Ok((m, dm))
}

/// Recomputes `∂_x m_+` from a given `m_+` by the corrected trapezoid rule.
fn derivative_from_m<T: Real>(p: &Prepared<'_, T>, z: C<T>, m: &[C<T>]) -> Vec<C<T>> {
    let n = p.v.len();
    let last = n - 1;
    let h = p.h;
    let two_iz = cx(T::zero(), T::lit(2.0)) * z;
    let phase = (two_iz * h).exp();
    let c12 = h * h / T::lit(12.0);
    let mut dm = vec![czero(); n];
    let mut e = czero();
    for i in (0..last).rev() {
        let w = if i + 1 == last { T::lit(0.5) } else { T::one() };
        e = phase * (e + m[i + 1] * (w * p.v[i + 1]));
        let vi = p.v[i];
        let tp = (m[i] * (T::lit(0.5) * vi) + e) * h;
        dm[i] = -(tp + (two_iz * vi + cre(p.dv[i])) * m[i] * c12) / (T::one() + c12 * vi);
    }
    dm
}

/// Solves the Volterra equation for `m_side(λ, ·)` and returns `(m, ∂_x m)`.
pub fn solve_m<T: Real>(
    v: &SampledPotential<T>,
    lambda: C<T>,
    side: Side,
    opts: &JostOptions<T>,
) -> Result<(Vec<C<T>>, Vec<C<T>>)> {
    match side {
        Side::Plus => solve_plus_checked(&prepare(v), lambda, opts),
        Side::Minus => {
            let r = reflect(v);
            let (mut m, mut dm) = solve_plus_checked(&prepare(&r), lambda, opts)?;
            m.reverse();
            dm.reverse();
            dm.iter_mut().for_each(|d| *d = -*d);
            Ok((m, dm))
        }
    }
}

/// Sup-norm differences between successive Picard iterates `m^{k+1} = 1 + K m^k`, starting from `m^0 = 1`.
pub fn picard_differences<T: Real>(
    v: &SampledPotential<T>,
    lambda: C<T>,
    side: Side,
    iterations: usize,
) -> Vec<T> {
    let pot = if side == Side::Minus { reflect(v) } else { v.clone() };
    let p = prepare(&pot);
    let mut m = vec![cre(T::one()); pot.grid.n];
    let mut out = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let next = apply_volterra_plus(&p, lambda, &m);
        out.push(
            next.iter().zip(&m).fold(T::zero(), |s, (a, b)| s.max((*a - *b).norm())),
        );
        m = next;
    }
    out
}

impl<T: Real> JostColumn<T> {
    /// Solves both Volterra equations at spectral parameter `z`.
    pub fn solve(v: &SampledPotential<T>, z: C<T>, opts: &JostOptions<T>) -> Result<Self> {
        let (m_plus, dm_plus) = solve_m(v, z, Side::Plus, opts)?;
        let (m_minus, dm_minus) = solve_m(v, z, Side::Minus, opts)?;
        Ok(Self { z, m_plus, dm_plus, m_minus, dm_minus })
    }

    /// `W = m_+ ∂m_- - ∂m_+ m_- - 2iz m_+ m_-` at grid index `i`.
    pub fn wronskian_at(&self, i: usize) -> C<T> {
        let two_iz = cx(T::zero(), T::lit(2.0)) * self.z;
        self.m_plus[i] * self.dm_minus[i]
            - self.dm_plus[i] * self.m_minus[i]
            - two_iz * self.m_plus[i] * self.m_minus[i]
    }

    /// Wronskian evaluated at the grid point nearest the origin.
    pub fn wronskian(&self, grid: &Grid<T>) -> C<T> {
        self.wronskian_at(grid.nearest(T::zero()))
    }

    /// `f_+(x_i) = e^{izx_i} m_+(x_i)`.
    pub fn f_plus(&self, grid: &Grid<T>, i: usize) -> C<T> {
        (cx(T::zero(), grid.x(i)) * self.z).exp() * self.m_plus[i]
    }

    /// `f_-(x_i) = e^{-izx_i} m_-(x_i)`.
    pub fn f_minus(&self, grid: &Grid<T>, i: usize) -> C<T> {
        (cx(T::zero(), -grid.x(i)) * self.z).exp() * self.m_minus[i]
    }
}

/// Wronskian at `z` from partial marches meeting at the grid point nearest the origin.
pub fn wronskian_at<T: Real>(v: &SampledPotential<T>, z: C<T>) -> C<T> {
    let i0 = v.grid.nearest(T::zero());
    let (mp, dmp, mm, dmm) = partial_columns(v, z, i0);
    let two_iz = cx(T::zero(), T::lit(2.0)) * z;
    mp * dmm - dmp * mm - two_iz * mp * mm
}

/// `(m_+, ∂m_+, m_-, ∂m_-)` at index `i0`, marching each solution only as far as `i0`.
fn partial_columns<T: Real>(v: &SampledPotential<T>, z: C<T>, i0: usize) -> (C<T>, C<T>, C<T>, C<T>) {
    let p = prepare(v);
    let (m, dm) = march_plus(&p, z, i0);
    let r = reflect(v);
    let pr = prepare(&r);
    let j0 = v.grid.n - 1 - i0;
    let (mr, dmr) = march_plus(&pr, z, j0);
    (m[i0], dm[i0], mr[j0], -dmr[j0])
}

/// Symmetric uniform grid `[-lambda_max, lambda_max]`; an odd count includes `λ = 0`.
pub fn lambda_grid<T: Real>(lambda_max: T, points: usize) -> Result<Vec<T>> {
    if points < 3 || !(lambda_max > T::zero()) {
        return Err(ScatterError::input("lambda grid needs >= 3 points and a positive extent"));
    }
    let d = T::lit(2.0) * lambda_max / T::from_count(points - 1);
    Ok((0..points).map(|k| -lambda_max + T::from_count(k) * d).collect())
}

/// Jost solutions on a grid of real spectral parameters.
#[derive(Debug, Clone)]
pub struct JostField<T> {
    pub lambda: Vec<T>,
    pub grid: Grid<T>,
    pub columns: Vec<JostColumn<T>>,
}

impl<T: Real> JostField<T> {
    /// Solves one column per `λ`, in parallel.
    pub fn solve(v: &SampledPotential<T>, lambda: &[T], opts: &JostOptions<T>) -> Result<Self> {
        let columns = lambda
            .par_iter()
            .map(|&l| JostColumn::solve(v, cre(l), opts))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { lambda: lambda.to_vec(), grid: v.grid, columns })
    }

    pub fn wronskian(&self) -> Vec<C<T>> {
        let i0 = self.grid.nearest(T::zero());
        self.columns.iter().map(|c| c.wronskian_at(i0)).collect()
    }

    /// Index of `λ = 0` in the spectral grid, if present.
    pub fn zero_index(&self) -> Option<usize> {
        let scale = self.lambda.iter().fold(T::zero(), |m, l| m.max(l.abs()));
        self.lambda.iter().position(|l| l.abs() <= scale * T::lit(1e-9))
    }

    /// `n_± = (m_±(λ) - m_±(0))/λ`; at `λ = 0` the centered difference quotient is used.
    pub fn compute_n(&self, side: Side) -> Result<Vec<Vec<C<T>>>> {
        let k0 = self.zero_index().ok_or_else(|| {
            ScatterError::Singularity("lambda grid does not contain 0; n is undefined".into())
        })?;
        fn pick<T>(c: &JostColumn<T>, side: Side) -> &[C<T>] {
            match side {
                Side::Plus => &c.m_plus,
                Side::Minus => &c.m_minus,
            }
        }
        let m0 = pick(&self.columns[k0], side);
        let mut out = Vec::with_capacity(self.lambda.len());
        for (k, col) in self.columns.iter().enumerate() {
            if k == k0 {
                if k == 0 || k + 1 == self.lambda.len() {
                    return Err(ScatterError::Singularity("lambda = 0 at the grid edge".into()));
                }
                let a = pick(&self.columns[k + 1], side);
                let b = pick(&self.columns[k - 1], side);
                let d = self.lambda[k + 1] - self.lambda[k - 1];
                out.push(a.iter().zip(b).map(|(x, y)| (*x - *y) / d).collect());
            } else {
                let l = self.lambda[k];
                out.push(pick(col, side).iter().zip(m0).map(|(x, y)| (*x - *y) / l).collect());
            }
        }
        Ok(out)
    }
}

/// Zero-energy resonance diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct ResonanceReport {
    pub resonant: bool,
    /// `|W(0)| / sup_{|λ|≤1} |W|`.
    pub ratio: f64,
    pub threshold: f64,
    /// Within a factor two of the threshold.
    pub ambiguous: bool,
    /// Least-squares `c0` in `m_-(0,·) ≈ c0 m_+(0,·)` on `|x| ≤ 10` (resonant case only).
    pub c0: Option<(f64, f64)>,
    /// Relative sup residual of that fit.
    pub c0_residual: Option<f64>,
    /// `|∫ V m_+(0,·)|` and `|∫ V m_-(0,·)|`.
    pub vm_integrals: (f64, f64),
}

/// Classifies `λ = 0` as resonant when `|W(0)| < threshold · sup_{|λ|≤1}|W|`.
pub fn detect_resonance<T: Real>(
    field: &JostField<T>,
    v: &SampledPotential<T>,
    threshold: f64,
) -> Result<ResonanceReport> {
    let k0 = field.zero_index().ok_or_else(|| {
        ScatterError::Singularity("resonance test needs lambda = 0 in the grid".into())
    })?;
    let w = field.wronskian();
    let sup = field
        .lambda
        .iter()
        .zip(&w)
        .filter(|(l, _)| l.abs() <= T::one())
        .fold(0.0f64, |m, (_, w)| m.max(w.norm().as_f64()));
    let ratio = if sup > 0.0 { w[k0].norm().as_f64() / sup } else { 0.0 };
    let resonant = ratio < threshold;
    let ambiguous = ratio >= threshold / 2.0 && ratio <= threshold * 2.0;
    let col = &field.columns[k0];
    let vm = |m: &[C<T>]| -> f64 {
        let mut s = czero::<T>();
        for i in 0..v.grid.n {
            s += m[i] * (v.values[i] * v.grid.weight(i));
        }
        s.norm().as_f64()
    };
    let vm_integrals = (vm(&col.m_plus), vm(&col.m_minus));
    let (c0, c0_residual) = if resonant {
        let mut num = czero::<T>();
        let mut den = T::zero();
        let ten = T::lit(10.0);
        for i in 0..v.grid.n {
            if v.grid.x(i).abs() <= ten {
                num += col.m_minus[i] * col.m_plus[i].conj();
                den += col.m_plus[i].norm_sqr();
            }
        }
        let c = num / den;
        let mut r = T::zero();
        let mut s = T::zero();
        for i in 0..v.grid.n {
            if v.grid.x(i).abs() <= ten {
                r = r.max((col.m_minus[i] - c * col.m_plus[i]).norm());
                s = s.max(col.m_minus[i].norm());
            }
        }
        (Some((c.re.as_f64(), c.im.as_f64())), Some((r / s.max(T::min_positive_value())).as_f64()))
    } else {
        (None, None)
    };
    Ok(ResonanceReport { resonant, ratio, threshold, ambiguous, c0, c0_residual, vm_integrals })
}

/// Scattering summary on the spectral grid.
#[derive(Debug, Clone)]
pub struct ScatteringData<T> {
    pub lambda: Vec<T>,
    pub wronskian: Vec<C<T>>,
    pub resonance: Option<ResonanceReport>,
    pub bound_states: Vec<BoundState<T>>,
}

impl<T: Real> ScatteringData<T> {
    pub fn resonant(&self) -> bool {
        self.resonance.as_ref().is_some_and(|r| r.resonant)
    }

    pub fn from_field(field: &JostField<T>, v: &SampledPotential<T>, opts: &JostOptions<T>) -> Result<Self> {
        let resonance = if field.zero_index().is_some() {
            Some(detect_resonance(field, v, 1e-4)?)
        } else {
            None
        };
        Ok(Self {
            lambda: field.lambda.clone(),
            wronskian: field.wronskian(),
            resonance,
            bound_states: bound_states(v, opts)?,
        })
    }
}

/// Normalized eigenfunction for an eigenvalue `E = -κ²`.
#[derive(Debug, Clone)]
pub struct BoundState<T> {
    pub kappa: T,
    pub energy: T,
    pub psi: Vec<T>,
}

/// Eigenvalues below zero from sign changes of the real Wronskian `W(iκ)`, refined by bisection.
pub fn bound_states<T: Real>(v: &SampledPotential<T>, _opts: &JostOptions<T>) -> Result<Vec<BoundState<T>>> {
    let depth = v.depth();
    if depth <= T::zero() {
        return Ok(Vec::new());
    }
    let kmax = depth.sqrt() * T::lit(1.0 + 1e-9);
    let scan = 600;
    let kmin = kmax * T::lit(1e-4);
    let w = |k: T| wronskian_at(v, cx(T::zero(), k)).re;
    let ks: Vec<T> = (0..=scan)
        .map(|j| kmin + (kmax - kmin) * T::from_count(j) / T::from_count(scan))
        .collect();
    let ws: Vec<T> = ks.par_iter().map(|&k| w(k)).collect();
    let mut roots = Vec::new();
    for j in 0..scan {
        if ws[j] == T::zero() {
            roots.push(ks[j]);
        } else if ws[j] * ws[j + 1] < T::zero() {
            let (mut a, mut b) = (ks[j], ks[j + 1]);
            let mut fa = ws[j];
            for _ in 0..200 {
                let mid = T::lit(0.5) * (a + b);
                if (b - a) <= kmax * T::epsilon() * T::lit(8.0) {
                    break;
                }
                let fm = w(mid);
                if fm * fa <= T::zero() {
                    b = mid;
                } else {
                    a = mid;
                    fa = fm;
                }
            }
            roots.push(T::lit(0.5) * (a + b));
        }
    }
    roots.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut states: Vec<BoundState<T>> = Vec::with_capacity(roots.len());
    for kappa in roots {
        let mut psi = bound_state_function(v, kappa);
        for s in &states {
            let dot = inner_real(&s.psi, &psi, &v.grid);
            psi.iter_mut().zip(&s.psi).for_each(|(p, q)| *p -= dot * *q);
        }
        let nrm = inner_real(&psi, &psi, &v.grid).sqrt();
        psi.iter_mut().for_each(|p| *p /= nrm);
        states.push(BoundState { kappa, energy: -kappa * kappa, psi });
    }
    Ok(states)
}

fn inner_real<T: Real>(a: &[T], b: &[T], g: &Grid<T>) -> T {
    (0..g.n).fold(T::zero(), |s, i| s + a[i] * b[i] * g.weight(i))
}

/// `f_+(iκ, ·)` right of the origin glued to a multiple of `f_-(iκ, ·)` on the left, normalized.
fn bound_state_function<T: Real>(v: &SampledPotential<T>, kappa: T) -> Vec<T> {
    let g = v.grid;
    let i0 = g.nearest(T::zero());
    let z = cx(T::zero(), kappa);
    let (mp, _) = march_plus(&prepare(v), z, i0);
    let r = reflect(v);
    let j0 = g.n - 1 - i0;
    let (mr, _) = march_plus(&prepare(&r), z, j0);
    let mut psi = vec![T::zero(); g.n];
    for i in i0..g.n {
        psi[i] = (-kappa * g.x(i)).exp() * mp[i].re;
    }
    let left_at = |i: usize| (kappa * g.x(i)).exp() * mr[g.n - 1 - i].re;
    let scale = psi[i0] / left_at(i0);
    for i in 0..i0 {
        psi[i] = scale * left_at(i);
    }
    let nrm = inner_real(&psi, &psi, &g).sqrt();
    let imax = (0..g.n).max_by(|&a, &b| psi[a].abs().partial_cmp(&psi[b].abs()).unwrap()).unwrap_or(0);
    let sign = if psi[imax] < T::zero() { -T::one() } else { T::one() };
    psi.iter_mut().for_each(|p| *p = *p * sign / nrm);
    psi
}

/// Samples of `e^{iλx}` on the grid.
pub fn plane_wave<T: Real>(grid: &Grid<T>, lambda: T) -> Vec<C<T>> {
    (0..grid.n).map(|i| cis(lambda * grid.x(i))).collect()
}
