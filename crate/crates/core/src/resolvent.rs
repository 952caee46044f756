//! Free and perturbed resolvents on the real axis, the Born series and generalized eigenfunctions.

use serde::Serialize;

use crate::error::{Result, ScatterError};
use crate::grid::Grid;
use crate::jost::{JostColumn, JostOptions};
use crate::potential::SampledPotential;
use crate::scalar::{cis, cre, cx, sup_norm, Real, C};

/// Side of the limiting absorption principle: `λ² + i0` or `λ² - i0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Limit {
    PlusI0,
    MinusI0,
}

impl Limit {
    /// `κ = ±|λ|`, so that the kernel is `e^{iκ|x-y|}` in both cases.
    pub fn kappa<T: Real>(self, lambda: T) -> T {
        match self {
            Limit::PlusI0 => lambda.abs(),
            Limit::MinusI0 => -lambda.abs(),
        }
    }
}

/// Smallest `|λ|` at which resolvents are evaluated.
pub const LAMBDA_MIN: f64 = 1e-3;

/// Low/high energy partition of unity in `|λ|`: the low cutoff is one on
/// `|λ| ≤ λ0` and vanishes for `|λ| ≥ λ0 + width`; `ψ` is one on the low support.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CutoffSpec<T> {
    pub lambda0: T,
    pub width: T,
}

/// `C^∞` step rising from 0 at `t ≤ 0` to 1 at `t ≥ 1`.
pub fn smooth_step<T: Real>(t: T) -> T {
    if t <= T::zero() {
        return T::zero();
    }
    if t >= T::one() {
        return T::one();
    }
    let f = |s: T| if s <= T::zero() { T::zero() } else { (-T::one() / s).exp() };
    let a = f(t);
    a / (a + f(T::one() - t))
}

impl<T: Real> CutoffSpec<T> {
    /// `λ0 = ||V||_1`, where the Born series contracts by at least one half.
    pub fn for_potential(v: &SampledPotential<T>) -> Self {
        Self { lambda0: v.l1_norm(), width: T::one() }
    }

    pub fn phi_low(&self, lambda: T) -> T {
        T::one() - smooth_step((lambda.abs() - self.lambda0) / self.width)
    }

    pub fn phi_high(&self, lambda: T) -> T {
        smooth_step((lambda.abs() - self.lambda0) / self.width)
    }

    /// Fattened low cutoff, identically one on the support of [`Self::phi_low`].
    pub fn psi_low(&self, lambda: T) -> T {
        T::one() - smooth_step((lambda.abs() - self.lambda0 - self.width) / self.width)
    }

    /// Upper end of the low-energy support.
    pub fn low_edge(&self) -> T {
        self.lambda0 + self.width
    }
}

/// Sums `coef·(p_i L_i[q f] + q_i R_i[p f]) - (h²/12) f_i` where
/// `L_i = ∫_{x_min}^{x_i} e^{iκ(x_i-y)}(qf)(y)dy` and `R_i = ∫_{x_i}^{x_max} e^{iκ(y-x_i)}(pf)(y)dy`.
/// The pointwise term is the endpoint correction at the kink of `e^{iκ|x-y|}`; it takes
/// this form whenever `coef` normalizes the kernel to a resolvent (unit jump in `∂_x`).
fn separable_apply<T: Real>(
    grid: &Grid<T>,
    f: &[C<T>],
    kappa: T,
    p: Option<&[C<T>]>,
    q: Option<&[C<T>]>,
    coef: C<T>,
) -> Vec<C<T>> {
    let n = grid.n;
    let h = grid.h();
    let half = T::lit(0.5) * h;
    let ph = cis(kappa * h);
    let one = cre(T::one());
    let pv = |i: usize| p.map_or(one, |p| p[i]);
    let qv = |i: usize| q.map_or(one, |q| q[i]);
    let mut left = vec![cre(T::zero()); n];
    for i in 1..n {
        left[i] = ph * (left[i - 1] + qv(i - 1) * f[i - 1] * half) + qv(i) * f[i] * half;
    }
    let mut out = vec![cre(T::zero()); n];
    let mut right = cre(T::zero());
    let c12 = h * h / T::lit(12.0);
    for i in (0..n).rev() {
        if i + 1 < n {
            right = ph * (right + pv(i + 1) * f[i + 1] * half) + pv(i) * f[i] * half;
        }
        out[i] = coef * (pv(i) * left[i] + qv(i) * right) - f[i] * c12;
    }
    out
}

fn check_lambda<T: Real>(lambda: T) -> Result<()> {
    if !(lambda.abs() >= T::lit(LAMBDA_MIN)) {
        return Err(ScatterError::Singularity(format!(
            "resolvent requested at |lambda| = {} below {LAMBDA_MIN}",
            lambda.abs()
        )));
    }
    Ok(())
}

/// `R_0(λ² ± i0) f = (H_0 - λ² ∓ i0)^{-1} f`, kernel `i e^{iκ|x-y|}/(2κ)`, `κ = ±|λ|`.
pub fn free_resolvent_apply<T: Real>(grid: &Grid<T>, f: &[C<T>], lambda: T, limit: Limit) -> Result<Vec<C<T>>> {
    check_lambda(lambda)?;
    let kappa = limit.kappa(lambda);
    let coef = -cre(T::one()) / cx(T::zero(), T::lit(2.0) * kappa);
    Ok(separable_apply(grid, f, kappa, None, None, coef))
}

/// `Im R_0(λ²+i0) f = (R_0(λ²+i0) - R_0(λ²-i0)) f / (2i)`, kernel `cos(λ|x-y|)/(2λ)`.
pub fn im_free_resolvent_apply<T: Real>(grid: &Grid<T>, f: &[C<T>], lambda: T) -> Result<Vec<C<T>>> {
    let a = free_resolvent_apply(grid, f, lambda, Limit::PlusI0)?;
    let b = free_resolvent_apply(grid, f, lambda, Limit::MinusI0)?;
    let inv2i = cre(T::one()) / cx(T::zero(), T::lit(2.0));
    Ok(a.iter().zip(&b).map(|(x, y)| (*x - *y) * inv2i).collect())
}

/// Perturbed resolvent `R_V(λ² ± i0) = (H - λ² ∓ i0)^{-1}` with kernel `f_+(κ, x_>) f_-(κ, x_<)/W(κ)`.
#[derive(Debug, Clone)]
pub struct PerturbedResolvent<T> {
    pub grid: Grid<T>,
    pub lambda: T,
    pub limit: Limit,
    pub kappa: T,
    pub wronskian: C<T>,
    column: JostColumn<T>,
}

impl<T: Real> PerturbedResolvent<T> {
    pub fn new(v: &SampledPotential<T>, lambda: T, limit: Limit, opts: &JostOptions<T>) -> Result<Self> {
        check_lambda(lambda)?;
        let kappa = limit.kappa(lambda);
        let column = JostColumn::solve(v, cre(kappa), opts)?;
        Self::from_column(v.grid, lambda, limit, column)
    }

    /// Wraps an already solved Jost column at `κ = ±|λ|`.
    pub fn from_column(grid: Grid<T>, lambda: T, limit: Limit, column: JostColumn<T>) -> Result<Self> {
        let kappa = limit.kappa(lambda);
        let wronskian = column.wronskian(&grid);
        if wronskian.norm() < T::lit(1e-12) * (T::one() + kappa.abs()) {
            return Err(ScatterError::NearSingular { lambda: lambda.as_f64(), modulus: wronskian.norm().as_f64() });
        }
        Ok(Self { grid, lambda, limit, kappa, wronskian, column })
    }

    /// Applies the kernel in `O(n)` using `f_+(x)f_-(y) = e^{iκ(x-y)} m_+(x) m_-(y)` for `x > y`.
    pub fn apply(&self, f: &[C<T>]) -> Vec<C<T>> {
        let coef = cre(T::one()) / self.wronskian;
        separable_apply(&self.grid, f, self.kappa, Some(&self.column.m_plus), Some(&self.column.m_minus), coef)
    }

    /// Kernel value `R_V(x_i, x_j)`.
    pub fn kernel(&self, i: usize, j: usize) -> C<T> {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let d = self.grid.x(hi) - self.grid.x(lo);
        cis(self.kappa * d) * self.column.m_plus[hi] * self.column.m_minus[lo] / self.wronskian
    }

    pub fn column(&self) -> &JostColumn<T> {
        &self.column
    }
}

/// Partial sums of the Born series for a generalized eigenfunction.
#[derive(Debug, Clone)]
pub struct BornExpansion<T> {
    pub phi: Vec<C<T>>,
    /// `sup |(R_0 V)^n e^{iλ·}|` for each computed term.
    pub term_sup: Vec<T>,
    /// Geometric bound on the omitted tail.
    pub tail_bound: T,
}

/// `Σ_n (-1)^n (R_0(λ² ± i0) V)^n e^{iλx}`, valid for `|λ| ≥ ||V||_1`.
pub fn eigenfunction_born<T: Real>(
    v: &SampledPotential<T>,
    lambda: T,
    limit: Limit,
    n_terms: usize,
) -> Result<BornExpansion<T>> {
    let l1 = v.l1_norm();
    if lambda.abs() < l1 * (T::one() - T::lit(1e-9)) {
        return Err(ScatterError::precondition(format!(
            "Born series needs |lambda| >= ||V||_1 = {l1}, got {lambda}"
        )));
    }
    born_column(v, lambda, limit, n_terms, T::zero())
}

/// Born series column with optional early stop once a term falls below `stop_tol`.
pub(crate) fn born_column<T: Real>(
    v: &SampledPotential<T>,
    lambda: T,
    limit: Limit,
    n_terms: usize,
    stop_tol: T,
) -> Result<BornExpansion<T>> {
    let g = v.grid;
    let mut term: Vec<C<T>> = (0..g.n).map(|i| cis(lambda * g.x(i))).collect();
    let mut phi = term.clone();
    let mut term_sup = vec![sup_norm(&term)];
    for _ in 0..n_terms {
        let vt: Vec<C<T>> = term.iter().zip(&v.values).map(|(t, &w)| *t * w).collect();
        term = free_resolvent_apply(&g, &vt, lambda, limit)?;
        term.iter_mut().for_each(|t| *t = -*t);
        phi.iter_mut().zip(&term).for_each(|(p, t)| *p += *t);
        let s = sup_norm(&term);
        term_sup.push(s);
        if s <= stop_tol {
            break;
        }
    }
    let r = (v.l1_norm() / (T::lit(2.0) * lambda.abs())).min(T::lit(0.999));
    let last = *term_sup.last().unwrap_or(&T::zero());
    let tail_bound = last * r / (T::one() - r);
    Ok(BornExpansion { phi, term_sup, tail_bound })
}

/// `e^{iλx} - R_V(λ² ± i0) V e^{iλx}` from the Jost-based resolvent.
pub fn eigenfunction_low<T: Real>(
    v: &SampledPotential<T>,
    lambda: T,
    limit: Limit,
    opts: &JostOptions<T>,
) -> Result<Vec<C<T>>> {
    let r = PerturbedResolvent::new(v, lambda, limit, opts)?;
    Ok(stationary_column(v, &r))
}

pub(crate) fn stationary_column<T: Real>(v: &SampledPotential<T>, r: &PerturbedResolvent<T>) -> Vec<C<T>> {
    let g = v.grid;
    let e: Vec<C<T>> = (0..g.n).map(|i| cis(r.lambda * g.x(i))).collect();
    let ve: Vec<C<T>> = e.iter().zip(&v.values).map(|(a, &w)| *a * w).collect();
    let rv = r.apply(&ve);
    e.iter().zip(&rv).map(|(a, b)| *a - *b).collect()
}

/// `T(k) = -2ik / W(k)`.
pub fn transmission<T: Real>(k: T, wronskian: C<T>) -> C<T> {
    cx(T::zero(), -T::lit(2.0) * k) / wronskian
}

/// Generalized eigenfunctions sampled at quadrature nodes.
#[derive(Debug, Clone)]
pub struct EigenfunctionField<T> {
    pub lambda: Vec<T>,
    pub weights: Vec<T>,
    pub grid: Grid<T>,
    pub phi: Vec<Vec<C<T>>>,
}

impl<T: Real> EigenfunctionField<T> {
    /// `φ(λ, x) = e^{iλx} - R_V(λ² + i0) V e^{iλx}` at each node.
    pub fn scattering(v: &SampledPotential<T>, lambda: &[T], weights: &[T], opts: &JostOptions<T>) -> Result<Self> {
        use rayon::prelude::*;
        let phi = lambda
            .par_iter()
            .map(|&l| eigenfunction_low(v, l, Limit::PlusI0, opts))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { lambda: lambda.to_vec(), weights: weights.to_vec(), grid: v.grid, phi })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::PoschlTeller;
    use crate::quad::second_derivative;
    use num_complex::Complex64;

    fn grid() -> Grid<f64> {
        Grid::new(-20.0, 20.0, 2001).unwrap()
    }

    #[test]
    fn free_resolvent_of_indicator() {
        let g = Grid::new(-10.0, 10.0, 2001).unwrap();
        let f: Vec<Complex64> = g.points().iter().map(|x: &f64| cre(if x.abs() < 1.0 + 1e-12 { 1.0 } else { 0.0 })).collect();
        let mut f = f;
        f[g.nearest(-1.0)] = cre(0.5);
        f[g.nearest(1.0)] = cre(0.5);
        let u = free_resolvent_apply(&g, &f, 1.0, Limit::PlusI0).unwrap();
        let exact = Complex64::new(0.0, 1.0).exp() - 1.0;
        assert!((u[g.nearest(0.0)] - exact).norm() < 1e-4, "{}", u[g.nearest(0.0)]);
    }

    #[test]
    fn free_resolvent_inverts_helmholtz() {
        let g = grid();
        let f: Vec<Complex64> = g.points().iter().map(|x| cre((-x * x).exp())).collect();
        let u = free_resolvent_apply(&g, &f, 1.5, Limit::PlusI0).unwrap();
        let re: Vec<f64> = u.iter().map(|z| z.re).collect();
        let im: Vec<f64> = u.iter().map(|z| z.im).collect();
        let (dre, dim) = (second_derivative(&re, g.h()), second_derivative(&im, g.h()));
        for i in 10..g.n - 10 {
            let r = Complex64::new(-dre[i], -dim[i]) - u[i] * 2.25 - f[i];
            assert!(r.norm() < 1e-5, "{i}: {r}");
        }
    }

    #[test]
    fn zero_lambda_is_singular() {
        let g = grid();
        let f = vec![cre(1.0); g.n];
        assert!(matches!(free_resolvent_apply(&g, &f, 0.0, Limit::PlusI0), Err(ScatterError::Singularity(_))));
        assert!(matches!(free_resolvent_apply(&g, &f, 1e-4, Limit::PlusI0), Err(ScatterError::Singularity(_))));
    }

    #[test]
    fn perturbed_reduces_to_free_for_zero_potential() {
        let g = grid();
        let v = SampledPotential::zero(g);
        let f: Vec<Complex64> = g.points().iter().map(|x| Complex64::new((-x * x).exp(), x.sin() * (-x * x / 4.0).exp())).collect();
        for limit in [Limit::PlusI0, Limit::MinusI0] {
            let a = free_resolvent_apply(&g, &f, 0.8, limit).unwrap();
            let b = PerturbedResolvent::new(&v, 0.8, limit, &JostOptions::default()).unwrap().apply(&f);
            let d = a.iter().zip(&b).fold(0.0f64, |m, (x, y)| m.max((x - y).norm()));
            assert!(d < 1e-12, "{d}");
        }
    }

    #[test]
    fn perturbed_kernel_is_symmetric() {
        let v = SampledPotential::poschl_teller(grid(), 1.0);
        let r = PerturbedResolvent::new(&v, 0.9, Limit::PlusI0, &JostOptions::default()).unwrap();
        for (i, j) in [(100, 1500), (900, 1000), (1990, 3)] {
            assert!((r.kernel(i, j) - r.kernel(j, i)).norm() < 1e-14);
        }
    }

    #[test]
    fn low_eigenfunction_solves_ode_and_matches_transmission() {
        let v = SampledPotential::poschl_teller(grid(), 1.0);
        let l = 1.5;
        let phi = eigenfunction_low(&v, l, Limit::PlusI0, &JostOptions::default()).unwrap();
        let g = v.grid;
        let re: Vec<f64> = phi.iter().map(|z| z.re).collect();
        let im: Vec<f64> = phi.iter().map(|z| z.im).collect();
        let (dre, dim) = (second_derivative(&re, g.h()), second_derivative(&im, g.h()));
        for i in 10..g.n - 10 {
            let r = Complex64::new(-dre[i], -dim[i]) + phi[i] * (v.values[i] - l * l);
            assert!(r.norm() < 1e-4, "{i}: {r}");
        }
        let o = PoschlTeller;
        let z = cre(l);
        let t = transmission(l, o.wronskian(z));
        for i in (0..g.n).step_by(97) {
            let x = g.x(i);
            let exact = t * cis(l * x) * o.m_plus(z, x);
            assert!((phi[i] - exact).norm() < 1e-5);
        }
    }

    #[test]
    fn born_matches_low_at_double_threshold() {
        let v = SampledPotential::poschl_teller(grid(), 1.0);
        let l0 = v.l1_norm();
        let b = eigenfunction_born(&v, 2.0 * l0, Limit::PlusI0, 30).unwrap();
        let lo = eigenfunction_low(&v, 2.0 * l0, Limit::PlusI0, &JostOptions::default()).unwrap();
        let d = b.phi.iter().zip(&lo).fold(0.0f64, |m, (x, y)| m.max((x - y).norm()));
        assert!(d < 1e-4, "{d}");
        assert!(b.tail_bound < 1e-8);
        assert!(eigenfunction_born(&v, 1.0, Limit::PlusI0, 30).is_err());
    }

    #[test]
    fn cutoffs_partition_unity() {
        let c = CutoffSpec { lambda0: 4.0, width: 1.0 };
        for k in 0..200 {
            let l = -10.0 + 0.1 * k as f64;
            assert!((c.phi_low(l) + c.phi_high(l) - 1.0).abs() < 1e-15);
            if c.phi_low(l) > 0.0 {
                assert_eq!(c.psi_low(l), 1.0);
            }
        }
        assert_eq!(c.phi_low(4.0), 1.0);
        assert_eq!(c.phi_high(5.0), 1.0);
    }
}
