use crate::error::{Result, ScatterError};
use crate::grid::Grid;
use crate::scalar::{cre, Real, C};

/// Complex samples on a uniform grid.
#[derive(Debug, Clone)]
pub struct ComplexSignal<T> {
    pub grid: Grid<T>,
    pub values: Vec<C<T>>,
}

impl<T: Real> ComplexSignal<T> {
    pub fn new(grid: Grid<T>, values: Vec<C<T>>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(ScatterError::input("signal length does not match its grid"));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid<T>, f: impl Fn(T) -> C<T>) -> Self {
        let values = (0..grid.n).map(|i| f(grid.x(i))).collect();
        Self { grid, values }
    }

    pub fn from_real(grid: Grid<T>, f: impl Fn(T) -> T) -> Self {
        Self::from_fn(grid, |x| cre(f(x)))
    }

    pub fn zeros(grid: Grid<T>) -> Self {
        Self { grid, values: vec![cre(T::zero()); grid.n] }
    }

    /// Trapezoid `L^p` norm.
    pub fn lp_norm(&self, p: T) -> T {
        lp_norm(&self.values, self.grid.h(), p)
    }

    pub fn l2_norm(&self) -> T {
        self.lp_norm(T::lit(2.0))
    }

    pub fn sup_norm(&self) -> T {
        crate::scalar::sup_norm(&self.values)
    }

    /// `<self, other> = ∫ conj(self) other`.
    pub fn inner(&self, other: &Self) -> C<T> {
        inner(&self.values, &other.values, &self.grid)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let values = self.values.iter().zip(&other.values).map(|(a, b)| *a - *b).collect();
        Self { grid: self.grid, values }
    }

    pub fn scale(&self, s: C<T>) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|a| *a * s).collect() }
    }
}

/// Trapezoid `L^p` norm of uniformly spaced samples.
pub fn lp_norm<T: Real>(values: &[C<T>], h: T, p: T) -> T {
    if p.is_infinite() {
        return crate::scalar::sup_norm(values);
    }
    let n = values.len();
    let mut s = T::zero();
    for (i, v) in values.iter().enumerate() {
        let w = if i == 0 || i + 1 == n { T::lit(0.5) } else { T::one() };
        s += w * v.norm().powf(p);
    }
    (s * h).powf(T::one() / p)
}

/// Trapezoid inner product `∫ conj(a) b`.
pub fn inner<T: Real>(a: &[C<T>], b: &[C<T>], grid: &Grid<T>) -> C<T> {
    let mut s = cre(T::zero());
    for i in 0..grid.n {
        s += a[i].conj() * b[i] * grid.weight(i);
    }
    s
}
