use std::path::Path;

use serde::Serialize;

use crate::error::{Result, ScatterError};
use crate::grid::Grid;
use crate::interp::Pchip;
use crate::quad;
use crate::scalar::Real;

/// Real potential sampled on a uniform grid; treated as zero outside the grid.
#[derive(Debug, Clone)]
pub struct SampledPotential<T> {
    pub grid: Grid<T>,
    pub values: Vec<T>,
}

/// Integrability summary of a potential.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PotentialNorms {
    pub l1: f64,
    pub l1_weight1: f64,
    pub l1_weight2: f64,
}

impl<T: Real> SampledPotential<T> {
    pub fn new(grid: Grid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(ScatterError::input(format!(
                "potential has {} samples for a grid of {} points",
                values.len(),
                grid.n
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(ScatterError::input("potential samples must be finite"));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid<T>, f: impl Fn(T) -> T) -> Result<Self> {
        let values = grid.points().into_iter().map(f).collect();
        Self::new(grid, values)
    }

    pub fn zero(grid: Grid<T>) -> Self {
        Self { grid, values: vec![T::zero(); grid.n] }
    }

    /// `-l(l+1) sech^2 x`.
    pub fn poschl_teller(grid: Grid<T>, l: T) -> Self {
        let amp = l * (l + T::one());
        let values = grid
            .points()
            .into_iter()
            .map(|x| {
                let s = T::one() / x.cosh();
                -amp * s * s
            })
            .collect();
        Self { grid, values }
    }

    /// `-depth` on `|x| < half_width`; a grid point exactly on a jump gets the mean value.
    pub fn square_well(grid: Grid<T>, depth: T, half_width: T) -> Result<Self> {
        if !(depth.is_finite() && half_width > T::zero()) {
            return Err(ScatterError::input("square well needs finite depth and positive width"));
        }
        let tol = grid.h() * T::lit(1e-6);
        let values = grid
            .points()
            .into_iter()
            .map(|x| {
                let d = x.abs() - half_width;
                if d.abs() <= tol {
                    -depth * T::lit(0.5)
                } else if d < T::zero() {
                    -depth
                } else {
                    T::zero()
                }
            })
            .collect();
        Ok(Self { grid, values })
    }

    /// Reads an `x,V` table with a header row. Non-uniform tables are resampled
    /// onto a uniform grid with the same number of points by monotone cubic interpolation.
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_path(path)?;
        let mut xs = Vec::new();
        let mut vs = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() < 2 {
                return Err(ScatterError::input(format!("row {} has fewer than 2 columns", line + 2)));
            }
            let parse = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|_| ScatterError::input(format!("row {}: cannot parse '{s}'", line + 2)))
            };
            xs.push(parse(&rec[0])?);
            vs.push(parse(&rec[1])?);
        }
        Self::from_table(&xs, &vs)
    }

    /// Builds a potential from an `(x, V)` table, resampling if needed.
    pub fn from_table(xs: &[f64], vs: &[f64]) -> Result<Self> {
        let n = xs.len();
        if n < 3 || vs.len() != n {
            return Err(ScatterError::input("potential table needs at least 3 rows"));
        }
        if xs.iter().chain(vs).any(|v| !v.is_finite()) {
            return Err(ScatterError::input("potential table contains non-finite values"));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ScatterError::input("potential table abscissae must be strictly increasing"));
        }
        let grid = Grid::new(T::lit(xs[0]), T::lit(xs[n - 1]), n)?;
        let h = (xs[n - 1] - xs[0]) / (n - 1) as f64;
        let uniform = xs
            .iter()
            .enumerate()
            .all(|(i, x)| (x - (xs[0] + i as f64 * h)).abs() <= 1e-9 * h.max(1.0));
        let values = if uniform {
            vs.iter().map(|&v| T::lit(v)).collect()
        } else {
            let p = Pchip::new(xs.to_vec(), vs.to_vec())?;
            (0..n).map(|i| T::lit(p.eval(xs[0] + i as f64 * h))).collect()
        };
        Self::new(grid, values)
    }

    pub fn h(&self) -> T {
        self.grid.h()
    }

    /// `∫ (1+|x|)^gamma |V| dx`.
    pub fn weighted_norm(&self, gamma: T) -> T {
        let w: Vec<T> = self
            .grid
            .points()
            .into_iter()
            .zip(&self.values)
            .map(|(x, v)| (T::one() + x.abs()).powf(gamma) * v.abs())
            .collect();
        quad::trapezoid(&w, self.h())
    }

    pub fn l1_norm(&self) -> T {
        let a: Vec<T> = self.values.iter().map(|v| v.abs()).collect();
        quad::trapezoid(&a, self.h())
    }

    pub fn norms(&self) -> PotentialNorms {
        PotentialNorms {
            l1: self.l1_norm().as_f64(),
            l1_weight1: self.weighted_norm(T::one()).as_f64(),
            l1_weight2: self.weighted_norm(T::lit(2.0)).as_f64(),
        }
    }

    /// `eta(x) = ∫_x^∞ |V|`.
    pub fn eta(&self) -> Vec<T> {
        let a: Vec<T> = self.values.iter().map(|v| v.abs()).collect();
        quad::tail_integrals(&a, self.h())
    }

    /// `∫_x^∞ |V|` evaluated at an arbitrary point (zero beyond the grid).
    pub fn eta_at(&self, eta: &[T], x: T) -> T {
        if x >= self.grid.x_max {
            return T::zero();
        }
        if x <= self.grid.x_min {
            return eta[0];
        }
        let s = (x - self.grid.x_min) / self.h();
        let i = s.floor().to_usize().unwrap_or(0).min(self.grid.n - 2);
        let f = s - T::from_count(i);
        eta[i] * (T::one() - f) + eta[i + 1] * f
    }

    /// `gamma(x) = ∫_x^∞ eta`.
    pub fn gamma_fn(&self) -> Vec<T> {
        quad::tail_integrals(&self.eta(), self.h())
    }

    /// Signed tail `∫_x^∞ V`.
    pub fn signed_tail(&self) -> Vec<T> {
        quad::tail_integrals(&self.values, self.h())
    }

    /// Signed head `∫_{-∞}^x V`.
    pub fn signed_head(&self) -> Vec<T> {
        quad::cumulative(&self.values, self.h())
    }

    pub fn derivative(&self) -> Vec<T> {
        quad::derivative(&self.values, self.h())
    }

    /// `V(-x)` on the mirrored grid.
    pub fn reflected(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        Self { grid: self.grid.reflected(), values }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == T::zero())
    }

    /// `max(-V, 0)`.
    pub fn depth(&self) -> T {
        self.values.iter().fold(T::zero(), |m, &v| m.max(-v))
    }

    pub fn max_abs(&self) -> T {
        crate::scalar::sup_norm_real(&self.values)
    }

    pub fn points(&self) -> Vec<T> {
        self.grid.points()
    }

    /// Same potential sampled on a refined grid by linear interpolation.
    pub fn resampled(&self, grid: Grid<T>, f: Option<&dyn Fn(T) -> T>) -> Result<Self> {
        match f {
            Some(f) => Self::from_fn(grid, f),
            None => {
                let xs: Vec<f64> = self.points().iter().map(|x| x.as_f64()).collect();
                let vs: Vec<f64> = self.values.iter().map(|x| x.as_f64()).collect();
                let p = Pchip::new(xs, vs)?;
                Self::from_fn(grid, |x| T::lit(p.eval(x.as_f64())))
            }
        }
    }
}
