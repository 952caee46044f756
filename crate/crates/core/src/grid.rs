use serde::{Deserialize, Serialize};

use crate::error::{Result, ScatterError};
use crate::scalar::Real;

/// Uniform grid of `n` points on `[x_min, x_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid<T> {
    pub x_min: T,
    pub x_max: T,
    pub n: usize,
}

impl<T: Real> Grid<T> {
    pub fn new(x_min: T, x_max: T, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(ScatterError::input(format!("grid needs at least 3 points, got {n}")));
        }
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(ScatterError::input("grid bounds must be finite with x_min < x_max"));
        }
        Ok(Self { x_min, x_max, n })
    }

    /// The default computational grid `[-40, 40]` with 4096 points.
    pub fn standard() -> Self {
        Self { x_min: T::lit(-40.0), x_max: T::lit(40.0), n: 4096 }
    }

    #[inline]
    pub fn h(&self) -> T {
        (self.x_max - self.x_min) / T::from_count(self.n - 1)
    }

    #[inline]
    pub fn x(&self, i: usize) -> T {
        self.x_min + T::from_count(i) * self.h()
    }

    pub fn points(&self) -> Vec<T> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Index of the grid point closest to `x` (clamped to the grid).
    pub fn nearest(&self, x: T) -> usize {
        let s = ((x - self.x_min) / self.h()).round();
        if s <= T::zero() {
            0
        } else {
            s.to_usize().unwrap_or(self.n - 1).min(self.n - 1)
        }
    }

    pub fn contains(&self, x: T) -> bool {
        x >= self.x_min && x <= self.x_max
    }

    /// Trapezoid weight of node `i`.
    #[inline]
    pub fn weight(&self, i: usize) -> T {
        crate::quad::trapezoid_weight(i, self.n, self.h())
    }

    /// The mirrored grid `[-x_max, -x_min]`.
    pub fn reflected(&self) -> Self {
        Self { x_min: -self.x_max, x_max: -self.x_min, n: self.n }
    }

    /// Grid with the same bounds and `2n - 1` points (every old node retained).
    pub fn refined(&self) -> Self {
        Self { n: 2 * self.n - 1, ..*self }
    }

    pub fn cast<U: Real>(&self) -> Grid<U> {
        Grid { x_min: U::lit(self.x_min.as_f64()), x_max: U::lit(self.x_max.as_f64()), n: self.n }
    }
}
