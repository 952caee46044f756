//! Scattering theory for one-dimensional Schrödinger operators `H = -d²/dx² + V`.

pub mod error;
pub mod fourier;
pub mod grid;
pub mod fit;
pub mod interp;
pub mod jost;
pub mod kernels;
pub mod liouville;
pub mod oracles;
pub mod potential;
pub mod propagator;
pub mod quad;
pub mod resolvent;
pub mod scalar;
pub mod signal;
pub mod waveop;

pub use error::{Result, ScatterError};
pub use grid::Grid;
pub use potential::SampledPotential;
pub use scalar::{Real, C};

pub type Grid64 = Grid<f64>;
pub type Potential64 = SampledPotential<f64>;
pub type Potential32 = SampledPotential<f32>;
pub use signal::ComplexSignal;
