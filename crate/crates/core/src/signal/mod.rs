//! Framing, harmonic basis construction and fit ratios over the pitch grid.

mod basis;
mod fit;
mod frame;
mod grid;

pub use basis::{build_basis, coefficient_estimate, fit_ratio, projected_energy, HarmonicBasis};
pub use fit::{fit_ratio_grid, FitRatioEngine, FitRatioSurface};
pub use frame::{frame_signal, samples_for_ms, Frame};
pub use grid::{make_pitch_grid, PitchGrid};
