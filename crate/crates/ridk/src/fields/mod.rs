//! Torus grids, spectral transforms, fractional Sobolev norms, convolution,
//! and the weighted energy norm used for contraction tests.

mod fft;
pub mod grid;
pub mod io;
pub mod pair;
pub mod probes;
pub mod scalar;

pub use grid::TorusGrid;
pub use pair::PairState;
pub use probes::{
    embedding_probe, multiplication_ceiling, multiplication_probe, random_band_limited,
};
pub use scalar::{convolve, convolve_spectral, ScalarField, SpectralField};
