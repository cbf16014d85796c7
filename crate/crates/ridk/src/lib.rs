//! Numerical laboratory for the regularised inertial Dean-Kawasaki (RIDK)
//! model on the d-dimensional torus.
//!
//! The crate simulates two coupled descriptions of the same system of `N`
//! weakly interacting inertial particles of width `eps`:
//!
//! * the microscopic underdamped Langevin dynamics ([`particles`]), and
//! * the mesoscopic RIDK stochastic PDE for the density/momentum pair
//!   ([`solver`]), driven by a Q-Wiener noise whose covariance spectrum is
//!   built from modified-Bessel-function ratios ([`specfun`], [`spectrum`]).
//!
//! Everything measurable at desk scale is wired to an experiment layer
//! ([`experiments`]) with deterministic seeding and CSV/JSON reporting: the
//! Bessel-ratio spectrum, the trace scaling `eps^{-(2s+d)}`, semigroup
//! contraction, vanishing-noise convergence towards the noise-free dynamics,
//! micro/meso fluctuation scaling, and the combinatorial identities behind
//! the regularised square root ([`combinatorics`]).
//!
//! See the companion guide under `book/` for a narrative walk-through with
//! runnable snippets.

pub mod combinatorics;
pub mod config;
pub mod error;
pub mod experiments;
pub mod fields;
pub mod kernel;
pub mod particles;
pub mod report;
pub mod solver;
pub mod specfun;
pub mod spectrum;

pub use error::{Error, Result};
