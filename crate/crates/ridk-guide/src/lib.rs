//! Compiled form of the guide under `book/`: every chapter is included as
//! rustdoc, so `cargo test --doc -p ridk-guide` runs each code block of the
//! book as a doc-test. Editing a chapter and breaking a snippet breaks the
//! build, which is the mechanism keeping the prose and the library in sync.
//!
//! The rendered book is built separately with `mdbook build book`.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/kernel-and-spectrum.md")]
pub mod kernel_and_spectrum {}

#[doc = include_str!("../../../book/src/sobolev-spaces.md")]
pub mod sobolev_spaces {}

#[doc = include_str!("../../../book/src/damped-wave-propagator.md")]
pub mod damped_wave_propagator {}

#[doc = include_str!("../../../book/src/coloured-noise.md")]
pub mod coloured_noise {}

#[doc = include_str!("../../../book/src/particle-system.md")]
pub mod particle_system {}

#[doc = include_str!("../../../book/src/spde-solver.md")]
pub mod spde_solver {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}

#[doc = include_str!("../../../book/src/appendix-identities.md")]
pub mod appendix_identities {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
