//! Sampling of the spatially coloured Q-Wiener increments.
//!
//! Each of the `d` momentum components receives an independent increment
//! with per-mode variance `lambda_{j,eps} dt` on the real trigonometric
//! basis; equivalently, Hermitian complex coefficients with split variance.
//! The Sobolev weights of the covariance expansion cancel against the basis
//! normalisation, so the sampled field does not depend on the diagnostic
//! regularity index at all - it is equal in law to the width-`sqrt2 eps`
//! smoothing operator's square root applied to a white-noise increment, with
//! spatial covariance `dt * w_{sqrt2 eps}(x - y)`.

use crate::error::{Error, Result};
use crate::fields::{SpectralField, TorusGrid};
use crate::spectrum::EigenSpectrum;
use rand::Rng;
use rustfft::num_complex::Complex64;

/// One increment: `d` independent spectral Gaussian fields, real-valued in
/// physical space.
#[derive(Debug, Clone)]
pub struct NoiseIncrement {
    pub components: Vec<SpectralField>,
}

impl NoiseIncrement {
    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            components: (0..grid.dim())
                .map(|_| SpectralField::zeros(grid))
                .collect(),
        }
    }

    /// Accumulate another increment (used to aggregate fine-step noise into
    /// coarse-step noise for refinement studies).
    pub fn add_assign(&mut self, other: &NoiseIncrement) -> Result<()> {
        if self.components.len() != other.components.len() {
            return Err(Error::SizeMismatch(
                "increment component counts differ".into(),
            ));
        }
        for (a, b) in self.components.iter_mut().zip(&other.components) {
            a.add_assign(b)?;
        }
        Ok(())
    }
}

/// Draw one increment over a step `dt` on `grid`, using a prebuilt per-axis
/// eigenvalue table for the width-`sqrt2 eps` covariance.
///
/// Modes at the Nyquist frequency are left empty; the grid-resolution rule of
/// the solver keeps their eigenvalues negligible. The lattice is walked in a
/// fixed lexicographic order, so a seeded generator reproduces the increment
/// bit for bit.
pub fn sample_noise_increment_with<R: Rng + ?Sized>(
    spectrum: &EigenSpectrum,
    dt: f64,
    grid: TorusGrid,
    rng: &mut R,
) -> Result<NoiseIncrement> {
    if dt <= 0.0 || !dt.is_finite() {
        return Err(Error::Domain(format!(
            "time step must be positive, got {dt}"
        )));
    }
    if spectrum.dim() != grid.dim() {
        return Err(Error::SizeMismatch(format!(
            "spectrum dimension {} vs grid dimension {}",
            spectrum.dim(),
            grid.dim()
        )));
    }
    let d = grid.dim();
    let m = grid.points_per_axis();
    if spectrum.j_max() + 1 < m / 2 {
        return Err(Error::TruncationInsufficient {
            requested: spectrum.j_max(),
            suggested: m / 2,
        });
    }
    let two_pi_d = (2.0 * std::f64::consts::PI).powi(d as i32);
    let normal = rand_distr::StandardNormal;

    let mut components = Vec::with_capacity(d);
    let mut freq = vec![0i64; d];
    let mut neg_bins = vec![0usize; d];
    for _ in 0..d {
        let mut field = SpectralField::zeros(grid);
        for flat in 0..grid.len() {
            grid.freq_vector(flat, &mut freq);
            if freq.iter().any(|&f| f == (m / 2) as i64) {
                continue; // Nyquist row stays empty
            }
            if freq.iter().all(|&f| f == 0) {
                let xi: f64 = rng.sample(normal);
                field.coeffs_mut()[flat] = Complex64::new((dt / two_pi_d).sqrt() * xi, 0.0);
                continue;
            }
            // draw once per conjugate pair at the canonical representative
            let first = freq.iter().copied().find(|&f| f != 0).unwrap();
            if first < 0 {
                continue;
            }
            let mut lambda = 1.0;
            for &f in &freq {
                lambda *= spectrum.axis_eigenvalue(f);
            }
            if lambda == 0.0 {
                continue;
            }
            let sd = (lambda * dt / (2.0 * two_pi_d)).sqrt();
            let a: f64 = rng.sample(normal);
            let b: f64 = rng.sample(normal);
            for (nb, &f) in neg_bins.iter_mut().zip(&freq) {
                *nb = grid.bin_of_freq(-f);
            }
            let conj_flat = grid.flat_index(&neg_bins);
            field.coeffs_mut()[flat] = Complex64::new(sd * a, sd * b);
            field.coeffs_mut()[conj_flat] = Complex64::new(sd * a, -sd * b);
        }
        components.push(field);
    }
    Ok(NoiseIncrement { components })
}

/// Convenience entry: build the eigenvalue table for particle width `eps`
/// and sample.
pub fn sample_noise_increment<R: Rng + ?Sized>(
    eps: f64,
    dt: f64,
    grid: TorusGrid,
    rng: &mut R,
) -> Result<NoiseIncrement> {
    let spectrum = EigenSpectrum::build(eps, grid.dim(), grid.points_per_axis() / 2)?;
    sample_noise_increment_with(&spectrum, dt, grid, rng)
}
