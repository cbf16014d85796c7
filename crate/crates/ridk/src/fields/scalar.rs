//! Real scalar fields on the torus grid with their spectral view.
//!
//! Coefficient convention: `u-hat_j = (2 pi)^{-d} \int u e^{-i j.x} dx`,
//! discretised as the forward DFT divided by `M^d`. Under it the constant 1
//! has `u-hat_0 = 1`, convolution picks up a `(2 pi)^d` factor, and
//! `|u|_{H^0}^2 = (2 pi)^{-d} \int |u|^2`.

use super::fft::fft_nd;
use super::grid::TorusGrid;
use crate::error::{Error, Result};
use rustfft::num_complex::Complex64;
use rustfft::FftDirection;

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: TorusGrid,
    values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: TorusGrid,
    coeffs: Vec<Complex64>,
}

impl ScalarField {
    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: TorusGrid, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.len()],
        }
    }

    /// Sample a function of the node coordinates.
    pub fn from_fn<F: FnMut(&[f64]) -> f64>(grid: TorusGrid, mut f: F) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for flat in 0..grid.len() {
            values.push(f(&grid.node(flat)));
        }
        Self { grid, values }
    }

    pub fn from_values(grid: TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::SizeMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Supremum norm over the grid.
    pub fn c0_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Grid quadrature of `u` (trapezoidal = exact for band-limited data).
    pub fn integral(&self) -> f64 {
        let cell = self.grid.spacing().powi(self.grid.dim() as i32);
        self.values.iter().sum::<f64>() * cell
    }

    /// Grid quadrature of `u^2`.
    pub fn l2_sq(&self) -> f64 {
        let cell = self.grid.spacing().powi(self.grid.dim() as i32);
        self.values.iter().map(|v| v * v).sum::<f64>() * cell
    }

    pub fn scale(&mut self, c: f64) {
        for v in &mut self.values {
            *v *= c;
        }
    }

    pub fn add_assign(&mut self, other: &ScalarField) -> Result<()> {
        self.check_grid(other)?;
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b;
        }
        Ok(())
    }

    pub fn sub(&self, other: &ScalarField) -> Result<ScalarField> {
        self.check_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Ok(ScalarField {
            grid: self.grid,
            values,
        })
    }

    pub fn pointwise_mul(&self, other: &ScalarField) -> Result<ScalarField> {
        self.check_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .collect();
        Ok(ScalarField {
            grid: self.grid,
            values,
        })
    }

    pub fn map<F: FnMut(f64) -> f64>(&self, f: F) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().copied().map(f).collect(),
        }
    }

    fn check_grid(&self, other: &ScalarField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::SizeMismatch("fields live on different grids".into()));
        }
        Ok(())
    }

    /// Forward transform under the `(2 pi)^{-d} \int` coefficient convention.
    pub fn to_spectral(&self) -> SpectralField {
        let mut coeffs: Vec<Complex64> = self
            .values
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        let g = self.grid;
        fft_nd(
            &mut coeffs,
            g.points_per_axis(),
            g.dim(),
            FftDirection::Forward,
        );
        let norm = 1.0 / g.len() as f64;
        for c in &mut coeffs {
            *c *= norm;
        }
        SpectralField { grid: g, coeffs }
    }

    /// `H^s` norm via the spectral representation.
    pub fn hs_norm(&self, s: f64) -> f64 {
        self.to_spectral().hs_norm(s)
    }
}

impl SpectralField {
    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn from_coeffs(grid: TorusGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::SizeMismatch(format!(
                "{} coefficients for a grid of {} modes",
                coeffs.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, coeffs })
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient at a signed frequency vector.
    pub fn coeff_at(&self, freq: &[i64]) -> Complex64 {
        let multi: Vec<usize> = freq.iter().map(|&f| self.grid.bin_of_freq(f)).collect();
        self.coeffs[self.grid.flat_index(&multi)]
    }

    pub fn set_coeff(&mut self, freq: &[i64], value: Complex64) {
        let multi: Vec<usize> = freq.iter().map(|&f| self.grid.bin_of_freq(f)).collect();
        let idx = self.grid.flat_index(&multi);
        self.coeffs[idx] = value;
    }

    /// Inverse transform; imaginary parts (round-off for Hermitian data) are
    /// dropped.
    pub fn to_field(&self) -> ScalarField {
        let mut work = self.coeffs.clone();
        let g = self.grid;
        fft_nd(
            &mut work,
            g.points_per_axis(),
            g.dim(),
            FftDirection::Inverse,
        );
        ScalarField {
            grid: g,
            values: work.iter().map(|c| c.re).collect(),
        }
    }

    /// `( sum_j |u-hat_j|^2 (1 + |j|^2)^s )^{1/2}` over the resolved modes.
    pub fn hs_norm(&self, s: f64) -> f64 {
        let mut acc = 0.0;
        for (flat, c) in self.coeffs.iter().enumerate() {
            let n2 = self.grid.freq_norm_sq(flat);
            acc += c.norm_sqr() * (1.0 + n2 as f64).powf(s);
        }
        acc.sqrt()
    }

    /// `H^s` inner product (real part; exact for real-valued fields).
    pub fn hs_inner(&self, other: &SpectralField, s: f64) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::SizeMismatch("fields live on different grids".into()));
        }
        let mut acc = 0.0;
        for (flat, (a, b)) in self.coeffs.iter().zip(&other.coeffs).enumerate() {
            let n2 = self.grid.freq_norm_sq(flat);
            acc += (a * b.conj()).re * (1.0 + n2 as f64).powf(s);
        }
        Ok(acc)
    }

    /// Spectral partial derivative along an axis: multiply by `i k_axis`.
    /// The Nyquist bin is zeroed, as usual for odd-order derivatives of real
    /// data.
    pub fn derivative_axis(&self, axis: usize) -> SpectralField {
        let g = self.grid;
        let m = g.points_per_axis();
        let mut out = self.coeffs.clone();
        let mut multi = vec![0usize; g.dim()];
        for (flat, c) in out.iter_mut().enumerate() {
            g.multi_index(flat, &mut multi);
            let bin = multi[axis];
            if bin == m / 2 {
                *c = Complex64::default();
            } else {
                let k = g.signed_freq(bin) as f64;
                *c *= Complex64::new(0.0, k);
            }
        }
        SpectralField {
            grid: g,
            coeffs: out,
        }
    }

    /// Divergence of a spectral vector field.
    pub fn divergence(components: &[SpectralField]) -> Result<SpectralField> {
        let first = components
            .first()
            .ok_or_else(|| Error::SizeMismatch("divergence of an empty vector".into()))?;
        let mut out = SpectralField::zeros(first.grid);
        for (axis, comp) in components.iter().enumerate() {
            if comp.grid != first.grid {
                return Err(Error::SizeMismatch(
                    "vector components on different grids".into(),
                ));
            }
            let d = comp.derivative_axis(axis);
            for (a, b) in out.coeffs.iter_mut().zip(&d.coeffs) {
                *a += b;
            }
        }
        Ok(out)
    }

    /// Zero every mode with `|k|_inf` beyond `m/3` (the 2/3 dealiasing rule).
    pub fn dealias(&mut self) {
        let g = self.grid;
        let cut = (g.points_per_axis() / 3) as i64;
        let mut freq = vec![0i64; g.dim()];
        for flat in 0..self.coeffs.len() {
            g.freq_vector(flat, &mut freq);
            if freq.iter().any(|&f| f.abs() > cut) {
                self.coeffs[flat] = Complex64::default();
            }
        }
    }

    pub fn scale(&mut self, c: f64) {
        for v in &mut self.coeffs {
            *v *= c;
        }
    }

    pub fn add_assign(&mut self, other: &SpectralField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::SizeMismatch("fields live on different grids".into()));
        }
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
        Ok(())
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        if self.grid != other.grid {
            return Err(Error::SizeMismatch("fields live on different grids".into()));
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        Ok(SpectralField {
            grid: self.grid,
            coeffs,
        })
    }
}

/// Convolution `f * g` via the spectral product with the `(2 pi)^d` factor of
/// the coefficient convention.
pub fn convolve(f: &ScalarField, g: &ScalarField) -> Result<ScalarField> {
    let fs = f.to_spectral();
    let gs = g.to_spectral();
    Ok(convolve_spectral(&fs, &gs)?.to_field())
}

/// Spectral-side convolution: `(f * g)-hat = (2 pi)^d f-hat g-hat`.
pub fn convolve_spectral(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    if f.grid != g.grid {
        return Err(Error::SizeMismatch(
            "convolution of fields on different grids".into(),
        ));
    }
    let factor = (2.0 * std::f64::consts::PI).powi(f.grid.dim() as i32);
    let coeffs = f
        .coeffs
        .iter()
        .zip(&g.coeffs)
        .map(|(a, b)| a * b * factor)
        .collect();
    Ok(SpectralField {
        grid: f.grid,
        coeffs,
    })
}
