//! The separable von Mises kernel on the d-torus and its Fourier analysis.
//!
//! The kernel is the periodic analogue of a Gaussian bump,
//! `w_eps(x) = Z_eps^{-d} exp(-sum_l sin^2(x_l/2) / (eps^2/2))`,
//! a product over axes. Its Fourier coefficients are Bessel ratios, which is
//! what ties the whole noise spectrum to the `specfun` module.

use crate::error::{Error, Result};
use crate::specfun;

/// Particle width and spatial dimension; defines the kernel and all spectra
/// derived from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    eps: f64,
    dim: usize,
    /// Memoised per-axis normalisation `Z_eps`.
    z_axis: f64,
}

impl KernelSpec {
    pub fn new(eps: f64, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("kernel dimension must be >= 1".into()));
        }
        let z_axis = specfun::kernel_normalisation(eps)?;
        Ok(Self { eps, dim, z_axis })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Per-axis normalisation constant `Z_eps`.
    pub fn normalisation(&self) -> f64 {
        self.z_axis
    }

    /// Same width, different dimension.
    pub fn with_dim(&self, dim: usize) -> Result<Self> {
        Self::new(self.eps, dim)
    }

    /// Kernel with width scaled by `factor` (e.g. `sqrt(2)` for the noise
    /// covariance kernel).
    pub fn scaled_width(&self, factor: f64) -> Result<Self> {
        Self::new(self.eps * factor, self.dim)
    }

    /// Unnormalised 1-d profile `exp(-sin^2(x/2)/(eps^2/2))`; periodic by
    /// construction, no reduction of `x` needed.
    fn profile(&self, x: f64) -> f64 {
        let s = (0.5 * x).sin();
        (-(s * s) / (0.5 * self.eps * self.eps)).exp()
    }

    /// One axis factor `Z_eps^{-1} exp(-sin^2(x/2)/(eps^2/2))`.
    pub fn evaluate_1d(&self, x: f64) -> f64 {
        self.profile(x) / self.z_axis
    }

    /// `w_eps(x)` for `x` on the d-torus.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::SizeMismatch(format!(
                "point has {} components, kernel dimension is {}",
                x.len(),
                self.dim
            )));
        }
        let mut s = 0.0;
        for &c in x {
            let h = (0.5 * c).sin();
            s += h * h;
        }
        Ok((-s / (0.5 * self.eps * self.eps)).exp() / self.z_axis.powi(self.dim as i32))
    }

    /// One-axis Fourier coefficient table
    /// `(2 pi)^{-1} I_{|j|}(1/eps^2) / I_0(1/eps^2)` for `j = 0..=j_max`.
    pub fn fourier_axis_table(&self, j_max: usize) -> Result<Vec<f64>> {
        let x = 1.0 / (self.eps * self.eps);
        let mut t = specfun::ratio_table(j_max, x)?;
        let c = 1.0 / (2.0 * std::f64::consts::PI);
        for v in &mut t {
            *v *= c;
        }
        Ok(t)
    }

    /// `w-hat_eps(j) = (2 pi)^{-d} prod_l I_{|j_l|}(1/eps^2)/I_0(1/eps^2)`;
    /// even in each component of `j`.
    pub fn fourier_coefficient(&self, j: &[i64]) -> Result<f64> {
        if j.len() != self.dim {
            return Err(Error::SizeMismatch(format!(
                "mode has {} components, kernel dimension is {}",
                j.len(),
                self.dim
            )));
        }
        let x = 1.0 / (self.eps * self.eps);
        let mut acc = (2.0 * std::f64::consts::PI).powi(-(self.dim as i32));
        for &jl in j {
            acc *= specfun::bessel_ratio(jl.unsigned_abs() as u32, x)?;
        }
        Ok(acc)
    }
}

/// The convolution (smoothing) operator of the kernel applied spectrally:
/// each mode is multiplied by its per-axis Bessel-ratio eigenvalue. Exact on
/// the resolved modes for any width, including widths far below the grid
/// spacing.
pub fn smooth_spectral(
    field: &crate::fields::SpectralField,
    spec: &KernelSpec,
) -> Result<crate::fields::SpectralField> {
    let grid = field.grid();
    if grid.dim() != spec.dim() {
        return Err(Error::SizeMismatch(format!(
            "field dimension {} vs kernel dimension {}",
            grid.dim(),
            spec.dim()
        )));
    }
    let x = 1.0 / (spec.eps() * spec.eps());
    let ratios = crate::specfun::ratio_table(grid.points_per_axis() / 2, x)?;
    let mut out = field.clone();
    let mut freq = vec![0i64; grid.dim()];
    for flat in 0..grid.len() {
        grid.freq_vector(flat, &mut freq);
        let mut mult = 1.0;
        for &f in &freq {
            mult *= ratios[f.unsigned_abs() as usize];
        }
        out.coeffs_mut()[flat] *= mult;
    }
    Ok(out)
}

/// Residual of the approximate multiplication rule for von Mises kernels,
/// `|w_eps(x1-q) w_eps(x2-q) - w_{sqrt2 eps}(x1-x2) w_{eps/sqrt2}((x1+x2)/2 - q)|`.
pub fn multiplication_rule_residual(
    x1: &[f64],
    x2: &[f64],
    q: &[f64],
    spec: &KernelSpec,
) -> Result<f64> {
    let d = spec.dim();
    if x1.len() != d || x2.len() != d || q.len() != d {
        return Err(Error::SizeMismatch(
            "multiplication rule points must share the kernel dimension".into(),
        ));
    }
    let wide = spec.scaled_width(std::f64::consts::SQRT_2)?;
    let narrow = spec.scaled_width(1.0 / std::f64::consts::SQRT_2)?;
    let diff: Vec<f64> = x1.iter().zip(x2).map(|(a, b)| a - b).collect();
    let mid: Vec<f64> = x1
        .iter()
        .zip(x2)
        .zip(q)
        .map(|((a, b), c)| 0.5 * (a + b) - c)
        .collect();
    let o1: Vec<f64> = x1.iter().zip(q).map(|(a, c)| a - c).collect();
    let o2: Vec<f64> = x2.iter().zip(q).map(|(a, c)| a - c).collect();
    let lhs = spec.evaluate(&o1)? * spec.evaluate(&o2)?;
    let rhs = wide.evaluate(&diff)? * narrow.evaluate(&mid)?;
    Ok((lhs - rhs).abs())
}
