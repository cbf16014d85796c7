//! Exact semigroup propagator of the damped-wave drift operator.
//!
//! The linear drift `A X = (-div j, -gamma j - c grad rho)` with
//! `c = sigma^2/(2 gamma)` diagonalises per Fourier mode. The zero mode
//! decouples (`rho` frozen, `j` damped); every other mode splits into a
//! transverse part (pure damping) and a longitudinal 2x2 block with
//! eigenvalues `mu = (-gamma +- sqrt(gamma^2 - 4 c |k|^2))/2`, exponentiated
//! in closed form. All branches are evaluated in overflow-safe scaled form,
//! and the double root is handled by the series limit.

use crate::error::{Error, Result};
use crate::fields::{SpectralField, TorusGrid};
use rustfft::num_complex::Complex64;

/// Relative discriminant threshold below which the double-root series is
/// used; avoids catastrophic cancellation near `gamma^2 = 4 c |k|^2`.
pub const DOUBLE_ROOT_SWITCH: f64 = 1e-10;

/// `e^{-gamma t/2} cosh(omega t)` and `e^{-gamma t/2} sinh(omega t)/omega`
/// continued through the oscillatory and double-root regimes.
fn scaled_cosh_sinh(disc: f64, gamma: f64, t: f64) -> (f64, f64) {
    if disc.abs() <= DOUBLE_ROOT_SWITCH * gamma * gamma {
        // double root: cosh -> 1, sinh(omega t)/omega -> t, with the first
        // series corrections in disc t^2 (which is at most ~1e-10 (gamma t)^2)
        let x = 0.25 * disc * t * t;
        let e = (-0.5 * gamma * t).exp();
        (e * (1.0 + 0.5 * x), e * t * (1.0 + x / 6.0))
    } else if disc > 0.0 {
        let omega = 0.5 * disc.sqrt(); // omega < gamma/2, exponents stay <= 0
        let ep = ((omega - 0.5 * gamma) * t).exp();
        let em = ((-omega - 0.5 * gamma) * t).exp();
        (0.5 * (ep + em), 0.5 * (ep - em) / omega)
    } else {
        let omega = 0.5 * (-disc).sqrt();
        let e = (-0.5 * gamma * t).exp();
        let (s, c) = (omega * t).sin_cos();
        let sh = if omega * t.abs() < 1e-8 { t } else { s / omega };
        (e * c, e * sh)
    }
}

/// Exact flow of one longitudinal mode
/// `d/dt (rho, u) = (-i|k| u, -i c |k| rho - gamma u)` over time `t >= 0`.
pub fn mode_propagate(
    rho: Complex64,
    u: Complex64,
    k_norm: f64,
    t: f64,
    gamma: f64,
    c: f64,
) -> (Complex64, Complex64) {
    let disc = gamma * gamma - 4.0 * c * k_norm * k_norm;
    let (ch, sh) = scaled_cosh_sinh(disc, gamma, t);
    let half_gamma_sh = 0.5 * gamma * sh;
    let a = Complex64::new(0.0, -k_norm * sh);
    let b = Complex64::new(0.0, -c * k_norm * sh);
    let rho_out = (ch + half_gamma_sh) * rho + a * u;
    let u_out = b * rho + (ch - half_gamma_sh) * u;
    (rho_out, u_out)
}

/// Apply `e^{A t}` to a spectral density/momentum pair in place.
pub fn propagator_apply(
    rho: &mut SpectralField,
    momentum: &mut [SpectralField],
    t: f64,
    gamma: f64,
    c: f64,
) -> Result<()> {
    if t < 0.0 {
        return Err(Error::Domain(format!(
            "propagation time must be >= 0, got {t}"
        )));
    }
    let grid: TorusGrid = rho.grid();
    let d = grid.dim();
    if momentum.len() != d {
        return Err(Error::SizeMismatch(format!(
            "{} momentum components in dimension {d}",
            momentum.len()
        )));
    }
    for m in momentum.iter() {
        if m.grid() != grid {
            return Err(Error::SizeMismatch(
                "pair components on different grids".into(),
            ));
        }
    }
    let damp = (-gamma * t).exp();
    let mut freq = vec![0i64; d];
    let mut khat = vec![0.0f64; d];
    for flat in 0..grid.len() {
        grid.freq_vector(flat, &mut freq);
        let n2: i64 = freq.iter().map(|&f| f * f).sum();
        if n2 == 0 {
            for m in momentum.iter_mut() {
                m.coeffs_mut()[flat] *= damp;
            }
            continue;
        }
        let k_norm = (n2 as f64).sqrt();
        for (kh, &f) in khat.iter_mut().zip(&freq) {
            *kh = f as f64 / k_norm;
        }
        // longitudinal projection
        let mut u = Complex64::default();
        for (m, &kh) in momentum.iter().zip(&khat) {
            u += m.coeffs()[flat] * kh;
        }
        let r = rho.coeffs()[flat];
        let (r_new, u_new) = mode_propagate(r, u, k_norm, t, gamma, c);
        rho.coeffs_mut()[flat] = r_new;
        for (m, &kh) in momentum.iter_mut().zip(&khat) {
            let cur = m.coeffs()[flat];
            let transverse = cur - u * kh;
            m.coeffs_mut()[flat] = transverse * damp + u_new * kh;
        }
    }
    Ok(())
}

/// Per-mode weighted energy `c |rho|^2 + |u|^2`, the quantity the propagator
/// never increases when `c = sigma^2/(2 gamma)`.
pub fn mode_energy(rho: Complex64, u: Complex64, c: f64) -> f64 {
    c * rho.norm_sqr() + u.norm_sqr()
}
