//! Hilbert-Schmidt norms and regularity probes of the stochastic integrand.
//!
//! The integrand `B(X)` maps a noise basis element to
//! `sigma N^{-1/2} h_delta(rho)` times that element on one momentum slot, so
//! its squared Hilbert-Schmidt norm over the covariance-weighted basis is
//! `d sigma^2 / N * sum_j alpha_{j,s,eps} |h_delta(rho) f_{j,s}|_{H^s}^2`.
//! Expanding the trigonometric multiplication reduces the double sum to the
//! convolution form
//! `sum_j lambda_j sum_k (1 + |k|^2)^s |g-hat(k - j)|^2` with
//! `g = h_delta(rho)`, which is what is evaluated here: mathematically
//! identical, and linear instead of quadratic in the grid size for smooth
//! fields.

use super::regularisation::RegularisationSpec;
use crate::error::{Error, Result};
use crate::fields::ScalarField;
use crate::spectrum::{suggest_j_max, EigenSpectrum};

/// `sum_j lambda_{j,eps} sum_m (1 + |j + m|^2)^s |g-hat(m)|^2` over the
/// adaptive lattice window; coefficients at rounding-noise level are
/// dropped from the inner sum.
fn weighted_multiplier_sum(g: &ScalarField, eps: f64, s: f64) -> Result<f64> {
    let grid = g.grid();
    let d = grid.dim();
    let ghat = g.to_spectral();

    // support of g-hat above rounding noise
    let mut max_sq = 0.0f64;
    for c in ghat.coeffs() {
        max_sq = max_sq.max(c.norm_sqr());
    }
    if max_sq == 0.0 {
        return Ok(0.0);
    }
    let cutoff = max_sq * 1e-30;
    let mut support: Vec<(Vec<i64>, f64)> = Vec::new();
    let mut freq = vec![0i64; d];
    let mut max_linf = 0usize;
    for (flat, c) in ghat.coeffs().iter().enumerate() {
        let w = c.norm_sqr();
        if w > cutoff {
            grid.freq_vector(flat, &mut freq);
            max_linf = max_linf.max(
                freq.iter()
                    .map(|f| f.unsigned_abs() as usize)
                    .max()
                    .unwrap(),
            );
            support.push((freq.clone(), w));
        }
    }

    let j_max = suggest_j_max(eps, s)? + max_linf;
    let spectrum = EigenSpectrum::build(eps, d, j_max)?;

    // walk the signed lattice |j|_inf <= j_max with an axis recursion
    fn recurse(
        spectrum: &EigenSpectrum,
        support: &[(Vec<i64>, f64)],
        s: f64,
        j: &mut Vec<i64>,
        axis: usize,
        lambda_partial: f64,
        acc: &mut f64,
    ) {
        let j_max = spectrum.j_max() as i64;
        if axis == j.len() {
            let mut inner = 0.0;
            for (m, w) in support {
                let mut n2 = 0i64;
                for (jl, ml) in j.iter().zip(m) {
                    let t = jl + ml;
                    n2 += t * t;
                }
                inner += w * (1.0 + n2 as f64).powf(s);
            }
            *acc += lambda_partial * inner;
            return;
        }
        for jl in -j_max..=j_max {
            let lam = spectrum.axis_eigenvalue(jl);
            if lam == 0.0 {
                continue;
            }
            j[axis] = jl;
            recurse(spectrum, support, s, j, axis + 1, lambda_partial * lam, acc);
        }
        j[axis] = 0;
    }

    let mut acc = 0.0;
    let mut j = vec![0i64; d];
    recurse(&spectrum, &support, s, &mut j, 0, 1.0, &mut acc);
    Ok(acc)
}

/// Squared Hilbert-Schmidt norm of the stochastic integrand at the given
/// density, `|B|^2 = d sigma^2 / N * (weighted multiplier sum of h_delta(rho))`.
pub fn noise_hs_norm(
    rho: &ScalarField,
    reg: &RegularisationSpec,
    sigma: f64,
    n_particles: u64,
    eps: f64,
    s: f64,
) -> Result<f64> {
    if n_particles == 0 {
        return Err(Error::Domain("noise particle count must be >= 1".into()));
    }
    let d = rho.grid().dim() as f64;
    let g = reg.apply(rho);
    Ok(d * sigma * sigma / n_particles as f64 * weighted_multiplier_sum(&g, eps, s)?)
}

/// Local-Lipschitz probe: the ratio
/// `|B(u1) - B(u2)|_{HS} / |u1 - u2|_{H^s}`, i.e. the same weighted sum
/// applied to `h_delta(u1) - h_delta(u2)`.
pub fn noise_lipschitz_probe(
    u1: &ScalarField,
    u2: &ScalarField,
    reg: &RegularisationSpec,
    sigma: f64,
    n_particles: u64,
    eps: f64,
    s: f64,
) -> Result<f64> {
    let denom = u1.sub(u2)?.hs_norm(s);
    if denom == 0.0 {
        return Err(Error::ZeroDenominator(
            "Lipschitz probe needs distinct inputs".into(),
        ));
    }
    let d = u1.grid().dim() as f64;
    let diff = reg.apply(u1).sub(&reg.apply(u2))?;
    let hs_sq = d * sigma * sigma / n_particles as f64 * weighted_multiplier_sum(&diff, eps, s)?;
    Ok(hs_sq.sqrt() / denom)
}
