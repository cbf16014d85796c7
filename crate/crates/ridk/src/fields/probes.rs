//! Empirical probes for the embedding and multiplication constants.
//!
//! The sup-norm embedding constant of `H^s` into `C^0` (for `s > d/2`) and
//! the multiplication constant `|uv| <= K |u||v|` exist but are not
//! quantified; these probes record empirical ceilings over random
//! band-limited samples and let tests check the ceilings stay put when the
//! band grows.

use super::grid::TorusGrid;
use super::scalar::{ScalarField, SpectralField};
use crate::error::{Error, Result};
use rand::Rng;
use rustfft::num_complex::Complex64;

/// Random real field with i.i.d. standard-normal coefficients on the modes
/// `0 < |k|_inf <= band` (zero mean).
pub fn random_band_limited<R: Rng + ?Sized>(
    grid: TorusGrid,
    band: usize,
    rng: &mut R,
) -> Result<ScalarField> {
    if band >= grid.points_per_axis() / 2 {
        return Err(Error::Domain(format!(
            "band {band} does not fit a grid of {} points per axis",
            grid.points_per_axis()
        )));
    }
    let d = grid.dim();
    let mut s = SpectralField::zeros(grid);
    let b = band as i64;
    let mut freq = vec![0i64; d];
    let mut neg = vec![0i64; d];
    // lexicographic walk over the band block; draw once per conjugate pair
    let side = 2 * band + 1;
    let total = side.pow(d as u32);
    for flat in 0..total {
        let mut rest = flat;
        for a in (0..d).rev() {
            freq[a] = (rest % side) as i64 - b;
            rest /= side;
        }
        if freq.iter().all(|&f| f == 0) {
            continue;
        }
        // canonical representative: first nonzero component positive
        let first = freq.iter().copied().find(|&f| f != 0).unwrap();
        if first < 0 {
            continue;
        }
        let re: f64 = rng.sample(rand_distr::StandardNormal);
        let im: f64 = rng.sample(rand_distr::StandardNormal);
        for a in 0..d {
            neg[a] = -freq[a];
        }
        s.set_coeff(&freq, Complex64::new(re, im));
        s.set_coeff(&neg, Complex64::new(re, -im));
    }
    Ok(s.to_field())
}

/// Max of `c0_norm / hs_norm` over random band-limited samples. Stays
/// bounded as the band grows precisely because `s > d/2`.
pub fn embedding_probe<R: Rng + ?Sized>(
    grid: TorusGrid,
    band: usize,
    samples: usize,
    s: f64,
    rng: &mut R,
) -> Result<f64> {
    if s <= 0.5 * grid.dim() as f64 {
        return Err(Error::Domain(format!(
            "embedding probe requires s > d/2, got s = {s} in dimension {}",
            grid.dim()
        )));
    }
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let u = random_band_limited(grid, band, rng)?;
        let h = u.hs_norm(s);
        if h > 0.0 {
            worst = worst.max(u.c0_norm() / h);
        }
    }
    Ok(worst)
}

/// `|uv|_{H^s} / (|u|_{H^s} |v|_{H^s})` for one pair.
pub fn multiplication_probe(u: &ScalarField, v: &ScalarField, s: f64) -> Result<f64> {
    let nu = u.hs_norm(s);
    let nv = v.hs_norm(s);
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroDenominator(
            "multiplication probe needs nonzero-norm inputs".into(),
        ));
    }
    let prod = u.pointwise_mul(v)?;
    Ok(prod.hs_norm(s) / (nu * nv))
}

/// Max multiplication ratio over random band-limited pairs.
pub fn multiplication_ceiling<R: Rng + ?Sized>(
    grid: TorusGrid,
    band: usize,
    samples: usize,
    s: f64,
    rng: &mut R,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let u = random_band_limited(grid, band, rng)?;
        let v = random_band_limited(grid, band, rng)?;
        worst = worst.max(multiplication_probe(&u, &v, s)?);
    }
    Ok(worst)
}
