//! Eigenstructure of the noise covariance operator in d dimensions,
//! Sobolev-weighted trace sums, and the bound-exponent calculus.
//!
//! The convolution operator with kernel `w_{sqrt2 eps}` is diagonal on the
//! trigonometric tensor basis with eigenvalues
//! `lambda_{j,eps} = prod_l I_{|j_l|}(1/(2 eps^2)) / I_0(1/(2 eps^2))`.
//! The weighted trace `sum_j lambda_{j,eps} (1 + |j|^2)^s` governs the noise
//! magnitude and scales like `eps^{-(2s+d)}`.

use crate::error::{Error, Result};
use crate::specfun;

/// Regularity exponent `s >= 0`, optionally split as `s = d/2 + eta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevIndex {
    s: f64,
}

impl SobolevIndex {
    pub fn new(s: f64) -> Result<Self> {
        if !s.is_finite() || s < 0.0 {
            return Err(Error::Domain(format!(
                "Sobolev index must be finite and >= 0, got {s}"
            )));
        }
        Ok(Self { s })
    }

    /// `s = d/2 + eta`, the embedding-critical offset form. For the
    /// well-posedness experiments `eta` should sit in `(0, 1/2)`.
    pub fn from_offset(dim: usize, eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta < 0.5) {
            return Err(Error::Domain(format!(
                "offset eta must lie in (0, 1/2), got {eta}"
            )));
        }
        Self::new(0.5 * dim as f64 + eta)
    }

    pub fn value(&self) -> f64 {
        self.s
    }
}

/// Critical scaling exponent `theta_c(s) = 2s + d`.
pub fn theta_critical(s: f64, dim: usize) -> f64 {
    2.0 * s + dim as f64
}

/// The eps-exponent of the trace bound
/// `max{2 beta (2s+1), 2 alpha (2s+1), 2 alpha + 4 beta s} + (d - 1)`
/// for an admissible splitting pair `alpha, beta in (0,1)`, `alpha+beta >= 1`.
pub fn bound_exponent(alpha: f64, beta: f64, s: f64, dim: usize) -> Result<f64> {
    let open_unit = |v: f64| v > 0.0 && v < 1.0;
    if !open_unit(alpha) || !open_unit(beta) || alpha + beta < 1.0 {
        return Err(Error::Domain(format!(
            "inadmissible splitting pair (alpha, beta) = ({alpha}, {beta}): \
             need alpha, beta in (0,1) and alpha + beta >= 1"
        )));
    }
    let a = 2.0 * beta * (2.0 * s + 1.0);
    let b = 2.0 * alpha * (2.0 * s + 1.0);
    let c = 2.0 * alpha + 4.0 * beta * s;
    Ok(a.max(b).max(c) + (dim as f64 - 1.0))
}

/// Grid search over admissible `(alpha, beta)` at the given step; returns the
/// minimising pair and its exponent.
pub fn minimise_bound_exponent(s: f64, dim: usize, step: f64) -> (f64, f64, f64) {
    let n = (1.0 / step).round() as usize;
    let mut best = (0.5, 0.5, f64::INFINITY);
    for i in 1..n {
        let alpha = i as f64 * step;
        for k in 1..n {
            let beta = k as f64 * step;
            if alpha + beta < 1.0 {
                continue;
            }
            if let Ok(v) = bound_exponent(alpha, beta, s, dim) {
                if v < best.2 {
                    best = (alpha, beta, v);
                }
            }
        }
    }
    best
}

/// Per-axis truncation such that the weighted tail
/// `lambda_j (1+j^2)^s` drops below `1e-12` of the running 1-d sum.
/// The eigenvalues decay like `exp(-j^2 eps^2)`, so this lands near `8/eps`.
pub fn suggest_j_max(eps: f64, s: f64) -> Result<usize> {
    let x = 0.5 / (eps * eps);
    // generous upper bound for the sweep
    let hard = ((10.0 / eps) as usize).max(64) + 64;
    let lam = specfun::ratio_table(hard, x)?;
    let mut run = 1.0;
    for j in 1..=hard {
        let w = lam[j] * (1.0 + (j * j) as f64).powf(s);
        if w < 1e-12 * run {
            return Ok(j);
        }
        run += 2.0 * w;
    }
    Ok(hard)
}

/// Tabulated per-axis eigenvalues of the width-`sqrt2 eps` convolution
/// operator, with their Sobolev weights available on demand.
#[derive(Debug, Clone)]
pub struct EigenSpectrum {
    eps: f64,
    dim: usize,
    lambda: Vec<f64>,
}

impl EigenSpectrum {
    /// Table up to a caller-chosen per-axis order.
    pub fn build(eps: f64, dim: usize, j_max: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("spectrum dimension must be >= 1".into()));
        }
        let x = 0.5 / (eps * eps);
        let lambda = specfun::ratio_table(j_max, x)?;
        Ok(Self { eps, dim, lambda })
    }

    /// Table truncated by the adaptive tail policy for weight index `s`.
    pub fn adaptive(eps: f64, dim: usize, s: f64) -> Result<Self> {
        let j_max = suggest_j_max(eps, s)?;
        Self::build(eps, dim, j_max)
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn j_max(&self) -> usize {
        self.lambda.len() - 1
    }

    /// 1-d eigenvalue `lambda_{|j|, eps}`; zero beyond the table.
    pub fn axis_eigenvalue(&self, j: i64) -> f64 {
        let a = j.unsigned_abs() as usize;
        self.lambda.get(a).copied().unwrap_or(0.0)
    }

    /// Product eigenvalue for a lattice mode.
    pub fn eigenvalue(&self, j: &[i64]) -> Result<f64> {
        if j.len() != self.dim {
            return Err(Error::SizeMismatch(format!(
                "mode has {} components, spectrum dimension is {}",
                j.len(),
                self.dim
            )));
        }
        Ok(j.iter().map(|&l| self.axis_eigenvalue(l)).product())
    }

    /// Sobolev weight `alpha_{j,s,eps} = (1+|j|^2)^s lambda_{j,eps}`.
    pub fn weight(&self, j: &[i64], s: f64) -> Result<f64> {
        let n2: i64 = j.iter().map(|&l| l * l).sum();
        Ok(self.eigenvalue(j)? * (1.0 + n2 as f64).powf(s))
    }

    pub fn axis_table(&self) -> &[f64] {
        &self.lambda
    }
}

/// Product eigenvalue `prod_l I_{|j_l|}(1/(2 eps^2)) / I_0(1/(2 eps^2))`
/// without building a table.
pub fn eigenvalue(j: &[i64], eps: f64) -> Result<f64> {
    let x = 0.5 / (eps * eps);
    let mut acc = 1.0;
    for &jl in j {
        acc *= specfun::bessel_ratio(jl.unsigned_abs() as u32, x)?;
        if acc == 0.0 {
            break;
        }
    }
    Ok(acc)
}

/// One axis of the trigonometric eigensystem: `cos` for positive orders,
/// `sin` for negative, the constant for zero; L2-orthonormal over the circle.
pub fn trig_axis(j: i64, x: f64) -> f64 {
    use std::f64::consts::PI;
    if j > 0 {
        (1.0 / PI).sqrt() * ((j as f64) * x).cos()
    } else if j < 0 {
        (1.0 / PI).sqrt() * ((j as f64) * x).sin()
    } else {
        (1.0 / (2.0 * PI)).sqrt()
    }
}

/// H^s-orthonormal eigenfunction
/// `f_{j,s}(x) = (2 pi)^{d/2} prod_l e_{j_l}(x_l) (1+|j|^2)^{-s/2}`.
///
/// The `(2 pi)^{d/2}` factor compensates the Fourier-coefficient convention
/// of the H^s inner product, under which the bare trigonometric tensor has
/// norm `(2 pi)^{-d/2}`; with it `|f_{j,s}|_{H^s} = 1` exactly.
pub fn basis_function(j: &[i64], s: f64, x: &[f64]) -> Result<f64> {
    if j.len() != x.len() {
        return Err(Error::SizeMismatch(format!(
            "mode has {} components, point has {}",
            j.len(),
            x.len()
        )));
    }
    let d = j.len();
    let n2: i64 = j.iter().map(|&l| l * l).sum();
    let mut acc =
        (2.0 * std::f64::consts::PI).powf(0.5 * d as f64) * (1.0 + n2 as f64).powf(-0.5 * s);
    for (&jl, &xl) in j.iter().zip(x) {
        acc *= trig_axis(jl, xl);
    }
    Ok(acc)
}

/// Exact truncated lattice trace
/// `sum_{|j|_inf <= j_max} lambda_{j,eps} (1+|j|^2)^s`,
/// with a tail-sufficiency check on the per-axis table.
pub fn sobolev_trace(s: f64, eps: f64, dim: usize, j_max: usize) -> Result<f64> {
    let x = 0.5 / (eps * eps);
    let lam = specfun::ratio_table(j_max, x)?;

    // per-axis weighted tail must be negligible against the running sum
    let mut run = 1.0;
    for j in 1..=j_max {
        run += 2.0 * lam[j] * (1.0 + (j * j) as f64).powf(s);
    }
    let tail = lam[j_max] * (1.0 + (j_max * j_max) as f64).powf(s);
    if tail >= 1e-12 * run {
        return Err(Error::TruncationInsufficient {
            requested: j_max,
            suggested: suggest_j_max(eps, s)?,
        });
    }

    // Octant sum with sign multiplicity 2^{#nonzero components}.
    fn recurse(lam: &[f64], s: f64, axis: usize, dim: usize, partial: f64, n2: u64, out: &mut f64) {
        if axis == dim {
            *out += partial * (1.0 + n2 as f64).powf(s);
            return;
        }
        // j = 0 on this axis
        recurse(lam, s, axis + 1, dim, partial, n2, out);
        for j in 1..lam.len() {
            let w = 2.0 * lam[j] * partial;
            if w == 0.0 {
                break;
            }
            recurse(lam, s, axis + 1, dim, w, n2 + (j * j) as u64, out);
        }
    }
    let mut total = 0.0;
    recurse(&lam, s, 0, dim, 1.0, 0, &mut total);
    Ok(total)
}

/// The factorised majorant from the product structure:
/// `d^{s+1} * [1-d weighted trace] * [1-d unweighted trace]^{d-1}`.
/// An upper bound for [`sobolev_trace`], not an equality.
pub fn factorised_trace_bound(s: f64, eps: f64, dim: usize, j_max: usize) -> Result<f64> {
    let weighted = sobolev_trace(s, eps, 1, j_max)?;
    let plain = sobolev_trace(0.0, eps, 1, j_max)?;
    Ok((dim as f64).powf(s + 1.0) * weighted * plain.powi(dim as i32 - 1))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::SizeMismatch(
            "slope fit needs two same-length series of length >= 2".into(),
        ));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (a, b) in lx.iter().zip(&ly) {
        num += (a - mx) * (b - my);
        den += (a - mx) * (a - mx);
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_mode_eigenvalue_is_one() {
        for d in 1..=3 {
            let j = vec![0i64; d];
            assert_eq!(eigenvalue(&j, 0.3).unwrap(), 1.0);
        }
    }

    #[test]
    fn frozen_product_eigenvalue() {
        // d=2, j=(1,1), eps=0.5: square of the 1-d quadrature-oracle value
        // at x = 2.
        let v = eigenvalue(&[1, 1], 0.5).unwrap();
        let r = 0.697_774_657_964_007_98f64;
        assert_relative_eq!(v, r * r, max_relative = 1e-12);
    }

    #[test]
    fn padding_axes_with_zeros_preserves_eigenvalue() {
        let one = eigenvalue(&[3], 0.4).unwrap();
        assert_relative_eq!(
            eigenvalue(&[3, 0, 0], 0.4).unwrap(),
            one,
            max_relative = 1e-14
        );
    }

    #[test]
    fn eigenvalues_in_unit_interval_and_sign_symmetric() {
        let spec = EigenSpectrum::build(0.3, 2, 40).unwrap();
        for a in -10i64..=10 {
            for b in -10i64..=10 {
                let v = spec.eigenvalue(&[a, b]).unwrap();
                assert!(v > 0.0 && v <= 1.0);
                assert_eq!(v, spec.eigenvalue(&[-a, b]).unwrap());
                assert_eq!(v, spec.eigenvalue(&[a, -b]).unwrap());
            }
        }
    }

    #[test]
    fn per_axis_table_is_strictly_decreasing() {
        let spec = EigenSpectrum::adaptive(0.2, 1, 0.55).unwrap();
        let t = spec.axis_table();
        assert_eq!(t[0], 1.0);
        for j in 0..t.len() - 1 {
            if t[j + 1] > 0.0 {
                assert!(t[j + 1] < t[j]);
            }
        }
    }

    #[test]
    fn trace_matches_gaussian_sum_asymptote() {
        // s=0, d=1, eps=0.05: Gaussian-sum oracle sqrt(pi)/eps within 2%.
        let eps = 0.05;
        let j_max = suggest_j_max(eps, 0.0).unwrap();
        let t = sobolev_trace(0.0, eps, 1, j_max).unwrap();
        let oracle = std::f64::consts::PI.sqrt() / eps;
        assert!((t - oracle).abs() / oracle < 0.02, "t={t} oracle={oracle}");
    }

    #[test]
    fn trace_monotone_in_s() {
        let eps = 0.1;
        let j_max = suggest_j_max(eps, 2.0).unwrap();
        let mut last = 0.0;
        for &s in &[0.0, 0.5, 1.0, 1.5, 2.0] {
            let t = sobolev_trace(s, eps, 2, j_max).unwrap();
            assert!(t > last);
            last = t;
        }
    }

    #[test]
    fn trace_truncation_guard() {
        let err = sobolev_trace(0.55, 0.05, 1, 12).unwrap_err();
        match err {
            crate::error::Error::TruncationInsufficient {
                requested,
                suggested,
            } => {
                assert_eq!(requested, 12);
                assert!(suggested > 12);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn trace_scaling_slope() {
        // log-log slope of trace vs 1/eps matches theta_c within 5%
        for &(dim, s) in &[(1usize, 0.55), (2, 1.05)] {
            let eps_grid = [0.2, 0.1, 0.05, 0.025];
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for &eps in &eps_grid {
                let j_max = suggest_j_max(eps, s).unwrap();
                xs.push(1.0 / eps);
                ys.push(sobolev_trace(s, eps, dim, j_max).unwrap());
            }
            let slope = log_log_slope(&xs, &ys).unwrap();
            let theta = theta_critical(s, dim);
            assert!(
                ((slope - theta) / theta).abs() < 0.05,
                "d={dim} s={s}: slope {slope} vs {theta}"
            );
        }
    }

    #[test]
    fn factorised_bound_majorises_exact_trace() {
        for &(dim, s) in &[(2usize, 1.05), (3, 0.8)] {
            let eps = 0.1;
            let j_max = suggest_j_max(eps, s).unwrap();
            let exact = sobolev_trace(s, eps, dim, j_max).unwrap();
            let bound = factorised_trace_bound(s, eps, dim, j_max).unwrap();
            assert!(exact <= bound, "d={dim}: exact {exact} > bound {bound}");
        }
    }

    #[test]
    fn exact_trace_agrees_with_brute_lattice() {
        // The octant recursion must equal the plainly-summed lattice.
        let eps = 0.25;
        let s = 0.7;
        let j_max = suggest_j_max(eps, s).unwrap();
        let fast = sobolev_trace(s, eps, 2, j_max).unwrap();
        let lam = specfun::ratio_table(j_max, 0.5 / (eps * eps)).unwrap();
        let mut brute = 0.0;
        for a in -(j_max as i64)..=(j_max as i64) {
            for b in -(j_max as i64)..=(j_max as i64) {
                brute += lam[a.unsigned_abs() as usize]
                    * lam[b.unsigned_abs() as usize]
                    * (1.0 + (a * a + b * b) as f64).powf(s);
            }
        }
        assert_relative_eq!(fast, brute, max_relative = 1e-10);
    }

    #[test]
    fn bound_exponent_values() {
        // symmetric pair gives theta_c
        for &(s, d) in &[(0.55, 1usize), (1.05, 2), (2.0, 3)] {
            let v = bound_exponent(0.5, 0.5, s, d).unwrap();
            assert_relative_eq!(v, theta_critical(s, d), max_relative = 1e-14);
        }
        // spot arithmetic: (0.6, 0.6), s=1, d=1
        let v = bound_exponent(0.6, 0.6, 1.0, 1).unwrap();
        assert_relative_eq!(v, 3.6, max_relative = 1e-14);
        assert!(v > 3.0);
        // inadmissible pairs
        assert!(bound_exponent(0.3, 0.3, 1.0, 1).is_err());
        assert!(bound_exponent(0.0, 1.0, 1.0, 1).is_err());
        assert!(bound_exponent(1.0, 0.5, 1.0, 1).is_err());
    }

    #[test]
    fn exponent_minimised_at_symmetric_pair() {
        for &(s, d) in &[(0.55, 1usize), (1.05, 2), (2.0, 3)] {
            let (a, b, v) = minimise_bound_exponent(s, d, 0.01);
            assert_relative_eq!(a, 0.5, epsilon = 1e-12);
            assert_relative_eq!(b, 0.5, epsilon = 1e-12);
            assert_relative_eq!(v, theta_critical(s, d), max_relative = 1e-12);
        }
    }

    #[test]
    fn theta_critical_values() {
        assert_eq!(theta_critical(0.0, 1), 1.0);
        assert_eq!(theta_critical(1.0, 1), 3.0);
        // s = d/2 gives the threshold 2d
        for d in 1..=4usize {
            assert_eq!(theta_critical(0.5 * d as f64, d), 2.0 * d as f64);
        }
    }

    #[test]
    fn sobolev_index_offset_form() {
        let s = SobolevIndex::from_offset(1, 0.05).unwrap();
        assert_relative_eq!(s.value(), 0.55, max_relative = 1e-15);
        assert!(SobolevIndex::from_offset(1, 0.5).is_err());
        assert!(SobolevIndex::new(-0.1).is_err());
    }

    #[test]
    fn basis_constant_mode_value() {
        // j = 0: the H^s-normalised constant mode is identically (2pi)^{d/2}
        // times the bare tensor value (2pi)^{-d/2}, i.e. exactly 1.
        for d in 1..=3usize {
            let j = vec![0i64; d];
            let x = vec![0.7; d];
            assert_relative_eq!(
                basis_function(&j, 0.55, &x).unwrap(),
                1.0,
                max_relative = 1e-14
            );
        }
    }
}
