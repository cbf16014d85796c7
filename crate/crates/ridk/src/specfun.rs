//! Modified-Bessel-function ratio engine and kernel normalisation constants.
//!
//! Everything downstream — kernel spectra, noise covariances, trace sums —
//! only ever needs *ratios* `I_j(x)/I_0(x)` of modified Bessel functions of
//! the first kind, evaluated at `x = 1/(2 eps^2)` or `x = 1/eps^2`. For small
//! particle widths these arguments are enormous (`x ~ 1e8` for `eps ~ 7e-5`)
//! and the absolute values `I_j(x) ~ e^x` overflow doubles, so the ratios are
//! computed ratio-first: a normalised downward recurrence on the consecutive
//! ratios `I_{j+1}(x)/I_j(x)` (equivalent to evaluating the Gauss continued
//! fraction) followed by product accumulation. Every intermediate stays in
//! `(0, 1)`.

use crate::error::{Error, Result};

/// Tail cutoff: accumulated ratios below this are flushed to zero. Below any
/// Sobolev-weighted contribution at any regularity index used in the lab.
pub const RATIO_FLUSH: f64 = 1e-300;

/// Contamination guard for the downward recurrence. The dominant-solution
/// pollution decays like `exp(-(M^2 - j^2)/x)`, so starting at
/// `M ~ sqrt(GUARD * x + j^2)` leaves a relative error `~ e^{-GUARD}`.
const GUARD: f64 = 48.0;

/// Order/argument pair for a Bessel ratio query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselQuery {
    /// Order `j >= 0`.
    pub order: u32,
    /// Argument `x > 0`.
    pub argument: f64,
}

impl BesselQuery {
    pub fn new(order: u32, argument: f64) -> Result<Self> {
        if !argument.is_finite() || argument <= 0.0 {
            return Err(Error::Domain(format!(
                "Bessel argument must be finite and positive, got {argument}"
            )));
        }
        Ok(Self { order, argument })
    }

    /// `I_j(x) / I_0(x)`.
    pub fn ratio(&self) -> f64 {
        // Validated in the constructor.
        bessel_ratio(self.order, self.argument).expect("validated query")
    }
}

fn check_argument(x: f64) -> Result<()> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!(
            "Bessel argument must be finite and positive, got {x}"
        )));
    }
    Ok(())
}

fn start_order(j_max: usize, x: f64) -> usize {
    let m = (GUARD * x + (j_max as f64) * (j_max as f64)).sqrt().ceil() as usize;
    m.max(j_max) + 16
}

/// Consecutive ratios `r_j = I_{j+1}(x)/I_j(x)` for `j = 0..=j_max`.
///
/// Downward recurrence `r_{k-1} = x / (2k + x r_k)` started well inside the
/// exponential-decay regime with the asymptotic tail estimate
/// `r_M ~ x / (M + 1/2 + sqrt((M + 1/2)^2 + x^2))`. All iterates stay in
/// `(0, 1)`; no overflow for any positive `x`, including `x = 1e8`.
pub fn consecutive_ratio_table(j_max: usize, x: f64) -> Result<Vec<f64>> {
    check_argument(x)?;
    let m = start_order(j_max, x);
    let mm = m as f64 + 0.5;
    let mut r = x / (mm + (mm * mm + x * x).sqrt());
    let mut out = vec![0.0; j_max + 1];
    for k in (1..=m).rev() {
        r = x / (2.0 * k as f64 + x * r);
        if k - 1 <= j_max {
            out[k - 1] = r;
        }
    }
    Ok(out)
}

/// Ratios `lambda_j = I_j(x)/I_0(x)` for `j = 0..=j_max`, with `lambda_0 = 1`.
///
/// Product accumulation of the consecutive ratios; entries that underflow
/// [`RATIO_FLUSH`] are flushed to exact zero.
pub fn ratio_table(j_max: usize, x: f64) -> Result<Vec<f64>> {
    let rs = consecutive_ratio_table(j_max, x)?;
    let mut out = vec![0.0; j_max + 1];
    let mut acc = 1.0;
    out[0] = 1.0;
    for j in 1..=j_max {
        acc *= rs[j - 1];
        if acc < RATIO_FLUSH {
            acc = 0.0;
        }
        out[j] = acc;
    }
    Ok(out)
}

/// `I_j(x) / I_0(x)`, exact 1 for `j = 0`, strictly decreasing in `j`.
pub fn bessel_ratio(j: u32, x: f64) -> Result<f64> {
    check_argument(x)?;
    if j == 0 {
        return Ok(1.0);
    }
    let table = ratio_table(j as usize, x)?;
    Ok(table[j as usize])
}

/// `I_{j+1}(x) / I_j(x)`.
///
/// Only accepted for `x >= 1`: the sharp bound
/// `I_{j+1}(x)/I_j(x) < x/(j + 1/2 + x)` asserted by the callers is validated
/// on that range only.
pub fn consecutive_ratio(j: u32, x: f64) -> Result<f64> {
    check_argument(x)?;
    if x < 1.0 {
        return Err(Error::OutOfValidatedRange(format!(
            "consecutive ratio bound requires x >= 1, got {x}"
        )));
    }
    let table = consecutive_ratio_table(j as usize, x)?;
    Ok(table[j as usize])
}

/// Exponentially scaled modified Bessel function `e^{-x} I_0(x)` for `x >= 0`.
///
/// Power series below `x = 30`, asymptotic series (summed to its smallest
/// term) above; both branches carry relative error well under `1e-13`.
pub fn bessel_i0_scaled(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x < 30.0 {
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        while term > 1e-19 * sum {
            term *= q / (k * k);
            sum += term;
            k += 1.0;
        }
        sum * (-x).exp()
    } else {
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 0.0;
        loop {
            let next = term * (2.0 * k + 1.0) * (2.0 * k + 1.0) / (8.0 * x * (k + 1.0));
            if next >= term || next < 1e-19 * sum {
                sum += next;
                break;
            }
            sum += next;
            term = next;
            k += 1.0;
        }
        sum / (2.0 * std::f64::consts::PI * x).sqrt()
    }
}

/// Von Mises normalisation constant
/// `Z_eps = \int_T exp(-sin^2(y/2) / (eps^2/2)) dy = 2 pi e^{-1/eps^2} I_0(1/eps^2)`,
/// evaluated overflow-safe through the scaled Bessel function.
pub fn kernel_normalisation(eps: f64) -> Result<f64> {
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::Domain(format!(
            "kernel width must be finite and positive, got {eps}"
        )));
    }
    let x = 1.0 / (eps * eps);
    Ok(2.0 * std::f64::consts::PI * bessel_i0_scaled(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // Frozen with the quadrature oracle of tests/specfun_oracle.rs
    // (adaptive Simpson of the scaled cosine integral), cross-checked against
    // 30-digit arithmetic.
    const RATIO_1_2: f64 = 0.697_774_657_964_007_98;
    const RATIO_5_2: f64 = 0.004_310_292_452_343_226;
    const RATIO_1_1: f64 = 0.446_389_965_896_534_51;

    #[test]
    fn identity_at_order_zero() {
        for &x in &[1e-3, 1.0, 2.0, 1e4, 1e8] {
            assert_eq!(bessel_ratio(0, x).unwrap(), 1.0);
        }
    }

    #[test]
    fn frozen_ratio_values() {
        assert_relative_eq!(
            bessel_ratio(1, 2.0).unwrap(),
            RATIO_1_2,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            bessel_ratio(5, 2.0).unwrap(),
            RATIO_5_2,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            bessel_ratio(1, 1.0).unwrap(),
            RATIO_1_1,
            max_relative = 1e-13
        );
    }

    #[test]
    fn strict_monotonicity_in_order() {
        for &x in &[1.0, 2.0, 10.0, 100.0, 1e4] {
            let table = ratio_table(60, x).unwrap();
            for j in 0..60 {
                if table[j + 1] > 0.0 {
                    assert!(table[j + 1] < table[j], "x={x} j={j}");
                }
            }
        }
    }

    #[test]
    fn consecutive_ratio_bound() {
        // I_{j+1}(x)/I_j(x) < x/(j + 1/2 + x) on the validated range.
        for &x in &[1.0, 2.0, 10.0, 100.0, 1e4] {
            let rs = consecutive_ratio_table(200, x).unwrap();
            for (j, &r) in rs.iter().enumerate() {
                assert!(r < x / (j as f64 + 0.5 + x), "x={x} j={j} r={r}");
            }
        }
        // Frozen spot values.
        assert_relative_eq!(
            consecutive_ratio(0, 2.0).unwrap(),
            RATIO_1_2,
            max_relative = 1e-13
        );
        assert!(consecutive_ratio(0, 2.0).unwrap() < 0.8);
        let r10 = consecutive_ratio(10, 1.0).unwrap();
        assert!(r10 < 1.0 / 11.5);
        assert_relative_eq!(r10, 0.045_368_757_071_292_19, max_relative = 1e-12);
    }

    #[test]
    fn order_decay_to_zero() {
        let table = ratio_table(400, 2.0).unwrap();
        assert!(table[399] < 1e-200 || table[399] == 0.0);
        // flushed tail is exactly zero and stays zero
        let far = ratio_table(4000, 2.0).unwrap();
        assert_eq!(far[3999], 0.0);
    }

    #[test]
    fn domain_errors() {
        assert!(bessel_ratio(1, 0.0).is_err());
        assert!(bessel_ratio(1, -2.0).is_err());
        assert!(bessel_ratio(1, f64::NAN).is_err());
        assert!(bessel_ratio(1, f64::INFINITY).is_err());
        assert!(consecutive_ratio(1, 0.5).is_err());
        assert!(BesselQuery::new(3, -1.0).is_err());
    }

    #[test]
    fn gaussian_limit_band() {
        // I_j(x)/I_0(x) ~ exp(-j^2/(2x)) within 10% relative for x >= 100
        // and j <= sqrt(x).
        for &x in &[100.0f64, 1e3, 1e4, 1e6, 1e8] {
            let jm = x.sqrt() as usize;
            let table = ratio_table(jm, x).unwrap();
            for (j, &v) in table.iter().enumerate() {
                let g = (-(j as f64) * (j as f64) / (2.0 * x)).exp();
                assert!((v - g).abs() / g < 0.1, "x={x} j={j}");
            }
        }
    }

    #[test]
    fn huge_argument_does_not_overflow() {
        let v = bessel_ratio(100, 1e8).unwrap();
        assert!(v.is_finite() && v > 0.0 && v <= 1.0);
        let r = consecutive_ratio(0, 1e8).unwrap();
        assert!(r < 1.0 && r > 0.999);
    }

    #[test]
    fn scaled_i0_branches_agree() {
        // power series vs asymptotic series across the split point
        for &x in &[29.0f64, 29.9, 30.0, 30.1, 31.0] {
            let q = 0.25 * x * x;
            let mut term = 1.0;
            let mut sum = 1.0;
            let mut k = 1.0;
            while term > 1e-19 * sum {
                term *= q / (k * k);
                sum += term;
                k += 1.0;
            }
            let series = sum * (-x).exp();
            assert_relative_eq!(bessel_i0_scaled(x), series, max_relative = 1e-12);
        }
    }

    #[test]
    fn normalisation_frozen_values() {
        // Frozen with the adaptive-quadrature oracle of the defining integral.
        for (eps, z) in [
            (0.05, 1.253_706_350_196_049e-1),
            (0.1, 2.509_779_371_164_927e-1),
            (0.5, 1.300_631_429_992_499e0),
            (1.0, 2.926_453_923_110_091e0),
        ] {
            assert_relative_eq!(kernel_normalisation(eps).unwrap(), z, max_relative = 1e-12);
        }
    }

    #[test]
    fn normalisation_limits() {
        // eps -> infinity: integrand -> 1, so Z -> 2 pi.
        let z = kernel_normalisation(1e6).unwrap();
        assert_relative_eq!(z, 2.0 * std::f64::consts::PI, max_relative = 1e-9);
        // eps -> 0: Laplace asymptote Z / (sqrt(2 pi) eps) -> 1.
        for (eps, tol) in [(1e-2, 2e-5), (1e-4, 1e-8), (1e-6, 1e-9)] {
            let z = kernel_normalisation(eps).unwrap();
            let asym = (2.0 * std::f64::consts::PI).sqrt() * eps;
            assert!((z / asym - 1.0).abs() < tol, "eps={eps}");
        }
        assert!(kernel_normalisation(0.0).is_err());
        assert!(kernel_normalisation(-1.0).is_err());
    }
}
