//! The regularised square root `h_delta`.
//!
//! `h_delta(z) = sqrt(|z|)` for `|z| >= delta/2`; inside the window the
//! square is blended: with `y = z^2` and `Y = (delta/2)^2`,
//! `h_delta(z) = P(y)^{1/2}` where `P` is the Hermite interpolant on `[0, Y]`
//! that matches `y -> sqrt(y)` at the right endpoint to `m` derivatives and
//! has the positivity floor `P(0) = delta/4`. Evenness and smoothness in `z`
//! come from smoothness in `y`; matching `m` derivative orders at the
//! endpoint makes the composite `C^m` across `|z| = delta/2`.
//!
//! By scaling, `P(y) = sqrt(Y) P1(y/Y)` with a universal polynomial `P1`
//! depending only on `m`; `P1` is solved once per spec and checked to stay
//! strictly positive on `[0, 1]`.

use crate::error::{Error, Result};
use crate::fields::ScalarField;

/// Regularisation threshold `delta` and smoothness order `m = ceil(d/2) + 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularisationSpec {
    delta: f64,
    smoothness_order: usize,
    /// Monomial coefficients of the universal blend polynomial `P1`.
    p1: Vec<f64>,
}

/// `prod_{i=0}^{r-1} (1/2 - i)`: the r-th derivative of `t^{1/2}` at `t = 1`,
/// also the coefficient in `d^r/dz^r z^{1/2} = c_r z^{1/2-r}`.
fn sqrt_deriv_coeff(r: usize) -> f64 {
    let mut c = 1.0;
    for i in 0..r {
        c *= 0.5 - i as f64;
    }
    c
}

fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        if a[piv][col].abs() < 1e-12 {
            return Err(Error::Domain("singular blend interpolation system".into()));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in row + 1..n {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    Ok(x)
}

fn blend_polynomial(matched_orders: usize) -> Result<Vec<f64>> {
    // conditions: P1(0) = 1/2 and P1^(k)(1) = c_k for k = 0..=matched_orders
    let n = matched_orders + 2; // degree matched_orders + 1
    let mut a = vec![vec![0.0; n]; n];
    let mut b = vec![0.0; n];
    a[0][0] = 1.0;
    b[0] = 0.5;
    for k in 0..=matched_orders {
        for (m, cell) in a[k + 1].iter_mut().enumerate() {
            if m >= k {
                // d^k t^m at t = 1
                let mut f = 1.0;
                for i in 0..k {
                    f *= (m - i) as f64;
                }
                *cell = f;
            }
        }
        b[k + 1] = sqrt_deriv_coeff(k);
    }
    solve_dense(a, b)
}

fn eval_poly(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

impl RegularisationSpec {
    pub fn new(delta: f64, dim: usize) -> Result<Self> {
        if !delta.is_finite() || delta <= 0.0 {
            return Err(Error::Domain(format!(
                "regularisation threshold must be positive, got {delta}"
            )));
        }
        if dim == 0 {
            return Err(Error::Domain("dimension must be >= 1".into()));
        }
        let smoothness_order = dim.div_ceil(2) + 2;
        // one matched order beyond the smoothness class keeps the order-m
        // derivative not merely continuous but gently varying at the join
        let p1 = blend_polynomial(smoothness_order + 1)?;
        // positivity floor: P1(0) = 1/2 by construction; make sure the whole
        // blend stays strictly positive
        let mut min = f64::INFINITY;
        for i in 0..=4096 {
            min = min.min(eval_poly(&p1, i as f64 / 4096.0));
        }
        if min <= 0.0 {
            return Err(Error::Domain(format!(
                "blend polynomial dips to {min}; positivity floor violated"
            )));
        }
        Ok(Self {
            delta,
            smoothness_order,
            p1,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Number of continuous derivatives guaranteed across the blend join.
    pub fn smoothness_order(&self) -> usize {
        self.smoothness_order
    }

    /// `h_delta(z)`: strictly positive, even, `sqrt(|z|)` outside the window.
    pub fn h(&self, z: f64) -> f64 {
        let half = 0.5 * self.delta;
        if z.abs() >= half {
            z.abs().sqrt()
        } else {
            let t = (z * z) / (half * half);
            (half * eval_poly(&self.p1, t)).sqrt()
        }
    }

    /// Analytic `r`-th derivative of `h_delta` (piecewise closed form; the
    /// blend branch differentiates `sqrt(Q(z))` through a truncated power
    /// series of the even polynomial `Q`).
    pub fn h_deriv(&self, z: f64, r: usize) -> f64 {
        if r == 0 {
            return self.h(z);
        }
        let half = 0.5 * self.delta;
        if z.abs() >= half {
            let c = sqrt_deriv_coeff(r);
            if z > 0.0 {
                c * z.powf(0.5 - r as f64)
            } else {
                let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
                sign * c * (-z).powf(0.5 - r as f64)
            }
        } else {
            // Q(z) = half * P1(z^2/half^2): even polynomial in z.
            // Taylor-expand Q at z, take the series square root, read off
            // the r-th coefficient.
            let deg = 2 * (self.p1.len() - 1);
            let mut q_coeffs = vec![0.0; deg + 1];
            for (mdeg, &c) in self.p1.iter().enumerate() {
                q_coeffs[2 * mdeg] = half * c / half.powi(2 * mdeg as i32);
            }
            // Taylor coefficients q_i = Q^(i)(z)/i!
            let order = r;
            let mut q = vec![0.0; order + 1];
            for (mdeg, &c) in q_coeffs.iter().enumerate() {
                if c == 0.0 {
                    continue;
                }
                let mut binom = 1.0;
                for (i, qi) in q.iter_mut().enumerate() {
                    if i > mdeg {
                        break;
                    }
                    // C(mdeg, i) * z^{mdeg-i}
                    *qi += c * binom * z.powi((mdeg - i) as i32);
                    binom *= (mdeg - i) as f64 / (i + 1) as f64;
                }
            }
            // series square root
            let mut s = vec![0.0; order + 1];
            s[0] = q[0].sqrt();
            for n in 1..=order {
                let mut acc = q[n];
                for i in 1..n {
                    acc -= s[i] * s[n - i];
                }
                s[n] = acc / (2.0 * s[0]);
            }
            let mut fact = 1.0;
            for i in 1..=r {
                fact *= i as f64;
            }
            fact * s[r]
        }
    }

    /// Pointwise application to a field.
    pub fn apply(&self, field: &ScalarField) -> ScalarField {
        field.map(|v| self.h(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn agrees_with_square_root_outside_window() {
        let spec = RegularisationSpec::new(0.2, 1).unwrap();
        assert_relative_eq!(spec.h(0.2), 0.2f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(spec.h(5.0), 5.0f64.sqrt(), max_relative = 1e-15);
        // even extension
        assert_relative_eq!(spec.h(-1.0), 1.0, max_relative = 1e-15);
        assert_relative_eq!(spec.h(-0.3), spec.h(0.3), max_relative = 1e-15);
    }

    #[test]
    fn strictly_positive_everywhere() {
        for dim in 1..=3 {
            let spec = RegularisationSpec::new(0.1, dim).unwrap();
            let mut min = f64::INFINITY;
            for i in -2000..=2000 {
                min = min.min(spec.h(i as f64 * 1e-4));
            }
            assert!(min > 0.0, "dim {dim}: min {min}");
            // the floor value at the origin: P(0) = delta/4
            assert_relative_eq!(spec.h(0.0), (0.1f64 / 4.0).sqrt(), max_relative = 1e-12);
        }
    }

    #[test]
    fn continuous_at_the_join() {
        let spec = RegularisationSpec::new(0.3, 2).unwrap();
        let half = 0.15;
        assert_relative_eq!(
            spec.h(half - 1e-14),
            spec.h(half + 1e-14),
            max_relative = 1e-10
        );
    }

    #[test]
    fn derivatives_continuous_across_join_up_to_order_m() {
        // A raw side difference at step eta mixes the smooth drift
        // 2 eta f^{(r+1)} with any genuine discontinuity; the Richardson
        // combination d(eta) - 2 d(eta/2) cancels the drift and isolates the
        // jump up to O(eta^2).
        for dim in 1..=3usize {
            let delta = 0.25;
            let spec = RegularisationSpec::new(delta, dim).unwrap();
            let m = spec.smoothness_order();
            let half = 0.5 * delta;
            let eta = 1e-4 * delta;
            for r in 0..=m {
                let d = |e: f64| spec.h_deriv(half + e, r) - spec.h_deriv(half - e, r);
                let jump = (d(eta) - 2.0 * d(0.5 * eta)).abs();
                let scale = spec.h_deriv(half, r).abs();
                assert!(
                    jump / scale < 1e-4,
                    "dim {dim} order {r}: jump {}",
                    jump / scale
                );
            }
            // just above the smoothness class the derivative may kink, but
            // the value still may not blow up across the join
            let v = spec.h_deriv(half - eta, m).abs();
            assert!(v.is_finite() && v > 0.0);
        }
    }

    #[test]
    fn blend_derivatives_match_finite_differences() {
        let spec = RegularisationSpec::new(0.4, 2).unwrap();
        for &z in &[0.0, 0.05, -0.12, 0.18] {
            // first derivative, central
            let h = 1e-4;
            let fd1 = (spec.h(z + h) - spec.h(z - h)) / (2.0 * h);
            assert_relative_eq!(spec.h_deriv(z, 1), fd1, epsilon = 1e-6, max_relative = 1e-5);
            // second derivative
            let h = 3e-4;
            let fd2 = (spec.h(z + h) - 2.0 * spec.h(z) + spec.h(z - h)) / (h * h);
            assert_relative_eq!(spec.h_deriv(z, 2), fd2, epsilon = 1e-4, max_relative = 1e-4);
            // fourth derivative, 5-point stencil
            let h = 1e-3;
            let fd4 = (spec.h(z + 2.0 * h) - 4.0 * spec.h(z + h) + 6.0 * spec.h(z)
                - 4.0 * spec.h(z - h)
                + spec.h(z - 2.0 * h))
                / h.powi(4);
            assert_relative_eq!(spec.h_deriv(z, 4), fd4, epsilon = 5e-2, max_relative = 5e-3);
        }
    }

    #[test]
    fn outside_derivatives_match_finite_differences() {
        let spec = RegularisationSpec::new(0.1, 1).unwrap();
        let h = 1e-4;
        for &z in &[0.3, 1.7, -0.8] {
            let fd1 = (spec.h(z + h) - spec.h(z - h)) / (2.0 * h);
            assert_relative_eq!(spec.h_deriv(z, 1), fd1, max_relative = 1e-7);
            let fd2 = (spec.h(z + h) - 2.0 * spec.h(z) + spec.h(z - h)) / (h * h);
            assert_relative_eq!(spec.h_deriv(z, 2), fd2, max_relative = 1e-5);
        }
    }

    #[test]
    fn rejects_bad_threshold() {
        assert!(RegularisationSpec::new(0.0, 1).is_err());
        assert!(RegularisationSpec::new(-0.5, 1).is_err());
        assert!(RegularisationSpec::new(f64::NAN, 1).is_err());
    }
}
