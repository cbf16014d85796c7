//! Set-partition enumeration, the partition expansion of mixed derivatives
//! of a composition, and factorisations for differences of products.
//!
//! These are the combinatorial verifiers behind the regularised square root:
//! mixed partial derivatives of `h(u)` expand as a sum over set partitions
//! (Faa di Bruno), and differences of derivative products telescope through
//! the factorisation identities checked here.

use crate::error::{Error, Result};
use crate::fields::ScalarField;
use crate::solver::RegularisationSpec;
use std::collections::HashMap;

/// A partition of `{0, .., ground_size-1}` into disjoint blocks, canonically
/// ordered by least element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetPartition {
    ground_size: usize,
    blocks: Vec<Vec<usize>>,
}

impl SetPartition {
    pub fn ground_size(&self) -> usize {
        self.ground_size
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Number of blocks `|pi|`.
    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// `beta_j`: how many blocks have size `j` (index 1-based, `j <= ground`).
    pub fn block_size_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.ground_size + 1];
        for b in &self.blocks {
            counts[b.len()] += 1;
        }
        counts
    }

    /// `J`: the set of block sizes that occur.
    pub fn sizes_present(&self) -> Vec<usize> {
        let counts = self.block_size_counts();
        (1..=self.ground_size).filter(|&j| counts[j] > 0).collect()
    }
}

/// All set partitions of a ground set of size `alpha`, via restricted growth
/// strings; the block-by-least-element order falls out of the encoding.
/// Guarded to `alpha <= 12` (Bell(12) = 4 213 597).
pub fn enumerate_partitions(alpha: usize) -> Result<Vec<SetPartition>> {
    if alpha == 0 || alpha > 12 {
        return Err(Error::Domain(format!(
            "partition enumeration accepts 1 <= alpha <= 12, got {alpha}"
        )));
    }
    let mut out = Vec::new();
    let mut code = vec![0usize; alpha];
    loop {
        let blocks_n = code.iter().copied().max().unwrap() + 1;
        let mut blocks = vec![Vec::new(); blocks_n];
        for (elem, &b) in code.iter().enumerate() {
            blocks[b].push(elem);
        }
        out.push(SetPartition {
            ground_size: alpha,
            blocks,
        });

        // next restricted growth string
        let mut i = alpha;
        loop {
            if i == 1 {
                return Ok(out);
            }
            i -= 1;
            let cap = code[..i].iter().copied().max().unwrap() + 1;
            if code[i] < cap {
                code[i] += 1;
                for c in code[i + 1..].iter_mut() {
                    *c = 0;
                }
                break;
            }
        }
    }
}

/// Mixed partial derivative of the composition `h_delta(u)` along the given
/// axes, expanded over set partitions:
/// `sum_pi h^(|pi|)(u) prod_{b in pi} (mixed partial of u along the axes of b)`.
/// `u`-derivatives are spectral; `h`-derivatives come from the piecewise
/// closed form of the regularised square root.
pub fn faa_di_bruno_derivative(
    h: &RegularisationSpec,
    u: &ScalarField,
    axes: &[usize],
) -> Result<ScalarField> {
    let alpha = axes.len();
    if alpha == 0 || alpha > 4 {
        return Err(Error::Domain(format!(
            "derivative order must satisfy 1 <= alpha <= 4, got {alpha}"
        )));
    }
    let dim = u.grid().dim();
    if let Some(&bad) = axes.iter().find(|&&a| a >= dim) {
        return Err(Error::Domain(format!(
            "axis index {bad} out of range for dimension {dim}"
        )));
    }

    let spectral = u.to_spectral();
    let mut derivative_cache: HashMap<Vec<usize>, ScalarField> = HashMap::new();
    let mut mixed = |block_axes: Vec<usize>| -> ScalarField {
        derivative_cache
            .entry(block_axes.clone())
            .or_insert_with(|| {
                let mut s = spectral.clone();
                for &a in &block_axes {
                    s = s.derivative_axis(a);
                }
                s.to_field()
            })
            .clone()
    };

    // h^(r)(u(x)) for every needed order
    let h_of_u: Vec<Vec<f64>> = (1..=alpha)
        .map(|r| u.values().iter().map(|&v| h.h_deriv(v, r)).collect())
        .collect();

    let mut out = vec![0.0; u.grid().len()];
    for pi in enumerate_partitions(alpha)? {
        let mut term: Vec<f64> = h_of_u[pi.block_count() - 1].clone();
        for block in pi.blocks() {
            let mut block_axes: Vec<usize> = block.iter().map(|&z| axes[z]).collect();
            block_axes.sort_unstable();
            let d = mixed(block_axes);
            for (t, dv) in term.iter_mut().zip(d.values()) {
                *t *= dv;
            }
        }
        for (o, t) in out.iter_mut().zip(&term) {
            *o += t;
        }
    }
    ScalarField::from_values(u.grid(), out)
}

/// Both sides of the telescoping factorisation
/// `prod a - prod b = sum_k b_{<k} (a_k - b_k) a_{>k}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorisationCheck {
    /// The telescoped sum.
    pub factorised: f64,
    /// The directly evaluated difference of products.
    pub direct: f64,
}

impl FactorisationCheck {
    pub fn residual(&self) -> f64 {
        (self.factorised - self.direct).abs()
    }
}

fn prefix_products(v: &[f64]) -> Vec<f64> {
    // pre[k] = v_0 * .. * v_{k-1}, empty product = 1
    let mut pre = Vec::with_capacity(v.len() + 1);
    pre.push(1.0);
    for &x in v {
        pre.push(pre.last().unwrap() * x);
    }
    pre
}

fn suffix_products(v: &[f64]) -> Vec<f64> {
    // suf[k] = v_{k+1} * .. * v_{n-1}
    let n = v.len();
    let mut suf = vec![1.0; n + 1];
    for k in (0..n).rev() {
        suf[k] = suf[k + 1] * if k + 1 < n { v[k + 1] } else { 1.0 };
    }
    suf
}

fn telescoped_difference(a: &[f64], b: &[f64]) -> f64 {
    let pre_b = prefix_products(b);
    let suf_a = suffix_products(a);
    let mut s = 0.0;
    for k in 0..a.len() {
        s += pre_b[k] * (a[k] - b[k]) * suf_a[k];
    }
    s
}

/// Single-difference factorisation of `prod a - prod b`.
pub fn product_difference_expand(a: &[f64], b: &[f64]) -> Result<FactorisationCheck> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::SizeMismatch(format!(
            "factorisation needs equal nonzero lengths, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let direct = a.iter().product::<f64>() - b.iter().product::<f64>();
    Ok(FactorisationCheck {
        factorised: telescoped_difference(a, b),
        direct,
    })
}

/// Double-difference factorisation of
/// `(prod a - prod b) - (prod c - prod d)`: the first-order telescoping plus
/// a nested telescoping of the per-index auxiliary families
/// `alpha^k = (b_1..b_{k-1}, a_{k+1}..a_n)` and
/// `beta^k  = (d_1..d_{k-1}, c_{k+1}..c_n)`.
pub fn double_difference_expand(
    a: &[f64],
    b: &[f64],
    c: &[f64],
    d: &[f64],
) -> Result<FactorisationCheck> {
    let n = a.len();
    if b.len() != n || c.len() != n || d.len() != n || n == 0 {
        return Err(Error::SizeMismatch(
            "double factorisation needs four equal nonzero lengths".into(),
        ));
    }
    let direct = a.iter().product::<f64>()
        - b.iter().product::<f64>()
        - (c.iter().product::<f64>() - d.iter().product::<f64>());

    let pre_b = prefix_products(b);
    let suf_a = suffix_products(a);
    let mut s = 0.0;
    for k in 0..n {
        s += pre_b[k] * (a[k] - b[k] - (c[k] - d[k])) * suf_a[k];
    }
    for k in 0..n {
        let alpha_k: Vec<f64> = b[..k].iter().chain(&a[k + 1..]).copied().collect();
        let beta_k: Vec<f64> = d[..k].iter().chain(&c[k + 1..]).copied().collect();
        s += (c[k] - d[k]) * telescoped_difference(&alpha_k, &beta_k);
    }
    Ok(FactorisationCheck {
        factorised: s,
        direct,
    })
}

/// Bell numbers `B_0..=B_12` for the enumeration checks.
pub const BELL: [u64; 13] = [
    1, 1, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975, 678570, 4213597,
];
