//! Uniform grid on the d-torus `[0, 2 pi)^d`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusGrid {
    dim: usize,
    points_per_axis: usize,
}

impl TorusGrid {
    /// `points_per_axis` must be a power of two, at least 4; exact mode
    /// bookkeeping relies on it.
    pub fn new(dim: usize, points_per_axis: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("grid dimension must be >= 1".into()));
        }
        if points_per_axis < 4 || !points_per_axis.is_power_of_two() {
            return Err(Error::Domain(format!(
                "points per axis must be a power of two >= 4, got {points_per_axis}"
            )));
        }
        Ok(Self {
            dim,
            points_per_axis,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn spacing(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.points_per_axis as f64
    }

    /// Total number of nodes `M^d`.
    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Signed frequency of a per-axis bin index: `0..=M/2` map to themselves,
    /// the upper half maps to negative frequencies.
    pub fn signed_freq(&self, bin: usize) -> i64 {
        let m = self.points_per_axis;
        if bin <= m / 2 {
            bin as i64
        } else {
            bin as i64 - m as i64
        }
    }

    /// Per-axis bin index of a signed frequency in `(-M/2, M/2]`.
    pub fn bin_of_freq(&self, freq: i64) -> usize {
        let m = self.points_per_axis as i64;
        debug_assert!(freq > -m / 2 && freq <= m / 2);
        freq.rem_euclid(m) as usize
    }

    /// Decompose a flat row-major index into per-axis bin indices.
    pub fn multi_index(&self, mut flat: usize, out: &mut [usize]) {
        let m = self.points_per_axis;
        for a in (0..self.dim).rev() {
            out[a] = flat % m;
            flat /= m;
        }
    }

    /// Flat row-major index of per-axis bins.
    pub fn flat_index(&self, multi: &[usize]) -> usize {
        let m = self.points_per_axis;
        multi.iter().fold(0, |acc, &i| acc * m + i)
    }

    /// Node coordinates of a flat index.
    pub fn node(&self, flat: usize) -> Vec<f64> {
        let mut idx = vec![0usize; self.dim];
        self.multi_index(flat, &mut idx);
        idx.iter().map(|&i| i as f64 * self.spacing()).collect()
    }

    /// Signed frequency vector of a flat spectral index.
    pub fn freq_vector(&self, flat: usize, out: &mut [i64]) {
        let m = self.points_per_axis;
        let mut rest = flat;
        for a in (0..self.dim).rev() {
            out[a] = self.signed_freq(rest % m);
            rest /= m;
        }
    }

    /// `|k|^2` of a flat spectral index.
    pub fn freq_norm_sq(&self, flat: usize) -> i64 {
        let m = self.points_per_axis;
        let mut rest = flat;
        let mut n2 = 0i64;
        for _ in 0..self.dim {
            let f = self.signed_freq(rest % m);
            n2 += f * f;
            rest /= m;
        }
        n2
    }
}
