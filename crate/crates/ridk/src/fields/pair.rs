//! Density/momentum pairs: the SPDE state and its norms.

use super::scalar::ScalarField;
use crate::error::{Error, Result};

/// `(rho, j_1, ..., j_d)` on one grid, tagged with simulation time.
#[derive(Debug, Clone, PartialEq)]
pub struct PairState {
    pub rho: ScalarField,
    pub momentum: Vec<ScalarField>,
    pub time: f64,
}

impl PairState {
    pub fn new(rho: ScalarField, momentum: Vec<ScalarField>, time: f64) -> Result<Self> {
        if momentum.len() != rho.grid().dim() {
            return Err(Error::SizeMismatch(format!(
                "{} momentum components on a {}-dimensional grid",
                momentum.len(),
                rho.grid().dim()
            )));
        }
        for m in &momentum {
            if m.grid() != rho.grid() {
                return Err(Error::SizeMismatch(
                    "pair components live on different grids".into(),
                ));
            }
        }
        Ok(Self {
            rho,
            momentum,
            time,
        })
    }

    pub fn zeros(grid: super::grid::TorusGrid) -> Self {
        Self {
            rho: ScalarField::zeros(grid),
            momentum: (0..grid.dim()).map(|_| ScalarField::zeros(grid)).collect(),
            time: 0.0,
        }
    }

    /// `( |rho|_{H^s}^2 + sum_l |j_l|_{H^s}^2 )^{1/2}`.
    pub fn pair_norm(&self, s: f64) -> f64 {
        self.energy_norm(s, 1.0)
    }

    /// Weighted energy norm `( c |rho|^2 + sum_l |j_l|^2 )^{1/2}`; with
    /// `c = sigma^2/(2 gamma)` this is the quantity the damped-wave
    /// propagator contracts.
    pub fn energy_norm(&self, s: f64, c: f64) -> f64 {
        debug_assert!(c > 0.0);
        let mut acc = c * self.rho.hs_norm(s).powi(2);
        for m in &self.momentum {
            acc += m.hs_norm(s).powi(2);
        }
        acc.sqrt()
    }

    /// Pointwise difference of two states (momentum components paired up).
    pub fn sub(&self, other: &PairState) -> Result<PairState> {
        let rho = self.rho.sub(&other.rho)?;
        let momentum = self
            .momentum
            .iter()
            .zip(&other.momentum)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<Vec<_>>>()?;
        PairState::new(rho, momentum, self.time)
    }

    pub fn scale(&mut self, c: f64) {
        self.rho.scale(c);
        for m in &mut self.momentum {
            m.scale(c);
        }
    }
}
