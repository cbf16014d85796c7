//! Experiment configuration: one structured record per run, with
//! cross-field validation. Command-line flags override file values; the
//! effective configuration is echoed into every report for reproducibility.

use crate::error::{Error, Result};
use crate::particles::PotentialSpec;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Spectrum,
    TraceScaling,
    SimulateParticles,
    SimulateRidk,
    Compare,
    Convergence,
    MicroScaling,
    VerifyAppendix,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Spectrum => "spectrum",
            ExperimentKind::TraceScaling => "trace-scaling",
            ExperimentKind::SimulateParticles => "simulate-particles",
            ExperimentKind::SimulateRidk => "simulate-ridk",
            ExperimentKind::Compare => "compare",
            ExperimentKind::Convergence => "convergence",
            ExperimentKind::MicroScaling => "micro-scaling",
            ExperimentKind::VerifyAppendix => "verify-appendix",
        }
    }
}

fn default_gamma() -> f64 {
    1.0
}
fn default_sigma() -> f64 {
    0.5
}
fn default_delta() -> f64 {
    0.02
}
fn default_grid() -> usize {
    256
}
fn default_dt() -> f64 {
    0.005
}
fn default_horizon() -> f64 {
    1.0
}
fn default_exit_radius() -> f64 {
    2.0
}
fn default_ic() -> f64 {
    0.5
}
fn default_replicas() -> usize {
    50
}
fn default_dim() -> usize {
    1
}
fn default_stride() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub experiment: ExperimentKind,
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    #[serde(default)]
    pub threads: Option<usize>,

    /// Particle widths (spectrum, trace-scaling, fixed-width runs).
    #[serde(default)]
    pub eps_values: Vec<f64>,
    /// Scaling exponent coupling width to particle count.
    #[serde(default)]
    pub theta: Option<f64>,
    /// Particle counts.
    #[serde(default)]
    pub n_values: Vec<u64>,
    /// Regularity index `s`; alternatively give `eta` for `s = d/2 + eta`.
    #[serde(default)]
    pub sobolev_s: Option<f64>,
    #[serde(default)]
    pub eta: Option<f64>,

    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Cosine interaction amplitude (`0` = free particles).
    #[serde(default)]
    pub u0: f64,
    #[serde(default = "default_grid")]
    pub grid_points: usize,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_exit_radius")]
    pub exit_radius: f64,
    #[serde(default = "default_ic")]
    pub ic_amplitude: f64,
    /// Snapshot stride (steps between written field snapshots).
    #[serde(default = "default_stride")]
    pub snapshot_stride: usize,
}

impl SimConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        Self {
            experiment,
            dim: default_dim(),
            seed: 0,
            replicas: default_replicas(),
            threads: None,
            eps_values: Vec::new(),
            theta: None,
            n_values: Vec::new(),
            sobolev_s: None,
            eta: None,
            gamma: default_gamma(),
            sigma: default_sigma(),
            delta: default_delta(),
            u0: 0.0,
            grid_points: default_grid(),
            dt: default_dt(),
            horizon: default_horizon(),
            exit_radius: default_exit_radius(),
            ic_amplitude: default_ic(),
            snapshot_stride: default_stride(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn potential(&self) -> PotentialSpec {
        if self.u0 == 0.0 {
            PotentialSpec::Zero
        } else {
            PotentialSpec::Cosine { amplitude: self.u0 }
        }
    }

    /// Effective regularity index: explicit `s` wins, else `d/2 + eta`.
    pub fn resolved_s(&self) -> Result<f64> {
        match (self.sobolev_s, self.eta) {
            (Some(s), _) => Ok(s),
            (None, Some(eta)) => Ok(0.5 * self.dim as f64 + eta),
            (None, None) => Err(Error::InvalidConfig(
                "regularity index missing: give `sobolev_s` or `eta`".into(),
            )),
        }
    }

    pub fn validate(&self) -> Result<()> {
        use ExperimentKind::*;
        if self.dim == 0 {
            return Err(Error::InvalidConfig("dimension must be >= 1".into()));
        }
        match self.experiment {
            Spectrum | TraceScaling => {
                if self.eps_values.is_empty() {
                    return Err(Error::InvalidConfig(
                        "invariant violated: eps_values must be nonempty".into(),
                    ));
                }
                self.resolved_s()?;
            }
            SimulateParticles => {
                if self.n_values.len() != 1 {
                    return Err(Error::InvalidConfig(
                        "invariant violated: exactly one particle count required".into(),
                    ));
                }
                self.single_eps()?;
            }
            SimulateRidk | Compare => {
                let s = self.resolved_s()?;
                if s <= 0.5 * self.dim as f64 {
                    return Err(Error::InvalidConfig(format!(
                        "invariant violated: s = {s} must exceed d/2 = {} for the sup-norm \
                         embedding",
                        0.5 * self.dim as f64
                    )));
                }
                let eps = self.single_eps()?;
                if self.n_values.len() != 1 {
                    return Err(Error::InvalidConfig(
                        "invariant violated: exactly one particle count required".into(),
                    ));
                }
                self.check_resolution(eps, 1e-8)?;
            }
            Convergence => {
                let s = self.resolved_s()?;
                let theta = self.theta.ok_or_else(|| {
                    Error::InvalidConfig("invariant violated: theta required".into())
                })?;
                if theta <= 2.0 * self.dim as f64 {
                    return Err(Error::InvalidConfig(format!(
                        "invariant violated: theta = {theta} must exceed 2 d = {}",
                        2 * self.dim
                    )));
                }
                if s <= 0.5 * self.dim as f64 {
                    return Err(Error::InvalidConfig(format!(
                        "invariant violated: s = {s} must exceed d/2"
                    )));
                }
                if self.n_values.is_empty() {
                    return Err(Error::InvalidConfig(
                        "invariant violated: n_values must be nonempty".into(),
                    ));
                }
                // pinned grids run with a documented looser guard
                let eps_min = self
                    .n_values
                    .iter()
                    .map(|&n| (n as f64).powf(-1.0 / theta))
                    .fold(f64::INFINITY, f64::min);
                self.check_resolution(eps_min, 1e-3)?;
            }
            MicroScaling => {
                if self.dim != 1 {
                    return Err(Error::InvalidConfig(
                        "invariant violated: the micro-scaling statistic is one-dimensional".into(),
                    ));
                }
                if self.n_values.is_empty() {
                    return Err(Error::InvalidConfig(
                        "invariant violated: n_values must be nonempty".into(),
                    ));
                }
                if self.replicas < 2 {
                    return Err(Error::InvalidConfig(
                        "invariant violated: at least two replicas required".into(),
                    ));
                }
                self.resolved_s()?;
            }
            VerifyAppendix => {}
        }
        Ok(())
    }

    fn single_eps(&self) -> Result<f64> {
        if self.eps_values.len() != 1 {
            return Err(Error::InvalidConfig(
                "invariant violated: exactly one particle width required".into(),
            ));
        }
        Ok(self.eps_values[0])
    }

    /// The grid-resolution rule: the Nyquist eigenvalue of the noise
    /// covariance must be negligible.
    fn check_resolution(&self, eps: f64, guard: f64) -> Result<()> {
        if !self.grid_points.is_power_of_two() || self.grid_points < 4 {
            return Err(Error::InvalidConfig(format!(
                "invariant violated: grid_points = {} must be a power of two >= 4",
                self.grid_points
            )));
        }
        let lam = crate::specfun::bessel_ratio((self.grid_points / 2) as u32, 0.5 / (eps * eps))?;
        if lam >= guard {
            let suggested = crate::solver::suggest_resolution(eps, guard)?;
            return Err(Error::InvalidConfig(format!(
                "invariant violated: Nyquist eigenvalue {lam:.3e} at width {eps} exceeds the \
                 resolution guard {guard:.1e}; use grid_points >= {suggested}"
            )));
        }
        Ok(())
    }
}
