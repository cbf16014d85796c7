//! Exponential-Euler time stepping of the density/momentum SPDE.
//!
//! One step is `X <- e^{A dt} [ X + dt a_U(X) + B(X) dW ]`: drift and noise
//! are applied first, then the exact propagator. The zero mode of the
//! density is touched by none of the three pieces, so mass is conserved bit
//! for bit. The noise term adds `sigma N^{-1/2} h_delta(rho) dW_l` to
//! momentum component `l` pointwise.

use super::noise::{sample_noise_increment_with, NoiseIncrement};
use super::propagator::propagator_apply;
use super::regularisation::RegularisationSpec;
use crate::error::{Error, Result};
use crate::fields::{PairState, ScalarField, SpectralField, TorusGrid};
use crate::particles::{LangevinParams, PotentialSpec};
use crate::spectrum::EigenSpectrum;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Spectral-side density/momentum pair: the solver's working state.
#[derive(Debug, Clone)]
pub struct SpectralPair {
    pub rho: SpectralField,
    pub momentum: Vec<SpectralField>,
    pub time: f64,
}

impl SpectralPair {
    pub fn from_state(state: &PairState) -> Self {
        Self {
            rho: state.rho.to_spectral(),
            momentum: state.momentum.iter().map(|m| m.to_spectral()).collect(),
            time: state.time,
        }
    }

    pub fn to_state(&self) -> PairState {
        PairState {
            rho: self.rho.to_field(),
            momentum: self.momentum.iter().map(|m| m.to_field()).collect(),
            time: self.time,
        }
    }

    /// Pair norm straight from the coefficients.
    pub fn pair_norm(&self, s: f64) -> f64 {
        let mut acc = self.rho.hs_norm(s).powi(2);
        for m in &self.momentum {
            acc += m.hs_norm(s).powi(2);
        }
        acc.sqrt()
    }

    /// Pair norm of the difference of two states, without transforms.
    pub fn pair_norm_diff(&self, other: &SpectralPair, s: f64) -> Result<f64> {
        let mut acc = self.rho.sub(&other.rho)?.hs_norm(s).powi(2);
        for (a, b) in self.momentum.iter().zip(&other.momentum) {
            acc += a.sub(b)?.hs_norm(s).powi(2);
        }
        Ok(acc.sqrt())
    }
}

/// Outcome of the exit monitor at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum ExitStatus {
    Inside,
    /// The density dipped to the regularisation threshold.
    RhoHit,
    /// The pair norm reached the confinement radius.
    NormHit,
}

/// Stopping-time monitor: `RhoHit` if `min rho <= delta`, `NormHit` if the
/// pair norm reaches `radius`; the density threshold takes precedence when
/// both trigger in the same step.
pub fn monitor_exit(state: &PairState, delta: f64, radius: f64, s: f64) -> ExitStatus {
    if state.rho.min_value() <= delta {
        ExitStatus::RhoHit
    } else if state.pair_norm(s) >= radius {
        ExitStatus::NormHit
    } else {
        ExitStatus::Inside
    }
}

/// Discretisation and model parameters of one SPDE run.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SolverConfig {
    /// Time step.
    pub dt: f64,
    /// Horizon `T`.
    pub horizon: f64,
    /// 2/3-rule truncation of the pointwise products. Default on.
    pub dealias: bool,
    /// Particle-count parameter of the noise amplitude `sigma N^{-1/2}`.
    pub n_particles: u64,
    /// Particle width.
    pub eps: f64,
    /// Diagnostic regularity index.
    pub sobolev_s: f64,
    /// Norm radius of the exit monitor.
    pub exit_radius: f64,
    /// Density threshold of the exit monitor and of the regularised root.
    pub delta: f64,
    /// Largest admissible eigenvalue at the Nyquist order; an under-resolved
    /// noise spectrum misstates the trace, so the constructor refuses grids
    /// that violate this. Ignored when `noise` is off.
    pub resolution_guard: f64,
    /// Stochastic forcing on/off (off = the noise-free reference dynamics;
    /// the drift keeps its full form either way).
    pub noise: bool,
}

impl SolverConfig {
    pub fn new(dt: f64, horizon: f64, n_particles: u64, eps: f64, sobolev_s: f64) -> Result<Self> {
        let cfg = Self {
            dt,
            horizon,
            dealias: true,
            n_particles,
            eps,
            sobolev_s,
            exit_radius: f64::INFINITY,
            delta: 1e-2,
            resolution_guard: 1e-8,
            noise: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if self.horizon < self.dt {
            return Err(Error::InvalidConfig(format!(
                "horizon {} shorter than one step {}",
                self.horizon, self.dt
            )));
        }
        if self.n_particles == 0 {
            return Err(Error::InvalidConfig(
                "noise particle count must be >= 1".into(),
            ));
        }
        if !(self.eps > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "particle width must be positive, got {}",
                self.eps
            )));
        }
        if !(self.delta > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "delta must be positive, got {}",
                self.delta
            )));
        }
        Ok(())
    }
}

/// Exponential-Euler solver owning its state and noise stream.
#[derive(Debug)]
pub struct RidkSolver {
    grid: TorusGrid,
    config: SolverConfig,
    params: LangevinParams,
    reg: RegularisationSpec,
    spectrum: EigenSpectrum,
    state: SpectralPair,
    rng: ChaCha12Rng,
    step_index: usize,
    /// Spectral gradient of the interaction potential, per axis (cached).
    grad_potential: Option<Vec<SpectralField>>,
}

impl RidkSolver {
    pub fn new(
        grid: TorusGrid,
        config: SolverConfig,
        params: LangevinParams,
        initial: &PairState,
        seed: u64,
    ) -> Result<Self> {
        config.validate()?;
        if initial.rho.grid() != grid {
            return Err(Error::SizeMismatch(
                "initial state on a different grid".into(),
            ));
        }
        let m = grid.points_per_axis();
        let spectrum = EigenSpectrum::build(config.eps, grid.dim(), m / 2)?;
        if config.noise && params.sigma > 0.0 {
            let nyquist = spectrum.axis_eigenvalue((m / 2) as i64);
            if nyquist >= config.resolution_guard {
                let suggested = suggest_resolution(config.eps, config.resolution_guard)?;
                return Err(Error::InvalidConfig(format!(
                    "grid is too coarse for the noise spectrum: eigenvalue {nyquist:.3e} at \
                     order {} exceeds the resolution guard {:.1e}; use at least {} points per axis",
                    m / 2,
                    config.resolution_guard,
                    suggested
                )));
            }
        }
        let reg = RegularisationSpec::new(config.delta, grid.dim())?;
        let grad_potential = match params.potential {
            PotentialSpec::Zero => None,
            PotentialSpec::Cosine { .. } => {
                let mut fields = Vec::with_capacity(grid.dim());
                for axis in 0..grid.dim() {
                    let f = ScalarField::from_fn(grid, |x| params.potential.gradient_axis(x, axis));
                    fields.push(f.to_spectral());
                }
                Some(fields)
            }
        };
        Ok(Self {
            grid,
            config,
            params,
            reg,
            spectrum,
            state: SpectralPair::from_state(initial),
            rng: ChaCha12Rng::seed_from_u64(seed),
            step_index: 0,
            grad_potential,
        })
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn params(&self) -> &LangevinParams {
        &self.params
    }

    pub fn regularisation(&self) -> &RegularisationSpec {
        &self.reg
    }

    pub fn time(&self) -> f64 {
        self.state.time
    }

    pub fn step_index(&self) -> usize {
        self.step_index
    }

    pub fn spectral_state(&self) -> &SpectralPair {
        &self.state
    }

    pub fn state(&self) -> PairState {
        self.state.to_state()
    }

    /// Raw bits of the density zero mode (the conserved mass coordinate).
    pub fn rho_zero_mode(&self) -> f64 {
        self.state.rho.coeffs()[0].re
    }

    /// Total mass `(2 pi)^d rho-hat(0)`.
    pub fn mass(&self) -> f64 {
        self.rho_zero_mode() * (2.0 * std::f64::consts::PI).powi(self.grid.dim() as i32)
    }

    pub fn monitor_exit(&self) -> ExitStatus {
        monitor_exit(
            &self.state.to_state(),
            self.config.delta,
            self.config.exit_radius,
            self.config.sobolev_s,
        )
    }

    /// Draw the increment for one step from the solver's own stream.
    pub fn draw_increment(&mut self) -> Result<NoiseIncrement> {
        sample_noise_increment_with(&self.spectrum, self.config.dt, self.grid, &mut self.rng)
    }

    /// One exponential-Euler step with a caller-supplied increment (`None`
    /// for the noise-free dynamics).
    pub fn step_with_increment(&mut self, increment: Option<&NoiseIncrement>) -> Result<()> {
        let dt = self.config.dt;
        let rho_field = self.state.rho.to_field();

        // interaction drift: momentum tendency -rho (grad U * rho)
        if let Some(grads) = &self.grad_potential {
            for (axis, grad_hat) in grads.iter().enumerate() {
                let conv = crate::fields::convolve_spectral(grad_hat, &self.state.rho)?.to_field();
                let mut tendency = rho_field.pointwise_mul(&conv)?.to_spectral();
                tendency.scale(-dt);
                if self.config.dealias {
                    tendency.dealias();
                }
                self.state.momentum[axis].add_assign(&tendency)?;
            }
        }

        // multiplicative noise: sigma N^{-1/2} h_delta(rho) dW_l
        if let Some(inc) = increment {
            if inc.components.len() != self.grid.dim() {
                return Err(Error::SizeMismatch("increment dimension mismatch".into()));
            }
            let amp = self.params.sigma / (self.config.n_particles as f64).sqrt();
            let h_field = self.reg.apply(&rho_field);
            for (axis, comp) in inc.components.iter().enumerate() {
                let mut forcing = h_field.pointwise_mul(&comp.to_field())?.to_spectral();
                forcing.scale(amp);
                if self.config.dealias {
                    forcing.dealias();
                }
                self.state.momentum[axis].add_assign(&forcing)?;
            }
        }

        propagator_apply(
            &mut self.state.rho,
            &mut self.state.momentum,
            dt,
            self.params.gamma,
            self.params.momentum_variance(),
        )?;

        self.state.time += dt;
        self.step_index += 1;

        // cheap blow-up sentinel on the density coefficients
        let probe = self
            .state
            .rho
            .coeffs()
            .iter()
            .take(8)
            .map(|c| c.norm_sqr())
            .sum::<f64>();
        if !probe.is_finite() {
            return Err(Error::BlowUp {
                step: self.step_index,
            });
        }
        Ok(())
    }

    /// One step, drawing the increment from the internal stream when the
    /// noise is on.
    pub fn step(&mut self) -> Result<()> {
        if self.config.noise && self.params.sigma > 0.0 {
            let inc = self.draw_increment()?;
            self.step_with_increment(Some(&inc))
        } else {
            self.step_with_increment(None)
        }
    }
}

/// Mean-field interaction tendency of the SPDE: density component zero,
/// momentum components `-rho (grad_l U * rho)` with the convolution spectral
/// and the product pointwise. The solver applies the same formula through
/// its cached potential gradients.
pub fn interaction_drift(state: &PairState, potential: &PotentialSpec) -> Result<PairState> {
    let grid = state.rho.grid();
    let zero = PairState::zeros(grid);
    if potential.is_zero() {
        return Ok(zero);
    }
    let rho_hat = state.rho.to_spectral();
    let mut momentum = Vec::with_capacity(grid.dim());
    for axis in 0..grid.dim() {
        let grad = ScalarField::from_fn(grid, |x| potential.gradient_axis(x, axis)).to_spectral();
        let conv = crate::fields::convolve_spectral(&grad, &rho_hat)?.to_field();
        let mut tendency = state.rho.pointwise_mul(&conv)?;
        tendency.scale(-1.0);
        momentum.push(tendency);
    }
    PairState::new(ScalarField::zeros(grid), momentum, state.time)
}

/// Smallest power-of-two point count whose Nyquist eigenvalue clears the
/// resolution guard.
pub fn suggest_resolution(eps: f64, guard: f64) -> Result<usize> {
    let mut m = 8usize;
    while m < (1 << 24) {
        let lambda = crate::specfun::bessel_ratio((m / 2) as u32, 0.5 / (eps * eps))?;
        if lambda < guard {
            return Ok(m);
        }
        m *= 2;
    }
    Err(Error::InvalidConfig(format!(
        "no affordable grid resolves width {eps} under guard {guard}"
    )))
}

/// Deterministic trajectory of the noise-free dynamics from `initial`,
/// recorded every `stride` steps (snapshot 0 is the initial state).
pub fn solve_noise_free(
    grid: TorusGrid,
    config: &SolverConfig,
    params: &LangevinParams,
    initial: &PairState,
    stride: usize,
) -> Result<Vec<PairState>> {
    let mut cfg = config.clone();
    cfg.noise = false;
    let mut solver = RidkSolver::new(grid, cfg, *params, initial, 0)?;
    let steps = (config.horizon / config.dt).round() as usize;
    let stride = stride.max(1);
    let mut out = vec![solver.state()];
    for k in 1..=steps {
        solver.step()?;
        if k % stride == 0 || k == steps {
            out.push(solver.state());
        }
    }
    Ok(out)
}
