//! Acceptance suite: one test per desk-scale claim, one pass/fail line each
//! (run with `--nocapture` to see them). Tolerances are pinned in the
//! assertions; the oracles live in the shared test-support module and are
//! independent of the implementation paths they check.

#[path = "../../ridk/tests/common/mod.rs"]
mod common;

use common::{bessel_ratio_quadrature, mode_ode_rk4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use ridk::combinatorics::{
    double_difference_expand, enumerate_partitions, faa_di_bruno_derivative,
    product_difference_expand, BELL,
};
use ridk::fields::{ScalarField, TorusGrid};
use ridk::particles::{
    micro_scaling_exact, micro_scaling_statistic, LangevinParams, PotentialSpec,
};
use ridk::solver::{
    mode_energy, mode_propagate, noise_hs_norm, smoothed_cosine_initial, ConvergenceSetup,
    RegularisationSpec, RidkSolver, SolverConfig,
};
use ridk::spectrum::{
    log_log_slope, minimise_bound_exponent, sobolev_trace, suggest_j_max, theta_critical,
};
use rustfft::num_complex::Complex64;
use std::process::Command;

fn pass(criterion: &str, detail: String) {
    println!("criterion {criterion}: PASS ({detail})");
}

#[test]
fn criterion_01_bessel_ratio_oracle() {
    // quadrature agreement at rel 1e-9 over the resolvable grid, and the
    // consecutive-ratio bound at every point
    let mut compared = 0usize;
    let mut worst_rel = 0.0f64;
    for &x in &[1.0, 2.0, 10.0, 100.0, 1e4] {
        let table = ridk::specfun::ratio_table(200, x).unwrap();
        let consecutive = ridk::specfun::consecutive_ratio_table(200, x).unwrap();
        for j in 0..=200usize {
            // sharp upper bound on the consecutive ratio
            assert!(
                consecutive[j] < x / (j as f64 + 0.5 + x),
                "bound violated at j={j} x={x}"
            );
            match bessel_ratio_quadrature(j as u32, x) {
                Some(oracle) => {
                    compared += 1;
                    let rel = ((table[j] - oracle) / oracle).abs();
                    worst_rel = worst_rel.max(rel);
                    assert!(rel < 1e-9, "j={j} x={x}: rel {rel:.2e}");
                }
                None => {
                    // under the quadrature's cancellation floor: the value
                    // must be negligible (no noise mass lives there)
                    assert!(table[j] < 6e-5, "j={j} x={x}");
                }
            }
        }
    }
    pass(
        "01 bessel-oracle",
        format!("{compared} grid points, worst rel {worst_rel:.2e}"),
    );
}

#[test]
fn criterion_02_trace_scaling_and_exponent_calculus() {
    let eps_grid = [0.2, 0.1, 0.05, 0.025];
    let mut details = Vec::new();
    for &(d, s) in &[(1usize, 0.55), (2, 1.05), (3, 1.55)] {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for &eps in &eps_grid {
            let j_max = suggest_j_max(eps, s).unwrap();
            xs.push(1.0 / eps);
            ys.push(sobolev_trace(s, eps, d, j_max).unwrap());
        }
        let slope = log_log_slope(&xs, &ys).unwrap();
        let theta = theta_critical(s, d);
        let rel = ((slope - theta) / theta).abs();
        assert!(rel < 0.05, "d={d} s={s}: slope {slope} vs {theta}");
        details.push(format!("d={d}: {slope:.3} vs {theta}"));

        let (a, b, v) = minimise_bound_exponent(s, d, 0.01);
        assert!(
            (a - 0.5).abs() < 1e-12 && (b - 0.5).abs() < 1e-12,
            "argmin ({a}, {b})"
        );
        assert!((v - theta).abs() < 1e-9);
    }
    pass("02 trace-scaling", details.join("; "));
}

#[test]
fn criterion_03_semigroup_contraction() {
    let mut rng = ChaCha12Rng::seed_from_u64(303);
    let gamma = 1.0;
    let c = 0.5;
    let mut worst_ode = 0.0f64;
    for trial in 0..1000 {
        let rho = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let u = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        // every tenth trial sits exactly on the double root c k^2 = gamma^2/4
        let (k, cc) = if trial % 10 == 0 {
            let k = rng.gen_range(1..6) as f64;
            (k, gamma * gamma / (4.0 * k * k))
        } else {
            (rng.gen_range(0..14) as f64, c)
        };
        let t = rng.gen_range(0.0..5.0);
        let before = mode_energy(rho, u, cc);
        let (r, v) = mode_propagate(rho, u, k, t, gamma, cc);
        let after = mode_energy(r, v, cc);
        assert!(
            after <= before * (1.0 + 1e-12),
            "energy grew at k={k} t={t}"
        );

        let oracle = mode_ode_rk4(rho, u, k, t, gamma, cc, 20_000);
        let scale = (oracle.0.norm() + oracle.1.norm()).max(1e-12);
        let err = ((r - oracle.0).norm() + (v - oracle.1).norm()) / scale;
        worst_ode = worst_ode.max(err);
        assert!(err < 1e-8, "ODE oracle deviation {err:.2e} at k={k} t={t}");
    }
    pass(
        "03 contraction",
        format!("1000 modes, worst ODE deviation {worst_ode:.2e}"),
    );
}

#[test]
fn criterion_04_noise_law() {
    // empirical covariance at 20 offsets vs dt * w_{sqrt2 eps}(r), 3-sigma
    let grid = TorusGrid::new(1, 128).unwrap();
    let offsets: Vec<usize> = (1..=20).map(|i| 3 * i).collect();
    let worst =
        ridk::experiments::noise_covariance_deviation(0.1, 0.01, grid, 10_000, &offsets, 404)
            .unwrap();
    assert!(worst < 3.0, "covariance deviation {worst:.2} sigma");

    // s-independence: two diagnostic indices, one seed, bit-identical states
    let params = LangevinParams::new(1.0, 0.8, PotentialSpec::Zero).unwrap();
    let initial = smoothed_cosine_initial(grid, 0.5, 0.1).unwrap();
    let mk = |s: f64| SolverConfig {
        dt: 0.01,
        horizon: 1.0,
        dealias: true,
        n_particles: 1000,
        eps: 0.1,
        sobolev_s: s,
        exit_radius: 10.0,
        delta: 0.01,
        resolution_guard: 1e-8,
        noise: true,
    };
    let mut a = RidkSolver::new(grid, mk(0.55), params, &initial, 4040).unwrap();
    let mut b = RidkSolver::new(grid, mk(1.05), params, &initial, 4040).unwrap();
    for _ in 0..20 {
        a.step().unwrap();
        b.step().unwrap();
    }
    for (x, y) in a.state().rho.values().iter().zip(b.state().rho.values()) {
        assert_eq!(
            x.to_bits(),
            y.to_bits(),
            "diagnostic index leaked into the noise"
        );
    }
    pass(
        "04 noise-law",
        format!("worst covariance deviation {worst:.2} sigma; s-independent"),
    );
}

#[test]
fn criterion_05_mass_conservation() {
    let grid = TorusGrid::new(1, 64).unwrap();
    let params = LangevinParams::new(1.0, 0.5, PotentialSpec::Cosine { amplitude: 0.3 }).unwrap();
    let cfg = SolverConfig {
        dt: 0.005,
        horizon: 5.0,
        dealias: true,
        n_particles: 1000,
        eps: 0.2,
        sobolev_s: 0.55,
        exit_radius: 50.0,
        delta: 0.005,
        resolution_guard: 1e-8,
        noise: true,
    };
    let initial = smoothed_cosine_initial(grid, 0.5, 0.2).unwrap();
    let mut solver = RidkSolver::new(grid, cfg, params, &initial, 505).unwrap();
    let before = solver.rho_zero_mode().to_bits();
    for _ in 0..1000 {
        solver.step().unwrap();
    }
    assert_eq!(solver.rho_zero_mode().to_bits(), before, "mass drifted");
    pass(
        "05 mass-conservation",
        "zero mode bit-identical over 1000 noisy steps".into(),
    );
}

#[test]
fn criterion_06_noise_norm_scaling() {
    // exact 1/N factor
    let grid = TorusGrid::new(1, 32).unwrap();
    let reg = RegularisationSpec::new(0.05, 1).unwrap();
    let rho = ScalarField::constant(grid, 0.3);
    let a = noise_hs_norm(&rho, &reg, 1.0, 1000, 0.1, 0.55).unwrap();
    let b = noise_hs_norm(&rho, &reg, 1.0, 2000, 0.1, 0.55).unwrap();
    assert_eq!((a / b).to_bits(), 2.0f64.to_bits(), "1/N factor not exact");

    // width slope within 5% of 2s+d for d in {1, 2}
    let mut details = vec![format!("N halving exact")];
    let cases: [(usize, f64, usize, &[f64]); 2] = [
        (1, 0.55, 64, &[0.2, 0.1, 0.05, 0.025]),
        (2, 1.05, 16, &[0.2, 0.1, 0.05]),
    ];
    for &(d, s, m, eps_grid) in &cases {
        let grid = TorusGrid::new(d, m).unwrap();
        let reg = RegularisationSpec::new(0.05, d).unwrap();
        let rho = ScalarField::constant(grid, 0.3);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for &eps in eps_grid {
            xs.push(1.0 / eps);
            ys.push(noise_hs_norm(&rho, &reg, 1.0, 1000, eps, s).unwrap());
        }
        let slope = log_log_slope(&xs, &ys).unwrap();
        let theta = theta_critical(s, d);
        let rel = ((slope - theta) / theta).abs();
        assert!(rel < 0.05, "d={d}: slope {slope} vs {theta}");
        details.push(format!("d={d} slope {slope:.3} vs {theta}"));
    }
    pass("06 noise-norm-scaling", details.join("; "));
}

#[test]
fn criterion_07_vanishing_noise_convergence() {
    let setup = ConvergenceSetup {
        dim: 1,
        theta: 3.0,
        n_values: vec![1_000, 10_000, 100_000],
        replicas: 50,
        sobolev_s: 0.55,
        grid_points: 256,
        dt: 0.005,
        gamma: 1.0,
        sigma: 0.5,
        interaction: PotentialSpec::Cosine { amplitude: 0.1 },
        delta: 0.02,
        exit_radius: 2.0,
        ic_amplitude: 0.5,
        horizon_candidates: vec![1.0, 0.5, 0.25],
        resolution_guard: 1e-3,
    };
    let out = ridk::solver::convergence_experiment(&setup, 2024).unwrap();
    let means: Vec<f64> = out.aggregates.iter().map(|a| a.mean_sup_error).collect();
    assert!(
        means.windows(2).all(|w| w[1] < w[0]),
        "error not strictly decreasing: {means:?}"
    );
    let dev = (out.fitted_slope - out.theoretical_slope).abs();
    assert!(
        dev <= 0.1,
        "slope {} vs {} (|dev| = {dev})",
        out.fitted_slope,
        out.theoretical_slope
    );
    let fractions: Vec<f64> = out.aggregates.iter().map(|a| a.no_exit_fraction).collect();
    assert!(
        fractions.windows(2).all(|w| w[1] >= w[0]),
        "no-exit fraction not monotone: {fractions:?}"
    );
    pass(
        "07 vanishing-noise",
        format!(
            "T={}, slope {:.4} vs {:.4}, errors {:?}",
            out.horizon, out.fitted_slope, out.theoretical_slope, means
        ),
    );
}

#[test]
fn criterion_08_micro_meso_scaling() {
    // Monte Carlo vs the uniform-law closed form at the pinned point
    let mut rng = ChaCha12Rng::seed_from_u64(808);
    let est = micro_scaling_statistic(1000, 0.1, 0.55, 200, &mut rng).unwrap();
    let exact = micro_scaling_exact(0.1, 0.55).unwrap();
    let dev = (est.centred - exact).abs();
    assert!(
        dev < 3.0 * est.std_error,
        "{} vs {exact} (3se {})",
        est.centred,
        3.0 * est.std_error
    );

    // boundedness of the closed-form sequence along the critical coupling
    let theta_c = theta_critical(0.55, 1);
    let seq: Vec<f64> = [1e3f64, 1e4, 1e5]
        .iter()
        .map(|&n| micro_scaling_exact(n.powf(-1.0 / theta_c), 0.55).unwrap())
        .collect();
    let ratio =
        seq.iter().cloned().fold(f64::MIN, f64::max) / seq.iter().cloned().fold(f64::MAX, f64::min);
    assert!(ratio < 3.0, "sequence spread {ratio}: {seq:?}");
    pass(
        "08 micro-meso-scaling",
        format!(
            "MC {:.6} vs exact {exact:.6} (se {:.1e}); spread {ratio:.4}",
            est.centred, est.std_error
        ),
    );
}

#[test]
fn criterion_09_appendix_suite() {
    // telescoping identities on 1e3 random instances
    let mut rng = ChaCha12Rng::seed_from_u64(909);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let len = rng.gen_range(1..=8);
        let draw = |rng: &mut ChaCha12Rng| -> Vec<f64> {
            (0..len).map(|_| rng.gen_range(-2.0..2.0)).collect()
        };
        let (a, b, c, d) = (
            draw(&mut rng),
            draw(&mut rng),
            draw(&mut rng),
            draw(&mut rng),
        );
        worst = worst.max(product_difference_expand(&a, &b).unwrap().residual());
        worst = worst.max(double_difference_expand(&a, &b, &c, &d).unwrap().residual());
    }
    assert!(worst < 1e-12, "telescoping residual {worst:.2e}");

    // partition counts
    for alpha in 1..=8 {
        assert_eq!(
            enumerate_partitions(alpha).unwrap().len() as u64,
            BELL[alpha]
        );
    }

    // partition-expansion derivative vs nested finite differences, probed
    // away from the blend boundary
    let grid = TorusGrid::new(2, 64).unwrap();
    let h = RegularisationSpec::new(0.3, 2).unwrap();
    let profile = |x: &[f64]| 0.5 + 0.2 * x[0].cos() + 0.1 * x[1].sin();
    let u = ScalarField::from_fn(grid, profile);
    let formula = faa_di_bruno_derivative(&h, &u, &[0, 1]).unwrap();
    let step = 1e-3;
    let scale = formula.c0_norm();
    let mut worst_fd = 0.0f64;
    for probe in [7usize, 513, 1300, 2222, 3891] {
        let node = grid.node(probe);
        let f = |dx: f64, dy: f64| h.h(profile(&[node[0] + dx, node[1] + dy]));
        let fd = (f(step, step) - f(step, -step) - f(-step, step) + f(-step, -step))
            / (4.0 * step * step);
        worst_fd = worst_fd.max((formula.values()[probe] - fd).abs() / scale);
    }
    assert!(worst_fd < 1e-5, "mixed-derivative deviation {worst_fd:.2e}");

    // spectral integration by parts
    let residual = ridk::experiments::integration_by_parts_residual(99).unwrap();
    assert!(
        residual < 1e-10,
        "integration-by-parts residual {residual:.2e}"
    );
    pass(
        "09 appendix-suite",
        format!("telescoping {worst:.1e}; FD {worst_fd:.1e}; parts {residual:.1e}"),
    );
}

#[test]
fn criterion_10_cli_determinism() {
    let bin = env!("CARGO_BIN_EXE_ridk");
    let base = tempfile::tempdir().unwrap();
    let mut digests = Vec::new();
    for run in 0..2 {
        let out = base.path().join(format!("run{run}"));
        let status = Command::new(bin)
            .args([
                "trace-scaling",
                "--d",
                "1",
                "--s",
                "0.55",
                "--eps",
                "0.2,0.1,0.05,0.025",
                "--seed",
                "42",
                "--out",
            ])
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success(), "trace-scaling exited nonzero");
        let status = Command::new(bin)
            .args([
                "micro-scaling",
                "--n",
                "500",
                "--s",
                "0.55",
                "--replicas",
                "20",
                "--seed",
                "7",
                "--out",
            ])
            .arg(out.join("micro"))
            .status()
            .unwrap();
        assert!(status.success(), "micro-scaling exited nonzero");

        let mut bytes = Vec::new();
        for file in [
            "rows.csv",
            "checks.csv",
            "summary.json",
            "figures/trace-scaling.csv",
            "micro/rows.csv",
            "micro/summary.json",
        ] {
            bytes.extend(std::fs::read(out.join(file)).unwrap());
        }
        digests.push(bytes);
    }
    assert_eq!(
        digests[0], digests[1],
        "repeated runs are not byte-identical"
    );
    pass("10 cli-determinism", "two full runs byte-identical".into());
}
