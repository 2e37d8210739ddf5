//! Physics oracles for the time-domain solver.

use hosm::{fsbc_rhs, HosmConfig, HosmSolver, SolverState};
use ndarray::Array1;
use wavecore::spectral::fft_real;
use wavecore::Grid;

/// Right-travelling Airy wave consistent with the finite-depth dispersion
/// relation: eta = a cos(kx - wt), phis = (a g / w) sin(kx - wt).
fn airy_state(grid: &Grid, mode: usize, amplitude: f64, t: f64) -> SolverState {
    let k = grid.wavenumbers[mode];
    let omega = grid.dispersion(k);
    let eta: Array1<f64> = (0..grid.n_x)
        .map(|i| amplitude * (k * i as f64 * grid.dx - omega * t).cos())
        .collect();
    let phis: Array1<f64> = (0..grid.n_x)
        .map(|i| {
            amplitude * grid.gravity / omega * (k * i as f64 * grid.dx - omega * t).sin()
        })
        .collect();
    SolverState::new(eta, phis, t)
}

/// Phase of the given spatial harmonic.
fn harmonic_phase(eta: &Array1<f64>, mode: usize) -> f64 {
    let hat = fft_real(eta.as_slice().unwrap());
    hat[mode].arg()
}

fn harmonic_amplitude(eta: &Array1<f64>, mode: usize) -> f64 {
    let n = eta.len() as f64;
    let hat = fft_real(eta.as_slice().unwrap());
    2.0 * hat[mode].norm() / n
}

fn wrap_angle(a: f64) -> f64 {
    let mut x = a % std::f64::consts::TAU;
    if x > std::f64::consts::PI {
        x -= std::f64::consts::TAU;
    }
    if x < -std::f64::consts::PI {
        x += std::f64::consts::TAU;
    }
    x
}

#[test]
fn still_water_is_a_fixed_point() {
    let grid = Grid::new(500.0, 64, 20.0, 32, 100.0).unwrap();
    let cfg = HosmConfig::new(4, 0.1);
    let state = SolverState::zeros(64);
    let (de, dp) = fsbc_rhs(&state, &grid, &cfg).unwrap();
    assert!(de.iter().all(|&v| v == 0.0));
    assert!(dp.iter().all(|&v| v == 0.0));
}

#[test]
fn zero_state_stays_zero() {
    let grid = Grid::new(500.0, 64, 20.0, 32, 100.0).unwrap();
    let cfg = HosmConfig::new(4, 0.1);
    let solver = HosmSolver::new(&grid, &cfg).unwrap();
    let traj = solver.integrate(&SolverState::zeros(64), 5.0).unwrap();
    for s in traj {
        assert!(s.eta.iter().all(|&v| v == 0.0));
        assert!(s.phis.iter().all(|&v| v == 0.0));
    }
}

#[test]
fn small_amplitude_airy_rates_are_linear() {
    let grid = Grid::new(600.0, 128, 20.0, 32, 3000.0).unwrap();
    let cfg = HosmConfig::new(3, 0.05);
    let mode = 3;
    let k = grid.wavenumbers[mode];
    let omega = grid.dispersion(k);
    let a = 1e-3;
    let state = airy_state(&grid, mode, a, 0.0);
    let (de, dp) = fsbc_rhs(&state, &grid, &cfg).unwrap();
    let mut max_e: f64 = 0.0;
    let mut max_p: f64 = 0.0;
    for i in 0..grid.n_x {
        let x = i as f64 * grid.dx;
        let eta_t = a * omega * (k * x).sin();
        let phis_t = -grid.gravity * a * (k * x).cos();
        max_e = max_e.max((de[i] - eta_t).abs());
        max_p = max_p.max((dp[i] - phis_t).abs());
    }
    // Quadratic remainder with a comfortable constant.
    let bound_e = 50.0 * a * a * omega * k;
    let bound_p = 50.0 * a * a * grid.gravity * k;
    assert!(max_e < bound_e, "kinematic rate error {max_e:e} vs {bound_e:e}");
    assert!(max_p < bound_p, "dynamic rate error {max_p:e} vs {bound_p:e}");
}

#[test]
fn dynamic_rate_mean_is_bounded_by_nonlinear_terms() {
    let grid = Grid::new(600.0, 128, 20.0, 32, 3000.0).unwrap();
    let cfg = HosmConfig::new(4, 0.05);
    let state = airy_state(&grid, 4, 0.8, 0.0);
    let (_, dp) = fsbc_rhs(&state, &grid, &cfg).unwrap();
    let n = grid.n_x as f64;
    let mean_resid = (0..grid.n_x)
        .map(|i| dp[i] + grid.gravity * state.eta[i])
        .sum::<f64>()
        / n;
    // |mean(phis_t + g eta)| is a purely nonlinear quantity; bound it by the
    // max of the quadratic terms themselves.
    let k = grid.wavenumbers[4];
    let omega = grid.dispersion(k);
    let quad_scale = 0.5 * (0.8 * omega).powi(2);
    assert!(
        mean_resid.abs() <= quad_scale,
        "mean residual {mean_resid:e} vs quadratic scale {quad_scale:e}"
    );
}

#[test]
fn airy_wave_phase_and_amplitude_m1() {
    // Moderate-resolution version of the acceptance run.
    let grid = Grid::new(600.0, 128, 20.0, 32, 3000.0).unwrap();
    let cfg = HosmConfig::new(1, 0.025);
    let solver = HosmSolver::new(&grid, &cfg).unwrap();
    let mode = 4;
    let k = grid.wavenumbers[mode];
    let omega = grid.dispersion(k);
    let t_end = 3.0 * std::f64::consts::TAU / omega;
    // eps = 2 k std = sqrt(2) a k = 0.01
    let a = 0.01 / (std::f64::consts::SQRT_2 * k);
    let mut state = airy_state(&grid, mode, a, 0.0);
    solver.advance_to(&mut state, t_end).unwrap();
    let phase = harmonic_phase(&state.eta, mode);
    let expected = wrap_angle(-omega * t_end);
    let err = wrap_angle(phase - expected).abs();
    assert!(err < 1e-4, "phase error {err:e} rad over 3 periods");
    let amp = harmonic_amplitude(&state.eta, mode);
    assert!(
        (amp - a).abs() / a < 1e-3,
        "amplitude drift {:e}",
        (amp - a).abs() / a
    );
}

#[test]
fn halving_internal_dt_shows_high_order_convergence() {
    let grid = Grid::new(600.0, 64, 20.0, 32, 500.0).unwrap();
    let mode = 3;
    let a = 0.5;
    let run = |dt: f64| {
        let cfg = HosmConfig::new(3, dt);
        let solver = HosmSolver::new(&grid, &cfg).unwrap();
        let mut state = airy_state(&grid, mode, a, 0.0);
        solver.advance_to(&mut state, 10.0).unwrap();
        state.eta
    };
    let coarse = run(0.1);
    let fine = run(0.05);
    let num: f64 = coarse
        .iter()
        .zip(fine.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    let den: f64 = fine.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(num / den < 1e-5, "relative change {:e}", num / den);
}

#[test]
fn order_truncation_error_scales_with_steepness() {
    use wavecore::{sample_spectrum_realization, SpectrumParams};
    let grid = Grid::new(800.0, 128, 20.0, 32, 500.0).unwrap();
    let mut params = SpectrumParams::new(150.0, 0.02, 77);
    params.depth = grid.depth;
    let ic = sample_spectrum_realization(&params, &grid).unwrap();
    let t_p = grid.peak_period(150.0);
    let run = |order: usize| {
        let cfg = HosmConfig::new(order, t_p / 200.0);
        let solver = HosmSolver::new(&grid, &cfg).unwrap();
        let mut state = SolverState::new(ic.eta.clone(), ic.phis.clone(), 0.0);
        solver.advance_to(&mut state, t_p).unwrap();
        state.eta
    };
    let rel = |a: &Array1<f64>, b: &Array1<f64>| {
        let num: f64 = a
            .iter()
            .zip(b.iter())
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        let den: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        num / den
    };
    let e4 = run(4);
    let d1 = rel(&run(1), &e4);
    let d2 = rel(&run(2), &e4);
    let d3 = rel(&run(3), &e4);
    // Absolute agreement O(eps^{Ma+1}) on a field of size O(eps) means the
    // relative differences scale like eps^Ma. Measured constants are 1.3,
    // 10.2 and 3.5; the bound leaves margin while staying a factor 1/eps
    // below the next order.
    let eps = 0.02;
    assert!(d1 < 40.0 * eps, "M=1 vs M=4: {d1:e}");
    assert!(d2 < 40.0 * eps * eps, "M=2 vs M=4: {d2:e}");
    assert!(d3 < 40.0 * eps * eps * eps, "M=3 vs M=4: {d3:e}");
    assert!(d1 > d2 && d2 > d3, "ordering {d1:e} {d2:e} {d3:e}");
}

#[test]
fn spatial_mean_is_conserved() {
    use wavecore::{sample_spectrum_realization, SpectrumParams};
    let grid = Grid::new(800.0, 128, 20.0, 32, 500.0).unwrap();
    let mut params = SpectrumParams::new(150.0, 0.08, 5);
    params.depth = grid.depth;
    let ic = sample_spectrum_realization(&params, &grid).unwrap();
    let cfg = HosmConfig::new(4, 0.05);
    let solver = HosmSolver::new(&grid, &cfg).unwrap();
    let mut state = SolverState::new(ic.eta.clone(), ic.phis.clone(), 0.0);
    solver.advance_to(&mut state, 100.0).unwrap();
    let n = grid.n_x as f64;
    let mean = state.eta.sum() / n;
    let var = state.eta.iter().map(|v| v * v).sum::<f64>() / n;
    assert!(
        mean.abs() < 1e-6 * var.sqrt(),
        "mean {mean:e} vs std {:e}",
        var.sqrt()
    );
}

#[test]
fn divergence_is_reported_with_step() {
    let grid = Grid::new(600.0, 64, 20.0, 32, 500.0).unwrap();
    let mut cfg = HosmConfig::new(4, 0.05);
    cfg.amplitude_cap_factor = 0.1; // guaranteed trip
    let solver = HosmSolver::new(&grid, &cfg).unwrap();
    let mut state = airy_state(&grid, 3, 0.5, 0.0);
    let err = solver.advance_to(&mut state, 10.0).unwrap_err();
    match err {
        hosm::HosmError::SolverDiverged { .. } => {}
        other => panic!("expected SolverDiverged, got {other}"),
    }
}
