use num_complex::Complex64;
use rotwave_core::diagnostics::dispersion_measure;
use rotwave_core::dtn::{loglog_slope, DtnOrder};
use rotwave_core::dynamics::{
    hamiltonian, rhs_hphi, rhs_u, rhs_u_irrotational, step, ModelParams, RhsForm, SurfaceState, UState,
};
use rotwave_core::spectral::{Grid2D, RealField};
use rotwave_core::vorticity::{AnalyticFamily, VorticityProvider, VorticityTrace};
use std::f64::consts::PI;

fn params(order: u8, form: RhsForm, dt: f64) -> ModelParams {
    ModelParams::new(DtnOrder::new(order).unwrap(), form, dt, 1.0).unwrap()
}

fn generic_state(g: &Grid2D, eps: f64) -> SurfaceState {
    SurfaceState::new(
        RealField::from_fn(g, |x, y| eps * (x.cos() + 0.5 * (x + y).sin())),
        RealField::from_fn(g, |x, y| eps * (0.7 * x.sin() - 0.4 * (2.0 * y).cos())),
        0.0,
    )
    .unwrap()
}

fn run(mut s: SurfaceState, provider: &VorticityProvider, p: &ModelParams, steps: usize) -> SurfaceState {
    for _ in 0..steps {
        s = step(&s, provider, p).unwrap();
    }
    s
}

#[test]
fn cross_form_consistency_is_cubic() {
    let g = Grid2D::square(64).unwrap();
    let zero = VorticityTrace::zero(&g, 0.0);
    let eps = [0.01, 0.02, 0.04];
    let errs: Vec<f64> = eps
        .iter()
        .map(|&e| {
            let s = generic_state(&g, e);
            let (dh, dphi) = rhs_hphi(&s, &zero, &params(3, RhsForm::HPhi, 0.01)).unwrap();
            let mapped = UState::from_surface(&SurfaceState { h: dh, phi_omega: dphi, t: 0.0 }).u;
            let du = rhs_u(&UState::from_surface(&s), &zero, &params(2, RhsForm::U, 0.01)).unwrap();
            mapped.values().iter().zip(du.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
        })
        .collect();
    let slope = loglog_slope(&eps, &errs);
    assert!(slope >= 2.8, "{errs:?} slope {slope}");
}

#[test]
fn zero_provider_reduces_bitwise() {
    let g = Grid2D::square(32).unwrap();
    let s = generic_state(&g, 0.05);
    let p = params(2, RhsForm::U, 0.01);
    let trace = VorticityProvider::Zero.trace(&s.h, 0.0);
    let u = UState::from_surface(&s);
    assert_eq!(rhs_u(&u, &trace, &p).unwrap(), rhs_u_irrotational(&u, &p));
}

#[test]
fn linear_frequencies() {
    let g = Grid2D::square(32).unwrap();
    for (k, omega) in [((1, 0), 1.0), ((4, 0), 2.0), ((1, 1), 2f64.powf(0.25))] {
        let dt = 0.01;
        let p = params(2, RhsForm::U, dt);
        let steps = (4.0 * 2.0 * PI / omega / dt).ceil() as usize;
        let mut s = SurfaceState::linear_wave(&g, 1e-6, k).unwrap();
        let mut times = vec![0.0];
        let mut probe = vec![UState::from_surface(&s).u.to_spectral().mode(k.0, k.1)];
        for _ in 0..steps {
            s = step(&s, &VorticityProvider::Zero, &p).unwrap();
            times.push(s.t);
            probe.push(UState::from_surface(&s).u.to_spectral().mode(k.0, k.1));
        }
        let got = dispersion_measure(&times, &probe).unwrap();
        assert!((got - omega).abs() < 1e-4, "{k:?}: {got}");
        let scaled: Vec<Complex64> = probe.iter().map(|c| c * 3.0).collect();
        assert!((dispersion_measure(&times, &scaled).unwrap() - got).abs() < 1e-12);
    }
}

#[test]
fn step_refinement_is_fourth_order() {
    let g = Grid2D::square(32).unwrap();
    let t_end = 1.0;
    for form in [RhsForm::U, RhsForm::HPhi] {
        let dts = [0.1f64, 0.05, 0.025, 0.0125];
        let finals: Vec<SurfaceState> = dts
            .iter()
            .map(|&dt| {
                let n = (t_end / dt).round() as usize;
                run(SurfaceState::stokes(&g, 0.05), &VorticityProvider::Zero, &params(3, form, dt), n)
            })
            .collect();
        let diffs: Vec<f64> = finals
            .windows(2)
            .map(|w| (&w[0].h - &w[1].h).max_abs().max((&w[0].phi_omega - &w[1].phi_omega).max_abs()))
            .collect();
        let slope = loglog_slope(&dts[..3], &diffs);
        assert!(slope >= 3.8, "{form}: {diffs:?} slope {slope}");
    }
}

#[test]
fn energy_drift_shrinks_with_dt() {
    let g = Grid2D::square(32).unwrap();
    let dts = [0.04f64, 0.02, 0.01];
    let drifts: Vec<f64> = dts
        .iter()
        .map(|&dt| {
            let p = params(4, RhsForm::HPhi, dt);
            let s0 = generic_state(&g, 0.01);
            let e0 = hamiltonian(&s0, &p);
            let s = run(s0, &VorticityProvider::Zero, &p, (2.0 / dt).round() as usize);
            (hamiltonian(&s, &p) - e0).abs() / e0
        })
        .collect();
    assert!(drifts[2] < 1e-6, "{drifts:?}");
    let slope = loglog_slope(&dts, &drifts);
    assert!(slope >= 3.8, "{drifts:?} slope {slope}");
}

#[test]
fn linear_equipartition() {
    let g = Grid2D::square(16).unwrap();
    let dt = 2.0 * PI / 400.0;
    let p = params(2, RhsForm::U, dt);
    let mut s = SurfaceState::standing_wave(&g, 1e-5, (1, 0)).unwrap();
    let (mut pot, mut kin) = (0.0, 0.0);
    for _ in 0..800 {
        pot += 0.5 * s.h.inner(&s.h);
        kin += 0.5 * s.phi_omega.inner(&s.phi_omega.lambda_pow(1.0));
        s = step(&s, &VorticityProvider::Zero, &p).unwrap();
    }
    assert!((pot - kin).abs() < 0.01 * pot, "{pot} vs {kin}");
}

#[test]
fn mass_is_conserved_every_step() {
    let g = Grid2D::square(32).unwrap();
    let provider = VorticityProvider::Analytic(AnalyticFamily::GradientGaussian {
        amplitude: 0.01,
        width: 0.8,
        center: (PI, PI),
        frequency: 0.7,
    });
    for form in [RhsForm::U, RhsForm::HPhi] {
        let p = params(3, form, 0.05);
        let mut s = SurfaceState::stokes(&g, 0.05);
        s.h = &s.h + &RealField::constant(&g, 0.02);
        let m0 = s.h.mean();
        for _ in 0..40 {
            let next = step(&s, &provider, &p).unwrap();
            assert!((next.h.mean() - s.h.mean()).abs() < 1e-12);
            s = next;
        }
        assert!((s.h.mean() - m0).abs() < 1e-12);
    }
}
