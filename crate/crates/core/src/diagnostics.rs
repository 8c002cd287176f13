//! Bootstrap norms, their monitor, and frequency measurement.
//!
//! All norms act on `u = h + iΛ^{1/2}φ_ω`. Derivatives are spectral
//! multipliers and max norms are taken on the physical grid.
//!
//! The weighted profile norm uses the box-centered coordinate `x − l/2` as the
//! weight. On a torus this is only meaningful while the solution stays
//! localized away from the box edges.

use std::fmt;

use num_complex::Complex64;

use crate::dynamics::{hamiltonian, ModelParams, SurfaceState, UState};
use crate::error::{Error, Result};
use crate::spectral::{RealField, SpectralField};
use crate::vorticity::{curl_residual, VorticityTrace};

/// Constants of the bootstrap assumptions.
#[derive(Clone, Debug, PartialEq)]
pub struct BootstrapConfig {
    pub eps0: f64,
    pub eps1: f64,
    pub delta: f64,
    pub iota: f64,
    pub n_sobolev: u32,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self { eps0: 0.1, eps1: 1e-3, delta: 0.01, iota: 0.01, n_sobolev: 8 }
    }
}

impl BootstrapConfig {
    pub fn new(eps0: f64, eps1: f64, delta: f64, iota: f64, n_sobolev: u32) -> Result<Self> {
        let cfg = Self { eps0, eps1, delta, iota, n_sobolev };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("eps0", self.eps0), ("eps1", self.eps1)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("delta", self.delta), ("iota", self.iota)] {
            if !(v > 0.0 && v <= 0.1) {
                return Err(Error::Config(format!("{name} must lie in (0, 0.1], got {v}")));
            }
        }
        Ok(())
    }
}

/// One row of diagnostics at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub energy: f64,
    pub mean_h: f64,
    pub max_abs_h: f64,
    pub w4inf_norm: f64,
    pub hs_norm: f64,
    pub weighted_profile_norm: f64,
    pub curl_residual_max: f64,
}

/// `max_{|α| ≤ 4} max_x |∂^α u|`.
pub fn w4inf_norm(u_hat: &SpectralField) -> f64 {
    let grid = u_hat.grid().clone();
    let mut best: f64 = 0.0;
    for total in 0..=4i32 {
        for a in 0..=total {
            let b = total - a;
            let g = grid.clone();
            let du = u_hat.apply(move |idx| {
                let (k1, k2) = g.wavevector_odd(idx);
                Complex64::new(0.0, k1).powi(a) * Complex64::new(0.0, k2).powi(b)
            });
            best = best.max(du.to_complex().max_abs());
        }
    }
    best
}

/// `(Σ (1+|k|²)^N |û_k|² · lx·ly/(nx·ny)²)^{1/2}`, i.e. `‖⟨∇⟩^N u‖_{L²}`.
pub fn hs_norm(u_hat: &SpectralField, n: u32) -> f64 {
    let grid = u_hat.grid();
    let weighted = u_hat.apply_real(|idx| {
        let k = grid.kmag(idx);
        (1.0 + k * k).powf(0.5 * n as f64)
    });
    weighted.l2_norm_sq().sqrt()
}

/// `(Σ_i ‖Λ^ι (x_i f)‖²_{L²})^{1/2}` for the profile `f = e^{itΛ^{1/2}}u`,
/// with `x_i` measured from the box center.
pub fn weighted_profile_norm(u_hat: &SpectralField, t: f64, iota: f64) -> f64 {
    let grid = u_hat.grid().clone();
    let g = grid.clone();
    let profile = u_hat.apply(move |idx| Complex64::from_polar(1.0, t * g.kmag(idx).sqrt())).to_complex();
    let mut total = 0.0;
    for axis in 0..2 {
        let values = profile
            .values()
            .iter()
            .enumerate()
            .map(|(idx, &f)| {
                let (x1, x2) = grid.coords(idx);
                let w = if axis == 0 { x1 - 0.5 * grid.lx() } else { x2 - 0.5 * grid.ly() };
                f * w
            })
            .collect();
        let weighted = crate::spectral::ComplexField::new(&grid, values).expect("grid length");
        total += weighted.to_spectral().lambda_pow(iota).l2_norm_sq();
    }
    total.sqrt()
}

/// Diagnostics for `state` seen with vorticity `trace`.
///
/// The curl residual is that of `U_ω` against zero normal vorticity.
pub fn compute_record(
    state: &SurfaceState,
    trace: &VorticityTrace,
    params: &ModelParams,
    cfg: &BootstrapConfig,
) -> DiagnosticsRecord {
    let u_hat = UState::from_surface(state).u.to_spectral();
    let curl = if trace.is_zero() {
        0.0
    } else {
        curl_residual(&state.h, trace, &RealField::zeros(state.grid())).max_abs()
    };
    DiagnosticsRecord {
        t: state.t,
        energy: hamiltonian(state, params),
        mean_h: state.h.mean(),
        max_abs_h: state.h.max_abs(),
        w4inf_norm: w4inf_norm(&u_hat),
        hs_norm: hs_norm(&u_hat, cfg.n_sobolev),
        weighted_profile_norm: weighted_profile_norm(&u_hat, state.t, cfg.iota),
        curl_residual_max: curl,
    }
}

/// The bootstrap assumption that failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BootstrapClause {
    /// `‖u‖_{W^{4,∞}} ≤ ε₀/(1+t)`.
    Decay,
    /// `‖u‖_{H^N} ≤ ε₀(1+t)^δ`.
    Energy,
    /// `‖Λ^ι x e^{itΛ^{1/2}}u‖_{L²} ≤ ε₀(1+t)^δ`.
    Weighted,
}

impl BootstrapClause {
    pub fn name(self) -> &'static str {
        match self {
            Self::Decay => "bootstrap1",
            Self::Energy => "bootstrap2",
            Self::Weighted => "bootstrap3",
        }
    }
}

impl fmt::Display for BootstrapClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Violation {
    pub t: f64,
    pub clause: BootstrapClause,
    pub value: f64,
    pub bound: f64,
}

/// First clause violated by `record`, checked in clause order.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn check_record(record: &DiagnosticsRecord, cfg: &BootstrapConfig) -> Option<Violation> {
    let t = record.t;
    let growth = cfg.eps0 * (1.0 + t).powf(cfg.delta);
    [
        (BootstrapClause::Decay, record.w4inf_norm, cfg.eps0 / (1.0 + t)),
        (BootstrapClause::Energy, record.hs_norm, growth),
        (BootstrapClause::Weighted, record.weighted_profile_norm, growth),
    ]
    .into_iter()
    .find(|&(_, value, bound)| !(value <= bound))
    .map(|(clause, value, bound)| Violation { t, clause, value, bound })
}

/// Earliest violation of the bootstrap assumptions in a time-sorted series.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn bootstrap_monitor(series: &[DiagnosticsRecord], cfg: &BootstrapConfig) -> Result<Option<Violation>> {
    if series.is_empty() {
        return Err(Error::InvalidInput("empty diagnostics series".into()));
    }
    if series.windows(2).any(|w| !(w[0].t <= w[1].t)) {
        return Err(Error::InvalidInput("diagnostics series is not sorted by time".into()));
    }
    Ok(series.iter().find_map(|r| check_record(r, cfg)))
}

/// Angular frequency of a sampled Fourier coefficient.
///
/// Zero crossings of the real part give a first estimate and guard against
/// too-short records. A complex probe is then fitted by least squares on its
/// unwrapped phase; a real probe uses the interpolated crossing times.
pub fn dispersion_measure(times: &[f64], probe: &[Complex64]) -> Result<f64> {
    if times.len() != probe.len() {
        return Err(Error::InvalidInput(format!(
            "{} sample times for {} probe values",
            times.len(),
            probe.len()
        )));
    }
    let mut crossings = Vec::new();
    for i in 1..probe.len() {
        let (a, b) = (probe[i - 1].re, probe[i].re);
        if a == 0.0 && i == 1 {
            crossings.push(times[0]);
        }
        if (a < 0.0 && b >= 0.0) || (a > 0.0 && b <= 0.0) {
            let s = if a == b { 0.0 } else { a / (a - b) };
            crossings.push(times[i - 1] + s * (times[i] - times[i - 1]));
        }
    }
    crossings.dedup();
    if crossings.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} zero crossing(s); at least 2 are needed",
            crossings.len()
        )));
    }
    let n = crossings.len();
    let coarse = std::f64::consts::PI * (n - 1) as f64 / (crossings[n - 1] - crossings[0]);

    let scale = probe.iter().fold(0.0f64, |m, c| m.max(c.norm()));
    let imag = probe.iter().fold(0.0f64, |m, c| m.max(c.im.abs()));
    if imag <= 1e-12 * scale {
        return Ok(coarse);
    }
    let mut phase = Vec::with_capacity(probe.len());
    let mut prev = probe[0].arg();
    let mut offset = 0.0;
    for c in probe {
        let a = c.arg();
        let mut d = a - prev;
        while d > std::f64::consts::PI {
            d -= 2.0 * std::f64::consts::PI;
            offset -= 2.0 * std::f64::consts::PI;
        }
        while d < -std::f64::consts::PI {
            d += 2.0 * std::f64::consts::PI;
            offset += 2.0 * std::f64::consts::PI;
        }
        prev = a;
        phase.push(a + offset);
    }
    let m = times.len() as f64;
    let tm = times.iter().sum::<f64>() / m;
    let pm = phase.iter().sum::<f64>() / m;
    let (mut num, mut den) = (0.0, 0.0);
    for (t, p) in times.iter().zip(&phase) {
        num += (t - tm) * (p - pm);
        den += (t - tm) * (t - tm);
    }
    Ok((num / den).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dtn::DtnOrder;
    use crate::dynamics::RhsForm;
    use crate::spectral::Grid2D;
    use std::f64::consts::PI;

    fn grid() -> Grid2D {
        Grid2D::square(32).unwrap()
    }

    fn params() -> ModelParams {
        ModelParams::new(DtnOrder::new(2).unwrap(), RhsForm::HPhi, 0.01, 1.0).unwrap()
    }

    fn record(t: f64, w4: f64, hs: f64, wp: f64) -> DiagnosticsRecord {
        DiagnosticsRecord {
            t,
            energy: 0.0,
            mean_h: 0.0,
            max_abs_h: 0.0,
            w4inf_norm: w4,
            hs_norm: hs,
            weighted_profile_norm: wp,
            curl_residual_max: 0.0,
        }
    }

    #[test]
    fn config_ranges() {
        assert!(BootstrapConfig::default().validate().is_ok());
        assert!(BootstrapConfig::new(0.1, 0.01, 0.2, 0.01, 8).is_err());
        assert!(BootstrapConfig::new(0.1, 0.01, 0.01, 0.0, 8).is_err());
        assert!(BootstrapConfig::new(-1.0, 0.01, 0.01, 0.01, 8).is_err());
    }

    #[test]
    fn rest_state_norms_vanish() {
        let g = grid();
        let r = compute_record(&SurfaceState::rest(&g), &VorticityTrace::zero(&g, 0.0), &params(), &Default::default());
        assert_eq!(
            [r.energy, r.mean_h, r.max_abs_h, r.w4inf_norm, r.hs_norm, r.weighted_profile_norm, r.curl_residual_max],
            [0.0; 7]
        );
    }

    #[test]
    fn w4inf_of_cosine() {
        let g = grid();
        let eps = 0.02;
        let s = SurfaceState::standing_wave(&g, eps, (1, 0)).unwrap();
        let r = compute_record(&s, &VorticityTrace::zero(&g, 0.0), &params(), &Default::default());
        assert!((r.w4inf_norm - eps).abs() < 1e-12, "{}", r.w4inf_norm);
        // A wavenumber-2 mode is dominated by its fourth derivative: 16ε.
        let s = SurfaceState::standing_wave(&g, eps, (2, 0)).unwrap();
        let u = UState::from_surface(&s).u.to_spectral();
        assert!((w4inf_norm(&u) - 16.0 * eps).abs() < 1e-13);
    }

    #[test]
    fn hs_of_cosine() {
        let g = grid();
        let f = RealField::from_fn(&g, |x, _| (2.0 * x).cos());
        // ∫cos² = 2π², weight (1+4)^2.
        let expect = (25.0 * 2.0 * PI * PI).sqrt();
        assert!((hs_norm(&f.to_spectral(), 2) - expect).abs() < 1e-12);
        assert!((hs_norm(&f.to_spectral(), 0) - (2.0 * PI * PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn weighted_norm_matches_quadrature() {
        // As ι → 0, Λ^ι only removes the mean of x_i f.
        let g = Grid2D::square(64).unwrap();
        let u = RealField::from_fn(&g, |x, _| x.cos()).to_spectral();
        let mut quad = 0.0;
        for axis in 0..2 {
            let wf = RealField::from_fn(&g, |x1, x2| {
                let w = if axis == 0 { x1 - PI } else { x2 - PI };
                w * x1.cos()
            });
            let m = wf.mean();
            quad += wf.map(|v| (v - m) * (v - m)).integral();
        }
        let got = weighted_profile_norm(&u, 0.0, 1e-9);
        assert!((got - quad.sqrt()).abs() < 1e-6 * quad.sqrt(), "{got} vs {}", quad.sqrt());
    }

    #[test]
    fn norms_are_homogeneous() {
        let g = grid();
        let s = SurfaceState::stokes(&g, 0.05);
        let u = UState::from_surface(&s).u.to_spectral();
        for alpha in [-3.0, 0.5, 7.0] {
            let su = u.scale(alpha);
            let rel = |a: f64, b: f64| (a - b).abs() / b;
            assert!(rel(w4inf_norm(&su), alpha.abs() * w4inf_norm(&u)) < 1e-14);
            assert!(rel(hs_norm(&su, 8), alpha.abs() * hs_norm(&u, 8)) < 1e-14);
            assert!(rel(weighted_profile_norm(&su, 1.0, 0.01), alpha.abs() * weighted_profile_norm(&u, 1.0, 0.01)) < 1e-14);
        }
    }

    #[test]
    fn monitor_examples() {
        let cfg = BootstrapConfig::new(0.1, 1e-3, 0.01, 0.01, 8).unwrap();
        let times: Vec<f64> = (0..=20).map(|i| i as f64 * 0.5).collect();
        let quiet: Vec<_> = times.iter().map(|&t| record(t, 0.05 / (1.0 + t), 0.01, 0.01)).collect();
        assert_eq!(bootstrap_monitor(&quiet, &cfg).unwrap(), None);

        // Constant W^{4,∞} norm 0.1/6 first exceeds 0.1/(1+t) just after t = 5.
        let crossing: Vec<_> = times.iter().map(|&t| record(t, 0.1 / 5.9, 0.01, 0.01)).collect();
        let v = bootstrap_monitor(&crossing, &cfg).unwrap().unwrap();
        assert_eq!(v.t, 5.0);
        assert_eq!(v.clause.name(), "bootstrap1");

        let hs: Vec<_> = times.iter().map(|&t| record(t, 0.0, if t >= 2.0 { 0.2 } else { 0.01 }, 0.0)).collect();
        let v = bootstrap_monitor(&hs, &cfg).unwrap().unwrap();
        assert_eq!((v.t, v.clause), (2.0, BootstrapClause::Energy));
        assert_eq!(v.clause.to_string(), "bootstrap2");

        let wp: Vec<_> = times.iter().map(|&t| record(t, 0.0, 0.0, 0.05 * t)).collect();
        assert_eq!(bootstrap_monitor(&wp, &cfg).unwrap().unwrap().clause, BootstrapClause::Weighted);
    }

    #[test]
    fn monitor_rejects_bad_series() {
        let cfg = BootstrapConfig::default();
        assert!(matches!(bootstrap_monitor(&[], &cfg), Err(Error::InvalidInput(_))));
        let series = [record(1.0, 0.0, 0.0, 0.0), record(0.5, 0.0, 0.0, 0.0)];
        assert!(bootstrap_monitor(&series, &cfg).is_err());
        let nan = [record(0.0, f64::NAN, 0.0, 0.0)];
        assert_eq!(bootstrap_monitor(&nan, &cfg).unwrap().unwrap().clause, BootstrapClause::Decay);
    }

    fn sampled(omega: f64, amp: f64, t_end: f64, dt: f64, complex: bool) -> (Vec<f64>, Vec<Complex64>) {
        let n = (t_end / dt).round() as usize;
        let times: Vec<f64> = (0..=n).map(|i| i as f64 * dt).collect();
        let probe = times
            .iter()
            .map(|&t| {
                if complex {
                    Complex64::from_polar(amp, -omega * t)
                } else {
                    Complex64::new(amp * (omega * t).cos(), 0.0)
                }
            })
            .collect();
        (times, probe)
    }

    #[test]
    fn dispersion_on_clean_signals() {
        for omega in [1.0, 2.0, 2f64.powf(0.25)] {
            for complex in [true, false] {
                let (t, p) = sampled(omega, 1.0, 4.0 * 2.0 * PI / omega, 0.01, complex);
                let got = dispersion_measure(&t, &p).unwrap();
                assert!((got - omega).abs() < 1e-4 * omega, "{omega} {complex}: {got}");
                let (_, q) = sampled(omega, 1e-7, 4.0 * 2.0 * PI / omega, 0.01, complex);
                assert_eq!(dispersion_measure(&t, &q).unwrap(), got);
            }
        }
    }

    #[test]
    fn dispersion_needs_two_crossings() {
        let (t, p) = sampled(1.0, 1.0, 2.0, 0.01, true);
        assert!(matches!(dispersion_measure(&t, &p), Err(Error::InsufficientData(_))));
        assert!(dispersion_measure(&t[..3], &p).is_err());
    }
}
