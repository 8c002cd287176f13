//! Boundary evolution in the `(h, φ_ω)` and complex `u` forms.
//!
//! The `(h, φ_ω)` right-hand side is the full Zakharov–Craig–Sulem system with
//! the truncated DtN series. The `u` form keeps the linear dispersive part
//! `−iΛ^{1/2}u` exact and expands the rest to cubic order; its coefficients are
//! fixed by matching the `(h, φ_ω)` form term by term.

use num_complex::Complex64;

use crate::dtn::{dtn_apply_spectral, DtnOrder};
use crate::error::{Error, Result};
use crate::spectral::{riesz_dot, Axis, ComplexField, Grid2D, RealField, SpectralField, VectorField};
use crate::vorticity::{curl_residual, recover_a_omega, VorticityProvider, VorticityTrace, ADMISSIBILITY_TOL};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Elevation and vorticity-adjusted potential at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceState {
    pub h: RealField,
    pub phi_omega: RealField,
    pub t: f64,
}

impl SurfaceState {
    pub fn new(h: RealField, phi_omega: RealField, t: f64) -> Result<Self> {
        if h.grid() != phi_omega.grid() {
            return Err(Error::Config("h and phi_omega on different grids".into()));
        }
        if !(h.is_finite() && phi_omega.is_finite() && t.is_finite()) {
            return Err(Error::InvalidInput("state has non-finite values".into()));
        }
        Ok(Self { h, phi_omega, t })
    }

    pub fn rest(grid: &Grid2D) -> Self {
        Self { h: RealField::zeros(grid), phi_omega: RealField::zeros(grid), t: 0.0 }
    }

    /// Right-moving linear wave `u = ε e^{ik·x}`: `h = ε cos(k·x)`,
    /// `φ_ω = ε|k|^{-1/2} sin(k·x)`.
    pub fn linear_wave(grid: &Grid2D, eps: f64, k: (i64, i64)) -> Result<Self> {
        if k == (0, 0) {
            return Err(Error::InvalidInput("wavevector must be nonzero".into()));
        }
        let (k1, k2) = crate::dtn::physical_wavevector(grid, k);
        let amp = eps / k1.hypot(k2).sqrt();
        Ok(Self {
            h: RealField::from_fn(grid, |x, y| eps * (k1 * x + k2 * y).cos()),
            phi_omega: RealField::from_fn(grid, |x, y| amp * (k1 * x + k2 * y).sin()),
            t: 0.0,
        })
    }

    /// Standing linear wave: `h = ε cos(k·x)`, `φ_ω = 0`.
    pub fn standing_wave(grid: &Grid2D, eps: f64, k: (i64, i64)) -> Result<Self> {
        if k == (0, 0) {
            return Err(Error::InvalidInput("wavevector must be nonzero".into()));
        }
        let (k1, k2) = crate::dtn::physical_wavevector(grid, k);
        Ok(Self {
            h: RealField::from_fn(grid, |x, y| eps * (k1 * x + k2 * y).cos()),
            phi_omega: RealField::zeros(grid),
            t: 0.0,
        })
    }

    /// Second-order Stokes wave of steepness `ε` along `x₁` (unit wavenumber).
    pub fn stokes(grid: &Grid2D, eps: f64) -> Self {
        let k = 2.0 * std::f64::consts::PI / grid.lx();
        let h = RealField::from_fn(grid, |x, _| {
            eps * (k * x).cos() + 0.5 * eps * eps * k * (2.0 * k * x).cos()
        });
        let phi_omega = RealField::from_fn(grid, |x, _| eps / k.sqrt() * (k * x).sin());
        Self { h, phi_omega, t: 0.0 }
    }

    pub fn grid(&self) -> &Grid2D {
        self.h.grid()
    }

    pub fn is_finite(&self) -> bool {
        self.h.is_finite() && self.phi_omega.is_finite()
    }
}

/// Complex dispersive variable `u = h + iΛ^{1/2}φ_ω`.
#[derive(Clone, Debug, PartialEq)]
pub struct UState {
    pub u: ComplexField,
    pub t: f64,
}

impl UState {
    pub fn from_surface(state: &SurfaceState) -> Self {
        Self { u: to_u_spectral(&state.h, &state.phi_omega).to_complex(), t: state.t }
    }

    /// Inverse map; `φ_ω` comes back with zero mean.
    pub fn to_surface(&self) -> SurfaceState {
        let (h, phi_omega) = from_u_spectral(&self.u.to_spectral());
        SurfaceState { h, phi_omega, t: self.t }
    }
}

fn to_u_spectral(h: &RealField, phi_omega: &RealField) -> SpectralField {
    let mut u = h.to_spectral();
    u.axpy(I, &phi_omega.to_spectral().lambda_pow(0.5));
    u
}

/// Splits `û` into `(Re u, Λ^{-1/2} Im u)`.
fn from_u_spectral(u_hat: &SpectralField) -> (RealField, RealField) {
    let u = u_hat.to_complex();
    (u.re(), u.im().lambda_pow(-0.5))
}

/// Which right-hand side drives the evolution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RhsForm {
    /// Complex `u`, cubic truncation, integrating-factor time stepping.
    U,
    /// `(h, φ_ω)` with the full DtN series of the configured order.
    HPhi,
}

impl std::str::FromStr for RhsForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "u" | "u-form" => Ok(Self::U),
            "hphi" | "hphi-form" => Ok(Self::HPhi),
            other => Err(Error::Config(format!("unknown rhs form {other:?} (expected u-form or hphi-form)"))),
        }
    }
}

impl std::fmt::Display for RhsForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::U => "u-form",
            Self::HPhi => "hphi-form",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub dtn_order: DtnOrder,
    pub rhs_form: RhsForm,
    pub dt: f64,
    pub t_end: f64,
    pub dealias: bool,
}

impl ModelParams {
    pub fn new(dtn_order: DtnOrder, rhs_form: RhsForm, dt: f64, t_end: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Config(format!("dt must be positive, got {dt}")));
        }
        if !(t_end.is_finite() && t_end >= 0.0) {
            return Err(Error::Config(format!("t_end must be non-negative, got {t_end}")));
        }
        Ok(Self { dtn_order, rhs_form, dt, t_end, dealias: true })
    }

    pub fn with_dealias(mut self, dealias: bool) -> Self {
        self.dealias = dealias;
        self
    }

    /// Checks the linear-phase resolution `dt·kmax^{1/2} ≤ 0.5` on `grid`.
    pub fn validate(&self, grid: &Grid2D) -> Result<()> {
        self.validate_kmax(grid.kmax())
    }

    /// As [`ModelParams::validate`], for a grid with largest wavenumber `kmax`.
    pub fn validate_kmax(&self, kmax: f64) -> Result<()> {
        let phase = self.dt * kmax.sqrt();
        if phase > 0.5 {
            return Err(Error::Config(format!(
                "dt = {} too large for this grid: dt*sqrt(kmax) = {phase:.3} exceeds 0.5",
                self.dt
            )));
        }
        Ok(())
    }

    /// Number of steps covering `[0, t_end]`, rounding the last one up.
    pub fn n_steps(&self) -> usize {
        let n = self.t_end / self.dt;
        let r = n.round();
        if (n - r).abs() < 1e-9 * n.max(1.0) {
            r as usize
        } else {
            n.ceil() as usize
        }
    }
}

/// `R_ω = −½|V_ω|² − ∇φ·V_ω − ½(V_ω·∇h)² + (Gφ)(V_ω·∇h)`, pointwise.
pub fn r_omega(grad_h: &VectorField, grad_phi: &VectorField, g_phi: &RealField, trace: &VorticityTrace) -> RealField {
    let v = trace.v_omega();
    let n = g_phi.grid().len();
    let mut out = Vec::with_capacity(n);
    for idx in 0..n {
        let (v1, v2) = (v[0].values()[idx], v[1].values()[idx]);
        let vb = v1 * grad_h[0].values()[idx] + v2 * grad_h[1].values()[idx];
        let vp = v1 * grad_phi[0].values()[idx] + v2 * grad_phi[1].values()[idx];
        out.push(-0.5 * (v1 * v1 + v2 * v2) - vp - 0.5 * vb * vb + g_phi.values()[idx] * vb);
    }
    RealField::from_vec_unchecked(g_phi.grid(), out)
}

fn finish(field: RealField, dealias: bool) -> RealField {
    if dealias {
        field.to_spectral().dealias().to_real()
    } else {
        field
    }
}

/// Time derivatives `(∂_t h, ∂_t φ_ω)` of the `(h, φ_ω)` system.
pub fn rhs_hphi(state: &SurfaceState, trace: &VorticityTrace, params: &ModelParams) -> Result<(RealField, RealField)> {
    let h = &state.h;
    let phi = if trace.is_zero() {
        state.phi_omega.clone()
    } else {
        &state.phi_omega - &recover_a_omega(h, trace)?
    };
    let g_phi = dtn_apply_spectral(h, &phi, params.dtn_order, params.dealias).to_real();
    let grad_h = h.grad();
    let grad_phi = phi.grad();

    let n = h.grid().len();
    let mut nonlinear = Vec::with_capacity(n);
    for idx in 0..n {
        let (h1, h2) = (grad_h[0].values()[idx], grad_h[1].values()[idx]);
        let (p1, p2) = (grad_phi[0].values()[idx], grad_phi[1].values()[idx]);
        let w = g_phi.values()[idx] + h1 * p1 + h2 * p2;
        nonlinear.push(-0.5 * (p1 * p1 + p2 * p2) + w * w / (2.0 * (1.0 + h1 * h1 + h2 * h2)));
    }
    let mut nonlinear = RealField::from_vec_unchecked(h.grid(), nonlinear);
    if !trace.is_zero() {
        nonlinear.axpy(1.0, &r_omega(&grad_h, &grad_phi, &g_phi, trace));
    }
    let dphi = &finish(nonlinear, params.dealias) - h;
    Ok((g_phi, dphi))
}

/// Polynomial part of the `u` system, split into the real and imaginary
/// channels `(∂_t h, Λ^{1/2}∂_t φ_ω)` in coefficient space.
struct Channels {
    re: SpectralField,
    im: SpectralField,
}

impl Channels {
    fn zeros(grid: &Grid2D) -> Self {
        Self { re: SpectralField::zeros(grid), im: SpectralField::zeros(grid) }
    }

    fn combine(mut self) -> SpectralField {
        self.re.axpy(I, &self.im);
        self.re
    }
}

/// Quadratic and cubic terms `B(u) + T(u)`.
fn add_irrotational(ch: &mut Channels, h: &RealField, phi_hat: &SpectralField, params: &ModelParams) {
    let order = params.dtn_order.get();
    if order == 0 {
        return;
    }
    let d = params.dealias;
    let p_hat = phi_hat.lambda_pow(1.0);
    let p = p_hat.to_real();
    let g = [phi_hat.deriv(Axis::X1).to_real(), phi_hat.deriv(Axis::X2).to_real()];

    // B, real channel: −∇·(h∇φ_ω) − Λ(h Λφ_ω).
    let hp = h.product(&p, d);
    let mut div = h.product(&g[0], d).deriv(Axis::X1);
    div.add_assign(&h.product(&g[1], d).deriv(Axis::X2));
    ch.re.sub_assign(&div);
    ch.re.sub_assign(&hp.lambda_pow(1.0));

    // B, imaginary channel: Λ^{1/2}(½(Λφ_ω)² − ½|∇φ_ω|²).
    // The typeset display writes the bracket as |∇φ_ω|² − (Λφ_ω)² without the ½.
    let mut quad = p.product(&p, d);
    quad.sub_assign(&g[0].product(&g[0], d));
    quad.sub_assign(&g[1].product(&g[1], d));
    ch.im.add_assign(&quad.scale(0.5).lambda_pow(0.5));

    if order < 2 {
        return;
    }
    // T, real channel: the cubic DtN term −½Λ(h²Λ²φ) − ½Λ²(h²Λφ) + Λ(hΛ(hΛφ)).
    // The typeset display carries the opposite overall sign and coefficients 1, 2.
    let h2 = h.product(h, d).to_real();
    let l2phi = phi_hat.lambda_pow(2.0).to_real();
    let lhp = hp.lambda_pow(1.0).to_real();
    ch.re.axpy((-0.5).into(), &h2.product(&l2phi, d).lambda_pow(1.0));
    ch.re.axpy((-0.5).into(), &h2.product(&p, d).lambda_pow(2.0));
    ch.re.add_assign(&h.product(&lhp, d).lambda_pow(1.0));

    // T, imaginary channel: Λ^{1/2}(Λφ_ω · (hΛ²φ_ω − Λ(hΛφ_ω))).
    let bracket = &h.product(&l2phi, d).to_real() - &lhp;
    ch.im.add_assign(&p.product(&bracket, d).lambda_pow(0.5));
}

/// Vorticity terms `L(V_ω) + N₁(u, V_ω) + N₂(V_ω, V_ω)`.
fn add_rotational(ch: &mut Channels, h: &RealField, phi_hat: &SpectralField, trace: &VorticityTrace, params: &ModelParams) {
    let d = params.dealias;
    let v = trace.v_omega();
    let rv_hat = riesz_dot(v);
    let rv = rv_hat.to_real();

    // L: −R·V_ω in the real channel.
    ch.re.sub_assign(&rv_hat);
    if params.dtn_order.get() == 0 {
        return;
    }
    let p = phi_hat.lambda_pow(1.0).to_real();

    // N₁, real channel: ∇·(hV_ω) + Λ(h R·V_ω).
    // The typeset display has the divergence term with a minus sign.
    ch.re.add_assign(&h.product(&v[0], d).deriv(Axis::X1));
    ch.re.add_assign(&h.product(&v[1], d).deriv(Axis::X2));
    ch.re.add_assign(&h.product(&rv, d).lambda_pow(1.0));

    // N₁, imaginary channel: −Λ^{1/2}((R·V_ω) Λφ_ω).
    ch.im.sub_assign(&rv.product(&p, d).lambda_pow(0.5));

    // N₂: ½Λ^{1/2}(R·V_ω)² in the imaginary channel.
    // The typeset display omits the factor i that places it there.
    ch.im.add_assign(&rv.product(&rv, d).scale(0.5).lambda_pow(0.5));
}

fn check_trace(h: &RealField, trace: &VorticityTrace) -> Result<()> {
    let residual = curl_residual(h, trace, &RealField::zeros(h.grid())).max_abs();
    if residual > ADMISSIBILITY_TOL {
        return Err(Error::ConstraintViolation { residual, tolerance: ADMISSIBILITY_TOL });
    }
    Ok(())
}

/// `N(u)`: everything in `∂_t u` except the linear term, in coefficient space.
fn nonlinear_u(u_hat: &SpectralField, trace: &VorticityTrace, params: &ModelParams) -> Result<SpectralField> {
    let (h, phi_omega) = from_u_spectral(u_hat);
    let phi_hat = phi_omega.to_spectral();
    let mut ch = Channels::zeros(u_hat.grid());
    add_irrotational(&mut ch, &h, &phi_hat, params);
    if !trace.is_zero() {
        check_trace(&h, trace)?;
        add_rotational(&mut ch, &h, &phi_hat, trace, params);
    }
    Ok(ch.combine())
}

fn linear_u(u_hat: &SpectralField) -> SpectralField {
    u_hat.lambda_pow(0.5).apply(|_| -I)
}

/// `∂_t u = −iΛ^{1/2}u + B(u) + T(u) + L(V_ω) + N₁(u, V_ω) + N₂(V_ω, V_ω)`.
///
/// `B` needs `dtn_order ≥ 1` and `T` needs `dtn_order ≥ 2`. The vorticity
/// terms are skipped entirely for an identically zero trace.
pub fn rhs_u(state: &UState, trace: &VorticityTrace, params: &ModelParams) -> Result<ComplexField> {
    let u_hat = state.u.to_spectral();
    let mut du = nonlinear_u(&u_hat, trace, params)?;
    du.add_assign(&linear_u(&u_hat));
    Ok(du.to_complex())
}

/// [`rhs_u`] without the vorticity terms.
pub fn rhs_u_irrotational(state: &UState, params: &ModelParams) -> ComplexField {
    let u_hat = state.u.to_spectral();
    let (h, phi_omega) = from_u_spectral(&u_hat);
    let mut ch = Channels::zeros(u_hat.grid());
    add_irrotational(&mut ch, &h, &phi_omega.to_spectral(), params);
    let mut du = ch.combine();
    du.add_assign(&linear_u(&u_hat));
    du.to_complex()
}

/// Symbol of `e^{−iτΛ^{1/2}}` on `grid`.
fn propagator(grid: &Grid2D, tau: f64) -> Vec<Complex64> {
    (0..grid.len()).map(|idx| Complex64::from_polar(1.0, -tau * grid.kmag(idx).sqrt())).collect()
}

fn step_u(state: &SurfaceState, provider: &VorticityProvider, params: &ModelParams) -> Result<SurfaceState> {
    let dt = params.dt;
    let t = state.t;
    let u0 = to_u_spectral(&state.h, &state.phi_omega);
    let eval = |u: &SpectralField, t: f64| -> Result<SpectralField> {
        let trace = if provider.is_zero() {
            VorticityTrace::zero(u.grid(), t)
        } else {
            provider.trace(&u.to_real(), t)
        };
        nonlinear_u(u, &trace, params)
    };
    let e_half = propagator(u0.grid(), 0.5 * dt);
    let e_full: Vec<Complex64> = e_half.iter().map(|e| e * e).collect();
    let half = |f: &SpectralField| f.apply(|idx| e_half[idx]);
    let full = |f: &SpectralField| f.apply(|idx| e_full[idx]);
    let dtc = Complex64::from(dt);

    let k1 = eval(&u0, t)?;
    let mut s = u0.clone();
    s.axpy((0.5 * dt).into(), &k1);
    let k2 = eval(&half(&s), t + 0.5 * dt)?;
    let mut s = half(&u0);
    s.axpy((0.5 * dt).into(), &k2);
    let k3 = eval(&s, t + 0.5 * dt)?;
    let mut s = full(&u0);
    s.axpy(dtc, &half(&k3));
    let k4 = eval(&s, t + dt)?;

    let mut out = full(&u0);
    let mut mid = k2;
    mid.add_assign(&k3);
    let mut incr = full(&k1);
    incr.axpy(2.0.into(), &half(&mid));
    incr.add_assign(&k4);
    out.axpy((dt / 6.0).into(), &incr);

    let (h, phi_omega) = from_u_spectral(&out);
    Ok(SurfaceState { h, phi_omega, t: t + dt })
}

fn step_hphi(state: &SurfaceState, provider: &VorticityProvider, params: &ModelParams) -> Result<SurfaceState> {
    let dt = params.dt;
    let eval = |s: &SurfaceState| rhs_hphi(s, &provider.trace(&s.h, s.t), params);
    let shifted = |dh: &RealField, dp: &RealField, c: f64| SurfaceState {
        h: {
            let mut h = state.h.clone();
            h.axpy(c * dt, dh);
            h
        },
        phi_omega: {
            let mut p = state.phi_omega.clone();
            p.axpy(c * dt, dp);
            p
        },
        t: state.t + c * dt,
    };
    let (h1, p1) = eval(state)?;
    let (h2, p2) = eval(&shifted(&h1, &p1, 0.5))?;
    let (h3, p3) = eval(&shifted(&h2, &p2, 0.5))?;
    let (h4, p4) = eval(&shifted(&h3, &p3, 1.0))?;

    let mut h = state.h.clone();
    let mut phi_omega = state.phi_omega.clone();
    for (w, dh, dp) in [(1.0, &h1, &p1), (2.0, &h2, &p2), (2.0, &h3, &p3), (1.0, &h4, &p4)] {
        h.axpy(w * dt / 6.0, dh);
        phi_omega.axpy(w * dt / 6.0, dp);
    }
    Ok(SurfaceState { h, phi_omega, t: state.t + dt })
}

/// One RK4 step of size `params.dt`.
///
/// The `u` form uses the integrating factor `e^{−itΛ^{1/2}}` (Lawson RK4),
/// so the linear evolution is exact; its output `φ_ω` has zero mean.
pub fn step(state: &SurfaceState, provider: &VorticityProvider, params: &ModelParams) -> Result<SurfaceState> {
    params.validate(state.grid())?;
    let next = match params.rhs_form {
        RhsForm::U => step_u(state, provider, params)?,
        RhsForm::HPhi => step_hphi(state, provider, params)?,
    };
    if !next.h.is_finite() {
        return Err(Error::BlowUp { t: next.t, what: "max|h|".into(), value: nonfinite_norm(&next.h) });
    }
    if !next.phi_omega.is_finite() {
        return Err(Error::BlowUp { t: next.t, what: "max|phi_omega|".into(), value: nonfinite_norm(&next.phi_omega) });
    }
    Ok(next)
}

fn nonfinite_norm(f: &RealField) -> f64 {
    f.values().iter().copied().find(|v| !v.is_finite()).unwrap_or(f64::NAN).abs()
}

/// `E = ½∫φ_ω G(h)φ_ω + ½∫h²`.
///
/// A conserved quantity only for irrotational flow.
pub fn hamiltonian(state: &SurfaceState, params: &ModelParams) -> f64 {
    let g = dtn_apply_spectral(&state.h, &state.phi_omega, params.dtn_order, params.dealias).to_real();
    0.5 * state.phi_omega.inner(&g) + 0.5 * state.h.inner(&state.h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vorticity::AnalyticFamily;
    use std::f64::consts::PI;

    fn grid() -> Grid2D {
        Grid2D::square(32).unwrap()
    }

    fn params(order: u8, form: RhsForm, dt: f64) -> ModelParams {
        ModelParams::new(DtnOrder::new(order).unwrap(), form, dt, 1.0).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(DtnOrder::new(2).unwrap(), RhsForm::U, 0.0, 1.0).is_err());
        assert!(ModelParams::new(DtnOrder::new(2).unwrap(), RhsForm::U, 0.1, -1.0).is_err());
        let g = Grid2D::square(128).unwrap();
        assert!(params(2, RhsForm::U, 0.05, ).validate(&g).is_ok());
        assert!(matches!(params(2, RhsForm::U, 0.06).validate(&g), Err(Error::Config(_))));
        assert_eq!(params(2, RhsForm::U, 0.01).n_steps(), 100);
        assert_eq!("hphi-form".parse::<RhsForm>().unwrap(), RhsForm::HPhi);
        assert!("x".parse::<RhsForm>().is_err());
    }

    #[test]
    fn u_round_trip() {
        let g = grid();
        let s = SurfaceState::new(
            RealField::from_fn(&g, |x, y| 0.1 * (x + y).cos()),
            RealField::from_fn(&g, |x, y| 0.2 * (2.0 * x).sin() - 0.1 * y.cos()),
            0.3,
        )
        .unwrap();
        let back = UState::from_surface(&s).to_surface();
        assert!((&back.h - &s.h).max_abs() < 1e-14);
        assert!((&back.phi_omega - &s.phi_omega).max_abs() < 1e-14);
        assert_eq!(back.t, 0.3);
    }

    #[test]
    fn rhs_hphi_examples() {
        let g = grid();
        let p = params(3, RhsForm::HPhi, 0.01);
        let zero = VorticityTrace::zero(&g, 0.0);
        let (dh, dp) = rhs_hphi(&SurfaceState::rest(&g), &zero, &p).unwrap();
        assert_eq!(dh.max_abs() + dp.max_abs(), 0.0);

        let eps = 1e-4;
        let s = SurfaceState::standing_wave(&g, eps, (1, 0)).unwrap();
        let (dh, dp) = rhs_hphi(&s, &zero, &p).unwrap();
        assert_eq!(dh.max_abs(), 0.0);
        assert!((&dp + &s.h).max_abs() < 10.0 * eps * eps);
    }

    #[test]
    fn r_omega_vanishes_without_vorticity() {
        let g = grid();
        let h = RealField::from_fn(&g, |x, y| 0.1 * (x - y).cos());
        let phi = RealField::from_fn(&g, |x, _| 0.2 * x.sin());
        let r = r_omega(&h.grad(), &phi.grad(), &phi, &VorticityTrace::zero(&g, 0.0));
        assert_eq!(r.max_abs(), 0.0);
    }

    #[test]
    fn rhs_u_examples() {
        let g = grid();
        let p = params(2, RhsForm::U, 0.01);
        let zero = VorticityTrace::zero(&g, 0.0);
        let rest = UState::from_surface(&SurfaceState::rest(&g));
        assert_eq!(rhs_u(&rest, &zero, &p).unwrap().max_abs(), 0.0);

        // u = ε cos x₁ (real): du = −i cos x₁ ε + O(ε²).
        let eps = 1e-4;
        let s = SurfaceState::standing_wave(&g, eps, (1, 0)).unwrap();
        let du = rhs_u(&UState::from_surface(&s), &zero, &p).unwrap();
        assert!(du.re().max_abs() < 10.0 * eps * eps);
        assert!((&du.im() + &s.h).max_abs() < 10.0 * eps * eps);

        // u = 0, V_ω = ∇a: du = −R·V_ω = −Λa.
        let a = RealField::from_fn(&g, |x, y| 1e-3 * (x + 2.0 * y).cos());
        let trace = VorticityTrace::new(a.grad(), 0.0).unwrap();
        let du = rhs_u(&rest, &trace, &p).unwrap();
        let expect = -&a.lambda_pow(1.0);
        assert!((&du.re() - &expect).max_abs() < 1e-15);
        assert!(du.im().max_abs() < 1e-5);
    }

    #[test]
    fn zero_trace_matches_irrotational_path_bitwise() {
        let g = grid();
        let p = params(2, RhsForm::U, 0.01);
        let s = SurfaceState::stokes(&g, 0.05);
        let u = UState::from_surface(&s);
        assert_eq!(rhs_u(&u, &VorticityTrace::zero(&g, 0.0), &p).unwrap(), rhs_u_irrotational(&u, &p));
    }

    #[test]
    fn inadmissible_trace_rejected() {
        let g = grid();
        let p = params(2, RhsForm::HPhi, 0.01);
        let psi = RealField::from_fn(&g, |x, _| 0.1 * x.cos());
        let [p1, p2] = psi.grad();
        let trace = VorticityTrace::new([-&p2, p1], 0.0).unwrap();
        let s = SurfaceState::rest(&g);
        assert!(matches!(rhs_hphi(&s, &trace, &p), Err(Error::ConstraintViolation { .. })));
        let pu = params(2, RhsForm::U, 0.01);
        assert!(matches!(
            rhs_u(&UState::from_surface(&s), &trace, &pu),
            Err(Error::ConstraintViolation { .. })
        ));
    }

    #[test]
    fn rest_state_stays_at_rest() {
        let g = grid();
        for form in [RhsForm::U, RhsForm::HPhi] {
            let p = params(3, form, 0.1);
            let mut s = SurfaceState::rest(&g);
            for _ in 0..5 {
                s = step(&s, &VorticityProvider::Zero, &p).unwrap();
            }
            assert_eq!(s.h.max_abs() + s.phi_omega.max_abs(), 0.0);
            assert!((s.t - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn linear_mode_follows_exact_solution() {
        let g = Grid2D::square(16).unwrap();
        let eps = 1e-8;
        let p = params(2, RhsForm::U, 0.01);
        let s0 = SurfaceState::linear_wave(&g, eps, (1, 0)).unwrap();
        let mut s = s0.clone();
        for _ in 0..628 {
            s = step(&s, &VorticityProvider::Zero, &p).unwrap();
        }
        let exact = RealField::from_fn(&g, |x, _| eps * (x - s.t).cos());
        assert!((&s.h - &exact).max_abs() < 1e-6 * eps);

        // A whole number of periods returns to the start.
        let p = params(2, RhsForm::U, 2.0 * PI / 628.0);
        let mut s = s0.clone();
        for _ in 0..628 {
            s = step(&s, &VorticityProvider::Zero, &p).unwrap();
        }
        assert!((&s.h - &s0.h).max_abs() < 1e-6 * eps);
        assert!((&s.phi_omega - &s0.phi_omega).max_abs() < 1e-6 * eps);
    }

    #[test]
    fn nonfinite_state_signals_blow_up() {
        let g = grid();
        let mut s = SurfaceState::rest(&g);
        s.h.values_mut()[3] = f64::NAN;
        match step(&s, &VorticityProvider::Zero, &params(2, RhsForm::HPhi, 0.01)) {
            Err(Error::BlowUp { what, .. }) => assert_eq!(what, "max|h|"),
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn hamiltonian_examples() {
        let g = grid();
        let p = params(3, RhsForm::HPhi, 0.01);
        assert_eq!(hamiltonian(&SurfaceState::rest(&g), &p), 0.0);
        let eps = 0.1;
        let s = SurfaceState::standing_wave(&g, eps, (1, 0)).unwrap();
        assert!((hamiltonian(&s, &p) - PI * PI * eps * eps).abs() < 1e-14);
        let s = SurfaceState {
            h: RealField::zeros(&g),
            phi_omega: RealField::from_fn(&g, |x, _| eps * x.cos()),
            t: 0.0,
        };
        assert!((hamiltonian(&s, &p) - PI * PI * eps * eps).abs() < 1e-14);
    }

    #[test]
    fn rotational_step_runs_and_conserves_mass() {
        let g = grid();
        let provider = VorticityProvider::Analytic(AnalyticFamily::GradientCosine {
            amplitude: 1e-3,
            mode: (0, 1),
            frequency: 1.0,
        });
        for form in [RhsForm::U, RhsForm::HPhi] {
            let p = params(2, form, 0.05);
            let mut s = SurfaceState::linear_wave(&g, 0.01, (1, 0)).unwrap();
            let m0 = s.h.mean();
            for _ in 0..20 {
                s = step(&s, &provider, &p).unwrap();
                assert!((s.h.mean() - m0).abs() < 1e-12);
            }
        }
    }
}
