//! Surface footprint of the vorticity.
//!
//! The rotational part of the velocity enters the boundary system only through
//! its tangential trace `V_ω`. From it follow `B_ω = ∇h·V_ω` and the good
//! unknown `U_ω = V_ω + ∇h B_ω`, whose surface curl equals the normal vorticity
//! `ω·n`. When `ω·n = 0` on the surface, `U_ω = ∇a_ω` for a potential `a_ω`
//! fixed here up to its mean (taken to be zero).
//!
//! Interior transport of the vorticity is not modeled; traces come from a
//! [`VorticityProvider`].

use crate::error::{Error, Result};
use crate::spectral::{div_spectral, Axis, Grid2D, RealField, VectorField};

/// Max-norm tolerance on `curl U_ω - ω·n` for admissible traces.
pub const ADMISSIBILITY_TOL: f64 = 1e-8;

/// Tangential boundary velocity `V_ω` at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct VorticityTrace {
    v_omega: VectorField,
    t: f64,
}

impl VorticityTrace {
    pub fn new(v_omega: VectorField, t: f64) -> Result<Self> {
        if v_omega[0].grid() != v_omega[1].grid() {
            return Err(Error::Config("trace components on different grids".into()));
        }
        if !(v_omega[0].is_finite() && v_omega[1].is_finite()) {
            return Err(Error::InvalidInput("trace has non-finite samples".into()));
        }
        Ok(Self { v_omega, t })
    }

    pub fn zero(grid: &Grid2D, t: f64) -> Self {
        Self { v_omega: [RealField::zeros(grid), RealField::zeros(grid)], t }
    }

    pub fn v_omega(&self) -> &VectorField {
        &self.v_omega
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn grid(&self) -> &Grid2D {
        self.v_omega[0].grid()
    }

    /// Component means; they only shift the gauge of `a_ω`.
    pub fn means(&self) -> [f64; 2] {
        [self.v_omega[0].mean(), self.v_omega[1].mean()]
    }

    pub fn is_zero(&self) -> bool {
        self.v_omega.iter().all(|c| c.values().iter().all(|&v| v == 0.0))
    }
}

/// `B_ω = ∇h · V_ω`, pointwise.
pub fn b_omega(h: &RealField, trace: &VorticityTrace) -> RealField {
    let [h1, h2] = h.grad();
    let [v1, v2] = trace.v_omega();
    let mut b = &h1 * v1;
    b.axpy(1.0, &(&h2 * v2));
    b
}

/// `U_ω = V_ω + ∇h B_ω`, pointwise.
pub fn u_omega(h: &RealField, trace: &VorticityTrace) -> VectorField {
    let grad_h = h.grad();
    let [v1, v2] = trace.v_omega();
    let b = grad_h[0].zip_with(v1, |a, b| a * b).zip_with(
        &grad_h[1].zip_with(v2, |a, b| a * b),
        |a, b| a + b,
    );
    [
        v1.zip_with(&grad_h[0].zip_with(&b, |g, b| g * b), |v, w| v + w),
        v2.zip_with(&grad_h[1].zip_with(&b, |g, b| g * b), |v, w| v + w),
    ]
}

/// `V_ω` for a prescribed good unknown: inverts `U = (I + ∇h ∇hᵀ) V`.
pub fn v_from_u(h: &RealField, u: &VectorField) -> VectorField {
    let [h1, h2] = h.grad();
    let n = h.grid().len();
    let mut v1 = Vec::with_capacity(n);
    let mut v2 = Vec::with_capacity(n);
    for idx in 0..n {
        let (g1, g2) = (h1.values()[idx], h2.values()[idx]);
        let (u1, u2) = (u[0].values()[idx], u[1].values()[idx]);
        let proj = (g1 * u1 + g2 * u2) / (1.0 + g1 * g1 + g2 * g2);
        v1.push(u1 - g1 * proj);
        v2.push(u2 - g2 * proj);
    }
    [RealField::from_vec_unchecked(h.grid(), v1), RealField::from_vec_unchecked(h.grid(), v2)]
}

/// `∇₁U_ω² − ∇₂U_ω¹ − ω·n` with spectral derivatives.
pub fn curl_residual(h: &RealField, trace: &VorticityTrace, omega_n: &RealField) -> RealField {
    let [u1, u2] = u_omega(h, trace);
    let mut curl = u2.to_spectral().deriv(Axis::X1);
    curl.sub_assign(&u1.to_spectral().deriv(Axis::X2));
    &curl.to_real() - omega_n
}

/// The zero-mean potential with `∇a_ω = U_ω`.
///
/// Fails with [`Error::ConstraintViolation`] when `U_ω` is not curl-free to
/// within [`ADMISSIBILITY_TOL`].
pub fn recover_a_omega(h: &RealField, trace: &VorticityTrace) -> Result<RealField> {
    let zero = RealField::zeros(h.grid());
    let residual = curl_residual(h, trace, &zero).max_abs();
    if residual > ADMISSIBILITY_TOL {
        return Err(Error::ConstraintViolation { residual, tolerance: ADMISSIBILITY_TOL });
    }
    let u = u_omega(h, trace);
    // a = -Λ⁻²(∇·U); Λ⁻² maps the zero mode to zero.
    Ok(div_spectral(&u).lambda_pow(-2.0).scale(-1.0).to_real())
}

/// Closed-form trace families, each with temporal factor `cos(frequency · t)`.
#[derive(Clone, Debug, PartialEq)]
pub enum AnalyticFamily {
    /// `U_ω = ∇a`, `a = amplitude · cos(k·x)`.
    GradientCosine { amplitude: f64, mode: (i64, i64), frequency: f64 },
    /// `U_ω = ∇a`, `a = amplitude · exp(-|x - center|²/(2 width²))` sampled on
    /// the box (gradient taken spectrally).
    GradientGaussian { amplitude: f64, width: f64, center: (f64, f64), frequency: f64 },
    /// `U_ω = (-∂₂ψ, ∂₁ψ)`, `ψ = amplitude · cos(k·x)`; carries `ω·n = Δψ`.
    StreamCosine { amplitude: f64, mode: (i64, i64), frequency: f64 },
}

impl AnalyticFamily {
    fn temporal(&self, t: f64) -> f64 {
        let f = match self {
            Self::GradientCosine { frequency, .. }
            | Self::GradientGaussian { frequency, .. }
            | Self::StreamCosine { frequency, .. } => *frequency,
        };
        if f == 0.0 {
            1.0
        } else {
            (f * t).cos()
        }
    }

    fn cosine(grid: &Grid2D, amplitude: f64, mode: (i64, i64)) -> RealField {
        let (k1, k2) = crate::dtn::physical_wavevector(grid, mode);
        RealField::from_fn(grid, |x, y| amplitude * (k1 * x + k2 * y).cos())
    }

    /// The scalar generating `U_ω` (potential or stream function) at time `t`.
    fn generator(&self, grid: &Grid2D, t: f64) -> RealField {
        let amp = self.temporal(t);
        match self {
            Self::GradientCosine { amplitude, mode, .. }
            | Self::StreamCosine { amplitude, mode, .. } => Self::cosine(grid, amplitude * amp, *mode),
            Self::GradientGaussian { amplitude, width, center, .. } => {
                let (lx, ly) = (grid.lx(), grid.ly());
                let wrap = |d: f64, l: f64| d - l * (d / l).round();
                RealField::from_fn(grid, |x, y| {
                    let dx = wrap(x - center.0, lx);
                    let dy = wrap(y - center.1, ly);
                    amplitude * amp * (-(dx * dx + dy * dy) / (2.0 * width * width)).exp()
                })
            }
        }
    }

    fn good_unknown(&self, grid: &Grid2D, t: f64) -> VectorField {
        let gen = self.generator(grid, t).to_spectral();
        let d1 = gen.deriv(Axis::X1).to_real();
        let d2 = gen.deriv(Axis::X2).to_real();
        match self {
            Self::StreamCosine { .. } => [-&d2, d1],
            _ => [d1, d2],
        }
    }

    fn omega_n(&self, grid: &Grid2D, t: f64) -> RealField {
        match self {
            Self::StreamCosine { .. } => -&self.generator(grid, t).lambda_pow(2.0),
            _ => RealField::zeros(grid),
        }
    }
}

/// Source of vorticity traces; immutable after construction.
#[derive(Clone, Debug, PartialEq)]
pub enum VorticityProvider {
    Zero,
    /// A fixed `V_ω`, independent of time and of the surface.
    Static(VectorField),
    Analytic(AnalyticFamily),
}

impl VorticityProvider {
    /// Static provider, checked for a curl-free good unknown on the flat surface.
    pub fn static_trace(v_omega: VectorField) -> Result<Self> {
        let provider = Self::Static(v_omega);
        provider.check_admissible(&RealField::zeros(provider_grid(&provider).expect("static")))?;
        Ok(provider)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Self::Zero)
    }

    /// The trace seen by surface `h` at time `t`.
    pub fn trace(&self, h: &RealField, t: f64) -> VorticityTrace {
        let grid = h.grid();
        match self {
            Self::Zero => VorticityTrace::zero(grid, t),
            Self::Static(v) => VorticityTrace { v_omega: v.clone(), t },
            Self::Analytic(family) => {
                let u = family.good_unknown(grid, t);
                VorticityTrace { v_omega: v_from_u(h, &u), t }
            }
        }
    }

    /// Prescribed normal vorticity `ω·n` on the surface.
    pub fn omega_n(&self, grid: &Grid2D, t: f64) -> RealField {
        match self {
            Self::Analytic(family) => family.omega_n(grid, t),
            _ => RealField::zeros(grid),
        }
    }

    /// Max-norm curl residual with `ω·n = 0` for surface `h` at `t = 0`;
    /// errors when it exceeds [`ADMISSIBILITY_TOL`].
    pub fn check_admissible(&self, h: &RealField) -> Result<f64> {
        let trace = self.trace(h, 0.0);
        let residual = curl_residual(h, &trace, &RealField::zeros(h.grid())).max_abs();
        if residual > ADMISSIBILITY_TOL {
            return Err(Error::ConstraintViolation { residual, tolerance: ADMISSIBILITY_TOL });
        }
        Ok(residual)
    }
}

fn provider_grid(p: &VorticityProvider) -> Option<&Grid2D> {
    match p {
        VorticityProvider::Static(v) => Some(v[0].grid()),
        _ => None,
    }
}
