//! The rescaled Dirichlet-to-Neumann operator `G(h)` for infinite depth.
//!
//! `G(h)φ = √(1+|∇h|²) ∂_n ψ |_{y=h}` where `ψ` is the decaying harmonic
//! extension of `φ` below the surface `y = h(x)`. The production path is the
//! truncated expansion `G(h) = Σ_j G_j(h)` with `G_j` homogeneous of degree `j`
//! in `h`, built by the recursion
//!
//! ```text
//! G_0 φ = Λφ
//! G_m φ = -(1/m!) Λ^{m-1} ∇·(h^m ∇φ) - Σ_{j<m} Λ^{m-j} [ h^{m-j}/(m-j)! · G_j φ ]
//! ```
//!
//! which follows from the exact harmonic family `e^{ik·x} e^{|k|y}` and the
//! symmetry of each `G_j`. Every term is shift invariant (`G_j(h + c) = G_j(h)`
//! for `j >= 1`), which is what fixes the signs in [`g3_apply`].
//!
//! Two independent oracles live alongside: the closed-form harmonic family
//! ([`dtn_oracle_exact`]) and a finite-depth Laplace solve ([`strip`]).

pub mod strip;

use crate::error::{Error, Result};
use crate::spectral::{Axis, Grid2D, RealField, SpectralField};

pub use strip::{dtn_oracle_strip, StripOptions};

/// Highest power of `h` retained in the series (0 = `Λ` only).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct DtnOrder(u8);

impl DtnOrder {
    pub const MAX: u8 = 6;

    pub fn new(order: u8) -> Result<Self> {
        if order > Self::MAX {
            return Err(Error::Config(format!(
                "dtn order {order} out of range 0..={}",
                Self::MAX
            )));
        }
        Ok(Self(order))
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

impl TryFrom<i64> for DtnOrder {
    type Error = Error;
    fn try_from(v: i64) -> Result<Self> {
        u8::try_from(v)
            .map_err(|_| Error::Config(format!("dtn order {v} out of range")))
            .and_then(Self::new)
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}


/// `F[∇·(a ∇φ)]` with the two products dealiased.
fn div_a_grad(a: &RealField, grad_phi: &[RealField; 2], dealias: bool) -> SpectralField {
    let mut s = a.product(&grad_phi[0], dealias).deriv(Axis::X1);
    s.add_assign(&a.product(&grad_phi[1], dealias).deriv(Axis::X2));
    s
}

/// Homogeneous terms `G_0 φ, …, G_order φ` in coefficient space.
pub fn dtn_terms(h: &RealField, phi: &RealField, order: DtnOrder, dealias: bool) -> Vec<SpectralField> {
    let phi_hat = phi.to_spectral();
    let mut terms = vec![phi_hat.lambda_pow(1.0)];
    if order.get() == 0 {
        return terms;
    }
    let grad_phi = [phi_hat.deriv(Axis::X1).to_real(), phi_hat.deriv(Axis::X2).to_real()];
    let mut terms_real = vec![terms[0].to_real()];
    let mut h_pows = vec![RealField::constant(h.grid(), 1.0), h.clone()];
    for m in 1..=order.get() as usize {
        if h_pows.len() <= m {
            let next = &h_pows[m - 1] * h;
            h_pows.push(next);
        }
        let mut acc = div_a_grad(&h_pows[m], &grad_phi, dealias)
            .lambda_pow((m - 1) as f64)
            .scale(-1.0 / factorial(m as u32));
        for (j, term) in terms_real.iter().enumerate() {
            let p = m - j;
            let contrib = h_pows[p]
                .product(term, dealias)
                .lambda_pow(p as f64)
                .scale(-1.0 / factorial(p as u32));
            acc.add_assign(&contrib);
        }
        terms_real.push(acc.to_real());
        terms.push(acc);
    }
    terms
}

/// `Σ_{j<=order} G_j(h)φ` in coefficient space.
pub fn dtn_apply_spectral(h: &RealField, phi: &RealField, order: DtnOrder, dealias: bool) -> SpectralField {
    let mut terms = dtn_terms(h, phi, order, dealias).into_iter();
    let mut sum = terms.next().expect("order 0 term always present");
    for t in terms {
        sum.add_assign(&t);
    }
    sum
}

/// Truncated series `G(h)φ` with dealiased products.
pub fn dtn_apply(h: &RealField, phi: &RealField, order: DtnOrder) -> RealField {
    dtn_apply_spectral(h, phi, order, true).to_real()
}

/// Quadratic term `-∇·(h∇φ) - Λ(hΛφ)`.
pub fn g2_apply(h: &RealField, phi: &RealField) -> RealField {
    let phi_hat = phi.to_spectral();
    let grad_phi = [phi_hat.deriv(Axis::X1).to_real(), phi_hat.deriv(Axis::X2).to_real()];
    let lphi = phi_hat.lambda_pow(1.0).to_real();
    let mut out = div_a_grad(h, &grad_phi, true).scale(-1.0);
    out.sub_assign(&h.product(&lphi, true).lambda_pow(1.0));
    out.to_real()
}

/// Cubic term `-½Λ(h²Λ²φ) - ½Λ²(h²Λφ) + Λ(hΛ(hΛφ))`.
pub fn g3_apply(h: &RealField, phi: &RealField) -> RealField {
    let phi_hat = phi.to_spectral();
    let h2 = h * h;
    let l1 = phi_hat.lambda_pow(1.0).to_real();
    let l2 = phi_hat.lambda_pow(2.0).to_real();
    let mut out = h2.product(&l2, true).lambda_pow(1.0).scale(-0.5);
    out.axpy((-0.5).into(), &h2.product(&l1, true).lambda_pow(2.0));
    let inner = h.product(&l1, true).lambda_pow(1.0).to_real();
    out.add_assign(&h.product(&inner, true).lambda_pow(1.0));
    out.to_real()
}

/// Exact harmonic family: `φ = Re(e^{ik·x} e^{|k|h})` and
/// `G(h)φ = Re((|k| - i k·∇h) e^{ik·x} e^{|k|h})`, evaluated pointwise.
///
/// `k` is an integer lattice mode; the physical wavevector is `2π m / l`.
pub fn dtn_oracle_exact(h: &RealField, k: (i64, i64)) -> Result<(RealField, RealField)> {
    if k == (0, 0) {
        return Err(Error::InvalidInput("oracle wavevector must be nonzero".into()));
    }
    let grid = h.grid();
    let (k1, k2) = physical_wavevector(grid, k);
    let kabs = k1.hypot(k2);
    let [h1, h2] = h.grad();
    let n = grid.len();
    let mut phi = Vec::with_capacity(n);
    let mut gphi = Vec::with_capacity(n);
    for idx in 0..n {
        let (x1, x2) = grid.coords(idx);
        let hv = h.values()[idx];
        let amp = (kabs * hv).exp();
        let theta = k1 * x1 + k2 * x2;
        let (s, c) = theta.sin_cos();
        let kdh = k1 * h1.values()[idx] + k2 * h2.values()[idx];
        phi.push(amp * c);
        // Re((|k| - i kdh)(c + i s)) = |k| c + kdh s
        gphi.push(amp * (kabs * c + kdh * s));
    }
    Ok((RealField::new(grid, phi)?, RealField::new(grid, gphi)?))
}

pub(crate) fn physical_wavevector(grid: &Grid2D, k: (i64, i64)) -> (f64, f64) {
    (
        k.0 as f64 * 2.0 * std::f64::consts::PI / grid.lx(),
        k.1 as f64 * 2.0 * std::f64::consts::PI / grid.ly(),
    )
}

/// Outcome of a DtN convergence study.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub order: DtnOrder,
    pub eps: Vec<f64>,
    pub errors: Vec<f64>,
    pub slope: f64,
}

impl ConvergenceReport {
    /// The `slope >= order + 0.9` contract.
    pub fn passes(&self) -> bool {
        self.slope >= f64::from(self.order.get()) + 0.9
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let var: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    cov / var
}

/// Errors of the truncated series against the exact family, and the fitted
/// log-log slope.
///
/// Both unknowns carry the amplitude: `h = ε cos(2πx₁/lx)` and
/// `φ = ε Re(e^{ik·x} e^{|k|h})`, so `G_j(h)φ` has total degree `j + 1` and a
/// series truncated after degree `m` in `h` leaves an error of degree `m + 2`.
pub fn dtn_convergence_order(
    grid: &Grid2D,
    eps_list: &[f64],
    order: DtnOrder,
    k: (i64, i64),
) -> Result<ConvergenceReport> {
    if eps_list.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "convergence study needs at least 3 amplitudes, got {}",
            eps_list.len()
        )));
    }
    if eps_list.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(Error::InvalidInput("amplitudes must be positive".into()));
    }
    let mut errors = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let kx = 2.0 * std::f64::consts::PI / grid.lx();
        let h = RealField::from_fn(grid, |x, _| eps * (kx * x).cos());
        let (phi, exact) = dtn_oracle_exact(&h, k)?;
        let (phi, exact) = (&phi * eps, &exact * eps);
        let series = dtn_apply(&h, &phi, order);
        errors.push((&series - &exact).max_abs());
    }
    let slope = loglog_slope(eps_list, &errors);
    Ok(ConvergenceReport { order, eps: eps_list.to_vec(), errors, slope })
}
