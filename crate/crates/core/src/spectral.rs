//! Fourier infrastructure on a doubly periodic box.
//!
//! Fields are stored row-major: sample `(ix, iy)` lives at `iy * nx + ix`,
//! with `x1 = ix * lx / nx` and `x2 = iy * ly / ny`. The forward transform is
//! unnormalized and the inverse divides by `nx * ny`.
//!
//! Wavenumber index `m` maps to `m` for `m <= n/2` and to `m - n` otherwise,
//! so the lattice is `{-n/2 + 1, ..., n/2} * 2π / l` with the Nyquist mode on
//! the positive side. Odd multipliers (derivatives, Riesz transforms) vanish on
//! the Nyquist row/column so that real fields stay real. The zero mode is
//! mapped to zero by every `Λ^s` with `s != 0` and by the Riesz transforms.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

struct GridCache {
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
    kx: Vec<f64>,
    ky: Vec<f64>,
    // Wavenumbers with the Nyquist entry zeroed, used by odd multipliers.
    kx_odd: Vec<f64>,
    ky_odd: Vec<f64>,
    kmag: Vec<f64>,
    kmag_sqrt: Vec<f64>,
    keep_x: Vec<bool>,
    keep_y: Vec<bool>,
}

/// A uniform periodic grid with cached FFT plans and wavenumbers.
#[derive(Clone)]
pub struct Grid2D {
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
    cache: Arc<GridCache>,
}

impl PartialEq for Grid2D {
    fn eq(&self, other: &Self) -> bool {
        self.nx == other.nx && self.ny == other.ny && self.lx == other.lx && self.ly == other.ly
    }
}

impl fmt::Debug for Grid2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid2D")
            .field("nx", &self.nx)
            .field("ny", &self.ny)
            .field("lx", &self.lx)
            .field("ly", &self.ly)
            .finish()
    }
}

fn lattice(n: usize, l: f64) -> Vec<f64> {
    let step = 2.0 * PI / l;
    (0..n)
        .map(|m| {
            let m = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
            m * step
        })
        .collect()
}

fn two_thirds_mask(n: usize) -> Vec<bool> {
    let cutoff = n as f64 / 3.0;
    (0..n)
        .map(|m| {
            let m = if m <= n / 2 { m as f64 } else { n as f64 - m as f64 };
            m <= cutoff
        })
        .collect()
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        for (name, n) in [("nx", nx), ("ny", ny)] {
            if n < 8 || !n.is_power_of_two() {
                return Err(Error::Config(format!(
                    "{name} = {n} must be a power of two and at least 8"
                )));
            }
        }
        for (name, l) in [("lx", lx), ("ly", ly)] {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::Config(format!("{name} = {l} must be positive")));
            }
        }
        let mut planner = FftPlanner::new();
        let kx = lattice(nx, lx);
        let ky = lattice(ny, ly);
        let mut kx_odd = kx.clone();
        kx_odd[nx / 2] = 0.0;
        let mut ky_odd = ky.clone();
        ky_odd[ny / 2] = 0.0;
        let kmag: Vec<f64> = (0..nx * ny)
            .map(|idx| kx[idx % nx].hypot(ky[idx / nx]))
            .collect();
        let kmag_sqrt = kmag.iter().map(|k| k.sqrt()).collect();
        let cache = GridCache {
            fwd_x: planner.plan_fft_forward(nx),
            inv_x: planner.plan_fft_inverse(nx),
            fwd_y: planner.plan_fft_forward(ny),
            inv_y: planner.plan_fft_inverse(ny),
            kx,
            ky,
            kx_odd,
            ky_odd,
            kmag,
            kmag_sqrt,
            keep_x: two_thirds_mask(nx),
            keep_y: two_thirds_mask(ny),
        };
        Ok(Self { nx, ny, lx, ly, cache: Arc::new(cache) })
    }

    /// Square `n × n` grid on the `(2π)²` box.
    pub fn square(n: usize) -> Result<Self> {
        Self::new(n, n, 2.0 * PI, 2.0 * PI)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn lx(&self) -> f64 {
        self.lx
    }

    pub fn ly(&self) -> f64 {
        self.ly
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        self.lx / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        self.ly / self.ny as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }

    /// Physical coordinates of sample `idx`.
    pub fn coords(&self, idx: usize) -> (f64, f64) {
        ((idx % self.nx) as f64 * self.dx(), (idx / self.nx) as f64 * self.dy())
    }

    /// Wavevector `(k1, k2)` at coefficient index `idx`.
    pub fn wavevector(&self, idx: usize) -> (f64, f64) {
        (self.cache.kx[idx % self.nx], self.cache.ky[idx / self.nx])
    }

    /// Wavevector with Nyquist components zeroed (the symbol of `-i∇`).
    pub fn wavevector_odd(&self, idx: usize) -> (f64, f64) {
        (self.cache.kx_odd[idx % self.nx], self.cache.ky_odd[idx / self.nx])
    }

    pub fn kmag(&self, idx: usize) -> f64 {
        self.cache.kmag[idx]
    }

    /// Largest `|k|` on the lattice (the Nyquist corner).
    pub fn kmax(&self) -> f64 {
        let kx = (self.nx / 2) as f64 * 2.0 * PI / self.lx;
        let ky = (self.ny / 2) as f64 * 2.0 * PI / self.ly;
        kx.hypot(ky)
    }

    /// Coefficient index of integer lattice mode `(m1, m2)`.
    pub fn mode_index(&self, m1: i64, m2: i64) -> usize {
        let wrap = |m: i64, n: usize| m.rem_euclid(n as i64) as usize;
        wrap(m2, self.ny) * self.nx + wrap(m1, self.nx)
    }

    fn keeps(&self, idx: usize) -> bool {
        self.cache.keep_x[idx % self.nx] && self.cache.keep_y[idx / self.nx]
    }

    /// Forward transform of real samples: two rows per complex row FFT, and
    /// column FFTs only for `kx <= nx/2` (the rest follow by conjugate symmetry).
    fn forward_real(&self, vals: &[f64]) -> Vec<Complex64> {
        let (nx, ny) = (self.nx, self.ny);
        let half = nx / 2 + 1;
        let zero = Complex64::new(0.0, 0.0);
        let mut rows = vec![zero; nx * ny / 2];
        for j in 0..ny / 2 {
            let (a, b) = (&vals[2 * j * nx..(2 * j + 1) * nx], &vals[(2 * j + 1) * nx..(2 * j + 2) * nx]);
            for ix in 0..nx {
                rows[j * nx + ix] = Complex64::new(a[ix], b[ix]);
            }
        }
        self.cache.fwd_x.process(&mut rows);
        let mut cols = vec![zero; half * ny];
        for j in 0..ny / 2 {
            let row = &rows[j * nx..(j + 1) * nx];
            for kx in 0..half {
                let z = row[kx];
                let zc = row[(nx - kx) % nx].conj();
                cols[kx * ny + 2 * j] = (z + zc) * 0.5;
                cols[kx * ny + 2 * j + 1] = (z - zc) * Complex64::new(0.0, -0.5);
            }
        }
        self.cache.fwd_y.process(&mut cols);
        let mut out = vec![zero; nx * ny];
        for iy in 0..ny {
            let iy_neg = (ny - iy) % ny;
            for kx in 0..half {
                out[iy * nx + kx] = cols[kx * ny + iy];
            }
            for kx in half..nx {
                out[iy * nx + kx] = cols[(nx - kx) * ny + iy_neg].conj();
            }
        }
        out
    }

    /// Real part of the inverse transform, computed from the Hermitian part
    /// of `coeffs` with half the column FFTs and paired row FFTs.
    fn inverse_real(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let (nx, ny) = (self.nx, self.ny);
        let half = nx / 2 + 1;
        let zero = Complex64::new(0.0, 0.0);
        let mut cols = vec![zero; half * ny];
        for ky in 0..ny {
            let ky_neg = (ny - ky) % ny;
            for kx in 0..half {
                let s = coeffs[ky * nx + kx];
                let s_neg = coeffs[ky_neg * nx + (nx - kx) % nx].conj();
                cols[kx * ny + ky] = (s + s_neg) * 0.5;
            }
        }
        self.cache.inv_y.process(&mut cols);
        let get = |kx: usize, y: usize| {
            if kx < half {
                cols[kx * ny + y]
            } else {
                cols[(nx - kx) * ny + y].conj()
            }
        };
        let mut rows = vec![zero; nx * ny / 2];
        for j in 0..ny / 2 {
            for kx in 0..nx {
                rows[j * nx + kx] = get(kx, 2 * j) + I * get(kx, 2 * j + 1);
            }
        }
        self.cache.inv_x.process(&mut rows);
        let scale = 1.0 / (nx * ny) as f64;
        let mut out = vec![0.0; nx * ny];
        for j in 0..ny / 2 {
            for ix in 0..nx {
                let z = rows[j * nx + ix];
                out[2 * j * nx + ix] = z.re * scale;
                out[(2 * j + 1) * nx + ix] = z.im * scale;
            }
        }
        out
    }

    fn transform(&self, buf: &mut [Complex64], inverse: bool) {
        let (nx, ny) = (self.nx, self.ny);
        let (fx, fy) = if inverse {
            (&self.cache.inv_x, &self.cache.inv_y)
        } else {
            (&self.cache.fwd_x, &self.cache.fwd_y)
        };
        fx.process(buf);
        let mut cols = vec![Complex64::new(0.0, 0.0); nx * ny];
        for iy in 0..ny {
            for ix in 0..nx {
                cols[ix * ny + iy] = buf[iy * nx + ix];
            }
        }
        fy.process(&mut cols);
        let scale = if inverse { 1.0 / (nx * ny) as f64 } else { 1.0 };
        for ix in 0..nx {
            for iy in 0..ny {
                buf[iy * nx + ix] = cols[ix * ny + iy] * scale;
            }
        }
    }
}

/// Real samples on a [`Grid2D`].
#[derive(Clone, Debug, PartialEq)]
pub struct RealField {
    grid: Grid2D,
    values: Vec<f64>,
}

/// Complex samples on a [`Grid2D`] (physical space).
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexField {
    grid: Grid2D,
    values: Vec<Complex64>,
}

/// Unnormalized Fourier coefficients on a [`Grid2D`].
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid2D,
    coeffs: Vec<Complex64>,
}

/// Two-component real field (`[x1, x2]` components).
pub type VectorField = [RealField; 2];

fn check_len(grid: &Grid2D, len: usize) -> Result<()> {
    if len != grid.len() {
        return Err(Error::Config(format!(
            "field has {len} samples but the grid is {}x{}",
            grid.nx, grid.ny
        )));
    }
    Ok(())
}

fn same_grid(a: &Grid2D, b: &Grid2D) {
    assert!(a == b, "grid mismatch: {a:?} vs {b:?}");
}

impl RealField {
    pub fn new(grid: &Grid2D, values: Vec<f64>) -> Result<Self> {
        check_len(grid, values.len())?;
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite sample at index {pos}")));
        }
        Ok(Self { grid: grid.clone(), values })
    }

    pub(crate) fn from_vec_unchecked(grid: &Grid2D, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid: grid.clone(), values }
    }

    pub fn zeros(grid: &Grid2D) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &Grid2D, c: f64) -> Self {
        Self { grid: grid.clone(), values: vec![c; grid.len()] }
    }

    /// Samples `f(x1, x2)` at the grid points.
    pub fn from_fn(grid: &Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|idx| {
                let (x1, x2) = grid.coords(idx);
                f(x1, x2)
            })
            .collect();
        Self { grid: grid.clone(), values }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        same_grid(&self.grid, &other.grid);
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Self { grid: self.grid.clone(), values }
    }

    /// `self + alpha * other`, in place.
    pub fn axpy(&mut self, alpha: f64, other: &Self) {
        same_grid(&self.grid, &other.grid);
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += alpha * b;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// `∫ f` over the box (grid sum times cell area).
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_area()
    }

    /// `∫ f g` over the box.
    pub fn inner(&self, other: &Self) -> f64 {
        same_grid(&self.grid, &other.grid);
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<f64>()
            * self.grid.cell_area()
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn to_spectral(&self) -> SpectralField {
        SpectralField { grid: self.grid.clone(), coeffs: self.grid.forward_real(&self.values) }
    }

    pub fn to_complex(&self) -> ComplexField {
        ComplexField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }

    pub fn lambda_pow(&self, s: f64) -> Self {
        self.to_spectral().lambda_pow(s).to_real()
    }

    pub fn riesz(&self, axis: Axis) -> Self {
        self.to_spectral().riesz(axis).to_real()
    }

    pub fn grad(&self) -> VectorField {
        let spec = self.to_spectral();
        [spec.deriv(Axis::X1).to_real(), spec.deriv(Axis::X2).to_real()]
    }

    /// Pointwise product, dealiased by the 2/3 rule when `dealias` is set.
    pub fn product(&self, other: &Self, dealias: bool) -> SpectralField {
        let prod = self * other;
        let spec = prod.to_spectral();
        if dealias {
            spec.dealias()
        } else {
            spec
        }
    }
}

impl<'a> Add<&'a RealField> for &'a RealField {
    type Output = RealField;
    fn add(self, rhs: &RealField) -> RealField {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl<'a> Sub<&'a RealField> for &'a RealField {
    type Output = RealField;
    fn sub(self, rhs: &RealField) -> RealField {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl<'a> Mul<&'a RealField> for &'a RealField {
    type Output = RealField;
    fn mul(self, rhs: &RealField) -> RealField {
        self.zip_with(rhs, |a, b| a * b)
    }
}

impl Mul<f64> for &RealField {
    type Output = RealField;
    fn mul(self, rhs: f64) -> RealField {
        self.map(|a| a * rhs)
    }
}

impl Neg for &RealField {
    type Output = RealField;
    fn neg(self) -> RealField {
        self.map(|a| -a)
    }
}

impl ComplexField {
    pub fn new(grid: &Grid2D, values: Vec<Complex64>) -> Result<Self> {
        check_len(grid, values.len())?;
        Ok(Self { grid: grid.clone(), values })
    }

    /// `re + i·im`.
    pub fn from_parts(re: &RealField, im: &RealField) -> Self {
        same_grid(&re.grid, &im.grid);
        let values = re.values.iter().zip(&im.values).map(|(&a, &b)| Complex64::new(a, b)).collect();
        Self { grid: re.grid.clone(), values }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn re(&self) -> RealField {
        RealField::from_vec_unchecked(&self.grid, self.values.iter().map(|c| c.re).collect())
    }

    pub fn im(&self) -> RealField {
        RealField::from_vec_unchecked(&self.grid, self.values.iter().map(|c| c.im).collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn to_spectral(&self) -> SpectralField {
        let mut buf = self.values.clone();
        self.grid.transform(&mut buf, false);
        SpectralField { grid: self.grid.clone(), coeffs: buf }
    }
}

/// Coordinate axis of the horizontal plane.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X1,
    X2,
}

impl Axis {
    pub const BOTH: [Axis; 2] = [Axis::X1, Axis::X2];
}

impl SpectralField {
    pub fn new(grid: &Grid2D, coeffs: Vec<Complex64>) -> Result<Self> {
        check_len(grid, coeffs.len())?;
        Ok(Self { grid: grid.clone(), coeffs })
    }

    pub fn zeros(grid: &Grid2D) -> Self {
        Self { grid: grid.clone(), coeffs: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient of integer lattice mode `(m1, m2)`.
    pub fn mode(&self, m1: i64, m2: i64) -> Complex64 {
        self.coeffs[self.grid.mode_index(m1, m2)]
    }

    /// Inverse transform, keeping the real part.
    pub fn to_real(&self) -> RealField {
        RealField::from_vec_unchecked(&self.grid, self.grid.inverse_real(&self.coeffs))
    }

    pub fn to_complex(&self) -> ComplexField {
        let mut buf = self.coeffs.clone();
        self.grid.transform(&mut buf, true);
        ComplexField { grid: self.grid.clone(), values: buf }
    }

    /// Multiplies coefficient `idx` by `symbol(idx)`.
    pub fn apply(&self, symbol: impl Fn(usize) -> Complex64) -> Self {
        let coeffs = self.coeffs.iter().enumerate().map(|(idx, &c)| c * symbol(idx)).collect();
        Self { grid: self.grid.clone(), coeffs }
    }

    /// Multiplies by the real symbol `mult(idx)`.
    pub fn apply_real(&self, mult: impl Fn(usize) -> f64) -> Self {
        let coeffs = self.coeffs.iter().enumerate().map(|(idx, &c)| c * mult(idx)).collect();
        Self { grid: self.grid.clone(), coeffs }
    }

    /// `Λ^s`, with the zero mode sent to zero whenever `s != 0`.
    pub fn lambda_pow(&self, s: f64) -> Self {
        if s == 0.0 {
            return self.clone();
        }
        let (k, r) = (&self.grid.cache.kmag, &self.grid.cache.kmag_sqrt);
        let symbol = |idx: usize| -> f64 {
            let (k, r) = (k[idx], r[idx]);
            match s {
                0.5 => r,
                1.0 => k,
                1.5 => k * r,
                2.0 => k * k,
                -0.5 => 1.0 / r,
                -1.0 => 1.0 / k,
                -2.0 => 1.0 / (k * k),
                _ => k.powf(s),
            }
        };
        self.apply_real(|idx| if k[idx] == 0.0 { 0.0 } else { symbol(idx) })
    }

    /// Spectral derivative `∂_axis` (Nyquist component dropped).
    pub fn deriv(&self, axis: Axis) -> Self {
        let grid = &self.grid;
        self.apply(|idx| {
            let (k1, k2) = grid.wavevector_odd(idx);
            I * match axis {
                Axis::X1 => k1,
                Axis::X2 => k2,
            }
        })
    }

    /// Riesz transform with symbol `-i k_axis / |k|`.
    pub fn riesz(&self, axis: Axis) -> Self {
        let grid = &self.grid;
        self.apply(|idx| {
            let k = grid.kmag(idx);
            if k == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let (k1, k2) = grid.wavevector_odd(idx);
            -I * (match axis {
                Axis::X1 => k1,
                Axis::X2 => k2,
            } / k)
        })
    }

    /// Zeroes every coefficient outside the central 2/3 of each axis.
    pub fn dealias(&self) -> Self {
        let mut out = self.clone();
        for (idx, c) in out.coeffs.iter_mut().enumerate() {
            if !self.grid.keeps(idx) {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        out
    }

    pub fn scale(&self, a: f64) -> Self {
        self.apply_real(|_| a)
    }

    pub fn add_assign(&mut self, other: &Self) {
        same_grid(&self.grid, &other.grid);
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
    }

    pub fn sub_assign(&mut self, other: &Self) {
        same_grid(&self.grid, &other.grid);
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a -= b;
        }
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: Complex64, other: &Self) {
        same_grid(&self.grid, &other.grid);
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += alpha * b;
        }
    }

    /// `Σ |c_k|²` scaled to match `∫ |f|²` for the inverse transform `f`.
    pub fn l2_norm_sq(&self) -> f64 {
        let n = self.grid.len() as f64;
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.lx * self.grid.ly
            / (n * n)
    }
}

/// Forward transform (unnormalized).
pub fn forward(f: &RealField) -> SpectralField {
    f.to_spectral()
}

/// Inverse transform (divides by `nx * ny`), real part.
pub fn inverse(f: &SpectralField) -> RealField {
    f.to_real()
}

pub fn lambda_pow(f: &RealField, s: f64) -> RealField {
    f.lambda_pow(s)
}

pub fn riesz(f: &RealField, axis: Axis) -> RealField {
    f.riesz(axis)
}

pub fn grad(f: &RealField) -> VectorField {
    f.grad()
}

pub fn div(v: &VectorField) -> RealField {
    let mut s = v[0].to_spectral().deriv(Axis::X1);
    s.add_assign(&v[1].to_spectral().deriv(Axis::X2));
    s.to_real()
}

pub fn dealias(f: &SpectralField) -> SpectralField {
    f.dealias()
}

/// `R · v = R₁ v¹ + R₂ v²`.
pub fn riesz_dot(v: &VectorField) -> SpectralField {
    let mut s = v[0].to_spectral().riesz(Axis::X1);
    s.add_assign(&v[1].to_spectral().riesz(Axis::X2));
    s
}

/// Spectral divergence of a vector field, result in coefficient space.
pub fn div_spectral(v: &VectorField) -> SpectralField {
    let mut s = v[0].to_spectral().deriv(Axis::X1);
    s.add_assign(&v[1].to_spectral().deriv(Axis::X2));
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid() -> Grid2D {
        Grid2D::square(32).unwrap()
    }

    fn max_diff(a: &RealField, b: &RealField) -> f64 {
        (a - b).max_abs()
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(matches!(Grid2D::square(4), Err(Error::Config(_))));
        assert!(matches!(Grid2D::new(24, 32, 1.0, 1.0), Err(Error::Config(_))));
        assert!(matches!(Grid2D::new(32, 32, 0.0, 1.0), Err(Error::Config(_))));
    }

    #[test]
    fn shape_mismatch_is_config_error() {
        let g = grid();
        assert!(matches!(RealField::new(&g, vec![0.0; 10]), Err(Error::Config(_))));
        assert!(matches!(
            SpectralField::new(&g, vec![Complex64::new(0.0, 0.0); 3]),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn lattice_has_nyquist_on_positive_side() {
        let g = Grid2D::square(8).unwrap();
        let ks: Vec<f64> = (0..8).map(|i| g.wavevector(i).0).collect();
        assert_eq!(ks, vec![0.0, 1.0, 2.0, 3.0, 4.0, -3.0, -2.0, -1.0]);
    }

    #[test]
    fn constant_has_dc_only() {
        let g = grid();
        let spec = RealField::constant(&g, 2.5).to_spectral();
        for (idx, c) in spec.coeffs().iter().enumerate() {
            let expect = if idx == 0 { 2.5 * g.len() as f64 } else { 0.0 };
            assert_abs_diff_eq!(c.re, expect, epsilon = 1e-10);
            assert_abs_diff_eq!(c.im, 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn cosine_has_two_modes() {
        let g = grid();
        let spec = RealField::from_fn(&g, |x, _| x.cos()).to_spectral();
        let half = g.len() as f64 / 2.0;
        for (idx, c) in spec.coeffs().iter().enumerate() {
            let (k1, k2) = g.wavevector(idx);
            let expect = if k2 == 0.0 && k1.abs() == 1.0 { half } else { 0.0 };
            assert_abs_diff_eq!(c.re, expect, epsilon = 1e-10);
            assert_abs_diff_eq!(c.im, 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn lambda_pow_examples() {
        let g = grid();
        assert_eq!(RealField::constant(&g, 3.0).lambda_pow(0.5).max_abs(), 0.0);
        let c1 = RealField::from_fn(&g, |x, _| x.cos());
        assert!(max_diff(&c1.lambda_pow(0.5), &c1) < 1e-13);
        let c2 = RealField::from_fn(&g, |x, _| (2.0 * x).cos());
        assert!(max_diff(&c2.lambda_pow(1.0), &(&c2 * 2.0)) < 1e-13);
    }

    #[test]
    fn riesz_examples() {
        let g = grid();
        let c1 = RealField::from_fn(&g, |x, _| x.cos());
        let s1 = RealField::from_fn(&g, |x, _| x.sin());
        assert!(max_diff(&c1.riesz(Axis::X1), &s1) < 1e-13);
        let only_x2 = RealField::from_fn(&g, |_, y| (3.0 * y).sin() + y.cos());
        assert!(only_x2.riesz(Axis::X1).max_abs() < 1e-13);

        // R·∇g = Λg with g = cos x1 cos x2, |k| = √2.
        let gfun = RealField::from_fn(&g, |x, y| x.cos() * y.cos());
        let lhs = riesz_dot(&gfun.grad()).to_real();
        let rhs = RealField::from_fn(&g, |x, y| 2f64.sqrt() * x.cos() * y.cos());
        assert!(max_diff(&lhs, &rhs) < 1e-13);
    }

    #[test]
    fn grad_and_div_examples() {
        let g = grid();
        let c1 = RealField::from_fn(&g, |x, _| x.cos());
        let [g1, g2] = c1.grad();
        assert!(max_diff(&g1, &RealField::from_fn(&g, |x, _| -x.sin())) < 1e-13);
        assert!(g2.max_abs() < 1e-13);
        let lap = div(&c1.grad());
        assert!(max_diff(&lap, &(-&c1)) < 1e-13);

        let psi = RealField::from_fn(&g, |x, y| (x + 2.0 * y).sin() * (0.5 * y.cos()).exp());
        let [p1, p2] = psi.grad();
        let curl_type = [-&p2, p1];
        assert!(div(&curl_type).max_abs() < 1e-12);
    }

    #[test]
    fn dealias_examples() {
        let g = grid();
        let low = RealField::from_fn(&g, |x, y| (3.0 * x).cos() + (10.0 * y).sin()).to_spectral();
        let kept = low.dealias();
        let moved = kept.coeffs().iter().zip(low.coeffs()).map(|(a, b)| (a - b).norm());
        assert!(moved.fold(0.0, f64::max) < 1e-11);
        let nyq = RealField::from_fn(&g, |x, _| (16.0 * x).cos()).to_spectral();
        assert!(nyq.dealias().coeffs().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn dealiased_square_matches_refined_grid() {
        let n = 32usize;
        let coarse = Grid2D::square(n).unwrap();
        let fine = Grid2D::square(2 * n).unwrap();
        let scale_c = 1.0 / coarse.len() as f64;
        let scale_f = 1.0 / fine.len() as f64;
        let cutoff = n as i64 / 3;

        // cos((n/2-1)x)² aliases its 2(n/2-1) harmonic onto k = -2 on the coarse
        // grid; band-limiting the factors removes that spurious mode.
        let m = (n / 2 - 1) as f64;
        let fc = RealField::from_fn(&coarse, |x, _| (m * x).cos());
        let raw = fc.product(&fc, false);
        assert!((raw.mode(-2, 0) * scale_c).norm() > 0.2);
        let banded = fc.to_spectral().dealias().to_real();
        let clean = banded.product(&banded, true);
        assert!((clean.mode(-2, 0) * scale_c).norm() < 1e-15);

        // Band-limited factors: every retained coarse mode equals the resolved
        // product on the refined grid.
        let f = |x: f64, y: f64| (7.0 * x).cos() + (10.0 * x).sin() + (9.0 * x + 3.0 * y).cos();
        let pc = RealField::from_fn(&coarse, f);
        let pc = pc.product(&pc, true);
        let pf = RealField::from_fn(&fine, f);
        let pf = pf.product(&pf, false);
        for m1 in -cutoff..=cutoff {
            for m2 in -cutoff..=cutoff {
                let a = pc.mode(m1, m2) * scale_c;
                let b = pf.mode(m1, m2) * scale_f;
                assert!((a - b).norm() < 1e-13, "mode ({m1},{m2}): {a} vs {b}");
            }
        }
    }
}
