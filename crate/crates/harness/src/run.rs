//! Experiment drivers behind the CLI subcommands.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use rotwave_core::diagnostics::{check_record, compute_record, dispersion_measure, DiagnosticsRecord};
use rotwave_core::dtn::strip::{dtn_oracle_strip, StripOptions};
use rotwave_core::dtn::{dtn_convergence_order, dtn_oracle_exact, ConvergenceReport, DtnOrder};
use rotwave_core::dynamics::{step, ModelParams, RhsForm, SurfaceState, UState};
use rotwave_core::spectral::{Grid2D, RealField};
use rotwave_core::vorticity::{curl_residual, AnalyticFamily, VorticityProvider, VorticityTrace};
use rotwave_core::Error as CoreError;

use crate::config::{InitialCondition, ProviderSpec, SimConfig, SweepConfig};
use crate::error::{HarnessError, Result};
use crate::output::CsvWriter;
use crate::snapshot::Snapshot;

pub const CSV_NAME: &str = "diagnostics.csv";

/// Curl residual threshold of the curl check.
pub const CURL_TOL: f64 = 1e-10;

/// Relative frequency error accepted by the dispersion check.
pub const DISPERSION_TOL: f64 = 1e-4;

pub fn snapshot_name(step: usize) -> String {
    format!("snapshot_{step:06}.wws")
}

pub fn build_provider(spec: &ProviderSpec, grid: &Grid2D) -> Result<VorticityProvider> {
    Ok(match spec {
        ProviderSpec::Zero => VorticityProvider::Zero,
        ProviderSpec::GradientCosine { amplitude, k, frequency } => VorticityProvider::Analytic(
            AnalyticFamily::GradientCosine { amplitude: *amplitude, mode: *k, frequency: *frequency },
        ),
        ProviderSpec::GradientGaussian { amplitude, width, center, frequency } => {
            VorticityProvider::Analytic(AnalyticFamily::GradientGaussian {
                amplitude: *amplitude,
                width: *width,
                center: *center,
                frequency: *frequency,
            })
        }
        ProviderSpec::StreamCosine { amplitude, k, frequency } => VorticityProvider::Analytic(
            AnalyticFamily::StreamCosine { amplitude: *amplitude, mode: *k, frequency: *frequency },
        ),
        ProviderSpec::Static { path } => {
            let snap = Snapshot::read(path)?;
            let state = snap.to_state()?;
            if state.grid() != grid {
                return Err(HarnessError::Snapshot(format!("{}: grid differs from the configured grid", path.display())));
            }
            VorticityProvider::static_trace([state.h, state.phi_omega])?
        }
    })
}

pub fn initial_state(ic: &InitialCondition, grid: &Grid2D) -> Result<SurfaceState> {
    Ok(match ic {
        InitialCondition::Rest => SurfaceState::rest(grid),
        InitialCondition::Linear { amplitude, k } => SurfaceState::linear_wave(grid, *amplitude, *k)?,
        InitialCondition::Standing { amplitude, k } => SurfaceState::standing_wave(grid, *amplitude, *k)?,
        InitialCondition::Stokes { amplitude } => SurfaceState::stokes(grid, *amplitude),
        InitialCondition::Snapshot { path } => {
            let state = Snapshot::read(path)?.to_state()?;
            if state.grid() != grid {
                return Err(HarnessError::Snapshot(format!("{}: grid differs from the configured grid", path.display())));
            }
            state
        }
    })
}

/// How a simulation ended.
#[derive(Clone, Debug, PartialEq)]
pub enum RunStatus {
    Completed,
    /// Non-finite state or a bootstrap violation; `cause` names it.
    BlowUp { t: f64, cause: String },
    /// The wall-clock budget ran out at simulation time `t`.
    TimedOut { t: f64 },
}

impl RunStatus {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Completed => 0,
            Self::BlowUp { .. } => 3,
            Self::TimedOut { .. } => 1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SimOutcome {
    pub status: RunStatus,
    pub records: Vec<DiagnosticsRecord>,
    pub final_state: SurfaceState,
    pub out_dir: PathBuf,
    /// First violated bootstrap clause, if the run stopped on one.
    pub violation: Option<rotwave_core::diagnostics::Violation>,
}

impl SimOutcome {
    pub fn csv_path(&self) -> PathBuf {
        self.out_dir.join(CSV_NAME)
    }
}

/// Runs `cfg`, writing `diagnostics.csv` and snapshots into `cfg.output.dir`.
pub fn run_simulate(cfg: &SimConfig) -> Result<SimOutcome> {
    simulate_until(cfg, None)
}

fn simulate_until(cfg: &SimConfig, deadline: Option<Instant>) -> Result<SimOutcome> {
    let grid = cfg.grid.build()?;
    let params = &cfg.params;
    params.validate(&grid)?;
    let provider = build_provider(&cfg.provider, &grid)?;
    let mut state = initial_state(&cfg.initial, &grid)?;
    provider.check_admissible(&state.h)?;

    let out_dir = cfg.output.dir.clone();
    fs::create_dir_all(&out_dir).map_err(|e| HarnessError::io(&out_dir, e))?;
    let mut csv = CsvWriter::create(&out_dir.join(CSV_NAME), cfg.bootstrap.n_sobolev, cfg.bootstrap.iota)?;

    let remaining = ModelParams { t_end: (params.t_end - state.t).max(0.0), ..params.clone() };
    let n_steps = remaining.n_steps();
    let mut records = Vec::new();
    let mut status = RunStatus::Completed;
    let mut violation = None;

    for i in 0..=n_steps {
        if i > 0 {
            match step(&state, &provider, params) {
                Ok(next) => state = next,
                Err(CoreError::BlowUp { t, what, value }) => {
                    status = RunStatus::BlowUp { t, cause: format!("non-finite {what} ({value})") };
                    break;
                }
                Err(e) => return Err(e.into()),
            }
        }
        if cfg.output.snapshot_stride > 0 && i % cfg.output.snapshot_stride == 0 {
            Snapshot::from_state(&state).write(&out_dir.join(snapshot_name(i)))?;
        }
        if i % cfg.output.csv_stride == 0 || i == n_steps {
            let trace = trace_for(&provider, &state);
            let record = compute_record(&state, &trace, params, &cfg.bootstrap);
            csv.record(&record)?;
            let v = cfg.bootstrap_enabled.then(|| check_record(&record, &cfg.bootstrap)).flatten();
            records.push(record);
            if let Some(v) = v {
                status = RunStatus::BlowUp {
                    t: v.t,
                    cause: format!("{} violated (value {:e} > bound {:e})", v.clause, v.value, v.bound),
                };
                violation = Some(v);
                break;
            }
        }
        if deadline.is_some_and(|d| Instant::now() > d) && i < n_steps {
            status = RunStatus::TimedOut { t: state.t };
            break;
        }
    }
    match &status {
        RunStatus::BlowUp { t, cause } => csv.comment(&format!("terminated at t = {t}: {cause}"))?,
        RunStatus::TimedOut { t } => csv.comment(&format!("wall-time limit reached at t = {t}"))?,
        RunStatus::Completed => {}
    }
    csv.finish()?;
    Ok(SimOutcome { status, records, final_state: state, out_dir, violation })
}

fn trace_for(provider: &VorticityProvider, state: &SurfaceState) -> VorticityTrace {
    provider.trace(&state.h, state.t)
}

/// DtN convergence study, optionally cross-checked against the strip solver.
#[derive(Clone, Debug)]
pub struct DtnValidation {
    pub report: ConvergenceReport,
    /// Max difference between strip solver and exact family at the largest
    /// amplitude (depth 10, 64 levels).
    pub strip_error: Option<f64>,
}

impl DtnValidation {
    pub fn passes(&self) -> bool {
        self.report.passes()
    }
}

pub fn run_validate_dtn(n: usize, order: u8, eps_list: &[f64], k: (i64, i64), strip: bool) -> Result<DtnValidation> {
    let grid = Grid2D::square(n)?;
    let report = dtn_convergence_order(&grid, eps_list, DtnOrder::new(order)?, k)?;
    let strip_error = if strip {
        let eps = eps_list.iter().copied().fold(0.0, f64::max);
        let h = RealField::from_fn(&grid, |x, _| eps * x.cos());
        let (phi, exact) = dtn_oracle_exact(&h, k)?;
        let got = dtn_oracle_strip(&h, &phi, 10.0, 64, StripOptions::default())?;
        Some((&got - &exact).max_abs())
    } else {
        None
    };
    Ok(DtnValidation { report, strip_error })
}

#[derive(Clone, Debug)]
pub struct CurlReport {
    /// `(t, max |curl U_ω − ω·n|)` per requested time.
    pub residuals: Vec<(f64, f64)>,
}

impl CurlReport {
    pub fn passes(&self) -> bool {
        self.residuals.iter().all(|&(_, r)| r < CURL_TOL)
    }
}

/// Curl residual of the configured provider over the configured initial
/// surface. With `zero_omega_n` the residual is taken against zero normal
/// vorticity instead of the provider's own.
pub fn run_curl_check(cfg: &SimConfig, times: &[f64], zero_omega_n: bool) -> Result<CurlReport> {
    let grid = cfg.grid.build()?;
    let provider = build_provider(&cfg.provider, &grid)?;
    let h = initial_state(&cfg.initial, &grid)?.h;
    let residuals = times
        .iter()
        .map(|&t| {
            let trace = provider.trace(&h, t);
            let omega_n = if zero_omega_n { RealField::zeros(&grid) } else { provider.omega_n(&grid, t) };
            (t, curl_residual(&h, &trace, &omega_n).max_abs())
        })
        .collect();
    Ok(CurlReport { residuals })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DispersionSetup {
    pub n: usize,
    pub k: (i64, i64),
    pub amplitude: f64,
    pub dt: f64,
    pub periods: f64,
    pub form: RhsForm,
    pub dtn_order: u8,
}

impl Default for DispersionSetup {
    fn default() -> Self {
        Self { n: 64, k: (1, 0), amplitude: 1e-6, dt: 0.01, periods: 1.0, form: RhsForm::U, dtn_order: 2 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DispersionReport {
    pub measured: f64,
    pub expected: f64,
    pub rel_error: f64,
    pub steps: usize,
}

impl DispersionReport {
    pub fn passes(&self) -> bool {
        self.rel_error <= DISPERSION_TOL
    }
}

/// Evolves a right-moving linear wave and measures the frequency of its
/// Fourier coefficient.
pub fn run_dispersion(setup: &DispersionSetup) -> Result<DispersionReport> {
    let grid = Grid2D::square(setup.n)?;
    let state = SurfaceState::linear_wave(&grid, setup.amplitude, setup.k)?;
    let (k1, k2) = (setup.k.0 as f64, setup.k.1 as f64);
    let expected = k1.hypot(k2).sqrt();
    let t_end = setup.periods * 2.0 * std::f64::consts::PI / expected;
    let params = ModelParams::new(DtnOrder::new(setup.dtn_order)?, setup.form, setup.dt, t_end)?;
    params.validate(&grid)?;
    let steps = params.n_steps();
    let mut s = state;
    let coeff = |s: &SurfaceState| UState::from_surface(s).u.to_spectral().mode(setup.k.0, setup.k.1);
    let mut times = vec![s.t];
    let mut probe = vec![coeff(&s)];
    for _ in 0..steps {
        s = step(&s, &VorticityProvider::Zero, &params)?;
        times.push(s.t);
        probe.push(coeff(&s));
    }
    let measured = dispersion_measure(&times, &probe)?;
    Ok(DispersionReport { measured, expected, rel_error: (measured - expected).abs() / expected, steps })
}

/// One cell of a lifespan sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanRow {
    pub eps0: f64,
    pub eps1: f64,
    /// First bootstrap violation; `None` when the run finished cleanly.
    pub t_violation: Option<f64>,
    /// Violated clause, `none`, or the reason the cell stopped early.
    pub clause: String,
}

impl ScanRow {
    pub fn csv(&self) -> String {
        let t = self.t_violation.map_or_else(|| "inf".to_owned(), |t| format!("{t:e}"));
        format!("{:e},{:e},{t},{}", self.eps0, self.eps1, self.clause)
    }
}

/// Largest bootstrap norm of the template's initial data at unit amplitude.
fn unit_norm(cfg: &SimConfig, grid: &Grid2D) -> Result<f64> {
    let unit = with_amplitude(&cfg.initial, 1.0);
    let state = initial_state(&unit, grid)?;
    let r = compute_record(&state, &VorticityTrace::zero(grid, 0.0), &cfg.params, &cfg.bootstrap);
    Ok(r.w4inf_norm.max(r.hs_norm).max(r.weighted_profile_norm))
}

fn with_amplitude(ic: &InitialCondition, a: f64) -> InitialCondition {
    match ic {
        InitialCondition::Linear { k, .. } => InitialCondition::Linear { amplitude: a, k: *k },
        InitialCondition::Standing { k, .. } => InitialCondition::Standing { amplitude: a, k: *k },
        InitialCondition::Stokes { .. } => InitialCondition::Stokes { amplitude: a },
        other => other.clone(),
    }
}

fn with_provider_amplitude(spec: &ProviderSpec, a: f64) -> ProviderSpec {
    match spec.clone() {
        ProviderSpec::GradientCosine { k, frequency, .. } => ProviderSpec::GradientCosine { amplitude: a, k, frequency },
        ProviderSpec::GradientGaussian { width, center, frequency, .. } => {
            ProviderSpec::GradientGaussian { amplitude: a, width, center, frequency }
        }
        ProviderSpec::StreamCosine { k, frequency, .. } => ProviderSpec::StreamCosine { amplitude: a, k, frequency },
        other => other,
    }
}

/// The per-cell configuration of a sweep.
pub fn cell_config(sweep: &SweepConfig, i: usize, j: usize, out_dir: &Path) -> Result<SimConfig> {
    let (eps0, eps1) = (sweep.eps0_list[i], sweep.eps1_list[j]);
    let mut cfg = sweep.template.clone();
    let grid = cfg.grid.build()?;
    cfg.bootstrap.eps0 = eps0;
    cfg.bootstrap.eps1 = eps1;
    cfg.bootstrap_enabled = true;
    let amp = sweep.initial_fraction * eps0 / unit_norm(&cfg, &grid)?;
    cfg.initial = with_amplitude(&cfg.initial, amp);
    cfg.provider = with_provider_amplitude(&cfg.provider, eps1);
    cfg.output.dir = out_dir.join(format!("cell_{i}_{j}"));
    Ok(cfg)
}

/// Runs every `(ε₀, ε₁)` cell (in parallel) and writes `scan.csv` to
/// `out_dir`. Per-cell failures are recorded in the table.
pub fn run_scan(sweep: &SweepConfig, out_dir: &Path) -> Result<Vec<ScanRow>> {
    fs::create_dir_all(out_dir).map_err(|e| HarnessError::io(out_dir, e))?;
    let cells: Vec<(usize, usize)> =
        (0..sweep.eps0_list.len()).flat_map(|i| (0..sweep.eps1_list.len()).map(move |j| (i, j))).collect();
    let budget = Duration::from_secs_f64(sweep.max_wall_seconds);
    let rows: Vec<ScanRow> = cells
        .par_iter()
        .map(|&(i, j)| {
            let (eps0, eps1) = (sweep.eps0_list[i], sweep.eps1_list[j]);
            let row = |t_violation, clause: String| ScanRow { eps0, eps1, t_violation, clause };
            let outcome = cell_config(sweep, i, j, out_dir).and_then(|cfg| simulate_until(&cfg, Some(Instant::now() + budget)));
            match outcome {
                Ok(o) => match (o.status, o.violation) {
                    (RunStatus::Completed, _) => row(None, "none".into()),
                    (RunStatus::BlowUp { t, .. }, Some(v)) => row(Some(t), v.clause.to_string()),
                    (RunStatus::BlowUp { t, .. }, None) => row(Some(t), "non-finite".into()),
                    (RunStatus::TimedOut { .. }, _) => row(None, "timeout".into()),
                },
                Err(e) => row(None, format!("error: {}", e.to_string().replace([',', '\n'], ";"))),
            }
        })
        .collect();
    let mut text = String::from("eps0,eps1,t_violation,clause\n");
    for r in &rows {
        text.push_str(&r.csv());
        text.push('\n');
    }
    let path = out_dir.join("scan.csv");
    fs::write(&path, text).map_err(|e| HarnessError::io(&path, e))?;
    Ok(rows)
}

/// For each `ε₀`, violation times are non-increasing in `ε₁` (no violation
/// counts as infinitely late).
pub fn scan_trend_holds(rows: &[ScanRow]) -> bool {
    let mut eps0s: Vec<f64> = rows.iter().map(|r| r.eps0).collect();
    eps0s.sort_by(f64::total_cmp);
    eps0s.dedup();
    eps0s.iter().all(|&e0| {
        let mut cells: Vec<&ScanRow> = rows.iter().filter(|r| r.eps0 == e0).collect();
        cells.sort_by(|a, b| a.eps1.total_cmp(&b.eps1));
        cells.windows(2).all(|w| w[1].t_violation.unwrap_or(f64::INFINITY) <= w[0].t_violation.unwrap_or(f64::INFINITY))
    })
}
