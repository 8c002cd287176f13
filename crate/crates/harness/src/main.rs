use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rotwave_core::dynamics::RhsForm;
use rotwave_harness::config::{RawConfig, SimConfig, SweepConfig};
use rotwave_harness::run::{self, DispersionSetup, RunStatus};
use rotwave_harness::{resolve_out_dir, HarnessError, Result, OUT_ENV};

#[derive(Parser)]
#[command(name = "rotwave", version, about = "Rotational water-wave solver and experiment harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Configuration file (`key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set model.dt=0.005`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory; beats ROTWAVE_OUT and `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation, writing diagnostics.csv and snapshots.
    Simulate(ConfigArgs),
    /// Measure DtN truncation error slopes against the exact family.
    ValidateDtn {
        #[arg(long, default_value_t = 1)]
        order: u8,
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_values_t = [0.01, 0.02, 0.04])]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        k1: i64,
        #[arg(long, default_value_t = 1)]
        k2: i64,
        /// Also compare the strip solver with the exact family.
        #[arg(long)]
        strip: bool,
    },
    /// Evaluate the curl residual of the configured provider.
    CurlCheck {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, value_delimiter = ',', default_values_t = [0.0])]
        times: Vec<f64>,
        /// Compare against zero normal vorticity instead of the provider's.
        #[arg(long)]
        zero_omega_n: bool,
    },
    /// Measure the frequency of a small linear mode.
    Dispersion {
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        k1: i64,
        #[arg(long, default_value_t = 0)]
        k2: i64,
        #[arg(long, default_value_t = 1e-6)]
        amplitude: f64,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        #[arg(long, default_value_t = 1.0)]
        periods: f64,
        #[arg(long, default_value = "u")]
        form: RhsForm,
        #[arg(long, default_value_t = 2)]
        order: u8,
    },
    /// Run a lifespan sweep over (eps0, eps1) and write scan.csv.
    Scan(ConfigArgs),
}

fn load_raw(args: &ConfigArgs) -> Result<(RawConfig, PathBuf)> {
    let (mut raw, base) = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
            let base = path.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf);
            (RawConfig::parse(&text)?, base)
        }
        None => (RawConfig::default(), PathBuf::from(".")),
    };
    for o in &args.overrides {
        raw.set_override(o)?;
    }
    Ok((raw, base))
}

fn load_sim(args: &ConfigArgs) -> Result<SimConfig> {
    let (mut raw, base) = load_raw(args)?;
    let mut cfg = SimConfig::from_raw(&mut raw, &base)?;
    raw.finish()?;
    cfg.output.dir = resolve_out_dir(args.out.clone(), std::env::var_os(OUT_ENV), &cfg.output.dir);
    Ok(cfg)
}

fn pass_fail(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn execute(command: Command) -> Result<i32> {
    match command {
        Command::Simulate(args) => {
            let cfg = load_sim(&args)?;
            let outcome = run::run_simulate(&cfg)?;
            match &outcome.status {
                RunStatus::Completed => println!(
                    "completed: {} records, t = {}, csv {}",
                    outcome.records.len(),
                    outcome.final_state.t,
                    outcome.csv_path().display()
                ),
                RunStatus::BlowUp { t, cause } => eprintln!("terminated at t = {t}: {cause}"),
                RunStatus::TimedOut { t } => eprintln!("wall-time limit reached at t = {t}"),
            }
            Ok(outcome.status.exit_code())
        }
        Command::ValidateDtn { order, n, eps, k1, k2, strip } => {
            let v = run::run_validate_dtn(n, order, &eps, (k1, k2), strip)?;
            for (e, err) in v.report.eps.iter().zip(&v.report.errors) {
                println!("eps {e:e}  error {err:e}");
            }
            println!(
                "order {order}: slope {:.4} (required >= {:.1}) {}",
                v.report.slope,
                f64::from(order) + 0.9,
                pass_fail(v.passes())
            );
            if let Some(s) = v.strip_error {
                println!("strip vs exact: {s:e}");
            }
            Ok(if v.passes() { 0 } else { 1 })
        }
        Command::CurlCheck { cfg, times, zero_omega_n } => {
            let cfg = load_sim(&cfg)?;
            let report = run::run_curl_check(&cfg, &times, zero_omega_n)?;
            for (t, r) in &report.residuals {
                println!("t {t}  residual {r:e}");
            }
            println!("curl check (< {:e}): {}", run::CURL_TOL, pass_fail(report.passes()));
            Ok(if report.passes() { 0 } else { 1 })
        }
        Command::Dispersion { n, k1, k2, amplitude, dt, periods, form, order } => {
            let setup = DispersionSetup { n, k: (k1, k2), amplitude, dt, periods, form, dtn_order: order };
            let r = run::run_dispersion(&setup)?;
            println!(
                "measured {:.8}  expected {:.8}  relative error {:e} over {} steps: {}",
                r.measured,
                r.expected,
                r.rel_error,
                r.steps,
                pass_fail(r.passes())
            );
            Ok(if r.passes() { 0 } else { 1 })
        }
        Command::Scan(args) => {
            let (mut raw, base) = load_raw(&args)?;
            let sweep = SweepConfig::from_raw(&mut raw, &base)?;
            raw.finish()?;
            let out = resolve_out_dir(args.out.clone(), std::env::var_os(OUT_ENV), &sweep.template.output.dir);
            let rows = run::run_scan(&sweep, &out)?;
            for r in &rows {
                println!("{}", r.csv());
            }
            let ok = run::scan_trend_holds(&rows);
            println!("trend (t_violation non-increasing in eps1): {}", pass_fail(ok));
            Ok(if ok { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
