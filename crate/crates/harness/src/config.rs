//! Line-based `key = value` configuration.
//!
//! Keys carry dotted section prefixes (`grid.nx = 128`). Blank lines and
//! lines starting with `#` are ignored, as is anything after a ` #` on a value
//! line. Every key must be known; unknown or repeated keys are errors that
//! name the offending line.
//!
//! Real values accept a trailing `pi` (`2pi`, `0.5pi`, `pi`). Lists are
//! comma-separated.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rotwave_core::diagnostics::BootstrapConfig;
use rotwave_core::dtn::DtnOrder;
use rotwave_core::dynamics::{ModelParams, RhsForm};
use rotwave_core::spectral::Grid2D;

use crate::error::{HarnessError, Result};

/// Largest accepted grid dimension.
pub const MAX_GRID: usize = 4096;

/// Where a setting came from: a 1-based file line, or a command-line override.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Override,
}

impl std::fmt::Display for Origin {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Line(n) => write!(f, "line {n}"),
            Self::Override => f.write_str("command-line override"),
        }
    }
}

#[derive(Clone, Debug)]
struct Entry {
    origin: Origin,
    value: String,
}

/// Parsed but not yet interpreted settings.
#[derive(Clone, Debug, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, Entry>,
}

fn config_err(origin: Option<Origin>, key: Option<&str>, msg: impl Into<String>) -> HarnessError {
    HarnessError::Config { origin, key: key.map(str::to_owned), msg: msg.into() }
}

fn valid_key(key: &str) -> bool {
    !key.is_empty()
        && key.split('.').all(|part| {
            !part.is_empty() && part.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        })
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut raw = Self::default();
        for (idx, line) in text.lines().enumerate() {
            let origin = Origin::Line(idx + 1);
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(config_err(Some(origin), None, format!("expected `key = value`, found {line:?}")));
            };
            let key = key.trim();
            let value = match value.find(" #") {
                Some(pos) => &value[..pos],
                None => value,
            }
            .trim();
            if !valid_key(key) {
                return Err(config_err(Some(origin), None, format!("malformed key {key:?}")));
            }
            if let Some(prev) = raw.entries.get(key) {
                return Err(config_err(Some(origin), Some(key), format!("duplicate key (first set on {})", prev.origin)));
            }
            raw.entries.insert(key.to_owned(), Entry { origin, value: value.to_owned() });
        }
        Ok(raw)
    }

    /// Applies a `key=value` override, replacing any file setting.
    pub fn set_override(&mut self, assignment: &str) -> Result<()> {
        let Some((key, value)) = assignment.split_once('=') else {
            return Err(config_err(Some(Origin::Override), None, format!("expected key=value, found {assignment:?}")));
        };
        let key = key.trim();
        if !valid_key(key) {
            return Err(config_err(Some(Origin::Override), None, format!("malformed key {key:?}")));
        }
        self.entries.insert(key.to_owned(), Entry { origin: Origin::Override, value: value.trim().to_owned() });
        Ok(())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn take(&mut self, key: &str) -> Option<Entry> {
        self.entries.remove(key)
    }

    fn parse_with<T>(&mut self, key: &str, default: T, f: impl Fn(&str) -> Option<T>, what: &str) -> Result<T> {
        match self.take(key) {
            None => Ok(default),
            Some(e) => f(&e.value).ok_or_else(|| {
                config_err(Some(e.origin), Some(key), format!("expected {what}, found {:?}", e.value))
            }),
        }
    }

    fn real(&mut self, key: &str, default: f64) -> Result<f64> {
        self.parse_with(key, default, parse_real, "a finite real number")
    }

    fn int(&mut self, key: &str, default: i64) -> Result<i64> {
        self.parse_with(key, default, |s| s.parse().ok(), "an integer")
    }

    fn uint(&mut self, key: &str, default: usize) -> Result<usize> {
        self.parse_with(key, default, |s| s.parse().ok(), "a non-negative integer")
    }

    fn boolean(&mut self, key: &str, default: bool) -> Result<bool> {
        self.parse_with(key, default, |s| s.parse().ok(), "true or false")
    }

    fn string(&mut self, key: &str, default: &str) -> String {
        self.take(key).map_or_else(|| default.to_owned(), |e| e.value)
    }

    fn reals(&mut self, key: &str) -> Result<Option<(Origin, Vec<f64>)>> {
        let Some(e) = self.take(key) else { return Ok(None) };
        let mut out = Vec::new();
        for item in e.value.split(',') {
            let item = item.trim();
            if item.is_empty() && e.value.trim().is_empty() {
                break;
            }
            out.push(parse_real(item).ok_or_else(|| {
                config_err(Some(e.origin), Some(key), format!("expected a list of reals, found {:?}", e.value))
            })?);
        }
        Ok(Some((e.origin, out)))
    }

    fn origin(&self, key: &str) -> Option<Origin> {
        self.entries.get(key).map(|e| e.origin)
    }

    /// Errors on the first (by position) key nobody consumed.
    pub fn finish(self) -> Result<()> {
        let first = self.entries.into_iter().min_by_key(|(_, e)| match e.origin {
            Origin::Line(n) => n,
            Origin::Override => usize::MAX,
        });
        match first {
            None => Ok(()),
            Some((key, e)) => Err(config_err(Some(e.origin), Some(&key), "unknown key")),
        }
    }
}

/// A finite real, optionally suffixed by `pi`.
pub fn parse_real(s: &str) -> Option<f64> {
    let s = s.trim();
    let v = if let Some(head) = s.strip_suffix("pi") {
        let head = head.trim_end_matches('*').trim();
        let c = if head.is_empty() { 1.0 } else { head.parse::<f64>().ok()? };
        c * PI
    } else {
        s.parse::<f64>().ok()?
    };
    v.is_finite().then_some(v)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
}

impl GridSpec {
    /// Largest wavenumber magnitude on the grid (the Nyquist corner).
    pub fn kmax(&self) -> f64 {
        let kx = (self.nx / 2) as f64 * 2.0 * PI / self.lx;
        let ky = (self.ny / 2) as f64 * 2.0 * PI / self.ly;
        kx.hypot(ky)
    }

    pub fn build(&self) -> Result<Grid2D> {
        Ok(Grid2D::new(self.nx, self.ny, self.lx, self.ly)?)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialCondition {
    Rest,
    /// Right-moving linear wave `u = ε e^{ik·x}`.
    Linear { amplitude: f64, k: (i64, i64) },
    /// `h = ε cos(k·x)`, `φ_ω = 0`.
    Standing { amplitude: f64, k: (i64, i64) },
    Stokes { amplitude: f64 },
    Snapshot { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProviderSpec {
    Zero,
    GradientCosine { amplitude: f64, k: (i64, i64), frequency: f64 },
    GradientGaussian { amplitude: f64, width: f64, center: (f64, f64), frequency: f64 },
    StreamCosine { amplitude: f64, k: (i64, i64), frequency: f64 },
    /// `V_ω` stored in a snapshot file (first component in the `h` slot).
    Static { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputSpec {
    pub dir: PathBuf,
    /// Diagnostics row every this many steps (at least 1).
    pub csv_stride: usize,
    /// Snapshot every this many steps; 0 disables snapshots.
    pub snapshot_stride: usize,
}

/// Everything a simulation run needs.
#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub grid: GridSpec,
    pub params: ModelParams,
    pub initial: InitialCondition,
    pub provider: ProviderSpec,
    pub bootstrap: BootstrapConfig,
    /// Stop with a blow-up status at the first bootstrap violation.
    pub bootstrap_enabled: bool,
    pub output: OutputSpec,
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn existing_path(raw: &mut RawConfig, key: &str, base: &Path) -> Result<PathBuf> {
    let origin = raw.origin(key);
    let value = raw.string(key, "");
    if value.is_empty() {
        return Err(config_err(origin, Some(key), "a path is required"));
    }
    let path = resolve(base, &value);
    if !path.is_file() {
        return Err(config_err(origin, Some(key), format!("file {} not found", path.display())));
    }
    Ok(path)
}

fn wavevector(raw: &mut RawConfig, prefix: &str, default: (i64, i64)) -> Result<(i64, i64)> {
    let k1 = raw.int(&format!("{prefix}.k1"), default.0)?;
    let k2 = raw.int(&format!("{prefix}.k2"), default.1)?;
    if k1.abs() > MAX_GRID as i64 || k2.abs() > MAX_GRID as i64 {
        return Err(config_err(raw.origin(&format!("{prefix}.k1")), Some(&format!("{prefix}.k1")), "wavevector out of range"));
    }
    Ok((k1, k2))
}

impl SimConfig {
    /// Parses a configuration; relative paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut raw = RawConfig::parse(text)?;
        let cfg = Self::from_raw(&mut raw, base)?;
        raw.finish()?;
        Ok(cfg)
    }

    /// Consumes the simulation keys of `raw`, leaving any others in place.
    pub fn from_raw(raw: &mut RawConfig, base: &Path) -> Result<Self> {
        let grid = Self::grid_spec(raw)?;

        let order_origin = raw.origin("model.dtn_order");
        let order = raw.int("model.dtn_order", 2)?;
        let dtn_order = DtnOrder::try_from(order)
            .map_err(|e| config_err(order_origin, Some("model.dtn_order"), e.to_string()))?;
        let form_origin = raw.origin("model.rhs_form");
        let rhs_form: RhsForm = raw
            .string("model.rhs_form", "u-form")
            .parse()
            .map_err(|e: rotwave_core::Error| config_err(form_origin, Some("model.rhs_form"), e.to_string()))?;
        let dt_origin = raw.origin("model.dt");
        let dt = raw.real("model.dt", 0.01)?;
        let t_end = raw.real("model.t_end", 1.0)?;
        let dealias = raw.boolean("model.dealias", true)?;
        let params = ModelParams::new(dtn_order, rhs_form, dt, t_end)
            .map_err(|e| config_err(dt_origin, Some("model.dt"), e.to_string()))?
            .with_dealias(dealias);
        params.validate_kmax(grid.kmax()).map_err(|e| config_err(dt_origin, Some("model.dt"), e.to_string()))?;

        let family_origin = raw.origin("initial.family");
        let family = raw.string("initial.family", "rest");
        let initial = match family.as_str() {
            "rest" => InitialCondition::Rest,
            "linear" => InitialCondition::Linear {
                amplitude: raw.real("initial.amplitude", 1e-3)?,
                k: wavevector(raw, "initial", (1, 0))?,
            },
            "standing" => InitialCondition::Standing {
                amplitude: raw.real("initial.amplitude", 1e-3)?,
                k: wavevector(raw, "initial", (1, 0))?,
            },
            "stokes" => InitialCondition::Stokes { amplitude: raw.real("initial.amplitude", 0.05)? },
            "snapshot" => InitialCondition::Snapshot { path: existing_path(raw, "initial.path", base)? },
            other => {
                return Err(config_err(
                    family_origin,
                    Some("initial.family"),
                    format!("unknown family {other:?} (rest, linear, standing, stokes, snapshot)"),
                ))
            }
        };
        if let InitialCondition::Linear { k: (0, 0), .. } | InitialCondition::Standing { k: (0, 0), .. } = initial {
            return Err(config_err(raw.origin("initial.k1"), Some("initial.k1"), "wavevector must be nonzero"));
        }

        let provider_origin = raw.origin("vorticity.provider");
        let provider = match raw.string("vorticity.provider", "zero").as_str() {
            "zero" => ProviderSpec::Zero,
            "gradient-cosine" => ProviderSpec::GradientCosine {
                amplitude: raw.real("vorticity.amplitude", 1e-3)?,
                k: wavevector(raw, "vorticity", (0, 1))?,
                frequency: raw.real("vorticity.frequency", 0.0)?,
            },
            "gradient-gaussian" => ProviderSpec::GradientGaussian {
                amplitude: raw.real("vorticity.amplitude", 1e-3)?,
                width: {
                    let origin = raw.origin("vorticity.width");
                    let w = raw.real("vorticity.width", 0.5)?;
                    if w <= 0.0 {
                        return Err(config_err(origin, Some("vorticity.width"), "width must be positive"));
                    }
                    w
                },
                center: (raw.real("vorticity.center_x", grid.lx / 2.0)?, raw.real("vorticity.center_y", grid.ly / 2.0)?),
                frequency: raw.real("vorticity.frequency", 0.0)?,
            },
            "stream-cosine" => ProviderSpec::StreamCosine {
                amplitude: raw.real("vorticity.amplitude", 1e-3)?,
                k: wavevector(raw, "vorticity", (1, 1))?,
                frequency: raw.real("vorticity.frequency", 0.0)?,
            },
            "static" => ProviderSpec::Static { path: existing_path(raw, "vorticity.path", base)? },
            other => {
                return Err(config_err(
                    provider_origin,
                    Some("vorticity.provider"),
                    format!("unknown provider {other:?} (zero, gradient-cosine, gradient-gaussian, stream-cosine, static)"),
                ))
            }
        };

        let bootstrap_enabled = raw.boolean("bootstrap.enabled", false)?;
        let d = BootstrapConfig::default();
        let bs_origin = raw.origin("bootstrap.eps0");
        let n_origin = raw.origin("bootstrap.n_sobolev");
        let n_sobolev = raw.uint("bootstrap.n_sobolev", d.n_sobolev as usize)?;
        let n_sobolev = u32::try_from(n_sobolev)
            .ok()
            .filter(|&n| n <= 64)
            .ok_or_else(|| config_err(n_origin, Some("bootstrap.n_sobolev"), "must be at most 64"))?;
        let bootstrap = BootstrapConfig {
            eps0: raw.real("bootstrap.eps0", d.eps0)?,
            eps1: raw.real("bootstrap.eps1", d.eps1)?,
            delta: raw.real("bootstrap.delta", d.delta)?,
            iota: raw.real("bootstrap.iota", d.iota)?,
            n_sobolev,
        };
        bootstrap.validate().map_err(|e| config_err(bs_origin, None, e.to_string()))?;

        let stride_origin = raw.origin("output.csv_stride");
        let output = OutputSpec {
            dir: resolve(base, &raw.string("output.dir", "out")),
            csv_stride: raw.uint("output.csv_stride", 1)?,
            snapshot_stride: raw.uint("output.snapshot_stride", 0)?,
        };
        if output.csv_stride == 0 {
            return Err(config_err(stride_origin, Some("output.csv_stride"), "must be at least 1"));
        }

        Ok(Self { grid, params, initial, provider, bootstrap, bootstrap_enabled, output })
    }

    fn grid_spec(raw: &mut RawConfig) -> Result<GridSpec> {
        let mut dims = [0usize; 2];
        for (slot, key) in ["grid.nx", "grid.ny"].into_iter().enumerate() {
            let origin = raw.origin(key);
            let n = raw.uint(key, 64)?;
            if !(8..=MAX_GRID).contains(&n) || !n.is_power_of_two() {
                return Err(config_err(origin, Some(key), format!("must be a power of two in [8, {MAX_GRID}], got {n}")));
            }
            dims[slot] = n;
        }
        let mut lens = [0.0; 2];
        for (slot, key) in ["grid.lx", "grid.ly"].into_iter().enumerate() {
            let origin = raw.origin(key);
            let l = raw.real(key, 2.0 * PI)?;
            if l <= 0.0 {
                return Err(config_err(origin, Some(key), "must be positive"));
            }
            lens[slot] = l;
        }
        Ok(GridSpec { nx: dims[0], ny: dims[1], lx: lens[0], ly: lens[1] })
    }
}

/// A lifespan sweep over `(ε₀, ε₁)`.
///
/// Each cell runs the template with `bootstrap.eps0 = ε₀`, `bootstrap.eps1 =
/// ε₁`, vorticity amplitude `ε₁`, and initial amplitude scaled so that the
/// largest bootstrap norm at `t = 0` is `initial_fraction · ε₀`.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub eps0_list: Vec<f64>,
    pub eps1_list: Vec<f64>,
    pub initial_fraction: f64,
    pub max_wall_seconds: f64,
    pub template: SimConfig,
}

impl SweepConfig {
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut raw = RawConfig::parse(text)?;
        let cfg = Self::from_raw(&mut raw, base)?;
        raw.finish()?;
        Ok(cfg)
    }

    pub fn from_raw(raw: &mut RawConfig, base: &Path) -> Result<Self> {
        let mut lists = Vec::new();
        for key in ["sweep.eps0", "sweep.eps1"] {
            let Some((origin, list)) = raw.reals(key)? else {
                return Err(config_err(None, Some(key), "missing list"));
            };
            if list.is_empty() {
                return Err(config_err(Some(origin), Some(key), "list must not be empty"));
            }
            if list.iter().any(|&v| v <= 0.0) {
                return Err(config_err(Some(origin), Some(key), "entries must be positive"));
            }
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(config_err(Some(origin), Some(key), "list must be sorted ascending"));
            }
            lists.push(list);
        }
        let frac_origin = raw.origin("sweep.initial_fraction");
        let initial_fraction = raw.real("sweep.initial_fraction", 0.1)?;
        if !(initial_fraction > 0.0 && initial_fraction < 1.0) {
            return Err(config_err(frac_origin, Some("sweep.initial_fraction"), "must lie in (0, 1)"));
        }
        let wall_origin = raw.origin("sweep.max_wall_seconds");
        let max_wall_seconds = raw.real("sweep.max_wall_seconds", 600.0)?;
        if max_wall_seconds <= 0.0 {
            return Err(config_err(wall_origin, Some("sweep.max_wall_seconds"), "must be positive"));
        }
        let template = SimConfig::from_raw(raw, base)?;
        if matches!(template.initial, InitialCondition::Rest | InitialCondition::Snapshot { .. }) {
            return Err(config_err(
                None,
                Some("initial.family"),
                "a sweep needs an amplitude family (linear, standing, stokes)",
            ));
        }
        let eps1_list = lists.pop().expect("two lists");
        let eps0_list = lists.pop().expect("two lists");
        Ok(Self { eps0_list, eps1_list, initial_fraction, max_wall_seconds, template })
    }
}
