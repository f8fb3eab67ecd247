//! Flat `key = value` run configuration.
//!
//! Frequencies are ordinary MHz and times µs. Every key has a default, so an
//! empty file is a valid config. Unknown or repeated keys are errors.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use spinres::dynamics::{ObservableMode, SimConfig};
use spinres::sweep::{Frame, Geometry, GridSpec, UniformAxis};
use spinres::units::mhz_to_angular;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

fn err(line: Option<usize>, message: impl Into<String>) -> ConfigError {
    ConfigError { line, message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalize {
    None,
    Rows,
}

impl FromStr for Normalize {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "none" => Ok(Normalize::None),
            "rows" => Ok(Normalize::Rows),
            _ => Err(format!("expected none or rows, got `{s}`")),
        }
    }
}

impl std::fmt::Display for Normalize {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Normalize::None => "none",
            Normalize::Rows => "rows",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Observable(pub ObservableMode);

impl FromStr for Observable {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "time_average" => Ok(Observable(ObservableMode::TimeAverage)),
            "endpoint" => Ok(Observable(ObservableMode::Endpoint)),
            _ => Err(format!("expected time_average or endpoint, got `{s}`")),
        }
    }
}

impl std::fmt::Display for Observable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self.0 {
            ObservableMode::TimeAverage => "time_average",
            ObservableMode::Endpoint => "endpoint",
        })
    }
}

/// Declares the config struct, its defaults, the parser and the echo from
/// one table so the three cannot drift apart.
macro_rules! run_config {
    ($( $field:ident : $ty:ty = $default:expr => $key:literal, $doc:literal; )*) => {
        #[derive(Debug, Clone, PartialEq)]
        pub struct RunConfig {
            $( #[doc = $doc] pub $field: $ty, )*
        }

        impl Default for RunConfig {
            fn default() -> Self {
                Self { $( $field: $default, )* }
            }
        }

        impl RunConfig {
            pub const KEYS: &'static [(&'static str, &'static str)] = &[ $( ($key, $doc), )* ];

            fn set(&mut self, key: &str, value: &str, line: usize) -> Result<(), ConfigError> {
                match key {
                    $( $key => {
                        self.$field = value
                            .parse::<$ty>()
                            .map_err(|e| err(Some(line), format!("bad value for `{key}`: `{value}` ({e})")))?;
                    } )*
                    _ => return Err(err(Some(line), format!("unknown key `{key}`"))),
                }
                Ok(())
            }

            /// Every key with its effective value, in table order.
            pub fn pairs(&self) -> Vec<(&'static str, String)> {
                vec![ $( ($key, self.$field.to_string()), )* ]
            }
        }
    };
}

run_config! {
    frame: FrameKey = FrameKey(Frame::Rwa) => "model.frame", "rwa or lab";
    geometry: GeometryKey = GeometryKey(Geometry::MwXRfZ) => "model.geometry", "lab-frame drive orientation: mw_x_rf_z, mw_z_rf_x or mw_x_rf_x";
    delta_static_mhz: f64 = 100.0 => "model.delta_static_mhz", "static splitting Δ (lab frame)";
    detuning_mhz: f64 = 0.0 => "model.detuning_mhz", "MW detuning δ = Δ − ω_MW";
    rabi_mw_mhz: f64 = 0.5 => "model.rabi_mw_mhz", "MW Rabi frequency Ω_MW";
    mod_rf_mhz: f64 = 3.0 => "model.mod_rf_mhz", "RF modulation amplitude Ω_RF";
    rf_freq_mhz: f64 = 5.0 => "model.rf_freq_mhz", "RF frequency ω_RF";
    rf_phase: f64 = 0.0 => "model.rf_phase", "RF phase φ in radians (evolve only; spectra average over phases)";
    dt_us: f64 = 1e-4 => "sim.dt_us", "RK4 time step";
    t_total_us: f64 = 100.0 => "sim.t_total_us", "evolution time";
    record_stride: usize = 100 => "sim.record_stride", "record every n-th step";
    observable: Observable = Observable(ObservableMode::TimeAverage) => "sim.observable", "time_average or endpoint";
    dephasing_mhz: f64 = 0.0 => "sim.dephasing_mhz", "pure dephasing rate Γ₂/2π; nonzero selects the Bloch equations";
    rf_min_mhz: f64 = 1.0 => "grid.rf_min_mhz", "first ω_RF row";
    rf_max_mhz: f64 = 16.0 => "grid.rf_max_mhz", "last ω_RF row";
    rf_points: usize = 61 => "grid.rf_points", "number of ω_RF rows";
    mw_min_mhz: f64 = -20.0 => "grid.mw_min_mhz", "first detuning column";
    mw_max_mhz: f64 = 20.0 => "grid.mw_max_mhz", "last detuning column";
    mw_points: usize = 81 => "grid.mw_points", "number of detuning columns";
    phases: usize = 16 => "grid.phases", "RF phases averaged per cell";
    order: i32 = 0 => "analyze.order", "Bessel order n for cdt";
    zeros: usize = 3 => "analyze.zeros", "number of missing resonances for cdt";
    truncation: usize = 25 => "analyze.truncation", "sideband truncation N and Floquet Fourier blocks";
    max_order: u32 = 10 => "analyze.max_order", "largest |n| for lines";
    delta_min_mhz: f64 = -12.0 => "analyze.delta_min_mhz", "lower end of the detuning window (lines, lineshape)";
    delta_max_mhz: f64 = 12.0 => "analyze.delta_max_mhz", "upper end of the detuning window (lines, lineshape)";
    center_mhz: f64 = 0.0 => "analyze.center_mhz", "lineshape center";
    hwhm_mhz: f64 = 0.5 => "analyze.hwhm_mhz", "lineshape Lorentzian half width";
    points: usize = 2001 => "analyze.points", "lineshape grid points";
    trajectory_file: String = "trajectory.csv".to_string() => "output.trajectory_file", "evolve output file name";
    spectrum_file: String = "spectrum.csv".to_string() => "output.spectrum_file", "spectrum output file name";
    normalize: Normalize = Normalize::None => "output.normalize", "none or rows";
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameKey(pub Frame);

impl FromStr for FrameKey {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        s.parse().map(FrameKey).map_err(|e: spinres::Error| e.to_string())
    }
}

impl std::fmt::Display for FrameKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeometryKey(pub Geometry);

impl FromStr for GeometryKey {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        s.parse().map(GeometryKey).map_err(|e: spinres::Error| e.to_string())
    }
}

impl std::fmt::Display for GeometryKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut seen = HashSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| err(Some(line), format!("expected `key = value`, got `{body}`")))?;
            let (key, value) = (key.trim(), value.trim());
            cfg.set(key, value, line)?;
            if !seen.insert(key.to_string()) {
                return Err(err(Some(line), format!("key `{key}` given twice")));
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| err(None, format!("cannot read config `{}`: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| err(e.line, format!("{}: {}", path.display(), e.message)))
    }

    /// Config text that parses back to `self`. Floats use Rust's shortest
    /// round-trip formatting.
    pub fn echo(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.pairs() {
            writeln!(out, "{k} = {v}").unwrap();
        }
        out
    }

    /// Like [`Self::echo`], each key preceded by its description.
    pub fn documented(&self) -> String {
        let mut out = String::new();
        for ((k, v), (_, doc)) in self.pairs().into_iter().zip(Self::KEYS) {
            writeln!(out, "# {doc}\n{k} = {v}").unwrap();
        }
        out
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            dt: self.dt_us,
            t_total: self.t_total_us,
            record_stride: self.record_stride,
            observable_mode: self.observable.0,
            dephasing_rate: mhz_to_angular(self.dephasing_mhz),
        }
    }

    pub fn grid_spec(&self) -> Result<GridSpec, ConfigError> {
        let axis = |lo: f64, hi: f64, n: usize, what: &str| {
            UniformAxis::new(mhz_to_angular(lo), mhz_to_angular(hi), n).map_err(|e| err(None, format!("{what}: {e}")))
        };
        let spec = GridSpec {
            rf_axis: axis(self.rf_min_mhz, self.rf_max_mhz, self.rf_points, "grid.rf_*")?,
            mw_axis: axis(self.mw_min_mhz, self.mw_max_mhz, self.mw_points, "grid.mw_*")?,
            frame: self.frame.0,
            geometry: self.geometry.0,
            phases: self.phases,
            sim: self.sim_config(),
            rabi_mw: mhz_to_angular(self.rabi_mw_mhz),
            mod_rf: mhz_to_angular(self.mod_rf_mhz),
            delta_static: mhz_to_angular(self.delta_static_mhz),
        };
        spec.validate().map_err(|e| err(None, e.to_string()))?;
        Ok(spec)
    }
}
