//! Two-dimensional spectra over (ω_RF, MW detuning) with RF-phase averaging.
//!
//! Every cell is an independent simulation started in `m_s = 0`; the cell
//! value is the configured observable averaged over `phases` uniformly spaced
//! RF phases. Cells are evaluated in parallel and written into preallocated
//! slots, so results are bit-identical for any worker count.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::dynamics::{simulate_observable, SimConfig};
use crate::error::{Error, Result};
use crate::model::{DriveField, DrivenHamiltonian, RwaModel, TwoLevelModel};
use crate::units::mhz_to_angular;

/// Evenly spaced, strictly increasing axis. A single-point axis has step 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformAxis {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl UniformAxis {
    /// `len` points from `start` to `end` inclusive.
    pub fn new(start: f64, end: f64, len: usize) -> Result<Self> {
        if !(start.is_finite() && end.is_finite()) || len == 0 {
            return Err(Error::InvalidParameter(format!("bad axis [{start}, {end}] with {len} points")));
        }
        if len == 1 {
            if start != end {
                return Err(Error::InvalidParameter("a one-point axis needs start == end".into()));
            }
            return Ok(Self { start, step: 0.0, len });
        }
        if !(end > start) {
            return Err(Error::InvalidParameter(format!("axis must increase, got [{start}, {end}]")));
        }
        Ok(Self { start, step: (end - start) / (len - 1) as f64, len })
    }

    pub fn single(value: f64) -> Result<Self> {
        Self::new(value, value, 1)
    }

    pub fn value(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.value(i)).collect()
    }

    /// Index of the grid point nearest to `x`.
    pub fn nearest(&self, x: f64) -> usize {
        if self.len == 1 {
            return 0;
        }
        (((x - self.start) / self.step).round().max(0.0) as usize).min(self.len - 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Frame {
    Lab,
    #[default]
    Rwa,
}

/// Orientation of the MW and RF amplitude vectors for lab-frame runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Geometry {
    #[default]
    MwXRfZ,
    MwZRfX,
    MwXRfX,
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Frame::Lab => "lab",
            Frame::Rwa => "rwa",
        })
    }
}

impl FromStr for Frame {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lab" => Ok(Frame::Lab),
            "rwa" => Ok(Frame::Rwa),
            _ => Err(Error::InvalidParameter(format!("unknown frame `{s}` (expected lab or rwa)"))),
        }
    }
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Geometry::MwXRfZ => "mw_x_rf_z",
            Geometry::MwZRfX => "mw_z_rf_x",
            Geometry::MwXRfX => "mw_x_rf_x",
        })
    }
}

impl FromStr for Geometry {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mw_x_rf_z" => Ok(Geometry::MwXRfZ),
            "mw_z_rf_x" => Ok(Geometry::MwZRfX),
            "mw_x_rf_x" => Ok(Geometry::MwXRfX),
            _ => Err(Error::InvalidParameter(format!(
                "unknown geometry `{s}` (expected mw_x_rf_z, mw_z_rf_x or mw_x_rf_x)"
            ))),
        }
    }
}

impl Geometry {
    /// Unit directions of the (MW, RF) amplitude vectors.
    pub fn directions(self) -> ([f64; 3], [f64; 3]) {
        const X: [f64; 3] = [1.0, 0.0, 0.0];
        const Z: [f64; 3] = [0.0, 0.0, 1.0];
        match self {
            Geometry::MwXRfZ => (X, Z),
            Geometry::MwZRfX => (Z, X),
            Geometry::MwXRfX => (X, X),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// ω_RF values, rad/µs.
    pub rf_axis: UniformAxis,
    /// MW detuning δ = Δ − ω_MW values, rad/µs (both frames).
    pub mw_axis: UniformAxis,
    pub frame: Frame,
    pub geometry: Geometry,
    pub phases: usize,
    pub sim: SimConfig,
    pub rabi_mw: f64,
    pub mod_rf: f64,
    /// Δ for lab-frame runs, rad/µs.
    pub delta_static: f64,
}

pub const DEFAULT_PHASES: usize = 16;

impl GridSpec {
    /// The desk-scale grid: ω_RF 1–16 MHz (61 points) by δ −20…+20 MHz
    /// (81 points), Ω_MW = 0.5 MHz, Ω_RF = 3 MHz, Δ = 100 MHz.
    pub fn desk_default() -> Self {
        Self {
            rf_axis: UniformAxis::new(mhz_to_angular(1.0), mhz_to_angular(16.0), 61).unwrap(),
            mw_axis: UniformAxis::new(mhz_to_angular(-20.0), mhz_to_angular(20.0), 81).unwrap(),
            frame: Frame::Rwa,
            geometry: Geometry::MwXRfZ,
            phases: DEFAULT_PHASES,
            sim: SimConfig::default(),
            rabi_mw: mhz_to_angular(0.5),
            mod_rf: mhz_to_angular(3.0),
            delta_static: mhz_to_angular(100.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.sim.validate()?;
        if self.phases == 0 {
            return Err(Error::InvalidParameter("phases must be >= 1".into()));
        }
        for (name, v) in [("rabi_mw", self.rabi_mw), ("mod_rf", self.mod_rf)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be >= 0, got {v}")));
            }
        }
        if self.rf_axis.start < 0.0 {
            return Err(Error::InvalidParameter("RF frequencies must be >= 0".into()));
        }
        if self.frame == Frame::Lab {
            if !(self.delta_static.is_finite() && self.delta_static > 0.0) {
                return Err(Error::InvalidParameter("lab frame needs a positive static splitting".into()));
            }
            let max_delta = self.mw_axis.value(self.mw_axis.len - 1);
            if self.delta_static - max_delta < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "detuning {max_delta} exceeds the static splitting {}; MW carrier would be negative",
                    self.delta_static
                )));
            }
        }
        Ok(())
    }

    pub fn phase(&self, k: usize) -> f64 {
        TAU * k as f64 / self.phases as f64
    }

    /// Hamiltonian for one cell and one RF phase.
    pub fn cell_hamiltonian(&self, omega_rf: f64, detuning: f64, phase: f64) -> Result<DrivenHamiltonian> {
        match self.frame {
            Frame::Rwa => Ok(RwaModel::new(detuning, self.rabi_mw, self.mod_rf, omega_rf, phase)?.driven_hamiltonian()),
            Frame::Lab => {
                let (mw_dir, rf_dir) = self.geometry.directions();
                let mw = DriveField::new(mw_dir.map(|c| c * self.rabi_mw), self.delta_static - detuning, 0.0)?;
                let rf = DriveField::new(rf_dir.map(|c| c * self.mod_rf), omega_rf, phase)?;
                Ok(TwoLevelModel::new(self.delta_static, vec![mw, rf])?.driven_hamiltonian())
            }
        }
    }
}

/// Phase-averaged observable for one (ω_RF, δ) cell.
pub fn evaluate_cell(spec: &GridSpec, omega_rf: f64, detuning: f64) -> Result<f64> {
    let mut sum = 0.0;
    for k in 0..spec.phases {
        let h = spec.cell_hamiltonian(omega_rf, detuning, spec.phase(k))?;
        sum += simulate_observable(&h, &spec.sim)?;
    }
    Ok(sum / spec.phases as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    #[default]
    Raw,
    RowMean,
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Normalization::Raw => "raw",
            Normalization::RowMean => "row_mean",
        })
    }
}

/// `signal[i][j]` for RF index `i` and MW index `j`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumGrid {
    pub rf_axis: Vec<f64>,
    pub mw_axis: Vec<f64>,
    pub signal: Vec<f64>,
    pub normalization: Normalization,
    pub spec: Option<GridSpec>,
    pub engine_version: String,
    pub wall_time_s: f64,
}

impl SpectrumGrid {
    pub fn new(rf_axis: Vec<f64>, mw_axis: Vec<f64>, signal: Vec<f64>) -> Result<Self> {
        if rf_axis.is_empty() || mw_axis.is_empty() || signal.len() != rf_axis.len() * mw_axis.len() {
            return Err(Error::InvalidParameter(format!(
                "signal has {} entries for a {}x{} grid",
                signal.len(),
                rf_axis.len(),
                mw_axis.len()
            )));
        }
        Ok(Self {
            rf_axis,
            mw_axis,
            signal,
            normalization: Normalization::Raw,
            spec: None,
            engine_version: crate::ENGINE_VERSION.to_string(),
            wall_time_s: 0.0,
        })
    }

    pub fn rows(&self) -> usize {
        self.rf_axis.len()
    }

    pub fn cols(&self) -> usize {
        self.mw_axis.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.signal[i * self.cols() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.cols();
        &self.signal[i * c..(i + 1) * c]
    }

    /// Key/value provenance: the grid specification echo plus engine
    /// version and wall time.
    pub fn metadata(&self) -> Vec<(String, String)> {
        let mut kv = vec![
            ("engine_version".to_string(), self.engine_version.clone()),
            ("normalization".to_string(), self.normalization.to_string()),
            ("wall_time_s".to_string(), format!("{:.3}", self.wall_time_s)),
        ];
        if let Some(s) = &self.spec {
            let push = |kv: &mut Vec<(String, String)>, k: &str, v: String| kv.push((k.to_string(), v));
            push(&mut kv, "frame", s.frame.to_string());
            push(&mut kv, "geometry", s.geometry.to_string());
            push(&mut kv, "phases", s.phases.to_string());
            push(&mut kv, "rabi_mw", s.rabi_mw.to_string());
            push(&mut kv, "mod_rf", s.mod_rf.to_string());
            push(&mut kv, "delta_static", s.delta_static.to_string());
            push(&mut kv, "rf_axis", format!("{} {} {}", s.rf_axis.start, s.rf_axis.step, s.rf_axis.len));
            push(&mut kv, "mw_axis", format!("{} {} {}", s.mw_axis.start, s.mw_axis.step, s.mw_axis.len));
            push(&mut kv, "dt", s.sim.dt.to_string());
            push(&mut kv, "t_total", s.sim.t_total.to_string());
            push(&mut kv, "observable", format!("{:?}", s.sim.observable_mode));
            push(&mut kv, "dephasing_rate", s.sim.dephasing_rate.to_string());
        }
        kv
    }
}

/// Compute the spectrum on the global rayon pool.
pub fn compute_spectrum(spec: &GridSpec) -> Result<SpectrumGrid> {
    spec.validate()?;
    let start = Instant::now();
    let (rows, cols) = (spec.rf_axis.len, spec.mw_axis.len);
    let signal = (0..rows * cols)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / cols, idx % cols);
            evaluate_cell(spec, spec.rf_axis.value(i), spec.mw_axis.value(j))
                .map_err(|e| Error::Cell { row: i, col: j, source: Box::new(e) })
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut grid = SpectrumGrid::new(spec.rf_axis.values(), spec.mw_axis.values(), signal)?;
    grid.spec = Some(*spec);
    grid.wall_time_s = start.elapsed().as_secs_f64();
    Ok(grid)
}

/// [`compute_spectrum`] on a dedicated pool of `threads` workers.
pub fn compute_spectrum_with_threads(spec: &GridSpec, threads: usize) -> Result<SpectrumGrid> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    pool.install(|| compute_spectrum(spec))
}

/// Divide every constant-ω_RF row by its mean.
pub fn normalize_rows(grid: &SpectrumGrid) -> Result<SpectrumGrid> {
    let mut out = grid.clone();
    let cols = grid.cols();
    for (i, row) in out.signal.chunks_mut(cols).enumerate() {
        let mean = row.iter().sum::<f64>() / cols as f64;
        if mean == 0.0 || !mean.is_finite() {
            return Err(Error::ZeroRowMean(i));
        }
        row.iter_mut().for_each(|v| *v /= mean);
    }
    out.normalization = Normalization::RowMean;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridComparison {
    pub max_abs: f64,
    pub mean_abs: f64,
    /// (RF index, MW index) of the largest difference.
    pub worst: (usize, usize),
    pub tolerance: f64,
    pub pass: bool,
}

/// Cell-wise comparison of two grids on identical axes.
pub fn compare_grids(a: &SpectrumGrid, b: &SpectrumGrid, tol: f64) -> Result<GridComparison> {
    if a.rf_axis != b.rf_axis || a.mw_axis != b.mw_axis {
        return Err(Error::AxisMismatch(format!(
            "{}x{} grid vs {}x{} grid (or differing axis values)",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let cols = a.cols();
    let mut max_abs = 0.0;
    let mut worst = 0;
    let mut sum = 0.0;
    for (k, (x, y)) in a.signal.iter().zip(&b.signal).enumerate() {
        let d = (x - y).abs();
        sum += d;
        if d > max_abs {
            max_abs = d;
            worst = k;
        }
    }
    Ok(GridComparison {
        max_abs,
        mean_abs: sum / a.signal.len() as f64,
        worst: (worst / cols, worst % cols),
        tolerance: tol,
        pass: max_abs <= tol,
    })
}
