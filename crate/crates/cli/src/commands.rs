use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use spinres::analytic::{
    cdt_missing_resonances, floquet_quasienergies, multiphoton_lines, quasistatic_lineshape, sideband_amplitudes,
    DetuningGrid,
};
use spinres::dynamics::{evolve_bloch_with, evolve_schrodinger, observable, BlochState, SpinState};
use spinres::io::{fmt_f64, write_line_profile_csv, write_resonance_lines_csv, write_spectrum_csv, write_trajectory_csv};
use spinres::sweep::{compute_spectrum, normalize_rows, UniformAxis};
use spinres::units::{angular_to_mhz, mhz_to_angular};
use spinres::{RwaModel, ENGINE_VERSION};

use crate::config::{ConfigError, Normalize, RunConfig};

#[derive(Debug)]
pub enum CmdError {
    Config(ConfigError),
    Simulation(spinres::Error),
    Analytic(spinres::Error),
    Output(String),
}

impl CmdError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CmdError::Output(_) => 1,
            CmdError::Config(_) => 2,
            CmdError::Simulation(_) => 3,
            CmdError::Analytic(_) => 4,
        }
    }
}

impl std::fmt::Display for CmdError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CmdError::Config(e) => write!(f, "config error: {e}"),
            CmdError::Simulation(e) => write!(f, "simulation error: {e}"),
            CmdError::Analytic(e) => write!(f, "analytic error: {e}"),
            CmdError::Output(e) => write!(f, "output error: {e}"),
        }
    }
}

impl From<ConfigError> for CmdError {
    fn from(e: ConfigError) -> Self {
        CmdError::Config(e)
    }
}

fn config_err(e: spinres::Error) -> CmdError {
    CmdError::Config(ConfigError { line: None, message: e.to_string() })
}

fn create(path: &Path) -> Result<BufWriter<File>, CmdError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CmdError::Output(format!("{}: {e}", dir.display())))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CmdError::Output(format!("{}: {e}", path.display())))
}

fn output_err(path: &Path) -> impl Fn(spinres::Error) -> CmdError + '_ {
    move |e| CmdError::Output(format!("{}: {e}", path.display()))
}

/// Config echo preceded by provenance comments. Feeding the file back as a
/// config reproduces the run.
fn write_sidecar(path: &Path, cfg: &RunConfig, command: &str, comments: &[(String, String)]) -> Result<(), CmdError> {
    let mut w = create(path)?;
    let mut text = format!("# spinres {command} run\n# engine_version = {ENGINE_VERSION}\n");
    for (k, v) in comments {
        text.push_str(&format!("# {k} = {v}\n"));
    }
    text.push_str(&cfg.echo());
    w.write_all(text.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| CmdError::Output(format!("{}: {e}", path.display())))
}

fn sidecar_path(data: &Path) -> PathBuf {
    data.with_extension("cfg")
}

pub fn evolve(cfg: &RunConfig, out: &Path) -> Result<f64, CmdError> {
    let started = Instant::now();
    let spec = spinres::sweep::GridSpec {
        rf_axis: UniformAxis::single(mhz_to_angular(cfg.rf_freq_mhz)).map_err(config_err)?,
        mw_axis: UniformAxis::single(mhz_to_angular(cfg.detuning_mhz)).map_err(config_err)?,
        phases: 1,
        ..cfg.grid_spec()?
    };
    spec.validate().map_err(config_err)?;
    let h = spec
        .cell_hamiltonian(spec.rf_axis.start, spec.mw_axis.start, cfg.rf_phase)
        .map_err(config_err)?;
    let sim = &spec.sim;
    let traj = if sim.dephasing_rate == 0.0 {
        evolve_schrodinger(&h, SpinState::ms0(), sim)
    } else {
        evolve_bloch_with(&h, BlochState::ms0(), sim)
    }
    .map_err(CmdError::Simulation)?;
    let value = observable(&traj, sim.observable_mode).map_err(CmdError::Simulation)?;

    let path = out.join(&cfg.trajectory_file);
    let mut w = create(&path)?;
    write_trajectory_csv(&traj, &mut w).map_err(output_err(&path))?;
    w.flush().map_err(|e| CmdError::Output(e.to_string()))?;
    write_sidecar(
        &sidecar_path(&path),
        cfg,
        "evolve",
        &[
            ("observable".into(), fmt_f64(value)),
            ("norm_drift".into(), fmt_f64(traj.norm_drift)),
            ("wall_time_s".into(), format!("{:.3}", started.elapsed().as_secs_f64())),
        ],
    )?;
    Ok(value)
}

pub fn spectrum(cfg: &RunConfig, out: &Path) -> Result<PathBuf, CmdError> {
    let spec = cfg.grid_spec()?;
    let mut grid = compute_spectrum(&spec).map_err(CmdError::Simulation)?;
    if cfg.normalize == Normalize::Rows {
        grid = normalize_rows(&grid).map_err(CmdError::Simulation)?;
    }
    let path = out.join(&cfg.spectrum_file);
    let mut w = create(&path)?;
    write_spectrum_csv(&grid, &mut w).map_err(output_err(&path))?;
    w.flush().map_err(|e| CmdError::Output(e.to_string()))?;
    let meta: Vec<(String, String)> = grid
        .metadata()
        .into_iter()
        .filter(|(k, _)| k == "normalization" || k == "wall_time_s")
        .collect();
    write_sidecar(&sidecar_path(&path), cfg, "spectrum", &meta)?;
    Ok(path)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Analysis {
    Sidebands,
    Cdt,
    Lineshape,
    Floquet,
    Lines,
}

fn rwa_model(cfg: &RunConfig) -> Result<RwaModel, CmdError> {
    RwaModel::new(
        mhz_to_angular(cfg.detuning_mhz),
        mhz_to_angular(cfg.rabi_mw_mhz),
        mhz_to_angular(cfg.mod_rf_mhz),
        mhz_to_angular(cfg.rf_freq_mhz),
        cfg.rf_phase,
    )
    .map_err(config_err)
}

/// Write the chosen analytic result as CSV to `w`; diagnostics go to stderr.
pub fn analyze<W: Write>(cfg: &RunConfig, which: Analysis, mut w: W) -> Result<(), CmdError> {
    let io = |e: std::io::Error| CmdError::Output(e.to_string());
    match which {
        Analysis::Sidebands => {
            let set = sideband_amplitudes(&rwa_model(cfg)?, cfg.truncation as u32).map_err(CmdError::Analytic)?;
            if set.undertruncated {
                eprintln!("warning: truncation {} is below ceil(2Ω_RF/ω_RF) + 20", cfg.truncation);
            }
            writeln!(w, "n,amplitude_mhz").map_err(io)?;
            for (n, a) in set.iter() {
                writeln!(w, "{n},{}", fmt_f64(angular_to_mhz(a))).map_err(io)?;
            }
        }
        Analysis::Cdt => {
            let freqs = cdt_missing_resonances(cfg.order, mhz_to_angular(cfg.mod_rf_mhz), cfg.zeros)
                .map_err(CmdError::Analytic)?;
            writeln!(w, "m,rf_freq_mhz").map_err(io)?;
            for (m, f) in freqs.iter().enumerate() {
                writeln!(w, "{},{}", m + 1, fmt_f64(angular_to_mhz(*f))).map_err(io)?;
            }
        }
        Analysis::Lineshape => {
            if cfg.points < 2 || cfg.delta_max_mhz.partial_cmp(&cfg.delta_min_mhz) != Some(std::cmp::Ordering::Greater) {
                return Err(CmdError::Config(ConfigError {
                    line: None,
                    message: "analyze.points must be >= 2 and delta_max_mhz > delta_min_mhz".into(),
                }));
            }
            let step = (cfg.delta_max_mhz - cfg.delta_min_mhz) / (cfg.points - 1) as f64;
            let grid = DetuningGrid::new(mhz_to_angular(cfg.delta_min_mhz), mhz_to_angular(step), cfg.points)
                .map_err(CmdError::Analytic)?;
            let profile = quasistatic_lineshape(
                mhz_to_angular(cfg.center_mhz),
                mhz_to_angular(cfg.mod_rf_mhz),
                mhz_to_angular(cfg.hwhm_mhz),
                &grid,
            )
            .map_err(CmdError::Analytic)?;
            write_line_profile_csv(&profile, &mut w).map_err(CmdError::Analytic)?;
        }
        Analysis::Floquet => {
            let f = floquet_quasienergies(&rwa_model(cfg)?, cfg.truncation).map_err(CmdError::Analytic)?;
            if f.undertruncated {
                eprintln!("warning: truncation {} is below ceil(2Ω_RF/ω_RF) + 10", cfg.truncation);
            }
            writeln!(w, "quasienergy_a_mhz,quasienergy_b_mhz,gap_mhz").map_err(io)?;
            let [a, b] = f.quasienergies.map(angular_to_mhz);
            writeln!(w, "{},{},{}", fmt_f64(a), fmt_f64(b), fmt_f64(angular_to_mhz(f.gap()))).map_err(io)?;
        }
        Analysis::Lines => {
            let range = (mhz_to_angular(cfg.delta_min_mhz), mhz_to_angular(cfg.delta_max_mhz));
            let lines = multiphoton_lines(&rwa_model(cfg)?, range, cfg.max_order).map_err(CmdError::Analytic)?;
            write_resonance_lines_csv(&lines, &mut w).map_err(CmdError::Analytic)?;
        }
    }
    w.flush().map_err(io)
}
