//! CSV and flat-text serialization. Frequencies are written in ordinary MHz,
//! every float with 17 significant digits so values round-trip exactly.

use std::io::{BufRead, Write};

use crate::analytic::{LineProfile, ResonanceLine};
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::sweep::SpectrumGrid;
use crate::units::{angular_to_mhz, mhz_to_angular};

pub const SPECTRUM_CORNER: &str = "rf\\mw";

/// Locale-independent scientific notation with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, mut w: W) -> Result<()> {
    let with_bloch = traj.samples.first().is_some_and(|s| s.bloch.is_some());
    if with_bloch {
        writeln!(w, "t_us,p0,rx,ry,rz")?;
    } else {
        writeln!(w, "t_us,p0")?;
    }
    for s in &traj.samples {
        write!(w, "{},{}", fmt_f64(s.t), fmt_f64(s.p0))?;
        if with_bloch {
            let r = s.bloch.ok_or_else(|| Error::Format("mixed Bloch and spinor samples".into()))?;
            write!(w, ",{},{},{}", fmt_f64(r[0]), fmt_f64(r[1]), fmt_f64(r[2]))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn write_spectrum_csv<W: Write>(grid: &SpectrumGrid, mut w: W) -> Result<()> {
    write!(w, "{SPECTRUM_CORNER}")?;
    for &d in &grid.mw_axis {
        write!(w, ",{}", fmt_f64(angular_to_mhz(d)))?;
    }
    writeln!(w)?;
    for (i, &rf) in grid.rf_axis.iter().enumerate() {
        write!(w, "{}", fmt_f64(angular_to_mhz(rf)))?;
        for v in grid.row(i) {
            write!(w, ",{}", fmt_f64(*v))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

fn parse_field(s: &str, line: usize) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Format(format!("line {line}: `{s}` is not a number")))
}

/// Read a spectrum matrix written by [`write_spectrum_csv`]. Axes come back
/// in rad/µs; normalization and provenance are not part of the matrix file
/// and are left at their defaults.
pub fn read_spectrum_csv<R: BufRead>(r: R) -> Result<SpectrumGrid> {
    let mut lines = r.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::Format("empty spectrum file".into()))?;
    let header = header?;
    let mut cells = header.split(',');
    if cells.next().map(str::trim) != Some(SPECTRUM_CORNER) {
        return Err(Error::Format(format!("line 1: expected corner cell `{SPECTRUM_CORNER}`")));
    }
    let mw_axis = cells.map(|c| parse_field(c, 1).map(mhz_to_angular)).collect::<Result<Vec<_>>>()?;
    let mut rf_axis = Vec::new();
    let mut signal = Vec::new();
    for (idx, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut cells = line.split(',');
        rf_axis.push(mhz_to_angular(parse_field(cells.next().unwrap_or(""), idx + 1)?));
        let before = signal.len();
        for c in cells {
            signal.push(parse_field(c, idx + 1)?);
        }
        if signal.len() - before != mw_axis.len() {
            return Err(Error::Format(format!(
                "line {}: {} values for {} MW points",
                idx + 1,
                signal.len() - before,
                mw_axis.len()
            )));
        }
    }
    SpectrumGrid::new(rf_axis, mw_axis, signal)
}

/// `delta_mhz,density` with the density per MHz.
pub fn write_line_profile_csv<W: Write>(profile: &LineProfile, mut w: W) -> Result<()> {
    writeln!(w, "delta_mhz,density")?;
    for (x, p) in profile.grid.points().zip(&profile.density) {
        writeln!(w, "{},{}", fmt_f64(angular_to_mhz(x)), fmt_f64(p * mhz_to_angular(1.0)))?;
    }
    Ok(())
}

pub fn write_resonance_lines_csv<W: Write>(lines: &[ResonanceLine], mut w: W) -> Result<()> {
    writeln!(w, "n,delta_mhz,effective_rabi_mhz")?;
    for l in lines {
        writeln!(
            w,
            "{},{},{}",
            l.order,
            fmt_f64(angular_to_mhz(l.detuning)),
            fmt_f64(angular_to_mhz(l.effective_rabi))
        )?;
    }
    Ok(())
}

/// Flat `key = value` text, one pair per line.
pub fn write_metadata<W: Write>(pairs: &[(String, String)], mut w: W) -> Result<()> {
    for (k, v) in pairs {
        writeln!(w, "{k} = {v}")?;
    }
    Ok(())
}

/// Parse flat `key = value` text. Blank lines and `#` comments are skipped;
/// each pair carries its 1-based line number.
pub fn read_metadata<R: BufRead>(r: R) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (k, v) = body
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("line {}: expected `key = value`", idx + 1)))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(Error::Format(format!("line {}: empty key", idx + 1)));
        }
        out.push((idx + 1, k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}
