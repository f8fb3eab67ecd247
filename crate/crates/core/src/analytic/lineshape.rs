//! Quasistatic lineshape: for `ω_RF` slow compared with the coherent
//! evolution window the RF acts as a frozen detuning offset
//! `2Ω_RF cos φ` with uniformly random `φ`, so the resonance position is
//! arcsine distributed on `(δ − 2Ω_RF, δ + 2Ω_RF)`. The observed profile is
//! that density convolved with a Lorentzian.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Uniform detuning grid `start + i·step`, `i = 0..len`, rad/µs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetuningGrid {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl DetuningGrid {
    pub fn new(start: f64, step: f64, len: usize) -> Result<Self> {
        if !(start.is_finite() && step.is_finite() && step > 0.0 && len >= 2) {
            return Err(Error::InvalidParameter(format!(
                "grid needs finite start, step > 0 and at least 2 points (start {start}, step {step}, len {len})"
            )));
        }
        Ok(Self { start, step, len })
    }

    /// Grid of `len` points centered on `center` covering `±half_width`.
    pub fn centered(center: f64, half_width: f64, len: usize) -> Result<Self> {
        if len < 2 {
            return Err(Error::InvalidParameter("grid needs at least 2 points".into()));
        }
        Self::new(center - half_width, 2.0 * half_width / (len - 1) as f64, len)
    }

    pub fn point(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn end(&self) -> f64 {
        self.point(self.len - 1)
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(|i| self.point(i))
    }
}

/// A probability density sampled on a [`DetuningGrid`], in 1/(rad/µs).
#[derive(Debug, Clone, PartialEq)]
pub struct LineProfile {
    pub grid: DetuningGrid,
    pub density: Vec<f64>,
}

impl LineProfile {
    pub fn trapezoid_integral(&self) -> f64 {
        trapezoid(&self.density, self.grid.step)
    }

    /// Interior local maxima as `(detuning, density)`, highest first.
    pub fn peaks(&self) -> Vec<(f64, f64)> {
        let d = &self.density;
        let mut peaks: Vec<(f64, f64)> = (1..d.len() - 1)
            .filter(|&i| d[i] > d[i - 1] && d[i] >= d[i + 1])
            .map(|i| {
                // Quadratic refinement through the neighbours.
                let denom = d[i - 1] - 2.0 * d[i] + d[i + 1];
                let off = if denom != 0.0 { 0.5 * (d[i - 1] - d[i + 1]) / denom } else { 0.0 };
                (self.grid.point(i) + off * self.grid.step, d[i])
            })
            .collect();
        peaks.sort_by(|a, b| b.1.total_cmp(&a.1));
        peaks
    }

    /// Distance between the two highest maxima, if there are two.
    pub fn horn_separation(&self) -> Option<f64> {
        let p = self.peaks();
        (p.len() >= 2).then(|| (p[0].0 - p[1].0).abs())
    }
}

fn trapezoid(values: &[f64], step: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    step * (values.iter().sum::<f64>() - 0.5 * (values[0] + values[n - 1]))
}

fn arcsine_cdf(x: f64, center: f64, half_width: f64) -> f64 {
    let u = (x - center) / half_width;
    if u <= -1.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        0.5 + u.asin() / PI
    }
}

/// Mean of a unit-area Lorentzian of HWHM `gamma` over `[u − h/2, u + h/2]`.
fn lorentzian_cell(u: f64, h: f64, gamma: f64) -> f64 {
    (((u + 0.5 * h) / gamma).atan() - ((u - 0.5 * h) / gamma).atan()) / (PI * h)
}

/// Arcsine density on `(δ − 2Ω_RF, δ + 2Ω_RF)` convolved with a unit-area
/// Lorentzian of half width `lorentz_hwhm`, normalized to unit trapezoidal
/// integral on `grid`.
///
/// The arcsine mass of each grid cell comes from differences of its
/// elementary CDF, so the integrable endpoint singularities are never
/// evaluated pointwise.
pub fn quasistatic_lineshape(
    delta_center: f64,
    mod_rf: f64,
    lorentz_hwhm: f64,
    grid: &DetuningGrid,
) -> Result<LineProfile> {
    if !(mod_rf >= 0.0 && mod_rf.is_finite()) {
        return Err(Error::InvalidParameter(format!("Ω_RF must be >= 0, got {mod_rf}")));
    }
    if !(lorentz_hwhm > 0.0 && lorentz_hwhm.is_finite()) {
        return Err(Error::InvalidParameter(format!("Lorentzian HWHM must be > 0, got {lorentz_hwhm}")));
    }
    let reach = 2.0 * mod_rf + 10.0 * lorentz_hwhm;
    if grid.start > delta_center - reach || grid.end() < delta_center + reach {
        return Err(Error::Domain(format!(
            "grid [{}, {}] must cover {} ± {}",
            grid.start,
            grid.end(),
            delta_center,
            reach
        )));
    }

    let h = grid.step;
    let mut density = if mod_rf == 0.0 {
        grid.points().map(|x| lorentzian_cell(x - delta_center, h, lorentz_hwhm)).collect::<Vec<_>>()
    } else {
        let half_width = 2.0 * mod_rf;
        let masses: Vec<(f64, f64)> = grid
            .points()
            .map(|x| {
                let m = arcsine_cdf(x + 0.5 * h, delta_center, half_width)
                    - arcsine_cdf(x - 0.5 * h, delta_center, half_width);
                (x, m)
            })
            .filter(|&(_, m)| m > 0.0)
            .collect();
        grid.points()
            .map(|x| masses.iter().map(|&(y, m)| m * lorentzian_cell(x - y, h, lorentz_hwhm)).sum())
            .collect()
    };

    let total = trapezoid(&density, h);
    density.iter_mut().for_each(|d| *d /= total);
    Ok(LineProfile { grid: *grid, density })
}
