//! Dominant nutation frequency of a population trace by spectral-peak
//! estimation with a least-squares sinusoid refinement.

use std::f64::consts::{PI, TAU};

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};

/// Zero-padding factor applied before the FFT.
const PAD_FACTOR: usize = 8;

/// Angular frequency (rad/µs) of the strongest oscillation in the recorded
/// `m_s = 0` population.
///
/// The mean is removed, a Hann window applied, the trace zero-padded and
/// transformed, and the peak bin refined by a quadratic through its
/// neighbours. Only the uniformly spaced leading part of the samples is used
/// (a final sample off the record stride is ignored).
pub fn fit_nutation_frequency(traj: &Trajectory) -> Result<f64> {
    let samples = &traj.samples;
    if samples.len() < 8 {
        return Err(Error::NoOscillation(format!("only {} samples", samples.len())));
    }
    let spacing = samples[1].t - samples[0].t;
    let uniform = samples
        .windows(2)
        .take_while(|w| ((w[1].t - w[0].t) - spacing).abs() <= 1e-6 * spacing)
        .count()
        + 1;
    let values: Vec<f64> = samples[..uniform].iter().map(|s| s.p0).collect();
    let n = values.len();

    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    if var.sqrt() < 1e-9 {
        return Err(Error::NoOscillation("trace is flat".into()));
    }

    let len = (n * PAD_FACTOR).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let w = 0.5 - 0.5 * (TAU * i as f64 / (n - 1) as f64).cos();
            Complex::new((v - mean) * w, 0.0)
        })
        .collect();
    buf.resize(len, Complex::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let mag: Vec<f64> = buf[..len / 2].iter().map(|c| c.norm()).collect();

    // Hann main lobe of the (removed) DC term; a component needs to sit
    // clear of it to be called an oscillation.
    let lobe = 3 * len / (2 * n);
    let (peak, peak_mag) = mag
        .iter()
        .enumerate()
        .skip(1)
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, m)| (i, *m))
        .unwrap();
    let floor = mag[1..=lobe.min(mag.len() - 1)].iter().cloned().fold(0.0, f64::max);
    if peak <= lobe || peak + 1 >= mag.len() || peak_mag <= floor {
        return Err(Error::NoOscillation(format!(
            "strongest component at bin {peak} lies inside the DC leakage lobe ({lobe} bins)"
        )));
    }

    let (a, b, c) = (mag[peak - 1], mag[peak], mag[peak + 1]);
    let denom = a - 2.0 * b + c;
    let offset = if denom != 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
    let coarse = TAU * (peak as f64 + offset) / (len as f64 * spacing);

    // With only a few periods the window lobes of the positive and negative
    // frequency images overlap and bias the peak. Refine by maximizing the
    // least-squares sinusoid fit (offset + cos + sin) within one resolution
    // bin of the coarse estimate.
    let duration = spacing * (n - 1) as f64;
    let times: Vec<f64> = (0..n).map(|i| i as f64 * spacing).collect();
    let bin = TAU / duration;
    let score = |w: f64| sinusoid_fit_power(&times, &values, w);
    let (mut lo, mut hi) = ((coarse - bin).max(0.5 * bin), coarse + bin);
    let scan = 40;
    let best = (0..=scan)
        .map(|k| lo + (hi - lo) * k as f64 / scan as f64)
        .max_by(|x, y| score(*x).total_cmp(&score(*y)))
        .unwrap();
    let h = (hi - lo) / scan as f64;
    lo = (best - h).max(lo);
    hi = (best + h).min(hi);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut x1, mut x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
    let (mut f1, mut f2) = (score(x1), score(x2));
    for _ in 0..60 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = score(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = score(x1);
        }
    }
    let omega = 0.5 * (lo + hi);

    if omega * duration < 1.98 * TAU {
        return Err(Error::NoOscillation(format!(
            "peak at {omega:.4} rad/µs gives fewer than two periods in {duration} µs"
        )));
    }
    debug_assert!(omega < PI / spacing);
    Ok(omega)
}

/// Variance explained by the best fit `c + a cos(ωt) + b sin(ωt)`.
fn sinusoid_fit_power(t: &[f64], y: &[f64], omega: f64) -> f64 {
    let mut m = [[0.0; 3]; 3];
    let mut r = [0.0; 3];
    for (&ti, &yi) in t.iter().zip(y) {
        let (s, c) = (omega * ti).sin_cos();
        let basis = [1.0, c, s];
        for i in 0..3 {
            r[i] += basis[i] * yi;
            for j in 0..3 {
                m[i][j] += basis[i] * basis[j];
            }
        }
    }
    let Some(coef) = solve3(m, r) else { return 0.0 };
    coef[0] * r[0] + coef[1] * r[1] + coef[2] * r[2] - r[0] * r[0] / m[0][0]
}

fn solve3(mut m: [[f64; 3]; 3], mut r: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        r.swap(col, piv);
        let pivot_row = m[col];
        for row in col + 1..3 {
            let f = m[row][col] / pivot_row[col];
            for (a, p) in m[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *a -= f * p;
            }
            r[row] -= f * r[col];
        }
    }
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        let s: f64 = (i + 1..3).map(|k| m[i][k] * x[k]).sum();
        x[i] = (r[i] - s) / m[i][i];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::TrajectorySample;
    use crate::units::mhz_to_angular as mhz;

    fn synthetic(f: impl Fn(f64) -> f64, t_total: f64, dt: f64) -> Trajectory {
        let n = (t_total / dt).round() as usize;
        Trajectory::from_samples(
            (0..=n).map(|i| {
                let t = i as f64 * dt;
                TrajectorySample { t, p0: f(t), bloch: None }
            }).collect(),
        )
        .unwrap()
    }

    #[test]
    fn recovers_rabi_frequency() {
        let omega = mhz(0.5);
        for t_total in [4.0, 4.3, 10.0, 37.0] {
            let tr = synthetic(|t| (0.5 * omega * t).cos().powi(2), t_total, 0.01);
            let got = fit_nutation_frequency(&tr).unwrap();
            assert!((got / omega - 1.0).abs() < 0.01, "T = {t_total}: {got} vs {omega}");
        }
    }

    #[test]
    fn flat_trace_is_rejected() {
        let tr = synthetic(|_| 1.0, 10.0, 0.01);
        assert!(matches!(fit_nutation_frequency(&tr), Err(Error::NoOscillation(_))));
    }

    #[test]
    fn slow_drift_is_rejected() {
        let tr = synthetic(|t| 1.0 - 0.01 * t, 10.0, 0.01);
        assert!(matches!(fit_nutation_frequency(&tr), Err(Error::NoOscillation(_))));
    }
}
