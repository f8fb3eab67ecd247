//! Interaction-picture sideband amplitudes and the resonances they predict.
//!
//! With the longitudinal modulation removed exactly, the microwave coupling
//! splits into sidebands `A_n e^{∓i(nω_RF − δ)t}` with
//! `A_n = (Ω_MW/2) J_n(2Ω_RF/ω_RF)`. Near `δ = nω_RF` only sideband `n`
//! survives the secular approximation and the population nutates at
//! `2|A_n| = Ω_MW |J_n(2Ω_RF/ω_RF)|`. [`SidebandSet`] stores `A_n`;
//! [`ResonanceLine`] stores the nutation frequency.

use crate::analytic::bessel::{bessel_j_orders, bessel_zeros, MAX_ORDER};
use crate::error::{Error, Result};
use crate::model::RwaModel;

#[derive(Debug, Clone, PartialEq)]
pub struct SidebandSet {
    /// Modulation index `2Ω_RF/ω_RF`.
    pub argument: f64,
    pub rabi_mw: f64,
    /// Orders run over `-truncation..=truncation`.
    pub truncation: u32,
    amplitudes: Vec<f64>,
    /// `truncation < ceil(argument) + 20`; completeness is not guaranteed.
    pub undertruncated: bool,
}

impl SidebandSet {
    /// `A_n`, or `None` outside the stored range.
    pub fn amplitude(&self, n: i32) -> Option<f64> {
        let t = self.truncation as i32;
        (-t..=t).contains(&n).then(|| self.amplitudes[(n + t) as usize])
    }

    /// `(n, A_n)` in increasing `n`.
    pub fn iter(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        let t = self.truncation as i32;
        self.amplitudes.iter().enumerate().map(move |(i, &a)| (i as i32 - t, a))
    }

    /// `Σ_n J_n(x)²` over the stored orders; 1 when the truncation is enough.
    pub fn completeness(&self) -> f64 {
        if self.rabi_mw == 0.0 {
            return f64::NAN;
        }
        let scale = 2.0 / self.rabi_mw;
        self.amplitudes.iter().map(|a| (a * scale).powi(2)).sum()
    }
}

/// `A_n = (Ω_MW/2) J_n(2Ω_RF/ω_RF)` for `n` in `-truncation..=truncation`.
pub fn sideband_amplitudes(rwa: &RwaModel, truncation: u32) -> Result<SidebandSet> {
    if !(rwa.omega_rf > 0.0) {
        return Err(Error::Domain(
            "sideband expansion needs ω_RF > 0; use the quasistatic lineshape for ω_RF = 0".into(),
        ));
    }
    if truncation > MAX_ORDER {
        return Err(Error::Domain(format!("truncation {truncation} exceeds {MAX_ORDER}")));
    }
    let argument = 2.0 * rwa.mod_rf / rwa.omega_rf;
    let j = bessel_j_orders(truncation, argument)?;
    let half = 0.5 * rwa.rabi_mw;
    let t = truncation as usize;
    let amplitudes = (0..=2 * t)
        .map(|i| {
            let n = i as i64 - t as i64;
            let v = j[n.unsigned_abs() as usize];
            half * if n < 0 && n % 2 != 0 { -v } else { v }
        })
        .collect();
    Ok(SidebandSet {
        argument,
        rabi_mw: rwa.rabi_mw,
        truncation,
        amplitudes,
        undertruncated: (truncation as f64) < argument.ceil() + 20.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonanceLine {
    /// Number of RF photons `n`.
    pub order: i32,
    /// `δ = n ω_RF`, rad/µs.
    pub detuning: f64,
    /// Nutation frequency on resonance, `Ω_MW |J_n(2Ω_RF/ω_RF)|`, rad/µs.
    pub effective_rabi: f64,
}

/// Multiphoton lines `δ = nω_RF` inside `[lo, hi]` with `|n| <= max_order`.
pub fn multiphoton_lines(rwa: &RwaModel, delta_range: (f64, f64), max_order: u32) -> Result<Vec<ResonanceLine>> {
    if !(rwa.omega_rf > 0.0) {
        return Err(Error::Domain("multiphoton lines need ω_RF > 0".into()));
    }
    let (lo, hi) = delta_range;
    if !(lo <= hi) {
        return Err(Error::InvalidParameter(format!("empty detuning range [{lo}, {hi}]")));
    }
    let w = rwa.omega_rf;
    let cap = max_order.min(MAX_ORDER) as i64;
    let first = ((lo / w).ceil() as i64).max(-cap);
    let last = ((hi / w).floor() as i64).min(cap);
    if first > last {
        return Ok(Vec::new());
    }
    let top = first.unsigned_abs().max(last.unsigned_abs()) as u32;
    let j = bessel_j_orders(top, 2.0 * rwa.mod_rf / w)?;
    Ok((first..=last)
        .map(|n| ResonanceLine {
            order: n as i32,
            detuning: n as f64 * w,
            effective_rabi: rwa.rabi_mw * j[n.unsigned_abs() as usize].abs(),
        })
        .collect())
}

/// RF frequencies at which the `n`-photon line disappears:
/// `ω_RF = 2Ω_RF / j_{n,m}` for the first `k` zeros, largest first.
pub fn cdt_missing_resonances(n: i32, mod_rf: f64, k: usize) -> Result<Vec<f64>> {
    if !(mod_rf > 0.0 && mod_rf.is_finite()) {
        return Err(Error::Domain(format!("Ω_RF must be > 0, got {mod_rf}")));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("at least one zero must be requested".into()));
    }
    Ok(bessel_zeros(n, k)?.into_iter().map(|z| 2.0 * mod_rf / z).collect())
}

/// Order-of-magnitude electron-nuclear flip-flop rate `A Ω / ω` under a
/// longitudinal drive `Ω cos(ω t)` acting on a static transverse coupling `A`.
pub fn flipflop_rate(hyperfine_a: f64, drive_amp: f64, drive_freq: f64) -> Result<f64> {
    if !(drive_freq > 0.0) {
        return Err(Error::Domain(format!("drive frequency must be > 0, got {drive_freq}")));
    }
    Ok(hyperfine_a * drive_amp / drive_freq)
}
