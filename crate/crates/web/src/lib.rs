//! Browser bindings for three interactive views: the quasistatic lineshape,
//! the coherent-destruction-of-tunneling curve with its zeros, and a
//! phase-averaged sideband spectrum row. All arguments are in MHz and µs.

use wasm_bindgen::prelude::*;

use spinres::analytic::{bessel_j, cdt_missing_resonances, quasistatic_lineshape, DetuningGrid};
use spinres::dynamics::SimConfig;
use spinres::sweep::{compute_spectrum, GridSpec, UniformAxis};
use spinres::units::{angular_to_mhz, mhz_to_angular as mhz};

/// Demo step: coarser than the library default to stay interactive.
pub const DEMO_DT_US: f64 = 1e-3;

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Lineshape density (per MHz) on `points` detunings spanning ±`half_width_mhz`.
pub fn lineshape_curve(mod_rf_mhz: f64, hwhm_mhz: f64, half_width_mhz: f64, points: usize) -> spinres::Result<Vec<f64>> {
    let grid = DetuningGrid::centered(0.0, mhz(half_width_mhz), points)?;
    let profile = quasistatic_lineshape(0.0, mhz(mod_rf_mhz), mhz(hwhm_mhz), &grid)?;
    Ok(profile.density.iter().map(|p| p * mhz(1.0)).collect())
}

/// Effective Rabi frequency Ω_MW·|J_n(2Ω_RF/ω_RF)| in MHz for ω_RF on a grid.
pub fn effective_rabi_curve(
    order: i32,
    rabi_mw_mhz: f64,
    mod_rf_mhz: f64,
    rf_min_mhz: f64,
    rf_max_mhz: f64,
    points: usize,
) -> spinres::Result<Vec<f64>> {
    linspace(rf_min_mhz, rf_max_mhz, points)
        .into_iter()
        .map(|w| bessel_j(order, 2.0 * mod_rf_mhz / w).map(|j| rabi_mw_mhz * j.abs()))
        .collect()
}

/// RF frequencies (MHz) where the order-`order` sideband vanishes.
pub fn cdt_frequencies(order: i32, mod_rf_mhz: f64, count: usize) -> spinres::Result<Vec<f64>> {
    Ok(cdt_missing_resonances(order, mhz(mod_rf_mhz), count)?
        .into_iter()
        .map(angular_to_mhz)
        .collect())
}

/// Phase-averaged, time-averaged m_s = 0 population versus detuning for one
/// RF frequency (rotating frame).
#[allow(clippy::too_many_arguments)]
pub fn spectrum_row_values(
    rf_freq_mhz: f64,
    rabi_mw_mhz: f64,
    mod_rf_mhz: f64,
    delta_min_mhz: f64,
    delta_max_mhz: f64,
    points: usize,
    t_total_us: f64,
    phases: usize,
) -> spinres::Result<Vec<f64>> {
    let spec = GridSpec {
        rf_axis: UniformAxis::single(mhz(rf_freq_mhz))?,
        mw_axis: UniformAxis::new(mhz(delta_min_mhz), mhz(delta_max_mhz), points)?,
        phases,
        rabi_mw: mhz(rabi_mw_mhz),
        mod_rf: mhz(mod_rf_mhz),
        sim: SimConfig { dt: DEMO_DT_US, t_total: t_total_us, ..SimConfig::default() },
        ..GridSpec::desk_default()
    };
    Ok(compute_spectrum(&spec)?.signal)
}

fn js(e: spinres::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub fn lineshape(mod_rf_mhz: f64, hwhm_mhz: f64, half_width_mhz: f64, points: usize) -> Result<Vec<f64>, JsError> {
    lineshape_curve(mod_rf_mhz, hwhm_mhz, half_width_mhz, points).map_err(js)
}

#[wasm_bindgen]
pub fn effective_rabi(
    order: i32,
    rabi_mw_mhz: f64,
    mod_rf_mhz: f64,
    rf_min_mhz: f64,
    rf_max_mhz: f64,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    effective_rabi_curve(order, rabi_mw_mhz, mod_rf_mhz, rf_min_mhz, rf_max_mhz, points).map_err(js)
}

#[wasm_bindgen]
pub fn cdt_zeros(order: i32, mod_rf_mhz: f64, count: usize) -> Result<Vec<f64>, JsError> {
    cdt_frequencies(order, mod_rf_mhz, count).map_err(js)
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn spectrum_row(
    rf_freq_mhz: f64,
    rabi_mw_mhz: f64,
    mod_rf_mhz: f64,
    delta_min_mhz: f64,
    delta_max_mhz: f64,
    points: usize,
    t_total_us: f64,
    phases: usize,
) -> Result<Vec<f64>, JsError> {
    spectrum_row_values(rf_freq_mhz, rabi_mw_mhz, mod_rf_mhz, delta_min_mhz, delta_max_mhz, points, t_total_us, phases)
        .map_err(js)
}
