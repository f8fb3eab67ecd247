//! Fixed-step RK4 propagation of the pure state (Schrödinger equation, ħ = 1)
//! and of the Bloch vector with pure dephasing.
//!
//! Both integrators run in the frame co-rotating with the diagonal of the
//! Hamiltonian's static part (see [`Hamiltonian::frame`]). Populations are
//! identical in that frame; recorded states and Bloch vectors are rotated
//! back before they are stored. No renormalization is applied; the largest
//! norm deviation seen is reported in [`Trajectory::norm_drift`].

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{Hamiltonian, HamiltonianSampler, HermitianOp2, RwaModel};

/// Pure state `c0 |0⟩ + c1 |1⟩`, index 0 being `m_s = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinState {
    pub c0: Complex64,
    pub c1: Complex64,
}

impl SpinState {
    pub fn new(c0: Complex64, c1: Complex64) -> Result<Self> {
        let n = c0.norm_sqr() + c1.norm_sqr();
        if !((n - 1.0).abs() <= 1e-9) {
            return Err(Error::InvalidParameter(format!("state norm² is {n}, expected 1")));
        }
        Ok(Self { c0, c1 })
    }

    /// All population in `m_s = 0`.
    pub fn ms0() -> Self {
        Self { c0: Complex64::new(1.0, 0.0), c1: Complex64::new(0.0, 0.0) }
    }

    pub fn population0(&self) -> f64 {
        self.c0.norm_sqr()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c0.norm_sqr() + self.c1.norm_sqr()
    }

    /// `(⟨σ_x⟩, ⟨σ_y⟩, ⟨σ_z⟩)`.
    pub fn bloch_vector(&self) -> [f64; 3] {
        let cross = self.c0.conj() * self.c1;
        [2.0 * cross.re, 2.0 * cross.im, self.c0.norm_sqr() - self.c1.norm_sqr()]
    }
}

/// Bloch vector `(⟨σ_x⟩, ⟨σ_y⟩, ⟨σ_z⟩)`; population in index 0 is `(1 + r_z)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochState {
    pub r: [f64; 3],
}

impl BlochState {
    pub fn new(r: [f64; 3]) -> Result<Self> {
        let len = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        if !(len <= 1.0 + 1e-9) {
            return Err(Error::InvalidParameter(format!("Bloch vector length {len} exceeds 1")));
        }
        Ok(Self { r })
    }

    pub fn ms0() -> Self {
        Self { r: [0.0, 0.0, 1.0] }
    }

    pub fn population0(&self) -> f64 {
        0.5 * (1.0 + self.r[2])
    }

    pub fn length(&self) -> f64 {
        (self.r[0] * self.r[0] + self.r[1] * self.r[1] + self.r[2] * self.r[2]).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ObservableMode {
    /// Mean population in `m_s = 0` over the whole evolution.
    #[default]
    TimeAverage,
    /// Population in `m_s = 0` at the final time.
    Endpoint,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// Time step, µs.
    pub dt: f64,
    /// Total evolution time, µs.
    pub t_total: f64,
    /// Steps between recorded samples.
    pub record_stride: usize,
    pub observable_mode: ObservableMode,
    /// Pure-dephasing rate Γ₂, rad/µs.
    pub dephasing_rate: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 1e-4,
            t_total: 100.0,
            record_stride: 100,
            observable_mode: ObservableMode::TimeAverage,
            dephasing_rate: 0.0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidConfig(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.t_total.is_finite() && self.t_total >= self.dt) {
            return Err(Error::InvalidConfig(format!(
                "t_total must be >= dt, got t_total = {} with dt = {}",
                self.t_total, self.dt
            )));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidConfig("record_stride must be >= 1".into()));
        }
        if !(self.dephasing_rate.is_finite() && self.dephasing_rate >= 0.0) {
            return Err(Error::InvalidConfig(format!("dephasing rate must be >= 0, got {}", self.dephasing_rate)));
        }
        Ok(())
    }

    /// Number of RK4 steps; the final time is `n_steps · dt`.
    pub fn n_steps(&self) -> u64 {
        ((self.t_total / self.dt).round() as u64).max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub p0: f64,
    pub bloch: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    /// Time average over every integration step (trapezoidal), when the
    /// trajectory came from an integrator.
    pub step_average: Option<f64>,
    /// `max |‖ψ‖² − 1|` over all steps (0 for Bloch trajectories).
    pub norm_drift: f64,
}

impl Trajectory {
    /// Build from externally produced samples. Timestamps must increase
    /// strictly.
    pub fn from_samples(samples: Vec<TrajectorySample>) -> Result<Self> {
        if samples.windows(2).any(|w| !(w[1].t > w[0].t)) {
            return Err(Error::InvalidParameter("trajectory timestamps must be strictly increasing".into()));
        }
        Ok(Self { samples, step_average: None, norm_drift: 0.0 })
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.t)
    }

    pub fn populations(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.p0)
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }
}

/// Reduce a trajectory to a scalar in `[0, 1]`.
///
/// `TimeAverage` uses the all-step running average when present and the mean
/// of the recorded samples otherwise.
pub fn observable(traj: &Trajectory, mode: ObservableMode) -> Result<f64> {
    let last = traj.samples.last().ok_or(Error::EmptyTrajectory)?;
    Ok(match mode {
        ObservableMode::Endpoint => last.p0,
        ObservableMode::TimeAverage => match traj.step_average {
            Some(avg) => avg,
            None => traj.samples.iter().map(|s| s.p0).sum::<f64>() / traj.samples.len() as f64,
        },
    })
}

#[inline(always)]
fn minus_i_h(h: &HermitianOp2, psi: [Complex64; 2]) -> [Complex64; 2] {
    let [a, b] = h.apply(psi);
    [Complex64::new(a.im, -a.re), Complex64::new(b.im, -b.re)]
}

#[inline(always)]
fn axpy(psi: [Complex64; 2], s: f64, k: [Complex64; 2]) -> [Complex64; 2] {
    [psi[0] + k[0] * s, psi[1] + k[1] * s]
}

/// Core RK4 loop. Calls `visit(step, state)` for step 0 (initial state) and
/// after each of the `n_steps` steps, with the state in the integration frame.
#[inline(always)]
fn integrate_state<H, F>(h: &H, psi0: [Complex64; 2], dt: f64, n_steps: u64, mut visit: F)
where
    H: Hamiltonian + ?Sized,
    F: FnMut(u64, [Complex64; 2]),
{
    let mut sampler = h.sampler(0.5 * dt);
    let mut h_start = sampler.next_sample();
    let mut psi = psi0;
    visit(0, psi);
    for step in 1..=n_steps {
        let h_mid = sampler.next_sample();
        let h_end = sampler.next_sample();
        psi = rk4_step(psi, &h_start, &h_mid, &h_end, dt);
        h_start = h_end;
        visit(step, psi);
    }
}

#[inline(always)]
fn rk4_step(psi: [Complex64; 2], h0: &HermitianOp2, h_mid: &HermitianOp2, h1: &HermitianOp2, dt: f64) -> [Complex64; 2] {
    let k1 = minus_i_h(h0, psi);
    let k2 = minus_i_h(h_mid, axpy(psi, 0.5 * dt, k1));
    let k3 = minus_i_h(h_mid, axpy(psi, 0.5 * dt, k2));
    let k4 = minus_i_h(h1, axpy(psi, dt, k3));
    let w = dt / 6.0;
    [
        psi[0] + (k1[0] + (k2[0] + k3[0]) * 2.0 + k4[0]) * w,
        psi[1] + (k1[1] + (k2[1] + k3[1]) * 2.0 + k4[1]) * w,
    ]
}

/// Integration-frame state back to the caller's frame at time `t`.
fn state_to_lab(frame: (f64, f64), psi: [Complex64; 2], t: f64) -> SpinState {
    let (a, d) = frame;
    SpinState {
        c0: psi[0] * Complex64::from_polar(1.0, -a * t),
        c1: psi[1] * Complex64::from_polar(1.0, -d * t),
    }
}

/// Rotate the transverse part of an integration-frame Bloch vector back.
fn bloch_to_lab(frame: (f64, f64), r: [f64; 3], t: f64) -> [f64; 3] {
    let rot = Complex64::new(r[0], r[1]) * Complex64::from_polar(1.0, (frame.0 - frame.1) * t);
    [rot.re, rot.im, r[2]]
}

/// Propagate `i dψ/dt = H(t) ψ` with classical fixed-step RK4.
pub fn evolve_schrodinger<H>(hamiltonian: &H, psi0: SpinState, cfg: &SimConfig) -> Result<Trajectory>
where
    H: Hamiltonian + ?Sized,
{
    cfg.validate()?;
    if cfg.dephasing_rate != 0.0 {
        return Err(Error::DephasingNeedsBloch(cfg.dephasing_rate));
    }
    let n_steps = cfg.n_steps();
    let stride = cfg.record_stride as u64;
    let frame = hamiltonian.frame();
    let mut samples = Vec::with_capacity((n_steps / stride) as usize + 2);
    let mut acc = 0.0;
    let mut prev = psi0.population0();
    let mut drift: f64 = 0.0;

    integrate_state(hamiltonian, [psi0.c0, psi0.c1], cfg.dt, n_steps, |step, psi| {
        let p0 = psi[0].norm_sqr();
        let norm = p0 + psi[1].norm_sqr();
        drift = drift.max((norm - 1.0).abs());
        if step > 0 {
            acc += 0.5 * (prev + p0);
            prev = p0;
        }
        if step % stride == 0 || step == n_steps {
            let t = step as f64 * cfg.dt;
            let state = state_to_lab(frame, psi, t);
            samples.push(TrajectorySample { t, p0, bloch: Some(state.bloch_vector()) });
        }
    });

    Ok(Trajectory { samples, step_average: Some(acc / n_steps as f64), norm_drift: drift })
}

/// Same integration as [`evolve_schrodinger`], returning only the configured
/// observable. Nothing is recorded, which keeps sweeps allocation-free.
pub fn schrodinger_observable<H>(hamiltonian: &H, psi0: SpinState, cfg: &SimConfig) -> Result<f64>
where
    H: Hamiltonian + ?Sized,
{
    cfg.validate()?;
    if cfg.dephasing_rate != 0.0 {
        return Err(Error::DephasingNeedsBloch(cfg.dephasing_rate));
    }
    let n_steps = cfg.n_steps();
    let mut acc = 0.0;
    let mut prev = psi0.population0();
    let mut last = prev;
    integrate_state(hamiltonian, [psi0.c0, psi0.c1], cfg.dt, n_steps, |step, psi| {
        let p0 = psi[0].norm_sqr();
        if step > 0 {
            acc += 0.5 * (prev + p0);
            prev = p0;
        }
        last = p0;
    });
    Ok(match cfg.observable_mode {
        ObservableMode::TimeAverage => acc / n_steps as f64,
        ObservableMode::Endpoint => last,
    })
}

#[inline(always)]
fn bloch_rhs(h: &HermitianOp2, gamma: f64, r: [f64; 3]) -> [f64; 3] {
    // For H = x σ_x + y σ_y + z σ_z (+ c·1) the precession vector is 2(x, y, z).
    let wx = 2.0 * h.off_re;
    let wy = -2.0 * h.off_im;
    let wz = h.h00 - h.h11;
    [
        wy * r[2] - wz * r[1] - gamma * r[0],
        wz * r[0] - wx * r[2] - gamma * r[1],
        wx * r[1] - wy * r[0],
    ]
}

#[inline(always)]
fn add3(r: [f64; 3], s: f64, k: [f64; 3]) -> [f64; 3] {
    [r[0] + s * k[0], r[1] + s * k[1], r[2] + s * k[2]]
}

#[inline(always)]
fn integrate_bloch_vector<H, F>(h: &H, r0: [f64; 3], gamma: f64, dt: f64, n_steps: u64, mut visit: F)
where
    H: Hamiltonian + ?Sized,
    F: FnMut(u64, [f64; 3]),
{
    let mut sampler = h.sampler(0.5 * dt);
    let mut h_start = sampler.next_sample();
    let mut r = r0;
    visit(0, r);
    for step in 1..=n_steps {
        let h_mid = sampler.next_sample();
        let h_end = sampler.next_sample();
        let k1 = bloch_rhs(&h_start, gamma, r);
        let k2 = bloch_rhs(&h_mid, gamma, add3(r, 0.5 * dt, k1));
        let k3 = bloch_rhs(&h_mid, gamma, add3(r, 0.5 * dt, k2));
        let k4 = bloch_rhs(&h_end, gamma, add3(r, dt, k3));
        let w = dt / 6.0;
        for i in 0..3 {
            r[i] += w * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
        }
        h_start = h_end;
        visit(step, r);
    }
}

/// Bloch equations `dr/dt = Ω(t) × r − Γ₂ (r_x, r_y, 0)` for any
/// [`Hamiltonian`]; pure dephasing commutes with the co-rotating frame.
pub fn evolve_bloch_with<H>(hamiltonian: &H, r0: BlochState, cfg: &SimConfig) -> Result<Trajectory>
where
    H: Hamiltonian + ?Sized,
{
    cfg.validate()?;
    let n_steps = cfg.n_steps();
    let stride = cfg.record_stride as u64;
    let frame = hamiltonian.frame();
    let mut samples = Vec::with_capacity((n_steps / stride) as usize + 2);
    let mut acc = 0.0;
    let mut prev = r0.population0();
    // Start the integration-frame vector at t = 0, where both frames agree.
    integrate_bloch_vector(hamiltonian, r0.r, cfg.dephasing_rate, cfg.dt, n_steps, |step, r| {
        let p0 = 0.5 * (1.0 + r[2]);
        if step > 0 {
            acc += 0.5 * (prev + p0);
            prev = p0;
        }
        if step % stride == 0 || step == n_steps {
            let t = step as f64 * cfg.dt;
            samples.push(TrajectorySample { t, p0, bloch: Some(bloch_to_lab(frame, r, t)) });
        }
    });
    Ok(Trajectory { samples, step_average: Some(acc / n_steps as f64), norm_drift: 0.0 })
}

/// Bloch-equation evolution of the rotating-frame model, where
/// `Ω(t) = (Ω_MW, 0, δ + 2Ω_RF cos(ω_RF t + φ))`.
pub fn evolve_bloch(rwa: &RwaModel, r0: BlochState, cfg: &SimConfig) -> Result<Trajectory> {
    evolve_bloch_with(&rwa.driven_hamiltonian(), r0, cfg)
}

/// Observable-only variant of [`evolve_bloch_with`].
pub fn bloch_observable<H>(hamiltonian: &H, r0: BlochState, cfg: &SimConfig) -> Result<f64>
where
    H: Hamiltonian + ?Sized,
{
    cfg.validate()?;
    let n_steps = cfg.n_steps();
    let mut acc = 0.0;
    let mut prev = r0.population0();
    let mut last = prev;
    integrate_bloch_vector(hamiltonian, r0.r, cfg.dephasing_rate, cfg.dt, n_steps, |step, r| {
        let p0 = 0.5 * (1.0 + r[2]);
        if step > 0 {
            acc += 0.5 * (prev + p0);
            prev = p0;
        }
        last = p0;
    });
    Ok(match cfg.observable_mode {
        ObservableMode::TimeAverage => acc / n_steps as f64,
        ObservableMode::Endpoint => last,
    })
}

/// Dispatch on the dephasing rate: pure-state path when Γ₂ = 0, Bloch
/// equations otherwise. Starts in `m_s = 0`.
pub fn simulate_observable<H>(hamiltonian: &H, cfg: &SimConfig) -> Result<f64>
where
    H: Hamiltonian + ?Sized,
{
    if cfg.dephasing_rate == 0.0 {
        schrodinger_observable(hamiltonian, SpinState::ms0(), cfg)
    } else {
        bloch_observable(hamiltonian, BlochState::ms0(), cfg)
    }
}
