//! Physical model types and Hamiltonian construction.
//!
//! The lab-frame Hamiltonian of a pseudo-spin-1/2 driven by a set of
//! oscillating fields is
//!
//! ```text
//! H(t) = (Δ/2) σ_z + Σ_i σ·B_i cos(ω_i t + φ_i)
//! ```
//!
//! Transverse amplitude components equal the resonant Rabi angular frequency;
//! longitudinal components enter unhalved, so a z-drive of amplitude `Ω`
//! modulates the splitting by `2Ω cos(ω t + φ)`.
//!
//! In the frame rotating at the microwave carrier (MW phase removed by the
//! choice of axes) this reduces to
//!
//! ```text
//! H(t) = (δ/2) σ_z + (Ω_MW/2) σ_x + Ω_RF cos(ω_RF t + φ) σ_z,   δ = Δ − ω_MW.
//! ```

use std::f64::consts::TAU;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A 2×2 Hermitian matrix stored as its two real diagonal entries and the
/// upper off-diagonal element `H[0][1] = off_re + i off_im`. The lower
/// element is always the conjugate, so Hermiticity holds by construction.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HermitianOp2 {
    pub h00: f64,
    pub h11: f64,
    pub off_re: f64,
    pub off_im: f64,
}

impl HermitianOp2 {
    pub const ZERO: Self = Self { h00: 0.0, h11: 0.0, off_re: 0.0, off_im: 0.0 };

    pub fn diagonal(h00: f64, h11: f64) -> Self {
        Self { h00, h11, off_re: 0.0, off_im: 0.0 }
    }

    /// `x σ_x + y σ_y + z σ_z`.
    pub fn from_pauli(x: f64, y: f64, z: f64) -> Self {
        Self { h00: z, h11: -z, off_re: x, off_im: -y }
    }

    /// Matrix element `H[i][j]`.
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        match (i, j) {
            (0, 0) => Complex64::new(self.h00, 0.0),
            (1, 1) => Complex64::new(self.h11, 0.0),
            (0, 1) => Complex64::new(self.off_re, self.off_im),
            (1, 0) => Complex64::new(self.off_re, -self.off_im),
            _ => panic!("index ({i}, {j}) out of range for a 2x2 operator"),
        }
    }

    pub fn to_matrix(&self) -> [[Complex64; 2]; 2] {
        [[self.entry(0, 0), self.entry(0, 1)], [self.entry(1, 0), self.entry(1, 1)]]
    }

    /// Pauli-basis coefficients `(trace/2, x, y, z)`.
    pub fn pauli_components(&self) -> (f64, f64, f64, f64) {
        (
            0.5 * (self.h00 + self.h11),
            self.off_re,
            -self.off_im,
            0.5 * (self.h00 - self.h11),
        )
    }

    #[inline(always)]
    pub fn apply(&self, psi: [Complex64; 2]) -> [Complex64; 2] {
        let off = Complex64::new(self.off_re, self.off_im);
        [
            psi[0] * self.h00 + off * psi[1],
            off.conj() * psi[0] + psi[1] * self.h11,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.h00.is_finite() && self.h11.is_finite() && self.off_re.is_finite() && self.off_im.is_finite()
    }
}

impl Add for HermitianOp2 {
    type Output = Self;
    #[inline(always)]
    fn add(self, o: Self) -> Self {
        Self {
            h00: self.h00 + o.h00,
            h11: self.h11 + o.h11,
            off_re: self.off_re + o.off_re,
            off_im: self.off_im + o.off_im,
        }
    }
}

impl Sub for HermitianOp2 {
    type Output = Self;
    #[inline(always)]
    fn sub(self, o: Self) -> Self {
        Self {
            h00: self.h00 - o.h00,
            h11: self.h11 - o.h11,
            off_re: self.off_re - o.off_re,
            off_im: self.off_im - o.off_im,
        }
    }
}

impl Mul<f64> for HermitianOp2 {
    type Output = Self;
    #[inline(always)]
    fn mul(self, s: f64) -> Self {
        Self { h00: self.h00 * s, h11: self.h11 * s, off_re: self.off_re * s, off_im: self.off_im * s }
    }
}

/// One oscillatory drive: `σ·amplitude cos(carrier t + phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveField {
    /// (x, y, z) components in rad/µs, z along the quantization axis.
    pub amplitude: [f64; 3],
    /// Carrier angular frequency, rad/µs.
    pub carrier: f64,
    /// Phase in [0, 2π).
    pub phase: f64,
}

impl DriveField {
    pub fn new(amplitude: [f64; 3], carrier: f64, phase: f64) -> Result<Self> {
        if amplitude.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidParameter("drive amplitude must be finite".into()));
        }
        if !(carrier.is_finite() && carrier >= 0.0) {
            return Err(Error::InvalidParameter(format!("drive carrier must be finite and >= 0, got {carrier}")));
        }
        if !phase.is_finite() {
            return Err(Error::InvalidParameter("drive phase must be finite".into()));
        }
        Ok(Self { amplitude, carrier, phase: phase.rem_euclid(TAU) })
    }

    /// `σ·amplitude`.
    pub fn coupling(&self) -> HermitianOp2 {
        let [x, y, z] = self.amplitude;
        HermitianOp2::from_pauli(x, y, z)
    }

    pub fn transverse_magnitude(&self) -> f64 {
        self.amplitude[0].hypot(self.amplitude[1])
    }

    pub fn is_zero(&self) -> bool {
        self.amplitude.iter().all(|&a| a == 0.0)
    }
}

/// Lab-frame model: static splitting plus an ordered list of drives.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoLevelModel {
    /// Bare splitting Δ, rad/µs.
    pub delta_static: f64,
    pub drives: Vec<DriveField>,
}

impl TwoLevelModel {
    pub fn new(delta_static: f64, drives: Vec<DriveField>) -> Result<Self> {
        if !delta_static.is_finite() {
            return Err(Error::InvalidParameter("static splitting must be finite".into()));
        }
        Ok(Self { delta_static, drives })
    }

    /// Lab-frame `H(t)`.
    pub fn hamiltonian_at(&self, t: f64) -> HermitianOp2 {
        build_lab_hamiltonian(self, t)
    }

    pub fn driven_hamiltonian(&self) -> DrivenHamiltonian {
        DrivenHamiltonian {
            static_part: HermitianOp2::from_pauli(0.0, 0.0, 0.5 * self.delta_static),
            terms: self
                .drives
                .iter()
                .filter(|d| !d.is_zero())
                .map(|d| PeriodicTerm { op: d.coupling(), carrier: d.carrier, phase: d.phase })
                .collect(),
        }
    }
}

/// `H(t) = (Δ/2)σ_z + Σ σ·B_i cos(ω_i t + φ_i)`.
pub fn build_lab_hamiltonian(model: &TwoLevelModel, t: f64) -> HermitianOp2 {
    model.drives.iter().fold(
        HermitianOp2::from_pauli(0.0, 0.0, 0.5 * model.delta_static),
        |acc, d| {
            if d.is_zero() {
                acc
            } else {
                acc + d.coupling() * (d.carrier * t + d.phase).cos()
            }
        },
    )
}

/// Parameters of the microwave-rotating-frame Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RwaModel {
    /// δ = Δ − ω_MW, rad/µs.
    pub detuning: f64,
    /// Transverse microwave Rabi amplitude Ω_MW, rad/µs.
    pub rabi_mw: f64,
    /// Longitudinal RF amplitude Ω_RF, rad/µs.
    pub mod_rf: f64,
    /// RF carrier ω_RF, rad/µs.
    pub omega_rf: f64,
    /// RF phase φ, radians.
    pub phase_rf: f64,
}

impl RwaModel {
    pub fn new(detuning: f64, rabi_mw: f64, mod_rf: f64, omega_rf: f64, phase_rf: f64) -> Result<Self> {
        for (name, v) in [("detuning", detuning), ("phase_rf", phase_rf)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite")));
            }
        }
        for (name, v) in [("rabi_mw", rabi_mw), ("mod_rf", mod_rf), ("omega_rf", omega_rf)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(Self { detuning, rabi_mw, mod_rf, omega_rf, phase_rf })
    }

    pub fn with_detuning(self, detuning: f64) -> Self {
        Self { detuning, ..self }
    }

    pub fn with_phase(self, phase_rf: f64) -> Self {
        Self { phase_rf, ..self }
    }

    pub fn hamiltonian_at(&self, t: f64) -> HermitianOp2 {
        build_rwa_hamiltonian(self, t)
    }

    /// Instantaneous splitting `δ + 2Ω_RF cos(ω_RF t + φ)`.
    pub fn splitting_at(&self, t: f64) -> f64 {
        self.detuning + 2.0 * self.mod_rf * (self.omega_rf * t + self.phase_rf).cos()
    }

    pub fn driven_hamiltonian(&self) -> DrivenHamiltonian {
        let mut terms = Vec::new();
        if self.mod_rf != 0.0 {
            terms.push(PeriodicTerm {
                op: HermitianOp2::from_pauli(0.0, 0.0, self.mod_rf),
                carrier: self.omega_rf,
                phase: self.phase_rf,
            });
        }
        DrivenHamiltonian {
            static_part: HermitianOp2::from_pauli(0.5 * self.rabi_mw, 0.0, 0.5 * self.detuning),
            terms,
        }
    }
}

/// `(δ/2)σ_z + (Ω_MW/2)σ_x + Ω_RF cos(ω_RF t + φ)σ_z`.
pub fn build_rwa_hamiltonian(m: &RwaModel, t: f64) -> HermitianOp2 {
    let z = 0.5 * m.detuning + m.mod_rf * (m.omega_rf * t + m.phase_rf).cos();
    HermitianOp2::from_pauli(0.5 * m.rabi_mw, 0.0, z)
}

/// Something reported by [`reduce_to_rwa`] that the reduced model does not
/// capture.
#[derive(Debug, Clone, PartialEq)]
pub enum RwaDiagnostic {
    /// The MW drive's longitudinal component was dropped.
    DroppedLongitudinalMw { amplitude: f64 },
    /// The RF drive's transverse component was dropped.
    DroppedTransverseRf { amplitude: f64 },
    /// No drive other than the MW drive; the reduced model has no RF.
    NoRfDrive,
    /// The MW drive has no transverse component, so no spin flips are driven.
    NoTransverseMw,
    /// `ω_MW ≫ Ω_RF ~ ω_RF > Ω_MW` does not hold. `correction` is
    /// `(Ω_MW/ω_MW)²`, the order of the neglected counter-rotating terms.
    HierarchyViolated { reason: String, correction: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RwaReduction {
    pub model: RwaModel,
    pub diagnostics: Vec<RwaDiagnostic>,
}

/// Reduce a lab-frame model with one MW drive (at `mw_index`) and at most one
/// other (RF) drive to the rotating-frame parameters.
pub fn reduce_to_rwa(model: &TwoLevelModel, mw_index: usize) -> Result<RwaReduction> {
    let mw = model
        .drives
        .get(mw_index)
        .ok_or(Error::NoSuchDrive { index: mw_index, len: model.drives.len() })?;
    let others: Vec<&DriveField> =
        model.drives.iter().enumerate().filter(|&(i, _)| i != mw_index).map(|(_, d)| d).collect();
    if others.len() > 1 {
        return Err(Error::InvalidParameter(format!(
            "rotating-frame reduction takes one MW and at most one RF drive, found {} other drives",
            others.len()
        )));
    }

    let mut diagnostics = Vec::new();
    let rabi_mw = mw.transverse_magnitude();
    if rabi_mw == 0.0 {
        diagnostics.push(RwaDiagnostic::NoTransverseMw);
    }
    if mw.amplitude[2] != 0.0 {
        diagnostics.push(RwaDiagnostic::DroppedLongitudinalMw { amplitude: mw.amplitude[2].abs() });
    }

    let (mod_rf, omega_rf, phase_rf) = match others.first() {
        Some(rf) => {
            let transverse = rf.transverse_magnitude();
            if transverse != 0.0 {
                diagnostics.push(RwaDiagnostic::DroppedTransverseRf { amplitude: transverse });
            }
            // A negative z amplitude is a phase shift by π.
            let (amp, phase) = if rf.amplitude[2] < 0.0 {
                (-rf.amplitude[2], (rf.phase + std::f64::consts::PI).rem_euclid(TAU))
            } else {
                (rf.amplitude[2], rf.phase)
            };
            (amp, rf.carrier, phase)
        }
        None => {
            diagnostics.push(RwaDiagnostic::NoRfDrive);
            (0.0, 0.0, 0.0)
        }
    };

    let omega_mw = mw.carrier;
    let correction = if omega_mw > 0.0 { (rabi_mw / omega_mw).powi(2) } else { f64::INFINITY };
    let fast = mod_rf.max(omega_rf).max(rabi_mw);
    let mut reasons = Vec::new();
    if omega_mw < 10.0 * fast {
        reasons.push("MW carrier is not much larger than the other rates".to_string());
    }
    if correction > 1e-3 {
        reasons.push(format!("(Ω_MW/ω_MW)² = {correction:.3e}"));
    }
    if !reasons.is_empty() {
        diagnostics.push(RwaDiagnostic::HierarchyViolated { reason: reasons.join("; "), correction });
    }

    let reduced = RwaModel::new(model.delta_static - omega_mw, rabi_mw, mod_rf, omega_rf, phase_rf)?;
    Ok(RwaReduction { model: reduced, diagnostics })
}

/// `H(t) = H_static + Σ_k V_k cos(ω_k t + φ_k)`.
///
/// Both the lab-frame and rotating-frame Hamiltonians have this form. The
/// integrator works in the frame co-rotating with the diagonal of
/// `H_static`, which is an exact change of picture that leaves the
/// populations untouched.
#[derive(Debug, Clone, PartialEq)]
pub struct DrivenHamiltonian {
    pub static_part: HermitianOp2,
    pub terms: Vec<PeriodicTerm>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicTerm {
    pub op: HermitianOp2,
    pub carrier: f64,
    pub phase: f64,
}

/// A time-dependent 2×2 Hamiltonian source for the integrators.
pub trait Hamiltonian {
    type Sampler<'a>: HamiltonianSampler
    where
        Self: 'a;

    /// `H(t)` in the lab (or caller's) frame.
    fn at(&self, t: f64) -> HermitianOp2;

    /// Diagonal `(a, d)` of the frame `exp(-i diag(a, d) t)` in which
    /// [`Hamiltonian::sampler`] reports the Hamiltonian.
    fn frame(&self) -> (f64, f64) {
        (0.0, 0.0)
    }

    /// Sampler yielding the integration-frame Hamiltonian at `t_k = k·spacing`
    /// for `k = 0, 1, 2, ...`.
    fn sampler(&self, spacing: f64) -> Self::Sampler<'_>;
}

pub trait HamiltonianSampler {
    fn next_sample(&mut self) -> HermitianOp2;
}

/// Adapts a closure `t -> H(t)` to [`Hamiltonian`].
pub struct FnHamiltonian<F>(pub F);

pub struct FnSampler<'a, F> {
    f: &'a F,
    spacing: f64,
    k: u64,
}

impl<F: Fn(f64) -> HermitianOp2> Hamiltonian for FnHamiltonian<F> {
    type Sampler<'a>
        = FnSampler<'a, F>
    where
        F: 'a;

    fn at(&self, t: f64) -> HermitianOp2 {
        (self.0)(t)
    }

    fn sampler(&self, spacing: f64) -> FnSampler<'_, F> {
        FnSampler { f: &self.0, spacing, k: 0 }
    }
}

impl<F: Fn(f64) -> HermitianOp2> HamiltonianSampler for FnSampler<'_, F> {
    #[inline]
    fn next_sample(&mut self) -> HermitianOp2 {
        let h = (self.f)(self.k as f64 * self.spacing);
        self.k += 1;
        h
    }
}

/// Phasors are recomputed from scratch this often to stop round-off drift
/// of the running product.
const RESYNC_INTERVAL: u64 = 1024;

/// Running `exp(i(ω t_k + φ))` on a uniform time grid.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Phasor {
    omega: f64,
    phase: f64,
    value: Complex64,
    step: Complex64,
}

impl Phasor {
    pub(crate) fn new(omega: f64, phase: f64, spacing: f64) -> Self {
        Self {
            omega,
            phase,
            value: Complex64::from_polar(1.0, phase),
            step: Complex64::from_polar(1.0, omega * spacing),
        }
    }

    #[inline(always)]
    pub(crate) fn value(&self) -> Complex64 {
        self.value
    }

    /// Move to sample `k` (the next one).
    #[inline(always)]
    pub(crate) fn advance(&mut self, k: u64, spacing: f64) {
        if k.is_multiple_of(RESYNC_INTERVAL) {
            self.value = Complex64::from_polar(1.0, self.omega * (k as f64 * spacing) + self.phase);
        } else {
            self.value *= self.step;
        }
    }
}

pub struct DrivenSampler<'a> {
    h: &'a DrivenHamiltonian,
    spacing: f64,
    k: u64,
    drives: Vec<Phasor>,
    frame: Phasor,
    base: HermitianOp2,
}

impl Hamiltonian for DrivenHamiltonian {
    type Sampler<'a> = DrivenSampler<'a>;

    fn at(&self, t: f64) -> HermitianOp2 {
        self.terms
            .iter()
            .fold(self.static_part, |acc, term| acc + term.op * (term.carrier * t + term.phase).cos())
    }

    fn frame(&self) -> (f64, f64) {
        (self.static_part.h00, self.static_part.h11)
    }

    fn sampler(&self, spacing: f64) -> DrivenSampler<'_> {
        let (a, d) = self.frame();
        DrivenSampler {
            h: self,
            spacing,
            k: 0,
            drives: self.terms.iter().map(|t| Phasor::new(t.carrier, t.phase, spacing)).collect(),
            frame: Phasor::new(a - d, 0.0, spacing),
            base: self.static_part - HermitianOp2::diagonal(a, d),
        }
    }
}

impl HamiltonianSampler for DrivenSampler<'_> {
    #[inline(always)]
    fn next_sample(&mut self) -> HermitianOp2 {
        let mut h = self.base;
        for (term, p) in self.h.terms.iter().zip(self.drives.iter()) {
            h = h + term.op * p.value().re;
        }
        // Off-diagonal picks up exp(i(a − d)t) in the co-rotating frame.
        let off = Complex64::new(h.off_re, h.off_im) * self.frame.value();
        h.off_re = off.re;
        h.off_im = off.im;

        self.k += 1;
        for p in self.drives.iter_mut() {
            p.advance(self.k, self.spacing);
        }
        self.frame.advance(self.k, self.spacing);
        h
    }
}
