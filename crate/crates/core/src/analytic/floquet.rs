//! Floquet quasienergies of the rotating-frame Hamiltonian.
//!
//! For `H(t) = H_0 + V cos(ω_RF t + φ)` with
//! `H_0 = (δ/2)σ_z + (Ω_MW/2)σ_x` and `V = Ω_RF σ_z`, the Floquet matrix on
//! the basis `|spin⟩ ⊗ |m⟩`, `m = -N..N`, has blocks
//!
//! ```text
//! (m, m)     : H_0 + m ω_RF · 1
//! (m, m ± 1) : (Ω_RF / 2) e^{∓iφ} σ_z
//! ```
//!
//! i.e. the cosine splits into its two `e^{±iω_RF t}` components of weight
//! `Ω_RF/2` each, which shift the photon index by one. Quasienergies do not
//! depend on `φ` (a time translation), so the matrix is built with `φ = 0`
//! and is real symmetric.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::model::RwaModel;

#[derive(Debug, Clone, PartialEq)]
pub struct FloquetSpectrum {
    /// The two central-band quasienergies folded into `[-ω_RF/2, ω_RF/2)`,
    /// ascending. rad/µs.
    pub quasienergies: [f64; 2],
    pub omega_rf: f64,
    pub truncation: usize,
    /// `truncation < ceil(2Ω_RF/ω_RF) + 10`.
    pub undertruncated: bool,
}

impl FloquetSpectrum {
    /// Splitting between the two quasienergies measured on the circle of
    /// circumference `ω_RF`, so a gap straddling the zone edge is reported
    /// correctly.
    pub fn gap(&self) -> f64 {
        let d = (self.quasienergies[1] - self.quasienergies[0]).abs();
        d.min(self.omega_rf - d)
    }
}

/// Fold into `[-ω/2, ω/2)`.
pub fn fold(e: f64, omega: f64) -> f64 {
    (e + 0.5 * omega).rem_euclid(omega) - 0.5 * omega
}

pub fn floquet_quasienergies(rwa: &RwaModel, truncation: usize) -> Result<FloquetSpectrum> {
    if !(rwa.omega_rf > 0.0) {
        return Err(Error::Domain("Floquet analysis needs ω_RF > 0".into()));
    }
    let w = rwa.omega_rf;
    let blocks = 2 * truncation + 1;
    let dim = 2 * blocks;
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    let half_mod = 0.5 * rwa.mod_rf;
    for b in 0..blocks {
        let m = b as f64 - truncation as f64;
        let i = 2 * b;
        h[(i, i)] = 0.5 * rwa.detuning + m * w;
        h[(i + 1, i + 1)] = -0.5 * rwa.detuning + m * w;
        h[(i, i + 1)] = 0.5 * rwa.rabi_mw;
        h[(i + 1, i)] = 0.5 * rwa.rabi_mw;
        if b + 1 < blocks {
            let j = i + 2;
            h[(i, j)] = half_mod;
            h[(j, i)] = half_mod;
            h[(i + 1, j + 1)] = -half_mod;
            h[(j + 1, i + 1)] = -half_mod;
        }
    }

    let norm = h.amax();
    let eig = SymmetricEigen::try_new(h, 1e-15 * norm.max(1.0), 10_000 * dim).ok_or_else(|| {
        Error::Eigensolver(format!(
            "no convergence for {dim}x{dim} Floquet matrix (max |entry| {norm:.3e}, ω_RF {w:.3e})"
        ))
    })?;

    // Each physical quasienergy repeats in copies shifted by ω_RF. The copy
    // with most weight in the m = 0 block is the best converged; the second
    // branch is the best-centered eigenvector whose t = 0 spinor is
    // orthogonal to the first one's (copies of one branch share a spinor).
    let centre = 2 * truncation;
    let spinor = |k: usize| -> [f64; 2] {
        let v = eig.eigenvectors.column(k);
        let mut s = [0.0; 2];
        for b in 0..blocks {
            s[0] += v[2 * b];
            s[1] += v[2 * b + 1];
        }
        s
    };
    let central_weight = |k: usize| {
        let v = eig.eigenvectors.column(k);
        v[centre] * v[centre] + v[centre + 1] * v[centre + 1]
    };
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| central_weight(b).total_cmp(&central_weight(a)));

    let first = order[0];
    let s1 = spinor(first);
    let n1 = s1[0] * s1[0] + s1[1] * s1[1];
    let second = order[1..]
        .iter()
        .copied()
        .find(|&k| {
            let s2 = spinor(k);
            let n2 = s2[0] * s2[0] + s2[1] * s2[1];
            let overlap = s1[0] * s2[0] + s1[1] * s2[1];
            overlap * overlap < 0.5 * n1 * n2
        })
        .ok_or_else(|| Error::Eigensolver("could not isolate a second quasienergy branch".into()))?;

    let mut q = [fold(eig.eigenvalues[first], w), fold(eig.eigenvalues[second], w)];
    q.sort_by(f64::total_cmp);
    let needed = (2.0 * rwa.mod_rf / w).ceil() + 10.0;
    Ok(FloquetSpectrum { quasienergies: q, omega_rf: w, truncation, undertruncated: (truncation as f64) < needed })
}
