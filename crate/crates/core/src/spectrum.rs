//! Exact spectral oracle backed by dense Hermitian diagonalization.

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{hermitian_eigenvalues, Hamiltonian, KlhInstance, SpectralGapInstance};

/// Tolerance for comparing spectra computed along different routes.
pub const SPECTRAL_TOL: f64 = 1e-8;

/// Eigenvalues `λ₁ ≤ λ₂ ≤ … ≤ λ_N`, with multiplicity.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
}

impl Spectrum {
    /// Builds a spectrum from values in any order.
    pub fn new(mut eigenvalues: Vec<f64>) -> Self {
        eigenvalues.sort_by(f64::total_cmp);
        Self { eigenvalues }
    }

    pub fn values(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `λ_c`, 1-based.
    pub fn lambda(&self, c: usize) -> Result<f64> {
        if c == 0 || c > self.len() {
            return Err(Error::IndexOutOfRange {
                index: c,
                bound: self.len(),
            });
        }
        Ok(self.eigenvalues[c - 1])
    }

    pub fn ground_energy(&self) -> Result<f64> {
        self.lambda(1)
    }

    /// `λ₂ − λ₁`; zero for a degenerate ground space.
    pub fn gap(&self) -> Result<f64> {
        if self.len() < 2 {
            return Err(Error::Dimension);
        }
        Ok(self.eigenvalues[1] - self.eigenvalues[0])
    }

    /// Largest elementwise distance to another spectrum of the same length.
    pub fn max_deviation(&self, other: &Spectrum) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(self
            .eigenvalues
            .iter()
            .zip(&other.eigenvalues)
            .fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs())))
    }
}

/// Ground-truth classification of a promise-problem instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PromiseVerdict {
    Yes,
    No,
    /// The instance violates the promise: the quantity lies strictly between `a` and `b`.
    Invalid,
}

impl PromiseVerdict {
    /// `Yes` if `value ≤ a`, `No` if `value ≥ b`, `Invalid` otherwise. Exact comparisons.
    pub fn classify(value: f64, a: f64, b: f64) -> Self {
        if value <= a {
            PromiseVerdict::Yes
        } else if value >= b {
            PromiseVerdict::No
        } else {
            PromiseVerdict::Invalid
        }
    }
}

/// Full sorted spectrum of `h`. Cached on the Hamiltonian after the first call.
pub fn eigenvalues(h: &Hamiltonian) -> Result<Spectrum> {
    if let Some(s) = h.cached_spectrum() {
        return Ok(s.clone());
    }
    let dense = h.to_dense()?;
    let spectrum = Spectrum::new(hermitian_eigenvalues(dense));
    h.store_spectrum(spectrum.clone());
    Ok(spectrum)
}

pub fn spectral_gap(h: &Hamiltonian) -> Result<f64> {
    if h.n() == 0 {
        return Err(Error::Dimension);
    }
    eigenvalues(h)?.gap()
}

pub fn lambda_c(h: &Hamiltonian, c: usize) -> Result<f64> {
    if h.n() < usize::BITS as usize - 1 && (c == 0 || c > h.dim()) {
        return Err(Error::IndexOutOfRange {
            index: c,
            bound: h.dim(),
        });
    }
    eigenvalues(h)?.lambda(c)
}

/// Worst eigenpair residual `‖Hv − λv‖ / max(1, ‖H‖)` of a fresh diagonalization.
pub fn eigen_residual(h: &Hamiltonian) -> Result<f64> {
    let dense = h.to_dense()?;
    let eig = SymmetricEigen::new(dense.clone());
    let norm = eig
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    let mut worst = 0.0f64;
    for (idx, &lambda) in eig.eigenvalues.iter().enumerate() {
        let v = eig.eigenvectors.column(idx);
        let r = &dense * v - v * num_complex::Complex64::new(lambda, 0.0);
        worst = worst.max(r.norm());
    }
    Ok(worst / norm.max(1.0))
}

/// Spectral Gap ground truth on the computed `Δ(H)`.
pub fn decide_gap_truth(inst: &SpectralGapInstance) -> Result<PromiseVerdict> {
    let gap = spectral_gap(&inst.hamiltonian)?;
    Ok(PromiseVerdict::classify(gap, inst.a, inst.b))
}

/// k-LH ground truth on the computed `λ₁(H)`.
pub fn decide_klh_truth(inst: &KlhInstance) -> Result<PromiseVerdict> {
    let ground = eigenvalues(&inst.hamiltonian)?.ground_energy()?;
    Ok(PromiseVerdict::classify(ground, inst.a, inst.b))
}
