//! Many-one reduction from k-LH to Spectral Gap.
//!
//! Given `H` on register Y (n qubits), adds an ancilla qubit X at index `n`
//! and builds
//!
//! ```text
//! H' = |0⟩⟨0|_X ⊗ P_Y + |1⟩⟨1|_X ⊗ H_Y
//! ```
//!
//! where `P_Y` vanishes on `|0…0⟩` and is at least 1 elsewhere. The
//! 0-block then holds one nullstate `|0⟩_X|0…0⟩_Y` with every other level at
//! 1 or above, the 1-block reproduces the spectrum of `H`, and for PSD `H`
//!
//! ```text
//! Δ(H') = λ₂(H') − λ₁(H') = min{λ₁(H), 1}.
//! ```

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{
    hermitian_eigenvalues, validate_klh, CMatrix, Hamiltonian, KlhInstance, LocalTerm,
    SpectralGapInstance, PSD_TOL,
};
use crate::limits;
use crate::spectrum::{eigenvalues, Spectrum};

/// How the 0-block penalty `P_Y` is realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ReductionVariant {
    /// `P_Y = I − |0…0⟩⟨0…0|`, stored as one (n+1)-local term.
    #[serde(rename = "global")]
    GlobalProjector,
    /// `P_Y = Σ_i |1⟩⟨1|_{Y_i}` (Hamming weight); every term is 2-local.
    #[serde(rename = "hamming")]
    HammingPenalty,
}

impl ReductionVariant {
    pub const ALL: [ReductionVariant; 2] = [
        ReductionVariant::GlobalProjector,
        ReductionVariant::HammingPenalty,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ReductionVariant::GlobalProjector => "global",
            ReductionVariant::HammingPenalty => "hamming",
        }
    }
}

impl fmt::Display for ReductionVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ReductionVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "global" => Ok(ReductionVariant::GlobalProjector),
            "hamming" => Ok(ReductionVariant::HammingPenalty),
            other => Err(Error::parse(
                "variant",
                format!("expected global|hamming, got {other:?}"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionOutput {
    pub instance: SpectralGapInstance,
    pub variant: ReductionVariant,
    /// Qubit index of the ancilla X (the most significant qubit).
    pub ancilla_index: usize,
    /// Basis index of the nullstate `|0⟩_X|0…0⟩_Y`.
    pub null_state_index: usize,
}

/// Builds the Spectral Gap instance `(H', a, b)` from a k-LH instance `(H, a, b)`.
///
/// Rejects instances whose terms are not PSD with norm at most 1, and
/// thresholds above 1 (the gap of `H'` is capped at 1).
pub fn reduce_klh_to_gap(inst: &KlhInstance, variant: ReductionVariant) -> Result<ReductionOutput> {
    let n = inst.n();
    if n == 0 {
        return Err(Error::InvalidInput(
            "reduction needs at least one qubit".into(),
        ));
    }
    let report = validate_klh(inst);
    if !report.terms_ok() {
        return Err(Error::InvalidInput(format!(
            "terms violate the kLH convention: {:?}",
            report.term_issues
        )));
    }
    if inst.b > 1.0 {
        return Err(Error::InvalidInput(format!(
            "thresholds must not exceed 1 (gap of the reduced Hamiltonian is capped at 1), got b={}",
            inst.b
        )));
    }

    let ancilla = n;
    let mut terms = match variant {
        ReductionVariant::GlobalProjector => {
            if n + 1 > limits::n_max() {
                return Err(Error::TooLarge {
                    n: n + 1,
                    n_max: limits::n_max(),
                });
            }
            vec![global_penalty(n)]
        }
        ReductionVariant::HammingPenalty => (0..n).map(|q| hamming_penalty(q, ancilla)).collect(),
    };
    terms.extend(
        inst.hamiltonian
            .terms()
            .iter()
            .map(|t| controlled_on_one(t, ancilla)),
    );

    let h_prime = Hamiltonian::new(n + 1, terms)?;
    let instance = SpectralGapInstance::new(h_prime, inst.a, inst.b, inst.c)?;
    Ok(ReductionOutput {
        instance,
        variant,
        ancilla_index: ancilla,
        null_state_index: 0,
    })
}

/// `|0⟩⟨0|_X ⊗ (I − |0…0⟩⟨0…0|)_Y` on all n+1 qubits.
fn global_penalty(n: usize) -> LocalTerm {
    let half = 1usize << n;
    let diag: Vec<f64> = (0..2 * half)
        .map(|i| if i != 0 && i < half { 1.0 } else { 0.0 })
        .collect();
    LocalTerm::diagonal((0..=n).collect(), &diag).expect("diagonal penalty is Hermitian")
}

/// `|0⟩⟨0|_X ⊗ |1⟩⟨1|_{Y_q}`; local bit 0 is `q`, local bit 1 is X.
fn hamming_penalty(q: usize, ancilla: usize) -> LocalTerm {
    LocalTerm::diagonal(vec![q, ancilla], &[0.0, 1.0, 0.0, 0.0])
        .expect("diagonal penalty is Hermitian")
}

/// `|1⟩⟨1|_X ⊗ M`. X sits above every Y qubit, so it is the top local bit.
fn controlled_on_one(term: &LocalTerm, ancilla: usize) -> LocalTerm {
    let d = term.matrix().nrows();
    let zero = Complex64::new(0.0, 0.0);
    let lifted = CMatrix::from_fn(2 * d, 2 * d, |i, j| {
        if i >= d && j >= d {
            term.matrix()[(i - d, j - d)]
        } else {
            zero
        }
    });
    let mut support = term.support().to_vec();
    support.push(ancilla);
    LocalTerm::new(support, lifted).expect("lifting preserves Hermiticity")
}

/// Analytic prediction `min{λ₁(H), 1}` for `Δ(H')`.
///
/// Instances outside the kLH norm convention are still evaluated, with a warning.
pub fn predicted_gap(inst: &KlhInstance) -> Result<f64> {
    let report = validate_klh(inst);
    if !report.terms_ok() {
        log::warn!(
            "instance violates the kLH term convention: {:?}",
            report.term_issues
        );
    }
    let ground = eigenvalues(&inst.hamiltonian)?.ground_energy()?;
    Ok(ground.min(1.0))
}

/// Spectrum of `H'` split by the ancilla value.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSpectra {
    pub zero_block: Spectrum,
    pub one_block: Spectrum,
    /// Largest entry coupling the two blocks (zero by construction).
    pub off_block: f64,
}

impl BlockSpectra {
    /// Sorted union of both blocks.
    pub fn merged(&self) -> Spectrum {
        let mut all = self.zero_block.values().to_vec();
        all.extend_from_slice(self.one_block.values());
        Spectrum::new(all)
    }

    /// Exactly one 0-block level at (numerical) zero, every other at 1 or above.
    pub fn zero_block_has_isolated_nullstate(&self) -> bool {
        let values = self.zero_block.values();
        let nulls = values.iter().filter(|&&v| v <= PSD_TOL).count();
        let excited = values.iter().filter(|&&v| v >= 1.0 - PSD_TOL).count();
        nulls == 1 && excited == values.len() - 1
    }
}

/// Diagonalizes the two ancilla blocks of `H'` separately.
pub fn block_spectrum(out: &ReductionOutput, input: &Hamiltonian) -> Result<BlockSpectra> {
    let h_prime = &out.instance.hamiltonian;
    if h_prime.n() != input.n() + 1 || out.ancilla_index != input.n() {
        return Err(Error::DimensionMismatch {
            expected: input.n() + 1,
            found: h_prime.n(),
        });
    }
    let dense = h_prime.to_dense()?;
    let half = input.dim();
    let zero = dense.view((0, 0), (half, half)).clone_owned();
    let one = dense.view((half, half), (half, half)).clone_owned();
    let off_block = dense
        .view((0, half), (half, half))
        .iter()
        .fold(0.0f64, |acc, z| acc.max(z.norm()));
    Ok(BlockSpectra {
        zero_block: Spectrum::new(hermitian_eigenvalues(zero)),
        one_block: Spectrum::new(hermitian_eigenvalues(one)),
        off_block,
    })
}
