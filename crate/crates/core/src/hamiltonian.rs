//! k-local Hamiltonians on n qubits.
//!
//! A [`Hamiltonian`] is a sum of [`LocalTerm`]s, each a Hermitian matrix
//! acting on a small set of qubits. Basis convention: qubit `i` is bit `i`
//! of the computational-basis index, qubit 0 least significant. Inside a
//! term the same rule applies to the local index: `support[t]` is local
//! bit `t`.

use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::limits;
use crate::spectrum::Spectrum;

pub type CMatrix = DMatrix<Complex64>;

/// Entrywise tolerance for structural checks (Hermiticity, embedding).
pub const STRUCTURAL_TOL: f64 = 1e-12;

/// Slack on the per-term PSD and norm conditions of the kLH convention.
pub const PSD_TOL: f64 = 1e-10;

/// A Hermitian operator on a sorted set of distinct qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTerm {
    support: Vec<usize>,
    matrix: CMatrix,
}

impl LocalTerm {
    /// Validates and canonicalizes a term.
    ///
    /// The support may be given in any order; it is sorted and the matrix
    /// permuted to match. An empty support with a 1×1 matrix is a scalar
    /// multiple of the identity.
    pub fn new(support: Vec<usize>, matrix: CMatrix) -> Result<Self> {
        if support.len() >= usize::BITS as usize {
            return Err(Error::InvalidInput(format!(
                "support of {} qubits",
                support.len()
            )));
        }
        let expected = 1usize << support.len();
        for (i, q) in support.iter().enumerate() {
            if support[..i].contains(q) {
                return Err(Error::DuplicateIndex(*q));
            }
        }
        if matrix.nrows() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: matrix.nrows(),
            });
        }
        if matrix.ncols() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: matrix.ncols(),
            });
        }
        let deviation = hermitian_deviation(&matrix);
        if !(deviation <= STRUCTURAL_TOL) {
            return Err(Error::NonHermitian { deviation });
        }

        let mut order: Vec<usize> = (0..support.len()).collect();
        order.sort_by_key(|&t| support[t]);
        if order.iter().enumerate().all(|(j, &t)| j == t) {
            return Ok(Self { support, matrix });
        }
        // new local bit j is old local bit order[j]
        let to_old = |new_idx: usize| {
            order
                .iter()
                .enumerate()
                .fold(0usize, |acc, (j, &t)| acc | (((new_idx >> j) & 1) << t))
        };
        let sorted: Vec<usize> = order.iter().map(|&t| support[t]).collect();
        let permuted = CMatrix::from_fn(expected, expected, |i, j| matrix[(to_old(i), to_old(j))]);
        Ok(Self {
            support: sorted,
            matrix: permuted,
        })
    }

    /// Real diagonal term `diag(values)` on `support`.
    pub fn diagonal(support: Vec<usize>, values: &[f64]) -> Result<Self> {
        let dim = values.len();
        let m = CMatrix::from_fn(dim, dim, |i, j| {
            if i == j {
                Complex64::new(values[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Self::new(support, m)
    }

    /// `|1⟩⟨1|` on a single qubit.
    pub fn projector_one(qubit: usize) -> Self {
        Self::diagonal(vec![qubit], &[0.0, 1.0]).expect("projector is a valid term")
    }

    /// `s·I` on no qubits: a global energy shift.
    pub fn identity_shift(s: f64) -> Self {
        Self::diagonal(Vec::new(), &[s]).expect("scalar is a valid term")
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn locality(&self) -> usize {
        self.support.len()
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self {
            support: self.support.clone(),
            matrix: self.matrix.map(|z| z * t),
        }
    }

    /// Sorted eigenvalues of the local matrix.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(self.matrix.clone())
    }
}

/// Sum of local terms on `n` qubits.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    n: usize,
    terms: Vec<LocalTerm>,
    spectrum: OnceLock<Spectrum>,
    digest: OnceLock<[u8; 32]>,
}

impl PartialEq for Hamiltonian {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.terms == other.terms
    }
}

impl Hamiltonian {
    /// Assembles terms into a Hamiltonian, checking every support index is below `n`.
    pub fn new(n: usize, terms: Vec<LocalTerm>) -> Result<Self> {
        for term in &terms {
            if let Some(&q) = term.support.iter().find(|&&q| q >= n) {
                return Err(Error::IndexOutOfRange { index: q, bound: n });
            }
        }
        Ok(Self {
            n,
            terms,
            spectrum: OnceLock::new(),
            digest: OnceLock::new(),
        })
    }

    pub fn zero(n: usize) -> Self {
        Self::new(n, Vec::new()).expect("empty term list is valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Locality: the largest support among the terms (0 for the zero Hamiltonian).
    pub fn k(&self) -> usize {
        self.terms
            .iter()
            .map(LocalTerm::locality)
            .max()
            .unwrap_or(0)
    }

    pub fn terms(&self) -> &[LocalTerm] {
        &self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Hilbert-space dimension `2^n`.
    pub fn dim(&self) -> usize {
        1usize << self.n
    }

    /// `H + s·I`, realized as an extra zero-qubit term.
    pub fn shifted(&self, s: f64) -> Self {
        let mut terms = self.terms.clone();
        terms.push(LocalTerm::identity_shift(s));
        Self::new(self.n, terms).expect("shift adds no qubits")
    }

    /// Every term multiplied by `t`.
    pub fn scaled(&self, t: f64) -> Self {
        let terms = self.terms.iter().map(|term| term.scaled(t)).collect();
        Self::new(self.n, terms).expect("scaling keeps supports")
    }

    /// Concatenation of two term lists on the same register.
    pub fn sum(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self::new(self.n, terms)
    }

    /// Dense `2^n × 2^n` matrix, subject to the configured qubit cap.
    pub fn to_dense(&self) -> Result<CMatrix> {
        self.to_dense_capped(limits::n_max())
    }

    pub fn to_dense_capped(&self, n_max: usize) -> Result<CMatrix> {
        if self.n > n_max {
            return Err(Error::TooLarge { n: self.n, n_max });
        }
        let dim = self.dim();
        let mut out = CMatrix::zeros(dim, dim);
        for term in &self.terms {
            embed_into(&mut out, term);
        }
        Ok(out)
    }

    /// SHA-256 over a canonical encoding of `n` and every term (support and
    /// matrix entry bits, with `-0.0` folded into `0.0`). Equal Hamiltonians
    /// have equal digests.
    pub fn digest(&self) -> [u8; 32] {
        *self.digest.get_or_init(|| {
            let mut hasher = Sha256::new();
            hasher.update((self.n as u64).to_le_bytes());
            hasher.update((self.terms.len() as u64).to_le_bytes());
            for term in &self.terms {
                hasher.update((term.support.len() as u64).to_le_bytes());
                for &q in &term.support {
                    hasher.update((q as u64).to_le_bytes());
                }
                for z in term.matrix.iter() {
                    hasher.update(canonical_bits(z.re).to_le_bytes());
                    hasher.update(canonical_bits(z.im).to_le_bytes());
                }
            }
            hasher.finalize().into()
        })
    }

    pub(crate) fn cached_spectrum(&self) -> Option<&Spectrum> {
        self.spectrum.get()
    }

    pub(crate) fn store_spectrum(&self, spectrum: Spectrum) {
        let _ = self.spectrum.set(spectrum);
    }
}

pub(crate) fn canonical_bits(x: f64) -> u64 {
    if x == 0.0 {
        0
    } else {
        x.to_bits()
    }
}

/// Adds `term ⊗ I_rest` into `out`.
fn embed_into(out: &mut CMatrix, term: &LocalTerm) {
    let dim = out.nrows();
    let local_dim = term.matrix.nrows();
    // global bit pattern of each local index
    let scatter: Vec<usize> = (0..local_dim)
        .map(|l| {
            term.support
                .iter()
                .enumerate()
                .fold(0usize, |acc, (t, &q)| acc | (((l >> t) & 1) << q))
        })
        .collect();
    let mask = scatter.last().copied().unwrap_or(0);
    for base in (0..dim).filter(|b| b & mask == 0) {
        for (i, &si) in scatter.iter().enumerate() {
            for (j, &sj) in scatter.iter().enumerate() {
                let v = term.matrix[(i, j)];
                if v.re != 0.0 || v.im != 0.0 {
                    out[(base | si, base | sj)] += v;
                }
            }
        }
    }
}

/// Largest entrywise `|M_ij − conj(M_ji)|`.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            if d.is_nan() {
                return f64::NAN;
            }
            worst = worst.max(d);
        }
    }
    worst
}

pub(crate) fn hermitian_eigenvalues(m: CMatrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut values: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Promise thresholds shared by both decision problems.
fn check_thresholds(a: f64, b: f64, c: f64) -> Result<()> {
    if !(a.is_finite() && b.is_finite() && c.is_finite()) {
        return Err(Error::InvalidThresholds("a, b, c must be finite".into()));
    }
    if b <= a {
        return Err(Error::InvalidThresholds(format!(
            "need b > a, got a={a}, b={b}"
        )));
    }
    if c <= 0.0 {
        return Err(Error::InvalidThresholds(format!("need c > 0, got {c}")));
    }
    Ok(())
}

/// Promise-gap condition `b − a ≥ n^(−c)`.
fn promise_gap_holds(n: usize, a: f64, b: f64, c: f64) -> bool {
    b - a >= required_gap(n, c)
}

fn required_gap(n: usize, c: f64) -> f64 {
    (n as f64).powf(-c)
}

/// Instance of the k-local Hamiltonian problem: is `λ₁(H) ≤ a` or `λ₁(H) ≥ b`?
#[derive(Debug, Clone, PartialEq)]
pub struct KlhInstance {
    pub hamiltonian: Arc<Hamiltonian>,
    pub a: f64,
    pub b: f64,
    /// Exponent of the promise-gap condition `b − a ≥ n^(−c)`.
    pub c: f64,
}

impl KlhInstance {
    pub fn new(hamiltonian: impl Into<Arc<Hamiltonian>>, a: f64, b: f64, c: f64) -> Result<Self> {
        check_thresholds(a, b, c)?;
        Ok(Self {
            hamiltonian: hamiltonian.into(),
            a,
            b,
            c,
        })
    }

    pub fn n(&self) -> usize {
        self.hamiltonian.n()
    }
}

/// Instance of Spectral Gap: is `Δ(H) ≤ a` (YES) or `Δ(H) ≥ b` (NO)?
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralGapInstance {
    pub hamiltonian: Arc<Hamiltonian>,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl SpectralGapInstance {
    pub fn new(hamiltonian: impl Into<Arc<Hamiltonian>>, a: f64, b: f64, c: f64) -> Result<Self> {
        check_thresholds(a, b, c)?;
        Ok(Self {
            hamiltonian: hamiltonian.into(),
            a,
            b,
            c,
        })
    }

    pub fn n(&self) -> usize {
        self.hamiltonian.n()
    }

    pub fn promise_gap_holds(&self) -> bool {
        promise_gap_holds(self.n(), self.a, self.b, self.c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TermIssue {
    NegativeTerm { term: usize, min_eigenvalue: f64 },
    NormExceeded { term: usize, norm: f64 },
}

/// Outcome of checking an instance against the kLH conventions.
#[derive(Debug, Clone, PartialEq)]
pub struct KlhReport {
    pub term_issues: Vec<TermIssue>,
    pub gap: f64,
    pub required_gap: f64,
}

impl KlhReport {
    pub fn terms_ok(&self) -> bool {
        self.term_issues.is_empty()
    }

    pub fn gap_ok(&self) -> bool {
        self.gap >= self.required_gap
    }

    pub fn is_valid(&self) -> bool {
        self.terms_ok() && self.gap_ok()
    }
}

/// Checks every term is PSD with operator norm at most 1, and the promise gap.
pub fn validate_klh(inst: &KlhInstance) -> KlhReport {
    let mut term_issues = Vec::new();
    for (idx, term) in inst.hamiltonian.terms().iter().enumerate() {
        let ev = term.eigenvalues();
        let min = ev.first().copied().unwrap_or(0.0);
        let norm = ev.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if !(min >= -PSD_TOL) {
            term_issues.push(TermIssue::NegativeTerm {
                term: idx,
                min_eigenvalue: min,
            });
        }
        if !(norm <= 1.0 + PSD_TOL) {
            term_issues.push(TermIssue::NormExceeded { term: idx, norm });
        }
    }
    KlhReport {
        term_issues,
        gap: inst.b - inst.a,
        required_gap: required_gap(inst.n(), inst.c),
    }
}

/// Seeded random k-local Hamiltonian with `m` PSD terms of norm at most 1.
///
/// Each term is a Gaussian Hermitian matrix on `k` distinct random qubits,
/// shifted so its smallest eigenvalue is 0 and scaled so its largest lies
/// in `[0.25, 1]`.
pub fn random_instance(n: usize, k: usize, m: usize, seed: u64) -> Result<Hamiltonian> {
    if n > limits::n_max() {
        return Err(Error::TooLarge {
            n,
            n_max: limits::n_max(),
        });
    }
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!(
            "need 1 <= k <= n, got k={k}, n={n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms = (0..m)
        .map(|_| random_term(&mut rng, n, k))
        .collect::<Result<Vec<_>>>()?;
    Hamiltonian::new(n, terms)
}

fn random_term(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Result<LocalTerm> {
    let mut support = index::sample(rng, n, k).into_vec();
    support.sort_unstable();
    let dim = 1usize << k;
    let raw = CMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let mut g = CMatrix::from_fn(dim, dim, |i, j| (raw[(i, j)] + raw[(j, i)].conj()) * 0.5);
    let ev = hermitian_eigenvalues(g.clone());
    let (lo, hi) = (ev[0], ev[dim - 1]);
    let top: f64 = rng.random_range(0.25..=1.0);
    let scale = if hi - lo > 0.0 { top / (hi - lo) } else { 0.0 };
    for i in 0..dim {
        g[(i, i)] -= Complex64::new(lo, 0.0);
    }
    g *= Complex64::new(scale, 0.0);
    LocalTerm::new(support, g)
}
