//! Simulated promise-problem oracle.
//!
//! Valid queries are answered truthfully from the exact spectrum. A query
//! whose quantity falls strictly between its thresholds violates the
//! promise, and the oracle may answer it either way; an [`AnswerPolicy`]
//! fixes that choice so adversarial behaviour can be replayed.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::hamiltonian::{canonical_bits, Hamiltonian};
use crate::limits;
use crate::spectrum::{eigenvalues, PromiseVerdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Answer {
    Yes,
    No,
}

impl Answer {
    pub fn from_yes(yes: bool) -> Self {
        if yes {
            Answer::Yes
        } else {
            Answer::No
        }
    }

    pub fn is_yes(self) -> bool {
        self == Answer::Yes
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Answer::Yes => "YES",
            Answer::No => "NO",
        })
    }
}

/// Which spectral quantity a query compares against its thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QueryKind {
    /// `λ₁(H) ≤ a` or `λ₁(H) ≥ b`.
    GroundEnergy,
    /// `λ_c(H) ≤ a` or `λ_c(H) ≥ b`, with `c ≥ 1`.
    ExcitedEnergy(usize),
    /// `Δ(H) ≤ a` or `Δ(H) ≥ b`.
    Gap,
}

impl QueryKind {
    /// Eigenvalue index for the energy kinds.
    pub fn level(self) -> Option<usize> {
        match self {
            QueryKind::GroundEnergy => Some(1),
            QueryKind::ExcitedEnergy(c) => Some(c),
            QueryKind::Gap => None,
        }
    }
}

/// SHA-256 of a query's canonical encoding.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fingerprint([u8; 32]);

impl Fingerprint {
    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    fn low_word(&self) -> u64 {
        u64::from_le_bytes(self.0[..8].try_into().expect("32-byte digest"))
    }
}

impl fmt::Display for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for byte in self.0 {
            write!(f, "{byte:02x}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fingerprint({})", &self.to_string()[..12])
    }
}

#[derive(Debug, Clone)]
pub struct OracleQuery {
    kind: QueryKind,
    hamiltonian: Arc<Hamiltonian>,
    a: f64,
    b: f64,
    fingerprint: Fingerprint,
}

impl PartialEq for OracleQuery {
    fn eq(&self, other: &Self) -> bool {
        self.fingerprint == other.fingerprint
    }
}

impl Eq for OracleQuery {}

impl OracleQuery {
    pub fn new(kind: QueryKind, hamiltonian: Arc<Hamiltonian>, a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(Error::InvalidThresholds(format!(
                "query needs finite b > a, got a={a}, b={b}"
            )));
        }
        if kind == QueryKind::ExcitedEnergy(0) {
            return Err(Error::IndexOutOfRange { index: 0, bound: 1 });
        }
        let mut hasher = Sha256::new();
        match kind {
            QueryKind::GroundEnergy => hasher.update([0u8]),
            QueryKind::ExcitedEnergy(c) => {
                hasher.update([1u8]);
                hasher.update((c as u64).to_le_bytes());
            }
            QueryKind::Gap => hasher.update([2u8]),
        }
        hasher.update(hamiltonian.digest());
        hasher.update(canonical_bits(a).to_le_bytes());
        hasher.update(canonical_bits(b).to_le_bytes());
        let fingerprint = Fingerprint(hasher.finalize().into());
        Ok(Self {
            kind,
            hamiltonian,
            a,
            b,
            fingerprint,
        })
    }

    /// `λ_c` query, using the ground-energy kind for `c = 1`.
    pub fn energy(c: usize, hamiltonian: Arc<Hamiltonian>, a: f64, b: f64) -> Result<Self> {
        let kind = if c == 1 {
            QueryKind::GroundEnergy
        } else {
            QueryKind::ExcitedEnergy(c)
        };
        Self::new(kind, hamiltonian, a, b)
    }

    pub fn kind(&self) -> QueryKind {
        self.kind
    }

    pub fn hamiltonian(&self) -> &Arc<Hamiltonian> {
        &self.hamiltonian
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn fingerprint(&self) -> Fingerprint {
        self.fingerprint
    }

    /// The quantity the query asks about, from the exact spectrum.
    pub fn value(&self) -> Result<f64> {
        let spectrum = eigenvalues(&self.hamiltonian)?;
        match self.kind.level() {
            Some(c) => spectrum.lambda(c),
            None => spectrum.gap(),
        }
    }

    pub fn truth(&self) -> Result<PromiseVerdict> {
        Ok(PromiseVerdict::classify(self.value()?, self.a, self.b))
    }
}

/// How the oracle answers queries that violate their promise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnswerPolicy {
    AllYes,
    AllNo,
    /// Pseudorandom but fixed per query: the same query always gets the same answer.
    Seeded(u64),
    /// Per-fingerprint answers; unlisted invalid queries get `No`.
    Explicit(BTreeMap<Fingerprint, Answer>),
}

impl AnswerPolicy {
    pub fn invalid_answer(&self, fingerprint: Fingerprint) -> Answer {
        match self {
            AnswerPolicy::AllYes => Answer::Yes,
            AnswerPolicy::AllNo => Answer::No,
            AnswerPolicy::Seeded(seed) => {
                Answer::from_yes(splitmix64(seed ^ fingerprint.low_word()) & 1 == 1)
            }
            AnswerPolicy::Explicit(map) => map.get(&fingerprint).copied().unwrap_or(Answer::No),
        }
    }
}

impl fmt::Display for AnswerPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnswerPolicy::AllYes => f.write_str("all-yes"),
            AnswerPolicy::AllNo => f.write_str("all-no"),
            AnswerPolicy::Seeded(seed) => write!(f, "seed:{seed}"),
            AnswerPolicy::Explicit(map) => {
                f.write_str("explicit{")?;
                for (i, (fp, ans)) in map.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{}={ans}", &fp.to_string()[..8])?;
                }
                f.write_str("}")
            }
        }
    }
}

impl FromStr for AnswerPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all-yes" => Ok(AnswerPolicy::AllYes),
            "all-no" => Ok(AnswerPolicy::AllNo),
            _ => s
                .strip_prefix("seed:")
                .and_then(|n| n.parse().ok())
                .map(AnswerPolicy::Seeded)
                .ok_or_else(|| {
                    Error::parse(
                        "policy",
                        format!("expected all-yes|all-no|seed:N, got {s:?}"),
                    )
                }),
        }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

#[derive(Debug, Clone)]
pub struct LogEntry {
    pub query: OracleQuery,
    pub truth: PromiseVerdict,
    pub answer: Answer,
}

#[derive(Serialize)]
struct LogLine<'a> {
    fingerprint: String,
    kind: &'a QueryKind,
    a: f64,
    b: f64,
    truth: PromiseVerdict,
    answer: Answer,
}

/// Ordered record of every query the oracle answered.
#[derive(Debug, Clone, Default)]
pub struct OracleLog {
    entries: Vec<LogEntry>,
}

impl OracleLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[LogEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Every valid query was answered with its truth value.
    pub fn is_consistent(&self) -> bool {
        self.entries.iter().all(|e| match e.truth {
            PromiseVerdict::Yes => e.answer == Answer::Yes,
            PromiseVerdict::No => e.answer == Answer::No,
            PromiseVerdict::Invalid => true,
        })
    }

    pub fn invalid_count(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| e.truth == PromiseVerdict::Invalid)
            .count()
    }

    /// One JSON object per entry, newline separated.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let line = LogLine {
                fingerprint: e.query.fingerprint.to_string(),
                kind: &e.query.kind,
                a: e.query.a,
                b: e.query.b,
                truth: e.truth,
                answer: e.answer,
            };
            out.push_str(&serde_json::to_string(&line).expect("log line serializes"));
            out.push('\n');
        }
        out
    }
}

/// Answers one query: truthfully when it is valid, by `policy` otherwise.
pub fn answer(query: &OracleQuery, policy: &AnswerPolicy, log: &mut OracleLog) -> Result<Answer> {
    let truth = query.truth()?;
    let emitted = match truth {
        PromiseVerdict::Yes => Answer::Yes,
        PromiseVerdict::No => Answer::No,
        PromiseVerdict::Invalid => policy.invalid_answer(query.fingerprint),
    };
    log.entries.push(LogEntry {
        query: query.clone(),
        truth,
        answer: emitted,
    });
    Ok(emitted)
}

/// Every assignment of answers to the invalid queries in `queries`, up to [`limits::ADVERSARY_CAP`].
pub fn enumerate_adversaries(queries: &[OracleQuery]) -> Result<Vec<AnswerPolicy>> {
    enumerate_adversaries_capped(queries, limits::ADVERSARY_CAP)
}

/// One `Explicit` policy per assignment to the distinct invalid queries,
/// `2^(#invalid)` in total. Assignment `i` answers the `j`-th invalid query
/// (in first-appearance order) `Yes` iff bit `j` of `i` is set.
pub fn enumerate_adversaries_capped(
    queries: &[OracleQuery],
    cap: usize,
) -> Result<Vec<AnswerPolicy>> {
    let mut invalid: Vec<Fingerprint> = Vec::new();
    for q in queries {
        if q.truth()? == PromiseVerdict::Invalid && !invalid.contains(&q.fingerprint) {
            invalid.push(q.fingerprint);
        }
    }
    if invalid.len() > cap {
        return Err(Error::TooManyInvalid {
            count: invalid.len(),
            cap,
        });
    }
    Ok((0..1usize << invalid.len())
        .map(|mask| {
            let map = invalid
                .iter()
                .enumerate()
                .map(|(j, fp)| (*fp, Answer::from_yes(mask >> j & 1 == 1)))
                .collect();
            AnswerPolicy::Explicit(map)
        })
        .collect())
}

/// `count` seeded policies derived from `seed`, for when enumeration is out of reach.
pub fn sample_policies(seed: u64, count: usize) -> Vec<AnswerPolicy> {
    (0..count as u64)
        .map(|i| AnswerPolicy::Seeded(splitmix64(seed.wrapping_add(i))))
        .collect()
}
