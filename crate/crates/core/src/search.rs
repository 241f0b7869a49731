//! Promise-robust binary search for `λ_c` and the Spectral Gap decision built on it.
//!
//! Each round probes the midpoint `m` of the current interval with the
//! thresholds `(m − γ, m + γ)`. Whatever the oracle says, the answer is a
//! true one-sided bound: a YES means `λ_c ≤ m + γ` (if the query was invalid,
//! `λ_c` is below `m + γ` anyway) and a NO means `λ_c ≥ m − γ`. The width
//! shrinks as `w ↦ w/2 + γ`, which reaches any `eps > 2γ`; with `γ < eps/4`
//! it does so within `⌈log₂((hi − lo)/(eps − 2γ))⌉` rounds.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::flatten::{AdaptiveMachine, Step};
use crate::hamiltonian::{Hamiltonian, SpectralGapInstance};
use crate::oracle::{self, Answer, AnswerPolicy, OracleLog, OracleQuery};

const MAX_ROUNDS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    pub lo: f64,
    pub hi: f64,
    pub eps: f64,
    pub gamma: f64,
}

impl SearchConfig {
    pub fn new(lo: f64, hi: f64, eps: f64, gamma: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && eps.is_finite() && gamma.is_finite()) {
            return Err(Error::SearchConfig("parameters must be finite".into()));
        }
        if hi <= lo {
            return Err(Error::SearchConfig(format!(
                "need hi > lo, got [{lo}, {hi}]"
            )));
        }
        if eps <= 0.0 || gamma <= 0.0 {
            return Err(Error::SearchConfig("eps and gamma must be positive".into()));
        }
        if gamma >= eps / 4.0 {
            return Err(Error::SearchConfig(format!(
                "need gamma < eps/4, got gamma={gamma}, eps={eps}"
            )));
        }
        Ok(Self { lo, hi, eps, gamma })
    }

    /// `gamma = eps / 8`.
    pub fn with_default_gamma(lo: f64, hi: f64, eps: f64) -> Result<Self> {
        Self::new(lo, hi, eps, eps / 8.0)
    }

    /// Range `[0, m]` for `m` terms of norm at most 1 (at least `[0, 1]`).
    pub fn for_hamiltonian(h: &Hamiltonian, eps: f64) -> Result<Self> {
        Self::with_default_gamma(0.0, h.num_terms().max(1) as f64, eps)
    }

    /// Rounds until the width recurrence `w ↦ w/2 + γ` drops to `eps`.
    pub fn rounds(&self) -> Result<usize> {
        // a hair under eps so floating-point endpoints still land within it
        let target = self.eps * (1.0 - 1e-12);
        let mut width = self.hi - self.lo;
        let mut rounds = 0;
        while width > target {
            width = width / 2.0 + self.gamma;
            rounds += 1;
            if rounds > MAX_ROUNDS {
                return Err(Error::NonConvergence { rounds });
            }
        }
        Ok(rounds)
    }

    /// `⌈log₂((hi − lo)/(eps − 2γ))⌉ + 1`.
    pub fn query_bound(&self) -> usize {
        let ratio = (self.hi - self.lo) / (self.eps - 2.0 * self.gamma);
        ratio.log2().ceil().max(0.0) as usize + 1
    }
}

/// Binary search for `λ_c` as an adaptive machine with a fixed round count.
///
/// Halts with `Yes` iff the final upper bound is below `cutoff` (by default
/// the midpoint of the initial range).
#[derive(Debug, Clone)]
pub struct LambdaSearchMachine {
    hamiltonian: Arc<Hamiltonian>,
    level: usize,
    cfg: SearchConfig,
    rounds: usize,
    cutoff: f64,
}

impl LambdaSearchMachine {
    pub fn new(hamiltonian: Arc<Hamiltonian>, level: usize, cfg: SearchConfig) -> Result<Self> {
        let rounds = cfg.rounds()?;
        Ok(Self::with_rounds(hamiltonian, level, cfg, rounds))
    }

    /// Stops after exactly `rounds` probes, whatever the resulting width.
    pub fn with_rounds(
        hamiltonian: Arc<Hamiltonian>,
        level: usize,
        cfg: SearchConfig,
        rounds: usize,
    ) -> Self {
        Self {
            hamiltonian,
            level,
            cfg,
            rounds,
            cutoff: (cfg.lo + cfg.hi) / 2.0,
        }
    }

    pub fn with_cutoff(mut self, cutoff: f64) -> Self {
        self.cutoff = cutoff;
        self
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    /// Interval after applying `answers` in order.
    pub fn interval_after(&self, answers: &[Answer]) -> (f64, f64) {
        answers
            .iter()
            .fold((self.cfg.lo, self.cfg.hi), |(lower, upper), a| {
                let mid = lower + (upper - lower) / 2.0;
                match a {
                    Answer::Yes => (lower, mid + self.cfg.gamma),
                    Answer::No => (mid - self.cfg.gamma, upper),
                }
            })
    }

    fn probe(&self, answers: &[Answer]) -> Result<OracleQuery> {
        let (lower, upper) = self.interval_after(answers);
        let mid = lower + (upper - lower) / 2.0;
        OracleQuery::energy(
            self.level,
            self.hamiltonian.clone(),
            mid - self.cfg.gamma,
            mid + self.cfg.gamma,
        )
    }
}

impl AdaptiveMachine for LambdaSearchMachine {
    fn q_max(&self) -> usize {
        self.rounds
    }

    fn step(&self, answers: &[Answer]) -> Result<Step> {
        if answers.len() < self.rounds {
            return Ok(Step::Query(self.probe(answers)?));
        }
        let (_, upper) = self.interval_after(answers);
        Ok(Step::Halt(Answer::from_yes(upper < self.cutoff)))
    }
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub lower: f64,
    pub upper: f64,
    pub queries_used: usize,
    pub transcript: OracleLog,
}

impl SearchResult {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }
}

/// Brackets `λ_c(h)` to width `eps` using the oracle under `policy`.
///
/// The caller guarantees `λ_c ∈ [cfg.lo, cfg.hi]`.
pub fn robust_search_lambda(
    h: &Arc<Hamiltonian>,
    c: usize,
    cfg: &SearchConfig,
    policy: &AnswerPolicy,
) -> Result<SearchResult> {
    let machine = LambdaSearchMachine::new(h.clone(), c, *cfg)?;
    let mut transcript = OracleLog::new();
    let mut answers = Vec::with_capacity(machine.rounds());
    while answers.len() < machine.rounds() {
        let q = machine.probe(&answers)?;
        answers.push(oracle::answer(&q, policy, &mut transcript)?);
    }
    let (lower, upper) = machine.interval_after(&answers);
    if upper - lower > cfg.eps {
        return Err(Error::NonConvergence {
            rounds: answers.len(),
        });
    }
    Ok(SearchResult {
        lower,
        upper,
        queries_used: answers.len(),
        transcript,
    })
}

/// Outcome of deciding Spectral Gap through the oracle.
#[derive(Debug, Clone)]
pub struct GapDecision {
    pub answer: Answer,
    pub ground: SearchResult,
    pub excited: SearchResult,
}

impl GapDecision {
    pub fn queries_used(&self) -> usize {
        self.ground.queries_used + self.excited.queries_used
    }

    /// Conservative upper bound on `Δ`: `λ₂.upper − λ₁.lower`.
    pub fn gap_upper_bound(&self) -> f64 {
        self.excited.upper - self.ground.lower
    }
}

fn check_precision(inst: &SpectralGapInstance, cfg: &SearchConfig) -> Result<()> {
    let max = (inst.b - inst.a) / 4.0;
    if cfg.eps > max * (1.0 + 1e-12) {
        return Err(Error::ConfigTooCoarse { eps: cfg.eps, max });
    }
    Ok(())
}

fn gap_verdict(ground_lower: f64, excited_upper: f64, b: f64) -> Answer {
    Answer::from_yes(excited_upper - ground_lower < b)
}

/// Decides Spectral Gap with two robust searches (for `λ₁` and `λ₂`).
///
/// Answers `Yes` iff `λ₂.upper − λ₁.lower < b`. With `eps ≤ (b − a)/4` this
/// is correct under every answer policy whenever the instance keeps its promise.
pub fn decide_gap_via_oracle(
    inst: &SpectralGapInstance,
    cfg: &SearchConfig,
    policy: &AnswerPolicy,
) -> Result<GapDecision> {
    check_precision(inst, cfg)?;
    let ground = robust_search_lambda(&inst.hamiltonian, 1, cfg, policy)?;
    let excited = robust_search_lambda(&inst.hamiltonian, 2, cfg, policy)?;
    Ok(GapDecision {
        answer: gap_verdict(ground.lower, excited.upper, inst.b),
        ground,
        excited,
    })
}

/// [`decide_gap_via_oracle`] as one adaptive machine: the `λ₁` rounds, then the `λ₂` rounds.
#[derive(Debug, Clone)]
pub struct GapDecisionMachine {
    ground: LambdaSearchMachine,
    excited: LambdaSearchMachine,
    b: f64,
}

impl GapDecisionMachine {
    pub fn new(inst: &SpectralGapInstance, cfg: &SearchConfig) -> Result<Self> {
        check_precision(inst, cfg)?;
        Ok(Self {
            ground: LambdaSearchMachine::new(inst.hamiltonian.clone(), 1, *cfg)?,
            excited: LambdaSearchMachine::new(inst.hamiltonian.clone(), 2, *cfg)?,
            b: inst.b,
        })
    }

    /// Same decision rule with a fixed number of rounds per search; the
    /// result need not be correct when the rounds are too few.
    pub fn with_rounds(inst: &SpectralGapInstance, cfg: &SearchConfig, rounds: usize) -> Self {
        Self {
            ground: LambdaSearchMachine::with_rounds(inst.hamiltonian.clone(), 1, *cfg, rounds),
            excited: LambdaSearchMachine::with_rounds(inst.hamiltonian.clone(), 2, *cfg, rounds),
            b: inst.b,
        }
    }
}

impl AdaptiveMachine for GapDecisionMachine {
    fn q_max(&self) -> usize {
        self.ground.rounds() + self.excited.rounds()
    }

    fn step(&self, answers: &[Answer]) -> Result<Step> {
        let split = self.ground.rounds();
        if answers.len() < split {
            return Ok(Step::Query(self.ground.probe(answers)?));
        }
        let (first, rest) = answers.split_at(split);
        if rest.len() < self.excited.rounds() {
            return Ok(Step::Query(self.excited.probe(rest)?));
        }
        let (ground_lower, _) = self.ground.interval_after(first);
        let (_, excited_upper) = self.excited.interval_after(rest);
        Ok(Step::Halt(gap_verdict(ground_lower, excited_upper, self.b)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flatten::run_adaptive;
    use crate::hamiltonian::LocalTerm;

    const A: f64 = 1.0 / 3.0;
    const B: f64 = 2.0 / 3.0;

    fn planted(value: f64) -> Arc<Hamiltonian> {
        Arc::new(
            Hamiltonian::new(
                1,
                vec![LocalTerm::diagonal(vec![0], &[value, 1.0]).unwrap()],
            )
            .unwrap(),
        )
    }

    #[test]
    fn config_validation() {
        assert!(SearchConfig::new(0.0, 1.0, 0.1, 0.01).is_ok());
        assert!(SearchConfig::new(1.0, 1.0, 0.1, 0.01).is_err());
        assert!(SearchConfig::new(0.0, 1.0, 0.1, 0.025).is_err());
        assert!(SearchConfig::new(0.0, 1.0, -0.1, 0.01).is_err());
        assert!(SearchConfig::new(0.0, f64::NAN, 0.1, 0.01).is_err());
    }

    #[test]
    fn round_count_respects_bound() {
        for (hi, eps) in [
            (1.0, 0.1),
            (1.0, 0.02),
            (7.0, 1.0 / 12.0),
            (30.0, 1e-3),
            (1.0, 2.0),
        ] {
            let cfg = SearchConfig::with_default_gamma(0.0, hi, eps).unwrap();
            let r = cfg.rounds().unwrap();
            assert!(
                r <= cfg.query_bound(),
                "hi={hi} eps={eps}: {r} > {}",
                cfg.query_bound()
            );
        }
    }

    #[test]
    fn zero_hamiltonian_ground_energy() {
        let cfg = SearchConfig::new(0.0, 1.0, 0.1, 0.01).unwrap();
        let h = Arc::new(Hamiltonian::zero(2));
        for policy in [AnswerPolicy::AllYes, AnswerPolicy::AllNo] {
            let r = robust_search_lambda(&h, 1, &cfg, &policy).unwrap();
            assert!(r.contains(0.0));
            assert!(r.width() <= 0.1);
            assert!(r.queries_used <= cfg.query_bound());
            assert!(r.transcript.is_consistent());
        }
    }

    #[test]
    fn invalid_first_probe_still_brackets() {
        let cfg = SearchConfig::with_default_gamma(0.0, 1.0, 0.05).unwrap();
        let h = planted(0.5);
        for policy in [
            AnswerPolicy::AllYes,
            AnswerPolicy::AllNo,
            AnswerPolicy::Seeded(1),
        ] {
            let r = robust_search_lambda(&h, 1, &cfg, &policy).unwrap();
            assert!(r.contains(0.5), "{policy}: [{}, {}]", r.lower, r.upper);
            assert!(r.transcript.invalid_count() >= 1);
        }
    }

    #[test]
    fn excited_level_search() {
        let cfg = SearchConfig::with_default_gamma(0.0, 1.0, 0.05).unwrap();
        let r = robust_search_lambda(&planted(0.25), 2, &cfg, &AnswerPolicy::AllNo).unwrap();
        assert!(r.contains(1.0));
    }

    #[test]
    fn decision_rejects_coarse_precision() {
        let inst = SpectralGapInstance::new(Hamiltonian::zero(2), A, B, 1.0).unwrap();
        let cfg = SearchConfig::with_default_gamma(0.0, 1.0, 0.1).unwrap();
        assert!(matches!(
            decide_gap_via_oracle(&inst, &cfg, &AnswerPolicy::AllYes),
            Err(Error::ConfigTooCoarse { .. })
        ));
    }

    #[test]
    fn decision_on_small_instances() {
        let cfg = SearchConfig::with_default_gamma(0.0, 1.0, 1.0 / 12.0).unwrap();
        let zero = SpectralGapInstance::new(Hamiltonian::zero(2), A, B, 1.0).unwrap();
        let unit = SpectralGapInstance::new(
            Hamiltonian::new(2, vec![LocalTerm::projector_one(0)]).unwrap(),
            A,
            B,
            1.0,
        )
        .unwrap();
        for policy in [
            AnswerPolicy::AllYes,
            AnswerPolicy::AllNo,
            AnswerPolicy::Seeded(5),
        ] {
            assert_eq!(
                decide_gap_via_oracle(&zero, &cfg, &policy).unwrap().answer,
                Answer::Yes
            );
            // spectrum {0, 0, 1, 1}: degenerate ground space
            assert_eq!(
                decide_gap_via_oracle(&unit, &cfg, &policy).unwrap().answer,
                Answer::Yes
            );
        }
        let gapped = SpectralGapInstance::new(
            Hamiltonian::new(
                2,
                vec![LocalTerm::projector_one(0), LocalTerm::projector_one(1)],
            )
            .unwrap(),
            A,
            B,
            1.0,
        )
        .unwrap();
        let cfg = SearchConfig::for_hamiltonian(&gapped.hamiltonian, 1.0 / 12.0).unwrap();
        for policy in [AnswerPolicy::AllYes, AnswerPolicy::AllNo] {
            assert_eq!(
                decide_gap_via_oracle(&gapped, &cfg, &policy)
                    .unwrap()
                    .answer,
                Answer::No
            );
        }
    }

    #[test]
    fn machine_matches_direct_decision() {
        let inst = SpectralGapInstance::new(planted(0.4).as_ref().clone(), 0.2, 0.6, 1.0).unwrap();
        let cfg = SearchConfig::with_default_gamma(0.0, 1.0, 0.1).unwrap();
        let machine = GapDecisionMachine::new(&inst, &cfg).unwrap();
        for policy in [
            AnswerPolicy::AllYes,
            AnswerPolicy::AllNo,
            AnswerPolicy::Seeded(2),
        ] {
            let direct = decide_gap_via_oracle(&inst, &cfg, &policy).unwrap();
            let mut log = OracleLog::new();
            let via_machine = run_adaptive(&machine, &policy, &mut log).unwrap();
            assert_eq!(direct.answer, via_machine);
            assert_eq!(direct.queries_used(), log.len());
        }
    }

    #[test]
    fn transcripts_are_deterministic() {
        let cfg = SearchConfig::with_default_gamma(0.0, 1.0, 0.02).unwrap();
        let h = planted(0.75);
        let r1 = robust_search_lambda(&h, 1, &cfg, &AnswerPolicy::Seeded(9)).unwrap();
        let r2 = robust_search_lambda(&h, 1, &cfg, &AnswerPolicy::Seeded(9)).unwrap();
        assert_eq!(r1.transcript.to_json_lines(), r2.transcript.to_json_lines());
        assert_eq!((r1.lower, r1.upper), (r2.lower, r2.upper));
    }
}
