mod common;

use std::sync::Arc;

use common::planted;
use gapforge::flatten::{
    check_robustness, check_robustness_sampled, enumerate_paths, flatten, reachable_adversaries,
    run_adaptive, run_nonadaptive, AdaptiveMachine, NonAdaptiveProgram, Step,
};
use gapforge::hamiltonian::random_instance;
use gapforge::oracle::{enumerate_adversaries, sample_policies};
use gapforge::search::{GapDecisionMachine, LambdaSearchMachine, SearchConfig};
use gapforge::{
    Answer, AnswerPolicy, Error, OracleLog, OracleQuery, QueryKind, Result, SpectralGapInstance,
};
use proptest::prelude::*;

const A: f64 = 1.0 / 3.0;
const B: f64 = 2.0 / 3.0;

fn search_machine(value: f64, rounds: usize) -> LambdaSearchMachine {
    let cfg = SearchConfig::with_default_gamma(0.0, 1.0, 0.05).unwrap();
    LambdaSearchMachine::with_rounds(Arc::new(planted(value)), 1, cfg, rounds)
}

/// Outputs the oracle's answer on a query nobody can answer truthfully.
struct Liar;

impl AdaptiveMachine for Liar {
    fn q_max(&self) -> usize {
        1
    }

    fn step(&self, answers: &[Answer]) -> Result<Step> {
        Ok(match answers.first() {
            None => Step::Query(OracleQuery::new(
                QueryKind::GroundEnergy,
                Arc::new(planted(0.5)),
                A,
                B,
            )?),
            Some(a) => Step::Halt(*a),
        })
    }
}

fn outputs_agree<M: AdaptiveMachine>(
    machine: &M,
    program: &NonAdaptiveProgram,
    policy: &AnswerPolicy,
) -> bool {
    let adaptive = run_adaptive(machine, policy, &mut OracleLog::new()).unwrap();
    let flat = run_nonadaptive(program, policy, &mut OracleLog::new()).unwrap();
    adaptive == flat
}

#[test]
fn four_round_search_tree() {
    let machine = search_machine(0.37, 4);
    let tree = enumerate_paths(&machine).unwrap();
    assert_eq!(tree.internal_count(), 15);
    assert_eq!(tree.leaf_count(), 16);
    assert_eq!(tree.depth(), 4);
    let program = flatten(&machine).unwrap();
    assert_eq!(program.queries_before_dedup(), 15);
    assert!(program.queries().len() <= 15);
    assert!(program.table().len() <= 16);
}

#[test]
fn flattened_search_matches_adaptive_under_every_adversary() {
    for value in [0.0, 0.25, 0.5, 0.5 + 0.05 / 8.0, 0.75, 1.0] {
        let machine = search_machine(value, 4);
        let program = flatten(&machine).unwrap();
        let mut policies = enumerate_adversaries(program.queries()).unwrap();
        policies.extend([AnswerPolicy::AllYes, AnswerPolicy::AllNo]);
        for policy in &policies {
            assert!(
                outputs_agree(&machine, &program, policy),
                "value {value} {policy}"
            );
        }
    }
}

#[test]
fn flattened_gap_decision_matches_adaptive() {
    let inst = SpectralGapInstance::new(random_instance(2, 2, 3, 5).unwrap(), A, B, 2.0).unwrap();
    let cfg = SearchConfig::for_hamiltonian(&inst.hamiltonian, (B - A) / 4.0).unwrap();
    let machine = GapDecisionMachine::with_rounds(&inst, &cfg, 3);
    let program = flatten(&machine).unwrap();
    assert_eq!(program.queries_before_dedup(), (1 << 6) - 1);
    for policy in sample_policies(9, 40)
        .iter()
        .chain(&reachable_adversaries(&machine, 14).unwrap())
    {
        assert!(outputs_agree(&machine, &program, policy), "{policy}");
    }
}

#[test]
fn flattening_is_idempotent() {
    let machine = search_machine(0.5, 3);
    let once = flatten(&machine).unwrap();
    let twice = flatten(&once).unwrap();
    let fps = |p: &NonAdaptiveProgram| {
        p.queries()
            .iter()
            .map(|q| q.fingerprint())
            .collect::<Vec<_>>()
    };
    assert_eq!(fps(&once), fps(&twice));
    assert_eq!(once.table(), twice.table());
    for policy in enumerate_adversaries(once.queries()).unwrap() {
        let a = run_nonadaptive(&once, &policy, &mut OracleLog::new()).unwrap();
        let b = run_nonadaptive(&twice, &policy, &mut OracleLog::new()).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn liar_is_flagged_with_a_real_witness() {
    let report = check_robustness(&Liar).unwrap();
    assert!(!report.invariant_holds);
    let (p, q) = report.witness.expect("witness");
    let out_p = run_adaptive(&Liar, &p, &mut OracleLog::new()).unwrap();
    let out_q = run_adaptive(&Liar, &q, &mut OracleLog::new()).unwrap();
    assert_ne!(out_p, out_q);
}

#[test]
fn search_with_full_rounds_is_robust() {
    for value in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let cfg = SearchConfig::with_default_gamma(0.0, 1.0, 0.05).unwrap();
        let machine = LambdaSearchMachine::new(Arc::new(planted(value)), 1, cfg)
            .unwrap()
            .with_cutoff(0.2);
        let report = check_robustness(&machine).unwrap();
        assert!(report.invariant_holds, "value {value}");
        assert_eq!(report.output, Some(Answer::from_yes(value < 0.2)));
    }
}

/// Asks 15 distinct invalid queries, then ignores the answers.
struct Chatty;

impl AdaptiveMachine for Chatty {
    fn q_max(&self) -> usize {
        15
    }

    fn step(&self, answers: &[Answer]) -> Result<Step> {
        if answers.len() == 15 {
            return Ok(Step::Halt(Answer::Yes));
        }
        let value = 0.4 + 0.01 * answers.len() as f64;
        Ok(Step::Query(OracleQuery::new(
            QueryKind::GroundEnergy,
            Arc::new(planted(value)),
            A,
            B,
        )?))
    }
}

#[test]
fn past_the_cap_robustness_is_sampled() {
    assert!(matches!(
        check_robustness(&Chatty),
        Err(Error::TooManyInvalid { count: 15, cap: 14 })
    ));
    let report = check_robustness_sampled(&Chatty, 1, 100).unwrap();
    assert!(report.invariant_holds);
    assert_eq!(report.policies_checked, 102);
    assert_eq!(report.output, Some(Answer::Yes));
}

#[test]
fn too_deep_machines_are_rejected() {
    let machine = search_machine(0.3, 21);
    assert!(matches!(flatten(&machine), Err(Error::ConfigInvalid(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn dedup_never_exceeds_tree(value in 0.0..=1.0f64, rounds in 1..=5usize, seed in any::<u64>()) {
        let machine = search_machine(value, rounds);
        let program = flatten(&machine).unwrap();
        prop_assert!(program.queries().len() < (1 << rounds));
        prop_assert_eq!(program.queries_before_dedup(), (1 << rounds) - 1);
        prop_assert!(outputs_agree(&machine, &program, &AnswerPolicy::Seeded(seed)));
    }
}
