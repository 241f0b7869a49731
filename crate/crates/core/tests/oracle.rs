mod common;

use std::sync::Arc;

use common::planted;
use gapforge::oracle::{
    answer, enumerate_adversaries, enumerate_adversaries_capped, sample_policies,
};
use gapforge::spectrum::PromiseVerdict;
use gapforge::{Answer, AnswerPolicy, Error, OracleLog, OracleQuery, QueryKind};
use proptest::prelude::*;

const A: f64 = 1.0 / 3.0;
const B: f64 = 2.0 / 3.0;

fn ground(value: f64) -> OracleQuery {
    OracleQuery::new(QueryKind::GroundEnergy, Arc::new(planted(value)), A, B).unwrap()
}

/// Seven queries: four valid, three invalid (0.4, 0.5, 0.6 lie strictly inside the window).
fn mixed() -> Vec<OracleQuery> {
    [0.0, 0.4, 0.9, 0.5, 0.2, 0.6, 1.0]
        .into_iter()
        .map(ground)
        .collect()
}

#[test]
fn mixed_list_has_eight_adversaries_that_agree_on_valid_queries() {
    let queries = mixed();
    let truths: Vec<_> = queries.iter().map(|q| q.truth().unwrap()).collect();
    assert_eq!(
        truths
            .iter()
            .filter(|t| **t == PromiseVerdict::Invalid)
            .count(),
        3
    );

    let policies = enumerate_adversaries(&queries).unwrap();
    assert_eq!(policies.len(), 8);

    let mut invalid_patterns = Vec::new();
    for policy in &policies {
        let mut log = OracleLog::new();
        let first: Vec<Answer> = queries
            .iter()
            .map(|q| answer(q, policy, &mut log).unwrap())
            .collect();
        let second: Vec<Answer> = queries
            .iter()
            .map(|q| answer(q, policy, &mut log).unwrap())
            .collect();
        assert_eq!(first, second);
        assert!(log.is_consistent());
        assert_eq!(log.invalid_count(), 6);
        for (ans, truth) in first.iter().zip(&truths) {
            match truth {
                PromiseVerdict::Yes => assert_eq!(*ans, Answer::Yes),
                PromiseVerdict::No => assert_eq!(*ans, Answer::No),
                PromiseVerdict::Invalid => {}
            }
        }
        let pattern: Vec<Answer> = first
            .iter()
            .zip(&truths)
            .filter(|(_, t)| **t == PromiseVerdict::Invalid)
            .map(|(a, _)| *a)
            .collect();
        invalid_patterns.push(pattern);
    }
    invalid_patterns.sort();
    invalid_patterns.dedup();
    assert_eq!(invalid_patterns.len(), 8);
}

#[test]
fn adversary_cap_is_enforced() {
    let queries: Vec<_> = (1..=15).map(|i| ground(A + i as f64 * 0.02)).collect();
    assert!(queries
        .iter()
        .all(|q| q.truth().unwrap() == PromiseVerdict::Invalid));
    assert!(matches!(
        enumerate_adversaries(&queries),
        Err(Error::TooManyInvalid { count: 15, cap: 14 })
    ));
    assert_eq!(
        enumerate_adversaries_capped(&queries[..3], 3)
            .unwrap()
            .len(),
        8
    );
}

#[test]
fn excited_and_gap_queries_use_their_own_values() {
    // planted(0.1) has levels {0.1, 1}: gap 0.9, λ₂ = 1.
    let h = Arc::new(planted(0.1));
    let gap = OracleQuery::new(QueryKind::Gap, h.clone(), A, B).unwrap();
    assert_eq!(gap.truth().unwrap(), PromiseVerdict::No);
    let second = OracleQuery::new(QueryKind::ExcitedEnergy(2), h.clone(), A, B).unwrap();
    assert_eq!(second.truth().unwrap(), PromiseVerdict::No);
    let first = OracleQuery::new(QueryKind::GroundEnergy, h, A, B).unwrap();
    assert_eq!(first.truth().unwrap(), PromiseVerdict::Yes);
    let mut log = OracleLog::new();
    assert_eq!(
        answer(&gap, &AnswerPolicy::AllYes, &mut log).unwrap(),
        Answer::No
    );
}

#[test]
fn policies_parse_and_print() {
    for s in ["all-yes", "all-no", "seed:42"] {
        assert_eq!(s.parse::<AnswerPolicy>().unwrap().to_string(), s);
    }
    assert!(matches!(
        "sometimes".parse::<AnswerPolicy>(),
        Err(Error::Parse { .. })
    ));
}

proptest! {
    #[test]
    fn policies_answer_valid_queries_truthfully(value in 0.0..=1.0f64, seed in any::<u64>()) {
        let q = ground(value);
        let truth = q.truth().unwrap();
        for policy in [AnswerPolicy::AllYes, AnswerPolicy::AllNo, AnswerPolicy::Seeded(seed)] {
            let mut log = OracleLog::new();
            let a = answer(&q, &policy, &mut log).unwrap();
            prop_assert_eq!(answer(&q, &policy, &mut log).unwrap(), a);
            match truth {
                PromiseVerdict::Yes => prop_assert_eq!(a, Answer::Yes),
                PromiseVerdict::No => prop_assert_eq!(a, Answer::No),
                PromiseVerdict::Invalid => {}
            }
        }
    }

    #[test]
    fn sampled_policies_are_reproducible(seed in any::<u64>(), count in 0..50usize) {
        prop_assert_eq!(sample_policies(seed, count), sample_policies(seed, count));
    }
}
