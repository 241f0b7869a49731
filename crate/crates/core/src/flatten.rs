//! Adaptive-to-non-adaptive query flattening.
//!
//! A machine with at most `q` adaptive oracle queries has at most `2^q`
//! answer sequences. Expanding all of them yields every query the machine
//! could ever ask (at most `2^q − 1`), which can then be posed in one
//! parallel batch; the batch answers pick out the path the adaptive run
//! would have taken.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::limits;
use crate::oracle::{self, Answer, AnswerPolicy, Fingerprint, OracleLog, OracleQuery};
use crate::spectrum::PromiseVerdict;

/// What a machine does after seeing a prefix of oracle answers.
#[derive(Debug, Clone)]
pub enum Step {
    Query(OracleQuery),
    Halt(Answer),
}

/// A deterministic machine that asks oracle queries adaptively.
///
/// `step` receives the answers to all previous queries, in order, and must
/// be a pure function of them.
pub trait AdaptiveMachine {
    /// Maximum number of queries on any path.
    fn q_max(&self) -> usize;

    fn step(&self, answers: &[Answer]) -> Result<Step>;
}

/// Runs `machine` against the oracle, answering as `policy` dictates.
pub fn run_adaptive<M: AdaptiveMachine + ?Sized>(
    machine: &M,
    policy: &AnswerPolicy,
    log: &mut OracleLog,
) -> Result<Answer> {
    let mut answers = Vec::new();
    loop {
        match machine.step(&answers)? {
            Step::Halt(out) => return Ok(out),
            Step::Query(q) => {
                if answers.len() >= machine.q_max() {
                    return Err(Error::PathTooDeep {
                        q_max: machine.q_max(),
                    });
                }
                answers.push(oracle::answer(&q, policy, log)?);
            }
        }
    }
}

#[derive(Debug, Clone)]
pub enum PathNode {
    Query {
        query: OracleQuery,
        yes: usize,
        no: usize,
    },
    Leaf(Answer),
}

/// Every answer path of a machine, as a binary tree rooted at node 0.
#[derive(Debug, Clone)]
pub struct PathTree {
    nodes: Vec<PathNode>,
}

impl PathTree {
    pub fn nodes(&self) -> &[PathNode] {
        &self.nodes
    }

    pub fn internal_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, PathNode::Query { .. }))
            .count()
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.len() - self.internal_count()
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[PathNode], at: usize) -> usize {
            match &nodes[at] {
                PathNode::Leaf(_) => 0,
                PathNode::Query { yes, no, .. } => 1 + go(nodes, *yes).max(go(nodes, *no)),
            }
        }
        go(&self.nodes, 0)
    }

    pub fn queries(&self) -> impl Iterator<Item = &OracleQuery> {
        self.nodes.iter().filter_map(|n| match n {
            PathNode::Query { query, .. } => Some(query),
            PathNode::Leaf(_) => None,
        })
    }
}

/// Expands every answer path of `machine`.
pub fn enumerate_paths<M: AdaptiveMachine + ?Sized>(machine: &M) -> Result<PathTree> {
    let q_max = machine.q_max();
    if q_max > limits::Q_MAX_GUARD {
        return Err(Error::ConfigInvalid(format!(
            "q_max {q_max} exceeds the path enumeration guard {}",
            limits::Q_MAX_GUARD
        )));
    }
    let mut nodes = Vec::new();
    let mut prefix = Vec::with_capacity(q_max);
    expand(machine, &mut prefix, &mut nodes)?;
    Ok(PathTree { nodes })
}

fn expand<M: AdaptiveMachine + ?Sized>(
    machine: &M,
    prefix: &mut Vec<Answer>,
    nodes: &mut Vec<PathNode>,
) -> Result<usize> {
    let at = nodes.len();
    match machine.step(prefix)? {
        Step::Halt(out) => nodes.push(PathNode::Leaf(out)),
        Step::Query(query) => {
            if prefix.len() >= machine.q_max() {
                return Err(Error::PathTooDeep {
                    q_max: machine.q_max(),
                });
            }
            nodes.push(PathNode::Leaf(Answer::No)); // placeholder until children exist
            prefix.push(Answer::Yes);
            let yes = expand(machine, prefix, nodes)?;
            prefix.pop();
            prefix.push(Answer::No);
            let no = expand(machine, prefix, nodes)?;
            prefix.pop();
            nodes[at] = PathNode::Query { query, yes, no };
        }
    }
    Ok(at)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlatNode {
    Query { index: usize, yes: usize, no: usize },
    Leaf(Answer),
}

/// One reachable path: the answers it requires and the output it produces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableRow {
    pub constraints: Vec<(usize, Answer)>,
    pub output: Answer,
}

/// A machine's queries fixed in advance, with the decision tree that reads their answers.
#[derive(Debug, Clone)]
pub struct NonAdaptiveProgram {
    queries: Vec<OracleQuery>,
    nodes: Vec<FlatNode>,
    q_max: usize,
    queries_before_dedup: usize,
}

impl NonAdaptiveProgram {
    /// Deduplicated queries, in first-appearance (preorder) order.
    pub fn queries(&self) -> &[OracleQuery] {
        &self.queries
    }

    pub fn queries_before_dedup(&self) -> usize {
        self.queries_before_dedup
    }

    pub fn nodes(&self) -> &[FlatNode] {
        &self.nodes
    }

    /// Walks the tree reading each node's answer from `answers[query index]`.
    pub fn replay(&self, answers: &[Answer]) -> Result<Answer> {
        if answers.len() != self.queries.len() {
            return Err(Error::DimensionMismatch {
                expected: self.queries.len(),
                found: answers.len(),
            });
        }
        let mut at = 0;
        loop {
            match self.nodes[at] {
                FlatNode::Leaf(out) => return Ok(out),
                FlatNode::Query { index, yes, no } => {
                    at = if answers[index].is_yes() { yes } else { no };
                }
            }
        }
    }

    /// Truth table over reachable paths. Paths that would need one query
    /// answered both ways are dropped: no single oracle produces them.
    pub fn table(&self) -> Vec<TableRow> {
        let mut rows = Vec::new();
        let mut constraints = Vec::new();
        self.collect_rows(0, &mut constraints, &mut rows);
        rows
    }

    fn collect_rows(
        &self,
        at: usize,
        constraints: &mut Vec<(usize, Answer)>,
        rows: &mut Vec<TableRow>,
    ) {
        match self.nodes[at] {
            FlatNode::Leaf(output) => rows.push(TableRow {
                constraints: constraints.clone(),
                output,
            }),
            FlatNode::Query { index, yes, no } => {
                let fixed = constraints
                    .iter()
                    .find(|(i, _)| *i == index)
                    .map(|&(_, a)| a);
                for (ans, child) in [(Answer::Yes, yes), (Answer::No, no)] {
                    match fixed {
                        Some(prev) if prev != ans => {}
                        Some(_) => self.collect_rows(child, constraints, rows),
                        None => {
                            constraints.push((index, ans));
                            self.collect_rows(child, constraints, rows);
                            constraints.pop();
                        }
                    }
                }
            }
        }
    }
}

/// Replaying a program one query at a time makes it an adaptive machine again.
impl AdaptiveMachine for NonAdaptiveProgram {
    fn q_max(&self) -> usize {
        self.q_max
    }

    fn step(&self, answers: &[Answer]) -> Result<Step> {
        let mut at = 0;
        let mut seen = answers.iter();
        loop {
            match self.nodes[at] {
                FlatNode::Leaf(out) => return Ok(Step::Halt(out)),
                FlatNode::Query { index, yes, no } => match seen.next() {
                    None => return Ok(Step::Query(self.queries[index].clone())),
                    Some(a) => at = if a.is_yes() { yes } else { no },
                },
            }
        }
    }
}

/// Expands all paths and deduplicates their queries by fingerprint.
pub fn flatten<M: AdaptiveMachine + ?Sized>(machine: &M) -> Result<NonAdaptiveProgram> {
    let tree = enumerate_paths(machine)?;
    let mut index_of: HashMap<Fingerprint, usize> = HashMap::new();
    let mut queries = Vec::new();
    let nodes = tree
        .nodes
        .iter()
        .map(|node| match node {
            PathNode::Leaf(out) => FlatNode::Leaf(*out),
            PathNode::Query { query, yes, no } => {
                let index = *index_of.entry(query.fingerprint()).or_insert_with(|| {
                    queries.push(query.clone());
                    queries.len() - 1
                });
                FlatNode::Query {
                    index,
                    yes: *yes,
                    no: *no,
                }
            }
        })
        .collect();
    Ok(NonAdaptiveProgram {
        queries,
        nodes,
        q_max: machine.q_max(),
        queries_before_dedup: tree.internal_count(),
    })
}

/// Asks every query of `program` in one batch, then reads off the output.
pub fn run_nonadaptive(
    program: &NonAdaptiveProgram,
    policy: &AnswerPolicy,
    log: &mut OracleLog,
) -> Result<Answer> {
    let answers = program
        .queries
        .iter()
        .map(|q| oracle::answer(q, policy, log))
        .collect::<Result<Vec<_>>>()?;
    program.replay(&answers)
}

/// Adversary assignments for every invalid query the machine can actually
/// reach, one `Explicit` policy per consistent assignment.
///
/// The search follows truthful answers on valid queries and branches on the
/// first occurrence of each invalid one; a repeated query reuses its
/// assignment. Fails if more than `cap` distinct invalid queries are reachable.
pub fn reachable_adversaries<M: AdaptiveMachine + ?Sized>(
    machine: &M,
    cap: usize,
) -> Result<Vec<AnswerPolicy>> {
    let mut out = Vec::new();
    let mut distinct = Vec::new();
    let mut answers = Vec::new();
    let mut assignment = BTreeMap::new();
    explore(
        machine,
        cap,
        &mut answers,
        &mut assignment,
        &mut distinct,
        &mut out,
    )?;
    Ok(out)
}

fn explore<M: AdaptiveMachine + ?Sized>(
    machine: &M,
    cap: usize,
    answers: &mut Vec<Answer>,
    assignment: &mut BTreeMap<Fingerprint, Answer>,
    distinct: &mut Vec<Fingerprint>,
    out: &mut Vec<AnswerPolicy>,
) -> Result<()> {
    loop {
        let query = match machine.step(answers)? {
            Step::Halt(_) => {
                out.push(AnswerPolicy::Explicit(assignment.clone()));
                return Ok(());
            }
            Step::Query(q) => q,
        };
        if answers.len() >= machine.q_max() {
            return Err(Error::PathTooDeep {
                q_max: machine.q_max(),
            });
        }
        let next = match query.truth()? {
            PromiseVerdict::Yes => Answer::Yes,
            PromiseVerdict::No => Answer::No,
            PromiseVerdict::Invalid => match assignment.get(&query.fingerprint()) {
                Some(&a) => a,
                None => {
                    let fp = query.fingerprint();
                    if !distinct.contains(&fp) {
                        distinct.push(fp);
                        if distinct.len() > cap {
                            return Err(Error::TooManyInvalid {
                                count: distinct.len(),
                                cap,
                            });
                        }
                    }
                    let depth = answers.len();
                    for a in [Answer::Yes, Answer::No] {
                        assignment.insert(fp, a);
                        answers.push(a);
                        explore(machine, cap, answers, assignment, distinct, out)?;
                        answers.truncate(depth);
                    }
                    assignment.remove(&fp);
                    return Ok(());
                }
            },
        };
        answers.push(next);
    }
}

/// Whether a machine's output is independent of how invalid queries are answered.
#[derive(Debug, Clone)]
pub struct RobustnessReport {
    pub invariant_holds: bool,
    /// Two policies under which the machine outputs differ.
    pub witness: Option<(AnswerPolicy, AnswerPolicy)>,
    pub policies_checked: usize,
    /// Output shared by every policy, when the invariant holds.
    pub output: Option<Answer>,
}

pub fn check_robustness<M: AdaptiveMachine + ?Sized>(machine: &M) -> Result<RobustnessReport> {
    check_robustness_capped(machine, limits::ADVERSARY_CAP)
}

/// Runs the machine under every reachable adversary and compares outputs.
pub fn check_robustness_capped<M: AdaptiveMachine + ?Sized>(
    machine: &M,
    cap: usize,
) -> Result<RobustnessReport> {
    let run = |policy: &AnswerPolicy| run_adaptive(machine, policy, &mut OracleLog::new());

    let yes = run(&AnswerPolicy::AllYes)?;
    let no = run(&AnswerPolicy::AllNo)?;
    if yes != no {
        return Ok(RobustnessReport {
            invariant_holds: false,
            witness: Some((AnswerPolicy::AllYes, AnswerPolicy::AllNo)),
            policies_checked: 2,
            output: None,
        });
    }

    let policies = reachable_adversaries(machine, cap)?;
    let mut checked = 2;
    for policy in &policies {
        checked += 1;
        if run(policy)? != yes {
            return Ok(RobustnessReport {
                invariant_holds: false,
                witness: Some((AnswerPolicy::AllYes, policy.clone())),
                policies_checked: checked,
                output: None,
            });
        }
    }
    Ok(RobustnessReport {
        invariant_holds: true,
        witness: None,
        policies_checked: checked,
        output: Some(yes),
    })
}

/// Sampled stand-in for [`check_robustness`] when too many invalid queries are
/// reachable: compares the outputs under `AllYes`, `AllNo` and `count` seeded policies.
pub fn check_robustness_sampled<M: AdaptiveMachine + ?Sized>(
    machine: &M,
    seed: u64,
    count: usize,
) -> Result<RobustnessReport> {
    let reference = run_adaptive(machine, &AnswerPolicy::AllYes, &mut OracleLog::new())?;
    let policies = std::iter::once(AnswerPolicy::AllNo).chain(oracle::sample_policies(seed, count));
    let mut checked = 1;
    for policy in policies {
        checked += 1;
        if run_adaptive(machine, &policy, &mut OracleLog::new())? != reference {
            return Ok(RobustnessReport {
                invariant_holds: false,
                witness: Some((AnswerPolicy::AllYes, policy)),
                policies_checked: checked,
                output: None,
            });
        }
    }
    Ok(RobustnessReport {
        invariant_holds: true,
        witness: None,
        policies_checked: checked,
        output: Some(reference),
    })
}
