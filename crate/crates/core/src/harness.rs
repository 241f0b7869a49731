//! End-to-end verification pipeline.
//!
//! For each seeded k-LH instance: diagonalize, reduce under every requested
//! variant, compare the reduced gap against `min{λ₁, 1}`, check the block
//! structure and verdict preservation, then decide the reduced instance
//! through the promise oracle under several adversaries.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flatten::{check_robustness, check_robustness_sampled};
use crate::hamiltonian::{random_instance, KlhInstance};
use crate::limits;
use crate::oracle::{sample_policies, AnswerPolicy};
use crate::reduction::{block_spectrum, predicted_gap, reduce_klh_to_gap, ReductionVariant};
use crate::search::{decide_gap_via_oracle, GapDecisionMachine, SearchConfig};
use crate::spectrum::{
    decide_gap_truth, decide_klh_truth, eigenvalues, PromiseVerdict, SPECTRAL_TOL,
};

pub const KLH_A: f64 = 1.0 / 3.0;
pub const KLH_B: f64 = 2.0 / 3.0;

/// Bound on `λ₁(H')`, which the nullstate pins to zero.
pub const NULLSTATE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub n_list: Vec<usize>,
    pub instances_per_n: usize,
    pub seed: u64,
    pub k: usize,
    pub variants: Vec<ReductionVariant>,
    pub eps: f64,
    pub exhaustive_adversaries: bool,
    /// Seeded adversaries per oracle decision, on top of all-YES and all-NO.
    pub sampled_policies: usize,
    pub c: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            n_list: vec![2, 3, 4],
            instances_per_n: 10,
            seed: 1,
            k: 2,
            variants: ReductionVariant::ALL.to_vec(),
            eps: (KLH_B - KLH_A) / 4.0,
            exhaustive_adversaries: false,
            sampled_policies: 100,
            c: 2.0,
        }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::ConfigInvalid(msg));
        if self.n_list.is_empty() {
            return bad("n_list is empty".into());
        }
        if self.variants.is_empty() {
            return bad("no reduction variant selected".into());
        }
        for &n in &self.n_list {
            if n < self.k.max(1) {
                return bad(format!("n={n} is below the locality k={}", self.k));
            }
            if n + 1 > limits::n_max() {
                return bad(format!(
                    "n={n} needs {} qubits after reduction; cap is {}",
                    n + 1,
                    limits::n_max()
                ));
            }
        }
        let max_eps = (KLH_B - KLH_A) / 4.0;
        if !(self.eps > 0.0 && self.eps <= max_eps * (1.0 + 1e-12)) {
            return bad(format!("eps must lie in (0, {max_eps}], got {}", self.eps));
        }
        if !(self.c > 0.0) {
            return bad(format!("c must be positive, got {}", self.c));
        }
        Ok(())
    }
}

/// Seeded instance of the verification set: `m` terms on `n` qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct InstanceSpec {
    pub n: usize,
    pub index: usize,
    pub seed: u64,
    pub terms: usize,
}

/// Specs in order: all instances for `n_list[0]`, then `n_list[1]`, …
///
/// The term count is drawn from `1..=2n` so ground energies spread across
/// both sides of the promise window.
pub fn instance_specs(cfg: &VerifyConfig) -> Vec<InstanceSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut specs = Vec::new();
    for &n in &cfg.n_list {
        for index in 0..cfg.instances_per_n {
            let seed = rng.random();
            let terms = rng.random_range(1..=2 * n);
            specs.push(InstanceSpec {
                n,
                index,
                seed,
                terms,
            });
        }
    }
    specs
}

pub fn generate(spec: &InstanceSpec, cfg: &VerifyConfig) -> Result<KlhInstance> {
    let h = random_instance(spec.n, cfg.k, spec.terms, spec.seed)?;
    KlhInstance::new(h, KLH_A, KLH_B, cfg.c)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleRecord {
    pub answer: PromiseVerdict,
    pub policies_run: usize,
    pub mismatches: usize,
    pub max_queries: usize,
    pub query_bound: usize,
    pub robust: Option<bool>,
    pub robustness_policies: usize,
    /// Robustness was sampled because too many invalid queries were reachable.
    pub robustness_sampled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariantRecord {
    pub variant: ReductionVariant,
    pub gap: f64,
    pub ground_energy: f64,
    pub gap_deviation: f64,
    pub one_block_deviation: f64,
    pub merged_deviation: f64,
    pub isolated_nullstate: bool,
    pub gap_truth: PromiseVerdict,
    /// `None` for instances outside the promise.
    pub verdict_preserved: Option<bool>,
    pub oracle: Option<OracleRecord>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceRecord {
    #[serde(flatten)]
    pub spec: InstanceSpec,
    pub lambda1: f64,
    pub predicted_gap: f64,
    pub klh_truth: PromiseVerdict,
    pub on_promise: bool,
    pub variants: Vec<VariantRecord>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub records: usize,
    pub passed: usize,
    pub failed: usize,
    pub on_promise: usize,
    pub off_promise: usize,
    pub max_gap_deviation: f64,
    pub max_ground_energy: f64,
    pub max_block_deviation: f64,
    pub verdict_mismatches: usize,
    pub oracle_mismatches: usize,
    pub non_robust: usize,
}

impl Summary {
    pub fn from_records(records: &[InstanceRecord]) -> Self {
        let variants = || records.iter().flat_map(|r| r.variants.iter());
        let max = |f: fn(&VariantRecord) -> f64| variants().map(f).fold(0.0f64, f64::max);
        let passed = records.iter().filter(|r| r.passed).count();
        let on_promise = records.iter().filter(|r| r.on_promise).count();
        Self {
            records: records.len(),
            passed,
            failed: records.len() - passed,
            on_promise,
            off_promise: records.len() - on_promise,
            max_gap_deviation: max(|v| v.gap_deviation),
            max_ground_energy: max(|v| v.ground_energy.abs()),
            max_block_deviation: max(|v| v.one_block_deviation.max(v.merged_deviation)),
            verdict_mismatches: variants()
                .filter(|v| v.verdict_preserved == Some(false))
                .count(),
            oracle_mismatches: variants()
                .filter_map(|v| v.oracle.as_ref())
                .map(|o| o.mismatches)
                .sum(),
            non_robust: variants()
                .filter_map(|v| v.oracle.as_ref())
                .filter(|o| o.robust == Some(false))
                .count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub records: Vec<InstanceRecord>,
    pub summary: Summary,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }

    /// One JSON object per record, then `{"summary": …}`.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("record serializes"));
            out.push('\n');
        }
        #[derive(Serialize)]
        struct Tail<'a> {
            summary: &'a Summary,
        }
        out.push_str(
            &serde_json::to_string(&Tail {
                summary: &self.summary,
            })
            .expect("summary serializes"),
        );
        out.push('\n');
        out
    }

    pub fn summary_table(&self) -> String {
        let s = &self.summary;
        let mut out = String::new();
        out.push_str(&format!(
            "{:<4} {:>5} {:>14} {:>12} {:>8} {:>6}\n",
            "n", "idx", "lambda1", "max dev", "klh", "pass"
        ));
        for r in &self.records {
            let dev = r
                .variants
                .iter()
                .map(|v| v.gap_deviation)
                .fold(0.0f64, f64::max);
            out.push_str(&format!(
                "{:<4} {:>5} {:>14.9} {:>12.3e} {:>8} {:>6}\n",
                r.spec.n,
                r.spec.index,
                r.lambda1,
                dev,
                format!("{:?}", r.klh_truth),
                if r.passed { "ok" } else { "FAIL" }
            ));
        }
        out.push_str(&format!(
            "records {}  passed {}  failed {}  on-promise {}  off-promise {}\n",
            s.records, s.passed, s.failed, s.on_promise, s.off_promise
        ));
        out.push_str(&format!(
            "max |gap - min(l1,1)| {:.3e}  max |l1(H')| {:.3e}  max block dev {:.3e}\n",
            s.max_gap_deviation, s.max_ground_energy, s.max_block_deviation
        ));
        out.push_str(&format!(
            "verdict mismatches {}  oracle mismatches {}  non-robust {}\n",
            s.verdict_mismatches, s.oracle_mismatches, s.non_robust
        ));
        out
    }
}

/// Runs every check on every configured instance. Records come back in
/// spec order regardless of evaluation order.
pub fn run_verify(cfg: &VerifyConfig) -> Result<Report> {
    cfg.validate()?;
    let specs = instance_specs(cfg);
    let records = specs
        .par_iter()
        .map(|spec| verify_instance(spec, cfg))
        .collect::<Result<Vec<_>>>()?;
    let summary = Summary::from_records(&records);
    Ok(Report { records, summary })
}

pub fn verify_instance(spec: &InstanceSpec, cfg: &VerifyConfig) -> Result<InstanceRecord> {
    let inst = generate(spec, cfg)?;
    let lambda1 = eigenvalues(&inst.hamiltonian)?.ground_energy()?;
    let predicted = predicted_gap(&inst)?;
    let klh_truth = decide_klh_truth(&inst)?;
    let on_promise = klh_truth != PromiseVerdict::Invalid;
    let spectrum_h = eigenvalues(&inst.hamiltonian)?;

    let mut variants = Vec::with_capacity(cfg.variants.len());
    for &variant in &cfg.variants {
        let out = reduce_klh_to_gap(&inst, variant)?;
        let reduced = &out.instance;
        let spectrum_r = eigenvalues(&reduced.hamiltonian)?;
        let gap = spectrum_r.gap()?;
        let ground_energy = spectrum_r.ground_energy()?;
        let blocks = block_spectrum(&out, &inst.hamiltonian)?;
        let one_block_deviation = blocks.one_block.max_deviation(&spectrum_h)?;
        let merged_deviation = blocks.merged().max_deviation(&spectrum_r)?;
        let gap_truth = decide_gap_truth(reduced)?;
        let verdict_preserved = on_promise.then_some(gap_truth == klh_truth);

        let oracle = if on_promise {
            Some(oracle_checks(reduced, gap_truth, cfg)?)
        } else {
            None
        };

        let gap_deviation = (gap - predicted).abs();
        let passed = gap_deviation <= SPECTRAL_TOL
            && ground_energy.abs() <= NULLSTATE_TOL
            && one_block_deviation <= SPECTRAL_TOL
            && merged_deviation <= SPECTRAL_TOL
            && blocks.zero_block_has_isolated_nullstate()
            && verdict_preserved != Some(false)
            && oracle.as_ref().is_none_or(|o| {
                o.mismatches == 0 && o.max_queries <= o.query_bound && o.robust != Some(false)
            });
        variants.push(VariantRecord {
            variant,
            gap,
            ground_energy,
            gap_deviation,
            one_block_deviation,
            merged_deviation,
            isolated_nullstate: blocks.zero_block_has_isolated_nullstate(),
            gap_truth,
            verdict_preserved,
            oracle,
            passed,
        });
    }
    let passed = variants.iter().all(|v| v.passed);
    Ok(InstanceRecord {
        spec: *spec,
        lambda1,
        predicted_gap: predicted,
        klh_truth,
        on_promise,
        variants,
        passed,
    })
}

fn oracle_checks(
    reduced: &crate::hamiltonian::SpectralGapInstance,
    truth: PromiseVerdict,
    cfg: &VerifyConfig,
) -> Result<OracleRecord> {
    let search = SearchConfig::for_hamiltonian(&reduced.hamiltonian, cfg.eps)?;
    let mut policies = vec![AnswerPolicy::AllYes, AnswerPolicy::AllNo];
    policies.extend(sample_policies(cfg.seed, cfg.sampled_policies));

    let mut mismatches = 0;
    let mut max_queries = 0;
    for policy in &policies {
        let decision = decide_gap_via_oracle(reduced, &search, policy)?;
        max_queries = max_queries.max(decision.queries_used());
        if verdict_of(decision.answer) != truth {
            mismatches += 1;
        }
    }

    let (robust, robustness_policies, robustness_sampled) = if cfg.exhaustive_adversaries {
        let machine = GapDecisionMachine::new(reduced, &search)?;
        let (report, sampled) = match check_robustness(&machine) {
            Err(Error::TooManyInvalid { .. }) => (
                check_robustness_sampled(&machine, cfg.seed, limits::DEFAULT_SAMPLE_COUNT)?,
                true,
            ),
            other => (other?, false),
        };
        let agrees = report.output.map(verdict_of) == Some(truth);
        (
            Some(report.invariant_holds && agrees),
            report.policies_checked,
            sampled,
        )
    } else {
        (None, 0, false)
    };

    Ok(OracleRecord {
        answer: truth,
        policies_run: policies.len(),
        mismatches,
        max_queries,
        query_bound: 2 * search.query_bound(),
        robust,
        robustness_policies,
        robustness_sampled,
    })
}

fn verdict_of(answer: crate::oracle::Answer) -> PromiseVerdict {
    match answer {
        crate::oracle::Answer::Yes => PromiseVerdict::Yes,
        crate::oracle::Answer::No => PromiseVerdict::No,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(VerifyConfig::default().validate().is_ok());
        let bad_eps = VerifyConfig {
            eps: 0.2,
            ..VerifyConfig::default()
        };
        assert!(matches!(bad_eps.validate(), Err(Error::ConfigInvalid(_))));
        let too_small = VerifyConfig {
            n_list: vec![1],
            ..VerifyConfig::default()
        };
        assert!(too_small.validate().is_err());
        let too_big = VerifyConfig {
            n_list: vec![limits::n_max()],
            ..VerifyConfig::default()
        };
        assert!(too_big.validate().is_err());
    }

    #[test]
    fn specs_are_deterministic() {
        let cfg = VerifyConfig::default();
        assert_eq!(instance_specs(&cfg), instance_specs(&cfg));
        assert_eq!(instance_specs(&cfg).len(), 30);
    }

    #[test]
    fn single_record_run() {
        let cfg = VerifyConfig {
            n_list: vec![2],
            instances_per_n: 1,
            seed: 1,
            sampled_policies: 4,
            ..VerifyConfig::default()
        };
        let a = run_verify(&cfg).unwrap();
        assert_eq!(a.records.len(), 1);
        assert!(a.all_passed(), "{}", a.summary_table());
        let b = run_verify(&cfg).unwrap();
        assert_eq!(a.to_json_lines(), b.to_json_lines());
    }

    #[test]
    fn summary_matches_records() {
        let cfg = VerifyConfig {
            n_list: vec![2, 3],
            instances_per_n: 4,
            sampled_policies: 2,
            ..VerifyConfig::default()
        };
        let report = run_verify(&cfg).unwrap();
        assert_eq!(Summary::from_records(&report.records), report.summary);
        assert_eq!(report.summary.passed + report.summary.failed, 8);
    }
}
