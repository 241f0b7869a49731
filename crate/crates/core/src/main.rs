use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};

use gapforge::flatten::{
    check_robustness, check_robustness_sampled, flatten, AdaptiveMachine, RobustnessReport,
};
use gapforge::hamiltonian::{random_instance, KlhInstance};
use gapforge::harness::{run_verify, VerifyConfig, KLH_A, KLH_B};
use gapforge::io::{read_instance, render_instance, write_instance, InstanceFile};
use gapforge::limits::DEFAULT_SAMPLE_COUNT;
use gapforge::reduction::{reduce_klh_to_gap, ReductionVariant};
use gapforge::search::{
    decide_gap_via_oracle, GapDecisionMachine, LambdaSearchMachine, SearchConfig,
};
use gapforge::spectrum::{decide_gap_truth, decide_klh_truth, eigenvalues};
use gapforge::{AnswerPolicy, Error};

#[derive(Parser)]
#[command(
    name = "gapforge",
    version,
    about = "Spectral Gap reductions and promise-robust oracle search"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Global,
    Hamming,
    Both,
}

impl VariantArg {
    fn variants(self) -> Vec<ReductionVariant> {
        match self {
            VariantArg::Global => vec![ReductionVariant::GlobalProjector],
            VariantArg::Hamming => vec![ReductionVariant::HammingPenalty],
            VariantArg::Both => ReductionVariant::ALL.to_vec(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Problem {
    Gap,
    Klh,
}

#[derive(Clone, Copy, ValueEnum)]
enum Demo {
    /// Binary search for the ground energy, answering whether it lies below `a`.
    BinarySearch,
    /// Both searches of the gap decision, each cut to the given rounds.
    GapDecision,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded random k-LH instance.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Number of terms (default 2n).
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = KLH_A)]
        a: f64,
        #[arg(long, default_value_t = KLH_B)]
        b: f64,
        #[arg(short = 'c', long = "gap-exponent", default_value_t = 2.0)]
        c: f64,
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },
    /// Reduce a k-LH instance to a Spectral Gap instance.
    Reduce {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "global")]
        variant: VariantArg,
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },
    /// Print eigenvalues, the spectral gap, or one eigenvalue.
    Spectrum {
        input: PathBuf,
        #[arg(long, group = "what")]
        all: bool,
        #[arg(long, group = "what")]
        gap: bool,
        #[arg(long, group = "what", value_name = "C")]
        lambda: Option<usize>,
    },
    /// Ground-truth verdict by exact diagonalization.
    Decide {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "gap")]
        problem: Problem,
    },
    /// Decide Spectral Gap through the promise oracle with robust binary search.
    Search {
        input: PathBuf,
        /// Interval width per search (default (b − a)/4).
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value = "all-no")]
        policy: String,
        /// Also replay every reachable adversary and check the answer never changes.
        #[arg(long)]
        exhaustive: bool,
    },
    /// Flatten an adaptive demo machine into parallel queries.
    Flatten {
        #[arg(long, value_enum, default_value = "binary-search")]
        demo: Demo,
        #[arg(long, default_value_t = 4)]
        rounds: usize,
        input: PathBuf,
    },
    /// Run the verification pipeline over seeded instances.
    Verify {
        #[arg(long, value_delimiter = ',', default_values_t = vec![2, 3, 4])]
        n_list: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        instances: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum, default_value = "both")]
        variant: VariantArg,
        #[arg(long, default_value_t = (KLH_B - KLH_A) / 4.0)]
        eps: f64,
        #[arg(long)]
        exhaustive: bool,
        /// Seeded adversaries per oracle decision.
        #[arg(long, default_value_t = 100)]
        policies: usize,
        #[arg(short = 'c', long = "gap-exponent", default_value_t = 2.0)]
        c: f64,
        /// Write JSON-lines records here instead of standard output.
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },
}

enum Outcome {
    Pass,
    CheckFailed,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::CheckFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// `%.12g`-style formatting.
fn sig12(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{v:.11e}")
    }
}

fn emit(file: &InstanceFile, output: Option<&Path>) -> Result<(), Error> {
    match output {
        Some(path) => write_instance(file, path),
        None => {
            print!("{}", render_instance(file));
            Ok(())
        }
    }
}

/// Exhaustive robustness check, falling back to seeded sampling past the adversary cap.
fn robustness(machine: &dyn AdaptiveMachine) -> Result<RobustnessReport, Error> {
    match check_robustness(machine) {
        Err(Error::TooManyInvalid { count, cap }) => {
            log::warn!("{count} invalid queries exceed the cap of {cap}; sampling {DEFAULT_SAMPLE_COUNT} policies");
            check_robustness_sampled(machine, 0, DEFAULT_SAMPLE_COUNT)
        }
        other => other,
    }
}

fn run(command: Command) -> Result<Outcome, Error> {
    match command {
        Command::Gen {
            n,
            k,
            m,
            seed,
            a,
            b,
            c,
            output,
        } => {
            let h = random_instance(n, k, m.unwrap_or(2 * n), seed)?;
            let inst = KlhInstance::new(h, a, b, c)?;
            emit(&InstanceFile::from_klh(&inst), output.as_deref())?;
        }
        Command::Reduce {
            input,
            variant,
            output,
        } => {
            let inst = read_instance(&input)?.klh()?;
            let variant = match variant {
                VariantArg::Global => ReductionVariant::GlobalProjector,
                VariantArg::Hamming => ReductionVariant::HammingPenalty,
                VariantArg::Both => {
                    return Err(Error::ConfigInvalid("reduce takes a single variant".into()));
                }
            };
            let out = reduce_klh_to_gap(&inst, variant)?;
            emit(&InstanceFile::from_reduction(&out), output.as_deref())?;
        }
        Command::Spectrum {
            input, gap, lambda, ..
        } => {
            let file = read_instance(&input)?;
            let spectrum = eigenvalues(&file.hamiltonian)?;
            if gap {
                println!("{}", sig12(spectrum.gap()?));
            } else if let Some(c) = lambda {
                println!("{}", sig12(spectrum.lambda(c)?));
            } else {
                for v in spectrum.values() {
                    println!("{}", sig12(*v));
                }
            }
        }
        Command::Decide { input, problem } => {
            let file = read_instance(&input)?;
            let spectrum = eigenvalues(&file.hamiltonian)?;
            match problem {
                Problem::Gap => {
                    let verdict = decide_gap_truth(&file.gap()?)?;
                    println!("gap {}  verdict {verdict:?}", sig12(spectrum.gap()?));
                }
                Problem::Klh => {
                    let verdict = decide_klh_truth(&file.klh()?)?;
                    println!(
                        "lambda1 {}  verdict {verdict:?}",
                        sig12(spectrum.ground_energy()?)
                    );
                }
            }
        }
        Command::Search {
            input,
            eps,
            policy,
            exhaustive,
        } => {
            let inst = read_instance(&input)?.gap()?;
            let policy: AnswerPolicy = policy.parse()?;
            let cfg = SearchConfig::for_hamiltonian(
                &inst.hamiltonian,
                eps.unwrap_or((inst.b - inst.a) / 4.0),
            )?;
            let decision = decide_gap_via_oracle(&inst, &cfg, &policy)?;
            println!("decision {}", decision.answer);
            println!(
                "lambda1 in [{}, {}]",
                sig12(decision.ground.lower),
                sig12(decision.ground.upper)
            );
            println!(
                "lambda2 in [{}, {}]",
                sig12(decision.excited.lower),
                sig12(decision.excited.upper)
            );
            println!(
                "queries {} (bound {})",
                decision.queries_used(),
                2 * cfg.query_bound()
            );
            if exhaustive {
                let report = robustness(&GapDecisionMachine::new(&inst, &cfg)?)?;
                println!(
                    "robust {} over {} adversaries",
                    report.invariant_holds, report.policies_checked
                );
                if !report.invariant_holds {
                    return Ok(Outcome::CheckFailed);
                }
            }
        }
        Command::Flatten {
            demo,
            rounds,
            input,
        } => {
            let inst = read_instance(&input)?.gap()?;
            let cfg = SearchConfig::for_hamiltonian(&inst.hamiltonian, (inst.b - inst.a) / 4.0)?;
            let machine: Box<dyn AdaptiveMachine> = match demo {
                Demo::BinarySearch => Box::new(
                    LambdaSearchMachine::with_rounds(Arc::clone(&inst.hamiltonian), 1, cfg, rounds)
                        .with_cutoff(inst.a),
                ),
                Demo::GapDecision => Box::new(GapDecisionMachine::with_rounds(&inst, &cfg, rounds)),
            };
            let program = flatten(machine.as_ref())?;
            println!("q_max {}", machine.q_max());
            println!("queries before dedup {}", program.queries_before_dedup());
            println!("queries after dedup {}", program.queries().len());
            println!("table rows {}", program.table().len());
            let report = robustness(machine.as_ref())?;
            println!(
                "robust {} over {} adversaries",
                report.invariant_holds, report.policies_checked
            );
            if let Some((p, q)) = &report.witness {
                println!("witness {p} vs {q}");
            }
        }
        Command::Verify {
            n_list,
            instances,
            seed,
            variant,
            eps,
            exhaustive,
            policies,
            c,
            output,
        } => {
            let cfg = VerifyConfig {
                n_list,
                instances_per_n: instances,
                seed,
                variants: variant.variants(),
                eps,
                exhaustive_adversaries: exhaustive,
                sampled_policies: policies,
                c,
                ..VerifyConfig::default()
            };
            let report = run_verify(&cfg)?;
            let lines = report.to_json_lines();
            match output {
                Some(path) => std::fs::write(path, lines)?,
                None => print!("{lines}"),
            }
            print!("{}", report.summary_table());
            if !report.all_passed() {
                return Ok(Outcome::CheckFailed);
            }
        }
    }
    Ok(Outcome::Pass)
}
