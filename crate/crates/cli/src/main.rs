//! `fairdiv` — solve and verify fair-division problems that stay fair no
//! matter which share one absent, preference-unknown agent picks.
//!
//! Exit codes: 0 success (and `verify` pass), 1 failed verification or
//! self-test, 2 schema/parse/usage errors, 3 solver errors.

mod formats;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fairdiv::cake::CakeInstance;
use fairdiv::instance::{GoodsInstance, RentInstance};
use fairdiv::mms::{self, ThresholdMode};
use fairdiv::rat::{format_rat, parse_rat, rat, Rat};
use fairdiv::selftest;
use fairdiv::verify::{self, Verdict};
use formats::{InstanceFile, LoadedInstance, SolutionFile};

#[derive(Parser)]
#[command(
    name = "fairdiv",
    version,
    about = "Fair division that survives one agent keeping their preferences secret"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Price the rooms so every housemate gets a first choice, whoever sits out
    Rent {
        /// Instance file (JSON, type "rent")
        instance: PathBuf,
        /// Write the solution here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Allocate indivisible goods envy-free up to one good
    Ef1 {
        /// Instance file (JSON, type "goods")
        instance: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cut the cake so every agent is guaranteed a proportional piece
    CakeProp {
        /// Instance file (JSON, type "cake")
        instance: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cut the cake with envy bounded by an explicit epsilon
    CakeEf {
        /// Instance file (JSON, type "cake")
        instance: PathBuf,
        /// Envy bound, a rational in (0, 1], e.g. 1/4
        #[arg(long)]
        eps: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Allocate goods with a maximin-share guarantee
    Mms {
        /// Instance file (JSON, type "goods")
        instance: PathBuf,
        /// Guarantee 1/19 of each share (submodular) or 1/2 (additive)
        #[arg(long)]
        ratio: RatioArg,
        /// How per-agent share thresholds are obtained
        #[arg(long, value_enum, default_value = "exact")]
        thresholds: ThresholdsArg,
        /// Bisection rounds for --thresholds search
        #[arg(long)]
        rounds: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a solution file against its instance
    Verify {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        solution: PathBuf,
    },
    /// Run the acceptance suite
    Selftest {
        /// Seed for the random instance streams
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RatioArg {
    /// 1/19 guarantee for monotone submodular valuations
    #[value(name = "19")]
    Nineteenth,
    /// 1/2 guarantee for additive valuations
    #[value(name = "2")]
    Half,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum ThresholdsArg {
    /// Brute-force exact shares (instances must fit the enumeration budget)
    Exact,
    /// Bisection on thresholds, restarting below any flagged agent
    Search,
}

enum Failure {
    Schema(String),
    Solver { name: String, message: String },
}

fn schema<M: Into<String>>(msg: M) -> Failure {
    Failure::Schema(msg.into())
}

fn solver<E: fmt::Debug + fmt::Display>(e: E) -> Failure {
    let debug = format!("{e:?}");
    let name = debug
        .split(|c: char| c == ' ' || c == '(' || c == '{')
        .next()
        .unwrap_or("Error")
        .to_string();
    Failure::Solver { name, message: e.to_string() }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(Failure::Schema(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Solver { name, message }) => {
            eprintln!("solver error [{name}]: {message}");
            ExitCode::from(3)
        }
    }
}

fn load_instance(path: &Path) -> Result<LoadedInstance, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| schema(format!("{}: {e}", path.display())))?;
    let file: InstanceFile = serde_json::from_str(&text)
        .map_err(|e| schema(format!("{}: {e}", path.display())))?;
    file.build().map_err(|e| schema(format!("{}: {e}", path.display())))
}

fn expect_rent(inst: LoadedInstance) -> Result<RentInstance, Failure> {
    match inst {
        LoadedInstance::Rent(i) => Ok(i),
        other => Err(schema(format!("instance type \"{}\", need \"rent\"", other.type_name()))),
    }
}

fn expect_goods(inst: LoadedInstance) -> Result<GoodsInstance, Failure> {
    match inst {
        LoadedInstance::Goods(i) => Ok(i),
        other => Err(schema(format!("instance type \"{}\", need \"goods\"", other.type_name()))),
    }
}

fn expect_cake(inst: LoadedInstance) -> Result<CakeInstance, Failure> {
    match inst {
        LoadedInstance::Cake(i) => Ok(i),
        other => Err(schema(format!("instance type \"{}\", need \"cake\"", other.type_name()))),
    }
}

fn emit(solution: &SolutionFile, out: Option<PathBuf>) -> Result<ExitCode, Failure> {
    let mut text = serde_json::to_string_pretty(solution).expect("solutions serialize");
    text.push('\n');
    match out {
        Some(path) => fs::write(&path, text)
            .map_err(|e| schema(format!("{}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn report(verdict: &Verdict) -> ExitCode {
    if verdict.ok {
        println!("ok: fair for every choice of the absent agent");
        ExitCode::SUCCESS
    } else {
        let mut reasons = Vec::new();
        if let Some(k) = verdict.failing_choice {
            reasons.push(format!("no fair assignment when the absent agent takes part {k}"));
        }
        if let Some(s) = &verdict.failing_subset {
            let ids: Vec::<String> = s.iter().map(|a| a.to_string()).collect();
            reasons.push(format!("agents {{{}}} have too few acceptable parts", ids.join(", ")));
        }
        if reasons.is_empty() {
            reasons.push("fairness graph rejected".to_string());
        }
        println!("FAIL: {}", reasons.join("; "));
        ExitCode::from(1)
    }
}

fn parse_eps(text: &str) -> Result<Rat, Failure> {
    let eps = parse_rat(text).map_err(|e| schema(format!("--eps: {e}")))?;
    if eps <= rat(0) || eps > rat(1) {
        return Err(schema(format!("--eps must lie in (0, 1], got {}", format_rat(&eps))));
    }
    Ok(eps)
}

fn dispatch(command: Command) -> Result<ExitCode, Failure> {
    match command {
        Command::Rent { instance, out } => {
            let inst = expect_rent(load_instance(&instance)?)?;
            let sol = fairdiv::rent::solve_secretive_rent(&inst).map_err(solver)?;
            emit(&SolutionFile::from_rent(&inst, &sol), out)
        }
        Command::Ef1 { instance, out } => {
            let inst = expect_goods(load_instance(&instance)?)?;
            let sol = fairdiv::ef1::allocate_secretive_ef1(&inst).map_err(solver)?;
            emit(&SolutionFile::from_ef1(&inst, &sol), out)
        }
        Command::CakeProp { instance, out } => {
            let inst = expect_cake(load_instance(&instance)?)?;
            let sol = fairdiv::cake::secretive_proportional(&inst);
            emit(&SolutionFile::from_proportional(&inst, &sol), out)
        }
        Command::CakeEf { instance, eps, out } => {
            let inst = expect_cake(load_instance(&instance)?)?;
            let eps = parse_eps(&eps)?;
            let sol = fairdiv::cake::eps_ef_partition(&inst, &eps).map_err(solver)?;
            emit(&SolutionFile::from_eps_ef(&inst, &eps, &sol), out)
        }
        Command::Mms { instance, ratio, thresholds, rounds, out } => {
            let inst = expect_goods(load_instance(&instance)?)?;
            if thresholds == ThresholdsArg::Exact && rounds.is_some() {
                return Err(schema("--rounds requires --thresholds search"));
            }
            let sol = match ratio {
                RatioArg::Nineteenth => {
                    let mode = match thresholds {
                        ThresholdsArg::Exact => ThresholdMode::Exact,
                        ThresholdsArg::Search => ThresholdMode::Search {
                            rounds: rounds.unwrap_or(mms::DEFAULT_SEARCH_ROUNDS),
                        },
                    };
                    mms::threshold_search(&inst, mode).map_err(solver)?
                }
                RatioArg::Half => {
                    if thresholds == ThresholdsArg::Search {
                        return Err(schema(
                            "--thresholds search applies to --ratio 19; \
                             --ratio 2 uses exact brute-force shares",
                        ));
                    }
                    let taus = mms::exact_thresholds(&inst).map_err(solver)?;
                    mms::additive_half_mms(&inst, &taus).map_err(solver)?
                }
            };
            emit(&SolutionFile::from_mms(&inst, &sol), out)
        }
        Command::Verify { instance, solution } => {
            let inst = load_instance(&instance)?;
            let text = fs::read_to_string(&solution)
                .map_err(|e| schema(format!("{}: {e}", solution.display())))?;
            let sol: SolutionFile = serde_json::from_str(&text)
                .map_err(|e| schema(format!("{}: {e}", solution.display())))?;
            let verdict = run_verify(inst, &sol)?;
            Ok(report(&verdict))
        }
        Command::Selftest { seed } => {
            let reports = selftest::run_all(seed.unwrap_or(selftest::DEFAULT_SELFTEST_SEED));
            let mut all_pass = true;
            for r in &reports {
                println!("{}", r.line());
                all_pass &= r.pass;
            }
            Ok(if all_pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn run_verify(inst: LoadedInstance, sol: &SolutionFile) -> Result<Verdict, Failure> {
    match sol.kind.as_str() {
        "rent" => {
            let inst = expect_rent(inst)?;
            let prices = sol.price_vector().map_err(schema)?;
            if prices.prices.len() != inst.n {
                return Err(schema(format!(
                    "solution has {} prices, instance has {} rooms",
                    prices.prices.len(),
                    inst.n
                )));
            }
            Ok(verify::verify_secretive_rent(&inst, &prices))
        }
        "ef1" => {
            let inst = expect_goods(inst)?;
            let partition = sol.goods_partition(inst.m).map_err(schema)?;
            Ok(verify::verify_secretive_ef1(&inst, &partition))
        }
        "cake-prop" => {
            let inst = expect_cake(inst)?;
            let partition = sol.cake_partition().map_err(schema)?;
            Ok(verify::verify_secretive_proportional(&inst, &partition))
        }
        "cake-ef" => {
            let inst = expect_cake(inst)?;
            let partition = sol.cake_partition().map_err(schema)?;
            let eps = sol
                .meta
                .eps
                .as_ref()
                .ok_or_else(|| schema("cake-ef solution is missing \"meta.eps\""))?;
            Ok(verify::verify_secretive_eps_ef(&inst, &partition, &eps.0))
        }
        "mms" => {
            let inst = expect_goods(inst)?;
            let partition = sol.goods_partition(inst.m).map_err(schema)?;
            let ratio = sol
                .meta
                .ratio
                .as_ref()
                .ok_or_else(|| schema("mms solution is missing \"meta.ratio\""))?;
            verify::verify_secretive_mms(&inst, &partition, &ratio.0).map_err(solver)
        }
        other => Err(schema(format!("unknown solution kind \"{other}\""))),
    }
}
