//! `multibudget` — generate budgeted instances, run the approximation
//! schemes, and drive the verification sweeps.
//!
//! Exit codes: 0 success, 1 validation failure (or no feasible output),
//! 2 invariant violation, 3 resource bound exceeded.

mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use multibudget::instance::{GadgetKind, RandomGroundKind, RandomInstanceParams};
use multibudget::{BudgetedInstance, Error, Limits, Rat};

use report::{digest_of, RunReport};

#[derive(Parser)]
#[command(
    name = "multibudget",
    about = "Budgeted combinatorial optimization over exact rationals",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write an instance file (random or subset-sum gadget)
    Gen(GenArgs),
    /// Run a solver on an instance file and print a JSON report
    Solve(SolveArgs),
    /// Run a verification sweep with exact assertions
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GenKind {
    Uniform,
    Partition,
    Graphic,
    Linear,
    Matching,
    Forest,
    SpanningTree,
    PerfectMatching,
    Path,
    PartitionGadget,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GadgetGround {
    SpanningTree,
    PerfectMatching,
    Path,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: GenKind,
    /// Output path for the instance JSON
    #[arg(long)]
    out: PathBuf,
    /// Element count (random kinds)
    #[arg(long, default_value_t = 8)]
    m: usize,
    /// Budget count (random kinds)
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Node count for graph grounds (derived from m when omitted)
    #[arg(long)]
    nodes: Option<usize>,
    /// Budget position in the achievable range, e.g. 1/2 (random otherwise)
    #[arg(long)]
    budget_fraction: Option<String>,
    /// Comma-separated subset-sum values, e.g. 1,2,5/2 (gadget kind)
    #[arg(long)]
    partition_alphas: Option<String>,
    /// Subset-sum target (gadget kind)
    #[arg(long)]
    target: Option<String>,
    /// Ground family of the gadget
    #[arg(long, value_enum, default_value_t = GadgetGround::SpanningTree)]
    gadget_ground: GadgetGround,
    /// Length shift of the gadget; defaults to 1 + sum(alphas)
    #[arg(long)]
    shift: Option<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algorithm {
    MatroidPtas,
    MatchingPtas,
    Feasibilize,
    Brute,
}

#[derive(Args)]
struct SolveArgs {
    /// Instance JSON file
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    alg: Algorithm,
    /// Approximation parameter as a rational, e.g. 1/2
    #[arg(long)]
    eps: Option<String>,
    /// Also compute the brute-force optimum and the achieved ratio
    #[arg(long)]
    oracle: bool,
    /// Human-readable multi-line report instead of a JSON line
    #[arg(long)]
    pretty: bool,
    /// Write per-guess trace records as JSON lines
    #[arg(long)]
    trace_out: Option<PathBuf>,
    /// Threads for guess evaluation (deterministic merge)
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Include wall time in the report (breaks byte-reproducibility)
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// theorem4 | corollary5 | lemma7 | lemma11 | theorem6 | theorem2 |
    /// gadgets | determinism | all
    #[arg(long)]
    suite: String,
    /// Case count override (each suite has its own default volume)
    #[arg(long)]
    seeds: Option<usize>,
    #[arg(long)]
    pretty: bool,
}

fn parse_rat(s: &str, what: &str) -> Result<Rat, Error> {
    Rat::from_str(s)
        .map_err(|_| Error::InvalidParameter(format!("{what}: bad rational `{s}`")))
}

fn limits_from_env() -> Result<Limits, Error> {
    let mut limits = Limits::default();
    if let Ok(raw) = std::env::var("MB_BRUTE_BOUND") {
        let steps: u64 = raw.parse().map_err(|_| {
            Error::InvalidParameter(format!("MB_BRUTE_BOUND: bad integer `{raw}`"))
        })?;
        limits.enumeration_steps = steps;
    }
    Ok(limits)
}

fn cmd_gen(args: &GenArgs) -> Result<(), Error> {
    let limits = limits_from_env()?;
    let inst = match args.kind {
        GenKind::PartitionGadget => {
            let alphas_raw = args.partition_alphas.as_deref().ok_or_else(|| {
                Error::InvalidParameter("--partition-alphas is required for gadgets".into())
            })?;
            let alphas: Vec<Rat> = alphas_raw
                .split(',')
                .map(|s| parse_rat(s.trim(), "--partition-alphas"))
                .collect::<Result<_, _>>()?;
            let target = parse_rat(
                args.target.as_deref().ok_or_else(|| {
                    Error::InvalidParameter("--target is required for gadgets".into())
                })?,
                "--target",
            )?;
            let shift = args
                .shift
                .as_deref()
                .map(|s| parse_rat(s, "--shift"))
                .transpose()?;
            let kind = match args.gadget_ground {
                GadgetGround::SpanningTree => GadgetKind::SpanningTree,
                GadgetGround::PerfectMatching => GadgetKind::PerfectMatching,
                GadgetGround::Path => GadgetKind::Path,
            };
            multibudget::instance::partition_gadget(kind, &alphas, &target, shift)?
        }
        random => {
            let kind = match random {
                GenKind::Uniform => RandomGroundKind::Uniform,
                GenKind::Partition => RandomGroundKind::Partition,
                GenKind::Graphic => RandomGroundKind::Graphic,
                GenKind::Linear => RandomGroundKind::Linear,
                GenKind::Matching => RandomGroundKind::Matching,
                GenKind::Forest => RandomGroundKind::Forest,
                GenKind::SpanningTree => RandomGroundKind::SpanningTree,
                GenKind::PerfectMatching => RandomGroundKind::PerfectMatching,
                GenKind::Path => RandomGroundKind::Path,
                GenKind::PartitionGadget => unreachable!(),
            };
            let params = RandomInstanceParams {
                nodes: args.nodes,
                budget_fraction: args
                    .budget_fraction
                    .as_deref()
                    .map(|s| parse_rat(s, "--budget-fraction"))
                    .transpose()?,
                ..RandomInstanceParams::new(kind, args.m, args.k, args.seed)
            };
            multibudget::instance::random_instance(&params, &limits)?
        }
    };
    let json = inst.to_json();
    std::fs::write(&args.out, &json)?;
    println!(
        "{}",
        serde_json::json!({
            "path": args.out.display().to_string(),
            "digest": digest_of(&json),
            "m": inst.element_count(),
            "k": inst.budget_count(),
        })
    );
    Ok(())
}

/// Returns false when the run produced no feasible output.
fn cmd_solve(args: &SolveArgs) -> Result<bool, Error> {
    let limits = limits_from_env()?;
    let inst = BudgetedInstance::load(&args.input)?;
    let eps = args
        .eps
        .as_deref()
        .map(|s| parse_rat(s, "--eps"))
        .transpose()?;
    let need_eps = || {
        eps.clone()
            .ok_or_else(|| Error::InvalidParameter("--eps is required for this algorithm".into()))
    };
    let started = std::time::Instant::now();
    let mut trace_lines: Vec<String> = Vec::new();
    let (algorithm, output): (&str, Option<std::collections::BTreeSet<usize>>) = match args.alg
    {
        Algorithm::MatroidPtas => {
            let out =
                multibudget::matroid_ptas::solve_kbudget_matroid(&inst, &need_eps()?, &limits, args.jobs.max(1))?;
            for record in &out.records {
                trace_lines.push(serde_json::to_string(record)?);
            }
            ("matroid-ptas", Some(out.chosen))
        }
        Algorithm::MatchingPtas => {
            let out = multibudget::matching::solve_2budget_matching(
                &inst,
                &need_eps()?,
                &limits,
                args.jobs.max(1),
            )?;
            for record in &out.records {
                trace_lines.push(serde_json::to_string(record)?);
            }
            ("matching-ptas", Some(out.chosen))
        }
        Algorithm::Feasibilize => {
            let cfg = multibudget::feasibilize::FeasibilizeConfig::new(
                &need_eps()?,
                inst.budget_count(),
            )?;
            let out = multibudget::feasibilize::feasibilize(
                &inst,
                &cfg,
                &multibudget::feasibilize::ExactMultiCriteriaOracle,
                &limits,
            )?;
            for record in &out.records {
                trace_lines.push(serde_json::to_string(record)?);
            }
            ("feasibilize", Some(out.chosen))
        }
        Algorithm::Brute => {
            let best = multibudget::oracle::brute_opt(&inst, &limits)?;
            ("brute", best.map(|(_, witness)| witness))
        }
    };
    let wall_time_ms = started.elapsed().as_millis();

    let oracle_value = if args.oracle && args.alg != Algorithm::Brute {
        multibudget::oracle::brute_opt(&inst, &limits)?.map(|(v, _)| v)
    } else if args.alg == Algorithm::Brute {
        output
            .as_ref()
            .map(|witness| inst.weight_of(witness))
            .transpose()?
    } else {
        None
    };

    let report = RunReport::build(
        &inst,
        algorithm,
        eps.as_ref(),
        output.as_ref(),
        oracle_value.as_ref(),
        args.timing.then_some(wall_time_ms),
    )?;
    if let Some(path) = &args.trace_out {
        std::fs::write(path, trace_lines.join("\n") + "\n")?;
    }
    if args.pretty {
        println!("{}", report.pretty());
    } else {
        println!("{}", serde_json::to_string(&report)?);
    }
    Ok(report.feasible)
}

/// Returns false when any suite reported failures.
fn cmd_verify(args: &VerifyArgs) -> Result<bool, Error> {
    let limits = limits_from_env()?;
    let summaries = multibudget::verify::run_suite(&args.suite, args.seeds, &limits)?;
    let mut all_passed = true;
    for summary in &summaries {
        all_passed &= summary.passed();
        if args.pretty {
            println!(
                "suite {:<12} {:>5} cases  {:>6} checks  {}",
                summary.suite,
                summary.cases,
                summary.checks,
                if summary.passed() { "PASS" } else { "FAIL" }
            );
            for failure in &summary.failures {
                println!("  failure: {failure}");
            }
        } else {
            println!(
                "{}",
                serde_json::json!({
                    "suite": summary.suite,
                    "cases": summary.cases,
                    "checks": summary.checks,
                    "failures": summary.failures,
                    "passed": summary.passed(),
                })
            );
        }
    }
    Ok(all_passed)
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvariantViolation(_) | Error::SolverContract(_) => 2,
        Error::ResourceBound(_) | Error::IterationCap(_) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Gen(args) => cmd_gen(args).map(|()| true),
        Command::Solve(args) => cmd_solve(args),
        Command::Verify(args) => cmd_verify(args),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(match &cli.command {
            // failed verification sweeps are invariant violations
            Command::Verify(_) => 2,
            _ => 1,
        }),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
