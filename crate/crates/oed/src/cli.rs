//! Command-line surface behind the thin `oed` binary.
//!
//! Subcommands: `solve` (run one engine on one problem), `benchmark`
//! (multi-run plans with summary statistics and optional Wilcoxon
//! comparisons), `verify` (certify a design file), and `sensitivity-grid`
//! (export the sensitivity function on a grid).
//!
//! Exit codes: 0 success, 2 usage error, 3 I/O error, 4 numerical refusal
//! (singular information matrix).

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::criteria::{criterion_value, efficiency_bound, CriterionKind, GridSpec, SensitivityEvaluator};
use crate::design::{information_matrix, Design};
use crate::engines::{run, EngineConfig, Variant};
use crate::error::{Error, Result};
use crate::formats::{
    parse_id_list, parse_plan, sci6, DesignFile, OutputRecord, ProblemFile, TraceRow,
    VerifyOutput, SCHEMA_VERSION,
};
use crate::harness::{aggregate_comparison, run_experiment, run_seed, ExperimentPlan};
use crate::models::{get_problem, ProblemSpec};
use crate::objective::DesignObjective;

#[derive(Parser)]
#[command(
    name = "oed",
    version,
    about = "D- and A-optimal approximate designs via differential evolution"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one engine on one problem and print the certified best design.
    Solve(SolveArgs),
    /// Run a multi-run benchmark plan and print CSV summary statistics.
    Benchmark(BenchmarkArgs),
    /// Certify a design file via the equivalence theorem.
    Verify(VerifyArgs),
    /// Export the sensitivity function of a design on a coordinate grid.
    SensitivityGrid(GridArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Problem id (1..=12).
    #[arg(long)]
    problem: u32,
    /// Criterion: d or a.
    #[arg(long)]
    criterion: String,
    /// Engine: de-rand1, de-rand2, de-best1, de-best2, jade, code, shade, lshade.
    #[arg(long)]
    variant: String,
    /// Evaluation budget (default: 10000 for problems 1-7, 500000 for 8-12).
    #[arg(long)]
    fes: Option<u64>,
    /// RNG seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Merge threshold for near-duplicate support points
    /// (default: 2.5% of the space diameter).
    #[arg(long)]
    merge_eps: Option<f64>,
    /// Deletion threshold for small weights.
    #[arg(long)]
    min_weight: Option<f64>,
    /// Output format: json or csv.
    #[arg(long, default_value = "json")]
    out: String,
    /// Apply CoDE's third strategy with binomial crossover.
    #[arg(long)]
    code_third_bin: bool,
    /// JSON file overriding the problem's nominal θ and/or bounds.
    #[arg(long)]
    problem_file: Option<PathBuf>,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Plan file (flat key = value document).
    #[arg(long, conflicts_with_all = ["problems", "criterion", "variants"])]
    plan: Option<PathBuf>,
    /// Inline problem ids, e.g. 1-7 or 1,4,6.
    #[arg(long)]
    problems: Option<String>,
    /// Criterion: d or a.
    #[arg(long)]
    criterion: Option<String>,
    /// Comma-separated engine list.
    #[arg(long)]
    variants: Option<String>,
    /// Independent runs per cell.
    #[arg(long, default_value_t = 25)]
    runs: usize,
    /// Base seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Budget override applied to every listed problem.
    #[arg(long)]
    fes: Option<u64>,
    /// Append the pairwise Wilcoxon comparison matrix.
    #[arg(long)]
    compare: bool,
    /// Directory for per-run JSON-lines trace files.
    #[arg(long)]
    trace_dir: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Problem id (1..=12).
    #[arg(long)]
    problem: u32,
    /// Criterion: d or a.
    #[arg(long)]
    criterion: String,
    /// Design file to certify.
    #[arg(long)]
    design: PathBuf,
    /// JSON file overriding the problem's nominal θ and/or bounds.
    #[arg(long)]
    problem_file: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    /// Problem id (1..=12).
    #[arg(long)]
    problem: u32,
    /// Criterion: d or a.
    #[arg(long)]
    criterion: String,
    /// Design file to evaluate.
    #[arg(long)]
    design: PathBuf,
    /// Grid points per free factor (at least 2).
    #[arg(long)]
    resolution: usize,
    /// Fix factors for higher-dimensional problems, e.g. "x3=0.5,x4=1".
    #[arg(long)]
    slice: Option<String>,
    /// JSON file overriding the problem's nominal θ and/or bounds.
    #[arg(long)]
    problem_file: Option<PathBuf>,
}

/// Parses arguments, runs the selected command, and returns the process
/// exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.exit_code() == 0 { 0 } else { 2 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Solve(args) => cmd_solve(&args),
        Command::Benchmark(args) => cmd_benchmark(&args),
        Command::Verify(args) => cmd_verify(&args),
        Command::SensitivityGrid(args) => cmd_sensitivity_grid(&args),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Entry point for the binary.
pub fn main() -> i32 {
    main_with_args(std::env::args_os())
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => 3,
        Error::SingularInformation(_) => 4,
        _ => 2,
    }
}

fn load_problem(id: u32, file: &Option<PathBuf>) -> Result<ProblemSpec> {
    let problem = get_problem(id)?;
    match file {
        None => Ok(problem),
        Some(path) => {
            let file = ProblemFile::load(path)?;
            if file.problem != id {
                return Err(Error::InvalidConfig(format!(
                    "problem file targets id {}, command uses {}",
                    file.problem, id
                )));
            }
            problem.with_overrides(file.theta, file.lower, file.upper)
        }
    }
}

/// Positive-weight rows sorted by coordinates, for stable output.
fn sorted_support(design: &Design) -> Design {
    let mut rows: Vec<(Vec<f64>, f64)> = design
        .support()
        .map(|(p, w)| (p.to_vec(), w))
        .collect();
    rows.sort_by(|a, b| {
        a.0.iter()
            .zip(&b.0)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| *o != std::cmp::Ordering::Equal)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let (points, weights) = rows.into_iter().unzip();
    Design::new(points, weights).expect("support rows form a design")
}

fn cmd_solve(args: &SolveArgs) -> Result<()> {
    let kind: CriterionKind = args.criterion.parse()?;
    let variant: Variant = args.variant.parse()?;
    let problem = load_problem(args.problem, &args.problem_file)?;

    let mut repair_cfg = crate::encoding::RepairConfig::for_space(problem.space());
    if let Some(eps) = args.merge_eps {
        repair_cfg.merge_eps = eps;
    }
    if let Some(w) = args.min_weight {
        repair_cfg.min_weight = w;
    }

    let objective = DesignObjective::new(problem.clone(), kind, repair_cfg)?;
    let mut cfg = EngineConfig::new(
        variant,
        args.fes.unwrap_or_else(|| ExperimentPlan::default_fes(args.problem)),
    );
    cfg.seed = args.seed;
    cfg.params.code_third_bin = args.code_third_bin;

    let record = run(&objective, &cfg)?;
    let design = sorted_support(&objective.decode_design(&record.best_vector)?);
    let report = efficiency_bound(kind, &design, &problem, &GridSpec::for_space(problem.space()))?;

    let output = OutputRecord {
        schema_version: SCHEMA_VERSION.into(),
        problem: args.problem,
        criterion: kind,
        variant: variant.name().into(),
        design: DesignFile::from_design(&design),
        criterion_value: record.best_value,
        efficiency_bound: report.efficiency_lower_bound,
        seed: args.seed,
    };

    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match args.out.as_str() {
        "json" => writeln!(out, "{}", serde_json::to_string_pretty(&output)?)?,
        "csv" => {
            writeln!(
                out,
                "problem,criterion,variant,criterion_value,efficiency_bound,seed,points,weights"
            )?;
            let points = output
                .design
                .points
                .iter()
                .map(|p| {
                    p.iter()
                        .map(|x| sci6(*x))
                        .collect::<Vec<_>>()
                        .join(" ")
                })
                .collect::<Vec<_>>()
                .join(";");
            let weights = output
                .design
                .weights
                .iter()
                .map(|w| sci6(*w))
                .collect::<Vec<_>>()
                .join(";");
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                output.problem,
                output.criterion,
                output.variant,
                sci6(output.criterion_value),
                sci6(output.efficiency_bound),
                output.seed,
                points,
                weights
            )?;
        }
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown output format {other:?}; expected json or csv"
            )))
        }
    }
    Ok(())
}

fn benchmark_plan(args: &BenchmarkArgs) -> Result<ExperimentPlan> {
    if let Some(path) = &args.plan {
        let text = std::fs::read_to_string(path)?;
        return parse_plan(&text);
    }
    let problems = args
        .problems
        .as_deref()
        .ok_or_else(|| Error::InvalidConfig("benchmark needs --plan or --problems".into()))?;
    let criterion = args
        .criterion
        .as_deref()
        .ok_or_else(|| Error::InvalidConfig("benchmark needs --criterion".into()))?;
    let variants = args
        .variants
        .as_deref()
        .ok_or_else(|| Error::InvalidConfig("benchmark needs --variants".into()))?;

    let mut plan = ExperimentPlan::new(
        parse_id_list(problems)?,
        criterion.parse()?,
        variants
            .split(',')
            .map(|v| v.trim().parse())
            .collect::<Result<Vec<_>>>()?,
    );
    plan.runs = args.runs;
    plan.base_seed = args.seed;
    if let Some(fes) = args.fes {
        for id in &plan.problem_ids {
            plan.fes_overrides.insert(*id, fes);
        }
    }
    Ok(plan)
}

fn write_traces(dir: &Path, plan: &ExperimentPlan, results: &crate::harness::ExperimentResults) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for (&(problem, variant), cell) in &results.cells {
        let path = dir.join(format!(
            "trace_p{problem}_{}_{}.jsonl",
            plan.criterion.to_string().to_lowercase(),
            variant.name().to_lowercase()
        ));
        let mut file = std::fs::File::create(path)?;
        for (run_index, record) in cell.runs.iter().enumerate() {
            let row = TraceRow {
                problem,
                criterion: plan.criterion,
                variant: variant.name().into(),
                run: run_index,
                seed: run_seed(plan.base_seed, problem, variant, run_index),
                final_value: record.best_value,
                elapsed: record.elapsed,
                history: record.history.clone(),
            };
            writeln!(file, "{}", serde_json::to_string(&row)?)?;
        }
    }
    Ok(())
}

fn cmd_benchmark(args: &BenchmarkArgs) -> Result<()> {
    let plan = benchmark_plan(args)?;
    let results = run_experiment(&plan)?;

    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    writeln!(
        out,
        "problem,criterion,variant,best,median,worst,mean,std,mean_time"
    )?;
    for (&(problem, variant), cell) in &results.cells {
        let s = &cell.summary;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            problem,
            plan.criterion,
            variant.name(),
            sci6(s.best),
            sci6(s.median),
            sci6(s.worst),
            sci6(s.mean),
            sci6(s.std),
            sci6(s.mean_time)
        )?;
    }

    if args.compare {
        writeln!(out)?;
        let names: Vec<&str> = plan.variants.iter().map(|v| v.name()).collect();
        writeln!(out, "-/+/=,{}", names.join(","))?;
        for &target in &plan.variants {
            let mut cells = Vec::new();
            for &other in &plan.variants {
                let cell = aggregate_comparison(&results, &plan.problem_ids, target, other)?;
                cells.push(cell.to_string());
            }
            writeln!(out, "{},{}", target.name(), cells.join(","))?;
        }
    }

    if let Some(dir) = &args.trace_dir {
        write_traces(dir, &plan, &results)?;
    }
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> Result<()> {
    let kind: CriterionKind = args.criterion.parse()?;
    let problem = load_problem(args.problem, &args.problem_file)?;
    let design = DesignFile::load(&args.design)?.to_design()?;

    let report = efficiency_bound(kind, &design, &problem, &GridSpec::for_space(problem.space()))?;
    let output = VerifyOutput {
        schema_version: SCHEMA_VERSION.into(),
        problem: args.problem,
        criterion: kind,
        report,
    };
    println!("{}", serde_json::to_string_pretty(&output)?);
    Ok(())
}

/// Parses `"x3=0.5,x4=1"` into `(factor index, value)` pairs.
fn parse_slice(text: &str, n_factors: usize) -> Result<Vec<(usize, f64)>> {
    let mut fixed = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (name, value) = part.split_once('=').ok_or_else(|| {
            Error::InvalidConfig(format!("slice entry {part:?}: expected x<j>=<value>"))
        })?;
        let name = name.trim();
        let index: usize = name
            .strip_prefix('x')
            .and_then(|n| n.parse().ok())
            .ok_or_else(|| {
                Error::InvalidConfig(format!("slice entry {part:?}: expected x<j>=<value>"))
            })?;
        if index == 0 || index > n_factors {
            return Err(Error::InvalidConfig(format!(
                "slice factor {name} out of range 1..={n_factors}"
            )));
        }
        if fixed.iter().any(|(j, _)| *j == index - 1) {
            return Err(Error::InvalidConfig(format!("factor {name} fixed twice")));
        }
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("invalid slice value in {part:?}")))?;
        fixed.push((index - 1, value));
    }
    Ok(fixed)
}

fn cmd_sensitivity_grid(args: &GridArgs) -> Result<()> {
    let kind: CriterionKind = args.criterion.parse()?;
    let problem = load_problem(args.problem, &args.problem_file)?;
    let design = DesignFile::load(&args.design)?.to_design()?;

    if args.resolution < 2 {
        return Err(Error::InvalidConfig(format!(
            "resolution must be at least 2, got {}",
            args.resolution
        )));
    }

    let d = problem.space().n_factors();
    let fixed = match &args.slice {
        Some(text) => parse_slice(text, d)?,
        None => Vec::new(),
    };
    let free: Vec<usize> = (0..d).filter(|j| !fixed.iter().any(|(f, _)| f == j)).collect();
    if free.len() > 2 {
        return Err(Error::InvalidConfig(format!(
            "{} free factors; use --slice to fix all but at most 2",
            free.len()
        )));
    }

    let evaluator = SensitivityEvaluator::new(kind, &design, &problem)?;

    let mut base = vec![0.0; d];
    for (j, v) in &fixed {
        base[*j] = v.clamp(problem.space().lower()[*j], problem.space().upper()[*j]);
    }

    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let header: Vec<String> = (1..=d).map(|j| format!("x{j}")).collect();
    writeln!(out, "{},S", header.join(","))?;

    let r = args.resolution;
    let coord = |j: usize, t: usize| -> f64 {
        let lo = problem.space().lower()[j];
        let up = problem.space().upper()[j];
        lo + (up - lo) * t as f64 / (r - 1) as f64
    };

    let emit = |x: &[f64], out: &mut dyn Write| -> Result<()> {
        let s = evaluator.eval(x);
        let cells: Vec<String> = x.iter().map(|v| sci6(*v)).collect();
        writeln!(out, "{},{}", cells.join(","), sci6(s))?;
        Ok(())
    };

    match free.len() {
        0 => emit(&base, &mut out)?,
        1 => {
            for t in 0..r {
                let mut x = base.clone();
                x[free[0]] = coord(free[0], t);
                emit(&x, &mut out)?;
            }
        }
        _ => {
            // Row-major: the second free factor varies fastest.
            for t0 in 0..r {
                for t1 in 0..r {
                    let mut x = base.clone();
                    x[free[0]] = coord(free[0], t0);
                    x[free[1]] = coord(free[1], t1);
                    emit(&x, &mut out)?;
                }
            }
        }
    }
    Ok(())
}

/// Recompute a design's criterion value; used by examples and tests.
pub fn design_criterion(kind: CriterionKind, design: &Design, problem: &ProblemSpec) -> Result<f64> {
    Ok(criterion_value(kind, &information_matrix(design, problem)?))
}
