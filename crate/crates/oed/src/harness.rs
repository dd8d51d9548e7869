//! Multi-run experiment orchestration: seeded run batches per
//! (problem, variant) cell, summary statistics, and pairwise Wilcoxon
//! rank-sum comparisons.
//!
//! Per-run seeds are derived as `base_seed ⊕ hash(problem, variant, run)`,
//! so adding problems or variants to a plan never perturbs the random
//! streams of existing cells. Cells and runs execute on a rayon pool whose
//! width can be capped with the `OED_THREADS` environment variable; engines
//! themselves stay sequential, so results are bit-for-bit reproducible
//! regardless of the pool size.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::criteria::CriterionKind;
use crate::engines::{run, EngineConfig, RunRecord, Variant};
use crate::error::{Error, Result};
use crate::models::get_problem;
use crate::objective::DesignObjective;

/// A batch of independent seeded runs over problems × variants.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    /// Registered problem ids to run.
    pub problem_ids: Vec<u32>,
    /// Criterion to minimize.
    pub criterion: CriterionKind,
    /// Engines to compare.
    pub variants: Vec<Variant>,
    /// Independent runs per cell.
    pub runs: usize,
    /// Per-problem budget overrides; unlisted problems use the defaults.
    pub fes_overrides: BTreeMap<u32, u64>,
    /// Base seed for the whole experiment.
    pub base_seed: u64,
}

impl ExperimentPlan {
    /// Plan with 25 runs per cell and default budgets.
    pub fn new(problem_ids: Vec<u32>, criterion: CriterionKind, variants: Vec<Variant>) -> Self {
        Self {
            problem_ids,
            criterion,
            variants,
            runs: 25,
            fes_overrides: BTreeMap::new(),
            base_seed: 0,
        }
    }

    /// Default evaluation budget: 10 000 for problems 1–7, 500 000 for 8–12.
    pub fn default_fes(problem_id: u32) -> u64 {
        if problem_id <= 7 {
            10_000
        } else {
            500_000
        }
    }

    /// Budget for one problem, honoring overrides.
    pub fn max_fes_for(&self, problem_id: u32) -> u64 {
        self.fes_overrides
            .get(&problem_id)
            .copied()
            .unwrap_or_else(|| Self::default_fes(problem_id))
    }

    /// Checks ids, run count, and duplicates.
    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::InvalidConfig("plan needs at least one run".into()));
        }
        if self.problem_ids.is_empty() || self.variants.is_empty() {
            return Err(Error::InvalidConfig(
                "plan needs at least one problem and one variant".into(),
            ));
        }
        for id in &self.problem_ids {
            get_problem(*id)?;
        }
        Ok(())
    }
}

/// Summary statistics over one cell's final criterion values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    /// Smallest final value.
    pub best: f64,
    /// Median final value.
    pub median: f64,
    /// Largest final value.
    pub worst: f64,
    /// Mean final value.
    pub mean: f64,
    /// Sample standard deviation (n − 1 divisor).
    pub std: f64,
    /// Mean wall-clock seconds per run.
    pub mean_time: f64,
}

impl SummaryRow {
    /// Computes the row from per-run final values and timings.
    pub fn from_finals(finals: &[f64], times: &[f64]) -> Self {
        assert!(!finals.is_empty());
        let n = finals.len() as f64;
        let mut sorted = finals.to_vec();
        sorted.sort_by(f64::total_cmp);
        let median = if sorted.len() % 2 == 1 {
            sorted[sorted.len() / 2]
        } else {
            0.5 * (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2])
        };
        let mean = finals.iter().sum::<f64>() / n;
        let std = if finals.len() < 2 {
            0.0
        } else {
            (finals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Self {
            best: sorted[0],
            median,
            worst: *sorted.last().unwrap(),
            mean,
            std,
            mean_time: times.iter().sum::<f64>() / times.len().max(1) as f64,
        }
    }
}

/// One (problem, variant) cell: its summary plus every run record.
#[derive(Debug, Clone)]
pub struct CellResult {
    /// Summary over the final values.
    pub summary: SummaryRow,
    /// Per-run records in run-index order.
    pub runs: Vec<RunRecord>,
}

impl CellResult {
    /// Final criterion values in run-index order.
    pub fn finals(&self) -> Vec<f64> {
        self.runs.iter().map(|r| r.best_value).collect()
    }
}

/// All cells of one executed plan.
#[derive(Debug, Clone)]
pub struct ExperimentResults {
    /// Cells keyed by (problem id, variant).
    pub cells: BTreeMap<(u32, Variant), CellResult>,
}

impl ExperimentResults {
    /// Looks up one cell.
    pub fn cell(&self, problem: u32, variant: Variant) -> Option<&CellResult> {
        self.cells.get(&(problem, variant))
    }
}

/// FNV-1a over the cell coordinates; stable across processes and platforms.
fn stable_cell_hash(problem: u32, variant: Variant, run_index: usize) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    let mut eat = |bytes: &[u8]| {
        for b in bytes {
            h ^= *b as u64;
            h = h.wrapping_mul(PRIME);
        }
    };
    eat(&problem.to_le_bytes());
    eat(variant.name().as_bytes());
    eat(&(run_index as u64).to_le_bytes());
    h
}

/// Seed for one run of one cell.
pub fn run_seed(base_seed: u64, problem: u32, variant: Variant, run_index: usize) -> u64 {
    base_seed ^ stable_cell_hash(problem, variant, run_index)
}

fn thread_pool() -> rayon::ThreadPool {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = std::env::var("OED_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|n| *n > 0)
    {
        builder = builder.num_threads(n);
    }
    builder.build().expect("rayon pool")
}

/// Executes every (problem, variant, run) of the plan on a work pool and
/// aggregates per-cell summaries.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<ExperimentResults> {
    plan.validate()?;

    let mut tasks = Vec::new();
    for &problem_id in &plan.problem_ids {
        for &variant in &plan.variants {
            for run_index in 0..plan.runs {
                tasks.push((problem_id, variant, run_index));
            }
        }
    }

    let criterion = plan.criterion;
    let records: Vec<((u32, Variant, usize), RunRecord)> = thread_pool().install(|| {
        tasks
            .par_iter()
            .map(|&(problem_id, variant, run_index)| {
                let problem = get_problem(problem_id)?;
                let objective = DesignObjective::with_default_repair(problem, criterion);
                let mut cfg = EngineConfig::new(variant, plan.max_fes_for(problem_id));
                cfg.seed = run_seed(plan.base_seed, problem_id, variant, run_index);
                let record = run(&objective, &cfg)?;
                Ok(((problem_id, variant, run_index), record))
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut grouped: BTreeMap<(u32, Variant), Vec<(usize, RunRecord)>> = BTreeMap::new();
    for ((problem_id, variant, run_index), record) in records {
        grouped
            .entry((problem_id, variant))
            .or_default()
            .push((run_index, record));
    }

    let mut cells = BTreeMap::new();
    for (key, mut runs) in grouped {
        runs.sort_by_key(|(idx, _)| *idx);
        let runs: Vec<RunRecord> = runs.into_iter().map(|(_, r)| r).collect();
        let finals: Vec<f64> = runs.iter().map(|r| r.best_value).collect();
        let times: Vec<f64> = runs.iter().map(|r| r.elapsed).collect();
        cells.insert(
            key,
            CellResult {
                summary: SummaryRow::from_finals(&finals, &times),
                runs,
            },
        );
    }

    Ok(ExperimentResults { cells })
}

/// Outcome of a two-sample comparison under minimization: `Minus` means the
/// second sample is significantly lower (better), `Plus` significantly
/// higher, `Equal` no significant difference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    /// `b` significantly better (lower).
    Minus,
    /// `b` significantly worse (higher).
    Plus,
    /// No significant difference.
    Equal,
}

/// Two-sided Wilcoxon rank-sum test with midrank ties, tie-corrected
/// variance, and a continuity-corrected normal approximation.
pub fn wilcoxon_rank_sum(a: &[f64], b: &[f64], alpha: f64) -> Outcome {
    assert!(!a.is_empty() && !b.is_empty(), "samples must be nonempty");
    let n1 = a.len() as f64;
    let n2 = b.len() as f64;
    let n = n1 + n2;

    // Midranks over the pooled sample.
    let mut pooled: Vec<(f64, bool)> = a
        .iter()
        .map(|v| (*v, true))
        .chain(b.iter().map(|v| (*v, false)))
        .collect();
    pooled.sort_by(|x, y| x.0.total_cmp(&y.0));

    let mut rank_sum_a = 0.0;
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i;
        while j < pooled.len() && pooled[j].0 == pooled[i].0 {
            j += 1;
        }
        let t = (j - i) as f64;
        let midrank = (i + 1 + j) as f64 / 2.0;
        for entry in &pooled[i..j] {
            if entry.1 {
                rank_sum_a += midrank;
            }
        }
        tie_term += t * t * t - t;
        i = j;
    }

    let u_a = rank_sum_a - n1 * (n1 + 1.0) / 2.0;
    let mean_u = n1 * n2 / 2.0;
    let var_u = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if var_u <= 0.0 {
        // Every pooled value identical: no rank separation possible.
        return Outcome::Equal;
    }

    let diff = u_a - mean_u;
    let z = (diff.abs() - 0.5).max(0.0) / var_u.sqrt();
    let normal = Normal::standard();
    let p = 2.0 * (1.0 - normal.cdf(z));

    if p >= alpha {
        Outcome::Equal
    } else if diff > 0.0 {
        // a's ranks dominate: a is larger, so b is lower (better).
        Outcome::Minus
    } else {
        Outcome::Plus
    }
}

/// Wilcoxon win/loss/tie counts for a target variant against another, one
/// test per problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonCell {
    /// Problems where the target is significantly worse.
    pub losses: usize,
    /// Problems where the target is significantly better.
    pub wins: usize,
    /// Problems with no significant difference.
    pub ties: usize,
}

impl std::fmt::Display for ComparisonCell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}/{}/{}]", self.losses, self.wins, self.ties)
    }
}

/// Aggregates per-problem rank tests of `target` against `other` at the
/// 0.05 level.
pub fn aggregate_comparison(
    results: &ExperimentResults,
    problem_ids: &[u32],
    target: Variant,
    other: Variant,
) -> Result<ComparisonCell> {
    let mut cell = ComparisonCell {
        losses: 0,
        wins: 0,
        ties: 0,
    };
    for &problem in problem_ids {
        let t = results
            .cell(problem, target)
            .ok_or_else(|| missing_cell(problem, target))?;
        let o = results
            .cell(problem, other)
            .ok_or_else(|| missing_cell(problem, other))?;
        match wilcoxon_rank_sum(&t.finals(), &o.finals(), 0.05) {
            Outcome::Minus => cell.losses += 1,
            Outcome::Plus => cell.wins += 1,
            Outcome::Equal => cell.ties += 1,
        }
    }
    Ok(cell)
}

fn missing_cell(problem: u32, variant: Variant) -> Error {
    Error::InvalidConfig(format!(
        "results are missing the ({problem}, {variant}) cell"
    ))
}
