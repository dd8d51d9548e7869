//! Differential-evolution engines: the four classic strategies plus the
//! adaptive variants JADE, CoDE, SHADE, and LSHADE.
//!
//! All engines minimize a total objective over flat real vectors. Feasibility
//! is delegated to the objective's repair operator, which every engine applies
//! to the initial population and to each trial vector before evaluation; no
//! additional boundary handling is performed on donor vectors.
//!
//! A single run is sequential (the adaptive memories are loop-carried), and
//! fully determined by its seed. Distinct runs are independent and safe to
//! execute in parallel.
//!
//! References: Storn & Price (1997); Zhang & Sanderson (2009, JADE);
//! Wang, Cai & Zhang (2011, CoDE); Tanabe & Fukunaga (2013, SHADE; 2014,
//! LSHADE).

mod classic;
mod code;
mod jade;
mod shade;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Cauchy, Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Search target for the engines. Implementations must be total: infeasible
/// or degenerate vectors map to penalty values, never to panics or errors.
pub trait Objective: Sync {
    /// Vector length.
    fn dim(&self) -> usize;
    /// Per-gene lower bounds used for initialization.
    fn lower(&self) -> &[f64];
    /// Per-gene upper bounds used for initialization.
    fn upper(&self) -> &[f64];
    /// Feasibility repair, applied before every evaluation.
    fn repair(&self, v: &mut [f64]);
    /// Objective value to minimize.
    fn value(&self, v: &[f64]) -> f64;
}

/// Engine selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    /// Classic DE with the rand/1 mutation.
    DeRand1,
    /// Classic DE with the rand/2 mutation.
    DeRand2,
    /// Classic DE with the best/1 mutation.
    DeBest1,
    /// Classic DE with the best/2 mutation.
    DeBest2,
    /// Adaptive μ-parameters with archive (current-to-pbest/1).
    Jade,
    /// Composite DE: three strategies and a control-parameter pool.
    Code,
    /// Success-history parameter adaptation.
    Shade,
    /// SHADE with linear population-size reduction.
    Lshade,
}

impl Variant {
    /// All registered variants, in canonical order.
    pub fn all() -> [Variant; 8] {
        [
            Variant::DeRand1,
            Variant::DeRand2,
            Variant::DeBest1,
            Variant::DeBest2,
            Variant::Jade,
            Variant::Code,
            Variant::Shade,
            Variant::Lshade,
        ]
    }

    /// Canonical display name.
    pub fn name(self) -> &'static str {
        match self {
            Variant::DeRand1 => "DE-rand1",
            Variant::DeRand2 => "DE-rand2",
            Variant::DeBest1 => "DE-best1",
            Variant::DeBest2 => "DE-best2",
            Variant::Jade => "JADE",
            Variant::Code => "CoDE",
            Variant::Shade => "SHADE",
            Variant::Lshade => "LSHADE",
        }
    }

    /// Smallest population the variant's mutation arity allows.
    fn min_population(self) -> usize {
        match self {
            Variant::DeRand1 => 4,
            Variant::DeRand2 | Variant::Code => 6,
            Variant::DeBest1 => 3,
            Variant::DeBest2 => 5,
            Variant::Jade | Variant::Shade | Variant::Lshade => 4,
        }
    }

    /// Publication defaults for the adaptive parameters.
    pub fn default_params(self) -> VariantParams {
        match self {
            Variant::Jade => VariantParams {
                p_best_frac: 0.05,
                c: 0.1,
                ..VariantParams::base()
            },
            Variant::Shade => VariantParams {
                p_best_frac: 0.11,
                history_size: 0, // resolved to NP at run time
                ..VariantParams::base()
            },
            Variant::Lshade => VariantParams {
                p_best_frac: 0.11,
                history_size: 6,
                np_min: 4,
                ..VariantParams::base()
            },
            _ => VariantParams::base(),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "de-rand1" | "rand1" => Ok(Variant::DeRand1),
            "de-rand2" | "rand2" => Ok(Variant::DeRand2),
            "de-best1" | "best1" => Ok(Variant::DeBest1),
            "de-best2" | "best2" => Ok(Variant::DeBest2),
            "jade" => Ok(Variant::Jade),
            "code" => Ok(Variant::Code),
            "shade" => Ok(Variant::Shade),
            "lshade" => Ok(Variant::Lshade),
            other => Err(Error::InvalidConfig(format!(
                "unknown variant {other:?}; expected one of de-rand1, de-rand2, de-best1, \
                 de-best2, jade, code, shade, lshade"
            ))),
        }
    }
}

/// Adaptive-variant parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariantParams {
    /// Fraction of the population eligible as `pbest` (at least 2 candidates).
    pub p_best_frac: f64,
    /// JADE adaptation rate for μ_F and μ_CR.
    pub c: f64,
    /// SHADE/LSHADE history slots `H`; 0 means "equal to the population size".
    pub history_size: usize,
    /// LSHADE terminal population size.
    pub np_min: usize,
    /// Archive capacity as a multiple of the current population size.
    pub archive_rate: f64,
    /// Apply binomial crossover to CoDE's current-to-rand/1 candidates
    /// instead of the rotation-invariant arithmetic recombination.
    pub code_third_bin: bool,
}

impl VariantParams {
    fn base() -> Self {
        Self {
            p_best_frac: 0.11,
            c: 0.1,
            history_size: 0,
            np_min: 4,
            archive_rate: 1.0,
            code_third_bin: false,
        }
    }
}

/// Engine configuration. `f` and `cr` apply to the classic strategies only;
/// the adaptive variants sample their own parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    /// Which engine to run.
    pub variant: Variant,
    /// Initial population size.
    pub np_init: usize,
    /// Evaluation budget.
    pub max_fes: u64,
    /// Classic scaling factor.
    pub f: f64,
    /// Classic crossover probability.
    pub cr: f64,
    /// RNG seed; identical configs and seeds reproduce runs bit for bit.
    pub seed: u64,
    /// Adaptive-variant parameters.
    pub params: VariantParams,
}

impl EngineConfig {
    /// Config with the variant's publication defaults, `np_init = 50`,
    /// `F = 0.5`, `CR = 0.9`, seed 0.
    pub fn new(variant: Variant, max_fes: u64) -> Self {
        Self {
            variant,
            np_init: 50,
            max_fes,
            f: 0.5,
            cr: 0.9,
            seed: 0,
            params: variant.default_params(),
        }
    }

    /// Checks population, budget, and parameter ranges.
    pub fn validate(&self) -> Result<()> {
        if self.np_init < 4 {
            return Err(Error::InvalidConfig(format!(
                "np_init must be at least 4, got {}",
                self.np_init
            )));
        }
        if self.np_init < self.variant.min_population() {
            return Err(Error::InvalidConfig(format!(
                "{} needs a population of at least {}, got {}",
                self.variant,
                self.variant.min_population(),
                self.np_init
            )));
        }
        if self.max_fes < self.np_init as u64 {
            return Err(Error::InvalidConfig(format!(
                "max_fes {} is below the initial population size {}",
                self.max_fes, self.np_init
            )));
        }
        if !(self.f > 0.0 && self.f <= 2.0) {
            return Err(Error::InvalidConfig(format!("F must be in (0, 2], got {}", self.f)));
        }
        if !(0.0..=1.0).contains(&self.cr) {
            return Err(Error::InvalidConfig(format!("CR must be in [0, 1], got {}", self.cr)));
        }
        let p = &self.params;
        if !(p.p_best_frac > 0.0 && p.p_best_frac <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "p_best_frac must be in (0, 1], got {}",
                p.p_best_frac
            )));
        }
        if !(0.0..=1.0).contains(&p.c) {
            return Err(Error::InvalidConfig(format!("c must be in [0, 1], got {}", p.c)));
        }
        if self.variant == Variant::Lshade && (p.np_min < 4 || p.np_min > self.np_init) {
            return Err(Error::InvalidConfig(format!(
                "np_min must lie in [4, np_init], got {}",
                p.np_min
            )));
        }
        if !(p.archive_rate > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "archive_rate must be positive, got {}",
                p.archive_rate
            )));
        }
        Ok(())
    }
}

/// Outcome of one engine run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    /// Best repaired vector ever evaluated.
    pub best_vector: Vec<f64>,
    /// Its objective value.
    pub best_value: f64,
    /// `(FES, best value so far)` checkpoints, nonincreasing in the value.
    pub history: Vec<(u64, f64)>,
    /// Seed the run was executed with.
    pub seed: u64,
    /// Wall-clock seconds.
    pub elapsed: f64,
}

/// Adaptive state shared by the JADE/SHADE/LSHADE family.
///
/// Invariants: every stored F lies in (0, 1]; `m_cr` entries are either a
/// value in [0, 1] or the terminal marker (`None`); the archive never exceeds
/// its capacity; the slot index cycles within the history length.
#[derive(Debug, Clone)]
pub struct ParamMemory {
    /// JADE location parameter for F.
    pub mu_f: f64,
    /// JADE location parameter for CR.
    pub mu_cr: f64,
    /// SHADE/LSHADE F memory slots.
    pub m_f: Vec<f64>,
    /// SHADE/LSHADE CR memory slots; `None` is the terminal marker.
    pub m_cr: Vec<Option<f64>>,
    /// Next slot to overwrite.
    pub k: usize,
    /// Replaced parents available to the current-to-pbest mutation.
    pub archive: Vec<Vec<f64>>,
}

impl ParamMemory {
    fn new(history: usize) -> Self {
        Self {
            mu_f: 0.5,
            mu_cr: 0.5,
            m_f: vec![0.5; history.max(1)],
            m_cr: vec![Some(0.5); history.max(1)],
            k: 0,
            archive: Vec::new(),
        }
    }

    /// Inserts a replaced parent, randomly evicting entries beyond `cap`.
    fn push_archive(&mut self, parent: Vec<f64>, cap: usize, rng: &mut ChaCha8Rng) {
        self.archive.push(parent);
        while self.archive.len() > cap {
            let victim = rng.random_range(0..self.archive.len());
            self.archive.swap_remove(victim);
        }
        debug_assert!(self.archive.len() <= cap);
    }

    /// Shrinks the archive to `cap` by random eviction.
    fn trim_archive(&mut self, cap: usize, rng: &mut ChaCha8Rng) {
        while self.archive.len() > cap {
            let victim = rng.random_range(0..self.archive.len());
            self.archive.swap_remove(victim);
        }
    }
}

/// Classic mutation strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MutationStrategy {
    /// `v = x_{r1} + F(x_{r2} − x_{r3})`
    Rand1,
    /// `v = x_{r1} + F(x_{r2} − x_{r3}) + F(x_{r4} − x_{r5})`
    Rand2,
    /// `v = x_best + F(x_{r1} − x_{r2})`
    Best1,
    /// `v = x_best + F(x_{r1} − x_{r2}) + F(x_{r3} − x_{r4})`
    Best2,
}

impl MutationStrategy {
    /// Number of distinct random indices the formula consumes.
    pub fn arity(self) -> usize {
        match self {
            MutationStrategy::Rand1 => 3,
            MutationStrategy::Rand2 => 5,
            MutationStrategy::Best1 => 2,
            MutationStrategy::Best2 => 4,
        }
    }
}

/// Applies a classic mutation formula. `indices` must hold at least
/// [`MutationStrategy::arity`] mutually distinct population indices, all
/// distinct from the target.
pub fn mutate(
    strategy: MutationStrategy,
    population: &[Vec<f64>],
    best: usize,
    indices: &[usize],
    f: f64,
) -> Result<Vec<f64>> {
    if indices.len() < strategy.arity() {
        return Err(Error::InvalidConfig(format!(
            "{strategy:?} needs {} indices, got {}",
            strategy.arity(),
            indices.len()
        )));
    }
    let x = |r: usize| -> &[f64] { &population[indices[r]] };
    let dim = population[0].len();
    let mut v = Vec::with_capacity(dim);
    match strategy {
        MutationStrategy::Rand1 => {
            for j in 0..dim {
                v.push(x(0)[j] + f * (x(1)[j] - x(2)[j]));
            }
        }
        MutationStrategy::Rand2 => {
            for j in 0..dim {
                v.push(x(0)[j] + f * (x(1)[j] - x(2)[j]) + f * (x(3)[j] - x(4)[j]));
            }
        }
        MutationStrategy::Best1 => {
            let b = &population[best];
            for j in 0..dim {
                v.push(b[j] + f * (x(0)[j] - x(1)[j]));
            }
        }
        MutationStrategy::Best2 => {
            let b = &population[best];
            for j in 0..dim {
                v.push(b[j] + f * (x(0)[j] - x(1)[j]) + f * (x(2)[j] - x(3)[j]));
            }
        }
    }
    Ok(v)
}

/// `v = x_i + F(x_pbest − x_i) + F(x_{r1} − x̃_{r2})`, where `x̃_{r2}` may
/// come from the population or the archive.
pub fn mutate_current_to_pbest(
    target: &[f64],
    pbest: &[f64],
    r1: &[f64],
    r2: &[f64],
    f: f64,
) -> Vec<f64> {
    target
        .iter()
        .zip(pbest)
        .zip(r1.iter().zip(r2))
        .map(|((x, pb), (a, b))| x + f * (pb - x) + f * (a - b))
        .collect()
}

/// Binomial crossover: each gene comes from the donor with probability `cr`,
/// with the gene at a random index always taken from the donor.
pub fn crossover_binomial(
    target: &[f64],
    donor: &[f64],
    cr: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    debug_assert_eq!(target.len(), donor.len());
    let j_rand = rng.random_range(0..target.len());
    target
        .iter()
        .zip(donor)
        .enumerate()
        .map(|(j, (t, d))| {
            if j == j_rand || rng.random::<f64>() <= cr {
                *d
            } else {
                *t
            }
        })
        .collect()
}

/// Greedy selection: the trial survives when its value does not exceed the
/// target's (ties favor the trial).
pub fn select(target_value: f64, trial_value: f64) -> bool {
    trial_value <= target_value
}

/// Weighted Lehmer mean `Σwv² / Σwv`.
pub fn lehmer_mean(values: &[f64], weights: &[f64]) -> Result<f64> {
    if values.is_empty() || values.len() != weights.len() {
        return Err(Error::EmptyInput(
            "lehmer_mean needs matching, nonempty values and weights".into(),
        ));
    }
    let num: f64 = values.iter().zip(weights).map(|(v, w)| w * v * v).sum();
    let den: f64 = values.iter().zip(weights).map(|(v, w)| w * v).sum();
    if den == 0.0 {
        return Err(Error::EmptyInput("lehmer_mean weights carry no mass".into()));
    }
    Ok(num / den)
}

/// Linear population-size schedule
/// `round(((np_min − np_init)/max_fes)·fes + np_init)`, clamped to
/// `[np_min, np_init]`.
pub fn lshade_population_size(fes: u64, cfg: &EngineConfig) -> usize {
    let np_init = cfg.np_init as f64;
    let np_min = cfg.params.np_min as f64;
    let raw = ((np_min - np_init) / cfg.max_fes as f64) * fes as f64 + np_init;
    (raw.round() as usize).clamp(cfg.params.np_min, cfg.np_init)
}

/// Uniform initialization `x = x_min + rand(0,1)·(x_max − x_min)` per gene.
pub fn initialize_population(
    lower: &[f64],
    upper: &[f64],
    np: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<f64>> {
    (0..np)
        .map(|_| {
            lower
                .iter()
                .zip(upper)
                .map(|(lo, up)| lo + rng.random::<f64>() * (up - lo))
                .collect()
        })
        .collect()
}

/// Samples F from `Cauchy(mu, 0.1)`, resampling while nonpositive and
/// truncating at 1. The result always lies in (0, 1].
fn sample_f(mu: f64, rng: &mut ChaCha8Rng) -> f64 {
    let cauchy = Cauchy::new(mu, 0.1).expect("valid Cauchy scale");
    loop {
        let v: f64 = cauchy.sample(rng);
        if v > 0.0 {
            let f = v.min(1.0);
            debug_assert!(f > 0.0 && f <= 1.0);
            return f;
        }
    }
}

/// Samples CR from `Normal(mu, 0.1)` clipped to [0, 1].
fn sample_cr(mu: f64, rng: &mut ChaCha8Rng) -> f64 {
    let normal = Normal::new(mu, 0.1).expect("valid Normal sd");
    normal.sample(rng).clamp(0.0, 1.0)
}

/// `count` distinct indices from `0..np`, all distinct from each other and
/// from every index in `exclude`.
fn distinct_indices(
    np: usize,
    count: usize,
    exclude: &[usize],
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    debug_assert!(np >= count + exclude.len());
    let mut picked = Vec::with_capacity(count);
    while picked.len() < count {
        let r = rng.random_range(0..np);
        if !picked.contains(&r) && !exclude.contains(&r) {
            picked.push(r);
        }
    }
    picked
}

/// Indices of `values` sorted ascending (stable).
fn sorted_indices(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|a, b| values[*a].total_cmp(&values[*b]));
    idx
}

/// Number of pbest candidates: `max(2, ⌈p_best_frac · np⌉)`, capped at `np`.
fn pbest_count(np: usize, frac: f64) -> usize {
    ((frac * np as f64).ceil() as usize).clamp(2, np)
}

/// Evaluation bookkeeping shared by every engine: budget, incumbent, and
/// convergence history (checkpointed every `np_init` evaluations).
struct Tracker<'a, O: Objective + ?Sized> {
    obj: &'a O,
    fes: u64,
    max_fes: u64,
    cadence: u64,
    best_value: f64,
    best_vector: Vec<f64>,
    history: Vec<(u64, f64)>,
}

impl<'a, O: Objective + ?Sized> Tracker<'a, O> {
    fn new(obj: &'a O, cfg: &EngineConfig) -> Self {
        Self {
            obj,
            fes: 0,
            max_fes: cfg.max_fes,
            cadence: cfg.np_init as u64,
            best_value: f64::INFINITY,
            best_vector: Vec::new(),
            history: Vec::new(),
        }
    }

    fn exhausted(&self) -> bool {
        self.fes >= self.max_fes
    }

    fn evaluate(&mut self, v: &[f64]) -> f64 {
        debug_assert!(!self.exhausted(), "evaluation past the budget");
        let value = self.obj.value(v);
        self.fes += 1;
        if value < self.best_value {
            self.best_value = value;
            self.best_vector = v.to_vec();
        }
        if self.fes % self.cadence == 0 {
            self.history.push((self.fes, self.best_value));
        }
        value
    }

    fn finish(mut self, seed: u64, elapsed: f64) -> RunRecord {
        if self.history.last().map(|h| h.0) != Some(self.fes) {
            self.history.push((self.fes, self.best_value));
        }
        RunRecord {
            best_vector: self.best_vector,
            best_value: self.best_value,
            history: self.history,
            seed,
            elapsed,
        }
    }
}

/// Repairs and evaluates a fresh uniform population.
fn init_evaluated<O: Objective + ?Sized>(
    obj: &O,
    tracker: &mut Tracker<'_, O>,
    np: usize,
    rng: &mut ChaCha8Rng,
) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut pop = initialize_population(obj.lower(), obj.upper(), np, rng);
    let mut vals = Vec::with_capacity(np);
    for v in pop.iter_mut() {
        obj.repair(v);
        vals.push(tracker.evaluate(v));
    }
    (pop, vals)
}

/// Runs the configured variant until the evaluation budget is exhausted.
pub fn run<O: Objective + ?Sized>(objective: &O, cfg: &EngineConfig) -> Result<RunRecord> {
    cfg.validate()?;
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut tracker = Tracker::new(objective, cfg);
    match cfg.variant {
        Variant::DeRand1 => classic::run(objective, cfg, MutationStrategy::Rand1, &mut tracker, &mut rng),
        Variant::DeRand2 => classic::run(objective, cfg, MutationStrategy::Rand2, &mut tracker, &mut rng),
        Variant::DeBest1 => classic::run(objective, cfg, MutationStrategy::Best1, &mut tracker, &mut rng),
        Variant::DeBest2 => classic::run(objective, cfg, MutationStrategy::Best2, &mut tracker, &mut rng),
        Variant::Jade => jade::run(objective, cfg, &mut tracker, &mut rng),
        Variant::Code => code::run(objective, cfg, &mut tracker, &mut rng),
        Variant::Shade => shade::run(objective, cfg, false, &mut tracker, &mut rng),
        Variant::Lshade => shade::run(objective, cfg, true, &mut tracker, &mut rng),
    }
    Ok(tracker.finish(cfg.seed, start.elapsed().as_secs_f64()))
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::Objective;
    use std::sync::Mutex;

    /// Box-constrained sphere with clamp-only repair; records every
    /// evaluated value when asked to.
    pub struct Sphere {
        pub lower: Vec<f64>,
        pub upper: Vec<f64>,
        pub log: Option<Mutex<Vec<f64>>>,
    }

    impl Sphere {
        pub fn new(dim: usize, lo: f64, up: f64) -> Self {
            Self {
                lower: vec![lo; dim],
                upper: vec![up; dim],
                log: None,
            }
        }

        pub fn recording(dim: usize, lo: f64, up: f64) -> Self {
            Self {
                log: Some(Mutex::new(Vec::new())),
                ..Self::new(dim, lo, up)
            }
        }
    }

    impl Objective for Sphere {
        fn dim(&self) -> usize {
            self.lower.len()
        }

        fn lower(&self) -> &[f64] {
            &self.lower
        }

        fn upper(&self) -> &[f64] {
            &self.upper
        }

        fn repair(&self, v: &mut [f64]) {
            for (x, (lo, up)) in v.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
                *x = x.clamp(*lo, *up);
            }
        }

        fn value(&self, v: &[f64]) -> f64 {
            let s = v.iter().map(|x| x * x).sum();
            if let Some(log) = &self.log {
                log.lock().unwrap().push(s);
            }
            s
        }
    }
}
