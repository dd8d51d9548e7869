//! Acceptance suite: every release gate runs here, one test per criterion,
//! each ending in a printed `acceptance criterion N: PASS` line (run with
//! `--nocapture` to see them). Failure messages carry the criterion number.
//!
//! Expected values are frozen from independently verified optima: closed-form
//! evaluations, exhaustive grid search, finite differences, and
//! exact-permutation statistics.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::erf::erfc;

use oed::criteria::{efficiency_bound, sensitivity, CriterionKind, GridSpec};
use oed::design::{information_matrix, Design};
use oed::encoding::{decode, repair_in_place, RepairConfig};
use oed::engines::{
    lshade_population_size, run, EngineConfig, Objective, RunRecord, Variant,
};
use oed::harness::{wilcoxon_rank_sum, Outcome};
use oed::models::{get_problem, ModelKind, ProblemSpec};
use oed::objective::DesignObjective;

// ---------------------------------------------------------------------------
// Shared solver fixtures (criteria 1-5 reuse these runs).

struct SolvedCell {
    problem: ProblemSpec,
    kind: CriterionKind,
    finals: Vec<f64>,
    designs: Vec<Design>,
}

impl SolvedCell {
    fn solve(problem_id: u32, kind: CriterionKind, variant: Variant, seeds: &[u64]) -> Self {
        let problem = get_problem(problem_id).unwrap();
        let objective = DesignObjective::with_default_repair(problem.clone(), kind);
        let mut finals = Vec::new();
        let mut designs = Vec::new();
        for &seed in seeds {
            let mut cfg = EngineConfig::new(variant, 10_000);
            cfg.seed = seed;
            let record: RunRecord = run(&objective, &cfg).unwrap();
            finals.push(record.best_value);
            designs.push(
                objective
                    .decode_design(&record.best_vector)
                    .unwrap()
                    .positive_part(),
            );
        }
        Self {
            problem,
            kind,
            finals,
            designs,
        }
    }

    fn median_final(&self) -> f64 {
        let mut sorted = self.finals.clone();
        sorted.sort_by(f64::total_cmp);
        sorted[sorted.len() / 2]
    }

    fn median_design(&self) -> &Design {
        let mut order: Vec<usize> = (0..self.finals.len()).collect();
        order.sort_by(|a, b| self.finals[*a].total_cmp(&self.finals[*b]));
        &self.designs[order[order.len() / 2]]
    }
}

const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

fn cell_p6_d() -> &'static SolvedCell {
    static CELL: OnceLock<SolvedCell> = OnceLock::new();
    CELL.get_or_init(|| SolvedCell::solve(6, CriterionKind::D, Variant::Lshade, &SEEDS))
}

fn cell_p1_d() -> &'static SolvedCell {
    static CELL: OnceLock<SolvedCell> = OnceLock::new();
    CELL.get_or_init(|| SolvedCell::solve(1, CriterionKind::D, Variant::Jade, &SEEDS))
}

fn cell_p4_d() -> &'static SolvedCell {
    static CELL: OnceLock<SolvedCell> = OnceLock::new();
    CELL.get_or_init(|| SolvedCell::solve(4, CriterionKind::D, Variant::Lshade, &SEEDS))
}

fn cell_p6_a() -> &'static SolvedCell {
    static CELL: OnceLock<SolvedCell> = OnceLock::new();
    CELL.get_or_init(|| SolvedCell::solve(6, CriterionKind::A, Variant::Lshade, &SEEDS))
}

/// Positive-weight rows sorted by the first coordinate.
fn sorted_support(design: &Design) -> Vec<(Vec<f64>, f64)> {
    let mut rows: Vec<(Vec<f64>, f64)> = design
        .support()
        .map(|(p, w)| (p.to_vec(), w))
        .collect();
    rows.sort_by(|a, b| a.0[0].total_cmp(&b.0[0]));
    rows
}

// ---------------------------------------------------------------------------
// Criterion 1: Problem 6 D-optimum, LSHADE, 5 seeds.

#[test]
fn criterion_1_problem6_d_optimum() {
    let cell = cell_p6_d();
    for (i, final_value) in cell.finals.iter().enumerate() {
        assert!(
            (final_value - 5.2528).abs() < 1e-3,
            "criterion 1: seed {} final {} not within 1e-3 of 5.2528",
            SEEDS[i],
            final_value
        );
    }
    for (i, design) in cell.designs.iter().enumerate() {
        let rows = sorted_support(design);
        assert_eq!(
            rows.len(),
            2,
            "criterion 1: seed {} design has {} support points, expected 2",
            SEEDS[i],
            rows.len()
        );
        let expect = [0.7143, 5.0];
        for (row, want) in rows.iter().zip(expect) {
            assert!(
                (row.0[0] - want).abs() < 1e-2,
                "criterion 1: support {} vs {}",
                row.0[0],
                want
            );
            assert!(
                (row.1 - 0.5).abs() < 1e-2,
                "criterion 1: weight {} vs 0.5",
                row.1
            );
        }
    }
    println!("acceptance criterion 1: PASS — Problem 6 D-optimum (LSHADE, 5 seeds)");
}

// ---------------------------------------------------------------------------
// Criterion 2: Problem 1 D-optimum, JADE, 5 seeds.

#[test]
fn criterion_2_problem1_d_optimum() {
    let cell = cell_p1_d();
    let median = cell.median_final();
    assert!(
        (median - 20.508).abs() < 1e-2,
        "criterion 2: median {} not within 1e-2 of 20.508",
        median
    );
    let rows = sorted_support(cell.median_design());
    assert_eq!(
        rows.len(),
        4,
        "criterion 2: expected 4 support points, got {}",
        rows.len()
    );
    let expect = [0.0, 0.3141, 1.1307, 2.7523];
    for (row, want) in rows.iter().zip(expect) {
        assert!(
            (row.0[0] - want).abs() < 1e-2,
            "criterion 2: support {} vs {}",
            row.0[0],
            want
        );
        assert!(
            (row.1 - 0.25).abs() < 1e-2,
            "criterion 2: weight {} vs 0.25",
            row.1
        );
    }
    println!("acceptance criterion 2: PASS — Problem 1 D-optimum (JADE, 5 seeds)");
}

// ---------------------------------------------------------------------------
// Criterion 3: Problem 4 D-optimum, LSHADE, 5 seeds.

#[test]
fn criterion_3_problem4_d_optimum() {
    let cell = cell_p4_d();
    let median = cell.median_final();
    assert!(
        (median - 21.022).abs() < 1e-2,
        "criterion 3: median {} not within 1e-2 of 21.022",
        median
    );
    let rows = sorted_support(cell.median_design());
    assert_eq!(
        rows.len(),
        4,
        "criterion 3: expected 4 support points, got {}",
        rows.len()
    );
    let expect = [0.0, 0.3305, 0.7692, 1.0];
    for (row, want) in rows.iter().zip(expect) {
        assert!(
            (row.0[0] - want).abs() < 1e-2,
            "criterion 3: support {} vs {}",
            row.0[0],
            want
        );
    }
    println!("acceptance criterion 3: PASS — Problem 4 D-optimum (LSHADE, 5 seeds)");
}

// ---------------------------------------------------------------------------
// Criterion 4: Problem 6 A-optimum, LSHADE, 5 seeds.

#[test]
fn criterion_4_problem6_a_optimum() {
    let cell = cell_p6_a();
    let median = cell.median_final();
    assert!(
        (median - 80.174).abs() < 0.05,
        "criterion 4: median {} not within 0.05 of 80.174",
        median
    );
    let rows = sorted_support(cell.median_design());
    assert_eq!(rows.len(), 2, "criterion 4: expected 2 support points");
    let expect = [(0.5373, 0.6696), (5.0, 0.3304)];
    for (row, (want_x, want_w)) in rows.iter().zip(expect) {
        assert!(
            (row.0[0] - want_x).abs() < 1e-2,
            "criterion 4: support {} vs {}",
            row.0[0],
            want_x
        );
        assert!(
            (row.1 - want_w).abs() < 1e-2,
            "criterion 4: weight {} vs {}",
            row.1,
            want_w
        );
    }
    println!("acceptance criterion 4: PASS — Problem 6 A-optimum (LSHADE, 5 seeds)");
}

// ---------------------------------------------------------------------------
// Criterion 5: certification of every design from criteria 1-4.

#[test]
fn criterion_5_certification_of_solved_designs() {
    let cells = [cell_p6_d(), cell_p1_d(), cell_p4_d(), cell_p6_a()];
    for cell in cells {
        let grid = GridSpec::for_space(cell.problem.space());
        for (i, design) in cell.designs.iter().enumerate() {
            let report = efficiency_bound(cell.kind, design, &cell.problem, &grid).unwrap();
            assert!(
                report.efficiency_lower_bound >= 0.999,
                "criterion 5: problem {} {} seed {}: bound {}",
                cell.problem.id(),
                cell.kind,
                SEEDS[i],
                report.efficiency_lower_bound
            );
            assert!(
                report.max_sensitivity <= 1e-3,
                "criterion 5: problem {} {} seed {}: max sensitivity {}",
                cell.problem.id(),
                cell.kind,
                SEEDS[i],
                report.max_sensitivity
            );
        }
    }
    println!("acceptance criterion 5: PASS — certification bounds on all solved designs");
}

// ---------------------------------------------------------------------------
// Criterion 6: exhaustive two-point oracle for Problem 6.

/// Michaelis-Menten gradient at θ = (1, 1), hand-coded independently of the
/// library's model registry.
fn mm_gradient(x: f64) -> (f64, f64) {
    (x / (1.0 + x), -x / ((1.0 + x) * (1.0 + x)))
}

#[test]
fn criterion_6_exhaustive_grid_oracle_problem6() {
    // 0.005-step coordinate grid over [0, 5], 0.005-step weight grid.
    let n = 1001usize;
    let step = 0.005;
    let outer: Vec<(f64, f64, f64)> = (0..n)
        .map(|i| {
            let (f1, f2) = mm_gradient(i as f64 * step);
            (f1 * f1, f1 * f2, f2 * f2)
        })
        .collect();
    let weights: Vec<f64> = (1..200).map(|k| k as f64 * step).collect();

    let mut best = (f64::NEG_INFINITY, 0usize, 0usize, 0.0f64);
    for i in 0..n {
        let (a1, b1, c1) = outer[i];
        for j in (i + 1)..n {
            let (a2, b2, c2) = outer[j];
            for &w in &weights {
                let v = 1.0 - w;
                let det = (w * a1 + v * a2) * (w * c1 + v * c2)
                    - (w * b1 + v * b2) * (w * b1 + v * b2);
                if det > best.0 {
                    best = (det, i, j, w);
                }
            }
        }
    }

    let (det, i, j, w) = best;
    let x1 = i as f64 * step;
    let x2 = j as f64 * step;
    let oracle_value = -det.ln();

    assert!(
        (x1 - 0.7143).abs() <= step,
        "criterion 6: oracle lower point {} vs 0.7143",
        x1
    );
    assert!(
        (x2 - 5.0).abs() < 1e-12,
        "criterion 6: oracle upper point {} vs 5",
        x2
    );
    assert!(
        (w - 0.5).abs() <= step,
        "criterion 6: oracle weight {} vs 0.5",
        w
    );

    let de_best = cell_p6_d()
        .finals
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    assert!(
        (oracle_value - de_best).abs() < 2e-3,
        "criterion 6: oracle {} vs DE {}",
        oracle_value,
        de_best
    );
    println!(
        "acceptance criterion 6: PASS — grid oracle ({x1}, {x2}, w = {w}) value {oracle_value:.5}"
    );
}

// ---------------------------------------------------------------------------
// Criterion 7: gradients vs finite differences; GLM unit information vs a
// finite-difference log-likelihood Hessian oracle.

fn random_point(problem: &ProblemSpec, rng: &mut ChaCha8Rng) -> Vec<f64> {
    problem
        .space()
        .lower()
        .iter()
        .zip(problem.space().upper())
        .map(|(lo, up)| lo + rng.random::<f64>() * (up - lo))
        .collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[test]
fn criterion_7a_regression_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for id in [1u32, 2, 4, 5, 6, 7, 8] {
        let problem = get_problem(id).unwrap();
        // Linear models have θ-free gradients; differentiate at all-ones.
        let theta: Vec<f64> = if problem.theta().is_empty() {
            vec![1.0; problem.p()]
        } else {
            problem.theta().to_vec()
        };
        for _ in 0..100 {
            let x = random_point(&problem, &mut rng);
            let grad = problem.mean_gradient(&x).unwrap();
            let mut fd = vec![0.0; problem.p()];
            for (j, fd_j) in fd.iter_mut().enumerate() {
                let h = 1e-6 * (1.0 + theta[j].abs());
                let mut up = theta.clone();
                up[j] += h;
                let mut dn = theta.clone();
                dn[j] -= h;
                *fd_j = (problem.mean_response(&x, &up).unwrap()
                    - problem.mean_response(&x, &dn).unwrap())
                    / (2.0 * h);
            }
            let diff: Vec<f64> = fd.iter().zip(&grad).map(|(a, b)| a - b).collect();
            let rel = norm(&diff) / (1.0 + norm(&grad));
            assert!(
                rel < 1e-6,
                "criterion 7: problem {} at {:?}: gradient mismatch {}",
                id,
                x,
                rel
            );
        }
    }
    println!("acceptance criterion 7a: PASS — regression gradients vs central differences");
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Expected log-likelihood of one observation at point `x`, as a function of
/// θ, with the expectation taken under the nominal parameters. Hand-coded per
/// model kind, independent of the library's information formulas.
fn expected_log_likelihood(problem: &ProblemSpec, x: &[f64], theta: &[f64]) -> f64 {
    let h: Vec<f64> = std::iter::once(1.0).chain(x.iter().copied()).collect();
    let dot = |t: &[f64], v: &[f64]| t.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    match problem.kind() {
        ModelKind::Probit => {
            let p_star = normal_cdf(dot(problem.theta(), &h));
            let p = normal_cdf(dot(theta, &h));
            p_star * p.ln() + (1.0 - p_star) * (1.0 - p).ln()
        }
        ModelKind::Logistic => {
            let mu_star = 1.0 / (1.0 + (-dot(problem.theta(), &h)).exp());
            let mu = 1.0 / (1.0 + (-dot(theta, &h)).exp());
            mu_star * mu.ln() + (1.0 - mu_star) * (1.0 - mu).ln()
        }
        ModelKind::Gamma => {
            let f = [x[0], x[0] * x[1], x[1] * x[2], x[2] * x[3], x[3] * x[4]];
            let mu_star = dot(problem.theta(), &f).powi(2);
            let mu = dot(theta, &f).powi(2);
            -mu.ln() - mu_star / mu
        }
        ModelKind::MultinomialLogit => {
            let q = h.len();
            let log_pi = |t: &[f64]| -> [f64; 3] {
                let e1 = dot(&t[..q], &h);
                let e2 = dot(&t[q..], &h);
                let m = 0.0_f64.max(e1).max(e2);
                let log_den = m + ((-m).exp() + (e1 - m).exp() + (e2 - m).exp()).ln();
                [-log_den, e1 - log_den, e2 - log_den]
            };
            let p_star = log_pi(problem.theta()).map(f64::exp);
            let lp = log_pi(theta);
            p_star.iter().zip(&lp).map(|(p, l)| p * l).sum()
        }
        _ => unreachable!("regression kinds are covered by criterion 7a"),
    }
}

#[test]
fn criterion_7b_glm_information_matches_likelihood_hessian() {
    let mut rng = ChaCha8Rng::seed_from_u64(4096);
    for id in [3u32, 9, 10, 11, 12] {
        let problem = get_problem(id).unwrap();
        let p = problem.p();
        let theta = problem.theta().to_vec();
        for _ in 0..20 {
            let x = random_point(&problem, &mut rng);
            if problem.kind() == ModelKind::Gamma {
                // The likelihood degenerates with the mean; stay away from
                // the zero set of the inner form.
                let f = [x[0], x[0] * x[1], x[1] * x[2], x[2] * x[3], x[3] * x[4]];
                let g: f64 = f.iter().zip(&theta).map(|(a, b)| a * b).sum();
                if g.abs() < 0.5 {
                    continue;
                }
            }

            let ell = |t: &[f64]| expected_log_likelihood(&problem, &x, t);
            let mut fisher = vec![vec![0.0; p]; p];
            for i in 0..p {
                for j in i..p {
                    let hi = 1e-4 * (1.0 + theta[i].abs());
                    let hj = 1e-4 * (1.0 + theta[j].abs());
                    let mut t_pp = theta.clone();
                    t_pp[i] += hi;
                    t_pp[j] += hj;
                    let mut t_pm = theta.clone();
                    t_pm[i] += hi;
                    t_pm[j] -= hj;
                    let mut t_mp = theta.clone();
                    t_mp[i] -= hi;
                    t_mp[j] += hj;
                    let mut t_mm = theta.clone();
                    t_mm[i] -= hi;
                    t_mm[j] -= hj;
                    let second =
                        (ell(&t_pp) - ell(&t_pm) - ell(&t_mp) + ell(&t_mm)) / (4.0 * hi * hj);
                    fisher[i][j] = -second;
                    fisher[j][i] = -second;
                }
            }

            let unit = problem.unit_information(&x);
            let mut diff2 = 0.0;
            let mut ref2 = 0.0;
            for i in 0..p {
                for j in 0..p {
                    let d = unit.entries()[(i, j)] - fisher[i][j];
                    diff2 += d * d;
                    ref2 += fisher[i][j] * fisher[i][j];
                }
            }
            let rel = diff2.sqrt() / (1.0 + ref2.sqrt());
            assert!(
                rel < 1e-5,
                "criterion 7: problem {} at {:?}: information mismatch {}",
                id,
                x,
                rel
            );
        }
    }
    println!("acceptance criterion 7b: PASS — GLM information vs finite-difference Hessians");
}

// ---------------------------------------------------------------------------
// Criterion 8: invariant suite.

struct CountingObjective {
    inner: DesignObjective,
    count: std::sync::atomic::AtomicU64,
}

impl Objective for CountingObjective {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn lower(&self) -> &[f64] {
        self.inner.lower()
    }
    fn upper(&self) -> &[f64] {
        self.inner.upper()
    }
    fn repair(&self, v: &mut [f64]) {
        self.inner.repair(v);
    }
    fn value(&self, v: &[f64]) -> f64 {
        self.count
            .fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        self.inner.value(v)
    }
}

#[test]
fn criterion_8_invariant_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);

    // Repair feasibility on every registered problem, with deliberately
    // infeasible inputs (out-of-bounds coordinates, negative weights).
    for problem in oed::models::all_problems() {
        let enc = problem.encoding();
        let cfg = RepairConfig::for_space(problem.space());
        let span: Vec<(f64, f64)> = problem
            .space()
            .lower()
            .iter()
            .zip(problem.space().upper())
            .map(|(lo, up)| (lo - (up - lo), up + (up - lo)))
            .collect();
        for _ in 0..25 {
            let mut v: Vec<f64> = Vec::with_capacity(enc.dim());
            for _ in 0..enc.n_supp {
                for (lo, up) in &span {
                    v.push(lo + rng.random::<f64>() * (up - lo));
                }
                v.push(-0.5 + rng.random::<f64>() * 2.0);
            }
            repair_in_place(&mut v, enc, problem.space(), &cfg);
            let design = decode(&v, enc).unwrap();
            assert!(
                design.is_normalized(1e-9),
                "criterion 8: repair feasibility broken on problem {}",
                problem.id()
            );
            assert!(
                design.points().iter().all(|p| problem.space().contains(p)),
                "criterion 8: repaired point out of bounds on problem {}",
                problem.id()
            );
        }
    }

    // Weight conservation through merging: near-duplicates sum their mass.
    {
        let problem = get_problem(6).unwrap();
        let enc = problem.encoding();
        let cfg = RepairConfig::for_space(problem.space());
        let mut v = vec![
            2.0, 0.25, 2.01, 0.35, 4.5, 0.40, 0.0, 0.0, 0.0, 0.0,
        ];
        repair_in_place(&mut v, enc, problem.space(), &cfg);
        let design = decode(&v, enc).unwrap();
        let rows = sorted_support(&design);
        assert_eq!(rows.len(), 2, "criterion 8: merge should leave 2 points");
        assert!(
            (rows[0].1 - 0.6).abs() < 1e-12 && (rows[1].1 - 0.4).abs() < 1e-12,
            "criterion 8: merged weights {:?} lost mass",
            rows
        );
    }

    // Trace identity Σ ωᵢ S(xᵢ) = 0 for nonsingular random designs.
    for id in [1u32, 2, 5, 6, 7] {
        let problem = get_problem(id).unwrap();
        for _ in 0..10 {
            let n = problem.p() + 2;
            let points: Vec<Vec<f64>> =
                (0..n).map(|_| random_point(&problem, &mut rng)).collect();
            let raw: Vec<f64> = (0..n).map(|_| 0.1 + rng.random::<f64>()).collect();
            let total: f64 = raw.iter().sum();
            let design =
                Design::new(points, raw.iter().map(|w| w / total).collect()).unwrap();
            let m = information_matrix(&design, &problem).unwrap();
            if oed::criteria::d_criterion(&m) >= oed::criteria::SINGULAR_PENALTY {
                continue;
            }
            for kind in [CriterionKind::D, CriterionKind::A] {
                let total: f64 = design
                    .support()
                    .map(|(x, w)| w * sensitivity(kind, x, &design, &problem).unwrap())
                    .sum();
                assert!(
                    total.abs() < 1e-8,
                    "criterion 8: trace identity violated on problem {} ({kind}): {total}",
                    id
                );
            }
        }
    }

    // LSHADE population schedule endpoints.
    let mut cfg = EngineConfig::new(Variant::Lshade, 10_000);
    cfg.params.np_min = 4;
    assert_eq!(
        lshade_population_size(0, &cfg),
        50,
        "criterion 8: schedule start"
    );
    assert_eq!(
        lshade_population_size(10_000, &cfg),
        4,
        "criterion 8: schedule end"
    );

    // CoDE budget accounting: exactly 3·NP evaluations per full generation
    // (the engine asserts per-generation accounting internally).
    let problem = get_problem(6).unwrap();
    let counting = CountingObjective {
        inner: DesignObjective::with_default_repair(problem.clone(), CriterionKind::D),
        count: std::sync::atomic::AtomicU64::new(0),
    };
    let generations = 4u64;
    let mut code_cfg = EngineConfig::new(Variant::Code, 50 + 3 * 50 * generations);
    code_cfg.seed = 17;
    run(&counting, &code_cfg).unwrap();
    assert_eq!(
        counting.count.load(std::sync::atomic::Ordering::Relaxed),
        50 + 3 * 50 * generations,
        "criterion 8: CoDE budget accounting"
    );

    // Determinism under fixed seeds.
    for variant in [Variant::Lshade, Variant::Jade] {
        let objective = DesignObjective::with_default_repair(problem.clone(), CriterionKind::D);
        let mut cfg = EngineConfig::new(variant, 3_000);
        cfg.seed = 99;
        let a = run(&objective, &cfg).unwrap();
        let b = run(&objective, &cfg).unwrap();
        assert_eq!(
            a.history, b.history,
            "criterion 8: {variant} history not reproducible"
        );
        assert_eq!(
            a.best_vector, b.best_vector,
            "criterion 8: {variant} best vector not reproducible"
        );
    }

    println!("acceptance criterion 8: PASS — invariant suite");
}

// ---------------------------------------------------------------------------
// Criterion 9: Wilcoxon oracle equivalence and the extended Problem 10 run.

/// Exact two-sided rank-sum p-value by enumerating every assignment of
/// pooled midranks to the first sample.
fn exact_rank_sum(a: &[f64], b: &[f64]) -> (f64, f64) {
    let n1 = a.len();
    let n = n1 + b.len();
    let mut pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    pooled.sort_by(f64::total_cmp);
    // Midranks of the sorted pooled sample.
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j < n && pooled[j] == pooled[i] {
            j += 1;
        }
        let mid = (i + 1 + j) as f64 / 2.0;
        for r in ranks.iter_mut().take(j).skip(i) {
            *r = mid;
        }
        i = j;
    }
    let rank_of = |v: f64| -> f64 {
        let idx = pooled.partition_point(|p| *p < v);
        ranks[idx]
    };
    let observed: f64 = a.iter().map(|v| rank_of(*v)).sum();
    let mean = n1 as f64 * (n as f64 + 1.0) / 2.0;
    let obs_dev = (observed - mean).abs();

    // Enumerate all C(n, n1) rank subsets.
    let mut extreme = 0u64;
    let mut total = 0u64;
    let mut chosen: Vec<usize> = (0..n1).collect();
    loop {
        let s: f64 = chosen.iter().map(|&i| ranks[i]).sum();
        total += 1;
        if (s - mean).abs() >= obs_dev - 1e-9 {
            extreme += 1;
        }
        // Next combination in lexicographic order.
        let mut k = n1;
        loop {
            if k == 0 {
                return (extreme as f64 / total as f64, observed - mean);
            }
            k -= 1;
            if chosen[k] != k + n - n1 {
                chosen[k] += 1;
                for j in (k + 1)..n1 {
                    chosen[j] = chosen[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn exact_decision(a: &[f64], b: &[f64], alpha: f64) -> (Outcome, f64) {
    let (p, dev) = exact_rank_sum(a, b);
    let outcome = if p >= alpha || dev == 0.0 {
        Outcome::Equal
    } else if dev > 0.0 {
        Outcome::Minus
    } else {
        Outcome::Plus
    };
    (outcome, p)
}

#[test]
fn criterion_9_wilcoxon_exact_oracle_equivalence() {
    // Deterministic examples.
    let low: Vec<f64> = (1..=25).map(f64::from).collect();
    let high: Vec<f64> = (26..=50).map(f64::from).collect();
    assert_eq!(wilcoxon_rank_sum(&high, &low, 0.05), Outcome::Minus);
    assert_eq!(wilcoxon_rank_sum(&low, &high, 0.05), Outcome::Plus);
    assert_eq!(wilcoxon_rank_sum(&low, &low, 0.05), Outcome::Equal);

    // Random small-sample battery vs the exact permutation distribution.
    // Decisions must agree except within 0.01 of the significance boundary,
    // where the normal approximation is allowed to differ.
    let mut rng = ChaCha8Rng::seed_from_u64(7777);
    let mut compared = 0;
    for trial in 0..60 {
        let n1 = 4 + (trial % 7);
        let n2 = 4 + ((trial / 7) % 7);
        let ties = trial % 2 == 0;
        let sample = |rng: &mut ChaCha8Rng, shift: f64, n: usize| -> Vec<f64> {
            (0..n)
                .map(|_| {
                    let v: f64 = rng.random::<f64>() * 4.0 + shift;
                    if ties {
                        v.round()
                    } else {
                        v
                    }
                })
                .collect()
        };
        let shift = if trial % 3 == 0 { 2.0 } else { 0.4 };
        let a = sample(&mut rng, shift, n1);
        let b = sample(&mut rng, 0.0, n2);

        let (oracle, p_exact) = exact_decision(&a, &b, 0.05);
        if (p_exact - 0.05).abs() <= 0.01 {
            continue;
        }
        compared += 1;
        let approx = wilcoxon_rank_sum(&a, &b, 0.05);
        assert_eq!(
            approx, oracle,
            "criterion 9: decision mismatch (p_exact = {p_exact}) for a = {a:?}, b = {b:?}"
        );
    }
    assert!(
        compared >= 40,
        "criterion 9: boundary filter left too few comparisons ({compared})"
    );
    println!(
        "acceptance criterion 9: PASS — Wilcoxon vs exact permutation oracle ({compared} samples)"
    );
}

/// Extended suite: Problem 10 (logistic, five factors) under the D-criterion
/// at a fifth of the full published budget.
#[test]
fn extended_problem10_lshade_reaches_published_range() {
    let problem = get_problem(10).unwrap();
    let objective = DesignObjective::with_default_repair(problem, CriterionKind::D);
    for seed in [1u64, 2, 3] {
        let mut cfg = EngineConfig::new(Variant::Lshade, 100_000);
        cfg.seed = seed;
        let record = run(&objective, &cfg).unwrap();
        assert!(
            record.best_value <= 4.1,
            "extended: seed {} final {} above 4.1",
            seed,
            record.best_value
        );
    }
    println!("acceptance criterion 9 (extended): PASS — Problem 10 D within range at 100k FES");
}
