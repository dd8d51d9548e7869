//! D- and A-optimality criteria, sensitivity functions, and
//! equivalence-theorem certification.
//!
//! Both criteria are convex functionals of the information matrix, so a
//! candidate design can be certified without knowing the optimum: the
//! sensitivity function `S(x, ξ)` is nonpositive over the whole design space
//! exactly when `ξ` is optimal, with equality at the support points, and its
//! maximum yields an efficiency lower bound
//! (`exp(−max S / p)` for D, `1 − max S / trace(M⁻¹)` for A).
//!
//! Objectives stay total: a singular information matrix evaluates to the
//! [`SINGULAR_PENALTY`] constant so engines can rank infeasible individuals.
//! Certification, by contrast, refuses singular designs with an error.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::design::{information_matrix, Design, DesignSpace, InfoMatrix};
use crate::error::{Error, Result};
use crate::models::ProblemSpec;

/// Criterion value assigned to designs whose information matrix cannot be
/// factorized (or whose determinant falls below `1e-300`).
pub const SINGULAR_PENALTY: f64 = 1e10;

/// Design optimality criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CriterionKind {
    /// Minimize `log det M⁻¹` (volume of the confidence ellipsoid).
    D,
    /// Minimize `trace M⁻¹` (sum of asymptotic parameter variances).
    A,
}

impl std::fmt::Display for CriterionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CriterionKind::D => write!(f, "D"),
            CriterionKind::A => write!(f, "A"),
        }
    }
}

impl std::str::FromStr for CriterionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "d" => Ok(CriterionKind::D),
            "a" => Ok(CriterionKind::A),
            other => Err(Error::InvalidConfig(format!(
                "unknown criterion {other:?}; expected \"d\" or \"a\""
            ))),
        }
    }
}

/// Log-determinant from a Cholesky factorization, or `None` when the matrix
/// is not numerically positive definite.
fn cholesky_log_det(m: &InfoMatrix) -> Option<(nalgebra::Cholesky<f64, nalgebra::Dyn>, f64)> {
    let chol = m.entries().clone().cholesky()?;
    // Sum of log pivots avoids overflow that det-then-log would hit.
    let log_det: f64 = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    if !log_det.is_finite() || log_det <= 1e-300_f64.ln() {
        return None;
    }
    Some((chol, log_det))
}

/// D-criterion `−log det M`, with [`SINGULAR_PENALTY`] on factorization
/// failure.
pub fn d_criterion(m: &InfoMatrix) -> f64 {
    match cholesky_log_det(m) {
        Some((_, log_det)) => -log_det,
        None => SINGULAR_PENALTY,
    }
}

/// A-criterion `trace M⁻¹`, with [`SINGULAR_PENALTY`] on factorization
/// failure.
pub fn a_criterion(m: &InfoMatrix) -> f64 {
    match cholesky_log_det(m) {
        Some((chol, _)) => chol.inverse().trace(),
        None => SINGULAR_PENALTY,
    }
}

/// Dispatches on the criterion kind.
pub fn criterion_value(kind: CriterionKind, m: &InfoMatrix) -> f64 {
    match kind {
        CriterionKind::D => d_criterion(m),
        CriterionKind::A => a_criterion(m),
    }
}

/// Entry-wise dot product; equals `trace(A·B)` for symmetric `A`, `B`.
fn sym_trace_product(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Precomputed state for evaluating one design's sensitivity function many
/// times (grids, polish, certification).
pub struct SensitivityEvaluator {
    kind: CriterionKind,
    problem: ProblemSpec,
    minv: DMatrix<f64>,
    minv2: DMatrix<f64>,
    trace_minv: f64,
}

impl SensitivityEvaluator {
    /// Factorizes the design's information matrix once. Errors if it is
    /// singular: degenerate designs cannot be certified.
    pub fn new(kind: CriterionKind, design: &Design, problem: &ProblemSpec) -> Result<Self> {
        let m = information_matrix(design, problem)?;
        let (chol, _) = cholesky_log_det(&m).ok_or_else(|| {
            Error::SingularInformation(format!(
                "design with {} support points on problem {} (p = {})",
                design.n_support(),
                problem.id(),
                problem.p()
            ))
        })?;
        let minv = chol.inverse();
        let minv2 = &minv * &minv;
        let trace_minv = minv.trace();
        Ok(Self {
            kind,
            problem: problem.clone(),
            minv,
            minv2,
            trace_minv,
        })
    }

    /// Sensitivity `S(x, ξ)` at one point:
    /// `trace(M(x)·M⁻¹) − p` for D, `trace(M(x)·M⁻²) − trace(M⁻¹)` for A.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let unit = self.problem.unit_information(x);
        match self.kind {
            CriterionKind::D => {
                sym_trace_product(unit.entries(), &self.minv) - self.problem.p() as f64
            }
            CriterionKind::A => sym_trace_product(unit.entries(), &self.minv2) - self.trace_minv,
        }
    }

    fn trace_minv(&self) -> f64 {
        self.trace_minv
    }
}

/// D-criterion sensitivity of `design` at `x`.
pub fn d_sensitivity(x: &[f64], design: &Design, problem: &ProblemSpec) -> Result<f64> {
    Ok(SensitivityEvaluator::new(CriterionKind::D, design, problem)?.eval(x))
}

/// A-criterion sensitivity of `design` at `x`.
pub fn a_sensitivity(x: &[f64], design: &Design, problem: &ProblemSpec) -> Result<f64> {
    Ok(SensitivityEvaluator::new(CriterionKind::A, design, problem)?.eval(x))
}

/// Sensitivity under either criterion.
pub fn sensitivity(
    kind: CriterionKind,
    x: &[f64],
    design: &Design,
    problem: &ProblemSpec,
) -> Result<f64> {
    Ok(SensitivityEvaluator::new(kind, design, problem)?.eval(x))
}

/// Resolution of the sensitivity-maximization scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    /// Grid points per factor (endpoints included).
    pub per_factor: usize,
    /// Random restarts of the coordinate-wise polish, on top of the best
    /// grid cell and the design's own support points.
    pub polish_restarts: usize,
}

impl GridSpec {
    /// Defaults: 512 points per factor up to two factors; for higher
    /// dimensions the per-factor count shrinks so the grid stays within
    /// 2²⁰ samples (at most 64 per factor) and 50 random polish restarts
    /// are added.
    pub fn for_space(space: &DesignSpace) -> Self {
        let d = space.n_factors();
        if d <= 2 {
            Self {
                per_factor: 512,
                polish_restarts: 0,
            }
        } else {
            let budget = (1u64 << 20) as f64;
            let per = budget.powf(1.0 / d as f64).floor() as usize;
            Self {
                per_factor: per.clamp(2, 64),
                polish_restarts: 50,
            }
        }
    }

    /// Explicit per-factor resolution, keeping the default restart policy.
    pub fn with_resolution(space: &DesignSpace, per_factor: usize) -> Self {
        Self {
            per_factor: per_factor.max(2),
            ..Self::for_space(space)
        }
    }
}

/// Sensitivity at one support point of the certified design.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SupportSensitivity {
    /// Support-point coordinates.
    pub point: Vec<f64>,
    /// `S(point, ξ)`.
    pub s: f64,
}

/// Certification outcome from the equivalence theorem.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificationReport {
    /// Maximum of the sensitivity function over the design space.
    pub max_sensitivity: f64,
    /// Where the maximum was attained.
    pub arg_max: Vec<f64>,
    /// Criterion-specific efficiency lower bound, capped at 1.
    pub efficiency_lower_bound: f64,
    /// Sensitivity at each positive-weight support point.
    pub support_sensitivities: Vec<SupportSensitivity>,
}

fn grid_point(space: &DesignSpace, per_factor: usize, index: &[usize]) -> Vec<f64> {
    index
        .iter()
        .zip(space.lower().iter().zip(space.upper()))
        .map(|(t, (lo, up))| lo + (up - lo) * (*t as f64) / (per_factor - 1) as f64)
        .collect()
}

fn scan_grid(eval: &SensitivityEvaluator, space: &DesignSpace, per_factor: usize) -> (Vec<f64>, f64) {
    let d = space.n_factors();
    let mut index = vec![0usize; d];
    let mut best_x = grid_point(space, per_factor, &index);
    let mut best_s = f64::NEG_INFINITY;
    loop {
        let x = grid_point(space, per_factor, &index);
        let s = eval.eval(&x);
        if s > best_s {
            best_s = s;
            best_x = x;
        }
        // Odometer increment over the d-dimensional index.
        let mut j = 0;
        loop {
            if j == d {
                return (best_x, best_s);
            }
            index[j] += 1;
            if index[j] < per_factor {
                break;
            }
            index[j] = 0;
            j += 1;
        }
    }
}

/// Golden-section maximization of `f` on `[a, b]`.
fn line_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..40 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    (mid, f(mid))
}

/// Coordinate-wise local polish around `start`, searching within `radius`
/// of the current iterate per coordinate and shrinking the radius each sweep.
fn coordinate_polish(
    eval: &SensitivityEvaluator,
    space: &DesignSpace,
    start: &[f64],
    radius: &[f64],
) -> (Vec<f64>, f64) {
    let mut x = start.to_vec();
    let mut best = eval.eval(&x);
    let mut r: Vec<f64> = radius.to_vec();
    for _ in 0..4 {
        for j in 0..x.len() {
            let lo = (x[j] - r[j]).max(space.lower()[j]);
            let up = (x[j] + r[j]).min(space.upper()[j]);
            if up <= lo {
                continue;
            }
            let (xj, s) = line_max(
                |v| {
                    let mut probe = x.clone();
                    probe[j] = v;
                    eval.eval(&probe)
                },
                lo,
                up,
            );
            if s > best {
                best = s;
                x[j] = xj;
            }
        }
        for rj in r.iter_mut() {
            *rj *= 0.25;
        }
    }
    (x, best)
}

/// Certifies a design: maximizes its sensitivity function over the space
/// (grid scan plus local polish) and converts the maximum into an efficiency
/// lower bound.
pub fn efficiency_bound(
    kind: CriterionKind,
    design: &Design,
    problem: &ProblemSpec,
    grid: &GridSpec,
) -> Result<CertificationReport> {
    let eval = SensitivityEvaluator::new(kind, design, problem)?;
    let space = problem.space();
    let d = space.n_factors();

    let cell: Vec<f64> = space
        .lower()
        .iter()
        .zip(space.upper())
        .map(|(lo, up)| (up - lo) / (grid.per_factor - 1) as f64)
        .collect();

    let (grid_x, grid_s) = scan_grid(&eval, space, grid.per_factor);

    let mut candidates: Vec<Vec<f64>> = vec![grid_x.clone()];
    candidates.extend(design.support().map(|(x, _)| x.to_vec()));
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_C0DE);
    for _ in 0..grid.polish_restarts {
        let x: Vec<f64> = (0..d)
            .map(|j| rng.random_range(space.lower()[j]..=space.upper()[j]))
            .collect();
        candidates.push(x);
    }

    let (mut arg_max, mut max_s) = (grid_x, grid_s);
    for start in &candidates {
        let (x, s) = coordinate_polish(&eval, space, start, &cell);
        if s > max_s {
            max_s = s;
            arg_max = x;
        }
    }

    let bound = match kind {
        CriterionKind::D => (-max_s / problem.p() as f64).exp(),
        CriterionKind::A => 1.0 - max_s / eval.trace_minv(),
    };

    let support_sensitivities = design
        .support()
        .map(|(x, _)| SupportSensitivity {
            point: x.to_vec(),
            s: eval.eval(x),
        })
        .collect();

    Ok(CertificationReport {
        max_sensitivity: max_s,
        arg_max,
        efficiency_lower_bound: bound.clamp(0.0, 1.0),
        support_sensitivities,
    })
}
