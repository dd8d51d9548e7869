//! Design spaces, approximate designs, and information matrices.
//!
//! An approximate design is a probability measure on a compact design space:
//! a finite set of support points, each carrying a nonnegative weight, with
//! the weights summing to one. Its worth under an estimation criterion is
//! measured through the normalized Fisher information matrix
//! `M(ξ, θ) = Σ_i ω_i · M(x_i, θ)`, assembled here from the per-point unit
//! information supplied by a model.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::models::ProblemSpec;

/// Compact, box-shaped design space with per-factor bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignSpace {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl DesignSpace {
    /// Creates a space from per-factor bounds. Requires `lower[j] < upper[j]`
    /// for every factor.
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "bound vectors have lengths {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        for (j, (lo, up)) in lower.iter().zip(&upper).enumerate() {
            if !(lo < up) {
                return Err(Error::InvalidConfig(format!(
                    "factor {j}: lower bound {lo} is not below upper bound {up}"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// One-factor interval `[lo, up]`.
    pub fn interval(lo: f64, up: f64) -> Result<Self> {
        Self::new(vec![lo], vec![up])
    }

    /// `d`-factor cube `[lo, up]^d`.
    pub fn cube(lo: f64, up: f64, d: usize) -> Result<Self> {
        Self::new(vec![lo; d], vec![up; d])
    }

    /// Number of design factors.
    pub fn n_factors(&self) -> usize {
        self.lower.len()
    }

    /// Per-factor lower bounds.
    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    /// Per-factor upper bounds.
    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Euclidean diameter of the box. Used to scale merge thresholds.
    pub fn diameter(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, up)| (up - lo) * (up - lo))
            .sum::<f64>()
            .sqrt()
    }

    /// True when every component of `point` lies within the bounds.
    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.n_factors()
            && point
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(x, (lo, up))| *x >= *lo && *x <= *up)
    }
}

/// Projects each component of `point` into the corresponding factor interval.
pub fn clamp_to_space(point: &[f64], space: &DesignSpace) -> Vec<f64> {
    debug_assert_eq!(point.len(), space.n_factors());
    point
        .iter()
        .zip(space.lower().iter().zip(space.upper()))
        .map(|(x, (lo, up))| x.clamp(*lo, *up))
        .collect()
}

/// Approximate design: support points paired with weights.
///
/// The type itself only enforces structural consistency (equal counts,
/// uniform point dimension). Weight feasibility — nonnegativity and unit
/// sum — is established by the repair operation; use [`Design::is_normalized`]
/// to check it.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl Design {
    /// Builds a design from parallel point and weight lists.
    pub fn new(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} points vs {} weights",
                points.len(),
                weights.len()
            )));
        }
        if points.is_empty() {
            return Err(Error::EmptyInput("design has no support points".into()));
        }
        let d = points[0].len();
        if points.iter().any(|p| p.len() != d) {
            return Err(Error::DimensionMismatch(
                "support points have inconsistent dimensions".into(),
            ));
        }
        Ok(Self { points, weights })
    }

    /// Support-point coordinates.
    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    /// Weights, parallel to [`Design::points`].
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Number of stored rows (including zero-weight padding rows).
    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// True when the design stores no rows. Unreachable via `new`.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Dimension of each support point.
    pub fn n_factors(&self) -> usize {
        self.points[0].len()
    }

    /// Rows with weight strictly above zero, in stored order.
    pub fn support(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.points
            .iter()
            .zip(&self.weights)
            .filter(|(_, w)| **w > 0.0)
            .map(|(p, w)| (p.as_slice(), *w))
    }

    /// Number of rows carrying positive weight.
    pub fn n_support(&self) -> usize {
        self.weights.iter().filter(|w| **w > 0.0).count()
    }

    /// Weights are nonnegative and sum to one within `tol`.
    pub fn is_normalized(&self, tol: f64) -> bool {
        self.weights.iter().all(|w| *w >= 0.0)
            && (self.weights.iter().sum::<f64>() - 1.0).abs() <= tol
    }

    /// Design restricted to its positive-weight rows.
    pub fn positive_part(&self) -> Design {
        let (points, weights) = self
            .support()
            .map(|(p, w)| (p.to_vec(), w))
            .unzip::<_, _, Vec<_>, Vec<_>>();
        Design { points, weights }
    }
}

/// Normalized `p×p` Fisher information matrix of a design.
///
/// Symmetric positive-semidefinite by construction; assembled as a weighted
/// sum of per-point unit informations.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoMatrix {
    m: DMatrix<f64>,
}

impl InfoMatrix {
    /// Zero matrix of dimension `p`.
    pub fn zeros(p: usize) -> Self {
        Self {
            m: DMatrix::zeros(p, p),
        }
    }

    /// Wraps an existing symmetric matrix.
    pub fn from_matrix(m: DMatrix<f64>) -> Self {
        debug_assert_eq!(m.nrows(), m.ncols());
        Self { m }
    }

    /// Rank-one matrix `f fᵀ`.
    pub fn outer(f: &[f64]) -> Self {
        Self::scaled_outer(f, 1.0)
    }

    /// Rank-one matrix `c · f fᵀ`. Both triangles are filled from the same
    /// products, so the result is exactly symmetric.
    pub fn scaled_outer(f: &[f64], c: f64) -> Self {
        let p = f.len();
        let mut m = DMatrix::zeros(p, p);
        for i in 0..p {
            for j in i..p {
                let v = c * f[i] * f[j];
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Self { m }
    }

    /// Parameter dimension `p`.
    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    /// Matrix entries.
    pub fn entries(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// Adds `w · other` into `self`.
    pub fn accumulate(&mut self, other: &InfoMatrix, w: f64) {
        debug_assert_eq!(self.dim(), other.dim());
        self.m.zip_apply(&other.m, |a, b| *a += w * b);
    }

    /// Maximum absolute asymmetry `|M_ij − M_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let p = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..p {
            for j in (i + 1)..p {
                worst = worst.max((self.m[(i, j)] - self.m[(j, i)]).abs());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the symmetric matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        self.m
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.m.norm()
    }
}

/// Assembles the normalized information matrix `Σ_i ω_i · M(x_i, θ)` of a
/// design under a problem's model. Zero-weight rows contribute nothing.
pub fn information_matrix(design: &Design, problem: &ProblemSpec) -> Result<InfoMatrix> {
    if design.n_factors() != problem.space().n_factors() {
        return Err(Error::DimensionMismatch(format!(
            "design has {} factors, problem {} expects {}",
            design.n_factors(),
            problem.id(),
            problem.space().n_factors()
        )));
    }
    let mut total = InfoMatrix::zeros(problem.p());
    for (x, w) in design.support() {
        let unit = problem.unit_information(x);
        total.accumulate(&unit, w);
    }
    Ok(total)
}
