//! Registry of the twelve built-in design problems.
//!
//! Each entry declares its design space, parameter count, assumed number of
//! support points, nominal parameter values, and the model-specific
//! per-point unit information `M(x, θ)`:
//!
//! * regression models (linear or nonlinear mean response) use the outer
//!   product of the mean-response gradient, `f(x) f(x)ᵀ` with
//!   `f(x) = ∂η(x,θ)/∂θ`;
//! * binary-response models (probit, logistic) use the GLM weight times
//!   `h(x) h(x)ᵀ` with `h(x) = [1, xᵀ]ᵀ`;
//! * the gamma model (shape 1, mean `g(θ)²`) uses `(4 / g(θ)²) · f f ᵀ`
//!   with `f = ∇_θ g`;
//! * multinomial-logit models with two non-reference categories use the
//!   block form `(diag(π) − ππᵀ)_{ab} · h(x) h(x)ᵀ`.
//!
//! The registry is immutable after construction and every evaluation is a
//! pure function, so specs can be shared freely across threads.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::OnceLock;

use statrs::function::erf::erfc;

use crate::design::{DesignSpace, InfoMatrix};
use crate::encoding::Encoding;
use crate::error::{Error, Result};

/// Statistical model family of a registered problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// Mean response nonlinear in θ; unit information `f fᵀ`.
    NonlinearRegression,
    /// Mean response linear in θ; gradient independent of θ.
    LinearRegression,
    /// Binary response with normal-CDF link.
    Probit,
    /// Binary response with logit link.
    Logistic,
    /// Gamma response with shape 1 and squared linear mean.
    Gamma,
    /// Multinomial logistic response with two non-reference categories.
    MultinomialLogit,
}

impl ModelKind {
    /// True for kinds whose unit information is a mean-gradient outer product.
    pub fn is_regression(self) -> bool {
        matches!(
            self,
            ModelKind::NonlinearRegression | ModelKind::LinearRegression
        )
    }

    /// Lowercase display name.
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::NonlinearRegression => "nonlinear-regression",
            ModelKind::LinearRegression => "linear-regression",
            ModelKind::Probit => "probit",
            ModelKind::Logistic => "logistic",
            ModelKind::Gamma => "gamma",
            ModelKind::MultinomialLogit => "multinomial-logit",
        }
    }
}

type EtaFn = fn(&[f64], &[f64]) -> f64;
type GradFn = fn(&[f64], &[f64]) -> Vec<f64>;

/// One registered design problem.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    id: u32,
    space: DesignSpace,
    p: usize,
    n_supp: usize,
    theta: Vec<f64>,
    kind: ModelKind,
    eta: Option<EtaFn>,
    grad: Option<GradFn>,
}

impl ProblemSpec {
    /// Problem id, 1..=12 for registry entries.
    pub fn id(&self) -> u32 {
        self.id
    }

    /// Design space.
    pub fn space(&self) -> &DesignSpace {
        &self.space
    }

    /// Parameter dimension `p`.
    pub fn p(&self) -> usize {
        self.p
    }

    /// Assumed number of support points used for encoding individuals.
    pub fn n_supp(&self) -> usize {
        self.n_supp
    }

    /// Nominal parameter values (empty for linear models, stacked `(θ₁; θ₂)`
    /// for multinomial models).
    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Model family.
    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    /// Flat-vector encoding for this problem: `n_supp` blocks of
    /// `n_factors + 1` genes.
    pub fn encoding(&self) -> Encoding {
        Encoding::new(self.n_supp, self.space.n_factors())
    }

    /// Encoded optimization dimension `n_supp · (n_factors + 1)`.
    pub fn encoded_dim(&self) -> usize {
        self.encoding().dim()
    }

    /// Mean response `η(x, θ)` for regression kinds, evaluated at an
    /// explicit parameter vector.
    pub fn mean_response(&self, x: &[f64], theta: &[f64]) -> Result<f64> {
        match self.eta {
            Some(eta) => Ok(eta(x, theta)),
            None => Err(self.unsupported()),
        }
    }

    /// Gradient `f(x) = ∂η/∂θ` at the nominal parameters, for regression
    /// kinds only.
    pub fn mean_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self.grad {
            Some(grad) => Ok(grad(x, &self.theta)),
            None => Err(self.unsupported()),
        }
    }

    fn unsupported(&self) -> Error {
        Error::UnsupportedKind {
            id: self.id,
            kind: self.kind.name().into(),
        }
    }

    /// Per-point unit information matrix `M(x, θ)` at the nominal parameters.
    pub fn unit_information(&self, x: &[f64]) -> InfoMatrix {
        match self.kind {
            ModelKind::NonlinearRegression | ModelKind::LinearRegression => {
                let f = (self.grad.expect("regression kinds store a gradient"))(x, &self.theta);
                InfoMatrix::outer(&f)
            }
            ModelKind::Probit => {
                let h = intercept_basis(x);
                let eta = dot(&h, &self.theta);
                InfoMatrix::scaled_outer(&h, probit_weight(eta))
            }
            ModelKind::Logistic => {
                let h = intercept_basis(x);
                let mu = 1.0 / (1.0 + (-dot(&h, &self.theta)).exp());
                InfoMatrix::scaled_outer(&h, mu * (1.0 - mu))
            }
            ModelKind::Gamma => {
                let f = gamma_inner_gradient(x);
                let g = dot(&f, &self.theta);
                if g.abs() < 1e-150 {
                    // Degenerate corner where mean and gradient vanish together.
                    InfoMatrix::zeros(self.p)
                } else {
                    InfoMatrix::scaled_outer(&f, 4.0 / (g * g))
                }
            }
            ModelKind::MultinomialLogit => self.multinomial_information(x),
        }
    }

    /// Block information for a two-category multinomial logit with
    /// `h(x) = [1, xᵀ]ᵀ` and stacked parameters `θ = (θ₁; θ₂)`.
    fn multinomial_information(&self, x: &[f64]) -> InfoMatrix {
        let h = intercept_basis(x);
        let q = h.len();
        debug_assert_eq!(self.p, 2 * q);
        let eta1 = dot(&h, &self.theta[..q]);
        let eta2 = dot(&h, &self.theta[q..]);
        // Softmax over (reference, cat 1, cat 2) with max-shift for stability.
        let m = 0.0_f64.max(eta1).max(eta2);
        let den = (-m).exp() + (eta1 - m).exp() + (eta2 - m).exp();
        let pi = [(eta1 - m).exp() / den, (eta2 - m).exp() / den];

        let mut info = nalgebra::DMatrix::zeros(self.p, self.p);
        for a in 0..2 {
            for b in 0..2 {
                let c = if a == b {
                    pi[a] * (1.0 - pi[a])
                } else {
                    -pi[a] * pi[b]
                };
                for i in 0..q {
                    for j in 0..q {
                        info[(a * q + i, b * q + j)] = c * h[i] * h[j];
                    }
                }
            }
        }
        InfoMatrix::from_matrix(info)
    }

    /// Returns a copy with nominal θ and/or bounds replaced. Vector lengths
    /// must match the registered entry.
    pub fn with_overrides(
        &self,
        theta: Option<Vec<f64>>,
        lower: Option<Vec<f64>>,
        upper: Option<Vec<f64>>,
    ) -> Result<ProblemSpec> {
        let mut out = self.clone();
        if let Some(t) = theta {
            if t.len() != self.theta.len() {
                return Err(Error::InvalidConfig(format!(
                    "problem {} expects {} nominal parameters, got {}",
                    self.id,
                    self.theta.len(),
                    t.len()
                )));
            }
            out.theta = t;
        }
        let lo = lower.unwrap_or_else(|| self.space.lower().to_vec());
        let up = upper.unwrap_or_else(|| self.space.upper().to_vec());
        if lo.len() != self.space.n_factors() || up.len() != self.space.n_factors() {
            return Err(Error::InvalidConfig(format!(
                "problem {} has {} factors; bound overrides must match",
                self.id,
                self.space.n_factors()
            )));
        }
        out.space = DesignSpace::new(lo, up)?;
        Ok(out)
    }
}

/// `h(x) = [1, xᵀ]ᵀ`.
fn intercept_basis(x: &[f64]) -> Vec<f64> {
    let mut h = Vec::with_capacity(x.len() + 1);
    h.push(1.0);
    h.extend_from_slice(x);
    h
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Standard normal CDF.
fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Standard normal density.
fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

static PROBIT_UNDERFLOWS: AtomicU64 = AtomicU64::new(0);

/// Number of probit weight evaluations clamped to zero because the response
/// probability underflowed. Monotone process-wide diagnostic counter.
pub fn probit_underflow_count() -> u64 {
    PROBIT_UNDERFLOWS.load(Ordering::Relaxed)
}

/// GLM weight `φ(η)² / (Φ(η)(1 − Φ(η)))`, clamped to zero when the
/// response probability underflows.
fn probit_weight(eta: f64) -> f64 {
    let phi = normal_cdf(eta);
    if phi <= 1e-300 || 1.0 - phi <= 1e-300 {
        PROBIT_UNDERFLOWS.fetch_add(1, Ordering::Relaxed);
        return 0.0;
    }
    let dens = normal_pdf(eta);
    dens * dens / (phi * (1.0 - phi))
}

/// Gradient of the gamma model's inner linear form:
/// `g(θ) = θ₁x₁ + θ₂x₁x₂ + θ₃x₂x₃ + θ₄x₃x₄ + θ₅x₄x₅`.
fn gamma_inner_gradient(x: &[f64]) -> Vec<f64> {
    vec![x[0], x[0] * x[1], x[1] * x[2], x[2] * x[3], x[3] * x[4]]
}

// Mean responses and hand-coded gradients for the regression problems.

fn eta_1(x: &[f64], t: &[f64]) -> f64 {
    t[0] * (-t[1] * x[0]).exp() + t[2] * (-t[3] * x[0]).exp()
}

fn grad_1(x: &[f64], t: &[f64]) -> Vec<f64> {
    let (e1, e2) = ((-t[1] * x[0]).exp(), (-t[3] * x[0]).exp());
    vec![e1, -t[0] * x[0] * e1, e2, -t[2] * x[0] * e2]
}

fn eta_2(x: &[f64], t: &[f64]) -> f64 {
    dot(&grad_2(x, t), t)
}

fn grad_2(x: &[f64], _t: &[f64]) -> Vec<f64> {
    vec![1.0, x[0], x[0] * x[0], x[1], x[0] * x[1]]
}

fn eta_4(x: &[f64], t: &[f64]) -> f64 {
    t[0] * (t[1] * x[0]).exp() + t[2] * (t[3] * x[0]).exp()
}

fn grad_4(x: &[f64], t: &[f64]) -> Vec<f64> {
    let (e1, e2) = ((t[1] * x[0]).exp(), (t[3] * x[0]).exp());
    vec![e1, t[0] * x[0] * e1, e2, t[2] * x[0] * e2]
}

fn eta_5(x: &[f64], t: &[f64]) -> f64 {
    t[0] * t[2] * x[0] / (1.0 + t[0] * x[0] + t[1] * x[1])
}

fn grad_5(x: &[f64], t: &[f64]) -> Vec<f64> {
    let den = 1.0 + t[0] * x[0] + t[1] * x[1];
    vec![
        t[2] * x[0] * (1.0 + t[1] * x[1]) / (den * den),
        -t[0] * t[2] * x[0] * x[1] / (den * den),
        t[0] * x[0] / den,
    ]
}

fn eta_6(x: &[f64], t: &[f64]) -> f64 {
    t[0] * x[0] / (t[1] + x[0])
}

fn grad_6(x: &[f64], t: &[f64]) -> Vec<f64> {
    let den = t[1] + x[0];
    vec![x[0] / den, -t[0] * x[0] / (den * den)]
}

fn eta_7(x: &[f64], t: &[f64]) -> f64 {
    let den = (1.0 + x[1] / t[2]) * t[1] + (1.0 + x[1] / t[3]) * x[0];
    t[0] * x[0] / den
}

fn grad_7(x: &[f64], t: &[f64]) -> Vec<f64> {
    let den = (1.0 + x[1] / t[2]) * t[1] + (1.0 + x[1] / t[3]) * x[0];
    let d2 = den * den;
    vec![
        x[0] / den,
        -t[0] * x[0] * (1.0 + x[1] / t[2]) / d2,
        t[0] * x[0] * t[1] * x[1] / (t[2] * t[2] * d2),
        t[0] * x[0] * x[0] * x[1] / (t[3] * t[3] * d2),
    ]
}

fn eta_8(x: &[f64], t: &[f64]) -> f64 {
    dot(&grad_8(x, t), t)
}

fn grad_8(x: &[f64], _t: &[f64]) -> Vec<f64> {
    vec![
        x[0],
        x[1],
        x[2],
        x[0] * x[1],
        x[0] * x[2],
        x[1] * x[2],
        1.0 / x[0],
        1.0 / x[1],
        1.0 / x[2],
    ]
}

fn registry() -> &'static Vec<ProblemSpec> {
    static REGISTRY: OnceLock<Vec<ProblemSpec>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        let space = |lo: Vec<f64>, up: Vec<f64>| DesignSpace::new(lo, up).expect("valid bounds");
        vec![
            // 1: sum of two decaying exponentials on [0, 3].
            ProblemSpec {
                id: 1,
                space: space(vec![0.0], vec![3.0]),
                p: 4,
                n_supp: 6,
                theta: vec![1.0, 1.0, 1.0, 2.0],
                kind: ModelKind::NonlinearRegression,
                eta: Some(eta_1),
                grad: Some(grad_1),
            },
            // 2: quadratic-by-interaction response surface on [−1,1]×[0,1].
            ProblemSpec {
                id: 2,
                space: space(vec![-1.0, 0.0], vec![1.0, 1.0]),
                p: 5,
                n_supp: 10,
                theta: vec![],
                kind: ModelKind::LinearRegression,
                eta: Some(eta_2),
                grad: Some(grad_2),
            },
            // 3: multinomial logit, three factors on [0, 6]³.
            ProblemSpec {
                id: 3,
                space: space(vec![0.0; 3], vec![6.0; 3]),
                p: 8,
                n_supp: 15,
                theta: vec![1.0, 1.0, -1.0, 2.0, -1.0, 2.0, 1.0, -1.0],
                kind: ModelKind::MultinomialLogit,
                eta: None,
                grad: None,
            },
            // 4: sum of two growing exponentials on [0, 1].
            ProblemSpec {
                id: 4,
                space: space(vec![0.0], vec![1.0]),
                p: 4,
                n_supp: 8,
                theta: vec![1.0, 0.5, 1.0, 1.0],
                kind: ModelKind::NonlinearRegression,
                eta: Some(eta_4),
                grad: Some(grad_4),
            },
            // 5: catalytic dehydrogenation kinetics on [0, 3]².
            ProblemSpec {
                id: 5,
                space: space(vec![0.0, 0.0], vec![3.0, 3.0]),
                p: 3,
                n_supp: 10,
                theta: vec![2.9, 12.2, 0.69],
                kind: ModelKind::NonlinearRegression,
                eta: Some(eta_5),
                grad: Some(grad_5),
            },
            // 6: Michaelis–Menten on [0, 5].
            ProblemSpec {
                id: 6,
                space: space(vec![0.0], vec![5.0]),
                p: 2,
                n_supp: 5,
                theta: vec![1.0, 1.0],
                kind: ModelKind::NonlinearRegression,
                eta: Some(eta_6),
                grad: Some(grad_6),
            },
            // 7: mixture-type inhibition kinetics on [0,30]×[0,60].
            ProblemSpec {
                id: 7,
                space: space(vec![0.0, 0.0], vec![30.0, 60.0]),
                p: 4,
                n_supp: 5,
                theta: vec![1.0, 4.0, 2.0, 4.0],
                kind: ModelKind::NonlinearRegression,
                eta: Some(eta_7),
                grad: Some(grad_7),
            },
            // 8: main effects, pairwise interactions, and reciprocals on [0.5, 2]³.
            ProblemSpec {
                id: 8,
                space: space(vec![0.5; 3], vec![2.0; 3]),
                p: 9,
                n_supp: 20,
                theta: vec![],
                kind: ModelKind::LinearRegression,
                eta: Some(eta_8),
                grad: Some(grad_8),
            },
            // 9: probit regression, five factors on [−2, 2]⁵.
            ProblemSpec {
                id: 9,
                space: space(vec![-2.0; 5], vec![2.0; 5]),
                p: 6,
                n_supp: 25,
                theta: vec![0.5, 0.7, 0.18, -0.20, -0.58, 0.51],
                kind: ModelKind::Probit,
                eta: None,
                grad: None,
            },
            // 10: logistic regression, five factors on [−2, 2]⁵.
            ProblemSpec {
                id: 10,
                space: space(vec![-2.0; 5], vec![2.0; 5]),
                p: 6,
                n_supp: 25,
                theta: vec![0.5, 0.7, 0.18, -0.20, -0.58, 0.51],
                kind: ModelKind::Logistic,
                eta: None,
                grad: None,
            },
            // 11: gamma regression with squared linear mean on [0, 10]⁵.
            ProblemSpec {
                id: 11,
                space: space(vec![0.0; 5], vec![10.0; 5]),
                p: 5,
                n_supp: 25,
                theta: vec![0.25, 0.5, 0.20, 0.58, 0.51],
                kind: ModelKind::Gamma,
                eta: None,
                grad: None,
            },
            // 12: multinomial logit, ten factors on [0, 3]¹⁰.
            ProblemSpec {
                id: 12,
                space: space(vec![0.0; 10], vec![3.0; 10]),
                p: 22,
                n_supp: 17,
                theta: vec![
                    1.0, 1.0, -1.0, 2.0, -2.0, 1.0, 0.5, -0.25, 0.5, -0.75, 2.0, // θ₁
                    -1.0, 2.0, 1.0, -1.0, -1.0, -1.0, -0.5, 1.0, 0.75, 0.25, -2.0, // θ₂
                ],
                kind: ModelKind::MultinomialLogit,
                eta: None,
                grad: None,
            },
        ]
    })
}

/// Looks up a registered problem by id.
pub fn get_problem(id: u32) -> Result<ProblemSpec> {
    registry()
        .iter()
        .find(|p| p.id == id)
        .cloned()
        .ok_or(Error::UnknownProblem(id))
}

/// All registered problems in id order.
pub fn all_problems() -> Vec<ProblemSpec> {
    registry().clone()
}
