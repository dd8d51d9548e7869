//! D- and A-optimal approximate experimental designs via differential
//! evolution.
//!
//! The crate searches for locally optimal approximate designs — probability
//! measures over a compact design space — for twelve built-in statistical
//! models (nonlinear and linear regression, probit, logistic, gamma, and
//! multinomial-logit). Candidate designs are encoded as flat vectors of
//! support points and weights, evolved by classic DE or the adaptive
//! variants JADE, CoDE, SHADE, and LSHADE, and kept feasible by a repair
//! operator that clamps coordinates, merges near-duplicate support points,
//! deletes negligible weights, and renormalizes. Results are certified
//! against the equivalence theorem: the design's sensitivity function is
//! maximized over the space and converted into an efficiency lower bound.
//!
//! # Quick start
//!
//! ```
//! use oed::criteria::{efficiency_bound, CriterionKind, GridSpec};
//! use oed::engines::{run, EngineConfig, Variant};
//! use oed::models::get_problem;
//! use oed::objective::DesignObjective;
//!
//! let problem = get_problem(6).unwrap(); // Michaelis–Menten on [0, 5]
//! let objective = DesignObjective::with_default_repair(problem.clone(), CriterionKind::D);
//! let mut config = EngineConfig::new(Variant::Lshade, 10_000);
//! config.seed = 1;
//!
//! let record = run(&objective, &config).unwrap();
//! let design = objective.decode_design(&record.best_vector).unwrap();
//!
//! let grid = GridSpec::for_space(problem.space());
//! let report = efficiency_bound(CriterionKind::D, &design, &problem, &grid).unwrap();
//! assert!(report.efficiency_lower_bound > 0.99);
//! ```
//!
//! The `examples/` directory holds one runnable example per capability:
//! solving a problem, certifying a published design, comparing variants,
//! exporting a sensitivity grid, and inspecting convergence traces. The thin
//! `oed` binary exposes the same capabilities as subcommands.

pub mod cli;
pub mod criteria;
pub mod design;
pub mod encoding;
pub mod engines;
pub mod error;
pub mod formats;
pub mod harness;
pub mod models;
pub mod objective;

pub use criteria::{CertificationReport, CriterionKind, GridSpec};
pub use design::{clamp_to_space, information_matrix, Design, DesignSpace, InfoMatrix};
pub use encoding::{decode, encode, repair, Encoding, RepairConfig};
pub use engines::{run, EngineConfig, RunRecord, Variant};
pub use error::{Error, Result};
pub use harness::{run_experiment, ExperimentPlan, SummaryRow};
pub use models::{get_problem, ModelKind, ProblemSpec};
pub use objective::DesignObjective;
