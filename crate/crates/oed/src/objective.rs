//! Bridges a registered problem and criterion to the engines' search
//! interface: vectors are repaired into feasible design encodings, decoded,
//! and scored by the criterion.

use crate::criteria::{criterion_value, CriterionKind};
use crate::design::{information_matrix, Design};
use crate::encoding::{decode, repair_in_place, Encoding, RepairConfig};
use crate::engines::Objective;
use crate::error::Result;
use crate::models::ProblemSpec;

/// Criterion minimization target over encoded designs.
pub struct DesignObjective {
    problem: ProblemSpec,
    kind: CriterionKind,
    enc: Encoding,
    repair_cfg: RepairConfig,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl DesignObjective {
    /// Builds the objective with an explicit repair configuration.
    pub fn new(problem: ProblemSpec, kind: CriterionKind, repair_cfg: RepairConfig) -> Result<Self> {
        repair_cfg.validate()?;
        let enc = problem.encoding();
        let (lower, upper) = enc.bounds(problem.space());
        Ok(Self {
            problem,
            kind,
            enc,
            repair_cfg,
            lower,
            upper,
        })
    }

    /// Builds the objective with the scale-free repair defaults.
    pub fn with_default_repair(problem: ProblemSpec, kind: CriterionKind) -> Self {
        let repair_cfg = RepairConfig::for_space(problem.space());
        Self::new(problem, kind, repair_cfg).expect("defaults are valid")
    }

    /// The underlying problem.
    pub fn problem(&self) -> &ProblemSpec {
        &self.problem
    }

    /// The criterion being minimized.
    pub fn kind(&self) -> CriterionKind {
        self.kind
    }

    /// The flat-vector layout.
    pub fn encoding(&self) -> Encoding {
        self.enc
    }

    /// The repair thresholds in effect.
    pub fn repair_config(&self) -> &RepairConfig {
        &self.repair_cfg
    }

    /// Decodes a (repaired) vector into a design.
    pub fn decode_design(&self, v: &[f64]) -> Result<Design> {
        decode(v, self.enc)
    }
}

impl Objective for DesignObjective {
    fn dim(&self) -> usize {
        self.enc.dim()
    }

    fn lower(&self) -> &[f64] {
        &self.lower
    }

    fn upper(&self) -> &[f64] {
        &self.upper
    }

    fn repair(&self, v: &mut [f64]) {
        repair_in_place(v, self.enc, self.problem.space(), &self.repair_cfg);
    }

    fn value(&self, v: &[f64]) -> f64 {
        let design = decode(v, self.enc).expect("engine vectors match the encoding");
        let m = information_matrix(&design, &self.problem).expect("decoded design matches problem");
        criterion_value(self.kind, &m)
    }
}
