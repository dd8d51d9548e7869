//! Versioned file formats and table formatting.
//!
//! * design files: `{"schema_version":"1","points":[[...],...],"weights":[...]}`
//! * solver output records and certification reports (JSON, lossless round-trip)
//! * benchmark plans: flat `key = value` documents
//! * problem-override files replacing nominal θ and/or bounds
//! * CSV cells: `.` decimal, scientific notation with six significant digits

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::criteria::{CertificationReport, CriterionKind};
use crate::design::Design;
use crate::engines::Variant;
use crate::error::{Error, Result};
use crate::harness::ExperimentPlan;

/// Current schema version for every JSON format in this module.
pub const SCHEMA_VERSION: &str = "1";

/// On-disk design representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignFile {
    /// Format version; always "1".
    pub schema_version: String,
    /// Support-point coordinates.
    pub points: Vec<Vec<f64>>,
    /// Weights, parallel to `points`.
    pub weights: Vec<f64>,
}

impl DesignFile {
    /// Snapshot of a design.
    pub fn from_design(design: &Design) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.into(),
            points: design.points().to_vec(),
            weights: design.weights().to_vec(),
        }
    }

    /// Validates the schema version and rebuilds the design.
    pub fn to_design(&self) -> Result<Design> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidConfig(format!(
                "unsupported design schema_version {:?}",
                self.schema_version
            )));
        }
        Design::new(self.points.clone(), self.weights.clone())
    }

    /// Reads and parses a design file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Result record printed by the `solve` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    /// Format version; always "1".
    pub schema_version: String,
    /// Problem id solved.
    pub problem: u32,
    /// Criterion minimized.
    pub criterion: CriterionKind,
    /// Engine name.
    pub variant: String,
    /// Repaired best design (positive-weight rows).
    pub design: DesignFile,
    /// Final criterion value.
    pub criterion_value: f64,
    /// Equivalence-theorem efficiency lower bound.
    pub efficiency_bound: f64,
    /// Seed the run used.
    pub seed: u64,
}

/// Certification report printed by the `verify` command.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyOutput {
    /// Format version; always "1".
    pub schema_version: String,
    /// Problem id the design was certified against.
    pub problem: u32,
    /// Criterion used.
    pub criterion: CriterionKind,
    /// The certification details.
    #[serde(flatten)]
    pub report: CertificationReport,
}

/// Declarative override of a registered problem's nominal θ and bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    /// Format version; always "1".
    pub schema_version: String,
    /// Registered problem id the override applies to.
    pub problem: u32,
    /// Replacement nominal parameters.
    #[serde(default)]
    pub theta: Option<Vec<f64>>,
    /// Replacement lower bounds.
    #[serde(default)]
    pub lower: Option<Vec<f64>>,
    /// Replacement upper bounds.
    #[serde(default)]
    pub upper: Option<Vec<f64>>,
}

impl ProblemFile {
    /// Reads and parses an override file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: ProblemFile = serde_json::from_str(&text)?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidConfig(format!(
                "unsupported problem schema_version {:?}",
                file.schema_version
            )));
        }
        Ok(file)
    }
}

/// One trace line per run inside benchmark JSONL files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceRow {
    /// Problem id.
    pub problem: u32,
    /// Criterion minimized.
    pub criterion: CriterionKind,
    /// Engine name.
    pub variant: String,
    /// Run index within the cell.
    pub run: usize,
    /// Seed of this run.
    pub seed: u64,
    /// Final criterion value.
    pub final_value: f64,
    /// Wall-clock seconds.
    pub elapsed: f64,
    /// `(FES, best value)` checkpoints.
    pub history: Vec<(u64, f64)>,
}

/// Scientific notation with six significant digits and a signed two-digit
/// exponent, e.g. `5.252800E+00`.
pub fn sci6(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{:.5e}", x);
    let (mantissa, exp) = s.split_once('e').expect("float formatting");
    let exp: i32 = exp.parse().expect("float exponent");
    format!("{mantissa}E{exp:+03}")
}

/// Parses an id list like `1-7` or `1,3,9-12`.
pub fn parse_id_list(text: &str) -> Result<Vec<u32>> {
    let mut ids = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        if let Some((lo, hi)) = part.split_once('-') {
            let lo: u32 = parse_num(lo)?;
            let hi: u32 = parse_num(hi)?;
            if lo > hi {
                return Err(Error::InvalidConfig(format!("empty id range {part:?}")));
            }
            ids.extend(lo..=hi);
        } else {
            ids.push(parse_num(part)?);
        }
    }
    if ids.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "no problem ids in {text:?}"
        )));
    }
    Ok(ids)
}

fn parse_num<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("invalid number {s:?}")))
}

/// Parses a flat `key = value` plan document. Recognized keys: `problems`,
/// `criterion`, `variants`, `runs`, `seed`, `fes`, and per-problem `fes.<id>`
/// overrides. `#` starts a comment.
pub fn parse_plan(text: &str) -> Result<ExperimentPlan> {
    let mut problems: Option<Vec<u32>> = None;
    let mut criterion: Option<CriterionKind> = None;
    let mut variants: Option<Vec<Variant>> = None;
    let mut runs: usize = 25;
    let mut seed: u64 = 0;
    let mut fes_global: Option<u64> = None;
    let mut fes_overrides: BTreeMap<u32, u64> = BTreeMap::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::InvalidConfig(format!("plan line {}: expected key = value", lineno + 1))
        })?;
        let key = key.trim();
        let value = value.trim();
        match key {
            "problems" => problems = Some(parse_id_list(value)?),
            "criterion" => criterion = Some(value.parse()?),
            "variants" => {
                let list = value
                    .split(',')
                    .map(|v| v.trim().parse::<Variant>())
                    .collect::<Result<Vec<_>>>()?;
                variants = Some(list);
            }
            "runs" => runs = parse_num(value)?,
            "seed" => seed = parse_num(value)?,
            "fes" => fes_global = Some(parse_num(value)?),
            _ if key.starts_with("fes.") => {
                let id: u32 = parse_num(&key[4..])?;
                fes_overrides.insert(id, parse_num(value)?);
            }
            other => {
                return Err(Error::InvalidConfig(format!(
                    "plan line {}: unknown key {other:?}",
                    lineno + 1
                )))
            }
        }
    }

    let problem_ids =
        problems.ok_or_else(|| Error::InvalidConfig("plan is missing `problems`".into()))?;
    let criterion =
        criterion.ok_or_else(|| Error::InvalidConfig("plan is missing `criterion`".into()))?;
    let variants =
        variants.ok_or_else(|| Error::InvalidConfig("plan is missing `variants`".into()))?;

    let mut plan = ExperimentPlan::new(problem_ids, criterion, variants);
    plan.runs = runs;
    plan.base_seed = seed;
    if let Some(fes) = fes_global {
        for id in &plan.problem_ids {
            plan.fes_overrides.insert(*id, fes);
        }
    }
    for (id, fes) in fes_overrides {
        plan.fes_overrides.insert(id, fes);
    }
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sci6_formatting() {
        assert_eq!(sci6(5.2528), "5.25280E+00");
        assert_eq!(sci6(9.405e6), "9.40500E+06");
        assert_eq!(sci6(-8.6005), "-8.60050E+00");
        assert_eq!(sci6(1.1133e-5), "1.11330E-05");
        assert_eq!(sci6(0.0), "0.00000E+00");
    }

    #[test]
    fn id_list_parsing() {
        assert_eq!(parse_id_list("1-4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(parse_id_list("6").unwrap(), vec![6]);
        assert_eq!(parse_id_list("1,3,9-10").unwrap(), vec![1, 3, 9, 10]);
        assert!(parse_id_list("5-2").is_err());
        assert!(parse_id_list("x").is_err());
    }

    #[test]
    fn plan_round_trip() {
        let text = "
            # smoke plan
            problems = 6
            criterion = d
            variants = jade, lshade
            runs = 3
            seed = 11
            fes = 2000
            fes.6 = 1500
        ";
        let plan = parse_plan(text).unwrap();
        assert_eq!(plan.problem_ids, vec![6]);
        assert_eq!(plan.criterion, CriterionKind::D);
        assert_eq!(plan.variants, vec![Variant::Jade, Variant::Lshade]);
        assert_eq!(plan.runs, 3);
        assert_eq!(plan.base_seed, 11);
        assert_eq!(plan.max_fes_for(6), 1500, "per-problem override wins");
    }

    #[test]
    fn plan_rejects_unknown_keys() {
        assert!(parse_plan("problems = 1\ncriterion = d\nvariants = jade\nbudget = 7").is_err());
        assert!(parse_plan("criterion = d\nvariants = jade").is_err());
    }

    #[test]
    fn design_file_round_trip() {
        let design = Design::new(vec![vec![0.7143], vec![5.0]], vec![0.5, 0.5]).unwrap();
        let file = DesignFile::from_design(&design);
        let json = serde_json::to_string(&file).unwrap();
        let parsed: DesignFile = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed, file);
        assert_eq!(parsed.to_design().unwrap(), design);
    }

    #[test]
    fn design_file_rejects_other_versions() {
        let file = DesignFile {
            schema_version: "2".into(),
            points: vec![vec![0.0]],
            weights: vec![1.0],
        };
        assert!(file.to_design().is_err());
    }

    #[test]
    fn output_record_round_trips() {
        let record = OutputRecord {
            schema_version: SCHEMA_VERSION.into(),
            problem: 6,
            criterion: CriterionKind::D,
            variant: "LSHADE".into(),
            design: DesignFile {
                schema_version: SCHEMA_VERSION.into(),
                points: vec![vec![0.7143], vec![5.0]],
                weights: vec![0.5, 0.5],
            },
            criterion_value: 5.2528,
            efficiency_bound: 1.0,
            seed: 1,
        };
        let json = serde_json::to_string_pretty(&record).unwrap();
        let parsed: OutputRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed, record);
    }
}
