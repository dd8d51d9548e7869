//! Flat-vector encoding of designs and the repair operation.
//!
//! An individual encodes a design as `[x₁, ω₁, ..., x_nSupp, ω_nSupp]`:
//! `n_supp` blocks, each holding one support point followed by its weight.
//!
//! Repair turns an arbitrary vector into a feasible design encoding:
//!
//! 1. clamp coordinates to the design space and weights to `[0, 1]`;
//! 2. normalize weights to sum one;
//! 3. sort rows by coordinates and merge every pair of positive-weight
//!    points closer than `merge_eps` into their midpoint carrying the
//!    summed weight, repeating until no mergeable pair remains;
//! 4. delete rows with weight below `min_weight` (keeping the heaviest row
//!    if that would delete everything);
//! 5. pad back to `n_supp` rows with zero-weight rows at the lower corner;
//! 6. renormalize.
//!
//! Every evaluated individual passes through repair first, so criterion
//! values are always computed on feasible designs and the number of distinct
//! support points is discovered rather than fixed in advance.

use crate::design::{Design, DesignSpace};
use crate::error::{Error, Result};

/// Fixed layout of an encoded individual.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Encoding {
    /// Number of point/weight blocks.
    pub n_supp: usize,
    /// Coordinates per point.
    pub n_factors: usize,
}

impl Encoding {
    /// Layout with `n_supp` blocks of `n_factors + 1` genes.
    pub fn new(n_supp: usize, n_factors: usize) -> Self {
        debug_assert!(n_supp > 0 && n_factors > 0);
        Self { n_supp, n_factors }
    }

    /// Total gene count `n_supp · (n_factors + 1)`.
    pub fn dim(self) -> usize {
        self.n_supp * (self.n_factors + 1)
    }

    /// Per-gene search bounds: factor bounds for coordinates, `[0, 1]` for
    /// weights.
    pub fn bounds(self, space: &DesignSpace) -> (Vec<f64>, Vec<f64>) {
        let mut lower = Vec::with_capacity(self.dim());
        let mut upper = Vec::with_capacity(self.dim());
        for _ in 0..self.n_supp {
            lower.extend_from_slice(space.lower());
            upper.extend_from_slice(space.upper());
            lower.push(0.0);
            upper.push(1.0);
        }
        (lower, upper)
    }
}

/// Thresholds steering the repair operation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepairConfig {
    /// Euclidean distance below which two support points merge.
    pub merge_eps: f64,
    /// Weight below which a support point is deleted.
    pub min_weight: f64,
}

impl RepairConfig {
    /// Scale-free defaults: `merge_eps` is 2.5% of the space diameter,
    /// `min_weight` is 0.01.
    pub fn for_space(space: &DesignSpace) -> Self {
        Self {
            merge_eps: 0.025 * space.diameter(),
            min_weight: 0.01,
        }
    }

    /// Validates threshold ranges.
    pub fn validate(&self) -> Result<()> {
        if !(self.merge_eps > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "merge_eps must be positive, got {}",
                self.merge_eps
            )));
        }
        if !(0.0..1.0).contains(&self.min_weight) {
            return Err(Error::InvalidConfig(format!(
                "min_weight must lie in [0, 1), got {}",
                self.min_weight
            )));
        }
        Ok(())
    }
}

/// Decodes a flat vector into a design. Weights are taken as-is; feasibility
/// is repair's job.
pub fn decode(vector: &[f64], enc: Encoding) -> Result<Design> {
    if vector.len() != enc.dim() {
        return Err(Error::DimensionMismatch(format!(
            "vector length {} does not match encoding dimension {}",
            vector.len(),
            enc.dim()
        )));
    }
    let block = enc.n_factors + 1;
    let mut points = Vec::with_capacity(enc.n_supp);
    let mut weights = Vec::with_capacity(enc.n_supp);
    for chunk in vector.chunks_exact(block) {
        points.push(chunk[..enc.n_factors].to_vec());
        weights.push(chunk[enc.n_factors]);
    }
    Design::new(points, weights)
}

/// Inverse of [`decode`] on the fixed layout.
pub fn encode(design: &Design, enc: Encoding) -> Result<Vec<f64>> {
    if design.len() != enc.n_supp || design.n_factors() != enc.n_factors {
        return Err(Error::DimensionMismatch(format!(
            "design shape ({}, {}) does not match encoding ({}, {})",
            design.len(),
            design.n_factors(),
            enc.n_supp,
            enc.n_factors
        )));
    }
    let mut v = Vec::with_capacity(enc.dim());
    for (point, w) in design.points().iter().zip(design.weights()) {
        v.extend_from_slice(point);
        v.push(*w);
    }
    Ok(v)
}

/// One decoded row during repair.
#[derive(Clone)]
struct Row {
    coords: Vec<f64>,
    weight: f64,
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn sort_rows(rows: &mut [Row]) {
    rows.sort_by(|a, b| {
        for (x, y) in a.coords.iter().zip(&b.coords) {
            match x.total_cmp(y) {
                std::cmp::Ordering::Equal => continue,
                ord => return ord,
            }
        }
        a.weight.total_cmp(&b.weight)
    });
}

fn normalize_weights(rows: &mut [Row]) {
    let sum: f64 = rows.iter().map(|r| r.weight).sum();
    if sum > 0.0 {
        for r in rows.iter_mut() {
            r.weight /= sum;
        }
    } else {
        // No mass anywhere; fall back to the uniform design.
        let u = 1.0 / rows.len() as f64;
        for r in rows.iter_mut() {
            r.weight = u;
        }
    }
}

/// Sweeps sorted rows, merging positive-weight pairs closer than `eps` into
/// their midpoint with summed weight, until no such pair remains.
fn merge_close_rows(rows: &mut Vec<Row>, eps: f64) {
    loop {
        sort_rows(rows);
        let mut merged = false;
        let mut i = 0;
        while i < rows.len() {
            if rows[i].weight <= 0.0 {
                i += 1;
                continue;
            }
            let mut j = i + 1;
            while j < rows.len() {
                if rows[j].weight > 0.0 && dist(&rows[i].coords, &rows[j].coords) < eps {
                    let other = rows.remove(j);
                    let row = &mut rows[i];
                    for (c, o) in row.coords.iter_mut().zip(&other.coords) {
                        *c = 0.5 * (*c + *o);
                    }
                    row.weight += other.weight;
                    merged = true;
                } else {
                    j += 1;
                }
            }
            i += 1;
        }
        if !merged {
            break;
        }
    }
}

/// Repairs one encoded individual in place.
pub fn repair_in_place(vector: &mut [f64], enc: Encoding, space: &DesignSpace, cfg: &RepairConfig) {
    debug_assert_eq!(vector.len(), enc.dim());
    let block = enc.n_factors + 1;

    // 1. Clamp coordinates and weights.
    let mut rows: Vec<Row> = vector
        .chunks_exact(block)
        .map(|chunk| Row {
            coords: chunk[..enc.n_factors]
                .iter()
                .zip(space.lower().iter().zip(space.upper()))
                .map(|(x, (lo, up))| x.clamp(*lo, *up))
                .collect(),
            weight: chunk[enc.n_factors].clamp(0.0, 1.0),
        })
        .collect();

    // 2. First normalization pass.
    normalize_weights(&mut rows);

    // 3. Merge near-duplicate support points.
    merge_close_rows(&mut rows, cfg.merge_eps);

    // 4. Delete low-weight rows, keeping the heaviest if all fall below.
    let survivors: Vec<Row> = rows
        .iter()
        .filter(|r| r.weight >= cfg.min_weight)
        .cloned()
        .collect();
    rows = if survivors.is_empty() {
        let heaviest = rows
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| a.weight.total_cmp(&b.weight))
            .map(|(i, _)| i)
            .expect("repair input has at least one row");
        vec![rows[heaviest].clone()]
    } else {
        survivors
    };

    // 5. Pad with zero-weight rows at the lower corner.
    while rows.len() < enc.n_supp {
        rows.push(Row {
            coords: space.lower().to_vec(),
            weight: 0.0,
        });
    }

    // 6. Final normalization pass.
    normalize_weights(&mut rows);

    for (chunk, row) in vector.chunks_exact_mut(block).zip(&rows) {
        chunk[..enc.n_factors].copy_from_slice(&row.coords);
        chunk[enc.n_factors] = row.weight;
    }
}

/// Repairs a whole population, individual by individual.
pub fn repair(
    population: &mut [Vec<f64>],
    enc: Encoding,
    space: &DesignSpace,
    cfg: &RepairConfig,
) {
    for vector in population.iter_mut() {
        repair_in_place(vector, enc, space, cfg);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn enc2() -> Encoding {
        Encoding::new(2, 1)
    }

    #[test]
    fn decode_two_point_design() {
        let design = decode(&[0.7143, 0.5, 5.0, 0.5], enc2()).unwrap();
        assert_eq!(design.points(), &[vec![0.7143], vec![5.0]]);
        assert_eq!(design.weights(), &[0.5, 0.5]);
    }

    #[test]
    fn decode_all_zero_vector() {
        let enc = Encoding::new(3, 2);
        let design = decode(&vec![0.0; enc.dim()], enc).unwrap();
        assert_eq!(design.len(), 3);
        assert!(design.points().iter().all(|p| p == &[0.0, 0.0]));
        assert!(design.weights().iter().all(|w| *w == 0.0));
    }

    #[test]
    fn decode_rejects_wrong_length() {
        assert!(decode(&[0.0; 5], enc2()).is_err());
    }

    #[test]
    fn exact_duplicates_merge_to_single_point() {
        let space = DesignSpace::interval(0.0, 5.0).unwrap();
        let cfg = RepairConfig::for_space(&space);
        let mut v = vec![2.0, 0.5, 2.0, 0.5];
        repair_in_place(&mut v, enc2(), &space, &cfg);
        let d = decode(&v, enc2()).unwrap();
        assert_eq!(d.n_support(), 1);
        let (point, w) = d.support().next().unwrap();
        assert_eq!(point, &[2.0]);
        assert!((w - 1.0).abs() < 1e-12);
        // Padded back to two rows, the second at the lower corner with weight 0.
        assert_eq!(d.len(), 2);
        assert_eq!(d.weights().iter().filter(|w| **w == 0.0).count(), 1);
    }

    #[test]
    fn oversized_weights_normalize() {
        let space = DesignSpace::interval(0.0, 5.0).unwrap();
        let cfg = RepairConfig {
            merge_eps: 1e-6,
            min_weight: 0.0,
        };
        let mut v = vec![1.0, 2.0, 4.0, 2.0];
        repair_in_place(&mut v, enc2(), &space, &cfg);
        let d = decode(&v, enc2()).unwrap();
        assert_eq!(d.weights(), &[0.5, 0.5]);
    }

    #[test]
    fn merge_uses_midpoint_and_weight_sum() {
        let space = DesignSpace::interval(0.0, 5.0).unwrap();
        let cfg = RepairConfig {
            merge_eps: 0.5,
            min_weight: 0.01,
        };
        let mut v = vec![1.0, 0.25, 1.2, 0.75];
        repair_in_place(&mut v, enc2(), &space, &cfg);
        let d = decode(&v, enc2()).unwrap();
        assert_eq!(d.n_support(), 1);
        let (point, w) = d.support().next().unwrap();
        assert!((point[0] - 1.1).abs() < 1e-12);
        assert!((w - 1.0).abs() < 1e-12);
    }

    #[test]
    fn low_weight_rows_are_deleted_and_mass_renormalized() {
        let space = DesignSpace::interval(0.0, 5.0).unwrap();
        let cfg = RepairConfig {
            merge_eps: 1e-9,
            min_weight: 0.05,
        };
        // Weights normalize to (0.02, 0.98); the first row dies.
        let mut v = vec![1.0, 0.02, 4.0, 0.98];
        repair_in_place(&mut v, enc2(), &space, &cfg);
        let d = decode(&v, enc2()).unwrap();
        assert_eq!(d.n_support(), 1);
        let (point, w) = d.support().next().unwrap();
        assert_eq!(point, &[4.0]);
        assert!((w - 1.0).abs() < 1e-12);
    }

    #[test]
    fn delete_all_guard_retains_heaviest_row() {
        let space = DesignSpace::interval(0.0, 5.0).unwrap();
        let cfg = RepairConfig {
            merge_eps: 1e-9,
            min_weight: 0.9,
        };
        // Normalized weights (0.4, 0.6) both fall below 0.9.
        let mut v = vec![1.0, 0.4, 4.0, 0.6];
        repair_in_place(&mut v, enc2(), &space, &cfg);
        let d = decode(&v, enc2()).unwrap();
        assert_eq!(d.n_support(), 1);
        let (point, w) = d.support().next().unwrap();
        assert_eq!(point, &[4.0]);
        assert!((w - 1.0).abs() < 1e-12);
    }

    #[test]
    fn all_zero_weights_fall_back_to_uniform() {
        let space = DesignSpace::interval(0.0, 5.0).unwrap();
        let cfg = RepairConfig {
            merge_eps: 1e-9,
            min_weight: 0.01,
        };
        let mut v = vec![1.0, 0.0, 4.0, -2.0];
        repair_in_place(&mut v, enc2(), &space, &cfg);
        let d = decode(&v, enc2()).unwrap();
        assert!(d.is_normalized(1e-12));
        assert_eq!(d.n_support(), 2);
    }

    #[test]
    fn encode_round_trips_decode() {
        let enc = Encoding::new(3, 2);
        let v: Vec<f64> = (0..enc.dim()).map(|i| i as f64 * 0.37).collect();
        let d = decode(&v, enc).unwrap();
        assert_eq!(encode(&d, enc).unwrap(), v);
    }
}
