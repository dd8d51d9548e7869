//! Certify a hand-specified design without running any optimizer: evaluate
//! its criterion value, the sensitivity at each support point, and the
//! efficiency lower bound.
//!
//! The design below is the known D-optimum for the biexponential decay model
//! (problem 1): four equally weighted points.
//!
//! Run with: `cargo run --example certify_design`

use oed::criteria::{criterion_value, efficiency_bound, CriterionKind, GridSpec};
use oed::design::{information_matrix, Design};
use oed::models::get_problem;

fn main() {
    let problem = get_problem(1).unwrap();
    let design = Design::new(
        vec![vec![0.0], vec![0.3141], vec![1.1307], vec![2.7523]],
        vec![0.25, 0.25, 0.25, 0.25],
    )
    .unwrap();

    let m = information_matrix(&design, &problem).unwrap();
    println!(
        "D-criterion value: {:.6}",
        criterion_value(CriterionKind::D, &m)
    );

    let grid = GridSpec::for_space(problem.space());
    let report = efficiency_bound(CriterionKind::D, &design, &problem, &grid).unwrap();

    println!("support sensitivities (zero at a D-optimal design):");
    for s in &report.support_sensitivities {
        println!("  x = {:>7.4}   S = {:+.3e}", s.point[0], s.s);
    }
    println!(
        "max sensitivity {:+.3e} at x = {:.4}",
        report.max_sensitivity, report.arg_max[0]
    );
    println!(
        "D-efficiency lower bound: {:.6}",
        report.efficiency_lower_bound
    );
}
