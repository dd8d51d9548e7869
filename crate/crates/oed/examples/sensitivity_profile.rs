//! Export the sensitivity function of a design as CSV, the data behind the
//! standard equivalence-theorem plot: S(x) stays below zero over the whole
//! space and touches it exactly at the support points of an optimal design.
//!
//! Run with: `cargo run --example sensitivity_profile > profile.csv`

use oed::criteria::{CriterionKind, SensitivityEvaluator};
use oed::design::Design;
use oed::models::get_problem;

fn main() {
    let problem = get_problem(6).unwrap();
    // D-optimal design for the Michaelis-Menten model on [0, 5].
    let design = Design::new(vec![vec![5.0 / 7.0], vec![5.0]], vec![0.5, 0.5]).unwrap();

    let evaluator = SensitivityEvaluator::new(CriterionKind::D, &design, &problem).unwrap();

    println!("x,S");
    let resolution = 101;
    let (lo, up) = (problem.space().lower()[0], problem.space().upper()[0]);
    for t in 0..resolution {
        let x = lo + (up - lo) * t as f64 / (resolution - 1) as f64;
        println!("{:.4},{:+.6e}", x, evaluator.eval(&[x]));
    }
}
