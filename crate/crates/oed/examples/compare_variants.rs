//! Compare DE variants on one problem: seeded multi-run batches, summary
//! statistics, and the pairwise Wilcoxon rank-sum matrix.
//!
//! Run with: `cargo run --example compare_variants`

use oed::criteria::CriterionKind;
use oed::engines::Variant;
use oed::formats::sci6;
use oed::harness::{aggregate_comparison, run_experiment, ExperimentPlan};

fn main() {
    let variants = vec![Variant::DeRand1, Variant::Jade, Variant::Lshade];
    let mut plan = ExperimentPlan::new(vec![4, 6], CriterionKind::D, variants.clone());
    plan.runs = 7;
    plan.base_seed = 42;
    plan.fes_overrides.insert(4, 5_000);
    plan.fes_overrides.insert(6, 5_000);

    let results = run_experiment(&plan).unwrap();

    println!("problem,variant,best,median,worst,mean,std");
    for (&(problem, variant), cell) in &results.cells {
        let s = &cell.summary;
        println!(
            "{},{},{},{},{},{},{}",
            problem,
            variant,
            sci6(s.best),
            sci6(s.median),
            sci6(s.worst),
            sci6(s.mean),
            sci6(s.std)
        );
    }

    println!();
    println!("Wilcoxon rank-sum at 0.05 over {} problems,", plan.problem_ids.len());
    println!("cell = losses/wins/ties of the row variant against the column:");
    print!("{:>10}", "");
    for v in &variants {
        print!("{:>12}", v.name());
    }
    println!();
    for &target in &variants {
        print!("{:>10}", target.name());
        for &other in &variants {
            let cell = aggregate_comparison(&results, &plan.problem_ids, target, other).unwrap();
            print!("{:>12}", cell.to_string());
        }
        println!();
    }
}
