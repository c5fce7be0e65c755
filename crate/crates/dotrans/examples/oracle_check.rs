//! The brute-force side of the crate: exhaustive vertex enumeration and an
//! exact rational simplex over the directional transport polytope. On small
//! instances they certify the greedy construction, the closed-form cdf, and
//! the claim that the directional constraint genuinely changes the optimum.
//!
//! Run with: cargo run --example oracle_check

use dotrans::oracle::{enumerate_directional, lp_optimal, min_cdf, Sense, TransportPolytopeInstance};
use dotrans::rat::{format_rat, rat, rat_int};
use dotrans::verify::run_suite;
use dotrans::{couple, CostFn, DiscreteMeasure, MarginalPair, Measure};

fn main() -> dotrans::Result<()> {
    let third = rat(1, 3);
    let mu = DiscreteMeasure::from_atoms(vec![
        (0.0, third.clone()),
        (1.0, third.clone()),
        (2.0, third.clone()),
    ])?;
    let nu = DiscreteMeasure::from_atoms(vec![
        (1.0, third.clone()),
        (2.0, third.clone()),
        (3.0, third),
    ])?;

    // The greedy plan equals the unique maximizer of the strictly
    // submodular reward -xy over all directional couplings.
    let inst = TransportPolytopeInstance::directional(&mu, &nu)?;
    let vertices = enumerate_directional(&inst)?;
    println!("directional vertices: {}", vertices.len());
    let plan = couple(&mu, &nu)?;
    let (value, argmax) = lp_optimal(&inst, &CostFn::NegProduct, Sense::Max)?;
    assert_eq!(plan, argmax);
    println!(
        "greedy equals the -xy maximizer, objective {}",
        format_rat(&value)
    );

    // The closed-form joint cdf equals the minimal cdf over the polytope,
    // corner by corner.
    let pair = MarginalPair::new(Measure::Discrete(mu.clone()), Measure::Discrete(nu.clone()))?;
    for x in 0..=3 {
        for y in 0..=3 {
            let closed = pair.p_star_cdf_rat(&rat_int(x), &rat_int(y));
            let brute = min_cdf(&inst, x as f64, y as f64)?;
            assert_eq!(closed, brute);
        }
    }
    println!("closed-form cdf equals the polytope minimum on the 4x4 corner grid");

    // Dropping the constraint changes the answer: for the concave cost
    // sqrt|y - x| the unconstrained optimal transport is strictly cheaper
    // than the best directional plan, so the two problems differ.
    let mu = DiscreteMeasure::from_atoms(vec![(0.0, rat(1, 2)), (13.0, rat(1, 2))])?;
    let nu = DiscreteMeasure::from_atoms(vec![(12.0, rat(1, 2)), (25.0, rat(1, 2))])?;
    let free = TransportPolytopeInstance::unconstrained(&mu, &nu)?;
    let cost = CostFn::AbsDiffPow(0.5);
    let (free_value, free_plan) = lp_optimal(&free, &cost, Sense::Min)?;
    let directional = couple(&mu, &nu)?.expected_cost(&cost)?;
    println!(
        "\nsqrt-cost: unconstrained minimum {} vs directional optimum {:.4}",
        format_rat(&free_value),
        directional
    );
    assert!(free_plan.points().iter().any(|(x, y, _)| y < x));

    // The randomized suite bundles these comparisons over a seeded stream
    // of instances.
    let report = run_suite(11, 50);
    println!(
        "\nrandomized suite: {}/{} instances passed",
        report.passed, report.total
    );
    assert!(report.all_passed());
    Ok(())
}
