//! Smallest end-to-end run: check stochastic dominance, build the optimal
//! directional coupling of two four-point distributions, and read off the
//! joint moves it prescribes.
//!
//! Run with: cargo run --example quickstart

use dotrans::measure::stochastic_dominates;
use dotrans::rat::{format_f64, format_rat, rat, rat_to_f64};
use dotrans::{couple, DiscreteMeasure, Measure};

fn main() -> dotrans::Result<()> {
    // Outcomes before and after an intervention that never hurts anyone.
    let before = DiscreteMeasure::from_atoms(vec![
        (10.0, rat(1, 4)),
        (20.0, rat(1, 4)),
        (30.0, rat(1, 4)),
        (40.0, rat(1, 4)),
    ])?;
    let after = DiscreteMeasure::from_atoms(vec![
        (15.0, rat(1, 4)),
        (25.0, rat(1, 4)),
        (45.0, rat(1, 2)),
    ])?;

    let mu = Measure::Discrete(before.clone());
    let nu = Measure::Discrete(after.clone());
    println!(
        "destination dominates source: {}",
        stochastic_dominates(&mu, &nu)?
    );

    // Among all joint laws with these marginals and Y >= X pointwise, this
    // is the one minimal in concordance order: it keeps everyone as low as
    // the marginals allow while still moving everyone up.
    let plan = couple(&before, &after)?;
    println!("\noptimal directional coupling:");
    for (x, y, m) in plan.points() {
        println!(
            "  {:>4} -> {:<4}  mass {}",
            format_f64(rat_to_f64(x)),
            format_f64(rat_to_f64(y)),
            format_rat(m)
        );
    }

    // Its signature: no two support points can be swapped into a crossing.
    println!(
        "\ncrossing-free: {}",
        plan.find_improvable_pair()?.is_none()
    );
    println!(
        "mean uplift E[Y - X] = {} (marginal quantity, same for every coupling)",
        format_rat(&(after.mean_rat() - before.mean_rat()))
    );
    Ok(())
}
