//! Couplings under a floor on the gain: Y >= X + D(X) instead of Y >= X.
//! Any piecewise-linear D with slopes above -1 works, because x + D(x) is
//! then strictly increasing and the problem transforms into an ordinary
//! directional one.
//!
//! Run with: cargo run --example cone_floor

use dotrans::rat::{format_f64, format_rat, rat, rat_to_f64};
use dotrans::{couple_cone, ConeConstraint, DiscreteMeasure, KernelCoupling, Measure};

fn print_plan(label: &str, kernel: &KernelCoupling) {
    println!("{label}");
    match kernel.to_coupling() {
        Some(plan) => {
            for (x, y, m) in plan.points() {
                println!(
                    "  {} -> {}  mass {}",
                    format_f64(rat_to_f64(x)),
                    format_f64(rat_to_f64(y)),
                    format_rat(m)
                );
            }
        }
        None => println!("  (not purely atomic)"),
    }
}

fn main() -> dotrans::Result<()> {
    let mu = Measure::Discrete(DiscreteMeasure::from_atoms(vec![
        (0.0, rat(1, 2)),
        (1.0, rat(1, 2)),
    ])?);
    let nu = Measure::Discrete(DiscreteMeasure::from_atoms(vec![
        (1.0, rat(1, 2)),
        (2.0, rat(1, 2)),
    ])?);

    // No floor beyond Y >= X: the optimum pairs low with high (antitone).
    let plain = couple_cone(&mu, &nu, &ConeConstraint::constant(0.0)?)?;
    print_plan("D = 0 (plain directional):", &plain);

    // Everyone must gain at least 1: the antitone plan is no longer
    // feasible, the comonotone plan is forced.
    let floored = couple_cone(&mu, &nu, &ConeConstraint::constant(1.0)?)?;
    print_plan("\nD = 1 (gain at least 1 everywhere):", &floored);

    // A sloped floor: D(x) = -x/2 lets high positions give part of their
    // gain back. Slope -1/2 stays above the -1 limit.
    let sloped = ConeConstraint::from_breakpoints(&[(0.0, 0.0), (4.0, -2.0)])?;
    let kernel = couple_cone(&mu, &nu, &sloped)?;
    print_plan("\nD(x) = -x/2 (sloped floor):", &kernel);

    // Ask for more than the marginals can deliver and the constrained
    // problem is infeasible.
    match couple_cone(&mu, &nu, &ConeConstraint::constant(2.0)?) {
        Err(e) => println!("\nD = 2 is infeasible: {e}"),
        Ok(_) => unreachable!("mass at 1 cannot reach 3"),
    }
    Ok(())
}
