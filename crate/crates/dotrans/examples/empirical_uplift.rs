//! Unpaired samples from a control arm and a treated arm, coupled into the
//! least optimistic "everyone moved up" account the data allow, with sharp
//! bounds on the variance of the individual effect.
//!
//! Run with: cargo run --example empirical_uplift

use dotrans::rat::{format_f64, format_rat, rat_to_f64};
use dotrans::{couple, variance_bounds, DiscreteMeasure, Measure};

fn main() -> dotrans::Result<()> {
    // Arms of different sizes are fine: masses stay 1/6 and 1/4 exactly,
    // and the coupling splits mass where the denominators disagree.
    let control = [12.5, 14.0, 9.5, 11.25, 14.0, 10.0];
    let treated = [13.5, 15.25, 12.75, 16.0];
    let mu = DiscreteMeasure::from_samples(&control)?;
    let nu = DiscreteMeasure::from_samples(&treated)?;

    let plan = couple(&mu, &nu)?;
    println!("coupled moves (control value -> treated value):");
    for (x, y, m) in plan.points() {
        println!(
            "  {:>5} -> {:<5}  mass {}",
            format_f64(rat_to_f64(x)),
            format_f64(rat_to_f64(y)),
            format_rat(m)
        );
    }

    // The mean effect is pinned by the marginals; its variance is not.
    // The comonotone coupling gives the lower bound, the directional
    // optimum the upper bound, and both are attained.
    let b = variance_bounds(&Measure::Discrete(mu), &Measure::Discrete(nu))?;
    println!("\nE[Y - X]  = {} ({})", format_rat(&b.mean), rat_to_f64(&b.mean));
    println!(
        "Var(Y - X) in [{}, {}]  ([{}, {}])",
        format_rat(&b.var_lower),
        format_rat(&b.var_upper),
        rat_to_f64(&b.var_lower),
        rat_to_f64(&b.var_upper)
    );
    Ok(())
}
