//! The joint cdf of the optimal directional coupling in closed form, next
//! to the pointwise lower and upper envelopes it lives between. The lower
//! envelope is attained exactly when the difference of the marginal cdfs is
//! unimodal; a two-bump difference forces a strict gap somewhere.
//!
//! Run with: cargo run --example joint_cdf_bounds

use dotrans::rat::{format_rat, rat, rat_int, Rat};
use dotrans::{DiscreteMeasure, MarginalPair, Measure};

fn print_table(pair: &MarginalPair, points: &[Rat]) {
    println!("      x      y     low     F*     high");
    for x in points {
        for y in points {
            if y < x {
                continue;
            }
            let low = pair.bound_lower_rat(x, y);
            let f = pair.p_star_cdf_rat(x, y);
            let high = pair.bound_upper_rat(x, y);
            assert!(low <= f && f <= high);
            let marker = if f > low { "  <- above the lower bound" } else { "" };
            println!(
                "  {:>5}  {:>5}  {:>5}  {:>5}  {:>5}{marker}",
                format_rat(x),
                format_rat(y),
                format_rat(&low),
                format_rat(&f),
                format_rat(&high)
            );
        }
    }
}

fn main() -> dotrans::Result<()> {
    // One hump: cdf difference rises then falls, the optimal cdf IS the
    // lower envelope.
    let mu = DiscreteMeasure::from_atoms(vec![(0.0, rat(1, 2)), (1.0, rat(1, 2))])?;
    let nu = DiscreteMeasure::from_atoms(vec![(1.0, rat(1, 2)), (2.0, rat(1, 2))])?;
    let pair = MarginalPair::new(Measure::Discrete(mu), Measure::Discrete(nu))?;
    println!("unimodal instance (lower bound attained everywhere):");
    println!("  unimodal: {}", pair.is_unimodal());
    let pts: Vec<Rat> = (0..=2).map(rat_int).collect();
    print_table(&pair, &pts);

    // Two humps: the optimum must sit strictly above the lower envelope at
    // some corners; the envelope is not a cdf of any directional coupling.
    let mu = DiscreteMeasure::from_atoms(vec![(0.0, rat(1, 2)), (2.0, rat(1, 2))])?;
    let nu = DiscreteMeasure::from_atoms(vec![(1.0, rat(1, 2)), (3.0, rat(1, 2))])?;
    let pair = MarginalPair::new(Measure::Discrete(mu), Measure::Discrete(nu))?;
    println!("\ntwo-bump instance:");
    println!("  unimodal: {}", pair.is_unimodal());
    let pts: Vec<Rat> = (0..=3).map(rat_int).collect();
    print_table(&pair, &pts);
    Ok(())
}
