//! Atoms in the marginals are handled by an exact change of variable: every
//! atom of mass m becomes an interval of length m, the transformed
//! marginals are atomless, and the transformed solution is pulled back.
//! This example walks the reduction for uniform mass sent onto two atoms.
//!
//! Run with: cargo run --example atom_reduction

use dotrans::rat::{format_f64, format_rat, rat, rat_to_f64};
use dotrans::{couple_general, j_transform, DiscreteMeasure, Measure, PlMeasure};

fn main() -> dotrans::Result<()> {
    let mu = Measure::Pl(PlMeasure::uniform(0.0, 2.0)?);
    let nu = Measure::Discrete(DiscreteMeasure::from_atoms(vec![
        (1.0, rat(1, 2)),
        (2.0, rat(1, 2)),
    ])?);

    // j(x) = x + total atom mass at or below x, applied to both marginals.
    let red = j_transform(&mu, &nu)?;
    println!("jump intervals inserted by the change of variable:");
    for (x, lo, hi, mu_side) in red.jump_intervals() {
        println!(
            "  atom at {} ({}) -> interval [{}, {}]",
            format_f64(rat_to_f64(&x)),
            if mu_side { "source" } else { "destination" },
            format_f64(rat_to_f64(&lo)),
            format_f64(rat_to_f64(&hi))
        );
    }
    println!(
        "transformed source breakpoints: {:?}",
        red.mu_t
            .points()
            .iter()
            .map(|(x, f)| (rat_to_f64(x), format_rat(f)))
            .collect::<Vec<_>>()
    );
    println!(
        "transformed destination breakpoints: {:?}",
        red.nu_t
            .points()
            .iter()
            .map(|(x, f)| (rat_to_f64(x), format_rat(f)))
            .collect::<Vec<_>>()
    );

    // The full pipeline does the reduction, solves the atomless problem,
    // and pulls the answer back: here a two-step map.
    let kernel = couple_general(&mu, &nu)?;
    println!("\npulled-back coupling (a step map):");
    for s in kernel.segments() {
        println!(
            "  [{}, {}] with density {} -> [{}, {}]",
            format_f64(rat_to_f64(&s.x0)),
            format_f64(rat_to_f64(&s.x1)),
            format_rat(&s.density),
            format_f64(rat_to_f64(&s.t0)),
            format_f64(rat_to_f64(&s.t1))
        );
    }
    println!("deterministic map: {}", kernel.is_monge());
    Ok(())
}
