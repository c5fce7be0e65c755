//! The shadow of a part of the source is the stochastically smallest piece
//! of the destination that still dominates it. Shadows explain where the
//! greedy coupling sends tails, and they add up: the shadow of a sum is the
//! shadow of one part plus the shadow of the other in what remains.
//!
//! Run with: cargo run --example shadow_tails

use std::collections::BTreeMap;
use std::ops::Bound;

use dotrans::measure::shadow;
use dotrans::rat::{format_f64, format_rat, rat, rat_int, rat_to_f64, Rat};
use dotrans::{couple, DiscreteMeasure};

fn print_measure(label: &str, m: &DiscreteMeasure) {
    let parts: Vec<String> = m
        .atoms()
        .iter()
        .map(|(x, w)| format!("{} at {}", format_rat(w), format_f64(rat_to_f64(x))))
        .collect();
    println!("{label}{}", parts.join(", "));
}

fn main() -> dotrans::Result<()> {
    let mu = DiscreteMeasure::from_atoms(vec![
        (0.0, rat(1, 4)),
        (2.0, rat(1, 4)),
        (5.0, rat(1, 2)),
    ])?;
    let nu = DiscreteMeasure::from_atoms(vec![
        (1.0, rat(1, 4)),
        (4.0, rat(1, 4)),
        (6.0, rat(1, 2)),
    ])?;

    // Shadow of the top source atom: the lowest destination mass that sits
    // at or above 5 in the dominance order.
    let top = mu.restrict(Bound::Included(5.0), Bound::Unbounded)?;
    let s = shadow(&top, &nu)?;
    print_measure("shadow of the mass at 5: ", &s.shadow);

    // The greedy coupling sends each upper tail of the source exactly onto
    // the shadow of that tail.
    let plan = couple(&mu, &nu)?;
    let mut image: BTreeMap<Rat, Rat> = BTreeMap::new();
    for (x, y, m) in plan.points() {
        if rat_to_f64(x) >= 5.0 {
            *image.entry(y.clone()).or_insert_with(|| rat_int(0)) += m;
        }
    }
    let image = DiscreteMeasure::from_rat_atoms(image.into_iter().collect())?;
    print_measure("image of the tail under the coupling: ", &image);
    assert_eq!(image, s.shadow);

    // Additivity: shadow the parts one after the other and the results sum
    // to the shadow of the whole.
    let lower = mu.restrict(Bound::Unbounded, Bound::Excluded(5.0))?;
    let s_top = shadow(&top, &nu)?;
    let rest = nu.subtract(&s_top.shadow)?;
    let s_lower = shadow(&lower, &rest)?;
    let whole = shadow(&mu, &nu)?;
    assert_eq!(s_top.shadow.add(&s_lower.shadow), whole.shadow);
    print_measure("shadow of everything (equals the sum of stages): ", &whole.shadow);
    Ok(())
}
