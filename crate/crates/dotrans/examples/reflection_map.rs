//! Transport maps for continuous marginals. Uniform on [0,2] to uniform on
//! [1,2] is carried by a deterministic map (reflect the left half, keep the
//! right half). Uniform on [0,1] to uniform on [0,2] cannot be: every point
//! flips a fair coin between staying put and reflecting, and the kernel
//! says so.
//!
//! Run with: cargo run --example reflection_map

use dotrans::rat::{format_f64, format_rat, rat_to_f64};
use dotrans::{monge_couple, KernelCoupling, Measure, PlMeasure};

fn measure_line(m: &Measure) -> String {
    let parts: Vec<String> = match m {
        Measure::Discrete(d) => d
            .atoms()
            .iter()
            .map(|(x, w)| format!("{} at {}", format_rat(w), format_f64(rat_to_f64(x))))
            .collect(),
        Measure::Pl(p) => p
            .points()
            .iter()
            .map(|(x, f)| format!("({}, {})", format_f64(rat_to_f64(x)), format_rat(f)))
            .collect(),
    };
    if parts.is_empty() {
        "none".into()
    } else {
        parts.join("  ")
    }
}

fn describe(label: &str, kernel: &KernelCoupling) {
    println!("{label}");
    println!("  deterministic map: {}", kernel.is_monge());
    println!("  identity part: {}", measure_line(kernel.identity_part()));
    for s in kernel.segments() {
        println!(
            "  on [{}, {}] density {}: T maps it affinely onto [{}, {}]",
            format_f64(rat_to_f64(&s.x0)),
            format_f64(rat_to_f64(&s.x1)),
            format_rat(&s.density),
            format_f64(rat_to_f64(&s.t0)),
            format_f64(rat_to_f64(&s.t1))
        );
    }
}

fn main() -> dotrans::Result<()> {
    // Pure map: the optimal coupling moves [0,1] by x -> 2 - x and leaves
    // [1,2] alone; the moved part and the fixed part live on disjoint sets.
    let mu = PlMeasure::uniform(0.0, 2.0)?;
    let nu = PlMeasure::uniform(1.0, 2.0)?;
    describe("uniform [0,2] -> uniform [1,2]:", &monge_couple(&mu, &nu)?);

    // Randomized: half the mass of every x in [0,1] stays, half reflects to
    // 2 - x. No deterministic map has these marginals y >= x almost surely
    // while staying minimal, because the fixed and the moved part overlap.
    let mu = PlMeasure::uniform(0.0, 1.0)?;
    let nu = PlMeasure::uniform(0.0, 2.0)?;
    let kernel = monge_couple(&mu, &nu)?;
    describe("\nuniform [0,1] -> uniform [0,2]:", &kernel);

    // The kernel is exact: P(X <= 1/2, Y <= 6/5) = 1/4.
    println!(
        "\njoint cdf at (0.5, 1.2): {}",
        format_f64(kernel.cdf(0.5, 1.2))
    );
    Ok(())
}
