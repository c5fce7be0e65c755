//! The wire formats: measures as CSV (location,mass for atom lists,
//! location,cdf for piecewise-linear), couplings and kernels as JSON with
//! masses kept as exact rational strings. Parsing accepts decimals,
//! scientific notation, and n/d rationals interchangeably.
//!
//! Run with: cargo run --example file_formats

use dotrans::io::{
    coupling_from_json, coupling_to_csv, coupling_to_json, kernel_to_json, read_measure,
    read_samples, write_measure,
};
use dotrans::{couple, couple_general, Measure};

fn main() -> dotrans::Result<()> {
    // Atom lists: the same measure written three ways.
    let csv = "location,mass\n1/3,0.5\n2,5e-1\n";
    let m = read_measure(csv.as_bytes())?;
    print!("parsed and re-serialized:\n{}", write_measure(&m));

    // Piecewise-linear cdf breakpoints.
    let pl = read_measure("location,cdf\n0,0\n2,1\n".as_bytes())?;
    print!("\nuniform on [0,2]:\n{}", write_measure(&pl));

    // Raw samples become an equal-mass empirical measure.
    let emp = read_samples("4.5\n2.25\n4.5\n".as_bytes())?;
    print!(
        "\nthree samples (duplicates merge):\n{}",
        write_measure(&Measure::Discrete(emp.clone()))
    );

    // Couplings round-trip through JSON without losing a digit.
    let m2 = read_samples("5.0\n6.0\n7.0\n".as_bytes())?;
    let plan = couple(&emp, &m2)?;
    let json = coupling_to_json(&plan);
    println!("\ncoupling as JSON:\n{json}");
    assert_eq!(coupling_from_json(&json)?, plan);
    print!("\nsame coupling as CSV:\n{}", coupling_to_csv(&plan));

    // Kernels carry identity parts, map segments, and atom rows.
    let kernel = couple_general(&pl, &Measure::Discrete(m2))?;
    println!("\nkernel as JSON:\n{}", kernel_to_json(&kernel));
    Ok(())
}
