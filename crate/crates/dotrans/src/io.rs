//! File formats. Measures travel as CSV with a required header: column pair
//! location,mass for atom lists, location,cdf for piecewise-linear
//! breakpoints. Raw samples are one value per line. Couplings travel as
//! JSON with masses kept as exact rational strings, and kernels as a JSON
//! object listing the identity part, map segments, and atom rows. All
//! numeric fields accept decimals, scientific notation, or n/d rationals.

use crate::coupling::Coupling;
use crate::measure::{DiscreteMeasure, Measure, PlMeasure};
use crate::rat::{format_f64, format_rat, parse_rat, rat_to_f64, Rat};
use crate::transport::KernelCoupling;
use crate::{Error, Result};
use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

fn parse_field(s: &str, what: &str) -> Result<Rat> {
    parse_rat(s).ok_or_else(|| Error::Parse(format!("bad {what}: {s:?}")))
}

/// Read a measure from CSV. The header decides the kind: location,mass
/// gives an atom list, location,cdf gives piecewise-linear breakpoints.
pub fn read_measure(reader: impl Read) -> Result<Measure> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse(format!("csv header: {e}")))?;
    let cols: Vec<String> = headers.iter().map(|h| h.trim().to_lowercase()).collect();
    let kind = match cols.as_slice() {
        [a, b] if a == "location" && b == "mass" => MeasureKind::Discrete,
        [a, b] if a == "location" && b == "cdf" => MeasureKind::Pl,
        _ => {
            return Err(Error::Parse(format!(
                "expected header location,mass or location,cdf; found {}",
                cols.join(",")
            )))
        }
    };
    let mut rows: Vec<(Rat, Rat)> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse(format!("csv row: {e}")))?;
        if record.len() != 2 {
            return Err(Error::Parse(format!(
                "expected 2 fields, found {}",
                record.len()
            )));
        }
        let loc = parse_field(&record[0], "location")?;
        let val = parse_field(&record[1], kind.value_name())?;
        rows.push((loc, val));
    }
    match kind {
        MeasureKind::Discrete => Ok(Measure::Discrete(DiscreteMeasure::from_rat_atoms(rows)?)),
        MeasureKind::Pl => Ok(Measure::Pl(PlMeasure::from_rat_points(rows)?)),
    }
}

enum MeasureKind {
    Discrete,
    Pl,
}

impl MeasureKind {
    fn value_name(&self) -> &'static str {
        match self {
            MeasureKind::Discrete => "mass",
            MeasureKind::Pl => "cdf",
        }
    }
}

pub fn read_measure_path(path: &Path) -> Result<Measure> {
    let file = std::fs::File::open(path)?;
    read_measure(std::io::BufReader::new(file))
}

/// Measure back to CSV, locations and values as exact rational strings.
pub fn write_measure(m: &Measure) -> String {
    let mut out = String::new();
    match m {
        Measure::Discrete(d) => {
            out.push_str("location,mass\n");
            for (x, mass) in d.atoms() {
                let _ = writeln!(out, "{},{}", format_rat(x), format_rat(mass));
            }
        }
        Measure::Pl(p) => {
            out.push_str("location,cdf\n");
            for (x, f) in p.points() {
                let _ = writeln!(out, "{},{}", format_rat(x), format_rat(f));
            }
        }
    }
    out
}

/// Read one value per line into an equal-mass empirical measure; blank
/// lines are skipped and repeated values merge by summing their mass.
pub fn read_samples(reader: impl Read) -> Result<DiscreteMeasure> {
    let mut text = String::new();
    let mut reader = reader;
    reader.read_to_string(&mut text)?;
    let values: Vec<Rat> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| parse_field(l, "sample"))
        .collect::<Result<_>>()?;
    if values.is_empty() {
        return Err(Error::Parse("sample file has no values".into()));
    }
    let w = Rat::new(1.into(), values.len().into());
    DiscreteMeasure::from_rat_atoms(values.into_iter().map(|x| (x, w.clone())).collect())
}

pub fn read_samples_path(path: &Path) -> Result<DiscreteMeasure> {
    let file = std::fs::File::open(path)?;
    read_samples(std::io::BufReader::new(file))
}

/// Read displacement breakpoints from CSV with header
/// location,displacement: the (x, D(x)) anchors of a piecewise-linear
/// floor Y ≥ X + D(X).
pub fn read_displacement(reader: impl Read) -> Result<Vec<(Rat, Rat)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse(format!("csv header: {e}")))?;
    let cols: Vec<String> = headers.iter().map(|h| h.trim().to_lowercase()).collect();
    if cols.as_slice() != ["location", "displacement"] {
        return Err(Error::Parse(format!(
            "expected header location,displacement; found {}",
            cols.join(",")
        )));
    }
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse(format!("csv row: {e}")))?;
        if record.len() != 2 {
            return Err(Error::Parse(format!(
                "expected 2 fields, found {}",
                record.len()
            )));
        }
        rows.push((
            parse_field(&record[0], "location")?,
            parse_field(&record[1], "displacement")?,
        ));
    }
    Ok(rows)
}

pub fn read_displacement_path(path: &Path) -> Result<Vec<(Rat, Rat)>> {
    let file = std::fs::File::open(path)?;
    read_displacement(std::io::BufReader::new(file))
}

/// Coupling as JSON: {"points":[{"x":0,"y":2,"mass":"1/2"},...]} with
/// points sorted by (x, y) and masses as exact rational strings.
pub fn coupling_to_json(c: &Coupling) -> String {
    let mut out = String::from("{\"points\":[");
    for (i, (x, y, m)) in c.points().iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(
            out,
            "{{\"x\":{},\"y\":{},\"mass\":\"{}\"}}",
            format_f64(rat_to_f64(x)),
            format_f64(rat_to_f64(y)),
            format_rat(m)
        );
    }
    out.push_str("]}");
    out
}

fn json_number_or_rational(v: &serde_json::Value, what: &str) -> Result<Rat> {
    match v {
        serde_json::Value::String(s) => parse_field(s, what),
        serde_json::Value::Number(n) => {
            let s = n.to_string();
            parse_field(&s, what)
        }
        _ => Err(Error::Parse(format!("bad {what}: {v}"))),
    }
}

pub fn coupling_from_json(text: &str) -> Result<Coupling> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("json: {e}")))?;
    let points = value
        .get("points")
        .and_then(|p| p.as_array())
        .ok_or_else(|| Error::Parse("missing points array".into()))?;
    let mut triples = Vec::with_capacity(points.len());
    for p in points {
        let x = p
            .get("x")
            .ok_or_else(|| Error::Parse("point missing x".into()))?;
        let y = p
            .get("y")
            .ok_or_else(|| Error::Parse("point missing y".into()))?;
        let m = p
            .get("mass")
            .ok_or_else(|| Error::Parse("point missing mass".into()))?;
        triples.push((
            json_number_or_rational(x, "x")?,
            json_number_or_rational(y, "y")?,
            json_number_or_rational(m, "mass")?,
        ));
    }
    Coupling::from_rat_points(triples)
}

/// Coupling as CSV with header x,y,mass.
pub fn coupling_to_csv(c: &Coupling) -> String {
    let mut out = String::from("x,y,mass\n");
    for (x, y, m) in c.points() {
        let _ = writeln!(
            out,
            "{},{},{}",
            format_f64(rat_to_f64(x)),
            format_f64(rat_to_f64(y)),
            format_rat(m)
        );
    }
    out
}

pub(crate) fn measure_to_json(m: &Measure) -> String {
    let mut out = String::new();
    match m {
        Measure::Discrete(d) => {
            out.push_str("{\"type\":\"discrete\",\"atoms\":[");
            for (i, (x, mass)) in d.atoms().iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(
                    out,
                    "{{\"location\":{},\"mass\":\"{}\"}}",
                    format_f64(rat_to_f64(x)),
                    format_rat(mass)
                );
            }
            out.push_str("]}");
        }
        Measure::Pl(p) => {
            out.push_str("{\"type\":\"pl\",\"points\":[");
            for (i, (x, f)) in p.points().iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(
                    out,
                    "{{\"location\":{},\"cdf\":\"{}\"}}",
                    format_f64(rat_to_f64(x)),
                    format_rat(f)
                );
            }
            out.push_str("]}");
        }
    }
    out
}

/// Kernel coupling as JSON: the identity part, affine map segments
/// (constant density on [x0,x1] mapped affinely onto [t0,t1]), and atom
/// rows (source atom spread over a destination measure), plus the map flag.
pub fn kernel_to_json(kc: &KernelCoupling) -> String {
    let mut out = String::from("{\"monge\":");
    out.push_str(if kc.is_monge() { "true" } else { "false" });
    out.push_str(",\"identity\":");
    out.push_str(&measure_to_json(kc.identity_part()));
    out.push_str(",\"segments\":[");
    for (i, s) in kc.segments().iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(
            out,
            "{{\"x0\":{},\"x1\":{},\"density\":\"{}\",\"t0\":{},\"t1\":{}}}",
            format_f64(rat_to_f64(&s.x0)),
            format_f64(rat_to_f64(&s.x1)),
            format_rat(&s.density),
            format_f64(rat_to_f64(&s.t0)),
            format_f64(rat_to_f64(&s.t1))
        );
    }
    out.push_str("],\"atom_rows\":[");
    for (i, r) in kc.atom_rows().iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&atom_row_to_json(r));
    }
    out.push_str("]}");
    out
}

pub(crate) fn atom_row_to_json(r: &crate::transport::AtomRow) -> String {
    format!(
        "{{\"x\":{},\"mass\":\"{}\",\"dest\":{}}}",
        format_f64(rat_to_f64(&r.x)),
        format_rat(&r.mass),
        measure_to_json(&r.dest)
    )
}
