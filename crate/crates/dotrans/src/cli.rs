//! Command-line front end. Every library capability is a subcommand:
//! dominance checks, couplings, joint-cdf grids, effect bounds, map export,
//! antitone decomposition, cone-constrained couplings, and the randomized
//! self-check suite. Identical inputs and flags produce byte-identical
//! output.
//!
//! Exit codes follow sysexits where they fit: 0 success, 2 infeasible
//! (dominance fails, so no directional coupling exists), 64 bad usage or
//! unparsable input, 70 verification failure or internal error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::antitone::decompose;
use crate::cdf::MarginalPair;
use crate::cone::{couple_cone, ConeConstraint};
use crate::greedy::couple;
use crate::io::{
    atom_row_to_json, coupling_to_csv, coupling_to_json, kernel_to_json, measure_to_json,
    read_displacement_path, read_measure_path, read_samples_path,
};
use crate::measure::{dominance_violation, Measure};
use crate::rat::{format_f64, format_rat, parse_rat, rat_to_f64, Rat};
use crate::transport::{couple_general, variance_bounds, KernelCoupling};
use crate::verify::run_suite;
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_SOFTWARE: i32 = 70;

/// Run the command line on a full argument list (program name first) and
/// return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version land here too; they are not usage errors.
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Dominance { .. } | Error::LpInfeasible => EXIT_INFEASIBLE,
        Error::Parse(_)
        | Error::Io(_)
        | Error::InvalidMeasure(_)
        | Error::MassMismatch { .. }
        | Error::Displacement { .. } => EXIT_USAGE,
        _ => EXIT_SOFTWARE,
    }
}

#[derive(Parser)]
#[command(
    name = "dotrans",
    version,
    about = "Optimal directional couplings of scalar distributions",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct PairArgs {
    /// Source marginal: CSV measure file, or raw samples with --samples
    #[arg(long)]
    mu: PathBuf,

    /// Destination marginal
    #[arg(long)]
    nu: PathBuf,

    /// Treat input files as raw samples, one value per line, equal mass each
    #[arg(long)]
    samples: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Tsv,
}

/// Square evaluation grid: steps+1 equally spaced points per axis, exact
/// rational spacing.
#[derive(Clone)]
struct GridSpec {
    min: Rat,
    max: Rat,
    steps: usize,
}

impl GridSpec {
    fn points(&self) -> Vec<Rat> {
        let width = &self.max - &self.min;
        (0..=self.steps)
            .map(|i| &self.min + &width * Rat::new(i.into(), self.steps.into()))
            .collect()
    }
}

fn parse_grid_spec(s: &str) -> std::result::Result<GridSpec, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err("expected min:max:steps".into());
    }
    let min = parse_rat(parts[0]).ok_or_else(|| format!("bad grid minimum {:?}", parts[0]))?;
    let max = parse_rat(parts[1]).ok_or_else(|| format!("bad grid maximum {:?}", parts[1]))?;
    let steps: usize = parts[2]
        .parse()
        .map_err(|_| format!("bad step count {:?}", parts[2]))?;
    if steps == 0 {
        return Err("step count must be positive".into());
    }
    if min >= max {
        return Err("grid minimum must be below the maximum".into());
    }
    Ok(GridSpec { min, max, steps })
}

fn parse_rat_arg(s: &str) -> std::result::Result<Rat, String> {
    parse_rat(s).ok_or_else(|| format!("expected a decimal or n/d rational, found {s:?}"))
}

#[derive(Subcommand)]
enum Command {
    /// Check that the destination marginal stochastically dominates the source
    Check {
        #[command(flatten)]
        pair: PairArgs,
    },

    /// Compute the optimal directional coupling
    Couple {
        #[command(flatten)]
        pair: PairArgs,

        /// json (atom list or full kernel) or csv (atom list only)
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,

        /// Write here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Evaluate the joint cdf of the optimal coupling on a square grid
    Cdf {
        #[command(flatten)]
        pair: PairArgs,

        /// Evaluation grid min:max:steps (steps intervals, steps+1 points per axis)
        #[arg(long, value_parser = parse_grid_spec)]
        grid: GridSpec,

        /// tsv rows "x<TAB>y<TAB>F" (default), csv, or json
        #[arg(long, value_enum, default_value_t = Format::Tsv)]
        format: Format,

        /// Write here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Mean and sharp variance bounds for the effect Y - X
    Bounds {
        #[command(flatten)]
        pair: PairArgs,

        /// json instead of the plain-text report
        #[arg(long, value_enum)]
        format: Option<Format>,

        /// Write here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Export the transport map graph and the identity intervals as CSV
    Map {
        #[command(flatten)]
        pair: PairArgs,

        /// Directory for map.csv, identity.csv, and (when the coupling
        /// randomizes at source atoms) randomized.json
        #[arg(long)]
        out: PathBuf,
    },

    /// Split the coupling into an identity part plus antitone layers
    Decompose {
        #[command(flatten)]
        pair: PairArgs,

        /// Directory for summary.json and one layer_NNN.json per layer
        #[arg(long)]
        out: PathBuf,

        /// Upper bound on the number of layers
        #[arg(long, default_value_t = 64)]
        max_layers: usize,
    },

    /// Optimal coupling under the floor Y >= X + D(X)
    Cone {
        #[command(flatten)]
        pair: PairArgs,

        /// Constant displacement D
        #[arg(long, value_parser = parse_rat_arg)]
        min_gain: Option<Rat>,

        /// CSV of displacement breakpoints with header location,displacement
        #[arg(long)]
        displacement: Option<PathBuf>,

        /// json (atom list or full kernel) or csv (atom list only)
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,

        /// Write here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Check random instances against the brute-force oracles
    Verify {
        /// Seed for the instance stream
        #[arg(long, default_value_t = 7)]
        seed: u64,

        /// Number of random instances
        #[arg(long, default_value_t = 200)]
        count: usize,
    },
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Check { pair } => cmd_check(&pair),
        Command::Couple { pair, format, out } => cmd_couple(&pair, format, out.as_deref()),
        Command::Cdf {
            pair,
            grid,
            format,
            out,
        } => cmd_cdf(&pair, &grid, format, out.as_deref()),
        Command::Bounds { pair, format, out } => cmd_bounds(&pair, format, out.as_deref()),
        Command::Map { pair, out } => cmd_map(&pair, &out),
        Command::Decompose {
            pair,
            out,
            max_layers,
        } => cmd_decompose(&pair, &out, max_layers),
        Command::Cone {
            pair,
            min_gain,
            displacement,
            format,
            out,
        } => cmd_cone(&pair, min_gain, displacement.as_deref(), format, out.as_deref()),
        Command::Verify { seed, count } => cmd_verify(seed, count),
    }
}

fn load_measure(path: &Path, samples: bool) -> Result<Measure> {
    if samples {
        Ok(Measure::Discrete(read_samples_path(path)?))
    } else {
        read_measure_path(path)
    }
}

fn load_pair(pair: &PairArgs) -> Result<(Measure, Measure)> {
    Ok((
        load_measure(&pair.mu, pair.samples)?,
        load_measure(&pair.nu, pair.samples)?,
    ))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn write_artifact(path: &Path, text: &str) -> Result<()> {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    fs::write(path, text)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_check(pair: &PairArgs) -> Result<i32> {
    let (mu, nu) = load_pair(pair)?;
    if mu.total_mass() != nu.total_mass() {
        return Err(Error::MassMismatch {
            mu: format_rat(&mu.total_mass()),
            nu: format_rat(&nu.total_mass()),
        });
    }
    match dominance_violation(&mu, &nu)? {
        None => {
            println!("DOMINATED");
            Ok(EXIT_OK)
        }
        Some(x) => {
            println!("NOT DOMINATED at x = {}", format_f64(rat_to_f64(&x)));
            Ok(EXIT_INFEASIBLE)
        }
    }
}

fn cmd_couple(pair: &PairArgs, format: Format, out: Option<&Path>) -> Result<i32> {
    let (mu, nu) = load_pair(pair)?;
    let text = match (&mu, &nu) {
        (Measure::Discrete(a), Measure::Discrete(b)) => {
            let plan = couple(a, b)?;
            match format {
                Format::Json => coupling_to_json(&plan),
                Format::Csv => coupling_to_csv(&plan),
                Format::Tsv => return Err(tsv_rejected()),
            }
        }
        _ => kernel_text(&couple_general(&mu, &nu)?, format)?,
    };
    emit(out, &text)?;
    Ok(EXIT_OK)
}

fn tsv_rejected() -> Error {
    Error::Parse("tsv applies to grid output; use json or csv".into())
}

/// A kernel that is purely atomic serializes as a plain coupling; anything
/// with continuous parts keeps the full kernel schema (json only).
fn kernel_text(kernel: &KernelCoupling, format: Format) -> Result<String> {
    match format {
        Format::Json => Ok(match kernel.to_coupling() {
            Some(plan) => coupling_to_json(&plan),
            None => kernel_to_json(kernel),
        }),
        Format::Csv => match kernel.to_coupling() {
            Some(plan) => Ok(coupling_to_csv(&plan)),
            None => Err(Error::Parse(
                "csv needs a purely atomic coupling; this one has continuous parts, use json"
                    .into(),
            )),
        },
        Format::Tsv => Err(tsv_rejected()),
    }
}

fn cmd_cdf(pair: &PairArgs, grid: &GridSpec, format: Format, out: Option<&Path>) -> Result<i32> {
    let (mu, nu) = load_pair(pair)?;
    let joint = MarginalPair::new(mu, nu)?;
    let points = grid.points();
    let mut text = String::new();
    match format {
        Format::Tsv | Format::Csv => {
            let sep = if format == Format::Tsv { '\t' } else { ',' };
            if format == Format::Csv {
                text.push_str("x,y,F\n");
            }
            for x in &points {
                for y in &points {
                    let f = joint.p_star_cdf_rat(x, y);
                    let _ = writeln!(
                        text,
                        "{}{sep}{}{sep}{}",
                        format_f64(rat_to_f64(x)),
                        format_f64(rat_to_f64(y)),
                        format_f64(rat_to_f64(&f))
                    );
                }
            }
        }
        Format::Json => {
            text.push_str("{\"points\":[");
            let mut first = true;
            for x in &points {
                for y in &points {
                    if !first {
                        text.push(',');
                    }
                    first = false;
                    let f = joint.p_star_cdf_rat(x, y);
                    let _ = write!(
                        text,
                        "{{\"x\":{},\"y\":{},\"F\":\"{}\"}}",
                        format_f64(rat_to_f64(x)),
                        format_f64(rat_to_f64(y)),
                        format_rat(&f)
                    );
                }
            }
            text.push_str("]}");
        }
    }
    emit(out, &text)?;
    Ok(EXIT_OK)
}

fn cmd_bounds(pair: &PairArgs, format: Option<Format>, out: Option<&Path>) -> Result<i32> {
    let (mu, nu) = load_pair(pair)?;
    let b = variance_bounds(&mu, &nu)?;
    let text = match format {
        None => format!(
            "E[Y-X] = {}\nVar lower = {}\nVar upper = {}",
            format_rat(&b.mean),
            format_rat(&b.var_lower),
            format_rat(&b.var_upper)
        ),
        Some(Format::Json) => format!(
            "{{\"mean\":\"{}\",\"var_lower\":\"{}\",\"var_upper\":\"{}\"}}",
            format_rat(&b.mean),
            format_rat(&b.var_lower),
            format_rat(&b.var_upper)
        ),
        Some(_) => {
            return Err(Error::Parse(
                "bounds prints a text report by default; the only other format is json".into(),
            ))
        }
    };
    emit(out, &text)?;
    Ok(EXIT_OK)
}

fn cmd_map(pair: &PairArgs, out: &Path) -> Result<i32> {
    let (mu, nu) = load_pair(pair)?;
    let kernel = couple_general(&mu, &nu)?;
    fs::create_dir_all(out)?;

    let mut map_csv = String::from("x,T(x)\n");
    for s in kernel.segments() {
        let _ = writeln!(
            map_csv,
            "{},{}",
            format_f64(rat_to_f64(&s.x0)),
            format_f64(rat_to_f64(&s.t0))
        );
        let _ = writeln!(
            map_csv,
            "{},{}",
            format_f64(rat_to_f64(&s.x1)),
            format_f64(rat_to_f64(&s.t1))
        );
    }
    let mut randomized = Vec::new();
    for r in kernel.atom_rows() {
        match dirac_location(&r.dest) {
            Some(y) => {
                let _ = writeln!(
                    map_csv,
                    "{},{}",
                    format_f64(rat_to_f64(&r.x)),
                    format_f64(rat_to_f64(&y))
                );
            }
            None => randomized.push(r),
        }
    }
    write_artifact(&out.join("map.csv"), &map_csv)?;

    let mut id_csv = String::from("x0,x1,mass\n");
    for (a, b, m) in identity_intervals(kernel.identity_part()) {
        let _ = writeln!(
            id_csv,
            "{},{},{}",
            format_f64(rat_to_f64(&a)),
            format_f64(rat_to_f64(&b)),
            format_rat(&m)
        );
    }
    write_artifact(&out.join("identity.csv"), &id_csv)?;

    if !randomized.is_empty() {
        let rows: Vec<String> = randomized.iter().map(|r| atom_row_to_json(r)).collect();
        let text = format!("{{\"atom_rows\":[{}]}}", rows.join(","));
        write_artifact(&out.join("randomized.json"), &text)?;
    }
    Ok(EXIT_OK)
}

fn dirac_location(m: &Measure) -> Option<Rat> {
    match m {
        Measure::Discrete(d) if d.atoms().len() == 1 => Some(d.atoms()[0].0.clone()),
        _ => None,
    }
}

/// Maximal intervals carrying the identity part: single points for atoms,
/// support runs for a piecewise-linear part.
fn identity_intervals(m: &Measure) -> Vec<(Rat, Rat, Rat)> {
    match m {
        Measure::Discrete(d) => d
            .atoms()
            .iter()
            .map(|(x, w)| (x.clone(), x.clone(), w.clone()))
            .collect(),
        Measure::Pl(p) => {
            let mut runs = Vec::new();
            let mut start: Option<(Rat, Rat)> = None;
            let mut end: Option<(Rat, Rat)> = None;
            for (x0, x1, f0, f1) in p.segments() {
                if f1 > f0 {
                    if start.is_none() {
                        start = Some((x0.clone(), f0.clone()));
                    }
                    end = Some((x1.clone(), f1.clone()));
                } else if let (Some((sx, sf)), Some((ex, ef))) = (start.take(), end.take()) {
                    runs.push((sx, ex, ef - sf));
                }
            }
            if let (Some((sx, sf)), Some((ex, ef))) = (start, end) {
                runs.push((sx, ex, ef - sf));
            }
            runs
        }
    }
}

fn cmd_decompose(pair: &PairArgs, out: &Path, max_layers: usize) -> Result<i32> {
    let (mu, nu) = load_pair(pair)?;
    let dec = decompose(&mu, &nu, max_layers)?;
    fs::create_dir_all(out)?;
    let mut summary = String::from("{\"identity\":");
    summary.push_str(&measure_to_json(dec.identity_part()));
    summary.push_str(",\"layers\":[");
    for (i, layer) in dec.layers().iter().enumerate() {
        if i > 0 {
            summary.push(',');
        }
        let name = format!("layer_{i:03}.json");
        let _ = write!(
            summary,
            "{{\"file\":\"{name}\",\"peak\":{},\"mass\":\"{}\"}}",
            format_f64(rat_to_f64(&layer.peak)),
            format_rat(&layer.coupling.total_mass())
        );
        write_artifact(&out.join(name), &kernel_to_json(&layer.coupling))?;
    }
    summary.push_str("]}");
    write_artifact(&out.join("summary.json"), &summary)?;
    Ok(EXIT_OK)
}

fn cmd_cone(
    pair: &PairArgs,
    min_gain: Option<Rat>,
    displacement: Option<&Path>,
    format: Format,
    out: Option<&Path>,
) -> Result<i32> {
    let constraint = match (min_gain, displacement) {
        (Some(d), None) => ConeConstraint::constant_rat(d)?,
        (None, Some(path)) => ConeConstraint::from_rat_breakpoints(read_displacement_path(path)?)?,
        _ => {
            return Err(Error::Parse(
                "provide exactly one of --min-gain and --displacement".into(),
            ))
        }
    };
    let (mu, nu) = load_pair(pair)?;
    let kernel = couple_cone(&mu, &nu, &constraint)?;
    let text = kernel_text(&kernel, format)?;
    emit(out, &text)?;
    Ok(EXIT_OK)
}

fn cmd_verify(seed: u64, count: usize) -> Result<i32> {
    let report = run_suite(seed, count);
    println!("{}/{} instances passed", report.passed, report.total);
    if report.all_passed() {
        Ok(EXIT_OK)
    } else {
        for failure in &report.failures {
            eprintln!("{failure}");
        }
        Ok(EXIT_SOFTWARE)
    }
}
