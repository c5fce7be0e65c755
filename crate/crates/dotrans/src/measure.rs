//! Scalar measures: finite atomic measures and atomless measures with
//! piecewise-constant density, plus the stochastic order, common part, and
//! shadow operations the coupling constructions are built from.
//!
//! Both representations are closed under the operations here; mixed
//! atomic-plus-diffuse measures only ever appear through the atom reduction
//! in [`crate::transport`]. Subprobabilities are allowed everywhere (shadow
//! arguments need masses strictly below 1).

use crate::greedy::AvailabilityPool;
use crate::rat::{rat_from_f64, rat_to_f64, Rat};
use crate::{Error, Result};
use num_traits::Zero;
use std::ops::Bound;

/// Finite sorted list of weighted atoms. Locations strictly increasing,
/// masses positive rationals; duplicates merge on construction. The empty
/// measure is allowed (differences produce it).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteMeasure {
    atoms: Vec<(Rat, Rat)>,
    cum: Vec<Rat>,
}

/// Atomless measure given by its piecewise-linear cdf. Breakpoints are
/// (location, cdf value); the first cdf value is 0, values are nondecreasing,
/// and the representation is canonical: no leading or trailing flat segments
/// and no collinear interior breakpoints, so `==` is measure equality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlMeasure {
    points: Vec<(Rat, Rat)>,
}

/// Either representation, for the operations that accept both.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Measure {
    Discrete(DiscreteMeasure),
    Pl(PlMeasure),
}

/// Minimal measure θ with μ0 ≼st θ ≤ ν, plus the greedy transport witnessing
/// it. Every assignment row has destination ≥ origin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShadowResult {
    pub shadow: DiscreteMeasure,
    pub assignment: Vec<(Rat, Rat, Rat)>,
}

fn mass_mismatch(mu: &Rat, nu: &Rat) -> Error {
    Error::MassMismatch {
        mu: mu.to_string(),
        nu: nu.to_string(),
    }
}

impl DiscreteMeasure {
    pub fn from_rat_atoms(atoms: Vec<(Rat, Rat)>) -> Result<Self> {
        let mut atoms = atoms;
        atoms.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(Rat, Rat)> = Vec::with_capacity(atoms.len());
        for (x, m) in atoms {
            if m.is_zero() {
                continue;
            }
            if m < Rat::zero() {
                return Err(Error::InvalidMeasure(format!(
                    "negative mass {m} at {}",
                    rat_to_f64(&x)
                )));
            }
            match merged.last_mut() {
                Some((lx, lm)) if *lx == x => *lm += m,
                _ => merged.push((x, m)),
            }
        }
        let mut cum = Vec::with_capacity(merged.len());
        let mut acc = Rat::zero();
        for (_, m) in &merged {
            acc += m;
            cum.push(acc.clone());
        }
        Ok(Self { atoms: merged, cum })
    }

    pub fn from_atoms(atoms: Vec<(f64, Rat)>) -> Result<Self> {
        let converted = atoms
            .into_iter()
            .map(|(x, m)| {
                rat_from_f64(x)
                    .map(|r| (r, m))
                    .ok_or_else(|| Error::InvalidMeasure(format!("non-finite location {x}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rat_atoms(converted)
    }

    /// Equal mass 1/n per sample; duplicate samples merge by summing.
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidMeasure("no samples".into()));
        }
        let w = Rat::new(1.into(), samples.len().into());
        Self::from_atoms(samples.iter().map(|&x| (x, w.clone())).collect())
    }

    pub fn zero() -> Self {
        Self {
            atoms: Vec::new(),
            cum: Vec::new(),
        }
    }

    pub fn single(x: f64, mass: Rat) -> Result<Self> {
        Self::from_atoms(vec![(x, mass)])
    }

    pub fn atoms(&self) -> &[(Rat, Rat)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> Rat {
        self.cum.last().cloned().unwrap_or_else(Rat::zero)
    }

    pub fn mass_at(&self, x: &Rat) -> Rat {
        match self.atoms.binary_search_by(|(loc, _)| loc.cmp(x)) {
            Ok(i) => self.atoms[i].1.clone(),
            Err(_) => Rat::zero(),
        }
    }

    pub fn cdf_rat(&self, x: &Rat) -> Rat {
        let idx = self.atoms.partition_point(|(loc, _)| loc <= x);
        if idx == 0 {
            Rat::zero()
        } else {
            self.cum[idx - 1].clone()
        }
    }

    /// Left limit F(x−).
    pub fn cdf_left_rat(&self, x: &Rat) -> Rat {
        let idx = self.atoms.partition_point(|(loc, _)| loc < x);
        if idx == 0 {
            Rat::zero()
        } else {
            self.cum[idx - 1].clone()
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match rat_from_f64(x) {
            Some(r) => rat_to_f64(&self.cdf_rat(&r)),
            None if x.is_nan() => f64::NAN,
            None if x > 0.0 => rat_to_f64(&self.total_mass()),
            None => 0.0,
        }
    }

    pub fn quantile_rat(&self, p: &Rat) -> Result<Rat> {
        let total = self.total_mass();
        if *p <= Rat::zero() || *p > total {
            return Err(Error::QuantileRange {
                level: rat_to_f64(p),
                total: rat_to_f64(&total),
            });
        }
        let idx = self.cum.partition_point(|c| c < p);
        Ok(self.atoms[idx].0.clone())
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        let p = rat_from_f64(p).ok_or_else(|| Error::QuantileRange {
            level: p,
            total: rat_to_f64(&self.total_mass()),
        })?;
        Ok(rat_to_f64(&self.quantile_rat(&p)?))
    }

    pub fn mean_rat(&self) -> Rat {
        self.atoms.iter().map(|(x, m)| x * m).sum()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        Self::from_rat_atoms(atoms).expect("sum of valid measures is valid")
    }

    /// Per-location minimum of masses: the largest measure below both.
    pub fn common_part(&self, other: &Self) -> Self {
        let mut atoms = Vec::new();
        for (x, m) in &self.atoms {
            let o = other.mass_at(x);
            if !o.is_zero() {
                atoms.push((x.clone(), m.clone().min(o)));
            }
        }
        Self::from_rat_atoms(atoms).expect("minima of valid masses are valid")
    }

    pub fn subtract(&self, theta: &Self) -> Result<Self> {
        let mut atoms = self.atoms.clone();
        for (x, m) in &theta.atoms {
            let here = match atoms.binary_search_by(|(loc, _)| loc.cmp(x)) {
                Ok(i) => &mut atoms[i].1,
                Err(_) => {
                    return Err(Error::NotSubmeasure {
                        location: rat_to_f64(x),
                    })
                }
            };
            if *here < *m {
                return Err(Error::NotSubmeasure {
                    location: rat_to_f64(x),
                });
            }
            *here -= m;
        }
        Self::from_rat_atoms(atoms)
    }

    pub fn restrict_rat(&self, lower: Bound<&Rat>, upper: Bound<&Rat>) -> Self {
        let keep = |x: &Rat| {
            (match lower {
                Bound::Included(l) => x >= l,
                Bound::Excluded(l) => x > l,
                Bound::Unbounded => true,
            }) && (match upper {
                Bound::Included(u) => x <= u,
                Bound::Excluded(u) => x < u,
                Bound::Unbounded => true,
            })
        };
        let atoms = self
            .atoms
            .iter()
            .filter(|(x, _)| keep(x))
            .cloned()
            .collect();
        Self::from_rat_atoms(atoms).expect("restriction of valid measure is valid")
    }

    pub fn restrict(&self, lower: Bound<f64>, upper: Bound<f64>) -> Result<Self> {
        let conv = |b: Bound<f64>| -> Result<Bound<Rat>> {
            Ok(match b {
                Bound::Included(v) => Bound::Included(rat_from_f64(v).ok_or_else(|| {
                    Error::InvalidMeasure(format!("non-finite interval endpoint {v}"))
                })?),
                Bound::Excluded(v) => Bound::Excluded(rat_from_f64(v).ok_or_else(|| {
                    Error::InvalidMeasure(format!("non-finite interval endpoint {v}"))
                })?),
                Bound::Unbounded => Bound::Unbounded,
            })
        };
        let (lo, hi) = (conv(lower)?, conv(upper)?);
        Ok(self.restrict_rat(as_ref_bound(&lo), as_ref_bound(&hi)))
    }
}

fn as_ref_bound(b: &Bound<Rat>) -> Bound<&Rat> {
    match b {
        Bound::Included(v) => Bound::Included(v),
        Bound::Excluded(v) => Bound::Excluded(v),
        Bound::Unbounded => Bound::Unbounded,
    }
}

impl PlMeasure {
    /// Breakpoints as (location, cdf value) pairs, both exact. The first cdf
    /// value must be 0 and values must not decrease; a repeated location with
    /// two distinct cdf values would be a jump, i.e. an atom, and is refused.
    pub fn from_rat_points(points: Vec<(Rat, Rat)>) -> Result<Self> {
        let mut points = points;
        points.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        let mut clean: Vec<(Rat, Rat)> = Vec::with_capacity(points.len());
        for (x, c) in points {
            match clean.last() {
                Some((lx, lc)) if *lx == x => {
                    if *lc != c {
                        return Err(Error::InvalidMeasure(format!(
                            "cdf jumps at {}: an atomless measure cannot carry it",
                            rat_to_f64(&x)
                        )));
                    }
                }
                Some((_, lc)) if *lc > c => {
                    return Err(Error::InvalidMeasure(format!(
                        "cdf decreases at {}",
                        rat_to_f64(&x)
                    )));
                }
                _ => clean.push((x, c)),
            }
        }
        if let Some((_, first)) = clean.first() {
            if !first.is_zero() {
                return Err(Error::InvalidMeasure(
                    "first cdf value must be 0 (no mass may sit below the support)".into(),
                ));
            }
        }
        // canonical form: trim flat ends, drop collinear interior points
        while clean.len() >= 2 && clean[0].1 == clean[1].1 {
            clean.remove(0);
        }
        while clean.len() >= 2 && clean[clean.len() - 1].1 == clean[clean.len() - 2].1 {
            clean.pop();
        }
        if clean.len() < 2 {
            clean.clear();
        }
        let mut canon: Vec<(Rat, Rat)> = Vec::with_capacity(clean.len());
        for p in clean {
            while canon.len() >= 2 {
                let a = &canon[canon.len() - 2];
                let b = &canon[canon.len() - 1];
                // collinear iff (c_b - c_a)(x_p - x_b) == (c_p - c_b)(x_b - x_a)
                let lhs = (&b.1 - &a.1) * (&p.0 - &b.0);
                let rhs = (&p.1 - &b.1) * (&b.0 - &a.0);
                if lhs == rhs {
                    canon.pop();
                } else {
                    break;
                }
            }
            canon.push(p);
        }
        if let Some((_, c)) = canon.first_mut() {
            *c = Rat::zero();
        }
        Ok(Self { points: canon })
    }

    pub fn from_points(points: Vec<(f64, f64)>) -> Result<Self> {
        let conv = points
            .into_iter()
            .map(|(x, c)| {
                let xr = rat_from_f64(x)
                    .ok_or_else(|| Error::InvalidMeasure(format!("non-finite location {x}")))?;
                let cr = rat_from_f64(c)
                    .ok_or_else(|| Error::InvalidMeasure(format!("non-finite cdf value {c}")))?;
                Ok((xr, cr))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rat_points(conv)
    }

    /// Uniform distribution on [a, b] with the given total mass.
    pub fn uniform_mass(a: f64, b: f64, mass: Rat) -> Result<Self> {
        if !(a < b) {
            return Err(Error::InvalidMeasure(format!("empty interval [{a}, {b}]")));
        }
        let ar = rat_from_f64(a)
            .ok_or_else(|| Error::InvalidMeasure(format!("non-finite endpoint {a}")))?;
        let br = rat_from_f64(b)
            .ok_or_else(|| Error::InvalidMeasure(format!("non-finite endpoint {b}")))?;
        Self::from_rat_points(vec![(ar, Rat::zero()), (br, mass)])
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        Self::uniform_mass(a, b, Rat::new(1.into(), 1.into()))
    }

    /// Disjointly supported density pieces: (start, end, density) per piece.
    pub fn from_density_segments(segments: &[(f64, f64, Rat)]) -> Result<Self> {
        let mut segs = segments.to_vec();
        segs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite endpoints"));
        let mut points: Vec<(Rat, Rat)> = Vec::new();
        let mut acc = Rat::zero();
        for (a, b, d) in segs {
            if !(a < b) {
                return Err(Error::InvalidMeasure(format!("empty segment [{a}, {b}]")));
            }
            if d < Rat::zero() {
                return Err(Error::InvalidMeasure(format!("negative density on [{a}, {b}]")));
            }
            let ar = rat_from_f64(a)
                .ok_or_else(|| Error::InvalidMeasure(format!("non-finite endpoint {a}")))?;
            let br = rat_from_f64(b)
                .ok_or_else(|| Error::InvalidMeasure(format!("non-finite endpoint {b}")))?;
            match points.last() {
                Some((lx, _)) if *lx > ar => {
                    return Err(Error::InvalidMeasure(format!(
                        "overlapping segment starting at {a}"
                    )))
                }
                Some((lx, _)) if *lx < ar => {
                    points.push((ar.clone(), acc.clone()));
                }
                _ => {}
            }
            if points.is_empty() {
                points.push((ar.clone(), Rat::zero()));
            }
            acc += &d * (&br - &ar);
            points.push((br, acc.clone()));
        }
        Self::from_rat_points(points)
    }

    pub fn zero() -> Self {
        Self { points: Vec::new() }
    }

    pub fn points(&self) -> &[(Rat, Rat)] {
        &self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_mass(&self) -> Rat {
        self.points.last().map(|(_, c)| c.clone()).unwrap_or_else(Rat::zero)
    }

    /// Consecutive breakpoint pairs: (x0, x1, cdf0, cdf1).
    pub fn segments(&self) -> impl Iterator<Item = (&Rat, &Rat, &Rat, &Rat)> {
        self.points
            .windows(2)
            .map(|w| (&w[0].0, &w[1].0, &w[0].1, &w[1].1))
    }

    pub fn cdf_rat(&self, x: &Rat) -> Rat {
        if self.points.is_empty() || *x <= self.points[0].0 {
            return Rat::zero();
        }
        let last = self.points.len() - 1;
        if *x >= self.points[last].0 {
            return self.points[last].1.clone();
        }
        let idx = self.points.partition_point(|(loc, _)| loc <= x);
        let (x0, c0) = &self.points[idx - 1];
        let (x1, c1) = &self.points[idx];
        c0 + (x - x0) * (c1 - c0) / (x1 - x0)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match rat_from_f64(x) {
            Some(r) => rat_to_f64(&self.cdf_rat(&r)),
            None if x.is_nan() => f64::NAN,
            None if x > 0.0 => rat_to_f64(&self.total_mass()),
            None => 0.0,
        }
    }

    pub fn quantile_rat(&self, p: &Rat) -> Result<Rat> {
        let total = self.total_mass();
        if *p <= Rat::zero() || *p > total {
            return Err(Error::QuantileRange {
                level: rat_to_f64(p),
                total: rat_to_f64(&total),
            });
        }
        let idx = self.points.partition_point(|(_, c)| c < p);
        let (x1, c1) = &self.points[idx];
        let (x0, c0) = &self.points[idx - 1];
        Ok(x0 + (p - c0) * (x1 - x0) / (c1 - c0))
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        let p = rat_from_f64(p).ok_or_else(|| Error::QuantileRange {
            level: p,
            total: rat_to_f64(&self.total_mass()),
        })?;
        Ok(rat_to_f64(&self.quantile_rat(&p)?))
    }

    pub fn mean_rat(&self) -> Rat {
        let two = Rat::new(2.into(), 1.into());
        self.segments()
            .map(|(x0, x1, c0, c1)| {
                let density = (c1 - c0) / (x1 - x0);
                density * (x1 * x1 - x0 * x0) / &two
            })
            .sum()
    }

    fn merged_grid(&self, other: &Self) -> Vec<Rat> {
        let mut grid: Vec<Rat> = self
            .points
            .iter()
            .chain(other.points.iter())
            .map(|(x, _)| x.clone())
            .collect();
        grid.sort();
        grid.dedup();
        grid
    }

    fn density_on(&self, x0: &Rat, x1: &Rat) -> Rat {
        (self.cdf_rat(x1) - self.cdf_rat(x0)) / (x1 - x0)
    }

    fn from_grid_densities(grid: &[Rat], densities: &[Rat]) -> Self {
        let mut points = Vec::with_capacity(grid.len());
        let mut acc = Rat::zero();
        if !grid.is_empty() {
            points.push((grid[0].clone(), Rat::zero()));
        }
        for (i, d) in densities.iter().enumerate() {
            acc += d * (&grid[i + 1] - &grid[i]);
            points.push((grid[i + 1].clone(), acc.clone()));
        }
        Self::from_rat_points(points).expect("grid densities are a valid cdf")
    }

    /// Segment-wise minimum of densities: the largest measure below both.
    pub fn common_part(&self, other: &Self) -> Self {
        if self.is_empty() || other.is_empty() {
            return Self::zero();
        }
        let grid = self.merged_grid(other);
        let densities: Vec<Rat> = grid
            .windows(2)
            .map(|w| {
                self.density_on(&w[0], &w[1])
                    .min(other.density_on(&w[0], &w[1]))
            })
            .collect();
        Self::from_grid_densities(&grid, &densities)
    }

    pub fn subtract(&self, theta: &Self) -> Result<Self> {
        if theta.is_empty() {
            return Ok(self.clone());
        }
        let grid = self.merged_grid(theta);
        let mut densities = Vec::with_capacity(grid.len().saturating_sub(1));
        for w in grid.windows(2) {
            let d = self.density_on(&w[0], &w[1]) - theta.density_on(&w[0], &w[1]);
            if d < Rat::zero() {
                return Err(Error::NotSubmeasure {
                    location: rat_to_f64(&w[0]),
                });
            }
            densities.push(d);
        }
        Ok(Self::from_grid_densities(&grid, &densities))
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_empty() {
            return other.clone();
        }
        if other.is_empty() {
            return self.clone();
        }
        let grid = self.merged_grid(other);
        let densities: Vec<Rat> = grid
            .windows(2)
            .map(|w| self.density_on(&w[0], &w[1]) + other.density_on(&w[0], &w[1]))
            .collect();
        Self::from_grid_densities(&grid, &densities)
    }

    pub fn restrict_rat(&self, lower: Bound<&Rat>, upper: Bound<&Rat>) -> Self {
        if self.points.is_empty() {
            return Self::zero();
        }
        let lo = match lower {
            Bound::Included(v) | Bound::Excluded(v) => v.clone().max(self.points[0].0.clone()),
            Bound::Unbounded => self.points[0].0.clone(),
        };
        let hi = match upper {
            Bound::Included(v) | Bound::Excluded(v) => v
                .clone()
                .min(self.points[self.points.len() - 1].0.clone()),
            Bound::Unbounded => self.points[self.points.len() - 1].0.clone(),
        };
        if lo >= hi {
            return Self::zero();
        }
        let base = self.cdf_rat(&lo);
        let mut points = vec![(lo.clone(), Rat::zero())];
        for (x, c) in &self.points {
            if *x > lo && *x < hi {
                points.push((x.clone(), c - &base));
            }
        }
        points.push((hi.clone(), self.cdf_rat(&hi) - &base));
        Self::from_rat_points(points).expect("restriction of valid cdf is valid")
    }

    pub fn restrict(&self, lower: Bound<f64>, upper: Bound<f64>) -> Result<Self> {
        let conv = |b: Bound<f64>| -> Result<Bound<Rat>> {
            Ok(match b {
                Bound::Included(v) => Bound::Included(rat_from_f64(v).ok_or_else(|| {
                    Error::InvalidMeasure(format!("non-finite interval endpoint {v}"))
                })?),
                Bound::Excluded(v) => Bound::Excluded(rat_from_f64(v).ok_or_else(|| {
                    Error::InvalidMeasure(format!("non-finite interval endpoint {v}"))
                })?),
                Bound::Unbounded => Bound::Unbounded,
            })
        };
        let (lo, hi) = (conv(lower)?, conv(upper)?);
        Ok(self.restrict_rat(as_ref_bound(&lo), as_ref_bound(&hi)))
    }
}

impl Measure {
    pub fn total_mass(&self) -> Rat {
        match self {
            Measure::Discrete(m) => m.total_mass(),
            Measure::Pl(m) => m.total_mass(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.total_mass().is_zero()
    }

    pub fn cdf_rat(&self, x: &Rat) -> Rat {
        match self {
            Measure::Discrete(m) => m.cdf_rat(x),
            Measure::Pl(m) => m.cdf_rat(x),
        }
    }

    pub fn cdf_left_rat(&self, x: &Rat) -> Rat {
        match self {
            Measure::Discrete(m) => m.cdf_left_rat(x),
            Measure::Pl(m) => m.cdf_rat(x),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Measure::Discrete(m) => m.cdf(x),
            Measure::Pl(m) => m.cdf(x),
        }
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        match self {
            Measure::Discrete(m) => m.quantile(p),
            Measure::Pl(m) => m.quantile(p),
        }
    }

    pub fn mean_rat(&self) -> Rat {
        match self {
            Measure::Discrete(m) => m.mean_rat(),
            Measure::Pl(m) => m.mean_rat(),
        }
    }

    /// Atom list: the measure's own atoms (empty for the atomless kind).
    pub fn atom_list(&self) -> Vec<(Rat, Rat)> {
        match self {
            Measure::Discrete(m) => m.atoms().to_vec(),
            Measure::Pl(_) => Vec::new(),
        }
    }

    /// Locations where the cdf changes shape: atoms or breakpoints.
    pub fn critical_locations(&self) -> Vec<Rat> {
        match self {
            Measure::Discrete(m) => m.atoms().iter().map(|(x, _)| x.clone()).collect(),
            Measure::Pl(m) => m.points().iter().map(|(x, _)| x.clone()).collect(),
        }
    }

    /// Largest measure below both, when the representations match; measures
    /// of different kinds are mutually singular, so their common part is 0.
    pub fn common_part(&self, other: &Measure) -> Measure {
        match (self, other) {
            (Measure::Discrete(a), Measure::Discrete(b)) => Measure::Discrete(a.common_part(b)),
            (Measure::Pl(a), Measure::Pl(b)) => Measure::Pl(a.common_part(b)),
            (Measure::Discrete(_), Measure::Pl(_)) => Measure::Discrete(DiscreteMeasure::zero()),
            (Measure::Pl(_), Measure::Discrete(_)) => Measure::Pl(PlMeasure::zero()),
        }
    }

    pub fn subtract(&self, theta: &Measure) -> Result<Measure> {
        match (self, theta) {
            (Measure::Discrete(a), Measure::Discrete(b)) => Ok(Measure::Discrete(a.subtract(b)?)),
            (Measure::Pl(a), Measure::Pl(b)) => Ok(Measure::Pl(a.subtract(b)?)),
            (a, b) if b.is_zero() => Ok(a.clone()),
            _ => Err(Error::Unsupported(
                "cannot subtract across representation kinds".into(),
            )),
        }
    }
}

impl From<DiscreteMeasure> for Measure {
    fn from(m: DiscreteMeasure) -> Self {
        Measure::Discrete(m)
    }
}

impl From<PlMeasure> for Measure {
    fn from(m: PlMeasure) -> Self {
        Measure::Pl(m)
    }
}

/// First location where Fμ(x) ≥ Fν(x) fails, or None if ν dominates μ in the
/// stochastic order. Checks the merged critical set plus left limits, which
/// is exhaustive for piecewise-linear cdfs. Errors if total masses differ.
pub fn dominance_violation(mu: &Measure, nu: &Measure) -> Result<Option<Rat>> {
    let (tm, tn) = (mu.total_mass(), nu.total_mass());
    if tm != tn {
        return Err(mass_mismatch(&tm, &tn));
    }
    let mut grid: Vec<Rat> = mu.critical_locations();
    grid.extend(nu.critical_locations());
    grid.sort();
    grid.dedup();
    for z in grid {
        if mu.cdf_left_rat(&z) < nu.cdf_left_rat(&z) || mu.cdf_rat(&z) < nu.cdf_rat(&z) {
            return Ok(Some(z));
        }
    }
    Ok(None)
}

/// True iff every unit of μ-mass can move only rightward to become ν,
/// i.e. Fμ ≥ Fν pointwise.
pub fn stochastic_dominates(mu: &Measure, nu: &Measure) -> Result<bool> {
    Ok(dominance_violation(mu, nu)?.is_none())
}

/// The st-minimal θ with μ0 ≼st θ ≤ ν. Greedy: atoms of μ0 in decreasing
/// location order each consume the smallest remaining ν-mass at or above
/// them; by the additivity law this iterates one-atom shadows, and the
/// one-atom shadow packs mass as far left as ν allows.
pub fn shadow(mu0: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<ShadowResult> {
    let mut pool = AvailabilityPool::new(nu);
    let mut assignment: Vec<(Rat, Rat, Rat)> = Vec::new();
    for (x, m) in mu0.atoms().iter().rev() {
        let parts = pool.take_at_least(x, m)?;
        for (y, dm) in parts {
            assignment.push((x.clone(), y, dm));
        }
    }
    assignment.sort();
    let shadow = DiscreteMeasure::from_rat_atoms(
        assignment
            .iter()
            .map(|(_, y, m)| (y.clone(), m.clone()))
            .collect(),
    )?;
    Ok(ShadowResult { shadow, assignment })
}
