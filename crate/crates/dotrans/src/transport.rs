//! Transport maps for the optimal directional coupling. For atomless
//! mutually singular marginals the coupling is induced by the first-exit map
//! T(x) = inf{y ≥ x : F(y) < F(x)} on the hypograph of F = Fμ − Fν; this
//! module evaluates T exactly, extracts its affine pieces, reduces atomic
//! marginals to atomless ones by inserting an interval at each atom, and
//! pulls the map back so atoms receive their destination measures.

use crate::coupling::{Coupling, MonotoneMap};
use crate::measure::{dominance_violation, DiscreteMeasure, Measure, PlMeasure};
use crate::rat::{rat_from_f64, rat_to_f64, Rat};
use crate::{Error, Result};
use num_traits::{One, Zero};
use std::collections::BTreeMap;

/// A continuous piecewise-linear function vanishing at ±∞, nonnegative when
/// built from a dominant pair. Stored as breakpoints spanning its support;
/// the function is zero outside.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedPlFunction {
    points: Vec<(Rat, Rat)>,
}

/// Open intervals where a [`SignedPlFunction`] strictly rises and strictly
/// falls. Plateaus and breakpoints belong to neither.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncreaseDecreaseSets {
    pub increase: Vec<(Rat, Rat)>,
    pub decrease: Vec<(Rat, Rat)>,
}

impl SignedPlFunction {
    /// F = Fμ − Fν for atomless marginals with no common part and ν
    /// dominating μ.
    pub fn difference(mu: &PlMeasure, nu: &PlMeasure) -> Result<Self> {
        let m = Measure::Pl(mu.clone());
        let n = Measure::Pl(nu.clone());
        if !m.common_part(&n).is_zero() {
            return Err(Error::CommonPartNonzero);
        }
        if let Some(v) = dominance_violation(&m, &n)? {
            return Err(Error::Dominance {
                location: rat_to_f64(&v),
            });
        }
        let mut grid: Vec<Rat> = m.critical_locations();
        grid.extend(n.critical_locations());
        grid.sort();
        grid.dedup();
        let points = grid
            .into_iter()
            .map(|z| {
                let v = mu.cdf_rat(&z) - nu.cdf_rat(&z);
                (z, v)
            })
            .collect();
        Ok(Self::from_breakpoints(points))
    }

    /// Canonicalize raw breakpoints: drop collinear interior points and trim
    /// flat zero tails. The zero function becomes an empty point list.
    pub(crate) fn from_breakpoints(mut points: Vec<(Rat, Rat)>) -> Self {
        points.sort_by(|a, b| a.0.cmp(&b.0));
        points.dedup();
        // trim leading and trailing zeros beyond the support
        while points.len() >= 2 && points[0].1.is_zero() && points[1].1.is_zero() {
            points.remove(0);
        }
        while points.len() >= 2
            && points[points.len() - 1].1.is_zero()
            && points[points.len() - 2].1.is_zero()
        {
            points.pop();
        }
        if points.len() < 2 {
            return Self { points: Vec::new() };
        }
        let mut out: Vec<(Rat, Rat)> = Vec::with_capacity(points.len());
        for p in points {
            while out.len() >= 2 {
                let a = &out[out.len() - 2];
                let b = &out[out.len() - 1];
                // collinear iff cross-multiplied slopes agree
                let lhs = (&b.1 - &a.1) * (&p.0 - &b.0);
                let rhs = (&p.1 - &b.1) * (&b.0 - &a.0);
                if lhs == rhs {
                    out.pop();
                } else {
                    break;
                }
            }
            out.push(p);
        }
        debug_assert!(out.first().map(|p| p.1.is_zero()).unwrap_or(true));
        debug_assert!(out.last().map(|p| p.1.is_zero()).unwrap_or(true));
        Self { points: out }
    }

    pub fn points(&self) -> &[(Rat, Rat)] {
        &self.points
    }

    pub fn is_zero(&self) -> bool {
        self.points.is_empty()
    }

    pub fn eval_rat(&self, z: &Rat) -> Rat {
        if self.points.is_empty() {
            return Rat::zero();
        }
        let idx = self.points.partition_point(|(x, _)| x <= z);
        if idx == 0 || idx == self.points.len() && &self.points[idx - 1].0 < z {
            return Rat::zero();
        }
        let (x0, v0) = &self.points[idx - 1];
        if x0 == z {
            return v0.clone();
        }
        let (x1, v1) = &self.points[idx];
        v0 + (z - x0) * (v1 - v0) / (x1 - x0)
    }

    pub fn eval(&self, z: f64) -> f64 {
        match rat_from_f64(z) {
            Some(r) => rat_to_f64(&self.eval_rat(&r)),
            None => 0.0,
        }
    }

    /// Maximal open intervals of strict increase and strict decrease.
    pub fn increase_decrease(&self) -> IncreaseDecreaseSets {
        let mut increase: Vec<(Rat, Rat)> = Vec::new();
        let mut decrease: Vec<(Rat, Rat)> = Vec::new();
        for w in self.points.windows(2) {
            let ((a, fa), (b, fb)) = (&w[0], &w[1]);
            let target = if fb > fa {
                &mut increase
            } else if fb < fa {
                &mut decrease
            } else {
                continue;
            };
            match target.last_mut() {
                Some(last) if &last.1 == a => last.1 = b.clone(),
                _ => target.push((a.clone(), b.clone())),
            }
        }
        IncreaseDecreaseSets { increase, decrease }
    }

    /// First-exit location: the smallest y ≥ x with F(y) < F(x), or None
    /// when F(x) = 0 (then no y qualifies, since F ≥ 0).
    pub fn t_eval_rat(&self, x: &Rat) -> Option<Rat> {
        let v = self.eval_rat(x);
        if v.is_zero() {
            return None;
        }
        for w in self.points.windows(2) {
            let ((a, fa), (b, fb)) = (&w[0], &w[1]);
            if b <= x {
                continue;
            }
            if fb < &v {
                // the segment line crosses level v at or after x
                let y = a + (&v - fa) * (b - a) / (fb - fa);
                debug_assert!(&y >= x);
                return Some(y);
            }
        }
        // F ends at zero below v, so a crossing always exists
        unreachable!("positive level must be crossed before the support ends")
    }

    pub fn t_eval(&self, x: f64) -> f64 {
        let xr = match rat_from_f64(x) {
            Some(r) => r,
            None => return f64::INFINITY,
        };
        match self.t_eval_rat(&xr) {
            Some(y) => rat_to_f64(&y),
            None => f64::INFINITY,
        }
    }

    /// Match ascending and descending runs level by level. Each returned
    /// segment maps an ascending sub-interval onto the descending
    /// sub-interval at the same heights; the stack order realizes the
    /// first-exit rule because a level stays pending exactly until the first
    /// later segment descends through it.
    pub(crate) fn sweep(&self) -> Vec<MapSegment> {
        struct Pending {
            x0: Rat,
            l0: Rat,
            l1: Rat,
            slope: Rat,
        }
        impl Pending {
            fn x_at(&self, level: &Rat) -> Rat {
                &self.x0 + (level - &self.l0) / &self.slope
            }
        }
        let mut stack: Vec<Pending> = Vec::new();
        let mut out: Vec<MapSegment> = Vec::new();
        for w in self.points.windows(2) {
            let ((a, fa), (b, fb)) = (&w[0], &w[1]);
            if fb > fa {
                stack.push(Pending {
                    x0: a.clone(),
                    l0: fa.clone(),
                    l1: fb.clone(),
                    slope: (fb - fa) / (b - a),
                });
            } else if fb < fa {
                let slope_d = (fb - fa) / (b - a);
                let y_at = |level: &Rat| -> Rat { a + (level - fa) / &slope_d };
                let mut cur = fa.clone();
                while &cur > fb {
                    let top = stack.last_mut().expect("level is pending");
                    debug_assert!(top.l1 == cur);
                    let lo = if &top.l0 > fb { top.l0.clone() } else { fb.clone() };
                    if lo < cur {
                        let sx0 = top.x_at(&lo);
                        let sx1 = top.x_at(&cur);
                        out.push(MapSegment {
                            x0: sx0,
                            x1: sx1,
                            density: top.slope.clone(),
                            t0: y_at(&lo),
                            t1: y_at(&cur),
                        });
                    }
                    if top.l0 == lo {
                        stack.pop();
                    } else {
                        top.l1 = lo.clone();
                    }
                    cur = lo;
                }
            }
        }
        debug_assert!(stack.is_empty());
        out.sort_by(|p, q| p.x0.cmp(&q.x0));
        out
    }
}

/// One affine piece of a transport plan: source mass with constant density
/// on [x0, x1], sent by the affine map with T(x0) = t0 and T(x1) = t1.
/// Constant pieces (t0 = t1) send the whole interval to one point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapSegment {
    pub x0: Rat,
    pub x1: Rat,
    pub density: Rat,
    pub t0: Rat,
    pub t1: Rat,
}

impl MapSegment {
    pub fn mass(&self) -> Rat {
        &self.density * (&self.x1 - &self.x0)
    }

    /// T at a source point inside [x0, x1].
    pub fn t_at(&self, x: &Rat) -> Rat {
        debug_assert!(&self.x0 <= x && x <= &self.x1);
        &self.t0 + (x - &self.x0) * (&self.t1 - &self.t0) / (&self.x1 - &self.x0)
    }

    /// Mass with source ≤ x and destination ≤ y.
    fn quadrant_mass(&self, x: &Rat, y: &Rat) -> Rat {
        let hi = if x < &self.x1 { x.clone() } else { self.x1.clone() };
        if hi <= self.x0 {
            return Rat::zero();
        }
        let (mut a, mut b) = (self.x0.clone(), hi);
        if self.t0 == self.t1 {
            if &self.t0 > y {
                return Rat::zero();
            }
        } else {
            let slope = (&self.t1 - &self.t0) / (&self.x1 - &self.x0);
            let cut = &self.x0 + (y - &self.t0) / &slope;
            if slope > Rat::zero() {
                if cut < b {
                    b = cut;
                }
            } else if cut > a {
                a = cut;
            }
        }
        if a >= b {
            Rat::zero()
        } else {
            &self.density * (b - a)
        }
    }

    /// ∫ density · (T(t) − t)^k dt over [x0, x1], for k = 1, 2.
    fn diff_moment(&self, k: u32) -> Rat {
        let dx = &self.x1 - &self.x0;
        let s = (&self.t1 - &self.t0) / &dx;
        // T(t) − t = a + b·t
        let a = &self.t0 - &s * &self.x0;
        let b = s - Rat::one();
        let (x0, x1) = (&self.x0, &self.x1);
        let p1 = x1 - x0;
        let p2 = (x1 * x1 - x0 * x0) / Rat::from_integer(2.into());
        match k {
            1 => &self.density * (&a * p1 + &b * p2),
            2 => {
                let p3 = (x1 * x1 * x1 - x0 * x0 * x0) / Rat::from_integer(3.into());
                &self.density
                    * (&a * &a * p1 + Rat::from_integer(2.into()) * &a * &b * p2 + &b * &b * p3)
            }
            _ => unreachable!("only first and second moments"),
        }
    }
}

/// A source atom and the measure its mass is spread over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomRow {
    pub x: Rat,
    pub mass: Rat,
    pub dest: Measure,
}

/// The reduction that replaces every atom of μ + ν by an interval of the
/// same length: j(x) = x + Σ_{y≤x} (μ+ν)({y}), with the transformed
/// marginals atomless and piecewise linear.
#[derive(Debug, Clone)]
pub struct AtomReduction {
    pub j: MonotoneMap,
    pub mu_t: PlMeasure,
    pub nu_t: PlMeasure,
    jumps: Vec<JumpInterval>,
}

#[derive(Debug, Clone)]
pub(crate) struct JumpInterval {
    pub x: Rat,
    pub lo: Rat,
    pub hi: Rat,
    pub mu_side: bool,
}

impl AtomReduction {
    /// Jump intervals as (source atom, interval start, interval end,
    /// atom belongs to μ).
    pub fn jump_intervals(&self) -> Vec<(Rat, Rat, Rat, bool)> {
        self.jumps
            .iter()
            .map(|j| (j.x.clone(), j.lo.clone(), j.hi.clone(), j.mu_side))
            .collect()
    }

    /// The jump interval containing [a, b], if any. Pieces produced by the
    /// sweep never straddle interval boundaries.
    fn containing_jump(&self, a: &Rat, b: &Rat) -> Option<&JumpInterval> {
        let idx = self.jumps.partition_point(|j| &j.lo <= a);
        if idx == 0 {
            return None;
        }
        let j = &self.jumps[idx - 1];
        if b <= &j.hi {
            Some(j)
        } else {
            None
        }
    }
}

/// Build the atom-insertion reduction for a dominant pair with no common
/// part. Atomless inputs come back unchanged with j = identity.
pub fn j_transform(mu: &Measure, nu: &Measure) -> Result<AtomReduction> {
    if !mu.common_part(nu).is_zero() {
        return Err(Error::CommonPartNonzero);
    }
    if let Some(v) = dominance_violation(mu, nu)? {
        return Err(Error::Dominance {
            location: rat_to_f64(&v),
        });
    }
    let mut jumps: Vec<JumpInterval> = Vec::new();
    let mut collect = |m: &Measure, mu_side: bool| {
        if let Measure::Discrete(d) = m {
            for (x, mass) in d.atoms() {
                jumps.push(JumpInterval {
                    x: x.clone(),
                    lo: Rat::zero(),
                    hi: mass.clone(),
                    mu_side,
                });
            }
        }
    };
    collect(mu, true);
    collect(nu, false);
    jumps.sort_by(|a, b| a.x.cmp(&b.x));
    let mut shift = Rat::zero();
    for j in jumps.iter_mut() {
        let mass = j.hi.clone();
        j.lo = &j.x + &shift;
        shift += mass;
        j.hi = &j.x + &shift;
    }
    let j_map = if jumps.is_empty() {
        MonotoneMap::identity()
    } else {
        let knots = jumps
            .iter()
            .map(|j| (j.x.clone(), j.lo.clone(), j.hi.clone()))
            .collect();
        MonotoneMap::from_rat_knots(knots, Rat::one(), Rat::one())?
    };
    let mut grid: Vec<Rat> = mu.critical_locations();
    grid.extend(nu.critical_locations());
    grid.sort();
    grid.dedup();
    let transform = |m: &Measure| -> PlMeasure {
        let mut pts: Vec<(Rat, Rat)> = Vec::with_capacity(2 * grid.len());
        for z in &grid {
            pts.push((j_map.eval_left_rat(z), m.cdf_left_rat(z)));
            pts.push((j_map.eval_rat(z), m.cdf_rat(z)));
        }
        PlMeasure::from_rat_points(pts).expect("transformed cdf is valid")
    };
    Ok(AtomReduction {
        mu_t: transform(mu),
        nu_t: transform(nu),
        j: j_map,
        jumps,
    })
}

/// Pull sweep pieces from the transformed line back through j⁻¹: pieces
/// inside a jump interval collapse to its atom on the destination side, or
/// are charged to the atom on the source side; everything else shifts back
/// unchanged.
pub(crate) fn pull_back_pieces(
    pieces: &[MapSegment],
    red: &AtomReduction,
) -> Result<(Vec<MapSegment>, Vec<AtomRow>)> {
    struct DestAccum {
        atoms: Vec<(Rat, Rat)>,
        pl: Vec<(Rat, Rat, Rat)>,
    }
    let mut segments: Vec<MapSegment> = Vec::new();
    let mut rows: BTreeMap<Rat, DestAccum> = BTreeMap::new();
    for p in pieces {
        if p.x0 == p.x1 {
            continue;
        }
        let (dlo, dhi) = if p.t0 <= p.t1 {
            (&p.t0, &p.t1)
        } else {
            (&p.t1, &p.t0)
        };
        let source_jump = red.containing_jump(&p.x0, &p.x1);
        let dest_jump = red.containing_jump(dlo, dhi);
        debug_assert!(source_jump.map(|j| j.mu_side).unwrap_or(true));
        debug_assert!(dest_jump.map(|j| !j.mu_side).unwrap_or(true));
        let mass = p.mass();
        match (source_jump, dest_jump) {
            (None, None) => segments.push(MapSegment {
                x0: red.j.invert_rat(&p.x0),
                x1: red.j.invert_rat(&p.x1),
                density: p.density.clone(),
                t0: red.j.invert_rat(&p.t0),
                t1: red.j.invert_rat(&p.t1),
            }),
            (None, Some(jd)) => segments.push(MapSegment {
                x0: red.j.invert_rat(&p.x0),
                x1: red.j.invert_rat(&p.x1),
                density: p.density.clone(),
                t0: jd.x.clone(),
                t1: jd.x.clone(),
            }),
            (Some(js), None) => {
                let a = red.j.invert_rat(dlo);
                let b = red.j.invert_rat(dhi);
                let density = &mass / (&b - &a);
                rows.entry(js.x.clone())
                    .or_insert_with(|| DestAccum {
                        atoms: Vec::new(),
                        pl: Vec::new(),
                    })
                    .pl
                    .push((a, b, density));
            }
            (Some(js), Some(jd)) => {
                rows.entry(js.x.clone())
                    .or_insert_with(|| DestAccum {
                        atoms: Vec::new(),
                        pl: Vec::new(),
                    })
                    .atoms
                    .push((jd.x.clone(), mass));
            }
        }
    }
    segments.sort_by(|p, q| p.x0.cmp(&q.x0));
    let segments = merge_adjacent(segments);
    let mut atom_rows = Vec::with_capacity(rows.len());
    for (x, accum) in rows {
        let dest = match (accum.atoms.is_empty(), accum.pl.is_empty()) {
            (false, true) => Measure::Discrete(DiscreteMeasure::from_rat_atoms(accum.atoms)?),
            (true, false) => Measure::Pl(pl_from_pieces(accum.pl)),
            (true, true) => continue,
            (false, false) => {
                return Err(Error::Unsupported(
                    "destination mixes atoms and density".into(),
                ))
            }
        };
        let mass = dest.total_mass();
        atom_rows.push(AtomRow { x, mass, dest });
    }
    Ok((segments, atom_rows))
}

/// Fuse consecutive segments that continue the same affine map with the
/// same density.
fn merge_adjacent(segments: Vec<MapSegment>) -> Vec<MapSegment> {
    let mut out: Vec<MapSegment> = Vec::with_capacity(segments.len());
    for s in segments {
        if let Some(last) = out.last_mut() {
            if last.x1 == s.x0 && last.density == s.density && last.t1 == s.t0 {
                let slope_last =
                    (&last.t1 - &last.t0) * (&s.x1 - &s.x0);
                let slope_next = (&s.t1 - &s.t0) * (&last.x1 - &last.x0);
                if slope_last == slope_next {
                    last.x1 = s.x1;
                    last.t1 = s.t1;
                    continue;
                }
            }
        }
        out.push(s);
    }
    out
}

/// Sum piecewise-constant density pieces (a, b, density) into one measure.
fn pl_from_pieces(pieces: Vec<(Rat, Rat, Rat)>) -> PlMeasure {
    let mut cuts: Vec<Rat> = Vec::with_capacity(2 * pieces.len());
    for (a, b, _) in &pieces {
        cuts.push(a.clone());
        cuts.push(b.clone());
    }
    cuts.sort();
    cuts.dedup();
    let cdf_at = |z: &Rat| -> Rat {
        let mut total = Rat::zero();
        for (a, b, d) in &pieces {
            let hi = if z < b { z } else { b };
            if hi > a {
                total += d * (hi - a);
            }
        }
        total
    };
    let pts = cuts.iter().map(|z| (z.clone(), cdf_at(z))).collect();
    PlMeasure::from_rat_points(pts).expect("summed densities form a valid cdf")
}

/// The optimal directional coupling as a kernel: an identity-coupled common
/// part, affine map segments for the atomless remainder, and destination
/// measures for source atoms.
#[derive(Debug, Clone)]
pub struct KernelCoupling {
    identity: Measure,
    segments: Vec<MapSegment>,
    atom_rows: Vec<AtomRow>,
    mu: Measure,
    nu: Measure,
    monge: bool,
}

impl KernelCoupling {
    pub(crate) fn from_parts(
        identity: Measure,
        segments: Vec<MapSegment>,
        atom_rows: Vec<AtomRow>,
        mu: Measure,
        nu: Measure,
        monge: bool,
    ) -> Self {
        Self {
            identity,
            segments,
            atom_rows,
            mu,
            nu,
            monge,
        }
    }

    /// Build a kernel from its rows alone, deriving the marginals and the
    /// map property from them.
    pub(crate) fn from_rows(
        identity: Measure,
        segments: Vec<MapSegment>,
        atom_rows: Vec<AtomRow>,
    ) -> Result<Self> {
        let moving_atoms = atom_rows
            .iter()
            .map(|r| (r.x.clone(), r.mass.clone()))
            .collect();
        let moving_pieces = segments
            .iter()
            .map(|s| (s.x0.clone(), s.x1.clone(), s.density.clone()))
            .collect();
        let moving = assemble(moving_atoms, moving_pieces)?;
        let atoms_deterministic = atom_rows
            .iter()
            .all(|r| matches!(&r.dest, Measure::Discrete(d) if d.len() == 1));
        let monge = moving.common_part(&identity).is_zero() && atoms_deterministic;
        let zero = Measure::Discrete(DiscreteMeasure::zero());
        let mut kc = Self {
            identity,
            segments,
            atom_rows,
            mu: zero.clone(),
            nu: zero,
            monge,
        };
        kc.mu = kc.first_marginal()?;
        kc.nu = kc.second_marginal()?;
        Ok(kc)
    }

    /// The part coupled by the identity map.
    pub fn identity_part(&self) -> &Measure {
        &self.identity
    }

    pub fn segments(&self) -> &[MapSegment] {
        &self.segments
    }

    pub fn atom_rows(&self) -> &[AtomRow] {
        &self.atom_rows
    }

    pub fn mu(&self) -> &Measure {
        &self.mu
    }

    pub fn nu(&self) -> &Measure {
        &self.nu
    }

    /// True iff the kernel is a deterministic map almost surely: no source
    /// location both stays put and moves, and every source atom has a single
    /// destination.
    pub fn is_monge(&self) -> bool {
        self.monge
    }

    pub fn total_mass(&self) -> Rat {
        let mut t = self.identity.total_mass();
        for s in &self.segments {
            t += s.mass();
        }
        for r in &self.atom_rows {
            t += r.mass.clone();
        }
        t
    }

    /// Joint cdf at finite (x, y).
    pub fn cdf_rat(&self, x: &Rat, y: &Rat) -> Rat {
        let m = if x <= y { x } else { y };
        let mut total = self.identity.cdf_rat(m);
        for s in &self.segments {
            total += s.quadrant_mass(x, y);
        }
        for r in &self.atom_rows {
            if &r.x <= x {
                total += r.dest.cdf_rat(y);
            }
        }
        total
    }

    pub fn cdf(&self, x: f64, y: f64) -> f64 {
        let (xr, yr) = match (rat_from_f64(x), rat_from_f64(y)) {
            (Some(a), Some(b)) => (a, b),
            _ => return f64::NAN,
        };
        rat_to_f64(&self.cdf_rat(&xr, &yr))
    }

    /// ∫ (y − x) dP, exact.
    pub fn mean_difference(&self) -> Rat {
        let mut t = Rat::zero();
        for s in &self.segments {
            t += s.diff_moment(1);
        }
        for r in &self.atom_rows {
            t += r.dest.mean_rat() - &r.x * &r.mass;
        }
        t
    }

    /// ∫ (y − x)² dP, exact.
    pub fn second_moment_difference(&self) -> Rat {
        let mut t = Rat::zero();
        for s in &self.segments {
            t += s.diff_moment(2);
        }
        for r in &self.atom_rows {
            t += dest_second_moment(&r.dest, &r.x);
        }
        t
    }

    /// Reassemble the source marginal from the rows; errors if the rows mix
    /// atomic and continuous sources (impossible for pure-kind inputs).
    pub fn first_marginal(&self) -> Result<Measure> {
        let mut atoms: Vec<(Rat, Rat)> = Vec::new();
        let mut pieces: Vec<(Rat, Rat, Rat)> = Vec::new();
        match &self.identity {
            Measure::Discrete(d) => atoms.extend(d.atoms().iter().cloned()),
            Measure::Pl(p) => pieces.extend(density_pieces(p)),
        }
        for r in &self.atom_rows {
            atoms.push((r.x.clone(), r.mass.clone()));
        }
        for s in &self.segments {
            pieces.push((s.x0.clone(), s.x1.clone(), s.density.clone()));
        }
        assemble(atoms, pieces)
    }

    /// Reassemble the destination marginal from the rows.
    pub fn second_marginal(&self) -> Result<Measure> {
        let mut atoms: Vec<(Rat, Rat)> = Vec::new();
        let mut pieces: Vec<(Rat, Rat, Rat)> = Vec::new();
        match &self.identity {
            Measure::Discrete(d) => atoms.extend(d.atoms().iter().cloned()),
            Measure::Pl(p) => pieces.extend(density_pieces(p)),
        }
        for r in &self.atom_rows {
            match &r.dest {
                Measure::Discrete(d) => atoms.extend(d.atoms().iter().cloned()),
                Measure::Pl(p) => pieces.extend(density_pieces(p)),
            }
        }
        for s in &self.segments {
            if s.t0 == s.t1 {
                atoms.push((s.t0.clone(), s.mass()));
            } else {
                let (a, b) = if s.t0 < s.t1 {
                    (s.t0.clone(), s.t1.clone())
                } else {
                    (s.t1.clone(), s.t0.clone())
                };
                let density = s.mass() / (&b - &a);
                pieces.push((a, b, density));
            }
        }
        assemble(atoms, pieces)
    }

    /// The coupling as a finite point mass list, when every row is atomic.
    pub fn to_coupling(&self) -> Option<Coupling> {
        let mut pts: Vec<(Rat, Rat, Rat)> = Vec::new();
        match &self.identity {
            Measure::Discrete(d) => {
                for (x, m) in d.atoms() {
                    pts.push((x.clone(), x.clone(), m.clone()));
                }
            }
            Measure::Pl(p) if p.is_empty() => {}
            Measure::Pl(_) => return None,
        }
        if !self.segments.is_empty() {
            return None;
        }
        for r in &self.atom_rows {
            match &r.dest {
                Measure::Discrete(d) => {
                    for (y, m) in d.atoms() {
                        pts.push((r.x.clone(), y.clone(), m.clone()));
                    }
                }
                Measure::Pl(_) => return None,
            }
        }
        Coupling::from_rat_points(pts).ok()
    }
}

fn dest_second_moment(dest: &Measure, x: &Rat) -> Rat {
    match dest {
        Measure::Discrete(d) => d
            .atoms()
            .iter()
            .map(|(y, m)| {
                let d = y - x;
                &d * &d * m
            })
            .sum(),
        Measure::Pl(p) => {
            let mut t = Rat::zero();
            for (a, b, density) in density_pieces(p) {
                // ∫ f (y − x)² dy = f [(b−x)³ − (a−x)³] / 3
                let hb = &b - x;
                let ha = &a - x;
                t += density * (&hb * &hb * &hb - &ha * &ha * &ha)
                    / Rat::from_integer(3.into());
            }
            t
        }
    }
}

fn density_pieces(p: &PlMeasure) -> Vec<(Rat, Rat, Rat)> {
    p.segments()
        .map(|(x0, x1, f0, f1)| {
            let d = (f1 - f0) / (x1 - x0);
            (x0.clone(), x1.clone(), d)
        })
        .filter(|(_, _, d)| !d.is_zero())
        .collect()
}

fn assemble(atoms: Vec<(Rat, Rat)>, pieces: Vec<(Rat, Rat, Rat)>) -> Result<Measure> {
    match (atoms.is_empty(), pieces.is_empty()) {
        (_, true) => Ok(Measure::Discrete(DiscreteMeasure::from_rat_atoms(atoms)?)),
        (true, false) => Ok(Measure::Pl(pl_from_pieces(pieces))),
        (false, false) => Err(Error::Unsupported(
            "marginal mixes atoms and density".into(),
        )),
    }
}

/// Optimal directional coupling of any dominant equal-mass pair, assembled
/// as identity on the common part plus the pulled-back first-exit map on
/// the singular remainder.
pub fn couple_general(mu: &Measure, nu: &Measure) -> Result<KernelCoupling> {
    if let Some(v) = dominance_violation(mu, nu)? {
        return Err(Error::Dominance {
            location: rat_to_f64(&v),
        });
    }
    let common = mu.common_part(nu);
    let mu1 = mu.subtract(&common)?;
    let nu1 = nu.subtract(&common)?;
    let red = j_transform(&mu1, &nu1)?;
    let f = SignedPlFunction::difference(&red.mu_t, &red.nu_t)?;
    let pieces = f.sweep();
    let (segments, atom_rows) = pull_back_pieces(&pieces, &red)?;
    let atoms_deterministic = atom_rows.iter().all(|r| match &r.dest {
        Measure::Discrete(d) => d.len() == 1,
        Measure::Pl(_) => false,
    });
    let monge = mu1.common_part(&common).is_zero() && atoms_deterministic;
    Ok(KernelCoupling::from_parts(
        common,
        segments,
        atom_rows,
        mu.clone(),
        nu.clone(),
        monge,
    ))
}

/// Specialization of [`couple_general`] to atomless marginals: identity on
/// μ∧ν plus the first-exit map on the singular remainder.
pub fn monge_couple(mu: &PlMeasure, nu: &PlMeasure) -> Result<KernelCoupling> {
    couple_general(&Measure::Pl(mu.clone()), &Measure::Pl(nu.clone()))
}

/// The comonotone (quantile) coupling as a kernel: both marginals are read
/// off their quantile functions on a shared level grid.
pub fn comonotone_kernel(mu: &Measure, nu: &Measure) -> Result<KernelCoupling> {
    let (tm, tn) = (mu.total_mass(), nu.total_mass());
    if tm != tn {
        return Err(Error::MassMismatch {
            mu: tm.to_string(),
            nu: tn.to_string(),
        });
    }
    let mut levels: Vec<Rat> = vec![Rat::zero()];
    for m in [mu, nu] {
        for z in m.critical_locations() {
            levels.push(m.cdf_left_rat(&z));
            levels.push(m.cdf_rat(&z));
        }
    }
    levels.sort();
    levels.dedup();
    enum Piece {
        Atom(Rat),
        Affine(Rat, Rat),
    }
    let quantile_piece = |m: &Measure, p0: &Rat, p1: &Rat| -> Piece {
        match m {
            Measure::Discrete(d) => {
                let mut cum = Rat::zero();
                for (x, mass) in d.atoms() {
                    let next = &cum + mass;
                    if &cum <= p0 && p1 <= &next {
                        return Piece::Atom(x.clone());
                    }
                    cum = next;
                }
                unreachable!("levels refine the cumulative grid")
            }
            Measure::Pl(p) => {
                for (x0, x1, f0, f1) in p.segments() {
                    if f0 <= p0 && p1 <= f1 && f0 < f1 {
                        let a = x0 + (p0 - f0) * (x1 - x0) / (f1 - f0);
                        let b = x0 + (p1 - f0) * (x1 - x0) / (f1 - f0);
                        return Piece::Affine(a, b);
                    }
                }
                unreachable!("levels refine the cdf grid")
            }
        }
    };
    struct DestAccum {
        atoms: Vec<(Rat, Rat)>,
        pl: Vec<(Rat, Rat, Rat)>,
    }
    let mut segments: Vec<MapSegment> = Vec::new();
    let mut rows: BTreeMap<Rat, DestAccum> = BTreeMap::new();
    for w in levels.windows(2) {
        let (p0, p1) = (&w[0], &w[1]);
        if p0 >= p1 || p1 > &tm {
            continue;
        }
        let mass = p1 - p0;
        let sp = quantile_piece(mu, p0, p1);
        let dp = quantile_piece(nu, p0, p1);
        match (sp, dp) {
            (Piece::Atom(x), Piece::Atom(y)) => {
                rows.entry(x)
                    .or_insert_with(|| DestAccum {
                        atoms: Vec::new(),
                        pl: Vec::new(),
                    })
                    .atoms
                    .push((y, mass));
            }
            (Piece::Atom(x), Piece::Affine(a, b)) => {
                let density = &mass / (&b - &a);
                rows.entry(x)
                    .or_insert_with(|| DestAccum {
                        atoms: Vec::new(),
                        pl: Vec::new(),
                    })
                    .pl
                    .push((a, b, density));
            }
            (Piece::Affine(a, b), Piece::Atom(y)) => segments.push(MapSegment {
                density: &mass / (&b - &a),
                x0: a,
                x1: b,
                t0: y.clone(),
                t1: y,
            }),
            (Piece::Affine(a, b), Piece::Affine(c, d)) => segments.push(MapSegment {
                density: &mass / (&b - &a),
                x0: a,
                x1: b,
                t0: c,
                t1: d,
            }),
        }
    }
    segments.sort_by(|p, q| p.x0.cmp(&q.x0));
    let segments = merge_adjacent(segments);
    let mut atom_rows = Vec::with_capacity(rows.len());
    for (x, accum) in rows {
        let dest = match (accum.atoms.is_empty(), accum.pl.is_empty()) {
            (false, true) => Measure::Discrete(DiscreteMeasure::from_rat_atoms(accum.atoms)?),
            (true, false) => Measure::Pl(pl_from_pieces(accum.pl)),
            (true, true) => continue,
            (false, false) => {
                return Err(Error::Unsupported(
                    "destination mixes atoms and density".into(),
                ))
            }
        };
        let mass = dest.total_mass();
        atom_rows.push(AtomRow { x, mass, dest });
    }
    let monge = atom_rows.iter().all(|r| match &r.dest {
        Measure::Discrete(d) => d.len() == 1,
        Measure::Pl(_) => false,
    });
    Ok(KernelCoupling::from_parts(
        Measure::Discrete(DiscreteMeasure::zero()),
        segments,
        atom_rows,
        mu.clone(),
        nu.clone(),
        monge,
    ))
}

/// Sharp bounds on the treatment-effect variance over directional
/// couplings: the mean of Y − X is fixed by the marginals, the comonotone
/// coupling minimizes the variance, and the optimal directional coupling
/// maximizes it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EffectBounds {
    pub mean: Rat,
    pub var_lower: Rat,
    pub var_upper: Rat,
}

pub fn variance_bounds(mu: &Measure, nu: &Measure) -> Result<EffectBounds> {
    let total = mu.total_mass();
    if total <= Rat::zero() {
        return Err(Error::InvalidMeasure("empty marginals".into()));
    }
    let p_star = couple_general(mu, nu)?;
    let como = comonotone_kernel(mu, nu)?;
    let mean = (nu.mean_rat() - mu.mean_rat()) / &total;
    let m2_hi = p_star.second_moment_difference() / &total;
    let m2_lo = como.second_moment_difference() / &total;
    Ok(EffectBounds {
        var_lower: m2_lo - &mean * &mean,
        var_upper: m2_hi - &mean * &mean,
        mean,
    })
}
