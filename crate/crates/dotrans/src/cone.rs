//! Couplings under the constraint Y ≥ X + D(X) for a piecewise-linear
//! displacement D with slope above -1. The transform Z(x) = x + D(x) is
//! then strictly increasing, the constrained problem is the plain
//! directional problem for the pushforward of the source through Z, and
//! origins are pulled back through Z afterwards.

use crate::coupling::MonotoneMap;
use crate::measure::{DiscreteMeasure, Measure};
use crate::rat::{rat_from_f64, rat_to_f64, Rat};
use crate::transport::{couple_general, AtomRow, KernelCoupling, MapSegment};
use crate::{Error, Result};
use num_traits::{One, Zero};
use std::collections::BTreeMap;

/// The floor Y ≥ X + D(X), held as the strictly increasing transform
/// Z(x) = x + D(x).
#[derive(Debug, Clone)]
pub struct ConeConstraint {
    z: MonotoneMap,
}

impl ConeConstraint {
    /// Constant displacement D ≡ d.
    pub fn constant(d: f64) -> Result<Self> {
        let dr = rat_from_f64(d).ok_or(Error::Displacement {
            slope: 0.0,
            location: d,
        })?;
        Self::constant_rat(dr)
    }

    pub fn constant_rat(d: Rat) -> Result<Self> {
        let z = MonotoneMap::from_rat_knots(
            vec![(Rat::zero(), d.clone(), d)],
            Rat::one(),
            Rat::one(),
        )?;
        Ok(Self { z })
    }

    /// Piecewise-linear displacement through the given (x, D(x)) points,
    /// constant beyond the first and last. Rejects slopes at or below -1,
    /// where x + D(x) stops increasing.
    pub fn from_breakpoints(points: &[(f64, f64)]) -> Result<Self> {
        let mut pts: Vec<(Rat, Rat)> = Vec::with_capacity(points.len());
        for (x, d) in points {
            let (xr, dr) = match (rat_from_f64(*x), rat_from_f64(*d)) {
                (Some(a), Some(b)) => (a, b),
                _ => {
                    return Err(Error::Displacement {
                        slope: 0.0,
                        location: *x,
                    })
                }
            };
            pts.push((xr, dr));
        }
        Self::from_rat_breakpoints(pts)
    }

    /// Exact-coordinate variant of [`Self::from_breakpoints`].
    pub fn from_rat_breakpoints(mut pts: Vec<(Rat, Rat)>) -> Result<Self> {
        pts.sort_by(|a, b| a.0.cmp(&b.0));
        for w in pts.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidMeasure(format!(
                    "duplicate displacement breakpoint at {}",
                    w[0].0
                )));
            }
            let dz = (&w[1].0 + &w[1].1) - (&w[0].0 + &w[0].1);
            if dz <= Rat::zero() {
                let slope = (&w[1].1 - &w[0].1) / (&w[1].0 - &w[0].0);
                return Err(Error::Displacement {
                    slope: rat_to_f64(&slope),
                    location: rat_to_f64(&w[0].0),
                });
            }
        }
        if pts.is_empty() {
            return Self::constant_rat(Rat::zero());
        }
        let knots = pts
            .into_iter()
            .map(|(x, d)| {
                let v = &x + &d;
                (x, v.clone(), v)
            })
            .collect();
        let z = MonotoneMap::from_rat_knots(knots, Rat::one(), Rat::one())?;
        Ok(Self { z })
    }

    pub fn z(&self) -> &MonotoneMap {
        &self.z
    }

    /// D(x) = Z(x) − x.
    pub fn displacement_rat(&self, x: &Rat) -> Rat {
        self.z.eval_rat(x) - x
    }

    pub fn displacement(&self, x: f64) -> f64 {
        self.z.eval(x) - x
    }

    /// Z-knot images strictly inside (a, b), used to split intervals so
    /// every part lives where Z is affine.
    fn interior_cuts(&self, a: &Rat, b: &Rat) -> Vec<Rat> {
        self.z
            .knots()
            .iter()
            .filter(|(_, _, r)| r > a && r < b)
            .map(|(_, _, r)| r.clone())
            .collect()
    }

    /// Local slope of Z on the affine piece containing (a, b), given via
    /// two image points.
    fn slope_between(&self, a: &Rat, b: &Rat) -> Rat {
        let xa = self.z.invert_rat(a);
        let xb = self.z.invert_rat(b);
        (b - a) / (xb - xa)
    }
}

/// Optimal coupling under Y ≥ X + D(X): couple the pushforward of μ
/// through Z with ν, then return every origin to its preimage.
pub fn couple_cone(mu: &Measure, nu: &Measure, c: &ConeConstraint) -> Result<KernelCoupling> {
    let moved = match mu {
        Measure::Discrete(d) => Measure::Discrete(c.z.push_discrete(d)),
        Measure::Pl(p) => Measure::Pl(c.z.push_pl(p)),
    };
    let kc = couple_general(&moved, nu)?;
    let mut segments: Vec<MapSegment> = Vec::new();
    let mut rows: BTreeMap<Rat, Vec<Measure>> = BTreeMap::new();
    // the identity part pairs x' with itself on the transformed line, so
    // after pulling origins back it becomes the graph of Z
    match kc.identity_part() {
        Measure::Discrete(d) => {
            for (x, m) in d.atoms() {
                rows.entry(c.z.invert_rat(x)).or_default().push(
                    Measure::Discrete(DiscreteMeasure::from_rat_atoms(vec![(
                        x.clone(),
                        m.clone(),
                    )])?),
                );
            }
        }
        Measure::Pl(p) => {
            for (a, b, d) in pl_density_pieces(p) {
                for (p0, p1) in split(&a, &b, c.interior_cuts(&a, &b)) {
                    let s = c.slope_between(&p0, &p1);
                    segments.push(MapSegment {
                        x0: c.z.invert_rat(&p0),
                        x1: c.z.invert_rat(&p1),
                        density: &d * &s,
                        t0: p0,
                        t1: p1,
                    });
                }
            }
        }
    }
    for seg in kc.segments() {
        for (p0, p1) in split(&seg.x0, &seg.x1, c.interior_cuts(&seg.x0, &seg.x1)) {
            let s = c.slope_between(&p0, &p1);
            segments.push(MapSegment {
                x0: c.z.invert_rat(&p0),
                x1: c.z.invert_rat(&p1),
                density: &seg.density * &s,
                t0: seg.t_at(&p0),
                t1: seg.t_at(&p1),
            });
        }
    }
    for row in kc.atom_rows() {
        rows.entry(c.z.invert_rat(&row.x))
            .or_default()
            .push(row.dest.clone());
    }
    segments.sort_by(|p, q| p.x0.cmp(&q.x0));
    let mut atom_rows = Vec::with_capacity(rows.len());
    for (x, dests) in rows {
        let mut iter = dests.into_iter();
        let mut dest = iter.next().expect("entry implies at least one destination");
        for d in iter {
            dest = merge_measures(dest, d)?;
        }
        let mass = dest.total_mass();
        atom_rows.push(AtomRow { x, mass, dest });
    }
    let monge = kc.is_monge();
    Ok(KernelCoupling::from_parts(
        Measure::Discrete(DiscreteMeasure::zero()),
        segments,
        atom_rows,
        mu.clone(),
        nu.clone(),
        monge,
    ))
}

fn split(a: &Rat, b: &Rat, cuts: Vec<Rat>) -> Vec<(Rat, Rat)> {
    let mut ends = cuts;
    ends.push(b.clone());
    let mut out = Vec::with_capacity(ends.len());
    let mut prev = a.clone();
    for e in ends {
        out.push((prev.clone(), e.clone()));
        prev = e;
    }
    out
}

fn merge_measures(a: Measure, b: Measure) -> Result<Measure> {
    match (a, b) {
        (Measure::Discrete(x), Measure::Discrete(y)) => Ok(Measure::Discrete(x.add(&y))),
        (Measure::Pl(x), Measure::Pl(y)) => Ok(Measure::Pl(x.add(&y))),
        _ => Err(Error::Unsupported(
            "destination mixes atoms and density".into(),
        )),
    }
}

fn pl_density_pieces(p: &crate::measure::PlMeasure) -> Vec<(Rat, Rat, Rat)> {
    p.segments()
        .map(|(x0, x1, f0, f1)| {
            let d = (f1 - f0) / (x1 - x0);
            (x0.clone(), x1.clone(), d)
        })
        .filter(|(_, _, d)| !d.is_zero())
        .collect()
}
