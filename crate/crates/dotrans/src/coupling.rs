//! Couplings with finite support, reference plans (comonotone, antitone,
//! identity), cost evaluation, and the geometric checkers that characterize
//! the optimal directional plan: directionality and improvable pairs.
//!
//! An improvable pair is two support points (x, y), (x′, y′) with
//! x < x′ ≤ y < y′: swapping their destinations stays directional and
//! strictly improves every strictly submodular reward. A directional coupling
//! without improvable pairs is the optimal one.

use crate::measure::DiscreteMeasure;
use crate::rat::{rat_from_f64, rat_to_f64, Rat};
use crate::{Error, Result};
use num_traits::{Signed, Zero};
use std::fmt;
use std::sync::Arc;

/// Joint law with finitely many support points, sorted by (x, y) with
/// duplicates merged, so equality is structural. Marginals are cached.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coupling {
    points: Vec<(Rat, Rat, Rat)>,
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
}

impl Coupling {
    pub fn from_rat_points(points: Vec<(Rat, Rat, Rat)>) -> Result<Self> {
        let mut points = points;
        points.sort_by(|a, b| (&a.0, &a.1).cmp(&(&b.0, &b.1)));
        let mut merged: Vec<(Rat, Rat, Rat)> = Vec::with_capacity(points.len());
        for (x, y, m) in points {
            if m.is_zero() {
                continue;
            }
            if m < Rat::zero() {
                return Err(Error::InvalidMeasure(format!(
                    "negative mass at ({}, {})",
                    rat_to_f64(&x),
                    rat_to_f64(&y)
                )));
            }
            match merged.last_mut() {
                Some((lx, ly, lm)) if *lx == x && *ly == y => *lm += m,
                _ => merged.push((x, y, m)),
            }
        }
        let mu = DiscreteMeasure::from_rat_atoms(
            merged.iter().map(|(x, _, m)| (x.clone(), m.clone())).collect(),
        )?;
        let nu = DiscreteMeasure::from_rat_atoms(
            merged.iter().map(|(_, y, m)| (y.clone(), m.clone())).collect(),
        )?;
        Ok(Self {
            points: merged,
            mu,
            nu,
        })
    }

    pub fn from_points(points: Vec<(f64, f64, Rat)>) -> Result<Self> {
        let conv = points
            .into_iter()
            .map(|(x, y, m)| {
                let xr = rat_from_f64(x)
                    .ok_or_else(|| Error::InvalidMeasure(format!("non-finite x {x}")))?;
                let yr = rat_from_f64(y)
                    .ok_or_else(|| Error::InvalidMeasure(format!("non-finite y {y}")))?;
                Ok((xr, yr, m))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rat_points(conv)
    }

    pub fn points(&self) -> &[(Rat, Rat, Rat)] {
        &self.points
    }

    pub fn mu_marginal(&self) -> &DiscreteMeasure {
        &self.mu
    }

    pub fn nu_marginal(&self) -> &DiscreteMeasure {
        &self.nu
    }

    pub fn total_mass(&self) -> Rat {
        self.points.iter().map(|(_, _, m)| m.clone()).sum()
    }

    /// True iff every support point satisfies y ≥ x.
    pub fn is_directional(&self) -> bool {
        self.points.iter().all(|(x, y, _)| y >= x)
    }

    /// Some ((x, y), (x′, y′)) in the support with x < x′ ≤ y < y′, or None.
    /// Quadratic scan; support sizes here are desk scale.
    pub fn find_improvable_pair(&self) -> Result<Option<((Rat, Rat), (Rat, Rat))>> {
        if let Some((x, y, _)) = self.points.iter().find(|(x, y, _)| y < x) {
            return Err(Error::NotDirectional {
                x: rat_to_f64(x),
                y: rat_to_f64(y),
            });
        }
        for (x, y, _) in &self.points {
            for (x2, y2, _) in &self.points {
                if x < x2 && x2 <= y && y < y2 {
                    return Ok(Some(((x.clone(), y.clone()), (x2.clone(), y2.clone()))));
                }
            }
        }
        Ok(None)
    }

    /// Σ mass · g(x, y) over the support, in floats.
    pub fn expected_cost(&self, g: &CostFn) -> Result<f64> {
        let mut acc = 0.0;
        for (x, y, m) in &self.points {
            let v = g.eval(rat_to_f64(x), rat_to_f64(y));
            if !v.is_finite() {
                return Err(Error::NonFiniteCost {
                    x: rat_to_f64(x),
                    y: rat_to_f64(y),
                });
            }
            acc += rat_to_f64(m) * v;
        }
        Ok(acc)
    }

    /// Exact Σ mass · g(x, y) for costs with exact rational values.
    pub fn expected_cost_exact(&self, g: &CostFn) -> Option<Rat> {
        let mut acc = Rat::zero();
        for (x, y, m) in &self.points {
            acc += m * g.eval_rat(x, y)?;
        }
        Some(acc)
    }

    /// Mass of the lower-left quadrant (−∞, x] × (−∞, y].
    pub fn cdf_rat(&self, x: &Rat, y: &Rat) -> Rat {
        self.points
            .iter()
            .filter(|(px, py, _)| px <= x && py <= y)
            .map(|(_, _, m)| m.clone())
            .sum()
    }

    pub fn cdf(&self, x: f64, y: f64) -> f64 {
        if x.is_nan() || y.is_nan() {
            return f64::NAN;
        }
        let mass: Rat = self
            .points
            .iter()
            .filter(|(px, py, _)| {
                let in_x = if x == f64::INFINITY {
                    true
                } else if x == f64::NEG_INFINITY {
                    false
                } else {
                    *px <= rat_from_f64(x).expect("finite")
                };
                let in_y = if y == f64::INFINITY {
                    true
                } else if y == f64::NEG_INFINITY {
                    false
                } else {
                    *py <= rat_from_f64(y).expect("finite")
                };
                in_x && in_y
            })
            .map(|(_, _, m)| m.clone())
            .sum();
        rat_to_f64(&mass)
    }

    /// Image under a strictly increasing map applied to both axes.
    pub fn transform(&self, phi: &MonotoneMap) -> Coupling {
        let points = self
            .points
            .iter()
            .map(|(x, y, m)| (phi.eval_rat(x), phi.eval_rat(y), m.clone()))
            .collect();
        Coupling::from_rat_points(points).expect("monotone image of valid coupling is valid")
    }
}

/// Order-preserving quantile match with exact mass splitting.
pub fn comonotone(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<Coupling> {
    let (tm, tn) = (mu.total_mass(), nu.total_mass());
    if tm != tn {
        return Err(Error::MassMismatch {
            mu: tm.to_string(),
            nu: tn.to_string(),
        });
    }
    let mut points = Vec::new();
    let mut i = 0;
    let mut j = 0;
    let mut left_i = mu.atoms().first().map(|(_, m)| m.clone()).unwrap_or_else(Rat::zero);
    let mut left_j = nu.atoms().first().map(|(_, m)| m.clone()).unwrap_or_else(Rat::zero);
    while i < mu.len() && j < nu.len() {
        let take = left_i.clone().min(left_j.clone());
        points.push((mu.atoms()[i].0.clone(), nu.atoms()[j].0.clone(), take.clone()));
        left_i -= &take;
        left_j -= &take;
        if left_i.is_zero() {
            i += 1;
            if i < mu.len() {
                left_i = mu.atoms()[i].1.clone();
            }
        }
        if left_j.is_zero() {
            j += 1;
            if j < nu.len() {
                left_j = nu.atoms()[j].1.clone();
            }
        }
    }
    Coupling::from_rat_points(points)
}

/// Order-reversing quantile match: top μ-quantiles meet bottom ν-quantiles.
pub fn antitone(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<Coupling> {
    let (tm, tn) = (mu.total_mass(), nu.total_mass());
    if tm != tn {
        return Err(Error::MassMismatch {
            mu: tm.to_string(),
            nu: tn.to_string(),
        });
    }
    let rev: Vec<(Rat, Rat)> = nu.atoms().iter().rev().cloned().collect();
    let mut points = Vec::new();
    let mut i = 0;
    let mut j = 0;
    let mut left_i = mu.atoms().first().map(|(_, m)| m.clone()).unwrap_or_else(Rat::zero);
    let mut left_j = rev.first().map(|(_, m)| m.clone()).unwrap_or_else(Rat::zero);
    while i < mu.len() && j < rev.len() {
        let take = left_i.clone().min(left_j.clone());
        points.push((mu.atoms()[i].0.clone(), rev[j].0.clone(), take.clone()));
        left_i -= &take;
        left_j -= &take;
        if left_i.is_zero() {
            i += 1;
            if i < mu.len() {
                left_i = mu.atoms()[i].1.clone();
            }
        }
        if left_j.is_zero() {
            j += 1;
            if j < rev.len() {
                left_j = rev[j].1.clone();
            }
        }
    }
    Coupling::from_rat_points(points)
}

/// Each atom paired with itself.
pub fn identity(mu: &DiscreteMeasure) -> Coupling {
    Coupling::from_rat_points(
        mu.atoms()
            .iter()
            .map(|(x, m)| (x.clone(), x.clone(), m.clone()))
            .collect(),
    )
    .expect("identity pairing of valid measure is valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostShape {
    Submodular,
    StrictlySubmodular,
    Supermodular,
    Unknown,
}

/// Reward/cost functions over the halfplane. The built-ins cover every cost
/// the optimality theory singles out; `Custom` carries a declared shape the
/// caller vouches for.
#[derive(Clone)]
pub enum CostFn {
    /// (x − y)² — strictly submodular.
    SquaredDiff,
    /// −√|y − x| — strictly submodular.
    NegSqrtAbsDiff,
    /// −x·y — strictly submodular.
    NegProduct,
    /// x·y — strictly supermodular.
    Product,
    /// |y − x|^p for p ∈ (0, 1]: a concave transport cost (supermodular).
    AbsDiffPow(f64),
    Custom {
        f: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
        shape: CostShape,
    },
}

impl fmt::Debug for CostFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostFn::SquaredDiff => write!(f, "SquaredDiff"),
            CostFn::NegSqrtAbsDiff => write!(f, "NegSqrtAbsDiff"),
            CostFn::NegProduct => write!(f, "NegProduct"),
            CostFn::Product => write!(f, "Product"),
            CostFn::AbsDiffPow(p) => write!(f, "AbsDiffPow({p})"),
            CostFn::Custom { shape, .. } => write!(f, "Custom({shape:?})"),
        }
    }
}

impl CostFn {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            CostFn::SquaredDiff => (x - y) * (x - y),
            CostFn::NegSqrtAbsDiff => -(y - x).abs().sqrt(),
            CostFn::NegProduct => -x * y,
            CostFn::Product => x * y,
            CostFn::AbsDiffPow(p) => (y - x).abs().powf(*p),
            CostFn::Custom { f, .. } => f(x, y),
        }
    }

    /// Exact value where the cost is rational on rational points.
    pub fn eval_rat(&self, x: &Rat, y: &Rat) -> Option<Rat> {
        match self {
            CostFn::SquaredDiff => {
                let d = x - y;
                Some(&d * &d)
            }
            CostFn::NegProduct => Some(-(x * y)),
            CostFn::Product => Some(x * y),
            CostFn::AbsDiffPow(p) if *p == 1.0 => Some((y - x).abs()),
            _ => None,
        }
    }

    pub fn declared_shape(&self) -> CostShape {
        match self {
            CostFn::SquaredDiff | CostFn::NegSqrtAbsDiff | CostFn::NegProduct => {
                CostShape::StrictlySubmodular
            }
            CostFn::Product | CostFn::AbsDiffPow(_) => CostShape::Supermodular,
            CostFn::Custom { shape, .. } => *shape,
        }
    }
}

/// Grid certificate of submodularity: checks the defining inequality on all
/// grid quadruples x < x′ ≤ y < y′. Exact when the cost evaluates rationally;
/// floating comparisons otherwise get a hair of slack so that genuine
/// equality cases do not flip on rounding.
pub fn check_submodular(g: &CostFn, grid: &[f64]) -> bool {
    let mut grid: Vec<f64> = grid.to_vec();
    grid.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
    grid.dedup();
    let n = grid.len();
    for i in 0..n {
        for ip in (i + 1)..n {
            for k in ip..n {
                for kp in (k + 1)..n {
                    let (x, xp, y, yp) = (grid[i], grid[ip], grid[k], grid[kp]);
                    let exact = (|| {
                        let xr = rat_from_f64(x)?;
                        let xpr = rat_from_f64(xp)?;
                        let yr = rat_from_f64(y)?;
                        let ypr = rat_from_f64(yp)?;
                        let lhs = g.eval_rat(&xr, &yr)? + g.eval_rat(&xpr, &ypr)?;
                        let rhs = g.eval_rat(&xr, &ypr)? + g.eval_rat(&xpr, &yr)?;
                        Some(lhs <= rhs)
                    })();
                    let ok = match exact {
                        Some(v) => v,
                        None => {
                            let lhs = g.eval(x, y) + g.eval(xp, yp);
                            let rhs = g.eval(x, yp) + g.eval(xp, y);
                            lhs <= rhs + 1e-12 * rhs.abs().max(lhs.abs()).max(1.0)
                        }
                    };
                    if !ok {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Strictly increasing piecewise-linear map of the real line. Vertical jumps
/// are allowed and recorded as closed intervals [left, right] at a knot; the
/// inverse collapses a jump interval back to its knot. Beyond the knot span
/// the map continues with explicit end slopes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonotoneMap {
    knots: Vec<(Rat, Rat, Rat)>,
    pre_slope: Rat,
    post_slope: Rat,
}

impl MonotoneMap {
    pub fn from_rat_knots(
        knots: Vec<(Rat, Rat, Rat)>,
        pre_slope: Rat,
        post_slope: Rat,
    ) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::NotIncreasing { location: f64::NAN });
        }
        if pre_slope <= Rat::zero() || post_slope <= Rat::zero() {
            return Err(Error::NotIncreasing {
                location: rat_to_f64(&knots[0].0),
            });
        }
        for w in knots.windows(2) {
            let ((x0, _, r0), (x1, l1, _)) = (&w[0], &w[1]);
            if x0 >= x1 || r0 >= l1 {
                return Err(Error::NotIncreasing {
                    location: rat_to_f64(x1),
                });
            }
        }
        for (x, l, r) in &knots {
            if l > r {
                return Err(Error::NotIncreasing {
                    location: rat_to_f64(x),
                });
            }
        }
        Ok(Self {
            knots,
            pre_slope,
            post_slope,
        })
    }

    /// Continuous map through the given (x, φ(x)) points, extended past the
    /// span with the adjacent segment slopes.
    pub fn from_points(points: Vec<(f64, f64)>) -> Result<Self> {
        let mut conv: Vec<(Rat, Rat)> = points
            .into_iter()
            .map(|(x, v)| {
                let xr = rat_from_f64(x).ok_or(Error::NotIncreasing { location: x })?;
                let vr = rat_from_f64(v).ok_or(Error::NotIncreasing { location: x })?;
                Ok((xr, vr))
            })
            .collect::<Result<Vec<_>>>()?;
        conv.sort_by(|a, b| a.0.cmp(&b.0));
        if conv.len() < 2 {
            return Err(Error::NotIncreasing { location: f64::NAN });
        }
        let first_slope = (&conv[1].1 - &conv[0].1) / (&conv[1].0 - &conv[0].0);
        let last_slope = (&conv[conv.len() - 1].1 - &conv[conv.len() - 2].1)
            / (&conv[conv.len() - 1].0 - &conv[conv.len() - 2].0);
        let knots = conv
            .into_iter()
            .map(|(x, v)| (x, v.clone(), v))
            .collect::<Vec<_>>();
        Self::from_rat_knots(knots, first_slope, last_slope)
    }

    pub fn identity() -> Self {
        let zero = Rat::zero();
        Self {
            knots: vec![(zero.clone(), zero.clone(), zero)],
            pre_slope: Rat::new(1.into(), 1.into()),
            post_slope: Rat::new(1.into(), 1.into()),
        }
    }

    /// φ(t) = intercept + slope · t with slope > 0.
    pub fn affine(intercept: f64, slope: f64) -> Result<Self> {
        let i = rat_from_f64(intercept).ok_or(Error::NotIncreasing {
            location: intercept,
        })?;
        let s = rat_from_f64(slope).ok_or(Error::NotIncreasing { location: slope })?;
        if s <= Rat::zero() {
            return Err(Error::NotIncreasing { location: 0.0 });
        }
        Self::from_rat_knots(vec![(Rat::zero(), i.clone(), i)], s.clone(), s)
    }

    pub fn knots(&self) -> &[(Rat, Rat, Rat)] {
        &self.knots
    }

    pub fn eval_rat(&self, x: &Rat) -> Rat {
        let idx = self.knots.partition_point(|(kx, _, _)| kx <= x);
        if idx == 0 {
            let (x0, l0, _) = &self.knots[0];
            return l0 - &self.pre_slope * (x0 - x);
        }
        let (x0, _, r0) = &self.knots[idx - 1];
        if x0 == x {
            return r0.clone();
        }
        if idx == self.knots.len() {
            return r0 + &self.post_slope * (x - x0);
        }
        let (x1, l1, _) = &self.knots[idx];
        r0 + (x - x0) * (l1 - r0) / (x1 - x0)
    }

    /// Left limit φ(x−): differs from φ(x) only at jump knots.
    pub fn eval_left_rat(&self, x: &Rat) -> Rat {
        let idx = self.knots.partition_point(|(kx, _, _)| kx < x);
        if idx < self.knots.len() && &self.knots[idx].0 == x {
            return self.knots[idx].1.clone();
        }
        self.eval_rat(x)
    }

    pub fn eval(&self, x: f64) -> f64 {
        rat_to_f64(&self.eval_rat(&rat_from_f64(x).expect("finite input")))
    }

    /// Preimage; jump intervals collapse to their knot.
    pub fn invert_rat(&self, v: &Rat) -> Rat {
        let first = &self.knots[0];
        if *v < first.1 {
            return &first.0 - (&first.1 - v) / &self.pre_slope;
        }
        for (i, (x, l, r)) in self.knots.iter().enumerate() {
            if v >= l && v <= r {
                return x.clone();
            }
            if let Some((x1, l1, _)) = self.knots.get(i + 1) {
                if v > r && v < l1 {
                    return x + (v - r) * (x1 - x) / (l1 - r);
                }
            }
        }
        let last = &self.knots[self.knots.len() - 1];
        &last.0 + (v - &last.2) / &self.post_slope
    }

    pub fn invert(&self, v: f64) -> f64 {
        rat_to_f64(&self.invert_rat(&rat_from_f64(v).expect("finite input")))
    }

    pub fn push_discrete(&self, m: &DiscreteMeasure) -> DiscreteMeasure {
        DiscreteMeasure::from_rat_atoms(
            m.atoms()
                .iter()
                .map(|(x, w)| (self.eval_rat(x), w.clone()))
                .collect(),
        )
        .expect("strictly increasing image of valid measure is valid")
    }

    pub fn push_pl(&self, m: &crate::measure::PlMeasure) -> crate::measure::PlMeasure {
        if m.is_empty() {
            return crate::measure::PlMeasure::zero();
        }
        let mut criticals: Vec<Rat> = m.points().iter().map(|(x, _)| x.clone()).collect();
        let lo = &m.points()[0].0;
        let hi = &m.points()[m.points().len() - 1].0;
        for (kx, _, _) in &self.knots {
            if kx > lo && kx < hi {
                criticals.push(kx.clone());
            }
        }
        criticals.sort();
        criticals.dedup();
        let mut points = Vec::new();
        for x in &criticals {
            let c = m.cdf_rat(x);
            let left = self.eval_left_rat(x);
            let right = self.eval_rat(x);
            if left != right {
                points.push((left, c.clone()));
            }
            points.push((right, c));
        }
        crate::measure::PlMeasure::from_rat_points(points)
            .expect("strictly increasing image of valid cdf is valid")
    }
}
