//! Brute-force ground truth on small instances: exhaustive enumeration of
//! directional plans, an exact rational simplex over the transportation
//! polytope with forbidden cells, cyclical-monotonicity checking, and the
//! quadrant-mass minimizer. Everything here is an independent route against
//! which the constructive algorithms are certified; none of it shares code
//! with them.

use crate::coupling::{CostFn, Coupling};
use crate::measure::{dominance_violation, DiscreteMeasure, Measure};
use crate::rat::{rat_from_f64, rat_to_f64, Rat};
use crate::{Error, Result};
use itertools::Itertools;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeSet;

const ENUM_CAP: usize = 8;
const CYCLE_CAP: usize = 4;

/// A transport polytope in matrix form: rows are origins, columns are
/// destinations, and `forbidden[i][j]` removes cell (i, j) from the feasible
/// set. Row and column masses must balance.
#[derive(Debug, Clone)]
pub struct TransportPolytopeInstance {
    pub origins: Vec<Rat>,
    pub destinations: Vec<Rat>,
    pub row_masses: Vec<Rat>,
    pub col_masses: Vec<Rat>,
    pub forbidden: Vec<Vec<bool>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Max,
    Min,
}

impl TransportPolytopeInstance {
    pub fn new(
        origins: Vec<Rat>,
        destinations: Vec<Rat>,
        row_masses: Vec<Rat>,
        col_masses: Vec<Rat>,
        forbidden: Vec<Vec<bool>>,
    ) -> Result<Self> {
        let total_row: Rat = row_masses.iter().cloned().sum();
        let total_col: Rat = col_masses.iter().cloned().sum();
        if total_row != total_col {
            return Err(Error::MassMismatch {
                mu: total_row.to_string(),
                nu: total_col.to_string(),
            });
        }
        assert_eq!(origins.len(), row_masses.len());
        assert_eq!(destinations.len(), col_masses.len());
        assert_eq!(forbidden.len(), origins.len());
        Ok(Self {
            origins,
            destinations,
            row_masses,
            col_masses,
            forbidden,
        })
    }

    fn from_measures(
        mu: &DiscreteMeasure,
        nu: &DiscreteMeasure,
        mut forbid: impl FnMut(&Rat, &Rat) -> bool,
    ) -> Result<Self> {
        let origins: Vec<Rat> = mu.atoms().iter().map(|(x, _)| x.clone()).collect();
        let destinations: Vec<Rat> = nu.atoms().iter().map(|(y, _)| y.clone()).collect();
        let forbidden = origins
            .iter()
            .map(|x| destinations.iter().map(|y| forbid(x, y)).collect())
            .collect();
        Self::new(
            origins,
            destinations,
            mu.atoms().iter().map(|(_, m)| m.clone()).collect(),
            nu.atoms().iter().map(|(_, m)| m.clone()).collect(),
            forbidden,
        )
    }

    /// Cells below the diagonal (y < x) forbidden.
    pub fn directional(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<Self> {
        Self::from_measures(mu, nu, |x, y| y < x)
    }

    /// Every cell allowed.
    pub fn unconstrained(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<Self> {
        Self::from_measures(mu, nu, |_, _| false)
    }

    /// Cells with y < z(x) forbidden, for a caller-supplied lower boundary.
    pub fn with_boundary(
        mu: &DiscreteMeasure,
        nu: &DiscreteMeasure,
        mut z: impl FnMut(&Rat) -> Rat,
    ) -> Result<Self> {
        Self::from_measures(mu, nu, |x, y| *y < z(x))
    }

    fn unit_mass_side(&self) -> Option<Rat> {
        let n = self.origins.len();
        if n == 0 || n != self.destinations.len() {
            return None;
        }
        let w = &self.row_masses[0];
        if self.row_masses.iter().all(|m| m == w) && self.col_masses.iter().all(|m| m == w) {
            Some(w.clone())
        } else {
            None
        }
    }
}

/// All couplings induced by feasible assignments of origins to destinations,
/// for instances with one shared unit mass per atom; deduplicated by merged
/// support. Infeasible instances give the empty list.
pub fn enumerate_directional(inst: &TransportPolytopeInstance) -> Result<Vec<Coupling>> {
    let w = inst.unit_mass_side().ok_or_else(|| {
        Error::Unsupported("enumeration needs equal unit masses per atom".into())
    })?;
    let n = inst.origins.len();
    if n > ENUM_CAP {
        return Err(Error::TooLarge {
            size: n,
            cap: ENUM_CAP,
        });
    }
    let mut seen: BTreeSet<Vec<(Rat, Rat, Rat)>> = BTreeSet::new();
    for perm in (0..n).permutations(n) {
        if perm.iter().enumerate().any(|(i, &j)| inst.forbidden[i][j]) {
            continue;
        }
        let pts = perm
            .iter()
            .enumerate()
            .map(|(i, &j)| {
                (
                    inst.origins[i].clone(),
                    inst.destinations[j].clone(),
                    w.clone(),
                )
            })
            .collect();
        let c = Coupling::from_rat_points(pts)?;
        seen.insert(c.points().to_vec());
    }
    seen.into_iter().map(Coupling::from_rat_points).collect()
}

/// Exact optimizer of Σ m_ij·g(x_i, y_j) over the instance polytope.
/// Costs from `g` enter as their exact rational values where the cost is
/// rational, and as the exact value of the float evaluation otherwise.
/// Returns the optimal value and one optimal vertex.
pub fn lp_optimal(
    inst: &TransportPolytopeInstance,
    g: &CostFn,
    sense: Sense,
) -> Result<(Rat, Coupling)> {
    let cells: Vec<(usize, usize)> = (0..inst.origins.len())
        .cartesian_product(0..inst.destinations.len())
        .filter(|&(i, j)| !inst.forbidden[i][j])
        .collect();
    let mut costs = Vec::with_capacity(cells.len());
    for &(i, j) in &cells {
        let x = &inst.origins[i];
        let y = &inst.destinations[j];
        let c = match g.eval_rat(x, y) {
            Some(c) => c,
            None => {
                let v = g.eval(rat_to_f64(x), rat_to_f64(y));
                rat_from_f64(v).ok_or(Error::NonFiniteCost {
                    x: rat_to_f64(x),
                    y: rat_to_f64(y),
                })?
            }
        };
        costs.push(match sense {
            Sense::Min => c,
            Sense::Max => -c,
        });
    }
    let nrows = inst.origins.len();
    let ncols = inst.destinations.len();
    let mut a = vec![vec![Rat::zero(); cells.len()]; nrows + ncols];
    for (k, &(i, j)) in cells.iter().enumerate() {
        a[i][k] = Rat::one();
        a[nrows + j][k] = Rat::one();
    }
    let mut b = inst.row_masses.clone();
    b.extend(inst.col_masses.iter().cloned());
    let (minval, x) = simplex_min(a, b, costs)?;
    let value = match sense {
        Sense::Min => minval,
        Sense::Max => -minval,
    };
    let pts = cells
        .iter()
        .zip(&x)
        .filter(|(_, m)| !m.is_zero())
        .map(|(&(i, j), m)| {
            (
                inst.origins[i].clone(),
                inst.destinations[j].clone(),
                m.clone(),
            )
        })
        .collect();
    Ok((value, Coupling::from_rat_points(pts)?))
}

/// Minimal mass the polytope can place in the quadrant (−∞,x] × (−∞,y].
/// Equal-unit-mass instances are minimized by exhausting the permutation
/// vertices (the polytope's extreme points); general instances run the
/// simplex with an indicator objective. Both routes are exact.
pub fn min_cdf(inst: &TransportPolytopeInstance, x: f64, y: f64) -> Result<Rat> {
    let xin = |v: &Rat| -> bool {
        if x == f64::INFINITY {
            true
        } else if x == f64::NEG_INFINITY || x.is_nan() {
            false
        } else {
            *v <= rat_from_f64(x).expect("finite")
        }
    };
    let yin = |v: &Rat| -> bool {
        if y == f64::INFINITY {
            true
        } else if y == f64::NEG_INFINITY || y.is_nan() {
            false
        } else {
            *v <= rat_from_f64(y).expect("finite")
        }
    };
    if let Some(w) = inst.unit_mass_side() {
        if inst.origins.len() <= ENUM_CAP {
            let n = inst.origins.len();
            let row_in: Vec<bool> = inst.origins.iter().map(&xin).collect();
            let col_in: Vec<bool> = inst.destinations.iter().map(&yin).collect();
            let mut best: Option<usize> = None;
            for perm in (0..n).permutations(n) {
                if perm.iter().enumerate().any(|(i, &j)| inst.forbidden[i][j]) {
                    continue;
                }
                let count = perm
                    .iter()
                    .enumerate()
                    .filter(|&(i, &j)| row_in[i] && col_in[j])
                    .count();
                best = Some(best.map_or(count, |b| b.min(count)));
                if best == Some(0) {
                    break;
                }
            }
            let count = best.ok_or(Error::LpInfeasible)?;
            return Ok(Rat::from_integer(BigInt::from(count)) * w);
        }
    }
    let cells: Vec<(usize, usize)> = (0..inst.origins.len())
        .cartesian_product(0..inst.destinations.len())
        .filter(|&(i, j)| !inst.forbidden[i][j])
        .collect();
    let costs: Vec<Rat> = cells
        .iter()
        .map(|&(i, j)| {
            if xin(&inst.origins[i]) && yin(&inst.destinations[j]) {
                Rat::one()
            } else {
                Rat::zero()
            }
        })
        .collect();
    let nrows = inst.origins.len();
    let ncols = inst.destinations.len();
    let mut a = vec![vec![Rat::zero(); cells.len()]; nrows + ncols];
    for (k, &(i, j)) in cells.iter().enumerate() {
        a[i][k] = Rat::one();
        a[nrows + j][k] = Rat::one();
    }
    let mut b = inst.row_masses.clone();
    b.extend(inst.col_masses.iter().cloned());
    let (minval, _) = simplex_min(a, b, costs)?;
    Ok(minval)
}

/// True iff no n-tuple of distinct support points admits a feasible
/// destination permutation strictly increasing the total reward. Feasible
/// means every rearranged point stays in the halfplane y ≥ x.
pub fn check_cyclical_monotonicity(p: &Coupling, g: &CostFn, n: usize) -> Result<bool> {
    if n > CYCLE_CAP {
        return Err(Error::TooLarge {
            size: n,
            cap: CYCLE_CAP,
        });
    }
    let pts = p.points();
    if pts.len() < n || n < 2 {
        return Ok(true);
    }
    for combo in (0..pts.len()).combinations(n) {
        let exact: Option<Vec<Vec<Rat>>> = combo
            .iter()
            .map(|&a| {
                combo
                    .iter()
                    .map(|&b| g.eval_rat(&pts[a].0, &pts[b].1))
                    .collect::<Option<Vec<_>>>()
            })
            .collect();
        let base_exact: Option<Rat> = exact
            .as_ref()
            .map(|m| (0..n).map(|k| m[k][k].clone()).sum());
        let float: Vec<Vec<f64>> = combo
            .iter()
            .map(|&a| {
                combo
                    .iter()
                    .map(|&b| g.eval(rat_to_f64(&pts[a].0), rat_to_f64(&pts[b].1)))
                    .collect()
            })
            .collect();
        let base_float: f64 = (0..n).map(|k| float[k][k]).sum();
        for perm in (0..n).permutations(n) {
            if perm.iter().enumerate().all(|(k, &pk)| pk == k) {
                continue;
            }
            let feasible = perm
                .iter()
                .enumerate()
                .all(|(k, &pk)| pts[combo[pk]].1 >= pts[combo[k]].0);
            if !feasible {
                continue;
            }
            let improves = match (&exact, &base_exact) {
                (Some(m), Some(base)) => {
                    let total: Rat = perm.iter().enumerate().map(|(k, &pk)| m[k][pk].clone()).sum();
                    total > *base
                }
                _ => {
                    let total: f64 = perm.iter().enumerate().map(|(k, &pk)| float[k][pk]).sum();
                    total > base_float + 1e-12 * base_float.abs().max(total.abs()).max(1.0)
                }
            };
            if improves {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Exhaustive list of θ with θ ≤ ν atomwise, mass(θ) = mass(μ0), μ0 ≼st θ.
/// Masses are discretized to the exact gcd of all input masses, which every
/// greedy split is a multiple of, so the true minimal θ is on the grid.
pub fn enumerate_dominated_submeasures(
    mu0: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cap: usize,
) -> Result<Vec<DiscreteMeasure>> {
    if mu0.is_empty() {
        return Ok(vec![DiscreteMeasure::zero()]);
    }
    let step = mass_gcd(
        mu0.atoms()
            .iter()
            .chain(nu.atoms())
            .map(|(_, m)| m.clone())
            .collect(),
    );
    let units_total = {
        let q = mu0.total_mass() / &step;
        debug_assert!(q.is_integer());
        q.to_integer()
    };
    let capacities: Vec<BigInt> = nu
        .atoms()
        .iter()
        .map(|(_, m)| (m / &step).to_integer())
        .collect();
    let mut combos: usize = 1;
    for c in &capacities {
        let c_usize = usize::try_from(c.clone()).unwrap_or(usize::MAX);
        combos = combos.saturating_mul(c_usize.saturating_add(1));
        if combos > cap {
            return Err(Error::TooLarge {
                size: combos,
                cap,
            });
        }
    }
    let mut out = Vec::new();
    let mut current: Vec<BigInt> = Vec::with_capacity(capacities.len());
    fn recurse(
        idx: usize,
        remaining: BigInt,
        capacities: &[BigInt],
        nu: &DiscreteMeasure,
        step: &Rat,
        mu0: &DiscreteMeasure,
        current: &mut Vec<BigInt>,
        out: &mut Vec<DiscreteMeasure>,
    ) {
        if idx == capacities.len() {
            if remaining.is_zero() {
                let atoms: Vec<(Rat, Rat)> = current
                    .iter()
                    .enumerate()
                    .filter(|(_, u)| !u.is_zero())
                    .map(|(j, u)| {
                        (
                            nu.atoms()[j].0.clone(),
                            Rat::from_integer(u.clone()) * step,
                        )
                    })
                    .collect();
                let theta = DiscreteMeasure::from_rat_atoms(atoms).expect("valid submeasure");
                let ok = dominance_violation(
                    &Measure::Discrete(mu0.clone()),
                    &Measure::Discrete(theta.clone()),
                )
                .map(|v| v.is_none())
                .unwrap_or(false);
                if ok {
                    out.push(theta);
                }
            }
            return;
        }
        let top = capacities[idx].clone().min(remaining.clone());
        let mut u = BigInt::zero();
        while u <= top {
            current.push(u.clone());
            recurse(
                idx + 1,
                remaining.clone() - &u,
                capacities,
                nu,
                step,
                mu0,
                current,
                out,
            );
            current.pop();
            u += 1;
        }
    }
    recurse(
        0,
        units_total,
        &capacities,
        nu,
        &step,
        mu0,
        &mut current,
        &mut out,
    );
    Ok(out)
}

fn mass_gcd(masses: Vec<Rat>) -> Rat {
    let mut l = BigInt::one();
    for m in &masses {
        l = l.lcm(m.denom());
    }
    let mut g = BigInt::zero();
    for m in &masses {
        let scaled = (m * Rat::from_integer(l.clone())).to_integer();
        g = g.gcd(&scaled.abs());
    }
    if g.is_zero() {
        g = BigInt::one();
    }
    Rat::new(g, l)
}

/// minimize c·x subject to Ax = b, x ≥ 0. Two-phase dense tableau with
/// Bland's rule throughout, all arithmetic exact.
fn simplex_min(a: Vec<Vec<Rat>>, b: Vec<Rat>, c: Vec<Rat>) -> Result<(Rat, Vec<Rat>)> {
    let m = a.len();
    let n = c.len();
    let rhs = n + m;
    let width = rhs + 1;
    let mut t: Vec<Vec<Rat>> = Vec::with_capacity(m);
    for (i, row) in a.into_iter().enumerate() {
        debug_assert_eq!(row.len(), n);
        debug_assert!(b[i] >= Rat::zero());
        let mut r = row;
        r.extend((0..m).map(|k| if k == i { Rat::one() } else { Rat::zero() }));
        r.push(b[i].clone());
        t.push(r);
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    // phase 1: minimize the artificial total
    let mut obj = vec![Rat::zero(); width];
    for j in 0..n {
        let s: Rat = (0..m).map(|i| t[i][j].clone()).sum();
        obj[j] = -s;
    }
    let btotal: Rat = b.iter().cloned().sum();
    obj[rhs] = -btotal;
    pivot_until_optimal(&mut t, &mut obj, &mut basis, n + m, rhs)?;
    if !obj[rhs].is_zero() {
        return Err(Error::LpInfeasible);
    }
    // drive out artificials basic at zero where a structural pivot exists
    for i in 0..m {
        if basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| !t[i][j].is_zero()) {
                pivot(&mut t, &mut obj, i, j, rhs);
                basis[i] = j;
            }
        }
    }
    // phase 2: rebuild reduced costs for the real objective
    let mut obj2 = vec![Rat::zero(); width];
    for j in 0..width {
        let mut v = if j < n { c[j].clone() } else { Rat::zero() };
        for i in 0..m {
            let cb = if basis[i] < n {
                c[basis[i]].clone()
            } else {
                Rat::zero()
            };
            if !cb.is_zero() {
                v -= cb * &t[i][j];
            }
        }
        obj2[j] = v;
    }
    // the rhs slot of the objective row carries −(current value)
    pivot_until_optimal(&mut t, &mut obj2, &mut basis, n, rhs)?;
    let mut x = vec![Rat::zero(); n];
    for i in 0..m {
        if basis[i] < n {
            x[basis[i]] = t[i][rhs].clone();
        }
    }
    let value: Rat = c
        .iter()
        .zip(&x)
        .map(|(ci, xi)| ci * xi)
        .sum();
    Ok((value, x))
}

fn pivot_until_optimal(
    t: &mut [Vec<Rat>],
    obj: &mut [Rat],
    basis: &mut [usize],
    enterable: usize,
    rhs: usize,
) -> Result<()> {
    loop {
        let Some(enter) = (0..enterable).find(|&j| obj[j] < Rat::zero()) else {
            return Ok(());
        };
        let mut leave: Option<usize> = None;
        let mut best: Option<Rat> = None;
        for (i, row) in t.iter().enumerate() {
            if row[enter] > Rat::zero() {
                let ratio = &row[rhs] / &row[enter];
                let better = match (&best, leave) {
                    (None, _) => true,
                    (Some(b), Some(li)) => ratio < *b || (ratio == *b && basis[i] < basis[li]),
                    _ => unreachable!(),
                };
                if better {
                    best = Some(ratio);
                    leave = Some(i);
                }
            }
        }
        let li = leave.ok_or_else(|| {
            Error::Unsupported("linear program is unbounded; the polytope should be bounded".into())
        })?;
        pivot(t, obj, li, enter, rhs);
        basis[li] = enter;
    }
}

fn pivot(t: &mut [Vec<Rat>], obj: &mut [Rat], li: usize, enter: usize, rhs: usize) {
    let piv = t[li][enter].clone();
    for v in t[li].iter_mut() {
        *v = &*v / &piv;
    }
    for i in 0..t.len() {
        if i == li || t[i][enter].is_zero() {
            continue;
        }
        let f = t[i][enter].clone();
        for j in 0..=rhs {
            let d = &t[li][j] * &f;
            t[i][j] -= d;
        }
    }
    if !obj[enter].is_zero() {
        let f = obj[enter].clone();
        for j in 0..=rhs {
            let d = &t[li][j] * &f;
            obj[j] -= d;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::{identity, CostShape};
    use crate::greedy::couple;
    use crate::measure::shadow;
    use crate::rat::{rat, rat_int};
    use std::sync::Arc;

    fn d(atoms: &[(i64, (i64, i64))]) -> DiscreteMeasure {
        DiscreteMeasure::from_rat_atoms(
            atoms
                .iter()
                .map(|&(x, (n, m))| (rat_int(x), rat(n, m)))
                .collect(),
        )
        .unwrap()
    }

    fn mu01() -> DiscreteMeasure {
        d(&[(0, (1, 2)), (1, (1, 2))])
    }

    fn nu12() -> DiscreteMeasure {
        d(&[(1, (1, 2)), (2, (1, 2))])
    }

    #[test]
    fn enumeration_counts_plans() {
        let inst = TransportPolytopeInstance::directional(&mu01(), &nu12()).unwrap();
        assert_eq!(enumerate_directional(&inst).unwrap().len(), 2);

        let one = TransportPolytopeInstance::directional(
            &DiscreteMeasure::single(0.0, rat_int(1)).unwrap(),
            &DiscreteMeasure::single(1.0, rat_int(1)).unwrap(),
        )
        .unwrap();
        assert_eq!(enumerate_directional(&one).unwrap().len(), 1);

        let infeasible = TransportPolytopeInstance::directional(
            &DiscreteMeasure::single(2.0, rat_int(1)).unwrap(),
            &DiscreteMeasure::single(1.0, rat_int(1)).unwrap(),
        )
        .unwrap();
        assert!(enumerate_directional(&infeasible).unwrap().is_empty());
    }

    #[test]
    fn enumeration_guards() {
        let mu = DiscreteMeasure::from_samples(&[0., 1., 2., 3., 4., 5., 6., 7., 8.]).unwrap();
        let inst = TransportPolytopeInstance::directional(&mu, &mu).unwrap();
        assert!(matches!(
            enumerate_directional(&inst),
            Err(Error::TooLarge { .. })
        ));
        let unequal = TransportPolytopeInstance::directional(
            &d(&[(0, (1, 4)), (1, (3, 4))]),
            &d(&[(1, (1, 2)), (2, (1, 2))]),
        )
        .unwrap();
        assert!(enumerate_directional(&unequal).is_err());
    }

    #[test]
    fn lp_picks_the_antitone_plan_for_neg_product() {
        let inst = TransportPolytopeInstance::directional(&mu01(), &nu12()).unwrap();
        let (value, plan) = lp_optimal(&inst, &CostFn::NegProduct, Sense::Max).unwrap();
        assert_eq!(value, rat(-1, 2));
        assert_eq!(
            plan,
            Coupling::from_points(vec![(0.0, 2.0, rat(1, 2)), (1.0, 1.0, rat(1, 2))]).unwrap()
        );
    }

    #[test]
    fn lp_on_identical_marginals_maxes_at_zero() {
        let mu = d(&[(0, (1, 2)), (3, (1, 2))]);
        let inst = TransportPolytopeInstance::directional(&mu, &mu).unwrap();
        let (value, plan) = lp_optimal(&inst, &CostFn::SquaredDiff, Sense::Max).unwrap();
        assert_eq!(value, Rat::zero());
        assert_eq!(plan, identity(&mu));
    }

    #[test]
    fn unconstrained_sqrt_cost_beats_the_directional_plan() {
        let mu = d(&[(0, (1, 2)), (13, (1, 2))]);
        let nu = d(&[(12, (1, 2)), (25, (1, 2))]);
        let inst = TransportPolytopeInstance::unconstrained(&mu, &nu).unwrap();
        let (value, plan) = lp_optimal(&inst, &CostFn::AbsDiffPow(0.5), Sense::Min).unwrap();
        assert_eq!(value, rat_int(3));
        assert_eq!(
            plan,
            Coupling::from_points(vec![(0.0, 25.0, rat(1, 2)), (13.0, 12.0, rat(1, 2))]).unwrap()
        );
        // the directional optimum pays strictly more under this cost
        let p_star = couple(&mu, &nu).unwrap();
        let directional_cost = p_star.expected_cost(&CostFn::AbsDiffPow(0.5)).unwrap();
        assert!(directional_cost > rat_to_f64(&value) + 0.4);
    }

    #[test]
    fn lp_infeasible_when_no_cell_allowed() {
        let inst = TransportPolytopeInstance::directional(
            &DiscreteMeasure::single(2.0, rat_int(1)).unwrap(),
            &DiscreteMeasure::single(1.0, rat_int(1)).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            lp_optimal(&inst, &CostFn::NegProduct, Sense::Max),
            Err(Error::LpInfeasible)
        ));
    }

    #[test]
    fn flat_submodular_cost_attains_its_optimum_at_the_greedy_plan() {
        // (y − x − 2)₊: convex in the gap with a flat piece, so submodular
        // but not strictly; the optimum is a face containing the greedy plan
        let g = CostFn::Custom {
            f: Arc::new(|x, y| (y - x - 2.0).max(0.0)),
            shape: CostShape::Submodular,
        };
        let mu = d(&[(0, (1, 4)), (1, (1, 4)), (2, (1, 2))]);
        let nu = d(&[(2, (1, 2)), (3, (1, 4)), (5, (1, 4))]);
        let inst = TransportPolytopeInstance::directional(&mu, &nu).unwrap();
        let (value, _) = lp_optimal(&inst, &g, Sense::Max).unwrap();
        let p_star = couple(&mu, &nu).unwrap();
        let at_p_star = p_star.expected_cost(&g).unwrap();
        assert_eq!(rat_to_f64(&value), at_p_star);
    }

    #[test]
    fn cyclical_monotonicity_examples() {
        let p_star = couple(&mu01(), &nu12()).unwrap();
        assert!(check_cyclical_monotonicity(&p_star, &CostFn::NegProduct, 2).unwrap());

        let como =
            Coupling::from_points(vec![(0.0, 1.0, rat(1, 2)), (1.0, 2.0, rat(1, 2))]).unwrap();
        assert!(!check_cyclical_monotonicity(&como, &CostFn::NegProduct, 2).unwrap());

        let single = Coupling::from_points(vec![(0.0, 1.0, rat_int(1))]).unwrap();
        assert!(check_cyclical_monotonicity(&single, &CostFn::NegProduct, 2).unwrap());

        assert!(matches!(
            check_cyclical_monotonicity(&p_star, &CostFn::NegProduct, 5),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn min_cdf_matches_quadrant_extremes() {
        let inst = TransportPolytopeInstance::directional(&mu01(), &nu12()).unwrap();
        assert_eq!(min_cdf(&inst, 0.0, 1.0).unwrap(), Rat::zero());
        assert_eq!(min_cdf(&inst, 100.0, 100.0).unwrap(), rat_int(1));
        assert_eq!(min_cdf(&inst, -1.0, 100.0).unwrap(), Rat::zero());
    }

    #[test]
    fn min_cdf_fast_and_simplex_routes_agree() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        for _ in 0..25 {
            let n = rng.gen_range(1..=4usize);
            let mut xs: Vec<i64> = (0..n).map(|_| rng.gen_range(0..8)).collect();
            let mut ys: Vec<i64> = (0..n).map(|_| rng.gen_range(0..8)).collect();
            xs.sort();
            ys.sort();
            for k in 0..n {
                if xs[k] > ys[k] {
                    std::mem::swap(&mut xs[k], &mut ys[k]);
                }
            }
            let w = rat(1, n as i64);
            let mu = DiscreteMeasure::from_rat_atoms(
                xs.iter().map(|&x| (rat_int(x), w.clone())).collect(),
            )
            .unwrap();
            let nu = DiscreteMeasure::from_rat_atoms(
                ys.iter().map(|&y| (rat_int(y), w.clone())).collect(),
            )
            .unwrap();
            // fast path instance: raw unit-mass lists
            let fast = TransportPolytopeInstance::new(
                xs.iter().map(|&x| rat_int(x)).collect(),
                ys.iter().map(|&y| rat_int(y)).collect(),
                vec![w.clone(); n],
                vec![w.clone(); n],
                xs.iter()
                    .map(|&x| ys.iter().map(|&y| y < x).collect())
                    .collect(),
            )
            .unwrap();
            // merged-atom instance takes the simplex route when masses differ
            let slow = TransportPolytopeInstance::directional(&mu, &nu).unwrap();
            for (gx, gy) in [(2.0, 3.0), (0.0, 7.0), (5.0, 5.0), (3.5, 4.5)] {
                assert_eq!(
                    min_cdf(&fast, gx, gy).unwrap(),
                    min_cdf(&slow, gx, gy).unwrap(),
                    "disagreement at ({gx}, {gy}) on xs={xs:?} ys={ys:?}"
                );
            }
        }
    }

    #[test]
    fn lp_agrees_with_enumeration_on_neg_product() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = rng.gen_range(1..=5usize);
            let mut xs: Vec<i64> = (0..n).map(|_| rng.gen_range(0..15)).collect();
            let mut ys: Vec<i64> = (0..n).map(|_| rng.gen_range(0..15)).collect();
            xs.sort();
            ys.sort();
            for k in 0..n {
                if xs[k] > ys[k] {
                    std::mem::swap(&mut xs[k], &mut ys[k]);
                }
            }
            let w = rat(1, n as i64);
            let inst = TransportPolytopeInstance::new(
                xs.iter().map(|&x| rat_int(x)).collect(),
                ys.iter().map(|&y| rat_int(y)).collect(),
                vec![w.clone(); n],
                vec![w.clone(); n],
                xs.iter()
                    .map(|&x| ys.iter().map(|&y| y < x).collect())
                    .collect(),
            )
            .unwrap();
            let plans = enumerate_directional(&inst).unwrap();
            assert!(!plans.is_empty());
            let best = plans
                .iter()
                .map(|p| p.expected_cost_exact(&CostFn::NegProduct).unwrap())
                .max()
                .unwrap();
            let (lp_value, lp_plan) = lp_optimal(&inst, &CostFn::NegProduct, Sense::Max).unwrap();
            assert_eq!(lp_value, best);
            assert_eq!(
                lp_plan.expected_cost_exact(&CostFn::NegProduct).unwrap(),
                best
            );
        }
    }

    #[test]
    fn shadow_is_minimal_against_exhaustive_enumeration() {
        let cases = [
            (d(&[(2, (1, 2))]), d(&[(1, (1, 4)), (2, (1, 4)), (3, (1, 2))])),
            (
                d(&[(0, (1, 4)), (3, (1, 4))]),
                d(&[(0, (1, 4)), (2, (1, 4)), (4, (1, 2))]),
            ),
            (
                d(&[(1, (1, 2)), (2, (1, 4))]),
                d(&[(1, (1, 4)), (2, (1, 2)), (5, (1, 4))]),
            ),
        ];
        for (mu0, nu) in cases {
            let s = shadow(&mu0, &nu).unwrap();
            let all = enumerate_dominated_submeasures(&mu0, &nu, 500_000).unwrap();
            assert!(!all.is_empty());
            assert!(all.iter().any(|t| *t == s.shadow), "shadow not in the set");
            let grid: Vec<Rat> = nu.atoms().iter().map(|(x, _)| x.clone()).collect();
            for theta in &all {
                for z in &grid {
                    assert!(
                        s.shadow.cdf_rat(z) >= theta.cdf_rat(z),
                        "shadow not minimal at {z} for mu0={mu0:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn no_improvable_pair_plan_is_unique_and_greedy() {
        let mu = d(&[(0, (1, 3)), (2, (1, 3)), (4, (1, 3))]);
        let nu = d(&[(2, (1, 3)), (4, (1, 3)), (6, (1, 3))]);
        let inst = TransportPolytopeInstance::directional(&mu, &nu).unwrap();
        let plans = enumerate_directional(&inst).unwrap();
        let p_star = couple(&mu, &nu).unwrap();
        let crossing_free: Vec<&Coupling> = plans
            .iter()
            .filter(|p| p.find_improvable_pair().unwrap().is_none())
            .collect();
        assert_eq!(crossing_free.len(), 1);
        assert_eq!(*crossing_free[0], p_star);
    }
}
