//! Greedy construction of the optimal directional coupling for discrete
//! marginals: walk the μ-atoms from right to left; each atom repeatedly
//! consumes the smallest still-available ν-location at or above itself,
//! splitting masses exactly. The result is directional and free of
//! improvable pairs, which pins it down uniquely.

use crate::coupling::Coupling;
use crate::measure::DiscreteMeasure;
use crate::rat::{rat_from_f64, rat_to_f64, Rat};
use crate::{Error, Result};
use num_traits::Zero;
use std::collections::BTreeMap;
use std::ops::Bound;

/// Remaining destination mass by location, with "smallest location ≥ x with
/// positive mass" queries and partial consumption.
#[derive(Debug, Clone)]
pub struct AvailabilityPool {
    map: BTreeMap<Rat, Rat>,
}

impl AvailabilityPool {
    pub fn new(nu: &DiscreteMeasure) -> Self {
        Self {
            map: nu.atoms().iter().cloned().collect(),
        }
    }

    pub fn remaining_total(&self) -> Rat {
        self.map.values().cloned().sum()
    }

    /// Consumes `need` mass from the smallest locations ≥ `origin`, in
    /// ascending order. Errors without mutating further when the pool runs
    /// dry above the origin; the origin is the violating location.
    pub fn take_at_least(&mut self, origin: &Rat, need: &Rat) -> Result<Vec<(Rat, Rat)>> {
        let mut left = need.clone();
        let mut taken = Vec::new();
        while !left.is_zero() {
            let slot = self
                .map
                .range((Bound::Included(origin.clone()), Bound::Unbounded))
                .next()
                .map(|(loc, avail)| (loc.clone(), avail.clone()));
            let Some((loc, avail)) = slot else {
                return Err(Error::Dominance {
                    location: rat_to_f64(origin),
                });
            };
            if avail <= left {
                self.map.remove(&loc);
                left -= &avail;
                taken.push((loc, avail));
            } else {
                *self.map.get_mut(&loc).expect("slot present") -= &left;
                taken.push((loc, left.clone()));
                left = Rat::zero();
            }
        }
        Ok(taken)
    }
}

/// The optimal directional coupling of two discrete marginals with equal
/// total mass. O(k log k) in the number of emitted points.
pub fn couple(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<Coupling> {
    let (tm, tn) = (mu.total_mass(), nu.total_mass());
    if tm != tn {
        return Err(Error::MassMismatch {
            mu: tm.to_string(),
            nu: tn.to_string(),
        });
    }
    let mut pool = AvailabilityPool::new(nu);
    let mut points = Vec::with_capacity(mu.len() + nu.len());
    for (x, m) in mu.atoms().iter().rev() {
        for (y, dm) in pool.take_at_least(x, m)? {
            points.push((x.clone(), y, dm));
        }
    }
    Coupling::from_rat_points(points)
}

/// Second marginal of P restricted to origins in (x, ∞), or [x, ∞) when
/// `open_end` is false. ±∞ inputs give the empty measure / the full second
/// marginal as appropriate.
pub fn image_of_tail(p: &Coupling, x: f64, open_end: bool) -> DiscreteMeasure {
    if x == f64::NEG_INFINITY {
        return p.nu_marginal().clone();
    }
    if x == f64::INFINITY || x.is_nan() {
        return DiscreteMeasure::zero();
    }
    let xr = rat_from_f64(x).expect("finite");
    let atoms = p
        .points()
        .iter()
        .filter(|(px, _, _)| if open_end { *px > xr } else { *px >= xr })
        .map(|(_, y, m)| (y.clone(), m.clone()))
        .collect();
    DiscreteMeasure::from_rat_atoms(atoms).expect("restriction of coupling rows is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::identity;
    use crate::measure::shadow;
    use crate::rat::{rat, rat_int};

    fn d(atoms: &[(i64, (i64, i64))]) -> DiscreteMeasure {
        DiscreteMeasure::from_rat_atoms(
            atoms
                .iter()
                .map(|&(x, (n, m))| (rat_int(x), rat(n, m)))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn crossing_is_undone() {
        let p = couple(&d(&[(0, (1, 2)), (1, (1, 2))]), &d(&[(1, (1, 2)), (2, (1, 2))]))
            .unwrap();
        let want = Coupling::from_points(vec![
            (0.0, 2.0, rat(1, 2)),
            (1.0, 1.0, rat(1, 2)),
        ])
        .unwrap();
        assert_eq!(p, want);
    }

    #[test]
    fn single_atoms() {
        let p = couple(
            &DiscreteMeasure::single(0.0, rat_int(1)).unwrap(),
            &DiscreteMeasure::single(1.0, rat_int(1)).unwrap(),
        )
        .unwrap();
        assert_eq!(
            p,
            Coupling::from_points(vec![(0.0, 1.0, rat_int(1))]).unwrap()
        );
    }

    #[test]
    fn four_point_instance() {
        let mu = d(&[(0, (1, 4)), (1, (1, 4)), (2, (1, 4)), (3, (1, 4))]);
        let nu = d(&[(1, (1, 2)), (2, (1, 4)), (4, (1, 4))]);
        let p = couple(&mu, &nu).unwrap();
        let want = Coupling::from_points(vec![
            (3.0, 4.0, rat(1, 4)),
            (2.0, 2.0, rat(1, 4)),
            (1.0, 1.0, rat(1, 4)),
            (0.0, 1.0, rat(1, 4)),
        ])
        .unwrap();
        assert_eq!(p, want);
    }

    #[test]
    fn mass_splitting_across_destinations() {
        let mu = d(&[(0, (1, 3)), (1, (2, 3))]);
        let nu = d(&[(1, (1, 2)), (3, (1, 2))]);
        let p = couple(&mu, &nu).unwrap();
        // the atom at 1 drains the slot at 1 and overflows into 3
        let want = Coupling::from_points(vec![
            (0.0, 3.0, rat(1, 3)),
            (1.0, 1.0, rat(1, 2)),
            (1.0, 3.0, rat(1, 6)),
        ])
        .unwrap();
        assert_eq!(p, want);
    }

    #[test]
    fn dominance_failure_names_origin() {
        let mu = d(&[(0, (1, 3)), (2, (2, 3))]);
        let nu = d(&[(1, (1, 2)), (3, (1, 2))]);
        match couple(&mu, &nu) {
            Err(Error::Dominance { location }) => assert_eq!(location, 2.0),
            other => panic!("expected dominance failure, got {other:?}"),
        }
    }

    #[test]
    fn self_coupling_is_identity() {
        let mu = d(&[(0, (1, 4)), (1, (1, 2)), (5, (1, 4))]);
        assert_eq!(couple(&mu, &mu).unwrap(), identity(&mu));
    }

    #[test]
    fn greedy_output_has_no_improvable_pair() {
        let mu = d(&[(0, (1, 8)), (1, (3, 8)), (2, (1, 2))]);
        let nu = d(&[(1, (1, 4)), (2, (1, 4)), (3, (1, 2))]);
        let p = couple(&mu, &nu).unwrap();
        assert!(p.is_directional());
        assert_eq!(p.find_improvable_pair().unwrap(), None);
        assert_eq!(p.mu_marginal(), &mu);
        assert_eq!(p.nu_marginal(), &nu);
    }

    #[test]
    fn tail_images() {
        let p = couple(&d(&[(0, (1, 2)), (1, (1, 2))]), &d(&[(1, (1, 2)), (2, (1, 2))]))
            .unwrap();
        assert_eq!(image_of_tail(&p, 0.5, true), d(&[(1, (1, 2))]));
        assert_eq!(image_of_tail(&p, f64::NEG_INFINITY, true), *p.nu_marginal());
        assert!(image_of_tail(&p, f64::INFINITY, true).is_empty());
        // closed vs open at an atom
        assert_eq!(image_of_tail(&p, 1.0, false), d(&[(1, (1, 2))]));
        assert!(image_of_tail(&p, 1.0, true).is_empty());
    }

    #[test]
    fn tail_image_equals_shadow_of_tail() {
        let mu = d(&[(0, (1, 8)), (1, (3, 8)), (2, (1, 2))]);
        let nu = d(&[(1, (1, 4)), (2, (1, 4)), (3, (1, 2))]);
        let p = couple(&mu, &nu).unwrap();
        for (x, _) in mu.atoms() {
            let tail = mu.restrict_rat(Bound::Excluded(x), Bound::Unbounded);
            let via_shadow = if tail.is_empty() {
                DiscreteMeasure::zero()
            } else {
                shadow(&tail, &nu).unwrap().shadow
            };
            assert_eq!(image_of_tail(&p, rat_to_f64(x), true), via_shadow);
        }
    }
}
