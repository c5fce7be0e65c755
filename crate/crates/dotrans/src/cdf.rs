//! Closed-form joint cdf of the optimal directional coupling, plus the
//! pointwise bounds it is sandwiched between and the unimodality test that
//! decides when the lower bound is attained.

use crate::measure::{dominance_violation, Measure};
use crate::rat::{rat_from_f64, rat_max, rat_min, rat_to_f64, Rat};
use crate::{Error, Result};
use num_traits::Zero;

/// A dominance-checked pair of marginals of the same kind, with the merged
/// breakpoint grid cached. All evaluations report values of the optimal
/// directional coupling without constructing it.
#[derive(Debug, Clone)]
pub struct MarginalPair {
    mu: Measure,
    nu: Measure,
    grid: Vec<Rat>,
}

impl MarginalPair {
    /// Requires equal total masses, first-order dominance of `nu` over `mu`,
    /// and marginals of the same kind (both discrete or both piecewise
    /// linear).
    pub fn new(mu: Measure, nu: Measure) -> Result<Self> {
        match (&mu, &nu) {
            (Measure::Discrete(_), Measure::Discrete(_)) | (Measure::Pl(_), Measure::Pl(_)) => {}
            _ => {
                return Err(Error::Unsupported(
                    "marginals must both be discrete or both piecewise linear".into(),
                ))
            }
        }
        if let Some(v) = dominance_violation(&mu, &nu)? {
            return Err(Error::Dominance {
                location: rat_to_f64(&v),
            });
        }
        let mut grid = mu.critical_locations();
        grid.extend(nu.critical_locations());
        grid.sort();
        grid.dedup();
        Ok(Self { mu, nu, grid })
    }

    pub fn mu(&self) -> &Measure {
        &self.mu
    }

    pub fn nu(&self) -> &Measure {
        &self.nu
    }

    /// Merged breakpoints of both marginal cdfs.
    pub fn grid(&self) -> &[Rat] {
        &self.grid
    }

    /// Fμ(z) − Fν(z).
    pub fn f_at(&self, z: &Rat) -> Rat {
        self.mu.cdf_rat(z) - self.nu.cdf_rat(z)
    }

    /// Left limit of Fμ − Fν at z.
    pub fn f_left_at(&self, z: &Rat) -> Rat {
        self.mu.cdf_left_rat(z) - self.nu.cdf_left_rat(z)
    }

    /// Exact infimum of Fμ − Fν over the closed interval [x, y]. The
    /// function is piecewise linear or piecewise constant with jumps, so the
    /// infimum is attained among the interval endpoints, the breakpoints
    /// inside, and left limits at breakpoints inside.
    fn inf_f_on(&self, x: &Rat, y: &Rat) -> Rat {
        debug_assert!(x <= y);
        let mut m = self.f_at(x);
        let fy = self.f_at(y);
        if fy < m {
            m = fy;
        }
        for b in &self.grid {
            if b > x && b <= y {
                let v = self.f_at(b);
                if v < m {
                    m = v;
                }
                let v = self.f_left_at(b);
                if v < m {
                    m = v;
                }
            }
        }
        m
    }

    /// Joint cdf of the optimal directional coupling at finite (x, y):
    /// Fν(y) when y ≤ x, otherwise Fμ(x) − inf over [x, y] of (Fμ − Fν).
    pub fn p_star_cdf_rat(&self, x: &Rat, y: &Rat) -> Rat {
        if y <= x {
            self.nu.cdf_rat(y)
        } else {
            self.mu.cdf_rat(x) - self.inf_f_on(x, y)
        }
    }

    /// Float wrapper of [`Self::p_star_cdf_rat`]; infinite coordinates take
    /// the corresponding marginal limits.
    pub fn p_star_cdf(&self, x: f64, y: f64) -> f64 {
        if x.is_nan() || y.is_nan() {
            return f64::NAN;
        }
        if y == f64::NEG_INFINITY {
            return 0.0;
        }
        if y <= x {
            // covers x = +∞ with finite y
            return if y == f64::INFINITY {
                rat_to_f64(&self.nu.total_mass())
            } else {
                rat_to_f64(&self.nu.cdf_rat(&rat_from_f64(y).expect("finite")))
            };
        }
        if x == f64::NEG_INFINITY {
            return 0.0;
        }
        let xr = rat_from_f64(x).expect("finite");
        if y == f64::INFINITY {
            // the infimum vanishes in the tail, leaving the margin
            return rat_to_f64(&self.mu.cdf_rat(&xr));
        }
        let yr = rat_from_f64(y).expect("finite");
        rat_to_f64(&self.p_star_cdf_rat(&xr, &yr))
    }

    /// Pointwise lower bound Fν(y) − [(Fμ(y) − Fμ(x)) ∧ (Fν(y) − Fν(x))]₊.
    pub fn bound_lower_rat(&self, x: &Rat, y: &Rat) -> Rat {
        let inc_mu = self.mu.cdf_rat(y) - self.mu.cdf_rat(x);
        let inc_nu = self.nu.cdf_rat(y) - self.nu.cdf_rat(x);
        let increment = rat_min(&inc_mu, &inc_nu);
        let zero = Rat::zero();
        self.nu.cdf_rat(y) - rat_max(increment, &zero).clone()
    }

    /// Pointwise upper bound Fμ(x) ∧ Fν(y), the comonotone cdf.
    pub fn bound_upper_rat(&self, x: &Rat, y: &Rat) -> Rat {
        let a = self.mu.cdf_rat(x);
        let b = self.nu.cdf_rat(y);
        rat_min(&a, &b).clone()
    }

    pub fn bound_lower(&self, x: f64, y: f64) -> f64 {
        if x.is_nan() || y.is_nan() {
            return f64::NAN;
        }
        let inc_mu = self.cdf_limit(&self.mu, y) - self.cdf_limit(&self.mu, x);
        let inc_nu = self.cdf_limit(&self.nu, y) - self.cdf_limit(&self.nu, x);
        let increment = rat_min(&inc_mu, &inc_nu);
        let zero = Rat::zero();
        rat_to_f64(&(self.cdf_limit(&self.nu, y) - rat_max(increment, &zero).clone()))
    }

    pub fn bound_upper(&self, x: f64, y: f64) -> f64 {
        if x.is_nan() || y.is_nan() {
            return f64::NAN;
        }
        let a = self.cdf_limit(&self.mu, x);
        let b = self.cdf_limit(&self.nu, y);
        rat_to_f64(rat_min(&a, &b))
    }

    fn cdf_limit(&self, m: &Measure, v: f64) -> Rat {
        if v == f64::INFINITY {
            m.total_mass()
        } else if v == f64::NEG_INFINITY {
            Rat::zero()
        } else {
            m.cdf_rat(&rat_from_f64(v).expect("finite"))
        }
    }

    /// True iff Fμ − Fν rises to a single peak and then falls, scanned over
    /// the refined grid with left limits. Zero boundary values are implied
    /// by the equal total masses.
    pub fn is_unimodal(&self) -> bool {
        let mut values = vec![Rat::zero()];
        for b in &self.grid {
            values.push(self.f_left_at(b));
            values.push(self.f_at(b));
        }
        values.push(Rat::zero());
        let mut rising = true;
        for w in values.windows(2) {
            if w[1] > w[0] {
                if !rising {
                    return false;
                }
            } else if w[1] < w[0] {
                rising = false;
            }
        }
        true
    }
}
