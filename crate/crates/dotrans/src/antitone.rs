//! Peeling the optimal directional coupling into antitone pieces. Each
//! round takes the running-minimum envelope of F around its leftmost
//! maximum; the envelope is unimodal, its rises and falls are the marginals
//! of one antitone layer, and the residual F minus the envelope has fewer
//! local maxima, so piecewise-linear inputs finish in finitely many rounds.

use crate::measure::Measure;
use crate::rat::{rat_from_f64, rat_to_f64, Rat};
use crate::transport::{j_transform, pull_back_pieces, KernelCoupling, SignedPlFunction};
use crate::{Error, Result};
use num_traits::Zero;

/// One round of the peeling: the unimodal envelope, where it peaks, and the
/// antitone coupling of its rises onto its falls.
#[derive(Debug, Clone)]
pub struct PeelLayer {
    pub layer_f: SignedPlFunction,
    pub peak: Rat,
    pub coupling: KernelCoupling,
}

impl SignedPlFunction {
    /// Sum of absolute breakpoint increments.
    pub fn total_variation(&self) -> Rat {
        self.points()
            .windows(2)
            .map(|w| {
                let d = &w[1].1 - &w[0].1;
                if d < Rat::zero() {
                    -d
                } else {
                    d
                }
            })
            .sum()
    }

    /// True when the breakpoint values rise to a single crest and fall
    /// after it. The zero function counts as unimodal.
    pub fn is_unimodal(&self) -> bool {
        let mut rising = true;
        for w in self.points().windows(2) {
            if w[1].1 > w[0].1 {
                if !rising {
                    return false;
                }
            } else if w[1].1 < w[0].1 {
                rising = false;
            }
        }
        true
    }

    /// Largest value attained, zero for the zero function.
    pub fn max_value(&self) -> Rat {
        self.points()
            .iter()
            .map(|(_, v)| v.clone())
            .max()
            .unwrap_or_else(Rat::zero)
    }
}

/// The leftmost location where f attains its maximum.
fn leftmost_peak(f: &SignedPlFunction) -> (usize, Rat) {
    let max = f.max_value();
    let idx = f
        .points()
        .iter()
        .position(|(_, v)| *v == max)
        .expect("nonzero function attains its maximum");
    (idx, f.points()[idx].0.clone())
}

/// Running-minimum envelope of f outward from the peak index: at x left of
/// the peak the envelope is min f over [x, peak], right of it min f over
/// [peak, x]. The result is unimodal and sits below f.
fn envelope(f: &SignedPlFunction, peak_idx: usize) -> SignedPlFunction {
    let pts = f.points();
    let mut out: Vec<(Rat, Rat)> = vec![pts[peak_idx].clone()];
    let mut r = pts[peak_idx].1.clone();
    for i in (0..peak_idx).rev() {
        if r.is_zero() {
            break;
        }
        let (a, fa) = &pts[i];
        let (b, fb) = &pts[i + 1];
        // walking left: the envelope follows f only while f rises toward
        // the peak below the running level; the crossing point anchors the
        // plateau and degenerates to the segment end when f starts at r
        if fb > fa && fa < &r {
            let x = a + (&r - fa) * (b - a) / (fb - fa);
            out.push((x, r.clone()));
            out.push((a.clone(), fa.clone()));
            r = fa.clone();
        }
    }
    out.reverse();
    let mut r = pts[peak_idx].1.clone();
    for i in peak_idx + 1..pts.len() {
        if r.is_zero() {
            break;
        }
        let (a, fa) = &pts[i - 1];
        let (b, fb) = &pts[i];
        if fa > fb && fb < &r {
            let x = a + (&r - fa) * (b - a) / (fb - fa);
            out.push((x, r.clone()));
            out.push((b.clone(), fb.clone()));
            r = fb.clone();
        }
    }
    SignedPlFunction::from_breakpoints(out)
}

fn subtract(f: &SignedPlFunction, g: &SignedPlFunction) -> SignedPlFunction {
    let mut xs: Vec<Rat> = f.points().iter().map(|p| p.0.clone()).collect();
    xs.extend(g.points().iter().map(|p| p.0.clone()));
    xs.sort();
    xs.dedup();
    let pts = xs
        .into_iter()
        .map(|x| {
            let v = f.eval_rat(&x) - g.eval_rat(&x);
            (x, v)
        })
        .collect();
    SignedPlFunction::from_breakpoints(pts)
}

/// Peel f into unimodal envelope layers. Stops once the residual maximum
/// drops to tol (zero for exact termination) or after max_layers rounds,
/// whichever comes first; a truncated tail is simply not returned.
pub fn peel(f: &SignedPlFunction, max_layers: usize, tol: f64) -> Result<Vec<PeelLayer>> {
    let tol_rat = rat_from_f64(tol.max(0.0)).unwrap_or_else(Rat::zero);
    let mut layers = Vec::new();
    let mut cur = f.clone();
    while layers.len() < max_layers {
        if cur.is_zero() || cur.max_value() <= tol_rat {
            break;
        }
        let (peak_idx, peak) = leftmost_peak(&cur);
        let layer_f = envelope(&cur, peak_idx);
        let pieces = layer_f.sweep();
        let coupling = KernelCoupling::from_rows(
            Measure::Discrete(crate::measure::DiscreteMeasure::zero()),
            pieces,
            Vec::new(),
        )?;
        cur = subtract(&cur, &layer_f);
        layers.push(PeelLayer {
            layer_f,
            peak,
            coupling,
        });
    }
    Ok(layers)
}

/// The optimal directional coupling written as identity on the common part
/// plus finitely many antitone layers.
#[derive(Debug, Clone)]
pub struct Decomposition {
    identity: Measure,
    layers: Vec<PeelLayer>,
    mu: Measure,
    nu: Measure,
}

impl Decomposition {
    pub fn identity_part(&self) -> &Measure {
        &self.identity
    }

    pub fn layers(&self) -> &[PeelLayer] {
        &self.layers
    }

    pub fn mu(&self) -> &Measure {
        &self.mu
    }

    pub fn nu(&self) -> &Measure {
        &self.nu
    }

    /// Joint cdf of the reassembled coupling: identity part plus the sum of
    /// the layer couplings.
    pub fn cdf_rat(&self, x: &Rat, y: &Rat) -> Rat {
        let m = if x <= y { x } else { y };
        let mut total = self.identity.cdf_rat(m);
        for layer in &self.layers {
            total += layer.coupling.cdf_rat(x, y);
        }
        total
    }

    pub fn cdf(&self, x: f64, y: f64) -> f64 {
        match (rat_from_f64(x), rat_from_f64(y)) {
            (Some(a), Some(b)) => rat_to_f64(&self.cdf_rat(&a, &b)),
            _ => f64::NAN,
        }
    }
}

/// Decompose the optimal directional coupling of a dominant pair into
/// identity plus antitone layers, peeling on the atom-free reduction and
/// pulling each layer back. Errors with [`Error::LayerCap`] if the peeling
/// does not finish within max_layers rounds.
pub fn decompose(mu: &Measure, nu: &Measure, max_layers: usize) -> Result<Decomposition> {
    let common = mu.common_part(nu);
    let mu1 = mu.subtract(&common)?;
    let nu1 = nu.subtract(&common)?;
    let red = j_transform(&mu1, &nu1)?;
    let f = SignedPlFunction::difference(&red.mu_t, &red.nu_t)?;
    let raw = peel(&f, max_layers, 0.0)?;
    let peeled: Rat = raw.iter().map(|l| l.layer_f.total_variation()).sum();
    if peeled != f.total_variation() {
        return Err(Error::LayerCap { cap: max_layers });
    }
    let mut layers = Vec::with_capacity(raw.len());
    for layer in raw {
        let pieces = layer.layer_f.sweep();
        let (segments, atom_rows) = pull_back_pieces(&pieces, &red)?;
        let coupling = KernelCoupling::from_rows(
            Measure::Discrete(crate::measure::DiscreteMeasure::zero()),
            segments,
            atom_rows,
        )?;
        layers.push(PeelLayer {
            layer_f: layer.layer_f,
            peak: layer.peak,
            coupling,
        });
    }
    Ok(Decomposition {
        identity: common,
        layers,
        mu: mu.clone(),
        nu: nu.clone(),
    })
}
