//! Optimal directional couplings of scalar distributions.
//!
//! Given marginals μ and ν on the real line with μ below ν in first-order
//! stochastic dominance, exactly one coupling of (X, Y) ~ (μ, ν) is supported
//! on {y ≥ x} and minimal in the concordance order; it simultaneously
//! maximizes every submodular reward and minimizes every supermodular one.
//! This crate constructs that coupling exactly:
//!
//! * [`greedy`] builds it for discrete marginals by a right-to-left greedy
//!   pass with exact rational mass splitting.
//! * [`cdf`] evaluates its joint cdf in closed form and the pointwise
//!   lower/upper cdf bounds it is sandwiched between.
//! * [`transport`] derives the transport map for atomless marginals from the
//!   first-exit rule on the hypograph of Fμ − Fν, decides when the coupling
//!   is of Monge type, and reduces atomic marginals to atomless ones.
//! * [`antitone`] peels the coupling into finitely many antitone layers.
//! * [`cone`] generalizes the constraint to Y ≥ X + D(X).
//! * [`oracle`] certifies all of the above on small instances by exhaustive
//!   enumeration and an exact rational simplex.
//! * [`cli`] exposes the whole surface as subcommands; the `dotrans` binary
//!   is a thin wrapper around it.
//!
//! Masses are exact rationals end to end; coordinates enter as floats and are
//! carried as exact rationals internally, so every construction and every
//! comparison in this crate is exact. See `examples/` for one runnable
//! program per capability.

#![forbid(unsafe_code)]

pub mod antitone;
pub mod cdf;
pub mod cli;
pub mod cone;
pub mod coupling;
pub mod greedy;
pub mod io;
pub mod measure;
pub mod oracle;
pub mod rat;
pub mod transport;
pub mod verify;

pub use antitone::{decompose, peel, Decomposition, PeelLayer};
pub use cdf::MarginalPair;
pub use cone::{couple_cone, ConeConstraint};
pub use coupling::{CostFn, Coupling, MonotoneMap};
pub use greedy::couple;
pub use measure::{DiscreteMeasure, Measure, PlMeasure, ShadowResult};
pub use rat::Rat;
pub use transport::{
    couple_general, j_transform, monge_couple, variance_bounds, EffectBounds, KernelCoupling,
    SignedPlFunction,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("total masses differ: {mu} vs {nu}")]
    MassMismatch { mu: String, nu: String },

    #[error("dominance fails: no destination mass at or above {location}")]
    Dominance { location: f64 },

    #[error("quantile level {level} outside (0, {total}]")]
    QuantileRange { level: f64, total: f64 },

    #[error("subtrahend exceeds the measure near {location}")]
    NotSubmeasure { location: f64 },

    #[error("marginals share a nonzero common part; split it off first")]
    CommonPartNonzero,

    #[error("coupling is not directional: point ({x}, {y}) has y < x")]
    NotDirectional { x: f64, y: f64 },

    #[error("map is not strictly increasing near {location}")]
    NotIncreasing { location: f64 },

    #[error("first marginal keeps atoms after splitting off the common part; no single-valued map exists")]
    AtomicSource,

    #[error("instance too large for brute force: {size} > {cap}")]
    TooLarge { size: usize, cap: usize },

    #[error("cost is not finite at ({x}, {y})")]
    NonFiniteCost { x: f64, y: f64 },

    #[error("displacement slope must stay above -1; found {slope} at {location}")]
    Displacement { slope: f64, location: f64 },

    #[error("layer cap {cap} exceeded before the difference profile was exhausted")]
    LayerCap { cap: usize },

    #[error("linear program is infeasible")]
    LpInfeasible,

    #[error("{0}")]
    Parse(String),

    #[error("{0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
