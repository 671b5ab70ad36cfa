//! Dimension theory of hyperbolic invariant measures, made executable.
//!
//! The crate is organised around four layers:
//!
//! * [`shift`]: the full shift on `p` symbols, the symbolic metric, cylinder
//!   arithmetic for Bernoulli, Markov, hidden-Markov and mixture measures.
//! * [`estimate`]: log-log regression estimators for pointwise, one-sided,
//!   box-counting and information dimension, plus the cross-estimator
//!   coincidence check and the pointwise-dimension histogram.
//! * [`product`]: good sets, `Q_n` neighbourhoods, rectangle classes and the
//!   counting inequalities that control the deviation of a measure from a
//!   local product.
//! * [`smooth`]: piecewise-linear hyperbolic maps (generalised baker maps,
//!   hyperbolic toral automorphisms), their Lyapunov exponents and the
//!   surface dimension formula.
//!
//! Data-parallel loops go through [`par`], which uses rayon when the
//! `parallel` feature is enabled and plain iterators otherwise.

pub mod error;
pub mod estimate;
pub mod par;
pub mod product;
pub mod shift;
pub mod smooth;

pub use error::{Error, Result};
