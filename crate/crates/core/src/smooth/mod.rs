//! Piecewise-linear hyperbolic maps: generalised baker maps and toral
//! automorphisms, their Lyapunov exponents, the surface dimension formula
//! and orbit-based dimension checks.

mod exact;
mod export;
mod lyapunov;
mod maps;

pub use exact::{verify_exact_dimension, ExactDimensionReport, REFERENCE_POINTS};
pub use export::{read_orbit, write_orbit, OrbitHeader};
pub use lyapunov::{lyapunov, young_formula, LyapunovEstimate, LyapunovMethod, MIN_QR_STEPS};
pub use maps::{iterate, BakerParams, SmoothMap, TorusAutParams, BURN_IN, TORUS_BITS};
