//! The full shift `Σ_p`, its symbolic metric and computable invariant measures.

mod file;
mod metric;
mod model;
mod sample;
mod word;

use serde::{Deserialize, Serialize};

pub use file::{parse_model, render_model};
pub(crate) use metric::check_beta;
pub use metric::{d_beta, SymbolicMetricParams};
pub use model::{stationary_distribution, Bernoulli, Factor, Markov, MeasureModel, Mixture, LOG_SPACE_THRESHOLD};
pub use sample::{sample_word, sample_word_labeled, sample_words, smb_estimate, stream_seed, SmbEstimate};
pub use word::{Alphabet, TwoSidedWord};

use crate::error::{Error, Result};

/// Kolmogorov–Sinai entropy in nats.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct EntropyValue(f64);

impl EntropyValue {
    pub fn new(h: f64) -> Result<Self> {
        if !(h.is_finite() && h >= 0.0) {
            return Err(Error::param("entropy", format!("{h} is not a nonnegative real")));
        }
        Ok(EntropyValue(h))
    }

    pub fn nats(self) -> f64 {
        self.0
    }

    /// Entropy measured in units of `log β`.
    pub fn in_base(self, beta: f64) -> f64 {
        self.0 / beta.ln()
    }
}

/// Closed-form entropy; mixtures report the weighted average over their
/// ergodic components.
pub fn entropy(model: &MeasureModel) -> Result<EntropyValue> {
    let h = match model {
        MeasureModel::Bernoulli(b) => b.entropy(),
        MeasureModel::Markov(m) => m.entropy(),
        MeasureModel::Factor(_) => return Err(Error::NoClosedForm("hidden-Markov factor")),
        MeasureModel::Mixture(mix) => {
            let mut h = 0.0;
            for (w, c) in mix.components() {
                h += w * entropy(c)?.nats();
            }
            h
        }
    };
    // Rounding can leave tiny negatives for zero-entropy chains.
    EntropyValue::new(h.max(0.0))
}
