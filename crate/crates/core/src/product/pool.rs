use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::shift::{sample_words, Alphabet, MeasureModel, TwoSidedWord};

/// Upper bound on the number of words an exhaustive pool may enumerate.
pub const MAX_EXHAUSTIVE_WORDS: usize = 1 << 23;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoolMode {
    /// Monte-Carlo words with equal weights.
    Sampled,
    /// Every positive-measure word of the given extent, weighted by its measure.
    Exhaustive,
}

/// A finite weighted family of two-sided words of common extent `E`
/// (coordinates `-E..=E`), stored contiguously.
///
/// All Γ-set and rectangle computations refer to members by index.
#[derive(Clone, Debug)]
pub struct WordPool {
    alphabet: Alphabet,
    extent: usize,
    symbols: Vec<u8>,
    weights: Vec<f64>,
    mode: PoolMode,
}

impl WordPool {
    /// `count` words sampled from `model`, each with weight `1/count`.
    pub fn sampled(model: &MeasureModel, seed: u64, count: usize, extent: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::param("count", "need at least one sample"));
        }
        let words = sample_words(model, seed, count, extent);
        let mut pool = Self::from_words(&words, None)?;
        pool.mode = PoolMode::Sampled;
        Ok(pool)
    }

    /// All words of extent `extent` with positive measure under `model`.
    pub fn exhaustive(model: &MeasureModel, extent: usize) -> Result<Self> {
        let p = model.alphabet().size();
        let len = 2 * extent + 1;
        let total =
            (p as u128).checked_pow(len as u32).filter(|&t| t <= MAX_EXHAUSTIVE_WORDS as u128).ok_or_else(|| {
                Error::param("extent", format!("{p}^{len} words exceed the exhaustive limit of {MAX_EXHAUSTIVE_WORDS}"))
            })? as usize;
        let decode = |mut code: usize| {
            let mut w = vec![0u8; len];
            for s in w.iter_mut().rev() {
                *s = (code % p) as u8;
                code /= p;
            }
            w
        };
        let weights = par::map_range(total, |code| model.block_measure(&decode(code)));
        let mut symbols = Vec::new();
        let mut kept = Vec::new();
        for (code, w) in weights.into_iter().enumerate() {
            if w > 0.0 {
                symbols.extend(decode(code));
                kept.push(w);
            }
        }
        Ok(WordPool { alphabet: model.alphabet(), extent, symbols, weights: kept, mode: PoolMode::Exhaustive })
    }

    /// Pool over explicit words, trimmed to their common symmetric extent.
    /// Weights default to uniform and are normalised to sum to 1.
    pub fn from_words(words: &[TwoSidedWord], weights: Option<Vec<f64>>) -> Result<Self> {
        let first = words.first().ok_or_else(|| Error::param("words", "need at least one word"))?;
        let alphabet = first.alphabet();
        let extent = words.iter().map(TwoSidedWord::extent).min().unwrap_or(0);
        let mut symbols = Vec::with_capacity(words.len() * (2 * extent + 1));
        for w in words {
            if w.alphabet() != alphabet {
                return Err(Error::AlphabetMismatch(alphabet.size(), w.alphabet().size()));
            }
            symbols.extend_from_slice(w.block(extent, extent)?);
        }
        let weights = match weights {
            None => vec![1.0 / words.len() as f64; words.len()],
            Some(w) => {
                if w.len() != words.len() || w.iter().any(|&x| !(x >= 0.0)) {
                    return Err(Error::param("weights", "need one nonnegative weight per word"));
                }
                let s: f64 = w.iter().sum();
                if !(s > 0.0) {
                    return Err(Error::param("weights", "weights sum to zero"));
                }
                w.iter().map(|x| x / s).collect()
            }
        };
        Ok(WordPool { alphabet, extent, symbols, weights, mode: PoolMode::Sampled })
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn extent(&self) -> usize {
        self.extent
    }

    pub fn mode(&self) -> PoolMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn stride(&self) -> usize {
        2 * self.extent + 1
    }

    /// Coordinates `-k..=l` of member `i`. Panics outside the extent.
    pub fn block(&self, i: usize, k: usize, l: usize) -> &[u8] {
        assert!(k <= self.extent && l <= self.extent, "window -{k}..={l} exceeds pool extent {}", self.extent);
        let c = i * self.stride() + self.extent;
        &self.symbols[c - k..=c + l]
    }

    pub fn word(&self, i: usize) -> TwoSidedWord {
        TwoSidedWord::from_parts_unchecked(
            self.alphabet,
            self.extent,
            self.extent,
            self.block(i, self.extent, self.extent).to_vec(),
        )
    }

    pub(crate) fn require_extent(&self, need: usize) -> Result<()> {
        if need > self.extent {
            return Err(Error::Extent { have: self.extent, need });
        }
        Ok(())
    }
}
