use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of symbols of the full shift; symbols are `0..p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Alphabet(usize);

impl Alphabet {
    pub fn new(p: usize) -> Result<Self> {
        if p < 2 || p > u8::MAX as usize + 1 {
            return Err(Error::Alphabet(p));
        }
        Ok(Alphabet(p))
    }

    pub fn size(self) -> usize {
        self.0
    }

    pub fn check(self, symbol: u8) -> Result<()> {
        if (symbol as usize) < self.0 {
            Ok(())
        } else {
            Err(Error::Symbol { symbol, p: self.0 })
        }
    }
}

impl TryFrom<usize> for Alphabet {
    type Error = Error;
    fn try_from(p: usize) -> Result<Self> {
        Alphabet::new(p)
    }
}

impl From<Alphabet> for usize {
    fn from(a: Alphabet) -> usize {
        a.0
    }
}

/// A finite window `ω_{-k} … ω_l` of a two-sided sequence.
///
/// Coordinates are signed; `symbols[0]` sits at index `-k`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TwoSidedWord {
    alphabet: Alphabet,
    left: usize,
    right: usize,
    symbols: Vec<u8>,
}

impl TwoSidedWord {
    /// Builds the word occupying indices `-left ..= right`.
    pub fn new(alphabet: Alphabet, left: usize, right: usize, symbols: Vec<u8>) -> Result<Self> {
        if symbols.len() != left + right + 1 {
            return Err(Error::Model(format!("word of {} symbols cannot span -{left}..{right}", symbols.len())));
        }
        for &s in &symbols {
            alphabet.check(s)?;
        }
        Ok(TwoSidedWord { alphabet, left, right, symbols })
    }

    /// Word of odd length `2n + 1` centred at the origin.
    pub fn centered(alphabet: Alphabet, symbols: Vec<u8>) -> Result<Self> {
        if symbols.len().is_multiple_of(2) {
            return Err(Error::Model("centred word needs odd length".into()));
        }
        let n = symbols.len() / 2;
        TwoSidedWord::new(alphabet, n, n, symbols)
    }

    pub(crate) fn from_parts_unchecked(alphabet: Alphabet, left: usize, right: usize, symbols: Vec<u8>) -> Self {
        debug_assert_eq!(symbols.len(), left + right + 1);
        TwoSidedWord { alphabet, left, right, symbols }
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn left_extent(&self) -> usize {
        self.left
    }

    pub fn right_extent(&self) -> usize {
        self.right
    }

    /// Largest `n` such that the word covers `-n..=n`.
    pub fn extent(&self) -> usize {
        self.left.min(self.right)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    /// Symbol at signed coordinate `i`, if covered.
    pub fn get(&self, i: isize) -> Option<u8> {
        let j = i + self.left as isize;
        if j < 0 {
            return None;
        }
        self.symbols.get(j as usize).copied()
    }

    pub fn covers(&self, k: usize, l: usize) -> bool {
        k <= self.left && l <= self.right
    }

    /// Contiguous symbols on `-k..=l`.
    pub fn block(&self, k: usize, l: usize) -> Result<&[u8]> {
        if !self.covers(k, l) {
            return Err(Error::Extent { have: self.extent(), need: k.max(l) });
        }
        let start = self.left - k;
        Ok(&self.symbols[start..start + k + l + 1])
    }

    /// The sub-word on `-k..=l`.
    pub fn window(&self, k: usize, l: usize) -> Result<TwoSidedWord> {
        let block = self.block(k, l)?.to_vec();
        Ok(TwoSidedWord::from_parts_unchecked(self.alphabet, k, l, block))
    }

    /// The symmetric window `C_n`, i.e. coordinates `-n..=n`.
    pub fn central(&self, n: usize) -> Result<TwoSidedWord> {
        self.window(n, n)
    }
}

impl fmt::Debug for TwoSidedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TwoSidedWord[-{}..{}](", self.left, self.right)?;
        for (j, s) in self.symbols.iter().enumerate() {
            if j == self.left {
                write!(f, "|{s}|")?;
            } else {
                write!(f, "{s}")?;
            }
        }
        write!(f, ")")
    }
}
