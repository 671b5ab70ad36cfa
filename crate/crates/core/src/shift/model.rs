use super::word::{Alphabet, TwoSidedWord};
use crate::error::{Error, Result};

/// Products with more factors than this are accumulated in log space.
pub const LOG_SPACE_THRESHOLD: usize = 30;

const SUM_TOL: f64 = 1e-12;
const STATIONARY_TOL: f64 = 1e-10;

fn check_probability_vector(v: &[f64], what: &str) -> Result<()> {
    if v.iter().any(|&x| !(x.is_finite() && x >= 0.0)) {
        return Err(Error::Model(format!("{what} has a negative or non-finite entry")));
    }
    let s: f64 = v.iter().sum();
    if (s - 1.0).abs() > SUM_TOL {
        return Err(Error::Model(format!("{what} sums to {s}, not 1")));
    }
    Ok(())
}

fn ln(x: f64) -> f64 {
    if x > 0.0 {
        x.ln()
    } else {
        f64::NEG_INFINITY
    }
}

pub(crate) fn log_sum_exp(terms: impl IntoIterator<Item = f64>) -> f64 {
    let terms: Vec<f64> = terms.into_iter().collect();
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// I.i.d. symbols with distribution `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct Bernoulli {
    alphabet: Alphabet,
    probs: Vec<f64>,
    log_probs: Vec<f64>,
}

impl Bernoulli {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        let alphabet = Alphabet::new(probs.len())?;
        check_probability_vector(&probs, "probability vector")?;
        let log_probs = probs.iter().map(|&q| ln(q)).collect();
        Ok(Bernoulli { alphabet, probs, log_probs })
    }

    pub fn uniform(p: usize) -> Result<Self> {
        Bernoulli::new(vec![1.0 / p as f64; p])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    fn measure(&self, block: &[u8]) -> f64 {
        if block.len() > LOG_SPACE_THRESHOLD {
            return self.log_measure(block).exp();
        }
        block.iter().fold(1.0, |acc, &s| acc * self.probs[s as usize])
    }

    fn log_measure(&self, block: &[u8]) -> f64 {
        if block.len() <= LOG_SPACE_THRESHOLD {
            return ln(self.measure(block));
        }
        block.iter().map(|&s| self.log_probs[s as usize]).sum()
    }

    fn log_prefixes(&self, block: &[u8]) -> Vec<f64> {
        let mut acc = 0.0;
        block
            .iter()
            .map(|&s| {
                acc += self.log_probs[s as usize];
                acc
            })
            .collect()
    }

    pub fn entropy(&self) -> f64 {
        -self.probs.iter().filter(|&&q| q > 0.0).map(|&q| q * q.ln()).sum::<f64>()
    }
}

/// Stationary Markov chain with row-stochastic transition matrix `P`.
#[derive(Clone, Debug, PartialEq)]
pub struct Markov {
    alphabet: Alphabet,
    matrix: Vec<f64>,
    stationary: Vec<f64>,
    log_matrix: Vec<f64>,
    log_stationary: Vec<f64>,
}

impl Markov {
    pub fn new(matrix: Vec<Vec<f64>>, stationary: Vec<f64>) -> Result<Self> {
        let p = matrix.len();
        let alphabet = Alphabet::new(p)?;
        if matrix.iter().any(|row| row.len() != p) {
            return Err(Error::Model("transition matrix is not square".into()));
        }
        for (i, row) in matrix.iter().enumerate() {
            check_probability_vector(row, &format!("row {i} of the transition matrix"))?;
        }
        if stationary.len() != p {
            return Err(Error::Model("stationary vector has wrong length".into()));
        }
        check_probability_vector(&stationary, "stationary vector")?;
        for j in 0..p {
            let pj: f64 = (0..p).map(|i| stationary[i] * matrix[i][j]).sum();
            if (pj - stationary[j]).abs() > STATIONARY_TOL {
                return Err(Error::Model(format!(
                    "stationary vector fails πP = π at state {j} ({pj} vs {})",
                    stationary[j]
                )));
            }
        }
        let flat: Vec<f64> = matrix.into_iter().flatten().collect();
        let log_matrix = flat.iter().map(|&x| ln(x)).collect();
        let log_stationary = stationary.iter().map(|&x| ln(x)).collect();
        Ok(Markov { alphabet, matrix: flat, stationary, log_matrix, log_stationary })
    }

    /// Builds the chain, computing `π` by [`stationary_distribution`].
    pub fn with_computed_stationary(matrix: Vec<Vec<f64>>) -> Result<Self> {
        let pi = stationary_distribution(&matrix)?;
        Markov::new(matrix, pi)
    }

    pub fn size(&self) -> usize {
        self.alphabet.size()
    }

    pub fn transition(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.size() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.size();
        &self.matrix[i * p..(i + 1) * p]
    }

    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    pub fn matrix(&self) -> Vec<Vec<f64>> {
        (0..self.size()).map(|i| self.row(i).to_vec()).collect()
    }

    fn measure(&self, block: &[u8]) -> f64 {
        if block.len() > LOG_SPACE_THRESHOLD {
            return self.log_measure(block).exp();
        }
        let mut acc = self.stationary[block[0] as usize];
        for w in block.windows(2) {
            acc *= self.transition(w[0] as usize, w[1] as usize);
        }
        acc
    }

    fn log_measure(&self, block: &[u8]) -> f64 {
        if block.len() <= LOG_SPACE_THRESHOLD {
            return ln(self.measure(block));
        }
        let p = self.size();
        let mut acc = self.log_stationary[block[0] as usize];
        for w in block.windows(2) {
            acc += self.log_matrix[w[0] as usize * p + w[1] as usize];
        }
        acc
    }

    fn log_prefixes(&self, block: &[u8]) -> Vec<f64> {
        let p = self.size();
        let mut out = Vec::with_capacity(block.len());
        let mut acc = self.log_stationary[block[0] as usize];
        out.push(acc);
        for w in block.windows(2) {
            acc += self.log_matrix[w[0] as usize * p + w[1] as usize];
            out.push(acc);
        }
        out
    }

    pub fn entropy(&self) -> f64 {
        let p = self.size();
        let mut h = 0.0;
        for i in 0..p {
            for &pij in self.row(i) {
                if pij > 0.0 {
                    h -= self.stationary[i] * pij * pij.ln();
                }
            }
        }
        h
    }
}

/// Stationary vector of a row-stochastic matrix by power iteration of the lazy
/// chain `(I + P)/2`, which has the same invariant vector and is aperiodic.
pub fn stationary_distribution(matrix: &[Vec<f64>]) -> Result<Vec<f64>> {
    let p = matrix.len();
    if p == 0 || matrix.iter().any(|r| r.len() != p) {
        return Err(Error::Model("transition matrix is not square".into()));
    }
    let mut pi = vec![1.0 / p as f64; p];
    for _ in 0..1_000_000 {
        let mut next = vec![0.0; p];
        for i in 0..p {
            next[i] += 0.5 * pi[i];
            for j in 0..p {
                next[j] += 0.5 * pi[i] * matrix[i][j];
            }
        }
        let s: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= s);
        let delta: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        pi = next;
        if delta < 1e-15 {
            break;
        }
    }
    let residual =
        (0..p).map(|j| ((0..p).map(|i| pi[i] * matrix[i][j]).sum::<f64>() - pi[j]).abs()).fold(0.0, f64::max);
    if residual > 1e-12 {
        return Err(Error::Model(format!("power iteration did not converge (residual {residual:e})")));
    }
    Ok(pi)
}

/// Image of a stationary Markov chain under a sliding block code: the output
/// at position `i` is `code(x_i, …, x_{i+w−1})`.
#[derive(Clone, Debug, PartialEq)]
pub struct Factor {
    alphabet: Alphabet,
    hidden: Markov,
    width: usize,
    code: Vec<u8>,
    // Forward-recursion tables over states = the last max(w−1, 1) hidden symbols.
    states: usize,
    init: Vec<(f64, Option<u8>)>,
    trans: Vec<(usize, u8, f64)>,
}

impl Factor {
    /// `code[j]` is the output for the hidden `w`-block whose base-`q` digits,
    /// most significant first, spell `j` (`q` = hidden alphabet size).
    pub fn new(output: Alphabet, hidden: Markov, width: usize, code: Vec<u8>) -> Result<Self> {
        let q = hidden.size();
        if width == 0 {
            return Err(Error::Model("block code width must be positive".into()));
        }
        let blocks = q
            .checked_pow(width as u32)
            .filter(|&b| b <= 1 << 20)
            .ok_or_else(|| Error::Model("block code table too large".into()))?;
        if code.len() != blocks {
            return Err(Error::Model(format!("block code has {} entries, expected {blocks}", code.len())));
        }
        for &c in &code {
            output.check(c)?;
        }
        let memory = width.saturating_sub(1).max(1);
        let states = q.pow(memory as u32);
        let mut init = Vec::with_capacity(states);
        for s in 0..states {
            let digits = digits_of(s, q, memory);
            let mut prob = hidden.stationary()[digits[0]];
            for w in digits.windows(2) {
                prob *= hidden.transition(w[0], w[1]);
            }
            let out = if width == 1 { Some(code[s]) } else { None };
            init.push((prob, out));
        }
        let mut trans = Vec::with_capacity(states * q);
        for s in 0..states {
            let last = s % q;
            for c in 0..q {
                let block = if width == 1 { c } else { s * q + c };
                let next = (s * q + c) % states;
                trans.push((next, code[block], hidden.transition(last, c)));
            }
        }
        Ok(Factor { alphabet: output, hidden, width, code, states, init, trans })
    }

    pub fn hidden(&self) -> &Markov {
        &self.hidden
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn code(&self) -> &[u8] {
        &self.code
    }

    pub fn encode(&self, hidden: &[u8]) -> Vec<u8> {
        let q = self.hidden.size();
        hidden.windows(self.width).map(|w| self.code[w.iter().fold(0usize, |acc, &x| acc * q + x as usize)]).collect()
    }

    fn initial(&self, first: u8) -> (Vec<f64>, usize) {
        let mut alpha = vec![0.0; self.states];
        let consumed = if self.width == 1 { 1 } else { 0 };
        for (s, &(prob, out)) in self.init.iter().enumerate() {
            if out.is_none_or(|o| o == first) {
                alpha[s] = prob;
            }
        }
        (alpha, consumed)
    }

    fn step(&self, alpha: &[f64], symbol: u8) -> Vec<f64> {
        let q = self.hidden.size();
        let mut next = vec![0.0; self.states];
        for (s, &a) in alpha.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for &(to, out, prob) in &self.trans[s * q..(s + 1) * q] {
                if out == symbol {
                    next[to] += a * prob;
                }
            }
        }
        next
    }

    /// Forward recursion, rescaling at every step; returns `log μ` of every prefix.
    fn log_prefixes(&self, block: &[u8]) -> Vec<f64> {
        let (mut alpha, consumed) = self.initial(block[0]);
        let mut log_scale = 0.0;
        let mut out = Vec::with_capacity(block.len());
        if consumed == 1 {
            let s: f64 = alpha.iter().sum();
            out.push(ln(s));
        }
        for &y in &block[consumed..] {
            alpha = self.step(&alpha, y);
            let s: f64 = alpha.iter().sum();
            if s == 0.0 {
                out.resize(block.len(), f64::NEG_INFINITY);
                return out;
            }
            log_scale += s.ln();
            out.push(log_scale);
            alpha.iter_mut().for_each(|a| *a /= s);
        }
        out
    }

    fn measure(&self, block: &[u8]) -> f64 {
        if block.len() > LOG_SPACE_THRESHOLD {
            return self.log_measure(block).exp();
        }
        let (mut alpha, consumed) = self.initial(block[0]);
        for &y in &block[consumed..] {
            alpha = self.step(&alpha, y);
        }
        alpha.iter().sum()
    }

    fn log_measure(&self, block: &[u8]) -> f64 {
        if block.len() <= LOG_SPACE_THRESHOLD {
            return ln(self.measure(block));
        }
        *self.log_prefixes(block).last().expect("nonempty block")
    }
}

fn digits_of(mut x: usize, base: usize, len: usize) -> Vec<usize> {
    let mut d = vec![0; len];
    for slot in d.iter_mut().rev() {
        *slot = x % base;
        x /= base;
    }
    d
}

/// Finite convex combination of ergodic models on a common alphabet.
#[derive(Clone, Debug, PartialEq)]
pub struct Mixture {
    alphabet: Alphabet,
    components: Vec<(f64, MeasureModel)>,
}

impl Mixture {
    pub fn new(components: Vec<(f64, MeasureModel)>) -> Result<Self> {
        let first = components.first().ok_or_else(|| Error::Model("mixture needs a component".into()))?;
        let alphabet = first.1.alphabet();
        for (w, m) in &components {
            if !(w.is_finite() && *w >= 0.0) {
                return Err(Error::Model(format!("mixture weight {w} is invalid")));
            }
            if m.alphabet() != alphabet {
                return Err(Error::AlphabetMismatch(alphabet.size(), m.alphabet().size()));
            }
            if matches!(m, MeasureModel::Mixture(_)) {
                return Err(Error::Model("mixture components must be ergodic models".into()));
            }
        }
        let weights: Vec<f64> = components.iter().map(|c| c.0).collect();
        check_probability_vector(&weights, "mixture weights")?;
        Ok(Mixture { alphabet, components })
    }

    pub fn components(&self) -> &[(f64, MeasureModel)] {
        &self.components
    }
}

/// A computable shift-invariant probability measure on the full shift.
#[derive(Clone, Debug, PartialEq)]
pub enum MeasureModel {
    Bernoulli(Bernoulli),
    Markov(Markov),
    Factor(Factor),
    Mixture(Mixture),
}

impl From<Bernoulli> for MeasureModel {
    fn from(m: Bernoulli) -> Self {
        MeasureModel::Bernoulli(m)
    }
}

impl From<Markov> for MeasureModel {
    fn from(m: Markov) -> Self {
        MeasureModel::Markov(m)
    }
}

impl From<Factor> for MeasureModel {
    fn from(m: Factor) -> Self {
        MeasureModel::Factor(m)
    }
}

impl From<Mixture> for MeasureModel {
    fn from(m: Mixture) -> Self {
        MeasureModel::Mixture(m)
    }
}

impl MeasureModel {
    pub fn alphabet(&self) -> Alphabet {
        match self {
            MeasureModel::Bernoulli(m) => m.alphabet,
            MeasureModel::Markov(m) => m.alphabet,
            MeasureModel::Factor(m) => m.alphabet,
            MeasureModel::Mixture(m) => m.alphabet,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            MeasureModel::Bernoulli(_) => "bernoulli",
            MeasureModel::Markov(_) => "markov",
            MeasureModel::Factor(_) => "factor",
            MeasureModel::Mixture(_) => "mixture",
        }
    }

    /// Mixtures are the only non-ergodic variant (unless they have a single component).
    pub fn is_ergodic(&self) -> bool {
        match self {
            MeasureModel::Mixture(m) => m.components.len() == 1,
            _ => true,
        }
    }

    /// `μ` of the cylinder fixed by a contiguous block of symbols.
    ///
    /// Shift invariance makes the result independent of where the block sits.
    pub fn block_measure(&self, block: &[u8]) -> f64 {
        if block.is_empty() {
            return 1.0;
        }
        match self {
            MeasureModel::Bernoulli(m) => m.measure(block),
            MeasureModel::Markov(m) => m.measure(block),
            MeasureModel::Factor(m) => m.measure(block),
            MeasureModel::Mixture(m) => {
                if block.len() > LOG_SPACE_THRESHOLD {
                    self.block_log_measure(block).exp()
                } else {
                    m.components.iter().map(|(w, c)| w * c.block_measure(block)).sum()
                }
            }
        }
    }

    pub fn block_log_measure(&self, block: &[u8]) -> f64 {
        if block.is_empty() {
            return 0.0;
        }
        match self {
            MeasureModel::Bernoulli(m) => m.log_measure(block),
            MeasureModel::Markov(m) => m.log_measure(block),
            MeasureModel::Factor(m) => m.log_measure(block),
            MeasureModel::Mixture(m) => {
                if block.len() <= LOG_SPACE_THRESHOLD {
                    ln(self.block_measure(block))
                } else {
                    log_sum_exp(m.components.iter().map(|(w, c)| ln(*w) + c.block_log_measure(block)))
                }
            }
        }
    }

    /// `log μ(block[..=j])` for every `j`, in one left-to-right sweep.
    pub fn prefix_log_measures(&self, block: &[u8]) -> Vec<f64> {
        if block.is_empty() {
            return Vec::new();
        }
        match self {
            MeasureModel::Bernoulli(m) => m.log_prefixes(block),
            MeasureModel::Markov(m) => m.log_prefixes(block),
            MeasureModel::Factor(m) => m.log_prefixes(block),
            MeasureModel::Mixture(m) => {
                let per: Vec<Vec<f64>> = m.components.iter().map(|(_, c)| c.prefix_log_measures(block)).collect();
                (0..block.len())
                    .map(|j| log_sum_exp(m.components.iter().zip(&per).map(|((w, _), v)| ln(*w) + v[j])))
                    .collect()
            }
        }
    }

    fn check_word(&self, w: &TwoSidedWord) -> Result<()> {
        if w.alphabet() != self.alphabet() {
            return Err(Error::AlphabetMismatch(self.alphabet().size(), w.alphabet().size()));
        }
        Ok(())
    }

    /// Exact `μ` of the cylinder defined by `w`.
    pub fn cylinder_measure(&self, w: &TwoSidedWord) -> Result<f64> {
        self.check_word(w)?;
        Ok(self.block_measure(w.symbols()))
    }

    pub fn log_cylinder_measure(&self, w: &TwoSidedWord) -> Result<f64> {
        self.check_word(w)?;
        Ok(self.block_log_measure(w.symbols()))
    }

    /// `(μ(C_n^+), μ(C_n^-))` for a word spanning `-n..=n`: the measures of the
    /// future window `0..=n` and the past window `-n..=0`.
    pub fn one_sided_measures(&self, w: &TwoSidedWord) -> Result<(f64, f64)> {
        self.check_word(w)?;
        if w.left_extent() != w.right_extent() {
            return Err(Error::Asymmetric { left: w.left_extent(), right: w.right_extent() });
        }
        let n = w.extent();
        Ok((self.block_measure(w.block(0, n)?), self.block_measure(w.block(n, 0)?)))
    }

    pub fn log_one_sided_measures(&self, w: &TwoSidedWord) -> Result<(f64, f64)> {
        self.check_word(w)?;
        if w.left_extent() != w.right_extent() {
            return Err(Error::Asymmetric { left: w.left_extent(), right: w.right_extent() });
        }
        let n = w.extent();
        Ok((self.block_log_measure(w.block(0, n)?), self.block_log_measure(w.block(n, 0)?)))
    }
}
