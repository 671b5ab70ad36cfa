use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::model::{Markov, MeasureModel};
use super::word::TwoSidedWord;
use crate::error::{Error, Result};
use crate::par;

fn categorical<R: Rng>(rng: &mut R, probs: &[f64]) -> u8 {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &q) in probs.iter().enumerate() {
        if q > 0.0 {
            last_positive = i;
        }
        acc += q;
        if u < acc && q > 0.0 {
            return i as u8;
        }
    }
    // u landed in the rounding gap above the cumulative sum
    last_positive as u8
}

fn markov_path<R: Rng>(rng: &mut R, chain: &Markov, len: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(len);
    let mut state = categorical(rng, chain.stationary());
    out.push(state);
    for _ in 1..len {
        state = categorical(rng, chain.row(state as usize));
        out.push(state);
    }
    out
}

fn draw<R: Rng>(rng: &mut R, model: &MeasureModel, len: usize) -> (Vec<u8>, usize) {
    match model {
        MeasureModel::Bernoulli(b) => ((0..len).map(|_| categorical(rng, b.probs())).collect(), 0),
        MeasureModel::Markov(m) => (markov_path(rng, m, len), 0),
        MeasureModel::Factor(f) => {
            let hidden = markov_path(rng, f.hidden(), len + f.width() - 1);
            (f.encode(&hidden), 0)
        }
        MeasureModel::Mixture(mix) => {
            let weights: Vec<f64> = mix.components().iter().map(|c| c.0).collect();
            let c = categorical(rng, &weights) as usize;
            (draw(rng, &mix.components()[c].1, len).0, c)
        }
    }
}

/// Seed of the `index`-th stream derived from a base seed (SplitMix64 finaliser).
pub fn stream_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A word on `-n..=n` drawn from the model; deterministic in `seed`.
pub fn sample_word(model: &MeasureModel, seed: u64, n: usize) -> TwoSidedWord {
    sample_word_labeled(model, seed, n).0
}

/// Like [`sample_word`], also returning the mixture component that produced the
/// word (always 0 for ergodic models).
pub fn sample_word_labeled(model: &MeasureModel, seed: u64, n: usize) -> (TwoSidedWord, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (symbols, component) = draw(&mut rng, model, 2 * n + 1);
    (TwoSidedWord::from_parts_unchecked(model.alphabet(), n, n, symbols), component)
}

/// `count` independent words, the `i`-th drawn from stream `stream_seed(seed, i)`.
pub fn sample_words(model: &MeasureModel, seed: u64, count: usize, n: usize) -> Vec<TwoSidedWord> {
    par::map_range(count, |i| sample_word(model, stream_seed(seed, i as u64), n))
}

/// Empirical Shannon–McMillan–Breiman entropy at level `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct SmbEstimate {
    pub n: usize,
    pub mean: f64,
    /// `−log μ(C_n(ω)) / (2n + 1)` per sample, in sample order.
    pub per_sample: Vec<f64>,
}

pub fn smb_estimate(model: &MeasureModel, samples: &[TwoSidedWord], n: usize) -> Result<SmbEstimate> {
    if samples.is_empty() {
        return Err(Error::param("samples", "need at least one sample"));
    }
    let per_sample = par::try_map_range(samples.len(), |i| {
        let block = samples[i].block(n, n)?;
        let lm = model.block_log_measure(block);
        if lm == f64::NEG_INFINITY {
            return Err(Error::Model(format!(
                "sample {i} has a zero-measure cylinder at level {n}: samples do not come from this model"
            )));
        }
        Ok(-lm / (2 * n + 1) as f64)
    })?;
    let mean = per_sample.iter().sum::<f64>() / per_sample.len() as f64;
    Ok(SmbEstimate { n, mean, per_sample })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shift::{entropy, Bernoulli, Mixture};

    #[test]
    fn deterministic_in_seed() {
        let m: MeasureModel = Bernoulli::new(vec![0.3, 0.7]).unwrap().into();
        assert_eq!(sample_word(&m, 42, 10), sample_word(&m, 42, 10));
        assert_ne!(sample_word(&m, 42, 10), sample_word(&m, 43, 10));
    }

    #[test]
    fn point_mass_samples_its_atom() {
        let m: MeasureModel = Bernoulli::new(vec![1.0, 0.0]).unwrap().into();
        assert!(sample_word(&m, 7, 25).symbols().iter().all(|&s| s == 0));
    }

    #[test]
    fn uniform_frequencies_within_three_sigma() {
        let p = 3;
        let m: MeasureModel = Bernoulli::uniform(p).unwrap().into();
        let count = 100_000;
        let words = sample_words(&m, 1, count, 0);
        let mut freq = vec![0usize; p];
        for w in &words {
            freq[w.symbols()[0] as usize] += 1;
        }
        let q = 1.0 / p as f64;
        let sigma = (count as f64 * q * (1.0 - q)).sqrt();
        for f in freq {
            assert!((f as f64 - count as f64 * q).abs() < 3.0 * sigma, "frequency {f}");
        }
    }

    #[test]
    fn smb_is_exact_for_uniform() {
        let m: MeasureModel = Bernoulli::uniform(2).unwrap().into();
        let words = sample_words(&m, 3, 20, 12);
        for n in [0, 5, 12] {
            let est = smb_estimate(&m, &words, n).unwrap();
            for v in &est.per_sample {
                assert!((v - 2f64.ln()).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn smb_biased_bernoulli_converges() {
        let m: MeasureModel = Bernoulli::new(vec![0.3, 0.7]).unwrap().into();
        let words = sample_words(&m, 11, 10_000, 50);
        let est = smb_estimate(&m, &words, 50).unwrap();
        let h = entropy(&m).unwrap().nats();
        // per-symbol sd of −log q is ~0.388 nats; the mean of 10⁴ × 101 terms has sd ~4e-4
        assert!((est.mean - h).abs() < 0.02, "{} vs {h}", est.mean);
    }

    #[test]
    fn smb_rejects_foreign_samples() {
        let m: MeasureModel = Bernoulli::new(vec![1.0, 0.0]).unwrap().into();
        let other: MeasureModel = Bernoulli::uniform(2).unwrap().into();
        let words = vec![sample_word(&other, 5, 4); 1];
        let mut bad = words.clone();
        bad[0] = TwoSidedWord::centered(m.alphabet(), vec![1; 9]).unwrap();
        assert!(smb_estimate(&m, &bad, 4).is_err());
    }

    #[test]
    fn mixture_smb_is_bimodal() {
        let b1: MeasureModel = Bernoulli::uniform(2).unwrap().into();
        let b2: MeasureModel = Bernoulli::new(vec![0.9, 0.1]).unwrap().into();
        let mix: MeasureModel = Mixture::new(vec![(0.5, b1.clone()), (0.5, b2.clone())]).unwrap().into();
        let n = 200;
        let mut by_label = [Vec::new(), Vec::new()];
        for i in 0..400u64 {
            let (w, c) = sample_word_labeled(&mix, stream_seed(9, i), n);
            by_label[c].push(w);
        }
        let h = [entropy(&b1).unwrap().nats(), entropy(&b2).unwrap().nats()];
        for c in 0..2 {
            // The mixture density is dominated by the generating component.
            let est = smb_estimate(&mix, &by_label[c], n).unwrap();
            assert!((est.mean - h[c]).abs() < 0.03, "component {c}: {} vs {}", est.mean, h[c]);
        }
    }
}
