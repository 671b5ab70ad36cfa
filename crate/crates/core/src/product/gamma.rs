//! Γ-sets: sample points where the entropy deviation bounds hold uniformly,
//! and their density-refined subsets Γ̂.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::pool::{PoolMode, WordPool};
use crate::error::{Error, Result};
use crate::par;
use crate::shift::{check_beta, entropy, MeasureModel, TwoSidedWord};

/// Density checks with fewer supporting samples than this are skipped in
/// sampled pools.
pub const MIN_DENSITY_SUPPORT: usize = 16;

/// Constants of the Γ-set construction.
///
/// Exponentials are taken in base `beta`, so `epsilon` is in log-β units.
/// `entropy` (nats) overrides the model's closed form and is required for
/// factor models.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaParams {
    pub epsilon: f64,
    pub c: f64,
    pub n0: usize,
    pub a: usize,
    pub beta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entropy: Option<f64>,
}

impl GammaParams {
    pub fn new(epsilon: f64, c: f64, n0: usize, a: usize, beta: f64) -> Result<Self> {
        let p = GammaParams { epsilon, c, n0, a, beta, entropy: None };
        p.validate()?;
        Ok(p)
    }

    pub fn with_entropy(mut self, h_nats: f64) -> Result<Self> {
        if !(h_nats >= 0.0 && h_nats.is_finite()) {
            return Err(Error::param("entropy", "entropy must be finite and nonnegative"));
        }
        self.entropy = Some(h_nats);
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::param("epsilon", "must lie in (0, 1)"));
        }
        if !(self.c > 1.0 && self.c.is_finite()) {
            return Err(Error::param("c", "must be > 1"));
        }
        if self.n0 == 0 {
            return Err(Error::param("n0", "must be >= 1"));
        }
        if self.a == 0 {
            return Err(Error::param("a", "must be >= 1"));
        }
        check_beta(self.beta)
    }

    /// `ε` converted to nats.
    pub fn eps_nats(&self) -> f64 {
        self.epsilon * self.beta.ln()
    }

    /// Entropy in nats: the override if present, else the model's.
    pub fn entropy_nats(&self, model: &MeasureModel) -> Result<f64> {
        match self.entropy {
            Some(h) => Ok(h),
            None => Ok(entropy(model)?.nats()),
        }
    }
}

/// Which inequality family a violation belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundFamily {
    /// Two-sided window `-k..=l`.
    TwoSided,
    /// Past window `-k..=0`.
    Stable,
    /// Future window `0..=l`.
    Unstable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundViolation {
    pub family: BoundFamily,
    pub k: usize,
    pub l: usize,
    pub log_measure: f64,
    pub log_lower: f64,
    pub log_upper: f64,
}

/// The subword on coordinates `-k..=l`.
pub fn partition_block(w: &TwoSidedWord, k: usize, l: usize) -> Result<TwoSidedWord> {
    w.window(k, l)
}

/// Checks the deviation bounds on a centred block of half-width `kmax`:
/// for `s` symbols beyond the centre, `log μ` must lie within
/// `±ln C - s·h ∓ s·ε ln β`. Returns the violation with the fewest symbols.
fn block_violation(
    model: &MeasureModel,
    block: &[u8],
    kmax: usize,
    params: &GammaParams,
    h: f64,
) -> Option<BoundViolation> {
    let ln_c = params.c.ln();
    let eps = params.eps_nats();
    let mut worst: Option<BoundViolation> = None;
    for k in 0..=kmax {
        let prefixes = model.prefix_log_measures(&block[kmax - k..]);
        for l in 0..=kmax {
            let family = match (k, l) {
                (0, 0) => continue,
                (0, _) => BoundFamily::Unstable,
                (_, 0) => BoundFamily::Stable,
                _ => BoundFamily::TwoSided,
            };
            let s = (k + l) as f64;
            let lm = prefixes[k + l];
            let lo = -ln_c - s * (h + eps);
            let hi = ln_c - s * (h - eps);
            if !(lo <= lm && lm <= hi) {
                let better = worst.as_ref().is_none_or(|w| (k + l, family) < (w.k + w.l, w.family));
                if better {
                    worst = Some(BoundViolation { family, k, l, log_measure: lm, log_lower: lo, log_upper: hi });
                }
            }
        }
    }
    worst
}

/// Re-checks Γ membership of a single word for all `1 <= k, l <= n_max`.
pub fn check_gamma_membership(
    model: &MeasureModel,
    w: &TwoSidedWord,
    params: &GammaParams,
    n_max: usize,
) -> Result<Option<BoundViolation>> {
    params.validate()?;
    let h = params.entropy_nats(model)?;
    Ok(block_violation(model, w.block(n_max, n_max)?, n_max, params, h))
}

/// Refinement levels `n1..=n_top` of the density conditions behind Γ̂.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityLevels {
    pub n1: usize,
    pub n_top: usize,
}

/// A subset of a [`WordPool`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaSet {
    /// Pool indices, increasing.
    pub members: Vec<usize>,
    pub params: GammaParams,
    /// Pool weight of the members (μ-mass for exhaustive pools, empirical
    /// fraction for sampled ones).
    pub achieved_mass: f64,
    /// Half-width of a 95% normal interval for the mass (0 when exhaustive).
    pub mass_ci_halfwidth: f64,
    pub n_max: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<DensityLevels>,
    pub skipped_density_checks: usize,
    #[serde(skip)]
    mask: Vec<bool>,
}

impl GammaSet {
    /// Explicit subset of `pool`.
    pub fn from_members(pool: &WordPool, mut members: Vec<usize>, params: GammaParams, n_max: usize) -> Result<Self> {
        members.sort_unstable();
        members.dedup();
        if members.last().is_some_and(|&m| m >= pool.len()) {
            return Err(Error::param("members", "index outside the pool"));
        }
        let mut mask = vec![false; pool.len()];
        for &m in &members {
            mask[m] = true;
        }
        let achieved_mass = members.iter().map(|&i| pool.weight(i)).sum::<f64>();
        let mass_ci_halfwidth = match pool.mode() {
            PoolMode::Exhaustive => 0.0,
            PoolMode::Sampled => 1.96 * (achieved_mass * (1.0 - achieved_mass) / pool.len() as f64).max(0.0).sqrt(),
        };
        Ok(GammaSet {
            members,
            params,
            achieved_mass,
            mass_ci_halfwidth,
            n_max,
            density: None,
            skipped_density_checks: 0,
            mask,
        })
    }

    pub fn contains(&self, i: usize) -> bool {
        self.mask.get(i).copied().unwrap_or(false)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub(crate) fn check_pool(&self, pool: &WordPool) -> Result<()> {
        if self.mask.len() != pool.len() {
            return Err(Error::param("gamma", "Γ-set was built over a different pool"));
        }
        Ok(())
    }
}

/// Pool members satisfying the deviation bounds for all `1 <= k, l <= n_max`.
///
/// Membership depends only on coordinates `-n_max..=n_max`, so it is
/// evaluated once per distinct window. An empty result is an error naming the
/// violated bound with the fewest symbols.
pub fn build_gamma(model: &MeasureModel, pool: &WordPool, params: GammaParams, n_max: usize) -> Result<GammaSet> {
    params.validate()?;
    if model.alphabet() != pool.alphabet() {
        return Err(Error::AlphabetMismatch(model.alphabet().size(), pool.alphabet().size()));
    }
    pool.require_extent(n_max)?;
    let h = params.entropy_nats(model)?;
    let mut slot: HashMap<&[u8], usize> = HashMap::new();
    let mut distinct: Vec<&[u8]> = Vec::new();
    let index: Vec<usize> = (0..pool.len())
        .map(|i| {
            let b = pool.block(i, n_max, n_max);
            *slot.entry(b).or_insert_with(|| {
                distinct.push(b);
                distinct.len() - 1
            })
        })
        .collect();
    let verdicts = par::map(&distinct, |b| block_violation(model, b, n_max, &params, h));
    let members: Vec<usize> = (0..pool.len()).filter(|&i| verdicts[index[i]].is_none()).collect();
    if members.is_empty() {
        let v = verdicts.iter().flatten().min_by_key(|v| (v.k + v.l, v.family)).expect("empty Γ has a violation");
        return Err(Error::EmptyGamma(format!(
            "no sample satisfies the bounds; smallest violated: {:?} k = {}, l = {}, log μ = {:.4} outside [{:.4}, {:.4}]",
            v.family, v.k, v.l, v.log_measure, v.log_lower, v.log_upper
        )));
    }
    GammaSet::from_members(pool, members, params, n_max)
}

/// Γ̂: members of `gamma` at which Γ has density at least 1/2 in the ball,
/// the stable ball and the unstable ball, for every level in `n1..=n_top`.
///
/// Symbolically the ball of level `n` is the window `-n..=n`, the stable
/// ball `-n..=an` and the unstable ball `-an..=n`. Densities are pool-weight
/// ratios; in sampled pools, balls holding fewer than
/// [`MIN_DENSITY_SUPPORT`] samples are skipped and counted.
pub fn build_gamma_hat(pool: &WordPool, gamma: &GammaSet, n1: usize, n_top: usize) -> Result<GammaSet> {
    gamma.check_pool(pool)?;
    if n1 > n_top {
        return Err(Error::param("n1", "n1 must not exceed n_top"));
    }
    let a = gamma.params.a;
    pool.require_extent(a * n_top)?;
    let mut keep = gamma.mask.clone();
    let mut skipped = 0;
    for n in n1..=n_top {
        for (k, l) in [(n, n), (n, a * n), (a * n, n)] {
            let mut mass: HashMap<&[u8], (f64, f64, usize)> = HashMap::new();
            for i in 0..pool.len() {
                let e = mass.entry(pool.block(i, k, l)).or_default();
                e.0 += pool.weight(i);
                e.2 += 1;
                if gamma.contains(i) {
                    e.1 += pool.weight(i);
                }
            }
            for &i in &gamma.members {
                if !keep[i] {
                    continue;
                }
                let (total, inside, count) = mass[pool.block(i, k, l)];
                if pool.mode() == PoolMode::Sampled && count < MIN_DENSITY_SUPPORT {
                    skipped += 1;
                    continue;
                }
                if 2.0 * inside < total * (1.0 - 1e-12) {
                    keep[i] = false;
                }
            }
        }
    }
    let members = gamma.members.iter().copied().filter(|&i| keep[i]).collect();
    let mut hat = GammaSet::from_members(pool, members, gamma.params.clone(), gamma.n_max)?;
    hat.density = Some(DensityLevels { n1, n_top });
    hat.skipped_density_checks = skipped;
    Ok(hat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shift::{Alphabet, Bernoulli};
    use std::collections::BTreeSet;

    fn params(eps: f64, c: f64) -> GammaParams {
        GammaParams::new(eps, c, 1, 1, 2.0).unwrap()
    }

    #[test]
    fn window_intersection_identity() {
        // words agreeing with x on -k..=0 and on 0..=l are exactly those agreeing on -k..=l
        let alpha = Alphabet::new(2).unwrap();
        let all: Vec<TwoSidedWord> = (0..512u32)
            .map(|c| TwoSidedWord::centered(alpha, (0..9).map(|i| ((c >> i) & 1) as u8).collect()).unwrap())
            .collect();
        let x = &all[301];
        for k in 0..=4 {
            for l in 0..=4 {
                let agree = |lo: usize, hi: usize| -> BTreeSet<usize> {
                    let target = partition_block(x, lo, hi).unwrap();
                    (0..all.len()).filter(|&i| partition_block(&all[i], lo, hi).unwrap() == target).collect()
                };
                let both: BTreeSet<usize> = agree(k, 0).intersection(&agree(0, l)).copied().collect();
                assert_eq!(both, agree(k, l));
            }
        }
        assert_eq!(partition_block(x, 0, 0).unwrap().symbols(), &[x.get(0).unwrap()]);
        assert_eq!(partition_block(x, 0, 3).unwrap(), x.window(0, 3).unwrap());
    }

    #[test]
    fn uniform_gamma_is_everything() {
        let m: MeasureModel = Bernoulli::uniform(2).unwrap().into();
        let pool = WordPool::sampled(&m, 3, 200, 12).unwrap();
        let g = build_gamma(&m, &pool, params(0.05, 2.0), 12).unwrap();
        assert_eq!(g.len(), 200);
        assert!((g.achieved_mass - 1.0).abs() < 1e-12);
    }

    /// Direct evaluation of every inequality from cylinder measures.
    fn oracle_member(m: &MeasureModel, w: &TwoSidedWord, p: &GammaParams, n_max: usize) -> bool {
        let h = entropy(m).unwrap().nats();
        let band = |s: usize, measure: f64| {
            let s = s as f64;
            let lo = p.c.recip() * (-s * h - s * p.epsilon * p.beta.ln()).exp();
            let hi = p.c * (-s * h + s * p.epsilon * p.beta.ln()).exp();
            lo <= measure && measure <= hi
        };
        for k in 1..=n_max {
            for l in 1..=n_max {
                if !band(k + l, m.cylinder_measure(&w.window(k, l).unwrap()).unwrap()) {
                    return false;
                }
            }
            let (plus, minus) = m.one_sided_measures(&w.window(k, k).unwrap()).unwrap();
            if !band(k, plus) || !band(k, minus) {
                return false;
            }
        }
        true
    }

    #[test]
    fn biased_gamma_matches_oracle() {
        let m: MeasureModel = Bernoulli::new(vec![0.3, 0.7]).unwrap().into();
        let pool = WordPool::sampled(&m, 11, 5000, 30).unwrap();
        let p = params(0.1, 10.0);
        let g = build_gamma(&m, &pool, p.clone(), 30).unwrap();
        // the joint band over all 1 <= k, l <= 30 holds for about half the samples at C = 10
        assert!((g.achieved_mass - 0.51).abs() < 0.05, "{}", g.achieved_mass);
        assert!(g.mass_ci_halfwidth > 0.0 && g.mass_ci_halfwidth < 0.03);
        assert!(build_gamma(&m, &pool, params(0.1, 100.0), 30).unwrap().achieved_mass >= 0.9);
        for i in 0..pool.len() {
            assert_eq!(g.contains(i), oracle_member(&m, &pool.word(i), &p, 30), "sample {i}");
        }
        for &i in g.members.iter().take(20) {
            assert_eq!(check_gamma_membership(&m, &pool.word(i), &p, 30).unwrap(), None);
        }
    }

    #[test]
    fn mass_grows_with_c() {
        let m: MeasureModel = Bernoulli::new(vec![0.3, 0.7]).unwrap().into();
        let pool = WordPool::sampled(&m, 12, 1000, 20).unwrap();
        let masses: Vec<f64> = [1.5, 3.0, 10.0, 100.0, 1000.0]
            .iter()
            .map(|&c| build_gamma(&m, &pool, params(0.1, c), 20).map_or(0.0, |g| g.achieved_mass))
            .collect();
        assert!(masses.windows(2).all(|w| w[0] <= w[1]), "{masses:?}");
        assert!(masses[4] > 0.99);
    }

    #[test]
    fn tight_band_is_near_empty() {
        let m: MeasureModel = Bernoulli::new(vec![0.3, 0.7]).unwrap().into();
        let pool = WordPool::sampled(&m, 13, 2000, 30).unwrap();
        match build_gamma(&m, &pool, params(0.1, 1.0001), 30) {
            Ok(g) => assert!(g.achieved_mass < 0.05, "{}", g.achieved_mass),
            Err(Error::EmptyGamma(msg)) => assert!(msg.contains("k = ")),
            Err(e) => panic!("{e}"),
        }
    }

    #[test]
    fn validation() {
        assert!(GammaParams::new(0.0, 2.0, 1, 1, 2.0).is_err());
        assert!(GammaParams::new(0.1, 1.0, 1, 1, 2.0).is_err());
        assert!(GammaParams::new(0.1, 2.0, 1, 0, 2.0).is_err());
        assert!(GammaParams::new(0.1, 2.0, 1, 1, 1.5).is_err());
    }

    #[test]
    fn gamma_hat_exhaustive_uniform() {
        let m: MeasureModel = Bernoulli::uniform(2).unwrap().into();
        let pool = WordPool::exhaustive(&m, 4).unwrap();
        let g = build_gamma(&m, &pool, params(0.1, 2.0), 4).unwrap();
        let hat = build_gamma_hat(&pool, &g, 1, 4).unwrap();
        assert_eq!(hat.len(), pool.len());
        assert_eq!(hat.skipped_density_checks, 0);

        // Γ = {x_2 = x_3 = 0} has density 1/4 in every level-1 ball
        let members: Vec<usize> = (0..pool.len()).filter(|&i| pool.block(i, 0, 3)[2..] == [0, 0]).collect();
        let g = GammaSet::from_members(&pool, members, params(0.1, 2.0), 4).unwrap();
        assert!((g.achieved_mass - 0.25).abs() < 1e-12);
        assert!(build_gamma_hat(&pool, &g, 1, 2).unwrap().is_empty());
        assert_eq!(build_gamma_hat(&pool, &g, 3, 4).unwrap().len(), g.len());
    }
}
