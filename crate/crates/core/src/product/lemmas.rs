//! Numerical evaluation of the six counting lemmas.
//!
//! Each lemma is an inequality `LHS <= RHS`; its margin at `(y, n)` is
//! `(ln RHS - ln LHS) / n` in nats per level. Exponentials are base β with the
//! entropy `h` in nats, so `β^{c·n·h_β} = e^{c·n·h}` and `β^{c·n·ε} = e^{c·n·ε ln β}`.

use std::collections::{HashMap, HashSet};
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use super::census::{q_tally, require_nonempty, sub, CensusIndex, Levels};
use super::gamma::GammaSet;
use super::pool::WordPool;
use crate::error::{Error, Result};
use crate::par;
use crate::shift::MeasureModel;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub n: usize,
    /// The point's window `-an..=an`.
    pub window: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaOutcome {
    pub lemma: u8,
    pub min_margin: Option<f64>,
    pub witness: Option<Witness>,
    pub evaluated: usize,
    /// Points skipped because a hypothesis of the lemma fails there.
    pub exempt: usize,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginRow {
    pub n: usize,
    pub lemma: u8,
    pub min_margin: f64,
    pub evaluated: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub n_lo: usize,
    pub n_hi: usize,
    pub n1: usize,
    pub a: usize,
    pub beta: f64,
    pub epsilon: f64,
    pub c: f64,
    pub entropy_nats: f64,
    /// Smallest one-sided Γ-mass ratio over members and window lengths.
    pub d_empirical: f64,
    /// `½ β^{-d^s n0 - n0 ε}` with `d^s = h_β`, for comparison only.
    pub d_formula: f64,
    /// First level from which the Lemma 5 ratio stays below 1 at every tested point.
    pub n3: Option<usize>,
    /// Largest `N̂/N · β^{-7anε}` per level (stable and unstable sides pooled).
    pub lemma5_max_ratio: Vec<(usize, f64)>,
    /// Points where `N̂^s·N̂^u` fell below the Γ̂-rectangle count of `Q_n`.
    pub injectivity_violations: usize,
    pub lemmas: Vec<LemmaOutcome>,
    pub rows: Vec<MarginRow>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.injectivity_violations == 0 && self.lemmas.iter().all(|l| l.passed)
    }

    pub fn lemma(&self, k: u8) -> &LemmaOutcome {
        &self.lemmas[k as usize - 1]
    }

    /// Fails with the first failing lemma, its witness and level.
    pub fn into_result(self) -> Result<Self> {
        if let Some(l) = self.lemmas.iter().find(|l| !l.passed) {
            let at = match &l.witness {
                Some(w) => {
                    format!(" at n = {}, y = {:?}, margin {:.4}", w.n, w.window, l.min_margin.unwrap_or(f64::NAN))
                }
                None => String::new(),
            };
            return Err(Error::Violation(format!("lemma {} fails{at}", l.lemma)));
        }
        if self.injectivity_violations > 0 {
            return Err(Error::Violation(format!("{} injectivity violations", self.injectivity_violations)));
        }
        Ok(self)
    }

    /// One row per (level, lemma): `n,lemma,min_margin,evaluated`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,lemma,min_margin,evaluated\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{}\n", r.n, r.lemma, r.min_margin, r.evaluated));
        }
        out
    }
}

#[derive(Default)]
struct Tracker {
    min: Option<(f64, Witness)>,
    evaluated: usize,
    exempt: usize,
    per_level: Vec<MarginRow>,
}

impl Tracker {
    fn level(&mut self, lemma: u8, n: usize, values: impl IntoIterator<Item = Option<(f64, Vec<u8>)>>) {
        let mut best: Option<(f64, Vec<u8>)> = None;
        let mut count = 0;
        for v in values {
            match v {
                None => self.exempt += 1,
                Some((m, w)) => {
                    count += 1;
                    if best.as_ref().is_none_or(|b| m < b.0) {
                        best = Some((m, w));
                    }
                }
            }
        }
        self.evaluated += count;
        if let Some((m, w)) = best {
            self.per_level.push(MarginRow { n, lemma, min_margin: m, evaluated: count });
            if self.min.as_ref().is_none_or(|b| m < b.0) {
                self.min = Some((m, Witness { n, window: w }));
            }
        }
    }

    fn outcome(self, lemma: u8, extra: bool) -> (LemmaOutcome, Vec<MarginRow>) {
        let (min_margin, witness) = match self.min {
            Some((m, w)) => (Some(m), Some(w)),
            None => (None, None),
        };
        let passed = extra && min_margin.is_none_or(|m| m >= 0.0);
        (
            LemmaOutcome { lemma, min_margin, witness, evaluated: self.evaluated, exempt: self.exempt, passed },
            self.per_level,
        )
    }
}

/// Distinct `-k..=k` windows of a Γ-set, in pool order.
fn distinct_windows<'a>(pool: &'a WordPool, g: &GammaSet, k: usize) -> Vec<&'a [u8]> {
    let mut seen = HashSet::new();
    g.members.iter().map(|&i| pool.block(i, k, k)).filter(|w| seen.insert(*w)).collect()
}

/// Smallest ratio, over Γ members and `1 <= k <= k_max`, of the Γ-weight to
/// the total weight among pool words sharing the member's future window
/// `0..=k` (respectively past window `-k..=0`).
pub fn one_sided_gamma_mass(pool: &WordPool, gamma: &GammaSet, k_max: usize) -> Result<f64> {
    gamma.check_pool(pool)?;
    pool.require_extent(k_max)?;
    let mut d: f64 = 1.0;
    for k in 1..=k_max {
        for (lo, hi) in [(0, k), (k, 0)] {
            let mut mass: HashMap<&[u8], (f64, f64)> = HashMap::new();
            for i in 0..pool.len() {
                let e = mass.entry(pool.block(i, lo, hi)).or_default();
                e.0 += pool.weight(i);
                if gamma.contains(i) {
                    e.1 += pool.weight(i);
                }
            }
            for &i in &gamma.members {
                let (t, g) = mass[pool.block(i, lo, hi)];
                d = d.min(g / t);
            }
        }
    }
    Ok(d)
}

/// Evaluates Lemmas 1–6 at every distinct Γ (Lemma 1) or Γ̂ (Lemmas 2–6)
/// point for `n` in `levels`.
///
/// Hypotheses are applied as stated: Lemma 1 from `n0`, Lemmas 2–5 from `n1`
/// (the Γ̂ density level, or `n0` when `gamma_hat` carries none), Lemma 3 only
/// where Γ̂ has density at least 1/2 in the level-`n` ball, and Lemma 6 from
/// `max(n1, n3)`. Lemma 5 passes when `n3` exists within the range.
pub fn check_counting_lemmas(
    model: &MeasureModel,
    pool: &WordPool,
    gamma: &GammaSet,
    gamma_hat: &GammaSet,
    levels: RangeInclusive<usize>,
) -> Result<LemmaReport> {
    gamma.check_pool(pool)?;
    gamma_hat.check_pool(pool)?;
    require_nonempty(gamma, "Γ")?;
    require_nonempty(gamma_hat, "Γ̂")?;
    let (n_lo, n_hi) = (*levels.start(), *levels.end());
    if n_lo == 0 || n_lo > n_hi {
        return Err(Error::param("levels", "need 1 <= n_lo <= n_hi"));
    }
    let p = &gamma.params;
    let (a, beta) = (p.a, p.beta);
    pool.require_extent(a * (n_hi + 2))?;
    let h = p.entropy_nats(model)?;
    let eps = p.eps_nats();
    let ln_c = p.c.ln();
    let n1 = gamma_hat.density.map_or(p.n0, |d| d.n1);
    let d_empirical = one_sided_gamma_mass(pool, gamma, a * n_hi)?;
    let d_formula = 0.5 * (-(h / beta.ln()) * p.n0 as f64 * beta.ln() - p.n0 as f64 * eps).exp();
    let lm = |w: &[u8]| model.block_log_measure(w);

    let mut tr: Vec<Tracker> = (0..6).map(|_| Tracker::default()).collect();
    let mut l5_values: Vec<(usize, Vec<(f64, Vec<u8>)>)> = Vec::new();
    let mut injectivity_violations = 0;

    for n in n_lo..=n_hi {
        let lv = Levels::new(n, a, beta);
        let (an, nf) = (lv.an, n as f64);
        let anf = an as f64;
        let index = CensusIndex::new(pool, gamma, gamma_hat, n)?;
        let hat_windows = distinct_windows(pool, gamma_hat, an);
        let counts: Vec<_> = par::map(&hat_windows, |w| index.counts_window(w));
        injectivity_violations += counts.iter().filter(|c| c.n_hat_s * c.n_hat_u < c.n_gamma_hat).count();

        // Lemma 1 over Γ
        if n >= p.n0 {
            let g_windows = distinct_windows(pool, gamma, an);
            let vals = par::map(&g_windows, |w| {
                let c = index.counts_window(w);
                let o = lv.outer;
                let rhs_s = lm(sub(w, an, o, 0)) + ln_c + anf * (h + eps);
                let rhs_u = lm(sub(w, an, 0, o)) + ln_c + anf * (h + eps);
                let m = ((rhs_s - (c.n_s as f64).ln()) / nf).min((rhs_u - (c.n_u as f64).ln()) / nf);
                Some((m, w.to_vec()))
            });
            tr[0].level(1, n, vals);
        }
        if n < n1 {
            continue;
        }
        // Lemma 2
        let vals = hat_windows.iter().zip(&counts).map(|(w, c)| {
            let lhs = lm(sub(w, an, n, n));
            let rhs = (c.n as f64).ln() + 2f64.ln() + ln_c - 2.0 * anf * (h - eps);
            Some(((rhs - lhs) / nf, w.to_vec()))
        });
        tr[1].level(2, n, vals.collect::<Vec<_>>());
        // Lemma 3, where Γ̂ is dense in the level-n ball
        let mut ball: HashMap<&[u8], (f64, f64)> = HashMap::new();
        for i in 0..pool.len() {
            let e = ball.entry(pool.block(i, n, n)).or_default();
            e.0 += pool.weight(i);
            if gamma_hat.contains(i) {
                e.1 += pool.weight(i);
            }
        }
        let lv2 = Levels::new(n + 2, a, beta);
        let q2 = q_tally(pool, gamma, lv2);
        let big = distinct_windows(pool, gamma_hat, lv2.an);
        let vals = par::map(&big, |wb| {
            let w = sub(wb, lv2.an, an, an);
            let (t, g) = ball[sub(wb, lv2.an, n, n)];
            if 2.0 * g < t * (1.0 - 1e-12) {
                return None;
            }
            let c = index.counts_window(w);
            let lhs = (q2[sub(wb, lv2.an, lv2.inner, lv2.inner)] as f64).ln();
            let rhs = (c.n_hat_s as f64).ln()
                + (c.n_hat_u as f64).ln()
                + 2f64.ln()
                + 2.0 * ln_c
                + 4.0 * a as f64 * (h + eps)
                + 4.0 * anf * eps;
            Some(((rhs - lhs) / nf, w.to_vec()))
        });
        tr[2].level(3, n, vals);
        // Lemma 4
        let rhs4 = -d_empirical.ln() + 2.0 * ln_c + anf * (h + 3.0 * eps);
        let vals = hat_windows.iter().zip(&counts).map(|(w, c)| {
            let lhs = (c.n_hat_s_total.max(c.n_hat_u_total) as f64).ln();
            Some(((rhs4 - lhs) / nf, w.to_vec()))
        });
        tr[3].level(4, n, vals.collect::<Vec<_>>());
        // Lemma 5
        let vals: Vec<(f64, Vec<u8>)> = hat_windows
            .iter()
            .zip(&counts)
            .map(|(w, c)| {
                let rs = (c.n_hat_s as f64 / c.n_s as f64).ln();
                let ru = (c.n_hat_u as f64 / c.n_u as f64).ln();
                (rs.max(ru) - 7.0 * anf * eps, w.to_vec())
            })
            .collect();
        tr[4].level(5, n, vals.iter().map(|(v, w)| Some((-v / nf, w.clone()))).collect::<Vec<_>>());
        l5_values.push((n, vals));
    }

    let first = n_lo.max(n1);
    let last_bad = l5_values.iter().filter(|(_, v)| v.iter().any(|(x, _)| *x >= 0.0)).map(|(n, _)| *n).max();
    let n3 = match last_bad {
        None => Some(first),
        Some(b) if b < n_hi => Some(b + 1),
        Some(_) => None,
    };
    let lemma5_max_ratio = l5_values
        .iter()
        .map(|(n, v)| (*n, v.iter().map(|(x, _)| *x).fold(f64::NEG_INFINITY, f64::max).exp()))
        .collect();

    // Lemma 6 from max(n1, n3)
    if let Some(n3v) = n3 {
        for n in n3v.max(first)..=n_hi {
            let lv = Levels::new(n, a, beta);
            let (an, nf) = (lv.an, n as f64);
            let hat_windows = distinct_windows(pool, gamma_hat, an);
            let vals = par::map(&hat_windows, |w| {
                let lhs = lm(sub(w, an, n, 0)) + lm(sub(w, an, 0, n));
                let rhs = lm(sub(w, an, lv.outer, lv.outer)) + 4f64.ln() + 3.0 * ln_c + 11.0 * an as f64 * eps;
                Some(((rhs - lhs) / nf, w.to_vec()))
            });
            tr[5].level(6, n, vals);
        }
    }

    let mut lemmas = Vec::new();
    let mut rows = Vec::new();
    for (i, t) in tr.into_iter().enumerate() {
        let extra = match i {
            4 | 5 => n3.is_some(),
            _ => true,
        };
        let (o, r) = t.outcome(i as u8 + 1, extra);
        lemmas.push(o);
        rows.extend(r);
    }
    rows.sort_by_key(|r| (r.n, r.lemma));
    Ok(LemmaReport {
        n_lo,
        n_hi,
        n1,
        a,
        beta,
        epsilon: p.epsilon,
        c: p.c,
        entropy_nats: h,
        d_empirical,
        d_formula,
        n3,
        lemma5_max_ratio,
        injectivity_violations,
        lemmas,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::product::gamma::{build_gamma, build_gamma_hat, GammaParams};
    use crate::shift::Bernoulli;

    #[test]
    fn uniform_exhaustive_all_margins_nonnegative() {
        let m: MeasureModel = Bernoulli::uniform(2).unwrap().into();
        let pool = WordPool::exhaustive(&m, 8).unwrap();
        let params = GammaParams::new(0.1, 2.0, 1, 1, 2.0).unwrap();
        let gamma = build_gamma(&m, &pool, params, 8).unwrap();
        let hat = build_gamma_hat(&pool, &gamma, 2, 6).unwrap();
        assert_eq!(hat.len(), pool.len());
        let r = check_counting_lemmas(&m, &pool, &gamma, &hat, 2..=6).unwrap();
        assert!(r.passed(), "{:?}", r.lemmas);
        for l in &r.lemmas {
            assert!(l.min_margin.unwrap() >= 0.0, "lemma {}", l.lemma);
            assert!(l.evaluated > 0);
        }
        assert_eq!(r.n3, Some(2));
        assert_eq!(r.d_empirical, 1.0);
        assert!(r.to_csv().lines().count() > 6 * 4);
    }

    #[test]
    fn degenerate_lemma3_by_direct_count() {
        // Γ = Γ̂ = everything: N(n+2, Q_{n+2}) = 4 and N̂^s = N̂^u = 2 at every point
        let m: MeasureModel = Bernoulli::uniform(2).unwrap().into();
        let pool = WordPool::exhaustive(&m, 7).unwrap();
        let params = GammaParams::new(0.1, 2.0, 1, 1, 2.0).unwrap();
        let all = GammaSet::from_members(&pool, (0..pool.len()).collect(), params, 7).unwrap();
        let r = check_counting_lemmas(&m, &pool, &all, &all, 2..=5).unwrap();
        for row in r.rows.iter().filter(|r| r.lemma == 3) {
            let n = row.n as f64;
            let h = 2f64.ln();
            let eps = 0.1 * 2f64.ln();
            let expect =
                ((4.0f64).ln() + 2f64.ln() + 2.0 * 2f64.ln() + 4.0 * (h + eps) + 4.0 * n * eps - 4f64.ln()) / n;
            assert!((row.min_margin - expect).abs() < 1e-12);
        }
    }
}
