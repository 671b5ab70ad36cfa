//! Q_n sets, the rectangle classes R(n) and F(n), and the five counts.
//!
//! A level-`n` rectangle is a window on `-an..=an`. The stable leaf through
//! `y` is represented by y's future window `0..=an` and the unstable leaf by
//! its past window `-an..=0`. The radii `2β^{-n}` and `4β^{-n}` become the
//! cylinder levels `⌊n - log_β 2⌋` and `⌊n - log_β 4⌋`.
//!
//! `Q_n(y)` collects the rectangles of Γ members agreeing with `y` on
//! `-m'..=m'`, where `m' = min(an, ⌊n - log_β 2⌋)`. Counts over F-rectangles
//! "inside Q_n(y)" use all windows agreeing with `y` on `-m'..=m'`.

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::gamma::GammaSet;
use super::pool::WordPool;
use crate::error::{Error, Result};
use crate::shift::TwoSidedWord;

/// Cylinder level standing in for the ball of radius `factor·β^{-n}`.
pub fn ball_level(n: usize, factor: f64, beta: f64) -> usize {
    let shift = factor.ln() / beta.ln();
    ((n as f64) - shift + 1e-9).floor().max(0.0) as usize
}

/// Levels used at step `n`: rectangle half-width `an`, the `Q_n` agreement
/// level `m'` and the `4β^{-n}` ball level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Levels {
    pub n: usize,
    pub an: usize,
    pub inner: usize,
    pub outer: usize,
}

impl Levels {
    pub fn new(n: usize, a: usize, beta: f64) -> Self {
        let an = a * n;
        Levels { n, an, inner: an.min(ball_level(n, 2.0, beta)), outer: ball_level(n, 4.0, beta) }
    }
}

pub(crate) fn sub(w: &[u8], an: usize, k: usize, l: usize) -> &[u8] {
    &w[an - k..=an + l]
}

/// `Q_n(x)`: sorted distinct level-`n` rectangles (windows `-an..=an`) of Γ
/// members agreeing with `x` on `-m'..=m'`.
pub fn build_qn(pool: &WordPool, gamma: &GammaSet, x: &TwoSidedWord, n: usize) -> Result<Vec<Vec<u8>>> {
    gamma.check_pool(pool)?;
    let lv = Levels::new(n, gamma.params.a, gamma.params.beta);
    pool.require_extent(lv.an)?;
    let target = x.block(lv.inner, lv.inner)?;
    let set: BTreeSet<Vec<u8>> = gamma
        .members
        .iter()
        .filter(|&&i| pool.block(i, lv.inner, lv.inner) == target)
        .map(|&i| pool.block(i, lv.an, lv.an).to_vec())
        .collect();
    Ok(set.into_iter().collect())
}

/// The counts of a census at one point `y` and level `n`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusCounts {
    /// `N(n, Q_n(y))`.
    pub n: usize,
    /// `N^s(n, y, Q_n(y))`.
    pub n_s: usize,
    /// `N^u(n, y, Q_n(y))`.
    pub n_u: usize,
    /// `N̂^s(n, y, Q_n(y))`.
    pub n_hat_s: usize,
    /// `N̂^u(n, y, Q_n(y))`.
    pub n_hat_u: usize,
    /// Rectangles of `Q_n(y)` meeting Γ̂.
    pub n_gamma_hat: usize,
    /// `N(n, P(y))`, the size of R(n).
    pub n_total: usize,
    /// `N̂^s(n, y, P(y))`.
    pub n_hat_s_total: usize,
    /// `N̂^u(n, y, P(y))`.
    pub n_hat_u_total: usize,
}

/// Materialised classes R(n) and F(n) inside `P(x)` with the counts at `x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RectangleCensus {
    pub levels: Levels,
    /// R(n): rectangles with centre `x_0` meeting Γ, sorted.
    pub rectangles_r: Vec<Vec<u8>>,
    /// Past windows `-an..=0` of Γ̂ members with centre `x_0`.
    pub pasts_f: Vec<Vec<u8>>,
    /// Future windows `0..=an` of Γ̂ members with centre `x_0`.
    pub futures_f: Vec<Vec<u8>>,
    pub counts: CensusCounts,
}

impl RectangleCensus {
    /// Number of F-rectangles (every past paired with every future).
    pub fn f_len(&self) -> usize {
        self.pasts_f.len() * self.futures_f.len()
    }

    /// F(n) as full rectangles, in canonical order.
    pub fn rectangles_f(&self) -> impl Iterator<Item = Vec<u8>> + '_ {
        self.pasts_f.iter().flat_map(move |p| {
            self.futures_f.iter().map(move |f| {
                let mut r = p.clone();
                r.extend_from_slice(&f[1..]);
                r
            })
        })
    }
}

/// Builds R(n), F(n) and the counts at `x` by direct set construction.
pub fn classes_and_counts(
    pool: &WordPool,
    x: &TwoSidedWord,
    n: usize,
    gamma: &GammaSet,
    gamma_hat: &GammaSet,
) -> Result<RectangleCensus> {
    gamma.check_pool(pool)?;
    gamma_hat.check_pool(pool)?;
    let lv = Levels::new(n, gamma.params.a, gamma.params.beta);
    pool.require_extent(lv.an)?;
    let (an, m) = (lv.an, lv.inner);
    let xw = x.block(an, an)?;
    let centre = xw[an];
    let windows = |g: &GammaSet| -> BTreeSet<Vec<u8>> {
        g.members.iter().map(|&i| pool.block(i, an, an)).filter(|w| w[an] == centre).map(<[u8]>::to_vec).collect()
    };
    let r = windows(gamma);
    let hat = windows(gamma_hat);
    let pasts: BTreeSet<Vec<u8>> = hat.iter().map(|w| sub(w, an, an, 0).to_vec()).collect();
    let futures: BTreeSet<Vec<u8>> = hat.iter().map(|w| sub(w, an, 0, an).to_vec()).collect();

    let x_inner = sub(xw, an, m, m);
    let x_past = sub(xw, an, an, 0);
    let x_future = sub(xw, an, 0, an);
    let q: Vec<&Vec<u8>> = r.iter().filter(|w| sub(w, an, m, m) == x_inner).collect();
    let future_ok = futures.contains(x_future);
    let past_ok = pasts.contains(x_past);
    let counts = CensusCounts {
        n: q.len(),
        n_s: q.iter().filter(|w| sub(w, an, 0, an) == x_future).count(),
        n_u: q.iter().filter(|w| sub(w, an, an, 0) == x_past).count(),
        n_hat_s: if future_ok { pasts.iter().filter(|p| &p[an - m..] == sub(xw, an, m, 0)).count() } else { 0 },
        n_hat_u: if past_ok { futures.iter().filter(|f| &f[..=m] == sub(xw, an, 0, m)).count() } else { 0 },
        n_gamma_hat: q.iter().filter(|w| hat.contains(w.as_slice())).count(),
        n_total: r.len(),
        n_hat_s_total: if future_ok { pasts.len() } else { 0 },
        n_hat_u_total: if past_ok { futures.len() } else { 0 },
    };
    Ok(RectangleCensus {
        levels: lv,
        rectangles_r: r.into_iter().collect(),
        pasts_f: pasts.into_iter().collect(),
        futures_f: futures.into_iter().collect(),
        counts,
    })
}

/// Precomputed counting tables for one level: answers [`CensusCounts`]
/// queries for any point by hash lookups on subwindows.
pub struct CensusIndex<'a> {
    levels: Levels,
    /// distinct Γ rectangles keyed by `-m'..=m'`, `-m'..=an`, `-an..=m'`
    q: HashMap<&'a [u8], usize>,
    s: HashMap<&'a [u8], usize>,
    u: HashMap<&'a [u8], usize>,
    q_hat: HashMap<&'a [u8], usize>,
    pasts: HashSet<&'a [u8]>,
    futures: HashSet<&'a [u8]>,
    /// distinct Γ̂ pasts keyed by `-m'..=0`, futures keyed by `0..=m'`
    pasts_by_inner: HashMap<&'a [u8], usize>,
    futures_by_inner: HashMap<&'a [u8], usize>,
    total_by_centre: Vec<usize>,
    pasts_by_centre: Vec<usize>,
    futures_by_centre: Vec<usize>,
}

impl<'a> CensusIndex<'a> {
    pub fn new(pool: &'a WordPool, gamma: &GammaSet, gamma_hat: &GammaSet, n: usize) -> Result<Self> {
        gamma.check_pool(pool)?;
        gamma_hat.check_pool(pool)?;
        let lv = Levels::new(n, gamma.params.a, gamma.params.beta);
        pool.require_extent(lv.an)?;
        let (an, m) = (lv.an, lv.inner);
        let p = pool.alphabet().size();
        let distinct = |g: &GammaSet| -> Vec<&'a [u8]> {
            let mut seen = HashSet::new();
            g.members.iter().map(|&i| pool.block(i, an, an)).filter(|w| seen.insert(*w)).collect()
        };
        let r = distinct(gamma);
        let hat = distinct(gamma_hat);
        let tally = |ws: &[&'a [u8]], k: usize, l: usize| {
            let mut map: HashMap<&'a [u8], usize> = HashMap::new();
            for w in ws {
                *map.entry(sub(w, an, k, l)).or_default() += 1;
            }
            map
        };
        let mut total_by_centre = vec![0; p];
        for w in &r {
            total_by_centre[w[an] as usize] += 1;
        }
        let pasts: HashSet<&'a [u8]> = hat.iter().map(|w| sub(w, an, an, 0)).collect();
        let futures: HashSet<&'a [u8]> = hat.iter().map(|w| sub(w, an, 0, an)).collect();
        let mut pasts_by_inner: HashMap<&'a [u8], usize> = HashMap::new();
        let mut pasts_by_centre = vec![0; p];
        for past in &pasts {
            *pasts_by_inner.entry(&past[an - m..]).or_default() += 1;
            pasts_by_centre[past[an] as usize] += 1;
        }
        let mut futures_by_inner: HashMap<&'a [u8], usize> = HashMap::new();
        let mut futures_by_centre = vec![0; p];
        for future in &futures {
            *futures_by_inner.entry(&future[..=m]).or_default() += 1;
            futures_by_centre[future[0] as usize] += 1;
        }
        Ok(CensusIndex {
            levels: lv,
            q: tally(&r, m, m),
            s: tally(&r, m, an),
            u: tally(&r, an, m),
            q_hat: tally(&hat, m, m),
            pasts,
            futures,
            pasts_by_inner,
            futures_by_inner,
            total_by_centre,
            pasts_by_centre,
            futures_by_centre,
        })
    }

    pub fn levels(&self) -> Levels {
        self.levels
    }

    /// Counts at the point whose window `-an..=an` is `y`.
    pub fn counts_window(&self, y: &[u8]) -> CensusCounts {
        let (an, m) = (self.levels.an, self.levels.inner);
        assert_eq!(y.len(), 2 * an + 1, "window length does not match the level");
        let get = |map: &HashMap<&[u8], usize>, key: &[u8]| map.get(key).copied().unwrap_or(0);
        let centre = y[an] as usize;
        let future_ok = self.futures.contains(sub(y, an, 0, an));
        let past_ok = self.pasts.contains(sub(y, an, an, 0));
        CensusCounts {
            n: get(&self.q, sub(y, an, m, m)),
            n_s: get(&self.s, sub(y, an, m, an)),
            n_u: get(&self.u, sub(y, an, an, m)),
            n_hat_s: if future_ok { get(&self.pasts_by_inner, sub(y, an, m, 0)) } else { 0 },
            n_hat_u: if past_ok { get(&self.futures_by_inner, sub(y, an, 0, m)) } else { 0 },
            n_gamma_hat: get(&self.q_hat, sub(y, an, m, m)),
            n_total: self.total_by_centre[centre],
            n_hat_s_total: if future_ok { self.pasts_by_centre[centre] } else { 0 },
            n_hat_u_total: if past_ok { self.futures_by_centre[centre] } else { 0 },
        }
    }

    pub fn counts(&self, y: &TwoSidedWord) -> Result<CensusCounts> {
        Ok(self.counts_window(y.block(self.levels.an, self.levels.an)?))
    }
}

impl std::fmt::Debug for CensusIndex<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CensusIndex")
            .field("levels", &self.levels)
            .field("rectangles", &self.q.values().sum::<usize>())
            .finish()
    }
}

/// `N(n, Q_n(·))` keyed by the `-m'..=m'` subwindow.
pub(crate) fn q_tally<'a>(pool: &'a WordPool, gamma: &GammaSet, lv: Levels) -> HashMap<&'a [u8], usize> {
    let mut seen = HashSet::new();
    let mut map: HashMap<&'a [u8], usize> = HashMap::new();
    for &i in &gamma.members {
        let w = pool.block(i, lv.an, lv.an);
        if seen.insert(w) {
            *map.entry(sub(w, lv.an, lv.inner, lv.inner)).or_default() += 1;
        }
    }
    map
}

pub(crate) fn require_nonempty(g: &GammaSet, what: &str) -> Result<()> {
    if g.is_empty() {
        return Err(Error::EmptyGamma(format!("{what} is empty")));
    }
    Ok(())
}
