use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::PointCloud;
use crate::shift::EntropyValue;

/// Iterations discarded before an orbit is recorded.
pub const BURN_IN: usize = 1000;

/// Bits of the torus lattice used by the integer cat-map iteration.
pub const TORUS_BITS: u32 = 52;

const TORUS_MASK: u64 = (1u64 << TORUS_BITS) - 1;

/// Generalised baker map on the unit square.
///
/// Branch `i` takes the vertical strip of width `p_i` starting at `s_i`,
/// stretches it horizontally by `1/p_i` and squeezes it vertically by `a_i`
/// into the horizontal strip starting at `c_i`. The vertical gaps
/// `1 - Σ a_j` are spread evenly between the strips.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BakerParams {
    pub contractions: Vec<f64>,
    /// Strip widths; `None` means `1/b` each.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub widths: Option<Vec<f64>>,
}

impl BakerParams {
    pub fn new(contractions: Vec<f64>) -> Result<Self> {
        let p = BakerParams { contractions, widths: None };
        p.validate()?;
        Ok(p)
    }

    pub fn with_widths(contractions: Vec<f64>, widths: Vec<f64>) -> Result<Self> {
        let p = BakerParams { contractions, widths: Some(widths) };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let a = &self.contractions;
        if a.len() < 2 {
            return Err(Error::param("contractions", format!("need b >= 2 branches, got {}", a.len())));
        }
        if a.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
            return Err(Error::param("contractions", "each a_i must lie in (0, 1)"));
        }
        if a.iter().sum::<f64>() > 1.0 + 1e-12 {
            return Err(Error::param("contractions", "sum of a_i exceeds 1"));
        }
        if let Some(w) = &self.widths {
            if w.len() != a.len() {
                return Err(Error::param("widths", "one width per branch"));
            }
            if w.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
                return Err(Error::param("widths", "each width must lie in (0, 1)"));
            }
            if (w.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
                return Err(Error::param("widths", "widths must sum to 1"));
            }
        }
        Ok(())
    }

    pub fn branches(&self) -> usize {
        self.contractions.len()
    }

    pub fn widths(&self) -> Vec<f64> {
        let b = self.branches();
        self.widths.clone().unwrap_or_else(|| vec![1.0 / b as f64; b])
    }

    /// Left edges `s_i` of the vertical strips.
    pub fn left_edges(&self) -> Vec<f64> {
        prefix_sums(&self.widths())
    }

    /// Bottom edges `c_i` of the image strips.
    pub fn offsets(&self) -> Vec<f64> {
        let a = &self.contractions;
        let gap = (1.0 - a.iter().sum::<f64>()).max(0.0) / (a.len() - 1) as f64;
        prefix_sums(a).iter().enumerate().map(|(i, s)| s + i as f64 * gap).collect()
    }

    /// Entropy of the natural measure, `-Σ p_i ln p_i`.
    pub fn entropy(&self) -> EntropyValue {
        let h = self.widths().iter().map(|p| -p * p.ln()).sum::<f64>();
        EntropyValue::new(h.max(0.0)).expect("finite entropy")
    }

    /// Whether each strip keeps its area (`a_i = p_i`).
    pub fn is_area_preserving(&self) -> bool {
        self.widths().iter().zip(&self.contractions).all(|(p, a)| (p - a).abs() < 1e-12)
    }

    /// Branch of `x`. A point on an interior strip edge belongs to the strip
    /// on its left.
    pub fn branch(&self, x: f64) -> usize {
        let edges = self.left_edges();
        let mut i = edges.partition_point(|&s| s < x);
        i = i.saturating_sub(1);
        i.min(self.branches() - 1)
    }

    /// One step of the map in floating point.
    pub fn step(&self, (x, y): (f64, f64)) -> (f64, f64) {
        let i = self.branch(x);
        let p = self.widths()[i];
        let s = self.left_edges()[i];
        ((x - s) / p, self.offsets()[i] + self.contractions[i] * y)
    }
}

fn prefix_sums(v: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    v.iter()
        .map(|x| {
            let s = acc;
            acc += x;
            s
        })
        .collect()
}

/// Hyperbolic automorphism of the 2-torus given by an integer matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusAutParams {
    pub matrix: [[i64; 2]; 2],
}

impl TorusAutParams {
    pub fn new(matrix: [[i64; 2]; 2]) -> Result<Self> {
        let p = TorusAutParams { matrix };
        p.validate()?;
        Ok(p)
    }

    /// Arnold's cat map `[[2, 1], [1, 1]]`.
    pub fn cat() -> Self {
        TorusAutParams { matrix: [[2, 1], [1, 1]] }
    }

    pub fn validate(&self) -> Result<()> {
        let [[a, b], [c, d]] = self.matrix;
        let det = a * d - b * c;
        if det.abs() != 1 {
            return Err(Error::param("matrix", format!("determinant must be +-1, got {det}")));
        }
        if (a + d).abs() <= 2 {
            return Err(Error::param("matrix", format!("need |trace| > 2, got {}", a + d)));
        }
        Ok(())
    }

    fn trace_det(&self) -> (f64, f64) {
        let [[a, b], [c, d]] = self.matrix;
        ((a + d) as f64, (a * d - b * c) as f64)
    }

    /// Eigenvalues `(λ_u, λ_s)` with `|λ_u| > 1 > |λ_s|`.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let (t, det) = self.trace_det();
        let r = (t * t - 4.0 * det).sqrt();
        let big = (t + t.signum() * r) / 2.0;
        (big, det / big)
    }

    /// Unit eigenvector for `lambda`.
    pub fn eigenvector(&self, lambda: f64) -> [f64; 2] {
        let [[a, b], [c, d]] = self.matrix;
        let v = if b != 0 { [b as f64, lambda - a as f64] } else { [lambda - d as f64, c as f64] };
        let n = v[0].hypot(v[1]);
        [v[0] / n, v[1] / n]
    }

    pub fn entropy(&self) -> EntropyValue {
        EntropyValue::new(self.eigenvalues().0.abs().ln()).expect("finite entropy")
    }

    /// One step on the `2^-52` lattice; coordinates are snapped down onto it.
    pub fn step(&self, (x, y): (f64, f64)) -> (f64, f64) {
        let (u, v) = self.step_lattice((to_lattice(x), to_lattice(y)));
        (from_lattice(u), from_lattice(v))
    }

    fn step_lattice(&self, (x, y): (u64, u64)) -> (u64, u64) {
        let [[a, b], [c, d]] = self.matrix;
        let row = |p: i64, q: i64| (p as u64).wrapping_mul(x).wrapping_add((q as u64).wrapping_mul(y)) & TORUS_MASK;
        (row(a, b), row(c, d))
    }
}

fn to_lattice(x: f64) -> u64 {
    ((x.rem_euclid(1.0)) * (1u64 << TORUS_BITS) as f64) as u64 & TORUS_MASK
}

fn from_lattice(u: u64) -> f64 {
    u as f64 / (1u64 << TORUS_BITS) as f64
}

/// A piecewise-linear hyperbolic map of the square or torus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SmoothMap {
    Baker(BakerParams),
    TorusAut(TorusAutParams),
}

impl SmoothMap {
    pub fn validate(&self) -> Result<()> {
        match self {
            SmoothMap::Baker(p) => p.validate(),
            SmoothMap::TorusAut(p) => p.validate(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SmoothMap::Baker(_) => "baker",
            SmoothMap::TorusAut(_) => "torus_aut",
        }
    }

    /// Entropy of the natural invariant measure (nats).
    pub fn entropy(&self) -> EntropyValue {
        match self {
            SmoothMap::Baker(p) => p.entropy(),
            SmoothMap::TorusAut(p) => p.entropy(),
        }
    }

    /// Unit vectors along which the unstable and stable marginals are read.
    pub fn directions(&self) -> ([f64; 2], [f64; 2]) {
        match self {
            SmoothMap::Baker(_) => ([1.0, 0.0], [0.0, 1.0]),
            SmoothMap::TorusAut(p) => {
                let (lu, ls) = p.eigenvalues();
                (p.eigenvector(lu), p.eigenvector(ls))
            }
        }
    }

    pub fn step(&self, point: (f64, f64)) -> (f64, f64) {
        match self {
            SmoothMap::Baker(p) => p.step(point),
            SmoothMap::TorusAut(p) => p.step(point),
        }
    }

    /// A start point drawn from `seed`.
    pub fn random_start(&self, seed: u64) -> [f64; 2] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_57a7);
        match self {
            SmoothMap::Baker(_) => [rng.random(), rng.random()],
            SmoothMap::TorusAut(_) => {
                let mut coord = || from_lattice(rng.random::<u64>() & TORUS_MASK);
                [coord(), coord()]
            }
        }
    }
}

/// Orbit of `point` of length `n`, recorded after [`BURN_IN`] steps.
///
/// Toral automorphisms run exactly on the `2^-52` lattice, so `seed` is not
/// used and rational lattice points give periodic orbits.
///
/// Baker orbits run on the coding: the branch symbols of `x` are read off
/// the start point while it has bits left, then drawn from the seeded stream
/// with probabilities `p_i`. `x` is rebuilt from the upcoming symbols at each
/// step and `y` is carried forward by the contractions. Plain floating-point
/// iteration would shift every bit of `x` out within a few dozen steps.
pub fn iterate(map: &SmoothMap, point: [f64; 2], n: usize, seed: u64) -> Result<PointCloud> {
    map.validate()?;
    if point.iter().any(|c| !(*c >= 0.0 && *c <= 1.0)) {
        return Err(Error::param("point", "start point must lie in the unit square"));
    }
    let coords = match map {
        SmoothMap::TorusAut(p) => {
            let mut z = (to_lattice(point[0]), to_lattice(point[1]));
            for _ in 0..BURN_IN {
                z = p.step_lattice(z);
            }
            let mut out = Vec::with_capacity(2 * n);
            for _ in 0..n {
                out.push(from_lattice(z.0));
                out.push(from_lattice(z.1));
                z = p.step_lattice(z);
            }
            out
        }
        SmoothMap::Baker(p) => baker_orbit(p, point, n, seed),
    };
    PointCloud::new(2, coords, None)
}

fn baker_orbit(p: &BakerParams, point: [f64; 2], n: usize, seed: u64) -> Vec<f64> {
    let widths = p.widths();
    let edges = p.left_edges();
    let offsets = p.offsets();
    let widest = widths.iter().cloned().fold(0.0, f64::max);
    // Symbols needed for x to reach full precision.
    let depth = (64.0 * std::f64::consts::LN_2 / -widest.ln()).ceil() as usize;
    let total = BURN_IN + n + depth;

    let mut symbols = Vec::with_capacity(total);
    let (mut x, mut span) = (point[0], 1.0);
    while span > f64::EPSILON && symbols.len() < total {
        let i = p.branch(x);
        symbols.push(i as u8);
        x = ((x - edges[i]) / widths[i]).clamp(0.0, 1.0);
        span *= widths[i];
    }
    let mut cumulative = prefix_sums(&widths);
    cumulative.remove(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while symbols.len() < total {
        let u: f64 = rng.random();
        symbols.push(cumulative.partition_point(|&c| c <= u) as u8);
    }

    let mut y = point[1];
    let mut out = Vec::with_capacity(2 * n);
    for t in 0..BURN_IN + n {
        let i = symbols[t] as usize;
        if t >= BURN_IN {
            let x =
                symbols[t..t + depth].iter().rev().fold(0.0, |acc, &s| edges[s as usize] + widths[s as usize] * acc);
            out.push(x);
            out.push(y);
        }
        y = offsets[i] + p.contractions[i] * y;
    }
    out
}
