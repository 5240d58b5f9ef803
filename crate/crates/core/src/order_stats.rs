//! Barrier probabilities for uniform order statistics.
//!
//! `Q_k(u, v)` is the probability that the order statistics `ξ₁ ≤ ⋯ ≤ ξ_k`
//! of `k` iid uniforms satisfy `ξ_i ≥ (i − u)/v` for every `i`. The exact
//! evaluator works on counts: `ξ_i ≥ c` iff fewer than `i` samples fall
//! below `c`, so the event is a set of upper bounds on the empirical count
//! process at the distinct thresholds. Monte-Carlo estimators cover the
//! simplex integrals `k!·U_k(v)` and `k!·Vol 𝒯(k, v, γ)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Largest `k` accepted by [`q_exact`].
pub const MAX_EXACT_K: usize = 2000;

/// Largest `k` accepted by [`q_oracle`].
pub const MAX_ORACLE_K: usize = 8;

pub const MIN_MC_SAMPLES: u64 = 1000;

pub const DEFAULT_CHUNK: u64 = 1 << 14;

/// Thresholds `c₁ ≤ ⋯ ≤ c_k` in `[0, 1]`, optionally generated by `(k, u, v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Boundary {
    thresholds: Vec<f64>,
    generator: Option<(f64, f64)>,
    /// Some raw threshold exceeded 1 before clamping.
    clamped_above: bool,
}

impl Boundary {
    /// `c_i = (i − u)/v`, clamped to `[0, 1]`.
    pub fn from_kuv(k: usize, u: f64, v: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::range("k", k, "≥ 1"));
        }
        if !u.is_finite() || !(v > 0.0) || !v.is_finite() {
            return Err(Error::arg(format!("need finite u and v > 0, got u = {u}, v = {v}")));
        }
        let raw = (1..=k).map(|i| (i as f64 - u) / v);
        let mut b = Self::clamp(raw.collect());
        b.generator = Some((u, v));
        Ok(b)
    }

    /// Explicit thresholds; must be nondecreasing and not NaN.
    pub fn from_thresholds(raw: Vec<f64>) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::arg("boundary needs at least one threshold"));
        }
        if raw.iter().any(|c| c.is_nan()) {
            return Err(Error::arg("threshold is NaN"));
        }
        if raw.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::arg("thresholds must be nondecreasing"));
        }
        Ok(Self::clamp(raw))
    }

    fn clamp(raw: Vec<f64>) -> Self {
        let clamped_above = raw.iter().any(|&c| c > 1.0);
        Self {
            thresholds: raw.into_iter().map(|c| c.clamp(0.0, 1.0)).collect(),
            generator: None,
            clamped_above,
        }
    }

    pub fn k(&self) -> usize {
        self.thresholds.len()
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    /// `(u, v)` when built by [`Boundary::from_kuv`].
    pub fn generator(&self) -> Option<(f64, f64)> {
        self.generator
    }

    pub fn clamped_above(&self) -> bool {
        self.clamped_above
    }

    /// Whether sorted samples satisfy every threshold.
    pub fn admits(&self, sorted: &[f64]) -> bool {
        sorted.iter().zip(&self.thresholds).all(|(x, c)| x >= c)
    }
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(0.0);
    let mut acc = 0.0;
    for i in 1..=n {
        acc += (i as f64).ln();
        out.push(acc);
    }
    out
}

/// Exact `P(ξ_i ≥ c_i ∀i)` by a dynamic program over the number of samples
/// below each distinct threshold.
///
/// Between consecutive thresholds `t < c`, given `s` samples below `t`, the
/// count landing in `[t, c)` is `Binomial(k − s, (c − t)/(1 − t))`. States are
/// truncated to the allowed counts after each step. Weights are evaluated in
/// log space, so nothing underflows before it is negligible.
pub fn q_exact(bound: &Boundary) -> Result<f64> {
    let k = bound.k();
    if k > MAX_EXACT_K {
        return Err(Error::Resource {
            what: "order statistics k",
            requested: k as u64,
            cap: MAX_EXACT_K as u64,
        });
    }
    let cs = bound.thresholds();
    if cs.iter().any(|&c| c >= 1.0) {
        // ξ_i ≥ 1 has probability zero
        return Ok(0.0);
    }
    // (threshold, max samples allowed strictly below it); the first index
    // at a repeated threshold is the binding one
    let mut steps: Vec<(f64, usize)> = Vec::new();
    for (i, &c) in cs.iter().enumerate() {
        if c <= 0.0 {
            continue;
        }
        match steps.last() {
            Some(&(prev, _)) if prev == c => {}
            _ => steps.push((c, i)),
        }
    }
    let lnf = ln_factorials(k);
    let mut dist = vec![0.0f64; k + 1];
    dist[0] = 1.0;
    let mut support = 0usize;
    let mut t = 0.0f64;
    let mut next = vec![0.0f64; k + 1];
    for &(c, cap) in &steps {
        let q = (c - t) / (1.0 - t);
        let ln_q = q.ln();
        let ln_1mq = (-q).ln_1p();
        let new_support = cap.min(k);
        next[..=new_support].iter_mut().for_each(|x| *x = 0.0);
        for s in 0..=support.min(new_support) {
            let mass = dist[s];
            if mass == 0.0 {
                continue;
            }
            let n = k - s;
            let base = lnf[n] + n as f64 * ln_1mq;
            let odds = ln_q - ln_1mq;
            for r in 0..=(new_support - s) {
                let lp = base - lnf[r] - lnf[n - r] + r as f64 * odds;
                next[s + r] += mass * lp.exp();
            }
        }
        std::mem::swap(&mut dist, &mut next);
        support = new_support;
        t = c;
    }
    let total: f64 = dist[..=support].iter().sum();
    Ok(total.clamp(0.0, 1.0))
}

/// `Q_k(u, v)`.
pub fn q_exact_kuv(k: usize, u: f64, v: f64) -> Result<f64> {
    q_exact(&Boundary::from_kuv(k, u, v)?)
}

/// Exact rational `P(ξ_i ≥ c_i ∀i)` by iterated polynomial integration.
///
/// With `G_i(x) = Vol{c_j ≤ ξ_j, ξ₁ ≤ ⋯ ≤ ξ_i ≤ x}`, thresholds being
/// nondecreasing makes `G_{i−1}` a single polynomial on `[c_i, 1]`, so
/// `G_i(x) = ∫_{c_i}^x G_{i−1}` and the answer is `k!·G_k(1)`.
pub fn q_oracle(thresholds: &[BigRational]) -> Result<BigRational> {
    let k = thresholds.len();
    if k > MAX_ORACLE_K {
        return Err(Error::OracleLimit(format!("k = {k} > {MAX_ORACLE_K}")));
    }
    if thresholds.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::arg("thresholds must be nondecreasing"));
    }
    let zero = BigRational::zero();
    let one = BigRational::one();
    // coefficients, lowest degree first
    let mut poly: Vec<BigRational> = vec![one.clone()];
    for c in thresholds {
        let c = if c.is_negative() {
            zero.clone()
        } else if *c > one {
            one.clone()
        } else {
            c.clone()
        };
        let mut anti = vec![zero.clone()];
        for (d, coef) in poly.iter().enumerate() {
            anti.push(coef / BigRational::from_integer(BigInt::from(d + 1)));
        }
        let at_c = eval(&anti, &c);
        anti[0] -= at_c;
        poly = anti;
    }
    let fact: BigInt = (1..=k).map(BigInt::from).product();
    Ok(eval(&poly, &one) * BigRational::from_integer(fact))
}

fn eval(poly: &[BigRational], x: &BigRational) -> BigRational {
    poly.iter()
        .rev()
        .fold(BigRational::zero(), |acc, coef| acc * x + coef)
}

/// `Q_k(u, v)` with exact rational thresholds `(i − u)/v`.
pub fn q_oracle_kuv(k: usize, u: &BigRational, v: &BigRational) -> Result<BigRational> {
    if !v.is_positive() {
        return Err(Error::arg("v must be positive"));
    }
    let cs: Vec<BigRational> = (1..=k)
        .map(|i| (BigRational::from_integer(BigInt::from(i)) - u) / v)
        .collect();
    q_oracle(&cs)
}

/// `1 − e^{−2x²}`.
pub fn smirnov_limit(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::range("x", x, "finite and > 0"));
    }
    Ok(-(-2.0 * x * x).exp_m1())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    pub chunk: u64,
}

impl McConfig {
    pub fn new(samples: u64, seed: u64) -> Self {
        Self {
            samples,
            seed,
            chunk: DEFAULT_CHUNK,
        }
    }

    pub fn with_chunk(mut self, chunk: u64) -> Self {
        self.chunk = chunk;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.samples < MIN_MC_SAMPLES {
            return Err(Error::range("samples", self.samples, format!("≥ {MIN_MC_SAMPLES}")));
        }
        if self.chunk == 0 {
            return Err(Error::range("chunk", 0, "≥ 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    /// Sample standard deviation over `√samples`.
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
    pub chunk: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        let mean = self.mean + d * other.n as f64 / n as f64;
        let m2 = self.m2 + other.m2 + d * d * (self.n as f64 * other.n as f64) / n as f64;
        Moments { n, mean, m2 }
    }
}

/// Runs `eval` on sorted uniform `k`-vectors. Chunk `i` draws from the ChaCha
/// stream `i` of the master seed and chunks are merged in index order, so
/// the estimate depends on `(seed, chunk, samples)` only.
fn mc_sorted<F>(k: usize, cfg: &McConfig, eval: F) -> Result<McEstimate>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    cfg.validate()?;
    let chunks = cfg.samples.div_ceil(cfg.chunk);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|ci| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(ci);
            let n = cfg.chunk.min(cfg.samples - ci * cfg.chunk);
            let mut buf = vec![0.0f64; k];
            let mut m = Moments::default();
            for _ in 0..n {
                for x in buf.iter_mut() {
                    *x = rng.random::<f64>();
                }
                buf.sort_unstable_by(f64::total_cmp);
                m.push(eval(&buf));
            }
            m
        })
        .collect();
    let m = parts.into_iter().fold(Moments::default(), Moments::merge);
    let var = if m.n > 1 { m.m2 / (m.n - 1) as f64 } else { 0.0 };
    Ok(McEstimate {
        mean: m.mean,
        stderr: (var / m.n as f64).sqrt(),
        samples: cfg.samples,
        seed: cfg.seed,
        chunk: cfg.chunk,
    })
}

/// Monte-Carlo estimate of the barrier probability.
pub fn q_mc(bound: &Boundary, cfg: &McConfig) -> Result<McEstimate> {
    mc_sorted(bound.k(), cfg, |xs| if bound.admits(xs) { 1.0 } else { 0.0 })
}

/// `min_{0≤j≤k} 2^{−j}(2^{vξ₁} + ⋯ + 2^{vξ_j} + 1)` for sorted `xs`.
pub fn u_statistic(xs: &[f64], v: f64) -> f64 {
    // s_j = s_{j−1}/2 + 2^{vξ_j − j} keeps every term in range
    let mut s = 1.0f64;
    let mut best = 1.0f64;
    for (j, &x) in xs.iter().enumerate() {
        s = 0.5 * s + (v * x - (j + 1) as f64).exp2();
        best = best.min(s);
    }
    best
}

/// Whether sorted `xs` lies in `𝒯(k, v, γ)`:
/// `2^{vξ₁} + ⋯ + 2^{vξ_j} ≥ 2^{j−γ}` for every `j`.
pub fn in_t_region(xs: &[f64], v: f64, gamma: f64) -> bool {
    let mut s = 0.0f64;
    for (j, &x) in xs.iter().enumerate() {
        s = 0.5 * s + (v * x - (j + 1) as f64 + gamma).exp2();
        if s < 1.0 {
            return false;
        }
    }
    true
}

/// Estimates `k!·U_k(v) = E min_j 2^{−j}(2^{vξ₁} + ⋯ + 2^{vξ_j} + 1)`.
pub fn u_statistic_mc(k: usize, v: u64, cfg: &McConfig) -> Result<McEstimate> {
    if k < 1 || k as u64 > 10 * v {
        return Err(Error::arg(format!("need 1 ≤ k ≤ 10v, got k = {k}, v = {v}")));
    }
    let vf = v as f64;
    mc_sorted(k, cfg, |xs| u_statistic(xs, vf))
}

/// Estimates `k!·Vol 𝒯(k, v, γ)`.
pub fn vol_t_mc(k: usize, v: u64, gamma: u64, cfg: &McConfig) -> Result<McEstimate> {
    if k < 1 {
        return Err(Error::range("k", k, "≥ 1"));
    }
    let (vf, gf) = (v as f64, gamma as f64);
    mc_sorted(k, cfg, |xs| if in_t_region(xs, vf, gf) { 1.0 } else { 0.0 })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridEntry {
    /// `Q_k(u, v)·k / ((u+1)(w+1)²)`, `w = u + v − k`.
    LemmaQ { k: usize, u: f64, v: f64 },
    /// `k!U_k(v)·(k+1)(2^{k−v}+1) / (1 + |v−k|²)`.
    Unlem { k: usize, v: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioEntry {
    pub entry: GridEntry,
    /// `Q_k(u,v)` or the estimate of `k!U_k(v)`.
    pub value: Option<f64>,
    pub stderr: Option<f64>,
    pub ratio: Option<f64>,
    /// Inside the parameter range the bound's argument is carried out in
    /// (`k ≥ 100`, `u ≤ k/10`, `w ≤ √k` for `Q`; `1 ≤ k ≤ 10v` for `U`).
    pub in_regime: bool,
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioReport {
    pub entries: Vec<RatioEntry>,
    pub max_lemma_q: Option<f64>,
    pub max_unlem: Option<f64>,
}

pub fn lemma_q_ratio(k: usize, u: f64, v: f64, q: f64) -> f64 {
    let w = u + v - k as f64;
    q * k as f64 / ((u + 1.0) * (w + 1.0).powi(2))
}

pub fn unlem_ratio(k: usize, v: u64, mean: f64) -> f64 {
    let b = k as f64 - v as f64;
    mean * (k as f64 + 1.0) * (b.exp2() + 1.0) / (1.0 + b * b)
}

/// Evaluates each grid entry; entries violating their preconditions are
/// skipped with a reason rather than failing the whole grid.
pub fn bound_ratios(grid: &[GridEntry], mc: &McConfig) -> Result<RatioReport> {
    let mut entries = Vec::with_capacity(grid.len());
    for &entry in grid {
        let skip = |why: String| RatioEntry {
            entry,
            value: None,
            stderr: None,
            ratio: None,
            in_regime: false,
            skipped: Some(why),
        };
        match entry {
            GridEntry::LemmaQ { k, u, v } => {
                let w = u + v - k as f64;
                if k == 0 || k > MAX_EXACT_K {
                    entries.push(skip(format!("k = {k} outside 1..={MAX_EXACT_K}")));
                    continue;
                }
                if !(u >= 0.0) || !(w >= 0.0) || !(v > 0.0) {
                    entries.push(skip(format!("need u ≥ 0, w ≥ 0, v > 0 (u = {u}, w = {w}, v = {v})")));
                    continue;
                }
                let q = q_exact_kuv(k, u, v)?;
                entries.push(RatioEntry {
                    entry,
                    value: Some(q),
                    stderr: None,
                    ratio: Some(lemma_q_ratio(k, u, v, q)),
                    in_regime: k >= 100 && u <= k as f64 / 10.0 && w <= (k as f64).sqrt(),
                    skipped: None,
                });
            }
            GridEntry::Unlem { k, v } => {
                if k < 1 || k as u64 > 10 * v {
                    entries.push(skip(format!("need 1 ≤ k ≤ 10v (k = {k}, v = {v})")));
                    continue;
                }
                let est = u_statistic_mc(k, v, mc)?;
                entries.push(RatioEntry {
                    entry,
                    value: Some(est.mean),
                    stderr: Some(est.stderr),
                    ratio: Some(unlem_ratio(k, v, est.mean)),
                    in_regime: true,
                    skipped: None,
                });
            }
        }
    }
    let max_of = |want_q: bool| {
        entries
            .iter()
            .filter(|e| matches!(e.entry, GridEntry::LemmaQ { .. }) == want_q)
            .filter_map(|e| e.ratio)
            .reduce(f64::max)
    };
    let (max_lemma_q, max_unlem) = (max_of(true), max_of(false));
    Ok(RatioReport {
        entries,
        max_lemma_q,
        max_unlem,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn exact_small_cases() {
        assert!((q_exact_kuv(2, 1.0, 2.0).unwrap() - 0.75).abs() < 1e-15);
        assert!((q_exact_kuv(2, 1.0, 3.0).unwrap() - 8.0 / 9.0).abs() < 1e-15);
        assert_eq!(q_exact_kuv(5, 5.0, 0.3).unwrap(), 1.0);
        assert_eq!(q_exact_kuv(1, 0.0, 1.0).unwrap(), 0.0);
        assert_eq!(q_exact_kuv(3, 0.0, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn oracle_small_cases() {
        assert_eq!(q_oracle_kuv(2, &rat(1, 1), &rat(2, 1)).unwrap(), rat(3, 4));
        assert_eq!(q_oracle_kuv(2, &rat(1, 1), &rat(3, 1)).unwrap(), rat(8, 9));
        assert_eq!(q_oracle_kuv(3, &rat(3, 1), &rat(1, 1)).unwrap(), rat(1, 1));
        assert_eq!(q_oracle_kuv(1, &rat(0, 1), &rat(1, 1)).unwrap(), rat(0, 1));
        assert!(q_oracle(&vec![rat(0, 1); 9]).is_err());
        assert!(q_oracle(&[rat(1, 2), rat(1, 3)]).is_err());
    }

    #[test]
    fn boundary_validation_and_roundtrip() {
        let b = Boundary::from_kuv(4, 1.0, 2.0).unwrap();
        assert_eq!(b.thresholds(), &[0.0, 0.5, 1.0, 1.0]);
        assert!(b.clamped_above());
        assert_eq!(b.generator(), Some((1.0, 2.0)));
        assert!(Boundary::from_kuv(0, 1.0, 2.0).is_err());
        assert!(Boundary::from_kuv(2, 1.0, 0.0).is_err());
        assert!(Boundary::from_thresholds(vec![0.5, 0.2]).is_err());
        assert!(Boundary::from_thresholds(vec![]).is_err());
        assert!(Boundary::from_thresholds(vec![f64::NAN]).is_err());
        assert_eq!(Boundary::from_thresholds(vec![-1.0, 0.3]).unwrap().thresholds(), &[0.0, 0.3]);
    }

    #[test]
    fn exact_rejects_over_cap() {
        let b = Boundary::from_kuv(MAX_EXACT_K + 1, 0.0, 1e9).unwrap();
        assert!(matches!(q_exact(&b), Err(Error::Resource { .. })));
    }

    #[test]
    fn smirnov_values() {
        assert!((smirnov_limit(0.5).unwrap() - 0.393469).abs() < 1e-6);
        assert!((smirnov_limit(1.0).unwrap() - 0.864665).abs() < 1e-6);
        assert!(smirnov_limit(1e-9).unwrap() < 1e-17);
        assert!(smirnov_limit(0.0).is_err());
    }

    #[test]
    fn mc_is_deterministic_and_consistent() {
        let b = Boundary::from_kuv(2, 1.0, 2.0).unwrap();
        let cfg = McConfig::new(200_000, 7).with_chunk(5000);
        let e1 = q_mc(&b, &cfg).unwrap();
        let e2 = q_mc(&b, &cfg).unwrap();
        assert_eq!(e1.mean.to_bits(), e2.mean.to_bits());
        assert!((e1.mean - 0.75).abs() <= 4.0 * e1.stderr);
        let sure = Boundary::from_kuv(3, 3.0, 1.0).unwrap();
        let e = q_mc(&sure, &cfg).unwrap();
        assert_eq!((e.mean, e.stderr), (1.0, 0.0));
        assert!(q_mc(&b, &McConfig::new(10, 1)).is_err());
        assert!(q_mc(&b, &McConfig::new(1000, 1).with_chunk(0)).is_err());
    }

    #[test]
    fn u_statistic_trivial_k1() {
        let e = u_statistic_mc(1, 3, &McConfig::new(5000, 1)).unwrap();
        assert_eq!(e.mean, 1.0);
        assert!(u_statistic_mc(0, 3, &McConfig::new(5000, 1)).is_err());
        assert!(u_statistic_mc(31, 3, &McConfig::new(5000, 1)).is_err());
    }

    #[test]
    fn u_statistic_direct() {
        // xs = (0, 0): j = 2 term is (1 + 1 + 1)/4
        assert!((u_statistic(&[0.0, 0.0], 1.0) - 0.75).abs() < 1e-15);
        assert_eq!(u_statistic(&[1.0, 1.0], 5.0), 1.0);
    }

    #[test]
    fn vol_t_trivial_cases() {
        let cfg = McConfig::new(5000, 3);
        assert_eq!(vol_t_mc(4, 2, 4, &cfg).unwrap().mean, 1.0);
        assert_eq!(vol_t_mc(1, 1, 0, &cfg).unwrap().mean, 0.0);
        assert!(in_t_region(&[0.5, 0.6], 2.0, 0.0));
        assert!(!in_t_region(&[0.4, 0.9], 2.0, 0.0));
    }

    #[test]
    fn ratio_examples() {
        let cfg = McConfig::new(2000, 1);
        let r = bound_ratios(
            &[
                GridEntry::LemmaQ { k: 100, u: 100.0, v: 1.0 },
                GridEntry::LemmaQ { k: 10, u: 0.0, v: 5.0 },
                GridEntry::Unlem { k: 1, v: 1 },
                GridEntry::Unlem { k: 30, v: 2 },
            ],
            &cfg,
        )
        .unwrap();
        let first = r.entries[0].ratio.unwrap();
        assert!((first - 100.0 / (101.0 * 4.0)).abs() < 1e-15);
        assert!(r.entries[1].skipped.is_some());
        assert_eq!(r.entries[2].value, Some(1.0));
        assert!(r.entries[3].skipped.is_some());
        assert_eq!(r.max_lemma_q, Some(first));
    }
}
