//! Divisor clustering: `L(a) = meas ⋃_{d|a} [log d − log 2, log d)`, the
//! close-pair count `W(a)`, and truncated sums of `L(a)/a`.

use std::f64::consts::LN_2;

use crate::accum::CompensatedSum;
use crate::error::{Error, Result};
use crate::primes::{factorize_trial, par_smooth_fold, Factorization, PrimeBound, PrimeTable};

/// Largest `τ(a)` accepted by [`cluster_set`].
pub const MAX_DIVISORS: u64 = 1 << 24;

/// Largest input length for [`subsetsum_measure`].
pub const MAX_SUBSET_TERMS: usize = 24;

const MERGE_TOL: f64 = 1e-12;

/// Sorted, disjoint, half-open real intervals. Intervals that touch are
/// stored as one.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IntervalUnion {
    intervals: Vec<(f64, f64)>,
    measure: f64,
}

impl IntervalUnion {
    /// Normalizes an arbitrary collection of `[start, end)` pairs. Empty and
    /// reversed pairs are dropped.
    pub fn from_intervals<I: IntoIterator<Item = (f64, f64)>>(iter: I) -> Self {
        let mut raw: Vec<(f64, f64)> = iter.into_iter().filter(|(s, e)| e > s).collect();
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
        for (s, e) in raw {
            match out.last_mut() {
                Some(last) if s <= last.1 + MERGE_TOL * last.1.abs().max(1.0) => {
                    last.1 = last.1.max(e);
                }
                _ => out.push((s, e)),
            }
        }
        Self::from_sorted_runs(out)
    }

    fn from_sorted_runs(intervals: Vec<(f64, f64)>) -> Self {
        let measure = intervals.iter().map(|(s, e)| e - s).collect::<CompensatedSum>().value();
        Self { intervals, measure }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn measure(&self) -> f64 {
        self.measure
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterStats {
    pub a: u64,
    pub union: IntervalUnion,
    pub l: f64,
    pub w: u64,
    pub tau: u64,
}

/// Builds `𝓛(a)`, `L(a)` and `W(a)`.
///
/// Consecutive divisors `d < d'` have overlapping or touching intervals iff
/// `d' ≤ 2d`, so runs are decided on integers and only their lengths are
/// floating point. `W` counts ordered pairs with `max ≤ 2·min`, inclusive.
pub fn cluster_set(a: &Factorization) -> Result<ClusterStats> {
    let tau = a.tau();
    if tau > MAX_DIVISORS {
        return Err(Error::Resource {
            what: "divisors",
            requested: tau,
            cap: MAX_DIVISORS,
        });
    }
    let divs = a.divisors()?;
    let close = |lo: u64, hi: u64| (hi as u128) <= 2 * lo as u128;

    let mut runs = Vec::new();
    let mut lengths = CompensatedSum::new();
    let mut run_start = divs[0];
    for pair in divs.windows(2) {
        if !close(pair[0], pair[1]) {
            runs.push(run_interval(run_start, pair[0]));
            lengths.add(run_length(run_start, pair[0]));
            run_start = pair[1];
        }
    }
    let last = *divs.last().expect("divisor list is never empty");
    runs.push(run_interval(run_start, last));
    lengths.add(run_length(run_start, last));

    let mut w = tau;
    let mut j = 0;
    for i in 0..divs.len() {
        j = j.max(i + 1);
        while j < divs.len() && close(divs[i], divs[j]) {
            j += 1;
        }
        w += 2 * (j - i - 1) as u64;
    }

    let l = lengths.value();
    Ok(ClusterStats {
        a: a.n(),
        union: IntervalUnion {
            intervals: runs,
            measure: l,
        },
        l,
        w,
        tau,
    })
}

fn run_interval(first: u64, last: u64) -> (f64, f64) {
    ((first as f64).ln() - LN_2, (last as f64).ln())
}

fn run_length(first: u64, last: u64) -> f64 {
    (last as f64 / first as f64).ln() + LN_2
}

/// `L(a)` alone.
pub fn cluster_measure(a: &Factorization) -> Result<f64> {
    Ok(cluster_set(a)?.l)
}

fn check_subset_terms(xs: &[f64], eta: f64) -> Result<()> {
    if xs.len() > MAX_SUBSET_TERMS {
        return Err(Error::Resource {
            what: "subset-sum terms",
            requested: xs.len() as u64,
            cap: MAX_SUBSET_TERMS as u64,
        });
    }
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::arg(format!("eta must be positive, got {eta}")));
    }
    if xs.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
        return Err(Error::arg("subset-sum terms must be finite and nonnegative"));
    }
    Ok(())
}

/// Measure of `⋃_{ε ∈ {0,1}^k} (Σ εᵢxᵢ − η, Σ εᵢxᵢ)`.
pub fn subsetsum_measure(xs: &[f64], eta: f64) -> Result<f64> {
    check_subset_terms(xs, eta)?;
    let mut sums = vec![0.0f64];
    for &x in xs {
        let len = sums.len();
        for i in 0..len {
            sums.push(sums[i] + x);
        }
    }
    sums.sort_by(f64::total_cmp);
    let mut total = CompensatedSum::new();
    let mut start = sums[0] - eta;
    let mut end = sums[0];
    for &s in &sums[1..] {
        if s - eta <= end {
            end = s;
        } else {
            total.add(end - start);
            start = s - eta;
            end = s;
        }
    }
    total.add(end - start);
    Ok(total.value())
}

/// `min_{0≤j≤k} 2^{k−j}(x₁ + ⋯ + x_j + η)` with `xs` sorted ascending.
pub fn subsetsum_bound(xs: &[f64], eta: f64) -> Result<f64> {
    check_subset_terms(xs, eta)?;
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let k = sorted.len() as i32;
    let mut best = f64::INFINITY;
    let mut prefix = 0.0;
    for j in 0..=k {
        if j > 0 {
            prefix += sorted[(j - 1) as usize];
        }
        best = best.min(2f64.powi(k - j) * (prefix + eta));
    }
    Ok(best)
}

/// Both sides of `log 2 ≤ L(a) ≤ min(τ(a) log 2, log 2 + log a)` and, for
/// squarefree `a = p₁⋯p_k`, of `L(a) ≤ min_j 2^{k−j}(log(p₁⋯p_j) + log 2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaLReport {
    pub a: u64,
    pub l: f64,
    /// `L(a) − log 2`.
    pub lower_margin: f64,
    pub bound_i: f64,
    pub margin_i: f64,
    pub bound_iii: Option<f64>,
    pub margin_iii: Option<f64>,
}

/// Margins below this count as violations.
pub const LEMMA_MARGIN_TOL: f64 = -1e-9;

impl LemmaLReport {
    pub fn holds(&self) -> bool {
        self.lower_margin >= LEMMA_MARGIN_TOL
            && self.margin_i >= LEMMA_MARGIN_TOL
            && self.margin_iii.is_none_or(|m| m >= LEMMA_MARGIN_TOL)
    }
}

pub fn lemma_l_check(a: &Factorization) -> Result<LemmaLReport> {
    let stats = cluster_set(a)?;
    let l = stats.l;
    let bound_i = (stats.tau as f64 * LN_2).min(LN_2 + (a.n() as f64).ln());
    let bound_iii = a.is_squarefree().then(|| {
        let logs: Vec<f64> = a.primes().map(|p| (p as f64).ln()).collect();
        // primes are already ascending
        let k = logs.len() as i32;
        let mut prefix = 0.0;
        let mut best = f64::INFINITY;
        for j in 0..=k {
            if j > 0 {
                prefix += logs[(j - 1) as usize];
            }
            best = best.min(2f64.powi(k - j) * (prefix + LN_2));
        }
        best
    });
    Ok(LemmaLReport {
        a: a.n(),
        l,
        lower_margin: l - LN_2,
        bound_i,
        margin_i: bound_i - l,
        bound_iii,
        margin_iii: bound_iii.map(|b| b - l),
    })
}

/// `(L(ab), τ(b)·L(a))` for coprime `a`, `b`.
pub fn lemma_l_product(a: &Factorization, b: &Factorization) -> Result<(f64, f64)> {
    let mut merged: Vec<(u64, u32)> = a.factors().iter().chain(b.factors()).copied().collect();
    merged.sort_unstable();
    if merged.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::arg(format!("{} and {} are not coprime", a.n(), b.n())));
    }
    let ab = Factorization::from_factors(merged)?;
    Ok((cluster_measure(&ab)?, b.tau() as f64 * cluster_measure(a)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LwAggregate {
    pub sum_l: f64,
    pub sum_tau: f64,
    pub sum_w: f64,
    pub holds: bool,
}

/// `Σ L(a)/a ≥ (Σ τ(a)/a)² / (6 Σ W(a)/a)` over a finite set (duplicates ignored).
pub fn aggregate_lw(set: &[u64]) -> Result<LwAggregate> {
    let mut items = set.to_vec();
    items.sort_unstable();
    items.dedup();
    if items.is_empty() {
        return Err(Error::arg("aggregate needs a nonempty set"));
    }
    if items[0] == 0 {
        return Err(Error::arg("set elements must be positive"));
    }
    let mut sl = CompensatedSum::new();
    let mut st = CompensatedSum::new();
    let mut sw = CompensatedSum::new();
    for &a in &items {
        let c = cluster_set(&factorize_trial(a)?)?;
        let af = a as f64;
        sl.add(c.l / af);
        st.add(c.tau as f64 / af);
        sw.add(c.w as f64 / af);
    }
    let (sum_l, sum_tau, sum_w) = (sl.value(), st.value(), sw.value());
    Ok(LwAggregate {
        sum_l,
        sum_tau,
        sum_w,
        holds: sum_l >= sum_tau * sum_tau / (6.0 * sum_w),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedT {
    pub sum: f64,
    /// `a_max^{−α}·Π_{p≤P}(1 + 2p^{α−1})` with `α = 1/log P`.
    pub tail_bound: f64,
    pub terms: u64,
}

/// `Σ L(a)/a` over squarefree `a ∈ [Q, a_max]` with `P⁺(a) ≤ P`, optionally
/// restricted to `ω(a) = k`.
pub fn trunc_t(smooth: u64, q: u64, k_filter: Option<usize>, a_max: u64) -> Result<TruncatedT> {
    if smooth < 2 {
        return Err(Error::range("P", smooth, "≥ 2"));
    }
    if q < 1 {
        return Err(Error::range("Q", q, "≥ 1"));
    }
    if a_max < 1 {
        return Err(Error::range("a_max", a_max, "≥ 1"));
    }
    let (sum, terms) = par_smooth_fold(
        smooth,
        q,
        a_max,
        |block| -> Result<(CompensatedSum, u64)> {
            let mut s = CompensatedSum::new();
            let mut n = 0;
            for f in block {
                if k_filter.is_some_and(|k| f.omega() != k) {
                    continue;
                }
                s.add(cluster_measure(f)? / f.n() as f64);
                n += 1;
            }
            Ok((s, n))
        },
        |acc, part| {
            let (mut s, n) = acc?;
            let (ps, pn) = part?;
            s.merge(&ps);
            Ok((s, n + pn))
        },
        Ok((CompensatedSum::new(), 0)),
    )??;

    let alpha = 1.0 / (smooth as f64).ln();
    let table = PrimeTable::new(smooth)?;
    let log_prod: CompensatedSum = table
        .primes()
        .iter()
        .map(|&p| (2.0 * (p as f64).powf(alpha - 1.0)).ln_1p())
        .collect();
    let tail_bound = (log_prod.value() - alpha * (a_max as f64).ln()).exp();
    Ok(TruncatedT {
        sum: sum.value(),
        tail_bound,
        terms,
    })
}

/// `Σ L(a) / (a log²(t/a + P⁺(a)))` over squarefree `a ≤ a_max` with `P⁺(a) ≤ t`.
pub fn trunc_s(t: f64, a_max: u64) -> Result<f64> {
    if !(t >= 16.0) || !t.is_finite() {
        return Err(Error::range("t", t, "≥ 16"));
    }
    if a_max < 1 {
        return Err(Error::range("a_max", a_max, "≥ 1"));
    }
    let smooth = t.floor() as u64;
    let total = par_smooth_fold(
        smooth,
        1,
        a_max,
        |block| -> Result<CompensatedSum> {
            let mut s = CompensatedSum::new();
            for f in block {
                let largest = match f.largest_prime() {
                    PrimeBound::Zero => 0.0,
                    PrimeBound::Prime(p) => p as f64,
                    PrimeBound::Infinite => unreachable!("P⁺ is never infinite"),
                };
                let a = f.n() as f64;
                let lg = (t / a + largest).ln();
                s.add(cluster_measure(f)? / (a * lg * lg));
            }
            Ok(s)
        },
        |acc, part| {
            let mut s = acc?;
            s.merge(&part?);
            Ok(s)
        },
        Ok(CompensatedSum::new()),
    )??;
    Ok(total.value())
}
