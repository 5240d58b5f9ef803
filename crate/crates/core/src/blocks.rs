//! Greedy partitions of the primes into blocks `(λ_{j−1}, λ_j]` whose
//! weighted reciprocal sums stay under a budget of `log 2`.
//!
//! The `D` family uses weight `1/p` and numbers blocks from 1; the `E`
//! family for a given `P` uses `p^{−(1−1/log P)}` and numbers blocks from 0.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::primes::{factorize_trial, SegmentedSieve};

// log 2 as an unevaluated double-double
const LN2_HI: f64 = LN_2;
const LN2_LO: f64 = 2.319_046_813_846_299_6e-17;

/// Standard seed boundary `λ₀`.
pub const DEFAULT_LAMBDA0: f64 = 1.9;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl DoubleDouble {
    fn add(self, hi: f64, lo: f64) -> Self {
        let s = self.hi + hi;
        let bb = s - self.hi;
        let err = (self.hi - (s - bb)) + (hi - bb);
        let lo = self.lo + lo + err;
        let h = s + lo;
        DoubleDouble {
            hi: h,
            lo: lo - (h - s),
        }
    }

    /// `self − (hi + lo)` rounded to `f64`.
    fn minus(self, hi: f64, lo: f64) -> f64 {
        (self.hi - hi) + (self.lo - lo)
    }
}

/// `p^{−(1−α)}` as a double-double. For `α = 0` the reciprocal is split
/// exactly with an FMA residual.
fn weight(p: u64, alpha: f64) -> (f64, f64) {
    let pf = p as f64;
    if alpha == 0.0 {
        let q = 1.0 / pf;
        let r = (-q).mul_add(pf, 1.0);
        (q, r / pf)
    } else {
        (pf.powf(alpha - 1.0), 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrimePartition {
    lambda0: f64,
    lambdas: Vec<u64>,
    block_sums: Vec<f64>,
    weight_alpha: f64,
    budget: f64,
    first_index: usize,
    limit: u64,
    /// The last block reached `limit` before its budget was exhausted.
    last_truncated: bool,
    /// Blocks consisting of one prime whose weight alone exceeds the budget.
    overfull: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockRow {
    pub j: usize,
    pub lambda: u64,
    pub block_sum: f64,
    /// `log₂(log λ_j) − j`.
    pub deviation: f64,
}

fn is_prime(n: u64) -> bool {
    n >= 2 && factorize_trial(n).is_ok_and(|f| f.factors() == [(n, 1)])
}

fn next_prime_after(n: u64) -> u64 {
    let mut m = n + 1;
    while !is_prime(m) {
        m += 1;
    }
    m
}

/// `D`-style partition (blocks numbered from 1) of the primes in `(λ₀, limit]`.
pub fn build_partition(limit: u64, weight_alpha: f64, lambda0: f64) -> Result<PrimePartition> {
    build_indexed(limit, weight_alpha, lambda0, 1)
}

/// `E`-partition of the primes `≤ P`: weight `p^{−(1−1/log P)}`, blocks
/// numbered from 0.
pub fn build_e_partition(p_max: u64) -> Result<PrimePartition> {
    if p_max < 3 {
        return Err(Error::range("P", p_max, "≥ 3"));
    }
    build_indexed(p_max, 1.0 / (p_max as f64).ln(), DEFAULT_LAMBDA0, 0)
}

fn build_indexed(limit: u64, weight_alpha: f64, lambda0: f64, first_index: usize) -> Result<PrimePartition> {
    if limit < 2 {
        return Err(Error::range("limit", limit, "≥ 2"));
    }
    if !(0.0..1.0).contains(&weight_alpha) {
        return Err(Error::range("weight_alpha", weight_alpha, "[0, 1)"));
    }
    if !(lambda0 >= 0.0) || !lambda0.is_finite() {
        return Err(Error::range("lambda0", lambda0, "finite and ≥ 0"));
    }
    let start = lambda0.floor() as u64 + 1;
    let mut lambdas = Vec::new();
    let mut block_sums = Vec::new();
    let mut overfull = Vec::new();
    let mut acc = DoubleDouble::default();
    let mut last: Option<u64> = None;
    for p in SegmentedSieve::new(start, limit)? {
        let (wh, wl) = weight(p, weight_alpha);
        let trial = acc.add(wh, wl);
        if trial.minus(LN2_HI, LN2_LO) <= 0.0 {
            acc = trial;
            last = Some(p);
            continue;
        }
        match last {
            Some(q) => {
                lambdas.push(q);
                block_sums.push(acc.hi + acc.lo);
                overfull.push(false);
                let fresh = DoubleDouble::default().add(wh, wl);
                if fresh.minus(LN2_HI, LN2_LO) > 0.0 {
                    // a single prime over budget forms its own block
                    lambdas.push(p);
                    block_sums.push(fresh.hi + fresh.lo);
                    overfull.push(true);
                    acc = DoubleDouble::default();
                    last = None;
                } else {
                    acc = fresh;
                    last = Some(p);
                }
            }
            None => {
                lambdas.push(p);
                block_sums.push(trial.hi + trial.lo);
                overfull.push(true);
                acc = DoubleDouble::default();
            }
        }
    }
    let mut last_truncated = false;
    if let Some(q) = last {
        let (wh, wl) = weight(next_prime_after(limit), weight_alpha);
        last_truncated = acc.add(wh, wl).minus(LN2_HI, LN2_LO) <= 0.0;
        lambdas.push(q);
        block_sums.push(acc.hi + acc.lo);
        overfull.push(false);
    }
    Ok(PrimePartition {
        lambda0,
        lambdas,
        block_sums,
        weight_alpha,
        budget: LN_2,
        first_index,
        limit,
        last_truncated,
        overfull,
    })
}

impl PrimePartition {
    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    /// Block boundaries `λ_j`, in block order.
    pub fn lambdas(&self) -> &[u64] {
        &self.lambdas
    }

    pub fn block_sums(&self) -> &[f64] {
        &self.block_sums
    }

    pub fn weight_alpha(&self) -> f64 {
        self.weight_alpha
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    /// Index of the first block (1 for `D`, 0 for `E`).
    pub fn first_index(&self) -> usize {
        self.first_index
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn last_truncated(&self) -> bool {
        self.last_truncated
    }

    pub fn is_overfull(&self, block_pos: usize) -> bool {
        self.overfull[block_pos]
    }

    /// `λ_j` by block index.
    pub fn lambda(&self, j: usize) -> Option<u64> {
        j.checked_sub(self.first_index).and_then(|i| self.lambdas.get(i).copied())
    }

    pub fn rows(&self) -> impl Iterator<Item = BlockRow> + '_ {
        self.lambdas.iter().zip(&self.block_sums).enumerate().map(|(i, (&lambda, &block_sum))| {
            let j = i + self.first_index;
            BlockRow {
                j,
                lambda,
                block_sum,
                deviation: (lambda as f64).ln().log2() - j as f64,
            }
        })
    }

    /// The unique `j` with `λ_{j−1} < p ≤ λ_j`.
    pub fn block_index(&self, p: u64) -> Result<usize> {
        let last = self.lambdas.last().copied().unwrap_or(0);
        if (p as f64) <= self.lambda0 || p > last {
            return Err(Error::range("p", p, format!("({}, {last}]", self.lambda0)));
        }
        Ok(self.lambdas.partition_point(|&l| l < p) + self.first_index)
    }
}

/// `max_j |log₂(log λ_j) − j|` over every block of the partition.
pub fn empirical_k(partition: &PrimePartition) -> Result<f64> {
    if partition.len() < 3 {
        return Err(Error::arg(format!(
            "need at least 3 blocks, partition has {}",
            partition.len()
        )));
    }
    Ok(partition.rows().map(|r| r.deviation.abs()).fold(0.0, f64::max))
}

pub fn block_index(p: u64, partition: &PrimePartition) -> Result<usize> {
    partition.block_index(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_boundaries() {
        let d = build_partition(100, 0.0, DEFAULT_LAMBDA0).unwrap();
        assert_eq!(d.lambda(1), Some(2));
        assert_eq!(d.lambda(2), Some(7));
        assert_eq!(d.lambda(0), None);
        assert!(d.last_truncated());
    }

    #[test]
    fn half_weight_blocks_from_hand_sums() {
        // 2^{-1/2} ≈ 0.7071 > log 2, 3^{-1/2} + 5^{-1/2} ≈ 1.025 > log 2,
        // 5^{-1/2} + 7^{-1/2} ≈ 0.825 > log 2: every prime is its own block.
        let p = build_partition(10, 0.5, DEFAULT_LAMBDA0).unwrap();
        assert_eq!(p.lambdas(), &[2, 3, 5, 7]);
        assert!(p.is_overfull(0));
        assert!(!p.is_overfull(1));
        assert!((p.block_sums()[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn deviation_terms() {
        let d = build_partition(100, 0.0, DEFAULT_LAMBDA0).unwrap();
        let rows: Vec<BlockRow> = d.rows().collect();
        assert!((rows[0].deviation.abs() - 1.529).abs() < 1e-3);
        assert!((rows[1].deviation.abs() - 1.040).abs() < 1e-3);
    }

    #[test]
    fn block_membership() {
        let d = build_partition(1000, 0.0, DEFAULT_LAMBDA0).unwrap();
        assert_eq!(d.block_index(2).unwrap(), 1);
        assert_eq!(d.block_index(5).unwrap(), 2);
        assert_eq!(d.block_index(7).unwrap(), 2);
        assert_eq!(d.block_index(11).unwrap(), 3);
        assert!(d.block_index(1).is_err());
        assert!(d.block_index(1009).is_err());
    }

    #[test]
    fn e_partition_starts_at_zero() {
        let e = build_e_partition(10_000).unwrap();
        assert_eq!(e.first_index(), 0);
        assert_eq!(e.block_index(2).unwrap(), 0);
        assert!(build_e_partition(2).is_err());
    }

    #[test]
    fn empirical_k_needs_three_blocks() {
        let d = build_partition(7, 0.0, DEFAULT_LAMBDA0).unwrap();
        assert!(empirical_k(&d).is_err());
        let d = build_partition(1000, 0.0, DEFAULT_LAMBDA0).unwrap();
        assert!(empirical_k(&d).unwrap() >= 1.528);
    }

    #[test]
    fn argument_validation() {
        assert!(build_partition(1, 0.0, 1.9).is_err());
        assert!(build_partition(10, 1.0, 1.9).is_err());
        assert!(build_partition(10, 0.0, f64::NAN).is_err());
    }
}
