//! Exact counts of integers with a divisor in a window: `H(x, y, z)`, the
//! multiplication-table count `A(x)`, and normalized densities.
//!
//! Bulk counts mark every multiple of every window divisor in a bitset of
//! `x` bits. The bitset is filled in cache-sized blocks, in parallel; each
//! block is owned by one worker, so the count is independent of the worker
//! count.

use std::sync::OnceLock;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::primes::{factorize_trial, isqrt};

/// Default bitset cap: 2^31 bits (256 MiB).
pub const DEFAULT_MAX_BITS: u64 = 1 << 31;

/// Largest `x` for the per-`n` scan mode of [`count_window_oracle`].
pub const ORACLE_SCAN_MAX_X: u64 = 100_000;

/// Largest number of window integers for inclusion–exclusion in
/// [`count_window_oracle`].
pub const ORACLE_MAX_WINDOW: u64 = 64;

const BLOCK_WORDS: usize = 1 << 14;
const BLOCK_BITS: u64 = (BLOCK_WORDS as u64) * 64;

/// `δ = 1 − (1 + log log 2)/log 2`.
pub fn delta() -> f64 {
    let ln2 = std::f64::consts::LN_2;
    1.0 - (1.0 + ln2.ln()) / ln2
}

/// Count of `n ≤ x` having a divisor in the half-open window `(y, z]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowQuery {
    x: u64,
    y: f64,
    z: f64,
}

impl WindowQuery {
    pub fn new(x: u64, y: f64, z: f64) -> Result<Self> {
        if x == 0 {
            return Err(Error::range("x", x, "≥ 1"));
        }
        if !(y.is_finite() && z.is_finite()) || y < 0.0 {
            return Err(Error::arg(format!("window ({y}, {z}] must have finite endpoints with y ≥ 0")));
        }
        if y >= z {
            return Err(Error::arg(format!("empty window: y = {y} ≥ z = {z}")));
        }
        Ok(Self { x, y, z })
    }

    pub fn x(&self) -> u64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    /// Integer divisors in the window that can divide some `n ≤ x`, as an
    /// inclusive range `(lo, hi)`; `lo > hi` when there are none.
    pub fn divisor_range(&self) -> (u64, u64) {
        let lo = self.y.floor() as u64 + 1;
        let hi = (self.z.floor() as u64).min(self.x);
        (lo, hi)
    }
}

/// Number of divisors of `n` in `(y, z]`.
pub fn tau_window(n: u64, y: f64, z: f64) -> Result<u64> {
    if !(y > 0.0) || y >= z {
        return Err(Error::arg(format!("need 0 < y < z, got ({y}, {z}]")));
    }
    let divs = factorize_trial(n)?.divisors()?;
    Ok(divs.iter().filter(|&&d| (d as f64) > y && (d as f64) <= z).count() as u64)
}

fn check_cap(x: u64, max_bits: u64) -> Result<()> {
    if x > max_bits {
        return Err(Error::Resource {
            what: "bitset bits",
            requested: x,
            cap: max_bits,
        });
    }
    Ok(())
}

/// Allocates a bitset covering `0..=x`, fills each block in parallel with
/// `mark(block_lo, block_hi, words)` and returns the number of set bits.
fn parallel_mark<F>(x: u64, mark: F) -> u64
where
    F: Fn(u64, u64, &mut [u64]) + Sync,
{
    let words = (x / 64 + 1) as usize;
    let mut bits = vec![0u64; words];
    bits.par_chunks_mut(BLOCK_WORDS)
        .enumerate()
        .map(|(ci, chunk)| {
            let lo = ci as u64 * BLOCK_BITS;
            let hi = (lo + chunk.len() as u64 * 64).min(x + 1);
            mark(lo, hi, chunk);
            chunk.iter().map(|w| w.count_ones() as u64).sum::<u64>()
        })
        .sum()
}

#[inline]
fn set_bit(chunk: &mut [u64], lo: u64, m: u64) {
    let off = m - lo;
    chunk[(off >> 6) as usize] |= 1u64 << (off & 63);
}

/// `|{n ≤ x : ∃ d ∈ [dlo, dhi], d | n}|`, by bitset marking.
pub(crate) fn count_divisor_range(x: u64, dlo: u64, dhi: u64, max_bits: u64) -> Result<u64> {
    let dlo = dlo.max(1);
    let dhi = dhi.min(x);
    if dlo > dhi {
        return Ok(0);
    }
    check_cap(x, max_bits)?;
    Ok(parallel_mark(x, |lo, hi, chunk| {
        // small divisors: walk each divisor's multiples
        let small_end = dhi.min(BLOCK_BITS);
        for d in dlo..=small_end {
            if d >= hi {
                break;
            }
            let mut m = lo.div_ceil(d).max(1) * d;
            while m < hi {
                set_bit(chunk, lo, m);
                m += d;
            }
        }
        // large divisors: each has at most one multiple per block, so walk
        // the cofactor instead and sweep a contiguous run of divisors
        let big_lo = dlo.max(BLOCK_BITS + 1);
        if big_lo <= dhi && big_lo < hi {
            let kmax = (hi - 1) / big_lo;
            for k in 1..=kmax {
                let d_from = big_lo.max(lo.div_ceil(k));
                let d_to = dhi.min((hi - 1) / k);
                let mut d = d_from;
                while d <= d_to {
                    set_bit(chunk, lo, k * d);
                    d += 1;
                }
            }
        }
    }))
}

/// `H(x, y, z)` with the default bitset cap.
pub fn count_window(q: &WindowQuery) -> Result<u64> {
    count_window_with_cap(q, DEFAULT_MAX_BITS)
}

pub fn count_window_with_cap(q: &WindowQuery, max_bits: u64) -> Result<u64> {
    let (lo, hi) = q.divisor_range();
    count_divisor_range(q.x, lo, hi, max_bits)
}

/// Windows at most this wide always use inclusion–exclusion in the oracle.
const ORACLE_NARROW_WINDOW: u64 = 16;

/// Independent exact `H(x, y, z)`. Narrow windows use inclusion–exclusion
/// over the window divisors; wider ones a per-`n` divisor scan for
/// `x ≤` [`ORACLE_SCAN_MAX_X`], falling back to inclusion–exclusion for
/// windows of at most [`ORACLE_MAX_WINDOW`] integers.
pub fn count_window_oracle(q: &WindowQuery) -> Result<u64> {
    let (lo, hi) = q.divisor_range();
    if lo > hi {
        return Ok(0);
    }
    let width = hi - lo + 1;
    if width <= ORACLE_NARROW_WINDOW {
        Ok(inclusion_exclusion(q.x, lo, hi))
    } else if q.x <= ORACLE_SCAN_MAX_X {
        Ok(scan_count(q.x, lo, hi))
    } else if width <= ORACLE_MAX_WINDOW {
        Ok(inclusion_exclusion(q.x, lo, hi))
    } else {
        Err(Error::OracleLimit(format!(
            "window of {width} integers with x = {} > {ORACLE_SCAN_MAX_X}",
            q.x
        )))
    }
}

fn inclusion_exclusion(x: u64, lo: u64, hi: u64) -> u64 {
    // multiples of a multiple are already covered; keep the antichain
    let cand: Vec<u64> = (lo..=hi).collect();
    let gens: Vec<u64> = cand
        .iter()
        .copied()
        .filter(|&d| !cand.iter().any(|&e| e < d && d % e == 0))
        .collect();

    fn walk(gens: &[u64], start: usize, l: u128, depth: usize, x: u128, acc: &mut i128) {
        for i in start..gens.len() {
            let g = gens[i] as u128;
            let next = l / gcd128(l, g) * g;
            if next > x {
                continue;
            }
            let term = (x / next) as i128;
            if depth % 2 == 0 {
                *acc += term;
            } else {
                *acc -= term;
            }
            walk(gens, i + 1, next, depth + 1, x, acc);
        }
    }

    let mut acc = 0i128;
    walk(&gens, 0, 1, 0, x as u128, &mut acc);
    acc as u64
}

fn gcd128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Sorted divisor lists of every `n ≤ ORACLE_SCAN_MAX_X`, flattened.
struct DivisorTable {
    offsets: Vec<u32>,
    divisors: Vec<u32>,
}

impl DivisorTable {
    fn build(n: usize) -> Self {
        let mut counts = vec![0u32; n + 2];
        for d in 1..=n {
            for m in (d..=n).step_by(d) {
                counts[m + 1] += 1;
            }
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let mut fill = counts.clone();
        let mut divisors = vec![0u32; counts[n + 1] as usize];
        // d ascending, so each list comes out sorted
        for d in 1..=n {
            for m in (d..=n).step_by(d) {
                divisors[fill[m] as usize] = d as u32;
                fill[m] += 1;
            }
        }
        Self { offsets: counts, divisors }
    }

    fn of(&self, m: usize) -> &[u32] {
        &self.divisors[self.offsets[m] as usize..self.offsets[m + 1] as usize]
    }
}

fn divisor_table() -> &'static DivisorTable {
    static TABLE: OnceLock<DivisorTable> = OnceLock::new();
    TABLE.get_or_init(|| DivisorTable::build(ORACLE_SCAN_MAX_X as usize))
}

fn scan_count(x: u64, lo: u64, hi: u64) -> u64 {
    let table = divisor_table();
    let (lo, hi) = (lo as u32, hi.min(u32::MAX as u64) as u32);
    (1..=x as usize)
        .filter(|&m| {
            let divs = table.of(m);
            let i = divs.partition_point(|&d| d < lo);
            i < divs.len() && divs[i] <= hi
        })
        .count() as u64
}

/// `A(x)`: number of `n ≤ x` expressible as `m₁m₂` with `m₁, m₂ ≤ √x`.
pub fn mult_table_count(x: u64) -> Result<u64> {
    mult_table_count_with_cap(x, DEFAULT_MAX_BITS)
}

pub fn mult_table_count_with_cap(x: u64, max_bits: u64) -> Result<u64> {
    if x == 0 {
        return Err(Error::range("x", x, "≥ 1"));
    }
    check_cap(x, max_bits)?;
    let s = isqrt(x);
    Ok(parallel_mark(x, |lo, hi, chunk| {
        for m1 in 1..=s {
            if m1 * m1 >= hi {
                break;
            }
            let m2_from = m1.max(lo.div_ceil(m1));
            let m2_to = s.min((hi - 1) / m1);
            for m2 in m2_from..=m2_to {
                set_bit(chunk, lo, m1 * m2);
            }
        }
    }))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityPoint {
    pub x: u64,
    pub y: f64,
    pub h: u64,
    pub rho: f64,
}

/// `rho = h·(log y)^δ·(log log y)^{3/2}/x` for `h = H(x, y, 2y)`.
///
/// Requires `e^e < y ≤ √x`; `y ≥ x` is accepted and yields the empty window.
pub fn normalized_density(x: u64, y: f64) -> Result<DensityPoint> {
    normalized_density_with_cap(x, y, DEFAULT_MAX_BITS)
}

pub fn normalized_density_with_cap(x: u64, y: f64, max_bits: u64) -> Result<DensityPoint> {
    if x == 0 {
        return Err(Error::range("x", x, "≥ 1"));
    }
    if y >= x as f64 {
        return Ok(DensityPoint { x, y, h: 0, rho: 0.0 });
    }
    let ee = std::f64::consts::E.exp();
    if !(y > ee) || y > (x as f64).sqrt() {
        return Err(Error::range("y", y, format!("(e^e, √x] = ({ee:.4}, {}]", (x as f64).sqrt())));
    }
    let h = count_window_with_cap(&WindowQuery::new(x, y, 2.0 * y)?, max_bits)?;
    Ok(DensityPoint {
        x,
        y,
        h,
        rho: density_rho(x, y, h),
    })
}

pub fn density_rho(x: u64, y: f64, h: u64) -> f64 {
    let ly = y.ln();
    h as f64 * ly.powf(delta()) * ly.ln().powf(1.5) / x as f64
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SandwichReport {
    pub x: u64,
    /// `H(x/4, √x/4, √x/2)`.
    pub lower: u64,
    pub a: u64,
    /// `Σ_k H(x/2^k, √x/2^{k+1}, √x/2^k)`.
    pub upper: u64,
    pub upper_terms: Vec<u64>,
    pub holds: bool,
}

/// Evaluates both sides of `H(x/4, √x/4, √x/2) ≤ A(x) ≤ Σ_k H(x/2^k, √x/2^{k+1}, √x/2^k)`.
///
/// All window endpoints are floors of `√x/2^j`, computed as `⌊√x⌋ >> j`, so
/// every term is exact.
pub fn sandwich_check(x: u64) -> Result<SandwichReport> {
    if x < 16 {
        return Err(Error::range("x", x, "≥ 16"));
    }
    let s = isqrt(x);
    let lower = count_divisor_range(x >> 2, (s >> 2) + 1, s >> 1, DEFAULT_MAX_BITS)?;
    let a = mult_table_count(x)?;
    let mut upper_terms = Vec::new();
    let mut k = 0u32;
    while k < 64 && (1u64 << k) <= s {
        upper_terms.push(count_divisor_range(
            x >> k,
            (s >> (k + 1)) + 1,
            s >> k,
            DEFAULT_MAX_BITS,
        )?);
        k += 1;
    }
    let upper = upper_terms.iter().sum();
    Ok(SandwichReport {
        x,
        lower,
        a,
        upper,
        upper_terms,
        holds: lower <= a && a <= upper,
    })
}
