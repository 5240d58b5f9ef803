//! Prime generation, factorization and divisor enumeration.
//!
//! Two sieve front ends share one segmented kernel:
//!
//! * [`PrimeTable`] materializes every prime up to its limit
//!   (limit ≤ [`MAX_TABLE_LIMIT`]).
//! * [`SegmentedSieve`] streams primes from an arbitrary range with memory
//!   `O(√hi + segment)`, for `hi ≤` [`MAX_SEGMENTED_LIMIT`].

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::accum::CompensatedSum;
use crate::error::{Error, Result};

/// Largest limit accepted by [`PrimeTable::new`]. Primes are stored as `u64`
/// so the bound is a memory guard, not an arithmetic one.
pub const MAX_TABLE_LIMIT: u64 = 1 << 32;

/// Largest upper end accepted by [`SegmentedSieve`]. The base primes up to
/// `√hi` (≤ 2^24) are held in memory; everything else is streamed.
pub const MAX_SEGMENTED_LIMIT: u64 = 1 << 48;

/// Default segment length in bytes. One byte per odd number, so a segment
/// covers twice as many integers. Sized for a typical 256 KiB L2.
pub const DEFAULT_SEGMENT_BYTES: usize = 1 << 18;

pub fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).is_none_or(|sq| sq > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= n) {
        r += 1;
    }
    r
}

/// Plain sieve of Eratosthenes for small limits; used for base primes.
fn simple_sieve(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

/// Streaming segmented sieve over `[lo, hi]`.
pub struct SegmentedSieve {
    hi: u64,
    base: Vec<u64>,
    seg_bytes: usize,
    // first odd number represented by `buf[0]`
    seg_start: u64,
    buf: Vec<u8>,
    pos: usize,
    filled: bool,
    pending_two: bool,
    lo: u64,
}

impl SegmentedSieve {
    pub fn new(lo: u64, hi: u64) -> Result<Self> {
        Self::with_segment(lo, hi, DEFAULT_SEGMENT_BYTES)
    }

    pub fn with_segment(lo: u64, hi: u64, seg_bytes: usize) -> Result<Self> {
        if hi > MAX_SEGMENTED_LIMIT {
            return Err(Error::range("hi", hi, format!("≤ 2^48 = {MAX_SEGMENTED_LIMIT}")));
        }
        if seg_bytes == 0 {
            return Err(Error::arg("segment size must be positive"));
        }
        let lo = lo.max(2);
        let base = simple_sieve(isqrt(hi));
        let first_odd = if lo <= 3 { 3 } else { lo | 1 };
        Ok(Self {
            hi,
            base,
            seg_bytes,
            seg_start: first_odd,
            buf: Vec::with_capacity(seg_bytes),
            pos: 0,
            filled: false,
            pending_two: lo <= 2 && hi >= 2,
            lo,
        })
    }

    fn fill(&mut self) -> bool {
        if self.seg_start > self.hi {
            return false;
        }
        let span = ((self.hi - self.seg_start) / 2 + 1).min(self.seg_bytes as u64) as usize;
        self.buf.clear();
        self.buf.resize(span, 1);
        let seg_end = self.seg_start + 2 * (span as u64 - 1);
        for &p in self.base.iter().skip(1) {
            let p2 = p * p;
            if p2 > seg_end {
                break;
            }
            // first odd multiple of p that is ≥ max(p², seg_start)
            let mut m = if p2 >= self.seg_start {
                p2
            } else {
                let r = self.seg_start.div_ceil(p) * p;
                if r % 2 == 0 {
                    r + p
                } else {
                    r
                }
            };
            while m <= seg_end {
                self.buf[((m - self.seg_start) / 2) as usize] = 0;
                m += 2 * p;
            }
        }
        // 1 is not prime
        if self.seg_start == 1 {
            self.buf[0] = 0;
        }
        self.pos = 0;
        self.filled = true;
        true
    }
}

impl Iterator for SegmentedSieve {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.pending_two {
            self.pending_two = false;
            return Some(2);
        }
        loop {
            if !self.filled && !self.fill() {
                return None;
            }
            while self.pos < self.buf.len() {
                let i = self.pos;
                self.pos += 1;
                if self.buf[i] != 0 {
                    let n = self.seg_start + 2 * i as u64;
                    if n >= self.lo {
                        return Some(n);
                    }
                }
            }
            self.seg_start += 2 * self.buf.len() as u64;
            self.filled = false;
        }
    }
}

/// Counts primes in `[lo, hi]`, splitting the range into disjoint chunks
/// sieved in parallel. The count does not depend on the worker count.
pub fn count_primes(lo: u64, hi: u64) -> Result<u64> {
    if hi > MAX_SEGMENTED_LIMIT {
        return Err(Error::range("hi", hi, format!("≤ {MAX_SEGMENTED_LIMIT}")));
    }
    if hi < lo.max(2) {
        return Ok(0);
    }
    let chunk = 1u64 << 24;
    let starts: Vec<u64> = (lo.max(2)..=hi).step_by(chunk as usize).collect();
    starts
        .par_iter()
        .map(|&s| {
            let e = (s + chunk - 1).min(hi);
            SegmentedSieve::new(s, e).map(|it| it.count() as u64)
        })
        .sum()
}

/// Every prime up to `limit`, ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u64>,
}

impl PrimeTable {
    pub fn new(limit: u64) -> Result<Self> {
        if !(2..=MAX_TABLE_LIMIT).contains(&limit) {
            return Err(Error::range("limit", limit, format!("2..=2^32 ({MAX_TABLE_LIMIT})")));
        }
        let primes: Vec<u64> = SegmentedSieve::new(2, limit)?.collect();
        Ok(Self { limit, primes })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// Primes `≤ x`.
    pub fn up_to(&self, x: u64) -> &[u64] {
        let end = self.primes.partition_point(|&p| p <= x);
        &self.primes[..end]
    }

    pub fn contains(&self, n: u64) -> Result<bool> {
        if n > self.limit {
            return Err(Error::InsufficientTable {
                limit: self.limit,
                needed: n,
            });
        }
        Ok(self.primes.binary_search(&n).is_ok())
    }

    pub fn factorize(&self, n: u64) -> Result<Factorization> {
        factorize(n, self)
    }
}

/// Shorthand for [`PrimeTable::new`].
pub fn sieve_primes(limit: u64) -> Result<PrimeTable> {
    PrimeTable::new(limit)
}

/// `P⁺` / `P⁻` values, with the conventions `P⁺(1) = 0` and `P⁻(1) = ∞`
/// carried as their own variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PrimeBound {
    Zero,
    Prime(u64),
    Infinite,
}

impl PrimeBound {
    pub fn prime(self) -> Option<u64> {
        match self {
            PrimeBound::Prime(p) => Some(p),
            _ => None,
        }
    }

    /// `p ≤ bound` for a finite `bound`.
    pub fn at_most(self, bound: u64) -> bool {
        match self {
            PrimeBound::Zero => true,
            PrimeBound::Prime(p) => p <= bound,
            PrimeBound::Infinite => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Factorization {
    n: u64,
    factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn one() -> Self {
        Self {
            n: 1,
            factors: Vec::new(),
        }
    }

    /// Builds a factorization from `(prime, exponent)` pairs with strictly
    /// increasing primes. Primality of the entries is the caller's promise.
    pub fn from_factors(factors: Vec<(u64, u32)>) -> Result<Self> {
        let mut n: u64 = 1;
        for (i, &(p, e)) in factors.iter().enumerate() {
            if p < 2 || e == 0 {
                return Err(Error::arg(format!("bad factor entry ({p}, {e})")));
            }
            if i > 0 && factors[i - 1].0 >= p {
                return Err(Error::arg("factor primes must be strictly increasing"));
            }
            let pe = p.checked_pow(e).ok_or(Error::Overflow("prime power"))?;
            n = n.checked_mul(pe).ok_or(Error::Overflow("factor product"))?;
        }
        Ok(Self { n, factors })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    /// Distinct primes, ascending.
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    pub fn omega(&self) -> usize {
        self.factors.len()
    }

    /// Number of divisors. Saturates at `u64::MAX`, which no `u64` input can reach.
    pub fn tau(&self) -> u64 {
        self.factors
            .iter()
            .fold(1u64, |acc, &(_, e)| acc.saturating_mul(e as u64 + 1))
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    pub fn largest_prime(&self) -> PrimeBound {
        self.factors
            .last()
            .map_or(PrimeBound::Zero, |&(p, _)| PrimeBound::Prime(p))
    }

    pub fn smallest_prime(&self) -> PrimeBound {
        self.factors
            .first()
            .map_or(PrimeBound::Infinite, |&(p, _)| PrimeBound::Prime(p))
    }

    /// All divisors in ascending order.
    pub fn divisors(&self) -> Result<Vec<u64>> {
        let mut divs = vec![1u64];
        for &(p, e) in &self.factors {
            let len = divs.len();
            let mut pk = 1u64;
            for _ in 0..e {
                pk = pk.checked_mul(p).ok_or(Error::Overflow("divisor enumeration"))?;
                for i in 0..len {
                    let d = divs[i]
                        .checked_mul(pk)
                        .ok_or(Error::Overflow("divisor enumeration"))?;
                    divs.push(d);
                }
            }
        }
        divs.sort_unstable();
        Ok(divs)
    }

    /// `(n', n'')` with `n'` squarefree, `n''` squarefull and coprime.
    pub fn split_squarefull(&self) -> (u64, u64) {
        let mut sf = 1u64;
        let mut full = 1u64;
        for &(p, e) in &self.factors {
            if e == 1 {
                sf *= p;
            } else {
                full *= p.pow(e);
            }
        }
        (sf, full)
    }
}

pub fn factorize(n: u64, table: &PrimeTable) -> Result<Factorization> {
    if n == 0 {
        return Err(Error::arg("cannot factorize 0"));
    }
    let mut rem = n;
    let mut factors = Vec::new();
    let mut exhausted = true;
    for &p in &table.primes {
        if (p as u128) * (p as u128) > rem as u128 {
            exhausted = false;
            break;
        }
        if rem % p == 0 {
            let mut e = 0;
            while rem % p == 0 {
                rem /= p;
                e += 1;
            }
            factors.push((p, e));
        }
    }
    if rem > 1 {
        // With the table exhausted, `rem` has no factor ≤ limit; it is prime
        // only if (limit + 1)² > rem.
        let next = table.limit as u128 + 1;
        if exhausted && rem > table.limit && next * next <= rem as u128 {
            return Err(Error::InsufficientTable {
                limit: table.limit,
                needed: rem,
            });
        }
        factors.push((rem, 1));
    }
    Ok(Factorization { n, factors })
}

/// Trial-division factorization without a table; for `n` up to about 10^12.
pub fn factorize_trial(n: u64) -> Result<Factorization> {
    if n == 0 {
        return Err(Error::arg("cannot factorize 0"));
    }
    let mut rem = n;
    let mut factors = Vec::new();
    let mut p = 2u64;
    while p.saturating_mul(p) <= rem {
        if rem % p == 0 {
            let mut e = 0;
            while rem % p == 0 {
                rem /= p;
                e += 1;
            }
            factors.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if rem > 1 {
        factors.push((rem, 1));
    }
    Ok(Factorization { n, factors })
}

/// Splits `n = n'·n''` with `n'` squarefree, `n''` squarefull, `gcd = 1`.
pub fn split_squarefull(n: u64) -> Result<(u64, u64)> {
    Ok(factorize_trial(n)?.split_squarefull())
}

/// `Σ_{p ≤ x} p^{-(1-α)}` with compensated accumulation.
pub fn mertens_sum(x: f64, table: &PrimeTable, weight_alpha: f64) -> Result<f64> {
    if !(x >= 2.0) {
        return Err(Error::range("x", x, "≥ 2"));
    }
    if !(0.0..=0.1).contains(&weight_alpha) {
        return Err(Error::range("weight_alpha", weight_alpha, "[0, 0.1]"));
    }
    if x > table.limit as f64 {
        return Err(Error::InsufficientTable {
            limit: table.limit,
            needed: x as u64,
        });
    }
    let primes = table.up_to(x.floor() as u64);
    let sum: CompensatedSum = if weight_alpha == 0.0 {
        primes.iter().map(|&p| 1.0 / p as f64).collect()
    } else {
        let e = weight_alpha - 1.0;
        primes.iter().map(|&p| (p as f64).powf(e)).collect()
    };
    Ok(sum.value())
}

/// Squarefree `P`-smooth integers in `[lo, hi)` with their factorizations,
/// ascending. `primes` must contain every prime `≤ min(P, hi - 1)`.
pub fn smooth_squarefree_block(lo: u64, hi: u64, smooth: u64, primes: &[u64]) -> Vec<Factorization> {
    let lo = lo.max(1);
    if hi <= lo {
        return Vec::new();
    }
    let len = (hi - lo) as usize;
    let mut rem: Vec<u64> = (lo..hi).collect();
    let mut ok = vec![true; len];
    let mut fac: Vec<Vec<(u64, u32)>> = vec![Vec::new(); len];
    for &p in primes {
        if p > smooth || p >= hi {
            break;
        }
        let first = lo.div_ceil(p) * p;
        let mut m = first;
        while m < hi {
            let i = (m - lo) as usize;
            if ok[i] {
                if (m / p) % p == 0 {
                    ok[i] = false;
                } else {
                    rem[i] /= p;
                    fac[i].push((p, 1));
                }
            }
            m += p;
        }
    }
    let mut out = Vec::new();
    for (i, f) in fac.into_iter().enumerate() {
        if ok[i] && rem[i] == 1 {
            out.push(Factorization {
                n: lo + i as u64,
                factors: f,
            });
        }
    }
    out
}

const STREAM_BLOCK: u64 = 1 << 16;

/// Ascending stream of squarefree `a ≤ a_max` with `P⁺(a) ≤ P`.
pub struct SmoothSquarefree {
    smooth: u64,
    a_max: u64,
    primes: Vec<u64>,
    next_lo: u64,
    buf: std::vec::IntoIter<Factorization>,
}

impl SmoothSquarefree {
    pub fn new(smooth: u64, a_max: u64) -> Result<Self> {
        if smooth < 2 {
            return Err(Error::range("P", smooth, "≥ 2"));
        }
        if a_max < 1 {
            return Err(Error::range("a_max", a_max, "≥ 1"));
        }
        let cap = smooth.min(a_max).max(2);
        let primes = PrimeTable::new(cap)?.primes;
        Ok(Self {
            smooth,
            a_max,
            primes,
            next_lo: 1,
            buf: Vec::new().into_iter(),
        })
    }
}

impl Iterator for SmoothSquarefree {
    type Item = Factorization;

    fn next(&mut self) -> Option<Factorization> {
        loop {
            if let Some(f) = self.buf.next() {
                return Some(f);
            }
            if self.next_lo > self.a_max {
                return None;
            }
            let hi = self.next_lo.saturating_add(STREAM_BLOCK).min(self.a_max + 1);
            self.buf = smooth_squarefree_block(self.next_lo, hi, self.smooth, &self.primes).into_iter();
            self.next_lo = hi;
        }
    }
}

pub fn squarefree_smooth_stream(smooth: u64, a_max: u64) -> Result<SmoothSquarefree> {
    SmoothSquarefree::new(smooth, a_max)
}

/// Maps `f` over squarefree `P`-smooth `a ∈ [lo, a_max]` in parallel blocks and
/// folds the per-block results in ascending block order.
pub(crate) fn par_smooth_fold<T, F, R>(
    smooth: u64,
    lo: u64,
    a_max: u64,
    per_block: F,
    mut reduce: R,
    init: T,
) -> Result<T>
where
    T: Send,
    F: Fn(&[Factorization]) -> T + Sync,
    R: FnMut(T, T) -> T,
{
    if smooth < 2 {
        return Err(Error::range("P", smooth, "≥ 2"));
    }
    let lo = lo.max(1);
    if a_max < lo {
        return Ok(init);
    }
    let cap = smooth.min(a_max).max(2);
    let table = PrimeTable::new(cap)?;
    let starts: Vec<u64> = (lo..=a_max).step_by(STREAM_BLOCK as usize).collect();
    let parts: Vec<T> = starts
        .par_iter()
        .map(|&s| {
            let e = s.saturating_add(STREAM_BLOCK).min(a_max + 1);
            per_block(&smooth_squarefree_block(s, e, smooth, table.primes()))
        })
        .collect();
    Ok(parts.into_iter().fold(init, &mut reduce))
}

impl PartialOrd for Factorization {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Factorization {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n.cmp(&other.n)
    }
}
