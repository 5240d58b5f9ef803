//! Exact rational checks of the combinatorial identities: `f(b)`, the cycle
//! lemma, the `S₀` sum, Abel's identity and the `C_t(a, b)` bound.

use std::ops::Add;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};

pub const MAX_S_ZERO_K: usize = 8;
pub const MAX_CYCLE_LEN: usize = 16;

/// Rational stand-in for `e⁴ ≈ 54.598` in the `C_t(a, b)` bound.
pub const E4_CEILING: i64 = 55;

fn int(n: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(n.into())
}

fn pow2(e: i64) -> BigRational {
    let p = BigInt::one() << e.unsigned_abs();
    if e >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::one(), p)
    }
}

fn factorial(n: u64) -> BigInt {
    (1..=n).map(BigInt::from).product()
}

fn binomial(n: u64, k: u64) -> BigInt {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// `(b_M, …, b_J)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompositionVec {
    m: u64,
    b: Vec<u64>,
}

impl CompositionVec {
    pub fn new(m: u64, b: Vec<u64>) -> Result<Self> {
        if m == 0 {
            return Err(Error::range("M", m, "≥ 1"));
        }
        if b.is_empty() {
            return Err(Error::arg("composition needs at least one part"));
        }
        Ok(Self { m, b })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn j(&self) -> u64 {
        self.m + self.b.len() as u64 - 1
    }

    pub fn parts(&self) -> &[u64] {
        &self.b
    }

    pub fn k(&self) -> u64 {
        self.b.iter().sum()
    }
}

/// `f(b) = Σ_{h=M}^{J} 2^{M−1−h+b_M+⋯+b_h}`.
pub fn f_of_b(cv: &CompositionVec) -> BigRational {
    let mut prefix = 0i64;
    let mut total = BigRational::zero();
    for (offset, &part) in cv.b.iter().enumerate() {
        prefix += part as i64;
        total += pow2(prefix - 1 - offset as i64);
    }
    total
}

/// All `b ∈ ℕ^len` with `Σb = k`, in colexicographic order.
pub fn compositions(k: u64, len: usize) -> Vec<Vec<u64>> {
    fn rec(k: u64, len: usize, out: &mut Vec<Vec<u64>>) {
        if len == 0 {
            if k == 0 {
                out.push(Vec::new());
            }
            return;
        }
        for last in 0..=k {
            let start = out.len();
            rec(k - last, len - 1, out);
            for v in &mut out[start..] {
                v.push(last);
            }
        }
    }
    let mut out = Vec::new();
    rec(k, len, &mut out);
    out
}

/// The family `𝓑`: `J = M + k − 1`, `Σb = k`.
pub fn b_family(k: usize, m: u64) -> Result<Vec<CompositionVec>> {
    if k == 0 || k > MAX_S_ZERO_K {
        return Err(Error::range("k", k, format!("1..={MAX_S_ZERO_K}")));
    }
    if m == 0 {
        return Err(Error::range("M", m, "≥ 1"));
    }
    Ok(compositions(k as u64, k)
        .into_iter()
        .map(|b| CompositionVec { m, b })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub lhs: BigRational,
    pub rhs: BigRational,
    pub equal: bool,
}

impl IdentityCheck {
    fn new(lhs: BigRational, rhs: BigRational) -> Self {
        let equal = lhs == rhs;
        Self { lhs, rhs, equal }
    }
}

/// `Σ_{b∈𝓑} 1/(b_M!⋯b_J!·f(b))` against `k^{k−1}/k!`.
pub fn s_zero_sum(k: usize, m: u64) -> Result<IdentityCheck> {
    let family = b_family(k, m)?;
    let sum = family
        .par_iter()
        .map(|cv| {
            let denom: BigInt = cv.b.iter().map(|&p| factorial(p)).product();
            (int(denom) * f_of_b(cv)).recip()
        })
        .reduce(BigRational::zero, |a, b| a + b);
    let target = BigRational::new(BigInt::from(k).pow(k as u32 - 1), factorial(k as u64));
    Ok(IdentityCheck::new(sum, target))
}

/// Smallest `f(b)` over `𝓑` and whether it is at least `1/2`.
pub fn f_lower_bound_check(k: usize, m: u64) -> Result<(BigRational, bool)> {
    let min = b_family(k, m)?
        .iter()
        .map(f_of_b)
        .min()
        .expect("family is nonempty");
    let holds = min >= BigRational::new(1.into(), 2.into());
    Ok((min, holds))
}

/// Smallest 1-based `i` minimizing `z₁ + ⋯ + z_i`. The rotation starting after
/// `i` has every prefix sum nonnegative.
///
/// The total must be exactly zero; for floating inputs round to a rational or
/// integer type first.
pub fn cycle_rotation<T>(z: &[T]) -> Result<usize>
where
    T: Zero + PartialOrd + Add<Output = T> + Clone,
{
    if z.is_empty() {
        return Err(Error::arg("empty sequence"));
    }
    let mut prefix = T::zero();
    let mut best: Option<(T, usize)> = None;
    for (i, x) in z.iter().enumerate() {
        prefix = prefix + x.clone();
        if best.as_ref().is_none_or(|(b, _)| prefix < *b) {
            best = Some((prefix.clone(), i + 1));
        }
    }
    if !prefix.is_zero() {
        return Err(Error::arg("sequence must sum to zero"));
    }
    Ok(best.map(|(_, i)| i).expect("nonempty"))
}

/// `z_{i+1}, …, z_r, z_1, …, z_i`.
pub fn rotate<T: Clone>(z: &[T], i: usize) -> Vec<T> {
    z[i..].iter().chain(&z[..i]).cloned().collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleSumCheck {
    pub value: BigRational,
    pub lo: BigRational,
    pub hi: BigRational,
    pub holds: bool,
}

/// `Σ_{j=0}^{r−1} (Σ_{h=1}^{r} x_{1+j}⋯x_{h+j})^{−1}` with cyclic indices, and
/// the interval `[1/max(1, X), 1/min(1, X)]` for `X = x₁⋯x_r`.
pub fn cycle_sum_check(x: &[BigRational]) -> Result<CycleSumCheck> {
    let r = x.len();
    if r == 0 || r > MAX_CYCLE_LEN {
        return Err(Error::range("r", r, format!("1..={MAX_CYCLE_LEN}")));
    }
    if x.iter().any(|v| !v.is_positive()) {
        return Err(Error::arg("entries must be positive"));
    }
    let mut value = BigRational::zero();
    for j in 0..r {
        let mut prod = BigRational::one();
        let mut inner = BigRational::zero();
        for h in 0..r {
            prod *= &x[(j + h) % r];
            inner += &prod;
        }
        value += inner.recip();
    }
    let big_x: BigRational = x.iter().product();
    let one = BigRational::one();
    let (lo, hi) = if big_x >= one {
        (big_x.recip(), one)
    } else {
        (one, big_x.recip())
    };
    let holds = lo <= value && value <= hi;
    Ok(CycleSumCheck { value, lo, hi, holds })
}

fn abel_term(t: u64, j: u64, a: &BigRational, b: &BigRational) -> BigRational {
    let left = (a + int(j)).pow(j as i32 - 1);
    let right = (b + int(t - j)).pow((t - j) as i32 - 1);
    int(binomial(t, j)) * left * right
}

/// Both sides of
/// `Σ_{j=0}^{t} C(t,j)(a+j)^{j−1}(b+t−j)^{t−j−1} = (1/a + 1/b)(t+a+b)^{t−1}`.
pub fn abel_identity(t: u64, a: &BigRational, b: &BigRational) -> Result<IdentityCheck> {
    if t == 0 {
        return Err(Error::range("t", t, "≥ 1"));
    }
    if !a.is_positive() || !b.is_positive() {
        return Err(Error::arg("a and b must be positive"));
    }
    let lhs = (0..=t).map(|j| abel_term(t, j, a, b)).sum();
    let s = int(t) + a + b;
    let rhs = (a.recip() + b.recip()) * s.pow(t as i32 - 1);
    Ok(IdentityCheck::new(lhs, rhs))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CombsumCheck {
    pub lhs: BigRational,
    pub bound: BigRational,
    pub holds: bool,
}

/// `C_t(a, b) = Σ_{1≤j≤t−1, j+a>0} C(t,j)(a+j)^{j−1}(b+t−j)^{t−j−1}` against
/// `55·(t+a+b)^{t−1}`.
pub fn combsum_check(t: u64, a: &BigRational, b: &BigRational) -> Result<CombsumCheck> {
    if t < 2 {
        return Err(Error::range("t", t, "≥ 2"));
    }
    if b.is_negative() {
        return Err(Error::arg("b must be ≥ 0"));
    }
    let s = int(t) + a + b;
    if !s.is_positive() {
        return Err(Error::arg("t + a + b must be positive"));
    }
    let lhs = (1..t)
        .filter(|&j| (a + int(j)).is_positive())
        .map(|j| abel_term(t, j, a, b))
        .sum();
    let bound = int(E4_CEILING) * s.pow(t as i32 - 1);
    let holds = lhs <= bound;
    Ok(CombsumCheck { lhs, bound, holds })
}

/// `p/q` as a reduced rational. Panics if `q = 0`.
pub fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(p.into(), q.into())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cv(b: &[u64]) -> CompositionVec {
        CompositionVec::new(1, b.to_vec()).unwrap()
    }

    #[test]
    fn f_examples() {
        assert_eq!(f_of_b(&cv(&[1, 1])), ratio(2, 1));
        assert_eq!(f_of_b(&cv(&[2, 0])), ratio(3, 1));
        assert_eq!(f_of_b(&cv(&[0, 2])), ratio(3, 2));
        let shifted = CompositionVec::new(5, vec![0, 2]).unwrap();
        assert_eq!(f_of_b(&shifted), ratio(3, 2));
        assert_eq!(shifted.j(), 6);
    }

    #[test]
    fn colex_order() {
        assert_eq!(
            compositions(2, 2),
            vec![vec![2, 0], vec![1, 1], vec![0, 2]]
        );
        assert_eq!(compositions(3, 3).len(), 10);
        assert_eq!(compositions(8, 8).len(), 6435);
    }

    #[test]
    fn s_zero_examples() {
        let c = s_zero_sum(1, 1).unwrap();
        assert!(c.equal && c.lhs == ratio(1, 1));
        assert_eq!(s_zero_sum(2, 1).unwrap().lhs, ratio(1, 1));
        assert_eq!(s_zero_sum(3, 2).unwrap().lhs, ratio(3, 2));
        assert!(s_zero_sum(9, 1).is_err());
        assert!(s_zero_sum(2, 0).is_err());
    }

    #[test]
    fn rotation_examples() {
        assert_eq!(cycle_rotation(&[1i64, -2, 1, 0]).unwrap(), 2);
        assert_eq!(rotate(&[1i64, -2, 1, 0], 2), vec![1, 0, 1, -2]);
        assert_eq!(cycle_rotation(&[0i64, 0, 0]).unwrap(), 1);
        assert_eq!(cycle_rotation(&[-1i64, 1]).unwrap(), 1);
        assert!(cycle_rotation(&[1i64, 1]).is_err());
        assert!(cycle_rotation::<i64>(&[]).is_err());
        assert_eq!(cycle_rotation(&[ratio(1, 2), ratio(-1, 2)]).unwrap(), 2);
    }

    #[test]
    fn cycle_sum_examples() {
        let c = cycle_sum_check(&[ratio(2, 1), ratio(1, 2)]).unwrap();
        assert_eq!(c.value, ratio(1, 1));
        assert!(c.holds);
        let c = cycle_sum_check(&vec![ratio(1, 1); 5]).unwrap();
        assert_eq!(c.value, ratio(1, 1));
        let c = cycle_sum_check(&[ratio(2, 1)]).unwrap();
        assert_eq!((c.value.clone(), c.lo.clone(), c.hi.clone()), (ratio(1, 2), ratio(1, 2), ratio(1, 1)));
        assert!(cycle_sum_check(&[ratio(0, 1)]).is_err());
        assert!(cycle_sum_check(&[]).is_err());
    }

    #[test]
    fn abel_examples() {
        let c = abel_identity(2, &ratio(1, 1), &ratio(1, 1)).unwrap();
        assert_eq!((c.lhs.clone(), c.equal), (ratio(8, 1), true));
        assert_eq!(abel_identity(3, &ratio(1, 1), &ratio(1, 1)).unwrap().lhs, ratio(50, 1));
        assert_eq!(abel_identity(2, &ratio(1, 1), &ratio(2, 1)).unwrap().rhs, ratio(15, 2));
        assert!(abel_identity(2, &ratio(0, 1), &ratio(1, 1)).is_err());
    }

    #[test]
    fn combsum_examples() {
        let c = combsum_check(2, &ratio(1, 1), &ratio(1, 1)).unwrap();
        assert_eq!((c.lhs.clone(), c.bound.clone()), (ratio(2, 1), ratio(220, 1)));
        let c = combsum_check(3, &ratio(-2, 1), &ratio(0, 1)).unwrap();
        assert!(c.lhs.is_zero() && c.holds);
        assert!(combsum_check(1, &ratio(1, 1), &ratio(1, 1)).is_err());
        assert!(combsum_check(3, &ratio(1, 1), &ratio(-1, 1)).is_err());
        assert!(combsum_check(3, &ratio(-3, 1), &ratio(0, 1)).is_err());
    }

    #[test]
    fn f_is_at_least_half() {
        for k in 1..=6 {
            assert!(f_lower_bound_check(k, 1).unwrap().1);
        }
    }
}
