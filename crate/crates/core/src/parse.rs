//! Parsers for numeric command-line arguments.
//!
//! Counts accept scientific notation (`1e6`, `2.5e3`) but are converted with
//! exact integer semantics: `1.5e0` is rejected rather than truncated.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("empty input")]
    Empty,
    #[error("malformed number `{0}`")]
    Malformed(String),
    #[error("`{0}` is not an integer")]
    NotInteger(String),
    #[error("`{0}` does not fit in 64 bits")]
    Overflow(String),
    #[error("`{0}`: {1}")]
    Invalid(String, &'static str),
}

type Result<T> = std::result::Result<T, ParseError>;

// exponents beyond this cannot yield a u64 or a meaningful rational
const MAX_EXPONENT: i64 = 4000;

/// Exact decimal `[+-]digits[.digits][e[+-]digits]` as a rational.
fn parse_decimal(s: &str) -> Result<BigRational> {
    let t = s.trim();
    if t.is_empty() {
        return Err(ParseError::Empty);
    }
    let bad = || ParseError::Malformed(t.to_string());
    let (neg, body) = match t.as_bytes()[0] {
        b'-' => (true, &t[1..]),
        b'+' => (false, &t[1..]),
        _ => (false, t),
    };
    let (mantissa, exp) = match body.find(['e', 'E']) {
        Some(i) => {
            let e: i64 = body[i + 1..].parse().map_err(|_| bad())?;
            if e.abs() > MAX_EXPONENT {
                return Err(ParseError::Overflow(t.to_string()));
            }
            (&body[..i], e)
        }
        None => (body, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((a, b)) => (a, b),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut num: BigInt = digits.parse().map_err(|_| bad())?;
    if neg {
        num = -num;
    }
    let scale = exp - frac_part.len() as i64;
    if scale.abs() > MAX_EXPONENT {
        return Err(ParseError::Overflow(t.to_string()));
    }
    let ten = BigInt::from(10u32).pow(scale.unsigned_abs() as u32);
    Ok(if scale >= 0 {
        BigRational::from_integer(num * ten)
    } else {
        BigRational::new(num, ten)
    })
}

/// Nonnegative integer count, e.g. `100`, `1e6`, `2.5e3`.
pub fn parse_count(s: &str) -> Result<u64> {
    let r = parse_decimal(s)?;
    if !r.is_integer() {
        return Err(ParseError::NotInteger(s.trim().to_string()));
    }
    r.to_integer()
        .to_u64()
        .ok_or_else(|| ParseError::Overflow(s.trim().to_string()))
}

/// Finite real.
pub fn parse_real(s: &str) -> Result<f64> {
    let t = s.trim();
    if t.is_empty() {
        return Err(ParseError::Empty);
    }
    // reject inf/nan spellings that `f64::from_str` would accept
    if !t.bytes().all(|c| c.is_ascii_digit() || b"+-.eE".contains(&c)) {
        return Err(ParseError::Malformed(t.to_string()));
    }
    let v: f64 = t.parse().map_err(|_| ParseError::Malformed(t.to_string()))?;
    if !v.is_finite() {
        return Err(ParseError::Overflow(t.to_string()));
    }
    Ok(v)
}

/// Rational from `p/q`, an integer or an exact decimal.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let t = s.trim();
    match t.split_once('/') {
        Some((p, q)) => {
            let p = parse_decimal(p)?;
            let q = parse_decimal(q)?;
            if q.is_zero() {
                return Err(ParseError::Invalid(t.to_string(), "zero denominator"));
            }
            Ok(p / q)
        }
        None => parse_decimal(t),
    }
}

/// `lo:hi:steps`, geometric and inclusive of both ends; `steps ≥ 1` points.
pub fn parse_geom(s: &str) -> Result<Vec<f64>> {
    let t = s.trim();
    let parts: Vec<&str> = t.split(':').collect();
    let [lo, hi, steps] = parts[..] else {
        return Err(ParseError::Invalid(t.to_string(), "expected lo:hi:steps"));
    };
    let lo = parse_real(lo)?;
    let hi = parse_real(hi)?;
    let steps = parse_count(steps)?;
    if !(lo > 0.0) || hi < lo {
        return Err(ParseError::Invalid(t.to_string(), "need 0 < lo ≤ hi"));
    }
    if steps == 0 || steps > 1_000_000 {
        return Err(ParseError::Invalid(t.to_string(), "steps must be in 1..=1000000"));
    }
    if steps == 1 {
        return Ok(vec![lo]);
    }
    // hi / lo can overflow, so step in log space
    let (ln_lo, ln_hi) = (lo.ln(), hi.ln());
    let step = (ln_hi - ln_lo) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| match i {
            0 => lo,
            i if i == steps - 1 => hi,
            i => (ln_lo + step * i as f64).exp().clamp(lo, hi),
        })
        .collect())
}

/// Comma-separated nondecreasing thresholds.
pub fn parse_thresholds(s: &str) -> Result<Vec<f64>> {
    let t = s.trim();
    if t.is_empty() {
        return Err(ParseError::Empty);
    }
    let xs = t.split(',').map(parse_real).collect::<Result<Vec<f64>>>()?;
    if xs.windows(2).any(|w| w[1] < w[0]) {
        return Err(ParseError::Invalid(t.to_string(), "thresholds must be nondecreasing"));
    }
    Ok(xs)
}
