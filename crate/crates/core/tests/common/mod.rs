//! Independent reference implementations used by the integration and
//! acceptance tests. Nothing here calls into the library under test.

#![allow(dead_code)]

use std::f64::consts::LN_2;

/// Plain Eratosthenes over a `Vec<bool>`.
pub fn naive_sieve(limit: usize) -> Vec<bool> {
    let mut is_p = vec![true; limit + 1];
    is_p[0] = false;
    if limit >= 1 {
        is_p[1] = false;
    }
    let mut i = 2;
    while i * i <= limit {
        if is_p[i] {
            for m in (i * i..=limit).step_by(i) {
                is_p[m] = false;
            }
        }
        i += 1;
    }
    is_p
}

pub fn naive_primes(limit: usize) -> Vec<u64> {
    naive_sieve(limit)
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(i, _)| i as u64)
        .collect()
}

/// Divisors by trial division up to `√n`.
pub fn naive_divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// `#{n ≤ x : n has a divisor in (y, z]}` by marking multiples in a `Vec<bool>`.
pub fn naive_h(x: u64, y: f64, z: f64) -> u64 {
    let lo = y.floor() as u64 + 1;
    let hi = (z.floor() as u64).min(x);
    let mut hit = vec![false; x as usize + 1];
    for d in lo..=hi {
        for m in (d..=x).step_by(d as usize) {
            hit[m as usize] = true;
        }
    }
    hit.iter().filter(|&&b| b).count() as u64
}

/// `#{m₁m₂ : m₁, m₂ ≤ √x, m₁m₂ ≤ x}` by collecting products in a set.
pub fn naive_mult_table(x: u64) -> u64 {
    let r = (x as f64).sqrt().floor() as u64;
    let mut seen = std::collections::HashSet::new();
    for a in 1..=r {
        for b in a..=r {
            if a * b <= x {
                seen.insert(a * b);
            }
        }
    }
    seen.len() as u64
}

/// Greedy block boundaries from prefix sums of `1/p` over the primes above
/// `lambda0`: `λ_j` is the largest prime whose running block sum is `≤ log 2`.
pub fn greedy_lambdas(limit: usize, lambda0: f64) -> Vec<u64> {
    let primes: Vec<u64> = naive_primes(limit)
        .into_iter()
        .filter(|&p| p as f64 > lambda0)
        .collect();
    let prefix: Vec<f64> = std::iter::once(0.0)
        .chain(primes.iter().scan(0.0, |s, &p| {
            *s += 1.0 / p as f64;
            Some(*s)
        }))
        .collect();
    let mut out = Vec::new();
    let mut start = 0;
    while start < primes.len() {
        let mut end = start;
        while end + 1 <= primes.len() && prefix[end + 1] - prefix[start] <= LN_2 {
            end += 1;
        }
        if end == start {
            end = start + 1;
        }
        if end == primes.len() {
            break;
        }
        out.push(primes[end - 1]);
        start = end;
    }
    out
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const K_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd-indexed Kronrod nodes (and the centre)
const G_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = K_WEIGHTS[7] * fc;
    let mut gauss = G_WEIGHTS[3] * fc;
    for i in 0..7 {
        let dx = h * GK_NODES[i];
        let s = f(c - dx) + f(c + dx);
        kron += K_WEIGHTS[i] * s;
        if i % 2 == 1 {
            gauss += G_WEIGHTS[i / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod (7/15) to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (est, err) = gk15(f, a, b);
        if err <= tol || depth >= 40 || b - a < 1e-14 {
            return est;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, 0.5 * tol, depth + 1) + rec(f, m, b, 0.5 * tol, depth + 1)
    }
    if b <= a {
        return 0.0;
    }
    rec(f, a, b, tol, 0)
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// `k!·∫_{0≤ξ₁≤⋯≤ξ_k≤1} min_{0≤j≤k} 2^{−j}(2^{vξ₁}+⋯+2^{vξ_j}+1) dξ`.
///
/// Outer coordinates are integrated adaptively; the last one in closed form,
/// since the final term is increasing in `ξ_k`.
pub fn u_quadrature(k: usize, v: f64, tol: f64) -> f64 {
    fn inner(k: usize, v: f64, j: usize, lower: f64, s: f64, m: f64, tol: f64) -> f64 {
        // s = s_{j}, m = min(s_0..s_j); integrating over ξ_{j+1} ∈ [lower, 1]
        let step = (j + 1) as f64;
        if j + 1 == k {
            // ∫ min(m, s/2 + 2^{vξ−k}) dξ
            let g_int = |a: f64, b: f64| {
                0.5 * s * (b - a) + ((v * b - step).exp2() - (v * a - step).exp2()) / (v * LN_2)
            };
            let room = m - 0.5 * s;
            if room <= 0.0 {
                return m * (1.0 - lower);
            }
            let cross = (room.log2() + step) / v;
            return if cross <= lower {
                m * (1.0 - lower)
            } else if cross >= 1.0 {
                g_int(lower, 1.0)
            } else {
                g_int(lower, cross) + m * (1.0 - cross)
            };
        }
        let f = |x: f64| {
            let s2 = 0.5 * s + (v * x - step).exp2();
            inner(k, v, j + 1, x, s2, m.min(s2), tol)
        };
        integrate(&f, lower, 1.0, tol)
    }
    factorial(k) * inner(k, v, 0, 0.0, 1.0, 1.0, tol)
}

/// `k!·Vol 𝒯(k, v, γ)`. Each membership condition is a lower limit on the
/// next coordinate given the previous ones.
pub fn vol_t_quadrature(k: usize, v: f64, gamma: f64, tol: f64) -> f64 {
    fn lower_limit(v: f64, gamma: f64, j: usize, t: f64, prev: f64) -> f64 {
        // t_j = t/2 + 2^{vξ − j + γ} ≥ 1
        let room = 1.0 - 0.5 * t;
        if room <= 0.0 {
            prev
        } else {
            prev.max((room.log2() + j as f64 - gamma) / v)
        }
    }
    fn inner(k: usize, v: f64, gamma: f64, j: usize, prev: f64, t: f64, tol: f64) -> f64 {
        let step = j + 1;
        let lo = lower_limit(v, gamma, step, t, prev);
        if lo >= 1.0 {
            return 0.0;
        }
        if step == k {
            return 1.0 - lo;
        }
        let f = |x: f64| {
            let t2 = 0.5 * t + (v * x - step as f64 + gamma).exp2();
            inner(k, v, gamma, step, x, t2, tol)
        };
        integrate(&f, lo, 1.0, tol)
    }
    factorial(k) * inner(k, v, gamma, 0, 0.0, 0.0, tol)
}
