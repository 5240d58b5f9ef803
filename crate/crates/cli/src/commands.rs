use std::f64::consts::{E, LN_2};

use divlab::blocks::{build_e_partition, build_partition, empirical_k, DEFAULT_LAMBDA0};
use divlab::cluster::{aggregate_lw, lemma_l_check, trunc_t};
use divlab::identities::{
    abel_identity, combsum_check, cycle_rotation, cycle_sum_check, f_lower_bound_check, ratio, s_zero_sum,
    MAX_S_ZERO_K,
};
use divlab::order_stats::{
    lemma_q_ratio, q_exact, q_exact_kuv, q_mc, q_oracle_kuv, smirnov_limit, vol_t_mc, Boundary, McConfig,
};
use divlab::primes::{isqrt, sieve_primes};
use divlab::window::{count_window, count_window_oracle, density_rho, mult_table_count, sandwich_check};
use divlab::{Error, WindowQuery};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde_json::{json, Value};

use crate::output::{num, Artifact, Format};
use crate::{Command, RunArgs};

type Result<T> = std::result::Result<T, Error>;

pub fn execute(cmd: &Command, run: &RunArgs) -> (&'static str, Result<Artifact>) {
    match cmd {
        Command::Count { x, y, z } => ("count", count(*x, *y, *z)),
        Command::Sweep { x, y_geom } => ("sweep", sweep(*x, y_geom)),
        Command::Multtable { x } => ("multtable", multtable(*x)),
        Command::Cluster { a_max, p, q, k } => ("cluster", cluster(*a_max, *p, *q, *k)),
        Command::Blocks { x, p } => ("blocks", blocks(*x, *p)),
        Command::Orderstats { k, u, v, samples, gamma } => {
            ("orderstats", orderstats(*k, *u, *v, *gamma, mc(run, *samples)))
        }
        Command::Identities { kmax } => ("identities", identities(*kmax)),
        Command::Report { samples } => ("report", report(mc(run, *samples))),
    }
}

fn mc(run: &RunArgs, samples: u64) -> McConfig {
    McConfig::new(samples, run.seed).with_chunk(run.chunk)
}

fn to_usize(n: u64, what: &'static str) -> Result<usize> {
    usize::try_from(n).map_err(|_| Error::Range {
        what,
        value: n.to_string(),
        allowed: "fits in usize".into(),
    })
}

fn count(x: u64, y: f64, z: f64) -> Result<Artifact> {
    let h = count_window(&WindowQuery::new(x, y, z)?)?;
    let mut a = Artifact::new(&["x", "y", "z", "h"]);
    a.row(vec![x.into(), num(y), num(z), h.into()]);
    a.plain = Some(h.to_string());
    a.flatten = true;
    Ok(a)
}

fn sweep(x: u64, ys: &[f64]) -> Result<Artifact> {
    let mut a = Artifact::new(&["x", "y", "h", "rho"]);
    let ee = E.exp();
    for &y in ys {
        let h = if y >= x as f64 {
            0
        } else {
            count_window(&WindowQuery::new(x, y, 2.0 * y)?)?
        };
        // the normalization needs log log y > 0
        let rho = if y > ee { num(density_rho(x, y, h)) } else { Value::Null };
        a.row(vec![x.into(), num(y), h.into(), rho]);
    }
    Ok(a)
}

fn multtable(x: u64) -> Result<Artifact> {
    let mut a = Artifact::new(&["x", "lower", "a", "upper", "holds"]);
    a.flatten = true;
    if x < 16 {
        let count = mult_table_count(x)?;
        a.row(vec![x.into(), Value::Null, count.into(), Value::Null, Value::Null]);
        return Ok(a);
    }
    let r = sandwich_check(x)?;
    a.check(r.holds);
    a.row(vec![x.into(), r.lower.into(), r.a.into(), r.upper.into(), r.holds.into()]);
    Ok(a)
}

fn cluster(a_max: u64, p: Option<u64>, q: u64, k: Option<u64>) -> Result<Artifact> {
    if let Some(p) = p {
        let k = k.map(|k| to_usize(k, "k")).transpose()?;
        let t = trunc_t(p, q, k, a_max)?;
        let mut a = Artifact::new(&["P", "Q", "k", "a_max", "sum", "tail_bound", "terms"]);
        a.flatten = true;
        a.row(vec![
            p.into(),
            q.into(),
            k.map_or(Value::Null, Value::from),
            a_max.into(),
            num(t.sum),
            num(t.tail_bound),
            t.terms.into(),
        ]);
        return Ok(a);
    }
    let table = sieve_primes((isqrt(a_max) + 1).max(2))?;
    let mut a = Artifact::new(&["a", "tau", "l", "w", "margin_i", "margin_iii", "holds"]);
    for n in 1..=a_max {
        let f = table.factorize(n)?;
        let r = lemma_l_check(&f)?;
        let c = divlab::cluster::cluster_set(&f)?;
        a.check(r.holds());
        a.row(vec![
            n.into(),
            c.tau.into(),
            num(r.l),
            c.w.into(),
            num(r.margin_i),
            r.margin_iii.map_or(Value::Null, num),
            r.holds().into(),
        ]);
    }
    Ok(a)
}

fn blocks(x: Option<u64>, p: Option<u64>) -> Result<Artifact> {
    let part = match (x, p) {
        (_, Some(p)) => build_e_partition(p)?,
        (Some(x), None) => build_partition(x, 0.0, DEFAULT_LAMBDA0)?,
        (None, None) => return Err(Error::Argument("one of --x or --P is required".into())),
    };
    let mut a = Artifact::new(&["j", "lambda", "block_sum", "deviation", "overfull"]);
    for (i, r) in part.rows().enumerate() {
        a.row(vec![
            r.j.into(),
            r.lambda.into(),
            num(r.block_sum),
            num(r.deviation),
            part.is_overfull(i).into(),
        ]);
    }
    a.set("limit", part.limit());
    a.set("weight_alpha", num(part.weight_alpha()));
    a.set("lambda0", num(part.lambda0()));
    a.set("first_index", part.first_index());
    a.set("last_truncated", part.last_truncated());
    a.set("empirical_k", empirical_k(&part).map_or(Value::Null, num));
    Ok(a)
}

fn orderstats(k: u64, u: f64, v: f64, gamma: Option<u64>, cfg: McConfig) -> Result<Artifact> {
    let k = to_usize(k, "k")?;
    let bound = Boundary::from_kuv(k, u, v)?;
    let exact = q_exact(&bound)?;
    let est = q_mc(&bound, &cfg)?;
    let w = u + v - k as f64;
    let ratio = if u >= 0.0 && w >= 0.0 {
        num(lemma_q_ratio(k, u, v, exact))
    } else {
        Value::Null
    };
    let mut cols = vec!["k", "u", "v", "q_exact", "q_mc", "stderr", "ratio_lemmaQ"];
    let mut row = vec![k.into(), num(u), num(v), num(exact), num(est.mean), num(est.stderr), ratio];
    if let Some(g) = gamma {
        if v.fract() != 0.0 || v < 1.0 {
            return Err(Error::Argument(format!("--gamma needs a positive integer v, got {v}")));
        }
        let t = vol_t_mc(k, v as u64, g, &cfg)?;
        cols.extend(["gamma", "vol_t", "vol_t_stderr"]);
        row.extend([g.into(), num(t.mean), num(t.stderr)]);
    }
    let mut a = Artifact::new(&cols);
    a.row(row);
    a.flatten = true;
    a.default_format = Format::Json;
    a.set("samples", est.samples);
    a.set("chunk", est.chunk);
    a.set("mc_within_4se", (est.mean - exact).abs() <= 4.0 * est.stderr);
    Ok(a)
}

const IDENTITY_COLUMNS: [&str; 6] = ["identity", "params", "lhs", "relation", "rhs", "equal"];

fn push_identity(a: &mut Artifact, name: &str, params: String, lhs: &BigRational, rel: &str, rhs: String, ok: bool) {
    a.check(ok);
    a.row(vec![name.into(), params.into(), lhs.to_string().into(), rel.into(), rhs.into(), ok.into()]);
}

fn identities(kmax: u64) -> Result<Artifact> {
    if kmax == 0 || kmax > MAX_S_ZERO_K as u64 {
        return Err(Error::Range {
            what: "kmax",
            value: kmax.to_string(),
            allowed: format!("1..={MAX_S_ZERO_K}"),
        });
    }
    let kmax = kmax as usize;
    let mut a = Artifact::new(&IDENTITY_COLUMNS);
    a.default_format = Format::Json;
    for k in 1..=kmax {
        for m in [1u64, 2, 5] {
            let c = s_zero_sum(k, m)?;
            push_identity(&mut a, "s_zero", format!("k={k} M={m}"), &c.lhs, "=", c.rhs.to_string(), c.equal);
        }
        let (min_f, ok) = f_lower_bound_check(k, 1)?;
        push_identity(&mut a, "f_lower_bound", format!("k={k}"), &min_f, ">=", "1/2".into(), ok);
    }
    let vals = [ratio(1, 2), ratio(1, 1), ratio(3, 2), ratio(2, 1), ratio(3, 1), ratio(5, 1)];
    for t in 1..=kmax as u64 {
        for x in &vals {
            for y in &vals {
                let c = abel_identity(t, x, y)?;
                push_identity(&mut a, "abel", format!("t={t} a={x} b={y}"), &c.lhs, "=", c.rhs.to_string(), c.equal);
            }
        }
    }
    for t in 2..=kmax.max(2) as u64 {
        for an in [-(t as i64) + 2, -1, 0, 1, 3] {
            let x = ratio(an, 2);
            for y in [ratio(0, 1), ratio(1, 1), ratio(5, 2)] {
                let c = combsum_check(t, &x, &y)?;
                push_identity(&mut a, "combsum", format!("t={t} a={x} b={y}"), &c.lhs, "<=", c.bound.to_string(), c.holds);
            }
        }
    }
    let cycles: [Vec<BigRational>; 3] = [
        vec![ratio(2, 1), ratio(1, 2)],
        vec![ratio(1, 1); 5],
        vec![ratio(2, 1), ratio(3, 5), ratio(7, 4)],
    ];
    for x in &cycles {
        let c = cycle_sum_check(x)?;
        let params = x.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
        push_identity(&mut a, "cycle_sum", params, &c.value, "in", format!("[{}, {}]", c.lo, c.hi), c.holds);
    }
    let z = [1i64, -2, 1, 0];
    let i = cycle_rotation(&z)?;
    push_identity(&mut a, "cycle_rotation", "1 -2 1 0".into(), &ratio(i as i64, 1), "=", "2".into(), i == 2);
    let failed = a.rows.iter().filter(|r| r[5] == Value::Bool(false)).count();
    a.set("checks", a.rows.len());
    a.set("failed", failed);
    Ok(a)
}

struct Suite {
    a: Artifact,
}

impl Suite {
    fn record(&mut self, name: &str, outcome: Result<(bool, String)>) {
        let (ok, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
        self.a.check(ok);
        self.a.row(vec![name.into(), ok.into(), detail.into()]);
    }
}

fn report(cfg: McConfig) -> Result<Artifact> {
    let mut s = Suite {
        a: Artifact::new(&["check", "passed", "detail"]),
    };
    s.a.default_format = Format::Json;
    s.record("window_spot_values", (|| {
        let a = count_window(&WindowQuery::new(100, 3.0, 6.0)?)?;
        let b = count_window(&WindowQuery::new(20, 2.0, 4.0)?)?;
        Ok((a == 46 && b == 10, format!("H(100,3,6)={a} H(20,2,4)={b}")))
    })());
    s.record("window_oracle_x_le_1000", (|| {
        let mut n = 0;
        for x in 1..=1000u64 {
            let mut y = 1u64;
            while y * y < x {
                let q = WindowQuery::new(x, y as f64, 2.0 * y as f64)?;
                if count_window(&q)? != count_window_oracle(&q)? {
                    return Ok((false, format!("mismatch at x={x} y={y}")));
                }
                n += 1;
                y += 1;
            }
        }
        Ok((true, format!("{n} queries")))
    })());
    s.record("multiplication_table_sandwich", (|| {
        let mut ok = mult_table_count(9)? == 6 && mult_table_count(16)? == 9;
        let mut parts = Vec::new();
        for x in [16u64, 400, 10_000, 1_000_000] {
            let r = sandwich_check(x)?;
            ok &= r.holds;
            parts.push(format!("{}<={}<={}", r.lower, r.a, r.upper));
        }
        Ok((ok, parts.join(" ")))
    })());
    s.record("clustering_bounds_a_le_1e4", (|| {
        let table = sieve_primes(101)?;
        for n in 1..=10_000u64 {
            if !lemma_l_check(&table.factorize(n)?)?.holds() {
                return Ok((false, format!("fails at a={n}")));
            }
        }
        let one = aggregate_lw(&[1])?;
        let two = aggregate_lw(&[2])?;
        let ok = one.holds && two.holds && (one.sum_l - LN_2).abs() < 1e-15 && two.sum_w == 2.0;
        Ok((ok, "a <= 10^4 and {1}, {2}".into()))
    })());
    s.record("prime_blocks", (|| {
        let d = build_partition(200, 0.0, DEFAULT_LAMBDA0)?;
        let l = &d.lambdas()[..3];
        Ok((l == [2, 7, 131], format!("{l:?}")))
    })());
    s.record("identities", (|| {
        let id = identities(MAX_S_ZERO_K as u64)?;
        Ok((id.verified, format!("{} checks", id.rows.len())))
    })());
    s.record("order_stats_exact_vs_rational", (|| {
        let mut worst = 0.0f64;
        for k in 1..=6usize {
            for u in 0..=k + 1 {
                for v in 1..=k + 3 {
                    let e = q_exact_kuv(k, u as f64, v as f64)?;
                    let r = q_oracle_kuv(k, &ratio(u as i64, 1), &ratio(v as i64, 1))?;
                    worst = worst.max((e - r.to_f64().unwrap_or(f64::NAN)).abs());
                }
            }
        }
        Ok((worst <= 1e-12, format!("max diff {worst:e}")))
    })());
    s.record("smirnov_k1000", (|| {
        let mut ok = true;
        let mut parts = Vec::new();
        for x in [0.25f64, 0.5, 1.0] {
            let lim = smirnov_limit(x)?;
            let e100 = (q_exact_kuv(100, 10.0 * x, 100.0)? - lim).abs();
            let e1000 = (q_exact_kuv(1000, x * 1000f64.sqrt(), 1000.0)? - lim).abs();
            ok &= e1000 <= 0.05 && e1000 < e100;
            parts.push(format!("x={x}: {e100:.4} -> {e1000:.4}"));
        }
        Ok((ok, parts.join(", ")))
    })());
    s.record("order_stats_mc", (|| {
        let b = Boundary::from_kuv(2, 1.0, 2.0)?;
        let e = q_mc(&b, &cfg)?;
        Ok(((e.mean - 0.75).abs() <= 4.0 * e.stderr, format!("{} ± {}", e.mean, e.stderr)))
    })());
    let passed = s.a.rows.iter().filter(|r| r[1] == Value::Bool(true)).count();
    s.a.set("passed", passed);
    s.a.set("total", s.a.rows.len());
    s.a.set("samples", json!(cfg.samples));
    s.a.set("chunk", json!(cfg.chunk));
    Ok(s.a)
}
