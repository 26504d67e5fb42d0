//! Weaver's congruences `p(Ak + B) = 0 (mod m)` for `m` in {13, 17, 19, 23, 29, 31}.
//!
//! A tuple `(m, ℓ, ε)` is detected by one evaluation of `p(n)` modulo `m`
//! ([`weaver_test`]) and stands for a family of arithmetic progressions
//! ([`expand_tuple`]). [`search`] scans primes `ℓ` in a range and keeps an
//! append-only checkpoint so an interrupted scan can pick up where it left off.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;

use rug::ops::Pow;
use rug::Integer;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hrr::partition_hrr;
use crate::modarith::{is_prime, jacobi, mod_inv, pow_mod};

pub const WEAVER_MODULI: [u64; 6] = [13, 17, 19, 23, 29, 31];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct CongruenceTuple {
    pub m: u64,
    pub l: u64,
    pub eps: i8,
}

impl std::fmt::Display for CongruenceTuple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {} {}", self.m, self.l, self.eps)
    }
}

/// `p(a k + b) = 0 (mod m)` for all `k >= 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CongruenceProgression {
    pub a: Integer,
    pub b: Integer,
    pub m: u64,
    /// The free parameter this progression was generated from.
    pub delta: u64,
}

fn check_pair(m: u64, l: u64) -> Result<()> {
    if !WEAVER_MODULI.contains(&m) {
        return Err(Error::Domain(format!("m = {m} is not one of {WEAVER_MODULI:?}")));
    }
    if l < 5 || l == m || !is_prime(l) {
        return Err(Error::Domain(format!("l = {l} must be a prime >= 5 distinct from m")));
    }
    Ok(())
}

fn p_mod(n: u64, m: u64) -> u64 {
    partition_hrr(n).value.mod_u(m as u32) as u64
}

/// The argument `m r_m (ℓ²-1)/24 + δ_m` at which Weaver's test evaluates `p`.
pub fn weaver_point(m: u64, l: u64) -> Result<u64> {
    check_pair(m, l)?;
    let delta_m = mod_inv(24, m)?;
    let r_m = (24 - m % 24) % 24;
    let n = m as u128 * r_m as u128 * ((l as u128 * l as u128 - 1) / 24) + delta_m as u128;
    u64::try_from(n).map_err(|_| Error::Range(format!("weaver point for l = {l} exceeds 64 bits")))
}

/// Weaver's test for the pair `(m, ℓ)`.
pub fn weaver_test(m: u64, l: u64) -> Result<Option<CongruenceTuple>> {
    let n = weaver_point(m, l)?;
    let delta_m = mod_inv(24, m)?;
    let r_m = (24 - m % 24) % 24;
    let v = (m - 3) / 2;
    let sign_v: i64 = if v % 2 == 0 { 1 } else { -1 };

    let x = p_mod(delta_m, m);
    let y = p_mod(n, m);
    let f = jacobi(3, l)? as i64 * jacobi(sign_v * r_m as i64, l)? as i64;
    let l_pow = pow_mod(l % m, v - 1, m);
    let x_l = x * l_pow % m;
    let fx = f.rem_euclid(m as i64) as u64 * x_l % m;
    let t = (y + fx) % m;
    // t is the Hecke eigenvalue at ℓ times x; congruences need it to be
    // 0 or ±x ℓ^{v-1}
    let scaled = t * mod_inv(x_l as i64, m)? % m;
    let omega: i8 = match scaled {
        0 => 0,
        1 => 1,
        t if t == m - 1 => -1,
        _ => return Ok(None),
    };
    let eps = omega * jacobi(3 * sign_v, l)?;
    Ok(Some(CongruenceTuple { m, l, eps }))
}

/// `(m ℓ^{3-|ε|}, alpha24)` with `m ℓ^{3-|ε|} alpha24 = -1 (mod 24)`.
fn base_and_alpha(t: &CongruenceTuple) -> (Integer, u64) {
    let base = Integer::from(t.m) * Integer::from(t.l).pow(3 - t.eps.unsigned_abs() as u32);
    let inv = mod_inv(base.mod_u(24) as i64, 24).expect("m and l are prime to 24");
    (base, (24 - inv) % 24)
}

/// Whether `δ` yields a congruence for tuple `t`.
pub fn admissible_delta(t: &CongruenceTuple, delta: u64) -> bool {
    let (_, alpha24) = base_and_alpha(t);
    let s = (24 * delta as u128 + alpha24 as u128) % t.l as u128;
    match t.eps {
        0 => s != 0,
        e => jacobi(s as i64, t.l).map(|j| j == e).unwrap_or(false),
    }
}

/// The progression of tuple `t` for one choice of `δ`.
pub fn progression(t: &CongruenceTuple, delta: u64) -> CongruenceProgression {
    let (base, alpha24) = base_and_alpha(t);
    let a = Integer::from(&base * t.l);
    let head = Integer::from(&base * alpha24) + 1u32;
    debug_assert!(head.is_divisible_u(24));
    let b = head / 24u32 + Integer::from(&base * delta);
    CongruenceProgression { a, b, m: t.m, delta }
}

/// One progression per admissible `δ` in `[0, ℓ)`.
pub fn expand_tuple(t: &CongruenceTuple) -> Vec<CongruenceProgression> {
    (0..t.l).filter(|&d| admissible_delta(t, d)).map(|d| progression(t, d)).collect()
}

/// Checks `p(A k + B) = 0 (mod m)` for `0 <= k <= k_max`.
pub fn verify_progression(prog: &CongruenceProgression, k_max: u64) -> Result<bool> {
    for k in 0..=k_max {
        let n = Integer::from(&prog.a * k) + &prog.b;
        let n = n
            .to_u64()
            .ok_or_else(|| Error::Range(format!("p(n) for n = {n} is out of reach")))?;
        if p_mod(n, prog.m) != 0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Primes in `[lo, hi]` by a segmented sieve.
pub fn primes_in(lo: u64, hi: u64) -> Vec<u64> {
    if hi < 2 || lo > hi {
        return Vec::new();
    }
    let lo = lo.max(2);
    let root = (hi as f64).sqrt() as u64 + 1;
    let mut small = vec![true; root as usize + 1];
    let mut base = Vec::new();
    for i in 2..=root as usize {
        if small[i] {
            base.push(i as u64);
            for j in (i * i..=root as usize).step_by(i) {
                small[j] = false;
            }
        }
    }
    const SEGMENT: u64 = 1 << 16;
    let mut out = Vec::new();
    let mut start = lo;
    while start <= hi {
        let end = (start + SEGMENT - 1).min(hi);
        let mut mark = vec![true; (end - start + 1) as usize];
        for &p in &base {
            if p * p > end {
                break;
            }
            let first = (start.div_ceil(p) * p).max(p * p);
            for j in (first..=end).step_by(p as usize) {
                mark[(j - start) as usize] = false;
            }
        }
        out.extend(mark.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| start + i as u64));
        start = end + 1;
    }
    out
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub m: u64,
    pub l_lo: u64,
    pub l_hi: u64,
    pub checkpoint: Option<PathBuf>,
    /// Worker threads per chunk.
    pub jobs: usize,
    /// Primes per checkpointed chunk.
    pub chunk: usize,
}

impl SearchConfig {
    pub fn new(m: u64, l_lo: u64, l_hi: u64) -> Self {
        Self {
            m,
            l_lo,
            l_hi,
            checkpoint: None,
            jobs: 1,
            chunk: 32,
        }
    }
}

/// Contents of a checkpoint file.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Checkpoint {
    pub tuples: Vec<CongruenceTuple>,
    pub last_l: Option<u64>,
}

/// Reads `m ℓ ε` records and `# last ℓ=<value>` progress lines.
pub fn read_checkpoint(reader: impl BufRead) -> Result<Checkpoint> {
    let mut cp = Checkpoint::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let text = line.trim();
        let bad = || Error::Checkpoint {
            line: i + 1,
            text: line.clone(),
        };
        if text.is_empty() {
            continue;
        }
        if let Some(rest) = text.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(v) = rest.strip_prefix("last") {
                let v = v.trim();
                let v = v
                    .strip_prefix("ℓ=")
                    .or_else(|| v.strip_prefix("l="))
                    .ok_or_else(bad)?;
                cp.last_l = Some(v.trim().parse().map_err(|_| bad())?);
            }
            continue;
        }
        let fields: Vec<&str> = text.split_whitespace().collect();
        let [m, l, e] = fields[..] else {
            return Err(bad());
        };
        let eps: i8 = e.parse().map_err(|_| bad())?;
        if !(-1..=1).contains(&eps) {
            return Err(bad());
        }
        cp.tuples.push(CongruenceTuple {
            m: m.parse().map_err(|_| bad())?,
            l: l.parse().map_err(|_| bad())?,
            eps,
        });
    }
    Ok(cp)
}

fn test_chunk(m: u64, primes: &[u64], jobs: usize) -> Result<Vec<CongruenceTuple>> {
    let jobs = jobs.max(1).min(primes.len().max(1));
    if jobs == 1 {
        let mut hits = Vec::new();
        for &l in primes {
            if let Some(t) = weaver_test(m, l)? {
                hits.push(t);
            }
        }
        return Ok(hits);
    }
    let per = primes.len().div_ceil(jobs);
    let results: Vec<Result<Vec<CongruenceTuple>>> = std::thread::scope(|s| {
        let handles: Vec<_> = primes
            .chunks(per)
            .map(|part| s.spawn(move || test_chunk(m, part, 1)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut hits = Vec::new();
    for r in results {
        hits.extend(r?);
    }
    hits.sort();
    Ok(hits)
}

/// Scans primes `ℓ` in the configured range, calling `on_hit` for each new
/// tuple in increasing `ℓ`. Returns every tuple in range, including those
/// recovered from the checkpoint.
pub fn search(cfg: &SearchConfig, mut on_hit: impl FnMut(&CongruenceTuple)) -> Result<Vec<CongruenceTuple>> {
    if !WEAVER_MODULI.contains(&cfg.m) {
        return Err(Error::Domain(format!("m = {} is not one of {WEAVER_MODULI:?}", cfg.m)));
    }
    let mut found: BTreeMap<u64, CongruenceTuple> = BTreeMap::new();
    let mut resume_after = None;
    let mut sink: Option<File> = None;
    if let Some(path) = &cfg.checkpoint {
        if path.exists() {
            let cp = read_checkpoint(BufReader::new(File::open(path)?))?;
            for t in cp.tuples {
                if t.m != cfg.m {
                    return Err(Error::Domain(format!(
                        "checkpoint {} holds tuples for m = {}, not {}",
                        path.display(),
                        t.m,
                        cfg.m
                    )));
                }
                found.insert(t.l, t);
            }
            resume_after = cp.last_l;
        }
        sink = Some(OpenOptions::new().create(true).append(true).open(path)?);
    }

    let lo = match resume_after {
        Some(last) => cfg.l_lo.max(last + 1),
        None => cfg.l_lo,
    }
    .max(5);
    let primes: Vec<u64> = primes_in(lo, cfg.l_hi).into_iter().filter(|&l| l != cfg.m).collect();
    for chunk in primes.chunks(cfg.chunk.max(1)) {
        let hits = test_chunk(cfg.m, chunk, cfg.jobs)?;
        let mut record = String::new();
        for t in hits {
            if found.insert(t.l, t).is_none() {
                record.push_str(&format!("{t}\n"));
                on_hit(&t);
            }
        }
        if let Some(f) = sink.as_mut() {
            record.push_str(&format!("# last ℓ={}\n", chunk[chunk.len() - 1]));
            f.write_all(record.as_bytes())?;
            f.flush()?;
        }
    }
    Ok(found
        .into_values()
        .filter(|t| (cfg.l_lo..=cfg.l_hi).contains(&t.l))
        .collect())
}
