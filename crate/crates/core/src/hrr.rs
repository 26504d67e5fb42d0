//! The Hardy-Ramanujan-Rademacher series for `p(n)`.
//!
//! ```text
//! p(n) = Σ_{k=1}^{N} √(3/k) · 4/(24n-1) · A_k(n) · U(C/k) + R(n, N)
//! U(x) = cosh x - sinh(x)/x,   C = (π/6) √(24n-1)
//! ```
//!
//! `N` is chosen so the remainder bound is below 1/4, and every term is
//! evaluated at a precision that keeps its absolute error below `1/(8N)`.
//! Precisions shrink with `k`; once they reach 53 bits the remaining terms
//! are evaluated in hardware doubles.

use std::time::{Duration, Instant};

use rug::float::Round;
use rug::{Float, Integer, Rational};

use crate::expsum::{ak_factor, TermFactorization};
use crate::numctx::{NumericContext, MIN_PRECISION};
use crate::trig::{cos_pi_f64, cos_pi_rational_with, CosPath, CosPathConfig};

/// Values below this come from a table.
pub const TABLE_LIMIT: u64 = 128;

/// Extra bits carried by the high-precision accumulator beyond `r1`.
const S1_GUARD: u32 = 32;

const SMALL_TABLE: [u64; TABLE_LIMIT as usize] = small_table();

const fn small_table() -> [u64; TABLE_LIMIT as usize] {
    let mut p = [0u64; TABLE_LIMIT as usize];
    p[0] = 1;
    let mut n = 1;
    while n < TABLE_LIMIT as usize {
        let mut s: i64 = 0;
        let mut k = 1;
        loop {
            let g1 = k * (3 * k - 1) / 2;
            if g1 > n {
                break;
            }
            let sign = if k % 2 == 1 { 1 } else { -1 };
            s += sign * p[n - g1] as i64;
            let g2 = k * (3 * k + 1) / 2;
            if g2 <= n {
                s += sign * p[n - g2] as i64;
            }
            k += 1;
        }
        p[n] = s as u64;
        n += 1;
    }
    p
}

/// `p(n)` for `n < 128`.
pub fn small_partition(n: u64) -> Option<u64> {
    SMALL_TABLE.get(n as usize).copied()
}

/// Upper bound on the remainder `|R(n, N)|` after `N` terms.
pub fn remainder_bound(n: u64, terms: u64) -> f64 {
    assert!(n >= 2 && terms >= 1);
    use std::f64::consts::PI;
    let up = 1.0 + 1e-12;
    let (n, big_n) = (n as f64, terms as f64);
    let first = 44.0 * PI * PI / (225.0 * 3f64.sqrt()) / big_n.sqrt();
    let second = PI * 2f64.sqrt() / 75.0 * (big_n / (n - 1.0)).sqrt() * (PI / big_n * (2.0 * n / 3.0).sqrt()).sinh();
    (first * up + second * up) * up
}

/// Smallest `N` with `remainder_bound(n, N) < 0.25`.
pub fn terms_needed(n: u64) -> u64 {
    let ok = |t: u64| remainder_bound(n, t) < 0.25;
    let mut hi = 1u64;
    while !ok(hi) {
        hi *= 2;
    }
    let mut lo = hi / 2;
    // invariant: !ok(lo) unless lo == 0, ok(hi)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    while hi > 1 && ok(hi - 1) {
        hi -= 1;
    }
    hi
}

/// `C(n) = (π/6)√(24n-1)` in double precision.
pub fn c_f64(n: u64) -> f64 {
    std::f64::consts::PI / 6.0 * (24.0 * n as f64 - 1.0).sqrt()
}

/// Upper bound on `log₂ |t_k|`, from `|A_k| <= k` and `U(x) < e^x / 2`.
pub fn term_magnitude_bound(k: u64, n: u64) -> f64 {
    let m = 24.0 * n as f64 - 1.0;
    let k_f = k as f64;
    let ln = m.sqrt() * std::f64::consts::PI / (6.0 * k_f) + k_f.ln() / 2.0 - m.ln()
        + (2f64.ln() + 3f64.ln() / 2.0);
    ln / 2f64.ln()
}

/// Working precision for term `k` so that its absolute error is below `1/(8N)`.
pub fn term_precision(k: u64, n: u64, terms: u64) -> u32 {
    let x = c_f64(n) / k as f64;
    let m = (k as f64).log2();
    let r = ((terms as f64).log2() + term_magnitude_bound(k, n) + (10.0 * x + 7.0 * m + 22.0).log2() + 3.0)
        .max(0.5 * (n as f64).log2() + 5.0)
        .max(11.0);
    (r.ceil() as u32).max(MIN_PRECISION)
}

/// Everything about an evaluation that depends on `n` only.
#[derive(Clone, Debug)]
pub struct HrrPlan {
    pub n: u64,
    pub terms: u64,
    /// `C(n)` at `r1 + 3` bits.
    pub c: Float,
    pub r1: u32,
    /// `exp(C)` at `r1 + 3` bits.
    pub exp_c: Float,
}

impl HrrPlan {
    pub fn c_f64(&self) -> f64 {
        self.c.to_f64()
    }
}

pub fn choose_plan(n: u64) -> HrrPlan {
    assert!(n >= TABLE_LIMIT, "choose_plan needs n >= {TABLE_LIMIT}");
    let terms = terms_needed(n);
    let r1 = term_precision(1, n, terms);
    let c = c_exact(n, r1 + 3);
    let exp_c = Float::with_val(r1 + 3, c.exp_ref());
    HrrPlan { n, terms, c, r1, exp_c }
}

/// `C(n)` rounded to `prec` bits from a wider evaluation.
fn c_exact(n: u64, prec: u32) -> Float {
    let work = NumericContext::new(prec + 16);
    let root = work.float(Integer::from(24u128 * n as u128 - 1)).sqrt();
    let c = work.float(work.const_pi() * root) / 6u32;
    Float::with_val(prec, c)
}

/// How `U(C/k)` obtains its hyperbolic functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UPath {
    /// `e = exp(C)^{1/k}`, `cosh = (e + 1/e)/2`, `sinh = (e - 1/e)/2`.
    Root,
    Direct,
}

/// Bits lost to cancellation in `cosh x - sinh(x)/x` when `x` is small.
fn u_guard(x: f64) -> u32 {
    if x >= 3.0 {
        0
    } else {
        (2.0 * (3.0 / x).log2()).ceil() as u32 + 4
    }
}

/// `U(x) = cosh x - sinh(x)/x` at `r` bits.
pub fn u_direct(x: &Float, r: u32) -> Float {
    let w = r + u_guard(x.to_f64()) + 4;
    let x = Float::with_val(w, x);
    let (s, c) = x.clone().sinh_cosh(Float::new(w));
    Float::with_val(r, c - s / x)
}

/// `U(C/k)` at `r` bits.
pub fn eval_u(plan: &HrrPlan, k: u64, r: u32, path: UPath) -> Float {
    let w = r + u_guard(plan.c_f64() / k as f64) + 4;
    let x = Float::with_val(w, &plan.c / k);
    match path {
        UPath::Direct => u_direct(&x, r),
        UPath::Root => {
            let mut e = Float::with_val(w + 8, &plan.exp_c);
            if k > 1 {
                e.root_round(k as u32, Round::Nearest);
            }
            e.set_prec(w);
            let inv = Float::with_val(w, e.recip_ref());
            let cosh = Float::with_val(w, &e + &inv) / 2u32;
            let sinh = Float::with_val(w, &e - &inv) / 2u32;
            Float::with_val(r, cosh - sinh / x)
        }
    }
}

/// `U(x)` in double precision.
pub fn u_f64(x: f64) -> f64 {
    if x > 0.5 {
        return x.cosh() - x.sinh() / x;
    }
    // Σ_{j>=1} x^{2j} 2j / (2j+1)!
    let x2 = x * x;
    let mut pow = 1.0;
    let mut fact = 1.0;
    let mut sum = 0.0;
    for j in 1..12 {
        pow *= x2;
        fact *= ((2 * j) * (2 * j + 1)) as f64;
        sum += pow * (2 * j) as f64 / fact;
    }
    sum
}

/// Tuning knobs of the evaluator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HrrOptions {
    /// Evaluate terms needing at most 53 bits in hardware doubles.
    pub double_tail: bool,
    /// Two-accumulator summation; otherwise a single `r1`-precision sum.
    pub amortized: bool,
    pub cos_config: CosPathConfig,
    /// `U(C/k)` comes from `exp(C)^{1/k}` for `k` below this.
    pub root_limit: u64,
}

impl Default for HrrOptions {
    fn default() -> Self {
        Self {
            double_tail: true,
            amortized: true,
            cos_config: CosPathConfig::default(),
            root_limit: 35,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartitionResult {
    pub value: Integer,
    pub n: u64,
    pub terms_used: u64,
    /// Floating sum minus the returned integer.
    pub residual: f64,
}

#[derive(Clone, Debug, Default)]
pub struct HrrStats {
    pub r1: u32,
    pub nonzero_terms: u64,
    pub double_terms: u64,
    pub minpoly_cosines: u64,
    pub elapsed: Duration,
    /// Time for `C`, `exp(C)` and the `k = 1` term.
    pub first_term: Duration,
}

/// `√(3/k) √(a/b)` as one reduced surd.
fn merged_surd(k: u64, f: &TermFactorization) -> (u128, u128) {
    let a = 3 * f.surd_num as u128;
    let b = k as u128 * f.surd_den as u128;
    let g = gcd_u128(a, b);
    (a / g, b / g)
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn term_mp(plan: &HrrPlan, k: u64, f: &TermFactorization, r: u32, opts: &HrrOptions, stats: &mut HrrStats) -> Float {
    let (sa, sb) = merged_surd(k, f);
    let mut t = Float::with_val(r, Rational::from((sa, sb)));
    t.sqrt_mut();
    t *= 4u32;
    t /= Integer::from(24u128 * plan.n as u128 - 1);
    for a in &f.angles {
        if opts.cos_config.select(a.q, r) == CosPath::MinPoly {
            stats.minpoly_cosines += 1;
        }
        t *= cos_pi_rational_with(a.p as i64, a.q, r, &opts.cos_config);
    }
    let path = if k < opts.root_limit { UPath::Root } else { UPath::Direct };
    t *= eval_u(plan, k, r, path);
    if f.sign < 0 {
        t = -t;
    }
    t
}

fn term_f64(plan_c: f64, n: u64, k: u64, f: &TermFactorization) -> f64 {
    let (sa, sb) = merged_surd(k, f);
    let mut t = (sa as f64 / sb as f64).sqrt() * 4.0 / (24.0 * n as f64 - 1.0);
    for a in &f.angles {
        t *= cos_pi_f64(a.p as i64, a.q);
    }
    t * u_f64(plan_c / k as f64) * f.sign as f64
}

pub fn partition_hrr(n: u64) -> PartitionResult {
    partition_hrr_with(n, &HrrOptions::default())
}

pub fn partition_hrr_with(n: u64, opts: &HrrOptions) -> PartitionResult {
    partition_hrr_stats(n, opts).0
}

/// Evaluates `p(n)` and reports how the work was spent.
pub fn partition_hrr_stats(n: u64, opts: &HrrOptions) -> (PartitionResult, HrrStats) {
    let start = Instant::now();
    if let Some(v) = small_partition(n) {
        let stats = HrrStats {
            elapsed: start.elapsed(),
            ..HrrStats::default()
        };
        return (
            PartitionResult {
                value: Integer::from(v),
                n,
                terms_used: 0,
                residual: 0.0,
            },
            stats,
        );
    }

    let plan = choose_plan(n);
    let c_f = plan.c_f64();
    let mut stats = HrrStats {
        r1: plan.r1,
        ..HrrStats::default()
    };
    let acc_prec = plan.r1 + S1_GUARD;
    let guard = 64 - plan.terms.leading_zeros() + 3;
    let mut s1 = Float::new(acc_prec);
    let mut level = plan.r1;
    let mut s2 = Float::new(if opts.amortized { level + guard } else { acc_prec });

    for k in 1..=plan.terms {
        let f = ak_factor(k, n);
        if !f.zero {
            stats.nonzero_terms += 1;
            let r = term_precision(k, n, plan.terms);
            if opts.double_tail && r <= MIN_PRECISION {
                stats.double_terms += 1;
                s2 += term_f64(c_f, n, k, &f);
            } else {
                s2 += term_mp(&plan, k, &f, r, opts, &mut stats);
            }
            if opts.amortized && 2 * r < level {
                s1 += &s2;
                level = r;
                s2 = Float::new(level + guard);
            }
        }
        if k == 1 {
            stats.first_term = start.elapsed();
        }
    }

    let sum = Float::with_val(acc_prec, &s1 + &s2);
    let (value, _) = sum.to_integer_round(Round::Nearest).expect("finite sum");
    let residual = Float::with_val(acc_prec, &sum - &value).to_f64();
    stats.elapsed = start.elapsed();
    (
        PartitionResult {
            value,
            n,
            terms_used: plan.terms,
            residual,
        },
        stats,
    )
}

/// `p(n)`.
pub fn partition(n: u64) -> Integer {
    partition_hrr(n).value
}
