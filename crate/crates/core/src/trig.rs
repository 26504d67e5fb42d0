//! `cos(pπ/q)` to high precision.
//!
//! For small `q` and high precision the cosine is computed as a root of the
//! scaled minimal polynomial `2^d Φ_n(x)` of `cos(2π/n)`, refined by Newton
//! iteration with a doubling precision ladder. Otherwise the generic MPFR
//! cosine is used after exact argument reduction to `(0, π/4)`.

use std::f64::consts::PI;

use rug::float::Round;
use rug::{Complete, Float, Integer};

use crate::error::{Error, Result};
use crate::modarith::gcd;
use crate::numctx::NumericContext;

/// Largest `n` for which [`cos_minpoly`] builds a polynomial.
pub const MINPOLY_MAX_N: u64 = 512;

/// `2^d Φ_n(x)` for `3 <= n <= 32`, coefficients from the constant term up.
static MINPOLY_TABLE: [&[i64]; 30] = [
    &[1, 2],
    &[0, 2],
    &[-1, 2, 4],
    &[-1, 2],
    &[-1, -4, 4, 8],
    &[-2, 0, 4],
    &[1, -6, 0, 8],
    &[-1, -2, 4],
    &[1, 6, -12, -32, 16, 32],
    &[-3, 0, 4],
    &[-1, 6, 24, -32, -80, 32, 64],
    &[1, -4, -4, 8],
    &[1, 8, -16, -8, 16],
    &[2, 0, -16, 0, 16],
    &[1, -8, -40, 80, 240, -192, -448, 128, 256],
    &[-1, -6, 0, 8],
    &[1, 10, -40, -160, 240, 672, -448, -1024, 256, 512],
    &[5, 0, -20, 0, 16],
    &[1, -16, 32, 48, -96, -32, 64],
    &[-1, 6, 12, -32, -16, 32],
    &[-1, -12, 60, 280, -560, -1792, 1792, 4608, -2304, -5120, 1024, 2048],
    &[1, 0, -16, 0, 16],
    &[-1, 10, 100, -40, -800, 32, 2240, 0, -2560, 0, 1024],
    &[-1, -6, 24, 32, -80, -32, 64],
    &[1, 18, 0, -240, 0, 864, 0, -1152, 0, 512],
    &[-7, 0, 56, 0, -112, 0, 64],
    &[-1, 14, 112, -448, -2016, 4032, 13440, -15360, -42240, 28160, 67584, -24576, -53248, 8192, 16384],
    &[1, -8, -16, 8, 16],
    &[-1, -16, 112, 672, -2016, -8064, 13440, 42240, -42240, -112640, 67584, 159744, -53248, -114688, 16384, 32768],
    &[2, 0, -64, 0, 320, 0, -512, 0, 256],
];

/// The integer polynomial `2^d Φ_n(x)` whose roots are `cos(2πj/n)`,
/// `gcd(j, n) = 1`, `0 < j < n/2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinPolyData {
    pub n: u64,
    pub d: usize,
    /// Constant term first.
    pub coeffs: Vec<Integer>,
    /// `⌈log₂ d⌉ + ⌈log₂ C(d, ⌊d/2⌋)⌉`; the monic coefficients are at most
    /// `2^b` in absolute value.
    pub coeff_bound: u32,
}

impl MinPolyData {
    /// Value and derivative at `x` by Horner's rule at precision `prec`.
    fn eval_with_derivative(&self, x: &Float, prec: u32) -> (Float, Float) {
        let mut f = Float::with_val(prec, &self.coeffs[self.d]);
        let mut df = Float::new(prec);
        for c in self.coeffs[..self.d].iter().rev() {
            df *= x;
            df += &f;
            f *= x;
            f += c;
        }
        (f, df)
    }

    pub fn eval(&self, x: &Float, prec: u32) -> Float {
        let mut f = Float::with_val(prec, &self.coeffs[self.d]);
        for c in self.coeffs[..self.d].iter().rev() {
            f *= x;
            f += c;
        }
        f
    }

    /// Bits in the largest coefficient.
    pub fn height_bits(&self) -> u32 {
        self.coeffs.iter().map(|c| c.significant_bits()).max().unwrap_or(0)
    }
}

pub fn euler_phi(mut n: u64) -> u64 {
    let mut phi = n;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            phi -= phi / p;
        }
        p += 1;
    }
    if n > 1 {
        phi -= phi / n;
    }
    phi
}

fn ceil_log2(x: &Integer) -> u32 {
    if *x <= 1 {
        0
    } else {
        (Integer::from(x - 1u32)).significant_bits()
    }
}

fn coeff_bound(d: usize) -> u32 {
    let central = Integer::binomial_u(d as u32, (d / 2) as u32).complete();
    ceil_log2(&Integer::from(d)) + ceil_log2(&central)
}

fn check_n(n: u64) -> Result<()> {
    if n < 3 {
        return Err(Error::Domain(format!("cos_minpoly needs n >= 3, got {n}")));
    }
    if n > MINPOLY_MAX_N {
        return Err(Error::Unsupported(format!("cos_minpoly bound is n <= {MINPOLY_MAX_N}, got {n}")));
    }
    Ok(())
}

/// `2^d Φ_n(x)`. Served from a table for `n <= 32`, built by a product tree
/// otherwise.
pub fn cos_minpoly(n: u64) -> Result<MinPolyData> {
    check_n(n)?;
    if n <= 32 {
        let coeffs: Vec<Integer> = MINPOLY_TABLE[n as usize - 3].iter().map(|&c| Integer::from(c)).collect();
        let d = coeffs.len() - 1;
        return Ok(MinPolyData {
            n,
            d,
            coeffs,
            coeff_bound: coeff_bound(d),
        });
    }
    cos_minpoly_tree(n, 0)
}

/// Product-tree construction with `extra` fraction bits beyond the default.
pub fn cos_minpoly_tree(n: u64, extra: u32) -> Result<MinPolyData> {
    check_n(n)?;
    let d = (euler_phi(n) / 2) as usize;
    let b = coeff_bound(d);
    let log_d = ceil_log2(&Integer::from(d + 1));
    let frac = d as u32 + b + 4 * log_d + 16 + extra;

    let ctx = NumericContext::new(frac + 32);
    let two_pi = ctx.float(ctx.const_pi() * 2u32);
    let leaves: Vec<Vec<Integer>> = (1..n.div_ceil(2))
        .filter(|&j| gcd(j, n) == 1)
        .map(|j| {
            let root = ctx.float(&two_pi * j) / n;
            let root = ctx.float(root.cos() << frac);
            let (root, _) = root.to_integer_round(Round::Nearest).expect("finite");
            vec![-root, Integer::from(1) << frac]
        })
        .collect();
    debug_assert_eq!(leaves.len(), d);

    let monic = product_tree(leaves, frac);
    let shift = frac - d as u32;
    let half = Integer::from(1) << (shift - 1);
    let coeffs = monic.into_iter().map(|c| (c + &half) >> shift).collect();
    Ok(MinPolyData {
        n,
        d,
        coeffs,
        coeff_bound: b,
    })
}

fn product_tree(mut level: Vec<Vec<Integer>>, frac: u32) -> Vec<Integer> {
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len().div_ceil(2));
        let mut it = level.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(fixed_mul(&a, &b, frac)),
                None => next.push(a),
            }
        }
        level = next;
    }
    level.pop().unwrap_or_else(|| vec![Integer::from(1) << frac])
}

fn fixed_mul(a: &[Integer], b: &[Integer], frac: u32) -> Vec<Integer> {
    let half = Integer::from(1) << (frac - 1);
    let mut out = vec![Integer::new(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += Integer::from(x * y);
        }
    }
    out.into_iter().map(|c| (c + &half) >> frac).collect()
}

/// Which algorithm computes a cosine.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CosPath {
    MinPoly,
    Generic,
}

/// Threshold rule: minimal polynomial iff `q < max_q` and
/// `r > base + per_q2 · q²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CosPathConfig {
    pub max_q: u64,
    pub base: u64,
    pub per_q2: u64,
}

impl Default for CosPathConfig {
    fn default() -> Self {
        Self {
            max_q: 250,
            base: 400,
            per_q2: 4,
        }
    }
}

impl CosPathConfig {
    /// Never use the minimal polynomial.
    pub fn generic_only() -> Self {
        Self {
            max_q: 0,
            ..Self::default()
        }
    }

    pub fn select(&self, q: u64, r: u32) -> CosPath {
        let fits = q < self.max_q && 2 * q <= MINPOLY_MAX_N;
        if fits && (r as u64) > self.base + self.per_q2 * q * q {
            CosPath::MinPoly
        } else {
            CosPath::Generic
        }
    }
}

pub fn select_cos_path(q: u64, r: u32) -> CosPath {
    CosPathConfig::default().select(q, r)
}

/// `cos(pπ/q) = ±cos(p'π/q')` with `0 <= p'/q' <= 1/2` in lowest terms.
fn fold(p: i64, q: u64) -> (u64, u64, bool) {
    let q_i = q as i128;
    let mut p = (p as i128).rem_euclid(2 * q_i);
    let mut neg = false;
    if p > q_i {
        p = 2 * q_i - p;
    }
    if 2 * p > q_i {
        p = q_i - p;
        neg = true;
    }
    let p = p as u64;
    let g = gcd(p, q);
    (p / g, q / g, neg)
}

/// Exact value when the folded angle is 0, π/3 or π/2.
fn exact_value(p: u64, q: u64) -> Option<(i32, u32)> {
    match (p, q) {
        (0, _) => Some((1, 0)),
        (1, 2) => Some((0, 0)),
        (1, 3) => Some((1, 1)),
        _ => None,
    }
}

/// `cos(pπ/q)` in double precision, argument reduced to `(0, π/4)`.
pub fn cos_pi_f64(p: i64, q: u64) -> f64 {
    let (p, q, neg) = fold(p, q);
    let v = if let Some((num, shift)) = exact_value(p, q) {
        num as f64 / (1u32 << shift) as f64
    } else if 4 * p > q {
        (PI * ((q - 2 * p) as f64 / (2 * q) as f64)).sin()
    } else {
        (PI * (p as f64 / q as f64)).cos()
    };
    if neg {
        -v
    } else {
        v
    }
}

fn cos_generic(p: u64, q: u64, r: u32) -> Float {
    let work = NumericContext::new(r + 8);
    let pi = work.const_pi();
    let v = if 4 * p > q {
        let angle = work.float(&pi * (q - 2 * p)) / (2 * q);
        work.float(angle.sin())
    } else {
        let angle = work.float(&pi * p) / q;
        work.float(angle.cos())
    };
    Float::with_val(r, v)
}

/// Precision ladder `r + 8, (r + 8)/2 + 8, ...`, lowest rung first. Every rung
/// is at least 53 bits.
fn ladder(r: u32) -> Vec<u32> {
    let mut rungs = vec![r.max(53) + 8];
    while let Some(&last) = rungs.last() {
        let next = last / 2 + 8;
        if next < 53 || next >= last {
            break;
        }
        rungs.push(next);
    }
    rungs.reverse();
    rungs
}

/// Newton refinement of the root of `poly` nearest `seed`, optionally
/// recording the iterate after every rung.
fn newton(poly: &MinPolyData, seed: f64, r: u32, mut trace: Option<&mut Vec<(u32, Float)>>) -> Float {
    let height = poly.height_bits();
    let log_d = ceil_log2(&Integer::from(poly.d + 1));
    // loss of relative accuracy in f(x)/f'(x) when |f'| is small
    let probe = Float::with_val(height + 128, seed);
    let (_, df) = poly.eval_with_derivative(&probe, height + 128);
    let deficit = df.get_exp().map_or(0, |e| (-e).max(0) as u32);
    let mut x = Float::with_val(53, seed);
    for rung in ladder(r) {
        let prec = rung + height + log_d + deficit + 8;
        x.set_prec(prec);
        let (f, df) = poly.eval_with_derivative(&x, prec);
        if !f.is_zero() {
            x -= f / df;
        }
        x.set_prec_round(rung, Round::Nearest);
        if let Some(t) = trace.as_deref_mut() {
            t.push((rung, x.clone()));
        }
    }
    x
}

fn reduced(p: i64, q: u64) -> (i64, u64) {
    assert!(q >= 1, "cos(pπ/q) needs q >= 1");
    let g = gcd(p.unsigned_abs(), q);
    (p / g as i64, q / g)
}

fn cos_minpoly_path(p: i64, q: u64, r: u32, trace: Option<&mut Vec<(u32, Float)>>) -> Float {
    let n = (1 + p.rem_euclid(2) as u64) * q;
    let poly = cos_minpoly(n).expect("path selection keeps n within bounds");
    let x = newton(&poly, cos_pi_f64(p, q), r, trace);
    Float::with_val(r, x)
}

/// `cos(pπ/q)` to `r` bits using the default path selection.
pub fn cos_pi_rational(p: i64, q: u64, r: u32) -> Float {
    cos_pi_rational_with(p, q, r, &CosPathConfig::default())
}

pub fn cos_pi_rational_with(p: i64, q: u64, r: u32, cfg: &CosPathConfig) -> Float {
    let (p, q) = reduced(p, q);
    cos_pi_on_path(p, q, r, cfg.select(q, r))
}

/// `cos(pπ/q)` to `r` bits on an explicit path.
pub fn cos_pi_on_path(p: i64, q: u64, r: u32, path: CosPath) -> Float {
    let r = r.max(53);
    let (p, q) = reduced(p, q);
    let (fp, fq, neg) = fold(p, q);
    let v = if let Some((num, shift)) = exact_value(fp, fq) {
        Float::with_val(r, num) >> shift
    } else {
        match path {
            CosPath::MinPoly if q >= 3 && 2 * q <= MINPOLY_MAX_N => return cos_minpoly_path(p, q, r, None),
            _ => cos_generic(fp, fq, r),
        }
    };
    if neg {
        -v
    } else {
        v
    }
}

/// The Newton iterates `(rung, x)` for `cos(pπ/q)` on the minimal-polynomial
/// path.
pub fn newton_trace(p: i64, q: u64, r: u32) -> Vec<(u32, Float)> {
    let (p, q) = reduced(p, q);
    let mut trace = Vec::new();
    cos_minpoly_path(p, q, r.max(53), Some(&mut trace));
    trace
}
