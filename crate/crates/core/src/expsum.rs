//! The exponential sums `A_k(n)`.
//!
//! Three independent routes:
//!
//! * [`ak_naive`] sums `cos(π (s(h,k) - 2hn/k))` over `h` coprime to `k`,
//!   with exact Dedekind sums;
//! * [`ak_selberg`] sums `O(√k)` cosines over the solutions of a quadratic
//!   congruence, found by a multiplication-free scan;
//! * [`ak_factor`] splits `k` into prime powers and returns an exact symbolic
//!   product `±√(a/b) ∏ cos(p_i π / q_i)` with one cosine per prime power.
//!
//! Only the last one is used by the partition function evaluator; the other
//! two are reference implementations.

use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};
use crate::modarith::{factorize, gcd, jacobi, mod_inv, mul_mod, sqrt_mod_prime_power, PrimePower};
use crate::numctx::NumericContext;
use crate::trig::{cos_pi_f64, cos_pi_rational};

/// Exact value of a Dedekind sum `s(h, k)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DedekindSum(Rational);

impl DedekindSum {
    pub fn value(&self) -> &Rational {
        &self.0
    }

    pub fn into_rational(self) -> Rational {
        self.0
    }
}

/// `s(h,k)` straight from the defining sum over `i = 1 .. k-1`.
pub fn dedekind_sum_naive(h: i64, k: u64) -> DedekindSum {
    assert!(k >= 1);
    let k_i = k as i128;
    let h_red = (h as i128).rem_euclid(k_i);
    // (i/k) (hi/k - floor(hi/k) - 1/2) = i (2 (hi mod k) - k) / (2k^2)
    let num: i128 = (1..k_i).map(|i| i * (2 * ((h_red * i) % k_i) - k_i)).sum();
    DedekindSum(Rational::from((num, 2 * k_i * k_i)))
}

/// `s(h,k)` by reciprocity, `O(log k)` steps. Requires `gcd(h, k) = 1`.
pub fn dedekind_sum(h: i64, k: u64) -> Result<DedekindSum> {
    if k == 0 || gcd(h.unsigned_abs(), k) != 1 {
        return Err(Error::Domain(format!("s({h}, {k}) needs gcd(h, k) = 1")));
    }
    let mut h = (h as i128).rem_euclid(k as i128) as u64;
    let mut k = k;
    let mut acc = Rational::new();
    let mut negate = false;
    // s(h,k) = -s(k mod h, h) + (h^2 + k^2 + 1) / (12hk) - 1/4
    while h != 0 {
        let mut term = Rational::from((h as u128 * h as u128 + k as u128 * k as u128 + 1, 12 * h as u128 * k as u128));
        term -= Rational::from((1, 4));
        if negate {
            acc -= term;
        } else {
            acc += term;
        }
        negate = !negate;
        (h, k) = (k % h, h);
    }
    Ok(DedekindSum(acc))
}

/// `cos(π x)` for rational `x`, from the context's generic cosine.
fn cos_pi_generic(x: &Rational, ctx: &NumericContext) -> Float {
    // reduce x to [0, 2)
    let (num, den) = x.clone().into_numer_denom();
    let period = Integer::from(&den * 2u32);
    let mut num = num % &period;
    if num < 0 {
        num += &period;
    }
    let work = ctx.widen(16);
    let angle = work.float(&work.const_pi() * &num) / &den;
    ctx.float(angle.cos())
}

/// `A_k(n)` from its definition as a sum over reduced residues.
pub fn ak_naive(k: u64, n: u64, ctx: &NumericContext) -> Float {
    assert!(k >= 1);
    let work = ctx.widen(16 + 64 - k.leading_zeros());
    let mut sum = work.zero();
    let two_n_over_k = Rational::from((2 * (n % k) as u128, k as u128));
    for h in (0..k).filter(|&h| gcd(h, k) == 1) {
        let s = dedekind_sum(h as i64, k).expect("coprime by construction");
        let angle = s.into_rational() - Rational::from(&two_n_over_k * h);
        sum += cos_pi_generic(&angle, &work);
    }
    ctx.float(sum)
}

/// `A_k(n)` from Selberg's formula, scanning `0 <= l < 2k` for solutions of
/// `(3l^2 + l)/2 = -n (mod k)` with a pair of coupled additive recurrences.
pub fn ak_selberg(k: u64, n: u64, ctx: &NumericContext) -> Float {
    if k <= 1 {
        return ctx.float(k);
    }
    if k == 2 {
        return ctx.float(if n % 2 == 0 { 1 } else { -1 });
    }
    let work = ctx.widen(16 + 64 - k.leading_zeros());
    let pi = work.const_pi();
    let mut s = work.zero();
    let (mut r, mut m) = (2u64, n % k);
    for l in 0..2 * k {
        if m == 0 {
            let angle = work.float(&pi * (6 * l + 1)) / (6 * k);
            let c = work.float(angle.cos());
            if l % 2 == 0 {
                s += c;
            } else {
                s -= c;
            }
        }
        m += r;
        if m >= k {
            m -= k;
        }
        r += 3;
        if r >= k {
            r -= k;
        }
    }
    let scale = work.float(Rational::from((k, 3))).sqrt();
    ctx.float(s * scale)
}

/// The angle `p π / q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CosineAngle {
    pub p: u64,
    pub q: u64,
}

/// `A_k(n) = sign · √(surd_num / surd_den) · ∏ cos(p_i π / q_i)`, or zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TermFactorization {
    pub zero: bool,
    pub sign: i8,
    pub surd_num: u64,
    pub surd_den: u64,
    pub angles: Vec<CosineAngle>,
}

impl TermFactorization {
    fn one() -> Self {
        Self {
            zero: false,
            sign: 1,
            surd_num: 1,
            surd_den: 1,
            angles: Vec::new(),
        }
    }

    fn vanish(&mut self) {
        *self = Self {
            zero: true,
            sign: 1,
            surd_num: 0,
            surd_den: 1,
            angles: Vec::new(),
        };
    }

    fn negate_if(&mut self, flip: bool) {
        if flip {
            self.sign = -self.sign;
        }
    }

    fn scale_surd(&mut self, num: u64, den: u64) {
        let a = self.surd_num as u128 * num as u128;
        let b = self.surd_den as u128 * den as u128;
        let g = gcd_u128(a, b);
        self.surd_num = u64::try_from(a / g).expect("surd numerator overflow");
        self.surd_den = u64::try_from(b / g).expect("surd denominator overflow");
    }

    /// Multiplies by `cos(p π / q)`, normalised to `0 < p/q < 1/2` in lowest
    /// terms with the sign folded out.
    fn push_cos(&mut self, p: i128, q: u64) {
        let q_i = q as i128;
        let mut p = p.rem_euclid(2 * q_i);
        if p > q_i {
            p = 2 * q_i - p;
        }
        if 2 * p > q_i {
            p = q_i - p;
            self.sign = -self.sign;
        }
        if p == 0 {
            return;
        }
        if 2 * p == q_i {
            self.vanish();
            return;
        }
        let p = p as u64;
        let g = gcd(p, q);
        self.angles.push(CosineAngle { p: p / g, q: q / g });
    }

    /// `A_k` for `k = p^λ` at residue `n`.
    fn mul_prime_power(&mut self, pp: PrimePower, n: u64) {
        let k = pp.value;
        let n = n % k;
        match (pp.p, k) {
            (_, 1) => {}
            (2, 2) => self.negate_if(n % 2 == 1),
            (2, _) => {
                // (3 m2)^2 = v (mod 8k); v = 1 (mod 8) always has roots
                let modulus = 8 * k;
                let v = one_minus_24n(n, modulus);
                let x = sqrt_mod_prime_power(v, PrimePower::new(2, pp.lambda + 3))
                    .expect("1 - 24n is a square modulo every power of two");
                let m2 = mul_mod(x, mod_inv(3, modulus).unwrap(), modulus);
                self.negate_if(pp.lambda % 2 == 1);
                self.negate_if(m2 % 4 == 3);
                self.scale_surd(k, 1);
                // sin(π m2 / 2k) = cos(π (k - m2) / 2k)
                self.push_cos(k as i128 - m2 as i128, 2 * k);
            }
            (3, _) => {
                let modulus = 3 * k;
                let v = one_minus_24n(n, modulus);
                let x = sqrt_mod_prime_power(v, PrimePower::new(3, pp.lambda + 1))
                    .expect("1 - 24n = 1 (mod 3) is a square modulo every power of three");
                let m3 = mul_mod(x, mod_inv(8, modulus).unwrap(), modulus);
                self.negate_if(pp.lambda % 2 == 0);
                self.negate_if(m3 % 3 == 2);
                self.scale_surd(4 * k, 3);
                // sin(4π m3 / 3k) = cos(π (3k - 8 m3) / 6k)
                self.push_cos(3 * k as i128 - 8 * m3 as i128, 6 * k);
            }
            (p, _) => {
                let v = one_minus_24n(n, k);
                let chi = jacobi(3, k).unwrap();
                if v % p == 0 {
                    if pp.lambda == 1 {
                        self.negate_if(chi < 0);
                        self.scale_surd(k, 1);
                    } else {
                        self.vanish();
                    }
                    return;
                }
                let Some(x) = sqrt_mod_prime_power(v, pp) else {
                    self.vanish();
                    return;
                };
                let mp = mul_mod(x, mod_inv(24, k).unwrap(), k);
                self.negate_if(chi < 0);
                self.scale_surd(4 * k, 1);
                self.push_cos(4 * mp as i128, k);
            }
        }
    }

    /// Numerical value at the context precision.
    pub fn eval(&self, ctx: &NumericContext) -> Float {
        if self.zero {
            return ctx.zero();
        }
        let work = ctx.widen(8 + 2 * self.angles.len() as u32);
        let prec = work.precision();
        let mut v = work.float(Rational::from((self.surd_num, self.surd_den))).sqrt();
        for a in &self.angles {
            v *= cos_pi_rational(a.p as i64, a.q, prec);
        }
        if self.sign < 0 {
            v = -v;
        }
        ctx.float(v)
    }

    /// Value in IEEE double arithmetic.
    pub fn to_f64(&self) -> f64 {
        if self.zero {
            return 0.0;
        }
        let mut v = (self.surd_num as f64 / self.surd_den as f64).sqrt();
        for a in &self.angles {
            v *= cos_pi_f64(a.p as i64, a.q);
        }
        v * self.sign as f64
    }
}

impl std::fmt::Display for TermFactorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.zero {
            return write!(f, "0");
        }
        write!(f, "{}sqrt({}/{})", if self.sign < 0 { "-" } else { "+" }, self.surd_num, self.surd_den)?;
        for a in &self.angles {
            write!(f, " * cos({}π/{})", a.p, a.q)?;
        }
        Ok(())
    }
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `(1 - 24n) mod m`.
fn one_minus_24n(n: u64, m: u64) -> u64 {
    let t = (24 * (n as u128)) % m as u128;
    ((1 + m as u128 - t) % m as u128) as u64
}

/// Exact factorization of `A_k(n)` into prime-power factors.
///
/// `n` is reduced modulo `k` on entry. Splitting proceeds from the smallest
/// prime up, `A_k(n) = A_{k1}(n1) A_{k2}(n2)` with `k1` the current prime
/// power, until a factor vanishes or one prime power is left.
pub fn ak_factor(k: u64, n: u64) -> TermFactorization {
    assert!(k >= 1);
    let mut out = TermFactorization::one();
    let factors = factorize(k);
    let (mut k, mut n) = (k, n % k);
    for (i, pp) in factors.iter().enumerate() {
        if out.zero {
            break;
        }
        if i + 1 == factors.len() {
            out.mul_prime_power(*pp, n);
            break;
        }
        let k1 = pp.value;
        let k2 = k / k1;
        let (n1, n2) = split_residues(k1, k2, n);
        out.mul_prime_power(*pp, n1);
        (k, n) = (k2, n2);
    }
    out
}

/// Residues `(n1, n2)` with `A_{k1 k2}(n) = A_{k1}(n1) A_{k2}(n2)`.
fn split_residues(k1: u64, k2: u64, n: u64) -> (u64, u64) {
    let k2_sq_m1 = k2 as u128 * k2 as u128 - 1;
    match k1 {
        2 => {
            let n2 = mul_mod(mod_inv(32, k2).unwrap(), (8 * n as u128 + 1).rem_euclid(k2 as u128) as u64, k2);
            let n1 = (n as u128 + 2 - (k2_sq_m1 / 8) % 2) % 2;
            (n1 as u64, n2)
        }
        4 => {
            let n2 = mul_mod(mod_inv(128, k2).unwrap(), (8 * n as u128 + 5).rem_euclid(k2 as u128) as u64, k2);
            // k2^2 = 1 (mod 8), so the coefficient of n1 is 1 mod 4
            let n1 = (n as i128 - ((k2_sq_m1 / 8) % 4) as i128).rem_euclid(4);
            (n1 as u64, n2)
        }
        _ => {
            let d1 = gcd(24, k1);
            let d2 = gcd(24, k2);
            let e = 24 / (d1 * d2);
            let k1_sq_m1 = k1 as u128 * k1 as u128 - 1;
            let n1 = solve_split(k1, k2, n, d1, d2 * e, k2_sq_m1);
            let n2 = solve_split(k2, k1, n, d2, d1 * e, k1_sq_m1);
            (n1, n2)
        }
    }
}

/// Solves `other^2 · c · x = c · n + (other^2 - 1)/d (mod modulus)`.
fn solve_split(modulus: u64, other: u64, n: u64, d: u64, c: u64, other_sq_m1: u128) -> u64 {
    let m = modulus as u128;
    let rhs = ((c as u128 * (n as u128 % m)) % m + (other_sq_m1 / d as u128) % m) % m;
    let coef = ((other as u128 % m) * (other as u128 % m) % m * c as u128) % m;
    let inv = mod_inv(coef as i64, modulus).expect("split coefficient is a unit");
    mul_mod(rhs as u64, inv, modulus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ctx() -> NumericContext {
        NumericContext::new(96)
    }

    fn close(a: &Float, b: &Float) -> bool {
        // relative 2^-40, measured against 1 for values near zero
        let diff = Float::with_val(a.prec(), a - b).abs();
        let scale = Float::with_val(a.prec(), a.abs_ref()).max(&Float::with_val(53, 1));
        diff <= scale * Float::with_val(53, Float::i_exp(1, -40))
    }

    #[test]
    fn dedekind_examples() {
        assert_eq!(*dedekind_sum_naive(0, 1).value(), 0);
        assert_eq!(*dedekind_sum_naive(1, 2).value(), 0);
        assert_eq!(*dedekind_sum_naive(1, 3).value(), Rational::from((1, 18)));
        assert_eq!(*dedekind_sum(1, 1).unwrap().value(), 0);
        assert_eq!(*dedekind_sum(1, 3).unwrap().value(), Rational::from((1, 18)));
        assert!(dedekind_sum(4, 6).is_err());
    }

    #[test]
    fn dedekind_fast_matches_naive() {
        for k in 1..150u64 {
            for h in 0..k {
                if gcd(h, k) == 1 {
                    let s = dedekind_sum(h as i64, k).unwrap();
                    assert_eq!(s, dedekind_sum_naive(h as i64, k), "s({h},{k})");
                    let den = s.value().denom().to_u64().unwrap();
                    assert_eq!((6 * k * k) % den, 0);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn dedekind_periodic(h in -1_000_000i64..1_000_000, k in 1u64..5000) {
            prop_assume!(gcd(h.unsigned_abs(), k) == 1);
            prop_assert_eq!(dedekind_sum(h, k).unwrap(), dedekind_sum(h.rem_euclid(k as i64), k).unwrap());
        }

        #[test]
        fn dedekind_reciprocity(h in 1u64..3000, k in 1u64..3000) {
            prop_assume!(gcd(h, k) == 1);
            let lhs = dedekind_sum(h as i64, k).unwrap().into_rational() + dedekind_sum_naive(k as i64, h).into_rational();
            let rhs = Rational::from((-1, 4))
                + (Rational::from((h, k)) + Rational::from((k, h)) + Rational::from((1, h * k))) / 12u32;
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn factor_periodic_in_n(k in 1u64..100_000, n in 0u64..1_000_000_000) {
            let a = ak_factor(k, n).to_f64();
            let b = ak_factor(k, n + k).to_f64();
            prop_assert!((a - b).abs() <= 1e-9 * (k as f64).sqrt());
        }

        #[test]
        fn factor_matches_selberg_large_k(k in 200u64..20_000, n in 0u64..u64::MAX / 32) {
            let c = NumericContext::new(80);
            let sel = ak_selberg(k, n % k, &c).to_f64();
            let fac = ak_factor(k, n).to_f64();
            prop_assert!((sel - fac).abs() <= 1e-9 * (k as f64), "k={} n={}: {} vs {}", k, n, sel, fac);
        }

        #[test]
        fn factor_magnitude_and_count(k in 1u64..10_000_000, n in 0u64..u32::MAX as u64) {
            let f = ak_factor(k, n);
            prop_assert!(f.to_f64().abs() <= k as f64);
            prop_assert!(f.angles.len() as f64 <= (k as f64).log2() + 1.0);
            for a in &f.angles {
                prop_assert!(gcd(a.p, a.q) == 1 && 0 < a.p && 2 * a.p < a.q);
            }
        }
    }

    #[test]
    fn small_k_values() {
        let c = ctx();
        for n in 0..30 {
            assert_eq!(ak_naive(1, n, &c), 1);
            assert_eq!(ak_selberg(1, n, &c), 1);
            let f1 = ak_factor(1, n);
            assert_eq!((f1.sign, f1.surd_num, f1.surd_den, f1.angles.len()), (1, 1, 1, 0));
        }
        assert_eq!(ak_selberg(1, 17, &c), 1);
        assert_eq!(ak_selberg(2, 4, &c), 1);
        let a25 = ak_naive(2, 5, &c);
        assert!((a25.to_f64() + 1.0).abs() < 1e-25);
        let f = ak_factor(2, 3);
        assert_eq!((f.zero, f.sign, f.surd_num, f.surd_den), (false, -1, 1, 1));
        assert!(f.angles.is_empty());
        assert!(close(&ak_naive(5, 1, &c), &ak_selberg(5, 1, &c)));
    }

    #[test]
    fn three_paths_agree() {
        let c = ctx();
        for k in 1..=200u64 {
            for n in 0..=(2 * k).min(60) {
                let naive = ak_naive(k, n, &c);
                let selberg = ak_selberg(k, n, &c);
                let factored = ak_factor(k, n).eval(&c);
                assert!(close(&naive, &selberg), "selberg k={k} n={n}: {naive} vs {selberg}");
                assert!(close(&naive, &factored), "factor k={k} n={n}: {naive} vs {factored} ({})", ak_factor(k, n));
            }
        }
    }

    #[test]
    fn vanishing_rate() {
        // n = 0 never vanishes: 1 - 24n = 1 is a square modulo everything
        for n in [1u64, 7, 1000, 123_456_789, 1_000_000_000_000] {
            let zeros = (1..=1000).filter(|&k| ak_factor(k, n).zero).count();
            let frac = zeros as f64 / 1000.0;
            assert!((0.3..=0.7).contains(&frac), "n={n}: {frac}");
        }
    }

    #[test]
    fn zero_flags_are_exact() {
        let c = ctx();
        for k in 1..=120u64 {
            for n in 0..k {
                if ak_factor(k, n).zero {
                    assert!(ak_naive(k, n, &c).to_f64().abs() < 1e-20, "k={k} n={n}");
                }
            }
        }
    }
}
