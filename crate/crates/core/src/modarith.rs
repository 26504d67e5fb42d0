//! Word-size modular arithmetic.
//!
//! Everything the factored exponential sum needs: inverses, Jacobi symbols,
//! square roots modulo prime powers and trial-division factorization. Moduli
//! stay below `2^63`; products go through `u128`.

use crate::error::{Error, Result};

/// `p^λ` with `p` prime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimePower {
    pub p: u64,
    pub lambda: u32,
    pub value: u64,
}

impl PrimePower {
    /// Panics if `p^λ` overflows a word.
    pub fn new(p: u64, lambda: u32) -> Self {
        let value = p
            .checked_pow(lambda)
            .unwrap_or_else(|| panic!("{p}^{lambda} does not fit a machine word"));
        Self { p, lambda, value }
    }
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Inverse of `a` modulo `m >= 2`, in `[0, m)`.
pub fn mod_inv(a: i64, m: u64) -> Result<u64> {
    if m < 2 {
        return Err(Error::Domain(format!("modulus {m} < 2")));
    }
    let a_red = (a as i128).rem_euclid(m as i128);
    let (mut r0, mut r1) = (m as i128, a_red);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    if r0 != 1 {
        return Err(Error::NoInverse { a, m });
    }
    Ok(s0.rem_euclid(m as i128) as u64)
}

/// Jacobi symbol `(a|m)` for odd `m >= 1`.
pub fn jacobi(a: i64, m: u64) -> Result<i8> {
    if m == 0 || m % 2 == 0 {
        return Err(Error::Domain(format!("Jacobi symbol modulo even or zero {m}")));
    }
    let mut a = (a as i128).rem_euclid(m as i128) as u64;
    let mut n = m;
    let mut sign = 1i8;
    while a != 0 {
        let tz = a.trailing_zeros();
        a >>= tz;
        if tz % 2 == 1 && (n % 8 == 3 || n % 8 == 5) {
            sign = -sign;
        }
        if a % 4 == 3 && n % 4 == 3 {
            sign = -sign;
        }
        (a, n) = (n % a, a);
    }
    Ok(if n == 1 { sign } else { 0 })
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for p in BASES {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Square root of `a` modulo an odd prime `p` by Tonelli-Shanks.
///
/// Returns the smaller of the two roots, or `None` for a nonresidue. The
/// nonresidue the algorithm needs is found by trying 2, 3, 4, ... in turn.
pub fn sqrt_mod_prime(a: u64, p: u64) -> Option<u64> {
    debug_assert!(p > 2 && a < p);
    if a == 0 {
        return Some(0);
    }
    let half = (p - 1) / 2;
    if pow_mod(a, half, p) != 1 {
        return None;
    }
    let x = if p % 4 == 3 {
        pow_mod(a, (p + 1) / 4, p)
    } else {
        let s = (p - 1).trailing_zeros();
        let q = (p - 1) >> s;
        let z = (2..p).find(|&z| pow_mod(z, half, p) == p - 1)?;
        let mut m = s;
        let mut c = pow_mod(z, q, p);
        let mut t = pow_mod(a, q, p);
        let mut x = pow_mod(a, (q + 1) / 2, p);
        while t != 1 {
            let mut i = 0;
            let mut t2 = t;
            while t2 != 1 {
                t2 = mul_mod(t2, t2, p);
                i += 1;
            }
            let b = pow_mod(c, 1 << (m - i - 1), p);
            x = mul_mod(x, b, p);
            c = mul_mod(b, b, p);
            t = mul_mod(t, c, p);
            m = i;
        }
        x
    };
    Some(x.min(p - x))
}

/// Smallest root of `x^2 = a (mod p^λ)`, if any.
pub fn sqrt_mod_prime_power(a: u64, pp: PrimePower) -> Option<u64> {
    let PrimePower { p, lambda, value } = pp;
    let a = a % value;
    if a == 0 {
        return Some(0);
    }
    // a = p^v * u with gcd(u, p) = 1; needs v even.
    let mut v = 0;
    let mut u = a;
    while u % p == 0 {
        u /= p;
        v += 1;
    }
    if v % 2 == 1 {
        return None;
    }
    let rest = PrimePower::new(p, lambda - v);
    let y = sqrt_unit_mod_prime_power(u % rest.value, rest)?;
    Some(p.pow(v / 2) * y)
}

/// Smallest root for `gcd(a, p) = 1`.
fn sqrt_unit_mod_prime_power(a: u64, pp: PrimePower) -> Option<u64> {
    let PrimePower { p, lambda, value } = pp;
    if value == 1 {
        return Some(0);
    }
    if p == 2 {
        return sqrt_unit_mod_2pow(a, lambda);
    }
    let mut x = sqrt_mod_prime(a % p, p)?;
    // Hensel: x <- x - (x^2 - a) / (2x), one power of p at a time.
    let mut modulus = p;
    for _ in 1..lambda {
        modulus *= p;
        let fx = (mul_mod(x, x, modulus) + modulus - a % modulus) % modulus;
        let inv = mod_inv((2 * x % modulus) as i64, modulus).ok()?;
        x = (x + modulus - mul_mod(fx, inv, modulus)) % modulus;
    }
    Some(x.min(value - x))
}

fn sqrt_unit_mod_2pow(a: u64, lambda: u32) -> Option<u64> {
    let value = 1u64 << lambda;
    match lambda {
        1 => Some(1),
        2 => (a % 4 == 1).then_some(1),
        _ => {
            if a % 8 != 1 {
                return None;
            }
            // x^2 = a (mod 2^e) extended to 2^(e+1) by flipping bit e-1.
            let mut x = 1u64;
            for e in 3..lambda {
                let sq = x as u128 * x as u128;
                if (sq.wrapping_sub(a as u128) >> e) & 1 == 1 {
                    x += 1 << (e - 1);
                }
            }
            let half = value / 2;
            [x, value - x, (x + half) % value, (value - x + half) % value]
                .into_iter()
                .min()
        }
    }
}

/// Prime factorization by trial division over a mod-30 wheel.
pub fn factorize(mut k: u64) -> Vec<PrimePower> {
    assert!(k >= 1, "factorize(0)");
    let mut out = Vec::new();
    let mut take = |k: &mut u64, p: u64| {
        let mut lambda = 0;
        while *k % p == 0 {
            *k /= p;
            lambda += 1;
        }
        if lambda > 0 {
            out.push(PrimePower::new(p, lambda));
        }
    };
    for p in [2, 3, 5] {
        take(&mut k, p);
    }
    const STEPS: [u64; 8] = [4, 2, 4, 2, 4, 6, 2, 6];
    let mut p = 7u64;
    let mut i = 0;
    while p * p <= k {
        take(&mut k, p);
        p += STEPS[i];
        i = (i + 1) % 8;
    }
    if k > 1 {
        out.push(PrimePower::new(k, 1));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn small_primes(limit: u64) -> Vec<u64> {
        (2..limit).filter(|&n| (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0)).collect()
    }

    #[test]
    fn gcd_examples() {
        assert_eq!(gcd(24, 16), 8);
        assert_eq!(gcd(0, 7), 7);
        assert_eq!(gcd(3797, 24), 1);
        assert_eq!(gcd(0, 0), 0);
    }

    #[test]
    fn inverse_examples() {
        for m in 2..50 {
            assert_eq!(mod_inv(1, m).unwrap(), 1);
        }
        assert_eq!(mod_inv(24, 13).unwrap(), 6);
        assert_eq!(mod_inv(-1, 13).unwrap(), 12);
        assert!(matches!(mod_inv(4, 8), Err(Error::NoInverse { a: 4, m: 8 })));
    }

    #[test]
    fn jacobi_examples() {
        for a in -20..20 {
            assert_eq!(jacobi(a, 1).unwrap(), 1);
        }
        assert_eq!(jacobi(2, 3).unwrap(), -1);
        assert_eq!(jacobi(62123, 3797).unwrap(), -1);
        // brute Legendre for the same pair
        let r = 62123 % 3797;
        assert!(!(1..3797u64).any(|x| x * x % 3797 == r));
        assert!(jacobi(3, 8).is_err());
        assert!(jacobi(3, 0).is_err());
        assert_eq!(jacobi(6, 9).unwrap(), 0);
    }

    #[test]
    fn jacobi_is_legendre_for_primes() {
        for p in small_primes(1000).into_iter().filter(|&p| p > 2) {
            for a in 0..p {
                let euler = pow_mod(a, (p - 1) / 2, p);
                let want = match euler {
                    0 => 0,
                    1 => 1,
                    _ => -1,
                };
                assert_eq!(jacobi(a as i64, p).unwrap(), want, "({a}|{p})");
            }
        }
    }

    #[test]
    fn sqrt_mod_prime_exhaustive() {
        assert!(matches!(sqrt_mod_prime(1, 13), Some(1)));
        assert!(matches!(sqrt_mod_prime(2, 7), Some(3) | Some(4)));
        assert_eq!(sqrt_mod_prime(3, 5), None);
        for p in small_primes(1000).into_iter().filter(|&p| p > 2) {
            let mut is_square = vec![false; p as usize];
            for x in 0..p {
                is_square[(x * x % p) as usize] = true;
            }
            for a in 0..p {
                match sqrt_mod_prime(a, p) {
                    Some(x) => {
                        assert!(is_square[a as usize]);
                        assert_eq!(x * x % p, a);
                        assert!(x <= p - x || x == 0);
                    }
                    None => assert!(!is_square[a as usize], "{a} mod {p}"),
                }
            }
        }
    }

    #[test]
    fn sqrt_mod_prime_power_examples() {
        assert_eq!(sqrt_mod_prime_power(0, PrimePower::new(7, 3)), Some(0));
        assert_eq!(sqrt_mod_prime_power(2, PrimePower::new(7, 2)), Some(10));
        assert_eq!(sqrt_mod_prime_power(17, PrimePower::new(2, 5)), Some(7));
        assert_eq!(sqrt_mod_prime_power(3, PrimePower::new(2, 5)), None);
    }

    #[test]
    fn sqrt_mod_prime_power_exhaustive() {
        for (p, lmax) in [(2u64, 9u32), (3, 6), (5, 4), (7, 3), (11, 3), (13, 2)] {
            for lambda in 1..=lmax {
                let pp = PrimePower::new(p, lambda);
                let m = pp.value;
                let mut smallest = vec![None; m as usize];
                for x in (0..m).rev() {
                    smallest[(x * x % m) as usize] = Some(x);
                }
                for a in 0..m {
                    assert_eq!(sqrt_mod_prime_power(a, pp), smallest[a as usize], "{a} mod {p}^{lambda}");
                }
            }
        }
    }

    #[test]
    fn factorize_examples() {
        assert!(factorize(1).is_empty());
        assert_eq!(factorize(12), vec![PrimePower::new(2, 2), PrimePower::new(3, 1)]);
        assert_eq!(factorize(3797), vec![PrimePower::new(3797, 1)]);
        assert_eq!(factorize(49 * 11 * 1_000_003), vec![
            PrimePower::new(7, 2),
            PrimePower::new(11, 1),
            PrimePower::new(1_000_003, 1),
        ]);
    }

    #[test]
    fn is_prime_matches_sieve() {
        let primes = small_primes(5000);
        for n in 0..5000 {
            assert_eq!(is_prime(n), primes.binary_search(&n).is_ok(), "{n}");
        }
        assert!(is_prime(18_446_744_073_709_551_557));
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to bases 2, 3, 5, 7
    }

    proptest! {
        #[test]
        fn factorize_round_trips(k in 1u64..2_000_000_000) {
            let f = factorize(k);
            prop_assert_eq!(f.iter().map(|pp| pp.value).product::<u64>(), k);
            prop_assert!(f.windows(2).all(|w| w[0].p < w[1].p));
            prop_assert!(f.iter().all(|pp| is_prime(pp.p)));
        }

        #[test]
        fn jacobi_multiplicative(a in -5000i64..5000, b in -5000i64..5000, m in 0u64..5000, n in 0u64..5000) {
            let (m, n) = (2 * m + 1, 2 * n + 1);
            prop_assert_eq!(jacobi(a * b, m).unwrap(), jacobi(a, m).unwrap() * jacobi(b, m).unwrap());
            prop_assert_eq!(jacobi(a, m * n).unwrap(), jacobi(a, m).unwrap() * jacobi(a, n).unwrap());
        }

        #[test]
        fn inverse_is_inverse(a in -100_000i64..100_000, m in 2u64..100_000) {
            match mod_inv(a, m) {
                Ok(x) => prop_assert_eq!(mul_mod((a as i128).rem_euclid(m as i128) as u64, x, m), 1 % m),
                Err(_) => prop_assert!(gcd(a.unsigned_abs(), m) != 1),
            }
        }
    }
}
