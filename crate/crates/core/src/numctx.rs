//! Precision-`r` floating-point arithmetic.
//!
//! Every numerical routine in the crate works through a [`NumericContext`],
//! a plain value that carries the working precision. Results of the basic
//! operations are correctly rounded to nearest (relative error at most
//! `ε = 2^-r`), transcendental functions are within one ulp (relative error
//! at most `2ε`). The arithmetic itself is delegated to MPFR.

use std::sync::RwLock;

use rug::float::{Constant, Round};
use rug::{Assign, Float};

use crate::error::{Error, Result};

/// Lowest precision any context will run at (IEEE double).
pub const MIN_PRECISION: u32 = 53;

/// Binary floating-point context with precision `r >= 53`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NumericContext {
    prec: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    Sqrt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Transcendental {
    Exp,
    Sin,
    Cos,
    Sinh,
    Cosh,
}

impl Default for NumericContext {
    fn default() -> Self {
        Self::new(MIN_PRECISION)
    }
}

impl NumericContext {
    /// Requests below [`MIN_PRECISION`] are raised to the floor.
    pub fn new(bits: u32) -> Self {
        Self {
            prec: bits.max(MIN_PRECISION),
        }
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    /// The context `extra` bits wider than this one.
    pub fn widen(&self, extra: u32) -> Self {
        Self::new(self.prec + extra)
    }

    /// `ε = 2^-r`, exact.
    pub fn unit_roundoff(&self) -> Float {
        Float::with_val(2, Float::i_exp(1, -(self.prec as i32)))
    }

    /// Rounds any MPFR-assignable value to this precision.
    pub fn float<T>(&self, value: T) -> Float
    where
        Float: Assign<T>,
    {
        let mut f = Float::new(self.prec);
        f.assign(value);
        f
    }

    pub fn zero(&self) -> Float {
        Float::new(self.prec)
    }

    pub fn arith(&self, op: ArithOp, a: &Float, b: Option<&Float>) -> Result<Float> {
        match (op, b) {
            (ArithOp::Sqrt, _) => self.sqrt(a),
            (ArithOp::Add, Some(b)) => self.add(a, b),
            (ArithOp::Sub, Some(b)) => self.sub(a, b),
            (ArithOp::Mul, Some(b)) => self.mul(a, b),
            (ArithOp::Div, Some(b)) => self.div(a, b),
            (op, None) => Err(Error::Domain(format!("{op:?} needs two operands"))),
        }
    }

    pub fn add(&self, a: &Float, b: &Float) -> Result<Float> {
        finite2(a, b)?;
        range_checked(self.float(a + b))
    }

    pub fn sub(&self, a: &Float, b: &Float) -> Result<Float> {
        finite2(a, b)?;
        range_checked(self.float(a - b))
    }

    pub fn mul(&self, a: &Float, b: &Float) -> Result<Float> {
        finite2(a, b)?;
        range_checked(self.float(a * b))
    }

    pub fn div(&self, a: &Float, b: &Float) -> Result<Float> {
        finite2(a, b)?;
        if b.is_zero() {
            return Err(Error::Domain("division by zero".into()));
        }
        range_checked(self.float(a / b))
    }

    pub fn sqrt(&self, a: &Float) -> Result<Float> {
        finite(a)?;
        if a.is_sign_negative() && !a.is_zero() {
            return Err(Error::Domain("square root of a negative number".into()));
        }
        Ok(self.float(a.sqrt_ref()))
    }

    /// `a^(1/k)` for `a >= 0`, correctly rounded.
    pub fn root(&self, a: &Float, k: u32) -> Result<Float> {
        finite(a)?;
        if k == 0 || (a.is_sign_negative() && !a.is_zero()) {
            return Err(Error::Domain(format!("{k}-th root of {a}")));
        }
        let mut r = Float::with_val(self.prec, a);
        r.root_round(k, Round::Nearest);
        Ok(r)
    }

    pub fn transcend(&self, f: Transcendental, x: &Float) -> Result<Float> {
        finite(x)?;
        let y = match f {
            Transcendental::Exp => self.float(x.exp_ref()),
            Transcendental::Sin => self.float(x.sin_ref()),
            Transcendental::Cos => self.float(x.cos_ref()),
            Transcendental::Sinh => self.float(x.sinh_ref()),
            Transcendental::Cosh => self.float(x.cosh_ref()),
        };
        range_checked(y)
    }

    pub fn exp(&self, x: &Float) -> Result<Float> {
        self.transcend(Transcendental::Exp, x)
    }

    pub fn cos(&self, x: &Float) -> Result<Float> {
        self.transcend(Transcendental::Cos, x)
    }

    pub fn sin(&self, x: &Float) -> Result<Float> {
        self.transcend(Transcendental::Sin, x)
    }

    /// `(sinh x, cosh x)`, each within one ulp.
    pub fn sinh_cosh(&self, x: &Float) -> Result<(Float, Float)> {
        finite(x)?;
        let (s, c) = Float::with_val(self.prec, x).sinh_cosh(Float::new(self.prec));
        Ok((range_checked(s)?, range_checked(c)?))
    }

    /// π rounded to nearest at this precision.
    ///
    /// Served from a process-wide cache that only ever grows; a request at or
    /// below the cached precision costs one rounding.
    pub fn const_pi(&self) -> Float {
        if let Some(pi) = pi_from_cache(self.prec) {
            return pi;
        }
        let mut guard = PI_CACHE.write().unwrap_or_else(|e| e.into_inner());
        let have = guard.as_ref().map_or(0, Float::prec);
        if have < self.prec + PI_GUARD_BITS {
            let target = (self.prec + PI_GUARD_BITS).max(2 * have).max(256);
            *guard = Some(Float::with_val(target, Constant::Pi));
        }
        drop(guard);
        pi_from_cache(self.prec).unwrap_or_else(|| self.float(Constant::Pi))
    }
}

const PI_GUARD_BITS: u32 = 64;

static PI_CACHE: RwLock<Option<Float>> = RwLock::new(None);

fn pi_from_cache(prec: u32) -> Option<Float> {
    let guard = PI_CACHE.read().unwrap_or_else(|e| e.into_inner());
    let cached = guard.as_ref()?;
    if cached.prec() < prec + PI_GUARD_BITS {
        return None;
    }
    // Work from a truncation to prec + 64 bits so the cost does not depend on
    // how large the cache has grown. Rounding the truncation agrees with
    // rounding π unless it sits exactly on a midpoint; fall back to a direct
    // evaluation there.
    let work = prec + PI_GUARD_BITS;
    let (truncated, _) = Float::with_val_round(work, cached, Round::Zero);
    let rounded = Float::with_val(prec, &truncated);
    let diff = Float::with_val(work + 64, &truncated - &rounded).abs();
    let half_ulp = rounded
        .get_exp()
        .map(|e| Float::with_val(2, Float::i_exp(1, e - prec as i32 - 1)));
    match half_ulp {
        Some(h) if diff == h => Some(Float::with_val(prec, Constant::Pi)),
        _ => Some(rounded),
    }
}

fn finite(a: &Float) -> Result<()> {
    if a.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("non-finite operand {a}")))
    }
}

fn finite2(a: &Float, b: &Float) -> Result<()> {
    finite(a)?;
    finite(b)
}

fn range_checked(x: Float) -> Result<Float> {
    if x.is_infinite() {
        Err(Error::Range("exponent overflow".into()))
    } else {
        Ok(x)
    }
}
