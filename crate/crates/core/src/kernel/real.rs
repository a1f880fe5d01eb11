//! Arbitrary-precision real numbers with explicit per-value precision.
//!
//! `Real` wraps a correctly rounded binary big-float. Each value knows the
//! precision it was produced at; binary operations round to the coarser of
//! the two operand precisions (round-to-nearest-even). Overflow produces a
//! sticky non-finite payload that is converted into an explicit error at
//! operation boundaries via [`Real::check`] instead of leaking infinities.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::kernel::precision::Precision;

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constants cache"));
}

pub(crate) fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

#[derive(Clone)]
pub struct Real {
    x: BigFloat,
    prec: Precision,
}

impl Real {
    fn wrap(x: BigFloat, prec: Precision) -> Self {
        Real { x, prec }
    }

    pub fn prec(&self) -> Precision {
        self.prec
    }

    pub fn bits(&self) -> u32 {
        self.prec.bits()
    }

    // ---- constructors ----

    pub fn zero(p: Precision) -> Self {
        Real::wrap(BigFloat::new(p.bits() as usize), p)
    }

    pub fn one(p: Precision) -> Self {
        Real::from_u64(1, p)
    }

    pub fn from_u64(v: u64, p: Precision) -> Self {
        Real::wrap(BigFloat::from_u64(v, p.bits() as usize), p)
    }

    pub fn from_i64(v: i64, p: Precision) -> Self {
        Real::wrap(BigFloat::from_i64(v, p.bits() as usize), p)
    }

    pub fn from_f64(v: f64, p: Precision) -> Self {
        Real::wrap(BigFloat::from_f64(v, p.bits() as usize), p)
    }

    /// Exact ratio of integers, rounded once to `p`.
    pub fn from_ratio(num: i64, den: i64, p: Precision) -> Result<Self> {
        if den == 0 {
            return Err(Error::domain("from_ratio", "zero denominator"));
        }
        let n = BigFloat::from_i64(num, p.bits() as usize);
        let d = BigFloat::from_i64(den, p.bits() as usize);
        Ok(Real::wrap(n.div(&d, p.bits() as usize, RM), p))
    }

    /// Parse a decimal literal (optionally signed, optional exponent) at
    /// precision `p` in one rounding step.
    pub fn parse_dec(s: &str, p: Precision) -> Result<Self> {
        let t = s.trim();
        // the underlying parser accepts prefixes ("1.2.3" reads as 1.2), so
        // the literal grammar is enforced here before handing it down
        if !is_decimal_literal(t) {
            return Err(Error::domain("parse_dec", format!("malformed literal {t:?}")));
        }
        let v = with_consts(|cc| BigFloat::parse(t, Radix::Dec, p.bits() as usize, RM, cc));
        if v.is_nan() {
            return Err(Error::domain("parse_dec", format!("malformed literal {t:?}")));
        }
        Ok(Real::wrap(v, p))
    }

    /// Unsigned big integer, exact while it fits the mantissa.
    pub fn from_biguint(v: &BigUint, p: Precision) -> Self {
        let digits = v.to_u64_digits();
        if digits.is_empty() {
            return Real::zero(p);
        }
        let pb = p.bits() as usize;
        let mut acc = BigFloat::new(pb);
        for w in digits.iter().rev() {
            // acc = acc * 2^64 + w ; the scale is an exact exponent shift
            if !acc.is_zero() {
                let e = acc.exponent().expect("finite");
                acc.set_exponent(e + 64);
            }
            acc = acc.add(&BigFloat::from_u64(*w, pb), pb, RM);
        }
        Real::wrap(acc, p)
    }

    pub fn pi(p: Precision) -> Self {
        Real::wrap(with_consts(|cc| cc.pi(p.bits() as usize, RM)), p)
    }

    // ---- predicates / accessors ----

    pub fn is_zero(&self) -> bool {
        self.x.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.x.is_negative() && !self.x.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.x.is_positive() && !self.x.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        !self.x.is_nan() && !self.x.is_inf()
    }

    /// Explicit-overflow boundary: non-finite payloads become errors.
    pub fn check(self, op: &'static str) -> Result<Self> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(Error::NonFinite(op))
        }
    }

    /// Binary exponent e with |x| in [2^(e-1), 2^e); None for zero.
    pub fn exponent(&self) -> Option<i32> {
        if self.x.is_zero() || !self.is_finite() {
            None
        } else {
            self.x.exponent()
        }
    }

    /// Cheap upper bound on log2|x|.
    pub fn log2_bound(&self) -> Option<i64> {
        self.exponent().map(|e| e as i64)
    }

    pub fn to_f64(&self) -> f64 {
        if self.x.is_zero() {
            return 0.0;
        }
        if self.x.is_nan() {
            return f64::NAN;
        }
        if self.x.is_inf() {
            return if self.x.is_inf_neg() { f64::NEG_INFINITY } else { f64::INFINITY };
        }
        match self.x.as_raw_parts() {
            Some((words, _, sign, e, _)) => {
                let mut top = 0.0f64;
                // top two words give 128 mantissa bits, plenty for f64
                for (i, w) in words.iter().rev().take(2).enumerate() {
                    top += (*w as f64) * 2f64.powi(-64 * (i as i32 + 1));
                }
                let v = top * 2f64.powf(e as f64);
                if sign.is_negative() {
                    -v
                } else {
                    v
                }
            }
            None => f64::NAN,
        }
    }

    /// log10 of |x| as a machine float (for plotting); None for zero.
    pub fn log10_abs(&self) -> Option<f64> {
        let e = self.exponent()?;
        let frac = match self.x.as_raw_parts() {
            Some((words, _, _, _, _)) => *words.last().unwrap() as f64 / 2f64.powi(64),
            None => return None,
        };
        // |x| = frac * 2^e with frac in [1/2, 1)
        Some((e as f64 + frac.log2()) * std::f64::consts::LOG10_2)
    }

    // ---- arithmetic ----

    fn join(&self, rhs: &Real) -> usize {
        self.prec.min(rhs.prec).bits() as usize
    }

    pub fn neg(&self) -> Real {
        Real::wrap(self.x.neg(), self.prec)
    }

    pub fn abs(&self) -> Real {
        Real::wrap(self.x.abs(), self.prec)
    }

    /// Exact scale by 2^k.
    pub fn ldexp(&self, k: i32) -> Real {
        if self.x.is_zero() || !self.is_finite() {
            return self.clone();
        }
        let mut y = self.x.clone();
        let e = y.exponent().expect("finite");
        y.set_exponent(e + k);
        Real::wrap(y, self.prec)
    }

    pub fn sqrt(&self) -> Result<Real> {
        if self.is_negative() {
            return Err(Error::domain("sqrt", "negative argument"));
        }
        let p = self.prec.bits() as usize;
        Real::wrap(self.x.sqrt(p, RM), self.prec).check("sqrt")
    }

    pub fn recip(&self) -> Real {
        let p = self.prec.bits() as usize;
        Real::wrap(self.x.reciprocal(p, RM), self.prec)
    }

    pub fn powi(&self, n: u64) -> Real {
        let p = self.prec.bits() as usize;
        Real::wrap(self.x.powi(n as usize, p, RM), self.prec)
    }

    /// x^(num/den) for x >= 0, principal value.
    ///
    /// Roots with denominator 2^a 3^b go through sqrt/cbrt chains, which keep
    /// exactly representable results exact; other denominators use the
    /// exp(e ln x) route at guarded precision.
    pub fn pow_ratio(&self, num: i64, den: i64) -> Result<Real> {
        if den == 0 {
            return Err(Error::domain("pow_ratio", "zero denominator"));
        }
        let (num, den) = if den < 0 { (-num, -den) } else { (num, den) };
        if self.is_negative() {
            return Err(Error::domain("pow_ratio", "negative base"));
        }
        if self.is_zero() {
            return match num.cmp(&0) {
                Ordering::Greater => Ok(Real::zero(self.prec)),
                Ordering::Equal => Ok(Real::one(self.prec)),
                Ordering::Less => Err(Error::domain("pow_ratio", "zero base, negative exponent")),
            };
        }
        if den == 1 {
            let v = if num >= 0 { self.powi(num as u64) } else { self.powi((-num) as u64).recip() };
            return v.check("pow_ratio");
        }
        // guard for the |num|-fold error amplification of the root
        let amp = 64 - num.unsigned_abs().leading_zeros();
        let g = self.prec.plus(40 + amp);
        let gb = g.bits() as usize;
        let mut root = self.round_to(g).x;
        let mut rest = den;
        while rest % 2 == 0 {
            root = root.sqrt(gb, RM);
            rest /= 2;
        }
        while rest % 3 == 0 {
            root = root.cbrt(gb, RM);
            rest /= 3;
        }
        if rest > 1 {
            let e = Real::from_u64(rest as u64, g).recip();
            root = Real::wrap(root, g).pow_raw(&e, g)?.x;
        }
        let v = if num >= 0 {
            root.powi(num as usize, gb, RM)
        } else {
            root.powi((-num) as usize, gb, RM).reciprocal(gb, RM)
        };
        Real::wrap(v, g).round_to(self.prec).check("pow_ratio")
    }

    pub fn pow(&self, e: &Real) -> Result<Real> {
        let p = self.prec.min(e.prec);
        if e.is_zero() {
            return Ok(Real::one(p));
        }
        if self.is_zero() {
            return if e.is_positive() {
                Ok(Real::zero(p))
            } else {
                Err(Error::domain("pow", "zero base, negative exponent"))
            };
        }
        self.pow_raw(e, p.plus(32))?.round_to(p).check("pow")
    }

    /// exp(e ln x) at fixed working precision `g`, one rounding at the end.
    fn pow_raw(&self, e: &Real, g: Precision) -> Result<Real> {
        if !self.is_positive() {
            return Err(Error::domain("pow", "non-positive base"));
        }
        let w = self.round_to(g).ln()?;
        Ok((w * e.round_to(g)).exp())
    }

    pub fn exp(&self) -> Real {
        let p = self.prec.bits() as usize;
        Real::wrap(with_consts(|cc| self.x.exp(p, RM, cc)), self.prec)
    }

    pub fn ln(&self) -> Result<Real> {
        if !self.is_positive() {
            return Err(Error::domain("ln", "argument must be positive"));
        }
        let p = self.prec.bits() as usize;
        Real::wrap(with_consts(|cc| self.x.ln(p, RM, cc)), self.prec).check("ln")
    }

    pub fn sin(&self) -> Real {
        let p = self.prec.bits() as usize;
        Real::wrap(with_consts(|cc| self.x.sin(p, RM, cc)), self.prec)
    }

    pub fn cos(&self) -> Real {
        let p = self.prec.bits() as usize;
        Real::wrap(with_consts(|cc| self.x.cos(p, RM, cc)), self.prec)
    }

    pub fn sinh(&self) -> Real {
        let p = self.prec.bits() as usize;
        Real::wrap(with_consts(|cc| self.x.sinh(p, RM, cc)), self.prec)
    }

    pub fn cosh(&self) -> Real {
        let p = self.prec.bits() as usize;
        Real::wrap(with_consts(|cc| self.x.cosh(p, RM, cc)), self.prec)
    }

    pub fn atan(&self) -> Real {
        let p = self.prec.bits() as usize;
        Real::wrap(with_consts(|cc| self.x.atan(p, RM, cc)), self.prec)
    }

    pub fn floor(&self) -> Real {
        Real::wrap(self.x.floor(), self.prec)
    }

    pub fn is_integer(&self) -> bool {
        self.x.is_int()
    }

    /// Round (or extend) to precision `p` in a single correctly rounded step.
    pub fn round_to(&self, p: Precision) -> Real {
        if p == self.prec && self.x.precision() == Some(p.bits() as usize) {
            return self.clone();
        }
        let mut y = self.x.clone();
        // set_precision fails only on invalid precision, which Precision forbids
        y.set_precision(p.bits() as usize, RM).expect("valid precision");
        Real::wrap(y, p)
    }

    pub fn max_by_abs(&self, other: &Real) -> Real {
        if self.x.abs_cmp(&other.x) >= Some(0) {
            self.clone()
        } else {
            other.clone()
        }
    }

    // ---- formatting ----

    /// Full-precision decimal form; parsing it back at the same precision
    /// reproduces the value exactly.
    pub fn to_dec_string(&self) -> String {
        if self.x.is_zero() {
            return "0".into();
        }
        // emitting 64 extra bits of digits keeps the decimal form closer to
        // the value than half an ulp at the original precision, so the
        // round trip is exact rather than off by one ulp
        let wide = self.round_to(self.prec.plus(64));
        with_consts(|cc| wide.x.format(Radix::Dec, RM, cc)).unwrap_or_else(|_| "NaN".into())
    }

    /// Shortened scientific form for human-facing output.
    pub fn to_display_string(&self, digits: usize) -> String {
        let full = self.to_dec_string();
        shorten_decimal(&full, digits)
    }
}

/// `['+'|'-'] digits ['.' digits] [('e'|'E') ['+'|'-'] digits]`, whole string.
fn is_decimal_literal(t: &str) -> bool {
    let b = t.as_bytes();
    let mut i = 0;
    if matches!(b.first(), Some(b'+') | Some(b'-')) {
        i += 1;
    }
    let d0 = i;
    while i < b.len() && b[i].is_ascii_digit() {
        i += 1;
    }
    if i == d0 {
        return false;
    }
    if i < b.len() && b[i] == b'.' {
        i += 1;
        let f0 = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        if i == f0 {
            return false;
        }
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        i += 1;
        if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
            i += 1;
        }
        let e0 = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        if i == e0 {
            return false;
        }
    }
    i == b.len()
}

fn shorten_decimal(full: &str, digits: usize) -> String {
    let (mantissa, exp) = match full.find(['e', 'E']) {
        Some(i) => (&full[..i], &full[i..]),
        None => (full, ""),
    };
    let mut out = String::new();
    let mut kept = 0usize;
    for ch in mantissa.chars() {
        if ch.is_ascii_digit() {
            if kept >= digits {
                break;
            }
            kept += 1;
        }
        out.push(ch);
    }
    while out.ends_with('.') {
        out.pop();
    }
    out.push_str(exp);
    out
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.to_display_string(12), self.bits())
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_display_string(24))
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.x.cmp(&other.x) == Some(0)
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.x.cmp(&other.x).map(|s| s.cmp(&0))
    }
}

macro_rules! real_binop {
    ($trait:ident, $method:ident, $imp:ident) => {
        impl std::ops::$trait<&Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                let p = self.join(rhs);
                Real::wrap(self.x.$imp(&rhs.x, p, RM), self.prec.min(rhs.prec))
            }
        }
        impl std::ops::$trait<Real> for Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                (&self).$method(&rhs)
            }
        }
        impl std::ops::$trait<&Real> for Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                (&self).$method(rhs)
            }
        }
        impl std::ops::$trait<Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                self.$method(&rhs)
            }
        }
    };
}

real_binop!(Add, add, add);
real_binop!(Sub, sub, sub);
real_binop!(Mul, mul, mul);
real_binop!(Div, div, div);

impl std::ops::Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real::neg(self)
    }
}

impl std::ops::Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real::neg(&self)
    }
}
