//! Complex arithmetic over [`Real`], used by the Mittag-Leffler evaluators.

use std::fmt;

use crate::error::{Error, Result};
use crate::kernel::precision::Precision;
use crate::kernel::real::Real;

#[derive(Clone)]
pub struct Cx {
    pub re: Real,
    pub im: Real,
}

impl Cx {
    pub fn new(re: Real, im: Real) -> Self {
        Cx { re, im }
    }

    pub fn from_real(re: Real) -> Self {
        let p = re.prec();
        Cx { re, im: Real::zero(p) }
    }

    pub fn zero(p: Precision) -> Self {
        Cx { re: Real::zero(p), im: Real::zero(p) }
    }

    pub fn one(p: Precision) -> Self {
        Cx { re: Real::one(p), im: Real::zero(p) }
    }

    pub fn prec(&self) -> Precision {
        self.re.prec().min(self.im.prec())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn check(self, op: &'static str) -> Result<Self> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(Error::NonFinite(op))
        }
    }

    pub fn conj(&self) -> Cx {
        Cx { re: self.re.clone(), im: -&self.im }
    }

    pub fn scale(&self, s: &Real) -> Cx {
        Cx { re: &self.re * s, im: &self.im * s }
    }

    pub fn abs(&self) -> Real {
        if self.im.is_zero() {
            return self.re.abs();
        }
        if self.re.is_zero() {
            return self.im.abs();
        }
        (&(&self.re * &self.re) + &(&self.im * &self.im))
            .sqrt()
            .expect("sum of squares is nonnegative")
    }

    /// Principal argument in (-pi, pi].
    pub fn arg(&self) -> Real {
        atan2(&self.im, &self.re)
    }

    pub fn exp(&self) -> Cx {
        let m = self.re.exp();
        Cx { re: &m * &self.im.cos(), im: &m * &self.im.sin() }
    }

    pub fn sin(&self) -> Cx {
        if self.im.is_zero() {
            return Cx { re: self.re.sin(), im: self.im.clone() };
        }
        Cx {
            re: self.re.sin() * self.im.cosh(),
            im: self.re.cos() * self.im.sinh(),
        }
    }

    pub fn cos(&self) -> Cx {
        if self.im.is_zero() {
            return Cx { re: self.re.cos(), im: self.im.clone() };
        }
        Cx {
            re: self.re.cos() * self.im.cosh(),
            im: (self.re.sin() * self.im.sinh()).neg(),
        }
    }

    pub fn powi(&self, n: u64) -> Cx {
        let p = self.prec();
        let mut acc = Cx::one(p);
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Principal z^(num/den) via polar form.
    pub fn pow_ratio(&self, num: i64, den: i64) -> Result<Cx> {
        if den == 0 {
            return Err(Error::domain("pow_ratio", "zero denominator"));
        }
        let p = self.prec();
        if self.is_zero() {
            return if num > 0 {
                Ok(Cx::zero(p))
            } else if num == 0 {
                Ok(Cx::one(p))
            } else {
                Err(Error::domain("pow_ratio", "zero base, negative exponent"))
            };
        }
        if self.im.is_zero() && !self.re.is_negative() {
            return Ok(Cx::from_real(self.re.pow_ratio(num, den)?));
        }
        let g = p.plus(32);
        let r = self.abs().round_to(g).pow_ratio(num, den)?;
        let t = &self.arg().round_to(g) * &Real::from_ratio(num, den, g)?;
        let v = Cx { re: &r * &t.cos(), im: &r * &t.sin() };
        Ok(Cx { re: v.re.round_to(p), im: v.im.round_to(p) })
    }
}

/// Quadrant-aware arctangent; follows the usual atan2 conventions.
pub fn atan2(y: &Real, x: &Real) -> Real {
    let p = y.prec().min(x.prec());
    if x.is_zero() && y.is_zero() {
        return Real::zero(p);
    }
    if x.is_zero() {
        let h = Real::pi(p).ldexp(-1);
        return if y.is_negative() { h.neg() } else { h };
    }
    let base = (y / x).atan();
    if x.is_positive() {
        base
    } else if y.is_negative() {
        &base - &Real::pi(p)
    } else {
        &base + &Real::pi(p)
    }
}

impl fmt::Debug for Cx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, {:?}i)", self.re, self.im)
    }
}

impl PartialEq for Cx {
    fn eq(&self, other: &Self) -> bool {
        self.re == other.re && self.im == other.im
    }
}

impl PartialEq<Real> for Cx {
    fn eq(&self, other: &Real) -> bool {
        self.im.is_zero() && self.re == *other
    }
}

macro_rules! cx_forward {
    ($trait:ident, $method:ident) => {
        impl std::ops::$trait<Cx> for Cx {
            type Output = Cx;
            fn $method(self, rhs: Cx) -> Cx {
                (&self).$method(&rhs)
            }
        }
        impl std::ops::$trait<&Cx> for Cx {
            type Output = Cx;
            fn $method(self, rhs: &Cx) -> Cx {
                (&self).$method(rhs)
            }
        }
        impl std::ops::$trait<Cx> for &Cx {
            type Output = Cx;
            fn $method(self, rhs: Cx) -> Cx {
                self.$method(&rhs)
            }
        }
    };
}

macro_rules! cx_addsub {
    ($trait:ident, $method:ident) => {
        impl std::ops::$trait<&Cx> for &Cx {
            type Output = Cx;
            fn $method(self, rhs: &Cx) -> Cx {
                Cx { re: (&self.re).$method(&rhs.re), im: (&self.im).$method(&rhs.im) }
            }
        }
        cx_forward!($trait, $method);
    };
}

cx_addsub!(Add, add);
cx_addsub!(Sub, sub);

impl std::ops::Mul<&Cx> for &Cx {
    type Output = Cx;
    fn mul(self, rhs: &Cx) -> Cx {
        let re = &(&self.re * &rhs.re) - &(&self.im * &rhs.im);
        let im = &(&self.re * &rhs.im) + &(&self.im * &rhs.re);
        Cx { re, im }
    }
}

cx_forward!(Mul, mul);

impl std::ops::Div<&Cx> for &Cx {
    type Output = Cx;
    fn div(self, rhs: &Cx) -> Cx {
        let d = &(&rhs.re * &rhs.re) + &(&rhs.im * &rhs.im);
        let n = self * &rhs.conj();
        Cx { re: &n.re / &d, im: &n.im / &d }
    }
}

cx_forward!(Div, div);

impl std::ops::Neg for &Cx {
    type Output = Cx;
    fn neg(self) -> Cx {
        Cx { re: -&self.re, im: -&self.im }
    }
}

impl std::ops::Neg for Cx {
    type Output = Cx;
    fn neg(self) -> Cx {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> Precision {
        Precision::new(192).unwrap()
    }

    fn close(a: &Real, b: &Real, bits: i32) -> bool {
        let d = (a - b).abs();
        if d.is_zero() {
            return true;
        }
        let scale = a.abs().max_by_abs(&b.abs());
        d.log2_bound().unwrap() <= scale.log2_bound().unwrap_or(0) - bits as i64
    }

    #[test]
    fn euler_identity() {
        // e^(i pi) = -1
        let z = Cx::new(Real::zero(p()), Real::pi(p()));
        let e = z.exp();
        assert!(close(&e.re, &Real::from_i64(-1, p()), 180));
        assert!(e.im.abs().log2_bound().unwrap() < -180);
    }

    #[test]
    fn division_inverts_multiplication() {
        let a = Cx::new(Real::from_f64(1.5, p()), Real::from_f64(-2.25, p()));
        let b = Cx::new(Real::from_f64(0.375, p()), Real::from_f64(4.0, p()));
        let q = &(&a * &b) / &b;
        assert!(close(&q.re, &a.re, 180));
        assert!(close(&q.im, &a.im, 180));
    }

    #[test]
    fn atan2_quadrants() {
        let one = Real::one(p());
        let pi = Real::pi(p());
        // (-1, 0) -> pi ; (0, -1) -> -pi/2 ; (-1, -1) -> -3pi/4
        assert!(close(&atan2(&Real::zero(p()), &one.neg()), &pi, 180));
        assert!(close(&atan2(&one.neg(), &Real::zero(p())), &pi.ldexp(-1).neg(), 180));
        let expect = &pi.ldexp(-2).neg() - &pi.ldexp(-1);
        assert!(close(&atan2(&one.neg(), &one.neg()), &expect, 180));
    }

    #[test]
    fn pow_ratio_sqrt_of_i() {
        // sqrt(i) = (1 + i)/sqrt(2)
        let i = Cx::new(Real::zero(p()), Real::one(p()));
        let r = i.pow_ratio(1, 2).unwrap();
        let s = Real::from_u64(2, p()).sqrt().unwrap().recip();
        assert!(close(&r.re, &s, 170));
        assert!(close(&r.im, &s, 170));
    }

    #[test]
    fn trig_on_imaginary_axis() {
        // sin(iy) = i sinh y, cos(iy) = cosh y
        let y = Real::from_f64(0.75, p());
        let z = Cx::new(Real::zero(p()), y.clone());
        let s = z.sin();
        assert!(s.re.is_zero());
        assert!(close(&s.im, &y.sinh(), 180));
        let c = z.cos();
        assert!(close(&c.re, &y.cosh(), 180));
        assert!(c.im.is_zero() || c.im.abs().log2_bound().unwrap() < -180);
    }

    #[test]
    fn mixed_equality_with_real() {
        let r = Real::from_f64(2.5, p());
        let z = Cx::from_real(r.clone());
        assert!(z == r);
        let w = Cx::new(r.clone(), Real::one(p()));
        assert!(w != r);
    }

    #[test]
    fn powi_matches_repeated_multiplication() {
        let z = Cx::new(Real::from_f64(0.5, p()), Real::from_f64(1.25, p()));
        let mut w = Cx::one(p());
        for _ in 0..7 {
            w = &w * &z;
        }
        let v = z.powi(7);
        assert!(close(&v.re, &w.re, 170));
        assert!(close(&v.im, &w.im, 170));
    }
}
