//! Expression tree for coefficient functions, forcing terms, and exact
//! solutions, plus pointwise evaluation and the canonical printer.
//!
//! Numeric literals keep their source text and are parsed at the active
//! precision on every evaluation, so no value is rounded through an
//! intermediate format.

use std::fmt;

use num_rational::Ratio;

use crate::error::Result;
use crate::kernel::complex::Cx;
use crate::kernel::real::Real;
use crate::kernel::special::bessel_j;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    /// Decimal literal (optionally negative), kept as written.
    Num(String),
    /// The imaginary unit.
    I,
    /// The independent variable.
    T,
    Pow(Box<Expr>, Ratio<i64>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Atom(Atom),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Atom {
    pub kind: AtomKind,
    pub arg: Box<Expr>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AtomKind {
    Sin,
    Cos,
    Exp,
    BesselJ(u64),
}

impl AtomKind {
    pub fn name(&self) -> &'static str {
        match self {
            AtomKind::Sin => "sin",
            AtomKind::Cos => "cos",
            AtomKind::Exp => "exp",
            AtomKind::BesselJ(_) => "besselj",
        }
    }
}

/// Exponent of t if `e` is a pure monomial (scalar times a power of t),
/// which is what atom arguments are restricted to.
pub(crate) fn monomial_exponent(e: &Expr) -> Option<Ratio<i64>> {
    match e {
        Expr::Num(_) | Expr::I => Some(Ratio::from_integer(0)),
        Expr::T => Some(Ratio::from_integer(1)),
        Expr::Pow(b, r) => {
            let nu = monomial_exponent(b)?;
            ratio_mul(nu, *r)
        }
        Expr::Mul(a, b) => {
            let x = monomial_exponent(a)?;
            let y = monomial_exponent(b)?;
            ratio_add(x, y)
        }
        Expr::Add(..) | Expr::Sub(..) | Expr::Atom(..) => None,
    }
}

pub(crate) fn ratio_mul(a: Ratio<i64>, b: Ratio<i64>) -> Option<Ratio<i64>> {
    let n = *a.numer() as i128 * *b.numer() as i128;
    let d = *a.denom() as i128 * *b.denom() as i128;
    normalize_128(n, d)
}

pub(crate) fn ratio_add(a: Ratio<i64>, b: Ratio<i64>) -> Option<Ratio<i64>> {
    let n = *a.numer() as i128 * *b.denom() as i128 + *b.numer() as i128 * *a.denom() as i128;
    let d = *a.denom() as i128 * *b.denom() as i128;
    normalize_128(n, d)
}

fn checked_lcm(a: i64, b: i64) -> Option<i64> {
    use num_integer::Integer;
    let g = a.gcd(&b);
    (a / g).checked_mul(b)
}

fn normalize_128(n: i128, d: i128) -> Option<Ratio<i64>> {
    use num_integer::Integer;
    if d == 0 {
        return None;
    }
    let g = n.gcd(&d);
    let (n, d) = if g == 0 { (0, 1) } else { (n / g, d / g) };
    let (n, d) = if d < 0 { (-n, -d) } else { (n, d) };
    Some(Ratio::new_raw(i64::try_from(n).ok()?, i64::try_from(d).ok()?))
}

impl Expr {
    /// Pointwise value at t >= 0, at t's precision.
    pub fn eval(&self, t: &Real) -> Result<Cx> {
        let p = t.prec();
        match self {
            Expr::Num(s) => Ok(Cx::from_real(Real::parse_dec(s, p)?)),
            Expr::I => Ok(Cx::new(Real::zero(p), Real::one(p))),
            Expr::T => Ok(Cx::from_real(t.clone())),
            Expr::Pow(b, r) => b.eval(t)?.pow_ratio(*r.numer(), *r.denom()),
            Expr::Add(a, b) => Ok(&a.eval(t)? + &b.eval(t)?),
            Expr::Sub(a, b) => Ok(&a.eval(t)? - &b.eval(t)?),
            Expr::Mul(a, b) => Ok(&a.eval(t)? * &b.eval(t)?),
            Expr::Atom(atom) => {
                let z = atom.arg.eval(t)?;
                match atom.kind {
                    AtomKind::Sin => Ok(z.sin()),
                    AtomKind::Cos => Ok(z.cos()),
                    AtomKind::Exp => Ok(z.exp()),
                    AtomKind::BesselJ(c) => bessel_j(c, &z),
                }
            }
        }
    }

    /// Least common multiple of the exponent denominators appearing
    /// anywhere in the tree; the lattice the expression lives on. None on
    /// (absurd) overflow.
    pub fn exponent_denominator(&self) -> Option<i64> {
        match self {
            Expr::Num(_) | Expr::I | Expr::T => Some(1),
            Expr::Pow(b, r) => checked_lcm(b.exponent_denominator()?, *r.denom()),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                checked_lcm(a.exponent_denominator()?, b.exponent_denominator()?)
            }
            Expr::Atom(atom) => atom.arg.exponent_denominator(),
        }
    }

    /// True when the expression is the literal zero constant.
    pub fn is_zero_literal(&self) -> bool {
        match self {
            Expr::Num(s) => {
                let p = crate::kernel::precision::Precision::bits_unchecked(64);
                Real::parse_dec(s, p).map(|v| v.is_zero()).unwrap_or(false)
            }
            _ => false,
        }
    }

    fn level(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 0,
            Expr::Mul(..) => 1,
            _ => 2,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.level() < min {
            write!(f, "(")?;
            self.fmt_at(f, 0)?;
            return write!(f, ")");
        }
        match self {
            Expr::Num(s) => write!(f, "{s}"),
            Expr::I => write!(f, "i"),
            Expr::T => write!(f, "t"),
            Expr::Pow(b, r) => {
                // a leading minus would rebind to the whole power on reparse
                let base_needs_parens = match b.as_ref() {
                    Expr::Num(s) => s.starts_with('-'),
                    Expr::I | Expr::T | Expr::Atom(..) | Expr::Pow(..) => false,
                    _ => true,
                };
                if base_needs_parens {
                    write!(f, "(")?;
                    b.fmt_at(f, 0)?;
                    write!(f, ")")?;
                } else {
                    b.fmt_at(f, 2)?;
                }
                if r.denom() == &1 {
                    write!(f, "^({})", r.numer())
                } else {
                    write!(f, "^({}/{})", r.numer(), r.denom())
                }
            }
            Expr::Add(a, b) => {
                a.fmt_at(f, 0)?;
                write!(f, " + ")?;
                b.fmt_at(f, 1)
            }
            Expr::Sub(a, b) => {
                a.fmt_at(f, 0)?;
                write!(f, " - ")?;
                b.fmt_at(f, 1)
            }
            Expr::Mul(a, b) => {
                a.fmt_at(f, 1)?;
                write!(f, "*")?;
                b.fmt_at(f, 2)
            }
            Expr::Atom(atom) => {
                match atom.kind {
                    AtomKind::BesselJ(c) => write!(f, "besselj({c}; ")?,
                    k => write!(f, "{}(", k.name())?,
                }
                atom.arg.fmt_at(f, 0)?;
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}
