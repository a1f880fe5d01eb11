//! Müntz-series backend: Taylor expansion of an expression onto a grid.
//!
//! Atoms compose a classical power series with a monomial argument a*t^nu,
//! so every term lands on a lattice index; sums and products of subtrees
//! are series sums and Cauchy products at a fixed truncation order.

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::kernel::complex::Cx;
use crate::kernel::gamma::factorial;
use crate::kernel::precision::Precision;
use crate::kernel::real::Real;
use crate::kernel::special::bessel_j;
use crate::muntz::{MuntzGrid, MuntzSeries};

use super::ast::{ratio_add, ratio_mul, AtomKind, Expr};

/// Expansion of `e` as a series in t^(1/q), truncated at lattice order
/// `order`. Exponents that are not multiples of 1/q are rejected; terms
/// past the truncation are dropped.
pub fn expand(e: &Expr, grid: MuntzGrid, order: usize, p: Precision) -> Result<MuntzSeries> {
    if let Some((scale, nu)) = monomial_parts(e, p)? {
        let mut out = MuntzSeries::zero(grid, order, p);
        if let Some(idx) = lattice_index(nu, grid)? {
            if idx <= order {
                out.set_coeff(idx, scale);
            }
        }
        return Ok(out);
    }
    match e {
        Expr::Add(a, b) => expand(a, grid, order, p)?.add(&expand(b, grid, order, p)?),
        Expr::Sub(a, b) => {
            expand(a, grid, order, p)?.add(&expand(b, grid, order, p)?.neg())
        }
        Expr::Mul(a, b) => expand(a, grid, order, p)?.mul(&expand(b, grid, order, p)?),
        Expr::Pow(b, r) => {
            if r.denom() == &1 && r.numer() >= &0 {
                series_powi(&expand(b, grid, order, p)?, *r.numer() as u64, grid, order, p)
            } else {
                Err(Error::validation(
                    "expand",
                    "fractional powers apply to monomials only",
                ))
            }
        }
        Expr::Atom(atom) => {
            let (scale, nu) = monomial_parts(&atom.arg, p)?.ok_or_else(|| {
                Error::validation("expand", "atom argument must be a monomial a*t^(p/q)")
            })?;
            expand_atom(atom.kind, scale, nu, grid, order, p)
        }
        // monomial_parts covers every other constructor
        _ => unreachable!(),
    }
}

/// Scalar factor and t-exponent when `e` is a pure monomial. The scalar is
/// evaluated at precision `p`; non-monomial shapes give None.
fn monomial_parts(e: &Expr, p: Precision) -> Result<Option<(Cx, Ratio<i64>)>> {
    Ok(match e {
        Expr::Num(s) => Some((Cx::from_real(Real::parse_dec(s, p)?), Ratio::from_integer(0))),
        Expr::I => Some((Cx::new(Real::zero(p), Real::one(p)), Ratio::from_integer(0))),
        Expr::T => Some((Cx::one(p), Ratio::from_integer(1))),
        Expr::Pow(b, r) => match monomial_parts(b, p)? {
            Some((s, nu)) => {
                let e = ratio_mul(nu, *r)
                    .ok_or_else(|| Error::validation("expand", "exponent overflows"))?;
                Some((s.pow_ratio(*r.numer(), *r.denom())?, e))
            }
            None => None,
        },
        Expr::Mul(a, b) => match (monomial_parts(a, p)?, monomial_parts(b, p)?) {
            (Some((sa, na)), Some((sb, nb))) => {
                let e = ratio_add(na, nb)
                    .ok_or_else(|| Error::validation("expand", "exponent overflows"))?;
                Some((&sa * &sb, e))
            }
            _ => None,
        },
        Expr::Add(..) | Expr::Sub(..) | Expr::Atom(..) => None,
    })
}

/// Lattice index of a non-negative exponent, or the off-grid error.
fn lattice_index(nu: Ratio<i64>, grid: MuntzGrid) -> Result<Option<usize>> {
    if nu.numer() < &0 {
        return Err(Error::validation("expand", "negative exponents are not on the grid"));
    }
    match grid.index_of(*nu.numer(), *nu.denom()) {
        Some(i) => Ok(Some(i as usize)),
        None => Err(Error::OffGrid { num: *nu.numer(), den: *nu.denom(), q: grid.q() }),
    }
}

fn series_powi(
    base: &MuntzSeries,
    mut n: u64,
    grid: MuntzGrid,
    order: usize,
    p: Precision,
) -> Result<MuntzSeries> {
    let mut acc = MuntzSeries::zero(grid, order, p);
    acc.set_coeff(0, Cx::one(p));
    let mut sq = base.clone();
    while n > 0 {
        if n & 1 == 1 {
            acc = acc.mul(&sq)?;
        }
        n >>= 1;
        if n > 0 {
            sq = sq.mul(&sq)?;
        }
    }
    Ok(acc)
}

/// Classical Taylor series of the atom at argument a*t^nu, placed on the
/// lattice. A constant argument (nu = 0) degenerates to the pointwise
/// value.
fn expand_atom(
    kind: AtomKind,
    a: Cx,
    nu: Ratio<i64>,
    grid: MuntzGrid,
    order: usize,
    p: Precision,
) -> Result<MuntzSeries> {
    let mut out = MuntzSeries::zero(grid, order, p);
    if nu.numer() == &0 {
        let v = match kind {
            AtomKind::Sin => a.sin(),
            AtomKind::Cos => a.cos(),
            AtomKind::Exp => a.exp(),
            AtomKind::BesselJ(c) => bessel_j(c, &a)?,
        };
        out.set_coeff(0, v);
        return Ok(out);
    }
    let step = lattice_index(nu, grid)?.expect("positive exponent");
    match kind {
        AtomKind::Sin | AtomKind::Cos | AtomKind::Exp => {
            // a^j / j! at index j*step, with the sin/cos parity and sign
            let mut power = Cx::one(p);
            for j in 0..=order / step {
                let idx = j * step;
                let keep = match kind {
                    AtomKind::Exp => true,
                    AtomKind::Sin => j % 2 == 1,
                    AtomKind::Cos => j % 2 == 0,
                    AtomKind::BesselJ(_) => unreachable!(),
                };
                if keep {
                    let mut c = power.scale(&factorial(j as u64, p).recip());
                    let flip = match kind {
                        AtomKind::Sin => (j / 2) % 2 == 1,
                        AtomKind::Cos => (j / 2) % 2 == 1,
                        _ => false,
                    };
                    if flip {
                        c = -c;
                    }
                    out.set_coeff(idx, c);
                }
                if idx + step > order {
                    break;
                }
                power = &power * &a;
            }
        }
        AtomKind::BesselJ(c) => {
            // sum_m (-1)^m/(m! (m+c)!) (a/2)^(2m+c) t^(nu(2m+c))
            let half = a.scale(&Real::from_ratio(1, 2, p).unwrap());
            let mut power = half.powi(c);
            let mut m = 0u64;
            loop {
                let idx = (2 * m as usize + c as usize) * step;
                if idx > order {
                    break;
                }
                let den = &factorial(m, p) * &factorial(m + c, p);
                let mut coeff = power.scale(&den.recip());
                if m % 2 == 1 {
                    coeff = -coeff;
                }
                out.set_coeff(idx, coeff);
                power = &(&power * &half) * &half;
                m += 1;
            }
        }
    }
    Ok(out)
}
