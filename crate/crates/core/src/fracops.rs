//! Riemann-Liouville integrals and Caputo derivatives acting termwise on
//! Müntz series: I^a t^b = (Γ(b+1)/Γ(a+b+1)) t^(a+b), so on a grid with
//! a·q integer both operators are index shifts with Gamma-ratio factors.

use num_integer::Integer;
use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::kernel::complex::Cx;
use crate::kernel::gamma::gamma_rational;
use crate::kernel::precision::Precision;
use crate::kernel::real::Real;
use crate::muntz::{MuntzGrid, MuntzSeries};

/// Reduced positive rational derivative order gamma/q with q >= 2, so the
/// order is never an integer. ceil() is the number of classical initial
/// conditions the operator consumes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RationalOrder {
    num: i64,
    den: i64,
}

impl RationalOrder {
    pub fn new(num: i64, den: i64) -> Result<Self> {
        if num < 1 {
            return Err(Error::validation("order", "numerator must be positive"));
        }
        if den < 1 {
            return Err(Error::validation("order", "denominator must be positive"));
        }
        let g = num.gcd(&den);
        let (num, den) = (num / g, den / g);
        if den < 2 {
            return Err(Error::validation("order", "integer orders are not supported"));
        }
        Ok(RationalOrder { num, den })
    }

    pub fn numer(&self) -> i64 {
        self.num
    }

    pub fn denom(&self) -> i64 {
        self.den
    }

    pub fn ratio(&self) -> Ratio<i64> {
        Ratio::new_raw(self.num, self.den)
    }

    /// Smallest integer above the order: num/den rounded up.
    pub fn ceil(&self) -> i64 {
        (self.num + self.den - 1) / self.den
    }

    /// Lattice steps the order spans on the grid; requires den | q.
    pub fn shift_on(&self, grid: MuntzGrid) -> Result<usize> {
        ratio_shift(self.ratio(), grid)
    }

    pub fn to_real(&self, p: Precision) -> Real {
        Real::from_ratio(self.num, self.den, p).expect("reduced order")
    }
}

impl std::fmt::Display for RationalOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

fn ratio_shift(alpha: Ratio<i64>, grid: MuntzGrid) -> Result<usize> {
    let q = grid.q() as i64;
    let den = *alpha.denom();
    if q % den != 0 {
        return Err(Error::OffGrid { num: *alpha.numer(), den, q: grid.q() });
    }
    let shift = alpha
        .numer()
        .checked_mul(q / den)
        .ok_or_else(|| Error::validation("order", "shift overflows"))?;
    Ok(shift as usize)
}

fn ratio_real(r: Ratio<i64>, p: Precision) -> Result<Real> {
    Real::from_ratio(*r.numer(), *r.denom(), p)
}

/// Gamma(m/q + 1) / Gamma(m/q + alpha + 1): the factor picked up by the
/// grid monomial t^(m/q) under I^alpha. Positive and strictly decreasing
/// in m for alpha > 0.
fn vartheta_direct(alpha: Ratio<i64>, grid: MuntzGrid, m: usize, p: Precision) -> Result<Real> {
    let q = grid.q() as i64;
    let a = Ratio::new(m as i64 + q, q);
    let b = a + alpha;
    let num = gamma_rational(*a.numer(), *a.denom(), p)?;
    let den = gamma_rational(*b.numer(), *b.denom(), p)?;
    (num / den).check("vartheta")
}

/// Factors for m = 0..count. The first q entries come from the direct
/// Gamma ratio; the rest extend each residue class with
/// v(m+q) = v(m) * (m/q + 1)/(m/q + alpha + 1), one rounding per step.
fn vartheta_table(
    alpha: Ratio<i64>,
    grid: MuntzGrid,
    count: usize,
    p: Precision,
) -> Result<Vec<Real>> {
    let q = grid.q() as i64;
    let mut out = Vec::with_capacity(count);
    for m in 0..count.min(q as usize) {
        out.push(vartheta_direct(alpha, grid, m, p)?);
    }
    for m in q as usize..count {
        let base = Ratio::new((m as i64 - q) + q, q);
        let num = ratio_real(base, p)?;
        let den = ratio_real(base + alpha, p)?;
        let step = (&out[m - q as usize] * &num) / den;
        out.push(step.check("vartheta")?);
    }
    Ok(out)
}

/// The Gamma-ratio families attached to one order on one grid. xi and
/// xi_bar are reindexings of vartheta: xi(i, m) = vartheta(i + m), and
/// xi_bar(mu) = vartheta(mu - shift) converts an integrand coefficient at
/// lattice index mu - shift into the integral's coefficient at index mu.
pub struct FracCoeffs {
    theta: RationalOrder,
    grid: MuntzGrid,
    shift: usize,
    prec: Precision,
}

impl FracCoeffs {
    pub fn new(theta: RationalOrder, grid: MuntzGrid, p: Precision) -> Result<Self> {
        let shift = theta.shift_on(grid)?;
        Ok(FracCoeffs { theta, grid, shift, prec: p })
    }

    pub fn theta(&self) -> RationalOrder {
        self.theta
    }

    pub fn grid(&self) -> MuntzGrid {
        self.grid
    }

    pub fn shift(&self) -> usize {
        self.shift
    }

    pub fn prec(&self) -> Precision {
        self.prec
    }

    pub fn vartheta(&self, m: usize) -> Result<Real> {
        vartheta_direct(self.theta.ratio(), self.grid, m, self.prec)
    }

    pub fn xi(&self, i: usize, m: usize) -> Result<Real> {
        self.vartheta(i + m)
    }

    pub fn xi_bar(&self, mu: usize) -> Result<Real> {
        if mu < self.shift {
            return Err(Error::domain("xi_bar", "index below the operator shift"));
        }
        self.vartheta(mu - self.shift)
    }

    /// vartheta(0..count) via the stepped table; a few ulps from the
    /// direct entries but self-consistent across all consumers.
    pub fn vartheta_table(&self, count: usize) -> Result<Vec<Real>> {
        vartheta_table(self.theta.ratio(), self.grid, count, self.prec)
    }
}

/// I^alpha t^beta: the coefficient Gamma(beta+1)/Gamma(alpha+beta+1) and
/// the new exponent alpha + beta. alpha may be any positive rational,
/// integer orders included.
pub fn frac_integral_monomial(
    alpha: Ratio<i64>,
    beta: Ratio<i64>,
    p: Precision,
) -> Result<(Real, Ratio<i64>)> {
    if *alpha.numer() <= 0 {
        return Err(Error::domain("frac_integral", "order must be positive"));
    }
    if *beta.numer() < 0 {
        return Err(Error::domain("frac_integral", "exponent must be non-negative"));
    }
    let one = Ratio::new(1, 1);
    let num = gamma_rational(*(beta + one).numer(), *(beta + one).denom(), p)?;
    let den_arg = alpha + beta + one;
    let den = gamma_rational(*den_arg.numer(), *den_arg.denom(), p)?;
    let coeff = (num / den).check("frac_integral")?;
    Ok((coeff, alpha + beta))
}

/// Termwise I^alpha: every coefficient moves up by alpha*q lattice steps
/// and picks up its vartheta factor. Output truncation order grows by the
/// shift, so nothing is lost.
pub fn frac_integral_series(alpha: Ratio<i64>, s: &MuntzSeries) -> Result<MuntzSeries> {
    let shift = positive_shift(alpha, s.grid())?;
    let order = s.truncation_order() + shift;
    integral_onto(alpha, shift, s, order)
}

/// I^alpha truncated to the caller's order; terms landing above it are
/// never computed.
pub fn frac_integral_truncated(
    alpha: Ratio<i64>,
    s: &MuntzSeries,
    order: usize,
) -> Result<MuntzSeries> {
    let shift = positive_shift(alpha, s.grid())?;
    integral_onto(alpha, shift, s, order)
}

fn positive_shift(alpha: Ratio<i64>, grid: MuntzGrid) -> Result<usize> {
    if *alpha.numer() <= 0 {
        return Err(Error::domain("frac_integral", "order must be positive"));
    }
    ratio_shift(alpha, grid)
}

fn integral_onto(
    alpha: Ratio<i64>,
    shift: usize,
    s: &MuntzSeries,
    order: usize,
) -> Result<MuntzSeries> {
    let p = s.prec();
    let keep = (order + 1).saturating_sub(shift).min(s.coeffs().len());
    let table = vartheta_table(alpha, s.grid(), keep, p)?;
    let mut out = vec![Cx::zero(p); order + 1];
    for (m, c) in s.coeffs().iter().take(keep).enumerate() {
        if !c.is_zero() {
            out[m + shift] = c.scale(&table[m]);
        }
    }
    Ok(MuntzSeries::from_coeffs(s.grid(), out))
}

/// Termwise Caputo derivative. A nonzero term at lattice index m is
/// annihilated when m/q is an integer below ceil(theta), shifted down by
/// theta*q steps when m >= theta*q, and rejected otherwise: its image
/// exponent would be negative, which no series on the grid can hold.
pub fn caputo_derivative_series(theta: &RationalOrder, s: &MuntzSeries) -> Result<MuntzSeries> {
    let grid = s.grid();
    let shift = theta.shift_on(grid)?;
    let q = grid.q() as usize;
    let ceil = theta.ceil();
    let p = s.prec();
    let len = s.coeffs().len();
    let keep = len.saturating_sub(shift);
    let table = vartheta_table(theta.ratio(), grid, keep, p)?;
    let mut out = vec![Cx::zero(p); keep.max(1)];
    for (m, c) in s.coeffs().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        if m % q == 0 && ((m / q) as i64) < ceil {
            continue;
        }
        if m < shift {
            return Err(Error::InadmissibleExponent {
                exponent: format!("{}/{}", m, q),
                order: theta.to_string(),
            });
        }
        out[m - shift] = c.scale(&table[m - shift].recip());
    }
    Ok(MuntzSeries::from_coeffs(grid, out))
}

/// Single-band square matrix: entry (m, m + offset) = band[m], all else
/// zero. Acting on a row coefficient vector from the left it realizes the
/// termwise fractional integral on a fixed truncation.
pub struct ShiftMatrix {
    size: usize,
    offset: usize,
    band: Vec<Real>,
    prec: Precision,
}

impl ShiftMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn offset(&self) -> usize {
        self.offset
    }

    pub fn band(&self) -> &[Real] {
        &self.band
    }

    pub fn entry(&self, row: usize, col: usize) -> Real {
        if col == row + self.offset {
            if let Some(v) = self.band.get(row) {
                return v.clone();
            }
        }
        Real::zero(self.prec)
    }

    /// Row vector times matrix: out[m + offset] = coeffs[m] * band[m].
    pub fn apply(&self, coeffs: &[Cx]) -> Result<Vec<Cx>> {
        if coeffs.len() != self.size {
            return Err(Error::validation("shift_matrix", "length must match matrix size"));
        }
        let mut out = vec![Cx::zero(self.prec); self.size];
        for (m, v) in self.band.iter().enumerate() {
            if !coeffs[m].is_zero() {
                out[m + self.offset] = coeffs[m].scale(v);
            }
        }
        Ok(out)
    }
}

/// The (n+1) x (n+1) matrix of I^theta on the monomial scale: band entry
/// m is vartheta(m) at column m + theta*q. Orders past the truncation
/// leave an empty band and the matrix is zero.
pub fn q_matrix(
    theta: &RationalOrder,
    grid: MuntzGrid,
    n: usize,
    p: Precision,
) -> Result<ShiftMatrix> {
    let offset = theta.shift_on(grid)?;
    let size = n + 1;
    let band = vartheta_table(theta.ratio(), grid, size.saturating_sub(offset), p)?;
    Ok(ShiftMatrix { size, offset, band, prec: p })
}
