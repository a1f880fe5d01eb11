//! Müntz basis on [0,1]: fractional-power series, the orthogonal function
//! family built from shifted Jacobi polynomials composed with u^(1/q), the
//! L2 projection onto their span, and conversion between the two coefficient
//! representations.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::kernel::complex::Cx;
use crate::kernel::precision::Precision;
use crate::kernel::real::Real;
use crate::orthopoly::{
    gauss_rule, jacobi_eval, jacobi_eval_all, jacobi_norm_sq, monomial_coeffs, Domain,
    JacobiParams, MonomialCoeffTable,
};

/// Exponent lattice {mu/q : mu = 0, 1, 2, ..}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MuntzGrid {
    q: u32,
}

impl MuntzGrid {
    pub fn new(q: u32) -> Result<Self> {
        if q < 2 {
            return Err(Error::validation("grid", "denominator must be at least 2"));
        }
        Ok(MuntzGrid { q })
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Lattice index of the exponent num/den, if it lies on the grid.
    pub fn index_of(&self, num: i64, den: i64) -> Option<i64> {
        if den == 0 {
            return None;
        }
        let scaled = num.checked_mul(self.q as i64)?;
        if scaled % den == 0 {
            Some(scaled / den)
        } else {
            None
        }
    }

    /// Weight exponents (0, q-1) of the family living on this grid.
    pub fn jacobi_params(&self, p: Precision) -> JacobiParams {
        JacobiParams::ints(0, self.q as i64 - 1, p).expect("q >= 2")
    }
}

/// Truncated series in powers t^(mu/q); coefficient mu is the factor of
/// t^(mu/q). The truncation order marks the highest coefficient that is
/// actually known: arithmetic never extends it silently.
#[derive(Clone, Debug)]
pub struct MuntzSeries {
    grid: MuntzGrid,
    coeffs: Vec<Cx>,
}

impl MuntzSeries {
    pub fn zero(grid: MuntzGrid, order: usize, p: Precision) -> Self {
        MuntzSeries { grid, coeffs: vec![Cx::zero(p); order + 1] }
    }

    pub fn from_coeffs(grid: MuntzGrid, coeffs: Vec<Cx>) -> Self {
        assert!(!coeffs.is_empty(), "a series carries at least the constant term");
        MuntzSeries { grid, coeffs }
    }

    pub fn grid(&self) -> MuntzGrid {
        self.grid
    }

    pub fn truncation_order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Cx] {
        &self.coeffs
    }

    pub fn coeff(&self, mu: usize) -> Option<&Cx> {
        self.coeffs.get(mu)
    }

    pub fn prec(&self) -> Precision {
        self.coeffs.iter().map(|c| c.prec()).min().expect("nonempty")
    }

    /// Overwrite one coefficient; the index must be within the truncation.
    pub fn set_coeff(&mut self, mu: usize, c: Cx) {
        self.coeffs[mu] = c;
    }

    fn same_grid(&self, rhs: &MuntzSeries) -> Result<()> {
        if self.grid != rhs.grid {
            return Err(Error::GridMismatch { expected: self.grid.q, got: rhs.grid.q });
        }
        Ok(())
    }

    /// Sum, truncated to the shorter operand: the longer tail is not known
    /// for the sum and is dropped rather than fabricated.
    pub fn add(&self, rhs: &MuntzSeries) -> Result<MuntzSeries> {
        self.same_grid(rhs)?;
        let n = self.coeffs.len().min(rhs.coeffs.len());
        let coeffs =
            (0..n).map(|m| &self.coeffs[m] + &rhs.coeffs[m]).collect();
        Ok(MuntzSeries { grid: self.grid, coeffs })
    }

    /// Cauchy product truncated to the shorter operand's order.
    pub fn mul(&self, rhs: &MuntzSeries) -> Result<MuntzSeries> {
        self.same_grid(rhs)?;
        let n = self.coeffs.len().min(rhs.coeffs.len());
        let p = self.prec().min(rhs.prec());
        let mut coeffs = vec![Cx::zero(p); n];
        for (i, a) in self.coeffs.iter().enumerate().take(n) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate().take(n - i) {
                if b.is_zero() {
                    continue;
                }
                coeffs[i + j] = &coeffs[i + j] + &(a * b);
            }
        }
        Ok(MuntzSeries { grid: self.grid, coeffs })
    }

    pub fn scale(&self, c: &Cx) -> MuntzSeries {
        let coeffs = self.coeffs.iter().map(|a| a * c).collect();
        MuntzSeries { grid: self.grid, coeffs }
    }

    pub fn neg(&self) -> MuntzSeries {
        let coeffs = self.coeffs.iter().map(|a| -a).collect();
        MuntzSeries { grid: self.grid, coeffs }
    }

    /// Deliberate widening with exact zeros; for series that are known in
    /// full (polynomials), not for truncations of longer expansions.
    pub fn zero_extended(&self, order: usize) -> MuntzSeries {
        let mut coeffs = self.coeffs.clone();
        let p = self.prec();
        while coeffs.len() <= order {
            coeffs.push(Cx::zero(p));
        }
        MuntzSeries { grid: self.grid, coeffs }
    }

    pub fn truncated(&self, order: usize) -> MuntzSeries {
        let n = (order + 1).min(self.coeffs.len());
        MuntzSeries { grid: self.grid, coeffs: self.coeffs[..n].to_vec() }
    }

    pub fn eval(&self, t: &Real) -> Result<Cx> {
        if t.is_negative() {
            return Err(Error::domain("series_eval", "argument below 0"));
        }
        if t.is_zero() {
            return Ok(self.coeffs[0].clone());
        }
        let root = t.pow_ratio(1, self.grid.q as i64)?;
        let mut acc = self.coeffs[0].clone();
        let mut pw = Real::one(t.prec());
        for c in &self.coeffs[1..] {
            pw = pw * &root;
            if !c.is_zero() {
                acc = acc + c.scale(&pw);
            }
        }
        acc.check("series_eval")
    }
}

/// Coefficients against the orthogonal family of degrees 0..=N on a grid.
#[derive(Clone, Debug)]
pub struct BasisVector {
    grid: MuntzGrid,
    coeffs: Vec<Cx>,
}

impl BasisVector {
    pub fn from_coeffs(grid: MuntzGrid, coeffs: Vec<Cx>) -> Self {
        assert!(!coeffs.is_empty());
        BasisVector { grid, coeffs }
    }

    pub fn grid(&self) -> MuntzGrid {
        self.grid
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Cx] {
        &self.coeffs
    }

    pub fn prec(&self) -> Precision {
        self.coeffs.iter().map(|c| c.prec()).min().expect("nonempty")
    }

    /// Pointwise value at u in [0,1].
    pub fn eval(&self, u: &Real) -> Result<Cx> {
        let params = self.grid.jacobi_params(u.prec());
        let s = u.pow_ratio(1, self.grid.q as i64)?;
        let vals = jacobi_eval_all(&params, self.degree(), &s);
        let mut acc = Cx::zero(u.prec());
        for (c, v) in self.coeffs.iter().zip(&vals) {
            acc = acc + c.scale(v);
        }
        Ok(acc)
    }
}

/// Basis function of degree i at u: the degree-i Jacobi polynomial with
/// weight exponents (0, q-1) evaluated at u^(1/q).
pub fn muntz_jacobi_eval(grid: MuntzGrid, i: usize, u: &Real) -> Result<Real> {
    let s = u.pow_ratio(1, grid.q as i64)?;
    Ok(jacobi_eval(&grid.jacobi_params(u.prec()), i, &s))
}

/// Lower-triangular change of basis: row i holds the coefficients of
/// 1, u^(1/q), .., u^(i/q) in the degree-i basis function.
#[derive(Debug)]
pub struct ConversionTable {
    grid: MuntzGrid,
    inner: MonomialCoeffTable,
}

impl ConversionTable {
    pub fn grid(&self) -> MuntzGrid {
        self.grid
    }

    pub fn order(&self) -> usize {
        self.inner.order()
    }

    /// Entry (i, j); zero above the diagonal.
    pub fn entry(&self, i: usize, j: usize) -> Real {
        if j <= i {
            self.inner.row(i)[j].clone()
        } else {
            Real::zero(self.inner.row(i)[0].prec())
        }
    }

    pub fn row(&self, i: usize) -> &[Real] {
        self.inner.row(i)
    }
}

type TableKey = (u32, usize, u32);

fn table_cache() -> &'static Mutex<HashMap<TableKey, Arc<ConversionTable>>> {
    static CACHE: OnceLock<Mutex<HashMap<TableKey, Arc<ConversionTable>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

pub fn conversion_table(grid: MuntzGrid, n: usize, p: Precision) -> Result<Arc<ConversionTable>> {
    let key = (grid.q, n, p.bits());
    if let Some(hit) = table_cache().lock().unwrap().get(&key) {
        return Ok(hit.clone());
    }
    let inner = monomial_coeffs(&grid.jacobi_params(p), n)?;
    let table = Arc::new(ConversionTable { grid, inner });
    table_cache().lock().unwrap().entry(key).or_insert_with(|| table.clone());
    Ok(table)
}

/// Row-vector-times-matrix product turning basis coefficients into series
/// coefficients on the same grid.
pub fn to_monomial(v: &BasisVector) -> Result<MuntzSeries> {
    let n = v.degree();
    let p = v.prec();
    let table = conversion_table(v.grid, n, p)?;
    let mut coeffs = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let mut acc = Cx::zero(p);
        for i in j..=n {
            acc = acc + v.coeffs[i].scale(&table.row(i)[j]);
        }
        coeffs.push(acc.check("to_monomial")?);
    }
    Ok(MuntzSeries { grid: v.grid, coeffs })
}

/// Inverse of [`to_monomial`]: back substitution against the triangular
/// table, highest degree first.
pub fn from_monomial(s: &MuntzSeries) -> Result<BasisVector> {
    let n = s.truncation_order();
    let p = s.prec();
    let table = conversion_table(s.grid, n, p)?;
    let mut out = vec![Cx::zero(p); n + 1];
    for i in (0..=n).rev() {
        let mut acc = s.coeffs[i].clone();
        for (k, c) in out.iter().enumerate().skip(i + 1) {
            acc = acc - c.scale(&table.row(k)[i]);
        }
        let diag = &table.row(i)[i];
        if diag.is_zero() {
            return Err(Error::Msg(format!("conversion table diagonal {i} vanished")));
        }
        out[i] = acc.scale(&diag.recip()).check("from_monomial")?;
    }
    Ok(BasisVector { grid: s.grid, coeffs: out })
}

/// L2 projection of f onto the span of degrees 0..=N. The integral runs in
/// the polynomial variable s = u^(1/q) against the weight s^(q-1), with a
/// 2(N+1)-point rule: the polynomial factor is integrated exactly and f is
/// oversampled twice over.
pub fn project(
    grid: MuntzGrid,
    n: usize,
    p: Precision,
    mut f: impl FnMut(&Real) -> Result<Cx>,
) -> Result<BasisVector> {
    let params = grid.jacobi_params(p);
    let rule = gauss_rule(&params, 2 * (n + 1), Domain::Unit, p)?;
    let mut sums = vec![Cx::zero(p); n + 1];
    for (s, w) in rule.nodes().iter().zip(rule.weights()) {
        let u = s.powi(grid.q as u64);
        let fv = f(&u)?;
        if fv.is_zero() {
            continue;
        }
        let basis = jacobi_eval_all(&params, n, s);
        for (i, b) in basis.iter().enumerate() {
            sums[i] = &sums[i] + &fv.scale(&(b * w));
        }
    }
    let mut coeffs = Vec::with_capacity(n + 1);
    for (i, sum) in sums.into_iter().enumerate() {
        let zeta = jacobi_norm_sq(&params, i)?;
        coeffs.push(sum.scale(&zeta.recip()).check("project")?);
    }
    Ok(BasisVector { grid, coeffs })
}
