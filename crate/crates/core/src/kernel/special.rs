//! Bessel and Mittag-Leffler evaluation by guarded power series.
//!
//! Both series alternate for the arguments this solver feeds them, so partial
//! sums can tower far above the final value before collapsing. Each evaluator
//! works at an elevated internal precision sized from the argument magnitude
//! and afterwards measures how many bits the hump actually consumed; only
//! when nothing significant survives does it fail, and then explicitly.

use crate::error::{Error, Result};
use crate::kernel::complex::Cx;
use crate::kernel::gamma::{factorial, gamma_rational};
use crate::kernel::precision::Precision;
use crate::kernel::real::Real;

/// Hard stop for series evaluation; hitting it is an error, not a truncation.
pub(crate) const SERIES_CAP: usize = 200_000;

const DIM_CAP: usize = 8;

fn cx_mag(z: &Cx) -> Option<i64> {
    match (z.re.log2_bound(), z.im.log2_bound()) {
        (Some(a), Some(b)) => Some(a.max(b)),
        (Some(a), None) => Some(a),
        (None, Some(b)) => Some(b),
        (None, None) => None,
    }
}

/// Fails if cancellation ate essentially every working bit.
fn check_survivors(
    final_mag: Option<i64>,
    max_mag: i64,
    wp: Precision,
    op: &'static str,
) -> Result<()> {
    let lost = max_mag - final_mag.unwrap_or(max_mag - wp.bits() as i64);
    let have = wp.bits() as i64 - lost;
    if have < 8 {
        return Err(Error::PrecisionLoss { op, have: have.max(0) as u32, lost: lost.max(0) as u32 });
    }
    Ok(())
}

/// Bessel function of the first kind, nonnegative integer order, |z| <= 10^3.
pub fn bessel_j(order: u64, z: &Cx) -> Result<Cx> {
    let req = z.prec();
    if !z.is_finite() {
        return Err(Error::NonFinite("bessel_j"));
    }
    let mag = z.abs().to_f64();
    if !(0.0..=1.0e3).contains(&mag) {
        return Err(Error::domain("bessel_j", "|z| must be at most 10^3"));
    }
    if z.is_zero() {
        return Ok(if order == 0 { Cx::one(req) } else { Cx::zero(req) });
    }
    // partial sums peak near e^|z|, about 1.443 |z| bits over the result
    let wp = req.plus(32 + (1.5 * mag).ceil() as u32);
    let half = Cx::new(z.re.round_to(wp), z.im.round_to(wp)).scale(&Real::from_ratio(1, 2, wp)?);
    let neg_q = -&(&half * &half);
    let mut term = half.powi(order).scale(&factorial(order, wp).recip());
    let mut sum = Cx::zero(wp);
    let mut max_mag = i64::MIN;
    let mut quiet = 0usize;
    for m in 1..=SERIES_CAP {
        sum = &sum + &term;
        let smag = cx_mag(&sum).unwrap_or(i64::MIN);
        max_mag = max_mag.max(smag);
        let tmag = cx_mag(&term).unwrap_or(i64::MIN);
        if smag > i64::MIN && tmag <= smag - (req.bits() as i64 + 16) {
            quiet += 1;
            if quiet >= 2 {
                check_survivors(cx_mag(&sum), max_mag, wp, "bessel_j")?;
                return Cx::new(sum.re.round_to(req), sum.im.round_to(req)).check("bessel_j");
            }
        } else {
            quiet = 0;
        }
        let m64 = m as u64;
        term = (&term * &neg_q).scale(&Real::from_u64(m64 * (m64 + order), wp).recip());
    }
    Err(Error::Msg("bessel_j: series cap exceeded".into()))
}

/// Real-argument convenience wrapper around [`bessel_j`].
pub fn bessel_j_re(order: u64, x: &Real) -> Result<Real> {
    let v = bessel_j(order, &Cx::from_real(x.clone()))?;
    debug_assert!(v.im.is_zero());
    Ok(v.re)
}

/// Gamma(alpha k + 1) for k = 0, 1, 2, ... via the rising-factorial
/// recurrence Gamma(x + g) = x (x+1) ... (x+g-1) Gamma(x) along residue
/// classes of k modulo the order denominator; seeds come from the
/// rational-gamma cache.
struct GammaLadder {
    an: i64,
    ad: i64,
    wp: Precision,
    ring: Vec<Real>,
    k: usize,
}

impl GammaLadder {
    fn new(order: (i64, i64), wp: Precision) -> Result<Self> {
        let (an, ad) = reduce_order(order)?;
        Ok(GammaLadder { an, ad, wp, ring: Vec::new(), k: 0 })
    }

    fn arg(&self, k: usize) -> Result<(i64, i64)> {
        let n = self.an as i128 * k as i128 + self.ad as i128;
        match i64::try_from(n) {
            Ok(n) => Ok((n, self.ad)),
            Err(_) => Err(Error::domain("mittag_leffler", "series index overflows gamma argument")),
        }
    }

    fn next(&mut self) -> Result<Real> {
        let k = self.k;
        self.k += 1;
        if k < self.ad as usize {
            let (n, d) = self.arg(k)?;
            let v = gamma_rational(n, d, self.wp)?;
            self.ring.push(v.clone());
            return Ok(v);
        }
        let slot = k % self.ad as usize;
        let (n, d) = self.arg(k - self.ad as usize)?;
        let mut x = Real::from_ratio(n, d, self.wp)?;
        let one = Real::one(self.wp);
        let mut v = self.ring[slot].clone();
        for _ in 0..self.an {
            v = v * &x;
            x = &x + &one;
        }
        self.ring[slot] = v.clone();
        Ok(v)
    }
}

fn reduce_order(order: (i64, i64)) -> Result<(i64, i64)> {
    use num_integer::Integer;
    let (mut an, mut ad) = order;
    if ad < 0 {
        an = -an;
        ad = -ad;
    }
    if an <= 0 || ad == 0 {
        return Err(Error::domain("mittag_leffler", "order must be positive"));
    }
    let g = an.gcd(&ad);
    let (an, ad) = (an / g, ad / g);
    if ad > 12 {
        return Err(Error::domain("mittag_leffler", "order denominator must be at most 12"));
    }
    Ok((an, ad))
}

/// Core series loop; `min_terms` forces extra terms past the stopping rule so
/// tests can confirm the truncation point is conservative. Returns the value
/// and the number of terms actually summed.
pub(crate) fn ml_series(order: (i64, i64), z: &Cx, min_terms: usize) -> Result<(Cx, usize)> {
    let req = z.prec();
    if !z.is_finite() {
        return Err(Error::NonFinite("mittag_leffler"));
    }
    let mag = z.abs().to_f64();
    if !(0.0..=1.0e3).contains(&mag) {
        return Err(Error::domain("mittag_leffler", "|z| must be at most 10^3"));
    }
    // cancellation grows with |z|; 32 extra bits keep the stop rule meaningful
    let wp = req.plus((3.5 * mag).ceil() as u32 + 32);
    let mut ladder = GammaLadder::new(order, wp)?;
    let zw = Cx::new(z.re.round_to(wp), z.im.round_to(wp));
    let mut zk = Cx::one(wp);
    let mut sum = Cx::zero(wp);
    let mut max_mag = i64::MIN;
    let mut quiet = 0usize;
    for k in 0..SERIES_CAP {
        let g = ladder.next()?;
        let term = zk.scale(&g.recip());
        sum = &sum + &term;
        let smag = cx_mag(&sum).unwrap_or(i64::MIN);
        max_mag = max_mag.max(smag);
        let tmag = cx_mag(&term).unwrap_or(i64::MIN);
        if smag > i64::MIN && tmag <= smag - (req.bits() as i64 + 16) && k >= min_terms {
            quiet += 1;
            if quiet >= 3 {
                check_survivors(cx_mag(&sum), max_mag, wp, "mittag_leffler")?;
                let v = Cx::new(sum.re.round_to(req), sum.im.round_to(req));
                return Ok((v.check("mittag_leffler")?, k + 1));
            }
        } else {
            quiet = 0;
        }
        zk = &zk * &zw;
    }
    Err(Error::Msg("mittag_leffler: series cap exceeded".into()))
}

/// One-parameter Mittag-Leffler function E_alpha(z), alpha = order.0/order.1.
pub fn mittag_leffler(order: (i64, i64), z: &Cx) -> Result<Cx> {
    ml_series(order, z, 0).map(|(v, _)| v)
}

/// Real-argument convenience wrapper around [`mittag_leffler`].
pub fn mittag_leffler_re(order: (i64, i64), z: &Real) -> Result<Real> {
    let v = mittag_leffler(order, &Cx::from_real(z.clone()))?;
    debug_assert!(v.im.is_zero());
    Ok(v.re)
}

/// Matrix Mittag-Leffler sum E_alpha(M) for square real M, dimension <= 8.
pub fn matrix_mittag_leffler(order: (i64, i64), m: &[Vec<Real>]) -> Result<Vec<Vec<Real>>> {
    let dim = m.len();
    if dim == 0 || dim > DIM_CAP {
        return Err(Error::DimensionTooLarge { got: dim, max: DIM_CAP });
    }
    let mut req: Option<Precision> = None;
    for row in m {
        if row.len() != dim {
            return Err(Error::validation("matrix", "must be square"));
        }
        for e in row {
            if !e.is_finite() {
                return Err(Error::NonFinite("matrix_mittag_leffler"));
            }
            req = Some(match req {
                Some(p) => p.min(e.prec()),
                None => e.prec(),
            });
        }
    }
    let req = req.expect("dim > 0");
    // max row sum bounds the spectral radius, which drives the hump height
    let mut norm = 0.0f64;
    for row in m {
        let s: f64 = row.iter().map(|e| e.abs().to_f64()).sum();
        norm = norm.max(s);
    }
    if !(0.0..=1.0e3).contains(&norm) {
        return Err(Error::domain("matrix_mittag_leffler", "matrix norm must be at most 10^3"));
    }
    let wp = req.plus((3.5 * norm).ceil() as u32 + 32);
    let mw: Vec<Vec<Real>> =
        m.iter().map(|row| row.iter().map(|e| e.round_to(wp)).collect()).collect();
    let mut ladder = GammaLadder::new(order, wp)?;
    let mut pk = mat_identity(dim, wp);
    let mut sum = mat_zero(dim, wp);
    let mut max_mag = i64::MIN;
    let mut quiet = 0usize;
    for _ in 0..SERIES_CAP {
        let ginv = ladder.next()?.recip();
        for (srow, prow) in sum.iter_mut().zip(&pk) {
            for (s, q) in srow.iter_mut().zip(prow) {
                *s = &*s + &(q * &ginv);
            }
        }
        let smag = mat_mag(&sum).unwrap_or(i64::MIN);
        max_mag = max_mag.max(smag);
        let tmag = match (mat_mag(&pk), ginv.log2_bound()) {
            (Some(a), Some(b)) => a + b,
            _ => i64::MIN,
        };
        if smag > i64::MIN && tmag <= smag - (req.bits() as i64 + 16) {
            quiet += 1;
            if quiet >= 3 {
                check_survivors(mat_mag(&sum), max_mag, wp, "matrix_mittag_leffler")?;
                return sum
                    .iter()
                    .map(|row| {
                        row.iter()
                            .map(|e| e.round_to(req).check("matrix_mittag_leffler"))
                            .collect()
                    })
                    .collect();
            }
        } else {
            quiet = 0;
        }
        pk = mat_mul(&pk, &mw, wp);
    }
    Err(Error::Msg("matrix_mittag_leffler: series cap exceeded".into()))
}

fn mat_zero(dim: usize, p: Precision) -> Vec<Vec<Real>> {
    (0..dim).map(|_| (0..dim).map(|_| Real::zero(p)).collect()).collect()
}

fn mat_identity(dim: usize, p: Precision) -> Vec<Vec<Real>> {
    let mut m = mat_zero(dim, p);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Real::one(p);
    }
    m
}

fn mat_mul(a: &[Vec<Real>], b: &[Vec<Real>], p: Precision) -> Vec<Vec<Real>> {
    let dim = a.len();
    let mut out = mat_zero(dim, p);
    for i in 0..dim {
        for (k, aik) in a[i].iter().enumerate() {
            if aik.is_zero() {
                continue;
            }
            for (j, bkj) in b[k].iter().enumerate() {
                out[i][j] = &out[i][j] + &(aik * bkj);
            }
        }
    }
    out
}

fn mat_mag(m: &[Vec<Real>]) -> Option<i64> {
    let mut best: Option<i64> = None;
    for row in m {
        for e in row {
            if let Some(b) = e.log2_bound() {
                best = Some(best.map_or(b, |x| x.max(b)));
            }
        }
    }
    best
}
