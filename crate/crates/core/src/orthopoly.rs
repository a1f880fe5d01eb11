//! Shifted Jacobi polynomials on the unit interval: evaluation, norms,
//! monomial coefficient tables, and Gauss quadrature rules.
//!
//! Evaluation always goes through the three-term recurrence; the monomial
//! table exists only for basis conversion, because the monomial form of a
//! high-degree row is exponentially ill-conditioned.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::kernel::gamma::{factorial, gamma_ratio};
use crate::kernel::precision::Precision;
use crate::kernel::real::Real;

/// Weight exponents of s^beta (1-s)^alpha on [0,1]; both must exceed -1.
#[derive(Clone, Debug)]
pub struct JacobiParams {
    alpha: Real,
    beta: Real,
    alpha_int: Option<i64>,
    beta_int: Option<i64>,
}

fn small_int(x: &Real) -> Option<i64> {
    if !x.is_integer() {
        return None;
    }
    let f = x.to_f64();
    if f.abs() < 2f64.powi(40) {
        Some(f as i64)
    } else {
        None
    }
}

impl JacobiParams {
    pub fn new(alpha: Real, beta: Real) -> Result<Self> {
        let neg_one = Real::from_i64(-1, alpha.prec());
        if alpha <= neg_one || beta <= neg_one {
            return Err(Error::validation("jacobi", "weight exponents must exceed -1"));
        }
        let alpha_int = small_int(&alpha);
        let beta_int = small_int(&beta);
        Ok(JacobiParams { alpha, beta, alpha_int, beta_int })
    }

    pub fn ints(alpha: i64, beta: i64, p: Precision) -> Result<Self> {
        JacobiParams::new(Real::from_i64(alpha, p), Real::from_i64(beta, p))
    }

    pub fn alpha(&self) -> &Real {
        &self.alpha
    }

    pub fn beta(&self) -> &Real {
        &self.beta
    }

    pub fn prec(&self) -> Precision {
        self.alpha.prec().min(self.beta.prec())
    }

    fn int_key(&self) -> Option<(i64, i64)> {
        Some((self.alpha_int?, self.beta_int?))
    }

    fn at(&self, p: Precision) -> (Real, Real) {
        (self.alpha.round_to(p), self.beta.round_to(p))
    }
}

/// Value and x-derivative of the degree-n polynomial of the family with the
/// given exponents, on the symmetric argument x in [-1,1].
fn recurrence_d(alpha: &Real, beta: &Real, n: usize, x: &Real) -> (Real, Real) {
    let wp = x.prec();
    let one = Real::one(wp);
    if n == 0 {
        return (one, Real::zero(wp));
    }
    let ab = alpha + beta;
    // degree 1: ((ab + 2) x + (alpha - beta)) / 2
    let slope = (&ab + Real::from_u64(2, wp)).ldexp(-1);
    let mut cur = &slope * x + (alpha - beta).ldexp(-1);
    let mut dcur = slope;
    if n == 1 {
        return (cur, dcur);
    }
    let mut prev = one.clone();
    let mut dprev = Real::zero(wp);
    let aa_bb = (alpha * alpha) - (beta * beta);
    for k in 2..=n {
        let kk = Real::from_u64(k as u64, wp);
        let two_k_ab = kk.ldexp(1) + &ab;
        let t0 = &two_k_ab - Real::from_u64(2, wp);
        let t1 = &two_k_ab - Real::one(wp);
        let a = (&kk * (&kk + &ab)).ldexp(1) * &t0;
        let b = &t1 * &aa_bb;
        let c = &t0 * &t1 * &two_k_ab;
        let d = ((&kk + alpha - &one) * (&kk + beta - &one) * &two_k_ab).ldexp(1);
        let lin = &b + &c * x;
        let next = (&lin * &cur - &d * &prev) / &a;
        let dnext = (&lin * &dcur + &c * &cur - &d * &dprev) / &a;
        prev = cur;
        dprev = dcur;
        cur = next;
        dcur = dnext;
    }
    (cur, dcur)
}

fn to_symmetric(s: &Real, wp: Precision) -> Real {
    s.round_to(wp).ldexp(1) - Real::one(wp)
}

/// Degree-i shifted polynomial at s in [0,1], by the three-term recurrence.
pub fn jacobi_eval(params: &JacobiParams, i: usize, s: &Real) -> Real {
    let wp = s.prec().plus(32);
    let (a, b) = params.at(wp);
    let x = to_symmetric(s, wp);
    recurrence_d(&a, &b, i, &x).0.round_to(s.prec())
}

/// All degrees 0..=n at one point, sharing a single recurrence pass.
pub fn jacobi_eval_all(params: &JacobiParams, n: usize, s: &Real) -> Vec<Real> {
    let wp = s.prec().plus(32);
    let (alpha, beta) = params.at(wp);
    let x = to_symmetric(s, wp);
    let one = Real::one(wp);
    let mut out = Vec::with_capacity(n + 1);
    out.push(one.round_to(s.prec()));
    if n == 0 {
        return out;
    }
    let ab = &alpha + &beta;
    let mut prev = one.clone();
    let mut cur = (&ab + Real::from_u64(2, wp)).ldexp(-1) * &x + (&alpha - &beta).ldexp(-1);
    out.push(cur.round_to(s.prec()));
    let aa_bb = (&alpha * &alpha) - (&beta * &beta);
    for k in 2..=n {
        let kk = Real::from_u64(k as u64, wp);
        let two_k_ab = kk.ldexp(1) + &ab;
        let t0 = &two_k_ab - Real::from_u64(2, wp);
        let t1 = &two_k_ab - &one;
        let a = (&kk * (&kk + &ab)).ldexp(1) * &t0;
        let b = &t1 * &aa_bb;
        let c = &t0 * &t1 * &two_k_ab;
        let d = ((&kk + &alpha - &one) * (&kk + &beta - &one) * &two_k_ab).ldexp(1);
        let next = ((&b + &c * &x) * &cur - &d * &prev) / &a;
        prev = cur;
        cur = next;
        out.push(cur.round_to(s.prec()));
    }
    out
}

/// Squared weighted norm of the degree-i shifted polynomial:
/// Gamma(i+a+1) Gamma(i+b+1) / ((2i+a+b+1) i! Gamma(i+a+b+1)).
pub fn jacobi_norm_sq(params: &JacobiParams, i: usize) -> Result<Real> {
    let p = params.prec();
    let wp = p.plus(32);
    let (alpha, beta) = params.at(wp);
    let one = Real::one(wp);
    let ii = Real::from_u64(i as u64, wp);
    let r1 = gamma_ratio(&(&ii + &alpha + &one), &(&ii + &one))?;
    let r2 = gamma_ratio(&(&ii + &beta + &one), &(&ii + &alpha + &beta + &one))?;
    let den = ii.ldexp(1) + &alpha + &beta + &one;
    (r1 * r2 / den).round_to(p).check("jacobi_norm_sq")
}

/// Lower-triangular table of monomial coefficients: row i holds the
/// coefficients of 1, s, .., s^i for the degree-i shifted polynomial.
#[derive(Clone, Debug)]
pub struct MonomialCoeffTable {
    rows: Vec<Vec<Real>>,
}

impl MonomialCoeffTable {
    pub fn order(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn row(&self, i: usize) -> &[Real] {
        &self.rows[i]
    }

    /// Horner evaluation of row i at s.
    pub fn eval_row(&self, i: usize, s: &Real) -> Real {
        let row = &self.rows[i];
        let mut acc = row[i].clone();
        for j in (0..i).rev() {
            acc = acc * s + &row[j];
        }
        acc
    }
}

fn binomial_exact(top: u64, under: u64) -> BigUint {
    let mut acc = BigUint::from(1u32);
    for t in 0..under {
        acc = acc * BigUint::from(top - t) / BigUint::from(t + 1);
    }
    acc
}

/// Monomial coefficients for all degrees 0..=n by the explicit product
/// formula. Integer weight exponents take an exact binomial route, so those
/// entries are correctly rounded integers.
pub fn monomial_coeffs(params: &JacobiParams, n: usize) -> Result<MonomialCoeffTable> {
    let p = params.prec();
    let mut rows = Vec::with_capacity(n + 1);
    if let Some((a, b)) = params.int_key().filter(|(a, b)| *a >= 0 && *b >= 0) {
        let (a, b) = (a as u64, b as u64);
        for i in 0..=n as u64 {
            let mut row = Vec::with_capacity(i as usize + 1);
            for j in 0..=i {
                let m = binomial_exact(i + b, i - j) * binomial_exact(i + a + b + j, j);
                let v = Real::from_biguint(&m, p);
                row.push(if (i - j) % 2 == 1 { -v } else { v });
            }
            rows.push(row);
        }
        return Ok(MonomialCoeffTable { rows });
    }
    let wp = p.plus(32);
    let (alpha, beta) = params.at(wp);
    let one = Real::one(wp);
    let iabp1 = |i: u64| Real::from_u64(i + 1, wp) + &alpha + &beta;
    for i in 0..=n as u64 {
        let mut row = Vec::with_capacity(i as usize + 1);
        for j in 0..=i {
            let r1 = gamma_ratio(&(iabp1(i) + Real::from_u64(j, wp)), &iabp1(i))?;
            let r2 = gamma_ratio(
                &(Real::from_u64(i, wp) + &beta + &one),
                &(Real::from_u64(j, wp) + &beta + &one),
            )?;
            let den = factorial(j, wp) * factorial(i - j, wp);
            let v = (r1 * r2 / den).round_to(p).check("monomial_coeffs")?;
            row.push(if (i - j) % 2 == 1 { -v } else { v });
        }
        rows.push(row);
    }
    Ok(MonomialCoeffTable { rows })
}

/// Interval a quadrature rule lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Domain {
    /// [0,1], weight s^beta (1-s)^alpha
    Unit,
    /// [-1,1], weight 1 (Legendre only)
    Symmetric,
}

#[derive(Clone, Debug)]
pub struct QuadratureRule {
    nodes: Vec<Real>,
    weights: Vec<Real>,
    domain: Domain,
    weight_params: JacobiParams,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[Real] {
        &self.nodes
    }

    pub fn weights(&self) -> &[Real] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn weight_params(&self) -> &JacobiParams {
        &self.weight_params
    }

    /// Sum of w_k f(node_k).
    pub fn integrate(&self, mut f: impl FnMut(&Real) -> Real) -> Real {
        let mut acc = Real::zero(self.nodes[0].prec());
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + f(x) * w;
        }
        acc
    }
}

const NEWTON_CAP: usize = 200;

type RuleKey = (i64, i64, usize, u32, Domain);

fn rule_cache() -> &'static Mutex<HashMap<RuleKey, Arc<QuadratureRule>>> {
    static CACHE: OnceLock<Mutex<HashMap<RuleKey, Arc<QuadratureRule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// n-point Gauss rule for the weight of `params` on the given domain; nodes
/// from Newton refinement started at Chebyshev points, weights from the
/// derivative formula. Rules with integer exponents are cached.
pub fn gauss_rule(
    params: &JacobiParams,
    n: usize,
    domain: Domain,
    p: Precision,
) -> Result<Arc<QuadratureRule>> {
    if n == 0 {
        return Err(Error::validation("gauss_rule", "need at least one point"));
    }
    let key = params.int_key().map(|(a, b)| (a, b, n, p.bits(), domain));
    if let Some(k) = key {
        if let Some(hit) = rule_cache().lock().unwrap().get(&k) {
            return Ok(hit.clone());
        }
    }
    let rule = match domain {
        Domain::Symmetric => {
            if params.int_key() != Some((0, 0)) {
                return Err(Error::validation("gauss_rule", "symmetric rules are Legendre only"));
            }
            legendre_rule(params, n, p)?
        }
        Domain::Unit => unit_rule(params, n, p)?,
    };
    let rule = Arc::new(rule);
    if let Some(k) = key {
        // idempotent: concurrent builders insert identical rules
        rule_cache().lock().unwrap().entry(k).or_insert_with(|| rule.clone());
    }
    Ok(rule)
}

/// Legendre nodes on [-1,1]; only the positive half is refined, the mirror
/// half is copied sign-flipped so symmetry holds bit for bit.
fn legendre_rule(params: &JacobiParams, n: usize, p: Precision) -> Result<QuadratureRule> {
    let wp = p.plus(32);
    let (alpha, beta) = params.at(wp);
    let pi = Real::pi(wp);
    let tol = Real::one(wp).ldexp(8 - wp.bits() as i32);
    let two = Real::from_u64(2, wp);
    let mut nodes = vec![Real::zero(p); n];
    let mut weights = vec![Real::zero(p); n];
    let weight_of = |x: &Real, dx: &Real| {
        let w = &two / ((Real::one(wp) - x * x) * dx * dx);
        w.round_to(p)
    };
    for i in 1..=n / 2 {
        // descending positive roots
        let theta = &pi * Real::from_ratio(4 * i as i64 - 1, 4 * n as i64 + 2, wp)?;
        let mut x = theta.cos();
        let mut done = false;
        for _ in 0..NEWTON_CAP {
            let (v, d) = recurrence_d(&alpha, &beta, n, &x);
            let step = &v / &d;
            x = &x - &step;
            if step.abs() <= tol {
                done = true;
                break;
            }
        }
        if !done {
            return Err(Error::NewtonStall { node: i - 1, n });
        }
        // one clean pass for the derivative at the settled node
        let (_, dx) = recurrence_d(&alpha, &beta, n, &x);
        let w = weight_of(&x, &dx);
        let xr = x.round_to(p);
        nodes[n - i] = xr.clone();
        nodes[i - 1] = -xr;
        weights[n - i] = w.clone();
        weights[i - 1] = w;
    }
    if n % 2 == 1 {
        let mid = n / 2;
        let (_, d) = recurrence_d(&alpha, &beta, n, &Real::zero(wp));
        nodes[mid] = Real::zero(p);
        weights[mid] = weight_of(&Real::zero(wp), &d);
    }
    QuadratureRule {
        nodes,
        weights,
        domain: Domain::Symmetric,
        weight_params: params.clone(),
    }
    .validated()
}

/// Weighted rule on [0,1]. Roots are isolated by sign changes over a
/// Chebyshev-distributed grid (plain Newton from bare Chebyshev guesses can
/// drop a root when the weight pushes nodes hard toward an endpoint), then
/// polished by Newton with a bisection safeguard.
fn unit_rule(params: &JacobiParams, n: usize, p: Precision) -> Result<QuadratureRule> {
    let wp = p.plus(32);
    let (alpha, beta) = params.at(wp);
    let one = Real::one(wp);
    let pi = Real::pi(wp);
    let eval = |s: &Real| recurrence_d(&alpha, &beta, n, &(s.ldexp(1) - &one));

    // bracket the n sign changes; the grid is refined a few times if the
    // first pass misses any
    let mut brackets: Vec<(Real, Real)> = Vec::new();
    let mut m = 4 * n.max(4);
    for _ in 0..4 {
        brackets.clear();
        // anchor the sign sweep just inside 0
        let mut prev_s = Real::one(wp).ldexp(-(wp.bits() as i32) / 2);
        let mut prev_sign = if eval(&prev_s).0.is_negative() { -1 } else { 1 };
        for j in 0..m {
            let ang = &pi * Real::from_ratio(2 * j as i64 + 1, 2 * m as i64, wp)?;
            let s = (&one - ang.cos()).ldexp(-1);
            let v = eval(&s).0;
            if v.is_zero() {
                // exactly on a root: nudge the bracket around it
                let eps = Real::one(wp).ldexp(-(wp.bits() as i32 - 4));
                brackets.push((&s - &eps, &s + &eps));
                prev_sign = -prev_sign;
                prev_s = s;
                continue;
            }
            let sign = if v.is_negative() { -1 } else { 1 };
            if sign != prev_sign {
                brackets.push((prev_s.clone(), s.clone()));
                prev_sign = sign;
            }
            prev_s = s;
        }
        if brackets.len() < n {
            let v1 = eval(&one).0;
            let end_sign = if v1.is_negative() { -1 } else { 1 };
            if end_sign != prev_sign {
                brackets.push((prev_s.clone(), one.clone()));
            }
        }
        if brackets.len() == n {
            break;
        }
        m *= 2;
    }
    if brackets.len() != n {
        return Err(Error::NewtonStall { node: brackets.len(), n });
    }

    let tol = Real::one(wp).ldexp(8 - wp.bits() as i32);
    let mut nodes = Vec::with_capacity(n);
    let mut derivs = Vec::with_capacity(n);
    for (k, (mut lo, mut hi)) in brackets.into_iter().enumerate() {
        let lo_neg = eval(&lo).0.is_negative();
        let mut s = (&lo + &hi).ldexp(-1);
        let mut done = false;
        for _ in 0..NEWTON_CAP {
            let (v, d) = eval(&s);
            if v.is_zero() {
                done = true;
                break;
            }
            if v.is_negative() == lo_neg {
                lo = s.clone();
            } else {
                hi = s.clone();
            }
            // d is d/dx and x = 2s - 1, so the step in s is v / (2d)
            let step = (&v / &d).ldexp(-1);
            // converged: test before the bracket check, because at the ulp
            // wall the step can round one ulp past the endpoint and a naive
            // reject would restart bisection from the stale far side
            if step.abs() <= tol {
                done = true;
                break;
            }
            let next = &s - &step;
            s = if next.is_finite() && next > lo && next < hi {
                next
            } else {
                (&lo + &hi).ldexp(-1)
            };
        }
        if !done {
            return Err(Error::NewtonStall { node: k, n });
        }
        let (_, d) = eval(&s);
        nodes.push(s);
        derivs.push(d.ldexp(1)); // d/ds
    }

    // leading constant Gamma(n+a+1) Gamma(n+b+1) / (Gamma(n+a+b+1) n!)
    let nn = Real::from_u64(n as u64, wp);
    let c = gamma_ratio(&(&nn + &alpha + &one), &(&nn + &alpha + &beta + &one))?
        * gamma_ratio(&(&nn + &beta + &one), &(&nn + &one))?;
    let mut weights = Vec::with_capacity(n);
    for (s, d) in nodes.iter().zip(&derivs) {
        let w = &c / (s * (&one - s) * d * d);
        weights.push(w.round_to(p).check("gauss_rule")?);
    }
    let nodes = nodes.into_iter().map(|s| s.round_to(p)).collect();
    QuadratureRule {
        nodes,
        weights,
        domain: Domain::Unit,
        weight_params: params.clone(),
    }
    .validated()
}

impl QuadratureRule {
    fn validated(self) -> Result<Self> {
        let n = self.nodes.len();
        for k in 0..n {
            if !self.weights[k].is_positive() {
                return Err(Error::NewtonStall { node: k, n });
            }
            if k + 1 < n && self.nodes[k] >= self.nodes[k + 1] {
                return Err(Error::NewtonStall { node: k, n });
            }
        }
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(bits: u32) -> Precision {
        Precision::new(bits).unwrap()
    }

    fn close(a: &Real, b: &Real, shift: i64) -> bool {
        let d = (a - b).abs();
        if d.is_zero() {
            return true;
        }
        let scale = a.abs().max_by_abs(&b.abs());
        d.log2_bound().unwrap() - scale.log2_bound().unwrap_or(0) <= -shift
    }

    #[test]
    fn low_degree_closed_forms() {
        let bits = 192;
        let pp = JacobiParams::ints(0, 0, p(bits)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0x0a11_0001);
        for _ in 0..5 {
            let s = Real::from_f64(rng.gen::<f64>(), p(bits));
            assert!(jacobi_eval(&pp, 0, &s) == Real::one(p(bits)));
            let lin = s.ldexp(1) - Real::one(p(bits));
            assert!(close(&jacobi_eval(&pp, 1, &s), &lin, bits as i64 - 8));
        }
        let pq = JacobiParams::ints(0, 1, p(bits)).unwrap();
        let s = Real::from_ratio(1, 4, p(bits)).unwrap();
        // 3s - 2 at 1/4
        let want = Real::from_ratio(-5, 4, p(bits)).unwrap();
        assert!(close(&jacobi_eval(&pq, 1, &s), &want, bits as i64 - 8));
    }

    #[test]
    fn norm_closed_forms() {
        let bits = 192;
        let pp = JacobiParams::ints(0, 0, p(bits)).unwrap();
        assert!(jacobi_norm_sq(&pp, 0).unwrap() == Real::one(p(bits)));
        let fifth = Real::from_ratio(1, 5, p(bits)).unwrap();
        assert!(close(&jacobi_norm_sq(&pp, 2).unwrap(), &fifth, bits as i64 - 8));
        let pq = JacobiParams::ints(0, 1, p(bits)).unwrap();
        let quarter = Real::from_ratio(1, 4, p(bits)).unwrap();
        assert!(close(&jacobi_norm_sq(&pq, 1).unwrap(), &quarter, bits as i64 - 8));
    }

    #[test]
    fn norm_matches_quadrature() {
        // formula route vs numerical integration of the square
        let bits = 192;
        let pq = JacobiParams::ints(0, 3, p(bits)).unwrap();
        let rule = gauss_rule(&pq, 8, Domain::Unit, p(bits)).unwrap();
        let quad = rule.integrate(|s| {
            let v = jacobi_eval(&pq, 4, s);
            &v * &v
        });
        let exact = jacobi_norm_sq(&pq, 4).unwrap();
        assert!(close(&quad, &exact, bits as i64 - 16));
    }

    #[test]
    fn monomial_tables_small() {
        let bits = 128;
        let pp = JacobiParams::ints(0, 0, p(bits)).unwrap();
        let t = monomial_coeffs(&pp, 1).unwrap();
        assert!(t.row(0)[0] == Real::one(p(bits)));
        assert!(t.row(1)[0] == Real::from_i64(-1, p(bits)));
        assert!(t.row(1)[1] == Real::from_i64(2, p(bits)));
        let pq = JacobiParams::ints(0, 1, p(bits)).unwrap();
        let tq = monomial_coeffs(&pq, 1).unwrap();
        assert!(tq.row(1)[0] == Real::from_i64(-2, p(bits)));
        assert!(tq.row(1)[1] == Real::from_i64(3, p(bits)));
        let t0 = monomial_coeffs(&pp, 0).unwrap();
        assert_eq!(t0.order(), 0);
        assert!(t0.row(0)[0] == Real::one(p(bits)));
    }

    #[test]
    fn monomial_rows_match_recurrence() {
        // policy precision for degree 30
        let bits = Precision::for_degree(30).bits();
        let pq = JacobiParams::ints(0, 2, p(bits)).unwrap();
        let t = monomial_coeffs(&pq, 30).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0x0a11_0002);
        for _ in 0..10 {
            let s = Real::from_f64(rng.gen::<f64>(), p(bits));
            for i in [3usize, 11, 30] {
                let a = t.eval_row(i, &s);
                let b = jacobi_eval(&pq, i, &s);
                assert!(close(&a, &b, bits as i64 - 16), "degree {i}");
            }
        }
    }

    #[test]
    fn general_exponents_match_recurrence() {
        // half-integer exponents exercise the gamma-product route; the table
        // must still reproduce the recurrence values
        let bits = 160;
        let ph = JacobiParams::new(
            Real::from_ratio(1, 2, p(bits)).unwrap(),
            Real::from_ratio(3, 2, p(bits)).unwrap(),
        )
        .unwrap();
        let t = monomial_coeffs(&ph, 12).unwrap();
        for s in [Real::from_ratio(2, 7, p(bits)).unwrap(), Real::from_ratio(9, 10, p(bits)).unwrap()] {
            for i in [5usize, 12] {
                let via_table = t.eval_row(i, &s);
                let via_rec = jacobi_eval(&ph, i, &s);
                assert!(close(&via_table, &via_rec, bits as i64 - 16));
            }
        }
    }

    #[test]
    fn rejects_exponents_at_or_below_minus_one() {
        let bits = 128;
        assert!(JacobiParams::ints(-1, 0, p(bits)).is_err());
        assert!(JacobiParams::ints(0, -2, p(bits)).is_err());
        assert!(JacobiParams::ints(0, 0, p(bits)).is_ok());
    }

    #[test]
    fn legendre_one_and_two_points() {
        let bits = 192;
        let pp = JacobiParams::ints(0, 0, p(bits)).unwrap();
        let r1 = gauss_rule(&pp, 1, Domain::Symmetric, p(bits)).unwrap();
        assert!(r1.nodes()[0].is_zero());
        assert!(r1.weights()[0] == Real::from_u64(2, p(bits)));
        let r2 = gauss_rule(&pp, 2, Domain::Symmetric, p(bits)).unwrap();
        let inv_sqrt3 = Real::from_u64(3, p(bits)).sqrt().unwrap().recip();
        assert!(close(&r2.nodes()[1], &inv_sqrt3, bits as i64 - 8));
        assert!(close(&r2.weights()[0], &Real::one(p(bits)), bits as i64 - 8));
        assert!(r2.nodes()[0] == -r2.nodes()[1].clone());
    }

    #[test]
    fn legendre_symmetry_is_bit_exact() {
        let bits = 256;
        let pp = JacobiParams::ints(0, 0, p(bits)).unwrap();
        for n in [9usize, 12] {
            let r = gauss_rule(&pp, n, Domain::Symmetric, p(bits)).unwrap();
            for k in 0..n / 2 {
                assert!(r.nodes()[k] == -r.nodes()[n - 1 - k].clone());
                assert!(r.weights()[k] == r.weights()[n - 1 - k]);
            }
            if n % 2 == 1 {
                assert!(r.nodes()[n / 2].is_zero());
            }
        }
    }

    #[test]
    fn weighted_two_point_rule_hits_cubic_moment() {
        let bits = 192;
        let pq = JacobiParams::ints(0, 1, p(bits)).unwrap();
        let r = gauss_rule(&pq, 2, Domain::Unit, p(bits)).unwrap();
        let m3 = r.integrate(|s| s.powi(3));
        let fifth = Real::from_ratio(1, 5, p(bits)).unwrap();
        assert!(close(&m3, &fifth, bits as i64 - 16));
        let total = r.integrate(|s| Real::one(s.prec()));
        let half = Real::from_ratio(1, 2, p(bits)).unwrap();
        assert!(close(&total, &half, bits as i64 - 16));
    }

    #[test]
    fn quadrature_exactness_through_degree() {
        let bits = 192;
        for (a, b) in [(0i64, 0i64), (0, 1), (0, 3)] {
            let pq = JacobiParams::ints(a, b, p(bits)).unwrap();
            for n in [1usize, 2, 5, 13] {
                let r = gauss_rule(&pq, n, Domain::Unit, p(bits)).unwrap();
                for d in 0..=(2 * n - 1) as u64 {
                    let m = r.integrate(|s| s.powi(d));
                    // moment of s^d against s^b on [0,1] is 1/(b+d+1)
                    let exact = Real::from_ratio(1, b + d as i64 + 1, p(bits)).unwrap();
                    assert!(close(&m, &exact, bits as i64 - 16), "({a},{b}) n={n} d={d}");
                }
            }
        }
    }

    #[test]
    fn gram_matrix_is_diagonal() {
        let bits = 192;
        let nn = 40usize;
        for (a, b) in [(0i64, 0i64), (0, 1), (0, 3)] {
            let pq = JacobiParams::ints(a, b, p(bits)).unwrap();
            let r = gauss_rule(&pq, nn + 1, Domain::Unit, p(bits)).unwrap();
            // values of every degree at every node, one recurrence pass per node
            let table: Vec<Vec<Real>> =
                r.nodes().iter().map(|s| jacobi_eval_all(&pq, nn, s)).collect();
            let zeta_max = jacobi_norm_sq(&pq, 0).unwrap();
            let tol = zeta_max.ldexp(16 - bits as i32);
            for i in (0..=nn).step_by(7) {
                for j in (0..=nn).step_by(5) {
                    let mut g = Real::zero(p(bits));
                    for (k, w) in r.weights().iter().enumerate() {
                        g = g + &table[k][i] * &table[k][j] * w;
                    }
                    if i == j {
                        let z = jacobi_norm_sq(&pq, i).unwrap();
                        assert!(close(&g, &z, bits as i64 - 16), "diag {i} ({a},{b})");
                    } else {
                        assert!(g.abs() <= tol, "off-diag {i},{j} ({a},{b}): {g:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn steep_weight_small_rules_stay_sorted() {
        // beta = 11 pushes nodes toward 1; the bracketing must still isolate
        // every root
        let bits = 192;
        let pq = JacobiParams::ints(0, 11, p(bits)).unwrap();
        for n in 1..=8usize {
            let r = gauss_rule(&pq, n, Domain::Unit, p(bits)).unwrap();
            assert_eq!(r.len(), n);
            let total = r.integrate(|s| Real::one(s.prec()));
            let twelfth = Real::from_ratio(1, 12, p(bits)).unwrap();
            assert!(close(&total, &twelfth, bits as i64 - 16), "n={n}");
        }
    }

    #[test]
    fn rules_are_cached_and_shared() {
        let bits = 128;
        let pq = JacobiParams::ints(0, 1, p(bits)).unwrap();
        let a = gauss_rule(&pq, 7, Domain::Unit, p(bits)).unwrap();
        let b = gauss_rule(&pq, 7, Domain::Unit, p(bits)).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
    }

    #[test]
    fn symmetric_domain_requires_unit_weight() {
        let bits = 128;
        let pq = JacobiParams::ints(0, 1, p(bits)).unwrap();
        assert!(gauss_rule(&pq, 3, Domain::Symmetric, p(bits)).is_err());
    }
}
