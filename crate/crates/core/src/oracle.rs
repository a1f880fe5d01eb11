//! Local series solution near t = 0. Rewriting each equation in Volterra
//! form v_j = psi_j + I^(theta_j)(sum_r p_(j,r) v_r + p_(j,n+1)) and
//! matching powers of t^(1/q) gives a triangular recurrence: coefficient
//! mu only needs coefficients below mu - theta_j*q. Also the inverse
//! construction: given prescribed exact solutions, the forcing that makes
//! them solve the system.

use crate::error::{Error, Result};
use crate::expr::expand;
use crate::fracops::{caputo_derivative_series, FracCoeffs, RationalOrder};
use crate::kernel::complex::Cx;
use crate::kernel::precision::Precision;
use crate::kernel::real::Real;
use crate::muntz::MuntzSeries;
use crate::problem::{Forcings, ProblemSpec};

/// Truncated expansion of every solution component, the Taylor head each
/// component starts from, and an advisory validity radius.
pub struct SeriesSolution {
    series: Vec<MuntzSeries>,
    psi: Vec<Vec<Cx>>,
    truncation: usize,
    radius_hint: Real,
}

impl SeriesSolution {
    pub fn series(&self, j: usize) -> &MuntzSeries {
        &self.series[j]
    }

    pub fn all_series(&self) -> &[MuntzSeries] {
        &self.series
    }

    /// Taylor coefficients v_j^(k)(0)/k! the expansion starts from.
    pub fn psi(&self, j: usize) -> &[Cx] {
        &self.psi[j]
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// Largest t at which the tail of the expansion still looks
    /// convergent; advisory only.
    pub fn radius_hint(&self) -> &Real {
        &self.radius_hint
    }

    pub fn eval(&self, j: usize, t: &Real) -> Result<Cx> {
        self.series[j].eval(t)
    }
}

/// The forcing rows that make the prescribed `exact` series solve the
/// system: p_(j,n+1) = D^(theta_j) exact_j - sum_r p_(j,r) exact_r.
/// The prescribed solutions are read as exact Müntz polynomials, so the
/// derivative's top coefficients (past the termwise image) are zero; the
/// output truncation is the shortest contributing product.
pub fn manufacture_forcing(
    orders: &[RationalOrder],
    exact: &[MuntzSeries],
    couplings: &[Vec<MuntzSeries>],
) -> Result<Vec<MuntzSeries>> {
    let n = orders.len();
    if exact.len() != n || couplings.len() != n || couplings.iter().any(|r| r.len() != n) {
        return Err(Error::validation("manufacture", "arity mismatch"));
    }
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let mut target = usize::MAX;
        let mut products = Vec::with_capacity(n);
        for r in 0..n {
            let prod = couplings[j][r].mul(&exact[r])?;
            target = target.min(prod.truncation_order());
            products.push(prod);
        }
        let deriv = caputo_derivative_series(&orders[j], &exact[j])?;
        let mut acc = deriv.zero_extended(target.max(deriv.truncation_order()));
        for prod in &products {
            acc = acc.add(&prod.neg())?;
        }
        out.push(acc);
    }
    Ok(out)
}

/// Coefficients of the expansion of the solution through lattice order
/// `m`, at precision `p`. Coefficient functions are expanded on the
/// problem grid; manufactured forcings are derived first.
pub fn series_solve(spec: &ProblemSpec, m: usize, p: Precision) -> Result<SeriesSolution> {
    let n = spec.n();
    let grid = spec.grid();
    let q = grid.q() as usize;
    let mut shifts = Vec::with_capacity(n);
    for theta in spec.orders() {
        shifts.push(theta.shift_on(grid)?);
    }
    if let Some(&dmax) = shifts.iter().max() {
        if m < dmax {
            return Err(Error::TruncationTooSmall(format!(
                "order {m} cannot hold a shift of {dmax} lattice steps"
            )));
        }
    }

    let mut couplings = Vec::with_capacity(n);
    for j in 0..n {
        let mut row = Vec::with_capacity(n);
        for r in 0..n {
            row.push(expand(spec.coupling(j, r), grid, m, p)?);
        }
        couplings.push(row);
    }
    let forcings: Vec<MuntzSeries> = match spec.forcings() {
        Forcings::Explicit(exprs) => {
            let mut f = Vec::with_capacity(n);
            for e in exprs {
                f.push(expand(e, grid, m, p)?);
            }
            f
        }
        Forcings::FromExact(exprs) => {
            let mut exact = Vec::with_capacity(n);
            for e in exprs {
                exact.push(expand(e, grid, m, p)?);
            }
            manufacture_forcing(spec.orders(), &exact, &couplings)?
        }
    };
    for (j, f) in forcings.iter().enumerate() {
        if f.truncation_order() + shifts[j] < m {
            return Err(Error::TruncationTooSmall(format!(
                "forcing {j} is only known through lattice order {}",
                f.truncation_order()
            )));
        }
    }

    let mut factors = Vec::with_capacity(n);
    for (theta, &d) in spec.orders().iter().zip(&shifts) {
        factors.push(FracCoeffs::new(*theta, grid, p)?.vartheta_table(m + 1 - d)?);
    }

    let mut psi = Vec::with_capacity(n);
    let mut coeffs: Vec<Vec<Cx>> = vec![vec![Cx::zero(p); m + 1]; n];
    for j in 0..n {
        let head = spec.psi_taylor(j, p);
        for (k, v) in head.iter().enumerate() {
            coeffs[j][k * q] = v.clone();
        }
        psi.push(head);
    }

    for mu in 0..=m {
        for j in 0..n {
            let d = shifts[j];
            if mu < d {
                continue;
            }
            let src = mu - d;
            let mut acc = forcings[j].coeff(src).expect("length checked").clone();
            for (r, cp) in couplings[j].iter().enumerate() {
                for (m1, b) in cp.coeffs().iter().take(src + 1).enumerate() {
                    if b.is_zero() {
                        continue;
                    }
                    let v = &coeffs[r][src - m1];
                    if v.is_zero() {
                        continue;
                    }
                    acc = acc + v * b;
                }
            }
            coeffs[j][mu] = acc.scale(&factors[j][src]);
        }
    }

    let pw = p.min(Precision::bits_unchecked(128));
    let horizon = spec.horizon(pw);
    let radius_hint = tail_radius(&coeffs, q, &horizon, pw);
    let series = coeffs
        .into_iter()
        .map(|c| MuntzSeries::from_coeffs(grid, c))
        .collect();
    Ok(SeriesSolution { series, psi, truncation: m, radius_hint })
}

/// Largest t <= cap at which the last five nonzero coefficients of every
/// component still have decreasing term magnitudes |c| t^(mu/q).
fn tail_radius(coeffs: &[Vec<Cx>], q: usize, cap: &Real, p: Precision) -> Real {
    let mut radius = cap.clone();
    for row in coeffs {
        let tail: Vec<(usize, Real)> = row
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(mu, c)| (mu, c.abs().round_to(p)))
            .collect();
        let start = tail.len().saturating_sub(5);
        for w in tail[start..].windows(2) {
            let (mu_a, ref abs_a) = w[0];
            let (mu_b, ref abs_b) = w[1];
            // |a| t^(mu_a/q) >= |b| t^(mu_b/q)  <=>  t <= (|a|/|b|)^(q/(mu_b-mu_a))
            let gap = (mu_b - mu_a) as i64;
            if let Ok(bound) = (abs_a / abs_b).pow_ratio(q as i64, gap) {
                if bound < radius {
                    radius = bound;
                }
            }
        }
    }
    radius
}
