//! The solver proper. The system is moved to [0,1], coefficient functions
//! are expanded on the exponent lattice, and the Volterra form of each
//! equation turns into an upper-triangular band relation on monomial
//! coefficients that a single forward sweep resolves. A lower-triangular
//! change of basis then yields coefficients in the orthogonal basis, which
//! is the only representation ever evaluated.

use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::expr::{expand, Expr};
use crate::fracops::{q_matrix, FracCoeffs, ShiftMatrix};
use crate::kernel::complex::Cx;
use crate::kernel::precision::Precision;
use crate::kernel::real::Real;
use crate::muntz::{
    conversion_table, from_monomial, project, to_monomial, BasisVector, ConversionTable,
    MuntzGrid, MuntzSeries,
};
use crate::oracle::manufacture_forcing;
use crate::problem::{Forcings, ProblemSpec};

/// Problem data rescaled to the unit interval: with u = t/T the unknowns
/// w_j(u) = v_j(Tu) satisfy the same system with coefficient functions
/// read at Tu and a T^(theta_j) factor on each integral operator.
pub struct TransformedProblem<'a> {
    spec: &'a ProblemSpec,
    prec: Precision,
    horizon: Real,
    prefactors: Vec<Real>,
    psi: Vec<Vec<Cx>>,
}

impl TransformedProblem<'_> {
    pub fn horizon(&self) -> &Real {
        &self.horizon
    }

    /// T^(theta_j).
    pub fn prefactor(&self, j: usize) -> &Real {
        &self.prefactors[j]
    }

    /// Monomial coefficients of the rescaled Taylor head: value
    /// v_j^(k)(0) T^k / k! sits at lattice index k q.
    pub fn psi_row(&self, j: usize) -> &[Cx] {
        &self.psi[j]
    }

    /// Coupling p_(j,r) read at t = T u.
    pub fn coupling_value(&self, j: usize, r: usize, u: &Real) -> Result<Cx> {
        self.spec.coupling(j, r).eval(&(&self.horizon * u))
    }

    /// Forcing p_(j,n+1) read at t = T u; only available when the forcing
    /// is given in closed form.
    pub fn forcing_value(&self, j: usize, u: &Real) -> Result<Cx> {
        match self.spec.forcings() {
            Forcings::Explicit(exprs) => exprs[j].eval(&(&self.horizon * u)),
            Forcings::FromExact(_) => Err(Error::validation(
                "forcing",
                "derived forcings have no pointwise closed form",
            )),
        }
    }

    pub fn prec(&self) -> Precision {
        self.prec
    }
}

pub fn transform_problem(spec: &ProblemSpec, p: Precision) -> Result<TransformedProblem<'_>> {
    let horizon = spec.horizon(p);
    let q = spec.grid().q() as usize;
    let mut prefactors = Vec::with_capacity(spec.n());
    let mut psi = Vec::with_capacity(spec.n());
    for (j, theta) in spec.orders().iter().enumerate() {
        prefactors.push(horizon.pow_ratio(theta.numer(), theta.denom())?);
        let head = spec.psi_taylor(j, p);
        let mut row = vec![Cx::zero(p); (head.len() - 1) * q + 1];
        for (k, v) in head.iter().enumerate() {
            row[k * q] = v.scale(&horizon.powi(k as u64));
        }
        psi.push(row);
    }
    Ok(TransformedProblem { spec, prec: p, horizon, prefactors, psi })
}

/// Monomial row of the degree-N projection of an evaluable function on
/// [0,1]: orthogonal projection first, then the triangular change of
/// basis.
pub fn project_coefficients(
    grid: MuntzGrid,
    n: usize,
    p: Precision,
    f: impl FnMut(&Real) -> Result<Cx>,
) -> Result<Vec<Cx>> {
    let bv = project(grid, n, p, f)?;
    Ok(to_monomial(&bv)?.coeffs().to_vec())
}

/// Everything the recurrence needs, assembled once per (problem, N). The
/// operator blocks are never stored dense: entry (k, l) of block (j, r)
/// is prefactor_j times coupling coefficient l-k-d_j times a column
/// factor shared along the antidiagonal, so one coefficient row and one
/// factor table per equation reproduce the whole block.
pub struct AssembledSystem<'a> {
    spec: &'a ProblemSpec,
    degree: usize,
    prec: Precision,
    shifts: Vec<usize>,
    prefactors: Vec<Real>,
    psi: Vec<Vec<Cx>>,
    vartheta: Vec<Vec<Real>>,
    couplings: Vec<Vec<Vec<Cx>>>,
    forcing: Vec<Vec<Cx>>,
    q_mats: Vec<ShiftMatrix>,
    rhs: Vec<Vec<Cx>>,
    table: Arc<ConversionTable>,
}

impl<'a> AssembledSystem<'a> {
    pub fn spec(&self) -> &'a ProblemSpec {
        self.spec
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn prec(&self) -> Precision {
        self.prec
    }

    /// Lattice steps d_j the j-th derivative shifts by.
    pub fn shift(&self, j: usize) -> usize {
        self.shifts[j]
    }

    pub fn prefactor(&self, j: usize) -> &Real {
        &self.prefactors[j]
    }

    /// Monomial row of the coupling p_(j,r) on [0,1].
    pub fn coupling_row(&self, j: usize, r: usize) -> &[Cx] {
        &self.couplings[j][r]
    }

    /// Monomial row of the forcing on [0,1], expanded or derived.
    pub fn forcing_row(&self, j: usize) -> &[Cx] {
        &self.forcing[j]
    }

    pub fn psi_row(&self, j: usize) -> &[Cx] {
        &self.psi[j]
    }

    /// Right-hand row P_j.
    pub fn rhs_row(&self, j: usize) -> &[Cx] {
        &self.rhs[j]
    }

    pub fn q_matrix_of(&self, j: usize) -> &ShiftMatrix {
        &self.q_mats[j]
    }

    pub fn conversion(&self) -> &ConversionTable {
        &self.table
    }

    /// Entry (k, l) of operator block (j, r); zero on and below the band
    /// edge k = l - d_j.
    pub fn operator_entry(&self, j: usize, r: usize, k: usize, l: usize) -> Cx {
        let d = self.shifts[j];
        if k > self.degree || l > self.degree || k + d > l {
            return Cx::zero(self.prec);
        }
        let col = &self.prefactors[j] * &self.vartheta[j][l - d];
        self.couplings[j][r][l - k - d].scale(&col)
    }
}

pub fn assemble<'a>(
    spec: &'a ProblemSpec,
    degree: usize,
    p: Precision,
) -> Result<AssembledSystem<'a>> {
    let grid = spec.grid();
    let n = spec.n();
    let mut shifts = Vec::with_capacity(n);
    for theta in spec.orders() {
        shifts.push(theta.shift_on(grid)?);
    }
    let dmax = *shifts.iter().max().expect("at least one equation");
    if degree < dmax {
        return Err(Error::TruncationTooSmall(format!(
            "degree {degree} is below the largest derivative shift {dmax}"
        )));
    }
    let tp = transform_problem(spec, p)?;

    // Coefficient rows live on [0,1]: the series of p(t) picks up T^(m/q)
    // at index m under t = Tu. Expansion coefficients, not a finite-degree
    // best approximation; the recurrence amplifies any defect in the high
    // rows through the fundamental-solution hump, so the rows must decay
    // the way the function's own series does.
    let root = tp.horizon.pow_ratio(1, grid.q() as i64)?;
    let mut tpow = Vec::with_capacity(degree + 1);
    tpow.push(Real::one(p));
    for m in 1..=degree {
        tpow.push(&tpow[m - 1] * &root);
    }
    let series_row = |e: &Expr| -> Result<Vec<Cx>> {
        if e.is_zero_literal() {
            return Ok(vec![Cx::zero(p); degree + 1]);
        }
        let s = expand(e, grid, degree, p)?;
        Ok((0..=degree)
            .map(|m| match s.coeff(m) {
                Some(c) if !c.is_zero() => c.scale(&tpow[m]),
                _ => Cx::zero(p),
            })
            .collect())
    };

    let pairs: Vec<(usize, usize)> =
        (0..n).flat_map(|j| (0..n).map(move |r| (j, r))).collect();
    let rows: Vec<Vec<Cx>> = pairs
        .par_iter()
        .map(|&(j, r)| series_row(spec.coupling(j, r)))
        .collect::<Result<_>>()?;
    let mut couplings: Vec<Vec<Vec<Cx>>> = Vec::with_capacity(n);
    let mut it = rows.into_iter();
    for _ in 0..n {
        couplings.push(it.by_ref().take(n).collect());
    }

    let forcing: Vec<Vec<Cx>> = match spec.forcings() {
        Forcings::Explicit(exprs) => {
            exprs.par_iter().map(|e| series_row(e)).collect::<Result<_>>()?
        }
        Forcings::FromExact(exact_exprs) => {
            // Derive the forcing as a series in t through lattice order N;
            // the derivative needs the prescribed solutions d_j steps past
            // that. Index m then picks up T^(m/q) on the way to [0,1].
            let ext = degree + dmax;
            let mut exact = Vec::with_capacity(n);
            for e in exact_exprs {
                exact.push(expand(e, grid, ext, p)?);
            }
            let mut cps = Vec::with_capacity(n);
            for j in 0..n {
                let mut row = Vec::with_capacity(n);
                for r in 0..n {
                    row.push(expand(spec.coupling(j, r), grid, ext, p)?);
                }
                cps.push(row);
            }
            let rows_t = manufacture_forcing(spec.orders(), &exact, &cps)?;
            rows_t
                .iter()
                .map(|s| {
                    (0..=degree)
                        .map(|m| match s.coeff(m) {
                            Some(c) if !c.is_zero() => c.scale(&tpow[m]),
                            _ => Cx::zero(p),
                        })
                        .collect()
                })
                .collect()
        }
    };

    let mut vartheta = Vec::with_capacity(n);
    let mut q_mats = Vec::with_capacity(n);
    for (theta, &d) in spec.orders().iter().zip(&shifts) {
        vartheta.push(FracCoeffs::new(*theta, grid, p)?.vartheta_table(degree + 1 - d)?);
        q_mats.push(q_matrix(theta, grid, degree, p)?);
    }

    let TransformedProblem { prefactors, psi, .. } = tp;
    let mut psi_rows = Vec::with_capacity(n);
    let mut rhs = Vec::with_capacity(n);
    for j in 0..n {
        let mut padded = vec![Cx::zero(p); degree + 1];
        for (idx, v) in psi[j].iter().enumerate() {
            padded[idx] = v.clone();
        }
        let applied = q_mats[j].apply(&forcing[j])?;
        let mut row = padded.clone();
        for (l, v) in applied.iter().enumerate() {
            if !v.is_zero() {
                row[l] = &row[l] + &v.scale(&prefactors[j]);
            }
        }
        psi_rows.push(padded);
        rhs.push(row);
    }

    let table = conversion_table(grid, degree, p)?;
    Ok(AssembledSystem {
        spec,
        degree,
        prec: p,
        shifts,
        prefactors,
        psi: psi_rows,
        vartheta,
        couplings,
        forcing,
        q_mats,
        rhs,
        table,
    })
}

/// Forward sweep producing the monomial rows. Column l of every block
/// only reads rows k <= l - d_j, so walking l upward and visiting each
/// equation at every l resolves all dependencies; no linear system is
/// formed and the cost is one band convolution per (equation, column).
pub fn recurrence_solve(sys: &AssembledSystem) -> Vec<Vec<Cx>> {
    let n = sys.spec.n();
    let deg = sys.degree;
    let p = sys.prec;
    let colfac: Vec<Vec<Real>> = (0..n)
        .map(|j| sys.vartheta[j].iter().map(|v| v * &sys.prefactors[j]).collect())
        .collect();
    let mut rows = vec![vec![Cx::zero(p); deg + 1]; n];
    for l in 0..=deg {
        for j in 0..n {
            let d = sys.shifts[j];
            if l < d {
                rows[j][l] = sys.rhs[j][l].clone();
                continue;
            }
            let src = l - d;
            let mut acc = Cx::zero(p);
            for (r, row) in rows.iter().enumerate() {
                let hat = &sys.couplings[j][r];
                for (k, c) in row.iter().take(src + 1).enumerate() {
                    let b = &hat[src - k];
                    if c.is_zero() || b.is_zero() {
                        continue;
                    }
                    acc = acc + c * b;
                }
            }
            let val = if acc.is_zero() {
                sys.rhs[j][l].clone()
            } else {
                &sys.rhs[j][l] + &acc.scale(&colfac[j][src])
            };
            rows[j][l] = val;
        }
    }
    rows
}

/// Solution in both representations. Evaluation always goes through the
/// orthogonal basis and its three-term recurrence; the monomial rows are
/// kept for diagnostics and residual checks.
pub struct GalerkinSolution<'a> {
    spec: &'a ProblemSpec,
    degree: usize,
    prec: Precision,
    basis: Vec<BasisVector>,
    monomial: Vec<Vec<Cx>>,
    wall: Duration,
}

impl<'a> GalerkinSolution<'a> {
    pub fn spec(&self) -> &'a ProblemSpec {
        self.spec
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn prec(&self) -> Precision {
        self.prec
    }

    pub fn basis(&self, j: usize) -> &BasisVector {
        &self.basis[j]
    }

    pub fn monomial_row(&self, j: usize) -> &[Cx] {
        &self.monomial[j]
    }

    pub fn wall(&self) -> Duration {
        self.wall
    }

    /// Value of component j at t in [0, T].
    pub fn evaluate(&self, j: usize, t: &Real) -> Result<Cx> {
        let wp = self.prec.min(t.prec());
        let horizon = self.spec.horizon(t.prec());
        if t.is_negative() || *t > horizon {
            return Err(Error::domain("evaluate", "time outside the solution interval"));
        }
        let u = &t.round_to(wp) / &horizon.round_to(wp);
        self.basis[j].eval(&u)
    }
}

pub fn back_substitute<'a>(
    sys: &AssembledSystem<'a>,
    rows: Vec<Vec<Cx>>,
) -> Result<GalerkinSolution<'a>> {
    let started = Instant::now();
    let grid = sys.spec.grid();
    let mut basis = Vec::with_capacity(rows.len());
    for row in &rows {
        basis.push(from_monomial(&MuntzSeries::from_coeffs(grid, row.clone()))?);
    }
    Ok(GalerkinSolution {
        spec: sys.spec,
        degree: sys.degree,
        prec: sys.prec,
        basis,
        monomial: rows,
        wall: started.elapsed(),
    })
}

/// Assemble, sweep, change basis; the recorded wall time covers all
/// three stages.
pub fn solve<'a>(
    spec: &'a ProblemSpec,
    degree: usize,
    p: Precision,
) -> Result<GalerkinSolution<'a>> {
    let started = Instant::now();
    let sys = assemble(spec, degree, p)?;
    let rows = recurrence_solve(&sys);
    let mut sol = back_substitute(&sys, rows)?;
    sol.wall = started.elapsed();
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::fracops::{frac_integral_truncated, RationalOrder};
    use crate::oracle::series_solve;

    fn p(bits: u32) -> Precision {
        Precision::new(bits).unwrap()
    }

    fn close(a: &Real, b: &Real, shift: i64) -> bool {
        let d = (a - b).abs();
        if d.is_zero() {
            return true;
        }
        let scale = a.abs().max_by_abs(&b.abs()).log2_bound().unwrap_or(0);
        d.log2_bound().unwrap_or(i64::MIN) <= scale - shift
    }

    fn close_cx(a: &Cx, b: &Cx, shift: i64) -> bool {
        let d = (a - b).abs();
        if d.is_zero() {
            return true;
        }
        let scale = a.abs().max_by_abs(&b.abs()).log2_bound().unwrap_or(0);
        d.log2_bound().unwrap_or(i64::MIN) <= scale - shift
    }

    fn scalar_spec(
        order: (i64, i64),
        coupling: &str,
        forcing: &str,
        v0: i64,
        horizon: Real,
        bits: u32,
    ) -> ProblemSpec {
        let ceil = (order.0 + order.1 - 1) / order.1;
        let init = (0..ceil)
            .map(|k| {
                if k == 0 {
                    Cx::from_real(Real::from_i64(v0, p(bits)))
                } else {
                    Cx::zero(p(bits))
                }
            })
            .collect();
        ProblemSpec::new(
            vec![RationalOrder::new(order.0, order.1).unwrap()],
            vec![vec![parse(coupling).unwrap()]],
            Forcings::Explicit(vec![parse(forcing).unwrap()]),
            vec![init],
            horizon,
        )
        .unwrap()
    }

    #[test]
    fn unit_horizon_transform_is_identity() {
        let bits = 128;
        let spec = scalar_spec((1, 2), "t", "1", 3, Real::one(p(bits)), bits);
        let tp = transform_problem(&spec, p(bits)).unwrap();
        assert!(*tp.prefactor(0) == Real::one(p(bits)));
        assert_eq!(tp.psi_row(0).len(), 1);
        assert!(tp.psi_row(0)[0].re == Real::from_u64(3, p(bits)));
        let u = Real::from_f64(0.37, p(bits));
        assert!(tp.coupling_value(0, 0, &u).unwrap().re == u);
    }

    #[test]
    fn taylor_head_picks_up_horizon_powers() {
        let bits = 128;
        let spec = ProblemSpec::new(
            vec![RationalOrder::new(3, 2).unwrap()],
            vec![vec![parse("0").unwrap()]],
            Forcings::Explicit(vec![parse("0").unwrap()]),
            vec![vec![
                Cx::from_real(Real::one(p(bits))),
                Cx::from_real(Real::from_u64(2, p(bits))),
            ]],
            Real::from_u64(3, p(bits)),
        )
        .unwrap();
        let tp = transform_problem(&spec, p(bits)).unwrap();
        let row = tp.psi_row(0);
        assert_eq!(row.len(), 3);
        assert!(row[0].re == Real::one(p(bits)));
        assert!(row[1].is_zero());
        assert!(row[2].re == Real::from_u64(6, p(bits)));
    }

    #[test]
    fn prefactors_match_root_chains() {
        let bits = 256;
        let t = &Real::pi(p(bits)) * &Real::from_ratio(3, 2, p(bits)).unwrap();
        let spec = ProblemSpec::new(
            vec![RationalOrder::new(1, 2).unwrap(), RationalOrder::new(3, 2).unwrap()],
            vec![
                vec![parse("0").unwrap(), parse("0").unwrap()],
                vec![parse("0").unwrap(), parse("0").unwrap()],
            ],
            Forcings::Explicit(vec![parse("0").unwrap(), parse("0").unwrap()]),
            vec![vec![Cx::zero(p(bits))], vec![Cx::zero(p(bits)), Cx::zero(p(bits))]],
            t.clone(),
        )
        .unwrap();
        let tp = transform_problem(&spec, p(bits)).unwrap();
        let root = t.sqrt().unwrap();
        assert!(close(tp.prefactor(0), &root, bits as i64 - 8));
        assert!(close(tp.prefactor(1), &(&t * &root), bits as i64 - 8));
    }

    #[test]
    fn projection_places_polynomials_exactly() {
        let bits = 192;
        let grid = MuntzGrid::new(2).unwrap();
        let one = |_: &Real| Ok(Cx::one(p(bits)));
        let row = project_coefficients(grid, 4, p(bits), one).unwrap();
        assert!(close(&row[0].re, &Real::one(p(bits)), bits as i64 - 16));
        for c in &row[1..] {
            assert!(c.abs().log2_bound().unwrap_or(i64::MIN) < 16 - bits as i64);
        }
        let sqrt = |u: &Real| Ok(Cx::from_real(u.pow_ratio(1, 2)?));
        let row = project_coefficients(grid, 4, p(bits), sqrt).unwrap();
        assert!(close(&row[1].re, &Real::one(p(bits)), bits as i64 - 16));
        for (i, c) in row.iter().enumerate() {
            if i != 1 {
                assert!(c.abs().log2_bound().unwrap_or(i64::MIN) < 16 - bits as i64);
            }
            assert!(c.im.is_zero());
        }
        let linear = |u: &Real| Ok(Cx::from_real(u.ldexp(1)));
        let row = project_coefficients(grid, 4, p(bits), linear).unwrap();
        assert!(close(&row[2].re, &Real::from_u64(2, p(bits)), bits as i64 - 16));
    }

    #[test]
    fn assembly_matches_hand_entries() {
        let bits = 256;
        let spec = scalar_spec((1, 2), "1", "1", 0, Real::one(p(bits)), bits);
        let sys = assemble(&spec, 4, p(bits)).unwrap();
        let spi = Real::pi(p(bits)).sqrt().unwrap();
        let a01 = sys.operator_entry(0, 0, 0, 1);
        assert!(close(&a01.re, &spi.recip().ldexp(1), bits as i64 - 12));
        let a12 = sys.operator_entry(0, 0, 1, 2);
        assert!(close(&a12.re, &spi.ldexp(-1), bits as i64 - 12));
        assert!(sys.operator_entry(0, 0, 0, 2).abs().log2_bound().unwrap_or(i64::MIN)
            < 16 - bits as i64);
        for l in 0..=4usize {
            for k in l.saturating_sub(sys.shift(0)) + 1..=4 {
                assert!(sys.operator_entry(0, 0, k, l).is_zero());
            }
        }

        let zero = scalar_spec((1, 2), "0", "1", 0, Real::one(p(bits)), bits);
        let zsys = assemble(&zero, 4, p(bits)).unwrap();
        for k in 0..=4 {
            for l in 0..=4 {
                assert!(zsys.operator_entry(0, 0, k, l).is_zero());
            }
        }

        let relax = scalar_spec((1, 2), "-1", "1", 10, Real::one(p(bits)), bits);
        let rsys = assemble(&relax, 4, p(bits)).unwrap();
        assert!(rsys.rhs_row(0)[0].re == Real::from_u64(10, p(bits)));
        assert!(close(&rsys.rhs_row(0)[1].re, &spi.recip().ldexp(1), bits as i64 - 12));
        for l in 2..=4 {
            assert!(rsys.rhs_row(0)[l].abs().log2_bound().unwrap_or(i64::MIN)
                < 16 - bits as i64);
        }
        let neg = rsys.operator_entry(0, 0, 0, 1);
        assert!(close(&(-&neg.re), &a01.re, bits as i64 - 12));
        assert!(rsys.rhs_row(0)[0] == rsys.psi_row(0)[0]);
    }

    #[test]
    fn recurrence_matches_relaxation_coefficients() {
        let bits = 256;
        let shift = bits as i64 - 24 - 12;
        let spec = scalar_spec((1, 2), "-1", "1", 10, Real::one(p(bits)), bits);
        let sys = assemble(&spec, 6, p(bits)).unwrap();
        let rows = recurrence_solve(&sys);
        let spi = Real::pi(p(bits)).sqrt().unwrap();
        let inv = spi.recip();
        assert!(rows[0][0].re == Real::from_u64(10, p(bits)));
        let want1 = -&(&inv * &Real::from_u64(18, p(bits)));
        assert!(close(&rows[0][1].re, &want1, shift));
        assert!(close(&rows[0][2].re, &Real::from_u64(9, p(bits)), shift));
        let want3 = -&(&inv * &Real::from_u64(12, p(bits)));
        assert!(close(&rows[0][3].re, &want3, shift));
        assert!(close(&rows[0][4].re, &Real::from_ratio(9, 2, p(bits)).unwrap(), shift));

        let pure = scalar_spec((1, 2), "0", "1", 0, Real::one(p(bits)), bits);
        let rows = recurrence_solve(&assemble(&pure, 4, p(bits)).unwrap());
        assert!(close(&rows[0][1].re, &inv.ldexp(1), bits as i64 - 12));
        for mu in [0usize, 2, 3, 4] {
            assert!(rows[0][mu].abs().log2_bound().unwrap_or(i64::MIN) < 16 - bits as i64);
        }

        let nothing = scalar_spec((1, 2), "0", "0", 0, Real::one(p(bits)), bits);
        let rows = recurrence_solve(&assemble(&nothing, 4, p(bits)).unwrap());
        assert!(rows[0].iter().all(Cx::is_zero));
    }

    #[test]
    fn recurrence_agrees_with_series_expansion_on_unit_horizon() {
        // On T = 1 with a coupling the basis represents exactly, the sweep
        // and the local expansion compute the same coefficients.
        let bits = 192;
        let deg = 12usize;
        // tolerance widens with the degree for the same reason as above
        let shift = bits as i64 - 24 - 2 * deg as i64;
        let spec = scalar_spec((1, 3), "t^(1/3)", "1", 2, Real::one(p(bits)), bits);
        let sys = assemble(&spec, deg, p(bits)).unwrap();
        let rows = recurrence_solve(&sys);
        let sol = series_solve(&spec, deg, p(bits)).unwrap();
        for mu in 0..=deg {
            let want = &sol.series(0).coeffs()[mu];
            let got = &rows[0][mu];
            if want.is_zero() {
                assert!(got.abs().log2_bound().unwrap_or(i64::MIN) < -shift, "{mu}");
            } else {
                assert!(close_cx(got, want, shift), "{mu}");
            }
        }
    }

    #[test]
    fn manufactured_scalar_reproduces_exact_solution() {
        let bits = 256;
        let spec = ProblemSpec::new(
            vec![RationalOrder::new(1, 2).unwrap()],
            vec![vec![parse("-1").unwrap()]],
            Forcings::FromExact(vec![parse("t^(3/2)").unwrap()]),
            vec![vec![Cx::zero(p(bits))]],
            Real::one(p(bits)),
        )
        .unwrap();
        let sol = solve(&spec, 3, p(bits)).unwrap();
        let c = sol.monomial_row(0);
        for mu in 0..3 {
            assert!(c[mu].abs().log2_bound().unwrap_or(i64::MIN) < 24 - bits as i64);
        }
        assert!(close(&c[3].re, &Real::one(p(bits)), bits as i64 - 16));
        let half = Real::from_ratio(1, 2, p(bits)).unwrap();
        let got = sol.evaluate(0, &half).unwrap();
        let want = half.pow_ratio(3, 2).unwrap();
        assert!(close(&got.re, &want, bits as i64 - 24));
        assert!(got.im.abs().log2_bound().unwrap_or(i64::MIN) < 24 - bits as i64);
        let zero = sol.evaluate(0, &Real::zero(p(bits))).unwrap();
        assert!(zero.abs().log2_bound().unwrap_or(i64::MIN) < 16 - bits as i64);
        assert!(sol.wall() >= Duration::ZERO);
    }

    #[test]
    fn back_substitution_matches_triangular_solve() {
        let bits = 256;
        let pure = scalar_spec((1, 2), "0", "1", 0, Real::one(p(bits)), bits);
        let sol = solve(&pure, 1, p(bits)).unwrap();
        let spi = Real::pi(p(bits)).sqrt().unwrap();
        let c = sol.basis(0).coeffs();
        let want0 = &Real::from_ratio(4, 3, p(bits)).unwrap() / &spi;
        let want1 = &Real::from_ratio(2, 3, p(bits)).unwrap() / &spi;
        assert!(close(&c[0].re, &want0, bits as i64 - 16));
        assert!(close(&c[1].re, &want1, bits as i64 - 16));

        let still = scalar_spec((1, 2), "0", "0", 1, Real::one(p(bits)), bits);
        let sol = solve(&still, 3, p(bits)).unwrap();
        let c = sol.basis(0).coeffs();
        assert!(c[0].re == Real::one(p(bits)));
        for v in &c[1..] {
            assert!(v.is_zero());
        }
    }

    #[test]
    fn basis_and_monomial_rows_stay_consistent() {
        let bits = 192;
        let spec = scalar_spec((1, 2), "-1", "1", 10, Real::one(p(bits)), bits);
        let sol = solve(&spec, 10, p(bits)).unwrap();
        let back = to_monomial(sol.basis(0)).unwrap();
        let mag = sol
            .monomial_row(0)
            .iter()
            .map(|c| c.abs().log2_bound().unwrap_or(i64::MIN))
            .max()
            .unwrap();
        for (a, b) in back.coeffs().iter().zip(sol.monomial_row(0)) {
            let d = (a - b).abs();
            assert!(d.log2_bound().unwrap_or(i64::MIN) <= mag + 24 - bits as i64);
        }
    }

    #[test]
    fn initial_values_are_reproduced_at_zero() {
        let bits = 256;
        let spec = ProblemSpec::new(
            vec![RationalOrder::new(1, 2).unwrap(), RationalOrder::new(3, 2).unwrap()],
            vec![
                vec![parse("1").unwrap(), parse("t").unwrap()],
                vec![parse("-1").unwrap(), parse("1").unwrap()],
            ],
            Forcings::Explicit(vec![parse("1").unwrap(), parse("0").unwrap()]),
            vec![
                vec![Cx::new(
                    Real::from_u64(2, p(bits)),
                    Real::from_i64(-1, p(bits)),
                )],
                vec![Cx::one(p(bits)), Cx::from_real(Real::from_u64(2, p(bits)))],
            ],
            Real::from_u64(2, p(bits)),
        )
        .unwrap();
        let sol = solve(&spec, 8, p(bits)).unwrap();
        let v0 = sol.evaluate(0, &Real::zero(p(bits))).unwrap();
        let d0 = (&v0 - &Cx::new(Real::from_u64(2, p(bits)), Real::from_i64(-1, p(bits)))).abs();
        assert!(d0.log2_bound().unwrap_or(i64::MIN) < 16 - bits as i64);
        let v1 = sol.evaluate(1, &Real::zero(p(bits))).unwrap();
        let d1 = (&v1 - &Cx::one(p(bits))).abs();
        assert!(d1.log2_bound().unwrap_or(i64::MIN) < 16 - bits as i64);
    }

    #[test]
    fn horizon_scaling_matches_prescaled_problem() {
        let bits = 256;
        let four = Real::from_u64(4, p(bits));
        let long = scalar_spec((1, 2), "t^(1/2)", "1", 1, four, bits);
        let short = scalar_spec((1, 2), "4*t^(1/2)", "2", 1, Real::one(p(bits)), bits);
        let a = solve(&long, 10, p(bits)).unwrap();
        let b = solve(&short, 10, p(bits)).unwrap();
        for (x, y) in a.monomial_row(0).iter().zip(b.monomial_row(0)) {
            assert!(close_cx(x, y, bits as i64 - 24));
        }
        let t = Real::one(p(bits));
        let quarter = Real::from_ratio(1, 4, p(bits)).unwrap();
        let va = a.evaluate(0, &t).unwrap();
        let vb = b.evaluate(0, &quarter).unwrap();
        assert!(close_cx(&va, &vb, bits as i64 - 24));
    }

    #[test]
    fn volterra_residual_vanishes_on_retained_modes() {
        let bits = 256;
        let deg = 12usize;
        let spec = scalar_spec((1, 2), "sin(t)", "exp(t)", 1, Real::one(p(bits)), bits);
        let sys = assemble(&spec, deg, p(bits)).unwrap();
        let rows = recurrence_solve(&sys);
        let grid = spec.grid();
        let v = MuntzSeries::from_coeffs(grid, rows[0].clone());
        let hat = MuntzSeries::from_coeffs(grid, sys.coupling_row(0, 0).to_vec());
        let f = MuntzSeries::from_coeffs(grid, sys.forcing_row(0).to_vec());
        let theta = spec.orders()[0];
        let inner = hat.mul(&v).unwrap().truncated(deg).add(&f).unwrap();
        let integrated = frac_integral_truncated(theta.ratio(), &inner, deg).unwrap();
        let scaled = integrated.scale(&Cx::from_real(sys.prefactor(0).clone()));
        let psi = MuntzSeries::from_coeffs(grid, sys.psi_row(0).to_vec());
        let residual = v.add(&psi.neg()).unwrap().add(&scaled.neg()).unwrap();
        let mag = rows[0]
            .iter()
            .map(|c| c.abs().log2_bound().unwrap_or(i64::MIN))
            .max()
            .unwrap();
        for (mu, c) in residual.coeffs().iter().take(deg + 1).enumerate() {
            assert!(
                c.abs().log2_bound().unwrap_or(i64::MIN) <= mag + 24 - bits as i64,
                "{mu}"
            );
        }
    }

    #[test]
    fn degree_and_domain_guards() {
        let bits = 128;
        let spec = ProblemSpec::new(
            vec![RationalOrder::new(3, 2).unwrap()],
            vec![vec![parse("0").unwrap()]],
            Forcings::Explicit(vec![parse("1").unwrap()]),
            vec![vec![Cx::zero(p(bits)), Cx::zero(p(bits))]],
            Real::one(p(bits)),
        )
        .unwrap();
        assert!(matches!(
            assemble(&spec, 2, p(bits)),
            Err(Error::TruncationTooSmall(_))
        ));
        assert!(assemble(&spec, 3, p(bits)).is_ok());

        let sol = solve(&spec, 3, p(bits)).unwrap();
        assert!(sol.evaluate(0, &Real::from_f64(-0.1, p(bits))).is_err());
        assert!(sol.evaluate(0, &Real::from_f64(1.5, p(bits))).is_err());
    }
}
