//! Problem statement for a linear system of fractional differential
//! equations with rational Caputo orders: the data both the spectral solver
//! and the local series expansion consume.

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::fracops::RationalOrder;
use crate::kernel::complex::Cx;
use crate::kernel::precision::Precision;
use crate::kernel::real::Real;
use crate::muntz::MuntzGrid;

/// Right-hand sides: either given directly, or derived from prescribed
/// exact solutions (the forcing is then whatever makes them solve the
/// system, which pins the true error of a run).
#[derive(Clone, Debug)]
pub enum Forcings {
    Explicit(Vec<Expr>),
    FromExact(Vec<Expr>),
}

impl Forcings {
    fn len(&self) -> usize {
        match self {
            Forcings::Explicit(v) | Forcings::FromExact(v) => v.len(),
        }
    }

    fn exprs(&self) -> &[Expr] {
        match self {
            Forcings::Explicit(v) | Forcings::FromExact(v) => v,
        }
    }
}

/// D^(theta_j) v_j = sum_r p_(j,r) v_r + p_(j,n+1) on [0, T], with
/// initial data v_j^(k)(0) for k < ceil(theta_j). The grid denominator is
/// the lcm of every order denominator and every exponent denominator in
/// the coefficient expressions, so all series live on one lattice.
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    orders: Vec<RationalOrder>,
    couplings: Vec<Vec<Expr>>,
    forcings: Forcings,
    initial: Vec<Vec<Cx>>,
    horizon: Real,
    grid: MuntzGrid,
}

const MAX_GRID_Q: i64 = 4096;

impl ProblemSpec {
    pub fn new(
        orders: Vec<RationalOrder>,
        couplings: Vec<Vec<Expr>>,
        forcings: Forcings,
        initial: Vec<Vec<Cx>>,
        horizon: Real,
    ) -> Result<Self> {
        let n = orders.len();
        if n == 0 {
            return Err(Error::validation("orders", "at least one equation"));
        }
        if couplings.len() != n || couplings.iter().any(|row| row.len() != n) {
            return Err(Error::validation("couplings", "must be an n-by-n grid"));
        }
        if forcings.len() != n {
            return Err(Error::validation("forcings", "one per equation"));
        }
        if initial.len() != n {
            return Err(Error::validation("initial", "one list per equation"));
        }
        for (j, (theta, vals)) in orders.iter().zip(&initial).enumerate() {
            if vals.len() != theta.ceil() as usize {
                return Err(Error::validation(
                    "initial",
                    format!("equation {j} needs exactly ceil({theta}) values"),
                ));
            }
        }
        if !horizon.is_positive() || !horizon.is_finite() {
            return Err(Error::validation("T", "horizon must be positive"));
        }
        let mut q: i64 = 1;
        let mut fold = |d: i64| -> Result<()> {
            let g = q.gcd(&d);
            q = (q / g)
                .checked_mul(d)
                .filter(|v| *v <= MAX_GRID_Q)
                .ok_or_else(|| Error::validation("grid", "lattice denominator too large"))?;
            Ok(())
        };
        for theta in &orders {
            fold(theta.denom())?;
        }
        for e in couplings.iter().flatten().chain(forcings.exprs()) {
            let d = e
                .exponent_denominator()
                .ok_or_else(|| Error::validation("grid", "exponent denominator overflows"))?;
            fold(d)?;
        }
        // q >= 2: every order contributes a denominator >= 2
        let grid = MuntzGrid::new(q as u32)?;
        Ok(ProblemSpec { orders, couplings, forcings, initial, horizon, grid })
    }

    pub fn n(&self) -> usize {
        self.orders.len()
    }

    pub fn orders(&self) -> &[RationalOrder] {
        &self.orders
    }

    pub fn grid(&self) -> MuntzGrid {
        self.grid
    }

    pub fn coupling(&self, j: usize, r: usize) -> &Expr {
        &self.couplings[j][r]
    }

    pub fn forcings(&self) -> &Forcings {
        &self.forcings
    }

    /// Prescribed exact solutions, when the forcings are derived.
    pub fn exact(&self) -> Option<&[Expr]> {
        match &self.forcings {
            Forcings::FromExact(v) => Some(v),
            Forcings::Explicit(_) => None,
        }
    }

    pub fn horizon(&self, p: Precision) -> Real {
        self.horizon.round_to(p)
    }

    /// v_j^(k)(0) rounded to the working precision.
    pub fn initial_value(&self, j: usize, k: usize, p: Precision) -> Cx {
        let v = &self.initial[j][k];
        Cx::new(v.re.round_to(p), v.im.round_to(p))
    }

    /// Taylor coefficients v_j^(k)(0)/k! of the initial polynomial, in the
    /// unscaled time variable.
    pub fn psi_taylor(&self, j: usize, p: Precision) -> Vec<Cx> {
        (0..self.initial[j].len())
            .map(|k| {
                self.initial_value(j, k, p)
                    .scale(&crate::kernel::gamma::factorial(k as u64, p).recip())
            })
            .collect()
    }
}
