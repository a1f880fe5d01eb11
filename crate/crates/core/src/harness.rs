//! Run orchestration: problem files, the composite error norm, convergence
//! sweeps over the approximation degree, the bundled example problems, and
//! table/plot-data emission.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::expr::{parse, Expr};
use crate::fracops::RationalOrder;
use crate::galerkin::{solve, GalerkinSolution};
use crate::kernel::complex::Cx;
use crate::kernel::gamma::gamma_rational;
use crate::kernel::precision::Precision;
use crate::kernel::real::Real;
use crate::kernel::special::matrix_mittag_leffler;
use crate::oracle::{series_solve, SeriesSolution};
use crate::orthopoly::{gauss_rule, Domain, JacobiParams};
use crate::problem::{Forcings, ProblemSpec};

/// Precision at which fixture and file constants (horizons, embedded
/// coefficients, matrix entries) are stored; far above any run precision,
/// so rounding them to the working precision is the only error they carry.
const DATA_BITS: u32 = 4096;

fn data_prec() -> Precision {
    Precision::bits_unchecked(DATA_BITS)
}

/// How the truth is produced when measuring a run.
#[derive(Clone, Debug)]
pub enum Reference {
    /// Closed-form solutions, one expression per equation.
    Exact(Vec<Expr>),
    /// Local series expansion of the same problem, truncated at
    /// `factor * (degree + 1)` lattice indices of the run being measured.
    Series { factor: usize },
    /// v(t) = E_alpha(A t^alpha) v0 + c with real data, alpha = num/den.
    MittagLeffler(MlReference),
}

#[derive(Clone, Debug)]
pub struct MlReference {
    pub order: (i64, i64),
    pub matrix: Vec<Vec<Real>>,
    pub start: Vec<Real>,
    pub shift: Vec<Real>,
}

impl MlReference {
    fn values(&self, t: &Real) -> Result<Vec<Cx>> {
        let p = t.prec();
        let arg = t.pow_ratio(self.order.0, self.order.1)?;
        let scaled: Vec<Vec<Real>> = self
            .matrix
            .iter()
            .map(|row| row.iter().map(|a| &a.round_to(p) * &arg).collect())
            .collect();
        let e = matrix_mittag_leffler(self.order, &scaled)?;
        Ok((0..self.matrix.len())
            .map(|j| {
                let mut acc = self.shift[j].round_to(p);
                for (w, v) in e[j].iter().zip(&self.start) {
                    acc = &acc + &(w * &v.round_to(p));
                }
                Cx::from_real(acc)
            })
            .collect())
    }
}

/// Reference resolved against one solved run.
enum RefEval<'a> {
    Exact(&'a [Expr]),
    Series(Box<SeriesSolution>),
    Ml(&'a MlReference),
}

impl Reference {
    fn resolve(&self, spec: &ProblemSpec, degree: usize, p: Precision) -> Result<RefEval<'_>> {
        let n = spec.n();
        match self {
            Reference::Exact(exprs) => {
                if exprs.len() != n {
                    return Err(Error::validation("reference", "one expression per equation"));
                }
                Ok(RefEval::Exact(exprs))
            }
            Reference::Series { factor } => {
                let m = factor.max(&2) * (degree + 1);
                Ok(RefEval::Series(Box::new(series_solve(spec, m, p)?)))
            }
            Reference::MittagLeffler(ml) => {
                if ml.matrix.len() != n || ml.start.len() != n || ml.shift.len() != n {
                    return Err(Error::validation("reference", "dimension mismatch"));
                }
                Ok(RefEval::Ml(ml))
            }
        }
    }

    fn kind_name(&self) -> &'static str {
        match self {
            Reference::Exact(_) => "prescribed exact solutions",
            Reference::Series { .. } => "local series expansion",
            Reference::MittagLeffler(_) => "Mittag-Leffler closed form",
        }
    }
}

impl RefEval<'_> {
    fn values(&self, n: usize, t: &Real) -> Result<Vec<Cx>> {
        match self {
            RefEval::Exact(exprs) => exprs.iter().map(|e| e.eval(t)).collect(),
            RefEval::Series(s) => (0..n).map(|j| s.eval(j, t)).collect(),
            RefEval::Ml(ml) => ml.values(t),
        }
    }
}

/// E = max_j ||v_j - reference_j||, the L2 norm on [0, T] approximated by an
/// (n_quad + 1)-point Legendre-Gauss rule under t = (T/2)(x + 1):
/// ||e||^2 ~ (T/2) sum_k |e(t_k)|^2 w_k.
pub fn error_norm(sol: &GalerkinSolution, reference: &Reference, n_quad: usize) -> Result<Real> {
    let p = sol.prec();
    let n = sol.spec().n();
    let truth = reference.resolve(sol.spec(), sol.degree(), p)?;
    let rule = gauss_rule(&JacobiParams::ints(0, 0, p)?, n_quad + 1, Domain::Symmetric, p)?;
    let half = sol.spec().horizon(p).ldexp(-1);
    let one = Real::one(p);
    let node_terms: Vec<Result<Vec<Real>>> = rule
        .nodes()
        .par_iter()
        .zip(rule.weights().par_iter())
        .map(|(x, w)| {
            let t = &half * &(x + &one);
            let want = truth.values(n, &t)?;
            (0..n)
                .map(|j| {
                    let e = &sol.evaluate(j, &t)? - &want[j];
                    let a = e.abs();
                    Ok(&(&a * &a) * w)
                })
                .collect()
        })
        .collect();
    let mut sums = vec![Real::zero(p); n];
    for row in node_terms {
        for (s, v) in sums.iter_mut().zip(row?) {
            *s = &*s + &v;
        }
    }
    let mut worst = Real::zero(p);
    for s in &sums {
        worst = worst.max_by_abs(&(&half * s).sqrt()?);
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Measured(Real),
    Failed(String),
}

/// One row of a convergence sweep.
#[derive(Clone, Debug)]
pub struct ConvergenceRecord {
    pub degree: usize,
    pub outcome: Outcome,
    pub wall_seconds: f64,
    pub precision_bits: u32,
    /// Error re-measured with 4(degree + 1) quadrature points; filled only
    /// when a summary is requested, never emitted to the CSV.
    pub wide_error: Option<Real>,
}

impl ConvergenceRecord {
    pub fn error(&self) -> Option<&Real> {
        match &self.outcome {
            Outcome::Measured(e) => Some(e),
            Outcome::Failed(_) => None,
        }
    }

    pub fn failure(&self) -> Option<&str> {
        match &self.outcome {
            Outcome::Measured(_) => None,
            Outcome::Failed(m) => Some(m),
        }
    }
}

// identity is what the CSV stores; the wide re-measurement is advisory
impl PartialEq for ConvergenceRecord {
    fn eq(&self, other: &Self) -> bool {
        self.degree == other.degree
            && self.outcome == other.outcome
            && self.wall_seconds == other.wall_seconds
            && self.precision_bits == other.precision_bits
    }
}

/// A problem paired with the truth used to measure it.
#[derive(Clone, Debug)]
pub struct RunProblem {
    pub label: String,
    pub spec: ProblemSpec,
    pub reference: Reference,
}

#[derive(Clone, Copy, Debug)]
pub struct EmitFlags {
    pub csv: bool,
    pub plot: bool,
    pub summary: bool,
}

impl EmitFlags {
    pub fn all() -> Self {
        EmitFlags { csv: true, plot: true, summary: true }
    }

    pub fn none() -> Self {
        EmitFlags { csv: false, plot: false, summary: false }
    }
}

pub struct RunConfig {
    pub problem: RunProblem,
    /// Approximation degrees to sweep, strictly increasing.
    pub degrees: Vec<usize>,
    /// Overrides the degree-driven precision policy when set.
    pub bits: Option<u32>,
    pub out: Option<PathBuf>,
    pub emit: EmitFlags,
}

/// Solves the problem at every requested degree and measures each solution
/// against the configured reference. A failure at one degree becomes an
/// error row; the sweep continues. Degrees run concurrently; emission is
/// serialized at the end.
pub fn converge(cfg: &RunConfig) -> Result<Vec<ConvergenceRecord>> {
    if cfg.degrees.is_empty() {
        return Err(Error::validation("degrees", "need at least one degree"));
    }
    if cfg.degrees.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::validation("degrees", "must be strictly increasing"));
    }
    if let Some(b) = cfg.bits {
        Precision::new(b)?;
    }
    let wide = cfg.emit.summary;
    let records: Vec<ConvergenceRecord> = cfg
        .degrees
        .par_iter()
        .map(|&deg| {
            let p = match cfg.bits {
                Some(b) => Precision::bits_unchecked(b),
                None => Precision::for_degree(deg),
            };
            run_one(&cfg.problem, deg, p, wide)
        })
        .collect();
    if let Some(dir) = &cfg.out {
        emit_outputs(cfg, &records, dir)?;
    }
    Ok(records)
}

fn run_one(problem: &RunProblem, degree: usize, p: Precision, wide: bool) -> ConvergenceRecord {
    let started = Instant::now();
    let attempt = solve(&problem.spec, degree, p).and_then(|sol| {
        let wall = sol.wall().as_secs_f64();
        let e = error_norm(&sol, &problem.reference, degree)?;
        let e4 = if wide {
            Some(error_norm(&sol, &problem.reference, 4 * (degree + 1) - 1)?)
        } else {
            None
        };
        Ok((e, e4, wall))
    });
    match attempt {
        Ok((e, e4, wall)) => ConvergenceRecord {
            degree,
            outcome: Outcome::Measured(e),
            wall_seconds: wall,
            precision_bits: p.bits(),
            wide_error: e4,
        },
        Err(err) => ConvergenceRecord {
            degree,
            outcome: Outcome::Failed(sanitize(&err.to_string())),
            wall_seconds: started.elapsed().as_secs_f64(),
            precision_bits: p.bits(),
            wide_error: None,
        },
    }
}

// failure text is stored inside one CSV field
fn sanitize(msg: &str) -> String {
    msg.replace([',', '\n', '\r'], ";")
}

const CSV_HEADER: &str = "N,error,seconds,bits";

pub fn write_records_csv(records: &[ConvergenceRecord], path: &Path) -> Result<()> {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let field = match &r.outcome {
            Outcome::Measured(e) => e.to_dec_string(),
            Outcome::Failed(m) => format!("error({m})"),
        };
        let _ = writeln!(out, "{},{},{},{}", r.degree, field, r.wall_seconds, r.precision_bits);
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_records_csv(path: &Path) -> Result<Vec<ConvergenceRecord>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim_end() == CSV_HEADER => {}
        _ => return Err(Error::validation("records.csv", "missing N,error,seconds,bits header")),
    }
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |what: &str| {
            Error::validation("records.csv", format!("row {}: {what}: {line:?}", i + 2))
        };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(bad("expected 4 fields"));
        }
        let degree: usize = fields[0].parse().map_err(|_| bad("bad degree"))?;
        let wall_seconds: f64 = fields[2].parse().map_err(|_| bad("bad seconds"))?;
        let precision_bits: u32 = fields[3].parse().map_err(|_| bad("bad bits"))?;
        let p = Precision::new(precision_bits)?;
        let outcome = match fields[1].strip_prefix("error(").and_then(|s| s.strip_suffix(')')) {
            Some(msg) => Outcome::Failed(msg.to_string()),
            None => Outcome::Measured(
                Real::parse_dec(fields[1], p).map_err(|_| bad("bad error value"))?,
            ),
        };
        records.push(ConvergenceRecord {
            degree,
            outcome,
            wall_seconds,
            precision_bits,
            wide_error: None,
        });
    }
    Ok(records)
}

/// Two columns per usable row: degree and log10 of the error. Failed rows
/// and exact zeros have no finite logarithm and are skipped.
pub fn write_plot_data(records: &[ConvergenceRecord], path: &Path) -> Result<()> {
    let mut out = String::new();
    for r in records {
        if let Some(e) = r.error() {
            if let Some(l) = e.log10_abs() {
                if l.is_finite() {
                    let _ = writeln!(out, "{} {}", r.degree, l);
                }
            }
        }
    }
    fs::write(path, out)?;
    Ok(())
}

// the two quadrature resolutions disagree by more than 10%
fn discrepant(e: &Real, e4: &Real) -> bool {
    let gap = (e4 - e).abs();
    let scale = e.abs().max_by_abs(&e4.abs());
    if scale.is_zero() {
        return false;
    }
    (&gap - &(&scale / &Real::from_u64(10, scale.prec()))).is_positive()
}

pub fn render_summary(problem: &RunProblem, records: &[ConvergenceRecord]) -> String {
    let p64 = Precision::bits_unchecked(Precision::MIN_BITS);
    let spec = &problem.spec;
    let mut out = String::new();
    let _ = writeln!(out, "problem: {}", problem.label);
    let _ = writeln!(
        out,
        "equations: {}   lattice denominator: {}   horizon: {}",
        spec.n(),
        spec.grid().q(),
        spec.horizon(p64).to_display_string(10)
    );
    let _ = writeln!(out, "reference: {}", problem.reference.kind_name());
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:>6}  {:>14}  {:>10}  {:>6}  {:>14}",
        "N", "error", "seconds", "bits", "error@4(N+1)pt"
    );
    let mut flagged = false;
    for r in records {
        let err = match &r.outcome {
            Outcome::Measured(e) => e.to_display_string(6),
            Outcome::Failed(m) => format!("error({m})"),
        };
        let wide = r.wide_error.as_ref().map(|e| e.to_display_string(6)).unwrap_or_default();
        let mark = match (&r.outcome, &r.wide_error) {
            (Outcome::Measured(e), Some(e4)) if discrepant(e, e4) => {
                flagged = true;
                " !"
            }
            _ => "",
        };
        let _ = writeln!(
            out,
            "{:>6}  {:>14}  {:>10.3}  {:>6}  {:>14}{}",
            r.degree, err, r.wall_seconds, r.precision_bits, wide, mark
        );
    }
    if flagged {
        let _ = writeln!(
            out,
            "\nrows marked '!': the error changes by more than 10% when measured\n\
             with four times as many quadrature points; treat those values as\n\
             under-resolved"
        );
    }
    out
}

fn emit_outputs(cfg: &RunConfig, records: &[ConvergenceRecord], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    if cfg.emit.csv {
        write_records_csv(records, &dir.join("records.csv"))?;
    }
    if cfg.emit.plot {
        write_plot_data(records, &dir.join("plot.dat"))?;
    }
    if cfg.emit.summary {
        fs::write(dir.join("summary.txt"), render_summary(&cfg.problem, records))?;
    }
    Ok(())
}

/// Adjustments applied to a bundled example before running it.
#[derive(Clone, Debug, Default)]
pub struct FixtureOptions {
    /// Restores the original oscillation strengths and horizons; the
    /// defaults are reduced so runs finish at desk scale.
    pub full_scale: bool,
    /// Order parameter for the family fixture (exm5).
    pub theta: Option<RationalOrder>,
    pub horizon: Option<Real>,
    pub degrees: Option<Vec<usize>>,
    pub bits: Option<u32>,
    pub out: Option<PathBuf>,
    pub emit: Option<EmitFlags>,
}

pub struct Fixture {
    pub problem: RunProblem,
    pub degrees: Vec<usize>,
    pub bits: Option<u32>,
}

pub struct RunOutput {
    pub records: Vec<ConvergenceRecord>,
    pub summary: String,
}

pub fn run_fixture(name: &str, opts: &FixtureOptions) -> Result<RunOutput> {
    let fx = fixture(name, opts)?;
    let emit = opts.emit.unwrap_or_else(EmitFlags::all);
    let cfg = RunConfig {
        degrees: opts.degrees.clone().unwrap_or(fx.degrees),
        bits: opts.bits.or(fx.bits),
        out: opts.out.clone(),
        emit,
        problem: fx.problem,
    };
    let records = converge(&cfg)?;
    let summary =
        if emit.summary { render_summary(&cfg.problem, &records) } else { String::new() };
    Ok(RunOutput { records, summary })
}

pub fn fixture(name: &str, opts: &FixtureOptions) -> Result<Fixture> {
    match name {
        "exm1" => exm1(opts),
        "exm2" => exm2(opts),
        "exm3" => exm3(opts),
        "exm5" => exm5(opts),
        "exm6" => exm6(opts),
        "exm7" => exm7(opts),
        "zero" => zero_fixture(opts),
        _ => Err(Error::validation(
            "fixture",
            format!("unknown name {name:?}, expected exm1, exm2, exm3, exm5, exm6, exm7 or zero"),
        )),
    }
}

fn parse_field(field: String, src: &str) -> Result<Expr> {
    parse(src).map_err(|e| Error::validation(field, format!("{src:?}: {e}")))
}

fn fixture_exprs(items: &[String]) -> Result<Vec<Expr>> {
    items.iter().map(|s| parse_field("fixture".into(), s)).collect()
}

fn fixture_grid(rows: &[Vec<String>]) -> Result<Vec<Vec<Expr>>> {
    rows.iter().map(|row| fixture_exprs(row)).collect()
}

fn orders_of(pairs: &[(i64, i64)]) -> Result<Vec<RationalOrder>> {
    pairs.iter().map(|&(g, q)| RationalOrder::new(g, q)).collect()
}

fn const_initials(vals: &[&[i64]]) -> Vec<Vec<Cx>> {
    let p = data_prec();
    vals.iter()
        .map(|row| row.iter().map(|&v| Cx::from_real(Real::from_i64(v, p))).collect())
        .collect()
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

/// Three coupled equations with orders 1/4, 1/2, 3/4 on [0, pi/2]; the
/// prescribed solutions oscillate in t^(1/4), t^(1/2) and t^(3/4). The
/// frequency is 70 at full scale and 10 at desk scale.
fn exm1(opts: &FixtureOptions) -> Result<Fixture> {
    let w: u32 = if opts.full_scale { 70 } else { 10 };
    let exact = fixture_exprs(&[
        format!("sin({w}*t^(1/4))"),
        format!("cos({w}*t^(1/2))"),
        format!("sin({w}*t^(3/4)) + cos(12*t^(3/4))"),
    ])?;
    let couplings = fixture_grid(&[
        strings(&["t^(1/2)", "1", "0.5*besselj(0; t^(5/4))"]),
        strings(&["1", "t", "2*t^(3/2)"]),
        strings(&["sin(2*t^(1/2))", "3", "t"]),
    ])?;
    let horizon = opts.horizon.clone().unwrap_or_else(|| Real::pi(data_prec()).ldexp(-1));
    let spec = ProblemSpec::new(
        orders_of(&[(1, 4), (1, 2), (3, 4)])?,
        couplings,
        Forcings::FromExact(exact.clone()),
        const_initials(&[&[0], &[1], &[1]]),
        horizon,
    )?;
    Ok(Fixture {
        problem: RunProblem {
            label: format!("exm1 (three mixed orders, frequency {w})"),
            spec,
            reference: Reference::Exact(exact),
        },
        degrees: vec![32, 64, 96, 128],
        bits: None,
    })
}

/// Three equations with orders 1/6, 1/3, 2/3 on [0, 1]; the solutions mix
/// an oscillation in t^(1/6) with low-regularity monomials.
fn exm2(opts: &FixtureOptions) -> Result<Fixture> {
    let exact = fixture_exprs(&strings(&[
        "sin(10*t^(1/6))",
        "t^(1/3)",
        "t^(2/3) + 5*t^(5/6)",
    ]))?;
    let couplings = fixture_grid(&[
        strings(&["2*t", "t^(1/3)", "sin(2*t^(1/6))"]),
        strings(&["t^(11/6)", "t^(1/2)", "5"]),
        strings(&["t", "1", "cos(t^(2/3))"]),
    ])?;
    let horizon = opts.horizon.clone().unwrap_or_else(|| Real::one(data_prec()));
    let spec = ProblemSpec::new(
        orders_of(&[(1, 6), (1, 3), (2, 3)])?,
        couplings,
        Forcings::FromExact(exact.clone()),
        const_initials(&[&[0], &[0], &[0]]),
        horizon,
    )?;
    Ok(Fixture {
        problem: RunProblem {
            label: "exm2 (sixth-root lattice, low-regularity solutions)".into(),
            spec,
            reference: Reference::Exact(exact),
        },
        degrees: vec![16, 32, 64, 96],
        bits: None,
    })
}

/// Two complex-valued equations with orders 1/2 and 3/2 on [0, 3pi/2]; the
/// second equation carries two initial values. Frequencies are (80, 10) at
/// full scale and (12, 3) at desk scale.
fn exm3(opts: &FixtureOptions) -> Result<Fixture> {
    let (w1, w2): (u32, u32) = if opts.full_scale { (80, 10) } else { (12, 3) };
    let exact = fixture_exprs(&[
        format!("t^(1/2)*exp(i*{w1}*t^(1/2))"),
        format!("exp(i*{w2}*t^(3/2))"),
    ])?;
    let couplings =
        fixture_grid(&[strings(&["t^(5/2)", "1"]), strings(&["1", "cos(t^(3/2))"])])?;
    let dp = data_prec();
    let horizon = opts
        .horizon
        .clone()
        .unwrap_or_else(|| (&Real::pi(dp) * &Real::from_u64(3, dp)).ldexp(-1));
    let spec = ProblemSpec::new(
        orders_of(&[(1, 2), (3, 2)])?,
        couplings,
        Forcings::FromExact(exact.clone()),
        const_initials(&[&[0], &[1, 0]]),
        horizon,
    )?;
    Ok(Fixture {
        problem: RunProblem {
            label: format!("exm3 (complex oscillations, frequencies {w1} and {w2})"),
            spec,
            reference: Reference::Exact(exact),
        },
        degrees: vec![32, 64, 96, 128],
        bits: None,
    })
}

/// Two-equation family with parameter theta in (0, 1): the solution
/// (t^(1+theta), Gamma(theta+2) t) lies inside the approximation space once
/// the degree reaches numer + denom, so the solver reproduces it exactly.
fn exm5(opts: &FixtureOptions) -> Result<Fixture> {
    let theta = match opts.theta {
        Some(t) => t,
        None => RationalOrder::new(1, 2)?,
    };
    let (g, q) = (theta.numer(), theta.denom());
    if g >= q {
        return Err(Error::validation("fixture", "exm5 needs theta below one"));
    }
    let dp = data_prec();
    // Gamma(theta + 2) and Gamma(theta + 2)/Gamma(2 - theta), embedded as
    // decimal literals so the forcing stays a plain expression
    let c2 = gamma_rational(g + 2 * q, q, dp)?;
    let c1 = &c2 / &gamma_rational(2 * q - g, q, dp)?;
    let exact = fixture_exprs(&[
        format!("t^({}/{q})", q + g),
        format!("{}*t", c2.to_dec_string()),
    ])?;
    let couplings = fixture_grid(&[strings(&["0", "1"]), strings(&["-1", "-1"])])?;
    let forcing = fixture_exprs(&[
        "0".into(),
        format!(
            "t^({}/{q}) + {}*t^({}/{q}) + {}*t",
            q + g,
            c1.to_dec_string(),
            q - g,
            c2.to_dec_string()
        ),
    ])?;
    let horizon = opts.horizon.clone().unwrap_or_else(|| Real::one(dp));
    let spec = ProblemSpec::new(
        vec![theta, theta],
        couplings,
        Forcings::Explicit(forcing),
        const_initials(&[&[0], &[0]]),
        horizon,
    )?;
    Ok(Fixture {
        problem: RunProblem {
            label: format!("exm5 (polynomial solution, theta = {g}/{q})"),
            spec,
            reference: Reference::Exact(exact),
        },
        degrees: vec![(q + g) as usize],
        bits: None,
    })
}

/// Scalar relaxation D^(1/2) v = -v + 1 with v(0) = 10; the solution is
/// 9 E_(1/2)(-t^(1/2)) + 1. Desk horizon 1, full horizon 1000.
fn exm6(opts: &FixtureOptions) -> Result<Fixture> {
    let dp = data_prec();
    let horizon = opts.horizon.clone().unwrap_or_else(|| {
        if opts.full_scale {
            Real::from_u64(1000, dp)
        } else {
            Real::one(dp)
        }
    });
    let spec = ProblemSpec::new(
        orders_of(&[(1, 2)])?,
        fixture_grid(&[strings(&["-1"])])?,
        Forcings::Explicit(fixture_exprs(&strings(&["1"]))?),
        const_initials(&[&[10]]),
        horizon,
    )?;
    let reference = Reference::MittagLeffler(MlReference {
        order: (1, 2),
        matrix: vec![vec![Real::from_i64(-1, dp)]],
        start: vec![Real::from_u64(9, dp)],
        shift: vec![Real::one(dp)],
    });
    Ok(Fixture {
        problem: RunProblem {
            label: format!(
                "exm6 (scalar relaxation, horizon {})",
                if opts.full_scale { "1000" } else { "1" }
            ),
            spec,
            reference,
        },
        degrees: vec![16, 32, 64],
        bits: Some(512),
    })
}

/// Five homogeneous equations of order 1/2 sharing one dyadic coupling
/// matrix; the solution is the matrix Mittag-Leffler flow of the initial
/// vector (1..5). Desk horizon 1, full horizon 2. The reference series
/// cancels heavily (the matrix spectrum reaches 10 +/- 10i), so the default
/// precision is fixed rather than degree-driven.
fn exm7(opts: &FixtureOptions) -> Result<Fixture> {
    let rows: [[f64; 5]; 5] = [
        [5.125, 5.125, -4.75, 5.0, -0.25],
        [-9.875, 10.125, 0.25, 0.0, -0.25],
        [2.5, -7.5, 2.5, -2.5, -1.0],
        [-2.75, 7.25, -3.0, 2.5, -0.5],
        [0.125, 0.125, -0.25, -0.5, -0.25],
    ];
    let dp = data_prec();
    let couplings = fixture_grid(
        &rows.iter().map(|r| r.iter().map(|v| format!("{v}")).collect()).collect::<Vec<_>>(),
    )?;
    let horizon = opts.horizon.clone().unwrap_or_else(|| {
        if opts.full_scale {
            Real::from_u64(2, dp)
        } else {
            Real::one(dp)
        }
    });
    let spec = ProblemSpec::new(
        orders_of(&[(1, 2); 5])?,
        couplings,
        Forcings::Explicit(fixture_exprs(&strings(&["0"; 5]))?),
        const_initials(&[&[1], &[2], &[3], &[4], &[5]]),
        horizon,
    )?;
    let reference = Reference::MittagLeffler(MlReference {
        order: (1, 2),
        matrix: rows.iter().map(|r| r.iter().map(|&v| Real::from_f64(v, dp)).collect()).collect(),
        start: (1..=5).map(|v| Real::from_u64(v, dp)).collect(),
        shift: (0..5).map(|_| Real::zero(dp)).collect(),
    });
    Ok(Fixture {
        problem: RunProblem {
            label: format!(
                "exm7 (five-equation system, horizon {})",
                if opts.full_scale { "2" } else { "1" }
            ),
            spec,
            reference,
        },
        degrees: vec![64, 96, 128],
        bits: Some(512),
    })
}

/// Decoupled zero problem; every solution is identically zero.
fn zero_fixture(opts: &FixtureOptions) -> Result<Fixture> {
    let horizon = opts.horizon.clone().unwrap_or_else(|| Real::one(data_prec()));
    let exact = fixture_exprs(&strings(&["0"]))?;
    let spec = ProblemSpec::new(
        orders_of(&[(1, 2)])?,
        fixture_grid(&[strings(&["0"])])?,
        Forcings::Explicit(exact.clone()),
        const_initials(&[&[0]]),
        horizon,
    )?;
    Ok(Fixture {
        problem: RunProblem { label: "zero".into(), spec, reference: Reference::Exact(exact) },
        degrees: vec![2, 4, 8],
        bits: None,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    n: usize,
    orders: Vec<String>,
    #[serde(rename = "T")]
    horizon: String,
    couplings: Vec<Vec<String>>,
    #[serde(default)]
    forcings: Option<Vec<String>>,
    #[serde(default)]
    manufactured: Option<ManufacturedBlock>,
    initial: Vec<Vec<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ManufacturedBlock {
    exact: Vec<String>,
}

/// Reads a UTF-8 JSON problem file. Orders are exact rationals "g/q", the
/// horizon is a decimal or a rational, expressions are strings in the
/// coefficient grammar, initial values are "a" or "a+bi".
pub fn load_problem(path: &Path) -> Result<ProblemSpec> {
    problem_from_file(path).map(|rp| rp.spec)
}

/// Like [`load_problem`], but also picks the measurement reference: the
/// prescribed solutions when the file is manufactured, the local series
/// expansion otherwise.
pub fn problem_from_file(path: &Path) -> Result<RunProblem> {
    let text = fs::read_to_string(path)?;
    let file: ProblemFile = serde_json::from_str(&text)?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    build_problem(file, label)
}

fn build_problem(file: ProblemFile, label: String) -> Result<RunProblem> {
    let n = file.n;
    if n == 0 {
        return Err(Error::validation("n", "need at least one equation"));
    }
    if file.orders.len() != n {
        return Err(Error::validation("orders", format!("expected {n} entries")));
    }
    let mut orders = Vec::with_capacity(n);
    for (j, s) in file.orders.iter().enumerate() {
        orders.push(parse_order(&format!("orders[{j}]"), s)?);
    }
    let horizon = parse_horizon(&file.horizon)?;
    if file.couplings.len() != n || file.couplings.iter().any(|row| row.len() != n) {
        return Err(Error::validation("couplings", format!("expected an {n}-by-{n} grid")));
    }
    let mut couplings = Vec::with_capacity(n);
    for (j, row) in file.couplings.iter().enumerate() {
        let mut parsed = Vec::with_capacity(n);
        for (r, src) in row.iter().enumerate() {
            parsed.push(parse_field(format!("couplings[{j}][{r}]"), src)?);
        }
        couplings.push(parsed);
    }
    let (forcings, reference) = match (&file.forcings, &file.manufactured) {
        (Some(_), Some(_)) => {
            return Err(Error::validation(
                "forcings",
                "give either forcings or manufactured.exact, not both",
            ));
        }
        (None, None) => {
            return Err(Error::validation("forcings", "missing (or give manufactured.exact)"));
        }
        (Some(fs), None) => {
            if fs.len() != n {
                return Err(Error::validation("forcings", format!("expected {n} entries")));
            }
            let mut parsed = Vec::with_capacity(n);
            for (j, src) in fs.iter().enumerate() {
                parsed.push(parse_field(format!("forcings[{j}]"), src)?);
            }
            (Forcings::Explicit(parsed), Reference::Series { factor: 4 })
        }
        (None, Some(m)) => {
            if m.exact.len() != n {
                return Err(Error::validation(
                    "manufactured.exact",
                    format!("expected {n} entries"),
                ));
            }
            let mut parsed = Vec::with_capacity(n);
            for (j, src) in m.exact.iter().enumerate() {
                parsed.push(parse_field(format!("manufactured.exact[{j}]"), src)?);
            }
            (Forcings::FromExact(parsed.clone()), Reference::Exact(parsed))
        }
    };
    if file.initial.len() != n {
        return Err(Error::validation("initial", format!("expected {n} rows")));
    }
    let dp = data_prec();
    let mut initial = Vec::with_capacity(n);
    for (j, row) in file.initial.iter().enumerate() {
        let want = orders[j].ceil() as usize;
        if row.len() != want {
            return Err(Error::validation(
                format!("initial[{j}]"),
                format!("order {} needs {want} value(s)", file.orders[j]),
            ));
        }
        let mut vals = Vec::with_capacity(want);
        for (k, s) in row.iter().enumerate() {
            vals.push(parse_complex(&format!("initial[{j}][{k}]"), s, dp)?);
        }
        initial.push(vals);
    }
    let spec = ProblemSpec::new(orders, couplings, forcings, initial, horizon)?;
    Ok(RunProblem { label, spec, reference })
}

fn parse_order(field: &str, s: &str) -> Result<RationalOrder> {
    let bad = |msg: String| Error::validation(field.to_string(), msg);
    let (g, q) = s
        .trim()
        .split_once('/')
        .ok_or_else(|| bad(format!("{s:?} is not of the form g/q")))?;
    let g: i64 = g.trim().parse().map_err(|_| bad(format!("bad numerator in {s:?}")))?;
    let q: i64 = q.trim().parse().map_err(|_| bad(format!("bad denominator in {s:?}")))?;
    RationalOrder::new(g, q).map_err(|e| bad(e.to_string()))
}

fn parse_horizon(s: &str) -> Result<Real> {
    let p = data_prec();
    let bad = || Error::validation("T", format!("{s:?} is not a decimal or a rational"));
    match s.split_once('/') {
        Some((a, b)) => {
            let num = Real::parse_dec(a.trim(), p).map_err(|_| bad())?;
            let den = Real::parse_dec(b.trim(), p).map_err(|_| bad())?;
            if den.is_zero() {
                return Err(bad());
            }
            Ok(&num / &den)
        }
        None => Real::parse_dec(s.trim(), p).map_err(|_| bad()),
    }
}

/// "a", "a+bi" or "a-bi"; the imaginary magnitude may be omitted ("a+i").
fn parse_complex(field: &str, s: &str, p: Precision) -> Result<Cx> {
    let t = s.trim();
    let bad = || Error::validation(field.to_string(), format!("malformed complex value {t:?}"));
    let Some(body) = t.strip_suffix('i') else {
        return Ok(Cx::from_real(Real::parse_dec(t, p).map_err(|_| bad())?));
    };
    let b = body.as_bytes();
    let mut split = None;
    for k in (1..b.len()).rev() {
        // a sign right after an exponent marker belongs to the number
        if (b[k] == b'+' || b[k] == b'-') && !matches!(b[k - 1], b'e' | b'E') {
            split = Some(k);
            break;
        }
    }
    let (re, im_src, negate) = match split {
        Some(k) => (
            Real::parse_dec(body[..k].trim(), p).map_err(|_| bad())?,
            body[k + 1..].trim(),
            b[k] == b'-',
        ),
        None => (Real::zero(p), body.trim(), false),
    };
    let im = match im_src {
        "" => Real::one(p),
        "-" => -Real::one(p),
        _ => Real::parse_dec(im_src, p).map_err(|_| bad())?,
    };
    Ok(Cx::new(re, if negate { -im } else { im }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(bits: u32) -> Precision {
        Precision::new(bits).unwrap()
    }

    fn tol(shift: i64, bits: u32) -> Real {
        Real::one(p(64)).ldexp((shift - bits as i64) as i32)
    }

    fn below(x: &Real, bound: &Real) -> bool {
        !(&x.abs() - bound).is_positive()
    }

    fn zero_problem_with_reference(horizon: u64, reference: &str) -> RunProblem {
        let fx = fixture("zero", &FixtureOptions::default()).unwrap();
        let mut problem = fx.problem;
        if horizon != 1 {
            let dp = data_prec();
            problem.spec = ProblemSpec::new(
                problem.spec.orders().to_vec(),
                vec![vec![parse("0").unwrap()]],
                Forcings::Explicit(vec![parse("0").unwrap()]),
                vec![vec![Cx::zero(dp)]],
                Real::from_u64(horizon, dp),
            )
            .unwrap();
        }
        problem.reference = Reference::Exact(vec![parse(reference).unwrap()]);
        problem
    }

    fn tmp_dir(tag: &str) -> PathBuf {
        let dir = std::env::temp_dir()
            .join(format!("sfde-harness-{tag}-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn unit_error_norm_is_exact() {
        let bits = 192;
        let problem = zero_problem_with_reference(1, "1");
        let sol = solve(&problem.spec, 4, p(bits)).unwrap();
        let e = error_norm(&sol, &problem.reference, 8).unwrap();
        let gap = &e - &Real::one(p(bits));
        assert!(below(&gap, &tol(24, bits)), "got {}", e.to_display_string(30));
    }

    #[test]
    fn linear_error_norm_matches_closed_form() {
        let bits = 192;
        let problem = zero_problem_with_reference(2, "t");
        let sol = solve(&problem.spec, 4, p(bits)).unwrap();
        let e = error_norm(&sol, &problem.reference, 8).unwrap();
        let want = Real::from_ratio(8, 3, p(bits)).unwrap().sqrt().unwrap();
        let gap = &e - &want;
        assert!(below(&gap, &tol(24, bits)), "got {}", e.to_display_string(30));
    }

    #[test]
    fn matched_reference_measures_only_dust() {
        let bits = 192;
        let exact = parse("t^(3/2)").unwrap();
        let spec = ProblemSpec::new(
            vec![RationalOrder::new(3, 2).unwrap()],
            vec![vec![parse("0").unwrap()]],
            Forcings::FromExact(vec![exact.clone()]),
            vec![vec![Cx::zero(p(bits)), Cx::zero(p(bits))]],
            Real::one(p(bits)),
        )
        .unwrap();
        let sol = solve(&spec, 5, p(bits)).unwrap();
        let e = error_norm(&sol, &Reference::Exact(vec![exact]), 5).unwrap();
        assert!(below(&e, &tol(40, bits)), "got {}", e.to_display_string(30));
    }

    #[test]
    fn gauss_norm_agrees_with_trapezoid_refinement() {
        let bits = 192;
        let problem = zero_problem_with_reference(1, "sin(2*t)");
        let sol = solve(&problem.spec, 8, p(bits)).unwrap();
        let e = error_norm(&sol, &problem.reference, 32).unwrap();
        let m = 4096u64;
        let wp = p(bits);
        let h = Real::from_u64(m, wp).recip();
        let f = |t: &Real| -> Real {
            let v = parse("sin(2*t)").unwrap().eval(t).unwrap().abs();
            &v * &v
        };
        let mut acc = (&f(&Real::zero(wp)) + &f(&Real::one(wp))).ldexp(-1);
        for k in 1..m {
            acc = &acc + &f(&(&Real::from_u64(k, wp) * &h));
        }
        let trap = (&acc * &h).sqrt().unwrap();
        let gap = (&e - &trap).abs();
        let cap = &trap / &Real::from_u64(100, wp);
        assert!(below(&gap, &cap), "gauss {} vs trapezoid {}", e.to_f64(), trap.to_f64());
    }

    #[test]
    fn converge_keeps_going_past_failed_degrees() {
        let bits = 160;
        let exact = parse("t^(3/2)").unwrap();
        let spec = ProblemSpec::new(
            vec![RationalOrder::new(3, 2).unwrap()],
            vec![vec![parse("0").unwrap()]],
            Forcings::FromExact(vec![exact.clone()]),
            vec![vec![Cx::zero(p(bits)), Cx::zero(p(bits))]],
            Real::one(p(bits)),
        )
        .unwrap();
        let cfg = RunConfig {
            problem: RunProblem {
                label: "guard".into(),
                spec,
                reference: Reference::Exact(vec![exact]),
            },
            degrees: vec![2, 4],
            bits: Some(bits),
            out: None,
            emit: EmitFlags::none(),
        };
        let recs = converge(&cfg).unwrap();
        assert_eq!(recs.len(), 2);
        assert!(recs[0].failure().is_some());
        assert!(recs[1].error().is_some());
        assert_eq!(recs[1].precision_bits, bits);
    }

    #[test]
    fn degree_lists_are_validated() {
        let fx = fixture("zero", &FixtureOptions::default()).unwrap();
        let mut cfg = RunConfig {
            problem: fx.problem,
            degrees: vec![],
            bits: None,
            out: None,
            emit: EmitFlags::none(),
        };
        assert!(converge(&cfg).is_err());
        cfg.degrees = vec![4, 4];
        assert!(converge(&cfg).is_err());
        cfg.degrees = vec![8, 4];
        assert!(converge(&cfg).is_err());
    }

    #[test]
    fn records_survive_a_csv_round_trip() {
        let dir = tmp_dir("csv");
        let records = vec![
            ConvergenceRecord {
                degree: 4,
                outcome: Outcome::Measured(
                    Real::from_ratio(1, 3, p(128)).unwrap().ldexp(-100),
                ),
                wall_seconds: 0.125,
                precision_bits: 128,
                wide_error: Some(Real::one(p(128))),
            },
            ConvergenceRecord {
                degree: 8,
                outcome: Outcome::Failed("degree 8 below the lattice shift; need 9".into()),
                wall_seconds: 0.001953125,
                precision_bits: 96,
                wide_error: None,
            },
        ];
        let path = dir.join("records.csv");
        write_records_csv(&records, &path).unwrap();
        let back = read_records_csv(&path).unwrap();
        assert_eq!(records, back);
        let _ = fs::remove_dir_all(&dir);
    }

    #[test]
    fn plot_data_skips_rows_without_a_logarithm() {
        let dir = tmp_dir("plot");
        let records = vec![
            ConvergenceRecord {
                degree: 2,
                outcome: Outcome::Measured(Real::zero(p(64))),
                wall_seconds: 0.0,
                precision_bits: 64,
                wide_error: None,
            },
            ConvergenceRecord {
                degree: 4,
                outcome: Outcome::Failed("nope".into()),
                wall_seconds: 0.0,
                precision_bits: 64,
                wide_error: None,
            },
            ConvergenceRecord {
                degree: 8,
                outcome: Outcome::Measured(Real::from_f64(1e-6, p(64))),
                wall_seconds: 0.0,
                precision_bits: 64,
                wide_error: None,
            },
        ];
        let path = dir.join("plot.dat");
        write_plot_data(&records, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 1);
        let mut parts = lines[0].split_whitespace();
        assert_eq!(parts.next(), Some("8"));
        let l: f64 = parts.next().unwrap().parse().unwrap();
        assert!((l + 6.0).abs() < 1e-9);
        let _ = fs::remove_dir_all(&dir);
    }

    #[test]
    fn summary_flags_quadrature_disagreement() {
        let fx = fixture("zero", &FixtureOptions::default()).unwrap();
        let e = Real::from_f64(1e-3, p(64));
        let records = vec![
            ConvergenceRecord {
                degree: 2,
                outcome: Outcome::Measured(e.clone()),
                wall_seconds: 0.1,
                precision_bits: 64,
                wide_error: Some(e.clone()),
            },
            ConvergenceRecord {
                degree: 4,
                outcome: Outcome::Measured(e.clone()),
                wall_seconds: 0.1,
                precision_bits: 64,
                wide_error: Some(e.ldexp(1)),
            },
        ];
        let text = render_summary(&fx.problem, &records);
        let rows: Vec<&str> = text.lines().filter(|l| l.trim_start().starts_with(['2', '4'])).collect();
        assert_eq!(rows.len(), 2);
        assert!(!rows[0].ends_with('!'), "{text}");
        assert!(rows[1].ends_with('!'), "{text}");
        assert!(text.contains("10%"));
    }

    #[test]
    fn zero_fixture_produces_zero_rows_and_artifacts() {
        let dir = tmp_dir("zero");
        let out = run_fixture(
            "zero",
            &FixtureOptions { out: Some(dir.clone()), ..FixtureOptions::default() },
        )
        .unwrap();
        assert_eq!(out.records.len(), 3);
        for r in &out.records {
            assert!(r.error().unwrap().is_zero());
        }
        assert!(out.summary.contains("zero"));
        assert!(dir.join("records.csv").exists());
        assert!(dir.join("summary.txt").exists());
        let plot = fs::read_to_string(dir.join("plot.dat")).unwrap();
        assert!(plot.is_empty());
        let back = read_records_csv(&dir.join("records.csv")).unwrap();
        assert_eq!(out.records, back);
        let _ = fs::remove_dir_all(&dir);
    }

    #[test]
    fn minimal_scalar_file_loads() {
        let dir = tmp_dir("load");
        let path = dir.join("relax.json");
        fs::write(
            &path,
            r#"{"n": 1, "orders": ["1/2"], "T": "1",
                "couplings": [["-1"]], "forcings": ["1"], "initial": [["10"]]}"#,
        )
        .unwrap();
        let rp = problem_from_file(&path).unwrap();
        assert_eq!(rp.spec.n(), 1);
        assert_eq!(rp.spec.grid().q(), 2);
        assert!(matches!(rp.reference, Reference::Series { .. }));
        let wp = p(128);
        assert!(rp.spec.horizon(wp) == Real::one(wp));
        assert!(rp.spec.initial_value(0, 0, wp) == Real::from_u64(10, wp));
        let c = rp.spec.coupling(0, 0).eval(&Real::from_f64(0.3, wp)).unwrap();
        assert!(c == Cx::from_real(-Real::one(wp)));
        let _ = fs::remove_dir_all(&dir);
    }

    #[test]
    fn problem_files_report_offending_fields() {
        let dir = tmp_dir("diag");
        let check = |tag: &str, body: &str, needle: &str| {
            let path = dir.join(format!("{tag}.json"));
            fs::write(&path, body).unwrap();
            let err = problem_from_file(&path).unwrap_err().to_string();
            assert!(err.contains(needle), "{tag}: {err}");
        };
        check(
            "intorder",
            r#"{"n": 1, "orders": ["2/1"], "T": "1", "couplings": [["0"]],
               "forcings": ["0"], "initial": [["0", "0"]]}"#,
            "orders[0]",
        );
        check(
            "arity",
            r#"{"n": 2, "orders": ["1/2", "1/2"], "T": "1", "couplings": [["0"]],
               "forcings": ["0", "0"], "initial": [["0"], ["0"]]}"#,
            "couplings",
        );
        check(
            "bothforcings",
            r#"{"n": 1, "orders": ["1/2"], "T": "1", "couplings": [["0"]],
               "forcings": ["0"], "manufactured": {"exact": ["0"]}, "initial": [["0"]]}"#,
            "forcings",
        );
        check(
            "badexpr",
            r#"{"n": 1, "orders": ["1/2"], "T": "1", "couplings": [["t^^2"]],
               "forcings": ["0"], "initial": [["0"]]}"#,
            "couplings[0][0]",
        );
        check(
            "badinit",
            r#"{"n": 1, "orders": ["1/2"], "T": "1", "couplings": [["0"]],
               "forcings": ["0"], "initial": [["1+2j"]]}"#,
            "initial[0][0]",
        );
        check(
            "badhorizon",
            r#"{"n": 1, "orders": ["1/2"], "T": "soon", "couplings": [["0"]],
               "forcings": ["0"], "initial": [["0"]]}"#,
            "T",
        );
        check(
            "initarity",
            r#"{"n": 1, "orders": ["3/2"], "T": "1", "couplings": [["0"]],
               "forcings": ["0"], "initial": [["0"]]}"#,
            "initial[0]",
        );
        let path = dir.join("notjson.json");
        fs::write(&path, "{\"n\": 1,\n  \"orders\": oops}").unwrap();
        let err = problem_from_file(&path).unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
        let _ = fs::remove_dir_all(&dir);
    }

    #[test]
    fn complex_literals_cover_both_forms() {
        let wp = p(128);
        let v = parse_complex("initial", "1.5+2i", wp).unwrap();
        assert!(v.re == Real::from_f64(1.5, wp) && v.im == Real::from_u64(2, wp));
        let v = parse_complex("initial", "1.5-2e-1i", wp).unwrap();
        assert!(v.re == Real::from_f64(1.5, wp));
        assert!(v.im == -Real::parse_dec("0.2", wp).unwrap());
        let v = parse_complex("initial", "-3", wp).unwrap();
        assert!(v.re == Real::from_i64(-3, wp) && v.im.is_zero());
        let v = parse_complex("initial", "0+i", wp).unwrap();
        assert!(v.re.is_zero() && v.im == Real::one(wp));
        assert!(parse_complex("initial", "1*2i", wp).is_err());
    }

    #[test]
    fn rational_horizons_parse() {
        assert!(parse_horizon("3/2").unwrap() == Real::from_f64(1.5, data_prec()));
        assert!(parse_horizon("0.25").unwrap() == Real::from_f64(0.25, data_prec()));
        assert!(parse_horizon("1/0").is_err());
    }

    #[test]
    fn fixture_catalog_spot_checks() {
        let opts = FixtureOptions::default();
        let e1 = fixture("exm1", &opts).unwrap();
        assert_eq!(e1.problem.spec.n(), 3);
        assert_eq!(e1.problem.spec.grid().q(), 4);
        let wp = p(128);
        let gap = &e1.problem.spec.horizon(wp) - &Real::pi(wp).ldexp(-1);
        assert!(below(&gap, &tol(8, 128)));

        let e2 = fixture("exm2", &opts).unwrap();
        assert_eq!(e2.problem.spec.grid().q(), 6);
        assert_eq!(e2.problem.spec.orders()[2].numer(), 2);

        let e3 = fixture("exm3", &opts).unwrap();
        assert!(e3.problem.spec.initial_value(1, 0, wp) == Real::one(wp));
        assert!(e3.problem.spec.initial_value(1, 1, wp).is_zero());

        let e5 = fixture("exm5", &opts).unwrap();
        assert_eq!(e5.degrees, vec![3]);
        let c = e5.problem.spec.coupling(1, 0).eval(&Real::from_f64(0.7, wp)).unwrap();
        assert!(c == Cx::from_real(-Real::one(wp)));
        let e5 = fixture(
            "exm5",
            &FixtureOptions { theta: Some(RationalOrder::new(2, 5).unwrap()), ..opts.clone() },
        )
        .unwrap();
        assert_eq!(e5.degrees, vec![7]);
        assert_eq!(e5.problem.spec.grid().q(), 5);

        let e6 = fixture("exm6", &opts).unwrap();
        assert_eq!(e6.bits, Some(512));
        match &e6.problem.reference {
            Reference::MittagLeffler(ml) => {
                let at_zero = ml.values(&Real::zero(wp)).unwrap();
                assert!(at_zero[0] == Real::from_u64(10, wp));
            }
            _ => panic!("expected a Mittag-Leffler reference"),
        }

        let e7 = fixture("exm7", &opts).unwrap();
        assert_eq!(e7.problem.spec.n(), 5);
        assert_eq!(e7.problem.spec.grid().q(), 2);
        let a10 = e7.problem.spec.coupling(1, 0).eval(&Real::one(wp)).unwrap();
        assert!(a10 == Cx::from_real(Real::from_f64(-9.875, wp)));

        assert!(fixture("exm4", &opts).is_err());
    }

    #[test]
    fn exm5_is_reproduced_at_the_minimal_degree() {
        let out = run_fixture(
            "exm5",
            &FixtureOptions { emit: Some(EmitFlags::none()), ..FixtureOptions::default() },
        )
        .unwrap();
        assert_eq!(out.records.len(), 1);
        let e = out.records[0].error().unwrap();
        assert!(below(e, &Real::from_f64(1e-30, p(64))), "{}", e.to_display_string(10));
    }

    #[test]
    fn exm6_error_decays_with_degree() {
        let out = run_fixture(
            "exm6",
            &FixtureOptions {
                degrees: Some(vec![8, 16]),
                bits: Some(320),
                emit: Some(EmitFlags::none()),
                ..FixtureOptions::default()
            },
        )
        .unwrap();
        let e8 = out.records[0].error().unwrap();
        let e16 = out.records[1].error().unwrap();
        assert!((e8 - e16).is_positive(), "{} vs {}", e8.to_f64(), e16.to_f64());
        // the solution is entire in sqrt(t); the retained-tail scale at
        // degree 16 is 9/Gamma(9.5) ~ 8e-5
        assert!(below(e16, &Real::from_f64(1e-4, p(64))), "{}", e16.to_f64());
    }

    #[test]
    fn series_reference_agrees_with_closed_form() {
        let dir = tmp_dir("series-ref");
        let path = dir.join("relax.json");
        fs::write(
            &path,
            r#"{"n": 1, "orders": ["1/2"], "T": "1",
                "couplings": [["-1"]], "forcings": ["1"], "initial": [["10"]]}"#,
        )
        .unwrap();
        let rp = problem_from_file(&path).unwrap();
        let bits = 256;
        let sol = solve(&rp.spec, 8, p(bits)).unwrap();
        let e_series = error_norm(&sol, &rp.reference, 8).unwrap();
        let wp = p(bits);
        let dp = data_prec();
        let ml = Reference::MittagLeffler(MlReference {
            order: (1, 2),
            matrix: vec![vec![Real::from_i64(-1, dp)]],
            start: vec![Real::from_u64(9, dp)],
            shift: vec![Real::one(dp)],
        });
        let e_ml = error_norm(&sol, &ml, 8).unwrap();
        let gap = (&e_series - &e_ml).abs();
        let cap = &e_ml / &Real::from_u64(1_000_000, wp);
        assert!(below(&gap, &cap), "series {} vs ml {}", e_series.to_f64(), e_ml.to_f64());
        let _ = fs::remove_dir_all(&dir);
    }
}
