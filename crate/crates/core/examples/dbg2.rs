use sfde_core::expr::parse;
use sfde_core::fracops::RationalOrder;
use sfde_core::galerkin::solve;
use sfde_core::harness::{error_norm, Reference};
use sfde_core::kernel::real::Real;
use sfde_core::problem::{Forcings, ProblemSpec};
use sfde_core::{Cx, Precision};

fn run(tag: &str, order: (i64, i64), coupling: &str, t_horizon: f64, n_deg: usize) {
    let p = Precision::new(256).unwrap();
    let exact = parse("sin(t^(1/4))").unwrap();
    let spec = ProblemSpec::new(
        vec![RationalOrder::new(order.0, order.1).unwrap()],
        vec![vec![parse(coupling).unwrap()]],
        Forcings::FromExact(vec![exact.clone()]),
        vec![vec![Cx::zero(p)]],
        Real::from_f64(t_horizon, p),
    )
    .unwrap();
    match solve(&spec, n_deg, p) {
        Ok(sol) => {
            let e = error_norm(&sol, &Reference::Exact(vec![exact]), n_deg).unwrap();
            println!("{tag}: N={n_deg} E={:.3e}", e.to_f64());
        }
        Err(e) => println!("{tag}: N={n_deg} FAILED {e}"),
    }
}

fn main() {
    for n in [8, 16, 24] {
        run("A: free, T=1      ", (1, 4), "0", 1.0, n);
    }
    for n in [8, 16, 24] {
        run("B: free, T=1.5708 ", (1, 4), "0", 1.5707963267948966, n);
    }
    for n in [8, 16, 24] {
        run("C: p=3,  T=1      ", (1, 4), "3", 1.0, n);
    }
    for n in [8, 16, 24] {
        run("D: p=3,  T=1.5708 ", (1, 4), "3", 1.5707963267948966, n);
    }
    for n in [8, 16, 24] {
        run("E: p=sin,T=1      ", (1, 4), "sin(2*t^(1/2))", 1.0, n);
    }
}
