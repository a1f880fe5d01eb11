use sfde_core::expr::{expand, parse};
use sfde_core::galerkin::project_coefficients;
use sfde_core::muntz::MuntzGrid;
use sfde_core::{Precision, Real};

fn main() {
    let p = Precision::new(256).unwrap();
    let grid = MuntzGrid::new(4).unwrap();
    let e = parse("sin(2*t^(1/2))").unwrap();
    for n in [8usize, 16, 24] {
        let proj = project_coefficients(grid, n, p, |u: &Real| e.eval(u)).unwrap();
        let ser = expand(&e, grid, n, p).unwrap();
        println!("N = {n}");
        for m in 0..=n {
            let a = proj[m].abs().log10_abs().unwrap_or(f64::NEG_INFINITY);
            let s = ser
                .coeff(m)
                .map(|c| c.abs().log10_abs().unwrap_or(f64::NEG_INFINITY))
                .unwrap_or(f64::NEG_INFINITY);
            println!("  m={m:2}  log10|proj|={a:8.2}  log10|taylor|={s:8.2}");
        }
    }
}
