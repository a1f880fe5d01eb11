use sfde_core::galerkin::{assemble, recurrence_solve};
use sfde_core::harness::{fixture, FixtureOptions};
use sfde_core::oracle::series_solve;
use sfde_core::{Cx, Precision};

fn dense_solve(sys: &sfde_core::galerkin::AssembledSystem) -> Vec<Vec<Cx>> {
    let n = sys.spec().n();
    let m = sys.degree() + 1;
    let p = sys.prec();
    let dim = n * m;
    // X (I - B) = P with block (r, j) of B equal to A_{j,r}; transpose to
    // solve (I - B)^T x = P^T by plain elimination.
    let mut a = vec![vec![Cx::zero(p); dim]; dim];
    let mut b = vec![Cx::zero(p); dim];
    for j in 0..n {
        for l in 0..m {
            let row = j * m + l;
            a[row][row] = Cx::from_real(sfde_core::Real::one(p));
            b[row] = sys.rhs_row(j)[l].clone();
            for r in 0..n {
                for k in 0..m {
                    let e = sys.operator_entry(j, r, k, l);
                    if !e.is_zero() {
                        let col = r * m + k;
                        a[row][col] = &a[row][col] - &e;
                    }
                }
            }
        }
    }
    // Gaussian elimination with partial pivoting.
    let mut pivots: Vec<usize> = (0..dim).collect();
    for col in 0..dim {
        let mut best = col;
        let mut best_mag = a[col][col].abs();
        for r in col + 1..dim {
            let mag = a[r][col].abs();
            if mag > best_mag {
                best = r;
                best_mag = mag;
            }
        }
        a.swap(col, best);
        b.swap(col, best);
        pivots.swap(col, best);
        let inv = a[col][col].clone();
        for r in col + 1..dim {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &inv;
            for c in col..dim {
                let t = &f * &a[col][c];
                a[r][c] = &a[r][c] - &t;
            }
            let t = &f * &b[col];
            b[r] = &b[r] - &t;
        }
    }
    let mut x = vec![Cx::zero(p); dim];
    for r in (0..dim).rev() {
        let mut acc = b[r].clone();
        for c in r + 1..dim {
            let t = &a[r][c] * &x[c];
            acc = &acc - &t;
        }
        x[r] = &acc / &a[r][r];
    }
    (0..n).map(|j| x[j * m..(j + 1) * m].to_vec()).collect()
}

fn main() {
    let name = std::env::args().nth(1).unwrap_or_else(|| "exm1".into());
    let deg: usize = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(16);
    let p = Precision::new(256).unwrap();
    let fx = fixture(&name, &FixtureOptions::default()).unwrap();
    let spec = fx.problem.spec;
    let q = spec.grid().q() as i64;
    let sys = assemble(&spec, deg, p).unwrap();
    let rec = recurrence_solve(&sys);
    let den = dense_solve(&sys);
    let ser = series_solve(&spec, 2 * (deg + 1), p).unwrap();
    let root = spec.horizon(p).pow_ratio(1, q).unwrap();
    let n = spec.n();
    for j in 0..n {
        println!("equation {j}");
        let mut tp = sfde_core::Real::one(p);
        for l in 0..=deg {
            let sc = ser
                .series(j)
                .coeff(l)
                .map(|c| c.scale(&tp))
                .unwrap_or_else(|| Cx::zero(p));
            let lg = |c: &Cx| c.abs().log10_abs().unwrap_or(f64::NEG_INFINITY);
            let dgap = (&rec[j][l] - &den[j][l]).abs().log10_abs().unwrap_or(f64::NEG_INFINITY);
            let sgap = (&rec[j][l] - &sc).abs().log10_abs().unwrap_or(f64::NEG_INFINITY);
            println!(
                "  l={l:3}  rec={:8.2}  dense_gap={dgap:8.2}  series={:8.2}  series_gap={sgap:8.2}",
                lg(&rec[j][l]),
                lg(&sc)
            );
            tp = &tp * &root;
        }
    }
}
