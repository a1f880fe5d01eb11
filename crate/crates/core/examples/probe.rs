use sfde_core::fracops::RationalOrder;
use sfde_core::harness::{run_fixture, EmitFlags, FixtureOptions};
use sfde_core::kernel::real::Real;
use sfde_core::Precision;
use std::time::Instant;

fn show(tag: &str, name: &str, opts: &FixtureOptions) {
    let t0 = Instant::now();
    match run_fixture(name, opts) {
        Ok(out) => {
            for r in &out.records {
                match r.error() {
                    Some(e) => println!(
                        "{tag} N={:<4} bits={:<4} E={:<12.3e} log10E={:>8.3} solve={:.2}s",
                        r.degree,
                        r.precision_bits,
                        e.to_f64(),
                        e.log10_abs().unwrap_or(f64::NEG_INFINITY),
                        r.wall_seconds
                    ),
                    None => println!("{tag} N={} FAILED: {}", r.degree, r.failure().unwrap()),
                }
            }
            println!("{tag} total {:.2}s", t0.elapsed().as_secs_f64());
        }
        Err(e) => println!("{tag} error: {e}"),
    }
}

fn main() {
    let which = std::env::args().nth(1).unwrap_or_default();
    let quiet = FixtureOptions { emit: Some(EmitFlags::none()), ..FixtureOptions::default() };
    if which == "exm5" {
        for (g, q) in [(1i64, 4i64), (2, 5), (1, 2), (2, 3)] {
            let opts = FixtureOptions {
                theta: Some(RationalOrder::new(g, q).unwrap()),
                bits: Some(256),
                ..quiet.clone()
            };
            show(&format!("exm5 {g}/{q}"), "exm5", &opts);
        }
    } else if which == "exm6" {
        let opts = FixtureOptions { degrees: Some(vec![16, 32, 64]), ..quiet.clone() };
        show("exm6", "exm6", &opts);
    } else if which == "exm1" {
        let opts = FixtureOptions { degrees: Some(vec![32, 64, 96, 128]), ..quiet.clone() };
        show("exm1", "exm1", &opts);
    } else if which == "exm3" {
        let opts = FixtureOptions { degrees: Some(vec![32, 64, 96, 128]), ..quiet.clone() };
        show("exm3", "exm3", &opts);
    } else if which == "exm2" {
        let opts = FixtureOptions { degrees: Some(vec![16, 32, 64, 96]), ..quiet.clone() };
        show("exm2", "exm2", &opts);
    } else if which == "exm7" {
        let n: usize = std::env::args().nth(2).map(|s| s.parse().unwrap()).unwrap_or(64);
        let opts = FixtureOptions {
            degrees: Some(vec![n]),
            horizon: Some(Real::from_f64(0.5, Precision::new(128).unwrap())),
            bits: Some(Precision::for_degree(n).bits()),
            ..quiet.clone()
        };
        show("exm7 T=1/2", "exm7", &opts);
    } else if which == "small" {
        let name = std::env::args().nth(2).unwrap_or("exm1".into());
        let opts = FixtureOptions {
            degrees: Some(vec![4, 8, 12, 16, 20, 24, 28]),
            bits: Some(256),
            ..quiet.clone()
        };
        show(&format!("{name} small"), &name, &opts);
    } else if which == "bits" {
        let name = std::env::args().nth(2).unwrap_or("exm1".into());
        let deg: usize = std::env::args().nth(3).map(|s| s.parse().unwrap()).unwrap_or(32);
        for b in [Precision::for_degree(deg).bits(), 384, 512, 768] {
            let opts = FixtureOptions {
                degrees: Some(vec![deg]),
                bits: Some(b),
                ..quiet.clone()
            };
            show(&format!("{name} N={deg} b={b}"), &name, &opts);
        }
    } else if which == "exm7desk" {
        let opts = FixtureOptions { degrees: Some(vec![64, 96, 128]), ..quiet.clone() };
        show("exm7 desk", "exm7", &opts);
    }
}

// appended: precision scan to split method error from rounding amplification
