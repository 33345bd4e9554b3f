#![allow(dead_code)]

use std::path::PathBuf;

use copodual::model::{load_program, CopositiveProgram};
use copodual::symcore::{simplex_grid, Mat};
use copodual::SymMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn fixture(name: &str) -> CopositiveProgram {
    load_program(fixture_path(name)).unwrap().into_copositive().unwrap()
}

pub fn ex_ns() -> CopositiveProgram {
    fixture("ex_ns.json")
}

pub fn ex_sl() -> CopositiveProgram {
    fixture("ex_sl.json")
}

pub fn ex_2l() -> CopositiveProgram {
    fixture("ex_2l.json")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_sym(rng: &mut ChaCha8Rng, p: usize) -> SymMatrix {
    let mut m = SymMatrix::zeros(p);
    for i in 0..p {
        for j in i..p {
            m.set_sym(i, j, rng.gen_range(-1.0..1.0));
        }
    }
    m
}

pub fn random_psd(rng: &mut ChaCha8Rng, p: usize) -> SymMatrix {
    let b = Mat::from_row_major(p, p, (0..p * p).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
    b.gram()
}

pub fn random_nonneg(rng: &mut ChaCha8Rng, p: usize) -> SymMatrix {
    let mut m = SymMatrix::zeros(p);
    for i in 0..p {
        for j in i..p {
            m.set_sym(i, j, rng.gen_range(0.0..1.0));
        }
    }
    m
}

/// Costs `c_j = U • A_j` for `U = Σ w t tᵀ` over random grid points that
/// satisfy `keep`, so the grid dual is feasible and the program bounded.
fn grid_costs(rng: &mut ChaCha8Rng, a: &[SymMatrix], keep: impl Fn(&[f64]) -> bool) -> Vec<f64> {
    let p = a[0].dim();
    let grid = simplex_grid(p, 4).unwrap();
    let pts: Vec<_> = grid.points().iter().filter(|t| keep(t.coords())).collect();
    let mut c = vec![0.0; a.len() - 1];
    for _ in 0..3 {
        let t = pts[rng.gen_range(0..pts.len())];
        let w = rng.gen_range(0.2..1.0);
        for (cj, aj) in c.iter_mut().zip(&a[1..]) {
            *cj += w * copodual::symcore::quad_form(aj, t.coords()).unwrap();
        }
    }
    c
}

/// Strictly copositive `A₀` and random `A_j`: a Slater point at `x = 0`.
pub fn random_slater_program(rng: &mut ChaCha8Rng, p: usize, n: usize) -> CopositiveProgram {
    let a0 = random_psd(rng, p).add(&SymMatrix::identity(p)).unwrap();
    let mut a = vec![a0];
    for _ in 0..n {
        a.push(random_sym(rng, p));
    }
    let c = grid_costs(rng, &a, |_| true);
    CopositiveProgram::new(a, c).unwrap()
}

/// Row and column `r` vanish in every matrix, so `e_r` is immobile; the
/// remaining block of `A₀` is positive definite, so nothing else is.
pub fn random_planted_program(rng: &mut ChaCha8Rng, p: usize, n: usize) -> (CopositiveProgram, usize) {
    let r = rng.gen_range(0..p);
    (planted(rng, p, n, &[r]), r)
}

/// Rows `r` and `s` vanish, so the whole edge between `e_r` and `e_s` is
/// immobile.
pub fn random_edge_program(rng: &mut ChaCha8Rng, p: usize, n: usize) -> CopositiveProgram {
    let r = rng.gen_range(0..p);
    let s = (r + rng.gen_range(1..p)) % p;
    planted(rng, p, n, &[r, s])
}

fn planted(rng: &mut ChaCha8Rng, p: usize, n: usize, rows: &[usize]) -> CopositiveProgram {
    let strip = |m: SymMatrix| {
        let mut m = m;
        for &r in rows {
            for k in 0..p {
                m.set_sym(r, k, 0.0);
            }
        }
        m
    };
    let a0 = strip(random_psd(rng, p).add(&SymMatrix::identity(p)).unwrap());
    let mut a = vec![a0];
    for _ in 0..n {
        a.push(strip(random_sym(rng, p)));
    }
    let c = grid_costs(rng, &a, |t| rows.iter().all(|&r| t[r] == 0.0));
    CopositiveProgram::new(a, c).unwrap()
}

/// Slater, planted-vertex and planted-edge programs in turn, with
/// `2 <= p <= 4` and `1 <= n <= 3` (`p >= 3` for edges).
pub fn random_programs(count: usize, seed: u64) -> Vec<CopositiveProgram> {
    let mut rng = rng(seed);
    (0..count)
        .map(|i| {
            let n = rng.gen_range(1..=3);
            match i % 3 {
                0 => {
                    let p = rng.gen_range(2..=4);
                    random_slater_program(&mut rng, p, n)
                }
                1 => {
                    let p = rng.gen_range(2..=4);
                    random_planted_program(&mut rng, p, n).0
                }
                _ => {
                    let p = rng.gen_range(3..=4);
                    random_edge_program(&mut rng, p, n)
                }
            }
        })
        .collect()
}
