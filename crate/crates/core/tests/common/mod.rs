#![allow(dead_code, clippy::needless_range_loop)]

use polydyn::rng::ScenarioRng;
use polydyn::*;

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum SystemShape {
    /// `a_ii` anywhere in `[0, 1]`, with 0 and 1 drawn often.
    Any,
    /// `a_ii` uniform on `(0.05, 0.95)`.
    StrictInterior,
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.amax()
}

/// Primitive influence matrix.
pub fn random_w(rng: &mut ScenarioRng, n: usize) -> InfluenceMatrix {
    let p = rng.uniform_in(0.0, 0.5);
    random_strong_w(n, p, rng.next_u64()).unwrap()
}

/// Sparse row-stochastic matrix with no structural guarantees.
pub fn random_any_w(rng: &mut ScenarioRng, n: usize) -> InfluenceMatrix {
    let density = rng.uniform_in(0.1, 1.0);
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if rng.bernoulli(density) {
                w[(i, j)] = rng.uniform();
            }
        }
        if w.row(i).sum() == 0.0 {
            w[(i, rng.below(n))] = 1.0;
        }
        let s = w.row(i).sum();
        w.row_mut(i).unscale_mut(s);
    }
    InfluenceMatrix::new(w).unwrap()
}

pub fn random_state(rng: &mut ScenarioRng, n: usize, m: usize) -> StateMatrix {
    let scale = [1.0, 10.0, 100.0][rng.below(3)];
    StateMatrix::new(DMatrix::from_fn(n, m, |_, _| {
        scale * rng.uniform_in(-1.0, 1.0)
    }))
    .unwrap()
}

pub fn random_system(rng: &mut ScenarioRng, shape: SystemShape) -> System {
    let n = 1 + rng.below(20);
    let w = if rng.bernoulli(0.5) {
        random_w(rng, n)
    } else {
        random_any_w(rng, n)
    };
    finish_system(rng, shape, w)
}

/// Primitive `W` with `n >= 2`: every `a_ii` is identifiable from
/// `{W, X(0), X(inf)}` for generic states.
pub fn random_identifiable_system(rng: &mut ScenarioRng) -> System {
    let n = 2 + rng.below(19);
    let w = random_w(rng, n);
    finish_system(rng, SystemShape::StrictInterior, w)
}

fn finish_system(rng: &mut ScenarioRng, shape: SystemShape, w: InfluenceMatrix) -> System {
    let n = w.n();
    let m = 1 + rng.below(3);
    let a: Vec<f64> = (0..n)
        .map(|_| match shape {
            SystemShape::StrictInterior => rng.uniform_in(0.05, 0.95),
            SystemShape::Any => match rng.below(5) {
                0 => 0.0,
                1 => 1.0,
                _ => rng.uniform(),
            },
        })
        .collect();
    let x0 = random_state(rng, n, m);
    System::new(w, DampingMatrix::new(a).unwrap(), x0).unwrap()
}

/// `(I - AW)^-1 (I - A)` by Gauss-Jordan elimination with partial pivoting.
pub fn v_oracle(w: &InfluenceMatrix, a: &DampingMatrix) -> DMatrix<f64> {
    let n = w.n();
    let mut lhs = vec![vec![0.0; n]; n];
    let mut rhs = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            lhs[i][j] = f64::from(u8::from(i == j)) - a.get(i) * w.get(i, j);
        }
        rhs[i][i] = 1.0 - a.get(i);
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| lhs[x][col].abs().total_cmp(&lhs[y][col].abs()))
            .unwrap();
        lhs.swap(col, pivot);
        rhs.swap(col, pivot);
        let p = lhs[col][col];
        assert!(p.abs() > 1e-300, "oracle met a singular system");
        for j in 0..n {
            lhs[col][j] /= p;
            rhs[col][j] /= p;
        }
        for r in 0..n {
            if r != col {
                let f = lhs[r][col];
                if f != 0.0 {
                    for j in 0..n {
                        lhs[r][j] -= f * lhs[col][j];
                        rhs[r][j] -= f * rhs[col][j];
                    }
                }
            }
        }
    }
    DMatrix::from_fn(n, n, |i, j| rhs[i][j])
}
