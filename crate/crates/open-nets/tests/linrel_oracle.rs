//! Anti-drift anchor for the floating-point relation algebra: on small
//! integer-matrix relations, composition must agree with exhaustive
//! rational elimination carried out in exact fractions.

use nalgebra::{DMatrix, DVector};
use num_rational::Ratio;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use open_nets::linrel::{compose_rel, equal_rel, from_graph_of_map, LinRel, Subspace, DEFAULT_RANK_TOL};

type Q = Ratio<i128>;

fn q(n: i64) -> Q {
    Ratio::from_integer(n as i128)
}

/// Reduced row echelon form over exact rationals, in place.
fn rref(m: &mut [Vec<Q>]) -> Vec<usize> {
    let rows = m.len();
    if rows == 0 {
        return vec![];
    }
    let cols = m[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(pivot_row) = (r..rows).find(|&i| m[i][c] != q(0)) else {
            continue;
        };
        m.swap(r, pivot_row);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= inv;
        }
        for i in 0..rows {
            if i != r && m[i][c] != q(0) {
                let factor = m[i][c];
                let pivot_row = m[r].clone();
                for (x, p) in m[i].iter_mut().zip(&pivot_row) {
                    *x -= factor * *p;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    pivots
}

/// Exact null space of a rational matrix, one basis vector per free
/// column.
fn null_space_exact(matrix: &[Vec<Q>], cols: usize) -> Vec<Vec<Q>> {
    let mut m: Vec<Vec<Q>> = matrix.to_vec();
    let pivots = rref(&mut m);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let mut basis = Vec::new();
    for &f in &free {
        let mut v = vec![q(0); cols];
        v[f] = q(1);
        for (row, &p) in pivots.iter().enumerate() {
            v[p] = -m[row][f];
        }
        basis.push(v);
    }
    basis
}

/// Exact composite of two relations given by rational spanning sets:
/// match the middle coordinates, then project to the outer ones.
fn compose_exact(
    span1: &[Vec<Q>], // vectors in Q^{du+dv}
    span2: &[Vec<Q>], // vectors in Q^{dv+dw}
    du: usize,
    dv: usize,
    dw: usize,
) -> Vec<Vec<Q>> {
    // middle-matching system over the span coefficients (s, t):
    // (middle of span1·s) − (middle of span2·t) = 0
    let k1 = span1.len();
    let k2 = span2.len();
    let mut system = vec![vec![q(0); k1 + k2]; dv];
    for row in 0..dv {
        for (j, v) in span1.iter().enumerate() {
            system[row][j] = v[du + row];
        }
        for (j, v) in span2.iter().enumerate() {
            system[row][k1 + j] = -v[row];
        }
    }
    let coeffs = null_space_exact(&system, k1 + k2);
    coeffs
        .into_iter()
        .map(|st| {
            let mut out = vec![q(0); du + dw];
            for (j, v) in span1.iter().enumerate() {
                for i in 0..du {
                    out[i] += st[j] * v[i];
                }
            }
            for (j, v) in span2.iter().enumerate() {
                for i in 0..dw {
                    out[du + i] += st[k1 + j] * v[dv + i];
                }
            }
            out
        })
        .collect()
}

fn graph_span(a: &[Vec<i64>], n_in: usize, n_out: usize) -> Vec<Vec<Q>> {
    (0..n_in)
        .map(|j| {
            let mut v = vec![q(0); n_in + n_out];
            v[j] = q(1);
            for i in 0..n_out {
                v[n_in + i] = q(a[i][j]);
            }
            v
        })
        .collect()
}

fn to_float_rel(span: &[Vec<Q>], du: usize, dw: usize) -> LinRel {
    let mut m = DMatrix::zeros(du + dw, span.len());
    for (col, v) in span.iter().enumerate() {
        for (row, x) in v.iter().enumerate() {
            m[(row, col)] = *x.numer() as f64 / *x.denom() as f64;
        }
    }
    LinRel::new(du, dw, Subspace::from_span(&m, DEFAULT_RANK_TOL)).unwrap()
}

#[test]
fn float_composition_matches_exact_rational_elimination() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..60 {
        let du = rng.gen_range(1..=3);
        let dv = rng.gen_range(1..=3);
        let dw = rng.gen_range(1..=3);
        let a: Vec<Vec<i64>> = (0..dv)
            .map(|_| (0..du).map(|_| rng.gen_range(-3..=3)).collect())
            .collect();
        let b: Vec<Vec<i64>> = (0..dw)
            .map(|_| (0..dv).map(|_| rng.gen_range(-3..=3)).collect())
            .collect();

        // float route
        let fa = DMatrix::from_fn(dv, du, |i, j| a[i][j] as f64);
        let fb = DMatrix::from_fn(dw, dv, |i, j| b[i][j] as f64);
        let float_composite =
            compose_rel(&from_graph_of_map(&fa), &from_graph_of_map(&fb), DEFAULT_RANK_TOL)
                .unwrap();

        // exact route
        let span1 = graph_span(&a, du, dv);
        let span2 = graph_span(&b, dv, dw);
        let exact_span = compose_exact(&span1, &span2, du, dv, dw);
        let exact_rel = to_float_rel(&exact_span, du, dw);

        assert!(
            equal_rel(&float_composite, &exact_rel, 1e-8),
            "trial {trial}: dims {} vs {}",
            float_composite.dim(),
            exact_rel.dim()
        );
    }
}

#[test]
fn float_composition_matches_exact_on_constraint_relations() {
    // relations given as null spaces of integer constraint blocks
    let mut rng = ChaCha8Rng::seed_from_u64(4096);
    for trial in 0..40 {
        let du = rng.gen_range(1..=3);
        let dv = rng.gen_range(1..=3);
        let dw = rng.gen_range(1..=3);
        let rows1 = rng.gen_range(1..=2);
        let rows2 = rng.gen_range(1..=2);
        let c1: Vec<Vec<i64>> = (0..rows1)
            .map(|_| (0..du + dv).map(|_| rng.gen_range(-2..=2)).collect())
            .collect();
        let c2: Vec<Vec<i64>> = (0..rows2)
            .map(|_| (0..dv + dw).map(|_| rng.gen_range(-2..=2)).collect())
            .collect();

        // float route: relations from constraint null spaces
        let fc1 = DMatrix::from_fn(rows1, du + dv, |i, j| c1[i][j] as f64);
        let fc2 = DMatrix::from_fn(rows2, dv + dw, |i, j| c2[i][j] as f64);
        let l1 = LinRel::new(du, dv, Subspace::null_space(&fc1, DEFAULT_RANK_TOL)).unwrap();
        let l2 = LinRel::new(dv, dw, Subspace::null_space(&fc2, DEFAULT_RANK_TOL)).unwrap();
        let float_composite = compose_rel(&l1, &l2, DEFAULT_RANK_TOL).unwrap();

        // exact route
        let q1: Vec<Vec<Q>> = c1
            .iter()
            .map(|row| row.iter().map(|&x| q(x)).collect())
            .collect();
        let q2: Vec<Vec<Q>> = c2
            .iter()
            .map(|row| row.iter().map(|&x| q(x)).collect())
            .collect();
        let span1 = null_space_exact(&q1, du + dv);
        let span2 = null_space_exact(&q2, dv + dw);
        let exact_span = compose_exact(&span1, &span2, du, dv, dw);
        let exact_rel = to_float_rel(&exact_span, du, dw);

        assert!(
            equal_rel(&float_composite, &exact_rel, 1e-8),
            "trial {trial}: dims {} vs {}",
            float_composite.dim(),
            exact_rel.dim()
        );
    }
}

#[test]
fn exact_oracle_membership_sanity() {
    // spot-check the oracle itself: graph(B·A) points lie in the
    // composite span for a hand-made example
    let a = vec![vec![1, 2], vec![0, 1], vec![1, 0]]; // A : R² → R³
    let b = vec![vec![1, 0, 1], vec![2, 1, 0]]; // B : R³ → R²
    let span1 = graph_span(&a, 2, 3);
    let span2 = graph_span(&b, 3, 2);
    let composite = compose_exact(&span1, &span2, 2, 3, 2);
    let rel = to_float_rel(&composite, 2, 2);
    // B·A = [[2, 2], [2, 5]]
    let point = DVector::from_column_slice(&[1.0, 0.0, 2.0, 2.0]);
    assert!(rel.contains(&point, 1e-10));
    let point = DVector::from_column_slice(&[0.0, 1.0, 2.0, 5.0]);
    assert!(rel.contains(&point, 1e-10));
    assert_eq!(rel.dim(), 2);
}
