//! Test-only oracles. None of these share code with the library paths they check.

#![allow(dead_code)]

use lapqbe_core::lattice::{BoundaryCondition, LaplacianSpec};
use lapqbe_core::simulator::{run, StateVector};
use lapqbe_core::Circuit;
use nalgebra::DMatrix;

/// `h²·L` for one axis, built from the ghost-point definition of each
/// boundary: periodic wraps, Dirichlet ghosts are zero, Neumann ghosts
/// mirror the boundary value.
pub fn brute_stencil(bc: BoundaryCondition, points: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(points, points);
    for j in 0..points {
        m[(j, j)] -= 2.0;
        for step in [-1i64, 1] {
            let k = j as i64 + step;
            if (0..points as i64).contains(&k) {
                m[(j, k as usize)] += 1.0;
                continue;
            }
            match bc {
                BoundaryCondition::Periodic => m[(j, k.rem_euclid(points as i64) as usize)] += 1.0,
                BoundaryCondition::Dirichlet => {}
                BoundaryCondition::Neumann => m[(j, j)] += 1.0,
            }
        }
    }
    m
}

/// Scaled operator by literal Kronecker products, last axis leftmost.
pub fn brute_scaled_nd(spec: &LaplacianSpec) -> DMatrix<f64> {
    let inv: Vec<f64> = spec.axes().iter().map(|a| a.spacing.powi(-2)).collect();
    let total: f64 = inv.iter().sum();
    let dims: Vec<usize> = spec.axes().iter().map(|a| 1usize << a.n_qubits).collect();
    let n: usize = dims.iter().product();
    let mut out = DMatrix::zeros(n, n);
    for (d, axis) in spec.axes().iter().enumerate() {
        let mut term = DMatrix::<f64>::identity(1, 1);
        for k in (0..spec.dims()).rev() {
            let factor = if k == d {
                brute_stencil(axis.bc, dims[d]) * (inv[d] / total / 4.0)
            } else {
                DMatrix::identity(dims[k], dims[k])
            };
            term = term.kronecker(&factor);
        }
        out += term;
    }
    out
}

/// Dense unitary of a circuit, column `i` = `U e_i`. Complex entries as (re, im).
pub fn dense_unitary(c: &Circuit) -> DMatrix<num_complex::Complex64> {
    let dim = 1usize << c.num_qubits();
    let mut u = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        let out = run(c, StateVector::basis(c.num_qubits(), i)).unwrap();
        for (r, a) in out.amplitudes().iter().enumerate() {
            u[(r, i)] = *a;
        }
    }
    u
}

/// Cyclic shift permutation `|j⟩ → |j + step mod N⟩`.
pub fn shift_permutation(points: usize, step: i64) -> DMatrix<f64> {
    let mut p = DMatrix::zeros(points, points);
    for j in 0..points {
        let k = (j as i64 + step).rem_euclid(points as i64) as usize;
        p[(k, j)] = 1.0;
    }
    p
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
