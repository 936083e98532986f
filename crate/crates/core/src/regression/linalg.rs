//! Determinant and adjugate of small square matrices.
//!
//! Closed forms up to 3×3; larger sizes use Laplace expansion along the
//! first row. No pivoting, so the adjugate identity `M·adj(M) = det(M)·I`
//! holds without a division by the determinant.

use nalgebra::DMatrix;

pub fn determinant(m: &DMatrix<f64>) -> f64 {
    assert!(m.is_square(), "determinant of a non-square matrix");
    match m.nrows() {
        0 => 1.0,
        1 => m[(0, 0)],
        2 => m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)],
        3 => det3(m),
        n => {
            let mut det = 0.0;
            for j in 0..n {
                let a = m[(0, j)];
                if a == 0.0 {
                    continue;
                }
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                det += sign * a * determinant(&minor(m, 0, j));
            }
            det
        }
    }
}

fn det3(m: &DMatrix<f64>) -> f64 {
    m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
        - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
        + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)])
}

/// `m` with row `r` and column `c` removed.
pub fn minor(m: &DMatrix<f64>, r: usize, c: usize) -> DMatrix<f64> {
    let n = m.nrows();
    DMatrix::from_fn(n - 1, n - 1, |i, j| {
        let ii = if i < r { i } else { i + 1 };
        let jj = if j < c { j } else { j + 1 };
        m[(ii, jj)]
    })
}

/// Transpose of the cofactor matrix.
pub fn adjugate(m: &DMatrix<f64>) -> DMatrix<f64> {
    assert!(m.is_square(), "adjugate of a non-square matrix");
    let n = m.nrows();
    match n {
        0 => DMatrix::zeros(0, 0),
        1 => DMatrix::from_element(1, 1, 1.0),
        2 => DMatrix::from_row_slice(2, 2, &[m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]]),
        3 => {
            let c = |i: usize, j: usize| m[(i, j)];
            DMatrix::from_row_slice(
                3,
                3,
                &[
                    c(1, 1) * c(2, 2) - c(1, 2) * c(2, 1),
                    c(0, 2) * c(2, 1) - c(0, 1) * c(2, 2),
                    c(0, 1) * c(1, 2) - c(0, 2) * c(1, 1),
                    c(1, 2) * c(2, 0) - c(1, 0) * c(2, 2),
                    c(0, 0) * c(2, 2) - c(0, 2) * c(2, 0),
                    c(0, 2) * c(1, 0) - c(0, 0) * c(1, 2),
                    c(1, 0) * c(2, 1) - c(1, 1) * c(2, 0),
                    c(0, 1) * c(2, 0) - c(0, 0) * c(2, 1),
                    c(0, 0) * c(1, 1) - c(0, 1) * c(1, 0),
                ],
            )
        }
        _ => DMatrix::from_fn(n, n, |i, j| {
            // adj[i][j] = cofactor[j][i]
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            sign * determinant(&minor(m, j, i))
        }),
    }
}
