//! Small dense linear algebra: vector helpers and a symmetric eigensolver
//! sized for the low-dimensional data this crate works with.

use crate::error::{NcgError, Result};

/// Dot product.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm.
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Squared Euclidean distance.
pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

/// Euclidean distance.
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist_sq(a, b).sqrt()
}

/// `a - b` as a new vector.
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `a + s * b` as a new vector.
pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

/// Checks that every coordinate is finite.
pub fn check_finite(x: &[f64]) -> Result<()> {
    match x.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(NcgError::NonFiniteInput { index }),
        None => Ok(()),
    }
}

/// Top singular values and right singular vectors of a row-major `rows × d`
/// matrix, descending by singular value.
///
/// Computed from the eigendecomposition of the `d × d` Gram matrix `MᵀM`
/// by cyclic Jacobi rotations, which is exact enough (off-diagonal driven
/// below `1e-14` of the matrix scale) and has no dependencies. Returns
/// `count` pairs `(s_m, v_m)` with `s_m = sqrt(eigenvalue)` and `v_m`
/// orthonormal.
pub fn top_singular_pairs(matrix: &[Vec<f64>], count: usize) -> Result<Vec<(f64, Vec<f64>)>> {
    let d = matrix.first().map(|r| r.len()).unwrap_or(0);
    if count > d {
        // Only d singular values exist; anything past them is zero.
        return Err(NcgError::DegenerateSpectrum { index: d });
    }
    let mut gram = vec![vec![0.0; d]; d];
    for row in matrix {
        for a in 0..d {
            for b in a..d {
                gram[a][b] += row[a] * row[b];
            }
        }
    }
    for a in 0..d {
        for b in 0..a {
            gram[a][b] = gram[b][a];
        }
    }
    let (eigvals, eigvecs) = jacobi_eigen(&gram);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eigvals[b].partial_cmp(&eigvals[a]).unwrap());
    let mut pairs = Vec::with_capacity(count);
    for &idx in order.iter().take(count) {
        let s = eigvals[idx].max(0.0).sqrt();
        pairs.push((s, eigvecs.iter().map(|row| row[idx]).collect()));
    }
    Ok(pairs)
}

/// Eigenvalues and eigenvectors of a symmetric matrix via cyclic Jacobi
/// sweeps. Returns `(values, vectors)` with eigenvector `k` in column `k`
/// of `vectors`.
fn jacobi_eigen(sym: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let d = sym.len();
    let mut a: Vec<Vec<f64>> = sym.to_vec();
    let mut v = vec![vec![0.0; d]; d];
    for i in 0..d {
        v[i][i] = 1.0;
    }
    let scale: f64 = sym
        .iter()
        .flat_map(|r| r.iter())
        .map(|x| x.abs())
        .fold(0.0, f64::max)
        .max(1.0);
    for _sweep in 0..64 {
        let off: f64 = (0..d)
            .flat_map(|p| ((p + 1)..d).map(move |q| (p, q)))
            .map(|(p, q)| a[p][q] * a[p][q])
            .sum();
        if off.sqrt() <= 1e-14 * scale {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                if a[p][q].abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..d {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..d {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..d).map(|i| a[i][i]).collect(), v)
}
