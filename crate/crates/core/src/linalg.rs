//! Cyclic Jacobi eigensolver for small Hermitian matrices.

use num_complex::Complex64;

/// Eigenpairs sorted by ascending eigenvalue; `vectors[k]` pairs with `values[k]`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<Complex64>>,
}

/// Eigen-decomposition of a Hermitian `n × n` matrix stored row-major.
/// Only the upper triangle's Hermitian structure is assumed; the input is
/// symmetrised first.
pub fn hermitian_eigen(a: &[Complex64], n: usize) -> HermitianEigen {
    assert_eq!(a.len(), n * n, "matrix must be n x n");
    let mut m: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] = 0.5 * (a[i * n + j] + a[j * n + i].conj());
        }
    }
    let mut v = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        v[i * n + i] = Complex64::new(1.0, 0.0);
    }
    let scale = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale || scale == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut m, &mut v, n, p, q);
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].re.total_cmp(&m[j * n + j].re));
    HermitianEigen {
        values: order.iter().map(|&k| m[k * n + k].re).collect(),
        vectors: order
            .iter()
            .map(|&k| (0..n).map(|i| v[i * n + k]).collect())
            .collect(),
    }
}

/// Real symmetric convenience wrapper.
pub fn symmetric_eigen(a: &[f64], n: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let c: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let e = hermitian_eigen(&c, n);
    (
        e.values,
        e.vectors
            .into_iter()
            .map(|v| v.into_iter().map(|z| z.re).collect())
            .collect(),
    )
}

fn rotate(m: &mut [Complex64], v: &mut [Complex64], n: usize, p: usize, q: usize) {
    let b = m[p * n + q];
    let beta = b.norm();
    if beta == 0.0 {
        return;
    }
    let a = m[p * n + p].re;
    let d = m[q * n + q].re;
    // Remove the phase of the off-diagonal entry, then a real rotation.
    let phase = b / beta;
    let zeta = (d - a) / (2.0 * beta);
    let t = if zeta >= 0.0 {
        1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
    } else {
        -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let e = phase.conj();
    let g = [
        [Complex64::new(c, 0.0), Complex64::new(s, 0.0)],
        [-s * e, c * e],
    ];
    // m <- m G
    for i in 0..n {
        let (xp, xq) = (m[i * n + p], m[i * n + q]);
        m[i * n + p] = xp * g[0][0] + xq * g[1][0];
        m[i * n + q] = xp * g[0][1] + xq * g[1][1];
        let (yp, yq) = (v[i * n + p], v[i * n + q]);
        v[i * n + p] = yp * g[0][0] + yq * g[1][0];
        v[i * n + q] = yp * g[0][1] + yq * g[1][1];
    }
    // m <- Gᴴ m
    for j in 0..n {
        let (xp, xq) = (m[p * n + j], m[q * n + j]);
        m[p * n + j] = g[0][0].conj() * xp + g[1][0].conj() * xq;
        m[q * n + j] = g[0][1].conj() * xp + g[1][1].conj() * xq;
    }
    m[p * n + q] = Complex64::new(0.0, 0.0);
    m[q * n + p] = Complex64::new(0.0, 0.0);
    m[p * n + p].im = 0.0;
    m[q * n + q].im = 0.0;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn reconstruct_error(a: &[Complex64], n: usize, e: &HermitianEigen) -> f64 {
        let mut worst: f64 = 0.0;
        for (lambda, vec) in e.values.iter().zip(&e.vectors) {
            for i in 0..n {
                let av: Complex64 = (0..n).map(|j| a[i * n + j] * vec[j]).sum();
                worst = worst.max((av - lambda * vec[i]).norm());
            }
        }
        worst
    }

    #[test]
    fn two_by_two_closed_form() {
        // [[2, 1+i], [1-i, 3]]: eigenvalues (5 ± √(1 + 8))/2 = 1 and 4.
        let a = [c(2.0, 0.0), c(1.0, 1.0), c(1.0, -1.0), c(3.0, 0.0)];
        let e = hermitian_eigen(&a, 2);
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] - 4.0).abs() < 1e-14);
        assert!(reconstruct_error(&a, 2, &e) < 1e-13);
    }

    #[test]
    fn rank_one_outer_product() {
        let u = [c(1.0, 0.0), c(0.0, 1.0), c(-0.5, 0.5)];
        let n = 3;
        let mut a = vec![c(0.0, 0.0); 9];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = u[i] * u[j].conj();
            }
        }
        let e = hermitian_eigen(&a, n);
        let nu: f64 = u.iter().map(|z| z.norm_sqr()).sum();
        assert!(e.values[0].abs() < 1e-14 && e.values[1].abs() < 1e-14);
        assert!((e.values[2] - nu).abs() < 1e-14);
        assert!(reconstruct_error(&a, n, &e) < 1e-13);
        // Eigenvectors are orthonormal.
        for i in 0..n {
            for j in 0..n {
                let ip: Complex64 = (0..n)
                    .map(|k| e.vectors[i][k].conj() * e.vectors[j][k])
                    .sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((ip - want).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn real_symmetric_wrapper() {
        let a = [4.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 2.0];
        let (vals, vecs) = symmetric_eigen(&a, 3);
        assert!((vals.iter().sum::<f64>() - 9.0).abs() < 1e-13);
        for (l, v) in vals.iter().zip(&vecs) {
            for i in 0..3 {
                let av: f64 = (0..3).map(|j| a[i * 3 + j] * v[j]).sum();
                assert!((av - l * v[i]).abs() < 1e-13);
            }
        }
    }
}
