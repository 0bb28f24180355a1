//! Eigendecomposition of small complex Hermitian matrices.
//!
//! Cyclic Jacobi with complex rotations. CPSD matrices are m x m with m
//! equal to the sensor count (3 or 4 here), so a dense Jacobi sweep is both
//! simpler and faster than a general SVD. For Hermitian PSD input the
//! singular values equal the eigenvalue magnitudes.

use rustfft::num_complex::Complex64;

const MAX_SWEEPS: usize = 40;

/// Eigenvalues of a Hermitian matrix (row-major, length `m * m`).
///
/// Only the upper triangle and the real part of the diagonal are read; the
/// caller is expected to have validated Hermitian symmetry already.
pub fn hermitian_eigenvalues(mat: &[Complex64], m: usize) -> Vec<f64> {
    let (vals, _) = jacobi(mat, m, false);
    vals
}

/// Full eigendecomposition: `(eigenvalues, eigenvectors)` with eigenvectors
/// stored column-major in a row-major `m * m` buffer (`vecs[r * m + c]` is
/// component `r` of eigenvector `c`).
pub fn hermitian_eigen(mat: &[Complex64], m: usize) -> (Vec<f64>, Vec<Complex64>) {
    let (vals, vecs) = jacobi(mat, m, true);
    (vals, vecs.expect("vectors requested"))
}

fn jacobi(mat: &[Complex64], m: usize, want_vectors: bool) -> (Vec<f64>, Option<Vec<Complex64>>) {
    assert_eq!(mat.len(), m * m, "matrix buffer size mismatch");
    let mut a = mat.to_vec();
    let mut v = if want_vectors {
        let mut id = vec![Complex64::new(0.0, 0.0); m * m];
        for i in 0..m {
            id[i * m + i] = Complex64::new(1.0, 0.0);
        }
        Some(id)
    } else {
        None
    };

    if m > 1 {
        let scale: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1e-300);
        let tol = 1e-15 * scale;
        for _ in 0..MAX_SWEEPS {
            let off: f64 = offdiag_norm(&a, m);
            if off <= tol {
                break;
            }
            for p in 0..m - 1 {
                for q in p + 1..m {
                    rotate(&mut a, v.as_deref_mut(), m, p, q);
                }
            }
        }
    }

    let vals: Vec<f64> = (0..m).map(|i| a[i * m + i].re).collect();
    (vals, v)
}

fn offdiag_norm(a: &[Complex64], m: usize) -> f64 {
    let mut s = 0.0;
    for p in 0..m {
        for q in p + 1..m {
            s += a[p * m + q].norm_sqr();
        }
    }
    (2.0 * s).sqrt()
}

/// One complex Jacobi rotation annihilating `a[p][q]`.
fn rotate(a: &mut [Complex64], mut v: Option<&mut [Complex64]>, m: usize, p: usize, q: usize) {
    let apq = a[p * m + q];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    // Unit phase of the off-diagonal entry; for real input this is +/-1.
    let phase = apq / r;
    let app = a[p * m + p].re;
    let aqq = a[q * m + q].re;
    let tau = (aqq - app) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // a[k][p], a[k][q] column update with J = [[c, s*phase], [-s*conj(phase), c]];
    // rows follow from Hermitian symmetry.
    let sp = phase * s;
    for k in 0..m {
        if k == p || k == q {
            continue;
        }
        let akp = entry(a, m, k, p);
        let akq = entry(a, m, k, q);
        let new_kp = akp * c - akq * sp.conj();
        let new_kq = akp * sp + akq * c;
        set_herm(a, m, k, p, new_kp);
        set_herm(a, m, k, q, new_kq);
    }
    let new_pp = c * c * app - 2.0 * c * s * r + s * s * aqq;
    let new_qq = s * s * app + 2.0 * c * s * r + c * c * aqq;
    a[p * m + p] = Complex64::new(new_pp, 0.0);
    a[q * m + q] = Complex64::new(new_qq, 0.0);
    a[p * m + q] = Complex64::new(0.0, 0.0);
    a[q * m + p] = Complex64::new(0.0, 0.0);

    if let Some(vecs) = v.as_deref_mut() {
        for k in 0..m {
            let vkp = vecs[k * m + p];
            let vkq = vecs[k * m + q];
            vecs[k * m + p] = vkp * c - vkq * sp.conj();
            vecs[k * m + q] = vkp * sp + vkq * c;
        }
    }
}

/// Read `a[i][j]`, resolving through the stored upper triangle.
fn entry(a: &[Complex64], m: usize, i: usize, j: usize) -> Complex64 {
    if i <= j {
        a[i * m + j]
    } else {
        a[j * m + i].conj()
    }
}

fn set_herm(a: &mut [Complex64], m: usize, i: usize, j: usize, val: Complex64) {
    if i <= j {
        a[i * m + j] = val;
        a[j * m + i] = val.conj();
    } else {
        a[j * m + i] = val.conj();
        a[i * m + j] = val;
    }
}
