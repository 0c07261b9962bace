//! Dense complex linear algebra: LU factorization with partial pivoting,
//! solves, inversion, and a cache-friendly matrix product on flat row-major
//! storage. Matrix dimensions here are small (chain length N <= ~64) or a
//! single multi-thousand steady-state block solve, neither of which warrants
//! an external BLAS/LAPACK link.

use ndarray::Array2;

use crate::C64;

/// In-place LU with partial pivoting on a flat row-major n x n matrix.
/// Returns the pivot permutation, or None when a pivot collapses to zero
/// (matrix singular to working precision).
pub fn lu_factor(a: &mut [C64], n: usize) -> Option<Vec<usize>> {
    debug_assert_eq!(a.len(), n * n);
    let mut piv: Vec<usize> = (0..n).collect();
    for col in 0..n {
        let mut best = col;
        let mut best_mag = a[col * n + col].norm_sqr();
        for row in (col + 1)..n {
            let mag = a[row * n + col].norm_sqr();
            if mag > best_mag {
                best = row;
                best_mag = mag;
            }
        }
        if !(best_mag > 0.0) || !best_mag.is_finite() {
            return None;
        }
        if best != col {
            piv.swap(col, best);
            for j in 0..n {
                a.swap(col * n + j, best * n + j);
            }
        }
        let inv_pivot = C64::new(1.0, 0.0) / a[col * n + col];
        for row in (col + 1)..n {
            let factor = a[row * n + col] * inv_pivot;
            a[row * n + col] = factor;
            if factor != C64::new(0.0, 0.0) {
                let (upper, lower) = a.split_at_mut(row * n);
                let src = &upper[col * n + col + 1..col * n + n];
                let dst = &mut lower[col + 1..n];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d -= factor * s;
                }
            }
        }
    }
    Some(piv)
}

/// Solves LU x = P b in place; `b` holds the permuted-and-solved vector on exit.
pub fn lu_solve(lu: &[C64], piv: &[usize], n: usize, b: &mut [C64]) {
    debug_assert_eq!(b.len(), n);
    let mut x = vec![C64::new(0.0, 0.0); n];
    for i in 0..n {
        x[i] = b[piv[i]];
    }
    // Forward: L has unit diagonal.
    for i in 1..n {
        let mut acc = x[i];
        for j in 0..i {
            acc -= lu[i * n + j] * x[j];
        }
        x[i] = acc;
    }
    // Backward.
    for i in (0..n).rev() {
        let mut acc = x[i];
        for j in (i + 1)..n {
            acc -= lu[i * n + j] * x[j];
        }
        x[i] = acc / lu[i * n + i];
    }
    b.copy_from_slice(&x);
}

/// Inverse of a flat row-major n x n matrix. None if singular.
pub fn invert_flat(a: &[C64], n: usize) -> Option<Vec<C64>> {
    let mut lu = a.to_vec();
    let piv = lu_factor(&mut lu, n)?;
    let mut inv = vec![C64::new(0.0, 0.0); n * n];
    let mut col = vec![C64::new(0.0, 0.0); n];
    for j in 0..n {
        col.iter_mut().for_each(|c| *c = C64::new(0.0, 0.0));
        col[j] = C64::new(1.0, 0.0);
        lu_solve(&lu, &piv, n, &mut col);
        for i in 0..n {
            inv[i * n + j] = col[i];
        }
    }
    Some(inv)
}

pub fn invert(a: &Array2<C64>) -> Option<Array2<C64>> {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    let flat: Vec<C64> = a.iter().copied().collect();
    let inv = invert_flat(&flat, n)?;
    Some(Array2::from_shape_vec((n, n), inv).expect("square shape"))
}

/// out = a * b on flat row-major n x n buffers (i-k-j loop order keeps the
/// inner accumulation contiguous).
pub fn matmul_into(a: &[C64], b: &[C64], out: &mut [C64], n: usize) {
    out.iter_mut().for_each(|c| *c = C64::new(0.0, 0.0));
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == C64::new(0.0, 0.0) {
                continue;
            }
            let brow = &b[k * n..(k + 1) * n];
            let orow = &mut out[i * n..(i + 1) * n];
            for (o, bv) in orow.iter_mut().zip(brow) {
                *o += aik * bv;
            }
        }
    }
}

/// Conjugate transpose on flat row-major storage.
pub fn dagger_into(a: &[C64], out: &mut [C64], n: usize) {
    for i in 0..n {
        for j in 0..n {
            out[j * n + i] = a[i * n + j].conj();
        }
    }
}

/// Solves A x = b for one right-hand side; None if singular.
pub fn solve(a: &Array2<C64>, b: &[C64]) -> Option<Vec<C64>> {
    let n = a.nrows();
    let mut lu: Vec<C64> = a.iter().copied().collect();
    let piv = lu_factor(&mut lu, n)?;
    let mut x = b.to_vec();
    lu_solve(&lu, &piv, n, &mut x);
    Some(x)
}

/// Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations,
/// returned in ascending order. Only the lower triangle plus diagonal is
/// read; the strict upper triangle is assumed conjugate-mirrored. O(n^3)
/// per sweep, which is fine for the density matrices and few-particle
/// Hamiltonian blocks this library diagonalizes (n up to a few hundred).
pub fn hermitian_eigenvalues(a: &Array2<C64>) -> Vec<f64> {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    if n == 0 {
        return Vec::new();
    }
    // Work on a flat copy, enforcing exact Hermitian symmetry.
    let mut m = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        m[i * n + i] = C64::new(a[[i, i]].re, 0.0);
        for j in 0..i {
            let v = 0.5 * (a[[i, j]] + a[[j, i]].conj());
            m[i * n + j] = v;
            m[j * n + i] = v.conj();
        }
    }
    let scale: f64 = m.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt().max(1.0);
    let tol = 1e-15 * scale;
    for _sweep in 0..60 {
        let mut off = 0.0_f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[p * n + q].norm_sqr();
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                let r = apq.norm();
                if r <= 1e-300 {
                    continue;
                }
                let phase = apq / r;
                let tau = (m[q * n + q].re - m[p * n + p].re) / (2.0 * r);
                // Smaller-angle root of t^2 + 2 tau t - 1 = 0.
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let sp = s * phase;
                // Columns p and q of M <- M J, with J the plane rotation
                // J[p,p]=J[q,q]=c, J[p,q]=s*phase, J[q,p]=-s*conj(phase).
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - sp.conj() * mkq;
                    m[k * n + q] = sp * mkp + c * mkq;
                }
                // Rows p and q of M <- J^dagger M.
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - sp * mqk;
                    m[q * n + k] = sp.conj() * mpk + c * mqk;
                }
                m[p * n + q] = C64::new(0.0, 0.0);
                m[q * n + p] = C64::new(0.0, 0.0);
                m[p * n + p] = C64::new(m[p * n + p].re, 0.0);
                m[q * n + q] = C64::new(m[q * n + q].re, 0.0);
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| m[i * n + i].re).collect();
    eig.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    eig
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn inverts_known_two_by_two() {
        // [[1, i], [0, 2]]^-1 = [[1, -i/2], [0, 1/2]]
        let a = Array2::from_shape_vec((2, 2), vec![c(1., 0.), c(0., 1.), c(0., 0.), c(2., 0.)])
            .unwrap();
        let inv = invert(&a).unwrap();
        assert_abs_diff_eq!(inv[[0, 0]].re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(inv[[0, 1]].im, -0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(inv[[1, 1]].re, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(inv[[1, 0]].norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        // Deterministic pseudo-random well-conditioned matrix (diagonally dominated).
        let n = 12;
        let mut state = 0x2545F4914F6CDD1D_u64;
        let mut rng = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut a = vec![c(0., 0.); n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = c(rng(), rng());
            }
            a[i * n + i] += c(4.0, 1.0);
        }
        let inv = invert_flat(&a, n).unwrap();
        let mut prod = vec![c(0., 0.); n * n];
        matmul_into(&a, &inv, &mut prod, n);
        for i in 0..n {
            for j in 0..n {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(prod[i * n + j].re, expect, epsilon = 1e-11);
                assert_abs_diff_eq!(prod[i * n + j].im, 0.0, epsilon = 1e-11);
            }
        }
    }

    #[test]
    fn detects_singular() {
        let a = Array2::from_shape_vec(
            (2, 2),
            vec![c(1., 0.), c(2., 0.), c(2., 0.), c(4., 0.)],
        )
        .unwrap();
        assert!(invert(&a).is_none());
    }

    #[test]
    fn solve_matches_inverse() {
        let a = Array2::from_shape_vec(
            (3, 3),
            vec![
                c(3., 0.),
                c(1., 1.),
                c(0., 0.),
                c(1., -1.),
                c(4., 0.),
                c(0.5, 0.),
                c(0., 0.),
                c(0.5, 0.),
                c(2., 0.),
            ],
        )
        .unwrap();
        let b = vec![c(1., 0.), c(0., 1.), c(2., -1.)];
        let x = solve(&a, &b).unwrap();
        let inv = invert(&a).unwrap();
        for i in 0..3 {
            let mut acc = c(0., 0.);
            for j in 0..3 {
                acc += inv[[i, j]] * b[j];
            }
            assert_abs_diff_eq!((acc - x[i]).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn dagger_is_conjugate_transpose() {
        let a = vec![c(1., 2.), c(3., 4.), c(5., 6.), c(7., 8.)];
        let mut d = vec![c(0., 0.); 4];
        dagger_into(&a, &mut d, 2);
        assert_eq!(d[1], c(5., -6.));
        assert_eq!(d[2], c(3., -4.));
        assert_eq!(d[0], c(1., -2.));
    }

    #[test]
    fn jacobi_matches_two_level_closed_form() {
        // [[e1, v], [conj v, e2]] has eigenvalues (e1+e2)/2 +- sqrt(d^2+|v|^2).
        let (e1, e2) = (0.3, -0.7);
        let v = c(0.4, -0.2);
        let a =
            Array2::from_shape_vec((2, 2), vec![c(e1, 0.), v, v.conj(), c(e2, 0.)]).unwrap();
        let d = 0.5 * (e1 - e2);
        let split = (d * d + v.norm_sqr()).sqrt();
        let eig = hermitian_eigenvalues(&a);
        assert_abs_diff_eq!(eig[0], 0.5 * (e1 + e2) - split, epsilon = 1e-13);
        assert_abs_diff_eq!(eig[1], 0.5 * (e1 + e2) + split, epsilon = 1e-13);
    }

    #[test]
    fn jacobi_recovers_spectrum_of_conjugated_diagonal() {
        // U D U^dagger with U unitary has exactly the eigenvalues of D.
        // Build U as a product of two complex plane rotations on 4 levels.
        let n = 4;
        let want = [-1.5, -0.25, 0.5, 2.0];
        let mut u = vec![c(0., 0.); n * n];
        for i in 0..n {
            u[i * n + i] = c(1., 0.);
        }
        let rotate = |u: &mut Vec<C64>, p: usize, q: usize, th: f64, ph: f64| {
            let (cth, sth) = (th.cos(), th.sin());
            let e = c(ph.cos(), ph.sin());
            for k in 0..n {
                let a = u[k * n + p];
                let b = u[k * n + q];
                u[k * n + p] = cth * a - sth * e.conj() * b;
                u[k * n + q] = sth * e * a + cth * b;
            }
        };
        rotate(&mut u, 0, 2, 0.7, 1.1);
        rotate(&mut u, 1, 3, -0.4, -2.3);
        rotate(&mut u, 0, 3, 1.2, 0.6);
        let mut a = vec![c(0., 0.); n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = c(0., 0.);
                for k in 0..n {
                    acc += u[i * n + k] * want[k] * u[j * n + k].conj();
                }
                a[i * n + j] = acc;
            }
        }
        let a = Array2::from_shape_vec((n, n), a).unwrap();
        let eig = hermitian_eigenvalues(&a);
        for (got, expect) in eig.iter().zip(want.iter()) {
            assert_abs_diff_eq!(got, expect, epsilon = 1e-12);
        }
        // Trace and Frobenius invariants double-check the rotation algebra.
        let tr: f64 = eig.iter().sum();
        assert_abs_diff_eq!(tr, want.iter().sum::<f64>(), epsilon = 1e-12);
    }
}
