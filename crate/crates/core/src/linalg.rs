//! Dense linear-algebra kernels shared by the solvers.
//!
//! Matrix products go through `matrixmultiply` directly on column-major
//! buffers; factorizations (SVD, symmetric eigen, Cholesky) come from
//! `nalgebra`.

use nalgebra::{DMatrix, SymmetricEigen, SVD};

/// Relative cutoff applied to singular values in pseudo-inverses.
pub const PINV_RTOL: f64 = 1e-10;

/// Column-major `m x k` by `k x n` product. `a_t`/`b_t` read the operand as the
/// transpose of the stored buffer (stored as `k x m` / `n x k`).
pub(crate) fn gemm(m: usize, k: usize, n: usize, a: &[f64], a_t: bool, b: &[f64], b_t: bool) -> Vec<f64> {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    let mut c = vec![0.0; m * n];
    if m == 0 || n == 0 {
        return c;
    }
    if k == 0 {
        return c;
    }
    let (rsa, csa) = if a_t { (k as isize, 1) } else { (1, m as isize) };
    let (rsb, csb) = if b_t { (n as isize, 1) } else { (1, k as isize) };
    // SAFETY: the slices hold exactly m*k, k*n and m*n elements and the strides
    // address them in bounds for the given shapes.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            0.0,
            c.as_mut_ptr(),
            1,
            m as isize,
        );
    }
    c
}

pub(crate) fn matmul(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(a.ncols(), b.nrows(), "matmul: inner dimensions differ");
    let data = gemm(a.nrows(), a.ncols(), b.ncols(), a.as_slice(), false, b.as_slice(), false);
    DMatrix::from_vec(a.nrows(), b.ncols(), data)
}

/// Moore-Penrose pseudo-inverse; singular values below `rtol * sigma_max` are
/// treated as zero.
pub fn pinv(a: &DMatrix<f64>, rtol: f64) -> DMatrix<f64> {
    let (r, c) = a.shape();
    if r == 0 || c == 0 {
        return DMatrix::zeros(c, r);
    }
    let svd = SVD::new(a.clone(), true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return DMatrix::zeros(c, r);
    }
    let cut = rtol * smax;
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let mut scaled_u = u;
    for (j, &s) in svd.singular_values.iter().enumerate() {
        let inv = if s > cut { 1.0 / s } else { 0.0 };
        scaled_u.column_mut(j).scale_mut(inv);
    }
    // V diag(1/s) Uᵀ
    let data = gemm(
        c,
        v_t.nrows(),
        r,
        v_t.as_slice(),
        true,
        scaled_u.as_slice(),
        true,
    );
    DMatrix::from_vec(c, r, data)
}

/// Pseudo-inverse of a symmetric positive semidefinite matrix via its
/// eigendecomposition; eigenvalues below `rtol * lambda_max` are dropped.
pub fn pinv_psd(a: &DMatrix<f64>, rtol: f64) -> DMatrix<f64> {
    let n = a.nrows();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let eig = SymmetricEigen::new(a.clone());
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    if lmax <= 0.0 {
        return DMatrix::zeros(n, n);
    }
    let cut = rtol * lmax;
    let q = eig.eigenvectors;
    let mut scaled = q.clone();
    for (j, &l) in eig.eigenvalues.iter().enumerate() {
        let inv = if l > cut { 1.0 / l } else { 0.0 };
        scaled.column_mut(j).scale_mut(inv);
    }
    let data = gemm(n, n, n, scaled.as_slice(), false, q.as_slice(), true);
    DMatrix::from_vec(n, n, data)
}

/// Singular values in descending order.
pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    SVD::new(a.clone(), false, false).singular_values.iter().copied().collect()
}

/// Number of singular values above `rtol * sigma_max`.
pub fn numerical_rank(a: &DMatrix<f64>, rtol: f64) -> usize {
    let sv = singular_values(a);
    let smax = sv.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rtol * smax).count()
}

/// Singular value thresholding `U max(S - mu, 0) Vᵀ`, the proximal operator of
/// `mu * ||.||_*`. Also returns the nuclear norm of the result.
pub fn svt_with_norm(a: &DMatrix<f64>, mu: f64) -> (DMatrix<f64>, f64) {
    assert!(mu >= 0.0, "threshold must be non-negative");
    let (r, c) = a.shape();
    if r == 0 || c == 0 {
        return (a.clone(), 0.0);
    }
    let svd = SVD::new_unordered(a.clone(), true, true);
    let mut u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let mut nuclear = 0.0;
    for (j, &s) in svd.singular_values.iter().enumerate() {
        let shrunk = (s - mu).max(0.0);
        nuclear += shrunk;
        u.column_mut(j).scale_mut(shrunk);
    }
    (matmul(&u, &v_t), nuclear)
}

/// Singular value thresholding `D_mu(a)`.
pub fn svt(a: &DMatrix<f64>, mu: f64) -> DMatrix<f64> {
    svt_with_norm(a, mu).0
}

pub fn nuclear_norm(a: &DMatrix<f64>) -> f64 {
    singular_values(a).iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(r: usize, c: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
    }

    fn naive_mul(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(a.nrows(), b.ncols(), |i, j| {
            (0..a.ncols()).map(|p| a[(i, p)] * b[(p, j)]).sum()
        })
    }

    #[test]
    fn gemm_transposes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random(7, 9, &mut rng);
        let b = random(9, 8, &mut rng);
        let expect = naive_mul(&a, &b);
        assert!((matmul(&a, &b) - &expect).norm() < 1e-12);

        let at = a.transpose();
        let bt = b.transpose();
        let c = DMatrix::from_vec(7, 8, gemm(7, 9, 8, at.as_slice(), true, bt.as_slice(), true));
        assert!((c - &expect).norm() < 1e-12);

    }

    #[test]
    fn pinv_satisfies_penrose_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let l = random(6, 2, &mut rng);
        let r = random(2, 5, &mut rng);
        let a = naive_mul(&l, &r); // rank 2
        let p = pinv(&a, PINV_RTOL);
        assert!((naive_mul(&naive_mul(&a, &p), &a) - &a).norm() < 1e-10);
        assert!((naive_mul(&naive_mul(&p, &a), &p) - &p).norm() < 1e-10);

        let g = naive_mul(&a.transpose(), &a);
        let pg = pinv_psd(&g, PINV_RTOL);
        assert!((naive_mul(&naive_mul(&g, &pg), &g) - &g).norm() < 1e-8 * g.norm());
    }

    #[test]
    fn svt_diagonal_case_is_exact() {
        let a = DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 1.0]);
        let out = svt(&a, 2.0);
        let expect = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!((out - expect).abs().max() < 1e-15);
    }

    #[test]
    fn svt_zero_threshold_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random(4, 6, &mut rng);
        assert!((svt(&a, 0.0) - &a).norm() < 1e-12);
    }

    #[test]
    fn rank_detection() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let l = random(8, 3, &mut rng);
        let r = random(3, 7, &mut rng);
        assert_eq!(numerical_rank(&naive_mul(&l, &r), 1e-8), 3);
        assert_eq!(numerical_rank(&DMatrix::zeros(3, 3), 1e-8), 0);
    }
}
