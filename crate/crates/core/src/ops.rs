//! Raw multilinear operations on dense tensors.
//!
//! Merged indices follow the little-endian convention, so for the Kronecker
//! family the index of the left operand varies fastest: `kronecker(a, b)` on
//! matrices equals the classical `B ⊗ A`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::gemm;
use crate::tensor::{advance, fold_matrix, DenseTensor, Grouping};

/// Element-wise product.
pub fn hadamard(a: &DenseTensor, b: &DenseTensor) -> Result<DenseTensor> {
    a.zip_with(b, "hadamard product", |x, y| x * y)
}

fn same_order(a: &DenseTensor, b: &DenseTensor, what: &str) -> Result<()> {
    if a.order() != b.order() {
        return Err(Error::shape(format!(
            "{what} needs equal orders, got {} and {}",
            a.order(),
            b.order()
        )));
    }
    Ok(())
}

/// Offsets of every entry of `t` inside a larger tensor with `strides`, where
/// mode `k` of `t` is scaled by `scale[k]` before striding.
fn embedded_offsets(t: &DenseTensor, strides: &[usize], scale: &[usize], skip: Option<usize>) -> Vec<usize> {
    let dims = t.dims();
    let mut idx = vec![0usize; dims.len()];
    let mut out = Vec::with_capacity(t.len());
    for _ in 0..t.len() {
        let off = idx
            .iter()
            .enumerate()
            .filter(|(k, _)| Some(*k) != skip)
            .map(|(k, &i)| i * scale[k] * strides[k])
            .sum();
        out.push(off);
        advance(&mut idx, dims);
    }
    out
}

/// Kronecker product of two tensors of the same order:
/// `C(i_k + j_k I_k)_k = A(i) B(j)`.
pub fn kronecker(a: &DenseTensor, b: &DenseTensor) -> Result<DenseTensor> {
    same_order(a, b, "kronecker product")?;
    let dims: Vec<usize> = a.dims().iter().zip(b.dims()).map(|(i, j)| i * j).collect();
    let mut out = DenseTensor::zeros(&dims);
    let strides = out.strides();
    let ones = vec![1; a.order()];
    let a_off = embedded_offsets(a, &strides, &ones, None);
    let b_off = embedded_offsets(b, &strides, a.dims(), None);
    let data = out.as_mut_slice();
    for (&bv, &bo) in b.as_slice().iter().zip(&b_off) {
        for (&av, &ao) in a.as_slice().iter().zip(&a_off) {
            data[bo + ao] = av * bv;
        }
    }
    Ok(out)
}

/// Mode-`n` Khatri-Rao product: mode `n` is shared (`I_n = J_n`), every other
/// mode is Kronecker-merged. Each mode-`n` slice of the result is the
/// Kronecker product of the matching slices.
pub fn khatri_rao_mode(a: &DenseTensor, b: &DenseTensor, n: usize) -> Result<DenseTensor> {
    same_order(a, b, "mode-n Khatri-Rao product")?;
    a.check_mode(n)?;
    if a.dims()[n] != b.dims()[n] {
        return Err(Error::shape(format!(
            "mode-{n} Khatri-Rao product needs matching mode-{n} dims, got {} and {}",
            a.dims()[n],
            b.dims()[n]
        )));
    }
    let dims: Vec<usize> = a
        .dims()
        .iter()
        .zip(b.dims())
        .enumerate()
        .map(|(k, (i, j))| if k == n { *i } else { i * j })
        .collect();
    let mut out = DenseTensor::zeros(&dims);
    let strides = out.strides();
    let ones = vec![1; a.order()];
    let a_off = embedded_offsets(a, &strides, &ones, None);
    let b_off = embedded_offsets(b, &strides, a.dims(), Some(n));

    // Group entries of `a` by their mode-n index.
    let an = a.dims()[n];
    let a_stride_n = a.strides()[n];
    let b_stride_n = b.strides()[n];
    let mut a_groups: Vec<Vec<usize>> = vec![Vec::new(); an];
    for fa in 0..a.len() {
        a_groups[(fa / a_stride_n) % an].push(fa);
    }
    let data = out.as_mut_slice();
    for (fb, (&bv, &bo)) in b.as_slice().iter().zip(&b_off).enumerate() {
        let jn = (fb / b_stride_n) % an;
        for &fa in &a_groups[jn] {
            data[bo + a_off[fa]] = a.as_slice()[fa] * bv;
        }
    }
    Ok(out)
}

/// Outer product: an order `N + M` tensor with `C(i, j) = A(i) B(j)`.
pub fn outer(a: &DenseTensor, b: &DenseTensor) -> DenseTensor {
    let mut dims = a.dims().to_vec();
    dims.extend_from_slice(b.dims());
    let mut data = Vec::with_capacity(a.len() * b.len());
    for &bv in b.as_slice() {
        data.extend(a.as_slice().iter().map(|&av| av * bv));
    }
    DenseTensor::new(dims, data).expect("outer product shape")
}

/// Mode-`n` product `T x_n M` with `M` of size `J x I_n`.
pub fn mode_n_product(t: &DenseTensor, m: &DMatrix<f64>, n: usize) -> Result<DenseTensor> {
    t.check_mode(n)?;
    if m.ncols() != t.dims()[n] {
        return Err(Error::shape(format!(
            "mode-{n} product needs a matrix with {} columns, got {}",
            t.dims()[n],
            m.ncols()
        )));
    }
    let unfolded = t.matricize_mode(n)?;
    let cols = unfolded.cols();
    let prod = gemm(m.nrows(), m.ncols(), cols, m.as_slice(), false, unfolded.matrix.as_slice(), false);
    let mut dims = t.dims().to_vec();
    dims[n] = m.nrows();
    fold_matrix(&DMatrix::from_vec(m.nrows(), cols, prod), &dims, Grouping::Mode(n))
}

/// Tensor contraction over the listed `(mode of a, mode of b)` pairs.
///
/// The result carries the free modes of `a` followed by the free modes of `b`,
/// each in ascending original order. Contracting every mode of both operands
/// yields a one-entry tensor of shape `[1]`.
pub fn contract(a: &DenseTensor, b: &DenseTensor, pairs: &[(usize, usize)]) -> Result<DenseTensor> {
    let mut used_a = vec![false; a.order()];
    let mut used_b = vec![false; b.order()];
    for &(ma, mb) in pairs {
        a.check_mode(ma)?;
        b.check_mode(mb)?;
        if used_a[ma] || used_b[mb] {
            return Err(Error::invalid(format!("mode listed twice in {pairs:?}")));
        }
        used_a[ma] = true;
        used_b[mb] = true;
        if a.dims()[ma] != b.dims()[mb] {
            return Err(Error::shape(format!(
                "contracted modes ({ma}, {mb}) have dims {} and {}",
                a.dims()[ma],
                b.dims()[mb]
            )));
        }
    }
    let free_a: Vec<usize> = (0..a.order()).filter(|&m| !used_a[m]).collect();
    let free_b: Vec<usize> = (0..b.order()).filter(|&m| !used_b[m]).collect();
    let perm_a: Vec<usize> = free_a.iter().copied().chain(pairs.iter().map(|p| p.0)).collect();
    let perm_b: Vec<usize> = pairs.iter().map(|p| p.1).chain(free_b.iter().copied()).collect();
    let pa = a.permute(&perm_a)?;
    let pb = b.permute(&perm_b)?;
    let m: usize = free_a.iter().map(|&k| a.dims()[k]).product();
    let k: usize = pairs.iter().map(|p| a.dims()[p.0]).product();
    let n: usize = free_b.iter().map(|&q| b.dims()[q]).product();
    let data = gemm(m, k, n, pa.as_slice(), false, pb.as_slice(), false);
    let mut dims: Vec<usize> = free_a.iter().map(|&q| a.dims()[q]).collect();
    dims.extend(free_b.iter().map(|&q| b.dims()[q]));
    if dims.is_empty() {
        dims.push(1);
    }
    DenseTensor::new(dims, data)
}
