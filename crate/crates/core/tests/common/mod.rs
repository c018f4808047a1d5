//! Scalar-loop oracles and random generators shared by the integration tests.
//!
//! Oracles only read raw column-major buffers and never call the library's
//! own operations.

#![allow(dead_code)]

use mtnr::{DenseTensor, RankMatrix, TnComponent};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

pub fn flat(dims: &[usize], idx: &[usize]) -> usize {
    let mut off = 0;
    let mut stride = 1;
    for (&i, &d) in idx.iter().zip(dims) {
        off += i * stride;
        stride *= d;
    }
    off
}

pub fn unravel(dims: &[usize], mut f: usize) -> Vec<usize> {
    dims.iter()
        .map(|&d| {
            let i = f % d;
            f /= d;
            i
        })
        .collect()
}

fn tensor(dims: Vec<usize>, data: Vec<f64>) -> DenseTensor {
    DenseTensor::new(dims, data).unwrap()
}

pub fn rel_err(x: &DenseTensor, truth: &DenseTensor) -> f64 {
    assert_eq!(x.dims(), truth.dims());
    let num: f64 = x.as_slice().iter().zip(truth.as_slice()).map(|(a, b)| (a - b) * (a - b)).sum();
    let den: f64 = truth.as_slice().iter().map(|b| b * b).sum();
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

pub fn hadamard(a: &DenseTensor, b: &DenseTensor) -> DenseTensor {
    let data = (0..a.len()).map(|p| a.as_slice()[p] * b.as_slice()[p]).collect();
    tensor(a.dims().to_vec(), data)
}

pub fn add(a: &DenseTensor, b: &DenseTensor) -> DenseTensor {
    let data = (0..a.len()).map(|p| a.as_slice()[p] + b.as_slice()[p]).collect();
    tensor(a.dims().to_vec(), data)
}

/// `C[i_k + j_k I_k] = A[i] B[j]`.
pub fn kronecker(a: &DenseTensor, b: &DenseTensor) -> DenseTensor {
    let dims: Vec<usize> = a.dims().iter().zip(b.dims()).map(|(x, y)| x * y).collect();
    let mut out = vec![0.0; dims.iter().product()];
    for fa in 0..a.len() {
        let i = unravel(a.dims(), fa);
        for fb in 0..b.len() {
            let j = unravel(b.dims(), fb);
            let k: Vec<usize> = (0..i.len()).map(|m| i[m] + j[m] * a.dims()[m]).collect();
            out[flat(&dims, &k)] = a.as_slice()[fa] * b.as_slice()[fb];
        }
    }
    tensor(dims, out)
}

/// Kronecker merge on every mode except `n`, which is shared.
pub fn khatri_rao(a: &DenseTensor, b: &DenseTensor, n: usize) -> DenseTensor {
    let dims: Vec<usize> = (0..a.order())
        .map(|m| if m == n { a.dims()[m] } else { a.dims()[m] * b.dims()[m] })
        .collect();
    let mut out = vec![0.0; dims.iter().product()];
    for fa in 0..a.len() {
        let i = unravel(a.dims(), fa);
        for fb in 0..b.len() {
            let j = unravel(b.dims(), fb);
            if i[n] != j[n] {
                continue;
            }
            let k: Vec<usize> = (0..i.len())
                .map(|m| if m == n { i[m] } else { i[m] + j[m] * a.dims()[m] })
                .collect();
            out[flat(&dims, &k)] = a.as_slice()[fa] * b.as_slice()[fb];
        }
    }
    tensor(dims, out)
}

pub fn outer(a: &DenseTensor, b: &DenseTensor) -> DenseTensor {
    let mut dims = a.dims().to_vec();
    dims.extend_from_slice(b.dims());
    let mut out = vec![0.0; a.len() * b.len()];
    for fa in 0..a.len() {
        for fb in 0..b.len() {
            let mut k = unravel(a.dims(), fa);
            k.extend(unravel(b.dims(), fb));
            out[flat(&dims, &k)] = a.as_slice()[fa] * b.as_slice()[fb];
        }
    }
    tensor(dims, out)
}

/// `T x_n M` with `M` of size `J x I_n`.
pub fn mode_n(t: &DenseTensor, m: &DMatrix<f64>, n: usize) -> DenseTensor {
    let mut dims = t.dims().to_vec();
    dims[n] = m.nrows();
    let mut out = vec![0.0; dims.iter().product()];
    for fo in 0..out.len() {
        let mut idx = unravel(&dims, fo);
        let j = idx[n];
        let mut s = 0.0;
        for i in 0..t.dims()[n] {
            idx[n] = i;
            s += m[(j, i)] * t.as_slice()[flat(t.dims(), &idx)];
        }
        out[fo] = s;
    }
    tensor(dims, out)
}

/// Contraction over `(mode of a, mode of b)` pairs; free modes of `a` then of
/// `b`, each ascending. A full contraction has shape `[1]`.
pub fn contract(a: &DenseTensor, b: &DenseTensor, pairs: &[(usize, usize)]) -> DenseTensor {
    let free_a: Vec<usize> = (0..a.order()).filter(|m| !pairs.iter().any(|p| p.0 == *m)).collect();
    let free_b: Vec<usize> = (0..b.order()).filter(|m| !pairs.iter().any(|p| p.1 == *m)).collect();
    let mut dims: Vec<usize> = free_a.iter().map(|&m| a.dims()[m]).chain(free_b.iter().map(|&m| b.dims()[m])).collect();
    if dims.is_empty() {
        dims.push(1);
    }
    let sum_dims: Vec<usize> = pairs.iter().map(|p| a.dims()[p.0]).collect();
    let sum_len: usize = sum_dims.iter().product();
    let mut out = vec![0.0; dims.iter().product()];
    for (fo, o) in out.iter_mut().enumerate() {
        let k = unravel(&dims, fo);
        let mut ia = vec![0; a.order()];
        let mut ib = vec![0; b.order()];
        for (p, &m) in free_a.iter().enumerate() {
            ia[m] = k[p];
        }
        for (p, &m) in free_b.iter().enumerate() {
            ib[m] = k[free_a.len() + p];
        }
        let mut s = 0.0;
        for fs in 0..sum_len {
            let r = unravel(&sum_dims, fs);
            for (q, &(ma, mb)) in pairs.iter().enumerate() {
                ia[ma] = r[q];
                ib[mb] = r[q];
            }
            s += a.as_slice()[flat(a.dims(), &ia)] * b.as_slice()[flat(b.dims(), &ib)];
        }
        *o = s;
    }
    tensor(dims, out)
}

/// Reconstruction by explicit summation over every joint bond assignment.
/// Factor `k` carries its physical index at position `k` and the bond to
/// factor `j` at position `j`.
pub fn recover(c: &TnComponent) -> DenseTensor {
    let n = c.order();
    let dims = c.physical_dims();
    let edges: Vec<(usize, usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| (i, j, c.ranks().get(i, j)))
        .collect();
    let bond_dims: Vec<usize> = edges.iter().map(|e| e.2).collect();
    let bond_len: usize = bond_dims.iter().product();
    let mut out = vec![0.0; dims.iter().product()];
    for (fo, o) in out.iter_mut().enumerate() {
        let phys = unravel(&dims, fo);
        let mut s = 0.0;
        for fb in 0..bond_len {
            let r = unravel(&bond_dims, fb);
            let mut prod = 1.0;
            for k in 0..n {
                let mut idx = vec![0; n];
                idx[k] = phys[k];
                for (e, &(i, j, _)) in edges.iter().enumerate() {
                    if i == k {
                        idx[j] = r[e];
                    } else if j == k {
                        idx[i] = r[e];
                    }
                }
                let f = c.factor(k);
                prod *= f.as_slice()[flat(f.dims(), &idx)];
            }
            s += prod;
        }
        *o = s;
    }
    tensor(dims, out)
}

/// `U diag(max(σ - μ, 0)) Vᵀ` straight from the SVD.
pub fn svt(a: &DMatrix<f64>, mu: f64) -> DMatrix<f64> {
    let svd = a.clone().svd(true, true);
    let u = svd.u.unwrap();
    let vt = svd.v_t.unwrap();
    let mut out = DMatrix::zeros(a.nrows(), a.ncols());
    for (k, &s) in svd.singular_values.iter().enumerate() {
        let s = (s - mu).max(0.0);
        if s > 0.0 {
            out += u.column(k) * vt.row(k) * s;
        }
    }
    out
}

pub fn numerical_rank(a: &DMatrix<f64>, rtol: f64) -> usize {
    let sv = a.clone().svd(false, false).singular_values;
    let max = sv.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rtol * max).count()
}

/// Mode-`k` unfolding: rows indexed by mode `k`, columns by the remaining
/// modes in ascending order, first varying fastest.
pub fn unfold_mode(t: &DenseTensor, k: usize) -> DMatrix<f64> {
    let dims = t.dims();
    let cols = t.len() / dims[k];
    let rest: Vec<usize> = (0..dims.len()).filter(|&m| m != k).collect();
    let rest_dims: Vec<usize> = rest.iter().map(|&m| dims[m]).collect();
    DMatrix::from_fn(dims[k], cols, |r, col| {
        let ri = unravel(&rest_dims, col);
        let mut idx = vec![0; dims.len()];
        idx[k] = r;
        for (p, &m) in rest.iter().enumerate() {
            idx[m] = ri[p];
        }
        t.as_slice()[flat(dims, &idx)]
    })
}

/// Unfolding with the first `p` modes as rows.
pub fn unfold_prefix(t: &DenseTensor, p: usize) -> DMatrix<f64> {
    let rows: usize = t.dims()[..p].iter().product();
    DMatrix::from_column_slice(rows, t.len() / rows, t.as_slice())
}

pub fn gaussian_tensor<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> DenseTensor {
    let len = dims.iter().product();
    tensor(dims.to_vec(), (0..len).map(|_| rng.sample(StandardNormal)).collect())
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn random_dims<R: Rng + ?Sized>(order: usize, max_dim: usize, rng: &mut R) -> Vec<usize> {
    (0..order).map(|_| rng.random_range(1..=max_dim)).collect()
}

/// Random topology: each pair is an edge with probability `p_edge`, rank in
/// `2..=max_rank`, while the product of all ranks stays within `budget`.
pub fn random_ranks<R: Rng + ?Sized>(n: usize, p_edge: f64, max_rank: usize, budget: usize, rng: &mut R) -> RankMatrix {
    let mut r = RankMatrix::new(n);
    let mut product = 1;
    for i in 0..n {
        for j in i + 1..n {
            if max_rank >= 2 && rng.random_bool(p_edge) {
                let rank = rng.random_range(2..=max_rank);
                if product * rank <= budget {
                    r.set(i, j, rank).unwrap();
                    product *= rank;
                }
            }
        }
    }
    r
}

pub fn random_component<R: Rng + ?Sized>(dims: &[usize], ranks: RankMatrix, rng: &mut R) -> TnComponent {
    let t = ranks.max_degree().max(1);
    TnComponent::random(dims, ranks, t, rng).unwrap()
}
