//! Multilinear algebra carried out on the factors of tensor-network components.
//!
//! Every operation returns a component (or scalar) whose reconstruction equals
//! the corresponding dense operation applied to the reconstructions of the
//! inputs, without forming any dense tensor.

use nalgebra::DMatrix;
use rand::Rng;

use crate::contraction::{contract_all, Leg, Node};
use crate::error::{Error, Result};
use crate::network::{factor_dims, RankMatrix, TnComponent};
use crate::ops::{khatri_rao_mode, kronecker, mode_n_product};
use crate::tensor::{advance, DenseTensor};

fn same_dims(a: &TnComponent, b: &TnComponent, what: &str) -> Result<()> {
    if a.physical_dims() != b.physical_dims() {
        return Err(Error::shape(format!(
            "{what} needs identical dims, got {:?} and {:?}",
            a.physical_dims(),
            b.physical_dims()
        )));
    }
    Ok(())
}

fn same_order(a: &TnComponent, b: &TnComponent, what: &str) -> Result<()> {
    if a.order() != b.order() {
        return Err(Error::shape(format!(
            "{what} needs equal orders, got {} and {}",
            a.order(),
            b.order()
        )));
    }
    Ok(())
}

fn product_ranks(a: &RankMatrix, b: &RankMatrix) -> RankMatrix {
    let n = a.order();
    let mut r = RankMatrix::new(n);
    for i in 0..n {
        for j in i + 1..n {
            r.set(i, j, a.get(i, j) * b.get(i, j)).expect("valid edge");
        }
    }
    r
}

fn combined_limit(a: &TnComponent, b: &TnComponent, ranks: &RankMatrix) -> usize {
    a.max_connections().max(b.max_connections()).max(ranks.max_degree())
}

/// Mode-`n` product of the represented tensor with `m` (`J x I_n`); only factor `n` changes.
pub fn tn_mode_n_product(c: &TnComponent, m: &DMatrix<f64>, n: usize) -> Result<TnComponent> {
    if n >= c.order() {
        return Err(Error::ModeOutOfRange { mode: n, order: c.order() });
    }
    let mut factors = c.factors().to_vec();
    factors[n] = mode_n_product(&factors[n], m, n)?;
    TnComponent::new(factors, c.ranks().clone(), c.max_connections())
}

/// `recover(c) x_0 u_0ᵀ x_1 ... x_{N-1} u_{N-1}ᵀ`: each physical mode is
/// collapsed against its vector, then the remaining bond network is contracted.
pub fn tn_multilinear_vectors(c: &TnComponent, vectors: &[Vec<f64>]) -> Result<f64> {
    let dims = c.physical_dims();
    if vectors.len() != dims.len() {
        return Err(Error::shape(format!(
            "expected {} vectors, got {}",
            dims.len(),
            vectors.len()
        )));
    }
    for (k, (v, &d)) in vectors.iter().zip(&dims).enumerate() {
        if v.len() != d {
            return Err(Error::shape(format!("vector {k} has length {}, expected {d}", v.len())));
        }
    }
    let nodes: Vec<Node> = c
        .factors()
        .iter()
        .enumerate()
        .map(|(k, f)| Node::from_factor(k, f).collapse_leg(Leg::Phys(k), &vectors[k]))
        .collect();
    let out = contract_all(nodes);
    Ok(out.data[0])
}

/// Element-wise product; factor `k` is the mode-`k` Khatri-Rao product of the
/// input factors and bond ranks multiply.
pub fn tn_hadamard(a: &TnComponent, b: &TnComponent) -> Result<TnComponent> {
    same_dims(a, b, "tn_hadamard")?;
    let factors = (0..a.order())
        .map(|k| khatri_rao_mode(a.factor(k), b.factor(k), k))
        .collect::<Result<Vec<_>>>()?;
    let ranks = product_ranks(a.ranks(), b.ranks());
    let t = combined_limit(a, b, &ranks);
    TnComponent::new(factors, ranks, t)
}

/// Inner product of the represented tensors.
pub fn tn_inner(a: &TnComponent, b: &TnComponent) -> Result<f64> {
    let h = tn_hadamard(a, b)?;
    let ones: Vec<Vec<f64>> = h.physical_dims().iter().map(|&d| vec![1.0; d]).collect();
    tn_multilinear_vectors(&h, &ones)
}

/// Outer product: the factors of `a` followed by those of `b`, with no edges
/// between the two groups.
pub fn tn_outer(a: &TnComponent, b: &TnComponent) -> Result<TnComponent> {
    let (n, m) = (a.order(), b.order());
    let mut factors = Vec::with_capacity(n + m);
    for f in a.factors() {
        let mut dims = f.dims().to_vec();
        dims.resize(n + m, 1);
        factors.push(f.reshape(&dims)?);
    }
    for f in b.factors() {
        let mut dims = vec![1; n];
        dims.extend_from_slice(f.dims());
        factors.push(f.reshape(&dims)?);
    }
    let mut ranks = RankMatrix::new(n + m);
    for (i, j, r) in a.ranks().edges() {
        ranks.set(i, j, r)?;
    }
    for (i, j, r) in b.ranks().edges() {
        ranks.set(n + i, n + j, r)?;
    }
    let t = combined_limit(a, b, &ranks);
    TnComponent::new(factors, ranks, t)
}

/// Kronecker product; factors combine by the Kronecker product, so physical
/// and bond dimensions both multiply.
pub fn tn_kronecker(a: &TnComponent, b: &TnComponent) -> Result<TnComponent> {
    same_order(a, b, "tn_kronecker")?;
    let factors = (0..a.order())
        .map(|k| kronecker(a.factor(k), b.factor(k)))
        .collect::<Result<Vec<_>>>()?;
    let ranks = product_ranks(a.ranks(), b.ranks());
    let t = combined_limit(a, b, &ranks);
    TnComponent::new(factors, ranks, t)
}

/// Mode-`n` Khatri-Rao product: factor `n` uses the mode-`n` Khatri-Rao
/// product, every other factor the Kronecker product.
pub fn tn_khatri_rao(a: &TnComponent, b: &TnComponent, n: usize) -> Result<TnComponent> {
    same_order(a, b, "tn_khatri_rao")?;
    if n >= a.order() {
        return Err(Error::ModeOutOfRange { mode: n, order: a.order() });
    }
    let factors = (0..a.order())
        .map(|k| {
            if k == n {
                khatri_rao_mode(a.factor(k), b.factor(k), k)
            } else {
                kronecker(a.factor(k), b.factor(k))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let ranks = product_ranks(a.ranks(), b.ranks());
    let t = combined_limit(a, b, &ranks);
    TnComponent::new(factors, ranks, t)
}

/// Bond rank of an edge in a sum: 1 if both inputs have rank 1, otherwise the sum.
pub fn sum_rank(r: usize, s: usize) -> usize {
    if r == 1 && s == 1 {
        1
    } else {
        r + s
    }
}

/// Predicted rank matrix after adding components with the given topologies in order.
pub fn topology_of_sum(ranks: &[RankMatrix]) -> Result<RankMatrix> {
    let first = ranks
        .first()
        .ok_or_else(|| Error::invalid("topology_of_sum needs at least one rank matrix"))?;
    let n = first.order();
    let mut acc = first.clone();
    for r in &ranks[1..] {
        if r.order() != n {
            return Err(Error::shape("rank matrices of different orders"));
        }
        for i in 0..n {
            for j in i + 1..n {
                acc.set(i, j, sum_rank(acc.get(i, j), r.get(i, j)))?;
            }
        }
    }
    Ok(acc)
}

/// Makes the union of the edge graphs of `a` and `b` connected by growing
/// zero-filled rank-2 edges in `a`, which leaves its reconstruction unchanged.
///
/// While the union graph has several clusters, the cluster holding the
/// lowest-indexed isolated factor (or, without isolated factors, the cluster
/// of factor 0) is joined to a uniformly random factor outside it through a
/// uniformly random member. The block construction in [`tn_add`] is exact
/// only on a connected union graph.
pub fn prepare_for_add<R: Rng + ?Sized>(a: &TnComponent, b: &TnComponent, rng: &mut R) -> Result<(TnComponent, TnComponent)> {
    same_dims(a, b, "tn_add")?;
    let n = a.order();
    let mut a = a.clone();
    loop {
        let union = topology_of_sum(&[a.ranks().clone(), b.ranks().clone()])?;
        let clusters = union.clusters();
        if clusters.len() <= 1 {
            break;
        }
        let pick = clusters.iter().position(|c| c.len() == 1).unwrap_or(0);
        let cluster = &clusters[pick];
        let outside: Vec<usize> = (0..n).filter(|k| !cluster.contains(k)).collect();
        let u = cluster[rng.random_range(0..cluster.len())];
        let v = outside[rng.random_range(0..outside.len())];
        let degree = a.ranks().connections(u).max(a.ranks().connections(v)) + 1;
        if degree > a.max_connections() {
            a.set_max_connections(degree)?;
        }
        a.grow_in_place(u, v, |_| 0.0)?;
    }
    Ok((a, b.clone()))
}

/// Sum of two components.
///
/// Each bond `(i, j)` of the result has rank `sum_rank(R_ij, S_ij)`; indices
/// below `R_ij` address `a`, the rest address `b`. Factor `k` holds the entries
/// of `a`'s factor where all its bond indices are low, `b`'s where all are
/// high, and zeros elsewhere. Inputs are first passed through
/// [`prepare_for_add`], which is where `rng` is used.
pub fn tn_add<R: Rng + ?Sized>(a: &TnComponent, b: &TnComponent, rng: &mut R) -> Result<TnComponent> {
    let (a, b) = prepare_for_add(a, b, rng)?;
    tn_add_connected(&a, &b)
}

/// [`tn_add`] without preprocessing; exact when the union of the two edge
/// graphs is connected.
pub fn tn_add_connected(a: &TnComponent, b: &TnComponent) -> Result<TnComponent> {
    same_dims(a, b, "tn_add")?;
    let n = a.order();
    let dims = a.physical_dims();
    if n == 1 {
        let f = a.factor(0).add(b.factor(0))?;
        return TnComponent::new(vec![f], RankMatrix::new(1), a.max_connections());
    }
    let ranks = topology_of_sum(&[a.ranks().clone(), b.ranks().clone()])?;
    let mut factors = Vec::with_capacity(n);
    for k in 0..n {
        let fd = factor_dims(&dims, &ranks, k);
        let za = a.factor(k);
        let gb = b.factor(k);
        let (sa, sb) = (za.strides(), gb.strides());
        let low: Vec<usize> = (0..n).map(|j| if j == k { dims[k] } else { a.ranks().get(j, k) }).collect();
        let len: usize = fd.iter().product();
        let mut data = Vec::with_capacity(len);
        let mut idx = vec![0usize; n];
        for _ in 0..len {
            let mut all_low = true;
            let mut all_high = true;
            for j in (0..n).filter(|&j| j != k && fd[j] > 1) {
                if idx[j] < low[j] {
                    all_high = false;
                } else {
                    all_low = false;
                }
            }
            let v = if all_low {
                let off: usize = idx.iter().zip(&sa).map(|(i, s)| i * s).sum();
                za.as_slice()[off]
            } else if all_high {
                let off: usize = (0..n)
                    .map(|j| {
                        let i = if j == k || fd[j] == 1 { idx[j] } else { idx[j] - low[j] };
                        i * sb[j]
                    })
                    .sum();
                gb.as_slice()[off]
            } else {
                0.0
            };
            data.push(v);
            advance(&mut idx, &fd);
        }
        factors.push(DenseTensor::new(fd, data)?);
    }
    let t = combined_limit(a, b, &ranks);
    TnComponent::new(factors, ranks, t)
}
