//! Fully-connected tensor-network components and multi-component models.
//!
//! A component over `N` physical modes holds `N` order-`N` factor tensors.
//! Factor `k` has dimension `I_k` along mode `k` and dimension `R[j][k]` along
//! every other mode `j`; a bond rank of 1 means factors `j` and `k` are not
//! connected. The reconstruction contracts every shared bond.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::contraction::{contract_all, Leg, Node};
use crate::error::{Error, Result};
use crate::linalg::numerical_rank;
use crate::tensor::{advance, strides_of, DenseTensor};

/// Symmetric matrix of bond ranks; the diagonal is fixed at 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankMatrix {
    n: usize,
    r: Vec<usize>,
}

impl RankMatrix {
    /// All bonds at rank 1 (no edges).
    pub fn new(n: usize) -> Self {
        Self { n, r: vec![1; n * n] }
    }

    /// Builds from row-major rows, validating symmetry, positivity and a unit diagonal.
    pub fn from_rows(rows: &[Vec<usize>]) -> Result<Self> {
        let n = rows.len();
        let mut out = Self::new(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::invalid(format!("rank matrix row {i} has {} entries, expected {n}", row.len())));
            }
            for (j, &v) in row.iter().enumerate() {
                if v == 0 {
                    return Err(Error::invalid(format!("rank ({i},{j}) is zero")));
                }
                if i == j && v != 1 {
                    return Err(Error::invalid(format!("diagonal rank ({i},{i}) must be 1")));
                }
                if rows[j][i] != v {
                    return Err(Error::invalid(format!("rank matrix is not symmetric at ({i},{j})")));
                }
                out.r[i * n + j] = v;
            }
        }
        Ok(out)
    }

    /// Sets the ranks of the listed edges `(i, j, rank)` on an otherwise empty graph.
    pub fn from_edges(n: usize, edges: &[(usize, usize, usize)]) -> Result<Self> {
        let mut out = Self::new(n);
        for &(i, j, v) in edges {
            out.set(i, j, v)?;
        }
        Ok(out)
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> usize {
        self.r[i * self.n + j]
    }

    /// Sets `R[i][j] = R[j][i] = rank`.
    pub fn set(&mut self, i: usize, j: usize, rank: usize) -> Result<()> {
        if i >= self.n || j >= self.n {
            return Err(Error::invalid(format!("edge ({i},{j}) out of range for {} factors", self.n)));
        }
        if i == j {
            return Err(Error::invalid("self-loops are not allowed"));
        }
        if rank == 0 {
            return Err(Error::invalid("bond ranks must be at least 1"));
        }
        self.r[i * self.n + j] = rank;
        self.r[j * self.n + i] = rank;
        Ok(())
    }

    /// Number of edges (ranks above 1) incident to factor `k`.
    pub fn connections(&self, k: usize) -> usize {
        (0..self.n).filter(|&j| j != k && self.get(k, j) > 1).count()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|k| self.connections(k)).max().unwrap_or(0)
    }

    /// Edges `(i, j, rank)` with `i < j` and rank above 1, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                let v = self.get(i, j);
                if v > 1 {
                    out.push((i, j, v));
                }
            }
        }
        out
    }

    /// Product of the bond ranks at factor `k`.
    pub fn bond_product(&self, k: usize) -> usize {
        (0..self.n).filter(|&j| j != k).map(|j| self.get(j, k)).product()
    }

    /// Row-major copy of all entries.
    pub fn to_rows(&self) -> Vec<Vec<usize>> {
        (0..self.n).map(|i| self.r[i * self.n..(i + 1) * self.n].to_vec()).collect()
    }

    /// Connected components of the edge graph, each sorted, ordered by smallest member.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut label = vec![usize::MAX; self.n];
        let mut out = Vec::new();
        for s in 0..self.n {
            if label[s] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut stack = vec![s];
            let mut members = Vec::new();
            label[s] = id;
            while let Some(v) = stack.pop() {
                members.push(v);
                for w in 0..self.n {
                    if w != v && label[w] == usize::MAX && self.get(v, w) > 1 {
                        label[w] = id;
                        stack.push(w);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }
}

/// Dimensions of factor `k` for physical dimensions `dims` and ranks `ranks`.
pub fn factor_dims(dims: &[usize], ranks: &RankMatrix, k: usize) -> Vec<usize> {
    (0..dims.len())
        .map(|m| if m == k { dims[k] } else { ranks.get(m, k) })
        .collect()
}

/// One fully-connected tensor-network component.
#[derive(Clone, Debug, PartialEq)]
pub struct TnComponent {
    factors: Vec<DenseTensor>,
    ranks: RankMatrix,
    max_connections: usize,
}

impl TnComponent {
    /// Validates factor shapes against `ranks` and the connection limit.
    pub fn new(factors: Vec<DenseTensor>, ranks: RankMatrix, max_connections: usize) -> Result<Self> {
        let n = factors.len();
        if n == 0 {
            return Err(Error::invalid("a component needs at least one factor"));
        }
        if ranks.order() != n {
            return Err(Error::shape(format!(
                "rank matrix is {0}x{0} but there are {n} factors",
                ranks.order()
            )));
        }
        let dims: Vec<usize> = factors
            .iter()
            .enumerate()
            .map(|(k, f)| if f.order() == n { f.dims()[k] } else { 0 })
            .collect();
        for (k, f) in factors.iter().enumerate() {
            let expect = factor_dims(&dims, &ranks, k);
            if f.dims() != expect.as_slice() {
                return Err(Error::shape(format!(
                    "factor {k} has dims {:?}, expected {expect:?}",
                    f.dims()
                )));
            }
        }
        for k in 0..n {
            let c = ranks.connections(k);
            if c > max_connections {
                return Err(Error::invalid(format!(
                    "factor {k} has {c} connections, above the limit {max_connections}"
                )));
            }
        }
        Ok(Self {
            factors,
            ranks,
            max_connections,
        })
    }

    /// Builds a component with no connection limit beyond the complete graph.
    pub fn from_factors(factors: Vec<DenseTensor>, ranks: RankMatrix) -> Result<Self> {
        let t = factors.len().saturating_sub(1).max(1);
        Self::new(factors, ranks, t)
    }

    /// Factors with i.i.d. standard normal entries.
    pub fn random<R: Rng + ?Sized>(dims: &[usize], ranks: RankMatrix, max_connections: usize, rng: &mut R) -> Result<Self> {
        if ranks.order() != dims.len() {
            return Err(Error::shape("rank matrix order differs from the number of modes"));
        }
        let factors = (0..dims.len())
            .map(|k| {
                let fd = factor_dims(dims, &ranks, k);
                let len = fd.iter().product();
                let data = (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                DenseTensor::new(fd, data)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(factors, ranks, max_connections)
    }

    /// The rank-1 component `v_0 ∘ v_1 ∘ ... ∘ v_{N-1}`.
    pub fn rank_one(vectors: &[Vec<f64>]) -> Result<Self> {
        let n = vectors.len();
        let factors = vectors
            .iter()
            .enumerate()
            .map(|(k, v)| {
                let mut d = vec![1; n];
                d[k] = v.len();
                DenseTensor::new(d, v.clone())
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_factors(factors, RankMatrix::new(n))
    }

    pub fn order(&self) -> usize {
        self.factors.len()
    }

    pub fn physical_dims(&self) -> Vec<usize> {
        self.factors.iter().enumerate().map(|(k, f)| f.dims()[k]).collect()
    }

    pub fn ranks(&self) -> &RankMatrix {
        &self.ranks
    }

    pub fn max_connections(&self) -> usize {
        self.max_connections
    }

    pub fn set_max_connections(&mut self, t: usize) -> Result<()> {
        if self.ranks.max_degree() > t {
            return Err(Error::invalid(format!(
                "limit {t} is below the current maximum degree {}",
                self.ranks.max_degree()
            )));
        }
        self.max_connections = t;
        Ok(())
    }

    pub fn factor(&self, k: usize) -> &DenseTensor {
        &self.factors[k]
    }

    pub fn factors(&self) -> &[DenseTensor] {
        &self.factors
    }

    /// Replaces factor `k`; the shape must not change.
    pub fn set_factor(&mut self, k: usize, factor: DenseTensor) -> Result<()> {
        if k >= self.order() {
            return Err(Error::ModeOutOfRange { mode: k, order: self.order() });
        }
        if factor.dims() != self.factors[k].dims() {
            return Err(Error::shape(format!(
                "replacement factor {k} has dims {:?}, expected {:?}",
                factor.dims(),
                self.factors[k].dims()
            )));
        }
        self.factors[k] = factor;
        Ok(())
    }

    /// Total number of stored entries across all factors.
    pub fn parameter_count(&self) -> usize {
        self.factors.iter().map(DenseTensor::len).sum()
    }

    /// Multiplies every entry of one factor by `s`, scaling the reconstruction by `s`.
    pub fn scale(&mut self, s: f64) {
        if let Some(f) = self.factors.first_mut() {
            *f = f.scale(s);
        }
    }

    /// Whether edge `(i, j)` can be added or grown without breaking the connection limit.
    pub fn can_grow(&self, i: usize, j: usize) -> bool {
        if i == j || i >= self.order() || j >= self.order() {
            return false;
        }
        if self.ranks.get(i, j) > 1 {
            return true;
        }
        self.ranks.connections(i) < self.max_connections && self.ranks.connections(j) < self.max_connections
    }

    /// Returns a copy with `R[i][j]` grown by one. New slices of factor `i`
    /// along mode `j` (and of factor `j` along mode `i`) are drawn from `fill`,
    /// called with the factor index.
    pub fn grow_edge_with(&self, i: usize, j: usize, fill: impl FnMut(usize) -> f64) -> Result<TnComponent> {
        let mut out = self.clone();
        out.grow_in_place(i, j, fill)?;
        Ok(out)
    }

    /// Returns a copy with `R[i][j]` grown by one; new slices are drawn from
    /// `N(0, (0.01 * ||factor|| / sqrt(entries))^2)` for each affected factor.
    pub fn grow_edge<R: Rng + ?Sized>(&self, i: usize, j: usize, rng: &mut R) -> Result<TnComponent> {
        let mut out = self.clone();
        out.grow_in_place_random(i, j, rng)?;
        Ok(out)
    }

    pub(crate) fn grow_in_place(&mut self, i: usize, j: usize, mut fill: impl FnMut(usize) -> f64) -> Result<()> {
        let n = self.order();
        if i >= n || j >= n {
            return Err(Error::invalid(format!("edge ({i},{j}) out of range for {n} factors")));
        }
        if i == j {
            return Err(Error::invalid("self-loops are not allowed"));
        }
        if !self.can_grow(i, j) {
            return Err(Error::invalid(format!(
                "adding edge ({i},{j}) exceeds the connection limit {}",
                self.max_connections
            )));
        }
        let r = self.ranks.get(i, j);
        self.factors[i] = extend_mode(&self.factors[i], j, 1, || fill(i));
        self.factors[j] = extend_mode(&self.factors[j], i, 1, || fill(j));
        self.ranks.set(i, j, r + 1)?;
        Ok(())
    }

    pub(crate) fn grow_in_place_random<R: Rng + ?Sized>(&mut self, i: usize, j: usize, rng: &mut R) -> Result<()> {
        let stds: Vec<f64> = self
            .factors
            .iter()
            .map(|f| 0.01 * f.norm() / (f.len() as f64).sqrt())
            .collect();
        self.grow_in_place(i, j, |k| stds[k] * rng.sample::<f64, _>(StandardNormal))
    }

    /// Full reconstruction of the component.
    pub fn recover(&self) -> DenseTensor {
        let nodes: Vec<Node> = self.factors.iter().enumerate().map(|(k, f)| Node::from_factor(k, f)).collect();
        let out = contract_all(nodes);
        let order: Vec<Leg> = (0..self.order()).map(Leg::Phys).collect();
        let out = out.permuted(&order);
        DenseTensor::new(out.dims, out.data).expect("reconstruction shape")
    }

    /// Contracts every factor except those in `excluded`.
    ///
    /// The result has one mode per included factor (its physical mode, in
    /// ascending factor order) followed by one mode per excluded factor (in
    /// ascending order). Each trailing mode merges the bonds from the included
    /// factors to that excluded factor, ordered by ascending source index with
    /// the lowest index varying fastest.
    pub fn recover_excluding(&self, excluded: &[usize]) -> Result<DenseTensor> {
        let n = self.order();
        let mut ex = excluded.to_vec();
        ex.sort_unstable();
        ex.dedup();
        if let Some(&bad) = ex.iter().find(|&&e| e >= n) {
            return Err(Error::ModeOutOfRange { mode: bad, order: n });
        }
        if ex.len() == n {
            return Err(Error::invalid("cannot exclude every factor"));
        }
        if ex.is_empty() {
            return Ok(self.recover());
        }
        let included: Vec<usize> = (0..n).filter(|k| !ex.contains(k)).collect();
        let nodes: Vec<Node> = included.iter().map(|&k| Node::from_factor(k, &self.factors[k])).collect();
        let out = contract_all(nodes);

        let mut order: Vec<Leg> = included.iter().map(|&k| Leg::Phys(k)).collect();
        let mut dims: Vec<usize> = included.iter().map(|&k| self.factors[k].dims()[k]).collect();
        for &e in &ex {
            let mut group = 1;
            for &s in &included {
                let r = self.ranks.get(s, e);
                if r > 1 {
                    order.push(Leg::bond(s, e));
                    group *= r;
                }
            }
            dims.push(group);
        }
        let out = out.permuted(&order);
        DenseTensor::new(dims, out.data)
    }

    /// `B = Z^{≠n}` in its prefix matricization: rows enumerate the physical
    /// indices of every factor except `n`, columns the bonds of factor `n`
    /// (in the order of factor `n`'s modes).
    pub(crate) fn excluded_basis(&self, n: usize) -> DMatrix<f64> {
        let z = self.recover_excluding(&[n]).expect("valid exclusion");
        let cols = *z.dims().last().expect("non-empty dims");
        let rows = z.len() / cols;
        DMatrix::from_vec(rows, cols, z.into_vec())
    }

    /// `Bᵀ B` for the basis of [`Self::excluded_basis`], computed by contracting
    /// the per-factor Gram tensors instead of forming `B`.
    pub(crate) fn excluded_gram(&self, n: usize) -> DMatrix<f64> {
        let nodes: Vec<Node> = (0..self.order())
            .filter(|&k| k != n)
            .map(|k| Node::from_factor(k, &self.factors[k]).bond_gram())
            .collect();
        let out = contract_all(nodes);
        let bonds: Vec<usize> = (0..self.order()).filter(|&k| k != n && self.ranks.get(k, n) > 1).collect();
        let mut order: Vec<Leg> = bonds.iter().map(|&k| Leg::bond(k, n)).collect();
        order.extend(bonds.iter().map(|&k| {
            let (a, b) = (k.min(n), k.max(n));
            Leg::Dual(a, b)
        }));
        let out = out.permuted(&order);
        let p = self.ranks.bond_product(n);
        DMatrix::from_vec(p, p, out.data)
    }

    /// Checks the rank bounds implied by the topology on the mode-`n` and
    /// prefix matricizations of the reconstruction.
    pub fn check_rank_bounds(&self, rtol: f64) -> RankBoundReport {
        let x = self.recover();
        let n = self.order();
        let mut checks = Vec::new();
        for k in 0..n {
            let m = x.matricize_mode(k).expect("valid mode").matrix;
            checks.push(RankBoundCheck {
                kind: BoundKind::Mode(k),
                rank: numerical_rank(&m, rtol),
                bound: self.mode_rank_bound(k),
            });
        }
        for p in 1..n {
            let m = x.matricize_prefix(p).expect("valid prefix").matrix;
            checks.push(RankBoundCheck {
                kind: BoundKind::Prefix(p),
                rank: numerical_rank(&m, rtol),
                bound: self.prefix_rank_bound(p),
            });
        }
        RankBoundReport { checks }
    }

    /// Upper bound on the rank of the mode-`k` unfolding: the product of the
    /// bond ranks at factor `k`, capped by the physical dimension.
    pub fn mode_rank_bound(&self, k: usize) -> usize {
        self.ranks.bond_product(k).min(self.factors[k].dims()[k])
    }

    /// Upper bound on the rank of the prefix unfolding with `p` row modes: the
    /// product of ranks of the edges crossing the cut.
    pub fn prefix_rank_bound(&self, p: usize) -> usize {
        let n = self.order();
        let mut b = 1usize;
        for i in 0..p {
            for j in p..n {
                b = b.saturating_mul(self.ranks.get(i, j));
            }
        }
        b
    }
}

/// Which unfolding a bound refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundKind {
    Mode(usize),
    /// Prefix unfolding with this many row modes.
    Prefix(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RankBoundCheck {
    pub kind: BoundKind,
    pub rank: usize,
    pub bound: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankBoundReport {
    pub checks: Vec<RankBoundCheck>,
}

impl RankBoundReport {
    pub fn violations(&self) -> Vec<RankBoundCheck> {
        self.checks.iter().copied().filter(|c| c.rank > c.bound).collect()
    }

    pub fn holds(&self) -> bool {
        self.checks.iter().all(|c| c.rank <= c.bound)
    }
}

/// Copy of `t` with mode `m` extended by `extra` entries taken from `fill`.
pub(crate) fn extend_mode(t: &DenseTensor, m: usize, extra: usize, mut fill: impl FnMut() -> f64) -> DenseTensor {
    let old_dims = t.dims();
    let mut dims = old_dims.to_vec();
    dims[m] += extra;
    let old_strides = strides_of(old_dims);
    let len: usize = dims.iter().product();
    let mut data = Vec::with_capacity(len);
    let mut idx = vec![0usize; dims.len()];
    let src = t.as_slice();
    for _ in 0..len {
        if idx[m] < old_dims[m] {
            let off: usize = idx.iter().zip(&old_strides).map(|(i, s)| i * s).sum();
            data.push(src[off]);
        } else {
            data.push(fill());
        }
        advance(&mut idx, &dims);
    }
    DenseTensor::new(dims, data).expect("extended shape")
}

/// A sum of tensor-network components sharing the same physical dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct MtnrModel {
    dims: Vec<usize>,
    components: Vec<TnComponent>,
}

impl MtnrModel {
    pub fn new(dims: &[usize]) -> Self {
        Self {
            dims: dims.to_vec(),
            components: Vec::new(),
        }
    }

    pub fn from_components(dims: &[usize], components: Vec<TnComponent>) -> Result<Self> {
        let mut m = Self::new(dims);
        for c in components {
            m.push(c)?;
        }
        Ok(m)
    }

    pub fn push(&mut self, c: TnComponent) -> Result<()> {
        if c.physical_dims() != self.dims {
            return Err(Error::shape(format!(
                "component dims {:?} differ from model dims {:?}",
                c.physical_dims(),
                self.dims
            )));
        }
        self.components.push(c);
        Ok(())
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn components(&self) -> &[TnComponent] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn parameter_count(&self) -> usize {
        self.components.iter().map(TnComponent::parameter_count).sum()
    }

    /// Sum of the component reconstructions; zeros for an empty model.
    pub fn recover(&self) -> DenseTensor {
        let mut out = DenseTensor::zeros(&self.dims);
        for c in &self.components {
            out.add_assign(&c.recover());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contraction::contract_in_order;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Direct summation over every bond index of the network.
    fn brute_recover(c: &TnComponent) -> DenseTensor {
        let n = c.order();
        let dims = c.physical_dims();
        let edges: Vec<(usize, usize, usize)> = c.ranks().edges();
        let edge_dims: Vec<usize> = edges.iter().map(|e| e.2).collect();
        DenseTensor::from_fn(&dims, |phys| {
            let mut total = 0.0;
            let count: usize = edge_dims.iter().product();
            let mut bidx = vec![0usize; edges.len()];
            for _ in 0..count {
                let mut prod = 1.0;
                for k in 0..n {
                    let mut fidx = vec![0usize; n];
                    fidx[k] = phys[k];
                    for (e, &(i, j, _)) in edges.iter().enumerate() {
                        if i == k {
                            fidx[j] = bidx[e];
                        } else if j == k {
                            fidx[i] = bidx[e];
                        }
                    }
                    prod *= c.factor(k).get(&fidx);
                }
                total += prod;
                if !edges.is_empty() {
                    advance(&mut bidx, &edge_dims);
                }
            }
            total
        })
    }

    fn sample_component(rng: &mut ChaCha8Rng) -> TnComponent {
        let ranks = RankMatrix::from_edges(4, &[(0, 1, 2), (1, 2, 3), (0, 3, 2), (0, 2, 2)]).unwrap();
        TnComponent::random(&[3, 2, 4, 2], ranks, 3, rng).unwrap()
    }

    #[test]
    fn recover_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let c = sample_component(&mut rng);
        let a = c.recover();
        let b = brute_recover(&c);
        assert!(a.sub(&b).unwrap().norm() <= 1e-12 * b.norm());
    }

    #[test]
    fn contraction_order_does_not_matter() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let c = sample_component(&mut rng);
        let base = c.recover();
        for perm in [[3usize, 1, 0, 2], [2, 0, 3, 1], [1, 3, 2, 0]] {
            let nodes: Vec<Node> = perm.iter().map(|&k| Node::from_factor(k, c.factor(k))).collect();
            let out = contract_in_order(nodes).permuted(&(0..4).map(Leg::Phys).collect::<Vec<_>>());
            let t = DenseTensor::new(out.dims, out.data).unwrap();
            assert!(t.sub(&base).unwrap().norm() <= 1e-12 * base.norm());
        }
    }

    #[test]
    fn rank_one_component_is_outer_product() {
        let c = TnComponent::rank_one(&[vec![1.0, 2.0], vec![3.0, 4.0, 5.0]]).unwrap();
        let x = c.recover();
        assert_eq!(x.dims(), &[2, 3]);
        assert_eq!(x.get(&[1, 2]), 10.0);
        assert_eq!(x.get(&[0, 1]), 4.0);
    }

    #[test]
    fn excluded_contraction_reassembles_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let c = sample_component(&mut rng);
        let x = c.recover();
        for n in 0..4 {
            let z = c.recover_excluding(&[n]).unwrap();
            let b = z.matricize_prefix(3).unwrap().matrix;
            let zn = c.factor(n).matricize_mode(n).unwrap().matrix;
            let xn = &zn * b.transpose();
            let expect = x.matricize_mode(n).unwrap().matrix;
            assert!((xn - &expect).norm() <= 1e-12 * expect.norm(), "mode {n}");
        }
    }

    #[test]
    fn excluded_gram_matches_explicit_basis() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let c = sample_component(&mut rng);
        for n in 0..4 {
            let b = c.excluded_basis(n);
            let g = c.excluded_gram(n);
            let expect = b.transpose() * &b;
            assert!((g - &expect).norm() <= 1e-12 * expect.norm(), "mode {n}");
        }
    }

    #[test]
    fn pair_exclusion_groups_bonds() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let c = sample_component(&mut rng);
        let z = c.recover_excluding(&[1, 2]).unwrap();
        // Included: factors 0, 3. Factor 1 receives bond (0,1) only; factor 2
        // receives (0,2) only since R[3][2] = 1.
        assert_eq!(z.dims(), &[3, 2, 2, 2]);
    }

    #[test]
    fn grow_edge_preserves_reconstruction_with_zero_slices() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let c = sample_component(&mut rng);
        let before = c.recover();
        let c = c.grow_edge_with(1, 3, |_| 0.0).unwrap();
        assert_eq!(c.ranks().get(1, 3), 2);
        assert_eq!(c.factor(1).dims(), &[2, 2, 3, 2]);
        let after = c.recover();
        assert!(after.sub(&before).unwrap().norm() <= 1e-12 * before.norm());
        let c = c.grow_edge_with(1, 2, |_| 0.0).unwrap();
        assert_eq!(c.ranks().get(1, 2), 4);
    }

    #[test]
    fn grow_edge_respects_connection_limit() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let ranks = RankMatrix::from_edges(4, &[(0, 1, 2)]).unwrap();
        let c = TnComponent::random(&[2, 2, 2, 2], ranks, 1, &mut rng).unwrap();
        assert!(c.grow_edge(0, 2, &mut rng).is_err());
        let grown = c.grow_edge(2, 3, &mut rng).unwrap();
        assert_eq!(grown.ranks().get(3, 2), 2);
        assert_eq!(c.ranks().get(3, 2), 1);
        assert!(c.grow_edge(0, 1, &mut rng).is_ok());
        assert!(c.grow_edge(0, 0, &mut rng).is_err());
    }

    #[test]
    fn rank_bounds_hold_for_random_component() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let c = sample_component(&mut rng);
        let report = c.check_rank_bounds(1e-8);
        assert!(report.holds(), "{:?}", report.violations());
        assert_eq!(report.checks.len(), 4 + 3);
    }

    #[test]
    fn rank_matrix_validation() {
        assert!(RankMatrix::from_rows(&[vec![1, 2], vec![3, 1]]).is_err());
        assert!(RankMatrix::from_rows(&[vec![2, 1], vec![1, 1]]).is_err());
        assert!(RankMatrix::from_rows(&[vec![1, 0], vec![0, 1]]).is_err());
        let r = RankMatrix::from_rows(&[vec![1, 2, 1], vec![2, 1, 1], vec![1, 1, 1]]).unwrap();
        assert_eq!(r.edges(), vec![(0, 1, 2)]);
        assert_eq!(r.clusters(), vec![vec![0, 1], vec![2]]);
    }

    #[test]
    fn component_shape_validation() {
        let ranks = RankMatrix::from_edges(2, &[(0, 1, 2)]).unwrap();
        let f0 = DenseTensor::zeros(&[3, 2]);
        let bad = DenseTensor::zeros(&[1, 4]);
        assert!(TnComponent::from_factors(vec![f0.clone(), bad], ranks.clone()).is_err());
        let good = DenseTensor::zeros(&[2, 4]);
        assert!(TnComponent::from_factors(vec![f0, good], ranks).is_ok());
    }

    #[test]
    fn model_sums_components() {
        let a = TnComponent::rank_one(&[vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let b = TnComponent::rank_one(&[vec![0.0, 1.0], vec![2.0, 0.0]]).unwrap();
        let m = MtnrModel::from_components(&[2, 2], vec![a, b]).unwrap();
        assert_eq!(m.recover().as_slice(), &[1.0, 2.0, 1.0, 0.0]);
        assert_eq!(m.parameter_count(), 8);
        assert_eq!(MtnrModel::new(&[2, 3]).recover().norm(), 0.0);
    }
}
