//! Pairwise contraction of labelled tensor networks.
//!
//! Every mode of a node carries a leg label: a physical leg `Phys(k)` or a bond
//! `Bond(i, j)` shared by factors `i < j`. Two nodes are contracted by summing
//! over their common bond legs with a single GEMM; nodes without common legs
//! are joined by an outer product.

use crate::linalg::gemm;
use crate::tensor::{permute_raw, DenseTensor};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) enum Leg {
    Phys(usize),
    Bond(usize, usize),
    /// Second copy of a bond, used when contracting a network with itself.
    Dual(usize, usize),
}

impl Leg {
    pub(crate) fn bond(a: usize, b: usize) -> Leg {
        Leg::Bond(a.min(b), a.max(b))
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Node {
    pub legs: Vec<Leg>,
    pub dims: Vec<usize>,
    pub data: Vec<f64>,
    /// Smallest factor index merged into this node; fixes tie-breaking.
    pub id: usize,
}

impl Node {
    /// A factor tensor of a network with `n` factors. Bond modes of dimension 1
    /// are dropped since they never change values.
    pub(crate) fn from_factor(k: usize, factor: &DenseTensor) -> Node {
        let mut legs = Vec::new();
        let mut dims = Vec::new();
        for (m, &d) in factor.dims().iter().enumerate() {
            if m == k {
                legs.push(Leg::Phys(k));
                dims.push(d);
            } else if d > 1 {
                legs.push(Leg::bond(m, k));
                dims.push(d);
            }
        }
        Node {
            legs,
            dims,
            data: factor.as_slice().to_vec(),
            id: k,
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.data.len()
    }

    fn position(&self, leg: Leg) -> Option<usize> {
        self.legs.iter().position(|&l| l == leg)
    }

    /// Reorders the modes so that leg `m` of the result is `order[m]`.
    pub(crate) fn permuted(&self, order: &[Leg]) -> Node {
        debug_assert_eq!(order.len(), self.legs.len());
        let perm: Vec<usize> = order
            .iter()
            .map(|&l| self.position(l).expect("leg present"))
            .collect();
        let (dims, data) = if self.legs.len() <= 1 {
            (self.dims.clone(), self.data.clone())
        } else {
            permute_raw(&self.dims, &self.data, &perm)
        };
        Node {
            legs: order.to_vec(),
            dims,
            data,
            id: self.id,
        }
    }

    /// `Zᵀ Z` for the physical-mode matricization `Z` of a factor node: legs are
    /// the bonds followed by their duals.
    pub(crate) fn bond_gram(&self) -> Node {
        let phys = *self
            .legs
            .iter()
            .find(|l| matches!(l, Leg::Phys(_)))
            .expect("factor node has a physical leg");
        let bonds: Vec<Leg> = self.legs.iter().copied().filter(|&l| l != phys).collect();
        let mut order = vec![phys];
        order.extend(&bonds);
        let moved = self.permuted(&order);
        let rows = moved.dims[0];
        let d = moved.len() / rows;
        let data = gemm(d, rows, d, &moved.data, true, &moved.data, false);
        let mut legs = bonds.clone();
        legs.extend(bonds.iter().map(|l| match *l {
            Leg::Bond(a, b) => Leg::Dual(a, b),
            other => other,
        }));
        let mut dims = moved.dims[1..].to_vec();
        dims.extend_from_slice(&moved.dims[1..]);
        Node {
            legs,
            dims,
            data,
            id: self.id,
        }
    }

    /// Sums `self` against a matrix acting on one physical leg, removing the leg:
    /// used to collapse a physical mode with a vector.
    pub(crate) fn collapse_leg(&self, leg: Leg, weights: &[f64]) -> Node {
        let p = self.position(leg).expect("leg present");
        debug_assert_eq!(weights.len(), self.dims[p]);
        let mut order: Vec<Leg> = self.legs.iter().copied().filter(|&l| l != leg).collect();
        order.push(leg);
        let moved = self.permuted(&order);
        let rows = moved.len() / weights.len();
        let data = gemm(rows, weights.len(), 1, &moved.data, false, weights, false);
        order.pop();
        let mut dims = moved.dims;
        dims.pop();
        Node {
            legs: order,
            dims,
            data,
            id: self.id,
        }
    }
}

fn shared_legs(a: &Node, b: &Node) -> Vec<Leg> {
    a.legs
        .iter()
        .copied()
        .filter(|l| !matches!(l, Leg::Phys(_)) && b.legs.contains(l))
        .collect()
}

fn result_size(a: &Node, b: &Node) -> usize {
    let shared = shared_legs(a, b);
    let free = |n: &Node| -> usize {
        n.legs
            .iter()
            .zip(&n.dims)
            .filter(|(l, _)| !shared.contains(l))
            .map(|(_, &d)| d)
            .product()
    };
    free(a) * free(b)
}

pub(crate) fn contract_pair(a: &Node, b: &Node) -> Node {
    let shared = shared_legs(a, b);
    let free_a: Vec<Leg> = a.legs.iter().copied().filter(|l| !shared.contains(l)).collect();
    let free_b: Vec<Leg> = b.legs.iter().copied().filter(|l| !shared.contains(l)).collect();

    let order_a: Vec<Leg> = free_a.iter().chain(&shared).copied().collect();
    let order_b: Vec<Leg> = shared.iter().chain(&free_b).copied().collect();
    let pa = a.permuted(&order_a);
    let pb = b.permuted(&order_b);

    let k: usize = pa.dims[free_a.len()..].iter().product();
    let m = pa.len() / k;
    let n = pb.len() / k;
    let data = gemm(m, k, n, &pa.data, false, &pb.data, false);

    let mut dims: Vec<usize> = pa.dims[..free_a.len()].to_vec();
    dims.extend_from_slice(&pb.dims[shared.len()..]);
    let mut legs = free_a;
    legs.extend(free_b);
    Node {
        legs,
        dims,
        data,
        id: a.id.min(b.id),
    }
}

/// Contracts all nodes, greedily picking at each step the pair with the
/// smallest intermediate; ties go to the lowest node ids.
pub(crate) fn contract_all(mut nodes: Vec<Node>) -> Node {
    assert!(!nodes.is_empty(), "cannot contract an empty network");
    nodes.sort_by_key(|n| n.id);
    while nodes.len() > 1 {
        let mut best = (usize::MAX, 0, 1);
        for p in 0..nodes.len() {
            for q in p + 1..nodes.len() {
                let size = result_size(&nodes[p], &nodes[q]);
                if size < best.0 {
                    best = (size, p, q);
                }
            }
        }
        let (_, p, q) = best;
        let b = nodes.remove(q);
        let merged = contract_pair(&nodes[p], &b);
        nodes[p] = merged;
    }
    nodes.pop().expect("one node left")
}

/// Contracts nodes in exactly the given sequence (left fold).
#[cfg(test)]
pub(crate) fn contract_in_order(nodes: Vec<Node>) -> Node {
    let mut iter = nodes.into_iter();
    let first = iter.next().expect("non-empty");
    iter.fold(first, |acc, n| contract_pair(&acc, &n))
}
