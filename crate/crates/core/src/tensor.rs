//! Dense N-order tensors.
//!
//! Entries are stored contiguously in little-endian multi-index order: the
//! first mode varies fastest, so the 0-based flat position of `(i_0, .., i_{N-1})`
//! is `sum_k i_k * prod_{m<k} I_m`. This is the column-major convention, which
//! means vectorization is a no-copy view and prefix matricizations are plain
//! reshapes of the same buffer.
//!
//! All mode indices in this crate are 0-based.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// An N-order (N >= 1) dense array of `f64`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor {
    dims: Vec<usize>,
    data: Vec<f64>,
}

/// Little-endian strides for `dims`.
pub fn strides_of(dims: &[usize]) -> Vec<usize> {
    let mut strides = Vec::with_capacity(dims.len());
    let mut acc = 1;
    for &d in dims {
        strides.push(acc);
        acc *= d;
    }
    strides
}

fn check_dims(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() {
        return Err(Error::shape("order-0 tensors are not representable"));
    }
    if let Some(k) = dims.iter().position(|&d| d == 0) {
        return Err(Error::shape(format!("mode {k} has dimension 0")));
    }
    Ok(dims.iter().product())
}

impl DenseTensor {
    pub fn new(dims: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let len = check_dims(&dims)?;
        if data.len() != len {
            return Err(Error::shape(format!(
                "dims {dims:?} need {len} entries, got {}",
                data.len()
            )));
        }
        Ok(Self { dims, data })
    }

    /// Panics on an empty or zero-sized shape.
    pub fn filled(dims: &[usize], value: f64) -> Self {
        let len = check_dims(dims).expect("invalid tensor shape");
        Self {
            dims: dims.to_vec(),
            data: vec![value; len],
        }
    }

    pub fn zeros(dims: &[usize]) -> Self {
        Self::filled(dims, 0.0)
    }

    pub fn ones(dims: &[usize]) -> Self {
        Self::filled(dims, 1.0)
    }

    /// Builds a tensor by evaluating `f` at every multi-index, in flat order.
    pub fn from_fn(dims: &[usize], mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let len = check_dims(dims).expect("invalid tensor shape");
        let mut data = Vec::with_capacity(len);
        let mut idx = vec![0usize; dims.len()];
        for _ in 0..len {
            data.push(f(&idx));
            advance(&mut idx, dims);
        }
        Self {
            dims: dims.to_vec(),
            data,
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// `vec(T)`: the entries in little-endian flat order.
    pub fn vectorize(&self) -> &[f64] {
        &self.data
    }

    pub fn strides(&self) -> Vec<usize> {
        strides_of(&self.dims)
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dims.len());
        let mut flat = 0;
        let mut stride = 1;
        for (&i, &d) in idx.iter().zip(&self.dims) {
            debug_assert!(i < d);
            flat += i * stride;
            stride *= d;
        }
        flat
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        self.dims
            .iter()
            .map(|&d| {
                let i = flat % d;
                flat /= d;
                i
            })
            .collect()
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.flat_index(idx)]
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn inner(&self, other: &DenseTensor) -> Result<f64> {
        self.same_shape(other, "inner product")?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    pub(crate) fn same_shape(&self, other: &DenseTensor, what: &str) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::shape(format!(
                "{what}: {:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &DenseTensor) -> Result<DenseTensor> {
        self.zip_with(other, "addition", |a, b| a + b)
    }

    pub fn sub(&self, other: &DenseTensor) -> Result<DenseTensor> {
        self.zip_with(other, "subtraction", |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> DenseTensor {
        self.map(|v| v * s)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> DenseTensor {
        DenseTensor {
            dims: self.dims.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(
        &self,
        other: &DenseTensor,
        what: &str,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<DenseTensor> {
        self.same_shape(other, what)?;
        Ok(DenseTensor {
            dims: self.dims.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add_assign(&mut self, other: &DenseTensor) {
        debug_assert_eq!(self.dims, other.dims);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn sub_assign(&mut self, other: &DenseTensor) {
        debug_assert_eq!(self.dims, other.dims);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
    }

    /// Same entries, new shape. The flat order is kept.
    pub fn reshape(&self, dims: &[usize]) -> Result<DenseTensor> {
        self.clone().into_reshape(dims)
    }

    pub fn into_reshape(self, dims: &[usize]) -> Result<DenseTensor> {
        let len = check_dims(dims)?;
        if len != self.data.len() {
            return Err(Error::shape(format!(
                "cannot reshape {:?} into {dims:?}",
                self.dims
            )));
        }
        Ok(DenseTensor {
            dims: dims.to_vec(),
            data: self.data,
        })
    }

    /// Mode permutation: mode `m` of the result is mode `perm[m]` of `self`.
    pub fn permute(&self, perm: &[usize]) -> Result<DenseTensor> {
        let n = self.order();
        let mut seen = vec![false; n];
        if perm.len() != n {
            return Err(Error::invalid(format!(
                "permutation of length {} for order {n}",
                perm.len()
            )));
        }
        for &p in perm {
            if p >= n || seen[p] {
                return Err(Error::invalid(format!("{perm:?} is not a permutation")));
            }
            seen[p] = true;
        }
        Ok(permute_unchecked(self, perm))
    }

    /// Mode-`k` matricization `T_(k)`: rows are `i_k`, columns enumerate the
    /// remaining modes in ascending order (little-endian).
    pub fn matricize_mode(&self, k: usize) -> Result<Matricized> {
        self.check_mode(k)?;
        let rows = self.dims[k];
        let cols = self.len() / rows;
        let data = if k == 0 {
            self.data.clone()
        } else {
            permute_unchecked(self, &mode_first_perm(self.order(), k)).data
        };
        Ok(Matricized {
            matrix: DMatrix::from_vec(rows, cols, data),
            source_dims: self.dims.clone(),
            grouping: Grouping::Mode(k),
        })
    }

    /// Prefix matricization `T_<k>`: the first `k` modes (`1 <= k < N`) merged
    /// into rows, the rest into columns. No entries move.
    pub fn matricize_prefix(&self, k: usize) -> Result<Matricized> {
        let n = self.order();
        if k == 0 || k >= n {
            return Err(Error::invalid(format!(
                "prefix length {k} must lie in 1..{n} for order {n}"
            )));
        }
        let rows: usize = self.dims[..k].iter().product();
        let cols = self.len() / rows;
        Ok(Matricized {
            matrix: DMatrix::from_vec(rows, cols, self.data.clone()),
            source_dims: self.dims.clone(),
            grouping: Grouping::Prefix(k),
        })
    }

    /// Mode-`(i, j)` matricization for `i < j`: rows merge `(i_i, i_j)` with
    /// `i_i` fastest, columns enumerate the remaining modes ascending.
    pub fn matricize_mode_pair(&self, i: usize, j: usize) -> Result<Matricized> {
        self.check_mode(i)?;
        self.check_mode(j)?;
        if i >= j {
            return Err(Error::invalid(format!(
                "mode pair ({i}, {j}) must satisfy i < j"
            )));
        }
        let rows = self.dims[i] * self.dims[j];
        let cols = self.len() / rows;
        let perm = Grouping::ModePair(i, j).permutation(self.order());
        let data = permute_unchecked(self, &perm).data;
        Ok(Matricized {
            matrix: DMatrix::from_vec(rows, cols, data),
            source_dims: self.dims.clone(),
            grouping: Grouping::ModePair(i, j),
        })
    }

    pub(crate) fn check_mode(&self, k: usize) -> Result<()> {
        if k >= self.order() {
            return Err(Error::ModeOutOfRange {
                mode: k,
                order: self.order(),
            });
        }
        Ok(())
    }
}

/// Which modes of the source tensor went into the rows of a matricization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Grouping {
    Mode(usize),
    Prefix(usize),
    ModePair(usize, usize),
}

impl Grouping {
    /// Mode order of the source tensor as laid out in the matrix buffer.
    fn permutation(self, order: usize) -> Vec<usize> {
        match self {
            Grouping::Mode(k) => mode_first_perm(order, k),
            Grouping::Prefix(_) => (0..order).collect(),
            Grouping::ModePair(i, j) => {
                let mut perm = vec![i, j];
                perm.extend((0..order).filter(|&m| m != i && m != j));
                perm
            }
        }
    }
}

/// A materialized matricization together with what is needed to fold it back.
#[derive(Clone, Debug, PartialEq)]
pub struct Matricized {
    pub matrix: DMatrix<f64>,
    pub source_dims: Vec<usize>,
    pub grouping: Grouping,
}

impl Matricized {
    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    /// Inverse of the matricization.
    pub fn fold(&self) -> DenseTensor {
        fold_matrix(&self.matrix, &self.source_dims, self.grouping)
            .expect("matricization shape is consistent by construction")
    }
}

/// Folds `matrix` back into a tensor of shape `dims` under `grouping`.
pub fn fold_matrix(matrix: &DMatrix<f64>, dims: &[usize], grouping: Grouping) -> Result<DenseTensor> {
    let len = check_dims(dims)?;
    if matrix.len() != len {
        return Err(Error::shape(format!(
            "{}x{} matrix cannot fold into {dims:?}",
            matrix.nrows(),
            matrix.ncols()
        )));
    }
    let perm = grouping.permutation(dims.len());
    let permuted_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let permuted = DenseTensor {
        dims: permuted_dims,
        data: matrix.as_slice().to_vec(),
    };
    Ok(permute_unchecked(&permuted, &inverse_perm(&perm)))
}

pub(crate) fn mode_first_perm(order: usize, k: usize) -> Vec<usize> {
    let mut perm = Vec::with_capacity(order);
    perm.push(k);
    perm.extend((0..order).filter(|&m| m != k));
    perm
}

pub(crate) fn inverse_perm(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (m, &p) in perm.iter().enumerate() {
        inv[p] = m;
    }
    inv
}

/// Odometer increment in little-endian order.
#[inline]
pub(crate) fn advance(idx: &mut [usize], dims: &[usize]) {
    for (i, &d) in idx.iter_mut().zip(dims) {
        *i += 1;
        if *i < d {
            return;
        }
        *i = 0;
    }
}

pub(crate) fn permute_unchecked(t: &DenseTensor, perm: &[usize]) -> DenseTensor {
    let (dims, data) = permute_raw(&t.dims, &t.data, perm);
    DenseTensor { dims, data }
}

/// Permutes a little-endian buffer with shape `dims`; mode `m` of the result is
/// mode `perm[m]` of the input.
pub(crate) fn permute_raw(in_dims: &[usize], src_data: &[f64], perm: &[usize]) -> (Vec<usize>, Vec<f64>) {
    let dims: Vec<usize> = perm.iter().map(|&p| in_dims[p]).collect();
    if perm.iter().enumerate().all(|(m, &p)| m == p) {
        return (dims, src_data.to_vec());
    }
    let in_strides = strides_of(in_dims);
    let strides: Vec<usize> = perm.iter().map(|&p| in_strides[p]).collect();
    let len = src_data.len();
    let mut data = Vec::with_capacity(len);

    let inner = dims[0];
    let inner_stride = strides[0];
    let outer_dims = &dims[1..];
    let outer_strides = &strides[1..];
    let mut idx = vec![0usize; outer_dims.len()];
    let mut base = 0usize;
    for _ in 0..len / inner {
        let src = &src_data[base..];
        if inner_stride == 1 {
            data.extend_from_slice(&src[..inner]);
        } else {
            data.extend((0..inner).map(|i| src[i * inner_stride]));
        }
        // Advance the outer odometer and keep `base` in sync.
        for (m, i) in idx.iter_mut().enumerate() {
            *i += 1;
            base += outer_strides[m];
            if *i < outer_dims[m] {
                break;
            }
            base -= outer_strides[m] * outer_dims[m];
            *i = 0;
        }
    }
    (dims, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iota(dims: &[usize]) -> DenseTensor {
        let len = dims.iter().product::<usize>();
        DenseTensor::new(dims.to_vec(), (0..len).map(|v| v as f64).collect()).unwrap()
    }

    #[test]
    fn vectorize_scalar_like() {
        let t = DenseTensor::new(vec![1, 1], vec![5.0]).unwrap();
        assert_eq!(t.vectorize(), &[5.0]);
    }

    #[test]
    fn vectorize_is_column_major() {
        let t = DenseTensor::from_fn(&[2, 2], |i| match (i[0], i[1]) {
            (0, 0) => 1.0,
            (1, 0) => 2.0,
            (0, 1) => 3.0,
            _ => 4.0,
        });
        assert_eq!(t.vectorize(), &[1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn vectorize_matches_index_formula() {
        let dims = [2, 3, 4];
        let t = DenseTensor::from_fn(&dims, |i| (i[0] * 100 + i[1] * 10 + i[2]) as f64 + 0.5);
        for i0 in 0..2 {
            for i1 in 0..3 {
                for i2 in 0..4 {
                    let flat = i0 + 2 * i1 + 6 * i2;
                    assert_eq!(t.vectorize()[flat], (i0 * 100 + i1 * 10 + i2) as f64 + 0.5);
                    assert_eq!(t.multi_index(flat), vec![i0, i1, i2]);
                }
            }
        }
    }

    #[test]
    fn mode_matricization_of_matrix_is_identity() {
        let t = iota(&[2, 2]);
        let m = t.matricize_mode(0).unwrap();
        assert_eq!(m.matrix, DMatrix::from_vec(2, 2, vec![0.0, 1.0, 2.0, 3.0]));
    }

    #[test]
    fn mode_matricization_matches_definition() {
        let t = iota(&[2, 3, 4]);
        let m = t.matricize_mode(1).unwrap();
        assert_eq!((m.rows(), m.cols()), (3, 8));
        for i0 in 0..2 {
            for i1 in 0..3 {
                for i2 in 0..4 {
                    let col = i0 + 2 * i2;
                    assert_eq!(m.matrix[(i1, col)], t.get(&[i0, i1, i2]));
                }
            }
        }
        assert_eq!(m.fold(), t);
    }

    #[test]
    fn mode_out_of_range() {
        let t = iota(&[2, 3]);
        assert!(matches!(
            t.matricize_mode(2),
            Err(Error::ModeOutOfRange { mode: 2, order: 2 })
        ));
    }

    #[test]
    fn prefix_matricization() {
        let t = iota(&[2, 3]);
        assert_eq!(t.matricize_prefix(1).unwrap().matrix, t.matricize_mode(0).unwrap().matrix);

        let t = iota(&[2, 2, 2]);
        let m = t.matricize_prefix(2).unwrap();
        assert_eq!((m.rows(), m.cols()), (4, 2));
        for i0 in 0..2 {
            for i1 in 0..2 {
                for i2 in 0..2 {
                    assert_eq!(m.matrix[(i0 + 2 * i1, i2)], t.get(&[i0, i1, i2]));
                }
            }
        }
        assert!(t.matricize_prefix(0).is_err());
        assert!(t.matricize_prefix(3).is_err());
    }

    #[test]
    fn vectorize_is_column_stacked_prefix() {
        let t = iota(&[3, 2, 2]);
        let m = t.matricize_prefix(2).unwrap();
        let stacked: Vec<f64> = m.matrix.column_iter().flat_map(|c| c.iter().copied().collect::<Vec<_>>()).collect();
        assert_eq!(stacked, t.vectorize());
    }

    #[test]
    fn mode_pair_matricization() {
        let t = iota(&[2, 3, 2]);
        assert_eq!(
            t.matricize_mode_pair(0, 1).unwrap().matrix,
            t.matricize_prefix(2).unwrap().matrix
        );

        let t = DenseTensor::from_fn(&[2, 2, 2, 2], |i| (i[0] + 2 * i[1] + 4 * i[2] + 8 * i[3]) as f64 * 1.5);
        let m = t.matricize_mode_pair(1, 3).unwrap();
        assert_eq!((m.rows(), m.cols()), (4, 4));
        for i0 in 0..2 {
            for i1 in 0..2 {
                for i2 in 0..2 {
                    for i3 in 0..2 {
                        assert_eq!(m.matrix[(i1 + 2 * i3, i0 + 2 * i2)], t.get(&[i0, i1, i2, i3]));
                    }
                }
            }
        }
        let mut a: Vec<f64> = m.matrix.as_slice().to_vec();
        let mut b = t.as_slice().to_vec();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        assert_eq!(a, b);
        assert_eq!(m.fold(), t);
        assert!(t.matricize_mode_pair(2, 2).is_err());
        assert!(t.matricize_mode_pair(3, 1).is_err());
        assert!(t.matricize_mode_pair(0, 4).is_err());
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(DenseTensor::new(vec![], vec![]).is_err());
        assert!(DenseTensor::new(vec![2, 0], vec![]).is_err());
        assert!(DenseTensor::new(vec![2, 2], vec![0.0; 3]).is_err());
    }

    #[test]
    fn permute_round_trip() {
        let t = iota(&[2, 3, 4, 5]);
        let perm = [2, 0, 3, 1];
        let p = t.permute(&perm).unwrap();
        assert_eq!(p.dims(), &[4, 2, 5, 3]);
        assert_eq!(p.get(&[3, 1, 4, 2]), t.get(&[1, 2, 3, 4]));
        assert_eq!(p.permute(&inverse_perm(&perm)).unwrap(), t);
        assert!(t.permute(&[0, 0, 1, 2]).is_err());
    }
}
