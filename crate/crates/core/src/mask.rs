//! Observation masks: the set of known entries of a partially observed tensor.

use crate::error::{Error, Result};
use crate::tensor::DenseTensor;

/// Boolean tensor of observed (`true`) entries, stored in flat little-endian order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObservationMask {
    dims: Vec<usize>,
    observed: Vec<bool>,
}

impl ObservationMask {
    pub fn new(dims: Vec<usize>, observed: Vec<bool>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::shape(format!("invalid mask dims {dims:?}")));
        }
        let len: usize = dims.iter().product();
        if observed.len() != len {
            return Err(Error::shape(format!(
                "mask dims {dims:?} need {len} entries, got {}",
                observed.len()
            )));
        }
        Ok(Self { dims, observed })
    }

    pub fn all_observed(dims: &[usize]) -> Self {
        Self::new(dims.to_vec(), vec![true; dims.iter().product()]).expect("valid dims")
    }

    pub fn none_observed(dims: &[usize]) -> Self {
        Self::new(dims.to_vec(), vec![false; dims.iter().product()]).expect("valid dims")
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.observed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observed.is_empty()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.observed
    }

    pub fn is_observed(&self, flat: usize) -> bool {
        self.observed[flat]
    }

    pub fn observed_count(&self) -> usize {
        self.observed.iter().filter(|&&b| b).count()
    }

    pub fn missing_count(&self) -> usize {
        self.len() - self.observed_count()
    }

    /// Fraction of entries that are missing.
    pub fn missing_rate(&self) -> f64 {
        self.missing_count() as f64 / self.len() as f64
    }

    pub(crate) fn check_tensor(&self, t: &DenseTensor, what: &str) -> Result<()> {
        if t.dims() != self.dims.as_slice() {
            return Err(Error::shape(format!(
                "{what}: tensor dims {:?} differ from mask dims {:?}",
                t.dims(),
                self.dims
            )));
        }
        Ok(())
    }

    /// `P_Ω(x)`: observed entries of `x`, zeros elsewhere.
    pub fn project(&self, x: &DenseTensor) -> Result<DenseTensor> {
        self.check_tensor(x, "project")?;
        let data = x
            .as_slice()
            .iter()
            .zip(&self.observed)
            .map(|(&v, &o)| if o { v } else { 0.0 })
            .collect();
        DenseTensor::new(self.dims.clone(), data)
    }

    /// `P_Ωc(x)`: missing entries of `x`, zeros elsewhere.
    pub fn project_complement(&self, x: &DenseTensor) -> Result<DenseTensor> {
        self.check_tensor(x, "project_complement")?;
        let data = x
            .as_slice()
            .iter()
            .zip(&self.observed)
            .map(|(&v, &o)| if o { 0.0 } else { v })
            .collect();
        DenseTensor::new(self.dims.clone(), data)
    }

    /// Frobenius norm of `P_Ω(x)`.
    pub fn observed_norm(&self, x: &DenseTensor) -> Result<f64> {
        self.check_tensor(x, "observed_norm")?;
        Ok(x
            .as_slice()
            .iter()
            .zip(&self.observed)
            .filter(|(_, &o)| o)
            .map(|(v, _)| v * v)
            .sum::<f64>()
            .sqrt())
    }
}

/// Takes observed positions from `fill` and missing positions from `x`:
/// `P_Ωc(x) + P_Ω(fill)`. Observed values are copied, never recomputed.
pub fn apply_mask(x: &DenseTensor, mask: &ObservationMask, fill: &DenseTensor) -> Result<DenseTensor> {
    mask.check_tensor(x, "apply_mask")?;
    mask.check_tensor(fill, "apply_mask")?;
    let data = x
        .as_slice()
        .iter()
        .zip(fill.as_slice())
        .zip(mask.as_slice())
        .map(|((&a, &f), &o)| if o { f } else { a })
        .collect();
    DenseTensor::new(x.dims().to_vec(), data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn apply_mask_extremes() {
        let x = DenseTensor::new(vec![2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let f = DenseTensor::new(vec![2, 2], vec![5.0, 6.0, 7.0, 8.0]).unwrap();
        let all = ObservationMask::all_observed(&[2, 2]);
        let none = ObservationMask::none_observed(&[2, 2]);
        assert_eq!(apply_mask(&x, &all, &f).unwrap(), f);
        assert_eq!(apply_mask(&x, &none, &f).unwrap(), x);
        let m = ObservationMask::new(vec![2, 2], vec![true, false, false, true]).unwrap();
        assert_eq!(apply_mask(&x, &m, &f).unwrap().as_slice(), &[5.0, 2.0, 3.0, 8.0]);
        assert_eq!(m.project(&x).unwrap().as_slice(), &[1.0, 0.0, 0.0, 4.0]);
        assert_eq!(m.project_complement(&x).unwrap().as_slice(), &[0.0, 2.0, 3.0, 0.0]);
        assert_eq!(m.observed_norm(&x).unwrap(), 17f64.sqrt());
    }

    #[test]
    fn shape_checks() {
        let x = DenseTensor::zeros(&[2, 3]);
        let m = ObservationMask::all_observed(&[3, 2]);
        assert!(apply_mask(&x, &m, &x).is_err());
        assert!(ObservationMask::new(vec![2, 2], vec![true; 3]).is_err());
    }
}
