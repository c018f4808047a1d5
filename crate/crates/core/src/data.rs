//! Synthetic tensors, missing-entry patterns and image tensorization.

use std::path::Path;

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::mask::ObservationMask;
use crate::network::{RankMatrix, TnComponent};
use crate::tensor::DenseTensor;

/// How a synthetic tensor is generated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SyntheticKind {
    /// Sum of `terms` outer products of standard-normal vectors.
    Rank1Sum { terms: usize },
    /// Tensor train with standard-normal cores and the given `N - 1` inner ranks.
    TtGenerated { tt_ranks: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyntheticSpec {
    pub kind: SyntheticKind,
    pub dims: Vec<usize>,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(Error::Config(format!("invalid synthetic dims {:?}", self.dims)));
        }
        match &self.kind {
            SyntheticKind::Rank1Sum { terms } if *terms == 0 => Err(Error::Config("terms must be at least 1".into())),
            SyntheticKind::TtGenerated { tt_ranks } if tt_ranks.len() + 1 != self.dims.len() => Err(Error::Config(
                format!("tt_ranks needs {} entries, got {}", self.dims.len() - 1, tt_ranks.len()),
            )),
            SyntheticKind::TtGenerated { tt_ranks } if tt_ranks.contains(&0) => {
                Err(Error::Config("tt_ranks must be at least 1".into()))
            }
            _ => Ok(()),
        }
    }

    /// Generates the tensor from a generator seeded with `self.seed`.
    pub fn generate(&self) -> Result<DenseTensor> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        match &self.kind {
            SyntheticKind::Rank1Sum { terms } => gen_rank1_sum(&self.dims, *terms, &mut rng),
            SyntheticKind::TtGenerated { tt_ranks } => gen_tt(&self.dims, tt_ranks, &mut rng),
        }
    }
}

fn normal_vec<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

/// `Σ_{t < terms} v_0^t ∘ ... ∘ v_{N-1}^t` with i.i.d. `N(0, 1)` vector entries.
pub fn gen_rank1_sum<R: Rng + ?Sized>(dims: &[usize], terms: usize, rng: &mut R) -> Result<DenseTensor> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::invalid(format!("invalid dims {dims:?}")));
    }
    let mut out = DenseTensor::zeros(dims);
    for _ in 0..terms {
        let vectors: Vec<Vec<f64>> = dims.iter().map(|&d| normal_vec(d, rng)).collect();
        out.add_assign(&TnComponent::rank_one(&vectors)?.recover());
    }
    Ok(out)
}

/// Contraction of a tensor train with `N(0, 1)` cores; `ranks[k]` links modes `k` and `k + 1`.
pub fn gen_tt<R: Rng + ?Sized>(dims: &[usize], ranks: &[usize], rng: &mut R) -> Result<DenseTensor> {
    if ranks.len() + 1 != dims.len() {
        return Err(Error::invalid(format!(
            "{} modes need {} TT ranks, got {}",
            dims.len(),
            dims.len() - 1,
            ranks.len()
        )));
    }
    let n = dims.len();
    let mut rm = RankMatrix::new(n);
    for (k, &r) in ranks.iter().enumerate() {
        rm.set(k, k + 1, r)?;
    }
    let t = rm.max_degree().max(1);
    Ok(TnComponent::random(dims, rm, t, rng)?.recover())
}

/// Missing-entry pattern family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PatternKind {
    /// Individual entries missing at random.
    Mar,
    /// Whole rows of the spatial view missing.
    Rmar,
    /// Whole columns of the spatial view missing.
    Cmar,
    /// Rows and columns missing.
    Rcmar,
}

impl std::str::FromStr for PatternKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mar" => Ok(Self::Mar),
            "rmar" => Ok(Self::Rmar),
            "cmar" => Ok(Self::Cmar),
            "rcmar" => Ok(Self::Rcmar),
            other => Err(Error::invalid(format!("unknown missing pattern {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MissingPattern {
    pub kind: PatternKind,
    /// Fraction of entries to remove, in `[0, 1)`.
    pub rate: f64,
    pub seed: u64,
    /// Row and column modes of the spatial view for the row/column patterns.
    pub spatial_modes: (usize, usize),
}

impl MissingPattern {
    pub fn new(kind: PatternKind, rate: f64, seed: u64) -> Self {
        Self {
            kind,
            rate,
            seed,
            spatial_modes: (0, 1),
        }
    }

    pub fn validate(&self, dims: &[usize]) -> Result<()> {
        if !(0.0..1.0).contains(&self.rate) {
            return Err(Error::Config(format!("missing rate must be in [0, 1), got {}", self.rate)));
        }
        if self.kind != PatternKind::Mar {
            let (r, c) = self.spatial_modes;
            if r == c || r >= dims.len() || c >= dims.len() {
                return Err(Error::Config(format!(
                    "spatial modes {:?} invalid for a tensor of order {}",
                    self.spatial_modes,
                    dims.len()
                )));
            }
        }
        Ok(())
    }

    /// Generates the mask from a generator seeded with `self.seed`.
    pub fn generate(&self, dims: &[usize]) -> Result<ObservationMask> {
        gen_mask(dims, self, &mut ChaCha8Rng::seed_from_u64(self.seed))
    }
}

/// Draws a mask with the pattern's missing rate.
///
/// - MAR removes exactly `floor(rate * total)` entries, sampled without replacement.
/// - RMAR / CMAR remove `round(rate * H)` whole rows / columns of the spatial view.
/// - RCMAR removes `round(rate * H / 2)` rows, then random columns until the
///   missing fraction reaches the rate.
pub fn gen_mask<R: Rng + ?Sized>(dims: &[usize], pattern: &MissingPattern, rng: &mut R) -> Result<ObservationMask> {
    pattern.validate(dims)?;
    let total: usize = dims.iter().product();
    let rate = pattern.rate;
    let mut observed = vec![true; total];
    let (rm, cm) = pattern.spatial_modes;
    let strides = crate::tensor::strides_of(dims);
    let strike = |observed: &mut [bool], mode: usize, index: usize| {
        let (stride, d) = (strides[mode], dims[mode]);
        for (p, o) in observed.iter_mut().enumerate() {
            if (p / stride) % d == index {
                *o = false;
            }
        }
    };
    let pick = |count: usize, of: usize, rng: &mut R| -> Vec<usize> { sample(rng, of, count).into_vec() };
    match pattern.kind {
        PatternKind::Mar => {
            let missing = (rate * total as f64).floor() as usize;
            for p in pick(missing, total, rng) {
                observed[p] = false;
            }
        }
        PatternKind::Rmar | PatternKind::Cmar => {
            let mode = if pattern.kind == PatternKind::Rmar { rm } else { cm };
            let count = ((rate * dims[mode] as f64).round() as usize).min(dims[mode]);
            for i in pick(count, dims[mode], rng) {
                strike(&mut observed, mode, i);
            }
        }
        PatternKind::Rcmar => {
            let rows = ((rate * dims[rm] as f64 / 2.0).round() as usize).min(dims[rm]);
            for i in pick(rows, dims[rm], rng) {
                strike(&mut observed, rm, i);
            }
            let mut cols: Vec<usize> = (0..dims[cm]).collect();
            cols.shuffle(rng);
            let target = rate * total as f64;
            for c in cols {
                let missing = observed.iter().filter(|&&o| !o).count();
                if missing as f64 >= target {
                    break;
                }
                strike(&mut observed, cm, c);
            }
        }
    }
    ObservationMask::new(dims.to_vec(), observed)
}

/// Reshapes an `H x W x C` image tensor to `target_dims` (same flat order).
pub fn tensorize_image(image: &DenseTensor, target_dims: &[usize]) -> Result<DenseTensor> {
    image.reshape(target_dims)
}

/// Inverse of [`tensorize_image`].
pub fn detensorize_image(t: &DenseTensor, image_dims: &[usize]) -> Result<DenseTensor> {
    t.reshape(image_dims)
}

/// Reads an 8-bit image as an `H x W x 3` tensor with values in `[0, 1]`.
pub fn load_png(path: impl AsRef<Path>) -> Result<DenseTensor> {
    let img = image::open(path)?.to_rgb8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    Ok(DenseTensor::from_fn(&[h, w, 3], |idx| {
        f64::from(img.get_pixel(idx[1] as u32, idx[0] as u32)[idx[2]]) / 255.0
    }))
}

/// Writes an `H x W x 3` tensor as an 8-bit RGB PNG, clamping to `[0, 1]`.
pub fn save_png(path: impl AsRef<Path>, t: &DenseTensor) -> Result<()> {
    if t.order() != 3 || t.dims()[2] != 3 {
        return Err(Error::shape(format!("expected an H x W x 3 tensor, got {:?}", t.dims())));
    }
    let (h, w) = (t.dims()[0], t.dims()[1]);
    let img = image::RgbImage::from_fn(w as u32, h as u32, |x, y| {
        let px = |c: usize| (t.get(&[y as usize, x as usize, c]).clamp(0.0, 1.0) * 255.0).round() as u8;
        image::Rgb([px(0), px(1), px(2)])
    });
    img.save(path)?;
    Ok(())
}
