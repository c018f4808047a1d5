//! Reconstruction quality metrics.

use crate::error::{Error, Result};
use crate::tensor::DenseTensor;

/// Reported PSNR for an exact reconstruction.
pub const PSNR_CAP_DB: f64 = 99.0;

/// Relative square error `||x - truth|| / ||truth||`.
pub fn rse(x: &DenseTensor, truth: &DenseTensor) -> Result<f64> {
    let norm = truth.norm();
    if norm == 0.0 {
        return Err(Error::invalid("relative error against a zero tensor"));
    }
    Ok(x.sub(truth)?.norm() / norm)
}

/// `10 log10(max(truth)^2 * len / ||x - truth||^2)`, capped at [`PSNR_CAP_DB`].
pub fn psnr(x: &DenseTensor, truth: &DenseTensor) -> Result<f64> {
    let err = x.sub(truth)?.norm_sq();
    if err == 0.0 {
        return Ok(PSNR_CAP_DB);
    }
    let peak = truth.as_slice().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let value = 10.0 * (peak * peak * truth.len() as f64 / err).log10();
    Ok(value.min(PSNR_CAP_DB))
}

/// Single-window SSIM from global statistics of two equally sized samples,
/// with `c1 = (0.01 L)^2`, `c2 = (0.03 L)^2` and `L` the range of `truth`.
pub fn ssim_values(x: &[f64], truth: &[f64]) -> Result<f64> {
    if x.len() != truth.len() || x.is_empty() {
        return Err(Error::shape("ssim needs two non-empty samples of equal size"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = truth.iter().sum::<f64>() / n;
    let (mut vx, mut vy, mut cov) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(truth) {
        vx += (a - mx) * (a - mx);
        vy += (b - my) * (b - my);
        cov += (a - mx) * (b - my);
    }
    vx /= n;
    vy /= n;
    cov /= n;
    let hi = truth.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = truth.iter().copied().fold(f64::INFINITY, f64::min);
    let l = hi - lo;
    let c1 = (0.01 * l).powi(2);
    let c2 = (0.03 * l).powi(2);
    let num = (2.0 * mx * my + c1) * (2.0 * cov + c2);
    let den = (mx * mx + my * my + c1) * (vx + vy + c2);
    if den == 0.0 {
        // Both samples constant and equal (L = 0 forces c1 = c2 = 0).
        return Ok(if x == truth { 1.0 } else { 0.0 });
    }
    Ok(num / den)
}

/// SSIM of two tensors taken as one flat sample.
pub fn ssim(x: &DenseTensor, truth: &DenseTensor) -> Result<f64> {
    truth.same_shape(x, "ssim")?;
    ssim_values(x.as_slice(), truth.as_slice())
}

/// Mean per-channel SSIM of two `H x W x C` images.
pub fn ssim_image(x: &DenseTensor, truth: &DenseTensor) -> Result<f64> {
    truth.same_shape(x, "ssim")?;
    if truth.order() != 3 {
        return Err(Error::shape(format!("expected an H x W x C image, got {:?}", truth.dims())));
    }
    let plane = truth.dims()[0] * truth.dims()[1];
    let channels = truth.dims()[2];
    let mut total = 0.0;
    for c in 0..channels {
        let r = c * plane..(c + 1) * plane;
        total += ssim_values(&x.as_slice()[r.clone()], &truth.as_slice()[r])?;
    }
    Ok(total / channels as f64)
}
