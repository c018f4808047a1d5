//! Missing-entry patterns and quality metrics.

use mtnr::data::{gen_mask, MissingPattern, PatternKind};
use mtnr::metrics::{psnr, rse, ssim_image};
use mtnr::{DenseTensor, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn show(mask: &mtnr::ObservationMask, rows: usize, cols: usize) {
    for h in 0..rows {
        let line: String = (0..cols)
            .map(|w| if mask.is_observed(h + rows * w) { '#' } else { '.' })
            .collect();
        println!("  {line}");
    }
}

fn main() -> Result<()> {
    let dims = [8, 16, 3];
    for kind in [PatternKind::Mar, PatternKind::Rmar, PatternKind::Cmar, PatternKind::Rcmar] {
        let m = gen_mask(&dims, &MissingPattern::new(kind, 0.5, 4), &mut ChaCha8Rng::seed_from_u64(4))?;
        println!("{kind:?}: missing rate {:.3}", m.missing_rate());
        show(&m, 8, 16);
    }

    let truth = DenseTensor::from_fn(&dims, |i| (i[0] * 16 + i[1]) as f64 / 128.0);
    for noise in [0.0, 0.01, 0.1] {
        let x = DenseTensor::from_fn(&dims, |i| truth.get(i) + noise * (((i[0] * 7 + i[1] * 3 + i[2]) % 5) as f64 - 2.0));
        println!(
            "noise {noise}: rse {:.4}, psnr {:.2} dB, ssim {:.4}",
            rse(&x, &truth)?,
            psnr(&x, &truth)?,
            ssim_image(&x, &truth)?
        );
    }
    Ok(())
}
