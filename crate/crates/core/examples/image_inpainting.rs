//! Inpainting a 64x64 image with 90% of its pixels removed, using both solvers.
//!
//! Usage: `cargo run --release --example image_inpainting [out_dir]`

use std::path::PathBuf;

use mtnr::completion::{mtnr_admm_complete, mtnr_als_complete, AdmmConfig};
use mtnr::data::{detensorize_image, gen_mask, load_png, save_png, tensorize_image, MissingPattern, PatternKind};
use mtnr::metrics::{psnr, rse, ssim_image};
use mtnr::{apply_mask, DenseTensor, ObservationMask, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<()> {
    let out_dir = std::env::args().nth(1).map_or_else(std::env::temp_dir, PathBuf::from);
    let image = load_png(concat!(env!("CARGO_MANIFEST_DIR"), "/data/astronaut64.png"))?;
    let dims = [8, 8, 8, 8, 3];
    let x = tensorize_image(&image, &dims)?;

    let pixel_mask = gen_mask(image.dims(), &MissingPattern::new(PatternKind::Mar, 0.9, 0), &mut ChaCha8Rng::seed_from_u64(0))?;
    let mask = ObservationMask::new(dims.to_vec(), pixel_mask.as_slice().to_vec())?;
    let observed = apply_mask(&DenseTensor::zeros(&dims), &mask, &x)?;
    save_png(out_dir.join("observed.png"), &detensorize_image(&observed, image.dims())?)?;

    let cfg = AdmmConfig::default();
    let report = |name: &str, t: &DenseTensor| -> Result<()> {
        let img = detensorize_image(t, image.dims())?;
        println!(
            "{name}: rse {:.4}, psnr {:.2} dB, ssim {:.4}",
            rse(t, &x)?,
            psnr(t, &x)?,
            ssim_image(&img, &image)?
        );
        save_png(out_dir.join(format!("{name}.png")), &img)
    };
    let als = mtnr_als_complete(&x, &mask, &cfg.atl, &mut ChaCha8Rng::seed_from_u64(1))?;
    report("als", &als.tensor)?;
    let admm = mtnr_admm_complete(&x, &mask, &cfg, &mut ChaCha8Rng::seed_from_u64(1))?;
    report("admm", &admm.tensor)?;
    println!("images written to {}", out_dir.display());
    Ok(())
}
