//! Completion of a low-rank tensor from half of its entries.

use mtnr::atl::AtlConfig;
use mtnr::completion::mtnr_als_complete;
use mtnr::data::{gen_mask, gen_rank1_sum, MissingPattern, PatternKind};
use mtnr::metrics::rse;
use mtnr::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let truth = gen_rank1_sum(&[6, 6, 6, 6], 1, &mut rng)?;
    let mask = gen_mask(truth.dims(), &MissingPattern::new(PatternKind::Mar, 0.5, 2), &mut rng)?;
    println!("{} of {} entries observed", mask.observed_count(), mask.len());

    let cfg = AtlConfig { s_max: 500, ..AtlConfig::default() };
    let out = mtnr_als_complete(&truth, &mask, &cfg, &mut rng)?;
    println!("components {}, relative error {:.3e}", out.model.len(), rse(&out.tensor, &truth)?);

    let kept = (0..truth.len())
        .filter(|&p| mask.is_observed(p))
        .all(|p| out.tensor.as_slice()[p].to_bits() == truth.as_slice()[p].to_bits());
    println!("observed entries copied exactly: {kept}");
    Ok(())
}
