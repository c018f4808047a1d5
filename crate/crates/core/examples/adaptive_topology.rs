//! Greedy decomposition of a synthetic tensor with learned topologies.

use mtnr::atl::{run_atl, AtlConfig};
use mtnr::data::gen_rank1_sum;
use mtnr::experiment::describe_model;
use mtnr::metrics::rse;
use mtnr::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x = gen_rank1_sum(&[6, 6, 6, 6], 8, &mut rng)?;
    let cfg = AtlConfig::default();
    let model = run_atl(&x, &cfg, &mut rng)?;
    println!("relative error {:.3e}", rse(&model.recover(), &x)?);
    print!("{}", describe_model(&model));
    Ok(())
}
