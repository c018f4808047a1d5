//! Saving and loading tensors, components, models and masks.

use mtnr::data::{gen_mask, MissingPattern, PatternKind};
use mtnr::io::{load_component, load_mask, load_model, load_tensor, save_component, save_mask, save_model, save_tensor};
use mtnr::{DenseTensor, MtnrModel, RankMatrix, Result, TnComponent};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<()> {
    let dir = tempfile::tempdir()?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let dims = [3, 4, 5];

    let t = DenseTensor::from_fn(&dims, |i| (i[0] * 20 + i[1] * 5 + i[2]) as f64);
    save_tensor(dir.path().join("x.dnt"), &t)?;
    assert_eq!(load_tensor(dir.path().join("x.dnt"))?, t);

    let c = TnComponent::random(&dims, RankMatrix::from_edges(3, &[(0, 2, 2)])?, 2, &mut rng)?;
    save_component(dir.path().join("c.tnc"), &c)?;
    assert_eq!(load_component(dir.path().join("c.tnc"))?, c);

    let model = MtnrModel::from_components(&dims, vec![c.clone(), c])?;
    save_model(dir.path().join("m.mtnr"), &model)?;
    assert_eq!(load_model(dir.path().join("m.mtnr"))?, model);

    let mask = gen_mask(&dims, &MissingPattern::new(PatternKind::Mar, 0.3, 1), &mut rng)?;
    save_mask(dir.path().join("o.msk"), &mask)?;
    assert_eq!(load_mask(dir.path().join("o.msk"))?, mask);

    for name in ["x.dnt", "c.tnc", "m.mtnr", "o.msk"] {
        let len = std::fs::metadata(dir.path().join(name))?.len();
        println!("{name}: {len} bytes");
    }
    Ok(())
}
