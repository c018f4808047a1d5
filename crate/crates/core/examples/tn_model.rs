//! Tensor-network components: topology, reconstruction, growth and rank bounds.

use mtnr::{MtnrModel, RankMatrix, Result, TnComponent};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let dims = [4, 5, 6, 3];

    // A ring: 0-1-2-3-0.
    let ring = RankMatrix::from_edges(4, &[(0, 1, 2), (1, 2, 3), (2, 3, 2), (0, 3, 2)])?;
    let c = TnComponent::random(&dims, ring, 2, &mut rng)?;
    println!("edges {:?}", c.ranks().edges());
    println!("factor dims: {:?}", c.factors().iter().map(|f| f.dims().to_vec()).collect::<Vec<_>>());
    println!("parameters {}", c.parameter_count());

    let x = c.recover();
    println!("reconstruction dims {:?}, norm {:.4}", x.dims(), x.norm());

    let report = c.check_rank_bounds(1e-8);
    for check in &report.checks {
        println!("  {:?}: rank {} <= {}", check.kind, check.rank, check.bound);
    }
    assert!(report.holds());

    // Zero-filled growth keeps the reconstruction; random growth perturbs it slightly.
    let blocked = c.grow_edge_with(0, 2, |_| 0.0);
    println!("(0,2) rejected by the limit of 2 connections: {}", blocked.is_err());
    let grown = c.grow_edge_with(1, 2, |_| 0.0)?;
    println!("rank(1,2) now {}, drift {:.2e}", grown.ranks().get(1, 2), grown.recover().sub(&x)?.norm());
    let nudged = c.grow_edge(2, 3, &mut rng)?;
    println!("random growth drift {:.2e}", nudged.recover().sub(&x)?.norm() / x.norm());

    let mut model = MtnrModel::new(&dims);
    model.push(c)?;
    model.push(TnComponent::rank_one(&dims.iter().map(|&d| vec![1.0; d]).collect::<Vec<_>>())?)?;
    println!("model: {} components, {} parameters", model.len(), model.parameter_count());
    Ok(())
}
