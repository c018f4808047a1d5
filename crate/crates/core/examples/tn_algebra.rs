//! Operations carried out directly on network factors, checked against the
//! dense results.

use mtnr::algebra::{prepare_for_add, tn_add, tn_add_connected, tn_hadamard, tn_inner, tn_khatri_rao, tn_kronecker, tn_outer, topology_of_sum};
use mtnr::ops::{hadamard, khatri_rao_mode, kronecker, outer};
use mtnr::{DenseTensor, RankMatrix, Result, TnComponent};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rel(a: &DenseTensor, b: &DenseTensor) -> f64 {
    a.sub(b).expect("same dims").norm() / b.norm()
}

fn main() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let dims = [3, 4, 2];
    let tt = RankMatrix::from_edges(3, &[(0, 1, 2), (1, 2, 3)])?;
    let tr = RankMatrix::from_edges(3, &[(0, 1, 2), (1, 2, 2), (0, 2, 2)])?;
    let a = TnComponent::random(&dims, tt, 2, &mut rng)?;
    let b = TnComponent::random(&dims, tr, 2, &mut rng)?;
    let (xa, xb) = (a.recover(), b.recover());

    let h = tn_hadamard(&a, &b)?;
    println!("hadamard: edges {:?}, error {:.1e}", h.ranks().edges(), rel(&h.recover(), &hadamard(&xa, &xb)?));

    println!("inner: {:.6} vs dense {:.6}", tn_inner(&a, &b)?, xa.inner(&xb)?);

    let k = tn_kronecker(&a, &b)?;
    println!("kronecker: dims {:?}, error {:.1e}", k.physical_dims(), rel(&k.recover(), &kronecker(&xa, &xb)?));

    let kr = tn_khatri_rao(&a, &b, 1)?;
    println!("khatri-rao: error {:.1e}", rel(&kr.recover(), &khatri_rao_mode(&xa, &xb, 1)?));

    let o = tn_outer(&a, &b)?;
    println!("outer: order {}, error {:.1e}", o.order(), rel(&o.recover(), &outer(&xa, &xb)));

    // The sum needs a connected union graph. Factor 2 is isolated in both
    // operands here, so a zero-filled edge links it first.
    let pair = RankMatrix::from_edges(3, &[(0, 1, 2)])?;
    let a = TnComponent::random(&dims, pair.clone(), 2, &mut rng)?;
    let c = TnComponent::random(&dims, pair, 2, &mut rng)?;
    let xa = a.recover();
    let (pa, pc) = prepare_for_add(&a, &c, &mut rng)?;
    println!("prepared: {:?} + {:?}", pa.ranks().edges(), pc.ranks().edges());
    let s = tn_add_connected(&pa, &pc)?;
    println!(
        "sum: edges {:?} (predicted {:?}), error {:.1e}",
        s.ranks().edges(),
        topology_of_sum(&[pa.ranks().clone(), pc.ranks().clone()])?.edges(),
        rel(&s.recover(), &xa.add(&c.recover())?)
    );
    let direct = tn_add(&a, &c, &mut rng)?;
    println!("tn_add in one call: error {:.1e}", rel(&direct.recover(), &xa.add(&c.recover())?));
    Ok(())
}
