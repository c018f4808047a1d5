//! Dense tensor basics: layout, matricizations and the product family.

use mtnr::linalg::svt;
use mtnr::ops::{contract, hadamard, khatri_rao_mode, kronecker, mode_n_product, outer};
use mtnr::{DenseTensor, Result};
use nalgebra::DMatrix;

fn main() -> Result<()> {
    // Column-major layout: the first index varies fastest.
    let x = DenseTensor::from_fn(&[2, 3, 4], |i| (i[0] + 2 * i[1] + 6 * i[2]) as f64);
    println!("x dims {:?}, x[1,2,3] = {}", x.dims(), x.get(&[1, 2, 3]));

    let m1 = x.matricize_mode(1)?;
    println!("mode-1 unfolding: {}x{}", m1.rows(), m1.cols());
    let p = x.matricize_prefix(2)?;
    println!("prefix-2 unfolding: {}x{}", p.rows(), p.cols());
    assert_eq!(m1.fold(), x);

    let y = x.map(|v| v.sin());
    let h = hadamard(&x, &y)?;
    println!("||x * y|| = {:.4}", h.norm());

    let k = kronecker(&x, &DenseTensor::ones(&[2, 1, 2]))?;
    println!("kronecker dims {:?}", k.dims());

    let kr = khatri_rao_mode(&x, &DenseTensor::ones(&[3, 5, 4]), 2)?;
    println!("khatri-rao along mode 2 dims {:?}", kr.dims());

    let o = outer(&x, &DenseTensor::ones(&[5]));
    println!("outer dims {:?}", o.dims());

    let m = DMatrix::from_fn(5, 3, |r, c| (r + c) as f64);
    let z = mode_n_product(&x, &m, 1)?;
    println!("mode-1 product dims {:?}", z.dims());

    // Inner product as a full contraction.
    let ip = contract(&x, &y, &[(0, 0), (1, 1), (2, 2)])?;
    println!("<x, y> = {:.4} (direct {:.4})", ip.as_slice()[0], x.inner(&y)?);

    let a = DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 1.0]);
    println!("svt(diag(3, 1), 2) = {}", svt(&a, 2.0));
    Ok(())
}
