//! Uncertainty relation for the Pauli pair under a kernel map on M2.

use num_complex::Complex64;
use noncomm_lp::inequalities::{default_grid, uncertainty_check};
use noncomm_lp::kernel_examples::{Kernel, KernelMap};
use noncomm_lp::star_domain::{AlgebraVector, StarAlgebra};
use noncomm_lp::{AlgebraElement, Result, TracedAlgebra};

fn main() -> Result<()> {
    let m2 = TracedAlgebra::full(2);
    let w = AlgebraElement::diag(&m2, &[1.0, 2.0])?;
    let km = KernelMap::new(w, Kernel::affine(), AlgebraElement::identity(&m2))?;
    let map = km.sesquilinear_map()?;

    let dom = StarAlgebra::from_traced(&m2);
    let (o, l, i) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0));
    let sx = AlgebraVector::new(&dom, vec![o, l, l, o])?;
    let sy = AlgebraVector::new(&dom, vec![o, -i, i, o])?;

    let sweep = uncertainty_check(&map, &sx, &sy, &default_grid(), &default_grid())?;
    println!("k = {:?}", sweep.k);
    println!("gamma = {:.10} (sqrt 20 = {:.10})", sweep.gamma, 20f64.sqrt());
    println!(
        "min Δa·Δb = {:.6} at λ = {:.4}, μ = {:.4}; bound γ/2 = {:.6}",
        sweep.min_product,
        sweep.best_lambda,
        sweep.best_mu,
        0.5 * sweep.gamma
    );
    println!("status: {:?}", sweep.status());
    Ok(())
}
