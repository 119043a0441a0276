//! Numerical radius and the generalized numerical-radius norm.

use noncomm_lp::radius_norms::{numerical_radius_witness, triple_norm, Budget};
use noncomm_lp::rng;
use noncomm_lp::traced_algebra::schatten_norm;
use noncomm_lp::{AlgebraElement, PExponent, Result, TracedAlgebra};

fn main() -> Result<()> {
    let m2 = TracedAlgebra::full(2);
    let nil = AlgebraElement::from_real_rows(&m2, &[&[0.0, 1.0], &[0.0, 0.0]])?;
    let wit = numerical_radius_witness(nil.block(0));
    println!("w(N) = {:.10} at θ = {:.4}, h = {:?}", wit.value, wit.theta, wit.vector);

    let budget = Budget::default();
    for (name, f) in [
        ("diag(1,0)", AlgebraElement::diag(&m2, &[1.0, 0.0])?),
        ("I", AlgebraElement::identity(&m2)),
        ("N", nil),
    ] {
        let r = triple_norm(&f, budget);
        println!("|||{name}|||_2 = {:.8} (upper {:.4}, {:?})", r.value, r.upper_bound, r.status);
    }

    let alg = TracedAlgebra::new(vec![3, 2], vec![1.0, 0.5])?;
    let f = AlgebraElement::random(&alg, &mut rng::substream(4, 0));
    let r = triple_norm(&f, budget.with_starts(32));
    println!(
        "random F: w = {:.4} <= |||F|||_2 >= {:.4} <= ||F||_2 = {:.4}",
        noncomm_lp::radius_norms::numerical_radius_element(&f),
        r.value,
        schatten_norm(&f, PExponent::Finite(2.0))
    );
    Ok(())
}
