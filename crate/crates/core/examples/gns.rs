//! GNS representations of states on matrix and group algebras.

use num_complex::Complex64;
use noncomm_lp::gns::{gns_construct, verify_representation, GnsSource};
use noncomm_lp::rng;
use noncomm_lp::sesquilinear::LinearMap;
use noncomm_lp::star_domain::StarAlgebra;
use noncomm_lp::{PExponent, Result, TracedAlgebra};

fn main() -> Result<()> {
    let (o, l) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    let m2 = StarAlgebra::matrix_algebra(2);
    let a11 = LinearMap::functional(&m2, &[l, o, o, o])?;
    let rep = gns_construct(GnsSource::Functional(a11), PExponent::Finite(2.0), 0)?;
    println!("a11 on M2: quotient {} (null {})", rep.quotient_dim, rep.null_dim());
    println!("  pi(e_12) = {}", rep.pi_of(&m2.basis(1)));
    println!("  cyclic vector {:?}", rep.cyclic);

    let z4 = StarAlgebra::cyclic_group_algebra(4);
    let trace = LinearMap::trace(&z4)?;
    let rep = gns_construct(GnsSource::Functional(trace), PExponent::Finite(2.0), 0)?;
    println!("trace on {}: quotient {}", z4.name(), rep.quotient_dim);

    let m3 = StarAlgebra::matrix_algebra(3);
    let omega = LinearMap::random_positive(&m3, &TracedAlgebra::full(2), 1, &mut rng::substream(9, 0))?;
    let rep = gns_construct(GnsSource::Functional(omega), PExponent::Finite(2.0), 9)?;
    let ver = verify_representation(&rep, 32, 9);
    println!(
        "random M2-valued map on M3: quotient {}, residual {:.2e}, verification passes: {}",
        rep.quotient_dim,
        rep.residuals.max(),
        ver.passes
    );
    Ok(())
}
