//! Superoperator norms and Cauchy–Schwarz for operator-valued maps.

use num_complex::Complex64;
use noncomm_lp::radius_norms::{
    check_cs_operator_valued, superop_norm, Budget, OperatorValuedMap, SuperOperator, TargetNorm,
};
use noncomm_lp::rng;
use noncomm_lp::{Result, TracedAlgebra};

fn main() -> Result<()> {
    let m2 = TracedAlgebra::full(2);
    let transpose = SuperOperator::from_fn(&m2, &m2, |s| s.map_blocks(|b| b.transpose()))?;
    println!("transpose completely positive: {}", transpose.is_completely_positive());
    for norm in ["nr", "schatten-inf", "schatten:2"] {
        let norm: TargetNorm = norm.parse()?;
        let n = superop_norm(&transpose, norm, Budget::default());
        println!("||transpose|| in {norm}: {:.6} ({:?})", n.value, n.status);
    }

    let mut r = rng::substream(3, 0);
    let kraus: Vec<_> = (0..2).map(|_| rng::ginibre(&mut r, 2, 2)).collect();
    let scalar = OperatorValuedMap::scalar(SuperOperator::from_kraus(&m2, &m2, &kraus)?);
    let one = [Complex64::new(0.7, 0.2)];
    let two = [Complex64::new(-1.1, 0.4)];
    let rep = check_cs_operator_valued(&scalar, &one, &two, TargetNorm::NumericalRadius, Budget::default())?;
    println!("d = 1 ratio: {:.12}", rep.report.ratio);

    let m3 = TracedAlgebra::full(3);
    let map = OperatorValuedMap::random_generator(&m3, &m3, 2, 2, 5)?;
    let x = rng::complex_vector(&mut r, 2);
    let y = rng::complex_vector(&mut r, 2);
    for norm in [TargetNorm::NumericalRadius, TargetNorm::Triple2] {
        let rep = check_cs_operator_valued(&map, &x, &y, norm, Budget::default().with_starts(32))?;
        println!(
            "{norm}: {:.4} <= {:.4} ({:?}, lhs {:?}, escalated {})",
            rep.report.lhs, rep.report.rhs, rep.report.status, rep.lhs_status, rep.escalated
        );
    }
    Ok(())
}
