//! Cauchy–Schwarz checks for random positive sesquilinear maps.

use noncomm_lp::inequalities::{check_cs_lp, check_cs_normal, check_re_im, CsConstant, PositiveMap};
use noncomm_lp::rng;
use noncomm_lp::sesquilinear::{random_map_of_kind, MapKind, MapProfile};
use noncomm_lp::{PExponent, Result, TracedAlgebra};

fn main() -> Result<()> {
    let target = TracedAlgebra::new(vec![2, 2], vec![1.0, 0.25])?;
    let map = random_map_of_kind(&MapProfile { dim: 3, target, rank: 2, seed: 1 }, MapKind::Mixed)?;
    let pm = PositiveMap::certify(map, 256, 1)?;
    println!("positivity: {:?}", pm.certificate().status);

    let mut r = rng::substream(1, 1);
    let x = rng::complex_vector(&mut r, 3);
    let y = rng::complex_vector(&mut r, 3);
    for p in [1.0, 1.5, 2.0, 4.0] {
        let p = PExponent::new(p)?;
        let rep = check_cs_lp(&pm, &x, &y, p, CsConstant::default_for(p))?;
        println!("p={p}: {:.4} <= {:.4} (c = {:?}, {:?})", rep.lhs, rep.rhs, rep.constant, rep.status);
    }
    let (re, im) = check_re_im(&pm, &x, &y)?;
    println!("Re: {:.4} <= {:.4}, Im: {:.4} <= {:.4}", re.lhs, re.rhs, im.lhs, im.rhs);

    let diagonal = TracedAlgebra::diagonal(4);
    let map = random_map_of_kind(&MapProfile { dim: 3, target: diagonal, rank: 2, seed: 2 }, MapKind::Kraus)?;
    let pm = PositiveMap::certify(map, 256, 2)?;
    let rep = check_cs_normal(&pm, &x, &y, PExponent::Finite(3.0))?;
    println!("normal values, p=3: ratio {:.4} ({:?})", rep.ratio, rep.status);
    Ok(())
}
