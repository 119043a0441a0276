//! Schatten norms, Hölder's inequality and spectral tails on a weighted
//! two-block algebra, plus a matrix-file round trip.

use noncomm_lp::io::MatrixFile;
use noncomm_lp::linalg::CMat;
use noncomm_lp::rng;
use noncomm_lp::traced_algebra::{holder_check, rho, schatten_norm, spectral_tail_projection};
use noncomm_lp::{AlgebraElement, PExponent, Result, TracedAlgebra};

fn main() -> Result<()> {
    let alg = TracedAlgebra::new(vec![2, 1], vec![1.0, 0.5])?;
    let x = AlgebraElement::new(
        &alg,
        vec![CMat::from_row_slice(2, 2, &[1.0, 2.0, 0.0, -1.0].map(Into::into)), CMat::from_element(1, 1, 3.0.into())],
    )?;
    println!("rho(x) = {}", rho(&x));
    for p in ["1", "1.5", "2", "4", "inf"] {
        let p: PExponent = p.parse()?;
        println!("||x||_{p} = {:.6}", schatten_norm(&x, p));
    }

    let mut r = rng::substream(7, 0);
    let y = AlgebraElement::random(&alg, &mut r);
    for p in [1.5, 2.0, 3.0] {
        let h = holder_check(&x, &y, PExponent::new(p)?)?;
        println!("Hölder p={p}: {:.4} <= {:.4} ({})", h.lhs, h.rhs, h.holds);
    }

    let w = AlgebraElement::diag(&alg, &[0.05, 0.8, 2.0])?;
    let id = AlgebraElement::identity(&alg);
    for n in [1, 2, 10, 30] {
        let p = spectral_tail_projection(&w, 1.0 / n as f64)?;
        let tail = schatten_norm(&(&w * &(&id - &p)), PExponent::Finite(2.0));
        println!("||W(I - P_1/{n})||_2 = {tail:.6}");
    }

    let file = MatrixFile::new(&alg).with_element("x", &x)?.with_element("y", &y)?;
    let back = MatrixFile::from_json(&file.to_json()?)?;
    println!("round trip exact: {}", back.element("y")? == y);
    Ok(())
}
