//! Function-valued kernel maps and their norm bounds.

use noncomm_lp::kernel_examples::{Kernel, KernelMap};
use noncomm_lp::linalg::CMat;
use noncomm_lp::{AlgebraElement, Result, TracedAlgebra};

fn main() -> Result<()> {
    let alg = TracedAlgebra::new(vec![2, 1], vec![1.0, 2.0])?;
    let w = AlgebraElement::diag(&alg, &[1.0, 2.0, 0.5])?;
    let t = AlgebraElement::new(
        &alg,
        vec![CMat::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0].map(Into::into)), CMat::from_element(1, 1, 2.0.into())],
    )?;
    for kernel in ["affine", "affine:2,3", "exponential:0.5"] {
        let k: Kernel = kernel.parse()?;
        let km = KernelMap::new(w.clone(), k, t.clone())?;
        let id = AlgebraElement::identity(&alg);
        let f = km.phi_function(&id, &id, &[0.0, 1.0, 2.0])?;
        let report = km.bound_checks(50, 1)?;
        println!(
            "{kernel}: phi(I,I) on [0,1,2] = {:?}; max ratios nr {:.3}, triple {:.3}; passes {}",
            f.values.iter().map(|v| (v.re * 1e6).round() / 1e6).collect::<Vec<_>>(),
            report.max_nr_ratio,
            report.max_triple_ratio,
            report.passes
        );
    }
    Ok(())
}
