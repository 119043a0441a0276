use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;

use super::*;
use crate::linalg::{CMat, I};
use crate::rng::substream;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn nilpotent() -> AlgebraElement {
    AlgebraElement::from_real_rows(&TracedAlgebra::full(2), &[&[0.0, 1.0], &[0.0, 0.0]]).unwrap()
}

fn close(a: &AlgebraElement, b: &AlgebraElement, tol: f64) -> bool {
    a.distance(b) <= tol
}

fn weighted() -> Arc<TracedAlgebra> {
    TracedAlgebra::new(vec![2, 1, 3], vec![0.5, 2.0, 1.25]).unwrap()
}

#[test]
fn algebra_validation() {
    assert!(TracedAlgebra::new(vec![], vec![]).is_err());
    assert!(TracedAlgebra::new(vec![2, 0], vec![1.0, 1.0]).is_err());
    assert!(TracedAlgebra::new(vec![2], vec![0.0]).is_err());
    assert!(TracedAlgebra::new(vec![2], vec![1.0, 2.0]).is_err());
    let a = weighted();
    assert_eq!(a.trace_of_identity(), 0.5 * 2.0 + 2.0 + 1.25 * 3.0);
    assert_eq!(a.coord_dim(), 4 + 1 + 9);
}

#[test]
fn trace_examples() {
    let m2 = TracedAlgebra::full(2);
    assert_eq!(trace(&m2, &AlgebraElement::identity(&m2)).unwrap(), c(2.0, 0.0));
    let c2 = TracedAlgebra::new(vec![1, 1], vec![2.0, 1.0]).unwrap();
    let x = AlgebraElement::diag(&c2, &[1.0, 1.0]).unwrap();
    assert_eq!(trace(&c2, &x).unwrap(), c(3.0, 0.0));
    assert_eq!(trace(&m2, &nilpotent()).unwrap(), c(0.0, 0.0));
    assert!(trace(&c2, &nilpotent()).is_err());
}

#[test]
fn trace_is_tracial() {
    let alg = weighted();
    let mut rng = substream(3, 0);
    for _ in 0..20 {
        let x = AlgebraElement::random(&alg, &mut rng);
        let y = AlgebraElement::random(&alg, &mut rng);
        assert!((rho(&(&x * &y)) - rho(&(&y * &x))).norm() < 1e-12);
        assert!((rho_product(&x, &y) - rho(&(&x * &y))).norm() < 1e-12);
    }
}

#[test]
fn schatten_examples() {
    let m2 = TracedAlgebra::full(2);
    let x = AlgebraElement::diag(&m2, &[3.0, 4.0]).unwrap();
    assert!((schatten_norm(&x, PExponent::Finite(1.0)) - 7.0).abs() < 1e-12);
    assert!((schatten_norm(&x, PExponent::Finite(2.0)) - 5.0).abs() < 1e-12);
    assert!((schatten_norm(&x, PExponent::Infinity) - 4.0).abs() < 1e-12);
    assert!((schatten_norm(&x, PExponent::Finite(3.0)) - 91f64.powf(1.0 / 3.0)).abs() < 1e-12);
    assert!(schatten_norm_p(&x, 0.5).is_err());
}

#[test]
fn exponent_conjugates() {
    assert_eq!(PExponent::new(1.0).unwrap().conjugate(), PExponent::Infinity);
    assert_eq!(PExponent::Infinity.conjugate(), PExponent::Finite(1.0));
    assert_eq!(PExponent::new(3.0).unwrap().conjugate(), PExponent::Finite(1.5));
    assert!(PExponent::new(0.99).is_err());
    assert_eq!("inf".parse::<PExponent>().unwrap(), PExponent::Infinity);
    let text = serde_json::to_string(&PExponent::Infinity).unwrap();
    assert_eq!(serde_json::from_str::<PExponent>(&text).unwrap(), PExponent::Infinity);
}

#[test]
fn polar_examples() {
    let m2 = TracedAlgebra::full(2);
    let (z, a) = polar_decomposition(&nilpotent());
    assert!(close(&z, &nilpotent(), 1e-12));
    assert!(close(&a, &AlgebraElement::diag(&m2, &[0.0, 1.0]).unwrap(), 1e-12));

    let psd = AlgebraElement::diag(&m2, &[2.0, 0.0]).unwrap();
    let (z, a) = polar_decomposition(&psd);
    assert!(close(&z, &AlgebraElement::diag(&m2, &[1.0, 0.0]).unwrap(), 1e-12));
    assert!(close(&a, &psd, 1e-12));

    let x = AlgebraElement::diag(&m2, &[2.0, -1.0]).unwrap();
    let (z, a) = polar_decomposition(&x);
    assert!(close(&z, &AlgebraElement::diag(&m2, &[1.0, -1.0]).unwrap(), 1e-12));
    assert!(close(&a, &AlgebraElement::diag(&m2, &[2.0, 1.0]).unwrap(), 1e-12));

    let zero = AlgebraElement::zeros(&m2);
    let (z, a) = polar_decomposition(&zero);
    assert!(z.is_zero(0.0) && a.is_zero(0.0));
}

#[test]
fn polar_of_random_rank_deficient_elements() {
    let alg = weighted();
    let mut rng = substream(5, 0);
    for _ in 0..20 {
        let g = AlgebraElement::random(&alg, &mut rng);
        // kill one direction in the 3x3 block
        let mut blocks = g.clone().into_blocks();
        blocks[2].set_column(0, &nalgebra::DVector::zeros(3));
        let x = AlgebraElement::new(&alg, blocks).unwrap();
        let (z, a) = polar_decomposition(&x);
        let tol = 1e-10 * schatten_norm(&x, PExponent::Infinity);
        assert!(close(&(&z * &a), &x, tol));
        assert!(a.is_psd());
        assert!(z.is_partial_isometry());
        // Z^*Z is the support projection of |X|
        let support = spectral_tail_projection(&a, 1e-9).unwrap();
        assert!(close(&(&z.adjoint() * &z), &support, 1e-9));
    }
}

#[test]
fn tail_projection_examples() {
    let m3 = TracedAlgebra::full(3);
    let w = AlgebraElement::diag(&m3, &[0.1, 0.5, 2.0]).unwrap();
    let p = spectral_tail_projection(&w, 1.0 / 3.0).unwrap();
    assert!(close(&p, &AlgebraElement::diag(&m3, &[0.0, 1.0, 1.0]).unwrap(), 1e-14));
    let rest = &AlgebraElement::identity(&m3) - &p;
    assert!((schatten_norm(&(&w * &rest), PExponent::Finite(1.0)) - 0.1).abs() < 1e-14);
    assert!(spectral_tail_projection(&w, 2.0).unwrap().is_zero(1e-14));
    let id = AlgebraElement::identity(&m3);
    assert!(close(&spectral_tail_projection(&id, 0.5).unwrap(), &id, 1e-14));
    assert!(spectral_tail_projection(&AlgebraElement::diag(&m3, &[1.0, -1.0, 0.0]).unwrap(), 0.5).is_err());
    assert!(spectral_tail_projection(&id, 0.0).is_err());
}

#[test]
fn functional_calculus_examples() {
    let m2 = TracedAlgebra::full(2);
    let w = AlgebraElement::diag(&m2, &[1.0, 4.0]).unwrap();
    let root = functional_calculus(&w, |t| (t >= 0.0).then(|| c(t.sqrt(), 0.0))).unwrap();
    assert!(close(&root, &AlgebraElement::diag(&m2, &[1.0, 2.0]).unwrap(), 1e-14));
    let one = functional_calculus(&w, |_| Some(c(1.0, 0.0))).unwrap();
    assert!(close(&one, &AlgebraElement::identity(&m2), 1e-14));
    let w = AlgebraElement::diag(&m2, &[1.0, 2.0]).unwrap();
    let aff = functional_calculus(&w, |t| Some(c(1.0 + 3.0 * t, 0.0))).unwrap();
    assert!(close(&aff, &AlgebraElement::diag(&m2, &[4.0, 7.0]).unwrap(), 1e-14));
    let neg = AlgebraElement::diag(&m2, &[-1.0, 2.0]).unwrap();
    assert!(functional_calculus(&neg, |t| (t >= 0.0).then(|| c(t.sqrt(), 0.0))).is_err());
    assert!(functional_calculus(&nilpotent(), |t| Some(c(t, 0.0))).is_err());
}

#[test]
fn functional_calculus_is_multiplicative() {
    let alg = weighted();
    let mut rng = substream(8, 0);
    let h = AlgebraElement::random_hermitian(&alg, &mut rng);
    let f = functional_calculus(&h, |t| Some(c(t.sin(), 0.0))).unwrap();
    let g = functional_calculus(&h, |t| Some(c(1.0 + t * t, 0.0))).unwrap();
    let fg = functional_calculus(&h, |t| Some(c(t.sin() * (1.0 + t * t), 0.0))).unwrap();
    assert!(close(&(&f * &g), &fg, 1e-11));
    let id = functional_calculus(&h, |t| Some(c(t, 0.0))).unwrap();
    assert!(close(&id, &h, 1e-12));
}

#[test]
fn real_imag_examples() {
    let m2 = TracedAlgebra::full(2);
    let h = AlgebraElement::diag(&m2, &[1.0, -3.0]).unwrap();
    let (re, im) = real_imag_parts(&h);
    assert!(close(&re, &h, 0.0) && im.is_zero(0.0));
    let ii = AlgebraElement::identity(&m2).scale(I);
    let (re, im) = real_imag_parts(&ii);
    assert!(re.is_zero(0.0) && close(&im, &AlgebraElement::identity(&m2), 1e-15));
    let (re, im) = real_imag_parts(&nilpotent());
    let re_expect = AlgebraElement::from_real_rows(&m2, &[&[0.0, 0.5], &[0.5, 0.0]]).unwrap();
    let im_expect = AlgebraElement::from_rows(
        &m2,
        &[vec![c(0.0, 0.0), c(0.0, -0.5)], vec![c(0.0, 0.5), c(0.0, 0.0)]],
    )
    .unwrap();
    assert!(close(&re, &re_expect, 1e-15));
    assert!(close(&im, &im_expect, 1e-15));
    assert!(re.is_hermitian() && im.is_hermitian());
}

/// Independent oracle: closed-form positive/negative parts of a 2x2 hermitian
/// matrix `[[a, b], [conj b, d]]` via its two eigenprojections.
fn oracle_parts_2x2(h: &CMat) -> (CMat, CMat) {
    let a = h[(0, 0)].re;
    let d = h[(1, 1)].re;
    let b = h[(0, 1)];
    let mid = 0.5 * (a + d);
    let rad = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    let (l_plus, l_minus) = (mid + rad, mid - rad);
    let id = CMat::identity(2, 2);
    // P± = (H − λ∓ I)/(λ± − λ∓)
    let p_plus = (h - &id * c(l_minus, 0.0)) / c(l_plus - l_minus, 0.0);
    let p_minus = &id - &p_plus;
    let pos = &p_plus * c(l_plus.max(0.0), 0.0) + &p_minus * c(l_minus.max(0.0), 0.0);
    let neg = &p_plus * c((-l_plus).max(0.0), 0.0) + &p_minus * c((-l_minus).max(0.0), 0.0);
    (pos, neg)
}

#[test]
fn jordan_split_examples() {
    let m2 = TracedAlgebra::full(2);
    let s = jordan_split(&AlgebraElement::diag(&m2, &[1.0, -2.0]).unwrap());
    assert!(close(&s.xi1, &AlgebraElement::diag(&m2, &[1.0, 0.0]).unwrap(), 1e-14));
    assert!(close(&s.xi2, &AlgebraElement::diag(&m2, &[0.0, 2.0]).unwrap(), 1e-14));
    assert!(s.xi3.is_zero(1e-15) && s.xi4.is_zero(1e-15));

    let s = jordan_split(&AlgebraElement::diag(&m2, &[1.0, -1.0]).unwrap().scale(I));
    assert!(s.xi1.is_zero(1e-15) && s.xi2.is_zero(1e-15));
    assert!(close(&s.xi3, &AlgebraElement::diag(&m2, &[1.0, 0.0]).unwrap(), 1e-14));
    assert!(close(&s.xi4, &AlgebraElement::diag(&m2, &[0.0, 1.0]).unwrap(), 1e-14));

    let s = jordan_split(&nilpotent());
    let quarter = AlgebraElement::from_real_rows(&m2, &[&[0.25, 0.25], &[0.25, 0.25]]).unwrap();
    assert!(close(&s.xi1, &quarter, 1e-14));
    let (re, im) = real_imag_parts(&nilpotent());
    let (p1, n1) = oracle_parts_2x2(re.block(0));
    let (p3, n3) = oracle_parts_2x2(im.block(0));
    assert!(crate::linalg::max_abs(&(s.xi1.block(0) - p1)) < 1e-14);
    assert!(crate::linalg::max_abs(&(s.xi2.block(0) - n1)) < 1e-14);
    assert!(crate::linalg::max_abs(&(s.xi3.block(0) - p3)) < 1e-14);
    assert!(crate::linalg::max_abs(&(s.xi4.block(0) - n3)) < 1e-14);
}

#[test]
fn holder_examples() {
    let m2 = TracedAlgebra::full(2);
    let id = AlgebraElement::identity(&m2);
    let r = holder_check(&id, &id, PExponent::Finite(2.0)).unwrap();
    assert!((r.lhs - 2.0).abs() < 1e-12 && (r.rhs - 2.0).abs() < 1e-12 && r.holds);
    let r = holder_check(&nilpotent(), &AlgebraElement::zeros(&m2), PExponent::Finite(3.0)).unwrap();
    assert!(r.lhs == 0.0 && r.rhs == 0.0 && r.holds);
    let a = AlgebraElement::diag(&m2, &[1.0, 0.0]).unwrap();
    let b = AlgebraElement::diag(&m2, &[0.0, 1.0]).unwrap();
    for p in [1.0, 1.5, 2.0, f64::INFINITY] {
        let r = holder_check(&a, &b, PExponent::new(p).unwrap()).unwrap();
        assert!(r.lhs == 0.0 && r.rhs > 0.0 && r.holds);
    }
}

#[test]
fn pairing_examples() {
    let m2 = TracedAlgebra::full(2);
    let a = AlgebraElement::diag(&m2, &[1.0, 2.0]).unwrap();
    let r = trace_pairing_checks(&a, &a, PairingCase::PsdPair).unwrap();
    assert!((r.re - 5.0).abs() < 1e-14 && r.passes());
    let s = AlgebraElement::diag(&m2, &[1.0, -1.0]).unwrap();
    let r = trace_pairing_checks(&s, &s, PairingCase::HermitianPair).unwrap();
    assert!((r.re - 2.0).abs() < 1e-14 && r.passes());
    assert!(trace_pairing_checks(&s, &s, PairingCase::PsdPair).is_err());
    assert!(trace_pairing_checks(&nilpotent(), &s, PairingCase::HermitianPair).is_err());

    // rank-one pair: ρ(xx* yy*) = |<x, y>|^2
    let m3 = TracedAlgebra::full(3);
    let mut rng = substream(11, 0);
    for _ in 0..10 {
        let x = crate::rng::complex_vector(&mut rng, 3);
        let y = crate::rng::complex_vector(&mut rng, 3);
        let inner: Complex64 = x.iter().zip(&y).map(|(a, b)| a.conj() * b).sum();
        let xa = AlgebraElement::new(&m3, vec![crate::linalg::outer(&x, &x)]).unwrap();
        let ya = AlgebraElement::new(&m3, vec![crate::linalg::outer(&y, &y)]).unwrap();
        let r = trace_pairing_checks(&xa, &ya, PairingCase::PsdPair).unwrap();
        assert!((r.re - inner.norm_sqr()).abs() < 1e-10 * (1.0 + inner.norm_sqr()));
        assert!(r.passes());
    }
}

#[test]
fn dual_achiever_examples() {
    let m2 = TracedAlgebra::full(2);
    let a = AlgebraElement::diag(&m2, &[2.0, -1.0]).unwrap();
    let (b, attained) = dual_norm_achiever(&a, PExponent::Finite(3.0)).unwrap();
    let expect = AlgebraElement::diag(&m2, &[4.0, -1.0]).unwrap().scale_real(9f64.powf(-2.0 / 3.0));
    assert!(close(&b, &expect, 1e-13));
    assert!((attained - 9f64.powf(1.0 / 3.0)).abs() < 1e-12);
    assert!((schatten_norm(&b, PExponent::Finite(1.5)) - 1.0).abs() < 1e-12);

    let mut rng = substream(2, 0);
    let psd = AlgebraElement::random_psd(&m2, &mut rng);
    let (b, attained) = dual_norm_achiever(&psd, PExponent::Finite(2.0)).unwrap();
    let n2 = schatten_norm(&psd, PExponent::Finite(2.0));
    assert!(close(&b, &psd.scale_real(1.0 / n2), 1e-12));
    assert!((attained - n2).abs() < 1e-12 * n2);

    // rank one in a weighted algebra: ‖uu*‖_p = w^{1/p} |u|^2
    let alg = TracedAlgebra::new(vec![3], vec![2.5]).unwrap();
    let u = crate::rng::complex_vector(&mut rng, 3);
    let uu = AlgebraElement::new(&alg, vec![crate::linalg::outer(&u, &u)]).unwrap();
    let norm_u: f64 = u.iter().map(|z| z.norm_sqr()).sum();
    for p in [1.5, 2.0, 3.0] {
        let pe = PExponent::Finite(p);
        let (_, attained) = dual_norm_achiever(&uu, pe).unwrap();
        let closed = 2.5f64.powf(1.0 / p) * norm_u;
        assert!((schatten_norm(&uu, pe) - closed).abs() < 1e-12 * closed);
        assert!((attained - closed).abs() < 1e-9 * closed);
    }
    assert!(dual_norm_achiever(&AlgebraElement::zeros(&m2), PExponent::Finite(2.0)).is_err());
    assert!(dual_norm_achiever(&a, PExponent::Finite(1.0)).is_err());
}

#[test]
fn dual_achiever_attains_supremum_on_random_inputs() {
    let alg = weighted();
    for (pi, p) in [1.5, 2.0, 3.0].into_iter().enumerate() {
        let pe = PExponent::Finite(p);
        for t in 0..200 {
            let mut rng = substream(40 + pi as u64, t);
            let a = AlgebraElement::random(&alg, &mut rng);
            let (b, attained) = dual_norm_achiever(&a, pe).unwrap();
            let norm = schatten_norm(&a, pe);
            assert!((attained - norm).abs() <= 1e-9 * norm);
            assert!((schatten_norm(&b, pe.conjugate()) - 1.0).abs() <= 1e-9);
            assert!(rho_product(&a, &b).im.abs() <= 1e-9 * norm);
        }
    }
}

#[test]
fn tail_projection_residuals_decrease() {
    let alg = weighted();
    let mut rng = substream(77, 0);
    for _ in 0..10 {
        let w = AlgebraElement::random_psd(&alg, &mut rng);
        let id = AlgebraElement::identity(&alg);
        let mut last = f64::INFINITY;
        for n in 1..40 {
            let p = spectral_tail_projection(&w, 1.0 / n as f64).unwrap();
            assert!(p.is_projection());
            assert!(close(&(&p * &w), &(&w * &p), 1e-9));
            let rest = &w * &(&id - &p);
            assert!(schatten_norm(&rest, PExponent::Infinity) <= 1.0 / n as f64 + 1e-9);
            let r = schatten_norm(&rest, PExponent::Finite(2.0));
            assert!(r <= last + 1e-12);
            last = r;
        }
    }
}

fn arb_element() -> impl Strategy<Value = AlgebraElement> {
    (any::<u64>(), 0usize..3).prop_map(|(seed, shape)| {
        let alg = match shape {
            0 => TracedAlgebra::full(3),
            1 => TracedAlgebra::new(vec![1, 2], vec![3.0, 0.25]).unwrap(),
            _ => TracedAlgebra::new(vec![2, 2], vec![1.0, 2.0]).unwrap(),
        };
        AlgebraElement::random(&alg, &mut substream(seed, 0))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norms_are_star_and_modulus_invariant(x in arb_element(), p in prop::sample::select(vec![1.0, 1.5, 2.0, 3.0, f64::INFINITY])) {
        let pe = PExponent::new(p).unwrap();
        let n = schatten_norm(&x, pe);
        prop_assert!((schatten_norm(&x.adjoint(), pe) - n).abs() <= 1e-10 * (1.0 + n));
        prop_assert!((schatten_norm(&abs(&x), pe) - n).abs() <= 1e-10 * (1.0 + n));
        let c2 = x.scale(Complex64::new(-1.5, 2.0));
        prop_assert!((schatten_norm(&c2, pe) - 2.5 * n).abs() <= 1e-10 * (1.0 + n));
    }

    #[test]
    fn finite_trace_containment(x in arb_element(), p in 1.0f64..4.0, dr in 0.1f64..4.0) {
        let r = p + dr;
        let tr = x.algebra().trace_of_identity();
        let lhs = schatten_norm(&x, PExponent::Finite(p));
        let rhs = schatten_norm(&x, PExponent::Finite(r)) * tr.powf(1.0 / p - 1.0 / r);
        prop_assert!(lhs <= rhs * (1.0 + 1e-10) + 1e-12);
        let rinf = schatten_norm(&x, PExponent::Infinity) * tr.powf(1.0 / p);
        prop_assert!(lhs <= rinf * (1.0 + 1e-10) + 1e-12);
    }

    #[test]
    fn triangle_inequality(x in arb_element(), seed in any::<u64>(), p in prop::sample::select(vec![1.0, 1.5, 2.0, 3.0, f64::INFINITY])) {
        let y = AlgebraElement::random(x.algebra(), &mut substream(seed, 1));
        let pe = PExponent::new(p).unwrap();
        let lhs = schatten_norm(&(&x + &y), pe);
        prop_assert!(lhs <= schatten_norm(&x, pe) + schatten_norm(&y, pe) + 1e-10);
    }

    #[test]
    fn jordan_split_reconstructs(x in arb_element()) {
        let s = jordan_split(&x);
        let tol = 1e-10 * (1.0 + schatten_norm(&x, PExponent::Infinity));
        prop_assert!(close(&s.reconstruct(), &x, tol));
        for xi in [&s.xi1, &s.xi2, &s.xi3, &s.xi4] {
            prop_assert!(xi.min_eigenvalue() >= -tol);
        }
        prop_assert!(schatten_norm(&(&s.xi1 * &s.xi2), PExponent::Infinity) <= tol);
        prop_assert!(schatten_norm(&(&s.xi3 * &s.xi4), PExponent::Infinity) <= tol);
        for p in [1.0, 2.0, 3.0] {
            let pe = PExponent::Finite(p);
            let d = schatten_norm(&(&s.xi1 - &s.xi2), pe);
            let sm = schatten_norm(&(&s.xi1 + &s.xi2), pe);
            prop_assert!((d - sm).abs() <= 1e-9 * (1.0 + sm));
        }
    }

    #[test]
    fn polar_reconstructs(x in arb_element()) {
        let (z, a) = polar_decomposition(&x);
        let tol = 1e-10 * schatten_norm(&x, PExponent::Infinity);
        prop_assert!(close(&(&z * &a), &x, tol));
        prop_assert!(a.is_psd());
        prop_assert!(z.is_partial_isometry());
    }
}
