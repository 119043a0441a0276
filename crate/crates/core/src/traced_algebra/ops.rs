use num_complex::Complex64;
use serde::Serialize;

use super::{AlgebraElement, PExponent, TracedAlgebra};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, ZERO};

/// `ρ(X) = Σ_k w_k Tr(X_k)`.
pub fn trace(algebra: &TracedAlgebra, x: &AlgebraElement) -> Result<Complex64> {
    x.ensure_in(algebra)?;
    Ok(rho(x))
}

/// Trace in the element's own algebra.
pub fn rho(x: &AlgebraElement) -> Complex64 {
    x.blocks()
        .iter()
        .zip(x.algebra().weights())
        .map(|(b, &w)| linalg::trace(b) * w)
        .sum()
}

/// `ρ(XY)` without forming the product.
pub fn rho_product(x: &AlgebraElement, y: &AlgebraElement) -> Complex64 {
    assert!(x.same_algebra(y), "rho_product across algebras");
    let mut acc = ZERO;
    for ((a, b), &w) in x.blocks().iter().zip(y.blocks()).zip(x.algebra().weights()) {
        let mut t = ZERO;
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                t += a[(i, j)] * b[(j, i)];
            }
        }
        acc += t * w;
    }
    acc
}

/// Singular values of every block, paired with the block weight.
fn weighted_singular_values(x: &AlgebraElement) -> impl Iterator<Item = (f64, f64)> + '_ {
    x.blocks()
        .iter()
        .zip(x.algebra().weights())
        .flat_map(|(b, &w)| linalg::singular_values(b).into_iter().map(move |s| (w, s)))
}

/// `‖X‖_p = ρ(|X|^p)^{1/p}`, and the largest singular value for `p = ∞`.
pub fn schatten_norm(x: &AlgebraElement, p: PExponent) -> f64 {
    match p {
        PExponent::Infinity => weighted_singular_values(x).map(|(_, s)| s).fold(0.0, f64::max),
        PExponent::Finite(2.0) => x
            .blocks()
            .iter()
            .zip(x.algebra().weights())
            .map(|(b, &w)| w * b.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum::<f64>()
            .sqrt(),
        PExponent::Finite(p) => {
            // scale by the largest singular value to keep s^p in range
            let smax = weighted_singular_values(x).map(|(_, s)| s).fold(0.0, f64::max);
            if smax == 0.0 {
                return 0.0;
            }
            let sum: f64 = weighted_singular_values(x)
                .map(|(w, s)| w * (s / smax).powf(p))
                .sum();
            smax * sum.powf(1.0 / p)
        }
    }
}

/// Fallible form taking a raw exponent.
pub fn schatten_norm_p(x: &AlgebraElement, p: f64) -> Result<f64> {
    Ok(schatten_norm(x, PExponent::new(p)?))
}

/// `X = Z|X|` with `Z` the partial isometry whose initial space is the closure
/// of `range(X^*)`. The zero element gives `Z = 0`.
pub fn polar_decomposition(x: &AlgebraElement) -> (AlgebraElement, AlgebraElement) {
    let mut zs = Vec::with_capacity(x.blocks().len());
    let mut abs = Vec::with_capacity(x.blocks().len());
    let scale = schatten_norm(x, PExponent::Infinity);
    let cutoff = 1e-12 * scale;
    for b in x.blocks() {
        let n = b.nrows();
        let dec = linalg::svd(b);
        let mut z = CMat::zeros(n, n);
        let mut a = CMat::zeros(n, n);
        for (k, &s) in dec.s.iter().enumerate() {
            let uk = dec.u.column(k);
            let vk = dec.v.column(k);
            a += (vk * vk.adjoint()).scale(s);
            if s > cutoff && s > 0.0 {
                z += uk * vk.adjoint();
            }
        }
        zs.push(z);
        abs.push(linalg::hermitian_part(&a));
    }
    (
        AlgebraElement::new(x.algebra(), zs).expect("shapes preserved"),
        AlgebraElement::new(x.algebra(), abs).expect("shapes preserved"),
    )
}

/// `|X| = (X^*X)^{1/2}`.
pub fn abs(x: &AlgebraElement) -> AlgebraElement {
    polar_decomposition(x).1
}

/// Rejects elements whose spectrum dips below `-psd_tol`.
pub fn ensure_psd(w: &AlgebraElement) -> Result<()> {
    if !w.is_hermitian() {
        return Err(Error::Domain("element is not hermitian".into()));
    }
    let min = w.min_eigenvalue();
    if min < -w.psd_tol() {
        return Err(Error::Domain(format!(
            "element is not positive semidefinite (min eigenvalue {min:e})"
        )));
    }
    Ok(())
}

/// Spectral projection `E_W(t, ∞)` of a PSD element.
pub fn spectral_tail_projection(w: &AlgebraElement, t: f64) -> Result<AlgebraElement> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("threshold t = {t} must be positive")));
    }
    ensure_psd(w)?;
    Ok(w.map_blocks(|b| {
        linalg::spectral_map(b, |l| {
            if l > t {
                linalg::ONE
            } else {
                ZERO
            }
        })
    }))
}

/// `Q diag(f(λ)) Q^*` per block. `f` returns `None` where it is undefined.
pub fn functional_calculus<F>(w: &AlgebraElement, mut f: F) -> Result<AlgebraElement>
where
    F: FnMut(f64) -> Option<Complex64>,
{
    if !w.is_hermitian() {
        return Err(Error::Domain(
            "functional calculus needs a hermitian element".into(),
        ));
    }
    let mut blocks = Vec::with_capacity(w.blocks().len());
    for b in w.blocks() {
        let (vals, q) = linalg::hermitian_eigen(b);
        let mut fv = Vec::with_capacity(vals.len());
        for &l in &vals {
            fv.push(f(l).ok_or_else(|| {
                Error::Domain(format!("function undefined at eigenvalue {l}"))
            })?);
        }
        blocks.push(linalg::reassemble(&q, fv));
    }
    AlgebraElement::new(w.algebra(), blocks)
}

/// Real-valued calculus of a PSD element, with eigenvalues in `[-tol, 0)`
/// clipped to zero first.
pub fn psd_calculus<F>(w: &AlgebraElement, mut f: F) -> Result<AlgebraElement>
where
    F: FnMut(f64) -> f64,
{
    ensure_psd(w)?;
    Ok(w.map_blocks(|b| linalg::spectral_map(b, |l| Complex64::new(f(l.max(0.0)), 0.0))))
}

/// `(Re X, Im X) = ((X + X^*)/2, (X − X^*)/2i)`.
pub fn real_imag_parts(x: &AlgebraElement) -> (AlgebraElement, AlgebraElement) {
    (
        x.map_blocks(linalg::hermitian_part),
        x.map_blocks(linalg::skew_part),
    )
}

/// Positive and negative parts of a hermitian element.
pub fn positive_negative_parts(h: &AlgebraElement) -> (AlgebraElement, AlgebraElement) {
    let pos = h.map_blocks(|b| linalg::spectral_map(b, |l| Complex64::new(l.max(0.0), 0.0)));
    let neg = h.map_blocks(|b| linalg::spectral_map(b, |l| Complex64::new((-l).max(0.0), 0.0)));
    (pos, neg)
}

/// `X = ξ1 − ξ2 + i(ξ3 − ξ4)` with PSD parts and `ξ1ξ2 = ξ3ξ4 = 0`.
#[derive(Clone, Debug)]
pub struct JordanSplit {
    pub xi1: AlgebraElement,
    pub xi2: AlgebraElement,
    pub xi3: AlgebraElement,
    pub xi4: AlgebraElement,
}

impl JordanSplit {
    pub fn reconstruct(&self) -> AlgebraElement {
        let re = &self.xi1 - &self.xi2;
        let im = &self.xi3 - &self.xi4;
        &re + &im.scale(linalg::I)
    }
}

pub fn jordan_split(x: &AlgebraElement) -> JordanSplit {
    let (re, im) = real_imag_parts(x);
    let (xi1, xi2) = positive_negative_parts(&re);
    let (xi3, xi4) = positive_negative_parts(&im);
    JordanSplit { xi1, xi2, xi3, xi4 }
}

#[derive(Clone, Debug, Serialize)]
pub struct HolderReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `ρ(|AB|) ≤ ‖A‖_p ‖B‖_q`.
pub fn holder_check(a: &AlgebraElement, b: &AlgebraElement, p: PExponent) -> Result<HolderReport> {
    a.ensure_same_algebra(b)?;
    let lhs = schatten_norm(&(a * b), PExponent::Finite(1.0));
    let rhs = schatten_norm(a, p) * schatten_norm(b, p.conjugate());
    Ok(HolderReport {
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-9 * (1.0 + rhs),
    })
}

/// Which structure the caller asserts for a trace pairing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairingCase {
    PsdPair,
    HermitianPair,
}

#[derive(Clone, Debug, Serialize)]
pub struct PairingReport {
    pub case: PairingCase,
    pub re: f64,
    pub im: f64,
    pub tol: f64,
    pub nonnegative: bool,
    pub real: bool,
}

impl PairingReport {
    pub fn passes(&self) -> bool {
        match self.case {
            PairingCase::PsdPair => self.nonnegative && self.real,
            PairingCase::HermitianPair => self.real,
        }
    }
}

/// `ρ(AB) ≥ 0` for PSD pairs and `ρ(AB) ∈ ℝ` for hermitian pairs.
pub fn trace_pairing_checks(
    a: &AlgebraElement,
    b: &AlgebraElement,
    case: PairingCase,
) -> Result<PairingReport> {
    a.ensure_same_algebra(b)?;
    match case {
        PairingCase::PsdPair => {
            for (name, e) in [("A", a), ("B", b)] {
                ensure_psd(e).map_err(|err| {
                    Error::Precondition(format!("{name} declared PSD but {err}"))
                })?;
            }
        }
        PairingCase::HermitianPair => {
            for (name, e) in [("A", a), ("B", b)] {
                if !e.is_hermitian() {
                    return Err(Error::Precondition(format!(
                        "{name} declared hermitian but is not"
                    )));
                }
            }
        }
    }
    let two = PExponent::Finite(2.0);
    let value = rho_product(a, b);
    let tol = 1e-10 * schatten_norm(a, two) * schatten_norm(b, two);
    Ok(PairingReport {
        case,
        re: value.re,
        im: value.im,
        tol,
        nonnegative: value.re >= -tol,
        real: value.im.abs() <= tol.max(f64::MIN_POSITIVE),
    })
}

/// `B = |A|^{p−1} u^* / ‖A‖_p^{p−1}` from `A = u|A|`: `‖B‖_q = 1` and
/// `ρ(AB) = ‖A‖_p`.
pub fn dual_norm_achiever(a: &AlgebraElement, p: PExponent) -> Result<(AlgebraElement, f64)> {
    let pv = match p {
        PExponent::Finite(v) if v > 1.0 => v,
        _ => {
            return Err(Error::Domain(format!(
                "dual achiever needs 1 < p < inf, got {p}"
            )))
        }
    };
    let norm = schatten_norm(a, p);
    if norm == 0.0 {
        return Err(Error::Domain("dual achiever of the zero element".into()));
    }
    let (u, abs_a) = polar_decomposition(a);
    let scaled = abs_a.scale_real(1.0 / norm);
    let pow = psd_calculus(&scaled, |l| l.powf(pv - 1.0))?;
    let b = &pow * &u.adjoint();
    let attained = rho_product(a, &b).re;
    Ok((b, attained))
}
