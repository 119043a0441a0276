//! GNS construction for positive left-invariant sesquilinear maps on a
//! finite unital *-algebra.
//!
//! The scalar form `s(x, y) = ρ(Φ(x, y))` is positive semidefinite and, by
//! faithfulness of `ρ`, vanishes on `x` exactly when `Φ(x, x) = 0`. Its kernel
//! is the null space `𝔑_Φ`; a pivoted Gram–Schmidt frame orthonormal for `s`
//! represents the quotient `𝔄/𝔑_Φ`, on which `π(a)` acts by left
//! multiplication.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, ONE, ZERO};
use crate::rng;
use crate::sesquilinear::{check_left_invariance, check_positivity, LinearMap, SesquilinearMap, DEFAULT_POSITIVITY_TRIALS};
use crate::star_domain::StarAlgebra;
use crate::traced_algebra::{rho, schatten_norm, AlgebraElement, PExponent, TracedAlgebra};

/// Eigenvalues of `S` below this fraction of `λ_max` span the null space.
pub const KERNEL_THRESHOLD: f64 = 1e-10;
/// Eigenvalues between the two thresholds make the kernel ambiguous.
pub const GAP_THRESHOLD: f64 = 1e-6;

/// Input of the construction.
#[derive(Clone, Debug)]
pub enum GnsSource {
    /// Positive linear map `ω`, used through `Φ_ω(x, y) = ω(y^* x)`.
    Functional(LinearMap),
    /// Positive left-invariant map with its domain attached.
    Map(SesquilinearMap),
}

/// Kernel of `S` and the eigen data that decided it.
#[derive(Clone, Debug, Serialize)]
pub struct NullSpace {
    /// Orthonormal (Euclidean) coordinate vectors spanning `𝔑_Φ`.
    pub basis: Vec<Vec<Complex64>>,
    pub eigenvalues: Vec<f64>,
    pub threshold: f64,
    /// Largest `‖Φ(v, v)‖₂` over the basis vectors.
    pub max_self_value: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct GnsResiduals {
    pub reconstruction: f64,
    pub multiplicativity: f64,
    pub adjoint: f64,
    /// `‖ω(a) − Φ(a, 𝖾)‖₂` on the basis, zero for raw map sources.
    pub functional: f64,
}

impl GnsResiduals {
    pub fn max(&self) -> f64 {
        self.reconstruction.max(self.multiplicativity).max(self.adjoint).max(self.functional)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GnsRepresentation {
    #[serde(skip)]
    map: SesquilinearMap,
    #[serde(skip)]
    domain: Arc<StarAlgebra>,
    #[serde(skip)]
    gram: CMat,
    pub domain_name: String,
    pub target: Arc<TracedAlgebra>,
    pub p: PExponent,
    pub null_basis: Vec<Vec<Complex64>>,
    pub quotient_dim: usize,
    /// Representatives `f_k` of an `s`-orthonormal basis of the quotient.
    pub quotient_frame: Vec<Vec<Complex64>>,
    /// `π(e_i)` on the frame, one matrix per domain basis element.
    #[serde(with = "crate::io::cmat_vec")]
    pub pi: Vec<CMat>,
    /// Frame coefficients of `ξ = Λ(𝖾)`.
    pub cyclic: Vec<Complex64>,
    pub residuals: GnsResiduals,
    /// `max_ij ‖Φ(e_i, e_j)‖_∞`.
    pub scale: f64,
}

/// Matrix `K` with `s(x, y) = y^* K x`.
fn scalar_gram(map: &SesquilinearMap) -> Result<CMat> {
    let d = map.domain_dim();
    let k = CMat::from_fn(d, d, |j, i| rho(map.gram_entry(i, j)));
    let asym = linalg::max_abs(&(&k - k.adjoint()));
    if asym > 1e-9 * (1.0 + linalg::max_abs(&k)) {
        return Err(Error::Inconsistency(format!("scalar Gram is not hermitian (residual {asym:e})")));
    }
    Ok(linalg::hermitian_part(&k))
}

fn kernel_of(map: &SesquilinearMap, k: &CMat) -> Result<NullSpace> {
    let (vals, vecs) = linalg::hermitian_eigen(k);
    let top = vals.last().copied().unwrap_or(0.0).max(0.0);
    let threshold = KERNEL_THRESHOLD * top;
    if let Some(v) = vals.iter().find(|&&v| v > threshold && v < GAP_THRESHOLD * top) {
        return Err(Error::Conditioning(format!(
            "scalar Gram eigenvalue {v:e} lies in the ambiguous band ({threshold:e}, {:e})",
            GAP_THRESHOLD * top
        )));
    }
    let basis: Vec<Vec<Complex64>> = vals
        .iter()
        .enumerate()
        .filter(|&(_, &v)| top == 0.0 || v <= threshold)
        .map(|(c, _)| vecs.column(c).iter().copied().collect())
        .collect();
    let two = PExponent::Finite(2.0);
    let max_self_value = basis
        .iter()
        .map(|v| schatten_norm(&map.eval(v, v), two))
        .fold(0.0, f64::max);
    let tol = 1e-8 * (1.0 + map.scale());
    if max_self_value > tol {
        return Err(Error::Inconsistency(format!(
            "null vector with ‖Φ(v,v)‖₂ = {max_self_value:e} above {tol:e}"
        )));
    }
    Ok(NullSpace { basis, eigenvalues: vals, threshold, max_self_value })
}

/// Null space `𝔑_Φ` of a positive hermitian map.
pub fn null_space(map: &SesquilinearMap) -> Result<NullSpace> {
    kernel_of(map, &scalar_gram(map)?)
}

fn s_inner(k: &CMat, x: &[Complex64], y: &[Complex64]) -> Complex64 {
    let kx = k * nalgebra::DVector::from_column_slice(x);
    y.iter().zip(kx.iter()).map(|(a, b)| a.conj() * b).sum()
}

/// Pivoted Gram–Schmidt on the basis vectors: at each step the candidate
/// with the largest residual `s`-norm joins the frame (lowest index on ties).
fn pivoted_frame(k: &CMat, rank: usize) -> Vec<Vec<Complex64>> {
    let d = k.nrows();
    let mut residual: Vec<Vec<Complex64>> = (0..d)
        .map(|i| (0..d).map(|j| if i == j { ONE } else { ZERO }).collect())
        .collect();
    let mut frame: Vec<Vec<Complex64>> = Vec::with_capacity(rank);
    let mut used = vec![false; d];
    for _ in 0..rank {
        let (mut pick, mut best) = (usize::MAX, f64::NEG_INFINITY);
        for i in (0..d).filter(|&i| !used[i]) {
            let n = s_inner(k, &residual[i], &residual[i]).re;
            if n > best * (1.0 + 1e-12) {
                (pick, best) = (i, n);
            }
        }
        used[pick] = true;
        let mut f = residual[pick].clone();
        // second pass removes the rounding left by the first
        for _ in 0..2 {
            for g in &frame {
                let c = s_inner(k, &f, g);
                f.iter_mut().zip(g).for_each(|(a, b)| *a -= c * b);
            }
        }
        let n = s_inner(k, &f, &f).re.sqrt();
        f.iter_mut().for_each(|a| *a /= n);
        for (i, r) in residual.iter_mut().enumerate() {
            if !used[i] {
                let c = s_inner(k, r, &f);
                r.iter_mut().zip(&f).for_each(|(a, b)| *a -= c * b);
            }
        }
        frame.push(f);
    }
    frame
}

impl GnsRepresentation {
    pub fn map(&self) -> &SesquilinearMap {
        &self.map
    }

    pub fn domain(&self) -> &Arc<StarAlgebra> {
        &self.domain
    }

    pub fn null_dim(&self) -> usize {
        self.null_basis.len()
    }

    /// `π(a) = Σ_i a_i π(e_i)`.
    pub fn pi_of(&self, a: &[Complex64]) -> CMat {
        let q = self.quotient_dim;
        self.pi.iter().zip(a).fold(CMat::zeros(q, q), |acc, (m, c)| acc + m * *c)
    }

    /// Frame coefficients of the class `Λ(a)`.
    pub fn class_of(&self, a: &[Complex64]) -> Vec<Complex64> {
        self.quotient_frame.iter().map(|f| s_inner(&self.gram, a, f)).collect()
    }

    /// Representative in `𝔄` of the class with frame coefficients `c`.
    pub fn representative(&self, c: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.domain.dim()];
        for (f, ck) in self.quotient_frame.iter().zip(c) {
            out.iter_mut().zip(f).for_each(|(o, v)| *o += ck * v);
        }
        out
    }

    /// `𝔜`-valued inner product `⟨Λ(u), Λ(v)⟩_Φ = Φ(u, v)` of two classes
    /// given by frame coefficients.
    pub fn inner(&self, cu: &[Complex64], cv: &[Complex64]) -> AlgebraElement {
        self.map.eval(&self.representative(cu), &self.representative(cv))
    }

    /// Quasi-norm `‖Λ(a)‖_Φ = ‖Φ(a, a)‖_p^{1/2}`.
    pub fn quasi_norm(&self, a: &[Complex64]) -> f64 {
        schatten_norm(&self.map.eval(a, a), self.p).sqrt()
    }

    /// `π(a)ξ` in frame coefficients.
    pub fn act_on_cyclic(&self, a: &[Complex64]) -> Vec<Complex64> {
        let v = self.pi_of(a) * nalgebra::DVector::from_column_slice(&self.cyclic);
        v.iter().copied().collect()
    }
}

fn resolve(source: GnsSource) -> (SesquilinearMap, Option<LinearMap>) {
    match source {
        GnsSource::Functional(omega) => (omega.induced_map(), Some(omega)),
        GnsSource::Map(map) => (map, None),
    }
}

/// Builds `(π, ξ)` from `ω` or `Φ`. Positivity is established by
/// certificate or sampling with `seed`; raw maps must also be left
/// invariant within `1e-8·(1 + scale)`.
pub fn gns_construct(source: GnsSource, p: PExponent, seed: u64) -> Result<GnsRepresentation> {
    let (map, omega) = resolve(source);
    let domain = map
        .domain()
        .cloned()
        .ok_or_else(|| Error::Precondition("the GNS construction needs a *-algebra domain".into()))?;
    let scale = map.scale();
    let tol = 1e-8 * (1.0 + scale);
    if map.hermiticity_residual() > tol {
        return Err(Error::Precondition(format!("map '{}' is not hermitian", map.label())));
    }
    let cert = check_positivity(&map, DEFAULT_POSITIVITY_TRIALS, seed);
    if cert.is_violated() {
        return Err(Error::Precondition(format!("map '{}' is not positive", map.label())));
    }
    if omega.is_none() {
        let inv = check_left_invariance(&map)?;
        if inv > tol {
            return Err(Error::Precondition(format!(
                "map '{}' is not left invariant (residual {inv:e})",
                map.label()
            )));
        }
    }
    let k = scalar_gram(&map)?;
    let null = kernel_of(&map, &k)?;
    let d = domain.dim();
    let q = d - null.basis.len();
    let frame = pivoted_frame(&k, q);
    let class = |a: &[Complex64]| -> Vec<Complex64> { frame.iter().map(|f| s_inner(&k, a, f)).collect() };
    let pi: Vec<CMat> = (0..d)
        .map(|i| {
            let ei = domain.basis(i);
            let cols: Vec<Vec<Complex64>> = frame.iter().map(|f| class(&domain.mul_coords(&ei, f))).collect();
            CMat::from_fn(q, q, |r, c| cols[c][r])
        })
        .collect();
    let cyclic = class(domain.unit());
    let mut rep = GnsRepresentation {
        target: Arc::clone(map.target()),
        map,
        domain_name: domain.name().to_string(),
        domain,
        p,
        null_basis: null.basis,
        quotient_dim: q,
        quotient_frame: frame,
        pi,
        cyclic,
        residuals: GnsResiduals::default(),
        scale,
        gram: k,
    };
    rep.residuals = basis_residuals(&rep, omega.as_ref());
    Ok(rep)
}

fn basis_residuals(rep: &GnsRepresentation, omega: Option<&LinearMap>) -> GnsResiduals {
    let alg = &rep.domain;
    let d = alg.dim();
    let inf = PExponent::Infinity;
    let basis: Vec<Vec<Complex64>> = (0..d).map(|i| alg.basis(i)).collect();
    let orbit: Vec<Vec<Complex64>> = basis.iter().map(|a| rep.act_on_cyclic(a)).collect();
    let mut r = GnsResiduals::default();
    for i in 0..d {
        let pi_star = rep.pi_of(&alg.star_coords(&basis[i]));
        r.adjoint = r.adjoint.max(linalg::max_abs(&(pi_star - rep.pi[i].adjoint())));
        for j in 0..d {
            let prod = rep.pi_of(&alg.mul_coords(&basis[i], &basis[j]));
            r.multiplicativity = r.multiplicativity.max(linalg::max_abs(&(prod - &rep.pi[i] * &rep.pi[j])));
            let diff = rep.map.gram_entry(i, j) - &rep.inner(&orbit[i], &orbit[j]);
            r.reconstruction = r.reconstruction.max(schatten_norm(&diff, inf));
        }
        if let Some(w) = omega {
            let diff = &w.apply(&basis[i]) - &rep.map.eval(&basis[i], alg.unit());
            r.functional = r.functional.max(schatten_norm(&diff, inf));
        }
    }
    r
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub trials: usize,
    pub adjoint: f64,
    pub multiplicativity: f64,
    pub reconstruction: f64,
    /// `⟨π(a)Λ(b), Λ(c)⟩_Φ − ⟨Λ(b), π(a^*)Λ(c)⟩_Φ`.
    pub inner_adjoint: f64,
    /// Dimension of `span π(𝔄)ξ`.
    pub cyclic_span: usize,
    pub tolerance: f64,
    pub passes: bool,
}

/// Residuals of the representation identities on random unit vectors
/// `a, b, c`, plus the cyclicity span.
pub fn verify_representation(rep: &GnsRepresentation, trials: usize, seed: u64) -> VerificationReport {
    let alg = &rep.domain;
    let d = alg.dim();
    let inf = PExponent::Infinity;
    let per_trial: Vec<[f64; 4]> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut g = rng::labelled(seed, "gns_verify", t as u64);
            let a = rng::unit_vector(&mut g, d);
            let b = rng::unit_vector(&mut g, d);
            let c = rng::unit_vector(&mut g, d);
            let (pa, pb) = (rep.pi_of(&a), rep.pi_of(&b));
            let adj = linalg::max_abs(&(rep.pi_of(&alg.star_coords(&a)) - pa.adjoint()));
            let mul = linalg::max_abs(&(rep.pi_of(&alg.mul_coords(&a, &b)) - &pa * &pb));
            let (xa, xb) = (rep.act_on_cyclic(&a), rep.act_on_cyclic(&b));
            let rec = schatten_norm(&(&rep.map.eval(&a, &b) - &rep.inner(&xa, &xb)), inf);
            let (lb, lc) = (rep.class_of(&b), rep.class_of(&c));
            let apply = |m: &CMat, v: &[Complex64]| -> Vec<Complex64> {
                (m * nalgebra::DVector::from_column_slice(v)).iter().copied().collect()
            };
            let lhs = rep.inner(&apply(&pa, &lb), &lc);
            let rhs = rep.inner(&lb, &apply(&rep.pi_of(&alg.star_coords(&a)), &lc));
            [adj, mul, rec, schatten_norm(&(&lhs - &rhs), inf)]
        })
        .collect();
    let worst = |k: usize| per_trial.iter().map(|r| r[k]).fold(0.0, f64::max);
    let basis_orbit = CMat::from_fn(rep.quotient_dim, d, |r, c| rep.act_on_cyclic(&alg.basis(c))[r]);
    let sv = linalg::singular_values(&basis_orbit);
    let top = sv.iter().copied().fold(0.0, f64::max);
    let cyclic_span = sv.iter().filter(|&&s| s > 1e-9 * top).count();
    let tolerance = 1e-9 * (1.0 + rep.scale);
    let (adjoint, multiplicativity, reconstruction, inner_adjoint) = (worst(0), worst(1), worst(2), worst(3));
    let passes = [adjoint, multiplicativity, reconstruction, inner_adjoint].iter().all(|&r| r <= tolerance)
        && cyclic_span == rep.quotient_dim;
    VerificationReport { trials, adjoint, multiplicativity, reconstruction, inner_adjoint, cyclic_span, tolerance, passes }
}
