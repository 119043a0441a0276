//! Superoperators `L: 𝔐 → B(ℋ)` or `𝔐 → L²(ρ)`, their norms under the
//! numerical radius, `⦀·⦀₂` and Schatten targets, and operator-valued maps.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{numerical_radius_element, radius_with_grid, triple_norm, Budget, NormStatus, NR_COARSE_GRID};
use crate::error::{Error, Result};
use crate::inequalities::{tol_report, InequalityReport, Status, Witness};
use crate::linalg::{self, CMat, ONE, ZERO};
use crate::rng;
use crate::sesquilinear::{PositivityCertificate, PositivityStatus, PositivityWitness};
use crate::traced_algebra::{
    dual_norm_achiever, polar_decomposition, schatten_norm, AlgebraElement, PExponent,
    TracedAlgebra,
};

/// Linear map between traced algebras as a dense matrix on matrix-unit
/// coordinates (block-major, row-major inside blocks): column `c` holds the
/// coordinates of `L(E_c)`.
#[derive(Clone, Debug)]
pub struct SuperOperator {
    source: Arc<TracedAlgebra>,
    target: Arc<TracedAlgebra>,
    matrix: CMat,
}

impl SuperOperator {
    pub fn new(source: &Arc<TracedAlgebra>, target: &Arc<TracedAlgebra>, matrix: CMat) -> Result<Self> {
        if matrix.shape() != (target.coord_dim(), source.coord_dim()) {
            return Err(Error::Structural(format!(
                "superoperator matrix is {:?}, expected {}x{}",
                matrix.shape(),
                target.coord_dim(),
                source.coord_dim()
            )));
        }
        Ok(Self {
            source: Arc::clone(source),
            target: Arc::clone(target),
            matrix,
        })
    }

    /// Tabulates `f` on the matrix units of the source.
    pub fn from_fn<F>(source: &Arc<TracedAlgebra>, target: &Arc<TracedAlgebra>, mut f: F) -> Result<Self>
    where
        F: FnMut(&AlgebraElement) -> AlgebraElement,
    {
        let m = source.coord_dim();
        let mut matrix = CMat::zeros(target.coord_dim(), m);
        for c in 0..m {
            let image = f(&AlgebraElement::unit(source, c));
            image.ensure_in(target)?;
            for (r, v) in image.coords().into_iter().enumerate() {
                matrix[(r, c)] = v;
            }
        }
        Self::new(source, target, matrix)
    }

    pub fn identity(algebra: &Arc<TracedAlgebra>) -> Self {
        let m = algebra.coord_dim();
        Self::new(algebra, algebra, CMat::identity(m, m)).expect("square")
    }

    pub fn zero(source: &Arc<TracedAlgebra>, target: &Arc<TracedAlgebra>) -> Self {
        Self::new(source, target, CMat::zeros(target.coord_dim(), source.coord_dim())).expect("shape")
    }

    /// `S ↦ E(Σ_r L_r S R_r^*)` on dense block-diagonal forms, with `E` the
    /// compression onto the target's blocks. `L_r, R_r` are
    /// `target.total_dim() × source.total_dim()`.
    pub fn from_kraus_pairs(
        source: &Arc<TracedAlgebra>,
        target: &Arc<TracedAlgebra>,
        pairs: &[(CMat, CMat)],
    ) -> Result<Self> {
        let shape = (target.total_dim(), source.total_dim());
        if pairs.iter().any(|(l, r)| l.shape() != shape || r.shape() != shape) {
            return Err(Error::Structural(format!("Kraus factors must be {}x{}", shape.0, shape.1)));
        }
        Self::from_fn(source, target, |s| {
            let dense = s.to_dense();
            let sum = pairs
                .iter()
                .fold(CMat::zeros(shape.0, shape.0), |acc, (l, r)| acc + l * &dense * r.adjoint());
            AlgebraElement::from_dense_compressed(target, &sum).expect("shape checked")
        })
    }

    /// `S ↦ E(Σ_r K_r S K_r^*)`, completely positive.
    pub fn from_kraus(source: &Arc<TracedAlgebra>, target: &Arc<TracedAlgebra>, kraus: &[CMat]) -> Result<Self> {
        let pairs: Vec<(CMat, CMat)> = kraus.iter().map(|k| (k.clone(), k.clone())).collect();
        Self::from_kraus_pairs(source, target, &pairs)
    }

    pub fn source(&self) -> &Arc<TracedAlgebra> {
        &self.source
    }

    pub fn target(&self) -> &Arc<TracedAlgebra> {
        &self.target
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn apply(&self, s: &AlgebraElement) -> Result<AlgebraElement> {
        s.ensure_in(&self.source)?;
        Ok(self.apply_unchecked(s))
    }

    fn apply_unchecked(&self, s: &AlgebraElement) -> AlgebraElement {
        let v = nalgebra::DVector::from_vec(s.coords());
        let out = &self.matrix * v;
        AlgebraElement::from_coords(&self.target, out.as_slice()).expect("shape")
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            matrix: &self.matrix * c,
            ..self.clone()
        }
    }

    /// `Σ c_i L_i`; all terms must share source and target.
    pub fn combine(terms: &[(Complex64, &SuperOperator)]) -> Result<Self> {
        let (_, first) = terms
            .first()
            .ok_or_else(|| Error::Structural("empty combination".into()))?;
        let mut matrix = CMat::zeros(first.matrix.nrows(), first.matrix.ncols());
        for (c, l) in terms {
            if l.source != first.source || l.target != first.target {
                return Err(Error::Structural("superoperators act between different algebras".into()));
            }
            if *c != ZERO {
                matrix += &l.matrix * *c;
            }
        }
        Self::new(&first.source, &first.target, matrix)
    }

    pub fn is_zero(&self) -> bool {
        linalg::max_abs(&self.matrix) == 0.0
    }

    /// Smallest eigenvalue over source blocks of the Choi matrix
    /// `Σ_ij E_ij ⊗ L(E_ij)`, relative to its largest entry.
    pub fn choi_min_eigenvalue(&self) -> f64 {
        let n_t = self.target.total_dim();
        let mut worst = f64::INFINITY;
        let mut base = 0;
        for &n in self.source.block_sizes() {
            let mut choi = CMat::zeros(n * n_t, n * n_t);
            for i in 0..n {
                for j in 0..n {
                    let col = self.matrix.column(base + i * n + j);
                    let image = AlgebraElement::from_coords(&self.target, col.as_slice())
                        .expect("shape")
                        .to_dense();
                    choi.view_mut((i * n_t, j * n_t), (n_t, n_t)).copy_from(&image);
                }
            }
            let scale = 1.0 + linalg::max_abs(&choi);
            if linalg::max_abs(&(&choi - choi.adjoint())) > 1e-10 * scale {
                return f64::NEG_INFINITY;
            }
            worst = worst.min(linalg::hermitian_eigenvalues(&choi)[0] / scale);
            base += n * n;
        }
        worst
    }

    /// Choi-matrix test; implies positivity.
    pub fn is_completely_positive(&self) -> bool {
        self.choi_min_eigenvalue() >= -1e-10
    }

    /// Coefficients `Γ_k` with `ρ_target(B·L(U)) = Σ_k Tr(Γ_k U_k)`.
    fn pullback(&self, b: &AlgebraElement) -> Vec<CMat> {
        let weights = self.target.weights();
        let mut g = Vec::with_capacity(self.target.coord_dim());
        for (k, blk) in b.blocks().iter().enumerate() {
            let n = blk.nrows();
            for i in 0..n {
                for j in 0..n {
                    g.push(blk[(j, i)] * weights[k]);
                }
            }
        }
        let a = self.matrix.transpose() * nalgebra::DVector::from_vec(g);
        let mut out = Vec::with_capacity(self.source.num_blocks());
        let mut off = 0;
        for &n in self.source.block_sizes() {
            out.push(CMat::from_fn(n, n, |j, i| a[off + i * n + j]));
            off += n * n;
        }
        out
    }
}

/// Applies `L` to `S`.
pub fn superop_apply(l: &SuperOperator, s: &AlgebraElement) -> Result<AlgebraElement> {
    l.apply(s)
}

/// Norm on the target of a superoperator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "p")]
pub enum TargetNorm {
    NumericalRadius,
    Triple2,
    Schatten(PExponent),
}

impl std::fmt::Display for TargetNorm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TargetNorm::NumericalRadius => write!(f, "nr"),
            TargetNorm::Triple2 => write!(f, "triple2"),
            TargetNorm::Schatten(p) => write!(f, "schatten:{p}"),
        }
    }
}

impl std::str::FromStr for TargetNorm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nr" | "numerical-radius" | "numerical_radius" => Ok(TargetNorm::NumericalRadius),
            "triple2" | "triple" => Ok(TargetNorm::Triple2),
            other => match other.strip_prefix("schatten") {
                Some(p) => Ok(TargetNorm::Schatten(p.trim_start_matches([':', '-']).parse()?)),
                None => Err(Error::Parse(format!("unknown target norm '{other}'"))),
            },
        }
    }
}

/// Budget of the inner `⦀·⦀₂` evaluations inside superoperator searches.
fn inner_triple_budget(budget: Budget, start: usize) -> Budget {
    Budget {
        starts: 2,
        iters: 60,
        seed: budget.seed ^ (start as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15),
    }
}

/// Value of the target norm at `x` and a dual element `B` with
/// `Re ρ(B·Y) ≤ ‖Y‖` for all `Y` and equality (up to search error) at `x`.
fn norming_functional(x: &AlgebraElement, norm: TargetNorm, budget: Budget, coarse: bool) -> (f64, AlgebraElement) {
    let alg = x.algebra();
    match norm {
        TargetNorm::NumericalRadius => {
            let grid = if coarse { NR_COARSE_GRID } else { super::NR_GRID };
            let tol = if coarse { 1e-6 } else { 1e-10 };
            let (k, wit) = x
                .blocks()
                .iter()
                .map(|b| radius_with_grid(b, grid, tol))
                .enumerate()
                .fold(None::<(usize, super::RadiusWitness)>, |acc, (k, w)| match acc {
                    Some((_, ref best)) if best.value >= w.value => acc,
                    _ => Some((k, w)),
                })
                .expect("at least one block");
            let mut blocks: Vec<CMat> = alg.block_sizes().iter().map(|&n| CMat::zeros(n, n)).collect();
            blocks[k] = linalg::outer(&wit.vector, &wit.vector)
                * Complex64::from_polar(1.0 / alg.weights()[k], wit.theta);
            (wit.value, AlgebraElement::new(alg, blocks).expect("shape"))
        }
        TargetNorm::Schatten(p) => {
            let value = schatten_norm(x, p);
            if value == 0.0 {
                return (0.0, AlgebraElement::zeros(alg));
            }
            let b = match p {
                PExponent::Finite(1.0) => polar_decomposition(x).0.adjoint(),
                PExponent::Infinity => {
                    let (k, dec) = x
                        .blocks()
                        .iter()
                        .map(linalg::svd)
                        .enumerate()
                        .fold(None::<(usize, linalg::Svd)>, |acc, (k, d)| match acc {
                            Some((_, ref best)) if best.s[0] >= d.s[0] => acc,
                            _ => Some((k, d)),
                        })
                        .expect("at least one block");
                    let u: Vec<Complex64> = dec.u.column(0).iter().copied().collect();
                    let v: Vec<Complex64> = dec.v.column(0).iter().copied().collect();
                    let mut blocks: Vec<CMat> =
                        alg.block_sizes().iter().map(|&n| CMat::zeros(n, n)).collect();
                    blocks[k] = linalg::outer(&v, &u) * Complex64::new(1.0 / alg.weights()[k], 0.0);
                    AlgebraElement::new(alg, blocks).expect("shape")
                }
                _ => dual_norm_achiever(x, p).expect("1 < p < inf and x nonzero").0,
            };
            (value, b)
        }
        TargetNorm::Triple2 => {
            let res = triple_norm(x, budget);
            (res.value, triple_dual(x, &res.maximizer))
        }
    }
}

/// Evaluates a target norm; `⦀·⦀₂` uses the given budget.
pub fn target_norm_value(x: &AlgebraElement, norm: TargetNorm, budget: Budget) -> (f64, NormStatus) {
    match norm {
        TargetNorm::NumericalRadius => (numerical_radius_element(x), NormStatus::Exact),
        TargetNorm::Schatten(p) => (schatten_norm(x, p), NormStatus::Exact),
        TargetNorm::Triple2 => {
            let r = triple_norm(x, budget);
            (r.value, r.status)
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuperopNorm {
    pub value: f64,
    /// Contraction `T` attaining `value`.
    pub maximizer: AlgebraElement,
    pub status: NormStatus,
    pub norm: TargetNorm,
}

/// Alternating ascent from `t0`: for the current `T`, take the norming
/// functional `B` of `L(T)` and move to the contraction maximising the linear
/// functional `Re ρ(B·L(U))` (a unitary per block, by trace duality).
fn alternate(l: &SuperOperator, norm: TargetNorm, t0: AlgebraElement, budget: Budget, start: usize) -> (f64, AlgebraElement) {
    let inner = inner_triple_budget(budget, start);
    let mut warm = None;
    let mut t = t0;
    let (mut value, mut b) = search_functional(&l.apply_unchecked(&t), norm, inner, &mut warm);
    for _ in 0..budget.iters.max(1) {
        let gammas = l.pullback(&b);
        let blocks: Vec<CMat> = gammas.iter().map(|g| linalg::trace_dual_unitary(g).0).collect();
        let next = AlgebraElement::new(l.source(), blocks).expect("shape");
        let (v_next, b_next) = search_functional(&l.apply_unchecked(&next), norm, inner, &mut warm);
        if v_next <= value * (1.0 + 1e-12) + 1e-300 {
            if v_next > value {
                t = next;
                value = v_next;
            }
            break;
        }
        t = next;
        value = v_next;
        b = b_next;
    }
    let final_value = match norm {
        TargetNorm::Triple2 => value.max(triple_norm(&l.apply_unchecked(&t), inner).value),
        _ => target_norm_value(&l.apply_unchecked(&t), norm, inner).0,
    };
    (final_value, t)
}

/// [`norming_functional`] on the coarse settings; `⦀·⦀₂` restarts its
/// ascent from the previous maximiser `warm` once one exists.
fn search_functional(
    x: &AlgebraElement,
    norm: TargetNorm,
    inner: Budget,
    warm: &mut Option<AlgebraElement>,
) -> (f64, AlgebraElement) {
    if norm != TargetNorm::Triple2 {
        return norming_functional(x, norm, inner, true);
    }
    let (value, w) = match warm.as_ref() {
        Some(w0) => super::triple_norm_warm(x, w0, inner.iters),
        None => {
            let r = triple_norm(x, inner);
            (r.value, r.maximizer)
        }
    };
    let b = triple_dual(x, &w);
    *warm = Some(w);
    (value, b)
}

/// `W Z^* W` with `Z` the polar part of `WXW`: norms `X` at the maximiser `W`.
fn triple_dual(x: &AlgebraElement, w: &AlgebraElement) -> AlgebraElement {
    let (z, _) = polar_decomposition(&(&(w * x) * w));
    &(w * &z.adjoint()) * w
}

fn random_contraction(alg: &Arc<TracedAlgebra>, r: &mut rng::StreamRng, unitary: bool) -> AlgebraElement {
    let blocks = alg
        .block_sizes()
        .iter()
        .map(|&n| {
            let h = linalg::random_hermitian(r, n);
            if unitary {
                linalg::unitary_exp(&h)
            } else {
                let s = linalg::operator_norm(&h).max(1e-300);
                h / Complex64::new(s, 0.0)
            }
        })
        .collect();
    AlgebraElement::new(alg, blocks).expect("shape")
}

/// `sup_{‖T‖_∞ ≤ 1} ‖L(T)‖` for the chosen target norm.
///
/// Completely positive `L` attain the supremum at `T = I` for all three
/// target norms (Russo–Dye for positive maps), so those are exact. Otherwise
/// the best value over `budget.starts` alternating ascents is reported.
pub fn superop_norm(l: &SuperOperator, norm: TargetNorm, budget: Budget) -> SuperopNorm {
    let id = AlgebraElement::identity(l.source());
    if l.is_zero() {
        return SuperopNorm {
            value: 0.0,
            maximizer: id,
            status: NormStatus::Exact,
            norm,
        };
    }
    if l.is_completely_positive() {
        let li = l.apply_unchecked(&id);
        let (value, status) = match norm {
            TargetNorm::NumericalRadius => (li.max_eigenvalue().max(0.0), NormStatus::Exact),
            _ => target_norm_value(&li, norm, budget),
        };
        return SuperopNorm {
            value,
            maximizer: id,
            status,
            norm,
        };
    }
    let results: Vec<(f64, AlgebraElement)> = (0..budget.starts.max(1))
        .into_par_iter()
        .map(|s| {
            let t0 = if s == 0 {
                AlgebraElement::identity(l.source())
            } else {
                let mut r = rng::labelled(budget.seed, "superop_norm", s as u64);
                random_contraction(l.source(), &mut r, s % 2 == 1)
            };
            alternate(l, norm, t0, budget, s)
        })
        .collect();
    let (value, maximizer) = results
        .into_iter()
        .reduce(|a, b| if b.0 > a.0 { b } else { a })
        .expect("one start");
    SuperopNorm {
        value,
        maximizer,
        status: NormStatus::Heuristic,
        norm,
    }
}

/// Operator-valued sesquilinear map `Φ(x,y) ∈ B(𝔐, target)`, stored by its
/// Gram tensor of superoperators.
#[derive(Clone, Debug)]
pub struct OperatorValuedMap {
    domain_dim: usize,
    gram: Vec<SuperOperator>,
    /// `A[r][i]`: `Φ(x,y)(S) = E(Σ_r A_r(x) S A_r(y)^*)`, `A_r(x) = Σ_i x_i A[r][i]`.
    generator: Option<Vec<Vec<CMat>>>,
    label: String,
}

impl OperatorValuedMap {
    pub fn from_gram(domain_dim: usize, gram: Vec<SuperOperator>) -> Result<Self> {
        if domain_dim == 0 || gram.len() != domain_dim * domain_dim {
            return Err(Error::Structural(format!(
                "gram of {} superoperators for domain dimension {domain_dim}",
                gram.len()
            )));
        }
        let (s, t) = (gram[0].source.clone(), gram[0].target.clone());
        if gram.iter().any(|g| g.source != s || g.target != t) {
            return Err(Error::Structural("gram superoperators act between different algebras".into()));
        }
        Ok(Self {
            domain_dim,
            gram,
            generator: None,
            label: "gram".into(),
        })
    }

    pub fn from_generator(
        source: &Arc<TracedAlgebra>,
        target: &Arc<TracedAlgebra>,
        factors: Vec<Vec<CMat>>,
    ) -> Result<Self> {
        let d = factors
            .first()
            .map(|f| f.len())
            .ok_or_else(|| Error::Structural("generator needs at least one factor".into()))?;
        if d == 0 || factors.iter().any(|f| f.len() != d) {
            return Err(Error::Structural("generator factors have inconsistent lengths".into()));
        }
        let mut gram = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let pairs: Vec<(CMat, CMat)> =
                    factors.iter().map(|f| (f[i].clone(), f[j].clone())).collect();
                gram.push(SuperOperator::from_kraus_pairs(source, target, &pairs)?);
            }
        }
        Ok(Self {
            domain_dim: d,
            gram,
            generator: Some(factors),
            label: "generator".into(),
        })
    }

    /// Random generator-form map with complex Gaussian factors.
    pub fn random_generator(
        source: &Arc<TracedAlgebra>,
        target: &Arc<TracedAlgebra>,
        dim: usize,
        rank: usize,
        seed: u64,
    ) -> Result<Self> {
        let mut r = rng::labelled(seed, "opvalued_map", 0);
        let scale = Complex64::new(1.0 / ((dim * source.total_dim()) as f64).sqrt(), 0.0);
        let factors = (0..rank.max(1))
            .map(|_| {
                (0..dim)
                    .map(|_| rng::ginibre(&mut r, target.total_dim(), source.total_dim()) * scale)
                    .collect()
            })
            .collect();
        Self::from_generator(source, target, factors)
    }

    /// `Φ(x,y) = x·conj(y)·L` on a one-dimensional domain.
    pub fn scalar(l: SuperOperator) -> Self {
        Self {
            domain_dim: 1,
            gram: vec![l],
            generator: None,
            label: "scalar".into(),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn domain_dim(&self) -> usize {
        self.domain_dim
    }

    pub fn gram(&self) -> &[SuperOperator] {
        &self.gram
    }

    pub fn generator(&self) -> Option<&[Vec<CMat>]> {
        self.generator.as_deref()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn source(&self) -> &Arc<TracedAlgebra> {
        &self.gram[0].source
    }

    pub fn target(&self) -> &Arc<TracedAlgebra> {
        &self.gram[0].target
    }

    pub fn evaluate(&self, x: &[Complex64], y: &[Complex64]) -> Result<SuperOperator> {
        let d = self.domain_dim;
        if x.len() != d || y.len() != d {
            return Err(Error::Structural(format!("vectors must have length {d}")));
        }
        let mut terms = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                terms.push((x[i] * y[j].conj(), &self.gram[i * d + j]));
            }
        }
        SuperOperator::combine(&terms)
    }

    /// Generator form is certified; otherwise `Φ(x,x)(S)` is sampled on the
    /// basis vectors and random `(x, S ⪰ 0)`.
    pub fn check_positivity(&self, trials: usize, seed: u64) -> PositivityCertificate {
        if self.generator.is_some() {
            return PositivityCertificate {
                status: PositivityStatus::Certified,
                witness: None,
                samples: 0,
            };
        }
        let d = self.domain_dim;
        let samples: Vec<(f64, PositivityWitness)> = (0..d + trials)
            .into_par_iter()
            .map(|t| {
                let mut r = rng::labelled(seed, "opvalued_positivity", t as u64);
                let x = if t < d {
                    let mut e = vec![ZERO; d];
                    e[t] = ONE;
                    e
                } else {
                    rng::unit_vector(&mut r, d)
                };
                let s = AlgebraElement::random_psd(self.source(), &mut r);
                let v = self.evaluate(&x, &x).expect("lengths match").apply_unchecked(&s);
                let min = v.min_eigenvalue();
                (min / v.psd_tol(), PositivityWitness { x, min_eigenvalue: min })
            })
            .collect();
        let (score, witness) = samples
            .into_iter()
            .reduce(|a, b| if b.0 < a.0 - 1e-9 * (1.0 + a.0.abs()) { b } else { a })
            .expect("nonempty");
        PositivityCertificate {
            status: if score < -1.0 {
                PositivityStatus::Violated
            } else {
                PositivityStatus::Sampled
            },
            witness: Some(witness),
            samples: d + trials,
        }
    }
}

/// Cauchy–Schwarz check for an operator-valued map, with the statuses of the
/// three norms and the budget that produced the final answer.
#[derive(Clone, Debug, Serialize)]
pub struct OperatorCsReport {
    pub report: InequalityReport,
    pub norm: TargetNorm,
    pub lhs_status: NormStatus,
    pub rhs_status: NormStatus,
    pub starts: usize,
    pub escalated: bool,
}

/// Relative tolerance when any norm is a search lower bound.
pub const STATISTICAL_TOL: f64 = 0.05;
/// Budget multiplier applied once before a heuristic violation is reported.
pub const ESCALATION_FACTOR: usize = 8;

fn cs_once(
    map: &OperatorValuedMap,
    x: &[Complex64],
    y: &[Complex64],
    norm: TargetNorm,
    budget: Budget,
) -> Result<(InequalityReport, NormStatus, NormStatus)> {
    let witness = Witness {
        x: x.to_vec(),
        y: y.to_vec(),
        map: map.label.clone(),
        p: None,
    };
    if map.domain_dim == 1 {
        // Φ(x,y) = x·conj(y)·L: both sides are |x||y|·‖L‖ exactly
        let n = superop_norm(&map.gram[0], norm, budget);
        let (ax, ay) = (x[0].norm(), y[0].norm());
        let lhs = ax * ay * n.value;
        let rhs = ((ax * ax * n.value) * (ay * ay * n.value)).sqrt();
        let report = InequalityReport::new("cs_opvalued", lhs, rhs, tol_report(rhs)).with_witness(witness);
        return Ok((report, NormStatus::Exact, NormStatus::Exact));
    }
    let lhs = superop_norm(&map.evaluate(x, y)?, norm, budget);
    let nx = superop_norm(&map.evaluate(x, x)?, norm, budget);
    let ny = superop_norm(&map.evaluate(y, y)?, norm, budget);
    let rhs = (nx.value * ny.value).sqrt();
    let rhs_status = if nx.status == NormStatus::Exact && ny.status == NormStatus::Exact {
        NormStatus::Exact
    } else {
        NormStatus::Heuristic
    };
    let tol = if lhs.status == NormStatus::Exact && rhs_status == NormStatus::Exact {
        tol_report(rhs)
    } else {
        STATISTICAL_TOL * rhs + tol_report(rhs)
    };
    let report = InequalityReport::new("cs_opvalued", lhs.value, rhs, tol).with_witness(witness);
    Ok((report, lhs.status, rhs_status))
}

/// `‖Φ(x,y)‖ ≤ ‖Φ(x,x)‖^{1/2}‖Φ(y,y)‖^{1/2}` in `B(𝔐, B(ℋ))` with the
/// numerical-radius target, or in `B(𝔐, L²(ρ))` with `⦀·⦀₂`. All three norms
/// use the same budget and seed; a violation with heuristic norms is retried
/// once with an escalated budget before it is reported.
pub fn check_cs_operator_valued(
    map: &OperatorValuedMap,
    x: &[Complex64],
    y: &[Complex64],
    norm: TargetNorm,
    budget: Budget,
) -> Result<OperatorCsReport> {
    let cert = map.check_positivity(crate::sesquilinear::DEFAULT_POSITIVITY_TRIALS, budget.seed);
    if cert.is_violated() {
        return Err(Error::Precondition(format!(
            "operator-valued map '{}' is not positive",
            map.label
        )));
    }
    let (mut report, mut ls, mut rs) = cs_once(map, x, y, norm, budget)?;
    let mut used = budget;
    let mut escalated = false;
    if report.status == Status::Violated && (ls == NormStatus::Heuristic || rs == NormStatus::Heuristic) {
        used = budget.escalated(ESCALATION_FACTOR);
        escalated = true;
        (report, ls, rs) = cs_once(map, x, y, norm, used)?;
    }
    Ok(OperatorCsReport {
        report,
        norm,
        lhs_status: ls,
        rhs_status: rs,
        starts: used.starts,
        escalated,
    })
}
