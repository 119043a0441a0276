//! The numerical radius, the generalized numerical-radius norm
//! `⦀F⦀₂ = sup {‖WFW‖₁ : W ⪰ 0, ‖W‖₂ ≤ 1, ‖W‖_∞ ≤ 1}` and operator norms of
//! superoperators under these target norms.
//!
//! Both suprema are nonconvex. Searches report certified lower bounds with
//! feasible maximisers, next to the analytic upper bound `‖F‖₂` and the
//! closed forms available for positive inputs.

mod superop;

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::inequalities::{tol_report, InequalityReport, PositiveMap, Witness};
use crate::linalg::{self, CMat};
use crate::rng;
use crate::traced_algebra::{schatten_norm, AlgebraElement, PExponent};

pub use superop::*;

/// Points of the θ-grid used by [`numerical_radius`].
pub const NR_GRID: usize = 1024;
/// Cheaper grid for numerical radii evaluated inside search loops.
pub(crate) const NR_COARSE_GRID: usize = 48;

/// Search effort for the nonconvex maximisations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub starts: usize,
    pub iters: usize,
    pub seed: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            starts: 16,
            iters: 200,
            seed: 0,
        }
    }
}

impl Budget {
    pub fn with_starts(self, starts: usize) -> Self {
        Self { starts, ..self }
    }

    pub fn escalated(self, factor: usize) -> Self {
        Self {
            starts: self.starts * factor,
            ..self
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormStatus {
    /// The value is the norm (closed form or lower bound meeting the upper bound).
    Exact,
    /// Best value found by the search; a lower bound.
    Heuristic,
}

/// `w(T)` with the maximising rotation and unit vector:
/// `|⟨Th, h⟩| = value` and `ℜ(e^{iθ}⟨Th,h⟩) = value`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RadiusWitness {
    pub value: f64,
    pub theta: f64,
    pub vector: Vec<Complex64>,
}

/// `λ_max(ℜ(e^{iθ} T))`.
fn rotated_top(t: &CMat, theta: f64) -> f64 {
    let m = t * Complex64::from_polar(1.0, theta);
    *linalg::hermitian_eigenvalues(&m).last().expect("nonempty matrix")
}

pub(crate) fn radius_with_grid(t: &CMat, grid: usize, tol: f64) -> RadiusWitness {
    let n = t.nrows();
    if n == 0 || linalg::max_abs(t) == 0.0 {
        let mut vector = vec![linalg::ZERO; n];
        if n > 0 {
            vector[0] = linalg::ONE;
        }
        return RadiusWitness {
            value: 0.0,
            theta: 0.0,
            vector,
        };
    }
    let step = 2.0 * PI / grid as f64;
    let (best_i, best_v) = (0..grid)
        .map(|i| (i, rotated_top(t, step * i as f64)))
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let center = step * best_i as f64;
    let (theta_r, neg) =
        linalg::golden_section_min(|th| -rotated_top(t, th), center - step, center + step, tol);
    let theta = if -neg > best_v { theta_r } else { center };
    let (value, vector) = linalg::top_eigenpair(&(t * Complex64::from_polar(1.0, theta)));
    RadiusWitness {
        value: value.max(0.0),
        theta: theta.rem_euclid(2.0 * PI),
        vector,
    }
}

/// `w(T) = sup_{‖h‖=1} |⟨Th, h⟩| = max_θ λ_max(ℜ(e^{iθ} T))`, on a
/// 1024-point θ-grid refined by golden section to `1e-10`.
pub fn numerical_radius(t: &CMat) -> f64 {
    numerical_radius_witness(t).value
}

pub fn numerical_radius_witness(t: &CMat) -> RadiusWitness {
    radius_with_grid(t, NR_GRID, 1e-10)
}

/// Numerical radius of a block-diagonal element: the largest over blocks.
pub fn numerical_radius_element(x: &AlgebraElement) -> f64 {
    x.blocks().iter().map(numerical_radius).fold(0.0, f64::max)
}

#[derive(Clone, Debug, Serialize)]
pub struct TripleNormResult {
    pub value: f64,
    /// Feasible `W` with `‖WFW‖₁ = value`.
    pub maximizer: AlgebraElement,
    /// `‖F‖₂`.
    pub upper_bound: f64,
    /// Best rank-one value `max_k min(w_k, 1)·w(F_k)`; equals `w(F)` for unit weights.
    pub rank1_bound: f64,
    pub status: NormStatus,
}

/// `‖W F W‖₁`.
pub fn sandwich_value(f: &AlgebraElement, w: &AlgebraElement) -> f64 {
    schatten_norm(&(&(w * f) * w), PExponent::Finite(1.0))
}

/// Largest violation of `W ⪰ 0`, `‖W‖_∞ ≤ 1`, `‖W‖₂ ≤ 1`.
pub fn feasibility_violation(w: &AlgebraElement) -> f64 {
    let herm = w.distance(&w.adjoint());
    let low = (-w.min_eigenvalue()).max(0.0);
    let high = (w.max_eigenvalue() - 1.0).max(0.0);
    let two = (schatten_norm(w, PExponent::Finite(2.0)) - 1.0).max(0.0);
    herm.max(low).max(high).max(two)
}

/// Nearest point (in the `ρ`-weighted Frobenius metric) of the feasible set
/// `{0 ⪯ W ⪯ I, ρ(W²) ≤ 1}` to the hermitian part of `x`. The set is
/// unitarily invariant blockwise, so the projection acts on eigenvalues:
/// `v = clip(λ/(1+μ), 0, 1)` with the smallest `μ ≥ 0` meeting the norm bound.
pub fn project_feasible(x: &AlgebraElement) -> AlgebraElement {
    let weights = x.algebra().weights();
    let eig: Vec<(Vec<f64>, CMat)> = x.blocks().iter().map(linalg::hermitian_eigen).collect();
    let mass = |mu: f64| -> f64 {
        eig.iter()
            .zip(weights)
            .map(|((vals, _), w)| {
                w * vals.iter().map(|l| (l / (1.0 + mu)).clamp(0.0, 1.0).powi(2)).sum::<f64>()
            })
            .sum()
    };
    let mu = if mass(0.0) <= 1.0 {
        0.0
    } else {
        let top: f64 = eig
            .iter()
            .zip(weights)
            .map(|((vals, _), w)| w * vals.iter().map(|l| l.max(0.0).powi(2)).sum::<f64>())
            .sum::<f64>()
            .sqrt();
        let (mut lo, mut hi) = (0.0, top);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mass(mid) <= 1.0 {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-15 * (1.0 + hi) {
                break;
            }
        }
        hi
    };
    let blocks = eig
        .iter()
        .map(|(vals, q)| {
            linalg::reassemble(
                q,
                vals.iter()
                    .map(|l| Complex64::new((l / (1.0 + mu)).clamp(0.0, 1.0), 0.0)),
            )
        })
        .collect();
    AlgebraElement::new(x.algebra(), blocks).expect("shapes preserved")
}

/// Exact `⦀F⦀₂` for `F ⪰ 0`: maximise `ρ(F V)` over `0 ⪯ V ⪯ I, ρ(V) ≤ 1`
/// (with `V = W²`), which is a fractional knapsack on the eigenvalues.
fn psd_triple(f: &AlgebraElement) -> (f64, AlgebraElement) {
    let alg = f.algebra();
    let eig: Vec<(Vec<f64>, CMat)> = f.blocks().iter().map(linalg::hermitian_eigen).collect();
    let mut items: Vec<(f64, usize, usize)> = eig
        .iter()
        .enumerate()
        .flat_map(|(k, (vals, _))| vals.iter().enumerate().map(move |(i, &l)| (l, k, i)))
        .collect();
    items.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut fill: Vec<Vec<f64>> = eig.iter().map(|(v, _)| vec![0.0; v.len()]).collect();
    let mut budget = 1.0;
    let mut value = 0.0;
    for (l, k, i) in items {
        if budget <= 0.0 || l <= 0.0 {
            break;
        }
        let w = alg.weights()[k];
        let v = (budget / w).min(1.0);
        fill[k][i] = v;
        budget -= w * v;
        value += w * l * v;
    }
    let blocks = eig
        .iter()
        .zip(&fill)
        .map(|((_, q), v)| linalg::reassemble(q, v.iter().map(|x| Complex64::new(x.sqrt(), 0.0))))
        .collect();
    (value, AlgebraElement::new(alg, blocks).expect("shapes preserved"))
}

/// `c·hh^*` in block `k` with the largest feasible `c`.
fn rank_one_in_block(alg: &std::sync::Arc<crate::TracedAlgebra>, k: usize, h: &[Complex64]) -> AlgebraElement {
    let c = (1.0 / alg.weights()[k].sqrt()).min(1.0);
    let mut blocks: Vec<CMat> = alg.block_sizes().iter().map(|&n| CMat::zeros(n, n)).collect();
    blocks[k] = linalg::outer(h, h) * Complex64::new(c, 0.0);
    AlgebraElement::new(alg, blocks).expect("shapes preserved")
}

/// Nested spectral projections of `|G|`, `|G^*|` and the parts of `ℜG`,
/// each scaled into the feasible set.
fn spectral_candidates(g: &AlgebraElement) -> Vec<AlgebraElement> {
    let alg = g.algebra();
    let herm = g.hermitian_part();
    let sources = [
        crate::traced_algebra::abs(g),
        crate::traced_algebra::abs(&g.adjoint()),
        herm.clone(),
        herm.scale_real(-1.0),
    ];
    let mut out = Vec::new();
    for s in &sources {
        let eig: Vec<(Vec<f64>, CMat)> = s.blocks().iter().map(linalg::hermitian_eigen).collect();
        let mut items: Vec<(f64, usize, usize)> = eig
            .iter()
            .enumerate()
            .flat_map(|(k, (vals, _))| vals.iter().enumerate().map(move |(i, &l)| (l, k, i)))
            .filter(|t| t.0 > 0.0)
            .collect();
        items.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut blocks: Vec<CMat> = alg.block_sizes().iter().map(|&n| CMat::zeros(n, n)).collect();
        let mut mass = 0.0;
        for (_, k, i) in items {
            let v: Vec<Complex64> = eig[k].1.column(i).iter().copied().collect();
            blocks[k] += linalg::outer(&v, &v);
            mass += alg.weights()[k];
            let c = (1.0 / mass.sqrt()).min(1.0);
            let p = AlgebraElement::new(alg, blocks.clone()).expect("shapes preserved");
            out.push(p.scale_real(c));
        }
        // knapsack on the PSD source is feasible too and often better
        out.push(psd_triple(&crate::traced_algebra::abs(s)).1);
    }
    out
}

/// Projected supergradient ascent of `W ↦ ‖WGW‖₁` from `w0`.
fn ascend(g: &AlgebraElement, w0: AlgebraElement, iters: usize) -> (f64, AlgebraElement) {
    let mut w = w0;
    let mut f = sandwich_value(g, &w);
    let mut step = 0.5;
    for _ in 0..iters {
        let x = &(&w * g) * &w;
        let (z, _) = crate::traced_algebra::polar_decomposition(&x);
        let zs = z.adjoint();
        let grad = (&(&(g * &w) * &zs) + &(&(&zs * &w) * g)).hermitian_part();
        let mut improved = false;
        while step > 1e-10 {
            let cand = project_feasible(&(&w + &grad.scale_real(step)));
            let fc = sandwich_value(g, &cand);
            if fc > f + 1e-15 {
                improved = fc > f + 1e-13 * f.max(1e-300);
                w = cand;
                f = fc;
                step = (step * 2.0).min(1e3);
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (f, w)
}

/// `⦀F⦀₂`: best of rank-one, spectral and projected-ascent candidates.
/// Exact for `±F ⪰ 0` (closed form) and whenever the value meets `‖F‖₂`.
pub fn triple_norm(f: &AlgebraElement, budget: Budget) -> TripleNormResult {
    let alg = f.algebra();
    let upper = schatten_norm(f, PExponent::Finite(2.0));
    if upper == 0.0 {
        return TripleNormResult {
            value: 0.0,
            maximizer: AlgebraElement::zeros(alg),
            upper_bound: 0.0,
            rank1_bound: 0.0,
            status: NormStatus::Exact,
        };
    }
    // the search runs on F/‖F‖₂ so that it is scale equivariant
    let g = f.scale_real(1.0 / upper);
    let mut best: (f64, AlgebraElement) = (f64::NEG_INFINITY, AlgebraElement::zeros(alg));
    let consider = |v: f64, w: AlgebraElement, best: &mut (f64, AlgebraElement)| {
        if v > best.0 {
            *best = (v, w);
        }
    };
    let mut rank1 = 0.0f64;
    for k in 0..alg.num_blocks() {
        let wit = numerical_radius_witness(g.block(k));
        let cand = rank_one_in_block(alg, k, &wit.vector);
        rank1 = rank1.max(alg.weights()[k].min(1.0) * wit.value);
        consider(sandwich_value(&g, &cand), cand, &mut best);
    }
    let definite = if g.is_psd() {
        Some(g.clone())
    } else if g.scale_real(-1.0).is_psd() {
        Some(g.scale_real(-1.0))
    } else {
        None
    };
    if let Some(pos) = definite {
        let (_, w) = psd_triple(&pos.hermitian_part());
        let v = sandwich_value(&g, &w);
        return TripleNormResult {
            value: v * upper,
            maximizer: w,
            upper_bound: upper,
            rank1_bound: rank1 * upper,
            status: NormStatus::Exact,
        };
    }
    for cand in spectral_candidates(&g) {
        consider(sandwich_value(&g, &cand), cand, &mut best);
    }
    let seeded = ascend(&g, best.1.clone(), budget.iters);
    consider(seeded.0, seeded.1, &mut best);
    let searched: Vec<(f64, AlgebraElement)> = (0..budget.starts)
        .into_par_iter()
        .map(|s| {
            let mut r = rng::labelled(budget.seed, "triple_norm", s as u64);
            let start = project_feasible(&AlgebraElement::random_psd(alg, &mut r));
            ascend(&g, start, budget.iters)
        })
        .collect();
    for (v, w) in searched {
        consider(v, w, &mut best);
    }
    let status = if best.0 >= 1.0 - 1e-12 {
        NormStatus::Exact
    } else {
        NormStatus::Heuristic
    };
    TripleNormResult {
        value: best.0 * upper,
        maximizer: best.1,
        upper_bound: upper,
        rank1_bound: rank1 * upper,
        status,
    }
}

/// Lower bound for `⦀F⦀₂` by ascent from the better of `w0` and the
/// rank-one candidates. Used inside outer searches where `F` moves slowly.
pub(crate) fn triple_norm_warm(f: &AlgebraElement, w0: &AlgebraElement, iters: usize) -> (f64, AlgebraElement) {
    let alg = f.algebra();
    let upper = schatten_norm(f, PExponent::Finite(2.0));
    if upper == 0.0 {
        return (0.0, AlgebraElement::zeros(alg));
    }
    let g = f.scale_real(1.0 / upper);
    let start = project_feasible(w0);
    let mut best = (sandwich_value(&g, &start), start);
    for k in 0..alg.num_blocks() {
        let wit = radius_with_grid(g.block(k), NR_COARSE_GRID, 1e-6);
        let cand = rank_one_in_block(alg, k, &wit.vector);
        let v = sandwich_value(&g, &cand);
        if v > best.0 {
            best = (v, cand);
        }
    }
    let (v, w) = ascend(&g, best.1, iters);
    (v * upper, w)
}

/// Empirical norm axioms of `⦀·⦀₂` on random elements.
#[derive(Clone, Debug, Serialize)]
pub struct TripleAxiomReport {
    pub samples: usize,
    /// Largest `|⦀cF⦀ − |c|⦀F⦀|` relative to `|c|⦀F⦀`.
    pub homogeneity_error: f64,
    /// Largest `⦀F+G⦀ − ⦀F⦀ − ⦀G⦀` (positive means the lower bounds broke the triangle inequality).
    pub triangle_excess: f64,
    /// Smallest `value − rank1_bound` and `‖F‖₂ − value` over the samples.
    pub rank1_slack: f64,
    pub upper_slack: f64,
    /// Smallest `⦀F⦀ / ‖F‖₂`, positive for faithful behaviour.
    pub faithfulness: f64,
    pub zero_value: f64,
    pub passes: bool,
}

pub fn triple_norm_axioms(
    algebras: &[std::sync::Arc<crate::TracedAlgebra>],
    samples: usize,
    budget: Budget,
) -> TripleAxiomReport {
    let rows: Vec<(f64, f64, f64, f64, f64)> = (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut r = rng::labelled(budget.seed, "triple_axioms", s as u64);
            let alg = &algebras[s % algebras.len()];
            let f = AlgebraElement::random(alg, &mut r);
            let g = AlgebraElement::random(alg, &mut r);
            let c = Complex64::new(rng::gaussian(&mut r), rng::gaussian(&mut r));
            let nf = triple_norm(&f, budget);
            let ng = triple_norm(&g, budget);
            let ncf = triple_norm(&f.scale(c), budget);
            let nfg = triple_norm(&(&f + &g), budget);
            let homog = (ncf.value - c.norm() * nf.value).abs() / (c.norm() * nf.value);
            let tri = nfg.value - nf.value - ng.value;
            let up = nf.upper_bound - nf.value;
            (homog, tri, nf.value - nf.rank1_bound, up, nf.value / nf.upper_bound)
        })
        .collect();
    let fold = |sel: fn(&(f64, f64, f64, f64, f64)) -> f64, init: f64, max: bool| {
        rows.iter().map(sel).fold(init, |a, b| if max { a.max(b) } else { a.min(b) })
    };
    let homogeneity_error = fold(|r| r.0, 0.0, true);
    let triangle_excess = fold(|r| r.1, f64::NEG_INFINITY, true);
    let rank1_slack = fold(|r| r.2, f64::INFINITY, false);
    let upper_slack = fold(|r| r.3, f64::INFINITY, false);
    let faithfulness = fold(|r| r.4, f64::INFINITY, false);
    let zero_value = triple_norm(&AlgebraElement::zeros(&algebras[0]), budget).value;
    TripleAxiomReport {
        samples,
        homogeneity_error,
        triangle_excess,
        rank1_slack,
        upper_slack,
        faithfulness,
        zero_value,
        passes: homogeneity_error <= 1e-6
            && triangle_excess <= 2e-6
            && rank1_slack >= -1e-6
            && upper_slack >= -1e-9
            && faithfulness > 0.0
            && zero_value == 0.0,
    }
}

/// Cauchy–Schwarz in `⦀·⦀₂` with constant 1, with the statuses of the
/// three norms.
#[derive(Clone, Debug, Serialize)]
pub struct TripleCsReport {
    pub report: InequalityReport,
    pub lhs_status: NormStatus,
    pub rhs_status: NormStatus,
}

/// `⦀Φ(x,y)⦀₂ ≤ ⦀Φ(x,x)⦀₂^{1/2}⦀Φ(y,y)⦀₂^{1/2}`. The left side is a
/// search lower bound; the diagonal values are PSD and hence exact. A
/// heuristic right side widens the slack to `1e-6·(1 + rhs)`.
pub fn check_cs_triple(map: &PositiveMap, x: &[Complex64], y: &[Complex64], budget: Budget) -> Result<TripleCsReport> {
    let phi = map.map();
    let lhs = triple_norm(&phi.evaluate(x, y)?, budget);
    let nx = triple_norm(&phi.evaluate(x, x)?, budget);
    let ny = triple_norm(&phi.evaluate(y, y)?, budget);
    let rhs = (nx.value * ny.value).sqrt();
    let rhs_status = if nx.status == NormStatus::Exact && ny.status == NormStatus::Exact {
        NormStatus::Exact
    } else {
        NormStatus::Heuristic
    };
    let tol = match rhs_status {
        NormStatus::Exact => tol_report(rhs),
        NormStatus::Heuristic => 1e-6 * (1.0 + rhs),
    };
    let report = InequalityReport::new("cs_triple", lhs.value, rhs, tol)
        .with_constant(1.0)
        .with_witness(Witness { x: x.to_vec(), y: y.to_vec(), map: phi.label().to_string(), p: None });
    Ok(TripleCsReport { report, lhs_status: lhs.status, rhs_status })
}
