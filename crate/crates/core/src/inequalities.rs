//! Checkers for the Cauchy–Schwarz type inequalities of positive
//! sesquilinear maps, the real/imaginary part estimates and the uncertainty
//! relation, plus a seeded ratio sampler.

use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::rng;
use crate::sesquilinear::{
    check_left_invariance, check_positivity, random_map_of_kind, LinearMap, MapKind, MapProfile,
    PositivityCertificate, SesquilinearMap, DEFAULT_POSITIVITY_TRIALS,
};
use crate::star_domain::AlgebraVector;
use crate::traced_algebra::{real_imag_parts, schatten_norm, PExponent, TracedAlgebra};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Holds,
    HoldsWithinTol,
    Violated,
    Inconclusive,
}

impl Status {
    pub fn is_ok(self) -> bool {
        matches!(self, Status::Holds | Status::HoldsWithinTol)
    }

    /// Worst of two statuses, in the order holds < within tol < inconclusive < violated.
    pub fn worst(self, other: Status) -> Status {
        fn rank(s: Status) -> u8 {
            match s {
                Status::Holds => 0,
                Status::HoldsWithinTol => 1,
                Status::Inconclusive => 2,
                Status::Violated => 3,
            }
        }
        if rank(other) > rank(self) {
            other
        } else {
            self
        }
    }
}

/// Inputs that produced a report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Witness {
    pub x: Vec<Complex64>,
    pub y: Vec<Complex64>,
    pub map: String,
    pub p: Option<PExponent>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InequalityReport {
    pub check: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`; 0 when both vanish, infinite when only `rhs` does.
    #[serde(with = "crate::io::extended_f64")]
    pub ratio: f64,
    pub margin: f64,
    pub tolerance: f64,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normality_residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

/// Default report tolerance `1e-8·(1 + rhs)`.
pub fn tol_report(rhs: f64) -> f64 {
    1e-8 * (1.0 + rhs)
}

impl InequalityReport {
    /// Classifies `lhs ≤ rhs` with absolute slack `tol`.
    pub fn new(check: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        let margin = rhs - lhs;
        let (ratio, status) = if !(lhs.is_finite() && rhs.is_finite()) {
            (f64::NAN, Status::Inconclusive)
        } else if rhs == 0.0 {
            if lhs <= tol {
                (0.0, if lhs == 0.0 { Status::Holds } else { Status::HoldsWithinTol })
            } else {
                (f64::INFINITY, Status::Violated)
            }
        } else if margin >= 0.0 {
            (lhs / rhs, Status::Holds)
        } else if margin >= -tol {
            (lhs / rhs, Status::HoldsWithinTol)
        } else {
            (lhs / rhs, Status::Violated)
        };
        Self {
            check: check.into(),
            lhs,
            rhs,
            ratio,
            margin,
            tolerance: tol,
            status,
            constant: None,
            normality_residual: None,
            witness: None,
        }
    }

    pub fn with_witness(mut self, witness: Witness) -> Self {
        self.witness = Some(witness);
        self
    }

    pub fn with_constant(mut self, c: f64) -> Self {
        self.constant = Some(c);
        self
    }
}

/// A sesquilinear map together with a non-violated positivity certificate.
#[derive(Clone, Debug)]
pub struct PositiveMap {
    map: SesquilinearMap,
    certificate: PositivityCertificate,
}

impl PositiveMap {
    pub fn certify(map: SesquilinearMap, trials: usize, seed: u64) -> Result<Self> {
        let certificate = check_positivity(&map, trials, seed);
        if certificate.is_violated() {
            let min = certificate
                .witness
                .as_ref()
                .map_or(f64::NAN, |w| w.min_eigenvalue);
            return Err(Error::Precondition(format!(
                "map '{}' is not positive: Φ(x,x) has eigenvalue {min:.3e}",
                map.label()
            )));
        }
        Ok(Self { map, certificate })
    }

    /// Certifies with the default sample count and seed 0.
    pub fn new(map: SesquilinearMap) -> Result<Self> {
        Self::certify(map, DEFAULT_POSITIVITY_TRIALS, 0)
    }

    pub fn map(&self) -> &SesquilinearMap {
        &self.map
    }

    pub fn certificate(&self) -> &PositivityCertificate {
        &self.certificate
    }
}

/// Constant in front of the Cauchy–Schwarz right-hand side.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CsConstant {
    Two,
    Sqrt2,
    One,
    Custom(f64),
}

impl CsConstant {
    pub fn value(self) -> f64 {
        match self {
            CsConstant::Two => 2.0,
            CsConstant::Sqrt2 => std::f64::consts::SQRT_2,
            CsConstant::One => 1.0,
            CsConstant::Custom(c) => c,
        }
    }

    /// `√2` at `p = 2`, otherwise 2.
    pub fn default_for(p: PExponent) -> Self {
        if p == PExponent::Finite(2.0) {
            CsConstant::Sqrt2
        } else {
            CsConstant::Two
        }
    }
}

fn witness(map: &SesquilinearMap, x: &[Complex64], y: &[Complex64], p: Option<PExponent>) -> Witness {
    Witness {
        x: x.to_vec(),
        y: y.to_vec(),
        map: map.label().to_string(),
        p,
    }
}

/// `√(‖Φ(x,x)‖_p ‖Φ(y,y)‖_p)`.
fn geometric_mean(map: &SesquilinearMap, x: &[Complex64], y: &[Complex64], p: PExponent) -> f64 {
    (schatten_norm(&map.eval(x, x), p) * schatten_norm(&map.eval(y, y), p)).sqrt()
}

/// `‖Φ(x,y)‖_p ≤ c·‖Φ(x,x)‖_p^{1/2}‖Φ(y,y)‖_p^{1/2}`. At `p = 1` the
/// constant is always 1.
pub fn check_cs_lp(
    map: &PositiveMap,
    x: &[Complex64],
    y: &[Complex64],
    p: PExponent,
    constant: CsConstant,
) -> Result<InequalityReport> {
    let phi = map.map.evaluate(x, y)?;
    let c = if p == PExponent::Finite(1.0) { 1.0 } else { constant.value() };
    let lhs = schatten_norm(&phi, p);
    let rhs = c * geometric_mean(&map.map, x, y, p);
    Ok(InequalityReport::new("cs_lp", lhs, rhs, tol_report(rhs))
        .with_constant(c)
        .with_witness(witness(&map.map, x, y, Some(p))))
}

/// Constant-1 inequality for a normal value `Φ(x,y)`.
pub fn check_cs_normal(
    map: &PositiveMap,
    x: &[Complex64],
    y: &[Complex64],
    p: PExponent,
) -> Result<InequalityReport> {
    if p == PExponent::Finite(1.0) {
        return Err(Error::Domain("the normal-value check needs p > 1".into()));
    }
    let phi = map.map.evaluate(x, y)?;
    let residual = phi.normality_residual();
    let sup = schatten_norm(&phi, PExponent::Infinity);
    if residual > 1e-8 * sup * sup {
        return Err(Error::Precondition(format!(
            "Φ(x,y) is not normal: ‖ZZ* − Z*Z‖_∞ = {residual:.3e} exceeds {:.3e}",
            1e-8 * sup * sup
        )));
    }
    let lhs = schatten_norm(&phi, p);
    let rhs = geometric_mean(&map.map, x, y, p);
    let mut report = InequalityReport::new("cs_normal", lhs, rhs, tol_report(rhs))
        .with_constant(1.0)
        .with_witness(witness(&map.map, x, y, Some(p)));
    report.normality_residual = Some(residual);
    Ok(report)
}

/// `‖ℜΦ(x,y)‖₂² ≤ ‖Φ(x,x)‖₂‖Φ(y,y)‖₂` and the same for `ℑ`.
pub fn check_re_im(
    map: &PositiveMap,
    x: &[Complex64],
    y: &[Complex64],
) -> Result<(InequalityReport, InequalityReport)> {
    let two = PExponent::Finite(2.0);
    let phi = map.map.evaluate(x, y)?;
    let (re, im) = real_imag_parts(&phi);
    let rhs = schatten_norm(&map.map.eval(x, x), two) * schatten_norm(&map.map.eval(y, y), two);
    let tol = tol_report(rhs);
    let w = witness(&map.map, x, y, Some(two));
    let re_lhs = schatten_norm(&re, two).powi(2);
    let im_lhs = schatten_norm(&im, two).powi(2);
    Ok((
        InequalityReport::new("re_estimate", re_lhs, rhs, tol).with_witness(w.clone()),
        InequalityReport::new("im_estimate", im_lhs, rhs, tol).with_witness(w),
    ))
}

/// `‖ω(y^*x)‖_p ≤ ‖ω(x^*x)‖_p^{1/2}‖ω(y^*y)‖_p^{1/2}` for a positive linear
/// map with normal value `ω(y^*x)`.
pub fn corollary_normal_linear(
    omega: &LinearMap,
    x: &AlgebraVector,
    y: &AlgebraVector,
    p: PExponent,
) -> Result<InequalityReport> {
    let induced = PositiveMap::new(omega.induced_map())?;
    let mut report = check_cs_normal(&induced, x.coords(), y.coords(), p)?;
    report.check = "cs_normal_linear".into();
    Ok(report)
}

/// One grid point of the uncertainty relation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UncertaintyReport {
    pub lambda: f64,
    pub mu: f64,
    pub delta_a: f64,
    pub delta_b: f64,
    pub gamma: f64,
    pub bound_ok: bool,
    pub k: Vec<Complex64>,
    pub commutator_residual: f64,
}

/// Uncertainty relation over a `(λ, μ)` grid, together with the data shared
/// by all grid points.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UncertaintySweep {
    pub reports: Vec<UncertaintyReport>,
    /// `k = i(ab − ba)`.
    pub k: Vec<Complex64>,
    pub gamma: f64,
    pub commutator_residual: f64,
    pub invariance_residual: f64,
    /// `‖Φ(k,𝖾) − Φ(k,𝖾)^*‖_∞`.
    pub phi_k_e_hermiticity: f64,
    /// Smallest `Δa(λ)·Δb(μ)` over the grid.
    pub min_product: f64,
    pub best_lambda: f64,
    pub best_mu: f64,
    pub bound_ok: bool,
}

impl UncertaintySweep {
    pub fn status(&self) -> Status {
        if self.bound_ok {
            Status::Holds
        } else {
            Status::Violated
        }
    }
}

/// 41 points on `[−3, 3]`.
pub fn default_grid() -> Vec<f64> {
    (0..41).map(|i| -3.0 + 0.15 * i as f64).collect()
}

/// Adds a golden-section refinement around the best grid minimiser of `f`.
fn refine_grid<F: Fn(f64) -> f64>(grid: &[f64], f: F) -> Vec<f64> {
    let mut out = grid.to_vec();
    if grid.len() >= 2 {
        let (best, _) = grid
            .iter()
            .enumerate()
            .map(|(i, &t)| (i, f(t)))
            .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
        let lo = grid[best.saturating_sub(1)];
        let hi = grid[(best + 1).min(grid.len() - 1)];
        let (t, _) = linalg::golden_section_min(&f, lo, hi, 1e-10);
        if !out.iter().any(|&g| (g - t).abs() < 1e-12) {
            out.push(t);
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Checks `Δa(λ)Δb(μ) ≥ ½γ(k)` for symmetric `a, b` and a left-invariant
/// hermitian map into `L²`, after verifying the Φ-commutator identity
/// `Φ(a·x, b^*·y) − Φ(b·x, a^*·y) = Φ(ik·x, y)` on basis pairs.
pub fn uncertainty_check(
    map: &SesquilinearMap,
    a: &AlgebraVector,
    b: &AlgebraVector,
    lambda_grid: &[f64],
    mu_grid: &[f64],
) -> Result<UncertaintySweep> {
    let alg = map
        .domain()
        .ok_or_else(|| Error::Precondition("the uncertainty check needs a *-algebra domain".into()))?
        .clone();
    if !Arc::ptr_eq(&alg, a.algebra()) && alg.dim() != a.algebra().dim() {
        return Err(Error::Structural("a is not in the domain algebra".into()));
    }
    let dim = alg.dim();
    for (name, v) in [("a", a), ("b", b)] {
        let scale = v.coords().iter().map(|z| z.norm()).fold(0.0, f64::max);
        if !v.is_symmetric(1e-12 * (1.0 + scale)) {
            return Err(Error::Precondition(format!("{name} is not symmetric")));
        }
    }
    let scale = map.scale();
    let invariance_residual = check_left_invariance(map)?;
    if invariance_residual > 1e-8 * (1.0 + scale) {
        return Err(Error::Precondition(format!(
            "map is not left-invariant (residual {invariance_residual:.3e})"
        )));
    }
    if !map.is_hermitian() {
        return Err(Error::Precondition("map is not hermitian".into()));
    }

    let two = PExponent::Finite(2.0);
    let i = Complex64::i();
    let ab = a.multiply(b)?;
    let ba = b.multiply(a)?;
    let k: Vec<Complex64> = ab
        .coords()
        .iter()
        .zip(ba.coords())
        .map(|(x, y)| i * (x - y))
        .collect();
    let kv = AlgebraVector::new(&alg, k.clone())?;
    let k_scale = k.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if !kv.is_symmetric(1e-10 * (1.0 + k_scale)) {
        return Err(Error::Inconsistency("i(ab − ba) is not symmetric".into()));
    }
    let ik: Vec<Complex64> = k.iter().map(|z| i * z).collect();

    let (a_c, b_c) = (a.coords(), b.coords());
    let (a_star, b_star) = (alg.star_coords(a_c), alg.star_coords(b_c));
    let mut commutator_residual = 0.0f64;
    let mut commutator_scale = 0.0f64;
    for xi in 0..dim {
        let x = alg.basis(xi);
        let (ax, bx, ikx) = (alg.mul_coords(a_c, &x), alg.mul_coords(b_c, &x), alg.mul_coords(&ik, &x));
        for yi in 0..dim {
            let y = alg.basis(yi);
            let t1 = map.eval(&ax, &alg.mul_coords(&b_star, &y));
            let t2 = map.eval(&bx, &alg.mul_coords(&a_star, &y));
            let t3 = map.eval(&ikx, &y);
            commutator_scale = commutator_scale
                .max(schatten_norm(&t1, two))
                .max(schatten_norm(&t2, two))
                .max(schatten_norm(&t3, two));
            commutator_residual = commutator_residual.max(schatten_norm(&(&(&t1 - &t2) - &t3), two));
        }
    }
    if commutator_residual > 1e-8 * (1.0 + commutator_scale) {
        return Err(Error::Inconsistency(format!(
            "Φ-commutator identity fails for k = i[a,b] (residual {commutator_residual:.3e})"
        )));
    }

    let e = alg.unit().to_vec();
    let phi_ke = map.eval(&k, &e);
    let phi_k_e_hermiticity = phi_ke.distance(&phi_ke.adjoint());
    let gamma = schatten_norm(&phi_ke, two);

    let delta = |v: &[Complex64], t: f64| -> f64 {
        let shifted: Vec<Complex64> = v.iter().zip(&e).map(|(x, u)| x - u * t).collect();
        schatten_norm(&map.eval(&shifted, &shifted), two).sqrt()
    };
    let lambdas = refine_grid(lambda_grid, |t| delta(a_c, t));
    let mus = refine_grid(mu_grid, |t| delta(b_c, t));
    let da: Vec<f64> = lambdas.iter().map(|&t| delta(a_c, t)).collect();
    let db: Vec<f64> = mus.iter().map(|&t| delta(b_c, t)).collect();

    let mut reports = Vec::with_capacity(lambdas.len() * mus.len());
    let (mut min_product, mut best_lambda, mut best_mu) = (f64::INFINITY, 0.0, 0.0);
    let mut bound_ok = true;
    for (&l, &dl) in lambdas.iter().zip(&da) {
        for (&m, &dm) in mus.iter().zip(&db) {
            let prod = dl * dm;
            let ok = prod >= 0.5 * gamma - 1e-8 * (1.0 + gamma);
            bound_ok &= ok;
            if prod < min_product {
                (min_product, best_lambda, best_mu) = (prod, l, m);
            }
            reports.push(UncertaintyReport {
                lambda: l,
                mu: m,
                delta_a: dl,
                delta_b: dm,
                gamma,
                bound_ok: ok,
                k: k.clone(),
                commutator_residual,
            });
        }
    }
    Ok(UncertaintySweep {
        reports,
        k,
        gamma,
        commutator_residual,
        invariance_residual,
        phi_k_e_hermiticity,
        min_product,
        best_lambda,
        best_mu,
        bound_ok,
    })
}

/// Sweep shape for [`ratio_sampler`]. Each trial draws its domain dimension,
/// target and rank from the lists.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RatioProfile {
    pub p: PExponent,
    pub targets: Vec<Arc<TracedAlgebra>>,
    pub dims: Vec<usize>,
    pub max_rank: usize,
    pub kind: MapKind,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RatioRow {
    pub trial: usize,
    pub p: PExponent,
    pub d: usize,
    pub target_dims: String,
    /// Against constant 1.
    #[serde(with = "crate::io::extended_f64")]
    pub ratio: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// Seed of the generated map, enough to rebuild the trial.
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RatioSummary {
    pub trials: usize,
    #[serde(with = "crate::io::extended_f64")]
    pub max_ratio: f64,
    pub argmax_trial: usize,
    pub mean_ratio: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RatioTable {
    pub rows: Vec<RatioRow>,
    pub summary: RatioSummary,
}

pub const RATIO_CSV_HEADER: &str = "trial,p,d,target_dims,ratio,lhs,rhs,seed";

impl RatioTable {
    /// Header, one line per trial, then a `summary` line carrying the
    /// maximum ratio in the `ratio` column.
    pub fn to_csv(&self, run_seed: u64) -> String {
        let mut out = String::from(RATIO_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{:?},{:?},{:?},{}",
                r.trial, r.p, r.d, r.target_dims, r.ratio, r.lhs, r.rhs, r.seed
            );
        }
        let p = self.rows.first().map(|r| r.p.to_string()).unwrap_or_default();
        let _ = writeln!(out, "summary,{p},,,{:?},,,{run_seed}", self.summary.max_ratio);
        out
    }
}

pub fn target_label(t: &TracedAlgebra) -> String {
    t.block_sizes()
        .iter()
        .map(|n| n.to_string())
        .collect::<Vec<_>>()
        .join("+")
}

/// A random case of the sweep: map and argument pair.
pub struct RatioCase {
    pub map: SesquilinearMap,
    pub x: Vec<Complex64>,
    pub y: Vec<Complex64>,
    pub map_seed: u64,
}

/// Draws trial `t` of a profile.
pub fn ratio_case(profile: &RatioProfile, t: usize) -> Result<RatioCase> {
    if profile.targets.is_empty() || profile.dims.is_empty() {
        return Err(Error::Config("ratio profile needs targets and dims".into()));
    }
    let mut r = rng::labelled(profile.seed, "ratio", t as u64);
    let d = profile.dims[r.random_range(0..profile.dims.len())];
    let target = Arc::clone(&profile.targets[r.random_range(0..profile.targets.len())]);
    let rank = 1 + r.random_range(0..profile.max_rank.max(1));
    let map_seed: u64 = r.random();
    let map = random_map_of_kind(
        &MapProfile {
            dim: d,
            target,
            rank,
            seed: map_seed,
        },
        profile.kind,
    )?;
    let x = rng::complex_vector(&mut r, d);
    let y = rng::complex_vector(&mut r, d);
    Ok(RatioCase { map, x, y, map_seed })
}

/// Empirical `‖Φ(x,y)‖_p / (‖Φ(x,x)‖_p‖Φ(y,y)‖_p)^{1/2}` over random maps.
pub fn ratio_sampler(profile: &RatioProfile) -> Result<RatioTable> {
    if profile.trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let p = profile.p;
    let rows = (0..profile.trials)
        .into_par_iter()
        .map(|t| {
            let case = ratio_case(profile, t)?;
            let lhs = schatten_norm(&case.map.eval(&case.x, &case.y), p);
            let rhs = geometric_mean(&case.map, &case.x, &case.y, p);
            let ratio = InequalityReport::new("", lhs, rhs, tol_report(rhs)).ratio;
            Ok(RatioRow {
                trial: t,
                p,
                d: case.map.domain_dim(),
                target_dims: target_label(case.map.target()),
                ratio,
                lhs,
                rhs,
                seed: case.map_seed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (argmax_trial, max_ratio) = rows
        .iter()
        .map(|r| (r.trial, r.ratio))
        .fold((0, f64::NEG_INFINITY), |acc, (t, v)| if v > acc.1 { (t, v) } else { acc });
    let mean_ratio = rows.iter().map(|r| r.ratio).sum::<f64>() / rows.len() as f64;
    Ok(RatioTable {
        rows,
        summary: RatioSummary {
            trials: profile.trials,
            max_ratio,
            argmax_trial,
            mean_ratio,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ONE, ZERO};
    use crate::rng::substream;
    use crate::sesquilinear::random_map;
    use crate::star_domain::StarAlgebra;
    use crate::traced_algebra::AlgebraElement;

    fn kraus(d: usize, target: Arc<TracedAlgebra>, seed: u64) -> PositiveMap {
        PositiveMap::new(
            random_map(&MapProfile {
                dim: d,
                target,
                rank: 2,
                seed,
            })
            .unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn status_classification() {
        assert_eq!(InequalityReport::new("t", 1.0, 2.0, 1e-8).status, Status::Holds);
        assert_eq!(InequalityReport::new("t", 1.0 + 1e-9, 1.0, 1e-8).status, Status::HoldsWithinTol);
        assert_eq!(InequalityReport::new("t", 1.1, 1.0, 1e-8).status, Status::Violated);
        let zero = InequalityReport::new("t", 0.0, 0.0, 1e-8);
        assert_eq!((zero.status, zero.ratio), (Status::Holds, 0.0));
        let bad = InequalityReport::new("t", 1e-3, 0.0, 1e-8);
        assert_eq!(bad.status, Status::Violated);
        assert_eq!(InequalityReport::new("t", f64::NAN, 1.0, 1e-8).status, Status::Inconclusive);
    }

    #[test]
    fn scalar_domain_ratio_is_reciprocal_constant() {
        let map = kraus(1, TracedAlgebra::full(3), 2);
        for (p, c) in [(2.0, CsConstant::Sqrt2), (3.0, CsConstant::Two), (1.5, CsConstant::One)] {
            let r = check_cs_lp(&map, &[ONE], &[ONE], PExponent::Finite(p), c).unwrap();
            assert!((r.ratio - 1.0 / c.value()).abs() < 1e-12);
            assert_eq!(r.status, Status::Holds);
        }
        let r = check_cs_lp(&map, &[ONE], &[ONE], PExponent::Finite(1.0), CsConstant::Two).unwrap();
        assert_eq!(r.constant, Some(1.0));
    }

    #[test]
    fn violated_positivity_is_rejected() {
        let t = TracedAlgebra::full(2);
        let g = AlgebraElement::diag(&t, &[1.0, -1.0]).unwrap();
        let map = SesquilinearMap::from_gram(&t, 1, vec![g]).unwrap();
        assert!(matches!(PositiveMap::new(map), Err(Error::Precondition(_))));
    }

    #[test]
    fn commutative_targets_satisfy_constant_one() {
        let target = TracedAlgebra::new(vec![1, 1, 1], vec![1.0, 2.0, 0.5]).unwrap();
        let mut r = substream(1, 0);
        for trial in 0..200 {
            let map = kraus(3, Arc::clone(&target), trial);
            let x = rng::complex_vector(&mut r, 3);
            let y = rng::complex_vector(&mut r, 3);
            let rep = check_cs_normal(&map, &x, &y, PExponent::Finite(3.0)).unwrap();
            assert!(rep.status.is_ok(), "{rep:?}");
            let rep = check_cs_lp(&map, &x, &y, PExponent::Finite(3.0), CsConstant::One).unwrap();
            assert!(rep.status.is_ok());
        }
    }

    #[test]
    fn nilpotent_value_is_not_normal() {
        let t = TracedAlgebra::full(2);
        let n = AlgebraElement::from_real_rows(&t, &[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        let id = AlgebraElement::identity(&t);
        // Φ(x,y) with Φ(e1,e2) = N and PSD diagonal entries
        let map = SesquilinearMap::from_gram(&t, 2, vec![id.scale_real(2.0), n.clone(), n.adjoint(), id.scale_real(2.0)]).unwrap();
        let map = PositiveMap::new(map).unwrap();
        let e1 = [ONE, ZERO];
        let e2 = [ZERO, ONE];
        assert!(matches!(
            check_cs_normal(&map, &e1, &e2, PExponent::Finite(2.0)),
            Err(Error::Precondition(_))
        ));
        let hermitian = check_cs_normal(&map, &e1, &e1, PExponent::Finite(2.0)).unwrap();
        assert_eq!(hermitian.status, Status::Holds);
    }

    #[test]
    fn re_im_estimates() {
        let map = kraus(3, TracedAlgebra::full(3), 5);
        let mut r = substream(2, 0);
        for _ in 0..200 {
            let x = rng::complex_vector(&mut r, 3);
            let y = rng::complex_vector(&mut r, 3);
            let (re, im) = check_re_im(&map, &x, &y).unwrap();
            assert!(re.status.is_ok() && im.status.is_ok());
        }
        let x = rng::complex_vector(&mut r, 3);
        let (re, im) = check_re_im(&map, &x, &x).unwrap();
        assert!((re.lhs - re.rhs).abs() <= 1e-10 * re.rhs);
        assert!(im.lhs <= 1e-20 * re.rhs);
    }

    #[test]
    fn anti_hermitian_value_has_zero_real_part() {
        let t = TracedAlgebra::full(2);
        let id = AlgebraElement::identity(&t);
        let s = AlgebraElement::diag(&t, &[1.0, -0.5]).unwrap().scale(Complex64::i());
        let map = SesquilinearMap::from_gram(&t, 2, vec![id.clone(), s.clone(), s.adjoint(), id]).unwrap();
        let map = PositiveMap::new(map).unwrap();
        let (re, im) = check_re_im(&map, &[ONE, ZERO], &[ZERO, ONE]).unwrap();
        assert_eq!(re.lhs, 0.0);
        assert_eq!(re.status, Status::Holds);
        assert!(im.status.is_ok());
    }

    #[test]
    fn trace_functional_into_scalars() {
        let dom = StarAlgebra::matrix_algebra(2);
        let omega = LinearMap::trace(&dom).unwrap();
        let mut r = substream(3, 0);
        for _ in 0..50 {
            let x = AlgebraVector::new(&dom, rng::complex_vector(&mut r, 4)).unwrap();
            let y = AlgebraVector::new(&dom, rng::complex_vector(&mut r, 4)).unwrap();
            let rep = corollary_normal_linear(&omega, &x, &y, PExponent::Finite(2.0)).unwrap();
            assert!(rep.status.is_ok());
            let eq = corollary_normal_linear(&omega, &x, &x, PExponent::Finite(2.0)).unwrap();
            assert!((eq.lhs - eq.rhs).abs() <= 1e-12 * eq.rhs);
        }
    }

    #[test]
    fn non_normal_linear_value_is_rejected() {
        let dom = StarAlgebra::matrix_algebra(2);
        let target = TracedAlgebra::full(2);
        let omega = LinearMap::new(
            &dom,
            &target,
            (0..4).map(|i| AlgebraElement::unit(&target, i)).collect(),
        )
        .unwrap();
        // ω is the identity map of M₂; ω(e_11^* e_12) = e_12 is nilpotent
        let x = AlgebraVector::basis(&dom, 1);
        let y = AlgebraVector::basis(&dom, 0);
        assert!(matches!(
            corollary_normal_linear(&omega, &x, &y, PExponent::Finite(2.0)),
            Err(Error::Precondition(_))
        ));
    }

    fn tracial_map(f0: &AlgebraElement) -> SesquilinearMap {
        let dom = StarAlgebra::matrix_algebra(2);
        let omega = LinearMap::trace(&dom).unwrap();
        let target = f0.algebra().clone();
        let induced = omega.induced_map();
        SesquilinearMap::from_fn(&target, 4, |i, j| f0.scale(induced.gram_entry(i, j).block(0)[(0, 0)]))
            .unwrap()
            .with_domain(&dom)
            .unwrap()
    }

    fn pauli(dom: &Arc<StarAlgebra>) -> (AlgebraVector, AlgebraVector, AlgebraVector) {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let sx = AlgebraVector::new(dom, vec![ZERO, ONE, ONE, ZERO]).unwrap();
        let sy = AlgebraVector::new(dom, vec![ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO]).unwrap();
        let sz = AlgebraVector::new(dom, vec![ONE, ZERO, ZERO, c(-1.0, 0.0)]).unwrap();
        (sx, sy, sz)
    }

    #[test]
    fn tracial_scalar_map_kills_commutators() {
        let t = TracedAlgebra::full(2);
        let f0 = AlgebraElement::random_psd(&t, &mut substream(4, 0));
        let map = tracial_map(&f0);
        let dom = map.domain().unwrap().clone();
        let (sx, sy, _) = pauli(&dom);
        let sweep = uncertainty_check(&map, &sx, &sy, &default_grid(), &default_grid()).unwrap();
        assert!(sweep.gamma <= 1e-12);
        assert!(sweep.bound_ok);
        assert_eq!(sweep.reports.len(), 42 * 42);
        let same = uncertainty_check(&map, &sx, &sx, &default_grid(), &default_grid()).unwrap();
        assert!(same.k.iter().all(|z| z.norm() == 0.0));
        assert!(same.gamma == 0.0 && same.bound_ok);
    }

    #[test]
    fn uncertainty_rejects_bad_inputs() {
        let t = TracedAlgebra::full(1);
        let map = tracial_map(&AlgebraElement::identity(&t));
        let dom = map.domain().unwrap().clone();
        let (sx, _, _) = pauli(&dom);
        let e12 = AlgebraVector::basis(&dom, 1);
        assert!(uncertainty_check(&map, &sx, &e12, &default_grid(), &default_grid()).is_err());
        let bare = SesquilinearMap::from_gram(map.target(), 4, map.gram().to_vec()).unwrap();
        assert!(uncertainty_check(&bare, &sx, &sx, &default_grid(), &default_grid()).is_err());
        // product of functionals is positive and hermitian but not invariant
        let mut r = substream(5, 0);
        let w = rng::complex_vector(&mut r, 4);
        let prod = SesquilinearMap::from_fn(&t, 4, |i, j| AlgebraElement::identity(&t).scale(w[i] * w[j].conj()))
            .unwrap()
            .with_domain(&dom)
            .unwrap();
        assert!(matches!(
            uncertainty_check(&prod, &sx, &sx, &default_grid(), &default_grid()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn golden_refinement_finds_the_minimum_of_delta() {
        let grid = default_grid();
        let refined = refine_grid(&grid, |t| (t - 0.123456).powi(2));
        assert!(refined.iter().any(|&t| (t - 0.123456).abs() < 1e-8));
        assert_eq!(refined.len(), 42);
    }

    fn profile(p: f64, targets: Vec<Arc<TracedAlgebra>>, dims: Vec<usize>, trials: usize) -> RatioProfile {
        RatioProfile {
            p: PExponent::new(p).unwrap(),
            targets,
            dims,
            max_rank: 3,
            kind: MapKind::Kraus,
            trials,
            seed: 9,
        }
    }

    #[test]
    fn scalar_domain_sampler_gives_unit_ratios() {
        let t = profile(3.0, vec![TracedAlgebra::full(3)], vec![1], 50);
        let table = ratio_sampler(&t).unwrap();
        assert!(table.rows.iter().all(|r| (r.ratio - 1.0).abs() < 1e-12));
    }

    #[test]
    fn commutative_sampler_stays_below_one() {
        let t = profile(2.0, vec![TracedAlgebra::new(vec![1, 1], vec![1.0, 3.0]).unwrap()], vec![2, 3, 4], 300);
        let table = ratio_sampler(&t).unwrap();
        assert!(table.summary.max_ratio <= 1.0 + 1e-8);
    }

    #[test]
    fn sampler_is_deterministic_and_csv_shaped() {
        let t = profile(2.0, vec![TracedAlgebra::full(2), TracedAlgebra::new(vec![2, 1], vec![1.0, 0.5]).unwrap()], vec![2, 3], 10);
        let a = ratio_sampler(&t).unwrap();
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap()
            .install(|| ratio_sampler(&t).unwrap());
        let (ca, cb) = (a.to_csv(9), b.to_csv(9));
        assert_eq!(ca, cb);
        let lines: Vec<&str> = ca.lines().collect();
        assert_eq!(lines.len(), 12);
        assert_eq!(lines[0], RATIO_CSV_HEADER);
        assert!(lines[11].starts_with("summary,2,"));
    }

    #[test]
    fn sampled_cases_rebuild_from_their_seed() {
        let t = profile(1.5, vec![TracedAlgebra::full(2)], vec![3], 5);
        let table = ratio_sampler(&t).unwrap();
        let case = ratio_case(&t, 3).unwrap();
        assert_eq!(case.map_seed, table.rows[3].seed);
        let lhs = schatten_norm(&case.map.eval(&case.x, &case.y), t.p);
        assert_eq!(lhs, table.rows[3].lhs);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(48))]

        #[test]
        fn ratios_are_scale_invariant(seed in 0u64..1000, c in 0.01f64..100.0, p in proptest::sample::select(vec![1.25, 1.5, 2.0, 3.0, 4.0])) {
            let map = kraus(3, TracedAlgebra::new(vec![2, 1], vec![0.7, 1.3]).unwrap(), seed);
            let scaled = PositiveMap::new(map.map().scaled(c)).unwrap();
            let mut r = substream(seed, 1);
            let x = rng::complex_vector(&mut r, 3);
            let y = rng::complex_vector(&mut r, 3);
            let pe = PExponent::Finite(p);
            let a = check_cs_lp(&map, &x, &y, pe, CsConstant::Two).unwrap();
            let b = check_cs_lp(&scaled, &x, &y, pe, CsConstant::Two).unwrap();
            proptest::prop_assert!((a.ratio - b.ratio).abs() <= 1e-12 * (1.0 + a.ratio));
            proptest::prop_assert_eq!(a.status, b.status);
        }
    }
}
