//! Positive sesquilinear maps `Φ: 𝔛 × 𝔛 → L^p(ρ)` on a finite coordinate
//! domain, stored as a Gram tensor `G[i][j] = Φ(e_i, e_j)`.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, ZERO};
use crate::rng;
use crate::star_domain::StarAlgebra;
use crate::traced_algebra::{schatten_norm, AlgebraElement, PExponent, TracedAlgebra};

/// Default number of random unit vectors used by [`check_positivity`].
pub const DEFAULT_POSITIVITY_TRIALS: usize = 512;

/// One term `T(x) C T(y)^*` of a generator, with `T(x) = Σ_i x_i A_i`.
#[derive(Clone, Debug)]
pub struct KrausFactor {
    pub coefficients: Vec<AlgebraElement>,
    pub core: AlgebraElement,
}

impl KrausFactor {
    pub fn apply(&self, x: &[Complex64]) -> AlgebraElement {
        let mut out = AlgebraElement::zeros(self.core.algebra());
        for (xi, a) in x.iter().zip(&self.coefficients) {
            if *xi != ZERO {
                out = &out + &a.scale(*xi);
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct SesquilinearMap {
    domain_dim: usize,
    target: Arc<TracedAlgebra>,
    /// Row-major `d × d`.
    gram: Vec<AlgebraElement>,
    generator: Option<Vec<KrausFactor>>,
    domain: Option<Arc<StarAlgebra>>,
    label: String,
}

impl SesquilinearMap {
    /// Map given by its Gram tensor, listed row-major.
    pub fn from_gram(
        target: &Arc<TracedAlgebra>,
        domain_dim: usize,
        gram: Vec<AlgebraElement>,
    ) -> Result<Self> {
        if domain_dim == 0 {
            return Err(Error::Structural("domain dimension must be positive".into()));
        }
        if gram.len() != domain_dim * domain_dim {
            return Err(Error::Structural(format!(
                "gram has {} entries, expected {}",
                gram.len(),
                domain_dim * domain_dim
            )));
        }
        for g in &gram {
            g.ensure_in(target)?;
        }
        Ok(Self {
            domain_dim,
            target: Arc::clone(target),
            gram,
            generator: None,
            domain: None,
            label: "gram".into(),
        })
    }

    /// Gram tensor filled by `f(i, j) = Φ(e_i, e_j)`.
    pub fn from_fn<F>(target: &Arc<TracedAlgebra>, domain_dim: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> AlgebraElement,
    {
        let mut gram = Vec::with_capacity(domain_dim * domain_dim);
        for i in 0..domain_dim {
            for j in 0..domain_dim {
                gram.push(f(i, j));
            }
        }
        Self::from_gram(target, domain_dim, gram)
    }

    /// Kraus-form map `Φ(x,y) = Σ_r T_r(x) C_r T_r(y)^*`; every core must be PSD.
    pub fn from_generator(target: &Arc<TracedAlgebra>, factors: Vec<KrausFactor>) -> Result<Self> {
        let first = factors
            .first()
            .ok_or_else(|| Error::Structural("generator needs at least one factor".into()))?;
        let d = first.coefficients.len();
        for f in &factors {
            if f.coefficients.len() != d {
                return Err(Error::Structural(
                    "generator factors have different domain dimensions".into(),
                ));
            }
            f.core.ensure_in(target)?;
            for a in &f.coefficients {
                a.ensure_in(target)?;
            }
            if !f.core.is_psd() {
                return Err(Error::Precondition(format!(
                    "generator core is not PSD (min eigenvalue {:.3e})",
                    f.core.min_eigenvalue()
                )));
            }
        }
        let mut map = Self::from_fn(target, d, |i, j| {
            factors.iter().fold(AlgebraElement::zeros(target), |acc, f| {
                &acc + &(&(&f.coefficients[i] * &f.core) * &f.coefficients[j].adjoint())
            })
        })?;
        map.generator = Some(factors);
        map.label = "kraus".into();
        Ok(map)
    }

    /// Attaches a *-algebra structure to the coordinate domain.
    pub fn with_domain(mut self, domain: &Arc<StarAlgebra>) -> Result<Self> {
        if domain.dim() != self.domain_dim {
            return Err(Error::Structural(format!(
                "algebra of dimension {} for a map on a {}-dimensional domain",
                domain.dim(),
                self.domain_dim
            )));
        }
        self.domain = Some(Arc::clone(domain));
        Ok(self)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn domain_dim(&self) -> usize {
        self.domain_dim
    }

    pub fn target(&self) -> &Arc<TracedAlgebra> {
        &self.target
    }

    pub fn gram(&self) -> &[AlgebraElement] {
        &self.gram
    }

    pub fn gram_entry(&self, i: usize, j: usize) -> &AlgebraElement {
        &self.gram[i * self.domain_dim + j]
    }

    pub fn generator(&self) -> Option<&[KrausFactor]> {
        self.generator.as_deref()
    }

    pub fn domain(&self) -> Option<&Arc<StarAlgebra>> {
        self.domain.as_ref()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Largest `‖G[i][j]‖_∞`; the natural scale for absolute tolerances.
    pub fn scale(&self) -> f64 {
        self.gram
            .iter()
            .map(|g| schatten_norm(g, PExponent::Infinity))
            .fold(0.0, f64::max)
    }

    /// `c·Φ`; a generator is kept when `c ≥ 0`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.gram = self.gram.iter().map(|g| g.scale_real(c)).collect();
        out.generator = match (&self.generator, c >= 0.0) {
            (Some(factors), true) => Some(
                factors
                    .iter()
                    .map(|f| KrausFactor {
                        coefficients: f.coefficients.clone(),
                        core: f.core.scale_real(c),
                    })
                    .collect(),
            ),
            _ => None,
        };
        out
    }

    fn check_len(&self, v: &[Complex64]) -> Result<()> {
        if v.len() != self.domain_dim {
            return Err(Error::Structural(format!(
                "vector of length {} for a {}-dimensional domain",
                v.len(),
                self.domain_dim
            )));
        }
        Ok(())
    }

    /// `Φ(x, y) = Σ_ij x_i conj(y_j) G[i][j]`.
    pub fn evaluate(&self, x: &[Complex64], y: &[Complex64]) -> Result<AlgebraElement> {
        self.check_len(x)?;
        self.check_len(y)?;
        Ok(self.eval(x, y))
    }

    pub(crate) fn eval(&self, x: &[Complex64], y: &[Complex64]) -> AlgebraElement {
        let d = self.domain_dim;
        let mut blocks: Vec<CMat> = self
            .target
            .block_sizes()
            .iter()
            .map(|&n| CMat::zeros(n, n))
            .collect();
        for (i, xi) in x.iter().enumerate() {
            if *xi == ZERO {
                continue;
            }
            for (j, yj) in y.iter().enumerate() {
                let c = xi * yj.conj();
                if c == ZERO {
                    continue;
                }
                for (b, g) in blocks.iter_mut().zip(self.gram[i * d + j].blocks()) {
                    *b += g * c;
                }
            }
        }
        AlgebraElement::new(&self.target, blocks).expect("gram blocks match the target")
    }

    /// Largest `‖G[j][i] − G[i][j]^*‖_∞` entry.
    pub fn hermiticity_residual(&self) -> f64 {
        let d = self.domain_dim;
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                worst = worst.max(self.gram_entry(j, i).distance(&self.gram_entry(i, j).adjoint()));
            }
        }
        worst
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_residual() <= 1e-10 * (1.0 + self.scale())
    }

    /// Largest entry difference between the stored Gram tensor and the one
    /// rebuilt from the generator (0 without a generator).
    pub fn generator_residual(&self) -> f64 {
        let Some(factors) = &self.generator else {
            return 0.0;
        };
        let d = self.domain_dim;
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let rebuilt = factors.iter().fold(AlgebraElement::zeros(&self.target), |acc, f| {
                    &acc + &(&(&f.coefficients[i] * &f.core) * &f.coefficients[j].adjoint())
                });
                worst = worst.max(rebuilt.distance(self.gram_entry(i, j)));
            }
        }
        worst
    }

    /// Smallest eigenvalue, per target block, of the block matrix `[G[i][j]]`.
    /// Nonnegative values certify positivity.
    pub fn block_gram_min_eigenvalue(&self) -> f64 {
        let d = self.domain_dim;
        let mut worst = f64::INFINITY;
        for (k, &n) in self.target.block_sizes().iter().enumerate() {
            let big = CMat::from_fn(d * n, d * n, |r, c| {
                self.gram_entry(r / n, c / n).block(k)[(r % n, c % n)]
            });
            let herm_err = linalg::max_abs(&(&big - big.adjoint()));
            if herm_err > 1e-10 * (1.0 + linalg::max_abs(&big)) {
                return f64::NEG_INFINITY;
            }
            worst = worst.min(linalg::hermitian_eigenvalues(&big)[0]);
        }
        worst
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PositivityStatus {
    /// Positivity follows from the algebraic form or a block-PSD Gram tensor.
    Certified,
    /// No negative value seen on the sampled vectors.
    Sampled,
    /// Some `Φ(x,x)` has an eigenvalue below `−tol`.
    Violated,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PositivityWitness {
    pub x: Vec<Complex64>,
    pub min_eigenvalue: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PositivityCertificate {
    pub status: PositivityStatus,
    /// Most negative sample (relative to its tolerance), if any was drawn.
    pub witness: Option<PositivityWitness>,
    pub samples: usize,
}

impl PositivityCertificate {
    pub fn is_violated(&self) -> bool {
        self.status == PositivityStatus::Violated
    }
}

/// Relative score of a sample: min eigenvalue over its PSD tolerance.
fn sample_score(map: &SesquilinearMap, x: Vec<Complex64>) -> (f64, PositivityWitness) {
    let v = map.eval(&x, &x);
    let min = v.min_eigenvalue();
    (
        min / v.psd_tol(),
        PositivityWitness {
            x,
            min_eigenvalue: min,
        },
    )
}

/// Certifies positivity algebraically where possible, else samples the basis
/// vectors and `trials` random unit vectors.
pub fn check_positivity(map: &SesquilinearMap, trials: usize, seed: u64) -> PositivityCertificate {
    if map.generator.is_some() || map.block_gram_min_eigenvalue() >= -1e-10 * (1.0 + map.scale()) {
        return PositivityCertificate {
            status: PositivityStatus::Certified,
            witness: None,
            samples: 0,
        };
    }
    let d = map.domain_dim;
    let basis = (0..d).map(|i| {
        let mut e = vec![ZERO; d];
        e[i] = Complex64::new(1.0, 0.0);
        e
    });
    let mut scored: Vec<(f64, PositivityWitness)> =
        basis.map(|e| sample_score(map, e)).collect();
    scored.par_extend((0..trials).into_par_iter().map(|t| {
        let mut r = rng::labelled(seed, "positivity", t as u64);
        sample_score(map, rng::unit_vector(&mut r, d))
    }));
    // earliest clearly-smallest score; rounding-level ties keep the earlier sample
    let (score, witness) = scored
        .into_iter()
        .reduce(|best, next| {
            if next.0 < best.0 - 1e-9 * (1.0 + best.0.abs()) {
                next
            } else {
                best
            }
        })
        .expect("at least one basis vector");
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

/// `max_{a,c,d} ‖Φ(a·c, d) − Φ(c, a^*·d)‖_2` over basis elements.
pub fn check_left_invariance(map: &SesquilinearMap) -> Result<f64> {
    let alg = map.domain.as_ref().ok_or_else(|| {
        Error::Precondition("left invariance needs a *-algebra structure on the domain".into())
    })?;
    let dim = alg.dim();
    let basis: Vec<Vec<Complex64>> = (0..dim).map(|i| alg.basis(i)).collect();
    let two = PExponent::Finite(2.0);
    let mut worst = 0.0f64;
    for a in &basis {
        let a_star = alg.star_coords(a);
        for c in &basis {
            let ac = alg.mul_coords(a, c);
            for e in &basis {
                let a_star_e = alg.mul_coords(&a_star, e);
                let diff = &map.eval(&ac, e) - &map.eval(c, &a_star_e);
                worst = worst.max(schatten_norm(&diff, two));
            }
        }
    }
    Ok(worst)
}

/// Shape of a random map.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MapProfile {
    pub dim: usize,
    pub target: Arc<TracedAlgebra>,
    pub rank: usize,
    pub seed: u64,
}

/// Family of random maps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    /// `Σ_r T_r(x) C_r T_r(y)^*`, stored with its generator.
    Kraus,
    /// A Kraus part plus `Σ_r S_r(y)^* D_r S_r(x)`. Still positive, but
    /// neither term order factors through a single generator, so only
    /// sampled certificates are available.
    Mixed,
}

fn random_factor(target: &Arc<TracedAlgebra>, dim: usize, r: &mut rng::StreamRng) -> KrausFactor {
    let scale = 1.0 / (dim as f64).sqrt();
    KrausFactor {
        coefficients: (0..dim)
            .map(|_| AlgebraElement::random(target, r).scale_real(scale))
            .collect(),
        core: AlgebraElement::random_psd(target, r),
    }
}

/// Random Kraus-form map with `rank` factors and Gaussian coefficients.
pub fn random_map(profile: &MapProfile) -> Result<SesquilinearMap> {
    random_map_of_kind(profile, MapKind::Kraus)
}

pub fn random_map_of_kind(profile: &MapProfile, kind: MapKind) -> Result<SesquilinearMap> {
    if profile.rank == 0 || profile.dim == 0 {
        return Err(Error::Domain("rank and dimension must be positive".into()));
    }
    let mut r = rng::labelled(profile.seed, "random_map", 0);
    let target = &profile.target;
    let factors: Vec<KrausFactor> = (0..profile.rank)
        .map(|_| random_factor(target, profile.dim, &mut r))
        .collect();
    let kraus = SesquilinearMap::from_generator(target, factors)?;
    match kind {
        MapKind::Kraus => Ok(kraus),
        MapKind::Mixed => {
            let flipped: Vec<KrausFactor> = (0..profile.rank)
                .map(|_| random_factor(target, profile.dim, &mut r))
                .collect();
            let map = SesquilinearMap::from_fn(target, profile.dim, |i, j| {
                let tail = flipped.iter().fold(AlgebraElement::zeros(target), |acc, f| {
                    &acc + &(&(&f.coefficients[j].adjoint() * &f.core) * &f.coefficients[i])
                });
                kraus.gram_entry(i, j) + &tail
            })?;
            Ok(map.with_label("mixed"))
        }
    }
}

/// Linear map `ω: 𝔄 → L^p(ρ)` on a [`StarAlgebra`], given by its values on
/// the basis.
#[derive(Clone, Debug)]
pub struct LinearMap {
    domain: Arc<StarAlgebra>,
    target: Arc<TracedAlgebra>,
    values: Vec<AlgebraElement>,
}

impl LinearMap {
    pub fn new(
        domain: &Arc<StarAlgebra>,
        target: &Arc<TracedAlgebra>,
        values: Vec<AlgebraElement>,
    ) -> Result<Self> {
        if values.len() != domain.dim() {
            return Err(Error::Structural(format!(
                "{} basis values for an algebra of dimension {}",
                values.len(),
                domain.dim()
            )));
        }
        for v in &values {
            v.ensure_in(target)?;
        }
        Ok(Self {
            domain: Arc::clone(domain),
            target: Arc::clone(target),
            values,
        })
    }

    /// Scalar functional `a ↦ Σ_i c_i a_i` viewed as a map into `M_1`.
    pub fn functional(domain: &Arc<StarAlgebra>, coefficients: &[Complex64]) -> Result<Self> {
        let target = TracedAlgebra::full(1);
        let values = coefficients
            .iter()
            .map(|c| AlgebraElement::identity(&target).scale(*c))
            .collect();
        Self::new(domain, &target, values)
    }

    /// `a ↦ Tr(π(a))` for the attached faithful representation.
    pub fn trace(domain: &Arc<StarAlgebra>) -> Result<Self> {
        let coeffs = (0..domain.dim())
            .map(|i| domain.rep_trace(&domain.basis(i)))
            .collect::<Result<Vec<_>>>()?;
        Self::functional(domain, &coeffs)
    }

    /// Positive map `a ↦ Σ_r B_r π(a) B_r^*` through the faithful
    /// representation, with `B_r` random `n × N` matrices.
    pub fn random_positive(
        domain: &Arc<StarAlgebra>,
        target: &Arc<TracedAlgebra>,
        rank: usize,
        rng: &mut rng::StreamRng,
    ) -> Result<Self> {
        let rep = domain.representation().ok_or_else(|| {
            Error::Precondition(format!("algebra {} has no representation", domain.name()))
        })?;
        let big = rep[0].nrows();
        let factors: Vec<Vec<CMat>> = (0..rank.max(1))
            .map(|_| {
                target
                    .block_sizes()
                    .iter()
                    .map(|&n| rng::ginibre(rng, n, big))
                    .collect()
            })
            .collect();
        let values = rep
            .iter()
            .map(|pi| {
                let blocks = (0..target.num_blocks())
                    .map(|k| {
                        factors.iter().fold(CMat::zeros(target.block_sizes()[k], target.block_sizes()[k]), |acc, f| {
                            acc + &f[k] * pi * f[k].adjoint()
                        })
                    })
                    .collect();
                AlgebraElement::new(target, blocks)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(domain, target, values)
    }

    pub fn domain(&self) -> &Arc<StarAlgebra> {
        &self.domain
    }

    pub fn target(&self) -> &Arc<TracedAlgebra> {
        &self.target
    }

    pub fn values(&self) -> &[AlgebraElement] {
        &self.values
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v.scale_real(c)).collect(),
            ..self.clone()
        }
    }

    pub fn apply(&self, a: &[Complex64]) -> AlgebraElement {
        self.values
            .iter()
            .zip(a)
            .fold(AlgebraElement::zeros(&self.target), |acc, (v, c)| &acc + &v.scale(*c))
    }

    /// `Φ_ω(x, y) = ω(y^* x)`, with the domain attached.
    pub fn induced_map(&self) -> SesquilinearMap {
        let alg = &self.domain;
        let map = SesquilinearMap::from_fn(&self.target, alg.dim(), |i, j| {
            self.apply(&alg.mul_coords(&alg.star_coords(&alg.basis(j)), &alg.basis(i)))
        })
        .and_then(|m| m.with_domain(alg))
        .expect("induced map shapes follow the domain");
        map.with_label("induced")
    }
}
