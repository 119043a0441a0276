//! Finite unital *-algebras described by structure constants.
//!
//! These are the domains of left-invariant maps and GNS constructions. In
//! finite dimension the quasi *-algebra pair collapses to a single algebra,
//! so only one multiplication is stored.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, ONE, ZERO};
use crate::traced_algebra::TracedAlgebra;

/// Builtin algebra families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "size")]
pub enum Builtin {
    /// `M_k` with the matrix-unit basis `e_ij`, row-major.
    MatrixAlgebra(usize),
    /// Group algebra of `Z_n` with basis `1, g, ..., g^{n-1}`.
    CyclicGroupAlgebra(usize),
}

#[derive(Clone, Debug)]
pub struct StarAlgebra {
    name: String,
    dim: usize,
    /// `mult[(i * dim + j) * dim + k]` is the coefficient of `e_k` in `e_i e_j`.
    mult: Vec<Complex64>,
    /// Column `i` holds the coordinates of `e_i^*`.
    invol: CMat,
    unit: Vec<Complex64>,
    /// Optional faithful *-representation, one matrix per basis element.
    rep: Option<Vec<CMat>>,
}

/// Largest violation of each *-algebra axiom over basis elements.
#[derive(Clone, Debug, Serialize)]
pub struct AxiomReport {
    pub associativity: f64,
    pub anti_multiplicative: f64,
    pub involutive: f64,
    pub unit: f64,
}

impl AxiomReport {
    pub fn max(&self) -> f64 {
        self.associativity
            .max(self.anti_multiplicative)
            .max(self.involutive)
            .max(self.unit)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max() <= tol
    }
}

impl StarAlgebra {
    /// Validates the axioms to `1e-12` before accepting the data.
    pub fn from_structure(
        name: impl Into<String>,
        dim: usize,
        mult: Vec<Complex64>,
        invol: CMat,
        unit: Vec<Complex64>,
    ) -> Result<Arc<Self>> {
        if dim == 0 {
            return Err(Error::Structural("algebra dimension must be positive".into()));
        }
        if mult.len() != dim * dim * dim {
            return Err(Error::Structural(format!(
                "structure tensor has {} entries, expected {}",
                mult.len(),
                dim * dim * dim
            )));
        }
        if invol.shape() != (dim, dim) || unit.len() != dim {
            return Err(Error::Structural(
                "involution or unit has the wrong dimension".into(),
            ));
        }
        let alg = Self {
            name: name.into(),
            dim,
            mult,
            invol,
            unit,
            rep: None,
        };
        let report = alg.check_axioms();
        if !report.passes(1e-12) {
            return Err(Error::Precondition(format!(
                "structure constants violate the *-algebra axioms: {report:?}"
            )));
        }
        Ok(Arc::new(alg))
    }

    pub fn builtin(kind: Builtin) -> Result<Arc<Self>> {
        match kind {
            Builtin::MatrixAlgebra(k) if k >= 1 => Ok(Self::matrix_algebra(k)),
            Builtin::CyclicGroupAlgebra(n) if n >= 1 => Ok(Self::cyclic_group_algebra(n)),
            other => Err(Error::Domain(format!("{other:?} needs a positive size"))),
        }
    }

    pub fn matrix_algebra(k: usize) -> Arc<Self> {
        let alg = Self::from_traced(&TracedAlgebra::full(k));
        Arc::new(Self {
            name: format!("M{k}"),
            ..(*alg).clone()
        })
    }

    /// The block algebra underlying a traced algebra, in matrix-unit
    /// coordinates (same ordering as [`crate::AlgebraElement::coords`]).
    pub fn from_traced(algebra: &TracedAlgebra) -> Arc<Self> {
        let dim = algebra.coord_dim();
        let pos: Vec<(usize, usize, usize)> = (0..dim).map(|i| algebra.unit_position(i)).collect();
        let index_of = |k: usize, i: usize, j: usize| {
            pos.iter()
                .position(|&p| p == (k, i, j))
                .expect("matrix unit exists")
        };
        let mut mult = vec![ZERO; dim * dim * dim];
        for (a, &(ka, ia, ja)) in pos.iter().enumerate() {
            for (b, &(kb, ib, jb)) in pos.iter().enumerate() {
                if ka == kb && ja == ib {
                    mult[(a * dim + b) * dim + index_of(ka, ia, jb)] = ONE;
                }
            }
        }
        let mut invol = CMat::zeros(dim, dim);
        let mut unit = vec![ZERO; dim];
        for (a, &(k, i, j)) in pos.iter().enumerate() {
            invol[(index_of(k, j, i), a)] = ONE;
            if i == j {
                unit[a] = ONE;
            }
        }
        let n = algebra.total_dim();
        let mut offsets = Vec::new();
        let mut acc = 0;
        for &s in algebra.block_sizes() {
            offsets.push(acc);
            acc += s;
        }
        let rep = pos
            .iter()
            .map(|&(k, i, j)| {
                let mut m = CMat::zeros(n, n);
                m[(offsets[k] + i, offsets[k] + j)] = ONE;
                m
            })
            .collect();
        Arc::new(Self {
            name: format!("{algebra}"),
            dim,
            mult,
            invol,
            unit,
            rep: Some(rep),
        })
    }

    pub fn cyclic_group_algebra(n: usize) -> Arc<Self> {
        let mut mult = vec![ZERO; n * n * n];
        let mut invol = CMat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                mult[(i * n + j) * n + (i + j) % n] = ONE;
            }
            invol[((n - i) % n, i)] = ONE;
        }
        let mut unit = vec![ZERO; n];
        unit[0] = ONE;
        // characters g -> ζ^m, m = 0..n-1, stacked diagonally
        let rep = (0..n)
            .map(|j| {
                CMat::from_fn(n, n, |r, c| {
                    if r == c {
                        let t = 2.0 * std::f64::consts::PI * (j * r) as f64 / n as f64;
                        Complex64::new(t.cos(), t.sin())
                    } else {
                        ZERO
                    }
                })
            })
            .collect();
        Arc::new(Self {
            name: format!("C[Z{n}]"),
            dim: n,
            mult,
            invol,
            unit,
            rep: Some(rep),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn unit(&self) -> &[Complex64] {
        &self.unit
    }

    pub fn basis(&self, i: usize) -> Vec<Complex64> {
        let mut v = vec![ZERO; self.dim];
        v[i] = ONE;
        v
    }

    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> Complex64 {
        self.mult[(i * self.dim + j) * self.dim + k]
    }

    pub fn involution_matrix(&self) -> &CMat {
        &self.invol
    }

    pub fn representation(&self) -> Option<&[CMat]> {
        self.rep.as_deref()
    }

    /// Attaches a faithful *-representation (one matrix per basis element).
    /// The representation is checked for multiplicativity and adjointness.
    pub fn with_representation(&self, rep: Vec<CMat>) -> Result<Arc<Self>> {
        if rep.len() != self.dim {
            return Err(Error::Structural("one matrix per basis element needed".into()));
        }
        let mut alg = self.clone();
        alg.rep = Some(rep);
        let tol = 1e-10;
        for i in 0..self.dim {
            let star = alg.represent(&self.star_coords(&self.basis(i)));
            let adj = alg.represent(&self.basis(i)).adjoint();
            if linalg::max_abs(&(star - adj)) > tol {
                return Err(Error::Precondition("representation is not *-preserving".into()));
            }
            for j in 0..self.dim {
                let prod = alg.represent(&self.mul_coords(&self.basis(i), &self.basis(j)));
                let comp = alg.represent(&self.basis(i)) * alg.represent(&self.basis(j));
                if linalg::max_abs(&(prod - comp)) > tol {
                    return Err(Error::Precondition("representation is not multiplicative".into()));
                }
            }
        }
        Ok(Arc::new(alg))
    }

    /// Image of `a` under the attached representation (panics if none).
    pub fn represent(&self, a: &[Complex64]) -> CMat {
        let rep = self.rep.as_ref().expect("algebra has no representation");
        let n = rep[0].nrows();
        let mut out = CMat::zeros(n, n);
        for (c, m) in a.iter().zip(rep) {
            if *c != ZERO {
                out += m * *c;
            }
        }
        out
    }

    /// The trace `a ↦ Tr(π(a))` of the attached faithful representation.
    pub fn rep_trace(&self, a: &[Complex64]) -> Result<Complex64> {
        match &self.rep {
            Some(_) => Ok(linalg::trace(&self.represent(a))),
            None => Err(Error::Precondition(format!(
                "algebra {} has no representation, so no canonical trace",
                self.name
            ))),
        }
    }

    pub fn mul_coords(&self, a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
        let d = self.dim;
        let mut out = vec![ZERO; d];
        for (i, &ai) in a.iter().enumerate() {
            if ai == ZERO {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                if bj == ZERO {
                    continue;
                }
                let c = ai * bj;
                let base = (i * d + j) * d;
                for (k, o) in out.iter_mut().enumerate() {
                    let s = self.mult[base + k];
                    if s != ZERO {
                        *o += c * s;
                    }
                }
            }
        }
        out
    }

    pub fn star_coords(&self, a: &[Complex64]) -> Vec<Complex64> {
        let d = self.dim;
        let mut out = vec![ZERO; d];
        for (i, &ai) in a.iter().enumerate() {
            if ai == ZERO {
                continue;
            }
            for (k, o) in out.iter_mut().enumerate() {
                *o += ai.conj() * self.invol[(k, i)];
            }
        }
        out
    }

    pub fn check_axioms(&self) -> AxiomReport {
        let d = self.dim;
        let dist = |x: &[Complex64], y: &[Complex64]| {
            x.iter().zip(y).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
        };
        let mut report = AxiomReport {
            associativity: 0.0,
            anti_multiplicative: 0.0,
            involutive: 0.0,
            unit: 0.0,
        };
        for i in 0..d {
            let ei = self.basis(i);
            let si = self.star_coords(&ei);
            report.involutive = report.involutive.max(dist(&self.star_coords(&si), &ei));
            report.unit = report
                .unit
                .max(dist(&self.mul_coords(&self.unit, &ei), &ei))
                .max(dist(&self.mul_coords(&ei, &self.unit), &ei));
            for j in 0..d {
                let ej = self.basis(j);
                let ij = self.mul_coords(&ei, &ej);
                let lhs = self.star_coords(&ij);
                let rhs = self.mul_coords(&self.star_coords(&ej), &si);
                report.anti_multiplicative = report.anti_multiplicative.max(dist(&lhs, &rhs));
                for k in 0..d {
                    let ek = self.basis(k);
                    let l = self.mul_coords(&ij, &ek);
                    let r = self.mul_coords(&ei, &self.mul_coords(&ej, &ek));
                    report.associativity = report.associativity.max(dist(&l, &r));
                }
            }
        }
        report
    }

    pub fn is_commutative(&self) -> bool {
        let d = self.dim;
        (0..d).all(|i| {
            (0..d).all(|j| {
                (0..d).all(|k| {
                    (self.structure_constant(i, j, k) - self.structure_constant(j, i, k)).norm()
                        <= 1e-12
                })
            })
        })
    }
}

/// Element of a [`StarAlgebra`] in basis coordinates.
#[derive(Clone, Debug)]
pub struct AlgebraVector {
    algebra: Arc<StarAlgebra>,
    coords: Vec<Complex64>,
}

impl AlgebraVector {
    pub fn new(algebra: &Arc<StarAlgebra>, coords: Vec<Complex64>) -> Result<Self> {
        if coords.len() != algebra.dim() {
            return Err(Error::Structural(format!(
                "{} coordinates for an algebra of dimension {}",
                coords.len(),
                algebra.dim()
            )));
        }
        Ok(Self {
            algebra: Arc::clone(algebra),
            coords,
        })
    }

    pub fn basis(algebra: &Arc<StarAlgebra>, i: usize) -> Self {
        Self {
            algebra: Arc::clone(algebra),
            coords: algebra.basis(i),
        }
    }

    pub fn unit(algebra: &Arc<StarAlgebra>) -> Self {
        Self {
            algebra: Arc::clone(algebra),
            coords: algebra.unit().to_vec(),
        }
    }

    pub fn algebra(&self) -> &Arc<StarAlgebra> {
        &self.algebra
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    fn ensure_same(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.algebra, &other.algebra)
            || (self.algebra.dim == other.algebra.dim && self.algebra.mult == other.algebra.mult)
        {
            Ok(())
        } else {
            Err(Error::Structural(format!(
                "vectors from different algebras ({} vs {})",
                self.algebra.name, other.algebra.name
            )))
        }
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.ensure_same(other)?;
        Ok(Self {
            algebra: Arc::clone(&self.algebra),
            coords: self.algebra.mul_coords(&self.coords, &other.coords),
        })
    }

    pub fn involute(&self) -> Self {
        Self {
            algebra: Arc::clone(&self.algebra),
            coords: self.algebra.star_coords(&self.coords),
        }
    }

    pub fn linear_combination(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        self.ensure_same(other)?;
        Ok(Self {
            algebra: Arc::clone(&self.algebra),
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        })
    }

    /// Largest coordinate distance.
    pub fn distance(&self, other: &Self) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.distance(&self.involute()) <= tol
    }
}

/// Serialized form of a custom algebra: sparse structure constants.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StarAlgebraFile {
    pub name: String,
    pub dim: usize,
    /// `[i, j, k, re, im]`: coefficient of `e_k` in `e_i e_j`.
    pub mult: Vec<(usize, usize, usize, f64, f64)>,
    /// `[i, k, re, im]`: coefficient of `e_k` in `e_i^*`.
    pub invol: Vec<(usize, usize, f64, f64)>,
    pub unit: Vec<(f64, f64)>,
}

impl StarAlgebraFile {
    pub fn from_algebra(alg: &StarAlgebra) -> Self {
        let d = alg.dim;
        let mut mult = Vec::new();
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let c = alg.structure_constant(i, j, k);
                    if c != ZERO {
                        mult.push((i, j, k, c.re, c.im));
                    }
                }
            }
        }
        let mut invol = Vec::new();
        for i in 0..d {
            for k in 0..d {
                let c = alg.invol[(k, i)];
                if c != ZERO {
                    invol.push((i, k, c.re, c.im));
                }
            }
        }
        Self {
            name: alg.name.clone(),
            dim: d,
            mult,
            invol,
            unit: alg.unit.iter().map(|z| (z.re, z.im)).collect(),
        }
    }

    pub fn into_algebra(self) -> Result<Arc<StarAlgebra>> {
        let d = self.dim;
        let mut mult = vec![ZERO; d * d * d];
        for (i, j, k, re, im) in self.mult {
            if i >= d || j >= d || k >= d {
                return Err(Error::Structural(format!("index ({i}, {j}, {k}) out of range")));
            }
            mult[(i * d + j) * d + k] = Complex64::new(re, im);
        }
        let mut invol = CMat::zeros(d, d);
        for (i, k, re, im) in self.invol {
            if i >= d || k >= d {
                return Err(Error::Structural(format!("index ({i}, {k}) out of range")));
            }
            invol[(k, i)] = Complex64::new(re, im);
        }
        let unit = self.unit.into_iter().map(|(r, i)| Complex64::new(r, i)).collect();
        StarAlgebra::from_structure(self.name, d, mult, invol, unit)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn matrix_units_multiply() {
        let m2 = StarAlgebra::matrix_algebra(2);
        // basis e11, e12, e21, e22
        let e11 = AlgebraVector::basis(&m2, 0);
        let e12 = AlgebraVector::basis(&m2, 1);
        assert_eq!(e11.multiply(&e12).unwrap().coords(), e12.coords());
        assert_eq!(e12.involute().coords(), m2.basis(2).as_slice());
        assert_eq!(m2.dim(), 4);
        assert_eq!(m2.unit(), &[c(1.0), c(0.0), c(0.0), c(1.0)]);
    }

    #[test]
    fn unit_is_neutral_and_star_is_conjugate_linear() {
        let m2 = StarAlgebra::matrix_algebra(2);
        let a = AlgebraVector::new(
            &m2,
            vec![Complex64::new(1.0, 2.0), c(3.0), Complex64::new(0.0, -1.0), c(0.5)],
        )
        .unwrap();
        let e = AlgebraVector::unit(&m2);
        assert!(a.multiply(&e).unwrap().distance(&a) < 1e-15);
        let ie = AlgebraVector::new(&m2, e.coords().iter().map(|z| z * linalg::I).collect()).unwrap();
        let expect: Vec<Complex64> = e.coords().iter().map(|z| z * -linalg::I).collect();
        assert_eq!(ie.involute().coords(), expect.as_slice());
    }

    #[test]
    fn z2_idempotent_split() {
        let z2 = StarAlgebra::cyclic_group_algebra(2);
        let plus = AlgebraVector::new(&z2, vec![c(1.0), c(1.0)]).unwrap();
        let minus = AlgebraVector::new(&z2, vec![c(1.0), c(-1.0)]).unwrap();
        let prod = plus.multiply(&minus).unwrap();
        assert!(prod.coords().iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn builtins_satisfy_axioms() {
        for k in 1..=3 {
            let a = StarAlgebra::builtin(Builtin::MatrixAlgebra(k)).unwrap();
            assert!(a.check_axioms().passes(1e-12));
            assert_eq!(a.is_commutative(), k == 1);
        }
        for n in 1..=6 {
            let a = StarAlgebra::builtin(Builtin::CyclicGroupAlgebra(n)).unwrap();
            assert!(a.check_axioms().passes(1e-12));
            assert!(a.is_commutative());
        }
        assert!(StarAlgebra::builtin(Builtin::MatrixAlgebra(0)).is_err());
    }

    #[test]
    fn cyclic_involution_is_group_inverse() {
        let z4 = StarAlgebra::cyclic_group_algebra(4);
        let g = AlgebraVector::basis(&z4, 1);
        assert_eq!(g.involute().coords(), z4.basis(3).as_slice());
        assert_eq!(z4.dim(), 4);
        let z1 = StarAlgebra::cyclic_group_algebra(1);
        assert_eq!(z1.dim(), 1);
        assert!(z1.is_commutative());
    }

    #[test]
    fn representations_are_star_homomorphisms() {
        for alg in [StarAlgebra::matrix_algebra(3), StarAlgebra::cyclic_group_algebra(5)] {
            let rep = alg.representation().unwrap().to_vec();
            assert!(alg.with_representation(rep).is_ok());
        }
    }

    #[test]
    fn file_round_trip_preserves_structure() {
        let alg = StarAlgebra::cyclic_group_algebra(3);
        let text = serde_json::to_string(&StarAlgebraFile::from_algebra(&alg)).unwrap();
        let back: StarAlgebraFile = serde_json::from_str(&text).unwrap();
        let back = back.into_algebra().unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(
                    back.mul_coords(&back.basis(i), &back.basis(j)),
                    alg.mul_coords(&alg.basis(i), &alg.basis(j))
                );
            }
        }
    }

    #[test]
    fn broken_structure_is_rejected() {
        // e0 is declared the unit but e1 e0 = e0
        let mut mult = vec![ZERO; 8];
        mult[0] = ONE; // e0 e0 = e0
        mult[3] = ONE; // e0 e1 = e1
        mult[4] = ONE; // e1 e0 = e0
        let invol = CMat::identity(2, 2);
        let r = StarAlgebra::from_structure("bad", 2, mult, invol, vec![ONE, ZERO]);
        assert!(r.is_err());
    }
}
