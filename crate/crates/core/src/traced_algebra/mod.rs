//! Finite traced matrix algebras.
//!
//! A [`TracedAlgebra`] is a direct sum `M_{n_1} ⊕ ... ⊕ M_{n_K}` carrying the
//! faithful finite trace `ρ(X) = Σ_k w_k Tr(X_k)`. Its elements are stored as
//! lists of dense complex blocks ([`AlgebraElement`]). With a finite trace
//! every `L^p(ρ)` is the algebra itself, normed by `‖X‖_p = ρ(|X|^p)^{1/p}`.

mod ops;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, ONE, ZERO};
use crate::rng;

pub use ops::*;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracedAlgebra {
    block_sizes: Vec<usize>,
    weights: Vec<f64>,
}

impl TracedAlgebra {
    pub fn new(block_sizes: Vec<usize>, weights: Vec<f64>) -> Result<Arc<Self>> {
        if block_sizes.is_empty() {
            return Err(Error::Structural("algebra needs at least one block".into()));
        }
        if block_sizes.len() != weights.len() {
            return Err(Error::Structural(format!(
                "{} blocks but {} weights",
                block_sizes.len(),
                weights.len()
            )));
        }
        if let Some(k) = block_sizes.iter().position(|&n| n == 0) {
            return Err(Error::Structural(format!("block {k} has size 0")));
        }
        if let Some(k) = weights.iter().position(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::Domain(format!(
                "trace weight {} of block {k} is not strictly positive and finite",
                weights[k]
            )));
        }
        Ok(Arc::new(Self {
            block_sizes,
            weights,
        }))
    }

    /// `M_n` with the standard trace.
    pub fn full(n: usize) -> Arc<Self> {
        Self::new(vec![n], vec![1.0]).expect("n >= 1")
    }

    /// The commutative algebra `C^n` with unit weights.
    pub fn diagonal(n: usize) -> Arc<Self> {
        Self::new(vec![1; n], vec![1.0; n]).expect("n >= 1")
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn num_blocks(&self) -> usize {
        self.block_sizes.len()
    }

    /// Size of the block-diagonal matrices realising the algebra.
    pub fn total_dim(&self) -> usize {
        self.block_sizes.iter().sum()
    }

    /// Number of complex coordinates (matrix units) of an element.
    pub fn coord_dim(&self) -> usize {
        self.block_sizes.iter().map(|n| n * n).sum()
    }

    pub fn trace_of_identity(&self) -> f64 {
        self.block_sizes
            .iter()
            .zip(&self.weights)
            .map(|(&n, &w)| n as f64 * w)
            .sum()
    }

    pub fn is_commutative(&self) -> bool {
        self.block_sizes.iter().all(|&n| n == 1)
    }

    /// Matrix-unit basis index -> (block, row, col), block-major and row-major
    /// inside each block.
    pub fn unit_position(&self, index: usize) -> (usize, usize, usize) {
        let mut rest = index;
        for (k, &n) in self.block_sizes.iter().enumerate() {
            if rest < n * n {
                return (k, rest / n, rest % n);
            }
            rest -= n * n;
        }
        panic!("matrix unit index {index} out of range");
    }
}

impl fmt::Display for TracedAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .block_sizes
            .iter()
            .zip(&self.weights)
            .map(|(n, w)| format!("{w}·M{n}"))
            .collect();
        write!(f, "{}", parts.join(" ⊕ "))
    }
}

/// Conjugate exponent pair `1/p + 1/q = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PExponent {
    Finite(f64),
    Infinity,
}

impl PExponent {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::Domain(format!("exponent p = {p} must satisfy p >= 1")));
        }
        Ok(if p.is_infinite() {
            PExponent::Infinity
        } else {
            PExponent::Finite(p)
        })
    }

    pub fn value(self) -> f64 {
        match self {
            PExponent::Finite(p) => p,
            PExponent::Infinity => f64::INFINITY,
        }
    }

    pub fn conjugate(self) -> Self {
        match self {
            PExponent::Infinity => PExponent::Finite(1.0),
            PExponent::Finite(1.0) => PExponent::Infinity,
            PExponent::Finite(p) => PExponent::Finite(p / (p - 1.0)),
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, PExponent::Finite(_))
    }
}

impl fmt::Display for PExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PExponent::Finite(p) => write!(f, "{p}"),
            PExponent::Infinity => write!(f, "inf"),
        }
    }
}

impl Serialize for PExponent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            PExponent::Finite(p) => s.serialize_f64(*p),
            PExponent::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for PExponent {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let p = match Raw::deserialize(d)? {
            Raw::Num(p) => p,
            Raw::Text(t) => t.parse::<f64>().map_err(serde::de::Error::custom)?,
        };
        PExponent::new(p).map_err(serde::de::Error::custom)
    }
}

impl std::str::FromStr for PExponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let p: f64 = match s.trim() {
            "inf" | "infinity" | "∞" => f64::INFINITY,
            t => t
                .parse()
                .map_err(|_| Error::Parse(format!("not an exponent: {t:?}")))?,
        };
        PExponent::new(p)
    }
}

/// Block-diagonal element of a [`TracedAlgebra`].
#[derive(Clone, Debug)]
pub struct AlgebraElement {
    algebra: Arc<TracedAlgebra>,
    blocks: Vec<CMat>,
}

impl AlgebraElement {
    pub fn new(algebra: &Arc<TracedAlgebra>, blocks: Vec<CMat>) -> Result<Self> {
        if blocks.len() != algebra.num_blocks() {
            return Err(Error::Structural(format!(
                "expected {} blocks, got {}",
                algebra.num_blocks(),
                blocks.len()
            )));
        }
        for (k, (b, &n)) in blocks.iter().zip(algebra.block_sizes()).enumerate() {
            if b.shape() != (n, n) {
                return Err(Error::Structural(format!(
                    "block {k} has shape {:?}, expected ({n}, {n})",
                    b.shape()
                )));
            }
        }
        Ok(Self {
            algebra: Arc::clone(algebra),
            blocks,
        })
    }

    pub fn zeros(algebra: &Arc<TracedAlgebra>) -> Self {
        Self::from_fn(algebra, |_, _, _| ZERO)
    }

    pub fn identity(algebra: &Arc<TracedAlgebra>) -> Self {
        Self::from_fn(algebra, |_, i, j| if i == j { ONE } else { ZERO })
    }

    /// Single-block convenience constructor from row-major complex entries.
    pub fn from_rows(algebra: &Arc<TracedAlgebra>, rows: &[Vec<Complex64>]) -> Result<Self> {
        if algebra.num_blocks() != 1 {
            return Err(Error::Structural("from_rows needs a one-block algebra".into()));
        }
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Structural("rows are not square".into()));
        }
        Self::new(algebra, vec![CMat::from_fn(n, n, |i, j| rows[i][j])])
    }

    /// Real-entry single-block convenience constructor.
    pub fn from_real_rows(algebra: &Arc<TracedAlgebra>, rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(algebra, &rows)
    }

    /// Diagonal element with the given diagonal read across all blocks in order.
    pub fn diag(algebra: &Arc<TracedAlgebra>, entries: &[f64]) -> Result<Self> {
        if entries.len() != algebra.total_dim() {
            return Err(Error::Structural(format!(
                "{} diagonal entries for total dimension {}",
                entries.len(),
                algebra.total_dim()
            )));
        }
        let mut offsets = Vec::with_capacity(algebra.num_blocks());
        let mut acc = 0;
        for &n in algebra.block_sizes() {
            offsets.push(acc);
            acc += n;
        }
        Ok(Self::from_fn(algebra, |k, i, j| {
            if i == j {
                Complex64::new(entries[offsets[k] + i], 0.0)
            } else {
                ZERO
            }
        }))
    }

    pub fn from_fn<F>(algebra: &Arc<TracedAlgebra>, mut f: F) -> Self
    where
        F: FnMut(usize, usize, usize) -> Complex64,
    {
        let blocks = algebra
            .block_sizes()
            .iter()
            .enumerate()
            .map(|(k, &n)| CMat::from_fn(n, n, |i, j| f(k, i, j)))
            .collect();
        Self {
            algebra: Arc::clone(algebra),
            blocks,
        }
    }

    /// Element from matrix-unit coordinates (see [`TracedAlgebra::unit_position`]).
    pub fn from_coords(algebra: &Arc<TracedAlgebra>, coords: &[Complex64]) -> Result<Self> {
        if coords.len() != algebra.coord_dim() {
            return Err(Error::Structural(format!(
                "{} coordinates for an algebra of dimension {}",
                coords.len(),
                algebra.coord_dim()
            )));
        }
        let mut it = coords.iter();
        let blocks = algebra
            .block_sizes()
            .iter()
            .map(|&n| {
                let mut b = CMat::zeros(n, n);
                for i in 0..n {
                    for j in 0..n {
                        b[(i, j)] = *it.next().expect("length checked");
                    }
                }
                b
            })
            .collect();
        Ok(Self {
            algebra: Arc::clone(algebra),
            blocks,
        })
    }

    pub fn coords(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.algebra.coord_dim());
        for b in &self.blocks {
            for i in 0..b.nrows() {
                for j in 0..b.ncols() {
                    out.push(b[(i, j)]);
                }
            }
        }
        out
    }

    /// Matrix unit `index` of the algebra.
    pub fn unit(algebra: &Arc<TracedAlgebra>, index: usize) -> Self {
        let (bk, bi, bj) = algebra.unit_position(index);
        Self::from_fn(algebra, |k, i, j| {
            if (k, i, j) == (bk, bi, bj) {
                ONE
            } else {
                ZERO
            }
        })
    }

    /// Block-wise complex Ginibre element.
    pub fn random<R: Rng + ?Sized>(algebra: &Arc<TracedAlgebra>, rng: &mut R) -> Self {
        Self::from_fn(algebra, |_, _, _| rng::complex_gaussian(rng))
    }

    pub fn random_hermitian<R: Rng + ?Sized>(algebra: &Arc<TracedAlgebra>, rng: &mut R) -> Self {
        Self::random(algebra, rng).hermitian_part()
    }

    /// Random PSD element `g g^*`.
    pub fn random_psd<R: Rng + ?Sized>(algebra: &Arc<TracedAlgebra>, rng: &mut R) -> Self {
        let g = Self::random(algebra, rng);
        &g * &g.adjoint()
    }

    pub fn algebra(&self) -> &Arc<TracedAlgebra> {
        &self.algebra
    }

    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    pub fn block(&self, k: usize) -> &CMat {
        &self.blocks[k]
    }

    pub fn into_blocks(self) -> Vec<CMat> {
        self.blocks
    }

    pub fn same_algebra(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.algebra, &other.algebra) || *self.algebra == *other.algebra
    }

    pub fn ensure_same_algebra(&self, other: &Self) -> Result<()> {
        if self.same_algebra(other) {
            Ok(())
        } else {
            Err(Error::Structural(format!(
                "elements live in different algebras ({} vs {})",
                self.algebra, other.algebra
            )))
        }
    }

    pub fn ensure_in(&self, algebra: &TracedAlgebra) -> Result<()> {
        if *self.algebra == *algebra {
            Ok(())
        } else {
            Err(Error::Structural(format!(
                "element of {} used with algebra {}",
                self.algebra, algebra
            )))
        }
    }

    /// Block-wise map preserving the algebra.
    pub fn map_blocks<F: FnMut(&CMat) -> CMat>(&self, f: F) -> Self {
        Self {
            algebra: Arc::clone(&self.algebra),
            blocks: self.blocks.iter().map(f).collect(),
        }
    }

    pub fn zip_blocks<F: FnMut(&CMat, &CMat) -> CMat>(&self, other: &Self, mut f: F) -> Self {
        assert!(
            self.same_algebra(other),
            "elements live in different algebras ({} vs {})",
            self.algebra,
            other.algebra
        );
        Self {
            algebra: Arc::clone(&self.algebra),
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        self.map_blocks(|b| b.adjoint())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map_blocks(|b| b * c)
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.map_blocks(|b| b.scale(c))
    }

    pub fn hermitian_part(&self) -> Self {
        self.map_blocks(linalg::hermitian_part)
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks.iter().map(linalg::max_abs).fold(0.0, f64::max)
    }

    /// `1e-10·(1 + max|entry|)`, the tolerance for structural predicates.
    pub fn structure_tol(&self) -> f64 {
        1e-10 * (1.0 + self.max_abs())
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn distance(&self, other: &Self) -> f64 {
        (self - other).max_abs()
    }

    /// Hilbert–Schmidt distance `‖self − other‖₂` in the weighted trace.
    pub fn distance_2(&self, other: &Self) -> f64 {
        schatten_norm(&(self - other), PExponent::Finite(2.0))
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.max_abs() <= tol
    }

    pub fn is_hermitian(&self) -> bool {
        self.distance(&self.adjoint()) <= self.structure_tol()
    }

    pub fn is_normal(&self) -> bool {
        self.normality_residual() <= self.structure_tol() * (1.0 + self.max_abs())
    }

    /// `‖X X^* − X^* X‖_∞`.
    pub fn normality_residual(&self) -> f64 {
        let xa = self.adjoint();
        let comm = &(self * &xa) - &(&xa * self);
        schatten_norm(&comm, PExponent::Infinity)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| linalg::hermitian_eigenvalues(b)[0])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| *linalg::hermitian_eigenvalues(b).last().expect("nonempty block"))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// PSD acceptance tolerance `1e-9·(1 + ‖X‖_∞)`.
    pub fn psd_tol(&self) -> f64 {
        1e-9 * (1.0 + schatten_norm(self, PExponent::Infinity))
    }

    pub fn is_psd(&self) -> bool {
        self.is_hermitian() && self.min_eigenvalue() >= -self.psd_tol()
    }

    pub fn is_projection(&self) -> bool {
        self.is_hermitian() && self.distance(&(self * self)) <= self.structure_tol()
    }

    pub fn is_unitary(&self) -> bool {
        let id = Self::identity(&self.algebra);
        (&(self.adjoint() * self.clone()) - &id).max_abs() <= self.structure_tol()
            && (&(self * &self.adjoint()) - &id).max_abs() <= self.structure_tol()
    }

    /// `Z^*Z` is a projection.
    pub fn is_partial_isometry(&self) -> bool {
        (&self.adjoint() * self).is_projection()
    }

    /// Block-diagonal dense matrix of size `total_dim`.
    pub fn to_dense(&self) -> CMat {
        let n = self.algebra.total_dim();
        let mut out = CMat::zeros(n, n);
        let mut off = 0;
        for b in &self.blocks {
            let m = b.nrows();
            out.view_mut((off, off), (m, m)).copy_from(b);
            off += m;
        }
        out
    }

    /// Inverse of [`to_dense`](Self::to_dense); off-block entries are dropped
    /// (the trace-preserving conditional expectation onto the block diagonal).
    pub fn from_dense_compressed(algebra: &Arc<TracedAlgebra>, m: &CMat) -> Result<Self> {
        let n = algebra.total_dim();
        if m.shape() != (n, n) {
            return Err(Error::Structural(format!(
                "dense matrix {:?} does not match total dimension {n}",
                m.shape()
            )));
        }
        let mut blocks = Vec::with_capacity(algebra.num_blocks());
        let mut off = 0;
        for &b in algebra.block_sizes() {
            blocks.push(m.view((off, off), (b, b)).into_owned());
            off += b;
        }
        Self::new(algebra, blocks)
    }
}

impl PartialEq for AlgebraElement {
    fn eq(&self, other: &Self) -> bool {
        self.same_algebra(other) && self.blocks == other.blocks
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $f:expr) => {
        impl $tr<&AlgebraElement> for &AlgebraElement {
            type Output = AlgebraElement;
            fn $method(self, rhs: &AlgebraElement) -> AlgebraElement {
                self.zip_blocks(rhs, $f)
            }
        }
        impl $tr<AlgebraElement> for AlgebraElement {
            type Output = AlgebraElement;
            fn $method(self, rhs: AlgebraElement) -> AlgebraElement {
                (&self).$method(&rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| a + b);
binop!(Sub, sub, |a, b| a - b);
binop!(Mul, mul, |a, b| a * b);

impl Neg for &AlgebraElement {
    type Output = AlgebraElement;
    fn neg(self) -> AlgebraElement {
        self.map_blocks(|b| -b)
    }
}

#[cfg(test)]
mod tests;
