//! Dense complex matrix helpers shared by every module.
//!
//! Hermitian eigensolves and SVDs are delegated to `nalgebra`; everything
//! spectral in this crate (functional calculus, polar parts, Schatten norms)
//! is built on the two functions here.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::rng;

pub type CMat = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Eigenvalues (ascending) and matching orthonormal eigenvectors (columns) of
/// the hermitian part of `m`.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let h = hermitian_part(m);
    let eig = nalgebra::SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    hermitian_eigen(m).0
}

/// Largest eigenvalue of the hermitian part with a unit eigenvector.
pub fn top_eigenpair(m: &CMat) -> (f64, Vec<Complex64>) {
    let (vals, vecs) = hermitian_eigen(m);
    let last = vals.len() - 1;
    (vals[last], vecs.column(last).iter().copied().collect())
}

/// Thin SVD `m = u * diag(s) * v^*` with singular values descending.
pub struct Svd {
    pub u: CMat,
    pub s: Vec<f64>,
    pub v: CMat,
}

pub fn svd(m: &CMat) -> Svd {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return Svd {
            u: CMat::zeros(r, 0),
            s: Vec::new(),
            v: CMat::zeros(c, 0),
        };
    }
    let dec = m.clone().svd(true, true);
    let u = dec.u.expect("u requested");
    let v_t = dec.v_t.expect("v_t requested");
    let k = dec.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| dec.singular_values[b].total_cmp(&dec.singular_values[a]));
    let s = order.iter().map(|&i| dec.singular_values[i]).collect();
    let u = CMat::from_fn(r, k, |i, j| u[(i, order[j])]);
    let v = CMat::from_fn(c, k, |i, j| v_t[(order[j], i)].conj());
    Svd { u, s, v }
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// `(m - m^*) / 2i`
pub fn skew_part(m: &CMat) -> CMat {
    (m - m.adjoint()) * Complex64::new(0.0, -0.5)
}

/// `q diag(f(lambda)) q^*` for the hermitian part of `m`.
pub fn spectral_map<F>(m: &CMat, mut f: F) -> CMat
where
    F: FnMut(f64) -> Complex64,
{
    let (vals, q) = hermitian_eigen(m);
    reassemble(&q, vals.into_iter().map(&mut f))
}

/// `q diag(d) q^*`
pub fn reassemble<It: IntoIterator<Item = Complex64>>(q: &CMat, d: It) -> CMat {
    let mut scaled = q.clone();
    for (j, dj) in d.into_iter().enumerate() {
        for i in 0..scaled.nrows() {
            scaled[(i, j)] *= dj;
        }
    }
    scaled * q.adjoint()
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn operator_norm(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn trace(m: &CMat) -> Complex64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).sum()
}

pub fn outer(x: &[Complex64], y: &[Complex64]) -> CMat {
    CMat::from_fn(x.len(), y.len(), |i, j| x[i] * y[j].conj())
}

/// `<m h, h>` for a column vector `h`.
pub fn quadratic_form(m: &CMat, h: &[Complex64]) -> Complex64 {
    let mut acc = ZERO;
    for i in 0..m.nrows() {
        let mut row = ZERO;
        for j in 0..m.ncols() {
            row += m[(i, j)] * h[j];
        }
        acc += h[i].conj() * row;
    }
    acc
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    hermitian_part(&rng::ginibre(rng, n, n))
}

/// Haar unitary from the QR factorization of a Ginibre matrix with the
/// phases of `r`'s diagonal divided out.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    let g = rng::ginibre(rng, n, n);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// `exp(i h)` for hermitian `h`.
pub fn unitary_exp(h: &CMat) -> CMat {
    spectral_map(h, |t| Complex64::new(t.cos(), t.sin()))
}

/// Random PSD matrix `g g^*` with `g` an `n x rank` Ginibre matrix.
pub fn random_psd<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> CMat {
    let g = rng::ginibre(rng, n, rank.max(1));
    &g * g.adjoint()
}

/// Maximiser of `|tr(gamma u)|` over the operator-norm unit ball: `u = v w^*`
/// where `gamma = w s v^*`. Returns the unitary and the attained value, the
/// trace norm of `gamma`.
pub fn trace_dual_unitary(gamma: &CMat) -> (CMat, f64) {
    let n = gamma.nrows();
    if n == 0 {
        return (CMat::zeros(0, 0), 0.0);
    }
    let dec = svd(gamma);
    let value = dec.s.iter().sum();
    (&dec.v * dec.u.adjoint(), value)
}

/// Minimiser of a unimodal `f` on `[a, b]` by golden-section search, to an
/// interval width of `tol`. Returns `(x, f(x))`.
pub fn golden_section_min<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
