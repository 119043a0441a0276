//! Kernel-driven maps on a traced algebra.
//!
//! Given a PSD `W` and a nonnegative kernel `k` on `[0, ‖W‖_∞]²`, set
//! `η_x(W) = k(x, W)` by functional calculus and
//!
//! * `φ(X, Y)(x) = ρ(X η_x(W) Y^*)`, a function on `[0, ‖W‖_∞]`;
//! * `Φ(X, Y)(S) = T g(W) T^*` with `g(x) = ρ(X η_x(W) S η_x(W) Y^*)`.
//!
//! Evaluating `φ(X, Y)` at `W` turns the first family into a
//! [`SesquilinearMap`] with values in the algebra; the second is an
//! [`OperatorValuedMap`] in generator form.

use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, ZERO};
use crate::radius_norms::{numerical_radius_element, triple_norm, Budget, OperatorValuedMap};
use crate::rng;
use crate::sesquilinear::{check_left_invariance, check_positivity, PositivityStatus, SesquilinearMap};
use crate::star_domain::StarAlgebra;
use crate::traced_algebra::{rho, schatten_norm, AlgebraElement, PExponent, TracedAlgebra};

/// Side of the grid on which kernels are checked for nonnegativity.
pub const KERNEL_CHECK_GRID: usize = 64;

/// Kernel sampled on a rectangular grid, bilinearly interpolated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridKernel {
    pub x: Vec<f64>,
    pub t: Vec<f64>,
    /// `values[i][j] = k(x_i, t_j)`.
    pub values: Vec<Vec<f64>>,
}

fn increasing(g: &[f64]) -> bool {
    !g.is_empty() && g.iter().all(|v| v.is_finite()) && g.windows(2).all(|w| w[0] < w[1])
}

/// Index `i` and weight `s` with `v = (1 − s) g[i] + s g[i+1]`, clamped.
fn locate(g: &[f64], v: f64) -> (usize, f64) {
    if g.len() == 1 || v <= g[0] {
        return (0, 0.0);
    }
    let last = g.len() - 1;
    if v >= g[last] {
        return (last - 1, 1.0);
    }
    let i = g.partition_point(|&a| a <= v) - 1;
    (i, (v - g[i]) / (g[i + 1] - g[i]))
}

impl GridKernel {
    fn validate(&self) -> Result<()> {
        if !increasing(&self.x) || !increasing(&self.t) {
            return Err(Error::Domain("kernel grids must be finite and strictly increasing".into()));
        }
        if self.values.len() != self.x.len() || self.values.iter().any(|r| r.len() != self.t.len()) {
            return Err(Error::Structural(format!(
                "kernel values must be {}x{}",
                self.x.len(),
                self.t.len()
            )));
        }
        if self.values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Domain("kernel values must be finite".into()));
        }
        Ok(())
    }

    fn eval(&self, x: f64, t: f64) -> f64 {
        let (i, s) = locate(&self.x, x);
        let (j, u) = locate(&self.t, t);
        let v = |a: usize, b: usize| {
            let a = a.min(self.x.len() - 1);
            let b = b.min(self.t.len() - 1);
            self.values[a][b]
        };
        (1.0 - s) * ((1.0 - u) * v(i, j) + u * v(i, j + 1)) + s * ((1.0 - u) * v(i + 1, j) + u * v(i + 1, j + 1))
    }

    fn covers(&self, m: f64) -> bool {
        let tol = 1e-12 * (1.0 + m);
        let ok = |g: &[f64]| g[0] <= tol && g[g.len() - 1] >= m - tol;
        ok(&self.x) && ok(&self.t)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Kernel {
    /// `k ≡ value`.
    Constant { value: f64 },
    /// `k(x, t) = a + b·x·t`.
    Affine { a: f64, b: f64 },
    /// `k(x, t) = exp(−rate·|x − t|)`.
    Exponential { rate: f64 },
    Grid(GridKernel),
}

impl Kernel {
    /// The kernel `1 + xt`.
    pub fn affine() -> Self {
        Kernel::Affine { a: 1.0, b: 1.0 }
    }

    pub fn eval(&self, x: f64, t: f64) -> f64 {
        match self {
            Kernel::Constant { value } => *value,
            Kernel::Affine { a, b } => a + b * x * t,
            Kernel::Exponential { rate } => (-rate * (x - t).abs()).exp(),
            Kernel::Grid(g) => g.eval(x, t),
        }
    }

    /// `sup |k|` over `[0, m]²`: closed form for builtins, the largest node
    /// value for grids (bilinear interpolation peaks at nodes).
    pub fn sup_norm(&self, m: f64) -> f64 {
        match self {
            Kernel::Constant { value } => value.abs(),
            Kernel::Affine { a, b } => a.abs() + b.abs() * m * m,
            Kernel::Exponential { .. } => 1.0,
            Kernel::Grid(g) => g.values.iter().flatten().fold(0.0, |acc, v| acc.max(v.abs())),
        }
    }

    /// Parameters are admissible and `k ≥ 0` on a grid over `[0, m]²`.
    pub fn validate(&self, m: f64) -> Result<()> {
        let bad = |what: &str| Err(Error::Domain(format!("kernel parameter {what} must be finite and nonnegative")));
        match self {
            Kernel::Constant { value } if !(value.is_finite() && *value >= 0.0) => return bad("value"),
            Kernel::Affine { a, b } if !(a.is_finite() && b.is_finite() && *a >= 0.0 && *b >= 0.0) => {
                return bad("a, b")
            }
            Kernel::Exponential { rate } if !(rate.is_finite() && *rate >= 0.0) => return bad("rate"),
            Kernel::Grid(g) => {
                g.validate()?;
                if !g.covers(m) {
                    return Err(Error::Domain(format!("kernel grid does not cover [0, {m}]")));
                }
            }
            _ => {}
        }
        let n = KERNEL_CHECK_GRID;
        let at = |i: usize| if n > 1 { m * i as f64 / (n - 1) as f64 } else { 0.0 };
        for i in 0..n {
            for j in 0..n {
                let v = self.eval(at(i), at(j));
                if !(v >= -1e-12) {
                    return Err(Error::Domain(format!("kernel is negative at ({}, {}): {v}", at(i), at(j))));
                }
            }
        }
        Ok(())
    }
}

impl FromStr for Kernel {
    type Err = Error;

    /// `constant[:c]`, `affine[:a,b]` or `exponential[:rate]`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, params) = s.split_once(':').unwrap_or((s, ""));
        let nums: Vec<f64> = if params.is_empty() {
            vec![]
        } else {
            params
                .split(',')
                .map(|v| v.trim().parse().map_err(|_| Error::Parse(format!("bad kernel parameter {v:?}"))))
                .collect::<Result<_>>()?
        };
        let arity = |n: usize| -> Result<()> {
            if nums.len() == n || nums.is_empty() {
                Ok(())
            } else {
                Err(Error::Parse(format!("kernel {name} takes {n} parameter(s)")))
            }
        };
        let get = |i: usize, d: f64| nums.get(i).copied().unwrap_or(d);
        match name.trim() {
            "constant" => arity(1).map(|_| Kernel::Constant { value: get(0, 1.0) }),
            "affine" => arity(2).map(|_| Kernel::Affine { a: get(0, 1.0), b: get(1, 1.0) }),
            "exponential" => arity(1).map(|_| Kernel::Exponential { rate: get(0, 1.0) }),
            other => Err(Error::Parse(format!("unknown kernel {other:?}"))),
        }
    }
}

/// Samples of a function on an increasing grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FunctionSample {
    pub grid: Vec<f64>,
    pub values: Vec<Complex64>,
}

#[derive(Clone, Debug)]
struct Eigenpair {
    block: usize,
    lambda: f64,
    /// Unit eigenvector inside its block.
    vector: Vec<Complex64>,
    /// Rank-one spectral projection `q q^*`.
    projection: AlgebraElement,
    /// `η_λ(W)`.
    eta: AlgebraElement,
}

#[derive(Clone, Debug)]
pub struct KernelMap {
    w: AlgebraElement,
    kernel: Kernel,
    t: AlgebraElement,
    radius: f64,
    eigen: Vec<Eigenpair>,
}

/// `Σ_m f(λ_m) P_m`.
fn spectral_sum<F: Fn(f64) -> f64>(alg: &Arc<TracedAlgebra>, pairs: &[Eigenpair], f: F) -> AlgebraElement {
    pairs
        .iter()
        .fold(AlgebraElement::zeros(alg), |acc, e| &acc + &e.projection.scale_real(f(e.lambda)))
}

impl KernelMap {
    /// `W` must be PSD and `T` in the same algebra.
    pub fn new(w: AlgebraElement, kernel: Kernel, t: AlgebraElement) -> Result<Self> {
        w.ensure_same_algebra(&t)?;
        if !w.is_psd() {
            return Err(Error::Domain("W must be positive semidefinite".into()));
        }
        let alg = Arc::clone(w.algebra());
        let mut eigen = Vec::new();
        for (k, b) in w.blocks().iter().enumerate() {
            let (vals, q) = linalg::hermitian_eigen(b);
            for (c, &l) in vals.iter().enumerate() {
                let vector: Vec<Complex64> = q.column(c).iter().copied().collect();
                let mut blocks: Vec<CMat> = alg.block_sizes().iter().map(|&n| CMat::zeros(n, n)).collect();
                blocks[k] = linalg::outer(&vector, &vector);
                let projection = AlgebraElement::new(&alg, blocks)?;
                let eta = AlgebraElement::zeros(&alg);
                eigen.push(Eigenpair { block: k, lambda: l.max(0.0), vector, projection, eta });
            }
        }
        let radius = eigen.iter().map(|e| e.lambda).fold(0.0, f64::max);
        kernel.validate(radius)?;
        let etas: Vec<AlgebraElement> = eigen
            .iter()
            .map(|e| spectral_sum(&alg, &eigen, |l| kernel.eval(e.lambda, l)))
            .collect();
        for (e, eta) in eigen.iter_mut().zip(etas) {
            e.eta = eta;
        }
        Ok(Self { w, kernel, t, radius, eigen })
    }

    pub fn algebra(&self) -> &Arc<TracedAlgebra> {
        self.w.algebra()
    }

    pub fn w(&self) -> &AlgebraElement {
        &self.w
    }

    pub fn t(&self) -> &AlgebraElement {
        &self.t
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    /// `‖W‖_∞`, the right end of the function domain.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eigen.iter().map(|e| e.lambda).collect()
    }

    /// `‖k‖_∞` on `[0, ‖W‖_∞]²`, never below the values at the eigenvalue
    /// abscissae.
    pub fn kernel_sup(&self) -> f64 {
        let mut s = self.kernel.sup_norm(self.radius);
        for a in &self.eigen {
            for b in &self.eigen {
                s = s.max(self.kernel.eval(a.lambda, b.lambda).abs());
            }
        }
        s
    }

    fn check_x(&self, x: f64) -> Result<()> {
        let tol = 1e-12 * (1.0 + self.radius);
        if !(x >= -tol && x <= self.radius + tol) {
            return Err(Error::Domain(format!("x = {x} outside [0, {}]", self.radius)));
        }
        Ok(())
    }

    /// `η_x(W) = k(x, W)`.
    pub fn eta(&self, x: f64) -> Result<AlgebraElement> {
        self.check_x(x)?;
        Ok(spectral_sum(self.algebra(), &self.eigen, |l| self.kernel.eval(x, l)))
    }

    fn check_shapes(&self, xs: &[&AlgebraElement]) -> Result<()> {
        xs.iter().try_for_each(|x| x.ensure_same_algebra(&self.w))
    }

    /// `φ(X, Y)(x) = ρ(X η_x(W) Y^*)`.
    pub fn phi_value(&self, x: &AlgebraElement, y: &AlgebraElement, at: f64) -> Result<Complex64> {
        self.check_shapes(&[x, y])?;
        Ok(rho(&(&(x * &self.eta(at)?) * &y.adjoint())))
    }

    pub fn phi_function(&self, x: &AlgebraElement, y: &AlgebraElement, grid: &[f64]) -> Result<FunctionSample> {
        if !increasing(grid) {
            return Err(Error::Domain("sample grid must be strictly increasing".into()));
        }
        let values = grid.iter().map(|&g| self.phi_value(x, y, g)).collect::<Result<_>>()?;
        Ok(FunctionSample { grid: grid.to_vec(), values })
    }

    /// `φ(X, Y)(W) = Σ_m φ(X, Y)(λ_m) q_m q_m^*`.
    pub fn phi_element(&self, x: &AlgebraElement, y: &AlgebraElement) -> Result<AlgebraElement> {
        self.check_shapes(&[x, y])?;
        let ys = y.adjoint();
        Ok(self.eigen.iter().fold(AlgebraElement::zeros(self.algebra()), |acc, e| {
            &acc + &e.projection.scale(rho(&(&(x * &e.eta) * &ys)))
        }))
    }

    /// `Φ(X, Y)(S) = T g(W) T^*`, `g(x) = ρ(X η_x(W) S η_x(W) Y^*)`.
    pub fn phi_operator(&self, x: &AlgebraElement, y: &AlgebraElement, s: &AlgebraElement) -> Result<AlgebraElement> {
        self.check_shapes(&[x, y, s])?;
        let ys = y.adjoint();
        let g = self.eigen.iter().fold(AlgebraElement::zeros(self.algebra()), |acc, e| {
            let v = rho(&(&(&(&(x * &e.eta) * s) * &e.eta) * &ys));
            &acc + &e.projection.scale(v)
        });
        Ok(&(&self.t * &g) * &self.t.adjoint())
    }

    /// `(X, Y) ↦ φ(X, Y)(W)` on matrix-unit coordinates, with the block
    /// algebra attached as domain.
    pub fn sesquilinear_map(&self) -> Result<SesquilinearMap> {
        let alg = self.algebra();
        let units: Vec<AlgebraElement> = (0..alg.coord_dim()).map(|i| AlgebraElement::unit(alg, i)).collect();
        let map = SesquilinearMap::from_fn(alg, units.len(), |i, j| {
            self.phi_element(&units[i], &units[j]).expect("units live in the algebra")
        })?;
        Ok(map.with_domain(&StarAlgebra::from_traced(alg))?.with_label("kernel"))
    }

    /// Generator form of `Φ`: factors `A_{m,a}(X) = √w_k T q_m e_a^* X η_m`
    /// over eigenpairs `m` and basis vectors `e_a` of block `k`.
    pub fn operator_valued_map(&self) -> Result<OperatorValuedMap> {
        let alg = self.algebra();
        let n = alg.total_dim();
        let t = self.t.to_dense();
        let offsets: Vec<usize> = alg
            .block_sizes()
            .iter()
            .scan(0, |acc, &b| {
                let o = *acc;
                *acc += b;
                Some(o)
            })
            .collect();
        let units: Vec<CMat> = (0..alg.coord_dim()).map(|i| AlgebraElement::unit(alg, i).to_dense()).collect();
        let mut factors = Vec::new();
        for e in &self.eigen {
            let mut q = nalgebra::DVector::from_element(n, ZERO);
            for (r, v) in e.vector.iter().enumerate() {
                q[offsets[e.block] + r] = *v;
            }
            let tq = &t * q;
            let eta = e.eta.to_dense();
            for (k, &size) in alg.block_sizes().iter().enumerate() {
                let sw = Complex64::new(alg.weights()[k].sqrt(), 0.0);
                for a in 0..size {
                    let mut left = CMat::zeros(n, n);
                    for r in 0..n {
                        left[(r, offsets[k] + a)] = tq[r] * sw;
                    }
                    factors.push(units.iter().map(|u| &left * u * &eta).collect());
                }
            }
        }
        Ok(OperatorValuedMap::from_generator(alg, alg, factors)?.with_label("kernel"))
    }

    /// Random sweep of the two norm bounds plus the invariance and
    /// positivity preconditions of the induced map.
    pub fn bound_checks(&self, trials: usize, seed: u64) -> Result<KernelBoundReport> {
        if trials == 0 {
            return Err(Error::Domain("bound checks need at least one trial".into()));
        }
        let alg = self.algebra();
        let ksup = self.kernel_sup();
        let t_inf = schatten_norm(&self.t, PExponent::Infinity);
        let t_4 = schatten_norm(&self.t, PExponent::Finite(4.0));
        let two = PExponent::Finite(2.0);
        let rows: Vec<[f64; 4]> = (0..trials)
            .into_par_iter()
            .map(|i| {
                let mut r = rng::labelled(seed, "kernel_bounds", i as u64);
                let x = AlgebraElement::random(alg, &mut r);
                let y = AlgebraElement::random(alg, &mut r);
                let s = AlgebraElement::random(alg, &mut r);
                let v = self.phi_operator(&x, &y, &s).expect("shapes match");
                let base = ksup * ksup * schatten_norm(&x, two) * schatten_norm(&y, two) * schatten_norm(&s, PExponent::Infinity);
                let nr = numerical_radius_element(&v);
                let tri = triple_norm(&v, Budget { starts: 2, iters: 60, seed: i as u64 }).value;
                [nr, t_inf * t_inf * base, tri, t_4 * t_4 * base]
            })
            .collect();
        let excess = |l: usize, r: usize| {
            rows.iter().map(|row| row[l] - row[r] - 1e-9 * (1.0 + row[r])).fold(f64::NEG_INFINITY, f64::max)
        };
        let ratio = |l: usize, r: usize| {
            rows.iter().map(|row| if row[r] > 0.0 { row[l] / row[r] } else { 0.0 }).fold(0.0, f64::max)
        };
        let map = self.sesquilinear_map()?;
        let invariance_residual = check_left_invariance(&map)?;
        let positivity = check_positivity(&map, 64, seed).status;
        let (nr_excess, triple_excess) = (excess(0, 1), excess(2, 3));
        let passes = nr_excess <= 0.0
            && triple_excess <= 0.0
            && invariance_residual <= 1e-9 * (1.0 + map.scale())
            && positivity == PositivityStatus::Certified;
        Ok(KernelBoundReport {
            trials,
            kernel_sup: ksup,
            t_inf,
            t_4,
            max_nr_ratio: ratio(0, 1),
            max_triple_ratio: ratio(2, 3),
            nr_excess,
            triple_excess,
            invariance_residual,
            positivity,
            passes,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelBoundReport {
    pub trials: usize,
    pub kernel_sup: f64,
    pub t_inf: f64,
    pub t_4: f64,
    /// Largest `w(Φ(X,Y)(S)) / (‖T‖_∞²‖k‖_∞²‖X‖₂‖Y‖₂‖S‖_∞)`.
    pub max_nr_ratio: f64,
    /// Same with the triple-norm lower bound and `‖T‖₄²`.
    pub max_triple_ratio: f64,
    /// Largest `lhs − rhs − tol`; nonpositive when the bound holds.
    pub nr_excess: f64,
    pub triple_excess: f64,
    pub invariance_residual: f64,
    pub positivity: PositivityStatus,
    pub passes: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inequalities::{default_grid, uncertainty_check};
    use crate::radius_norms::{check_cs_operator_valued, TargetNorm};
    use crate::rng::substream;
    use crate::star_domain::AlgebraVector;
    use proptest::prelude::*;

    fn m2() -> Arc<TracedAlgebra> {
        TracedAlgebra::full(2)
    }

    fn example() -> KernelMap {
        let a = m2();
        KernelMap::new(AlgebraElement::diag(&a, &[1.0, 2.0]).unwrap(), Kernel::affine(), AlgebraElement::identity(&a)).unwrap()
    }

    fn close(a: &AlgebraElement, b: &AlgebraElement, tol: f64) -> bool {
        a.distance(b) <= tol
    }

    #[test]
    fn eta_examples() {
        let a = m2();
        let one = KernelMap::new(
            AlgebraElement::diag(&a, &[0.5, 3.0]).unwrap(),
            Kernel::Constant { value: 1.0 },
            AlgebraElement::identity(&a),
        )
        .unwrap();
        for x in [0.0, 1.0, 3.0] {
            assert!(close(&one.eta(x).unwrap(), &AlgebraElement::identity(&a), 1e-14));
        }
        let km = example();
        assert!(close(&km.eta(1.0).unwrap(), &AlgebraElement::diag(&a, &[2.0, 3.0]).unwrap(), 1e-14));
        assert!(km.eta(2.5).is_err() && km.eta(-0.1).is_err());

        // k(x, t) = t as a grid kernel: η_x(W) = W for a non-diagonal W
        let w = AlgebraElement::from_real_rows(&a, &[&[2.0, 1.0], &[1.0, 2.0]]).unwrap();
        let grid = GridKernel { x: vec![0.0, 3.0], t: vec![0.0, 3.0], values: vec![vec![0.0, 3.0], vec![0.0, 3.0]] };
        let km = KernelMap::new(w.clone(), Kernel::Grid(grid), AlgebraElement::identity(&a)).unwrap();
        assert!(close(&km.eta(1.7).unwrap(), &w, 1e-12));
    }

    #[test]
    fn phi_function_examples() {
        let a = m2();
        let id = AlgebraElement::identity(&a);
        let grid = [0.0, 0.5, 1.0, 2.0];
        let f = example().phi_function(&id, &id, &grid).unwrap();
        for (x, v) in grid.iter().zip(&f.values) {
            assert!((v - Complex64::new(2.0 + 3.0 * x, 0.0)).norm() < 1e-12);
        }
        let mut r = substream(1, 0);
        let (x, y) = (AlgebraElement::random(&a, &mut r), AlgebraElement::random(&a, &mut r));
        let flat = KernelMap::new(
            AlgebraElement::diag(&a, &[1.0, 2.0]).unwrap(),
            Kernel::Constant { value: 1.0 },
            id.clone(),
        )
        .unwrap();
        let expect = crate::traced_algebra::rho_product(&x, &y.adjoint());
        for v in flat.phi_function(&x, &y, &grid).unwrap().values {
            assert!((v - expect).norm() < 1e-12);
        }
        let h = rng::complex_vector(&mut r, 2);
        let rank_one = AlgebraElement::new(&a, vec![linalg::outer(&h, &h)]).unwrap();
        for v in example().phi_function(&rank_one, &rank_one, &grid).unwrap().values {
            assert!(v.re >= 0.0 && v.im.abs() < 1e-12);
        }
        assert!(example().phi_function(&x, &y, &[1.0, 0.5]).is_err());
    }

    #[test]
    fn phi_operator_examples() {
        let a = m2();
        let id = AlgebraElement::identity(&a);
        let v = example().phi_operator(&id, &id, &id).unwrap();
        assert!(close(&v, &AlgebraElement::diag(&a, &[13.0, 34.0]).unwrap(), 1e-12));
        assert!(example().phi_operator(&id, &id, &AlgebraElement::zeros(&a)).unwrap().is_zero(0.0));

        let mut r = substream(2, 0);
        let [x, y, s] = [0, 1, 2].map(|_| AlgebraElement::random(&a, &mut r));
        let flat = KernelMap::new(AlgebraElement::diag(&a, &[1.0, 2.0]).unwrap(), Kernel::Constant { value: 1.0 }, id.clone()).unwrap();
        let expect = id.scale(rho(&(&(&x * &s) * &y.adjoint())));
        assert!(close(&flat.phi_operator(&x, &y, &s).unwrap(), &expect, 1e-12));
        assert!(flat.phi_operator(&x, &y, &AlgebraElement::zeros(&TracedAlgebra::full(3))).is_err());
    }

    #[test]
    fn zero_conjugator_bounds_vanish() {
        let a = m2();
        let km = KernelMap::new(AlgebraElement::diag(&a, &[1.0, 2.0]).unwrap(), Kernel::affine(), AlgebraElement::zeros(&a)).unwrap();
        let rep = km.bound_checks(10, 0).unwrap();
        assert_eq!((rep.max_nr_ratio, rep.max_triple_ratio), (0.0, 0.0));
        assert!(rep.passes);
    }

    #[test]
    fn unit_example_attains_the_bound() {
        let a = TracedAlgebra::full(1);
        let one = AlgebraElement::identity(&a);
        let km = KernelMap::new(one.clone(), Kernel::Constant { value: 1.0 }, one.clone()).unwrap();
        let v = km.phi_operator(&one, &one, &one).unwrap();
        assert!((numerical_radius_element(&v) - 1.0).abs() < 1e-15);
        assert_eq!(km.kernel_sup(), 1.0);
    }

    #[test]
    fn bound_sweeps_hold() {
        for n in [2, 3] {
            let a = TracedAlgebra::full(n);
            let mut r = substream(n as u64, 0);
            for kernel in [Kernel::affine(), Kernel::Exponential { rate: 1.0 }, Kernel::Constant { value: 2.0 }] {
                let w = AlgebraElement::random_psd(&a, &mut r);
                let t = AlgebraElement::random(&a, &mut r);
                let rep = KernelMap::new(w, kernel, t).unwrap().bound_checks(200, 7).unwrap();
                assert!(rep.passes, "{rep:?}");
                assert!(rep.max_nr_ratio <= 1.0 && rep.max_triple_ratio <= 1.0);
            }
        }
    }

    #[test]
    fn weighted_blocks_are_supported() {
        let a = TracedAlgebra::new(vec![2, 1], vec![0.5, 3.0]).unwrap();
        let mut r = substream(3, 0);
        let km = KernelMap::new(AlgebraElement::random_psd(&a, &mut r), Kernel::affine(), AlgebraElement::random(&a, &mut r)).unwrap();
        assert!(km.bound_checks(50, 1).unwrap().passes);
        let op = km.operator_valued_map().unwrap();
        for _ in 0..5 {
            let d = a.coord_dim();
            let (xc, yc) = (rng::complex_vector(&mut r, d), rng::complex_vector(&mut r, d));
            let (x, y) = (AlgebraElement::from_coords(&a, &xc).unwrap(), AlgebraElement::from_coords(&a, &yc).unwrap());
            let s = AlgebraElement::random(&a, &mut r);
            let via_gen = op.evaluate(&xc, &yc).unwrap().apply(&s).unwrap();
            let direct = km.phi_operator(&x, &y, &s).unwrap();
            assert!(close(&via_gen, &direct, 1e-10 * (1.0 + direct.max_abs())));
        }
    }

    #[test]
    fn adapters_match_direct_evaluation() {
        let km = example();
        let a = m2();
        let map = km.sesquilinear_map().unwrap();
        let mut r = substream(4, 0);
        for _ in 0..10 {
            let (xc, yc) = (rng::complex_vector(&mut r, 4), rng::complex_vector(&mut r, 4));
            let x = AlgebraElement::from_coords(&a, &xc).unwrap();
            let y = AlgebraElement::from_coords(&a, &yc).unwrap();
            let direct = km.phi_element(&x, &y).unwrap();
            assert!(close(&map.evaluate(&xc, &yc).unwrap(), &direct, 1e-12));
            // φ(X, Y)(W) samples φ(X, Y) at the spectrum
            let f = km.phi_function(&x, &y, &[1.0, 2.0]).unwrap();
            assert!((direct.block(0)[(0, 0)] - f.values[0]).norm() < 1e-12);
            assert!((direct.block(0)[(1, 1)] - f.values[1]).norm() < 1e-12);
        }
        assert_eq!(check_positivity(&map, 16, 0).status, PositivityStatus::Certified);
        assert!(check_left_invariance(&map).unwrap() <= 1e-12);
    }

    #[test]
    fn uncertainty_example_values() {
        let km = example();
        let map = km.sesquilinear_map().unwrap();
        let dom = map.domain().unwrap().clone();
        let i = Complex64::new(0.0, 1.0);
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let sx = AlgebraVector::new(&dom, vec![o, l, l, o]).unwrap();
        let sy = AlgebraVector::new(&dom, vec![o, -i, i, o]).unwrap();
        let sweep = uncertainty_check(&map, &sx, &sy, &default_grid(), &default_grid()).unwrap();
        assert!((sweep.gamma - 20f64.sqrt()).abs() < 1e-9);
        let at0 = sweep.reports.iter().find(|r| r.lambda == 0.0 && r.mu == 0.0).unwrap();
        assert!((at0.delta_a * at0.delta_b - 89f64.sqrt()).abs() < 1e-9);
        assert!(sweep.bound_ok);
        // k = i(ab − ba) = −2σ_z
        let kz = [Complex64::new(-2.0, 0.0), o, o, Complex64::new(2.0, 0.0)];
        for (u, v) in sweep.k.iter().zip(kz) {
            assert!((u - v).norm() < 1e-12);
        }
        let e = map.evaluate(&sweep.k, dom.unit()).unwrap();
        assert!(close(&e, &AlgebraElement::diag(&m2(), &[2.0, 4.0]).unwrap(), 1e-12));
    }

    #[test]
    fn operator_cs_on_the_kernel_family() {
        let op = example().operator_valued_map().unwrap();
        let mut r = substream(5, 0);
        for _ in 0..3 {
            let (x, y) = (rng::complex_vector(&mut r, 4), rng::complex_vector(&mut r, 4));
            let rep = check_cs_operator_valued(&op, &x, &y, TargetNorm::NumericalRadius, Budget { starts: 8, iters: 20, seed: 0 }).unwrap();
            assert!(rep.report.status.is_ok(), "{:?}", rep.report);
        }
    }

    #[test]
    fn invalid_inputs() {
        let a = m2();
        let id = AlgebraElement::identity(&a);
        let w = AlgebraElement::diag(&a, &[1.0, 2.0]).unwrap();
        assert!(KernelMap::new(AlgebraElement::diag(&a, &[-1.0, 2.0]).unwrap(), Kernel::affine(), id.clone()).is_err());
        assert!(KernelMap::new(w.clone(), Kernel::Constant { value: -1.0 }, id.clone()).is_err());
        let short = GridKernel { x: vec![0.0, 1.0], t: vec![0.0, 1.0], values: vec![vec![1.0; 2]; 2] };
        assert!(KernelMap::new(w.clone(), Kernel::Grid(short), id.clone()).is_err());
        let negative = GridKernel { x: vec![0.0, 2.0], t: vec![0.0, 2.0], values: vec![vec![1.0, -1.0], vec![1.0, 1.0]] };
        assert!(KernelMap::new(w.clone(), Kernel::Grid(negative), id.clone()).is_err());
        assert!(KernelMap::new(w, Kernel::affine(), AlgebraElement::identity(&TracedAlgebra::full(3))).is_err());
    }

    #[test]
    fn kernel_specs_parse() {
        assert_eq!("affine".parse::<Kernel>().unwrap(), Kernel::affine());
        assert_eq!("constant:2".parse::<Kernel>().unwrap(), Kernel::Constant { value: 2.0 });
        assert_eq!("exponential:0.5".parse::<Kernel>().unwrap(), Kernel::Exponential { rate: 0.5 });
        assert_eq!("affine:2,3".parse::<Kernel>().unwrap(), Kernel::Affine { a: 2.0, b: 3.0 });
        assert!("affine:1".parse::<Kernel>().is_err());
        assert!("gauss".parse::<Kernel>().is_err());
        let json = r#"{"name":"grid","x":[0,1],"t":[0,1],"values":[[1,1],[1,2]]}"#;
        assert!(matches!(serde_json::from_str::<Kernel>(json).unwrap(), Kernel::Grid(_)));
    }

    #[test]
    fn sup_norm_bounds_the_eta_values() {
        let a = TracedAlgebra::full(3);
        let mut r = substream(6, 0);
        for kernel in [Kernel::affine(), Kernel::Exponential { rate: 2.0 }] {
            let km = KernelMap::new(AlgebraElement::random_psd(&a, &mut r), kernel, AlgebraElement::identity(&a)).unwrap();
            let s = km.kernel_sup();
            for x in km.eigenvalues() {
                for l in km.eigenvalues() {
                    assert!(km.kernel().eval(x, l) <= s);
                }
                assert!(schatten_norm(&km.eta(x).unwrap(), PExponent::Infinity) <= s + 1e-12);
            }
        }
    }

    #[test]
    fn phi_is_positive_and_invariant_on_random_inputs() {
        let a = TracedAlgebra::full(2);
        let mut r = substream(7, 0);
        let km = KernelMap::new(AlgebraElement::random_psd(&a, &mut r), Kernel::Exponential { rate: 1.0 }, AlgebraElement::random(&a, &mut r)).unwrap();
        let m = km.radius();
        let grid: Vec<f64> = (0..9).map(|i| m * i as f64 / 8.0).collect();
        for _ in 0..1000 {
            let x = AlgebraElement::random(&a, &mut r);
            let f = km.phi_function(&x, &x, &grid).unwrap();
            assert!(f.values.iter().all(|v| v.re >= -1e-12));
            let s = AlgebraElement::random_psd(&a, &mut r);
            let v = km.phi_operator(&x, &x, &s).unwrap();
            assert!(v.min_eigenvalue() >= -1e-9 * (1.0 + v.max_abs()));
        }
        for _ in 0..100 {
            let [aa, x, y] = [0, 1, 2].map(|_| AlgebraElement::random(&a, &mut r));
            for &g in &grid {
                let lhs = km.phi_value(&(&aa * &x), &y, g).unwrap();
                let rhs = km.phi_value(&x, &(&aa.adjoint() * &y), g).unwrap();
                assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + lhs.norm()));
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn phi_is_sesquilinear(seed in any::<u64>(), re in -2.0f64..2.0, im in -2.0f64..2.0) {
            let km = example();
            let a = m2();
            let mut r = substream(seed, 0);
            let [x, x2, y] = [0, 1, 2].map(|_| AlgebraElement::random(&a, &mut r));
            let c = Complex64::new(re, im);
            let at = 1.3;
            let lhs = km.phi_value(&(&x.scale(c) + &x2), &y, at).unwrap();
            let rhs = c * km.phi_value(&x, &y, at).unwrap() + km.phi_value(&x2, &y, at).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + lhs.norm()));
            let anti = km.phi_value(&y, &x.scale(c), at).unwrap();
            prop_assert!((anti - c.conj() * km.phi_value(&y, &x, at).unwrap()).norm() <= 1e-10 * (1.0 + anti.norm()));
        }
    }
}
