//! The range of `C_φ` on `B²_a` as a reproducing kernel Hilbert space.
//!
//! Its kernel is the sinc kernel pulled back through the warp,
//! `K^φ(z, w) = sin a(φ(z) - conj φ(w)) / π(φ(z) - conj φ(w))`. Kernel
//! sections at integer nodes span a finite slice of the space; the Gram
//! matrix over those nodes carries the inner product
//! `(F, G) = Σ_{m,n} conj(b_m) a_n K^φ(m, n)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::paley_wiener::{
    pw_kernel, synthesize, synthesize_grid, BandSpec, BandlimitedSignal, RealGrid,
};
use crate::truncation::warp_signal;
use crate::warps::{check_measure_bound, Warp, DEFAULT_GRID_SPACING, DEFAULT_PROBE_WINDOW};

pub const DEFAULT_RIDGE: f64 = 1e-10;
pub const MAX_NODES_HALF_WIDTH: usize = 2000;

/// Relative floor for eigenvalues in the eigen-decomposition fallback.
const EIGEN_CLIP: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct WarpedKernel {
    pub band: BandSpec,
    pub warp: Warp,
}

impl WarpedKernel {
    pub fn new(band: BandSpec, warp: Warp) -> Self {
        WarpedKernel { band, warp }
    }

    /// Kernel section `h_φ(z, ·)` is the sinc kernel centred at `φ(z)`;
    /// this is its value at `w`, i.e. `K^φ(z, w)`.
    pub fn eval(&self, z: Complex64, w: Complex64) -> Complex64 {
        warped_kernel_eval(self, z, w)
    }
}

pub fn warped_kernel_eval(k: &WarpedKernel, z: Complex64, w: Complex64) -> Complex64 {
    pw_kernel(k.band, k.warp.eval(z), k.warp.eval(w))
}

/// Coefficients of `F = Σ a_n K^φ(·, n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionCoefficients {
    pub nodes: Vec<f64>,
    pub coeffs: Vec<Complex64>,
}

impl ExpansionCoefficients {
    pub fn new(nodes: Vec<f64>, coeffs: Vec<Complex64>) -> Result<Self> {
        if nodes.len() != coeffs.len() {
            return Err(Error::NodeMismatch);
        }
        Ok(ExpansionCoefficients { nodes, coeffs })
    }

    /// Unit coefficient at position `j`.
    pub fn unit(nodes: Vec<f64>, j: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); nodes.len()];
        coeffs[j] = Complex64::new(1.0, 0.0);
        ExpansionCoefficients { nodes, coeffs }
    }

    pub fn evaluate(&self, k: &WarpedKernel, z: Complex64) -> Complex64 {
        self.nodes
            .iter()
            .zip(&self.coeffs)
            .map(|(&n, a)| a * k.eval(z, n.into()))
            .sum()
    }
}

#[derive(Debug, Clone)]
enum Factorization {
    /// Lower factor `L` with `L L^H = matrix + ridge·I`.
    Cholesky(DMatrix<Complex64>),
    /// Eigenvectors and clipped eigenvalues of `matrix + ridge·I`.
    Eigen {
        vectors: DMatrix<Complex64>,
        values: DVector<f64>,
    },
}

#[derive(Debug, Clone)]
pub struct GramSystem {
    pub nodes: Vec<f64>,
    pub matrix: DMatrix<Complex64>,
    pub ridge: f64,
    factorization: Factorization,
}

impl GramSystem {
    /// Factorizes `matrix + ridge·I`: Cholesky first, then an
    /// eigen-decomposition with eigenvalues clipped at `1e-14·‖matrix‖` when
    /// the matrix is semidefinite only up to rounding. Genuinely indefinite
    /// input fails.
    pub fn from_matrix(nodes: Vec<f64>, matrix: DMatrix<Complex64>, ridge: f64) -> Result<Self> {
        if matrix.nrows() != nodes.len() || matrix.ncols() != nodes.len() {
            return Err(Error::NodeMismatch);
        }
        if !(ridge >= 0.0) || !ridge.is_finite() {
            return Err(Error::Invalid(format!(
                "ridge must be nonnegative, got {ridge}"
            )));
        }
        let mut regularized = matrix.clone();
        add_ridge(&mut regularized, ridge);
        let factorization = match cholesky_lower(&regularized) {
            Some(ch) => Factorization::Cholesky(ch),
            None => {
                let eig = SymmetricEigen::new(regularized);
                let scale = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let lowest = eig
                    .eigenvalues
                    .iter()
                    .cloned()
                    .fold(f64::INFINITY, f64::min);
                if lowest < -1e-10 * scale.max(1.0) {
                    return Err(Error::FactorizationFailure {
                        min_eigenvalue: lowest,
                    });
                }
                let floor = EIGEN_CLIP * scale.max(f64::MIN_POSITIVE);
                Factorization::Eigen {
                    values: eig.eigenvalues.map(|v| v.max(floor)),
                    vectors: eig.eigenvectors,
                }
            }
        };
        Ok(GramSystem {
            nodes,
            matrix,
            ridge,
            factorization,
        })
    }

    /// Whether the eigen-decomposition fallback had to be used.
    pub fn used_eigen_fallback(&self) -> bool {
        matches!(self.factorization, Factorization::Eigen { .. })
    }

    pub fn dimension(&self) -> usize {
        self.nodes.len()
    }

    /// Smallest eigenvalue of the unregularized matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.matrix)
    }

    /// Largest over smallest eigenvalue of `matrix + ridge·I`.
    pub fn condition_estimate(&self) -> f64 {
        let mut m = self.matrix.clone();
        add_ridge(&mut m, self.ridge);
        let e = SymmetricEigen::new(m).eigenvalues;
        let hi = e.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = e.iter().cloned().fold(f64::INFINITY, f64::min);
        hi / lo
    }

    /// `max |G_mn - conj G_nm|`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.matrix.nrows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Frobenius norm of `G - I`; zero exactly when the kernel sections
    /// at the nodes are orthonormal.
    pub fn orthonormality_defect(&self) -> f64 {
        let n = self.matrix.nrows();
        (&self.matrix - DMatrix::<Complex64>::identity(n, n)).norm()
    }

    fn solve(&self, rhs: &DVector<Complex64>) -> DVector<Complex64> {
        match &self.factorization {
            Factorization::Cholesky(l) => cholesky_solve(l, rhs),
            Factorization::Eigen { vectors, values } => {
                let mut y = vectors.adjoint() * rhs;
                for (yi, l) in y.iter_mut().zip(values.iter()) {
                    *yi /= *l;
                }
                vectors * y
            }
        }
    }
}

/// Hermitian Cholesky; `None` as soon as a pivot drops to rounding level
/// relative to the largest diagonal entry.
fn cholesky_lower(m: &DMatrix<Complex64>) -> Option<DMatrix<Complex64>> {
    let n = m.nrows();
    let scale = (0..n).fold(0.0f64, |s, i| s.max(m[(i, i)].re.abs()));
    let tiny = 1e-12 * scale;
    let mut l = DMatrix::<Complex64>::zeros(n, n);
    for j in 0..n {
        let mut pivot = m[(j, j)].re;
        for k in 0..j {
            pivot -= l[(j, k)].norm_sqr();
        }
        if !(pivot > tiny) || !pivot.is_finite() {
            return None;
        }
        let d = pivot.sqrt();
        l[(j, j)] = Complex64::new(d, 0.0);
        for i in j + 1..n {
            let mut v = m[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = v / d;
        }
    }
    Some(l)
}

fn cholesky_solve(l: &DMatrix<Complex64>, rhs: &DVector<Complex64>) -> DVector<Complex64> {
    let n = l.nrows();
    let mut y = rhs.clone();
    for i in 0..n {
        let mut v = y[i];
        for k in 0..i {
            v -= l[(i, k)] * y[k];
        }
        y[i] = v / l[(i, i)];
    }
    for i in (0..n).rev() {
        let mut v = y[i];
        for k in i + 1..n {
            v -= l[(k, i)].conj() * y[k];
        }
        y[i] = v / l[(i, i)];
    }
    y
}

fn add_ridge(m: &mut DMatrix<Complex64>, ridge: f64) {
    for i in 0..m.nrows() {
        m[(i, i)] += ridge;
    }
}

fn min_eigenvalue(m: &DMatrix<Complex64>) -> f64 {
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Gram matrix of `K^φ` over nodes `-N..=N`.
pub fn build_gram(k: &WarpedKernel, n: usize, ridge: f64) -> Result<GramSystem> {
    let nodes: Vec<f64> = (-(n as i64)..=n as i64).map(|i| i as f64).collect();
    gram_on_nodes(k, nodes, ridge)
}

/// Gram matrix of `K^φ` on arbitrary real nodes.
pub fn gram_on_nodes(k: &WarpedKernel, nodes: Vec<f64>, ridge: f64) -> Result<GramSystem> {
    if nodes.is_empty() || nodes.len() > 2 * MAX_NODES_HALF_WIDTH + 1 {
        return Err(Error::Invalid(format!(
            "node count {} out of range",
            nodes.len()
        )));
    }
    let dim = nodes.len();
    let warped: Vec<Complex64> = nodes.iter().map(|&x| k.warp.eval(x.into())).collect();
    let mut matrix = DMatrix::<Complex64>::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let v = pw_kernel(k.band, warped[i], warped[j]);
            matrix[(i, j)] = v;
            matrix[(j, i)] = v.conj();
        }
        // diagonal of a Hermitian matrix is real
        matrix[(i, i)].im = 0.0;
    }
    GramSystem::from_matrix(nodes, matrix, ridge)
}

/// `Σ_{m,n} conj(y_m) x_n G_mn`, the unregularized Gram pairing.
pub fn range_inner_product(
    g: &GramSystem,
    x: &ExpansionCoefficients,
    y: &ExpansionCoefficients,
) -> Result<Complex64> {
    if x.nodes != g.nodes || y.nodes != g.nodes {
        return Err(Error::NodeMismatch);
    }
    let xv = DVector::from_column_slice(&x.coeffs);
    let yv = DVector::from_column_slice(&y.coeffs);
    Ok(yv.dotc(&(&g.matrix * xv)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub coefficients: ExpansionCoefficients,
    /// `‖G c - target‖₂` with the unregularized matrix.
    pub residual_norm: f64,
}

/// Solves `(G + ridge·I) c = target` for kernel-expansion coefficients.
pub fn project_onto_kernels(g: &GramSystem, target: &[Complex64]) -> Result<Projection> {
    if target.len() != g.dimension() {
        return Err(Error::NodeMismatch);
    }
    let rhs = DVector::from_column_slice(target);
    let c = g.solve(&rhs);
    let residual_norm = (&g.matrix * &c - &rhs).norm();
    Ok(Projection {
        coefficients: ExpansionCoefficients::new(g.nodes.clone(), c.iter().cloned().collect())?,
        residual_norm,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PullbackNorms {
    pub range_norm: f64,
    pub source_norm: f64,
}

impl PullbackNorms {
    pub fn relative_gap(&self) -> f64 {
        if self.source_norm == 0.0 {
            return self.range_norm;
        }
        (self.range_norm - self.source_norm).abs() / self.source_norm
    }
}

/// Compares `‖C_φ f‖` in the range norm (through the node expansion) with
/// `‖f‖` in `B²_a`. The two agree in the limit of infinitely many nodes.
pub fn pullback_norm_check(f: &BandlimitedSignal, w: &Warp, n: usize) -> Result<PullbackNorms> {
    pullback_norm_check_on(f, w, n, RealGrid::default_time(), DEFAULT_RIDGE)
}

pub fn pullback_norm_check_on(
    f: &BandlimitedSignal,
    w: &Warp,
    n: usize,
    grid: RealGrid,
    ridge: f64,
) -> Result<PullbackNorms> {
    let report = check_measure_bound(w, DEFAULT_PROBE_WINDOW, DEFAULT_GRID_SPACING)?;
    if !report.mutual_abs_continuity {
        return Err(Error::HypothesisFailed(
            "Lebesgue measure and its pull-back are not mutually absolutely continuous".into(),
        ));
    }
    let source_norm = synthesize_grid(f, grid).l2_norm();
    let kernel = WarpedKernel::new(f.band(), w.clone());
    let gram = build_gram(&kernel, n, ridge)?;
    let target = gram
        .nodes
        .iter()
        .map(|&x| synthesize(f, w.eval_real(x).into()))
        .collect::<Result<Vec<_>>>()?;
    let proj = project_onto_kernels(&gram, &target)?;
    let c = &proj.coefficients;
    let range_norm = range_inner_product(&gram, c, c)?.re.max(0.0).sqrt();
    Ok(PullbackNorms {
        range_norm,
        source_norm,
    })
}

/// `‖C_φ f1 - C_φ f2‖` on the grid; requires `f1 ≠ f2`.
pub fn injectivity_probe(
    w: &Warp,
    f1: &BandlimitedSignal,
    f2: &BandlimitedSignal,
    grid: RealGrid,
) -> Result<f64> {
    let distance = synthesize_grid(f1, grid)
        .sub(&synthesize_grid(f2, grid))?
        .l2_norm();
    if distance <= 1e-6 {
        return Err(Error::IndistinguishableInputs { distance });
    }
    let g1 = warp_signal(f1, w, grid)?;
    let g2 = warp_signal(f2, w, grid)?;
    Ok(g1.samples.sub(&g2.samples)?.l2_norm())
}
