//! Dense complex matrices standing in for bounded operators: Hermitian
//! operators and their clustered spectral decompositions, Schatten norms and
//! seeded random ensembles.

use std::ops::Range;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::pindex::SchattenIndex;
use crate::rng::{complex_normal, seeded};
use crate::SPECTRAL_BOUND;

pub type CMatrix = DMatrix<Complex64>;

/// Entrywise tolerance for accepting a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Fraction of [`SPECTRAL_BOUND`] that generated spectra are scaled into.
const CONFINE_FRACTION: f64 = 0.999;

pub fn max_abs_entry(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

fn check_square_finite(m: &CMatrix) -> Result<()> {
    if m.nrows() == 0 || m.nrows() != m.ncols() {
        return input(format!("expected a non-empty square matrix, got {}x{}", m.nrows(), m.ncols()));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return input("matrix has non-finite entries");
    }
    Ok(())
}

/// A square complex matrix, not necessarily Hermitian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct GeneralOperator(CMatrix);

impl GeneralOperator {
    pub fn new(m: CMatrix) -> Result<Self> {
        check_square_finite(&m)?;
        Ok(GeneralOperator(m))
    }

    pub fn identity(dim: usize) -> Self {
        GeneralOperator(CMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        GeneralOperator(CMatrix::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn schatten(&self, p: SchattenIndex) -> f64 {
        schatten(&self.0, p)
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }
}

/// A self-adjoint matrix. The stored matrix is exactly Hermitian: inputs that
/// are Hermitian only up to [`HERMITIAN_TOL`] are averaged with their adjoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct HermitianOperator(CMatrix);

impl HermitianOperator {
    pub fn new(m: CMatrix) -> Result<Self> {
        check_square_finite(&m)?;
        let n = m.nrows();
        for j in 0..n {
            for k in j..n {
                let d = (m[(j, k)] - m[(k, j)].conj()).norm();
                if d > HERMITIAN_TOL {
                    return input(format!("matrix is not Hermitian: entry ({j},{k}) off by {d:e}"));
                }
            }
        }
        Ok(HermitianOperator(hermitian_part(&m)))
    }

    pub fn from_real_diagonal(values: &[f64]) -> Result<Self> {
        let n = values.len();
        let m = CMatrix::from_fn(n, n, |j, k| if j == k { Complex64::from(values[j]) } else { Complex64::default() });
        HermitianOperator::new(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn to_general(&self) -> GeneralOperator {
        GeneralOperator(self.0.clone())
    }

    pub fn max_abs_entry(&self) -> f64 {
        max_abs_entry(&self.0)
    }

    /// Absolute clustering tolerance `1e-9 (1 + max |a_jk|)`.
    pub fn default_cluster_tol(&self) -> f64 {
        1e-9 * (1.0 + self.max_abs_entry())
    }

    /// Eigenvalues in ascending order, without clustering.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let (vals, _) = sorted_eigen(&self.0)?;
        Ok(vals)
    }

    pub fn spectral_radius(&self) -> Result<f64> {
        let vals = self.eigenvalues()?;
        Ok(vals.iter().fold(0.0_f64, |a, v| a.max(v.abs())))
    }

    /// Schatten norm computed from the eigenvalues.
    pub fn schatten(&self, p: SchattenIndex) -> Result<f64> {
        let vals = self.eigenvalues()?;
        let abs: Vec<f64> = vals.iter().map(|v| v.abs()).collect();
        Ok(lp_norm(&abs, p))
    }

    pub fn add(&self, other: &HermitianOperator) -> Result<HermitianOperator> {
        if self.dim() != other.dim() {
            return input("dimension mismatch");
        }
        Ok(HermitianOperator(&self.0 + &other.0))
    }

    pub fn sub(&self, other: &HermitianOperator) -> Result<HermitianOperator> {
        if self.dim() != other.dim() {
            return input("dimension mismatch");
        }
        Ok(HermitianOperator(&self.0 - &other.0))
    }

    pub fn scale(&self, c: f64) -> HermitianOperator {
        HermitianOperator(self.0.map(|z| z * c))
    }
}

fn hermitian_part(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    CMatrix::from_fn(n, n, |j, k| {
        if j == k {
            Complex64::from(m[(j, j)].re)
        } else {
            (m[(j, k)] + m[(k, j)].conj()) * 0.5
        }
    })
}

/// Wire form of a matrix: `{ "dim": n, "re": [n*n], "im": [n*n] }`, row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let n = m.nrows();
        let mut re = Vec::with_capacity(n * n);
        let mut im = Vec::with_capacity(n * n);
        for j in 0..n {
            for k in 0..n {
                re.push(m[(j, k)].re);
                im.push(m[(j, k)].im);
            }
        }
        MatrixJson { dim: n, re, im }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let n = self.dim;
        let len = n.checked_mul(n).ok_or_else(|| Error::Input("dim overflows".into()))?;
        if n == 0 {
            return input("dim must be positive");
        }
        if self.re.len() != len || self.im.len() != len {
            return input(format!("expected {len} real and imaginary parts, got {} and {}", self.re.len(), self.im.len()));
        }
        Ok(CMatrix::from_fn(n, n, |j, k| Complex64::new(self.re[j * n + k], self.im[j * n + k])))
    }
}

impl TryFrom<MatrixJson> for GeneralOperator {
    type Error = Error;
    fn try_from(v: MatrixJson) -> Result<Self> {
        GeneralOperator::new(v.to_matrix()?)
    }
}

impl From<GeneralOperator> for MatrixJson {
    fn from(v: GeneralOperator) -> Self {
        MatrixJson::from_matrix(&v.0)
    }
}

impl TryFrom<MatrixJson> for HermitianOperator {
    type Error = Error;
    fn try_from(v: MatrixJson) -> Result<Self> {
        HermitianOperator::new(v.to_matrix()?)
    }
}

impl From<HermitianOperator> for MatrixJson {
    fn from(v: HermitianOperator) -> Self {
        MatrixJson::from_matrix(&v.0)
    }
}

fn sorted_eigen(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let n = m.nrows();
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 1000 * n.max(1))
        .ok_or_else(|| Error::Numeric("Hermitian eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite eigenvalue".into()));
    }
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// The spectral measure of a Hermitian matrix: distinct (clustered)
/// eigenvalues with their orthogonal eigenprojections.
///
/// The projections are kept in factored form: `basis` is unitary, its columns
/// are grouped by cluster, and `P_j = V_j V_j^*` where `V_j` are the columns of
/// cluster `j`.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    basis: CMatrix,
    clusters: Vec<Range<usize>>,
    cluster_of: Vec<usize>,
}

impl SpectralDecomposition {
    pub fn source_dim(&self) -> usize {
        self.basis.nrows()
    }

    /// Distinct eigenvalues, ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Unitary eigenvector matrix, columns ordered by ascending eigenvalue.
    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    /// Cluster index of each basis column.
    pub fn cluster_of(&self) -> &[usize] {
        &self.cluster_of
    }

    pub fn cluster_columns(&self, j: usize) -> Range<usize> {
        self.clusters[j].clone()
    }

    pub fn multiplicity(&self, j: usize) -> usize {
        self.clusters[j].len()
    }

    pub fn projection(&self, j: usize) -> CMatrix {
        let cols = self.clusters[j].clone();
        let v = self.basis.columns(cols.start, cols.len());
        &v * v.adjoint()
    }

    pub fn projections(&self) -> Vec<CMatrix> {
        (0..self.len()).map(|j| self.projection(j)).collect()
    }

    /// `Σ λ_j P_j`.
    pub fn reconstruct(&self) -> CMatrix {
        self.apply_function(|x| Complex64::from(x))
    }

    /// `g(A) = Σ g(λ_j) P_j`.
    pub fn apply_function(&self, g: impl Fn(f64) -> Complex64) -> CMatrix {
        let n = self.source_dim();
        let weights: Vec<Complex64> = self.cluster_of.iter().map(|&j| g(self.eigenvalues[j])).collect();
        let mut scaled = self.basis.clone();
        for (c, w) in weights.iter().enumerate() {
            for r in 0..n {
                scaled[(r, c)] *= *w;
            }
        }
        scaled * self.basis.adjoint()
    }

    /// Smallest gap between consecutive distinct eigenvalues (infinite if
    /// there is only one).
    pub fn min_gap(&self) -> f64 {
        self.eigenvalues.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }
}

/// Clustered spectral decomposition. Eigenvalues whose consecutive gaps are at
/// most `cluster_tol` are merged into one cluster whose eigenvalue is the mean
/// of its members.
pub fn spectral_decompose(a: &HermitianOperator, cluster_tol: f64) -> Result<SpectralDecomposition> {
    if cluster_tol.is_nan() || cluster_tol < 0.0 {
        return input(format!("cluster_tol must be nonnegative, got {cluster_tol}"));
    }
    let (values, basis) = sorted_eigen(a.matrix())?;
    let n = values.len();
    let mut clusters = Vec::new();
    let mut start = 0;
    for i in 1..=n {
        if i == n || values[i] - values[i - 1] > cluster_tol {
            clusters.push(start..i);
            start = i;
        }
    }
    let mut cluster_of = vec![0; n];
    let mut eigenvalues = Vec::with_capacity(clusters.len());
    for (j, r) in clusters.iter().enumerate() {
        let mean = values[r.clone()].iter().sum::<f64>() / r.len() as f64;
        eigenvalues.push(mean);
        for c in r.clone() {
            cluster_of[c] = j;
        }
    }
    Ok(SpectralDecomposition { eigenvalues, basis, clusters, cluster_of })
}

/// [`spectral_decompose`] with the default tolerance of the operator.
pub fn spectral_decompose_default(a: &HermitianOperator) -> Result<SpectralDecomposition> {
    spectral_decompose(a, a.default_cluster_tol())
}

/// `ℓ^p` norm of nonnegative values, scaled by the maximum to avoid overflow.
pub fn lp_norm(values: &[f64], p: SchattenIndex) -> f64 {
    let max = values.iter().fold(0.0_f64, |a, &v| a.max(v));
    if max == 0.0 || p.is_infinite() {
        return max;
    }
    let p = p.value();
    if p == 1.0 {
        return values.iter().sum();
    }
    let s: f64 = values.iter().map(|&v| (v / max).powf(p)).sum();
    max * s.powf(1.0 / p)
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    m.singular_values().iter().copied().collect()
}

/// Schatten `p`-norm: the `ℓ^p` norm of the singular values.
pub fn schatten(m: &CMatrix, p: SchattenIndex) -> f64 {
    if p.value() == 2.0 {
        return m.norm();
    }
    lp_norm(&singular_values(m), p)
}

/// Schatten norm with a raw index; `p < 1` is rejected.
pub fn schatten_norm(t: &GeneralOperator, p: f64) -> Result<f64> {
    Ok(t.schatten(SchattenIndex::new(p)?))
}

/// Operator norm of a rectangular matrix.
pub fn operator_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    singular_values(m).into_iter().fold(0.0_f64, f64::max)
}

/// Scales `h` so that its spectrum lies in `[-b, b]` with
/// `b = 0.999 * SPECTRAL_BOUND`; matrices already inside are left alone.
pub fn confine_spectrum(h: HermitianOperator) -> Result<HermitianOperator> {
    let rho = h.spectral_radius()?;
    let target = CONFINE_FRACTION * SPECTRAL_BOUND;
    if rho > target {
        Ok(h.scale(target / rho))
    } else {
        Ok(h)
    }
}

/// A random Hermitian matrix from a seeded generator: complex Gaussian entries
/// with variance `1/dim`, Hermitian part, times `scale`, spectrum confined.
pub fn random_hermitian_from<R: Rng + ?Sized>(rng: &mut R, dim: usize, scale: f64) -> Result<HermitianOperator> {
    if dim == 0 {
        return input("dim must be positive");
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return input(format!("scale must be positive, got {scale}"));
    }
    confine_spectrum(gaussian_hermitian(rng, dim).scale(scale))
}

pub fn random_hermitian(dim: usize, seed: u64, scale: f64) -> Result<HermitianOperator> {
    random_hermitian_from(&mut seeded(seed), dim, scale)
}

/// Hermitian part of a complex Gaussian matrix with entry variance `1/dim`,
/// without spectral confinement.
pub fn gaussian_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> HermitianOperator {
    let norm = 1.0 / (dim.max(1) as f64).sqrt();
    let g = CMatrix::from_fn(dim, dim, |_, _| complex_normal(rng) * norm);
    HermitianOperator(hermitian_part(&g))
}

/// Haar-distributed unitary via QR of a complex Gaussian matrix with the
/// phases of `R`'s diagonal absorbed into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| complex_normal(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for c in 0..dim {
        let d = r[(c, c)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::from(1.0) };
        for row in 0..dim {
            q[(row, c)] *= phase;
        }
    }
    q
}

/// Hermitian matrix `U diag(values) U^*` with a random unitary `U`.
pub fn hermitian_with_spectrum<R: Rng + ?Sized>(rng: &mut R, values: &[f64]) -> Result<HermitianOperator> {
    let n = values.len();
    if n == 0 {
        return input("empty spectrum");
    }
    let u = random_unitary(rng, n);
    let mut scaled = u.clone();
    for c in 0..n {
        for r in 0..n {
            scaled[(r, c)] *= values[c];
        }
    }
    HermitianOperator::new(hermitian_part(&(scaled * u.adjoint())))
}

/// Random square matrix with a randomly chosen singular-value profile: flat,
/// geometrically decaying, low rank, or a single dominant direction.
pub fn random_general<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> GeneralOperator {
    let mut sv: Vec<f64> = match rng.random_range(0..4) {
        0 => (0..dim).map(|_| rng.random::<f64>()).collect(),
        1 => {
            let q = 0.2 + 0.7 * rng.random::<f64>();
            (0..dim).map(|i| q.powi(i as i32)).collect()
        }
        2 => {
            let rank = rng.random_range(1..=dim);
            (0..dim).map(|i| if i < rank { 0.1 + rng.random::<f64>() } else { 0.0 }).collect()
        }
        _ => (0..dim).map(|i| if i == 0 { 1.0 } else { 1e-3 * rng.random::<f64>() }).collect(),
    };
    let scale = 0.1 + 3.0 * rng.random::<f64>();
    sv.iter_mut().for_each(|s| *s *= scale);
    let u = random_unitary(rng, dim);
    let v = random_unitary(rng, dim);
    let mut us = u;
    for c in 0..dim {
        for r in 0..dim {
            us[(r, c)] *= sv[c];
        }
    }
    GeneralOperator(us * v.adjoint())
}
