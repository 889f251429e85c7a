//! Double and triple operator integrals over finite spectral measures.
//!
//! With `P_j`, `Q_k`, `S_l` the spectral projections of three decompositions,
//!
//! ```text
//! doi(Φ; T)       = Σ_{j,k}   Φ(λ_j, μ_k)      P_j T Q_k
//! toi(Ψ; T, R)    = Σ_{j,k,l} Ψ(λ_j, μ_k, ν_l) P_j T Q_k R S_l
//! ```
//!
//! Both are evaluated in the eigenbases `U_1, U_2, U_3`: with
//! `T' = U_1^* T U_2` and `R' = U_2^* R U_3`, the triple integral is
//! `U_1 W' U_3^*` where `W'_{ac} = Σ_b Ψ(a, b, c) T'_{ab} R'_{bc}` and the
//! kernel is read at the cluster eigenvalues of the basis vectors.

mod haagerup;
mod kernel;

use num_complex::Complex64;

pub use haagerup::{materialize, rep_norm, Family, FamilyJson, HaagerupRep, Materialized, RepJson, RepKind, RepNorm, GRID_MATCH_TOL};
pub use kernel::{DividedDifferenceX, DividedDifferenceY, FnKernel, Kernel3, Provenance};

use crate::error::{input, Error, Result};
use crate::matrix::{CMatrix, GeneralOperator, SpectralDecomposition};
use crate::symbol::TrigPoly2;
use kernel::{Rotated, Rotation};

/// Above this many cluster triples the kernel is evaluated slice by slice
/// instead of being tabulated densely.
pub const DENSE_KERNEL_LIMIT: usize = 1_000_000;

/// Neumaier-compensated complex accumulator.
#[derive(Default, Clone, Copy)]
struct CompensatedSum {
    sum: Complex64,
    comp: Complex64,
}

impl CompensatedSum {
    fn add(&mut self, v: Complex64) {
        fn step(sum: &mut f64, comp: &mut f64, v: f64) {
            let t = *sum + v;
            if sum.abs() >= v.abs() {
                *comp += (*sum - t) + v;
            } else {
                *comp += (v - t) + *sum;
            }
            *sum = t;
        }
        step(&mut self.sum.re, &mut self.comp.re, v.re);
        step(&mut self.sum.im, &mut self.comp.im, v.im);
    }

    fn total(self) -> Complex64 {
        self.sum + self.comp
    }
}

fn check_dims(dims: &[usize]) -> Result<usize> {
    let n = dims[0];
    if dims.iter().any(|&d| d != n) {
        return input(format!("dimension mismatch: {dims:?}"));
    }
    Ok(n)
}

fn to_basis(left: &SpectralDecomposition, m: &CMatrix, right: &SpectralDecomposition) -> CMatrix {
    left.basis().adjoint() * m * right.basis()
}

fn from_basis(left: &SpectralDecomposition, m: &CMatrix, right: &SpectralDecomposition) -> CMatrix {
    left.basis() * m * right.basis().adjoint()
}

fn finite(m: CMatrix) -> Result<GeneralOperator> {
    GeneralOperator::new(m).map_err(|_| Error::Numeric("operator integral produced non-finite entries".into()))
}

/// `Σ_{j,k} Φ(λ_j, μ_k) P_j T Q_k`.
pub fn doi_apply(
    phi: impl Fn(f64, f64) -> Complex64,
    da: &SpectralDecomposition,
    db: &SpectralDecomposition,
    t: &GeneralOperator,
) -> Result<GeneralOperator> {
    check_dims(&[da.source_dim(), db.source_dim(), t.dim()])?;
    let table: Vec<Complex64> =
        da.eigenvalues().iter().flat_map(|&x| db.eigenvalues().iter().map(move |&y| (x, y))).map(|(x, y)| phi(x, y)).collect();
    let m2 = db.len();
    let mut inner = to_basis(da, t.matrix(), db);
    let (ca, cb) = (da.cluster_of(), db.cluster_of());
    for a in 0..inner.nrows() {
        for b in 0..inner.ncols() {
            inner[(a, b)] *= table[ca[a] * m2 + cb[b]];
        }
    }
    finite(from_basis(da, &inner, db))
}

/// `f(A, B) = Σ_{j,k} f(λ_j, μ_k) P_j Q_k`.
pub fn func_of_pair(f: &TrigPoly2, da: &SpectralDecomposition, db: &SpectralDecomposition) -> Result<GeneralOperator> {
    check_dims(&[da.source_dim(), db.source_dim()])?;
    doi_apply(|x, y| f.eval(x, y), da, db, &GeneralOperator::identity(da.source_dim()))
}

/// `Σ_{j,k,l} Ψ(λ_j, μ_k, ν_l) P_j T Q_k R S_l`.
pub fn toi_direct(
    psi: &dyn Kernel3,
    d1: &SpectralDecomposition,
    t: &GeneralOperator,
    d2: &SpectralDecomposition,
    r: &GeneralOperator,
    d3: &SpectralDecomposition,
) -> Result<GeneralOperator> {
    toi_with_limit(psi, d1, t, d2, r, d3, DENSE_KERNEL_LIMIT)
}

pub(crate) fn toi_with_limit(
    psi: &dyn Kernel3,
    d1: &SpectralDecomposition,
    t: &GeneralOperator,
    d2: &SpectralDecomposition,
    r: &GeneralOperator,
    d3: &SpectralDecomposition,
    dense_limit: usize,
) -> Result<GeneralOperator> {
    let n = check_dims(&[d1.source_dim(), t.dim(), d2.source_dim(), r.dim(), d3.source_dim()])?;
    let t1 = to_basis(d1, t.matrix(), d2);
    let r1 = to_basis(d2, r.matrix(), d3);
    let (m1, m2, m3) = (d1.len(), d2.len(), d3.len());
    let dense = match m1.checked_mul(m2).and_then(|v| v.checked_mul(m3)) {
        Some(total) if total <= dense_limit => Some(psi.tabulate(d1.eigenvalues(), d2.eigenvalues(), d3.eigenvalues())?),
        _ => None,
    };
    let c2 = d2.cluster_of();
    let mut inner = CMatrix::zeros(n, n);
    let mut slice = vec![Complex64::default(); m2];
    for j in 0..m1 {
        for l in 0..m3 {
            match &dense {
                Some(table) => {
                    for (k, s) in slice.iter_mut().enumerate() {
                        *s = table[(j * m2 + k) * m3 + l];
                    }
                }
                None => {
                    let (x, z) = (d1.eigenvalues()[j], d3.eigenvalues()[l]);
                    for (k, s) in slice.iter_mut().enumerate() {
                        *s = psi.eval(x, d2.eigenvalues()[k], z)?;
                    }
                }
            }
            for a in d1.cluster_columns(j) {
                for c in d3.cluster_columns(l) {
                    let mut acc = CompensatedSum::default();
                    for b in 0..n {
                        acc.add(slice[c2[b]] * t1[(a, b)] * r1[(b, c)]);
                    }
                    inner[(a, c)] = acc.total();
                }
            }
        }
    }
    finite(from_basis(d1, &inner, d3))
}

/// `Σ_{j,k,l} Ψ(λ_j, μ_k, ν_l) P_j Q_k Q S_l`: no operator between the first
/// two spectral measures.
pub fn toi_adjacent(
    psi: &dyn Kernel3,
    d1: &SpectralDecomposition,
    d2: &SpectralDecomposition,
    q: &GeneralOperator,
    d3: &SpectralDecomposition,
) -> Result<GeneralOperator> {
    toi_direct(psi, d1, &GeneralOperator::identity(d1.source_dim()), d2, q, d3)
}

/// The two trace functionals through which one-sided Haagerup-type
/// integrals are defined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DualKind {
    /// `Q ↦ trace((Σ Ψ(λ_j, μ_k, ν_l) Q_k R S_l Q P_j) T)`.
    First,
    /// `Q ↦ trace((Σ Ψ(λ_j, μ_k, ν_l) S_l Q P_j T Q_k) R)`.
    Second,
}

/// Evaluates the trace functional of `kind` at `Q`. In finite dimensions it
/// equals `trace(toi_direct(Ψ; T, R) Q)` for both kinds.
#[allow(clippy::too_many_arguments)]
pub fn toi_dual(
    psi: &dyn Kernel3,
    kind: DualKind,
    d1: &SpectralDecomposition,
    d2: &SpectralDecomposition,
    d3: &SpectralDecomposition,
    t: &GeneralOperator,
    r: &GeneralOperator,
    q: &GeneralOperator,
) -> Result<Complex64> {
    check_dims(&[d1.source_dim(), d2.source_dim(), d3.source_dim(), t.dim(), r.dim(), q.dim()])?;
    match kind {
        DualKind::First => {
            // measures in the order (E2, E3, E1)
            let rotated = Rotated { inner: psi, rotation: Rotation::Left };
            let z = toi_direct(&rotated, d2, r, d3, q, d1)?;
            Ok((z.matrix() * t.matrix()).trace())
        }
        DualKind::Second => {
            // measures in the order (E3, E1, E2)
            let rotated = Rotated { inner: psi, rotation: Rotation::Right };
            let z = toi_direct(&rotated, d3, q, d1, t, d2)?;
            Ok((z.matrix() * r.matrix()).trace())
        }
    }
}
