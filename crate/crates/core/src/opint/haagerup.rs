//! Explicit three-factor representations of kernels in the Haagerup tensor
//! product and its two one-sided variants, sampled on finite grids.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::kernel::{Kernel3, Provenance};
use crate::error::{input, Error, Result};
use crate::rng::complex_normal;

/// Two grid points closer than this are considered equal when a materialized
/// representation is evaluated.
pub const GRID_MATCH_TOL: f64 = 1e-12;

/// Which factor carries the two-index (operator-valued) family.
///
/// * `Core`: `Ψ = Σ_{j,k} α_j(x1) β_{jk}(x2) γ_k(x3)`
/// * `First`: `Ψ = Σ_{j,k} α_j(x1) β_k(x2) γ_{jk}(x3)`
/// * `Second`: `Ψ = Σ_{j,k} α_{jk}(x1) β_j(x2) γ_k(x3)`
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RepKind {
    Core,
    First,
    Second,
}

impl RepKind {
    /// Index shapes (without the grid axis) of α, β, γ.
    fn shapes(self, j: usize, k: usize) -> [Vec<usize>; 3] {
        match self {
            RepKind::Core => [vec![j], vec![j, k], vec![k]],
            RepKind::First => [vec![j], vec![k], vec![j, k]],
            RepKind::Second => [vec![j, k], vec![j], vec![k]],
        }
    }
}

/// A family of functions on a grid. The last axis of `shape` is the grid
/// axis; the leading one or two axes are the summation indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Family {
    shape: Vec<usize>,
    values: Vec<Complex64>,
}

impl Family {
    pub fn new(shape: Vec<usize>, values: Vec<Complex64>) -> Result<Self> {
        if !(2..=3).contains(&shape.len()) {
            return input(format!("family shape must have 2 or 3 axes, got {}", shape.len()));
        }
        let len = shape
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::Input("family shape overflows".into()))?;
        if values.len() != len {
            return input(format!("family of shape {shape:?} needs {len} values, got {}", values.len()));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return input("family has non-finite values");
        }
        Ok(Family { shape, values })
    }

    fn from_fn(index_shape: &[usize], grid_len: usize, mut f: impl FnMut() -> Complex64) -> Self {
        let mut shape = index_shape.to_vec();
        shape.push(grid_len);
        let len = shape.iter().product();
        Family { values: (0..len).map(|_| f()).collect(), shape }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn grid_len(&self) -> usize {
        *self.shape.last().unwrap()
    }

    fn is_matrix(&self) -> bool {
        self.shape.len() == 3
    }

    /// `v_j(x)` of a vector family.
    pub fn vec_at(&self, j: usize, x: usize) -> Complex64 {
        self.values[j * self.grid_len() + x]
    }

    /// `m_{jk}(x)` of a matrix family.
    pub fn mat_at(&self, j: usize, k: usize, x: usize) -> Complex64 {
        self.values[(j * self.shape[1] + k) * self.grid_len() + x]
    }

    /// `sup_x ‖{v_j(x)}‖_ℓ²` for a vector family, `sup_x ‖{m_jk(x)}‖_op` for
    /// a matrix family.
    pub fn norm(&self) -> f64 {
        let n = self.grid_len();
        (0..n)
            .map(|x| {
                if self.is_matrix() {
                    let (r, c) = (self.shape[0], self.shape[1]);
                    let m = DMatrix::from_fn(r, c, |j, k| self.mat_at(j, k, x));
                    crate::matrix::operator_norm(&m)
                } else {
                    (0..self.shape[0]).map(|j| self.vec_at(j, x).norm_sqr()).sum::<f64>().sqrt()
                }
            })
            .fold(0.0_f64, f64::max)
    }

    fn scale(&mut self, c: Complex64) {
        self.values.iter_mut().for_each(|v| *v *= c);
    }
}

/// One explicit representation of a kernel on three finite grids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RepJson", into = "RepJson")]
pub struct HaagerupRep {
    kind: RepKind,
    grids: [Vec<f64>; 3],
    alpha: Family,
    beta: Family,
    gamma: Family,
    j_len: usize,
    k_len: usize,
}

/// Factor-norm product of a single representation; an upper bound for the
/// tensor norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepNorm {
    pub value: f64,
    pub factor_norms: [f64; 3],
}

impl HaagerupRep {
    pub fn new(kind: RepKind, grids: [Vec<f64>; 3], alpha: Family, beta: Family, gamma: Family) -> Result<Self> {
        if grids.iter().flatten().any(|x| !x.is_finite()) {
            return input("grid values must be finite");
        }
        let (j_len, k_len) = match kind {
            RepKind::Core => (alpha.shape[0], gamma.shape[0]),
            RepKind::First => (alpha.shape[0], beta.shape[0]),
            RepKind::Second => (beta.shape[0], gamma.shape[0]),
        };
        let expected = kind.shapes(j_len, k_len);
        for ((fam, want), (grid, name)) in [&alpha, &beta, &gamma]
            .into_iter()
            .zip(expected)
            .zip(grids.iter().zip(["alpha", "beta", "gamma"]))
        {
            let mut full = want.clone();
            full.push(grid.len());
            if fam.shape != full {
                return input(format!("{name} has shape {:?}, expected {full:?} for {kind:?} kind", fam.shape));
            }
        }
        Ok(HaagerupRep { kind, grids, alpha, beta, gamma, j_len, k_len })
    }

    /// `J = K = 1` with every factor identically one, so `Ψ ≡ 1`.
    pub fn ones(kind: RepKind, grids: [Vec<f64>; 3]) -> Self {
        let shapes = kind.shapes(1, 1);
        let fam = |i: usize, grid: &Vec<f64>| Family::from_fn(&shapes[i], grid.len(), || Complex64::from(1.0));
        HaagerupRep {
            alpha: fam(0, &grids[0]),
            beta: fam(1, &grids[1]),
            gamma: fam(2, &grids[2]),
            kind,
            grids,
            j_len: 1,
            k_len: 1,
        }
    }

    /// Complex Gaussian factors on the given grids.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, kind: RepKind, grids: [Vec<f64>; 3], j_len: usize, k_len: usize) -> Result<Self> {
        if j_len == 0 || k_len == 0 {
            return input("J and K must be positive");
        }
        let shapes = kind.shapes(j_len, k_len);
        let alpha = Family::from_fn(&shapes[0], grids[0].len(), || complex_normal(rng));
        let beta = Family::from_fn(&shapes[1], grids[1].len(), || complex_normal(rng));
        let gamma = Family::from_fn(&shapes[2], grids[2].len(), || complex_normal(rng));
        Ok(HaagerupRep { kind, grids, alpha, beta, gamma, j_len, k_len })
    }

    pub fn kind(&self) -> RepKind {
        self.kind
    }

    pub fn grids(&self) -> &[Vec<f64>; 3] {
        &self.grids
    }

    pub fn j_len(&self) -> usize {
        self.j_len
    }

    pub fn k_len(&self) -> usize {
        self.k_len
    }

    pub fn factors(&self) -> [&Family; 3] {
        [&self.alpha, &self.beta, &self.gamma]
    }

    /// Multiplies factor `which` (0 = α, 1 = β, 2 = γ) by `c`.
    pub fn scale_factor(&mut self, which: usize, c: Complex64) {
        match which {
            0 => self.alpha.scale(c),
            1 => self.beta.scale(c),
            _ => self.gamma.scale(c),
        }
    }

    /// The defining double sum at grid indices `(a, b, c)`.
    pub fn value_at(&self, a: usize, b: usize, c: usize) -> Complex64 {
        let mut acc = Complex64::default();
        for j in 0..self.j_len {
            for k in 0..self.k_len {
                acc += match self.kind {
                    RepKind::Core => self.alpha.vec_at(j, a) * self.beta.mat_at(j, k, b) * self.gamma.vec_at(k, c),
                    RepKind::First => self.alpha.vec_at(j, a) * self.beta.vec_at(k, b) * self.gamma.mat_at(j, k, c),
                    RepKind::Second => self.alpha.mat_at(j, k, a) * self.beta.vec_at(j, b) * self.gamma.vec_at(k, c),
                };
            }
        }
        acc
    }

    fn locate(&self, axis: usize, x: f64) -> Result<usize> {
        let grid = &self.grids[axis];
        grid.iter()
            .position(|&g| g == x)
            .or_else(|| grid.iter().position(|&g| (g - x).abs() <= GRID_MATCH_TOL))
            .ok_or_else(|| Error::Input(format!("point {x} is not on grid {}", axis + 1)))
    }
}

/// `‖α‖ ‖β‖ ‖γ‖` with the family norms of [`Family::norm`].
pub fn rep_norm(rep: &HaagerupRep) -> RepNorm {
    let factor_norms = [rep.alpha.norm(), rep.beta.norm(), rep.gamma.norm()];
    RepNorm { value: factor_norms.iter().product(), factor_norms }
}

/// The kernel a representation induces. Only grid points can be evaluated.
pub struct Materialized<'a> {
    rep: &'a HaagerupRep,
}

pub fn materialize(rep: &HaagerupRep) -> Materialized<'_> {
    Materialized { rep }
}

impl Kernel3 for Materialized<'_> {
    fn eval(&self, x1: f64, x2: f64, x3: f64) -> Result<Complex64> {
        let a = self.rep.locate(0, x1)?;
        let b = self.rep.locate(1, x2)?;
        let c = self.rep.locate(2, x3)?;
        Ok(self.rep.value_at(a, b, c))
    }

    fn provenance(&self) -> Provenance {
        Provenance::HaagerupRep
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyJson {
    pub shape: Vec<usize>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

/// Wire form: `{ "kind", "grids": [[..], [..], [..]], "alpha", "beta",
/// "gamma" }` where each factor is `{ "shape", "re", "im" }` in row-major
/// order with the grid axis last.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepJson {
    pub kind: RepKind,
    pub grids: [Vec<f64>; 3],
    pub alpha: FamilyJson,
    pub beta: FamilyJson,
    pub gamma: FamilyJson,
}

impl TryFrom<FamilyJson> for Family {
    type Error = Error;
    fn try_from(v: FamilyJson) -> Result<Self> {
        if v.re.len() != v.im.len() {
            return input("re and im lengths differ");
        }
        Family::new(v.shape, v.re.iter().zip(&v.im).map(|(&a, &b)| Complex64::new(a, b)).collect())
    }
}

impl From<Family> for FamilyJson {
    fn from(f: Family) -> Self {
        FamilyJson {
            re: f.values.iter().map(|z| z.re).collect(),
            im: f.values.iter().map(|z| z.im).collect(),
            shape: f.shape,
        }
    }
}

impl TryFrom<RepJson> for HaagerupRep {
    type Error = Error;
    fn try_from(v: RepJson) -> Result<Self> {
        HaagerupRep::new(v.kind, v.grids, v.alpha.try_into()?, v.beta.try_into()?, v.gamma.try_into()?)
    }
}

impl From<HaagerupRep> for RepJson {
    fn from(r: HaagerupRep) -> Self {
        RepJson { kind: r.kind, grids: r.grids, alpha: r.alpha.into(), beta: r.beta.into(), gamma: r.gamma.into() }
    }
}
