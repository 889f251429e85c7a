//! Executable checks: the divided-difference perturbation identity, the
//! Schatten-norm bounds for triple operator integrals, and Lipschitz ratios
//! of `f(A, B)` under perturbation of the pair.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::matrix::{
    random_general, random_hermitian_from, schatten, spectral_decompose_default, GeneralOperator, HermitianOperator,
    SpectralDecomposition,
};
use crate::opint::{
    func_of_pair, materialize, rep_norm, toi_direct, DividedDifferenceX, DividedDifferenceY, HaagerupRep, RepKind,
    GRID_MATCH_TOL,
};
use crate::pindex::SchattenIndex;
use crate::rng::{derive_seed, seeded};
use crate::symbol::{random_symbol_from, TrigPoly2, DEFAULT_OVERSAMPLE};

/// Relative slack allowed on every bound: `lhs ≤ rhs (1 + 1e-10)`.
pub const BOUND_SLACK: f64 = 1e-10;

/// Minimal gap between distinct clustered eigenvalues in generated
/// identity-check instances.
pub const MIN_EIGEN_SEPARATION: f64 = 1e-6;

/// Two pairs of self-adjoint operators, a symbol and a Schatten index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceJson", into = "InstanceJson")]
pub struct PerturbationInstance {
    pub a1: HermitianOperator,
    pub b1: HermitianOperator,
    pub a2: HermitianOperator,
    pub b2: HermitianOperator,
    pub f: TrigPoly2,
    pub p: SchattenIndex,
    pub seed: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceJson {
    #[serde(rename = "A1")]
    a1: HermitianOperator,
    #[serde(rename = "B1")]
    b1: HermitianOperator,
    #[serde(rename = "A2")]
    a2: HermitianOperator,
    #[serde(rename = "B2")]
    b2: HermitianOperator,
    f: TrigPoly2,
    p: SchattenIndex,
    seed: u64,
}

impl TryFrom<InstanceJson> for PerturbationInstance {
    type Error = Error;
    fn try_from(v: InstanceJson) -> Result<Self> {
        PerturbationInstance::new(v.a1, v.b1, v.a2, v.b2, v.f, v.p, v.seed)
    }
}

impl From<PerturbationInstance> for InstanceJson {
    fn from(v: PerturbationInstance) -> Self {
        InstanceJson { a1: v.a1, b1: v.b1, a2: v.a2, b2: v.b2, f: v.f, p: v.p, seed: v.seed }
    }
}

impl PerturbationInstance {
    pub fn new(
        a1: HermitianOperator,
        b1: HermitianOperator,
        a2: HermitianOperator,
        b2: HermitianOperator,
        f: TrigPoly2,
        p: SchattenIndex,
        seed: u64,
    ) -> Result<Self> {
        let n = a1.dim();
        if b1.dim() != n || a2.dim() != n || b2.dim() != n {
            return input(format!("operators must share one dimension: {} {} {} {}", n, b1.dim(), a2.dim(), b2.dim()));
        }
        Ok(PerturbationInstance { a1, b1, a2, b2, f, p, seed })
    }

    pub fn dim(&self) -> usize {
        self.a1.dim()
    }

    /// Exchanges the roles of `(A1, B1)` and `(A2, B2)`.
    pub fn swapped(&self) -> Self {
        PerturbationInstance { a1: self.a2.clone(), b1: self.b2.clone(), a2: self.a1.clone(), b2: self.b1.clone(), ..self.clone() }
    }

    pub fn with_symbol(&self, f: TrigPoly2) -> Self {
        PerturbationInstance { f, ..self.clone() }
    }
}

/// Draws `A1, B1, D_A, D_B` from the random Hermitian ensemble, a step size
/// `ε = 10^u` with `u` uniform in `[-3, 0]`, and sets `A2 = A1 + ε (D_A - A1)`,
/// `B2 = B1 + ε (D_B - B1)`. Spectra stay inside the confinement interval
/// because `A2` is a convex combination. The symbol is real-valued.
pub fn generate_instance(dim: usize, degree: usize, p: SchattenIndex, seed: u64) -> Result<PerturbationInstance> {
    let mut rng = seeded(seed);
    let a1 = random_hermitian_from(&mut rng, dim, 1.0)?;
    let b1 = random_hermitian_from(&mut rng, dim, 1.0)?;
    let da = random_hermitian_from(&mut rng, dim, 1.0)?;
    let db = random_hermitian_from(&mut rng, dim, 1.0)?;
    let eps = 10f64.powf(-3.0 + 3.0 * rng.random::<f64>());
    let a2 = a1.add(&da.sub(&a1)?.scale(eps))?;
    let b2 = b1.add(&db.sub(&b1)?.scale(eps))?;
    let f = random_symbol_from(&mut rng, degree, true);
    PerturbationInstance::new(a1, b1, a2, b2, f, p, seed)
}

/// [`generate_instance`] retried with derived seeds until every operator has
/// clustered eigenvalues separated by at least [`MIN_EIGEN_SEPARATION`].
pub fn generate_separated_instance(dim: usize, degree: usize, p: SchattenIndex, seed: u64) -> Result<PerturbationInstance> {
    for attempt in 0..1000u64 {
        let s = if attempt == 0 { seed } else { derive_seed(&[seed, attempt]) };
        let inst = generate_instance(dim, degree, p, s)?;
        let mut separated = true;
        for op in [&inst.a1, &inst.b1, &inst.a2, &inst.b2] {
            separated &= spectral_decompose_default(op)?.min_gap() >= MIN_EIGEN_SEPARATION;
        }
        if separated {
            return Ok(inst);
        }
    }
    Err(Error::Numeric("could not draw an instance with separated spectra".into()))
}

struct PairSpectra {
    a1: SpectralDecomposition,
    b1: SpectralDecomposition,
    a2: SpectralDecomposition,
    b2: SpectralDecomposition,
}

impl PairSpectra {
    fn of(inst: &PerturbationInstance) -> Result<Self> {
        Ok(PairSpectra {
            a1: spectral_decompose_default(&inst.a1)?,
            b1: spectral_decompose_default(&inst.b1)?,
            a2: spectral_decompose_default(&inst.a2)?,
            b2: spectral_decompose_default(&inst.b2)?,
        })
    }
}

/// Result of checking the perturbation identity on one instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub residual: f64,
    pub lhs_norm: f64,
    pub passed: bool,
}

/// Both sides of
///
/// ```text
/// f(A1,B1) - f(A2,B2) = ∭ f[x1,x2; y] dE_{A1}(x1) (A1 - A2) dE_{A2}(x2) dE_{B1}(y)
///                     + ∭ f[x; y1,y2] dE_{A2}(x) dE_{B1}(y1) (B1 - B2) dE_{B2}(y2)
/// ```
///
/// returned as `(lhs, rhs)`.
pub fn pair_formula_sides(inst: &PerturbationInstance) -> Result<(GeneralOperator, GeneralOperator)> {
    let s = PairSpectra::of(inst)?;
    let n = inst.dim();
    let identity = GeneralOperator::identity(n);
    let lhs = func_of_pair(&inst.f, &s.a1, &s.b1)?.into_matrix() - func_of_pair(&inst.f, &s.a2, &s.b2)?.into_matrix();
    let a_diff = GeneralOperator::new(inst.a1.matrix() - inst.a2.matrix())?;
    let b_diff = GeneralOperator::new(inst.b1.matrix() - inst.b2.matrix())?;
    let first = toi_direct(&DividedDifferenceX(&inst.f), &s.a1, &a_diff, &s.a2, &identity, &s.b1)?;
    let second = toi_direct(&DividedDifferenceY(&inst.f), &s.a2, &identity, &s.b1, &b_diff, &s.b2)?;
    let rhs = first.into_matrix() + second.into_matrix();
    Ok((GeneralOperator::new(lhs)?, GeneralOperator::new(rhs)?))
}

/// Relative Hilbert–Schmidt residual `‖LHS − RHS‖_2 / (1 + ‖LHS‖_2)` of the
/// perturbation identity.
pub fn verify_pair_formula(inst: &PerturbationInstance, tol: f64) -> Result<IdentityCheck> {
    if !(tol > 0.0) {
        return input(format!("tolerance must be positive, got {tol}"));
    }
    let (lhs, rhs) = pair_formula_sides(inst)?;
    let lhs_norm = lhs.matrix().norm();
    let residual = (lhs.matrix() - rhs.matrix()).norm() / (1.0 + lhs_norm);
    Ok(IdentityCheck { residual, lhs_norm, passed: residual <= tol })
}

/// Which Schatten-norm inequality is checked.
///
/// With `W` the triple operator integral of `Ψ` with operators `T`, `R`:
///
/// * `LeftBounded`: `p ≥ 2`, `‖W‖_p ≤ ‖Ψ‖ ‖T‖ ‖R‖_p`
/// * `RightBounded`: `p ≥ 2`, `‖W‖_p ≤ ‖Ψ‖ ‖T‖_p ‖R‖`
/// * `Holder`: `1/p + 1/q ≤ 1/2`, `‖W‖_r ≤ ‖Ψ‖ ‖T‖_p ‖R‖_q`
/// * `FirstKind`: first-kind `Ψ`, `1 ≤ p ≤ 2`, `1/p + 1/q ≤ 1`,
///   `‖W‖_r ≤ ‖Ψ‖ ‖T‖_p ‖R‖_q`
/// * `SecondKind`: second-kind `Ψ`, `1 ≤ q ≤ 2`, `1/p + 1/q ≤ 1`, same bound
///
/// where `1/r = 1/p + 1/q`. `Adjacent` tags escape probes, which carry no
/// guaranteed bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundMode {
    #[serde(rename = "2.1i")]
    LeftBounded,
    #[serde(rename = "2.1ii")]
    RightBounded,
    #[serde(rename = "2.1iii")]
    Holder,
    #[serde(rename = "2.2first")]
    FirstKind,
    #[serde(rename = "2.2second")]
    SecondKind,
    #[serde(rename = "adjacent")]
    Adjacent,
}

impl BoundMode {
    pub const CHECKED: [BoundMode; 5] =
        [BoundMode::LeftBounded, BoundMode::RightBounded, BoundMode::Holder, BoundMode::FirstKind, BoundMode::SecondKind];

    pub fn tag(self) -> &'static str {
        match self {
            BoundMode::LeftBounded => "2.1i",
            BoundMode::RightBounded => "2.1ii",
            BoundMode::Holder => "2.1iii",
            BoundMode::FirstKind => "2.2first",
            BoundMode::SecondKind => "2.2second",
            BoundMode::Adjacent => "adjacent",
        }
    }

    pub fn from_tag(tag: &str) -> Result<Self> {
        [BoundMode::LeftBounded, BoundMode::RightBounded, BoundMode::Holder, BoundMode::FirstKind, BoundMode::SecondKind, BoundMode::Adjacent]
            .into_iter()
            .find(|m| m.tag() == tag)
            .ok_or_else(|| Error::Input(format!("unknown bound mode {tag:?}")))
    }

    pub fn rep_kind(self) -> RepKind {
        match self {
            BoundMode::FirstKind => RepKind::First,
            BoundMode::SecondKind => RepKind::Second,
            _ => RepKind::Core,
        }
    }

    /// Validates the index constraints of the mode and returns
    /// `(r, norm index for T, norm index for R)`.
    pub fn indices(self, p: SchattenIndex, q: SchattenIndex) -> Result<(SchattenIndex, SchattenIndex, SchattenIndex)> {
        let two = SchattenIndex::TWO;
        let inf = SchattenIndex::INFINITY;
        match self {
            BoundMode::LeftBounded | BoundMode::RightBounded => {
                if p < two {
                    return input(format!("mode {} needs p >= 2, got {p}", self.tag()));
                }
                Ok(if self == BoundMode::LeftBounded { (p, inf, p) } else { (p, p, inf) })
            }
            BoundMode::Holder => {
                if p.reciprocal() + q.reciprocal() > 0.5 {
                    return input(format!("mode {} needs 1/p + 1/q <= 1/2", self.tag()));
                }
                Ok((p.holder(q)?, p, q))
            }
            BoundMode::FirstKind | BoundMode::SecondKind => {
                let small = if self == BoundMode::FirstKind { p } else { q };
                if small > two {
                    return input(format!("mode {} needs its S_p operator index in [1, 2], got {small}", self.tag()));
                }
                Ok((p.holder(q)?, p, q))
            }
            BoundMode::Adjacent => input("adjacent probes are not a checked bound"),
        }
    }
}

/// One evaluated inequality `lhs ≤ rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub mode: BoundMode,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub passed: bool,
}

impl BoundReport {
    pub fn new(mode: BoundMode, lhs: f64, rhs: f64) -> Self {
        BoundReport { mode, lhs, rhs, slack: rhs - lhs, passed: lhs <= rhs * (1.0 + BOUND_SLACK) }
    }

    pub fn ratio(&self) -> f64 {
        self.lhs / self.rhs
    }
}

fn check_grids(rep: &HaagerupRep, decomps: [&SpectralDecomposition; 3]) -> Result<()> {
    for (i, (grid, d)) in rep.grids().iter().zip(decomps).enumerate() {
        let matches = grid.len() == d.len()
            && grid.iter().zip(d.eigenvalues()).all(|(g, e)| (g - e).abs() <= GRID_MATCH_TOL);
        if !matches {
            return input(format!("grid {} does not match the eigenvalues of spectral measure {}", i + 1, i + 1));
        }
    }
    Ok(())
}

/// Evaluates the Schatten-norm inequality of `mode` for the triple operator
/// integral of the materialized representation.
pub fn check_toi_schatten(
    rep: &HaagerupRep,
    decomps: [&SpectralDecomposition; 3],
    t: &GeneralOperator,
    r: &GeneralOperator,
    p: SchattenIndex,
    q: SchattenIndex,
    mode: BoundMode,
) -> Result<BoundReport> {
    if rep.kind() != mode.rep_kind() {
        return input(format!("mode {} needs a {:?}-kind representation, got {:?}", mode.tag(), mode.rep_kind(), rep.kind()));
    }
    let (out_index, t_index, r_index) = mode.indices(p, q)?;
    check_grids(rep, decomps)?;
    let [d1, d2, d3] = decomps;
    let w = toi_direct(&materialize(rep), d1, t, d2, r, d3)?;
    let lhs = w.schatten(out_index);
    let rhs = rep_norm(rep).value * t.schatten(t_index) * r.schatten(r_index);
    Ok(BoundReport::new(mode, lhs, rhs))
}

/// Inputs for one bound check.
#[derive(Debug, Clone)]
pub struct BoundCase {
    pub rep: HaagerupRep,
    pub decomps: [SpectralDecomposition; 3],
    pub t: GeneralOperator,
    pub r: GeneralOperator,
}

impl BoundCase {
    pub fn check(&self, p: SchattenIndex, q: SchattenIndex, mode: BoundMode) -> Result<BoundReport> {
        let [d1, d2, d3] = &self.decomps;
        check_toi_schatten(&self.rep, [d1, d2, d3], &self.t, &self.r, p, q, mode)
    }
}

/// Random case: dimension uniform in `1..=max_dim`, `J, K` uniform in
/// `1..=max_jk`, Gaussian representation of the kind required by `mode`,
/// operators from [`random_general`].
pub fn random_bound_case(mode: BoundMode, max_dim: usize, max_jk: usize, seed: u64) -> Result<BoundCase> {
    if max_dim == 0 || max_jk == 0 {
        return input("max_dim and max_jk must be positive");
    }
    let mut rng = seeded(seed);
    let dim = rng.random_range(1..=max_dim);
    let decomps = [0, 1, 2].map(|_| random_hermitian_from(&mut rng, dim, 1.0).and_then(|a| spectral_decompose_default(&a)));
    let [d1, d2, d3] = decomps;
    let decomps = [d1?, d2?, d3?];
    let grids = [0, 1, 2].map(|i| decomps[i].eigenvalues().to_vec());
    let j_len = rng.random_range(1..=max_jk);
    let k_len = rng.random_range(1..=max_jk);
    let rep = HaagerupRep::random(&mut rng, mode.rep_kind(), grids, j_len, k_len)?;
    let t = random_general(&mut rng, dim);
    let r = random_general(&mut rng, dim);
    Ok(BoundCase { rep, decomps, t, r })
}

/// Case for a given representation: three Hermitian operators of dimension
/// `dim` whose spectra are the representation grids (values repeated
/// cyclically), `T` either the identity or random, `R` random.
pub fn bound_case_for_rep(rep: HaagerupRep, dim: usize, t_identity: bool, seed: u64) -> Result<BoundCase> {
    let mut rng = seeded(seed);
    let mut built = Vec::with_capacity(3);
    for grid in rep.grids() {
        if grid.is_empty() || dim < grid.len() {
            return input(format!("dimension {dim} cannot carry a grid of {} points", grid.len()));
        }
        let spectrum: Vec<f64> = (0..dim).map(|i| grid[i % grid.len()]).collect();
        let a = crate::matrix::hermitian_with_spectrum(&mut rng, &spectrum)?;
        built.push(spectral_decompose_default(&a)?);
    }
    let d3 = built.pop().unwrap();
    let d2 = built.pop().unwrap();
    let d1 = built.pop().unwrap();
    // snap the grids onto the computed cluster eigenvalues
    let grids = [d1.eigenvalues().to_vec(), d2.eigenvalues().to_vec(), d3.eigenvalues().to_vec()];
    for (g, want) in grids.iter().zip(rep.grids()) {
        let mut sorted = want.clone();
        sorted.sort_by(f64::total_cmp);
        if g.len() != sorted.len() || g.iter().zip(&sorted).any(|(a, b)| (a - b).abs() > 1e-9 * (1.0 + b.abs())) {
            return input("representation grids must be sorted and well separated");
        }
    }
    let [a, b, c] = rep.factors();
    let rep = HaagerupRep::new(rep.kind(), grids, a.clone(), b.clone(), c.clone())?;
    let t = if t_identity { GeneralOperator::identity(dim) } else { random_general(&mut rng, dim) };
    let r = random_general(&mut rng, dim);
    Ok(BoundCase { rep, decomps: [d1, d2, d3], t, r })
}

/// Lipschitz ratio of one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRecord {
    pub p: SchattenIndex,
    pub dim: usize,
    pub sample_index: usize,
    pub seed: u64,
    pub num: f64,
    pub den: f64,
    pub besov: f64,
    pub normalized_ratio: f64,
}

/// `‖f(A1,B1) − f(A2,B2)‖_p` and `‖A1 − A2‖_p + ‖B1 − B2‖_p` from
/// precomputed spectral decompositions.
pub(crate) fn ratio_terms(
    f: &TrigPoly2,
    spectra: [&SpectralDecomposition; 4],
    a_diff: &HermitianOperator,
    b_diff: &HermitianOperator,
    p: SchattenIndex,
) -> Result<(f64, f64)> {
    let [a1, b1, a2, b2] = spectra;
    let diff = func_of_pair(f, a1, b1)?.into_matrix() - func_of_pair(f, a2, b2)?.into_matrix();
    let num = schatten(&diff, p);
    let den = a_diff.schatten(p)? + b_diff.schatten(p)?;
    Ok((num, den))
}

/// Fills a [`RatioRecord`] (with `sample_index` 0) for one instance, using
/// the dyadic-block Besov surrogate with the default oversampling.
pub fn lipschitz_ratio(inst: &PerturbationInstance) -> Result<RatioRecord> {
    let besov = inst.f.besov_norm(DEFAULT_OVERSAMPLE)?.besov_norm;
    lipschitz_ratio_with_besov(inst, besov)
}

pub(crate) fn lipschitz_ratio_with_besov(inst: &PerturbationInstance, besov: f64) -> Result<RatioRecord> {
    if !(besov > 0.0) {
        return input("symbol has zero Besov norm");
    }
    let s = PairSpectra::of(inst)?;
    let a_diff = inst.a1.sub(&inst.a2)?;
    let b_diff = inst.b1.sub(&inst.b2)?;
    let (num, den) = ratio_terms(&inst.f, [&s.a1, &s.b1, &s.a2, &s.b2], &a_diff, &b_diff, inst.p)?;
    if !(den > 0.0) {
        return input("zero perturbation: A1 = A2 and B1 = B2");
    }
    let normalized_ratio = num / (den * besov);
    if !normalized_ratio.is_finite() {
        return Err(Error::Numeric("non-finite Lipschitz ratio".into()));
    }
    Ok(RatioRecord { p: inst.p, dim: inst.dim(), sample_index: 0, seed: inst.seed, num, den, besov, normalized_ratio })
}

/// Seed of sample `index` in a sweep.
pub fn sweep_seed(master_seed: u64, p: SchattenIndex, dim: usize, index: usize) -> u64 {
    derive_seed(&[master_seed, p.value().to_bits(), dim as u64, index as u64])
}

/// Ratio records for every `(p, dim, index < samples)`, sorted by
/// `(p, dim, index)`. Deterministic in the arguments.
pub fn sweep_dimensions(
    p_list: &[SchattenIndex],
    dim_list: &[usize],
    samples: usize,
    master_seed: u64,
    degree: usize,
) -> Result<Vec<RatioRecord>> {
    let mut jobs: Vec<(SchattenIndex, usize, usize)> = Vec::new();
    for &p in p_list {
        for &dim in dim_list {
            jobs.extend((0..samples).map(|i| (p, dim, i)));
        }
    }
    jobs.sort_by(|a, b| a.0.value().total_cmp(&b.0.value()).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    jobs.dedup();
    jobs.into_par_iter()
        .map(|(p, dim, index)| {
            let seed = sweep_seed(master_seed, p, dim, index);
            let inst = generate_instance(dim, degree, p, seed)?;
            let mut rec = lipschitz_ratio(&inst)?;
            rec.sample_index = index;
            Ok(rec)
        })
        .collect()
}

/// Writes records as CSV with columns
/// `p, dim, sample_index, seed, num, den, besov, normalized_ratio`.
pub fn write_ratio_csv<W: std::io::Write>(records: &[RatioRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(CsvRow::from(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_ratio_csv<R: std::io::Read>(input: R) -> Result<Vec<RatioRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    rd.deserialize::<CsvRow>().map(|row| row?.try_into()).collect()
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    p: String,
    dim: usize,
    sample_index: usize,
    seed: u64,
    num: f64,
    den: f64,
    besov: f64,
    normalized_ratio: f64,
}

impl From<&RatioRecord> for CsvRow {
    fn from(r: &RatioRecord) -> Self {
        CsvRow {
            p: r.p.to_string(),
            dim: r.dim,
            sample_index: r.sample_index,
            seed: r.seed,
            num: r.num,
            den: r.den,
            besov: r.besov,
            normalized_ratio: r.normalized_ratio,
        }
    }
}

impl TryFrom<CsvRow> for RatioRecord {
    type Error = Error;
    fn try_from(r: CsvRow) -> Result<Self> {
        Ok(RatioRecord {
            p: r.p.parse()?,
            dim: r.dim,
            sample_index: r.sample_index,
            seed: r.seed,
            num: r.num,
            den: r.den,
            besov: r.besov,
            normalized_ratio: r.normalized_ratio,
        })
    }
}
