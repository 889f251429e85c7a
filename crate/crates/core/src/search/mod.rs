//! Hill climbing for large normalized Lipschitz ratios at `p > 2`, and probes
//! of adjacent-measure triple integrals.

mod trend;

pub use trend::{trend_report, write_trend_csv, TrendRow, TrendSample};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::matrix::{
    gaussian_hermitian, random_general, random_hermitian_from, spectral_decompose_default, GeneralOperator,
    HermitianOperator, SpectralDecomposition,
};
use crate::opint::{materialize, rep_norm, toi_adjacent, HaagerupRep, RepKind};
use crate::pindex::SchattenIndex;
use crate::rng::{complex_normal, derive_seed, seeded, SeededRng};
use crate::symbol::{random_symbol_from, TrigPoly2, DEFAULT_OVERSAMPLE};
use crate::theorems::{ratio_terms, BoundMode, BoundReport, PerturbationInstance};
use crate::SPECTRAL_BOUND;

/// Consecutive rejections after which the step size is halved.
pub const PATIENCE: usize = 20;

/// Consecutive degenerate initial states tolerated before giving up.
const MAX_RESAMPLES: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    pub p: SchattenIndex,
    pub dim: usize,
    pub symbol_degree: usize,
    pub budget: usize,
    pub restarts: usize,
    pub master_seed: u64,
    pub step_scale: f64,
}

impl SearchConfig {
    fn validate_shape(&self) -> Result<()> {
        if self.dim == 0 {
            return input("dim must be positive");
        }
        if self.restarts == 0 {
            return input("restarts must be positive");
        }
        if !(self.step_scale > 0.0 && self.step_scale.is_finite()) {
            return input(format!("step_scale must be positive, got {}", self.step_scale));
        }
        Ok(())
    }
}

/// Search state: symbol, base pair and the two perturbations.
/// The perturbed pair is `(A1 + ΔA, B1 + ΔB)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchState {
    pub f: TrigPoly2,
    pub a1: HermitianOperator,
    pub b1: HermitianOperator,
    pub delta_a: HermitianOperator,
    pub delta_b: HermitianOperator,
}

impl SearchState {
    pub fn instance(&self, p: SchattenIndex, seed: u64) -> Result<PerturbationInstance> {
        PerturbationInstance::new(
            self.a1.clone(),
            self.b1.clone(),
            self.a1.add(&self.delta_a)?,
            self.b1.add(&self.delta_b)?,
            self.f.clone(),
            p,
            seed,
        )
    }

    pub fn with_symbol(&self, f: TrigPoly2) -> Self {
        SearchState { f, ..self.clone() }
    }
}

/// A state with its cached spectral data and objective.
#[derive(Clone)]
struct Evaluated {
    state: SearchState,
    a2: HermitianOperator,
    b2: HermitianOperator,
    spectra: [SpectralDecomposition; 4],
    besov: f64,
    ratio: Option<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Block {
    Symbol,
    A1,
    B1,
    DeltaA,
    DeltaB,
}

const BLOCKS: [Block; 5] = [Block::Symbol, Block::A1, Block::B1, Block::DeltaA, Block::DeltaB];

fn in_domain(d: &SpectralDecomposition) -> bool {
    d.eigenvalues().iter().all(|v| v.abs() < SPECTRAL_BOUND)
}

impl Evaluated {
    fn new(state: SearchState, p: SchattenIndex) -> Result<Self> {
        let a2 = state.a1.add(&state.delta_a)?;
        let b2 = state.b1.add(&state.delta_b)?;
        let spectra = [
            spectral_decompose_default(&state.a1)?,
            spectral_decompose_default(&state.b1)?,
            spectral_decompose_default(&a2)?,
            spectral_decompose_default(&b2)?,
        ];
        let besov = state.f.besov_norm(DEFAULT_OVERSAMPLE)?.besov_norm;
        let mut e = Evaluated { state, a2, b2, spectra, besov, ratio: None };
        e.ratio = e.objective(p)?;
        Ok(e)
    }

    /// `None` when the perturbation vanishes, the symbol is zero, or a
    /// spectrum leaves the confinement interval.
    fn objective(&self, p: SchattenIndex) -> Result<Option<f64>> {
        if !self.spectra.iter().all(in_domain) || !(self.besov > 0.0) {
            return Ok(None);
        }
        let [a1, b1, a2, b2] = &self.spectra;
        let a_diff = self.state.a1.sub(&self.a2)?;
        let b_diff = self.state.b1.sub(&self.b2)?;
        let (num, den) = ratio_terms(&self.state.f, [a1, b1, a2, b2], &a_diff, &b_diff, p)?;
        if !(den > 0.0) {
            return Ok(None);
        }
        let r = num / (den * self.besov);
        Ok(r.is_finite().then_some(r))
    }

    fn is_degenerate(&self) -> bool {
        self.besov == 0.0 || (self.state.delta_a.max_abs_entry() == 0.0 && self.state.delta_b.max_abs_entry() == 0.0)
    }

    /// Gaussian move on one block. The symbol move is relative to the largest
    /// coefficient so that it commutes with rescaling the symbol.
    fn mutate(&self, block: Block, step: f64, rng: &mut SeededRng, p: SchattenIndex) -> Result<Self> {
        let mut next = self.clone();
        let n = self.state.a1.dim();
        match block {
            Block::Symbol => {
                let scale = step * self.state.f.max_coeff();
                next.state.f = self.state.f.map_coeffs(|c| c + complex_normal(rng) * scale);
                next.besov = next.state.f.besov_norm(DEFAULT_OVERSAMPLE)?.besov_norm;
            }
            Block::A1 => {
                next.state.a1 = self.state.a1.add(&gaussian_hermitian(rng, n).scale(step))?;
                next.a2 = next.state.a1.add(&next.state.delta_a)?;
                next.spectra[0] = spectral_decompose_default(&next.state.a1)?;
                next.spectra[2] = spectral_decompose_default(&next.a2)?;
            }
            Block::B1 => {
                next.state.b1 = self.state.b1.add(&gaussian_hermitian(rng, n).scale(step))?;
                next.b2 = next.state.b1.add(&next.state.delta_b)?;
                next.spectra[1] = spectral_decompose_default(&next.state.b1)?;
                next.spectra[3] = spectral_decompose_default(&next.b2)?;
            }
            Block::DeltaA => {
                next.state.delta_a = self.state.delta_a.add(&gaussian_hermitian(rng, n).scale(step))?;
                next.a2 = next.state.a1.add(&next.state.delta_a)?;
                next.spectra[2] = spectral_decompose_default(&next.a2)?;
            }
            Block::DeltaB => {
                next.state.delta_b = self.state.delta_b.add(&gaussian_hermitian(rng, n).scale(step))?;
                next.b2 = next.state.b1.add(&next.state.delta_b)?;
                next.spectra[3] = spectral_decompose_default(&next.b2)?;
            }
        }
        next.ratio = next.objective(p)?;
        Ok(next)
    }
}

/// Seed of restart `index`. Independent of `p`, so runs at different indices
/// share their initial states.
pub fn restart_seed(master_seed: u64, index: usize) -> u64 {
    derive_seed(&[master_seed, index as u64])
}

/// Random initial state drawn the same way as sweep instances. Returns the
/// state and the number of degenerate draws that were discarded.
pub fn initial_state(dim: usize, degree: usize, seed: u64) -> Result<(SearchState, u64)> {
    let mut rng = seeded(seed);
    for resampled in 0..MAX_RESAMPLES {
        let a1 = random_hermitian_from(&mut rng, dim, 1.0)?;
        let b1 = random_hermitian_from(&mut rng, dim, 1.0)?;
        let da = random_hermitian_from(&mut rng, dim, 1.0)?;
        let db = random_hermitian_from(&mut rng, dim, 1.0)?;
        let eps = 10f64.powf(-3.0 + 3.0 * rng.random::<f64>());
        let delta_a = da.sub(&a1)?.scale(eps);
        let delta_b = db.sub(&b1)?.scale(eps);
        let f = random_symbol_from(&mut rng, degree, true);
        let state = SearchState { f, a1, b1, delta_a, delta_b };
        let degenerate = state.f.max_coeff() == 0.0
            || (state.delta_a.max_abs_entry() == 0.0 && state.delta_b.max_abs_entry() == 0.0);
        if !degenerate {
            return Ok((state, resampled));
        }
    }
    Err(Error::Numeric("could not draw a non-degenerate initial state".into()))
}

/// Outcome of one hill-climbing run.
#[derive(Debug, Clone)]
pub struct ClimbOutcome {
    pub best_ratio: f64,
    pub best_state: SearchState,
    pub trajectory: Vec<(usize, f64)>,
    pub accepted: usize,
    pub resampled: u64,
}

/// Greedy hill climbing from `initial`: each of `budget` steps perturbs one
/// uniformly chosen block, accepts strict improvements only, and halves the
/// step after [`PATIENCE`] consecutive rejections. Proposals with a vanishing
/// perturbation are discarded and counted in `resampled`.
pub fn hill_climb(initial: SearchState, p: SchattenIndex, budget: usize, step_scale: f64, seed: u64) -> Result<ClimbOutcome> {
    let mut current = Evaluated::new(initial, p)?;
    let mut best = match current.ratio {
        Some(r) => r,
        None if current.is_degenerate() => return input("initial state has a zero perturbation"),
        None => return input("initial state has a spectrum outside the confinement interval"),
    };
    let mut rng = seeded(seed);
    let mut trajectory = vec![(0, best)];
    let mut step = step_scale;
    let mut rejections = 0;
    let mut accepted = 0;
    let mut resampled = 0;
    for s in 1..=budget {
        let block = BLOCKS[rng.random_range(0..BLOCKS.len())];
        let candidate = current.mutate(block, step, &mut rng, p)?;
        match candidate.ratio {
            Some(r) if r > best => {
                best = r;
                current = candidate;
                trajectory.push((s, r));
                accepted += 1;
                rejections = 0;
            }
            other => {
                if other.is_none() && candidate.is_degenerate() {
                    resampled += 1;
                }
                rejections += 1;
                if rejections == PATIENCE {
                    step *= 0.5;
                    rejections = 0;
                }
            }
        }
    }
    Ok(ClimbOutcome { best_ratio: best, best_state: current.state, trajectory, accepted, resampled })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub config: SearchConfig,
    pub best_ratio: f64,
    pub best_restart: usize,
    pub best_instance: PerturbationInstance,
    pub trajectory: Vec<(usize, f64)>,
    pub resampled: u64,
}

/// Random-restart hill climbing for the normalized Lipschitz ratio at
/// `cfg.p > 2`. Deterministic in the configuration.
pub fn search_counterexample(cfg: &SearchConfig) -> Result<SearchReport> {
    if cfg.p <= SchattenIndex::TWO {
        return input(format!("the search targets p > 2, got {}", cfg.p));
    }
    run_search(cfg)
}

/// The search engine without the `p > 2` restriction, for control runs at
/// `p ≤ 2`.
pub fn run_search(cfg: &SearchConfig) -> Result<SearchReport> {
    cfg.validate_shape()?;
    let outcomes: Vec<Result<(u64, ClimbOutcome)>> = (0..cfg.restarts)
        .into_par_iter()
        .map(|i| {
            let seed = restart_seed(cfg.master_seed, i);
            let (state, drawn) = initial_state(cfg.dim, cfg.symbol_degree, seed)?;
            let mut out = hill_climb(state, cfg.p, cfg.budget, cfg.step_scale, derive_seed(&[seed, 1]))?;
            out.resampled += drawn;
            Ok((seed, out))
        })
        .collect();
    let mut resampled = 0;
    let mut best: Option<(usize, u64, ClimbOutcome)> = None;
    for (i, o) in outcomes.into_iter().enumerate() {
        let (seed, o) = o?;
        resampled += o.resampled;
        if best.as_ref().is_none_or(|(_, _, b)| o.best_ratio > b.best_ratio) {
            best = Some((i, seed, o));
        }
    }
    let (best_restart, seed, o) = best.expect("at least one restart");
    Ok(SearchReport {
        config: cfg.clone(),
        best_ratio: o.best_ratio,
        best_restart,
        best_instance: o.best_state.instance(cfg.p, seed)?,
        trajectory: o.trajectory,
        resampled,
    })
}

/// Triple integral with no operator between the first two measures, against
/// the Haagerup-type bound `rep_norm · ‖Q‖_p`, which it need not satisfy for
/// `p < 2`.
pub fn escape_probe_with(
    rep: &HaagerupRep,
    decomps: [&SpectralDecomposition; 3],
    q: &GeneralOperator,
    p: SchattenIndex,
) -> Result<BoundReport> {
    if !(p < SchattenIndex::TWO) {
        return input(format!("escape probes need 1 <= p < 2, got {p}"));
    }
    let [d1, d2, d3] = decomps;
    let w = toi_adjacent(&materialize(rep), d1, d2, q, d3)?;
    Ok(BoundReport::new(BoundMode::Adjacent, w.schatten(p), rep_norm(rep).value * q.schatten(p)))
}

/// Random escape probe of dimension `dim`: three random spectral measures, a
/// Gaussian core representation with `J = K = min(dim, 8)` and a random `Q`.
pub fn escape_probe(p: SchattenIndex, dim: usize, seed: u64) -> Result<BoundReport> {
    if !(p < SchattenIndex::TWO) {
        return input(format!("escape probes need 1 <= p < 2, got {p}"));
    }
    let mut rng = seeded(seed);
    let mut decomps = Vec::with_capacity(3);
    for _ in 0..3 {
        decomps.push(spectral_decompose_default(&random_hermitian_from(&mut rng, dim, 1.0)?)?);
    }
    let grids = [0, 1, 2].map(|i| decomps[i].eigenvalues().to_vec());
    let jk = dim.min(8);
    let rep = HaagerupRep::random(&mut rng, RepKind::Core, grids, jk, jk)?;
    let q = random_general(&mut rng, dim);
    escape_probe_with(&rep, [&decomps[0], &decomps[1], &decomps[2]], &q, p)
}
