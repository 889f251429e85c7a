//! Bivariate trigonometric polynomials on the torus: evaluation, divided
//! differences in either slot and the dyadic-block Besov norm surrogate.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::rng::{seeded, unit_disc};

/// Below this separation a divided difference is replaced by the partial
/// derivative at the midpoint.
pub const COINCIDENT_THRESHOLD: f64 = 1e-7;

/// Tolerance on `c_{-m,-k} = conj(c_{m,k})` for real-valued symbols.
pub const REAL_SYMMETRY_TOL: f64 = 1e-14;

/// Default grid oversampling for sup-norm estimates.
pub const DEFAULT_OVERSAMPLE: usize = 8;

/// `f(x, y) = Σ_{|m|,|k| ≤ N} c_{m,k} e^{i(mx + ky)}`.
///
/// Coefficients are stored row-major with `m` and `k` running from `-N` to `N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SymbolJson", into = "SymbolJson")]
pub struct TrigPoly2 {
    degree: usize,
    coeffs: Vec<Complex64>,
    real_valued: bool,
}

impl TrigPoly2 {
    pub fn new(degree: usize, coeffs: Vec<Complex64>, real_valued: bool) -> Result<Self> {
        let side = degree
            .checked_mul(2)
            .and_then(|d| d.checked_add(1))
            .ok_or_else(|| Error::Input("degree overflows".into()))?;
        let len = side.checked_mul(side).ok_or_else(|| Error::Input("degree overflows".into()))?;
        if coeffs.len() != len {
            return input(format!("degree {degree} needs {len} coefficients, got {}", coeffs.len()));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return input("non-finite coefficient");
        }
        let f = TrigPoly2 { degree, coeffs, real_valued };
        if real_valued {
            let n = degree as i64;
            for m in -n..=n {
                for k in -n..=n {
                    let d = (f.coeff(-m, -k) - f.coeff(m, k).conj()).norm();
                    if d > REAL_SYMMETRY_TOL {
                        return input(format!("real-valued symbol violates conjugate symmetry at ({m},{k})"));
                    }
                }
            }
        }
        Ok(f)
    }

    pub fn zero(degree: usize) -> Self {
        let side = 2 * degree + 1;
        TrigPoly2 { degree, coeffs: vec![Complex64::default(); side * side], real_valued: true }
    }

    pub fn constant(c: Complex64) -> Self {
        TrigPoly2 { degree: 0, coeffs: vec![c], real_valued: c.im == 0.0 }
    }

    /// Sum of the given modes `(m, k, c)` on the smallest box containing them.
    /// Repeated modes add up.
    pub fn from_modes(modes: &[(i64, i64, Complex64)]) -> Self {
        let degree = modes.iter().map(|&(m, k, _)| m.unsigned_abs().max(k.unsigned_abs())).max().unwrap_or(0) as usize;
        let mut f = TrigPoly2::zero(degree);
        for &(m, k, c) in modes {
            let i = f.index(m, k);
            f.coeffs[i] += c;
        }
        f.real_valued = f.is_conjugate_symmetric();
        f
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_real_valued(&self) -> bool {
        self.real_valued
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    fn side(&self) -> usize {
        2 * self.degree + 1
    }

    fn index(&self, m: i64, k: i64) -> usize {
        let n = self.degree as i64;
        ((m + n) as usize) * self.side() + (k + n) as usize
    }

    /// `c_{m,k}`, zero outside the coefficient box.
    pub fn coeff(&self, m: i64, k: i64) -> Complex64 {
        let n = self.degree as i64;
        if m.abs() > n || k.abs() > n {
            return Complex64::default();
        }
        self.coeffs[self.index(m, k)]
    }

    fn frequencies(&self) -> impl Iterator<Item = i64> + Clone {
        let n = self.degree as i64;
        -n..=n
    }

    fn is_conjugate_symmetric(&self) -> bool {
        let n = self.degree as i64;
        (-n..=n).all(|m| (-n..=n).all(|k| (self.coeff(-m, -k) - self.coeff(m, k).conj()).norm() <= REAL_SYMMETRY_TOL))
    }

    /// `c · f`. Real-valuedness is kept only for real `c`.
    pub fn scale(&self, c: Complex64) -> TrigPoly2 {
        TrigPoly2 {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|z| z * c).collect(),
            real_valued: self.real_valued && c.im == 0.0,
        }
    }

    /// Sum of two symbols, on the larger coefficient box.
    pub fn add(&self, other: &TrigPoly2) -> TrigPoly2 {
        let degree = self.degree.max(other.degree);
        let mut out = TrigPoly2::zero(degree);
        let n = degree as i64;
        for m in -n..=n {
            for k in -n..=n {
                let i = out.index(m, k);
                out.coeffs[i] = self.coeff(m, k) + other.coeff(m, k);
            }
        }
        out.real_valued = self.real_valued && other.real_valued;
        out
    }

    /// Applies `g` to every coefficient, re-imposing conjugate symmetry when the
    /// symbol is real-valued.
    pub fn map_coeffs(&self, mut g: impl FnMut(Complex64) -> Complex64) -> TrigPoly2 {
        let mut out = TrigPoly2 {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|&c| g(c)).collect(),
            real_valued: self.real_valued,
        };
        if out.real_valued {
            out.symmetrize();
        }
        out
    }

    fn symmetrize(&mut self) {
        let old = self.coeffs.clone();
        let n = self.degree as i64;
        for m in -n..=n {
            for k in -n..=n {
                let a = old[self.index(m, k)];
                let b = old[self.index(-m, -k)];
                let i = self.index(m, k);
                self.coeffs[i] = (a + b.conj()) * 0.5;
            }
        }
    }

    /// Largest coefficient modulus.
    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |a, c| a.max(c.norm()))
    }

    fn phases(&self, t: f64) -> Vec<Complex64> {
        self.frequencies().map(|m| Complex64::cis(m as f64 * t)).collect()
    }

    /// `h_m(y) = Σ_k c_{m,k} e^{iky}` for every `m`.
    fn row_sums(&self, y: f64) -> Vec<Complex64> {
        let ey = self.phases(y);
        let side = self.side();
        (0..side)
            .map(|mi| (0..side).map(|ki| self.coeffs[mi * side + ki] * ey[ki]).sum())
            .collect()
    }

    /// `v_k(x) = Σ_m c_{m,k} e^{imx}` for every `k`.
    fn column_sums(&self, x: f64) -> Vec<Complex64> {
        let ex = self.phases(x);
        let side = self.side();
        (0..side)
            .map(|ki| (0..side).map(|mi| self.coeffs[mi * side + ki] * ex[mi]).sum())
            .collect()
    }

    /// Per-frequency weights `w_m` with `(e^{im a} - e^{im b}) / (a - b) = w_m`,
    /// or `i m e^{im (a+b)/2}` when `a` and `b` coincide.
    fn difference_weights(&self, a: f64, b: f64) -> Vec<Complex64> {
        let mid = 0.5 * (a + b);
        let h = a - b;
        let coincident = h.abs() < COINCIDENT_THRESHOLD;
        self.frequencies()
            .map(|m| {
                let m = m as f64;
                let phase = Complex64::cis(m * mid);
                if coincident {
                    phase * Complex64::new(0.0, m)
                } else {
                    phase * Complex64::new(0.0, 2.0 * (0.5 * m * h).sin() / h)
                }
            })
            .collect()
    }

    pub fn eval(&self, x: f64, y: f64) -> Complex64 {
        let ex = self.phases(x);
        self.row_sums(y).iter().zip(&ex).map(|(h, e)| h * e).sum()
    }

    pub fn partial_x(&self, x: f64, y: f64) -> Complex64 {
        self.frequencies()
            .zip(self.row_sums(y))
            .map(|(m, h)| h * Complex64::cis(m as f64 * x) * Complex64::new(0.0, m as f64))
            .sum()
    }

    pub fn partial_y(&self, x: f64, y: f64) -> Complex64 {
        self.frequencies()
            .zip(self.column_sums(x))
            .map(|(k, v)| v * Complex64::cis(k as f64 * y) * Complex64::new(0.0, k as f64))
            .sum()
    }

    /// `(f(x1, y) - f(x2, y)) / (x1 - x2)`, and `∂f/∂x` at the midpoint when
    /// `|x1 - x2| < 1e-7`. Symmetric in `x1, x2` bit for bit.
    pub fn divided_difference_x(&self, x1: f64, x2: f64, y: f64) -> Complex64 {
        let w = self.difference_weights(x1, x2);
        self.row_sums(y).iter().zip(&w).map(|(h, w)| h * w).sum()
    }

    /// `(f(x, y1) - f(x, y2)) / (y1 - y2)`, mirror of [`Self::divided_difference_x`].
    pub fn divided_difference_y(&self, x: f64, y1: f64, y2: f64) -> Complex64 {
        let w = self.difference_weights(y1, y2);
        self.column_sums(x).iter().zip(&w).map(|(v, w)| v * w).sum()
    }

    /// Divided differences in the first slot on a grid, flattened as
    /// `[j][k][l]` over `x1s × x2s × ys`. Agrees bit for bit with the
    /// pointwise routine.
    pub fn divided_difference_x_table(&self, x1s: &[f64], x2s: &[f64], ys: &[f64]) -> Vec<Complex64> {
        let rows: Vec<Vec<Complex64>> = ys.iter().map(|&y| self.row_sums(y)).collect();
        let mut out = Vec::with_capacity(x1s.len() * x2s.len() * ys.len());
        for &a in x1s {
            for &b in x2s {
                let w = self.difference_weights(a, b);
                for h in &rows {
                    out.push(h.iter().zip(&w).map(|(h, w)| h * w).sum());
                }
            }
        }
        out
    }

    /// Divided differences in the second slot, flattened as `[j][k][l]` over
    /// `xs × y1s × y2s`.
    pub fn divided_difference_y_table(&self, xs: &[f64], y1s: &[f64], y2s: &[f64]) -> Vec<Complex64> {
        let weights: Vec<Vec<Complex64>> =
            y1s.iter().flat_map(|&a| y2s.iter().map(move |&b| (a, b))).map(|(a, b)| self.difference_weights(a, b)).collect();
        let mut out = Vec::with_capacity(xs.len() * y1s.len() * y2s.len());
        for &x in xs {
            let cols = self.column_sums(x);
            for w in &weights {
                out.push(cols.iter().zip(w).map(|(v, w)| v * w).sum());
            }
        }
        out
    }

    /// Number of the dyadic ring containing `max(|m|, |k|) = r`: ring 0 holds
    /// `r ≤ 1`, ring `n ≥ 1` holds `2^{n-1} < r ≤ 2^n`.
    pub fn block_of(r: u64) -> usize {
        if r <= 1 {
            0
        } else {
            (u64::BITS - (r - 1).leading_zeros()) as usize
        }
    }

    /// Index `L` of the last dyadic block for degree `N`:
    /// `ceil(log2(max(N, 1))) + 1`.
    pub fn last_block(degree: usize) -> usize {
        Self::block_of(degree.max(1) as u64) + 1
    }

    /// Grid estimate of `sup |g|` for the sub-polynomial `g` keeping only the
    /// coefficients selected by `keep(m, k)`.
    fn grid_sup(&self, oversample: usize, keep: impl Fn(i64, i64) -> bool) -> f64 {
        let side = self.side();
        let n = self.degree as i64;
        let mut any = false;
        let masked: Vec<Complex64> = (0..side * side)
            .map(|i| {
                let m = (i / side) as i64 - n;
                let k = (i % side) as i64 - n;
                if keep(m, k) && self.coeffs[i] != Complex64::default() {
                    any = true;
                    self.coeffs[i]
                } else {
                    Complex64::default()
                }
            })
            .collect();
        if !any {
            return 0.0;
        }
        let g = oversample * (2 * self.degree + 2);
        let step = std::f64::consts::TAU / g as f64;
        let phases: Vec<Vec<Complex64>> = (0..g).map(|i| self.phases(i as f64 * step)).collect();
        let mut sup = 0.0_f64;
        for ey in &phases {
            let h: Vec<Complex64> = (0..side)
                .map(|mi| (0..side).map(|ki| masked[mi * side + ki] * ey[ki]).sum())
                .collect();
            for ex in &phases {
                let v: Complex64 = h.iter().zip(ex).map(|(h, e)| h * e).sum();
                sup = sup.max(v.norm());
            }
        }
        sup
    }

    /// Grid estimate of `sup |f|` on `[0, 2π)²`.
    pub fn sup_norm(&self, oversample: usize) -> f64 {
        self.grid_sup(oversample, |_, _| true)
    }

    /// Dyadic-block Besov norm surrogate `Σ_n 2^n ‖f_n‖_∞`, where `f_n` keeps
    /// the frequencies of ring `n` and sup-norms are grid maxima on
    /// `(oversample (2N + 2))²` points.
    pub fn besov_norm(&self, oversample: usize) -> Result<BesovProfile> {
        if oversample < 4 {
            return input(format!("oversample must be at least 4, got {oversample}"));
        }
        let blocks = Self::last_block(self.degree) + 1;
        let block_norms: Vec<f64> = (0..blocks)
            .map(|b| {
                self.grid_sup(oversample, |m, k| Self::block_of(m.unsigned_abs().max(k.unsigned_abs())) == b)
            })
            .collect();
        Ok(BesovProfile::new(block_norms))
    }
}

/// Per-block sup-norms and their weighted sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BesovProfile {
    pub block_norms: Vec<f64>,
    pub besov_norm: f64,
}

impl BesovProfile {
    pub fn new(block_norms: Vec<f64>) -> Self {
        let besov_norm = block_norms.iter().enumerate().map(|(n, b)| (1u64 << n.min(62)) as f64 * b).sum();
        BesovProfile { block_norms, besov_norm }
    }
}

/// Wire form of a symbol:
/// `{ "N": n, "re": [(2N+1)²], "im": [(2N+1)²], "real_valued": bool }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolJson {
    #[serde(rename = "N")]
    pub degree: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    pub real_valued: bool,
}

impl TryFrom<SymbolJson> for TrigPoly2 {
    type Error = Error;
    fn try_from(v: SymbolJson) -> Result<Self> {
        if v.re.len() != v.im.len() {
            return input("re and im lengths differ");
        }
        let coeffs = v.re.iter().zip(&v.im).map(|(&re, &im)| Complex64::new(re, im)).collect();
        TrigPoly2::new(v.degree, coeffs, v.real_valued)
    }
}

impl From<TrigPoly2> for SymbolJson {
    fn from(f: TrigPoly2) -> Self {
        SymbolJson {
            degree: f.degree,
            re: f.coeffs.iter().map(|c| c.re).collect(),
            im: f.coeffs.iter().map(|c| c.im).collect(),
            real_valued: f.real_valued,
        }
    }
}

pub fn random_symbol_from<R: Rng + ?Sized>(rng: &mut R, degree: usize, real_valued: bool) -> TrigPoly2 {
    let side = 2 * degree + 1;
    let coeffs = (0..side * side).map(|_| unit_disc(rng)).collect();
    let mut f = TrigPoly2 { degree, coeffs, real_valued };
    if real_valued {
        f.symmetrize();
    }
    f
}

/// Seeded random symbol with coefficients in the closed unit disc.
pub fn random_symbol(degree: usize, seed: u64, real_valued: bool) -> TrigPoly2 {
    random_symbol_from(&mut seeded(seed), degree, real_valued)
}
