use num_complex::Complex64;

use crate::error::Result;
use crate::symbol::TrigPoly2;

/// Where a three-variable kernel comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    DividedDifferenceX,
    DividedDifferenceY,
    HaagerupRep,
    AdHoc,
}

/// A function `Ψ(x1, x2, x3)` sampled on the spectra of three spectral
/// measures.
pub trait Kernel3: Sync {
    fn eval(&self, x1: f64, x2: f64, x3: f64) -> Result<Complex64>;

    fn provenance(&self) -> Provenance;

    /// All values on `g1 × g2 × g3`, flattened `[j][k][l]`.
    fn tabulate(&self, g1: &[f64], g2: &[f64], g3: &[f64]) -> Result<Vec<Complex64>> {
        let mut out = Vec::with_capacity(g1.len() * g2.len() * g3.len());
        for &a in g1 {
            for &b in g2 {
                for &c in g3 {
                    out.push(self.eval(a, b, c)?);
                }
            }
        }
        Ok(out)
    }
}

/// A kernel given by a plain closure.
pub struct FnKernel<F>(pub F);

impl<F> Kernel3 for FnKernel<F>
where
    F: Fn(f64, f64, f64) -> Complex64 + Sync,
{
    fn eval(&self, x1: f64, x2: f64, x3: f64) -> Result<Complex64> {
        Ok((self.0)(x1, x2, x3))
    }

    fn provenance(&self) -> Provenance {
        Provenance::AdHoc
    }
}

/// `(x1, x2, y) ↦ (f(x1, y) - f(x2, y)) / (x1 - x2)`.
pub struct DividedDifferenceX<'a>(pub &'a TrigPoly2);

impl Kernel3 for DividedDifferenceX<'_> {
    fn eval(&self, x1: f64, x2: f64, y: f64) -> Result<Complex64> {
        Ok(self.0.divided_difference_x(x1, x2, y))
    }

    fn provenance(&self) -> Provenance {
        Provenance::DividedDifferenceX
    }

    fn tabulate(&self, g1: &[f64], g2: &[f64], g3: &[f64]) -> Result<Vec<Complex64>> {
        Ok(self.0.divided_difference_x_table(g1, g2, g3))
    }
}

/// `(x, y1, y2) ↦ (f(x, y1) - f(x, y2)) / (y1 - y2)`.
pub struct DividedDifferenceY<'a>(pub &'a TrigPoly2);

impl Kernel3 for DividedDifferenceY<'_> {
    fn eval(&self, x: f64, y1: f64, y2: f64) -> Result<Complex64> {
        Ok(self.0.divided_difference_y(x, y1, y2))
    }

    fn provenance(&self) -> Provenance {
        Provenance::DividedDifferenceY
    }

    fn tabulate(&self, g1: &[f64], g2: &[f64], g3: &[f64]) -> Result<Vec<Complex64>> {
        Ok(self.0.divided_difference_y_table(g1, g2, g3))
    }
}

/// `Ψ` with its arguments rotated: `(a, b, c) ↦ Ψ(c, a, b)` for
/// `Rotation::Left`, `(a, b, c) ↦ Ψ(b, c, a)` for `Rotation::Right`.
pub(crate) struct Rotated<'a> {
    pub inner: &'a dyn Kernel3,
    pub rotation: Rotation,
}

#[derive(Clone, Copy)]
pub(crate) enum Rotation {
    Left,
    Right,
}

impl Kernel3 for Rotated<'_> {
    fn eval(&self, a: f64, b: f64, c: f64) -> Result<Complex64> {
        match self.rotation {
            Rotation::Left => self.inner.eval(c, a, b),
            Rotation::Right => self.inner.eval(b, c, a),
        }
    }

    fn provenance(&self) -> Provenance {
        self.inner.provenance()
    }
}
