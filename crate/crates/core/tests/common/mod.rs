//! Reference implementations that share nothing with the library's numerics
//! beyond matrix products: a real Jacobi eigensolver on the realification of
//! Hermitian matrices, projection-sum operator integrals and a Taylor
//! matrix exponential.
#![allow(dead_code)]

use nalgebra::DMatrix;
use triop::Complex64;

pub type M = DMatrix<Complex64>;

/// Eigenvalues (ascending) and orthonormal eigenvectors of a real symmetric
/// matrix by cyclic Jacobi sweeps.
pub fn jacobi_symmetric(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let mut a = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[(i, j)].powi(2)).sum();
        let diag: f64 = (0..n).map(|i| a[(i, i)].powi(2)).sum();
        if off <= 1e-30 * diag.max(1e-300) || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    (values, vectors)
}

/// `[[Re H, -Im H], [Im H, Re H]]`, whose spectrum is that of `H` doubled.
fn realify(h: &M) -> DMatrix<f64> {
    let n = h.nrows();
    DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let z = h[(r % n, c % n)];
        match (r < n, c < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Eigenvalues of a Hermitian matrix, ascending, with multiplicity.
pub fn hermitian_eigenvalues(h: &M) -> Vec<f64> {
    let (values, _) = jacobi_symmetric(&realify(h));
    values.iter().step_by(2).copied().collect()
}

/// Distinct eigenvalues (clusters within `tol`, averaged) and the orthogonal
/// projections onto their eigenspaces.
pub fn spectral_projections(h: &M, tol: f64) -> Vec<(f64, M)> {
    let n = h.nrows();
    let (values, vectors) = jacobi_symmetric(&realify(h));
    let mut out = Vec::new();
    let mut start = 0;
    while start < values.len() {
        let mut end = start + 1;
        while end < values.len() && values[end] - values[end - 1] <= tol {
            end += 1;
        }
        let block = vectors.columns(start, end - start);
        let real_proj = &block * block.transpose();
        let p = M::from_fn(n, n, |r, c| Complex64::new(real_proj[(r, c)], real_proj[(r + n, c)]));
        let mean = values[start..end].iter().sum::<f64>() / (end - start) as f64;
        out.push((mean, p));
        start = end;
    }
    out
}

pub fn default_tol(h: &M) -> f64 {
    1e-9 * (1.0 + h.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

pub fn projections(h: &M) -> Vec<(f64, M)> {
    spectral_projections(h, default_tol(h))
}

/// Singular values, descending, as the nonnegative half of the spectrum of
/// the Hermitian dilation `[[0, T], [T*, 0]]`.
pub fn singular_values(t: &M) -> Vec<f64> {
    let n = t.nrows();
    let mut dilation = M::zeros(2 * n, 2 * n);
    dilation.view_mut((0, n), (n, n)).copy_from(t);
    dilation.view_mut((n, 0), (n, n)).copy_from(&t.adjoint());
    let mut s = hermitian_eigenvalues(&dilation);
    s.reverse();
    s.truncate(n);
    s.iter().map(|x| x.max(0.0)).collect()
}

pub fn schatten(t: &M, p: f64) -> f64 {
    let s = singular_values(t);
    if p.is_infinite() {
        return s[0];
    }
    s.iter().map(|x| x.powf(p)).sum::<f64>().powf(1.0 / p)
}

pub fn doi_sum(phi: impl Fn(f64, f64) -> Complex64, a: &M, t: &M, b: &M) -> M {
    let n = t.nrows();
    let mut out = M::zeros(n, n);
    for (x, p) in projections(a) {
        for (y, q) in projections(b) {
            out += (&p * t * &q) * phi(x, y);
        }
    }
    out
}

pub fn toi_sum(psi: impl Fn(f64, f64, f64) -> Complex64, a1: &M, t: &M, a2: &M, r: &M, a3: &M) -> M {
    let n = t.nrows();
    let mut out = M::zeros(n, n);
    let (e1, e2, e3) = (projections(a1), projections(a2), projections(a3));
    for (x1, p) in &e1 {
        for (x2, q) in &e2 {
            for (x3, s) in &e3 {
                out += (p * t * q * r * s) * psi(*x1, *x2, *x3);
            }
        }
    }
    out
}

/// `Σ Ψ P_j Q_k Q S_l` with no operator between the first two measures.
pub fn adjacent_sum(psi: impl Fn(f64, f64, f64) -> Complex64, a1: &M, a2: &M, q_op: &M, a3: &M) -> M {
    let n = q_op.nrows();
    toi_sum(psi, a1, &M::identity(n, n), a2, q_op, a3)
}

/// `trace((Σ Ψ Q_k R S_l Q P_j) T)`.
pub fn dual_first_sum(psi: impl Fn(f64, f64, f64) -> Complex64, a1: &M, a2: &M, a3: &M, t: &M, r: &M, q_op: &M) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (x1, p) in projections(a1) {
        for (x2, q) in projections(a2) {
            for (x3, s) in projections(a3) {
                acc += (&q * r * &s * q_op * &p * t).trace() * psi(x1, x2, x3);
            }
        }
    }
    acc
}

/// `trace((Σ Ψ S_l Q P_j T Q_k) R)`.
pub fn dual_second_sum(psi: impl Fn(f64, f64, f64) -> Complex64, a1: &M, a2: &M, a3: &M, t: &M, r: &M, q_op: &M) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (x1, p) in projections(a1) {
        for (x2, q) in projections(a2) {
            for (x3, s) in projections(a3) {
                acc += (&s * q_op * &p * t * &q * r).trace() * psi(x1, x2, x3);
            }
        }
    }
    acc
}

/// `exp(M)` by scaling and squaring a 30-term Taylor series.
pub fn expm(m: &M) -> M {
    let n = m.nrows();
    let norm: f64 = m.iter().map(|z| z.norm()).sum();
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let a = m / Complex64::from(2f64.powi(squarings));
    let mut term = M::identity(n, n);
    let mut sum = M::identity(n, n);
    for k in 1..30 {
        term = &term * &a / Complex64::from(k as f64);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

pub fn i_times(m: &M) -> M {
    m * Complex64::new(0.0, 1.0)
}

pub fn rel_diff(a: &M, b: &M) -> f64 {
    (a - b).norm() / (1.0 + b.norm())
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn cm(n: usize, entries: &[(f64, f64)]) -> M {
    M::from_row_iterator(n, n, entries.iter().map(|&(re, im)| Complex64::new(re, im)))
}
