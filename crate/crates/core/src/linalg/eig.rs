use super::matrix::{ComplexMatrix, C64, ZERO};
use super::tolerances::Tolerances;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Spectral decomposition `A = V diag(values) V^dag`, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl Eigen {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.col(k)
    }

    /// Applies `f` to the spectrum and reassembles `V f(Λ) V^dag`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lam) in self.values.iter().enumerate() {
            let w = f(lam);
            if w == 0.0 {
                continue;
            }
            let v = self.vectors.col(k);
            for i in 0..n {
                let vi = v[i] * w;
                for j in 0..n {
                    out[(i, j)] += vi * v[j].conj();
                }
            }
        }
        out
    }

    /// Projector onto the span of the eigenvectors with the given indices.
    pub fn projector(&self, indices: &[usize]) -> ComplexMatrix {
        let n = self.values.len();
        let mut out = ComplexMatrix::zeros(n, n);
        for &k in indices {
            out += &ComplexMatrix::projector(&self.vectors.col(k));
        }
        out
    }

    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// Groups consecutive eigenvalues closer than `gap` (values are sorted).
    pub fn clusters(&self, gap: f64) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = Vec::new();
        for (k, &v) in self.values.iter().enumerate() {
            match out.last_mut() {
                Some(last) if (self.values[*last.last().unwrap()] - v).abs() <= gap => last.push(k),
                _ => out.push(vec![k]),
            }
        }
        out
    }
}

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
///
/// The Hermiticity check is scaled by `max(1, ‖A‖_F)`.
pub fn hermitian_eig(a: &ComplexMatrix, tol: &Tolerances) -> Result<Eigen> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let scale = a.frobenius_norm().max(1.0);
    let defect = a.hermiticity_defect();
    if defect > tol.atol_equality * scale {
        return Err(Error::NonHermitian { asymmetry: defect });
    }
    let n = a.rows();
    let mut m = a.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let target = 1e-14 * scale;

    let mut converged = n <= 1;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&m) <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&m) > 1e-11 * scale {
        return Err(Error::NoConvergence { routine: "hermitian_eig", budget: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(Eigen { values, vectors })
}

fn off_diagonal_norm(m: &ComplexMatrix) -> f64 {
    let n = m.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += m[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn rotate(m: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let n = m.rows();
    let b = m[(p, q)];
    let g = b.norm();
    if g < 1e-300 {
        return;
    }
    // Rephase column q so that the (p, q) entry becomes real and positive.
    let phase = b.conj() / g;
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    let theta = (aqq - app) / (2.0 * g);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    for i in 0..n {
        let mp = m[(i, p)];
        let mq = m[(i, q)] * phase;
        m[(i, p)] = mp * c - mq * s;
        m[(i, q)] = mp * s + mq * c;
        let vp = v[(i, p)];
        let vq = v[(i, q)] * phase;
        v[(i, p)] = vp * c - vq * s;
        v[(i, q)] = vp * s + vq * c;
    }
    let cphase = phase.conj();
    for j in 0..n {
        let mp = m[(p, j)];
        let mq = m[(q, j)] * cphase;
        m[(p, j)] = mp * c - mq * s;
        m[(q, j)] = mp * s + mq * c;
    }
    m[(p, q)] = ZERO;
    m[(q, p)] = ZERO;
    m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
    m[(q, q)] = C64::new(m[(q, q)].re, 0.0);
}
