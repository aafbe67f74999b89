use super::matrix::{ComplexMatrix, C64};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Thin singular value decomposition `A V = U Σ` from one-sided Jacobi.
///
/// `v` is always square (cols × cols). Columns of `u` belonging to zero
/// singular values are left as zero vectors.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub sigma: Vec<f64>,
    pub v: ComplexMatrix,
}

impl Svd {
    pub fn max(&self) -> f64 {
        self.sigma.first().copied().unwrap_or(0.0)
    }

    /// Cut applied to singular values for rank and kernel decisions.
    pub fn cutoff(&self, threshold: f64) -> f64 {
        threshold * self.max().max(1.0)
    }

    pub fn rank(&self, threshold: f64) -> usize {
        let cut = self.cutoff(threshold);
        self.sigma.iter().filter(|&&s| s > cut).count()
    }

    /// Right singular vectors spanning the numerical kernel.
    pub fn kernel(&self, threshold: f64) -> Vec<Vec<C64>> {
        let cut = self.cutoff(threshold);
        self.sigma.iter().enumerate().filter(|(_, &s)| s <= cut).map(|(k, _)| self.v.col(k)).collect()
    }
}

/// One-sided (Hestenes) Jacobi SVD for complex matrices of any shape.
pub fn svd(a: &ComplexMatrix) -> Result<Svd> {
    let (m, n) = (a.rows(), a.cols());
    let mut u = a.clone();
    let mut v = ComplexMatrix::identity(n);
    let eps = 1e-14;
    let floor = (1e-15 * a.frobenius_norm()).powi(2);

    let mut converged = n <= 1;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = C64::new(0.0, 0.0);
                for i in 0..m {
                    let up = u[(i, p)];
                    let uq = u[(i, q)];
                    alpha += up.norm_sqr();
                    beta += uq.norm_sqr();
                    gamma += up.conj() * uq;
                }
                let g = gamma.norm();
                if g <= eps * (alpha * beta).sqrt() || alpha <= floor || beta <= floor || g < 1e-300 {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let cphase = phase.conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = if zeta == 0.0 { 1.0 } else { zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt()) };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let up = u[(i, p)];
                    let uq = u[(i, q)] * cphase;
                    u[(i, p)] = up * c - uq * s;
                    u[(i, q)] = up * s + uq * c;
                }
                for i in 0..n {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)] * cphase;
                    v[(i, p)] = vp * c - vq * s;
                    v[(i, q)] = vp * s + vq * c;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence { routine: "svd", budget: MAX_SWEEPS });
    }

    let norms: Vec<f64> = (0..n).map(|j| u.col(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let sigma: Vec<f64> = order.iter().map(|&k| norms[k]).collect();
    let v_sorted = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    let u_sorted = ComplexMatrix::from_fn(m, n, |i, j| {
        let s = norms[order[j]];
        if s > 1e-300 {
            u[(i, order[j])] / s
        } else {
            C64::new(0.0, 0.0)
        }
    });
    Ok(Svd { u: u_sorted, sigma, v: v_sorted })
}
