//! Correlation kernel `K(x,y) = √(w(x)w(y)) Σ_{k<m} p_k(x) p_k(y) / h_k`
//! with `w(x) = (1-x²)^a`, and the one- and two-point densities on `[0, 1]`.

use thiserror::Error;

use crate::jacobi::{jacobi_recurrence, ln_norm_h, EnsembleParams};
use crate::quadrature::gauss_legendre;
use crate::special::CompensatedSum;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("kernel argument {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error("the two-point density needs m >= 2, got m = {0}")]
    TooFewModes(u32),
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelContext {
    params: EnsembleParams,
    inv_h: Vec<f64>,
}

impl KernelContext {
    pub fn new(params: EnsembleParams) -> Self {
        let a = params.a() as f64;
        let inv_h = (0..params.m()).map(|k| (-ln_norm_h(a, k)).exp()).collect();
        Self { params, inv_h }
    }

    pub fn params(&self) -> &EnsembleParams {
        &self.params
    }

    /// Cached `1/h_k`, `k = 0..m`.
    pub fn inv_norms(&self) -> &[f64] {
        &self.inv_h
    }

    /// Orthonormal functions `φ_k(x) = √(w(x)/h_k) p_k(x)` at `x` with `comp = 1 - x`.
    /// Valid for `x ∈ [-1, 1]`.
    pub fn basis_pair(&self, x: f64, comp: f64) -> Vec<f64> {
        let a = self.params.a() as f64;
        let root_w = if self.params.a() == 0 {
            1.0
        } else {
            (comp * (1.0 + x)).max(0.0).powf(a / 2.0)
        };
        let m = self.params.m();
        jacobi_recurrence(a, a, 2 * (m - 1), x)
            .into_iter()
            .step_by(2)
            .zip(&self.inv_h)
            .map(|(p, ih)| root_w * p * ih.sqrt())
            .collect()
    }

    /// `K(x, x)` from `(x, 1 - x)`.
    pub fn diag_pair(&self, x: f64, comp: f64) -> f64 {
        let mut acc = CompensatedSum::new();
        for phi in self.basis_pair(x, comp) {
            acc.add(phi * phi);
        }
        acc.value()
    }

    pub fn kernel_eval(&self, x: f64, y: f64) -> Result<f64, KernelError> {
        check_unit(x)?;
        check_unit(y)?;
        Ok(self.kernel_unchecked(x, y))
    }

    fn kernel_unchecked(&self, x: f64, y: f64) -> f64 {
        let px = self.basis_pair(x, 1.0 - x);
        let py = self.basis_pair(y, 1.0 - y);
        let mut acc = CompensatedSum::new();
        for (u, v) in px.iter().zip(&py) {
            acc.add(u * v);
        }
        acc.value()
    }

    /// `g₁(x) = K(x, x) / m`.
    pub fn density_one(&self, x: f64) -> Result<f64, KernelError> {
        check_unit(x)?;
        Ok(self.diag_pair(x, 1.0 - x) / self.params.m() as f64)
    }

    /// `∫₀ˣ g₁`, exact up to rounding: `K(t, t)` is a polynomial of degree
    /// `4(m-1) + 2a`, integrated by a Gauss–Legendre rule on `[0, x]`.
    pub fn cdf_one(&self, x: f64) -> Result<f64, KernelError> {
        check_unit(x)?;
        let nodes = (2 * self.params.m() + self.params.a()) as usize;
        let mut acc = CompensatedSum::new();
        for (t, w) in gauss_legendre(nodes) {
            let u = t * x;
            acc.add(w * self.diag_pair(u, 1.0 - u));
        }
        Ok((x * acc.value() / self.params.m() as f64).clamp(0.0, 1.0))
    }

    /// `g₂(x, y) = (K(x,x)K(y,y) - K(x,y)²) / (m(m-1))`.
    pub fn density_two(&self, x: f64, y: f64) -> Result<f64, KernelError> {
        let m = self.params.m();
        if m < 2 {
            return Err(KernelError::TooFewModes(m));
        }
        check_unit(x)?;
        check_unit(y)?;
        let kxy = self.kernel_unchecked(x, y);
        let det = self.diag_pair(x, 1.0 - x) * self.diag_pair(y, 1.0 - y) - kxy * kxy;
        Ok(det.max(0.0) / (m as f64 * (m - 1) as f64))
    }
}

fn check_unit(x: f64) -> Result<(), KernelError> {
    if !(0.0..=1.0).contains(&x) {
        return Err(KernelError::OutOfRange(x));
    }
    Ok(())
}
