//! Tridiagonal direct solves (Thomas algorithm).
//!
//! The Newton systems assembled by the solver are strictly diagonally
//! dominant by columns (M/dt on the diagonal, nonpositive couplings off it),
//! so elimination without pivoting is stable for every system this crate
//! builds.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Mutable tridiagonal system; `lower[i]` couples row i+1 to column i,
/// `upper[i]` couples row i to column i+1.
#[derive(Debug, Clone)]
pub struct Tridiag<T> {
    pub lower: Vec<T>,
    pub diag: Vec<T>,
    pub upper: Vec<T>,
}

impl<T: Real> Tridiag<T> {
    pub fn zeros(n: usize) -> Self {
        Tridiag {
            lower: vec![T::zero(); n.saturating_sub(1)],
            diag: vec![T::zero(); n],
            upper: vec![T::zero(); n.saturating_sub(1)],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Solve `self * x = rhs` in place; `rhs` holds the solution on return.
    pub fn solve(&self, rhs: &mut [T]) -> Result<()> {
        let n = self.len();
        assert_eq!(rhs.len(), n);
        if n == 0 {
            return Ok(());
        }
        let mut c = vec![T::zero(); n.saturating_sub(1)];
        let mut denom = self.diag[0];
        if denom == T::zero() {
            return Err(Error::StepFailure("zero pivot in tridiagonal solve".into()));
        }
        if n > 1 {
            c[0] = self.upper[0] / denom;
        }
        rhs[0] = rhs[0] / denom;
        for i in 1..n {
            denom = self.diag[i] - self.lower[i - 1] * c[i - 1];
            if denom == T::zero() {
                return Err(Error::StepFailure("zero pivot in tridiagonal solve".into()));
            }
            if i < n - 1 {
                c[i] = self.upper[i] / denom;
            }
            rhs[i] = (rhs[i] - self.lower[i - 1] * rhs[i - 1]) / denom;
        }
        for i in (0..n - 1).rev() {
            rhs[i] = rhs[i] - c[i] * rhs[i + 1];
        }
        Ok(())
    }

    /// Matrix-vector product (for residual checks in tests).
    pub fn apply(&self, x: &[T]) -> Vec<T> {
        let n = self.len();
        let mut out = vec![T::zero(); n];
        for i in 0..n {
            let mut v = self.diag[i] * x[i];
            if i > 0 {
                v = v + self.lower[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                v = v + self.upper[i] * x[i + 1];
            }
            out[i] = v;
        }
        out
    }
}
