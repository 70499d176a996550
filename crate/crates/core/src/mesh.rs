//! 1D meshes and the discrete weighted Neumann/Dirichlet operators.
//!
//! The discretization is a two-point flux finite-volume scheme: each cell
//! carries its exact ν-mass, and each interior edge carries a
//! transmissibility equal to the inverse of the exact resistance integral
//! ∫ ρ_μ^{-1} dx between the adjacent cell midpoints. Exact resistance
//! integrals generalize harmonic averaging and stay consistent when ρ_μ
//! degenerates at an endpoint; a divergent resistance simply yields a
//! zero-transmissibility (no-flux) edge. Under Neumann conditions the
//! stiffness action annihilates constants by construction, which is what
//! makes the time stepping conserve the ν-mass exactly.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::weights::WeightSpec;

/// Cell-centered grid function.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T>(pub Vec<T>);

impl<T: Real> Field<T> {
    pub fn constant(n: usize, value: T) -> Self {
        Field(vec![value; n])
    }

    pub fn zeros(n: usize) -> Self {
        Field(vec![T::zero(); n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_abs(&self) -> T {
        self.0
            .iter()
            .fold(T::zero(), |acc, &v| if v.abs() > acc { v.abs() } else { acc })
    }

    pub fn all_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// Componentwise map.
    pub fn map(&self, f: impl Fn(T) -> T) -> Field<T> {
        Field(self.0.iter().map(|&v| f(v)).collect())
    }
}

impl<T> std::ops::Index<usize> for Field<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

impl<T> std::ops::IndexMut<usize> for Field<T> {
    fn index_mut(&mut self, i: usize) -> &mut T {
        &mut self.0[i]
    }
}

/// Boundary condition of the assembled operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    /// Zero weighted conormal flux; conserves the ν-mass.
    Neumann,
    /// Homogeneous Dirichlet via a zero ghost value at each endpoint.
    Dirichlet,
}

/// Strictly increasing edge coordinates spanning a domain interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D<T> {
    edges: Vec<T>,
    grading: T,
}

impl<T: Real> Mesh1D<T> {
    /// Build a mesh of `n` cells on `domain`.
    ///
    /// `grading = 1` is uniform; `grading > 1` clusters cells at the left
    /// endpoint via x_i = a + (b-a)(i/n)^grading.
    pub fn build(domain: (T, T), n: usize, grading: T) -> Result<Self> {
        let (a, b) = domain;
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "mesh needs at least 2 cells, got {n}"
            )));
        }
        if !(grading >= T::one()) {
            return Err(Error::InvalidArgument(format!(
                "grading must be >= 1, got {grading}"
            )));
        }
        if !(a < b) {
            return Err(Error::InvalidArgument(format!(
                "domain ({a}, {b}) must satisfy a < b"
            )));
        }
        let nf = T::from_usize(n).unwrap();
        let mut edges = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let s = T::from_usize(i).unwrap() / nf;
            edges.push(a + (b - a) * s.powf(grading));
        }
        // exact endpoints regardless of rounding in powf
        edges[0] = a;
        edges[n] = b;
        for w in edges.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::InvalidArgument(
                    "grading collapsed adjacent edges; reduce grading or n".into(),
                ));
            }
        }
        Ok(Mesh1D { edges, grading })
    }

    pub fn n_cells(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn edges(&self) -> &[T] {
        &self.edges
    }

    pub fn grading(&self) -> T {
        self.grading
    }

    pub fn domain(&self) -> (T, T) {
        (self.edges[0], *self.edges.last().unwrap())
    }

    pub fn cell(&self, i: usize) -> (T, T) {
        (self.edges[i], self.edges[i + 1])
    }

    pub fn center(&self, i: usize) -> T {
        (self.edges[i] + self.edges[i + 1]) * T::of(0.5)
    }

    /// Sample a point function at every cell midpoint.
    pub fn sample(&self, f: impl Fn(T) -> T) -> Field<T> {
        Field((0..self.n_cells()).map(|i| f(self.center(i))).collect())
    }
}

/// Assembled mass measures and edge transmissibilities for a weight pair on
/// a mesh.
#[derive(Debug, Clone)]
pub struct DiscreteOperators<T> {
    mesh: Mesh1D<T>,
    cell_mass: Vec<T>,
    /// τ_{i+1/2} for interior edges, length n-1.
    trans: Vec<T>,
    /// Couplings of the end cells to the zero ghost value (Dirichlet only).
    boundary_trans: (T, T),
    bc: BoundaryKind,
    nu_total: T,
}

/// Assemble the discrete operators for `spec` on `mesh`.
pub fn assemble<T: Real>(
    spec: &WeightSpec<T>,
    mesh: &Mesh1D<T>,
    bc: BoundaryKind,
) -> Result<DiscreteOperators<T>> {
    let (sa, sb) = spec.domain();
    let (ma, mb) = mesh.domain();
    if sa != ma || sb != mb {
        return Err(Error::Assembly(format!(
            "spec domain ({sa}, {sb}) differs from mesh domain ({ma}, {mb})"
        )));
    }
    let n = mesh.n_cells();
    let mut cell_mass = Vec::with_capacity(n);
    for i in 0..n {
        let (lo, hi) = mesh.cell(i);
        let m = spec
            .nu_measure(lo, hi)
            .map_err(|e| Error::Assembly(format!("cell {i}: {e}")))?;
        if !m.is_finite() || m < T::zero() {
            return Err(Error::Assembly(format!("cell {i} has mass {m}")));
        }
        cell_mass.push(m);
    }
    let mut trans = Vec::with_capacity(n - 1);
    for i in 0..n - 1 {
        let r = spec.mu_resistance(mesh.center(i), mesh.center(i + 1))?;
        trans.push(if r.is_infinite() { T::zero() } else { r.recip() });
    }
    let boundary_trans = match bc {
        BoundaryKind::Neumann => (T::zero(), T::zero()),
        BoundaryKind::Dirichlet => {
            let rl = spec.mu_resistance(ma, mesh.center(0))?;
            let rr = spec.mu_resistance(mesh.center(n - 1), mb)?;
            (
                if rl.is_infinite() { T::zero() } else { rl.recip() },
                if rr.is_infinite() { T::zero() } else { rr.recip() },
            )
        }
    };
    let nu_total = cell_mass.iter().copied().sum();
    Ok(DiscreteOperators {
        mesh: mesh.clone(),
        cell_mass,
        trans,
        boundary_trans,
        bc,
        nu_total,
    })
}

impl<T: Real> DiscreteOperators<T> {
    pub fn n_cells(&self) -> usize {
        self.cell_mass.len()
    }

    pub fn mesh(&self) -> &Mesh1D<T> {
        &self.mesh
    }

    pub fn bc(&self) -> BoundaryKind {
        self.bc
    }

    pub fn cell_mass(&self) -> &[T] {
        &self.cell_mass
    }

    pub fn trans(&self) -> &[T] {
        &self.trans
    }

    pub fn boundary_trans(&self) -> (T, T) {
        self.boundary_trans
    }

    pub fn nu_total(&self) -> T {
        self.nu_total
    }

    /// Whether every interior edge carries positive transmissibility.
    pub fn connected(&self) -> bool {
        self.trans.iter().all(|&t| t > T::zero())
    }

    /// Discrete ν-mass Σ m_i f_i.
    pub fn mass(&self, f: &Field<T>) -> T {
        self.cell_mass
            .iter()
            .zip(&f.0)
            .map(|(&m, &v)| m * v)
            .sum()
    }

    /// Mean value with respect to ν.
    pub fn weighted_mean(&self, f: &Field<T>) -> T {
        self.mass(f) / self.nu_total
    }

    /// ν-weighted L^p norm; `p = ∞` gives the max norm.
    pub fn norm(&self, f: &Field<T>, p: T) -> Result<T> {
        if p.is_infinite() && p > T::zero() {
            return Ok(f.max_abs());
        }
        if !(p >= T::one()) {
            return Err(Error::InvalidArgument(format!("norm exponent {p} < 1")));
        }
        let sum: T = self
            .cell_mass
            .iter()
            .zip(&f.0)
            .map(|(&m, &v)| m * v.abs().powf(p))
            .sum();
        Ok(sum.powf(p.recip()))
    }

    /// Stiffness action (A f)_i = Σ_edges τ (f_i - f_nbr), plus the ghost
    /// couplings for Dirichlet end cells.
    pub fn apply_stiffness(&self, f: &Field<T>) -> Field<T> {
        let n = self.n_cells();
        debug_assert_eq!(f.len(), n);
        let mut out = vec![T::zero(); n];
        for (e, &tau) in self.trans.iter().enumerate() {
            let d = tau * (f.0[e] - f.0[e + 1]);
            out[e] = out[e] + d;
            out[e + 1] = out[e + 1] - d;
        }
        if self.bc == BoundaryKind::Dirichlet {
            out[0] = out[0] + self.boundary_trans.0 * f.0[0];
            out[n - 1] = out[n - 1] + self.boundary_trans.1 * f.0[n - 1];
        }
        Field(out)
    }

    /// Copy of the operators with each interior transmissibility scaled by
    /// the matching nonnegative factor, masses unchanged. Used for
    /// sensitivity studies (eigenvalue monotonicity under conductance
    /// changes).
    pub fn with_scaled_trans(&self, factors: &[T]) -> Result<Self> {
        if factors.len() != self.trans.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} factors, got {}",
                self.trans.len(),
                factors.len()
            )));
        }
        if factors.iter().any(|&f| !(f >= T::zero()) || !f.is_finite()) {
            return Err(Error::InvalidArgument(
                "scale factors must be finite and nonnegative".into(),
            ));
        }
        let mut out = self.clone();
        for (t, &f) in out.trans.iter_mut().zip(factors) {
            *t = *t * f;
        }
        Ok(out)
    }

    /// Dirichlet energy f^T A f = Σ τ (Δf)^2 (+ ghost terms), evaluated
    /// edgewise so it is exact and nonnegative.
    pub fn energy(&self, f: &Field<T>) -> T {
        let n = self.n_cells();
        let mut acc = T::zero();
        for (e, &tau) in self.trans.iter().enumerate() {
            let d = f.0[e] - f.0[e + 1];
            acc = acc + tau * d * d;
        }
        if self.bc == BoundaryKind::Dirichlet {
            acc = acc + self.boundary_trans.0 * f.0[0] * f.0[0];
            acc = acc + self.boundary_trans.1 * f.0[n - 1] * f.0[n - 1];
        }
        acc
    }
}
