use nalgebra::{DMatrix, DVector};

use super::Vector;

/// Relative singular-value cut used when orthonormalising spanning sets.
pub const RANK_TOL: f64 = 1e-10;

/// Linear subspace of R^n stored as an orthonormal basis (columns).
#[derive(Clone, Debug)]
pub struct Subspace {
    ambient: usize,
    basis: DMatrix<f64>,
    /// Set when the basis is the identity, so projections can be skipped.
    full: bool,
}

impl Subspace {
    pub fn zero(n: usize) -> Self {
        Self {
            ambient: n,
            basis: DMatrix::zeros(n, 0),
            full: n == 0,
        }
    }

    pub fn full(n: usize) -> Self {
        Self {
            ambient: n,
            basis: DMatrix::identity(n, n),
            full: true,
        }
    }

    /// Span of the given vectors; directions with singular value below
    /// `RANK_TOL * sigma_max` are dropped.
    pub fn from_spanning(n: usize, vectors: &[Vector]) -> Self {
        Self::from_spanning_tol(n, vectors, RANK_TOL)
    }

    pub fn from_spanning_tol(n: usize, vectors: &[Vector], rel_tol: f64) -> Self {
        let vs: Vec<&Vector> = vectors.iter().filter(|v| v.iter().all(|x| x.is_finite())).collect();
        if vs.is_empty() || n == 0 {
            return Self::zero(n);
        }
        let m = DMatrix::from_fn(n, vs.len(), |i, j| vs[j][i]);
        Self::from_matrix(m, rel_tol)
    }

    fn from_matrix(m: DMatrix<f64>, rel_tol: f64) -> Self {
        let n = m.nrows();
        let svd = m.svd(true, false);
        let u = svd.u.expect("left singular vectors requested");
        let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        if smax == 0.0 {
            return Self::zero(n);
        }
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] > rel_tol * smax)
            .collect();
        if keep.len() == n {
            return Self::full(n);
        }
        let basis = DMatrix::from_fn(n, keep.len(), |i, j| u[(i, keep[j])]);
        Self {
            ambient: n,
            basis,
            full: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn is_full(&self) -> bool {
        self.full || self.dim() == self.ambient
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn basis_vector(&self, i: usize) -> Vector {
        self.basis.column(i).into_owned()
    }

    pub fn basis_vectors(&self) -> Vec<Vector> {
        (0..self.dim()).map(|i| self.basis_vector(i)).collect()
    }

    /// Coordinates of the orthogonal projection of `x` in this basis.
    pub fn coords(&self, x: &Vector) -> Vector {
        if self.full {
            return x.clone();
        }
        self.basis.tr_mul(x)
    }

    pub fn from_coords(&self, c: &Vector) -> Vector {
        if self.full {
            return c.clone();
        }
        &self.basis * c
    }

    pub fn project(&self, x: &Vector) -> Vector {
        if self.full {
            return x.clone();
        }
        if self.dim() == 0 {
            return DVector::zeros(self.ambient);
        }
        self.from_coords(&self.coords(x))
    }

    /// Euclidean distance from `x` to the subspace.
    pub fn residual(&self, x: &Vector) -> f64 {
        if self.full {
            return 0.0;
        }
        (x - self.project(x)).norm()
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        self.residual(x) <= tol * (1.0 + x.norm())
    }

    /// Orthogonal complement in R^n.
    pub fn complement(&self) -> Self {
        Subspace::full(self.ambient).minus(self)
    }

    /// `self ⊖ other`: the part of `self` orthogonal to `other`.
    pub fn minus(&self, other: &Subspace) -> Self {
        if other.dim() == 0 {
            return self.clone();
        }
        if self.dim() == 0 {
            return self.clone();
        }
        let q = &self.basis;
        let p = &other.basis;
        let reduced = q - p * p.tr_mul(q);
        let kept = Self::from_matrix_abs(reduced, 1e-9);
        kept.unwrap_or_else(|| Self::zero(self.ambient))
    }

    fn from_matrix_abs(m: DMatrix<f64>, abs_tol: f64) -> Option<Self> {
        let n = m.nrows();
        let svd = m.svd(true, false);
        let u = svd.u?;
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] > abs_tol)
            .collect();
        if keep.len() == n {
            return Some(Self::full(n));
        }
        Some(Self {
            ambient: n,
            basis: DMatrix::from_fn(n, keep.len(), |i, j| u[(i, keep[j])]),
            full: false,
        })
    }

    pub fn intersection(&self, other: &Subspace) -> Self {
        // U ∩ V = (U^⊥ + V^⊥)^⊥
        let mut normals = self.complement().basis_vectors();
        normals.extend(other.complement().basis_vectors());
        Subspace::from_spanning(self.ambient, &normals).complement()
    }

    /// Direct sum `self ⊕ other` inside R^(n1 + n2).
    pub fn direct_sum(&self, other: &Subspace) -> Self {
        let n = self.ambient + other.ambient;
        if self.is_full() && other.is_full() {
            return Self::full(n);
        }
        let k = self.dim() + other.dim();
        let mut b = DMatrix::zeros(n, k);
        b.view_mut((0, 0), (self.ambient, self.dim())).copy_from(&self.basis);
        b.view_mut((self.ambient, self.dim()), (other.ambient, other.dim()))
            .copy_from(&other.basis);
        Self {
            ambient: n,
            basis: b,
            full: false,
        }
    }

    /// True if every basis vector of each subspace lies in the other.
    pub fn same_as(&self, other: &Subspace, tol: f64) -> bool {
        self.ambient == other.ambient
            && self.dim() == other.dim()
            && self.basis_vectors().iter().all(|v| other.residual(v) <= tol)
            && other.basis_vectors().iter().all(|v| self.residual(v) <= tol)
    }

    /// `self ⊆ other` up to `tol`.
    pub fn is_subspace_of(&self, other: &Subspace, tol: f64) -> bool {
        self.basis_vectors().iter().all(|v| other.residual(v) <= tol)
    }
}
