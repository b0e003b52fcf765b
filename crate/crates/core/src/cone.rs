//! Polyhedral ordering cones `C = {x : Zᵀx >= 0}`.

use crate::error::{Error, Result};
use crate::linalg::{dist, dot, norm, normalized, rank, Mat};
use crate::polyhedron::{DdCone, RayNorm};
use crate::scalar::Real;

/// A pointed, solid polyhedral cone.
///
/// Holds the dual generators `Z` (columns spanning `C+`) and the primal
/// generators `D` (extreme rays of `C`), both unit-normalized.
#[derive(Clone, Debug)]
pub struct Cone<T> {
    dim: usize,
    dual: Vec<Vec<T>>,
    primal: Vec<Vec<T>>,
    tol: T,
}

impl<T: Real> Cone<T> {
    /// The natural (component-wise) order on `R^q`.
    pub fn natural(q: usize) -> Result<Self> {
        let cols = (0..q)
            .map(|i| {
                let mut e = vec![T::zero(); q];
                e[i] = T::one();
                e
            })
            .collect();
        Self::from_dual_generators(cols, T::tol_floor(1e-9, 1e3))
    }

    /// Builds the cone from a `q x l` matrix whose columns span `C+`.
    pub fn from_matrix(z: &Mat<T>, tol: T) -> Result<Self> {
        Self::from_dual_generators((0..z.cols()).map(|j| z.col(j)).collect(), tol)
    }

    /// Validates the dual generators and enumerates the extreme rays of
    /// `{x : Zᵀx >= 0}` by double description.
    pub fn from_dual_generators(cols: Vec<Vec<T>>, tol: T) -> Result<Self> {
        let dim = cols.first().map_or(0, Vec::len);
        if dim < 2 {
            return Err(Error::InvalidCone(format!("dimension {dim} < 2")));
        }
        if cols.len() < dim {
            return Err(Error::InvalidCone(format!(
                "{} generators for dimension {dim}",
                cols.len()
            )));
        }
        let mut dual: Vec<Vec<T>> = Vec::with_capacity(cols.len());
        for c in &cols {
            if c.len() != dim {
                return Err(Error::DimMismatch {
                    expected: dim,
                    got: c.len(),
                });
            }
            let unit = normalized(c).ok_or_else(|| Error::InvalidCone("zero generator column".into()))?;
            if !dual.iter().any(|d| dist(d, &unit) <= tol) {
                dual.push(unit);
            }
        }
        let r = rank(&dual.iter().map(Vec::as_slice).collect::<Vec<_>>(), tol);
        if r < dim {
            return Err(Error::RankDeficient { rank: r, dim });
        }
        let dd = DdCone::new(dim, &dual, tol, RayNorm::Unit).ok_or(Error::RankDeficient { rank: r, dim })?;
        let primal: Vec<Vec<T>> = dd.rays().iter().map(|r| r.coords.clone()).collect();
        let cone = Cone { dim, dual, primal, tol };
        let center: Vec<T> = (0..dim).map(|i| cone.primal.iter().map(|d| d[i]).sum()).collect();
        if !cone.in_interior(&center)? {
            return Err(Error::EmptyInterior);
        }
        Ok(cone)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tol(&self) -> T {
        self.tol
    }

    /// Unit columns of `Z` (deduplicated); they generate `C+`.
    pub fn dual_generators(&self) -> &[Vec<T>] {
        &self.dual
    }

    /// Unit extreme rays of `C`.
    pub fn generators(&self) -> &[Vec<T>] {
        &self.primal
    }

    /// True when `Z` is (a permutation of) the identity.
    pub fn is_natural(&self) -> bool {
        self.dual.len() == self.dim
            && self.dual.iter().all(|z| {
                z.iter().filter(|&&x| x == T::one()).count() == 1
                    && z.iter().filter(|&&x| x == T::zero()).count() == self.dim - 1
            })
    }

    fn check_dim(&self, x: &[T]) -> Result<()> {
        if x.len() == self.dim {
            Ok(())
        } else {
            Err(Error::DimMismatch {
                expected: self.dim,
                got: x.len(),
            })
        }
    }

    /// `x <=_C y`, i.e. `Zᵀ(y - x) >= -tol`.
    pub fn leq(&self, x: &[T], y: &[T]) -> Result<bool> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        Ok(self.dual.iter().all(|z| {
            let s: T = z
                .iter()
                .zip(x.iter().zip(y))
                .map(|(&zi, (&xi, &yi))| zi * (yi - xi))
                .sum();
            s >= -self.tol
        }))
    }

    pub fn contains(&self, x: &[T]) -> Result<bool> {
        self.check_dim(x)?;
        let scale = T::one().max(norm(x));
        Ok(self.dual.iter().all(|z| dot(z, x) >= -self.tol * scale))
    }

    /// `Zᵀc > tol ||c||` component-wise.
    pub fn in_interior(&self, c: &[T]) -> Result<bool> {
        self.check_dim(c)?;
        let n = norm(c);
        if n == T::zero() {
            return Ok(false);
        }
        Ok(self.dual.iter().all(|z| dot(z, c) > self.tol * n))
    }

    /// Membership in the dual cone `C+`, tested against the primal generators.
    pub fn in_dual(&self, w: &[T]) -> Result<bool> {
        self.check_dim(w)?;
        let scale = T::one().max(norm(w));
        Ok(self.primal.iter().all(|d| dot(d, w) >= -self.tol * scale))
    }

    /// Smallest `k` such that an ε-infimizer in the Hausdorff sense also
    /// satisfies the shifted inclusion with `kε` along `c`:
    /// `k = 1 / min_j ẑ_jᵀc` for a unit interior direction `c`.
    pub fn infimizer_constant(&self, c: &[T]) -> Result<T> {
        self.check_dim(c)?;
        if !self.in_interior(c)? {
            return Err(Error::NotInterior);
        }
        let n = norm(c);
        if (n - T::one()).abs() > T::lit(1e-6).max(self.tol) {
            return Err(Error::NotInterior);
        }
        let m = self.dual.iter().map(|z| dot(z, c)).fold(T::infinity(), T::min);
        Ok(T::one() / m)
    }

    /// Normalized sum of the extreme rays; an interior direction.
    pub fn canonical_direction(&self) -> Vec<T> {
        let s: Vec<T> = (0..self.dim).map(|i| self.primal.iter().map(|d| d[i]).sum()).collect();
        normalized(&s).expect("solid cone has nonzero ray sum")
    }

    /// `Z` as a `q x l` matrix of unit columns.
    pub fn dual_matrix(&self) -> Mat<T> {
        Mat::from_cols(&self.dual)
    }
}
