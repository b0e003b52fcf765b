//! Incremental double description for pointed polyhedral cones
//! `{x : a_iᵀ x >= 0}`.
//!
//! Each extreme ray keeps its zero set (indices of stored rows it satisfies
//! with equality). Two rays are adjacent iff the rows in their common zero
//! set have rank `dim - 2`; the test is purely combinatorial-algebraic and
//! does not care whether a ray is simple, so cuts through existing rays are
//! handled without special cases.

use crate::linalg::{dot, normalized, rank, Lu, Mat};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum RayNorm {
    /// Scale every ray to unit length.
    Unit,
    /// The last coordinate is the homogenizing one: rays with a positive last
    /// coordinate are scaled so that it equals one, the others are scaled to
    /// unit length.
    Homogeneous,
}

#[derive(Clone, Debug)]
pub(crate) struct DdRay<T> {
    pub id: usize,
    pub coords: Vec<T>,
    /// Sorted indices of stored rows that vanish on this ray.
    pub zero: Vec<usize>,
}

#[derive(Clone, Debug)]
pub(crate) enum AddOutcome {
    /// No ray violates the row; the row is not stored.
    Redundant,
    Cut {
        removed: Vec<usize>,
        kept: Vec<usize>,
        created: Vec<usize>,
    },
}

#[derive(Clone, Debug)]
pub(crate) struct DdCone<T> {
    dim: usize,
    rows: Vec<Vec<T>>,
    rays: Vec<DdRay<T>>,
    next_id: usize,
    tol: T,
    norm: RayNorm,
}

impl<T: Real> DdCone<T> {
    /// Builds the cone from `rows`. Returns `None` when the rows have rank
    /// below `dim` (the cone contains a line).
    ///
    /// The first `dim` linearly independent rows, in input order, form the
    /// initial simplicial cone; the rest are inserted one by one. Rows that
    /// cut nothing at insertion time are dropped.
    pub fn new(dim: usize, rows: &[Vec<T>], tol: T, norm: RayNorm) -> Option<Self> {
        let mut basis: Vec<usize> = Vec::with_capacity(dim);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), dim);
            if basis.len() == dim {
                break;
            }
            let mut cand: Vec<&[T]> = basis.iter().map(|&b| rows[b].as_slice()).collect();
            cand.push(r);
            if rank(&cand, tol) == cand.len() {
                basis.push(i);
            }
        }
        if basis.len() < dim {
            return None;
        }
        let b = Mat::from_rows(&basis.iter().map(|&i| rows[i].clone()).collect::<Vec<_>>());
        let lu = Lu::new(&b, T::epsilon())?;
        let mut cone = DdCone {
            dim,
            rows: basis.iter().map(|&i| rows[i].clone()).collect(),
            rays: Vec::with_capacity(dim),
            next_id: 0,
            tol,
            norm,
        };
        for k in 0..dim {
            let mut e = vec![T::zero(); dim];
            e[k] = T::one();
            let coords = lu.solve(&e);
            let zero = (0..dim).filter(|&j| j != k).collect();
            if let Some(coords) = cone.normalize(coords) {
                let id = cone.fresh_id();
                cone.rays.push(DdRay { id, coords, zero });
            }
        }
        for (i, r) in rows.iter().enumerate() {
            if !basis.contains(&i) {
                cone.add_row(r.clone());
            }
        }
        Some(cone)
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.rows
    }

    pub fn rays(&self) -> &[DdRay<T>] {
        &self.rays
    }

    fn fresh_id(&mut self) -> usize {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    fn normalize(&self, mut v: Vec<T>) -> Option<Vec<T>> {
        match self.norm {
            RayNorm::Unit => normalized(&v),
            RayNorm::Homogeneous => {
                let last = self.dim - 1;
                let t = v[last];
                if t > T::zero() {
                    let inv = T::one() / t;
                    for x in v.iter_mut() {
                        *x = *x * inv;
                    }
                    v[last] = T::one();
                    Some(v)
                } else {
                    v[last] = T::zero();
                    normalized(&v)
                }
            }
        }
    }

    /// Relative to the terms actually summed in `rowᵀray`: a nearly
    /// orthogonal row against a far-out vertex must not swamp the test.
    fn zero_threshold(&self, row: &[T], ray: &[T]) -> T {
        let mag = row.iter().zip(ray).fold(T::zero(), |acc, (&a, &x)| acc + (a * x).abs());
        self.tol * (T::one() + mag)
    }

    /// Intersects the cone with `{x : rowᵀ x >= 0}`.
    pub fn add_row(&mut self, row: Vec<T>) -> AddOutcome {
        assert_eq!(row.len(), self.dim);
        let vals: Vec<T> = self.rays.iter().map(|r| dot(&row, &r.coords)).collect();
        let mut sign = Vec::with_capacity(vals.len());
        for (r, &v) in self.rays.iter().zip(&vals) {
            let thr = self.zero_threshold(&row, &r.coords);
            sign.push(if v > thr {
                1i8
            } else if v < -thr {
                -1
            } else {
                0
            });
        }
        if sign.iter().all(|&s| s >= 0) {
            return AddOutcome::Redundant;
        }
        let idx = self.rows.len();
        self.rows.push(row);

        let pos: Vec<usize> = (0..self.rays.len()).filter(|&i| sign[i] > 0).collect();
        let neg: Vec<usize> = (0..self.rays.len()).filter(|&i| sign[i] < 0).collect();

        let mut created_rays = Vec::new();
        for &p in &pos {
            for &n in &neg {
                let common = intersect(&self.rays[p].zero, &self.rays[n].zero);
                if common.len() + 2 < self.dim {
                    continue;
                }
                let sub: Vec<&[T]> = common.iter().map(|&i| self.rows[i].as_slice()).collect();
                if rank(&sub, self.tol) + 2 != self.dim {
                    continue;
                }
                let (vp, vn) = (vals[p], vals[n]);
                let coords: Vec<T> = self.rays[n]
                    .coords
                    .iter()
                    .zip(&self.rays[p].coords)
                    .map(|(&xn, &xp)| vp * xn - vn * xp)
                    .collect();
                if let Some(coords) = self.normalize(coords) {
                    let mut zero = common;
                    zero.push(idx);
                    created_rays.push((coords, zero));
                }
            }
        }

        let mut removed = Vec::new();
        let mut kept = Vec::new();
        let mut next = Vec::with_capacity(self.rays.len() + created_rays.len());
        for (ray, s) in std::mem::take(&mut self.rays).into_iter().zip(sign) {
            if s < 0 {
                removed.push(ray.id);
            } else {
                let mut ray = ray;
                if s == 0 {
                    ray.zero.push(idx);
                }
                kept.push(ray.id);
                next.push(ray);
            }
        }
        let mut created = Vec::with_capacity(created_rays.len());
        for (coords, zero) in created_rays {
            let id = self.fresh_id();
            created.push(id);
            next.push(DdRay { id, coords, zero });
        }
        self.rays = next;
        AddOutcome::Cut { removed, kept, created }
    }
}

fn intersect(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}
