//! Outer (H + V) and inner (V-form) polyhedral approximations.

mod dd;
pub mod off;

pub(crate) use dd::{AddOutcome, DdCone, RayNorm};

use crate::cone::Cone;
use crate::error::{Error, Result};
use crate::linalg::{dist, dot, norm, normalized};
use crate::scalar::Real;
use crate::solvers::projection::{project_onto_inner, Projection};

/// `{y : normalᵀ y >= offset}` with a unit normal.
#[derive(Clone, Debug, PartialEq)]
pub struct Halfspace<T> {
    pub normal: Vec<T>,
    pub offset: T,
}

impl<T: Real> Halfspace<T> {
    /// Normalizes `normal` to unit length (rescaling `offset` along with it).
    pub fn new(normal: Vec<T>, offset: T) -> Result<Self> {
        let n = norm(&normal);
        let unit = normalized(&normal).ok_or(Error::ZeroDirection)?;
        Ok(Halfspace {
            normal: unit,
            offset: offset / n,
        })
    }

    /// `normalᵀ y - offset`; nonnegative inside.
    pub fn slack(&self, y: &[T]) -> T {
        dot(&self.normal, y) - self.offset
    }

    fn homogeneous_row(&self) -> Vec<T> {
        let mut row = self.normal.clone();
        row.push(-self.offset);
        row
    }
}

/// A vertex with its stable id (creation order).
#[derive(Clone, Copy, Debug)]
pub struct VertexRef<'a, T> {
    pub id: usize,
    pub point: &'a [T],
}

/// Outcome of intersecting a polyhedron with one more halfspace.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CutReport {
    pub cut: Vec<usize>,
    pub kept: Vec<usize>,
    pub created: Vec<usize>,
    /// Nothing was cut; the polyhedron is unchanged and the halfspace was not
    /// stored.
    pub redundant: bool,
}

/// Polyhedron held in both representations. The V-form is maintained by
/// double description on the homogenization `{(y, t) : wᵀy - γt >= 0, t >= 0}`.
#[derive(Clone, Debug)]
pub struct Polyhedron<T> {
    dim: usize,
    dd: DdCone<T>,
    tol: T,
}

impl<T: Real> Polyhedron<T> {
    pub fn from_halfspaces(hs: &[Halfspace<T>], tol: T) -> Result<Self> {
        let dim = hs.first().ok_or(Error::UnboundedBelow)?.normal.len();
        let mut rows = Vec::with_capacity(hs.len() + 1);
        let mut t_row = vec![T::zero(); dim + 1];
        t_row[dim] = T::one();
        rows.push(t_row);
        for h in hs {
            if h.normal.len() != dim {
                return Err(Error::DimMismatch {
                    expected: dim,
                    got: h.normal.len(),
                });
            }
            rows.push(h.homogeneous_row());
        }
        let dd = DdCone::new(dim + 1, &rows, tol, RayNorm::Homogeneous).ok_or(Error::UnboundedBelow)?;
        let poly = Polyhedron { dim, dd, tol };
        if poly.vertices().next().is_none() {
            return Err(Error::Infeasible);
        }
        Ok(poly)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tol(&self) -> T {
        self.tol
    }

    /// Vertices in creation order.
    pub fn vertices(&self) -> impl Iterator<Item = VertexRef<'_, T>> + '_ {
        self.dd
            .rays()
            .iter()
            .filter(move |r| r.coords[self.dim] > T::zero())
            .map(move |r| VertexRef {
                id: r.id,
                point: &r.coords[..self.dim],
            })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices().count()
    }

    pub fn vertex(&self, id: usize) -> Option<&[T]> {
        self.vertices().find(|v| v.id == id).map(|v| v.point)
    }

    /// Unit extreme directions of the recession cone.
    pub fn rays(&self) -> impl Iterator<Item = &[T]> + '_ {
        self.dd
            .rays()
            .iter()
            .filter(move |r| r.coords[self.dim] == T::zero())
            .map(move |r| &r.coords[..self.dim])
    }

    /// Stored (irredundant at insertion time) halfspaces, in insertion order.
    pub fn halfspaces(&self) -> Vec<Halfspace<T>> {
        self.dd.rows()[1..]
            .iter()
            .map(|row| Halfspace {
                normal: row[..self.dim].to_vec(),
                offset: -row[self.dim],
            })
            .collect()
    }

    /// Indices (into [`Self::halfspaces`]) of the facets incident to vertex `id`.
    pub fn incident_facets(&self, id: usize) -> Vec<usize> {
        self.dd
            .rays()
            .iter()
            .find(|r| r.id == id)
            .map(|r| r.zero.iter().filter(|&&i| i > 0).map(|&i| i - 1).collect())
            .unwrap_or_default()
    }

    pub fn add_halfspace(&mut self, h: &Halfspace<T>) -> Result<CutReport> {
        if h.normal.len() != self.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                got: h.normal.len(),
            });
        }
        let mut dd = self.dd.clone();
        let is_vertex = |dd: &DdCone<T>, id: usize| {
            dd.rays()
                .iter()
                .find(|r| r.id == id)
                .map_or(false, |r| r.coords[self.dim] > T::zero())
        };
        let before: Vec<(usize, bool)> = self
            .dd
            .rays()
            .iter()
            .map(|r| (r.id, r.coords[self.dim] > T::zero()))
            .collect();
        match dd.add_row(h.homogeneous_row()) {
            AddOutcome::Redundant => Ok(CutReport {
                kept: self.vertices().map(|v| v.id).collect(),
                redundant: true,
                ..CutReport::default()
            }),
            AddOutcome::Cut { removed, kept, created } => {
                let was_vertex = |id: usize| before.iter().any(|&(i, v)| i == id && v);
                let report = CutReport {
                    cut: removed.into_iter().filter(|&i| was_vertex(i)).collect(),
                    kept: kept.into_iter().filter(|&i| was_vertex(i)).collect(),
                    created: created.into_iter().filter(|&i| is_vertex(&dd, i)).collect(),
                    redundant: false,
                };
                if report.kept.is_empty() && report.created.is_empty() {
                    return Err(Error::EmptyResult);
                }
                self.dd = dd;
                Ok(report)
            }
        }
    }

    /// All stored halfspaces hold within `tol`.
    pub fn contains(&self, y: &[T], tol: T) -> Result<bool> {
        if y.len() != self.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                got: y.len(),
            });
        }
        Ok(self.halfspaces().iter().all(|h| h.slack(y) >= -tol))
    }
}

/// Inner approximation `conv V + cone D` kept as a point list plus the cone
/// generators. No convex-hull reduction is performed.
#[derive(Clone, Debug)]
pub struct InnerApprox<T> {
    dim: usize,
    points: Vec<Vec<T>>,
    rays: Vec<Vec<T>>,
}

impl<T: Real> InnerApprox<T> {
    pub fn new(cone: &Cone<T>) -> Self {
        InnerApprox {
            dim: cone.dim(),
            points: Vec::new(),
            rays: cone.generators().to_vec(),
        }
    }

    pub fn from_parts(dim: usize, points: Vec<Vec<T>>, rays: Vec<Vec<T>>) -> Self {
        InnerApprox { dim, points, rays }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Vec<T>] {
        &self.points
    }

    pub fn rays(&self) -> &[Vec<T>] {
        &self.rays
    }

    /// Appends `p` unless it duplicates a stored point within `tol_dedupe`
    /// or is dominated by one (`v <=_C p`). Returns whether the point was
    /// stored.
    pub fn add_point(&mut self, p: &[T], cone: &Cone<T>, tol_dedupe: T) -> Result<bool> {
        if p.len() != self.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                got: p.len(),
            });
        }
        for v in &self.points {
            if dist(v, p) <= tol_dedupe || cone.leq(v, p)? {
                return Ok(false);
            }
        }
        self.points.push(p.to_vec());
        Ok(true)
    }

    /// Euclidean projection of `y` onto the set.
    pub fn project(&self, y: &[T], warm: Option<&[T]>, tol: T) -> Result<Projection<T>> {
        if y.len() != self.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                got: y.len(),
            });
        }
        Ok(project_onto_inner(&self.points, &self.rays, y, warm, tol))
    }

    /// Membership decided by the projection distance.
    pub fn contains(&self, y: &[T], tol: T) -> Result<bool> {
        Ok(self.project(y, None, tol * T::lit(1e-2))?.dist <= tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hs(w: &[f64], g: f64) -> Halfspace<f64> {
        Halfspace::new(w.to_vec(), g).unwrap()
    }

    fn sorted_vertices(p: &Polyhedron<f64>) -> Vec<Vec<f64>> {
        let mut v: Vec<Vec<f64>> = p.vertices().map(|v| v.point.to_vec()).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn orthant_in_the_plane() {
        let p = Polyhedron::from_halfspaces(&[hs(&[1.0, 0.0], 0.0), hs(&[0.0, 1.0], 0.0)], 1e-9).unwrap();
        assert_eq!(sorted_vertices(&p), vec![vec![0.0, 0.0]]);
        let mut rays: Vec<Vec<f64>> = p.rays().map(<[f64]>::to_vec).collect();
        rays.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(rays, vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn box_corner() {
        let p = Polyhedron::from_halfspaces(
            &[
                hs(&[1.0, 0.0, 0.0], 0.0),
                hs(&[0.0, 1.0, 0.0], -6.0),
                hs(&[0.0, 0.0, 1.0], -4.0),
            ],
            1e-9,
        )
        .unwrap();
        assert_eq!(sorted_vertices(&p), vec![vec![0.0, -6.0, -4.0]]);
        assert_eq!(p.rays().count(), 3);
    }

    #[test]
    fn diagonal_facet_gives_two_vertices() {
        let s = 0.5f64.sqrt();
        let p =
            Polyhedron::from_halfspaces(&[hs(&[1.0, 0.0], 0.0), hs(&[0.0, 1.0], 0.0), hs(&[s, s], s)], 1e-9).unwrap();
        let v = sorted_vertices(&p);
        assert_eq!(v.len(), 2);
        assert!(close(&v[0], &[0.0, 1.0], 1e-12));
        assert!(close(&v[1], &[1.0, 0.0], 1e-12));
    }

    #[test]
    fn cut_and_redundant_cut() {
        let mut p = Polyhedron::from_halfspaces(&[hs(&[1.0, 0.0], 0.0), hs(&[0.0, 1.0], 0.0)], 1e-9).unwrap();
        let origin = p.vertices().next().unwrap().id;
        let r = p.add_halfspace(&hs(&[1.0, 1.0], 1.0)).unwrap();
        assert_eq!(r.cut, vec![origin]);
        assert_eq!(r.created.len(), 2);
        assert!(!r.redundant);
        let n_hs = p.halfspaces().len();
        let r = p.add_halfspace(&hs(&[1.0, 1.0], -1.0)).unwrap();
        assert!(r.redundant);
        assert_eq!(p.halfspaces().len(), n_hs);
        assert_eq!(p.vertex_count(), 2);
    }

    #[test]
    fn infeasible_and_unbounded_systems() {
        let e = Polyhedron::from_halfspaces(
            &[hs(&[1.0, 0.0], 1.0), hs(&[-1.0, 0.0], 1.0), hs(&[0.0, 1.0], 0.0)],
            1e-9,
        );
        assert_eq!(e.unwrap_err(), Error::Infeasible);
        let u = Polyhedron::from_halfspaces(&[hs(&[1.0, 0.0], 0.0)], 1e-9);
        assert_eq!(u.unwrap_err(), Error::UnboundedBelow);
    }

    #[test]
    fn h_form_membership() {
        let p = Polyhedron::from_halfspaces(&[hs(&[1.0, 0.0], 0.0), hs(&[0.0, 1.0], 0.0)], 1e-9).unwrap();
        assert!(p.contains(&[0.0, 0.0], 1e-6).unwrap());
        assert!(!p.contains(&[-1.0, 0.0], 1e-6).unwrap());
        assert!(p.contains(&[1.0], 1e-6).is_err());
    }

    #[test]
    fn inner_point_insertion_rules() {
        let cone = Cone::natural(2).unwrap();
        let mut inner = InnerApprox::new(&cone);
        assert!(inner.add_point(&[1.0, 0.0], &cone, 1e-7).unwrap());
        assert!(inner.add_point(&[0.0, 1.0], &cone, 1e-7).unwrap());
        assert!(!inner.add_point(&[1.0, 0.0], &cone, 1e-7).unwrap());
        assert!(!inner.add_point(&[2.0, 2.0], &cone, 1e-7).unwrap());
        assert!(inner.add_point(&[0.4, 0.4], &cone, 1e-7).unwrap());
        assert_eq!(inner.points().len(), 3);
    }

    #[test]
    fn v_form_membership() {
        let cone = Cone::natural(2).unwrap();
        let inner = InnerApprox::from_parts(2, vec![vec![1.0, 0.0], vec![0.0, 1.0]], cone.generators().to_vec());
        assert!(inner.contains(&[0.5, 0.5], 1e-9).unwrap());
        assert!(inner.contains(&[1.0, 0.0], 1e-9).unwrap());
        assert!(!inner.contains(&[0.2, 0.2], 1e-6).unwrap());
        assert!(inner.contains(&[0.0, 0.0, 0.0], 1e-6).is_err());
    }
}
