//! Surface meshes of three-dimensional approximations, clipped to an
//! inflated bounding box, in Object File Format.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::{DdCone, Halfspace, Polyhedron, RayNorm};
use crate::error::{Error, Result};
use crate::linalg::{dist, dot, norm, sub};
use crate::scalar::Real;

/// A closed polygonal surface. Faces list vertex indices counter-clockwise
/// when seen from outside.
#[derive(Clone, Debug)]
pub struct OffMesh<T> {
    pub vertices: Vec<Vec<T>>,
    pub faces: Vec<Vec<usize>>,
}

impl<T: Real> OffMesh<T> {
    pub fn edge_count(&self) -> usize {
        let mut edges = BTreeSet::new();
        for f in &self.faces {
            for k in 0..f.len() {
                let (a, b) = (f[k], f[(k + 1) % f.len()]);
                edges.insert((a.min(b), a.max(b)));
            }
        }
        edges.len()
    }

    /// `V - E + F`; 2 for a closed convex surface.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edge_count() as i64 + self.faces.len() as i64
    }

    pub fn to_off(&self) -> String {
        let mut s = String::from("OFF\n");
        let _ = writeln!(s, "{} {} {}", self.vertices.len(), self.faces.len(), self.edge_count());
        for v in &self.vertices {
            let coords: Vec<String> = v.iter().map(|x| format!("{}", x.as_f64())).collect();
            let _ = writeln!(s, "{}", coords.join(" "));
        }
        for f in &self.faces {
            let idx: Vec<String> = f.iter().map(usize::to_string).collect();
            let _ = writeln!(s, "{} {}", f.len(), idx.join(" "));
        }
        s
    }
}

/// Facets of `conv points + cone rays` by double description on the cone
/// of valid inequalities `{(a, β) : aᵀv >= β, aᵀd >= 0}`.
pub fn inner_halfspaces<T: Real>(points: &[Vec<T>], rays: &[Vec<T>], tol: T) -> Result<Vec<Halfspace<T>>> {
    let q = points.first().ok_or(Error::EmptyResult)?.len();
    let mut rows: Vec<Vec<T>> = Vec::with_capacity(points.len() + rays.len());
    for d in rays {
        let mut r = d.clone();
        r.push(T::zero());
        rows.push(r);
    }
    for v in points {
        let mut r = v.clone();
        r.push(-T::one());
        rows.push(r);
    }
    let dd = DdCone::new(q + 1, &rows, tol, RayNorm::Unit).ok_or(Error::UnboundedBelow)?;
    let mut out = Vec::new();
    for ray in dd.rays() {
        let a = &ray.coords[..q];
        if norm(a) > tol {
            out.push(Halfspace::new(a.to_vec(), ray.coords[q])?);
        }
    }
    Ok(out)
}

/// Intersects `{y : wᵀy >= γ}` for all `hs` with the bounding box of
/// `anchors` inflated by `margin`, and returns the boundary mesh.
pub fn clipped_mesh<T: Real>(hs: &[Halfspace<T>], anchors: &[Vec<T>], margin: T, tol: T) -> Result<OffMesh<T>> {
    let q = anchors.first().ok_or(Error::EmptyResult)?.len();
    if q != 3 {
        return Err(Error::WrongDimension(q));
    }
    let mut all = hs.to_vec();
    for i in 0..q {
        let lo = anchors.iter().map(|a| a[i]).fold(T::infinity(), T::min) - margin;
        let hi = anchors.iter().map(|a| a[i]).fold(T::neg_infinity(), T::max) + margin;
        let mut e = vec![T::zero(); q];
        e[i] = T::one();
        all.push(Halfspace::new(e.clone(), lo)?);
        e[i] = -T::one();
        all.push(Halfspace::new(e, -hi)?);
    }
    let poly = Polyhedron::from_halfspaces(&all, tol)?;
    let scale = anchors
        .iter()
        .flat_map(|a| a.iter().map(|x| x.abs()))
        .fold(T::one(), T::max)
        + margin;
    let merge = T::lit(1e-9) * scale;

    // Faces come from the incidence sets of the double description, not
    // from re-testing slacks: short edges between nearly coplanar facets
    // would otherwise lose a vertex on one side.
    let hs_all = poly.halfspaces();
    let mut vertices: Vec<Vec<T>> = Vec::new();
    let mut on: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); hs_all.len()];
    for v in poly.vertices() {
        let k = match vertices.iter().position(|u| dist(u, v.point) <= merge) {
            Some(k) => k,
            None => {
                vertices.push(v.point.to_vec());
                vertices.len() - 1
            }
        };
        for f in poly.incident_facets(v.id) {
            on[f].insert(k);
        }
    }
    let mut faces = Vec::new();
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    for (h, idx) in hs_all.iter().zip(on) {
        let idx: Vec<usize> = idx.into_iter().collect();
        if idx.len() < 3 || !seen.insert(idx.clone()) {
            continue;
        }
        faces.push(order_ccw(&vertices, idx, &h.normal));
    }
    Ok(OffMesh { vertices, faces })
}

/// Sorts face vertices counter-clockwise around the outward normal `-w`.
fn order_ccw<T: Real>(vertices: &[Vec<T>], mut idx: Vec<usize>, w: &[T]) -> Vec<usize> {
    let k = T::from_usize(idx.len()).unwrap();
    let centroid: Vec<T> = (0..3)
        .map(|i| idx.iter().map(|&j| vertices[j][i]).sum::<T>() / k)
        .collect();
    let n: Vec<T> = w.iter().map(|&x| -x).collect();
    let u0 = sub(&vertices[idx[0]], &centroid);
    let un = norm(&u0);
    let u: Vec<T> = u0.iter().map(|&x| x / un).collect();
    let v = cross(&n, &u);
    let angle = |j: usize| {
        let d = sub(&vertices[j], &centroid);
        dot(&d, &v).atan2(dot(&d, &u))
    };
    idx.sort_by(|&a, &b| angle(a).partial_cmp(&angle(b)).unwrap_or(std::cmp::Ordering::Equal));
    idx
}

fn cross<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    vec![
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eye() -> Vec<Vec<f64>> {
        vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]
    }

    #[test]
    fn orthant_clip_is_a_cube() {
        let hs: Vec<Halfspace<f64>> = eye().into_iter().map(|e| Halfspace::new(e, 0.0).unwrap()).collect();
        let mesh = clipped_mesh(&hs, &[vec![0.0, 0.0, 0.0]], 1.0, 1e-9).unwrap();
        assert_eq!(mesh.vertices.len(), 8);
        assert_eq!(mesh.faces.len(), 6);
        assert_eq!(mesh.euler_characteristic(), 2);
    }

    #[test]
    fn faces_wind_counter_clockwise_outward() {
        let hs: Vec<Halfspace<f64>> = eye().into_iter().map(|e| Halfspace::new(e, 0.0).unwrap()).collect();
        let mesh = clipped_mesh(&hs, &[vec![0.0, 0.0, 0.0]], 1.0, 1e-9).unwrap();
        let center = [0.5, 0.5, 0.5];
        for f in &mesh.faces {
            let (a, b, c) = (&mesh.vertices[f[0]], &mesh.vertices[f[1]], &mesh.vertices[f[2]]);
            let n = cross(&sub(b, a), &sub(c, a));
            assert!(dot(&n, &sub(a, &center)) > 0.0);
        }
    }

    #[test]
    fn inner_facets_of_simplex_plus_orthant() {
        let pts = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        let hs = inner_halfspaces(&pts, &eye(), 1e-9).unwrap();
        // three coordinate facets y_i >= 0 and the diagonal y1+y2+y3 >= 1
        assert_eq!(hs.len(), 4);
        let s = 1.0 / 3f64.sqrt();
        assert!(hs
            .iter()
            .any(|h| h.normal.iter().all(|&x| (x - s).abs() < 1e-12) && (h.offset - s).abs() < 1e-12));
        let mesh = clipped_mesh(&hs, &pts, 1.0, 1e-9).unwrap();
        assert_eq!(mesh.euler_characteristic(), 2);
    }

    #[test]
    fn planar_input_rejected() {
        let hs = vec![Halfspace::new(vec![1.0, 0.0], 0.0).unwrap()];
        assert_eq!(
            clipped_mesh(&hs, &[vec![0.0, 0.0]], 1.0, 1e-9).unwrap_err(),
            Error::WrongDimension(2)
        );
    }
}
