//! Euclidean projection onto `conv V + cone D`:
//!
//! ```text
//! min ‖Vλ + Dμ - s‖²   s.t.  1ᵀλ = 1,  λ, μ >= 0
//! ```
//!
//! solved by a Lawson–Hanson style active-set method carrying the affine
//! constraint on `λ` inside every equality-constrained subproblem.

use crate::linalg::{dist, dot, norm, Lu, Mat};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct Projection<T> {
    /// The nearest point `p*`.
    pub point: Vec<T>,
    pub dist: T,
    /// Convex weights of the points.
    pub lambda: Vec<T>,
    /// Conic weights of the rays.
    pub mu: Vec<T>,
    /// Largest cosine between the residual and a descent direction of a
    /// column left out at exit (zero at an exact optimum).
    pub kkt: T,
}

impl<T: Real> Projection<T> {
    /// `[λ, μ]`, the layout accepted as a warm start.
    pub fn coeffs(&self) -> Vec<T> {
        let mut c = self.lambda.clone();
        c.extend_from_slice(&self.mu);
        c
    }
}

struct Columns<'a, T> {
    points: &'a [Vec<T>],
    rays: &'a [Vec<T>],
}

impl<'a, T: Real> Columns<'a, T> {
    fn len(&self) -> usize {
        self.points.len() + self.rays.len()
    }

    fn col(&self, j: usize) -> &[T] {
        if j < self.points.len() {
            &self.points[j]
        } else {
            &self.rays[j - self.points.len()]
        }
    }

    fn is_point(&self, j: usize) -> bool {
        j < self.points.len()
    }

    fn combine(&self, theta: &[T], q: usize) -> Vec<T> {
        let mut p = vec![T::zero(); q];
        for (j, &t) in theta.iter().enumerate() {
            if t != T::zero() {
                for (pi, &c) in p.iter_mut().zip(self.col(j)) {
                    *pi = *pi + t * c;
                }
            }
        }
        p
    }

    /// Solves the subproblem on the free set `free`:
    /// `min ‖B_F θ - s‖²  s.t. Σ_{points in F} θ = 1`. Returns `θ_F`.
    fn eqp(&self, free: &[usize], target: &[T]) -> Option<Vec<T>> {
        let k = free.len();
        let mut kkt = Mat::zeros(k + 1, k + 1);
        let mut rhs = vec![T::zero(); k + 1];
        for (a, &ja) in free.iter().enumerate() {
            for (b, &jb) in free.iter().enumerate().skip(a) {
                let g = dot(self.col(ja), self.col(jb));
                kkt[(a, b)] = g;
                kkt[(b, a)] = g;
            }
            if self.is_point(ja) {
                kkt[(a, k)] = T::one();
                kkt[(k, a)] = T::one();
            }
            rhs[a] = dot(self.col(ja), target);
        }
        rhs[k] = T::one();
        let lu = Lu::new(&kkt, T::epsilon() * T::lit(64.0))?;
        let sol = lu.solve(&rhs);
        if sol.iter().any(|v| !v.is_finite()) {
            return None;
        }
        Some(sol[..k].to_vec())
    }
}

/// Projects `target` onto `conv points + cone rays`.
///
/// `warm` may hold the `[λ, μ]` of an earlier solve against a prefix of
/// `points` (inner sets only grow by appending); it is padded with zeros.
/// `tol` is the optimality tolerance on the bound multipliers.
///
/// # Panics
/// If `points` is empty.
pub fn project_onto_inner<T: Real>(
    points: &[Vec<T>],
    rays: &[Vec<T>],
    target: &[T],
    warm: Option<&[T]>,
    tol: T,
) -> Projection<T> {
    assert!(!points.is_empty(), "projection onto an empty point set");
    let q = target.len();
    let cols = Columns { points, rays };
    let s = points.len();
    let n = cols.len();

    let mut theta = initial_weights(&cols, target, warm);
    let mut free: Vec<usize> = (0..n).filter(|&j| theta[j] > T::zero()).collect();
    let tiny = T::epsilon() * T::lit(16.0);

    let mut worst = T::zero();
    let max_outer = 10 * n + 50;
    for _ in 0..max_outer {
        // Inner loop: move to the subproblem optimum, dropping weights that
        // would turn negative.
        let mut guard = 0;
        loop {
            guard += 1;
            let Some(zeta) = cols.eqp(&free, target) else {
                // Dependent columns: drop the most recently added one.
                free.pop();
                if free.is_empty() {
                    break;
                }
                continue;
            };
            if zeta.iter().all(|&z| z > tiny) {
                for (&j, &z) in free.iter().zip(&zeta) {
                    theta[j] = z;
                }
                break;
            }
            let mut alpha = T::one();
            for (&j, &z) in free.iter().zip(&zeta) {
                if z <= tiny {
                    let a = theta[j] / (theta[j] - z);
                    alpha = alpha.min(a);
                }
            }
            for (&j, &z) in free.iter().zip(&zeta) {
                theta[j] = theta[j] + alpha * (z - theta[j]);
            }
            free.retain(|&j| theta[j] > tiny);
            for j in 0..n {
                if !free.contains(&j) {
                    theta[j] = T::zero();
                }
            }
            renormalize(&mut theta, s);
            if free.is_empty() || guard > n + 5 {
                break;
            }
        }
        if free.is_empty() {
            // Numerical breakdown; restart from the nearest point.
            theta = initial_weights(&cols, target, None);
            free = (0..n).filter(|&j| theta[j] > T::zero()).collect();
        }

        // Optimality: no feasible direction (`v_j - Vλ`, moving convex
        // weight, or `d_j`) makes an obtuse angle with the residual. Testing
        // the cosine keeps the test independent of how far the target or the
        // column is.
        let p = cols.combine(&theta, q);
        let mut pv = theta.clone();
        pv[s..].iter_mut().for_each(|t| *t = T::zero());
        let pv = cols.combine(&pv, q);
        let r = sub(&p, target);
        let rn = norm(&r);
        let mut enter = None;
        worst = T::zero();
        for j in 0..n {
            if free.contains(&j) || rn == T::zero() {
                continue;
            }
            let dir = if cols.is_point(j) {
                sub(cols.col(j), &pv)
            } else {
                cols.col(j).to_vec()
            };
            let dn = norm(&dir);
            if dn == T::zero() {
                continue;
            }
            let cos = dot(&dir, &r) / (dn * rn);
            if cos < worst {
                worst = cos;
                enter = Some(j);
            }
        }
        match enter {
            Some(j) if worst < -tol => free.push(j),
            _ => break,
        }
    }

    let point = cols.combine(&theta, q);
    let d = dist(&point, target);
    Projection {
        point,
        dist: d,
        lambda: theta[..s].to_vec(),
        mu: theta[s..].to_vec(),
        kkt: (-worst).max(T::zero()),
    }
}

fn sub<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

fn renormalize<T: Real>(theta: &mut [T], s: usize) {
    let sum: T = theta[..s].iter().copied().sum();
    if sum > T::zero() {
        for t in theta[..s].iter_mut() {
            *t = *t / sum;
        }
    }
}

fn initial_weights<T: Real>(cols: &Columns<'_, T>, target: &[T], warm: Option<&[T]>) -> Vec<T> {
    let s = cols.points.len();
    let r = cols.rays.len();
    let mut theta = vec![T::zero(); s + r];
    if let Some(w) = warm {
        if w.len() >= r && w.len() - r <= s {
            let s_old = w.len() - r;
            theta[..s_old].copy_from_slice(&w[..s_old]);
            theta[s..].copy_from_slice(&w[s_old..]);
            for t in theta.iter_mut() {
                if !(*t > T::zero()) {
                    *t = T::zero();
                }
            }
            if theta[..s].iter().any(|&t| t > T::zero()) {
                renormalize(&mut theta, s);
                return theta;
            }
            theta.iter_mut().for_each(|t| *t = T::zero());
        }
    }
    let nearest = (0..s)
        .min_by(|&a, &b| {
            dist(&cols.points[a], target)
                .partial_cmp(&dist(&cols.points[b], target))
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .unwrap_or(0);
    theta[nearest] = T::one();
    theta
}
