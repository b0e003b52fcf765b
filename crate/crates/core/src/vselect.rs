//! Vertex selection: projections of the outer vertices onto the inner
//! approximation, kept in a cache that survives inner-set growth whenever a
//! single inequality shows the old projection is still optimal.
//!
//! For a vertex `s` with projection `p*` onto `I`, and `I' = conv(I ∪ {y}) + C`,
//! `p*` stays optimal for `I'` iff `(p* - s)ᵀ(y - p*) >= 0`.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::Result;
use crate::linalg::{dist, dot, sub, Lu, Mat};
use crate::polyhedron::{CutReport, InnerApprox, Polyhedron};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct CacheEntry<T> {
    /// Nearest point of the inner approximation.
    pub point: Vec<T>,
    pub dist: T,
    /// `[λ, μ]` of the last solve, reused as a warm start.
    pub coeffs: Vec<T>,
    /// Generation in which the entry was last solved.
    pub solved_at: u64,
}

/// Per-vertex projections keyed by outer vertex id.
#[derive(Clone, Debug, Default)]
pub struct ProjectionCache<T> {
    entries: BTreeMap<usize, CacheEntry<T>>,
    /// Vertices excluded from selection, with the distance they were barred at.
    barred: BTreeMap<usize, T>,
    generation: u64,
}

/// What a refresh did.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RefreshStats {
    pub solved: usize,
    pub skipped: usize,
    /// Ids whose entries were retained without a solve.
    pub skipped_ids: Vec<usize>,
}

/// Result of the selection step.
#[derive(Clone, Debug, PartialEq)]
pub struct Selection<T> {
    pub id: usize,
    pub vertex: Vec<T>,
    /// Projection of the vertex onto the inner approximation.
    pub point: Vec<T>,
    pub dist: T,
}

impl<T: Real> ProjectionCache<T> {
    pub fn new() -> Self {
        ProjectionCache {
            entries: BTreeMap::new(),
            barred: BTreeMap::new(),
            generation: 0,
        }
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn get(&self, id: usize) -> Option<&CacheEntry<T>> {
        self.entries.get(&id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, &CacheEntry<T>)> + '_ {
        self.entries.iter().map(|(&id, e)| (id, e))
    }

    /// Excludes `id` from selection until its cached distance changes.
    pub fn bar(&mut self, id: usize) {
        if let Some(e) = self.entries.get(&id) {
            self.barred.insert(id, e.dist);
        }
    }

    pub fn is_barred(&self, id: usize) -> bool {
        self.barred.contains_key(&id)
    }

    /// Solves every vertex of `outer` from scratch.
    pub fn fill(&mut self, outer: &Polyhedron<T>, inner: &InnerApprox<T>, tol: T) -> Result<RefreshStats> {
        self.generation += 1;
        self.entries.clear();
        self.barred.clear();
        let jobs: Vec<(usize, Vec<T>, Option<Vec<T>>)> =
            outer.vertices().map(|v| (v.id, v.point.to_vec(), None)).collect();
        let solved = self.solve_batch(jobs, inner, tol)?;
        Ok(RefreshStats {
            solved,
            ..RefreshStats::default()
        })
    }

    /// Brings the cache up to date after one iteration. `added` is the new
    /// inner point, or `None` when the inner set did not change (the point
    /// was a duplicate or dominated).
    pub fn refresh(
        &mut self,
        outer: &Polyhedron<T>,
        report: &CutReport,
        added: Option<&[T]>,
        inner: &InnerApprox<T>,
        tol_kkt: T,
    ) -> Result<RefreshStats> {
        self.generation += 1;
        for id in &report.cut {
            self.entries.remove(id);
            self.barred.remove(id);
        }
        let alive: Vec<(usize, Vec<T>)> = outer.vertices().map(|v| (v.id, v.point.to_vec())).collect();
        self.entries.retain(|id, _| alive.iter().any(|(a, _)| a == id));
        self.barred.retain(|id, _| alive.iter().any(|(a, _)| a == id));

        let mut stats = RefreshStats::default();
        let mut jobs = Vec::new();
        for (id, s) in alive {
            match self.entries.get(&id) {
                None => jobs.push((id, s, None)),
                Some(e) => {
                    let keep = match added {
                        None => true,
                        Some(y) => skip_test(&s, &e.point, y, tol_kkt),
                    };
                    if keep {
                        stats.skipped += 1;
                        stats.skipped_ids.push(id);
                    } else {
                        jobs.push((id, s, Some(e.coeffs.clone())));
                    }
                }
            }
        }
        stats.solved = self.solve_batch(jobs, inner, tol_kkt)?;
        Ok(stats)
    }

    fn solve_batch(
        &mut self,
        jobs: Vec<(usize, Vec<T>, Option<Vec<T>>)>,
        inner: &InnerApprox<T>,
        tol: T,
    ) -> Result<usize> {
        let results: Vec<(usize, Result<_>)> = jobs
            .into_par_iter()
            .map(|(id, s, warm)| (id, inner.project(&s, warm.as_deref(), tol)))
            .collect();
        let n = results.len();
        for (id, r) in results {
            let p = r?;
            if let Some(&d) = self.barred.get(&id) {
                if d != p.dist {
                    self.barred.remove(&id);
                }
            }
            self.entries.insert(
                id,
                CacheEntry {
                    coeffs: p.coeffs(),
                    point: p.point,
                    dist: p.dist,
                    solved_at: self.generation,
                },
            );
        }
        Ok(n)
    }

    /// Largest change in distance when every entry is solved afresh.
    pub fn audit(&self, outer: &Polyhedron<T>, inner: &InnerApprox<T>, tol: T) -> Result<T> {
        let mut worst = T::zero();
        for v in outer.vertices() {
            let fresh = inner.project(v.point, None, tol)?;
            let cached = self.entries.get(&v.id).map_or(T::infinity(), |e| e.dist);
            worst = worst.max((fresh.dist - cached).abs());
        }
        Ok(worst)
    }
}

/// `(p* - s)ᵀ(y - p*) >= -tol`: the cached projection is still optimal.
pub fn skip_test<T: Real>(s: &[T], p: &[T], y: &[T], tol: T) -> bool {
    dot(&sub(p, s), &sub(y, p)) >= -tol
}

/// The Hausdorff distance between outer and inner approximation: the
/// largest cached distance over all outer vertices.
pub fn hausdorff<T: Real>(outer: &Polyhedron<T>, cache: &ProjectionCache<T>) -> T {
    outer
        .vertices()
        .filter_map(|v| cache.get(v.id))
        .map(|e| e.dist)
        .fold(T::zero(), T::max)
}

/// The vertex farthest from the inner approximation, ties going to the
/// lowest id. Barred vertices are passed over; `None` when nothing is
/// selectable.
pub fn select_vertex<T: Real>(outer: &Polyhedron<T>, cache: &ProjectionCache<T>) -> Option<Selection<T>> {
    let mut best: Option<Selection<T>> = None;
    for v in outer.vertices() {
        if cache.is_barred(v.id) {
            continue;
        }
        let Some(e) = cache.get(v.id) else { continue };
        // Vertices come in id order, so a strict comparison keeps the lowest.
        if best.as_ref().map_or(true, |b| e.dist > b.dist) {
            best = Some(Selection {
                id: v.id,
                vertex: v.point.to_vec(),
                point: e.point.clone(),
                dist: e.dist,
            });
        }
    }
    best
}

/// Projection of `s` onto `conv points + cone rays` by enumerating every
/// support of at most `q + 1` columns. Exponential; meant as a test oracle.
pub fn project_bruteforce<T: Real>(points: &[Vec<T>], rays: &[Vec<T>], s: &[T]) -> (Vec<T>, T) {
    let cols: Vec<&[T]> = points.iter().chain(rays).map(Vec::as_slice).collect();
    let np = points.len();
    let q = s.len();
    let mut best = (points[0].clone(), dist(&points[0], s));
    let mut subset = Vec::new();
    enumerate_subsets(cols.len(), q + 1, 0, &mut subset, &mut |sub| {
        if !sub.iter().any(|&j| j < np) {
            return;
        }
        if let Some(p) = support_candidate(&cols, np, sub, s) {
            let d = dist(&p, s);
            if d < best.1 {
                best = (p, d);
            }
        }
    });
    best
}

fn enumerate_subsets(n: usize, max: usize, from: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if !cur.is_empty() {
        f(cur);
    }
    if cur.len() == max {
        return;
    }
    for j in from..n {
        cur.push(j);
        enumerate_subsets(n, max, j + 1, cur, f);
        cur.pop();
    }
}

/// Minimizer of `‖Bθ - s‖` over the affine hull of the support, if its
/// weights are nonnegative.
fn support_candidate<T: Real>(cols: &[&[T]], np: usize, sub: &[usize], s: &[T]) -> Option<Vec<T>> {
    let k = sub.len();
    let mut m = Mat::zeros(k + 1, k + 1);
    let mut rhs = vec![T::zero(); k + 1];
    for (a, &ja) in sub.iter().enumerate() {
        for (b, &jb) in sub.iter().enumerate() {
            m[(a, b)] = dot(cols[ja], cols[jb]);
        }
        if ja < np {
            m[(a, k)] = T::one();
            m[(k, a)] = T::one();
        }
        rhs[a] = dot(cols[ja], s);
    }
    rhs[k] = T::one();
    let lu = Lu::new(&m, T::epsilon().sqrt())?;
    let theta = lu.solve(&rhs);
    let neg = T::tol_floor(1e-12, 1e2);
    if theta[..k].iter().any(|&t| !(t >= -neg)) {
        return None;
    }
    let mut p = vec![T::zero(); s.len()];
    for (&j, &t) in sub.iter().zip(&theta) {
        for (pi, &c) in p.iter_mut().zip(cols[j]) {
            *pi = *pi + t.max(T::zero()) * c;
        }
    }
    Some(p)
}

/// Hausdorff distance by brute-force projection of every outer vertex.
pub fn hausdorff_bruteforce<T: Real>(outer: &Polyhedron<T>, inner: &InnerApprox<T>) -> T {
    outer
        .vertices()
        .map(|v| project_bruteforce(inner.points(), inner.rays(), v.point).1)
        .fold(T::zero(), T::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::Cone;
    use crate::polyhedron::Halfspace;

    fn disk_init() -> (Polyhedron<f64>, InnerApprox<f64>) {
        let cone = Cone::natural(2).unwrap();
        let outer = Polyhedron::from_halfspaces(
            &[
                Halfspace::new(vec![1.0, 0.0], -1.0).unwrap(),
                Halfspace::new(vec![0.0, 1.0], -1.0).unwrap(),
            ],
            1e-9,
        )
        .unwrap();
        let inner = InnerApprox::from_parts(2, vec![vec![-1.0, 0.0], vec![0.0, -1.0]], cone.generators().to_vec());
        (outer, inner)
    }

    #[test]
    fn skip_test_cases() {
        let s = [0.0, 0.0];
        let p = [0.5, 0.5];
        assert!(skip_test(&s, &p, &[1.0, 1.0], 1e-8));
        assert!(!skip_test(&s, &p, &[0.2, 0.2], 1e-8));
        assert!(skip_test(&s, &p, &p, 1e-8));
    }

    #[test]
    fn stale_entry_is_resolved() {
        let cone = Cone::natural(2).unwrap();
        let outer = Polyhedron::from_halfspaces(
            &[
                Halfspace::new(vec![1.0, 0.0], 0.0).unwrap(),
                Halfspace::new(vec![0.0, 1.0], 0.0).unwrap(),
            ],
            1e-9,
        )
        .unwrap();
        let mut inner = InnerApprox::from_parts(2, vec![vec![1.0, 0.0], vec![0.0, 1.0]], cone.generators().to_vec());
        let mut cache = ProjectionCache::new();
        cache.fill(&outer, &inner, 1e-10).unwrap();
        let id = outer.vertices().next().unwrap().id;
        assert!((cache.get(id).unwrap().dist - 0.5f64.sqrt()).abs() < 1e-12);

        inner.add_point(&[0.2, 0.2], &cone, 1e-7).unwrap();
        let report = CutReport {
            kept: vec![id],
            redundant: true,
            ..CutReport::default()
        };
        let st = cache.refresh(&outer, &report, Some(&[0.2, 0.2]), &inner, 1e-8).unwrap();
        assert_eq!((st.solved, st.skipped), (1, 0));
        let e = cache.get(id).unwrap();
        assert!((e.dist - 0.2 * 2f64.sqrt()).abs() < 1e-12);
        assert!(dist(&e.point, &[0.2, 0.2]) < 1e-12);

        // a far point leaves the projection alone
        inner.add_point(&[5.0, -1.0], &cone, 1e-7).unwrap();
        let st = cache
            .refresh(&outer, &report, Some(&[5.0, -1.0]), &inner, 1e-8)
            .unwrap();
        assert_eq!((st.solved, st.skipped), (0, 1));
        assert!(cache.audit(&outer, &inner, 1e-10).unwrap() < 1e-7);
    }

    #[test]
    fn disk_initial_selection() {
        let (outer, inner) = disk_init();
        let mut cache = ProjectionCache::new();
        cache.fill(&outer, &inner, 1e-10).unwrap();
        let sel = select_vertex(&outer, &cache).unwrap();
        assert_eq!(sel.vertex, vec![-1.0, -1.0]);
        assert!(dist(&sel.point, &[-0.5, -0.5]) < 1e-12);
        assert!((sel.dist - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((hausdorff(&outer, &cache) - hausdorff_bruteforce(&outer, &inner)).abs() < 1e-12);
    }

    #[test]
    fn ties_go_to_the_lowest_id_and_bars_hold() {
        let (mut outer, inner) = disk_init();
        let s = 0.5f64.sqrt();
        // Cut the corner symmetrically: two new vertices at equal distance.
        outer
            .add_halfspace(&Halfspace::new(vec![s, s], -s * 1.5).unwrap())
            .unwrap();
        let mut cache = ProjectionCache::new();
        cache.fill(&outer, &inner, 1e-10).unwrap();
        let ids: Vec<usize> = outer.vertices().map(|v| v.id).collect();
        let d: Vec<f64> = ids.iter().map(|&i| cache.get(i).unwrap().dist).collect();
        assert!((d[0] - d[1]).abs() < 1e-12);
        let sel = select_vertex(&outer, &cache).unwrap();
        assert_eq!(sel.id, ids[0]);
        cache.bar(ids[0]);
        assert_eq!(select_vertex(&outer, &cache).unwrap().id, ids[1]);
        cache.bar(ids[1]);
        assert!(select_vertex(&outer, &cache).is_none());
        // d_H still covers barred vertices
        assert!((hausdorff(&outer, &cache) - d[0]).abs() < 1e-15);
    }

    #[test]
    fn bruteforce_matches_identical_sets() {
        let cone = Cone::natural(2).unwrap();
        let outer = Polyhedron::from_halfspaces(
            &[
                Halfspace::new(vec![1.0, 0.0], 0.0).unwrap(),
                Halfspace::new(vec![0.0, 1.0], 0.0).unwrap(),
            ],
            1e-9,
        )
        .unwrap();
        let inner = InnerApprox::from_parts(2, vec![vec![0.0, 0.0]], cone.generators().to_vec());
        assert_eq!(hausdorff_bruteforce(&outer, &inner), 0.0);
    }
}
