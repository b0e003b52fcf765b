use proptest::prelude::*;

use vsbenson::driver::run_observed;
use vsbenson::instances::ellipsoid;
use vsbenson::polyhedron::Halfspace;
use vsbenson::solvers::project_onto_inner;
use vsbenson::vselect::skip_test;
use vsbenson::{Cone64, InnerApprox, Polyhedron64, RunConfig64, Status, Vcp64};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn point(q: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0..3.0f64, q)
}

fn h_system() -> impl Strategy<Value = (usize, Vec<(Vec<f64>, f64)>)> {
    (2usize..=4).prop_flat_map(|q| {
        let h = (prop::collection::vec(0.0..1.0f64, q), -1.0..1.0f64);
        (Just(q), prop::collection::vec(h, q..=10))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn vertices_satisfy_every_halfspace((q, rows) in h_system()) {
        let hs: Vec<Halfspace<f64>> = rows
            .into_iter()
            .filter_map(|(n, b)| Halfspace::new(n, b).ok())
            .collect();
        prop_assume!(hs.len() >= q);
        let Ok(mut poly) = Polyhedron64::from_halfspaces(&hs[..q], 1e-9) else {
            return Ok(());
        };
        for h in &hs[q..] {
            let before = poly.vertex_count();
            let rep = poly.add_halfspace(h).unwrap();
            prop_assert_eq!(before, rep.cut.len() + rep.kept.len());
            prop_assert_eq!(poly.vertex_count(), rep.kept.len() + rep.created.len());
            // a halfspace may cut only rays, so the converse does not hold
            if rep.redundant {
                prop_assert!(rep.cut.is_empty() && rep.created.is_empty());
            }
        }
        for v in poly.vertices() {
            for h in &hs {
                prop_assert!(h.slack(v.point) >= -1e-8);
            }
            // at least q tight halfspaces
            let tight = hs.iter().filter(|h| h.slack(v.point).abs() < 1e-7).count();
            prop_assert!(tight >= q);
        }
        for r in poly.rays() {
            for h in &hs {
                prop_assert!(dot(&h.normal, r) >= -1e-9);
            }
        }
    }

    #[test]
    fn projection_satisfies_optimality(
        pts in prop::collection::vec(point(3), 1..8),
        s in point(3),
    ) {
        let cone = Cone64::natural(3).unwrap();
        let rays = cone.generators().to_vec();
        let p = project_onto_inner(&pts, &rays, &s, None, 1e-12);
        let lsum: f64 = p.lambda.iter().sum();
        prop_assert!((lsum - 1.0).abs() < 1e-9);
        prop_assert!(p.lambda.iter().chain(&p.mu).all(|&t| t >= 0.0));
        let r: Vec<f64> = s.iter().zip(&p.point).map(|(a, b)| a - b).collect();
        // variational inequality against every generator
        for v in &pts {
            let d: Vec<f64> = v.iter().zip(&p.point).map(|(a, b)| a - b).collect();
            prop_assert!(dot(&r, &d) <= 1e-8);
            prop_assert!(p.dist <= dot(&r, &r).sqrt() + 1e-12);
        }
        for d in &rays {
            prop_assert!(dot(&r, d) <= 1e-8);
        }
    }

    #[test]
    fn skip_test_is_sound(
        pts in prop::collection::vec(point(3), 1..6),
        s in point(3),
        y in point(3),
    ) {
        let cone = Cone64::natural(3).unwrap();
        let mut inner = InnerApprox::new(&cone);
        for p in &pts {
            inner.add_point(p, &cone, 1e-12).unwrap();
        }
        let before = inner.project(&s, None, 1e-12).unwrap();
        if skip_test(&s, &before.point, &y, 0.0) {
            inner.add_point(&y, &cone, 1e-12).unwrap();
            let after = inner.project(&s, None, 1e-12).unwrap();
            prop_assert!((after.dist - before.dist).abs() < 1e-8);
        }
    }

    #[test]
    fn duplicate_and_dominated_points_are_dropped(p in point(3), d in prop::collection::vec(0.0..1.0f64, 3)) {
        let cone = Cone64::natural(3).unwrap();
        let mut inner = InnerApprox::new(&cone);
        prop_assert!(inner.add_point(&p, &cone, 1e-9).unwrap());
        prop_assert!(!inner.add_point(&p, &cone, 1e-9).unwrap());
        let up: Vec<f64> = p.iter().zip(&d).map(|(a, b)| a + b).collect();
        prop_assert!(!inner.add_point(&up, &cone, 1e-9).unwrap());
        prop_assert_eq!(inner.points().len(), 1);
    }

    #[test]
    fn unit_ball_shifts_into_the_cone(
        z in prop::collection::vec(prop::collection::vec(0.05..1.0f64, 3), 3..6),
        u in prop::collection::vec(-1.0..1.0f64, 3),
    ) {
        let Ok(cone) = Cone64::from_dual_generators(z, 1e-9) else {
            return Ok(());
        };
        let c = cone.canonical_direction();
        let k = cone.infimizer_constant(&c).unwrap();
        prop_assert!(k >= 1.0 - 1e-12);
        let n = dot(&u, &u).sqrt();
        prop_assume!(n > 1e-3);
        let shifted: Vec<f64> = u.iter().zip(&c).map(|(a, b)| a / n + k * b).collect();
        for zj in cone.dual_generators() {
            prop_assert!(dot(zj, &shifted) >= -1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn ellipsoid_runs_stay_sandwiched(a in 1.0..8.0f64, eps in 0.1..0.5f64) {
        let vcp: Vcp64 = ellipsoid(a).unwrap().vcp().unwrap();
        let cfg = RunConfig64 { timing: false, ..RunConfig64::new(eps, 500) };
        let r = run_observed(&vcp, &cfg, |st| {
            for p in st.inner.points() {
                assert!(st.outer.contains(p, 1e-7).unwrap());
            }
        })
        .unwrap();
        prop_assert_eq!(r.status, Status::Converged);
        prop_assert!(r.d_h <= eps);
    }
}
