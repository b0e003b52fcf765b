use super::*;
use crate::instances::{disk, ellipsoid};
use crate::vselect::hausdorff_bruteforce;

fn disk_vcp() -> Vcp<f64> {
    disk().vcp().unwrap()
}

fn quiet(eps: f64, k: usize) -> RunConfig<f64> {
    RunConfig {
        timing: false,
        ..RunConfig::new(eps, k)
    }
}

#[test]
fn disk_initialization() {
    let vcp = disk_vcp();
    let st = initialize(&vcp, &quiet(0.1, 10)).unwrap();
    let verts: Vec<&[f64]> = st.outer.vertices().map(|v| v.point).collect();
    assert_eq!(verts.len(), 1);
    assert!(dist(verts[0], &[-1.0, -1.0]) < 1e-6);
    let mut pts = st.inner.points().to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert!(dist(&pts[0], &[-1.0, 0.0]) < 1e-6 && dist(&pts[1], &[0.0, -1.0]) < 1e-6);
    assert!((st.d_h - 0.5f64.sqrt()).abs() < 1e-6);
    assert_eq!(st.solutions.len(), 2);
}

#[test]
fn disk_first_cut_touches_the_circle() {
    let vcp = disk_vcp();
    let cfg = quiet(0.1, 10);
    let mut st = initialize(&vcp, &cfg).unwrap();
    assert_eq!(iterate_vs(&mut st, &vcp, &cfg).unwrap(), Step::Continued);
    let cut = &st.cuts[0];
    assert!(dist(&cut.c, &[0.5, 0.5]) < 1e-6);
    assert!((cut.z - (2.0 - 2f64.sqrt())).abs() < 1e-6);
    // v + z c on the unit circle
    let touch: Vec<f64> = cut.v.iter().zip(&cut.c).map(|(v, c)| v + cut.z * c).collect();
    assert!((norm(&touch) - 1.0).abs() < 1e-6);
    let s = 0.5f64.sqrt();
    let new = st.inner.points().last().unwrap();
    assert!(dist(new, &[-s, -s]) < 1e-6);
    assert_eq!(st.outer.vertex_count(), 2);
    let v: Vec<&[f64]> = st.outer.vertices().map(|v| v.point).collect();
    assert!((v[0][0] - v[1][1]).abs() < 1e-6 && (v[0][1] - v[1][0]).abs() < 1e-6);
}

#[test]
fn large_epsilon_needs_no_iteration() {
    let r = run(&disk_vcp(), &quiet(0.75, 10)).unwrap();
    assert_eq!(r.status, Status::Converged);
    assert_eq!(r.iterations, 0);
}

#[test]
fn disk_converges_with_points_on_the_circle() {
    let vcp = disk_vcp();
    let mut checked = 0;
    let r = run_observed(&vcp, &quiet(0.05, 500), |st| {
        let bf = hausdorff_bruteforce(&st.outer, &st.inner);
        assert!((bf - st.d_h).abs() < 1e-7, "{bf} vs {}", st.d_h);
        for p in st.inner.points() {
            assert!(st.outer.contains(p, 1e-7).unwrap());
        }
        checked += 1;
    })
    .unwrap();
    assert_eq!(r.status, Status::Converged);
    assert!(r.d_h <= 0.05);
    assert_eq!(checked, r.iterations + 1);
    for s in &r.solutions {
        assert!((norm(&s.x) - 1.0).abs() < 1e-6);
    }
    let total: usize = r.counters.qp_solved + r.counters.qp_skipped;
    assert!(total > 0);
}

#[test]
fn iteration_limit_is_reported() {
    let r = run(&disk_vcp(), &quiet(1e-6, 1)).unwrap();
    assert_eq!(r.status, Status::MaxIter);
    assert_eq!(r.iterations, 1);
    assert!(!r.solutions.is_empty());
    assert!(quiet(-1.0, 1).validate().is_err());
    assert!(quiet(0.1, 0).validate().is_err());
}

#[test]
fn baseline_resolves_with_large_epsilon() {
    let cfg = quiet(0.75, 10).with_mode(Mode::BaselineFirst);
    let r = run(&disk_vcp(), &cfg).unwrap();
    assert_eq!(r.status, Status::Converged);
    assert_eq!(r.iterations, 1);
    assert!(r.d_h <= 0.75);
}

#[test]
fn baseline_needs_at_least_as_many_solves() {
    let vcp = disk_vcp();
    let vs = run(&vcp, &quiet(0.05, 500)).unwrap();
    let base = run(&vcp, &quiet(0.05, 500).with_mode(Mode::BaselineFirst)).unwrap();
    assert_eq!(base.status, Status::Converged);
    assert!(base.d_h <= 0.05 + 1e-9);
    assert!(base.counters.scalarizations >= vs.counters.scalarizations);
}

#[test]
fn seeded_random_baseline_is_reproducible() {
    let vcp = disk_vcp();
    let cfg = quiet(0.05, 500).with_mode(Mode::BaselineRandom { seed: 7 });
    let a = run(&vcp, &cfg).unwrap();
    let b = run(&vcp, &cfg).unwrap();
    let csv = |r: &RunResult| {
        let mut buf = Vec::new();
        r.write_log(&mut buf).unwrap();
        buf
    };
    assert_eq!(csv(&a), csv(&b));
}

#[test]
fn infeasible_problem_is_reported() {
    let doc = r#"{"n": 2, "cone": {"natural": 2},
        "objectives": [{"kind": "affine", "c": [1, 0]}, {"kind": "affine", "c": [0, 1]}],
        "constraints": [{"atom": {"kind": "quadratic", "Q": [[2, 0], [0, 2]], "c": [0, 0], "r": 2}, "ub": 1}]}"#;
    let vcp = crate::problem::load_problem::<f64>(doc).unwrap();
    assert_eq!(run(&vcp, &quiet(0.1, 10)).unwrap_err(), Error::ProgramInfeasible);
}

#[test]
fn disk_certificate() {
    let inst = disk();
    let vcp: Vcp<f64> = inst.vcp().unwrap();
    let r = run(&vcp, &quiet(0.05, 500)).unwrap();
    let opts = CertifyOptions {
        samples: 500,
        ..CertifyOptions::default()
    };
    let rep = certify(&r, &vcp, inst.oracle.as_deref(), &opts).unwrap();
    assert!(rep.passes, "{rep:?}");
    let o = rep.require_oracle().unwrap();
    assert!((o.k - 2f64.sqrt()).abs() < 1e-12);
    assert!((rep.d_h_recomputed - r.d_h).abs() < 1e-7);

    let bare = certify(&r, &vcp, None, &opts).unwrap();
    assert_eq!(bare.require_oracle().unwrap_err(), Error::OracleUnavailable);
}

#[test]
fn ellipsoid_initialization() {
    let vcp: Vcp<f64> = ellipsoid(7.0).unwrap().vcp().unwrap();
    let st = initialize(&vcp, &quiet(0.05, 10)).unwrap();
    let v: Vec<&[f64]> = st.outer.vertices().map(|v| v.point).collect();
    assert_eq!(v.len(), 1);
    assert!(dist(v[0], &[0.0, -6.0, -4.0]) < 1e-5);
    let want = [[0.0, 1.0, 1.0], [1.0, -6.0, 1.0], [1.0, 1.0, -4.0]];
    for (s, w) in st.solutions.iter().zip(&want) {
        assert!(dist(&s.f, w) < 1e-4, "{:?}", s.f);
    }
}
