//! Generate a document, reload it from text, solve and certify.

use vsbenson::instances::{elastic_net, ellipsoid, oracle_for, truss, Instance, TrussParams};
use vsbenson::*;

fn quiet(eps: f64) -> RunConfig64 {
    RunConfig {
        timing: false,
        ..RunConfig64::new(eps, 500)
    }
}

fn solve_from_text(inst: &Instance, eps: f64) -> (Vcp64, RunResult, CertReport) {
    let text = inst.doc.to_json();
    let vcp: Vcp64 = load_problem(&text).unwrap();
    let r = run(&vcp, &quiet(eps)).unwrap();
    assert_eq!(r.status, Status::Converged, "{}", inst.name);
    // results survive a JSON round trip unchanged
    assert_eq!(RunResult::from_json(&r.to_json()).unwrap(), r);
    let oracle = oracle_for(&inst.doc);
    let opts = CertifyOptions {
        samples: 2000,
        ..CertifyOptions::default()
    };
    let rep = certify(&r, &vcp, oracle.as_deref(), &opts).unwrap();
    assert!(rep.passes, "{}: {rep:?}", inst.name);
    (vcp, r, rep)
}

#[test]
fn ellipsoid_round_trip() {
    let (_, r, rep) = solve_from_text(&ellipsoid(5.0).unwrap(), 0.1);
    assert!(rep.require_oracle().unwrap().max_surface_residual < 1e-6);
    assert!(r.d_h <= 0.1);
}

#[test]
fn truss_round_trip() {
    for nonnegative_loads in [false, true] {
        let p = TrussParams {
            nonnegative_loads,
            ..TrussParams::default()
        };
        let inst = truss(&p).unwrap();
        let (vcp, r, _) = solve_from_text(&inst, 0.5);
        assert_eq!(vcp.q(), 4);
        // every solution carries the full load
        for s in &r.solutions {
            let total: f64 = s.x.iter().sum();
            assert!((total - p.force).abs() < 1e-6 * p.force, "{total}");
        }
    }
}

#[test]
fn elastic_net_round_trip() {
    let eps = 0.5;
    let (vcp, r, _) = solve_from_text(&elastic_net(12, 8, 1).unwrap(), eps);
    for s in &r.solutions {
        assert!(s.f.iter().all(|&v| v >= 0.0), "{:?}", s.f);
        let image = vcp.image(&s.x).unwrap();
        for (a, b) in image.iter().zip(&s.f) {
            assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()));
        }
    }
    // each solution is near optimal for its own weight among all of X
    for s in &r.solutions {
        let own: f64 = s.w.iter().zip(&s.f).map(|(w, f)| w * f).sum();
        let best = r
            .solutions
            .iter()
            .map(|o| s.w.iter().zip(&o.f).map(|(w, f)| w * f).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        let wn = s.w.iter().map(|w| w * w).sum::<f64>().sqrt();
        assert!(own <= best + eps * wn + 1e-9, "{own} vs {best}");
    }
}
