//! After-the-fact checks of a finished run.

use serde::{Deserialize, Serialize};

use super::{RunResult, Status};
use crate::error::{Error, Result};
use crate::instances::UpperImageOracle;
use crate::linalg::dot;
use crate::polyhedron::{Halfspace, InnerApprox, Polyhedron};
use crate::problem::Vcp;
use crate::scalar::Real;
use crate::vselect::project_bruteforce;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertifyOptions {
    pub samples: usize,
    pub seed: u64,
    /// Allowed violation of an outer halfspace by a point of the upper image.
    pub outer_tol: f64,
    /// Brute-force recomputation of `d_H` only up to this many columns.
    pub bruteforce_columns: usize,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            samples: 10_000,
            seed: 0,
            outer_tol: 1e-6,
            bruteforce_columns: 16,
        }
    }
}

/// Comparison of the approximations with sampled points of the true upper
/// image.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleCheck {
    pub samples: usize,
    /// Largest violation of an outer halfspace by a sample.
    pub max_outer_violation: f64,
    /// Largest distance from a sample to `conv F[X] + C`.
    pub max_inner_distance: f64,
    /// Largest distance of a computed image from the weakly minimal surface.
    pub max_surface_residual: f64,
    /// The conversion constant `k` for the canonical direction `ĉ`.
    pub k: f64,
    /// Largest distance from `y + kεĉ` to `conv F[X] + C` over the samples;
    /// zero when the shifted inclusion holds.
    pub max_shifted_gap: f64,
    pub passes: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertReport {
    pub d_h: f64,
    /// `d_H` from cold projections of the rebuilt approximations.
    pub d_h_recomputed: f64,
    /// `d_H` by support enumeration, when small enough.
    pub d_h_bruteforce: Option<f64>,
    pub oracle: Option<OracleCheck>,
    pub passes: bool,
}

impl CertReport {
    pub fn require_oracle(&self) -> Result<&OracleCheck> {
        self.oracle.as_ref().ok_or(Error::OracleUnavailable)
    }
}

/// Rebuilds outer and inner approximation from `result` and checks the
/// Hausdorff certificate, and (with an oracle) inclusion of sampled points
/// of the upper image, their distance to `conv F[X] + C`, and the shifted
/// inclusion `y + kεĉ ∈ conv F[X] + C`.
pub fn certify<T: Real>(
    result: &RunResult,
    vcp: &Vcp<T>,
    oracle: Option<&dyn UpperImageOracle>,
    opts: &CertifyOptions,
) -> Result<CertReport> {
    if result.status != Status::Converged {
        return Err(Error::NotConverged(format!("{:?}", result.status)));
    }
    let cone = vcp.cone();
    let tol = T::tol_floor(1e-10, 1e3);
    let lit = |v: &[f64]| v.iter().map(|&x| T::lit(x)).collect::<Vec<T>>();
    let hs = result
        .outer_halfspaces
        .iter()
        .map(|h| Halfspace::new(lit(&h.normal), T::lit(h.offset)))
        .collect::<Result<Vec<_>>>()?;
    let outer = Polyhedron::from_halfspaces(&hs, T::tol_floor(1e-9, 1e3))?;
    let mut inner = InnerApprox::new(cone);
    for s in &result.solutions {
        inner.add_point(&lit(&s.f), cone, T::zero())?;
    }

    let mut d_h_recomputed = T::zero();
    for v in outer.vertices() {
        d_h_recomputed = d_h_recomputed.max(inner.project(v.point, None, tol)?.dist);
    }
    let columns = inner.points().len() + inner.rays().len();
    let d_h_bruteforce = (columns <= opts.bruteforce_columns).then(|| {
        outer
            .vertices()
            .map(|v| project_bruteforce(inner.points(), inner.rays(), v.point).1.as_f64())
            .fold(0.0, f64::max)
    });
    let eps = result.epsilon;
    let slack = 1e-6 * eps.max(1.0);
    let mut passes = d_h_recomputed.as_f64() <= eps + slack;

    let oracle = match oracle {
        None => None,
        Some(o) => {
            let c_hat = cone.canonical_direction();
            let k = cone.infimizer_constant(&c_hat)?;
            let shift: Vec<T> = c_hat.iter().map(|&c| c * k * T::lit(eps)).collect();
            let mut check = OracleCheck {
                samples: opts.samples,
                max_outer_violation: 0.0,
                max_inner_distance: 0.0,
                max_surface_residual: 0.0,
                k: k.as_f64(),
                max_shifted_gap: 0.0,
                passes: false,
            };
            for y in o.boundary_samples(opts.samples, opts.seed) {
                let yt = lit(&y);
                for h in &hs {
                    let viol = (h.offset - dot(&h.normal, &yt)).as_f64();
                    check.max_outer_violation = check.max_outer_violation.max(viol);
                }
                let d = inner.project(&yt, None, tol)?.dist.as_f64();
                check.max_inner_distance = check.max_inner_distance.max(d);
                let shifted: Vec<T> = yt.iter().zip(&shift).map(|(&a, &b)| a + b).collect();
                let g = inner.project(&shifted, None, tol)?.dist.as_f64();
                check.max_shifted_gap = check.max_shifted_gap.max(g);
            }
            for s in &result.solutions {
                check.max_surface_residual = check.max_surface_residual.max(o.surface_residual(&s.f));
            }
            check.passes = check.max_outer_violation <= opts.outer_tol
                && check.max_inner_distance <= eps + slack
                && check.max_shifted_gap <= slack;
            passes &= check.passes;
            Some(check)
        }
    };
    Ok(CertReport {
        d_h: result.d_h,
        d_h_recomputed: d_h_recomputed.as_f64(),
        d_h_bruteforce,
        oracle,
        passes,
    })
}
