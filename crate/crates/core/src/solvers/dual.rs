//! Recovery of the cut normal from the multipliers of the ordering rows of
//! the direction scalarization.

use crate::cone::Cone;
use crate::error::{Error, Result};
use crate::linalg::{dot, norm};
use crate::scalar::Real;

use super::ScalarSolution;

/// Largest tolerated `|wᵀc - 1|` before the final rescaling, relative to
/// `‖w‖‖c‖` (directions near the cone boundary give long weights).
const WC_TOL: f64 = 1e-3;

/// `w = Σ_j u_j ẑ_j` over the ordering-row multipliers, rescaled so that
/// `wᵀc = 1` exactly. Stationarity in `z` forces `wᵀc = 1` at an exact
/// optimum, so a large deviation signals an inaccurate solve.
pub fn derive_dual_weight<T: Real>(sol: &ScalarSolution<T>, cone: &Cone<T>, c: &[T]) -> Result<Vec<T>> {
    let q = cone.dim();
    if c.len() != q {
        return Err(Error::DimMismatch {
            expected: q,
            got: c.len(),
        });
    }
    let z = cone.dual_generators();
    let mut w = vec![T::zero(); q];
    for (j, u) in sol.z_multipliers() {
        let u = u.max(T::zero());
        for (wi, &zi) in w.iter_mut().zip(&z[j]) {
            *wi = *wi + u * zi;
        }
    }
    let wn = norm(&w);
    let wc = dot(&w, c);
    let scale = T::one().max(wn * norm(c));
    let tol = T::lit(WC_TOL).max(T::epsilon() * T::lit(1e3)) * scale;
    if wn < cone.tol() || (wc - T::one()).abs() > tol {
        return Err(Error::DualDegenerate {
            norm: wn.as_f64(),
            wc: wc.as_f64(),
        });
    }
    Ok(w.into_iter().map(|v| v / wc).collect())
}

#[cfg(test)]
mod tests {
    use super::super::{KktResidual, RowTag, SolveStatus};
    use super::*;

    fn solution(u: Vec<f64>) -> ScalarSolution<f64> {
        let tags = (0..u.len()).map(RowTag::Z).collect();
        ScalarSolution {
            x: vec![],
            full: vec![],
            value: 0.0,
            z: Some(0.0),
            u,
            nu: vec![],
            tags,
            status: SolveStatus::Optimal,
            kkt: KktResidual {
                stationarity: 0.0,
                complementarity: 0.0,
                feasibility: 0.0,
            },
        }
    }

    #[test]
    fn single_active_row() {
        let cone = Cone::natural(2).unwrap();
        let c = [0.8, 0.6];
        let w = derive_dual_weight(&solution(vec![1.0 / 0.8, 0.0]), &cone, &c).unwrap();
        assert!((w[0] - 1.25).abs() < 1e-15 && w[1] == 0.0);
    }

    #[test]
    fn symmetric_disk_weight() {
        let cone = Cone::natural(2).unwrap();
        let s = 0.5f64.sqrt();
        let w = derive_dual_weight(&solution(vec![s, s]), &cone, &[s, s]).unwrap();
        assert!((w[0] - s).abs() < 1e-12 && (w[1] - s).abs() < 1e-12);
    }

    #[test]
    fn degenerate_weight_rejected() {
        let cone = Cone::natural(2).unwrap();
        let e = derive_dual_weight(&solution(vec![0.0, 0.0]), &cone, &[1.0, 0.0]).unwrap_err();
        assert!(matches!(e, Error::DualDegenerate { .. }));
        let e = derive_dual_weight(&solution(vec![2.0, 0.0]), &cone, &[1.0, 0.0]).unwrap_err();
        assert!(matches!(e, Error::DualDegenerate { .. }));
    }
}
