use crate::error::{Error, Result};
use crate::linalg::{dot, is_psd, Mat};
use crate::scalar::Real;
use crate::solvers::QuadFn;

/// Building blocks for objectives and constraints. Every atom is convex.
#[derive(Clone, Debug, PartialEq)]
pub enum Atom<T> {
    /// `cᵀx + r`
    Affine { c: Vec<T>, r: T },
    /// `½ xᵀQx + cᵀx + r` with `Q` symmetric PSD.
    Quadratic { q: Mat<T>, c: Vec<T>, r: T },
    /// `‖Ax - b‖²`
    SqResidual { a: Mat<T>, b: Vec<T> },
    /// `‖Ax - b‖₁`
    L1Affine { a: Mat<T>, b: Vec<T> },
    /// `max_i |A_i x - b_i|`
    LinfAffine { a: Mat<T>, b: Vec<T> },
}

impl<T: Real> Atom<T> {
    pub fn kind(&self) -> &'static str {
        match self {
            Atom::Affine { .. } => "affine",
            Atom::Quadratic { .. } => "quadratic",
            Atom::SqResidual { .. } => "sq_residual",
            Atom::L1Affine { .. } => "l1_affine",
            Atom::LinfAffine { .. } => "linf_affine",
        }
    }

    pub fn is_smooth(&self) -> bool {
        !matches!(self, Atom::L1Affine { .. } | Atom::LinfAffine { .. })
    }

    /// Number of variables the atom acts on.
    pub fn n(&self) -> usize {
        match self {
            Atom::Affine { c, .. } | Atom::Quadratic { c, .. } => c.len(),
            Atom::SqResidual { a, .. } | Atom::L1Affine { a, .. } | Atom::LinfAffine { a, .. } => a.cols(),
        }
    }

    /// Checks shapes against `n` and positive semidefiniteness.
    pub fn validate(&self, n: usize, what: &str) -> Result<()> {
        if self.n() != n {
            return Err(Error::Schema(format!(
                "{what}: {} atom acts on {} variables, problem has {n}",
                self.kind(),
                self.n()
            )));
        }
        match self {
            Atom::Quadratic { q, .. } => {
                if q.rows() != n || q.cols() != n {
                    return Err(Error::Schema(format!("{what}: Q must be {n}x{n}")));
                }
                let tol = T::tol_floor(1e-9, 1e3);
                if q.asymmetry() > tol * (T::one() + q.max_abs()) {
                    return Err(Error::Schema(format!("{what}: Q is not symmetric")));
                }
                if !is_psd(q, tol) {
                    return Err(Error::NotPsd(what.to_string()));
                }
            }
            Atom::SqResidual { a, b } | Atom::L1Affine { a, b } | Atom::LinfAffine { a, b } => {
                if a.rows() != b.len() || a.rows() == 0 {
                    return Err(Error::Schema(format!(
                        "{what}: A has {} rows, b has {} entries",
                        a.rows(),
                        b.len()
                    )));
                }
            }
            Atom::Affine { .. } => {}
        }
        Ok(())
    }

    pub fn eval(&self, x: &[T]) -> T {
        match self {
            Atom::Affine { c, r } => dot(c, x) + *r,
            Atom::Quadratic { q, c, r } => q.quad_form(x) / T::lit(2.0) + dot(c, x) + *r,
            Atom::SqResidual { a, b } => residual(a, b, x).iter().map(|&v| v * v).sum(),
            Atom::L1Affine { a, b } => residual(a, b, x).iter().map(|v| v.abs()).sum(),
            Atom::LinfAffine { a, b } => residual(a, b, x).iter().map(|v| v.abs()).fold(T::zero(), T::max),
        }
    }

    /// The atom as a quadratic function, for smooth atoms.
    pub fn as_quad(&self) -> Option<QuadFn<T>> {
        match self {
            Atom::Affine { c, r } => Some(QuadFn::affine(c.clone(), *r)),
            Atom::Quadratic { q, c, r } => Some(QuadFn {
                hess: Some(q.clone()),
                lin: c.clone(),
                constant: *r,
            }),
            Atom::SqResidual { a, b } => {
                let two = T::lit(2.0);
                Some(QuadFn {
                    hess: Some(a.gram().scaled(two)),
                    lin: a.tr_mul_vec(b).into_iter().map(|v| -two * v).collect(),
                    constant: dot(b, b),
                })
            }
            Atom::L1Affine { .. } | Atom::LinfAffine { .. } => None,
        }
    }

    /// Hessian, for smooth atoms (`None` when affine).
    pub fn hessian(&self) -> Option<Mat<T>> {
        self.as_quad().and_then(|q| q.hess)
    }

    /// Rows `(A_i, b_i)` of the affine map inside a nonsmooth atom.
    pub(crate) fn affine_rows(&self) -> Option<(&Mat<T>, &[T])> {
        match self {
            Atom::L1Affine { a, b } | Atom::LinfAffine { a, b } => Some((a, b)),
            _ => None,
        }
    }
}

fn residual<T: Real>(a: &Mat<T>, b: &[T], x: &[T]) -> Vec<T> {
    a.mul_vec(x).into_iter().zip(b).map(|(v, &bi)| v - bi).collect()
}
