//! Convex vector optimization problems built from atoms, their evaluation,
//! scalarizations and assumption checks.

mod atom;
mod compile;
pub mod schema;

use std::sync::OnceLock;

pub use atom::Atom;
pub use compile::{Compiled, Lift};
pub use schema::{AtomDoc, BoxDoc, ConeDoc, ConstraintDoc, EqDoc, ProblemDoc};

use crate::cone::Cone;
use crate::error::{Error, Result};
use crate::linalg::{is_psd, Mat};
use crate::scalar::Real;
use crate::solvers::{self, phase1, SolverOptions};
use schema::{mat, rows_f64, vec_f64, vec_t};

/// `atom(x) <= ub`
#[derive(Clone, Debug, PartialEq)]
pub struct UpperBound<T> {
    pub atom: Atom<T>,
    pub ub: T,
}

/// minimize `F(x)` w.r.t. the cone order subject to `g(x) <= 0`, optional
/// affine equalities and a variable box.
#[derive(Clone, Debug)]
pub struct Vcp<T> {
    pub(crate) n: usize,
    pub(crate) cone: Cone<T>,
    pub(crate) objectives: Vec<Atom<T>>,
    pub(crate) constraints: Vec<UpperBound<T>>,
    pub(crate) eq: Option<(Mat<T>, Vec<T>)>,
    pub(crate) lo: Vec<Option<T>>,
    pub(crate) hi: Vec<Option<T>>,
    meta: Option<serde_json::Value>,
    slater: OnceLock<Option<Vec<T>>>,
}

impl<T: Real> Vcp<T> {
    pub fn new(n: usize, cone: Cone<T>, objectives: Vec<Atom<T>>, constraints: Vec<UpperBound<T>>) -> Result<Self> {
        let vcp = Vcp {
            n,
            cone,
            objectives,
            constraints,
            eq: None,
            lo: vec![None; n],
            hi: vec![None; n],
            meta: None,
            slater: OnceLock::new(),
        };
        vcp.validate()?;
        Ok(vcp)
    }

    pub fn with_equalities(mut self, e: Mat<T>, f: Vec<T>) -> Result<Self> {
        if e.cols() != self.n || e.rows() != f.len() {
            return Err(Error::Schema(format!(
                "equalities: E is {}x{}, f has {} entries, n = {}",
                e.rows(),
                e.cols(),
                f.len(),
                self.n
            )));
        }
        self.eq = Some((e, f));
        self.slater = OnceLock::new();
        Ok(self)
    }

    pub fn with_box(mut self, lo: Vec<Option<T>>, hi: Vec<Option<T>>) -> Result<Self> {
        if lo.len() != self.n || hi.len() != self.n {
            return Err(Error::Schema(format!("box bounds must have {} entries", self.n)));
        }
        for (l, h) in lo.iter().zip(&hi) {
            if let (Some(l), Some(h)) = (l, h) {
                if l > h {
                    return Err(Error::Schema("box lower bound exceeds upper bound".into()));
                }
            }
        }
        self.lo = lo;
        self.hi = hi;
        self.slater = OnceLock::new();
        Ok(self)
    }

    pub fn with_meta(mut self, meta: serde_json::Value) -> Self {
        self.meta = Some(meta);
        self
    }

    fn validate(&self) -> Result<()> {
        let q = self.cone.dim();
        if self.n == 0 {
            return Err(Error::Schema("n must be positive".into()));
        }
        if self.objectives.len() != q {
            return Err(Error::Schema(format!(
                "{} objectives for a cone of dimension {q}",
                self.objectives.len()
            )));
        }
        for (i, a) in self.objectives.iter().enumerate() {
            a.validate(self.n, &format!("objective {i}"))?;
        }
        for (i, g) in self.constraints.iter().enumerate() {
            g.atom.validate(self.n, &format!("constraint {i}"))?;
        }
        if self.objectives.iter().any(|a| !a.is_smooth()) && !self.cone.is_natural() {
            return Err(Error::NonsmoothWithGeneralCone);
        }
        if !self.cone.is_natural() {
            // Each ordering row ẑ_jᵀF must be convex.
            let tol = T::tol_floor(1e-9, 1e3);
            for (j, z) in self.cone.dual_generators().iter().enumerate() {
                let mut h = Mat::zeros(self.n, self.n);
                for (i, a) in self.objectives.iter().enumerate() {
                    if let Some(hi) = a.hessian() {
                        h.add_scaled(z[i], &hi);
                    }
                }
                if !is_psd(&h, tol) {
                    return Err(Error::NotPsd(format!("objectives combined along dual generator {j}")));
                }
            }
        }
        Ok(())
    }

    pub fn from_document(doc: &ProblemDoc) -> Result<Self> {
        let tol = T::tol_floor(1e-9, 1e3);
        let cone = match &doc.cone {
            ConeDoc::Natural { natural } => Cone::natural(*natural)?,
            ConeDoc::General { z } => Cone::from_matrix(&mat(z, "cone Z")?, tol)?,
        };
        let objectives = doc
            .objectives
            .iter()
            .enumerate()
            .map(|(i, a)| a.to_atom(&format!("objective {i}")))
            .collect::<Result<Vec<_>>>()?;
        let constraints = doc
            .constraints
            .iter()
            .enumerate()
            .map(|(i, c)| {
                if !c.ub.is_finite() {
                    return Err(Error::Schema(format!("constraint {i}: non-finite bound")));
                }
                Ok(UpperBound {
                    atom: c.atom.to_atom(&format!("constraint {i}"))?,
                    ub: T::lit(c.ub),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut vcp = Vcp::new(doc.n, cone, objectives, constraints)?;
        if let Some(eq) = &doc.eq {
            vcp = vcp.with_equalities(mat(&eq.e, "E")?, vec_t(&eq.f))?;
        }
        if let Some(b) = &doc.bounds {
            let conv = |v: &[Option<f64>]| v.iter().map(|x| x.map(T::lit)).collect();
            vcp = vcp.with_box(conv(&b.lo), conv(&b.hi))?;
        }
        if let Some(m) = &doc.meta {
            vcp = vcp.with_meta(m.clone());
        }
        Ok(vcp)
    }

    pub fn to_document(&self) -> ProblemDoc {
        let cone = if self.cone.is_natural() && self.cone_is_identity() {
            ConeDoc::Natural { natural: self.q() }
        } else {
            ConeDoc::General {
                z: rows_f64(&self.cone.dual_matrix()),
            }
        };
        let bounds = (self.lo.iter().chain(&self.hi).any(Option::is_some)).then(|| BoxDoc {
            lo: self.lo.iter().map(|x| x.map(Real::as_f64)).collect(),
            hi: self.hi.iter().map(|x| x.map(Real::as_f64)).collect(),
        });
        ProblemDoc {
            n: self.n,
            cone,
            objectives: self.objectives.iter().map(AtomDoc::from_atom).collect(),
            constraints: self
                .constraints
                .iter()
                .map(|c| ConstraintDoc {
                    atom: AtomDoc::from_atom(&c.atom),
                    ub: c.ub.as_f64(),
                })
                .collect(),
            eq: self.eq.as_ref().map(|(e, f)| EqDoc {
                e: rows_f64(e),
                f: vec_f64(f),
            }),
            bounds,
            meta: self.meta.clone(),
        }
    }

    fn cone_is_identity(&self) -> bool {
        self.cone
            .dual_generators()
            .iter()
            .enumerate()
            .all(|(j, z)| z[j] == T::one())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of objectives.
    pub fn q(&self) -> usize {
        self.cone.dim()
    }

    pub fn cone(&self) -> &Cone<T> {
        &self.cone
    }

    pub fn objectives(&self) -> &[Atom<T>] {
        &self.objectives
    }

    pub fn constraints(&self) -> &[UpperBound<T>] {
        &self.constraints
    }

    pub fn meta(&self) -> Option<&serde_json::Value> {
        self.meta.as_ref()
    }

    /// `(F(x), g(x))` with `g_i = atom_i(x) - ub_i`.
    pub fn evaluate(&self, x: &[T]) -> Result<(Vec<T>, Vec<T>)> {
        if x.len() != self.n {
            return Err(Error::DimMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        let f = self.objectives.iter().map(|a| a.eval(x)).collect();
        let g = self.constraints.iter().map(|c| c.atom.eval(x) - c.ub).collect();
        Ok((f, g))
    }

    /// `F(x)`.
    pub fn image(&self, x: &[T]) -> Result<Vec<T>> {
        Ok(self.evaluate(x)?.0)
    }

    /// Largest violation of constraints, box and equalities at `x`.
    pub fn infeasibility(&self, x: &[T]) -> Result<T> {
        let (_, g) = self.evaluate(x)?;
        let mut v = g.into_iter().fold(T::zero(), T::max);
        for k in 0..self.n {
            if let Some(hi) = self.hi[k] {
                v = v.max(x[k] - hi);
            }
            if let Some(lo) = self.lo[k] {
                v = v.max(lo - x[k]);
            }
        }
        if let Some((e, f)) = &self.eq {
            for (r, &fi) in e.mul_vec(x).into_iter().zip(f) {
                v = v.max((r - fi).abs());
            }
        }
        Ok(v)
    }

    /// A strictly feasible point, computed once by phase one.
    pub fn slater_point(&self) -> Option<&[T]> {
        self.slater
            .get_or_init(|| {
                let c = self.compile_feasibility();
                phase1(&c.program, &SolverOptions::default())
                    .ok()
                    .map(|full| full[..self.n].to_vec())
            })
            .as_deref()
    }

    /// Checks the verifiable standing assumptions: a solid pointed cone
    /// (validated on construction), a Slater point, and boundedness of the
    /// feasible set.
    pub fn check_assumptions(&self) -> AssumptionReport {
        let slater = self.slater_point().map(vec_f64);
        let boxed = self.lo.iter().chain(&self.hi).all(Option::is_some);
        let mut unbounded = Vec::new();
        let mut probe_errors = Vec::new();
        if !boxed && slater.is_some() {
            for k in 0..self.n {
                for sign in [T::one(), -T::one()] {
                    let c = self.compile_coordinate(k, sign);
                    match solvers::solve(&c.program, &SolverOptions::default()) {
                        Ok(_) => {}
                        Err(Error::ProgramUnbounded) => {
                            if !unbounded.contains(&k) {
                                unbounded.push(k);
                            }
                        }
                        Err(e) => probe_errors.push(format!("x[{k}]: {e}")),
                    }
                }
            }
        }
        AssumptionReport {
            cone_ok: true,
            lsc_convex: "by construction",
            slater,
            bounded: slater_ok_bounded(boxed, &unbounded, &probe_errors),
            unbounded_coordinates: unbounded,
            probe_errors,
        }
    }
}

fn slater_ok_bounded(boxed: bool, unbounded: &[usize], errors: &[String]) -> bool {
    boxed || (unbounded.is_empty() && errors.is_empty())
}

/// Outcome of [`Vcp::check_assumptions`].
#[derive(Clone, Debug, PartialEq)]
pub struct AssumptionReport {
    /// Pointed cone with nonempty interior.
    pub cone_ok: bool,
    /// Continuity, properness and lower semicontinuity hold for every atom.
    pub lsc_convex: &'static str,
    /// Strictly feasible point, if phase one found one.
    pub slater: Option<Vec<f64>>,
    pub bounded: bool,
    pub unbounded_coordinates: Vec<usize>,
    pub probe_errors: Vec<String>,
}

impl AssumptionReport {
    pub fn passes(&self) -> bool {
        self.cone_ok && self.slater.is_some() && self.bounded
    }
}

/// Parses and validates a problem document.
pub fn load_problem<T: Real>(text: &str) -> Result<Vcp<T>> {
    Vcp::from_document(&ProblemDoc::from_json(text)?)
}
