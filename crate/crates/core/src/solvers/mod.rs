//! Scalar solvers: dense simplex for LPs, log-barrier Newton for convex
//! QPs and smooth programs, the image-space projection QP, and dual weight
//! recovery for the direction scalarization.

pub mod barrier;
pub mod dual;
pub mod lp;
pub mod projection;

use crate::error::Result;
use crate::linalg::{axpy, dot, norm_inf, Mat};
use crate::scalar::Real;

pub use barrier::phase1;
pub use dual::derive_dual_weight;
pub use projection::{project_onto_inner, Projection};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProgramClass {
    /// Linear objective, affine constraints.
    Lp,
    /// Convex quadratic objective, affine constraints.
    Qp,
    /// Some constraint is a convex quadratic.
    Smooth,
}

/// Origin of an inequality row, used to pick multipliers apart after a solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RowTag {
    /// User constraint `g_i(x) <= 0`.
    G(usize),
    /// Ordering row `j` of the direction scalarization.
    Z(usize),
    /// Epigraph row introduced by a nonsmooth atom.
    Lift,
    /// Variable bound.
    Bound,
}

/// `½ xᵀ H x + bᵀ x + c` over the full (lifted) variable vector.
#[derive(Clone, Debug)]
pub struct QuadFn<T> {
    pub hess: Option<Mat<T>>,
    pub lin: Vec<T>,
    pub constant: T,
}

impl<T: Real> QuadFn<T> {
    pub fn zero(n: usize) -> Self {
        QuadFn {
            hess: None,
            lin: vec![T::zero(); n],
            constant: T::zero(),
        }
    }

    pub fn affine(lin: Vec<T>, constant: T) -> Self {
        QuadFn {
            hess: None,
            lin,
            constant,
        }
    }

    pub fn dim(&self) -> usize {
        self.lin.len()
    }

    pub fn is_affine(&self) -> bool {
        self.hess.is_none()
    }

    pub fn eval(&self, x: &[T]) -> T {
        let mut v = dot(&self.lin, x) + self.constant;
        if let Some(h) = &self.hess {
            v = v + h.quad_form(x) / T::lit(2.0);
        }
        v
    }

    pub fn grad(&self, x: &[T]) -> Vec<T> {
        let mut g = self.lin.clone();
        if let Some(h) = &self.hess {
            axpy(T::one(), &h.mul_vec(x), &mut g);
        }
        g
    }

    /// `self += s * other`
    pub fn add_scaled(&mut self, s: T, other: &QuadFn<T>) {
        axpy(s, &other.lin, &mut self.lin);
        self.constant = self.constant + s * other.constant;
        if let Some(oh) = &other.hess {
            match &mut self.hess {
                Some(h) => h.add_scaled(s, oh),
                None => self.hess = Some(oh.scaled(s)),
            }
        }
    }
}

/// `f(x) <= 0`
#[derive(Clone, Debug)]
pub struct Constraint<T> {
    pub tag: RowTag,
    pub f: QuadFn<T>,
}

/// A compiled convex scalar program:
/// minimize `objective` subject to `ineq <= 0` and `eq_a x = eq_b`.
#[derive(Clone, Debug)]
pub struct ScalarProgram<T> {
    pub class: ProgramClass,
    pub n_vars: usize,
    /// Leading variables that belong to the original problem.
    pub n_orig: usize,
    /// Position of the scalarization variable `z`, if any.
    pub z_index: Option<usize>,
    pub objective: QuadFn<T>,
    pub ineq: Vec<Constraint<T>>,
    pub eq_a: Vec<Vec<T>>,
    pub eq_b: Vec<T>,
    /// Optional strictly feasible starting point for the barrier method.
    pub start: Option<Vec<T>>,
}

impl<T: Real> ScalarProgram<T> {
    /// Classifies from the structure: affine everything is an LP, a
    /// quadratic objective with affine rows a QP, any quadratic row SMOOTH.
    pub fn infer_class(&self) -> ProgramClass {
        if self.ineq.iter().any(|c| !c.f.is_affine()) {
            ProgramClass::Smooth
        } else if !self.objective.is_affine() {
            ProgramClass::Qp
        } else {
            ProgramClass::Lp
        }
    }

    pub fn max_violation(&self, x: &[T]) -> T {
        let ineq = self.ineq.iter().map(|c| c.f.eval(x)).fold(T::zero(), T::max);
        let eq = self
            .eq_a
            .iter()
            .zip(&self.eq_b)
            .map(|(a, &b)| (dot(a, x) - b).abs())
            .fold(T::zero(), T::max);
        ineq.max(eq)
    }

    /// KKT residuals of `(x, u, nu)` for the Lagrangian
    /// `f + uᵀh + nuᵀ(Ax - b)`.
    pub fn kkt_residual(&self, x: &[T], u: &[T], nu: &[T]) -> KktResidual<T> {
        let mut g = self.objective.grad(x);
        let mut comp = T::zero();
        for (c, &ui) in self.ineq.iter().zip(u) {
            let hi = c.f.eval(x);
            comp = comp.max((ui * hi).abs());
            if ui != T::zero() {
                axpy(ui, &c.f.grad(x), &mut g);
            }
        }
        for (a, &ni) in self.eq_a.iter().zip(nu) {
            axpy(ni, a, &mut g);
        }
        KktResidual {
            stationarity: norm_inf(&g),
            complementarity: comp,
            feasibility: self.max_violation(x),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KktResidual<T> {
    pub stationarity: T,
    pub complementarity: T,
    pub feasibility: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    MaxIter,
}

#[derive(Clone, Debug)]
pub struct ScalarSolution<T> {
    /// Original variables (lifts and `z` stripped).
    pub x: Vec<T>,
    /// Full variable vector.
    pub full: Vec<T>,
    pub value: T,
    pub z: Option<T>,
    /// One multiplier per inequality row, in program order.
    pub u: Vec<T>,
    pub nu: Vec<T>,
    pub tags: Vec<RowTag>,
    pub status: SolveStatus,
    pub kkt: KktResidual<T>,
}

impl<T: Real> ScalarSolution<T> {
    fn assemble(sp: &ScalarProgram<T>, full: Vec<T>, u: Vec<T>, nu: Vec<T>) -> Self {
        let kkt = sp.kkt_residual(&full, &u, &nu);
        ScalarSolution {
            x: full[..sp.n_orig].to_vec(),
            value: sp.objective.eval(&full),
            z: sp.z_index.map(|i| full[i]),
            tags: sp.ineq.iter().map(|c| c.tag).collect(),
            full,
            u,
            nu,
            status: SolveStatus::Optimal,
            kkt,
        }
    }

    /// Multipliers of the user constraint rows, indexed by constraint.
    pub fn g_multipliers(&self) -> Vec<(usize, T)> {
        self.tags
            .iter()
            .zip(&self.u)
            .filter_map(|(t, &u)| match t {
                RowTag::G(i) => Some((*i, u)),
                _ => None,
            })
            .collect()
    }

    /// Multipliers of the ordering rows, indexed by dual generator.
    pub fn z_multipliers(&self) -> Vec<(usize, T)> {
        self.tags
            .iter()
            .zip(&self.u)
            .filter_map(|(t, &u)| match t {
                RowTag::Z(j) => Some((*j, u)),
                _ => None,
            })
            .collect()
    }
}

/// Solver knobs; defaults follow the crate tolerances.
#[derive(Clone, Copy, Debug)]
pub struct SolverOptions<T> {
    /// Target duality gap of the barrier method.
    pub gap: T,
    pub feas: T,
    pub max_newton: usize,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        SolverOptions {
            gap: T::tol_floor(1e-8, 1e2),
            feas: T::tol_floor(1e-8, 1e3),
            max_newton: 200,
        }
    }
}

/// Dispatches on the program class.
pub fn solve<T: Real>(sp: &ScalarProgram<T>, opts: &SolverOptions<T>) -> Result<ScalarSolution<T>> {
    match sp.class {
        ProgramClass::Lp => lp::solve_lp(sp, opts),
        ProgramClass::Qp | ProgramClass::Smooth => barrier::solve_smooth(sp, opts),
    }
}
