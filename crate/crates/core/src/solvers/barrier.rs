//! Log-barrier path following for convex QPs and quadratically constrained
//! programs, with a min-`s` phase one for a strictly feasible start.

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, least_norm, norm_inf, solve_sym_regularized, Lu, Mat};
use crate::scalar::Real;

use super::{QuadFn, ScalarProgram, ScalarSolution, SolverOptions};

const ARMIJO: f64 = 0.01;
const BACKTRACK: f64 = 0.5;
const MU_SHRINK: f64 = 0.1;
const STALL_STEPS: usize = 20;
/// Iterates beyond this norm are taken as evidence of an unbounded program.
const DIVERGENCE: f64 = 1e12;

struct Problem<'a, T> {
    obj: &'a QuadFn<T>,
    ineq: Vec<&'a QuadFn<T>>,
    eq_a: &'a [Vec<T>],
}

/// The change of the barrier function along `x + α dx`, expanded exactly in
/// `α` so that small decreases are not lost against a large `t f(x)`.
struct Increment<T> {
    /// `t ∇f(x)ᵀdx`, `t dxᵀ∇²f dx`.
    lin: T,
    curv: T,
    /// Per constraint: slack, `∇hᵀdx`, `dxᵀ∇²h dx`.
    cons: Vec<(T, T, T)>,
    slope: T,
}

impl<T: Real> Increment<T> {
    fn new(p: &Problem<'_, T>, x: &[T], slack: &[T], dx: &[T], t: T) -> Self {
        let form = |f: &QuadFn<T>| f.hess.as_ref().map_or(T::zero(), |h| h.quad_form(dx));
        let lin = t * dot(&p.obj.grad(x), dx);
        let curv = t * form(p.obj);
        let cons: Vec<(T, T, T)> = p
            .ineq
            .iter()
            .zip(slack)
            .map(|(f, &s)| (s, dot(&f.grad(x), dx), form(f)))
            .collect();
        let slope = cons.iter().fold(lin, |acc, &(s, g, _)| acc + g / s);
        Increment { lin, curv, cons, slope }
    }

    fn at(&self, a: T) -> Option<T> {
        let half = T::lit(0.5);
        let mut df = a * self.lin + half * a * a * self.curv;
        for &(s, g, h) in &self.cons {
            let r = -(a * g + half * a * a * h) / s;
            if !(r > -T::one()) {
                return None;
            }
            df = df - r.ln_1p();
        }
        Some(df)
    }
}

struct Centered<T> {
    x: Vec<T>,
    t: T,
}

impl<'a, T: Real> Problem<'a, T> {
    fn n(&self) -> usize {
        self.obj.dim()
    }

    fn slacks(&self, x: &[T]) -> Option<Vec<T>> {
        let mut out = Vec::with_capacity(self.ineq.len());
        for f in &self.ineq {
            let s = -f.eval(x);
            if !(s > T::zero()) {
                return None;
            }
            out.push(s);
        }
        Some(out)
    }

    /// `u_i = μ/s_i (1 + ∇h_iᵀdx / s_i)` with the Newton step `dx` at `x`:
    /// the multipliers of the linearized center, which satisfy stationarity
    /// exactly along directions where every function is linear. Falls back
    /// to `μ/s_i` if the step fails or a multiplier would turn negative.
    fn multipliers(&self, x: &[T], t: T) -> Vec<T> {
        let mu = T::one() / t;
        let slack: Vec<T> = self.ineq.iter().map(|f| -f.eval(x)).collect();
        let plain: Vec<T> = slack.iter().map(|&s| mu / s).collect();
        let Ok((dx, _)) = self.newton(x, &slack, t) else {
            return plain;
        };
        let corrected: Vec<T> = self
            .ineq
            .iter()
            .zip(&slack)
            .map(|(f, &s)| mu / s * (T::one() + dot(&f.grad(x), &dx) / s))
            .collect();
        if corrected.iter().all(|&u| u >= T::zero()) {
            corrected
        } else {
            plain
        }
    }

    /// Newton direction for `t f - Σ log(-h)` restricted to `eq_a dx = 0`.
    /// Returns `(dx, decrement²)`.
    fn newton(&self, x: &[T], slack: &[T], t: T) -> Result<(Vec<T>, T)> {
        let n = self.n();
        let p = self.eq_a.len();
        let mut grad = self.obj.grad(x);
        for g in grad.iter_mut() {
            *g = *g * t;
        }
        let mut hess = match &self.obj.hess {
            Some(h) => h.scaled(t),
            None => Mat::zeros(n, n),
        };
        for (f, &s) in self.ineq.iter().zip(slack) {
            let gi = f.grad(x);
            let inv = T::one() / s;
            axpy(inv, &gi, &mut grad);
            let inv2 = inv * inv;
            for a in 0..n {
                if gi[a] == T::zero() {
                    continue;
                }
                let ga = gi[a] * inv2;
                for b in 0..n {
                    hess[(a, b)] = hess[(a, b)] + ga * gi[b];
                }
            }
            if let Some(h) = &f.hess {
                hess.add_scaled(inv, h);
            }
        }
        let scale = hess.max_abs().max(T::one());
        let mut reg = T::zero();
        for _ in 0..8 {
            let mut kkt = Mat::zeros(n + p, n + p);
            for a in 0..n {
                for b in 0..n {
                    kkt[(a, b)] = hess[(a, b)];
                }
                kkt[(a, a)] = kkt[(a, a)] + reg;
            }
            for (i, row) in self.eq_a.iter().enumerate() {
                for (j, &v) in row.iter().enumerate() {
                    kkt[(n + i, j)] = v;
                    kkt[(j, n + i)] = v;
                }
            }
            let mut rhs = vec![T::zero(); n + p];
            for (r, &g) in rhs.iter_mut().zip(&grad) {
                *r = -g;
            }
            // The equality block is O(1) while the Hessian grows with t, so
            // pivots are only rejected when truly degenerate.
            if let Some(lu) = Lu::new(&kkt, T::epsilon() * T::epsilon()) {
                let sol = lu.solve(&rhs);
                let dx = sol[..n].to_vec();
                if dx.iter().all(|v| v.is_finite()) {
                    let dec = -dot(&grad, &dx);
                    return Ok((dx, dec.max(T::zero())));
                }
            }
            reg = if reg == T::zero() {
                T::epsilon().sqrt() * scale
            } else {
                reg * T::lit(100.0)
            };
        }
        Err(Error::LineSearchFail)
    }

    /// Centering by damped Newton from a strictly feasible `x`. Returns
    /// `true` when `stop` fired on an intermediate iterate.
    fn center<F>(&self, x: &mut Vec<T>, t: T, max_newton: usize, stop: &mut F) -> Result<bool>
    where
        F: FnMut(&[T], T, bool) -> bool,
    {
        let tol = T::tol_floor(1e-10, 1e3);
        for it in 0..max_newton {
            let slack = self.slacks(x).ok_or(Error::LineSearchFail)?;
            let (dx, dec) = self.newton(x, &slack, t)?;
            if dec / T::lit(2.0) <= tol {
                return Ok(false);
            }
            // Newton converges quadratically from here; a stage that has not
            // reached `tol` after this many steps sits at the rounding floor
            // (tiny slacks, or `t ∇f` noise along flat directions of f).
            if it >= STALL_STEPS && dec <= T::lit(1e-3) {
                return Ok(false);
            }
            let inc = Increment::new(self, x, &slack, &dx, t);
            let slope = inc.slope;
            let mut step = T::one();
            let mut accepted = false;
            while step > T::lit(1e-14) {
                if let Some(df) = inc.at(step) {
                    if df <= T::lit(ARMIJO) * step * slope {
                        accepted = true;
                        break;
                    }
                }
                step = step * T::lit(BACKTRACK);
            }
            let mut trial = x.clone();
            for (y, &d) in trial.iter_mut().zip(&dx) {
                *y = *y + step * d;
            }
            if accepted && self.slacks(&trial).is_none() {
                accepted = false;
            }
            if !accepted {
                // Rounding in t·f swamps the decrease near the center.
                if dec <= T::lit(1e-4) {
                    return Ok(false);
                }

                return Err(Error::LineSearchFail);
            }
            // A step at the resolution of x: nothing left to gain.
            let resolution = T::epsilon() * T::lit(16.0) * (T::one() + norm_inf(x));
            if step * norm_inf(&dx) <= resolution && dec <= T::lit(1e-4) {
                return Ok(false);
            }
            std::mem::swap(x, &mut trial);
            if norm_inf(x) > T::lit(DIVERGENCE) {
                return Err(Error::ProgramUnbounded);
            }
            if stop(x, t, false) {
                return Ok(true);
            }
        }
        Err(Error::MaxIter("barrier centering"))
    }

    /// The decade `t` in `[1, m / gap]` at which `x0` is most central
    /// (smallest Newton decrement). Starting at `t = 1` from a point far
    /// from that center makes damped Newton crawl along nearly homogeneous
    /// barrier directions.
    fn initial_t(&self, x0: &[T], gap: T, m: T) -> T {
        let Some(slack) = self.slacks(x0) else {
            return T::one();
        };
        let mut best = (T::infinity(), T::one());
        let mut t = T::one();
        while t <= m / gap {
            if let Ok((_, dec)) = self.newton(x0, &slack, t) {
                if dec < best.0 {
                    best = (dec, t);
                }
            }
            t = t * T::lit(10.0);
        }
        best.1
    }

    /// Follows the central path from `x0` until `m / t <= gap` or `stop`
    /// fires after a centering stage.
    fn path<F>(&self, x0: Vec<T>, gap: T, max_newton: usize, mut stop: F) -> Result<Centered<T>>
    where
        F: FnMut(&[T], T, bool) -> bool,
    {
        let m = T::from_usize(self.ineq.len().max(1)).unwrap();
        let mut t = self.initial_t(&x0, gap, m);
        let mut x = x0;
        loop {
            if self.center(&mut x, t, max_newton, &mut stop)? {
                return Ok(Centered { x, t });
            }
            if self.obj.eval(&x) < -T::lit(DIVERGENCE) {
                return Err(Error::ProgramUnbounded);
            }
            if m / t <= gap || stop(&x, t, true) {
                return Ok(Centered { x, t });
            }
            t = t / T::lit(MU_SHRINK);
        }
    }
}

fn pad<T: Real>(f: &QuadFn<T>, extra: usize) -> QuadFn<T> {
    let n = f.dim();
    let mut lin = f.lin.clone();
    lin.resize(n + extra, T::zero());
    let hess = f.hess.as_ref().map(|h| {
        let mut m = Mat::zeros(n + extra, n + extra);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = h[(i, j)];
            }
        }
        m
    });
    QuadFn {
        hess,
        lin,
        constant: f.constant,
    }
}

fn eq_residual<T: Real>(sp: &ScalarProgram<T>, x: &[T]) -> T {
    sp.eq_a
        .iter()
        .zip(&sp.eq_b)
        .map(|(a, &b)| (dot(a, x) - b).abs())
        .fold(T::zero(), T::max)
}

/// Finds a point with every inequality strictly satisfied and the equalities
/// holding, by minimizing `s` subject to `h_i(x) <= s`, `s >= -1`.
pub fn phase1<T: Real>(sp: &ScalarProgram<T>, opts: &SolverOptions<T>) -> Result<Vec<T>> {
    let n = sp.n_vars;
    let x0 = if sp.eq_a.is_empty() {
        sp.start.clone().unwrap_or_else(|| vec![T::zero(); n])
    } else {
        match &sp.start {
            Some(s) if eq_residual(sp, s) <= opts.feas => s.clone(),
            _ => least_norm(&Mat::from_rows(&sp.eq_a), &sp.eq_b, T::tol_floor(1e-9, 1e3))
                .ok_or(Error::ProgramInfeasible)?,
        }
    };
    let hmax = sp.ineq.iter().map(|c| c.f.eval(&x0)).fold(T::neg_infinity(), T::max);
    if sp.ineq.is_empty() || hmax < -T::lit(1e-3) {
        return Ok(x0);
    }

    let mut rows: Vec<QuadFn<T>> = sp
        .ineq
        .iter()
        .map(|c| {
            let mut f = pad(&c.f, 1);
            f.lin[n] = -T::one();
            f
        })
        .collect();
    let mut floor = QuadFn::zero(n + 1);
    floor.lin[n] = -T::one();
    floor.constant = -T::one();
    rows.push(floor);
    let mut obj = QuadFn::zero(n + 1);
    obj.lin[n] = T::one();
    let eq_a: Vec<Vec<T>> = sp
        .eq_a
        .iter()
        .map(|a| {
            let mut r = a.clone();
            r.push(T::zero());
            r
        })
        .collect();
    let prob = Problem {
        obj: &obj,
        ineq: rows.iter().collect(),
        eq_a: &eq_a,
    };
    let mut start = x0;
    start.push(hmax.max(T::zero()) + T::one());
    let m = T::from_usize(rows.len()).unwrap();
    let feasible = |y: &[T]| {
        sp.ineq
            .iter()
            .map(|c| c.f.eval(&y[..n]))
            .fold(T::neg_infinity(), T::max)
    };
    let res = prob.path(start, T::tol_floor(1e-9, 1e3), opts.max_newton, |y, t, centered| {
        let h = feasible(y);
        // Stop once strictly feasible with a margin the path will not erase,
        // or once the lower bound on min s (valid on the path) proves
        // infeasibility.
        (h < T::zero() && m / t < -h / T::lit(10.0)) || (centered && y[n] - m / t > T::zero())
    })?;
    let h = feasible(&res.x);
    if h < T::zero() {
        Ok(res.x[..n].to_vec())
    } else {
        Err(Error::ProgramInfeasible)
    }
}

/// Barrier method for `Qp` and `Smooth` programs. Multipliers are the
/// barrier weights `u_i = μ / (-h_i)` at the final parameter; equality
/// multipliers come from a least-squares fit of the stationarity condition.
pub fn solve_smooth<T: Real>(sp: &ScalarProgram<T>, opts: &SolverOptions<T>) -> Result<ScalarSolution<T>> {
    let strictly_feasible = |x: &[T]| {
        x.len() == sp.n_vars && sp.ineq.iter().all(|c| c.f.eval(x) < T::zero()) && eq_residual(sp, x) <= opts.feas
    };
    let x0 = match &sp.start {
        Some(s) if strictly_feasible(s) => s.clone(),
        _ => phase1(sp, opts)?,
    };
    let prob = Problem {
        obj: &sp.objective,
        ineq: sp.ineq.iter().map(|c| &c.f).collect(),
        eq_a: &sp.eq_a,
    };
    let res = prob.path(x0, opts.gap, opts.max_newton, |_, _, _| false)?;
    let u = prob.multipliers(&res.x, res.t);
    let nu = fit_eq_multipliers(sp, &res.x, &u);
    Ok(ScalarSolution::assemble(sp, res.x, u, nu))
}

/// `argmin_ν ‖∇f + Σ u_i ∇h_i + Aᵀν‖`.
fn fit_eq_multipliers<T: Real>(sp: &ScalarProgram<T>, x: &[T], u: &[T]) -> Vec<T> {
    if sp.eq_a.is_empty() {
        return Vec::new();
    }
    let mut r = sp.objective.grad(x);
    for (c, &ui) in sp.ineq.iter().zip(u) {
        axpy(ui, &c.f.grad(x), &mut r);
    }
    let a = Mat::from_rows(&sp.eq_a);
    let aat = a.mul(&a.transpose());
    let rhs: Vec<T> = a.mul_vec(&r).into_iter().map(|v| -v).collect();
    solve_sym_regularized(&aat, &rhs).unwrap_or_else(|| vec![T::zero(); sp.eq_a.len()])
}
