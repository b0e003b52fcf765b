//! Lowering of scalarizations to [`ScalarProgram`]s.
//!
//! Nonsmooth atoms are replaced by epigraph variables: `‖Ax - b‖₁` by one
//! `t_k >= |A_k x - b_k|` per row, `max_k |A_k x - b_k|` either by the
//! `2m` affine pieces directly (when it bounds something from below) or by
//! a single `s` (when it is minimized). Lifted variables follow `x` and the
//! optional `z`.

use super::{Atom, Vcp};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm, Mat};
use crate::scalar::Real;
use crate::solvers::{Constraint, ProgramClass, QuadFn, RowTag, ScalarProgram};

/// An epigraph variable equals the max of its pieces at the optimum.
#[derive(Clone, Debug)]
pub struct Lift<T> {
    /// Functions of the variables created before this one.
    pub pieces: Vec<QuadFn<T>>,
}

/// A compiled program together with the recipe for lifting a point `x`.
#[derive(Clone, Debug)]
pub struct Compiled<T> {
    pub program: ScalarProgram<T>,
    pub lifts: Vec<Lift<T>>,
}

impl<T: Real> Compiled<T> {
    /// `[x, z?, lifts]` with every lift at its smallest feasible value plus
    /// `margin`.
    pub fn lift(&self, x: &[T], z: Option<T>, margin: T) -> Vec<T> {
        let mut full = x.to_vec();
        if self.program.z_index.is_some() {
            full.push(z.unwrap_or_else(T::zero));
        }
        for l in &self.lifts {
            let v = l
                .pieces
                .iter()
                .map(|f| eval_prefix(f, &full))
                .fold(T::neg_infinity(), T::max);
            full.push(v + margin);
        }
        full
    }
}

fn eval_prefix<T: Real>(f: &QuadFn<T>, x: &[T]) -> T {
    let k = f.dim();
    let mut v = dot(&f.lin, &x[..k]) + f.constant;
    if let Some(h) = &f.hess {
        v = v + h.quad_form(&x[..k]) / T::lit(2.0);
    }
    v
}

struct Builder<'a, T> {
    vcp: &'a Vcp<T>,
    n_vars: usize,
    z_index: Option<usize>,
    lifts: Vec<Lift<T>>,
    rows: Vec<Constraint<T>>,
}

impl<'a, T: Real> Builder<'a, T> {
    fn new(vcp: &'a Vcp<T>, with_z: bool) -> Self {
        Builder {
            vcp,
            n_vars: vcp.n + usize::from(with_z),
            z_index: with_z.then_some(vcp.n),
            lifts: Vec::new(),
            rows: Vec::new(),
        }
    }

    fn new_lift(&mut self, pieces: Vec<QuadFn<T>>) -> usize {
        let idx = self.n_vars;
        for f in &pieces {
            let mut row = f.clone();
            row.lin.resize(idx + 1, T::zero());
            row.lin[idx] = -T::one();
            self.rows.push(Constraint {
                tag: RowTag::Lift,
                f: row,
            });
        }
        self.lifts.push(Lift { pieces });
        self.n_vars += 1;
        idx
    }

    fn unit(&self, idx: usize, s: T) -> QuadFn<T> {
        let mut f = QuadFn::zero(idx + 1);
        f.lin[idx] = s;
        f
    }

    /// Functions (over the current variables) whose maximum, minimized over
    /// fresh lifts, equals `s · atom(x)`. Requires `s >= 0` for nonsmooth
    /// atoms.
    fn epigraph(&mut self, atom: &Atom<T>, s: T) -> Vec<QuadFn<T>> {
        if let Some(q) = atom.as_quad() {
            let mut f = QuadFn::zero(self.vcp.n);
            f.add_scaled(s, &q);
            return vec![f];
        }
        let (a, b) = atom.affine_rows().expect("nonsmooth atoms are affine-based");
        let pieces: Vec<(QuadFn<T>, QuadFn<T>)> = (0..a.rows())
            .map(|k| {
                let pos = QuadFn::affine(a.row(k).to_vec(), -b[k]);
                let mut neg = QuadFn::zero(self.vcp.n);
                neg.add_scaled(-T::one(), &pos);
                (pos, neg)
            })
            .collect();
        match atom {
            Atom::L1Affine { .. } => {
                let mut sum = QuadFn::zero(self.vcp.n);
                for (pos, neg) in pieces {
                    let t = self.new_lift(vec![pos, neg]);
                    sum = add(&sum, &self.unit(t, s));
                }
                vec![sum]
            }
            _ => pieces
                .into_iter()
                .flat_map(|(p, n)| [p, n])
                .map(|f| {
                    let mut g = QuadFn::zero(self.vcp.n);
                    g.add_scaled(s, &f);
                    g
                })
                .collect(),
        }
    }

    /// A single function to be minimized: several pieces get one lift.
    fn collapse(&mut self, mut fs: Vec<QuadFn<T>>) -> QuadFn<T> {
        if fs.len() == 1 {
            return fs.pop().unwrap();
        }
        let s = self.new_lift(fs);
        self.unit(s, T::one())
    }

    fn user_constraints(&mut self) {
        let vcp = self.vcp;
        for (i, g) in vcp.constraints.iter().enumerate() {
            for mut f in self.epigraph(&g.atom, T::one()) {
                f.constant = f.constant - g.ub;
                self.rows.push(Constraint { tag: RowTag::G(i), f });
            }
        }
        for k in 0..vcp.n {
            if let Some(hi) = vcp.hi[k] {
                let mut f = QuadFn::zero(k + 1);
                f.lin[k] = T::one();
                f.constant = -hi;
                self.rows.push(Constraint { tag: RowTag::Bound, f });
            }
            if let Some(lo) = vcp.lo[k] {
                let mut f = QuadFn::zero(k + 1);
                f.lin[k] = -T::one();
                f.constant = lo;
                self.rows.push(Constraint { tag: RowTag::Bound, f });
            }
        }
    }

    fn finish(self, objective: QuadFn<T>) -> Compiled<T> {
        let n = self.n_vars;
        let (eq_a, eq_b) = match &self.vcp.eq {
            Some((e, f)) => (
                e.to_rows()
                    .into_iter()
                    .map(|mut r| {
                        r.resize(n, T::zero());
                        r
                    })
                    .collect(),
                f.clone(),
            ),
            None => (Vec::new(), Vec::new()),
        };
        let mut program = ScalarProgram {
            class: ProgramClass::Lp,
            n_vars: n,
            n_orig: self.vcp.n,
            z_index: self.z_index,
            objective: pad(objective, n),
            ineq: self
                .rows
                .into_iter()
                .map(|c| Constraint {
                    tag: c.tag,
                    f: pad(c.f, n),
                })
                .collect(),
            eq_a,
            eq_b,
            start: None,
        };
        program.class = program.infer_class();
        Compiled {
            program,
            lifts: self.lifts,
        }
    }
}

fn add<T: Real>(a: &QuadFn<T>, b: &QuadFn<T>) -> QuadFn<T> {
    let n = a.dim().max(b.dim());
    let mut out = pad(a.clone(), n);
    out.add_scaled(T::one(), &pad(b.clone(), n));
    out
}

fn pad<T: Real>(mut f: QuadFn<T>, n: usize) -> QuadFn<T> {
    let k = f.dim();
    debug_assert!(k <= n, "padding would drop variables");
    if k == n {
        return f;
    }
    f.lin.resize(n, T::zero());
    if let Some(h) = &f.hess {
        let mut m = Mat::zeros(n, n);
        for i in 0..k {
            for j in 0..k {
                m[(i, j)] = h[(i, j)];
            }
        }
        f.hess = Some(m);
    }
    f
}

/// Strict-feasibility margin used for lifted starting points.
fn margin<T: Real>() -> T {
    T::one()
}

impl<T: Real> Vcp<T> {
    /// The program `min wᵀF(x) s.t. g(x) <= 0`.
    pub fn compile_p1(&self, w: &[T]) -> Result<Compiled<T>> {
        if w.len() != self.q() {
            return Err(Error::DimMismatch {
                expected: self.q(),
                got: w.len(),
            });
        }
        if norm(w) <= self.cone.tol() || !self.cone.in_dual(w)? {
            return Err(Error::WeightNotInDualCone);
        }
        let mut b = Builder::new(self, false);
        let mut obj = QuadFn::zero(self.n);
        for (atom, &wi) in self.objectives.iter().zip(w) {
            if wi == T::zero() {
                continue;
            }
            if atom.is_smooth() {
                let fs = b.epigraph(atom, wi);
                obj = add(&obj, &fs[0]);
            } else if wi > T::zero() {
                let fs = b.epigraph(atom, wi);
                let f = b.collapse(fs);
                obj = add(&obj, &f);
            } else if wi < -self.cone.tol() {
                return Err(Error::WeightNotInDualCone);
            }
        }
        b.user_constraints();
        let mut c = b.finish(obj);
        c.program.start = self.slater_point().map(|x| c.lift(x, None, margin()));
        Ok(c)
    }

    /// The program `min z s.t. g(x) <= 0, Zᵀ(F(x) - v - z c) <= 0` with `z`
    /// stored right after `x`.
    pub fn compile_p2(&self, v: &[T], c: &[T]) -> Result<Compiled<T>> {
        let q = self.q();
        for a in [v, c] {
            if a.len() != q {
                return Err(Error::DimMismatch {
                    expected: q,
                    got: a.len(),
                });
            }
        }
        if norm(c) == T::zero() {
            return Err(Error::ZeroDirection);
        }
        let mut b = Builder::new(self, true);
        let zi = self.n;
        b.user_constraints();
        for (j, zj) in self.cone.dual_generators().iter().enumerate() {
            let active: Vec<usize> = (0..q).filter(|&i| zj[i] != T::zero()).collect();
            let fs = if active.len() == 1 {
                b.epigraph(&self.objectives[active[0]], zj[active[0]])
            } else {
                let mut f = QuadFn::zero(self.n);
                for &i in &active {
                    f.add_scaled(zj[i], &self.objectives[i].as_quad().expect("validated smooth"));
                }
                vec![f]
            };
            let zv = dot(zj, v);
            let zc = dot(zj, c);
            for f in fs {
                let width = f.dim().max(zi + 1);
                let mut row = pad(f, width);
                row.constant = row.constant - zv;
                row.lin[zi] = -zc;
                b.rows.push(Constraint {
                    tag: RowTag::Z(j),
                    f: row,
                });
            }
        }
        let mut obj = QuadFn::zero(zi + 1);
        obj.lin[zi] = T::one();
        let mut compiled = b.finish(obj);
        compiled.program.start = self.slater_point().and_then(|x| p2_start(&compiled, x));
        Ok(compiled)
    }

    /// Replaces the start of a compiled direction scalarization by one near
    /// the feasible point `hint`: `hint` is pulled slightly toward the Slater
    /// point, which makes it strictly feasible by convexity. Keeps the old
    /// start if that fails or is not better.
    pub fn warm_start_p2(&self, compiled: &mut Compiled<T>, hint: &[T]) {
        let (Some(zi), Some(s)) = (compiled.program.z_index, self.slater_point()) else {
            return;
        };
        if hint.len() != self.n {
            return;
        }
        let theta = T::lit(1e-2);
        let x: Vec<T> = hint.iter().zip(s).map(|(&h, &s)| h + theta * (s - h)).collect();
        if let Some(full) = p2_start(compiled, &x) {
            let better = compiled.program.start.as_ref().map_or(true, |old| full[zi] < old[zi]);
            if better {
                compiled.program.start = Some(full);
            }
        }
    }

    /// `min ±x_k` over the feasible set; used by the boundedness probe.
    pub(crate) fn compile_coordinate(&self, k: usize, sign: T) -> Compiled<T> {
        let mut b = Builder::new(self, false);
        b.user_constraints();
        let mut obj = QuadFn::zero(self.n);
        obj.lin[k] = sign;
        b.finish(obj)
    }

    /// The feasible set alone, with a zero objective.
    pub(crate) fn compile_feasibility(&self) -> Compiled<T> {
        let mut b = Builder::new(self, false);
        b.user_constraints();
        b.finish(QuadFn::zero(self.n))
    }
}

/// Lifted point `x` with `z` just large enough that every ordering row is
/// strict, or `None` if `c` does not allow it. The slack added to `z` is
/// relative: a fixed offset divided by a small `ẑᵀc` would start the solver
/// far up the objective.
fn p2_start<T: Real>(c: &Compiled<T>, x: &[T]) -> Option<Vec<T>> {
    let zi = c.program.z_index?;
    let mut full = c.lift(x, Some(T::zero()), T::lit(1e-2));
    let mut z = T::neg_infinity();
    for row in &c.program.ineq {
        if let RowTag::Z(_) = row.tag {
            let slope = row.f.lin[zi];
            let val = row.f.eval(&full);
            if slope < T::zero() {
                z = z.max(val / (-slope));
            } else if val >= T::zero() {
                return None;
            }
        }
    }
    if z == T::neg_infinity() {
        z = T::zero();
    }
    full[zi] = z + T::lit(1e-2) * (T::one() + z.abs());
    Some(full)
}
