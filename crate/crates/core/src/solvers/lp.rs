//! Dense two-phase tableau simplex with dual recovery.
//!
//! Free variables are split as `x = x⁺ - x⁻`, inequality rows get slacks and
//! every row gets an artificial column. The artificial columns stay in the
//! tableau through phase two; their reduced costs are the row duals.

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::{ProgramClass, ScalarProgram, ScalarSolution, SolverOptions};

/// Pivots without objective improvement before switching to Bland's rule.
const DEGENERATE_STREAK: usize = 50;

struct Tableau<T> {
    rows: Vec<Vec<T>>,
    /// Reduced costs; the last entry is minus the objective value.
    cost: Vec<T>,
    basis: Vec<usize>,
    ncols: usize,
}

impl<T: Real> Tableau<T> {
    fn pivot(&mut self, r: usize, c: usize) {
        let piv = self.rows[r][c];
        let inv = T::one() / piv;
        for v in self.rows[r].iter_mut() {
            *v = *v * inv;
        }
        self.rows[r][c] = T::one();
        let prow = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != T::zero() {
                for (v, &p) in row.iter_mut().zip(&prow) {
                    *v = *v - f * p;
                }
                row[c] = T::zero();
            }
        }
        let f = self.cost[c];
        if f != T::zero() {
            for (v, &p) in self.cost.iter_mut().zip(&prow) {
                *v = *v - f * p;
            }
            self.cost[c] = T::zero();
        }
        self.basis[r] = c;
    }

    fn set_cost(&mut self, c: &[T]) {
        self.cost = c.to_vec();
        self.cost.push(T::zero());
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = c[b];
            if cb != T::zero() {
                for (v, &t) in self.cost.iter_mut().zip(&self.rows[i]) {
                    *v = *v - cb * t;
                }
            }
        }
    }

    /// Runs simplex iterations over columns `< allowed`. Returns false if the
    /// objective is unbounded below.
    fn optimize(&mut self, allowed: usize, tol: T, max_iter: usize) -> Result<bool> {
        let rhs = self.ncols;
        let mut streak = 0usize;
        let mut last_obj = -self.cost[rhs];
        for _ in 0..max_iter {
            let bland = streak >= DEGENERATE_STREAK;
            let mut enter = None;
            let mut best = -tol;
            for j in 0..allowed {
                let d = self.cost[j];
                if d < best {
                    enter = Some(j);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(c) = enter else { return Ok(true) };
            let mut leave: Option<(usize, T)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = row[c];
                if a > tol {
                    let ratio = row[rhs] / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - tol || (ratio <= lr + tol && self.basis[i] < self.basis[li]) {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else { return Ok(false) };
            self.pivot(r, c);
            let obj = -self.cost[rhs];
            if obj < last_obj - tol {
                streak = 0;
                last_obj = obj;
            } else {
                streak += 1;
            }
        }
        Err(Error::MaxIter("simplex"))
    }
}

pub fn solve_lp<T: Real>(sp: &ScalarProgram<T>, opts: &SolverOptions<T>) -> Result<ScalarSolution<T>> {
    debug_assert_eq!(sp.class, ProgramClass::Lp);
    let n = sp.n_vars;
    let m_ub = sp.ineq.len();
    let m_eq = sp.eq_a.len();
    let m = m_ub + m_eq;
    // columns: x⁺ (n) | x⁻ (n) | slack (m_ub) | artificial (m) | rhs
    let n_struct = 2 * n + m_ub;
    let ncols = n_struct + m;
    let tol = T::tol_floor(1e-10, 1e2);

    let mut rows = Vec::with_capacity(m);
    let mut sign = Vec::with_capacity(m);
    for i in 0..m {
        let (a, b, slack) = if i < m_ub {
            let f = &sp.ineq[i].f;
            (&f.lin, -f.constant, Some(i))
        } else {
            (&sp.eq_a[i - m_ub], sp.eq_b[i - m_ub], None)
        };
        let mut row = vec![T::zero(); ncols + 1];
        for j in 0..n {
            row[j] = a[j];
            row[n + j] = -a[j];
        }
        if let Some(s) = slack {
            row[2 * n + s] = T::one();
        }
        row[ncols] = b;
        let s = if b < T::zero() { -T::one() } else { T::one() };
        for v in row.iter_mut() {
            *v = *v * s;
        }
        row[n_struct + i] = T::one();
        rows.push(row);
        sign.push(s);
    }
    let mut tab = Tableau {
        rows,
        cost: Vec::new(),
        basis: (n_struct..ncols).collect(),
        ncols,
    };
    let max_iter = 50 * (ncols + m) + 1000;

    let mut c1 = vec![T::zero(); ncols];
    for v in c1.iter_mut().skip(n_struct) {
        *v = T::one();
    }
    tab.set_cost(&c1);
    tab.optimize(n_struct, tol, max_iter)?;
    let infeas = -tab.cost[ncols];
    let rhs_scale = tab.rows.iter().map(|r| r[ncols].abs()).fold(T::one(), T::max);
    if infeas > opts.feas * rhs_scale {
        return Err(Error::ProgramInfeasible);
    }
    // Drive zero-level artificials out of the basis where possible.
    for r in 0..m {
        if tab.basis[r] >= n_struct {
            let col = (0..n_struct).find(|&j| tab.rows[r][j].abs() > T::lit(1e-9));
            if let Some(j) = col {
                tab.pivot(r, j);
            }
        }
    }

    let mut c2 = vec![T::zero(); ncols];
    for j in 0..n {
        c2[j] = sp.objective.lin[j];
        c2[n + j] = -sp.objective.lin[j];
    }
    tab.set_cost(&c2);
    if !tab.optimize(n_struct, tol, max_iter)? {
        return Err(Error::ProgramUnbounded);
    }

    let mut vals = vec![T::zero(); ncols];
    for (r, &b) in tab.basis.iter().enumerate() {
        vals[b] = tab.rows[r][ncols];
    }
    let x: Vec<T> = (0..n).map(|j| vals[j] - vals[n + j]).collect();
    // Row dual y_i = -(reduced cost of artificial i); multiplier = -sign*y.
    let mult: Vec<T> = (0..m)
        .map(|i| {
            let y = -tab.cost[n_struct + i] * sign[i];
            -y
        })
        .collect();
    let u: Vec<T> = mult[..m_ub].iter().map(|&v| v.max(T::zero())).collect();
    let nu = mult[m_ub..].to_vec();
    Ok(ScalarSolution::assemble(sp, x, u, nu))
}

#[cfg(test)]
mod tests {
    use super::super::{Constraint, QuadFn, RowTag};
    use super::*;

    fn lp(n: usize, obj: Vec<f64>, ineq: Vec<(Vec<f64>, f64)>, eq: Vec<(Vec<f64>, f64)>) -> ScalarProgram<f64> {
        ScalarProgram {
            class: ProgramClass::Lp,
            n_vars: n,
            n_orig: n,
            z_index: None,
            objective: QuadFn::affine(obj, 0.0),
            ineq: ineq
                .into_iter()
                .enumerate()
                .map(|(i, (a, c))| Constraint {
                    tag: RowTag::G(i),
                    f: QuadFn::affine(a, c),
                })
                .collect(),
            eq_a: eq.iter().map(|e| e.0.clone()).collect(),
            eq_b: eq.iter().map(|e| e.1).collect(),
            start: None,
        }
    }

    #[test]
    fn single_bound() {
        // min x s.t. 3 - x <= 0
        let sol = solve_lp(&lp(1, vec![1.0], vec![(vec![-1.0], 3.0)], vec![]), &Default::default()).unwrap();
        assert!((sol.x[0] - 3.0).abs() < 1e-12);
        assert!((sol.u[0] - 1.0).abs() < 1e-12);
        assert!(sol.kkt.stationarity < 1e-12);
    }

    #[test]
    fn two_variables() {
        // min x1 + x2 s.t. x1 + x2 >= 1, x >= 0
        let sp = lp(
            2,
            vec![1.0, 1.0],
            vec![(vec![-1.0, -1.0], 1.0), (vec![-1.0, 0.0], 0.0), (vec![0.0, -1.0], 0.0)],
            vec![],
        );
        let sol = solve_lp(&sp, &Default::default()).unwrap();
        assert!((sol.value - 1.0).abs() < 1e-12);
        assert!(sol.kkt.stationarity < 1e-10);
        assert!(sol.kkt.complementarity < 1e-10);
    }

    #[test]
    fn unbounded_and_infeasible() {
        let sp = lp(1, vec![-1.0], vec![(vec![-1.0], 0.0)], vec![]);
        assert_eq!(solve_lp(&sp, &Default::default()).unwrap_err(), Error::ProgramUnbounded);
        let sp = lp(1, vec![1.0], vec![(vec![-1.0], 1.0), (vec![1.0], 0.0)], vec![]);
        assert_eq!(
            solve_lp(&sp, &Default::default()).unwrap_err(),
            Error::ProgramInfeasible
        );
    }

    #[test]
    fn equality_multiplier() {
        // min x1 + 2 x2 s.t. x1 + x2 = 1, x >= 0  ->  x = (1, 0), nu = -1
        let sp = lp(
            2,
            vec![1.0, 2.0],
            vec![(vec![-1.0, 0.0], 0.0), (vec![0.0, -1.0], 0.0)],
            vec![(vec![1.0, 1.0], 1.0)],
        );
        let sol = solve_lp(&sp, &Default::default()).unwrap();
        assert!((sol.x[0] - 1.0).abs() < 1e-12 && sol.x[1].abs() < 1e-12);
        assert!((sol.nu[0] + 1.0).abs() < 1e-12);
        assert!(sol.kkt.stationarity < 1e-12);
    }
}
