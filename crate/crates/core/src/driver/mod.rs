//! The outer/inner approximation loop: initialization from weighted sums,
//! vertex-selection driven refinement, the arbitrary-vertex baseline, and
//! certification of finished runs.

mod certify;
mod result;

use std::collections::BTreeSet;
use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use certify::{certify, CertReport, CertifyOptions, OracleCheck};
pub use result::{
    Counters, CutRecord, HalfspaceRecord, IterRecord, LogWriter, RunResult, SolutionRecord, Status, LOG_COLUMNS,
};

use crate::cone::Cone;
use crate::error::{Error, Result};
use crate::linalg::{dist, dot, norm, sub};
use crate::polyhedron::{CutReport, Halfspace, InnerApprox, Polyhedron};
use crate::problem::Vcp;
use crate::scalar::{Real, Tolerances};
use crate::solvers::{derive_dual_weight, solve, SolverOptions};
use crate::vselect::{hausdorff, select_vertex, ProjectionCache};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Farthest outer vertex from the inner approximation.
    Vs,
    /// Lowest-id unresolved vertex with a fixed direction.
    BaselineFirst,
    /// Uniformly random unresolved vertex with a fixed direction.
    BaselineRandom { seed: u64 },
}

impl Mode {
    pub fn name(&self) -> String {
        match self {
            Mode::Vs => "vs".into(),
            Mode::BaselineFirst => "first".into(),
            Mode::BaselineRandom { seed } => format!("random:{seed}"),
        }
    }
}

/// Directions `c` with `min_j ẑ_jᵀc < PERTURB·‖c‖` are pushed into the
/// interior of the cone by this fraction of `‖c‖` along the canonical direction.
const PERTURB: f64 = 1e-3;

#[derive(Clone, Debug)]
pub struct RunConfig<T> {
    pub epsilon: T,
    pub max_iter: usize,
    pub mode: Mode,
    pub tol: Tolerances<T>,
    /// Run the assumption checks before initializing.
    pub check_assumptions: bool,
    /// Re-solve every skipped cache entry and record the largest change.
    pub audit_skips: bool,
    /// Record wall-clock times in the log; off gives bitwise reproducible logs.
    pub timing: bool,
    /// CSV log written (and flushed) while the run progresses.
    pub log_path: Option<PathBuf>,
}

impl<T: Real> RunConfig<T> {
    pub fn new(epsilon: T, max_iter: usize) -> Self {
        RunConfig {
            epsilon,
            max_iter,
            mode: Mode::Vs,
            tol: Tolerances::default(),
            check_assumptions: true,
            audit_skips: false,
            timing: true,
            log_path: None,
        }
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > T::zero() && self.epsilon.is_finite()) {
            return Err(Error::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        Ok(())
    }

    fn solver(&self) -> SolverOptions<T> {
        SolverOptions {
            gap: self.tol.gap,
            feas: self.tol.feas,
            ..SolverOptions::default()
        }
    }
}

/// A weak minimizer found during the run.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution<T> {
    pub x: Vec<T>,
    pub f: Vec<T>,
    pub w: Vec<T>,
}

/// Everything the loop carries between iterations.
#[derive(Clone, Debug)]
pub struct ApproxState<T> {
    pub outer: Polyhedron<T>,
    pub inner: InnerApprox<T>,
    pub solutions: Vec<Solution<T>>,
    pub cache: ProjectionCache<T>,
    pub d_h: T,
    pub iter: usize,
    pub counters: Counters,
    pub cuts: Vec<CutRecord>,
    /// Last stored z*, for the log.
    pub last_z: Option<T>,
}

impl<T: Real> ApproxState<T> {
    fn record_solution(
        &mut self,
        cone: &Cone<T>,
        x: Vec<T>,
        f: Vec<T>,
        w: Vec<T>,
        tol: &Tolerances<T>,
    ) -> Result<bool> {
        let stored = self.inner.add_point(&f, cone, tol.dedupe)?;
        if !stored {
            self.counters.inner_drops += 1;
        }
        if !self.solutions.iter().any(|s| dist(&s.f, &f) <= tol.dedupe) {
            self.solutions.push(Solution { x, f, w });
        }
        Ok(stored)
    }

    pub fn to_result(&self, status: Status, cfg: &RunConfig<T>, log: Vec<IterRecord>) -> RunResult {
        let v = |x: &[T]| x.iter().map(|a| a.as_f64()).collect::<Vec<f64>>();
        RunResult {
            status,
            mode: cfg.mode.name(),
            epsilon: cfg.epsilon.as_f64(),
            iterations: self.iter,
            d_h: self.d_h.as_f64(),
            solutions: self
                .solutions
                .iter()
                .map(|s| SolutionRecord {
                    x: v(&s.x),
                    f: v(&s.f),
                    w: v(&s.w),
                })
                .collect(),
            outer_vertices: self.outer.vertices().map(|p| v(p.point)).collect(),
            inner_vertices: self.inner.points().iter().map(|p| v(p)).collect(),
            outer_halfspaces: self
                .outer
                .halfspaces()
                .iter()
                .map(|h| HalfspaceRecord {
                    normal: v(&h.normal),
                    offset: h.offset.as_f64(),
                })
                .collect(),
            cuts: self.cuts.clone(),
            counters: self.counters.clone(),
            log,
        }
    }
}

/// Weighted-sum solves along every dual generator give the initial outer
/// approximation (their supporting halfspaces) and inner approximation
/// (their images plus the cone). The projection cache is filled once.
pub fn initialize<T: Real>(vcp: &Vcp<T>, cfg: &RunConfig<T>) -> Result<ApproxState<T>> {
    let cone = vcp.cone();
    let opts = cfg.solver();
    let mut found = Vec::new();
    let mut halfspaces = Vec::new();
    for z in cone.dual_generators() {
        let compiled = vcp.compile_p1(z)?;
        let sol = solve(&compiled.program, &opts).map_err(|e| match e {
            Error::ProgramUnbounded => Error::InitUnbounded,
            e => e,
        })?;
        let f = vcp.image(&sol.x)?;
        halfspaces.push(Halfspace::new(z.clone(), dot(z, &f))?);
        found.push((sol.x, f, z.clone()));
    }
    let outer = Polyhedron::from_halfspaces(&halfspaces, cfg.tol.geom).map_err(|e| match e {
        Error::UnboundedBelow | Error::Infeasible => Error::InitNoVertex,
        e => e,
    })?;
    let mut state = ApproxState {
        outer,
        inner: InnerApprox::new(cone),
        solutions: Vec::new(),
        cache: ProjectionCache::new(),
        d_h: T::infinity(),
        iter: 0,
        counters: Counters {
            scalarizations: found.len(),
            ..Counters::default()
        },
        cuts: Vec::new(),
        last_z: None,
    };
    for (x, f, w) in found {
        state.record_solution(cone, x, f, w, &cfg.tol)?;
    }
    if cfg.mode == Mode::Vs {
        let st = state.cache.fill(&state.outer, &state.inner, cfg.tol.kkt)?;
        state.counters.qp_solved += st.solved;
        state.d_h = hausdorff(&state.outer, &state.cache);
    }
    Ok(state)
}

/// Outcome of one refinement step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Step {
    Continued,
    /// No selectable vertex remains.
    Stalled,
}

fn interior_direction<T: Real>(cone: &Cone<T>, c: Vec<T>, counters: &mut Counters) -> Vec<T> {
    let n = norm(&c);
    let worst = cone
        .dual_generators()
        .iter()
        .map(|z| dot(z, &c))
        .fold(T::infinity(), T::min);
    if worst >= T::lit(PERTURB) * n {
        return c;
    }
    counters.perturbed_directions += 1;
    let shift = T::lit(PERTURB) * n;
    c.iter()
        .zip(cone.canonical_direction())
        .map(|(&ci, d)| ci + shift * d)
        .collect()
}

/// Solves the direction scalarization from `v` along `c`; returns
/// `(x, F(x), w, z)` with `wᵀc = 1`.
fn scalarize<T: Real>(
    vcp: &Vcp<T>,
    v: &[T],
    c: &[T],
    known: &[Solution<T>],
    cfg: &RunConfig<T>,
) -> Result<(Vec<T>, Vec<T>, Vec<T>, T)> {
    let mut compiled = vcp.compile_p2(v, c)?;
    if let Some(s) = closest_along(vcp.cone(), known, v, c) {
        vcp.warm_start_p2(&mut compiled, &s.x);
    }
    let sol = solve(&compiled.program, &cfg.solver())?;
    let w = derive_dual_weight(&sol, vcp.cone(), c)?;
    let f = vcp.image(&sol.x)?;
    let z = sol.z.expect("direction scalarization has z");
    Ok((sol.x, f, w, z))
}

/// The known solution needing the smallest `z` with `F(x) ≤_C v + z c`.
fn closest_along<'a, T: Real>(cone: &Cone<T>, known: &'a [Solution<T>], v: &[T], c: &[T]) -> Option<&'a Solution<T>> {
    let z = cone.dual_generators();
    let need = |s: &Solution<T>| {
        z.iter()
            .map(|zj| dot(zj, &sub(&s.f, v)) / dot(zj, c))
            .fold(T::neg_infinity(), T::max)
    };
    known
        .iter()
        .map(|s| (need(s), s))
        .filter(|(n, _)| n.is_finite())
        .min_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"))
        .map(|(_, s)| s)
}

/// `wᵀy >= wᵀv + z`, backed off by the solver's duality gap.
fn supporting_halfspace<T: Real>(w: &[T], v: &[T], z: T, cfg: &RunConfig<T>) -> Result<Halfspace<T>> {
    Halfspace::new(w.to_vec(), dot(w, v) + z - cfg.tol.gap)
}

fn cut_record<T: Real>(iter: usize, v: &[T], c: &[T], w: &[T], z: T, applied: bool) -> CutRecord {
    let f = |x: &[T]| x.iter().map(|a| a.as_f64()).collect();
    CutRecord {
        iter,
        v: f(v),
        c: f(c),
        w: f(w),
        z: z.as_f64(),
        applied,
    }
}

/// One iteration of the vertex-selection loop.
pub fn iterate_vs<T: Real>(state: &mut ApproxState<T>, vcp: &Vcp<T>, cfg: &RunConfig<T>) -> Result<Step> {
    let Some(sel) = select_vertex(&state.outer, &state.cache) else {
        return Ok(Step::Stalled);
    };
    let iter = state.iter + 1;
    let wrap = |e: Error| Error::Iteration {
        iter,
        source: Box::new(e),
    };
    let cone = vcp.cone();
    let c = interior_direction(cone, sub(&sel.point, &sel.vertex), &mut state.counters);
    let (x, f, w, z) = scalarize(vcp, &sel.vertex, &c, &state.solutions, cfg).map_err(wrap)?;
    state.counters.scalarizations += 1;

    let applied = z > cfg.tol.cut;
    let report = if applied {
        let h = supporting_halfspace(&w, &sel.vertex, z, cfg).map_err(wrap)?;
        let r = state.outer.add_halfspace(&h).map_err(wrap)?;
        if r.redundant {
            state.counters.redundant_cuts += 1;
        }
        r
    } else {
        log::warn!("iteration {iter}: non-cutting solve at vertex {} (z* = {z})", sel.id);
        state.counters.non_cutting += 1;
        CutReport {
            kept: state.outer.vertices().map(|v| v.id).collect(),
            redundant: true,
            ..CutReport::default()
        }
    };
    state.cuts.push(cut_record(iter, &sel.vertex, &c, &w, z, applied));
    let stored = state.record_solution(cone, x, f.clone(), w, &cfg.tol).map_err(wrap)?;

    let stats = state
        .cache
        .refresh(
            &state.outer,
            &report,
            stored.then_some(f.as_slice()),
            &state.inner,
            cfg.tol.kkt,
        )
        .map_err(wrap)?;
    state.counters.qp_solved += stats.solved;
    state.counters.qp_skipped += stats.skipped;
    if cfg.audit_skips {
        let mut worst = state.counters.max_skip_error.unwrap_or(0.0);
        for id in &stats.skipped_ids {
            let s = state.outer.vertex(*id).expect("skipped ids are alive");
            let fresh = state.inner.project(s, None, cfg.tol.kkt).map_err(wrap)?;
            let cached = state.cache.get(*id).expect("skipped entries are cached").dist;
            worst = worst.max((fresh.dist - cached).abs().as_f64());
        }
        state.counters.max_skip_error = Some(worst);
    }
    if !applied {
        state.cache.bar(sel.id);
    }
    state.d_h = hausdorff(&state.outer, &state.cache);
    state.last_z = Some(z);
    state.iter = iter;
    Ok(Step::Continued)
}

struct Logger {
    start: Instant,
    timing: bool,
    rows: Vec<IterRecord>,
    sink: Option<LogWriter<BufWriter<File>>>,
}

impl Logger {
    fn new<T: Real>(cfg: &RunConfig<T>) -> Result<Self> {
        let sink = match &cfg.log_path {
            Some(p) => {
                let f = File::create(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
                Some(LogWriter::new(BufWriter::new(f)))
            }
            None => None,
        };
        Ok(Logger {
            start: Instant::now(),
            timing: cfg.timing,
            rows: Vec::new(),
            sink,
        })
    }

    fn push<T: Real>(&mut self, s: &ApproxState<T>, d_h: Option<T>) -> Result<()> {
        let ms = if self.timing {
            (self.start.elapsed().as_secs_f64() * 1e6).round() / 1e3
        } else {
            0.0
        };
        let r = IterRecord {
            iter: s.iter,
            n_outer_vertices: s.outer.vertex_count(),
            n_inner_vertices: s.inner.points().len(),
            d_h: d_h.map(Real::as_f64),
            z_star: s.last_z.map(Real::as_f64),
            qp_solved: s.counters.qp_solved,
            qp_skipped: s.counters.qp_skipped,
            scalarizations_total: s.counters.scalarizations,
            wallclock_ms: ms,
        };
        if let Some(w) = &mut self.sink {
            w.push(&r)?;
        }
        self.rows.push(r);
        Ok(())
    }
}

fn preflight<T: Real>(vcp: &Vcp<T>, cfg: &RunConfig<T>) -> Result<()> {
    cfg.validate()?;
    if !cfg.check_assumptions {
        return Ok(());
    }
    let report = vcp.check_assumptions();
    if report.slater.is_none() {
        return Err(Error::ProgramInfeasible);
    }
    if !report.unbounded_coordinates.is_empty() {
        return Err(Error::InitUnbounded);
    }
    for e in &report.probe_errors {
        log::warn!("boundedness probe inconclusive: {e}");
    }
    Ok(())
}

/// Runs the configured mode to completion.
pub fn run<T: Real>(vcp: &Vcp<T>, cfg: &RunConfig<T>) -> Result<RunResult> {
    run_observed(vcp, cfg, |_| {})
}

/// [`run`] with a callback after initialization and after every iteration.
pub fn run_observed<T: Real, F>(vcp: &Vcp<T>, cfg: &RunConfig<T>, observe: F) -> Result<RunResult>
where
    F: FnMut(&ApproxState<T>),
{
    match cfg.mode {
        Mode::Vs => run_vs(vcp, cfg, observe),
        _ => run_baseline_observed(vcp, cfg, observe),
    }
}

fn run_vs<T: Real, F>(vcp: &Vcp<T>, cfg: &RunConfig<T>, mut observe: F) -> Result<RunResult>
where
    F: FnMut(&ApproxState<T>),
{
    preflight(vcp, cfg)?;
    let mut log = Logger::new(cfg)?;
    let mut state = initialize(vcp, cfg)?;
    observe(&state);
    log.push(&state, Some(state.d_h))?;
    let status = loop {
        if state.d_h <= cfg.epsilon {
            break Status::Converged;
        }
        if state.iter >= cfg.max_iter {
            break Status::MaxIter;
        }
        if iterate_vs(&mut state, vcp, cfg)? == Step::Stalled {
            break Status::Stalled;
        }
        observe(&state);
        log.push(&state, Some(state.d_h))?;
    };
    Ok(state.to_result(status, cfg, log.rows))
}

/// The arbitrary-vertex scheme: a fixed interior direction, and a vertex is
/// resolved once its scalarization moves it by at most ε.
pub fn run_baseline<T: Real>(vcp: &Vcp<T>, cfg: &RunConfig<T>) -> Result<RunResult> {
    run_baseline_observed(vcp, cfg, |_| {})
}

fn run_baseline_observed<T: Real, F>(vcp: &Vcp<T>, cfg: &RunConfig<T>, mut observe: F) -> Result<RunResult>
where
    F: FnMut(&ApproxState<T>),
{
    let mut rng = match cfg.mode {
        Mode::BaselineRandom { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        Mode::BaselineFirst => None,
        Mode::Vs => return Err(Error::Config("baseline run requested in vs mode".into())),
    };
    preflight(vcp, cfg)?;
    let cone = vcp.cone();
    let c = cone.canonical_direction();
    let mut log = Logger::new(cfg)?;
    let mut state = initialize(vcp, cfg)?;
    observe(&state);
    log.push(&state, None)?;
    let mut resolved: BTreeSet<usize> = BTreeSet::new();
    let status = loop {
        let open: Vec<(usize, Vec<T>)> = state
            .outer
            .vertices()
            .filter(|v| !resolved.contains(&v.id))
            .map(|v| (v.id, v.point.to_vec()))
            .collect();
        if open.is_empty() {
            break Status::Converged;
        }
        if state.iter >= cfg.max_iter {
            break Status::MaxIter;
        }
        let pick = match &mut rng {
            Some(r) => r.gen_range(0..open.len()),
            None => 0,
        };
        let (id, v) = &open[pick];
        let iter = state.iter + 1;
        let wrap = |e: Error| Error::Iteration {
            iter,
            source: Box::new(e),
        };
        let (x, f, w, z) = scalarize(vcp, v, &c, &state.solutions, cfg).map_err(wrap)?;
        state.counters.scalarizations += 1;
        let applied = z > cfg.epsilon;
        if applied {
            let h = supporting_halfspace(&w, v, z, cfg).map_err(wrap)?;
            let r = state.outer.add_halfspace(&h).map_err(wrap)?;
            if r.redundant {
                state.counters.redundant_cuts += 1;
            }
            for gone in &r.cut {
                resolved.remove(gone);
            }
        } else {
            resolved.insert(*id);
        }
        state.cuts.push(cut_record(iter, v, &c, &w, z, applied));
        state.record_solution(cone, x, f, w, &cfg.tol).map_err(wrap)?;
        state.last_z = Some(z);
        state.iter = iter;
        observe(&state);
        log.push(&state, None)?;
    };
    // The certificate: one full projection batch on the final pair.
    let st = state.cache.fill(&state.outer, &state.inner, cfg.tol.kkt)?;
    state.counters.qp_solved += st.solved;
    state.d_h = hausdorff(&state.outer, &state.cache);
    Ok(state.to_result(status, cfg, log.rows))
}

#[cfg(test)]
mod tests;
