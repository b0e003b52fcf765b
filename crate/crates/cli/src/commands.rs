use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use vsbenson::instances::{disk, elastic_net, ellipsoid, oracle_for, truss, Instance, TrussParams};
use vsbenson::polyhedron::off::{clipped_mesh, inner_halfspaces};
use vsbenson::polyhedron::Halfspace;
use vsbenson::problem::schema::ProblemDoc;
use vsbenson::{certify, run, CertifyOptions, Cone, Mode, RunConfig64, RunResult, Status, Vcp64};

use crate::params::Params;
use crate::{CertifyArgs, Cli, Command, CompareArgs, ExportArgs, GenArgs, InstanceArg, ModeArg, RunArgs, SolveArgs};

pub fn dispatch(cli: Cli) -> Result<u8> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            bail!("--jobs must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the worker pool")?;
    }
    match cli.command {
        Command::Solve(a) => solve(a),
        Command::Compare(a) => compare(a),
        Command::Certify(a) => certify_cmd(a),
        Command::Export(a) => export(a),
        Command::Gen(a) => gen(a),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn load(path: &Path) -> Result<(ProblemDoc, Vcp64)> {
    let doc = ProblemDoc::from_json(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
    let vcp = Vcp64::from_document(&doc).with_context(|| format!("building problem from {}", path.display()))?;
    Ok((doc, vcp))
}

fn config(a: &RunArgs) -> Result<RunConfig64> {
    let mut cfg = RunConfig64::new(a.epsilon, a.max_iter);
    cfg.timing = !a.no_timing;
    cfg.check_assumptions = !a.no_checks;
    let t = &a.tol;
    for (slot, v) in [
        (&mut cfg.tol.geom, t.geom),
        (&mut cfg.tol.dedupe, t.dedupe),
        (&mut cfg.tol.kkt, t.kkt),
        (&mut cfg.tol.feas, t.feas),
        (&mut cfg.tol.gap, t.gap),
        (&mut cfg.tol.cut, t.cut),
    ] {
        if let Some(v) = v {
            if !(v > 0.0 && v.is_finite()) {
                bail!("tolerances must be positive, got {v}");
            }
            *slot = v;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn summary(r: &RunResult) -> String {
    format!(
        "{:?}: mode {}, {} iterations, d_H {:.3e}, |X| {}, scalarizations {}, projections solved/skipped {}/{}",
        r.status,
        r.mode,
        r.iterations,
        r.d_h,
        r.solutions.len(),
        r.counters.scalarizations,
        r.counters.qp_solved,
        r.counters.qp_skipped
    )
}

fn solve(a: SolveArgs) -> Result<u8> {
    let (_, vcp) = load(&a.run.problem)?;
    let mode = match a.mode {
        ModeArg::Vs => Mode::Vs,
        ModeArg::First => Mode::BaselineFirst,
        ModeArg::Random => Mode::BaselineRandom { seed: a.seed },
    };
    let mut cfg = config(&a.run)?.with_mode(mode);
    cfg.log_path = a.log.clone();
    let r = run(&vcp, &cfg).context("solve failed")?;
    if let Some(out) = &a.out {
        write(out, &r.to_json())?;
    }
    println!("{}", summary(&r));
    Ok(r.status.exit_code() as u8)
}

struct Row {
    mode: String,
    status: Status,
    scalarizations: usize,
    solutions: usize,
    qp_solved: usize,
    qp_skipped: usize,
    skip_rate: f64,
    d_h: f64,
    wallclock_ms: f64,
}

const COMPARE_COLUMNS: [&str; 9] = [
    "mode",
    "status",
    "scalarizations",
    "X",
    "qp_solved",
    "qp_skipped",
    "skip_rate",
    "d_H",
    "wallclock_ms",
];

impl Row {
    fn cells(&self) -> [String; 9] {
        [
            self.mode.clone(),
            format!("{:?}", self.status),
            self.scalarizations.to_string(),
            self.solutions.to_string(),
            self.qp_solved.to_string(),
            self.qp_skipped.to_string(),
            format!("{:.4}", self.skip_rate),
            format!("{:.6e}", self.d_h),
            format!("{:.1}", self.wallclock_ms),
        ]
    }
}

fn compare(a: CompareArgs) -> Result<u8> {
    let (_, vcp) = load(&a.run.problem)?;
    let base = config(&a.run)?;
    let mut modes = vec![Mode::Vs, Mode::BaselineFirst];
    modes.extend(a.seeds.iter().map(|&seed| Mode::BaselineRandom { seed }));
    let mut rows = Vec::new();
    for mode in modes {
        let cfg = base.clone().with_mode(mode);
        let t = Instant::now();
        let r = run(&vcp, &cfg).with_context(|| format!("mode {}", mode.name()))?;
        rows.push(Row {
            mode: r.mode.clone(),
            status: r.status,
            scalarizations: r.counters.scalarizations,
            solutions: r.solutions.len(),
            qp_solved: r.counters.qp_solved,
            qp_skipped: r.counters.qp_skipped,
            skip_rate: r.counters.skip_rate(),
            d_h: r.d_h,
            wallclock_ms: if base.timing {
                t.elapsed().as_secs_f64() * 1e3
            } else {
                0.0
            },
        });
    }
    let table: Vec<[String; 9]> = rows.iter().map(Row::cells).collect();
    print!("{}", aligned(&table));
    if let Some(out) = &a.out {
        let mut w = csv::Writer::from_path(out).with_context(|| format!("writing {}", out.display()))?;
        w.write_record(COMPARE_COLUMNS)?;
        for r in &table {
            w.write_record(r)?;
        }
        w.flush()?;
    }
    let worst = rows.iter().map(|r| r.status.exit_code()).max().unwrap_or(0);
    Ok(worst as u8)
}

fn aligned(rows: &[[String; 9]]) -> String {
    let mut width: Vec<usize> = COMPARE_COLUMNS.iter().map(|c| c.len()).collect();
    for r in rows {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let line = |cells: Vec<&str>, out: &mut String| {
        let padded: Vec<String> = cells.iter().zip(&width).map(|(c, w)| format!("{c:>w$}")).collect();
        let _ = writeln!(out, "{}", padded.join("  ").trim_end());
    };
    line(COMPARE_COLUMNS.to_vec(), &mut out);
    for r in rows {
        line(r.iter().map(String::as_str).collect(), &mut out);
    }
    out
}

fn certify_cmd(a: CertifyArgs) -> Result<u8> {
    let (doc, vcp) = load(&a.problem)?;
    let result = RunResult::from_json(&read(&a.result)?).with_context(|| format!("parsing {}", a.result.display()))?;
    if result.solutions.first().map(|s| s.f.len()) != Some(vcp.q()) {
        bail!("result does not match the problem's number of objectives");
    }
    let oracle = oracle_for(&doc);
    let opts = CertifyOptions {
        samples: a.samples,
        seed: a.seed,
        ..CertifyOptions::default()
    };
    let rep = certify(&result, &vcp, oracle.as_deref(), &opts)?;
    let text = serde_json::to_string_pretty(&rep)?;
    match &a.out {
        Some(out) => write(out, &text)?,
        None => println!("{text}"),
    }
    if oracle.is_none() {
        eprintln!("note: no analytic oracle for this problem; only the Hausdorff certificate was checked");
    }
    if rep.passes {
        eprintln!(
            "certificate passes (d_H {:.3e}, recomputed {:.3e})",
            rep.d_h, rep.d_h_recomputed
        );
        Ok(0)
    } else {
        eprintln!("certificate FAILS");
        Ok(1)
    }
}

fn export(a: ExportArgs) -> Result<u8> {
    let r = RunResult::from_json(&read(&a.result)?).with_context(|| format!("parsing {}", a.result.display()))?;
    let inner = &r.inner_vertices;
    let q = inner.first().map(Vec::len).context("result has no inner vertices")?;
    if let Some(path) = &a.csv {
        let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
        let mut header = vec!["approximation".to_string()];
        header.extend((1..=q).map(|i| format!("y{i}")));
        w.write_record(&header)?;
        for (kind, vs) in [("inner", inner), ("outer", &r.outer_vertices)] {
            for v in vs {
                let mut rec = vec![kind.to_string()];
                rec.extend(v.iter().map(|x| x.to_string()));
                w.write_record(&rec)?;
            }
        }
        w.flush()?;
        return Ok(0);
    }
    let path = a.off.as_ref().expect("clap requires --off or --csv");
    let cone = match &a.problem {
        Some(p) => load(p)?.1.cone().clone(),
        None => Cone::natural(q)?,
    };
    let tol = 1e-9;
    // Both meshes are clipped around the inner vertices: outer vertices can
    // sit arbitrarily far out where nearly parallel cuts meet.
    let anchors = inner;
    let hs = if a.outer {
        r.outer_halfspaces
            .iter()
            .map(|h| Halfspace::new(h.normal.clone(), h.offset))
            .collect::<vsbenson::Result<Vec<_>>>()?
    } else {
        inner_halfspaces(inner, cone.generators(), tol)?
    };
    let extent = (0..q)
        .map(|i| {
            let lo = anchors.iter().map(|v| v[i]).fold(f64::INFINITY, f64::min);
            let hi = anchors.iter().map(|v| v[i]).fold(f64::NEG_INFINITY, f64::max);
            hi - lo
        })
        .fold(1.0, f64::max);
    let mesh = clipped_mesh(&hs, anchors, a.margin * extent, tol)?;
    write(path, &mesh.to_off())?;
    Ok(0)
}

fn gen(a: GenArgs) -> Result<u8> {
    let mut p = Params::parse(&a.params)?;
    let inst: Instance = match a.instance {
        InstanceArg::Ellipsoid => ellipsoid(p.take("a", 5.0)?)?,
        InstanceArg::Disk => disk(),
        InstanceArg::Truss => {
            let d = TrussParams::default();
            truss(&TrussParams {
                length: p.take("length", d.length)?,
                radius: p.take("radius", d.radius)?,
                youngs: p.take("youngs", d.youngs)?,
                force: p.take("force", d.force)?,
                stress: p.take("stress", d.stress)?,
                nonnegative_loads: p.take("nonnegative_loads", d.nonnegative_loads)?,
            })?
        }
        InstanceArg::Enet => elastic_net(p.take("m", 20)?, p.take("n", 50)?, p.take("seed", 1)?)?,
    };
    p.finish()?;
    write(&a.out, &inst.doc.to_json())?;
    eprintln!("wrote {} to {}", inst.name, a.out.display());
    Ok(0)
}
