use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vsbenson"))
}

fn exec(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gen(dir: &TempDir, instance: &str, params: &str) -> PathBuf {
    let out = path(dir, &format!("{instance}.json"));
    let o = exec(&["gen", "--instance", instance, "--params", params, "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn disk_solve_writes_result_and_log() {
    let dir = TempDir::new().unwrap();
    let problem = gen(&dir, "disk", "");
    let (res, log) = (path(&dir, "r.json"), path(&dir, "r.csv"));
    let o = exec(&[
        "solve",
        "--problem",
        s(&problem),
        "--epsilon",
        "0.05",
        "--out",
        s(&res),
        "--log",
        s(&log),
    ]);
    assert_eq!(code(&o), 0);
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(&res).unwrap()).unwrap();
    assert_eq!(r["status"], "Converged");
    assert!(r["d_H"].as_f64().unwrap() <= 0.05);

    let mut rdr = csv::Reader::from_path(&log).unwrap();
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, vsbenson::driver::LOG_COLUMNS);
    let rows = rdr.records().collect::<Result<Vec<_>, _>>().unwrap();
    assert_eq!(rows.len(), r["iterations"].as_u64().unwrap() as usize + 1);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let problem = gen(&dir, "disk", "");
    let p = s(&problem);
    assert_eq!(code(&exec(&["solve", "--problem", p, "--epsilon", "-1"])), 1);
    assert_eq!(
        code(&exec(&[
            "solve",
            "--problem",
            p,
            "--epsilon",
            "1e-6",
            "--max-iter",
            "1"
        ])),
        2
    );
    assert_eq!(
        code(&exec(&["solve", "--problem", "/nonexistent.json", "--epsilon", "0.1"])),
        1
    );
    assert_eq!(code(&exec(&["solve", "--epsilon", "0.1"])), 1);
    assert_eq!(
        code(&exec(&["solve", "--problem", p, "--epsilon", "0.1", "--tol.cut", "0"])),
        1
    );
    assert_eq!(code(&exec(&["--help"])), 0);
}

#[test]
fn logs_without_timing_are_reproducible() {
    let dir = TempDir::new().unwrap();
    let problem = gen(&dir, "ellipsoid", "a=3");
    let mut logs = Vec::new();
    for (i, jobs) in ["1", "4"].iter().enumerate() {
        let log = path(&dir, &format!("{i}.csv"));
        let o = exec(&[
            "--jobs",
            jobs,
            "solve",
            "--problem",
            s(&problem),
            "--epsilon",
            "0.1",
            "--mode",
            "random",
            "--seed",
            "3",
            "--no-timing",
            "--log",
            s(&log),
        ]);
        assert_eq!(code(&o), 0);
        logs.push(fs::read(&log).unwrap());
    }
    assert_eq!(logs[0], logs[1]);
}

#[test]
fn compare_reports_every_mode() {
    let dir = TempDir::new().unwrap();
    let problem = gen(&dir, "disk", "");
    let table = path(&dir, "cmp.csv");
    let o = exec(&[
        "compare",
        "--problem",
        s(&problem),
        "--epsilon",
        "0.05",
        "--seeds",
        "1,2",
        "--out",
        s(&table),
    ]);
    assert_eq!(code(&o), 0);
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 5);
    let mut rdr = csv::Reader::from_path(&table).unwrap();
    let modes: Vec<String> = rdr.records().map(|r| r.unwrap()[0].to_string()).collect();
    assert_eq!(modes, ["vs", "first", "random:1", "random:2"]);
    for r in csv::Reader::from_path(&table).unwrap().records() {
        let r = r.unwrap();
        assert_eq!(&r[1], "Converged");
        assert!(r[7].parse::<f64>().unwrap() <= 0.05);
    }
}

#[test]
fn gen_solve_certify_export_ellipsoid() {
    let dir = TempDir::new().unwrap();
    let problem = gen(&dir, "ellipsoid", "a=5");
    let res = path(&dir, "r.json");
    assert_eq!(
        code(&exec(&[
            "solve",
            "--problem",
            s(&problem),
            "--epsilon",
            "0.1",
            "--out",
            s(&res)
        ])),
        0
    );

    let rep = path(&dir, "cert.json");
    let o = exec(&[
        "certify",
        "--problem",
        s(&problem),
        "--result",
        s(&res),
        "--samples",
        "2000",
        "--out",
        s(&rep),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rep: serde_json::Value = serde_json::from_str(&fs::read_to_string(&rep).unwrap()).unwrap();
    assert_eq!(rep["passes"], true);
    assert!(rep["oracle"]["max_surface_residual"].as_f64().unwrap() < 1e-5);

    for outer in [false, true] {
        let off = path(&dir, "m.off");
        let mut args = vec!["export", "--result", s(&res), "--off", s(&off)];
        if outer {
            args.push("--outer");
        }
        assert_eq!(code(&exec(&args)), 0);
        let text = fs::read_to_string(&off).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("OFF"));
        let counts: Vec<i64> = lines.next().unwrap().split(' ').map(|x| x.parse().unwrap()).collect();
        // V - E + F of a closed convex surface
        assert_eq!(counts[0] - counts[2] + counts[1], 2, "outer={outer}");
    }
    let vcsv = path(&dir, "v.csv");
    assert_eq!(code(&exec(&["export", "--result", s(&res), "--csv", s(&vcsv)])), 0);
    assert!(fs::read_to_string(&vcsv)
        .unwrap()
        .starts_with("approximation,y1,y2,y3\n"));
}

#[test]
fn off_export_needs_three_objectives() {
    let dir = TempDir::new().unwrap();
    let problem = gen(&dir, "disk", "");
    let res = path(&dir, "r.json");
    assert_eq!(
        code(&exec(&[
            "solve",
            "--problem",
            s(&problem),
            "--epsilon",
            "0.1",
            "--out",
            s(&res)
        ])),
        0
    );
    let o = exec(&["export", "--result", s(&res), "--off", s(&path(&dir, "m.off"))]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("three-dimensional"));
    assert_eq!(
        code(&exec(&[
            "export",
            "--result",
            s(&res),
            "--csv",
            s(&path(&dir, "v.csv"))
        ])),
        0
    );
}

#[test]
fn truss_and_enet_round_trip() {
    let dir = TempDir::new().unwrap();
    for (inst, params, eps) in [("truss", "", "0.5"), ("enet", "m=12,n=8,seed=1", "0.5")] {
        let problem = gen(&dir, inst, params);
        let res = path(&dir, &format!("{inst}-r.json"));
        let o = exec(&["solve", "--problem", s(&problem), "--epsilon", eps, "--out", s(&res)]);
        assert_eq!(code(&o), 0, "{inst}: {}", String::from_utf8_lossy(&o.stderr));
        let o = exec(&[
            "certify",
            "--problem",
            s(&problem),
            "--result",
            s(&res),
            "--samples",
            "100",
        ]);
        assert_eq!(code(&o), 0, "{inst}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn gen_is_deterministic_and_validates_params() {
    let dir = TempDir::new().unwrap();
    let a = fs::read(gen(&dir, "enet", "m=10,n=6,seed=4")).unwrap();
    let b = fs::read(gen(&dir, "enet", "m=10,n=6,seed=4")).unwrap();
    assert_eq!(a, b);
    let out = path(&dir, "x.json");
    assert_eq!(
        code(&exec(&[
            "gen",
            "--instance",
            "ellipsoid",
            "--params",
            "a=-1",
            "--out",
            s(&out)
        ])),
        1
    );
    assert_eq!(
        code(&exec(&[
            "gen",
            "--instance",
            "ellipsoid",
            "--params",
            "b=1",
            "--out",
            s(&out)
        ])),
        1
    );
    let truss = gen(&dir, "truss", "nonnegative_loads=true");
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(truss).unwrap()).unwrap();
    assert_eq!(doc["meta"]["nonnegative_loads"], true);
}
