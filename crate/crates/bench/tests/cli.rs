use std::path::Path;
use std::process::{Command, Output};

const HEADER: &str = "iter,p,d,gap,memory_size,active_size,inner_iterations,cum_time_ms";

fn bench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lkm-bench"))
        .args(args)
        .env_remove("BENCH_THREADS")
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

/// One column of a trace CSV.
fn column(path: &Path, name: &str) -> Vec<f64> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), HEADER);
    let idx = HEADER.split(',').position(|c| c == name).unwrap();
    lines
        .map(|l| l.split(',').nth(idx).unwrap().parse().unwrap())
        .collect()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn lkm_memory_stays_within_n_plus_one() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.csv");
    let out = bench(&[
        "solve",
        "--n",
        "10",
        "--seed",
        "1",
        "--algo",
        "lkm",
        "--eps",
        "1e-5",
        "--relative",
        "--trace",
        path_str(&trace),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let memory = column(&trace, "memory_size");
    assert!(!memory.is_empty());
    assert!(memory.iter().all(|&m| m <= 11.0));
}

#[test]
fn worked_instance_has_two_rows() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.csv");
    let json = dir.path().join("s.json");
    let out = bench(&[
        "solve",
        "--n",
        "2",
        "--objective",
        "identity",
        "--algo",
        "lkm",
        "--eps",
        "0",
        "--trace",
        path_str(&trace),
        "--json",
        path_str(&json),
    ]);
    assert_eq!(code(&out), 0);
    let (p, d) = (column(&trace, "p"), column(&trace, "d"));
    assert_eq!(p.len(), 2);
    assert!((p[1] + 2.25).abs() < 1e-10 && (d[1] + 2.25).abs() < 1e-10);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(summary["status"], "converged");
    assert_eq!(summary["iterations"], 2);
    assert_eq!(summary["final_p"], -2.25);
}

#[test]
fn osm_memory_increases_by_one() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.csv");
    let out = bench(&[
        "solve",
        "--algo",
        "osm",
        "--n",
        "100",
        "--seed",
        "7",
        "--eps",
        "1e-5",
        "--relative",
        "--trace",
        path_str(&trace),
    ]);
    assert_eq!(code(&out), 0);
    let memory = column(&trace, "memory_size");
    assert!(memory.len() > 2);
    assert!(memory.windows(2).all(|w| w[1] == w[0] + 1.0));
}

#[test]
fn plot_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let plot = dir.path().join("p.svg");
    let out = bench(&[
        "solve",
        "--n",
        "5",
        "--algo",
        "awayfw",
        "--eps",
        "1e-6",
        "--plot",
        path_str(&plot),
    ]);
    assert_eq!(code(&out), 0);
    assert!(std::fs::read_to_string(&plot).unwrap().starts_with("<svg"));
}

#[test]
fn compare_writes_one_trace_per_algorithm() {
    let dir = tempfile::tempdir().unwrap();
    let out = bench(&[
        "compare",
        "--n",
        "12",
        "--algos",
        "lkm,osm,lfcfw",
        "--eps",
        "1e-5",
        "--relative",
        "--out",
        path_str(dir.path()),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for file in [
        "lkm.csv",
        "osm.csv",
        "lfcfw.csv",
        "gap.svg",
        "memory.svg",
        "time.svg",
        "summary.json",
    ] {
        assert!(dir.path().join(file).exists(), "missing {file}");
    }
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary.as_array().unwrap().len(), 3);
}

#[test]
fn kelley_and_its_dual_report_identical_gaps() {
    let dir = tempfile::tempdir().unwrap();
    let out = bench(&[
        "compare",
        "--n",
        "2",
        "--objective",
        "identity",
        "--algos",
        "lkm,lfcfw",
        "--b-rule",
        "active-set",
        "--eps",
        "0",
        "--out",
        path_str(dir.path()),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        column(&dir.path().join("lkm.csv"), "gap"),
        column(&dir.path().join("lfcfw.csv"), "gap")
    );
}

#[test]
fn compare_needs_two_algorithms() {
    let dir = tempfile::tempdir().unwrap();
    let out = bench(&[
        "compare",
        "--algos",
        "lkm,lkm",
        "--out",
        path_str(dir.path()),
    ]);
    assert_eq!(code(&out), 3);
}

#[test]
fn bench_threads_is_validated_and_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_lkm-bench"))
            .args([
                "compare",
                "--n",
                "8",
                "--algos",
                "lkm,osm,fcfw",
                "--out",
                path_str(dir.path()),
            ])
            .env("BENCH_THREADS", threads)
            .output()
            .unwrap()
    };
    assert_eq!(code(&run("1")), 0);
    assert_eq!(code(&run("0")), 3);
    assert_eq!(code(&run("many")), 3);
}

#[test]
fn small_verify_passes() {
    let out = bench(&["verify", "--n-max", "2"]);
    assert_eq!(code(&out), 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("criterion  3 PASS"));
    assert!(!stdout.contains("FAIL"));
}

#[test]
fn injected_fault_fails_the_memory_criterion() {
    let out = bench(&["verify", "--n-max", "10", "--inject-fault"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stdout).contains("criterion  2 FAIL"));
}

#[test]
fn generated_instance_solves_like_the_flags() {
    let dir = tempfile::tempdir().unwrap();
    let instance = dir.path().join("i.json");
    assert_eq!(
        code(&bench(&[
            "gen",
            "--n",
            "9",
            "--seed",
            "5",
            "--out",
            path_str(&instance)
        ])),
        0
    );
    let spec: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&instance).unwrap()).unwrap();
    assert_eq!(spec["version"], 1);
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    assert_eq!(
        code(&bench(&[
            "solve",
            "--instance",
            path_str(&instance),
            "--trace",
            path_str(&a)
        ])),
        0
    );
    assert_eq!(
        code(&bench(&[
            "solve",
            "--n",
            "9",
            "--seed",
            "5",
            "--trace",
            path_str(&b)
        ])),
        0
    );
    for name in ["p", "d", "gap", "memory_size"] {
        assert_eq!(column(&a, name), column(&b, name));
    }
}

#[test]
fn traces_are_reproducible_apart_from_timing() {
    let dir = tempfile::tempdir().unwrap();
    let strip = |p: &Path| -> Vec<String> {
        std::fs::read_to_string(p)
            .unwrap()
            .lines()
            .map(|l| l.rsplit_once(',').unwrap().0.to_string())
            .collect()
    };
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for path in [&a, &b] {
        assert_eq!(
            code(&bench(&[
                "solve",
                "--n",
                "30",
                "--seed",
                "11",
                "--algo",
                "lfcfw",
                "--trace",
                path_str(path)
            ])),
            0
        );
    }
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn exit_codes() {
    assert_eq!(code(&bench(&["solve", "--n", "10", "--max-iters", "2"])), 2);
    assert_eq!(code(&bench(&["solve", "--n", "0"])), 3);
    assert_eq!(code(&bench(&["solve", "--eps", "-1"])), 3);
    assert_eq!(code(&bench(&["solve", "--algo", "simplex"])), 3);
    assert_eq!(
        code(&bench(&[
            "solve",
            "--instance",
            "/nonexistent/instance.json"
        ])),
        3
    );
}
