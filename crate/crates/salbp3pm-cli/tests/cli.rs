//! End-to-end tests driving the compiled binary.

use std::path::Path;
use std::process::{Command, Output};

use salbp3pm::corpus;
use salbp3pm::instance::{parse_instance, write_native, InstanceFormat};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_salbp3pm"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is UTF-8")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is UTF-8")
}

fn write_example(dir: &Path) -> String {
    let path = dir.join("example.txt");
    std::fs::write(&path, write_native(&corpus::worked_example())).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn solve_reports_the_optimum_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_example(dir.path());
    let out = run(&["solve", &path]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let text = stdout_of(&out);
    assert!(text.contains("status         optimal"), "got:\n{text}");
    assert!(text.contains("peak           9"), "got:\n{text}");
    assert!(text.contains("closing unsat  yes"), "got:\n{text}");
}

#[test]
fn solve_emits_machine_readable_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_example(dir.path());
    let out = run(&["solve", &path, "--json", "--method", "compact-pb"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(v["instance"], "example");
    assert_eq!(v["method"], "compact-pb");
    assert_eq!(v["status"], "optimal");
    assert_eq!(v["peak"], 9);
    assert_eq!(v["bounds"]["lower"], 9);
    assert_eq!(v["bounds"]["upper"], 16);
    assert_eq!(v["closing_unsat"], true);
    assert!(v["solution"]["assignment"].as_array().unwrap().len() == 5);
}

#[test]
fn every_method_flag_reaches_the_same_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_example(dir.path());
    for method in [
        "baseline-blocking",
        "compact-blocking",
        "compact-pb",
        "compact-maxsat",
        "compact-incremental",
    ] {
        let out = run(&["solve", &path, "--json", "--method", method]);
        assert_eq!(out.status.code(), Some(0), "{method} stderr: {}", stderr_of(&out));
        let v: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
        assert_eq!(v["peak"], 9, "{method}");
        assert_eq!(v["status"], "optimal", "{method}");
    }
}

#[test]
fn infeasible_and_unknown_get_their_own_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let tight = dir.path().join("tight.txt");
    std::fs::write(&tight, "2 1 3\n3 3\n4 4\n-1 -1\n").unwrap();
    let out = run(&["solve", tight.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "stderr: {}", stderr_of(&out));

    // Feasible but given no time: the driver must stop with the question open.
    let slow = dir.path().join("slow.txt");
    std::fs::write(
        &slow,
        "12 3 10\n2 2 2 2 2 2 2 2 2 2 2 2\n1 2 3 4 5 6 7 8 9 10 1 2\n-1 -1\n",
    )
    .unwrap();
    let out = run(&["solve", slow.to_str().unwrap(), "--timeout", "0"]);
    assert_eq!(out.status.code(), Some(4), "stderr: {}", stderr_of(&out));
}

#[test]
fn usage_errors_keep_the_conventional_code() {
    let out = run(&["solve"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["solve", "/nonexistent/instance.txt"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("error"));
}

#[test]
fn encode_writes_dimacs_with_a_consistent_header() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_example(dir.path());
    let out = run(&["encode", &path, "--encoder", "baseline"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let text = stdout_of(&out);
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    let fields: Vec<&str> = header.split_whitespace().collect();
    assert_eq!(&fields[..2], &["p", "cnf"]);
    let clauses: usize = fields[3].parse().unwrap();
    assert_eq!(lines.filter(|l| l.ends_with(" 0")).count(), clauses);
    // The summary on stderr names the clause families.
    let summary = stderr_of(&out);
    assert!(summary.contains("station-amo"), "got:\n{summary}");
    assert!(summary.contains("station-precedence"), "got:\n{summary}");
}

#[test]
fn wcnf_output_is_byte_stable_and_matches_the_library() {
    use salbp3pm::cnf::{wcnf_string, WcnfDialect};
    use salbp3pm::encode::{encode, peak::peak_layer_binary, EncodeOptions, EncoderKind};
    use salbp3pm::instance::analytic_bounds;

    let dir = tempfile::tempdir().unwrap();
    let path = write_example(dir.path());
    let first = run(&["encode", &path, "--wcnf"]);
    assert_eq!(first.status.code(), Some(0), "stderr: {}", stderr_of(&first));
    let again = run(&["encode", &path, "--wcnf"]);
    assert_eq!(first.stdout, again.stdout, "two invocations, same bytes");

    // Same weighted formula the library builds over the analytic bounds.
    let inst = corpus::worked_example();
    let bounds = analytic_bounds(&inst).unwrap();
    let mut enc = encode(&inst, EncoderKind::Compact, EncodeOptions::default()).unwrap();
    let wcnf = peak_layer_binary(&mut enc, bounds.lower, bounds.upper).unwrap();
    assert_eq!(stdout_of(&first), wcnf_string(&wcnf, WcnfDialect::Classic));
    let header = stdout_of(&first).lines().next().unwrap().to_string();
    assert!(header.starts_with("p wcnf "), "got: {header}");

    // The 2022 dialect drops the header and prefixes hard clauses with `h`.
    let new = run(&["encode", &path, "--wcnf", "--wcnf-dialect", "new"]);
    assert_eq!(new.status.code(), Some(0));
    let text = stdout_of(&new);
    assert!(text.lines().next().unwrap().starts_with("h "), "got:\n{text}");
    assert_eq!(text, wcnf_string(&wcnf, WcnfDialect::New2022));
    // Dialect choice is meaningless without --wcnf.
    let bad = run(&["encode", &path, "--wcnf-dialect", "new"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn compact_encoding_is_smaller_than_baseline_here() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_example(dir.path());
    let count = |encoder: &str| {
        let out = run(&["encode", &path, "--encoder", encoder]);
        assert_eq!(out.status.code(), Some(0));
        let text = stdout_of(&out);
        let header = text.lines().next().unwrap().to_string();
        header.split_whitespace().nth(3).unwrap().parse::<usize>().unwrap()
    };
    assert!(count("compact") < count("baseline"));
}

#[test]
fn generated_example_round_trips_through_the_parser() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("example.txt");
    let out = run(&["generate", "example", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let parsed = parse_instance(&text, InstanceFormat::Native).unwrap();
    let mut expected = corpus::worked_example();
    expected.name = parsed.name.clone(); // parser does not trust comments for the name
    assert_eq!(parsed, expected);
}

#[test]
fn generated_family_files_match_the_builtin_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["generate", "families", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    for inst in corpus::family_instances() {
        let path = dir.path().join(format!("{}.txt", inst.name));
        let text = std::fs::read_to_string(&path).unwrap();
        let mut parsed = parse_instance(&text, InstanceFormat::Native).unwrap();
        parsed.name = inst.name.clone();
        assert_eq!(parsed, inst);
    }
}

#[test]
fn oracle_and_solver_agree_on_a_generated_instance() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("random.txt");
    let out = run(&[
        "generate", "random", "--tasks", "5", "--stations", "3", "--cycle", "8",
        "--seed", "1", "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let solve = run(&["solve", path.to_str().unwrap(), "--json"]);
    let oracle = run(&["oracle", path.to_str().unwrap(), "--json"]);
    assert_eq!(solve.status.code(), Some(0));
    assert_eq!(oracle.status.code(), Some(0));
    let s: serde_json::Value = serde_json::from_str(&stdout_of(&solve)).unwrap();
    let o: serde_json::Value = serde_json::from_str(&stdout_of(&oracle)).unwrap();
    assert_eq!(s["peak"], o["peak"]);
    assert_eq!(s["status"], "optimal");
}

#[test]
fn bench_renders_one_csv_row_per_instance_method_pair() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_example(dir.path());
    let out = run(&[
        "bench", &path, "--methods", "compact-incremental,baseline-blocking",
        "--report", "csv",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let text = stdout_of(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "instance,tasks,stations,cycle,edges,closed_edges,method,backend,status,peak,proved,\
         lower,upper,iterations,solve_calls,conflicts,vars,clauses,wall_s,note"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.starts_with("example,5,3,7,4,6,")));
    assert!(rows.iter().all(|r| r.contains(",optimal,9,true,9,16,")));
}

#[test]
fn bench_expands_directories_and_records_timeouts_as_rows() {
    let dir = tempfile::tempdir().unwrap();
    // Two feasible instances; a zero budget leaves both questions open.
    for name in ["a.txt", "b.txt"] {
        std::fs::write(
            dir.path().join(name),
            "12 3 10\n2 2 2 2 2 2 2 2 2 2 2 2\n1 2 3 4 5 6 7 8 9 10 1 2\n-1 -1\n",
        )
        .unwrap();
    }
    std::fs::write(dir.path().join("notes.md"), "not an instance").unwrap();
    let out = run(&[
        "bench", dir.path().to_str().unwrap(), "--methods", "compact-incremental",
        "--timeout", "0", "--report", "csv",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let text = stdout_of(&out);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 2, "one row per .txt file:\n{text}");
    assert!(rows[0].starts_with("a,12,3,10,"));
    assert!(rows[1].starts_with("b,12,3,10,"));
    // Every cell timed out: status unknown, no peak, no proof.
    assert!(rows.iter().all(|r| r.contains(",unknown,,false,")), "got:\n{text}");
    // The summary credits zero optimal runs and zero solved time.
    let out = run(&[
        "bench", dir.path().to_str().unwrap(), "--methods", "compact-incremental",
        "--timeout", "0",
    ]);
    let md = stdout_of(&out);
    assert!(md.contains("| compact-incremental | 2 | 0 | 0 | 0 | 2 | 0 | 0.000 |"), "got:\n{md}");
}

#[test]
fn maxsat_command_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_example(dir.path());
    // A solver that stalls forever: the run must fall back to the warm-up
    // incumbent and report it without an optimality claim.
    let out = bin()
        .args(["solve", &path, "--method", "compact-maxsat", "--json"])
        .args(["--init-iterations", "1", "--timeout", "2"])
        .env("SALBP3PM_MAXSAT_CMD", "sh -c 'exec sleep 30'")
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(v["status"], "feasible");
    assert_eq!(v["closing_unsat"], false);
    assert!(v["peak"].as_u64().is_some());
}

#[test]
fn garbage_from_an_external_solver_is_a_hard_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_example(dir.path());
    let out = run(&[
        "solve", &path, "--method", "compact-maxsat", "--init-iterations", "1",
        "--maxsat-cmd", "sh -c 'echo garbage'",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("error"), "got: {}", stderr_of(&out));
}

#[test]
fn alb_inputs_need_explicit_line_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tiny.alb");
    std::fs::write(&path, "3\n2\n3\n2\n1,2\n2,3\n-1,-1\n").unwrap();
    let missing = run(&["solve", path.to_str().unwrap(), "--format", "alb"]);
    assert_eq!(missing.status.code(), Some(1));
    let out = run(&[
        "solve", path.to_str().unwrap(), "--format", "alb",
        "--stations", "2", "--cycle", "5", "--power-range", "2:6", "--seed", "3",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    assert!(stdout_of(&out).contains("status         optimal"));
}
