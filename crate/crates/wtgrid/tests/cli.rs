//! End-to-end checks of the command-line front-end: exit codes, output
//! formats, and the dynamic op-script replay.

use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wtgrid"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn wtgrid")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

const SAMPLE: &str = "# four weighted points\n10\t30\t5\n25\t12\t2\n40\t5\t7\n60\t20\t2\n";

fn build_sample(dir: &std::path::Path) -> String {
    let pts = dir.join("pts.tsv");
    std::fs::write(&pts, SAMPLE).unwrap();
    let idx = dir.join("idx.bin");
    let out = run(&[
        "build",
        pts.to_str().unwrap(),
        "-o",
        idx.to_str().unwrap(),
        "--t",
        "1",
        "--ell",
        "2",
        "--alpha",
        "0.4",
    ]);
    assert!(out.status.success(), "build failed: {out:?}");
    idx.to_str().unwrap().to_owned()
}

#[test]
fn query_formats_and_sample_answers() {
    let dir = tempfile::tempdir().unwrap();
    let idx = build_sample(dir.path());
    let cases: [(&[&str], &str); 8] = [
        (&["count", "--rect", "full"], "4\n"),
        (&["succ", "--w", "3", "--rect", "full"], "5\n"),
        (&["pred", "--w", "1", "--rect", "full"], "none\n"),
        (&["quantile", "--k", "3", "--rect", "full"], "5\n"),
        (&["countvr", "--w0", "2", "--w1", "5", "--rect", "full"], "3\n"),
        (&["majority", "--rect", "full"], "2\t2\n"),
        (&["avg", "--rect", "full"], "4\n"),
        (&["var", "--rect", "full"], "9/2\n"),
    ];
    for (args, want) in cases {
        let mut full = vec!["query", idx.as_str()];
        full.extend_from_slice(args);
        let out = run(&full);
        assert!(out.status.success(), "{args:?}: {out:?}");
        assert_eq!(stdout(&out), want, "args {args:?}");
    }
    // Point lists come out as x<TAB>y<TAB>w lines.
    let out = run(&["query", &idx, "report", "--rect", "0", "0", "30", "30"]);
    assert_eq!(stdout(&out), "10\t30\t5\n25\t12\t2\n");
    // `avg` of an empty window is the literal `undefined`.
    let out = run(&["query", &idx, "avg", "--rect", "0", "0", "0", "0"]);
    assert_eq!(stdout(&out), "undefined\n");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let idx = build_sample(dir.path());
    // Usage error: quantile with k = 0.
    let out = run(&["query", &idx, "quantile", "--k", "0", "--rect", "full"]);
    assert_eq!(out.status.code(), Some(1));
    // Usage error: unknown flag.
    let out = run(&["query", &idx, "count", "--bogus"]);
    assert_eq!(out.status.code(), Some(1));
    // Data error: missing index file.
    let out = run(&["query", dir.path().join("nope.bin").to_str().unwrap(), "count", "--rect", "full"]);
    assert_eq!(out.status.code(), Some(2));
    // Data error: malformed points file reports the line number.
    let bad = dir.path().join("bad.tsv");
    std::fs::write(&bad, "1\t2\t3\nbogus line\n").unwrap();
    let out = run(&["build", bad.to_str().unwrap(), "-o", dir.path().join("x.bin").to_str().unwrap(), "--t", "1", "--ell", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    // Verification mismatch via the fault-injection hook.
    let out = run(&["verify", "--iterations", "1", "--n", "64", "--seed", "7", "--inject-fault"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn build_is_deterministic_and_verify_report_is_stable() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("pts.tsv");
    std::fs::write(&pts, SAMPLE).unwrap();
    let (a, b) = (dir.path().join("a.bin"), dir.path().join("b.bin"));
    for out in [&a, &b] {
        let st = run(&["build", pts.to_str().unwrap(), "-o", out.to_str().unwrap(), "--t", "2", "--ell", "4"]);
        assert!(st.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let r1 = run(&["verify", "--iterations", "2", "--seed", "9"]);
    let r2 = run(&["verify", "--iterations", "2", "--seed", "9"]);
    assert!(r1.status.success());
    assert_eq!(r1.stdout, r2.stdout);
}

#[test]
fn dynamic_script_replay() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("ops.txt");
    std::fs::write(
        &script,
        "# exercise every op\n\
         ins 3 4 9\nins 3 4 9\nins 7 1 2\n\
         qry count full\nqry sum full\nqry quantile 2 full\n\
         qry majority 0.4 full\n\
         del 3 4\nqry count full\n\
         upd 7 1 5\nqry report 0 0 10 10\n\
         qry succ 6 full\nqry pred 1 full\nqry min full\n",
    )
    .unwrap();
    let out = run(&["dyn", script.to_str().unwrap(), "--U", "16", "--W", "16"]);
    assert!(out.status.success(), "{out:?}");
    assert_eq!(
        stdout(&out),
        "3\n20\n9\n9:2\n2\n3,4,9;7,1,5\n9\nnone\n7,1,5\n"
    );
    // Script errors carry the line number and exit 2.
    std::fs::write(&script, "ins 1 2 3\ndel 9 9\n").unwrap();
    let out = run(&["dyn", script.to_str().unwrap(), "--U", "16", "--W", "16"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn stats_reports_sections() {
    let dir = tempfile::tempdir().unwrap();
    let idx = build_sample(dir.path());
    let out = run(&["stats", &idx]);
    assert!(out.status.success());
    let text = stdout(&out);
    for section in ["grid.permutation", "stats.minmax", "valuewt", "majority"] {
        assert!(text.contains(section), "missing {section} in:\n{text}");
    }
    // Empty input: the report must not divide by zero.
    let pts = dir.path().join("empty.tsv");
    std::fs::write(&pts, "# nothing\n").unwrap();
    let empty = dir.path().join("empty.bin");
    let st = run(&["build", pts.to_str().unwrap(), "-o", empty.to_str().unwrap(), "--t", "1", "--ell", "2"]);
    assert!(st.status.success());
    let out = run(&["stats", empty.to_str().unwrap()]);
    assert!(out.status.success());
    let out = run(&["query", empty.to_str().unwrap(), "count", "--rect", "full"]);
    assert_eq!(stdout(&out), "0\n");
}
