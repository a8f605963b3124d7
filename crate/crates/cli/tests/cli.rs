use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn sttlp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sttlp")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch_dir(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("sttlp-cli-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    d
}

#[test]
fn verify_counterexample_reports_gap() {
    let o = sttlp(&["verify-counterexample"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.starts_with("# format\tsttlp-report/1\n# config\t"));
    for line in [
        "lp_value\t59/2",
        "stt_best\t30",
        "gap\t60/59\t1.0169",
        "d\t(2,2,9/2,2,2,3/2,1/2)",
        "feasibility\tPASS",
        "vertex\tPASS",
    ] {
        assert!(s.lines().any(|l| l == line), "missing {line:?} in\n{s}");
    }
}

#[test]
fn small_commands() {
    let s = stdout(&sttlp(&["stts", "--topology", "U_7_3"]));
    assert!(s.ends_with("topology\tstts\nU_7_3\t662\n"), "{s}");
    let s = stdout(&sttlp(&["solve", "--topology", "U_3_0", "--weights", "3,1,2"]));
    assert!(s.ends_with("value\tD\tunique\n4\t(0,2,1)\ttrue\n"), "{s}");
    let s = stdout(&sttlp(&["solve", "--topology", "path-3", "--weights", "3,1,2", "--model", "dual"]));
    assert!(s.ends_with("dual\t4\n"), "{s}");
    let o = sttlp(&["dual", "--topology", "U_3_0", "--weights", "3,1,2"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("4\t4\t4\ttrue\ttrue\n"));
    let s = stdout(&sttlp(&["catalog"]));
    assert_eq!(s.lines().filter(|l| l.starts_with("U_")).count(), 47);
}

#[test]
fn vertices_of_path3() {
    let s = stdout(&sttlp(&["vertices", "--topology", "path-3"]));
    let body: Vec<&str> = s.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body.len(), 1 + 9);
    assert!(body[0].starts_with("X1_2\t"));
}

#[test]
fn outputs_are_reproducible() {
    let args = ["sample", "--topology", "path-6", "--directions", "xd", "--count", "40", "--seed", "5"];
    let a = sttlp(&args);
    let b = sttlp(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = sttlp(&[&args[..], &["--jobs", "1"]].concat());
    // only the recorded config differs
    let strip = |o: &Output| stdout(o).lines().filter(|l| !l.starts_with("# config")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(&a), strip(&c));
}

#[test]
fn out_dir_gets_a_copy() {
    let dir = scratch_dir("out");
    let o = sttlp(&["stts", "--topology", "U_5_2", "--format", "json", "--out", dir.to_str().unwrap()]);
    assert!(o.status.success());
    let saved = fs::read(dir.join("stts.json")).unwrap();
    assert_eq!(saved, o.stdout);
    let s = String::from_utf8(saved).unwrap();
    assert!(s.contains("\"format\": \"sttlp-report/1\""));
    assert!(s.contains("\"stts\": \"65\""));
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| sttlp(args).status.code().unwrap();
    assert_eq!(code(&["stts"]), 2);
    assert_eq!(code(&["stts", "--topology", "U_9_9"]), 2);
    assert_eq!(code(&["solve", "--topology", "U_3_0", "--weights", "1,2"]), 2);
    assert_eq!(code(&["solve", "--topology", "U_3_0", "--weights", "1,x,2"]), 2);
    assert_eq!(code(&["solve", "--topology", "U_3_0", "--weights", "1,-1,2"]), 2);
    assert_eq!(code(&["no-such-command"]), 2);
    assert_eq!(code(&["stts", "--topology", "U_3_0", "--jobs", "0"]), 2);

    let dir = scratch_dir("edges");
    fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("cycle.txt");
    fs::write(&bad, "3\n1 2\n2 3\n3 1\n").unwrap();
    assert_eq!(code(&["stts", "--edges", bad.to_str().unwrap()]), 2);
    let good = dir.join("path.txt");
    fs::write(&good, "3\n1 2\n2 3\n").unwrap();
    let o = sttlp(&["stts", "--edges", good.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).ends_with("\t5\n"));
    fs::remove_dir_all(dir).unwrap();
}
