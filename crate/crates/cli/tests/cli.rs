use std::io::Write;
use std::process::{Command, Output, Stdio};

const EXAMPLE: &str = "p sp 4 6\na 1 2 2\na 2 3 1\na 3 1 1\na 1 3 5\na 3 4 2\na 4 1 3\n";
const TRIANGLE: &str = "p sp 3 3\na 1 2 4\na 2 3 1\na 3 1 2\n";

fn balsp(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_balsp"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn sssp_example() {
    let o = balsp(&["sssp", "-", "-s", "1", "--check"], EXAMPLE);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "0 2 3 5\nmismatches: 0 max deviation: 0\n");
}

#[test]
fn sssp_json() {
    let o = balsp(&["sssp", "-", "-s", "2", "--format", "json"], EXAMPLE);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["distances"], serde_json::json!([2, 0, 1, 3]));
}

#[test]
fn balance_triangle() {
    let o = balsp(&["balance", "-", "--level", "full"], TRIANGLE);
    assert!(o.status.success());
    assert!(
        stdout(&o).contains("balanced: true, xi: 3"),
        "{}",
        stdout(&o)
    );
    let o = balsp(&["balance", "-", "--rho", "1", "--level", "full"], TRIANGLE);
    assert!(
        stdout(&o).contains("balanced: true, xi: 2"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn uniform_cycle_takes_one_iteration() {
    let o = balsp(
        &["balance", "-", "--format", "json", "--level", "full"],
        "p sp 3 3\na 1 2 7\na 2 3 7\na 3 1 7\n",
    );
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["check"]["balanced"], true);
    assert_eq!(v["stats"]["iterations"], 1);
    for p in v["potential"].as_array().unwrap() {
        assert!(p["den"].as_i64().unwrap() > 0);
    }
}

#[test]
fn balance_json_is_deterministic() {
    let g = stdout(&balsp(
        &[
            "generate",
            "--family",
            "multiscale",
            "-n",
            "40",
            "-m",
            "160",
            "--seed",
            "3",
        ],
        "",
    ));
    let a = balsp(&["balance", "-", "--format", "json"], &g);
    let b = balsp(&["balance", "-", "--format", "json"], &g);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn apsp_marks_unreachable() {
    let o = balsp(&["apsp", "-", "--check"], "p sp 3 1\na 1 2 5\n");
    assert!(o.status.success());
    assert_eq!(
        stdout(&o),
        "0 5 inf\ninf 0 inf\ninf inf 0\nmismatches: 0 max deviation: 0\n"
    );
    let o = balsp(&["apsp", "-", "--stream", "--format", "json"], TRIANGLE);
    let rows: Vec<serde_json::Value> = stdout(&o)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(rows[1]["distances"], serde_json::json!([3, 0, 1]));
}

#[test]
fn ingest_warnings_and_errors() {
    let o = balsp(
        &["sssp", "-", "-s", "1"],
        "p sp 2 3\na 1 2 5\na 1 2 4\na 2 1 1\n",
    );
    assert!(o.status.success());
    assert_eq!(stdout(&o), "0 4\n");
    assert!(stderr(&o).contains("parallel arc 1->2"));
    let o = balsp(&["sssp", "-", "-s", "1"], "p sp 2 1\na 1 3 5\n");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
    let o = balsp(&["sssp", "-", "-s", "9"], TRIANGLE);
    assert_eq!(o.status.code(), Some(2));
    let o = balsp(&["sssp", "-", "-s", "1", "--rho", "1"], TRIANGLE);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_on_seeded_graphs() {
    for seed in 0..100 {
        let family = [
            "strongly-connected",
            "arbitrary",
            "multiscale",
            "clustered",
            "bounded-degree",
        ][seed % 5];
        let n = (5 + seed * 3).to_string();
        let g = stdout(&balsp(
            &[
                "generate",
                "--family",
                family,
                "-n",
                &n,
                "-m",
                "120",
                "--seed",
                &seed.to_string(),
            ],
            "",
        ));
        let o = balsp(&["sssp", "-", "-s", "1", "--check"], &g);
        assert!(o.status.success(), "seed {seed}: {}", stderr(&o));
        assert!(stdout(&o).ends_with("mismatches: 0 max deviation: 0\n"));
    }
}

#[test]
fn verify_passes_and_catches_faults() {
    let o = balsp(&["verify"], "");
    assert!(o.status.success(), "{}", stdout(&o));
    let o = balsp(&["verify", "-", "--inject-fault"], TRIANGLE);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL balance"));
    assert!(stdout(&o).contains("witness arc"));
}

#[test]
fn generate_round_trips() {
    let g = stdout(&balsp(
        &["generate", "-n", "30", "-m", "90", "--seed", "5"],
        "",
    ));
    let parsed = balsp::io::parse_dimacs(&g).unwrap();
    assert_eq!(balsp::io::write_dimacs(&parsed.graph), g);
}
