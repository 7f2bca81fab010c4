use std::path::PathBuf;
use std::process::{Command, Output};

fn prefdist(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prefdist"))
        .args(args)
        .env_remove("PREFDIST_SEED")
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = prefdist(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    stdout(&out)
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("prefdist-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

const CASEBASE: &str = "\
outcomes: a, b, c, d, e
# two cases share one order
alice | order | a < b < c < d < e
bob | order | e < d < c < b < a
carol | order | b < a < c < e < d
dave | utility | 0, 1, 2, 3, 4
";

fn casebase() -> PathBuf {
    let path = scratch("cases.txt");
    std::fs::write(&path, CASEBASE).unwrap();
    path
}

#[test]
fn complete_order_distances() {
    assert_eq!(ok(&["dist", "--metric", "probabilistic", "B<M<P", "M<P<B"]), "0.666667\n");
    assert_eq!(ok(&["dist", "--metric", "footrule", "a<b", "a<b"]), "0\n");
    assert_eq!(ok(&["dist", "--metric", "euclidean", "B<M<P", "M<P<B"]), "2.44949\n");
    assert_eq!(ok(&["dist", "--metric", "euclidean", "--normalized", "B<M<P", "M<P<B"]), "0.866025\n");
}

#[test]
fn utility_distances() {
    let out = ok(&["dist", "--utility", "0,1,2", "0,2,1", "--samples", "100000", "--seed", "7"]);
    let value: f64 = out.split_whitespace().next().unwrap().parse().unwrap();
    assert!((value - 1.0 / 3.0).abs() < 0.01, "{out}");
    assert!(out.contains("k=100000, seed=7"));
    assert_eq!(ok(&["dist", "--utility", "--metric", "euclidean", "0,1,2", "1,3,4"]), "0.166667\n");
    assert_eq!(ok(&["dist", "--utility", "--metric", "footrule", "u(a)=0, u(b)=1, u(c)=2", "u(c)=4, u(b)=3, u(a)=1"]), "0.083333\n");
    let out = prefdist(&["dist", "--utility", "0,1,2", "0,1"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn partial_order_distances() {
    // average over the two extensions of the V-poset against one of them
    let avg = ok(&["dist", "--metric", "footrule", "a<c; b<c", "a<b<c"]);
    assert_eq!(avg, "0.5\n");
    let ext = ok(&["dist", "--measure", "extreme", "--metric", "footrule", "a<c; b<c", "a<b<c"]);
    assert!(ext.starts_with("[0, 1]\n"), "{ext}");
    let gen = ok(&["dist", "--measure", "generalized", "--metric", "euclidean", "", "a<b<c", "--outcomes", "a,b,c"]);
    assert_eq!(gen, "1.414214\n");
    let csv = ok(&["dist", "--format", "csv", "a<c; b<c", "a<b<c"]);
    assert!(csv.starts_with("metric,method,value,k,variance,interval_low,interval_high,seed\n"));
}

#[test]
fn linear_extensions() {
    assert_eq!(ok(&["linext", "count", "a<c; b<c"]), "2\n");
    assert_eq!(ok(&["linext", "count", "", "--outcomes", "a,b,c"]), "6\n");
    assert_eq!(ok(&["linext", "heights", "a<c; b<c"]), "a=1.5 b=1.5 c=3\n");
    assert_eq!(ok(&["linext", "enumerate", "a<c; b<c"]), "a < b < c\nb < a < c\n");
    let draws = ok(&["linext", "sample", "a<c; b<c", "--draws", "20", "--seed", "3"]);
    assert_eq!(draws.lines().count(), 20);
    assert!(draws.lines().all(|l| l == "a < b < c" || l == "b < a < c"));
    assert_eq!(draws, ok(&["linext", "sample", "a<c; b<c", "--draws", "20", "--seed", "3"]));
    let labels = "--outcomes=a,b,c,d,e,f,g,h,i,j,k";
    assert_eq!(prefdist(&["linext", "enumerate", "", labels]).status.code(), Some(4));
}

#[test]
fn parse_errors_exit_2() {
    assert_eq!(prefdist(&["dist", "a<<b", "a<b"]).status.code(), Some(2));
    assert_eq!(prefdist(&["linext", "count", "a<b; b<a"]).status.code(), Some(2));
    assert_eq!(prefdist(&["dist", "@/nonexistent/file", "a<b"]).status.code(), Some(2));
    assert_eq!(prefdist(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn file_inputs() {
    let path = scratch("order.txt");
    std::fs::write(&path, "M < P < B\n").unwrap();
    let arg = format!("@{}", path.display());
    assert_eq!(ok(&["dist", "B<M<P", &arg]), "0.666667\n");
}

#[test]
fn nearest_ranks_the_case_base() {
    let cb = casebase();
    let cb = cb.to_str().unwrap();
    let out = ok(&["nearest", "--casebase", cb, "--elicited", "a<b; b<c; c<d", "--samples", "500"]);
    let first: Vec<&str> = out.lines().next().unwrap().split_whitespace().collect();
    assert_eq!(first[0], "1");
    assert!(first[1] == "alice" || first[1] == "dave");
    assert!(out.ends_with("closest: alice, dave\n"), "{out}");
}

#[test]
fn elicitation_sessions() {
    let cb = casebase();
    let cb = cb.to_str().unwrap();
    let out = ok(&["elicit", "--casebase", cb, "--target", "carol", "--format", "csv", "--samples", "500"]);
    let mut lines = out.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("step,query_a,query_b,answer,alice_value,alice_low,alice_high"));
    assert!(header.ends_with("alice_closest,bob_closest,carol_closest,dave_closest"));
    assert!(out.ends_with("# final closest: carol\n"), "{out}");
    let empty = ok(&["elicit", "--casebase", cb, "--target", "bob", "--budget", "0", "--format", "csv"]);
    assert!(empty.ends_with("# final closest: alice, bob, carol, dave\n"));
    let by_order = ok(&["elicit", "--casebase", cb, "--target", "e < d < c < b < a", "--samples", "500"]);
    assert!(by_order.ends_with("final closest: bob\n"), "{by_order}");
    assert_eq!(prefdist(&["elicit", "--casebase", cb, "--target", "nobody"]).status.code(), Some(5));
    let missing = prefdist(&["elicit", "--casebase", "/nonexistent/cases", "--target", "x"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("cannot read case base"));
}

#[test]
fn output_files_carry_a_manifest() {
    let path = scratch("out.csv");
    let p = path.to_str().unwrap();
    let args = ["linext", "sample", "a<c; b<c", "--draws", "5", "--seed", "9", "--output", p];
    assert_eq!(ok(&args), "");
    let text = std::fs::read_to_string(&path).unwrap();
    let (manifest, body): (Vec<&str>, Vec<&str>) = text.lines().partition(|l| l.starts_with("# "));
    assert!(manifest[0].starts_with("# command: prefdist linext sample"));
    assert!(manifest.iter().any(|l| l.starts_with("# seed: 9")));
    assert!(manifest.last().unwrap().starts_with("# elapsed_ms:"));
    assert_eq!(body.len(), 5);
    ok(&args);
    let again = std::fs::read_to_string(&path).unwrap();
    let strip = |t: &str| t.lines().filter(|l| !l.starts_with("# elapsed_ms")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(&again), strip(&text));

    // failures leave no file behind
    let bad = scratch("bad.csv");
    let out = prefdist(&["linext", "count", "a<b; b<a", "--output", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!bad.exists());
}

#[test]
fn seed_environment_and_workers() {
    let args = ["dist", "--utility", "0,1,2,5", "0,3,1,2", "--samples", "20000"];
    let with_flag = ok(&[&args[..], &["--seed", "42"]].concat());
    let with_env = Command::new(env!("CARGO_BIN_EXE_prefdist")).args(args).env("PREFDIST_SEED", "42").output().unwrap();
    assert_eq!(stdout(&with_env), with_flag);
    let one = ok(&[&["--workers", "1"], &args[..], &["--seed", "42"]].concat());
    let four = ok(&[&["--workers", "4"], &args[..], &["--seed", "42"]].concat());
    assert_eq!(one, with_flag);
    assert_eq!(four, with_flag);
}

#[test]
fn verify_reports_each_check() {
    let out = prefdist(&["verify", "--suite", "example1", "--suite", "sizing"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("[PASS] example1: footrule(X,Y) (expected 2.000000"));
    assert!(text.lines().last().unwrap().ends_with("failed"));
    assert_eq!(prefdist(&["verify", "--suite", "nope"]).status.code(), Some(2));
}
