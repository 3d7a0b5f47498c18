//! Acceptance suite: every release-gating property at full volume, one
//! test per criterion. Each test prints a PASS line (visible with
//! `cargo test -- --nocapture`) and enforces the expected wall-clock
//! budget.

use std::process::Command;
use std::time::{Duration, Instant};

use multibudget::verify::{self, SweepSummary};
use multibudget::Limits;

fn run_checked(
    label: &str,
    budget: Duration,
    sweep: impl FnOnce(&Limits) -> multibudget::Result<SweepSummary>,
) {
    let limits = Limits::default();
    let started = Instant::now();
    let summary = sweep(&limits).expect(label);
    let elapsed = started.elapsed();
    assert!(
        summary.passed(),
        "{label}: {} failures: {:?}",
        summary.failures.len(),
        summary.failures
    );
    assert!(
        elapsed <= budget,
        "{label}: took {elapsed:?}, budget {budget:?}"
    );
    println!(
        "{label}: PASS ({} cases, {} checks, {elapsed:?})",
        summary.cases, summary.checks
    );
}

/// 200 random matroid instances (uniform, partition, graphic, linear;
/// m <= 12, k in 1..=3): every certified LP vertex has at most
/// `2 * (tight budget rows)` fractional components summing to at most the
/// tight-row count.
#[test]
fn criterion_1_vertex_near_integrality() {
    run_checked(
        "criterion 1 (theorem4 sweep)",
        Duration::from_secs(120),
        |limits| verify::theorem4_sweep(200, limits),
    );
}

/// 30 instances (m <= 10, k <= 2, eps in {1/2, 1/3}): the matroid scheme
/// is feasible and within `(1 - eps)` of brute force.
#[test]
fn criterion_2_matroid_scheme_approximation() {
    run_checked(
        "criterion 2 (corollary5 sweep)",
        Duration::from_secs(300),
        |limits| verify::corollary5_sweep(30, limits),
    );
}

/// 500 random polygonal curves (<= 20 segments): the intersection search
/// hits `mu f(0) + (1 - mu) f(tau)` exactly and rotation preserves
/// endpoints.
#[test]
fn criterion_3_curve_intersection() {
    run_checked(
        "criterion 3 (lemma7 sweep)",
        Duration::from_secs(60),
        |limits| verify::lemma7_sweep(500, limits),
    );
}

/// 100 seeded 2-budget matching instances (n <= 10): interpolated
/// almost-matchings are valid at every integer arc, and every patch
/// satisfies both exact bounds.
#[test]
fn criterion_4_patching_bounds() {
    run_checked(
        "criterion 4 (lemma11 sweep)",
        Duration::from_secs(300),
        |limits| verify::lemma11_sweep(100, limits),
    );
}

/// 50 instances (n <= 10, eps in {1, 1/2}): the 2-budgeted matching scheme
/// is feasible and within `(1 - eps)` of brute force.
#[test]
fn criterion_5_matching_scheme_approximation() {
    run_checked(
        "criterion 5 (theorem6 sweep)",
        Duration::from_secs(600),
        |limits| verify::theorem6_sweep(50, limits),
    );
}

/// Feasibilization: strictly feasible output under the exact and the
/// maximally violating solver, `(1 - eps)`-optimal with the exact oracle,
/// and the greedy-discard bound over 500 trials.
#[test]
fn criterion_6_feasibilization() {
    run_checked(
        "criterion 6 (theorem2 sweep)",
        Duration::from_secs(300),
        |limits| verify::theorem2_sweep(24, 500, limits),
    );
}

/// 50 subset-sum gadgets with q <= 4 cycles: instance feasibility matches
/// the subset-sum oracle, and every enumerated solution takes per-cycle
/// length 0 or alpha.
#[test]
fn criterion_7_gadget_frontier() {
    run_checked(
        "criterion 7 (gadget sweep)",
        Duration::from_secs(120),
        |limits| verify::gadget_sweep(50, limits),
    );
}

fn run_cli(args: &[&str]) -> (String, String, Option<i32>) {
    let out = Command::new(env!("CARGO_BIN_EXE_multibudget"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        String::from_utf8(out.stdout).expect("utf8 stdout"),
        String::from_utf8(out.stderr).expect("utf8 stderr"),
        out.status.code(),
    )
}

/// Identical flags and seeds produce byte-identical stdout and files
/// across repeated command invocations.
#[test]
fn criterion_8_command_determinism() {
    let started = Instant::now();
    let dir = std::env::temp_dir().join(format!("multibudget-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    let path_a = dir.join("a.json");
    let path_b = dir.join("b.json");

    let gen_cases: &[&[&str]] = &[
        &["gen", "--kind", "graphic", "--m", "9", "--k", "2", "--seed", "5"],
        &["gen", "--kind", "matching", "--m", "8", "--k", "2", "--seed", "9", "--nodes", "7"],
        &[
            "gen",
            "--kind",
            "partition-gadget",
            "--partition-alphas",
            "1,2,3",
            "--target",
            "3",
        ],
    ];
    for case in gen_cases {
        let mut with_a: Vec<&str> = case.to_vec();
        let a_str = path_a.to_str().unwrap();
        let b_str = path_b.to_str().unwrap();
        with_a.extend(["--out", a_str]);
        let mut with_b: Vec<&str> = case.to_vec();
        with_b.extend(["--out", b_str]);
        let (out_a, _, code_a) = run_cli(&with_a);
        let (out_b, _, code_b) = run_cli(&with_b);
        assert_eq!(code_a, Some(0), "gen failed: {case:?}");
        assert_eq!(code_b, Some(0));
        // stdout differs only in the path; compare files and digests
        let bytes_a = std::fs::read(&path_a).unwrap();
        let bytes_b = std::fs::read(&path_b).unwrap();
        assert_eq!(bytes_a, bytes_b, "file bytes differ for {case:?}");
        let digest = |s: &str| {
            s.split("\"digest\":\"")
                .nth(1)
                .and_then(|rest| rest.split('"').next())
                .map(str::to_string)
        };
        assert_eq!(digest(&out_a), digest(&out_b));
        let (rerun_a, _, _) = run_cli(&with_a);
        assert_eq!(out_a, rerun_a, "gen stdout changed across reruns");
    }

    let solve_cases: &[&[&str]] = &[
        &["--alg", "brute", "--oracle"],
        &["--alg", "matroid-ptas", "--eps", "1/2", "--oracle"],
        &["--alg", "feasibilize", "--eps", "1/2", "--oracle"],
    ];
    let (_, _, code) = run_cli(&[
        "gen", "--kind", "graphic", "--m", "8", "--k", "2", "--seed", "31", "--out",
        path_a.to_str().unwrap(),
    ]);
    assert_eq!(code, Some(0));
    for case in solve_cases {
        let mut args = vec!["solve", "--input", path_a.to_str().unwrap()];
        args.extend_from_slice(case);
        let (out1, err1, code1) = run_cli(&args);
        let (out2, _, code2) = run_cli(&args);
        assert_eq!(code1, Some(0), "solve failed: {case:?}: {err1}");
        assert_eq!(code2, Some(0));
        assert_eq!(out1, out2, "solve stdout changed across reruns: {case:?}");
    }

    // matching solver determinism, including parallel guess evaluation
    let (_, _, code) = run_cli(&[
        "gen", "--kind", "matching", "--m", "9", "--k", "2", "--seed", "13", "--nodes", "7",
        "--out", path_b.to_str().unwrap(),
    ]);
    assert_eq!(code, Some(0));
    let args = [
        "solve",
        "--input",
        path_b.to_str().unwrap(),
        "--alg",
        "matching-ptas",
        "--eps",
        "1",
        "--oracle",
    ];
    let (out1, _, code1) = run_cli(&args);
    let mut parallel = args.to_vec();
    parallel.extend(["--jobs", "4"]);
    let (out2, _, code2) = run_cli(&parallel);
    assert_eq!(code1, Some(0));
    assert_eq!(code2, Some(0));
    assert_eq!(out1, out2, "parallel matching run diverged");

    let verify_args = ["verify", "--suite", "lemma7", "--seeds", "50"];
    let (v1, _, vc1) = run_cli(&verify_args);
    let (v2, _, vc2) = run_cli(&verify_args);
    assert_eq!(vc1, Some(0));
    assert_eq!(vc2, Some(0));
    assert_eq!(v1, v2, "verify stdout changed across reruns");

    std::fs::remove_dir_all(&dir).ok();
    println!(
        "criterion 8 (command determinism): PASS ({:?})",
        started.elapsed()
    );
}
