use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn lrscat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lrscat"))
        .args(args)
        .output()
        .expect("failed to launch lrscat")
}

fn tmp_file(name: &str, content: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    fs::write(&path, content).unwrap();
    path
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

const HEADER: &str =
    "ak,method,re_rl,im_rl,re_rr,im_rr,re_t,im_t,abs2_rl,abs2_rr,abs2_t,det_drift,err_est,error";

#[test]
fn usage_errors_exit_one() {
    assert_eq!(lrscat(&[]).status.code(), Some(1));
    assert_eq!(lrscat(&["frobnicate"]).status.code(), Some(1));
    let cfg = tmp_file("usage.ini", "[potential]\nfamily = zero\n");
    let out = lrscat(&["--format", "json", "sweep", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("csv"));
    assert_eq!(lrscat(&["sweep", "/nonexistent/sweep.ini"]).status.code(), Some(1));
    assert_eq!(lrscat(&["--help"]).status.code(), Some(0));
}

#[test]
fn zero_sweep_round_trips() {
    let cfg = tmp_file(
        "zero.ini",
        "[potential]\nfamily = zero\n\n[sweep]\nak = 1:4:4\n\n[methods]\nuse = ode,pert0\n",
    );
    let out = lrscat(&["sweep", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(HEADER));
    let mut rows = 0;
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 14, "bad row `{line}`");
        let abs2_t: f64 = fields[10].parse().unwrap();
        assert!((abs2_t - 1.0).abs() < 1e-10);
        assert!(fields[13].is_empty(), "unexpected error in `{line}`");
        rows += 1;
    }
    assert_eq!(rows, 8);
    assert!(stderr(&out).contains("rows: 8 (0 failed)"));
}

#[test]
fn output_is_deterministic_across_thread_counts() {
    let cfg = tmp_file(
        "det.ini",
        "[potential]\nfamily = coulomb-like\ng_over_a = -5\nz = star\n\n\
         [sweep]\nak = 5:40:8\n\n[methods]\nuse = exact,pert0,pert1\n",
    );
    let one = lrscat(&["--threads", "1", "sweep", cfg.to_str().unwrap()]);
    let four = lrscat(&["--threads", "4", "sweep", cfg.to_str().unwrap()]);
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(four.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout, "CSV must be byte-identical");
    let again = lrscat(&["--threads", "4", "sweep", cfg.to_str().unwrap()]);
    assert_eq!(four.stdout, again.stdout);
}

#[test]
fn compare_gates_on_the_configured_tolerance() {
    let cfg = tmp_file(
        "gate.ini",
        "[potential]\nfamily = coulomb-like\ng_over_a = -5\nz = star\n\n\
         [sweep]\nak = 5:10:3\n\n[methods]\nuse = exact,pert0\n",
    );
    let tight = lrscat(&["--tol", "1e-6", "compare", cfg.to_str().unwrap()]);
    assert_eq!(tight.status.code(), Some(3), "stderr: {}", stderr(&tight));
    assert!(stderr(&tight).contains("tolerance exceeded"));
    let loose = lrscat(&["--tol", "10", "compare", cfg.to_str().unwrap()]);
    assert_eq!(loose.status.code(), Some(0));
    // without a configured tolerance compare only reports
    let report = lrscat(&["compare", cfg.to_str().unwrap()]);
    assert_eq!(report.status.code(), Some(0));
    assert!(stderr(&report).contains("exact vs pert0"));
}

#[test]
fn compare_needs_two_methods() {
    let cfg = tmp_file(
        "single.ini",
        "[potential]\nfamily = zero\n\n[sweep]\nak = 1:2:2\n\n[methods]\nuse = ode\n",
    );
    let out = lrscat(&["compare", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("at least two methods"));
}

#[test]
fn fig2_preset_hits_the_known_transmission_value() {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let out_path = dir.join("fig2_preset.csv");
    let out = lrscat(&["preset", "fig2", "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = fs::read_to_string(&out_path).unwrap();
    let row = text
        .lines()
        .find(|l| l.starts_with("5,exact,"))
        .expect("missing ak=5 exact row");
    let fields: Vec<&str> = row.split(',').collect();
    let abs2_t: f64 = fields[10].parse().unwrap();
    assert!((abs2_t - 0.9070294784580499).abs() < 1e-6, "got {abs2_t}");
    // summary goes to stdout when the CSV goes to a file
    assert!(stdout(&out).contains("exact vs pert0"));
    assert_eq!(lrscat(&["preset", "fig3"]).status.code(), Some(1));
}

#[test]
fn support_edge_compare_reports_the_error_law_slope() {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let out_path = dir.join("edge.csv");
    let cfg = tmp_file(
        "edge.ini",
        &format!(
            "[potential]\nfamily = coulomb-like\ng = -5\nz = star\n\n\
             [sweep]\nak = 10:160:12\nspacing = log\nvary = a\nk = 5\n\n\
             [methods]\nuse = exact,pert0\n\n[output]\npath = {}\n",
            out_path.to_str().unwrap()
        ),
    );
    let out = lrscat(&["compare", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let summary = stdout(&out);
    let slope_part = summary
        .split("log-log slope ")
        .nth(1)
        .expect("summary should contain a slope fit");
    let slope: f64 = slope_part
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .expect("slope should be numeric");
    assert!((slope + 1.0).abs() < 0.3, "slope {slope}");
}

#[test]
fn invalid_config_lists_every_problem() {
    let cfg = tmp_file(
        "broken.ini",
        "[potential]\nfamily = coulomb-like\nz = 5-1j\n\n[sweep]\nak = 5:1:3\n\n\
         [methods]\nuse = exact\n",
    );
    let out = lrscat(&["sweep", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("problem(s)"), "{err}");
    assert!(err.matches("\n  - ").count() >= 3, "{err}");
}

#[test]
fn selftest_passes() {
    let out = lrscat(&["selftest"]);
    assert_eq!(out.status.code(), Some(0), "output: {}", stdout(&out));
    assert!(stdout(&out).lines().all(|l| l.starts_with("ok   - ")));
}
