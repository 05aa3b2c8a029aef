use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_selberg"));
    c.env_remove("SOURCE_DATE_EPOCH");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn selberg")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().unwrap()
}

/// Data rows (no comments, no header) split into fields.
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

fn build_cache(dir: &Path, spec: &str, nmax: usize) -> PathBuf {
    let path = dir.join(format!("{}.cache", spec.replace([':', ','], "_")));
    ok(&["cache", "--spec", spec, "--nmax", &nmax.to_string(), "--out", path.to_str().unwrap()]);
    path
}

#[test]
fn help_lists_exit_codes() {
    let help = ok(&["--help"]);
    for k in 0..=9 {
        assert!(help.contains(&format!("\n  {k}  ")), "exit code {k} missing");
    }
    assert_eq!(code(&["eval", "--bogus"]), 2);
}

#[test]
fn cache_counts_and_determinism() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let out = run(&["cache", "--spec", "X:12,13,14", "--nmax", "9", "--out", a.to_str().unwrap()]);
    assert!(out.status.success());
    let counts: Vec<String> = String::from_utf8(out.stderr).unwrap().lines().skip(1).map(str::to_string).collect();
    assert_eq!(
        counts,
        ["1,4,2", "2,12,4", "3,28,6", "4,84,13", "5,244,22", "6,732,52", "7,2188,106", "8,6564,266", "9,19684,626"]
    );
    ok(&["cache", "--spec", "X:12,13,14", "--nmax", "9", "--out", b.to_str().unwrap()]);
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    assert!(String::from_utf8(ta).unwrap().starts_with("# manifest tool=selberg/"));
}

#[test]
fn guarded_failures_have_their_codes() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&["cache", "--spec", "Y:1,1,1.5", "--nmax", "3"]), 4);
    assert_eq!(code(&["cache", "--spec", "Z:1,2"]), 3);
    let cache = build_cache(dir.path(), "X:12,13,14", 6);
    let c = cache.to_str().unwrap();
    assert_eq!(code(&["eval", "--cache", c, "--s", "-1,0"]), 6);
    ok(&["eval", "--cache", c, "--s", "-1,0", "--force"]);
    assert_eq!(code(&["eval", "--cache", "/nonexistent/cache", "--s", "1"]), 9);
    assert_eq!(code(&["eval", "--cache", c, "--spec", "X:12,12,12", "--s", "1"]), 3);
    let list = dir.path().join("one.csv");
    std::fs::write(&list, "# coverage 0,0.2,0,10\nre,im,multiplicity,residual\n0.1,1,1,0\n").unwrap();
    let l = list.to_str().unwrap();
    assert_eq!(code(&["census", "weyl", "--resonances", l, "--strip", "0,0.2", "--t-max", "5", "--t-step", "1.5"]), 8);
}

#[test]
fn eval_real_and_at_delta() {
    let dir = TempDir::new().unwrap();
    let cache = build_cache(dir.path(), "X:12,13,14", 8);
    let c = cache.to_str().unwrap();
    let r = rows(&ok(&["eval", "--cache", c, "--s", "0.3"]));
    assert_eq!(num(&r[0][3]), 0.0);

    let d = rows(&ok(&["census", "delta", "--cache", c]));
    let delta = num(&d[0][0]);
    assert!((delta - 0.1068).abs() < 5e-4, "delta {delta}");
    assert!((num(&d[0][1]) - (1.0 - delta)).abs() < 1e-12);
    let r = rows(&ok(&["eval", "--cache", c, "--s", &d[0][0]]));
    assert!(num(&r[0][2]).hypot(num(&r[0][3])) < 1e-8);
}

#[test]
fn count_is_additive_and_empty_right_of_delta() {
    let dir = TempDir::new().unwrap();
    let cache = build_cache(dir.path(), "X:12,13,14", 8);
    let c = cache.to_str().unwrap();
    let rect = "0,0.1,0.5,20";
    let whole = rows(&ok(&["count", "--cache", c, "--rect", rect]));
    let quads = rows(&ok(&["count", "--cache", c, "--rect", rect, "--bins", "2,2"]));
    let sum: i64 = quads.iter().map(|r| r[6].parse::<i64>().unwrap()).sum();
    assert_eq!(sum, whole[0][6].parse::<i64>().unwrap());
    assert!(sum > 0);

    let gap = rows(&ok(&["count", "--cache", c, "--rect", "0.108,0.95,0,50", "--bins", "4,5"]));
    assert!(gap.iter().all(|r| r[6] == "0"));
}

#[test]
#[allow(clippy::approx_constant)]
fn locate_named_zero_and_mirror() {
    let dir = TempDir::new().unwrap();
    let cache = build_cache(dir.path(), "X:12,14,15", 8);
    let c = cache.to_str().unwrap();
    let up = rows(&ok(&["locate", "--cache", c, "--rect", "0.09,0.11,5,8"]));
    let near: Vec<&Vec<String>> = up.iter().filter(|r| (num(&r[1]) - 6.28).abs() < 5e-3).collect();
    assert_eq!(near.len(), 1);
    assert!((num(&near[0][0]) - 0.101816).abs() < 1e-5);
    assert_eq!(near[0][2], "1");

    let down = rows(&ok(&["locate", "--cache", c, "--rect", "0.09,0.11,-8,-5"]));
    assert_eq!(up.len(), down.len());
    for r in &up {
        let (re, im) = (num(&r[0]), num(&r[1]));
        assert!(down
            .iter()
            .any(|q| (num(&q[0]) - re).abs() < 1e-9 && (num(&q[1]) + im).abs() < 1e-9));
    }
}

#[test]
fn threads_and_reruns_do_not_change_bytes() {
    let dir = TempDir::new().unwrap();
    let cache = build_cache(dir.path(), "X:12,12,12", 8);
    let c = cache.to_str().unwrap();
    let args = ["locate", "--cache", c, "--rect", "-0.004,0.12,-0.004,6"];
    let one = ok(&[&["--threads", "1"], &args[..]].concat());
    let four = ok(&[&["--threads", "4"], &args[..]].concat());
    assert_eq!(one, four);
    assert_eq!(one, ok(&args));

    let stamped = bin().args(args).env("SOURCE_DATE_EPOCH", "1700000000").output().unwrap();
    let stamped = String::from_utf8(stamped.stdout).unwrap();
    assert!(stamped.lines().next().unwrap().ends_with(" timestamp=1700000000"));
    assert_eq!(stamped.split_once('\n').unwrap().1, one.split_once('\n').unwrap().1);
}

fn synthetic_power_law(dir: &Path) -> PathBuf {
    // N(t) = 2⌊0.7 t^1.1⌋, off-axis resonances counting twice
    let mut s = String::from("# coverage -0.5,1,-1,2001\nre,im,multiplicity,residual\n");
    let mut prev = 0u64;
    for t in 1..=2000u64 {
        let n = (0.7 * (t as f64).powf(1.1)).floor() as u64;
        for _ in prev..n {
            s.push_str(&format!("0.05,{},1,0\n", t as f64 - 0.5));
        }
        prev = n;
    }
    let path = dir.join("synthetic.csv");
    std::fs::write(&path, s).unwrap();
    path
}

#[test]
fn census_statistics_on_synthetic_list() {
    let dir = TempDir::new().unwrap();
    let list = synthetic_power_law(dir.path());
    let l = list.to_str().unwrap();
    let weyl = ok(&["census", "weyl", "--resonances", l, "--strip", "0,0.1", "--t-max", "2000", "--t-step", "20"]);
    let fit = weyl.lines().find(|x| x.starts_with("# fit")).unwrap();
    let exponent: f64 = fit.split_whitespace().find_map(|w| w.strip_prefix("exponent=")).unwrap().parse().unwrap();
    assert!((exponent - 1.1).abs() < 1e-2, "exponent {exponent}");

    let win = rows(&ok(&["census", "window", "--resonances", l, "--window", "10", "--t-max", "100"]));
    assert_eq!(win.len(), 101);
    let env = rows(&ok(&["census", "envelope", "--resonances", l, "--window", "10", "--t-max", "100"]));
    assert!(env.iter().skip(2).all(|r| num(&r[1]) == 0.05));

    let hist = rows(&ok(&["census", "hist", "--resonances", l, "--re-range", "0,0.1", "--im-range", "0,2000", "--bins", "10"]));
    assert_eq!(hist.len(), 10);

    let pgm = ok(&["census", "density", "--resonances", l, "--rect", "0,0.1,0,2000", "--bins", "4,8", "--pgm"]);
    let mut lines = pgm.lines();
    assert_eq!(lines.next(), Some("P2"));
    assert!(lines.next().unwrap().starts_with("# manifest"));
    assert_eq!(lines.next(), Some("4 8"));

    let gap = rows(&ok(&["census", "gap", "--resonances", l, "--delta", "0.1", "--im-max", "100"]));
    assert!((num(&gap[0][4]) - 0.05).abs() < 1e-12);
    let only = dir.path().join("only.csv");
    std::fs::write(&only, "# coverage 0,0.2,-1,10\nre,im,multiplicity,residual\n0.1,0,1,0\n").unwrap();
    let gap = rows(&ok(&["census", "gap", "--resonances", only.to_str().unwrap(), "--delta", "0.1", "--im-max", "10"]));
    assert_eq!(gap[0][4], "inf");

    let series = dir.path().join("weyl.csv");
    std::fs::write(&series, &weyl).unwrap();
    let svg = ok(&["plot", "--input", series.to_str().unwrap(), "--loglog"]);
    assert!(svg.starts_with("<!-- manifest"));
    assert!(svg.contains("<polyline"));
}
