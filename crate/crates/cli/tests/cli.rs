use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mfgmix::{MixtureModel, SimplexVector};

fn mfgmix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mfgmix"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Parses a printed `[a, b, ...]` list following `key `.
fn printed_list(text: &str, key: &str) -> Vec<f64> {
    let line = text
        .lines()
        .find(|l| l.starts_with(&format!("{key} ")))
        .unwrap();
    line[key.len() + 1..]
        .trim_matches(|c| c == '[' || c == ']' || c == ' ')
        .split(',')
        .map(|t| t.trim().parse().unwrap())
        .collect()
}

fn printed_scalar(text: &str, key: &str) -> f64 {
    let line = text
        .lines()
        .find(|l| l.starts_with(&format!("{key} ")))
        .unwrap();
    line[key.len() + 1..].trim().parse().unwrap()
}

/// Two well separated components on 4x4 images, written as a model file.
fn separated_model(dir: &Path) -> PathBuf {
    let mu = vec![
        (0..16).map(|d| if d % 4 < 2 { 0.9 } else { 0.05 }).collect(),
        (0..16).map(|d| if d % 4 < 2 { 0.05 } else { 0.9 }).collect(),
    ];
    let model = MixtureModel::bernoulli(SimplexVector::new(vec![0.4, 0.6]).unwrap(), &mu).unwrap();
    let path = dir.join("truth.mfgm");
    model.save(&path).unwrap();
    path
}

/// Synthesizes images and labels from the separated model.
fn synth_files(dir: &Path, n: usize) -> (PathBuf, PathBuf) {
    let model = separated_model(dir);
    let (img, lab) = (dir.join("x.idx.gz"), dir.join("y.idx"));
    let o = mfgmix(&[
        "synth", "--model", s(&model), "--N", &n.to_string(), "--seed", "3",
        "--out-images", s(&img), "--out-labels", s(&lab),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    (img, lab)
}

#[test]
fn solve_two_state_closed_form() {
    let o = mfgmix(&["solve", "--theta", "0.7,0.3", "--eps", "0"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let v = printed_list(&out, "V");
    assert!((v[0] + 0.2).abs() < 1e-12 && (v[1] - 0.2).abs() < 1e-12);
    assert!(printed_scalar(&out, "lambda").abs() < 1e-12);
    let pi = printed_list(&out, "pi");
    assert!((pi[0] - 0.7).abs() < 1e-12 && (pi[1] - 0.3).abs() < 1e-12);
}

#[test]
fn solve_symmetric_and_general_states() {
    let out = stdout(&mfgmix(&["solve", "--theta", "0.5,0.5", "--eps", "0.05"]));
    for (v, p) in printed_list(&out, "V").iter().zip(printed_list(&out, "pi")) {
        assert!(v.abs() < 1e-12 && (p - 0.5).abs() < 1e-12);
    }
    let out = stdout(&mfgmix(&["solve", "--theta", "0.2,0.3,0.5", "--eps", "0"]));
    let theta = [0.2, 0.3, 0.5];
    for (i, (v, p)) in printed_list(&out, "V").iter().zip(printed_list(&out, "pi")).enumerate() {
        assert!((v - (1.0 / 3.0 - theta[i])).abs() < 1e-12);
        assert!((p - theta[i]).abs() < 1e-12);
    }
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(mfgmix(&["solve", "--theta", "0.7,0.2"]).status.code(), Some(2));
    assert_eq!(mfgmix(&["solve", "--theta", "a,b"]).status.code(), Some(2));
    assert_eq!(
        mfgmix(&["fit", "--images", "x", "--K", "0", "--out", "m"]).status.code(),
        Some(2)
    );
    assert_eq!(mfgmix(&["fit", "--bogus"]).status.code(), Some(2));
    assert_eq!(mfgmix(&["solve", "--theta", "1", "--threads", "0"]).status.code(), Some(2));
}

#[test]
fn synth_is_deterministic_and_handles_empty_output() {
    let dir = tempfile::tempdir().unwrap();
    let model = separated_model(dir.path());
    let run = |name: &str, n: &str| {
        let (i, l) = (dir.path().join(format!("{name}.idx")), dir.path().join(format!("{name}.lab")));
        let o = mfgmix(&[
            "synth", "--model", s(&model), "--N", n, "--seed", "9",
            "--out-images", s(&i), "--out-labels", s(&l),
        ]);
        assert!(o.status.success());
        (fs::read(i).unwrap(), fs::read(l).unwrap())
    };
    assert_eq!(run("a", "50"), run("b", "50"));
    let (img, lab) = run("empty", "0");
    assert_eq!(img.len(), 16);
    assert_eq!(lab.len(), 8);
    let back = mfgmix::ingest::parse_idx_images(&img).unwrap();
    assert_eq!((back.count, back.rows, back.cols), (0, 4, 4));

    let odd = MixtureModel::bernoulli(SimplexVector::uniform(1), &[vec![0.5; 5]]).unwrap();
    let odd_path = dir.path().join("odd.mfgm");
    odd.save(&odd_path).unwrap();
    let o = mfgmix(&[
        "synth", "--model", s(&odd_path), "--N", "3",
        "--out-images", s(&dir.path().join("o.idx")),
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn fit_then_eval_recovers_clusters() {
    let dir = tempfile::tempdir().unwrap();
    let (img, lab) = synth_files(dir.path(), 600);
    let model = dir.path().join("fit.mfgm");
    let o = mfgmix(&[
        "fit", "--images", s(&img), "--labels", s(&lab), "--classes", "0,1",
        "--K", "2", "--seed", "1", "--out", s(&model),
        "--trace", s(&dir.path().join("trace.csv")),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(trace.starts_with("iteration,theta_residual,loglik\n1,inf,"));

    let h = dir.path().join("h.csv");
    let o = mfgmix(&[
        "eval", "--model", s(&model), "--images", s(&img), "--labels", s(&lab),
        "--classes", "0,1", "--out-h", s(&h),
    ]);
    assert!(o.status.success());
    assert!(printed_scalar(&stdout(&o), "diagonal_mean") > 0.99);
    assert!(fs::read_to_string(h).unwrap().starts_with("class,cluster_0,cluster_1\n0,"));

    let o = mfgmix(&[
        "eval", "--model", s(&model), "--images", s(&img), "--labels", s(&lab),
        "--classes", "0",
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn identical_runs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let (img, lab) = synth_files(dir.path(), 300);
    let run = |name: &str, threads: &str| {
        let out = dir.path().join(format!("{name}.mfgm"));
        let trace = dir.path().join(format!("{name}.csv"));
        let o = mfgmix(&[
            "fit", "--images", s(&img), "--labels", s(&lab), "--K", "2", "--seed", "5",
            "--threads", threads, "--out", s(&out), "--trace", s(&trace),
        ]);
        assert!(o.status.success());
        (fs::read(out).unwrap(), fs::read(trace).unwrap())
    };
    let a = run("a", "1");
    assert_eq!(a, run("b", "1"));
    assert_eq!(a, run("c", "3"));
}

#[test]
fn manifest_replays_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let (img, lab) = synth_files(dir.path(), 300);
    let first = dir.path().join("first.mfgm");
    let o = mfgmix(&[
        "fit", "--images", s(&img), "--labels", s(&lab), "--K", "2", "--eps", "0.1",
        "--seed", "8", "--out", s(&first),
    ]);
    assert!(o.status.success());
    let manifest = dir.path().join("first.mfgm.manifest");
    let text = fs::read_to_string(&manifest).unwrap();
    assert!(text.contains("eps=0.1\n") && text.contains("digest.model="));

    let replay = dir.path().join("replay.mfgm");
    let o = mfgmix(&["fit", "--config", s(&manifest), "--out", s(&replay)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read(first).unwrap(), fs::read(replay).unwrap());
}

#[test]
fn baseline_and_mean_field_agree_without_entropy() {
    let dir = tempfile::tempdir().unwrap();
    let (img, lab) = synth_files(dir.path(), 400);
    let fit = |name: &str, baseline: bool| {
        let out = dir.path().join(name);
        let mut args = vec![
            "fit", "--images", s(&img), "--labels", s(&lab), "--K", "2", "--eps", "0",
            "--seed", "2", "--out", s(&out),
        ];
        if baseline {
            args.push("--baseline");
        }
        assert!(mfgmix(&args).status.success());
        MixtureModel::load(out).unwrap()
    };
    let (a, b) = (fit("mfg.mfgm", false), fit("em.mfgm", true));
    let worst = a
        .components()
        .iter()
        .zip(b.components())
        .flat_map(|(p, q)| p.iter().zip(q.iter()).map(|(x, y)| (x - y).abs()))
        .chain(a.weights().iter().zip(b.weights().iter()).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max);
    assert!(worst <= 1e-8, "{worst}");
}

#[test]
fn export_pgm_and_not_square() {
    let dir = tempfile::tempdir().unwrap();
    let grey = MixtureModel::bernoulli(SimplexVector::uniform(2), &[vec![0.5; 784], vec![0.5; 784]])
        .unwrap();
    let path = dir.path().join("grey.mfgm");
    grey.save(&path).unwrap();
    let out = dir.path().join("img");
    assert!(mfgmix(&["export", "--model", s(&path), "--side", "28", "--out-dir", s(&out)])
        .status
        .success());
    for k in 0..2 {
        let bytes = fs::read(out.join(format!("component_{k}.pgm"))).unwrap();
        let (w, h, px) = mfgmix::report::parse_pgm(&bytes).unwrap();
        assert_eq!((w, h), (28, 28));
        assert!(px.iter().all(|&p| p == 128));
    }
    let o = mfgmix(&["export", "--model", s(&path), "--side", "27", "--out-dir", s(&out)]);
    assert_eq!(o.status.code(), Some(3));
}
