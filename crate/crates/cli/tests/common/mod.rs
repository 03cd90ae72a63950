#![allow(dead_code)]

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ssp_core::synthetic::{PlantedTopicKg, PlantedTopicSpec};
use ssp_core::Split;

pub fn ssp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ssp"))
        .args(args)
        .output()
        .expect("spawn ssp")
}

/// Runs `ssp` and panics with its stderr unless it exits 0.
pub fn ssp_ok(args: &[&str]) -> String {
    let out = ssp(args);
    assert!(
        out.status.success(),
        "ssp {} failed:\n{}",
        args.join(" "),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

pub struct Fixture {
    pub train: PathBuf,
    pub valid: PathBuf,
    pub test: PathBuf,
    pub desc: PathBuf,
    pub kg: PlantedTopicKg,
}

/// Writes a planted-topic graph as raw TSV inputs under `dir`.
pub fn write_planted(dir: &Path, spec: &PlantedTopicSpec) -> Fixture {
    fs::create_dir_all(dir).unwrap();
    let kg = spec.generate();
    let mut files = [String::new(), String::new(), String::new()];
    for (split, h, r, t) in &kg.triples {
        let k = Split::ALL.iter().position(|s| s == split).unwrap();
        let _ = writeln!(files[k], "{h}\t{r}\t{t}");
    }
    let paths = Split::ALL.map(|s| dir.join(format!("{}.txt", s.name())));
    for (path, text) in paths.iter().zip(&files) {
        fs::write(path, text).unwrap();
    }
    let desc: String = kg.descriptions.iter().map(|(n, d)| format!("{n}\t{d}\n")).collect();
    let desc_path = dir.join("descriptions.txt");
    fs::write(&desc_path, desc).unwrap();
    let [train, valid, test] = paths;
    Fixture {
        train,
        valid,
        test,
        desc: desc_path,
        kg,
    }
}

pub fn small_spec() -> PlantedTopicSpec {
    PlantedTopicSpec {
        entities: 60,
        clusters: 4,
        words_per_topic: 4,
        noise_words: 6,
        description_len: 40,
        noise_degree: 2,
        with_valid: true,
        seed: 11,
        ..Default::default()
    }
}

pub const SMALL_CONFIG: &str = "dim = 8\nrate = 0.01\nmargin = 1.0\nlambda = 0.5\nrounds = 12\n\
min_count = 1\nnmf_epochs = 20\nnmf_rate = 0.01\ncheckpoint_every = 5\nclass_epochs = 100\nfold_in_epochs = 50\n";

pub fn prep(fx: &Fixture, out: &Path) -> String {
    ssp_ok(&[
        "prep",
        "--train",
        p(&fx.train),
        "--valid",
        p(&fx.valid),
        "--test",
        p(&fx.test),
        "--desc",
        p(&fx.desc),
        "--min-count",
        "1",
        "--out",
        p(out),
    ])
}

pub fn train(prepared: &Path, config: &Path, model: &str, out: &Path) -> String {
    ssp_ok(&[
        "train",
        "--prepared",
        p(prepared),
        "--config",
        p(config),
        "--model",
        model,
        "--out",
        p(out),
    ])
}

/// Reads a `metric,target,setting,value` report into a lookup.
pub fn report_value(csv: &str, metric: &str, target: &str, setting: &str) -> f64 {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').collect::<Vec<_>>())
        .find(|f| f[0] == metric && f[1] == target && f[2] == setting)
        .unwrap_or_else(|| panic!("no {metric},{target},{setting} in\n{csv}"))[3]
        .parse()
        .unwrap()
}

/// Byte contents of every file under `dir`, keyed by relative path.
pub fn tree_bytes(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let path = e.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push((path.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}
