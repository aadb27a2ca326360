#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
    pub elapsed: Duration,
}

pub fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}

/// Run the binary from the workspace root.
pub fn tunav<S: AsRef<std::ffi::OsStr>>(args: &[S]) -> Run {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_tunav")).args(args).current_dir(root()).output().unwrap();
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
        elapsed: start.elapsed(),
    }
}

/// Corpus files relative to the workspace root, sorted.
pub fn corpus() -> Vec<String> {
    let mut v: Vec<String> = std::fs::read_dir(root().join("corpus"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "tv"))
        .map(|p| format!("corpus/{}", p.file_name().unwrap().to_string_lossy()))
        .collect();
    v.sort();
    v
}

pub fn args(fixed: &[&str], files: &[String]) -> Vec<String> {
    fixed.iter().map(|s| s.to_string()).chain(files.iter().cloned()).collect()
}

/// `(function, status word)` for each report line.
pub fn statuses(stdout: &str) -> Vec<(String, String)> {
    stdout
        .lines()
        .filter_map(|l| {
            let mut w = l.split_whitespace();
            let s = w.next()?;
            matches!(s, "PASS" | "FAIL" | "UNKNOWN").then(|| (w.next().unwrap().to_string(), s.to_string()))
        })
        .collect()
}

pub const PROPERTY_GROUPS: [&str; 4] = [
    "prelude::seq::group_seq_properties",
    "prelude::set::group_set_properties",
    "prelude::map::group_map_properties",
    "prelude::multiset::group_multiset_properties",
];
