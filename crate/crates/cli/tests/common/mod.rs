#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn pdcal(args: &[&str]) -> Run {
    let o = Command::new(env!("CARGO_BIN_EXE_pdcal"))
        .args(args)
        .output()
        .expect("pdcal runs");
    Run {
        code: o.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&o.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&o.stderr).into_owned(),
    }
}

pub fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

/// Low-gain scan through a structured truth; `extra` is appended verbatim.
pub fn low_gain(extra: &str) -> String {
    format!(
        r#"seed = 7

[gain]
regime = "spontaneous"
gain_reference = 1e-3

[truth]
alpha = 0.42
shape = "structured"
edge_nm = 740.0

[calibration]
cutoff = 1.0

[paths]
bundle = "low"
out = "relative"
{extra}"#
    )
}

/// High-gain scan at G = 5 with α = 0.42 and no noise.
pub fn high_gain(bundle: &str, extra: &str) -> String {
    format!(
        r#"seed = 7

[gain]
regime = "high-gain"
gain_reference = 5.0

[truth]
alpha = 0.42
shape = "structured"
edge_nm = 740.0

[calibration]
cutoff = 1.0
sensitivity = false

[paths]
bundle = "{bundle}"
out = "absolute"
{extra}"#
    )
}

/// Every file under `dir` with its bytes.
pub fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

pub fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}
