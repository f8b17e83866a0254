//! File emission: CSV with a fixed number format, JSON, provenance sidecars.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use serde_json::json;

use crate::config::RunConfig;

/// 17 significant digits, `.` decimal, exponent form. Round-trips any f64.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Header plus rows; every line ends in `\n`.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(columns: &[&str]) -> Self {
        Csv {
            text: format!("{}\n", columns.join(",")),
        }
    }

    pub fn row(&mut self, cells: &[String]) {
        // writing to a String cannot fail
        let _ = writeln!(self.text, "{}", cells.join(","));
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".config.json");
    PathBuf::from(name)
}

/// `path` with `suffix` appended to the file name.
pub fn companion_path(out: &Path, suffix: &str) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

/// Writes `content` to `path` and the resolved config next to it.
pub fn write_with_sidecar(path: &Path, command: &str, cfg: &RunConfig, content: &str) -> anyhow::Result<()> {
    std::fs::write(path, content).with_context(|| format!("writing {}", path.display()))?;
    let meta = json!({ "command": command, "config": cfg, "version": env!("CARGO_PKG_VERSION") });
    let side = sidecar_path(path);
    std::fs::write(&side, format!("{}\n", serde_json::to_string_pretty(&meta)?))
        .with_context(|| format!("writing {}", side.display()))?;
    Ok(())
}

/// To `cfg.out` (plus sidecar) when set, otherwise to stdout.
pub fn emit(command: &str, cfg: &RunConfig, content: &str) -> anyhow::Result<()> {
    match &cfg.out {
        Some(p) => write_with_sidecar(p, command, cfg, content),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(content.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

pub fn pretty<T: Serialize>(value: &T) -> anyhow::Result<String> {
    Ok(format!("{}\n", serde_json::to_string_pretty(value)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format_round_trips() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, -0.0, 2.0_f64.sqrt()] {
            let s = num(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17);
        }
    }

    #[test]
    fn csv_lines_end_in_newline() {
        let mut c = Csv::new(&["a", "b"]);
        c.row(&[num(1.0), num(2.0)]);
        let t = c.into_string();
        assert_eq!(t.lines().count(), 2);
        assert!(t.ends_with('\n') && !t.contains('\r'));
    }

    #[test]
    fn sidecar_sits_next_to_output() {
        assert_eq!(sidecar_path(Path::new("/tmp/x.csv")), PathBuf::from("/tmp/x.csv.config.json"));
    }
}
