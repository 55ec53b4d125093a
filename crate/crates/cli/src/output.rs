//! CSV tables and run manifests.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Fixed-format float rendering: plain decimals in a moderate range,
/// scientific notation elsewhere. Both forms round-trip exactly.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e6).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub struct Table {
    columns: Vec<(&'static str, &'static str)>,
    rows: Vec<Vec<String>>,
}

impl Table {
    /// Columns as `(name, unit)`; use an empty unit for dimensionless ones.
    pub fn new(columns: &[(&'static str, &'static str)]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn render(&self, hash: &str) -> String {
        let units: Vec<String> = self
            .columns
            .iter()
            .map(|(n, u)| format!("{n}={}", if u.is_empty() { "1" } else { u }))
            .collect();
        let mut s = format!("# manifest_sha256={hash}\n# units: {}\n", units.join("; "));
        let names: Vec<&str> = self.columns.iter().map(|(n, _)| *n).collect();
        s.push_str(&names.join(","));
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub params: Value,
    pub seed: u64,
    pub version: String,
    pub hash: String,
    pub outputs: Vec<PathBuf>,
    pub wall_time_s: f64,
}

/// Digest of everything that determines the output: subcommand, parameters,
/// seed and toolkit version (not paths, job count or timing).
pub fn manifest_hash(subcommand: &str, params: &Value, seed: u64) -> String {
    let key = serde_json::json!({
        "subcommand": subcommand,
        "params": params,
        "seed": seed,
        "version": env!("CARGO_PKG_VERSION"),
    });
    let digest = Sha256::digest(key.to_string().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes to `path`, or stdout when absent.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(p, text)?;
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

/// Default manifest location next to an output file.
pub fn manifest_path_for(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format_round_trips() {
        for v in [0.0, 1.5, 1e-12, 123456789.0, -3.25e-7, 0.001] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(num(1e-12), "1e-12");
        assert_eq!(num(0.25), "0.25");
    }

    proptest::proptest! {
        #[test]
        fn any_finite_number_round_trips(bits in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            let s = num(bits);
            proptest::prop_assert_eq!(s.parse::<f64>().unwrap(), bits);
            proptest::prop_assert!(!s.contains(','));
        }
    }

    #[test]
    fn table_layout() {
        let mut t = Table::new(&[("d", ""), ("tau", "1/E")]);
        t.push(vec!["4".into(), "1.5".into()]);
        let s = t.render("abc");
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "# manifest_sha256=abc");
        assert_eq!(lines[1], "# units: d=1; tau=1/E");
        assert_eq!(lines[2], "d,tau");
        assert_eq!(lines[3], "4,1.5");
    }

    #[test]
    fn hash_ignores_nothing_relevant() {
        let p = serde_json::json!({"a": 1});
        let q = serde_json::json!({"a": 2});
        assert_ne!(manifest_hash("x", &p, 0), manifest_hash("x", &q, 0));
        assert_ne!(manifest_hash("x", &p, 0), manifest_hash("x", &p, 1));
        assert_eq!(manifest_hash("x", &p, 0), manifest_hash("x", &p, 0));
    }
}
