//! Result tables, provenance, and the on-disk layout of a run directory.
//!
//! A study produces a [`ResultTable`]: one row per gate, each carrying the
//! statistic, its value, the tolerance it was judged against, and the
//! verdict. The table plus the canonical config and seed fully determine the
//! CSV bytes; wall-clock timestamps appear only in `meta.json`, never in the
//! tables, so re-running an identical (config, seed) pair yields
//! byte-identical CSVs.
//!
//! Layout written by [`write_outputs`]:
//!
//! ```text
//! {output_dir}/{study}/{unix_ts}/
//!     results.csv    gate rows, deterministic
//!     results.json   same rows plus provenance, deterministic
//!     meta.json      run metadata, holds the timestamp
//!     config.toml    canonical config copy
//!     *.csv          any study-specific plot data
//! ```

use std::borrow::Cow;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::harness::config::StudyKind;

/// One verdict row. `value` is the realized statistic, `tolerance` the bound
/// it was compared against; `pass` records the comparison that was actually
/// made (some gates are one-sided, some strict, some derived).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub label: String,
    pub statistic: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl ResultRow {
    /// Row that passes iff `value <= tolerance`, the common one-sided gate.
    pub fn gate(label: impl Into<String>, statistic: impl Into<String>, value: f64, tolerance: f64) -> Self {
        ResultRow {
            label: label.into(),
            statistic: statistic.into(),
            value,
            tolerance,
            pass: value <= tolerance,
        }
    }

    /// Row with an externally decided verdict, for gates that are not a
    /// plain one-sided comparison (strict decrease, two-sided bands).
    pub fn check(
        label: impl Into<String>,
        statistic: impl Into<String>,
        value: f64,
        tolerance: f64,
        pass: bool,
    ) -> Self {
        ResultRow { label: label.into(), statistic: statistic.into(), value, tolerance, pass }
    }
}

/// What a table was computed from: enough to reproduce it exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_sha256: String,
    pub seed: u64,
    pub version: String,
}

impl Provenance {
    pub fn new(config_sha256: impl Into<String>, seed: u64) -> Self {
        Provenance {
            config_sha256: config_sha256.into(),
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// A study's full verdict set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
    pub provenance: Provenance,
}

impl ResultTable {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    /// Deterministic CSV: header plus one line per row. Floats use the
    /// shortest round-trip form, so equal values always print equally.
    /// Provenance is carried by `results.json`, not the CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,statistic,value,tolerance,pass\n");
        for row in &self.rows {
            out.push_str(&csv_field(&row.label));
            out.push(',');
            out.push_str(&csv_field(&row.statistic));
            out.push(',');
            out.push_str(&row.value.to_string());
            out.push(',');
            out.push_str(&row.tolerance.to_string());
            out.push(',');
            out.push_str(if row.pass { "pass" } else { "fail" });
            out.push('\n');
        }
        out
    }
}

/// Quote a CSV field only when it needs it.
fn csv_field(s: &str) -> Cow<'_, str> {
    if s.contains([',', '"', '\n', '\r']) {
        Cow::Owned(format!("\"{}\"", s.replace('"', "\"\"")))
    } else {
        Cow::Borrowed(s)
    }
}

/// Hex SHA-256 of the canonical config text.
pub fn config_sha256(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    let mut hex = String::with_capacity(64);
    for byte in digest {
        hex.push_str(&format!("{byte:02x}"));
    }
    hex
}

/// Everything a study hands back: the verdict table and any plot-data CSVs
/// as (file name, contents) pairs.
#[derive(Debug, Clone)]
pub struct StudyOutput {
    pub table: ResultTable,
    pub plot_data: Vec<(String, String)>,
}

/// Run metadata. This is the only file that records wall-clock time.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunMeta {
    pub schema_version: u32,
    pub study: String,
    pub config_sha256: String,
    pub seed: u64,
    pub version: String,
    pub timestamp_unix: u64,
}

/// Write a run directory under `root/{study}/{unix_ts}/` and return its
/// path. If the second-resolution timestamp collides with an existing run, a
/// `-1`, `-2`, ... suffix disambiguates.
pub fn write_outputs(
    root: &Path,
    study: StudyKind,
    config_text: &str,
    out: &StudyOutput,
) -> Result<PathBuf> {
    let timestamp =
        SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let study_dir = root.join(study.name());
    fs::create_dir_all(&study_dir)?;

    let mut run_dir = study_dir.join(timestamp.to_string());
    let mut suffix = 0u32;
    while run_dir.exists() {
        suffix += 1;
        if suffix > 10_000 {
            return Err(Error::Config {
                message: format!("cannot allocate a run directory under {}", study_dir.display()),
            });
        }
        run_dir = study_dir.join(format!("{timestamp}-{suffix}"));
    }
    fs::create_dir(&run_dir)?;

    fs::write(run_dir.join("results.csv"), out.table.to_csv())?;
    let table_json = serde_json::to_string_pretty(&out.table)
        .map_err(|e| Error::Config { message: format!("result serialization: {e}") })?;
    fs::write(run_dir.join("results.json"), table_json)?;

    let meta = RunMeta {
        schema_version: 1,
        study: study.name().to_string(),
        config_sha256: out.table.provenance.config_sha256.clone(),
        seed: out.table.provenance.seed,
        version: out.table.provenance.version.clone(),
        timestamp_unix: timestamp,
    };
    let meta_json = serde_json::to_string_pretty(&meta)
        .map_err(|e| Error::Config { message: format!("meta serialization: {e}") })?;
    fs::write(run_dir.join("meta.json"), meta_json)?;

    fs::write(run_dir.join("config.toml"), config_text)?;

    for (name, contents) in &out.plot_data {
        fs::write(run_dir.join(name), contents)?;
    }

    Ok(run_dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_table() -> ResultTable {
        ResultTable {
            rows: vec![
                ResultRow::gate("ks t=1", "ks_distance", 0.0123, 0.05),
                ResultRow::check("decay 1024->4096", "error_ratio", 0.5, 1.0, true),
                ResultRow::gate("chi2", "chi_square", 31.5, 23.209251158954356),
            ],
            provenance: Provenance::new("deadbeef", 42),
        }
    }

    #[test]
    fn csv_is_frozen_and_deterministic() {
        let t = sample_table();
        let expect = "label,statistic,value,tolerance,pass\n\
                      ks t=1,ks_distance,0.0123,0.05,pass\n\
                      decay 1024->4096,error_ratio,0.5,1,pass\n\
                      chi2,chi_square,31.5,23.209251158954356,fail\n";
        assert_eq!(t.to_csv(), expect);
        assert_eq!(t.to_csv(), sample_table().to_csv());
        assert!(!t.all_pass());
    }

    #[test]
    fn csv_quotes_awkward_fields() {
        let t = ResultTable {
            rows: vec![ResultRow::gate("a,b", "say \"hi\"", 1.0, 2.0)],
            provenance: Provenance::new("x", 1),
        };
        assert_eq!(
            t.to_csv(),
            "label,statistic,value,tolerance,pass\n\"a,b\",\"say \"\"hi\"\"\",1,2,pass\n"
        );
    }

    #[test]
    fn sha256_matches_reference_vector() {
        // FIPS 180-2 test vector for the message "abc".
        assert_eq!(
            config_sha256("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
        assert_eq!(
            config_sha256(""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn table_json_round_trips() {
        let t = sample_table();
        let json = serde_json::to_string(&t).unwrap();
        let back: ResultTable = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn run_directory_layout() {
        let root =
            std::env::temp_dir().join(format!("fpd-report-test-{}", std::process::id()));
        let _ = fs::remove_dir_all(&root);

        let out = StudyOutput {
            table: sample_table(),
            plot_data: vec![("ecdf_t1.csv".into(), "x,f\n0,0.5\n".into())],
        };
        let dir1 = write_outputs(&root, StudyKind::CtrwMarginal, "seed = 42\n", &out).unwrap();
        let dir2 = write_outputs(&root, StudyKind::CtrwMarginal, "seed = 42\n", &out).unwrap();
        assert_ne!(dir1, dir2, "same-second runs must land in distinct directories");
        assert!(dir1.starts_with(root.join("ctrw_marginal")));

        for dir in [&dir1, &dir2] {
            assert_eq!(fs::read_to_string(dir.join("results.csv")).unwrap(), out.table.to_csv());
            assert_eq!(fs::read_to_string(dir.join("config.toml")).unwrap(), "seed = 42\n");
            assert_eq!(fs::read_to_string(dir.join("ecdf_t1.csv")).unwrap(), "x,f\n0,0.5\n");
            let meta: RunMeta =
                serde_json::from_str(&fs::read_to_string(dir.join("meta.json")).unwrap()).unwrap();
            assert_eq!(meta.study, "ctrw_marginal");
            assert_eq!(meta.seed, 42);
            assert_eq!(meta.config_sha256, "deadbeef");
            let table: ResultTable =
                serde_json::from_str(&fs::read_to_string(dir.join("results.json")).unwrap())
                    .unwrap();
            assert_eq!(table, out.table);
        }

        let _ = fs::remove_dir_all(&root);
    }
}
