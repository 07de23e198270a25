//! CSV artifacts with `#` header lines, and the experiment config they are
//! keyed by.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A declarative experiment description, read from a `key = value` file.
/// Unset fields fall back to per-experiment defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<String>,
    pub model: Option<String>,
    pub detector: Option<String>,
    pub seed: u64,
    pub trials: Option<usize>,
    pub n: Vec<usize>,
    pub lambda: Option<f64>,
    pub lambdas: Vec<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub p_tilde: Option<f64>,
    pub eps: Option<f64>,
    pub prior: Option<String>,
    pub noise: Option<String>,
    pub group: Option<String>,
    pub freqs: Vec<usize>,
    pub threshold: Option<f64>,
    #[serde(rename = "L")]
    pub l: Vec<usize>,
    pub alpha_points: Option<usize>,
    pub lambda_star: Option<f64>,
    pub log_c: Option<f64>,
    /// Not part of the config hash.
    pub output_dir: Option<PathBuf>,
    pub csv: bool,
    pub svg: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: None,
            model: None,
            detector: None,
            seed: 0,
            trials: None,
            n: Vec::new(),
            lambda: None,
            lambdas: Vec::new(),
            beta: None,
            gamma: None,
            p_tilde: None,
            eps: None,
            prior: None,
            noise: None,
            group: None,
            freqs: Vec::new(),
            threshold: None,
            l: Vec::new(),
            alpha_points: None,
            lambda_star: None,
            log_c: None,
            output_dir: None,
            csv: true,
            svg: false,
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON form,
    /// ignoring the output directory.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = None;
        let json = serde_json::to_string(&c).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    pub fn header(&self) -> CsvHeader {
        CsvHeader {
            config_hash: self.hash(),
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvHeader {
    pub config_hash: String,
    pub seed: u64,
}

impl CsvHeader {
    fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "# tool: spiked {VERSION}")?;
        writeln!(w, "# config_hash: {}", self.config_hash)?;
        writeln!(w, "# seed: {}", self.seed)
    }
}

/// Formats a float with the shortest round-trip representation; infinities
/// as `inf`/`-inf`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x}")
    }
}

/// Writes a CSV table preceded by the `#` header lines; rows are
/// RFC-4180 quoted by the csv writer, with CRLF line endings.
pub fn write_csv<P: AsRef<Path>>(path: P, header: &CsvHeader, columns: &[&str], rows: &[Vec<String>]) -> Result<PathBuf> {
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut buf = Vec::new();
    header.write_to(&mut buf)?;
    {
        let mut w = csv_writer(&mut buf);
        w.write_record(columns)?;
        for row in rows {
            w.write_record(row)?;
        }
        w.flush()?;
    }
    fs::write(path, buf)?;
    Ok(path.to_path_buf())
}

/// A csv writer with RFC-4180 line endings.
pub fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(w)
}

/// Writes the header lines, then lets `body` fill the CSV part.
pub fn write_csv_with<P, F>(path: P, header: &CsvHeader, body: F) -> Result<PathBuf>
where
    P: AsRef<Path>,
    F: FnOnce(&mut csv::Writer<&mut Vec<u8>>) -> Result<()>,
{
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut buf = Vec::new();
    header.write_to(&mut buf)?;
    {
        let mut w = csv_writer(&mut buf);
        body(&mut w)?;
        w.flush()?;
    }
    fs::write(path, buf)?;
    Ok(path.to_path_buf())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip_and_hash() {
        let c = ExperimentConfig::parse("experiment = \"hyp2\"\nseed = 5\nn = [10, 25]\nlambda = 0.9\n").unwrap();
        assert_eq!(c.n, vec![10, 25]);
        let mut d = c.clone();
        d.output_dir = Some("elsewhere".into());
        assert_eq!(c.hash(), d.hash());
        d.seed = 6;
        assert_ne!(c.hash(), d.hash());
        assert!(ExperimentConfig::parse("bogus = 1").is_err());
    }

    #[test]
    fn csv_has_header_lines() {
        let dir = tempfile::tempdir().unwrap();
        let h = CsvHeader { config_hash: "abc".into(), seed: 3 };
        let p = write_csv(dir.path().join("t.csv"), &h, &["a", "b"], &[vec!["1".into(), "x,y".into()]]).unwrap();
        let s = fs::read_to_string(p).unwrap();
        assert_eq!(s, format!("# tool: spiked {VERSION}\n# config_hash: abc\n# seed: 3\na,b\r\n1,\"x,y\"\r\n"));
    }
}
