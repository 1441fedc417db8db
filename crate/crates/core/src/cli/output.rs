use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::{MuhsError, Result};

/// 17 significant digits, enough to round-trip any double.
pub fn fmt17(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut buf = header.join(",");
        buf.push('\n');
        Self { buf }
    }

    pub fn row(&mut self, values: &[f64]) {
        let line: Vec<String> = values.iter().map(|v| fmt17(*v)).collect();
        self.buf.push_str(&line.join(","));
        self.buf.push('\n');
    }

    pub fn into_string(self) -> String {
        self.buf
    }
}

/// Run record written as `manifest.json` next to the files it names.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: Value,
    pub inputs: Value,
    pub outputs: Vec<String>,
    pub summary: Value,
    pub verdict: String,
}

/// Collects files for one output directory and writes the manifest last.
pub struct OutputDir {
    dir: PathBuf,
    written: Vec<String>,
}

fn io_err(path: &Path, e: std::io::Error) -> MuhsError {
    MuhsError::InvalidParams(format!("cannot write {}: {e}", path.display()))
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        let mut f = fs::File::create(&path).map_err(|e| io_err(&path, e))?;
        f.write_all(contents.as_bytes()).map_err(|e| io_err(&path, e))?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn finish(self, mut manifest: RunManifest) -> Result<()> {
        manifest.outputs = self.written.clone();
        let path = self.dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| MuhsError::Numerical(format!("manifest: {e}")))?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| io_err(&path, e))
    }
}

/// JSON number, or null for non-finite values.
pub fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            let s = fmt17(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            let mantissa = s.split('e').next().unwrap();
            assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17);
        }
        assert_eq!(fmt17(f64::NAN), "NaN");
    }

    #[test]
    fn manifest_lists_outputs() {
        let dir = std::env::temp_dir().join(format!("muhs-out-{}", std::process::id()));
        let mut out = OutputDir::create(&dir).unwrap();
        let mut csv = Csv::new(&["a", "b"]);
        csv.row(&[1.0, 2.0]);
        out.write("x.csv", &csv.into_string()).unwrap();
        out.finish(RunManifest {
            command: "t".into(),
            version: "0".into(),
            config: Value::Null,
            inputs: Value::Null,
            outputs: vec![],
            summary: Value::Null,
            verdict: "ok".into(),
        })
        .unwrap();
        let m: Value =
            serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
        assert_eq!(m["outputs"], serde_json::json!(["x.csv"]));
        fs::remove_dir_all(dir).unwrap();
    }
}
