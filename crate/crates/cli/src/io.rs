//! Measure files and report output.

use std::fs;
use std::path::{Path, PathBuf};

use debranges_core::{Atom, SpectralMeasure};
use serde::{Deserialize, Serialize};

use crate::config::SCHEMA;
use crate::error::{config_err, CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomRecord {
    pub lambda: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureFile {
    pub schema: String,
    pub lambda_max: f64,
    /// Normalization of the solution the weights refer to.
    pub gauge: String,
    pub atoms: Vec<AtomRecord>,
}

impl MeasureFile {
    pub fn from_measure(m: &SpectralMeasure) -> Self {
        MeasureFile {
            schema: SCHEMA.into(),
            lambda_max: m.lambda_max(),
            gauge: m.gauge().into(),
            atoms: m.atoms().iter().map(|a| AtomRecord { lambda: a.lambda, weight: a.weight }).collect(),
        }
    }

    pub fn to_measure(&self) -> CliResult<SpectralMeasure> {
        if self.schema != SCHEMA {
            return Err(config_err(format!("measure schema {:?}, expected {SCHEMA:?}", self.schema)));
        }
        let atoms = self.atoms.iter().map(|a| Atom { lambda: a.lambda, weight: a.weight }).collect();
        SpectralMeasure::new(atoms, self.lambda_max, self.gauge.clone()).map_err(config_err)
    }

    /// Reads JSON, or CSV with `lambda,weight` rows when the extension is `.csv`.
    pub fn read(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })?;
        if path.extension().is_some_and(|e| e == "csv") {
            return Self::from_csv(&text).map_err(|e| config_err(format!("{}: {e}", path.display())));
        }
        serde_json::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["lambda", "weight"]).unwrap();
        for a in &self.atoms {
            w.write_record([fmt(a.lambda), fmt(a.weight)]).unwrap();
        }
        let body = String::from_utf8(w.into_inner().unwrap()).unwrap();
        format!("# schema={SCHEMA} lambda_max={} gauge={}\n{body}", fmt(self.lambda_max), self.gauge)
    }

    fn from_csv(text: &str) -> Result<Self, String> {
        let header = text.lines().next().ok_or("empty file")?;
        let meta = header.strip_prefix("# ").ok_or("missing '# schema=...' header line")?;
        let mut schema = None;
        let mut lambda_max = None;
        let mut gauge = None;
        for kv in meta.split(' ') {
            match kv.split_once('=') {
                Some(("schema", v)) => schema = Some(v.to_string()),
                Some(("lambda_max", v)) => lambda_max = Some(v.parse::<f64>().map_err(|e| e.to_string())?),
                Some(("gauge", v)) => gauge = Some(v.to_string()),
                _ => {}
            }
        }
        let body: String = text.lines().skip(1).collect::<Vec<_>>().join("\n");
        let mut rdr = csv::Reader::from_reader(body.as_bytes());
        let mut atoms = Vec::new();
        for rec in rdr.deserialize::<AtomRecord>() {
            atoms.push(rec.map_err(|e| e.to_string())?);
        }
        Ok(MeasureFile {
            schema: schema.ok_or("header lacks schema")?,
            lambda_max: lambda_max.ok_or("header lacks lambda_max")?,
            gauge: gauge.unwrap_or_default(),
            atoms,
        })
    }
}

/// Shortest decimal form that parses back to the same `f64`.
pub fn fmt(x: f64) -> String {
    format!("{x:?}")
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> CliResult<PathBuf> {
    fs::create_dir_all(dir).map_err(|source| CliError::Write { path: dir.into(), source })?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| CliError::Write { path: path.clone(), source })?;
    Ok(path)
}

pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report values serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> MeasureFile {
        MeasureFile {
            schema: SCHEMA.into(),
            lambda_max: 25.0,
            gauge: "regular:angle=0".into(),
            atoms: vec![AtomRecord { lambda: 1.0, weight: 2.0 / std::f64::consts::PI }, AtomRecord { lambda: 4.0, weight: 0.1 }],
        }
    }

    #[test]
    fn csv_round_trip() {
        let m = sample();
        assert_eq!(MeasureFile::from_csv(&m.to_csv()).unwrap(), m);
    }

    #[test]
    fn json_round_trip() {
        let m = sample();
        let back: MeasureFile = serde_json::from_str(&to_json(&m)).unwrap();
        assert_eq!(back, m);
        assert!(back.to_measure().is_ok());
    }

    #[test]
    fn invalid_weights_are_config_errors() {
        let mut m = sample();
        m.atoms[1].weight = -1.0;
        assert!(matches!(m.to_measure(), Err(CliError::Config(_))));
    }
}
