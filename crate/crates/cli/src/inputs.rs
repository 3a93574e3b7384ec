//! Reading input files and data, and fingerprinting everything read.

use std::path::Path;

use bettest_core::{DiscreteDistribution, DistributionModel, Outcome};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Everything a command consumed, in order, for the report digest.
#[derive(Debug, Default, Clone)]
pub struct InputLog {
    parts: Vec<(String, Vec<u8>)>,
}

impl InputLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, label: impl Into<String>, bytes: impl Into<Vec<u8>>) {
        self.parts.push((label.into(), bytes.into()));
    }

    pub fn read_file(&mut self, path: &Path) -> CliResult<Vec<u8>> {
        let bytes = std::fs::read(path).map_err(|e| {
            CliError::validation("io", format!("cannot read {}: {e}", path.display()))
                .at(path.display().to_string())
        })?;
        self.record(format!("file:{}", path.display()), bytes.clone());
        Ok(bytes)
    }

    /// SHA-256 over the length-prefixed labels and contents.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for (label, bytes) in &self.parts {
            h.update((label.len() as u64).to_le_bytes());
            h.update(label.as_bytes());
            h.update((bytes.len() as u64).to_le_bytes());
            h.update(bytes);
        }
        hex::encode(h.finalize())
    }
}

fn bad_spec(spec: &str, why: impl std::fmt::Display) -> CliError {
    CliError::validation("invalid_model_spec", format!("cannot parse model `{spec}`: {why}"))
}

fn parse_real(s: &str, what: &str) -> CliResult<f64> {
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(CliError::usage(format!("{what} must be a finite number, got `{s}`"))),
    }
}

/// Parses `normal:MEAN,SD`, `chisq:DF`, `discrete:LABEL=P,...` or
/// `discrete:@FILE.json`.
pub fn parse_model(spec: &str, inputs: &mut InputLog) -> CliResult<DistributionModel> {
    let (kind, params) = spec
        .split_once(':')
        .ok_or_else(|| bad_spec(spec, "expected KIND:PARAMS"))?;
    match kind.trim() {
        "normal" => {
            let parts: Vec<&str> = params.split(',').collect();
            if parts.len() != 2 {
                return Err(bad_spec(spec, "normal takes MEAN,SD"));
            }
            let mean = parse_real(parts[0], "normal mean")?;
            let sd = parse_real(parts[1], "normal sd")?;
            Ok(DistributionModel::normal(mean, sd)?)
        }
        "chisq" | "chi2" | "chi_squared" => {
            let df: u32 = params
                .trim()
                .parse()
                .map_err(|_| bad_spec(spec, "chisq takes a positive integer DF"))?;
            Ok(DistributionModel::chi_squared(df)?)
        }
        "discrete" => {
            if let Some(path) = params.strip_prefix('@') {
                let bytes = inputs.read_file(Path::new(path))?;
                let d: DiscreteDistribution = serde_json::from_slice(&bytes)
                    .map_err(|e| bad_spec(spec, e).at(path.to_string()))?;
                return Ok(d.into());
            }
            let mut pairs = Vec::new();
            for item in params.split(',') {
                let (label, p) = item
                    .split_once('=')
                    .ok_or_else(|| bad_spec(spec, "discrete takes LABEL=P pairs or @FILE"))?;
                pairs.push((Outcome::parse(label.trim()), parse_real(p, "probability")?));
            }
            Ok(DiscreteDistribution::from_pairs(pairs)?.into())
        }
        other => Err(bad_spec(spec, format!("unknown kind `{other}`"))),
    }
}

/// Which CSV column to read: by header name, or 1-based position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Column {
    Name(String),
    Position(usize),
}

impl Column {
    pub fn parse(s: &str) -> Self {
        match s.parse::<usize>() {
            Ok(n) if n >= 1 => Column::Position(n),
            _ => Column::Name(s.to_string()),
        }
    }
}

/// Reads one column of reals from CSV bytes.
///
/// A first row whose selected cell is not a number is taken as a header.
/// Blank lines are skipped. Errors name the file line.
pub fn parse_observations(bytes: &[u8], source: &str, column: Option<&Column>) -> CliResult<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut index: Option<usize> = match column {
        Some(Column::Position(n)) => Some(n - 1),
        None => Some(0),
        Some(Column::Name(_)) => None,
    };
    let mut values = Vec::new();
    let mut first = true;
    for record in reader.records() {
        let record = record.map_err(|e| {
            CliError::validation("csv", e.to_string()).at(source.to_string())
        })?;
        let line = record.position().map_or(0, |p| {
            let mut start = (p.byte() as usize).min(bytes.len());
            // the reader folds preceding blank lines into the record
            while start < bytes.len() && matches!(bytes[start], b'\n' | b'\r') {
                start += 1;
            }
            1 + bytes[..start].iter().filter(|&&b| b == b'\n').count()
        });
        if record.iter().all(str::is_empty) {
            continue;
        }
        if first {
            first = false;
            if let Some(Column::Name(name)) = column {
                let i = record.iter().position(|h| h == name).ok_or_else(|| {
                    CliError::validation("csv", format!("no column named `{name}`"))
                        .at(format!("{source}: row {line}"))
                })?;
                index = Some(i);
                continue;
            }
            let cell = record.get(index.unwrap_or(0)).unwrap_or("");
            if cell.parse::<f64>().is_err() {
                continue;
            }
        }
        let i = index.unwrap_or(0);
        let cell = record.get(i).ok_or_else(|| {
            CliError::validation("csv", format!("row has no column {}", i + 1))
                .at(format!("{source}: row {line}"))
        })?;
        match cell.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            _ => {
                return Err(CliError::validation(
                    "csv",
                    format!("cannot parse `{cell}` as a number"),
                )
                .at(format!("{source}: row {line}, column {}", i + 1)))
            }
        }
    }
    if values.is_empty() {
        return Err(CliError::validation("csv", "no data rows").at(source.to_string()));
    }
    Ok(values)
}

/// Reads one column of reals from a CSV file.
pub fn ingest_observations(
    path: &Path,
    column: Option<&Column>,
    inputs: &mut InputLog,
) -> CliResult<Vec<f64>> {
    let bytes = inputs.read_file(path)?;
    parse_observations(&bytes, &path.display().to_string(), column)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn headers_and_plain_columns() {
        assert_eq!(parse_observations(b"y\n30\n", "f", None).unwrap(), vec![30.0]);
        assert_eq!(parse_observations(b"1.5\n\n2\n", "f", None).unwrap(), vec![1.5, 2.0]);
        let two = b"a,b\n1,10\n2,20\n";
        let b = Column::parse("b");
        assert_eq!(parse_observations(two, "f", Some(&b)).unwrap(), vec![10.0, 20.0]);
        assert_eq!(
            parse_observations(two, "f", Some(&Column::parse("2"))).unwrap(),
            vec![10.0, 20.0]
        );
    }

    #[test]
    fn parse_errors_carry_the_row() {
        let err = parse_observations(b"y\nabc\n", "data.csv", None).unwrap_err();
        assert_eq!(err.location.as_deref(), Some("data.csv: row 2, column 1"));
        let err = parse_observations(b"y\n1\n\nnan\n", "d", None).unwrap_err();
        assert!(err.location.unwrap().contains("row 4"));
        assert!(parse_observations(b"y\n", "d", None).is_err());
        assert!(parse_observations(b"a\n1\n", "d", Some(&Column::parse("z"))).is_err());
    }

    #[test]
    fn model_specs() {
        let mut log = InputLog::new();
        assert_eq!(
            parse_model("normal:0,10", &mut log).unwrap(),
            DistributionModel::normal(0.0, 10.0).unwrap()
        );
        assert_eq!(
            parse_model("chisq:11", &mut log).unwrap(),
            DistributionModel::chi_squared(11).unwrap()
        );
        let d = parse_model("discrete:H=0.5,T=0.5", &mut log).unwrap();
        assert_eq!(d.as_discrete().unwrap().len(), 2);
        for bad in ["normal:0", "normal:0,-1", "chisq:0", "gamma:1", "normal", "discrete:a"] {
            assert!(parse_model(bad, &mut log).is_err(), "{bad}");
        }
    }

    #[test]
    fn discrete_spec_from_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.json");
        std::fs::write(&path, r#"{"outcomes": [1, 3], "probabilities": [0.5, 0.5]}"#).unwrap();
        let mut log = InputLog::new();
        let m = parse_model(&format!("discrete:@{}", path.display()), &mut log).unwrap();
        assert_eq!(m.as_discrete().unwrap().outcomes()[1], Outcome::Real(3.0));
        let before = log.digest();
        log.record("x", b"y".to_vec());
        assert_ne!(before, log.digest());
    }
}
