//! Input formats.
//!
//! Series files hold one number per line, optionally preceded by a single
//! header line. Model files are `key = value` lines:
//!
//! ```text
//! # a cubic with a unit root
//! levels = 0.9, -0.81, 0.91
//! sigma2 = 1
//! ```

use std::fs;
use std::path::Path;

use multistep_core::TimeSeries;

use crate::error::{CliError, Result};

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> CliError {
    CliError::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn parse_number(s: &str) -> Option<f64> {
    // `f64::from_str` is locale independent; reject "inf"/"nan" spellings
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

pub fn parse_series(text: &str, path: &Path) -> Result<TimeSeries> {
    let mut values = Vec::new();
    let mut seen_line = false;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line.contains(',') || line.contains(';') || line.contains('\t') {
            return Err(parse_error(path, i + 1, "expected a single column"));
        }
        match parse_number(line) {
            Some(v) => values.push(v),
            None if !seen_line => {}
            None => return Err(parse_error(path, i + 1, format!("'{line}' is not a finite number"))),
        }
        seen_line = true;
    }
    if values.is_empty() {
        return Err(parse_error(path, 1, "no observations"));
    }
    Ok(TimeSeries::new(values)?)
}

pub fn read_series(path: &Path) -> Result<TimeSeries> {
    parse_series(&read_text(path)?, path)
}

pub fn write_series(series: &TimeSeries) -> String {
    let mut out = String::from("x\n");
    for v in series.values() {
        out.push_str(&format!("{v:?}\n"));
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelFile {
    pub levels: Vec<f64>,
    pub sigma2: f64,
}

pub fn parse_coefficients(s: &str) -> Option<Vec<f64>> {
    let v: Option<Vec<f64>> = s
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(parse_number)
        .collect();
    v.filter(|v| !v.is_empty())
}

pub fn parse_model(text: &str, path: &Path) -> Result<ModelFile> {
    let mut levels = None;
    let mut sigma2 = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_error(path, i + 1, "expected 'key = value'"))?;
        let value = value.trim();
        match key.trim() {
            "levels" => {
                let c = parse_coefficients(value)
                    .ok_or_else(|| parse_error(path, i + 1, "levels must be a list of finite numbers"))?;
                levels = Some(c);
            }
            "sigma2" => {
                let s = parse_number(value)
                    .ok_or_else(|| parse_error(path, i + 1, "sigma2 must be a finite number"))?;
                sigma2 = Some(s);
            }
            other => return Err(parse_error(path, i + 1, format!("unknown key '{other}'"))),
        }
    }
    Ok(ModelFile {
        levels: levels.ok_or_else(|| parse_error(path, 1, "missing 'levels'"))?,
        sigma2: sigma2.unwrap_or(1.0),
    })
}

pub fn read_model(path: &Path) -> Result<ModelFile> {
    parse_model(&read_text(path)?, path)
}
