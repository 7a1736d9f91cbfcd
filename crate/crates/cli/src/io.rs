//! File formats: CSV tables with `#` metadata lines, measurement datasets,
//! and echo trace imports.

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use donor_strain::echo::EchoTrace;
use donor_strain::fit::MeasurementRecord;
use donor_strain::spin::HalfInt;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{CliError, Result};

/// Key/value pairs written as `# key=value` lines ahead of CSV tables and as
/// a `meta` object in JSON.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Meta(pub Vec<(String, String)>);

impl Meta {
    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.0.push((key.to_string(), value.to_string()));
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Object(self.0.iter().map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone()))).collect())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

/// Reads `# key=value` lines from the head of a CSV file.
pub fn read_meta(text: &str) -> Meta {
    let mut m = Meta::default();
    for line in text.lines() {
        let Some(rest) = line.strip_prefix('#') else { break };
        if let Some((k, v)) = rest.trim().split_once('=') {
            m.push(k.trim(), v.trim());
        }
    }
    m
}

pub fn csv_table<T: Serialize>(meta: &Meta, rows: &[T]) -> Result<String> {
    let mut out = String::new();
    for (k, v) in &meta.0 {
        out.push_str(&format!("# {k}={v}\n"));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
    out.push_str(&String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))?);
    Ok(out)
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn reader(text: &str, headers: bool) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .has_headers(headers)
        .flexible(true)
        .from_reader(text.as_bytes())
}

fn parse_err(file: &str, line: u64, message: impl Into<String>) -> CliError {
    CliError::Parse { file: file.to_string(), line, message: message.into() }
}

fn csv_err(file: &str, e: csv::Error) -> CliError {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    parse_err(file, line, e.to_string())
}

/// Measurement datasets: `donor,m_I,theta_deg,eps11,df_Hz`, or the output
/// of `predict` (`df_deps11_Hz`), read as slope records with eps11 = 1.
pub fn parse_records(text: &str, name: &str) -> Result<Vec<MeasurementRecord>> {
    let mut rdr = reader(text, true);
    let headers = rdr.headers().map_err(|e| csv_err(name, e))?.clone();
    let col: HashMap<&str, usize> = headers.iter().enumerate().map(|(i, h)| (h, i)).collect();
    let need = |h: &str| col.get(h).copied().ok_or_else(|| parse_err(name, 1, format!("missing column `{h}`")));
    let (donor, m_i, theta) = (need("donor")?, need("m_I")?, need("theta_deg")?);
    enum Shift {
        Raw(usize, usize),
        Slope(usize),
    }
    let shift = match (col.get("eps11"), col.get("df_Hz"), col.get("df_deps11_Hz")) {
        (Some(&e), Some(&d), _) => Shift::Raw(e, d),
        (_, _, Some(&s)) => Shift::Slope(s),
        _ => return Err(parse_err(name, 1, "need columns `eps11,df_Hz` or `df_deps11_Hz`")),
    };
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(name, e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let field = |i: usize, what: &str| {
            rec.get(i).ok_or_else(|| parse_err(name, line, format!("missing `{what}` field")))
        };
        let num = |i: usize, what: &str| -> Result<f64> {
            let s = field(i, what)?;
            s.parse::<f64>().map_err(|_| parse_err(name, line, format!("`{what}` is not a number: `{s}`")))
        };
        let m: HalfInt = field(m_i, "m_I")?
            .parse()
            .map_err(|e: donor_strain::Error| parse_err(name, line, e.to_string()))?;
        let (eps11, df_hz) = match shift {
            Shift::Raw(e, d) => (num(e, "eps11")?, num(d, "df_Hz")?),
            Shift::Slope(s) => (1.0, num(s, "df_deps11_Hz")?),
        };
        out.push(MeasurementRecord {
            donor: field(donor, "donor")?.to_string(),
            m_i: m,
            theta_rad: num(theta, "theta_deg")?.to_radians(),
            eps11,
            df_hz,
        });
    }
    if out.is_empty() {
        return Err(parse_err(name, 1, "dataset has no rows"));
    }
    Ok(out)
}

pub fn read_records(path: &Path) -> Result<Vec<MeasurementRecord>> {
    parse_records(&read_file(path)?, &path.display().to_string())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecordRow {
    pub donor: String,
    #[serde(rename = "m_I")]
    pub m_i: f64,
    pub theta_deg: f64,
    pub eps11: f64,
    #[serde(rename = "df_Hz")]
    pub df_hz: f64,
}

impl From<&MeasurementRecord> for RecordRow {
    fn from(r: &MeasurementRecord) -> Self {
        RecordRow { donor: r.donor.clone(), m_i: r.m_i.value(), theta_deg: r.theta_rad.to_degrees(), eps11: r.eps11, df_hz: r.df_hz }
    }
}

/// Two columns (time_s, amplitude) or three (time_s, re, im); an optional
/// non-numeric header row is skipped.
pub fn parse_trace(text: &str, name: &str) -> Result<EchoTrace> {
    let mut rdr = reader(text, false);
    let mut times = Vec::new();
    let mut samples = Vec::new();
    let mut width = None;
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(name, e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let vals: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        let vals = match vals {
            Ok(v) => v,
            Err(_) if k == 0 => continue,
            Err(_) => return Err(parse_err(name, line, format!("non-numeric field in `{}`", rec.iter().collect::<Vec<_>>().join(",")))),
        };
        if !(vals.len() == 2 || vals.len() == 3) {
            return Err(parse_err(name, line, format!("expected 2 or 3 columns, found {}", vals.len())));
        }
        if *width.get_or_insert(vals.len()) != vals.len() {
            return Err(parse_err(name, line, "column count changed"));
        }
        times.push(vals[0]);
        samples.push(Complex64::new(vals[1], vals.get(2).copied().unwrap_or(0.0)));
    }
    EchoTrace::from_times(&times, samples).map_err(CliError::from)
}

pub fn read_trace(path: &Path) -> Result<EchoTrace> {
    parse_trace(&read_file(path)?, &path.display().to_string())
}

pub fn trace_csv(trace: &EchoTrace) -> String {
    let mut s = String::from("time_s,re,im\n");
    for (k, v) in trace.samples.iter().enumerate() {
        s.push_str(&format!("{},{},{}\n", trace.time(k), v.re, v.im));
    }
    s
}

pub fn read_stdin_or(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| CliError::io(path, e))?;
        Ok(s)
    } else {
        read_file(path)
    }
}
