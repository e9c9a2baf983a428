//! Record formatting for CSV and JSON, and atomic file writes.
//!
//! CSV numbers carry 6 significant digits in fixed notation (scientific
//! outside `1e-5 ..= 1e15`), `NaN` for undefined values and an empty field
//! for absent ones. Lines end in `\n`. JSON keeps full precision, writes
//! non-finite numbers as `null` and gathers Monte Carlo standard errors
//! under `mc_se`.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::{json, Map, Value as Json};

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Str(String),
    Int(u64),
    Num(f64),
    Bool(bool),
    Missing,
}

impl Value {
    fn csv(&self) -> String {
        match self {
            Value::Str(s) => quote(s),
            Value::Int(i) => i.to_string(),
            Value::Num(x) => fmt_num(*x),
            Value::Bool(b) => b.to_string(),
            Value::Missing => String::new(),
        }
    }

    fn json(&self) -> Json {
        match self {
            Value::Str(s) => json!(s),
            Value::Int(i) => json!(i),
            Value::Num(x) if x.is_finite() => json!(x),
            Value::Num(_) | Value::Missing => Json::Null,
            Value::Bool(b) => json!(b),
        }
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Str(s.to_string())
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Num(x)
    }
}

impl From<u64> for Value {
    fn from(i: u64) -> Self {
        Value::Int(i)
    }
}

impl From<Option<f64>> for Value {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Value::Missing, Value::Num)
    }
}

/// One output row: named fields in column order, some with a standard error.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record {
    pub fields: Vec<(String, Value, Option<f64>)>,
}

impl Record {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: impl Into<String>, value: impl Into<Value>) -> &mut Self {
        self.fields.push((name.into(), value.into(), None));
        self
    }

    pub fn push_se(&mut self, name: impl Into<String>, value: impl Into<Value>, se: Option<f64>) -> &mut Self {
        self.fields.push((name.into(), value.into(), se));
        self
    }

    pub fn header(&self) -> Vec<&str> {
        self.fields.iter().map(|f| f.0.as_str()).collect()
    }
}

/// Format with 6 significant digits.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    // exponent after rounding, so 9.9999996 counts as 1e1
    let sci = format!("{x:.5e}");
    let exp: i32 = sci
        .rsplit_once('e')
        .and_then(|(_, e)| e.parse().ok())
        .expect("`{:e}` always has an exponent");
    if !(-5..=15).contains(&exp) {
        return sci;
    }
    let decimals = (5 - exp).max(0) as usize;
    let rounded: f64 = sci.parse().expect("round trip of a formatted float");
    format!("{rounded:.decimals$}")
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Header row plus one line per record. All records must share a header.
pub fn to_csv(records: &[Record]) -> String {
    let mut out = String::new();
    if let Some(first) = records.first() {
        out.push_str(&first.header().iter().map(|h| quote(h)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    for r in records {
        debug_assert_eq!(r.header(), records[0].header());
        let line: Vec<String> = r.fields.iter().map(|f| f.1.csv()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// `{"command": .., <meta>.., "rows": [{fields.., "mc_se": {..}}]}`.
pub fn to_json(command: &str, meta: &Record, records: &[Record]) -> String {
    let mut top = Map::new();
    top.insert("command".into(), json!(command));
    for (k, v, _) in &meta.fields {
        top.insert(k.clone(), v.json());
    }
    let rows: Vec<Json> = records
        .iter()
        .map(|r| {
            let mut obj = Map::new();
            let mut se = Map::new();
            for (k, v, s) in &r.fields {
                obj.insert(k.clone(), v.json());
                if let Some(s) = s {
                    se.insert(k.clone(), Value::Num(*s).json());
                }
            }
            if !se.is_empty() {
                obj.insert("mc_se".into(), Json::Object(se));
            }
            Json::Object(obj)
        })
        .collect();
    top.insert("rows".into(), Json::Array(rows));
    let mut s = serde_json::to_string_pretty(&Json::Object(top)).expect("values are serialisable");
    s.push('\n');
    s
}

/// Write `contents` to `path` through a temporary file in the same
/// directory, so a failed run never leaves a partial file behind. `-`
/// means stdout.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    if path == Path::new("-") {
        let mut out = std::io::stdout().lock();
        out.write_all(contents.as_bytes())?;
        return Ok(out.flush()?);
    }
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("cannot create a temporary file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())
        .and_then(|_| tmp.as_file().sync_all())
        .with_context(|| format!("cannot write {}", path.display()))?;
    tmp.persist(path)
        .with_context(|| format!("cannot move output into place at {}", path.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(fmt_num(0.048), "0.0480000");
        assert_eq!(fmt_num(35.4213), "35.4213");
        assert_eq!(fmt_num(-1.0), "-1.00000");
        assert_eq!(fmt_num(9.9999996), "10.0000");
        assert_eq!(fmt_num(123456789.0), "123457000");
        assert_eq!(fmt_num(1.5e-7), "1.50000e-7");
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(f64::NAN), "NaN");
    }

    #[test]
    fn csv_layout() {
        let mut a = Record::new();
        a.push("name", "x,y").push("n", 3u64).push("p", Some(0.5)).push("q", None::<f64>);
        let csv = to_csv(&[a]);
        assert_eq!(csv, "name,n,p,q\n\"x,y\",3,0.500000,\n");
    }

    #[test]
    fn json_collects_standard_errors() {
        let mut a = Record::new();
        a.push_se("cov", 0.9, Some(0.003)).push("nan", f64::NAN);
        let mut meta = Record::new();
        meta.push("seed", 7u64);
        let v: Json = serde_json::from_str(&to_json("table", &meta, &[a])).unwrap();
        assert_eq!(v["command"], "table");
        assert_eq!(v["seed"], 7);
        assert_eq!(v["rows"][0]["cov"], 0.9);
        assert_eq!(v["rows"][0]["mc_se"]["cov"], 0.003);
        assert!(v["rows"][0]["nan"].is_null());
    }

    #[test]
    fn atomic_write_replaces_target() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        write_atomic(&p, "a\n").unwrap();
        write_atomic(&p, "b\n").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "b\n");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
        assert!(write_atomic(&dir.path().join("missing/out.csv"), "x").is_err());
    }
}
