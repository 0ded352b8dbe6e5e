//! Serialization of result documents: JSON with exact rationals, or flat CSV.

use std::io::Write;

use num_rational::BigRational;
use polyharm::rational::to_f64;
use serde::ser::Error as _;
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

pub const TOOL: &str = "polyharm";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Floats are always printed with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        String::new()
    }
}

/// An `f64` serialized as a JSON number with fixed formatting (`null` if not finite).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct F64(pub f64);

impl Serialize for F64 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        RawValue::from_string(fmt_f64(self.0)).map_err(S::Error::custom)?.serialize(s)
    }
}

impl From<f64> for F64 {
    fn from(x: f64) -> Self {
        F64(x)
    }
}

pub fn fixed<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    F64(*x).serialize(s)
}

pub fn fixed_opt<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    x.map(F64).serialize(s)
}

pub fn fixed_vec<S: Serializer>(x: &[f64], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(x.iter().map(|&v| F64(v)))
}

/// Exact rational: numerator and denominator as decimal strings, plus a float rendering.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Rat {
    pub num: String,
    pub den: String,
    pub float: F64,
}

impl From<&BigRational> for Rat {
    fn from(q: &BigRational) -> Self {
        Rat { num: q.numer().to_string(), den: q.denom().to_string(), float: F64(to_f64(q)) }
    }
}

impl Rat {
    pub fn cell(&self) -> String {
        fmt_f64(self.float.0)
    }
}

/// One CSV row per record; CSV carries floats only.
pub trait Row {
    fn header() -> Vec<&'static str>;
    fn cells(&self) -> Vec<String>;
}

pub fn cell_opt<T: ToString>(x: &Option<T>) -> String {
    x.as_ref().map(T::to_string).unwrap_or_default()
}

pub fn cell_f64_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub fn join_f64(xs: &[f64]) -> String {
    xs.iter().map(|&x| fmt_f64(x)).collect::<Vec<_>>().join(";")
}

/// Everything a command produces.
#[derive(Serialize)]
pub struct Document<R, S> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub input: serde_json::Value,
    /// Which quantity or identity the records instantiate.
    pub provenance: &'static str,
    pub summary: S,
    pub records: Vec<R>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

pub fn write<R: Serialize + Row, S: Serialize>(
    doc: &Document<R, S>,
    format: Format,
    out: &mut dyn Write,
) -> std::io::Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, doc)?;
            writeln!(out)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(R::header())?;
            for r in &doc.records {
                w.write_record(r.cells())?;
            }
            w.flush()
        }
    }
}

/// Diagnostic record for failed runs, written to stderr as one JSON line.
#[derive(Serialize)]
pub struct Diagnostic<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub status: u8,
    pub kind: &'a str,
    pub message: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_round_trip() {
        for text in ["8/7", "-1/5", "400005", "123456789012345678901234567890/7"] {
            let q: BigRational = text.parse().unwrap();
            let r = Rat::from(&q);
            let json = serde_json::to_string(&r).unwrap();
            let v: serde_json::Value = serde_json::from_str(&json).unwrap();
            let back: BigRational =
                format!("{}/{}", v["num"].as_str().unwrap(), v["den"].as_str().unwrap()).parse().unwrap();
            assert_eq!(back, q);
        }
    }

    #[test]
    fn floats_are_fixed_width() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(serde_json::to_string(&F64(f64::NAN)).unwrap(), "null");
        assert_eq!(serde_json::to_string(&F64(-2.5)).unwrap(), "-2.5000000000000000e0");
    }
}
