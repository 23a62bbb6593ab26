//! Report serialization: JSON with every float written as `{:.16e}`, and
//! flat CSV rows for sweeps.

use serde::Serialize;
use std::io;

use serde_json::ser::{CompactFormatter, Formatter, PrettyFormatter, Serializer};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::io::sci;
use crate::strictq::SweepReport;

/// One row of the flat sweep table.
#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub axiom: String,
    pub field_preset: String,
    pub gauge: String,
    pub fiducial: String,
    pub hbar: f64,
    pub norm: f64,
    pub defect: f64,
    pub verdict: String,
    pub runtime_ms: f64,
}

pub const SWEEP_COLUMNS: [&str; 9] = [
    "axiom",
    "field_preset",
    "gauge",
    "fiducial",
    "hbar",
    "norm",
    "defect",
    "verdict",
    "runtime_ms",
];

pub fn sweep_rows(r: &SweepReport) -> Vec<SweepRow> {
    let verdict = if r.verdict.pass { "pass" } else { "fail" };
    r.records
        .iter()
        .map(|rec| SweepRow {
            axiom: r.axiom.name().into(),
            field_preset: r.field_preset.clone(),
            gauge: r.gauge.clone(),
            fiducial: r.fiducial.clone(),
            hbar: rec.hbar,
            norm: rec.norm,
            defect: rec.defect,
            verdict: verdict.into(),
            runtime_ms: rec.runtime_ms,
        })
        .collect()
}

pub fn sweep_csv(reports: &[SweepReport]) -> Result<String> {
    let mut wr = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    wr.write_record(SWEEP_COLUMNS).map_err(io)?;
    for r in reports {
        for row in sweep_rows(r) {
            wr.write_record([
                row.axiom,
                row.field_preset,
                row.gauge,
                row.fiducial,
                sci(row.hbar),
                sci(row.norm),
                sci(row.defect),
                row.verdict,
                sci(row.runtime_ms),
            ])
            .map_err(io)?;
        }
    }
    let bytes = wr.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Delegates layout to an inner formatter and writes every `f64` as `{:.16e}`.
struct Sci<F>(F);

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*)),* $(,)?) => {
        $(fn $name<W: ?Sized + io::Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.0.$name(w $(, $arg)*)
        })*
    };
}

impl<F: Formatter> Formatter for Sci<F> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, x: f64) -> io::Result<()> {
        w.write_all(sci(x).as_bytes())
    }

    delegate!(
        begin_array(),
        end_array(),
        begin_array_value(first: bool),
        end_array_value(),
        begin_object(),
        end_object(),
        begin_object_key(first: bool),
        end_object_key(),
        begin_object_value(),
        end_object_value(),
    );
}

fn json_err(e: serde_json::Error) -> Error {
    Error::Parse {
        what: "json",
        detail: e.to_string(),
    }
}

fn write_with<T: Serialize, F: Formatter>(t: &T, f: F) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, Sci(f));
    t.serialize(&mut ser).map_err(json_err)?;
    Ok(String::from_utf8(buf).expect("json output is utf-8"))
}

pub fn to_value<T: Serialize>(t: &T) -> Result<Value> {
    serde_json::to_value(t).map_err(json_err)
}

/// Pretty JSON with a trailing newline.
pub fn to_json_string<T: Serialize>(t: &T) -> Result<String> {
    let mut s = write_with(t, PrettyFormatter::new())?;
    s.push('\n');
    Ok(s)
}

pub fn to_json_compact<T: Serialize>(t: &T) -> Result<String> {
    write_with(t, CompactFormatter)
}

/// Removes `runtime_ms` keys at any depth, for comparing runs.
pub fn strip_timing(v: &mut Value) {
    match v {
        Value::Object(o) => {
            o.shift_remove("runtime_ms");
            o.values_mut().for_each(strip_timing);
        }
        Value::Array(a) => a.iter_mut().for_each(strip_timing),
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_are_rewritten() {
        let v = serde_json::json!({"a": 0.25, "b": [1.5, 3], "runtime_ms": 2.0});
        let s = to_json_compact(&v).unwrap();
        assert_eq!(
            s,
            r#"{"a":2.5000000000000000e-1,"b":[1.5000000000000000e0,3],"runtime_ms":2.0000000000000000e0}"#
        );
        let mut v: Value = serde_json::from_str(&s).unwrap();
        strip_timing(&mut v);
        assert!(v.get("runtime_ms").is_none());
    }
}
