use std::io::Write;
use std::path::Path;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::CliError;

/// Digits after the point in decimal expansions of exact values.
pub const DECIMAL_PLACES: usize = 20;

/// Marker in the `err` column for exact values.
pub const EXACT: &str = "exact";

/// A homogeneous table with a fixed column order.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match the header");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        w.write_record(&self.columns).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), CliError> {
        write_file(path, &self.to_csv()?)
    }
}

fn io(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let mut f = std::fs::File::create(path).map_err(|e| CliError::Io(format!("{}: {}", path.display(), e)))?;
    f.write_all(bytes).map_err(|e| CliError::Io(format!("{}: {}", path.display(), e)))
}

/// Pretty JSON; object keys come out sorted because `serde_json::Map` is a `BTreeMap`.
pub fn write_json(path: &Path, v: &Value) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    write_file(path, s.as_bytes())
}

/// Shortest round-trip representation, in exponent form outside `[1e-4, 1e16)`;
/// independent of locale.
pub fn float(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e16).contains(&a) {
        format!("{}", x)
    } else {
        format!("{:e}", x)
    }
}

/// Space-separated coordinates.
pub fn coords(c: &[i64]) -> String {
    c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// Decimal expansion rounded half away from zero to `DECIMAL_PLACES`, trailing zeros removed.
pub fn decimal(x: &BigRational) -> String {
    let scale = BigInt::from(10u32).pow(DECIMAL_PLACES as u32);
    let scaled = x.abs() * BigRational::from_integer(scale.clone());
    let n = (scaled + BigRational::new(1.into(), 2.into())).floor().to_integer();
    let (int, frac) = n.div_rem(&scale);
    let mut digits = format!("{:0>width$}", frac.to_string(), width = DECIMAL_PLACES);
    while digits.ends_with('0') {
        digits.pop();
    }
    let sign = if x.is_negative() && !(int.is_zero() && digits.is_empty()) { "-" } else { "" };
    if digits.is_empty() {
        format!("{}{}", sign, int)
    } else {
        format!("{}{}.{}", sign, int, digits)
    }
}

/// `{"num": p, "den": q}`; parts beyond 64 bits are written as decimal strings.
pub fn rational(x: &BigRational) -> Value {
    json!({ "num": integer(x.numer()), "den": integer(x.denom()) })
}

fn integer(n: &BigInt) -> Value {
    match n.to_i64() {
        Some(v) => json!(v),
        None => json!(n.to_string()),
    }
}
