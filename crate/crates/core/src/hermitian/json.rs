//! Operator documents:
//!
//! ```json
//! {"dim": 2, "factors": [2], "re": [[1, 0], [0, 0]], "im": [[0, 0], [0, 0]]}
//! ```
//!
//! `factors` defaults to `[dim]` and `im` to zeros. With `"encoding": "hex"`
//! every entry is the IEEE-754 bit pattern as a string such as
//! `"0x3ff0000000000000"`, which round-trips exactly.

use super::{CMat, Hermitian, C64};
use crate::error::{Error, Result};
use serde_json::{json, Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Encoding {
    Decimal,
    Hex,
}

pub fn operator_to_json(h: &Hermitian, encoding: Encoding) -> Value {
    let n = h.dim();
    let enc = |x: f64| match encoding {
        Encoding::Decimal => json!(x),
        Encoding::Hex => json!(format!("0x{:016x}", x.to_bits())),
    };
    let part = |f: fn(&C64) -> f64| -> Value {
        Value::Array((0..n).map(|i| Value::Array((0..n).map(|j| enc(f(&h.matrix()[(i, j)]))).collect())).collect())
    };
    let mut obj = Map::new();
    obj.insert("dim".into(), json!(n));
    obj.insert("factors".into(), json!(h.dims()));
    if encoding == Encoding::Hex {
        obj.insert("encoding".into(), json!("hex"));
    }
    obj.insert("re".into(), part(|z| z.re));
    obj.insert("im".into(), part(|z| z.im));
    Value::Object(obj)
}

pub fn operator_from_json(text: &str) -> Result<Hermitian> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::parse("", format!("invalid JSON: {e}")))?;
    operator_from_value(&v, "")
}

fn get_usize(v: &Value, ptr: &str) -> Result<usize> {
    v.as_u64().map(|x| x as usize).ok_or_else(|| Error::parse(ptr, "expected a non-negative integer"))
}

fn entry(v: &Value, ptr: &str, encoding: Encoding) -> Result<f64> {
    match (encoding, v) {
        (Encoding::Decimal, Value::Number(n)) => n.as_f64().ok_or_else(|| Error::parse(ptr, "number out of range")),
        (Encoding::Hex, Value::String(s)) => {
            let digits = s.strip_prefix("0x").ok_or_else(|| Error::parse(ptr, "hex entry must start with 0x"))?;
            let bits = u64::from_str_radix(digits, 16).map_err(|_| Error::parse(ptr, "invalid hex digits"))?;
            Ok(f64::from_bits(bits))
        }
        (Encoding::Decimal, _) => Err(Error::parse(ptr, "expected a number")),
        (Encoding::Hex, _) => Err(Error::parse(ptr, "expected a hex string")),
    }
    .and_then(|x| if x.is_finite() { Ok(x) } else { Err(Error::parse(ptr, "entry is not finite")) })
}

fn matrix_part(v: Option<&Value>, ptr: &str, n: usize, encoding: Encoding) -> Result<Vec<f64>> {
    let Some(v) = v else { return Ok(vec![0.0; n * n]) };
    let rows = v.as_array().ok_or_else(|| Error::parse(ptr, "expected an array of rows"))?;
    if rows.len() != n {
        return Err(Error::parse(ptr, format!("expected {n} rows, found {}", rows.len())));
    }
    let mut out = Vec::with_capacity(n * n);
    for (i, row) in rows.iter().enumerate() {
        let rp = format!("{ptr}/{i}");
        let cols = row.as_array().ok_or_else(|| Error::parse(&rp, "expected an array"))?;
        if cols.len() != n {
            return Err(Error::parse(&rp, format!("expected {n} entries, found {}", cols.len())));
        }
        for (j, x) in cols.iter().enumerate() {
            out.push(entry(x, &format!("{rp}/{j}"), encoding)?);
        }
    }
    Ok(out)
}

/// Parses an operator document found at JSON pointer `base` (used in error
/// messages only).
pub fn operator_from_value(v: &Value, base: &str) -> Result<Hermitian> {
    let obj = v.as_object().ok_or_else(|| Error::parse(base, "expected an operator object"))?;
    let dim_v = obj.get("dim").ok_or_else(|| Error::parse(format!("{base}/dim"), "missing field"))?;
    let n = get_usize(dim_v, &format!("{base}/dim"))?;
    if n == 0 || n > super::MAX_DIM {
        return Err(Error::parse(format!("{base}/dim"), format!("dimension must be in 1..={}", super::MAX_DIM)));
    }
    let encoding = match obj.get("encoding") {
        None => Encoding::Decimal,
        Some(Value::String(s)) if s == "decimal" => Encoding::Decimal,
        Some(Value::String(s)) if s == "hex" => Encoding::Hex,
        Some(_) => return Err(Error::parse(format!("{base}/encoding"), "expected \"decimal\" or \"hex\"")),
    };
    let dims = match obj.get("factors") {
        None => vec![n],
        Some(f) => {
            let arr = f.as_array().ok_or_else(|| Error::parse(format!("{base}/factors"), "expected an array"))?;
            let dims = arr
                .iter()
                .enumerate()
                .map(|(k, x)| get_usize(x, &format!("{base}/factors/{k}")))
                .collect::<Result<Vec<_>>>()?;
            if dims.is_empty() || dims.contains(&0) || dims.iter().try_fold(1usize, |a, &d| a.checked_mul(d)) != Some(n) {
                return Err(Error::parse(format!("{base}/factors"), format!("factors must multiply to dim {n}")));
            }
            dims
        }
    };
    let re_ptr = format!("{base}/re");
    let re = matrix_part(Some(obj.get("re").ok_or_else(|| Error::parse(&re_ptr, "missing field"))?), &re_ptr, n, encoding)?;
    let im = matrix_part(obj.get("im"), &format!("{base}/im"), n, encoding)?;
    let mat = CMat::from_fn(n, n, |i, j| C64::new(re[i * n + j], im[i * n + j]));
    Hermitian::new(mat, dims).map_err(|e| Error::parse(base, e.to_string()))
}
