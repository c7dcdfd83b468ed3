//! Set and family documents. See `docs/sets.md` for the schema.

use super::{Kind, SetFamily, StateSet};
use crate::error::{Error, Result};
use crate::hermitian::{operator_from_value, operator_to_json, CMat, Encoding, C64};
use serde_json::{json, Map, Value};

fn field<'a>(obj: &'a Map<String, Value>, name: &str, base: &str) -> Result<&'a Value> {
    obj.get(name).ok_or_else(|| Error::parse(format!("{base}/{name}"), "missing field"))
}

fn usize_of(v: &Value, ptr: &str) -> Result<usize> {
    v.as_u64().map(|x| x as usize).ok_or_else(|| Error::parse(ptr, "expected a non-negative integer"))
}

fn usize_list(v: &Value, ptr: &str) -> Result<Vec<usize>> {
    let arr = v.as_array().ok_or_else(|| Error::parse(ptr, "expected an array"))?;
    arr.iter().enumerate().map(|(i, x)| usize_of(x, &format!("{ptr}/{i}"))).collect()
}

fn bool_list(v: &Value, ptr: &str) -> Result<Vec<bool>> {
    let arr = v.as_array().ok_or_else(|| Error::parse(ptr, "expected an array"))?;
    arr.iter()
        .enumerate()
        .map(|(i, x)| x.as_bool().ok_or_else(|| Error::parse(format!("{ptr}/{i}"), "expected a boolean")))
        .collect()
}

fn factors(obj: &Map<String, Value>, base: &str, dim: usize) -> Result<Vec<usize>> {
    let dims = match obj.get("factors") {
        Some(v) => usize_list(v, &format!("{base}/factors"))?,
        None => vec![dim],
    };
    if dims.is_empty() || dims.contains(&0) || dims.iter().try_fold(1usize, |a, &d| a.checked_mul(d)) != Some(dim) {
        return Err(Error::parse(format!("{base}/factors"), format!("factors must multiply to dim {dim}")));
    }
    Ok(dims)
}

fn rect_part(v: &Value, ptr: &str, rows: usize, cols: usize) -> Result<Vec<f64>> {
    let arr = v.as_array().ok_or_else(|| Error::parse(ptr, "expected an array of rows"))?;
    if arr.len() != rows {
        return Err(Error::parse(ptr, format!("expected {rows} rows, found {}", arr.len())));
    }
    let mut out = Vec::with_capacity(rows * cols);
    for (i, row) in arr.iter().enumerate() {
        let rp = format!("{ptr}/{i}");
        let r = row.as_array().ok_or_else(|| Error::parse(&rp, "expected an array"))?;
        if r.len() != cols {
            return Err(Error::parse(&rp, format!("expected {cols} entries, found {}", r.len())));
        }
        for (j, x) in r.iter().enumerate() {
            let f = x.as_f64().filter(|f| f.is_finite()).ok_or_else(|| Error::parse(format!("{rp}/{j}"), "expected a finite number"))?;
            out.push(f);
        }
    }
    Ok(out)
}

fn kraus_from_value(v: &Value, ptr: &str, rows: usize, cols: usize) -> Result<CMat> {
    let obj = v.as_object().ok_or_else(|| Error::parse(ptr, "expected a matrix object"))?;
    let re = rect_part(field(obj, "re", ptr)?, &format!("{ptr}/re"), rows, cols)?;
    let im = match obj.get("im") {
        Some(x) => rect_part(x, &format!("{ptr}/im"), rows, cols)?,
        None => vec![0.0; rows * cols],
    };
    Ok(CMat::from_fn(rows, cols, |i, j| C64::new(re[i * cols + j], im[i * cols + j])))
}

fn kraus_to_value(k: &CMat) -> Value {
    let part = |f: fn(&C64) -> f64| -> Value {
        Value::Array((0..k.nrows()).map(|i| Value::Array((0..k.ncols()).map(|j| json!(f(&k[(i, j)]))).collect())).collect())
    };
    json!({"re": part(|z| z.re), "im": part(|z| z.im)})
}

fn wrap(ptr: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::Parse { .. } => e,
        other => Error::parse(ptr, other.to_string()),
    }
}

/// Parses a set document found at JSON pointer `base`.
pub fn set_from_value(v: &Value, base: &str) -> Result<StateSet> {
    let obj = v.as_object().ok_or_else(|| Error::parse(base, "expected a set object"))?;
    let kind = field(obj, "kind", base)?.as_str().ok_or_else(|| Error::parse(format!("{base}/kind"), "expected a string"))?;
    let dim = usize_of(field(obj, "dim", base)?, &format!("{base}/dim"))?;
    if dim == 0 || dim > crate::hermitian::MAX_DIM {
        return Err(Error::parse(format!("{base}/dim"), format!("dimension must be in 1..={}", crate::hermitian::MAX_DIM)));
    }
    let check_dim = |got: usize| -> Result<()> {
        if got == dim {
            Ok(())
        } else {
            Err(Error::parse(format!("{base}/dim"), format!("declared {dim} but the payload has dimension {got}")))
        }
    };
    let set = match kind {
        "singleton" => {
            let ptr = format!("{base}/state");
            let rho = operator_from_value(field(obj, "state", base)?, &ptr)?;
            check_dim(rho.dim())?;
            StateSet::singleton(rho).map_err(wrap(&ptr))?
        }
        "hull" => {
            let ptr = format!("{base}/generators");
            let arr = field(obj, "generators", base)?.as_array().ok_or_else(|| Error::parse(&ptr, "expected an array"))?;
            let gens = arr
                .iter()
                .enumerate()
                .map(|(i, g)| operator_from_value(g, &format!("{ptr}/{i}")))
                .collect::<Result<Vec<_>>>()?;
            for g in &gens {
                check_dim(g.dim())?;
            }
            StateSet::hull(gens).map_err(wrap(&ptr))?
        }
        "conditional" => {
            let dims = factors(obj, base, dim)?;
            let mask = bool_list(field(obj, "identity", base)?, &format!("{base}/identity"))?;
            StateSet::conditional_with_mask(dims, mask).map_err(wrap(&format!("{base}/identity")))?
        }
        "rains" => {
            let dims = factors(obj, base, dim)?;
            let mask = bool_list(field(obj, "transposed", base)?, &format!("{base}/transposed"))?;
            StateSet::rains_with_mask(dims, mask).map_err(wrap(&format!("{base}/transposed")))?
        }
        "incoherent" => StateSet::incoherent(factors(obj, base, dim)?).map_err(wrap(base))?,
        "mana" => {
            let d = usize_of(field(obj, "d", base)?, &format!("{base}/d"))?;
            let n = usize_of(field(obj, "qudits", base)?, &format!("{base}/qudits"))?;
            let s = StateSet::mana(d, n).map_err(wrap(&format!("{base}/d")))?;
            check_dim(s.dim())?;
            s
        }
        "channel_image" => {
            let dims_out = factors(obj, base, dim)?;
            let ptr_in = format!("{base}/input_factors");
            let dims_in = usize_list(field(obj, "input_factors", base)?, &ptr_in)?;
            let d_in = dims_in.iter().try_fold(1usize, |a, &d| a.checked_mul(d)).filter(|&n| n > 0 && n <= crate::hermitian::MAX_DIM);
            let d_in = d_in.ok_or_else(|| Error::parse(&ptr_in, "invalid input dimension"))?;
            let ptr = format!("{base}/kraus");
            let arr = field(obj, "kraus", base)?.as_array().ok_or_else(|| Error::parse(&ptr, "expected an array"))?;
            let kraus = arr
                .iter()
                .enumerate()
                .map(|(i, k)| kraus_from_value(k, &format!("{ptr}/{i}"), dim, d_in))
                .collect::<Result<Vec<_>>>()?;
            StateSet::channel_image(kraus, dims_in, dims_out).map_err(wrap(&ptr))?
        }
        other => return Err(Error::parse(format!("{base}/kind"), format!("unknown set kind `{other}`"))),
    };
    Ok(set)
}

pub fn set_from_json(text: &str) -> Result<StateSet> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::parse("", format!("invalid JSON: {e}")))?;
    set_from_value(&v, "")
}

pub fn set_to_json(set: &StateSet, encoding: Encoding) -> Value {
    let mut obj = Map::new();
    obj.insert("kind".into(), json!(set.kind_name()));
    obj.insert("dim".into(), json!(set.dim()));
    match set.kind() {
        Kind::Singleton(r) => {
            obj.insert("state".into(), operator_to_json(r, encoding));
        }
        Kind::Hull(g) => {
            obj.insert("generators".into(), Value::Array(g.iter().map(|x| operator_to_json(x, encoding)).collect()));
        }
        Kind::Conditional { identity } => {
            obj.insert("factors".into(), json!(set.dims()));
            obj.insert("identity".into(), json!(identity));
        }
        Kind::Rains { transposed } => {
            obj.insert("factors".into(), json!(set.dims()));
            obj.insert("transposed".into(), json!(transposed));
        }
        Kind::Incoherent => {
            obj.insert("factors".into(), json!(set.dims()));
        }
        Kind::Mana { d } => {
            obj.insert("d".into(), json!(d));
            obj.insert("qudits".into(), json!(set.dims().len()));
        }
        Kind::ChannelImage { kraus, dims_in } => {
            obj.insert("factors".into(), json!(set.dims()));
            obj.insert("input_factors".into(), json!(dims_in));
            obj.insert("kraus".into(), Value::Array(kraus.iter().map(kraus_to_value).collect()));
        }
    }
    Value::Object(obj)
}

/// A family document: `{"family": "iid", "set": …}`,
/// `{"family": "explicit", "sets": […]}`, or a bare set (read as i.i.d.).
pub fn family_from_value(v: &Value, base: &str) -> Result<SetFamily> {
    let obj = v.as_object().ok_or_else(|| Error::parse(base, "expected an object"))?;
    let Some(tag) = obj.get("family") else {
        return Ok(SetFamily::Iid(set_from_value(v, base)?));
    };
    match tag.as_str() {
        Some("iid") => Ok(SetFamily::Iid(set_from_value(field(obj, "set", base)?, &format!("{base}/set"))?)),
        Some("explicit") => {
            let ptr = format!("{base}/sets");
            let arr = field(obj, "sets", base)?.as_array().ok_or_else(|| Error::parse(&ptr, "expected an array"))?;
            if arr.is_empty() {
                return Err(Error::parse(&ptr, "at least one set is required"));
            }
            let sets = arr.iter().enumerate().map(|(i, s)| set_from_value(s, &format!("{ptr}/{i}"))).collect::<Result<Vec<_>>>()?;
            Ok(SetFamily::Explicit(sets))
        }
        _ => Err(Error::parse(format!("{base}/family"), "expected \"iid\" or \"explicit\"")),
    }
}

pub fn family_from_json(text: &str) -> Result<SetFamily> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::parse("", format!("invalid JSON: {e}")))?;
    family_from_value(&v, "")
}

pub fn family_to_json(family: &SetFamily, encoding: Encoding) -> Value {
    match family {
        SetFamily::Iid(s) => json!({"family": "iid", "set": set_to_json(s, encoding)}),
        SetFamily::Explicit(v) => json!({"family": "explicit", "sets": v.iter().map(|s| set_to_json(s, encoding)).collect::<Vec<_>>()}),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        let docs = [
            r#"{"kind":"incoherent","dim":4,"factors":[2,2]}"#,
            r#"{"kind":"conditional","dim":4,"factors":[2,2],"identity":[true,false]}"#,
            r#"{"kind":"rains","dim":4,"factors":[2,2],"transposed":[false,true]}"#,
            r#"{"kind":"mana","dim":3,"d":3,"qudits":1}"#,
            r#"{"kind":"singleton","dim":2,"state":{"dim":2,"re":[[0.5,0.5],[0.5,0.5]]}}"#,
            r#"{"kind":"channel_image","dim":2,"input_factors":[2],"kraus":[{"re":[[1,0],[0,0]]},{"re":[[0,0],[0,1]]}]}"#,
        ];
        for d in docs {
            let s = set_from_json(d).unwrap();
            let back = set_from_value(&set_to_json(&s, Encoding::Hex), "").unwrap();
            assert_eq!(back.kind_name(), s.kind_name());
            assert_eq!(back.dims(), s.dims());
        }
    }

    #[test]
    fn pointers_name_the_bad_field() {
        let e = set_from_json(r#"{"kind":"hull","dim":2,"generators":[{"dim":2,"re":[[1,0],[0,"x"]]}]}"#).unwrap_err();
        assert!(matches!(e, Error::Parse { ref pointer, .. } if pointer == "/generators/0/re/1/1"), "{e}");
        let e = set_from_json(r#"{"kind":"mana","dim":9,"d":4,"qudits":1}"#).unwrap_err();
        assert!(matches!(e, Error::Parse { ref pointer, .. } if pointer == "/d"), "{e}");
    }
}
