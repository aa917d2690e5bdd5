//! JSON documents and a canonical writer (sorted keys, `%.17g` floats).

use std::fmt::Write as _;

use num_complex::Complex64;
use serde_json::{json, Map, Value};

use crate::colligation::{Colligation, Flavor, Shape};
use crate::divisor::{DegreeAccounting, DivisorSummary};
use crate::error::{Error, Result};
use crate::invariants::{Fingerprint, Verdict};
use crate::matrix::Mat;
use crate::poly::SparsePoly;
use crate::scalar::{Field, GaussRat, Mode};

/// Scalars with a JSON form: `[re, im]` for floats, `"p/q+r/t*i"` for exact.
pub trait JsonScalar: Field {
    fn to_json(&self) -> Value;
    fn from_json(v: &Value) -> Result<Self>;
}

impl JsonScalar for Complex64 {
    fn to_json(&self) -> Value {
        json!([self.re, self.im])
    }

    fn from_json(v: &Value) -> Result<Self> {
        let num = |x: &Value| x.as_f64().ok_or_else(|| Error::Parse(format!("expected a number, got {x}")));
        match v {
            Value::Array(pair) if pair.len() == 2 => Ok(Complex64::new(num(&pair[0])?, num(&pair[1])?)),
            Value::Number(_) => Ok(Complex64::new(num(v)?, 0.0)),
            Value::String(s) => Ok(s.parse::<GaussRat>()?.to_c64()),
            other => Err(Error::Parse(format!("bad float scalar {other}"))),
        }
    }
}

impl JsonScalar for GaussRat {
    fn to_json(&self) -> Value {
        Value::String(self.to_string())
    }

    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::String(s) => s.parse(),
            Value::Number(n) => n
                .as_i64()
                .map(GaussRat::from_i64)
                .ok_or_else(|| Error::Parse(format!("exact scalars must be integers or strings, got {n}"))),
            other => Err(Error::Parse(format!("bad exact scalar {other}"))),
        }
    }
}

pub fn matrix_to_json<F: JsonScalar>(m: &Mat<F>) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|r| Value::Array(m.row(r).iter().map(F::to_json).collect()))
            .collect(),
    )
}

pub fn matrix_from_json<F: JsonScalar>(v: &Value) -> Result<Mat<F>> {
    let rows = v
        .as_array()
        .ok_or_else(|| Error::Parse("a matrix is an array of rows".into()))?;
    let rows = rows
        .iter()
        .map(|row| {
            row.as_array()
                .ok_or_else(|| Error::Parse("a matrix row is an array".into()))?
                .iter()
                .map(F::from_json)
                .collect::<Result<Vec<F>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    if rows.is_empty() {
        return Ok(Mat::zeros(0, 0));
    }
    Mat::from_rows(rows)
}

/// A colligation of either scalar mode.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyColligation {
    Exact(Colligation<GaussRat>),
    Float(Colligation<Complex64>),
}

impl AnyColligation {
    pub fn mode(&self) -> Mode {
        match self {
            AnyColligation::Exact(_) => Mode::Exact,
            AnyColligation::Float(_) => Mode::Float,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            AnyColligation::Exact(c) => colligation_to_json(c),
            AnyColligation::Float(c) => colligation_to_json(c),
        }
    }
}

impl From<Colligation<GaussRat>> for AnyColligation {
    fn from(c: Colligation<GaussRat>) -> Self {
        AnyColligation::Exact(c)
    }
}

impl From<Colligation<Complex64>> for AnyColligation {
    fn from(c: Colligation<Complex64>) -> Self {
        AnyColligation::Float(c)
    }
}

pub fn colligation_to_json<F: JsonScalar>(c: &Colligation<F>) -> Value {
    let s = c.shape();
    json!({
        "alpha": s.alpha,
        "m": s.m,
        "N": s.n,
        "mode": F::MODE.as_str(),
        "flavor": c.flavor().as_str(),
        "entries": matrix_to_json(c.matrix()),
    })
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| Error::Parse(format!("missing field {key:?}")))
}

fn count(obj: &Map<String, Value>, key: &str) -> Result<usize> {
    field(obj, key)?
        .as_u64()
        .map(|v| v as usize)
        .ok_or_else(|| Error::Parse(format!("{key:?} must be a nonnegative integer")))
}

fn typed_colligation<F: JsonScalar>(obj: &Map<String, Value>, shape: Shape, flavor: Flavor) -> Result<Colligation<F>> {
    let entries = matrix_from_json::<F>(field(obj, "entries")?)?;
    Colligation::new(shape, flavor, entries)
}

/// Parses and validates a colligation document.
pub fn colligation_from_json(v: &Value) -> Result<AnyColligation> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Parse("a colligation document is an object".into()))?;
    let shape = Shape::new(count(obj, "alpha")?, count(obj, "m")?, count(obj, "N")?)?;
    let mode: Mode = field(obj, "mode")?
        .as_str()
        .ok_or_else(|| Error::Parse("\"mode\" must be a string".into()))?
        .parse()?;
    let flavor: Flavor = match obj.get("flavor") {
        Some(f) => f
            .as_str()
            .ok_or_else(|| Error::Parse("\"flavor\" must be a string".into()))?
            .parse()?,
        None => Flavor::General,
    };
    Ok(match mode {
        Mode::Exact => AnyColligation::Exact(typed_colligation(obj, shape, flavor)?),
        Mode::Float => AnyColligation::Float(typed_colligation(obj, shape, flavor)?),
    })
}

pub fn parse_colligation(text: &str) -> Result<AnyColligation> {
    colligation_from_json(&serde_json::from_str(text)?)
}

pub fn poly_to_json<F: JsonScalar>(p: &SparsePoly<F>) -> Value {
    json!({
        "variables": p.vars().iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        "terms": p.terms().map(|(e, c)| json!({"exponents": e, "coeff": c.to_json()})).collect::<Vec<_>>(),
    })
}

pub fn divisor_summary_to_json<F: JsonScalar>(s: &DivisorSummary<F>, with_terms: bool) -> Value {
    let mut obj = Map::new();
    obj.insert("degree".into(), json!(s.total_degree));
    obj.insert("deltaMult".into(), json!(s.delta_multiplicity));
    obj.insert("residualDegree".into(), json!(s.residual_degree));
    match s.det_lambda {
        DegreeAccounting::Multiplicity(l) => {
            obj.insert("detLambdaMult".into(), json!(l));
        }
        DegreeAccounting::Inapplicable { deficiency, .. } => {
            obj.insert("detLambdaMult".into(), Value::Null);
            obj.insert("degreeDeficiency".into(), json!(deficiency));
        }
    }
    if with_terms {
        obj.insert("pTerms".into(), poly_to_json(&s.p));
    }
    Value::Object(obj)
}

pub fn fingerprint_to_json<F: JsonScalar>(f: &Fingerprint<F>) -> Value {
    let keyed = |it: Vec<(String, Value)>| Value::Object(it.into_iter().collect());
    json!({
        "maxWordLength": f.max_len,
        "traceWords": keyed(f.trace_words.iter().map(|(k, v)| (k.to_string(), v.to_json())).collect()),
        "cwb": keyed(f.cwb.iter().map(|(k, v)| (k.to_string(), v.to_json())).collect()),
        "a": matrix_to_json(&f.a),
        "slDets": keyed(f.sl_dets.iter().map(|(k, v)| (k.to_string(), v.to_json())).collect()),
    })
}

pub fn verdict_to_json<F: JsonScalar>(v: &Verdict<F>) -> Value {
    match v {
        Verdict::Conjugate { witness } => json!({"verdict": v.as_str(), "witness": matrix_to_json(witness)}),
        _ => json!({"verdict": v.as_str()}),
    }
}

/// C's `%.17g`.
pub fn fmt_g17(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0.0".into() } else { "0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let strip = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if !(-4..17).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", strip(mantissa), exp.abs())
    } else {
        strip(&format!("{x:.*}", (16 - exp) as usize))
    }
}

fn write_canonical(v: &Value, out: &mut String) {
    match v {
        Value::Null | Value::Bool(_) | Value::String(_) => out.push_str(&v.to_string()),
        Value::Number(n) => {
            if n.is_f64() {
                let x = n.as_f64().expect("f64");
                if x.is_finite() {
                    out.push_str(&fmt_g17(x));
                } else {
                    out.push_str("null");
                }
            } else {
                let _ = write!(out, "{n}");
            }
        }
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_canonical(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push(':');
                write_canonical(&map[k], out);
            }
            out.push('}');
        }
    }
}

/// Compact JSON with sorted keys and `%.17g` floats.
pub fn to_canonical_string(v: &Value) -> String {
    let mut out = String::new();
    write_canonical(v, &mut out);
    out
}
