//! JSON payloads: reading inputs and serializing results.
//!
//! Every numeric value travels as a scalar-grammar string (`"3*v^2-1/2"`);
//! plain JSON integers are accepted on input as a convenience.

use std::collections::BTreeMap;
use std::fs;
use std::io::Read;

use hallshuffle::cohp1::{Bundle, Coherent, HallElement, HallTensor, PlaceP1, Torsion};
use hallshuffle::ff::FiniteField;
use hallshuffle::finmod::{LocalHallElement, LocalHallTensor, Partition};
use hallshuffle::shuffle::{ComponentId, Kernel, ShuffleElement};
use hallshuffle::witt::{CurveData, WittVector};
use hallshuffle::{RationalFunction, Scalar, ScalarMode};
use serde_json::{json, Map, Value};

use crate::CliError;

/// A payload argument: inline JSON, `-` for stdin, or a file path
/// (optionally prefixed with `@`).
pub fn read_payload(arg: &str, at: &str) -> Result<Value, CliError> {
    let t = arg.trim_start();
    let text = if t.starts_with('{') || t.starts_with('[') || t.starts_with('"') {
        arg.to_string()
    } else if arg == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| CliError::input(at, format!("cannot read stdin: {e}")))?;
        s
    } else {
        let path = arg.strip_prefix('@').unwrap_or(arg);
        fs::read_to_string(path).map_err(|e| CliError::input(at, format!("cannot read `{path}`: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| CliError::input(at, format!("invalid JSON: {e}")))
}

fn object<'a>(v: &'a Value, at: &str) -> Result<&'a Map<String, Value>, CliError> {
    v.as_object().ok_or_else(|| CliError::input(at, "expected a JSON object"))
}

fn array<'a>(v: &'a Value, at: &str) -> Result<&'a Vec<Value>, CliError> {
    v.as_array().ok_or_else(|| CliError::input(at, "expected a JSON array"))
}

fn integer(v: &Value, at: &str) -> Result<i64, CliError> {
    v.as_i64().ok_or_else(|| CliError::input(at, "expected an integer"))
}

pub fn scalar(v: &Value, mode: ScalarMode, at: &str) -> Result<Scalar, CliError> {
    match v {
        Value::String(s) => Scalar::parse(s, mode).map_err(|e| CliError::input(at, e.to_string())),
        Value::Number(n) if n.is_i64() => Ok(Scalar::from_int(n.as_i64().unwrap())),
        _ => Err(CliError::input(at, "expected a scalar string such as \"3*v^2-1/2\"")),
    }
}

pub fn scalar_str(s: &str, mode: ScalarMode, at: &str) -> Result<Scalar, CliError> {
    Scalar::parse(s, mode).map_err(|e| CliError::input(at, e.to_string()))
}

fn ratfun(v: &Value, mode: ScalarMode, at: &str) -> Result<RationalFunction, CliError> {
    let s = v.as_str().ok_or_else(|| CliError::input(at, "expected a rational-function string"))?;
    RationalFunction::parse(s, mode).map_err(|e| CliError::input(at, e.to_string()))
}

fn strings(xs: &[Scalar]) -> Value {
    Value::Array(xs.iter().map(|x| Value::String(x.to_string())).collect())
}

// ----- Witt vectors and series -----

/// `{"trunc": N, "b": ["b1", ...]}`; `b` may be shorter than N (zero-padded).
pub fn witt(v: &Value, mode: ScalarMode, at: &str) -> Result<WittVector, CliError> {
    let o = object(v, at)?;
    for k in o.keys() {
        if k != "trunc" && k != "b" {
            return Err(CliError::input(&format!("{at}.{k}"), "unknown field"));
        }
    }
    let b = array(o.get("b").ok_or_else(|| CliError::input(at, "missing field `b`"))?, &format!("{at}.b"))?;
    let trunc = match o.get("trunc") {
        Some(t) => {
            let n = integer(t, &format!("{at}.trunc"))?;
            usize::try_from(n).map_err(|_| CliError::input(&format!("{at}.trunc"), "must be non-negative"))?
        }
        None => b.len(),
    };
    if b.len() > trunc {
        return Err(CliError::input(&format!("{at}.b"), format!("{} coefficients exceed trunc {trunc}", b.len())));
    }
    let mut coeffs = b.iter().enumerate().map(|(i, c)| scalar(c, mode, &format!("{at}.b[{i}]"))).collect::<Result<Vec<_>, _>>()?;
    coeffs.resize(trunc, Scalar::zero());
    Ok(WittVector::new(coeffs))
}

pub fn witt_json(w: &WittVector) -> Value {
    json!({"trunc": w.trunc(), "b": strings(w.b())})
}

pub fn series_json(s: &[Scalar]) -> Value {
    json!({"trunc": s.len().saturating_sub(1), "series": strings(s)})
}

/// `{"q": 2, "g": 0, "P": [1]}`.
pub fn curve(v: &Value, at: &str) -> Result<CurveData, CliError> {
    let o = object(v, at)?;
    let q = o.get("q").map(|x| integer(x, &format!("{at}.q"))).transpose()?.ok_or_else(|| CliError::input(at, "missing field `q`"))?;
    let g = o.get("g").map(|x| integer(x, &format!("{at}.g"))).transpose()?.unwrap_or(0);
    let p = match o.get("P") {
        Some(p) => array(p, &format!("{at}.P"))?.iter().enumerate().map(|(i, c)| integer(c, &format!("{at}.P[{i}]"))).collect::<Result<Vec<_>, _>>()?,
        None => vec![1],
    };
    if q < 2 || g < 0 {
        return Err(CliError::input(at, "q must be ≥ 2 and g ≥ 0"));
    }
    CurveData::new(q as u64, g as u32, p).map_err(|e| CliError::input(at, e.to_string()))
}

// ----- local Hall algebra -----

pub fn partition(s: &str, at: &str) -> Result<Partition, CliError> {
    Partition::parse(s).map_err(|e| CliError::input(at, e.to_string()))
}

fn partition_value(v: &Value, at: &str) -> Result<Partition, CliError> {
    let parts = array(v, at)?;
    let mut out = Vec::new();
    for (i, p) in parts.iter().enumerate() {
        let n = integer(p, &format!("{at}[{i}]"))?;
        if n <= 0 {
            return Err(CliError::input(&format!("{at}[{i}]"), "parts must be positive"));
        }
        out.push(n as u32);
    }
    Ok(Partition::new(out))
}

/// `{"[1,1]": "3", "[2]": "1"}`.
pub fn local_element(v: &Value, mode: ScalarMode, at: &str) -> Result<LocalHallElement, CliError> {
    let mut out = LocalHallElement::zero();
    for (k, c) in object(v, at)? {
        let kat = format!("{at}[{k:?}]");
        out.add_term(partition(k, &kat)?, scalar(c, mode, &kat)?);
    }
    Ok(out)
}

pub fn local_element_json(e: &LocalHallElement) -> Value {
    Value::Object(e.terms().iter().map(|(p, c)| (p.to_string(), Value::String(c.to_string()))).collect())
}

pub fn local_tensor_json(t: &LocalHallTensor) -> Value {
    Value::Object(t.terms().iter().map(|((a, b), c)| (format!("{a}⊗{b}"), Value::String(c.to_string()))).collect())
}

// ----- Hall algebra of P¹ -----

/// Torsion part: `{"x^2+x+1": [2,1], "inf": [1]}`.
pub fn torsion(v: &Value, field: &FiniteField, at: &str) -> Result<Torsion, CliError> {
    let mut parts = Vec::new();
    for (x, l) in object(v, at)? {
        let xat = format!("{at}[{x:?}]");
        let place = PlaceP1::parse(x, field).map_err(|e| CliError::input(&xat, e.to_string()))?;
        let lambda = partition_value(l, &xat)?;
        if !lambda.is_empty() {
            parts.push((place, lambda));
        }
    }
    Ok(Torsion::from_parts(parts))
}

/// `{"bundle": [1,0], "torsion": {"x^2+x+1": [2,1]}}`, either field optional.
pub fn coherent(v: &Value, field: &FiniteField, at: &str) -> Result<Coherent, CliError> {
    let o = object(v, at)?;
    for k in o.keys() {
        if k != "bundle" && k != "torsion" {
            return Err(CliError::input(&format!("{at}.{k}"), "unknown field"));
        }
    }
    let degrees = match o.get("bundle") {
        Some(b) => array(b, &format!("{at}.bundle"))?.iter().enumerate().map(|(i, d)| integer(d, &format!("{at}.bundle[{i}]"))).collect::<Result<Vec<_>, _>>()?,
        None => Vec::new(),
    };
    let t = match o.get("torsion") {
        Some(t) => torsion(t, field, &format!("{at}.torsion"))?,
        None => Torsion::zero(),
    };
    Ok(Coherent::new(Bundle::new(degrees), t))
}

fn coherent_key(k: &str, field: &FiniteField, at: &str) -> Result<Coherent, CliError> {
    let v: Value = serde_json::from_str(k).map_err(|e| CliError::input(at, format!("label is not JSON: {e}")))?;
    coherent(&v, field, at)
}

/// Map from coherent labels (JSON text) to scalars.
pub fn hall_element(v: &Value, field: &FiniteField, mode: ScalarMode, at: &str) -> Result<HallElement, CliError> {
    let mut out = HallElement::zero();
    for (k, c) in object(v, at)? {
        let kat = format!("{at}[{k:?}]");
        out.add_term(coherent_key(k, field, &kat)?, scalar(c, mode, &kat)?);
    }
    Ok(out)
}

pub fn hall_element_json(e: &HallElement) -> Value {
    Value::Object(e.terms().iter().map(|(c, x)| (c.to_string(), Value::String(x.to_string()))).collect())
}

/// Map from `"A⊗B"` (two coherent labels) to scalars.
pub fn hall_tensor(v: &Value, field: &FiniteField, mode: ScalarMode, at: &str) -> Result<HallTensor, CliError> {
    let mut out = HallTensor::zero();
    for (k, c) in object(v, at)? {
        let kat = format!("{at}[{k:?}]");
        let (a, b) = k.split_once('⊗').ok_or_else(|| CliError::input(&kat, "expected \"A⊗B\""))?;
        out.add_term((coherent_key(a.trim(), field, &kat)?, coherent_key(b.trim(), field, &kat)?), scalar(c, mode, &kat)?);
    }
    Ok(out)
}

pub fn hall_tensor_json(t: &HallTensor) -> Value {
    Value::Object(t.terms().iter().map(|((a, b), x)| (format!("{a}⊗{b}"), Value::String(x.to_string()))).collect())
}

// ----- shuffle algebra -----

fn word(k: &str, at: &str) -> Result<Vec<ComponentId>, CliError> {
    let inner = k.trim().strip_prefix('[').and_then(|x| x.strip_suffix(']')).ok_or_else(|| CliError::input(at, "expected a label like \"[0,0]\""))?;
    inner
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<ComponentId>().map_err(|_| CliError::input(at, format!("bad component id `{p}`"))))
        .collect()
}

/// `{"[0,0]": "t1^2*t2^-1"}`.
pub fn shuffle_element(v: &Value, mode: ScalarMode, at: &str) -> Result<ShuffleElement, CliError> {
    let mut terms = Vec::new();
    for (k, f) in object(v, at)? {
        let kat = format!("{at}[{k:?}]");
        terms.push((word(k, &kat)?, ratfun(f, mode, &kat)?));
    }
    Ok(ShuffleElement::from_terms(terms))
}

pub fn shuffle_element_json(e: &ShuffleElement) -> Value {
    Value::Object(
        e.terms()
            .iter()
            .map(|(w, f)| {
                let labels: Vec<String> = w.iter().map(|i| i.to_string()).collect();
                (format!("[{}]", labels.join(",")), Value::String(f.to_string()))
            })
            .collect(),
    )
}

fn kernel_map(v: &Value, mode: ScalarMode, at: &str) -> Result<BTreeMap<(ComponentId, ComponentId), RationalFunction>, CliError> {
    let mut pairs = Vec::new();
    for (k, f) in object(v, at)? {
        let kat = format!("{at}[{k:?}]");
        let s = f.as_str().ok_or_else(|| CliError::input(&kat, "expected a rational-function string"))?;
        pairs.push((k.clone(), s.to_string()));
    }
    Kernel::from_pairs(&pairs, mode).map(|k| k.entries().clone()).map_err(|e| CliError::input(at, e.to_string()))
}

/// Either a bare map `{"i,j": "..."}` or `{"c": {...}, "lambda": {...}, "lambda_tilde": {...}}`.
pub fn kernel(v: &Value, mode: ScalarMode, at: &str) -> Result<Kernel, CliError> {
    let o = object(v, at)?;
    if !o.contains_key("c") {
        return Kernel::new(kernel_map(v, mode, at)?).map_err(|e| CliError::input(at, e.to_string()));
    }
    for k in o.keys() {
        if !["c", "lambda", "lambda_tilde"].contains(&k.as_str()) {
            return Err(CliError::input(&format!("{at}.{k}"), "unknown field"));
        }
    }
    let mut k = Kernel::new(kernel_map(&o["c"], mode, &format!("{at}.c"))?).map_err(|e| CliError::input(at, e.to_string()))?;
    if let Some(l) = o.get("lambda") {
        k = k.with_lambda(kernel_map(l, mode, &format!("{at}.lambda"))?).map_err(|e| CliError::input(&format!("{at}.lambda"), e.to_string()))?;
    }
    if let Some(l) = o.get("lambda_tilde") {
        k = k.with_lambda_tilde(kernel_map(l, mode, &format!("{at}.lambda_tilde"))?);
    }
    Ok(k)
}

fn kernel_map_json(m: &BTreeMap<(ComponentId, ComponentId), RationalFunction>) -> Value {
    Value::Object(m.iter().map(|((i, j), f)| (format!("{i},{j}"), Value::String(f.to_string()))).collect())
}

pub fn kernel_json(k: &Kernel, coboundary: bool) -> Value {
    if !coboundary {
        return kernel_map_json(k.entries());
    }
    let mut o = Map::new();
    o.insert("c".into(), kernel_map_json(k.entries()));
    if let Some(l) = k.lambda() {
        o.insert("lambda".into(), kernel_map_json(l));
    }
    if let Some(l) = k.lambda_tilde() {
        o.insert("lambda_tilde".into(), kernel_map_json(l));
    }
    Value::Object(o)
}

/// `[[component, degree], ...]`.
pub fn generators(v: &Value, at: &str) -> Result<Vec<(ComponentId, i64)>, CliError> {
    array(v, at)?
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let gat = format!("{at}[{i}]");
            let pair = array(g, &gat)?;
            if pair.len() != 2 {
                return Err(CliError::input(&gat, "expected [component, degree]"));
            }
            let c = integer(&pair[0], &gat)?;
            let c = ComponentId::try_from(c).map_err(|_| CliError::input(&gat, "bad component id"))?;
            Ok((c, integer(&pair[1], &gat)?))
        })
        .collect()
}
