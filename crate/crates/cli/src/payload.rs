use std::fs;
use std::io::Read;
use std::path::Path;

use delta_forge::cocycles::{ClassifiedCocycle, DeltaMapHandle};
use delta_forge::jet::{parse_polynomial, JetAlgebra, JetPolynomial};
use delta_forge::matrix::SquareMatrix;
use delta_forge::{DeltaRing, Error, MatrixOps, Result};
use serde_json::Value;

/// Payload text: `@path` or an existing file path reads the file, `-` reads
/// standard input, anything else is the payload itself.
pub fn read_text(arg: &str) -> Result<String> {
    let read = |path: &str| fs::read_to_string(path).map_err(|e| Error::Input(format!("cannot read {path}: {e}")));
    if let Some(path) = arg.strip_prefix('@') {
        return read(path);
    }
    if arg == "-" {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| Error::Input(format!("cannot read standard input: {e}")))?;
        return Ok(text);
    }
    if Path::new(arg).is_file() {
        return read(arg);
    }
    Ok(arg.to_string())
}

pub fn read_json(arg: &str) -> Result<Value> {
    let text = read_text(arg)?;
    serde_json::from_str(text.trim()).map_err(|e| Error::Input(format!("payload is not valid JSON ({e}): {}", text.trim())))
}

/// An integer literal, which denotes an exact element.
pub fn is_exact_integer(v: &Value) -> bool {
    match v {
        Value::Number(n) => n.is_i64() || n.is_u64(),
        Value::String(s) => {
            let s = s.trim();
            let digits = s.strip_prefix('-').unwrap_or(s);
            !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
        }
        _ => false,
    }
}

/// A JSON array lists elements (so an extension element inside it is itself
/// an array); any other value is a single element.
pub fn elements<R: DeltaRing>(ring: &R, v: &Value) -> Result<Vec<R::Elem>> {
    match v {
        Value::Array(items) => items.iter().map(|i| ring.from_json(i)).collect(),
        other => Ok(vec![ring.from_json(other)?]),
    }
}

/// Text syntax such as `x0^2 + 3*x1'` or the serialized JSON form.
pub fn polynomial<R: DeltaRing>(alg: &JetAlgebra<R>, arg: &str) -> Result<JetPolynomial<R::Elem>> {
    let text = read_text(arg)?;
    let trimmed = text.trim();
    if trimmed.starts_with('{') {
        let v: Value = serde_json::from_str(trimmed)
            .map_err(|e| Error::Input(format!("polynomial is not valid JSON ({e})")))?;
        alg.from_json(&v)
    } else {
        parse_polynomial(alg, trimmed)
    }
}

pub fn matrix<R: DeltaRing>(ring: &R, v: &Value) -> Result<SquareMatrix<R::Elem>> {
    ring.mat_from_json(v)
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| Error::Input(format!("payload needs `{key}`: {v}")))
}

fn dimension(v: &Value, flag: Option<usize>) -> Result<usize> {
    match (v.get("n").and_then(Value::as_u64), flag) {
        (Some(n), Some(f)) if n as usize != f => Err(Error::Input(format!("payload has n = {n} but --n {f}"))),
        (Some(n), _) => Ok(n as usize),
        (None, Some(f)) => Ok(f),
        (None, None) => Err(Error::Input("dimension unknown: pass --n or an `n` field".into())),
    }
}

/// A δ-map on `GL_n` described by a payload:
///
/// * `{"omega": {...}, "v": matrix}` (or `"kind": "classified"`)
/// * `{"kind": "coboundary", "v": matrix}`
/// * `{"kind": "log-derivative", "n": 2, "nu": elem?, "v": matrix?}`, the map `ν·lδ + coboundary(v)`
/// * `{"kind": "det-delta", "n": 2}`, the map `g ↦ δ(det g)·1`
/// * `{"kind": "zero", "n": 2}`
pub fn delta_map<R>(ring: &R, v: &Value, n_flag: Option<usize>) -> Result<(DeltaMapHandle<R>, usize)>
where
    R: DeltaRing + 'static,
    R::Elem: 'static,
{
    let kind = v.get("kind").and_then(Value::as_str).unwrap_or("classified");
    let checked = |n: usize| -> Result<usize> {
        match n_flag {
            Some(f) if f != n => Err(Error::Input(format!("payload has n = {n} but --n {f}"))),
            _ => Ok(n),
        }
    };
    match kind {
        "classified" => {
            let c = ClassifiedCocycle::from_json(ring, v)?;
            let n = checked(c.n())?;
            Ok((DeltaMapHandle::classified(ring, &c), n))
        }
        "coboundary" => {
            let m = matrix(ring, field(v, "v")?)?;
            let n = checked(m.n())?;
            Ok((DeltaMapHandle::coboundary(ring, &m), n))
        }
        "log-derivative" => {
            let mut handle = DeltaMapHandle::log_derivative(ring);
            if let Some(nu) = v.get("nu") {
                handle = handle.scaled(&ring.from_json(nu)?);
            }
            let n = match v.get("v") {
                Some(m) => {
                    let m = matrix(ring, m)?;
                    handle = handle.plus(&DeltaMapHandle::coboundary(ring, &m));
                    checked(m.n())?
                }
                None => dimension(v, n_flag)?,
            };
            Ok((handle, n))
        }
        "det-delta" => {
            let handle = DeltaMapHandle::new(ring, 1, "GL_n", |r, g| {
                let d = r.delta(&r.mat_det(g))?;
                Ok(r.mat_scalar(g.n(), &d))
            });
            Ok((handle, dimension(v, n_flag)?))
        }
        "zero" => Ok((DeltaMapHandle::zero(ring), dimension(v, n_flag)?)),
        other => Err(Error::Input(format!(
            "unknown map kind {other:?}; expected classified, coboundary, log-derivative, det-delta or zero"
        ))),
    }
}
