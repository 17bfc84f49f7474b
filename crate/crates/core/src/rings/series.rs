use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

use super::{unsupported, DeltaRing};
use crate::error::{BackendKind, Error, Result};
use crate::sampling::SampleRng;

/// A power series over `Q` known modulo `t^trunc`.
#[derive(Clone, PartialEq, Eq)]
pub struct SeriesElement {
    /// Dense, exactly `trunc` entries.
    coeffs: Vec<BigRational>,
}

impl SeriesElement {
    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn trunc(&self) -> u32 {
        self.coeffs.len() as u32
    }
}

impl fmt::Debug for SeriesElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        write!(f, "[{}]+O(t^{})", c.join(", "), self.coeffs.len())
    }
}

/// `Q[[t]] / t^M` with `δ = d/dt`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesRing {
    trunc: u32,
}

impl SeriesRing {
    pub fn new(trunc: u32) -> Result<Self> {
        if trunc < 2 {
            return Err(Error::InvalidParams(format!(
                "series truncation {trunc} must be at least 2"
            )));
        }
        Ok(SeriesRing { trunc })
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    /// Series from integer coefficients, truncated at the ring's order.
    pub fn from_coeffs(&self, coeffs: &[i64]) -> SeriesElement {
        let mut out = vec![BigRational::zero(); self.trunc as usize];
        for (o, &c) in out.iter_mut().zip(coeffs) {
            *o = BigRational::from_integer(c.into());
        }
        SeriesElement { coeffs: out }
    }

    pub fn from_rationals(&self, coeffs: Vec<BigRational>) -> SeriesElement {
        let mut coeffs = coeffs;
        coeffs.resize(self.trunc as usize, BigRational::zero());
        SeriesElement { coeffs }
    }

    /// The variable `t`.
    pub fn variable(&self) -> SeriesElement {
        self.from_coeffs(&[0, 1])
    }

    fn constant(&self, c: BigRational, trunc: u32) -> SeriesElement {
        let mut coeffs = vec![BigRational::zero(); trunc as usize];
        if let Some(first) = coeffs.first_mut() {
            *first = c;
        }
        SeriesElement { coeffs }
    }
}

fn parse_rational(v: &serde_json::Value) -> Result<BigRational> {
    match v {
        serde_json::Value::Number(n) => n
            .as_i64()
            .map(|i| BigRational::from_integer(i.into()))
            .ok_or_else(|| Error::Input(format!("{n} is not an integer or rational string"))),
        serde_json::Value::String(s) => {
            let s = s.trim();
            match s.split_once('/') {
                Some((a, b)) => {
                    let a: BigInt = a.trim().parse().map_err(|_| bad_rational(s))?;
                    let b: BigInt = b.trim().parse().map_err(|_| bad_rational(s))?;
                    if b.is_zero() {
                        return Err(bad_rational(s));
                    }
                    Ok(BigRational::new(a, b))
                }
                None => Ok(BigRational::from_integer(
                    s.parse().map_err(|_| bad_rational(s))?,
                )),
            }
        }
        other => Err(Error::Input(format!("expected a rational, got {other}"))),
    }
}

fn bad_rational(s: &str) -> Error {
    Error::Input(format!("{s:?} is not a rational number"))
}

impl DeltaRing for SeriesRing {
    type Elem = SeriesElement;

    fn kind(&self) -> BackendKind {
        BackendKind::Kolchin
    }

    fn max_precision(&self) -> u32 {
        self.trunc
    }

    fn precision(&self, x: &SeriesElement) -> u32 {
        x.trunc()
    }

    fn truncate(&self, x: &SeriesElement, prec: u32) -> SeriesElement {
        if prec >= x.trunc() {
            return x.clone();
        }
        SeriesElement {
            coeffs: x.coeffs[..prec as usize].to_vec(),
        }
    }

    fn from_integer(&self, n: i64) -> SeriesElement {
        self.constant(BigRational::from_integer(n.into()), self.trunc)
    }

    fn from_bigint(&self, n: &BigInt) -> SeriesElement {
        self.constant(BigRational::from_integer(n.clone()), self.trunc)
    }

    fn add(&self, a: &SeriesElement, b: &SeriesElement) -> SeriesElement {
        SeriesElement {
            coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y).collect(),
        }
    }

    fn sub(&self, a: &SeriesElement, b: &SeriesElement) -> SeriesElement {
        SeriesElement {
            coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x - y).collect(),
        }
    }

    fn neg(&self, a: &SeriesElement) -> SeriesElement {
        SeriesElement {
            coeffs: a.coeffs.iter().map(|x| -x).collect(),
        }
    }

    fn mul(&self, a: &SeriesElement, b: &SeriesElement) -> SeriesElement {
        let n = a.coeffs.len().min(b.coeffs.len());
        let mut out = vec![BigRational::zero(); n];
        for (i, x) in a.coeffs.iter().take(n).enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().take(n - i).enumerate() {
                if !y.is_zero() {
                    out[i + j] += x * y;
                }
            }
        }
        SeriesElement { coeffs: out }
    }

    fn is_zero(&self, x: &SeriesElement) -> bool {
        x.coeffs.iter().all(Zero::is_zero)
    }

    fn is_unit(&self, x: &SeriesElement) -> bool {
        x.coeffs.first().is_some_and(|c| !c.is_zero())
    }

    fn invert(&self, x: &SeriesElement) -> Result<SeriesElement> {
        if !self.is_unit(x) {
            return Err(Error::NonUnit {
                value: self.render(x),
            });
        }
        let n = x.coeffs.len();
        let c0_inv = x.coeffs[0].recip();
        let mut out: Vec<BigRational> = Vec::with_capacity(n);
        out.push(c0_inv.clone());
        for k in 1..n {
            let mut acc = BigRational::zero();
            for j in 1..=k {
                if !x.coeffs[j].is_zero() {
                    acc += &x.coeffs[j] * &out[k - j];
                }
            }
            out.push(-(acc * &c0_inv));
        }
        Ok(SeriesElement { coeffs: out })
    }

    fn delta(&self, x: &SeriesElement) -> Result<SeriesElement> {
        if x.trunc() < 2 {
            return Err(Error::PrecisionExhausted {
                op: "delta",
                needed: 2,
                available: x.trunc(),
            });
        }
        let coeffs = x
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * BigRational::from_integer((i as i64).into()))
            .collect();
        Ok(SeriesElement { coeffs })
    }

    fn frobenius(&self, _x: &SeriesElement) -> Result<SeriesElement> {
        Err(unsupported("frobenius", BackendKind::Kolchin))
    }

    fn div_by_p(&self, _x: &SeriesElement) -> Result<SeriesElement> {
        Err(unsupported("div_by_p", BackendKind::Kolchin))
    }

    fn prime(&self) -> Option<u64> {
        None
    }

    fn valuation(&self, x: &SeriesElement) -> u32 {
        x.coeffs
            .iter()
            .position(|c| !c.is_zero())
            .map_or(x.trunc(), |i| i as u32)
    }

    fn random(&self, rng: &mut SampleRng) -> SeriesElement {
        let coeffs: Vec<i64> = (0..self.trunc).map(|_| rng.gen_range(-3..=3)).collect();
        self.from_coeffs(&coeffs)
    }

    fn random_unit(&self, rng: &mut SampleRng) -> SeriesElement {
        let mut x = self.random(rng);
        if x.coeffs[0].is_zero() {
            let c: i64 = if rng.gen_bool(0.5) { 1 } else { -1 } * rng.gen_range(1..=3);
            x.coeffs[0] = BigRational::from_integer(c.into());
        }
        x
    }

    fn random_constant(&self, rng: &mut SampleRng) -> SeriesElement {
        let num: i64 = rng.gen_range(-4..=4);
        let den: i64 = rng.gen_range(1..=3);
        self.constant(BigRational::new(num.into(), den.into()), self.trunc)
    }

    fn render(&self, x: &SeriesElement) -> String {
        let mut terms = Vec::new();
        for (i, c) in x.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => "t".to_string(),
                _ => format!("t^{i}"),
            };
            terms.push(match (i, c.is_one()) {
                (0, _) => c.to_string(),
                (_, true) => mono,
                _ => format!("{c}*{mono}"),
            });
        }
        terms.push(format!("O(t^{})", x.trunc()));
        terms.join(" + ")
    }

    fn to_json(&self, x: &SeriesElement) -> serde_json::Value {
        serde_json::Value::Array(
            x.coeffs
                .iter()
                .map(|c| {
                    if c.is_integer() {
                        if let Some(i) = c.to_integer().to_i64() {
                            return i.into();
                        }
                    }
                    c.to_string().into()
                })
                .collect(),
        )
    }

    fn from_json(&self, v: &serde_json::Value) -> Result<SeriesElement> {
        match v {
            serde_json::Value::Array(items) => {
                if items.len() > self.trunc as usize {
                    return Err(Error::Input(format!(
                        "series has {} coefficients, truncation is {}",
                        items.len(),
                        self.trunc
                    )));
                }
                let coeffs = items.iter().map(parse_rational).collect::<Result<_>>()?;
                Ok(self.from_rationals(coeffs))
            }
            single => Ok(self.constant(parse_rational(single)?, self.trunc)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn geometric_inverse() {
        let r = SeriesRing::new(6).unwrap();
        let inv = r.invert(&r.from_coeffs(&[1, 1])).unwrap();
        assert_eq!(inv, r.from_coeffs(&[1, -1, 1, -1, 1, -1]));
        assert!(r.invert(&r.variable()).is_err());
    }

    #[test]
    fn derivation_drops_one_coefficient() {
        let r = SeriesRing::new(5).unwrap();
        let t2 = r.mul(&r.variable(), &r.variable());
        let d = r.delta(&t2).unwrap();
        assert_eq!(d.trunc(), 4);
        assert!(r.equal(&d, &r.scale(&r.variable(), 2)));
        let c = r.from_integer(7);
        assert!(r.is_constant(&c).unwrap());
        assert!(!r.is_constant(&r.variable()).unwrap());
    }

    #[test]
    fn arithmetic_only_operations_rejected() {
        let r = SeriesRing::new(4).unwrap();
        let e = r.frobenius(&r.one()).unwrap_err();
        assert_eq!(e.name(), "unsupported");
        assert!(r.div_by_p(&r.one()).is_err());
        assert_eq!(r.prime(), None);
    }

    #[test]
    fn json_accepts_rationals() {
        let r = SeriesRing::new(4).unwrap();
        let x = r.from_json(&serde_json::json!([1, "-1/2", "3"])).unwrap();
        assert_eq!(x.coeffs()[1], q(-1, 2));
        assert_eq!(r.from_json(&r.to_json(&x)).unwrap(), x);
        assert!(r.from_json(&serde_json::json!(["1/0"])).is_err());
    }
}
