use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::Rng;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use super::fp::{inverse_mod_poly, is_irreducible, is_prime};
use super::DeltaRing;
use crate::error::{BackendKind, Error, Result};
use crate::sampling::SampleRng;

type Coeffs = SmallVec<[u64; 4]>;

/// Configuration of `W(F_{p^m}) / p^N`.
///
/// JSON form: `{"p": 3, "prec": 8, "m": 2, "modulus": [1, 0, 1]}` with the
/// modulus low-to-high and omitted when `m = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingParams {
    pub p: u64,
    pub prec: u32,
    #[serde(default = "default_degree")]
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<Vec<u64>>,
}

fn default_degree() -> usize {
    1
}

impl RingParams {
    /// `Z/p^prec`, residue field `F_p`.
    pub fn prime_field(p: u64, prec: u32) -> Self {
        RingParams {
            p,
            prec,
            m: 1,
            modulus: None,
        }
    }

    /// Unramified extension of degree `modulus.len() - 1`.
    pub fn extension(p: u64, prec: u32, modulus: Vec<u64>) -> Self {
        RingParams {
            p,
            prec,
            m: modulus.len().saturating_sub(1),
            modulus: Some(modulus),
        }
    }

    /// Degree `m` over `F_p` with the smallest monic irreducible modulus,
    /// ordering candidates by their coefficient lists read high-to-low.
    pub fn with_default_modulus(p: u64, prec: u32, m: usize) -> Result<Self> {
        if m == 1 {
            return Ok(Self::prime_field(p, prec));
        }
        if p == 2 || !is_prime(p) {
            return Err(Error::InvalidParams(format!("p = {p} is not an odd prime")));
        }
        let count = (p as u128).checked_pow(m as u32).filter(|&c| c <= 1 << 24).ok_or_else(|| {
            Error::InvalidParams(format!("no default modulus search for p = {p}, m = {m}"))
        })?;
        for index in 0..count as u64 {
            let mut modulus = vec![0u64; m + 1];
            modulus[m] = 1;
            let mut rest = index;
            for c in modulus.iter_mut().take(m) {
                *c = rest % p;
                rest /= p;
            }
            if is_irreducible(&modulus, p) {
                return Ok(Self::extension(p, prec, modulus));
            }
        }
        Err(Error::InvalidParams(format!("no irreducible polynomial of degree {m} over F_{p}")))
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        RingParams {
            prec,
            ..self.clone()
        }
    }
}

/// An element of `(Z/p^prec)[t] / (M(t))`, coefficients low-to-high and
/// canonical in `[0, p^prec)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct WittElement {
    coeffs: Coeffs,
    prec: u32,
}

impl WittElement {
    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }
}

impl fmt::Debug for WittElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}@{}", self.coeffs.as_slice(), self.prec)
    }
}

/// The truncated Witt ring `W(F_{p^m}) / p^N` with its Frobenius lift.
///
/// Cheap to clone; all state is immutable and shared.
#[derive(Clone)]
pub struct WittRing {
    inner: Arc<Inner>,
}

struct Inner {
    params: RingParams,
    p: u64,
    prec: u32,
    m: usize,
    /// Monic, length `m + 1`; its integer lift is the modulus of the ring.
    modulus: Vec<u64>,
    /// `p^0 ..= p^prec`
    powers: Vec<u64>,
    /// `φ(t)^i` for `i < m`, at full precision.
    frob_basis: Vec<WittElement>,
}

impl fmt::Debug for WittRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WittRing")
            .field("p", &self.inner.p)
            .field("prec", &self.inner.prec)
            .field("m", &self.inner.m)
            .field("modulus", &self.inner.modulus)
            .finish()
    }
}

#[inline]
fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

#[inline]
fn addmod(a: u64, b: u64, m: u64) -> u64 {
    let s = a + b;
    if s >= m {
        s - m
    } else {
        s
    }
}

#[inline]
fn submod(a: u64, b: u64, m: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + m - b
    }
}

impl WittRing {
    pub fn new(params: RingParams) -> Result<Self> {
        let p = params.p;
        if p == 2 || !is_prime(p) {
            return Err(Error::InvalidParams(format!("p = {p} is not an odd prime")));
        }
        if params.prec < 2 {
            return Err(Error::InvalidParams(format!(
                "prec = {} must be at least 2",
                params.prec
            )));
        }
        if params.m == 0 {
            return Err(Error::InvalidParams("residue degree m must be positive".into()));
        }
        let mut powers = vec![1u64];
        for _ in 0..params.prec {
            let next = powers
                .last()
                .unwrap()
                .checked_mul(p)
                .filter(|&v| v < (1u64 << 62))
                .ok_or_else(|| {
                    Error::InvalidParams(format!("p^prec = {}^{} exceeds 2^62", p, params.prec))
                })?;
            powers.push(next);
        }
        let modulus = match (&params.modulus, params.m) {
            (None, 1) => vec![0, 1],
            (None, m) => {
                return Err(Error::InvalidParams(format!(
                    "m = {m} requires an explicit irreducible modulus"
                )))
            }
            (Some(md), m) => {
                if md.len() != m + 1 {
                    return Err(Error::InvalidParams(format!(
                        "modulus has degree {} but m = {m}",
                        md.len().saturating_sub(1)
                    )));
                }
                if md[m] != 1 {
                    return Err(Error::InvalidParams("modulus must be monic".into()));
                }
                if let Some(c) = md.iter().find(|&&c| c >= p) {
                    return Err(Error::InvalidParams(format!(
                        "modulus coefficient {c} is not reduced mod {p}"
                    )));
                }
                if !is_irreducible(md, p) {
                    return Err(Error::InvalidParams(format!(
                        "modulus {md:?} is reducible over F_{p}"
                    )));
                }
                md.clone()
            }
        };
        let m = params.m;
        let prec = params.prec;
        let mut ring = WittRing {
            inner: Arc::new(Inner {
                params,
                p,
                prec,
                m,
                modulus,
                powers,
                frob_basis: Vec::new(),
            }),
        };
        let basis = ring.compute_frobenius_basis();
        Arc::get_mut(&mut ring.inner)
            .expect("freshly built ring is uniquely owned")
            .frob_basis = basis;
        Ok(ring)
    }

    pub fn params(&self) -> &RingParams {
        &self.inner.params
    }

    pub fn p(&self) -> u64 {
        self.inner.p
    }

    pub fn prec(&self) -> u32 {
        self.inner.prec
    }

    pub fn residue_degree(&self) -> usize {
        self.inner.m
    }

    /// Size of the residue field `q = p^m`.
    pub fn residue_field_size(&self) -> u64 {
        self.inner.p.pow(self.inner.m as u32)
    }

    /// `p^k` for `k <= prec`.
    pub fn p_power(&self, k: u32) -> u64 {
        self.inner.powers[k as usize]
    }

    fn modulus_at(&self, prec: u32) -> u64 {
        self.inner.powers[prec as usize]
    }

    /// Element from raw coefficients (any integers), reduced at precision `prec`.
    pub fn element(&self, coeffs: &[i64], prec: u32) -> WittElement {
        let prec = prec.min(self.inner.prec);
        let md = self.modulus_at(prec) as i128;
        let mut out: Coeffs = SmallVec::from_elem(0, self.inner.m);
        // degree >= m inputs are reduced modulo the lifted polynomial
        let mut wide: Vec<u64> = coeffs
            .iter()
            .map(|&c| (c as i128).rem_euclid(md) as u64)
            .collect();
        self.reduce_poly(&mut wide, prec);
        for (o, w) in out.iter_mut().zip(wide) {
            *o = w;
        }
        WittElement { coeffs: out, prec }
    }

    /// The image of the residue generator `t`.
    pub fn generator(&self) -> WittElement {
        self.element(&[0, 1], self.inner.prec)
    }

    /// Reduce a polynomial of any degree modulo the lifted modulus, in place;
    /// `poly` is left with length `m`.
    fn reduce_poly(&self, poly: &mut Vec<u64>, prec: u32) {
        let m = self.inner.m;
        let md = self.modulus_at(prec);
        let modulus = &self.inner.modulus;
        while poly.len() > m {
            let top = poly.pop().unwrap() % md;
            if top != 0 {
                let shift = poly.len() - m;
                for j in 0..m {
                    let t = mulmod(top, modulus[j], md);
                    poly[shift + j] = submod(poly[shift + j] % md, t, md);
                }
            }
        }
        poly.resize(m, 0);
    }

    fn zero_at(&self, prec: u32) -> WittElement {
        WittElement {
            coeffs: SmallVec::from_elem(0, self.inner.m),
            prec,
        }
    }

    /// Reduction mod p, as a vector over `F_p`.
    pub fn residue(&self, x: &WittElement) -> Vec<u64> {
        x.coeffs.iter().map(|c| c % self.inner.p).collect()
    }

    /// Teichmüller representative of a residue-field element given by its
    /// coefficients mod p.
    pub fn teichmueller(&self, residue: &[u64]) -> Result<WittElement> {
        if residue.len() > self.inner.m {
            return Err(Error::Input(format!(
                "residue {residue:?} has more than m = {} coefficients",
                self.inner.m
            )));
        }
        let coeffs: Vec<i64> = residue
            .iter()
            .map(|&c| (c % self.inner.p) as i64)
            .collect();
        let mut x = self.element(&coeffs, self.inner.prec);
        // x <- x^q gains one digit per step
        for _ in 0..(self.inner.prec - 1) {
            for _ in 0..self.inner.m {
                x = self.pow(&x, self.inner.p);
            }
        }
        Ok(x)
    }

    /// Teichmüller representative of the reduction of `x`, at `x`'s precision.
    pub fn teichmueller_of(&self, x: &WittElement) -> WittElement {
        let t = self
            .teichmueller(&self.residue(x))
            .expect("residue has m coefficients");
        self.truncate(&t, x.prec)
    }

    /// All `q` Teichmüller representatives, including 0.
    pub fn all_teichmueller(&self) -> Vec<WittElement> {
        let q = self.residue_field_size();
        (0..q)
            .map(|mut idx| {
                let digits: Vec<u64> = (0..self.inner.m)
                    .map(|_| {
                        let d = idx % self.inner.p;
                        idx /= self.inner.p;
                        d
                    })
                    .collect();
                self.teichmueller(&digits).expect("m digits")
            })
            .collect()
    }

    fn eval_modulus_at(&self, x: &WittElement) -> WittElement {
        // Horner: M(x)
        let prec = x.prec;
        let mut acc = self.zero_at(prec);
        for &c in self.inner.modulus.iter().rev() {
            acc = self.mul(&acc, x);
            acc.coeffs[0] = addmod(acc.coeffs[0], c % self.modulus_at(prec), self.modulus_at(prec));
        }
        acc
    }

    fn eval_modulus_derivative_at(&self, x: &WittElement) -> WittElement {
        let prec = x.prec;
        let md = self.modulus_at(prec);
        let mut acc = self.zero_at(prec);
        for (j, &c) in self.inner.modulus.iter().enumerate().skip(1).rev() {
            acc = self.mul(&acc, x);
            acc.coeffs[0] = addmod(acc.coeffs[0], mulmod(c, j as u64, md), md);
        }
        acc
    }

    /// Powers `θ^i`, `i < m`, of the root `θ` of the lifted modulus that is
    /// congruent to `t^p` mod p. Newton iteration converges quadratically.
    fn compute_frobenius_basis(&self) -> Vec<WittElement> {
        let m = self.inner.m;
        let prec = self.inner.prec;
        if m == 1 {
            return vec![self.element(&[1], prec)];
        }
        let mut theta = self.pow(&self.generator(), self.inner.p);
        for _ in 0..64 {
            let value = self.eval_modulus_at(&theta);
            if self.is_zero(&value) {
                break;
            }
            let slope = self
                .invert(&self.eval_modulus_derivative_at(&theta))
                .expect("irreducible modulus is separable");
            theta = self.sub(&theta, &self.mul(&value, &slope));
        }
        debug_assert!(self.is_zero(&self.eval_modulus_at(&theta)));
        let mut basis = Vec::with_capacity(m);
        let mut acc = self.one();
        for _ in 0..m {
            basis.push(acc.clone());
            acc = self.mul(&acc, &theta);
        }
        basis
    }

    /// `φ(t)` at full precision.
    pub fn frobenius_of_generator(&self) -> WittElement {
        if self.inner.m == 1 {
            self.zero()
        } else {
            self.inner.frob_basis[1].clone()
        }
    }

    fn binary<F: Fn(u64, u64, u64) -> u64>(
        &self,
        a: &WittElement,
        b: &WittElement,
        op: F,
    ) -> WittElement {
        let prec = a.prec.min(b.prec);
        let md = self.modulus_at(prec);
        let coeffs = a
            .coeffs
            .iter()
            .zip(b.coeffs.iter())
            .map(|(&x, &y)| op(x % md, y % md, md))
            .collect();
        WittElement { coeffs, prec }
    }

    pub(crate) fn scalar_mul_u64(&self, x: &WittElement, c: u64) -> WittElement {
        let md = self.modulus_at(x.prec);
        let c = c % md;
        WittElement {
            coeffs: x.coeffs.iter().map(|&v| mulmod(v, c, md)).collect(),
            prec: x.prec,
        }
    }

    fn reduce_bigint(&self, n: &BigInt, prec: u32) -> u64 {
        let md = BigInt::from(self.modulus_at(prec));
        n.mod_floor(&md).to_u64().expect("reduced value fits")
    }
}

impl DeltaRing for WittRing {
    type Elem = WittElement;

    fn kind(&self) -> BackendKind {
        BackendKind::Arithmetic
    }

    fn max_precision(&self) -> u32 {
        self.inner.prec
    }

    fn precision(&self, x: &WittElement) -> u32 {
        x.prec
    }

    fn truncate(&self, x: &WittElement, prec: u32) -> WittElement {
        if prec >= x.prec {
            return x.clone();
        }
        let md = self.modulus_at(prec);
        WittElement {
            coeffs: x.coeffs.iter().map(|c| c % md).collect(),
            prec,
        }
    }

    fn from_integer(&self, n: i64) -> WittElement {
        self.element(&[n], self.inner.prec)
    }

    fn from_bigint(&self, n: &BigInt) -> WittElement {
        let mut x = self.zero_at(self.inner.prec);
        x.coeffs[0] = self.reduce_bigint(n, self.inner.prec);
        x
    }

    fn add(&self, a: &WittElement, b: &WittElement) -> WittElement {
        self.binary(a, b, addmod)
    }

    fn sub(&self, a: &WittElement, b: &WittElement) -> WittElement {
        self.binary(a, b, submod)
    }

    fn neg(&self, a: &WittElement) -> WittElement {
        let md = self.modulus_at(a.prec);
        WittElement {
            coeffs: a.coeffs.iter().map(|&c| submod(0, c, md)).collect(),
            prec: a.prec,
        }
    }

    fn mul(&self, a: &WittElement, b: &WittElement) -> WittElement {
        let prec = a.prec.min(b.prec);
        let md = self.modulus_at(prec);
        let m = self.inner.m;
        if m == 1 {
            return WittElement {
                coeffs: smallvec::smallvec![mulmod(a.coeffs[0], b.coeffs[0], md)],
                prec,
            };
        }
        let mut wide = vec![0u64; 2 * m - 1];
        for (i, &x) in a.coeffs.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.coeffs.iter().enumerate() {
                wide[i + j] = addmod(wide[i + j], mulmod(x, y, md), md);
            }
        }
        self.reduce_poly(&mut wide, prec);
        WittElement {
            coeffs: wide.into_iter().collect(),
            prec,
        }
    }

    fn is_zero(&self, x: &WittElement) -> bool {
        x.coeffs.iter().all(|&c| c == 0)
    }

    fn is_unit(&self, x: &WittElement) -> bool {
        x.prec > 0 && x.coeffs.iter().any(|&c| c % self.inner.p != 0)
    }

    fn invert(&self, x: &WittElement) -> Result<WittElement> {
        if !self.is_unit(x) {
            return Err(Error::NonUnit {
                value: self.render(x),
            });
        }
        let p = self.inner.p;
        let residue = self.residue(x);
        let mut y = if self.inner.m == 1 {
            let inv = super::fp::inv_mod(residue[0], p).expect("unit residue");
            self.element(&[inv as i64], x.prec)
        } else {
            let inv = inverse_mod_poly(&residue, &self.inner.modulus, p)
                .expect("nonzero residue in a field");
            let c: Vec<i64> = inv.iter().map(|&v| v as i64).collect();
            self.element(&c, x.prec)
        };
        // Newton: y <- y (2 - x y), doubling correct digits each step
        let two = self.truncate(&self.from_integer(2), x.prec);
        let one = self.truncate(&self.one(), x.prec);
        let mut correct = 1u32;
        while correct < x.prec {
            y = self.mul(&y, &self.sub(&two, &self.mul(x, &y)));
            correct *= 2;
        }
        debug_assert!(self.equal(&self.mul(x, &y), &one));
        Ok(y)
    }

    fn delta(&self, x: &WittElement) -> Result<WittElement> {
        if x.prec < 2 {
            return Err(Error::PrecisionExhausted {
                op: "delta",
                needed: 2,
                available: x.prec,
            });
        }
        let diff = self.sub(&self.frobenius(x)?, &self.pow(x, self.inner.p));
        self.div_by_p(&diff)
    }

    fn frobenius(&self, x: &WittElement) -> Result<WittElement> {
        if self.inner.m == 1 {
            return Ok(x.clone());
        }
        let mut acc = self.zero_at(x.prec);
        for (c, basis) in x.coeffs.iter().zip(&self.inner.frob_basis) {
            if *c != 0 {
                let term = self.scalar_mul_u64(&self.truncate(basis, x.prec), *c);
                acc = self.add(&acc, &term);
            }
        }
        Ok(acc)
    }

    fn div_by_p(&self, x: &WittElement) -> Result<WittElement> {
        if x.prec < 2 {
            return Err(Error::PrecisionExhausted {
                op: "div_by_p",
                needed: 2,
                available: x.prec,
            });
        }
        let p = self.inner.p;
        if x.coeffs.iter().any(|c| c % p != 0) {
            return Err(Error::Input(format!(
                "{} is not divisible by p",
                self.render(x)
            )));
        }
        Ok(WittElement {
            coeffs: x.coeffs.iter().map(|c| c / p).collect(),
            prec: x.prec - 1,
        })
    }

    fn prime(&self) -> Option<u64> {
        Some(self.inner.p)
    }

    fn valuation(&self, x: &WittElement) -> u32 {
        let p = self.inner.p;
        x.coeffs
            .iter()
            .map(|&c| {
                if c == 0 {
                    return x.prec;
                }
                let mut v = 0;
                let mut c = c;
                while c % p == 0 {
                    c /= p;
                    v += 1;
                }
                v
            })
            .min()
            .unwrap_or(x.prec)
            .min(x.prec)
    }

    fn random(&self, rng: &mut SampleRng) -> WittElement {
        let md = self.modulus_at(self.inner.prec);
        WittElement {
            coeffs: (0..self.inner.m).map(|_| rng.gen_range(0..md)).collect(),
            prec: self.inner.prec,
        }
    }

    fn random_unit(&self, rng: &mut SampleRng) -> WittElement {
        loop {
            let x = self.random(rng);
            if self.is_unit(&x) {
                return x;
            }
        }
    }

    fn random_constant(&self, rng: &mut SampleRng) -> WittElement {
        let p = self.inner.p;
        let residue: Vec<u64> = (0..self.inner.m).map(|_| rng.gen_range(0..p)).collect();
        self.teichmueller(&residue).expect("m digits")
    }

    fn render(&self, x: &WittElement) -> String {
        let body = if self.inner.m == 1 {
            x.coeffs[0].to_string()
        } else {
            let terms: Vec<String> = x
                .coeffs
                .iter()
                .enumerate()
                .filter(|(_, &c)| c != 0)
                .map(|(i, c)| match i {
                    0 => c.to_string(),
                    1 => format!("{c}*t"),
                    _ => format!("{c}*t^{i}"),
                })
                .collect();
            if terms.is_empty() {
                "0".to_string()
            } else {
                terms.join(" + ")
            }
        };
        format!("{body} (mod {}^{})", self.inner.p, x.prec)
    }

    fn to_json(&self, x: &WittElement) -> serde_json::Value {
        serde_json::Value::Array(x.coeffs.iter().map(|&c| c.into()).collect())
    }

    fn from_json(&self, v: &serde_json::Value) -> Result<WittElement> {
        let parse_int = |v: &serde_json::Value| -> Result<BigInt> {
            match v {
                serde_json::Value::Number(n) => n
                    .as_i64()
                    .map(BigInt::from)
                    .or_else(|| n.as_u64().map(BigInt::from))
                    .ok_or_else(|| Error::Input(format!("{n} is not an integer"))),
                serde_json::Value::String(s) => s
                    .trim()
                    .parse::<BigInt>()
                    .map_err(|_| Error::Input(format!("{s:?} is not an integer"))),
                other => Err(Error::Input(format!("expected an integer, got {other}"))),
            }
        };
        let coeffs: Vec<BigInt> = match v {
            serde_json::Value::Array(items) => {
                items.iter().map(parse_int).collect::<Result<_>>()?
            }
            single => vec![parse_int(single)?],
        };
        let prec = self.inner.prec;
        let mut wide: Vec<u64> = coeffs.iter().map(|c| self.reduce_bigint(c, prec)).collect();
        if wide.is_empty() {
            wide.push(0);
        }
        self.reduce_poly(&mut wide, prec);
        Ok(WittElement {
            coeffs: wide.into_iter().collect(),
            prec,
        })
    }
}
