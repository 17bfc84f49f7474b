//! δ-homomorphisms of the additive and multiplicative groups.
//!
//! * [`ga_hom`]: `Σ λ_i φ^i(a)` (arithmetic) or `Σ λ_i δ^i(a)` (Kolchin).
//! * [`psi`]: the series `Σ_{n≥1} (-1)^(n-1) p^(n-1)/n (δa/a^p)^n`, a
//!   homomorphism from units to the additive group.
//! * [`gm_hom`]: `Σ λ_i φ^i(ψ(a))` (arithmetic) or `Σ λ_i δ^i(δa·a⁻¹)` (Kolchin).
//! * [`twisted_cocycle`]: `μ(1 - a^s)`.
//!
//! [`check_hom`] tests a black-box map against one of the group laws on seeded
//! samples.

use serde_json::{json, Value};

use crate::error::{BackendKind, Error, Result};
use crate::rings::{unsupported, DeltaRing};
use crate::sampling::sample_rng;

/// Coefficients `λ_0..λ_r` of an additive δ-homomorphism, trailing zeros trimmed.
#[derive(Debug, Clone, PartialEq)]
pub struct GaHomParams<E> {
    lambda: Vec<E>,
}

/// Coefficients `λ_0..λ_r` of a multiplicative-to-additive δ-homomorphism.
#[derive(Debug, Clone, PartialEq)]
pub struct GmHomParams<E> {
    lambda: Vec<E>,
}

/// `μ` and the nonzero twist exponent `s` of `a ↦ μ(1 - a^s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwistedCocycleParams<E> {
    pub mu: E,
    pub s: i64,
}

fn trim_lambda<R: DeltaRing>(ring: &R, mut lambda: Vec<R::Elem>) -> Vec<R::Elem> {
    while lambda.last().is_some_and(|c| ring.is_zero(c)) {
        lambda.pop();
    }
    lambda
}

fn lambda_from_json<R: DeltaRing>(ring: &R, v: &Value) -> Result<Vec<R::Elem>> {
    v.get("lambda")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Input("expected {\"lambda\": [...]}".into()))?
        .iter()
        .map(|c| ring.from_json(c))
        .collect()
}

macro_rules! lambda_params {
    ($ty:ident) => {
        impl<E: Clone> $ty<E> {
            pub fn new<R: DeltaRing<Elem = E>>(ring: &R, lambda: Vec<E>) -> Self {
                $ty {
                    lambda: trim_lambda(ring, lambda),
                }
            }

            pub fn lambda(&self) -> &[E] {
                &self.lambda
            }

            /// Index of the last nonzero coefficient (0 for the empty list).
            pub fn degree(&self) -> usize {
                self.lambda.len().saturating_sub(1)
            }

            pub fn from_json<R: DeltaRing<Elem = E>>(ring: &R, v: &Value) -> Result<Self> {
                Ok(Self::new(ring, lambda_from_json(ring, v)?))
            }

            pub fn to_json<R: DeltaRing<Elem = E>>(&self, ring: &R) -> Value {
                json!({"lambda": self.lambda.iter().map(|c| ring.to_json(c)).collect::<Vec<_>>()})
            }
        }
    };
}

lambda_params!(GaHomParams);
lambda_params!(GmHomParams);

impl<E: Clone> GaHomParams<E> {
    /// Digits of precision consumed per evaluation.
    pub fn order(&self, kind: BackendKind) -> u32 {
        match kind {
            BackendKind::Arithmetic => 0,
            BackendKind::Kolchin => self.degree() as u32,
        }
    }
}

impl<E: Clone> GmHomParams<E> {
    /// Digits of precision consumed per evaluation.
    pub fn order(&self, kind: BackendKind) -> u32 {
        match kind {
            BackendKind::Arithmetic => 1,
            BackendKind::Kolchin => self.degree() as u32 + 1,
        }
    }
}

impl<E: Clone> TwistedCocycleParams<E> {
    pub fn new(mu: E, s: i64) -> Result<Self> {
        if s == 0 {
            return Err(Error::InvalidParams("twist exponent s must be nonzero".into()));
        }
        Ok(TwistedCocycleParams { mu, s })
    }

    pub fn from_json<R: DeltaRing<Elem = E>>(ring: &R, v: &Value) -> Result<Self> {
        let mu = ring.from_json(
            v.get("mu")
                .ok_or_else(|| Error::Input("expected {\"mu\": elem, \"s\": int}".into()))?,
        )?;
        let s = v
            .get("s")
            .and_then(Value::as_i64)
            .ok_or_else(|| Error::Input("twisted cocycle needs an integer `s`".into()))?;
        Self::new(mu, s)
    }

    pub fn to_json<R: DeltaRing<Elem = E>>(&self, ring: &R) -> Value {
        json!({"mu": ring.to_json(&self.mu), "s": self.s})
    }
}

fn require_unit<R: DeltaRing>(ring: &R, a: &R::Elem) -> Result<()> {
    if ring.is_unit(a) {
        Ok(())
    } else {
        Err(Error::NonUnit {
            value: ring.render(a),
        })
    }
}

/// One summand of the ψ series.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiTerm<E> {
    pub n: u64,
    pub value: E,
    /// `n - 1 - v_p(n)`, the valuation of the scalar `p^(n-1)/n`.
    pub scalar_valuation: u32,
    /// `n - 1 - v_p(n) + n·v(δa/a^p)`.
    pub valuation_bound: u32,
}

fn vp_u64(mut n: u64, p: u64) -> u32 {
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

fn floor_log(n: u64, p: u64) -> u32 {
    let mut k = 0;
    let mut q = p;
    while q <= n {
        k += 1;
        q = q.saturating_mul(p);
    }
    k
}

/// The nonzero-bound summands of ψ(a), at precision `prec(a) - 1`.
///
/// Summation stops at the first `n` with `n - 1 - ⌊log_p n⌋ + n·v ≥ prec`,
/// a lower bound on every later term's valuation that is non-decreasing in `n`.
pub fn psi_series<R: DeltaRing>(ring: &R, a: &R::Elem) -> Result<Vec<PsiTerm<R::Elem>>> {
    let p = ring
        .prime()
        .ok_or_else(|| unsupported("psi", BackendKind::Kolchin))?;
    require_unit(ring, a)?;
    let da = ring.delta(a)?;
    let w = ring.precision(&da);
    let ratio = ring.mul(&da, &ring.pow(&ring.invert(a)?, p));
    let v = ring.valuation(&ratio);
    let mut out = Vec::new();
    if v >= w {
        return Ok(out);
    }
    let ceiling = p * (ring.max_precision() as u64 + 2);
    let mut power = ring.truncate(&ring.one(), w);
    for n in 1..=ceiling {
        let floor_bound = (n - 1) as u32 - floor_log(n, p) + n as u32 * v;
        if floor_bound >= w {
            break;
        }
        power = ring.mul(&power, &ratio);
        let vn = vp_u64(n, p);
        let scalar_valuation = (n - 1) as u32 - vn;
        let valuation_bound = scalar_valuation + n as u32 * v;
        if valuation_bound >= w {
            continue;
        }
        let unit = n / p.pow(vn);
        let mut scalar = ring.invert(&ring.from_integer(unit as i64))?;
        scalar = ring.mul(&scalar, &ring.pow(&ring.from_integer(p as i64), scalar_valuation as u64));
        if n % 2 == 0 {
            scalar = ring.neg(&scalar);
        }
        out.push(PsiTerm {
            n,
            value: ring.mul(&scalar, &power),
            scalar_valuation,
            valuation_bound,
        });
    }
    Ok(out)
}

/// ψ(a) for a unit `a`, at precision `prec(a) - 1`.
pub fn psi<R: DeltaRing>(ring: &R, a: &R::Elem) -> Result<R::Elem> {
    let terms = psi_series(ring, a)?;
    let w = ring.precision(a).saturating_sub(1);
    Ok(terms
        .iter()
        .fold(ring.truncate(&ring.zero(), w), |acc, t| ring.add(&acc, &t.value)))
}

fn lambda_sum<R: DeltaRing>(
    ring: &R,
    lambda: &[R::Elem],
    x: &R::Elem,
    step: impl Fn(&R::Elem) -> Result<R::Elem>,
) -> Result<R::Elem> {
    let mut acc = ring.truncate(&ring.zero(), ring.precision(x));
    let mut cur = x.clone();
    for (i, l) in lambda.iter().enumerate() {
        if i > 0 {
            cur = step(&cur)?;
        }
        acc = ring.add(&acc, &ring.mul(l, &cur));
    }
    Ok(acc)
}

fn iterate_step<'a, R: DeltaRing>(ring: &'a R) -> impl Fn(&R::Elem) -> Result<R::Elem> + 'a {
    move |x| match ring.kind() {
        BackendKind::Arithmetic => ring.frobenius(x),
        BackendKind::Kolchin => ring.delta(x),
    }
}

pub fn ga_hom<R: DeltaRing>(ring: &R, params: &GaHomParams<R::Elem>, a: &R::Elem) -> Result<R::Elem> {
    lambda_sum(ring, &params.lambda, a, iterate_step(ring))
}

/// The logarithmic seed of [`gm_hom`]: ψ(a) or δa·a⁻¹.
pub fn gm_seed<R: DeltaRing>(ring: &R, a: &R::Elem) -> Result<R::Elem> {
    match ring.kind() {
        BackendKind::Arithmetic => psi(ring, a),
        BackendKind::Kolchin => {
            require_unit(ring, a)?;
            Ok(ring.mul(&ring.delta(a)?, &ring.invert(a)?))
        }
    }
}

pub fn gm_hom<R: DeltaRing>(ring: &R, params: &GmHomParams<R::Elem>, a: &R::Elem) -> Result<R::Elem> {
    let seed = gm_seed(ring, a)?;
    lambda_sum(ring, &params.lambda, &seed, iterate_step(ring))
}

pub fn twisted_cocycle<R: DeltaRing>(
    ring: &R,
    params: &TwistedCocycleParams<R::Elem>,
    a: &R::Elem,
) -> Result<R::Elem> {
    require_unit(ring, a)?;
    let power = ring.pow_signed(a, params.s)?;
    Ok(ring.mul(&params.mu, &ring.sub(&ring.one(), &power)))
}

/// The group law a map is checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HomLaw {
    /// `f(a + b) = f(a) + f(b)`
    Additive,
    /// `f(ab) = f(a) + f(b)` on units
    MultiplicativeToAdditive,
    /// `f(ab) = f(a) + a^s f(b)` on units
    Twisted(i64),
}

impl HomLaw {
    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "additive" => Ok(HomLaw::Additive),
            "multiplicative-to-additive" | "mult-to-add" => Ok(HomLaw::MultiplicativeToAdditive),
            other => other
                .strip_prefix("twisted(")
                .and_then(|rest| rest.strip_suffix(')'))
                .and_then(|s| s.trim().parse().ok())
                .filter(|&s: &i64| s != 0)
                .map(HomLaw::Twisted)
                .ok_or_else(|| {
                    Error::Input(format!(
                        "unknown law {other:?}; expected additive, multiplicative-to-additive or twisted(s)"
                    ))
                }),
        }
    }

    pub fn name(&self) -> String {
        match self {
            HomLaw::Additive => "additive".into(),
            HomLaw::MultiplicativeToAdditive => "multiplicative-to-additive".into(),
            HomLaw::Twisted(s) => format!("twisted({s})"),
        }
    }

    fn needs_units(&self) -> bool {
        !matches!(self, HomLaw::Additive)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomCounterexample<E> {
    pub sample: usize,
    pub a1: E,
    pub a2: E,
    pub lhs: E,
    pub rhs: E,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomReport<E> {
    pub pass: bool,
    pub samples: usize,
    pub counterexample: Option<HomCounterexample<E>>,
}

impl<E> HomReport<E> {
    pub fn to_json<R: DeltaRing<Elem = E>>(&self, ring: &R) -> Value {
        let mut doc = json!({"pass": self.pass, "samples": self.samples});
        if let Some(c) = &self.counterexample {
            doc["counterexample"] = json!({
                "sample": c.sample,
                "a1": ring.to_json(&c.a1),
                "a2": ring.to_json(&c.a2),
                "lhs": ring.to_json(&c.lhs),
                "rhs": ring.to_json(&c.rhs),
            });
        }
        doc
    }
}

/// Checks `law` for `f` on `samples` seeded pairs, stopping at the first failure.
///
/// Sample `i` draws its pair from the stream `(seed, i)`. Both sides are
/// compared at the smaller of their precisions.
pub fn check_hom<R, F>(
    ring: &R,
    f: F,
    law: HomLaw,
    samples: usize,
    seed: u64,
) -> Result<HomReport<R::Elem>>
where
    R: DeltaRing,
    F: Fn(&R::Elem) -> Result<R::Elem>,
{
    for i in 0..samples {
        let mut rng = sample_rng(seed, i as u64);
        let (a1, a2) = if law.needs_units() {
            (ring.random_unit(&mut rng), ring.random_unit(&mut rng))
        } else {
            (ring.random(&mut rng), ring.random(&mut rng))
        };
        let eval = |x: &R::Elem| f(x).map_err(|e| e.at_sample(i));
        let (lhs, rhs) = match law {
            HomLaw::Additive => (eval(&ring.add(&a1, &a2))?, ring.add(&eval(&a1)?, &eval(&a2)?)),
            HomLaw::MultiplicativeToAdditive => {
                (eval(&ring.mul(&a1, &a2))?, ring.add(&eval(&a1)?, &eval(&a2)?))
            }
            HomLaw::Twisted(s) => {
                let twist = ring.pow_signed(&a1, s).map_err(|e| e.at_sample(i))?;
                (
                    eval(&ring.mul(&a1, &a2))?,
                    ring.add(&eval(&a1)?, &ring.mul(&twist, &eval(&a2)?)),
                )
            }
        };
        if !ring.equal(&lhs, &rhs) {
            return Ok(HomReport {
                pass: false,
                samples: i + 1,
                counterexample: Some(HomCounterexample {
                    sample: i,
                    a1,
                    a2,
                    lhs,
                    rhs,
                }),
            });
        }
    }
    Ok(HomReport {
        pass: true,
        samples,
        counterexample: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rings::{RingParams, SeriesRing, WittRing};

    fn zp(p: u64, n: u32) -> WittRing {
        WittRing::new(RingParams::prime_field(p, n)).unwrap()
    }

    #[test]
    fn psi_vanishes_on_constants() {
        let r = zp(5, 6);
        assert!(r.is_zero(&psi(&r, &r.one()).unwrap()));
        for t in r.all_teichmueller().iter().filter(|t| r.is_unit(t)) {
            assert!(r.is_zero(&psi(&r, t).unwrap()));
        }
        assert_eq!(psi(&r, &r.from_integer(5)).unwrap_err().name(), "non-unit");
    }

    #[test]
    fn psi_term_valuations_respect_bound() {
        let r = zp(3, 8);
        for a in [2i64, 4, 5, 7, 11, 28] {
            for t in psi_series(&r, &r.from_integer(a)).unwrap() {
                assert!(r.valuation(&t.value) >= t.valuation_bound, "a={a} n={}", t.n);
                assert_eq!(t.scalar_valuation, t.n as u32 - 1 - vp_u64(t.n, 3));
            }
        }
    }

    #[test]
    fn psi_precision_is_one_less() {
        let r = zp(3, 6);
        assert_eq!(psi(&r, &r.from_integer(4)).unwrap().prec(), 5);
    }

    #[test]
    fn ga_hom_examples() {
        let r = zp(5, 4);
        let id = GaHomParams::new(&r, vec![r.one()]);
        let x = r.from_integer(17);
        assert_eq!(ga_hom(&r, &id, &x).unwrap(), x);
        let frob = GaHomParams::new(&r, vec![r.zero(), r.one(), r.zero()]);
        assert_eq!(frob.degree(), 1);
        assert!(r.equal(&ga_hom(&r, &frob, &x).unwrap(), &x));

        let s = SeriesRing::new(5).unwrap();
        let d = GaHomParams::new(&s, vec![s.zero(), s.one()]);
        let t2 = s.mul(&s.variable(), &s.variable());
        let out = ga_hom(&s, &d, &t2).unwrap();
        assert!(s.equal(&out, &s.scale(&s.variable(), 2)));
        assert_eq!(out.trunc(), 4);
    }

    #[test]
    fn gm_hom_examples() {
        let s = SeriesRing::new(6).unwrap();
        let one = GmHomParams::new(&s, vec![s.one()]);
        let a = s.from_coeffs(&[1, 1]);
        let lhs = gm_hom(&s, &one, &s.mul(&a, &a)).unwrap();
        let rhs = s.scale(&gm_hom(&s, &one, &a).unwrap(), 2);
        assert!(s.equal(&lhs, &rhs));
        assert!(s.is_zero(&gm_hom(&s, &one, &s.one()).unwrap()));

        let r = zp(3, 5);
        let one = GmHomParams::new(&r, vec![r.one()]);
        let a = r.from_integer(7);
        assert_eq!(gm_hom(&r, &one, &a).unwrap(), psi(&r, &a).unwrap());
    }

    #[test]
    fn twisted_example() {
        let r = zp(5, 3);
        let params = TwistedCocycleParams::new(r.one(), -1).unwrap();
        let out = twisted_cocycle(&r, &params, &r.from_integer(4)).unwrap();
        assert!(r.equal(&out, &r.from_integer(1 - 94)));
        assert!(TwistedCocycleParams::new(r.one(), 0).is_err());
    }

    #[test]
    fn identity_is_not_multiplicative_to_additive() {
        let r = zp(5, 4);
        let report = check_hom(&r, |a| Ok(a.clone()), HomLaw::MultiplicativeToAdditive, 20, 1).unwrap();
        assert!(!report.pass);
        let c = report.counterexample.unwrap();
        assert_eq!(c.sample, 0);
        assert!(!r.equal(&r.mul(&c.a1, &c.a2), &r.add(&c.a1, &c.a2)));
    }

    #[test]
    fn law_names_roundtrip() {
        for law in [HomLaw::Additive, HomLaw::MultiplicativeToAdditive, HomLaw::Twisted(-2)] {
            assert_eq!(HomLaw::parse(&law.name()).unwrap(), law);
        }
        assert!(HomLaw::parse("twisted(0)").is_err());
    }

    #[test]
    fn errors_carry_sample_index() {
        let r = zp(3, 4);
        let err = check_hom(&r, |_| Err(Error::Input("boom".into())), HomLaw::Additive, 3, 0)
            .unwrap_err();
        assert!(matches!(err, Error::Sample { sample: 0, .. }));
    }
}
