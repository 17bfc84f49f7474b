//! Classical δ-cocycles on `GL_n` for the adjoint action.
//!
//! A cocycle satisfies `f(g₁g₂) = f(g₁) + g₁ f(g₂) g₁⁻¹`. This module builds
//! the classified family `ω(det g)·1 + g v g⁻¹ - v`, coboundaries and the
//! Kolchin logarithmic derivative, checks black-box maps against the cocycle
//! law and subgroup coherence, and recovers `(ω, v)` from a black box.

use std::fmt;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::error::{BackendKind, Error, Result};
use crate::homs::{gm_hom, GmHomParams};
use crate::matrix::{MatrixOps, SquareMatrix};
use crate::rings::{unsupported, DeltaRing};
use crate::sampling::{sample_rng, SampleRng};

type Matrix<R> = SquareMatrix<<R as DeltaRing>::Elem>;

/// `g v g⁻¹ - v`.
pub fn coboundary<R: DeltaRing>(ring: &R, v: &Matrix<R>, g: &Matrix<R>) -> Result<Matrix<R>> {
    let gi = ring.mat_inverse(g)?;
    Ok(ring.mat_sub(&ring.mat_mul(&ring.mat_mul(g, v), &gi), v))
}

/// Parameters `(ω, v)` of `g ↦ ω(det g)·1 + g v g⁻¹ - v`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifiedCocycle<E> {
    pub omega: GmHomParams<E>,
    pub v: SquareMatrix<E>,
}

impl<E: Clone> ClassifiedCocycle<E> {
    pub fn n(&self) -> usize {
        self.v.n()
    }

    /// Declared δ-order: the number of coefficients of ω.
    pub fn order(&self) -> u32 {
        self.omega.lambda().len() as u32
    }

    pub fn to_json<R: DeltaRing<Elem = E>>(&self, ring: &R) -> Value {
        json!({"omega": self.omega.to_json(ring), "v": ring.mat_to_json(&self.v)})
    }

    pub fn from_json<R: DeltaRing<Elem = E>>(ring: &R, v: &Value) -> Result<Self> {
        let omega = GmHomParams::from_json(
            ring,
            v.get("omega")
                .ok_or_else(|| Error::Input("cocycle needs `omega`".into()))?,
        )?;
        let m = ring.mat_from_json(
            v.get("v")
                .ok_or_else(|| Error::Input("cocycle needs `v`".into()))?,
        )?;
        Ok(ClassifiedCocycle { omega, v: m })
    }

    /// Random `λ_0..λ_{degree}` and random `v`.
    pub fn random<R: DeltaRing<Elem = E>>(ring: &R, n: usize, degree: usize, rng: &mut SampleRng) -> Self {
        let lambda = (0..=degree).map(|_| ring.random(rng)).collect();
        ClassifiedCocycle {
            omega: GmHomParams::new(ring, lambda),
            v: ring.mat_random(n, rng),
        }
    }
}

fn require_unit_det<R: DeltaRing>(ring: &R, g: &Matrix<R>) -> Result<R::Elem> {
    let d = ring.mat_det(g);
    if ring.is_unit(&d) {
        Ok(d)
    } else {
        Err(Error::NonUnit {
            value: format!("det {}", ring.render(&d)),
        })
    }
}

pub fn classified_eval<R: DeltaRing>(
    ring: &R,
    c: &ClassifiedCocycle<R::Elem>,
    g: &Matrix<R>,
) -> Result<Matrix<R>> {
    if g.n() != c.n() {
        return Err(Error::Shape(format!("cocycle on GL_{} applied to {}x{}", c.n(), g.n(), g.n())));
    }
    let d = require_unit_det(ring, g)?;
    let cob = coboundary(ring, &c.v, g)?;
    if c.omega.lambda().is_empty() {
        return Ok(cob);
    }
    let w = gm_hom(ring, &c.omega, &d)?;
    Ok(ring.mat_add(&ring.mat_scalar(g.n(), &w), &cob))
}

/// `lδ(g) = δg · g⁻¹`, Kolchin backend only.
pub fn log_derivative<R: DeltaRing>(ring: &R, g: &Matrix<R>) -> Result<Matrix<R>> {
    if ring.kind() != BackendKind::Kolchin {
        return Err(unsupported("log_derivative", ring.kind()));
    }
    let gi = ring.mat_inverse(g)?;
    let dg = ring.mat_map(g, |e| ring.delta(e))?;
    Ok(ring.mat_mul(&dg, &gi))
}

type Evaluator<E> = Arc<dyn Fn(&SquareMatrix<E>) -> Result<SquareMatrix<E>> + Send + Sync>;

/// A black-box δ-map `g ↦ f(g)` of declared order `r`.
///
/// Outputs are truncated to `prec(g) - r`, so the precision contract holds
/// whatever the evaluator does internally.
#[derive(Clone)]
pub struct DeltaMapHandle<R: DeltaRing> {
    ring: R,
    eval: Evaluator<R::Elem>,
    order: u32,
    domain: String,
}

impl<R: DeltaRing> fmt::Debug for DeltaMapHandle<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DeltaMapHandle")
            .field("order", &self.order)
            .field("domain", &self.domain)
            .finish()
    }
}

impl<R: DeltaRing + 'static> DeltaMapHandle<R>
where
    R::Elem: 'static,
{
    pub fn new(
        ring: &R,
        order: u32,
        domain: impl Into<String>,
        eval: impl Fn(&R, &Matrix<R>) -> Result<Matrix<R>> + Send + Sync + 'static,
    ) -> Self {
        let captured = ring.clone();
        DeltaMapHandle {
            ring: ring.clone(),
            eval: Arc::new(move |g| eval(&captured, g)),
            order,
            domain: domain.into(),
        }
    }

    pub fn classified(ring: &R, c: &ClassifiedCocycle<R::Elem>) -> Self {
        let c = c.clone();
        DeltaMapHandle::new(ring, c.order(), "GL_n", move |r, g| classified_eval(r, &c, g))
    }

    pub fn coboundary(ring: &R, v: &Matrix<R>) -> Self {
        let v = v.clone();
        DeltaMapHandle::new(ring, 0, "GL_n", move |r, g| coboundary(r, &v, g))
    }

    pub fn log_derivative(ring: &R) -> Self {
        DeltaMapHandle::new(ring, 1, "GL_n", log_derivative)
    }

    pub fn zero(ring: &R) -> Self {
        DeltaMapHandle::new(ring, 0, "GL_n", |r, g| Ok(r.mat_zero(g.n())))
    }

    /// `c · f`.
    pub fn scaled(&self, c: &R::Elem) -> Self {
        let (inner, c) = (self.clone(), c.clone());
        DeltaMapHandle::new(&self.ring, self.order, self.domain.clone(), move |r, g| {
            Ok(r.mat_scale(&inner.call(g)?, &c))
        })
    }

    /// `f + h`, of the larger order.
    pub fn plus(&self, other: &Self) -> Self {
        let (a, b) = (self.clone(), other.clone());
        DeltaMapHandle::new(&self.ring, self.order.max(other.order), self.domain.clone(), move |r, g| {
            Ok(r.mat_add(&a.call(g)?, &b.call(g)?))
        })
    }
}

impl<R: DeltaRing> DeltaMapHandle<R> {
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn domain(&self) -> &str {
        &self.domain
    }

    pub fn ring(&self) -> &R {
        &self.ring
    }

    pub fn call(&self, g: &Matrix<R>) -> Result<Matrix<R>> {
        let prec = self.ring.mat_precision(g);
        if prec <= self.order {
            return Err(Error::PrecisionExhausted {
                op: "delta-map",
                needed: self.order + 1,
                available: prec,
            });
        }
        let out = (self.eval)(g)?;
        Ok(self.ring.mat_truncate(&out, prec - self.order))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CocycleCounterexample<E> {
    pub sample: usize,
    /// `[g₁, g₂]` for the cocycle law, `[g]` for coherence.
    pub inputs: Vec<SquareMatrix<E>>,
    pub lhs: SquareMatrix<E>,
    pub rhs: SquareMatrix<E>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CocycleReport<E> {
    pub pass: bool,
    pub samples: usize,
    pub counterexample: Option<CocycleCounterexample<E>>,
    /// Smallest precision at which two sides were compared.
    pub precision: u32,
}

impl<E: Clone> CocycleReport<E> {
    pub fn to_json<R: DeltaRing<Elem = E>>(&self, ring: &R) -> Value {
        let mut doc = json!({
            "pass": self.pass,
            "samples": self.samples,
            "precision": self.precision,
        });
        if let Some(c) = &self.counterexample {
            doc["counterexample"] = json!({
                "sample": c.sample,
                "inputs": c.inputs.iter().map(|m| ring.mat_to_json(m)).collect::<Vec<_>>(),
                "lhs": ring.mat_to_json(&c.lhs),
                "rhs": ring.mat_to_json(&c.rhs),
            });
        }
        if self.pass {
            doc["note"] = Value::String(format!(
                "no counterexample found at precision {}",
                self.precision
            ));
        }
        doc
    }
}

struct ReportBuilder<E> {
    samples: usize,
    precision: u32,
    counterexample: Option<CocycleCounterexample<E>>,
}

impl<E> ReportBuilder<E> {
    fn finish(self) -> CocycleReport<E> {
        CocycleReport {
            pass: self.counterexample.is_none(),
            samples: self.samples,
            counterexample: self.counterexample,
            precision: self.precision,
        }
    }
}

/// Checks `f(g₁g₂) = f(g₁) + g₁ f(g₂) g₁⁻¹` on seeded random pairs in `GL_n`.
pub fn cocycle_check<R: DeltaRing>(
    f: &DeltaMapHandle<R>,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<CocycleReport<R::Elem>> {
    let ring = f.ring();
    let mut report = ReportBuilder {
        samples: 0,
        precision: ring.max_precision(),
        counterexample: None,
    };
    for i in 0..samples {
        let mut rng = sample_rng(seed, i as u64);
        let g1 = ring.mat_random_gl(n, &mut rng);
        let g2 = ring.mat_random_gl(n, &mut rng);
        let at = |e: Error| e.at_sample(i);
        let lhs = f.call(&ring.mat_mul(&g1, &g2)).map_err(at)?;
        let g1i = ring.mat_inverse(&g1).map_err(at)?;
        let twisted = ring.mat_mul(&ring.mat_mul(&g1, &f.call(&g2).map_err(at)?), &g1i);
        let rhs = ring.mat_add(&f.call(&g1).map_err(at)?, &twisted);
        report.samples = i + 1;
        report.precision = report
            .precision
            .min(ring.mat_precision(&lhs).min(ring.mat_precision(&rhs)));
        if !ring.mat_equal(&lhs, &rhs) {
            report.counterexample = Some(CocycleCounterexample {
                sample: i,
                inputs: vec![g1, g2],
                lhs,
                rhs,
            });
            break;
        }
    }
    Ok(report.finish())
}

/// Output of [`recover`]: `v` with `v₁₁ = 0`, and the black box it came from.
#[derive(Debug, Clone)]
pub struct Recovery<R: DeltaRing> {
    pub v: Matrix<R>,
    handle: DeltaMapHandle<R>,
}

impl<R: DeltaRing> Recovery<R> {
    /// `ω(a)`, read as the (1,1) entry of `f(diag(a,1,…,1)) - coboundary(v, ·)`.
    pub fn omega_eval(&self, a: &R::Elem) -> Result<R::Elem> {
        let ring = self.handle.ring();
        let n = self.v.n();
        let mut d = vec![ring.one(); n];
        d[0] = a.clone();
        let g = ring.mat_diag(&d);
        let diff = ring.mat_sub(&self.handle.call(&g)?, &coboundary(ring, &self.v, &g)?);
        Ok(diff.get(0, 0).clone())
    }

    /// `ω̂(det g)·1 + g v̂ g⁻¹ - v̂` from the recovered data.
    pub fn eval(&self, g: &Matrix<R>) -> Result<Matrix<R>> {
        let ring = self.handle.ring();
        let d = require_unit_det(ring, g)?;
        let w = self.omega_eval(&d)?;
        Ok(ring.mat_add(&ring.mat_scalar(g.n(), &w), &coboundary(ring, &self.v, g)?))
    }
}

/// Number of random `SL_n` points added to the elementary ones in [`recover`].
pub const RECOVERY_EXTRA_SAMPLES: usize = 4;

/// Recovers `v` (normalized by `v₁₁ = 0`) and `ω` from a classified cocycle.
///
/// On `SL_n` the cocycle is `g v g⁻¹ - v`, so `f(g)·g = g v - v g` is linear
/// in `v`. The system collects this for every `1 + e_kl` (`k ≠ l`) and a few
/// random points of `SL_n`, plus `v₁₁ = 0`.
pub fn recover<R: DeltaRing>(f: &DeltaMapHandle<R>, n: usize, seed: u64) -> Result<Recovery<R>> {
    if n < 2 {
        return Err(Error::Input("recovery needs n >= 2".into()));
    }
    let ring = f.ring();
    let mut points = Vec::new();
    for k in 0..n {
        for l in 0..n {
            if k != l {
                points.push(ring.mat_elementary(n, k, l, &ring.one()));
            }
        }
    }
    for i in 0..RECOVERY_EXTRA_SAMPLES {
        let mut rng = sample_rng(seed, i as u64);
        points.push(ring.mat_random_sl(n, &mut rng));
    }
    let unknown = |k: usize, l: usize| k * n + l;
    let mut a: Vec<Vec<R::Elem>> = Vec::new();
    let mut b: Vec<R::Elem> = Vec::new();
    let mut prec = ring.max_precision();
    for (idx, g) in points.iter().enumerate() {
        let fg = f.call(g).map_err(|e| e.at_sample(idx))?;
        prec = prec.min(ring.mat_precision(&fg));
        let rhs = ring.mat_mul(&fg, g);
        for i in 0..n {
            for j in 0..n {
                // (g v - v g)_ij = Σ_k g_ik v_kj - Σ_k v_ik g_kj
                let mut row = vec![ring.zero(); n * n];
                for k in 0..n {
                    let u = unknown(k, j);
                    row[u] = ring.add(&row[u], g.get(i, k));
                    let u = unknown(i, k);
                    row[u] = ring.sub(&row[u], g.get(k, j));
                }
                a.push(row);
                b.push(rhs.get(i, j).clone());
            }
        }
    }
    let mut norm = vec![ring.zero(); n * n];
    norm[unknown(0, 0)] = ring.one();
    a.push(norm);
    b.push(ring.zero());
    let a: Vec<Vec<R::Elem>> = a
        .into_iter()
        .map(|row| row.iter().map(|e| ring.truncate(e, prec)).collect())
        .collect();
    let b: Vec<R::Elem> = b.iter().map(|e| ring.truncate(e, prec)).collect();
    let sol = ring.solve_linear(a, b)?;
    let v = SquareMatrix::from_fn(n, |i, j| sol[unknown(i, j)].clone());
    Ok(Recovery {
        v,
        handle: f.clone(),
    })
}

/// `f` restricted to `H = {[[a, b], [0, 1]]}` and split as `[[α, β], [γᵗ, ε]]`.
#[derive(Debug, Clone)]
pub struct HBlockComponents<R: DeltaRing> {
    handle: DeltaMapHandle<R>,
    n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HBlock<E> {
    pub alpha: E,
    pub beta: Vec<E>,
    pub gamma: Vec<E>,
    pub epsilon: SquareMatrix<E>,
}

pub fn h_block_components<R: DeltaRing>(f: &DeltaMapHandle<R>, n: usize) -> Result<HBlockComponents<R>> {
    if n < 2 {
        return Err(Error::Input("H-block components need n >= 2".into()));
    }
    Ok(HBlockComponents {
        handle: f.clone(),
        n,
    })
}

/// `[[a, b], [0, 1_{n-1}]]`.
pub fn h_element<R: DeltaRing>(ring: &R, a: &R::Elem, b: &[R::Elem]) -> Matrix<R> {
    let n = b.len() + 1;
    SquareMatrix::from_fn(n, |i, j| match (i, j) {
        (0, 0) => a.clone(),
        (0, j) => b[j - 1].clone(),
        (i, j) if i == j => ring.one(),
        _ => ring.zero(),
    })
}

impl<R: DeltaRing> HBlockComponents<R> {
    pub fn eval(&self, a: &R::Elem, b: &[R::Elem]) -> Result<HBlock<R::Elem>> {
        if b.len() + 1 != self.n {
            return Err(Error::ArityMismatch(format!(
                "b has length {}, expected {}",
                b.len(),
                self.n - 1
            )));
        }
        let ring = self.handle.ring();
        let m = self.handle.call(&h_element(ring, a, b))?;
        Ok(HBlock {
            alpha: m.get(0, 0).clone(),
            beta: m.row(0)[1..].to_vec(),
            gamma: (1..self.n).map(|i| m.get(i, 0).clone()).collect(),
            epsilon: m.trailing_block(1),
        })
    }
}

/// The four relations obtained from the cocycle law on `H`, with
/// `h₁h₂ = (a₁a₂, b₁ + a₁b₂)`. Returns the first failing relation (1-based).
pub fn h_block_relations<R: DeltaRing>(
    comps: &HBlockComponents<R>,
    (a1, b1): (&R::Elem, &[R::Elem]),
    (a2, b2): (&R::Elem, &[R::Elem]),
) -> Result<Option<usize>> {
    let ring = comps.handle.ring();
    let m = b1.len();
    let a12 = ring.mul(a1, a2);
    let b12: Vec<R::Elem> = (0..m).map(|j| ring.add(&b1[j], &ring.mul(a1, &b2[j]))).collect();
    let h12 = comps.eval(&a12, &b12)?;
    let h1 = comps.eval(a1, b1)?;
    let h2 = comps.eval(a2, b2)?;
    let a1i = ring.invert(a1)?;
    let dot = |x: &[R::Elem], y: &[R::Elem]| {
        x.iter()
            .zip(y)
            .fold(ring.zero(), |acc, (p, q)| ring.add(&acc, &ring.mul(p, q)))
    };
    let b1g2 = dot(b1, &h2.gamma);

    // (1) α₁₂ = α₁ + α₂ + a₁⁻¹ (b₁·γ₂)
    let rhs1 = ring.add(&ring.add(&h1.alpha, &h2.alpha), &ring.mul(&a1i, &b1g2));
    if !ring.equal(&h12.alpha, &rhs1) {
        return Ok(Some(1));
    }
    // (2) β₁₂ = β₁ + a₁β₂ - α₂b₁ + b₁ε₂ - a₁⁻¹ (b₁·γ₂) b₁
    for j in 0..m {
        let b1eps: R::Elem = (0..m).fold(ring.zero(), |acc, k| {
            ring.add(&acc, &ring.mul(&b1[k], h2.epsilon.get(k, j)))
        });
        let mut rhs = ring.add(&h1.beta[j], &ring.mul(a1, &h2.beta[j]));
        rhs = ring.sub(&rhs, &ring.mul(&h2.alpha, &b1[j]));
        rhs = ring.add(&rhs, &b1eps);
        rhs = ring.sub(&rhs, &ring.mul(&ring.mul(&a1i, &b1g2), &b1[j]));
        if !ring.equal(&h12.beta[j], &rhs) {
            return Ok(Some(2));
        }
    }
    // (3) γ₁₂ = γ₁ + a₁⁻¹γ₂
    for j in 0..m {
        let rhs = ring.add(&h1.gamma[j], &ring.mul(&a1i, &h2.gamma[j]));
        if !ring.equal(&h12.gamma[j], &rhs) {
            return Ok(Some(3));
        }
    }
    // (4) ε₁₂ = ε₁ + ε₂ - a₁⁻¹ γ₂ᵗ b₁
    for i in 0..m {
        for j in 0..m {
            let outer = ring.mul(&a1i, &ring.mul(&h2.gamma[i], &b1[j]));
            let rhs = ring.sub(&ring.add(h1.epsilon.get(i, j), h2.epsilon.get(i, j)), &outer);
            if !ring.equal(h12.epsilon.get(i, j), &rhs) {
                return Ok(Some(4));
            }
        }
    }
    Ok(None)
}

/// Subgroups used for coherence checks.
#[derive(Debug, Clone, PartialEq)]
pub enum Subgroup<E> {
    /// Diagonal matrices; Lie algebra: diagonal.
    Torus,
    /// Determinant one; Lie algebra: trace zero.
    SlN,
    /// Upper triangular; Lie algebra: upper triangular.
    Borel,
    /// `u⁻¹ T u` for a constant `u`; Lie algebra: `X` with `u X u⁻¹` diagonal.
    ConjugatedTorus(SquareMatrix<E>),
}

impl<E> Subgroup<E> {
    pub fn name(&self) -> &'static str {
        match self {
            Subgroup::Torus => "torus",
            Subgroup::SlN => "sl_n",
            Subgroup::Borel => "borel",
            Subgroup::ConjugatedTorus(_) => "conjugated-torus",
        }
    }
}

fn sample_subgroup<R: DeltaRing>(
    ring: &R,
    subgroup: &Subgroup<R::Elem>,
    n: usize,
    rng: &mut SampleRng,
) -> Result<Matrix<R>> {
    Ok(match subgroup {
        Subgroup::Torus => {
            let d: Vec<_> = (0..n).map(|_| ring.random_unit(rng)).collect();
            ring.mat_diag(&d)
        }
        Subgroup::SlN => ring.mat_random_sl(n, rng),
        Subgroup::Borel => SquareMatrix::from_fn(n, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Equal => ring.random_unit(rng),
            std::cmp::Ordering::Less => ring.random(rng),
            std::cmp::Ordering::Greater => ring.zero(),
        }),
        Subgroup::ConjugatedTorus(u) => {
            let d: Vec<_> = (0..n).map(|_| ring.random_unit(rng)).collect();
            let ui = ring.mat_inverse(u)?;
            ring.mat_mul(&ring.mat_mul(&ui, &ring.mat_diag(&d)), u)
        }
    })
}

/// Projection of `x` onto the Lie algebra of `subgroup`; `x` belongs to it
/// iff the projection equals `x`.
fn lie_projection<R: DeltaRing>(
    ring: &R,
    subgroup: &Subgroup<R::Elem>,
    x: &Matrix<R>,
) -> Result<Matrix<R>> {
    let n = x.n();
    Ok(match subgroup {
        Subgroup::Torus => {
            SquareMatrix::from_fn(n, |i, j| if i == j { x.get(i, j).clone() } else { ring.zero() })
        }
        Subgroup::SlN => {
            // subtract the trace from the last diagonal entry
            let mut y = x.clone();
            let last = ring.sub(x.get(n - 1, n - 1), &ring.mat_trace(x));
            y.set(n - 1, n - 1, last);
            y
        }
        Subgroup::Borel => {
            SquareMatrix::from_fn(n, |i, j| if i <= j { x.get(i, j).clone() } else { ring.zero() })
        }
        Subgroup::ConjugatedTorus(u) => {
            let ui = ring.mat_inverse(u)?;
            let c = ring.mat_mul(&ring.mat_mul(u, x), &ui);
            let d = lie_projection(ring, &Subgroup::Torus, &c)?;
            ring.mat_mul(&ring.mat_mul(&ui, &d), u)
        }
    })
}

/// Samples points of `subgroup` and checks that `f` lands in its Lie algebra.
pub fn coherence_check<R: DeltaRing>(
    f: &DeltaMapHandle<R>,
    n: usize,
    subgroup: &Subgroup<R::Elem>,
    samples: usize,
    seed: u64,
) -> Result<CocycleReport<R::Elem>> {
    let ring = f.ring();
    if let Subgroup::ConjugatedTorus(u) = subgroup {
        if u.n() != n {
            return Err(Error::Shape(format!("u is {}x{}, expected {n}x{n}", u.n(), u.n())));
        }
        for e in u.entries() {
            if !ring.is_constant(e)? {
                return Err(Error::Input(format!(
                    "conjugating matrix entry {} is not a constant",
                    ring.render(e)
                )));
            }
        }
        if !ring.mat_is_invertible(u) {
            return Err(Error::NonUnit {
                value: format!("det u = {}", ring.render(&ring.mat_det(u))),
            });
        }
    }
    let mut report = ReportBuilder {
        samples: 0,
        precision: ring.max_precision(),
        counterexample: None,
    };
    for i in 0..samples {
        let mut rng = sample_rng(seed, i as u64);
        let g = sample_subgroup(ring, subgroup, n, &mut rng).map_err(|e| e.at_sample(i))?;
        let fg = f.call(&g).map_err(|e| e.at_sample(i))?;
        let proj = lie_projection(ring, subgroup, &fg).map_err(|e| e.at_sample(i))?;
        report.samples = i + 1;
        report.precision = report.precision.min(ring.mat_precision(&fg));
        if !ring.mat_equal(&fg, &proj) {
            report.counterexample = Some(CocycleCounterexample {
                sample: i,
                inputs: vec![g],
                lhs: fg,
                rhs: proj,
            });
            break;
        }
    }
    Ok(report.finish())
}

/// A random invertible matrix with constant entries.
pub fn random_constant_matrix<R: DeltaRing>(ring: &R, n: usize, rng: &mut SampleRng) -> Matrix<R> {
    loop {
        let u = SquareMatrix::from_fn(n, |_, _| ring.random_constant(rng));
        if ring.mat_is_invertible(&u) {
            return u;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rings::{RingParams, SeriesRing, WittRing};

    fn zp(p: u64, n: u32) -> WittRing {
        WittRing::new(RingParams::prime_field(p, n)).unwrap()
    }

    #[test]
    fn coboundary_examples() {
        let r = zp(5, 3);
        let mut rng = sample_rng(0, 0);
        let g = r.mat_random_gl(2, &mut rng);
        assert!(r.mat_is_zero(&coboundary(&r, &r.mat_zero(2), &g).unwrap()));
        assert!(r.mat_is_zero(&coboundary(&r, &r.mat_identity(2), &g).unwrap()));
        let e12 = r.mat_elementary(2, 0, 1, &r.one());
        let e12 = r.mat_sub(&e12, &r.mat_identity(2));
        let g = r.mat_diag(&[r.from_integer(2), r.one()]);
        assert!(r.mat_equal(&coboundary(&r, &e12, &g).unwrap(), &e12));
    }

    #[test]
    fn classified_vanishes_at_identity_and_reduces_on_sl() {
        let r = zp(3, 6);
        let mut rng = sample_rng(5, 0);
        let c = ClassifiedCocycle::random(&r, 3, 2, &mut rng);
        assert!(r.mat_is_zero(&classified_eval(&r, &c, &r.mat_identity(3)).unwrap()));
        let g = r.mat_random_sl(3, &mut rng);
        let lhs = classified_eval(&r, &c, &g).unwrap();
        assert!(r.mat_equal(&lhs, &coboundary(&r, &c.v, &g).unwrap()));
    }

    #[test]
    fn handle_enforces_declared_order() {
        let r = zp(3, 5);
        let mut rng = sample_rng(2, 0);
        let c = ClassifiedCocycle::random(&r, 2, 1, &mut rng);
        let h = DeltaMapHandle::classified(&r, &c);
        assert_eq!(h.order(), 2);
        let g = r.mat_random_gl(2, &mut rng);
        assert_eq!(r.mat_precision(&h.call(&g).unwrap()), 3);
        let low = r.mat_truncate(&g, 2);
        assert_eq!(h.call(&low).unwrap_err().name(), "precision-exhausted");
    }

    #[test]
    fn delta_of_det_is_not_a_cocycle() {
        let r = zp(5, 5);
        let f = DeltaMapHandle::new(&r, 1, "GL_n", |r, g| {
            let d = r.delta(&r.mat_det(g))?;
            Ok(r.mat_scalar(g.n(), &d))
        });
        let report = cocycle_check(&f, 2, 50, 3).unwrap();
        assert!(!report.pass);
        assert_eq!(report.counterexample.as_ref().unwrap().inputs.len(), 2);
    }

    #[test]
    fn log_derivative_examples() {
        let s = SeriesRing::new(6).unwrap();
        let g = s.mat_scalar(1, &s.from_coeffs(&[1, 1]));
        let out = log_derivative(&s, &g).unwrap();
        assert!(s.equal(out.get(0, 0), &s.from_coeffs(&[1, -1, 1, -1, 1])));
        let c = s.mat_scalar(2, &s.from_integer(3));
        assert!(s.mat_is_zero(&log_derivative(&s, &c).unwrap()));
        assert_eq!(log_derivative(&zp(3, 3), &zp(3, 3).mat_identity(2)).unwrap_err().name(), "unsupported");
    }

    #[test]
    fn recover_zero_and_coboundary() {
        let r = zp(5, 4);
        let rec = recover(&DeltaMapHandle::zero(&r), 3, 1).unwrap();
        assert!(r.mat_is_zero(&rec.v));
        assert!(r.is_zero(&rec.omega_eval(&r.from_integer(7)).unwrap()));

        let mut rng = sample_rng(8, 0);
        let mut v0 = r.mat_random(3, &mut rng);
        v0.set(0, 0, r.zero());
        let rec = recover(&DeltaMapHandle::coboundary(&r, &v0), 3, 1).unwrap();
        assert!(r.mat_equal(&rec.v, &v0));
    }

    #[test]
    fn recover_rejects_non_cocycle() {
        let r = zp(5, 4);
        let f = DeltaMapHandle::new(&r, 0, "GL_n", |_, g| Ok(g.clone()));
        assert_eq!(recover(&f, 2, 0).unwrap_err().name(), "inconsistent-system");
    }

    #[test]
    fn gamma_is_independent_of_b() {
        let r = zp(7, 4);
        let mut rng = sample_rng(4, 0);
        let c = ClassifiedCocycle::random(&r, 3, 1, &mut rng);
        let comps = h_block_components(&DeltaMapHandle::classified(&r, &c), 3).unwrap();
        let a = r.random_unit(&mut rng);
        let b1 = vec![r.random(&mut rng), r.random(&mut rng)];
        let b2 = vec![r.random(&mut rng), r.random(&mut rng)];
        let (x, y) = (comps.eval(&a, &b1).unwrap(), comps.eval(&a, &b2).unwrap());
        assert!(x.gamma.iter().zip(&y.gamma).all(|(p, q)| r.equal(p, q)));
    }
}
