//! The acceptance suite: twelve seeded property and oracle checks.
//!
//! Reports are deterministic functions of `(profile, seed)`; timings are kept
//! out of the report so two runs produce identical documents.

use std::fmt::Write as _;

use rand::Rng;
use serde_json::{json, Value};

use crate::cocycles::{
    cocycle_check, coherence_check, h_block_components, h_block_relations, random_constant_matrix, recover,
    ClassifiedCocycle, DeltaMapHandle, Subgroup,
};
use crate::decomp::{check_admissible, decompose, precondition, reconstruct, Factor};
use crate::error::{Error, Result};
use crate::homs::{check_hom, gm_hom, psi, twisted_cocycle, HomLaw, TwistedCocycleParams};
use crate::jet::{JetAlgebra, JetPolynomial, JetVar, Monomial};
use crate::matrix::MatrixOps;
use crate::rings::{DeltaRing, RingParams, SeriesRing, WittRing};
use crate::sampling::{derive_seed, sample_rng, SampleRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    Quick,
    Full,
}

impl Profile {
    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "quick" => Ok(Profile::Quick),
            "full" => Ok(Profile::Full),
            other => Err(Error::Input(format!("unknown profile {other:?}; expected quick or full"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Profile::Quick => "quick",
            Profile::Full => "full",
        }
    }

    fn pick(&self, quick: usize, full: usize) -> usize {
        match self {
            Profile::Quick => quick,
            Profile::Full => full,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: &'static str,
    pub pass: bool,
    /// Number of individual identities evaluated.
    pub checks: usize,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AcceptanceReport {
    pub profile: Profile,
    pub seed: u64,
    pub criteria: Vec<CriterionOutcome>,
}

impl AcceptanceReport {
    pub fn pass(&self) -> bool {
        self.criteria.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "profile": self.profile.name(),
            "seed": self.seed,
            "pass": self.pass(),
            "criteria": self.criteria.iter().map(|c| json!({
                "id": c.id,
                "title": c.title,
                "pass": c.pass,
                "checks": c.checks,
                "detail": c.detail,
            })).collect::<Vec<_>>(),
        })
    }
}

impl CriterionOutcome {
    /// `criterion  1 PASS  <title> (<checks> checks) <detail>`
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {}  {} ({} checks) {}",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.title,
            self.checks,
            self.detail
        )
    }
}

pub const TITLES: [&str; 12] = [
    "delta-ring sum and product rules",
    "Frobenius is a ring homomorphism lifting x^p",
    "constants are exactly the Teichmueller lifts",
    "psi is a homomorphism and kills Teichmueller units",
    "jet prolongation matches iterated numeric delta",
    "valuation of prolonged p-power monomials",
    "classified cocycles satisfy the cocycle law and trace law",
    "recovery of (omega, v) from a classified cocycle",
    "twisted cocycles satisfy the twisted law",
    "decomposition roundtrip and preconditioning rate",
    "Kolchin log-derivative cocycle and coherence",
    "H-block relations of classified cocycles",
];

/// Runs one criterion (1-based).
pub fn run_criterion(id: u8, profile: Profile, seed: u64) -> CriterionOutcome {
    let seed = derive_seed(seed, &format!("criterion-{id}"));
    let result = match id {
        1 => c1_delta_axioms(profile, seed),
        2 => c2_frobenius(profile, seed),
        3 => c3_constants(profile, seed),
        4 => c4_psi(profile, seed),
        5 => c5_jet_oracle(profile, seed),
        6 => c6_valuation(profile, seed),
        7 => c7_classified(profile, seed),
        8 => c8_recovery(profile, seed),
        9 => c9_twisted(profile, seed),
        10 => c10_decomposition(profile, seed),
        11 => c11_kolchin(profile, seed),
        12 => c12_h_blocks(profile, seed),
        _ => Err(Error::Input(format!("no criterion {id}"))),
    };
    let title = TITLES.get(id as usize - 1).copied().unwrap_or("unknown");
    match result {
        Ok(Check { checks, failure: None, note }) => CriterionOutcome { id, title, pass: true, checks, detail: note },
        Ok(Check { checks, failure: Some(f), .. }) => CriterionOutcome { id, title, pass: false, checks, detail: f },
        Err(e) => CriterionOutcome {
            id,
            title,
            pass: false,
            checks: 0,
            detail: format!("error: {e}"),
        },
    }
}

pub fn run_acceptance(profile: Profile, seed: u64) -> AcceptanceReport {
    AcceptanceReport {
        profile,
        seed,
        criteria: (1..=12).map(|id| run_criterion(id, profile, seed)).collect(),
    }
}

/// Running tally for one criterion: stops recording at the first failure.
#[derive(Default)]
struct Check {
    checks: usize,
    failure: Option<String>,
    note: String,
}

impl Check {
    fn ok(&self) -> bool {
        self.failure.is_none()
    }

    fn record(&mut self, holds: bool, describe: impl FnOnce() -> String) {
        self.checks += 1;
        if !holds && self.failure.is_none() {
            self.failure = Some(describe());
        }
    }

    fn note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

/// `Z_p` for `m = 1`, otherwise `W(F_{p^2})` with a fixed irreducible quadratic.
pub fn witt_ring(p: u64, prec: u32, m: usize) -> Result<WittRing> {
    if m == 1 {
        return WittRing::new(RingParams::prime_field(p, prec));
    }
    let modulus = match p {
        3 | 7 | 11 => vec![1, 0, 1],
        5 => vec![3, 0, 1],
        _ => return Err(Error::InvalidParams(format!("no built-in quadratic modulus for p = {p}"))),
    };
    WittRing::new(RingParams::extension(p, prec, modulus))
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// `(x^p + y^p - (x+y)^p) / p = -Σ_{0<j<p} (C(p,j)/p) x^j y^(p-j)`.
fn carry_polynomial<R: DeltaRing>(ring: &R, p: u64, x: &R::Elem, y: &R::Elem) -> R::Elem {
    let mut acc = ring.zero();
    for j in 1..p {
        let c = (binomial(p, j) / p) as i64;
        let term = ring.mul(&ring.pow(x, j), &ring.pow(y, p - j));
        acc = ring.sub(&acc, &ring.scale(&term, c));
    }
    acc
}

fn c1_delta_axioms(profile: Profile, seed: u64) -> Result<Check> {
    let pairs = profile.pick(1_000, 10_000);
    let mut check = Check::default();
    for p in [3u64, 5, 7] {
        for m in [1usize, 2] {
            let r = witt_ring(p, 8, m)?;
            let mut rng = sample_rng(derive_seed(seed, &format!("{p}-{m}")), 0);
            for _ in 0..pairs {
                let (x, y) = (r.random(&mut rng), r.random(&mut rng));
                let (dx, dy) = (r.delta(&x)?, r.delta(&y)?);
                let sum = r.delta(&r.add(&x, &y))?;
                let sum_rhs = r.add(&r.add(&dx, &dy), &carry_polynomial(&r, p, &x, &y));
                check.record(sum.prec() == 7 && r.equal(&sum, &sum_rhs), || {
                    format!("sum rule fails for p={p} m={m} x={x:?} y={y:?}")
                });
                let prod = r.delta(&r.mul(&x, &y))?;
                let prod_rhs = r.add(
                    &r.add(&r.mul(&r.pow(&x, p), &dy), &r.mul(&r.pow(&y, p), &dx)),
                    &r.scale(&r.mul(&dx, &dy), p as i64),
                );
                check.record(r.equal(&prod, &prod_rhs), || {
                    format!("product rule fails for p={p} m={m} x={x:?} y={y:?}")
                });
                if !check.ok() {
                    return Ok(check);
                }
            }
        }
    }
    Ok(check.note(format!("{pairs} pairs for each p in {{3,5,7}}, m in {{1,2}}, N=8")))
}

fn c2_frobenius(profile: Profile, seed: u64) -> Result<Check> {
    let pairs = profile.pick(1_000, 10_000);
    let mut check = Check::default();
    for p in [3u64, 5, 7] {
        for m in [1usize, 2] {
            let r = witt_ring(p, 8, m)?;
            check.record(r.frobenius(&r.one())? == r.one(), || format!("phi(1) != 1 for p={p} m={m}"));
            let mut rng = sample_rng(derive_seed(seed, &format!("{p}-{m}")), 0);
            for _ in 0..pairs {
                let (x, y) = (r.random(&mut rng), r.random(&mut rng));
                let (fx, fy) = (r.frobenius(&x)?, r.frobenius(&y)?);
                check.record(fx.prec() == 8 && r.frobenius(&r.add(&x, &y))? == r.add(&fx, &fy), || {
                    format!("phi not additive for p={p} m={m} x={x:?} y={y:?}")
                });
                check.record(r.frobenius(&r.mul(&x, &y))? == r.mul(&fx, &fy), || {
                    format!("phi not multiplicative for p={p} m={m} x={x:?} y={y:?}")
                });
                check.record(r.equal(&r.truncate(&fx, 1), &r.pow(&x, p)), || {
                    format!("phi(x) != x^p mod p for p={p} m={m} x={x:?}")
                });
                if m == 1 {
                    check.record(fx == x, || format!("phi is not the identity on Z/{p}^8 at x={x:?}"));
                }
                if !check.ok() {
                    return Ok(check);
                }
            }
        }
    }
    Ok(check.note(format!("{pairs} pairs for each p in {{3,5,7}}, m in {{1,2}}, N=8")))
}

fn c3_constants(profile: Profile, seed: u64) -> Result<Check> {
    let samples = profile.pick(300, 1_000);
    let r = witt_ring(5, 6, 2)?;
    let lifts = r.all_teichmueller();
    let mut check = Check::default();
    check.record(lifts.len() == 25, || format!("expected 25 Teichmueller lifts, got {}", lifts.len()));
    let mut rng = sample_rng(seed, 0);
    let mut constants = 0;
    for i in 0..samples {
        // a third uniform, a third exact lifts, a third lifts perturbed by 5^5
        let x = match i % 3 {
            0 => r.random(&mut rng),
            1 => lifts[rng.gen_range(0..lifts.len())].clone(),
            _ => {
                let t = &lifts[rng.gen_range(0..lifts.len())];
                let unit = r.random_unit(&mut rng);
                r.add(t, &r.mul(&r.from_integer(5i64.pow(5)), &unit))
            }
        };
        let is_const = r.is_constant(&x)?;
        let matches_lift = lifts.iter().any(|t| *t == x);
        constants += is_const as usize;
        check.record(is_const == matches_lift, || {
            format!("x={x:?}: is_constant={is_const}, equals a lift={matches_lift}")
        });
        if !check.ok() {
            return Ok(check);
        }
    }
    Ok(check.note(format!(
        "W(F_25)/5^6, {samples} samples ({constants} constant), compared with all 25 lifts at precision 6"
    )))
}

fn c4_psi(profile: Profile, seed: u64) -> Result<Check> {
    let pairs = profile.pick(200, 1_000);
    let mut check = Check::default();
    for p in [3u64, 5] {
        for m in [1usize, 2] {
            let r = witt_ring(p, 8, m)?;
            let mut rng = sample_rng(derive_seed(seed, &format!("{p}-{m}")), 0);
            for _ in 0..pairs {
                let (a, b) = (r.random_unit(&mut rng), r.random_unit(&mut rng));
                let lhs = psi(&r, &r.mul(&a, &b))?;
                let rhs = r.add(&psi(&r, &a)?, &psi(&r, &b)?);
                check.record(lhs.prec() == 7 && lhs == rhs, || {
                    format!("psi(ab) != psi(a)+psi(b) for p={p} m={m} a={a:?} b={b:?}")
                });
            }
            for t in r.all_teichmueller().iter().filter(|t| r.is_unit(t)) {
                check.record(r.is_zero(&psi(&r, t)?), || format!("psi({t:?}) != 0 for p={p} m={m}"));
            }
            if !check.ok() {
                return Ok(check);
            }
        }
    }
    Ok(check.note(format!("{pairs} unit pairs for each p in {{3,5}}, m in {{1,2}}, N=8, plus all Teichmueller units")))
}

/// At most 4 terms in up to 3 base variables, total degree at most 4.
pub fn random_polynomial<R: DeltaRing>(alg: &JetAlgebra<R>, rng: &mut SampleRng) -> Result<JetPolynomial<R::Elem>> {
    let ring = alg.ring();
    let mut terms = Vec::new();
    for _ in 0..rng.gen_range(1..=4) {
        let mut pairs = Vec::new();
        let mut budget = rng.gen_range(0..=4u32);
        while budget > 0 {
            let e = rng.gen_range(1..=budget);
            pairs.push((JetVar::new(rng.gen_range(0..3), 0), e));
            budget -= e;
        }
        terms.push((Monomial::from_pairs(pairs), ring.random(rng)));
    }
    alg.from_terms(terms)
}

fn jet_oracle_on<R: DeltaRing>(alg: &JetAlgebra<R>, polys: usize, seed: u64, check: &mut Check) -> Result<()> {
    let ring = alg.ring();
    for i in 0..polys {
        let mut rng = sample_rng(seed, i as u64);
        let f = random_polynomial(alg, &mut rng)?;
        let a: Vec<R::Elem> = (0..3).map(|_| ring.random(&mut rng)).collect();
        let point = alg.nabla(&a, 3)?;
        let mut value = alg.eval(&f, &point)?;
        let mut g = f.clone();
        for k in 1..=3 {
            g = alg.prolong(&g)?;
            value = ring.delta(&value)?;
            let lhs = alg.eval(&g, &point)?;
            check.record(ring.equal(&lhs, &value), || {
                format!(
                    "{} backend: k={k}, f = {}, a = {a:?}: {lhs:?} != {value:?}",
                    ring.kind(),
                    alg.render(&f)
                )
            });
        }
        if !check.ok() {
            break;
        }
    }
    Ok(())
}

fn c5_jet_oracle(profile: Profile, seed: u64) -> Result<Check> {
    let polys = profile.pick(10, 50);
    let mut check = Check::default();
    let arithmetic = JetAlgebra::new(WittRing::new(RingParams::prime_field(3, 5))?);
    jet_oracle_on(&arithmetic, polys, derive_seed(seed, "arithmetic"), &mut check)?;
    if check.ok() {
        let kolchin = JetAlgebra::new(SeriesRing::new(10)?);
        jet_oracle_on(&kolchin, polys, derive_seed(seed, "kolchin"), &mut check)?;
    }
    Ok(check.note(format!("{polys} polynomials per backend, k = 1..3; Z/3^5 and Q[[t]]/t^10")))
}

fn c6_valuation(_profile: Profile, _seed: u64) -> Result<Check> {
    let mut check = Check::default();
    for nu in 1..=4u32 {
        // coefficients of δ^r(x^(3^ν)) known mod 3^(ν+3-r), two digits above the bound
        let alg = JetAlgebra::new(WittRing::new(RingParams::prime_field(3, nu + 3))?);
        let mut f = alg.pow(&alg.var(JetVar::new(0, 0)), 3u32.pow(nu))?;
        for r in 1..=nu {
            f = alg.prolong(&f)?;
            let worst = alg.content_valuation(&f);
            check.record(worst >= nu - r + 1, || {
                format!("nu={nu} r={r}: a coefficient has valuation {worst} < {}", nu - r + 1)
            });
        }
    }
    Ok(check.note("p=3, 1 <= r <= nu <= 4, coefficients computed modulo 3^(nu+3)"))
}

fn c7_classified(profile: Profile, seed: u64) -> Result<Check> {
    let pairs = profile.pick(100, 1_000);
    let mut check = Check::default();
    for p in [3u64, 5, 7] {
        for n in [2usize, 3] {
            let r = witt_ring(p, 6, 1)?;
            let s = derive_seed(seed, &format!("{p}-{n}"));
            let mut rng = sample_rng(s, u64::MAX);
            let degree = rng.gen_range(0..=2);
            let c = ClassifiedCocycle::random(&r, n, degree, &mut rng);
            let f = DeltaMapHandle::classified(&r, &c);
            let report = cocycle_check(&f, n, pairs, s)?;
            check.checks += report.samples;
            if let Some(ce) = report.counterexample {
                check.failure = Some(format!(
                    "p={p} n={n}: cocycle law fails at g1={}, g2={}",
                    r.mat_render(&ce.inputs[0]),
                    r.mat_render(&ce.inputs[1])
                ));
                return Ok(check);
            }
            for i in 0..pairs {
                let mut rng = sample_rng(derive_seed(s, "trace"), i as u64);
                let g = r.mat_random_gl(n, &mut rng);
                let lhs = r.mat_trace(&f.call(&g)?);
                let w = if c.omega.lambda().is_empty() {
                    r.zero()
                } else {
                    gm_hom(&r, &c.omega, &r.mat_det(&g))?
                };
                let rhs = r.scale(&w, n as i64);
                check.record(r.equal(&lhs, &rhs), || {
                    format!("p={p} n={n}: trace law fails at g={}", r.mat_render(&g))
                });
                if !check.ok() {
                    return Ok(check);
                }
            }
        }
    }
    Ok(check.note(format!(
        "{pairs} pairs and {pairs} trace samples for each p in {{3,5,7}}, n in {{2,3}}, N=6, omega of degree <= 2"
    )))
}

fn c8_recovery(profile: Profile, seed: u64) -> Result<Check> {
    let cocycles = profile.pick(5, 20);
    let fresh = profile.pick(20, 100);
    let mut check = Check::default();
    for i in 0..cocycles {
        let p = [3u64, 5, 7][i % 3];
        let n = 2 + i % 2;
        let r = witt_ring(p, 6, 1)?;
        let mut rng = sample_rng(seed, i as u64);
        let degree = rng.gen_range(0..=2);
        let c = ClassifiedCocycle::random(&r, n, degree, &mut rng);
        let f = DeltaMapHandle::classified(&r, &c);
        let rec = recover(&f, n, derive_seed(seed, &format!("recover-{i}")))?;
        let expected = r.mat_sub(&c.v, &r.mat_scalar(n, c.v.get(0, 0)));
        check.record(r.mat_equal(&rec.v, &expected), || {
            format!("cocycle {i} (p={p}, n={n}): recovered v = {} differs from {}", r.mat_render(&rec.v), r.mat_render(&expected))
        });
        for j in 0..fresh {
            let mut rng = sample_rng(derive_seed(seed, &format!("fresh-{i}")), j as u64);
            let g = r.mat_random_gl(n, &mut rng);
            let (orig, again) = (f.call(&g)?, rec.eval(&g)?);
            check.record(r.mat_equal(&orig, &again), || {
                format!("cocycle {i} (p={p}, n={n}): roundtrip differs at g={}", r.mat_render(&g))
            });
        }
        if !check.ok() {
            return Ok(check);
        }
    }
    Ok(check.note(format!("{cocycles} cocycles over p in {{3,5,7}}, n in {{2,3}}, N=6, {fresh} fresh samples each")))
}

fn twisted_on<R: DeltaRing>(ring: &R, samples: usize, seed: u64, check: &mut Check) -> Result<()> {
    for s in [-3i64, -2, -1, 1, 2, 3] {
        let mut rng = sample_rng(derive_seed(seed, &format!("mu{s}")), 0);
        let params = TwistedCocycleParams::new(ring.random(&mut rng), s)?;
        let report = check_hom(ring, |a| twisted_cocycle(ring, &params, a), HomLaw::Twisted(s), samples, seed)?;
        check.checks += report.samples;
        if let Some(ce) = report.counterexample {
            check.failure = Some(format!(
                "{} backend, s={s}: law fails at a1={:?}, a2={:?}",
                ring.kind(),
                ce.a1,
                ce.a2
            ));
            return Ok(());
        }
    }
    Ok(())
}

fn c9_twisted(profile: Profile, seed: u64) -> Result<Check> {
    let samples = profile.pick(100, 1_000);
    let mut check = Check::default();
    twisted_on(&witt_ring(5, 6, 1)?, samples, derive_seed(seed, "arith"), &mut check)?;
    if check.ok() {
        twisted_on(&witt_ring(3, 6, 2)?, samples, derive_seed(seed, "arith-f9"), &mut check)?;
    }
    if check.ok() {
        twisted_on(&SeriesRing::new(8)?, samples, derive_seed(seed, "kolchin"), &mut check)?;
    }
    Ok(check.note(format!("{samples} samples per s in {{-3..3}}\\{{0}} on Z/5^6, W(F_9)/3^6 and Q[[t]]/t^8")))
}

fn c10_decomposition(profile: Profile, seed: u64) -> Result<Check> {
    let samples = profile.pick(100, 1_000);
    let r = witt_ring(5, 4, 1)?;
    let mut check = Check::default();
    let mut rates = Vec::new();
    for n in [2usize, 3, 4] {
        let expected_len = n * (n + 1) / 2;
        for i in 0..samples {
            let mut rng = sample_rng(derive_seed(seed, &format!("admissible-{n}")), i as u64);
            let x = loop {
                let x = r.mat_random_gl(n, &mut rng);
                if check_admissible(&r, &x).is_ok() {
                    break x;
                }
            };
            let word = decompose(&r, &x)?;
            let back = reconstruct(&r, &word)?;
            check.record(back == x, || format!("n={n}: roundtrip fails for x={}", r.mat_render(&x)));
            check.record(word.len() == expected_len, || {
                format!("n={n}: word has {} blocks, expected {expected_len}", word.len())
            });
            let shapes_ok = word.factors.iter().all(|f| match f {
                Factor::S { a, b } => r.is_unit(a) && b.len() == n - 1,
                Factor::Perm(_) => true,
            });
            check.record(shapes_ok, || format!("n={n}: malformed block in word for x={}", r.mat_render(&x)));
            if !check.ok() {
                return Ok(check);
            }
        }
        let mut successes = 0;
        for i in 0..samples {
            let mut rng = sample_rng(derive_seed(seed, &format!("gl-{n}")), i as u64);
            let x = r.mat_random_gl(n, &mut rng);
            if precondition(&r, &x, i as u64).is_ok() {
                successes += 1;
            }
        }
        check.record(successes * 100 >= samples * 99, || {
            format!("n={n}: precondition succeeded on {successes}/{samples}")
        });
        rates.push(format!("n={n}: {successes}/{samples}"));
        if !check.ok() {
            return Ok(check);
        }
    }
    Ok(check.note(format!(
        "{samples} admissible matrices per n in {{2,3,4}} over Z/5^4; precondition success {}",
        rates.join(", ")
    )))
}

fn c11_kolchin(profile: Profile, seed: u64) -> Result<Check> {
    let pairs = profile.pick(100, 1_000);
    let coherence_samples = profile.pick(20, 100);
    let tori = profile.pick(3, 10);
    let k = SeriesRing::new(10)?;
    let ld = DeltaMapHandle::log_derivative(&k);
    let mut check = Check::default();
    let fail = |check: &mut Check, what: String| {
        check.failure.get_or_insert(what);
    };
    for n in [2usize, 3] {
        let s = derive_seed(seed, &format!("n{n}"));
        let report = cocycle_check(&ld, n, pairs, s)?;
        check.checks += report.samples;
        if !report.pass {
            fail(&mut check, format!("n={n}: log-derivative fails the cocycle law"));
            return Ok(check);
        }
        let mut rng = sample_rng(s, u64::MAX);
        let mut subgroups = vec![Subgroup::Torus, Subgroup::SlN, Subgroup::Borel];
        for _ in 0..tori {
            subgroups.push(Subgroup::ConjugatedTorus(random_constant_matrix(&k, n, &mut rng)));
        }
        for (j, sg) in subgroups.iter().enumerate() {
            let report = coherence_check(&ld, n, sg, coherence_samples, derive_seed(s, &format!("sg{j}")))?;
            check.checks += report.samples;
            if !report.pass {
                fail(&mut check, format!("n={n}: log-derivative not coherent on {}", sg.name()));
                return Ok(check);
            }
        }
        let nu = k.random_constant(&mut rng);
        let v = k.mat_random(n, &mut rng);
        let normal_form = ld.scaled(&nu).plus(&DeltaMapHandle::coboundary(&k, &v));
        let report = cocycle_check(&normal_form, n, pairs, derive_seed(s, "normal-form"))?;
        check.checks += report.samples;
        if !report.pass {
            fail(&mut check, format!("n={n}: nu*ld + coboundary(v) fails the cocycle law"));
            return Ok(check);
        }
        // a non-scalar v is caught by some conjugated torus
        let mut v = k.mat_zero(n);
        v.set(0, 1, k.one());
        v.set(1, 1, k.from_integer(2));
        let cob = DeltaMapHandle::coboundary(&k, &v);
        let mut caught = false;
        for _ in 0..tori.max(10) {
            let u = random_constant_matrix(&k, n, &mut rng);
            let report = coherence_check(&cob, n, &Subgroup::ConjugatedTorus(u), 5, s)?;
            check.checks += report.samples;
            if !report.pass {
                caught = true;
                break;
            }
        }
        check.record(caught, || format!("n={n}: coboundary of a non-scalar v passed every conjugated torus"));
        if !check.ok() {
            return Ok(check);
        }
    }
    Ok(check.note(format!(
        "Q[[t]]/t^10, n in {{2,3}}: {pairs} cocycle pairs, {coherence_samples} samples on torus, SL_n, Borel and {tori} conjugated tori"
    )))
}

fn c12_h_blocks(profile: Profile, seed: u64) -> Result<Check> {
    let cocycles = profile.pick(3, 10);
    let samples = profile.pick(50, 200);
    let mut check = Check::default();
    for i in 0..cocycles {
        let n = 2 + i % 2;
        let r = witt_ring([3u64, 5, 7][i % 3], 6, 1)?;
        let mut rng = sample_rng(seed, i as u64);
        let degree = rng.gen_range(0..=2);
        let c = ClassifiedCocycle::random(&r, n, degree, &mut rng);
        let comps = h_block_components(&DeltaMapHandle::classified(&r, &c), n)?;
        for j in 0..samples {
            let mut rng = sample_rng(derive_seed(seed, &format!("h{i}")), j as u64);
            let (a1, a2) = (r.random_unit(&mut rng), r.random_unit(&mut rng));
            let b1: Vec<_> = (1..n).map(|_| r.random(&mut rng)).collect();
            let b2: Vec<_> = (1..n).map(|_| r.random(&mut rng)).collect();
            let failed = h_block_relations(&comps, (&a1, &b1), (&a2, &b2))?;
            check.record(failed.is_none(), || {
                format!("cocycle {i} (n={n}): relation ({}) fails at a1={a1:?}, b1={b1:?}, a2={a2:?}, b2={b2:?}", failed.unwrap())
            });
        }
        if !check.ok() {
            return Ok(check);
        }
    }
    Ok(check.note(format!("{cocycles} classified cocycles, {samples} pairs each, all four block relations")))
}

/// Plain-text rendering, one line per criterion and a summary line.
pub fn render_text(report: &AcceptanceReport) -> String {
    let mut out = String::new();
    for c in &report.criteria {
        let _ = writeln!(out, "{}", c.line());
    }
    let passed = report.criteria.iter().filter(|c| c.pass).count();
    let _ = writeln!(
        out,
        "{passed}/{} criteria passed (profile {}, seed {})",
        report.criteria.len(),
        report.profile.name(),
        report.seed
    );
    out
}
