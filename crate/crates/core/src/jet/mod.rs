//! Jet polynomials, the prolongation operator and evaluation on jets of points.
//!
//! A jet variable `x_j^(i)` is the `i`-th iterated δ of the base variable `x_j`.
//! On the arithmetic backend prolongation is
//!
//! ```text
//! δf = (f^φ - f^p) / p,   φ(x^(i)) = (x^(i))^p + p x^(i+1),   φ on coefficients
//! ```
//!
//! evaluated modulo `p^k` with binomial expansions pruned by valuation, so the
//! result is the exact symbolic prolongation known modulo `p^(k-1)`. On the
//! Kolchin backend it is the formal derivation `x^(i) ↦ x^(i+1)`.

mod parse;

pub use parse::parse_polynomial;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use crate::error::{BackendKind, Error, Result};
use crate::rings::DeltaRing;

/// Default cap on the number of terms any intermediate polynomial may hold.
pub const DEFAULT_TERM_LIMIT: usize = 1_000_000;

/// `x_base^(order)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JetVar {
    pub base: u32,
    pub order: u32,
}

impl JetVar {
    pub fn new(base: u32, order: u32) -> Self {
        JetVar { base, order }
    }

    pub fn next(self) -> Self {
        JetVar {
            base: self.base,
            order: self.order + 1,
        }
    }
}

impl fmt::Display for JetVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.order == 0 {
            write!(f, "x{}", self.base)
        } else {
            write!(f, "x{}^({})", self.base, self.order)
        }
    }
}

/// Sorted by variable, exponents strictly positive.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(SmallVec<[(JetVar, u32); 8]>);

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn var(v: JetVar) -> Self {
        Monomial(smallvec::smallvec![(v, 1)])
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (JetVar, u32)>) -> Self {
        let mut acc = Monomial::one();
        for (v, e) in pairs {
            if e > 0 {
                acc = acc.mul(&Monomial(smallvec::smallvec![(v, e)]));
            }
        }
        acc
    }

    pub fn factors(&self) -> &[(JetVar, u32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = SmallVec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    /// Highest jet order occurring, `None` for the unit monomial.
    pub fn order(&self) -> Option<u32> {
        self.0.iter().map(|(v, _)| v.order).max()
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (idx, (v, e)) in self.0.iter().enumerate() {
            if idx > 0 {
                f.write_str("*")?;
            }
            if *e == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{v}^{e}")?;
            }
        }
        Ok(())
    }
}

/// A polynomial in jet variables with coefficients in a δ-ring.
///
/// Every coefficient, including the implicit zeros, is known to `prec`.
#[derive(Debug, Clone, PartialEq)]
pub struct JetPolynomial<E> {
    terms: BTreeMap<Monomial, E>,
    prec: u32,
}

impl<E: Clone> JetPolynomial<E> {
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &E)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn coefficient(&self, m: &Monomial) -> Option<&E> {
        self.terms.get(m)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Highest jet order present; `None` for constants.
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().filter_map(Monomial::order).max()
    }

    /// One more than the largest base index used.
    pub fn base_count(&self) -> u32 {
        self.terms
            .keys()
            .flat_map(|m| m.0.iter().map(|(v, _)| v.base + 1))
            .max()
            .unwrap_or(0)
    }
}

/// A tuple `(a, δa, ..., δ^n a)` per base variable.
#[derive(Debug, Clone, PartialEq)]
pub struct JetPoint<E> {
    components: Vec<Vec<E>>,
}

impl<E> JetPoint<E> {
    pub fn new(components: Vec<Vec<E>>) -> Self {
        JetPoint { components }
    }

    pub fn components(&self) -> &[Vec<E>] {
        &self.components
    }

    pub fn level(&self) -> usize {
        self.components
            .iter()
            .map(|c| c.len().saturating_sub(1))
            .min()
            .unwrap_or(0)
    }
}

/// Generators `(f, δf, ..., δ^n f)` of a jet space; `levels[k]` holds `δ^k`
/// of every input polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct JetPresentation<E> {
    pub levels: Vec<Vec<JetPolynomial<E>>>,
    pub base_count: u32,
}

impl<E> JetPresentation<E> {
    pub fn level(&self) -> usize {
        self.levels.len().saturating_sub(1)
    }

    /// Level-major: all of `f`, then all of `δf`, ...
    pub fn generators(&self) -> impl Iterator<Item = &JetPolynomial<E>> {
        self.levels.iter().flatten()
    }
}

/// Polynomial arithmetic and prolongation over a fixed ring.
#[derive(Debug, Clone)]
pub struct JetAlgebra<R> {
    ring: R,
    term_limit: usize,
}

type Accumulator<E> = FxHashMap<Monomial, E>;

impl<R: DeltaRing> JetAlgebra<R> {
    pub fn new(ring: R) -> Self {
        JetAlgebra {
            ring,
            term_limit: DEFAULT_TERM_LIMIT,
        }
    }

    pub fn with_term_limit(mut self, limit: usize) -> Self {
        self.term_limit = limit;
        self
    }

    pub fn ring(&self) -> &R {
        &self.ring
    }

    fn finish(&self, acc: Accumulator<R::Elem>, prec: u32) -> JetPolynomial<R::Elem> {
        let terms = acc
            .into_iter()
            .map(|(m, c)| (m, self.ring.truncate(&c, prec)))
            .filter(|(_, c)| !self.ring.is_zero(c))
            .collect();
        JetPolynomial { terms, prec }
    }

    fn accumulate(&self, acc: &mut Accumulator<R::Elem>, m: Monomial, c: R::Elem) -> Result<()> {
        match acc.get_mut(&m) {
            Some(slot) => *slot = self.ring.add(slot, &c),
            None => {
                if acc.len() >= self.term_limit {
                    return Err(Error::TermLimit {
                        terms: acc.len() + 1,
                        limit: self.term_limit,
                    });
                }
                acc.insert(m, c);
            }
        }
        Ok(())
    }

    pub fn constant(&self, c: R::Elem) -> JetPolynomial<R::Elem> {
        let prec = self.ring.precision(&c);
        let mut acc = Accumulator::default();
        acc.insert(Monomial::one(), c);
        self.finish(acc, prec)
    }

    pub fn zero(&self) -> JetPolynomial<R::Elem> {
        JetPolynomial {
            terms: BTreeMap::new(),
            prec: self.ring.max_precision(),
        }
    }

    pub fn var(&self, v: JetVar) -> JetPolynomial<R::Elem> {
        self.monomial(Monomial::var(v), self.ring.one())
    }

    pub fn monomial(&self, m: Monomial, c: R::Elem) -> JetPolynomial<R::Elem> {
        let prec = self.ring.precision(&c);
        let mut acc = Accumulator::default();
        acc.insert(m, c);
        self.finish(acc, prec)
    }

    pub fn from_terms(
        &self,
        terms: impl IntoIterator<Item = (Monomial, R::Elem)>,
    ) -> Result<JetPolynomial<R::Elem>> {
        let mut acc = Accumulator::default();
        let mut prec = self.ring.max_precision();
        for (m, c) in terms {
            prec = prec.min(self.ring.precision(&c));
            self.accumulate(&mut acc, m, c)?;
        }
        Ok(self.finish(acc, prec))
    }

    pub fn truncate(&self, f: &JetPolynomial<R::Elem>, prec: u32) -> JetPolynomial<R::Elem> {
        let prec = prec.min(f.prec);
        self.finish(f.terms.clone().into_iter().collect(), prec)
    }

    pub fn add(
        &self,
        f: &JetPolynomial<R::Elem>,
        g: &JetPolynomial<R::Elem>,
    ) -> Result<JetPolynomial<R::Elem>> {
        let mut acc: Accumulator<R::Elem> = f.terms.clone().into_iter().collect();
        for (m, c) in &g.terms {
            self.accumulate(&mut acc, m.clone(), c.clone())?;
        }
        Ok(self.finish(acc, f.prec.min(g.prec)))
    }

    pub fn neg(&self, f: &JetPolynomial<R::Elem>) -> JetPolynomial<R::Elem> {
        JetPolynomial {
            terms: f
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), self.ring.neg(c)))
                .collect(),
            prec: f.prec,
        }
    }

    pub fn sub(
        &self,
        f: &JetPolynomial<R::Elem>,
        g: &JetPolynomial<R::Elem>,
    ) -> Result<JetPolynomial<R::Elem>> {
        self.add(f, &self.neg(g))
    }

    pub fn scale(&self, f: &JetPolynomial<R::Elem>, c: &R::Elem) -> JetPolynomial<R::Elem> {
        let prec = f.prec.min(self.ring.precision(c));
        let acc = f
            .terms
            .iter()
            .map(|(m, x)| (m.clone(), self.ring.mul(x, c)))
            .collect();
        self.finish(acc, prec)
    }

    pub fn mul(
        &self,
        f: &JetPolynomial<R::Elem>,
        g: &JetPolynomial<R::Elem>,
    ) -> Result<JetPolynomial<R::Elem>> {
        let prec = f.prec.min(g.prec);
        let mut acc = Accumulator::default();
        // valuations add, so pairs with v1 + v2 >= prec vanish after truncation
        let mut right: Vec<(u32, &Monomial, &R::Elem)> =
            g.terms.iter().map(|(m, c)| (self.ring.valuation(c), m, c)).collect();
        right.sort_by_key(|&(v, _, _)| v);
        for (m1, c1) in &f.terms {
            let v1 = self.ring.valuation(c1);
            for &(_, m2, c2) in right.iter().take_while(|&&(v2, _, _)| v1 + v2 < prec) {
                let c = self.ring.mul(c1, c2);
                if self.ring.is_zero(&c) {
                    continue;
                }
                self.accumulate(&mut acc, m1.mul(m2), c)?;
            }
        }
        Ok(self.finish(acc, prec))
    }

    pub fn pow(&self, f: &JetPolynomial<R::Elem>, mut e: u32) -> Result<JetPolynomial<R::Elem>> {
        let mut acc = self.constant(self.ring.truncate(&self.ring.one(), f.prec));
        let mut base = f.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base)?;
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base)?;
            }
        }
        Ok(acc)
    }

    /// Smallest valuation among the coefficients (the precision for zero).
    pub fn content_valuation(&self, f: &JetPolynomial<R::Elem>) -> u32 {
        f.terms
            .values()
            .map(|c| self.ring.valuation(c))
            .min()
            .unwrap_or(f.prec)
    }

    /// The prolongation `δf`; order grows by one, precision drops by one.
    pub fn prolong(&self, f: &JetPolynomial<R::Elem>) -> Result<JetPolynomial<R::Elem>> {
        if f.prec < 2 {
            return Err(Error::PrecisionExhausted {
                op: "prolong",
                needed: 2,
                available: f.prec,
            });
        }
        match self.ring.kind() {
            BackendKind::Arithmetic => self.prolong_arithmetic(f),
            BackendKind::Kolchin => self.prolong_kolchin(f),
        }
    }

    /// `prolong` applied `k` times.
    pub fn prolong_n(&self, f: &JetPolynomial<R::Elem>, k: usize) -> Result<JetPolynomial<R::Elem>> {
        let mut g = f.clone();
        for _ in 0..k {
            g = self.prolong(&g)?;
        }
        Ok(g)
    }

    fn prolong_kolchin(&self, f: &JetPolynomial<R::Elem>) -> Result<JetPolynomial<R::Elem>> {
        let prec = f.prec - 1;
        let mut acc = Accumulator::default();
        for (m, c) in &f.terms {
            let dc = self.ring.delta(c)?;
            if !self.ring.is_zero(&dc) {
                self.accumulate(&mut acc, m.clone(), dc)?;
            }
            for (idx, &(v, e)) in m.0.iter().enumerate() {
                // e * m / v * v'
                let mut rest = m.0.clone();
                if e == 1 {
                    rest.remove(idx);
                } else {
                    rest[idx].1 -= 1;
                }
                let mono = Monomial(rest).mul(&Monomial::var(v.next()));
                let coeff = self.ring.scale(&self.ring.truncate(c, prec), e as i64);
                self.accumulate(&mut acc, mono, coeff)?;
            }
        }
        Ok(self.finish(acc, prec))
    }

    fn prolong_arithmetic(&self, f: &JetPolynomial<R::Elem>) -> Result<JetPolynomial<R::Elem>> {
        let ring = &self.ring;
        let p = ring.prime().expect("arithmetic backend has a prime");
        let k = f.prec;
        let mut binomials = BinomialCache::new(p, k);

        // f^φ
        let mut phi: Accumulator<R::Elem> = Accumulator::default();
        for (m, c) in &f.terms {
            let fc = ring.frobenius(c)?;
            let mut partial: Vec<(Monomial, R::Elem, u32)> =
                vec![(Monomial::one(), fc, ring.valuation(c))];
            for &(v, e) in m.factors() {
                let row = binomials.row(e);
                let mut next = Vec::with_capacity(partial.len() * row.len());
                for (pm, pc, pv) in &partial {
                    for &(j, val, value) in row {
                        // C(e, j) p^j has valuation `val`
                        if pv + val >= k {
                            continue;
                        }
                        let coeff = ring.mul(pc, &ring.from_integer(value as i64));
                        let mono = pm.mul(&Monomial::from_pairs([
                            (v, p as u32 * (e - j)),
                            (v.next(), j),
                        ]));
                        next.push((mono, coeff, pv + val));
                    }
                }
                partial = next;
            }
            for (mono, coeff, _) in partial {
                self.accumulate(&mut phi, mono, coeff)?;
            }
        }

        for (m, c) in &self.pow_p(f, p as u32)?.terms {
            self.accumulate(&mut phi, m.clone(), ring.neg(c))?;
        }

        let mut out = BTreeMap::new();
        for (m, c) in phi {
            let c = ring.truncate(&c, k);
            if ring.is_zero(&c) {
                continue;
            }
            let q = ring.div_by_p(&c)?;
            if !ring.is_zero(&q) {
                out.insert(m, q);
            }
        }
        Ok(JetPolynomial {
            terms: out,
            prec: k - 1,
        })
    }

    /// `f^p` modulo `p^k`, `k = prec(f)`, through the multinomial expansion
    /// over `f = Σ f_i`, where `f_i` collects the coefficients of valuation `i`.
    /// The term for exponents `(e_0, e_1, ...)` has valuation at least
    /// `v_p(multinomial) + Σ i·e_i` and is skipped once that reaches `k`.
    fn pow_p(&self, f: &JetPolynomial<R::Elem>, p: u32) -> Result<JetPolynomial<R::Elem>> {
        let ring = &self.ring;
        let k = f.prec;
        let mut classes: Vec<JetPolynomial<R::Elem>> = (0..k)
            .map(|_| JetPolynomial { terms: BTreeMap::new(), prec: k })
            .collect();
        for (m, c) in &f.terms {
            let v = ring.valuation(c);
            if v < k {
                classes[v as usize].terms.insert(m.clone(), c.clone());
            }
        }

        // exponent vectors (e_1, ..., e_{k-1}) with Σ i·e_i < k and Σ e_i <= p
        let mut vectors = Vec::new();
        let mut current = vec![0u32; k as usize];
        fn enumerate(i: usize, budget: u32, count: u32, p: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
            if i == cur.len() {
                out.push(cur.clone());
                return;
            }
            let mut e = 0;
            while e as usize * i <= budget as usize && count + e <= p {
                cur[i] = e;
                enumerate(i + 1, budget - e * i as u32, count + e, p, cur, out);
                e += 1;
            }
            cur[i] = 0;
        }
        enumerate(1, k - 1, 0, p, &mut current, &mut vectors);
        // ascending e_0, so each power of f_0 extends the previous one
        vectors.sort_by_key(|e| std::cmp::Reverse(e.iter().sum::<u32>()));

        let one = self.constant(ring.truncate(&ring.one(), k));
        let mut powers: HashMap<(usize, u32), JetPolynomial<R::Elem>> = HashMap::new();
        let mut acc = Accumulator::default();
        let prime = BigInt::from(p);
        for mut e in vectors {
            let rest: u32 = e.iter().sum();
            e[0] = p - rest;
            // multinomial(p; e) = p (p-1) ... (e_0 + 1) / Π_{i>0} e_i!
            let mut multinomial = BigInt::one();
            for j in e[0] + 1..=p {
                multinomial *= j;
            }
            for &ei in &e[1..] {
                for j in 2..=ei {
                    multinomial /= j;
                }
            }
            let mut scalar_val = 0u32;
            let mut unit_part = multinomial.clone();
            while (&unit_part % &prime).is_zero() {
                unit_part /= &prime;
                scalar_val += 1;
            }
            let class_val: u32 = e.iter().enumerate().map(|(i, &ei)| i as u32 * ei).sum();
            if scalar_val + class_val >= k || e.iter().enumerate().any(|(i, &ei)| ei > 0 && classes[i].is_zero()) {
                continue;
            }
            let mut term = one.clone();
            for (i, &ei) in e.iter().enumerate() {
                if ei == 0 {
                    continue;
                }
                if !powers.contains_key(&(i, ei)) {
                    let value = match ei.checked_sub(1).and_then(|lower| powers.get(&(i, lower))) {
                        Some(lower) if ei > 1 => self.mul(lower, &classes[i])?,
                        _ => self.pow(&classes[i], ei)?,
                    };
                    powers.insert((i, ei), value);
                }
                term = self.mul(&term, &powers[&(i, ei)])?;
            }
            let scalar = ring.from_bigint(&multinomial);
            for (m, c) in term.terms {
                self.accumulate(&mut acc, m, ring.mul(&c, &scalar))?;
            }
        }
        Ok(self.finish(acc, k))
    }

    pub fn presentation(
        &self,
        polys: &[JetPolynomial<R::Elem>],
        level: usize,
    ) -> Result<JetPresentation<R::Elem>> {
        for f in polys {
            if f.order().is_some_and(|o| o > 0) {
                return Err(Error::Input(format!(
                    "presentation inputs must have order 0, got order {}",
                    f.order().unwrap()
                )));
            }
        }
        let mut levels = vec![polys.to_vec()];
        for _ in 0..level {
            let next = levels
                .last()
                .unwrap()
                .iter()
                .map(|f| self.prolong(f))
                .collect::<Result<Vec<_>>>()?;
            levels.push(next);
        }
        let base_count = polys.iter().map(|f| f.base_count()).max().unwrap_or(0);
        Ok(JetPresentation { levels, base_count })
    }

    /// `∇^n(a) = (a, δa, ..., δ^n a)` for each entry of `a`.
    pub fn nabla(&self, a: &[R::Elem], level: usize) -> Result<JetPoint<R::Elem>> {
        let components = a
            .iter()
            .map(|x| {
                let mut col = vec![x.clone()];
                for _ in 0..level {
                    let next = self.ring.delta(col.last().unwrap())?;
                    col.push(next);
                }
                Ok(col)
            })
            .collect::<Result<_>>()?;
        Ok(JetPoint { components })
    }

    /// Plain evaluation of `f` at a jet point.
    pub fn eval(&self, f: &JetPolynomial<R::Elem>, point: &JetPoint<R::Elem>) -> Result<R::Elem> {
        let ring = &self.ring;
        let mut acc = ring.truncate(&ring.zero(), f.prec);
        for (m, c) in &f.terms {
            let mut term = c.clone();
            for &(v, e) in m.factors() {
                let value = point
                    .components
                    .get(v.base as usize)
                    .and_then(|col| col.get(v.order as usize))
                    .ok_or_else(|| {
                        Error::ArityMismatch(format!(
                            "{v} is not covered by a point with {} base variables at level {}",
                            point.components.len(),
                            point.level()
                        ))
                    })?;
                term = ring.mul(&term, &ring.pow(value, e as u64));
            }
            acc = ring.add(&acc, &term);
        }
        Ok(acc)
    }

    /// Textual form, canonical term order, e.g. `x0^3*x0^(1) + 2*x1^(1) (mod 3^4)`.
    pub fn render(&self, f: &JetPolynomial<R::Elem>) -> String {
        let mut parts = Vec::new();
        for (m, c) in &f.terms {
            let coeff = render_coefficient(&self.ring.to_json(c));
            parts.push(match (coeff.as_str(), m.is_one()) {
                (_, true) => coeff,
                ("1", false) => m.to_string(),
                _ => format!("{coeff}*{m}"),
            });
        }
        let body = if parts.is_empty() {
            "0".to_string()
        } else {
            parts.join(" + ")
        };
        match self.ring.prime() {
            Some(p) => format!("{body} (mod {p}^{})", f.prec),
            None => format!("{body} (mod t^{})", f.prec),
        }
    }

    /// `{"prec": k, "terms": [{"exponents": [[j, i, e], ...], "coefficient": elem}]}`
    pub fn to_json(&self, f: &JetPolynomial<R::Elem>) -> serde_json::Value {
        let terms: Vec<serde_json::Value> = f
            .terms
            .iter()
            .map(|(m, c)| {
                let exps: Vec<serde_json::Value> = m
                    .factors()
                    .iter()
                    .map(|(v, e)| serde_json::json!([v.base, v.order, e]))
                    .collect();
                serde_json::json!({"exponents": exps, "coefficient": self.ring.to_json(c)})
            })
            .collect();
        serde_json::json!({"prec": f.prec, "terms": terms})
    }

    pub fn from_json(&self, v: &serde_json::Value) -> Result<JetPolynomial<R::Elem>> {
        let terms = v
            .get("terms")
            .and_then(|t| t.as_array())
            .ok_or_else(|| Error::Input("polynomial needs a `terms` array".into()))?;
        let mut out = Vec::with_capacity(terms.len());
        for t in terms {
            let coeff = self.ring.from_json(
                t.get("coefficient")
                    .ok_or_else(|| Error::Input("term without coefficient".into()))?,
            )?;
            let exps = t
                .get("exponents")
                .and_then(|e| e.as_array())
                .ok_or_else(|| Error::Input("term without exponents".into()))?;
            let mut pairs = Vec::new();
            for e in exps {
                let triple: Vec<u32> = serde_json::from_value(e.clone())
                    .map_err(|err| Error::Input(format!("bad exponent record {e}: {err}")))?;
                if triple.len() != 3 {
                    return Err(Error::Input(format!("exponent record {e} is not [j, i, e]")));
                }
                pairs.push((JetVar::new(triple[0], triple[1]), triple[2]));
            }
            out.push((Monomial::from_pairs(pairs), coeff));
        }
        let mut f = self.from_terms(out)?;
        if let Some(prec) = v.get("prec").and_then(|p| p.as_u64()) {
            f = self.truncate(&f, prec as u32);
        }
        Ok(f)
    }
}

/// A scalar, or `(c0 + c1*t + ...)` for coefficient vectors in `t`.
fn render_coefficient(v: &serde_json::Value) -> String {
    let scalar = |v: &serde_json::Value| match v {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    let items = match v {
        serde_json::Value::Array(items) => items,
        other => return scalar(other),
    };
    let digits: Vec<String> = items.iter().map(scalar).collect();
    let len = digits.iter().rposition(|d| d != "0").map_or(0, |i| i + 1);
    if len <= 1 {
        return digits.first().cloned().unwrap_or_else(|| "0".into());
    }
    let terms: Vec<String> = digits[..len]
        .iter()
        .enumerate()
        .filter(|(_, d)| d.as_str() != "0")
        .map(|(i, d)| match (i, d.as_str()) {
            (0, _) => d.clone(),
            (1, "1") => "t".into(),
            (1, _) => format!("{d}*t"),
            (_, "1") => format!("t^{i}"),
            _ => format!("{d}*t^{i}"),
        })
        .collect();
    format!("({})", terms.join(" + "))
}

/// Rows of `(j, val, C(e, j) p^j mod p^k)` where `val` is the valuation of
/// `C(e, j) p^j`; entries with `val >= k` are dropped.
struct BinomialCache {
    p: u64,
    k: u32,
    modulus: u64,
    rows: HashMap<u32, Vec<(u32, u32, u64)>>,
}

impl BinomialCache {
    fn new(p: u64, k: u32) -> Self {
        BinomialCache {
            p,
            k,
            modulus: p.pow(k),
            rows: HashMap::new(),
        }
    }

    fn row(&mut self, e: u32) -> &[(u32, u32, u64)] {
        let (p, k, md) = (self.p, self.k, self.modulus);
        self.rows.entry(e).or_insert_with(|| {
            let mut out = vec![(0u32, 0u32, 1u64)];
            // running C(e, j) = p^v * u
            let mut v: i64 = 0;
            let mut u: u64 = 1;
            for j in 1..=e {
                let (a, num) = split_p((e - j + 1) as u64, p);
                let (b, den) = split_p(j as u64, p);
                v += a as i64 - b as i64;
                u = mul_mod(mul_mod(u, num % md, md), inv_mod_pk(den % md, md), md);
                let total = v + j as i64;
                if total < k as i64 {
                    out.push((j, total as u32, mul_mod(u, p.pow(total as u32), md)));
                }
            }
            out
        })
    }
}

fn split_p(mut n: u64, p: u64) -> (u32, u64) {
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    (v, n)
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// Inverse of a unit modulo `m` by extended Euclid.
fn inv_mod_pk(a: u64, m: u64) -> u64 {
    let (mut r0, mut r1) = (m as i128, a as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    debug_assert_eq!(r0, 1, "{a} is not invertible mod {m}");
    s0.rem_euclid(m as i128) as u64
}
