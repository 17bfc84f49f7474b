//! Factorization of invertible matrices into permutation matrices and
//! row-stabilizer blocks `s = [[a, b], [0, 1]]`.
//!
//! Writing `x = [[u, y], [zᵗ, w]]` with `w` invertible,
//!
//! ```text
//! x = [[u - y w⁻¹ zᵗ, y w⁻¹], [0, 1]] · diag(1, w) · [[1, 0], [w⁻¹ zᵗ, 1]]
//! ```
//!
//! `diag(1, w) = P diag(w, 1) P⁻¹` for the cyclic shift `P`, and `diag(w, 1)`
//! is factored recursively. The lower unipotent factor is the commuting
//! product of `1 + c_k e_k0 = τ_k (1 + c_k e_0k) τ_k`, with `τ_k` the
//! transposition of `0` and `k`. Adjacent permutations are merged, so a word
//! has `n(n+1)/2` blocks.

use rand::seq::SliceRandom;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::matrix::{MatrixOps, SquareMatrix};
use crate::rings::DeltaRing;
use crate::sampling::sample_rng;

/// A permutation `σ` of `0..n`, standing for `W_σ` with `W e_j = e_{σ(j)}`.
pub type Perm = Vec<usize>;

#[derive(Debug, Clone, PartialEq)]
pub enum Factor<E> {
    Perm(Perm),
    /// `[[a, b], [0, 1_{n-1}]]`
    S { a: E, b: Vec<E> },
}

/// `w₀, s₁, w₁, …, s_L, w_L`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionWord<E> {
    pub n: usize,
    pub factors: Vec<Factor<E>>,
}

pub fn identity_perm(n: usize) -> Perm {
    (0..n).collect()
}

/// `W_σ W_π = W_{σ∘π}`.
pub fn compose(sigma: &[usize], pi: &[usize]) -> Perm {
    pi.iter().map(|&j| sigma[j]).collect()
}

pub fn invert_perm(sigma: &[usize]) -> Perm {
    let mut inv = vec![0; sigma.len()];
    for (j, &s) in sigma.iter().enumerate() {
        inv[s] = j;
    }
    inv
}

pub fn is_perm(sigma: &[usize]) -> bool {
    let mut seen = vec![false; sigma.len()];
    sigma.iter().all(|&s| s < seen.len() && !std::mem::replace(&mut seen[s], true))
}

fn transposition(n: usize, a: usize, b: usize) -> Perm {
    let mut t = identity_perm(n);
    t.swap(a, b);
    t
}

/// `P e_i = e_{i+1 mod n}`.
fn cyclic_shift(n: usize) -> Perm {
    (0..n).map(|i| (i + 1) % n).collect()
}

impl<E: Clone> DecompositionWord<E> {
    /// Number of s-blocks.
    pub fn len(&self) -> usize {
        self.factors
            .iter()
            .filter(|f| matches!(f, Factor::S { .. }))
            .count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_json<R: DeltaRing<Elem = E>>(&self, ring: &R) -> Value {
        let factors: Vec<Value> = self
            .factors
            .iter()
            .map(|f| match f {
                Factor::Perm(s) => json!({"kind": "perm", "sigma": s}),
                Factor::S { a, b } => json!({
                    "kind": "s",
                    "a": ring.to_json(a),
                    "b": b.iter().map(|e| ring.to_json(e)).collect::<Vec<_>>(),
                }),
            })
            .collect();
        json!({"factors": factors, "n": self.n})
    }

    pub fn from_json<R: DeltaRing<Elem = E>>(ring: &R, v: &Value) -> Result<Self> {
        let n = v
            .get("n")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Input("word needs an integer `n`".into()))? as usize;
        let items = v
            .get("factors")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Input("word needs a `factors` array".into()))?;
        let mut factors = Vec::with_capacity(items.len());
        for item in items {
            match item.get("kind").and_then(Value::as_str) {
                Some("perm") => {
                    let sigma: Perm = serde_json::from_value(
                        item.get("sigma").cloned().unwrap_or(Value::Null),
                    )
                    .map_err(|e| Error::Input(format!("bad permutation {item}: {e}")))?;
                    factors.push(Factor::Perm(sigma));
                }
                Some("s") => {
                    let a = ring.from_json(
                        item.get("a")
                            .ok_or_else(|| Error::Input(format!("s-block without `a`: {item}")))?,
                    )?;
                    let b = item
                        .get("b")
                        .and_then(Value::as_array)
                        .ok_or_else(|| Error::Input(format!("s-block without `b`: {item}")))?
                        .iter()
                        .map(|e| ring.from_json(e))
                        .collect::<Result<_>>()?;
                    factors.push(Factor::S { a, b });
                }
                _ => return Err(Error::Input(format!("unknown factor {item}"))),
            }
        }
        Ok(DecompositionWord { n, factors })
    }
}

/// `Δ_i` = determinant of the block left after deleting the first `i` rows
/// and columns, for `i = 1..n-1`, and their product `Δ`.
pub fn trailing_minors<R: DeltaRing>(ring: &R, x: &SquareMatrix<R::Elem>) -> (Vec<R::Elem>, R::Elem) {
    let minors: Vec<R::Elem> = (1..x.n()).map(|i| ring.mat_det(&x.trailing_block(i))).collect();
    let product = minors
        .iter()
        .fold(ring.truncate(&ring.one(), ring.mat_precision(x)), |acc, m| ring.mul(&acc, m));
    (minors, product)
}

/// Checks the decomposition precondition: `det x` and every `Δ_i` are units.
pub fn check_admissible<R: DeltaRing>(ring: &R, x: &SquareMatrix<R::Elem>) -> Result<()> {
    let d = ring.mat_det(x);
    if !ring.is_unit(&d) {
        return Err(Error::NonUnit {
            value: format!("det {}", ring.render(&d)),
        });
    }
    let (minors, _) = trailing_minors(ring, x);
    for (i, m) in minors.iter().enumerate() {
        if !ring.is_unit(m) {
            return Err(Error::NonUnitMinor {
                index: i + 1,
                value: ring.render(m),
            });
        }
    }
    Ok(())
}

fn is_admissible<R: DeltaRing>(ring: &R, x: &SquareMatrix<R::Elem>) -> bool {
    check_admissible(ring, x).is_ok()
}

/// Appends `f`, merging it into a trailing permutation when both are permutations.
fn push<E>(out: &mut Vec<Factor<E>>, f: Factor<E>) {
    match (out.last_mut(), f) {
        (Some(Factor::Perm(last)), Factor::Perm(next)) => *last = compose(last, &next),
        (Some(Factor::S { .. }), f @ Factor::S { .. }) => {
            let n = match &f {
                Factor::S { b, .. } => b.len() + 1,
                _ => unreachable!(),
            };
            out.push(Factor::Perm(identity_perm(n)));
            out.push(f);
        }
        (_, f) => out.push(f),
    }
}

pub fn decompose<R: DeltaRing>(ring: &R, x: &SquareMatrix<R::Elem>) -> Result<DecompositionWord<R::Elem>> {
    check_admissible(ring, x)?;
    let n = x.n();
    let mut factors = Vec::new();
    decompose_into(ring, x, &mut factors)?;
    push(&mut factors, Factor::Perm(identity_perm(n)));
    if !matches!(factors.first(), Some(Factor::Perm(_))) {
        factors.insert(0, Factor::Perm(identity_perm(n)));
    }
    Ok(DecompositionWord { n, factors })
}

fn decompose_into<R: DeltaRing>(
    ring: &R,
    x: &SquareMatrix<R::Elem>,
    out: &mut Vec<Factor<R::Elem>>,
) -> Result<()> {
    let n = x.n();
    if n == 1 {
        push(out, Factor::Perm(vec![0]));
        push(out, Factor::S { a: x.get(0, 0).clone(), b: vec![] });
        push(out, Factor::Perm(vec![0]));
        return Ok(());
    }
    let u = x.get(0, 0);
    let y = &x.row(0)[1..];
    let z: Vec<R::Elem> = (1..n).map(|i| x.get(i, 0).clone()).collect();
    let w = x.trailing_block(1);
    let wi = ring.mat_inverse(&w)?;
    let m = n - 1;
    // y w⁻¹ and c = w⁻¹ zᵗ
    let ywi: Vec<R::Elem> = (0..m)
        .map(|j| (0..m).fold(ring.zero(), |acc, k| ring.add(&acc, &ring.mul(&y[k], wi.get(k, j)))))
        .collect();
    let c: Vec<R::Elem> = (0..m)
        .map(|i| (0..m).fold(ring.zero(), |acc, k| ring.add(&acc, &ring.mul(wi.get(i, k), &z[k]))))
        .collect();
    let schur = (0..m).fold(u.clone(), |acc, k| ring.sub(&acc, &ring.mul(&ywi[k], &z[k])));

    push(out, Factor::Perm(identity_perm(n)));
    push(out, Factor::S { a: schur, b: ywi });

    let shift = cyclic_shift(n);
    push(out, Factor::Perm(shift.clone()));
    let mut inner = Vec::new();
    decompose_into(ring, &w, &mut inner)?;
    for f in inner {
        push(out, embed(ring, f, n));
    }
    push(out, Factor::Perm(invert_perm(&shift)));

    for k in 1..n {
        let tau = transposition(n, 0, k);
        let mut b = vec![ring.zero(); m];
        b[k - 1] = c[k - 1].clone();
        push(out, Factor::Perm(tau.clone()));
        push(out, Factor::S { a: ring.one(), b });
        push(out, Factor::Perm(tau));
    }
    Ok(())
}

/// Factor of size `n-1` placed in the upper-left corner of `diag(·, 1)`.
fn embed<R: DeltaRing>(ring: &R, f: Factor<R::Elem>, n: usize) -> Factor<R::Elem> {
    match f {
        Factor::Perm(mut s) => {
            s.push(n - 1);
            Factor::Perm(s)
        }
        Factor::S { a, mut b } => {
            b.push(ring.zero());
            Factor::S { a, b }
        }
    }
}

/// Verifies alternation and block shapes.
pub fn check_shape<R: DeltaRing>(ring: &R, word: &DecompositionWord<R::Elem>) -> Result<()> {
    let n = word.n;
    if n == 0 {
        return Err(Error::Shape("word dimension must be positive".into()));
    }
    if word.factors.is_empty() {
        return Err(Error::Shape("a word needs at least w_0".into()));
    }
    for (i, f) in word.factors.iter().enumerate() {
        let expect_perm = i % 2 == 0;
        match f {
            Factor::Perm(s) => {
                if !expect_perm {
                    return Err(Error::Shape(format!("factor {i} should be an s-block")));
                }
                if s.len() != n || !is_perm(s) {
                    return Err(Error::Shape(format!("factor {i}: {s:?} is not a permutation of 0..{n}")));
                }
            }
            Factor::S { a, b } => {
                if expect_perm {
                    return Err(Error::Shape(format!("factor {i} should be a permutation")));
                }
                if b.len() + 1 != n {
                    return Err(Error::Shape(format!("factor {i}: b has length {}, expected {}", b.len(), n - 1)));
                }
                if !ring.is_unit(a) {
                    return Err(Error::Shape(format!("factor {i}: a = {} is not a unit", ring.render(a))));
                }
            }
        }
    }
    if word.factors.len() % 2 == 0 {
        return Err(Error::Shape("a word must end with a permutation".into()));
    }
    Ok(())
}

pub fn factor_matrix<R: DeltaRing>(ring: &R, n: usize, f: &Factor<R::Elem>) -> SquareMatrix<R::Elem> {
    match f {
        Factor::Perm(s) => ring.mat_permutation(s),
        Factor::S { a, b } => SquareMatrix::from_fn(n, |i, j| match (i, j) {
            (0, 0) => a.clone(),
            (0, j) => b[j - 1].clone(),
            (i, j) if i == j => ring.one(),
            _ => ring.zero(),
        }),
    }
}

/// Left-to-right product of the factors.
pub fn reconstruct<R: DeltaRing>(ring: &R, word: &DecompositionWord<R::Elem>) -> Result<SquareMatrix<R::Elem>> {
    check_shape(ring, word)?;
    let mut acc = factor_matrix(ring, word.n, &word.factors[0]);
    for f in &word.factors[1..] {
        acc = ring.mat_mul(&acc, &factor_matrix(ring, word.n, f));
    }
    Ok(acc)
}

/// `x' = W_left · x · W_right` with every trailing minor a unit.
#[derive(Debug, Clone, PartialEq)]
pub struct Preconditioned<E> {
    pub w_left: Perm,
    pub w_right: Perm,
    pub x: SquareMatrix<E>,
    pub attempts: usize,
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// Permutations of `0..n` in lexicographic order.
fn lex_perms(n: usize) -> Vec<Perm> {
    let mut out = Vec::new();
    let mut p = identity_perm(n);
    loop {
        out.push(p.clone());
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| p[i] < p[i + 1]) else {
            return out;
        };
        let j = (i + 1..n).rev().find(|&j| p[j] > p[i]).unwrap();
        p.swap(i, j);
        p[i + 1..].reverse();
    }
}

/// Searches column permutations in lexicographic order, then seeded random
/// row/column pairs, for an admissible `W_left · x · W_right`. Gives up after
/// `n!·4` attempts.
pub fn precondition<R: DeltaRing>(
    ring: &R,
    x: &SquareMatrix<R::Elem>,
    seed: u64,
) -> Result<Preconditioned<R::Elem>> {
    let d = ring.mat_det(x);
    if !ring.is_unit(&d) {
        return Err(Error::NonUnit {
            value: format!("det {}", ring.render(&d)),
        });
    }
    let n = x.n();
    let cap = factorial(n) * 4;
    let apply = |l: &Perm, r: &Perm| {
        ring.mat_mul(&ring.mat_mul(&ring.mat_permutation(l), x), &ring.mat_permutation(r))
    };
    let mut attempts = 0;
    let identity = identity_perm(n);
    for sigma in lex_perms(n) {
        if attempts == cap {
            break;
        }
        attempts += 1;
        let candidate = apply(&identity, &sigma);
        if is_admissible(ring, &candidate) {
            return Ok(Preconditioned {
                w_left: identity.clone(),
                w_right: sigma,
                x: candidate,
                attempts,
            });
        }
    }
    let mut rng = sample_rng(seed, 0);
    while attempts < cap {
        attempts += 1;
        let mut l = identity_perm(n);
        let mut r = identity_perm(n);
        l.shuffle(&mut rng);
        r.shuffle(&mut rng);
        let candidate = apply(&l, &r);
        if is_admissible(ring, &candidate) {
            return Ok(Preconditioned {
                w_left: l,
                w_right: r,
                x: candidate,
                attempts,
            });
        }
    }
    Err(Error::SearchExhausted { attempts })
}

/// A word for `x` itself: decompose the preconditioned matrix and absorb
/// `W_left⁻¹` and `W_right⁻¹` into the outer permutations.
pub fn decompose_preconditioned<R: DeltaRing>(
    ring: &R,
    x: &SquareMatrix<R::Elem>,
    seed: u64,
) -> Result<(DecompositionWord<R::Elem>, Preconditioned<R::Elem>)> {
    let pre = precondition(ring, x, seed)?;
    let mut word = decompose(ring, &pre.x)?;
    if let Some(Factor::Perm(first)) = word.factors.first_mut() {
        *first = compose(&invert_perm(&pre.w_left), first);
    }
    if let Some(Factor::Perm(last)) = word.factors.last_mut() {
        *last = compose(last, &invert_perm(&pre.w_right));
    }
    Ok((word, pre))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rings::{RingParams, WittRing};

    fn zp(p: u64, n: u32) -> WittRing {
        WittRing::new(RingParams::prime_field(p, n)).unwrap()
    }

    fn int_matrix(r: &WittRing, rows: &[&[i64]]) -> SquareMatrix<crate::WittElement> {
        SquareMatrix::from_rows(
            rows.iter()
                .map(|row| row.iter().map(|&x| r.from_integer(x)).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn two_by_two_word_matches_closed_form() {
        let r = zp(5, 3);
        let x = int_matrix(&r, &[&[1, 2], &[3, 4]]);
        let word = decompose(&r, &x).unwrap();
        let d_inv = r.from_integer(94);
        let f = &word.factors;
        assert_eq!(f.len(), 7);
        assert_eq!(f[0], Factor::Perm(vec![0, 1]));
        assert_eq!(
            f[1],
            Factor::S {
                a: r.from_integer(62),
                b: vec![r.mul(&r.from_integer(2), &d_inv)]
            }
        );
        assert_eq!(f[2], Factor::Perm(vec![1, 0]));
        assert_eq!(f[3], Factor::S { a: r.from_integer(4), b: vec![r.zero()] });
        assert_eq!(f[4], Factor::Perm(vec![0, 1]));
        assert_eq!(
            f[5],
            Factor::S {
                a: r.one(),
                b: vec![r.mul(&d_inv, &r.from_integer(3))]
            }
        );
        assert_eq!(f[6], Factor::Perm(vec![1, 0]));
        assert_eq!(reconstruct(&r, &word).unwrap(), x);
    }

    #[test]
    fn one_by_one() {
        let r = zp(3, 3);
        let x = int_matrix(&r, &[&[5]]);
        let word = decompose(&r, &x).unwrap();
        assert_eq!(word.factors, vec![Factor::Perm(vec![0]), Factor::S { a: r.from_integer(5), b: vec![] }, Factor::Perm(vec![0])]);
    }

    #[test]
    fn minors_examples() {
        let r = zp(5, 3);
        let (m, d) = trailing_minors(&r, &int_matrix(&r, &[&[1, 2], &[3, 4]]));
        assert_eq!(m, vec![r.from_integer(4)]);
        assert_eq!(d, r.from_integer(4));
        let x = int_matrix(&r, &[&[2, 1, 1], &[0, 3, 1], &[0, 0, 4]]);
        let (m, _) = trailing_minors(&r, &x);
        assert_eq!(m, vec![r.from_integer(12), r.from_integer(4)]);
    }

    #[test]
    fn antidiagonal_needs_preconditioning() {
        let r = zp(5, 3);
        let x = int_matrix(&r, &[&[0, 1], &[1, 0]]);
        let err = decompose(&r, &x).unwrap_err();
        assert_eq!(err, Error::NonUnitMinor { index: 1, value: r.render(&r.zero()) });
        let pre = precondition(&r, &x, 0).unwrap();
        assert_eq!(pre.w_left, vec![0, 1]);
        assert_eq!(pre.w_right, vec![1, 0]);
        assert_eq!(pre.x, r.mat_identity(2));
        let (word, _) = decompose_preconditioned(&r, &x, 0).unwrap();
        assert_eq!(reconstruct(&r, &word).unwrap(), x);
    }

    #[test]
    fn lexicographic_permutations() {
        assert_eq!(lex_perms(3), vec![
            vec![0, 1, 2], vec![0, 2, 1], vec![1, 0, 2],
            vec![1, 2, 0], vec![2, 0, 1], vec![2, 1, 0],
        ]);
    }

    #[test]
    fn shape_violations() {
        let r = zp(3, 2);
        let bad = DecompositionWord { n: 2, factors: vec![Factor::Perm(vec![0, 0])] };
        assert_eq!(reconstruct(&r, &bad).unwrap_err().name(), "shape-violation");
        let bad = DecompositionWord {
            n: 2,
            factors: vec![Factor::Perm(vec![0, 1]), Factor::S { a: r.from_integer(3), b: vec![r.zero()] }, Factor::Perm(vec![0, 1])],
        };
        assert!(reconstruct(&r, &bad).is_err());
        let only = DecompositionWord::<crate::WittElement> { n: 2, factors: vec![Factor::Perm(vec![1, 0])] };
        assert_eq!(reconstruct(&r, &only).unwrap(), r.mat_permutation(&[1, 0]));
    }
}
