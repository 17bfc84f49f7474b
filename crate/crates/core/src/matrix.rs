//! Square matrices over a δ-ring, and linear solving with unit pivots.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::rings::DeltaRing;
use crate::sampling::SampleRng;

/// An `n × n` matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix<E> {
    n: usize,
    entries: Vec<E>,
}

impl<E: Clone> SquareMatrix<E> {
    pub fn from_rows(rows: Vec<Vec<E>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Shape("matrix must have at least one row".into()));
        }
        if let Some(bad) = rows.iter().position(|r| r.len() != n) {
            return Err(Error::Shape(format!(
                "row {bad} has {} entries, expected {n}",
                rows[bad].len()
            )));
        }
        Ok(SquareMatrix {
            n,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> E) -> Self {
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(f(i, j));
            }
        }
        SquareMatrix { n, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &E {
        &self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: E) {
        self.entries[i * self.n + j] = value;
    }

    pub fn row(&self, i: usize) -> &[E] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<E>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn entries(&self) -> &[E] {
        &self.entries
    }

    pub fn transpose(&self) -> Self {
        SquareMatrix::from_fn(self.n, |i, j| self.get(j, i).clone())
    }

    /// The block with rows and columns `from..n`.
    pub fn trailing_block(&self, from: usize) -> Self {
        SquareMatrix::from_fn(self.n - from, |i, j| self.get(i + from, j + from).clone())
    }

    /// Deletes row `r` and column `c`.
    pub fn minor_matrix(&self, r: usize, c: usize) -> Self {
        let keep: Vec<usize> = (0..self.n).collect();
        let rows: Vec<usize> = keep.iter().copied().filter(|&i| i != r).collect();
        let cols: Vec<usize> = keep.iter().copied().filter(|&j| j != c).collect();
        SquareMatrix::from_fn(self.n - 1, |i, j| self.get(rows[i], cols[j]).clone())
    }
}

/// Matrix operations that need the ring.
pub trait MatrixOps: DeltaRing {
    fn mat_identity(&self, n: usize) -> SquareMatrix<Self::Elem> {
        SquareMatrix::from_fn(n, |i, j| if i == j { self.one() } else { self.zero() })
    }

    fn mat_zero(&self, n: usize) -> SquareMatrix<Self::Elem> {
        SquareMatrix::from_fn(n, |_, _| self.zero())
    }

    fn mat_diag(&self, d: &[Self::Elem]) -> SquareMatrix<Self::Elem> {
        SquareMatrix::from_fn(d.len(), |i, j| if i == j { d[i].clone() } else { self.zero() })
    }

    /// `W_σ` with `W e_j = e_{σ(j)}`.
    fn mat_permutation(&self, sigma: &[usize]) -> SquareMatrix<Self::Elem> {
        SquareMatrix::from_fn(sigma.len(), |i, j| {
            if sigma[j] == i {
                self.one()
            } else {
                self.zero()
            }
        })
    }

    /// `1 + c·e_kl`.
    fn mat_elementary(&self, n: usize, k: usize, l: usize, c: &Self::Elem) -> SquareMatrix<Self::Elem> {
        let mut m = self.mat_identity(n);
        let entry = self.add(m.get(k, l), c);
        m.set(k, l, entry);
        m
    }

    fn mat_scalar(&self, n: usize, c: &Self::Elem) -> SquareMatrix<Self::Elem> {
        SquareMatrix::from_fn(n, |i, j| if i == j { c.clone() } else { self.zero() })
    }

    fn mat_add(&self, a: &SquareMatrix<Self::Elem>, b: &SquareMatrix<Self::Elem>) -> SquareMatrix<Self::Elem> {
        SquareMatrix::from_fn(a.n, |i, j| self.add(a.get(i, j), b.get(i, j)))
    }

    fn mat_sub(&self, a: &SquareMatrix<Self::Elem>, b: &SquareMatrix<Self::Elem>) -> SquareMatrix<Self::Elem> {
        SquareMatrix::from_fn(a.n, |i, j| self.sub(a.get(i, j), b.get(i, j)))
    }

    fn mat_neg(&self, a: &SquareMatrix<Self::Elem>) -> SquareMatrix<Self::Elem> {
        SquareMatrix::from_fn(a.n, |i, j| self.neg(a.get(i, j)))
    }

    fn mat_scale(&self, a: &SquareMatrix<Self::Elem>, c: &Self::Elem) -> SquareMatrix<Self::Elem> {
        SquareMatrix::from_fn(a.n, |i, j| self.mul(a.get(i, j), c))
    }

    fn mat_mul(&self, a: &SquareMatrix<Self::Elem>, b: &SquareMatrix<Self::Elem>) -> SquareMatrix<Self::Elem> {
        let n = a.n;
        SquareMatrix::from_fn(n, |i, j| {
            let mut acc = self.mul(a.get(i, 0), b.get(0, j));
            for k in 1..n {
                acc = self.add(&acc, &self.mul(a.get(i, k), b.get(k, j)));
            }
            acc
        })
    }

    fn mat_map(
        &self,
        a: &SquareMatrix<Self::Elem>,
        f: impl Fn(&Self::Elem) -> Result<Self::Elem>,
    ) -> Result<SquareMatrix<Self::Elem>> {
        let entries = a.entries.iter().map(f).collect::<Result<_>>()?;
        Ok(SquareMatrix { n: a.n, entries })
    }

    fn mat_truncate(&self, a: &SquareMatrix<Self::Elem>, prec: u32) -> SquareMatrix<Self::Elem> {
        SquareMatrix::from_fn(a.n, |i, j| self.truncate(a.get(i, j), prec))
    }

    /// Smallest precision among the entries.
    fn mat_precision(&self, a: &SquareMatrix<Self::Elem>) -> u32 {
        a.entries
            .iter()
            .map(|e| self.precision(e))
            .min()
            .unwrap_or_else(|| self.max_precision())
    }

    fn mat_trace(&self, a: &SquareMatrix<Self::Elem>) -> Self::Elem {
        (1..a.n).fold(a.get(0, 0).clone(), |acc, i| self.add(&acc, a.get(i, i)))
    }

    fn mat_is_zero(&self, a: &SquareMatrix<Self::Elem>) -> bool {
        a.entries.iter().all(|e| self.is_zero(e))
    }

    /// Entrywise equality at the minimum precision over all entries of both.
    fn mat_equal(&self, a: &SquareMatrix<Self::Elem>, b: &SquareMatrix<Self::Elem>) -> bool {
        if a.n != b.n {
            return false;
        }
        let prec = self.mat_precision(a).min(self.mat_precision(b));
        a.entries
            .iter()
            .zip(&b.entries)
            .all(|(x, y)| self.is_zero(&self.truncate(&self.sub(x, y), prec)))
    }

    /// Determinant by unit-pivot elimination, falling back to cofactor
    /// expansion when a column has no unit entry.
    fn mat_det(&self, a: &SquareMatrix<Self::Elem>) -> Self::Elem {
        let n = a.n;
        if n == 1 {
            return a.get(0, 0).clone();
        }
        let col0: Vec<usize> = (0..n).filter(|&i| self.is_unit(a.get(i, 0))).collect();
        let Some(&pivot) = col0.first() else {
            // cofactor expansion along the first column
            let mut acc = self.truncate(&self.zero(), self.mat_precision(a));
            for i in 0..n {
                if self.is_zero(a.get(i, 0)) {
                    continue;
                }
                let term = self.mul(a.get(i, 0), &self.mat_det(&a.minor_matrix(i, 0)));
                acc = if i % 2 == 0 {
                    self.add(&acc, &term)
                } else {
                    self.sub(&acc, &term)
                };
            }
            return acc;
        };
        let inv = self.invert(a.get(pivot, 0)).expect("unit pivot");
        // eliminate column 0 below the pivot, then recurse on the Schur complement
        let others: Vec<usize> = (0..n).filter(|&i| i != pivot).collect();
        let schur = SquareMatrix::from_fn(n - 1, |i, j| {
            let r = others[i];
            let factor = self.mul(a.get(r, 0), &inv);
            self.sub(a.get(r, j + 1), &self.mul(&factor, a.get(pivot, j + 1)))
        });
        let d = self.mul(a.get(pivot, 0), &self.mat_det(&schur));
        if pivot % 2 == 1 {
            self.neg(&d)
        } else {
            d
        }
    }

    fn mat_is_invertible(&self, a: &SquareMatrix<Self::Elem>) -> bool {
        self.is_unit(&self.mat_det(a))
    }

    /// Gauss-Jordan inverse; fails with `non-unit` when the determinant is not a unit.
    fn mat_inverse(&self, a: &SquareMatrix<Self::Elem>) -> Result<SquareMatrix<Self::Elem>> {
        let n = a.n;
        let mut m: Vec<Vec<Self::Elem>> = a.rows();
        let mut inv: Vec<Vec<Self::Elem>> = self.mat_identity(n).rows();
        for c in 0..n {
            let Some(p) = (c..n).find(|&r| self.is_unit(&m[r][c])) else {
                return Err(Error::NonUnit {
                    value: format!("determinant {}", self.render(&self.mat_det(a))),
                });
            };
            m.swap(c, p);
            inv.swap(c, p);
            let pinv = self.invert(&m[c][c])?;
            for j in 0..n {
                m[c][j] = self.mul(&m[c][j], &pinv);
                inv[c][j] = self.mul(&inv[c][j], &pinv);
            }
            for r in 0..n {
                if r == c || self.is_zero(&m[r][c]) {
                    continue;
                }
                let factor = m[r][c].clone();
                for j in 0..n {
                    m[r][j] = self.sub(&m[r][j], &self.mul(&factor, &m[c][j]));
                    inv[r][j] = self.sub(&inv[r][j], &self.mul(&factor, &inv[c][j]));
                }
            }
        }
        SquareMatrix::from_rows(inv)
    }

    fn mat_random(&self, n: usize, rng: &mut SampleRng) -> SquareMatrix<Self::Elem> {
        SquareMatrix::from_fn(n, |_, _| self.random(rng))
    }

    /// Uniform entries, redrawn until the determinant is a unit.
    fn mat_random_gl(&self, n: usize, rng: &mut SampleRng) -> SquareMatrix<Self::Elem> {
        loop {
            let m = self.mat_random(n, rng);
            if self.mat_is_invertible(&m) {
                return m;
            }
        }
    }

    /// A random invertible matrix with its first row scaled by `det⁻¹`.
    fn mat_random_sl(&self, n: usize, rng: &mut SampleRng) -> SquareMatrix<Self::Elem> {
        let mut m = self.mat_random_gl(n, rng);
        let dinv = self.invert(&self.mat_det(&m)).expect("invertible");
        for j in 0..n {
            let e = self.mul(m.get(0, j), &dinv);
            m.set(0, j, e);
        }
        m
    }

    fn mat_render(&self, a: &SquareMatrix<Self::Elem>) -> String {
        let rows: Vec<String> = (0..a.n)
            .map(|i| {
                let r: Vec<String> = a.row(i).iter().map(|e| self.to_json(e).to_string()).collect();
                format!("[{}]", r.join(", "))
            })
            .collect();
        format!("[{}]", rows.join(", "))
    }

    fn mat_to_json(&self, a: &SquareMatrix<Self::Elem>) -> Value {
        let rows: Vec<Vec<Value>> = (0..a.n)
            .map(|i| a.row(i).iter().map(|e| self.to_json(e)).collect())
            .collect();
        json!({"n": a.n, "rows": rows})
    }

    /// Accepts `{"n": .., "rows": [[..]]}` or a bare array of rows.
    fn mat_from_json(&self, v: &Value) -> Result<SquareMatrix<Self::Elem>> {
        let rows = match v {
            Value::Array(_) => v,
            _ => v
                .get("rows")
                .ok_or_else(|| Error::Input("matrix needs `rows`".into()))?,
        };
        let rows = rows
            .as_array()
            .ok_or_else(|| Error::Input("`rows` must be an array".into()))?
            .iter()
            .map(|r| {
                r.as_array()
                    .ok_or_else(|| Error::Input(format!("matrix row {r} is not an array")))?
                    .iter()
                    .map(|e| self.from_json(e))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let m = SquareMatrix::from_rows(rows)?;
        if let Some(n) = v.get("n").and_then(Value::as_u64) {
            if n as usize != m.n {
                return Err(Error::Shape(format!("declared n = {n}, rows give {}", m.n)));
            }
        }
        Ok(m)
    }

    /// Solves `A x = b` by Gauss-Jordan elimination with unit pivots.
    ///
    /// A column without a unit entry gives `singular-pivot` carrying the
    /// smallest valuation found there. A zero row with nonzero right-hand
    /// side gives `inconsistent-system`.
    fn solve_linear(
        &self,
        mut a: Vec<Vec<Self::Elem>>,
        mut b: Vec<Self::Elem>,
    ) -> Result<Vec<Self::Elem>> {
        let unknowns = a.first().map_or(0, Vec::len);
        let rows = a.len();
        let mut pivot_row = 0;
        for c in 0..unknowns {
            let Some(p) = (pivot_row..rows).find(|&r| self.is_unit(&a[r][c])) else {
                let valuation = (pivot_row..rows)
                    .map(|r| self.valuation(&a[r][c]))
                    .min()
                    .unwrap_or(0);
                return Err(Error::SingularPivot { column: c, valuation });
            };
            a.swap(pivot_row, p);
            b.swap(pivot_row, p);
            let pinv = self.invert(&a[pivot_row][c])?;
            for j in c..unknowns {
                a[pivot_row][j] = self.mul(&a[pivot_row][j], &pinv);
            }
            b[pivot_row] = self.mul(&b[pivot_row], &pinv);
            for r in 0..rows {
                if r == pivot_row || self.is_zero(&a[r][c]) {
                    continue;
                }
                let factor = a[r][c].clone();
                for j in c..unknowns {
                    let t = self.mul(&factor, &a[pivot_row][j]);
                    a[r][j] = self.sub(&a[r][j], &t);
                }
                b[r] = self.sub(&b[r], &self.mul(&factor, &b[pivot_row]));
            }
            pivot_row += 1;
        }
        if let Some(r) = (pivot_row..rows).find(|&r| !self.is_zero(&b[r])) {
            return Err(Error::InconsistentSystem(format!(
                "equation {r} reduces to 0 = {}",
                self.render(&b[r])
            )));
        }
        Ok(b.into_iter().take(unknowns).collect())
    }
}

impl<R: DeltaRing> MatrixOps for R {}
