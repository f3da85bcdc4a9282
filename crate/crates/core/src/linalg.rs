//! Exact linear algebra over the rationals.
//!
//! [`RationalMatrix`] offers rank, nullspace, and linear solves via
//! fraction-free elimination on integer-scaled rows. [`SparseEchelon`] is an
//! incremental row echelon form over an arbitrary ordered key type, used to
//! pick bases out of spanning sets and to coordinatize vectors against them.

use std::collections::BTreeMap;
use std::ops::Bound;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Sparse matrix with exact rational entries; zero entries are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    entries: BTreeMap<(usize, usize), Scalar>,
}

impl RationalMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        RationalMatrix {
            rows,
            cols,
            entries: BTreeMap::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.set(i, i, Scalar::one());
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Scalar>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zero(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            for (j, v) in row.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        Ok(m)
    }

    pub fn from_i64(rows: &[&[i64]]) -> Result<Self> {
        let rows: Vec<Vec<Scalar>> = rows
            .iter()
            .map(|r| r.iter().map(|&v| Scalar::from_integer(v.into())).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        assert!(
            i < self.rows && j < self.cols,
            "entry ({i},{j}) out of bounds"
        );
        if v.is_zero() {
            self.entries.remove(&(i, j));
        } else {
            self.entries.insert((i, j), v);
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Scalar {
        self.entries
            .get(&(i, j))
            .cloned()
            .unwrap_or_else(Scalar::zero)
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn to_dense(&self) -> Vec<Vec<Scalar>> {
        let mut out = vec![vec![Scalar::zero(); self.cols]; self.rows];
        for (&(i, j), v) in &self.entries {
            out[i][j] = v.clone();
        }
        out
    }

    pub fn mul_vec(&self, v: &[Scalar]) -> Result<Vec<Scalar>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        let mut out = vec![Scalar::zero(); self.rows];
        for (&(i, j), a) in &self.entries {
            if !v[j].is_zero() {
                out[i] += a * &v[j];
            }
        }
        Ok(out)
    }

    fn integer_rows(&self) -> Vec<Vec<BigInt>> {
        self.to_dense().iter().map(|r| integerize(r)).collect()
    }

    pub fn rank(&self) -> usize {
        bareiss(self.integer_rows(), self.cols).pivots.len()
    }

    /// Basis of `{v : A v = 0}`, one vector per free column, with the free
    /// coordinate set to 1 and the other free coordinates 0.
    pub fn nullspace(&self) -> Vec<Vec<Scalar>> {
        let ech = bareiss(self.integer_rows(), self.cols);
        nullspace_from_echelon(&ech, self.cols)
    }

    /// A solution of `A x = b`, or `None` when the system is inconsistent.
    pub fn solve(&self, b: &[Scalar]) -> Result<Option<Vec<Scalar>>> {
        if b.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side of length {} against {} rows",
                b.len(),
                self.rows
            )));
        }
        let dense = self.to_dense();
        let rows: Vec<Vec<BigInt>> = dense
            .iter()
            .zip(b)
            .map(|(r, bi)| {
                let mut full = r.clone();
                full.push(bi.clone());
                integerize(&full)
            })
            .collect();
        let ech = bareiss(rows, self.cols + 1);
        if ech.pivots.iter().any(|&(_, c)| c == self.cols) {
            return Ok(None);
        }
        let mut x = vec![Scalar::zero(); self.cols];
        for &(r, c) in ech.pivots.iter().rev() {
            let row = &ech.rows[r];
            let mut acc = Scalar::from_integer(row[self.cols].clone());
            for (j, xj) in x.iter().enumerate().skip(c + 1).take(self.cols - c - 1) {
                if !row[j].is_zero() && !xj.is_zero() {
                    acc -= Scalar::from_integer(row[j].clone()) * xj;
                }
            }
            x[c] = acc / Scalar::from_integer(row[c].clone());
        }
        Ok(Some(x))
    }
}

/// Scales a rational row by the lcm of its denominators and divides out the
/// content.
fn integerize(row: &[Scalar]) -> Vec<BigInt> {
    let lcm = row.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let ints: Vec<BigInt> = row.iter().map(|v| v.numer() * (&lcm / v.denom())).collect();
    primitive(ints)
}

fn primitive(mut ints: Vec<BigInt>) -> Vec<BigInt> {
    let g = ints.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
    if !g.is_zero() && !g.is_one() {
        for v in &mut ints {
            *v /= &g;
        }
    }
    ints
}

struct Echelon {
    rows: Vec<Vec<BigInt>>,
    /// `(row, column)` of each pivot in order.
    pivots: Vec<(usize, usize)>,
}

/// Fraction-free (Bareiss) elimination to row echelon form. Pivot rule: the
/// first row, in order, with a nonzero entry in the leftmost remaining column.
fn bareiss(mut rows: Vec<Vec<BigInt>>, cols: usize) -> Echelon {
    let n = rows.len();
    let mut prev = BigInt::one();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == n {
            break;
        }
        let Some(p) = (r..n).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let (head, tail) = rows.split_at_mut(r + 1);
        let pivot_row = &head[r];
        let pv = pivot_row[c].clone();
        for row in tail.iter_mut() {
            let f = row[c].clone();
            for j in c..cols {
                let v = (&pv * &row[j] - &f * &pivot_row[j]) / &prev;
                row[j] = v;
            }
            // entries left of c are already zero
        }
        prev = pv;
        pivots.push((r, c));
        r += 1;
    }
    Echelon { rows, pivots }
}

fn nullspace_from_echelon(ech: &Echelon, cols: usize) -> Vec<Vec<Scalar>> {
    let pivot_cols: Vec<usize> = ech.pivots.iter().map(|&(_, c)| c).collect();
    let free: Vec<usize> = (0..cols).filter(|c| !pivot_cols.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = vec![Scalar::zero(); cols];
            x[f] = Scalar::one();
            for &(r, c) in ech.pivots.iter().rev() {
                let row = &ech.rows[r];
                let mut acc = Scalar::zero();
                for (j, xj) in x.iter().enumerate().skip(c + 1) {
                    if !row[j].is_zero() && !xj.is_zero() {
                        acc -= Scalar::from_integer(row[j].clone()) * xj;
                    }
                }
                x[c] = acc / Scalar::from_integer(row[c].clone());
            }
            x
        })
        .collect()
}

fn stack(vectors: &[Vec<Scalar>]) -> Result<RationalMatrix> {
    RationalMatrix::from_rows(vectors)
}

/// Whether two lists of vectors span the same subspace.
pub fn span_equal(u: &[Vec<Scalar>], v: &[Vec<Scalar>]) -> Result<bool> {
    let len = u.first().or_else(|| v.first()).map_or(0, Vec::len);
    if u.iter().chain(v).any(|x| x.len() != len) {
        return Err(Error::DimensionMismatch("vectors of unequal length".into()));
    }
    let ru = if u.is_empty() { 0 } else { stack(u)?.rank() };
    let rv = if v.is_empty() { 0 } else { stack(v)?.rank() };
    if ru != rv {
        return Ok(false);
    }
    let both: Vec<Vec<Scalar>> = u.iter().chain(v).cloned().collect();
    let rb = if both.is_empty() {
        0
    } else {
        stack(&both)?.rank()
    };
    Ok(rb == ru)
}

/// Whether `v` is a linear combination of `u`.
pub fn in_span(v: &[Scalar], u: &[Vec<Scalar>]) -> Result<bool> {
    if u.iter().any(|x| x.len() != v.len()) {
        return Err(Error::DimensionMismatch("vectors of unequal length".into()));
    }
    if v.iter().all(Zero::is_zero) {
        return Ok(true);
    }
    if u.is_empty() {
        return Ok(false);
    }
    let ru = stack(u)?.rank();
    let mut both = u.to_vec();
    both.push(v.to_vec());
    Ok(stack(&both)?.rank() == ru)
}

/// A sparse vector keyed by `K`; zero entries are never stored.
pub type SparseVec<K> = BTreeMap<K, Scalar>;

pub(crate) fn axpy<K: Ord + Clone>(y: &mut SparseVec<K>, a: &Scalar, x: &SparseVec<K>) {
    use std::collections::btree_map::Entry;
    for (k, v) in x {
        let add = a * v;
        match y.entry(k.clone()) {
            Entry::Vacant(e) => {
                e.insert(add);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += add;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }
}

/// Incremental row echelon form: every stored row has pivot coefficient 1 at
/// its smallest key, and no stored row contains another row's pivot key in a
/// position it could be confused with. Each row remembers which combination of
/// accepted input vectors produced it.
#[derive(Clone, Debug)]
pub struct SparseEchelon<K: Ord + Clone> {
    rows: Vec<SparseVec<K>>,
    combos: Vec<SparseVec<usize>>,
    pivots: BTreeMap<K, usize>,
    accepted: usize,
    track: bool,
}

impl<K: Ord + Clone> Default for SparseEchelon<K> {
    fn default() -> Self {
        SparseEchelon {
            rows: Vec::new(),
            combos: Vec::new(),
            pivots: BTreeMap::new(),
            accepted: 0,
            track: true,
        }
    }
}

impl<K: Ord + Clone> SparseEchelon<K> {
    pub fn new() -> Self {
        Self::default()
    }

    /// An echelon that does not record input combinations; cheaper, but
    /// [`SparseEchelon::coordinates`] always returns `None`.
    pub fn lean() -> Self {
        SparseEchelon {
            track: false,
            ..Self::default()
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivot_keys(&self) -> impl Iterator<Item = &K> {
        self.pivots.keys()
    }

    /// Reduces `v` against the stored rows, returning the residual and the
    /// multiples `(row, α)` subtracted on the way.
    fn reduce_inner(&self, mut v: SparseVec<K>) -> (SparseVec<K>, Vec<(usize, Scalar)>) {
        let mut used = Vec::new();
        let mut cursor: Option<K> = None;
        loop {
            let next = {
                let range = match &cursor {
                    None => v.range::<K, _>(..),
                    Some(c) => v.range::<K, _>((Bound::Excluded(c), Bound::Unbounded)),
                };
                range
                    .filter_map(|(k, a)| self.pivots.get(k).map(|&r| (k.clone(), r, a.clone())))
                    .next()
            };
            let Some((key, row, alpha)) = next else {
                break;
            };
            axpy(&mut v, &-alpha.clone(), &self.rows[row]);
            used.push((row, alpha));
            cursor = Some(key);
        }
        (v, used)
    }

    pub fn residual(&self, v: SparseVec<K>) -> SparseVec<K> {
        self.reduce_inner(v).0
    }

    pub fn contains(&self, v: &SparseVec<K>) -> bool {
        self.residual(v.clone()).is_empty()
    }

    /// Adds `v` if it is independent of the stored rows; returns whether it was.
    pub fn insert(&mut self, v: SparseVec<K>) -> bool {
        let (mut res, used) = self.reduce_inner(v);
        let Some((lead, lead_val)) = res.iter().next().map(|(k, a)| (k.clone(), a.clone())) else {
            return false;
        };
        let inv = lead_val.recip();
        for a in res.values_mut() {
            *a *= &inv;
        }
        if !self.track {
            self.pivots.insert(lead, self.rows.len());
            self.rows.push(res);
            self.combos.push(SparseVec::new());
            self.accepted += 1;
            return true;
        }
        let mut combo: SparseVec<usize> = SparseVec::new();
        combo.insert(self.accepted, Scalar::one());
        for (row, alpha) in used {
            axpy(&mut combo, &-alpha, &self.combos[row]);
        }
        for a in combo.values_mut() {
            *a *= &inv;
        }
        self.pivots.insert(lead, self.rows.len());
        self.rows.push(res);
        self.combos.push(combo);
        self.accepted += 1;
        true
    }

    /// Coordinates of `v` with respect to the accepted input vectors, in
    /// acceptance order; `None` when `v` is outside their span.
    pub fn coordinates(&self, v: SparseVec<K>) -> Option<SparseVec<usize>> {
        if !self.track {
            return None;
        }
        let (res, used) = self.reduce_inner(v);
        if !res.is_empty() {
            return None;
        }
        let mut out = SparseVec::new();
        for (row, alpha) in used {
            axpy(&mut out, &alpha, &self.combos[row]);
        }
        Some(out)
    }
}

impl SparseEchelon<usize> {
    /// Basis of the vectors over `0..vars` annihilated by every stored row.
    pub fn nullspace(&self, vars: usize) -> Vec<SparseVec<usize>> {
        let pivot_rows: Vec<(usize, usize)> = self.pivots.iter().map(|(&k, &r)| (k, r)).collect();
        (0..vars)
            .filter(|v| !self.pivots.contains_key(v))
            .map(|free| {
                let mut x: SparseVec<usize> = SparseVec::new();
                x.insert(free, Scalar::one());
                for &(p, r) in pivot_rows.iter().rev() {
                    let mut acc = Scalar::zero();
                    for (k, a) in self.rows[r].range(p + 1..) {
                        if let Some(xk) = x.get(k) {
                            acc -= a * xk;
                        }
                    }
                    if !acc.is_zero() {
                        x.insert(p, acc);
                    }
                }
                x
            })
            .collect()
    }
}

/// Dot product of two sparse vectors.
pub fn sparse_dot<K: Ord>(a: &SparseVec<K>, b: &SparseVec<K>) -> Scalar {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let mut acc = Scalar::zero();
    for (k, v) in small {
        if let Some(w) = large.get(k) {
            acc += v * w;
        }
    }
    acc
}

/// Positive primitive integer multiple of a rational vector, used to compare
/// directions independently of scaling.
pub fn normalize_direction(v: &[Scalar]) -> Vec<BigInt> {
    let mut ints = integerize(v);
    if let Some(first) = ints.iter().find(|x| !x.is_zero()) {
        if first.is_negative() {
            for x in &mut ints {
                *x = -x.clone();
            }
        }
    }
    ints
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;
    use proptest::prelude::*;

    #[test]
    fn nullspace_examples() {
        assert!(RationalMatrix::identity(3).nullspace().is_empty());
        assert_eq!(RationalMatrix::zero(2, 3).nullspace().len(), 3);
        let a = RationalMatrix::from_i64(&[&[1, 2], &[2, 4]]).unwrap();
        let ns = a.nullspace();
        assert_eq!(ns.len(), 1);
        assert_eq!(
            normalize_direction(&ns[0]),
            vec![BigInt::from(2), BigInt::from(-1)]
        );
    }

    #[test]
    fn span_examples() {
        let u = vec![vec![int(1), int(0)], vec![int(0), int(1)]];
        assert!(span_equal(&u, &u).unwrap());
        assert!(in_span(&[int(1), int(1)], &u).unwrap());
        assert!(!in_span(&[int(1), int(1)], &u[..1]).unwrap());
        let outer: Vec<Vec<Scalar>> = [2, -3, 5]
            .iter()
            .map(|&a| [1, 4, -2, 7].iter().map(|&b| int(a * b)).collect())
            .collect();
        assert_eq!(RationalMatrix::from_rows(&outer).unwrap().rank(), 1);
    }

    #[test]
    fn dimension_errors() {
        let a = RationalMatrix::identity(2);
        assert!(a.solve(&[int(1)]).is_err());
        assert!(span_equal(&[vec![int(1)]], &[vec![int(1), int(2)]]).is_err());
        assert!(in_span(&[int(1)], &[vec![int(1), int(0)]]).is_err());
    }

    #[test]
    fn solve_reports_inconsistency() {
        let a = RationalMatrix::from_i64(&[&[1, 1], &[2, 2]]).unwrap();
        assert_eq!(a.solve(&[int(1), int(3)]).unwrap(), None);
        let x = a.solve(&[int(2), int(4)]).unwrap().unwrap();
        assert_eq!(a.mul_vec(&x).unwrap(), vec![int(2), int(4)]);
    }

    #[test]
    fn echelon_coordinates() {
        let mut e: SparseEchelon<usize> = SparseEchelon::new();
        let v = |pairs: &[(usize, i64)]| -> SparseVec<usize> {
            pairs.iter().map(|&(k, a)| (k, int(a))).collect()
        };
        assert!(e.insert(v(&[(0, 1), (1, 1)])));
        assert!(e.insert(v(&[(1, 1), (2, 1)])));
        assert!(!e.insert(v(&[(0, 1), (2, -1)])));
        let c = e.coordinates(v(&[(0, 2), (1, 5), (2, 3)])).unwrap();
        assert_eq!(c.get(&0), Some(&int(2)));
        assert_eq!(c.get(&1), Some(&int(3)));
        assert!(e.coordinates(v(&[(2, 1)])).is_none());
        let ns = e.nullspace(3);
        assert_eq!(ns.len(), 1);
        assert_eq!(ns[0], v(&[(0, 1), (1, -1), (2, 1)]));
    }

    fn small_matrix() -> impl Strategy<Value = Vec<Vec<i64>>> {
        (1usize..6, 1usize..7)
            .prop_flat_map(|(r, c)| prop::collection::vec(prop::collection::vec(-3i64..=3, c), r))
    }

    fn to_q(rows: &[Vec<i64>]) -> Vec<Vec<Scalar>> {
        rows.iter()
            .map(|r| r.iter().map(|&a| int(a)).collect())
            .collect()
    }

    proptest! {
        #[test]
        fn nullspace_is_annihilated(rows in small_matrix()) {
            let a = RationalMatrix::from_rows(&to_q(&rows)).unwrap();
            let ns = a.nullspace();
            for v in &ns {
                prop_assert!(a.mul_vec(v).unwrap().iter().all(Zero::is_zero));
            }
            prop_assert_eq!(a.rank() + ns.len(), a.cols());
        }

        #[test]
        fn echelon_matches_bareiss(rows in small_matrix()) {
            let a = RationalMatrix::from_rows(&to_q(&rows)).unwrap();
            let mut e: SparseEchelon<usize> = SparseEchelon::new();
            for r in to_q(&rows) {
                e.insert(r.into_iter().enumerate().filter(|(_, v)| !v.is_zero()).collect());
            }
            prop_assert_eq!(e.rank(), a.rank());
            prop_assert_eq!(e.nullspace(a.cols()).len(), a.nullspace().len());
        }

        #[test]
        fn solve_agrees_with_in_span(rows in small_matrix(), x in prop::collection::vec(-2i64..=2, 6)) {
            let a = RationalMatrix::from_rows(&to_q(&rows)).unwrap();
            let xs: Vec<Scalar> = x.iter().take(a.cols()).map(|&v| int(v)).collect();
            prop_assume!(xs.len() == a.cols());
            let b = a.mul_vec(&xs).unwrap();
            let sol = a.solve(&b).unwrap().expect("consistent by construction");
            prop_assert_eq!(a.mul_vec(&sol).unwrap(), b.clone());
            // columns of A span b
            let cols: Vec<Vec<Scalar>> = (0..a.cols()).map(|j| (0..a.rows()).map(|i| a.get(i, j)).collect()).collect();
            prop_assert!(in_span(&b, &cols).unwrap());
        }
    }
}
