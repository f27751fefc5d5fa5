//! Exact integer and rational linear algebra.
//!
//! Integer matrices back the Hermite and Smith normal forms; full-rank
//! lattices in `Q^n` are stored by a rational basis (columns) together with
//! the exact inverse, so membership and coordinates are a single product.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::arith::{prime_divisors, valuation_rational};
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntegerMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntegerMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntegerMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn from_rows<T: Into<BigInt> + Clone>(rows: &[Vec<T>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged matrix rows".into()));
        }
        let data = rows.iter().flat_map(|row| row.iter().cloned().map(Into::into)).collect();
        Ok(IntegerMatrix { rows: r, cols: c, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| self[(i, j)].clone()).collect()).collect()
    }

    pub fn mul(&self, other: &IntegerMatrix) -> Result<IntegerMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = IntegerMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = a * &other[(k, j)];
                    out[(i, j)] += prod;
                }
            }
        }
        Ok(out)
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> Result<BigInt> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch("determinant of a non-square matrix".into()));
        }
        Ok(bareiss_det(self.to_rows()))
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// col[dst] += factor * col[src]
    fn add_col(&mut self, dst: usize, src: usize, factor: &BigInt) {
        if factor.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let v = &self[(i, src)] * factor;
            self[(i, dst)] += v;
        }
    }

    /// row[dst] += factor * row[src]
    fn add_row(&mut self, dst: usize, src: usize, factor: &BigInt) {
        if factor.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let v = &self[(src, j)] * factor;
            self[(dst, j)] += v;
        }
    }

    fn negate_col(&mut self, j: usize) {
        for i in 0..self.rows {
            let v = -&self[(i, j)];
            self[(i, j)] = v;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = -&self[(i, j)];
            self[(i, j)] = v;
        }
    }
}

impl std::ops::Index<(usize, usize)> for IntegerMatrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntegerMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for IntegerMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> = self
            .to_rows()
            .into_iter()
            .map(|r| r.into_iter().map(|x| x.to_string()).collect())
            .collect();
        write!(f, "{rows:?}")
    }
}

pub(crate) fn bareiss_det(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    sign * a[n - 1][n - 1].clone()
}

/// Column-style Hermite normal form.
///
/// The result `H = M·U` (U unimodular) is in column echelon form: the pivot
/// of each nonzero column is positive, lies strictly below the pivot of the
/// previous column, and every entry left of a pivot in its row is reduced to
/// `[0, pivot)`. Zero columns are moved to the right.
pub fn hnf(m: &IntegerMatrix) -> IntegerMatrix {
    let mut h = m.clone();
    let mut pivot_col = 0;
    for i in 0..h.rows {
        if pivot_col == h.cols {
            break;
        }
        // gcd-combine row i over the remaining columns into pivot_col
        loop {
            let nonzero: Vec<usize> = (pivot_col..h.cols).filter(|&j| !h[(i, j)].is_zero()).collect();
            if nonzero.is_empty() {
                break;
            }
            let j_min = *nonzero.iter().min_by_key(|&&j| h[(i, j)].abs()).unwrap();
            h.swap_cols(pivot_col, j_min);
            let mut done = true;
            for j in pivot_col + 1..h.cols {
                if h[(i, j)].is_zero() {
                    continue;
                }
                let q = h[(i, j)].div_floor(&h[(i, pivot_col)]);
                h.add_col(j, pivot_col, &-q);
                if !h[(i, j)].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if h[(i, pivot_col)].is_zero() {
            continue;
        }
        if h[(i, pivot_col)].is_negative() {
            h.negate_col(pivot_col);
        }
        let pivot = h[(i, pivot_col)].clone();
        for j in 0..pivot_col {
            let q = h[(i, j)].div_floor(&pivot);
            h.add_col(j, pivot_col, &-q);
        }
        pivot_col += 1;
    }
    h
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithForm {
    /// Invariant factors `d_1 | d_2 | ...`, all nonnegative, `min(rows, cols)` of them.
    pub diagonal: Vec<BigInt>,
    /// Unimodular row transform.
    pub u: IntegerMatrix,
    /// Unimodular column transform, with `u·m·v = diag(d)`.
    pub v: IntegerMatrix,
}

/// Smith normal form with both unimodular transforms.
pub fn snf(m: &IntegerMatrix) -> SmithForm {
    let (rows, cols) = (m.rows, m.cols);
    let mut a = m.clone();
    let mut u = IntegerMatrix::identity(rows);
    let mut v = IntegerMatrix::identity(cols);
    let n = rows.min(cols);
    for t in 0..n {
        // smallest nonzero entry of the trailing block
        let Some((pi, pj)) = (t..rows)
            .flat_map(|i| (t..cols).map(move |j| (i, j)))
            .filter(|&(i, j)| !a[(i, j)].is_zero())
            .min_by_key(|&(i, j)| a[(i, j)].abs())
        else {
            break;
        };
        a.swap_rows(t, pi);
        u.swap_rows(t, pi);
        a.swap_cols(t, pj);
        v.swap_cols(t, pj);
        loop {
            let mut changed = false;
            for i in t + 1..rows {
                if a[(i, t)].is_zero() {
                    continue;
                }
                let q = a[(i, t)].div_floor(&a[(t, t)]);
                a.add_row(i, t, &-&q);
                u.add_row(i, t, &-q);
                if !a[(i, t)].is_zero() {
                    a.swap_rows(t, i);
                    u.swap_rows(t, i);
                    changed = true;
                }
            }
            for j in t + 1..cols {
                if a[(t, j)].is_zero() {
                    continue;
                }
                let q = a[(t, j)].div_floor(&a[(t, t)]);
                a.add_col(j, t, &-&q);
                v.add_col(j, t, &-q);
                if !a[(t, j)].is_zero() {
                    a.swap_cols(t, j);
                    v.swap_cols(t, j);
                    changed = true;
                }
            }
            if changed {
                continue;
            }
            // divisibility of the trailing block
            let offender = (t + 1..rows)
                .flat_map(|i| (t + 1..cols).map(move |j| (i, j)))
                .find(|&(i, j)| !(&a[(i, j)] % &a[(t, t)]).is_zero());
            match offender {
                Some((i, _)) => {
                    a.add_row(t, i, &BigInt::one());
                    u.add_row(t, i, &BigInt::one());
                }
                None => break,
            }
        }
        if a[(t, t)].is_negative() {
            a.negate_row(t);
            u.negate_row(t);
        }
    }
    let diagonal = (0..n).map(|i| a[(i, i)].clone()).collect();
    SmithForm { diagonal, u, v }
}

pub type QVector = Vec<BigRational>;

/// Inverse of the matrix with the given columns, as rows; `None` if singular.
pub fn rational_inverse(columns: &[QVector]) -> Option<Vec<QVector>> {
    let n = columns.len();
    // augmented rows [A | I]
    let mut rows: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            let mut r: Vec<BigRational> = columns.iter().map(|c| c[i].clone()).collect();
            r.extend((0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !rows[r][col].is_zero())?;
        rows.swap(col, piv);
        let inv = rows[col][col].recip();
        for x in rows[col].iter_mut() {
            *x *= &inv;
        }
        for r in 0..n {
            if r == col || rows[r][col].is_zero() {
                continue;
            }
            let f = rows[r][col].clone();
            for c in 0..2 * n {
                let delta = &f * &rows[col][c];
                rows[r][c] -= delta;
            }
        }
    }
    // return as row-major inverse
    Some(rows.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Rank of a family of rational vectors.
pub fn rational_rank(vectors: &[QVector]) -> usize {
    let mut rows: Vec<QVector> = vectors.iter().filter(|v| v.iter().any(|x| !x.is_zero())).cloned().collect();
    let width = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..width {
        let Some(piv) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, piv);
        let inv = rows[rank][col].recip();
        for r in rank + 1..rows.len() {
            if rows[r][col].is_zero() {
                continue;
            }
            let f = &rows[r][col] * &inv;
            for c in col..width {
                let delta = &f * &rows[rank][c];
                rows[r][c] -= delta;
            }
        }
        rank += 1;
    }
    rank
}

/// Whether `v` lies in the rational span of `vectors`.
pub fn in_rational_span(vectors: &[QVector], v: &[BigRational]) -> bool {
    let mut all = vectors.to_vec();
    let before = rational_rank(&all);
    all.push(v.to_vec());
    rational_rank(&all) == before
}

fn rational_det(columns: &[QVector]) -> BigRational {
    let n = columns.len();
    let mut rows: Vec<Vec<BigRational>> =
        (0..n).map(|i| columns.iter().map(|c| c[i].clone()).collect()).collect();
    let mut det = BigRational::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !rows[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if piv != col {
            rows.swap(col, piv);
            det = -det;
        }
        det *= &rows[col][col];
        for r in col + 1..n {
            if rows[r][col].is_zero() {
                continue;
            }
            let f = &rows[r][col] / &rows[col][col];
            for c in col..n {
                let delta = &f * &rows[col][c];
                rows[r][c] -= delta;
            }
        }
    }
    det
}

/// A full-rank lattice in `Q^n`, given by basis columns.
#[derive(Clone, PartialEq, Eq)]
pub struct QLattice {
    basis: Vec<QVector>,
    inverse: Vec<QVector>,
    det: BigRational,
}

impl QLattice {
    pub fn new(basis: Vec<QVector>) -> Result<Self> {
        let n = basis.len();
        if basis.iter().any(|b| b.len() != n) {
            return Err(Error::DimensionMismatch(format!("lattice basis must be {n} vectors of length {n}")));
        }
        let inverse = rational_inverse(&basis).ok_or(Error::SingularBasis)?;
        let det = rational_det(&basis);
        Ok(QLattice { basis, inverse, det })
    }

    /// The standard lattice `Z^n`.
    pub fn standard(n: usize) -> Self {
        Self::scaled(n, &BigRational::one())
    }

    /// `c·Z^n` for a nonzero rational `c`.
    pub fn scaled(n: usize, c: &BigRational) -> Self {
        let basis = (0..n)
            .map(|j| (0..n).map(|i| if i == j { c.clone() } else { BigRational::zero() }).collect())
            .collect();
        QLattice::new(basis).expect("nonzero scaling")
    }

    /// Diagonal lattice with the given nonzero diagonal entries.
    pub fn diagonal(entries: &[BigRational]) -> Result<Self> {
        let n = entries.len();
        let basis = (0..n)
            .map(|j| (0..n).map(|i| if i == j { entries[j].clone() } else { BigRational::zero() }).collect())
            .collect();
        QLattice::new(basis)
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[QVector] {
        &self.basis
    }

    pub fn det(&self) -> &BigRational {
        &self.det
    }

    pub fn is_standard(&self) -> bool {
        *self == QLattice::standard(self.dim())
    }

    /// Coordinates of `w` in the lattice basis.
    pub fn coordinates(&self, w: &[BigRational]) -> Result<QVector> {
        if w.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against lattice of rank {}",
                w.len(),
                self.dim()
            )));
        }
        Ok(self
            .inverse
            .iter()
            .map(|row| row.iter().zip(w).fold(BigRational::zero(), |acc, (a, b)| acc + a * b))
            .collect())
    }

    /// Vector with the given coordinates in the lattice basis.
    pub fn from_coordinates(&self, c: &[BigRational]) -> QVector {
        let n = self.dim();
        (0..n)
            .map(|i| self.basis.iter().zip(c).fold(BigRational::zero(), |acc, (b, x)| acc + &b[i] * x))
            .collect()
    }

    pub fn contains(&self, w: &[BigRational]) -> Result<bool> {
        Ok(self.coordinates(w)?.iter().all(|x| x.denom().is_one()))
    }

    /// Membership in the completion `L ⊗ Z_p`.
    pub fn contains_at(&self, w: &[BigRational], p: u64) -> Result<bool> {
        Ok(self
            .coordinates(w)?
            .iter()
            .all(|x| valuation_rational(x, p).is_none_or(|v| v >= 0)))
    }
}

impl fmt::Debug for QLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cols: Vec<Vec<String>> = self
            .basis
            .iter()
            .map(|c| c.iter().map(crate::arith::fmt_rational).collect())
            .collect();
        write!(f, "QLattice{cols:?}")
    }
}

/// `[big : small]`, after checking `small ⊆ big`.
pub fn lattice_index(big: &QLattice, small: &QLattice) -> Result<BigInt> {
    if big.dim() != small.dim() {
        return Err(Error::DimensionMismatch("lattices of different rank".into()));
    }
    for (i, b) in small.basis().iter().enumerate() {
        if !big.contains(b)? {
            return Err(Error::NotSublattice(i));
        }
    }
    let ratio = (small.det() / big.det()).abs();
    debug_assert!(ratio.denom().is_one());
    Ok(ratio.to_integer())
}

/// The exponent `m` with `n·w ∈ L ⊗ Z_p  ⇔  p^m | n`.
pub fn p_order_in_lattice(w: &[BigRational], lattice: &QLattice, p: u64) -> Result<u32> {
    let coords = lattice.coordinates(w)?;
    let min_val = coords.iter().filter_map(|x| valuation_rational(x, p)).min().unwrap_or(0);
    Ok((-min_val).max(0) as u32)
}

/// A family of local lattices: one default lattice used at all primes
/// except finitely many exceptions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalLattices {
    pub default: QLattice,
    pub exceptions: BTreeMap<u64, QLattice>,
}

impl LocalLattices {
    pub fn standard(n: usize) -> Self {
        LocalLattices { default: QLattice::standard(n), exceptions: BTreeMap::new() }
    }

    pub fn at(&self, p: u64) -> &QLattice {
        self.exceptions.get(&p).unwrap_or(&self.default)
    }

    pub fn dim(&self) -> usize {
        self.default.dim()
    }

    /// Primes at which `w` may fail to be integral: denominators of its
    /// default coordinates together with every exception prime.
    pub fn candidate_primes(&self, w: &[BigRational]) -> Result<Vec<u64>> {
        let coords = self.default.coordinates(w)?;
        let mut primes: Vec<u64> = self.exceptions.keys().copied().collect();
        for c in &coords {
            let den: BigUint = c.denom().magnitude().clone();
            primes.extend(prime_divisors(&den));
        }
        primes.sort_unstable();
        primes.dedup();
        Ok(primes)
    }

    /// Per-prime orders `(p, m_p)` with `m_p > 0`, primes ascending.
    pub fn p_orders(&self, w: &[BigRational]) -> Result<Vec<(u64, u32)>> {
        let mut out = Vec::new();
        for p in self.candidate_primes(w)? {
            let m = p_order_in_lattice(w, self.at(p), p)?;
            if m > 0 {
                out.push((p, m));
            }
        }
        Ok(out)
    }
}

/// Least `n > 0` with `n·w` in every local lattice.
pub fn order_in_lattice(w: &[BigRational], lattices: &LocalLattices) -> Result<BigUint> {
    Ok(lattices
        .p_orders(w)?
        .into_iter()
        .fold(BigUint::one(), |acc, (p, m)| acc * num_traits::pow(BigUint::from(p), m as usize)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{rat, rat_int};

    fn int_vec(v: &[i64]) -> QVector {
        v.iter().map(|&x| rat_int(x)).collect()
    }

    /// Whether the integer vector `x` lies in the integer column span of `m`
    /// (oracle: bounded coefficient search, fine for 2x2 examples).
    fn in_span_brute(m: &IntegerMatrix, x: &[i64], bound: i64) -> bool {
        let cols: Vec<Vec<BigInt>> = (0..m.cols()).map(|j| m.column(j)).collect();
        let target: Vec<BigInt> = x.iter().map(|&v| BigInt::from(v)).collect();
        fn rec(cols: &[Vec<BigInt>], acc: Vec<BigInt>, target: &[BigInt], bound: i64) -> bool {
            match cols.split_first() {
                None => acc == target,
                Some((c, rest)) => (-bound..=bound).any(|k| {
                    let next: Vec<BigInt> = acc.iter().zip(c).map(|(a, b)| a + b * k).collect();
                    rec(rest, next, target, bound)
                }),
            }
        }
        rec(&cols, vec![BigInt::zero(); m.rows()], &target, bound)
    }

    #[test]
    fn hnf_fixed_points() {
        let id = IntegerMatrix::identity(3);
        assert_eq!(hnf(&id), id);
        let z = IntegerMatrix::zeros(2, 3);
        assert_eq!(hnf(&z), z);
    }

    #[test]
    fn hnf_of_small_matrix_spans_agree() {
        let m = IntegerMatrix::from_rows(&[vec![4i64, 2], vec![2, 2]]).unwrap();
        let h = hnf(&m);
        assert_eq!(h, IntegerMatrix::from_rows(&[vec![2i64, 0], vec![0, 2]]).unwrap());
        for j in 0..2 {
            let hc: Vec<i64> = h.column(j).iter().map(|x| x.try_into().unwrap()).collect();
            assert!(in_span_brute(&m, &hc, 6));
            let mc: Vec<i64> = m.column(j).iter().map(|x| x.try_into().unwrap()).collect();
            assert!(in_span_brute(&h, &mc, 6));
        }
    }

    #[test]
    fn snf_examples() {
        let s = snf(&IntegerMatrix::identity(3));
        assert_eq!(s.diagonal, vec![BigInt::one(); 3]);

        let m = IntegerMatrix::from_rows(&[vec![2i64, 4], vec![6, 8]]).unwrap();
        let s = snf(&m);
        assert_eq!(s.diagonal, vec![BigInt::from(2), BigInt::from(4)]);
        let d = s.u.mul(&m).unwrap().mul(&s.v).unwrap();
        assert_eq!(d, IntegerMatrix::from_rows(&[vec![2i64, 0], vec![0, 4]]).unwrap());
        assert_eq!(s.u.det().unwrap().abs(), BigInt::one());
        assert_eq!(s.v.det().unwrap().abs(), BigInt::one());

        let s = snf(&IntegerMatrix::zeros(2, 2));
        assert_eq!(s.diagonal, vec![BigInt::zero(), BigInt::zero()]);
    }

    #[test]
    fn lattice_indices() {
        let z2 = QLattice::standard(2);
        let two = QLattice::scaled(2, &rat_int(2));
        assert_eq!(lattice_index(&z2, &two).unwrap(), BigInt::from(4));
        assert_eq!(lattice_index(&z2, &z2).unwrap(), BigInt::one());
        let l = QLattice::new(vec![int_vec(&[2, 0]), int_vec(&[1, 3])]).unwrap();
        // coset enumeration oracle: count residues of Z^2 mod l in the box [0,6)^2
        let mut reps: Vec<QVector> = Vec::new();
        for a in 0..6 {
            for b in 0..6 {
                let x = int_vec(&[a, b]);
                let fresh = reps.iter().all(|r| {
                    let diff: QVector = x.iter().zip(r).map(|(p, q)| p - q).collect();
                    !l.contains(&diff).unwrap()
                });
                if fresh {
                    reps.push(x);
                }
            }
        }
        assert_eq!(reps.len(), 6);
        assert_eq!(lattice_index(&z2, &l).unwrap(), BigInt::from(6));
        assert_eq!(lattice_index(&two, &z2), Err(Error::NotSublattice(0)));
    }

    #[test]
    fn singular_basis_rejected() {
        assert_eq!(
            QLattice::new(vec![int_vec(&[1, 2]), int_vec(&[2, 4])]),
            Err(Error::SingularBasis)
        );
    }

    #[test]
    fn p_orders() {
        let z2 = QLattice::standard(2);
        assert_eq!(p_order_in_lattice(&[rat(1, 4), rat_int(3)], &z2, 2).unwrap(), 2);
        assert_eq!(p_order_in_lattice(&int_vec(&[5, 7]), &z2, 3).unwrap(), 0);
        let half = QLattice::scaled(1, &rat(1, 2));
        // brute force: smallest m with 2^m/4 in (1/2)Z
        let brute = (0..4)
            .find(|&m| half.contains(&[rat(1 << m, 4)]).unwrap())
            .unwrap();
        assert_eq!(brute, 1);
        assert_eq!(p_order_in_lattice(&[rat(1, 4)], &half, 2).unwrap(), 1);
    }

    #[test]
    fn global_orders() {
        let z1 = LocalLattices::standard(1);
        assert_eq!(order_in_lattice(&[rat(1, 6)], &z1).unwrap(), BigUint::from(6u32));
        assert_eq!(order_in_lattice(&[rat_int(4)], &z1).unwrap(), BigUint::one());
        let z2 = LocalLattices::standard(2);
        assert_eq!(order_in_lattice(&[rat(1, 4), rat(1, 9)], &z2).unwrap(), BigUint::from(36u32));
        let mut exc = LocalLattices::standard(1);
        exc.exceptions.insert(3, QLattice::scaled(1, &rat(1, 3)));
        assert_eq!(order_in_lattice(&[rat(1, 6)], &exc).unwrap(), BigUint::from(2u32));
    }
}
