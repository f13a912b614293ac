//! Exact scalars and dense exact linear algebra.
//!
//! Scalars are arbitrary-precision rationals (always in lowest terms,
//! positive denominator). Matrices are immutable after construction;
//! elimination works on integer-scaled copies so that every intermediate
//! value stays an exact integer.

use std::sync::Mutex;
use std::sync::OnceLock;

use num::bigint::Sign;
use num::{BigInt, BigRational, Integer, One, Signed, Zero};
use thiserror::Error;

pub type Int = BigInt;
pub type Rational = BigRational;

/// `n/d` as an exact rational. Panics on `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(Int::from(n), Int::from(d))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(Int::from(n))
}

/// Parses `"p"` or `"p/q"`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let num: Int = p.trim().parse().ok()?;
            let den: Int = q.trim().parse().ok()?;
            if den.is_zero() {
                None
            } else {
                Some(Rational::new(num, den))
            }
        }
        None => s.parse::<Int>().ok().map(Rational::from_integer),
    }
}

/// Canonical wire form: `"p"` for integers, `"p/q"` otherwise.
pub fn rational_to_string(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

static FACTORIALS: OnceLock<Mutex<Vec<Int>>> = OnceLock::new();

/// `n!`, memoized across the whole process.
pub fn factorial(n: u32) -> Int {
    let cache = FACTORIALS.get_or_init(|| Mutex::new(vec![Int::one()]));
    let mut cache = cache.lock().unwrap();
    while cache.len() <= n as usize {
        let next = cache.last().unwrap() * Int::from(cache.len());
        cache.push(next);
    }
    cache[n as usize].clone()
}

/// Binomial coefficient with the out-of-range convention `C(n, k) = 0`
/// for `k < 0` or `k > n`. The upper argument may be negative, in which
/// case the result is 0 as well (needed by truncating dimension sums).
pub fn binomial(n: i64, k: i64) -> Int {
    if k < 0 || k > n || n < 0 {
        return Int::zero();
    }
    let k = k.min(n - k);
    let mut num = Int::one();
    let mut den = Int::one();
    for i in 0..k {
        num *= Int::from(n - i);
        den *= Int::from(i + 1);
    }
    num / den
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MatrixError {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
}

/// Dense matrix of exact rationals. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RatMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.data[i * n + i] = Rational::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(
            rows.iter().all(|row| row.len() == c),
            "ragged rows in matrix constructor"
        );
        RatMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        RatMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.at(j, i).clone())
    }

    /// Stacks `self` on top of `other`.
    pub fn vstack(&self, other: &RatMatrix) -> Result<RatMatrix, MatrixError> {
        if self.cols != other.cols {
            return Err(MatrixError::DimMismatch(format!(
                "vstack of {} and {} columns",
                self.cols, other.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(RatMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn matvec(&self, x: &[Rational]) -> Vec<Rational> {
        assert_eq!(x.len(), self.cols, "matvec length mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    /// Exact rank and nullity (`cols - rank`) over the rationals.
    pub fn rank_and_nullity(&self) -> (usize, usize) {
        let mut rows = self.integer_rows();
        let rank = echelon_reduce(&mut rows, self.cols);
        (rank, self.cols - rank)
    }

    pub fn rank(&self) -> usize {
        self.rank_and_nullity().0
    }

    /// Exact determinant via fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> Result<Rational, MatrixError> {
        if self.rows != self.cols {
            return Err(MatrixError::NonSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        if n == 0 {
            return Ok(Rational::one());
        }
        // Scale each row to integers; det(self) = det(int rows) / scale.
        let mut scale = Int::one();
        let mut m: Vec<Vec<Int>> = Vec::with_capacity(n);
        for i in 0..n {
            let (ints, s) = scale_row(self.row(i));
            scale *= s;
            m.push(ints);
        }
        let mut sign = 1i32;
        let mut prev = Int::one();
        for p in 0..n - 1 {
            // partial pivot: first row with a nonzero entry in column p
            let Some(pivot_row) = (p..n).find(|&i| !m[i][p].is_zero()) else {
                return Ok(Rational::zero());
            };
            if pivot_row != p {
                m.swap(p, pivot_row);
                sign = -sign;
            }
            for i in p + 1..n {
                for j in p + 1..n {
                    let t = &m[p][p] * &m[i][j] - &m[i][p] * &m[p][j];
                    // exact by the Bareiss minor identity
                    m[i][j] = t / &prev;
                }
                m[i][p] = Int::zero();
            }
            prev = m[p][p].clone();
        }
        let det_int = m[n - 1][n - 1].clone() * Int::from(sign);
        Ok(Rational::new(det_int, scale))
    }

    /// Solves `self * X = rhs` for square nonsingular `self`, all columns
    /// of `rhs` at once. Returns `Ok(None)` when `self` is singular.
    pub fn solve_many(&self, rhs: &RatMatrix) -> Result<Option<RatMatrix>, MatrixError> {
        if self.rows != self.cols {
            return Err(MatrixError::NonSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        if rhs.rows != self.rows {
            return Err(MatrixError::DimMismatch(format!(
                "solve: {} equations, rhs has {} rows",
                self.rows, rhs.rows
            )));
        }
        let n = self.rows;
        let width = n + rhs.cols;
        // augmented integer rows
        let mut rows: Vec<Vec<Int>> = Vec::with_capacity(n);
        for i in 0..n {
            let mut full: Vec<Rational> = self.row(i).to_vec();
            full.extend_from_slice(rhs.row(i));
            let (ints, _) = scale_row(&full);
            rows.push(ints);
        }
        let rank = echelon_reduce_cols(&mut rows, n, width);
        if rank < n {
            return Ok(None);
        }
        // back substitution; after echelon_reduce_cols row i pivots at column i
        let mut sol = RatMatrix::zero(n, rhs.cols);
        for col in 0..rhs.cols {
            for i in (0..n).rev() {
                let mut s = Rational::from_integer(rows[i][n + col].clone());
                for j in i + 1..n {
                    s -= Rational::from_integer(rows[i][j].clone()) * sol.at(j, col);
                }
                let x = s / Rational::from_integer(rows[i][i].clone());
                sol.data[i * rhs.cols + col] = x;
            }
        }
        Ok(Some(sol))
    }

    fn integer_rows(&self) -> Vec<Vec<Int>> {
        (0..self.rows).map(|i| scale_row(self.row(i)).0).collect()
    }
}

/// Multiplies a rational row by the lcm of its denominators; returns the
/// integer row and the scale factor applied.
fn scale_row(row: &[Rational]) -> (Vec<Int>, Int) {
    let mut lcm = Int::one();
    for r in row {
        lcm = lcm.lcm(r.denom());
    }
    let ints = row
        .iter()
        .map(|r| r.numer() * (&lcm / r.denom()))
        .collect();
    (ints, lcm)
}

fn reduce_row(row: &mut [Int]) {
    let mut g = Int::zero();
    for v in row.iter() {
        if !v.is_zero() {
            g = g.gcd(v);
            if g.is_one() {
                return;
            }
        }
    }
    if g.is_zero() || g.is_one() {
        return;
    }
    for v in row.iter_mut() {
        *v /= &g;
    }
}

/// Integer-preserving forward elimination over all columns; rows are
/// divided by their gcd after every combination to keep entries small.
/// Returns the rank. Row order within the echelon is by pivot column.
fn echelon_reduce(rows: &mut Vec<Vec<Int>>, cols: usize) -> usize {
    echelon_reduce_cols(rows, cols, cols)
}

/// Same as `echelon_reduce` but only pivots on the first `pivot_cols`
/// columns (the remaining columns ride along, e.g. augmented right-hand
/// sides).
fn echelon_reduce_cols(rows: &mut Vec<Vec<Int>>, pivot_cols: usize, _width: usize) -> usize {
    let mut rank = 0;
    for col in 0..pivot_cols {
        let Some(pivot) = (rank..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let (head, tail) = rows.split_at_mut(rank + 1);
        let prow = &head[rank];
        for row in tail.iter_mut() {
            if row[col].is_zero() {
                continue;
            }
            let g = prow[col].gcd(&row[col]);
            let a = &prow[col] / &g; // multiplier for row
            let b = &row[col] / &g; // multiplier for pivot row
            for j in col..row.len() {
                let t = &a * &row[j] - &b * &prow[j];
                row[j] = t;
            }
            // keep sign convention stable: leading entries nonnegative
            reduce_row(row);
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    // normalize pivot rows to a positive leading entry for determinism
    for row in rows.iter_mut().take(rank) {
        if let Some(first) = row.iter().find(|v| !v.is_zero()) {
            if first.sign() == Sign::Minus {
                for v in row.iter_mut() {
                    *v = -std::mem::take(v);
                }
            }
        }
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn binomial_small_values() {
        assert_eq!(binomial(5, 2), Int::from(10));
        assert_eq!(binomial(3, 5), Int::zero());
        assert_eq!(binomial(0, 0), Int::one());
        assert_eq!(binomial(-2, 0), Int::zero());
        assert_eq!(binomial(7, 0), Int::one());
    }

    #[test]
    fn factorial_values() {
        assert_eq!(factorial(0), Int::one());
        assert_eq!(factorial(5), Int::from(120));
        assert_eq!(factorial(10), Int::from(3628800));
    }

    #[test]
    fn rational_round_trip() {
        let r = rat(-6, 4);
        assert_eq!(rational_to_string(&r), "-3/2");
        assert_eq!(parse_rational("-3/2"), Some(r));
        assert_eq!(parse_rational("7"), Some(rat_int(7)));
        assert_eq!(rational_to_string(&rat_int(7)), "7");
        assert_eq!(parse_rational("1/0"), None);
    }

    #[test]
    fn rank_identity_and_ones() {
        assert_eq!(RatMatrix::identity(2).rank_and_nullity(), (2, 0));
        let ones = RatMatrix::from_fn(3, 3, |_, _| Rational::one());
        assert_eq!(ones.rank_and_nullity(), (1, 2));
    }

    #[test]
    fn determinant_examples() {
        assert_eq!(
            RatMatrix::identity(4).determinant().unwrap(),
            Rational::one()
        );
        let rank1 = RatMatrix::from_fn(3, 3, |i, j| rat_int((i as i64 + 1) * (j as i64 + 1)));
        assert_eq!(rank1.determinant().unwrap(), Rational::zero());
        let diag = RatMatrix::from_rows(vec![
            vec![rat(1, 2), Rational::zero()],
            vec![Rational::zero(), rat_int(3)],
        ]);
        assert_eq!(diag.determinant().unwrap(), rat(3, 2));
        let non_square = RatMatrix::zero(2, 3);
        assert!(matches!(
            non_square.determinant(),
            Err(MatrixError::NonSquare { rows: 2, cols: 3 })
        ));
    }

    #[test]
    fn solve_simple_system() {
        let a = RatMatrix::from_rows(vec![
            vec![rat_int(2), rat_int(1)],
            vec![rat_int(1), rat_int(3)],
        ]);
        let rhs = RatMatrix::from_rows(vec![vec![rat_int(5)], vec![rat_int(10)]]);
        let x = a.solve_many(&rhs).unwrap().unwrap();
        assert_eq!(x.at(0, 0), &rat_int(1));
        assert_eq!(x.at(1, 0), &rat_int(3));
        let singular = RatMatrix::from_fn(2, 2, |_, _| Rational::one());
        assert!(singular.solve_many(&rhs).unwrap().is_none());
    }

    fn small_rat() -> impl Strategy<Value = Rational> {
        (-9i64..=9, 1i64..=5).prop_map(|(n, d)| rat(n, d))
    }

    fn small_matrix(max: usize) -> impl Strategy<Value = RatMatrix> {
        (1..=max, 1..=max).prop_flat_map(|(r, c)| {
            proptest::collection::vec(small_rat(), r * c)
                .prop_map(move |data| RatMatrix { rows: r, cols: c, data })
        })
    }

    proptest! {
        #[test]
        fn rank_equals_transpose_rank(m in small_matrix(5)) {
            prop_assert_eq!(m.rank(), m.transpose().rank());
        }

        #[test]
        fn det_nonzero_iff_nullity_zero(m in small_matrix(4)) {
            prop_assume!(m.rows() == m.cols());
            let det = m.determinant().unwrap();
            let (_, nullity) = m.rank_and_nullity();
            prop_assert_eq!(det.is_zero(), nullity > 0);
        }

        #[test]
        fn rational_arithmetic_is_exact(a in small_rat(), b in small_rat()) {
            prop_assert_eq!((&a + &b) - &b, a);
        }
    }
}
