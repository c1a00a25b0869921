//! Exact nonnegative integer matrices and a log-domain mirror for deep products.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Dense row-major matrix of arbitrary-precision nonnegative integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigUint>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigUint::zero(); rows * cols],
        }
    }

    pub fn identity(d: usize) -> Self {
        let mut m = IntMatrix::zeros(d, d);
        for i in 0..d {
            m.data[i * d + i] = BigUint::one();
        }
        m
    }

    pub fn ones(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigUint::one(); rows * cols],
        }
    }

    /// Build from nested rows; every row must have the same length.
    pub fn from_rows<T: Into<BigUint> + Clone>(rows: &[Vec<T>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::DimensionMismatch {
                    expected: c,
                    found: row.len(),
                    context: "ragged matrix rows".into(),
                });
            }
            data.extend(row.iter().cloned().map(Into::into));
        }
        Ok(IntMatrix {
            rows: r,
            cols: c,
            data,
        })
    }

    /// Convenience constructor for tests and literals; panics on ragged input.
    pub fn from_u64(rows: &[&[u64]]) -> Self {
        let owned: Vec<Vec<u64>> = rows.iter().map(|r| r.to_vec()).collect();
        IntMatrix::from_rows(&owned).expect("rectangular literal")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigUint {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigUint) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[BigUint] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> impl Iterator<Item = &BigUint> {
        self.data.iter()
    }

    pub fn to_rows(&self) -> Vec<Vec<BigUint>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "matrix product dimension");
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[BigUint]) -> Vec<BigUint> {
        assert_eq!(self.cols, x.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `x^T A`, i.e. `A^T x`.
    pub fn tmul_vec(&self, x: &[BigUint]) -> Vec<BigUint> {
        assert_eq!(self.rows, x.len());
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self.get(i, j) * &x[i]).sum())
            .collect()
    }

    /// `A^T p` over exact rationals.
    pub fn tmul_rat(&self, p: &[BigRational]) -> Vec<BigRational> {
        assert_eq!(self.rows, p.len());
        (0..self.cols)
            .map(|j| {
                let mut acc = BigRational::zero();
                for (i, pi) in p.iter().enumerate() {
                    let a = self.get(i, j);
                    if !a.is_zero() {
                        acc += pi * BigRational::from_integer(BigInt::from(a.clone()));
                    }
                }
                acc
            })
            .collect()
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut out = IntMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.get(i, j).clone();
            }
        }
        out
    }

    pub fn pow(&self, mut e: u64) -> IntMatrix {
        assert!(self.is_square());
        let mut base = self.clone();
        let mut acc = IntMatrix::identity(self.rows);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Entrywise 1-norm (sum of all entries).
    pub fn norm1(&self) -> BigUint {
        self.data.iter().sum()
    }

    pub fn row_sums(&self) -> Vec<BigUint> {
        (0..self.rows).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<BigUint> {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self.get(i, j)).sum())
            .collect()
    }

    pub fn max_entry(&self) -> BigUint {
        self.data.iter().max().cloned().unwrap_or_default()
    }

    pub fn min_entry(&self) -> BigUint {
        self.data.iter().min().cloned().unwrap_or_default()
    }

    /// Largest entry bit length.
    pub fn max_bits(&self) -> u64 {
        self.data.iter().map(|x| x.bits()).max().unwrap_or(0)
    }

    pub fn is_positive(&self) -> bool {
        self.data.iter().all(|x| !x.is_zero())
    }

    /// Some power is strictly positive; powers up to the Wielandt bound
    /// `(d-1)^2 + 1` suffice.
    pub fn is_primitive(&self) -> bool {
        if !self.is_square() || self.rows == 0 {
            return false;
        }
        let s = self.support();
        let mut p = s.clone();
        for _ in 0..(self.rows - 1).pow(2) + 1 {
            if p.all() {
                return true;
            }
            p = p.mul(&s);
        }
        false
    }

    pub fn zero_row(&self) -> Option<usize> {
        (0..self.rows).find(|&i| self.row(i).iter().all(Zero::is_zero))
    }

    pub fn support(&self) -> BoolMatrix {
        BoolMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| !x.is_zero()).collect(),
        }
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> IntMatrix {
        let mut out = IntMatrix::zeros(rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                out.data[a * cols.len() + b] = self.get(i, j).clone();
            }
        }
        out
    }

    /// `P A P^T` where `perm[new] = old`.
    pub fn permuted(&self, perm: &[usize]) -> IntMatrix {
        self.submatrix(perm, perm)
    }

    pub fn to_log(&self) -> LogMatrix {
        LogMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(ln_big).collect(),
        }
    }

    pub fn check_bits(&self, cap: u64) -> Result<()> {
        let bits = self.max_bits();
        if bits > cap {
            return Err(Error::MemoryBudgetExceeded { bits, cap });
        }
        Ok(())
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "[")?;
            for (j, x) in self.row(i).iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// Boolean support pattern of a matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BoolMatrix {
    rows: usize,
    cols: usize,
    data: Vec<bool>,
}

impl BoolMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        BoolMatrix {
            rows,
            cols,
            data: vec![false; rows * cols],
        }
    }

    pub fn identity(d: usize) -> Self {
        let mut m = BoolMatrix::zeros(d, d);
        for i in 0..d {
            m.set(i, i, true);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        self.data[i * self.cols + j] = v;
    }

    /// Boolean semiring product.
    pub fn mul(&self, other: &BoolMatrix) -> BoolMatrix {
        let mut out = BoolMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self.get(i, k) {
                    for j in 0..other.cols {
                        if other.get(k, j) {
                            out.data[i * other.cols + j] = true;
                        }
                    }
                }
            }
        }
        out
    }

    pub fn union(&self, other: &BoolMatrix) -> BoolMatrix {
        BoolMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| *a || *b)
                .collect(),
        }
    }

    pub fn all(&self) -> bool {
        self.data.iter().all(|&b| b)
    }
}

/// Natural logarithm of every entry (`-inf` for zero entries).
#[derive(Debug, Clone, PartialEq)]
pub struct LogMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl LogMatrix {
    pub fn identity(d: usize) -> Self {
        let mut data = vec![f64::NEG_INFINITY; d * d];
        for i in 0..d {
            data[i * d + i] = 0.0;
        }
        LogMatrix {
            rows: d,
            cols: d,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    /// Product computed with log-sum-exp per entry.
    pub fn mul(&self, other: &LogMatrix) -> LogMatrix {
        assert_eq!(self.cols, other.rows);
        let mut data = Vec::with_capacity(self.rows * other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let terms: Vec<f64> = (0..self.cols)
                    .map(|k| self.get(i, k) + other.get(k, j))
                    .filter(|t| t.is_finite())
                    .collect();
                let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                if m == f64::NEG_INFINITY {
                    data.push(m);
                } else {
                    data.push(m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln());
                }
            }
        }
        LogMatrix {
            rows: self.rows,
            cols: other.cols,
            data,
        }
    }

    pub fn is_positive(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

/// Natural log of a big unsigned integer (`-inf` for zero).
pub fn ln_big(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 64 {
        return x.to_f64().expect("small").ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().expect("64-bit");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Correctly scaled conversion of an exact rational to `f64`.
pub fn rat_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let sign = if r.is_negative() { -1.0 } else { 1.0 };
    let num = r.numer().abs().to_biguint().expect("abs");
    let den = r.denom().to_biguint().expect("positive");
    // Scale so the integer quotient carries 64 significant bits.
    let shift = 64i64 + den.bits() as i64 - num.bits() as i64;
    let q = if shift >= 0 {
        (num << shift as u64) / den
    } else {
        num / (den << (-shift) as u64)
    };
    sign * q.to_f64().expect("64-bit quotient") * 2f64.powi(-shift as i32)
}

/// Natural log of a positive rational, accurate near 1.
pub fn ln_rat(r: &BigRational) -> f64 {
    assert!(r.is_positive(), "ln of a non-positive rational");
    let one = BigRational::one();
    let delta = r - &one;
    if delta.abs() < BigRational::new(1.into(), 2.into()) {
        return rat_to_f64(&delta).ln_1p();
    }
    let num = r.numer().to_biguint().expect("positive");
    let den = r.denom().to_biguint().expect("positive");
    ln_big(&num) - ln_big(&den)
}

pub fn big_to_rat(x: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(x.clone()))
}

/// Render an exact rational as "num/den" (or just "num" for integers).
pub fn rat_string(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Decimal rendering used in reports: 15 significant digits, `inf` for infinity.
pub fn real_string(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else if x == 0.0 {
        "0".into()
    } else {
        format!("{x:.15e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_and_norm() {
        let a = IntMatrix::from_u64(&[&[1, 1], &[2, 1]]);
        let b = IntMatrix::from_u64(&[&[1, 1], &[1, 1]]);
        let p = a.mul(&b);
        assert_eq!(p, IntMatrix::from_u64(&[&[2, 2], &[3, 3]]));
        assert_eq!(p.norm1(), BigUint::from(10u32));
        assert_eq!(a.pow(0), IntMatrix::identity(2));
        assert_eq!(a.pow(3), a.mul(&a).mul(&a));
    }

    #[test]
    fn conversions() {
        let big = BigUint::from(3u32).pow(400);
        assert!((ln_big(&big) - 400.0 * 3f64.ln()).abs() < 1e-10);
        let r = BigRational::new(BigInt::from(1), BigInt::from(3));
        assert!((rat_to_f64(&r) - 1.0 / 3.0).abs() < 1e-17);
        let near = BigRational::new(BigInt::from(10u64.pow(15) + 1), BigInt::from(10u64.pow(15)));
        assert!((ln_rat(&near) - 1e-15).abs() < 1e-28);
    }

    #[test]
    fn log_mirror_matches_exact() {
        let a = IntMatrix::from_u64(&[&[2, 1], &[1, 3]]);
        let p = a.pow(7);
        let l = a
            .to_log()
            .mul(&a.to_log())
            .mul(&a.to_log())
            .mul(&a.to_log());
        let l = l.mul(&a.to_log()).mul(&a.to_log()).mul(&a.to_log());
        for i in 0..2 {
            for j in 0..2 {
                assert!((l.get(i, j) - ln_big(p.get(i, j))).abs() < 1e-12);
            }
        }
    }
}
