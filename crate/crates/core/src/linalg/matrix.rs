use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::poly::QPoly;
use crate::arith::rational::{fmt_rat, int, is_integral, is_s_integral, parse_rat, rat, BigRat};
use crate::error::{Error, Result};

/// Dense matrix over Q, row-major.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct MatQ {
    rows: usize,
    cols: usize,
    data: Vec<BigRat>,
}

impl MatQ {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        MatQ { rows, cols, data: vec![BigRat::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigRat::one();
        }
        m
    }

    pub fn scalar(n: usize, c: BigRat) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = c.clone();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<BigRat>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return Err(Error::InvalidInput("ragged matrix rows".into()));
        }
        Ok(MatQ { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&x| rat(x)).collect()).collect())
            .expect("ragged literal")
    }

    pub fn from_cols(cols: &[Vec<BigRat>]) -> Result<Self> {
        Ok(Self::from_rows(cols.to_vec())?.transpose())
    }

    pub fn diag(entries: &[BigRat]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = e.clone();
        }
        m
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

    pub fn row(&self, i: usize) -> Vec<BigRat> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn col(&self, j: usize) -> Vec<BigRat> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<BigRat>> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn entries(&self) -> &[BigRat] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "shape mismatch in product");
        let mut out = Self::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = &o[(k, j)];
                    if !b.is_zero() {
                        out.data[i * o.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigRat]) -> Vec<BigRat> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).fold(BigRat::zero(), |acc, j| acc + &self[(i, j)] * &v[j]))
            .collect()
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        MatQ {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        MatQ {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, k: &BigRat) -> Self {
        MatQ { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * k).collect() }
    }

    pub fn neg(&self) -> Self {
        self.scale(&rat(-1))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn is_identity(&self) -> bool {
        self.is_square() && *self == Self::identity(self.rows)
    }

    pub fn pow(&self, e: u64) -> Self {
        let mut acc = Self::identity(self.rows);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Integer power; negative exponents invert.
    pub fn powi(&self, e: i64) -> Result<Self> {
        if e >= 0 {
            Ok(self.pow(e as u64))
        } else {
            Ok(self.inverse()?.pow(e.unsigned_abs()))
        }
    }

    pub fn trace(&self) -> BigRat {
        (0..self.rows.min(self.cols)).fold(BigRat::zero(), |acc, i| acc + &self[(i, i)])
    }

    /// Row echelon form by Gaussian elimination; returns (echelon, pivot
    /// columns, sign of the row permutation).
    fn echelon(&self) -> (Self, Vec<usize>, i32) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut sign = 1;
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
                continue;
            };
            if p != r {
                m.swap_rows(p, r);
                sign = -sign;
            }
            let piv = m[(r, c)].clone();
            for i in r + 1..m.rows {
                if m[(i, c)].is_zero() {
                    continue;
                }
                let f = &m[(i, c)] / &piv;
                for j in c..m.cols {
                    let d = &f * &m[(r, j)];
                    m[(i, j)] -= d;
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots, sign)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn det(&self) -> BigRat {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let (m, pivots, sign) = self.echelon();
        if pivots.len() < self.rows {
            return BigRat::zero();
        }
        (0..self.rows).fold(rat(sign as i64), |acc, i| acc * &m[(i, i)])
    }

    pub fn rank(&self) -> usize {
        self.echelon().1.len()
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let (mut m, pivots, _) = self.echelon();
        for (r, &c) in pivots.iter().enumerate().rev() {
            let piv = m[(r, c)].clone();
            for j in c..m.cols {
                let v = &m[(r, j)] / &piv;
                m[(r, j)] = v;
            }
            for i in 0..r {
                if m[(i, c)].is_zero() {
                    continue;
                }
                let f = m[(i, c)].clone();
                for j in c..m.cols {
                    let d = &f * &m[(r, j)];
                    m[(i, j)] -= d;
                }
            }
        }
        (m, pivots)
    }

    /// Basis of the right null space {v : M v = 0}.
    pub fn kernel(&self) -> Vec<Vec<BigRat>> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![BigRat::zero(); self.cols];
                v[f] = BigRat::one();
                for (i, &p) in pivots.iter().enumerate() {
                    v[p] = -r[(i, f)].clone();
                }
                v
            })
            .collect()
    }

    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::SingularMatrix);
        }
        let n = self.rows;
        let mut aug = Self::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, n + i)] = BigRat::one();
        }
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] >= n {
            return Err(Error::SingularMatrix);
        }
        let mut inv = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv[(i, j)] = r[(i, n + j)].clone();
            }
        }
        Ok(inv)
    }

    /// Solve M x = b; None when inconsistent. Picks the solution with free
    /// variables set to zero.
    pub fn solve(&self, b: &[BigRat]) -> Option<Vec<BigRat>> {
        let mut aug = Self::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, self.cols)] = b[i].clone();
        }
        let (r, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![BigRat::zero(); self.cols];
        for (i, &p) in pivots.iter().enumerate() {
            x[p] = r[(i, self.cols)].clone();
        }
        Some(x)
    }

    /// Characteristic polynomial det(xI − M), by the Faddeev–LeVerrier
    /// recursion.
    pub fn charpoly(&self) -> QPoly {
        assert!(self.is_square());
        let n = self.rows;
        let mut coeffs = vec![BigRat::zero(); n + 1];
        coeffs[n] = BigRat::one();
        let mut m = Self::zeros(n, n);
        for k in 1..=n {
            m = self.mul(&m).add(&Self::scalar(n, coeffs[n - k + 1].clone()));
            let c = -self.mul(&m).trace() / rat(k as i64);
            coeffs[n - k] = c;
        }
        QPoly::new(coeffs)
    }

    pub fn is_integral(&self) -> bool {
        self.data.iter().all(is_integral)
    }

    pub fn is_s_integral(&self, primes: &[u64]) -> bool {
        self.data.iter().all(|x| is_s_integral(x, primes))
    }

    pub fn commutes_with(&self, o: &Self) -> bool {
        self.mul(o) == o.mul(self)
    }

    /// Block diagonal with `self` in the top-left corner and identity padding.
    pub fn block_embed(&self, n: usize) -> Result<Self> {
        if !self.is_square() || self.rows > n {
            return Err(Error::InvalidInput(format!(
                "cannot embed a {}x{} matrix in size {n}",
                self.rows, self.cols
            )));
        }
        let mut m = Self::identity(n);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(i, j)] = self[(i, j)].clone();
            }
        }
        Ok(m)
    }

    pub fn to_string_rows(&self) -> Vec<Vec<String>> {
        (0..self.rows).map(|i| self.row(i).iter().map(fmt_rat).collect()).collect()
    }

    pub fn from_string_rows(rows: &[Vec<String>]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|s| parse_rat(s)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?,
        )
    }

    /// Entries as integers, if all are.
    pub fn to_integer_rows(&self) -> Option<Vec<Vec<BigInt>>> {
        if !self.is_integral() {
            return None;
        }
        Some(
            (0..self.rows)
                .map(|i| self.row(i).iter().map(|x| x.numer().clone()).collect())
                .collect(),
        )
    }

    pub fn from_integer_rows(rows: &[Vec<BigInt>]) -> Self {
        Self::from_rows(rows.iter().map(|r| r.iter().cloned().map(int).collect()).collect())
            .expect("ragged integer matrix")
    }

    pub fn max_abs_entry(&self) -> BigRat {
        self.data.iter().map(|x| x.abs()).max().unwrap_or_else(BigRat::zero)
    }
}

impl std::ops::Index<(usize, usize)> for MatQ {
    type Output = BigRat;
    fn index(&self, (i, j): (usize, usize)) -> &BigRat {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for MatQ {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigRat {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Display for MatQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells = self.to_string_rows();
        let w = cells.iter().flatten().map(|s| s.len()).max().unwrap_or(1);
        for (i, r) in cells.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "[")?;
            for (j, c) in r.iter().enumerate() {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{c:>w$}")?;
            }
            write!(f, "]")?;
        }
        Ok(())
    }
}

impl Serialize for MatQ {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_string_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for MatQ {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<crate::arith::rational::RatStr>>::deserialize(d)?;
        let rows = rows.into_iter().map(|r| r.into_iter().map(|x| x.0).collect()).collect();
        MatQ::from_rows(rows).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational::frac;

    #[test]
    fn det_inverse_charpoly() {
        let g = MatQ::from_i64(&[&[0, 0, 1], &[1, 0, -1], &[0, 1, 0]]);
        assert_eq!(g.det(), rat(1));
        let gi = g.inverse().unwrap();
        assert!(g.mul(&gi).is_identity());
        assert_eq!(g.charpoly(), QPoly::from_i64s(&[-1, 1, 0, 1]));
        let sing = MatQ::from_i64(&[&[1, 2], &[2, 4]]);
        assert_eq!(sing.det(), rat(0));
        assert_eq!(sing.inverse(), Err(Error::SingularMatrix));
        assert_eq!(sing.rank(), 1);
    }

    #[test]
    fn kernel_and_solve() {
        let m = MatQ::from_i64(&[&[1, 1, 1]]);
        let k = m.kernel();
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(m.mul_vec(v).iter().all(|x| x.is_zero()));
        }
        let a = MatQ::from_i64(&[&[2, 0], &[0, 4]]);
        assert_eq!(a.solve(&[rat(1), rat(1)]).unwrap(), vec![frac(1, 2), frac(1, 4)]);
        let b = MatQ::from_i64(&[&[1, 1], &[1, 1]]);
        assert!(b.solve(&[rat(1), rat(2)]).is_none());
    }

    #[test]
    fn json_round_trip() {
        let m = MatQ::from_rows(vec![vec![frac(4, 5), frac(-3, 5)], vec![frac(3, 5), frac(4, 5)]]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"[["4/5","-3/5"],["3/5","4/5"]]"#);
        assert_eq!(serde_json::from_str::<MatQ>(&s).unwrap(), m);
    }

    #[test]
    fn block_embedding_keeps_det() {
        let d = MatQ::diag(&[rat(2), frac(1, 2)]);
        let e = d.block_embed(3).unwrap();
        assert_eq!(e, MatQ::diag(&[rat(2), frac(1, 2), rat(1)]));
        assert_eq!(e.det(), d.det());
    }
}
