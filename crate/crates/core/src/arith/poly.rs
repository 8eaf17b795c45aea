//! Dense univariate polynomials over Z and Q.
//!
//! Coefficients are stored in ascending degree with no trailing zeros, so the
//! zero polynomial is the empty vector. Degrees in play are small (the
//! algebras handled here have degree at most 8), so dense storage is used
//! throughout.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::rational::{fmt_rat, int, BigRat};
use crate::error::{Error, Result};

pub trait Coeff:
    Clone
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
{
    fn from_i64(n: i64) -> Self;
}

impl Coeff for BigInt {
    fn from_i64(n: i64) -> Self {
        BigInt::from(n)
    }
}

impl Coeff for BigRat {
    fn from_i64(n: i64) -> Self {
        BigRat::from_integer(BigInt::from(n))
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly<T> {
    coeffs: Vec<T>,
}

pub type ZPoly = Poly<BigInt>;
pub type QPoly = Poly<BigRat>;

impl<T: Coeff> Poly<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::constant(T::one())
    }

    pub fn x() -> Self {
        Poly::new(vec![T::zero(), T::one()])
    }

    pub fn constant(c: T) -> Self {
        Poly::new(vec![c])
    }

    pub fn monomial(c: T, deg: usize) -> Self {
        let mut v = vec![T::zero(); deg + 1];
        v[deg] = c;
        Poly::new(v)
    }

    pub fn from_i64s(cs: &[i64]) -> Self {
        Poly::new(cs.iter().map(|&c| T::from_i64(c)).collect())
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree, treating the zero polynomial as an error.
    pub fn degree_nonzero(&self) -> Result<usize> {
        self.degree().ok_or(Error::ZeroPolynomial)
    }

    pub fn coeff(&self, i: usize) -> T {
        self.coeffs.get(i).cloned().unwrap_or_else(T::zero)
    }

    pub fn lc(&self) -> T {
        self.coeffs.last().cloned().unwrap_or_else(T::zero)
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().is_some_and(|c| c.is_one())
    }

    pub fn eval(&self, x: &T) -> T {
        let mut acc = T::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x.clone() + c.clone();
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| T::from_i64(i as i64) * c.clone())
                .collect(),
        )
    }

    pub fn scale(&self, k: &T) -> Self {
        Poly::new(self.coeffs.iter().map(|c| c.clone() * k.clone()).collect())
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Poly::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Polynomial composition `self(g)`.
    pub fn compose(&self, g: &Self) -> Self {
        let mut acc = Poly::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * g) + &Poly::constant(c.clone());
        }
        acc
    }

    pub fn map<U: Coeff>(&self, f: impl Fn(&T) -> U) -> Poly<U> {
        Poly::new(self.coeffs.iter().map(f).collect())
    }
}

impl<T: Coeff> Add for &Poly<T> {
    type Output = Poly<T>;
    fn add(self, rhs: &Poly<T>) -> Poly<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl<T: Coeff> Sub for &Poly<T> {
    type Output = Poly<T>;
    fn sub(self, rhs: &Poly<T>) -> Poly<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl<T: Coeff> Mul for &Poly<T> {
    type Output = Poly<T>;
    fn mul(self, rhs: &Poly<T>) -> Poly<T> {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![T::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Poly::new(out)
    }
}

impl<T: Coeff> Neg for &Poly<T> {
    type Output = Poly<T>;
    fn neg(self) -> Poly<T> {
        Poly::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl<T: Coeff> $tr for Poly<T> {
            type Output = Poly<T>;
            fn $m(self, rhs: Poly<T>) -> Poly<T> {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl<T: Coeff> fmt::Debug for Poly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl<T: Coeff> fmt::Display for Poly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let s = c.to_string();
            let (neg, mag) = match s.strip_prefix('-') {
                Some(m) => (true, m.to_string()),
                None => (false, s),
            };
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let show_mag = i == 0 || mag != "1";
            if show_mag {
                write!(f, "{mag}")?;
            }
            match i {
                0 => {}
                1 => write!(f, "{}x", if show_mag { "*" } else { "" })?,
                _ => write!(f, "{}x^{i}", if show_mag { "*" } else { "" })?,
            }
        }
        Ok(())
    }
}

// JSON: array of coefficient strings, ascending degree.
impl<T: Coeff> Serialize for Poly<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.coeffs
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Poly<BigInt> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<super::rational::IntStr>::deserialize(d)?;
        Ok(Poly::new(v.into_iter().map(|c| c.0).collect()))
    }
}

impl<'de> Deserialize<'de> for Poly<BigRat> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<super::rational::RatStr>::deserialize(d)?;
        Ok(Poly::new(v.into_iter().map(|c| c.0).collect()))
    }
}

impl QPoly {
    pub fn from_z(f: &ZPoly) -> Self {
        f.map(|c| int(c.clone()))
    }

    /// Division with remainder; `d` must be nonzero.
    pub fn div_rem(&self, d: &QPoly) -> Result<(QPoly, QPoly)> {
        let dd = d.degree_nonzero()?;
        let lc_inv = d.lc().recip();
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return Ok((QPoly::zero(), self.clone()));
        }
        let mut q = vec![BigRat::zero(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let c = &r[k + dd] * &lc_inv;
            if !c.is_zero() {
                for (i, dc) in d.coeffs.iter().enumerate() {
                    r[k + i] = &r[k + i] - &c * dc;
                }
            }
            q[k] = c;
        }
        r.truncate(dd);
        Ok((Poly::new(q), Poly::new(r)))
    }

    pub fn rem(&self, d: &QPoly) -> Result<QPoly> {
        Ok(self.div_rem(d)?.1)
    }

    /// Monic associate; the zero polynomial stays zero.
    pub fn monic(&self) -> QPoly {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&self.lc().recip())
    }

    /// Monic greatest common divisor; gcd(0, 0) = 0.
    pub fn gcd(f: &QPoly, g: &QPoly) -> QPoly {
        let (mut a, mut b) = (f.clone(), g.clone());
        while !b.is_zero() {
            let r = a.rem(&b).expect("nonzero divisor");
            a = b;
            b = r;
        }
        a.monic()
    }

    /// f / gcd(f, f'), monic.
    pub fn squarefree_part(&self) -> Result<QPoly> {
        self.degree_nonzero()?;
        let g = QPoly::gcd(self, &self.derivative());
        Ok(self.div_rem(&g)?.0.monic())
    }

    /// Clears denominators and content: the primitive integer polynomial with
    /// positive leading coefficient proportional to `self`.
    pub fn primitive_z(&self) -> ZPoly {
        if self.is_zero() {
            return ZPoly::zero();
        }
        let mut l = BigInt::one();
        for c in &self.coeffs {
            l = l.lcm(c.denom());
        }
        let ints: Vec<BigInt> = self
            .coeffs
            .iter()
            .map(|c| (c * int(l.clone())).to_integer())
            .collect();
        let mut g = BigInt::zero();
        for c in &ints {
            g = g.gcd(c);
        }
        if self.lc().is_negative() {
            g = -g;
        }
        Poly::new(ints.into_iter().map(|c| c / &g).collect())
    }

    /// Sturm sequence of the squarefree part.
    pub fn sturm_sequence(&self) -> Result<Vec<QPoly>> {
        let f = self.squarefree_part()?;
        let mut seq = vec![f.clone(), f.derivative()];
        while !seq.last().unwrap().is_zero() {
            let n = seq.len();
            let r = seq[n - 2].rem(&seq[n - 1])?;
            seq.push(-&r);
        }
        seq.pop();
        Ok(seq)
    }

    /// Exact number of distinct real roots.
    pub fn count_real_roots(&self) -> Result<usize> {
        let seq = self.sturm_sequence()?;
        let at = |plus: bool| {
            sign_changes(seq.iter().map(|p| {
                let d = p.degree().unwrap_or(0);
                let s = if p.lc().is_positive() { 1 } else { -1 };
                if plus || d % 2 == 0 {
                    s
                } else {
                    -s
                }
            }))
        };
        Ok(at(false) - at(true))
    }

    /// Number of distinct real roots in the half-open interval (a, b].
    pub fn count_roots_in(seq: &[QPoly], a: &BigRat, b: &BigRat) -> usize {
        let v = |x: &BigRat| sign_changes(seq.iter().map(|p| sign_of(&p.eval(x))));
        v(a).saturating_sub(v(b))
    }

    /// Cauchy bound: every root has absolute value below the returned value.
    pub fn root_bound(&self) -> BigRat {
        let lc = self.lc().abs();
        let m = self
            .coeffs
            .iter()
            .take(self.coeffs.len().saturating_sub(1))
            .map(|c| c.abs() / &lc)
            .fold(BigRat::zero(), |a, b| if b > a { b } else { a });
        m + BigRat::one()
    }

    /// Disjoint half-open intervals (lo, hi], one per distinct real root,
    /// each of width at most `width`, in increasing order.
    pub fn isolate_real_roots(&self, width: &BigRat) -> Result<Vec<(BigRat, BigRat)>> {
        let seq = self.sturm_sequence()?;
        let m = self.root_bound();
        let mut out = Vec::new();
        let mut stack = vec![(-m.clone(), m)];
        while let Some((lo, hi)) = stack.pop() {
            let c = QPoly::count_roots_in(&seq, &lo, &hi);
            if c == 0 {
                continue;
            }
            if c == 1 && &(&hi - &lo) <= width {
                out.push((lo, hi));
                continue;
            }
            let mid = (&lo + &hi) / BigRat::from_i64(2);
            stack.push((mid.clone(), hi));
            stack.push((lo, mid));
        }
        out.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(out)
    }
}

fn sign_of(x: &BigRat) -> i32 {
    if x.is_zero() {
        0
    } else if x.is_positive() {
        1
    } else {
        -1
    }
}

fn sign_changes(signs: impl Iterator<Item = i32>) -> usize {
    let mut last = 0;
    let mut n = 0;
    for s in signs {
        if s == 0 {
            continue;
        }
        if last != 0 && s != last {
            n += 1;
        }
        last = s;
    }
    n
}

impl ZPoly {
    pub fn to_q(&self) -> QPoly {
        QPoly::from_z(self)
    }

    pub fn content(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// Resultant computed by the Euclidean remainder sequence over Q.
    pub fn resultant(f: &ZPoly, g: &ZPoly) -> Result<BigInt> {
        let r = resultant_q(&f.to_q(), &g.to_q())?;
        debug_assert!(r.is_integer());
        Ok(r.to_integer())
    }

    /// disc(f) = (-1)^{d(d-1)/2} Res(f, f'); `f` must be monic of degree >= 1.
    pub fn discriminant(&self) -> Result<BigInt> {
        let d = self.degree_nonzero()?;
        if !self.is_monic() {
            return Err(Error::NotMonic);
        }
        if d == 0 {
            return Err(Error::InvalidInput("discriminant needs degree >= 1".into()));
        }
        let r = ZPoly::resultant(self, &self.derivative())?;
        Ok(if (d * (d - 1) / 2) % 2 == 1 { -r } else { r })
    }

    /// Integer roots of a monic integer polynomial (its rational roots), sorted.
    pub fn integer_roots(&self) -> Result<Vec<BigInt>> {
        self.degree_nonzero()?;
        if !self.is_monic() {
            return Err(Error::NotMonic);
        }
        let q = self.to_q();
        let mut roots = Vec::new();
        for (lo, hi) in q.isolate_real_roots(&BigRat::one())? {
            let mut k = lo.floor().to_integer();
            while int(k.clone()) <= hi {
                if int(k.clone()) > lo && self.eval(&k).is_zero() {
                    roots.push(k.clone());
                }
                k += 1;
            }
        }
        roots.sort();
        roots.dedup();
        Ok(roots)
    }

    pub fn monic_from_i64s(cs: &[i64]) -> Self {
        let p = ZPoly::from_i64s(cs);
        debug_assert!(p.is_monic());
        p
    }
}

/// Resultant over Q via the remainder sequence:
/// Res(f, g) = (-1)^{deg f deg g} lc(g)^{deg f - deg r} Res(g, r) with r = f mod g.
pub fn resultant_q(f: &QPoly, g: &QPoly) -> Result<BigRat> {
    if f.is_zero() || g.is_zero() {
        return Ok(BigRat::zero());
    }
    let (mut a, mut b) = (f.clone(), g.clone());
    let mut acc = BigRat::one();
    loop {
        let da = a.degree().unwrap();
        let db = b.degree().unwrap();
        if db == 0 {
            return Ok(acc * num_traits::pow(b.lc(), da));
        }
        let r = a.rem(&b)?;
        if r.is_zero() {
            return Ok(BigRat::zero());
        }
        let dr = r.degree().unwrap();
        if (da * db) % 2 == 1 {
            acc = -acc;
        }
        acc *= num_traits::pow(b.lc(), da - dr);
        a = b;
        b = r;
    }
}

pub fn is_square_integer(n: &BigInt) -> bool {
    if n.is_negative() {
        return false;
    }
    let r = n.sqrt();
    &r * &r == *n
}

pub fn is_square_rational(q: &BigRat) -> bool {
    is_square_integer(q.numer()) && is_square_integer(q.denom())
}

/// Pretty string for a coefficient list in JSON order.
pub fn coeff_strings(f: &QPoly) -> Vec<String> {
    f.coeffs().iter().map(fmt_rat).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational::{frac, rat};

    fn q(cs: &[i64]) -> QPoly {
        QPoly::from_i64s(cs)
    }

    fn z(cs: &[i64]) -> ZPoly {
        ZPoly::from_i64s(cs)
    }

    #[test]
    fn gcd_examples() {
        let f = q(&[-1, 1, 0, 1]);
        assert_eq!(QPoly::gcd(&f.scale(&rat(3)), &QPoly::zero()), f);
        assert_eq!(QPoly::gcd(&q(&[-1, 0, 1]), &q(&[-1, 1])), q(&[-1, 1]));
        assert_eq!(QPoly::gcd(&f, &q(&[1, 0, 3])), QPoly::one());
    }

    #[test]
    fn discriminant_examples() {
        assert_eq!(z(&[1, 0, 1]).discriminant().unwrap(), BigInt::from(-4));
        assert_eq!(z(&[-1, 0, 1]).discriminant().unwrap(), BigInt::from(4));
        assert_eq!(z(&[-1, 1, 0, 1]).discriminant().unwrap(), BigInt::from(-31));
        assert_eq!(
            z(&[1, -16, 20, -8, 1]).discriminant().unwrap(),
            BigInt::from(2304)
        );
        assert_eq!(z(&[1, 0, 2]).discriminant(), Err(Error::NotMonic));
        assert_eq!(ZPoly::zero().discriminant(), Err(Error::ZeroPolynomial));
    }

    #[test]
    fn sturm_examples() {
        assert_eq!(q(&[1, 0, 1]).count_real_roots().unwrap(), 0);
        assert_eq!(q(&[-1, 1, 0, 1]).count_real_roots().unwrap(), 1);
        assert_eq!(q(&[1, -16, 20, -8, 1]).count_real_roots().unwrap(), 4);
        // repeated roots count once
        assert_eq!(q(&[1, -2, 1]).count_real_roots().unwrap(), 1);
        assert_eq!(QPoly::zero().count_real_roots(), Err(Error::ZeroPolynomial));
    }

    #[test]
    fn isolation_matches_known_brackets() {
        let f = q(&[1, -16, 20, -8, 1]);
        let iv = f.isolate_real_roots(&frac(1, 8)).unwrap();
        assert_eq!(iv.len(), 4);
        let brackets = [(0, 1), (1, 2), (2, 3), (3, 4)];
        for ((lo, hi), (a, b)) in iv.iter().zip(brackets) {
            assert!(lo >= &rat(a) && hi <= &rat(b), "{lo} {hi}");
        }
    }

    #[test]
    fn integer_roots_of_resolvents() {
        // (y-2)(y+3)(y^2+1)
        let f = &(&z(&[-2, 1]) * &z(&[3, 1])) * &z(&[1, 0, 1]);
        assert_eq!(
            f.integer_roots().unwrap(),
            vec![BigInt::from(-3), BigInt::from(2)]
        );
    }

    #[test]
    fn squares() {
        assert!(is_square_integer(&BigInt::from(4)));
        assert!(!is_square_integer(&BigInt::from(-31)));
        assert!(is_square_integer(&BigInt::from(25 * 49)));
        assert!(is_square_integer(&BigInt::from(0)));
        assert!(!is_square_integer(&BigInt::from(2)));
    }

    #[test]
    fn display() {
        assert_eq!(z(&[-1, 1, 0, 1]).to_string(), "x^3 + x - 1");
        assert_eq!(z(&[1, -16, 20, -8, 1]).to_string(), "x^4 - 8*x^3 + 20*x^2 - 16*x + 1");
    }
}
