//! Étale algebras over Q, orders given by a Z-basis, and the regular
//! representation.
//!
//! An algebra is a product of number fields Q[x]/(f_k). Elements are stored by
//! their coordinates in the order basis; the basis itself is given by rows
//! expressing each basis element in the concatenated power bases of the
//! factors.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::fp::{factor_degrees, factor_z_mod_p, is_prime};
use crate::arith::poly::{QPoly, ZPoly};
use crate::arith::rational::{fmt_rat, int, parse_rat, rat, BigRat};
use crate::error::{Error, Result};
use crate::linalg::MatQ;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EtaleAlgebra {
    factors: Vec<ZPoly>,
    basis: MatQ,
    basis_inv: MatQ,
    offsets: Vec<usize>,
    n: usize,
    // regular representation of each basis element
    basis_reps: Vec<MatQ>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AlgebraElement {
    pub coords: Vec<BigRat>,
}

impl AlgebraElement {
    pub fn new(coords: Vec<BigRat>) -> Self {
        AlgebraElement { coords }
    }

    pub fn from_i64s(cs: &[i64]) -> Self {
        AlgebraElement { coords: cs.iter().map(|&c| rat(c)).collect() }
    }

    pub fn from_ints(cs: &[BigInt]) -> Self {
        AlgebraElement { coords: cs.iter().cloned().map(int).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.coords.iter().map(fmt_rat).collect()
    }

    pub fn from_strings(s: &[String]) -> Result<Self> {
        Ok(AlgebraElement { coords: s.iter().map(|x| parse_rat(x)).collect::<Result<_>>()? })
    }

    pub fn is_integral(&self) -> bool {
        self.coords.iter().all(|c| c.is_integer())
    }
}

impl Serialize for AlgebraElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_strings().serialize(s)
    }
}

impl<'de> Deserialize<'de> for AlgebraElement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        AlgebraElement::from_strings(&v).map_err(serde::de::Error::custom)
    }
}

/// Outcome of the order-closure test. On failure, `witness` names the basis
/// pair whose product leaves the lattice (or `None` for the unit element) and
/// the first non-integral coordinate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrderCheck {
    pub is_order: bool,
    pub witness: Option<OrderWitness>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrderWitness {
    pub pair: Option<(usize, usize)>,
    pub coordinate: usize,
    #[serde(with = "crate::arith::rational::serde_rat")]
    pub value: BigRat,
}

/// JSON shape of an algebra.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EtaleAlgebraJson {
    pub factors: Vec<ZPoly>,
    pub order_basis: Vec<Vec<String>>,
}

impl EtaleAlgebra {
    /// Checks every factor is monic and irreducible and the basis invertible.
    pub fn new(factors: Vec<ZPoly>, basis: MatQ) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidInput("an algebra needs at least one factor".into()));
        }
        for f in &factors {
            if f.is_zero() {
                return Err(Error::ZeroPolynomial);
            }
            if !f.is_monic() {
                return Err(Error::NotMonic);
            }
            if f.degree_nonzero()? == 0 {
                return Err(Error::InvalidInput("constant factor".into()));
            }
            check_irreducible(f)?;
        }
        let degs: Vec<usize> = factors.iter().map(|f| f.degree().unwrap()).collect();
        let n: usize = degs.iter().sum();
        if basis.rows() != n || basis.cols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: basis.rows().max(basis.cols()) });
        }
        let basis_inv = basis.inverse().map_err(|_| Error::SingularBasis)?;
        let mut offsets = vec![0];
        for d in &degs {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut alg = EtaleAlgebra { factors, basis, basis_inv, offsets, n, basis_reps: vec![] };
        alg.basis_reps = (0..n)
            .map(|i| {
                let mut e = vec![BigRat::zero(); n];
                e[i] = BigRat::one();
                alg.rep_direct(&AlgebraElement::new(e))
            })
            .collect();
        Ok(alg)
    }

    pub fn power_basis(factors: Vec<ZPoly>) -> Result<Self> {
        let n = factors.iter().map(|f| f.degree().unwrap_or(0)).sum();
        Self::new(factors, MatQ::identity(n))
    }

    pub fn from_json(j: &EtaleAlgebraJson) -> Result<Self> {
        Self::new(j.factors.clone(), MatQ::from_string_rows(&j.order_basis)?)
    }

    pub fn to_json(&self) -> EtaleAlgebraJson {
        EtaleAlgebraJson { factors: self.factors.clone(), order_basis: self.basis.to_string_rows() }
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn factors(&self) -> &[ZPoly] {
        &self.factors
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn order_basis(&self) -> &MatQ {
        &self.basis
    }

    /// Range of power-basis coordinates belonging to factor `k`.
    pub fn factor_range(&self, k: usize) -> std::ops::Range<usize> {
        self.offsets[k]..self.offsets[k + 1]
    }

    fn check_len(&self, a: &AlgebraElement) -> Result<()> {
        if a.coords.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: a.coords.len() });
        }
        Ok(())
    }

    /// Power-basis coordinates of an element.
    pub fn to_power(&self, a: &AlgebraElement) -> Vec<BigRat> {
        self.basis.transpose().mul_vec(&a.coords)
    }

    pub fn from_power(&self, v: &[BigRat]) -> AlgebraElement {
        AlgebraElement::new(self.basis_inv.transpose().mul_vec(v))
    }

    /// Component of `a` in factor `k`, as a polynomial in that factor's
    /// generator.
    pub fn component(&self, a: &AlgebraElement, k: usize) -> QPoly {
        QPoly::new(self.to_power(a)[self.factor_range(k)].to_vec())
    }

    pub fn from_components(&self, comps: &[QPoly]) -> AlgebraElement {
        let mut v = vec![BigRat::zero(); self.n];
        for (k, c) in comps.iter().enumerate() {
            let r = c.rem(&self.factors[k].to_q()).expect("nonzero modulus");
            for (i, x) in r.coeffs().iter().enumerate() {
                v[self.offsets[k] + i] = x.clone();
            }
        }
        self.from_power(&v)
    }

    pub fn one(&self) -> AlgebraElement {
        let comps: Vec<QPoly> = self.factors.iter().map(|_| QPoly::one()).collect();
        self.from_components(&comps)
    }

    pub fn zero(&self) -> AlgebraElement {
        AlgebraElement::new(vec![BigRat::zero(); self.n])
    }

    /// The generator of factor `k`, with zero components elsewhere.
    pub fn factor_generator(&self, k: usize) -> AlgebraElement {
        let comps: Vec<QPoly> = (0..self.num_factors())
            .map(|j| if j == k { QPoly::x() } else { QPoly::zero() })
            .collect();
        self.from_components(&comps)
    }

    /// Sum of the factor generators (a primitive element when the factors
    /// are pairwise distinct).
    pub fn generator(&self) -> AlgebraElement {
        let comps: Vec<QPoly> = (0..self.num_factors()).map(|_| QPoly::x()).collect();
        self.from_components(&comps)
    }

    pub fn mul(&self, a: &AlgebraElement, b: &AlgebraElement) -> AlgebraElement {
        AlgebraElement::new(self.regular_rep(a).mul_vec(&b.coords))
    }

    pub fn add(&self, a: &AlgebraElement, b: &AlgebraElement) -> AlgebraElement {
        AlgebraElement::new(a.coords.iter().zip(&b.coords).map(|(x, y)| x + y).collect())
    }

    pub fn sub(&self, a: &AlgebraElement, b: &AlgebraElement) -> AlgebraElement {
        AlgebraElement::new(a.coords.iter().zip(&b.coords).map(|(x, y)| x - y).collect())
    }

    pub fn neg(&self, a: &AlgebraElement) -> AlgebraElement {
        AlgebraElement::new(a.coords.iter().map(|x| -x).collect())
    }

    pub fn scale(&self, a: &AlgebraElement, k: &BigRat) -> AlgebraElement {
        AlgebraElement::new(a.coords.iter().map(|x| x * k).collect())
    }

    pub fn inverse(&self, a: &AlgebraElement) -> Result<AlgebraElement> {
        let m = self.regular_rep(a);
        let inv = m.inverse().map_err(|_| Error::NotInvertible)?;
        Ok(AlgebraElement::new(inv.mul_vec(&self.one().coords)))
    }

    pub fn pow(&self, a: &AlgebraElement, e: i64) -> Result<AlgebraElement> {
        let base = if e < 0 { self.inverse(a)? } else { a.clone() };
        let m = self.regular_rep(&base).pow(e.unsigned_abs());
        Ok(AlgebraElement::new(m.mul_vec(&self.one().coords)))
    }

    /// Product Π a_i^{e_i}.
    pub fn product(&self, gens: &[AlgebraElement], exps: &[i64]) -> Result<AlgebraElement> {
        let mut acc = self.one();
        for (g, &e) in gens.iter().zip(exps) {
            if e != 0 {
                acc = self.mul(&acc, &self.pow(g, e)?);
            }
        }
        Ok(acc)
    }

    fn rep_direct(&self, a: &AlgebraElement) -> MatQ {
        let comps: Vec<QPoly> = (0..self.num_factors()).map(|k| self.component(a, k)).collect();
        let cols: Vec<Vec<BigRat>> = (0..self.n)
            .map(|j| {
                let mut e = vec![BigRat::zero(); self.n];
                e[j] = BigRat::one();
                let bj = AlgebraElement::new(e);
                let prods: Vec<QPoly> = (0..self.num_factors())
                    .map(|k| &comps[k] * &self.component(&bj, k))
                    .collect();
                self.from_components(&prods).coords
            })
            .collect();
        MatQ::from_cols(&cols).expect("square")
    }

    /// Matrix of multiplication by `a` in the order basis: column j holds the
    /// coordinates of a·b_j.
    pub fn regular_rep(&self, a: &AlgebraElement) -> MatQ {
        assert_eq!(a.coords.len(), self.n, "element has the wrong length");
        let mut m = MatQ::zeros(self.n, self.n);
        for (c, l) in a.coords.iter().zip(&self.basis_reps) {
            if !c.is_zero() {
                m = m.add(&l.scale(c));
            }
        }
        m
    }

    pub fn try_regular_rep(&self, a: &AlgebraElement) -> Result<MatQ> {
        self.check_len(a)?;
        Ok(self.regular_rep(a))
    }

    pub fn basis_rep(&self, i: usize) -> &MatQ {
        &self.basis_reps[i]
    }

    pub fn norm(&self, a: &AlgebraElement) -> BigRat {
        self.regular_rep(a).det()
    }

    pub fn trace(&self, a: &AlgebraElement) -> BigRat {
        self.regular_rep(a).trace()
    }

    pub fn charpoly(&self, a: &AlgebraElement) -> QPoly {
        self.regular_rep(a).charpoly()
    }

    /// Recovers the element whose regular representation is `m`, if any.
    pub fn element_of_matrix(&self, m: &MatQ) -> Option<AlgebraElement> {
        let a = AlgebraElement::new(m.mul_vec(&self.one().coords));
        (self.regular_rep(&a) == *m).then_some(a)
    }

    /// True when all entries of the regular representation are integers.
    pub fn element_is_integral(&self, a: &AlgebraElement) -> bool {
        self.regular_rep(a).is_integral()
    }

    /// 1 ∈ span and closure of the basis under products.
    pub fn is_order(&self) -> OrderCheck {
        let one = self.one();
        if let Some((c, v)) = first_non_integer(&one.coords) {
            return OrderCheck {
                is_order: false,
                witness: Some(OrderWitness { pair: None, coordinate: c, value: v }),
            };
        }
        for i in 0..self.n {
            for j in i..self.n {
                let col = self.basis_reps[i].col(j);
                if let Some((c, v)) = first_non_integer(&col) {
                    return OrderCheck {
                        is_order: false,
                        witness: Some(OrderWitness { pair: Some((i, j)), coordinate: c, value: v }),
                    };
                }
            }
        }
        OrderCheck { is_order: true, witness: None }
    }

    /// Discriminant of the order: det of the trace form on the basis.
    pub fn order_discriminant(&self) -> BigRat {
        let mut m = MatQ::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m[(i, j)] = self.basis_reps[i].mul(&self.basis_reps[j]).trace();
            }
        }
        m.det()
    }
}

fn first_non_integer(v: &[BigRat]) -> Option<(usize, BigRat)> {
    v.iter().enumerate().find(|(_, x)| !x.is_integer()).map(|(i, x)| (i, x.clone()))
}

/// Divisors of |n| for |n| up to 10^12; None when too large.
fn divisors(n: &BigInt) -> Option<Vec<i64>> {
    let n = n.abs().to_i64()?;
    if n > 1_000_000_000_000 {
        return None;
    }
    let mut out = Vec::new();
    let mut d = 1i64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            if d != n / d {
                out.push(n / d);
            }
        }
        d += 1;
    }
    Some(out)
}

/// True if the monic quartic splits into two monic integer quadratics.
fn has_quadratic_factor(f: &ZPoly) -> Option<bool> {
    let c = |i| f.coeff(i);
    let (f0, f1, f2, f3) = (c(0), c(1), c(2), c(3));
    let divs = divisors(&f0)?;
    for d0 in divs {
        for b in [BigInt::from(d0), BigInt::from(-d0)] {
            let d = &f0 / &b;
            if d != b {
                // a + c = f3 and a d + b c = f1 give a (d − b) = f1 − b f3
                let num = &f1 - &b * &f3;
                let den = &d - &b;
                if !(&num % &den).is_zero() {
                    continue;
                }
                let a = num / den;
                let cc = &f3 - &a;
                if &a * &cc + &b + &d == f2 {
                    return Some(true);
                }
            } else {
                if f1 != &b * &f3 {
                    continue;
                }
                // a + c = f3, a c = f2 − 2b
                let p = &f2 - &b * 2;
                let disc: BigInt = &f3 * &f3 - &p * 4;
                if disc >= BigInt::zero() {
                    let s = disc.sqrt();
                    if &s * &s == disc && (&f3 + &s).is_even() {
                        return Some(true);
                    }
                }
            }
        }
    }
    Some(false)
}

/// Irreducibility over Q of a monic integer polynomial: exact for degree ≤ 4,
/// and by mod-p degree patterns beyond.
pub fn check_irreducible(f: &ZPoly) -> Result<()> {
    let n = f.degree_nonzero()?;
    let name = f.to_string();
    if n <= 1 {
        return Ok(());
    }
    if !f.integer_roots()?.is_empty() {
        return Err(Error::NotIrreducible(name));
    }
    if n <= 3 {
        return Ok(());
    }
    if n == 4 {
        return match has_quadratic_factor(f) {
            Some(true) => Err(Error::NotIrreducible(name)),
            Some(false) => Ok(()),
            None => degree_pattern_certificate(f, n),
        };
    }
    degree_pattern_certificate(f, n)
}

/// Intersects the sets of achievable factor degrees over many primes; empty
/// intersection (within 1..n) proves irreducibility.
fn degree_pattern_certificate(f: &ZPoly, n: usize) -> Result<()> {
    let disc = f.discriminant()?;
    if disc.is_zero() {
        return Err(Error::NotIrreducible(f.to_string()));
    }
    let mut possible: Vec<bool> = (0..=n).map(|d| d > 0 && d < n).collect();
    let mut used = 0;
    let mut p = 2u64;
    while used < 60 {
        p += 1;
        if !is_prime(p) || (&disc % BigInt::from(p)).is_zero() {
            continue;
        }
        used += 1;
        let degs = factor_degrees(&factor_z_mod_p(f, p)?);
        let mut sums = vec![false; n + 1];
        sums[0] = true;
        for d in degs {
            for s in (d..=n).rev() {
                if sums[s - d] {
                    sums[s] = true;
                }
            }
        }
        for d in 0..=n {
            possible[d] &= sums[d];
        }
        if !possible.iter().any(|&x| x) {
            return Ok(());
        }
    }
    Err(Error::IrreducibilityUndecided(f.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational::frac;

    fn cubic() -> EtaleAlgebra {
        EtaleAlgebra::power_basis(vec![ZPoly::from_i64s(&[-1, 1, 0, 1])]).unwrap()
    }

    fn gaussian() -> EtaleAlgebra {
        EtaleAlgebra::power_basis(vec![ZPoly::from_i64s(&[1, 0, 1])]).unwrap()
    }

    #[test]
    fn regular_rep_of_generators() {
        let e = cubic();
        let x = AlgebraElement::from_i64s(&[0, 1, 0]);
        assert_eq!(
            e.regular_rep(&x),
            MatQ::from_i64(&[&[0, 0, 1], &[1, 0, -1], &[0, 1, 0]])
        );
        let g = gaussian();
        let i = AlgebraElement::from_i64s(&[0, 1]);
        assert_eq!(g.regular_rep(&i), MatQ::from_i64(&[&[0, -1], &[1, 0]]));
        assert!(e.regular_rep(&e.one()).is_identity());
    }

    #[test]
    fn norm_and_trace() {
        let g = gaussian();
        assert_eq!(g.norm(&AlgebraElement::from_i64s(&[0, 1])), rat(1));
        let u = AlgebraElement::new(vec![frac(4, 5), frac(3, 5)]);
        assert_eq!(g.norm(&u), rat(1));
        assert!(!g.element_is_integral(&u));
        assert_eq!(g.trace(&AlgebraElement::from_i64s(&[0, 1])), rat(0));
        let e = cubic();
        let x = AlgebraElement::from_i64s(&[0, 1, 0]);
        assert_eq!(e.norm(&x), rat(1));
        assert_eq!(e.trace(&x), rat(0));
        assert_eq!(e.trace(&e.one()), rat(3));
        assert_eq!(e.charpoly(&x), QPoly::from_i64s(&[-1, 1, 0, 1]));
    }

    #[test]
    fn order_checks() {
        let f = vec![ZPoly::from_i64s(&[1, 0, 1])];
        let half = EtaleAlgebra::new(
            f.clone(),
            MatQ::from_rows(vec![vec![rat(1), rat(0)], vec![rat(0), frac(1, 2)]]).unwrap(),
        )
        .unwrap();
        let chk = half.is_order();
        assert!(!chk.is_order);
        let w = chk.witness.unwrap();
        assert_eq!(w.pair, Some((1, 1)));
        assert_eq!(w.value, frac(-1, 4));
        let two = EtaleAlgebra::new(f, MatQ::from_i64(&[&[1, 0], &[0, 2]])).unwrap();
        assert!(two.is_order().is_order);
        assert!(cubic().is_order().is_order);
    }

    #[test]
    fn singular_basis_and_reducible_rejected() {
        let f = vec![ZPoly::from_i64s(&[1, 0, 1])];
        assert_eq!(
            EtaleAlgebra::new(f, MatQ::from_i64(&[&[1, 0], &[2, 0]])),
            Err(Error::SingularBasis)
        );
        assert!(matches!(
            EtaleAlgebra::power_basis(vec![ZPoly::from_i64s(&[-1, 0, 1])]),
            Err(Error::NotIrreducible(_))
        ));
        // (x^2+1)(x^2+2)
        assert!(matches!(
            check_irreducible(&ZPoly::from_i64s(&[2, 0, 3, 0, 1])),
            Err(Error::NotIrreducible(_))
        ));
        // (x^2+x+1)^2-style square: (x^2 + 1)^2
        assert!(check_irreducible(&ZPoly::from_i64s(&[1, 0, 2, 0, 1])).is_err());
        assert!(check_irreducible(&ZPoly::from_i64s(&[1, -16, 20, -8, 1])).is_ok());
        assert!(check_irreducible(&ZPoly::from_i64s(&[1, 0, -10, 0, 1])).is_ok());
        // x^5 - x - 1 is irreducible
        assert!(check_irreducible(&ZPoly::from_i64s(&[-1, -1, 0, 0, 0, 1])).is_ok());
        assert!(matches!(
            EtaleAlgebra::power_basis(vec![ZPoly::from_i64s(&[1, 2])]),
            Err(Error::NotMonic)
        ));
    }

    #[test]
    fn multi_factor_algebra() {
        let e = EtaleAlgebra::power_basis(vec![ZPoly::from_i64s(&[0, 1]), ZPoly::from_i64s(&[0, 1])])
            .unwrap();
        assert_eq!(e.degree(), 2);
        assert_eq!(e.one().coords, vec![rat(1), rat(1)]);
        let a = AlgebraElement::from_i64s(&[2, 3]);
        assert_eq!(e.norm(&a), rat(6));
    }

    #[test]
    fn inverse_and_powers() {
        let e = cubic();
        let x = AlgebraElement::from_i64s(&[0, 1, 0]);
        let xi = e.inverse(&x).unwrap();
        assert_eq!(xi, AlgebraElement::from_i64s(&[1, 0, 1]));
        assert_eq!(e.pow(&x, -1).unwrap(), xi);
        assert_eq!(e.pow(&x, 3).unwrap(), AlgebraElement::from_i64s(&[1, -1, 0]));
        assert_eq!(e.inverse(&e.zero()), Err(Error::NotInvertible));
    }
}
