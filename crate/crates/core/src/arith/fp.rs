//! Polynomials over F_p and their factorization.
//!
//! Factorization runs squarefree decomposition, distinct-degree splitting and
//! Cantor–Zassenhaus equal-degree splitting. The random choices are drawn from
//! a ChaCha stream seeded by (f, p), so results are reproducible. Linear
//! factors over small fields (p·deg ≤ 10⁴) are found by exhaustive root search
//! instead.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::poly::ZPoly;
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct FpPoly {
    p: u64,
    coeffs: Vec<u64>,
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n % 2 == 0 {
        return false;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn powmod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a, p);
        }
        a = mulmod(a, a, p);
        e >>= 1;
    }
    r
}

fn invmod(a: u64, p: u64) -> u64 {
    powmod(a, p - 2, p)
}

impl FpPoly {
    pub fn new(p: u64, mut coeffs: Vec<u64>) -> Self {
        for c in coeffs.iter_mut() {
            *c %= p;
        }
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        FpPoly { p, coeffs }
    }

    /// Reduction of an integer polynomial mod p.
    pub fn from_z(f: &ZPoly, p: u64) -> Self {
        let pb = BigInt::from(p);
        FpPoly::new(
            p,
            f.coeffs()
                .iter()
                .map(|c| c.mod_floor(&pb).to_u64().unwrap())
                .collect(),
        )
    }

    pub fn to_z(&self) -> ZPoly {
        ZPoly::new(self.coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn zero(p: u64) -> Self {
        FpPoly { p, coeffs: vec![] }
    }

    pub fn one(p: u64) -> Self {
        FpPoly::new(p, vec![1])
    }

    pub fn x(p: u64) -> Self {
        FpPoly::new(p, vec![0, 1])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs == [1]
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    fn deg(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    pub fn lc(&self) -> u64 {
        self.coeffs.last().copied().unwrap_or(0)
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let inv = invmod(self.lc(), self.p);
        self.scale(inv)
    }

    pub fn scale(&self, k: u64) -> Self {
        FpPoly::new(self.p, self.coeffs.iter().map(|&c| mulmod(c, k, self.p)).collect())
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        FpPoly::new(
            self.p,
            (0..n)
                .map(|i| (self.c(i) + o.c(i)) % self.p)
                .collect(),
        )
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        FpPoly::new(
            self.p,
            (0..n)
                .map(|i| (self.c(i) + self.p - o.c(i)) % self.p)
                .collect(),
        )
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return FpPoly::zero(self.p);
        }
        let mut out = vec![0u64; self.coeffs.len() + o.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in o.coeffs.iter().enumerate() {
                out[i + j] = (out[i + j] + mulmod(a, b, self.p)) % self.p;
            }
        }
        FpPoly::new(self.p, out)
    }

    fn c(&self, i: usize) -> u64 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    pub fn eval(&self, x: u64) -> u64 {
        let mut acc = 0;
        for &c in self.coeffs.iter().rev() {
            acc = (mulmod(acc, x, self.p) + c) % self.p;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        FpPoly::new(
            self.p,
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| mulmod(c, i as u64 % self.p, self.p))
                .collect(),
        )
    }

    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let dd = d.deg();
        if self.coeffs.len() <= dd {
            return (FpPoly::zero(self.p), self.clone());
        }
        let inv = invmod(d.lc(), self.p);
        let mut r = self.coeffs.clone();
        let mut q = vec![0u64; r.len() - dd];
        for k in (0..q.len()).rev() {
            let c = mulmod(r[k + dd], inv, self.p);
            if c != 0 {
                for (i, &dc) in d.coeffs.iter().enumerate() {
                    r[k + i] = (r[k + i] + self.p - mulmod(c, dc, self.p)) % self.p;
                }
            }
            q[k] = c;
        }
        r.truncate(dd);
        (FpPoly::new(self.p, q), FpPoly::new(self.p, r))
    }

    pub fn rem(&self, d: &Self) -> Self {
        self.div_rem(d).1
    }

    pub fn gcd(a: &Self, b: &Self) -> Self {
        let (mut a, mut b) = (a.clone(), b.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// self^e mod m.
    pub fn powmod(&self, mut e: u128, m: &Self) -> Self {
        let mut base = self.rem(m);
        let mut acc = FpPoly::one(self.p).rem(m);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).rem(m);
            }
            base = base.mul(&base).rem(m);
            e >>= 1;
        }
        acc
    }

    /// p-th root of a polynomial whose derivative vanishes.
    fn pth_root(&self) -> Self {
        let p = self.p as usize;
        // a^(1/p) = a in F_p
        FpPoly::new(
            self.p,
            self.coeffs.iter().step_by(p).copied().collect(),
        )
    }

    fn seed(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for &c in self.coeffs.iter().chain(std::iter::once(&self.p)) {
            h ^= c;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        h
    }
}

/// Squarefree decomposition of a monic polynomial: (g, m) with f = Π g^m.
fn squarefree_decomposition(f: &FpPoly) -> Vec<(FpPoly, u32)> {
    let p = f.p;
    let mut out = Vec::new();
    if f.deg() == 0 {
        return out;
    }
    let df = f.derivative();
    if df.is_zero() {
        for (g, m) in squarefree_decomposition(&f.pth_root()) {
            out.push((g, m * p as u32));
        }
        return out;
    }
    let mut c = FpPoly::gcd(f, &df);
    let mut w = f.div_rem(&c).0;
    let mut i = 1;
    while w.deg() > 0 {
        let y = FpPoly::gcd(&w, &c);
        let z = w.div_rem(&y).0;
        if z.deg() > 0 {
            out.push((z.monic(), i));
        }
        i += 1;
        w = y;
        c = c.div_rem(&w).0;
    }
    if c.deg() > 0 {
        for (g, m) in squarefree_decomposition(&c.pth_root()) {
            out.push((g, m * p as u32));
        }
    }
    out
}

/// Distinct-degree factorization of a squarefree monic polynomial.
fn distinct_degree(f: &FpPoly) -> Vec<(FpPoly, usize)> {
    let p = f.p;
    let mut out = Vec::new();
    let mut rest = f.clone();
    let x = FpPoly::x(p);
    let mut h = x.clone();
    let mut d = 1;
    while rest.deg() >= 2 * d {
        h = h.powmod(p as u128, &rest);
        let g = FpPoly::gcd(&h.sub(&x), &rest);
        if g.deg() > 0 {
            rest = rest.div_rem(&g).0;
            h = h.rem(&rest);
            out.push((g, d));
        }
        d += 1;
    }
    if rest.deg() > 0 {
        let dd = rest.deg();
        out.push((rest.monic(), dd));
    }
    out
}

/// Splits a product of distinct irreducibles of degree `d` into its factors.
fn equal_degree(f: &FpPoly, d: usize, rng: &mut ChaCha8Rng) -> Vec<FpPoly> {
    let p = f.p;
    let n = f.deg();
    if n == d {
        return vec![f.monic()];
    }
    if d == 1 && (p as u128) * (n as u128) <= 10_000 {
        let mut roots: Vec<FpPoly> = (0..p)
            .filter(|&r| f.eval(r) == 0)
            .map(|r| FpPoly::new(p, vec![(p - r) % p, 1]))
            .collect();
        roots.sort_by(|a, b| a.coeffs.cmp(&b.coeffs));
        return roots;
    }
    loop {
        let a = FpPoly::new(p, (0..n).map(|_| rng.gen_range(0..p)).collect());
        if a.deg() == 0 {
            continue;
        }
        let b = if p == 2 {
            // trace map a + a^2 + ... + a^(2^(d-1))
            let mut t = a.rem(f);
            let mut acc = t.clone();
            for _ in 1..d {
                t = t.mul(&t).rem(f);
                acc = acc.add(&t);
            }
            acc
        } else {
            let e = ((p as u128).pow(d as u32) - 1) / 2;
            a.powmod(e, f).sub(&FpPoly::one(p))
        };
        let g = FpPoly::gcd(&b, f);
        if g.deg() > 0 && g.deg() < n {
            let h = f.div_rem(&g).0.monic();
            let mut out = equal_degree(&g, d, rng);
            out.extend(equal_degree(&h, d, rng));
            return out;
        }
    }
}

/// Irreducible factors of `f` over F_p with multiplicities. Factors are monic
/// and sorted by (degree, coefficients); their product with multiplicity is
/// monic(f).
pub fn factor_mod_p(f: &FpPoly) -> Result<Vec<(FpPoly, u32)>> {
    let p = f.p;
    if !is_prime(p) {
        return Err(Error::CompositeModulus(p));
    }
    if f.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let f = f.monic();
    let mut rng = ChaCha8Rng::seed_from_u64(f.seed());
    let mut out = Vec::new();
    for (g, m) in squarefree_decomposition(&f) {
        for (h, d) in distinct_degree(&g) {
            for k in equal_degree(&h, d, &mut rng) {
                out.push((k, m));
            }
        }
    }
    out.sort_by(|a, b| (a.0.deg(), &a.0.coeffs).cmp(&(b.0.deg(), &b.0.coeffs)));
    Ok(out)
}

/// Factor an integer polynomial modulo p.
pub fn factor_z_mod_p(f: &ZPoly, p: u64) -> Result<Vec<(FpPoly, u32)>> {
    if !is_prime(p) {
        return Err(Error::CompositeModulus(p));
    }
    let fp = FpPoly::from_z(f, p);
    if fp.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    factor_mod_p(&fp)
}

/// Degrees of the irreducible factors (with multiplicity), sorted.
pub fn factor_degrees(factors: &[(FpPoly, u32)]) -> Vec<usize> {
    let mut v: Vec<usize> = factors
        .iter()
        .flat_map(|(g, m)| std::iter::repeat(g.deg()).take(*m as usize))
        .collect();
    v.sort_unstable();
    v
}

pub fn is_squarefree_mod_p(f: &ZPoly, p: u64) -> Result<bool> {
    let fp = FpPoly::from_z(f, p);
    if fp.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    Ok(FpPoly::gcd(&fp, &fp.derivative()).deg() == 0)
}

pub fn small_primes(limit: u64) -> Vec<u64> {
    (2..=limit).filter(|&n| is_prime(n)).collect()
}
