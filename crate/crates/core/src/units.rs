//! Units and S-units of an order.
//!
//! Candidate units come from exhaustive search in a coordinate box. Systems of
//! generators are verified exactly (integrality, norms, torsion orders) and
//! their independence is certified by an interval determinant of the S-log
//! embedding. Dependence is proved by an exact multiplicative relation.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::fp::{factor_z_mod_p, is_prime, FpPoly};
use crate::arith::interval::{approx_roots, certified_roots, eval_complex, ln_bounds, RationalInterval};
use crate::arith::poly::{QPoly, ZPoly};
use crate::arith::rational::{int, is_s_integral, is_s_unit_rational, rat, to_f64, valuation, BigRat};
use crate::error::{Error, Result};
use crate::etale::{AlgebraElement, EtaleAlgebra};
use crate::galois::{signature, Signature};
use crate::linalg::lattice::{hnf_with_transform, left_kernel, lattice_basis, IntMat};
use crate::linalg::MatQ;

pub const DEFAULT_BUDGET: u128 = 1_000_000;
pub const DEFAULT_PRECISION_CAP: u32 = 256;
const RELATION_BOUND: i64 = 8;

/// Precision cap from `CMA_PRECISION_CAP`, else the default.
pub fn precision_cap_from_env() -> u32 {
    std::env::var("CMA_PRECISION_CAP")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .filter(|&b: &u32| b >= 16)
        .unwrap_or(DEFAULT_PRECISION_CAP)
}

/// r1 + r2 − 1 plus the number of places over the S-primes, for one field.
pub fn dirichlet_rank(sig: Signature, places_over_s: usize) -> usize {
    sig.r1 + sig.r2 - 1 + places_over_s
}

/// Rank of the S-unit group of the maximal order of every factor, summed.
pub fn algebra_dirichlet_rank(e: &EtaleAlgebra, s_primes: &[u64]) -> Result<usize> {
    let mut total = 0;
    for f in e.factors() {
        let sig = signature(f)?;
        let mut over = 0;
        for &p in s_primes {
            over += crate::galois::places_over_p(f, p)?;
        }
        total += dirichlet_rank(sig, over);
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorsionUnit {
    pub element: AlgebraElement,
    pub order: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitSystem {
    pub torsion: TorsionUnit,
    pub free: Vec<AlgebraElement>,
    #[serde(default)]
    pub s_primes: Vec<u64>,
}

// ---------------------------------------------------------------- search

fn int_basis_reps(e: &EtaleAlgebra) -> Result<Vec<Vec<Vec<i64>>>> {
    (0..e.degree())
        .map(|i| {
            let m = e.basis_rep(i);
            m.to_integer_rows()
                .ok_or_else(|| Error::NotAnOrder("basis products are not integral".into()))?
                .into_iter()
                .map(|r| {
                    r.into_iter()
                        .map(|x| x.to_i64().ok_or_else(|| Error::InvalidInput("structure constant too large".into())))
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// Fraction-free determinant in i128; None on overflow.
fn bareiss_i128(mut m: Vec<Vec<i128>>) -> Option<i128> {
    let n = m.len();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if m[k][k] == 0 {
            let p = (k + 1..n).find(|&i| m[i][k] != 0)?;
            m.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let a = m[i][j].checked_mul(m[k][k])?;
                let b = m[i][k].checked_mul(m[k][j])?;
                m[i][j] = a.checked_sub(b)? / prev;
            }
        }
        prev = m[k][k];
    }
    Some(sign * m[n - 1][n - 1])
}

fn det_exact(rows: &[Vec<i128>]) -> BigInt {
    let n = rows.len();
    // a singular matrix makes the pivot search fail, which is also the zero case
    if let Some(d) = bareiss_i128(rows.to_vec()) {
        return BigInt::from(d);
    }
    let m = MatQ::from_rows(rows.iter().map(|r| r.iter().map(|&x| int(BigInt::from(x))).collect()).collect())
        .expect("square");
    let d = m.det();
    debug_assert_eq!(m.rows(), n);
    d.numer().clone()
}

/// Norm of an element with integer coordinates.
fn int_norm(reps: &[Vec<Vec<i64>>], a: &[i64]) -> BigInt {
    let n = a.len();
    let mut m = vec![vec![0i128; n]; n];
    for (c, l) in a.iter().zip(reps) {
        if *c == 0 {
            continue;
        }
        for i in 0..n {
            for j in 0..n {
                m[i][j] += *c as i128 * l[i][j] as i128;
            }
        }
    }
    det_exact(&m)
}

/// All elements with integer coordinates in [−bound, bound]^n whose norm lies
/// in `targets`, in lexicographic coordinate order.
pub fn search_units(
    e: &EtaleAlgebra,
    bound: u32,
    targets: &[BigInt],
    budget: u128,
) -> Result<Vec<AlgebraElement>> {
    let n = e.degree();
    let side = 2 * bound as u128 + 1;
    let total = side.checked_pow(n as u32).unwrap_or(u128::MAX);
    if total > budget {
        return Err(Error::BudgetExceeded { requested: total, budget });
    }
    let reps = int_basis_reps(e)?;
    let b = bound as i64;
    let inner = total / side;
    let found: Vec<Vec<Vec<i64>>> = (-b..=b)
        .into_par_iter()
        .map(|first| {
            let mut out = Vec::new();
            let mut a = vec![-b; n];
            a[0] = first;
            for idx in 0..inner {
                let mut r = idx;
                for slot in a.iter_mut().skip(1).rev() {
                    *slot = (r % side) as i64 - b;
                    r /= side;
                }
                if a.iter().all(|&x| x == 0) {
                    continue;
                }
                let nm = int_norm(&reps, &a);
                if targets.contains(&nm) {
                    out.push(a.clone());
                }
            }
            out
        })
        .collect();
    Ok(found.into_iter().flatten().map(|c| AlgebraElement::from_i64s(&c)).collect())
}

/// Norm targets ±Π p^k with 0 ≤ k ≤ kmax for each S-prime.
pub fn s_unit_norm_targets(s_primes: &[u64], kmax: u32) -> Vec<BigInt> {
    let mut vals = vec![BigInt::one()];
    for &p in s_primes {
        let mut next = Vec::new();
        for v in &vals {
            let mut pk = BigInt::one();
            for _ in 0..=kmax {
                next.push(v * &pk);
                pk *= p;
            }
        }
        vals = next;
    }
    let mut out: Vec<BigInt> = vals.iter().flat_map(|v| [v.clone(), -v.clone()]).collect();
    out.sort();
    out.dedup();
    out
}

// ---------------------------------------------------------------- torsion

fn is_one(e: &EtaleAlgebra, a: &AlgebraElement) -> bool {
    *a == e.one()
}

/// Multiplicative order of `a` if it is at most `limit`.
pub fn element_order(e: &EtaleAlgebra, a: &AlgebraElement, limit: u32) -> Option<u32> {
    let m = e.regular_rep(a);
    let mut acc = m.clone();
    for k in 1..=limit {
        if acc.is_identity() {
            return Some(k);
        }
        acc = acc.mul(&m);
    }
    None
}

/// Largest order of a root of unity in a field of degree n: φ(m) ≤ n.
fn max_root_of_unity_order(n: usize) -> u32 {
    (1..=(2 * n * n + 2) as u32).filter(|&m| euler_phi(m) as usize <= n).max().unwrap_or(2)
}

fn euler_phi(mut m: u32) -> u32 {
    let mut r = m;
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            while m % p == 0 {
                m /= p;
            }
            r -= r / p;
        }
        p += 1;
    }
    if m > 1 {
        r -= r / m;
    }
    r
}

/// Embedding values of the order basis elements, one row per embedding
/// (all complex roots, conjugates included).
fn basis_embedding_matrix(e: &EtaleAlgebra) -> Result<Vec<Vec<Complex64>>> {
    let n = e.degree();
    let mut rows = Vec::new();
    for (k, f) in e.factors().iter().enumerate() {
        for z in approx_roots(f)? {
            let row: Vec<Complex64> = (0..n)
                .map(|i| {
                    let mut v = vec![BigRat::zero(); n];
                    v[i] = BigRat::one();
                    eval_f64(&e.component(&AlgebraElement::new(v), k), z)
                })
                .collect();
            rows.push(row);
        }
    }
    Ok(rows)
}

fn eval_f64(p: &QPoly, z: Complex64) -> Complex64 {
    p.coeffs().iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + to_f64(c))
}

fn complex_inverse(m: &[Vec<Complex64>]) -> Option<Vec<Vec<Complex64>>> {
    let n = m.len();
    let mut a: Vec<Vec<Complex64>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)));
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| a[x][c].norm().partial_cmp(&a[y][c].norm()).unwrap())?;
        if a[p][c].norm() < 1e-300 {
            return None;
        }
        a.swap(c, p);
        let piv = a[c][c];
        for v in a[c].iter_mut() {
            *v /= piv;
        }
        for i in 0..n {
            if i != c {
                let f = a[i][c];
                let row_c = a[c].clone();
                for (x, y) in a[i].iter_mut().zip(row_c) {
                    *x -= f * y;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Generator and order of the roots of unity of a field given by a single
/// factor. Candidates come from a box large enough to hold every element all
/// of whose conjugates have absolute value 1; each is confirmed by exact
/// powering.
pub fn torsion_units(e: &EtaleAlgebra, budget: u128) -> Result<TorsionUnit> {
    if e.num_factors() != 1 {
        return Err(Error::Unsupported("torsion of an algebra with several factors".into()));
    }
    let minus_one = e.scale(&e.one(), &rat(-1));
    let sig = signature(&e.factors()[0])?;
    if sig.r1 > 0 {
        return Ok(TorsionUnit { element: minus_one, order: 2 });
    }
    let v = basis_embedding_matrix(e)?;
    let vinv = complex_inverse(&v).ok_or(Error::SingularBasis)?;
    // coordinates of an element with |σ| = 1 everywhere are bounded by row sums
    let bound = vinv
        .iter()
        .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let bound = (bound * (1.0 + 1e-9) + 1e-9).floor() as u32;
    let limit = max_root_of_unity_order(e.degree());
    let cands = search_units(e, bound.max(1), &[BigInt::one()], budget)?;
    let mut best: Option<(u32, AlgebraElement)> = None;
    for c in cands {
        let on_circle = v.iter().all(|row| {
            let z: Complex64 = row.iter().zip(&c.coords).map(|(b, x)| b * to_f64(x)).sum();
            (z.norm() - 1.0).abs() < 1e-6
        });
        if !on_circle {
            continue;
        }
        if let Some(k) = element_order(e, &c, limit) {
            let better = match &best {
                None => true,
                Some((bk, be)) => k > *bk || (k == *bk && lex_cmp(&c.coords, &be.coords) == Ordering::Greater),
            };
            if better {
                best = Some((k, c));
            }
        }
    }
    let (order, element) = best.unwrap_or((2, minus_one));
    Ok(TorsionUnit { element, order })
}

fn lex_cmp(a: &[BigRat], b: &[BigRat]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

fn l1(a: &AlgebraElement) -> BigRat {
    a.coords.iter().fold(BigRat::zero(), |acc, x| acc + x.abs())
}

/// All powers of the torsion generator.
pub fn torsion_elements(e: &EtaleAlgebra, t: &TorsionUnit) -> Result<Vec<AlgebraElement>> {
    (0..t.order as i64).map(|k| e.pow(&t.element, k)).collect()
}

/// Canonical representative of u up to torsion and inversion: smallest
/// coordinate L1 norm, ties broken towards the lexicographically largest
/// coordinate vector.
pub fn canonical_generator(
    e: &EtaleAlgebra,
    u: &AlgebraElement,
    torsion: &[AlgebraElement],
) -> Result<AlgebraElement> {
    let inv = e.inverse(u)?;
    let mut best: Option<(BigRat, AlgebraElement)> = None;
    for base in [u, &inv] {
        for z in torsion {
            let c = e.mul(z, base);
            let h = l1(&c);
            let better = match &best {
                None => true,
                Some((bh, be)) => h < *bh || (h == *bh && lex_cmp(&c.coords, &be.coords) == Ordering::Greater),
            };
            if better {
                best = Some((h, c));
            }
        }
    }
    Ok(best.unwrap().1)
}

// ---------------------------------------------------------------- places and logs

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LogColumn {
    Real { factor: usize, root: usize },
    Complex { factor: usize, root: usize },
    Finite { factor: usize, p: u64, prime_factor: ZPoly, residue_degree: usize },
}

#[derive(Clone, Debug)]
struct FinitePlace {
    factor: usize,
    p: u64,
    g: FpPoly,
    cofactor: ZPoly,
    degree: usize,
}

fn finite_places(e: &EtaleAlgebra, s_primes: &[u64]) -> Result<Vec<FinitePlace>> {
    let mut out = Vec::new();
    for &p in s_primes {
        if !is_prime(p) {
            return Err(Error::CompositeModulus(p));
        }
        for (k, f) in e.factors().iter().enumerate() {
            let disc = f.discriminant()?;
            if (&disc % BigInt::from(p)).is_zero() {
                return Err(Error::RamifiedPlace { p, disc });
            }
            let fp = FpPoly::from_z(f, p);
            for (g, _) in factor_z_mod_p(f, p)? {
                let h = fp.div_rem(&g).0;
                out.push(FinitePlace {
                    factor: k,
                    p,
                    degree: g.degree().unwrap_or(0),
                    g,
                    cofactor: h.to_z(),
                });
            }
        }
    }
    Ok(out)
}

fn columns(e: &EtaleAlgebra, fin: &[FinitePlace]) -> Result<Vec<LogColumn>> {
    let mut cols = Vec::new();
    for (k, f) in e.factors().iter().enumerate() {
        let s = signature(f)?;
        cols.extend((0..s.r1).map(|r| LogColumn::Real { factor: k, root: r }));
        cols.extend((s.r1..s.r1 + s.r2).map(|r| LogColumn::Complex { factor: k, root: r }));
    }
    cols.extend(fin.iter().map(|pl| LogColumn::Finite {
        factor: pl.factor,
        p: pl.p,
        prime_factor: pl.g.to_z(),
        residue_degree: pl.degree,
    }));
    Ok(cols)
}

fn reduce_mod(a: &ZPoly, f: &ZPoly) -> ZPoly {
    // f is monic, so the remainder stays integral
    let r = a.to_q().rem(&f.to_q()).expect("nonzero modulus");
    ZPoly::new(r.coeffs().iter().map(|c| c.numer().clone()).collect())
}

/// Valuation at the prime (p, g) of the field element a(x)/1, a ≠ 0.
fn poly_valuation(a: &ZPoly, f: &ZPoly, pl: &FinitePlace) -> i64 {
    let mut a = reduce_mod(a, f);
    let mut v = 0;
    loop {
        let ap = FpPoly::from_z(&a, pl.p);
        if !ap.rem(&pl.g).is_zero() {
            return v;
        }
        a = reduce_mod(&(&a * &pl.cofactor), f);
        let pb = BigInt::from(pl.p);
        a = ZPoly::new(a.coeffs().iter().map(|c| c / &pb).collect());
        v += 1;
        if v > 10_000 {
            return v;
        }
    }
}

/// Valuation of an algebra element at a finite place.
fn element_valuation(e: &EtaleAlgebra, u: &AlgebraElement, pl: &FinitePlace) -> i64 {
    let comp = e.component(u, pl.factor);
    let den = comp.coeffs().iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let a = ZPoly::new(comp.coeffs().iter().map(|c| (c * int(den.clone())).numer().clone()).collect());
    poly_valuation(&a, &e.factors()[pl.factor], pl) - valuation(den, pl.p) as i64
}

/// Log embedding rows in floating point, for choosing minors and prefilters.
fn float_log_row(e: &EtaleAlgebra, u: &AlgebraElement, cols: &[LogColumn], roots: &[Vec<Complex64>], fin: &[FinitePlace]) -> Vec<f64> {
    let mut fi = 0;
    cols.iter()
        .map(|c| match c {
            LogColumn::Real { factor, root } => eval_f64(&e.component(u, *factor), roots[*factor][*root]).norm().ln(),
            LogColumn::Complex { factor, root } => {
                2.0 * eval_f64(&e.component(u, *factor), roots[*factor][*root]).norm().ln()
            }
            LogColumn::Finite { .. } => {
                let pl = &fin[fi];
                fi += 1;
                -(pl.degree as f64) * element_valuation(e, u, pl) as f64 * (pl.p as f64).ln()
            }
        })
        .collect()
}

/// Certified S-log embedding: interval entries, one row per element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogEmbedding {
    pub columns: Vec<LogColumn>,
    pub rows: Vec<Vec<RationalInterval>>,
    pub bits: u32,
}

/// Interval log embedding at the given precision; None when some archimedean
/// value cannot be separated from zero.
pub fn log_embedding(e: &EtaleAlgebra, gens: &[AlgebraElement], s_primes: &[u64], bits: u32) -> Result<Option<LogEmbedding>> {
    let fin = finite_places(e, s_primes)?;
    let cols = columns(e, &fin)?;
    let work = bits + 24;
    let disks: Vec<_> = e.factors().iter().map(|f| certified_roots(f, work)).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for u in gens {
        let mut row = Vec::new();
        let mut fi = 0;
        for c in &cols {
            let iv = match c {
                LogColumn::Real { factor, root } | LogColumn::Complex { factor, root } => {
                    let z = disks[*factor][*root].rect();
                    let val = eval_complex(&e.component(u, *factor), &z, work);
                    let Some(l) = val.abs_sq().ln(bits + 8) else { return Ok(None) };
                    if matches!(c, LogColumn::Real { .. }) {
                        l.scale(&BigRat::new(BigInt::one(), BigInt::from(2)))
                    } else {
                        l
                    }
                }
                LogColumn::Finite { .. } => {
                    let pl = &fin[fi];
                    fi += 1;
                    let k = -(pl.degree as i64) * element_valuation(e, u, pl);
                    let (lo, hi) = ln_bounds(&rat(pl.p as i64), bits + 8);
                    RationalInterval { lo, hi }.scale(&rat(k))
                }
            };
            row.push(iv.round(bits + 8));
        }
        rows.push(row);
    }
    Ok(Some(LogEmbedding { columns: cols, rows, bits }))
}

fn interval_det(m: &[Vec<RationalInterval>]) -> RationalInterval {
    let n = m.len();
    if n == 0 {
        return RationalInterval::point(BigRat::one());
    }
    if n == 1 {
        return m[0][0].clone();
    }
    // cofactor expansion along the first row
    let mut acc = RationalInterval::zero();
    for j in 0..n {
        let minor: Vec<Vec<RationalInterval>> = m[1..]
            .iter()
            .map(|r| r.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, x)| x.clone()).collect())
            .collect();
        let term = m[0][j].mul(&interval_det(&minor));
        acc = if j % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
    }
    acc
}

fn float_det(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let mut a = m.to_vec();
    let mut det = 1.0;
    for c in 0..n {
        let Some(p) = (c..n).max_by(|&x, &y| a[x][c].abs().partial_cmp(&a[y][c].abs()).unwrap()) else {
            return 0.0;
        };
        if a[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= a[c][c];
        for i in c + 1..n {
            let f = a[i][c] / a[c][c];
            for j in c..n {
                a[i][j] -= f * a[c][j];
            }
        }
    }
    det
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

// ---------------------------------------------------------------- verification

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorCheck {
    pub index: usize,
    pub s_integral: bool,
    pub inverse_s_integral: bool,
    pub norm: String,
    pub norm_is_s_unit: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndependenceProof {
    pub columns: Vec<usize>,
    pub bits: u32,
    pub det_lo: String,
    pub det_hi: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UnitFailure {
    NotSIntegral { index: usize },
    NormNotSUnit { index: usize, norm: String },
    TorsionOrder { claimed: u32, actual: Option<u32> },
    Dependent { exponents: Vec<i64> },
    WrongLength { index: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitCertificate {
    pub certified: bool,
    pub rank: usize,
    pub generators: Vec<GeneratorCheck>,
    pub torsion_order_verified: bool,
    pub independence: Option<IndependenceProof>,
    pub failure: Option<UnitFailure>,
    pub caveat: String,
}

const CAVEAT: &str = "independent system of the stated rank; that it generates the full unit group is not certified";

fn failed(rank: usize, gens: Vec<GeneratorCheck>, tors: bool, f: UnitFailure) -> UnitCertificate {
    UnitCertificate {
        certified: false,
        rank,
        generators: gens,
        torsion_order_verified: tors,
        independence: None,
        failure: Some(f),
        caveat: CAVEAT.into(),
    }
}

/// Exact order check: t^k = 1 and t^(k/q) ≠ 1 for every prime q | k.
fn exact_order_ok(e: &EtaleAlgebra, t: &TorsionUnit) -> Result<bool> {
    let k = t.order as i64;
    if k == 0 || !is_one(e, &e.pow(&t.element, k)?) {
        return Ok(false);
    }
    let mut m = t.order;
    let mut q = 2;
    while m > 1 {
        if m % q == 0 {
            if is_one(e, &e.pow(&t.element, k / q as i64)?) {
                return Ok(false);
            }
            while m % q == 0 {
                m /= q;
            }
        }
        q += 1;
    }
    Ok(true)
}

pub fn verify_unit_system(e: &EtaleAlgebra, sys: &UnitSystem, precision_cap: u32) -> Result<UnitCertificate> {
    let n = e.degree();
    let r = sys.free.len();
    let mut checks = Vec::new();
    let all: Vec<&AlgebraElement> = std::iter::once(&sys.torsion.element).chain(&sys.free).collect();
    for (i, u) in all.iter().enumerate() {
        if u.coords.len() != n {
            return Ok(failed(r, checks, false, UnitFailure::WrongLength { index: i }));
        }
        let m = e.regular_rep(u);
        let nm = m.det();
        let inv_ok = m.inverse().map(|x| x.is_s_integral(&sys.s_primes)).unwrap_or(false);
        let chk = GeneratorCheck {
            index: i,
            s_integral: m.is_s_integral(&sys.s_primes),
            inverse_s_integral: inv_ok,
            norm: nm.to_string(),
            norm_is_s_unit: is_s_unit_rational(&nm, &sys.s_primes),
        };
        let bad_int = !chk.s_integral || !chk.inverse_s_integral;
        let bad_norm = !chk.norm_is_s_unit;
        checks.push(chk);
        if bad_int {
            return Ok(failed(r, checks, false, UnitFailure::NotSIntegral { index: i }));
        }
        if bad_norm {
            return Ok(failed(r, checks, false, UnitFailure::NormNotSUnit { index: i, norm: nm.to_string() }));
        }
    }
    if !exact_order_ok(e, &sys.torsion)? {
        let actual = element_order(e, &sys.torsion.element, 1000);
        return Ok(failed(r, checks, false, UnitFailure::TorsionOrder { claimed: sys.torsion.order, actual }));
    }
    if r == 0 {
        return Ok(UnitCertificate {
            certified: true,
            rank: 0,
            generators: checks,
            torsion_order_verified: true,
            independence: None,
            failure: None,
            caveat: CAVEAT.into(),
        });
    }
    match certify_independence(e, &sys.free, &sys.s_primes, precision_cap)? {
        Some(proof) => Ok(UnitCertificate {
            certified: true,
            rank: r,
            generators: checks,
            torsion_order_verified: true,
            independence: Some(proof),
            failure: None,
            caveat: CAVEAT.into(),
        }),
        None => match find_relation(e, &sys.free, &sys.torsion, &sys.s_primes)? {
            Some(exps) => Ok(failed(r, checks, true, UnitFailure::Dependent { exponents: exps })),
            None => Err(Error::IndependenceUndecided { bits: precision_cap }),
        },
    }
}

fn ladder(cap: u32) -> Vec<u32> {
    let mut v: Vec<u32> = [64, 128, 256].into_iter().filter(|&b| b <= cap).collect();
    if v.last() != Some(&cap) {
        v.push(cap);
    }
    v
}

/// Tries maximal minors of the S-log embedding at increasing precision.
pub fn certify_independence(
    e: &EtaleAlgebra,
    gens: &[AlgebraElement],
    s_primes: &[u64],
    precision_cap: u32,
) -> Result<Option<IndependenceProof>> {
    let r = gens.len();
    let fin = finite_places(e, s_primes)?;
    let cols = columns(e, &fin)?;
    if r > cols.len() {
        return Ok(None);
    }
    let roots: Vec<Vec<Complex64>> = e.factors().iter().map(approx_roots).collect::<Result<_>>()?;
    let frows: Vec<Vec<f64>> = gens.iter().map(|u| float_log_row(e, u, &cols, &roots, &fin)).collect();
    let mut cand: Vec<(f64, Vec<usize>)> = subsets(cols.len(), r)
        .into_iter()
        .map(|s| {
            let m: Vec<Vec<f64>> = frows.iter().map(|row| s.iter().map(|&j| row[j]).collect()).collect();
            (float_det(&m).abs(), s)
        })
        .collect();
    cand.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal));
    cand.truncate(4);
    for bits in ladder(precision_cap) {
        let Some(emb) = log_embedding(e, gens, s_primes, bits)? else { continue };
        for (_, s) in &cand {
            let m: Vec<Vec<RationalInterval>> =
                emb.rows.iter().map(|row| s.iter().map(|&j| row[j].clone()).collect()).collect();
            let d = interval_det(&m);
            if !d.contains_zero() {
                return Ok(Some(IndependenceProof {
                    columns: s.clone(),
                    bits,
                    det_lo: crate::arith::rational::round_down(&d.lo, 64).to_string(),
                    det_hi: crate::arith::rational::round_up(&d.hi, 64).to_string(),
                }));
            }
        }
    }
    Ok(None)
}

/// True when Π gens^e is a root of unity (its `w`-th power is 1).
fn is_torsion_product(e: &EtaleAlgebra, gens: &[AlgebraElement], exps: &[i64], w: u32) -> Result<bool> {
    let p = e.product(gens, exps)?;
    Ok(is_one(e, &e.pow(&p, w as i64)?))
}

/// Searches exponent vectors with entries in [−8, 8] for a multiplicative
/// relation modulo torsion; floating-point logs prefilter, exact arithmetic
/// decides.
pub fn find_relation(
    e: &EtaleAlgebra,
    gens: &[AlgebraElement],
    torsion: &TorsionUnit,
    s_primes: &[u64],
) -> Result<Option<Vec<i64>>> {
    let r = gens.len();
    let fin = finite_places(e, s_primes)?;
    let cols = columns(e, &fin)?;
    let roots: Vec<Vec<Complex64>> = e.factors().iter().map(approx_roots).collect::<Result<_>>()?;
    let frows: Vec<Vec<f64>> = gens.iter().map(|u| float_log_row(e, u, &cols, &roots, &fin)).collect();
    let side = (2 * RELATION_BOUND + 1) as u64;
    let b = ((DEFAULT_BUDGET as f64).ln() / (side as f64).ln()).floor() as u32;
    let bound = if (r as u32) <= b { RELATION_BOUND } else { 2 };
    let side = (2 * bound + 1) as u64;
    let total = side.pow(r as u32);
    let scale = frows.iter().flatten().fold(1.0f64, |m, x| m.max(x.abs()));
    for idx in 1..total {
        let mut x = idx;
        let exps: Vec<i64> = (0..r)
            .map(|_| {
                let d = (x % side) as i64 - bound;
                x /= side;
                d
            })
            .collect();
        // one of ±e only, primitive vectors only
        let first = exps.iter().find(|&&d| d != 0).copied().unwrap_or(0);
        if first <= 0 || exps.iter().fold(0i64, |g, &d| g.gcd(&d)) != 1 {
            continue;
        }
        let small = (0..cols.len()).all(|j| {
            let s: f64 = exps.iter().zip(&frows).map(|(&d, row)| d as f64 * row[j]).sum();
            s.abs() < 1e-6 * scale * r as f64
        });
        if small && is_torsion_product(e, gens, &exps, torsion.order)? {
            return Ok(Some(exps));
        }
    }
    Ok(None)
}

// ---------------------------------------------------------------- group building

/// Expresses `u` as ζ·Π gens^e with |e_i| ≤ 8, if possible.
pub fn reduce_against(
    e: &EtaleAlgebra,
    gens: &[AlgebraElement],
    torsion: &TorsionUnit,
    s_primes: &[u64],
    u: &AlgebraElement,
) -> Result<Option<Vec<i64>>> {
    let mut all = gens.to_vec();
    all.push(u.clone());
    let fin = finite_places(e, s_primes)?;
    let cols = columns(e, &fin)?;
    let roots: Vec<Vec<Complex64>> = e.factors().iter().map(approx_roots).collect::<Result<_>>()?;
    let Some(x) = float_coeffs(e, gens, u, &cols, &roots, &fin) else { return Ok(None) };
    let exps: Vec<i64> = x.iter().map(|v| v.round() as i64).collect();
    if x.iter().zip(&exps).any(|(v, k)| (v - *k as f64).abs() > 1e-6) || exps.iter().any(|k| k.abs() > RELATION_BOUND) {
        return Ok(None);
    }
    let mut full: Vec<i64> = exps.iter().map(|k| -k).collect();
    full.push(1);
    Ok(is_torsion_product(e, &all, &full, torsion.order)?.then_some(exps))
}

/// Least-squares coefficients of log(u) in terms of log(gens).
fn float_coeffs(
    e: &EtaleAlgebra,
    gens: &[AlgebraElement],
    u: &AlgebraElement,
    cols: &[LogColumn],
    roots: &[Vec<Complex64>],
    fin: &[FinitePlace],
) -> Option<Vec<f64>> {
    let r = gens.len();
    let rows: Vec<Vec<f64>> = gens.iter().map(|g| float_log_row(e, g, cols, roots, fin)).collect();
    let target = float_log_row(e, u, cols, roots, fin);
    if r == 0 {
        return target.iter().all(|t| t.abs() < 1e-8).then(Vec::new);
    }
    // normal equations G Gᵀ x = G t
    let gram: Vec<Vec<f64>> =
        (0..r).map(|i| (0..r).map(|j| rows[i].iter().zip(&rows[j]).map(|(a, b)| a * b).sum()).collect()).collect();
    let rhs: Vec<f64> = (0..r).map(|i| rows[i].iter().zip(&target).map(|(a, b)| a * b).sum()).collect();
    let x = solve_f64(gram, rhs)?;
    let resid = (0..cols.len())
        .map(|j| (target[j] - (0..r).map(|i| x[i] * rows[i][j]).sum::<f64>()).abs())
        .fold(0.0, f64::max);
    (resid < 1e-6).then_some(x)
}

fn solve_f64(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| a[x][c].abs().partial_cmp(&a[y][c].abs()).unwrap())?;
        if a[p][c].abs() < 1e-12 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for i in 0..n {
            if i != c {
                let f = a[i][c] / a[c][c];
                for j in c..n {
                    a[i][j] -= f * a[c][j];
                }
                b[i] -= f * b[c];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Log heights for ordering candidates.
fn height(e: &EtaleAlgebra, u: &AlgebraElement, cols: &[LogColumn], roots: &[Vec<Complex64>], fin: &[FinitePlace]) -> f64 {
    float_log_row(e, u, cols, roots, fin).iter().map(|x| x.abs()).sum()
}

/// Builds a system of the full S-unit rank from box candidates: independent
/// candidates are picked by increasing height, then the lattice is enlarged
/// to contain every candidate.
pub fn unit_system_from_candidates(
    e: &EtaleAlgebra,
    torsion: &TorsionUnit,
    candidates: &[AlgebraElement],
    s_primes: &[u64],
    precision_cap: u32,
) -> Result<UnitSystem> {
    let fin = finite_places(e, s_primes)?;
    let cols = columns(e, &fin)?;
    let roots: Vec<Vec<Complex64>> = e.factors().iter().map(approx_roots).collect::<Result<_>>()?;
    let mut cands: Vec<(f64, AlgebraElement)> = candidates
        .iter()
        .map(|c| (height(e, c, &cols, &roots, &fin), c.clone()))
        .filter(|(h, _)| *h > 1e-9)
        .collect();
    cands.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal).then_with(|| lex_cmp(&b.1.coords, &a.1.coords)));
    let mut gens: Vec<AlgebraElement> = Vec::new();
    let mut grows: Vec<Vec<f64>> = Vec::new();
    for (_, c) in &cands {
        let row = float_log_row(e, c, &cols, &roots, &fin);
        let mut trial = grows.clone();
        trial.push(row.clone());
        if float_rank(&trial) == trial.len() && certify_independence(e, &[gens.clone(), vec![c.clone()]].concat(), s_primes, precision_cap)?.is_some() {
            gens.push(c.clone());
            grows = trial;
        }
    }
    // saturate: rational coordinates of every candidate in terms of gens
    let r = gens.len();
    let mut elems = gens.clone();
    let mut coeff_rows: Vec<Vec<BigRat>> = (0..r)
        .map(|i| (0..r).map(|j| if i == j { BigRat::one() } else { BigRat::zero() }).collect())
        .collect();
    for (_, c) in &cands {
        let Some(x) = float_coeffs(e, &gens, c, &cols, &roots, &fin) else { continue };
        let Some(q) = rationalize(&x, 12) else { continue };
        if q.iter().all(|v| v.is_integer()) {
            continue;
        }
        // confirm c^D = ζ·Π gens^(D·q)
        let d = q.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
        let dq: Vec<i64> = q.iter().map(|v| (v * int(d.clone())).numer().to_i64().unwrap()).collect();
        let mut all = gens.clone();
        all.push(c.clone());
        let mut ex: Vec<i64> = dq.iter().map(|k| -k).collect();
        ex.push(d.to_i64().unwrap());
        if is_torsion_product(e, &all, &ex, torsion.order)? {
            elems.push(c.clone());
            coeff_rows.push(q);
        }
    }
    let free = if elems.len() > r {
        let d = coeff_rows.iter().flatten().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
        let m: IntMat = coeff_rows.iter().map(|row| row.iter().map(|v| (v * int(d.clone())).numer().clone()).collect()).collect();
        let (h, u) = hnf_with_transform(&m);
        let mut out = Vec::new();
        for (hrow, urow) in h.iter().zip(&u) {
            if hrow.iter().all(|x| x.is_zero()) {
                continue;
            }
            let exps: Vec<i64> = urow.iter().map(|x| x.to_i64().expect("small transform")).collect();
            out.push(e.product(&elems, &exps)?);
        }
        out
    } else {
        gens
    };
    let tors = torsion_elements(e, torsion)?;
    let mut free: Vec<AlgebraElement> = free.iter().map(|u| canonical_generator(e, u, &tors)).collect::<Result<_>>()?;
    free.sort_by(|a, b| lex_cmp(&a.coords, &b.coords));
    Ok(UnitSystem { torsion: torsion.clone(), free, s_primes: s_primes.to_vec() })
}

fn float_rank(rows: &[Vec<f64>]) -> usize {
    let mut a = rows.to_vec();
    let m = a.len();
    let n = a.first().map_or(0, |r| r.len());
    let scale = a.iter().flatten().fold(1e-300f64, |s, x| s.max(x.abs()));
    let mut rank = 0;
    for c in 0..n {
        if rank == m {
            break;
        }
        let p = (rank..m).max_by(|&x, &y| a[x][c].abs().partial_cmp(&a[y][c].abs()).unwrap()).unwrap();
        if a[p][c].abs() < 1e-8 * scale {
            continue;
        }
        a.swap(rank, p);
        for i in rank + 1..m {
            let f = a[i][c] / a[rank][c];
            for j in c..n {
                a[i][j] -= f * a[rank][j];
            }
        }
        rank += 1;
    }
    rank
}

/// Nearest rationals with denominator ≤ `max_den`, if all are within 1e-7.
fn rationalize(x: &[f64], max_den: i64) -> Option<Vec<BigRat>> {
    x.iter()
        .map(|&v| {
            (1..=max_den).find_map(|d| {
                let n = (v * d as f64).round();
                ((v * d as f64 - n).abs() < 1e-7 * d as f64).then(|| BigRat::new(BigInt::from(n as i64), BigInt::from(d)))
            })
        })
        .collect()
}

/// Searches a box, finds torsion and assembles a certified system.
pub fn search_unit_system(
    e: &EtaleAlgebra,
    bound: u32,
    s_primes: &[u64],
    budget: u128,
    precision_cap: u32,
) -> Result<UnitSystem> {
    let torsion = torsion_units(e, budget)?;
    let targets = if s_primes.is_empty() {
        vec![BigInt::one(), -BigInt::one()]
    } else {
        s_unit_norm_targets(s_primes, 2)
    };
    let cands = search_units(e, bound, &targets, budget)?;
    unit_system_from_candidates(e, &torsion, &cands, s_primes, precision_cap)
}

/// Generators of the kernel of the norm on the group generated by `sys`.
pub fn norm_one_subgroup(e: &EtaleAlgebra, sys: &UnitSystem) -> Result<UnitSystem> {
    let r = sys.free.len();
    let t_norm = e.norm(&sys.torsion.element);
    // a torsion element of norm −1 absorbs signs
    let sign_free = t_norm == rat(-1);
    let primes = &sys.s_primes;
    let mut rows: IntMat = Vec::new();
    for u in &sys.free {
        let nm = e.norm(u);
        let mut row: Vec<BigInt> = primes
            .iter()
            .map(|&p| BigInt::from(valuation(nm.numer().clone(), p) as i64 - valuation(nm.denom().clone(), p) as i64))
            .collect();
        row.push(BigInt::from(i64::from(nm.is_negative())));
        rows.push(row);
    }
    let width = primes.len() + 1;
    let mut slack = vec![BigInt::zero(); width];
    slack[width - 1] = BigInt::from(if sign_free { 1 } else { 2 });
    rows.push(slack);
    let kernel = left_kernel(&rows);
    let proj: IntMat = kernel.iter().map(|k| k[..r].to_vec()).collect();
    let basis = lattice_basis(&proj);
    let tors_norm_one = if t_norm.is_one() {
        sys.torsion.clone()
    } else {
        let order = sys.torsion.order / sys.torsion.order.gcd(&2);
        TorsionUnit { element: e.pow(&sys.torsion.element, 2)?, order }
    };
    let tors = torsion_elements(e, &sys.torsion)?;
    let mut free = Vec::new();
    for row in &basis {
        let exps: Vec<i64> = row.iter().map(|x| x.to_i64().expect("small exponent")).collect();
        let mut u = e.product(&sys.free, &exps)?;
        if e.norm(&u) != BigRat::one() {
            u = e.mul(&u, &sys.torsion.element);
        }
        debug_assert_eq!(e.norm(&u), BigRat::one());
        // among torsion multiples and inverses keep one of norm 1
        let tors1: Vec<AlgebraElement> = tors.iter().filter(|z| e.norm(z).is_one()).cloned().collect();
        free.push(canonical_generator(e, &u, &tors1)?);
    }
    free.sort_by(|a, b| lex_cmp(&a.coords, &b.coords));
    Ok(UnitSystem { torsion: tors_norm_one, free, s_primes: sys.s_primes.clone() })
}

pub fn is_s_integral_element(e: &EtaleAlgebra, u: &AlgebraElement, primes: &[u64]) -> bool {
    e.regular_rep(u).entries().iter().all(|x| is_s_integral(x, primes))
}
