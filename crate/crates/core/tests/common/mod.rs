//! Property bodies and oracles shared by the property suite and the
//! acceptance run.

#![allow(dead_code)]

use cma_core::arith::fp::{factor_z_mod_p, is_squarefree_mod_p, small_primes, FpPoly};
use cma_core::arith::rational::{frac, int, rat, BigRat};
use cma_core::arith::{QPoly, ZPoly};
use cma_core::etale::{AlgebraElement, EtaleAlgebra};
use cma_core::galois::{places_over_p, signature, Place};
use cma_core::linalg::MatQ;
use cma_core::torus::{is_s_ample, replay_certificate, Ambient, PlaceSet, TorusDatum};
use cma_core::units::{
    algebra_dirichlet_rank, reduce_against, search_unit_system, search_units, DEFAULT_BUDGET,
};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

pub type Check = std::result::Result<(), TestCaseError>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(TestCaseError::fail(format!($($fmt)+)));
        }
    };
}

fn zp(c: &[i64]) -> ZPoly {
    ZPoly::from_i64s(c)
}

/// Algebras exercised by the representation properties.
pub fn test_algebras() -> Vec<EtaleAlgebra> {
    let cubic_basis = MatQ::from_i64(&[&[1, 0, 0], &[0, 1, 1], &[0, 0, 1]]);
    vec![
        EtaleAlgebra::power_basis(vec![zp(&[1, 0, 1])]).unwrap(),
        EtaleAlgebra::power_basis(vec![zp(&[-2, 0, 1])]).unwrap(),
        EtaleAlgebra::power_basis(vec![zp(&[-1, 1, 0, 1])]).unwrap(),
        EtaleAlgebra::new(vec![zp(&[-1, 1, 0, 1])], cubic_basis).unwrap(),
        EtaleAlgebra::power_basis(vec![zp(&[1, -16, 20, -8, 1])]).unwrap(),
        EtaleAlgebra::power_basis(vec![zp(&[-2, 0, 0, 0, 1])]).unwrap(),
        EtaleAlgebra::power_basis(vec![zp(&[1, 0, 1]), zp(&[-2, 0, 1])]).unwrap(),
        EtaleAlgebra::power_basis(vec![zp(&[0, 1]), zp(&[1, 0, 1])]).unwrap(),
        EtaleAlgebra::new(vec![zp(&[1, 0, 1])], MatQ::diag(&[rat(1), rat(2)])).unwrap(),
    ]
}

/// Single fields with known structure, used by torus properties.
pub fn test_fields() -> Vec<ZPoly> {
    vec![
        zp(&[1, 0, 1]),
        zp(&[-2, 0, 1]),
        zp(&[1, 1, 1]),
        zp(&[-1, 1, 0, 1]),
        zp(&[-2, 0, 0, 1]),
        zp(&[1, -3, 0, 1]),
        zp(&[1, -16, 20, -8, 1]),
        zp(&[-2, 0, 0, 0, 1]),
        zp(&[1, 1, 1, 1, 1]),
        zp(&[1, 1, 0, 0, 1]),
        zp(&[12, 8, 0, 0, 1]),
    ]
}

pub fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(
        Config { cases, failure_persistence: None, ..Config::default() },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    )
}

// ---------------------------------------------------------------- strategies

pub fn small_poly(max_deg: usize) -> impl Strategy<Value = ZPoly> {
    (1..=max_deg).prop_flat_map(|d| proptest::collection::vec(-9i64..=9, d + 1)).prop_filter_map(
        "leading coefficient",
        |c| {
            let p = zp(&c);
            (!c.last().unwrap().is_zero()).then_some(p)
        },
    )
}

pub fn monic_poly(max_deg: usize) -> impl Strategy<Value = ZPoly> {
    (1..=max_deg).prop_flat_map(|d| proptest::collection::vec(-9i64..=9, d)).prop_map(|mut c| {
        c.push(1);
        zp(&c)
    })
}

// ---------------------------------------------------------------- oracles

/// Sylvester matrix determinant.
pub fn sylvester_resultant(f: &ZPoly, g: &ZPoly) -> BigRat {
    let m = f.degree().unwrap();
    let n = g.degree().unwrap();
    let size = m + n;
    if size == 0 {
        return BigRat::one();
    }
    let mut rows = vec![vec![BigRat::zero(); size]; size];
    for i in 0..n {
        for k in 0..=m {
            rows[i][i + k] = int(f.coeff(m - k));
        }
    }
    for i in 0..m {
        for k in 0..=n {
            rows[n + i][i + k] = int(g.coeff(n - k));
        }
    }
    MatQ::from_rows(rows).unwrap().det()
}

fn sign_variations(coeffs: &[BigRat]) -> usize {
    let signs: Vec<bool> = coeffs.iter().filter(|c| !c.is_zero()).map(|c| c.is_positive()).collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Descartes sign-variation count on the open interval (a, b).
fn descartes(f: &QPoly, a: &BigRat, b: &BigRat) -> usize {
    let n = f.degree().unwrap();
    // (1+t)^n f((a + b t)/(1 + t))
    let num = QPoly::new(vec![a.clone(), b.clone()]);
    let den = QPoly::new(vec![BigRat::one(), BigRat::one()]);
    let mut g = QPoly::zero();
    for k in 0..=n {
        g = g + num.pow(k as u32) * den.pow((n - k) as u32) * QPoly::constant(f.coeff(k));
    }
    sign_variations(g.coeffs())
}

/// Real roots of a squarefree polynomial by bisection with Descartes' rule.
pub fn bisection_root_count(f: &QPoly) -> usize {
    let lc = f.lc().abs();
    let bound = f.coeffs().iter().map(|c| c.abs() / &lc).max().unwrap() + rat(1);
    fn go(f: &QPoly, a: BigRat, b: BigRat, depth: u32) -> usize {
        let v = descartes(f, &a, &b);
        if v <= 1 {
            return v;
        }
        assert!(depth < 200, "bisection did not separate the roots");
        let m = (&a + &b) / rat(2);
        let at = usize::from(f.eval(&m).is_zero());
        at + go(f, a, m.clone(), depth + 1) + go(f, m, b, depth + 1)
    }
    go(f, -bound.clone(), bound, 0)
}

/// Irreducible over F_p: no monic divisor of degree 1..=deg/2.
pub fn brute_force_irreducible(g: &FpPoly) -> bool {
    let p = g.modulus();
    let d = g.degree().unwrap();
    for k in 1..=d / 2 {
        let count = p.pow(k as u32);
        for idx in 0..count {
            let mut c = Vec::with_capacity(k + 1);
            let mut r = idx;
            for _ in 0..k {
                c.push(r % p);
                r /= p;
            }
            c.push(1);
            if g.rem(&FpPoly::new(p, c)).is_zero() {
                return false;
            }
        }
    }
    true
}

// ---------------------------------------------------------------- properties

pub fn prop_gcd((f, g, h): (ZPoly, ZPoly, ZPoly)) -> Check {
    let (fq, gq, hq) = (f.to_q(), g.to_q(), h.to_q());
    let d = QPoly::gcd(&(fq.clone() * hq.clone()), &(gq.clone() * hq.clone()));
    ensure!(d.rem(&hq.monic()).unwrap().is_zero(), "gcd {d} not divisible by {h}");
    ensure!((fq.clone() * hq.clone()).rem(&d).unwrap().is_zero(), "gcd does not divide f·h");
    if !ZPoly::resultant(&f, &g).unwrap().is_zero() {
        ensure!(d == hq.monic(), "coprime f, g but gcd {d} != monic({h})");
    }
    Ok(())
}

pub fn prop_discriminant_mod_p(f: ZPoly) -> Check {
    let disc = f.discriminant().unwrap();
    for p in small_primes(100) {
        let divides = (&disc % BigInt::from(p)).is_zero();
        let repeated = !is_squarefree_mod_p(&f, p).unwrap();
        ensure!(divides == repeated, "{f} mod {p}: disc divisible {divides}, repeated factor {repeated}");
        let fac = factor_z_mod_p(&f, p).unwrap();
        ensure!(fac.iter().any(|(_, e)| *e > 1) == repeated, "{f} mod {p}: factorization disagrees");
    }
    Ok(())
}

pub fn prop_sturm(f: ZPoly) -> Check {
    let sf = f.to_q().squarefree_part().unwrap();
    if sf.degree() == Some(0) {
        return Ok(());
    }
    let sturm = sf.count_real_roots().unwrap();
    let oracle = bisection_root_count(&sf);
    ensure!(sturm == oracle, "{sf}: Sturm {sturm}, bisection {oracle}");
    Ok(())
}

pub fn prop_factor((f, p): (ZPoly, u64)) -> Check {
    let fac = factor_z_mod_p(&f, p).unwrap();
    let mut prod = FpPoly::one(p);
    for (g, e) in &fac {
        ensure!(g.lc() == 1, "factor not monic");
        ensure!(brute_force_irreducible(g), "factor {} is reducible mod {p}", g.to_z());
        for _ in 0..*e {
            prod = prod.mul(g);
        }
    }
    ensure!(prod == FpPoly::from_z(&f, p).monic(), "{f} mod {p}: product mismatch");
    Ok(())
}

pub fn prop_resultant((f, g): (ZPoly, ZPoly)) -> Check {
    let r = ZPoly::resultant(&f, &g).unwrap();
    let s = sylvester_resultant(&f, &g);
    ensure!(int(r.clone()) == s, "resultant {r} vs Sylvester {s}");
    Ok(())
}

fn element(e: &EtaleAlgebra, c: &[i64]) -> AlgebraElement {
    AlgebraElement::new(c.iter().take(e.degree()).map(|&x| frac(x, 1 + (x.abs() % 3))).collect())
}

pub fn prop_ring_hom((k, a, b): (usize, Vec<i64>, Vec<i64>)) -> Check {
    let algs = test_algebras();
    let e = &algs[k % algs.len()];
    let (a, b) = (element(e, &a), element(e, &b));
    let (pa, pb) = (e.regular_rep(&a), e.regular_rep(&b));
    ensure!(e.regular_rep(&e.mul(&a, &b)) == pa.mul(&pb), "π(ab) != π(a)π(b)");
    ensure!(e.regular_rep(&e.add(&a, &b)) == pa.add(&pb), "π(a+b) != π(a)+π(b)");
    Ok(())
}

pub fn prop_norm((k, a, b): (usize, Vec<i64>, Vec<i64>)) -> Check {
    let algs = test_algebras();
    let e = &algs[k % algs.len()];
    let (a, b) = (element(e, &a), element(e, &b));
    ensure!(e.norm(&e.mul(&a, &b)) == e.norm(&a) * e.norm(&b), "norm not multiplicative");
    ensure!(e.trace(&e.add(&a, &b)) == e.trace(&a) + e.trace(&b), "trace not additive");
    Ok(())
}

fn unramified_place(f: &[ZPoly], pick: usize) -> Place {
    let good: Vec<u64> = small_primes(60)
        .into_iter()
        .filter(|&p| f.iter().all(|g| !(g.discriminant().unwrap() % BigInt::from(p)).is_zero()))
        .collect();
    if pick % 4 == 0 {
        Place::Infinity
    } else {
        Place::Prime(good[pick % good.len()])
    }
}

pub fn prop_rank_monotone((k, amb, pick): (usize, bool, usize)) -> Check {
    let fields = test_fields();
    let f = fields[k % fields.len()].clone();
    let ambient = if amb { Ambient::SL } else { Ambient::GL };
    let t = TorusDatum::build(&EtaleAlgebra::power_basis(vec![f.clone()]).unwrap(), ambient).unwrap();
    let v = unramified_place(&[f], pick);
    let local = t.local_rank(v).unwrap();
    ensure!(t.global_rank() <= local, "global {} > local {local} at {v}", t.global_rank());
    Ok(())
}

/// Module invariants against a count of places from factorization or
/// signature.
pub fn prop_two_path((k, amb, pick): (usize, bool, usize)) -> Check {
    let fields = test_fields();
    let f = fields[k % fields.len()].clone();
    let ambient = if amb { Ambient::SL } else { Ambient::GL };
    let t = TorusDatum::build(&EtaleAlgebra::power_basis(vec![f.clone()]).unwrap(), ambient).unwrap();
    let v = unramified_place(&[f.clone()], pick);
    let places = match v {
        Place::Infinity => {
            let s = signature(&f).unwrap();
            s.r1 + s.r2
        }
        Place::Prime(p) => places_over_p(&f, p).unwrap(),
    };
    let expect = places + ambient.center_rank() - 1;
    let got = t.local_rank(v).unwrap();
    ensure!(got == expect, "{f} {ambient} at {v}: module says {got}, places give {expect}");
    Ok(())
}

pub fn prop_replay((k, amb, picks): (usize, bool, Vec<usize>)) -> Check {
    let fields = test_fields();
    let f = fields[k % fields.len()].clone();
    let ambient = if amb { Ambient::SL } else { Ambient::GL };
    let t = TorusDatum::build(&EtaleAlgebra::power_basis(vec![f.clone()]).unwrap(), ambient).unwrap();
    let mut primes: Vec<u64> = picks
        .iter()
        .filter_map(|&p| match unramified_place(&[f.clone()], p | 1) {
            Place::Prime(q) => Some(q),
            Place::Infinity => None,
        })
        .collect();
    primes.sort_unstable();
    primes.dedup();
    let cert = is_s_ample(&t, &PlaceSet::with_primes(&primes)).unwrap();
    let replayed = replay_certificate(&cert).unwrap();
    ensure!(replayed == cert.verdict, "replay {replayed} vs {}", cert.verdict);
    Ok(())
}

/// Quadratic orders Z[√d] whose fundamental unit fits in the box.
pub const QUADRATIC_D: [i64; 18] = [2, 3, 5, 6, 7, 10, 11, 15, 17, 26, 30, -1, -2, -3, -5, -6, -7, -11];
pub const QUADRATIC_BOX: u32 = 12;

/// Found rank equals the Dirichlet rank and nothing else in the box is
/// independent of the found system.
pub fn prop_dirichlet(k: usize) -> Check {
    let d = QUADRATIC_D[k % QUADRATIC_D.len()];
    let e = EtaleAlgebra::power_basis(vec![zp(&[-d, 0, 1])]).unwrap();
    let sys = search_unit_system(&e, QUADRATIC_BOX, &[], DEFAULT_BUDGET, 256).unwrap();
    let rank = algebra_dirichlet_rank(&e, &[]).unwrap();
    ensure!(sys.free.len() == rank, "x^2-{d}: found {} units, Dirichlet rank {rank}", sys.free.len());
    let all = search_units(&e, QUADRATIC_BOX, &[BigInt::one(), -BigInt::one()], DEFAULT_BUDGET).unwrap();
    for u in &all {
        let r = reduce_against(&e, &sys.free, &sys.torsion, &[], u).unwrap();
        ensure!(r.is_some(), "x^2-{d}: {:?} is independent of the found system", u.to_strings());
    }
    Ok(())
}

// ---------------------------------------------------------------- battery

pub struct Tally {
    pub name: &'static str,
    pub cases: u32,
    pub result: std::result::Result<(), String>,
}

fn run<S: Strategy>(name: &'static str, cases: u32, s: S, f: impl Fn(S::Value) -> Check) -> Tally
where
    S::Value: std::fmt::Debug,
{
    let res = runner(cases).run(&s, f).map_err(|e| e.to_string());
    Tally { name, cases, result: res }
}

/// Deterministic run of every randomized property; at least 500 cases total.
pub fn battery() -> Vec<Tally> {
    let elem = || proptest::collection::vec(-20i64..=20, 4);
    vec![
        run("gcd", 60, (small_poly(4), small_poly(4), small_poly(3)), prop_gcd),
        run("discriminant-mod-p", 60, monic_poly(5), prop_discriminant_mod_p),
        run("sturm-vs-bisection", 200, small_poly(6), prop_sturm),
        run(
            "factor-remultiply",
            60,
            (monic_poly(5), proptest::sample::select(vec![2u64, 3, 5, 7, 11, 13])),
            prop_factor,
        ),
        run("resultant-sylvester", 40, (small_poly(4), small_poly(4)), prop_resultant),
        run("ring-homomorphism", 60, (0usize..100, elem(), elem()), prop_ring_hom),
        run("norm-multiplicative", 60, (0usize..100, elem(), elem()), prop_norm),
        run("rank-monotone", 40, (0usize..100, any::<bool>(), 0usize..100), prop_rank_monotone),
        run("local-rank-two-path", 40, (0usize..100, any::<bool>(), 0usize..100), prop_two_path),
        run(
            "certificate-replay",
            40,
            (0usize..100, any::<bool>(), proptest::collection::vec(0usize..100, 0..3)),
            prop_replay,
        ),
        run("dirichlet-rank", 18, 0usize..100, prop_dirichlet),
    ]
}
