//! Matrix groups built from a torus: automorphism matrices, block embeddings
//! with unipotent radicals and exact relation checks.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::interval::approx_roots;
use crate::arith::poly::{QPoly, ZPoly};
use crate::arith::rational::{int, is_s_unit_rational, rat, to_f64, BigRat};
use crate::error::{Error, Result};
use crate::etale::{AlgebraElement, EtaleAlgebra};
use crate::linalg::lattice::{lattice_basis, transpose, IntMat};
use crate::linalg::MatQ;
use crate::torus::Ambient;

pub const DEFAULT_AUTOMORPHISM_BOX: i64 = 50;
pub const DEFAULT_CONJUGATOR_BOX: i64 = 20;

/// Images of the order basis under a ring automorphism.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutomorphismDatum {
    pub images: Vec<AlgebraElement>,
}

impl AutomorphismDatum {
    pub fn identity(e: &EtaleAlgebra) -> Self {
        let n = e.degree();
        let images = (0..n)
            .map(|j| AlgebraElement::new((0..n).map(|i| if i == j { BigRat::one() } else { BigRat::zero() }).collect()))
            .collect();
        Self { images }
    }

    /// The automorphism of a field sending the generator x to r(x).
    pub fn from_generator_image(e: &EtaleAlgebra, r: &QPoly) -> Result<Self> {
        if e.num_factors() != 1 {
            return Err(Error::Unsupported("generator images need a single field".into()));
        }
        let f = e.factors()[0].to_q();
        let n = e.degree();
        let images = (0..n)
            .map(|j| {
                let mut unit = vec![BigRat::zero(); n];
                unit[j] = BigRat::one();
                let b = QPoly::new(e.to_power(&AlgebraElement::new(unit)));
                let img = b.compose(r).rem(&f)?;
                let mut c = img.coeffs().to_vec();
                c.resize(n, BigRat::zero());
                Ok(e.from_power(&c))
            })
            .collect::<Result<_>>()?;
        Ok(Self { images })
    }

    fn apply(&self, e: &EtaleAlgebra, a: &AlgebraElement) -> AlgebraElement {
        a.coords
            .iter()
            .zip(&self.images)
            .fold(e.zero(), |acc, (c, img)| e.add(&acc, &e.scale(img, c)))
    }

    /// Checks multiplicativity on basis products, unit preservation and
    /// invertibility over the order.
    pub fn verify(&self, e: &EtaleAlgebra) -> Result<()> {
        let n = e.degree();
        if self.images.len() != n || self.images.iter().any(|a| a.coords.len() != n) {
            return Err(Error::NotAutomorphism(format!("expected {n} images of length {n}")));
        }
        if self.apply(e, &e.one()) != e.one() {
            return Err(Error::NotAutomorphism("1 is not fixed".into()));
        }
        let basis: Vec<AlgebraElement> = AutomorphismDatum::identity(e).images;
        for i in 0..n {
            for j in i..n {
                let lhs = self.apply(e, &e.mul(&basis[i], &basis[j]));
                let rhs = e.mul(&self.images[i], &self.images[j]);
                if lhs != rhs {
                    return Err(Error::NotAutomorphism(format!(
                        "not multiplicative on basis elements {} and {}",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        let m = self.raw_matrix();
        if !m.is_integral() {
            return Err(Error::NotAutomorphism("does not preserve the order".into()));
        }
        match m.inverse() {
            Ok(inv) if inv.is_integral() => Ok(()),
            Ok(_) => Err(Error::NotAutomorphism("inverse does not preserve the order".into())),
            Err(_) => Err(Error::NotAutomorphism("not invertible".into())),
        }
    }

    fn raw_matrix(&self) -> MatQ {
        MatQ::from_cols(&self.images.iter().map(|a| a.coords.clone()).collect::<Vec<_>>())
            .expect("square image list")
    }

    /// σ∘τ.
    pub fn compose(&self, e: &EtaleAlgebra, tau: &Self) -> Self {
        Self { images: tau.images.iter().map(|t| self.apply(e, t)).collect() }
    }
}

/// Matrix of σ in the order basis; column j holds σ(b_j).
pub fn automorphism_matrix(e: &EtaleAlgebra, sigma: &AutomorphismDatum) -> Result<MatQ> {
    sigma.verify(e)?;
    Ok(sigma.raw_matrix())
}

fn eval_c(p: &[f64], z: Complex64) -> Complex64 {
    p.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
}

fn solve_complex(mut a: Vec<Vec<Complex64>>, mut b: Vec<Complex64>) -> Option<Vec<Complex64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| a[x][c].norm().partial_cmp(&a[y][c].norm()).unwrap())?;
        if a[p][c].norm() < 1e-300 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for i in 0..n {
            if i != c {
                let f = a[i][c] / a[c][c];
                let rc = a[c].clone();
                for (x, y) in a[i].iter_mut().zip(rc) {
                    *x -= f * y;
                }
                let bc = b[c];
                b[i] -= f * bc;
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

/// Automorphisms of a field of degree ≤ 4 that preserve the order, found by
/// interpolating every permutation of the roots, rounding and checking
/// exactly. Automorphisms whose image of x has an order coordinate beyond
/// `bound` are skipped.
pub fn enumerate_automorphisms(e: &EtaleAlgebra, bound: i64) -> Result<Vec<AutomorphismDatum>> {
    if e.num_factors() != 1 {
        return Err(Error::Unsupported("automorphism enumeration for several factors".into()));
    }
    let n = e.degree();
    if n > 4 {
        return Err(Error::Unsupported(format!("automorphism enumeration in degree {n}")));
    }
    let f = &e.factors()[0];
    let d = f.discriminant()?.abs();
    let df = d.to_f64().unwrap_or(f64::INFINITY);
    let roots = approx_roots(f)?;
    let vand: Vec<Vec<Complex64>> = roots.iter().map(|z| (0..n).map(|k| z.powu(k as u32)).collect()).collect();
    let fq = f.to_q();
    let mut found: Vec<(Vec<BigRat>, AutomorphismDatum)> = Vec::new();
    for perm in permutations(n) {
        let rhs: Vec<Complex64> = perm.iter().map(|&k| roots[k]).collect();
        let Some(c) = solve_complex(vand.clone(), rhs) else { continue };
        if c.iter().any(|z| z.im.abs() > 1e-6 * (1.0 + z.norm())) {
            continue;
        }
        // coefficients of σ(x) lie in (1/disc)·Z
        let scaled: Vec<f64> = c.iter().map(|z| z.re * df).collect();
        if scaled.iter().any(|s| (s - s.round()).abs() > 1e-4 || !s.is_finite()) {
            continue;
        }
        let r = QPoly::new(
            scaled.iter().map(|s| BigRat::new(BigInt::from(s.round() as i64), d.clone())).collect(),
        );
        if !fq.compose(&r).rem(&fq)?.is_zero() {
            continue;
        }
        let sigma = AutomorphismDatum::from_generator_image(e, &r)?;
        if sigma.verify(e).is_err() {
            continue;
        }
        let mut rc = r.coeffs().to_vec();
        rc.resize(n, BigRat::zero());
        let too_big = e.from_power(&rc).coords.iter().any(|x| x.abs() > rat(bound));
        if too_big || found.iter().any(|(_, s)| *s == sigma) {
            continue;
        }
        let check: Vec<f64> = r.coeffs().iter().map(to_f64).collect();
        debug_assert!((eval_c(&check, roots[0]) - roots[perm[0]]).norm() < 1e-6);
        found.push((r.coeffs().to_vec(), sigma));
    }
    let id = AutomorphismDatum::identity(e);
    found.sort_by(|a, b| {
        (b.1 == id).cmp(&(a.1 == id)).then_with(|| {
            let ka: Vec<&BigRat> = a.1.images.iter().flat_map(|x| &x.coords).collect();
            let kb: Vec<&BigRat> = b.1.images.iter().flat_map(|x| &x.coords).collect();
            ka.cmp(&kb)
        })
    });
    Ok(found.into_iter().map(|(_, s)| s).collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizationCheck {
    pub normalizes: bool,
    /// 1-based index of the first basis element whose conjugate leaves the algebra.
    pub failing_index: Option<usize>,
    pub automorphism: Option<AutomorphismDatum>,
}

/// Checks g·π(b_j)·g⁻¹ = π(σ(b_j)) for the automorphism σ the conjugates
/// define.
pub fn verify_normalization(e: &EtaleAlgebra, g: &MatQ) -> Result<NormalizationCheck> {
    let n = e.degree();
    if g.rows() != n || g.cols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: g.rows() });
    }
    let inv = g.inverse()?;
    let mut images = Vec::new();
    for j in 0..n {
        let c = g.mul(e.basis_rep(j)).mul(&inv);
        match e.element_of_matrix(&c) {
            Some(a) if e.regular_rep(&a) == c => images.push(a),
            _ => return Ok(NormalizationCheck { normalizes: false, failing_index: Some(j + 1), automorphism: None }),
        }
    }
    Ok(NormalizationCheck { normalizes: true, failing_index: None, automorphism: Some(AutomorphismDatum { images }) })
}

/// Basis of the unital Q-algebra generated by the given square matrices.
pub fn algebra_span(gens: &[MatQ], n: usize) -> Vec<MatQ> {
    let mut basis: Vec<MatQ> = Vec::new();
    let mut queue = vec![MatQ::identity(n)];
    queue.extend(gens.iter().cloned());
    while let Some(m) = queue.pop() {
        if in_span(&basis, &m).is_some() {
            continue;
        }
        basis.push(m.clone());
        for g in gens {
            queue.push(m.mul(g));
        }
    }
    basis
}

fn in_span(basis: &[MatQ], m: &MatQ) -> Option<Vec<BigRat>> {
    if basis.is_empty() {
        return m.is_zero().then(Vec::new);
    }
    let cols: Vec<Vec<BigRat>> = basis.iter().map(|b| b.entries().to_vec()).collect();
    let a = MatQ::from_cols(&cols).ok()?;
    let x = a.solve(m.entries())?;
    (a.mul_vec(&x) == m.entries()).then_some(x)
}

/// Same check against the algebra spanned by explicit matrices; used for
/// imported generators whose basis convention is unknown.
pub fn verify_normalization_of_span(algebra: &[MatQ], g: &MatQ) -> Result<NormalizationCheck> {
    let inv = g.inverse()?;
    for (j, b) in algebra.iter().enumerate() {
        if in_span(algebra, &g.mul(b).mul(&inv)).is_none() {
            return Ok(NormalizationCheck { normalizes: false, failing_index: Some(j + 1), automorphism: None });
        }
    }
    Ok(NormalizationCheck { normalizes: true, failing_index: None, automorphism: None })
}

pub fn block_embed(g: &MatQ, n: usize) -> Result<MatQ> {
    g.block_embed(n)
}

/// Identity plus a 1 at (i, j), 1-based.
pub fn elementary_matrix(n: usize, i: usize, j: usize) -> Result<MatQ> {
    if i == j || i == 0 || j == 0 || i > n || j > n {
        return Err(Error::InvalidInput(format!("no elementary matrix E_{{{i},{j}}} in size {n}")));
    }
    let mut m = MatQ::identity(n);
    m[(i - 1, j - 1)] = BigRat::one();
    Ok(m)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemidirectCheck {
    pub holds: bool,
    /// (torus index, unipotent index) of the first bad conjugate.
    pub offending: Option<(usize, usize)>,
}

fn unipotent_pattern(unip: &[MatQ]) -> Vec<(usize, usize)> {
    let mut pos = Vec::new();
    for u in unip {
        let n = u.rows();
        for i in 0..n {
            for j in 0..n {
                let expect = if i == j { BigRat::one() } else { BigRat::zero() };
                if u[(i, j)] != expect && !pos.contains(&(i, j)) {
                    pos.push((i, j));
                }
            }
        }
    }
    pos
}

fn is_unipotent(m: &MatQ) -> bool {
    let n = m.rows();
    let target = (0..n).fold(QPoly::new(vec![BigRat::one()]), |acc, _| acc * QPoly::new(vec![rat(-1), rat(1)]));
    m.charpoly() == target
}

/// Each t·u·t⁻¹ must be unipotent and supported, off the diagonal, on the
/// positions the unipotent generators occupy.
pub fn verify_semidirect(torus: &[MatQ], unip: &[MatQ]) -> Result<SemidirectCheck> {
    let pattern = unipotent_pattern(unip);
    for (ti, t) in torus.iter().enumerate() {
        let inv = t.inverse()?;
        for (ui, u) in unip.iter().enumerate() {
            let c = t.mul(u).mul(&inv);
            let n = c.rows();
            let in_pattern = (0..n).all(|i| {
                (0..n).all(|j| {
                    let expect = if i == j { BigRat::one() } else { BigRat::zero() };
                    c[(i, j)] == expect || (i != j && pattern.contains(&(i, j)))
                })
            });
            if !in_pattern || !is_unipotent(&c) {
                return Ok(SemidirectCheck { holds: false, offending: Some((ti, ui)) });
            }
        }
    }
    Ok(SemidirectCheck { holds: true, offending: None })
}

/// Z or Z[1/S].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ring {
    pub primes: Vec<u64>,
}

impl Ring {
    pub fn integers() -> Self {
        Self { primes: vec![] }
    }

    pub fn localized(primes: &[u64]) -> Self {
        let mut p = primes.to_vec();
        p.sort();
        p.dedup();
        Self { primes: p }
    }
}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.primes.is_empty() {
            return write!(f, "Z");
        }
        let inv: Vec<String> = self.primes.iter().map(|p| format!("1/{p}")).collect();
        write!(f, "Z[{}]", inv.join(","))
    }
}

impl FromStr for Ring {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "Z" {
            return Ok(Self::integers());
        }
        let inner = s
            .strip_prefix("Z[")
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| Error::InvalidInput(format!("ring must be Z or Z[1/p,...], got {s:?}")))?;
        let primes = inner
            .split(',')
            .map(|t| {
                t.trim()
                    .strip_prefix("1/")
                    .and_then(|p| p.parse::<u64>().ok())
                    .filter(|&p| crate::arith::is_prime(p))
                    .ok_or_else(|| Error::InvalidInput(format!("bad localization {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::localized(&primes))
    }
}

impl Serialize for Ring {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Ring {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSet {
    pub ring: Ring,
    pub ambient: Ambient,
    pub n: usize,
    #[serde(default)]
    pub torus: Vec<MatQ>,
    #[serde(default)]
    pub torsion: Vec<MatQ>,
    #[serde(default)]
    pub normalizer: Vec<MatQ>,
    #[serde(default)]
    pub unipotent: Vec<MatQ>,
    #[serde(default)]
    pub provenance: BTreeMap<String, String>,
}

impl GeneratorSet {
    pub fn new(ring: Ring, ambient: Ambient, n: usize) -> Self {
        Self {
            ring,
            ambient,
            n,
            torus: vec![],
            torsion: vec![],
            normalizer: vec![],
            unipotent: vec![],
            provenance: BTreeMap::new(),
        }
    }

    /// Every matrix in emission order: torus, torsion, normalizer, unipotent.
    pub fn all(&self) -> Vec<(String, &MatQ)> {
        let mut out = Vec::new();
        for (name, list) in [
            ("torus", &self.torus),
            ("torsion", &self.torsion),
            ("normalizer", &self.normalizer),
            ("unipotent", &self.unipotent),
        ] {
            out.extend(list.iter().enumerate().map(|(i, m)| (format!("{name}[{i}]"), m)));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SanityCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SanityReport {
    pub passed: bool,
    pub checks: Vec<SanityCheck>,
}

impl SanityReport {
    pub fn check(&self, name: &str) -> Option<&SanityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

const MAX_TORSION_ORDER: u64 = 120;

fn sanity_check(gs: &GeneratorSet, name: &str) -> SanityCheck {
    let all = gs.all();
    let primes = &gs.ring.primes;
    let fail = |detail: String| SanityCheck { name: name.into(), passed: false, detail };
    let ok = |detail: &str| SanityCheck { name: name.into(), passed: true, detail: detail.into() };
    match name {
        "shape" => match all.iter().find(|(_, m)| m.rows() != gs.n || m.cols() != gs.n) {
            Some((k, _)) => fail(format!("{k} is not {0}x{0}", gs.n)),
            None => ok("all matrices have the ambient size"),
        },
        "determinant" => {
            for (k, m) in &all {
                let d = m.det();
                let good = match gs.ambient {
                    Ambient::SL => d.is_one(),
                    Ambient::GL => is_s_unit_rational(&d, primes),
                };
                if !good {
                    return fail(format!("{k} has determinant {d}"));
                }
            }
            ok("determinants are units of the ring")
        }
        "integrality" => {
            for (k, m) in &all {
                if !m.is_s_integral(primes) {
                    return fail(format!("{k} is not defined over {}", gs.ring));
                }
                match m.inverse() {
                    Ok(inv) if inv.is_s_integral(primes) => {}
                    Ok(_) => return fail(format!("inverse of {k} is not defined over {}", gs.ring)),
                    Err(_) => return fail(format!("{k} is singular")),
                }
            }
            ok("generators and inverses are integral over the ring")
        }
        "torus_commute" => {
            let t: Vec<&MatQ> = gs.torus.iter().chain(&gs.torsion).collect();
            for i in 0..t.len() {
                for j in i + 1..t.len() {
                    if !t[i].commutes_with(t[j]) {
                        return fail(format!("torus generators {i} and {j} do not commute"));
                    }
                }
            }
            ok("torus generators commute")
        }
        "torsion_order" => {
            for (i, m) in gs.torsion.iter().enumerate() {
                let mut acc = m.clone();
                let order = (1..=MAX_TORSION_ORDER).find(|_| {
                    let done = acc.is_identity();
                    if !done {
                        acc = acc.mul(m);
                    }
                    done
                });
                if order.is_none() {
                    return fail(format!("torsion[{i}] has no order up to {MAX_TORSION_ORDER}"));
                }
            }
            ok("torsion generators have finite order")
        }
        "normalizer" => {
            let span = algebra_span(&gs.torus.iter().chain(&gs.torsion).cloned().collect::<Vec<_>>(), gs.n);
            for (i, g) in gs.normalizer.iter().enumerate() {
                match verify_normalization_of_span(&span, g) {
                    Ok(c) if c.normalizes => {}
                    Ok(c) => {
                        return fail(format!("normalizer[{i}] moves algebra element {:?} out", c.failing_index))
                    }
                    Err(e) => return fail(format!("normalizer[{i}]: {e}")),
                }
            }
            ok("normalizer generators preserve the torus algebra")
        }
        "semidirect" => {
            let t: Vec<MatQ> = gs.torus.iter().chain(&gs.torsion).cloned().collect();
            match verify_semidirect(&t, &gs.unipotent) {
                Ok(c) if c.holds => ok("unipotent radical is normalized by the torus"),
                Ok(c) => fail(format!("conjugate of unipotent by torus leaves the radical: {:?}", c.offending)),
                Err(e) => fail(e.to_string()),
            }
        }
        _ => fail("unknown check".into()),
    }
}

pub const SANITY_CHECKS: [&str; 7] =
    ["shape", "determinant", "integrality", "torus_commute", "torsion_order", "normalizer", "semidirect"];

/// Runs every check; the report is in a fixed order.
pub fn group_sanity(gs: &GeneratorSet) -> SanityReport {
    let shape = sanity_check(gs, "shape");
    if !shape.passed {
        return SanityReport { passed: false, checks: vec![shape] };
    }
    let checks: Vec<SanityCheck> = SANITY_CHECKS.par_iter().map(|n| sanity_check(gs, n)).collect();
    SanityReport { passed: checks.iter().all(|c| c.passed), checks }
}

/// A change of basis in GL_n(Z) carrying an imported torus onto π(E).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conjugator {
    pub matrix: MatQ,
    /// The imported matrix playing the role of the generator x.
    pub generator_image: MatQ,
}

fn rationalize_entry(v: f64, max_den: i64) -> Option<BigRat> {
    (1..=max_den).find_map(|d| {
        let n = (v * d as f64).round();
        ((v * d as f64 - n).abs() < 1e-6).then(|| BigRat::new(BigInt::from(n as i64), BigInt::from(d)))
    })
}

/// Matrices X in the imported algebra with f(X) = 0, found by interpolating
/// eigenvalue assignments of a generating element.
fn generator_images(e: &EtaleAlgebra, algebra: &[MatQ], n: usize) -> Result<Vec<MatQ>> {
    let f = &e.factors()[0];
    let fq = f.to_q();
    let Some(p) = algebra.iter().find(|m| {
        let c = m.charpoly();
        QPoly::gcd(&c, &c.derivative()).degree() == Some(0)
    }) else {
        return Ok(vec![]);
    };
    let cp = p.charpoly();
    let den = cp.coeffs().iter().fold(BigInt::one(), |a, c| num_integer::Integer::lcm(&a, c.denom()));
    let cz = ZPoly::new(cp.coeffs().iter().map(|c| (c * int(den.clone())).numer().clone()).collect());
    let lam = approx_roots(&cz)?;
    let alpha = approx_roots(f)?;
    let pf: Vec<Vec<f64>> = p.to_rows().iter().map(|r| r.iter().map(to_f64).collect()).collect();
    let powers: Vec<Vec<Vec<f64>>> = (0..n)
        .scan(identity_f(n), |acc, _| {
            let cur = acc.clone();
            *acc = mat_mul_f(acc, &pf);
            Some(cur)
        })
        .collect();
    let vand: Vec<Vec<Complex64>> = lam.iter().map(|z| (0..n).map(|k| z.powu(k as u32)).collect()).collect();
    let mut out: Vec<MatQ> = Vec::new();
    for perm in permutations(n) {
        let rhs: Vec<Complex64> = perm.iter().map(|&k| alpha[k]).collect();
        let Some(c) = solve_complex(vand.clone(), rhs) else { continue };
        if c.iter().any(|z| z.im.abs() > 1e-6 * (1.0 + z.norm())) {
            continue;
        }
        let mut xf = vec![vec![0.0; n]; n];
        for (k, ck) in c.iter().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    xf[i][j] += ck.re * powers[k][i][j];
                }
            }
        }
        let Some(rows) = xf
            .iter()
            .map(|r| r.iter().map(|&v| rationalize_entry(v, 64)).collect::<Option<Vec<_>>>())
            .collect::<Option<Vec<_>>>()
        else {
            continue;
        };
        let x = MatQ::from_rows(rows)?;
        let fx = fq.coeffs().iter().rev().fold(MatQ::zeros(n, n), |acc, c| acc.mul(&x).add(&MatQ::scalar(n, c.clone())));
        if fx.is_zero() && x.commutes_with(p) && !out.contains(&x) {
            out.push(x);
        }
    }
    Ok(out)
}

fn identity_f(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

fn mat_mul_f(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
}

fn det_i128(mut m: Vec<Vec<i128>>) -> Option<i128> {
    let n = m.len();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if m[k][k] == 0 {
            let Some(p) = (k + 1..n).find(|&i| m[i][k] != 0) else { return Some(0) };
            m.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[i][j].checked_mul(m[k][k])?.checked_sub(m[i][k].checked_mul(m[k][j])?)?) / prev;
            }
        }
        prev = m[k][k];
    }
    Some(sign * m[n - 1][n - 1])
}

/// Searches for C ∈ GL_n(Z) with C·A·C⁻¹ = π(E) for the algebra A spanned by
/// `imported`. Candidates are π(a)·C₀ for a fixed rational intertwiner C₀,
/// with a running over the lattice that makes the product integral and
/// coordinates bounded by `bound`.
pub fn find_conjugator(e: &EtaleAlgebra, imported: &[MatQ], bound: i64) -> Result<Option<Conjugator>> {
    if e.num_factors() != 1 {
        return Err(Error::Unsupported("conjugator search for several factors".into()));
    }
    let n = e.degree();
    let algebra = algebra_span(imported, n);
    if algebra.len() != n {
        return Ok(None);
    }
    for x in generator_images(e, &algebra, n)? {
        // D sends order coordinates to imported coordinates through b(X)·v
        let Some(d) = (0..n).find_map(|k| {
            let mut v = vec![BigRat::zero(); n];
            v[k] = BigRat::one();
            let cols: Vec<Vec<BigRat>> = (0..n)
                .map(|j| {
                    let mut unit = vec![BigRat::zero(); n];
                    unit[j] = BigRat::one();
                    let pc = e.to_power(&AlgebraElement::new(unit));
                    let bx = pc.iter().rev().fold(MatQ::zeros(n, n), |acc, c| acc.mul(&x).add(&MatQ::scalar(n, c.clone())));
                    bx.mul_vec(&v)
                })
                .collect();
            let d = MatQ::from_cols(&cols).ok()?;
            (!d.det().is_zero()).then_some(d)
        }) else {
            continue;
        };
        let c0 = d.inverse()?;
        let imgs: Vec<MatQ> = (0..n).map(|i| e.basis_rep(i).mul(&c0)).collect();
        let den = imgs
            .iter()
            .flat_map(|m| m.entries())
            .fold(BigInt::one(), |a, c| num_integer::Integer::lcm(&a, c.denom()));
        // rows: a ↦ a·R' ∈ den·Z^{n²}
        let rp: IntMat = imgs
            .iter()
            .map(|m| m.entries().iter().map(|c| (c * int(den.clone())).numer().clone()).collect())
            .collect();
        let g = lattice_basis(&transpose(&rp));
        if g.len() != n {
            continue;
        }
        let gm = MatQ::from_integer_rows(&g).transpose();
        let lat = gm.inverse()?.scale(&int(den.clone()));
        let ell: Vec<AlgebraElement> = (0..n).map(|i| AlgebraElement::new(lat.row(i))).collect();
        let mats: Vec<MatQ> = ell.iter().map(|a| e.regular_rep(a).mul(&c0)).collect();
        let Some(int_mats) = mats
            .iter()
            .map(|m| {
                m.to_integer_rows()?
                    .into_iter()
                    .map(|r| r.into_iter().map(|v| v.to_i64()).collect::<Option<Vec<_>>>())
                    .collect::<Option<Vec<_>>>()
            })
            .collect::<Option<Vec<_>>>()
        else {
            continue;
        };
        let mut radius = 1;
        loop {
            let side = (2 * radius + 1) as u64;
            let total = side.pow(n as u32);
            let hit = (0..total).into_par_iter().find_first(|&idx| {
                let mut r = idx;
                let coeffs: Vec<i64> = (0..n)
                    .map(|_| {
                        let v = (r % side) as i64 - radius;
                        r /= side;
                        v
                    })
                    .collect();
                let mut m = vec![vec![0i128; n]; n];
                for (c, im) in coeffs.iter().zip(&int_mats) {
                    for i in 0..n {
                        for j in 0..n {
                            m[i][j] += *c as i128 * im[i][j] as i128;
                        }
                    }
                }
                matches!(det_i128(m), Some(1) | Some(-1))
            });
            if let Some(idx) = hit {
                let mut r = idx;
                let mut acc = MatQ::zeros(n, n);
                for m in &mats {
                    let v = (r % side) as i64 - radius;
                    r /= side;
                    acc = acc.add(&m.scale(&rat(v)));
                }
                return Ok(Some(Conjugator { matrix: acc, generator_image: x }));
            }
            if radius >= bound {
                break;
            }
            radius = (radius * 2).min(bound);
        }
    }
    Ok(None)
}
