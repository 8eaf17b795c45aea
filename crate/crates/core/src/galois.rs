//! Galois groups of small degree, signatures, and decomposition data at places.
//!
//! The Galois group acts on the embeddings of a field through a fixed
//! permutation model for each supported group. Decomposition groups at
//! unramified places are cyclic, generated by a Frobenius element whose cycle
//! type is read off from the factorization mod p. Where a cycle type does not
//! pin down the element up to conjugacy (type [2,2] in V4 and D4) the choice is
//! made from the splitting of resolvent quadratics, so that every model label
//! refers to the same subfield throughout.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::fp::{factor_degrees, factor_z_mod_p, is_prime, FpPoly};
use crate::arith::poly::{is_square_integer, ZPoly};
use crate::error::{Error, Result};
use crate::etale::check_irreducible;

pub type Perm = Vec<usize>;

pub fn identity_perm(n: usize) -> Perm {
    (0..n).collect()
}

/// (a ∘ b)(i) = a(b(i)).
pub fn compose(a: &Perm, b: &Perm) -> Perm {
    b.iter().map(|&i| a[i]).collect()
}

pub fn invert(a: &Perm) -> Perm {
    let mut out = vec![0; a.len()];
    for (i, &j) in a.iter().enumerate() {
        out[j] = i;
    }
    out
}

pub fn perm_from_cycles(n: usize, cycles: &[&[usize]]) -> Perm {
    let mut p = identity_perm(n);
    for c in cycles {
        for k in 0..c.len() {
            p[c[k]] = c[(k + 1) % c.len()];
        }
    }
    p
}

/// Orbits of the group generated by `gens`, each sorted, ordered by least
/// element.
pub fn orbits(n: usize, gens: &[Perm]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        let mut orbit = vec![s];
        seen[s] = true;
        let mut k = 0;
        while k < orbit.len() {
            let x = orbit[k];
            for g in gens {
                if !seen[g[x]] {
                    seen[g[x]] = true;
                    orbit.push(g[x]);
                }
            }
            k += 1;
        }
        orbit.sort_unstable();
        out.push(orbit);
    }
    out
}

/// Cycle lengths in ascending order, fixed points included.
pub fn cycle_type(p: &Perm) -> Vec<usize> {
    let mut t: Vec<usize> = orbits(p.len(), std::slice::from_ref(p)).iter().map(|o| o.len()).collect();
    t.sort_unstable();
    t
}

/// All elements of the group generated by `gens`, in breadth-first order
/// from the identity.
pub fn group_elements(n: usize, gens: &[Perm]) -> Vec<Perm> {
    let id = identity_perm(n);
    let mut seen: HashSet<Perm> = HashSet::from([id.clone()]);
    let mut out = vec![id.clone()];
    let mut queue = VecDeque::from([id]);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = compose(&x, g);
            if seen.insert(y.clone()) {
                out.push(y.clone());
                queue.push_back(y);
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GaloisGroup {
    C1,
    C2,
    C3,
    S3,
    C4,
    V4,
    D4,
    A4,
    S4,
}

impl GaloisGroup {
    pub fn order(self) -> usize {
        use GaloisGroup::*;
        match self {
            C1 => 1,
            C2 => 2,
            C3 => 3,
            S3 => 6,
            C4 | V4 => 4,
            D4 => 8,
            A4 => 12,
            S4 => 24,
        }
    }

    pub fn degree(self) -> usize {
        use GaloisGroup::*;
        match self {
            C1 => 1,
            C2 => 2,
            C3 | S3 => 3,
            _ => 4,
        }
    }

    /// Generators of the permutation model.
    pub fn generators(self) -> Vec<Perm> {
        use GaloisGroup::*;
        let n = self.degree();
        let c = |cs: &[&[usize]]| perm_from_cycles(n, cs);
        match self {
            C1 => vec![],
            C2 => vec![c(&[&[0, 1]])],
            C3 => vec![c(&[&[0, 1, 2]])],
            S3 => vec![c(&[&[0, 1, 2]]), c(&[&[0, 1]])],
            C4 => vec![c(&[&[0, 1, 2, 3]])],
            V4 => vec![c(&[&[0, 1], &[2, 3]]), c(&[&[0, 2], &[1, 3]])],
            D4 => vec![c(&[&[0, 1, 2, 3]]), c(&[&[0, 2]])],
            A4 => vec![c(&[&[0, 1, 2]]), c(&[&[0, 1], &[2, 3]])],
            S4 => vec![c(&[&[0, 1, 2, 3]]), c(&[&[0, 1]])],
        }
    }
}

impl fmt::Display for GaloisGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// A Galois group together with its action on the embeddings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GaloisTag {
    pub group: GaloisGroup,
    pub degree: usize,
    pub generators: Vec<Perm>,
}

impl GaloisTag {
    pub fn new(group: GaloisGroup) -> Self {
        GaloisTag { group, degree: group.degree(), generators: group.generators() }
    }

    pub fn elements(&self) -> Vec<Perm> {
        group_elements(self.degree, &self.generators)
    }

    pub fn is_transitive(&self) -> bool {
        orbits(self.degree, &self.generators).len() == 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub r1: usize,
    pub r2: usize,
}

pub fn signature(f: &ZPoly) -> Result<Signature> {
    let n = f.degree_nonzero()?;
    let r1 = f.to_q().count_real_roots()?;
    if (n - r1) % 2 != 0 {
        return Err(Error::InvalidInput(format!(
            "{f} has {r1} real roots out of {n}; the rest cannot pair up"
        )));
    }
    Ok(Signature { r1, r2: (n - r1) / 2 })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Infinity,
    Prime(u64),
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Infinity => write!(f, "inf"),
            Place::Prime(p) => write!(f, "p:{p}"),
        }
    }
}

impl FromStr for Place {
    type Err = Error;
    /// Accepts "inf", "p:5" or a bare prime "5".
    fn from_str(s: &str) -> Result<Place> {
        let t = s.trim();
        if t == "inf" || t == "∞" {
            return Ok(Place::Infinity);
        }
        let num = t.strip_prefix("p:").unwrap_or(t);
        let p: u64 = num
            .parse()
            .map_err(|_| Error::InvalidInput(format!("not a place: {s:?}")))?;
        if !is_prime(p) {
            return Err(Error::CompositeModulus(p));
        }
        Ok(Place::Prime(p))
    }
}

impl Serialize for Place {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_string().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Place {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn check_unramified(f: &ZPoly, p: u64) -> Result<BigInt> {
    if !is_prime(p) {
        return Err(Error::CompositeModulus(p));
    }
    let disc = f.discriminant()?;
    if (&disc % BigInt::from(p)).is_zero() {
        return Err(Error::RamifiedPlace { p, disc });
    }
    Ok(disc)
}

/// Number of places of Q[x]/(f) over an unramified prime p.
pub fn places_over_p(f: &ZPoly, p: u64) -> Result<usize> {
    check_unramified(f, p)?;
    Ok(factor_z_mod_p(f, p)?.len())
}

/// Coefficients (a, b, c, d) of a monic quartic x⁴ + a x³ + b x² + c x + d.
fn quartic_coeffs(f: &ZPoly) -> (BigInt, BigInt, BigInt, BigInt) {
    (f.coeff(3), f.coeff(2), f.coeff(1), f.coeff(0))
}

/// Resolvent cubic whose roots are α₁α₂ + α₃α₄ and its conjugates.
pub fn resolvent_cubic(f: &ZPoly) -> ZPoly {
    let (a, b, c, d) = quartic_coeffs(f);
    ZPoly::new(vec![
        -(&a * &a * &d - BigInt::from(4) * &b * &d + &c * &c),
        &a * &c - BigInt::from(4) * &d,
        -b,
        BigInt::from(1),
    ])
}

/// Quadratic with roots α_i + α_j and α_k + α_l for the pair partition
/// belonging to the resolvent root θ.
fn sum_quadratic(f: &ZPoly, theta: &BigInt) -> ZPoly {
    let (a, b, _, _) = quartic_coeffs(f);
    ZPoly::new(vec![b - theta, a, BigInt::from(1)])
}

/// Quadratic with roots α_iα_j and α_kα_l.
fn product_quadratic(f: &ZPoly, theta: &BigInt) -> ZPoly {
    let (_, _, _, d) = quartic_coeffs(f);
    ZPoly::new(vec![d, -theta.clone(), BigInt::from(1)])
}

fn quad_disc(q: &ZPoly) -> BigInt {
    q.coeff(1) * q.coeff(1) - BigInt::from(4) * q.coeff(0) * q.coeff(2)
}

/// Splits over Q(√Δ): discriminant zero, a square, or a square times Δ.
fn splits_over_quadratic(q: &ZPoly, delta: &BigInt) -> bool {
    let d = quad_disc(q);
    d.is_zero() || is_square_integer(&d) || is_square_integer(&(&d * delta))
}

pub fn galois_group_small(f: &ZPoly) -> Result<GaloisTag> {
    let n = f.degree_nonzero()?;
    if !f.is_monic() {
        return Err(Error::NotMonic);
    }
    if n > 4 {
        return Err(Error::Unsupported(format!("Galois groups of degree {n} > 4")));
    }
    check_irreducible(f)?;
    let disc = f.discriminant()?;
    let group = match n {
        1 => GaloisGroup::C1,
        2 => GaloisGroup::C2,
        3 => {
            if is_square_integer(&disc) {
                GaloisGroup::C3
            } else {
                GaloisGroup::S3
            }
        }
        _ => {
            let roots = resolvent_cubic(f).integer_roots()?;
            match roots.len() {
                0 => {
                    if is_square_integer(&disc) {
                        GaloisGroup::A4
                    } else {
                        GaloisGroup::S4
                    }
                }
                1 => {
                    let t = &roots[0];
                    if splits_over_quadratic(&sum_quadratic(f, t), &disc)
                        && splits_over_quadratic(&product_quadratic(f, t), &disc)
                    {
                        GaloisGroup::C4
                    } else {
                        GaloisGroup::D4
                    }
                }
                _ => GaloisGroup::V4,
            }
        }
    };
    Ok(GaloisTag::new(group))
}

/// Whether a quadratic splits into distinct linear factors mod p; None when
/// it has a repeated root there.
fn quad_splits_mod(q: &ZPoly, p: u64) -> Result<Option<bool>> {
    let qp = FpPoly::from_z(q, p);
    let fac = factor_z_mod_p(q, p)?;
    if qp.degree() != Some(2) || fac.iter().any(|(_, m)| *m > 1) {
        return Ok(None);
    }
    Ok(Some(fac.len() == 2))
}

/// Sign test at the real place: Some(true) when both roots are real and
/// distinct, Some(false) when complex, None when repeated.
fn quad_real(q: &ZPoly) -> Option<bool> {
    let d = quad_disc(q);
    if d.is_zero() {
        None
    } else {
        Some(d.is_positive())
    }
}

/// Decides, for a pair partition given by its resolvent root, whether the
/// decomposition element preserves each block (true) or swaps them (false).
fn preserves_blocks(f: &ZPoly, theta: &BigInt, place: Place) -> Result<Option<bool>> {
    for q in [sum_quadratic(f, theta), product_quadratic(f, theta)] {
        let r = match place {
            Place::Prime(p) => quad_splits_mod(&q, p)?,
            Place::Infinity => quad_real(&q),
        };
        if r.is_some() {
            return Ok(r);
        }
    }
    Ok(None)
}

fn ambiguous(place: Place) -> Error {
    Error::AmbiguousFrobenius { p: match place { Place::Prime(p) => p, Place::Infinity => 0 } }
}

/// The cycle type a decomposition generator must have at `place`.
pub fn required_cycle_type(f: &ZPoly, place: Place) -> Result<Vec<usize>> {
    let n = f.degree_nonzero()?;
    match place {
        Place::Prime(p) => {
            check_unramified(f, p)?;
            Ok(factor_degrees(&factor_z_mod_p(f, p)?))
        }
        Place::Infinity => {
            let s = signature(f)?;
            let mut t = vec![1; s.r1];
            t.extend(std::iter::repeat(2).take(s.r2));
            t.sort_unstable();
            debug_assert_eq!(t.iter().sum::<usize>(), n);
            Ok(t)
        }
    }
}

/// Generator of the decomposition group at `place` in the model of `tag`.
pub fn decomposition_element(f: &ZPoly, tag: &GaloisTag, place: Place) -> Result<Perm> {
    let want = required_cycle_type(f, place)?;
    let elems = tag.elements();
    let matching: Vec<&Perm> = elems.iter().filter(|g| cycle_type(g) == want).collect();
    if matching.is_empty() {
        return Err(Error::NoSuchElement { group: tag.group.to_string(), cycle_type: want });
    }
    let c = |cs: &[&[usize]]| perm_from_cycles(4, cs);
    if want == [2, 2] && matches!(tag.group, GaloisGroup::V4 | GaloisGroup::D4) {
        let mut thetas = resolvent_cubic(f).integer_roots()?;
        thetas.sort();
        return match tag.group {
            GaloisGroup::V4 => {
                let xor = [
                    c(&[&[0, 1], &[2, 3]]),
                    c(&[&[0, 2], &[1, 3]]),
                    c(&[&[0, 3], &[1, 2]]),
                ];
                let mut hit = None;
                for (k, t) in thetas.iter().enumerate() {
                    match preserves_blocks(f, t, place)? {
                        Some(true) => {
                            if hit.is_some() {
                                return Err(ambiguous(place));
                            }
                            hit = Some(k);
                        }
                        Some(false) => {}
                        None => return Err(ambiguous(place)),
                    }
                }
                hit.map(|k| xor[k].clone()).ok_or_else(|| ambiguous(place))
            }
            _ => match preserves_blocks(f, &thetas[0], place)? {
                Some(true) => Ok(c(&[&[0, 2], &[1, 3]])),
                Some(false) => Ok(c(&[&[0, 1], &[2, 3]])),
                None => Err(ambiguous(place)),
            },
        };
    }
    Ok(matching[0].clone())
}

/// Decomposition data at one place.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaceProfile {
    pub place: Place,
    pub orbits: Vec<Vec<usize>>,
    pub num_places_over: usize,
    pub generator: Perm,
    pub cycle_type: Vec<usize>,
}

pub fn decomposition_profile(f: &ZPoly, tag: &GaloisTag, place: Place) -> Result<PlaceProfile> {
    if f.degree_nonzero()? != tag.degree {
        return Err(Error::InvalidInput(format!(
            "tag acts on {} points but {f} has degree {}",
            tag.degree,
            f.degree().unwrap()
        )));
    }
    let g = decomposition_element(f, tag, place)?;
    let orbits = orbits(tag.degree, std::slice::from_ref(&g));
    Ok(PlaceProfile {
        place,
        num_places_over: orbits.len(),
        cycle_type: cycle_type(&g),
        generator: g,
        orbits,
    })
}

/// Cycle types occurring in the model group.
pub fn cycle_types(tag: &GaloisTag) -> BTreeSet<Vec<usize>> {
    tag.elements().iter().map(cycle_type).collect()
}
