//! Maximal tori attached to étale algebras and the S-ample test.
//!
//! The torus is described by its rational cocharacter module: Q^n with the
//! Galois group permuting the embeddings (GL) or the zero-sum hyperplane
//! inside it (SL). Ranks over Q and over completions are dimensions of fixed
//! spaces of the whole group and of decomposition groups. Subtori defined over
//! Q correspond to Galois-stable subspaces, which are enumerated exactly when
//! the module is multiplicity free.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::rational::{rat, BigRat};
use crate::error::{Error, Result};
use crate::etale::EtaleAlgebra;
use crate::galois::{
    compose, decomposition_profile, galois_group_small, group_elements, identity_perm, invert,
    GaloisTag, Perm, Place, PlaceProfile,
};
use crate::linalg::MatQ;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Ambient {
    GL,
    SL,
}

impl Ambient {
    /// Q-rank of the center.
    pub fn center_rank(self) -> usize {
        match self {
            Ambient::GL => 1,
            Ambient::SL => 0,
        }
    }
}

impl FromStr for Ambient {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "GL" => Ok(Ambient::GL),
            "SL" => Ok(Ambient::SL),
            _ => Err(Error::InvalidInput(format!("ambient group must be GL or SL, got {s:?}"))),
        }
    }
}

impl fmt::Display for Ambient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// A finite set of places of Q.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaceSet {
    pub include_infty: bool,
    pub finite_primes: Vec<u64>,
}

impl PlaceSet {
    pub fn infinity() -> Self {
        PlaceSet { include_infty: true, finite_primes: vec![] }
    }

    pub fn with_primes(primes: &[u64]) -> Self {
        PlaceSet { include_infty: true, finite_primes: primes.to_vec() }
    }

    /// Parses "inf,5,7".
    pub fn parse(s: &str) -> Result<Self> {
        let mut out = PlaceSet { include_infty: false, finite_primes: vec![] };
        for part in s.split(',').filter(|t| !t.trim().is_empty()) {
            match part.parse::<Place>()? {
                Place::Infinity => out.include_infty = true,
                Place::Prime(p) => {
                    if !out.finite_primes.contains(&p) {
                        out.finite_primes.push(p)
                    }
                }
            }
        }
        out.finite_primes.sort_unstable();
        Ok(out)
    }

    pub fn places(&self) -> Vec<Place> {
        let mut v: Vec<Place> = if self.include_infty { vec![Place::Infinity] } else { vec![] };
        v.extend(self.finite_primes.iter().map(|&p| Place::Prime(p)));
        v
    }

    pub fn is_empty(&self) -> bool {
        !self.include_infty && self.finite_primes.is_empty()
    }

    /// The archimedean place is mandatory whenever the ambient group is
    /// non-compact over R, which is every case except SL_1.
    pub fn validate(&self, ambient: Ambient, n: usize) -> Result<()> {
        if self.is_empty() {
            return Err(Error::InvalidPlaceSet("the place set is empty".into()));
        }
        let trivial = ambient == Ambient::SL && n == 1;
        if !self.include_infty && !trivial {
            return Err(Error::InvalidPlaceSet(format!(
                "{ambient}_{n}(R) is not compact, so the place set must contain inf"
            )));
        }
        Ok(())
    }
}

impl fmt::Display for PlaceSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .places()
            .iter()
            .map(|p| match p {
                Place::Infinity => "inf".to_string(),
                Place::Prime(p) => p.to_string(),
            })
            .collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Image of a vector under the permutation action e_i ↦ e_{g(i)}.
pub fn permute(g: &Perm, v: &[BigRat]) -> Vec<BigRat> {
    let mut out = vec![BigRat::zero(); v.len()];
    for (i, x) in v.iter().enumerate() {
        out[g[i]] = x.clone();
    }
    out
}

/// Basis of the subspace of span(`basis`) fixed by every generator.
pub fn fixed_subspace(basis: &[Vec<BigRat>], gens: &[Perm]) -> Vec<Vec<BigRat>> {
    let k = basis.len();
    if k == 0 {
        return vec![];
    }
    let n = basis[0].len();
    let mut rows = Vec::new();
    for g in gens {
        let diffs: Vec<Vec<BigRat>> = basis
            .iter()
            .map(|b| permute(g, b).iter().zip(b).map(|(x, y)| x - y).collect())
            .collect();
        for i in 0..n {
            rows.push((0..k).map(|j| diffs[j][i].clone()).collect());
        }
    }
    if rows.is_empty() {
        return basis.to_vec();
    }
    let m = MatQ::from_rows(rows).expect("rectangular");
    m.kernel().iter().map(|c| combine(basis, c)).collect()
}

pub fn fixed_dim(basis: &[Vec<BigRat>], gens: &[Perm]) -> usize {
    fixed_subspace(basis, gens).len()
}

fn combine(basis: &[Vec<BigRat>], c: &[BigRat]) -> Vec<BigRat> {
    let n = basis[0].len();
    let mut v = vec![BigRat::zero(); n];
    for (b, x) in basis.iter().zip(c) {
        if x.is_zero() {
            continue;
        }
        for i in 0..n {
            v[i] += &b[i] * x;
        }
    }
    v
}

fn span_rank(vs: &[Vec<BigRat>]) -> usize {
    if vs.is_empty() {
        return 0;
    }
    MatQ::from_rows(vs.to_vec()).expect("rectangular").rank()
}

/// Matrix of g on span(`basis`) in those coordinates, if the span is stable.
fn restricted_action(basis: &[Vec<BigRat>], g: &Perm) -> Option<MatQ> {
    let bt = MatQ::from_rows(basis.to_vec()).ok()?.transpose();
    let cols: Vec<Vec<BigRat>> = basis
        .iter()
        .map(|b| {
            let img = permute(g, b);
            let x = bt.solve(&img)?;
            (bt.mul_vec(&x) == img).then_some(x)
        })
        .collect::<Option<_>>()?;
    MatQ::from_cols(&cols).ok()
}

/// Solutions X of X·A = A·X for all A in `ops`, as a basis of matrices.
fn commutant(k: usize, ops: &[MatQ]) -> Vec<MatQ> {
    let mut rows: Vec<Vec<BigRat>> = Vec::new();
    for a in ops {
        for i in 0..k {
            for j in 0..k {
                // (XA − AX)[i][j] = Σ_l X[i][l] A[l][j] − A[i][l] X[l][j]
                let mut row = vec![BigRat::zero(); k * k];
                for l in 0..k {
                    row[i * k + l] += &a[(l, j)];
                    row[l * k + j] -= &a[(i, l)];
                }
                rows.push(row);
            }
        }
    }
    let sol = if rows.is_empty() {
        (0..k * k)
            .map(|t| {
                let mut v = vec![BigRat::zero(); k * k];
                v[t] = BigRat::one();
                v
            })
            .collect()
    } else {
        MatQ::from_rows(rows).unwrap().kernel()
    };
    sol.into_iter()
        .map(|v| MatQ::from_rows(v.chunks(k).map(|c| c.to_vec()).collect()).unwrap())
        .collect()
}

/// How the Galois group acts on the embeddings of all factors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GaloisAction {
    pub generators: Vec<Perm>,
    /// True when the generators describe the actual group (at most one
    /// distinct non-linear factor); false when they only generate a group
    /// with the same orbits and decomposition data.
    pub exact: bool,
}

#[derive(Clone, Debug)]
pub struct TorusDatum {
    algebra: EtaleAlgebra,
    ambient: Ambient,
    tags: Vec<GaloisTag>,
    action: GaloisAction,
    module: Vec<Vec<BigRat>>,
}

fn zero_sum_basis(n: usize) -> Vec<Vec<BigRat>> {
    (0..n.saturating_sub(1))
        .map(|i| {
            let mut v = vec![BigRat::zero(); n];
            v[i] = BigRat::one();
            v[i + 1] = rat(-1);
            v
        })
        .collect()
}

fn standard_basis(n: usize) -> Vec<Vec<BigRat>> {
    (0..n)
        .map(|i| {
            let mut v = vec![BigRat::zero(); n];
            v[i] = BigRat::one();
            v
        })
        .collect()
}

impl TorusDatum {
    /// The maximal torus π(E^×) in GL_n, or its intersection with SL_n.
    pub fn build(algebra: &EtaleAlgebra, ambient: Ambient) -> Result<Self> {
        let chk = algebra.is_order();
        if !chk.is_order {
            return Err(Error::NotAnOrder(format!("{:?}", chk.witness)));
        }
        let n = algebra.degree();
        let module = match ambient {
            Ambient::GL => standard_basis(n),
            Ambient::SL => zero_sum_basis(n),
        };
        Self::assemble(algebra, ambient, module)
    }

    /// A torus given by an explicit Galois-stable cocharacter subspace.
    pub fn with_module(
        algebra: &EtaleAlgebra,
        ambient: Ambient,
        module: Vec<Vec<BigRat>>,
    ) -> Result<Self> {
        let n = algebra.degree();
        if module.iter().any(|v| v.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: module.len() });
        }
        if span_rank(&module) != module.len() {
            return Err(Error::InvalidInput("module basis is not independent".into()));
        }
        if ambient == Ambient::SL
            && module.iter().any(|v| !v.iter().fold(BigRat::zero(), |a, x| a + x).is_zero())
        {
            return Err(Error::InvalidInput("SL cocharacters must have coordinate sum 0".into()));
        }
        let t = Self::assemble(algebra, ambient, module)?;
        for g in &t.action.generators {
            if restricted_action(&t.module, g).is_none() {
                return Err(Error::InvalidInput("module is not Galois stable".into()));
            }
        }
        Ok(t)
    }

    fn assemble(algebra: &EtaleAlgebra, ambient: Ambient, module: Vec<Vec<BigRat>>) -> Result<Self> {
        let tags: Vec<GaloisTag> =
            algebra.factors().iter().map(galois_group_small).collect::<Result<_>>()?;
        let action = combined_action(algebra, &tags);
        Ok(TorusDatum { algebra: algebra.clone(), ambient, tags, action, module })
    }

    pub fn algebra(&self) -> &EtaleAlgebra {
        &self.algebra
    }

    pub fn ambient(&self) -> Ambient {
        self.ambient
    }

    pub fn tags(&self) -> &[GaloisTag] {
        &self.tags
    }

    /// The Galois tag of a single-factor algebra.
    pub fn galois(&self) -> &GaloisTag {
        &self.tags[0]
    }

    pub fn action(&self) -> &GaloisAction {
        &self.action
    }

    pub fn module_basis(&self) -> &[Vec<BigRat>] {
        &self.module
    }

    pub fn dim(&self) -> usize {
        self.module.len()
    }

    pub fn n(&self) -> usize {
        self.algebra.degree()
    }

    /// Decomposition data at `place` for every factor, merged into one
    /// permutation of all embeddings.
    pub fn place_data(&self, place: Place) -> Result<(Perm, Vec<PlaceProfile>)> {
        let mut perm = Vec::with_capacity(self.n());
        let mut profiles = Vec::new();
        for (k, (f, tag)) in self.algebra.factors().iter().zip(&self.tags).enumerate() {
            let prof = decomposition_profile(f, tag, place)?;
            let off = self.algebra.factor_range(k).start;
            perm.extend(prof.generator.iter().map(|&i| i + off));
            profiles.push(prof);
        }
        Ok((perm, profiles))
    }

    pub fn global_rank(&self) -> usize {
        fixed_dim(&self.module, &self.action.generators)
    }

    pub fn local_rank(&self, place: Place) -> Result<usize> {
        let (g, _) = self.place_data(place)?;
        Ok(fixed_dim(&self.module, &[g]))
    }

    /// Split part at `place` (None for Q itself): the fixed subspace of the
    /// decomposition group, and a complement cut out by averaging.
    pub fn anisotropic_and_split_parts(&self, place: Option<Place>) -> Result<SplitParts> {
        let gens = match place {
            None => self.action.generators.clone(),
            Some(v) => vec![self.place_data(v)?.0],
        };
        let split = fixed_subspace(&self.module, &gens);
        let elems = group_elements(self.n(), &gens);
        let order = rat(elems.len() as i64);
        // v − average(v) spans the complement
        let comp: Vec<Vec<BigRat>> = self
            .module
            .iter()
            .map(|b| {
                let mut avg = vec![BigRat::zero(); b.len()];
                for g in &elems {
                    for (a, x) in avg.iter_mut().zip(permute(g, b)) {
                        *a += x;
                    }
                }
                b.iter().zip(avg).map(|(x, a)| x - a / &order).collect()
            })
            .collect();
        let anis = independent_subset(&comp);
        Ok(SplitParts {
            place,
            split_dim: split.len(),
            anisotropic_dim: anis.len(),
            split_basis: split,
            anisotropic_basis: anis,
        })
    }

    pub fn decompose_module(&self) -> Result<IrreducibleDecomposition> {
        if !self.action.exact {
            return Err(Error::Unsupported(
                "submodule structure of a product of distinct non-linear fields".into(),
            ));
        }
        decompose(&self.module, &self.action.generators)
    }
}

fn combined_action(algebra: &EtaleAlgebra, tags: &[GaloisTag]) -> GaloisAction {
    let n = algebra.degree();
    let nonlinear: HashSet<String> = algebra
        .factors()
        .iter()
        .filter(|f| f.degree() > Some(1))
        .map(|f| f.to_string())
        .collect();
    let exact = nonlinear.len() <= 1;
    let mut gens = Vec::new();
    if exact {
        // one field, possibly repeated: the same element acts on every copy
        if let Some(k0) = (0..tags.len()).find(|&k| tags[k].degree > 1) {
            for g in &tags[k0].generators {
                let mut p = identity_perm(n);
                for (k, t) in tags.iter().enumerate() {
                    if t.degree > 1 {
                        let off = algebra.factor_range(k).start;
                        for (i, &j) in g.iter().enumerate() {
                            p[off + i] = off + j;
                        }
                    }
                }
                gens.push(p);
            }
        }
    } else {
        for (k, t) in tags.iter().enumerate() {
            let off = algebra.factor_range(k).start;
            for g in &t.generators {
                let mut p = identity_perm(n);
                for (i, &j) in g.iter().enumerate() {
                    p[off + i] = off + j;
                }
                gens.push(p);
            }
        }
    }
    GaloisAction { generators: gens, exact }
}

fn independent_subset(vs: &[Vec<BigRat>]) -> Vec<Vec<BigRat>> {
    let mut out: Vec<Vec<BigRat>> = Vec::new();
    for v in vs {
        let mut trial = out.clone();
        trial.push(v.clone());
        if span_rank(&trial) == trial.len() {
            out = trial;
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SplitParts {
    pub place: Option<Place>,
    pub split_dim: usize,
    pub anisotropic_dim: usize,
    #[serde(serialize_with = "ser_basis")]
    pub split_basis: Vec<Vec<BigRat>>,
    #[serde(serialize_with = "ser_basis")]
    pub anisotropic_basis: Vec<Vec<BigRat>>,
}

fn ser_basis<S: serde::Serializer>(b: &[Vec<BigRat>], s: S) -> std::result::Result<S::Ok, S::Error> {
    basis_strings(b).serialize(s)
}

pub fn basis_strings(b: &[Vec<BigRat>]) -> Vec<Vec<String>> {
    b.iter().map(|v| v.iter().map(|x| x.to_string()).collect()).collect()
}

pub fn parse_basis(b: &[Vec<String>]) -> Result<Vec<Vec<BigRat>>> {
    b.iter()
        .map(|v| v.iter().map(|x| crate::arith::rational::parse_rat(x)).collect())
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub basis: Vec<Vec<String>>,
    pub dim: usize,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrreducibleDecomposition {
    pub components: Vec<Component>,
    pub multiplicity_free: bool,
}

/// Splits the module into isotypic components with the rational class sums of
/// the group, then reads multiplicities off the commutant.
pub fn decompose(module: &[Vec<BigRat>], gens: &[Perm]) -> Result<IrreducibleDecomposition> {
    let n = module.first().map_or(0, |v| v.len());
    let elems = group_elements(n, gens);
    let classes = rational_classes(&elems);
    let mut parts: Vec<Vec<Vec<BigRat>>> = if module.is_empty() { vec![] } else { vec![module.to_vec()] };
    for cls in &classes {
        let size = cls.len() as i64;
        let mut next = Vec::new();
        for w in parts {
            let mut found = 0;
            for lambda in -size..=size {
                // kernel of (class sum − λ) restricted to w
                let sub = eigen_subspace(&w, cls, &rat(lambda));
                if !sub.is_empty() {
                    found += sub.len();
                    next.push(sub);
                }
            }
            if found != w.len() {
                return Err(Error::Unsupported("class sums do not diagonalize the module".into()));
            }
        }
        parts = next;
    }
    let mut components = Vec::new();
    for w in parts {
        let ops: Vec<MatQ> = gens
            .iter()
            .map(|g| restricted_action(&w, g).ok_or_else(|| Error::InvalidInput("module is not Galois stable".into())))
            .collect::<Result<_>>()?;
        let end = commutant(w.len(), &ops);
        let center_dim = commutant_center_dim(&end).max(1);
        // End_G(U^m) = M_m(D): dim End / dim Center = m² when D is a field
        let m = if end.len() % center_dim == 0 {
            let r = end.len() / center_dim;
            (1..=w.len()).find(|m| m * m == r).unwrap_or(0)
        } else {
            0
        };
        components.push(Component { basis: basis_strings(&w), dim: w.len(), multiplicity: m });
    }
    let multiplicity_free = components.iter().all(|c| c.multiplicity == 1);
    Ok(IrreducibleDecomposition { components, multiplicity_free })
}

fn commutant_center_dim(end: &[MatQ]) -> usize {
    let k = end.len();
    if k == 0 {
        return 0;
    }
    // coefficients c with Σ c_i E_i commuting with every E_j
    let d = end[0].rows();
    let mut rows = Vec::new();
    for ej in end {
        let comms: Vec<MatQ> = end.iter().map(|ei| ei.mul(ej).sub(&ej.mul(ei))).collect();
        for r in 0..d {
            for c in 0..d {
                rows.push(comms.iter().map(|m| m[(r, c)].clone()).collect::<Vec<_>>());
            }
        }
    }
    MatQ::from_rows(rows).unwrap().kernel().len()
}

fn eigen_subspace(w: &[Vec<BigRat>], cls: &[Perm], lambda: &BigRat) -> Vec<Vec<BigRat>> {
    let k = w.len();
    let n = w[0].len();
    let imgs: Vec<Vec<BigRat>> = w
        .iter()
        .map(|b| {
            let mut acc = vec![BigRat::zero(); n];
            for g in cls {
                for (a, x) in acc.iter_mut().zip(permute(g, b)) {
                    *a += x;
                }
            }
            acc.iter().zip(b).map(|(a, x)| a - x * lambda).collect()
        })
        .collect();
    let rows: Vec<Vec<BigRat>> = (0..n).map(|i| (0..k).map(|j| imgs[j][i].clone()).collect()).collect();
    MatQ::from_rows(rows).unwrap().kernel().iter().map(|c| combine(w, c)).collect()
}

fn perm_order(g: &Perm) -> usize {
    let id = identity_perm(g.len());
    let mut x = g.clone();
    let mut k = 1;
    while x != id {
        x = compose(&x, g);
        k += 1;
    }
    k
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Partition of the group into rational classes: g ~ h when h is conjugate
/// to a generator of ⟨g⟩.
fn rational_classes(elems: &[Perm]) -> Vec<Vec<Perm>> {
    let mut seen: HashSet<Perm> = HashSet::new();
    let mut out = Vec::new();
    for g in elems {
        if seen.contains(g) {
            continue;
        }
        let ord = perm_order(g);
        let mut cls: Vec<Perm> = Vec::new();
        let mut pw = g.clone();
        for k in 1..=ord {
            if gcd(k, ord) == 1 {
                for h in elems {
                    let c = compose(&compose(h, &pw), &invert(h));
                    if seen.insert(c.clone()) {
                        cls.push(c);
                    }
                }
            }
            pw = compose(&pw, g);
        }
        out.push(cls);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "S-ample")]
    SAmple,
    #[serde(rename = "not-S-ample")]
    NotSAmple,
    #[serde(rename = "undecidable")]
    Undecidable,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::SAmple => "S-ample",
            Verdict::NotSAmple => "not-S-ample",
            Verdict::Undecidable => "undecidable",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Undecidable,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CentralRank {
    pub global_rank: usize,
    pub center_rank: usize,
    pub status: Status,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Centralizer {
    pub status: Status,
    pub reason: String,
}

/// One proper submodule and the place where its rank drops, if any.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubmoduleCheck {
    pub components: Vec<usize>,
    pub dim: usize,
    pub witness: Option<RankDrop>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankDrop {
    pub place: Place,
    pub sub_rank: usize,
    pub full_rank: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubtoriCheck {
    pub status: Status,
    pub decomposition: Option<IrreducibleDecomposition>,
    pub local_ranks: Vec<(Place, usize)>,
    pub submodules: Vec<SubmoduleCheck>,
    pub violating: Option<Vec<usize>>,
    pub reason: Option<String>,
}

/// Stored action data so that every witness can be recomputed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleData {
    pub n: usize,
    pub basis: Vec<Vec<String>>,
    pub galois_generators: Vec<Perm>,
    pub decomposition_generators: Vec<(Place, Perm)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmpleCertificate {
    pub verdict: Verdict,
    pub ambient: Ambient,
    pub places: Vec<Place>,
    pub condition_i: CentralRank,
    pub condition_ii: Centralizer,
    pub condition_iii: SubtoriCheck,
    pub places_used: Vec<PlaceProfile>,
    pub module: ModuleData,
}

pub fn is_s_ample(t: &TorusDatum, s: &PlaceSet) -> Result<AmpleCertificate> {
    s.validate(t.ambient, t.n())?;
    let places = s.places();
    let mut dec_gens = Vec::new();
    let mut profiles = Vec::new();
    for &v in &places {
        let (g, profs) = t.place_data(v)?;
        dec_gens.push((v, g));
        profiles.extend(profs);
    }
    let global = t.global_rank();
    let cond_i = CentralRank {
        global_rank: global,
        center_rank: t.ambient.center_rank(),
        status: if global == t.ambient.center_rank() { Status::Pass } else { Status::Fail },
    };
    let cond_ii = Centralizer {
        status: Status::Pass,
        reason: "maximal torus: its centralizer is itself, so the quotient is trivially compact"
            .into(),
    };
    let local_ranks: Vec<(Place, usize)> =
        dec_gens.iter().map(|(v, g)| (*v, fixed_dim(&t.module, std::slice::from_ref(g)))).collect();
    let cond_iii = match t.decompose_module() {
        Err(Error::Unsupported(why)) => SubtoriCheck {
            status: Status::Undecidable,
            decomposition: None,
            local_ranks: local_ranks.clone(),
            submodules: vec![],
            violating: None,
            reason: Some(why),
        },
        Err(e) => return Err(e),
        Ok(dec) if !dec.multiplicity_free => {
            let bad: Vec<usize> = dec
                .components
                .iter()
                .enumerate()
                .filter(|(_, c)| c.multiplicity != 1)
                .map(|(i, _)| i)
                .collect();
            SubtoriCheck {
                status: Status::Undecidable,
                decomposition: Some(dec),
                local_ranks: local_ranks.clone(),
                submodules: vec![],
                violating: None,
                reason: Some(format!(
                    "module is not multiplicity free (components {bad:?}); its submodules form a continuum"
                )),
            }
        }
        Ok(dec) => check_submodules(&dec, &dec_gens, &local_ranks)?,
    };
    let verdict = combine_verdict(cond_i.status, cond_iii.status);
    Ok(AmpleCertificate {
        verdict,
        ambient: t.ambient,
        places,
        condition_i: cond_i,
        condition_ii: cond_ii,
        condition_iii: cond_iii,
        places_used: profiles,
        module: ModuleData {
            n: t.n(),
            basis: basis_strings(&t.module),
            galois_generators: t.action.generators.clone(),
            decomposition_generators: dec_gens,
        },
    })
}

fn combine_verdict(i: Status, iii: Status) -> Verdict {
    if i == Status::Fail || iii == Status::Fail {
        Verdict::NotSAmple
    } else if iii == Status::Undecidable {
        Verdict::Undecidable
    } else {
        Verdict::SAmple
    }
}

fn check_submodules(
    dec: &IrreducibleDecomposition,
    dec_gens: &[(Place, Perm)],
    local_ranks: &[(Place, usize)],
) -> Result<SubtoriCheck> {
    let comps: Vec<Vec<Vec<BigRat>>> =
        dec.components.iter().map(|c| parse_basis(&c.basis)).collect::<Result<_>>()?;
    let r = comps.len();
    let mut subs = Vec::new();
    let mut violating = None;
    for mask in 0u64..(1u64 << r) - 1 {
        let idx: Vec<usize> = (0..r).filter(|i| mask >> i & 1 == 1).collect();
        let w: Vec<Vec<BigRat>> = idx.iter().flat_map(|&i| comps[i].clone()).collect();
        let mut witness = None;
        for ((v, g), (_, full)) in dec_gens.iter().zip(local_ranks) {
            let sub = fixed_dim(&w, std::slice::from_ref(g));
            if sub < *full {
                witness = Some(RankDrop { place: *v, sub_rank: sub, full_rank: *full });
                break;
            }
        }
        if witness.is_none() && violating.is_none() {
            violating = Some(idx.clone());
        }
        subs.push(SubmoduleCheck { components: idx, dim: w.len(), witness });
    }
    Ok(SubtoriCheck {
        status: if violating.is_some() { Status::Fail } else { Status::Pass },
        decomposition: Some(dec.clone()),
        local_ranks: local_ranks.to_vec(),
        submodules: subs,
        violating,
        reason: None,
    })
}

/// Recomputes every rank in a certificate from its stored data and returns
/// the verdict those ranks imply; errors if any stored number disagrees.
pub fn replay_certificate(c: &AmpleCertificate) -> Result<Verdict> {
    let mismatch = |what: &str| Err(Error::InvalidInput(format!("certificate replay: {what} disagrees")));
    let module = parse_basis(&c.module.basis)?;
    if fixed_dim(&module, &c.module.galois_generators) != c.condition_i.global_rank {
        return mismatch("global rank");
    }
    let status_i = if c.condition_i.global_rank == c.ambient.center_rank() {
        Status::Pass
    } else {
        Status::Fail
    };
    if status_i != c.condition_i.status {
        return mismatch("condition (i) status");
    }
    for ((v, g), (w, r)) in c.module.decomposition_generators.iter().zip(&c.condition_iii.local_ranks) {
        if v != w || fixed_dim(&module, std::slice::from_ref(g)) != *r {
            return mismatch("local rank");
        }
    }
    let status_iii = match (&c.condition_iii.decomposition, c.condition_iii.status) {
        (Some(dec), Status::Pass | Status::Fail) => {
            for comp in &dec.components {
                let b = parse_basis(&comp.basis)?;
                for g in &c.module.galois_generators {
                    if restricted_action(&b, g).is_none() {
                        return mismatch("component stability");
                    }
                }
            }
            let all: Vec<Vec<BigRat>> =
                dec.components.iter().map(|c| parse_basis(&c.basis)).collect::<Result<Vec<_>>>()?.concat();
            if span_rank(&all) != module.len() || all.len() != module.len() {
                return mismatch("component span");
            }
            let again =
                check_submodules(dec, &c.module.decomposition_generators, &c.condition_iii.local_ranks)?;
            if again.submodules != c.condition_iii.submodules {
                return mismatch("submodule witnesses");
            }
            again.status
        }
        (_, s) => s,
    };
    if status_iii != c.condition_iii.status {
        return mismatch("condition (iii) status");
    }
    let v = combine_verdict(status_i, status_iii);
    if v != c.verdict {
        return mismatch("verdict");
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::poly::ZPoly;

    fn alg(fs: &[&[i64]]) -> EtaleAlgebra {
        EtaleAlgebra::power_basis(fs.iter().map(|c| ZPoly::from_i64s(c)).collect()).unwrap()
    }

    #[test]
    fn ranks_of_examples() {
        let g = TorusDatum::build(&alg(&[&[1, 0, 1]]), Ambient::SL).unwrap();
        assert_eq!(g.global_rank(), 0);
        assert_eq!(g.local_rank(Place::Infinity).unwrap(), 0);
        assert_eq!(g.local_rank(Place::Prime(5)).unwrap(), 1);
        let c = TorusDatum::build(&alg(&[&[-1, 1, 0, 1]]), Ambient::SL).unwrap();
        assert_eq!(c.local_rank(Place::Infinity).unwrap(), 1);
        let cg = TorusDatum::build(&alg(&[&[-1, 1, 0, 1]]), Ambient::GL).unwrap();
        assert_eq!(cg.global_rank(), 1);
        let qq = TorusDatum::build(&alg(&[&[0, 1], &[-1, 1]]), Ambient::SL).unwrap();
        assert_eq!(qq.global_rank(), 1);
    }

    #[test]
    fn decompositions() {
        let c = TorusDatum::build(&alg(&[&[-1, 1, 0, 1]]), Ambient::SL).unwrap();
        let d = c.decompose_module().unwrap();
        assert_eq!(d.components.len(), 1);
        assert_eq!(d.components[0].dim, 2);
        assert!(d.multiplicity_free);
        let q = TorusDatum::build(&alg(&[&[1, -16, 20, -8, 1]]), Ambient::SL).unwrap();
        let d = q.decompose_module().unwrap();
        assert_eq!(d.components.iter().map(|c| c.dim).collect::<Vec<_>>(), vec![1, 1, 1]);
        assert!(d.multiplicity_free);
        let g = TorusDatum::build(&alg(&[&[1, 0, 1]]), Ambient::SL).unwrap();
        assert_eq!(g.decompose_module().unwrap().components.len(), 1);
        // GL of a C4 field: 1 + 1 + 2
        let c4 = TorusDatum::build(&alg(&[&[1, 1, 1, 1, 1]]), Ambient::GL).unwrap();
        let mut dims: Vec<usize> = c4.decompose_module().unwrap().components.iter().map(|c| c.dim).collect();
        dims.sort();
        assert_eq!(dims, vec![1, 1, 2]);
    }

    #[test]
    fn ample_verdicts() {
        let c = TorusDatum::build(&alg(&[&[-1, 1, 0, 1]]), Ambient::SL).unwrap();
        let cert = is_s_ample(&c, &PlaceSet::infinity()).unwrap();
        assert_eq!(cert.verdict, Verdict::SAmple);
        assert_eq!(replay_certificate(&cert).unwrap(), Verdict::SAmple);
        let g = TorusDatum::build(&alg(&[&[1, 0, 1]]), Ambient::SL).unwrap();
        let a = is_s_ample(&g, &PlaceSet::infinity()).unwrap();
        assert_eq!(a.verdict, Verdict::NotSAmple);
        assert_eq!(a.condition_iii.violating, Some(vec![]));
        let b = is_s_ample(&g, &PlaceSet::with_primes(&[5])).unwrap();
        assert_eq!(b.verdict, Verdict::SAmple);
        assert_eq!(replay_certificate(&b).unwrap(), Verdict::SAmple);
        assert!(matches!(
            is_s_ample(&g, &PlaceSet::with_primes(&[2])),
            Err(Error::RamifiedPlace { p: 2, .. })
        ));
    }

    #[test]
    fn non_multiplicity_free_is_undecidable() {
        let e = alg(&[&[1, 0, 1], &[1, 0, 1]]);
        let m = vec![
            vec![rat(1), rat(-1), rat(0), rat(0)],
            vec![rat(0), rat(0), rat(1), rat(-1)],
        ];
        let t = TorusDatum::with_module(&e, Ambient::SL, m).unwrap();
        let cert = is_s_ample(&t, &PlaceSet::with_primes(&[5])).unwrap();
        assert_eq!(cert.condition_i.status, Status::Pass);
        assert_eq!(cert.verdict, Verdict::Undecidable);
    }

    #[test]
    fn split_parts() {
        let g = TorusDatum::build(&alg(&[&[1, 0, 1]]), Ambient::SL).unwrap();
        let s = g.anisotropic_and_split_parts(None).unwrap();
        assert_eq!((s.split_dim, s.anisotropic_dim), (0, 1));
        let qq = TorusDatum::build(&alg(&[&[0, 1], &[-1, 1]]), Ambient::GL).unwrap();
        let s = qq.anisotropic_and_split_parts(None).unwrap();
        assert_eq!((s.split_dim, s.anisotropic_dim), (2, 0));
        let q = TorusDatum::build(&alg(&[&[1, -16, 20, -8, 1]]), Ambient::SL).unwrap();
        let s = q.anisotropic_and_split_parts(Some(Place::Infinity)).unwrap();
        assert_eq!(s.split_dim, 3);
    }

    #[test]
    fn place_sets() {
        let s = PlaceSet::parse("inf,5").unwrap();
        assert_eq!(s.places(), vec![Place::Infinity, Place::Prime(5)]);
        assert_eq!(s.to_string(), "inf,5");
        assert!(matches!(
            PlaceSet::parse("5").unwrap().validate(Ambient::SL, 2),
            Err(Error::InvalidPlaceSet(_))
        ));
    }
}
