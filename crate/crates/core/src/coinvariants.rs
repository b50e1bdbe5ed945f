//! Finite-level modules over `G(p^b)^t / G(p^N)^t` and their coinvariants, with
//! the inequality checks built on them.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::arith::pow;
use crate::congruence::SubgroupSpec;
use crate::coset::{act_on_function, is_g_invariant, CosetSpace, DEFAULT_DIM_CAP};
use crate::error::{Error, Result};
use crate::group::{ActingSubgroup, FiniteGroup};
use crate::linalg::{unit, FpMatrix, FpVector, Subspace};

/// How one group element acts on a module.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action {
    /// `e_i -> e_{perm[i]}`.
    Permutation(Vec<usize>),
    /// Column `m` is the image of `e_m`.
    Matrix(FpMatrix),
}

impl Action {
    pub fn apply(&self, v: &[u32], p: u32) -> FpVector {
        match self {
            Action::Permutation(perm) => {
                let mut out = vec![0; v.len()];
                for (i, &j) in perm.iter().enumerate() {
                    out[j] = (out[j] + v[i]) % p;
                }
                out
            }
            Action::Matrix(m) => m.apply(v),
        }
    }

    pub fn to_matrix(&self, p: u32) -> FpMatrix {
        match self {
            Action::Permutation(perm) => FpMatrix::permutation(p, perm),
            Action::Matrix(m) => m.clone(),
        }
    }

    /// `self * other` (apply `other` first).
    fn compose(&self, other: &Action, p: u32) -> Result<Action> {
        match (self, other) {
            (Action::Permutation(a), Action::Permutation(b)) => {
                Ok(Action::Permutation(b.iter().map(|&i| a[i]).collect()))
            }
            _ => Ok(Action::Matrix(self.to_matrix(p).mul(&other.to_matrix(p))?)),
        }
    }

    fn kron(&self, other: &Action, p: u32) -> Action {
        match (self, other) {
            (Action::Permutation(a), Action::Permutation(b)) => {
                let db = b.len();
                let mut perm = vec![0; a.len() * db];
                for (i, &ai) in a.iter().enumerate() {
                    for (j, &bj) in b.iter().enumerate() {
                        perm[i * db + j] = ai * db + bj;
                    }
                }
                Action::Permutation(perm)
            }
            _ => Action::Matrix(self.to_matrix(p).kron(&other.to_matrix(p))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Provenance {
    Trivial,
    Regular,
    Cyclic { seed: Option<u64> },
    Coset(String),
    Lattice(String),
    Tensor(Box<Provenance>, Box<Provenance>),
    Matrices,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Trivial => write!(f, "trivial"),
            Provenance::Regular => write!(f, "regular"),
            Provenance::Cyclic { seed: Some(s) } => write!(f, "cyclic[{s}]"),
            Provenance::Cyclic { seed: None } => write!(f, "cyclic"),
            Provenance::Coset(l) => write!(f, "coset[{l}]"),
            Provenance::Lattice(l) => write!(f, "lattice[{l}]"),
            Provenance::Tensor(a, b) => write!(f, "({a}) x ({b})"),
            Provenance::Matrices => write!(f, "matrices"),
        }
    }
}

type ActionFn = dyn Fn(usize) -> Result<Action> + Send + Sync;

/// A finite-dimensional representation of a [`FiniteGroup`] over `F_p`.
#[derive(Clone)]
pub struct GModule {
    p: u32,
    dim: usize,
    group: Arc<FiniteGroup>,
    provenance: Provenance,
    action: Arc<ActionFn>,
}

impl fmt::Debug for GModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GModule")
            .field("p", &self.p)
            .field("dim", &self.dim)
            .field("provenance", &self.provenance)
            .finish()
    }
}

impl GModule {
    pub fn trivial(group: Arc<FiniteGroup>) -> Self {
        GModule {
            p: group.p() as u32,
            dim: 1,
            group,
            provenance: Provenance::Trivial,
            action: Arc::new(|_| Ok(Action::Permutation(vec![0]))),
        }
    }

    /// `F_p[G]` with `G` acting by left multiplication.
    pub fn regular(group: Arc<FiniteGroup>) -> Self {
        let g2 = group.clone();
        GModule {
            p: group.p() as u32,
            dim: group.order(),
            provenance: Provenance::Regular,
            action: Arc::new(move |g| Ok(Action::Permutation(g2.left_table(g)))),
            group,
        }
    }

    /// `F_p[G/S]` on left cosets.
    pub fn left_coset_module(group: Arc<FiniteGroup>, sub: &ActingSubgroup) -> Result<Self> {
        group.check_subgroup(sub)?;
        let part = group.left_cosets(sub);
        let g2 = group.clone();
        Ok(GModule {
            p: group.p() as u32,
            dim: part.len(),
            provenance: Provenance::Coset(sub.label.clone()),
            action: Arc::new(move |g| {
                Ok(Action::Permutation(
                    part.reps
                        .iter()
                        .map(|&r| part.coset_of[g2.mul(g, r)] as usize)
                        .collect(),
                ))
            }),
            group,
        })
    }

    /// Module given by the matrices of [`FiniteGroup::generators`]; other elements
    /// act through their words.
    pub fn from_generator_matrices(
        group: Arc<FiniteGroup>,
        matrices: Vec<FpMatrix>,
    ) -> Result<Self> {
        if matrices.len() != group.generators().len() {
            return Err(Error::Parameter(format!(
                "{} matrices for {} generators",
                matrices.len(),
                group.generators().len()
            )));
        }
        let p = group.p() as u32;
        let dim = matrices.first().map_or(0, |m| m.rows());
        let mut inverses = Vec::new();
        for m in &matrices {
            if m.rows() != dim || m.cols() != dim || m.prime() != p {
                return Err(Error::Parameter(
                    "generator matrices must be square of equal size".into(),
                ));
            }
            inverses.push(m.inverse()?);
        }
        let g2 = group.clone();
        Ok(GModule {
            p,
            dim,
            provenance: Provenance::Matrices,
            action: Arc::new(move |g| {
                let mut acc = FpMatrix::identity(p, dim);
                for l in g2.word(g) {
                    let m = if l.inverse {
                        &inverses[l.generator]
                    } else {
                        &matrices[l.generator]
                    };
                    acc = acc.mul(m)?;
                }
                Ok(Action::Matrix(acc))
            }),
            group,
        })
    }

    /// A `G`-invariant subspace of `F_p[pZ_p/p^k]`, in the coordinates of its
    /// reduced basis. `group` must be a single copy.
    pub fn from_invariant_subspace(
        group: Arc<FiniteGroup>,
        space: CosetSpace,
        sub: Subspace,
        label: impl Into<String>,
    ) -> Result<Self> {
        if group.copies() != 1 || space.p() != group.p() || space.level() > group.depth() {
            return Err(Error::Context(
                "coset space does not match the group".into(),
            ));
        }
        if !is_g_invariant(&sub, &space)? {
            return Err(Error::Structural("subspace is not G-invariant".into()));
        }
        let p = group.p() as u32;
        let g2 = group.clone();
        let sub2 = sub.clone();
        Ok(GModule {
            p,
            dim: sub.dim(),
            provenance: Provenance::Lattice(label.into()),
            action: Arc::new(move |g| {
                let elem = g2.element(g)[0];
                let cols = sub2
                    .basis()
                    .iter()
                    .map(|b| {
                        let moved = act_on_function(&elem, b, &space)?;
                        Ok(sub2.pivots().iter().map(|&c| moved[c]).collect())
                    })
                    .collect::<Result<Vec<FpVector>>>()?;
                Ok(Action::Matrix(
                    FpMatrix::from_rows(p, sub2.dim(), &cols).transpose(),
                ))
            }),
            group,
        })
    }

    /// Diagonal action on `self ⊗ other`.
    pub fn tensor(&self, other: &GModule) -> Result<GModule> {
        if self.group.fingerprint() != other.group.fingerprint() {
            return Err(Error::Context(
                "tensor factors over different groups".into(),
            ));
        }
        let (a, b) = (self.action.clone(), other.action.clone());
        let p = self.p;
        Ok(GModule {
            p,
            dim: self.dim * other.dim,
            group: self.group.clone(),
            provenance: Provenance::Tensor(
                Box::new(self.provenance.clone()),
                Box::new(other.provenance.clone()),
            ),
            action: Arc::new(move |g| Ok(a(g)?.kron(&b(g)?, p))),
        })
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn action(&self, g: usize) -> Result<Action> {
        if g >= self.group.order() {
            return Err(Error::Parameter(format!("element {g} out of range")));
        }
        (self.action)(g)
    }

    pub fn matrix(&self, g: usize) -> Result<FpMatrix> {
        Ok(self.action(g)?.to_matrix(self.p))
    }

    /// Matrices of [`FiniteGroup::generators`].
    pub fn generator_matrices(&self) -> Result<Vec<FpMatrix>> {
        self.group
            .generators()
            .iter()
            .map(|&g| self.matrix(g))
            .collect()
    }

    /// Checks `rho(g h) = rho(g) rho(h)` on random pairs.
    pub fn spot_check_relations(&self, samples: usize, seed: u64) -> Result<bool> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.group.order();
        for _ in 0..samples {
            let (g, h) = (rng.gen_range(0..n), rng.gen_range(0..n));
            let lhs = self.action(self.group.mul(g, h))?;
            let rhs = self.action(g)?.compose(&self.action(h)?, self.p)?;
            if lhs.to_matrix(self.p) != rhs.to_matrix(self.p) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// The kernel of `M -> M_T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Relations {
    /// Permutation modules: `M_T` has one basis vector per orbit.
    Orbits(Vec<u32>),
    Span(Subspace),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoinvariantResult {
    pub subgroup: String,
    /// Dimension of the space the relations live in (`M`, or `F_p[T\G]` for cyclic modules).
    pub ambient_dim: usize,
    pub dim: usize,
    pub relations: Relations,
}

impl CoinvariantResult {
    /// Matrix of `ambient -> M_T`.
    pub fn projection_matrix(&self, p: u32) -> FpMatrix {
        let mut out = FpMatrix::zeros(p, self.dim, self.ambient_dim);
        match &self.relations {
            Relations::Orbits(orbit) => {
                for (i, &o) in orbit.iter().enumerate() {
                    out.set(o as usize, i, 1);
                }
            }
            Relations::Span(rel) => {
                for i in 0..self.ambient_dim {
                    for (r, x) in rel
                        .quotient_coordinates(&unit(self.ambient_dim, i))
                        .into_iter()
                        .enumerate()
                    {
                        out.set(r, i, x);
                    }
                }
            }
        }
        out
    }
}

fn orbits(actions: &[Vec<usize>], n: usize) -> (usize, Vec<u32>) {
    let mut orbit = vec![u32::MAX; n];
    let mut count = 0u32;
    for start in 0..n {
        if orbit[start] != u32::MAX {
            continue;
        }
        orbit[start] = count;
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            for a in actions {
                // orbits of a group are closed under inverses, so forward edges suffice
                let y = a[x];
                if orbit[y] == u32::MAX {
                    orbit[y] = count;
                    queue.push_back(y);
                }
            }
        }
        count += 1;
    }
    (count as usize, orbit)
}

/// Modules whose coinvariants can be computed.
pub trait Coinvariants: Send + Sync {
    fn group(&self) -> &Arc<FiniteGroup>;
    fn label(&self) -> String;
    fn module_dim(&self) -> Result<usize>;
    fn coinvariants(&self, sub: &ActingSubgroup) -> Result<CoinvariantResult>;
    /// Whether `m -> g m` carries the relations for `sub` onto those for `g sub g^{-1}`.
    fn conjugation_witness(&self, sub: &ActingSubgroup, g: usize) -> Result<bool>;

    fn coinvariant_dim(&self, sub: &ActingSubgroup) -> Result<usize> {
        Ok(self.coinvariants(sub)?.dim)
    }
}

/// Coinvariants from the generators of `sub`, using orbits for permutation modules.
pub fn coinvariants(m: &GModule, sub: &ActingSubgroup) -> Result<CoinvariantResult> {
    coinvariants_over(m, sub, &sub.generators, false)
}

/// Coinvariants by dense elimination, from the generators of `sub`.
pub fn coinvariants_dense(m: &GModule, sub: &ActingSubgroup) -> Result<CoinvariantResult> {
    coinvariants_over(m, sub, &sub.generators, true)
}

/// Coinvariants using every element of `sub` rather than its generators.
pub fn coinvariants_from_elements(m: &GModule, sub: &ActingSubgroup) -> Result<CoinvariantResult> {
    coinvariants_over(m, sub, &sub.elements, true)
}

fn coinvariants_over(
    m: &GModule,
    sub: &ActingSubgroup,
    elems: &[usize],
    dense: bool,
) -> Result<CoinvariantResult> {
    m.group.check_subgroup(sub)?;
    let actions = elems
        .iter()
        .map(|&g| m.action(g))
        .collect::<Result<Vec<_>>>()?;
    let perms: Option<Vec<Vec<usize>>> = actions
        .iter()
        .map(|a| match a {
            Action::Permutation(p) => Some(p.clone()),
            Action::Matrix(_) => None,
        })
        .collect();
    if let (Some(perms), false) = (perms, dense) {
        let (count, orbit) = orbits(&perms, m.dim);
        return Ok(CoinvariantResult {
            subgroup: sub.label.clone(),
            ambient_dim: m.dim,
            dim: count,
            relations: Relations::Orbits(orbit),
        });
    }
    let p = m.p;
    let mut rows = Vec::new();
    for a in &actions {
        let mat = a.to_matrix(p).minus_identity();
        for j in 0..m.dim {
            let col = mat.column(j);
            if col.iter().any(|&x| x != 0) {
                rows.push(col);
            }
        }
    }
    let rel = Subspace::span(p, m.dim, rows);
    Ok(CoinvariantResult {
        subgroup: sub.label.clone(),
        ambient_dim: m.dim,
        dim: m.dim - rel.dim(),
        relations: Relations::Span(rel),
    })
}

impl Coinvariants for GModule {
    fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    fn label(&self) -> String {
        self.provenance.to_string()
    }

    fn module_dim(&self) -> Result<usize> {
        Ok(self.dim)
    }

    fn coinvariants(&self, sub: &ActingSubgroup) -> Result<CoinvariantResult> {
        coinvariants(self, sub)
    }

    fn conjugation_witness(&self, sub: &ActingSubgroup, g: usize) -> Result<bool> {
        let conj = self.group.conjugate(sub, g);
        let before = coinvariants(self, sub)?;
        let after = coinvariants(self, &conj)?;
        let act = self.action(g)?;
        match (&before.relations, &after.relations, &act) {
            (Relations::Orbits(a), Relations::Orbits(b), Action::Permutation(perm)) => {
                let mut image = vec![u32::MAX; before.dim];
                for (i, &o) in a.iter().enumerate() {
                    let t = b[perm[i]];
                    if image[o as usize] == u32::MAX {
                        image[o as usize] = t;
                    } else if image[o as usize] != t {
                        return Ok(false);
                    }
                }
                let mut seen = image.clone();
                seen.sort_unstable();
                seen.dedup();
                Ok(seen.len() == after.dim && before.dim == after.dim)
            }
            _ => {
                let rel = |r: &CoinvariantResult| match &r.relations {
                    Relations::Span(s) => s.clone(),
                    Relations::Orbits(_) => unreachable!(),
                };
                let (a, b) = (
                    rel(&coinvariants_dense(self, sub)?),
                    rel(&coinvariants_dense(self, &conj)?),
                );
                Ok(a.map(self.dim, |v| act.apply(v, self.p)) == b)
            }
        }
    }
}

/// Sparse element of `F_p[G]`: `(group index, coefficient)` pairs.
pub type SparseElement = Vec<(usize, u32)>;

/// `F_p[G] / sum_r F_p[G] x_r`, with `G` acting by left multiplication.
#[derive(Debug, Clone)]
pub struct CyclicModule {
    group: Arc<FiniteGroup>,
    relators: Vec<SparseElement>,
    seed: Option<u64>,
    label: String,
    dim_cap: usize,
}

impl CyclicModule {
    pub fn from_relators(
        group: Arc<FiniteGroup>,
        relators: Vec<SparseElement>,
        label: impl Into<String>,
    ) -> Result<Self> {
        let p = group.p() as u32;
        let n = group.order();
        let mut clean = Vec::new();
        for r in relators {
            let mut acc: BTreeMap<usize, u32> = BTreeMap::new();
            for (g, c) in r {
                if g >= n {
                    return Err(Error::Parameter(format!("element {g} out of range")));
                }
                let e = acc.entry(g).or_insert(0);
                *e = (*e + c) % p;
            }
            let r: SparseElement = acc.into_iter().filter(|&(_, c)| c != 0).collect();
            if !r.is_empty() {
                clean.push(r);
            }
        }
        Ok(CyclicModule {
            group,
            relators: clean,
            seed: None,
            label: label.into(),
            dim_cap: DEFAULT_DIM_CAP,
        })
    }

    pub fn regular(group: Arc<FiniteGroup>) -> Self {
        Self::from_relators(group, Vec::new(), "regular").expect("no relators")
    }

    /// Relators `s - 1` for every generator `s`: the trivial module.
    pub fn trivial(group: Arc<FiniteGroup>) -> Self {
        let p = group.p() as u32;
        let rels = group
            .generators()
            .iter()
            .map(|&s| vec![(s, 1), (0, p - 1)])
            .collect();
        Self::from_relators(group, rels, "trivial").expect("valid relators")
    }

    /// One relator `x = sum_r c_r (h_r - 1)` with one to three random terms.
    pub fn random(group: Arc<FiniteGroup>, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = group.p() as u32;
        let n = group.order();
        loop {
            let terms = rng.gen_range(1..=3);
            let mut x = SparseElement::new();
            for _ in 0..terms {
                let h = rng.gen_range(1..n.max(2));
                let c = rng.gen_range(1..p);
                x.push((h, c));
                x.push((0, p - c));
            }
            let m = Self::from_relators(group.clone(), vec![x], format!("cyclic[{seed}]"))
                .expect("valid relators");
            if !m.relators.is_empty() || n == 1 {
                return CyclicModule {
                    seed: Some(seed),
                    ..m
                };
            }
        }
    }

    pub fn with_dim_cap(mut self, cap: usize) -> Self {
        self.dim_cap = cap;
        self
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn relators(&self) -> &[SparseElement] {
        &self.relators
    }

    fn check_cap(&self, what: &str, dim: usize) -> Result<()> {
        if dim > self.dim_cap {
            return Err(Error::Resource {
                what: what.into(),
                required: dim as u64,
                cap: self.dim_cap as u64,
            });
        }
        Ok(())
    }

    /// Span of the images of `h x_r` in `F_p[T\G]`, one per coset `T h`.
    fn relation_space(
        &self,
        sub: &ActingSubgroup,
    ) -> Result<(usize, Subspace, Arc<crate::group::CosetPartition>)> {
        self.group.check_subgroup(sub)?;
        let part = self.group.right_cosets_cached(sub);
        let n = part.len();
        self.check_cap("coset space", n)?;
        let p = self.group.p() as u32;
        let mut rows = Vec::with_capacity(n * self.relators.len());
        for &h in &part.reps {
            for r in &self.relators {
                let mut v = vec![0u32; n];
                for &(g, c) in r {
                    let t = part.coset_of[self.group.mul(h, g)] as usize;
                    v[t] = (v[t] + c) % p;
                }
                rows.push(v);
            }
        }
        Ok((n, Subspace::span(p, n, rows), part))
    }

    /// The module with an explicit basis, acting through the quotient of `F_p[G]`.
    pub fn to_explicit(&self) -> Result<GModule> {
        let n = self.group.order();
        self.check_cap("regular module", n)?;
        let trivial = self.group.trivial();
        let (_, rel, _) = self.relation_space(&trivial)?;
        let free = rel.free_columns();
        let p = self.group.p() as u32;
        let g2 = self.group.clone();
        let dim = free.len();
        let action = move |g: usize| {
            let cols: Vec<FpVector> = free
                .iter()
                .map(|&f| rel.quotient_coordinates(&unit(n, g2.mul(g, f))))
                .collect();
            Ok(Action::Matrix(
                FpMatrix::from_rows(p, dim, &cols).transpose(),
            ))
        };
        Ok(GModule {
            p,
            dim,
            group: self.group.clone(),
            provenance: Provenance::Cyclic { seed: self.seed },
            action: Arc::new(action),
        })
    }
}

impl Coinvariants for CyclicModule {
    fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    fn label(&self) -> String {
        self.label.clone()
    }

    fn module_dim(&self) -> Result<usize> {
        Ok(self.coinvariants(&self.group.trivial())?.dim)
    }

    fn coinvariants(&self, sub: &ActingSubgroup) -> Result<CoinvariantResult> {
        let (n, rel, _) = self.relation_space(sub)?;
        Ok(CoinvariantResult {
            subgroup: sub.label.clone(),
            ambient_dim: n,
            dim: n - rel.dim(),
            relations: Relations::Span(rel),
        })
    }

    fn conjugation_witness(&self, sub: &ActingSubgroup, g: usize) -> Result<bool> {
        let conj = self.group.conjugate(sub, g);
        let (n, rel, part) = self.relation_space(sub)?;
        let (n2, rel2, part2) = self.relation_space(&conj)?;
        if n != n2 {
            return Ok(false);
        }
        // T h -> (g T g^{-1}) g h
        let mut image = vec![usize::MAX; n];
        for x in 0..self.group.order() {
            let t = part2.coset_of[self.group.mul(g, x)] as usize;
            let s = part.coset_of[x] as usize;
            if image[s] == usize::MAX {
                image[s] = t;
            } else if image[s] != t {
                return Ok(false);
            }
        }
        let p = self.group.p() as u32;
        let mapped = rel.map(n, |v| Action::Permutation(image.clone()).apply(v, p));
        Ok(mapped == rel2)
    }
}

/// `eta = (2p^2 + 1) / p^2`.
pub fn eta(p: u64) -> BigRational {
    let p2 = BigInt::from(p * p);
    BigRational::new(BigInt::from(2) * &p2 + 1, p2)
}

fn rpow(x: &BigRational, e: i64) -> BigRational {
    if e >= 0 {
        num_traits::pow(x.clone(), e as usize)
    } else {
        num_traits::pow(x.recip(), (-e) as usize)
    }
}

fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InclusionExclusionReport {
    pub a: String,
    pub b: String,
    pub dim_a: usize,
    pub dim_b: usize,
    pub dim_meet: usize,
    pub dim_join: usize,
    pub holds: bool,
}

/// `dim M_A + dim M_B <= dim M_{A ∩ B} + dim M_{<A, B>}`.
pub fn inclusion_exclusion_check<M: Coinvariants + ?Sized>(
    m: &M,
    a: &ActingSubgroup,
    b: &ActingSubgroup,
) -> Result<InclusionExclusionReport> {
    let g = m.group();
    let dim_a = m.coinvariant_dim(a)?;
    let dim_b = m.coinvariant_dim(b)?;
    let dim_meet = m.coinvariant_dim(&g.intersection(a, b))?;
    let dim_join = m.coinvariant_dim(&g.join(a, b))?;
    Ok(InclusionExclusionReport {
        a: a.label.clone(),
        b: b.label.clone(),
        dim_a,
        dim_b,
        dim_meet,
        dim_join,
        holds: dim_a + dim_b <= dim_meet + dim_join,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjugationReport {
    pub subgroup: String,
    pub element: usize,
    pub dim: usize,
    pub dim_conjugate: usize,
    pub witness: bool,
    pub holds: bool,
}

/// `dim M_{g S g^{-1}} = dim M_S`, witnessed by `m -> g m`.
pub fn conjugation_invariance_check<M: Coinvariants + ?Sized>(
    m: &M,
    sub: &ActingSubgroup,
    g: usize,
) -> Result<ConjugationReport> {
    let conj = m.group().conjugate(sub, g);
    let dim = m.coinvariant_dim(sub)?;
    let dim_conjugate = m.coinvariant_dim(&conj)?;
    let witness = m.conjugation_witness(sub, g)?;
    Ok(ConjugationReport {
        subgroup: sub.label.clone(),
        element: g,
        dim,
        dim_conjugate,
        witness,
        holds: witness && dim == dim_conjugate,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecursionReport {
    pub l: u32,
    pub j: u32,
    pub dim_t: usize,
    pub dim_lower_j: usize,
    pub dim_lower_lj: usize,
    pub holds: bool,
}

/// `3 dim M_{T(l,j)} <= 2 dim M_{T(l,j-1)} + dim M_{T(l-1,j-1)}`.
pub fn recursion_check<M: Coinvariants + ?Sized>(m: &M, l: u32, j: u32) -> Result<RecursionReport> {
    let g = m.group();
    if j < 2 || j >= l || l + 1 > g.depth() {
        return Err(Error::Parameter(format!(
            "need 2 <= j <= l-1 and l <= N-1, got l={l} j={j} N={}",
            g.depth()
        )));
    }
    let dim_t = m.coinvariant_dim(&g.spec_subgroup(SubgroupSpec::Tlj { l, j })?)?;
    let dim_lower_j = m.coinvariant_dim(&g.spec_subgroup(SubgroupSpec::Tlj { l, j: j - 1 })?)?;
    let dim_lower_lj =
        m.coinvariant_dim(&g.spec_subgroup(SubgroupSpec::Tlj { l: l - 1, j: j - 1 })?)?;
    Ok(RecursionReport {
        l,
        j,
        dim_t,
        dim_lower_j,
        dim_lower_lj,
        holds: 3 * dim_t <= 2 * dim_lower_j + dim_lower_lj,
    })
}

/// `max_{1 <= l <= lmax} dim M_{G(p^l)} / p^{2l}`.
pub fn minimal_constant<M: Coinvariants + ?Sized>(m: &M, lmax: u32) -> Result<BigRational> {
    let g = m.group();
    let p = g.p();
    let mut c = BigRational::zero();
    for l in 1..=lmax {
        let d = m.coinvariant_dim(&g.spec_subgroup(SubgroupSpec::G { k: l })?)?;
        let r = BigRational::new(BigInt::from(d), BigInt::from(pow(p, 2 * l)));
        if r > c {
            c = r;
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropSingleReport {
    pub k: u32,
    /// Minimal hypothesis constant, as an exact fraction.
    pub constant: String,
    pub dim: usize,
    pub bound: f64,
    pub ratio: f64,
    pub holds: bool,
}

/// With `C` minimal for `dim M_{G(p^l)} <= C p^{2l}` (`l <= k`), compares
/// `dim M_{T(p^k)}` against `C eta^{k-2} p^{2k}`.
pub fn prop_single_check<M: Coinvariants + ?Sized>(m: &M, k: u32) -> Result<PropSingleReport> {
    let g = m.group();
    if k == 0 || k + 1 > g.depth() {
        return Err(Error::Parameter(format!("need 1 <= k <= N-1, got k={k}")));
    }
    let p = g.p();
    let c = minimal_constant(m, k)?;
    let dim = m.coinvariant_dim(&g.spec_subgroup(SubgroupSpec::T { k })?)?;
    let bound =
        &c * rpow(&eta(p), k as i64 - 2) * BigRational::from_integer(BigInt::from(pow(p, 2 * k)));
    let lhs = BigRational::from_integer(BigInt::from(dim));
    Ok(PropSingleReport {
        k,
        constant: c.to_string(),
        dim,
        bound: to_f64(&bound),
        ratio: if bound.is_zero() {
            f64::INFINITY
        } else {
            to_f64(&(&lhs / &bound))
        },
        holds: lhs <= bound,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndhypRow {
    pub l: u32,
    pub j: u32,
    pub dim: usize,
    pub bound: f64,
    pub ratio: f64,
    /// `j = 0` rows are reported only.
    pub asserted: bool,
    pub holds: bool,
}

/// `dim M_{T(l,j)}` against `C eta^{j-1} p^{2l}` for `l <= lmax`, `0 <= j <= l-1`.
pub fn indhyp_sweep<M: Coinvariants + ?Sized>(m: &M, lmax: u32) -> Result<Vec<IndhypRow>> {
    let g = m.group();
    if lmax == 0 || lmax + 1 > g.depth() {
        return Err(Error::Parameter(format!(
            "need 1 <= lmax <= N-1, got {lmax}"
        )));
    }
    let p = g.p();
    let c = minimal_constant(m, lmax)?;
    let mut rows = Vec::new();
    for l in 1..=lmax {
        for j in 0..l {
            let dim = m.coinvariant_dim(&g.spec_subgroup(SubgroupSpec::Tlj { l, j })?)?;
            let bound = &c
                * rpow(&eta(p), j as i64 - 1)
                * BigRational::from_integer(BigInt::from(pow(p, 2 * l)));
            let lhs = BigRational::from_integer(BigInt::from(dim));
            rows.push(IndhypRow {
                l,
                j,
                dim,
                bound: to_f64(&bound),
                ratio: to_f64(&(&lhs / &bound)),
                asserted: j >= 1,
                holds: lhs <= bound,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoinvarlemRow {
    pub k: Vec<u32>,
    pub kappa: u32,
    pub dim: usize,
    pub index: usize,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoinvarlemReport {
    pub module_dim: usize,
    pub rows: Vec<CoinvarlemRow>,
    pub bounded_by_module: bool,
    pub monotone: bool,
    /// Least-squares slope of `log_p dim M_T` against `log_p |G : T|`.
    pub fitted_exponent: f64,
}

impl CoinvarlemReport {
    pub fn holds(&self) -> bool {
        self.bounded_by_module && self.monotone
    }
}

/// `dim M_{T_k} / (eta^kappa |G : T_k|)` over all `k` in `{1..N}^t`, `kappa = min k_i`.
pub fn coinvarlem_product_check<M: Coinvariants + ?Sized>(m: &M) -> Result<CoinvarlemReport> {
    let g = m.group();
    let t = g.copies();
    let n = g.depth();
    let p = g.p();
    let module_dim = m.module_dim()?;
    let mut ks: Vec<Vec<u32>> = vec![Vec::new()];
    for _ in 0..t {
        ks = ks
            .into_iter()
            .flat_map(|k| {
                (1..=n).map(move |x| {
                    let mut k = k.clone();
                    k.push(x);
                    k
                })
            })
            .collect();
    }
    let mut rows = Vec::new();
    for k in &ks {
        let specs: Vec<SubgroupSpec> = k.iter().map(|&k| SubgroupSpec::T { k }).collect();
        let sub = g.product_subgroup(&specs)?;
        let dim = m.coinvariant_dim(&sub)?;
        let index = g.order() / sub.order();
        let kappa = *k.iter().min().unwrap();
        let denom = rpow(&eta(p), kappa as i64) * BigRational::from_integer(BigInt::from(index));
        rows.push(CoinvarlemRow {
            k: k.clone(),
            kappa,
            dim,
            index,
            ratio: to_f64(&(BigRational::from_integer(BigInt::from(dim)) / denom)),
        });
    }
    let bounded_by_module = rows.iter().all(|r| r.dim <= module_dim);
    let monotone = rows.iter().all(|a| {
        rows.iter()
            .filter(|b| a.k.iter().zip(&b.k).all(|(x, y)| x <= y))
            .all(|b| a.dim <= b.dim)
    });
    let lp = (p as f64).ln();
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.dim > 0)
        .map(|r| ((r.index as f64).ln() / lp, (r.dim as f64).ln() / lp))
        .collect();
    Ok(CoinvarlemReport {
        module_dim,
        rows,
        bounded_by_module,
        monotone,
        fitted_exponent: slope(&pts),
    })
}

fn slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        f64::NAN
    } else {
        sxy / sxx
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShapiroReport {
    pub k: u32,
    pub induced_dim: usize,
    pub restricted_dim: usize,
    pub holds: bool,
}

/// `dim (M ⊗ F_p[G/H(p^k)])_G = dim M_{H(p^k)}`.
pub fn shapiro_h0_check(m: &GModule, k: u32) -> Result<ShapiroReport> {
    let g = m.group();
    let h = g.spec_subgroup(SubgroupSpec::H { k })?;
    let induced = m.tensor(&GModule::left_coset_module(g.clone(), &h)?)?;
    let induced_dim = coinvariants(&induced, &g.whole())?.dim;
    let restricted_dim = coinvariants(m, &h)?.dim;
    Ok(ShapiroReport {
        k,
        induced_dim,
        restricted_dim,
        holds: induced_dim == restricted_dim,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarrisRow {
    pub n: u32,
    pub dim: usize,
    pub index: usize,
    pub log_p_dim: f64,
    pub dim_over_index: f64,
}

/// Growth of `dim M_{G(p^n)}` for `n <= nmax`. Report only.
pub fn harris_report<M: Coinvariants + ?Sized>(m: &M, nmax: u32) -> Result<Vec<HarrisRow>> {
    let g = m.group();
    let p = g.p() as f64;
    (1..=nmax)
        .map(|n| {
            let sub = g.spec_subgroup(SubgroupSpec::G { k: n })?;
            let dim = m.coinvariant_dim(&sub)?;
            let index = g.order() / sub.order();
            Ok(HarrisRow {
                n,
                dim,
                index,
                log_p_dim: (dim as f64).ln() / p.ln(),
                dim_over_index: dim as f64 / index as f64,
            })
        })
        .collect()
}

/// `(ln 3p^2 - ln(2p^2 + 1)) / (2 ln p)`.
pub fn delta_of_p(p: u64) -> f64 {
    let p = p as f64;
    ((3.0 * p * p).ln() - (2.0 * p * p + 1.0).ln()) / (2.0 * p.ln())
}

/// `(p, delta(p))` for primes up to `pmax`.
pub fn delta_table(pmax: u64) -> Result<Vec<(u64, f64)>> {
    let rows: Vec<(u64, f64)> = (2..=pmax)
        .filter(|&p| crate::arith::is_prime(p))
        .map(|p| (p, delta_of_p(p)))
        .collect();
    if rows.is_empty() {
        return Err(Error::Parameter(format!("no primes up to {pmax}")));
    }
    Ok(rows)
}

/// Prime `<= pmax` minimizing `delta`.
pub fn delta_argmin(pmax: u64) -> Result<(u64, f64)> {
    let rows = delta_table(pmax)?;
    Ok(rows.into_iter().fold(
        (0, f64::INFINITY),
        |best, r| if r.1 < best.1 { r } else { best },
    ))
}

/// `M ⊗ L` with the diagonal action.
pub fn tensor_module(m: &GModule, l: &GModule) -> Result<GModule> {
    m.tensor(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::congruence::DEFAULT_ENUM_CAP;

    fn group(p: u64, n: u32) -> Arc<FiniteGroup> {
        Arc::new(FiniteGroup::new(p, n, 1, 1, DEFAULT_ENUM_CAP).unwrap())
    }

    fn subgroups(g: &FiniteGroup) -> Vec<ActingSubgroup> {
        let n = g.depth();
        let mut out = vec![g.whole(), g.trivial()];
        for k in 1..=n {
            for spec in [
                SubgroupSpec::G { k },
                SubgroupSpec::H { k },
                SubgroupSpec::T { k },
            ] {
                out.push(g.spec_subgroup(spec).unwrap());
            }
        }
        for l in 2..n {
            for j in 1..l {
                out.push(g.spec_subgroup(SubgroupSpec::Tlj { l, j }).unwrap());
                out.push(g.spec_subgroup(SubgroupSpec::TljUpper { l, j }).unwrap());
            }
        }
        out
    }

    #[test]
    fn trivial_and_regular_modules() {
        for (p, n) in [(3u64, 2u32), (2, 3), (3, 3)] {
            let g = group(p, n);
            let triv = GModule::trivial(g.clone());
            let reg = GModule::regular(g.clone());
            let ctriv = CyclicModule::trivial(g.clone());
            let creg = CyclicModule::regular(g.clone());
            for sub in subgroups(&g) {
                assert_eq!(coinvariants(&triv, &sub).unwrap().dim, 1);
                assert_eq!(ctriv.coinvariant_dim(&sub).unwrap(), 1);
                let index = g.order() / sub.order();
                assert_eq!(coinvariants(&reg, &sub).unwrap().dim, index);
                assert_eq!(creg.coinvariant_dim(&sub).unwrap(), index);
            }
            assert_eq!(coinvariants(&reg, &g.whole()).unwrap().dim, 1);
            for k in 1..=n {
                let sub = g.spec_subgroup(SubgroupSpec::G { k }).unwrap();
                assert_eq!(
                    coinvariants(&reg, &sub).unwrap().dim as u64,
                    pow(p, 3 * (k - 1))
                );
            }
        }
    }

    #[test]
    fn fast_and_explicit_paths_agree() {
        for (p, n) in [(3u64, 2u32), (2, 3)] {
            let g = group(p, n);
            for seed in 0..8 {
                let cyc = CyclicModule::random(g.clone(), seed);
                let explicit = cyc.to_explicit().unwrap();
                assert_eq!(cyc.module_dim().unwrap(), explicit.dim());
                assert!(explicit.spot_check_relations(10, seed).unwrap());
                for sub in subgroups(&g) {
                    let fast = cyc.coinvariant_dim(&sub).unwrap();
                    assert_eq!(
                        coinvariants(&explicit, &sub).unwrap().dim,
                        fast,
                        "{}",
                        sub.label
                    );
                    assert_eq!(
                        coinvariants_from_elements(&explicit, &sub).unwrap().dim,
                        fast
                    );
                }
            }
            let reg = GModule::regular(g.clone());
            for sub in subgroups(&g).into_iter().take(6) {
                assert_eq!(
                    coinvariants(&reg, &sub).unwrap().dim,
                    coinvariants_dense(&reg, &sub).unwrap().dim
                );
            }
        }
    }

    #[test]
    fn random_modules_are_reproducible() {
        let g = group(3, 3);
        let a = CyclicModule::random(g.clone(), 42);
        let b = CyclicModule::random(g.clone(), 42);
        assert_eq!(a.relators(), b.relators());
        assert_eq!(a.seed(), Some(42));
        for r in a.relators() {
            let total: u32 = r.iter().map(|&(_, c)| c).sum();
            assert_eq!(total % 3, 0, "relator lies in the augmentation ideal");
        }
    }

    #[test]
    fn projection_kills_relations() {
        let g = group(3, 2);
        let m = CyclicModule::random(g.clone(), 3).to_explicit().unwrap();
        let sub = g.spec_subgroup(SubgroupSpec::T { k: 1 }).unwrap();
        let res = coinvariants_dense(&m, &sub).unwrap();
        let proj = res.projection_matrix(3);
        assert_eq!(proj.rank(), res.dim);
        for s in &sub.generators {
            let d = m.matrix(*s).unwrap().minus_identity();
            assert!(proj
                .mul(&d)
                .unwrap()
                .row_vectors()
                .iter()
                .flatten()
                .all(|&x| x == 0));
        }
    }

    #[test]
    fn level_mismatch_is_a_context_error() {
        let g = group(3, 2);
        let other = group(3, 3);
        let sub = other.whole();
        assert!(matches!(
            coinvariants(&GModule::trivial(g.clone()), &sub),
            Err(Error::Context(_))
        ));
        assert!(matches!(
            CyclicModule::regular(g).coinvariants(&sub),
            Err(Error::Context(_))
        ));
    }

    #[test]
    fn inclusion_exclusion_and_conjugation() {
        let g = group(3, 3);
        let a = g.spec_subgroup(SubgroupSpec::Tlj { l: 2, j: 1 }).unwrap();
        let b = g
            .spec_subgroup(SubgroupSpec::TljUpper { l: 2, j: 1 })
            .unwrap();
        let triv = GModule::trivial(g.clone());
        let r = inclusion_exclusion_check(&triv, &a, &b).unwrap();
        assert_eq!((r.dim_a + r.dim_b, r.dim_meet + r.dim_join), (2, 2));
        for seed in 0..10 {
            let m = CyclicModule::random(g.clone(), seed);
            let same = inclusion_exclusion_check(&m, &a, &a).unwrap();
            assert_eq!(same.dim_a + same.dim_b, same.dim_meet + same.dim_join);
            assert!(inclusion_exclusion_check(&m, &a, &b).unwrap().holds);
            let t = g.spec_subgroup(SubgroupSpec::Tlj { l: 3, j: 2 }).unwrap();
            let nj = g.embed(0, &g.context().upper(3)).unwrap();
            for x in [0, nj, (seed as usize * 97) % g.order()] {
                assert!(conjugation_invariance_check(&m, &t, x).unwrap().holds);
            }
        }
        let reg = GModule::regular(g.clone());
        let expl = CyclicModule::random(g.clone(), 1).to_explicit().unwrap();
        for x in [0, 5, 300] {
            assert!(conjugation_invariance_check(&reg, &a, x).unwrap().holds);
            assert!(conjugation_invariance_check(&expl, &a, x).unwrap().holds);
        }
    }

    #[test]
    fn recursion_and_prop_single_basics() {
        let g = group(3, 4);
        let triv = CyclicModule::trivial(g.clone());
        let r = recursion_check(&triv, 3, 2).unwrap();
        assert_eq!((3 * r.dim_t, 2 * r.dim_lower_j + r.dim_lower_lj), (3, 3));
        assert!(recursion_check(&triv, 3, 1).is_err());
        assert!(recursion_check(&triv, 4, 2).is_err());
        let reg = CyclicModule::regular(g.clone());
        assert!(recursion_check(&reg, 3, 2).unwrap().holds);
        for k in 2..=3 {
            assert!(prop_single_check(&triv, k).unwrap().holds);
            assert!(prop_single_check(&reg, k).unwrap().holds);
        }
        assert!(!prop_single_check(&triv, 1).unwrap().holds);
        assert_eq!(
            minimal_constant(&triv, 3).unwrap(),
            BigRational::new(1.into(), 9.into())
        );
    }

    #[test]
    fn indhyp_rows() {
        let g = group(3, 4);
        let rows = indhyp_sweep(&CyclicModule::random(g, 0), 3).unwrap();
        assert_eq!(rows.len(), 6);
        assert!(rows.iter().filter(|r| r.asserted).all(|r| r.holds));
    }

    #[test]
    fn shapiro() {
        let g = group(3, 3);
        for k in 1..=3 {
            assert!(
                shapiro_h0_check(&GModule::trivial(g.clone()), k)
                    .unwrap()
                    .holds
            );
            assert!(
                shapiro_h0_check(&GModule::regular(g.clone()), k)
                    .unwrap()
                    .holds
            );
        }
        let triv = shapiro_h0_check(&GModule::trivial(g.clone()), 2).unwrap();
        assert_eq!(triv.induced_dim, 1);
        let m = CyclicModule::random(g.clone(), 9).to_explicit().unwrap();
        assert!(shapiro_h0_check(&m, 2).unwrap().holds);
    }

    #[test]
    fn tensor_with_lattice() {
        let g = group(3, 2);
        let space = CosetSpace::new(3, 2).unwrap();
        let f2 = crate::coset::filtration_f(2, &space).unwrap();
        let l = GModule::from_invariant_subspace(g.clone(), space, f2, "F(2)").unwrap();
        assert!(l.spot_check_relations(20, 0).unwrap());
        let m = CyclicModule::random(g.clone(), 4).to_explicit().unwrap();
        let t = tensor_module(&m, &l).unwrap();
        assert_eq!(t.dim(), m.dim() * 2);
        assert!(t.spot_check_relations(10, 1).unwrap());
        let bad = Subspace::span(3, 3, vec![vec![1, 0, 0]]);
        assert!(GModule::from_invariant_subspace(g, space, bad, "x").is_err());
    }

    #[test]
    fn product_group() {
        let g = Arc::new(FiniteGroup::new(3, 2, 2, 1, DEFAULT_ENUM_CAP).unwrap());
        let m = CyclicModule::random(g.clone(), 0);
        let r = coinvarlem_product_check(&m).unwrap();
        assert_eq!(r.rows.len(), 4);
        assert!(r.holds());
        let reg = coinvarlem_product_check(&CyclicModule::regular(g)).unwrap();
        assert!(reg.rows.iter().all(|row| row.dim == row.index));
    }

    #[test]
    fn delta() {
        assert!((delta_of_p(2) - 0.2075187496).abs() < 1e-10);
        assert!(delta_of_p(3) < delta_of_p(2));
        assert_eq!(delta_table(2).unwrap().len(), 1);
        assert!(delta_table(1).is_err());
        assert_eq!(delta_argmin(100).unwrap().0, 97);
        assert_eq!(eta(3), BigRational::new(19.into(), 9.into()));
    }
}
