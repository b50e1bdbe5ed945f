//! `G(p^b)^t / G(p^N)^t` as an indexed finite group, with left and right
//! generator tables, words for every element, subgroups in index space and
//! right coset partitions.

use std::collections::{HashMap, VecDeque};
use std::sync::{Arc, Mutex};

use crate::arith::pow;
use crate::congruence::{subgroup_generators, GroupElement, LevelContext, SubgroupSpec};
use crate::error::{Error, Result};

/// One letter of a word: generator position and whether it is inverted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Letter {
    pub generator: usize,
    pub inverse: bool,
}

#[derive(Debug)]
pub struct FiniteGroup {
    ctx: LevelContext,
    copies: usize,
    base: u32,
    elements: Vec<Vec<GroupElement>>,
    index: HashMap<u64, usize>,
    generators: Vec<usize>,
    canonical: Vec<usize>,
    parent: Vec<Option<(usize, Letter)>>,
    right_coset_cache: Mutex<HashMap<Vec<usize>, Arc<CosetPartition>>>,
}

impl FiniteGroup {
    /// `G(p^base)^copies` modulo `p^depth`.
    pub fn new(p: u64, depth: u32, copies: usize, base: u32, enum_cap: usize) -> Result<Self> {
        if copies == 0 {
            return Err(Error::Parameter("at least one copy of G is needed".into()));
        }
        if base == 0 || base > depth {
            return Err(Error::Parameter(format!(
                "need 1 <= base <= N, got base={base} N={depth}"
            )));
        }
        let ctx = LevelContext::new(p, depth)?.with_enum_cap(enum_cap);
        let m = ctx.modulus();
        if (m as u128).pow(3 * copies as u32) >= u64::MAX as u128 {
            return Err(Error::Resource {
                what: "element key space".into(),
                required: copies as u64,
                cap: 2,
            });
        }
        let expected = (ctx.principal_order(base) as u128).pow(copies as u32);
        if expected > enum_cap as u128 {
            return Err(Error::Resource {
                what: format!("group G(p^{base})^{copies} mod p^{depth}"),
                required: expected.min(u64::MAX as u128) as u64,
                cap: enum_cap as u64,
            });
        }
        let single = subgroup_generators(SubgroupSpec::G { k: base }, &ctx)?;
        let q = pow(p, base);
        let standard = [ctx.upper(q), ctx.lower(q), ctx.diagonal(1 + q)?];
        let identity = vec![ctx.identity(); copies];
        let embed = |i: usize, g: GroupElement| {
            let mut v = identity.clone();
            v[i] = g;
            v
        };
        let mut gen_elems = Vec::new();
        let mut canon_elems = Vec::new();
        for i in 0..copies {
            for g in &standard {
                canon_elems.push(embed(i, *g));
            }
            for g in &single {
                gen_elems.push(embed(i, *g));
            }
        }
        let mut group = FiniteGroup {
            ctx,
            copies,
            base,
            elements: vec![identity.clone()],
            index: HashMap::new(),
            generators: Vec::new(),
            canonical: Vec::new(),
            parent: vec![None],
            right_coset_cache: Mutex::new(HashMap::new()),
        };
        group.index.insert(group.key(&identity), 0);
        let inverses: Vec<Vec<GroupElement>> = gen_elems
            .iter()
            .map(|g| g.iter().map(|x| x.inverse()).collect())
            .collect();
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for (s, gens) in [(false, &gen_elems), (true, &inverses)] {
                for (gi, g) in gens.iter().enumerate() {
                    let prod: Vec<GroupElement> = group.elements[i]
                        .iter()
                        .zip(g)
                        .map(|(x, y)| x.mul(y))
                        .collect();
                    let key = group.key(&prod);
                    if group.index.contains_key(&key) {
                        continue;
                    }
                    if group.elements.len() >= enum_cap {
                        return Err(Error::Resource {
                            what: "group enumeration".into(),
                            required: expected as u64,
                            cap: enum_cap as u64,
                        });
                    }
                    let idx = group.elements.len();
                    group.index.insert(key, idx);
                    group.elements.push(prod);
                    group.parent.push(Some((
                        i,
                        Letter {
                            generator: gi,
                            inverse: s,
                        },
                    )));
                    queue.push_back(idx);
                }
            }
        }
        if group.elements.len() as u128 != expected {
            return Err(Error::Structural(format!(
                "enumerated {} elements, expected {expected}",
                group.elements.len()
            )));
        }
        group.generators = gen_elems
            .iter()
            .map(|g| group.index_of(g).unwrap())
            .collect();
        group.canonical = canon_elems
            .iter()
            .map(|g| group.index_of(g).unwrap())
            .collect();
        Ok(group)
    }

    fn key(&self, g: &[GroupElement]) -> u64 {
        let m = self.ctx.modulus();
        g.iter().fold(0u64, |acc, x| {
            let x = x.reduce(m);
            (acc * m * m * m) + (x.a * m + x.b) * m + x.c
        })
    }

    pub fn p(&self) -> u64 {
        self.ctx.p()
    }

    pub fn depth(&self) -> u32 {
        self.ctx.depth()
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn context(&self) -> &LevelContext {
        &self.ctx
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn element(&self, i: usize) -> &[GroupElement] {
        &self.elements[i]
    }

    pub fn index_of(&self, g: &[GroupElement]) -> Option<usize> {
        if g.len() != self.copies || g.iter().any(|x| x.modulus() % self.ctx.modulus() != 0) {
            return None;
        }
        self.index.get(&self.key(g)).copied()
    }

    /// Index of a single-copy element placed in copy `copy`.
    pub fn embed(&self, copy: usize, g: &GroupElement) -> Result<usize> {
        if copy >= self.copies {
            return Err(Error::Parameter(format!("copy {copy} out of range")));
        }
        let mut v = vec![self.ctx.identity(); self.copies];
        v[copy] = g.reduce(self.ctx.modulus());
        self.index_of(&v)
            .ok_or_else(|| Error::Containment(format!("{g} is not in G(p^{})", self.base)))
    }

    pub fn mul(&self, i: usize, j: usize) -> usize {
        let prod: Vec<GroupElement> = self.elements[i]
            .iter()
            .zip(&self.elements[j])
            .map(|(x, y)| x.mul(y))
            .collect();
        self.index[&self.key(&prod)]
    }

    pub fn inverse(&self, i: usize) -> usize {
        let inv: Vec<GroupElement> = self.elements[i].iter().map(|x| x.inverse()).collect();
        self.index[&self.key(&inv)]
    }

    /// Generators used to enumerate the group.
    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    /// `I + p^b E12`, `I + p^b E21`, `diag(1 + p^b, .)` in each copy, in that order.
    pub fn canonical_generators(&self) -> &[usize] {
        &self.canonical
    }

    /// `x -> x s` for all `x`.
    pub fn right_table(&self, s: usize) -> Vec<usize> {
        (0..self.order()).map(|x| self.mul(x, s)).collect()
    }

    /// `x -> s x` for all `x`.
    pub fn left_table(&self, s: usize) -> Vec<usize> {
        (0..self.order()).map(|x| self.mul(s, x)).collect()
    }

    /// A word in [`Self::generators`] whose product is element `i`.
    pub fn word(&self, mut i: usize) -> Vec<Letter> {
        let mut out = Vec::new();
        while let Some((parent, letter)) = self.parent[i] {
            out.push(letter);
            i = parent;
        }
        out.reverse();
        out
    }

    /// Position of the image of `i` in `G(p^b)^t / G(p^l)^t`, as a key.
    pub fn reduction_key(&self, i: usize, level: u32) -> u64 {
        let m = pow(self.p(), level);
        self.elements[i].iter().fold(0u64, |acc, x| {
            let x = x.reduce(m);
            (acc * m * m * m) + (x.a * m + x.b) * m + x.c
        })
    }

    /// Subgroup generated by the given elements.
    pub fn subgroup(&self, label: impl Into<String>, generators: Vec<usize>) -> ActingSubgroup {
        let mut seen = vec![false; self.order()];
        seen[0] = true;
        let mut elements = vec![0usize];
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for &s in &generators {
                let y = self.mul(x, s);
                if !seen[y] {
                    seen[y] = true;
                    elements.push(y);
                    queue.push_back(y);
                }
            }
        }
        elements.sort_unstable();
        ActingSubgroup {
            label: label.into(),
            generators,
            elements,
            ambient: self.fingerprint(),
        }
    }

    /// The congruence family `spec` inside a single copy.
    pub fn spec_subgroup(&self, spec: SubgroupSpec) -> Result<ActingSubgroup> {
        self.product_subgroup(&vec![spec; self.copies])
    }

    /// Product of one congruence family per copy.
    pub fn product_subgroup(&self, specs: &[SubgroupSpec]) -> Result<ActingSubgroup> {
        if specs.len() != self.copies {
            return Err(Error::Parameter(format!("need {} factors", self.copies)));
        }
        let mut gens = Vec::new();
        for (i, spec) in specs.iter().enumerate() {
            spec.validate(&self.ctx)?;
            for g in subgroup_generators(*spec, &self.ctx)? {
                if g.is_identity() {
                    continue;
                }
                gens.push(self.embed(i, &g)?);
            }
        }
        let label = specs
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(" x ");
        Ok(self.subgroup(label, gens))
    }

    /// The whole group as an acting subgroup.
    pub fn whole(&self) -> ActingSubgroup {
        self.subgroup("G", self.generators.clone())
    }

    pub fn trivial(&self) -> ActingSubgroup {
        self.subgroup("1", Vec::new())
    }

    /// `g T g^{-1}`.
    pub fn conjugate(&self, sub: &ActingSubgroup, g: usize) -> ActingSubgroup {
        let gi = self.inverse(g);
        let gens = sub
            .generators
            .iter()
            .map(|&s| self.mul(self.mul(g, s), gi))
            .collect();
        self.subgroup(format!("{}^{g}", sub.label), gens)
    }

    pub fn intersection(&self, a: &ActingSubgroup, b: &ActingSubgroup) -> ActingSubgroup {
        let common: Vec<usize> = a
            .elements
            .iter()
            .copied()
            .filter(|x| b.elements.binary_search(x).is_ok())
            .collect();
        let mut gens = Vec::new();
        let mut current = self.subgroup("", Vec::new());
        for &x in &common {
            if current.elements.binary_search(&x).is_err() {
                gens.push(x);
                current = self.subgroup("", gens.clone());
            }
        }
        self.subgroup(format!("{} & {}", a.label, b.label), gens)
    }

    pub fn join(&self, a: &ActingSubgroup, b: &ActingSubgroup) -> ActingSubgroup {
        let mut gens = a.generators.clone();
        gens.extend(&b.generators);
        self.subgroup(format!("<{}, {}>", a.label, b.label), gens)
    }

    /// `(p, N, t, base)`, used to reject subgroups of another group.
    pub fn fingerprint(&self) -> (u64, u32, usize, u32) {
        (self.p(), self.depth(), self.copies, self.base)
    }

    pub fn check_subgroup(&self, sub: &ActingSubgroup) -> Result<()> {
        if sub.ambient != self.fingerprint() {
            return Err(Error::Context(format!(
                "subgroup {} lives in {:?}, not {:?}",
                sub.label,
                sub.ambient,
                self.fingerprint()
            )));
        }
        Ok(())
    }

    /// [`Self::right_cosets`], memoized per subgroup.
    pub fn right_cosets_cached(&self, sub: &ActingSubgroup) -> Arc<CosetPartition> {
        if let Some(c) = self.right_coset_cache.lock().unwrap().get(&sub.elements) {
            return c.clone();
        }
        let c = Arc::new(self.right_cosets(sub));
        self.right_coset_cache
            .lock()
            .unwrap()
            .insert(sub.elements.clone(), c.clone());
        c
    }

    /// Partition into right cosets `T g`.
    pub fn right_cosets(&self, sub: &ActingSubgroup) -> CosetPartition {
        let mut coset_of = vec![u32::MAX; self.order()];
        let mut reps = Vec::new();
        for g in 0..self.order() {
            if coset_of[g] != u32::MAX {
                continue;
            }
            let id = reps.len() as u32;
            reps.push(g);
            for &t in &sub.elements {
                coset_of[self.mul(t, g)] = id;
            }
        }
        CosetPartition { coset_of, reps }
    }

    /// Partition into left cosets `g T`.
    pub fn left_cosets(&self, sub: &ActingSubgroup) -> CosetPartition {
        let mut coset_of = vec![u32::MAX; self.order()];
        let mut reps = Vec::new();
        for g in 0..self.order() {
            if coset_of[g] != u32::MAX {
                continue;
            }
            let id = reps.len() as u32;
            reps.push(g);
            for &t in &sub.elements {
                coset_of[self.mul(g, t)] = id;
            }
        }
        CosetPartition { coset_of, reps }
    }
}

/// A subgroup of a [`FiniteGroup`], listed in full.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActingSubgroup {
    pub label: String,
    pub generators: Vec<usize>,
    /// Sorted element indices.
    pub elements: Vec<usize>,
    pub ambient: (u64, u32, usize, u32),
}

impl ActingSubgroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.elements.binary_search(&x).is_ok()
    }

    pub fn is_subgroup_of(&self, other: &ActingSubgroup) -> bool {
        self.elements.iter().all(|&x| other.contains(x))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetPartition {
    /// Coset number of every group element.
    pub coset_of: Vec<u32>,
    /// Smallest element of each coset, in increasing order.
    pub reps: Vec<usize>,
}

impl CosetPartition {
    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }
}
