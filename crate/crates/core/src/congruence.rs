//! Exact arithmetic in `SL_2(Z/p^N)` and the congruence subgroup families
//! `G(p^k)`, `H(p^k)`, `T(p^k)` and the interpolating groups `T(l, j)`.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use serde::Serialize;

use crate::arith::{inv_mod, is_prime, mul_mod, pow};
use crate::error::{Error, Result};

/// Default bound on the number of elements any enumeration may produce.
pub const DEFAULT_ENUM_CAP: usize = 1 << 20;

/// A prime `p` and truncation depth `N`, fixing the ambient group `SL_2(Z/p^N)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct LevelContext {
    p: u64,
    depth: u32,
    modulus: u64,
    enum_cap: usize,
}

impl LevelContext {
    pub fn new(p: u64, depth: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::Parameter(format!("{p} is not prime")));
        }
        if depth == 0 {
            return Err(Error::Parameter(
                "truncation depth must be at least 1".into(),
            ));
        }
        let modulus = p
            .checked_pow(depth)
            .filter(|&m| m < (1 << 31))
            .ok_or_else(|| Error::Parameter(format!("modulus {p}^{depth} too large")))?;
        Ok(LevelContext {
            p,
            depth,
            modulus,
            enum_cap: DEFAULT_ENUM_CAP,
        })
    }

    pub fn with_enum_cap(mut self, cap: usize) -> Self {
        self.enum_cap = cap;
        self
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn enum_cap(&self) -> usize {
        self.enum_cap
    }

    /// The same prime at a different depth, keeping the enumeration cap.
    pub fn at_depth(&self, depth: u32) -> Result<Self> {
        Ok(LevelContext::new(self.p, depth)?.with_enum_cap(self.enum_cap))
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement {
            a: 1 % self.modulus,
            b: 0,
            c: 0,
            d: 1 % self.modulus,
            modulus: self.modulus,
        }
    }

    /// Builds `(a b; c d)` after reducing mod `p^N`; fails unless `ad - bc = 1`.
    pub fn element(&self, a: i64, b: i64, c: i64, d: i64) -> Result<GroupElement> {
        let m = self.modulus as i64;
        let r = |x: i64| x.rem_euclid(m) as u64;
        let g = GroupElement {
            a: r(a),
            b: r(b),
            c: r(c),
            d: r(d),
            modulus: self.modulus,
        };
        if g.det() != 1 % self.modulus {
            return Err(Error::Domain(format!("{g} does not have determinant 1")));
        }
        Ok(g)
    }

    /// `diag(u, u^{-1})` for a unit `u`.
    pub fn diagonal(&self, u: u64) -> Result<GroupElement> {
        let u = u % self.modulus;
        let ui = inv_mod(u, self.modulus)
            .ok_or_else(|| Error::Domain(format!("{u} is not a unit mod {}", self.modulus)))?;
        Ok(GroupElement {
            a: u,
            b: 0,
            c: 0,
            d: ui,
            modulus: self.modulus,
        })
    }

    /// `I + x E12`.
    pub fn upper(&self, x: u64) -> GroupElement {
        GroupElement {
            b: x % self.modulus,
            ..self.identity()
        }
    }

    /// `I + x E21`.
    pub fn lower(&self, x: u64) -> GroupElement {
        GroupElement {
            c: x % self.modulus,
            ..self.identity()
        }
    }

    pub fn pk(&self, k: u32) -> u64 {
        pow(self.p, k)
    }

    pub fn multiply(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
        if g.modulus != self.modulus || h.modulus != self.modulus {
            return Err(Error::Context(format!(
                "elements at moduli {} and {} used in context mod {}",
                g.modulus, h.modulus, self.modulus
            )));
        }
        Ok(g.mul(h))
    }

    /// Order of `G(p^k)/G(p^N)`, i.e. `p^{3(N-k)}`.
    pub fn principal_order(&self, k: u32) -> u64 {
        pow(self.p, 3 * (self.depth.saturating_sub(k)))
    }

    /// Every element of `G(p)/G(p^N)`, listed directly from the congruence conditions.
    pub fn brute_force_level_group(&self) -> Result<Vec<GroupElement>> {
        let need = self.principal_order(1);
        if need > self.enum_cap as u64 {
            return Err(Error::Resource {
                what: "brute-force listing of G(p)".into(),
                required: need,
                cap: self.enum_cap as u64,
            });
        }
        let (p, m) = (self.p, self.modulus);
        let mut out = Vec::with_capacity(need as usize);
        for a in (1..m).step_by(p as usize) {
            let ai = inv_mod(a, m).expect("a = 1 mod p is a unit");
            for b in (0..m).step_by(p as usize) {
                for c in (0..m).step_by(p as usize) {
                    let d = mul_mod((1 + mul_mod(b, c, m)) % m, ai, m);
                    out.push(GroupElement {
                        a,
                        b,
                        c,
                        d,
                        modulus: m,
                    });
                }
            }
        }
        Ok(out)
    }
}

/// A determinant-one matrix over `Z/p^N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct GroupElement {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
    modulus: u64,
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({} {}; {} {}) mod {}",
            self.a, self.b, self.c, self.d, self.modulus
        )
    }
}

impl GroupElement {
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn det(&self) -> u64 {
        let m = self.modulus;
        (mul_mod(self.a, self.d, m) + m - mul_mod(self.b, self.c, m)) % m
    }

    /// Product without a context check; callers inside the crate guarantee equal moduli.
    pub(crate) fn mul(&self, h: &GroupElement) -> GroupElement {
        debug_assert_eq!(self.modulus, h.modulus);
        let m = self.modulus;
        let f = |x: u64, y: u64, z: u64, w: u64| (mul_mod(x, y, m) + mul_mod(z, w, m)) % m;
        GroupElement {
            a: f(self.a, h.a, self.b, h.c),
            b: f(self.a, h.b, self.b, h.d),
            c: f(self.c, h.a, self.d, h.c),
            d: f(self.c, h.b, self.d, h.d),
            modulus: m,
        }
    }

    pub fn inverse(&self) -> GroupElement {
        let m = self.modulus;
        GroupElement {
            a: self.d,
            b: (m - self.b) % m,
            c: (m - self.c) % m,
            d: self.a,
            modulus: m,
        }
    }

    /// `h g h^{-1}`.
    pub fn conjugate_by(&self, h: &GroupElement) -> GroupElement {
        h.mul(self).mul(&h.inverse())
    }

    pub fn is_identity(&self) -> bool {
        let one = 1 % self.modulus;
        self.a == one && self.b == 0 && self.c == 0 && self.d == one
    }

    /// Reduction to a smaller modulus dividing the current one.
    pub fn reduce(&self, modulus: u64) -> GroupElement {
        assert!(
            self.modulus.is_multiple_of(modulus),
            "can only reduce to a divisor"
        );
        GroupElement {
            a: self.a % modulus,
            b: self.b % modulus,
            c: self.c % modulus,
            d: self.d % modulus,
            modulus,
        }
    }

    /// Whether the element lies in `G(q)` for `q | p^N`: `a = d = 1`, `b = c = 0` mod `q`.
    pub fn is_congruent_identity(&self, q: u64) -> bool {
        self.a % q == 1 % q
            && self.d % q == 1 % q
            && self.b.is_multiple_of(q)
            && self.c.is_multiple_of(q)
    }

    pub fn power(&self, mut e: u64) -> GroupElement {
        let mut base = *self;
        let mut acc = GroupElement {
            a: 1 % self.modulus,
            b: 0,
            c: 0,
            d: 1 % self.modulus,
            modulus: self.modulus,
        };
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Order of the element in the finite group.
    pub fn order(&self) -> u64 {
        let mut g = *self;
        let mut n = 1;
        while !g.is_identity() {
            g = g.mul(self);
            n += 1;
        }
        n
    }
}

/// The named subgroup families of `G = G(p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum SubgroupSpec {
    /// `G(p^k)`.
    G { k: u32 },
    /// `H(p^k)`: upper-right entry in `p^k`.
    H { k: u32 },
    /// Lower-left entry in `p^k`; the stabilizer of `0` under the fractional-linear action.
    HOpposite { k: u32 },
    /// `T(p^k)`: both off-diagonal entries in `p^k`.
    T { k: u32 },
    /// Diagonal part `a = 1 mod p^{l-j}` together with `G(p^l)`.
    Tlj { l: u32, j: u32 },
    /// `N_j T(l,j) N_j^{-1}` with `N_j = I + p^{j-1} E12`.
    TljUpper { l: u32, j: u32 },
    /// `Nbar_j T(l,j) Nbar_j^{-1}` with `Nbar_j = I + p^{j-1} E21`.
    TljLower { l: u32, j: u32 },
}

impl fmt::Display for SubgroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SubgroupSpec::G { k } => write!(f, "G(p^{k})"),
            SubgroupSpec::H { k } => write!(f, "H(p^{k})"),
            SubgroupSpec::HOpposite { k } => write!(f, "Hop(p^{k})"),
            SubgroupSpec::T { k } => write!(f, "T(p^{k})"),
            SubgroupSpec::Tlj { l, j } => write!(f, "T({l},{j})"),
            SubgroupSpec::TljUpper { l, j } => write!(f, "T({l},{j})'"),
            SubgroupSpec::TljLower { l, j } => write!(f, "T({l},{j})''"),
        }
    }
}

impl SubgroupSpec {
    pub fn validate(&self, ctx: &LevelContext) -> Result<()> {
        let n = ctx.depth();
        match *self {
            SubgroupSpec::G { k }
            | SubgroupSpec::H { k }
            | SubgroupSpec::HOpposite { k }
            | SubgroupSpec::T { k } => {
                if k == 0 || k > n {
                    return Err(Error::Parameter(format!("level k={k} outside 1..={n}")));
                }
            }
            SubgroupSpec::Tlj { l, j }
            | SubgroupSpec::TljUpper { l, j }
            | SubgroupSpec::TljLower { l, j } => {
                if l == 0 || l > n {
                    return Err(Error::Parameter(format!("level l={l} outside 1..={n}")));
                }
                if j >= l {
                    return Err(Error::Parameter(format!("need j <= l-1, got l={l} j={j}")));
                }
                let conj = !matches!(self, SubgroupSpec::Tlj { .. });
                if conj && j == 0 {
                    return Err(Error::Parameter("conjugates T(l,j)' need j >= 1".into()));
                }
            }
        }
        Ok(())
    }

    /// Closed-form membership test, independent of any generating set.
    pub fn contains(&self, g: &GroupElement, ctx: &LevelContext) -> bool {
        let q = |k: u32| ctx.pk(k.min(ctx.depth()));
        if !g.is_congruent_identity(ctx.p()) {
            return false;
        }
        match *self {
            SubgroupSpec::G { k } => g.is_congruent_identity(q(k)),
            SubgroupSpec::H { k } => g.b.is_multiple_of(q(k)),
            SubgroupSpec::HOpposite { k } => g.c.is_multiple_of(q(k)),
            SubgroupSpec::T { k } => g.b.is_multiple_of(q(k)) && g.c.is_multiple_of(q(k)),
            SubgroupSpec::Tlj { l, j } => {
                g.b.is_multiple_of(q(l))
                    && g.c.is_multiple_of(q(l))
                    && g.a % q(l - j) == 1 % q(l - j)
            }
            SubgroupSpec::TljUpper { l, j } => {
                let n = ctx.upper(ctx.pk(j - 1));
                SubgroupSpec::Tlj { l, j }.contains(&g.conjugate_by(&n.inverse()), ctx)
            }
            SubgroupSpec::TljLower { l, j } => {
                let n = ctx.lower(ctx.pk(j - 1));
                SubgroupSpec::Tlj { l, j }.contains(&g.conjugate_by(&n.inverse()), ctx)
            }
        }
    }

    /// Order of the image in `SL_2(Z/p^N)`, from the index formulas.
    pub fn expected_order(&self, ctx: &LevelContext) -> u64 {
        let n = ctx.depth();
        let full = ctx.principal_order(1);
        match *self {
            SubgroupSpec::G { k } => ctx.principal_order(k),
            SubgroupSpec::H { k } | SubgroupSpec::HOpposite { k } => full / pow(ctx.p(), k - 1),
            SubgroupSpec::T { k } => full / pow(ctx.p(), 2 * (k - 1)),
            SubgroupSpec::Tlj { l, j }
            | SubgroupSpec::TljUpper { l, j }
            | SubgroupSpec::TljLower { l, j } => {
                // |T(l,j) : G(p^l)| = p^j while l <= N.
                ctx.principal_order(l.min(n)) * pow(ctx.p(), j)
            }
        }
    }
}

/// Diagonal generators `diag(u, u^{-1})` for the units `u = 1 mod p^e`.
///
/// The units `1 mod p^e` form a procyclic group generated by `1 + p^e`, except
/// for `p = 2, e = 1` where `-1` is needed as well.
fn diagonal_generators(ctx: &LevelContext, e: u32) -> Result<Vec<GroupElement>> {
    let mut out = vec![ctx.diagonal(1 + ctx.pk(e))?];
    if ctx.p() == 2 && e == 1 {
        out.push(ctx.diagonal(ctx.modulus() - 1)?);
    }
    Ok(out)
}

/// Generators of the image of `spec` in `SL_2(Z/p^N)`. Generators that vanish at
/// this level are kept; the group they generate is what is certified.
pub fn subgroup_generators(spec: SubgroupSpec, ctx: &LevelContext) -> Result<Vec<GroupElement>> {
    spec.validate(ctx)?;
    let pk = |k: u32| ctx.pk(k.min(ctx.depth()));
    let gens = match spec {
        SubgroupSpec::G { k } => {
            let mut g = vec![ctx.upper(pk(k)), ctx.lower(pk(k))];
            g.extend(diagonal_generators(ctx, k)?);
            g
        }
        SubgroupSpec::H { k } => {
            let mut g = vec![ctx.upper(pk(k)), ctx.lower(pk(1))];
            g.extend(diagonal_generators(ctx, 1)?);
            g
        }
        SubgroupSpec::HOpposite { k } => {
            let mut g = vec![ctx.upper(pk(1)), ctx.lower(pk(k))];
            g.extend(diagonal_generators(ctx, 1)?);
            g
        }
        SubgroupSpec::T { k } => {
            let mut g = vec![ctx.upper(pk(k)), ctx.lower(pk(k))];
            g.extend(diagonal_generators(ctx, 1)?);
            g
        }
        SubgroupSpec::Tlj { l, j } => {
            let mut g = diagonal_generators(ctx, l - j)?;
            g.extend(subgroup_generators(SubgroupSpec::G { k: l }, ctx)?);
            g
        }
        SubgroupSpec::TljUpper { l, j } => {
            let n = ctx.upper(pk(j - 1));
            subgroup_generators(SubgroupSpec::Tlj { l, j }, ctx)?
                .iter()
                .map(|g| g.conjugate_by(&n))
                .collect()
        }
        SubgroupSpec::TljLower { l, j } => {
            let n = ctx.lower(pk(j - 1));
            subgroup_generators(SubgroupSpec::Tlj { l, j }, ctx)?
                .iter()
                .map(|g| g.conjugate_by(&n))
                .collect()
        }
    };
    Ok(gens)
}

/// A subgroup of `SL_2(Z/p^N)` given by generators, optionally enumerated.
#[derive(Debug, Clone)]
pub struct SubgroupRealization {
    label: String,
    modulus: u64,
    generators: Vec<GroupElement>,
    elements: Option<HashSet<GroupElement>>,
}

impl SubgroupRealization {
    pub fn from_generators(
        label: impl Into<String>,
        ctx: &LevelContext,
        generators: Vec<GroupElement>,
    ) -> Result<Self> {
        if let Some(g) = generators.iter().find(|g| g.modulus != ctx.modulus()) {
            return Err(Error::Context(format!(
                "generator {g} not at modulus {}",
                ctx.modulus()
            )));
        }
        Ok(SubgroupRealization {
            label: label.into(),
            modulus: ctx.modulus(),
            generators,
            elements: None,
        })
    }

    pub fn from_spec(spec: SubgroupSpec, ctx: &LevelContext) -> Result<Self> {
        Self::from_generators(spec.to_string(), ctx, subgroup_generators(spec, ctx)?)
    }

    /// Realized and enumerated in one step.
    pub fn enumerated(spec: SubgroupSpec, ctx: &LevelContext) -> Result<Self> {
        enumerate(Self::from_spec(spec, ctx)?, ctx)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    pub fn elements(&self) -> Option<&HashSet<GroupElement>> {
        self.elements.as_ref()
    }

    pub fn order(&self) -> Option<u64> {
        self.elements.as_ref().map(|e| e.len() as u64)
    }

    pub fn is_enumerated(&self) -> bool {
        self.elements.is_some()
    }

    /// Membership in the enumerated set.
    pub fn contains(&self, g: &GroupElement) -> Result<bool> {
        match &self.elements {
            Some(e) => Ok(e.contains(g)),
            None => Err(Error::Parameter(format!(
                "{} has not been enumerated",
                self.label
            ))),
        }
    }

    /// Elements sorted, for deterministic iteration.
    pub fn sorted_elements(&self) -> Result<Vec<GroupElement>> {
        let mut v: Vec<_> = self
            .elements
            .as_ref()
            .ok_or_else(|| Error::Parameter(format!("{} has not been enumerated", self.label)))?
            .iter()
            .copied()
            .collect();
        v.sort();
        Ok(v)
    }

    /// Subgroup generated by the union of generating sets.
    pub fn join(
        label: impl Into<String>,
        ctx: &LevelContext,
        parts: &[&SubgroupRealization],
    ) -> Result<Self> {
        let gens = parts
            .iter()
            .flat_map(|s| s.generators.iter().copied())
            .collect();
        Self::from_generators(label, ctx, gens)
    }

    /// Conjugate `h S h^{-1}`.
    pub fn conjugate(&self, h: &GroupElement, ctx: &LevelContext) -> Result<Self> {
        if h.modulus != ctx.modulus() {
            return Err(Error::Context(
                "conjugating element at another level".into(),
            ));
        }
        let mut out = Self::from_generators(
            format!("conj({})", self.label),
            ctx,
            self.generators.iter().map(|g| g.conjugate_by(h)).collect(),
        )?;
        if let Some(e) = &self.elements {
            out.elements = Some(e.iter().map(|g| g.conjugate_by(h)).collect());
        }
        Ok(out)
    }

    /// Intersection of two enumerated subgroups, with a small generating set
    /// extracted greedily.
    pub fn intersection(&self, other: &SubgroupRealization, ctx: &LevelContext) -> Result<Self> {
        let (a, b) = match (&self.elements, &other.elements) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(Error::Parameter(
                    "intersection needs enumerated subgroups".into(),
                ))
            }
        };
        let mut common: Vec<GroupElement> = a.intersection(b).copied().collect();
        common.sort();
        let elements: HashSet<GroupElement> = common.iter().copied().collect();
        let generators = greedy_generators(&common, ctx)?;
        Ok(SubgroupRealization {
            label: format!("{} ∩ {}", self.label, other.label),
            modulus: ctx.modulus(),
            generators,
            elements: Some(elements),
        })
    }

    /// Equality by mutual membership of generators plus equal orders.
    pub fn same_subgroup(&self, other: &SubgroupRealization) -> Result<bool> {
        let (Some(oa), Some(ob)) = (self.order(), other.order()) else {
            return Err(Error::Parameter(
                "equality test needs enumerated subgroups".into(),
            ));
        };
        if oa != ob {
            return Ok(false);
        }
        for g in &self.generators {
            if !other.contains(g)? {
                return Ok(false);
            }
        }
        for g in &other.generators {
            if !self.contains(g)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn is_subgroup_of(&self, other: &SubgroupRealization) -> Result<bool> {
        for g in &self.generators {
            if !other.contains(g)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn upper_bound_order(gens: &[GroupElement], ctx: &LevelContext) -> u64 {
    if gens.iter().all(|g| g.is_congruent_identity(ctx.p())) {
        ctx.principal_order(1)
    } else {
        // |SL_2(Z/p^N)| = p^{3N} (1 - p^{-2})
        let p = ctx.p();
        pow(p, 3 * ctx.depth() - 2) * (p * p - 1)
    }
}

/// Closure of a list of elements, honouring the context's cap.
fn closure(gens: &[GroupElement], ctx: &LevelContext) -> Result<HashSet<GroupElement>> {
    let cap = ctx.enum_cap();
    let id = ctx.identity();
    let mut seen = HashSet::from([id]);
    let mut queue = VecDeque::from([id]);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = g.mul(&x);
            if seen.insert(y) {
                if seen.len() > cap {
                    return Err(Error::Resource {
                        what: "subgroup enumeration".into(),
                        required: upper_bound_order(gens, ctx),
                        cap: cap as u64,
                    });
                }
                queue.push_back(y);
            }
        }
    }
    Ok(seen)
}

fn greedy_generators(elements: &[GroupElement], ctx: &LevelContext) -> Result<Vec<GroupElement>> {
    let mut gens = Vec::new();
    let mut span = HashSet::from([ctx.identity()]);
    for g in elements {
        if !span.contains(g) {
            gens.push(*g);
            span = closure(&gens, ctx)?;
            if span.len() == elements.len() {
                break;
            }
        }
    }
    Ok(gens)
}

/// Breadth-first closure under left multiplication by the generators.
pub fn enumerate(mut sub: SubgroupRealization, ctx: &LevelContext) -> Result<SubgroupRealization> {
    if sub.modulus != ctx.modulus() {
        return Err(Error::Context("subgroup realized at another level".into()));
    }
    if sub.elements.is_none() {
        sub.elements = Some(closure(&sub.generators, ctx)?);
    }
    Ok(sub)
}

/// `|outer : inner|`, after verifying containment element by element.
pub fn index(inner: &SubgroupRealization, outer: &SubgroupRealization) -> Result<u64> {
    let (Some(ie), Some(oe)) = (&inner.elements, &outer.elements) else {
        return Err(Error::Parameter("index needs enumerated subgroups".into()));
    };
    if inner.modulus != outer.modulus {
        return Err(Error::Context("subgroups at different levels".into()));
    }
    if let Some(g) = ie.iter().find(|g| !oe.contains(*g)) {
        return Err(Error::Containment(format!(
            "{g} lies in {} but not in {}",
            inner.label, outer.label
        )));
    }
    Ok(oe.len() as u64 / ie.len() as u64)
}

fn check_identity_range(l: u32, j: u32, ctx: &LevelContext) -> Result<()> {
    if j < 2 || j + 1 > l {
        return Err(Error::Parameter(format!(
            "need 2 <= j <= l-1, got l={l} j={j}"
        )));
    }
    if l + 1 > ctx.depth() {
        return Err(Error::Parameter(format!(
            "level l={l} is only faithful at depth >= {}, context has {}",
            l + 1,
            ctx.depth()
        )));
    }
    Ok(())
}

/// Minimal depth at which the product and intersection identities for `(l, j)` are tested.
pub fn identity_minimal_depth(l: u32) -> u32 {
    l + 1
}

/// `<T(l,j), T(l,j)', T(l,j)''> = T(l-1, j-1)` as sets.
pub fn verify_product_identity(l: u32, j: u32, ctx: &LevelContext) -> Result<bool> {
    check_identity_range(l, j, ctx)?;
    let t = SubgroupRealization::from_spec(SubgroupSpec::Tlj { l, j }, ctx)?;
    let tu = SubgroupRealization::from_spec(SubgroupSpec::TljUpper { l, j }, ctx)?;
    let tl = SubgroupRealization::from_spec(SubgroupSpec::TljLower { l, j }, ctx)?;
    let product = enumerate(
        SubgroupRealization::join("product", ctx, &[&t, &tu, &tl])?,
        ctx,
    )?;
    let target = SubgroupRealization::enumerated(SubgroupSpec::Tlj { l: l - 1, j: j - 1 }, ctx)?;
    product.same_subgroup(&target)
}

/// Outcome of the three rotated intersection identities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IntersectionReport {
    /// `T ∩ <T', T''> = T(l, j-1)`.
    pub base: bool,
    /// `T' ∩ <T, T''> = T(l, j-1)'`.
    pub upper: bool,
    /// `T'' ∩ <T, T'> = T(l, j-1)''`.
    pub lower: bool,
}

impl IntersectionReport {
    pub fn holds(&self) -> bool {
        self.base && self.upper && self.lower
    }
}

/// The intersection identity and its two rotations. The rotated targets are the
/// conjugates of `T(l, j-1)` by the same `N_j`, `Nbar_j` that produce `T'`, `T''`.
pub fn intersection_identity_report(
    l: u32,
    j: u32,
    ctx: &LevelContext,
) -> Result<IntersectionReport> {
    check_identity_range(l, j, ctx)?;
    let t = SubgroupRealization::enumerated(SubgroupSpec::Tlj { l, j }, ctx)?;
    let tu = SubgroupRealization::enumerated(SubgroupSpec::TljUpper { l, j }, ctx)?;
    let tl = SubgroupRealization::enumerated(SubgroupSpec::TljLower { l, j }, ctx)?;
    let smaller = SubgroupRealization::enumerated(SubgroupSpec::Tlj { l, j: j - 1 }, ctx)?;
    let nu = ctx.upper(ctx.pk(j - 1));
    let nl = ctx.lower(ctx.pk(j - 1));
    let rotated = |one: &SubgroupRealization,
                   a: &SubgroupRealization,
                   b: &SubgroupRealization,
                   target: &SubgroupRealization|
     -> Result<bool> {
        let join = enumerate(SubgroupRealization::join("join", ctx, &[a, b])?, ctx)?;
        one.intersection(&join, ctx)?.same_subgroup(target)
    };
    Ok(IntersectionReport {
        base: rotated(&t, &tu, &tl, &smaller)?,
        upper: rotated(&tu, &t, &tl, &smaller.conjugate(&nu, ctx)?)?,
        lower: rotated(&tl, &t, &tu, &smaller.conjugate(&nl, ctx)?)?,
    })
}

pub fn verify_intersection_identity(l: u32, j: u32, ctx: &LevelContext) -> Result<bool> {
    Ok(intersection_identity_report(l, j, ctx)?.holds())
}

/// Result of conjugating `H(p^k)` into `T(p^{(k+1)/2})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConjugationReport {
    pub k: u32,
    /// Exponent of the conjugating element `diag(1, p^s)`.
    pub s: u32,
    /// Depth at which the image is known exactly (`N - s`).
    pub image_depth: u32,
    /// Level of the target group `T(p^{s+1})`.
    pub target_level: u32,
    pub holds: bool,
}

/// Conjugates generators of `H(p^k)` by `diag(1, p^s)` (so `b -> b/p^s`, `c -> c p^s`)
/// and compares the generated group with `T(p^{s+1})` at depth `N - s`.
pub fn conjugate_h_to_t(k: u32, ctx: &LevelContext) -> Result<ConjugationReport> {
    if k.is_multiple_of(2) {
        return Err(Error::Parameter(format!("k={k} must be odd")));
    }
    if k > ctx.depth() {
        return Err(Error::Parameter(format!(
            "k={k} exceeds depth {}",
            ctx.depth()
        )));
    }
    let s = (k - 1) / 2;
    let ps = ctx.pk(s);
    let low = ctx.at_depth(ctx.depth() - s)?;
    let mut images = Vec::new();
    for g in subgroup_generators(SubgroupSpec::H { k }, ctx)? {
        if g.b % ps != 0 {
            return Err(Error::Structural(format!(
                "generator {g} has b not divisible by p^{s}"
            )));
        }
        let m = low.modulus();
        let h = GroupElement {
            a: g.a % m,
            b: (g.b / ps) % m,
            c: mul_mod(g.c % m, ps, m),
            d: g.d % m,
            modulus: m,
        };
        if h.det() != 1 % m {
            return Err(Error::Structural(format!("conjugate {h} left SL_2")));
        }
        images.push(h);
    }
    let image = enumerate(
        SubgroupRealization::from_generators("conj H", &low, images)?,
        &low,
    )?;
    let target = SubgroupRealization::enumerated(SubgroupSpec::T { k: s + 1 }, &low)?;
    Ok(ConjugationReport {
        k,
        s,
        image_depth: low.depth(),
        target_level: s + 1,
        holds: image.same_subgroup(&target)?,
    })
}
