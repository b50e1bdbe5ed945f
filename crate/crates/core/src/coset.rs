//! The coset module `F_p[G/H(p^k)]`, realized as functions on `pZ_p/p^k` through
//! `phi(g) = c/a`, with the fractional-linear action and the Mahler filtration.
//!
//! A point is stored as `x mod p^{k-1}` and stands for `z = p x`. Functions are
//! vectors indexed by `x`. The action on functions is `(g f)(z) = f(g^{-1} z)`,
//! which makes it a left action because `z -> (dz + c)/(bz + a)` is one:
//! `phi(g h) = g . phi(h)`.

use serde::Serialize;

use crate::arith::{binom_mod_p, digits, inv_mod, mul_mod, pow};
use crate::congruence::{subgroup_generators, GroupElement, LevelContext, SubgroupSpec};
use crate::error::{Error, Result};
use crate::linalg::{FpMatrix, FpVector, Subspace};

/// Default cap on the dimension of dense coset-module computations.
pub const DEFAULT_DIM_CAP: usize = 4096;

/// `pZ_p / p^k Z_p` for a fixed prime and level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CosetSpace {
    ctx: LevelContext,
    points: usize,
}

impl CosetSpace {
    pub fn new(p: u64, k: u32) -> Result<Self> {
        Self::with_cap(p, k, DEFAULT_DIM_CAP)
    }

    pub fn with_cap(p: u64, k: u32, dim_cap: usize) -> Result<Self> {
        let ctx = LevelContext::new(p, k)?;
        let points = pow(p, k - 1);
        if points as usize > dim_cap {
            return Err(Error::Resource {
                what: format!("coset space p^{}", k - 1),
                required: points,
                cap: dim_cap as u64,
            });
        }
        Ok(CosetSpace {
            ctx,
            points: points as usize,
        })
    }

    pub fn p(&self) -> u64 {
        self.ctx.p()
    }

    pub fn level(&self) -> u32 {
        self.ctx.depth()
    }

    pub fn context(&self) -> &LevelContext {
        &self.ctx
    }

    /// Number of points, `p^{k-1}`.
    pub fn len(&self) -> usize {
        self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points == 0
    }

    /// The residue `z = p x mod p^k` for the point `x`.
    pub fn z_of(&self, x: usize) -> u64 {
        self.ctx.p() * x as u64
    }

    fn fp(&self) -> u32 {
        self.ctx.p() as u32
    }

    /// Standard generators of `G` acting at this level.
    pub fn generators(&self) -> Result<Vec<GroupElement>> {
        subgroup_generators(SubgroupSpec::G { k: 1 }, &self.ctx)
    }

    fn localize(&self, g: &GroupElement) -> Result<GroupElement> {
        let m = self.ctx.modulus();
        if !g.modulus().is_multiple_of(m) {
            return Err(Error::Context(format!(
                "element mod {} cannot act on p Z_p / {m}",
                g.modulus()
            )));
        }
        Ok(g.reduce(m))
    }
}

/// `phi(g) = c a^{-1} mod p^k`, as a point.
pub fn phi(g: &GroupElement, space: &CosetSpace) -> Result<usize> {
    let p = space.p();
    if !g.is_congruent_identity(p) {
        return Err(Error::Domain(format!("{g} is not in G(p)")));
    }
    let g = space.localize(g)?;
    let m = space.ctx.modulus();
    let ai = inv_mod(g.a, m).expect("a = 1 mod p");
    let z = mul_mod(g.c, ai, m);
    Ok((z / p) as usize)
}

/// `z -> (dz + c)(bz + a)^{-1} mod p^k`.
pub fn flt_action(g: &GroupElement, x: usize, space: &CosetSpace) -> Result<usize> {
    let g = space.localize(g)?;
    let m = space.ctx.modulus();
    let p = space.p();
    if x >= space.points {
        return Err(Error::Parameter(format!(
            "point {x} outside 0..{}",
            space.points
        )));
    }
    let z = space.z_of(x) % m;
    let num = (mul_mod(g.d, z, m) + g.c) % m;
    let den = (mul_mod(g.b, z, m) + g.a) % m;
    let di = inv_mod(den, m)
        .ok_or_else(|| Error::Domain(format!("{g}: denominator {den} is not a unit")))?;
    let w = mul_mod(num, di, m);
    if !w.is_multiple_of(p) {
        return Err(Error::Domain(format!("{g} moves {z} outside p Z_p")));
    }
    Ok((w / p) as usize)
}

/// The permutation `x -> g.x` of all points.
pub fn point_permutation(g: &GroupElement, space: &CosetSpace) -> Result<Vec<usize>> {
    (0..space.points).map(|x| flt_action(g, x, space)).collect()
}

/// `(g f)(z) = f(g^{-1} z)`.
pub fn act_on_function(g: &GroupElement, f: &[u32], space: &CosetSpace) -> Result<FpVector> {
    if f.len() != space.points {
        return Err(Error::Parameter(
            "function length does not match the coset space".into(),
        ));
    }
    let perm = point_permutation(g, space)?;
    let mut out = vec![0; f.len()];
    for (x, &y) in perm.iter().enumerate() {
        out[y] = f[x];
    }
    Ok(out)
}

/// Matrix of the action on functions (columns are images of point indicators).
pub fn action_matrix(g: &GroupElement, space: &CosetSpace) -> Result<FpMatrix> {
    Ok(FpMatrix::permutation(
        space.fp(),
        &point_permutation(g, space)?,
    ))
}

/// Checks `phi(g h) = g . phi(h)` and `(gh).z = g.(h.z)` on the given pairs.
pub fn certify_intertwining(
    pairs: &[(GroupElement, GroupElement)],
    space: &CosetSpace,
) -> Result<bool> {
    for (g, h) in pairs {
        let gh = g.mul(h);
        if phi(&gh, space)? != flt_action(g, phi(h, space)?, space)? {
            return Ok(false);
        }
        for x in 0..space.points {
            if flt_action(&gh, x, space)? != flt_action(g, flt_action(h, x, space)?, space)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The Mahler function `x -> binom(x, t) mod p`, evaluated digitwise.
pub fn mahler(t: usize, space: &CosetSpace) -> Result<FpVector> {
    if t >= space.points {
        return Err(Error::Parameter(format!(
            "t={t} outside 0..{}",
            space.points
        )));
    }
    let p = space.p();
    Ok((0..space.points)
        .map(|x| binom_mod_p(x as u64, t as u64, p) as u32)
        .collect())
}

/// `F(i)`: span of the first `i` Mahler functions.
pub fn filtration_f(i: usize, space: &CosetSpace) -> Result<Subspace> {
    if i > space.points {
        return Err(Error::Parameter(format!("i={i} exceeds {}", space.points)));
    }
    let rows = (0..i)
        .map(|t| mahler(t, space))
        .collect::<Result<Vec<_>>>()?;
    Ok(Subspace::span(space.fp(), space.points, rows))
}

/// `Nbar = (1 0; -p 1)`, acting by `z -> z - p`.
pub fn lower_unipotent(space: &CosetSpace) -> GroupElement {
    let m = space.ctx.modulus();
    space.ctx.lower(m - space.p() % m)
}

/// `Nbar . B_t = B_t + B_{t-1}`; for `t = 0`, `Nbar . B_0 = B_0`.
pub fn shift_recurrence_check(t: usize, space: &CosetSpace) -> Result<bool> {
    let nbar = lower_unipotent(space);
    let b = mahler(t, space)?;
    let shifted = act_on_function(&nbar, &b, space)?;
    let expected = if t == 0 {
        b
    } else {
        let prev = mahler(t - 1, space)?;
        let p = space.fp();
        b.iter().zip(&prev).map(|(x, y)| (x + y) % p).collect()
    };
    Ok(shifted == expected)
}

pub fn is_g_invariant(sub: &Subspace, space: &CosetSpace) -> Result<bool> {
    for g in space.generators()? {
        let perm = point_permutation(&g, space)?;
        let ok = sub.is_invariant_under(|f| {
            let mut out = vec![0; f.len()];
            for (x, &y) in perm.iter().enumerate() {
                out[y] = f[x];
            }
            out
        });
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Jordan data of `U = Nbar - 1` on the coset module.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ShiftStructure {
    pub dim: usize,
    pub rank_u: usize,
    pub single_block: bool,
}

pub fn shift_structure(space: &CosetSpace) -> Result<ShiftStructure> {
    let u = action_matrix(&lower_unipotent(space), space)?.minus_identity();
    let rank_u = u.rank();
    Ok(ShiftStructure {
        dim: space.points,
        rank_u,
        single_block: rank_u + 1 == space.points,
    })
}

/// All `G`-invariant subspaces. Since `Nbar - 1` is a single nilpotent Jordan
/// block, the `Nbar`-invariant subspaces are exactly the kernels of its powers;
/// those that are also invariant under every generator of `G` are returned, in
/// increasing dimension.
pub fn invariant_subspace_census(space: &CosetSpace) -> Result<Vec<Subspace>> {
    let n = space.points;
    let fp = space.fp();
    let shape = shift_structure(space)?;
    if !shape.single_block {
        return Err(Error::Structural(format!(
            "rank(Nbar - 1) = {} but a single Jordan block needs {}",
            shape.rank_u,
            n - 1
        )));
    }
    let u = action_matrix(&lower_unipotent(space), space)?.minus_identity();
    let mut power = FpMatrix::identity(fp, n);
    let mut out = vec![Subspace::zero(fp, n)];
    for _ in 1..=n {
        power = u.mul(&power)?;
        let kernel = Subspace::span(fp, n, power.kernel());
        if is_g_invariant(&kernel, space)? {
            out.push(kernel);
        }
    }
    Ok(out)
}

/// The comparison map `F((a+1)p^{l-1}) -> F_p[pZ_p/p^l]` together with its checks.
#[derive(Debug, Clone, Serialize)]
pub struct QuotientIsoReport {
    pub a: usize,
    pub l: u32,
    pub k: u32,
    /// Matrix of the map in the Mahler basis of the domain (rows index level-`l` points).
    pub matrix: crate::linalg::JsonMatrix,
    pub surjective: bool,
    pub kernel_matches: bool,
    pub equivariant: bool,
}

impl QuotientIsoReport {
    pub fn holds(&self) -> bool {
        self.surjective && self.kernel_matches && self.equivariant
    }
}

/// Leading coefficient map used by [`quotient_iso`]: for each coset `z0 + p^l Z_p`
/// the degree-`a` Newton coefficient of `w -> f(z0 + p^l w)`.
fn leading_coefficients(f: &[u32], a: usize, l: u32, space: &CosetSpace) -> FpVector {
    let p = space.p();
    let stride = pow(p, l - 1) as usize;
    (0..stride)
        .map(|y0| {
            let mut acc = 0u64;
            for m in 0..=a {
                let c = binom_mod_p(a as u64, m as u64, p);
                let v = mul_mod(c, f[y0 + stride * m] as u64, p);
                if (a - m).is_multiple_of(2) {
                    acc += v;
                } else {
                    acc += p - v;
                }
            }
            (acc % p) as u32
        })
        .collect()
}

fn check_quotient_params(a: usize, l: u32, space: &CosetSpace) -> Result<()> {
    let k = space.level();
    if l == 0 || l > k {
        return Err(Error::Parameter(format!(
            "need 1 <= l <= k, got l={l} k={k}"
        )));
    }
    if a as u64 >= pow(space.p(), k - l) {
        return Err(Error::Parameter(format!("need a < p^(k-l), got a={a}")));
    }
    Ok(())
}

/// The quotient map for a single `(a, l)`, evaluated on an arbitrary function.
pub fn quotient_map(f: &[u32], a: usize, l: u32, space: &CosetSpace) -> Result<FpVector> {
    check_quotient_params(a, l, space)?;
    Ok(leading_coefficients(f, a, l, space))
}

/// Builds the map `F((a+1)p^{l-1}) -> F_p[pZ_p/p^l]`, and checks surjectivity,
/// that its kernel is `F(a p^{l-1})`, and equivariance on the generators of `G`.
pub fn quotient_iso(a: usize, l: u32, space: &CosetSpace) -> Result<QuotientIsoReport> {
    quotient_iso_with(a, l, space, &space.generators()?)
}

/// As [`quotient_iso`], testing equivariance on the supplied elements instead.
pub fn quotient_iso_with(
    a: usize,
    l: u32,
    space: &CosetSpace,
    elements: &[GroupElement],
) -> Result<QuotientIsoReport> {
    check_quotient_params(a, l, space)?;
    let p = space.p();
    let fp = space.fp();
    let stride = pow(p, l - 1) as usize;
    let domain_dim = (a + 1) * stride;
    let low = CosetSpace::new(p, l)?;
    let basis: Vec<FpVector> = (0..domain_dim)
        .map(|t| mahler(t, space))
        .collect::<Result<_>>()?;
    let images: Vec<FpVector> = basis
        .iter()
        .map(|f| leading_coefficients(f, a, l, space))
        .collect();
    let matrix = FpMatrix::from_rows(fp, stride, &images).transpose();
    let surjective = matrix.rank() == stride;
    let kernel = Subspace::span(
        fp,
        space.points,
        matrix.kernel().into_iter().map(|coords| {
            let mut f = vec![0u32; space.points];
            for (t, &c) in coords.iter().enumerate() {
                crate::linalg::add_scaled(&mut f, &basis[t], c, fp);
            }
            f
        }),
    );
    let kernel_matches = kernel == filtration_f(a * stride, space)?;
    let domain = filtration_f(domain_dim, space)?;
    let mut equivariant = true;
    'outer: for g in elements {
        let g_low = g.reduce(low.context().modulus());
        for (f, image) in basis.iter().zip(&images) {
            let gf = act_on_function(g, f, space)?;
            if !domain.contains(&gf) {
                equivariant = false;
                break 'outer;
            }
            if leading_coefficients(&gf, a, l, space) != act_on_function(&g_low, image, &low)? {
                equivariant = false;
                break 'outer;
            }
        }
    }
    Ok(QuotientIsoReport {
        a,
        l,
        k: space.level(),
        matrix: matrix.to_json_matrix(),
        surjective,
        kernel_matches,
        equivariant,
    })
}

/// One step `L_{i-1} ⊂ L_i` of the decomposition of `F(d)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecompositionStep {
    /// Exponent `α(i)` of the expansion term (in units of the base exponent).
    pub exponent: u32,
    pub size: u64,
    pub partial_sum: u64,
    /// Level `m` such that `L_i / L_{i-1} ≅ F_p[G/H(p^m)]`.
    pub quotient_level: u32,
    pub verified: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    pub p: u64,
    pub k: u32,
    pub d: u64,
    /// `p^4` in the default mode, `p` in relaxed mode.
    pub base: u64,
    pub relaxed: bool,
    pub steps: Vec<DecompositionStep>,
}

impl Decomposition {
    pub fn verified(&self) -> bool {
        self.steps.iter().all(|s| s.verified)
    }
}

/// Filtration of `F(d)` by partial sums of the base-`p^4` expansion of `d`
/// (base `p` when `relaxed`), each step checked with [`quotient_iso`].
pub fn decompose_submodule(d: u64, space: &CosetSpace, relaxed: bool) -> Result<Decomposition> {
    let p = space.p();
    let k = space.level();
    if d > space.points as u64 {
        return Err(Error::Parameter(format!(
            "d={d} exceeds p^(k-1)={}",
            space.points
        )));
    }
    if !relaxed && !(k - 1).is_multiple_of(4) {
        return Err(Error::Parameter(format!(
            "base p^4 decomposition needs 4 | k-1 (k={k}); use relaxed mode"
        )));
    }
    let step_exp = if relaxed { 1 } else { 4 };
    let base = pow(p, step_exp);
    let mut steps = Vec::new();
    let mut partial = 0u64;
    for (e, &digit) in digits(d, base).iter().enumerate().rev() {
        for _ in 0..digit {
            let size = pow(base, e as u32);
            let level = step_exp * e as u32 + 1;
            let a = (partial / size) as usize;
            let verified = quotient_iso(a, level, space)?.holds();
            partial += size;
            steps.push(DecompositionStep {
                exponent: e as u32,
                size,
                partial_sum: partial,
                quotient_level: level,
                verified,
            });
        }
    }
    Ok(Decomposition {
        p,
        k,
        d,
        base,
        relaxed,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_g(space: &CosetSpace, rng: &mut ChaCha8Rng) -> GroupElement {
        let elems = space.context().brute_force_level_group().unwrap();
        elems[rng.gen_range(0..elems.len())]
    }

    fn exact_binom(n: u64, k: u64) -> u128 {
        if k > n {
            return 0;
        }
        (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
    }

    #[test]
    fn phi_examples() {
        let space = CosetSpace::new(3, 3).unwrap();
        let ctx = space.context();
        assert_eq!(phi(&ctx.identity(), &space).unwrap(), 0);
        assert_eq!(phi(&ctx.lower(3), &space).unwrap(), 1);
        assert!(matches!(phi(&ctx.lower(1), &space), Err(Error::Domain(_))));
    }

    #[test]
    fn phi_intertwines_on_random_pairs() {
        let space = CosetSpace::new(3, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pairs: Vec<_> = (0..100)
            .map(|_| (random_g(&space, &mut rng), random_g(&space, &mut rng)))
            .collect();
        assert!(certify_intertwining(&pairs, &space).unwrap());
        // The opposite composition order fails for some pair.
        let swapped = pairs.iter().any(|(g, h)| {
            phi(&g.mul(h), &space).unwrap()
                != flt_action(h, phi(g, &space).unwrap(), &space).unwrap()
        });
        assert!(swapped);
    }

    #[test]
    fn flt_examples() {
        for (p, k) in [(2u64, 4u32), (3, 3), (5, 2)] {
            let space = CosetSpace::new(p, k).unwrap();
            let nbar = lower_unipotent(&space);
            for x in 0..space.len() {
                let expected = (x + space.len() - 1) % space.len();
                assert_eq!(flt_action(&nbar, x, &space).unwrap(), expected);
                assert_eq!(
                    flt_action(&space.context().identity(), x, &space).unwrap(),
                    x
                );
            }
            for g in space.context().brute_force_level_group().unwrap() {
                let mut img = point_permutation(&g, &space).unwrap();
                img.sort();
                assert_eq!(img, (0..space.len()).collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn mahler_examples() {
        let space = CosetSpace::new(2, 3).unwrap();
        assert_eq!(mahler(0, &space).unwrap(), vec![1, 1, 1, 1]);
        assert_eq!(mahler(1, &space).unwrap(), vec![0, 1, 0, 1]);
        assert!(mahler(4, &space).is_err());
        for (p, k) in [(2u64, 5u32), (3, 3), (5, 3)] {
            let space = CosetSpace::new(p, k).unwrap();
            let n = space.len() as u64;
            for t in 0..n {
                let b = mahler(t as usize, &space).unwrap();
                for x in 0..n {
                    let lifted = (exact_binom(x + n, t) % p as u128) as u32;
                    assert_eq!(b[x as usize], lifted, "lift dependence p={p} t={t} x={x}");
                    assert_eq!(b[x as usize] as u128, exact_binom(x, t) % p as u128);
                }
            }
        }
    }

    #[test]
    fn filtration_is_an_invariant_chain() {
        for (p, k) in [(2u64, 2u32), (2, 3), (2, 4), (3, 2), (3, 3), (3, 4)] {
            let space = CosetSpace::new(p, k).unwrap();
            assert_eq!(filtration_f(0, &space).unwrap().dim(), 0);
            assert_eq!(
                filtration_f(space.len(), &space).unwrap(),
                Subspace::full(p as u32, space.len())
            );
            let mut prev = Subspace::zero(p as u32, space.len());
            for i in 0..=space.len() {
                let f = filtration_f(i, &space).unwrap();
                assert_eq!(f.dim(), i);
                assert!(f.contains_subspace(&prev));
                assert!(is_g_invariant(&f, &space).unwrap(), "F({i}) p={p} k={k}");
                prev = f;
            }
        }
    }

    #[test]
    fn shift_recurrence() {
        for (p, k) in [(2u64, 4u32), (3, 4), (5, 3), (5, 4)] {
            let space = CosetSpace::new(p, k).unwrap();
            for t in 0..space.len() {
                assert!(
                    shift_recurrence_check(t, &space).unwrap(),
                    "p={p} k={k} t={t}"
                );
            }
        }
    }

    #[test]
    fn census_examples() {
        let space = CosetSpace::new(3, 1).unwrap();
        let census = invariant_subspace_census(&space).unwrap();
        assert_eq!(census, vec![Subspace::zero(3, 1), Subspace::full(3, 1)]);
        for (p, k) in [(2u64, 3u32), (3, 3)] {
            let space = CosetSpace::new(p, k).unwrap();
            let census = invariant_subspace_census(&space).unwrap();
            assert_eq!(census.len(), space.len() + 1);
            for (i, s) in census.iter().enumerate() {
                assert_eq!(s, &filtration_f(i, &space).unwrap());
            }
        }
    }

    #[test]
    fn quotient_iso_examples() {
        let space = CosetSpace::new(3, 3).unwrap();
        let full = quotient_iso(0, 3, &space).unwrap();
        assert!(full.holds());
        assert!(quotient_iso(1, 3, &space).is_err());
        assert!(quotient_iso(3, 2, &space).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let elements: Vec<_> = (0..50).map(|_| random_g(&space, &mut rng)).collect();
        for l in 1..=3 {
            for a in 0..pow(3, 3 - l) as usize {
                assert!(
                    quotient_iso_with(a, l, &space, &elements).unwrap().holds(),
                    "a={a} l={l}"
                );
            }
        }
    }

    #[test]
    fn decomposition_examples() {
        let space = CosetSpace::new(2, 5).unwrap();
        let full = decompose_submodule(16, &space, false).unwrap();
        assert_eq!(full.steps.len(), 1);
        assert_eq!(full.steps[0].quotient_level, 5);
        assert!(full.verified());
        let d17 = CosetSpace::new(2, 9).unwrap();
        let r = decompose_submodule(17, &d17, false).unwrap();
        let levels: Vec<u32> = r.steps.iter().map(|s| s.quotient_level).collect();
        assert_eq!(levels, vec![5, 1]);
        assert_eq!(r.steps[1].partial_sum, 17);
        assert!(r.verified());
        assert!(decompose_submodule(0, &space, false)
            .unwrap()
            .steps
            .is_empty());
        assert!(decompose_submodule(17, &space, false).is_err());
        let three = CosetSpace::new(3, 3).unwrap();
        assert!(decompose_submodule(5, &three, false).is_err());
        let relaxed = decompose_submodule(5, &three, true).unwrap();
        let levels: Vec<u32> = relaxed.steps.iter().map(|s| s.quotient_level).collect();
        assert_eq!(levels, vec![2, 1, 1]);
        assert!(relaxed.verified());
    }
}
