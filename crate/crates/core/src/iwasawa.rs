//! Truncated Iwasawa algebras `A_N = F_p[G/G_N]` for `t` copies of `G`, their
//! monomial basis in `z_i = 1 - g_i`, the ideals `I_alpha` and `I(p^l)`, and
//! module filtrations.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use serde::Serialize;

use crate::arith::pow;
use crate::coinvariants::{coinvariants, GModule};
use crate::coset::DEFAULT_DIM_CAP;
use crate::error::{Error, Result};
use crate::group::FiniteGroup;
use crate::linalg::{add_scaled, sub, FpMatrix, FpVector, Subspace};

/// A multi-index `alpha`, ordered by total degree and then lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct MonomialIndex(pub Vec<u32>);

impl MonomialIndex {
    pub fn zero(len: usize) -> Self {
        MonomialIndex(vec![0; len])
    }

    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = vec![0; len];
        v[i] = 1;
        MonomialIndex(v)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn add(&self, other: &MonomialIndex) -> MonomialIndex {
        MonomialIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self - other`, if `other <= self` entrywise.
    pub fn checked_sub(&self, other: &MonomialIndex) -> Option<MonomialIndex> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(MonomialIndex)
    }

    pub fn dominates(&self, other: &MonomialIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a >= b)
    }
}

impl Ord for MonomialIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MonomialIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// An element of `A_N` as a coefficient vector over the group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgebraElement {
    pub p: u32,
    pub coeffs: FpVector,
}

impl AlgebraElement {
    pub fn zero(p: u32, n: usize) -> Self {
        AlgebraElement {
            p,
            coeffs: vec![0; n],
        }
    }

    pub fn basis(p: u32, n: usize, g: usize) -> Self {
        let mut e = Self::zero(p, n);
        e.coeffs[g] = 1;
        e
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&x| x == 0)
    }

    pub fn augmentation(&self) -> u32 {
        (self.coeffs.iter().map(|&x| x as u64).sum::<u64>() % self.p as u64) as u32
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut c = self.coeffs.clone();
        add_scaled(&mut c, &other.coeffs, 1, self.p);
        AlgebraElement {
            p: self.p,
            coeffs: c,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        AlgebraElement {
            p: self.p,
            coeffs: sub(&self.coeffs, &other.coeffs, self.p),
        }
    }
}

/// Coordinates in the monomial basis, together with the indices in enumeration order.
struct MonomialBasis {
    indices: Vec<MonomialIndex>,
    /// Row `r` holds the group coordinates of `z^{indices[r]}`.
    matrix: FpMatrix,
    inverse: Option<FpMatrix>,
    rank: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BasisCheck {
    pub dim: usize,
    pub monomials: usize,
    pub rank: usize,
    pub holds: bool,
}

pub struct TruncatedAlgebra {
    group: Arc<FiniteGroup>,
    exponent: u32,
    right: Vec<Vec<usize>>,
    left: Vec<Vec<usize>>,
    dim_cap: usize,
    basis: OnceLock<MonomialBasis>,
    structure: OnceLock<Vec<FpMatrix>>,
}

impl TruncatedAlgebra {
    pub fn new(group: Arc<FiniteGroup>) -> Self {
        Self::with_cap(group, DEFAULT_DIM_CAP)
    }

    pub fn with_cap(group: Arc<FiniteGroup>, dim_cap: usize) -> Self {
        let z = group.canonical_generators().to_vec();
        let right = z.iter().map(|&s| group.right_table(s)).collect();
        let left = z.iter().map(|&s| group.left_table(s)).collect();
        let exponent = pow(group.p(), group.depth() - group.base()) as u32;
        TruncatedAlgebra {
            group,
            exponent,
            right,
            left,
            dim_cap,
            basis: OnceLock::new(),
            structure: OnceLock::new(),
        }
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn p(&self) -> u32 {
        self.group.p() as u32
    }

    pub fn dim(&self) -> usize {
        self.group.order()
    }

    /// Number of variables, `3t`.
    pub fn variables(&self) -> usize {
        self.right.len()
    }

    /// `e = p^{N-b}`; basis monomials have every exponent below `e`.
    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn one(&self) -> AlgebraElement {
        AlgebraElement::basis(self.p(), self.dim(), 0)
    }

    pub fn group_element(&self, g: usize) -> AlgebraElement {
        AlgebraElement::basis(self.p(), self.dim(), g)
    }

    /// `z_i = 1 - g_i` for the canonical generators.
    pub fn z_generators(&self) -> Vec<AlgebraElement> {
        (0..self.variables())
            .map(|i| {
                self.one()
                    .sub(&self.group_element(self.group.canonical_generators()[i]))
            })
            .collect()
    }

    /// `x z_i = x - x g_i`.
    pub fn right_mul_z(&self, x: &[u32], i: usize) -> FpVector {
        let p = self.p();
        let mut out = x.to_vec();
        for (y, &to) in self.right[i].iter().enumerate() {
            out[to] = (out[to] + p - x[y]) % p;
        }
        out
    }

    /// `z_i x = x - g_i x`.
    pub fn left_mul_z(&self, i: usize, x: &[u32]) -> FpVector {
        let p = self.p();
        let mut out = x.to_vec();
        for (y, &to) in self.left[i].iter().enumerate() {
            out[to] = (out[to] + p - x[y]) % p;
        }
        out
    }

    /// Full product in the group algebra.
    pub fn mul(&self, x: &AlgebraElement, y: &AlgebraElement) -> AlgebraElement {
        let p = self.p() as u64;
        let mut acc = vec![0u64; self.dim()];
        for (g, &a) in x.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (h, &b) in y.coeffs.iter().enumerate() {
                if b != 0 {
                    let gh = self.group.mul(g, h);
                    acc[gh] = (acc[gh] + a as u64 * b as u64) % p;
                }
            }
        }
        AlgebraElement {
            p: self.p(),
            coeffs: acc.into_iter().map(|x| x as u32).collect(),
        }
    }

    /// `x z^alpha`, multiplying on the right in the fixed variable order.
    pub fn right_mul_monomial(&self, x: &[u32], alpha: &MonomialIndex) -> FpVector {
        let mut v = x.to_vec();
        for (i, &a) in alpha.0.iter().enumerate() {
            for _ in 0..a {
                v = self.right_mul_z(&v, i);
            }
        }
        v
    }

    /// `z^alpha = z_1^{alpha_1} ... z_{3t}^{alpha_{3t}}`.
    pub fn monomial(&self, alpha: &MonomialIndex) -> Result<AlgebraElement> {
        self.check_index(alpha)?;
        Ok(AlgebraElement {
            p: self.p(),
            coeffs: self.right_mul_monomial(&self.one().coeffs, alpha),
        })
    }

    fn check_index(&self, alpha: &MonomialIndex) -> Result<()> {
        if alpha.0.len() != self.variables() {
            return Err(Error::Parameter(format!(
                "multi-index of length {} for {} variables",
                alpha.0.len(),
                self.variables()
            )));
        }
        Ok(())
    }

    /// All indices with entries below `e`, ascending in the order.
    pub fn basis_indices(&self) -> Vec<MonomialIndex> {
        let e = self.exponent;
        let v = self.variables();
        let mut out = vec![MonomialIndex(Vec::new())];
        for _ in 0..v {
            out = out
                .into_iter()
                .flat_map(|m| {
                    (0..e).map(move |x| {
                        let mut m = m.clone();
                        m.0.push(x);
                        m
                    })
                })
                .collect();
        }
        out.sort();
        out
    }

    /// Next basis index in the order, by enumeration.
    pub fn successor(&self, alpha: &MonomialIndex) -> Option<MonomialIndex> {
        self.basis_indices().into_iter().find(|b| b > alpha)
    }

    fn monomial_basis(&self) -> Result<&MonomialBasis> {
        if self.dim() > self.dim_cap {
            return Err(Error::Resource {
                what: "monomial basis".into(),
                required: self.dim() as u64,
                cap: self.dim_cap as u64,
            });
        }
        Ok(self.basis.get_or_init(|| {
            let indices = self.basis_indices();
            let position: HashMap<MonomialIndex, usize> = indices
                .iter()
                .cloned()
                .enumerate()
                .map(|(i, a)| (a, i))
                .collect();
            // z^alpha = z^{alpha - e_j} z_j for the last nonzero entry j
            let mut rows: Vec<FpVector> = vec![Vec::new(); indices.len()];
            let mut by_lex: Vec<usize> = (0..indices.len()).collect();
            by_lex.sort_by(|&a, &b| indices[a].0.cmp(&indices[b].0));
            for &r in &by_lex {
                let alpha = &indices[r];
                rows[r] = match alpha.0.iter().rposition(|&x| x > 0) {
                    None => self.one().coeffs,
                    Some(j) => {
                        let mut prev = alpha.clone();
                        prev.0[j] -= 1;
                        self.right_mul_z(&rows[position[&prev]], j)
                    }
                };
            }
            let matrix = FpMatrix::from_rows(self.p(), self.dim(), &rows);
            let rank = matrix.rank();
            let inverse = if rank == self.dim() && indices.len() == self.dim() {
                matrix.inverse().ok()
            } else {
                None
            };
            MonomialBasis {
                indices,
                matrix,
                inverse,
                rank,
            }
        }))
    }

    /// Whether the monomials with entries below `e` form a basis.
    pub fn monomial_basis_check(&self) -> Result<BasisCheck> {
        let b = self.monomial_basis()?;
        Ok(BasisCheck {
            dim: self.dim(),
            monomials: b.indices.len(),
            rank: b.rank,
            holds: b.inverse.is_some(),
        })
    }

    fn inverse(&self) -> Result<&FpMatrix> {
        self.monomial_basis()?
            .inverse
            .as_ref()
            .ok_or_else(|| Error::Structural("the monomials do not form a basis".into()))
    }

    /// Coordinates of `x` in the monomial basis, indexed like [`Self::basis_indices`].
    pub fn coordinates(&self, x: &[u32]) -> Result<FpVector> {
        let inv = self.inverse()?;
        // x = c M  =>  c = x M^{-1}
        Ok(inv.transpose().apply(x))
    }

    /// `z^alpha z^beta - z^{alpha+beta}` lies in degrees above `|alpha| + |beta|`.
    pub fn graded_commutativity_check(
        &self,
        alpha: &MonomialIndex,
        beta: &MonomialIndex,
    ) -> Result<bool> {
        self.check_index(alpha)?;
        self.check_index(beta)?;
        let indices = &self.monomial_basis()?.indices;
        let prod = self.right_mul_monomial(&self.monomial(alpha)?.coeffs, beta);
        let diff = sub(&prod, &self.monomial(&alpha.add(beta))?.coeffs, self.p());
        let deg = alpha.degree() + beta.degree();
        Ok(self
            .coordinates(&diff)?
            .iter()
            .zip(indices)
            .all(|(&c, idx)| c == 0 || idx.degree() > deg))
    }

    /// Monomial coordinates of `z_i z^beta` (first `3t` matrices) and
    /// `z^beta z_i` (last `3t`), one row per basis index.
    fn structure_matrices(&self) -> Result<&Vec<FpMatrix>> {
        let basis = self.monomial_basis()?;
        let inv = self.inverse()?.clone();
        if let Some(s) = self.structure.get() {
            return Ok(s);
        }
        let mut out = Vec::new();
        for side in 0..2 {
            for i in 0..self.variables() {
                let rows: Vec<FpVector> = (0..basis.indices.len())
                    .map(|r| {
                        let m = basis.matrix.row(r);
                        if side == 0 {
                            self.left_mul_z(i, m)
                        } else {
                            self.right_mul_z(m, i)
                        }
                    })
                    .collect();
                out.push(FpMatrix::from_rows(self.p(), self.dim(), &rows).mul(&inv)?);
            }
        }
        Ok(self.structure.get_or_init(|| out))
    }

    /// `I_alpha`, the span of `z^beta` for `beta ⪰ alpha`, and whether it is a
    /// two-sided ideal.
    pub fn ideal_i_alpha(&self, alpha: &MonomialIndex) -> Result<IdealReport> {
        self.check_index(alpha)?;
        let basis = self.monomial_basis()?;
        let members: Vec<bool> = basis.indices.iter().map(|b| b >= alpha).collect();
        let span = Subspace::span(
            self.p(),
            self.dim(),
            (0..basis.indices.len())
                .filter(|&r| members[r])
                .map(|r| basis.matrix.row(r).to_vec()),
        );
        let structure = self.structure_matrices()?;
        let two_sided = structure.iter().all(|m| {
            (0..basis.indices.len()).filter(|&r| members[r]).all(|r| {
                m.row(r)
                    .iter()
                    .zip(&members)
                    .all(|(&c, &inside)| c == 0 || inside)
            })
        });
        let successor_contained = match self.successor(alpha) {
            Some(next) => basis.indices.iter().filter(|b| **b >= next).count() < span.dim() + 1,
            None => true,
        };
        Ok(IdealReport {
            alpha: alpha.clone(),
            dim: span.dim(),
            two_sided,
            successor_contained,
            span,
        })
    }

    /// `I(p^l)`: the kernel of `A_N -> F_p[G/G(p^l)]`, compared with the span of
    /// the monomials having some exponent at least `p^{l-b}`.
    pub fn ideal_ip(&self, l: u32) -> Result<IdealIpReport> {
        let b = self.group.base();
        let n = self.group.depth();
        if l < b || l > n {
            return Err(Error::Parameter(format!("need {b} <= l <= {n}, got {l}")));
        }
        let basis = self.monomial_basis()?;
        let inv = self.inverse()?;
        let mut first: HashMap<u64, usize> = HashMap::new();
        let p = self.p();
        let mut rows = Vec::new();
        for g in 0..self.dim() {
            let key = self.group.reduction_key(g, l);
            match first.get(&key) {
                None => {
                    first.insert(key, g);
                }
                Some(&r) => {
                    let mut v = vec![0u32; self.dim()];
                    v[g] = 1;
                    v[r] = p - 1;
                    rows.push(v);
                }
            }
        }
        let quotient = first.len();
        let kernel_dim = rows.len();
        let threshold = pow(self.group.p(), l - b) as u32;
        let in_span: Vec<bool> = basis
            .indices
            .iter()
            .map(|a| a.0.iter().any(|&x| x >= threshold))
            .collect();
        let span_dim = in_span.iter().filter(|&&x| x).count();
        let contained = if rows.is_empty() {
            true
        } else {
            let coords = FpMatrix::from_rows(p, self.dim(), &rows).mul(inv)?;
            (0..coords.rows()).all(|r| {
                coords
                    .row(r)
                    .iter()
                    .zip(&in_span)
                    .all(|(&c, &ok)| c == 0 || ok)
            })
        };
        Ok(IdealIpReport {
            l,
            kernel_dim,
            codim: quotient,
            span_dim,
            contained,
            equal: contained && kernel_dim == span_dim,
        })
    }

    /// Operators `rho(g_i) - 1` on a module over the same group.
    fn z_operators(&self, m: &GModule) -> Result<Vec<FpMatrix>> {
        if m.group().fingerprint() != self.group.fingerprint() {
            return Err(Error::Context("module lives over another group".into()));
        }
        self.group
            .canonical_generators()
            .iter()
            .map(|&g| Ok(m.matrix(g)?.minus_identity()))
            .collect()
    }

    /// Operator of `z^gamma` on `m`, for every basis index.
    fn monomial_operators(&self, m: &GModule) -> Result<HashMap<MonomialIndex, FpMatrix>> {
        let z = self.z_operators(m)?;
        let mut by_lex = self.basis_indices();
        by_lex.sort_by(|a, b| a.0.cmp(&b.0));
        let mut ops: HashMap<MonomialIndex, FpMatrix> = HashMap::new();
        for alpha in by_lex {
            let op = match alpha.0.iter().rposition(|&x| x > 0) {
                None => FpMatrix::identity(m.prime(), m.dim()),
                Some(j) => {
                    let mut prev = alpha.clone();
                    prev.0[j] -= 1;
                    ops[&prev].mul(&z[j])?
                }
            };
            ops.insert(alpha, op);
        }
        Ok(ops)
    }

    /// `M_beta = I_beta M` for every basis index, ascending.
    pub fn module_filtration(&self, m: &GModule) -> Result<Vec<FiltrationStep>> {
        self.module_filtration_spaces(m).map(|chain| {
            let mut out: Vec<FiltrationStep> = Vec::new();
            for (i, (beta, space)) in chain.iter().enumerate() {
                let next = chain.get(i + 1).map_or(0, |(_, s)| s.dim());
                out.push(FiltrationStep {
                    beta: beta.clone(),
                    dim: space.dim(),
                    quotient_dim: space.dim() - next,
                });
            }
            out
        })
    }

    fn module_filtration_spaces(&self, m: &GModule) -> Result<Vec<(MonomialIndex, Subspace)>> {
        let ops = self.monomial_operators(m)?;
        let indices = self.basis_indices();
        let mut chain: Vec<(MonomialIndex, Subspace)> = Vec::with_capacity(indices.len());
        let mut acc = Subspace::zero(m.prime(), m.dim());
        for beta in indices.iter().rev() {
            let op = &ops[beta];
            acc = acc.sum(&Subspace::span(
                m.prime(),
                m.dim(),
                (0..m.dim()).map(|c| op.column(c)),
            ));
            chain.push((beta.clone(), acc.clone()));
        }
        chain.reverse();
        Ok(chain)
    }

    /// Compares `z^{alpha-beta} M_beta + M_{alpha'}` with `M_alpha`.
    pub fn surjection_check(
        &self,
        m: &GModule,
        beta: &MonomialIndex,
        alpha: &MonomialIndex,
    ) -> Result<SurjectionReport> {
        let diff = alpha
            .checked_sub(beta)
            .ok_or_else(|| Error::Parameter("need alpha >= beta entrywise".into()))?;
        let chain = self.module_filtration_spaces(m)?;
        let find = |a: &MonomialIndex| {
            chain
                .iter()
                .find(|(b, _)| b == a)
                .map(|(_, s)| s.clone())
                .ok_or_else(|| Error::Parameter(format!("{a:?} is not a basis index")))
        };
        let m_beta = find(beta)?;
        let m_alpha = find(alpha)?;
        let m_next = match self.successor(alpha) {
            Some(next) => find(&next)?,
            None => Subspace::zero(m.prime(), m.dim()),
        };
        let mut op = FpMatrix::identity(m.prime(), m.dim());
        let z = self.z_operators(m)?;
        for (i, &a) in diff.0.iter().enumerate() {
            for _ in 0..a {
                op = op.mul(&z[i])?;
            }
        }
        let image = m_beta.map(m.dim(), |v| op.apply(v)).sum(&m_next);
        let contained = m_alpha.contains_subspace(&image);
        let covers = image.contains_subspace(&m_alpha);
        Ok(SurjectionReport {
            beta: beta.clone(),
            alpha: alpha.clone(),
            contained,
            covers,
            holds: contained && covers,
        })
    }

    /// `dim M / M_{successor(0)}` against the coinvariants `M_G`.
    pub fn first_quotient_check(&self, m: &GModule) -> Result<(usize, usize)> {
        let zero = MonomialIndex::zero(self.variables());
        let chain = self.module_filtration(m)?;
        let first = chain
            .iter()
            .find(|s| s.beta == zero)
            .map_or(0, |s| s.quotient_dim);
        let g = self.group.whole();
        Ok((first, coinvariants(m, &g)?.dim))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdealReport {
    pub alpha: MonomialIndex,
    pub dim: usize,
    pub two_sided: bool,
    /// `I_{alpha'}` has smaller dimension and is contained in `I_alpha`.
    pub successor_contained: bool,
    pub span: Subspace,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdealIpReport {
    pub l: u32,
    pub kernel_dim: usize,
    pub codim: usize,
    pub span_dim: usize,
    pub contained: bool,
    pub equal: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FiltrationStep {
    pub beta: MonomialIndex,
    pub dim: usize,
    /// `dim M_beta / M_{beta'}`.
    pub quotient_dim: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SurjectionReport {
    pub beta: MonomialIndex,
    pub alpha: MonomialIndex,
    /// `z^{alpha-beta} M_beta + M_{alpha'} ⊆ M_alpha`.
    pub contained: bool,
    /// `⊇`.
    pub covers: bool,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NonmajorizingCount {
    pub count: u64,
    pub bound: u64,
    pub holds: bool,
}

/// Number of `beta` with `0 <= beta_i < p^l` that fail `beta >= alpha`
/// entrywise, checked against `(sum alpha_i) p^{(r-1) l}`.
pub fn count_nonmajorizing(alpha: &MonomialIndex, l: u32, p: u64) -> NonmajorizingCount {
    let r = alpha.0.len() as u32;
    let side = pow(p, l);
    let total = pow(side, r);
    let majorizing: u64 = alpha
        .0
        .iter()
        .map(|&a| side.saturating_sub(a as u64))
        .product();
    let count = total - majorizing;
    let bound = alpha.degree() as u64 * pow(side, r.saturating_sub(1));
    NonmajorizingCount {
        count,
        bound,
        holds: count <= bound,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coinvariants::CyclicModule;
    use crate::congruence::DEFAULT_ENUM_CAP;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn algebra(p: u64, n: u32, t: usize, b: u32) -> TruncatedAlgebra {
        TruncatedAlgebra::new(Arc::new(
            FiniteGroup::new(p, n, t, b, DEFAULT_ENUM_CAP).unwrap(),
        ))
    }

    fn idx(v: &[u32]) -> MonomialIndex {
        MonomialIndex(v.to_vec())
    }

    #[test]
    fn order_and_successor() {
        let a = algebra(3, 2, 1, 1);
        let all = a.basis_indices();
        assert_eq!(all.len(), 27);
        assert_eq!(all[0], idx(&[0, 0, 0]));
        assert_eq!(a.successor(&idx(&[0, 0, 0])), Some(idx(&[0, 0, 1])));
        assert_eq!(a.successor(&idx(&[1, 0, 0])), Some(idx(&[0, 0, 2])));
        assert_eq!(a.successor(&idx(&[2, 2, 2])), None);
        assert!(idx(&[0, 0, 2]) > idx(&[1, 0, 0]));
        assert!(idx(&[1, 0, 0]) > idx(&[0, 1, 0]));
    }

    #[test]
    fn z_generators() {
        let a = algebra(3, 3, 1, 1);
        for (i, z) in a.z_generators().iter().enumerate() {
            assert_eq!(&a.mul(z, &a.one()), z);
            assert_eq!(z.augmentation(), 0);
            let mut v = a.one().coeffs;
            for k in 0..9 {
                assert!(!v.iter().all(|&x| x == 0), "z_{i}^{k} vanished early");
                v = a.right_mul_z(&v, i);
            }
            assert!(v.iter().all(|&x| x == 0));
            assert_eq!(a.right_mul_z(&a.one().coeffs, i), z.coeffs);
            assert_eq!(a.left_mul_z(i, &a.one().coeffs), z.coeffs);
        }
        let e1 = idx(&[1, 0, 0]);
        let e2 = idx(&[0, 1, 0]);
        let zs = a.z_generators();
        assert_eq!(a.monomial(&e1.add(&e2)).unwrap(), a.mul(&zs[0], &zs[1]));
    }

    #[test]
    fn monomial_bases() {
        for (p, n, t, b, dim) in [
            (3u64, 2u32, 1usize, 1u32, 27usize),
            (3, 3, 1, 1, 729),
            (2, 3, 1, 2, 8),
            (2, 4, 1, 2, 64),
            (3, 2, 2, 1, 729),
        ] {
            let r = algebra(p, n, t, b).monomial_basis_check().unwrap();
            assert_eq!(
                (r.dim, r.rank, r.holds),
                (dim, dim, true),
                "p={p} N={n} b={b}"
            );
        }
        let capped = TruncatedAlgebra::with_cap(
            Arc::new(FiniteGroup::new(3, 3, 1, 1, DEFAULT_ENUM_CAP).unwrap()),
            100,
        );
        assert!(matches!(
            capped.monomial_basis_check(),
            Err(Error::Resource { .. })
        ));
        // G(2) is not uniform; its monomials span half the algebra
        let g2 = algebra(2, 3, 1, 1).monomial_basis_check().unwrap();
        assert_eq!(
            (g2.dim, g2.monomials, g2.rank, g2.holds),
            (64, 64, 32, false)
        );
    }

    #[test]
    fn graded_commutativity() {
        let a = algebra(3, 3, 1, 1);
        let zero = idx(&[0, 0, 0]);
        assert!(a
            .graded_commutativity_check(&zero, &idx(&[2, 1, 0]))
            .unwrap());
        assert!(a
            .graded_commutativity_check(&idx(&[1, 0, 0]), &idx(&[0, 1, 0]))
            .unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            let r: Vec<u32> = (0..6).map(|_| rng.gen_range(0..4)).collect();
            assert!(a
                .graded_commutativity_check(&idx(&r[..3]), &idx(&r[3..]))
                .unwrap());
        }
        // the commutator of z_1 and z_2 is genuinely nonzero
        let zs = a.z_generators();
        assert_ne!(a.mul(&zs[0], &zs[1]), a.mul(&zs[1], &zs[0]));
    }

    #[test]
    fn ideals_are_two_sided() {
        let a = algebra(3, 2, 1, 1);
        let mut prev: Option<Subspace> = None;
        for alpha in a.basis_indices().iter().rev() {
            let r = a.ideal_i_alpha(alpha).unwrap();
            assert!(r.two_sided, "{alpha:?}");
            assert!(r.successor_contained);
            if let Some(p) = &prev {
                assert!(r.span.contains_subspace(p));
                assert_eq!(r.dim, p.dim() + 1);
            }
            prev = Some(r.span);
        }
        let big = algebra(3, 3, 1, 1);
        for alpha in [[0, 0, 1], [1, 0, 0], [0, 2, 1], [3, 0, 0]] {
            assert!(big.ideal_i_alpha(&idx(&alpha)).unwrap().two_sided);
        }
    }

    #[test]
    fn ideal_ip_descriptions_agree() {
        let a = algebra(3, 3, 1, 1);
        let top = a.ideal_ip(3).unwrap();
        assert_eq!((top.kernel_dim, top.span_dim), (0, 0));
        let aug = a.ideal_ip(1).unwrap();
        assert_eq!(aug.codim, 1);
        for l in 1..=3 {
            let r = a.ideal_ip(l).unwrap();
            assert!(r.equal, "l={l}");
            assert_eq!(r.codim as u64, pow(3, 3 * (l - 1)));
        }
        assert!(a.ideal_ip(0).is_err());
        let two = algebra(2, 4, 1, 2);
        for l in 2..=4 {
            assert!(two.ideal_ip(l).unwrap().equal);
        }
    }

    #[test]
    fn filtrations_and_surjections() {
        let g = Arc::new(FiniteGroup::new(3, 2, 1, 1, DEFAULT_ENUM_CAP).unwrap());
        let a = TruncatedAlgebra::new(g.clone());
        let modules = vec![
            GModule::regular(g.clone()),
            GModule::trivial(g.clone()),
            CyclicModule::random(g.clone(), 1).to_explicit().unwrap(),
            CyclicModule::random(g.clone(), 2).to_explicit().unwrap(),
        ];
        let small: Vec<MonomialIndex> = a
            .basis_indices()
            .into_iter()
            .filter(|i| i.degree() <= 3)
            .collect();
        for m in &modules {
            let chain = a.module_filtration(m).unwrap();
            assert_eq!(chain[0].dim, m.dim());
            assert!(chain.windows(2).all(|w| w[0].dim >= w[1].dim));
            let (first, coinv) = a.first_quotient_check(m).unwrap();
            assert_eq!(first, coinv);
            for beta in &small {
                for alpha in &small {
                    if alpha.dominates(beta) {
                        let r = a.surjection_check(m, beta, alpha).unwrap();
                        assert!(r.holds, "{beta:?} {alpha:?} {r:?}");
                    }
                }
            }
        }
        let reg = a.module_filtration(&modules[0]).unwrap();
        assert!(reg.iter().all(|s| s.quotient_dim == 1));
        assert!(a
            .surjection_check(&modules[0], &idx(&[1, 0, 0]), &idx(&[0, 1, 0]))
            .is_err());
    }

    fn brute_nonmajorizing(alpha: &[u32], l: u32, p: u64) -> u64 {
        let side = pow(p, l) as u32;
        let mut count = 0;
        for x in 0..side {
            for y in 0..side {
                for z in 0..side {
                    if !(x >= alpha[0] && y >= alpha[1] && z >= alpha[2]) {
                        count += 1;
                    }
                }
            }
        }
        count
    }

    #[test]
    fn nonmajorizing_counts() {
        assert_eq!(count_nonmajorizing(&idx(&[0, 0, 0]), 2, 3).count, 0);
        assert_eq!(count_nonmajorizing(&idx(&[1, 0, 0]), 1, 3).count, 9);
        assert_eq!(count_nonmajorizing(&idx(&[1, 1, 1]), 2, 2).count, 37);
        for p in [2u64, 3] {
            for l in 1..=3 {
                for a0 in 0..=3 {
                    for a1 in 0..=3 {
                        for a2 in 0..=3 {
                            let alpha = [a0, a1, a2];
                            let r = count_nonmajorizing(&idx(&alpha), l, p);
                            assert_eq!(r.count, brute_nonmajorizing(&alpha, l, p));
                            assert!(r.holds);
                        }
                    }
                }
            }
        }
    }
}
