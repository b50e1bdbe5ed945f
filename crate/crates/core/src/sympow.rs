//! `Sym^d` realized on functions `g -> q(a, c)` of the first column, its lattice
//! of integral-valued functions, and the reduction of that lattice through `phi`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::arith::pow;
use crate::congruence::GroupElement;
use crate::coset::{filtration_f, is_g_invariant, point_permutation, CosetSpace};
use crate::error::{Error, Result};
use crate::linalg::{FpVector, Subspace};

/// `p`-adic valuation of a nonzero rational; `None` for zero.
pub fn valuation(x: &BigRational, p: u64) -> Option<i64> {
    if x.is_zero() {
        return None;
    }
    let pb = BigInt::from(p);
    let count = |n: &BigInt| {
        let mut n = n.abs();
        let mut v = 0i64;
        while (&n % &pb).is_zero() {
            n /= &pb;
            v += 1;
        }
        v
    };
    Some(count(x.numer()) - count(x.denom()))
}

/// Reduction mod `p` of a `p`-integral rational.
pub fn reduce_mod_p(x: &BigRational, p: u64) -> Result<u32> {
    if let Some(v) = valuation(x, p) {
        if v < 0 {
            return Err(Error::Domain(format!("{x} is not {p}-integral")));
        }
    }
    let pb = BigInt::from(p);
    let n = x.numer().mod_floor(&pb);
    let d = x.denom().mod_floor(&pb);
    let d_inv = d.modpow(&(&pb - 2u32), &pb);
    let r: u64 = ((n * d_inv) % &pb).try_into().expect("residue fits");
    Ok(r as u32)
}

/// Evidence that a function takes `p`-integral values on `a = 1, c = 0 mod p`.
///
/// `values[y] = q(1, p y)` for `y = 0..=d`. A degree-`d` polynomial in `y` that is
/// integral at `d + 1` consecutive integers is integral on `Z_p`, and
/// `q(a, c) = a^d q(1, c / a)` carries this to the whole domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegralityCertificate {
    pub values: Vec<BigRational>,
    pub holds: bool,
}

/// `g -> q(a, c)` with `q = sum_j coeffs[j] a^{d-j} c^j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomogeneousFunction {
    p: u64,
    degree: usize,
    coeffs: Vec<BigRational>,
    certificate: IntegralityCertificate,
}

impl HomogeneousFunction {
    /// Builds the function and its integrality certificate.
    pub fn new(p: u64, coeffs: Vec<BigRational>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Parameter(
                "a homogeneous polynomial needs a degree".into(),
            ));
        }
        let degree = coeffs.len() - 1;
        let mut f = HomogeneousFunction {
            p,
            degree,
            coeffs,
            certificate: IntegralityCertificate {
                values: Vec::new(),
                holds: false,
            },
        };
        let pb = BigInt::from(p);
        let values: Vec<BigRational> = (0..=degree)
            .map(|y| f.eval(&BigInt::one(), &(&pb * BigInt::from(y))))
            .collect();
        let holds = values
            .iter()
            .all(|v| valuation(v, p).is_none_or(|e| e >= 0));
        f.certificate = IntegralityCertificate { values, holds };
        Ok(f)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coefficients(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn certificate(&self) -> &IntegralityCertificate {
        &self.certificate
    }

    pub fn is_integral(&self) -> bool {
        self.certificate.holds
    }

    /// Exact value `q(a, c)`.
    pub fn eval(&self, a: &BigInt, c: &BigInt) -> BigRational {
        let d = self.degree;
        let mut acc = BigRational::zero();
        for (j, coef) in self.coeffs.iter().enumerate() {
            if coef.is_zero() {
                continue;
            }
            let term = num_traits::pow(a.clone(), d - j) * num_traits::pow(c.clone(), j);
            acc += coef * BigRational::from_integer(term);
        }
        acc
    }

    /// Value on a group element, using its first column lifted to `[0, modulus)`.
    pub fn eval_at(&self, g: &GroupElement) -> BigRational {
        self.eval(&BigInt::from(g.a), &BigInt::from(g.c))
    }

    /// `(g f)(h) = f(g^{-1} h)`: a new homogeneous polynomial of the same degree.
    pub fn translate(&self, g: &GroupElement) -> Result<HomogeneousFunction> {
        let (ga, gb, gc, gd) = (
            BigInt::from(g.a),
            BigInt::from(g.b),
            BigInt::from(g.c),
            BigInt::from(g.d),
        );
        // first column of g^{-1} h: (gd a - gb c, -gc a + ga c)
        let d = self.degree;
        let mut out = vec![BigRational::zero(); d + 1];
        for (j, coef) in self.coeffs.iter().enumerate() {
            if coef.is_zero() {
                continue;
            }
            let left = poly_pow(&[gd.clone(), -gb.clone()], d - j);
            let right = poly_pow(&[-gc.clone(), ga.clone()], j);
            for (k, x) in poly_mul(&left, &right).into_iter().enumerate() {
                out[k] += coef * BigRational::from_integer(x);
            }
        }
        HomogeneousFunction::new(self.p, out)
    }

    /// The reduction of `f` through `phi`: `x -> q(1, p x) mod p`.
    pub fn reduce(&self, space: &CosetSpace) -> Result<FpVector> {
        let pb = BigInt::from(space.p());
        (0..space.len())
            .map(|x| {
                reduce_mod_p(
                    &self.eval(&BigInt::one(), &(&pb * BigInt::from(x))),
                    space.p(),
                )
            })
            .collect()
    }
}

/// Coefficients of a homogeneous form in `(a, c)`, index = power of `c`.
fn poly_mul(x: &[BigInt], y: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); x.len() + y.len() - 1];
    for (i, u) in x.iter().enumerate() {
        for (j, v) in y.iter().enumerate() {
            out[i + j] += u * v;
        }
    }
    out
}

fn poly_pow(x: &[BigInt], e: usize) -> Vec<BigInt> {
    (0..e).fold(vec![BigInt::one()], |acc, _| poly_mul(&acc, x))
}

fn check_degree(d: usize, space: &CosetSpace) -> Result<()> {
    if d + 1 > space.len() {
        return Err(Error::Parameter(format!(
            "need d < p^(k-1) = {}, got d={d}",
            space.len()
        )));
    }
    Ok(())
}

/// `f_t(a, c) = a^{d-t} prod_{r<t} (c - r p a) / (p^t t!)` for `t = 0..=d`, so that
/// `f_t(1, p y) = binom(y, t)`. These span the integral lattice of `Sym^d`.
pub fn sym_lattice_basis(d: usize, space: &CosetSpace) -> Result<Vec<HomogeneousFunction>> {
    check_degree(d, space)?;
    let p = space.p();
    let pb = BigInt::from(p);
    let mut out = Vec::with_capacity(d + 1);
    let mut prod = vec![BigInt::one()];
    let mut scale = BigInt::one();
    for t in 0..=d {
        if t > 0 {
            let r = BigInt::from(t - 1);
            prod = poly_mul(&prod, &[-(&r * &pb), BigInt::one()]);
            scale *= &pb * BigInt::from(t);
        }
        let mut coeffs = vec![BigRational::zero(); d + 1];
        for (j, x) in prod.iter().enumerate() {
            coeffs[j] = BigRational::new(x.clone(), scale.clone());
        }
        let f = HomogeneousFunction::new(p, coeffs)?;
        if !f.is_integral() {
            return Err(Error::Structural(format!(
                "basis function t={t} is not integral"
            )));
        }
        out.push(f);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SymReduction {
    pub d: usize,
    pub p: u64,
    pub k: u32,
    /// The image equals `F(m)`.
    pub m: usize,
    pub invariant: bool,
    #[serde(skip)]
    pub image: Subspace,
}

/// Image of the integral lattice of `Sym^d` in `F_p[pZ_p/p^k]`, identified with
/// a member of the Mahler filtration.
pub fn sym_reduction(d: usize, space: &CosetSpace) -> Result<SymReduction> {
    let basis = sym_lattice_basis(d, space)?;
    let rows = basis
        .iter()
        .map(|f| f.reduce(space))
        .collect::<Result<Vec<_>>>()?;
    let image = Subspace::span(space.p() as u32, space.len(), rows);
    let m = image.dim();
    if image != filtration_f(m, space)? {
        return Err(Error::Structural(format!(
            "reduction of Sym^{d} is not a member of the filtration"
        )));
    }
    let invariant = is_g_invariant(&image, space)?;
    if !invariant {
        return Err(Error::Structural(format!(
            "reduction of Sym^{d} is not G-invariant"
        )));
    }
    Ok(SymReduction {
        d,
        p: space.p(),
        k: space.level(),
        m,
        invariant,
        image,
    })
}

/// `reduce(g f) = g reduce(f)` for every basis function and every supplied element.
pub fn equivariance_check_with(
    d: usize,
    space: &CosetSpace,
    elements: &[GroupElement],
) -> Result<bool> {
    let basis = sym_lattice_basis(d, space)?;
    for g in elements {
        let perm = point_permutation(g, space)?;
        for f in &basis {
            let translated = f.translate(g)?;
            if !translated.is_integral() {
                return Ok(false);
            }
            let reduced = f.reduce(space)?;
            let mut moved = vec![0; reduced.len()];
            for (x, &y) in perm.iter().enumerate() {
                moved[y] = reduced[x];
            }
            if translated.reduce(space)? != moved {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// [`equivariance_check_with`] on the standard generators of `G`.
pub fn equivariance_check(d: usize, space: &CosetSpace) -> Result<bool> {
    equivariance_check_with(d, space, &space.generators()?)
}

/// Smallest level `k` with `d < p^{k-1}`.
pub fn minimal_level(d: usize, p: u64) -> u32 {
    let mut k = 1;
    while (pow(p, k - 1) as usize) <= d {
        k += 1;
    }
    k
}
