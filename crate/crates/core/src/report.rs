//! Suite configuration, check records and report tables.

use std::cmp::Ordering;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::arith::{is_prime, pow};
use crate::coinvariants::{
    coinvarlem_product_check, conjugation_invariance_check, delta_argmin, delta_of_p, delta_table,
    eta, harris_report, inclusion_exclusion_check, indhyp_sweep, minimal_constant,
    prop_single_check, recursion_check, shapiro_h0_check, Coinvariants, CyclicModule, GModule,
};
use crate::congruence::{
    conjugate_h_to_t, intersection_identity_report, verify_product_identity, LevelContext,
    SubgroupSpec,
};
use crate::coset::{
    certify_intertwining, decompose_submodule, filtration_f, invariant_subspace_census,
    quotient_iso, shift_recurrence_check, CosetSpace, DEFAULT_DIM_CAP,
};
use crate::error::{Error, Result};
use crate::group::FiniteGroup;
use crate::iwasawa::{count_nonmajorizing, MonomialIndex, TruncatedAlgebra};
use crate::sympow::{equivariance_check, minimal_level, sym_reduction};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub primes: Vec<u64>,
    /// Largest `N` for single-copy suites.
    pub n_max: u32,
    /// `N` for the two-copy suite.
    pub product_n: u32,
    pub copies: Vec<usize>,
    pub seed: u64,
    pub modules: usize,
    pub shapiro_modules: usize,
    pub product_modules: usize,
    /// Extra `(p, N)` pairs for the single-subgroup bound.
    pub extra_prop_single: Vec<(u64, u32)>,
    pub enum_cap: usize,
    pub dim_cap: usize,
    pub relaxed_decompose: bool,
    pub out: Option<PathBuf>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            primes: vec![2, 3],
            n_max: 4,
            product_n: 2,
            copies: vec![1, 2],
            seed: 0,
            modules: 200,
            shapiro_modules: 50,
            product_modules: 50,
            extra_prop_single: vec![(5, 3)],
            enum_cap: crate::congruence::DEFAULT_ENUM_CAP,
            dim_cap: DEFAULT_DIM_CAP,
            relaxed_decompose: false,
            out: None,
        }
    }
}

impl SuiteConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parameter(format!("config: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        if self.primes.is_empty() {
            return Err(Error::Parameter("no primes configured".into()));
        }
        for &p in self
            .primes
            .iter()
            .chain(self.extra_prop_single.iter().map(|(p, _)| p))
        {
            if !is_prime(p) {
                return Err(Error::Parameter(format!("{p} is not prime")));
            }
        }
        if self.n_max < 2 || self.product_n < 1 {
            return Err(Error::Parameter(
                "need n_max >= 2 and product_n >= 1".into(),
            ));
        }
        if self.extra_prop_single.iter().any(|&(_, n)| n < 2) {
            return Err(Error::Parameter(
                "extra prop-single levels need N >= 2".into(),
            ));
        }
        if self.copies.is_empty() || self.copies.iter().any(|&t| t != 1 && t != 2) {
            return Err(Error::Parameter("copies must be drawn from {1, 2}".into()));
        }
        if self.enum_cap == 0 || self.dim_cap == 0 {
            return Err(Error::Parameter("caps must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Delta,
    Subgroups,
    Coset,
    Sympow,
    Algebra,
    Coinvariants,
    Shapiro,
    Product,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Report,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum SortKey {
    Num(u64),
    Text(String),
}

/// One line of `verify` output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub suite: Suite,
    pub check: String,
    pub status: Status,
    pub params: Value,
    pub detail: Value,
    #[serde(skip)]
    key: Vec<SortKey>,
}

impl CheckRecord {
    fn new(
        suite: Suite,
        check: &str,
        params: &[(&str, Value)],
        holds: Option<bool>,
        detail: Value,
    ) -> Self {
        let mut obj = serde_json::Map::new();
        let mut key = Vec::new();
        for (name, v) in params {
            key.push(match v {
                Value::Number(n) => SortKey::Num(n.as_u64().unwrap_or(0)),
                Value::Null => SortKey::Num(0),
                other => SortKey::Text(other.to_string()),
            });
            obj.insert(name.to_string(), v.clone());
        }
        CheckRecord {
            suite,
            check: check.into(),
            status: match holds {
                None => Status::Report,
                Some(true) => Status::Pass,
                Some(false) => Status::Fail,
            },
            params: Value::Object(obj),
            detail,
            key,
        }
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

fn order_records(a: &CheckRecord, b: &CheckRecord) -> Ordering {
    (a.suite, &a.key, &a.check).cmp(&(b.suite, &b.key, &b.check))
}

pub fn sort_records(records: &mut [CheckRecord]) {
    records.sort_by(order_records);
}

pub const DELTA_RANGE: (f64, f64) = (0.2070, 0.2080);

pub fn suite_delta() -> Result<Vec<CheckRecord>> {
    let d2 = delta_of_p(2);
    let (argmin, min) = delta_argmin(100)?;
    Ok(vec![
        CheckRecord::new(
            Suite::Delta,
            "delta_2",
            &[("p", json!(2))],
            Some((DELTA_RANGE.0..=DELTA_RANGE.1).contains(&d2)),
            json!({ "delta": format!("{d2:.10}") }),
        ),
        CheckRecord::new(
            Suite::Delta,
            "delta_argmin",
            &[("pmax", json!(100))],
            None,
            json!({ "argmin": argmin, "delta": format!("{min:.10}"), "is_two": argmin == 2 }),
        ),
    ])
}

pub fn suite_subgroups(cfg: &SuiteConfig) -> Result<Vec<CheckRecord>> {
    let mut jobs = Vec::new();
    for &p in &cfg.primes {
        for n in 2..=cfg.n_max {
            jobs.push((p, n));
        }
    }
    let out: Vec<Vec<CheckRecord>> = jobs
        .par_iter()
        .map(|&(p, n)| -> Result<Vec<CheckRecord>> {
            let ctx = LevelContext::new(p, n)?.with_enum_cap(cfg.enum_cap);
            let mut recs = Vec::new();
            for l in 3..n {
                for j in 2..l {
                    let params = [
                        ("p", json!(p)),
                        ("N", json!(n)),
                        ("l", json!(l)),
                        ("j", json!(j)),
                    ];
                    let prod = verify_product_identity(l, j, &ctx)?;
                    recs.push(CheckRecord::new(
                        Suite::Subgroups,
                        "product_identity",
                        &params,
                        Some(prod),
                        json!({}),
                    ));
                    let r = intersection_identity_report(l, j, &ctx)?;
                    recs.push(CheckRecord::new(
                        Suite::Subgroups,
                        "intersection_identity",
                        &params,
                        Some(r.holds()),
                        serde_json::to_value(r).unwrap(),
                    ));
                }
            }
            for k in (1..=n).step_by(2) {
                let r = conjugate_h_to_t(k, &ctx)?;
                recs.push(CheckRecord::new(
                    Suite::Subgroups,
                    "conjugate_h_to_t",
                    &[("p", json!(p)), ("N", json!(n)), ("k", json!(k))],
                    Some(r.holds),
                    serde_json::to_value(r).unwrap(),
                ));
            }
            Ok(recs)
        })
        .collect::<Result<_>>()?;
    Ok(out.into_iter().flatten().collect())
}

/// Census, shift recurrence and quotient maps at one `(p, k)`.
pub fn coset_records(p: u64, k: u32, cfg: &SuiteConfig) -> Result<Vec<CheckRecord>> {
    let space = CosetSpace::with_cap(p, k, cfg.dim_cap)?;
    let params = [("p", json!(p)), ("k", json!(k))];
    let mut recs = Vec::new();
    let census = invariant_subspace_census(&space)?;
    let matches = census.len() == space.len() + 1
        && census
            .iter()
            .enumerate()
            .all(|(i, s)| filtration_f(i, &space).map(|f| &f == s).unwrap_or(false));
    recs.push(CheckRecord::new(
        Suite::Coset,
        "census",
        &params,
        Some(matches),
        json!({ "members": census.len(), "expected": space.len() + 1 }),
    ));
    let shift = (0..space.len())
        .map(|t| shift_recurrence_check(t, &space))
        .collect::<Result<Vec<_>>>()?;
    recs.push(CheckRecord::new(
        Suite::Coset,
        "shift_recurrence",
        &params,
        Some(shift.iter().all(|&b| b)),
        json!({ "t_checked": shift.len() }),
    ));
    let mut failures = Vec::new();
    let mut count = 0;
    for l in 1..=k {
        for a in 0..pow(p, k - l) as usize {
            count += 1;
            let r = quotient_iso(a, l, &space)?;
            if !r.holds() {
                failures.push(json!({ "a": a, "l": l }));
            }
        }
    }
    recs.push(CheckRecord::new(
        Suite::Coset,
        "quotient_iso",
        &params,
        Some(failures.is_empty()),
        json!({ "pairs": count, "failures": failures }),
    ));
    let elems = space.context().brute_force_level_group()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let pairs: Vec<_> = (0..100)
        .map(|_| {
            (
                elems[rng.gen_range(0..elems.len())],
                elems[rng.gen_range(0..elems.len())],
            )
        })
        .collect();
    recs.push(CheckRecord::new(
        Suite::Coset,
        "intertwining",
        &params,
        Some(certify_intertwining(&pairs, &space)?),
        json!({ "pairs": pairs.len(), "seed": cfg.seed }),
    ));
    let mut bad = Vec::new();
    for d in 0..=space.len() as u64 {
        if !decompose_submodule(d, &space, true)?.verified() {
            bad.push(d);
        }
    }
    recs.push(CheckRecord::new(
        Suite::Coset,
        "decompose_relaxed",
        &params,
        Some(bad.is_empty()),
        json!({ "d_checked": space.len() + 1, "failures": bad }),
    ));
    Ok(recs)
}

pub fn suite_coset(cfg: &SuiteConfig) -> Result<Vec<CheckRecord>> {
    let mut jobs = Vec::new();
    for &p in &cfg.primes {
        for k in 1..=cfg.n_max {
            jobs.push((p, k));
        }
    }
    let mut out: Vec<CheckRecord> = jobs
        .par_iter()
        .map(|&(p, k)| coset_records(p, k, cfg))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    // base p^4 decomposition needs 4 | k - 1
    for &p in &cfg.primes {
        let Ok(space) = CosetSpace::with_cap(p, 5, cfg.dim_cap) else {
            continue;
        };
        let mut bad = Vec::new();
        for d in 0..=space.len() as u64 {
            let r = decompose_submodule(d, &space, false)?;
            if !r.verified() {
                bad.push(d);
            }
        }
        out.push(CheckRecord::new(
            Suite::Coset,
            "decompose",
            &[("p", json!(p)), ("k", json!(5))],
            Some(bad.is_empty()),
            json!({ "d_checked": space.len() + 1, "failures": bad }),
        ));
    }
    Ok(out)
}

pub fn suite_sympow(cfg: &SuiteConfig) -> Result<Vec<CheckRecord>> {
    let mut recs = Vec::new();
    let mut shifts = Vec::new();
    for &p in &cfg.primes {
        for d in 0..=4usize {
            for k in minimal_level(d, p).max(1)..=cfg.n_max {
                let space = CosetSpace::with_cap(p, k, cfg.dim_cap)?;
                let r = sym_reduction(d, &space)?;
                let eq = equivariance_check(d, &space)?;
                shifts.push(r.m as i64 - d as i64);
                recs.push(CheckRecord::new(
                    Suite::Sympow,
                    "sym_reduction",
                    &[("p", json!(p)), ("d", json!(d)), ("k", json!(k))],
                    Some(r.invariant && eq),
                    json!({ "m": r.m, "equivariant": eq }),
                ));
            }
        }
    }
    shifts.sort_unstable();
    shifts.dedup();
    recs.push(CheckRecord::new(
        Suite::Sympow,
        "sym_m_resolution",
        &[],
        Some(shifts.len() == 1),
        json!({ "m_minus_d": shifts }),
    ));
    Ok(recs)
}

pub fn algebra_base(p: u64) -> u32 {
    if p == 2 {
        2
    } else {
        1
    }
}

pub fn suite_algebra(cfg: &SuiteConfig) -> Result<Vec<CheckRecord>> {
    let mut recs = Vec::new();
    let mut jobs: Vec<(u64, u32, usize, u32)> = Vec::new();
    for &p in &cfg.primes {
        let b = algebra_base(p);
        for n in b + 1..=cfg.n_max {
            jobs.push((p, n, 1, b));
        }
        if p == 2 {
            jobs.push((p, 3, 1, 1));
        }
        if cfg.copies.contains(&2) {
            jobs.push((p, b + 1, 2, b));
        }
    }
    let done: Vec<Vec<CheckRecord>> = jobs
        .par_iter()
        .map(|&(p, n, t, b)| -> Result<Vec<CheckRecord>> {
            let order = (pow(p, 3 * (n - b)) as u128).pow(t as u32);
            let params = [
                ("p", json!(p)),
                ("N", json!(n)),
                ("t", json!(t)),
                ("base", json!(b)),
            ];
            if order > cfg.dim_cap as u128 {
                return Ok(vec![CheckRecord::new(
                    Suite::Algebra,
                    "monomial_basis",
                    &params,
                    None,
                    json!({ "skipped": "dimension above cap", "dim": order as u64 }),
                )]);
            }
            let g = Arc::new(FiniteGroup::new(p, n, t, b, cfg.enum_cap)?);
            let a = TruncatedAlgebra::with_cap(g.clone(), cfg.dim_cap);
            let basis = a.monomial_basis_check()?;
            let uniform = !(p == 2 && b == 1);
            let mut out = vec![CheckRecord::new(
                Suite::Algebra,
                "monomial_basis",
                &params,
                if uniform { Some(basis.holds) } else { None },
                serde_json::to_value(&basis).unwrap(),
            )];
            if !basis.holds {
                return Ok(out);
            }
            let v = a.variables();
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let e = a.exponent();
            let mut failures = 0;
            for _ in 0..100 {
                let al = MonomialIndex((0..v).map(|_| rng.gen_range(0..e)).collect());
                let be = MonomialIndex((0..v).map(|_| rng.gen_range(0..e)).collect());
                if !a.graded_commutativity_check(&al, &be)? {
                    failures += 1;
                }
            }
            out.push(CheckRecord::new(
                Suite::Algebra,
                "graded_commutativity",
                &params,
                Some(failures == 0),
                json!({ "pairs": 100, "failures": failures, "seed": cfg.seed }),
            ));
            for l in b..=n {
                let r = a.ideal_ip(l)?;
                let mut ps = params.to_vec();
                ps.push(("l", json!(l)));
                out.push(CheckRecord::new(
                    Suite::Algebra,
                    "ideal_ip",
                    &ps,
                    Some(r.equal),
                    serde_json::to_value(r).unwrap(),
                ));
            }
            if a.dim() <= 64 {
                let bad: Vec<_> = a
                    .basis_indices()
                    .iter()
                    .map(|al| {
                        a.ideal_i_alpha(al)
                            .map(|r| (al.clone(), r.two_sided && r.successor_contained))
                    })
                    .collect::<Result<Vec<_>>>()?
                    .into_iter()
                    .filter(|(_, ok)| !ok)
                    .map(|(al, _)| al)
                    .collect();
                out.push(CheckRecord::new(
                    Suite::Algebra,
                    "ideal_two_sided",
                    &params,
                    Some(bad.is_empty()),
                    json!({ "failures": bad }),
                ));
            }
            if t == 1 && a.dim() <= 64 {
                let mut modules = vec![GModule::regular(g.clone()), GModule::trivial(g.clone())];
                for s in 0..5 {
                    modules.push(CyclicModule::random(g.clone(), cfg.seed + s).to_explicit()?);
                }
                let small: Vec<MonomialIndex> = a
                    .basis_indices()
                    .into_iter()
                    .filter(|i| i.degree() <= 3)
                    .collect();
                let mut fails = 0;
                let mut checked = 0;
                let mut first_quotient = true;
                for m in &modules {
                    let (fq, co) = a.first_quotient_check(m)?;
                    first_quotient &= fq == co;
                    for be in &small {
                        for al in small.iter().filter(|al| al.dominates(be)) {
                            checked += 1;
                            if !a.surjection_check(m, be, al)?.holds {
                                fails += 1;
                            }
                        }
                    }
                }
                out.push(CheckRecord::new(
                    Suite::Algebra,
                    "surjection",
                    &params,
                    Some(fails == 0),
                    json!({ "modules": modules.len(), "pairs": checked, "failures": fails }),
                ));
                out.push(CheckRecord::new(
                    Suite::Algebra,
                    "first_quotient",
                    &params,
                    Some(first_quotient),
                    json!({ "modules": modules.len() }),
                ));
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    recs.extend(done.into_iter().flatten());
    let mut bad = 0;
    for &p in &cfg.primes {
        for l in 1..=3 {
            for code in 0..64u32 {
                let al = MonomialIndex(vec![code & 3, (code >> 2) & 3, (code >> 4) & 3]);
                let r = count_nonmajorizing(&al, l, p);
                let side = pow(p, l) as u32;
                let mut brute = 0u64;
                for x in 0..side.pow(3) {
                    let b = [x % side, (x / side) % side, x / side / side];
                    if !b.iter().zip(&al.0).all(|(b, a)| b >= a) {
                        brute += 1;
                    }
                }
                if brute != r.count || !r.holds {
                    bad += 1;
                }
            }
        }
    }
    recs.push(CheckRecord::new(
        Suite::Algebra,
        "count_nonmajorizing",
        &[],
        Some(bad == 0),
        json!({ "failures": bad }),
    ));
    Ok(recs)
}

/// Module family used by the coinvariant suites: trivial, regular, then seeded cyclic modules.
pub fn module_family(
    group: &Arc<FiniteGroup>,
    count: usize,
    seed: u64,
    dim_cap: usize,
) -> Vec<(String, Option<u64>, CyclicModule)> {
    let mut out = vec![
        (
            "trivial".to_string(),
            None,
            CyclicModule::trivial(group.clone()).with_dim_cap(dim_cap),
        ),
        (
            "regular".to_string(),
            None,
            CyclicModule::regular(group.clone()).with_dim_cap(dim_cap),
        ),
    ];
    for i in 0..count as u64 {
        let s = seed.wrapping_add(i);
        out.push((
            "cyclic".into(),
            Some(s),
            CyclicModule::random(group.clone(), s).with_dim_cap(dim_cap),
        ));
    }
    out
}

/// Inequality checks for one module at `(p, N)`.
pub fn module_inequalities(
    label: &str,
    seed: Option<u64>,
    m: &CyclicModule,
    prop_only: bool,
) -> Result<Vec<CheckRecord>> {
    let g = m.group().clone();
    let (p, n) = (g.p(), g.depth());
    let base = [
        ("p", json!(p)),
        ("N", json!(n)),
        ("module", json!(label)),
        ("seed", json!(seed)),
    ];
    let with = |extra: &[(&'static str, Value)]| {
        let mut v = base.to_vec();
        v.extend_from_slice(extra);
        v
    };
    let mut recs = Vec::new();
    for k in 1..n {
        let r = prop_single_check(m, k)?;
        recs.push(CheckRecord::new(
            Suite::Coinvariants,
            "prop_single",
            &with(&[("k", json!(k))]),
            if k >= 2 { Some(r.holds) } else { None },
            serde_json::to_value(r).unwrap(),
        ));
    }
    if prop_only {
        return Ok(recs);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(u64::MAX) ^ 0x5eed);
    for l in 2..n {
        for j in 1..l {
            let lj = [("l", json!(l)), ("j", json!(j))];
            let t = g.spec_subgroup(SubgroupSpec::Tlj { l, j })?;
            let tu = g.spec_subgroup(SubgroupSpec::TljUpper { l, j })?;
            let r = inclusion_exclusion_check(m, &t, &tu)?;
            recs.push(CheckRecord::new(
                Suite::Coinvariants,
                "inclusion_exclusion",
                &with(&lj),
                Some(r.holds),
                serde_json::to_value(r).unwrap(),
            ));
            let mut conj = vec![rng.gen_range(0..g.order())];
            if j >= 2 {
                conj.push(g.embed(0, &g.context().upper(pow(p, j - 1)))?);
            }
            for x in conj {
                let r = conjugation_invariance_check(m, &t, x)?;
                recs.push(CheckRecord::new(
                    Suite::Coinvariants,
                    "conjugation",
                    &with(&[("l", json!(l)), ("j", json!(j)), ("g", json!(x))]),
                    Some(r.holds),
                    serde_json::to_value(r).unwrap(),
                ));
            }
            if j >= 2 {
                let r = recursion_check(m, l, j)?;
                recs.push(CheckRecord::new(
                    Suite::Coinvariants,
                    "recursion",
                    &with(&lj),
                    Some(r.holds),
                    serde_json::to_value(r).unwrap(),
                ));
            }
        }
    }
    for row in indhyp_sweep(m, n - 1)? {
        recs.push(CheckRecord::new(
            Suite::Coinvariants,
            "indhyp",
            &with(&[("l", json!(row.l)), ("j", json!(row.j))]),
            if row.asserted { Some(row.holds) } else { None },
            serde_json::to_value(&row).unwrap(),
        ));
    }
    Ok(recs)
}

pub fn suite_coinvariants(cfg: &SuiteConfig) -> Result<Vec<CheckRecord>> {
    let mut jobs: Vec<(u64, u32, bool)> =
        cfg.primes.iter().map(|&p| (p, cfg.n_max, false)).collect();
    jobs.extend(cfg.extra_prop_single.iter().map(|&(p, n)| (p, n, true)));
    let mut out = Vec::new();
    for (p, n, prop_only) in jobs {
        let g = Arc::new(FiniteGroup::new(p, n, 1, 1, cfg.enum_cap)?);
        let family = module_family(&g, cfg.modules, cfg.seed, cfg.dim_cap);
        let recs: Vec<Vec<CheckRecord>> = family
            .par_iter()
            .map(|(label, seed, m)| module_inequalities(label, *seed, m, prop_only))
            .collect::<Result<_>>()?;
        out.extend(recs.into_iter().flatten());
    }
    Ok(out)
}

pub fn suite_shapiro(cfg: &SuiteConfig) -> Result<Vec<CheckRecord>> {
    let n = cfg.n_max.min(3);
    let k = 2.min(n);
    let mut out = Vec::new();
    for &p in &cfg.primes {
        let g = Arc::new(FiniteGroup::new(p, n, 1, 1, cfg.enum_cap)?);
        let mut mods: Vec<(String, Option<u64>)> =
            vec![("trivial".into(), None), ("regular".into(), None)];
        mods.extend(
            (0..cfg.shapiro_modules as u64)
                .map(|i| ("cyclic".to_string(), Some(cfg.seed.wrapping_add(i)))),
        );
        let recs: Vec<CheckRecord> = mods
            .par_iter()
            .map(|(label, seed)| -> Result<CheckRecord> {
                let m = match (label.as_str(), seed) {
                    ("trivial", _) => GModule::trivial(g.clone()),
                    ("regular", _) => GModule::regular(g.clone()),
                    (_, Some(s)) => CyclicModule::random(g.clone(), *s)
                        .with_dim_cap(cfg.dim_cap)
                        .to_explicit()?,
                    _ => unreachable!(),
                };
                let r = shapiro_h0_check(&m, k)?;
                Ok(CheckRecord::new(
                    Suite::Shapiro,
                    "shapiro_h0",
                    &[
                        ("p", json!(p)),
                        ("N", json!(n)),
                        ("k", json!(k)),
                        ("module", json!(label)),
                        ("seed", json!(seed)),
                    ],
                    Some(r.holds),
                    serde_json::to_value(r).unwrap(),
                ))
            })
            .collect::<Result<_>>()?;
        out.extend(recs);
    }
    Ok(out)
}

pub fn suite_product(cfg: &SuiteConfig) -> Result<Vec<CheckRecord>> {
    if !cfg.copies.contains(&2) {
        return Ok(Vec::new());
    }
    let n = cfg.product_n;
    let mut out = Vec::new();
    for &p in &cfg.primes {
        let g = Arc::new(FiniteGroup::new(p, n, 2, 1, cfg.enum_cap)?);
        let family = module_family(&g, cfg.product_modules, cfg.seed, cfg.dim_cap);
        let recs: Vec<CheckRecord> = family
            .par_iter()
            .map(|(label, seed, m)| -> Result<CheckRecord> {
                let r = coinvarlem_product_check(m)?;
                Ok(CheckRecord::new(
                    Suite::Product,
                    "coinvarlem_product",
                    &[
                        ("p", json!(p)),
                        ("N", json!(n)),
                        ("t", json!(2)),
                        ("module", json!(label)),
                        ("seed", json!(seed)),
                    ],
                    Some(r.holds()),
                    serde_json::to_value(&r).unwrap(),
                ))
            })
            .collect::<Result<_>>()?;
        out.extend(recs);
    }
    Ok(out)
}

/// Every suite, merged and sorted.
pub fn run_verify(cfg: &SuiteConfig) -> Result<Vec<CheckRecord>> {
    cfg.validate()?;
    let mut all = suite_delta()?;
    all.extend(suite_subgroups(cfg)?);
    all.extend(suite_coset(cfg)?);
    all.extend(suite_sympow(cfg)?);
    all.extend(suite_algebra(cfg)?);
    all.extend(suite_coinvariants(cfg)?);
    all.extend(suite_shapiro(cfg)?);
    all.extend(suite_product(cfg)?);
    sort_records(&mut all);
    Ok(all)
}

/// One row of a `sweep` table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub table: String,
    pub p: u64,
    #[serde(rename = "N")]
    pub n: u32,
    pub t: usize,
    pub module: String,
    pub seed: Option<u64>,
    pub subgroup: String,
    pub dim: usize,
    pub bound: f64,
    pub ratio: f64,
}

fn sweep_module(
    table_n: u32,
    label: &str,
    seed: Option<u64>,
    m: &CyclicModule,
) -> Result<Vec<SweepRow>> {
    let g = m.group();
    let (p, n) = (g.p(), g.depth());
    let lmax = table_n - 1;
    let c = minimal_constant(m, lmax)?;
    let c = num_traits::ToPrimitive::to_f64(&c).unwrap_or(f64::NAN);
    let eta = num_traits::ToPrimitive::to_f64(&eta(p)).unwrap();
    let row = |table: &str, sub: String, dim: usize, bound: f64| SweepRow {
        table: table.into(),
        p,
        n,
        t: 1,
        module: label.into(),
        seed,
        subgroup: sub,
        dim,
        bound,
        ratio: dim as f64 / bound,
    };
    let mut out = Vec::new();
    for k in 1..=lmax {
        let pk2 = pow(p, 2 * k) as f64;
        let gk = m.coinvariant_dim(&g.spec_subgroup(SubgroupSpec::G { k })?)?;
        out.push(row(
            "decay_G",
            SubgroupSpec::G { k }.to_string(),
            gk,
            c * pk2,
        ));
        let tk = m.coinvariant_dim(&g.spec_subgroup(SubgroupSpec::T { k })?)?;
        out.push(row(
            "decay_T",
            SubgroupSpec::T { k }.to_string(),
            tk,
            c * eta.powi(k as i32 - 2) * pk2,
        ));
        for j in 0..k {
            let spec = SubgroupSpec::Tlj { l: k, j };
            let d = m.coinvariant_dim(&g.spec_subgroup(spec)?)?;
            out.push(row(
                "decay_Tlj",
                spec.to_string(),
                d,
                c * eta.powi(j as i32 - 1) * pk2,
            ));
        }
    }
    for h in harris_report(m, lmax)? {
        out.push(row(
            "harris",
            SubgroupSpec::G { k: h.n }.to_string(),
            h.dim,
            h.index as f64,
        ));
    }
    Ok(out)
}

pub fn run_sweep(cfg: &SuiteConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for &p in &cfg.primes {
        let g = Arc::new(FiniteGroup::new(p, cfg.n_max, 1, 1, cfg.enum_cap)?);
        let family = module_family(&g, cfg.modules, cfg.seed, cfg.dim_cap);
        let r: Vec<Vec<SweepRow>> = family
            .par_iter()
            .map(|(label, seed, m)| sweep_module(cfg.n_max, label, *seed, m))
            .collect::<Result<_>>()?;
        rows.extend(r.into_iter().flatten());
        if cfg.copies.contains(&2) {
            let g2 = Arc::new(FiniteGroup::new(p, cfg.product_n, 2, 1, cfg.enum_cap)?);
            let family = module_family(&g2, cfg.product_modules, cfg.seed, cfg.dim_cap);
            let r: Vec<Vec<SweepRow>> = family
                .par_iter()
                .map(|(label, seed, m)| -> Result<Vec<SweepRow>> {
                    let rep = coinvarlem_product_check(m)?;
                    Ok(rep
                        .rows
                        .iter()
                        .map(|r| SweepRow {
                            table: "product".into(),
                            p,
                            n: cfg.product_n,
                            t: 2,
                            module: label.clone(),
                            seed: *seed,
                            subgroup: format!("T({:?})", r.k),
                            dim: r.dim,
                            bound: r.dim as f64 / r.ratio,
                            ratio: r.ratio,
                        })
                        .collect())
                })
                .collect::<Result<_>>()?;
            rows.extend(r.into_iter().flatten());
        }
    }
    rows.sort_by(|a, b| {
        (&a.table, a.p, a.n, a.t, &a.module, a.seed, &a.subgroup).cmp(&(
            &b.table,
            b.p,
            b.n,
            b.t,
            &b.module,
            b.seed,
            &b.subgroup,
        ))
    });
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaRow {
    pub p: u64,
    pub delta: String,
    pub minimum: bool,
}

pub fn run_delta(pmax: u64) -> Result<Vec<DeltaRow>> {
    let rows = delta_table(pmax)?;
    let (argmin, _) = delta_argmin(pmax)?;
    Ok(rows
        .into_iter()
        .map(|(p, d)| DeltaRow {
            p,
            delta: format!("{d:.10}"),
            minimum: p == argmin,
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

fn csv_error(e: csv::Error) -> Error {
    Error::Resource {
        what: format!("csv output: {e}"),
        required: 0,
        cap: 0,
    }
}

fn io_error(e: std::io::Error) -> Error {
    Error::Resource {
        what: format!("output: {e}"),
        required: 0,
        cap: 0,
    }
}

fn write_rows<T: Serialize>(rows: &[T], format: Format, out: &mut dyn Write) -> Result<()> {
    match format {
        Format::Json => {
            for r in rows {
                writeln!(out, "{}", serde_json::to_string(r).unwrap()).map_err(io_error)?;
            }
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r).map_err(csv_error)?;
            }
            w.flush().map_err(io_error)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct FlatRecord<'a> {
    suite: Suite,
    check: &'a str,
    status: Status,
    params: String,
    detail: String,
}

/// Runs every suite and writes the records. Returns whether all checks passed.
pub fn cmd_verify(cfg: &SuiteConfig, format: Format, out: &mut dyn Write) -> Result<bool> {
    let records = run_verify(cfg)?;
    match format {
        Format::Json => {
            writeln!(out, "{}", json!({ "config": cfg })).map_err(io_error)?;
            write_rows(&records, format, out)?;
        }
        Format::Csv => {
            let flat: Vec<_> = records
                .iter()
                .map(|r| FlatRecord {
                    suite: r.suite,
                    check: &r.check,
                    status: r.status,
                    params: r.params.to_string(),
                    detail: r.detail.to_string(),
                })
                .collect();
            write_rows(&flat, format, out)?;
        }
    }
    Ok(records.iter().all(CheckRecord::passed))
}

#[derive(Serialize)]
struct SeededRow<'a> {
    #[serde(flatten)]
    row: &'a SweepRow,
    base_seed: u64,
}

pub fn cmd_sweep(cfg: &SuiteConfig, format: Format, out: &mut dyn Write) -> Result<()> {
    let rows = run_sweep(cfg)?;
    match format {
        Format::Json => {
            let rows: Vec<_> = rows
                .iter()
                .map(|row| SeededRow {
                    row,
                    base_seed: cfg.seed,
                })
                .collect();
            write_rows(&rows, format, out)
        }
        Format::Csv => {
            // csv cannot serialize flattened structs
            let mut w = csv::Writer::from_writer(out);
            w.write_record([
                "table",
                "p",
                "N",
                "t",
                "module",
                "seed",
                "subgroup",
                "dim",
                "bound",
                "ratio",
                "base_seed",
            ])
            .map_err(csv_error)?;
            for r in &rows {
                w.write_record([
                    r.table.clone(),
                    r.p.to_string(),
                    r.n.to_string(),
                    r.t.to_string(),
                    r.module.clone(),
                    r.seed.map(|s| s.to_string()).unwrap_or_default(),
                    r.subgroup.clone(),
                    r.dim.to_string(),
                    format!("{:.6}", r.bound),
                    format!("{:.6}", r.ratio),
                    cfg.seed.to_string(),
                ])
                .map_err(csv_error)?;
            }
            w.flush().map_err(io_error)
        }
    }
}

/// Filtration of `F(d)` at `(p, k)`. Fails verification if any step does not check out.
pub fn cmd_decompose(
    d: u64,
    p: u64,
    k: u32,
    cfg: &SuiteConfig,
    out: &mut dyn Write,
) -> Result<bool> {
    let space = CosetSpace::with_cap(p, k, cfg.dim_cap)?;
    let r = decompose_submodule(d, &space, cfg.relaxed_decompose)?;
    writeln!(out, "{}", serde_json::to_string_pretty(&r).unwrap()).map_err(io_error)?;
    Ok(r.verified())
}

/// `None` prints an aligned text table with the minimum marked.
pub fn cmd_delta(pmax: u64, format: Option<Format>, out: &mut dyn Write) -> Result<()> {
    let rows = run_delta(pmax)?;
    match format {
        Some(f) => write_rows(&rows, f, out),
        None => {
            writeln!(out, "{:>5}  {:>12}", "p", "delta").map_err(io_error)?;
            for r in &rows {
                let mark = if r.minimum { "  <- minimum" } else { "" };
                writeln!(out, "{:>5}  {:>12}{mark}", r.p, r.delta).map_err(io_error)?;
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SuiteConfig {
        SuiteConfig {
            primes: vec![2, 3],
            n_max: 3,
            modules: 3,
            shapiro_modules: 2,
            product_modules: 2,
            extra_prop_single: vec![],
            ..SuiteConfig::default()
        }
    }

    #[test]
    fn config_round_trip_and_validation() {
        let cfg = SuiteConfig::default();
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(SuiteConfig::from_toml(&text).unwrap(), cfg);
        assert!(cfg.validate().is_ok());
        let partial = SuiteConfig::from_toml("primes = [3]\nseed = 7\n").unwrap();
        assert_eq!(
            (partial.primes, partial.seed, partial.n_max),
            (vec![3], 7, 4)
        );
        assert!(SuiteConfig::from_toml("bogus = 1").is_err());
        for bad in [
            SuiteConfig {
                primes: vec![4],
                ..SuiteConfig::default()
            },
            SuiteConfig {
                primes: vec![],
                ..SuiteConfig::default()
            },
            SuiteConfig {
                n_max: 1,
                ..SuiteConfig::default()
            },
            SuiteConfig {
                dim_cap: 0,
                ..SuiteConfig::default()
            },
            SuiteConfig {
                copies: vec![3],
                ..SuiteConfig::default()
            },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn small_verify_is_deterministic() {
        let cfg = small();
        let a = run_verify(&cfg).unwrap();
        let b = run_verify(&cfg).unwrap();
        let ser = |r: &[CheckRecord]| {
            r.iter()
                .map(|x| serde_json::to_string(x).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(ser(&a), ser(&b));
        let failed: Vec<_> = a.iter().filter(|r| r.status == Status::Fail).collect();
        assert!(failed.is_empty(), "{failed:?}");
        assert!(a
            .iter()
            .any(|r| r.check == "delta_argmin" && r.status == Status::Report));
    }

    #[test]
    fn delta_rows() {
        let rows = run_delta(2).unwrap();
        assert_eq!(
            rows,
            vec![DeltaRow {
                p: 2,
                delta: "0.2075187496".into(),
                minimum: true
            }]
        );
        assert!(run_delta(1).is_err());
        let rows = run_delta(100).unwrap();
        assert_eq!(rows.iter().filter(|r| r.minimum).count(), 1);
    }

    #[test]
    fn sweep_rows_are_sorted() {
        let rows = run_sweep(&small()).unwrap();
        assert!(!rows.is_empty());
        assert!(rows.iter().any(|r| r.table == "product"));
        assert!(rows.iter().any(|r| r.table == "harris"));
        let mut buf = Vec::new();
        cmd_sweep(&small(), Format::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("table,p,N,t,module,seed,subgroup,dim,bound,ratio,base_seed\n"));
        assert_eq!(text.lines().count(), rows.len() + 1);
    }

    #[test]
    fn delta_text_marks_minimum() {
        let mut buf = Vec::new();
        cmd_delta(7, None, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().filter(|l| l.contains("minimum")).count(), 1);
        assert!(text.lines().nth(1).unwrap().contains("0.2075187496"));
    }

    #[test]
    fn decompose_reports_levels() {
        let mut buf = Vec::new();
        let cfg = SuiteConfig {
            relaxed_decompose: true,
            ..SuiteConfig::default()
        };
        assert!(cmd_decompose(5, 3, 3, &cfg, &mut buf).unwrap());
        let v: Value = serde_json::from_slice(&buf).unwrap();
        let levels: Vec<u64> = v["steps"]
            .as_array()
            .unwrap()
            .iter()
            .map(|s| s["quotient_level"].as_u64().unwrap())
            .collect();
        assert_eq!(levels, vec![2, 1, 1]);
        assert!(cmd_decompose(5, 3, 3, &SuiteConfig::default(), &mut Vec::new()).is_err());
    }
}
