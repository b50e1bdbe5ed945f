//! Acceptance criteria, one PASS/FAIL line each.
//!
//! The process exits non-zero when the set of failing criteria differs from
//! `KNOWN_FAILURES`, so a regression or an unexpected fix both show up.

use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use iwasawa_coinv::arith::pow;
use iwasawa_coinv::coinvariants::{
    coinvarlem_product_check, conjugation_invariance_check, delta_argmin, delta_of_p,
    inclusion_exclusion_check, prop_single_check, recursion_check, shapiro_h0_check, CyclicModule,
    GModule,
};
use iwasawa_coinv::congruence::{
    verify_intersection_identity, verify_product_identity, LevelContext, SubgroupSpec,
};
use iwasawa_coinv::coset::{
    filtration_f, invariant_subspace_census, quotient_iso, shift_recurrence_check, CosetSpace,
};
use iwasawa_coinv::group::FiniteGroup;
use iwasawa_coinv::iwasawa::{MonomialIndex, TruncatedAlgebra};
use iwasawa_coinv::report::{cmd_verify, module_family, Format, SuiteConfig};
use iwasawa_coinv::sympow::{minimal_level, sym_reduction};

const DELTA_RANGE: (f64, f64) = (0.2070, 0.2080);
const ENUM_CAP: usize = 1 << 20;
const DIM_CAP: usize = 4096;
const SEED: u64 = 0;

/// Criteria whose literal statement does not hold; see the notes printed with each.
const KNOWN_FAILURES: [u32; 3] = [1, 2, 7];

struct Outcome {
    pass: bool,
    detail: String,
}

fn run(id: u32, name: &str, budget: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let mut out = f();
    let took = start.elapsed();
    if let Some(b) = budget {
        if took > b {
            out.pass = false;
            out.detail.push_str(&format!("; over budget {:.0?}", b));
        }
    }
    println!(
        "{} criterion {id:>2} {name}: {} ({:.2?})",
        if out.pass { "PASS" } else { "FAIL" },
        out.detail,
        took
    );
    out.pass
}

fn c1() -> Outcome {
    let d2 = delta_of_p(2);
    let (argmin, min) = delta_argmin(100).unwrap();
    let in_range = (DELTA_RANGE.0..=DELTA_RANGE.1).contains(&d2);
    Outcome {
        pass: in_range && argmin == 2,
        detail: format!(
            "delta(2)={d2:.10} in range: {in_range}; argmin over p<=100 is {argmin} (delta={min:.10}), delta(p) is decreasing so p=2 is the maximum"
        ),
    }
}

fn c2() -> Outcome {
    let mut failed = Vec::new();
    let mut checked = 0;
    for p in [2u64, 3] {
        for n in 2..=4u32 {
            let ctx = LevelContext::new(p, n).unwrap().with_enum_cap(ENUM_CAP);
            for l in 3..n {
                for j in 2..l {
                    checked += 1;
                    let prod = verify_product_identity(l, j, &ctx).unwrap();
                    let inter = verify_intersection_identity(l, j, &ctx).unwrap();
                    if !(prod && inter) {
                        failed.push(format!(
                            "p={p} N={n} (l,j)=({l},{j}) product={prod} intersection={inter}"
                        ));
                    }
                }
            }
        }
    }
    Outcome {
        pass: failed.is_empty(),
        detail: format!(
            "{checked} admissible cases, failures: [{}]",
            failed.join(", ")
        ),
    }
}

fn c3() -> Outcome {
    let mut bad = Vec::new();
    let mut pairs = 0;
    for p in [2u64, 3] {
        for k in 1..=4u32 {
            let s = CosetSpace::with_cap(p, k, DIM_CAP).unwrap();
            let census = invariant_subspace_census(&s).unwrap();
            let expected = pow(p, k - 1) as usize + 1;
            let each = census
                .iter()
                .enumerate()
                .all(|(i, v)| &filtration_f(i, &s).unwrap() == v);
            if census.len() != expected || !each {
                bad.push(format!("census p={p} k={k}: {} members", census.len()));
            }
            if !(0..s.len()).all(|t| shift_recurrence_check(t, &s).unwrap()) {
                bad.push(format!("shift p={p} k={k}"));
            }
            for l in 1..=k {
                for a in 0..pow(p, k - l) as usize {
                    pairs += 1;
                    if !quotient_iso(a, l, &s).unwrap().holds() {
                        bad.push(format!("quotient p={p} k={k} a={a} l={l}"));
                    }
                }
            }
        }
    }
    Outcome {
        pass: bad.is_empty(),
        detail: format!(
            "8 levels, {pairs} quotient pairs, failures: [{}]",
            bad.join(", ")
        ),
    }
}

fn c4() -> Outcome {
    let mut shifts = BTreeSet::new();
    let mut bad = Vec::new();
    let mut cases = 0;
    for p in [2u64, 3] {
        for d in 0..=4usize {
            for k in minimal_level(d, p).max(1)..=4 {
                cases += 1;
                let s = CosetSpace::with_cap(p, k, DIM_CAP).unwrap();
                let r = sym_reduction(d, &s).unwrap();
                shifts.insert(r.m as i64 - d as i64);
                let lands = r.invariant && filtration_f(r.m, &s).unwrap() == r.image;
                if !lands {
                    bad.push(format!("p={p} d={d} k={k}"));
                }
            }
        }
    }
    Outcome {
        pass: bad.is_empty() && shifts.len() == 1,
        detail: format!(
            "{cases} cases, m - d over all cases: {shifts:?}, failures: [{}]",
            bad.join(", ")
        ),
    }
}

fn c5() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    for n in [2u32, 3] {
        let g = Arc::new(FiniteGroup::new(3, n, 1, 1, ENUM_CAP).unwrap());
        let a = TruncatedAlgebra::with_cap(g, DIM_CAP);
        let basis = a.monomial_basis_check().unwrap();
        let full = pow(3, 3 * (n - 1)) as usize;
        pass &= basis.holds && basis.rank == full;
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        let e = a.exponent();
        let v = a.variables();
        let mut comm_fail = 0;
        for _ in 0..100 {
            let al = MonomialIndex((0..v).map(|_| rng.gen_range(0..e)).collect());
            let be = MonomialIndex((0..v).map(|_| rng.gen_range(0..e)).collect());
            if !a.graded_commutativity_check(&al, &be).unwrap() {
                comm_fail += 1;
            }
        }
        pass &= comm_fail == 0;
        let ideals: Vec<bool> = (1..=n).map(|l| a.ideal_ip(l).unwrap().equal).collect();
        pass &= ideals.iter().all(|&b| b);
        notes.push(format!(
            "N={n}: rank {}/{full}, commutativity failures {comm_fail}/100, ideal equality {ideals:?}",
            basis.rank
        ));
    }
    Outcome {
        pass,
        detail: notes.join("; "),
    }
}

fn c6() -> Outcome {
    let g = Arc::new(FiniteGroup::new(3, 4, 1, 1, ENUM_CAP).unwrap());
    let family = module_family(&g, 200, SEED, DIM_CAP);
    let counts: Vec<(usize, usize, Vec<String>)> = family
        .par_iter()
        .map(|(label, seed, m)| {
            let mut checks = 0;
            let mut failures = Vec::new();
            let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(u64::MAX) ^ 0xacce);
            for l in 2..=3u32 {
                for j in 1..l {
                    let t = g.spec_subgroup(SubgroupSpec::Tlj { l, j }).unwrap();
                    let tu = g.spec_subgroup(SubgroupSpec::TljUpper { l, j }).unwrap();
                    checks += 1;
                    if !inclusion_exclusion_check(m, &t, &tu).unwrap().holds {
                        failures.push(format!("{label}/{seed:?} inclusion-exclusion ({l},{j})"));
                    }
                    let mut conj = vec![rng.gen_range(0..g.order())];
                    if j >= 2 {
                        conj.push(g.embed(0, &g.context().upper(pow(3, j - 1))).unwrap());
                    }
                    for x in conj {
                        checks += 1;
                        if !conjugation_invariance_check(m, &t, x).unwrap().holds {
                            failures.push(format!("{label}/{seed:?} conjugation ({l},{j}) by {x}"));
                        }
                    }
                    if j >= 2 {
                        checks += 1;
                        if !recursion_check(m, l, j).unwrap().holds {
                            failures.push(format!("{label}/{seed:?} recursion ({l},{j})"));
                        }
                    }
                }
            }
            (1, checks, failures)
        })
        .collect();
    let modules: usize = counts.iter().map(|c| c.0).sum();
    let checks: usize = counts.iter().map(|c| c.1).sum();
    let failures: Vec<String> = counts.into_iter().flat_map(|c| c.2).collect();
    Outcome {
        pass: failures.is_empty() && modules == 202,
        detail: format!(
            "{modules} modules, {checks} checks, failures: [{}]",
            failures.join(", ")
        ),
    }
}

fn c7() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    for (p, n) in [(2u64, 4u32), (3, 4), (5, 3)] {
        let g = Arc::new(FiniteGroup::new(p, n, 1, 1, ENUM_CAP).unwrap());
        let family = module_family(&g, 200, SEED, DIM_CAP);
        let results: Vec<(u32, bool, String)> = family
            .par_iter()
            .flat_map_iter(|(label, seed, m)| {
                (1..n).map(move |k| {
                    let r = prop_single_check(m, k).unwrap();
                    (
                        k,
                        r.holds,
                        format!("{label}/{seed:?} k={k} dim={} bound={:.4}", r.dim, r.bound),
                    )
                })
            })
            .collect();
        for k in 1..n {
            let fails: Vec<&String> = results
                .iter()
                .filter(|r| r.0 == k && !r.1)
                .map(|r| &r.2)
                .collect();
            pass &= fails.is_empty();
            let sample = fails
                .first()
                .map(|s| format!(", e.g. {s}"))
                .unwrap_or_default();
            notes.push(format!(
                "p={p} N={n} k={k}: {} of {} fail{sample}",
                fails.len(),
                family.len()
            ));
        }
    }
    Outcome {
        pass,
        detail: notes.join("; "),
    }
}

fn c8() -> Outcome {
    let g = Arc::new(FiniteGroup::new(3, 3, 1, 1, ENUM_CAP).unwrap());
    let mut modules = vec![GModule::trivial(g.clone()), GModule::regular(g.clone())];
    for i in 0..50 {
        modules.push(
            CyclicModule::random(g.clone(), SEED + i)
                .with_dim_cap(DIM_CAP)
                .to_explicit()
                .unwrap(),
        );
    }
    let fails = modules
        .par_iter()
        .filter(|m| !shapiro_h0_check(m, 2).unwrap().holds)
        .count();
    Outcome {
        pass: fails == 0,
        detail: format!("{} modules, {fails} inequalities", modules.len()),
    }
}

fn c9() -> Outcome {
    let g = Arc::new(FiniteGroup::new(3, 2, 2, 1, ENUM_CAP).unwrap());
    let family = module_family(&g, 50, SEED, DIM_CAP);
    let reports: Vec<_> = family
        .par_iter()
        .skip(2)
        .map(|(_, _, m)| coinvarlem_product_check(m).unwrap())
        .collect();
    let bad = reports
        .iter()
        .filter(|r| !(r.bounded_by_module && r.monotone))
        .count();
    let max_ratio = reports
        .iter()
        .flat_map(|r| r.rows.iter().map(|x| x.ratio))
        .fold(0.0, f64::max);
    let exps: Vec<f64> = reports.iter().map(|r| r.fitted_exponent).collect();
    let mean = exps.iter().sum::<f64>() / exps.len() as f64;
    Outcome {
        pass: bad == 0 && reports.len() == 50,
        detail: format!(
            "{} modules, {bad} sanity/monotonicity failures, max ratio {max_ratio:.4}, mean fitted exponent {mean:.4} (reported only)",
            reports.len()
        ),
    }
}

fn c10() -> Outcome {
    let cfg = SuiteConfig::default();
    let mut first = Vec::new();
    let start = Instant::now();
    let ok = cmd_verify(&cfg, Format::Json, &mut first).unwrap();
    let once = start.elapsed();
    let mut second = Vec::new();
    cmd_verify(&cfg, Format::Json, &mut second).unwrap();
    let same = first == second;
    let budget = Duration::from_secs(300);
    Outcome {
        pass: same && once < budget,
        detail: format!(
            "{} bytes, identical: {same}, single run {once:.2?} on {} worker(s), all checks pass: {ok}",
            first.len(),
            rayon::current_num_threads()
        ),
    }
}

fn main() {
    // libtest-style filter arguments are ignored; this target always runs everything.
    let results = [
        (1, run(1, "delta formula", Some(Duration::from_secs(1)), c1)),
        (
            2,
            run(2, "subgroup identities", Some(Duration::from_secs(60)), c2),
        ),
        (
            3,
            run(
                3,
                "coset-module structure",
                Some(Duration::from_secs(120)),
                c3,
            ),
        ),
        (4, run(4, "symmetric-power reduction", None, c4)),
        (5, run(5, "monomial basis", None, c5)),
        (6, run(6, "coinvariant inequalities", None, c6)),
        (7, run(7, "single-subgroup bound", None, c7)),
        (8, run(8, "Shapiro H0", None, c8)),
        (9, run(9, "product-group case", None, c9)),
        (10, run(10, "determinism and budget", None, c10)),
    ];
    let failing: BTreeSet<u32> = results.iter().filter(|r| !r.1).map(|r| r.0).collect();
    let known: BTreeSet<u32> = KNOWN_FAILURES.into_iter().collect();
    println!("failing criteria: {failing:?}, documented: {known:?}");
    if failing != known {
        eprintln!("acceptance outcome differs from the documented set");
        std::process::exit(1);
    }
}
