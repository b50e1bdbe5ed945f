//! C ABI over `iwasawa-coinv`.
//!
//! Every fallible function returns an [`IwcStatus`] and writes its result through an
//! out-pointer. On failure the message is available from [`iwc_last_error`] on the
//! same thread until the next failing call. Handles are opaque and must be released
//! with their matching `_free` function; strings returned to the caller are released
//! with [`iwc_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use iwasawa_coinv::coinvariants::{delta_of_p, prop_single_check, Coinvariants, CyclicModule};
use iwasawa_coinv::congruence::{
    verify_intersection_identity, verify_product_identity, LevelContext, SubgroupSpec,
};
use iwasawa_coinv::coset::{decompose_submodule, invariant_subspace_census, CosetSpace};
use iwasawa_coinv::group::FiniteGroup;
use iwasawa_coinv::report::{cmd_verify, Format, SuiteConfig};
use iwasawa_coinv::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IwcStatus {
    Ok = 0,
    NullPointer = 1,
    Parameter = 2,
    Context = 3,
    Domain = 4,
    Resource = 5,
    Containment = 6,
    Structural = 7,
    Utf8 = 8,
    Panic = 9,
}

/// Subgroup family selector for [`IwcSubgroup`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IwcSubgroupKind {
    /// Principal congruence subgroup `G(p^k)`.
    G = 0,
    H = 1,
    HOpposite = 2,
    T = 3,
    Tlj = 4,
    TljUpper = 5,
    TljLower = 6,
}

/// `k` is read by the single-index kinds, `l` and `j` by the `Tlj` kinds.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct IwcSubgroup {
    pub kind: IwcSubgroupKind,
    pub k: u32,
    pub l: u32,
    pub j: u32,
}

impl IwcSubgroup {
    fn spec(&self) -> SubgroupSpec {
        let (k, l, j) = (self.k, self.l, self.j);
        match self.kind {
            IwcSubgroupKind::G => SubgroupSpec::G { k },
            IwcSubgroupKind::H => SubgroupSpec::H { k },
            IwcSubgroupKind::HOpposite => SubgroupSpec::HOpposite { k },
            IwcSubgroupKind::T => SubgroupSpec::T { k },
            IwcSubgroupKind::Tlj => SubgroupSpec::Tlj { l, j },
            IwcSubgroupKind::TljUpper => SubgroupSpec::TljUpper { l, j },
            IwcSubgroupKind::TljLower => SubgroupSpec::TljLower { l, j },
        }
    }
}

/// Coset space `G/H(p^k)`.
pub struct IwcCosetSpace(CosetSpace);

/// Finite quotient of `G^t` by its depth-`N` congruence subgroup.
pub struct IwcGroup(Arc<FiniteGroup>);

/// Cyclic module over the group algebra of an [`IwcGroup`].
pub struct IwcModule(CyclicModule);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> IwcStatus {
    match e {
        Error::Context(_) => IwcStatus::Context,
        Error::Parameter(_) => IwcStatus::Parameter,
        Error::Domain(_) => IwcStatus::Domain,
        Error::Resource { .. } => IwcStatus::Resource,
        Error::Containment(_) => IwcStatus::Containment,
        Error::Structural(_) => IwcStatus::Structural,
    }
}

enum Failure {
    Core(Error),
    Null(&'static str),
    Utf8,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> IwcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => IwcStatus::Ok,
        Ok(Err(Failure::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            IwcStatus::NullPointer
        }
        Ok(Err(Failure::Utf8)) => {
            set_error("input is not valid UTF-8".into());
            IwcStatus::Utf8
        }
        Err(_) => {
            set_error("internal panic".into());
            IwcStatus::Panic
        }
    }
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn input<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s)
        .map(CString::into_raw)
        .unwrap_or(ptr::null_mut())
}

/// Message of the last failure on this thread, or NULL. Owned by the library.
#[no_mangle]
pub extern "C" fn iwc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn iwc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `out_delta` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn iwc_delta_of_p(p: u64, out_delta: *mut f64) -> IwcStatus {
    guard(|| {
        let o = out(out_delta, "out_delta")?;
        if !iwasawa_coinv::arith::is_prime(p) {
            return Err(Error::Parameter(format!("{p} is not prime")).into());
        }
        *o = delta_of_p(p);
        Ok(())
    })
}

/// Product identity `T(l,j) T(l,j)' T(l,j)'' = T(l-1,j-1)` at level `p^n`.
///
/// # Safety
/// `out_holds` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn iwc_verify_product_identity(
    p: u64,
    n: u32,
    l: u32,
    j: u32,
    out_holds: *mut bool,
) -> IwcStatus {
    guard(|| {
        let o = out(out_holds, "out_holds")?;
        *o = verify_product_identity(l, j, &LevelContext::new(p, n)?)?;
        Ok(())
    })
}

/// # Safety
/// `out_holds` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn iwc_verify_intersection_identity(
    p: u64,
    n: u32,
    l: u32,
    j: u32,
    out_holds: *mut bool,
) -> IwcStatus {
    guard(|| {
        let o = out(out_holds, "out_holds")?;
        *o = verify_intersection_identity(l, j, &LevelContext::new(p, n)?)?;
        Ok(())
    })
}

/// # Safety
/// `out_space` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn iwc_coset_space_new(
    p: u64,
    k: u32,
    out_space: *mut *mut IwcCosetSpace,
) -> IwcStatus {
    guard(|| {
        let o = out(out_space, "out_space")?;
        *o = Box::into_raw(Box::new(IwcCosetSpace(CosetSpace::new(p, k)?)));
        Ok(())
    })
}

/// # Safety
/// `space` must be NULL or a live handle from [`iwc_coset_space_new`].
#[no_mangle]
pub unsafe extern "C" fn iwc_coset_space_free(space: *mut IwcCosetSpace) {
    if !space.is_null() {
        drop(Box::from_raw(space));
    }
}

/// Number of points `p^(k-1)`, which is also the module dimension.
///
/// # Safety
/// `space` must be a live handle and `out_len` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn iwc_coset_space_len(
    space: *const IwcCosetSpace,
    out_len: *mut usize,
) -> IwcStatus {
    guard(|| {
        *out(out_len, "out_len")? = input(space, "space")?.0.len();
        Ok(())
    })
}

/// Number of invariant subspaces of the coset module.
///
/// # Safety
/// `space` must be a live handle and `out_count` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn iwc_invariant_subspace_count(
    space: *const IwcCosetSpace,
    out_count: *mut usize,
) -> IwcStatus {
    guard(|| {
        let s = input(space, "space")?;
        *out(out_count, "out_count")? = invariant_subspace_census(&s.0)?.len();
        Ok(())
    })
}

/// Filtration of `F(d)` as a JSON document; free it with [`iwc_string_free`].
///
/// # Safety
/// `space` must be a live handle and `out_json` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn iwc_decompose_json(
    space: *const IwcCosetSpace,
    d: u64,
    relaxed: bool,
    out_json: *mut *mut c_char,
) -> IwcStatus {
    guard(|| {
        let s = input(space, "space")?;
        let o = out(out_json, "out_json")?;
        let r = decompose_submodule(d, &s.0, relaxed)?;
        *o = into_c_string(serde_json::to_string(&r).expect("serializable"));
        Ok(())
    })
}

/// `copies` copies of `G(p^base)` modulo `p^depth`.
///
/// # Safety
/// `out_group` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn iwc_group_new(
    p: u64,
    depth: u32,
    copies: usize,
    base: u32,
    enum_cap: usize,
    out_group: *mut *mut IwcGroup,
) -> IwcStatus {
    guard(|| {
        let o = out(out_group, "out_group")?;
        let g = FiniteGroup::new(p, depth, copies, base, enum_cap)?;
        *o = Box::into_raw(Box::new(IwcGroup(Arc::new(g))));
        Ok(())
    })
}

/// # Safety
/// `group` must be NULL or a live handle from [`iwc_group_new`].
#[no_mangle]
pub unsafe extern "C" fn iwc_group_free(group: *mut IwcGroup) {
    if !group.is_null() {
        drop(Box::from_raw(group));
    }
}

/// # Safety
/// `group` must be a live handle and `out_order` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn iwc_group_order(
    group: *const IwcGroup,
    out_order: *mut usize,
) -> IwcStatus {
    guard(|| {
        *out(out_order, "out_order")? = input(group, "group")?.0.order();
        Ok(())
    })
}

/// Seeded random cyclic module. The module keeps the group alive on its own.
///
/// # Safety
/// `group` must be a live handle and `out_module` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn iwc_module_random(
    group: *const IwcGroup,
    seed: u64,
    out_module: *mut *mut IwcModule,
) -> IwcStatus {
    guard(|| {
        let g = input(group, "group")?;
        *out(out_module, "out_module")? =
            Box::into_raw(Box::new(IwcModule(CyclicModule::random(g.0.clone(), seed))));
        Ok(())
    })
}

/// # Safety
/// `group` must be a live handle and `out_module` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn iwc_module_regular(
    group: *const IwcGroup,
    out_module: *mut *mut IwcModule,
) -> IwcStatus {
    guard(|| {
        let g = input(group, "group")?;
        *out(out_module, "out_module")? =
            Box::into_raw(Box::new(IwcModule(CyclicModule::regular(g.0.clone()))));
        Ok(())
    })
}

/// # Safety
/// `group` must be a live handle and `out_module` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn iwc_module_trivial(
    group: *const IwcGroup,
    out_module: *mut *mut IwcModule,
) -> IwcStatus {
    guard(|| {
        let g = input(group, "group")?;
        *out(out_module, "out_module")? =
            Box::into_raw(Box::new(IwcModule(CyclicModule::trivial(g.0.clone()))));
        Ok(())
    })
}

/// # Safety
/// `module` must be NULL or a live module handle.
#[no_mangle]
pub unsafe extern "C" fn iwc_module_free(module: *mut IwcModule) {
    if !module.is_null() {
        drop(Box::from_raw(module));
    }
}

/// Dimension of the coinvariants under a subgroup of the first copy.
///
/// # Safety
/// `module` and `subgroup` must be valid and `out_dim` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn iwc_module_coinvariant_dim(
    module: *const IwcModule,
    subgroup: *const IwcSubgroup,
    out_dim: *mut usize,
) -> IwcStatus {
    guard(|| {
        let m = &input(module, "module")?.0;
        let spec = input(subgroup, "subgroup")?.spec();
        let sub = m.group().spec_subgroup(spec)?;
        *out(out_dim, "out_dim")? = m.coinvariant_dim(&sub)?;
        Ok(())
    })
}

/// Single-subgroup bound at `T(p^k)` with the minimal hypothesis constant.
///
/// # Safety
/// `module` must be live and `out_holds` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn iwc_prop_single(
    module: *const IwcModule,
    k: u32,
    out_holds: *mut bool,
) -> IwcStatus {
    guard(|| {
        let m = &input(module, "module")?.0;
        *out(out_holds, "out_holds")? = prop_single_check(m, k)?.holds;
        Ok(())
    })
}

/// Runs the verification suites for a TOML config (NULL or empty for defaults) and
/// returns the JSON-lines report.
///
/// # Safety
/// `config_toml` must be NULL or a NUL-terminated string; out-pointers valid for writes.
#[no_mangle]
pub unsafe extern "C" fn iwc_verify_json(
    config_toml: *const c_char,
    out_report: *mut *mut c_char,
    out_all_pass: *mut bool,
) -> IwcStatus {
    guard(|| {
        let report = out(out_report, "out_report")?;
        let pass = out(out_all_pass, "out_all_pass")?;
        let cfg = if config_toml.is_null() {
            SuiteConfig::default()
        } else {
            let text = CStr::from_ptr(config_toml)
                .to_str()
                .map_err(|_| Failure::Utf8)?;
            SuiteConfig::from_toml(text)?
        };
        let mut buf = Vec::new();
        *pass = cmd_verify(&cfg, Format::Json, &mut buf)?;
        *report = into_c_string(String::from_utf8(buf).map_err(|_| Failure::Utf8)?);
        Ok(())
    })
}
