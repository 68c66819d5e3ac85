//! C ABI for the demcat toolkit: opaque category handles, status codes, and
//! JSON-carrying strings, so other languages can drive the builds and the
//! verification without touching the Rust API.
//!
//! Every function returns a `DemcatStatus`; on any failure
//! `demcat_last_error` carries a message for the calling thread. Strings
//! returned through out-parameters are owned by the library and must be
//! released with `demcat_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use demcat::bridge::{verify_equivalence, MoritaContext};
use demcat::cluster::{ClusterCategory, ObjId, ObjName};
use demcat::error::Error;
use demcat::field::Rationals;

/// Status codes of every C entry point.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum DemcatStatus {
    Ok = 0,
    InvalidArgument = 1,
    NotClusterTilting = 2,
    VerificationFailed = 3,
    InternalError = 4,
}

/// Opaque handle to a built cluster category over the rationals.
pub struct DemcatCategory {
    inner: ClusterCategory<Rationals>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg).unwrap_or_else(|_| CString::new("invalid error message").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> DemcatStatus {
    match err {
        Error::NotClusterTilting(..) => DemcatStatus::NotClusterTilting,
        Error::Parse(_) | Error::Config(_) | Error::UnknownObject(_) => DemcatStatus::InvalidArgument,
        _ => DemcatStatus::InternalError,
    }
}

fn guard<F: FnOnce() -> DemcatStatus>(f: F) -> DemcatStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic".into());
            DemcatStatus::InternalError
        }
    }
}

unsafe fn parse_names(spec: *const c_char) -> Result<Vec<ObjName>, Error> {
    if spec.is_null() {
        return Err(Error::Config("null object list".into()));
    }
    let text = CStr::from_ptr(spec)
        .to_str()
        .map_err(|_| Error::Config("object list is not UTF-8".into()))?;
    text.split('+')
        .filter(|t| !t.trim().is_empty())
        .map(ObjName::parse)
        .collect()
}

fn resolve(cat: &ClusterCategory<Rationals>, names: &[ObjName]) -> Result<Vec<ObjId>, Error> {
    names.iter().map(|&n| cat.by_name(n)).collect()
}

/// The message of the most recent failure on this thread, or null.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn demcat_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| match &*slot.borrow() {
        Some(c) => c.as_ptr(),
        None => ptr::null(),
    })
}

/// Builds the (d+1)-cluster category of the linearly oriented A_n quiver.
///
/// # Safety
/// `out` must be a valid pointer; the returned handle must be released with
/// `demcat_category_free`.
#[no_mangle]
pub unsafe extern "C" fn demcat_category_new(
    n: usize,
    d: usize,
    out: *mut *mut DemcatCategory,
) -> DemcatStatus {
    guard(|| {
        if out.is_null() {
            set_error("null out pointer".into());
            return DemcatStatus::InvalidArgument;
        }
        match ClusterCategory::build(Rationals, n, d) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(DemcatCategory { inner }));
                DemcatStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// # Safety
/// `handle` must come from `demcat_category_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn demcat_category_free(handle: *mut DemcatCategory) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Number of indecomposable objects.
///
/// # Safety
/// `handle` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn demcat_object_count(handle: *const DemcatCategory) -> usize {
    if handle.is_null() {
        return 0;
    }
    (*handle).inner.len()
}

/// The name of one object, as a fresh string.
///
/// # Safety
/// `handle` must be live and `out` valid; release the string with
/// `demcat_string_free`.
#[no_mangle]
pub unsafe extern "C" fn demcat_object_name(
    handle: *const DemcatCategory,
    index: usize,
    out: *mut *mut c_char,
) -> DemcatStatus {
    guard(|| {
        if handle.is_null() || out.is_null() {
            set_error("null pointer".into());
            return DemcatStatus::InvalidArgument;
        }
        let cat = &(*handle).inner;
        if index >= cat.len() {
            set_error(format!("object index {index} out of range"));
            return DemcatStatus::InvalidArgument;
        }
        let name = cat.name(index).to_string();
        *out = CString::new(name).unwrap().into_raw();
        DemcatStatus::Ok
    })
}

/// Checks whether `m` (e.g. "P(0,1)+P(2,1)") is a (d+1)-cluster tilting
/// object; writes 1 or 0 into `out`.
///
/// # Safety
/// `handle`, `m` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn demcat_ct_check(
    handle: *const DemcatCategory,
    m: *const c_char,
    out: *mut i32,
) -> DemcatStatus {
    guard(|| {
        if handle.is_null() || out.is_null() {
            set_error("null pointer".into());
            return DemcatStatus::InvalidArgument;
        }
        let cat = &(*handle).inner;
        let names = match parse_names(m) {
            Ok(v) => v,
            Err(e) => {
                set_error(e.to_string());
                return DemcatStatus::InvalidArgument;
            }
        };
        match resolve(cat, &names).and_then(|ids| cat.is_cluster_tilting(&ids)) {
            Ok((ok, _)) => {
                *out = i32::from(ok);
                DemcatStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// The dimension of `Hom(X, Y[degree])` in the cluster category.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn demcat_hom_dim(
    handle: *const DemcatCategory,
    x: *const c_char,
    y: *const c_char,
    degree: i32,
    out: *mut usize,
) -> DemcatStatus {
    guard(|| {
        if handle.is_null() || out.is_null() {
            set_error("null pointer".into());
            return DemcatStatus::InvalidArgument;
        }
        let cat = &(*handle).inner;
        let go = || -> Result<usize, Error> {
            let xs = parse_names(x)?;
            let ys = parse_names(y)?;
            if xs.len() != 1 || ys.len() != 1 {
                return Err(Error::Config("expected single object names".into()));
            }
            cat.hom_dim(cat.by_name(xs[0])?, cat.by_name(ys[0])?, degree)
        };
        match go() {
            Ok(dim) => {
                *out = dim;
                DemcatStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Runs the full quotient/module verification for the cluster tilting
/// object `m` and returns the report as a JSON string. A verification that
/// runs but fails yields `VerificationFailed` and still writes the report.
///
/// # Safety
/// All pointers must be valid; release the string with `demcat_string_free`.
#[no_mangle]
pub unsafe extern "C" fn demcat_verify_json(
    handle: *const DemcatCategory,
    m: *const c_char,
    out_json: *mut *mut c_char,
) -> DemcatStatus {
    guard(|| {
        if handle.is_null() || out_json.is_null() {
            set_error("null pointer".into());
            return DemcatStatus::InvalidArgument;
        }
        let cat = &(*handle).inner;
        let go = || -> Result<(bool, String), Error> {
            let names = parse_names(m)?;
            let ids = resolve(cat, &names)?;
            let ctx = MoritaContext::new(cat, ids, false)?;
            let report = verify_equivalence(&ctx, cat.d + 2, 4)?;
            let json = serde_json::to_string_pretty(&report)
                .map_err(|e| Error::Config(format!("serialization failed: {e}")))?;
            Ok((report.overall, json))
        };
        match go() {
            Ok((overall, json)) => {
                *out_json = CString::new(json).unwrap().into_raw();
                if overall {
                    DemcatStatus::Ok
                } else {
                    set_error("verification report has failures".into());
                    DemcatStatus::VerificationFailed
                }
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn demcat_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn build_and_query_through_the_c_surface() {
        unsafe {
            let mut handle: *mut DemcatCategory = ptr::null_mut();
            assert_eq!(demcat_category_new(2, 2, &mut handle), DemcatStatus::Ok);
            assert_eq!(demcat_object_count(handle), 8);
            let mut name: *mut c_char = ptr::null_mut();
            assert_eq!(demcat_object_name(handle, 0, &mut name), DemcatStatus::Ok);
            let s = CStr::from_ptr(name).to_str().unwrap().to_string();
            assert_eq!(s, "P(0,1)");
            demcat_string_free(name);

            let m = CString::new("P(0,1)+P(2,1)").unwrap();
            let mut is_ct = 0i32;
            assert_eq!(demcat_ct_check(handle, m.as_ptr(), &mut is_ct), DemcatStatus::Ok);
            assert_eq!(is_ct, 1);
            let bad = CString::new("P(0,1)").unwrap();
            assert_eq!(demcat_ct_check(handle, bad.as_ptr(), &mut is_ct), DemcatStatus::Ok);
            assert_eq!(is_ct, 0);

            let x = CString::new("P(0,1)").unwrap();
            let y = CString::new("P(0,2)").unwrap();
            let mut dim = 0usize;
            assert_eq!(
                demcat_hom_dim(handle, x.as_ptr(), y.as_ptr(), 0, &mut dim),
                DemcatStatus::Ok
            );
            assert_eq!(dim, 1);

            let mut json: *mut c_char = ptr::null_mut();
            assert_eq!(demcat_verify_json(handle, m.as_ptr(), &mut json), DemcatStatus::Ok);
            let text = CStr::from_ptr(json).to_str().unwrap();
            let value: serde_json::Value = serde_json::from_str(text).unwrap();
            assert_eq!(value["overall"], true);
            demcat_string_free(json);

            demcat_category_free(handle);
        }
    }

    #[test]
    fn errors_set_messages() {
        unsafe {
            let mut handle: *mut DemcatCategory = ptr::null_mut();
            assert_eq!(demcat_category_new(0, 2, &mut handle), DemcatStatus::InvalidArgument);
            assert!(!demcat_last_error().is_null());

            assert_eq!(demcat_category_new(2, 2, &mut handle), DemcatStatus::Ok);
            let mut dim = 0usize;
            let x = CString::new("P(9,9)").unwrap();
            assert_eq!(
                demcat_hom_dim(handle, x.as_ptr(), x.as_ptr(), 0, &mut dim),
                DemcatStatus::InvalidArgument
            );
            let msg = CStr::from_ptr(demcat_last_error()).to_str().unwrap();
            assert!(msg.contains("P(9,9)"));
            demcat_category_free(handle);
        }
    }
}
