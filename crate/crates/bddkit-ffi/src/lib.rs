//! C ABI for the bddkit core: opaque instance handles, integer error
//! codes, and caller-freed strings. The header `include/bddkit.h` mirrors
//! this surface.

use std::ffi::{c_char, c_double, c_int, CStr, CString};
use std::ptr;

use bddkit::instance::{bdd_to_file, InstanceFile};
use bddkit::norm::NormOrder;
use bddkit::numerics::{alpha_star, crossover_p, mo_bound, RankRatio};
use bddkit::rat::parse_rat;
use bddkit::reductions::{full_pipeline, ReductionParams};
use bddkit::sparsify::PrimePolicy;
use bddkit::Error;

pub const BDDKIT_OK: c_int = 0;
pub const BDDKIT_ERR_ARGUMENT: c_int = 1;
pub const BDDKIT_ERR_PARSE: c_int = 2;
pub const BDDKIT_ERR_CONSTRAINT: c_int = 3;
pub const BDDKIT_ERR_INTERNAL: c_int = 4;

/// Opaque instance handle (wraps a parsed instance file).
pub struct BddkitInstance {
    file: InstanceFile,
}

fn code_for(e: &Error) -> c_int {
    match e {
        Error::Parse(_) | Error::Json(_) => BDDKIT_ERR_PARSE,
        Error::Constraint(_) => BDDKIT_ERR_CONSTRAINT,
        Error::Domain(_) | Error::InvalidNorm(_) | Error::Dimension(_) => BDDKIT_ERR_ARGUMENT,
        _ => BDDKIT_ERR_INTERNAL,
    }
}

/// # Safety
/// `s` must be a valid NUL-terminated string or null.
unsafe fn cstr<'a>(s: *const c_char) -> Option<&'a str> {
    if s.is_null() {
        return None;
    }
    CStr::from_ptr(s).to_str().ok()
}

fn rank_ratio(c: c_double) -> Result<RankRatio, c_int> {
    if c.is_infinite() && c > 0.0 {
        Ok(RankRatio::Infinity)
    } else {
        RankRatio::finite(c).map_err(|e| code_for(&e))
    }
}

/// Static message for an error code.
#[no_mangle]
pub extern "C" fn bddkit_strerror(code: c_int) -> *const c_char {
    let msg: &'static [u8] = match code {
        BDDKIT_OK => b"ok\0",
        BDDKIT_ERR_ARGUMENT => b"invalid argument\0",
        BDDKIT_ERR_PARSE => b"parse error\0",
        BDDKIT_ERR_CONSTRAINT => b"parameter constraint violated\0",
        _ => b"internal error\0",
    };
    msg.as_ptr() as *const c_char
}

/// alpha*_{p,C}: `p` as a fraction, `C` finite > 1 or +inf, bracket
/// tolerance `tol`; writes the threshold to `out`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bddkit_alpha_star(
    p_num: u64,
    p_den: u64,
    c: c_double,
    tol: c_double,
    out: *mut c_double,
) -> c_int {
    if out.is_null() {
        return BDDKIT_ERR_ARGUMENT;
    }
    let p = match NormOrder::finite(p_num, p_den) {
        Ok(p) => p,
        Err(e) => return code_for(&e),
    };
    let cc = match rank_ratio(c) {
        Ok(cc) => cc,
        Err(code) => return code,
    };
    match alpha_star(&p, &cc, tol) {
        Ok(r) => {
            *out = r.value;
            BDDKIT_OK
        }
        Err(e) => code_for(&e),
    }
}

/// The p at which alpha*_{p,C} crosses `target_alpha`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bddkit_crossover_p(
    target_alpha: c_double,
    c: c_double,
    tol: c_double,
    out: *mut c_double,
) -> c_int {
    if out.is_null() {
        return BDDKIT_ERR_ARGUMENT;
    }
    let cc = match rank_ratio(c) {
        Ok(cc) => cc,
        Err(code) => return code,
    };
    match crossover_p(target_alpha, &cc, tol) {
        Ok(p) => {
            *out = p;
            BDDKIT_OK
        }
        Err(e) => code_for(&e),
    }
}

/// Mazo–Odlyzko bound on N_p(Z^n, r, 0).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bddkit_mo_bound(
    p_num: u64,
    p_den: u64,
    r: c_double,
    n: u32,
    out: *mut c_double,
) -> c_int {
    if out.is_null() {
        return BDDKIT_ERR_ARGUMENT;
    }
    let p = match NormOrder::finite(p_num, p_den) {
        Ok(p) => p,
        Err(e) => return code_for(&e),
    };
    match mo_bound(&p, r, n) {
        Ok(b) => {
            *out = b;
            BDDKIT_OK
        }
        Err(e) => code_for(&e),
    }
}

/// Parses an instance-file JSON document into an opaque handle.
///
/// # Safety
/// `json` must be NUL-terminated; `out` must be a valid pointer. The
/// handle must be released with `bddkit_instance_free`.
#[no_mangle]
pub unsafe extern "C" fn bddkit_instance_from_json(
    json: *const c_char,
    out: *mut *mut BddkitInstance,
) -> c_int {
    if out.is_null() {
        return BDDKIT_ERR_ARGUMENT;
    }
    *out = ptr::null_mut();
    let Some(s) = cstr(json) else {
        return BDDKIT_ERR_ARGUMENT;
    };
    match InstanceFile::from_json(s) {
        Ok(file) => {
            *out = Box::into_raw(Box::new(BddkitInstance { file }));
            BDDKIT_OK
        }
        Err(e) => code_for(&e),
    }
}

/// Serializes the handle back to JSON. The returned string must be freed
/// with `bddkit_string_free`.
///
/// # Safety
/// `inst` must be a live handle from this library; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn bddkit_instance_to_json(
    inst: *const BddkitInstance,
    out: *mut *mut c_char,
) -> c_int {
    if inst.is_null() || out.is_null() {
        return BDDKIT_ERR_ARGUMENT;
    }
    match (*inst).file.to_json() {
        Ok(s) => match CString::new(s) {
            Ok(cs) => {
                *out = cs.into_raw();
                BDDKIT_OK
            }
            Err(_) => BDDKIT_ERR_INTERNAL,
        },
        Err(e) => code_for(&e),
    }
}

/// Runs the GapCVP' -> BDD pipeline on a "gapcvp" instance handle.
/// `alpha` is "auto" or a rational/decimal string; `policy` is 0 for the
/// smallest admissible prime, 1 for a random one.
///
/// # Safety
/// Pointers must be valid as above; the output handle must be freed with
/// `bddkit_instance_free`.
#[no_mangle]
pub unsafe extern "C" fn bddkit_reduce(
    inst: *const BddkitInstance,
    c: c_double,
    alpha: *const c_char,
    policy: c_int,
    seed: u64,
    out: *mut *mut BddkitInstance,
) -> c_int {
    if inst.is_null() || out.is_null() {
        return BDDKIT_ERR_ARGUMENT;
    }
    *out = ptr::null_mut();
    let Some(alpha_s) = cstr(alpha) else {
        return BDDKIT_ERR_ARGUMENT;
    };
    let policy = match policy {
        0 => PrimePolicy::Smallest,
        1 => PrimePolicy::Random,
        _ => return BDDKIT_ERR_ARGUMENT,
    };
    let run = || -> bddkit::Result<InstanceFile> {
        let gap = (*inst).file.as_gapcvp()?;
        let cc = if gap.p.is_infinity() {
            RankRatio::Finite(1.0)
        } else if c.is_infinite() && c > 0.0 {
            RankRatio::Infinity
        } else {
            RankRatio::finite(c)?
        };
        let alpha = if alpha_s == "auto" {
            if gap.p.is_infinity() {
                parse_rat("1/2")?
            } else {
                let r = alpha_star(&gap.p, &cc, 1e-9)?;
                num_rational_from_f64(r.bracket_hi * 1.01)?
            }
        } else {
            parse_rat(alpha_s)?
        };
        let params = ReductionParams { p: gap.p.clone(), c: cc, alpha, policy, seed };
        let (bdd, _) = full_pipeline(&gap, &params)?;
        Ok(bdd_to_file(&bdd, None))
    };
    match run() {
        Ok(file) => {
            *out = Box::into_raw(Box::new(BddkitInstance { file }));
            BDDKIT_OK
        }
        Err(e) => code_for(&e),
    }
}

fn num_rational_from_f64(x: f64) -> bddkit::Result<bddkit::num_rational::BigRational> {
    bddkit::num_rational::BigRational::from_float(x)
        .ok_or_else(|| Error::Domain("non-finite alpha".into()))
}

/// # Safety
/// `inst` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn bddkit_instance_free(inst: *mut BddkitInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// # Safety
/// `s` must come from `bddkit_instance_to_json` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn bddkit_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_star_through_the_abi() {
        let mut v = 0.0f64;
        let code = unsafe { bddkit_alpha_star(2, 1, f64::INFINITY, 1e-6, &mut v) };
        assert_eq!(code, BDDKIT_OK);
        assert!((v - 1.05006).abs() < 1e-3);

        // p < 1 rejected
        let code = unsafe { bddkit_alpha_star(1, 2, f64::INFINITY, 1e-6, &mut v) };
        assert_eq!(code, BDDKIT_ERR_ARGUMENT);
        // C <= 1 rejected
        let code = unsafe { bddkit_alpha_star(2, 1, 1.0, 1e-6, &mut v) };
        assert_eq!(code, BDDKIT_ERR_ARGUMENT);
    }

    #[test]
    fn crossover_and_mo_bound() {
        let mut v = 0.0f64;
        let code = unsafe {
            bddkit_crossover_p(std::f64::consts::FRAC_1_SQRT_2, f64::INFINITY, 1e-6, &mut v)
        };
        assert_eq!(code, BDDKIT_OK);
        assert!((v - 4.2773).abs() < 1e-3);

        let code = unsafe { bddkit_mo_bound(2, 1, 1.0, 2, &mut v) };
        assert_eq!(code, BDDKIT_OK);
        assert!(v >= 5.0);
    }

    #[test]
    fn instance_round_trip_and_reduce() {
        let json = CString::new(
            r#"{"kind":"gapcvp","p":"inf","basis":[["2"]],"target":["1"]}"#,
        )
        .unwrap();
        let mut h: *mut BddkitInstance = ptr::null_mut();
        let code = unsafe { bddkit_instance_from_json(json.as_ptr(), &mut h) };
        assert_eq!(code, BDDKIT_OK);
        assert!(!h.is_null());

        let mut s: *mut c_char = ptr::null_mut();
        assert_eq!(unsafe { bddkit_instance_to_json(h, &mut s) }, BDDKIT_OK);
        let round = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
        unsafe { bddkit_string_free(s) };
        assert!(round.contains("\"gapcvp\""));

        let alpha = CString::new("auto").unwrap();
        let mut out: *mut BddkitInstance = ptr::null_mut();
        let code = unsafe { bddkit_reduce(h, 1.0, alpha.as_ptr(), 0, 7, &mut out) };
        assert_eq!(code, BDDKIT_OK);
        let mut s: *mut c_char = ptr::null_mut();
        assert_eq!(unsafe { bddkit_instance_to_json(out, &mut s) }, BDDKIT_OK);
        let bdd = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
        unsafe { bddkit_string_free(s) };
        assert!(bdd.contains("\"bdd\""));

        unsafe {
            bddkit_instance_free(out);
            bddkit_instance_free(h);
        }
    }

    #[test]
    fn bad_inputs_yield_codes_not_crashes() {
        let mut h: *mut BddkitInstance = ptr::null_mut();
        let bad = CString::new("{oops").unwrap();
        assert_eq!(
            unsafe { bddkit_instance_from_json(bad.as_ptr(), &mut h) },
            BDDKIT_ERR_PARSE
        );
        assert!(h.is_null());
        assert_eq!(
            unsafe { bddkit_instance_from_json(ptr::null(), &mut h) },
            BDDKIT_ERR_ARGUMENT
        );
        unsafe { bddkit_instance_free(ptr::null_mut()) }; // no-op
        let msg = unsafe { CStr::from_ptr(bddkit_strerror(BDDKIT_ERR_CONSTRAINT)) };
        assert_eq!(msg.to_str().unwrap(), "parameter constraint violated");
    }
}
