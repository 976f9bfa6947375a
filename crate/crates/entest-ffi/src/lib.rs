//! C ABI over the estimation library.
//!
//! Conventions: every function returns an [`EntestStatus`]; results come
//! back through out-pointers; spectra are opaque heap handles freed with
//! [`entest_spectrum_free`]. Panics are caught at the boundary and mapped
//! to `ENTEST_STATUS_INTERNAL_ERROR`.

use std::ffi::{c_char, c_double, c_ulonglong};
use std::panic::{catch_unwind, AssertUnwindSafe};

use entest::gain::average_gain;
use entest::local::local_gain;
use entest::prior::PriorDensity;
use entest::simulate::outcome_counts_at;
use entest::spectrum::Spectrum;

/// Result code of every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntestStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ComputationFailed = 3,
    InternalError = 4,
}

/// Opaque block decomposition for a fixed copy count.
pub struct EntestSpectrum {
    inner: Spectrum,
}

fn guard<F: FnOnce() -> EntestStatus>(f: F) -> EntestStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => EntestStatus::InternalError,
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn entest_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Builds the block decomposition for `n` copies.
///
/// # Safety
/// `out` must be a valid pointer to an `EntestSpectrum*` slot.
#[no_mangle]
pub unsafe extern "C" fn entest_spectrum_new(
    n: u32,
    out: *mut *mut EntestSpectrum,
) -> EntestStatus {
    if out.is_null() {
        return EntestStatus::NullPointer;
    }
    guard(|| match Spectrum::new(n) {
        Ok(inner) => {
            unsafe { *out = Box::into_raw(Box::new(EntestSpectrum { inner })) };
            EntestStatus::Ok
        }
        Err(_) => EntestStatus::InvalidArgument,
    })
}

/// Releases a spectrum handle. A null pointer is ignored.
///
/// # Safety
/// `spectrum` must be null or a pointer from [`entest_spectrum_new`] that
/// has not been freed.
#[no_mangle]
pub unsafe extern "C" fn entest_spectrum_free(spectrum: *mut EntestSpectrum) {
    if !spectrum.is_null() {
        drop(unsafe { Box::from_raw(spectrum) });
    }
}

/// Number of measurement outcomes (blocks), floor(N/2) + 1.
///
/// # Safety
/// `spectrum` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn entest_spectrum_block_count(
    spectrum: *const EntestSpectrum,
    out: *mut u32,
) -> EntestStatus {
    let (Some(spectrum), false) = (unsafe { spectrum.as_ref() }, out.is_null()) else {
        return EntestStatus::NullPointer;
    };
    unsafe { *out = spectrum.inner.block_count() as u32 };
    EntestStatus::Ok
}

/// Static facts of one block: twice the spin label, the eigenspace
/// dimension (2j+1)^2, and the multiplicity d_j as a double (d_j exceeds
/// 64-bit integers past N = 67).
///
/// # Safety
/// `spectrum` must be a live handle; out-pointers may be null to skip.
#[no_mangle]
pub unsafe extern "C" fn entest_spectrum_block_info(
    spectrum: *const EntestSpectrum,
    index: u32,
    out_twice_j: *mut u32,
    out_block_dim: *mut c_ulonglong,
    out_copies: *mut c_double,
) -> EntestStatus {
    let Some(spectrum) = (unsafe { spectrum.as_ref() }) else {
        return EntestStatus::NullPointer;
    };
    guard(|| match spectrum.inner.block(index as usize) {
        Ok(block) => {
            if !out_twice_j.is_null() {
                unsafe { *out_twice_j = block.j().twice() };
            }
            if !out_block_dim.is_null() {
                unsafe { *out_block_dim = block.block_dim() };
            }
            if !out_copies.is_null() {
                unsafe { *out_copies = block.copies_approx() };
            }
            EntestStatus::Ok
        }
        Err(_) => EntestStatus::InvalidArgument,
    })
}

/// The block weight n_j lambda_j(b) for one outcome.
///
/// # Safety
/// `spectrum` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn entest_spectrum_weight(
    spectrum: *const EntestSpectrum,
    index: u32,
    b: c_double,
    out: *mut c_double,
) -> EntestStatus {
    let (Some(spectrum), false) = (unsafe { spectrum.as_ref() }, out.is_null()) else {
        return EntestStatus::NullPointer;
    };
    if !(0.0..=1.0).contains(&b) {
        return EntestStatus::InvalidArgument;
    }
    guard(|| match spectrum.inner.block(index as usize) {
        Ok(block) => {
            unsafe { *out = block.weight(b) };
            EntestStatus::Ok
        }
        Err(_) => EntestStatus::InvalidArgument,
    })
}

/// Expected optimal gain in bits for `n` copies under the isotropic
/// (quadratic) prior.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn entest_average_gain_bits(n: u32, out: *mut c_double) -> EntestStatus {
    unsafe { gain_with_prior(n, &PriorDensity::quadratic(), out) }
}

/// Expected optimal gain in bits under a polynomial prior
/// sum_q coeffs[q] b^q. The coefficients must integrate to one.
///
/// # Safety
/// `coeffs` must point to `len` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn entest_average_gain_with_prior_bits(
    n: u32,
    coeffs: *const c_double,
    len: usize,
    out: *mut c_double,
) -> EntestStatus {
    if coeffs.is_null() || out.is_null() {
        return EntestStatus::NullPointer;
    }
    let slice = unsafe { std::slice::from_raw_parts(coeffs, len) };
    guard(|| match PriorDensity::from_f64_coeffs(slice) {
        Ok(prior) => unsafe { gain_with_prior_inner(n, &prior, out) },
        Err(_) => EntestStatus::InvalidArgument,
    })
}

/// Expected gain in bits of the optimal local (one-party) strategy under
/// the quadratic prior. Coincides with the two-party value.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn entest_local_gain_bits(n: u32, out: *mut c_double) -> EntestStatus {
    if out.is_null() {
        return EntestStatus::NullPointer;
    }
    guard(|| match local_gain(n, &PriorDensity::quadratic()) {
        Ok(report) => {
            unsafe { *out = report.average_gain_bits };
            EntestStatus::Ok
        }
        Err(_) => EntestStatus::ComputationFailed,
    })
}

/// Outcome marginals p(k) under the quadratic prior, written into a caller
/// buffer of length `len >= floor(n/2) + 1`.
///
/// # Safety
/// `out` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn entest_marginals(
    n: u32,
    out: *mut c_double,
    len: usize,
) -> EntestStatus {
    if out.is_null() {
        return EntestStatus::NullPointer;
    }
    guard(|| {
        let Ok(spec) = Spectrum::new(n) else {
            return EntestStatus::InvalidArgument;
        };
        if len < spec.block_count() {
            return EntestStatus::InvalidArgument;
        }
        match average_gain(&spec, &PriorDensity::quadratic()) {
            Ok(report) => {
                let dst = unsafe { std::slice::from_raw_parts_mut(out, len) };
                dst[..report.marginals.len()].copy_from_slice(&report.marginals);
                EntestStatus::Ok
            }
            Err(_) => EntestStatus::ComputationFailed,
        }
    })
}

/// Draws `trials` outcomes at a fixed parameter value and tallies them into
/// `out_counts` (length `len >= floor(n/2) + 1`). Deterministic in `seed`.
///
/// # Safety
/// `out_counts` must point to `len` u64 slots.
#[no_mangle]
pub unsafe extern "C" fn entest_simulate_outcome_counts(
    n: u32,
    b: c_double,
    trials: c_ulonglong,
    seed: c_ulonglong,
    out_counts: *mut c_ulonglong,
    len: usize,
) -> EntestStatus {
    if out_counts.is_null() {
        return EntestStatus::NullPointer;
    }
    guard(|| {
        let Ok(spec) = Spectrum::new(n) else {
            return EntestStatus::InvalidArgument;
        };
        if len < spec.block_count() || !(0.0..=1.0).contains(&b) {
            return EntestStatus::InvalidArgument;
        }
        match outcome_counts_at(&spec, b, trials, seed) {
            Ok(counts) => {
                let dst = unsafe { std::slice::from_raw_parts_mut(out_counts, len) };
                dst[..counts.len()].copy_from_slice(&counts);
                EntestStatus::Ok
            }
            Err(_) => EntestStatus::ComputationFailed,
        }
    })
}

unsafe fn gain_with_prior(n: u32, prior: &PriorDensity, out: *mut c_double) -> EntestStatus {
    if out.is_null() {
        return EntestStatus::NullPointer;
    }
    guard(|| unsafe { gain_with_prior_inner(n, prior, out) })
}

unsafe fn gain_with_prior_inner(
    n: u32,
    prior: &PriorDensity,
    out: *mut c_double,
) -> EntestStatus {
    let Ok(spec) = Spectrum::new(n) else {
        return EntestStatus::InvalidArgument;
    };
    match average_gain(&spec, prior) {
        Ok(report) => {
            unsafe { *out = report.average_gain_bits };
            EntestStatus::Ok
        }
        Err(_) => EntestStatus::ComputationFailed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    #[test]
    fn spectrum_handle_round_trip() {
        let mut handle: *mut EntestSpectrum = ptr::null_mut();
        unsafe {
            assert_eq!(entest_spectrum_new(3, &mut handle), EntestStatus::Ok);
            let mut count = 0u32;
            assert_eq!(
                entest_spectrum_block_count(handle, &mut count),
                EntestStatus::Ok
            );
            assert_eq!(count, 2);

            let (mut tj, mut dim, mut copies) = (0u32, 0u64, 0f64);
            assert_eq!(
                entest_spectrum_block_info(handle, 0, &mut tj, &mut dim, &mut copies),
                EntestStatus::Ok
            );
            assert_eq!((tj, dim), (3, 16));
            assert_eq!(copies, 1.0);
            assert_eq!(
                entest_spectrum_block_info(handle, 1, &mut tj, &mut dim, &mut copies),
                EntestStatus::Ok
            );
            assert_eq!((tj, dim), (1, 4));
            assert_eq!(copies, 2.0);

            let mut w = 0f64;
            assert_eq!(
                entest_spectrum_weight(handle, 0, 1.0, &mut w),
                EntestStatus::Ok
            );
            assert_eq!(w, 1.0);
            assert_eq!(
                entest_spectrum_weight(handle, 9, 0.5, &mut w),
                EntestStatus::InvalidArgument
            );
            assert_eq!(
                entest_spectrum_weight(handle, 0, 1.5, &mut w),
                EntestStatus::InvalidArgument
            );
            entest_spectrum_free(handle);
        }
    }

    #[test]
    fn null_arguments_are_reported() {
        unsafe {
            assert_eq!(
                entest_spectrum_new(2, ptr::null_mut()),
                EntestStatus::NullPointer
            );
            let mut count = 0u32;
            assert_eq!(
                entest_spectrum_block_count(ptr::null(), &mut count),
                EntestStatus::NullPointer
            );
            assert_eq!(
                entest_average_gain_bits(2, ptr::null_mut()),
                EntestStatus::NullPointer
            );
            entest_spectrum_free(ptr::null_mut());
        }
    }

    #[test]
    fn invalid_copy_counts_are_rejected() {
        let mut handle: *mut EntestSpectrum = ptr::null_mut();
        unsafe {
            assert_eq!(
                entest_spectrum_new(0, &mut handle),
                EntestStatus::InvalidArgument
            );
        }
    }

    #[test]
    fn gains_match_the_library() {
        let mut gain = 0f64;
        unsafe {
            assert_eq!(entest_average_gain_bits(2, &mut gain), EntestStatus::Ok);
        }
        assert!((gain - 0.03750556829).abs() < 1e-8);

        let mut local = 0f64;
        unsafe {
            assert_eq!(entest_local_gain_bits(2, &mut local), EntestStatus::Ok);
        }
        assert!((local - gain).abs() < 1e-12);

        // uniform prior through the coefficient interface
        let coeffs = [1.0f64];
        let mut uniform_gain = 0f64;
        unsafe {
            assert_eq!(
                entest_average_gain_with_prior_bits(2, coeffs.as_ptr(), 1, &mut uniform_gain),
                EntestStatus::Ok
            );
        }
        assert!((uniform_gain - 0.0348087077705).abs() < 1e-8);

        // non-normalized prior is rejected
        let bad = [2.0f64];
        unsafe {
            assert_eq!(
                entest_average_gain_with_prior_bits(2, bad.as_ptr(), 1, &mut uniform_gain),
                EntestStatus::InvalidArgument
            );
        }
    }

    #[test]
    fn marginals_and_simulation() {
        let mut marginals = [0f64; 2];
        unsafe {
            assert_eq!(
                entest_marginals(2, marginals.as_mut_ptr(), 2),
                EntestStatus::Ok
            );
        }
        assert!((marginals[0] - 0.9).abs() < 1e-12);
        assert!((marginals[1] - 0.1).abs() < 1e-12);

        let mut counts = [0u64; 2];
        unsafe {
            assert_eq!(
                entest_simulate_outcome_counts(2, 1.0, 1000, 7, counts.as_mut_ptr(), 2),
                EntestStatus::Ok
            );
        }
        assert_eq!(counts, [1000, 0]);

        // short buffer
        unsafe {
            assert_eq!(
                entest_marginals(2, marginals.as_mut_ptr(), 1),
                EntestStatus::InvalidArgument
            );
        }
    }

    #[test]
    fn version_is_nul_terminated() {
        let ptr = entest_version();
        let s = unsafe { std::ffi::CStr::from_ptr(ptr) };
        assert!(!s.to_str().unwrap().is_empty());
    }
}
