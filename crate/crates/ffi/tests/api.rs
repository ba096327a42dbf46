use std::ffi::CStr;
use std::ptr;

use ssrchain_ffi::*;

fn chain(n: usize, sep: f64, mode: SsrMode) -> *mut SsrChain {
    let mut out = ptr::null_mut();
    let st = unsafe { ssr_chain_new(n, 50.0, sep, 1, mode as i32, &mut out) };
    assert_eq!(st, SsrStatus::Ok);
    assert!(!out.is_null());
    out
}

fn last_error() -> Option<String> {
    let p = ssr_last_error_message();
    (!p.is_null()).then(|| unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned())
}

#[test]
fn single_emitter_pole() {
    let c = chain(1, 0.7, SsrMode::SrCondition);
    let mut list = ptr::null_mut();
    unsafe {
        assert_eq!(ssr_find_poles(c, ptr::null(), &mut list), SsrStatus::Ok);
        assert_eq!(ssr_pole_list_len(list), 1);
        assert_eq!(ssr_pole_list_failures(list), 0);
        let mut p = std::mem::zeroed::<SsrPole>();
        assert_eq!(ssr_pole_list_get(list, 0, &mut p), SsrStatus::Ok);
        assert!((p.gamma.re - 1.0).abs() < 1e-10 && p.gamma.im.abs() < 1e-10);
        assert!((p.delta.im + 0.5).abs() < 1e-10);
        assert_eq!(p.classification, SsrPoleClass::MarkovianLike);
        assert_eq!(
            ssr_pole_list_get(list, 1, &mut p),
            SsrStatus::IndexOutOfRange
        );
        assert!(last_error().unwrap().contains("out of range"));
        ssr_pole_list_free(list);
        ssr_chain_free(c);
    }
}

#[test]
fn zero_mode_multiplicity_crosses_boundary() {
    let c = chain(4, 0.3, SsrMode::SrCondition);
    let mut list = ptr::null_mut();
    unsafe {
        assert_eq!(ssr_find_poles(c, ptr::null(), &mut list), SsrStatus::Ok);
        let mut p = std::mem::zeroed::<SsrPole>();
        assert_eq!(ssr_pole_list_get(list, 0, &mut p), SsrStatus::Ok);
        assert_eq!(p.classification, SsrPoleClass::ZeroMode);
        assert_eq!(p.multiplicity, 3);
        ssr_pole_list_free(list);
        ssr_chain_free(c);
    }
}

#[test]
fn charfn_vanishes_at_single_emitter_pole() {
    let c = chain(1, 0.3, SsrMode::General);
    let mut f = SsrComplex::default();
    unsafe {
        assert_eq!(
            ssr_charfn_eval(c, SsrComplex { re: 0.0, im: -0.5 }, &mut f),
            SsrStatus::Ok
        );
        assert!(f.re.hypot(f.im) < 1e-14);
        assert_eq!(
            ssr_charfn_eval(c, SsrComplex { re: 0.3, im: -0.5 }, &mut f),
            SsrStatus::Ok
        );
        assert!(f.re.hypot(f.im) > 1e-3);
        ssr_chain_free(c);
    }
}

#[test]
fn scattering_conserves_flux() {
    let c = chain(3, 0.4, SsrMode::General);
    let (mut t, mut r) = (SsrComplex::default(), SsrComplex::default());
    unsafe {
        for d in [-2.0, -0.3, 0.7, 5.0] {
            assert_eq!(ssr_scattering(c, d, &mut t, &mut r), SsrStatus::Ok);
            let flux = t.re * t.re + t.im * t.im + r.re * r.re + r.im * r.im;
            assert!((flux - 1.0).abs() < 1e-10);
        }
        assert_eq!(
            ssr_scattering(c, 0.0, &mut t, &mut r),
            SsrStatus::InvalidArgument
        );
        assert_eq!(
            ssr_scattering(c, 1.0, ptr::null_mut(), &mut r),
            SsrStatus::NullPointer
        );
        ssr_chain_free(c);
    }
}

#[test]
fn maximize_two_qubits() {
    let mut m = SsrMaximum::default();
    unsafe {
        assert_eq!(ssr_maximize(2, ptr::null(), &mut m), SsrStatus::Ok);
        assert!((m.gamma_ssr.re - 4.59112151921).abs() < 1e-9);
        assert!((m.l_critical - 0.556929085522).abs() < 1e-9);
        assert!(m.coalescence);
        let bracket = [0.3, 0.9];
        assert_eq!(ssr_maximize(2, bracket.as_ptr(), &mut m), SsrStatus::Ok);
        assert!((m.l_critical - 0.556929085522).abs() < 1e-9);
        assert_eq!(
            ssr_maximize(1, ptr::null(), &mut m),
            SsrStatus::InvalidArgument
        );
        assert!(last_error().is_some());
    }
}

#[test]
fn asymptotics() {
    let mut cp = SsrCriticalPair::default();
    let mut g = 0.0;
    unsafe {
        assert_eq!(ssr_critical_pair(&mut cp), SsrStatus::Ok);
        assert!((cp.alpha_c * cp.beta_c - 4.0).abs() < 1e-10);
        assert_eq!(ssr_g_eval(cp.alpha_c, cp.beta_c, &mut g), SsrStatus::Ok);
        assert!(g.abs() < 1e-10);
        assert_eq!(ssr_g_eval(1.0, -1.0, &mut g), SsrStatus::InvalidArgument);
        assert_eq!(
            ssr_g_eval(1.0, 1.0, ptr::null_mut()),
            SsrStatus::NullPointer
        );
    }
}

#[test]
fn invalid_arguments_and_nulls() {
    let mut out = ptr::null_mut();
    unsafe {
        assert_eq!(
            ssr_chain_new(2, 50.0, 0.3, 1, 7, &mut out),
            SsrStatus::InvalidArgument
        );
        assert!(last_error().unwrap().contains("mode"));
        assert_eq!(
            ssr_chain_new(0, 50.0, 0.3, 1, 0, &mut out),
            SsrStatus::InvalidArgument
        );
        assert_eq!(
            ssr_chain_new(2, 50.0, 0.3, 1, 0, ptr::null_mut()),
            SsrStatus::NullPointer
        );
        assert!(out.is_null());

        let mut list = ptr::null_mut();
        assert_eq!(
            ssr_find_poles(ptr::null(), ptr::null(), &mut list),
            SsrStatus::NullPointer
        );
        let c = chain(2, 0.3, SsrMode::General);
        let bad = SsrWindow {
            re_min: 1.0,
            re_max: -1.0,
            im_min: -1.0,
            im_max: 0.0,
        };
        assert_eq!(
            ssr_find_poles(c, &bad, &mut list),
            SsrStatus::InvalidArgument
        );
        assert_eq!(ssr_pole_list_len(ptr::null()), 0);
        ssr_pole_list_free(ptr::null_mut());
        ssr_chain_free(ptr::null_mut());
        ssr_chain_free(c);
    }
}

#[test]
fn error_cleared_on_success() {
    let mut g = 0.0;
    unsafe {
        ssr_g_eval(1.0, -1.0, &mut g);
        assert!(last_error().is_some());
        ssr_g_eval(1.0, 1.0, &mut g);
    }
    assert!(last_error().is_none());
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(ssr_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
