use std::ffi::{c_void, CStr};
use std::ptr;

use minusorder_ffi::*;

fn matrix(rows: usize, cols: usize, data: &[f64]) -> *mut MoMatrix {
    let mut m = ptr::null_mut();
    assert_eq!(
        unsafe { mo_matrix_new(rows, cols, data.as_ptr(), &mut m) },
        MoStatus::Ok
    );
    m
}

fn data(m: *const MoMatrix) -> Vec<f64> {
    let len = unsafe { mo_matrix_rows(m) * mo_matrix_cols(m) };
    let mut buf = vec![0.0; len];
    assert_eq!(unsafe { mo_matrix_copy_data(m, buf.as_mut_ptr(), len) }, MoStatus::Ok);
    buf
}

fn last_message() -> String {
    let p = mo_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn last_stage() -> Option<String> {
    let p = mo_last_error_stage();
    (!p.is_null()).then(|| unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned())
}

#[test]
fn matrix_handles_round_trip() {
    let m = matrix(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
    assert_eq!(unsafe { (mo_matrix_rows(m), mo_matrix_cols(m)) }, (2, 3));
    assert_eq!(data(m), [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);

    let mut small = [0.0; 2];
    assert_eq!(
        unsafe { mo_matrix_copy_data(m, small.as_mut_ptr(), 2) },
        MoStatus::InvalidArgument
    );
    unsafe { mo_matrix_free(m) };
    unsafe { mo_matrix_free(ptr::null_mut()) };

    let mut parsed = ptr::null_mut();
    let text = c"2 2\n1 0\n0 3\n";
    assert_eq!(unsafe { mo_matrix_parse(text.as_ptr(), &mut parsed) }, MoStatus::Ok);
    assert_eq!(data(parsed), [1.0, 0.0, 0.0, 3.0]);
    unsafe { mo_matrix_free(parsed) };

    let mut bad = ptr::null_mut();
    assert_eq!(
        unsafe { mo_matrix_parse(c"2 2\n1 0\n3\n".as_ptr(), &mut bad) },
        MoStatus::Parse
    );
    assert!(bad.is_null());
    assert!(last_message().contains(":3:"), "{}", last_message());

    let nan = [f64::NAN];
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { mo_matrix_new(1, 1, nan.as_ptr(), &mut out) },
        MoStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { mo_matrix_new(1, 1, ptr::null(), &mut out) },
        MoStatus::NullPointer
    );
    assert_eq!(unsafe { mo_matrix_new(0, 0, ptr::null(), &mut out) }, MoStatus::Ok);
    unsafe { mo_matrix_free(out) };
}

#[test]
fn order_rank_and_pinv() {
    let e1 = matrix(3, 3, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    let e2 = matrix(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
    for method in [
        MoOrderMethod::RankSubtractivity,
        MoOrderMethod::ImageDirectSum,
        MoOrderMethod::InnerInverse,
    ] {
        let mut holds = false;
        assert_eq!(
            unsafe { mo_minus_leq(e1, e2, method, ptr::null(), &mut holds) },
            MoStatus::Ok
        );
        assert!(holds, "{method:?}");
        assert_eq!(
            unsafe { mo_minus_leq(e2, e1, method, ptr::null(), &mut holds) },
            MoStatus::Ok
        );
        assert!(!holds, "{method:?}");
    }

    let mut r = 0;
    let policy = mo_policy_default();
    assert_eq!(unsafe { mo_rank(e2, &policy, &mut r) }, MoStatus::Ok);
    assert_eq!(r, 2);

    let d = matrix(3, 3, &[2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { mo_pinv(d, ptr::null(), &mut p) }, MoStatus::Ok);
    assert_eq!(data(p), [0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);

    let wide = matrix(2, 3, &[0.0; 6]);
    let mut holds = false;
    let status = unsafe { mo_minus_leq(wide, e1, MoOrderMethod::RankSubtractivity, ptr::null(), &mut holds) };
    assert_eq!(status, MoStatus::ShapeMismatch);

    let bad_policy = MoPolicy {
        rank_rel_tol: -1.0,
        ..policy
    };
    assert_eq!(unsafe { mo_rank(e2, &bad_policy, &mut r) }, MoStatus::InvalidArgument);
    assert_eq!(
        unsafe { mo_rank(ptr::null(), ptr::null(), &mut r) },
        MoStatus::NullPointer
    );

    for m in [e1, e2, d, p, wide] {
        unsafe { mo_matrix_free(m) };
    }
}

#[test]
fn conic_functions() {
    let mut t = MoTouching::default();
    let phi = std::f64::consts::FRAC_PI_4;
    assert_eq!(unsafe { mo_touching_ellipse(4.0, 0.0, 9.0, phi, &mut t) }, MoStatus::Ok);
    assert!((t.r - 59.0 / 11.0).abs() < 1e-9);
    // The touch point lies on both conics.
    let (x, y) = (t.touch_x, t.touch_y);
    assert!((4.0 * x * x + 9.0 * y * y - 1.0).abs() < 1e-8);
    assert!((t.q11 * x * x + 2.0 * t.q12 * x * y + t.q22 * y * y - 1.0).abs() < 1e-8);

    assert_eq!(
        unsafe { mo_touching_ellipse(0.5, 0.0, 0.5, phi, &mut t) },
        MoStatus::InvalidMatrix
    );
    assert_eq!(
        unsafe { mo_touching_ellipse(4.0, 0.0, 9.0, 0.0, &mut t) },
        MoStatus::InvalidArgument
    );

    let (mut u, mut v) = (0.0, 0.0);
    assert_eq!(
        unsafe { mo_phi_hat(4.0, 1.0, 0.3, 0.4, false, &mut u, &mut v) },
        MoStatus::Ok
    );
    assert!((u - 0.3).abs() < 1e-12 && (v - 0.4).abs() < 1e-12);
    assert_eq!(
        unsafe { mo_phi_hat(2.0, 1.0, 0.3, 0.0, false, &mut u, &mut v) },
        MoStatus::Ok
    );
    let (mut x, mut y) = (0.0, 0.0);
    assert_eq!(
        unsafe { mo_phi_hat(2.0, 1.0, u, v, true, &mut x, &mut y) },
        MoStatus::Ok
    );
    assert!((x - 0.3).abs() < 1e-12 && y.abs() < 1e-12);

    assert_eq!(
        unsafe { mo_phi_hat(9.0, 3.0, 2.0, 0.0, false, &mut u, &mut v) },
        MoStatus::OutOfDomain
    );
    assert!(last_message().contains("a0 <= 4"));
}

const S: [f64; 9] = [2.0, 1.0, 0.0, 0.0, 1.0, -1.0, 0.5, 0.0, 1.0];

unsafe extern "C" fn congruence(user_data: *mut c_void, n: usize, input: *const f64, output: *mut f64) {
    let s = std::slice::from_raw_parts(user_data as *const f64, n * n);
    let a = std::slice::from_raw_parts(input, n * n);
    let out = std::slice::from_raw_parts_mut(output, n * n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                for l in 0..n {
                    acc += s[i * n + k] * a[k * n + l] * s[j * n + l];
                }
            }
            out[i * n + j] = acc;
        }
    }
}

unsafe extern "C" fn shifted(user_data: *mut c_void, n: usize, input: *const f64, output: *mut f64) {
    congruence(user_data, n, input, output);
    *output += 1.0;
}

fn same_up_to_sign(got: &[f64], want: &[f64]) -> bool {
    // Column signs are free; compare columnwise.
    (0..3).all(|j| {
        [1.0, -1.0]
            .iter()
            .any(|&sign| (0..3).all(|i| (got[i * 3 + j] - sign * want[i * 3 + j]).abs() < 1e-7))
    })
}

#[test]
fn recovery_through_callback() {
    let mut out = ptr::null_mut();
    let user = S.as_ptr() as *mut c_void;
    let status = unsafe { mo_recover_congruence(3, Some(congruence), user, 7, ptr::null(), &mut out) };
    assert_eq!(status, MoStatus::Ok);
    assert!(same_up_to_sign(&data(out), &S), "{:?}", data(out));
    unsafe { mo_matrix_free(out) };

    let s = matrix(3, 3, &S);
    let mut known = ptr::null_mut();
    assert_eq!(
        unsafe { mo_recover_known_congruence(s, 7, ptr::null(), &mut known) },
        MoStatus::Ok
    );
    assert!(same_up_to_sign(&data(known), &S));
    unsafe { mo_matrix_free(known) };
    unsafe { mo_matrix_free(s) };

    mo_clear_last_error();
    assert!(mo_last_error_message().is_null());
    let mut bad = ptr::null_mut();
    let status = unsafe { mo_recover_congruence(3, Some(shifted), user, 7, ptr::null(), &mut bad) };
    assert_eq!(status, MoStatus::PipelineFailure);
    assert_eq!(last_stage().as_deref(), Some("fixes_zero"));
    assert!(bad.is_null());

    assert_eq!(
        unsafe { mo_recover_congruence(2, Some(congruence), user, 7, ptr::null(), &mut bad) },
        MoStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { mo_recover_congruence(3, None, user, 7, ptr::null(), &mut bad) },
        MoStatus::NullPointer
    );
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(mo_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
