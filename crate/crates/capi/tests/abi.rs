//! ABI-level tests: the exported functions driven the way a C caller would
//! use them, plus an end-to-end compile/link/run of a real C program against
//! the generated header and static library.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::ptr;

use streamflow_capi::*;

fn last_error() -> String {
    unsafe {
        let needed = sf_last_error_message(ptr::null_mut(), 0);
        let mut buf = vec![0u8; needed + 1];
        sf_last_error_message(buf.as_mut_ptr().cast(), buf.len());
        String::from_utf8_lossy(&buf[..needed]).into_owned()
    }
}

#[test]
fn tooth_curve_round_trip() {
    unsafe {
        let mut curve: *mut SfCurve = ptr::null_mut();
        assert_eq!(sf_curve_tooth(1.0, &mut curve), SfStatus::Ok);
        assert_eq!(sf_curve_dim(curve), 2);

        let (mut lo, mut hi) = (0.0, 0.0);
        assert_eq!(sf_curve_domain(curve, &mut lo, &mut hi), SfStatus::Ok);
        assert!((lo - (PI + 1f64.atan())).abs() < 1e-15);
        assert_eq!(hi, 1.5 * PI);

        let mut point = [0.0; 3];
        assert_eq!(sf_curve_eval(curve, hi, point.as_mut_ptr()), SfStatus::Ok);
        assert!((point[0] + 1.5 * PI).abs() <= 1e-14);
        assert!((point[1] + 1.0).abs() <= 1e-14);

        let mut tangent = [0.0; 3];
        assert_eq!(sf_curve_deriv(curve, hi, tangent.as_mut_ptr()), SfStatus::Ok);
        assert!(tangent[0].abs() <= 1e-14);
        assert!((tangent[1] + 1.5 * PI).abs() <= 1e-14);

        sf_curve_free(curve);
    }
}

#[test]
fn invalid_tooth_parameter_reports_message() {
    unsafe {
        let mut curve: *mut SfCurve = ptr::null_mut();
        assert_eq!(sf_curve_tooth(-1.0, &mut curve), SfStatus::InvalidArgument);
        assert!(last_error().contains("s0"));
    }
}

#[test]
fn null_handles_are_rejected() {
    unsafe {
        let mut out = [0.0; 3];
        assert_eq!(
            sf_curve_eval(ptr::null(), 0.0, out.as_mut_ptr()),
            SfStatus::NullPointer
        );
        assert_eq!(sf_curve_dim(ptr::null()), 0);
        assert_eq!(sf_spline_segment_count(ptr::null()), 0);
        assert_eq!(sf_solution_len(ptr::null()), 0);
        // frees tolerate null
        sf_curve_free(ptr::null_mut());
        sf_spline_free(ptr::null_mut());
        sf_solution_free(ptr::null_mut());
    }
}

#[test]
fn spline_interpolation_and_coefficients() {
    // straight line x: 0 -> 1 at unit velocity: coefficients (0, 0, 1, 0)
    let points = [0.0, 0.0, 1.0, 0.0];
    let velocities = [1.0, 0.0, 1.0, 0.0];
    unsafe {
        let mut spline: *mut SfSpline = ptr::null_mut();
        assert_eq!(
            sf_spline_interpolate(points.as_ptr(), velocities.as_ptr(), 2, 2, &mut spline),
            SfStatus::Ok
        );
        assert_eq!(sf_spline_segment_count(spline), 1);
        assert_eq!(sf_spline_dim(spline), 2);

        let mut quad = [0.0; 4];
        assert_eq!(
            sf_spline_coefficients(spline, 0, 0, quad.as_mut_ptr()),
            SfStatus::Ok
        );
        assert_eq!(quad, [0.0, 0.0, 1.0, 0.0]);
        assert_eq!(
            sf_spline_coefficients(spline, 1, 0, quad.as_mut_ptr()),
            SfStatus::InvalidArgument
        );

        let mut mid = [0.0; 2];
        assert_eq!(sf_spline_eval(spline, 0.5, mid.as_mut_ptr()), SfStatus::Ok);
        assert_eq!(mid, [0.5, 0.0]);
        assert_eq!(
            sf_spline_eval(spline, 1.5, mid.as_mut_ptr()),
            SfStatus::InvalidArgument
        );

        let mut deriv = [0.0; 2];
        assert_eq!(
            sf_spline_derivative(spline, 0.25, deriv.as_mut_ptr()),
            SfStatus::Ok
        );
        assert_eq!(deriv, [1.0, 0.0]);

        sf_spline_free(spline);
    }
}

#[test]
fn duplicate_points_rejected() {
    let points = [0.0, 0.0, 0.0, 0.0];
    let velocities = [1.0, 0.0, 1.0, 0.0];
    unsafe {
        let mut spline: *mut SfSpline = ptr::null_mut();
        assert_eq!(
            sf_spline_interpolate(points.as_ptr(), velocities.as_ptr(), 2, 2, &mut spline),
            SfStatus::InvalidArgument
        );
        assert!(last_error().contains("coincide"));
    }
}

#[test]
fn gear_pump_constant_solution() {
    unsafe {
        let mut solution: *mut SfSolution = ptr::null_mut();
        assert_eq!(
            sf_gear_pump_solve(
                900.0,
                0.05,
                2.0,
                0.0,
                3.5,
                4.5,
                SfMethod::AdamsMoulton2,
                0.01,
                &mut solution,
            ),
            SfStatus::Ok
        );
        let len = sf_solution_len(solution);
        assert_eq!(len, 101);
        let (mut s, mut u, mut udot, mut segment) = (0.0, 0.0, 0.0, 0usize);
        for i in [0, len / 2, len - 1] {
            assert_eq!(
                sf_solution_sample(solution, i, &mut s, &mut u, &mut udot, &mut segment),
                SfStatus::Ok
            );
            assert_eq!(u, 2.0);
            assert_eq!(udot, 0.0);
            assert_eq!(segment, 0);
        }
        assert_eq!(
            sf_solution_sample(solution, len, &mut s, &mut u, &mut udot, &mut segment),
            SfStatus::InvalidArgument
        );
        sf_solution_free(solution);
    }
}

#[test]
fn gear_pump_singular_domain_is_numerical_error() {
    unsafe {
        let mut solution: *mut SfSolution = ptr::null_mut();
        assert_eq!(
            sf_gear_pump_solve(
                900.0,
                0.05,
                1.0,
                0.0,
                3.5,
                4.712,
                SfMethod::Rk4,
                0.01,
                &mut solution,
            ),
            SfStatus::Numerical
        );
        assert!(last_error().contains("guard"));
    }
}

#[test]
fn chain_solve_along_spline() {
    // three-point straight line, constant-velocity sample
    let points = [0.0, 0.0, 0.5, 0.0, 1.0, 0.0];
    let velocities = [0.5, 0.0, 0.5, 0.0, 0.5, 0.0];
    unsafe {
        let mut spline: *mut SfSpline = ptr::null_mut();
        assert_eq!(
            sf_spline_interpolate(points.as_ptr(), velocities.as_ptr(), 3, 2, &mut spline),
            SfStatus::Ok
        );
        let mut solution: *mut SfSolution = ptr::null_mut();
        assert_eq!(
            sf_chain_solve(
                spline,
                0.01,
                1.0,
                0.0,
                SfConvention::Pseudoinverse,
                0,
                1.0,
                0.0,
                SfMethod::Rk4,
                0.05,
                &mut solution,
            ),
            SfStatus::Ok
        );
        let len = sf_solution_len(solution);
        assert!(len > 2);
        let (mut s, mut u, mut udot, mut segment) = (0.0, 0.0, 0.0, 0usize);
        assert_eq!(
            sf_solution_sample(solution, len - 1, &mut s, &mut u, &mut udot, &mut segment),
            SfStatus::Ok
        );
        assert_eq!(s, 1.0);
        assert_eq!(u, 1.0); // constant solution under zero pressure gradient
        assert_eq!(segment, 1);
        sf_solution_free(solution);
        sf_spline_free(spline);
    }
}

#[test]
fn header_declares_the_api() {
    let header = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/streamflow.h");
    let text = std::fs::read_to_string(&header).expect("header generated at build time");
    for symbol in [
        "typedef struct SfCurve SfCurve;",
        "typedef struct SfSpline SfSpline;",
        "typedef struct SfSolution SfSolution;",
        "SfStatus sf_curve_tooth(double s0, struct SfCurve **out);",
        "sf_spline_interpolate",
        "sf_gear_pump_solve",
        "sf_chain_solve",
        "sf_last_error_message",
        "SF_STATUS_OK",
    ] {
        assert!(text.contains(symbol), "header is missing '{symbol}'");
    }
}

/// Compile and run a real C program against the header and the static
/// library, proving the ABI is consumable from another language.
#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let include_dir = manifest.join("include");
    let static_lib = manifest
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .join("target/debug/libstreamflow_capi.a");
    assert!(
        static_lib.exists(),
        "static library not built at {}",
        static_lib.display()
    );

    let dir = std::env::temp_dir().join(format!("streamflow-cabi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let c_source = dir.join("smoke.c");
    std::fs::write(
        &c_source,
        r#"
#include <stdio.h>
#include <math.h>
#include "streamflow.h"

int main(void) {
    SfCurve *tooth = NULL;
    if (sf_curve_tooth(1.0, &tooth) != SF_STATUS_OK) return 1;
    double hi, lo, point[2];
    if (sf_curve_domain(tooth, &lo, &hi) != SF_STATUS_OK) return 2;
    if (sf_curve_eval(tooth, hi, point) != SF_STATUS_OK) return 3;
    if (fabs(point[1] + 1.0) > 1e-12) return 4;
    sf_curve_free(tooth);

    const double pts[4] = {0.0, 0.0, 1.0, 0.0};
    const double vel[4] = {1.0, 0.0, 1.0, 0.0};
    SfSpline *spline = NULL;
    if (sf_spline_interpolate(pts, vel, 2, 2, &spline) != SF_STATUS_OK) return 5;
    double quad[4];
    if (sf_spline_coefficients(spline, 0, 0, quad) != SF_STATUS_OK) return 6;
    if (quad[2] != 1.0 || quad[0] != 0.0) return 7;
    sf_spline_free(spline);

    SfSolution *sol = NULL;
    if (sf_gear_pump_solve(900.0, 0.05, 1.0, 0.0, 3.5, 4.5,
                           SF_METHOD_RK4, 0.01, &sol) != SF_STATUS_OK) return 8;
    uintptr_t len = sf_solution_len(sol);
    double s, u, udot;
    uintptr_t segment;
    if (sf_solution_sample(sol, len - 1, &s, &u, &udot, &segment) != SF_STATUS_OK) return 9;
    if (fabs(u - 1.0) > 1e-12) return 10;
    sf_solution_free(sol);

    printf("c-abi-smoke-ok\n");
    return 0;
}
"#,
    )
    .unwrap();

    let binary = dir.join("smoke");
    let compile = std::process::Command::new("cc")
        .arg(&c_source)
        .arg("-I")
        .arg(&include_dir)
        .arg(&static_lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&binary)
        .output()
        .expect("cc available");
    assert!(
        compile.status.success(),
        "compilation failed: {}",
        String::from_utf8_lossy(&compile.stderr)
    );
    let run = std::process::Command::new(&binary).output().unwrap();
    assert!(run.status.success(), "smoke binary exited nonzero");
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "c-abi-smoke-ok");
    std::fs::remove_dir_all(&dir).ok();
}
