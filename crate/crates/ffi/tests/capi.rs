use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use prodsat_ffi::*;

fn last_error() -> String {
    let p = prodsat_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn solve_round_trip() {
    unsafe {
        let mut inst = ptr::null_mut();
        assert_eq!(prodsat_instance_random(3, 200, 160, 3, 0, &mut inst), ProdsatStatus::Ok);
        let (mut n, mut m) = (0, 0);
        assert_eq!(prodsat_instance_size(inst, &mut n, &mut m), ProdsatStatus::Ok);
        assert_eq!((n, m), (200, 160));

        let mut sol = ptr::null_mut();
        assert_eq!(prodsat_solve(inst, 3, 1e-8, &mut sol), ProdsatStatus::Ok);
        assert_eq!(prodsat_solution_n_qubits(sol), 200);
        assert!(prodsat_solution_max_residual(sol) < 1e-8);
        let mut res = f64::NAN;
        assert_eq!(prodsat_solution_residual(sol, inst, &mut res), ProdsatStatus::Ok);
        assert!(res < 1e-8);
        let mut amps = [0.0; 4];
        assert_eq!(prodsat_solution_qubit(sol, 0, amps.as_mut_ptr()), ProdsatStatus::Ok);
        let norm: f64 = amps.iter().map(|a| a * a).sum();
        assert!((norm - 1.0).abs() < 1e-12);
        assert_eq!(prodsat_solution_qubit(sol, 200, amps.as_mut_ptr()), ProdsatStatus::InvalidArgument);
        assert!(last_error().contains("out of range"));

        let mut json = ptr::null_mut();
        assert_eq!(prodsat_instance_to_json(inst, &mut json), ProdsatStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(prodsat_instance_from_json(json, &mut back), ProdsatStatus::Ok);
        let mut res2 = f64::NAN;
        assert_eq!(prodsat_solution_residual(sol, back, &mut res2), ProdsatStatus::Ok);
        assert_eq!(res, res2);

        prodsat_string_free(json);
        prodsat_solution_free(sol);
        prodsat_instance_free(back);
        prodsat_instance_free(inst);
    }
}

#[test]
fn no_covering_is_unsatisfied() {
    unsafe {
        let mut inst = ptr::null_mut();
        assert_eq!(prodsat_instance_random(3, 200, 220, 1, 0, &mut inst), ProdsatStatus::Ok);
        let mut sol = ptr::null_mut();
        assert_eq!(prodsat_solve(inst, 1, 1e-8, &mut sol), ProdsatStatus::Unsatisfied);
        assert!(sol.is_null());
        assert!(last_error().contains("no dimer covering"));
        prodsat_instance_free(inst);
    }
}

#[test]
fn error_codes() {
    unsafe {
        assert_eq!(prodsat_instance_random(3, 10, 5, 0, 0, ptr::null_mut()), ProdsatStatus::NullPointer);
        let mut inst = ptr::null_mut();
        assert_eq!(prodsat_instance_random(5, 3, 2, 0, 0, &mut inst), ProdsatStatus::InvalidArgument);
        assert!(last_error().contains("invalid parameters"));
        let bad = CString::new("{not json").unwrap();
        assert_eq!(prodsat_instance_from_json(bad.as_ptr(), &mut inst), ProdsatStatus::Parse);
        let sys = CString::new("x1*x2 + ").unwrap();
        let mut mv = 0;
        assert_eq!(prodsat_mixed_volume(sys.as_ptr(), &mut mv), ProdsatStatus::Parse);
        assert_eq!(prodsat_solution_n_qubits(ptr::null()), 0);
        prodsat_instance_free(ptr::null_mut());
        prodsat_string_free(ptr::null_mut());
    }
}

#[test]
fn algebra_entry_points() {
    unsafe {
        let fig2 = CString::new("x1*x2 + 2*x1 + 3*x2 + 4\n5*x2^2 + 6*x1 + 7").unwrap();
        let mut mv = 0;
        assert_eq!(prodsat_mixed_volume(fig2.as_ptr(), &mut mv), ProdsatStatus::Ok);
        assert_eq!(mv, 3);
        assert_eq!(prodsat_system_unsat(fig2.as_ptr()), ProdsatStatus::Ok);
        let empty = CString::new("x1*x2 - 1\nx1").unwrap();
        assert_eq!(prodsat_system_unsat(empty.as_ptr()), ProdsatStatus::Unsatisfied);

        let mut inst = ptr::null_mut();
        assert_eq!(prodsat_instance_random(3, 6, 4, 2, 8, &mut inst), ProdsatStatus::Ok);
        let mut d = 0;
        assert_eq!(prodsat_kernel_dimension(inst, 1e-9, &mut d), ProdsatStatus::Ok);
        // each clause projector has rank 8 on the 64-dimensional space
        assert!((32..64).contains(&d), "{d}");
        prodsat_instance_free(inst);
    }
}

fn static_lib() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    let dir = exe.parent()?.parent()?;
    let lib = dir.join("libprodsat_ffi.a");
    lib.exists().then_some(lib)
}

#[test]
fn c_program_links_against_header() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = manifest.join("include/prodsat.h");
    assert!(header.exists(), "header not generated");
    let text = std::fs::read_to_string(&header).unwrap();
    for f in ["prodsat_solve", "prodsat_last_error", "prodsat_string_free", "typedef struct ProdsatInstance"] {
        assert!(text.contains(f), "header lacks {f}");
    }
    let Some(lib) = static_lib() else {
        eprintln!("static library not found; skipping the C link step");
        return;
    };
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler; skipping");
        return;
    }
    let out = std::env::temp_dir().join(format!("prodsat_smoke_{}", std::process::id()));
    let status = Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let run = Command::new(&out).output().unwrap();
    let _ = std::fs::remove_file(&out);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(stdout.lines().nth(1) == Some("3"), "{stdout}");
}
