use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use coremax_ffi::*;

const FIVE_CLAUSES: &str = "p wcnf 3 5 6\n1 1 0\n1 2 0\n1 3 0\n1 -1 -2 0\n1 -1 -3 0\n";

fn parse(text: &str) -> *mut CmxInstance {
    let text = CString::new(text).unwrap();
    let mut inst = ptr::null_mut();
    assert_eq!(unsafe { cmx_instance_parse_wcnf(text.as_ptr(), &mut inst) }, CmxStatus::Ok);
    inst
}

fn solve(inst: *const CmxInstance, alg: CmxAlgorithm) -> *mut CmxResult {
    let mut res = ptr::null_mut();
    assert_eq!(unsafe { cmx_solve(inst, alg, 0.0, &mut res) }, CmxStatus::Ok);
    res
}

#[test]
fn five_clauses_through_every_driver() {
    let inst = parse(FIVE_CLAUSES);
    for alg in [CmxAlgorithm::Bnb, CmxAlgorithm::Wpm1, CmxAlgorithm::Msu3] {
        let res = solve(inst, alg);
        unsafe {
            let mut outcome = CmxOutcome::Unknown;
            assert_eq!(cmx_result_outcome(res, &mut outcome), CmxStatus::Ok);
            assert_eq!(outcome, CmxOutcome::Optimal);
            let mut cost = 99;
            assert_eq!(cmx_result_cost(res, &mut cost), CmxStatus::Ok);
            assert_eq!(cost, 1, "{alg:?}");

            let mut len = 0;
            assert_eq!(cmx_result_model(res, ptr::null_mut(), 0, &mut len), CmxStatus::BufferTooSmall);
            assert_eq!(len, 3);
            let mut buf = [0i32; 3];
            assert_eq!(cmx_result_model(res, buf.as_mut_ptr(), buf.len(), &mut len), CmxStatus::Ok);
            assert_eq!(buf, [-1, 2, 3]);
            cmx_result_free(res);
        }
    }
    unsafe { cmx_instance_free(inst) };
}

#[test]
fn built_instance_matches_parsed_one() {
    let inst = cmx_instance_new(2);
    unsafe {
        assert_eq!(cmx_instance_add_clause(inst, [1, 2].as_ptr(), 2, 0, true), CmxStatus::Ok);
        assert_eq!(cmx_instance_add_clause(inst, [-1].as_ptr(), 1, 3, false), CmxStatus::Ok);
        assert_eq!(cmx_instance_add_clause(inst, [-2].as_ptr(), 1, 5, false), CmxStatus::Ok);
        let res = solve(inst, CmxAlgorithm::Wpm1);
        let mut cost = 0;
        assert_eq!(cmx_result_cost(res, &mut cost), CmxStatus::Ok);
        assert_eq!(cost, 3);
        assert!(cmx_result_num_cores(res) >= 1);
        cmx_result_free(res);
        cmx_instance_free(inst);
    }
}

#[test]
fn unsatisfiable_hard_part_has_no_model() {
    let inst = parse("p wcnf 1 3 9\n9 1 0\n9 -1 0\n1 1 0\n");
    let res = solve(inst, CmxAlgorithm::Msu3);
    unsafe {
        let mut outcome = CmxOutcome::Optimal;
        assert_eq!(cmx_result_outcome(res, &mut outcome), CmxStatus::Ok);
        assert_eq!(outcome, CmxOutcome::Unsatisfiable);
        let mut cost = 0;
        assert_eq!(cmx_result_cost(res, &mut cost), CmxStatus::NoResult);
        cmx_result_free(res);
        cmx_instance_free(inst);
    }
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(cmx_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn errors_are_codes_with_messages() {
    let text = CString::new("p wcnf 2 1 9\n1 1 2\n").unwrap();
    let mut inst = ptr::null_mut();
    assert_eq!(unsafe { cmx_instance_parse_wcnf(text.as_ptr(), &mut inst) }, CmxStatus::ParseError);
    assert!(inst.is_null());
    assert!(last_error().contains("line 2"), "{}", last_error());

    assert_eq!(
        unsafe { cmx_instance_parse_wcnf(ptr::null(), &mut inst) },
        CmxStatus::NullPointer
    );
    let inst = cmx_instance_new(1);
    unsafe {
        assert_eq!(cmx_instance_add_clause(inst, [2].as_ptr(), 1, 1, false), CmxStatus::InvalidArgument);
        assert_eq!(cmx_instance_add_clause(inst, [1].as_ptr(), 1, 0, false), CmxStatus::InvalidArgument);
        assert_eq!(cmx_solve(inst, CmxAlgorithm::Bnb, f64::NAN, &mut ptr::null_mut()), CmxStatus::InvalidArgument);
        assert_eq!(cmx_solve(ptr::null(), CmxAlgorithm::Bnb, 0.0, &mut ptr::null_mut()), CmxStatus::NullPointer);
        assert_eq!(cmx_result_num_cores(ptr::null()), 0);
        cmx_instance_free(inst);
        cmx_instance_free(ptr::null_mut());
        cmx_result_free(ptr::null_mut());
    }
}

fn header() -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/coremax.h");
    std::fs::read_to_string(path).expect("generated header")
}

#[test]
fn header_declares_every_entry_point() {
    let h = header();
    for name in [
        "cmx_last_error",
        "cmx_instance_parse_wcnf",
        "cmx_instance_new",
        "cmx_instance_add_clause",
        "cmx_instance_free",
        "cmx_solve",
        "cmx_result_outcome",
        "cmx_result_cost",
        "cmx_result_num_cores",
        "cmx_result_model",
        "cmx_result_free",
    ] {
        assert!(h.contains(&format!("{name}(")), "{name} missing");
    }
    assert!(h.contains("typedef struct CmxInstance CmxInstance;"));
    assert!(h.contains("CMX_STATUS_BUFFER_TOO_SMALL = -5"));
}

#[test]
fn header_compiles_as_c() {
    let Ok(out) = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-x", "c"])
        .arg(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/coremax.h"))
        .output()
    else {
        eprintln!("no C compiler on PATH; header syntax not checked");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
