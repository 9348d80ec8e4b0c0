//! Compiles a C program against the generated header and links it with the
//! static library.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "specgap.h"

int main(void) {
    double a[4] = {-1.0, 0.0, 0.0, 1.0};
    double b[4] = {0.0, 0.25, 0.25, 0.0};
    SgMatrix *ma = NULL, *mb = NULL;
    if (sg_matrix_new(2, a, &ma) != SG_STATUS_OK) return 10;
    if (sg_matrix_new(2, b, &mb) != SG_STATUS_OK) return 11;
    double measured = 0, bound = 0;
    if (sg_davis_kahan(ma, mb, 0.0, &measured, &bound) != SG_STATUS_OK) return 12;
    printf("%.4f %.4f\n", measured, bound);
    double c = 0;
    if (sg_c_uc(1, 1.0, 0.5, 0.0, 0.0, 0.0, 2.0, &c, NULL) != SG_STATUS_INVALID_ARGUMENT) return 13;
    if (sg_last_error_message() == NULL) return 14;
    sg_matrix_free(ma);
    sg_matrix_free(mb);
    return 0;
}
"#;

fn target_dir() -> PathBuf {
    // tests run from <target>/<profile>/deps
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_and_runs() {
    let lib = target_dir().join("libspecgap_ffi.a");
    assert!(lib.exists(), "static library not found at {}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let exe = dir.path().join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let include = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    let status = Command::new("cc")
        .args(["-std=c11", "-Wall", "-Werror", "-I", include])
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("a C compiler on PATH");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "0.1222 0.2588");
}
