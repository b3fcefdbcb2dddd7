//! Compiles a C program against the generated header and the static library.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include <stdlib.h>
#include "psdda.h"

int main(void) {
    PsddaConstants c;
    if (psdda_constants(3, 3, 2, &c) != PSDDA_STATUS_OK || c.omega != 15) return 1;

    double v[2] = {3.0, -1.0};
    if (psdda_project_l1(v, 2, 2.0, v) != PSDDA_STATUS_OK || v[0] != 2.0 || v[1] != 0.0) return 2;

    PsddaExperiment *exp = NULL;
    if (psdda_experiment_from_preset("example1", 0, 20, &exp) != PSDDA_STATUS_OK) return 3;
    PsddaRun *run = NULL;
    if (psdda_experiment_run(exp, &run) != PSDDA_STATUS_OK) return 4;
    size_t n = 0;
    psdda_run_record_count(run, &n);
    PsddaRecord *rec = malloc(n * sizeof *rec);
    if (psdda_run_records(run, rec, n) != PSDDA_STATUS_OK || rec[n - 1].t != 20) return 5;
    free(rec);

    if (psdda_experiment_from_preset("nope", 0, 0, &exp) != PSDDA_STATUS_VALIDATION) return 6;
    if (psdda_last_error() == NULL) return 7;

    psdda_run_free(run);
    psdda_experiment_free(exp);
    printf("ok %zu\n", n);
    return 0;
}
"#;

fn target_dir() -> PathBuf {
    // tests run from target/<profile>/deps
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn header_compiles_and_links() {
    let lib = target_dir().join("libpsdda_ffi.a");
    assert!(lib.exists(), "missing {}", lib.display());
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let bin = dir.path().join("main");
    std::fs::write(&src, PROGRAM).unwrap();

    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror"])
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .arg("-o")
        .arg(&bin)
        .status()
        .expect("cc available");
    assert!(status.success());

    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok 60");
}
