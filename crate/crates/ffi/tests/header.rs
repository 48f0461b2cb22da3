use std::path::{Path, PathBuf};
use std::process::Command;

const SYMBOLS: [&str; 14] = [
    "cdp_last_error_message",
    "cdp_version",
    "cdp_scenario_new",
    "cdp_scenario_free",
    "cdp_kl_closed_form",
    "cdp_chernoff_closed_form",
    "cdp_kl_numeric",
    "cdp_chernoff_numeric",
    "cdp_epsilon_dp_level",
    "cdp_kl_bound",
    "cdp_chernoff_ub",
    "cdp_alpha_star",
    "cdp_compose",
    "cdp_error_rates",
];

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/chernoff_dp.h")
}

#[test]
fn header_declares_every_entry_point() {
    let text = std::fs::read_to_string(header()).unwrap();
    for sym in SYMBOLS {
        assert!(text.contains(&format!("{sym}(")), "{sym} missing from header");
    }
    for ty in ["typedef struct CdpScenario CdpScenario;", "typedef enum CdpStatus", "typedef struct CdpErrorRates"] {
        assert!(text.contains(ty), "{ty} missing");
    }
    assert!(text.contains("CDP_STATUS_NON_CONVERGENCE = 3"));
}

const SMOKE: &str = r#"
#include <math.h>
#include <stdio.h>
#include "chernoff_dp.h"

int main(void) {
    CdpScenario *s = NULL;
    double kl = 0.0, c = 0.0, a = 0.0;
    if (cdp_scenario_new(1.0, 1.0, 1.0, 1.0, 0.5, &s) != CDP_STATUS_OK) return 1;
    if (cdp_kl_closed_form(s, &kl) != CDP_STATUS_OK) return 2;
    if (cdp_chernoff_numeric(s, 1e-10, &c, &a) != CDP_STATUS_OK) return 3;
    cdp_scenario_free(s);
    if (fabs(kl - 0.36787944117) > 1e-9 || fabs(c - 0.0945348919) > 1e-8) return 4;
    if (cdp_scenario_new(-1.0, 1.0, 1.0, 1.0, 0.5, &s) != CDP_STATUS_DOMAIN) return 5;
    if (cdp_last_error_message() == NULL) return 6;
    printf("%s\n", cdp_version());
    return 0;
}
"#;

/// Compiles and runs a C program against the static library when a C
/// compiler is available.
#[test]
fn c_program_links_and_runs() {
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(Path::parent).unwrap();
    let lib = profile_dir.join("libchernoff_dp_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: static library or C compiler not available");
        return;
    }
    let dir = tempfile::TempDir::new().unwrap();
    let src = dir.path().join("smoke.c");
    let bin = dir.path().join("smoke");
    std::fs::write(&src, SMOKE).unwrap();
    let out = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(header().parent().unwrap())
        .arg(&src)
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&bin)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), env!("CARGO_PKG_VERSION"));
}
