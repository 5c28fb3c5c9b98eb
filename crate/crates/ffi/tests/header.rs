//! The generated C header must exist, declare the ABI surface, and pass a
//! C compiler syntax check when one is available.

use std::path::PathBuf;
use std::process::Command;

fn header_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/genairy.h")
}

#[test]
fn header_declares_the_surface() {
    let text = std::fs::read_to_string(header_path()).expect("header generated by build.rs");
    for needle in [
        "typedef struct GenairyPotential GenairyPotential;",
        "GenairyStatus genairy_potential_parse",
        "void genairy_potential_free",
        "GenairyStatus genairy_profile",
        "GenairyStatus genairy_resolvent_estimate",
        "GenairyStatus genairy_semigroup_log_norm",
        "GenairyStatus genairy_closed_form_log_norm",
        "const char *genairy_status_message",
        "GenairyStatus_OverflowGuard",
    ] {
        assert!(text.contains(needle), "header missing: {needle}");
    }
}

#[test]
fn header_compiles_as_c() {
    let cc = ["cc", "gcc", "clang"]
        .iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok());
    let Some(cc) = cc else {
        eprintln!("no C compiler found; skipping syntax check");
        return;
    };
    let dir = std::env::temp_dir();
    let src = dir.join("genairy_header_check.c");
    std::fs::write(&src, "#include \"genairy.h\"\nint main(void) { return 0; }\n").unwrap();
    let status = Command::new(cc)
        .arg("-fsyntax-only")
        .arg("-I")
        .arg(header_path().parent().unwrap())
        .arg(&src)
        .status()
        .expect("compiler runs");
    assert!(status.success(), "header failed C syntax check");
}
