//! Report text for every shipped fixture, pinned byte for byte.
//! Regenerate with `UPDATE_GOLDEN=1 cargo test -p causeglue-cli --test golden`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn workspace() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}

fn transcript(args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_causeglue"))
        .args(args)
        .current_dir(workspace())
        .output()
        .unwrap();
    format!(
        "$ causeglue {}\nexit: {}\n{}--- stderr\n{}",
        args.join(" "),
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap()
    )
}

fn check(name: &str, args: &[&str]) {
    let got = transcript(args);
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(format!("{name}.txt"));
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(&path, &got).unwrap();
        return;
    }
    let want = fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden file {}", path.display()));
    assert_eq!(got, want, "report for `{name}` drifted; rerun with UPDATE_GOLDEN=1 if intended");
}

#[test]
fn classify_definite_family() {
    check("classify_tf", &["classify", "--scenario", "fixtures/two_party.scn", "--family", "c_AB,c_BA", "--prop", "A<B"]);
}

#[test]
fn classify_with_ico_and_bound_separability() {
    check(
        "classify_tfi",
        &[
            "classify",
            "--scenario",
            "fixtures/two_party.scn",
            "--family",
            "c_AB,c_BA,c_ico",
            "--prop",
            "A<B",
            "--prop",
            "B<A",
            "--prop",
            "chi",
            "--prop",
            "~chi",
            "--bind-sep",
            "chi",
        ],
    );
}

#[test]
fn classify_malformed_proposition() {
    check("classify_bad_prop", &["classify", "--scenario", "fixtures/two_party.scn", "--family", "c_AB", "--prop", "A<<B"]);
}

#[test]
fn classify_unknown_context() {
    check("classify_unknown_context", &["classify", "--scenario", "fixtures/two_party.scn", "--family", "c_XY", "--prop", "A<B"]);
}

#[test]
fn glue_separable() {
    check("glue_two_party", &["glue", "--scenario", "fixtures/two_party.scn"]);
}

#[test]
fn glue_mutual_guessing() {
    check("glue_mutual_guessing", &["glue", "--scenario", "fixtures/mutual_guessing.scn"]);
}

#[test]
fn fraction_with_witness() {
    check("fraction_mutual_guessing", &["fraction", "--scenario", "fixtures/mutual_guessing.scn", "--witness"]);
}

#[test]
fn contexts_poset() {
    check("contexts_two_party", &["contexts", "--scenario", "fixtures/two_party.scn"]);
}

#[test]
fn simulate_race() {
    check(
        "simulate_theta_race",
        &["simulate", "--model", "fixtures/theta_race.model", "--seed", "42", "--samples", "4000", "--bins", "8", "--then-glue"],
    );
}

#[test]
fn simulate_helicity_bias() {
    check(
        "simulate_helicity_bias",
        &["simulate", "--model", "fixtures/helicity_bias.model", "--seed", "7", "--samples", "4000", "--bins", "4", "--then-glue"],
    );
}
