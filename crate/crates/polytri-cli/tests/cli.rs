//! End-to-end tests of the command-line tool: documents round-trip
//! bit-exactly, the subcommands reproduce the library results, and the
//! documented exit codes are stable.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_polytri"))
}

fn tmpdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("polytri-cli-{name}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

/// Writes the fixture corpus into a fresh directory via the library.
fn fixtures_into(dir: &Path) {
    let status = Command::new(env!("CARGO_BIN_EXE_gen-fixtures"))
        .arg(dir)
        .status()
        .expect("gen-fixtures runs");
    assert!(status.success());
}

#[test]
fn documents_round_trip_bit_exactly() {
    let dir = tmpdir("roundtrip");
    fixtures_into(&dir);
    for name in [
        "square.json",
        "prism.json",
        "cube.json",
        "twisted_boundary.json",
        "staircase_lifting.json",
        "quotient_morphism.json",
    ] {
        let path = dir.join(name);
        let text = std::fs::read_to_string(&path).unwrap();
        let doc: polytri_cli::document::Document = serde_json::from_str(&text).unwrap();
        let again = serde_json::to_string_pretty(&doc).unwrap() + "\n";
        assert_eq!(text, again, "{name} does not round-trip");
    }
}

#[test]
fn subdivide_square_by_the_remark_values() {
    let dir = tmpdir("subdivide");
    fixtures_into(&dir);
    let out = dir.join("diag.json");
    let output = bin()
        .arg("subdivide")
        .arg(dir.join("square.json"))
        .arg(dir.join("square_remark_lifting.json"))
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
    // stdout carries the output path only.
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert_eq!(stdout.trim(), out.to_str().unwrap());
    let doc = polytri_cli::document::read_document(&out).unwrap();
    assert_eq!(doc.kind, "subdivision");
    let payload: polytri_cli::document::SubdivisionPayload =
        serde_json::from_value(doc.payload).unwrap();
    assert_eq!(payload.refined.maximal_cells, vec![vec![0, 1, 3], vec![1, 2, 3]]);
    // Zero lifting: the trivial subdivision.
    let out_trivial = dir.join("trivial.json");
    let output = bin()
        .arg("subdivide")
        .arg(dir.join("square.json"))
        .arg(dir.join("zero_lifting_square.json"))
        .arg("--out")
        .arg(&out_trivial)
        .output()
        .unwrap();
    assert!(output.status.success());
    let doc = polytri_cli::document::read_document(&out_trivial).unwrap();
    let payload: polytri_cli::document::SubdivisionPayload =
        serde_json::from_value(doc.payload).unwrap();
    assert_eq!(payload.refined.maximal_cells, vec![vec![0, 1, 2, 3]]);
}

#[test]
fn extend_exit_codes_and_certificate() {
    let dir = tmpdir("extend");
    fixtures_into(&dir);
    // Twisted boundary data: no lifting induces it -> exit 5.
    let output = bin()
        .arg("extend")
        .arg(dir.join("prism.json"))
        .arg("boundary")
        .arg(dir.join("twisted_boundary.json"))
        .arg(dir.join("zero_lifting_prism_boundary.json"))
        .arg("--out")
        .arg(dir.join("never.json"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(5));
    // Staircase boundary data extends to three tetrahedra; the emitted
    // certificate induces the result through the subdivide command.
    let out = dir.join("stairs.json");
    let cert = dir.join("cert.json");
    let output = bin()
        .arg("extend")
        .arg(dir.join("prism.json"))
        .arg("boundary")
        .arg(dir.join("staircase_boundary.json"))
        .arg(dir.join("staircase_lifting.json"))
        .arg("--out")
        .arg(&out)
        .arg("--emit-certificate")
        .arg(&cert)
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
    let doc = polytri_cli::document::read_document(&out).unwrap();
    let payload: polytri_cli::document::SubdivisionPayload =
        serde_json::from_value(doc.payload).unwrap();
    assert_eq!(payload.refined.maximal_cells.len(), 3);
    assert!(cert.exists());
    // Unknown file -> exit 2.
    let output = bin()
        .arg("extend")
        .arg(dir.join("missing.json"))
        .arg("boundary")
        .arg(dir.join("staircase_boundary.json"))
        .arg(dir.join("staircase_lifting.json"))
        .arg("--out")
        .arg(dir.join("never.json"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn check_regular_reports() {
    let dir = tmpdir("regular");
    fixtures_into(&dir);
    let out = dir.join("report.json");
    let output = bin()
        .arg("check-regular")
        .arg(dir.join("prism_boundary.json"))
        .arg(dir.join("twisted_boundary.json"))
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success());
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("NOT REGULAR"), "{stderr}");
    let doc = polytri_cli::document::read_document(&out).unwrap();
    assert_eq!(doc.kind, "report");
    let payload: polytri_cli::document::RegularityPayload =
        serde_json::from_value(doc.payload).unwrap();
    assert!(!payload.regular);
    assert!(!payload.infeasible_constraints.is_empty());
    // The diagonal subdivision is regular.
    let out2 = dir.join("report2.json");
    let output = bin()
        .arg("check-regular")
        .arg(dir.join("square.json"))
        .arg(dir.join("square_diagonal.json"))
        .arg("--out")
        .arg(&out2)
        .output()
        .unwrap();
    assert!(output.status.success());
    let doc = polytri_cli::document::read_document(&out2).unwrap();
    let payload: polytri_cli::document::RegularityPayload =
        serde_json::from_value(doc.payload).unwrap();
    assert!(payload.regular);
}

#[test]
fn enumerate_square() {
    let dir = tmpdir("enumerate");
    fixtures_into(&dir);
    let out = dir.join("tris.json");
    let output = bin()
        .arg("enumerate")
        .arg(dir.join("square.json"))
        .arg("--out")
        .arg(&out)
        .arg("--jobs")
        .arg("2")
        .output()
        .unwrap();
    assert!(output.status.success());
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("2 triangulations"), "{stderr}");
}

#[test]
fn cone_slice_round_trip_and_semistable() {
    let dir = tmpdir("cone");
    fixtures_into(&dir);
    let cone = dir.join("cone.json");
    let output = bin()
        .arg("cone")
        .arg(dir.join("square.json"))
        .arg("--out")
        .arg(&cone)
        .output()
        .unwrap();
    assert!(output.status.success());
    // Slicing values: all ones on the four rays.
    let ones = dir.join("ones.json");
    let values: std::collections::BTreeMap<usize, polytri::Rat> =
        (0..4).map(|r| (r, polytri::rat::rat(1))).collect();
    polytri_cli::document::write_document(
        &ones,
        &polytri_cli::document::wrap(
            "lifting",
            polytri_cli::document::lifting_to_payload(&values),
        ),
    )
    .unwrap();
    let sliced = dir.join("sliced.json");
    let output = bin()
        .arg("slice")
        .arg(&cone)
        .arg(&ones)
        .arg("--out")
        .arg(&sliced)
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
    let doc = polytri_cli::document::read_document(&sliced).unwrap();
    let payload: polytri_cli::document::ComplexPayload =
        serde_json::from_value(doc.payload).unwrap();
    assert_eq!(payload.ambient_dim, 3);
    assert_eq!(payload.maximal_cells, vec![vec![0, 1, 2, 3]]);
    // Semistable check on the quotient morphism fixture.
    let report = dir.join("ss.json");
    let output = bin()
        .arg("check-semistable")
        .arg(dir.join("quotient_morphism.json"))
        .arg("--out")
        .arg(&report)
        .output()
        .unwrap();
    assert!(output.status.success());
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(
        stderr.contains("nearly semistable: yes; semistable: no"),
        "{stderr}"
    );
    let doc = polytri_cli::document::read_document(&report).unwrap();
    let payload: polytri_cli::document::ReportPayload =
        serde_json::from_value(doc.payload).unwrap();
    assert_eq!(payload.verdict, "nearly_semistable");
}

#[test]
fn export_formats_and_dimension_guard() {
    let dir = tmpdir("export");
    fixtures_into(&dir);
    // A planar subdivision exports to SVG; a spatial one to OFF.
    let diag = dir.join("diag.json");
    bin()
        .arg("subdivide")
        .arg(dir.join("square.json"))
        .arg(dir.join("square_remark_lifting.json"))
        .arg("--out")
        .arg(&diag)
        .status()
        .unwrap();
    let svg = dir.join("diag.svg");
    let output = bin()
        .arg("export")
        .arg(&diag)
        .args(["--format", "svg"])
        .arg("--out")
        .arg(&svg)
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg"));
    assert_eq!(text.matches("<polygon").count(), 2);
    let stairs = dir.join("stairs.json");
    bin()
        .arg("extend")
        .arg(dir.join("prism.json"))
        .arg("boundary")
        .arg(dir.join("staircase_boundary.json"))
        .arg(dir.join("staircase_lifting.json"))
        .arg("--out")
        .arg(&stairs)
        .status()
        .unwrap();
    let off = dir.join("stairs.off");
    let output = bin()
        .arg("export")
        .arg(&stairs)
        .args(["--format", "off"])
        .arg("--out")
        .arg(&off)
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = std::fs::read_to_string(&off).unwrap();
    assert!(text.starts_with("OFF\n6 "));
    // A 3-dimensional complex cannot go to SVG: exit 7.
    let output = bin()
        .arg("export")
        .arg(&stairs)
        .args(["--format", "svg"])
        .arg("--out")
        .arg(dir.join("never.svg"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(7));
    // A 4-dimensional complex cannot go to OFF either: exit 7.
    use polytri::complex::IntegralStructure;
    use polytri::rat::rat;
    let coords: Vec<Vec<polytri::Rat>> = vec![
        vec![rat(0), rat(0), rat(0), rat(0)],
        vec![rat(1), rat(0), rat(0), rat(0)],
        vec![rat(0), rat(1), rat(0), rat(0)],
        vec![rat(0), rat(0), rat(1), rat(0)],
        vec![rat(0), rat(0), rat(0), rat(1)],
    ];
    let simplex4 = polytri::build_complex(
        coords.into_iter().enumerate().collect(),
        &[vec![0, 1, 2, 3, 4]],
        IntegralStructure::standard(4),
    )
    .unwrap();
    let sub4 = polytri::Subdivision::trivial(&simplex4);
    let path4 = dir.join("dim4.json");
    polytri_cli::document::write_document(
        &path4,
        &polytri_cli::document::wrap(
            "subdivision",
            polytri_cli::document::subdivision_to_payload(&sub4),
        ),
    )
    .unwrap();
    let output = bin()
        .arg("export")
        .arg(&path4)
        .args(["--format", "off"])
        .arg("--out")
        .arg(dir.join("never.off"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(7));
}

#[test]
fn fixture_directory_resolution() {
    let dir = tmpdir("fixdir");
    fixtures_into(&dir);
    let out = dir.join("res.json");
    // Bare names resolve against POLYTRI_FIXTURES.
    let output = bin()
        .arg("subdivide")
        .arg("square.json")
        .arg("zero_lifting_square.json")
        .arg("--out")
        .arg(&out)
        .env("POLYTRI_FIXTURES", &dir)
        .current_dir(std::env::temp_dir())
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
}
