use std::path::Path;

use atorus_cli::{parse_spec, parse_spec_str, run, SuiteConfig};
use atorus_core::Executor;

fn shipped(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("specs").join(name)
}

fn config(target: &str) -> SuiteConfig {
    SuiteConfig {
        samples: 12,
        executor: Executor::Sequential,
        ..SuiteConfig::new(target)
    }
}

#[test]
fn heisenberg_spec_file_round_trips_to_the_zoo_entry() {
    let path = shipped("heisenberg.toml");
    let from_file = run(&config(path.to_str().unwrap())).unwrap();
    let from_zoo = run(&config("heisenberg")).unwrap();
    assert!(from_zoo.passed);
    assert_eq!(from_file.suites, from_zoo.suites);
    assert_eq!(from_file.classification, from_zoo.classification);
    assert_eq!(from_file.target.name, from_zoo.target.name);
    assert_eq!(from_file.passed, from_zoo.passed);
}

#[test]
fn inline_factor_spec_matches_zoo_hopf_structure() {
    let loaded = parse_spec(&shipped("berger-inline.toml")).unwrap();
    assert_eq!(loaded.spec.rank(), 1);
    assert_eq!(loaded.total.dim(), 3);
    let report = run(&config(shipped("berger-inline.toml").to_str().unwrap())).unwrap();
    assert!(report.passed, "{}", report.to_text());
}

const BASE: &str = r#"
b = [[1.0]]
a = [[1]]
potentials = [["0", "x"]]

[[factors]]
zoo = "flat-torus2"
"#;

fn err(src: &str) -> atorus_cli::SpecError {
    match parse_spec_str(src, "t.toml", "t") {
        Err(e) => e,
        Ok(_) => panic!("spec accepted"),
    }
}

#[test]
fn base_document_parses() {
    let loaded = parse_spec_str(BASE, "t.toml", "t").unwrap();
    assert_eq!(loaded.spec.name, "t");
    assert!(loaded.expected_labels.is_none());
}

#[test]
fn non_integer_a_names_the_integer_matrix_requirement() {
    let e = err(&BASE.replace("a = [[1]]", "a = [[0.5]]"));
    assert_eq!(e.field, "a[0][0]");
    assert_eq!(e.line, Some(3));
    assert!(e.message.contains("integer coefficients"), "{e}");
}

#[test]
fn asymmetric_b_is_rejected_naming_symmetry() {
    let src = BASE
        .replace("b = [[1.0]]", "b = [[1.0, 0.5], [0.0, 1.0]]")
        .replace("a = [[1]]", "a = [[1], [0]]")
        .replace(r#"potentials = [["0", "x"]]"#, r#"potentials = [["0", "x"], ["0", "0"]]"#);
    let e = err(&src);
    assert_eq!(e.field, "b");
    assert!(e.message.contains("b must be symmetric"), "{e}");
}

#[test]
fn non_spd_b_is_rejected() {
    let src = BASE
        .replace("b = [[1.0]]", "b = [[1.0, 2.0], [2.0, 1.0]]")
        .replace("a = [[1]]", "a = [[1], [0]]")
        .replace(r#"potentials = [["0", "x"]]"#, r#"potentials = [["0", "x"], ["0", "0"]]"#);
    let e = err(&src);
    assert_eq!(e.field, "b");
    assert!(e.message.contains("positive definite"), "{e}");
}

#[test]
fn wrong_potential_names_the_curvature_equation() {
    let e = err(&BASE.replace(r#"["0", "x"]"#, r#"["0", "x*x"]"#));
    assert_eq!(e.field, "potentials");
    assert!(e.message.contains("curvature equation"), "{e}");
}

#[test]
fn schema_problems_are_field_level() {
    let e = err(&BASE.replace("b = [[1.0]]\n", ""));
    assert_eq!(e.field, "document");
    assert!(e.message.contains("missing field `b`"), "{e}");
    let e = err(&format!("{BASE}colour = 1\n"));
    assert!(e.message.contains("colour"), "{e}");
    let e = err(&BASE.replace(r#""x""#, r#""x +""#));
    assert_eq!(e.field, "potentials[0][1]");
    let e = err(&BASE.replace("flat-torus2", "klein-bottle"));
    assert_eq!(e.field, "factors[0].zoo");
    let e = err(&BASE.replace(r#"zoo = "flat-torus2""#, r#"coords = ["x", "y"]"#));
    assert_eq!(e.field, "factors[0].domain");
}

#[test]
fn expected_labels_are_parsed() {
    let loaded = parse_spec_str(&format!("expected_labels = [\"a\", \"ac-perp\"]\n{BASE}"), "t.toml", "t").unwrap();
    assert_eq!(loaded.expected_labels.unwrap().len(), 2);
    let e = err(&format!("expected_labels = [\"b\"]\n{BASE}"));
    assert_eq!(e.line, Some(1));
}
