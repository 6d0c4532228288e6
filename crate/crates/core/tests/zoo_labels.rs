use atorus_core::bundle::build_total_chart;
use atorus_core::killing::classify;
use atorus_core::zoo::{entries, Target};
use atorus_core::Executor;

#[test]
fn zoo_labels_match() {
    for e in entries() {
        let chart = match &e.target {
            Target::Chart(c) => c.clone(),
            Target::Bundle(s) => build_total_chart(s).unwrap().chart().clone(),
        };
        let cl = classify(&chart, 30, 7, 1e-8, Executor::default()).unwrap();
        for r in &cl.reports {
            println!("{:<22} {}", e.name, r.line());
        }
        assert_eq!(cl.labels, e.expected_labels, "{}", e.name);
    }
}
