mod common;

use atorus_core::bundle::build_total_chart;
use atorus_core::chart::Tier;
use atorus_core::sampling::sample_points;
use atorus_core::suite::geometry_reports;
use atorus_core::zoo;
use atorus_core::Executor;
use common::zoo_charts;

#[test]
fn curvature_pipeline_is_sound_on_every_zoo_chart() {
    for chart in zoo_charts() {
        let pts = sample_points(chart.domain(), 200, 7);
        for r in geometry_reports(&chart, &pts, 1e-8, Executor::default()).unwrap() {
            assert!(r.passed, "{}: {}", chart.name(), r.line());
        }
    }
}

#[test]
fn finite_difference_tier_passes_relaxed_tolerance() {
    let total = build_total_chart(&zoo::heisenberg()).unwrap().with_tier(Tier::FiniteDifference);
    let pts = total.sample(20, 2);
    for r in geometry_reports(total.chart(), &pts, 1e-4, Executor::default()).unwrap() {
        assert!(r.passed, "{}", r.line());
    }
    let cl = atorus_core::classify(total.chart(), 10, 2, 1e-4, Executor::default()).unwrap();
    assert!(cl.labels.contains(&atorus_core::Label::A), "{:?}", cl.reports);
}

#[test]
fn heisenberg_chart_values() {
    let total = build_total_chart(&zoo::heisenberg()).unwrap();
    let g = total.chart().metric_jet(&[0.3, 0.0, 0.0], 1).unwrap();
    assert!((g[4].value() - 1.09).abs() < 1e-15);
    assert!((g[4].d1(0) - 0.6).abs() < 1e-15);
    let gamma = atorus_core::geometry::christoffel(total.chart(), &[0.0, 0.0, 0.5]).unwrap();
    // Γ^t_xy = ½ at the origin
    assert!((gamma[(2 * 3) * 3 + 1] - 0.5).abs() < 1e-15);
    // Third vector: ∂_t − x/(1+x²) ∂_y, normalised.
    let x = 0.4;
    let f = atorus_core::geometry::orthonormal_frame(total.chart(), &[x, 0.0, 0.5]).unwrap();
    assert!((f[2][1] + x / (1.0 + x * x) * f[2][2]).abs() < 1e-14, "{:?}", f[2]);
    assert_eq!(f[2][0], 0.0);
}
