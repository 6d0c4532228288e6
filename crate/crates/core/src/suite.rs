//! Sampled residual suites shared by the command line and the tests.

use crate::chart::Chart;
use crate::error::Result;
use crate::field::{max_abs, to_frame};
use crate::geometry::{div_trace_from, inner, scalar_curvature, LocalGeometry};
use crate::jet::Jet;
use crate::report::ResidualReport;
use crate::sampling::Executor;

/// Algebraic identities are held to this fraction of the suite tolerance.
pub const ALGEBRAIC_FRACTION: f64 = 1e-2;
/// Frame orthonormality is held to this fraction of the suite tolerance.
pub const FRAME_FRACTION: f64 = 1e-4;

pub const GEOMETRY_CHECKS: [&str; 5] = [
    "metric-compatibility",
    "torsion-free",
    "ricci-symmetric",
    "contracted-bianchi",
    "frame-orthonormal",
];

fn geometry_sample(chart: &Chart, point: &[f64]) -> Result<[(f64, f64); 5]> {
    let n = chart.dim();
    let geom = LocalGeometry::at(chart, point, 3)?;
    let g = geom.metric_values();
    let nabla_g = geom.covariant_derivative(geom.metric(), 0, 2)?;
    let compat = nabla_g.iter().fold(0.0_f64, |m, j| m.max(j.value().abs()));
    let gamma = geom.christoffel_values();
    let mut torsion = 0.0_f64;
    for c in 0..n {
        for a in 0..n {
            for b in 0..n {
                torsion = torsion.max((gamma[(c * n + a) * n + b] - gamma[(c * n + b) * n + a]).abs());
            }
        }
    }
    let ric = geom.ricci()?;
    let ric_v: Vec<f64> = ric.iter().map(Jet::value).collect();
    let mut ric_sym = 0.0_f64;
    for a in 0..n {
        for b in 0..n {
            ric_sym = ric_sym.max((ric_v[a * n + b] - ric_v[b * n + a]).abs());
        }
    }
    let frame = geom.orthonormal_frame();
    let dt = div_trace_from(&geom, &ric)?;
    let scal = scalar_curvature(&geom, &ric);
    let bianchi: Vec<f64> = dt
        .divergence
        .iter()
        .zip(scal.gradient())
        .map(|(d, s)| d - 0.5 * s)
        .collect();
    let bianchi = max_abs(&to_frame(&bianchi, n, 1, &frame));
    let mut ortho = 0.0_f64;
    for (i, e) in frame.iter().enumerate() {
        for (j, f) in frame.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            ortho = ortho.max((inner(&g, n, e, f) - target).abs());
        }
    }
    let scale = max_abs(&to_frame(&ric_v, n, 2, &frame)).max(max_abs(&to_frame(&dt.divergence, n, 1, &frame)));
    Ok([
        (compat, max_abs(&g)),
        (torsion, max_abs(&gamma)),
        (ric_sym, scale),
        (bianchi, scale),
        (ortho, 1.0),
    ])
}

/// Soundness of the curvature pipeline at the given points.
pub fn geometry_reports(
    chart: &Chart,
    points: &[Vec<f64>],
    tolerance: f64,
    executor: Executor,
) -> Result<Vec<ResidualReport>> {
    let samples = executor.try_map(points, |p| geometry_sample(chart, p))?;
    let tols = [
        tolerance * ALGEBRAIC_FRACTION,
        tolerance * ALGEBRAIC_FRACTION,
        tolerance * ALGEBRAIC_FRACTION,
        tolerance,
        tolerance * FRAME_FRACTION,
    ];
    Ok(GEOMETRY_CHECKS
        .iter()
        .enumerate()
        .map(|(i, name)| ResidualReport::from_samples(*name, tols[i], samples.iter().map(|s| s[i])))
        .collect())
}
