use std::collections::BTreeSet;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use atorus_core::bundle::{
    build_total_chart, lift_killing, metric_lift, no_conformal_lift_check, ricci_reports, structure_reports,
};
use atorus_core::field::{max_abs, to_frame, MetricField};
use atorus_core::geometry::{orthonormal_frame, RicciField};
use atorus_core::killing::{conformal_p, cyclic_report, CyclicData};
use atorus_core::suite::geometry_reports;
use atorus_core::zoo::{self, Counterexample, CounterexampleKind, ExpectedFailure, Target};
use atorus_core::{
    classify, sample_points, Chart, Executor, FieldRef, Label, PChoice, ResidualReport, Tier, TotalChart,
};

use crate::config::{ConfigEcho, Suite, SuiteConfig};
use crate::error::RunError;
use crate::report::{
    ClassificationOutcome, CounterexampleOutcome, RunReport, SuiteOutcome, TargetKind, TargetSummary, SCHEMA,
};
use crate::spec::parse_spec;

pub const COUNTEREXAMPLE_PREFIX: &str = "counterexample:";

/// A target ready to be checked.
pub enum Resolved {
    Chart {
        name: String,
        chart: Chart,
        expected: Option<BTreeSet<Label>>,
    },
    Bundle {
        name: String,
        total: Box<TotalChart>,
        expected: Option<BTreeSet<Label>>,
    },
    Counterexample(Counterexample),
}

impl Resolved {
    pub fn kind(&self) -> TargetKind {
        match self {
            Resolved::Chart { .. } => TargetKind::Chart,
            Resolved::Bundle { .. } => TargetKind::Bundle,
            Resolved::Counterexample(_) => TargetKind::Counterexample,
        }
    }

    fn chart(&self) -> Option<&Chart> {
        match self {
            Resolved::Chart { chart, .. } => Some(chart),
            Resolved::Bundle { total, .. } => Some(total.chart()),
            Resolved::Counterexample(_) => None,
        }
    }
}

/// Names accepted as targets besides spec-file paths.
pub fn known_targets() -> Vec<String> {
    let mut out: Vec<String> = zoo::entries().iter().map(|e| e.name.to_string()).collect();
    out.extend(
        zoo::counterexamples()
            .iter()
            .map(|c| format!("{COUNTEREXAMPLE_PREFIX}{}", c.name)),
    );
    out
}

pub fn resolve(target: &str, tier: Tier) -> Result<Resolved, RunError> {
    if let Some(name) = target.strip_prefix(COUNTEREXAMPLE_PREFIX) {
        return zoo::counterexample(name).map(Resolved::Counterexample).ok_or_else(|| unknown(target));
    }
    if let Some(e) = zoo::entry(target) {
        return Ok(match e.target {
            Target::Chart(c) => Resolved::Chart {
                name: e.name.into(),
                chart: c.with_tier(tier),
                expected: Some(e.expected_labels),
            },
            Target::Bundle(spec) => Resolved::Bundle {
                name: e.name.into(),
                total: Box::new(build_total_chart(&spec)?.with_tier(tier)),
                expected: Some(e.expected_labels),
            },
        });
    }
    let path = Path::new(target);
    if path.exists() || target.ends_with(".toml") {
        let loaded = parse_spec(path)?;
        return Ok(Resolved::Bundle {
            name: loaded.spec.name.clone(),
            total: Box::new(loaded.total.with_tier(tier)),
            expected: loaded.expected_labels,
        });
    }
    Err(unknown(target))
}

fn unknown(target: &str) -> RunError {
    RunError::Usage(format!(
        "unknown target `{target}`; expected a spec file path or one of: {}",
        known_targets().join(", ")
    ))
}

fn applicable(kind: TargetKind) -> &'static [Suite] {
    match kind {
        TargetKind::Chart => &[Suite::Geometry, Suite::Killing, Suite::Classify],
        TargetKind::Bundle => &[Suite::Geometry, Suite::Killing, Suite::Bundle, Suite::Classify],
        TargetKind::Counterexample => &[Suite::Counterexample],
    }
}

pub fn run(config: &SuiteConfig) -> Result<RunReport, RunError> {
    config.validate()?;
    let resolved = resolve(&config.target, config.tier.tier())?;
    let kind = resolved.kind();
    let tol = config.tolerance();
    let exec = config.executor;
    let usable = applicable(kind);
    let requested: Vec<Suite> = if config.suites.is_empty() {
        usable.to_vec()
    } else {
        let set: BTreeSet<Suite> = config.suites.iter().copied().collect();
        set.into_iter().collect()
    };

    let mut notes = Vec::new();
    let mut suites = Vec::new();
    let mut timings = Vec::new();
    let mut classification = None;
    let mut counterexample = None;
    let points = resolved
        .chart()
        .map(|c| sample_points(c.domain(), config.samples, config.seed))
        .unwrap_or_default();

    for suite in requested {
        if !usable.contains(&suite) {
            notes.push(format!("suite `{}` does not apply to {} targets", suite.name(), kind.name()));
            continue;
        }
        let start = Instant::now();
        match (suite, &resolved) {
            (Suite::Counterexample, Resolved::Counterexample(ce)) => {
                counterexample = Some(run_counterexample(ce, config, tol)?);
            }
            (Suite::Geometry, r) => {
                let chart = r.chart().expect("geometry applies to charts");
                suites.push(SuiteOutcome::new(suite, geometry_reports(chart, &points, tol, exec)?));
            }
            (Suite::Killing, r) => {
                let total = match r {
                    Resolved::Bundle { total, .. } => Some(total.as_ref()),
                    _ => None,
                };
                let chart = r.chart().expect("killing applies to charts");
                suites.push(SuiteOutcome::new(
                    suite,
                    killing_suite(chart, total, &points, config.seed, tol, exec)?,
                ));
            }
            (Suite::Bundle, Resolved::Bundle { total, .. }) => {
                suites.push(SuiteOutcome::new(suite, bundle_suite(total, &points, config.seed, tol, exec)?));
            }
            (Suite::Classify, r) => {
                let expected = match r {
                    Resolved::Chart { expected, .. } | Resolved::Bundle { expected, .. } => expected.clone(),
                    Resolved::Counterexample(_) => None,
                };
                let chart = r.chart().expect("classify applies to charts");
                let cl = classify(chart, config.samples, config.seed, tol, exec)?;
                let mut gate = Vec::new();
                match &expected {
                    Some(e) => {
                        let mismatched = e.symmetric_difference(&cl.labels).count();
                        gate.push(ResidualReport::from_samples(
                            "expected-labels",
                            0.0,
                            [(mismatched as f64, e.len() as f64)],
                        ));
                    }
                    None => notes.push("no expected labels declared; labels are reported only".into()),
                }
                suites.push(SuiteOutcome::new(suite, gate));
                classification = Some(ClassificationOutcome {
                    labels: cl.labels,
                    expected,
                    max_conformal_p: cl.max_conformal_p,
                    residuals: cl.reports,
                });
            }
            _ => unreachable!("suite applicability checked above"),
        }
        timings.push((suite, start.elapsed()));
    }
    if suites.is_empty() && counterexample.is_none() {
        return Err(RunError::Usage(format!(
            "none of the requested suites applies to {} targets; applicable: {}",
            kind.name(),
            usable.iter().map(|s| s.name()).collect::<Vec<_>>().join(", ")
        )));
    }

    let target = TargetSummary {
        name: match &resolved {
            Resolved::Chart { name, .. } | Resolved::Bundle { name, .. } => name.clone(),
            Resolved::Counterexample(ce) => ce.name.to_string(),
        },
        kind,
        dimension: resolved.chart().map(Chart::dim),
    };
    let mut report = RunReport {
        schema: SCHEMA.into(),
        config: ConfigEcho::from(config),
        target,
        suites,
        classification,
        counterexample,
        notes,
        passed: false,
        timings,
    };
    report.passed = report.verdict();
    Ok(report)
}

/// Largest frame component of the P-form of `k`.
fn frame_p(chart: &Chart, k: &dyn atorus_core::TensorField, p: &[f64]) -> atorus_core::Result<f64> {
    let frame = orthonormal_frame(chart, p)?;
    Ok(max_abs(&to_frame(&conformal_p(chart, k, p)?, chart.dim(), 1, &frame)))
}

fn killing_suite(
    chart: &Chart,
    total: Option<&TotalChart>,
    points: &[Vec<f64>],
    seed: u64,
    tol: f64,
    exec: Executor,
) -> Result<Vec<ResidualReport>, RunError> {
    let n = chart.dim();
    let g = MetricField(chart.clone());
    let mut out = vec![cyclic_report("metric-killing", chart, &g, &PChoice::Zero, points, tol, exec)?];
    let p = exec.try_map(points, |x| Ok::<_, atorus_core::GeomError>((frame_p(chart, &g, x)?, 1.0)))?;
    out.push(ResidualReport::from_samples("metric-p-form", tol, p));

    // ∇_X Ric(X,X) − P(X)g(X,X) against a third of the cyclic form on (X,X,X).
    let ric = RicciField(chart.clone());
    let indexed: Vec<(u64, &Vec<f64>)> = points.iter().enumerate().map(|(i, p)| (i as u64, p)).collect();
    let cube = vec![(-1.0, 1.0); n];
    let pol = exec.try_map(&indexed, |(i, p)| -> atorus_core::Result<(f64, f64)> {
        let x = &sample_points(&cube, 1, seed.wrapping_add(*i))[0];
        let data = CyclicData::at(chart, &ric, &PChoice::Conformal, p)?;
        let single = data.single_vector_defect(x);
        Ok(((data.defect(x, x, x) - 3.0 * single).abs(), single.abs()))
    })?;
    out.push(ResidualReport::from_samples("polarization-identity", tol, pol));

    if let Some(total) = total {
        let lifted_g = metric_lift(total, points)?;
        out.push(cyclic_report(
            "lift-metric-killing",
            chart,
            lifted_g.tensor.as_ref(),
            &PChoice::Zero,
            points,
            tol,
            exec,
        )?);
        out.push(j_report("lift-metric-j-invariant", &lifted_g.j_defects, tol));
        let riccis: Vec<FieldRef> = total
            .spec()
            .factors
            .iter()
            .map(|f| Arc::new(RicciField(f.chart.clone())) as FieldRef)
            .collect();
        let lifted_ric = lift_killing(total, &riccis, points)?;
        let report = cyclic_report(
            "lift-ricci-killing",
            chart,
            lifted_ric.tensor.as_ref(),
            &PChoice::Zero,
            points,
            tol,
            exec,
        )?;
        // Flat factors lift to the zero tensor.
        let vacuous = report.scale == 0.0;
        out.push(report.vacuous(vacuous));
        out.push(j_report("lift-ricci-j-invariant", &lifted_ric.j_defects, tol));
        out.push(no_conformal_lift_check(total, lifted_ric.tensor.as_ref(), points, tol, exec)?);
    }
    Ok(out)
}

fn j_report(name: &str, defects: &[f64], tol: f64) -> ResidualReport {
    ResidualReport::from_samples(name, tol, defects.iter().map(|d| (*d, 1.0)))
}

fn bundle_suite(
    total: &TotalChart,
    points: &[Vec<f64>],
    seed: u64,
    tol: f64,
    exec: Executor,
) -> Result<Vec<ResidualReport>, RunError> {
    let mut out = Vec::new();
    for f in &total.spec().factors {
        let fp = sample_points(f.chart.domain(), points.len(), seed);
        out.extend(f.reports(&fp, tol, exec)?);
    }
    let curv = exec.try_map(points, |p| total.curvature_equation_defect(total.project(p)))?;
    out.push(ResidualReport::from_samples("curvature-equation", tol, curv));
    out.extend(structure_reports(total, points, tol, exec)?);
    out.extend(ricci_reports(total, points, tol, exec)?.0);
    let ric = RicciField(total.chart().clone());
    let p = exec.try_map(points, |x| Ok::<_, atorus_core::GeomError>((frame_p(total.chart(), &ric, x)?, 1.0)))?;
    out.push(ResidualReport::from_samples("ricci-p-form", tol, p));
    Ok(out)
}

fn failure_name(f: ExpectedFailure) -> &'static str {
    match f {
        ExpectedFailure::KillingLift => "killing-lift",
        ExpectedFailure::Classification => "classification",
        ExpectedFailure::Construction => "construction",
    }
}

fn run_counterexample(ce: &Counterexample, config: &SuiteConfig, tol: f64) -> Result<CounterexampleOutcome, RunError> {
    let tier = config.tier.tier();
    let exec = config.executor;
    let mut outcome = CounterexampleOutcome {
        name: ce.name.into(),
        expected_failure: failure_name(ce.fails).into(),
        min_residual: ce.min_residual,
        observed_residual: None,
        failed_as_expected: false,
        detail: String::new(),
        evidence: Vec::new(),
    };
    match &ce.kind {
        CounterexampleKind::Lift { bundle, tensors } => {
            let total = build_total_chart(bundle)?.with_tier(tier);
            let pts = total.sample(config.samples, config.seed);
            let lifted = lift_killing(&total, tensors, &pts)?;
            let killing = cyclic_report(
                "lift-killing",
                total.chart(),
                lifted.tensor.as_ref(),
                &PChoice::Zero,
                &pts,
                tol,
                exec,
            )?;
            let j = j_report("lift-j-invariant", &lifted.j_defects, tol);
            let control_lift = metric_lift(&total, &pts)?;
            let control = cyclic_report(
                "control/lift-metric-killing",
                total.chart(),
                control_lift.tensor.as_ref(),
                &PChoice::Zero,
                &pts,
                tol,
                exec,
            )?;
            outcome.observed_residual = Some(killing.max_residual);
            outcome.failed_as_expected = killing.max_residual >= ce.min_residual && !j.passed && control.passed;
            outcome.detail = format!(
                "lift Killing residual {:.3e}, J-invariance defect {:.3e}; metric lift control {}",
                killing.max_residual,
                j.max_residual,
                if control.passed { "passes" } else { "FAILS" }
            );
            outcome.evidence = vec![killing, j, control];
        }
        CounterexampleKind::Chart(chart) => {
            let chart = chart.with_tier(tier);
            let pts = sample_points(chart.domain(), config.samples, config.seed);
            let controls: Vec<ResidualReport> = geometry_reports(&chart, &pts, tol, exec)?
                .into_iter()
                .map(|mut r| {
                    r.name = format!("control/{}", r.name);
                    r
                })
                .collect();
            let cl = classify(&chart, config.samples, config.seed, tol, exec)?;
            let weakest = ["ricci-killing", "ricci-conformal-killing"]
                .iter()
                .filter_map(|n| cl.report(n))
                .map(|r| r.max_residual)
                .fold(f64::INFINITY, f64::min);
            let none = cl.labels == BTreeSet::from([Label::None]);
            outcome.observed_residual = Some(weakest);
            outcome.failed_as_expected =
                none && weakest >= ce.min_residual && controls.iter().all(|r| r.passed);
            outcome.detail = format!(
                "labels {{{}}}; smallest Killing/conformal residual {weakest:.3e}",
                cl.labels.iter().map(Label::to_string).collect::<Vec<_>>().join(", ")
            );
            outcome.evidence = cl.reports.into_iter().chain(controls).collect();
        }
        CounterexampleKind::Spec(spec) => match build_total_chart(spec) {
            Err(e) => {
                outcome.failed_as_expected = true;
                outcome.detail = format!("rejected: {e}");
            }
            Ok(_) => outcome.detail = "construction accepted the specification".into(),
        },
    }
    Ok(outcome)
}
