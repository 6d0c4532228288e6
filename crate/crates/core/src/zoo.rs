//! Closed-form examples: Kähler–Einstein factors, torus bundles over them,
//! and negative controls.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::bundle::{BundleSpec, FactorSpec};
use crate::chart::Chart;
use crate::expr::Expr;
use crate::field::{ComponentField, FieldRef};
use crate::killing::Label;

const POLE_MARGIN: f64 = 0.1;

fn diag(entries: Vec<Expr>) -> Vec<Vec<Expr>> {
    let n = entries.len();
    entries
        .into_iter()
        .enumerate()
        .map(|(i, e)| {
            let mut row = vec![Expr::zero(); n];
            row[i] = e;
            row
        })
        .collect()
}

fn standard_j() -> FieldRef {
    ComponentField::endomorphism(vec![vec![Expr::zero(), -Expr::one()], vec![Expr::one(), Expr::zero()]])
        .expect("2x2")
        .into_ref()
}

/// Round sphere of radius `R` in polar coordinates with poles removed.
///
/// `J ∂θ = ∂φ / sin θ`, `ω = R² sin θ dθ∧dφ`, `c = 4πR²` (total area).
pub fn round_s2(radius: f64) -> FactorSpec {
    round_s2_named(radius, "")
}

/// [`round_s2`] with a suffix on the coordinate names.
pub fn round_s2_named(radius: f64, suffix: &str) -> FactorSpec {
    let th = Expr::var(0);
    let r2 = Expr::c(radius * radius);
    let chart = Chart::new(
        format!("round-s2{suffix}"),
        vec![format!("theta{suffix}"), format!("phi{suffix}")],
        vec![(POLE_MARGIN, PI - POLE_MARGIN), (-PI, PI)],
        diag(vec![r2.clone(), r2 * th.clone().sin().powi(2)]),
    )
    .expect("sphere chart");
    let j = ComponentField::endomorphism(vec![
        vec![Expr::zero(), -th.clone().sin()],
        vec![Expr::one() / th.clone().sin(), Expr::zero()],
    ])
    .expect("2x2")
    .into_ref();
    let c = 4.0 * PI * radius * radius;
    let alpha = ComponentField::two_form(2, &[((0, 1), Expr::c(radius * radius / c) * th.sin())])
        .expect("2-form")
        .into_ref();
    FactorSpec::new(format!("round-s2{suffix}"), chart, j, c).with_curvature_form(alpha)
}

/// Flat torus `ℝ²/ℤ²`-chart with `ω = dx∧dy`, `c = 2π`.
pub fn flat_torus2() -> FactorSpec {
    let chart = Chart::new(
        "flat-torus2",
        vec!["x".into(), "y".into()],
        vec![(-1.0, 1.0), (-1.0, 1.0)],
        diag(vec![Expr::one(), Expr::one()]),
    )
    .expect("torus chart");
    let alpha = ComponentField::two_form(2, &[((0, 1), Expr::c(1.0 / (2.0 * PI)))])
        .expect("2-form")
        .into_ref();
    FactorSpec::new("flat-torus2", chart, standard_j(), 2.0 * PI).with_curvature_form(alpha)
}

/// `CP¹` in an affine chart, `g = (du² + dv²)/(1+u²+v²)²`, Einstein constant 4,
/// total area and `c` equal to `π`.
pub fn fubini_study_cp1() -> FactorSpec {
    let conf = fs_conformal_factor();
    let chart = Chart::new(
        "fubini-study-cp1",
        vec!["u".into(), "v".into()],
        vec![(-2.0, 2.0), (-2.0, 2.0)],
        diag(vec![conf.clone(), conf.clone()]),
    )
    .expect("cp1 chart");
    let alpha = ComponentField::two_form(2, &[((0, 1), Expr::c(1.0 / PI) * conf)])
        .expect("2-form")
        .into_ref();
    FactorSpec::new("fubini-study-cp1", chart, standard_j(), PI).with_curvature_form(alpha)
}

fn fs_conformal_factor() -> Expr {
    let r2 = Expr::var(0).powi(2) + Expr::var(1).powi(2);
    (Expr::one() + r2).powi(-2)
}

/// Potential on a sphere factor for Chern number `a`: `−(a/2) cos θ dφ`.
fn sphere_potential(a: i64, offset: usize, m: usize) -> Vec<Expr> {
    let mut p = vec![Expr::zero(); m];
    if a != 0 {
        p[offset + 1] = Expr::c(-0.5 * a as f64) * Expr::var(offset).cos();
    }
    p
}

/// `dx² + dy² + (dt + x dy)²`.
pub fn heisenberg() -> BundleSpec {
    BundleSpec {
        name: "heisenberg".into(),
        factors: vec![flat_torus2()],
        b: vec![vec![1.0]],
        a: vec![vec![1]],
        potentials: vec![vec![Expr::zero(), Expr::var(0)]],
    }
}

/// Hopf fibration over the unit sphere with fiber metric `b11`; the round
/// `S³` of radius 2 at `b11 = 4`.
pub fn hopf_berger(b11: f64) -> BundleSpec {
    BundleSpec {
        name: format!("hopf-berger({b11})"),
        factors: vec![round_s2(1.0)],
        b: vec![vec![b11]],
        a: vec![vec![1]],
        potentials: vec![sphere_potential(1, 0, 2)],
    }
}

/// Fiber metric at which [`hopf_berger`] is Einstein.
pub const HOPF_EINSTEIN_B: f64 = 4.0;

/// `T²`-bundle over `S² × S²` with connection potentials
/// `A_j = Σ_k a_jk (−½ cos θ_k dφ_k)`.
pub fn t2_over_s2xs2(b: [[f64; 2]; 2], a: [[i64; 2]; 2]) -> BundleSpec {
    let factors = vec![round_s2_named(1.0, "1"), round_s2_named(1.0, "2")];
    let potentials = (0..2)
        .map(|j| {
            let p0 = sphere_potential(a[j][0], 0, 4);
            let p1 = sphere_potential(a[j][1], 2, 4);
            p0.into_iter().zip(p1).map(|(x, y)| x + y).collect()
        })
        .collect();
    BundleSpec {
        name: "t2-over-s2xs2".into(),
        factors,
        b: b.iter().map(|r| r.to_vec()).collect(),
        a: a.iter().map(|r| r.to_vec()).collect(),
        potentials,
    }
}

pub fn t2_over_s2xs2_default() -> BundleSpec {
    t2_over_s2xs2([[1.0, 0.0], [0.0, 2.0]], [[1, 0], [0, 1]])
}

/// The product `S² × S¹` as a bundle with zero connection.
pub fn trivial_s2() -> BundleSpec {
    BundleSpec {
        name: "trivial-s2".into(),
        factors: vec![round_s2(1.0)],
        b: vec![vec![1.0]],
        a: vec![vec![0]],
        potentials: vec![vec![Expr::zero(), Expr::zero()]],
    }
}

/// `dx² + (1 + 0.1x²) dy² + dz²`: a non-homogeneous surface times a line.
pub fn perturbed_flat() -> Chart {
    let x = Expr::var(0);
    Chart::new(
        "perturbed-flat",
        vec!["x".into(), "y".into(), "z".into()],
        vec![(-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)],
        diag(vec![Expr::one(), Expr::one() + Expr::c(0.1) * x.powi(2), Expr::one()]),
    )
    .expect("perturbed chart")
}

/// What a zoo entry describes.
#[derive(Clone)]
pub enum Target {
    Chart(Chart),
    Bundle(BundleSpec),
}

#[derive(Clone)]
pub struct ZooEntry {
    pub name: &'static str,
    pub target: Target,
    pub expected_labels: BTreeSet<Label>,
    pub notes: &'static str,
}

/// The check a counterexample must fail.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpectedFailure {
    /// The horizontal lift of a non-J-invariant tensor is not Killing.
    KillingLift,
    /// Classification yields no curvature class.
    Classification,
    /// Construction rejects the specification.
    Construction,
}

#[derive(Clone)]
pub struct Counterexample {
    pub name: &'static str,
    pub fails: ExpectedFailure,
    /// Smallest residual that counts as the expected failure.
    pub min_residual: f64,
    pub kind: CounterexampleKind,
}

#[derive(Clone)]
pub enum CounterexampleKind {
    /// Lift `tensors` (one per base factor) on the bundle.
    Lift { bundle: BundleSpec, tensors: Vec<FieldRef> },
    Chart(Chart),
    Spec(BundleSpec),
}

fn labels(ls: &[Label]) -> BTreeSet<Label> {
    ls.iter().copied().collect()
}

const EINSTEIN: [Label; 4] = [Label::Einstein, Label::ParallelRicci, Label::A, Label::ACPerp];
const STRICT: [Label; 3] = [Label::A, Label::StrictA, Label::ACPerp];

pub fn base_factors() -> Vec<FactorSpec> {
    vec![round_s2(1.0), flat_torus2(), fubini_study_cp1()]
}

pub fn entries() -> Vec<ZooEntry> {
    let mut out: Vec<ZooEntry> = base_factors()
        .into_iter()
        .map(|f| ZooEntry {
            name: match f.chart.name() {
                "round-s2" => "round-s2",
                "flat-torus2" => "flat-torus2",
                _ => "fubini-study-cp1",
            },
            target: Target::Chart(f.chart),
            expected_labels: labels(&EINSTEIN),
            notes: "Kähler–Einstein factor: Ric = λg with λ = 1, 0, 4 respectively",
        })
        .collect();
    out.extend([
        ZooEntry {
            name: "heisenberg",
            target: Target::Bundle(heisenberg()),
            expected_labels: labels(&STRICT),
            notes: "orthonormal Ricci eigenvalues (−½, −½, +½); T = ½J",
        },
        ZooEntry {
            name: "hopf-berger",
            target: Target::Bundle(hopf_berger(1.0)),
            expected_labels: labels(&STRICT),
            notes: "Berger sphere: vertical Ric = b/8, horizontal Ric = 1 − b/8 (b = 1)",
        },
        ZooEntry {
            name: "hopf-berger-einstein",
            target: Target::Bundle(hopf_berger(HOPF_EINSTEIN_B)),
            expected_labels: labels(&EINSTEIN),
            notes: "b = 4: round S³ of radius 2, Ric = ½ g",
        },
        ZooEntry {
            name: "t2-over-s2xs2",
            target: Target::Bundle(t2_over_s2xs2_default()),
            expected_labels: labels(&STRICT),
            notes: "b = diag(1, 2), a = identity, c_k = 4π",
        },
        ZooEntry {
            name: "trivial-s2",
            target: Target::Bundle(trivial_s2()),
            expected_labels: labels(&[Label::ParallelRicci, Label::A, Label::ACPerp]),
            notes: "flat connection: S² × S¹ with product metric",
        },
    ]);
    out
}

pub fn counterexamples() -> Vec<Counterexample> {
    let dxdx = ComponentField::covariant2(diag(vec![Expr::one(), Expr::zero()]))
        .expect("2x2")
        .into_ref();
    vec![
        Counterexample {
            name: "dxdx-lift",
            fails: ExpectedFailure::KillingLift,
            min_residual: 0.01,
            kind: CounterexampleKind::Lift {
                bundle: heisenberg(),
                tensors: vec![dxdx],
            },
        },
        Counterexample {
            name: "perturbed-flat",
            fails: ExpectedFailure::Classification,
            min_residual: 1e-4,
            kind: CounterexampleKind::Chart(perturbed_flat()),
        },
        Counterexample {
            name: "non-spd-b",
            fails: ExpectedFailure::Construction,
            min_residual: 0.0,
            kind: CounterexampleKind::Spec(t2_over_s2xs2([[1.0, 2.0], [2.0, 1.0]], [[1, 0], [0, 1]])),
        },
    ]
}

pub fn entry(name: &str) -> Option<ZooEntry> {
    entries().into_iter().find(|e| e.name == name)
}

pub fn counterexample(name: &str) -> Option<Counterexample> {
    counterexamples().into_iter().find(|e| e.name == name)
}

/// Looks up a factor by zoo name; `round-s2` accepts a radius.
pub fn factor(name: &str, radius: Option<f64>, suffix: &str) -> Option<FactorSpec> {
    match name {
        "round-s2" => Some(round_s2_named(radius.unwrap_or(1.0), suffix)),
        "flat-torus2" if suffix.is_empty() => Some(flat_torus2()),
        "flat-torus2" => Some(rename_factor(flat_torus2(), suffix)),
        "fubini-study-cp1" if suffix.is_empty() => Some(fubini_study_cp1()),
        "fubini-study-cp1" => Some(rename_factor(fubini_study_cp1(), suffix)),
        _ => None,
    }
}

fn rename_factor(f: FactorSpec, suffix: &str) -> FactorSpec {
    let coords = f.chart.coords().iter().map(|c| format!("{c}{suffix}")).collect();
    let exprs = f.chart.metric_exprs().expect("zoo charts are symbolic");
    let n = f.chart.dim();
    let rows = (0..n).map(|a| exprs[a * n..(a + 1) * n].to_vec()).collect();
    let chart = Chart::new(format!("{}{suffix}", f.chart.name()), coords, f.chart.domain().to_vec(), rows)
        .expect("renamed chart");
    FactorSpec {
        name: format!("{}{suffix}", f.name),
        chart,
        ..f
    }
}

/// The metric of a factor as a field.
pub fn metric_of(f: &FactorSpec) -> FieldRef {
    Arc::new(crate::field::MetricField(f.chart.clone()))
}
