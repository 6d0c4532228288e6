//! Conformal Killing tensors and forms, and the curvature classes built on
//! them.
//!
//! A symmetric `K` is conformal Killing when
//! `𝒞 ∇_X K(Y,Z) = 𝒞 P(X) g(Y,Z)` with
//! `P = (2 div K + d tr K) / (n + 2)`, and Killing when that `P` vanishes.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::chart::Chart;
use crate::error::{GeomError, Result};
use crate::exterior::{codifferential_from, exterior_derivative_jets, form_inner, wedge};
use crate::field::{flatten, max_abs, to_frame, unflatten, EmbeddedField, FieldRef, SumField, TensorField};
use crate::geometry::{
    check_dim, check_symmetric, div_trace_from, require_type, scalar_curvature, LocalGeometry,
};
use crate::jet::Jet;
use crate::report::ResidualReport;
use crate::sampling::{sample_points, Executor};

/// `P_b` from precomputed geometry and `K` jets of order ≥ 1.
pub fn conformal_p_from(geom: &LocalGeometry, k: &[Jet]) -> Result<Vec<f64>> {
    let n = geom.dim() as f64;
    let dt = div_trace_from(geom, k)?;
    Ok(dt
        .divergence
        .iter()
        .zip(&dt.trace_gradient)
        .map(|(div, dtr)| (2.0 * div + dtr) / (n + 2.0))
        .collect())
}

/// The P-form of `K` at a point, as a covector.
pub fn conformal_p(chart: &Chart, k: &dyn TensorField, point: &[f64]) -> Result<Vec<f64>> {
    check_dim(chart, k)?;
    require_type(k, 0, 2, "tensor")?;
    let geom = LocalGeometry::at(chart, point, 1)?;
    conformal_p_from(&geom, &k.jet(point, 1)?)
}

/// `P(X)`.
pub fn conformal_p_along(chart: &Chart, k: &dyn TensorField, x: &[f64], point: &[f64]) -> Result<f64> {
    Ok(dot(&conformal_p(chart, k, point)?, x))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Which 1-form is subtracted in the cyclic identity.
#[derive(Clone)]
pub enum PChoice {
    /// `P = 0`: the Killing condition.
    Zero,
    /// The P-form computed from `K` itself.
    Conformal,
    /// An externally supplied covector field.
    Given(FieldRef),
}

/// `∇K` and the subtracted `P` at one point, in coordinates.
#[derive(Clone, Debug)]
pub struct CyclicData {
    pub n: usize,
    /// `∇_a K_bc` at `(a*n + b)*n + c`.
    pub nabla_k: Vec<f64>,
    pub p: Vec<f64>,
    pub metric: Vec<f64>,
}

impl CyclicData {
    pub fn at(chart: &Chart, k: &dyn TensorField, choice: &PChoice, point: &[f64]) -> Result<CyclicData> {
        check_dim(chart, k)?;
        require_type(k, 0, 2, "tensor")?;
        let geom = LocalGeometry::at(chart, point, 1)?;
        let jets = k.jet(point, 1)?;
        CyclicData::from_jets(&geom, &jets, choice)
    }

    pub fn from_jets(geom: &LocalGeometry, k: &[Jet], choice: &PChoice) -> Result<CyclicData> {
        let n = geom.dim();
        let values: Vec<f64> = k.iter().map(Jet::value).collect();
        check_symmetric(&values, n)?;
        let nabla_k = geom
            .covariant_derivative(k, 0, 2)?
            .iter()
            .map(Jet::value)
            .collect();
        let p = match choice {
            PChoice::Zero => vec![0.0; n],
            PChoice::Conformal => conformal_p_from(geom, k)?,
            PChoice::Given(f) => {
                require_type(f.as_ref(), 0, 1, "P-form")?;
                f.values(geom.point())?
            }
        };
        Ok(CyclicData {
            n,
            nabla_k,
            p,
            metric: geom.metric_values(),
        })
    }

    /// `C_abc = 𝒞 ∇_a K_bc − 𝒞 P_a g_bc`, totally symmetric.
    pub fn tensor(&self) -> Vec<f64> {
        let n = self.n;
        let nk = |a: usize, b: usize, c: usize| self.nabla_k[(a * n + b) * n + c];
        let pg = |a: usize, b: usize, c: usize| self.p[a] * self.metric[b * n + c];
        let mut out = vec![0.0; n * n * n];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    out[(a * n + b) * n + c] = nk(a, b, c) + nk(b, c, a) + nk(c, a, b)
                        - pg(a, b, c)
                        - pg(b, c, a)
                        - pg(c, a, b);
                }
            }
        }
        out
    }

    /// Signed cyclic defect on three vectors.
    pub fn defect(&self, x: &[f64], y: &[f64], z: &[f64]) -> f64 {
        crate::field::contract(&self.tensor(), self.n, &[x, y, z])
    }

    /// `∇_X K(X,X) − P(X) g(X,X)`.
    pub fn single_vector_defect(&self, x: &[f64]) -> f64 {
        let n = self.n;
        let nk = crate::field::contract(&self.nabla_k, n, &[x, x, x]);
        let gxx = crate::field::contract(&self.metric, n, &[x, x]);
        nk - dot(&self.p, x) * gxx
    }

    /// Max over orthonormal-frame triples, and the largest term magnitude.
    pub fn frame_max(&self, frame: &[Vec<f64>]) -> (f64, f64) {
        let n = self.n;
        let c = to_frame(&self.tensor(), n, 3, frame);
        let nk = to_frame(&self.nabla_k, n, 3, frame);
        let p = to_frame(&self.p, n, 1, frame);
        (max_abs(&c), max_abs(&nk).max(max_abs(&p)))
    }
}

/// `|𝒞 ∇_X K(Y,Z) − 𝒞 P(X) g(Y,Z)|`.
pub fn cyclic_residual(
    chart: &Chart,
    k: &dyn TensorField,
    choice: &PChoice,
    point: &[f64],
    x: &[f64],
    y: &[f64],
    z: &[f64],
) -> Result<f64> {
    Ok(CyclicData::at(chart, k, choice, point)?.defect(x, y, z).abs())
}

/// Largest cyclic residual over orthonormal-frame triples at a point, with
/// the largest term magnitude.
pub fn cyclic_frame_residual(
    chart: &Chart,
    k: &dyn TensorField,
    choice: &PChoice,
    point: &[f64],
) -> Result<(f64, f64)> {
    let geom = LocalGeometry::at(chart, point, 1)?;
    check_dim(chart, k)?;
    require_type(k, 0, 2, "tensor")?;
    let data = CyclicData::from_jets(&geom, &k.jet(point, 1)?, choice)?;
    Ok(data.frame_max(&geom.orthonormal_frame()))
}

/// Cyclic residual over seeded sample points.
pub fn cyclic_report(
    name: &str,
    chart: &Chart,
    k: &dyn TensorField,
    choice: &PChoice,
    points: &[Vec<f64>],
    tolerance: f64,
    executor: Executor,
) -> Result<ResidualReport> {
    let samples = executor.try_map(points, |p| cyclic_frame_residual(chart, k, choice, p))?;
    Ok(ResidualReport::from_samples(name, tolerance, samples))
}

/// `R_{aB} = ∇_a φ_B − (dφ)_{aB}/(p+1) + (g_a ∧ δφ)_B/(n−p+1)` at a point.
///
/// `φ` is conformal Killing exactly when `R` vanishes.
pub fn conformal_form_defect(chart: &Chart, phi: &dyn TensorField, point: &[f64]) -> Result<Vec<f64>> {
    check_dim(chart, phi)?;
    let n = chart.dim();
    if phi.contravariant_rank() != 0 {
        return Err(GeomError::RankMismatch("conformal Killing forms are covariant".into()));
    }
    let p = phi.covariant_rank();
    if p == 0 || p > n {
        return Err(GeomError::DegreeOutOfRange(format!(
            "conformal Killing forms need 1 <= p <= n, got p = {p} with n = {n}"
        )));
    }
    let geom = LocalGeometry::at(chart, point, 1)?;
    let jets = phi.jet(point, 1)?;
    let nabla = geom.covariant_derivative(&jets, 0, p)?;
    let d = exterior_derivative_jets(&jets, n, p);
    let delta = codifferential_from(&geom, &jets, p)?;
    let g = geom.metric_values();
    let len = n.pow(p as u32);
    let mut out = Vec::with_capacity(n * len);
    for a in 0..n {
        let xa = wedge(&g[a * n..(a + 1) * n], 1, &delta, p - 1, n);
        for b in 0..len {
            let flat = a * len + b;
            out.push(
                nabla[flat].value() - d[flat].value() / (p as f64 + 1.0)
                    + xa.components[b] / (n - p + 1) as f64,
            );
        }
    }
    Ok(out)
}

/// Largest frame component of [`conformal_form_defect`].
pub fn conformal_form_residual(chart: &Chart, phi: &dyn TensorField, point: &[f64]) -> Result<f64> {
    let defect = conformal_form_defect(chart, phi, point)?;
    let frame = crate::geometry::orthonormal_frame(chart, point)?;
    Ok(max_abs(&to_frame(&defect, chart.dim(), phi.covariant_rank() + 1, &frame)))
}

/// `K(X,Y) = g(X⌟φ, Y⌟ψ) + g(Y⌟φ, X⌟ψ)` for two `p`-forms.
#[derive(Clone)]
pub struct PairTensor {
    chart: Chart,
    phi: FieldRef,
    psi: FieldRef,
    degree: usize,
}

impl PairTensor {
    pub fn new(chart: &Chart, phi: FieldRef, psi: FieldRef) -> Result<PairTensor> {
        check_dim(chart, phi.as_ref())?;
        check_dim(chart, psi.as_ref())?;
        if phi.contravariant_rank() != 0 || psi.contravariant_rank() != 0 {
            return Err(GeomError::RankMismatch("pair tensors take covariant forms".into()));
        }
        let degree = phi.covariant_rank();
        if psi.covariant_rank() != degree {
            return Err(GeomError::DegreeOutOfRange(format!(
                "forms of degree {degree} and {} cannot be paired",
                psi.covariant_rank()
            )));
        }
        if degree == 0 {
            return Err(GeomError::DegreeOutOfRange("pair tensors need degree >= 1".into()));
        }
        Ok(PairTensor {
            chart: chart.clone(),
            phi,
            psi,
            degree,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `P(X) = −(2/(n−p+1)) (g(δφ, X⌟ψ) + g(δψ, X⌟φ))` as a covector.
    pub fn predicted_p(&self, point: &[f64]) -> Result<Vec<f64>> {
        let n = self.chart.dim();
        let p = self.degree;
        let geom = LocalGeometry::at(&self.chart, point, 1)?;
        let phi = self.phi.jet(point, 1)?;
        let psi = self.psi.jet(point, 1)?;
        let dphi = codifferential_from(&geom, &phi, p)?;
        let dpsi = codifferential_from(&geom, &psi, p)?;
        let phi: Vec<f64> = phi.iter().map(Jet::value).collect();
        let psi: Vec<f64> = psi.iter().map(Jet::value).collect();
        let ginv = geom.inverse_values();
        let stride = n.pow(p as u32 - 1);
        let coef = -2.0 / (n - p + 1) as f64;
        Ok((0..n)
            .map(|a| {
                let xpsi = &psi[a * stride..(a + 1) * stride];
                let xphi = &phi[a * stride..(a + 1) * stride];
                coef * (form_inner(&ginv, n, &dphi, xpsi, p - 1) + form_inner(&ginv, n, &dpsi, xphi, p - 1))
            })
            .collect())
    }

    /// The predicted P-form as a field, for use with [`PChoice::Given`].
    pub fn predicted_p_field(&self) -> FieldRef {
        std::sync::Arc::new(PredictedP(self.clone()))
    }
}

impl TensorField for PairTensor {
    fn dim(&self) -> usize {
        self.chart.dim()
    }
    fn contravariant_rank(&self) -> usize {
        0
    }
    fn covariant_rank(&self) -> usize {
        2
    }
    fn jet(&self, point: &[f64], order: usize) -> Result<Vec<Jet>> {
        let n = self.chart.dim();
        let q = self.degree - 1;
        let phi = self.phi.jet(point, order)?;
        let psi = self.psi.jet(point, order)?;
        let stride = n.pow(q as u32);
        let raised = if q == 0 {
            psi
        } else {
            let geom = LocalGeometry::at(&self.chart, point, order.max(1))?;
            let ginv: Vec<Jet> = geom.inverse().iter().map(|j| j.truncate(order)).collect();
            raise_trailing(&ginv, n, psi, q + 1, 1)
        };
        let factorial: f64 = (1..=q).map(|k| k as f64).product();
        let mut half = vec![Jet::zero(n, order); n * n];
        for a in 0..n {
            for b in 0..n {
                let h = &mut half[a * n + b];
                for i in 0..stride {
                    h.add_product(1.0 / factorial, &phi[a * stride + i], &raised[b * stride + i]);
                }
            }
        }
        let mut out = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                out.push(&half[a * n + b] + &half[b * n + a]);
            }
        }
        Ok(out)
    }
}

/// Raises slots `from..rank` of a covariant jet tensor.
fn raise_trailing(ginv: &[Jet], n: usize, t: Vec<Jet>, rank: usize, from: usize) -> Vec<Jet> {
    let mut cur = t;
    let order = ginv[0].order();
    for s in from..rank {
        let stride = n.pow((rank - 1 - s) as u32);
        let next = (0..cur.len())
            .map(|flat| {
                let a = (flat / stride) % n;
                let base = flat - a * stride;
                let mut acc = Jet::zero(n, order);
                for c in 0..n {
                    acc.add_product(1.0, &ginv[a * n + c], &cur[base + c * stride]);
                }
                acc
            })
            .collect();
        cur = next;
    }
    cur
}

struct PredictedP(PairTensor);

impl TensorField for PredictedP {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn contravariant_rank(&self) -> usize {
        0
    }
    fn covariant_rank(&self) -> usize {
        1
    }
    fn jet(&self, point: &[f64], order: usize) -> Result<Vec<Jet>> {
        if order > 0 {
            return Err(GeomError::OrderUnavailable {
                requested: order,
                available: 0,
            });
        }
        let n = self.dim();
        Ok(self
            .0
            .predicted_p(point)?
            .into_iter()
            .map(|v| Jet::constant(n, 0, v))
            .collect())
    }
}

/// Block-diagonal sum of `(0,2)` tensors on the factors of a product chart.
pub fn sum_tensor(product: &crate::chart::ProductChart, tensors: &[FieldRef]) -> Result<SumField> {
    if tensors.len() != product.factors.len() {
        return Err(GeomError::RankMismatch(format!(
            "{} tensors for {} factors",
            tensors.len(),
            product.factors.len()
        )));
    }
    let n = product.chart.dim();
    let mut terms: Vec<FieldRef> = Vec::with_capacity(tensors.len());
    for (k, t) in tensors.iter().enumerate() {
        require_type(t.as_ref(), 0, 2, "summand")?;
        if t.dim() != product.factors[k].dim() {
            return Err(GeomError::RankMismatch(format!(
                "summand {k} has dimension {}, factor has {}",
                t.dim(),
                product.factors[k].dim()
            )));
        }
        terms.push(std::sync::Arc::new(EmbeddedField::new(t.clone(), n, product.offsets[k])?));
    }
    SumField::new(terms)
}

/// Curvature classes, ordered so that each implies the next where noted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Label {
    Einstein,
    ParallelRicci,
    A,
    StrictA,
    /// Ricci is a conformal Killing tensor.
    #[serde(rename = "ac-perp")]
    ACPerp,
    None,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Einstein => "einstein",
            Label::ParallelRicci => "parallel-ricci",
            Label::A => "a",
            Label::StrictA => "strict-a",
            Label::ACPerp => "ac-perp",
            Label::None => "none",
        })
    }
}

/// Labels together with the residuals that decided them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub labels: BTreeSet<Label>,
    pub reports: Vec<ResidualReport>,
    /// Largest `|P|` among frame components, for telling 𝒜𝒞⊥ apart from 𝒜.
    pub max_conformal_p: f64,
}

impl Classification {
    pub fn report(&self, name: &str) -> Option<&ResidualReport> {
        self.reports.iter().find(|r| r.name == name)
    }
}

pub const STRICTNESS_FACTOR: f64 = 100.0;

/// Per-point Ricci invariants used by [`classify`].
#[derive(Clone, Debug, Default)]
struct RicciSample {
    einstein: f64,
    dscal: f64,
    nabla_ric: f64,
    cyclic: f64,
    conformal: f64,
    p: f64,
    ric_scale: f64,
    scale_nabla: f64,
}

fn ricci_sample(chart: &Chart, point: &[f64]) -> Result<RicciSample> {
    let n = chart.dim();
    let geom = LocalGeometry::at(chart, point, 3)?;
    let ric = geom.ricci()?;
    let frame = geom.orthonormal_frame();
    let scal = scalar_curvature(&geom, &ric);
    let g = geom.metric_values();
    let ric_v: Vec<f64> = ric.iter().map(Jet::value).collect();
    let trace_free: Vec<f64> = ric_v
        .iter()
        .zip(&g)
        .map(|(r, gv)| r - scal.value() / n as f64 * gv)
        .collect();
    let killing = CyclicData::from_jets(&geom, &ric, &PChoice::Zero)?;
    let conformal = CyclicData::from_jets(&geom, &ric, &PChoice::Conformal)?;
    let (cyclic, scale_nabla) = killing.frame_max(&frame);
    let (conf, _) = conformal.frame_max(&frame);
    Ok(RicciSample {
        einstein: max_abs(&to_frame(&trace_free, n, 2, &frame)),
        dscal: max_abs(&to_frame(&scal.gradient(), n, 1, &frame)),
        nabla_ric: max_abs(&to_frame(&killing.nabla_k, n, 3, &frame)),
        cyclic,
        conformal: conf,
        p: max_abs(&to_frame(&conformal.p, n, 1, &frame)),
        ric_scale: max_abs(&to_frame(&ric_v, n, 2, &frame)),
        scale_nabla,
    })
}

/// Assigns curvature labels from Ricci residuals at seeded sample points.
///
/// Einstein requires both a pure-trace Ricci tensor and constant scalar
/// curvature, so the label is meaningful in dimension 2 as well.
pub fn classify(
    chart: &Chart,
    samples: usize,
    seed: u64,
    tolerance: f64,
    executor: Executor,
) -> Result<Classification> {
    let points = sample_points(chart.domain(), samples, seed);
    let data = executor.try_map(&points, |p| ricci_sample(chart, p))?;
    let report = |name: &str, f: &dyn Fn(&RicciSample) -> (f64, f64)| {
        ResidualReport::from_samples(name, tolerance, data.iter().map(f))
    };
    let einstein = report("ricci-trace-free", &|s| (s.einstein, s.ric_scale));
    let dscal = report("scalar-curvature-gradient", &|s| (s.dscal, s.ric_scale));
    let parallel = report("ricci-covariant-derivative", &|s| (s.nabla_ric, s.nabla_ric));
    let cyclic = report("ricci-killing", &|s| (s.cyclic, s.scale_nabla));
    let conformal = report("ricci-conformal-killing", &|s| (s.conformal, s.scale_nabla));
    let max_p = data.iter().fold(0.0_f64, |m, s| m.max(s.p));

    let mut labels = BTreeSet::new();
    let is_einstein = einstein.passed && dscal.passed;
    if is_einstein {
        labels.insert(Label::Einstein);
    }
    if parallel.passed {
        labels.insert(Label::ParallelRicci);
    }
    if cyclic.passed {
        labels.insert(Label::A);
        if parallel.max_residual >= STRICTNESS_FACTOR * tolerance {
            labels.insert(Label::StrictA);
        }
    }
    if conformal.passed {
        labels.insert(Label::ACPerp);
    }
    let chain = [
        (is_einstein, parallel.passed, "Einstein but Ricci not parallel"),
        (parallel.passed, cyclic.passed, "Ricci parallel but not Killing"),
        (cyclic.passed, conformal.passed, "Ricci Killing but not conformal Killing"),
    ];
    for (stronger, weaker, what) in chain {
        if stronger && !weaker {
            return Err(GeomError::InconsistentLabels(format!("{what} on `{}`", chart.name())));
        }
    }
    if labels.is_empty() {
        labels.insert(Label::None);
    }
    Ok(Classification {
        labels,
        reports: vec![einstein, dscal, parallel, cyclic, conformal],
        max_conformal_p: max_p,
    })
}

/// Largest `|K(JX,Y) + K(X,JY)|` over frame pairs; zero for J-invariant `K`.
pub fn j_invariance_defect(
    chart: &Chart,
    k: &dyn TensorField,
    j: &dyn TensorField,
    point: &[f64],
) -> Result<f64> {
    require_type(k, 0, 2, "tensor")?;
    require_type(j, 1, 1, "complex structure")?;
    let n = chart.dim();
    let kv = k.values(point)?;
    let jv = j.values(point)?;
    let frame = crate::geometry::orthonormal_frame(chart, point)?;
    let apply = |x: &[f64]| -> Vec<f64> {
        (0..n).map(|a| (0..n).map(|b| jv[a * n + b] * x[b]).sum()).collect()
    };
    let kk = |x: &[f64], y: &[f64]| crate::field::contract(&kv, n, &[x, y]);
    let mut worst = 0.0_f64;
    for x in &frame {
        let jx = apply(x);
        for y in &frame {
            let jy = apply(y);
            worst = worst.max((kk(&jx, y) + kk(x, &jy)).abs());
        }
    }
    Ok(worst)
}

/// Antisymmetrises every index of a covariant tensor, used to build test
/// forms from arbitrary component data.
pub fn antisymmetrize(values: &[f64], n: usize, rank: usize) -> Vec<f64> {
    let perms = permutations(rank);
    let mut idx = vec![0; rank];
    let mut permuted = vec![0; rank];
    let norm: f64 = (1..=rank).map(|k| k as f64).product();
    (0..values.len())
        .map(|flat| {
            unflatten(flat, n, &mut idx);
            perms
                .iter()
                .map(|(sign, p)| {
                    for (slot, &src) in p.iter().enumerate() {
                        permuted[slot] = idx[src];
                    }
                    sign * values[flatten(&permuted, n)]
                })
                .sum::<f64>()
                / norm
        })
        .collect()
}

fn permutations(k: usize) -> Vec<(f64, Vec<usize>)> {
    if k == 0 {
        return vec![(1.0, vec![])];
    }
    let mut out = Vec::new();
    for (sign, p) in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            // Inserting at `pos` moves the new largest element past `len - pos` others.
            let s = if (p.len() - pos) % 2 == 0 { sign } else { -sign };
            out.push((s, q));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use crate::field::{ComponentField, MetricField};
    use approx::assert_abs_diff_eq;

    fn plane() -> Chart {
        Chart::new(
            "r2",
            vec!["x".into(), "y".into()],
            vec![(-2.0, 2.0), (-2.0, 2.0)],
            vec![vec![Expr::one(), Expr::zero()], vec![Expr::zero(), Expr::one()]],
        )
        .unwrap()
    }

    fn sphere() -> Chart {
        let th = Expr::var(0);
        Chart::new(
            "s2",
            vec!["theta".into(), "phi".into()],
            vec![(0.1, std::f64::consts::PI - 0.1), (-3.0, 3.0)],
            vec![vec![Expr::one(), Expr::zero()], vec![Expr::zero(), th.sin().powi(2)]],
        )
        .unwrap()
    }

    #[test]
    fn metric_has_zero_p() {
        let c = sphere();
        let p = conformal_p(&c, &MetricField(c.clone()), &[1.0, 0.2]).unwrap();
        assert!(max_abs(&p) < 1e-14);
    }

    #[test]
    fn p_of_x_times_metric() {
        let x = Expr::var(0);
        let k = ComponentField::covariant2(vec![vec![x.clone(), Expr::zero()], vec![Expr::zero(), x]]).unwrap();
        let v = conformal_p_along(&plane(), &k, &[1.0, 0.0], &[0.4, -0.3]).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-14);
        let res = cyclic_frame_residual(&plane(), &k, &PChoice::Conformal, &[0.4, -0.3]).unwrap();
        assert!(res.0 < 1e-14);
        let res = cyclic_frame_residual(&plane(), &k, &PChoice::Zero, &[0.4, -0.3]).unwrap();
        assert!(res.0 > 0.5);
    }

    #[test]
    fn killing_dual_and_gradient_are_conformal_killing_forms() {
        let c = sphere();
        let th = Expr::var(0);
        let rot = ComponentField::covector(vec![Expr::zero(), th.clone().sin().powi(2)]);
        let grad = ComponentField::covector(vec![-th.clone().sin(), Expr::zero()]);
        let bad = ComponentField::covector(vec![th, Expr::zero()]);
        for p in [[0.7, 0.1], [2.0, -1.0]] {
            assert!(conformal_form_residual(&c, &rot, &p).unwrap() < 1e-13);
            assert!(conformal_form_residual(&c, &grad, &p).unwrap() < 1e-13);
        }
        assert!(conformal_form_residual(&c, &bad, &[1.2, 0.0]).unwrap() > 0.01);
    }

    #[test]
    fn volume_pair_is_twice_metric() {
        let c = sphere();
        let vol = ComponentField::two_form(2, &[((0, 1), Expr::var(0).sin())]).unwrap().into_ref();
        let k = PairTensor::new(&c, vol.clone(), vol).unwrap();
        let pt = [0.9, 0.3];
        let kv = k.values(&pt).unwrap();
        let g = c.metric_values(&pt).unwrap();
        for (a, b) in kv.iter().zip(&g) {
            assert_abs_diff_eq!(*a, 2.0 * b, epsilon = 1e-14);
        }
        assert!(max_abs(&k.predicted_p(&pt).unwrap()) < 1e-14);
    }

    #[test]
    fn pair_degree_mismatch_rejected() {
        let c = plane();
        let a = ComponentField::covector(vec![Expr::one(), Expr::zero()]).into_ref();
        let w = ComponentField::two_form(2, &[((0, 1), Expr::one())]).unwrap().into_ref();
        assert!(matches!(PairTensor::new(&c, a, w), Err(GeomError::DegreeOutOfRange(_))));
    }

    #[test]
    fn nonsymmetric_tensor_rejected() {
        let k = ComponentField::covariant2(vec![vec![Expr::zero(), Expr::one()], vec![Expr::zero(), Expr::zero()]]).unwrap();
        assert!(matches!(
            conformal_p(&plane(), &k, &[0.0, 0.0]),
            Err(GeomError::NotSymmetric { .. })
        ));
    }

    #[test]
    fn sphere_classifies_as_einstein() {
        let cl = classify(&sphere(), 20, 1, 1e-8, Executor::Sequential).unwrap();
        let want: BTreeSet<_> = [Label::Einstein, Label::ParallelRicci, Label::A, Label::ACPerp].into();
        assert_eq!(cl.labels, want);
    }

    #[test]
    fn j_defect_of_dxdx_is_one() {
        let c = plane();
        let k = ComponentField::covariant2(vec![vec![Expr::one(), Expr::zero()], vec![Expr::zero(), Expr::zero()]]).unwrap();
        let j = ComponentField::endomorphism(vec![vec![Expr::zero(), -Expr::one()], vec![Expr::one(), Expr::zero()]]).unwrap();
        assert_abs_diff_eq!(j_invariance_defect(&c, &k, &j, &[0.0, 0.0]).unwrap(), 1.0);
        let g = MetricField(c.clone());
        assert_eq!(j_invariance_defect(&c, &g, &j, &[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn antisymmetrize_is_projection() {
        let v: Vec<f64> = (0..27).map(|i| (i as f64 * 0.37).sin()).collect();
        let a = antisymmetrize(&v, 3, 3);
        let aa = antisymmetrize(&a, 3, 3);
        for (x, y) in a.iter().zip(&aa) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-14);
        }
        assert!(crate::exterior::antisymmetry_defect(&a, 3, 3) < 1e-14);
    }
}
