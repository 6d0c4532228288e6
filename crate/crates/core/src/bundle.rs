//! Principal torus bundles over products of almost Hodge manifolds, in a
//! local trivialization.
//!
//! The total chart has coordinates `(x, t_1..t_r)` with connection forms
//! `θ_j = dt_j + A_j` and metric `g = Σ b_ij θ_i θ_j + h`. The fundamental
//! fields are `ξ^i = ∂_{t_i}` and `T_i X = ∇_X ξ^i`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::chart::{Chart, ProductChart};
use crate::error::{GeomError, Result};
use crate::exterior::{codifferential_from, ExteriorDerivative};
use crate::expr::Expr;
use crate::field::{
    contract, max_abs, ComponentField, EmbeddedField, FieldRef, MetricField, SumField, TensorField,
};
use crate::geometry::{gram_schmidt, inner, lie_derivative_metric, require_type, LocalGeometry};
use crate::jet::Jet;
use crate::killing::j_invariance_defect;
use crate::report::ResidualReport;
use crate::sampling::{sample_points, Executor};

/// Points used to validate factor and bundle invariants at construction.
pub const VALIDATION_SAMPLES: usize = 16;
const VALIDATION_SEED: u64 = 0x5eed;
/// Tolerance of the construction-time equation checks.
pub const CONSTRUCTION_TOLERANCE: f64 = 1e-9;

/// An almost Hermitian factor `(M_k, g_k, J_k)` with `ω_k = c_k α_k`.
#[derive(Clone)]
pub struct FactorSpec {
    pub name: String,
    pub chart: Chart,
    /// `(1,1)` tensor, `J^a_b` at `a*n + b`.
    pub complex_structure: FieldRef,
    pub kahler_scale: f64,
    /// `α_k`; the Kähler form divided by `c_k` when omitted.
    pub curvature_form: Option<FieldRef>,
}

impl FactorSpec {
    pub fn new(name: impl Into<String>, chart: Chart, complex_structure: FieldRef, kahler_scale: f64) -> Self {
        FactorSpec {
            name: name.into(),
            chart,
            complex_structure,
            kahler_scale,
            curvature_form: None,
        }
    }

    pub fn with_curvature_form(mut self, alpha: FieldRef) -> Self {
        self.curvature_form = Some(alpha);
        self
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    /// `ω(X,Y) = g(JX, Y)`.
    pub fn kahler_form(&self) -> FieldRef {
        Arc::new(KahlerForm {
            chart: self.chart.clone(),
            j: self.complex_structure.clone(),
        })
    }

    /// Residuals of the almost Hodge conditions at the given points.
    pub fn reports(&self, points: &[Vec<f64>], tolerance: f64, executor: Executor) -> Result<Vec<ResidualReport>> {
        let n = self.dim();
        if self.kahler_scale <= 0.0 || !self.kahler_scale.is_finite() {
            return Err(GeomError::InvalidSpec(format!(
                "factor `{}`: Kähler scale must be positive, got {}",
                self.name, self.kahler_scale
            )));
        }
        require_type(self.complex_structure.as_ref(), 1, 1, "complex structure")?;
        if self.complex_structure.dim() != n {
            return Err(GeomError::RankMismatch(format!(
                "factor `{}`: complex structure of dimension {} on a {n}-dimensional chart",
                self.name,
                self.complex_structure.dim()
            )));
        }
        if let Some(alpha) = &self.curvature_form {
            require_type(alpha.as_ref(), 0, 2, "curvature form")?;
        }
        let omega = self.kahler_form();
        let per_point = executor.try_map(points, |p| -> Result<[(f64, f64); 5]> {
            let j = self.complex_structure.values(p)?;
            let g = self.chart.metric_values(p)?;
            let mut jj = vec![0.0; n * n];
            let mut herm = 0.0_f64;
            for a in 0..n {
                for b in 0..n {
                    jj[a * n + b] = (0..n).map(|c| j[a * n + c] * j[c * n + b]).sum::<f64>()
                        + if a == b { 1.0 } else { 0.0 };
                    // g(Je_a, Je_b) − g(e_a, e_b)
                    let mut s = 0.0;
                    for c in 0..n {
                        for d in 0..n {
                            s += j[c * n + a] * j[d * n + b] * g[c * n + d];
                        }
                    }
                    herm = herm.max((s - g[a * n + b]).abs());
                }
            }
            let om = omega.values(p)?;
            let scale_defect = match &self.curvature_form {
                Some(alpha) => {
                    let al = alpha.values(p)?;
                    max_abs(&om.iter().zip(&al).map(|(o, a)| o - self.kahler_scale * a).collect::<Vec<_>>())
                }
                None => 0.0,
            };
            let geom = LocalGeometry::at(&self.chart, p, 1)?;
            let ojets = omega.jet(p, 1)?;
            let d = crate::exterior::exterior_derivative_jets(&ojets, n, 2);
            let dmax = d.iter().fold(0.0_f64, |m, j| m.max(j.value().abs()));
            let delta = codifferential_from(&geom, &ojets, 2)?;
            let s = max_abs(&om);
            Ok([
                (max_abs(&jj), 1.0),
                (herm, max_abs(&g)),
                (scale_defect, s),
                (dmax, s),
                (max_abs(&delta), s),
            ])
        })?;
        let names = ["j-squared", "hermitian", "kahler-scale", "kahler-closed", "kahler-coclosed"];
        Ok(names
            .iter()
            .enumerate()
            .map(|(i, name)| {
                ResidualReport::from_samples(
                    format!("{}/{name}", self.name),
                    tolerance,
                    per_point.iter().map(|s| s[i]),
                )
            })
            .collect())
    }
}

struct KahlerForm {
    chart: Chart,
    j: FieldRef,
}

impl TensorField for KahlerForm {
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
        let n = self.dim();
        let g = self.chart.metric_jet(point, order)?;
        let j = self.j.jet(point, order)?;
        let mut out = vec![Jet::zero(n, order); n * n];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    out[a * n + b].add_product(1.0, &j[c * n + a], &g[c * n + b]);
                }
            }
        }
        Ok(out)
    }
}

/// Everything the bundle metric needs.
#[derive(Clone)]
pub struct BundleSpec {
    pub name: String,
    pub factors: Vec<FactorSpec>,
    /// Fiber metric, `r × r`, symmetric positive definite.
    pub b: Vec<Vec<f64>>,
    /// `r × (number of factors)` integer matrix.
    pub a: Vec<Vec<i64>>,
    /// `potentials[j][μ]`: component `μ` of `A_j` over the product base.
    pub potentials: Vec<Vec<Expr>>,
}

impl BundleSpec {
    pub fn rank(&self) -> usize {
        self.b.len()
    }
}

/// The bundle metric on `(base) × (t-box)` with its structure data.
#[derive(Clone)]
pub struct TotalChart {
    spec: BundleSpec,
    base: ProductChart,
    chart: Chart,
    m: usize,
    r: usize,
    binv: Vec<f64>,
    /// `π Σ_j b_ij a_jk / c_k`, the multiple of `J_k` in `T̃_i`.
    t_coefficients: Vec<Vec<f64>>,
}

/// Range of each fiber coordinate in the trivialization.
pub const FIBER_BOX: (f64, f64) = (-1.0, 1.0);

fn symmetric_defect(b: &[Vec<f64>]) -> f64 {
    let mut d = 0.0_f64;
    for i in 0..b.len() {
        for j in 0..b.len() {
            d = d.max((b[i][j] - b[j][i]).abs());
        }
    }
    d
}

/// Validates `spec` and expands the bundle metric in coordinates.
pub fn build_total_chart(spec: &BundleSpec) -> Result<TotalChart> {
    let total = build_connection_chart(spec)?;
    let points = sample_points(total.base.chart.domain(), VALIDATION_SAMPLES, VALIDATION_SEED);
    for f in &spec.factors {
        let fp = sample_points(f.chart.domain(), VALIDATION_SAMPLES, VALIDATION_SEED);
        for rep in f.reports(&fp, CONSTRUCTION_TOLERANCE, Executor::Sequential)? {
            if !rep.passed {
                return Err(GeomError::EquationViolated {
                    equation: format!("almost Hodge condition `{}`", rep.name),
                    defect: rep.max_residual,
                    point: vec![],
                });
            }
        }
    }
    for p in &points {
        let (defect, _) = total.curvature_equation_defect(p)?;
        if defect > CONSTRUCTION_TOLERANCE {
            return Err(GeomError::EquationViolated {
                equation: "curvature equation dA_j = 2π Σ_k (a_jk / c_k) ω_k".into(),
                defect,
                point: p.clone(),
            });
        }
    }
    Ok(total)
}

/// The bundle metric for arbitrary connection potentials.
///
/// Only the shape of `spec` and positivity of `b` are checked; closed forms
/// that depend on the curvature equation do not apply to the result.
pub fn build_connection_chart(spec: &BundleSpec) -> Result<TotalChart> {
    let r = spec.rank();
    if r == 0 {
        return Err(GeomError::InvalidSpec("torus rank must be at least 1".into()));
    }
    if spec.b.iter().any(|row| row.len() != r) {
        return Err(GeomError::InvalidSpec(format!("b must be a square {r}×{r} matrix")));
    }
    let sym = symmetric_defect(&spec.b);
    if sym > 1e-12 {
        return Err(GeomError::InvalidSpec(format!(
            "b must be symmetric (b_ij = b_ji), defect {sym:e}"
        )));
    }
    let bm = DMatrix::from_fn(r, r, |i, j| spec.b[i][j]);
    let min_eig = bm.clone().symmetric_eigenvalues().min();
    let chol = bm.cholesky().filter(|_| min_eig > 0.0).ok_or_else(|| {
        GeomError::InvalidSpec(format!(
            "b must be positive definite for the bundle metric to be Riemannian; smallest eigenvalue {min_eig}"
        ))
    })?;
    let binv_m = chol.inverse();
    let binv: Vec<f64> = (0..r * r).map(|k| binv_m[(k / r, k % r)]).collect();

    let nf = spec.factors.len();
    if nf == 0 {
        return Err(GeomError::InvalidSpec("at least one base factor is required".into()));
    }
    if spec.a.len() != r || spec.a.iter().any(|row| row.len() != nf) {
        return Err(GeomError::InvalidSpec(format!(
            "a must be an integer {r}×{nf} matrix (torus rank × number of factors)"
        )));
    }
    let charts: Vec<Chart> = spec.factors.iter().map(|f| f.chart.clone()).collect();
    let base = ProductChart::new(format!("{}-base", spec.name), &charts)?;
    let m = base.chart.dim();
    if spec.potentials.len() != r || spec.potentials.iter().any(|p| p.len() != m) {
        return Err(GeomError::InvalidSpec(format!(
            "expected {r} connection potentials with {m} components each"
        )));
    }
    if let Some(v) = spec.potentials.iter().flatten().filter_map(Expr::max_var).max() {
        if v >= m {
            return Err(GeomError::InvalidSpec(format!(
                "connection potential references coordinate {v}, but the base has {m}"
            )));
        }
    }

    assemble(spec, base, binv)
}

fn assemble(spec: &BundleSpec, base: ProductChart, binv: Vec<f64>) -> Result<TotalChart> {
    let r = spec.rank();
    let nf = spec.factors.len();
    let m = base.chart.dim();
    let t_coefficients: Vec<Vec<f64>> = (0..r)
        .map(|i| {
            (0..nf)
                .map(|k| {
                    PI * (0..r)
                        .map(|j| spec.b[i][j] * spec.a[j][k] as f64)
                        .sum::<f64>()
                        / spec.factors[k].kahler_scale
                })
                .collect()
        })
        .collect();

    Ok(TotalChart {
        spec: spec.clone(),
        m,
        r,
        binv,
        t_coefficients,
        chart: total_metric_chart(spec, &base)?,
        base,
    })
}

fn total_metric_chart(spec: &BundleSpec, base: &ProductChart) -> Result<Chart> {
    let m = base.chart.dim();
    let r = spec.rank();
    let n = m + r;
    let h = base.chart.metric_exprs().expect("product charts are symbolic");
    let pot = &spec.potentials;
    let mut g = vec![vec![Expr::zero(); n]; n];
    for mu in 0..m {
        for nu in 0..m {
            let mut e = h[mu * m + nu].clone();
            for i in 0..r {
                for j in 0..r {
                    if spec.b[i][j] != 0.0 {
                        e = e + Expr::c(spec.b[i][j]) * pot[i][mu].clone() * pot[j][nu].clone();
                    }
                }
            }
            g[mu][nu] = e;
        }
        for i in 0..r {
            let mut e = Expr::zero();
            for j in 0..r {
                e = e + Expr::c(spec.b[i][j]) * pot[j][mu].clone();
            }
            g[mu][m + i] = e.clone();
            g[m + i][mu] = e;
        }
    }
    for i in 0..r {
        for j in 0..r {
            g[m + i][m + j] = Expr::c(spec.b[i][j]);
        }
    }
    let mut coords: Vec<String> = base.chart.coords().to_vec();
    coords.extend((1..=r).map(|i| format!("t{i}")));
    let mut domain = base.chart.domain().to_vec();
    domain.extend(std::iter::repeat(FIBER_BOX).take(r));
    Chart::new(spec.name.clone(), coords, domain, g)
}

impl TotalChart {
    /// The same bundle with derivatives taken on the given tier.
    pub fn with_tier(&self, tier: crate::chart::Tier) -> TotalChart {
        let mut out = self.clone();
        out.chart = self.chart.with_tier(tier);
        out.base.chart = self.base.chart.with_tier(tier);
        out
    }

    pub fn spec(&self) -> &BundleSpec {
        &self.spec
    }
    pub fn chart(&self) -> &Chart {
        &self.chart
    }
    pub fn base(&self) -> &ProductChart {
        &self.base
    }
    /// Base dimension.
    pub fn base_dim(&self) -> usize {
        self.m
    }
    pub fn rank(&self) -> usize {
        self.r
    }
    pub fn dim(&self) -> usize {
        self.m + self.r
    }
    /// `b^{ij}`, row-major.
    pub fn b_inverse(&self) -> &[f64] {
        &self.binv
    }

    /// Base coordinates of a total-space point.
    pub fn project<'a>(&self, point: &'a [f64]) -> &'a [f64] {
        &point[..self.m]
    }

    /// Seeded points in the total chart.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        sample_points(self.chart.domain(), count, seed)
    }

    /// `ξ^i` in total coordinates.
    pub fn xi(&self, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.dim()];
        v[self.m + i] = 1.0;
        v
    }

    pub fn fundamental_fields(&self) -> Vec<FieldRef> {
        (0..self.r)
            .map(|i| ComponentField::constant_vector(&self.xi(i)).into_ref())
            .collect()
    }

    /// `θ_i = dt_i + A_i` as covectors at a total-space point.
    pub fn connection_forms(&self, point: &[f64]) -> Vec<Vec<f64>> {
        let x = self.project(point);
        (0..self.r)
            .map(|i| {
                let mut th: Vec<f64> = self.spec.potentials[i].iter().map(|e| e.eval(x)).collect();
                th.extend((0..self.r).map(|j| if i == j { 1.0 } else { 0.0 }));
                th
            })
            .collect()
    }

    /// `dA_j` as a base 2-form field.
    pub fn curvature_field(&self, j: usize) -> FieldRef {
        let a = ComponentField::covector(self.spec.potentials[j].clone()).into_ref();
        Arc::new(ExteriorDerivative(a))
    }

    /// Largest `|dA_j − 2π Σ_k (a_jk/c_k) ω_k|` at a base point, with scale.
    pub fn curvature_equation_defect(&self, x: &[f64]) -> Result<(f64, f64)> {
        let m = self.m;
        let mut worst = 0.0_f64;
        let mut scale = 0.0_f64;
        for j in 0..self.r {
            let da = self.curvature_field(j).values(x)?;
            let mut rhs = vec![0.0; m * m];
            for (k, f) in self.spec.factors.iter().enumerate() {
                let coef = 2.0 * PI * self.spec.a[j][k] as f64 / f.kahler_scale;
                if coef == 0.0 {
                    continue;
                }
                let off = self.base.offsets[k];
                let d = f.dim();
                let om = f.kahler_form().values(&x[self.base.block(k)])?;
                for a in 0..d {
                    for b in 0..d {
                        rhs[(off + a) * m + off + b] += coef * om[a * d + b];
                    }
                }
            }
            for (l, r) in da.iter().zip(&rhs) {
                worst = worst.max((l - r).abs());
                scale = scale.max(l.abs()).max(r.abs());
            }
        }
        Ok((worst, scale))
    }

    /// Vertical part `Σ b^{ij} g(ξ^i, w) ξ^j`.
    pub fn vertical(&self, g: &[f64], w: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let m = self.m;
        let r = self.r;
        let gxi: Vec<f64> = (0..r)
            .map(|i| (0..n).map(|c| g[(m + i) * n + c] * w[c]).sum())
            .collect();
        let mut out = vec![0.0; n];
        for j in 0..r {
            out[m + j] = (0..r).map(|i| self.binv[i * r + j] * gxi[i]).sum();
        }
        out
    }

    pub fn horizontal(&self, g: &[f64], w: &[f64]) -> Vec<f64> {
        let v = self.vertical(g, w);
        w.iter().zip(&v).map(|(a, b)| a - b).collect()
    }

    /// Orthonormal horizontal frame (from `H ∂_μ`) and vertical frame (from `ξ^i`).
    pub fn split_frame(&self, g: &[f64]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let n = self.dim();
        let h = gram_schmidt(
            g,
            n,
            (0..self.m).map(|mu| {
                let mut e = vec![0.0; n];
                e[mu] = 1.0;
                self.horizontal(g, &e)
            }),
        );
        let v = gram_schmidt(g, n, (0..self.r).map(|i| self.xi(i)));
        (h, v)
    }

    /// The full frame, horizontal vectors first.
    pub fn frame(&self, g: &[f64]) -> Vec<Vec<f64>> {
        let (mut h, v) = self.split_frame(g);
        h.extend(v);
        h
    }

    /// `(T_i)^c_a = Γ^c_{a t_i}` at a point.
    pub fn t_tensor_values(&self, geom: &LocalGeometry, i: usize) -> Vec<f64> {
        let n = self.dim();
        let mut out = vec![0.0; n * n];
        for c in 0..n {
            for a in 0..n {
                out[c * n + a] = geom.gamma(c, a, self.m + i).value();
            }
        }
        out
    }

    /// `T_i` as a `(1,1)` field.
    pub fn t_tensor(&self, i: usize) -> FieldRef {
        Arc::new(TTensor {
            chart: self.chart.clone(),
            slot: self.m + i,
        })
    }

    /// `T̃_i` on the base: `π Σ_j b_ij Σ_k (a_jk/c_k) J_k`, as `m × m` values.
    pub fn t_tilde_predicted(&self, i: usize, x: &[f64]) -> Result<Vec<f64>> {
        let m = self.m;
        let mut out = vec![0.0; m * m];
        for (k, f) in self.spec.factors.iter().enumerate() {
            let coef = self.t_coefficients[i][k];
            if coef == 0.0 {
                continue;
            }
            let off = self.base.offsets[k];
            let d = f.dim();
            let j = f.complex_structure.values(&x[self.base.block(k)])?;
            for a in 0..d {
                for b in 0..d {
                    out[(off + a) * m + off + b] = coef * j[a * d + b];
                }
            }
        }
        Ok(out)
    }

    /// `C_sl = Σ_k (a_sk a_lk / c_k²) Σ_i g_k(J_k E_i, J_k E_i)` over a
    /// horizontal orthonormal frame.
    pub fn vertical_constants(&self, point: &[f64], horizontal: &[Vec<f64>]) -> Result<Vec<f64>> {
        let r = self.r;
        let x = self.project(point);
        let mut per_factor = Vec::with_capacity(self.spec.factors.len());
        for (k, f) in self.spec.factors.iter().enumerate() {
            let xb = &x[self.base.block(k)];
            let j = f.complex_structure.values(xb)?;
            let g = f.chart.metric_values(xb)?;
            let d = f.dim();
            let off = self.base.offsets[k];
            let mut s = 0.0;
            for e in horizontal {
                let ek = &e[off..off + d];
                let je: Vec<f64> = (0..d).map(|a| (0..d).map(|b| j[a * d + b] * ek[b]).sum()).collect();
                s += inner(&g, d, &je, &je);
            }
            per_factor.push(s / (f.kahler_scale * f.kahler_scale));
        }
        let mut c = vec![0.0; r * r];
        for s in 0..r {
            for l in 0..r {
                c[s * r + l] = per_factor
                    .iter()
                    .enumerate()
                    .map(|(k, v)| (self.spec.a[s][k] * self.spec.a[l][k]) as f64 * v)
                    .sum();
            }
        }
        Ok(c)
    }

    /// `Σ_{jl} b_jl Σ_k (a_jk a_lk / c_k²) g_k` on the base, `m × m` values.
    fn horizontal_correction_form(&self, x: &[f64]) -> Result<Vec<f64>> {
        let m = self.m;
        let r = self.r;
        let mut out = vec![0.0; m * m];
        for (k, f) in self.spec.factors.iter().enumerate() {
            let mut w = 0.0;
            for j in 0..r {
                for l in 0..r {
                    w += self.spec.b[j][l] * (self.spec.a[j][k] * self.spec.a[l][k]) as f64;
                }
            }
            w /= f.kahler_scale * f.kahler_scale;
            if w == 0.0 {
                continue;
            }
            let d = f.dim();
            let off = self.base.offsets[k];
            let g = f.chart.metric_values(&x[self.base.block(k)])?;
            for a in 0..d {
                for b in 0..d {
                    out[(off + a) * m + off + b] = w * g[a * d + b];
                }
            }
        }
        Ok(out)
    }
}

struct TTensor {
    chart: Chart,
    slot: usize,
}

impl TensorField for TTensor {
    fn dim(&self) -> usize {
        self.chart.dim()
    }
    fn contravariant_rank(&self) -> usize {
        1
    }
    fn covariant_rank(&self) -> usize {
        1
    }
    fn jet(&self, point: &[f64], order: usize) -> Result<Vec<Jet>> {
        let n = self.dim();
        let geom = LocalGeometry::at(&self.chart, point, order + 1)?;
        let mut out = Vec::with_capacity(n * n);
        for c in 0..n {
            for a in 0..n {
                out.push(geom.gamma(c, a, self.slot).truncate(order));
            }
        }
        Ok(out)
    }
}

fn apply(mat: &[f64], n: usize, v: &[f64]) -> Vec<f64> {
    (0..n).map(|a| (0..n).map(|b| mat[a * n + b] * v[b]).sum()).collect()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Metric jets, geometry and frames shared by the structure checks at one point.
pub struct BundlePoint<'a> {
    pub total: &'a TotalChart,
    pub geom: LocalGeometry,
    pub g: Vec<f64>,
    g_jets: Vec<Jet>,
    pub horizontal: Vec<Vec<f64>>,
    pub vertical: Vec<Vec<f64>>,
    /// `T_i` values, `(T_i)^c_a` at `c*n + a`.
    pub t: Vec<Vec<f64>>,
}

impl<'a> BundlePoint<'a> {
    pub fn new(total: &'a TotalChart, point: &[f64], metric_order: usize) -> Result<BundlePoint<'a>> {
        let geom = LocalGeometry::at(&total.chart, point, metric_order.max(1))?;
        let g = geom.metric_values();
        let g_jets = geom.metric().iter().map(|j| j.truncate(1)).collect();
        let (horizontal, vertical) = total.split_frame(&g);
        let t = (0..total.r).map(|i| total.t_tensor_values(&geom, i)).collect();
        Ok(BundlePoint {
            total,
            geom,
            g,
            g_jets,
            horizontal,
            vertical,
            t,
        })
    }

    fn n(&self) -> usize {
        self.total.dim()
    }

    pub fn frame(&self) -> Vec<Vec<f64>> {
        self.horizontal.iter().chain(&self.vertical).cloned().collect()
    }

    /// Closed-form `A_E F = Σ b^{ij} (g(E, T_i F) ξ^j + g(ξ^i, F) T_j E)`.
    pub fn a_closed(&self, e: &[f64], f: &[f64]) -> Vec<f64> {
        let n = self.n();
        let r = self.total.r;
        let binv = &self.total.binv;
        let mut out = vec![0.0; n];
        for i in 0..r {
            let tif = apply(&self.t[i], n, f);
            let e_tif = inner(&self.g, n, e, &tif);
            let xi_f = inner(&self.g, n, &self.total.xi(i), f);
            for j in 0..r {
                let w = binv[i * r + j];
                out[self.total.m + j] += w * e_tif;
                let tje = apply(&self.t[j], n, e);
                for c in 0..n {
                    out[c] += w * xi_f * tje[c];
                }
            }
        }
        out
    }

    /// Jets of the horizontal and vertical parts of the constant field `F`.
    fn split_jets(&self, f: &[f64]) -> (Vec<Jet>, Vec<Jet>) {
        let n = self.n();
        let m = self.total.m;
        let r = self.total.r;
        let binv = &self.total.binv;
        let gxi: Vec<Jet> = (0..r)
            .map(|i| {
                let mut s = Jet::zero(n, 1);
                for c in 0..n {
                    s = s.add_scaled(f[c], &self.g_jets[(m + i) * n + c]);
                }
                s
            })
            .collect();
        let mut v = vec![Jet::zero(n, 1); n];
        for j in 0..r {
            for i in 0..r {
                v[m + j] = v[m + j].add_scaled(binv[i * r + j], &gxi[i]);
            }
        }
        let h = (0..n).map(|c| Jet::constant(n, 1, f[c]) - &v[c]).collect();
        (h, v)
    }

    /// `∇_W Y` for a vector `W` and order-1 jets of `Y`.
    fn nabla(&self, w: &[f64], y: &[Jet]) -> Vec<f64> {
        let n = self.n();
        (0..n)
            .map(|c| {
                (0..n)
                    .map(|a| {
                        let mut s = y[c].d1(a);
                        for e in 0..n {
                            s += self.geom.gamma(c, a, e).value() * y[e].value();
                        }
                        w[a] * s
                    })
                    .sum()
            })
            .collect()
    }

    /// `A_E F = V∇_{HE}(HF) + H∇_{HE}(VF)`.
    pub fn a_geometric(&self, e: &[f64], f: &[f64]) -> Vec<f64> {
        let he = self.total.horizontal(&self.g, e);
        let (hf, vf) = self.split_jets(f);
        let p = self.total.vertical(&self.g, &self.nabla(&he, &hf));
        let q = self.total.horizontal(&self.g, &self.nabla(&he, &vf));
        p.iter().zip(&q).map(|(a, b)| a + b).collect()
    }

    /// `T_E F = H∇_{VE}(VF) + V∇_{VE}(HF)`, the second fundamental form of the fibers.
    pub fn oneill_t(&self, e: &[f64], f: &[f64]) -> Vec<f64> {
        let ve = self.total.vertical(&self.g, e);
        let (hf, vf) = self.split_jets(f);
        let p = self.total.horizontal(&self.g, &self.nabla(&ve, &vf));
        let q = self.total.vertical(&self.g, &self.nabla(&ve, &hf));
        p.iter().zip(&q).map(|(a, b)| a + b).collect()
    }

    fn norm(&self, v: &[f64]) -> f64 {
        inner(&self.g, self.n(), v, v).max(0.0).sqrt()
    }
}

/// Ricci blocks in the split frame, directly and from closed forms.
///
/// Matrices are row-major over frame indices: vertical `r × r`, mixed
/// `m × r` (horizontal row, vertical column), horizontal `m × m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RicciDecomposition {
    pub vertical_direct: Vec<f64>,
    /// `π² Σ g(ξ^s,U) g(ξ^l,V) C_sl`.
    pub vertical_closed: Vec<f64>,
    pub mixed_direct: Vec<f64>,
    /// `Σ_t δdθ_t(X) g(ξ^t, U)`; the mixed block is `½` times this.
    pub mixed_codifferential: Vec<f64>,
    pub horizontal_direct: Vec<f64>,
    /// `Ric_M − 2π² Σ_{jl} b_jl Σ_k (a_jk a_lk / c_k²) g_k`.
    pub horizontal_closed: Vec<f64>,
    /// `Ric_M − 2 Σ b^{st} g(T_s X, T_t Y)`.
    pub horizontal_t_form: Vec<f64>,
    /// `Ric_M` lifted to the horizontal frame.
    pub base_ricci: Vec<f64>,
    /// `π² Σ_{jl} b_jl Σ_k (a_jk a_lk / c_k²) g_k` lifted to the horizontal frame.
    pub correction: Vec<f64>,
    pub c_sl: Vec<f64>,
}

/// Mixed-block coefficient relative to `Σ_t δdθ_t(X) g(ξ^t,U)`.
pub const MIXED_COEFFICIENT: f64 = 0.5;
/// Horizontal-block coefficient of `π² Σ b_jl (a a / c²) g_k`.
pub const HORIZONTAL_COEFFICIENT: f64 = 2.0;

impl RicciDecomposition {
    pub fn at(total: &TotalChart, point: &[f64]) -> Result<RicciDecomposition> {
        let bp = BundlePoint::new(total, point, 2)?;
        let n = total.dim();
        let m = total.m;
        let r = total.r;
        let ric: Vec<f64> = bp.geom.ricci()?.iter().map(Jet::value).collect();
        let hf = &bp.horizontal;
        let vf = &bp.vertical;
        let block = |xs: &[Vec<f64>], ys: &[Vec<f64>], t: &[f64]| -> Vec<f64> {
            let mut out = Vec::with_capacity(xs.len() * ys.len());
            for x in xs {
                for y in ys {
                    out.push(contract(t, n, &[x, y]));
                }
            }
            out
        };
        let x = total.project(point);
        let base_n = m;
        // Base tensors pulled back to total coordinates (zero on t-slots).
        let pull = |t: &[f64]| -> Vec<f64> {
            let mut out = vec![0.0; n * n];
            for a in 0..base_n {
                for b in 0..base_n {
                    out[a * n + b] = t[a * base_n + b];
                }
            }
            out
        };
        let ric_m = pull(&crate::geometry::ricci(&total.base.chart, x)?);
        let corr = pull(&total.horizontal_correction_form(x)?);

        let c_sl = total.vertical_constants(point, hf)?;
        let mut vertical_closed = Vec::with_capacity(r * r);
        for u in vf {
            for v in vf {
                let mut s = 0.0;
                for a in 0..r {
                    for l in 0..r {
                        s += inner(&bp.g, n, &total.xi(a), u) * inner(&bp.g, n, &total.xi(l), v) * c_sl[a * r + l];
                    }
                }
                vertical_closed.push(PI * PI * s);
            }
        }

        let mut deltas = Vec::with_capacity(r);
        let bgeom = LocalGeometry::at(&total.base.chart, x, 1)?;
        for t in 0..r {
            let f = total.curvature_field(t).jet(x, 1)?;
            let mut d = codifferential_from(&bgeom, &f, 2)?;
            d.extend(std::iter::repeat(0.0).take(r));
            deltas.push(d);
        }
        let mut mixed_codifferential = Vec::with_capacity(m * r);
        for xh in hf {
            for u in vf {
                mixed_codifferential.push(
                    (0..r)
                        .map(|t| {
                            deltas[t].iter().zip(xh).map(|(a, b)| a * b).sum::<f64>()
                                * inner(&bp.g, n, &total.xi(t), u)
                        })
                        .sum(),
                );
            }
        }

        let base_ricci = block(hf, hf, &ric_m);
        let correction: Vec<f64> = block(hf, hf, &corr).iter().map(|v| PI * PI * v).collect();
        let horizontal_closed = base_ricci
            .iter()
            .zip(&correction)
            .map(|(a, b)| a - HORIZONTAL_COEFFICIENT * b)
            .collect();
        let mut horizontal_t_form = Vec::with_capacity(m * m);
        for (ix, xh) in hf.iter().enumerate() {
            for (iy, yh) in hf.iter().enumerate() {
                let mut s = 0.0;
                for a in 0..r {
                    let tx = apply(&bp.t[a], n, xh);
                    for b in 0..r {
                        let ty = apply(&bp.t[b], n, yh);
                        s += total.binv[a * r + b] * inner(&bp.g, n, &tx, &ty);
                    }
                }
                horizontal_t_form.push(base_ricci[ix * m + iy] - 2.0 * s);
            }
        }

        Ok(RicciDecomposition {
            vertical_direct: block(vf, vf, &ric),
            vertical_closed,
            mixed_direct: block(hf, vf, &ric),
            mixed_codifferential,
            horizontal_direct: block(hf, hf, &ric),
            horizontal_closed,
            horizontal_t_form,
            base_ricci,
            correction,
            c_sl,
        })
    }

    pub fn vertical_defect(&self) -> f64 {
        max_abs(&sub(&self.vertical_direct, &self.vertical_closed))
    }

    /// Against the co-closed prediction `Ric(X,U) = 0`.
    pub fn mixed_defect(&self) -> f64 {
        max_abs(&self.mixed_direct)
    }

    /// Against `Ric(X,U) = ½ Σ_t δdθ_t(X) g(ξ^t,U)`, valid without co-closedness.
    pub fn mixed_general_defect(&self) -> f64 {
        max_abs(
            &self
                .mixed_direct
                .iter()
                .zip(&self.mixed_codifferential)
                .map(|(d, c)| d - MIXED_COEFFICIENT * c)
                .collect::<Vec<_>>(),
        )
    }

    pub fn horizontal_defect(&self) -> f64 {
        max_abs(&sub(&self.horizontal_direct, &self.horizontal_closed))
    }

    pub fn horizontal_t_form_defect(&self) -> f64 {
        max_abs(&sub(&self.horizontal_direct, &self.horizontal_t_form))
    }

    /// Least-squares `κ` in `Ric_H = Ric_M − κ · correction`, with the
    /// number of components used; `None` when the correction vanishes.
    pub fn fitted_horizontal_coefficient(&self) -> Option<f64> {
        fit_coefficient(
            &sub(&self.base_ricci, &self.horizontal_direct),
            &self.correction,
        )
    }

    /// Least-squares `κ` in `Ric(X,U) = κ Σ_t δdθ_t(X) g(ξ^t,U)`.
    pub fn fitted_mixed_coefficient(&self) -> Option<f64> {
        fit_coefficient(&self.mixed_direct, &self.mixed_codifferential)
    }
}

fn fit_coefficient(y: &[f64], x: &[f64]) -> Option<f64> {
    let xx: f64 = x.iter().map(|v| v * v).sum();
    if xx < 1e-24 {
        return None;
    }
    Some(x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / xx)
}

/// Horizontal lift `K*` of per-factor symmetric tensors with the factors'
/// J-invariance defects.
#[derive(Clone)]
pub struct LiftedTensor {
    pub tensor: FieldRef,
    /// Largest `|K_k(J_kX,Y) + K_k(X,J_kY)|` per factor over the sample points.
    pub j_defects: Vec<f64>,
}

impl LiftedTensor {
    pub fn j_invariant(&self, tolerance: f64) -> bool {
        self.j_defects.iter().all(|d| *d <= tolerance)
    }
}

/// Builds `K* = π^* (K_1 ⊕ … ⊕ K_n)`, which vanishes on vertical slots.
///
/// `points` are total-space points; the J-defects are evaluated at their
/// projections.
pub fn lift_killing(total: &TotalChart, tensors: &[FieldRef], points: &[Vec<f64>]) -> Result<LiftedTensor> {
    let factors = &total.spec.factors;
    if tensors.len() != factors.len() {
        return Err(GeomError::RankMismatch(format!(
            "{} tensors for {} base factors",
            tensors.len(),
            factors.len()
        )));
    }
    let n = total.dim();
    let mut terms: Vec<FieldRef> = Vec::with_capacity(tensors.len());
    let mut j_defects = Vec::with_capacity(tensors.len());
    for (k, (t, f)) in tensors.iter().zip(factors).enumerate() {
        require_type(t.as_ref(), 0, 2, "factor tensor")?;
        if t.dim() != f.dim() {
            return Err(GeomError::RankMismatch(format!(
                "tensor {k} has dimension {}, factor `{}` has {}",
                t.dim(),
                f.name,
                f.dim()
            )));
        }
        let mut worst = 0.0_f64;
        for p in points {
            let xb = &p[total.base.block(k)];
            crate::geometry::check_symmetric(&t.values(xb)?, f.dim())?;
            worst = worst.max(j_invariance_defect(&f.chart, t.as_ref(), f.complex_structure.as_ref(), xb)?);
        }
        j_defects.push(worst);
        terms.push(Arc::new(EmbeddedField::new(t.clone(), n, total.base.offsets[k])?));
    }
    Ok(LiftedTensor {
        tensor: Arc::new(SumField::new(terms)?),
        j_defects,
    })
}

/// The 1-form forced by the cyclic identity on all-vertical and
/// (horizontal, vertical, vertical) slot patterns.
///
/// Returns (largest forced `|P|`, largest mixed-pattern `|T|` magnitude);
/// the second is zero on a flat connection, where the mixed pattern says
/// nothing.
pub fn forced_p(total: &TotalChart, k: &dyn TensorField, point: &[f64]) -> Result<(f64, f64)> {
    let geom = LocalGeometry::at(&total.chart, point, 1)?;
    let g = geom.metric_values();
    let n = total.dim();
    let nabla: Vec<f64> = geom
        .covariant_derivative(&k.jet(point, 1)?, 0, 2)?
        .iter()
        .map(Jet::value)
        .collect();
    let cyc = |x: &[f64], y: &[f64], z: &[f64]| {
        contract(&nabla, n, &[x, y, z]) + contract(&nabla, n, &[y, z, x]) + contract(&nabla, n, &[z, x, y])
    };
    let (hf, vf) = total.split_frame(&g);
    let mut worst = 0.0_f64;
    // 3 P(U) g(U,U) = 𝒞 ∇_U K(U,U) with g(U,U) = 1.
    for u in &vf {
        worst = worst.max((cyc(u, u, u) / 3.0).abs());
    }
    // P(X) g(U,U) = 𝒞 ∇_X K(U,U) once P vanishes on vertical vectors.
    for x in &hf {
        for u in &vf {
            worst = worst.max(cyc(x, u, u).abs());
        }
    }
    let t_scale = (0..total.r)
        .map(|i| max_abs(&total.t_tensor_values(&geom, i)))
        .fold(0.0_f64, f64::max);
    Ok((worst, t_scale))
}

/// Forced-P report; vacuous when the connection is flat at every sample.
pub fn no_conformal_lift_check(
    total: &TotalChart,
    k: &dyn TensorField,
    points: &[Vec<f64>],
    tolerance: f64,
    executor: Executor,
) -> Result<ResidualReport> {
    let samples = executor.try_map(points, |p| forced_p(total, k, p))?;
    let vacuous = samples.iter().all(|(_, t)| *t <= tolerance);
    Ok(ResidualReport::from_samples("forced-conformal-p", tolerance, samples).vacuous(vacuous))
}

/// Per-point structure residuals in a fixed order; see [`STRUCTURE_CHECKS`].
fn structure_sample(total: &TotalChart, point: &[f64]) -> Result<Vec<(f64, f64)>> {
    let n = total.dim();
    let m = total.m;
    let r = total.r;
    let bp = BundlePoint::new(total, point, 2)?;
    let frame = bp.frame();
    let g = &bp.g;

    let mut lie = 0.0_f64;
    for xi in total.fundamental_fields() {
        lie = lie.max(max_abs(&lie_derivative_metric(&total.chart, xi.as_ref(), point)?));
    }
    let thetas = total.connection_forms(point);
    let mut theta = 0.0_f64;
    for (i, th) in thetas.iter().enumerate() {
        for j in 0..r {
            let v: f64 = th.iter().zip(&total.xi(j)).map(|(a, b)| a * b).sum();
            theta = theta.max((v - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    let mut fiber = 0.0_f64;
    for i in 0..r {
        for j in 0..r {
            fiber = fiber.max((inner(g, n, &total.xi(i), &total.xi(j)) - total.spec.b[i][j]).abs());
        }
    }
    let mut t_xi = 0.0_f64;
    let mut t_anti = 0.0_f64;
    let mut t_vert = 0.0_f64;
    let mut t_scale = 0.0_f64;
    for t in &bp.t {
        for j in 0..r {
            t_xi = t_xi.max(bp.norm(&apply(t, n, &total.xi(j))));
        }
        for e in &frame {
            let te = apply(t, n, e);
            t_scale = t_scale.max(bp.norm(&te));
            t_vert = t_vert.max(bp.norm(&total.vertical(g, &te)));
            for f in &frame {
                let tf = apply(t, n, f);
                t_anti = t_anti.max((inner(g, n, &te, f) + inner(g, n, e, &tf)).abs());
            }
        }
    }
    // L_ξ T_j: t-derivatives of the T components.
    let mut t_flow = 0.0_f64;
    for i in 0..r {
        for jet in total.t_tensor(i).jet(point, 1)? {
            for s in 0..r {
                t_flow = t_flow.max(jet.d1(m + s).abs());
            }
        }
    }
    // dθ_j(E,F) = 2 Σ_i b^{ji} g(T_i E, F)
    let x = total.project(point);
    let mut extheta = 0.0_f64;
    let mut extheta_scale = 0.0_f64;
    for j in 0..r {
        let da = total.curvature_field(j).values(x)?;
        let mut dth = vec![0.0; n * n];
        for a in 0..m {
            for b in 0..m {
                dth[a * n + b] = da[a * m + b];
            }
        }
        for e in &frame {
            for f in &frame {
                let lhs = contract(&dth, n, &[e, f]);
                let rhs: f64 = (0..r)
                    .map(|i| 2.0 * total.binv[j * r + i] * inner(g, n, &apply(&bp.t[i], n, e), f))
                    .sum();
                extheta = extheta.max((lhs - rhs).abs());
                extheta_scale = extheta_scale.max(lhs.abs());
            }
        }
    }
    // T_i on horizontal lifts pushes forward to T̃_i.
    let mut tilde = 0.0_f64;
    for i in 0..r {
        let pred = total.t_tilde_predicted(i, x)?;
        for mu in 0..m {
            let mut e = vec![0.0; n];
            e[mu] = 1.0;
            let lift = total.horizontal(g, &e);
            let te = apply(&bp.t[i], n, &lift);
            for nu in 0..m {
                tilde = tilde.max((te[nu] - pred[nu * m + mu]).abs());
            }
        }
    }
    let mut a_diff = 0.0_f64;
    let mut a_scale = 0.0_f64;
    let mut oneill_t = 0.0_f64;
    let mut a_anti = 0.0_f64;
    for e in &frame {
        for f in &frame {
            let closed = bp.a_closed(e, f);
            let geo = bp.a_geometric(e, f);
            a_diff = a_diff.max(bp.norm(&sub(&closed, &geo)));
            a_scale = a_scale.max(bp.norm(&closed));
            oneill_t = oneill_t.max(bp.norm(&bp.oneill_t(e, f)));
        }
    }
    for xh in &bp.horizontal {
        for e in &frame {
            let ae = bp.a_closed(xh, e);
            for f in &frame {
                let af = bp.a_closed(xh, f);
                a_anti = a_anti.max((inner(g, n, &ae, f) + inner(g, n, &af, e)).abs());
            }
        }
    }
    Ok(vec![
        (lie, 1.0),
        (theta, 1.0),
        (fiber, max_abs(&total.spec.b.concat())),
        (t_xi, t_scale),
        (t_anti, t_scale),
        (t_vert, t_scale),
        (t_flow, t_scale),
        (extheta, extheta_scale),
        (tilde, t_scale),
        (oneill_t, a_scale),
        (a_diff, a_scale),
        (a_anti, a_scale),
    ])
}

/// Names of the structure residuals, in report order.
pub const STRUCTURE_CHECKS: [&str; 12] = [
    "fundamental-field-killing",
    "connection-form-duality",
    "fiber-metric",
    "t-annihilates-fiber",
    "t-antisymmetric",
    "t-horizontal",
    "t-invariant-along-fiber",
    "connection-curvature-identity",
    "t-projects-to-complex-structure",
    "oneill-t-vanishes",
    "oneill-a-closed-form",
    "oneill-a-antisymmetric",
];

pub fn structure_reports(
    total: &TotalChart,
    points: &[Vec<f64>],
    tolerance: f64,
    executor: Executor,
) -> Result<Vec<ResidualReport>> {
    let samples = executor.try_map(points, |p| structure_sample(total, p))?;
    Ok(STRUCTURE_CHECKS
        .iter()
        .enumerate()
        .map(|(i, name)| ResidualReport::from_samples(*name, tolerance, samples.iter().map(|s| s[i])))
        .collect())
}

/// Ricci-decomposition residuals: vertical, mixed, horizontal (two routes)
/// and the constancy of `C_sl`.
pub fn ricci_reports(
    total: &TotalChart,
    points: &[Vec<f64>],
    tolerance: f64,
    executor: Executor,
) -> Result<(Vec<ResidualReport>, Vec<RicciDecomposition>)> {
    let decs = executor.try_map(points, |p| RicciDecomposition::at(total, p))?;
    let reference = decs[0].c_sl.clone();
    let scale = |d: &RicciDecomposition| max_abs(&d.horizontal_direct).max(max_abs(&d.vertical_direct));
    let mut reports = vec![
        ResidualReport::from_samples("ricci-vertical", tolerance, decs.iter().map(|d| (d.vertical_defect(), scale(d)))),
        ResidualReport::from_samples("ricci-mixed", tolerance, decs.iter().map(|d| (d.mixed_defect(), scale(d)))),
        ResidualReport::from_samples(
            "ricci-mixed-codifferential",
            tolerance,
            decs.iter().map(|d| (d.mixed_general_defect(), scale(d))),
        ),
        ResidualReport::from_samples("ricci-horizontal", tolerance, decs.iter().map(|d| (d.horizontal_defect(), scale(d)))),
        ResidualReport::from_samples(
            "ricci-horizontal-t-form",
            tolerance,
            decs.iter().map(|d| (d.horizontal_t_form_defect(), scale(d))),
        ),
        ResidualReport::from_samples(
            "vertical-constants-constant",
            tolerance,
            decs.iter().map(|d| (max_abs(&sub(&d.c_sl, &reference)), max_abs(&reference))),
        ),
    ];
    // The mixed block only carries information when some dA_t is not co-closed.
    let informative = decs.iter().any(|d| max_abs(&d.mixed_codifferential) > tolerance);
    reports[2].vacuous = !informative;
    Ok((reports, decs))
}

/// Lifts of `g_k` for every factor.
pub fn metric_lift(total: &TotalChart, points: &[Vec<f64>]) -> Result<LiftedTensor> {
    let tensors: Vec<FieldRef> = total
        .spec
        .factors
        .iter()
        .map(|f| Arc::new(MetricField(f.chart.clone())) as FieldRef)
        .collect();
    lift_killing(total, &tensors, points)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_factor() -> FactorSpec {
        let chart = Chart::new(
            "t2",
            vec!["x".into(), "y".into()],
            vec![(-1.0, 1.0), (-1.0, 1.0)],
            vec![vec![Expr::one(), Expr::zero()], vec![Expr::zero(), Expr::one()]],
        )
        .unwrap();
        let j = ComponentField::endomorphism(vec![vec![Expr::zero(), -Expr::one()], vec![Expr::one(), Expr::zero()]])
            .unwrap()
            .into_ref();
        FactorSpec::new("t2", chart, j, 2.0 * PI)
    }

    fn heisenberg() -> BundleSpec {
        BundleSpec {
            name: "heis".into(),
            factors: vec![flat_factor()],
            b: vec![vec![1.0]],
            a: vec![vec![1]],
            potentials: vec![vec![Expr::zero(), Expr::var(0)]],
        }
    }

    #[test]
    fn heisenberg_metric_components() {
        let t = build_total_chart(&heisenberg()).unwrap();
        let g = t.chart().metric_values(&[0.3, 0.0, 0.5]).unwrap();
        assert!((g[4] - 1.09).abs() < 1e-14);
        assert!((g[5] - 0.3).abs() < 1e-14);
        assert_eq!(g[8], 1.0);
    }

    #[test]
    fn rejects_bad_b_and_wrong_curvature() {
        let mut s = heisenberg();
        s.b = vec![vec![-1.0]];
        assert!(matches!(build_total_chart(&s), Err(GeomError::InvalidSpec(_))));
        let mut s = heisenberg();
        s.potentials = vec![vec![Expr::zero(), Expr::c(2.0) * Expr::var(0)]];
        assert!(matches!(build_total_chart(&s), Err(GeomError::EquationViolated { .. })));
    }

    #[test]
    fn heisenberg_structure_and_ricci() {
        let t = build_total_chart(&heisenberg()).unwrap();
        let pts = t.sample(10, 3);
        for r in structure_reports(&t, &pts, 1e-10, Executor::Sequential).unwrap() {
            assert!(r.passed, "{}", r.line());
        }
        let (reps, decs) = ricci_reports(&t, &pts, 1e-10, Executor::Sequential).unwrap();
        for r in &reps {
            assert!(r.passed, "{}", r.line());
        }
        assert!((decs[0].vertical_direct[0] - 0.5).abs() < 1e-12);
        assert!((decs[0].fitted_horizontal_coefficient().unwrap() - 2.0).abs() < 1e-10);
    }
}
