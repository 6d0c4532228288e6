//! Coordinate charts and the metric derivative oracle.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{GeomError, Result};
use crate::expr::Expr;
use crate::jet::{Jet, MAX_ORDER};

/// How metric derivatives are produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tier {
    /// Jet arithmetic on expression trees, exact to rounding.
    #[default]
    Exact,
    /// Richardson-extrapolated central differences of metric values.
    FiniteDifference,
}

/// Step used by the finite-difference tier.
pub const FD_STEP: f64 = 1e-3;

pub type MetricFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

#[derive(Clone)]
enum MetricSource {
    /// Full `n×n` component array, symmetric by construction.
    Symbolic(Vec<Expr>),
    /// Opaque callback returning the row-major `n×n` matrix.
    Numeric(Arc<MetricFn>),
}

struct ChartInner {
    name: String,
    coords: Vec<String>,
    domain: Vec<(f64, f64)>,
    metric: MetricSource,
    tier: Tier,
}

/// An open coordinate box with smooth metric components.
///
/// Cloning is cheap; the chart contents are shared and immutable.
#[derive(Clone)]
pub struct Chart {
    inner: Arc<ChartInner>,
}

impl fmt::Debug for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Chart")
            .field("name", &self.inner.name)
            .field("coords", &self.inner.coords)
            .field("domain", &self.inner.domain)
            .field("tier", &self.inner.tier)
            .finish()
    }
}

impl Chart {
    /// Builds a chart from metric component expressions `metric[a][b]`.
    ///
    /// Only the upper triangle is read; the lower one must agree with it
    /// numerically at the box centre.
    pub fn new(
        name: impl Into<String>,
        coords: Vec<String>,
        domain: Vec<(f64, f64)>,
        metric: Vec<Vec<Expr>>,
    ) -> Result<Chart> {
        let name = name.into();
        let n = coords.len();
        Self::check_layout(&name, n, &domain)?;
        if metric.len() != n || metric.iter().any(|row| row.len() != n) {
            return Err(GeomError::InvalidChart(format!(
                "chart `{name}`: metric must be {n}x{n}"
            )));
        }
        if let Some(v) = metric.iter().flatten().filter_map(Expr::max_var).max() {
            if v >= n {
                return Err(GeomError::InvalidChart(format!(
                    "chart `{name}`: metric references coordinate {v} of {n}"
                )));
            }
        }
        let centre: Vec<f64> = domain.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect();
        let mut full = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                let upper = if a <= b { &metric[a][b] } else { &metric[b][a] };
                let defect = (metric[a][b].eval(&centre) - metric[b][a].eval(&centre)).abs();
                if defect > 1e-12 {
                    return Err(GeomError::InvalidChart(format!(
                        "chart `{name}`: metric component ({a},{b}) is not symmetric"
                    )));
                }
                full.push(upper.clone());
            }
        }
        Ok(Chart {
            inner: Arc::new(ChartInner {
                name,
                coords,
                domain,
                metric: MetricSource::Symbolic(full),
                tier: Tier::Exact,
            }),
        })
    }

    /// Builds a chart whose metric is only available as numeric values.
    /// Derivatives then always come from the finite-difference tier.
    pub fn numeric(
        name: impl Into<String>,
        coords: Vec<String>,
        domain: Vec<(f64, f64)>,
        metric: Arc<MetricFn>,
    ) -> Result<Chart> {
        let name = name.into();
        Self::check_layout(&name, coords.len(), &domain)?;
        Ok(Chart {
            inner: Arc::new(ChartInner {
                name,
                coords,
                domain,
                metric: MetricSource::Numeric(metric),
                tier: Tier::FiniteDifference,
            }),
        })
    }

    fn check_layout(name: &str, n: usize, domain: &[(f64, f64)]) -> Result<()> {
        if n == 0 {
            return Err(GeomError::InvalidChart(format!("chart `{name}` has no coordinates")));
        }
        if domain.len() != n {
            return Err(GeomError::InvalidChart(format!(
                "chart `{name}`: {} domain intervals for {n} coordinates",
                domain.len()
            )));
        }
        if let Some((i, _)) = domain.iter().enumerate().find(|(_, (lo, hi))| !(lo < hi)) {
            return Err(GeomError::InvalidChart(format!(
                "chart `{name}`: empty interval for coordinate {i}"
            )));
        }
        Ok(())
    }

    /// Same chart with metric derivatives taken from `tier`.
    pub fn with_tier(&self, tier: Tier) -> Chart {
        let inner = &self.inner;
        let tier = match inner.metric {
            MetricSource::Numeric(_) => Tier::FiniteDifference,
            MetricSource::Symbolic(_) => tier,
        };
        Chart {
            inner: Arc::new(ChartInner {
                name: inner.name.clone(),
                coords: inner.coords.clone(),
                domain: inner.domain.clone(),
                metric: inner.metric.clone(),
                tier,
            }),
        }
    }

    pub fn renamed(&self, name: impl Into<String>) -> Chart {
        let inner = &self.inner;
        Chart {
            inner: Arc::new(ChartInner {
                name: name.into(),
                coords: inner.coords.clone(),
                domain: inner.domain.clone(),
                metric: inner.metric.clone(),
                tier: inner.tier,
            }),
        }
    }

    pub fn name(&self) -> &str {
        &self.inner.name
    }

    pub fn dim(&self) -> usize {
        self.inner.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.inner.coords
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.inner.domain
    }

    pub fn tier(&self) -> Tier {
        self.inner.tier
    }

    /// Metric component expressions (row-major), when the chart is symbolic.
    pub fn metric_exprs(&self) -> Option<&[Expr]> {
        match &self.inner.metric {
            MetricSource::Symbolic(e) => Some(e),
            MetricSource::Numeric(_) => None,
        }
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dim()
            && point
                .iter()
                .zip(&self.inner.domain)
                .all(|(x, (lo, hi))| x > lo && x < hi)
    }

    pub fn check_point(&self, point: &[f64]) -> Result<()> {
        if self.contains(point) {
            Ok(())
        } else {
            Err(GeomError::Domain {
                chart: self.name().to_string(),
                point: point.to_vec(),
            })
        }
    }

    /// Metric values `g_ab` at a point, row-major.
    pub fn metric_values(&self, point: &[f64]) -> Result<Vec<f64>> {
        self.check_point(point)?;
        Ok(self.raw_metric(point))
    }

    fn raw_metric(&self, point: &[f64]) -> Vec<f64> {
        match &self.inner.metric {
            MetricSource::Symbolic(e) => e.iter().map(|c| c.eval(point)).collect(),
            MetricSource::Numeric(f) => f(point),
        }
    }

    /// `g_ab` and its partial derivatives up to `order` at `point`.
    pub fn metric_jet(&self, point: &[f64], order: usize) -> Result<Vec<Jet>> {
        if order > MAX_ORDER {
            return Err(GeomError::OrderUnavailable {
                requested: order,
                available: MAX_ORDER,
            });
        }
        self.check_point(point)?;
        let n = self.dim();
        let jets = match (&self.inner.metric, self.inner.tier) {
            (MetricSource::Symbolic(exprs), Tier::Exact) => {
                let seeds = Jet::seed(point, order);
                let mut out: Vec<Jet> = Vec::with_capacity(n * n);
                for a in 0..n {
                    for b in 0..n {
                        if b < a {
                            let mirrored = out[b * n + a].clone();
                            out.push(mirrored);
                        } else {
                            out.push(exprs[a * n + b].eval_jet(&seeds));
                        }
                    }
                }
                out
            }
            _ => finite_difference_jets(&|x| self.raw_metric(x), point, order, n * n),
        };
        self.check_positive(point, &jets)?;
        Ok(jets)
    }

    fn check_positive(&self, point: &[f64], g: &[Jet]) -> Result<()> {
        let n = self.dim();
        let m = DMatrix::from_fn(n, n, |a, b| g[a * n + b].value());
        if m.cholesky().is_none() {
            return Err(GeomError::DegenerateMetric {
                chart: self.name().to_string(),
                point: point.to_vec(),
            });
        }
        Ok(())
    }
}

/// Riemannian product of symbolic charts, coordinates concatenated in order.
#[derive(Clone, Debug)]
pub struct ProductChart {
    pub chart: Chart,
    pub factors: Vec<Chart>,
    /// Index of each factor's first coordinate in the product chart.
    pub offsets: Vec<usize>,
}

impl ProductChart {
    pub fn new(name: impl Into<String>, factors: &[Chart]) -> Result<ProductChart> {
        let n: usize = factors.iter().map(Chart::dim).sum();
        let mut metric = vec![vec![Expr::zero(); n]; n];
        let mut coords = Vec::with_capacity(n);
        let mut domain = Vec::with_capacity(n);
        let mut offsets = Vec::with_capacity(factors.len());
        let mut off = 0;
        for f in factors {
            let exprs = f.metric_exprs().ok_or_else(|| {
                GeomError::InvalidChart(format!(
                    "factor `{}` has no symbolic metric; products need expression metrics",
                    f.name()
                ))
            })?;
            let m = f.dim();
            for a in 0..m {
                for b in 0..m {
                    metric[off + a][off + b] = exprs[a * m + b].shift_vars(off);
                }
            }
            coords.extend(f.coords().iter().cloned());
            domain.extend_from_slice(f.domain());
            offsets.push(off);
            off += m;
        }
        let chart = Chart::new(name, coords, domain, metric)?;
        Ok(ProductChart {
            chart,
            factors: factors.to_vec(),
            offsets,
        })
    }

    /// Coordinate range of factor `k` inside the product.
    pub fn block(&self, k: usize) -> std::ops::Range<usize> {
        self.offsets[k]..self.offsets[k] + self.factors[k].dim()
    }
}

/// Jets of a vector-valued function from nested central differences with
/// one Richardson step.
pub fn finite_difference_jets(
    f: &dyn Fn(&[f64]) -> Vec<f64>,
    point: &[f64],
    order: usize,
    outputs: usize,
) -> Vec<Jet> {
    let n = point.len();
    let at = |offsets: &[(usize, f64)]| {
        let mut x = point.to_vec();
        for &(i, d) in offsets {
            x[i] += d;
        }
        f(&x)
    };
    // Nested central difference along the multi-index `idx` with step h.
    let nested = |idx: &[usize], h: f64| -> Vec<f64> {
        let m = idx.len();
        let mut acc = vec![0.0; outputs];
        for mask in 0..(1u32 << m) {
            let mut sign = 1.0;
            let offs: Vec<(usize, f64)> = idx
                .iter()
                .enumerate()
                .map(|(l, &i)| {
                    if mask & (1 << l) != 0 {
                        (i, h)
                    } else {
                        sign = -sign;
                        (i, -h)
                    }
                })
                .collect();
            for (a, v) in acc.iter_mut().zip(at(&offs)) {
                *a += sign * v;
            }
        }
        let denom = (2.0 * h).powi(m as i32);
        acc.iter_mut().for_each(|a| *a /= denom);
        acc
    };
    let richardson = |idx: &[usize]| -> Vec<f64> {
        let coarse = nested(idx, FD_STEP);
        let fine = nested(idx, 0.5 * FD_STEP);
        coarse
            .iter()
            .zip(&fine)
            .map(|(c, f)| (4.0 * f - c) / 3.0)
            .collect()
    };

    let value = f(point);
    let mut d1 = vec![vec![0.0; n]; outputs];
    let mut d2 = vec![vec![0.0; n * n]; outputs];
    let mut d3 = vec![vec![0.0; n * n * n]; outputs];
    if order >= 1 {
        for i in 0..n {
            for (o, v) in richardson(&[i]).into_iter().enumerate() {
                d1[o][i] = v;
            }
        }
    }
    if order >= 2 {
        for i in 0..n {
            for j in i..n {
                for (o, v) in richardson(&[i, j]).into_iter().enumerate() {
                    d2[o][i * n + j] = v;
                    d2[o][j * n + i] = v;
                }
            }
        }
    }
    if order >= 3 {
        for i in 0..n {
            for j in i..n {
                for k in j..n {
                    let est = richardson(&[i, j, k]);
                    for perm in permutations3(i, j, k) {
                        let idx = (perm[0] * n + perm[1]) * n + perm[2];
                        for (o, v) in est.iter().enumerate() {
                            d3[o][idx] = *v;
                        }
                    }
                }
            }
        }
    }
    (0..outputs)
        .map(|o| {
            let empty: &[f64] = &[];
            Jet::from_parts(
                n,
                value[o],
                if order >= 1 { &d1[o] } else { empty },
                if order >= 2 { &d2[o] } else { empty },
                if order >= 3 { &d3[o] } else { empty },
            )
        })
        .collect()
}

fn permutations3(i: usize, j: usize, k: usize) -> [[usize; 3]; 6] {
    [
        [i, j, k],
        [i, k, j],
        [j, i, k],
        [j, k, i],
        [k, i, j],
        [k, j, i],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sphere() -> Chart {
        let th = Expr::var(0);
        Chart::new(
            "s2",
            vec!["th".into(), "ph".into()],
            vec![(0.1, 3.0), (-3.0, 3.0)],
            vec![
                vec![Expr::one(), Expr::zero()],
                vec![Expr::zero(), th.sin().powi(2)],
            ],
        )
        .unwrap()
    }

    #[test]
    fn domain_is_open() {
        let c = sphere();
        assert!(matches!(
            c.metric_jet(&[0.1, 0.0], 1),
            Err(GeomError::Domain { .. })
        ));
        assert!(c.metric_jet(&[0.2, 0.0], 1).is_ok());
    }

    #[test]
    fn degenerate_metric_is_reported() {
        let c = Chart::new(
            "bad",
            vec!["x".into(), "y".into()],
            vec![(-1.0, 1.0), (-1.0, 1.0)],
            vec![
                vec![Expr::one(), Expr::c(2.0)],
                vec![Expr::c(2.0), Expr::one()],
            ],
        )
        .unwrap();
        assert!(matches!(
            c.metric_jet(&[0.0, 0.0], 0),
            Err(GeomError::DegenerateMetric { .. })
        ));
    }

    #[test]
    fn asymmetric_metric_rejected() {
        let r = Chart::new(
            "bad",
            vec!["x".into(), "y".into()],
            vec![(-1.0, 1.0), (-1.0, 1.0)],
            vec![
                vec![Expr::one(), Expr::c(0.1)],
                vec![Expr::c(0.2), Expr::one()],
            ],
        );
        assert!(matches!(r, Err(GeomError::InvalidChart(_))));
    }

    #[test]
    fn finite_difference_tier_tracks_exact() {
        let exact = sphere();
        let fd = exact.with_tier(Tier::FiniteDifference);
        let p = [0.9, 0.4];
        let a = exact.metric_jet(&p, 3).unwrap();
        let b = fd.metric_jet(&p, 3).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_abs_diff_eq!(x.value(), y.value(), epsilon = 1e-15);
            for i in 0..2 {
                assert_abs_diff_eq!(x.d1(i), y.d1(i), epsilon = 1e-8);
                for j in 0..2 {
                    assert_abs_diff_eq!(x.d2(i, j), y.d2(i, j), epsilon = 1e-6);
                    for k in 0..2 {
                        assert_abs_diff_eq!(x.d3(i, j, k), y.d3(i, j, k), epsilon = 1e-4);
                    }
                }
            }
        }
    }
}
