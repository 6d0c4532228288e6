//! Levi-Civita connection, curvature and the first-order differential
//! operators built on them.
//!
//! Conventions: `Γ^c_ab` is stored at `(c*n + a)*n + b`. The curvature is
//! `R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_[X,Y] Z` and `Ric(Y,Z) = tr(X ↦ R(X,Y)Z)`,
//! so the round sphere has positive Ricci curvature.

use nalgebra::DMatrix;

use crate::chart::Chart;
use crate::error::{GeomError, Result};
use crate::field::{flatten, unflatten, TensorField};
use crate::jet::{Jet, MAX_ORDER};

/// Metric, inverse metric and Christoffel symbols as jets at one point.
#[derive(Clone, Debug)]
pub struct LocalGeometry {
    n: usize,
    point: Vec<f64>,
    metric: Vec<Jet>,
    inverse: Vec<Jet>,
    gamma: Vec<Jet>,
}

impl LocalGeometry {
    /// Evaluates the metric to `metric_order` (1..=3) and derives the rest.
    pub fn at(chart: &Chart, point: &[f64], metric_order: usize) -> Result<LocalGeometry> {
        if metric_order == 0 || metric_order > MAX_ORDER {
            return Err(GeomError::OrderUnavailable {
                requested: metric_order,
                available: MAX_ORDER,
            });
        }
        let n = chart.dim();
        let metric = chart.metric_jet(point, metric_order)?;
        let inverse = inverse_jet(chart, point, &metric)?;
        let gamma = christoffel_jets(n, &metric, &inverse);
        Ok(LocalGeometry {
            n,
            point: point.to_vec(),
            metric,
            inverse,
            gamma,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn point(&self) -> &[f64] {
        &self.point
    }

    pub fn metric(&self) -> &[Jet] {
        &self.metric
    }

    pub fn inverse(&self) -> &[Jet] {
        &self.inverse
    }

    pub fn christoffel(&self) -> &[Jet] {
        &self.gamma
    }

    pub fn metric_values(&self) -> Vec<f64> {
        self.metric.iter().map(Jet::value).collect()
    }

    pub fn inverse_values(&self) -> Vec<f64> {
        self.inverse.iter().map(Jet::value).collect()
    }

    pub fn christoffel_values(&self) -> Vec<f64> {
        self.gamma.iter().map(Jet::value).collect()
    }

    #[inline]
    pub fn gamma(&self, c: usize, a: usize, b: usize) -> &Jet {
        &self.gamma[(c * self.n + a) * self.n + b]
    }

    /// Ricci components as jets of order `metric_order − 2`.
    pub fn ricci(&self) -> Result<Vec<Jet>> {
        let n = self.n;
        let order = self.gamma[0].order();
        if order == 0 {
            return Err(GeomError::OrderUnavailable {
                requested: 2,
                available: self.metric[0].order(),
            });
        }
        // Γ^a_{ae}
        let trace: Vec<Jet> = (0..n)
            .map(|e| {
                let mut acc = Jet::zero(n, order);
                for a in 0..n {
                    acc += self.gamma(a, a, e);
                }
                acc
            })
            .collect();
        let dgamma = |c: usize, a: usize, b: usize, d: usize| self.gamma(c, a, b).partial(d);
        let mut ric = Vec::with_capacity(n * n);
        for b in 0..n {
            for c in 0..n {
                let mut r = Jet::zero(n, order - 1);
                for a in 0..n {
                    r += &dgamma(a, b, c, a);
                }
                r -= &trace[c].partial(b);
                for e in 0..n {
                    r.add_product(1.0, &trace[e], self.gamma(e, b, c));
                    for a in 0..n {
                        r.add_product(-1.0, self.gamma(a, b, e), self.gamma(e, a, c));
                    }
                }
                ric.push(r);
            }
        }
        Ok(ric)
    }

    /// `∇_a T` for component jets of a `(p,q)` tensor, derivative index first.
    ///
    /// `components` must carry one more derivative order than the result;
    /// the output order is also capped by the Christoffel jets.
    pub fn covariant_derivative(
        &self,
        components: &[Jet],
        contravariant: usize,
        covariant: usize,
    ) -> Result<Vec<Jet>> {
        let n = self.n;
        let rank = contravariant + covariant;
        if components.len() != n.pow(rank as u32) {
            return Err(GeomError::RankMismatch(format!(
                "{} components for a rank-{rank} tensor in dimension {n}",
                components.len()
            )));
        }
        let order = components
            .first()
            .map(|c| c.order())
            .unwrap_or(1)
            .checked_sub(1)
            .ok_or(GeomError::OrderUnavailable {
                requested: 1,
                available: 0,
            })?
            .min(self.gamma[0].order());
        let total = components.len();
        let mut out = Vec::with_capacity(n * total);
        let mut idx = vec![0usize; rank];
        let mut shifted = vec![0usize; rank];
        for a in 0..n {
            for (flat, comp) in components.iter().enumerate() {
                let mut acc = comp.partial(a).truncate(order);
                unflatten(flat, n, &mut idx);
                for slot in 0..rank {
                    shifted.copy_from_slice(&idx);
                    for e in 0..n {
                        shifted[slot] = e;
                        let t = &components[flatten(&shifted, n)];
                        if slot < contravariant {
                            acc.add_product(1.0, self.gamma(idx[slot], a, e), t);
                        } else {
                            acc.add_product(-1.0, self.gamma(e, a, idx[slot]), t);
                        }
                    }
                }
                out.push(acc.truncate(order));
            }
        }
        Ok(out)
    }

    /// Gram–Schmidt of the coordinate frame in coordinate order.
    pub fn orthonormal_frame(&self) -> Vec<Vec<f64>> {
        gram_schmidt(&self.metric_values(), self.n, (0..self.n).map(|a| unit(self.n, a)))
    }
}

fn unit(n: usize, a: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[a] = 1.0;
    v
}

/// Orthonormalises `vectors` against the metric `g` (row-major values).
pub fn gram_schmidt(g: &[f64], n: usize, vectors: impl IntoIterator<Item = Vec<f64>>) -> Vec<Vec<f64>> {
    let mut frame: Vec<Vec<f64>> = Vec::new();
    for mut v in vectors {
        // Two passes keep the result orthonormal to rounding.
        for _ in 0..2 {
            for e in &frame {
                let c = inner(g, n, &v, e);
                v.iter_mut().zip(e).for_each(|(x, y)| *x -= c * y);
            }
        }
        let norm = inner(g, n, &v, &v).sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        frame.push(v);
    }
    frame
}

/// `g(u, v)` for row-major metric values.
#[inline]
pub fn inner(g: &[f64], n: usize, u: &[f64], v: &[f64]) -> f64 {
    let mut acc = 0.0;
    for a in 0..n {
        if u[a] == 0.0 {
            continue;
        }
        for b in 0..n {
            acc += u[a] * g[a * n + b] * v[b];
        }
    }
    acc
}

/// Index lowering `v ↦ g(v, ·)`.
pub fn lower(g: &[f64], n: usize, v: &[f64]) -> Vec<f64> {
    (0..n).map(|b| (0..n).map(|a| v[a] * g[a * n + b]).sum()).collect()
}

/// Inverse metric jets via the Neumann series around the value.
fn inverse_jet(chart: &Chart, point: &[f64], metric: &[Jet]) -> Result<Vec<Jet>> {
    let n = chart.dim();
    let order = metric[0].order();
    let g0 = DMatrix::from_fn(n, n, |a, b| metric[a * n + b].value());
    let inv0 = g0
        .cholesky()
        .ok_or_else(|| GeomError::DegenerateMetric {
            chart: chart.name().to_string(),
            point: point.to_vec(),
        })?
        .inverse();
    // δ = g − g(point): no value part, so (G0⁻¹δ)^k vanishes beyond k = order.
    let delta: Vec<Jet> = metric.iter().map(|j| j + (-j.value())).collect();
    let constant = |m: &DMatrix<f64>| -> Vec<Jet> {
        (0..n * n)
            .map(|i| Jet::constant(n, order, m[(i / n, i % n)]))
            .collect()
    };
    let mut term = constant(&inv0);
    let mut sum = term.clone();
    for _ in 0..order {
        // term ← −G0⁻¹ · δ · term
        let mut dt = vec![Jet::zero(n, order); n * n];
        for a in 0..n {
            for c in 0..n {
                let mut acc = Jet::zero(n, order);
                for b in 0..n {
                    acc.add_product(1.0, &delta[a * n + b], &term[b * n + c]);
                }
                dt[a * n + c] = acc;
            }
        }
        let mut next = vec![Jet::zero(n, order); n * n];
        for a in 0..n {
            for c in 0..n {
                let mut acc = Jet::zero(n, order);
                for b in 0..n {
                    let s = inv0[(a, b)];
                    if s != 0.0 {
                        acc += &dt[b * n + c].scale(-s);
                    }
                }
                next[a * n + c] = acc;
            }
        }
        for (s, t) in sum.iter_mut().zip(&next) {
            *s += t;
        }
        term = next;
    }
    Ok(sum)
}

fn christoffel_jets(n: usize, g: &[Jet], ginv: &[Jet]) -> Vec<Jet> {
    let order = g[0].order() - 1;
    // dg[(d*n + a)*n + b] = ∂_d g_ab
    let mut dg = Vec::with_capacity(n * n * n);
    for d in 0..n {
        for ab in 0..n * n {
            dg.push(g[ab].partial(d));
        }
    }
    let dg_at = |d: usize, a: usize, b: usize| &dg[(d * n + a) * n + b];
    let ginv: Vec<Jet> = ginv.iter().map(|j| j.truncate(order)).collect();
    let mut gamma = vec![Jet::zero(n, order); n * n * n];
    for a in 0..n {
        for b in a..n {
            // Γ_{d,ab} = ½(∂_a g_db + ∂_b g_da − ∂_d g_ab)
            let lowered: Vec<Jet> = (0..n)
                .map(|d| (dg_at(a, d, b) + dg_at(b, d, a) - dg_at(d, a, b)).scale(0.5))
                .collect();
            for c in 0..n {
                let mut acc = Jet::zero(n, order);
                for (d, low) in lowered.iter().enumerate() {
                    acc.add_product(1.0, &ginv[c * n + d], low);
                }
                gamma[(c * n + b) * n + a] = acc.clone();
                gamma[(c * n + a) * n + b] = acc;
            }
        }
    }
    gamma
}

/// The metric and its partials to order 3.
pub fn metric_jet(chart: &Chart, point: &[f64]) -> Result<Vec<Jet>> {
    chart.metric_jet(point, MAX_ORDER)
}

/// `Γ^c_ab` values at a point.
pub fn christoffel(chart: &Chart, point: &[f64]) -> Result<Vec<f64>> {
    Ok(LocalGeometry::at(chart, point, 1)?.christoffel_values())
}

/// Ricci tensor values at a point.
pub fn ricci(chart: &Chart, point: &[f64]) -> Result<Vec<f64>> {
    Ok(LocalGeometry::at(chart, point, 2)?
        .ricci()?
        .iter()
        .map(Jet::value)
        .collect())
}

/// Scalar curvature `g^ab Ric_ab` as a jet of the same order as `ric`.
pub fn scalar_curvature(geom: &LocalGeometry, ric: &[Jet]) -> Jet {
    let n = geom.dim();
    let order = ric[0].order();
    let mut s = Jet::zero(n, order);
    for ab in 0..n * n {
        s.add_product(1.0, &geom.inverse()[ab].truncate(order), &ric[ab]);
    }
    s
}

/// Covariant derivative of a field at a point, derivative index first.
pub fn covariant_derivative(chart: &Chart, field: &dyn TensorField, point: &[f64]) -> Result<Vec<f64>> {
    check_dim(chart, field)?;
    let geom = LocalGeometry::at(chart, point, 1)?;
    let comps = field.jet(point, 1)?;
    Ok(geom
        .covariant_derivative(&comps, field.contravariant_rank(), field.covariant_rank())?
        .iter()
        .map(Jet::value)
        .collect())
}

pub(crate) fn check_dim(chart: &Chart, field: &dyn TensorField) -> Result<()> {
    if field.dim() != chart.dim() {
        return Err(GeomError::RankMismatch(format!(
            "field of dimension {} on chart `{}` of dimension {}",
            field.dim(),
            chart.name(),
            chart.dim()
        )));
    }
    Ok(())
}

pub(crate) fn require_type(field: &dyn TensorField, p: usize, q: usize, what: &str) -> Result<()> {
    if field.contravariant_rank() != p || field.covariant_rank() != q {
        return Err(GeomError::RankMismatch(format!(
            "{what} must have type ({p},{q}), got ({},{})",
            field.contravariant_rank(),
            field.covariant_rank()
        )));
    }
    Ok(())
}

/// `(L_X g)_ab = ∇_a X_b + ∇_b X_a`.
pub fn lie_derivative_metric(chart: &Chart, x: &dyn TensorField, point: &[f64]) -> Result<Vec<f64>> {
    check_dim(chart, x)?;
    require_type(x, 1, 0, "vector field")?;
    let n = chart.dim();
    let geom = LocalGeometry::at(chart, point, 1)?;
    let xj = x.jet(point, 1)?;
    let nabla = geom.covariant_derivative(&xj, 1, 0)?; // ∇_a X^c at a*n + c
    let g = geom.metric_values();
    let mut out = vec![0.0; n * n];
    for a in 0..n {
        for b in 0..n {
            let mut v = 0.0;
            for c in 0..n {
                v += g[b * n + c] * nabla[a * n + c].value() + g[a * n + c] * nabla[b * n + c].value();
            }
            out[a * n + b] = v;
        }
    }
    Ok(out)
}

/// Coordinate Lie bracket `[X,Y]^a = X^b ∂_b Y^a − Y^b ∂_b X^a`.
pub fn lie_bracket(x: &dyn TensorField, y: &dyn TensorField, point: &[f64]) -> Result<Vec<f64>> {
    require_type(x, 1, 0, "vector field")?;
    require_type(y, 1, 0, "vector field")?;
    let n = x.dim();
    let xj = x.jet(point, 1)?;
    let yj = y.jet(point, 1)?;
    Ok((0..n)
        .map(|a| {
            (0..n)
                .map(|b| xj[b].value() * yj[a].d1(b) - yj[b].value() * xj[a].d1(b))
                .sum()
        })
        .collect())
}

/// Divergence, trace and trace gradient of a symmetric `(0,2)` tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct DivTrace {
    /// `(div K)_b = g^{ac} ∇_a K_{cb}`
    pub divergence: Vec<f64>,
    pub trace: f64,
    /// `∂_b tr K`
    pub trace_gradient: Vec<f64>,
}

/// Largest `|K_ab − K_ba|` among order-0 components.
pub fn symmetry_defect(values: &[f64], n: usize) -> f64 {
    let mut d = 0.0_f64;
    for a in 0..n {
        for b in a + 1..n {
            d = d.max((values[a * n + b] - values[b * n + a]).abs());
        }
    }
    d
}

pub(crate) const SYMMETRY_TOLERANCE: f64 = 1e-10;

pub(crate) fn check_symmetric(values: &[f64], n: usize) -> Result<()> {
    let scale = values.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let defect = symmetry_defect(values, n);
    if defect > SYMMETRY_TOLERANCE * scale {
        return Err(GeomError::NotSymmetric { defect });
    }
    Ok(())
}

/// Divergence and trace from precomputed geometry and `K` jets of order ≥ 1.
pub fn div_trace_from(geom: &LocalGeometry, k: &[Jet]) -> Result<DivTrace> {
    let n = geom.dim();
    let values: Vec<f64> = k.iter().map(Jet::value).collect();
    check_symmetric(&values, n)?;
    let nabla = geom.covariant_derivative(k, 0, 2)?;
    let ginv = geom.inverse();
    let divergence = (0..n)
        .map(|b| {
            let mut s = 0.0;
            for a in 0..n {
                for c in 0..n {
                    s += ginv[a * n + c].value() * nabla[(a * n + c) * n + b].value();
                }
            }
            s
        })
        .collect();
    let mut tr = Jet::zero(n, 1);
    for ab in 0..n * n {
        tr.add_product(1.0, &ginv[ab].truncate(1), &k[ab].truncate(1));
    }
    Ok(DivTrace {
        divergence,
        trace: tr.value(),
        trace_gradient: tr.gradient(),
    })
}

pub fn divergence_and_trace(chart: &Chart, k: &dyn TensorField, point: &[f64]) -> Result<DivTrace> {
    check_dim(chart, k)?;
    require_type(k, 0, 2, "tensor")?;
    let geom = LocalGeometry::at(chart, point, 1)?;
    div_trace_from(&geom, &k.jet(point, 1)?)
}

pub fn orthonormal_frame(chart: &Chart, point: &[f64]) -> Result<Vec<Vec<f64>>> {
    let g = chart.metric_jet(point, 0)?;
    let n = chart.dim();
    let values: Vec<f64> = g.iter().map(Jet::value).collect();
    Ok(gram_schmidt(&values, n, (0..n).map(|a| unit(n, a))))
}

/// The Ricci tensor as a `(0,2)` field; jets available to order 1.
#[derive(Clone, Debug)]
pub struct RicciField(pub Chart);

impl TensorField for RicciField {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn contravariant_rank(&self) -> usize {
        0
    }
    fn covariant_rank(&self) -> usize {
        2
    }
    fn jet(&self, point: &[f64], order: usize) -> Result<Vec<Jet>> {
        if order + 2 > MAX_ORDER {
            return Err(GeomError::OrderUnavailable {
                requested: order,
                available: MAX_ORDER - 2,
            });
        }
        LocalGeometry::at(&self.0, point, order + 2)?.ricci()
    }
}
