//! Tensor fields on charts.
//!
//! Components are stored row-major over `dim^(p+q)` entries with the
//! contravariant indices first. Every field can be evaluated as jets so
//! that covariant and exterior derivatives stay exact.

use std::sync::Arc;

use crate::chart::Chart;
use crate::error::{GeomError, Result};
use crate::expr::{Expr, ParseError};
use crate::jet::Jet;

pub trait TensorField: Send + Sync {
    fn dim(&self) -> usize;
    fn contravariant_rank(&self) -> usize;
    fn covariant_rank(&self) -> usize;

    /// Component jets of the requested derivative order at `point`.
    fn jet(&self, point: &[f64], order: usize) -> Result<Vec<Jet>>;

    fn rank(&self) -> usize {
        self.contravariant_rank() + self.covariant_rank()
    }

    fn values(&self, point: &[f64]) -> Result<Vec<f64>> {
        Ok(self.jet(point, 0)?.iter().map(Jet::value).collect())
    }
}

/// Shared handle to a field; most derived fields hold their inputs this way.
pub type FieldRef = Arc<dyn TensorField>;

/// Field given by one expression per component.
#[derive(Clone, Debug)]
pub struct ComponentField {
    dim: usize,
    contravariant: usize,
    covariant: usize,
    components: Vec<Expr>,
}

impl ComponentField {
    pub fn new(dim: usize, contravariant: usize, covariant: usize, components: Vec<Expr>) -> Result<Self> {
        let expected = dim.pow((contravariant + covariant) as u32);
        if components.len() != expected {
            return Err(GeomError::RankMismatch(format!(
                "{} components supplied, type ({contravariant},{covariant}) in dimension {dim} needs {expected}",
                components.len()
            )));
        }
        if let Some(v) = components.iter().filter_map(Expr::max_var).max() {
            if v >= dim {
                return Err(GeomError::RankMismatch(format!(
                    "component references coordinate {v} in dimension {dim}"
                )));
            }
        }
        Ok(ComponentField {
            dim,
            contravariant,
            covariant,
            components,
        })
    }

    pub fn scalar(dim: usize, f: Expr) -> Self {
        Self::new(dim, 0, 0, vec![f]).expect("scalar field")
    }

    pub fn vector(components: Vec<Expr>) -> Self {
        let n = components.len();
        Self::new(n, 1, 0, components).expect("vector field")
    }

    pub fn covector(components: Vec<Expr>) -> Self {
        let n = components.len();
        Self::new(n, 0, 1, components).expect("covector field")
    }

    /// Constant coordinate vector field.
    pub fn constant_vector(v: &[f64]) -> Self {
        Self::vector(v.iter().map(|&c| Expr::c(c)).collect())
    }

    /// `(0,2)` field from a square matrix of expressions.
    pub fn covariant2(rows: Vec<Vec<Expr>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(GeomError::RankMismatch("matrix is not square".into()));
        }
        Self::new(n, 0, 2, rows.into_iter().flatten().collect())
    }

    /// `(1,1)` field with `rows[a][b] = T^a_b`.
    pub fn endomorphism(rows: Vec<Vec<Expr>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(GeomError::RankMismatch("matrix is not square".into()));
        }
        Self::new(n, 1, 1, rows.into_iter().flatten().collect())
    }

    /// Antisymmetric `(0,2)` field from its upper triangle `entries[(a,b)]`, a < b.
    pub fn two_form(dim: usize, entries: &[((usize, usize), Expr)]) -> Result<Self> {
        let mut comps = vec![Expr::zero(); dim * dim];
        for ((a, b), e) in entries {
            if a >= b || *b >= dim {
                return Err(GeomError::RankMismatch(format!("bad two-form slot ({a},{b})")));
            }
            comps[a * dim + b] = e.clone();
            comps[b * dim + a] = -e.clone();
        }
        Self::new(dim, 0, 2, comps)
    }

    /// Parses one expression per component over the named coordinates.
    pub fn parse(
        dim: usize,
        contravariant: usize,
        covariant: usize,
        components: &[&str],
        names: &[&str],
    ) -> std::result::Result<Result<Self>, ParseError> {
        let exprs = components
            .iter()
            .map(|c| Expr::parse(c, names))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Self::new(dim, contravariant, covariant, exprs))
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn into_ref(self) -> FieldRef {
        Arc::new(self)
    }
}

impl TensorField for ComponentField {
    fn dim(&self) -> usize {
        self.dim
    }

    fn contravariant_rank(&self) -> usize {
        self.contravariant
    }

    fn covariant_rank(&self) -> usize {
        self.covariant
    }

    fn jet(&self, point: &[f64], order: usize) -> Result<Vec<Jet>> {
        if point.len() != self.dim {
            return Err(GeomError::RankMismatch(format!(
                "point of dimension {} for field of dimension {}",
                point.len(),
                self.dim
            )));
        }
        let seeds = Jet::seed(point, order);
        Ok(self.components.iter().map(|c| c.eval_jet(&seeds)).collect())
    }

    fn values(&self, point: &[f64]) -> Result<Vec<f64>> {
        Ok(self.components.iter().map(|c| c.eval(point)).collect())
    }
}

/// The metric tensor of a chart as a `(0,2)` field.
#[derive(Clone, Debug)]
pub struct MetricField(pub Chart);

impl TensorField for MetricField {
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
        self.0.metric_jet(point, order)
    }
}

/// A field on `dim_inner` coordinates viewed on a larger chart whose
/// coordinates `offset..offset+dim_inner` are the inner ones. Components
/// with any index outside that block vanish.
#[derive(Clone)]
pub struct EmbeddedField {
    inner: FieldRef,
    dim: usize,
    offset: usize,
}

impl EmbeddedField {
    pub fn new(inner: FieldRef, dim: usize, offset: usize) -> Result<Self> {
        if offset + inner.dim() > dim {
            return Err(GeomError::RankMismatch(format!(
                "cannot embed a {}-dimensional field at offset {offset} into dimension {dim}",
                inner.dim()
            )));
        }
        Ok(EmbeddedField { inner, dim, offset })
    }
}

impl TensorField for EmbeddedField {
    fn dim(&self) -> usize {
        self.dim
    }
    fn contravariant_rank(&self) -> usize {
        self.inner.contravariant_rank()
    }
    fn covariant_rank(&self) -> usize {
        self.inner.covariant_rank()
    }
    fn jet(&self, point: &[f64], order: usize) -> Result<Vec<Jet>> {
        let m = self.inner.dim();
        let sub = &point[self.offset..self.offset + m];
        let inner = self.inner.jet(sub, order)?;
        let rank = self.rank();
        let total = self.dim.pow(rank as u32);
        let mut out = vec![Jet::zero(self.dim, order); total];
        let mut idx = vec![0usize; rank];
        for (flat, j) in inner.iter().enumerate() {
            unflatten(flat, m, &mut idx);
            idx.iter_mut().for_each(|i| *i += self.offset);
            out[flatten(&idx, self.dim)] = j.embed(self.dim, self.offset);
        }
        Ok(out)
    }
}

/// Pointwise sum of fields of equal type.
#[derive(Clone)]
pub struct SumField {
    terms: Vec<FieldRef>,
}

impl SumField {
    pub fn new(terms: Vec<FieldRef>) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| GeomError::RankMismatch("empty sum".into()))?;
        let ty = (first.dim(), first.contravariant_rank(), first.covariant_rank());
        if terms
            .iter()
            .any(|t| (t.dim(), t.contravariant_rank(), t.covariant_rank()) != ty)
        {
            return Err(GeomError::RankMismatch("summands have different types".into()));
        }
        Ok(SumField { terms })
    }
}

impl TensorField for SumField {
    fn dim(&self) -> usize {
        self.terms[0].dim()
    }
    fn contravariant_rank(&self) -> usize {
        self.terms[0].contravariant_rank()
    }
    fn covariant_rank(&self) -> usize {
        self.terms[0].covariant_rank()
    }
    fn jet(&self, point: &[f64], order: usize) -> Result<Vec<Jet>> {
        let mut acc = self.terms[0].jet(point, order)?;
        for t in &self.terms[1..] {
            for (a, b) in acc.iter_mut().zip(t.jet(point, order)?) {
                *a += &b;
            }
        }
        Ok(acc)
    }
}

/// Field scaled by a constant.
#[derive(Clone)]
pub struct ScaledField {
    inner: FieldRef,
    factor: f64,
}

impl ScaledField {
    pub fn new(inner: FieldRef, factor: f64) -> Self {
        ScaledField { inner, factor }
    }
}

impl TensorField for ScaledField {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn contravariant_rank(&self) -> usize {
        self.inner.contravariant_rank()
    }
    fn covariant_rank(&self) -> usize {
        self.inner.covariant_rank()
    }
    fn jet(&self, point: &[f64], order: usize) -> Result<Vec<Jet>> {
        Ok(self
            .inner
            .jet(point, order)?
            .iter()
            .map(|j| j.scale(self.factor))
            .collect())
    }
}

/// Row-major flat index of a multi-index.
#[inline]
pub fn flatten(idx: &[usize], n: usize) -> usize {
    idx.iter().fold(0, |acc, &i| acc * n + i)
}

/// Inverse of [`flatten`]; `out.len()` fixes the rank.
#[inline]
pub fn unflatten(mut flat: usize, n: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = flat % n;
        flat /= n;
    }
}

/// Contracts every slot of a covariant tensor with the given vectors.
pub fn contract(values: &[f64], n: usize, vectors: &[&[f64]]) -> f64 {
    let rank = vectors.len();
    debug_assert_eq!(values.len(), n.pow(rank as u32));
    let mut idx = vec![0usize; rank];
    let mut acc = 0.0;
    for (flat, v) in values.iter().enumerate() {
        if *v == 0.0 {
            continue;
        }
        unflatten(flat, n, &mut idx);
        let w: f64 = idx.iter().zip(vectors).map(|(&i, x)| x[i]).product();
        acc += v * w;
    }
    acc
}

/// Expresses a covariant tensor in a frame: `T(E_A, E_B, ...)`.
///
/// `frame[A]` holds the coordinate components of `E_A`.
pub fn to_frame(values: &[f64], n: usize, rank: usize, frame: &[Vec<f64>]) -> Vec<f64> {
    let mut cur = values.to_vec();
    // Transform one slot at a time: slot s goes from coordinate to frame index.
    for s in 0..rank {
        let mut next = vec![0.0; cur.len()];
        let stride = n.pow((rank - 1 - s) as u32);
        for (flat, out) in next.iter_mut().enumerate() {
            let a = (flat / stride) % n;
            let base = flat - a * stride;
            *out = (0..n).map(|c| frame[a][c] * cur[base + c * stride]).sum();
        }
        cur = next;
    }
    cur
}

pub fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}
