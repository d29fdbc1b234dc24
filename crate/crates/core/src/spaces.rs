//! Quasi-normed sequence spaces built from a small combinator algebra, with a
//! single norm entry point.
//!
//! Exact rational values are returned whenever the engine allows it
//! (Tsirelson, `l_1`, their convexifications at `p = 1`, direct sums of exact
//! pieces); every other engine answers in binary64.

use std::cmp::Ordering;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::dkk::{self, DkkSpec};
use crate::error::{Error, Result};
use crate::finvec::{rational_to_f64, BlockIndex, BlockVec, FinVec, Rational};
use crate::hierarchy::GrowthFunction;
use crate::trig::{self, RotatedSystem};
use crate::tsirelson::{tsirelson_norm, tsirelson_norm_f64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SpaceHandle {
    Tsirelson,
    Lp {
        p: f64,
    },
    FiniteLp {
        p: f64,
        n: usize,
    },
    /// `|f| = | |f|^p |_inner^{1/p}`.
    Convexify {
        inner: Box<SpaceHandle>,
        p: f64,
    },
    /// Uniform inner space, block `j` of dimension `dims(j)`.
    DirectSum {
        outer: Box<SpaceHandle>,
        inner: Box<SpaceHandle>,
        dims: GrowthFunction,
    },
    /// Finitely many blocks, each with its own inner space.
    BlockSum {
        outer: Box<SpaceHandle>,
        blocks: Vec<(SpaceHandle, usize)>,
    },
    /// Coordinate `n` of the restricted space is coordinate `indices[n-1]` of `inner`.
    Restrict {
        inner: Box<SpaceHandle>,
        indices: Vec<usize>,
    },
    WeightedTrig {
        lambda: f64,
        dim: usize,
    },
    RotatedTrigSum {
        a: f64,
        dim: usize,
    },
    Dkk(Box<DkkSpec>),
}

/// A norm value, exact when the engine is exact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Norm {
    Exact(#[serde(with = "crate::finvec::rational_str")] Rational),
    Float(f64),
}

impl Norm {
    pub fn to_f64(&self) -> f64 {
        match self {
            Norm::Exact(q) => rational_to_f64(q),
            Norm::Float(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            Norm::Exact(q) => Some(q),
            Norm::Float(_) => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Norm::Exact(_))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Norm::Exact(q) => q.is_zero(),
            Norm::Float(x) => *x == 0.0,
        }
    }

    /// `self / other`, exact when both are; `1` for `0 / 0`.
    pub fn ratio(&self, other: &Norm) -> Norm {
        match (self, other) {
            (_, d) if d.is_zero() && self.is_zero() => Norm::Exact(Rational::one()),
            (Norm::Exact(a), Norm::Exact(b)) => Norm::Exact(a / b),
            _ => Norm::Float(self.to_f64() / other.to_f64()),
        }
    }

    pub fn add(&self, other: &Norm) -> Norm {
        match (self, other) {
            (Norm::Exact(a), Norm::Exact(b)) => Norm::Exact(a + b),
            _ => Norm::Float(self.to_f64() + other.to_f64()),
        }
    }
}

impl PartialOrd for Norm {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Norm::Exact(a), Norm::Exact(b)) => a.partial_cmp(b),
            _ => self.to_f64().partial_cmp(&other.to_f64()),
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Norm::Exact(q) => write!(f, "{q}"),
            Norm::Float(x) => write!(f, "{x}"),
        }
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::param(format!("p must be positive and finite, got {p}")));
    }
    Ok(())
}

fn lp_sum_f64<'a>(values: impl Iterator<Item = &'a f64>, p: f64) -> f64 {
    if p == 1.0 {
        values.map(|v| v.abs()).sum()
    } else if p == 2.0 {
        values.map(|v| v * v).sum::<f64>().sqrt()
    } else {
        values.map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

fn domain(index: usize, space: &SpaceHandle) -> Error {
    Error::Domain {
        index,
        space: space.to_string(),
    }
}

impl SpaceHandle {
    pub fn lp(p: f64) -> Result<Self> {
        check_p(p)?;
        Ok(SpaceHandle::Lp { p })
    }

    pub fn finite_lp(p: f64, n: usize) -> Result<Self> {
        check_p(p)?;
        if n == 0 {
            return Err(Error::param("finite l_p needs n >= 1"));
        }
        Ok(SpaceHandle::FiniteLp { p, n })
    }

    pub fn convexify(inner: SpaceHandle, p: f64) -> Result<Self> {
        check_p(p)?;
        Ok(SpaceHandle::Convexify {
            inner: Box::new(inner),
            p,
        })
    }

    pub fn direct_sum(outer: SpaceHandle, inner: SpaceHandle, dims: GrowthFunction) -> Self {
        SpaceHandle::DirectSum {
            outer: Box::new(outer),
            inner: Box::new(inner),
            dims,
        }
    }

    pub fn block_sum(outer: SpaceHandle, blocks: Vec<(SpaceHandle, usize)>) -> Result<Self> {
        if blocks.iter().any(|(_, d)| *d == 0) {
            return Err(Error::param("block dimensions must be positive"));
        }
        Ok(SpaceHandle::BlockSum {
            outer: Box::new(outer),
            blocks,
        })
    }

    pub fn restrict(inner: SpaceHandle, indices: Vec<usize>) -> Result<Self> {
        if indices.first() == Some(&0) || indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param("restriction indices must be positive and strictly increasing"));
        }
        Ok(SpaceHandle::Restrict {
            inner: Box::new(inner),
            indices,
        })
    }

    pub fn weighted_trig(lambda: f64, dim: usize) -> Result<Self> {
        if !(lambda > -1.0 && lambda < 1.0) {
            return Err(Error::param(format!("lambda must lie in (-1, 1), got {lambda}")));
        }
        if dim == 0 {
            return Err(Error::param("dim must be positive"));
        }
        Ok(SpaceHandle::WeightedTrig { lambda, dim })
    }

    pub fn rotated(a: f64, dim: usize) -> Result<Self> {
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::param(format!("a must lie in (0, 1), got {a}")));
        }
        if dim == 0 {
            return Err(Error::param("dim must be positive"));
        }
        Ok(SpaceHandle::RotatedTrigSum { a, dim })
    }

    pub fn dkk(spec: DkkSpec) -> Self {
        SpaceHandle::Dkk(Box::new(spec))
    }

    /// Recursive parameter check, for handles assembled by hand.
    pub fn validate(&self) -> Result<()> {
        use SpaceHandle::*;
        match self {
            Tsirelson => Ok(()),
            Lp { p } => check_p(*p),
            FiniteLp { p, n } => SpaceHandle::finite_lp(*p, *n).map(|_| ()),
            Convexify { inner, p } => {
                check_p(*p)?;
                inner.validate()
            }
            DirectSum { outer, inner, .. } => {
                outer.validate()?;
                inner.validate()
            }
            BlockSum { outer, blocks } => {
                outer.validate()?;
                for (b, d) in blocks {
                    if *d == 0 {
                        return Err(Error::param("block dimensions must be positive"));
                    }
                    b.validate()?;
                }
                Ok(())
            }
            Restrict { inner, indices } => {
                SpaceHandle::restrict((**inner).clone(), indices.clone())?;
                inner.validate()
            }
            WeightedTrig { lambda, dim } => SpaceHandle::weighted_trig(*lambda, *dim).map(|_| ()),
            RotatedTrigSum { a, dim } => SpaceHandle::rotated(*a, *dim).map(|_| ()),
            Dkk(spec) => spec.validate(),
        }
    }

    /// Number of coordinates, `None` when infinite.
    pub fn dimension(&self) -> Option<usize> {
        use SpaceHandle::*;
        match self {
            Tsirelson | Lp { .. } | DirectSum { .. } => None,
            FiniteLp { n, .. } => Some(*n),
            Convexify { inner, .. } => inner.dimension(),
            BlockSum { blocks, .. } => Some(blocks.iter().map(|(_, d)| d).sum()),
            Restrict { indices, .. } => Some(indices.len()),
            WeightedTrig { dim, .. } | RotatedTrigSum { dim, .. } => Some(*dim),
            Dkk(spec) => spec.sigma.dimension(),
        }
    }

    /// Whether the unit vectors form a 1-unconditional basis.
    pub fn is_unconditional(&self) -> bool {
        use SpaceHandle::*;
        match self {
            Tsirelson | Lp { .. } | FiniteLp { .. } => true,
            Convexify { inner, .. } | Restrict { inner, .. } => inner.is_unconditional(),
            DirectSum { outer, inner, .. } => outer.is_unconditional() && inner.is_unconditional(),
            BlockSum { outer, blocks } => outer.is_unconditional() && blocks.iter().all(|(b, _)| b.is_unconditional()),
            WeightedTrig { .. } | RotatedTrigSum { .. } | Dkk(_) => false,
        }
    }

    /// Hilbert engines expose their Gram matrix on the first `n` coordinates.
    pub fn gram(&self, n: usize) -> Result<Option<nalgebra::DMatrix<f64>>> {
        match self {
            SpaceHandle::WeightedTrig { lambda, dim } => {
                if n > *dim {
                    return Err(domain(n, self));
                }
                Ok(Some(trig::trig_gram_cached(*lambda, n)?.matrix.clone()))
            }
            SpaceHandle::RotatedTrigSum { a, dim } => {
                if n > *dim {
                    return Err(domain(n, self));
                }
                Ok(Some(RotatedSystem::new(*a, n)?.gram()))
            }
            _ => Ok(None),
        }
    }

    /// Modulus `kappa` with `|f + g| <= kappa (|f| + |g|)`.
    pub fn quasi_triangle_modulus(&self) -> f64 {
        use SpaceHandle::*;
        match self {
            Tsirelson | WeightedTrig { .. } | RotatedTrigSum { .. } => 1.0,
            Lp { p } | FiniteLp { p, .. } => {
                if *p >= 1.0 {
                    1.0
                } else {
                    2f64.powf(1.0 / p - 1.0)
                }
            }
            Convexify { inner, p } => {
                let k = inner.quasi_triangle_modulus();
                if *p >= 1.0 {
                    if k == 1.0 {
                        1.0
                    } else {
                        (2f64.powf(p - 1.0) * k).powf(1.0 / p)
                    }
                } else {
                    k.powf(1.0 / p) * 2f64.powf(1.0 / p - 1.0)
                }
            }
            DirectSum { outer, inner, .. } => outer.quasi_triangle_modulus() * inner.quasi_triangle_modulus(),
            BlockSum { outer, blocks } => {
                outer.quasi_triangle_modulus()
                    * blocks.iter().map(|(b, _)| b.quasi_triangle_modulus()).fold(1.0, f64::max)
            }
            Restrict { inner, .. } => inner.quasi_triangle_modulus(),
            Dkk(spec) => spec.s.quasi_triangle_modulus().max(spec.base.quasi_triangle_modulus()),
        }
    }

    /// Block sizes touched by coordinates up to `max_index`, for block sums.
    fn block_dims(&self, max_index: usize) -> Result<Vec<usize>> {
        match self {
            SpaceHandle::DirectSum { dims, .. } => {
                let mut out = Vec::new();
                let mut total = 0usize;
                let mut j = 1u64;
                while total < max_index {
                    let d = dims.eval_usize(j)?;
                    if d == 0 {
                        return Err(Error::param(format!("block {j} has dimension 0")));
                    }
                    out.push(d);
                    total += d;
                    j += 1;
                }
                Ok(out)
            }
            SpaceHandle::BlockSum { blocks, .. } => Ok(blocks.iter().map(|(_, d)| *d).collect()),
            _ => Ok(Vec::new()),
        }
    }

    fn block_space(&self, j: usize) -> Result<&SpaceHandle> {
        match self {
            SpaceHandle::DirectSum { inner, .. } => Ok(inner),
            SpaceHandle::BlockSum { blocks, .. } => blocks.get(j - 1).map(|(b, _)| b).ok_or_else(|| domain(j, self)),
            _ => Err(Error::invariant("not a block sum")),
        }
    }

    /// Splits flat coordinates into block coordinates.
    pub fn split_blocks<S: crate::finvec::Scalar>(&self, f: &FinVec<S>) -> Result<BlockVec<S>> {
        let dims = self.block_dims(f.max_index())?;
        let total: usize = dims.iter().sum();
        if f.max_index() > total {
            return Err(domain(f.max_index(), self));
        }
        let starts = cumulative(&dims);
        BlockVec::from_entries(f.iter().map(|(k, v)| (locate(&starts, k), v.clone())))
    }

    /// Inverse of [`SpaceHandle::split_blocks`].
    pub fn flatten_blocks<S: crate::finvec::Scalar>(&self, f: &BlockVec<S>) -> Result<FinVec<S>> {
        let max_block = f.touched_blocks().last().copied().unwrap_or(0);
        let mut dims = self.block_dims(0)?;
        if let SpaceHandle::DirectSum { dims: g, .. } = self {
            dims = (1..=max_block as u64).map(|j| g.eval_usize(j)).collect::<Result<_>>()?;
        }
        let starts = cumulative(&dims);
        let mut entries = Vec::new();
        for (ix, v) in f.iter() {
            if ix.block > dims.len() || ix.inner > dims[ix.block - 1] {
                return Err(Error::Domain {
                    index: ix.inner,
                    space: format!("block {} of {self}", ix.block),
                });
            }
            entries.push((starts[ix.block - 1] + ix.inner, v.clone()));
        }
        FinVec::from_entries(entries)
    }
}

/// `starts[j] = dims[0] + ... + dims[j-1]`.
fn cumulative(dims: &[usize]) -> Vec<usize> {
    let mut starts = Vec::with_capacity(dims.len() + 1);
    let mut acc = 0;
    starts.push(0);
    for d in dims {
        acc += d;
        starts.push(acc);
    }
    starts
}

fn locate(starts: &[usize], k: usize) -> BlockIndex {
    // first j with starts[j] >= k, block j
    let j = starts.partition_point(|&s| s < k);
    BlockIndex::new(j, k - starts[j - 1])
}

impl fmt::Display for SpaceHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use SpaceHandle::*;
        match self {
            Tsirelson => write!(f, "tsirelson"),
            Lp { p } => write!(f, "lp(p={p})"),
            FiniteLp { p, n } => write!(f, "lpn(p={p},n={n})"),
            Convexify { inner, p } => write!(f, "convex({inner},p={p})"),
            DirectSum { outer, inner, dims } => write!(f, "dsum(outer={outer}, inner={inner}, dims={dims})"),
            BlockSum { outer, blocks } => {
                write!(f, "bsum(outer={outer}, blocks=")?;
                for (i, (b, d)) in blocks.iter().enumerate() {
                    if i > 0 {
                        write!(f, "; ")?;
                    }
                    write!(f, "{b}:{d}")?;
                }
                write!(f, ")")
            }
            Restrict { inner, indices } => {
                let list: Vec<String> = indices.iter().map(|i| i.to_string()).collect();
                write!(f, "restrict({inner}, indices={})", list.join(","))
            }
            WeightedTrig { lambda, dim } => write!(f, "wtrig(lambda={lambda},dim={dim})"),
            RotatedTrigSum { a, dim } => write!(f, "rot(a={a},dim={dim})"),
            Dkk(spec) => {
                let list: Vec<String> = spec.sigma.lengths().iter().map(|l| l.to_string()).collect();
                write!(f, "dkk(base={}, s={}, sigma={})", spec.base, spec.s, list.join(","))
            }
        }
    }
}

/// Exact value when the engine and the input allow it.
fn exact_norm(space: &SpaceHandle, f: &FinVec<Rational>) -> Result<Option<Rational>> {
    use SpaceHandle::*;
    if let Some(d) = space.dimension() {
        if f.max_index() > d {
            return Err(domain(f.max_index(), space));
        }
    }
    Ok(match space {
        Tsirelson => Some(tsirelson_norm(f)),
        Lp { p } | FiniteLp { p, .. } if *p == 1.0 => Some(f.l1_norm()),
        Convexify { inner, p } if *p == 1.0 => exact_norm(inner, &f.abs())?,
        DirectSum { outer, .. } | BlockSum { outer, .. } => {
            let blocks = space.split_blocks(f)?;
            let mut entries = Vec::new();
            for j in blocks.touched_blocks() {
                match exact_norm(space.block_space(j)?, &blocks.block(j))? {
                    Some(v) => entries.push((j, v)),
                    None => return Ok(None),
                }
            }
            exact_norm(outer, &FinVec::from_entries(entries)?)?
        }
        Restrict { inner, indices } => exact_norm(inner, &restrict_map(space, indices, f)?)?,
        Dkk(spec) => dkk::dkk_norm_exact(spec, f)?,
        _ => None,
    })
}

fn restrict_map<S: crate::finvec::Scalar>(space: &SpaceHandle, indices: &[usize], f: &FinVec<S>) -> Result<FinVec<S>> {
    if f.max_index() > indices.len() {
        return Err(domain(f.max_index(), space));
    }
    Ok(f.reindex(|n| indices[n - 1]))
}

/// Norm of `f` in `space`, exact where the engine is exact.
pub fn norm(space: &SpaceHandle, f: &FinVec<Rational>) -> Result<Norm> {
    if let Some(q) = exact_norm(space, f)? {
        return Ok(Norm::Exact(q));
    }
    // integer convexification: exact inner value, single float root
    if let SpaceHandle::Convexify { inner, p } = space {
        if p.fract() == 0.0 && *p <= 16.0 {
            if let Some(q) = exact_norm(inner, &f.abs_pow(*p as u32))? {
                return Ok(Norm::Float(rational_to_f64(&q).powf(1.0 / p)));
            }
        }
    }
    norm_f64(space, &f.to_f64()).map(Norm::Float)
}

/// Binary64 norm evaluation for every engine.
pub fn norm_f64(space: &SpaceHandle, f: &FinVec<f64>) -> Result<f64> {
    use SpaceHandle::*;
    if let Some(d) = space.dimension() {
        if f.max_index() > d {
            return Err(domain(f.max_index(), space));
        }
    }
    match space {
        Tsirelson => Ok(tsirelson_norm_f64(f)),
        Lp { p } | FiniteLp { p, .. } => Ok(lp_sum_f64(f.iter().map(|(_, v)| v), *p)),
        Convexify { inner, p } => Ok(norm_f64(inner, &f.abs_powf(*p))?.powf(1.0 / p)),
        DirectSum { outer, .. } | BlockSum { outer, .. } => {
            let blocks = space.split_blocks(f)?;
            let mut entries = Vec::new();
            for j in blocks.touched_blocks() {
                entries.push((j, norm_f64(space.block_space(j)?, &blocks.block(j))?));
            }
            norm_f64(outer, &FinVec::from_entries(entries)?)
        }
        Restrict { inner, indices } => norm_f64(inner, &restrict_map(space, indices, f)?),
        WeightedTrig { lambda, .. } => trig::trig_gram_cached(*lambda, f.max_index().max(1))?.norm(f),
        RotatedTrigSum { a, .. } => RotatedSystem::new(*a, f.max_index().max(1))?.norm(f),
        Dkk(spec) => dkk::dkk_norm_f64(spec, f),
    }
}

/// `| |f|^p |_inner^{1/p}`.
pub fn convexify_norm(inner: &SpaceHandle, p: f64, f: &FinVec<Rational>) -> Result<Norm> {
    norm(&SpaceHandle::convexify(inner.clone(), p)?, f)
}

/// Inner spaces of a block sum.
#[derive(Clone, Copy, Debug)]
pub enum Inners<'a> {
    Uniform(&'a SpaceHandle),
    List(&'a [SpaceHandle]),
}

/// `| (|f_j|_{inner_j})_j |_outer` on block coordinates.
pub fn direct_sum_norm(outer: &SpaceHandle, inners: Inners<'_>, f: &BlockVec<Rational>) -> Result<Norm> {
    let mut exact = Vec::new();
    let mut float = Vec::new();
    let mut all_exact = true;
    for j in f.touched_blocks() {
        let inner = match inners {
            Inners::Uniform(s) => s,
            Inners::List(list) => list.get(j - 1).ok_or_else(|| Error::Domain {
                index: j,
                space: format!("direct sum with {} blocks", list.len()),
            })?,
        };
        let v = norm(inner, &f.block(j))?;
        float.push((j, v.to_f64()));
        match v {
            Norm::Exact(q) => exact.push((j, q)),
            Norm::Float(_) => all_exact = false,
        }
    }
    if all_exact {
        norm(outer, &FinVec::from_entries(exact)?)
    } else {
        norm_f64(outer, &FinVec::from_entries(float)?).map(Norm::Float)
    }
}

/// `k = 2n + j - 2` with `j` in `{1, 2}`.
pub fn square_reindex<S: crate::finvec::Scalar>(f: &FinVec<S>) -> BlockVec<S> {
    BlockVec::from_entries(f.iter().map(|(k, v)| (square_split_index(k), v.clone()))).expect("valid block indices")
}

pub fn square_split_index(k: usize) -> BlockIndex {
    let j = 2 - (k % 2);
    BlockIndex::new(j, (k + 2 - j) / 2)
}

pub fn square_unreindex<S: crate::finvec::Scalar>(f: &BlockVec<S>) -> Result<FinVec<S>> {
    let mut entries = Vec::new();
    for (ix, v) in f.iter() {
        if ix.block > 2 {
            return Err(Error::Domain {
                index: ix.block,
                space: "square (blocks 1 and 2)".into(),
            });
        }
        entries.push((2 * ix.inner + ix.block - 2, v.clone()));
    }
    FinVec::from_entries(entries)
}

/// Norm of the square `X + X`, realised as `X` through the interleaving.
pub fn square_norm(space: &SpaceHandle, f: &BlockVec<Rational>) -> Result<Norm> {
    norm(space, &square_unreindex(f)?)
}

/// `k = n + phi(1) + ... + phi(j-1)` with `1 <= n <= phi(j)`.
pub fn tsirelson_iso_reindex<S: crate::finvec::Scalar>(phi: &GrowthFunction, f: &FinVec<S>) -> Result<BlockVec<S>> {
    let space = SpaceHandle::direct_sum(SpaceHandle::Tsirelson, SpaceHandle::Tsirelson, phi.clone());
    space.split_blocks(f)
}

pub fn tsirelson_iso_unreindex<S: crate::finvec::Scalar>(phi: &GrowthFunction, f: &BlockVec<S>) -> Result<FinVec<S>> {
    let space = SpaceHandle::direct_sum(SpaceHandle::Tsirelson, SpaceHandle::Tsirelson, phi.clone());
    space.flatten_blocks(f)
}
