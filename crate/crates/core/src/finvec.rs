//! Finitely supported scalar sequences indexed by positive integers.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Scalars a [`FinVec`] can carry: exact rationals or binary64 floats.
pub trait Scalar:
    Clone + fmt::Debug + PartialOrd + Signed + Send + Sync + 'static
{
    const EXACT: bool;
    fn to_f64(&self) -> f64;
    fn from_i64(v: i64) -> Self;
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }

    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_i64(v: i64) -> Self {
        v as f64
    }
}

/// Float view of a rational that survives numerators and denominators beyond
/// the f64 range.
pub fn rational_to_f64(q: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (q.numer().to_f64(), q.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let shift = q.numer().bits() as i64 - q.denom().bits() as i64;
    let scaled = if shift > 0 {
        q / Rational::from_integer(BigInt::one() << shift as usize)
    } else {
        q * Rational::from_integer(BigInt::one() << (-shift) as usize)
    };
    let base = scaled.numer().to_f64().unwrap_or(f64::NAN)
        / scaled.denom().to_f64().unwrap_or(f64::NAN);
    base * 2f64.powi(shift as i32)
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Serde adapter writing a rational as the string `"p/q"` (or `"p"`).
pub mod rational_str {
    use super::Rational;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(q)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let t = String::deserialize(d)?;
        t.parse().map_err(|_| D::Error::custom(format!("not a rational: {t:?}")))
    }
}

/// Exact rational value of a finite float.
pub fn f64_to_rational(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

/// A finitely supported sequence `(a_n)_{n>=1}`. No stored entry is zero.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct FinVec<S = Rational> {
    entries: BTreeMap<usize, S>,
}

impl<S: Scalar> Default for FinVec<S> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<S: Scalar> fmt::Debug for FinVec<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.entries.iter()).finish()
    }
}

impl<S: Scalar> FinVec<S> {
    pub fn zero() -> Self {
        FinVec {
            entries: BTreeMap::new(),
        }
    }

    /// Builds a vector from `(index, value)` pairs; repeated indices add up.
    pub fn from_entries<I>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, S)>,
    {
        let mut out = FinVec::zero();
        for (n, v) in entries {
            if n == 0 {
                return Err(Error::Domain {
                    index: 0,
                    space: "sequence space (indices start at 1)".into(),
                });
            }
            let cur = out.entries.remove(&n).unwrap_or_else(S::zero);
            let sum = cur + v;
            if !sum.is_zero() {
                out.entries.insert(n, sum);
            }
        }
        Ok(out)
    }

    /// Dense constructor: `values[k]` is the coefficient of index `k + 1`.
    pub fn from_dense(values: &[S]) -> Self {
        let entries = values
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(k, v)| (k + 1, v.clone()))
            .collect();
        FinVec { entries }
    }

    pub fn unit(n: usize) -> Self {
        assert!(n >= 1, "unit vectors are indexed from 1");
        let mut entries = BTreeMap::new();
        entries.insert(n, S::one());
        FinVec { entries }
    }

    /// `1_A`: the indicator sum over `set`.
    pub fn indicator<I: IntoIterator<Item = usize>>(set: I) -> Self {
        let mut entries = BTreeMap::new();
        for n in set {
            assert!(n >= 1, "indices start at 1");
            entries.insert(n, S::one());
        }
        FinVec { entries }
    }

    /// `1_{eps,A}` with sign `(-1)^n` at index `n`.
    pub fn alternating_indicator<I: IntoIterator<Item = usize>>(set: I) -> Self {
        let mut entries = BTreeMap::new();
        for n in set {
            assert!(n >= 1, "indices start at 1");
            let v = if n % 2 == 0 { S::one() } else { -S::one() };
            entries.insert(n, v);
        }
        FinVec { entries }
    }

    /// Signed indicator with an explicit sign pattern.
    pub fn signed_indicator<I: IntoIterator<Item = (usize, bool)>>(set: I) -> Self {
        let mut entries = BTreeMap::new();
        for (n, negative) in set {
            assert!(n >= 1, "indices start at 1");
            entries.insert(n, if negative { -S::one() } else { S::one() });
        }
        FinVec { entries }
    }

    pub fn get(&self, n: usize) -> S {
        self.entries.get(&n).cloned().unwrap_or_else(S::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &S)> + '_ {
        self.entries.iter().map(|(n, v)| (*n, v))
    }

    pub fn support(&self) -> Vec<usize> {
        self.entries.keys().copied().collect()
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_index(&self) -> usize {
        self.entries.keys().next_back().copied().unwrap_or(0)
    }

    pub fn min_index(&self) -> usize {
        self.entries.keys().next().copied().unwrap_or(0)
    }

    pub fn abs(&self) -> Self {
        FinVec {
            entries: self.entries.iter().map(|(n, v)| (*n, v.abs())).collect(),
        }
    }

    pub fn scale(&self, c: &S) -> Self {
        if c.is_zero() {
            return FinVec::zero();
        }
        FinVec {
            entries: self
                .entries
                .iter()
                .map(|(n, v)| (*n, v.clone() * c.clone()))
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (n, v) in &other.entries {
            let cur = out.entries.remove(n).unwrap_or_else(S::zero);
            let sum = cur + v.clone();
            if !sum.is_zero() {
                out.entries.insert(*n, sum);
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-S::one()))
    }

    /// Coordinate projection `S_A(f)`.
    pub fn restrict(&self, keep: impl Fn(usize) -> bool) -> Self {
        FinVec {
            entries: self
                .entries
                .iter()
                .filter(|(n, _)| keep(**n))
                .map(|(n, v)| (*n, v.clone()))
                .collect(),
        }
    }

    /// Moves every entry from index `n` to `map(n)`; `map` must be injective
    /// on the support.
    pub fn reindex(&self, map: impl Fn(usize) -> usize) -> Self {
        let entries: BTreeMap<usize, S> =
            self.entries.iter().map(|(n, v)| (map(*n), v.clone())).collect();
        debug_assert_eq!(entries.len(), self.entries.len(), "reindex map not injective");
        FinVec { entries }
    }

    /// Dense coefficient array `[a_1, ..., a_len]`.
    pub fn to_dense(&self, len: usize) -> Vec<S> {
        let mut out = vec![S::zero(); len];
        for (n, v) in &self.entries {
            if *n <= len {
                out[n - 1] = v.clone();
            }
        }
        out
    }

    pub fn to_f64(&self) -> FinVec<f64> {
        FinVec {
            entries: self
                .entries
                .iter()
                .map(|(n, v)| (*n, v.to_f64()))
                .filter(|(_, v)| *v != 0.0)
                .collect(),
        }
    }

    /// Largest absolute coefficient.
    pub fn sup_norm(&self) -> S {
        self.entries
            .values()
            .map(|v| v.abs())
            .fold(S::zero(), |acc, v| if v > acc { v } else { acc })
    }

    pub fn l1_norm(&self) -> S {
        self.entries
            .values()
            .fold(S::zero(), |acc, v| acc + v.abs())
    }
}

impl FinVec<Rational> {
    /// Componentwise power `|f|^k` for a positive integer `k`.
    pub fn abs_pow(&self, k: u32) -> Self {
        FinVec {
            entries: self
                .entries
                .iter()
                .map(|(n, v)| (*n, num_traits::pow(v.abs(), k as usize)))
                .collect(),
        }
    }
}

impl FinVec<f64> {
    pub fn abs_powf(&self, p: f64) -> Self {
        FinVec {
            entries: self
                .entries
                .iter()
                .map(|(n, v)| (*n, v.abs().powf(p)))
                .filter(|(_, v)| *v != 0.0)
                .collect(),
        }
    }
}

/// A coordinate of a direct sum: block `j` and position `n` inside it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BlockIndex {
    pub block: usize,
    pub inner: usize,
}

impl BlockIndex {
    pub fn new(block: usize, inner: usize) -> Self {
        BlockIndex { block, inner }
    }
}

/// Finitely supported vector over the block index set `U_j {j} x N_j`.
#[derive(Clone, PartialEq, Debug)]
pub struct BlockVec<S = Rational> {
    entries: BTreeMap<BlockIndex, S>,
}

impl<S: Scalar> Default for BlockVec<S> {
    fn default() -> Self {
        BlockVec {
            entries: BTreeMap::new(),
        }
    }
}

impl<S: Scalar> BlockVec<S> {
    pub fn from_entries<I>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (BlockIndex, S)>,
    {
        let mut out = BlockVec::default();
        for (ix, v) in entries {
            if ix.block == 0 || ix.inner == 0 {
                return Err(Error::Domain {
                    index: 0,
                    space: "block index set (blocks and positions start at 1)".into(),
                });
            }
            let cur = out.entries.remove(&ix).unwrap_or_else(S::zero);
            let sum = cur + v;
            if !sum.is_zero() {
                out.entries.insert(ix, sum);
            }
        }
        Ok(out)
    }

    pub fn get(&self, ix: BlockIndex) -> S {
        self.entries.get(&ix).cloned().unwrap_or_else(S::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (BlockIndex, &S)> + '_ {
        self.entries.iter().map(|(k, v)| (*k, v))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Blocks with at least one nonzero entry, in increasing order.
    pub fn touched_blocks(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.entries.keys().map(|ix| ix.block).collect();
        out.dedup();
        out
    }

    /// The component in block `j`, as a vector on positions `1..`.
    pub fn block(&self, j: usize) -> FinVec<S> {
        let lo = BlockIndex::new(j, 1);
        let hi = BlockIndex::new(j, usize::MAX);
        FinVec {
            entries: self
                .entries
                .range(lo..=hi)
                .map(|(ix, v)| (ix.inner, v.clone()))
                .collect(),
        }
    }

    pub fn to_f64(&self) -> BlockVec<f64> {
        BlockVec {
            entries: self
                .entries
                .iter()
                .map(|(k, v)| (*k, v.to_f64()))
                .filter(|(_, v)| *v != 0.0)
                .collect(),
        }
    }
}
