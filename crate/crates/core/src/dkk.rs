//! DKK spaces `Y[X, S, sigma]` with norm `|Q f|_S + |sum_n v_n^*(f) x_n|_X`,
//! where `P = Id - Q` averages over the blocks of an ordered partition.
//!
//! For the subsymmetric space `S = l_p`, `Lambda_m = m^{1/p}`,
//! `v_n = Lambda_{|s_n|}^{-1} 1_{s_n}` and
//! `v_n^* = (Lambda_{|s_n|} / |s_n|) sum_{j in s_n} e_j^*`.

use std::ops::Range;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finvec::{int, FinVec, Rational};
use crate::spaces::{norm, norm_f64, Norm, SpaceHandle};
use crate::trig::linear_fit;

/// How blocks beyond the stored ones are generated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LengthRule {
    /// `|s_n| = 2^{n-1}`.
    Geometric,
    Constant(usize),
}

impl LengthRule {
    fn length(&self, n: usize) -> usize {
        match self {
            LengthRule::Geometric => 1usize << (n - 1).min(40),
            LengthRule::Constant(k) => *k,
        }
    }
}

/// Partition of the naturals into consecutive integer intervals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderedPartition {
    lengths: Vec<usize>,
    rule: Option<LengthRule>,
}

impl OrderedPartition {
    pub fn from_lengths(lengths: Vec<usize>) -> Result<Self> {
        if lengths.is_empty() || lengths.contains(&0) {
            return Err(Error::param("block lengths must be positive and nonempty"));
        }
        Ok(OrderedPartition { lengths, rule: None })
    }

    /// First `blocks` blocks of `rule`, extended lazily on demand.
    pub fn generated(rule: LengthRule, blocks: usize) -> Result<Self> {
        if rule == LengthRule::Constant(0) {
            return Err(Error::param("constant block length must be positive"));
        }
        Ok(OrderedPartition {
            lengths: (1..=blocks.max(1)).map(|n| rule.length(n)).collect(),
            rule: Some(rule),
        })
    }

    pub fn geometric(blocks: usize) -> Self {
        Self::generated(LengthRule::Geometric, blocks).expect("geometric rule")
    }

    pub fn lengths(&self) -> &[usize] {
        &self.lengths
    }

    pub fn rule(&self) -> Option<LengthRule> {
        self.rule
    }

    pub fn block_count(&self) -> usize {
        self.lengths.len()
    }

    /// Total size of the materialised blocks; `None` when generative.
    pub fn dimension(&self) -> Option<usize> {
        match self.rule {
            Some(_) => None,
            None => Some(self.lengths.iter().sum()),
        }
    }

    /// `M_r = |s_1| + ... + |s_r|`.
    pub fn cumulative(&self, r: usize) -> usize {
        self.lengths[..r.min(self.lengths.len())].iter().sum()
    }

    /// Block `n` (1-based) as the index range `start..end`.
    pub fn block(&self, n: usize) -> Range<usize> {
        let start = self.cumulative(n - 1) + 1;
        start..start + self.lengths[n - 1]
    }

    /// Copy whose materialised blocks cover `1..=max_index`.
    pub fn covering(&self, max_index: usize) -> Result<OrderedPartition> {
        let mut out = self.clone();
        let mut total: usize = out.lengths.iter().sum();
        while total < max_index {
            let rule = self.rule.ok_or_else(|| Error::Domain {
                index: max_index,
                space: format!("ordered partition of total size {total}"),
            })?;
            let next = rule.length(out.lengths.len() + 1);
            out.lengths.push(next);
            total += next;
        }
        Ok(out)
    }

    /// Truncation to the first `r` blocks.
    pub fn truncate(&self, r: usize) -> Result<OrderedPartition> {
        let covered = if r > self.lengths.len() {
            let mut out = self.clone();
            while out.lengths.len() < r {
                let rule = self.rule.ok_or_else(|| Error::param("cannot extend an explicit partition"))?;
                out.lengths.push(rule.length(out.lengths.len() + 1));
            }
            out
        } else {
            self.clone()
        };
        OrderedPartition::from_lengths(covered.lengths[..r].to_vec())
    }
}

/// `Lambda_m = |e_1 + ... + e_m|_S`; `S` must be `l_p` or `l_p^n`.
pub fn lambda_fn(s: &SpaceHandle, m: usize) -> Result<f64> {
    match s {
        SpaceHandle::Lp { p } | SpaceHandle::FiniteLp { p, .. } => Ok((m as f64).powf(1.0 / p)),
        _ => Err(Error::param(format!("{s} is not a supported subsymmetric space"))),
    }
}

/// `Lambda_m` as a rational when it is one (`l_1`).
fn lambda_exact(s: &SpaceHandle, m: usize) -> Option<Rational> {
    match s {
        SpaceHandle::Lp { p } | SpaceHandle::FiniteLp { p, .. } if *p == 1.0 => Some(int(m as i64)),
        _ => None,
    }
}

fn lp_exponent(s: &SpaceHandle) -> Result<f64> {
    match s {
        SpaceHandle::Lp { p } | SpaceHandle::FiniteLp { p, .. } => Ok(*p),
        _ => Err(Error::param(format!("{s} is not a supported subsymmetric space"))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DkkSpec {
    /// Coordinate space of the base basis `X`.
    pub base: SpaceHandle,
    /// Subsymmetric space `S`.
    pub s: SpaceHandle,
    pub sigma: OrderedPartition,
}

impl DkkSpec {
    pub fn new(base: SpaceHandle, s: SpaceHandle, sigma: OrderedPartition) -> Result<Self> {
        let spec = DkkSpec { base, s, sigma };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        lambda_fn(&self.s, 1)?;
        self.base.validate()?;
        self.s.validate()
    }

    pub fn lambda(&self, m: usize) -> f64 {
        lambda_fn(&self.s, m).expect("validated subsymmetric space")
    }

    /// `v_n = Lambda^{-1} 1_{s_n}`.
    pub fn basis_vector(&self, n: usize) -> Result<FinVec<f64>> {
        let sigma = self.sigma.truncate(n)?;
        let block = sigma.block(n);
        let c = 1.0 / self.lambda(block.len());
        Ok(FinVec::from_entries(block.map(|j| (j, c))).expect("positive indices"))
    }

    /// `v_n^*(f)` for every block that meets `1..=max(supp f)`.
    pub fn coefficients_f64(&self, f: &FinVec<f64>) -> Result<Vec<f64>> {
        let sigma = self.sigma.covering(f.max_index())?;
        let mut out = Vec::new();
        for n in 1..=sigma.block_count() {
            let block = sigma.block(n);
            if block.start > f.max_index() {
                break;
            }
            let sum: f64 = block.clone().map(|j| f.get(j)).sum();
            out.push(self.lambda(block.len()) / block.len() as f64 * sum);
        }
        Ok(out)
    }

    fn coefficients_exact(&self, f: &FinVec<Rational>) -> Result<Option<Vec<Rational>>> {
        let sigma = self.sigma.covering(f.max_index())?;
        let mut out = Vec::new();
        for n in 1..=sigma.block_count() {
            let block = sigma.block(n);
            if block.start > f.max_index() {
                break;
            }
            let Some(l) = lambda_exact(&self.s, block.len()) else {
                return Ok(None);
            };
            let sum: Rational = block.clone().map(|j| f.get(j)).fold(Rational::zero(), |a, b| a + b);
            out.push(l / int(block.len() as i64) * sum);
        }
        Ok(Some(out))
    }

    /// `v_k^*(v_n)` as an exact rational: block overlap over `|s_k|`, scaled by
    /// `Lambda_{|s_k|} / Lambda_{|s_n|}`.
    pub fn pairing(&self, k: usize, n: usize) -> Result<Rational> {
        let sigma = self.sigma.truncate(k.max(n))?;
        let (bk, bn) = (sigma.block(k), sigma.block(n));
        let overlap = bk.end.min(bn.end).saturating_sub(bk.start.max(bn.start));
        if overlap == 0 {
            return Ok(Rational::zero());
        }
        let share = Rational::new(BigInt::from(overlap), BigInt::from(bk.len()));
        if bk.len() == bn.len() {
            return Ok(share);
        }
        let scale = self.lambda(bk.len()) / self.lambda(bn.len());
        Ok(share * crate::finvec::f64_to_rational(scale).ok_or_else(|| Error::invariant("non-finite scale"))?)
    }
}

/// Block averages `P f` and the remainder `Q f = f - P f`, exact. The
/// `Lambda` factors of `v_n` and `v_n^*` cancel, so `S` does not enter.
pub fn averaging_projection(sigma: &OrderedPartition, f: &FinVec<Rational>) -> Result<(FinVec<Rational>, FinVec<Rational>)> {
    let sigma = sigma.covering(f.max_index())?;
    let mut entries = Vec::new();
    for n in 1..=sigma.block_count() {
        let block = sigma.block(n);
        if block.start > f.max_index() {
            break;
        }
        let sum: Rational = block.clone().map(|j| f.get(j)).fold(Rational::zero(), |a, b| a + b);
        if sum.is_zero() {
            continue;
        }
        let avg = sum / int(block.len() as i64);
        entries.extend(block.map(|j| (j, avg.clone())));
    }
    let p = FinVec::from_entries(entries)?;
    let q = f.sub(&p);
    Ok((p, q))
}

pub fn averaging_projection_f64(sigma: &OrderedPartition, f: &FinVec<f64>) -> Result<(FinVec<f64>, FinVec<f64>)> {
    let sigma = sigma.covering(f.max_index())?;
    let mut entries = Vec::new();
    for n in 1..=sigma.block_count() {
        let block = sigma.block(n);
        if block.start > f.max_index() {
            break;
        }
        let avg = block.clone().map(|j| f.get(j)).sum::<f64>() / block.len() as f64;
        if avg != 0.0 {
            entries.extend(block.map(|j| (j, avg)));
        }
    }
    let p = FinVec::from_entries(entries)?;
    let q = f.sub(&p);
    Ok((p, q))
}

pub fn dkk_norm_f64(spec: &DkkSpec, f: &FinVec<f64>) -> Result<f64> {
    let (_, q) = averaging_projection_f64(&spec.sigma, f)?;
    let coeffs = spec.coefficients_f64(f)?;
    let base = FinVec::from_dense(&coeffs);
    Ok(norm_f64(&spec.s, &q)? + norm_f64(&spec.base, &base)?)
}

/// Exact value when `Lambda` is rational and both engines are exact.
pub(crate) fn dkk_norm_exact(spec: &DkkSpec, f: &FinVec<Rational>) -> Result<Option<Rational>> {
    let Some(coeffs) = spec.coefficients_exact(f)? else {
        return Ok(None);
    };
    let (_, q) = averaging_projection(&spec.sigma, f)?;
    let (Norm::Exact(a), Norm::Exact(b)) = (norm(&spec.s, &q)?, norm(&spec.base, &FinVec::from_dense(&coeffs))?) else {
        return Ok(None);
    };
    Ok(Some(a + b))
}

pub fn dkk_norm(spec: &DkkSpec, f: &FinVec<Rational>) -> Result<Norm> {
    if let Some(v) = dkk_norm_exact(spec, f)? {
        return Ok(Norm::Exact(v));
    }
    dkk_norm_f64(spec, &f.to_f64()).map(Norm::Float)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ImpEstimate {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub slack: f64,
}

/// `|Q S_A f|_S <= 5 |Q f|_S + 2 (sum_n (Lambda_{|A n s_n|} / Lambda_{|s_n|})^s |v_n^*(f)|^s)^{1/s}`
/// for `S = l_p`, `1 <= s <= p`.
pub fn imp_estimate_check(spec: &DkkSpec, f: &FinVec<f64>, a: &[usize], s: f64) -> Result<ImpEstimate> {
    let p = lp_exponent(&spec.s)?;
    if !(s >= 1.0 && s <= p) {
        return Err(Error::param(format!("need 1 <= s <= p, got s = {s}, p = {p}")));
    }
    let in_a = |j: usize| a.binary_search(&j).is_ok();
    let sa = f.restrict(in_a);
    let (_, q_sa) = averaging_projection_f64(&spec.sigma, &sa)?;
    let (_, q_f) = averaging_projection_f64(&spec.sigma, f)?;
    let lhs = norm_f64(&spec.s, &q_sa)?;
    let coeffs = spec.coefficients_f64(f)?;
    let sigma = spec.sigma.covering(f.max_index())?;
    let mut tail = 0.0;
    for (i, c) in coeffs.iter().enumerate() {
        let block = sigma.block(i + 1);
        let hit = block.clone().filter(|j| in_a(*j)).count();
        if hit == 0 {
            continue;
        }
        let ratio = spec.lambda(hit) / spec.lambda(block.len());
        tail += (ratio * c.abs()).powf(s);
    }
    let rhs = 5.0 * norm_f64(&spec.s, &q_f)? + 2.0 * tail.powf(1.0 / s);
    let holds = lhs <= rhs * (1.0 + 1e-12) + 1e-12;
    Ok(ImpEstimate {
        lhs,
        rhs,
        holds,
        slack: rhs - lhs,
    })
}

/// Largest `|S_{[1,k]} f| / |f|` over `k` for each sample, and the log-log
/// slope of the running maximum against the support size.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PartialSumReport {
    pub dims: Vec<usize>,
    pub max_ratio: Vec<f64>,
    pub slope: f64,
}

pub fn partial_sum_growth(space: &SpaceHandle, samples: &[Vec<FinVec<f64>>], dims: &[usize]) -> Result<PartialSumReport> {
    let mut max_ratio = Vec::with_capacity(dims.len());
    let mut running = 0.0f64;
    for (d, batch) in dims.iter().zip(samples) {
        for f in batch {
            let whole = norm_f64(space, f)?;
            if whole == 0.0 {
                continue;
            }
            for k in 1..=*d {
                let part = norm_f64(space, &f.restrict(|j| j <= k))?;
                running = running.max(part / whole);
            }
        }
        max_ratio.push(running);
    }
    let xs: Vec<f64> = dims.iter().map(|d| (*d as f64).ln()).collect();
    let ys: Vec<f64> = max_ratio.iter().map(|r| r.ln()).collect();
    Ok(PartialSumReport {
        dims: dims.to_vec(),
        slope: linear_fit(&xs, &ys)?.0,
        max_ratio,
    })
}

/// Finite truncation of the alternating composite
/// `(Y^(psi(1)) + l_p^1 + Y^(psi(2)) + l_p^2 + ...)` in the `p`-convexified
/// Tsirelson space, `Y` the DKK space over the rotated system.
#[derive(Clone, Debug)]
pub struct AgBasis {
    pub p: f64,
    pub a: f64,
    pub sigma: OrderedPartition,
    pub jmax: usize,
    pub space: SpaceHandle,
    /// `(block, dimension, is_dkk)` in order.
    pub layout: Vec<(usize, usize, bool)>,
}

impl AgBasis {
    pub fn dimension(&self) -> usize {
        self.layout.iter().map(|(_, d, _)| d).sum()
    }

    /// Flat index range of block `b` (1-based).
    pub fn block_range(&self, b: usize) -> Range<usize> {
        let start: usize = self.layout[..b - 1].iter().map(|(_, d, _)| d).sum::<usize>() + 1;
        start..start + self.layout[b - 1].1
    }

    /// The DKK space of block `2j - 1`.
    pub fn dkk_block(&self, j: usize) -> Result<DkkSpec> {
        match &self.space {
            SpaceHandle::BlockSum { blocks, .. } => match blocks.get(2 * j - 2) {
                Some((SpaceHandle::Dkk(spec), _)) => Ok((**spec).clone()),
                _ => Err(Error::param(format!("no DKK block {j}"))),
            },
            _ => Err(Error::invariant("composite space is not a block sum")),
        }
    }
}

/// `psi(j) = M_j`; requires `max(1/p, 1 - 1/p) <= a < 1`.
pub fn build_ag_basis(p: f64, a: f64, sigma: &OrderedPartition, jmax: usize) -> Result<AgBasis> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::param(format!("p must exceed 1, got {p}")));
    }
    let floor = (1.0 / p).max(1.0 - 1.0 / p);
    if !(a >= floor && a < 1.0) {
        return Err(Error::param(format!("need max(1/p, 1-1/p) = {floor} <= a < 1, got a = {a}")));
    }
    if jmax == 0 {
        return Err(Error::param("jmax must be positive"));
    }
    let mut blocks = Vec::new();
    let mut layout = Vec::new();
    for j in 1..=jmax {
        let sig = sigma.truncate(j)?;
        let psi = sig.cumulative(j);
        let spec = DkkSpec::new(SpaceHandle::rotated(a, j)?, SpaceHandle::lp(p)?, sig)?;
        blocks.push((SpaceHandle::dkk(spec), psi));
        layout.push((2 * j - 1, psi, true));
        blocks.push((SpaceHandle::finite_lp(p, j)?, j));
        layout.push((2 * j, j, false));
    }
    let outer = SpaceHandle::convexify(SpaceHandle::Tsirelson, p)?;
    Ok(AgBasis {
        p,
        a,
        sigma: sigma.clone(),
        jmax,
        space: SpaceHandle::block_sum(outer, blocks)?,
        layout,
    })
}

/// `|S_A f| / |f|` for `f = v_1 + ... + v_r` and `A` the union of the even
/// blocks, in a DKK space over the rotated system. Both sides reduce to the
/// base norms of `1_{[r]}` and its even part.
pub fn dkk_witness_ratio(spec: &DkkSpec, r: usize) -> Result<f64> {
    let sigma = spec.sigma.truncate(r)?;
    let mut whole = Vec::new();
    let mut part = Vec::new();
    for n in 1..=r {
        let v = spec.basis_vector(n)?;
        for (j, c) in v.iter() {
            whole.push((j, *c));
            if n % 2 == 0 {
                part.push((j, *c));
            }
        }
    }
    let local = DkkSpec {
        sigma,
        ..spec.clone()
    };
    let f = FinVec::from_entries(whole)?;
    let g = FinVec::from_entries(part)?;
    Ok(dkk_norm_f64(&local, &g)? / dkk_norm_f64(&local, &f)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finvec::rat;
    use num_traits::One;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn l2_spec(blocks: usize) -> DkkSpec {
        DkkSpec::new(SpaceHandle::lp(2.0).unwrap(), SpaceHandle::lp(2.0).unwrap(), OrderedPartition::geometric(blocks)).unwrap()
    }

    #[test]
    fn lambda_values() {
        let l1 = SpaceHandle::lp(1.0).unwrap();
        let l2 = SpaceHandle::lp(2.0).unwrap();
        assert_eq!(lambda_fn(&l1, 5).unwrap(), 5.0);
        assert_eq!(lambda_fn(&l2, 4).unwrap(), 2.0);
        assert_eq!(lambda_fn(&l2, 1).unwrap(), 1.0);
        assert!(lambda_fn(&SpaceHandle::Tsirelson, 2).is_err());
    }

    #[test]
    fn partition_layout() {
        let s = OrderedPartition::geometric(4);
        assert_eq!(s.lengths(), &[1, 2, 4, 8]);
        assert_eq!(s.block(3), 4..8);
        assert_eq!(s.cumulative(3), 7);
        assert_eq!(s.covering(40).unwrap().block_count(), 6);
        let fixed = OrderedPartition::from_lengths(vec![2, 3]).unwrap();
        assert!(fixed.covering(6).is_err());
        assert!(OrderedPartition::from_lengths(vec![1, 0]).is_err());
    }

    #[test]
    fn projection_examples() {
        let sigma = OrderedPartition::geometric(4);
        let v1 = FinVec::unit(1);
        let (p, q) = averaging_projection(&sigma, &v1).unwrap();
        assert_eq!((p, q.is_zero()), (v1, true));
        let zero_sum = FinVec::from_entries([(2, int(1)), (3, int(-1))]).unwrap();
        let (p, q) = averaging_projection(&sigma, &zero_sum).unwrap();
        assert!(p.is_zero());
        assert_eq!(q, zero_sum);
        let f = FinVec::from_entries([(1, rat(3, 2)), (4, int(2)), (6, int(-7)), (9, rat(1, 3))]).unwrap();
        let (p, q) = averaging_projection(&sigma, &f).unwrap();
        assert_eq!(averaging_projection(&sigma, &p).unwrap().0, p);
        assert!(averaging_projection(&sigma, &q).unwrap().0.is_zero());
        assert_eq!(p.add(&q), f);
    }

    #[test]
    fn biorthogonality_is_exact() {
        let spec = l2_spec(6);
        for k in 1..=6 {
            for n in 1..=6 {
                let expected = if k == n { Rational::one() } else { Rational::zero() };
                assert_eq!(spec.pairing(k, n).unwrap(), expected);
            }
        }
        for n in 1..=5 {
            let v = spec.basis_vector(n).unwrap();
            let c = spec.coefficients_f64(&v).unwrap();
            for (k, value) in c.iter().enumerate() {
                let expected = if k + 1 == n { 1.0 } else { 0.0 };
                assert!((value - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dkk_norm_examples() {
        let spec = l2_spec(5);
        let v1 = spec.basis_vector(1).unwrap();
        assert!((dkk_norm_f64(&spec, &v1).unwrap() - 1.0).abs() < 1e-12);
        let f = FinVec::from_entries([(4, 1.0), (5, -2.0), (6, 1.0)]).unwrap();
        let s_norm = norm_f64(&spec.s, &f).unwrap();
        assert!((dkk_norm_f64(&spec, &f).unwrap() - s_norm).abs() < 1e-12);
        let g = FinVec::from_entries([(2, 0.5), (3, 1.5), (9, -1.0)]).unwrap();
        let scaled = dkk_norm_f64(&spec, &g.scale(&-3.0)).unwrap();
        assert!((scaled - 3.0 * dkk_norm_f64(&spec, &g).unwrap()).abs() < 1e-12);
        let exact = DkkSpec::new(SpaceHandle::Tsirelson, SpaceHandle::lp(1.0).unwrap(), OrderedPartition::geometric(3)).unwrap();
        assert!(dkk_norm(&exact, &FinVec::indicator([2, 5])).unwrap().is_exact());
    }

    #[test]
    fn imp_estimate_examples() {
        let spec = l2_spec(4);
        let f = FinVec::from_entries([(1, 1.0), (2, -0.5), (5, 2.0), (11, 0.25)]).unwrap();
        let empty = imp_estimate_check(&spec, &f, &[], 2.0).unwrap();
        assert!(empty.holds && empty.lhs == 0.0);
        let pf = averaging_projection_f64(&spec.sigma, &f).unwrap().0;
        let all: Vec<usize> = (1..=15).collect();
        let r = imp_estimate_check(&spec, &pf, &all, 2.0).unwrap();
        assert!(r.holds && r.lhs.abs() < 1e-12 && (r.slack - r.rhs).abs() < 1e-12);
        assert!(imp_estimate_check(&spec, &f, &[], 3.0).is_err());
    }

    #[test]
    fn imp_estimate_random() {
        let spec = l2_spec(4);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let f = FinVec::from_entries((1..=15).map(|j| (j, rng.gen_range(-2.0..2.0)))).unwrap();
            let a: Vec<usize> = (1..=15).filter(|_| rng.gen_bool(0.5)).collect();
            assert!(imp_estimate_check(&spec, &f, &a, 2.0).unwrap().holds);
        }
    }

    #[test]
    fn ag_basis_shape() {
        assert!(build_ag_basis(2.0, 0.4, &OrderedPartition::geometric(3), 2).is_err());
        let basis = build_ag_basis(2.0, 0.5, &OrderedPartition::geometric(3), 1).unwrap();
        assert_eq!(basis.layout, vec![(1, 1, true), (2, 1, false)]);
        let basis = build_ag_basis(2.0, 0.5, &OrderedPartition::geometric(3), 3).unwrap();
        assert_eq!(basis.dimension(), 1 + 1 + 3 + 2 + 7 + 3);
        assert_eq!(basis.block_range(3), 3..6);
        let spec = basis.dkk_block(2).unwrap();
        assert_eq!(spec.sigma.lengths(), &[1, 2]);
    }

    #[test]
    fn witness_grows() {
        let spec = DkkSpec::new(SpaceHandle::rotated(0.5, 40).unwrap(), SpaceHandle::lp(2.0).unwrap(), OrderedPartition::geometric(12)).unwrap();
        let small = dkk_witness_ratio(&spec, 4).unwrap();
        let large = dkk_witness_ratio(&spec, 12).unwrap();
        assert!(large > small);
    }
}
