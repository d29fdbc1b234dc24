//! The thresholding greedy algorithm and basis diagnostics.
//!
//! Every engine here represents elements by their coefficients in the basis
//! under study, so `x_n^*(f)` is the `n`-th entry of `f` and `x_n = e_n`.

use std::cmp::Ordering;

use nalgebra::DMatrix;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finvec::{rat, FinVec, Rational, Scalar};
use crate::spaces::{norm, norm_f64, Norm, SpaceHandle};
use crate::trig::{linear_fit, projection_norm, RotatedSystem};

/// Exhaustive indicator search only below these sizes.
pub const EXHAUSTIVE_M: usize = 12;
pub const EXHAUSTIVE_WINDOW: usize = 24;
/// Cap on the number of subsets any exhaustive search may visit.
pub const SUBSET_BUDGET: u64 = 300_000;
pub const GAP_SUPPORT_LIMIT: usize = 20;
pub const GREEDY_GAP_BUDGET: u64 = 5_000;
pub const COND_EXHAUSTIVE_M: usize = 14;

/// A basis given through its coordinate space.
#[derive(Clone, Debug)]
pub struct BasisHandle {
    pub space: SpaceHandle,
}

impl BasisHandle {
    pub fn new(space: SpaceHandle) -> Result<Self> {
        space.validate()?;
        Ok(BasisHandle { space })
    }

    pub fn norm(&self, f: &FinVec<Rational>) -> Result<Norm> {
        norm(&self.space, f)
    }

    pub fn norm_f64(&self, f: &FinVec<f64>) -> Result<f64> {
        norm_f64(&self.space, f)
    }

    /// `x_n^*(f)`.
    pub fn coefficient<S: Scalar>(&self, f: &FinVec<S>, n: usize) -> S {
        f.get(n)
    }

    pub fn dimension(&self) -> Option<usize> {
        self.space.dimension()
    }

    fn window_ok(&self, window: usize) -> Result<()> {
        match self.dimension() {
            Some(d) if d < window => Err(Error::Domain {
                index: window,
                space: self.space.to_string(),
            }),
            _ => Ok(()),
        }
    }
}

/// `rho`: decreasing modulus, ties broken by the smaller index.
pub fn greedy_ordering<S: Scalar>(f: &FinVec<S>) -> Vec<usize> {
    let mut entries: Vec<(usize, S)> = f.iter().map(|(i, v)| (i, v.abs())).collect();
    entries.sort_by(|(i, a), (j, b)| b.partial_cmp(a).unwrap_or(Ordering::Equal).then(i.cmp(j)));
    entries.into_iter().map(|(i, _)| i).collect()
}

/// `G_m(f)`, the first `m` greedy terms.
pub fn greedy_sum<S: Scalar>(f: &FinVec<S>, m: usize) -> FinVec<S> {
    let keep: Vec<usize> = {
        let mut k: Vec<usize> = greedy_ordering(f).into_iter().take(m).collect();
        k.sort_unstable();
        k
    };
    f.restrict(|i| keep.binary_search(&i).is_ok())
}

fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc.saturating_mul((n - i) as u64) / (i as u64 + 1))
}

/// Calls `visit` on every `k`-subset of `items` in lexicographic order.
fn for_each_subset(items: &[usize], k: usize, mut visit: impl FnMut(&[usize]) -> Result<()>) -> Result<()> {
    let n = items.len();
    if k > n {
        return Ok(());
    }
    let mut idx: Vec<usize> = (0..k).collect();
    let mut buf = vec![0usize; k];
    loop {
        for (b, i) in buf.iter_mut().zip(&idx) {
            *b = items[*i];
        }
        visit(&buf)?;
        let Some(pos) = (0..k).rev().find(|&p| idx[p] != p + n - k) else {
            return Ok(());
        };
        idx[pos] += 1;
        for q in pos + 1..k {
            idx[q] = idx[q - 1] + 1;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    Exhaustive,
    LowerBound,
}

/// Largest and smallest `|1_A|` over the searched sets with `|A| = k`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SizeExtremes {
    pub size: usize,
    pub max: Norm,
    pub argmax: Vec<usize>,
    pub min: Norm,
    pub argmin: Vec<usize>,
    pub mode: SearchMode,
}

/// Candidate sets when exhaustive search is out of budget: prefixes, shifted
/// blocks, arithmetic progressions and seeded random sets.
fn structured_candidates<R: Rng>(m: usize, window: usize, random: usize, rng: &mut R) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (0..=window - m).map(|k| (k + 1..=k + m).collect()).collect();
    for step in 2..=window / m.max(1) {
        for start in 1..=step {
            let set: Vec<usize> = (0..m).map(|i| start + i * step).collect();
            if set[m - 1] <= window {
                out.push(set);
            }
        }
    }
    let all: Vec<usize> = (1..=window).collect();
    for _ in 0..random {
        let mut s: Vec<usize> = all.choose_multiple(rng, m).copied().collect();
        s.sort_unstable();
        out.push(s);
    }
    out
}

/// Per-size extremes of indicator norms over subsets of `[1, window]`.
pub fn indicator_extremes<R: Rng>(basis: &BasisHandle, mmax: usize, window: usize, rng: &mut R) -> Result<Vec<SizeExtremes>> {
    if mmax == 0 || window < 2 * mmax {
        return Err(Error::param(format!("window {window} must be at least 2 mmax = {}", 2 * mmax)));
    }
    basis.window_ok(window)?;
    let items: Vec<usize> = (1..=window).collect();
    let mut out = Vec::with_capacity(mmax);
    for m in 1..=mmax {
        let exhaustive = m <= EXHAUSTIVE_M && window <= EXHAUSTIVE_WINDOW && binomial(window, m) <= SUBSET_BUDGET;
        let mut best: Option<(Norm, Vec<usize>)> = None;
        let mut worst: Option<(Norm, Vec<usize>)> = None;
        let mut visit = |set: &[usize]| -> Result<()> {
            let v = basis.norm(&FinVec::indicator(set.iter().copied()))?;
            if best.as_ref().is_none_or(|(b, _)| v > *b) {
                best = Some((v.clone(), set.to_vec()));
            }
            if worst.as_ref().is_none_or(|(w, _)| v < *w) {
                worst = Some((v, set.to_vec()));
            }
            Ok(())
        };
        if exhaustive {
            for_each_subset(&items, m, &mut visit)?;
        } else {
            for set in structured_candidates(m, window, 64, rng) {
                visit(&set)?;
            }
        }
        let (max, argmax) = best.expect("at least one candidate");
        let (min, argmin) = worst.expect("at least one candidate");
        out.push(SizeExtremes {
            size: m,
            max,
            argmax,
            min,
            argmin,
            mode: if exhaustive { SearchMode::Exhaustive } else { SearchMode::LowerBound },
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FundamentalFunction {
    /// `phi(m)` for `m = 1..=mmax`.
    pub values: Vec<Norm>,
    pub modes: Vec<SearchMode>,
}

/// `phi(m) = sup_{|A| <= m} |1_A|`, exact on subsets of the window when in
/// budget and a lower bound otherwise.
pub fn fundamental_function<R: Rng>(basis: &BasisHandle, mmax: usize, window: usize, rng: &mut R) -> Result<FundamentalFunction> {
    Ok(fundamental_from(&indicator_extremes(basis, mmax, window, rng)?))
}

pub fn fundamental_from(ext: &[SizeExtremes]) -> FundamentalFunction {
    let mut values: Vec<Norm> = Vec::with_capacity(ext.len());
    let mut modes = Vec::with_capacity(ext.len());
    let mut mode = SearchMode::Exhaustive;
    for e in ext {
        let v = match values.last() {
            Some(prev) if *prev > e.max => prev.clone(),
            _ => e.max.clone(),
        };
        values.push(v);
        if e.mode == SearchMode::LowerBound {
            mode = SearchMode::LowerBound;
        }
        modes.push(mode);
    }
    FundamentalFunction { values, modes }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Democracy {
    pub delta: Norm,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    /// Running `Delta` over sizes `<= m`.
    pub by_m: Vec<Norm>,
    pub mode: SearchMode,
}

/// `Delta = max |1_A| / |1_B|` over `|A| <= |B| <= mmax`.
pub fn democracy_ratio<R: Rng>(basis: &BasisHandle, mmax: usize, window: usize, rng: &mut R) -> Result<Democracy> {
    Ok(democracy_from(&indicator_extremes(basis, mmax, window, rng)?))
}

pub fn democracy_from(ext: &[SizeExtremes]) -> Democracy {
    let mut best = (Norm::Exact(Rational::one()), ext[0].argmax.clone(), ext[0].argmin.clone());
    let mut by_m = Vec::with_capacity(ext.len());
    let mut mode = SearchMode::Exhaustive;
    for (l, eb) in ext.iter().enumerate() {
        for ea in &ext[..=l] {
            let r = ea.max.ratio(&eb.min);
            if r > best.0 {
                best = (r, ea.argmax.clone(), eb.argmin.clone());
            }
        }
        if eb.mode == SearchMode::LowerBound {
            mode = SearchMode::LowerBound;
        }
        by_m.push(best.0.clone());
    }
    Democracy {
        delta: best.0,
        a: best.1,
        b: best.2,
        by_m,
        mode,
    }
}

/// `max |G_m f| / |f|` over the samples and `m`.
pub fn quasi_greedy_ratio(basis: &BasisHandle, samples: &[FinVec<Rational>], ms: &[usize]) -> Result<Norm> {
    let mut best = Norm::Exact(Rational::zero());
    for f in samples {
        if f.is_zero() {
            continue;
        }
        let whole = basis.norm(f)?;
        for &m in ms {
            let r = basis.norm(&greedy_sum(f, m))?.ratio(&whole);
            if r > best {
                best = r;
            }
        }
    }
    Ok(best)
}

fn gap_subsets(support: usize, sizes: impl Iterator<Item = usize>, budget: u64) -> Result<()> {
    if support > GAP_SUPPORT_LIMIT {
        return Err(Error::Size {
            what: "support for exhaustive projection search",
            limit: GAP_SUPPORT_LIMIT,
            got: support,
        });
    }
    let total: u64 = sizes.map(|k| binomial(support, k)).sum();
    if total > budget {
        return Err(Error::Size {
            what: "projection candidates",
            limit: budget as usize,
            got: total.min(usize::MAX as u64) as usize,
        });
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GapReport {
    pub numerator: Norm,
    pub denominator: Norm,
    pub ratio: Norm,
    pub best_set: Vec<usize>,
}

/// `|f - G_m f|` over `min_{|A| <= m} |f - P_A f|`. Sets off the support only
/// remove zeros, so `A` ranges over subsets of `supp f`.
pub fn almost_greedy_gap(basis: &BasisHandle, f: &FinVec<Rational>, m: usize) -> Result<GapReport> {
    let support = f.support();
    let top = m.min(support.len());
    gap_subsets(support.len(), 0..=top, SUBSET_BUDGET)?;
    let numerator = basis.norm(&f.sub(&greedy_sum(f, m)))?;
    let mut best: Option<(Norm, Vec<usize>)> = None;
    for k in 0..=top {
        for_each_subset(&support, k, |set| {
            let rest = f.restrict(|i| set.binary_search(&i).is_err());
            let v = basis.norm(&rest)?;
            if best.as_ref().is_none_or(|(b, _)| v < *b) {
                best = Some((v, set.to_vec()));
            }
            Ok(())
        })?;
    }
    let (denominator, best_set) = best.expect("empty set is a candidate");
    Ok(GapReport {
        ratio: numerator.ratio(&denominator),
        numerator,
        denominator,
        best_set,
    })
}

/// Coordinate descent on `alpha -> |f - sum_{n in A} alpha_n e_n|`, started at
/// the projection. Returns the residual norm reached, an upper bound for the
/// infimum.
fn descend(basis: &BasisHandle, f: &FinVec<f64>, set: &[usize], sweeps: usize) -> Result<f64> {
    let scale = f.sup_norm().max(1e-300);
    let mut residual = f.restrict(|i| set.binary_search(&i).is_err());
    let mut value = basis.norm_f64(&residual)?;
    for _ in 0..sweeps {
        let before = value;
        for &n in set {
            let base = residual.get(n);
            let eval = |t: f64| -> Result<f64> {
                let mut r: Vec<(usize, f64)> = residual.iter().filter(|(i, _)| *i != n).map(|(i, v)| (i, *v)).collect();
                r.push((n, t));
                basis.norm_f64(&FinVec::from_entries(r)?)
            };
            let (mut lo, mut hi) = (base - 2.0 * scale, base + 2.0 * scale);
            let g = 0.5 * (5f64.sqrt() - 1.0);
            let (mut x1, mut x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
            let (mut f1, mut f2) = (eval(x1)?, eval(x2)?);
            for _ in 0..60 {
                if f1 <= f2 {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - g * (hi - lo);
                    f1 = eval(x1)?;
                } else {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + g * (hi - lo);
                    f2 = eval(x2)?;
                }
            }
            let (t, ft) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
            if ft < value {
                value = ft;
                let mut r: Vec<(usize, f64)> = residual.iter().filter(|(i, _)| *i != n).map(|(i, v)| (i, *v)).collect();
                if t != 0.0 {
                    r.push((n, t));
                }
                residual = FinVec::from_entries(r)?;
            }
        }
        if before - value <= 1e-10 * before.max(1e-300) {
            break;
        }
    }
    Ok(value)
}

/// `|f - G_m f|` over an upper bound for `inf{|f - sum_{n in A} a_n x_n| : |A| = m}`:
/// exhaustive over `A` inside the support, coordinate descent over the
/// coefficients. The ratio is therefore a lower bound for the greedy constant.
pub fn greedy_gap(basis: &BasisHandle, f: &FinVec<Rational>, m: usize, sweeps: usize) -> Result<GapReport> {
    let support = f.support();
    let k = m.min(support.len());
    gap_subsets(support.len(), std::iter::once(k), GREEDY_GAP_BUDGET)?;
    let ff = f.to_f64();
    let numerator = Norm::Float(basis.norm_f64(&ff.sub(&greedy_sum(&ff, m)))?);
    let mut best: Option<(f64, Vec<usize>)> = None;
    for_each_subset(&support, k, |set| {
        let v = descend(basis, &ff, set, sweeps)?;
        if best.as_ref().is_none_or(|(b, _)| v < *b) {
            best = Some((v, set.to_vec()));
        }
        Ok(())
    })?;
    let (den, best_set) = best.expect("at least one subset");
    let denominator = Norm::Float(den);
    Ok(GapReport {
        ratio: numerator.ratio(&denominator),
        numerator,
        denominator,
        best_set,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CondMode {
    Exhaustive,
    Witness,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Exact operator norms from the Gram matrix.
    Gram,
    /// Witness lower bound matched by the lattice upper bound 1.
    Lattice,
    /// Witness lower bound only.
    Witness,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CondParams {
    pub m: usize,
    pub k: Norm,
    pub k_tilde: Norm,
    pub k_exact: bool,
    pub k_tilde_exact: bool,
    pub provenance: Provenance,
}

fn sign_patterns(m: usize) -> Vec<FinVec<Rational>> {
    (0u32..1 << m)
        .map(|mask| FinVec::from_entries((1..=m).map(|j| (j, if mask >> (j - 1) & 1 == 1 { -Rational::one() } else { Rational::one() }))).expect("positive indices"))
        .collect()
}

fn witness_vectors<R: Rng>(m: usize, offset: usize, rng: &mut R, exhaustive: bool) -> Vec<FinVec<Rational>> {
    let shift = |f: FinVec<Rational>| f.reindex(|i| i + offset);
    let mut out: Vec<FinVec<Rational>> = (1..=m).map(|j| shift(FinVec::unit(j))).collect();
    if exhaustive && m <= 8 {
        out.extend(sign_patterns(m).into_iter().map(shift));
    } else {
        out.push(shift(FinVec::indicator(1..=m)));
        out.push(shift(FinVec::alternating_indicator(1..=m)));
        for _ in 0..32 {
            let f = FinVec::from_entries((1..=m).filter_map(|j| {
                let v = rng.gen_range(-6i64..=6);
                (v != 0).then(|| (j, rat(v, rng.gen_range(1..4))))
            }))
            .expect("positive indices");
            if !f.is_zero() {
                out.push(shift(f));
            }
        }
    }
    out
}

fn witness_sets<R: Rng>(m: usize, offset: usize, rng: &mut R, exhaustive: bool) -> Vec<Vec<usize>> {
    let items: Vec<usize> = (1 + offset..=m + offset).collect();
    let mut out = Vec::new();
    if exhaustive {
        for k in 1..=m {
            let _ = for_each_subset(&items, k, |s| {
                out.push(s.to_vec());
                Ok(())
            });
        }
    } else {
        out.push(items.iter().copied().filter(|i| i % 2 == 0).collect());
        out.push(items.iter().copied().filter(|i| i % 2 == 1).collect());
        out.push(items[..m.div_ceil(2)].to_vec());
        for _ in 0..32 {
            out.push(items.iter().copied().filter(|_| rng.gen_bool(0.5)).collect());
        }
        out.retain(|s| !s.is_empty());
    }
    out
}

fn witness_sup(basis: &BasisHandle, fs: &[FinVec<Rational>], sets: &[Vec<usize>]) -> Result<Norm> {
    let mut best = Norm::Exact(Rational::zero());
    for f in fs {
        let whole = basis.norm(f)?;
        if whole.is_zero() {
            continue;
        }
        for a in sets {
            let part = f.restrict(|i| a.binary_search(&i).is_ok());
            let r = basis.norm(&part)?.ratio(&whole);
            if r > best {
                best = r;
            }
        }
    }
    Ok(best)
}

fn max_norm(a: Norm, b: Norm) -> Norm {
    if b > a {
        b
    } else {
        a
    }
}

/// `k_m = sup_{|A| <= m} |S_A|` and `k~_m = sup{|S_A f| : |f| = 1, supp f in [m]}`.
///
/// Gram engines give `k~_m` exactly (all `A` inside `[m]`); `k_m` is then
/// bounded below by the same sets acting on a larger span. Lattice engines
/// certify both as 1. Everything else reports witness lower bounds.
pub fn cond_params<R: Rng>(basis: &BasisHandle, m: usize, mode: CondMode, rng: &mut R) -> Result<CondParams> {
    if m == 0 {
        return Err(Error::param("m must be positive"));
    }
    let exhaustive = mode == CondMode::Exhaustive;
    if exhaustive && m > COND_EXHAUSTIVE_M {
        return Err(Error::Size {
            what: "exhaustive conditionality search",
            limit: COND_EXHAUSTIVE_M,
            got: m,
        });
    }
    basis.window_ok(m)?;
    if exhaustive {
        if let Some(dim) = basis.dimension().filter(|_| matches!(basis.space, SpaceHandle::WeightedTrig { .. } | SpaceHandle::RotatedTrigSum { .. })) {
            return cond_params_gram(basis, m, dim);
        }
    }
    let fs = witness_vectors(m, 0, rng, exhaustive);
    let sets = witness_sets(m, 0, rng, exhaustive);
    let k_tilde = witness_sup(basis, &fs, &sets)?;
    // k_m may also use sets and vectors beyond [m]
    let wide = match basis.dimension() {
        Some(d) if d < 2 * m => Norm::Exact(Rational::zero()),
        _ => {
            let fs2 = witness_vectors(m, m, rng, false);
            let sets2 = witness_sets(m, m, rng, false);
            witness_sup(basis, &fs2, &sets2)?
        }
    };
    let k = max_norm(k_tilde.clone(), wide);
    if basis.space.is_unconditional() {
        let one = Norm::Exact(Rational::one());
        if k > one {
            return Err(Error::invariant(format!("coordinate projection of norm {k} on a lattice engine")));
        }
        return Ok(CondParams {
            m,
            k,
            k_tilde,
            k_exact: true,
            k_tilde_exact: true,
            provenance: Provenance::Lattice,
        });
    }
    Ok(CondParams {
        m,
        k,
        k_tilde,
        k_exact: false,
        k_tilde_exact: false,
        provenance: Provenance::Witness,
    })
}

fn cond_params_gram(basis: &BasisHandle, m: usize, dim: usize) -> Result<CondParams> {
    let small = basis.space.gram(m)?.expect("Gram engine");
    let span = dim.min(4 * m + 2).max(m);
    let large = basis.space.gram(span)?.expect("Gram engine");
    let items: Vec<usize> = (1..=m).collect();
    let (mut kt, mut k) = (0.0f64, 0.0f64);
    let mut visit = |set: &[usize]| -> Result<()> {
        kt = kt.max(projection_norm(&small, set)?);
        k = k.max(projection_norm(&large, set)?);
        Ok(())
    };
    for size in 1..=m {
        for_each_subset(&items, size, &mut visit)?;
    }
    Ok(CondParams {
        m,
        k: Norm::Float(k.max(kt)),
        k_tilde: Norm::Float(kt),
        k_exact: false,
        k_tilde_exact: true,
        provenance: Provenance::Gram,
    })
}

/// `|S_A|` on the first `n` coordinates of a Gram engine.
pub fn gram_projection_norm(gram: &DMatrix<f64>, set: &[usize]) -> Result<f64> {
    projection_norm(gram, set)
}

/// `|1_{eps, B_m}| / |1_{B_m}|` in the rotated system, `B_m = [1, 4m+2]`,
/// `eps_k = (-1)^k`.
pub fn rotated_witness_ratio(system: &RotatedSystem, m: usize) -> Result<f64> {
    let n = 4 * m + 2;
    if n > system.dim {
        return Err(Error::Domain {
            index: n,
            space: format!("rotated system of dimension {}", system.dim),
        });
    }
    let ones = vec![1.0; n];
    let signs: Vec<f64> = (1..=n).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 }).collect();
    Ok(system.norm_dense(&signs) / system.norm_dense(&ones))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WitnessGrowth {
    pub a: f64,
    pub points: Vec<(usize, f64)>,
    pub slope: f64,
}

/// Log-log slope of the rotated witness ratio over `m` in `[mmin, mmax]`.
pub fn rotated_witness_growth(a: f64, mmin: usize, mmax: usize) -> Result<WitnessGrowth> {
    if mmin == 0 || mmax <= mmin {
        return Err(Error::param("need 0 < mmin < mmax"));
    }
    let system = RotatedSystem::new(a, 4 * mmax + 2)?;
    let points = (mmin..=mmax).map(|m| Ok((m, rotated_witness_ratio(&system, m)?))).collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = points.iter().map(|(m, _)| (*m as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, r)| r.ln()).collect();
    Ok(WitnessGrowth {
        a,
        slope: linear_fit(&xs, &ys)?.0,
        points,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegularityFit {
    /// Log-log slope of `phi`.
    pub exponent: f64,
    pub alpha: f64,
    /// Least `C` with `C phi(mn) >= m^alpha phi(n)` on the data.
    pub lrp_constant: f64,
    pub beta: f64,
    /// Least `C` with `phi(n) <= C (n/m)^beta phi(m)` on the data.
    pub urp_constant: f64,
    /// LRP needs `alpha > 0`.
    pub lrp_ok: bool,
    /// URP needs `beta < 1`.
    pub urp_ok: bool,
}

/// Power-type regularity certificates for `phi(1..=len)`.
pub fn regularity_fit(phi: &[f64]) -> Result<RegularityFit> {
    if phi.len() < 8 {
        return Err(Error::Fit(format!("need at least 8 values, got {}", phi.len())));
    }
    if phi.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::Fit("values must be positive and finite".into()));
    }
    let xs: Vec<f64> = (1..=phi.len()).map(|m| (m as f64).ln()).collect();
    let ys: Vec<f64> = phi.iter().map(|v| v.ln()).collect();
    let exponent = linear_fit(&xs, &ys)?.0;
    let (alpha, beta) = (exponent, exponent);
    let len = phi.len();
    let mut lrp: f64 = 1.0;
    let mut urp: f64 = 1.0;
    for m in 1..=len {
        for n in 1..=len / m {
            lrp = lrp.max((m as f64).powf(alpha) * phi[n - 1] / phi[m * n - 1]);
        }
        for n in m..=len {
            urp = urp.max(phi[n - 1] / ((n as f64 / m as f64).powf(beta) * phi[m - 1]));
        }
    }
    Ok(RegularityFit {
        exponent,
        alpha,
        lrp_constant: lrp,
        beta,
        urp_constant: urp,
        lrp_ok: alpha > 1e-9,
        urp_ok: beta < 1.0 - 1e-6,
    })
}

/// One row per `m`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GreedyRow {
    pub m: usize,
    pub fundamental: f64,
    pub fundamental_exact: Option<String>,
    pub democracy: f64,
    pub quasi_greedy: f64,
    pub almost_greedy: f64,
    pub greedy: f64,
    pub k: f64,
    pub k_tilde: f64,
    pub indicator_mode: SearchMode,
    pub cond_provenance: Provenance,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GreedyReport {
    pub space: String,
    pub window: usize,
    pub samples: usize,
    pub rows: Vec<GreedyRow>,
    pub regularity: Option<RegularityFit>,
}

impl GreedyReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row).map_err(|e| Error::invariant(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::invariant(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Structural checks: `phi` nondecreasing, ratios at least 1, `k~ <= k`.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let tol = 1e-12;
        for w in self.rows.windows(2) {
            if w[1].fundamental + tol < w[0].fundamental {
                out.push(format!("phi decreases at m = {}", w[1].m));
            }
        }
        for r in &self.rows {
            if r.democracy < 1.0 - tol {
                out.push(format!("democracy ratio below 1 at m = {}", r.m));
            }
            if r.almost_greedy < 1.0 - tol || r.greedy < 1.0 - tol {
                out.push(format!("greedy gap below 1 at m = {}", r.m));
            }
            if r.k_tilde > r.k * (1.0 + 1e-12) + tol {
                out.push(format!("k~ exceeds k at m = {}", r.m));
            }
        }
        out
    }
}

/// Random sample with support in `[1, window]` and small rational entries.
pub fn random_rational_vector<R: Rng>(window: usize, density: f64, rng: &mut R) -> FinVec<Rational> {
    loop {
        let f = FinVec::from_entries((1..=window).filter_map(|j| {
            if !rng.gen_bool(density) {
                return None;
            }
            let v = rng.gen_range(-12i64..=12);
            (v != 0).then(|| (j, rat(v, rng.gen_range(1..5))))
        }))
        .expect("positive indices");
        if !f.is_zero() {
            return f;
        }
    }
}

/// All diagnostics for `m = 1..=mmax`.
pub fn greedy_report<R: Rng>(basis: &BasisHandle, mmax: usize, window: usize, samples: usize, rng: &mut R) -> Result<GreedyReport> {
    let ext = indicator_extremes(basis, mmax, window, rng)?;
    let phi = fundamental_from(&ext);
    let dem = democracy_from(&ext);
    let gap_window = window.min(10);
    let vectors: Vec<FinVec<Rational>> = (0..samples).map(|_| random_rational_vector(gap_window, 0.7, rng)).collect();
    let mut rows = Vec::with_capacity(mmax);
    for m in 1..=mmax {
        let qg = quasi_greedy_ratio(basis, &vectors, &[m])?;
        let mut ag = 1.0f64;
        let mut gg = 1.0f64;
        for f in vectors.iter().take(samples.min(8)) {
            ag = ag.max(almost_greedy_gap(basis, f, m)?.ratio.to_f64());
            if f.support_len() <= 8 {
                gg = gg.max(greedy_gap(basis, f, m, 8)?.ratio.to_f64());
            }
        }
        let cond_mode = if m <= 6 { CondMode::Exhaustive } else { CondMode::Witness };
        let cp = match basis.dimension() {
            Some(d) if d < m => None,
            _ => Some(cond_params(basis, m, cond_mode, rng)?),
        };
        rows.push(GreedyRow {
            m,
            fundamental: phi.values[m - 1].to_f64(),
            fundamental_exact: phi.values[m - 1].exact().map(|q| q.to_string()),
            democracy: dem.by_m[m - 1].to_f64(),
            quasi_greedy: qg.to_f64(),
            almost_greedy: ag,
            greedy: gg.max(ag),
            k: cp.as_ref().map_or(f64::NAN, |c| c.k.to_f64()),
            k_tilde: cp.as_ref().map_or(f64::NAN, |c| c.k_tilde.to_f64()),
            indicator_mode: phi.modes[m - 1],
            cond_provenance: cp.map_or(Provenance::Witness, |c| c.provenance),
        });
    }
    let values: Vec<f64> = phi.values.iter().map(Norm::to_f64).collect();
    Ok(GreedyReport {
        space: basis.space.to_string(),
        window,
        samples,
        rows,
        regularity: regularity_fit(&values).ok(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finvec::int;
    use num_traits::Signed;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tsirelson() -> BasisHandle {
        BasisHandle::new(SpaceHandle::Tsirelson).unwrap()
    }

    fn dense(v: &[i64]) -> FinVec<Rational> {
        FinVec::from_dense(&v.iter().map(|x| int(*x)).collect::<Vec<_>>())
    }

    #[test]
    fn ordering_examples() {
        assert_eq!(greedy_ordering(&dense(&[1, -2, 2])), vec![2, 3, 1]);
        assert_eq!(greedy_ordering(&FinVec::<Rational>::unit(7)), vec![7]);
        assert_eq!(greedy_ordering(&dense(&[3, 3, 3, 3])), vec![1, 2, 3, 4]);
        let f = dense(&[1, -2, 2]);
        assert_eq!(greedy_sum(&f, 1), FinVec::from_entries([(2, int(-2))]).unwrap());
        assert!(greedy_sum(&f, 0).is_zero());
        assert_eq!(greedy_sum(&f, 3), f);
        assert_eq!(greedy_sum(&f, 9), f);
    }

    #[test]
    fn subsets_enumerate() {
        let mut seen = Vec::new();
        for_each_subset(&[2, 5, 7, 9], 2, |s| {
            seen.push(s.to_vec());
            Ok(())
        })
        .unwrap();
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[0], vec![2, 5]);
        assert_eq!(seen[5], vec![7, 9]);
        let mut empty = 0;
        for_each_subset(&[1, 2], 0, |_| {
            empty += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(empty, 1);
        assert_eq!(binomial(24, 12), 2_704_156);
    }

    #[test]
    fn fundamental_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = tsirelson();
        let phi = fundamental_function(&t, 4, 8, &mut rng).unwrap();
        assert_eq!(phi.values[0], Norm::Exact(int(1)));
        assert_eq!(phi.values[2], Norm::Exact(rat(3, 2)));
        assert!(phi.modes.iter().all(|m| *m == SearchMode::Exhaustive));
        let l3 = BasisHandle::new(SpaceHandle::lp(3.0).unwrap()).unwrap();
        let phi = fundamental_function(&l3, 5, 10, &mut rng).unwrap();
        for (m, v) in phi.values.iter().enumerate() {
            assert!((v.to_f64() - ((m + 1) as f64).powf(1.0 / 3.0)).abs() < 1e-12);
        }
        assert!(fundamental_function(&t, 5, 9, &mut rng).is_err());
    }

    #[test]
    fn democracy_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let l2 = BasisHandle::new(SpaceHandle::lp(2.0).unwrap()).unwrap();
        let d = democracy_ratio(&l2, 4, 8, &mut rng).unwrap();
        assert!((d.delta.to_f64() - 1.0).abs() < 1e-12);
        let d = democracy_ratio(&tsirelson(), 6, 12, &mut rng).unwrap();
        assert!(d.delta >= Norm::Exact(int(1)));
        assert!(d.delta.is_exact());
        assert_eq!(d.mode, SearchMode::Exhaustive);
    }

    #[test]
    fn lower_bound_mode_beyond_budget() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let l1 = BasisHandle::new(SpaceHandle::lp(1.0).unwrap()).unwrap();
        let phi = fundamental_function(&l1, 14, 28, &mut rng).unwrap();
        assert_eq!(phi.modes[0], SearchMode::LowerBound);
        assert_eq!(phi.values[13], Norm::Exact(int(14)));
    }

    #[test]
    fn quasi_greedy_unconditional() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let t = tsirelson();
        let samples: Vec<_> = (0..20).map(|_| random_rational_vector(8, 0.6, &mut rng)).collect();
        let r = quasi_greedy_ratio(&t, &samples, &[1, 2, 3, 4]).unwrap();
        assert!(r <= Norm::Exact(int(1)));
        let r = quasi_greedy_ratio(&t, &samples, &[8]).unwrap();
        assert_eq!(r, Norm::Exact(int(1)));
    }

    #[test]
    fn gaps() {
        let l2 = BasisHandle::new(SpaceHandle::lp(2.0).unwrap()).unwrap();
        let f = dense(&[5, 4, 3, 2, 1]);
        let ag = almost_greedy_gap(&l2, &f, 2).unwrap();
        assert!((ag.ratio.to_f64() - 1.0).abs() < 1e-12);
        assert_eq!(ag.best_set, vec![1, 2]);
        let t = tsirelson();
        let g = random_rational_vector(10, 0.8, &mut ChaCha8Rng::seed_from_u64(9));
        for m in 0..4 {
            let ag = almost_greedy_gap(&t, &g, m).unwrap();
            assert!(ag.ratio >= Norm::Exact(int(1)));
            assert!(ag.numerator <= t.norm(&g).unwrap());
        }
        let flat = dense(&[1, 1, 1, 1, 1, 1]);
        let gg = greedy_gap(&l2, &flat, 2, 64).unwrap();
        assert!((gg.ratio.to_f64() - 1.0).abs() < 1e-6);
        let gg0 = greedy_gap(&l2, &flat, 0, 64).unwrap();
        assert!((gg0.ratio.to_f64() - 1.0).abs() < 1e-12);
        let h = dense(&[3, -1, 2, 2, -5]);
        let a = almost_greedy_gap(&t, &h, 2).unwrap();
        let b = greedy_gap(&t, &h, 2, 64).unwrap();
        assert!(b.denominator.to_f64() <= a.denominator.to_f64() + 1e-12);
        assert!(almost_greedy_gap(&t, &FinVec::indicator(1..=21), 2).is_err());
    }

    #[test]
    fn cond_params_lattice_and_gram() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for m in 1..=5 {
            let c = cond_params(&tsirelson(), m, CondMode::Exhaustive, &mut rng).unwrap();
            assert_eq!(c.k, Norm::Exact(int(1)));
            assert_eq!(c.k_tilde, Norm::Exact(int(1)));
            assert_eq!(c.provenance, Provenance::Lattice);
        }
        let rot = BasisHandle::new(SpaceHandle::rotated(0.5, 40).unwrap()).unwrap();
        let c = cond_params(&rot, 6, CondMode::Exhaustive, &mut rng).unwrap();
        assert!(c.k_tilde_exact && c.k_tilde > Norm::Float(1.0));
        assert!(c.k_tilde <= c.k);
        let w = cond_params(&rot, 6, CondMode::Witness, &mut rng).unwrap();
        assert!(w.k_tilde <= c.k_tilde.add(&Norm::Float(1e-9)));
        assert!(cond_params(&rot, 15, CondMode::Exhaustive, &mut rng).is_err());
    }

    #[test]
    fn rotated_witness_grows() {
        let g = rotated_witness_growth(0.5, 4, 12).unwrap();
        assert!(g.points.windows(2).all(|w| w[1].1 > w[0].1));
        assert!(g.slope > 0.2 && g.slope < 0.8);
    }

    #[test]
    fn regularity_examples() {
        let sqrt: Vec<f64> = (1..=40).map(|m| (m as f64).sqrt()).collect();
        let r = regularity_fit(&sqrt).unwrap();
        assert!((r.alpha - 0.5).abs() < 1e-6 && (r.beta - 0.5).abs() < 1e-6);
        assert!((r.lrp_constant - 1.0).abs() < 1e-9 && (r.urp_constant - 1.0).abs() < 1e-9);
        assert!(r.lrp_ok && r.urp_ok);
        let lin: Vec<f64> = (1..=40).map(|m| m as f64).collect();
        let r = regularity_fit(&lin).unwrap();
        assert!((r.alpha - 1.0).abs() < 1e-6 && !r.urp_ok);
        assert!(regularity_fit(&lin[..5]).is_err());
    }

    #[test]
    fn report_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let rep = greedy_report(&tsirelson(), 4, 8, 6, &mut rng).unwrap();
        assert!(rep.violations().is_empty(), "{:?}", rep.violations());
        assert!(rep.rows.iter().all(|r| r.k == 1.0));
        let csv = rep.to_csv().unwrap();
        assert!(csv.starts_with("m,fundamental,"));
        assert_eq!(csv.lines().count(), 5);
        let back: GreedyReport = serde_json::from_str(&rep.to_json()).unwrap();
        assert_eq!(back.rows.len(), 4);
    }

    fn reference_ok(f: &FinVec<Rational>, rho: &[usize]) -> bool {
        for j in 0..rho.len() {
            for k in j + 1..rho.len() {
                let (a, b) = (f.get(rho[j]).abs(), f.get(rho[k]).abs());
                if !(a > b || (a == b && rho[j] < rho[k])) {
                    return false;
                }
            }
        }
        let mut sorted = rho.to_vec();
        sorted.sort_unstable();
        sorted == f.support()
    }

    proptest! {
        #[test]
        fn ordering_matches_definition(entries in proptest::collection::btree_map(1usize..30, -5i64..5, 0..12)) {
            let f = FinVec::from_entries(entries.into_iter().filter(|(_, v)| *v != 0).map(|(i, v)| (i, int(v)))).unwrap();
            prop_assert!(reference_ok(&f, &greedy_ordering(&f)));
        }

        #[test]
        fn greedy_sum_idempotent(entries in proptest::collection::btree_map(1usize..30, -5i64..5, 0..12), m in 0usize..14) {
            let f = FinVec::from_entries(entries.into_iter().filter(|(_, v)| *v != 0).map(|(i, v)| (i, int(v)))).unwrap();
            let g = greedy_sum(&f, m);
            prop_assert_eq!(greedy_sum(&g, m), g);
        }

        #[test]
        fn phi_doubling(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = [0.5, 1.0, 2.0, 4.0][(seed % 4) as usize];
            let b = BasisHandle::new(SpaceHandle::convexify(SpaceHandle::Tsirelson, p).unwrap()).unwrap();
            let phi = fundamental_function(&b, 4, 8, &mut rng).unwrap();
            for m in 1..=2 {
                let kappa = b.space.quasi_triangle_modulus();
                prop_assert!(phi.values[2 * m - 1].to_f64() <= 2.0 * kappa * phi.values[m - 1].to_f64() + 1e-12);
                prop_assert!(phi.values[m] >= phi.values[m - 1]);
            }
        }
    }
}
