//! Exact evaluation of the Tsirelson norm on finitely supported vectors.
//!
//! The norm is the fixed point of
//!
//! ```text
//! |x|_0     = max_i |x_i|
//! |x|_{m+1} = max( |x|_m , 1/2 * sup sum_k |E_k x|_m )
//! ```
//!
//! where the supremum runs over admissible families `E_1 < ... < E_n` with
//! `n <= min E_1`. For a vector supported on `[1, N]` the engine tabulates
//! `W_m(a, b) = |1_{[a,b]} x|_m` for every interval and only considers
//! interval families: replacing each `E_k` by its interval hull keeps the
//! family admissible and cannot lower the sum (lattice monotonicity).
//!
//! Arithmetic is exact. Inputs are scaled to integers by the lcm of their
//! denominators; level `m` values are stored as numerators over `D * 2^m`,
//! first in `u128` and, if that overflows, in `BigUint`.
//! [`tsirelson_norm_bruteforce`] enumerates arbitrary (non-interval)
//! admissible families and serves as the independent oracle.

use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finvec::{FinVec, Rational};
use crate::hierarchy::GrowthFunction;

/// Largest support index accepted by the brute-force oracle.
pub const BRUTEFORCE_MAX_INDEX: usize = 8;

/// Level arithmetic for the interval recursion.
trait LevelValue: Clone + PartialOrd + Send + Sync {
    fn zero() -> Self;
    fn checked_sum(&self, other: &Self) -> Option<Self>;
    /// Re-expresses a level `m` value at level `m + 1`.
    fn lift(&self) -> Option<Self>;
    /// Level `m + 1` value of `1/2 * sum` for a sum of level `m` values.
    fn halve(sum: Self) -> Self;
}

impl LevelValue for u128 {
    fn zero() -> Self {
        0
    }
    fn checked_sum(&self, other: &Self) -> Option<Self> {
        self.checked_add(*other)
    }
    fn lift(&self) -> Option<Self> {
        self.checked_mul(2)
    }
    fn halve(sum: Self) -> Self {
        sum
    }
}

impl LevelValue for BigUint {
    fn zero() -> Self {
        <BigUint as Zero>::zero()
    }
    fn checked_sum(&self, other: &Self) -> Option<Self> {
        Some(self + other)
    }
    fn lift(&self) -> Option<Self> {
        Some(self << 1usize)
    }
    fn halve(sum: Self) -> Self {
        sum
    }
}

impl LevelValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn checked_sum(&self, other: &Self) -> Option<Self> {
        Some(self + other)
    }
    fn lift(&self) -> Option<Self> {
        Some(*self)
    }
    fn halve(sum: Self) -> Self {
        0.5 * sum
    }
}

/// Square table of `W(a, b)`, `1 <= a <= b <= n`, stored row-major.
#[derive(Clone, Debug)]
struct Table<T> {
    n: usize,
    cells: Vec<T>,
}

impl<T: LevelValue> Table<T> {
    fn base(weights: &[T]) -> Self {
        let n = weights.len();
        let mut cells = vec![T::zero(); n * n];
        for a in 0..n {
            let mut running = T::zero();
            for b in a..n {
                if weights[b] > running {
                    running = weights[b].clone();
                }
                cells[a * n + b] = running.clone();
            }
        }
        Table { n, cells }
    }

    #[inline]
    fn at(&self, a: usize, b: usize) -> &T {
        &self.cells[(a - 1) * self.n + (b - 1)]
    }

    /// One application of the recursion. Returns `None` on overflow, else the
    /// next table and whether any interval strictly improved.
    fn step(&self) -> Option<(Table<T>, bool)> {
        let n = self.n;
        let mut next = Vec::with_capacity(n * n);
        for v in &self.cells {
            next.push(v.lift()?);
        }
        let mut changed = false;

        let mut best: Vec<Option<T>> = vec![None; n + 2];
        let mut prev: Vec<T> = vec![T::zero(); n + 2];
        let mut cur: Vec<T> = vec![T::zero(); n + 2];
        for b in 1..=n {
            for slot in best.iter_mut() {
                *slot = None;
            }
            // Starting point c with b - c + 1 <= c: every coordinate can be its
            // own set, which is optimal by the triangle inequality.
            let mut diag = T::zero();
            for c in (1..=b).rev() {
                diag = diag.checked_sum(self.at(c, c))?;
                if b < 2 * c {
                    best[c] = Some(diag.clone());
                }
            }
            let kmax = b / 2;
            if kmax >= 1 {
                for c in 1..=b {
                    prev[c] = self.at(c, b).clone();
                }
                best[1] = Some(prev[1].clone());
                for k in 2..=kmax {
                    // cur[c]: best sum over at most k consecutive pieces covering [c, b].
                    for c in k..=b {
                        let mut v = prev[c].clone();
                        for d in c..b {
                            let s = self.at(c, d).checked_sum(&prev[d + 1])?;
                            if s > v {
                                v = s;
                            }
                        }
                        cur[c] = v;
                    }
                    best[k] = Some(cur[k].clone());
                    std::mem::swap(&mut prev, &mut cur);
                }
            }
            // Suffix maximum over the first cut point.
            let mut running: Option<T> = None;
            for a in (1..=b).rev() {
                if let Some(v) = &best[a] {
                    if running.as_ref().is_none_or(|r| v > r) {
                        running = Some(v.clone());
                    }
                }
                if let Some(r) = &running {
                    let candidate = T::halve(r.clone());
                    let slot = &mut next[(a - 1) * n + (b - 1)];
                    if candidate > *slot {
                        *slot = candidate;
                        changed = true;
                    }
                }
            }
        }
        Some((Table { n, cells: next }, changed))
    }
}

/// Runs the recursion to its fixed point. Returns the final table, the
/// number of levels applied and (optionally) every intermediate table.
fn fixed_point<T: LevelValue>(weights: &[T], keep_history: bool) -> Option<(Table<T>, usize, Vec<Table<T>>)> {
    let mut table = Table::base(weights);
    let mut history = Vec::new();
    let mut level = 0;
    loop {
        let (next, changed) = table.step()?;
        if keep_history {
            history.push(table.clone());
        }
        if !changed {
            return Some((table, level, history));
        }
        table = next;
        level += 1;
    }
}

/// Integer weights `|a_i| * D` on `[1, N]` and the common denominator `D`.
fn scaled_weights(f: &FinVec<Rational>) -> (Vec<BigUint>, BigUint) {
    let n = f.max_index();
    let mut denom = BigInt::one();
    for (_, v) in f.iter() {
        denom = denom.lcm(v.denom());
    }
    let mut weights = vec![<BigUint as Zero>::zero(); n];
    for (i, v) in f.iter() {
        let scaled = (v.abs() * Rational::from_integer(denom.clone())).to_integer();
        weights[i - 1] = scaled.to_biguint().expect("nonnegative");
    }
    (weights, denom.to_biguint().expect("positive"))
}

fn to_rational(num: BigUint, denom: &BigUint, level: usize) -> Rational {
    let d = BigInt::from(denom.clone()) << level;
    Rational::new(BigInt::from(num), d)
}

/// Tsirelson norm of a rational vector, exact.
pub fn tsirelson_norm(f: &FinVec<Rational>) -> Rational {
    if f.is_zero() {
        return Rational::zero();
    }
    let (weights, denom) = scaled_weights(f);
    let n = weights.len();
    let small: Option<Vec<u128>> = weights.iter().map(|w| w.to_u128()).collect();
    if let Some(small) = small {
        if let Some((table, level, _)) = fixed_point(&small, false) {
            return to_rational(BigUint::from(*table.at(1, n)), &denom, level);
        }
    }
    let (table, level, _) = fixed_point(&weights, false).expect("BigUint arithmetic cannot overflow");
    to_rational(table.at(1, n).clone(), &denom, level)
}

/// Tsirelson norm of a float vector; same recursion in binary64.
pub fn tsirelson_norm_f64(f: &FinVec<f64>) -> f64 {
    if f.is_zero() {
        return 0.0;
    }
    let n = f.max_index();
    let mut weights = vec![0.0; n];
    for (i, v) in f.iter() {
        weights[i - 1] = v.abs();
    }
    let (table, _, _) = fixed_point(&weights, false).expect("f64 arithmetic does not overflow");
    *table.at(1, n)
}

/// Every level of the interval recursion for one input vector.
#[derive(Clone, Debug)]
pub struct NormTable {
    n: usize,
    denom: BigUint,
    levels: Vec<Table<BigUint>>,
}

impl NormTable {
    pub fn build(f: &FinVec<Rational>) -> Self {
        let (weights, denom) = scaled_weights(f);
        let n = weights.len();
        if n == 0 {
            return NormTable {
                n,
                denom,
                levels: Vec::new(),
            };
        }
        let (_, _, history) = fixed_point(&weights, true).expect("BigUint arithmetic cannot overflow");
        NormTable {
            n,
            denom,
            levels: history,
        }
    }

    /// Largest index `N` of the input.
    pub fn max_index(&self) -> usize {
        self.n
    }

    /// Number of tabulated levels; the last one is the fixed point.
    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    /// `W_m(a, b)`; levels beyond the fixed point repeat it.
    pub fn value_at_level(&self, a: usize, b: usize, m: usize) -> Rational {
        assert!(1 <= a && a <= b && b <= self.n, "interval [{a}, {b}] outside [1, {}]", self.n);
        let m = m.min(self.levels.len() - 1);
        to_rational(self.levels[m].at(a, b).clone(), &self.denom, m)
    }

    /// Fixed-point value `|1_{[a,b]} x|`.
    pub fn value(&self, a: usize, b: usize) -> Rational {
        self.value_at_level(a, b, usize::MAX)
    }

    pub fn norm(&self) -> Rational {
        if self.n == 0 {
            Rational::zero()
        } else {
            self.value(1, self.n)
        }
    }
}

/// Successive finite sets `E_1 < ... < E_n` with `n <= min E_1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdmissibleFamily {
    sets: Vec<Vec<usize>>,
}

impl AdmissibleFamily {
    pub fn new(mut sets: Vec<Vec<usize>>) -> Result<Self> {
        for s in sets.iter_mut() {
            s.sort_unstable();
            s.dedup();
            if s.is_empty() {
                return Err(Error::invariant("admissible families consist of nonempty sets"));
            }
            if s[0] == 0 {
                return Err(Error::invariant("indices start at 1"));
            }
        }
        for w in sets.windows(2) {
            if w[0].last() >= w[1].first() {
                return Err(Error::invariant(format!(
                    "sets are not successive: max {:?} >= min {:?}",
                    w[0].last(),
                    w[1].first()
                )));
            }
        }
        if let Some(first) = sets.first() {
            if sets.len() > first[0] {
                return Err(Error::invariant(format!(
                    "{} sets but min E_1 = {}",
                    sets.len(),
                    first[0]
                )));
            }
        }
        Ok(AdmissibleFamily { sets })
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    /// `1/2 * sum_k |E_k x|` evaluated with the exact norm.
    pub fn half_sum(&self, f: &FinVec<Rational>) -> Rational {
        let mut total = Rational::zero();
        for s in &self.sets {
            let piece = f.restrict(|i| s.binary_search(&i).is_ok());
            total += tsirelson_norm(&piece);
        }
        total / Rational::from_integer(BigInt::from(2))
    }
}

/// Families of arbitrary successive subsets of `[1, n]`, reduced per
/// restriction mask `Y` to the distinct tuples `(E_1 & Y, ..., E_k & Y)`
/// with empty intersections dropped.
fn effective_families(n: usize) -> &'static [Vec<Vec<u16>>] {
    static CACHE: [OnceLock<Vec<Vec<Vec<u16>>>>; BRUTEFORCE_MAX_INDEX + 1] = [
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
    ];
    CACHE[n].get_or_init(|| {
        let mut families = Vec::new();
        enumerate_families(n, 1, &mut Vec::new(), 0, &mut families);
        (0..(1u16 << n))
            .map(|y| {
                let mut distinct: Vec<Vec<u16>> = families
                    .iter()
                    .map(|fam| fam.iter().map(|e| e & y).filter(|e| *e != 0).collect::<Vec<u16>>())
                    .filter(|fam| !fam.is_empty())
                    .collect();
                distinct.sort();
                distinct.dedup();
                distinct
            })
            .collect()
    })
}

fn enumerate_families(n: usize, pos: usize, sets: &mut Vec<u16>, first_min: usize, out: &mut Vec<Vec<u16>>) {
    if pos > n {
        if !sets.is_empty() && sets.len() <= first_min {
            out.push(sets.clone());
        }
        return;
    }
    let bit = 1u16 << (pos - 1);
    // pos unused
    enumerate_families(n, pos + 1, sets, first_min, out);
    // pos joins the current (last) set
    if let Some(last) = sets.last_mut() {
        *last |= bit;
        enumerate_families(n, pos + 1, sets, first_min, out);
        *sets.last_mut().unwrap() &= !bit;
    }
    // pos opens a new set
    let fm = if sets.is_empty() { pos } else { first_min };
    if sets.len() < fm {
        sets.push(bit);
        enumerate_families(n, pos + 1, sets, fm, out);
        sets.pop();
    }
}

/// Independent oracle: the same fixed-point recursion over all admissible
/// families of arbitrary successive sets. Support must lie in `[1, 8]`.
pub fn tsirelson_norm_bruteforce(f: &FinVec<Rational>) -> Result<Rational> {
    let n = f.max_index();
    if n > BRUTEFORCE_MAX_INDEX {
        return Err(Error::Size {
            what: "brute-force Tsirelson oracle support",
            limit: BRUTEFORCE_MAX_INDEX,
            got: n,
        });
    }
    if n == 0 {
        return Ok(Rational::zero());
    }
    let masks = 1usize << n;
    let abs: Vec<Rational> = (1..=n).map(|i| f.get(i).abs()).collect();
    let mut level: Vec<Rational> = (0..masks)
        .map(|y| {
            (0..n)
                .filter(|i| y & (1 << i) != 0)
                .map(|i| abs[i].clone())
                .max()
                .unwrap_or_else(Rational::zero)
        })
        .collect();
    let families = effective_families(n);
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    // Each round either improves some entry or reaches the fixed point.
    for _ in 0..=masks {
        let mut next = level.clone();
        let mut changed = false;
        for y in 1..masks {
            let mut best = Rational::zero();
            for fam in &families[y] {
                let mut s = Rational::zero();
                for e in fam {
                    s += &level[*e as usize];
                }
                if s > best {
                    best = s;
                }
            }
            let candidate = best * &half;
            if candidate > next[y] {
                next[y] = candidate;
                changed = true;
            }
        }
        level = next;
        if !changed {
            return Ok(level[masks - 1].clone());
        }
    }
    Err(Error::invariant("brute-force recursion did not stabilize"))
}

/// Both sides of the block comparison `|sum f_k|` vs `|sum |f_k| t_{phi(k)}|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockComparison {
    #[serde(with = "crate::finvec::rational_str")]
    pub lhs: Rational,
    #[serde(with = "crate::finvec::rational_str")]
    pub rhs: Rational,
}

impl BlockComparison {
    /// `rhs / lhs`; 1 for the zero vector.
    pub fn ratio(&self) -> Rational {
        if self.lhs.is_zero() {
            Rational::one()
        } else {
            &self.rhs / &self.lhs
        }
    }
}

/// Block `k` (1-based) must be supported in `(phi(k-1), phi(k)]`, `phi(0) = 0`.
pub fn block_norm_compare(phi: &GrowthFunction, blocks: &[FinVec<Rational>]) -> Result<BlockComparison> {
    let mut sum = FinVec::zero();
    let mut collapsed = Vec::new();
    let mut prev = 0usize;
    for (k, block) in blocks.iter().enumerate() {
        let hi = phi.eval_usize(k as u64 + 1)?;
        if hi <= prev {
            return Err(Error::invariant(format!("phi is not increasing at {}", k + 1)));
        }
        if let Some(bad) = block.support().into_iter().find(|&i| i <= prev || i > hi) {
            return Err(Error::Domain {
                index: bad,
                space: format!("block {} window ({prev}, {hi}]", k + 1),
            });
        }
        sum = sum.add(block);
        let norm = tsirelson_norm(block);
        if !norm.is_zero() {
            collapsed.push((hi, norm));
        }
        prev = hi;
    }
    let rhs_vec = FinVec::from_entries(collapsed)?;
    Ok(BlockComparison {
        lhs: tsirelson_norm(&sum),
        rhs: tsirelson_norm(&rhs_vec),
    })
}

/// Sampled ratio range of `|sum a_n t_{n+phi(j)}| / sum |a_n|` over the window
/// `n = 1..phi(j+1)-phi(j)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct L1Equivalence {
    pub window: (usize, usize),
    #[serde(with = "crate::finvec::rational_str")]
    pub min_ratio: Rational,
    #[serde(with = "crate::finvec::rational_str")]
    pub max_ratio: Rational,
    pub samples: usize,
}

pub const L1_WINDOW_LIMIT: usize = 12;

/// Samples include the all-ones vector and every unit vector of the window,
/// then `samples` random integer coefficient vectors with random signs.
pub fn subsequence_l1_equivalence<R: Rng>(
    phi: &GrowthFunction,
    j: u64,
    samples: usize,
    rng: &mut R,
) -> Result<L1Equivalence> {
    let lo = phi.eval_usize(j)?;
    let hi = phi.eval_usize(j + 1)?;
    if hi <= lo {
        return Err(Error::invariant(format!("phi is not increasing at {j}")));
    }
    let width = hi - lo;
    if width > L1_WINDOW_LIMIT {
        return Err(Error::Size {
            what: "l1 window",
            limit: L1_WINDOW_LIMIT,
            got: width,
        });
    }
    let mut candidates: Vec<FinVec<Rational>> = vec![FinVec::indicator(lo + 1..=hi)];
    candidates.extend((lo + 1..=hi).map(FinVec::unit));
    for _ in 0..samples {
        let entries: Vec<(usize, Rational)> = (lo + 1..=hi)
            .map(|i| {
                let mag: i64 = rng.gen_range(0..=9);
                let sign = if rng.gen_bool(0.5) { -1 } else { 1 };
                (i, Rational::from_integer(BigInt::from(sign * mag)))
            })
            .collect();
        let v = FinVec::from_entries(entries)?;
        if !v.is_zero() {
            candidates.push(v);
        }
    }
    let mut min_ratio: Option<Rational> = None;
    let mut max_ratio: Option<Rational> = None;
    for v in &candidates {
        let r = tsirelson_norm(v) / v.l1_norm();
        if min_ratio.as_ref().is_none_or(|m| &r < m) {
            min_ratio = Some(r.clone());
        }
        if max_ratio.as_ref().is_none_or(|m| &r > m) {
            max_ratio = Some(r);
        }
    }
    Ok(L1Equivalence {
        window: (lo + 1, hi),
        min_ratio: min_ratio.expect("at least one candidate"),
        max_ratio: max_ratio.expect("at least one candidate"),
        samples: candidates.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finvec::{int, rat};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ones(lo: usize, hi: usize) -> FinVec<Rational> {
        FinVec::indicator(lo..=hi)
    }

    #[test]
    fn known_values() {
        assert_eq!(tsirelson_norm(&ones(1, 2)), int(1));
        assert_eq!(tsirelson_norm(&ones(4, 6)), rat(3, 2));
        // at least the norm of the sub-window [4,6]
        assert_eq!(tsirelson_norm(&ones(1, 6)), rat(3, 2));
        assert_eq!(tsirelson_norm(&ones(2, 6)), rat(3, 2));
        assert_eq!(tsirelson_norm(&FinVec::zero()), int(0));
        for n in [1, 5, 17, 200] {
            assert_eq!(tsirelson_norm(&FinVec::unit(n)), int(1));
        }
    }

    #[test]
    fn bruteforce_known_values() {
        assert_eq!(tsirelson_norm_bruteforce(&FinVec::unit(3)).unwrap(), int(1));
        assert_eq!(tsirelson_norm_bruteforce(&FinVec::zero()).unwrap(), int(0));
        assert_eq!(tsirelson_norm_bruteforce(&ones(1, 6)).unwrap(), rat(3, 2));
        assert_eq!(tsirelson_norm_bruteforce(&ones(4, 6)).unwrap(), rat(3, 2));
        assert!(matches!(
            tsirelson_norm_bruteforce(&FinVec::unit(9)),
            Err(Error::Size { .. })
        ));
    }

    #[test]
    fn dp_matches_bruteforce_on_indicators() {
        for mask in 1u32..256 {
            let f = FinVec::indicator((1..=8).filter(|i| mask & (1 << (i - 1)) != 0));
            assert_eq!(tsirelson_norm(&f), tsirelson_norm_bruteforce(&f).unwrap(), "mask {mask:08b}");
        }
    }

    #[test]
    fn dp_matches_bruteforce_on_random_rationals() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let mut entries: Vec<(usize, Rational)> = Vec::new();
            for i in 1..=8 {
                if rng.gen_bool(0.7) {
                    entries.push((i, rat(rng.gen_range(-20..=20), rng.gen_range(1..=6))));
                }
            }
            let f = FinVec::from_entries(entries).unwrap();
            assert_eq!(tsirelson_norm(&f), tsirelson_norm_bruteforce(&f).unwrap());
        }
    }

    #[test]
    fn float_engine_agrees() {
        let f = ones(3, 20);
        let exact = crate::finvec::rational_to_f64(&tsirelson_norm(&f));
        assert!((tsirelson_norm_f64(&f.to_f64()) - exact).abs() < 1e-12);
    }

    #[test]
    fn table_levels_are_monotone() {
        let f = FinVec::from_entries((1..=12).map(|i| (i, rat(i as i64 % 5 + 1, 3)))).unwrap();
        let table = NormTable::build(&f);
        assert!(table.level_count() <= 12 + 1);
        for a in 1..=12 {
            for b in a..=12 {
                for m in 1..table.level_count() {
                    assert!(table.value_at_level(a, b, m) >= table.value_at_level(a, b, m - 1));
                }
                let window = f.restrict(|i| i >= a && i <= b);
                assert!(table.value(a, b) >= window.sup_norm());
                assert!(table.value(a, b) <= window.l1_norm());
            }
        }
        assert_eq!(table.norm(), tsirelson_norm(&f));
    }

    #[test]
    fn admissible_family_validation() {
        assert!(AdmissibleFamily::new(vec![vec![2], vec![3, 4]]).is_ok());
        assert!(AdmissibleFamily::new(vec![vec![1], vec![2]]).is_err());
        assert!(AdmissibleFamily::new(vec![vec![3, 5], vec![4]]).is_err());
        assert!(AdmissibleFamily::new(vec![vec![]]).is_err());
        let fam = AdmissibleFamily::new(vec![vec![4], vec![5], vec![6]]).unwrap();
        assert_eq!(fam.half_sum(&ones(4, 6)), rat(3, 2));
    }

    #[test]
    fn block_comparison() {
        let phi = GrowthFunction::Fgh(1);
        let single = block_norm_compare(&phi, &[FinVec::unit(2).scale(&int(3))]).unwrap();
        assert_eq!(single.ratio(), int(1));
        let empty = block_norm_compare(&phi, &[]).unwrap();
        assert_eq!((empty.lhs.clone(), empty.ratio()), (int(0), int(1)));
        let blocks: Vec<_> = (1..=4).map(|k| ones(2 * k - 1, 2 * k)).collect();
        let cmp = block_norm_compare(&phi, &blocks).unwrap();
        assert!(cmp.lhs > int(0) && cmp.rhs > int(0));
        assert!(block_norm_compare(&phi, &[FinVec::unit(3)]).is_err());
    }

    #[test]
    fn l1_windows() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let unit_window = GrowthFunction::Identity;
        let r = subsequence_l1_equivalence(&unit_window, 4, 10, &mut rng).unwrap();
        assert_eq!((r.min_ratio.clone(), r.max_ratio.clone()), (int(1), int(1)));
        let r = subsequence_l1_equivalence(&GrowthFunction::Fgh(1), 3, 50, &mut rng).unwrap();
        assert!(r.min_ratio >= rat(1, 2) && r.max_ratio <= int(1));
        let wide = GrowthFunction::power(GrowthFunction::Const(2), GrowthFunction::Identity);
        assert!(matches!(
            subsequence_l1_equivalence(&wide, 5, 1, &mut rng),
            Err(Error::Size { .. })
        ));
    }

    #[test]
    fn half_window_lower_bound() {
        for k in 1..=10usize {
            let f = ones(k + 1, 2 * k);
            assert!(tsirelson_norm(&f) >= rat(k as i64, 2));
        }
    }

    fn small_vec(max_index: usize) -> impl Strategy<Value = FinVec<Rational>> {
        proptest::collection::vec((-12i64..=12, 1i64..=4), max_index).prop_map(|v| {
            FinVec::from_entries(v.into_iter().enumerate().map(|(i, (n, d))| (i + 1, rat(n, d)))).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn sandwich(f in small_vec(14)) {
            let n = tsirelson_norm(&f);
            prop_assert!(n >= f.sup_norm());
            prop_assert!(n <= f.l1_norm());
        }

        #[test]
        fn sign_invariance(f in small_vec(14), signs in proptest::collection::vec(any::<bool>(), 14)) {
            let flipped = FinVec::from_entries(
                f.iter().map(|(i, v)| (i, if signs[i - 1] { -v.clone() } else { v.clone() })),
            ).unwrap();
            prop_assert_eq!(tsirelson_norm(&f), tsirelson_norm(&flipped));
        }

        #[test]
        fn lattice_monotone(f in small_vec(14), keep in proptest::collection::vec(any::<bool>(), 14)) {
            let smaller = f.restrict(|i| keep[i - 1]);
            prop_assert!(tsirelson_norm(&smaller) <= tsirelson_norm(&f));
        }

        #[test]
        fn oracle_parity(f in small_vec(8)) {
            prop_assert_eq!(tsirelson_norm(&f), tsirelson_norm_bruteforce(&f).unwrap());
        }
    }
}
