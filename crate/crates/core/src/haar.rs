//! Dyadic intervals, `L_p`-normalised Haar functions and step-function norms.
//!
//! All functions live on `[0,1)` and are constant on the `2^G` cells of a
//! dyadic grid, so every norm is a finite sum.

use std::fmt;

use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finvec::{rat, FinVec, Rational, Scalar};
use crate::spaces::{norm_f64, SpaceHandle};

/// Finest grid any step function may use.
pub const MAX_GRID: u32 = 20;

/// `[k 2^{1-n}, (k+1) 2^{1-n})` with `n >= 1`, `0 <= k < 2^{n-1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicInterval {
    pub level: u32,
    pub offset: u64,
}

impl DyadicInterval {
    pub fn new(level: u32, offset: u64) -> Result<Self> {
        if level == 0 || level > 63 || offset >= 1u64 << (level - 1) {
            return Err(Error::param(format!("no dyadic interval at level {level}, offset {offset}")));
        }
        Ok(DyadicInterval { level, offset })
    }

    pub fn length(&self) -> Rational {
        rat(1, 1i64 << (self.level - 1))
    }

    pub fn length_f64(&self) -> f64 {
        0.5f64.powi(self.level as i32 - 1)
    }

    /// All of `D_n`, left to right.
    pub fn level_set(n: u32) -> Result<Vec<DyadicInterval>> {
        if n == 0 || n > MAX_GRID + 1 {
            return Err(Error::Size {
                what: "dyadic level",
                limit: MAX_GRID as usize + 1,
                got: n as usize,
            });
        }
        Ok((0..1u64 << (n - 1)).map(|k| DyadicInterval { level: n, offset: k }).collect())
    }

    /// Cells of grid `g` covered by the left and right halves.
    fn halves(&self, grid: u32) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
        let width = 1usize << (grid + 1 - self.level);
        let start = self.offset as usize * width;
        (start..start + width / 2, start + width / 2..start + width)
    }
}

impl fmt::Display for DyadicInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}/{d}, {}/{d})", self.offset, self.offset + 1, d = 1u64 << (self.level - 1))
    }
}

/// Step function on the `2^grid` cells of `[0,1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseConstant<S = f64> {
    pub grid: u32,
    pub values: Vec<S>,
}

fn check_grid(grid: u32) -> Result<()> {
    if grid > MAX_GRID {
        return Err(Error::Size {
            what: "step-function grid level",
            limit: MAX_GRID as usize,
            got: grid as usize,
        });
    }
    Ok(())
}

impl<S: Scalar> PiecewiseConstant<S> {
    pub fn zero(grid: u32) -> Result<Self> {
        check_grid(grid)?;
        Ok(PiecewiseConstant {
            grid,
            values: vec![S::zero(); 1 << grid],
        })
    }

    pub fn constant(grid: u32, c: S) -> Result<Self> {
        check_grid(grid)?;
        Ok(PiecewiseConstant {
            grid,
            values: vec![c; 1 << grid],
        })
    }

    pub fn from_values(values: Vec<S>) -> Result<Self> {
        let grid = values.len().trailing_zeros();
        if !values.len().is_power_of_two() {
            return Err(Error::param(format!("{} cells is not a power of two", values.len())));
        }
        check_grid(grid)?;
        Ok(PiecewiseConstant { grid, values })
    }

    pub fn cells(&self) -> usize {
        self.values.len()
    }

    /// The same function on a finer grid.
    pub fn refine(&self, grid: u32) -> Result<Self> {
        check_grid(grid)?;
        if grid < self.grid {
            return Err(Error::param(format!("cannot coarsen grid {} to {grid}", self.grid)));
        }
        let rep = 1usize << (grid - self.grid);
        Ok(PiecewiseConstant {
            grid,
            values: self.values.iter().flat_map(|v| std::iter::repeat_n(v.clone(), rep)).collect(),
        })
    }

    fn aligned(&self, other: &Self) -> Result<(Self, Self)> {
        let g = self.grid.max(other.grid);
        Ok((self.refine(g)?, other.refine(g)?))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let (a, b) = self.aligned(other)?;
        Ok(PiecewiseConstant {
            grid: a.grid,
            values: a.values.into_iter().zip(b.values).map(|(x, y)| x + y).collect(),
        })
    }

    pub fn scale(&self, c: &S) -> Self {
        PiecewiseConstant {
            grid: self.grid,
            values: self.values.iter().map(|v| v.clone() * c.clone()).collect(),
        }
    }

    /// `c * self` added in place; `self` must be at least as fine.
    pub fn add_scaled(&mut self, other: &Self, c: &S) -> Result<()> {
        if other.grid > self.grid {
            *self = self.refine(other.grid)?;
        }
        let rep = 1usize << (self.grid - other.grid);
        for (i, v) in other.values.iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            let w = v.clone() * c.clone();
            for cell in &mut self.values[i * rep..(i + 1) * rep] {
                *cell = cell.clone() + w.clone();
            }
        }
        Ok(())
    }

    pub fn sup_norm(&self) -> S {
        self.values.iter().map(|v| v.abs()).fold(S::zero(), |a, b| if b > a { b } else { a })
    }

    pub fn to_f64(&self) -> PiecewiseConstant<f64> {
        PiecewiseConstant {
            grid: self.grid,
            values: self.values.iter().map(Scalar::to_f64).collect(),
        }
    }

    /// CSV rows `cell,value`.
    pub fn to_csv(&self) -> String
    where
        S: fmt::Display,
    {
        let mut out = String::from("cell,value\n");
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{i},{v}\n"));
        }
        out
    }
}

impl PiecewiseConstant<Rational> {
    /// Exact `int |f|`.
    pub fn l1_norm_exact(&self) -> Rational {
        let s = self.values.iter().map(|v| v.abs()).fold(Rational::zero(), |a, b| a + b);
        s / Rational::from_integer((1u64 << self.grid).into())
    }

    /// Exact `int f g`.
    pub fn inner_exact(&self, other: &Self) -> Result<Rational> {
        let (a, b) = self.aligned(other)?;
        let s = a.values.iter().zip(&b.values).map(|(x, y)| x * y).fold(Rational::zero(), |a, b| a + b);
        Ok(s / Rational::from_integer((1u64 << a.grid).into()))
    }

    pub fn integral_exact(&self) -> Rational {
        let s = self.values.iter().fold(Rational::zero(), |a, b| a + b);
        s / Rational::from_integer((1u64 << self.grid).into())
    }
}

/// `(sum_cells |v|^p 2^{-G})^{1/p}`; `p = f64::INFINITY` gives the maximum.
pub fn lp_norm_pc(f: &PiecewiseConstant<f64>, p: f64) -> Result<f64> {
    if p.is_infinite() && p > 0.0 {
        return Ok(f.sup_norm());
    }
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::param(format!("exponent must be positive, got {p}")));
    }
    let w = 0.5f64.powi(f.grid as i32);
    let s: f64 = if p == 1.0 {
        f.values.iter().map(|v| v.abs()).sum()
    } else if p == 2.0 {
        f.values.iter().map(|v| v * v).sum()
    } else {
        f.values.iter().map(|v| v.abs().powf(p)).sum()
    };
    Ok((s * w).powf(1.0 / p))
}

/// `h_I^{(p)} = |I|^{-1/p} (1_{left half} - 1_{right half})` on grid `level(I)`.
pub fn haar_function(i: DyadicInterval, p: f64) -> Result<PiecewiseConstant<f64>> {
    if p.is_nan() || p <= 0.0 {
        return Err(Error::param(format!("exponent must be positive, got {p}")));
    }
    let c = i.length_f64().powf(-1.0 / p);
    haar_with(i, c, -c)
}

/// `h_I^{(1)}`, whose values `+-1/|I|` are rational.
pub fn haar_function_l1(i: DyadicInterval) -> Result<PiecewiseConstant<Rational>> {
    let c = i.length().recip();
    haar_with(i, c.clone(), -c)
}

fn haar_with<S: Scalar>(i: DyadicInterval, plus: S, minus: S) -> Result<PiecewiseConstant<S>> {
    let mut f = PiecewiseConstant::zero(i.level)?;
    let (l, r) = i.halves(i.level);
    f.values[l].fill(plus);
    f.values[r].fill(minus);
    Ok(f)
}

/// `sum_I c_I h_I^{(p)}` on the finest grid the intervals need.
pub fn haar_expansion(coeffs: &[(DyadicInterval, f64)], p: f64) -> Result<PiecewiseConstant<f64>> {
    let grid = coeffs.iter().map(|(i, _)| i.level).max().unwrap_or(0);
    let mut f = PiecewiseConstant::zero(grid)?;
    for (i, c) in coeffs {
        let v = c * i.length_f64().powf(-1.0 / p);
        let (l, r) = i.halves(grid);
        f.values[l].iter_mut().for_each(|x| *x += v);
        f.values[r].iter_mut().for_each(|x| *x -= v);
    }
    Ok(f)
}

/// Outcome of the equi-integrability bound `int_A |f| <= eps |f|_1`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EquiCheck {
    #[serde(with = "crate::finvec::rational_str")]
    pub measure: Rational,
    #[serde(with = "crate::finvec::rational_str")]
    pub delta: Rational,
    #[serde(with = "crate::finvec::rational_str")]
    pub integral: Rational,
    #[serde(with = "crate::finvec::rational_str")]
    pub bound: Rational,
    pub holds: bool,
}

/// `f` is constant on cells of length `2^{-n}` (this covers `Sigma_n`);
/// `a_cells` are cells of grid `a_grid`. Requires `|A| <= 2^{-n} eps`.
pub fn equi_integrability_check(
    f: &PiecewiseConstant<Rational>,
    n: u32,
    a_grid: u32,
    a_cells: &[usize],
    eps: &Rational,
) -> Result<EquiCheck> {
    if f.grid > n {
        return Err(Error::param(format!("function on grid {} is finer than 2^-{n}", f.grid)));
    }
    if a_grid < f.grid {
        return Err(Error::param("set grid must be at least as fine as the function grid"));
    }
    check_grid(a_grid)?;
    let cell = rat(1, 1i64 << a_grid);
    let measure = &cell * Rational::from_integer(a_cells.len().into());
    let delta = eps / Rational::from_integer((1u64 << n).into());
    if measure > delta {
        return Err(Error::param(format!("set measure {measure} exceeds 2^-n eps = {delta}")));
    }
    let shift = a_grid - f.grid;
    let integral = a_cells
        .iter()
        .map(|c| f.values[c >> shift].abs())
        .fold(Rational::zero(), |a, b| a + b)
        * &cell;
    let bound = eps * f.l1_norm_exact();
    Ok(EquiCheck {
        holds: integral <= bound,
        measure,
        delta,
        integral,
        bound,
    })
}

/// Both sides of `(1 - r)(|f| + |g|) <= |f + g| <= (1 + r^2 + r)(|f| + |g|)`
/// with `r = sqrt(eps)`, in `L_1`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KeyCheck {
    #[serde(with = "crate::finvec::rational_str")]
    pub lower: Rational,
    #[serde(with = "crate::finvec::rational_str")]
    pub middle: Rational,
    #[serde(with = "crate::finvec::rational_str")]
    pub upper: Rational,
    pub holds: bool,
}

/// `f` on `Sigma_n`, `g` given sparsely as `(cell, value)` on grid `g_grid`,
/// supported on measure at most `2^{-n} r^2`. `r` is passed instead of `eps`
/// so the check stays rational.
pub fn key_lemma_check(
    f: &PiecewiseConstant<Rational>,
    n: u32,
    g_grid: u32,
    g: &[(usize, Rational)],
    r: &Rational,
) -> Result<KeyCheck> {
    if !(*r > Rational::zero() && *r < Rational::one()) {
        return Err(Error::param("sqrt(eps) must lie in (0, 1)"));
    }
    let eps = r * r;
    let cells: Vec<usize> = g.iter().map(|(c, _)| *c).collect();
    equi_integrability_check(f, n, g_grid, &cells, &eps)?;
    if cells.windows(2).any(|w| w[0] >= w[1]) || cells.last().is_some_and(|c| *c >= 1 << g_grid) {
        return Err(Error::param("cells must be increasing and inside the grid"));
    }
    let cell = rat(1, 1i64 << g_grid);
    let shift = g_grid - f.grid;
    let nf = f.l1_norm_exact();
    let ng = g.iter().map(|(_, v)| v.abs()).fold(Rational::zero(), |a, b| a + b) * &cell;
    let change = g
        .iter()
        .map(|(c, v)| {
            let base = &f.values[c >> shift];
            (base + v).abs() - base.abs()
        })
        .fold(Rational::zero(), |a, b| a + b)
        * &cell;
    let middle = &nf + change;
    let total = nf + ng;
    let lower = (Rational::one() - r) * &total;
    let upper = (Rational::one() + &eps + r) * &total;
    Ok(KeyCheck {
        holds: lower <= middle && middle <= upper,
        lower,
        middle,
        upper,
    })
}

/// Certified interval `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Enclosure {
    pub lo: f64,
    pub hi: f64,
}

impl Enclosure {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// `C_1(u) = prod_k (1 - 2^{-(k+u)/2})^{1/p}` and
/// `C_2(u) = prod_k (1 + 2^{-(k+u)/2} + 2^{-(k+u)})^{1/p}`, truncated at `K`
/// factors and widened by a geometric bound on the log-tail.
pub fn dhk_constants(u: u32, p: f64, k: u32) -> Result<(Enclosure, Enclosure)> {
    if k == 0 {
        return Err(Error::param("need at least one factor"));
    }
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::param(format!("exponent must be positive, got {p}")));
    }
    let x = |j: u32| 2f64.powf(-((j + u) as f64) / 2.0);
    let (mut l1, mut l2) = (0.0f64, 0.0f64);
    for j in 1..=k {
        let xj = x(j);
        l1 += (-xj).ln_1p();
        l2 += (xj + xj * xj).ln_1p();
    }
    let ratio = std::f64::consts::FRAC_1_SQRT_2;
    let x_next = x(k + 1);
    // -log(1 - x) <= x / (1 - x) and log(1 + y) <= y
    let tail1 = x_next / ((1.0 - ratio) * (1.0 - x_next));
    let tail2 = x_next / (1.0 - ratio) + x_next * x_next / (1.0 - 0.5);
    let slack = 1e-13 * (1.0 + l1.abs() + l2.abs());
    let c1 = Enclosure {
        lo: ((l1 - tail1 - slack) / p).exp(),
        hi: ((l1 + slack) / p).exp().min(1.0),
    };
    let c2 = Enclosure {
        lo: ((l2 - slack) / p).exp().max(1.0),
        hi: ((l2 + tail2 + slack) / p).exp(),
    };
    Ok((c1, c2))
}

/// Levels `phi(1) < phi(2) < ...` with `phi(i+1) >= 2 phi(i) + i + u + 1`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpreadSpec {
    pub levels: Vec<u32>,
    pub u: u32,
    pub p: f64,
}

impl SpreadSpec {
    pub fn new(levels: Vec<u32>, u: u32, p: f64) -> Result<Self> {
        if levels.is_empty() || levels[0] == 0 {
            return Err(Error::param("levels must be nonempty and positive"));
        }
        for (i, w) in levels.windows(2).enumerate() {
            let need = 2 * w[0] + (i as u32 + 1) + u + 1;
            if w[1] < need {
                return Err(Error::param(format!("level {} must be at least {need}", w[1])));
            }
        }
        if *levels.last().expect("nonempty") > MAX_GRID {
            return Err(Error::Size {
                what: "spread level",
                limit: MAX_GRID as usize,
                got: *levels.last().expect("nonempty") as usize,
            });
        }
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::param(format!("exponent must be positive, got {p}")));
        }
        Ok(SpreadSpec { levels, u, p })
    }

    /// Smallest admissible levels starting at `first`, up to the grid budget.
    pub fn minimal(first: u32, u: u32, p: f64) -> Result<Self> {
        let mut levels = vec![first];
        loop {
            let i = levels.len() as u32;
            let next = 2 * levels[levels.len() - 1] + i + u + 1;
            if next > MAX_GRID {
                break;
            }
            levels.push(next);
        }
        Self::new(levels, u, p)
    }

    /// At most `2 |D_{phi(i)}|` intervals at level `phi(i+1)`.
    pub fn capacity(&self, i: usize) -> usize {
        if i == 0 {
            1usize << (self.levels[0] - 1)
        } else {
            2usize << (self.levels[i - 1] - 1)
        }
    }

    pub fn check_support(&self, coeffs: &[(DyadicInterval, f64)]) -> Result<()> {
        let mut counts = vec![0usize; self.levels.len()];
        for (iv, _) in coeffs {
            let Some(i) = self.levels.iter().position(|l| *l == iv.level) else {
                return Err(Error::param(format!("interval {iv} is not on a spread level")));
            };
            counts[i] += 1;
        }
        for (i, c) in counts.iter().enumerate() {
            if *c > self.capacity(i) {
                return Err(Error::param(format!("{c} intervals on level {} exceed {}", self.levels[i], self.capacity(i))));
            }
        }
        Ok(())
    }

    /// Random admissible coefficient family: distinct intervals on each level,
    /// at most the allowed count, coefficients uniform in `[-1, 1]`.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<(DyadicInterval, f64)> {
        let mut out = Vec::new();
        for (i, level) in self.levels.iter().enumerate() {
            let total = 1u64 << (level - 1);
            let count = rng.gen_range(0..=self.capacity(i).min(total as usize).min(16));
            let mut offsets: Vec<u64> = if total <= 64 {
                let mut all: Vec<u64> = (0..total).collect();
                all.shuffle(rng);
                all.truncate(count);
                all
            } else {
                let mut picked = std::collections::BTreeSet::new();
                while picked.len() < count {
                    picked.insert(rng.gen_range(0..total));
                }
                picked.into_iter().collect()
            };
            offsets.sort_unstable();
            for k in offsets {
                out.push((DyadicInterval { level: *level, offset: k }, rng.gen_range(-1.0..1.0)));
            }
        }
        if out.is_empty() {
            out.push((DyadicInterval { level: self.levels[0], offset: 0 }, 1.0));
        }
        out
    }
}

/// `|sum c_I h_I^{(p)}|_p / (sum |c_I|^p)^{1/p}`.
pub fn spread_equivalence_ratio(spec: &SpreadSpec, coeffs: &[(DyadicInterval, f64)]) -> Result<f64> {
    spec.check_support(coeffs)?;
    let denom = coeffs.iter().map(|(_, c)| c.abs().powf(spec.p)).sum::<f64>().powf(1.0 / spec.p);
    if denom == 0.0 {
        return Err(Error::param("all coefficients are zero"));
    }
    Ok(lp_norm_pc(&haar_expansion(coeffs, spec.p)?, spec.p)? / denom)
}

/// `r_n = 2^{-(n-1)/p} sum_{I in D_n} h_I^{(p)}`, a `+-1` Rademacher function,
/// for each `n` in `levels`.
pub fn rademacher_block(levels: &[u32], p: f64) -> Result<Vec<PiecewiseConstant<f64>>> {
    if p.is_nan() || p <= 0.0 {
        return Err(Error::param(format!("exponent must be positive, got {p}")));
    }
    levels
        .iter()
        .map(|&n| {
            let intervals = DyadicInterval::level_set(n)?;
            let c = 2f64.powf(-((n - 1) as f64) / p);
            let coeffs: Vec<_> = intervals.into_iter().map(|i| (i, c)).collect();
            haar_expansion(&coeffs, p)
        })
        .collect()
}

/// `|sum a_n r_n|_p / |a|_2` for the block built on `levels`.
pub fn rademacher_ratio(block: &[PiecewiseConstant<f64>], a: &[f64], p: f64) -> Result<f64> {
    let grid = block.iter().map(|r| r.grid).max().unwrap_or(0);
    let mut f = PiecewiseConstant::zero(grid)?;
    for (r, c) in block.iter().zip(a) {
        f.add_scaled(r, c)?;
    }
    let l2 = a.iter().map(|c| c * c).sum::<f64>().sqrt();
    Ok(lp_norm_pc(&f, p)? / l2)
}

/// Norm in `(sum_j L_p^{A_j})_{T^(p)}`: exact step-function norm per block,
/// then the `p`-convexified Tsirelson norm of the block norms.
pub fn haar_block_space_norm(levels: &[Vec<u32>], p: f64, coeffs: &[Vec<(DyadicInterval, f64)>]) -> Result<f64> {
    if coeffs.len() > levels.len() {
        return Err(Error::Domain {
            index: coeffs.len(),
            space: format!("Haar block space with {} blocks", levels.len()),
        });
    }
    let mut block_norms = Vec::with_capacity(coeffs.len());
    for (j, block) in coeffs.iter().enumerate() {
        for (iv, _) in block {
            if !levels[j].contains(&iv.level) {
                return Err(Error::Domain {
                    index: iv.level as usize,
                    space: format!("levels {:?} of block {}", levels[j], j + 1),
                });
            }
        }
        block_norms.push(if block.is_empty() { 0.0 } else { lp_norm_pc(&haar_expansion(block, p)?, p)? });
    }
    let outer = SpaceHandle::convexify(SpaceHandle::Tsirelson, p)?;
    norm_f64(&outer, &FinVec::from_dense(&block_norms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finvec::int;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn iv(n: u32, k: u64) -> DyadicInterval {
        DyadicInterval::new(n, k).unwrap()
    }

    #[test]
    fn intervals() {
        assert_eq!(DyadicInterval::level_set(4).unwrap().len(), 8);
        assert_eq!(iv(3, 2).length(), rat(1, 4));
        assert!(DyadicInterval::new(2, 2).is_err());
        assert!(DyadicInterval::new(0, 0).is_err());
        assert_eq!(iv(3, 1).to_string(), "[1/4, 2/4)");
    }

    #[test]
    fn haar_examples() {
        let h = haar_function(iv(1, 0), 2.0).unwrap();
        assert_eq!(h.values, vec![1.0, -1.0]);
        assert_eq!(lp_norm_pc(&h, 2.0).unwrap(), 1.0);
        let h = haar_function(iv(2, 0), 1.0).unwrap();
        assert_eq!(h.values, vec![2.0, -2.0, 0.0, 0.0]);
        for n in 1..6 {
            for k in 0..1u64 << (n - 1) {
                let h1 = haar_function_l1(iv(n, k)).unwrap();
                assert!(h1.integral_exact().is_zero());
                assert_eq!(h1.l1_norm_exact(), Rational::one());
                for p in [0.5, 1.0, 1.5, 3.0] {
                    assert!((lp_norm_pc(&haar_function(iv(n, k), p).unwrap(), p).unwrap() - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn step_norms() {
        let one = PiecewiseConstant::constant(3, 1.0).unwrap();
        for p in [0.5, 1.0, 2.0, 7.0, f64::INFINITY] {
            assert!((lp_norm_pc(&one, p).unwrap() - 1.0).abs() < 1e-14);
        }
        let f = PiecewiseConstant::from_values(vec![2.0, 0.0]).unwrap();
        assert_eq!(lp_norm_pc(&f, 1.0).unwrap(), 1.0);
        assert_eq!(lp_norm_pc(&f, f64::INFINITY).unwrap(), 2.0);
        assert!(PiecewiseConstant::<f64>::zero(MAX_GRID + 1).is_err());
        assert!(PiecewiseConstant::from_values(vec![1.0; 3]).is_err());
        assert!(f.to_csv().starts_with("cell,value\n0,2\n"));
    }

    #[test]
    fn haar_orthogonality_exact() {
        let all: Vec<_> = (1..5).flat_map(|n| DyadicInterval::level_set(n).unwrap()).collect();
        for a in &all {
            for b in &all {
                let ip = haar_function_l1(*a).unwrap().inner_exact(&haar_function_l1(*b).unwrap()).unwrap();
                assert_eq!(ip.is_zero(), a != b, "{a} {b}");
            }
        }
    }

    #[test]
    fn equi_examples() {
        let f = PiecewiseConstant::from_values(vec![int(2), int(0)]).unwrap();
        let half_eps = equi_integrability_check(&f, 1, 4, &[1, 9], &rat(1, 4)).unwrap();
        assert!(half_eps.holds && half_eps.integral == rat(1, 8));
        let eps = rat(1, 4);
        let check = equi_integrability_check(&f, 2, 5, &[0, 1], &rat(1, 2)).unwrap();
        assert!(check.holds);
        assert!(equi_integrability_check(&f, 2, 5, &[0, 1, 2], &eps).is_err());
        let zero = key_lemma_check(&f, 2, 5, &[], &rat(1, 2)).unwrap();
        assert!(zero.holds && zero.middle == Rational::one());
    }

    #[test]
    fn key_lemma_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for trial in 0..300 {
            let n = 1 + trial % 6;
            let r = [rat(1, 5), rat(1, 2), rat(4, 5)][trial as usize % 3].clone();
            let f = PiecewiseConstant::from_values((0..1usize << (n - 1)).map(|_| rat(rng.gen_range(-9..10), rng.gen_range(1..5))).collect()).unwrap();
            let g_grid = n + 6;
            let room = ((&r * &r) * Rational::from_integer((1u64 << (g_grid - n)).into())).floor().to_integer();
            let room: usize = room.try_into().unwrap();
            let mut cells: Vec<usize> = (0..1usize << g_grid).collect();
            cells.shuffle(&mut rng);
            cells.truncate(rng.gen_range(0..=room));
            cells.sort_unstable();
            let g: Vec<_> = cells.into_iter().map(|c| (c, rat(rng.gen_range(-40..40), rng.gen_range(1..3)))).collect();
            assert!(key_lemma_check(&f, n, g_grid, &g, &r).unwrap().holds);
        }
    }

    #[test]
    fn dhk_enclosures() {
        let (c1, c2) = dhk_constants(0, 1.0, 60).unwrap();
        assert!(c1.lo > 0.0 && c1.hi < 0.3);
        assert!(c1.hi <= 1.0 && c2.lo >= 1.0);
        let (far1, far2) = dhk_constants(80, 2.0, 60).unwrap();
        assert!(far1.lo > 1.0 - 1e-9 && far2.hi < 1.0 + 1e-9);
        let (t1, _) = dhk_constants(3, 2.0, 200).unwrap();
        let (l1, _) = dhk_constants(3, 2.0, 20).unwrap();
        assert!(l1.lo <= t1.lo && t1.hi <= l1.hi + 1e-15);
    }

    #[test]
    fn spread_examples() {
        let spec = SpreadSpec::minimal(1, 0, 2.0).unwrap();
        assert_eq!(spec.levels, vec![1, 4, 11]);
        assert!(SpreadSpec::new(vec![1, 3], 0, 2.0).is_err());
        let single = spread_equivalence_ratio(&spec, &[(iv(4, 3), -2.5)]).unwrap();
        assert!((single - 1.0).abs() < 1e-12);
        let two = [(iv(1, 0), 1.0), (iv(11, 700), 1.0)];
        let r = spread_equivalence_ratio(&spec, &two).unwrap();
        let (c1, c2) = dhk_constants(0, 2.0, 60).unwrap();
        assert!(c1.lo <= r && r <= c2.hi);
        assert!(spread_equivalence_ratio(&spec, &[(iv(2, 0), 1.0)]).is_err());
    }

    #[test]
    fn spread_bracket_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for u in [0, 2, 4] {
            for p in [1.0, 2.0, 3.0] {
                let spec = SpreadSpec::minimal(1, u, p).unwrap();
                let (c1, c2) = dhk_constants(u, p, 80).unwrap();
                for _ in 0..100 {
                    let coeffs = spec.sample(&mut rng);
                    let r = spread_equivalence_ratio(&spec, &coeffs).unwrap();
                    assert!(c1.lo <= r && r <= c2.hi, "u={u} p={p} r={r} {c1:?} {c2:?}");
                }
            }
        }
    }

    #[test]
    fn rademacher_examples() {
        let one = rademacher_block(&[1], 3.0).unwrap();
        assert_eq!(one[0], haar_function(iv(1, 0), 3.0).unwrap());
        let two = rademacher_block(&[1, 2], 2.0).unwrap();
        let r2 = two[1].refine(2).unwrap();
        assert!(r2.values.iter().all(|v| (v.abs() - 1.0).abs() < 1e-14));
        let r1 = two[0].refine(2).unwrap();
        let ip: f64 = r1.values.iter().zip(&r2.values).map(|(a, b)| a * b).sum();
        assert!(ip.abs() < 1e-14);
        assert!((lp_norm_pc(&two[1], 2.0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn block_space_examples() {
        let levels = vec![vec![1, 2], vec![3]];
        assert!((haar_block_space_norm(&levels, 2.0, &[vec![(iv(2, 1), -0.75)]]).unwrap() - 0.75).abs() < 1e-14);
        assert_eq!(haar_block_space_norm(&levels, 2.0, &[vec![], vec![]]).unwrap(), 0.0);
        assert!(haar_block_space_norm(&levels, 2.0, &[vec![(iv(3, 0), 1.0)]]).is_err());
    }
}
