//! Seeded desk-scale experiments shared by the command line and the
//! acceptance suite. Each report says whether its asserted invariants held.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dkk::{averaging_projection, build_ag_basis, dkk_witness_ratio, imp_estimate_check, partial_sum_growth, DkkSpec, OrderedPartition};
use crate::error::{Error, Result};
use crate::finvec::{int, rat, FinVec, Rational};
use crate::greedy::{fundamental_function, random_rational_vector, BasisHandle, SearchMode};
use crate::haar::{dhk_constants, key_lemma_check, spread_equivalence_ratio, PiecewiseConstant, SpreadSpec};
use crate::hierarchy::{continuum_phi, fgh_eval, ContinuumSpec, GrowthFunction};
use crate::spaces::{norm, square_norm, square_reindex, Norm, SpaceHandle};
use crate::trig::linear_fit;
use crate::tsirelson::{tsirelson_norm, tsirelson_norm_bruteforce, BRUTEFORCE_MAX_INDEX};

fn random_rational<R: Rng>(rng: &mut R) -> Rational {
    rat(rng.gen_range(-20i64..=20), rng.gen_range(1..=9))
}

fn sparse_rational<R: Rng>(top: usize, density: f64, rng: &mut R) -> Result<FinVec<Rational>> {
    let mut entries = Vec::new();
    for j in 1..=top {
        if rng.gen_bool(density) {
            entries.push((j, random_rational(rng)));
        }
    }
    FinVec::from_entries(entries)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OracleReport {
    pub max_index: usize,
    pub indicators: usize,
    pub random: usize,
    pub mismatches: Vec<String>,
    pub holds: bool,
}

/// Dynamic program against brute force on every 0/1 vector over `[1, n]` and
/// on `cases` random rational vectors.
pub fn oracle_check<R: Rng>(n: usize, cases: usize, rng: &mut R) -> Result<OracleReport> {
    if n == 0 || n > BRUTEFORCE_MAX_INDEX {
        return Err(Error::Size {
            what: "oracle support",
            limit: BRUTEFORCE_MAX_INDEX,
            got: n,
        });
    }
    let mut mismatches = Vec::new();
    let mut compare = |f: &FinVec<Rational>| -> Result<()> {
        let (dp, bf) = (tsirelson_norm(f), tsirelson_norm_bruteforce(f)?);
        if dp != bf {
            mismatches.push(format!("{f:?}: dp {dp} vs oracle {bf}"));
        }
        Ok(())
    };
    let indicators = (1u32 << n) - 1;
    for mask in 1..=indicators {
        compare(&FinVec::indicator((1..=n).filter(|j| mask >> (j - 1) & 1 == 1)))?;
    }
    for _ in 0..cases {
        let f = sparse_rational(n, 0.7, rng)?;
        compare(&f)?;
    }
    Ok(OracleReport {
        max_index: n,
        indicators: indicators as usize,
        random: cases,
        holds: mismatches.is_empty(),
        mismatches,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BracketRow {
    pub m: usize,
    /// `|1_{[m+1, 2m]}|`.
    #[serde(with = "crate::finvec::rational_str")]
    pub shifted: Rational,
    /// `|1_{[1, m]}|`.
    #[serde(with = "crate::finvec::rational_str")]
    pub prefix: Rational,
}

/// `|1_{[m+1,2m]}| >= m/2` and `|1_{[1,m]}| <= m` in Tsirelson's space.
pub fn fundamental_bracket(mmax: usize) -> (Vec<BracketRow>, bool) {
    let mut rows = Vec::with_capacity(mmax);
    let mut holds = true;
    for m in 1..=mmax {
        let shifted = tsirelson_norm(&FinVec::indicator(m + 1..=2 * m));
        let prefix = tsirelson_norm(&FinVec::indicator(1..=m));
        holds &= shifted >= rat(m as i64, 2) && prefix <= int(m as i64);
        rows.push(BracketRow { m, shifted, prefix });
    }
    (rows, holds)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DrawReport {
    pub draws: usize,
    pub violations: Vec<String>,
    pub holds: bool,
}

impl DrawReport {
    fn new(draws: usize, violations: Vec<String>) -> Self {
        DrawReport {
            draws,
            holds: violations.is_empty(),
            violations,
        }
    }
}

/// Random `f` on `Sigma_n` (`n <= 6`), `g` on a set of measure at most
/// `2^{-n} eps` with `eps = r^2` for `r` in `roots`; checks equi-integrability
/// and the two-sided `L_1` bound.
pub fn key_lemma_draws<R: Rng>(draws: usize, roots: &[Rational], rng: &mut R) -> Result<DrawReport> {
    let mut violations = Vec::new();
    for d in 0..draws {
        let n: u32 = rng.gen_range(1..=6);
        let r = roots[d % roots.len()].clone();
        let f = PiecewiseConstant::from_values((0..1usize << (n - 1)).map(|_| random_rational(rng)).collect())?;
        let g_grid = n + 8;
        let room = (&r * &r * Rational::from_integer(BigUint::from(1u32 << 8).into())).floor().to_integer();
        let room: usize = room.try_into().unwrap_or(0);
        let count = rng.gen_range(0..=room);
        let mut cells: Vec<usize> = (0..1usize << g_grid).collect::<Vec<_>>().choose_multiple(rng, count).copied().collect();
        cells.sort_unstable();
        let g: Vec<(usize, Rational)> = cells.iter().map(|c| (*c, rat(rng.gen_range(-60i64..=60), rng.gen_range(1..=4)))).collect();
        let equi = crate::haar::equi_integrability_check(&f, n, g_grid, &cells, &(&r * &r))?;
        let key = key_lemma_check(&f, n, g_grid, &g, &r)?;
        if !equi.holds {
            violations.push(format!("draw {d}: integral {} exceeds {}", equi.integral, equi.bound));
        }
        if !key.holds {
            violations.push(format!("draw {d}: {} not in [{}, {}]", key.middle, key.lower, key.upper));
        }
    }
    Ok(DrawReport::new(draws, violations))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpreadReport {
    pub u: u32,
    pub p: f64,
    pub levels: Vec<u32>,
    pub c1: (f64, f64),
    pub c2: (f64, f64),
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub draws: usize,
    pub violations: usize,
    pub holds: bool,
}

/// Spread Haar subsystem ratios against the `C_1(u)`, `C_2(u)` enclosures.
pub fn spread_bracket_draws<R: Rng>(u: u32, p: f64, draws: usize, rng: &mut R) -> Result<SpreadReport> {
    let spec = SpreadSpec::minimal(1, u, p)?;
    let (c1, c2) = dhk_constants(u, p, 200)?;
    let (mut lo, mut hi, mut bad) = (f64::INFINITY, 0.0f64, 0);
    for _ in 0..draws {
        let coeffs = spec.sample(rng);
        let r = spread_equivalence_ratio(&spec, &coeffs)?;
        lo = lo.min(r);
        hi = hi.max(r);
        if !(c1.lo <= r && r <= c2.hi) {
            bad += 1;
        }
    }
    Ok(SpreadReport {
        u,
        p,
        levels: spec.levels,
        c1: (c1.lo, c1.hi),
        c2: (c2.lo, c2.hi),
        min_ratio: lo,
        max_ratio: hi,
        draws,
        violations: bad,
        holds: bad == 0,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HierarchyReport {
    pub violations: Vec<String>,
    pub holds: bool,
}

/// `F_1(j) = 2j`, `F_2(j) = j 2^j` for `j <= jmax`, and `F_n(j) <= F_{n+1}(j)`
/// for `n < nmax`, `j <= jmono`.
pub fn hierarchy_identities(jmax: u64, nmax: u32, jmono: u64) -> Result<HierarchyReport> {
    let mut violations = Vec::new();
    for j in 1..=jmax {
        if fgh_eval(1, j)? != BigUint::from(2 * j) {
            violations.push(format!("F_1({j})"));
        }
        if fgh_eval(2, j)? != BigUint::from(j) << j as usize {
            violations.push(format!("F_2({j})"));
        }
    }
    for j in 1..=jmono {
        let mut prev: Option<BigUint> = None;
        for n in 0..=nmax {
            // beyond the digit budget F_n(j) is larger than any value that fits
            let v = match fgh_eval(n, j) {
                Ok(v) => Some(v),
                Err(Error::Overflow { .. }) => None,
                Err(e) => return Err(e),
            };
            match (&prev, &v) {
                (Some(a), Some(b)) if a > b => violations.push(format!("F_{}({j}) > F_{n}({j})", n - 1)),
                (None, Some(_)) if n > 0 => violations.push(format!("F_{}({j}) overflowed but F_{n}({j}) did not", n - 1)),
                _ => {}
            }
            prev = v;
        }
    }
    Ok(HierarchyReport {
        holds: violations.is_empty(),
        violations,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ContinuumRow {
    pub prefix: String,
    pub values: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ContinuumReport {
    pub jmax: usize,
    pub rows: Vec<ContinuumRow>,
    pub violations: Vec<String>,
    pub holds: bool,
}

/// Tables of `phi_eps(j)` for seeded prefixes with the bound
/// `phi_eps(j) <= 3^{j+1}` and the range-intersection rule: a common value
/// `phi_eps(j) = phi_delta(k)` forces `j = k` before the first disagreement.
pub fn continuum_check<R: Rng>(count: usize, jmax: usize, rng: &mut R) -> Result<ContinuumReport> {
    let specs: Vec<ContinuumSpec> = (0..count).map(|_| ContinuumSpec::random(jmax, rng)).collect();
    let tables: Vec<Vec<BigUint>> = specs
        .iter()
        .map(|s| (1..=jmax).map(|j| continuum_phi(s, j)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let mut violations = Vec::new();
    for (s, t) in specs.iter().zip(&tables) {
        for (j, v) in t.iter().enumerate() {
            if *v > BigUint::from(3u32).pow(j as u32 + 2) {
                violations.push(format!("phi_{s}({}) = {v} exceeds 3^{}", j + 1, j + 2));
            }
        }
    }
    for a in 0..count {
        for b in a + 1..count {
            if specs[a] == specs[b] {
                continue;
            }
            let d = specs[a].first_disagreement(&specs[b]).expect("distinct prefixes of equal length");
            for (j, va) in tables[a].iter().enumerate() {
                for (k, vb) in tables[b].iter().enumerate() {
                    if va == vb && (j != k || j + 1 >= d) {
                        violations.push(format!("phi_{}({}) = phi_{}({}) = {va} with first disagreement {d}", specs[a], j + 1, specs[b], k + 1));
                    }
                }
            }
        }
    }
    let rows = specs
        .iter()
        .zip(&tables)
        .map(|(s, t)| ContinuumRow {
            prefix: s.to_string(),
            values: t.iter().map(|v| v.to_string()).collect(),
        })
        .collect();
    Ok(ContinuumReport {
        jmax,
        rows,
        holds: violations.is_empty(),
        violations,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SquareSplitReport {
    pub samples: usize,
    pub max_index: usize,
    /// `min` and `max` of `|f|_T / max(|f_1|_T, |f_2|_T)`.
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// `max_ratio / min_ratio`, the regression quantity.
    pub spread: f64,
    /// The lattice form of the square is an isometry; this must be 1.
    pub lattice_ratio_max_deviation: f64,
    pub holds: bool,
}

/// Splits `f` along `pi(j, n) = 2n + j - 2` into its odd and even parts.
pub fn square_split<R: Rng>(samples: usize, max_index: usize, rng: &mut R) -> Result<SquareSplitReport> {
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    let mut deviation = 0.0f64;
    for _ in 0..samples {
        let f = random_rational_vector(max_index, 0.6, rng);
        let whole = tsirelson_norm(&f);
        let blocks = square_reindex(&f);
        let parts = [tsirelson_norm(&blocks.block(1)), tsirelson_norm(&blocks.block(2))];
        let outer = parts.iter().max().expect("two blocks").clone();
        let r = crate::finvec::rational_to_f64(&(&whole / &outer));
        lo = lo.min(r);
        hi = hi.max(r);
        let lattice = square_norm(&SpaceHandle::Tsirelson, &blocks)?;
        deviation = deviation.max((Norm::Exact(whole).ratio(&lattice).to_f64() - 1.0).abs());
    }
    let spread = hi / lo;
    Ok(SquareSplitReport {
        samples,
        max_index,
        min_ratio: lo,
        max_ratio: hi,
        spread,
        lattice_ratio_max_deviation: deviation,
        holds: spread.is_finite() && deviation == 0.0,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IsoRatioReport {
    pub phi: String,
    pub p: f64,
    pub samples: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub holds: bool,
}

/// `|f|_{T^(p)}` over the norm of the same coefficients in
/// `(sum_j l_p^{phi(j)})_{T^(p)}` under the canonical block bijection.
pub fn iso_ratio<R: Rng>(phi: &GrowthFunction, p: f64, samples: usize, max_index: usize, rng: &mut R) -> Result<IsoRatioReport> {
    let tp = SpaceHandle::convexify(SpaceHandle::Tsirelson, p)?;
    let sum = SpaceHandle::direct_sum(tp.clone(), SpaceHandle::lp(p)?, phi.clone());
    sum.validate()?;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for _ in 0..samples {
        let f = random_rational_vector(max_index, 0.6, rng);
        let r = norm(&tp, &f)?.ratio(&norm(&sum, &f)?).to_f64();
        lo = lo.min(r);
        hi = hi.max(r);
    }
    Ok(IsoRatioReport {
        phi: phi.to_string(),
        p,
        samples,
        min_ratio: lo,
        max_ratio: hi,
        holds: lo > 0.0 && hi.is_finite(),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DkkAlgebraReport {
    pub projection_checks: usize,
    pub biorthogonal_pairs: usize,
    pub imp_draws: usize,
    pub imp_min_slack: f64,
    pub violations: Vec<String>,
    pub holds: bool,
}

/// Exact `P^2 = P`, `QP = 0`, biorthogonality of `(v_n, v_n^*)`, and the
/// improvement estimate on random draws, over `S = l_2` with blocks `2^{n-1}`.
pub fn dkk_algebra<R: Rng>(blocks: usize, draws: usize, rng: &mut R) -> Result<DkkAlgebraReport> {
    let sigma = OrderedPartition::geometric(blocks);
    let spec = DkkSpec::new(SpaceHandle::lp(2.0)?, SpaceHandle::lp(2.0)?, sigma.clone())?;
    let top = sigma.cumulative(blocks);
    let mut violations = Vec::new();
    for d in 0..draws {
        let f = sparse_rational(top, 0.6, rng)?;
        let (p, q) = averaging_projection(&sigma, &f)?;
        let (pp, qp) = averaging_projection(&sigma, &p)?;
        if pp != p || !qp.is_zero() || p.add(&q) != f {
            violations.push(format!("projection identity fails on draw {d}"));
        }
    }
    let mut pairs = 0;
    for k in 1..=blocks {
        for n in 1..=blocks {
            let want = if k == n { Rational::one() } else { Rational::zero() };
            if spec.pairing(k, n)? != want {
                violations.push(format!("v_{k}^*(v_{n}) != {want}"));
            }
            pairs += 1;
        }
    }
    let mut min_slack = f64::INFINITY;
    for d in 0..draws {
        let f = FinVec::from_entries((1..=top).map(|j| (j, rng.gen_range(-1.0..1.0))))?;
        let a: Vec<usize> = (1..=top).filter(|_| rng.gen_bool(0.5)).collect();
        let r = imp_estimate_check(&spec, &f, &a, 2.0)?;
        min_slack = min_slack.min(r.slack);
        if !r.holds {
            violations.push(format!("improvement estimate fails on draw {d}: {} > {}", r.lhs, r.rhs));
        }
    }
    Ok(DkkAlgebraReport {
        projection_checks: draws,
        biorthogonal_pairs: pairs,
        imp_draws: draws,
        imp_min_slack: min_slack,
        holds: violations.is_empty(),
        violations,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DkkBuildReport {
    pub p: f64,
    pub a: f64,
    pub jmax: usize,
    pub dimension: usize,
    pub layout: Vec<(usize, usize, bool)>,
    /// `(j, M_j, witness ratio)` for the DKK block `2j - 1`.
    pub witness: Vec<(usize, usize, f64)>,
    /// Slope of the witness ratio against `log log M_j` (needs `jmax >= 3`).
    pub witness_slope: Option<f64>,
    /// `phi(m)` of the composite on the window, lower bounds beyond budget.
    pub fundamental: Vec<(usize, f64, SearchMode)>,
    pub fundamental_exponent: Option<f64>,
    pub partial_sum_max: Vec<f64>,
    pub partial_sum_slope: f64,
    pub imp_draws: usize,
    pub violations: Vec<String>,
    pub holds: bool,
}

/// Builds the alternating composite and runs its diagnostics.
pub fn dkk_build<R: Rng>(p: f64, a: f64, jmax: usize, window: usize, draws: usize, rng: &mut R) -> Result<DkkBuildReport> {
    let sigma = OrderedPartition::geometric(jmax.max(1));
    let basis = build_ag_basis(p, a, &sigma, jmax)?;
    let mut violations = Vec::new();
    let mut witness = Vec::new();
    for j in 1..=jmax {
        let spec = basis.dkk_block(j)?;
        for n in 1..=j {
            for k in 1..=j {
                let want = if n == k { Rational::one() } else { Rational::zero() };
                if spec.pairing(k, n)? != want {
                    violations.push(format!("block {j}: v_{k}^*(v_{n}) != {want}"));
                }
            }
        }
        witness.push((j, spec.sigma.cumulative(j), dkk_witness_ratio(&spec, j)?));
    }
    let usable: Vec<_> = witness.iter().filter(|(_, m, _)| *m >= 3).collect();
    let witness_slope = if usable.len() >= 2 {
        let xs: Vec<f64> = usable.iter().map(|(_, m, _)| (*m as f64).ln().ln()).collect();
        let ys: Vec<f64> = usable.iter().map(|(_, _, r)| r.ln()).collect();
        Some(linear_fit(&xs, &ys)?.0)
    } else {
        None
    };
    let handle = BasisHandle::new(basis.space.clone())?;
    let window = window.min(basis.dimension());
    let mmax = (window / 2).max(1);
    let phi = if window >= 2 {
        let ff = fundamental_function(&handle, mmax, window, rng)?;
        ff.values.iter().zip(&ff.modes).enumerate().map(|(i, (v, m))| (i + 1, v.to_f64(), *m)).collect()
    } else {
        Vec::new()
    };
    let fundamental_exponent = if phi.len() >= 2 {
        let xs: Vec<f64> = phi.iter().map(|(m, _, _)| (*m as f64).ln()).collect();
        let ys: Vec<f64> = phi.iter().map(|(_, v, _)| v.ln()).collect();
        Some(linear_fit(&xs, &ys)?.0)
    } else {
        None
    };
    let last = basis.dkk_block(jmax)?;
    let dim = last.sigma.cumulative(jmax);
    let dkk_space = SpaceHandle::dkk(last.clone());
    let dims: Vec<usize> = (1..=jmax).map(|r| last.sigma.cumulative(r)).collect();
    let batches: Vec<Vec<FinVec<f64>>> = dims
        .iter()
        .map(|d| (0..4).map(|_| FinVec::from_entries((1..=*d).map(|j| (j, rng.gen_range(-1.0..1.0)))).expect("positive")).collect())
        .collect();
    let (partial_sum_max, partial_sum_slope) = if dims.len() >= 2 {
        let rep = partial_sum_growth(&dkk_space, &batches, &dims)?;
        (rep.max_ratio, rep.slope)
    } else {
        (vec![], 0.0)
    };
    if partial_sum_slope >= 0.2 {
        violations.push(format!("partial-sum growth slope {partial_sum_slope} is not below 0.2"));
    }
    let s_spec = DkkSpec::new(last.base.clone(), SpaceHandle::lp(p)?, last.sigma.clone())?;
    for d in 0..draws {
        let f = FinVec::from_entries((1..=dim).map(|j| (j, rng.gen_range(-1.0..1.0))))?;
        let set: Vec<usize> = (1..=dim).filter(|_| rng.gen_bool(0.5)).collect();
        let r = imp_estimate_check(&s_spec, &f, &set, p)?;
        if !r.holds {
            violations.push(format!("improvement estimate fails on draw {d}"));
        }
    }
    Ok(DkkBuildReport {
        p,
        a,
        jmax,
        dimension: basis.dimension(),
        layout: basis.layout.clone(),
        witness,
        witness_slope,
        fundamental: phi,
        fundamental_exponent,
        partial_sum_max,
        partial_sum_slope,
        imp_draws: draws,
        holds: violations.is_empty(),
        violations,
    })
}
