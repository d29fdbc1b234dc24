//! Growth functions on the naturals: the fast growing hierarchy, iteration,
//! finite dominance certificates, the base-3 continuum family and the level
//! sets `A_{j,phi}` built from `alpha(k) = 5*2^(k-1) - 2k - 2`, `beta(k) = k^2`.
//!
//! Every evaluation is exact (`BigUint`) and bounded by a digit budget; a
//! value that would exceed it is reported as [`Error::Overflow`] instead of
//! being truncated.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finvec::Rational;

/// Default digit budget for growth-function values.
pub const DEFAULT_DIGIT_BUDGET: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GrowthFunction {
    /// `F_n` of the fast growing hierarchy.
    Fgh(u32),
    Identity,
    Const(u64),
    /// `outer o inner`.
    Composite(Box<GrowthFunction>, Box<GrowthFunction>),
    Sum(Box<GrowthFunction>, Box<GrowthFunction>),
    Product(Box<GrowthFunction>, Box<GrowthFunction>),
    /// `j -> base(j)^exponent(j)`.
    Power(Box<GrowthFunction>, Box<GrowthFunction>),
    /// `j -> sum_{i<=j} f(i)`.
    CumulativeSum(Box<GrowthFunction>),
    /// `nu o s_eps` for a finite prefix `eps`.
    ContinuumMember(ContinuumSpec),
    Alpha,
    Beta,
    /// `table[j-1]` for `j <= table.len()`.
    Explicit(Vec<u64>),
}

impl fmt::Display for GrowthFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use GrowthFunction::*;
        match self {
            Fgh(n) => write!(f, "fgh({n})"),
            Identity => write!(f, "id"),
            Const(c) => write!(f, "const({c})"),
            Explicit(t) => {
                let parts: Vec<String> = t.iter().map(|v| v.to_string()).collect();
                write!(f, "{}", parts.join(","))
            }
            Composite(a, b) => write!(f, "({a})o({b})"),
            Sum(a, b) => write!(f, "({a})+({b})"),
            Product(a, b) => write!(f, "({a})*({b})"),
            Power(a, b) => write!(f, "({a})^({b})"),
            CumulativeSum(a) => write!(f, "cumsum({a})"),
            ContinuumMember(s) => write!(f, "continuum({s})"),
            Alpha => write!(f, "alpha"),
            Beta => write!(f, "beta"),
        }
    }
}

fn budget_bits(digits: usize) -> u64 {
    (digits as f64 * std::f64::consts::LOG2_10).ceil() as u64
}

fn overflow(function: &GrowthFunction, argument: impl fmt::Display, budget_digits: usize) -> Error {
    Error::Overflow {
        function: function.to_string(),
        argument: argument.to_string(),
        budget_digits,
    }
}

/// Fast growing hierarchy `F_n(x)` by its defining recursion
/// `F_0(x) = x + 1`, `F_n(x) = F_{n-1}^{(x)}(x)`.
fn fgh(n: u32, x: &BigUint, budget: usize) -> Result<BigUint> {
    let limit = budget_bits(budget);
    let too_big = |v: &BigUint| v.bits() > limit;
    if n == 0 {
        let v = x + 1u32;
        return if too_big(&v) {
            Err(overflow(&GrowthFunction::Fgh(0), x, budget))
        } else {
            Ok(v)
        };
    }
    // x-fold iterate of F_{n-1}; F_0 iterates are translations.
    if n == 1 {
        let v = x + x;
        return if too_big(&v) {
            Err(overflow(&GrowthFunction::Fgh(1), x, budget))
        } else {
            Ok(v)
        };
    }
    // For n >= 2, F_n(x) >= F_2(x) = x 2^x, so x beyond the bit budget overflows.
    let count = match x.to_u64() {
        Some(c) if c <= limit => c,
        _ => return Err(overflow(&GrowthFunction::Fgh(n), x, budget)),
    };
    let mut acc = x.clone();
    for _ in 0..count {
        acc = fgh(n - 1, &acc, budget).map_err(|_| overflow(&GrowthFunction::Fgh(n), x, budget))?;
    }
    Ok(acc)
}

/// `F_n(j)`.
pub fn fgh_eval(n: u32, j: u64) -> Result<BigUint> {
    fgh(n, &BigUint::from(j), DEFAULT_DIGIT_BUDGET)
}

pub fn fgh_eval_with_budget(n: u32, j: u64, budget_digits: usize) -> Result<BigUint> {
    fgh(n, &BigUint::from(j), budget_digits)
}

impl GrowthFunction {
    pub fn compose(outer: GrowthFunction, inner: GrowthFunction) -> Self {
        GrowthFunction::Composite(Box::new(outer), Box::new(inner))
    }

    pub fn sum(a: GrowthFunction, b: GrowthFunction) -> Self {
        GrowthFunction::Sum(Box::new(a), Box::new(b))
    }

    pub fn product(a: GrowthFunction, b: GrowthFunction) -> Self {
        GrowthFunction::Product(Box::new(a), Box::new(b))
    }

    pub fn power(base: GrowthFunction, exponent: GrowthFunction) -> Self {
        GrowthFunction::Power(Box::new(base), Box::new(exponent))
    }

    pub fn cumulative_sum(f: GrowthFunction) -> Self {
        GrowthFunction::CumulativeSum(Box::new(f))
    }

    pub fn eval(&self, j: u64) -> Result<BigUint> {
        self.eval_big(&BigUint::from(j), DEFAULT_DIGIT_BUDGET)
    }

    pub fn eval_with_budget(&self, j: u64, budget_digits: usize) -> Result<BigUint> {
        self.eval_big(&BigUint::from(j), budget_digits)
    }

    /// Value as a `usize`, for functions used as indices or dimensions.
    pub fn eval_usize(&self, j: u64) -> Result<usize> {
        let v = self.eval(j)?;
        v.to_usize().ok_or_else(|| overflow(self, j, 19))
    }

    pub fn eval_big(&self, x: &BigUint, budget: usize) -> Result<BigUint> {
        use GrowthFunction::*;
        let limit = budget_bits(budget);
        let check = |v: BigUint| {
            if v.bits() > limit {
                Err(overflow(self, x, budget))
            } else {
                Ok(v)
            }
        };
        let small_arg = || {
            x.to_u64()
                .filter(|v| *v <= 1 << 32)
                .ok_or_else(|| overflow(self, x, budget))
        };
        match self {
            Fgh(n) => fgh(*n, x, budget),
            Identity => Ok(x.clone()),
            Const(c) => Ok(BigUint::from(*c)),
            Composite(outer, inner) => {
                let y = inner.eval_big(x, budget)?;
                outer.eval_big(&y, budget)
            }
            Sum(a, b) => check(a.eval_big(x, budget)? + b.eval_big(x, budget)?),
            Product(a, b) => check(a.eval_big(x, budget)? * b.eval_big(x, budget)?),
            Power(base, exponent) => {
                let b = base.eval_big(x, budget)?;
                let e = exponent.eval_big(x, budget)?;
                if b <= BigUint::one() {
                    return Ok(if e.is_zero() { BigUint::one() } else { b });
                }
                let e = e
                    .to_u64()
                    .filter(|e| e.saturating_mul(b.bits() - 1) <= limit)
                    .ok_or_else(|| overflow(self, x, budget))?;
                check(num_traits::pow(b, e as usize))
            }
            CumulativeSum(f) => {
                let j = small_arg()?;
                let mut total = BigUint::zero();
                for i in 1..=j {
                    total += f.eval_big(&BigUint::from(i), budget)?;
                    if total.bits() > limit {
                        return Err(overflow(self, x, budget));
                    }
                }
                Ok(total)
            }
            ContinuumMember(spec) => continuum_phi(spec, small_arg()? as usize),
            Alpha => {
                let k = x
                    .to_u64()
                    .filter(|k| *k >= 1 && *k <= limit)
                    .ok_or_else(|| {
                        if x.is_zero() {
                            Error::param("alpha is defined on k >= 1")
                        } else {
                            overflow(self, x, budget)
                        }
                    })?;
                let v = (BigUint::from(5u32) << (k - 1) as usize) - BigUint::from(2 * k + 2);
                check(v)
            }
            Beta => check(x * x),
            Explicit(table) => {
                let j = small_arg()? as usize;
                if j == 0 || j > table.len() {
                    return Err(Error::Domain {
                        index: j,
                        space: format!("explicit table of length {}", table.len()),
                    });
                }
                Ok(BigUint::from(table[j - 1]))
            }
        }
    }

    /// Strict monotonicity on `lo..=hi`, checked by evaluation.
    pub fn is_strictly_increasing_on(&self, lo: u64, hi: u64) -> Result<bool> {
        let mut prev: Option<BigUint> = None;
        for j in lo..=hi {
            let v = self.eval(j)?;
            if let Some(p) = &prev {
                if &v <= p {
                    return Ok(false);
                }
            }
            prev = Some(v);
        }
        Ok(true)
    }
}

/// `f^{(n)}(j)`: `n`-fold composition, `f^{(0)} = Id`.
pub fn iterate_fn(f: &GrowthFunction, n: u64, j: u64) -> Result<BigUint> {
    iterate_fn_with_budget(f, n, j, DEFAULT_DIGIT_BUDGET)
}

pub fn iterate_fn_with_budget(f: &GrowthFunction, n: u64, j: u64, budget: usize) -> Result<BigUint> {
    let mut acc = BigUint::from(j);
    match f {
        GrowthFunction::Identity => return Ok(acc),
        GrowthFunction::Fgh(0) => return Ok(acc + n),
        _ => {}
    }
    for _ in 0..n {
        acc = f.eval_big(&acc, budget)?;
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DominanceReport {
    /// `phi(j) <= F_n(j)` for every checked `j`.
    pub holds: bool,
    pub first_violation: Option<u64>,
    /// Arguments where `F_n(j)` exceeded the digit budget while `phi(j)` did
    /// not, so the inequality holds by magnitude alone.
    pub settled_by_magnitude: Vec<u64>,
}

/// Finite certificate that `phi(j) <= F_n(j)` for `j0 <= j <= jmax`.
pub fn dominance_check(phi: &GrowthFunction, n: u32, j0: u64, jmax: u64) -> Result<DominanceReport> {
    let mut settled = Vec::new();
    for j in j0..=jmax {
        let lhs = phi.eval(j)?;
        match fgh_eval(n, j) {
            Ok(rhs) => {
                if lhs > rhs {
                    return Ok(DominanceReport {
                        holds: false,
                        first_violation: Some(j),
                        settled_by_magnitude: settled,
                    });
                }
            }
            Err(Error::Overflow { .. }) => settled.push(j),
            Err(e) => return Err(e),
        }
    }
    Ok(DominanceReport {
        holds: true,
        first_violation: None,
        settled_by_magnitude: settled,
    })
}

/// Finite prefix of a sequence over `{1, 2}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ContinuumSpec {
    eps: Vec<u8>,
}

impl ContinuumSpec {
    pub fn new(eps: Vec<u8>) -> Result<Self> {
        if let Some(bad) = eps.iter().find(|e| **e != 1 && **e != 2) {
            return Err(Error::param(format!("continuum prefix entries must be 1 or 2, got {bad}")));
        }
        Ok(ContinuumSpec { eps })
    }

    pub fn random<R: Rng>(len: usize, rng: &mut R) -> Self {
        ContinuumSpec {
            eps: (0..len).map(|_| rng.gen_range(1..=2)).collect(),
        }
    }

    pub fn prefix(&self) -> &[u8] {
        &self.eps
    }

    pub fn len(&self) -> usize {
        self.eps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eps.is_empty()
    }

    /// First 1-based position where the two prefixes differ.
    pub fn first_disagreement(&self, other: &ContinuumSpec) -> Option<usize> {
        self.eps
            .iter()
            .zip(&other.eps)
            .position(|(a, b)| a != b)
            .map(|p| p + 1)
    }

    /// `s_eps(j) = sum_{n<=j} eps_n 3^{-n}`.
    pub fn partial_sum(&self, j: usize) -> Result<Rational> {
        if j == 0 || j > self.eps.len() {
            return Err(Error::param(format!(
                "continuum prefix of length {} cannot be evaluated at {j}",
                self.eps.len()
            )));
        }
        let mut num = BigInt::zero();
        for e in &self.eps[..j] {
            num = num * 3 + BigInt::from(*e);
        }
        Ok(Rational::new(num, BigInt::from(3u32).pow(j as u32)))
    }
}

impl fmt::Display for ContinuumSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.eps {
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

/// `nu(x) = 3^{j(x)} (1 + 2x)` with `j(x) = min{ j : 3^j x integer }`, for
/// triadic rationals `x` in `(0, 1]`.
pub fn nu(x: &Rational) -> Result<BigUint> {
    if *x <= Rational::zero() || *x > Rational::one() {
        return Err(Error::param(format!("nu is defined on (0, 1], got {x}")));
    }
    let mut d = x.denom().clone();
    let mut j = 0u32;
    let three = BigInt::from(3u32);
    while d > BigInt::one() {
        let (q, r) = d.div_rem(&three);
        if !r.is_zero() {
            return Err(Error::param(format!("{x} is not a triadic rational")));
        }
        d = q;
        j += 1;
    }
    let scale = Rational::from_integer(three.pow(j));
    let v = scale * (Rational::one() + x * Rational::from_integer(BigInt::from(2)));
    debug_assert!(v.is_integer());
    Ok(v.to_integer().to_biguint().expect("positive"))
}

/// `phi_eps(j) = nu(s_eps(j))`.
pub fn continuum_phi(spec: &ContinuumSpec, j: usize) -> Result<BigUint> {
    nu(&spec.partial_sum(j)?)
}

pub fn alpha(k: u64) -> Result<BigUint> {
    GrowthFunction::Alpha.eval(k)
}

pub fn beta(k: u64) -> u64 {
    k * k
}

/// `A_{j,phi} = { alpha(phi(n)) : beta(j-1) < n <= beta(j) }`, sorted.
pub fn levels_a(phi: &GrowthFunction, j: u64) -> Result<Vec<BigUint>> {
    if j == 0 {
        return Err(Error::param("levels_a is indexed by j >= 1"));
    }
    let lo = beta(j - 1) + 1;
    let hi = beta(j);
    let mut out = Vec::with_capacity((hi - lo + 1) as usize);
    let mut prev: Option<BigUint> = None;
    for n in lo..=hi {
        let v = phi.eval(n)?;
        if let Some(p) = &prev {
            if &v <= p {
                return Err(Error::invariant(format!("{phi} is not strictly increasing at n = {n}")));
            }
        }
        prev = Some(v.clone());
        out.push(GrowthFunction::Alpha.eval_big(&v, DEFAULT_DIGIT_BUDGET)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn fgh_small_values() {
        assert_eq!(fgh_eval(0, 7).unwrap(), big(8));
        assert_eq!(fgh_eval(1, 5).unwrap(), big(10));
        assert_eq!(fgh_eval(2, 3).unwrap(), big(24));
        // F_3(2) = F_2(F_2(2)) = F_2(8)
        assert_eq!(fgh_eval(3, 2).unwrap(), big(2048));
        assert_eq!(fgh_eval(4, 1).unwrap(), big(2));
    }

    #[test]
    fn fgh_overflow_is_signalled() {
        match fgh_eval(3, 3) {
            Err(Error::Overflow { .. }) => {}
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn iterate_examples() {
        for j in 1..6 {
            for k in 0..6 {
                assert_eq!(iterate_fn(&GrowthFunction::Fgh(0), k, j).unwrap(), big(j + k));
                assert_eq!(iterate_fn(&GrowthFunction::Fgh(1), k, j).unwrap(), big(j << k));
            }
            assert_eq!(iterate_fn(&GrowthFunction::Fgh(2), 0, j).unwrap(), big(j));
        }
    }

    #[test]
    fn dominance_examples() {
        let three_pow = GrowthFunction::power(
            GrowthFunction::Const(3),
            GrowthFunction::sum(GrowthFunction::Identity, GrowthFunction::Const(1)),
        );
        // 3^{j+1} outgrows j 2^j.
        let r = dominance_check(&three_pow, 2, 6, 30).unwrap();
        assert!(!r.holds);
        assert_eq!(r.first_violation, Some(6));
        let r = dominance_check(&three_pow, 3, 2, 30).unwrap();
        assert!(r.holds);
        assert!(!r.settled_by_magnitude.is_empty());

        let r = dominance_check(&GrowthFunction::Fgh(2), 1, 1, 10).unwrap();
        assert!(!r.holds);
        // F_2(2) = 8 > F_1(2) = 4
        assert_eq!(r.first_violation, Some(2));

        assert!(dominance_check(&GrowthFunction::Identity, 0, 1, 100).unwrap().holds);
    }

    #[test]
    fn continuum_examples() {
        let ones = ContinuumSpec::new(vec![1; 4]).unwrap();
        let twos = ContinuumSpec::new(vec![2; 4]).unwrap();
        assert_eq!(continuum_phi(&ones, 1).unwrap(), big(5));
        assert_eq!(continuum_phi(&twos, 1).unwrap(), big(7));
        assert_eq!(continuum_phi(&ones, 2).unwrap(), big(17));
        assert!(continuum_phi(&ones, 5).is_err());
        assert!(ContinuumSpec::new(vec![1, 3]).is_err());
    }

    #[test]
    fn nu_rejects_non_triadic() {
        assert!(nu(&crate::finvec::rat(1, 2)).is_err());
        assert!(nu(&crate::finvec::rat(0, 1)).is_err());
        assert_eq!(nu(&crate::finvec::rat(1, 1)).unwrap(), big(3));
    }

    #[test]
    fn alpha_and_level_sets() {
        assert_eq!(alpha(1).unwrap(), big(1));
        assert_eq!(alpha(2).unwrap(), big(4));
        assert_eq!(alpha(3).unwrap(), big(12));
        assert_eq!(alpha(4).unwrap(), big(30));
        assert_eq!(levels_a(&GrowthFunction::Identity, 1).unwrap(), vec![big(1)]);
        assert_eq!(
            levels_a(&GrowthFunction::Identity, 2).unwrap(),
            vec![big(4), big(12), big(30)]
        );
        assert_eq!(levels_a(&GrowthFunction::Identity, 3).unwrap().len(), 5);
        let flat = GrowthFunction::Explicit(vec![1, 2, 2, 3, 4, 5, 6, 7, 8]);
        assert!(matches!(levels_a(&flat, 2), Err(Error::Invariant(_))));
    }

    #[test]
    fn alpha_gap() {
        for k in 1..=40u64 {
            let a = alpha(k).unwrap();
            let b = alpha(k + 1).unwrap();
            assert!(b >= a + big(k + 2), "alpha gap fails at {k}");
        }
    }

    #[test]
    fn explicit_table_bounds() {
        let t = GrowthFunction::Explicit(vec![3, 5]);
        assert_eq!(t.eval(2).unwrap(), big(5));
        assert!(t.eval(3).is_err());
        assert!(t.eval(0).is_err());
    }

    #[test]
    fn cumulative_sum_of_identity() {
        let c = GrowthFunction::cumulative_sum(GrowthFunction::Identity);
        assert_eq!(c.eval(3).unwrap(), big(6));
    }
}
