//! The trigonometric system `1/sqrt(2 pi), cos(jt)/sqrt(pi), sin(jt)/sqrt(pi)`
//! in `L_2([-pi, pi], |t|^lambda dt)`, its Gram matrices, the rotated system
//! in `L_2(|t|^a) + L_2(|t|^-a)` and coordinate-projection norms for Hilbert
//! engines.
//!
//! Every Gram entry reduces to the one-sided moments
//! `I(w) = int_0^pi cos(w t) t^lambda dt`:
//!
//! ```text
//! G[1,1]       = I(0) / pi
//! G[1,2j]      = sqrt(2) I(j) / pi
//! G[2j,2k]     = (I(j-k) + I(j+k)) / pi
//! G[2j+1,2k+1] = (I(j-k) - I(j+k)) / pi
//! ```
//!
//! with every cosine/sine cross term zero by parity.

use std::collections::HashMap;
use std::fs;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock, RwLock};

use gauss_quad::legendre::GaussLegendre;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finvec::FinVec;

pub const GL_NODES: usize = 32;
pub const DEFAULT_TOL: f64 = 1e-10;
/// Dyadic refinement toward the singularity stops at this width.
const MIN_PANEL: f64 = 9.094947017729282e-13; // 2^-40
const MAX_REFINEMENTS: usize = 6;

fn rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(NonZeroUsize::new(GL_NODES).expect("nonzero")))
}

/// `int_0^pi cos(w t) t^lambda dt` on `per_period` panels per half period,
/// plus dyadic panels toward 0 and the analytic piece on `[0, 2^-40]`.
fn moment_with(w: f64, lambda: f64, refine: usize) -> f64 {
    let gl = rule();
    let f = |t: f64| (w * t).cos() * t.powf(lambda);
    let base = (w.ceil() as usize).max(8) << refine;
    let width = std::f64::consts::PI / base as f64;
    let mut total = 0.0;
    for k in 1..base {
        let a = width * k as f64;
        total += gl.integrate(a, a + width, f);
    }
    let mut hi = width;
    while hi > MIN_PANEL {
        let lo = hi / 2.0;
        total += gl.integrate(lo, hi, f);
        hi = lo;
    }
    total + hi.powf(lambda + 1.0) / (lambda + 1.0)
}

fn moment(w: usize, lambda: f64, tol: f64) -> Result<f64> {
    let w = w as f64;
    let mut coarse = moment_with(w, lambda, 0);
    for refine in 1..=MAX_REFINEMENTS {
        let fine = moment_with(w, lambda, refine);
        if (fine - coarse).abs() <= tol * 0.1 {
            return Ok(fine);
        }
        coarse = fine;
    }
    Err(Error::Quadrature {
        what: format!("moment I({w}) for lambda = {lambda}"),
        tol,
        estimate: (moment_with(w, lambda, MAX_REFINEMENTS) - coarse).abs(),
    })
}

type MomentCache = RwLock<HashMap<(u64, u64), Arc<Vec<f64>>>>;

fn moment_cache() -> &'static MomentCache {
    static CACHE: OnceLock<MomentCache> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Moments `I(0..=max_w)`, shared across calls.
fn moments(lambda: f64, max_w: usize, tol: f64) -> Result<Arc<Vec<f64>>> {
    let key = (lambda.to_bits(), tol.to_bits());
    if let Some(m) = moment_cache().read().expect("cache lock").get(&key) {
        if m.len() > max_w {
            return Ok(m.clone());
        }
    }
    let values: Result<Vec<f64>> = (0..=max_w).into_par_iter().map(|w| moment(w, lambda, tol)).collect();
    let values = Arc::new(values?);
    let mut cache = moment_cache().write().expect("cache lock");
    let entry = cache.entry(key).or_insert_with(|| values.clone());
    if entry.len() < values.len() {
        *entry = values.clone();
    }
    Ok(values)
}

/// Gram matrix of the first `dim` trigonometric functions.
#[derive(Clone, Debug)]
pub struct TrigGram {
    pub lambda: f64,
    pub dim: usize,
    pub tol: f64,
    pub matrix: DMatrix<f64>,
}

#[derive(Serialize, Deserialize, PartialEq, Debug)]
struct GramSidecar {
    lambda: f64,
    n: usize,
    tol: f64,
    nodes: usize,
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > -1.0 && lambda < 1.0) {
        return Err(Error::param(format!("weight exponent must lie in (-1, 1), got {lambda}")));
    }
    Ok(())
}

/// 1-based index `n` to `(frequency, is_sine)`; `n = 1` is the constant.
fn mode(n: usize) -> (usize, bool) {
    (n / 2, n > 1 && n % 2 == 1)
}

pub fn trig_gram(lambda: f64, dim: usize, tol: f64) -> Result<TrigGram> {
    check_lambda(lambda)?;
    if dim == 0 {
        return Err(Error::param("Gram dimension must be positive"));
    }
    let m = moments(lambda, dim, tol)?;
    let pi = std::f64::consts::PI;
    let entry = |i: usize, j: usize| -> f64 {
        let (fi, si) = mode(i);
        let (fj, sj) = mode(j);
        if si != sj {
            return 0.0;
        }
        match (fi, fj) {
            (0, 0) => m[0] / pi,
            (0, k) | (k, 0) => {
                if si {
                    0.0
                } else {
                    std::f64::consts::SQRT_2 * m[k] / pi
                }
            }
            (j, k) => {
                let diff = m[j.abs_diff(k)];
                let sum = m[j + k];
                if si {
                    (diff - sum) / pi
                } else {
                    (diff + sum) / pi
                }
            }
        }
    };
    let matrix = DMatrix::from_fn(dim, dim, |i, j| entry(i + 1, j + 1));
    if matrix.clone().cholesky().is_none() {
        return Err(Error::invariant(format!(
            "Gram matrix for lambda = {lambda}, N = {dim} is not positive definite"
        )));
    }
    Ok(TrigGram {
        lambda,
        dim,
        tol,
        matrix,
    })
}

type GramCache = RwLock<HashMap<(u64, usize), Arc<TrigGram>>>;

/// [`trig_gram`] at the default tolerance, memoised per `(lambda, dim)`.
pub fn trig_gram_cached(lambda: f64, dim: usize) -> Result<Arc<TrigGram>> {
    static CACHE: OnceLock<GramCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = (lambda.to_bits(), dim);
    if let Some(g) = cache.read().expect("cache lock").get(&key) {
        return Ok(g.clone());
    }
    let g = Arc::new(trig_gram(lambda, dim, DEFAULT_TOL)?);
    cache.write().expect("cache lock").insert(key, g.clone());
    Ok(g)
}

impl TrigGram {
    /// `c^T G c` over the first `dim` coordinates.
    pub fn quad_form(&self, c: &[f64]) -> f64 {
        let n = c.len().min(self.dim);
        let mut total = 0.0;
        for i in 0..n {
            if c[i] == 0.0 {
                continue;
            }
            let mut row = 0.0;
            for j in 0..n {
                row += self.matrix[(i, j)] * c[j];
            }
            total += c[i] * row;
        }
        total
    }

    pub fn norm(&self, f: &FinVec<f64>) -> Result<f64> {
        let dense = dense_within(f, self.dim, "weighted trigonometric system")?;
        Ok(self.quad_form(&dense).max(0.0).sqrt())
    }

    fn cache_stem(dir: &Path, lambda: f64, dim: usize, tol: f64) -> PathBuf {
        dir.join(format!("gram_l{:016x}_n{dim}_t{:016x}", lambda.to_bits(), tol.to_bits()))
    }

    /// Row-major little-endian binary64 file plus a JSON sidecar.
    pub fn save(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir).map_err(io_err)?;
        let stem = Self::cache_stem(dir, self.lambda, self.dim, self.tol);
        let mut bytes = Vec::with_capacity(self.dim * self.dim * 8);
        for i in 0..self.dim {
            for j in 0..self.dim {
                bytes.extend_from_slice(&self.matrix[(i, j)].to_le_bytes());
            }
        }
        let bin = stem.with_extension("bin");
        fs::write(&bin, bytes).map_err(io_err)?;
        let sidecar = GramSidecar {
            lambda: self.lambda,
            n: self.dim,
            tol: self.tol,
            nodes: GL_NODES,
        };
        let json = serde_json::to_string_pretty(&sidecar).map_err(|e| Error::Invariant(e.to_string()))?;
        fs::write(stem.with_extension("json"), json).map_err(io_err)?;
        Ok(bin)
    }

    /// Cached Gram if a matching file exists.
    pub fn load(dir: &Path, lambda: f64, dim: usize, tol: f64) -> Result<Option<TrigGram>> {
        let stem = Self::cache_stem(dir, lambda, dim, tol);
        let (Ok(json), Ok(bytes)) = (fs::read_to_string(stem.with_extension("json")), fs::read(stem.with_extension("bin"))) else {
            return Ok(None);
        };
        let sidecar: GramSidecar = serde_json::from_str(&json).map_err(|e| Error::Invariant(e.to_string()))?;
        let expected = GramSidecar {
            lambda,
            n: dim,
            tol,
            nodes: GL_NODES,
        };
        if sidecar != expected || bytes.len() != dim * dim * 8 {
            return Ok(None);
        }
        let values: Vec<f64> = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        Ok(Some(TrigGram {
            lambda,
            dim,
            tol,
            matrix: DMatrix::from_row_slice(dim, dim, &values),
        }))
    }

    pub fn load_or_compute(dir: &Path, lambda: f64, dim: usize, tol: f64) -> Result<TrigGram> {
        if let Some(g) = Self::load(dir, lambda, dim, tol)? {
            return Ok(g);
        }
        let g = trig_gram(lambda, dim, tol)?;
        g.save(dir)?;
        Ok(g)
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::Invariant(format!("gram cache: {e}"))
}

fn dense_within(f: &FinVec<f64>, dim: usize, space: &str) -> Result<Vec<f64>> {
    if f.max_index() > dim {
        return Err(Error::Domain {
            index: f.max_index(),
            space: format!("{space} of dimension {dim}"),
        });
    }
    Ok(f.to_dense(dim))
}

/// Components `u_n = (c_{2n-1} + c_{2n}) / sqrt 2`, `v_n = (c_{2n-1} - c_{2n}) / sqrt 2`
/// of `sum c_k z_k`.
pub fn rotated_components(c: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let pairs = c.len().div_ceil(2);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut u = vec![0.0; pairs];
    let mut v = vec![0.0; pairs];
    for (k, value) in c.iter().enumerate() {
        let n = k / 2;
        u[n] += s * value;
        v[n] += if k % 2 == 0 { s * value } else { -s * value };
    }
    (u, v)
}

/// The rotated system `z_{2n-1} = (x_n, y_n)/sqrt 2`, `z_{2n} = (x_n, -y_n)/sqrt 2`
/// with `x` in `L_2(|t|^a)` and `y` in `L_2(|t|^-a)`, summed in `l_2`.
#[derive(Clone, Debug)]
pub struct RotatedSystem {
    pub a: f64,
    pub dim: usize,
    pub plus: Arc<TrigGram>,
    pub minus: Arc<TrigGram>,
}

impl RotatedSystem {
    pub fn new(a: f64, dim: usize) -> Result<Self> {
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::param(format!("rotation exponent must lie in (0, 1), got {a}")));
        }
        let pairs = dim.div_ceil(2).max(1);
        Ok(RotatedSystem {
            a,
            dim,
            plus: trig_gram_cached(a, pairs)?,
            minus: trig_gram_cached(-a, pairs)?,
        })
    }

    pub fn norm_dense(&self, c: &[f64]) -> f64 {
        let (u, v) = rotated_components(c);
        (self.plus.quad_form(&u) + self.minus.quad_form(&v)).max(0.0).sqrt()
    }

    pub fn norm(&self, f: &FinVec<f64>) -> Result<f64> {
        let dense = dense_within(f, self.dim, "rotated trigonometric system")?;
        Ok(self.norm_dense(&dense))
    }

    /// Gram matrix in `z`-coordinates.
    pub fn gram(&self) -> DMatrix<f64> {
        let (gp, gm) = (&self.plus.matrix, &self.minus.matrix);
        DMatrix::from_fn(self.dim, self.dim, |r, c| {
            let (i, j) = (r / 2, c / 2);
            let same = (r % 2) == (c % 2);
            if same {
                (gp[(i, j)] + gm[(i, j)]) / 2.0
            } else {
                (gp[(i, j)] - gm[(i, j)]) / 2.0
            }
        })
    }
}

/// Norm of `sum c_k z_k` in the rotated system.
pub fn rotated_norm(a: f64, c: &FinVec<f64>) -> Result<f64> {
    RotatedSystem::new(a, c.max_index().max(1))?.norm(c)
}

/// Least-squares slope and intercept of `ys` against `xs`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return Err(Error::Fit(format!("need at least two paired points, got {n}")));
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("abscissae are all equal".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DirichletFit {
    pub lambda: f64,
    /// Slope of `log |1_{A_m}|` against `log |A_m| = log(2m+1)`.
    pub slope_vs_card: f64,
    /// Slope of `log |1_{A_m}|` against `log m`.
    pub slope_vs_m: f64,
    pub norms: Vec<(usize, f64)>,
}

/// Growth of `|sum_{n <= 2m+1} x_n|` in `L_2(|t|^lambda)` for `4 <= m <= mmax`.
pub fn dirichlet_growth(lambda: f64, mmax: usize) -> Result<DirichletFit> {
    if mmax < 5 {
        return Err(Error::param("dirichlet_growth needs mmax >= 5"));
    }
    let dim = 2 * mmax + 1;
    let gram = trig_gram(lambda, dim, DEFAULT_TOL)?;
    let g = &gram.matrix;
    // running sum of the leading principal block
    let mut total = 0.0;
    let mut norms = Vec::new();
    for k in 0..dim {
        let mut cross = 0.0;
        for j in 0..k {
            cross += g[(k, j)];
        }
        total += 2.0 * cross + g[(k, k)];
        let size = k + 1;
        if size % 2 == 1 && size >= 9 {
            norms.push(((size - 1) / 2, total.sqrt()));
        }
    }
    let ly: Vec<f64> = norms.iter().map(|(_, v)| v.ln()).collect();
    let lm: Vec<f64> = norms.iter().map(|(m, _)| (*m as f64).ln()).collect();
    let lc: Vec<f64> = norms.iter().map(|(m, _)| ((2 * m + 1) as f64).ln()).collect();
    Ok(DirichletFit {
        lambda,
        slope_vs_card: linear_fit(&lc, &ly)?.0,
        slope_vs_m: linear_fit(&lm, &ly)?.0,
        norms,
    })
}

/// `|S_A|` on `span{e_1..e_n}` for the inner product `gram`: square root of
/// the largest generalized eigenvalue of `(P_A G P_A, G)`.
pub fn projection_norm(gram: &DMatrix<f64>, subset: &[usize]) -> Result<f64> {
    let n = gram.nrows();
    if subset.is_empty() {
        return Ok(0.0);
    }
    let chol = gram
        .clone()
        .cholesky()
        .ok_or_else(|| Error::invariant("Gram matrix is not positive definite"))?;
    let mut p = DMatrix::<f64>::zeros(n, n);
    for &i in subset {
        if i == 0 || i > n {
            return Err(Error::Domain {
                index: i,
                space: format!("Gram engine of dimension {n}"),
            });
        }
        p[(i - 1, i - 1)] = 1.0;
    }
    let l = chol.l();
    // X = L^{-1} P, then B = X G X^T
    let x = l
        .solve_lower_triangular(&p)
        .ok_or_else(|| Error::invariant("singular Cholesky factor"))?;
    let b = &x * gram * x.transpose();
    let b = (&b + b.transpose()) * 0.5;
    let eig = SymmetricEigen::new(b);
    let top = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    Ok(top.max(0.0).sqrt())
}

/// Quadratic-form norm `sqrt(c^T G c)` for a dense coefficient vector.
pub fn gram_norm(gram: &DMatrix<f64>, c: &[f64]) -> f64 {
    let v = DVector::from_column_slice(c);
    (v.transpose() * gram * &v)[(0, 0)].max(0.0).sqrt()
}
