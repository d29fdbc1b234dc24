use clap::{Args, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use tsg_core::descriptor::{format_vector, parse_growth_function, parse_space_descriptor, parse_vector};
use tsg_core::experiments;
use tsg_core::greedy::{self, BasisHandle, CondMode, SearchMode};
use tsg_core::spaces::{norm as space_norm, Norm};
use tsg_core::trig::dirichlet_growth;

use crate::error::CliError;
use crate::report::{csv_table, Report};
use crate::Common;

const TOL: f64 = 1e-12;

fn rng(common: &Common) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(common.seed)
}

fn basis(space: &str) -> Result<BasisHandle, CliError> {
    Ok(BasisHandle::new(parse_space_descriptor(space)?)?)
}

fn search_mode(modes: &[SearchMode]) -> &'static str {
    if modes.iter().all(|m| *m == SearchMode::Exhaustive) {
        "exhaustive"
    } else {
        "lower_bound"
    }
}

fn norm_mode(n: &Norm) -> &'static str {
    if n.is_exact() {
        "exact"
    } else {
        "float"
    }
}

#[derive(Args, Debug, Serialize)]
pub struct NormArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// Space descriptor.
    #[arg(long, default_value = "tsirelson")]
    pub space: String,
    /// Vector literal: `[a1,a2,...]`, `[[i,p,q],...]` triples or a CSV row.
    #[arg(long = "vec")]
    pub vector: String,
}

pub fn norm(a: &NormArgs) -> Result<(Report, String), CliError> {
    let space = parse_space_descriptor(&a.space)?;
    let f = parse_vector(&a.vector)?;
    let value = space_norm(&space, &f)?;
    let mut r = Report::new("norm", a);
    r.mode("norm", norm_mode(&value));
    #[derive(Serialize)]
    struct Out {
        space: String,
        vector: String,
        norm: Norm,
        approx: f64,
    }
    r.summary(&Out {
        space: space.to_string(),
        vector: format_vector(&f),
        approx: value.to_f64(),
        norm: value.clone(),
    });
    Ok((r, value.to_string()))
}

#[derive(Args, Debug, Serialize)]
pub struct IndicatorArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long, default_value = "tsirelson")]
    pub space: String,
    #[arg(long, default_value_t = 12)]
    pub mmax: usize,
    /// Coordinates searched; `0` means `2 mmax`.
    #[arg(long, default_value_t = 0)]
    pub window: usize,
}

impl IndicatorArgs {
    fn window(&self) -> usize {
        if self.window == 0 {
            2 * self.mmax
        } else {
            self.window
        }
    }
}

pub fn fundfn(a: &IndicatorArgs) -> Result<Report, CliError> {
    let b = basis(&a.space)?;
    let phi = greedy::fundamental_function(&b, a.mmax, a.window(), &mut rng(&a.common))?;
    let mut r = Report::new("fundfn", a);
    r.mode("indicator_search", search_mode(&phi.modes));
    r.mode("norm", phi.values.first().map_or("exact", norm_mode));
    #[derive(Serialize)]
    struct Row {
        m: usize,
        phi: String,
        approx: f64,
        mode: SearchMode,
    }
    let rows: Vec<Row> = phi
        .values
        .iter()
        .zip(&phi.modes)
        .enumerate()
        .map(|(i, (v, m))| Row {
            m: i + 1,
            phi: v.to_string(),
            approx: v.to_f64(),
            mode: *m,
        })
        .collect();
    let exhaustive = |i: usize| phi.modes[i] == SearchMode::Exhaustive;
    for i in 1..rows.len() {
        if exhaustive(i) && exhaustive(i - 1) && rows[i].approx < rows[i - 1].approx * (1.0 - TOL) {
            r.violate(format!("phi({}) < phi({})", i + 1, i));
        }
    }
    for m in 1..=rows.len() / 2 {
        let (i, j) = (m - 1, 2 * m - 1);
        if exhaustive(i) && exhaustive(j) && rows[j].approx > 2.0 * rows[i].approx * (1.0 + TOL) {
            r.violate(format!("phi({}) > 2 phi({m})", 2 * m));
        }
    }
    let values: Vec<f64> = rows.iter().map(|r| r.approx).collect();
    let regularity = if values.len() >= 8 { Some(greedy::regularity_fit(&values)?) } else { None };
    #[derive(Serialize)]
    struct Out<'a> {
        rows: &'a [Row],
        regularity: Option<greedy::RegularityFit>,
    }
    r.table = Some(csv_table(&rows)?);
    r.summary(&Out { rows: &rows, regularity });
    Ok(r)
}

pub fn democracy(a: &IndicatorArgs) -> Result<Report, CliError> {
    let b = basis(&a.space)?;
    let d = greedy::democracy_ratio(&b, a.mmax, a.window(), &mut rng(&a.common))?;
    let mut r = Report::new("democracy", a);
    r.mode("indicator_search", search_mode(&[d.mode]));
    r.mode("norm", norm_mode(&d.delta));
    if d.delta.to_f64() < 1.0 - TOL {
        r.violate(format!("democracy constant {} below 1", d.delta));
    }
    #[derive(Serialize)]
    struct Row {
        m: usize,
        delta: String,
    }
    let rows: Vec<Row> = d.by_m.iter().enumerate().map(|(i, v)| Row { m: i + 1, delta: v.to_string() }).collect();
    r.table = Some(csv_table(&rows)?);
    r.summary(&d);
    Ok(r)
}

#[derive(Args, Debug, Serialize)]
pub struct GreedyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long, default_value = "tsirelson")]
    pub space: String,
    #[arg(long, default_value_t = 6)]
    pub mmax: usize,
    #[arg(long, default_value_t = 12)]
    pub window: usize,
    /// Random rational vectors for the gap searches.
    #[arg(long, default_value_t = 8)]
    pub samples: usize,
}

pub fn greedy_consts(a: &GreedyArgs) -> Result<Report, CliError> {
    let b = basis(&a.space)?;
    let rep = greedy::greedy_report(&b, a.mmax, a.window, a.samples, &mut rng(&a.common))?;
    let mut r = Report::new("greedy-consts", a);
    r.mode("indicator_search", search_mode(&rep.rows.iter().map(|x| x.indicator_mode).collect::<Vec<_>>()));
    r.mode("gaps", "sampled");
    r.violations_from(rep.violations());
    r.table = Some(csv_table(&rep.rows)?);
    r.summary(&rep);
    Ok(r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CondModeArg {
    Exhaustive,
    Witness,
}

#[derive(Args, Debug, Serialize)]
pub struct CondArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long, default_value = "tsirelson")]
    pub space: String,
    #[arg(long, default_value_t = 6)]
    pub mmax: usize,
    #[arg(long, value_enum, default_value_t = CondModeArg::Exhaustive)]
    pub mode: CondModeArg,
}

pub fn cond_params(a: &CondArgs) -> Result<Report, CliError> {
    let b = basis(&a.space)?;
    let mode = match a.mode {
        CondModeArg::Exhaustive => CondMode::Exhaustive,
        CondModeArg::Witness => CondMode::Witness,
    };
    let mut g = rng(&a.common);
    let rows = (1..=a.mmax).map(|m| greedy::cond_params(&b, m, mode, &mut g)).collect::<Result<Vec<_>, _>>()?;
    let mut r = Report::new("cond-params", a);
    if let Some(first) = rows.first() {
        r.mode("provenance", format!("{:?}", first.provenance).to_lowercase());
    }
    for c in &rows {
        for (name, v) in [("k", &c.k), ("k_tilde", &c.k_tilde)] {
            if v.to_f64() < 1.0 - 1e-9 {
                r.violate(format!("{name}_{} = {v} below 1", c.m));
            }
        }
    }
    r.table = Some(csv_table(&rows)?);
    r.summary(&rows);
    Ok(r)
}

#[derive(Args, Debug, Serialize)]
pub struct DirichletArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// Weight exponent in `(-1, 1)`.
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 200)]
    pub mmax: usize,
    /// Allowed distance of the fitted slope from `(1 - lambda)/2`.
    #[arg(long, default_value_t = 0.1)]
    pub tol: f64,
}

pub fn dirichlet(a: &DirichletArgs) -> Result<Report, CliError> {
    let fit = dirichlet_growth(a.lambda, a.mmax)?;
    let mut r = Report::new("dirichlet", a);
    r.mode("gram", "quadrature");
    let target = (1.0 - a.lambda) / 2.0;
    if (fit.slope_vs_card - target).abs() > a.tol {
        r.violate(format!("slope {} is not within {} of {target}", fit.slope_vs_card, a.tol));
    }
    #[derive(Serialize)]
    struct Row {
        m: usize,
        norm: f64,
    }
    let rows: Vec<Row> = fit.norms.iter().map(|(m, n)| Row { m: *m, norm: *n }).collect();
    r.table = Some(csv_table(&rows)?);
    r.summary(&fit);
    Ok(r)
}

#[derive(Args, Debug, Serialize)]
pub struct DkkArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Rotation exponent, `max(1/p, 1 - 1/p) <= a < 1`.
    #[arg(long, default_value_t = 0.5)]
    pub a: f64,
    #[arg(long, default_value_t = 4)]
    pub jmax: usize,
    #[arg(long, default_value_t = 12)]
    pub window: usize,
    #[arg(long, default_value_t = 100)]
    pub draws: usize,
}

pub fn dkk_build(a: &DkkArgs) -> Result<Report, CliError> {
    let rep = experiments::dkk_build(a.p, a.a, a.jmax, a.window, a.draws, &mut rng(&a.common))?;
    let mut r = Report::new("dkk-build", a);
    r.mode("fundamental", search_mode(&rep.fundamental.iter().map(|x| x.2).collect::<Vec<_>>()));
    r.mode("estimate", "sampled");
    r.violations_from(rep.violations.clone());
    r.summary(&rep);
    Ok(r)
}

#[derive(Args, Debug, Serialize)]
pub struct SpreadArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 2)]
    pub u: u32,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, default_value_t = 500)]
    pub draws: usize,
}

pub fn haar_spread(a: &SpreadArgs) -> Result<Report, CliError> {
    let rep = experiments::spread_bracket_draws(a.u, a.p, a.draws, &mut rng(&a.common))?;
    let mut r = Report::new("haar-spread", a);
    r.mode("ratios", "sampled");
    r.mode("constants", "enclosure");
    if !rep.holds {
        r.violate(format!("{} of {} ratios outside [C1, C2]", rep.violations, rep.draws));
    }
    r.summary(&rep);
    Ok(r)
}

#[derive(Args, Debug, Serialize)]
pub struct ContinuumArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 50)]
    pub count: usize,
    #[arg(long, default_value_t = 12)]
    pub jmax: usize,
}

pub fn continuum(a: &ContinuumArgs) -> Result<Report, CliError> {
    let rep = experiments::continuum_check(a.count, a.jmax, &mut rng(&a.common))?;
    let mut r = Report::new("continuum", a);
    r.mode("values", "exact");
    r.violations_from(rep.violations.clone());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["prefix".to_string()];
    header.extend((1..=a.jmax).map(|j| format!("phi_{j}")));
    w.write_record(&header)?;
    for row in &rep.rows {
        w.write_record(std::iter::once(&row.prefix).chain(&row.values))?;
    }
    let body = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    r.table = Some(String::from_utf8(body).expect("utf-8 digits"));
    r.summary(&rep);
    Ok(r)
}

#[derive(Args, Debug, Serialize)]
pub struct SquareArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 500)]
    pub samples: usize,
    /// Largest index of the sampled supports.
    #[arg(long, default_value_t = 16)]
    pub n: usize,
    /// Recorded max/min; the run fails when exceeded by more than 1%.
    #[arg(long)]
    pub baseline: Option<f64>,
}

pub fn square_split(a: &SquareArgs) -> Result<Report, CliError> {
    let rep = experiments::square_split(a.samples, a.n, &mut rng(&a.common))?;
    let mut r = Report::new("square-split", a);
    r.mode("norms", "exact");
    r.mode("ratios", "sampled");
    if rep.lattice_ratio_max_deviation != 0.0 {
        r.violate(format!("lattice ratio deviates from 1 by {}", rep.lattice_ratio_max_deviation));
    }
    if !rep.spread.is_finite() {
        r.violate("max/min ratio is not finite");
    }
    if let Some(b) = a.baseline {
        if rep.spread > b * 1.01 {
            r.violate(format!("max/min {} exceeds baseline {b} by more than 1%", rep.spread));
        }
    }
    r.summary(&rep);
    Ok(r)
}

#[derive(Args, Debug, Serialize)]
pub struct IsoArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// Block dimensions: `fgh(n)`, `id`, `const(c)` or an integer list.
    #[arg(long, default_value = "id")]
    pub phi: String,
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = 12)]
    pub n: usize,
}

pub fn iso_ratio(a: &IsoArgs) -> Result<Report, CliError> {
    let phi = parse_growth_function(&a.phi)?;
    let rep = experiments::iso_ratio(&phi, a.p, a.samples, a.n, &mut rng(&a.common))?;
    let mut r = Report::new("iso-ratio", a);
    r.mode("norms", if a.p == 1.0 { "exact" } else { "float" });
    r.mode("ratios", "sampled");
    if !rep.holds {
        r.violate(format!("ratio range [{}, {}] is degenerate", rep.min_ratio, rep.max_ratio));
    }
    r.summary(&rep);
    Ok(r)
}

#[derive(Args, Debug, Serialize)]
pub struct OracleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// Support bound of the exhaustive 0/1 sweep.
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    /// Random rational vectors on `[1, n]`.
    #[arg(long, default_value_t = 200)]
    pub cases: usize,
}

pub fn oracle_check(a: &OracleArgs) -> Result<Report, CliError> {
    let rep = experiments::oracle_check(a.n, a.cases, &mut rng(&a.common))?;
    let mut r = Report::new("oracle-check", a);
    r.mode("norms", "exact");
    r.violations_from(rep.mismatches.clone());
    r.summary(&rep);
    Ok(r)
}
