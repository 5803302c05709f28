//! Equidistribution experiments: Gross points of conductor `c₀pⁿ` reduced to the
//! special fiber at `p`, compared with the weight measures of the model.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{gcd_i128, Splitting};
use crate::cmfields::{class_number, ImagQuadOrder};
use crate::embeddings::{gross_point_counts, MAX_ABS_DISC};
use crate::error::{invalid, Error, Result};
use crate::lattices::ClassSet;
use crate::render;
use crate::specialfiber::{build_model, validate, SpecialFiberModel, WeightedMeasure};

pub const DEFAULT_N_MAX: u32 = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Singular,
    Components,
}

impl std::str::FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "singular" => Ok(Target::Singular),
            "components" => Ok(Target::Components),
            _ => Err(invalid(format!("unknown target {s:?} (expected singular or components)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ExperimentConfig {
    pub p: u64,
    pub q: u64,
    pub d_k: i64,
    pub c0: u64,
    pub n_max: u32,
    pub target: Target,
}

/// Which candidate limit the data is closer to at the last non-empty level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Masses proportional to `w`.
    Weight,
    /// Masses proportional to `1/w`.
    InverseWeight,
    Tie,
    NoData,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelRow {
    pub n: u32,
    pub conductor: u64,
    pub disc: i64,
    pub class_number: u64,
    pub counts: Vec<u64>,
    pub total: u64,
    /// `None` when no Gross point lands in the target.
    pub distribution: Option<Vec<BigRational>>,
    pub tv_paper: Option<BigRational>,
    pub tv_inverse: Option<BigRational>,
}

impl LevelRow {
    pub fn empty_fiber(&self) -> bool {
        self.distribution.is_none()
    }
}

#[derive(Clone, Debug)]
pub struct EquidistReport {
    pub config: ExperimentConfig,
    pub labels: Vec<String>,
    pub measure_paper: WeightedMeasure,
    pub measure_inverse: WeightedMeasure,
    pub rows: Vec<LevelRow>,
    pub verdict: Verdict,
}

/// `½ Σ |νᵢ − μᵢ|`.
pub fn tv_distance(nu: &WeightedMeasure, mu: &WeightedMeasure) -> Result<BigRational> {
    if nu.labels != mu.labels {
        return Err(Error::MismatchedSupport(format!("{} vs {} points", nu.len(), mu.len())));
    }
    Ok(tv(&nu.masses, &mu.masses))
}

fn tv(a: &[BigRational], b: &[BigRational]) -> BigRational {
    let s = a.iter().zip(b).fold(BigRational::zero(), |acc, (x, y)| acc + (x - y).abs());
    s / BigRational::from_integer(BigInt::from(2))
}

/// Checks every precondition of [`run_experiment`] without computing anything.
pub fn validate_config(config: &ExperimentConfig) -> Result<()> {
    let ExperimentConfig { p, q, d_k, c0, n_max, target } = *config;
    validate(p, q, d_k)?;
    if c0 == 0 || gcd_i128(c0 as i128, p as i128) != 1 || c0 % q == 0 {
        return Err(invalid(format!("base conductor {c0} must be positive and prime to p = {p} and q = {q}")));
    }
    let split = Splitting::of(d_k, p);
    match (target, split) {
        (Target::Singular, Splitting::Ramified) | (Target::Components, Splitting::Inert) => {}
        (Target::Singular, _) => {
            return Err(Error::TargetMismatch(format!(
                "CM points reduce to singular points if and only if p ramifies in K; p = {p} is {split:?} in Q(sqrt({d_k}))"
            )))
        }
        (Target::Components, _) => {
            return Err(Error::TargetMismatch(format!(
                "the components target needs p inert in K; p = {p} is {split:?} in Q(sqrt({d_k}))"
            )))
        }
    }
    let top = ImagQuadOrder::new(d_k, c0)?;
    let mut d = top.discriminant().unsigned_abs() as u128;
    for _ in 0..n_max {
        d = d.saturating_mul((p * p) as u128);
    }
    if d > MAX_ABS_DISC as u128 {
        return Err(Error::TooLarge(format!("n_max = {n_max}: |D| = {d} exceeds {MAX_ABS_DISC}")));
    }
    Ok(())
}

fn level_counts(classes: &ClassSet, d_k: i64, c: u64) -> Result<(ImagQuadOrder, Vec<u64>)> {
    let cm = ImagQuadOrder::new(d_k, c)?;
    Ok((cm, gross_point_counts(classes, &cm)?.counts))
}

/// The target measures for level `n`; for components, supported on the copy of parity `n`.
fn level_measures(
    model: &SpecialFiberModel,
    target: Target,
    n: u32,
) -> Result<(WeightedMeasure, WeightedMeasure)> {
    let m = model.measures();
    match target {
        Target::Singular => Ok((m.ram, m.ram_inv)),
        Target::Components => {
            let h = model.components.len();
            let copy: Vec<usize> = (0..h).map(|c| model.vertex(c, (n % 2) as usize)).collect();
            let pad = |w: &WeightedMeasure| -> Result<WeightedMeasure> {
                let cond = w.conditioned(&copy)?;
                let mut masses = vec![BigRational::zero(); w.len()];
                for (i, &j) in copy.iter().enumerate() {
                    masses[j] = cond.masses[i].clone();
                }
                Ok(WeightedMeasure { labels: w.labels.clone(), masses })
            };
            Ok((pad(&m.components)?, pad(&m.components_inv)?))
        }
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<EquidistReport> {
    validate_config(config)?;
    let model = build_model(config.p, config.q, config.d_k)?;
    run_on_model(config, &model)
}

/// As [`run_experiment`] with a prebuilt model for `(p, q, d_K)`.
pub fn run_on_model(config: &ExperimentConfig, model: &SpecialFiberModel) -> Result<EquidistReport> {
    validate_config(config)?;
    if (model.p, model.q, model.d_k) != (config.p, config.q, config.d_k) {
        return Err(invalid("model does not match the configuration"));
    }
    let (classes, labels) = match config.target {
        Target::Singular => (&model.singular, model.singular_labels()),
        Target::Components => (&model.components, model.component_labels()),
    };
    let rows: Vec<LevelRow> = (0..=config.n_max)
        .into_par_iter()
        .map(|n| -> Result<LevelRow> {
            let c = config.c0 * config.p.pow(n);
            let (cm, raw) = level_counts(classes, config.d_k, c)?;
            let counts = match config.target {
                Target::Singular => raw,
                Target::Components => {
                    let mut v = vec![0; labels.len()];
                    for (i, m) in raw.into_iter().enumerate() {
                        v[model.vertex(i, (n % 2) as usize)] = m;
                    }
                    v
                }
            };
            let total: u64 = counts.iter().sum();
            let (mp, mi) = level_measures(model, config.target, n)?;
            let distribution = (total > 0).then(|| {
                let t = BigRational::from_integer(BigInt::from(total));
                counts.iter().map(|&m| BigRational::from_integer(BigInt::from(m)) / &t).collect::<Vec<_>>()
            });
            let tv_paper = distribution.as_ref().map(|d| tv(d, &mp.masses));
            let tv_inverse = distribution.as_ref().map(|d| tv(d, &mi.masses));
            Ok(LevelRow {
                n,
                conductor: c,
                disc: cm.discriminant(),
                class_number: class_number(cm.discriminant()),
                counts,
                total,
                distribution,
                tv_paper,
                tv_inverse,
            })
        })
        .collect::<Result<_>>()?;
    let (measure_paper, measure_inverse) = level_measures(model, config.target, config.n_max)?;
    let verdict = match rows.iter().rev().find(|r| !r.empty_fiber()) {
        None => Verdict::NoData,
        Some(r) => {
            let (a, b) = (r.tv_paper.as_ref().unwrap(), r.tv_inverse.as_ref().unwrap());
            match a.cmp(b) {
                std::cmp::Ordering::Less => Verdict::Weight,
                std::cmp::Ordering::Greater => Verdict::InverseWeight,
                std::cmp::Ordering::Equal => Verdict::Tie,
            }
        }
    };
    Ok(EquidistReport { config: *config, labels, measure_paper, measure_inverse, rows, verdict })
}

fn opt_rat(r: &Option<BigRational>) -> serde_json::Value {
    match r {
        Some(r) => serde_json::json!({ "exact": render::fraction(r), "decimal": render::decimal(r) }),
        None => serde_json::Value::Null,
    }
}

impl EquidistReport {
    /// TV to the winning normalization at level `n`.
    pub fn best_tv(&self, n: u32) -> Option<BigRational> {
        let row = self.rows.iter().find(|r| r.n == n)?;
        match self.verdict {
            Verdict::InverseWeight => row.tv_inverse.clone(),
            Verdict::NoData => None,
            _ => row.tv_paper.clone(),
        }
    }

    pub fn to_csv(&self) -> String {
        let k = self.labels.len();
        let mut s = String::from("n,c,h");
        for i in 1..=k {
            let _ = write!(s, ",m_{i}");
        }
        s.push_str(",tv_paper,tv_paper_decimal,tv_inv,tv_inv_decimal\n");
        for r in &self.rows {
            let _ = write!(s, "{},{},{}", r.n, r.conductor, r.class_number);
            for m in &r.counts {
                let _ = write!(s, ",{m}");
            }
            for t in [&r.tv_paper, &r.tv_inverse] {
                match t {
                    Some(t) => {
                        let _ = write!(s, ",{},{}", render::fraction(t), render::decimal(t));
                    }
                    None => s.push_str(",empty fiber,empty fiber"),
                }
            }
            s.push('\n');
        }
        s
    }

    /// `n tv_paper tv_inverse` per non-empty level, in decimal.
    pub fn plot_data(&self) -> String {
        let mut s = String::from("# n tv_paper tv_inverse\n");
        for r in self.rows.iter().filter(|r| !r.empty_fiber()) {
            let _ = writeln!(
                s,
                "{} {} {}",
                r.n,
                render::decimal(r.tv_paper.as_ref().unwrap()),
                render::decimal(r.tv_inverse.as_ref().unwrap())
            );
        }
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|r| {
                serde_json::json!({
                    "n": r.n,
                    "c": r.conductor,
                    "D": r.disc,
                    "h": r.class_number,
                    "counts": r.counts,
                    "total": r.total,
                    "empty_fiber": r.empty_fiber(),
                    "distribution": r.distribution.as_ref().map(|d| d.iter().map(render::fraction).collect::<Vec<_>>()),
                    "tv_paper": opt_rat(&r.tv_paper),
                    "tv_inverse": opt_rat(&r.tv_inverse),
                })
            })
            .collect();
        serde_json::json!({
            "config": self.config,
            "labels": self.labels,
            "measure_paper": self.measure_paper.to_json(),
            "measure_inverse": self.measure_inverse.to_json(),
            "rows": rows,
            "verdict": self.verdict,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductRow {
    pub n: u32,
    pub distribution: Option<Vec<BigRational>>,
    pub tv_paper: Option<BigRational>,
    pub tv_inverse: Option<BigRational>,
}

#[derive(Clone, Debug)]
pub struct SimultaneousReport {
    pub reports: Vec<EquidistReport>,
    pub labels: Vec<String>,
    pub rows: Vec<ProductRow>,
}

fn product(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

/// Per-prime reports and the product of the empirical distributions over the
/// product of the targets, against the product measures, for the common levels.
pub fn simultaneous_report(configs: &[ExperimentConfig]) -> Result<SimultaneousReport> {
    if configs.is_empty() {
        return Err(invalid("no configurations"));
    }
    for (i, a) in configs.iter().enumerate() {
        if configs[..i].iter().any(|b| b.p == a.p) {
            return Err(invalid(format!("reduction prime {} repeated", a.p)));
        }
        validate_config(a)?;
    }
    let reports = configs.iter().map(run_experiment).collect::<Result<Vec<_>>>()?;
    let n_max = configs.iter().map(|c| c.n_max).min().unwrap();
    let labels = reports[1..].iter().fold(reports[0].labels.clone(), |acc, r| {
        acc.iter().flat_map(|a| r.labels.iter().map(move |b| format!("{a}x{b}"))).collect()
    });
    let mut rows = Vec::new();
    for n in 0..=n_max {
        let mut dist: Option<Vec<BigRational>> = Some(vec![BigRational::from_integer(BigInt::from(1))]);
        let mut mp = dist.clone().unwrap();
        let mut mi = mp.clone();
        for r in &reports {
            let row = &r.rows[n as usize];
            let (lp, li) = (measure_at(r, n)?.0, measure_at(r, n)?.1);
            dist = match (dist, &row.distribution) {
                (Some(d), Some(e)) => Some(product(&d, e)),
                _ => None,
            };
            mp = product(&mp, &lp.masses);
            mi = product(&mi, &li.masses);
        }
        let tv_paper = dist.as_ref().map(|d| tv(d, &mp));
        let tv_inverse = dist.as_ref().map(|d| tv(d, &mi));
        rows.push(ProductRow { n, distribution: dist, tv_paper, tv_inverse });
    }
    Ok(SimultaneousReport { reports, labels, rows })
}

fn measure_at(r: &EquidistReport, n: u32) -> Result<(WeightedMeasure, WeightedMeasure)> {
    match r.config.target {
        Target::Singular => Ok((r.measure_paper.clone(), r.measure_inverse.clone())),
        Target::Components => {
            let model = build_model(r.config.p, r.config.q, r.config.d_k)?;
            level_measures(&model, Target::Components, n)
        }
    }
}

impl SimultaneousReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "reports": self.reports.iter().map(EquidistReport::to_json).collect::<Vec<_>>(),
            "product": {
                "labels": self.labels,
                "rows": self.rows.iter().map(|r| serde_json::json!({
                    "n": r.n,
                    "distribution": r.distribution.as_ref().map(|d| d.iter().map(render::fraction).collect::<Vec<_>>()),
                    "tv_paper": opt_rat(&r.tv_paper),
                    "tv_inverse": opt_rat(&r.tv_inverse),
                })).collect::<Vec<_>>(),
            },
        })
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,tv_paper,tv_paper_decimal,tv_inv,tv_inv_decimal\n");
        for r in &self.rows {
            let _ = write!(s, "{}", r.n);
            for t in [&r.tv_paper, &r.tv_inverse] {
                match t {
                    Some(t) => {
                        let _ = write!(s, ",{},{}", render::fraction(t), render::decimal(t));
                    }
                    None => s.push_str(",empty fiber,empty fiber"),
                }
            }
            s.push('\n');
        }
        s
    }
}
