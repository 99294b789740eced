//! Tightness and pruning-power measurement, parameter sweeps and result files.
//!
//! Queries are drawn (seeded) from the dataset itself. Tightness averages
//! `bound / dtw` over every query/candidate pair with the query excluded from
//! its own candidates; pruning power counts, per query, the sequences of the
//! whole dataset whose bound exceeds `epsilon`.
//!
//! Work fans out per query through [`Execution`]; per-query results are
//! collected in query order and reduced serially, so serial and parallel runs
//! emit byte-identical files.

use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bounds::{extend_values, keogh_sum, lb_kim, lb_yi, smallest_lmax, ExtensionParams};
use crate::dtw::{dtw, BandConstraint, DtwDistance};
use crate::error::{Error, Result};
use crate::exec::{map_ordered, Execution};
use crate::index::PreparedQuery;
use crate::ingest::Dataset;
use crate::paa::{lb_paa, paa_transform};
use crate::persist::{full_precision, params_hash};

/// Ratios above `1 + TIGHTNESS_SLACK` indicate an unsound bound.
pub const TIGHTNESS_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundKind {
    KeoghPlus,
    Yi,
    Kim,
    Paa,
}

impl BoundKind {
    pub const ALL: [BoundKind; 4] = [BoundKind::KeoghPlus, BoundKind::Yi, BoundKind::Kim, BoundKind::Paa];

    pub fn name(self) -> &'static str {
        match self {
            BoundKind::KeoghPlus => "keogh_plus",
            BoundKind::Yi => "yi",
            BoundKind::Kim => "kim",
            BoundKind::Paa => "paa",
        }
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "keogh_plus" | "keogh+" => Ok(BoundKind::KeoghPlus),
            "yi" => Ok(BoundKind::Yi),
            "kim" => Ok(BoundKind::Kim),
            "paa" => Ok(BoundKind::Paa),
            other => Err(Error::InvalidParameter(format!("unknown bound '{other}'"))),
        }
    }
}

/// `lb / dtw`, with `0 / 0` defined as a perfectly tight 1.
pub fn tightness(lb_value: f64, dtw_value: f64) -> f64 {
    if dtw_value == 0.0 {
        1.0
    } else {
        lb_value / dtw_value
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TightnessStats {
    pub bound: BoundKind,
    pub ratios: Vec<f64>,
    pub mean: f64,
    pub count: usize,
    /// Pairs without a band-feasible alignment, left out of the mean.
    pub excluded_infeasible: usize,
}

impl TightnessStats {
    fn from_ratios(bound: BoundKind, ratios: Vec<f64>, excluded_infeasible: usize) -> Self {
        let count = ratios.len();
        let mean = if count == 0 {
            0.0
        } else {
            ratios.iter().sum::<f64>() / count as f64
        };
        Self {
            bound,
            ratios,
            mean,
            count,
            excluded_infeasible,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PruningStats {
    /// Sequences a sequential scan would compare (dataset size per query).
    pub s_total: usize,
    /// Sequences skipped because the bound exceeded epsilon.
    pub s_pruned: usize,
    /// Sequences whose true distance is within epsilon.
    pub retrieved: usize,
    pub power: f64,
}

impl PruningStats {
    fn new(s_total: usize, s_pruned: usize, retrieved: usize) -> Self {
        let power = if s_total == 0 {
            0.0
        } else {
            s_pruned as f64 / s_total as f64
        };
        Self {
            s_total,
            s_pruned,
            retrieved,
            power,
        }
    }

    pub fn retrieved_ratio(&self) -> f64 {
        if self.s_total == 0 {
            0.0
        } else {
            self.retrieved as f64 / self.s_total as f64
        }
    }
}

/// Pruning statistics for one query given its per-candidate bound values.
pub fn pruning_from_values(bounds: &[f64], epsilon: f64) -> PruningStats {
    let pruned = bounds.iter().filter(|&&b| b > epsilon).count();
    PruningStats::new(bounds.len(), pruned, 0)
}

/// Measurement parameters shared by every bench entry point.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchParams {
    pub band_radius: usize,
    pub n_paa: usize,
    /// `None` resolves to the smallest multiple of `n_paa` above the longest sequence.
    pub lmax: Option<usize>,
    pub pad_value: f64,
    pub query_count: usize,
    pub seed: u64,
    /// Seed used to truncate the dataset, reported alongside results.
    pub truncate_seed: Option<u64>,
    pub exec: Execution,
}

impl BenchParams {
    pub const DEFAULT_QUERY_COUNT: usize = 100;

    pub fn new(band_radius: usize, seed: u64) -> Self {
        Self {
            band_radius,
            n_paa: 16,
            lmax: None,
            pad_value: 0.0,
            query_count: Self::DEFAULT_QUERY_COUNT,
            seed,
            truncate_seed: None,
            exec: Execution::default(),
        }
    }

    pub fn resolve_lmax(&self, ds: &Dataset) -> Result<usize> {
        let lmax = self.lmax.unwrap_or_else(|| smallest_lmax(ds.max_len(), self.n_paa));
        check_lmax(ds, lmax)?;
        Ok(lmax)
    }

    fn canonical(&self) -> String {
        format!(
            "r={};n_paa={};lmax={:?};pad={};queries={};seed={};truncate_seed={:?}",
            self.band_radius,
            self.n_paa,
            self.lmax,
            full_precision(self.pad_value),
            self.query_count,
            self.seed,
            self.truncate_seed
        )
    }
}

fn check_lmax(ds: &Dataset, lmax: usize) -> Result<()> {
    if lmax <= ds.max_len() {
        return Err(Error::InvalidParameter(format!(
            "lmax {lmax} must exceed the longest sequence ({})",
            ds.max_len()
        )));
    }
    Ok(())
}

/// Seeded choice of distinct query positions (at most the dataset size).
pub fn select_queries(dataset_size: usize, count: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rand::seq::index::sample(&mut rng, dataset_size, count.min(dataset_size)).into_vec()
}

/// Per-query state for bound evaluation at one parameter point.
struct QueryBounds<'a> {
    query: &'a [f64],
    prepared: PreparedQuery,
    ext: ExtensionParams,
    n_paa: usize,
    c_ext: Vec<f64>,
}

impl<'a> QueryBounds<'a> {
    fn new(query: &'a [f64], radius: usize, n_paa: usize, ext: ExtensionParams) -> Result<Self> {
        Ok(Self {
            query,
            prepared: PreparedQuery::new(query, radius, ext, n_paa)?,
            ext,
            n_paa,
            c_ext: Vec::with_capacity(ext.lmax),
        })
    }

    fn value(&mut self, kind: BoundKind, c: &[f64]) -> Result<f64> {
        Ok(match kind {
            BoundKind::Kim => lb_kim(self.query, c),
            BoundKind::Yi => lb_yi(self.query, c),
            BoundKind::KeoghPlus => {
                self.fill(c)?;
                let env = self.prepared.envelope();
                keogh_sum(env.upper(), env.lower(), &self.c_ext)
            }
            BoundKind::Paa => {
                self.fill(c)?;
                lb_paa(self.prepared.paa_envelope(), &paa_transform(&self.c_ext, self.n_paa)?)?
            }
        })
    }

    fn fill(&mut self, c: &[f64]) -> Result<()> {
        self.c_ext = extend_values(c, self.ext)?;
        Ok(())
    }
}

fn checked_ratio(kind: BoundKind, lb: f64, d: f64) -> Result<f64> {
    let t = tightness(lb, d);
    if !(0.0..=1.0 + TIGHTNESS_SLACK).contains(&t) {
        return Err(Error::Invariant(format!(
            "{kind} tightness {t} outside [0, 1] (bound {lb}, dtw {d})"
        )));
    }
    Ok(t)
}

/// Banded DTW from each query to every other sequence, in candidate order.
fn query_distances(
    ds: &Dataset,
    queries: &[usize],
    radius: usize,
    exec: Execution,
) -> Vec<Vec<(usize, DtwDistance)>> {
    let band = BandConstraint::Radius(radius);
    map_ordered(queries, exec, |&qi| {
        let q = &ds.sequences[qi];
        ds.sequences
            .iter()
            .enumerate()
            .filter(|&(ci, _)| ci != qi)
            .map(|(ci, c)| (ci, dtw(q, c, band)))
            .collect()
    })
}

/// Mean tightness of each bound, sharing one DTW evaluation per pair.
#[allow(clippy::too_many_arguments)]
fn tightness_from_distances(
    ds: &Dataset,
    queries: &[usize],
    distances: &[Vec<(usize, DtwDistance)>],
    bounds: &[BoundKind],
    radius: usize,
    n_paa: usize,
    ext: ExtensionParams,
    exec: Execution,
) -> Result<Vec<TightnessStats>> {
    let jobs: Vec<(usize, &Vec<(usize, DtwDistance)>)> = queries.iter().copied().zip(distances).collect();
    let per_query = map_ordered(&jobs, exec, |&(qi, pairs)| -> Result<(Vec<Vec<f64>>, usize)> {
        let mut qb = QueryBounds::new(&ds.sequences[qi], radius, n_paa, ext)?;
        let mut ratios = vec![Vec::with_capacity(pairs.len()); bounds.len()];
        let mut infeasible = 0;
        for &(ci, d) in pairs {
            let DtwDistance::Finite(d) = d else {
                infeasible += 1;
                continue;
            };
            for (k, &kind) in bounds.iter().enumerate() {
                let lb = qb.value(kind, &ds.sequences[ci])?;
                ratios[k].push(checked_ratio(kind, lb, d)?);
            }
        }
        Ok((ratios, infeasible))
    });

    let mut merged = vec![Vec::new(); bounds.len()];
    let mut infeasible = 0;
    for r in per_query {
        let (ratios, inf) = r?;
        infeasible += inf;
        for (dst, src) in merged.iter_mut().zip(ratios) {
            dst.extend(src);
        }
    }
    Ok(bounds
        .iter()
        .zip(merged)
        .map(|(&kind, ratios)| TightnessStats::from_ratios(kind, ratios, infeasible))
        .collect())
}

/// Mean tightness of each bound in `bounds` over `params.query_count` queries.
pub fn measure_tightness(ds: &Dataset, bounds: &[BoundKind], params: &BenchParams) -> Result<Vec<TightnessStats>> {
    let lmax = params.resolve_lmax(ds)?;
    let ext = ExtensionParams::new(lmax, params.pad_value)?;
    check_divisible(lmax, params.n_paa, bounds)?;
    let queries = select_queries(ds.len(), params.query_count, params.seed);
    let distances = query_distances(ds, &queries, params.band_radius, params.exec);
    tightness_from_distances(ds, &queries, &distances, bounds, params.band_radius, params.n_paa, ext, params.exec)
}

fn check_divisible(lmax: usize, n_paa: usize, bounds: &[BoundKind]) -> Result<()> {
    if bounds.contains(&BoundKind::Paa) && (n_paa == 0 || !lmax.is_multiple_of(n_paa)) {
        return Err(Error::NotDivisible {
            length: lmax,
            segments: n_paa,
        });
    }
    Ok(())
}

/// Pruning statistics for each (bound, epsilon), in bound-major order.
pub fn measure_pruning(
    ds: &Dataset,
    bounds: &[BoundKind],
    epsilons: &[f64],
    params: &BenchParams,
) -> Result<Vec<(BoundKind, f64, PruningStats)>> {
    if let Some(e) = epsilons.iter().find(|e| e.is_nan() || **e < 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be >= 0, got {e}")));
    }
    let lmax = params.resolve_lmax(ds)?;
    let ext = ExtensionParams::new(lmax, params.pad_value)?;
    check_divisible(lmax, params.n_paa, bounds)?;
    let queries = select_queries(ds.len(), params.query_count, params.seed);
    let band = BandConstraint::Radius(params.band_radius);

    // Per query: bound values per kind and DTW cost for every sequence.
    let per_query = map_ordered(&queries, params.exec, |&qi| -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
        let q = &ds.sequences[qi];
        let mut qb = QueryBounds::new(q, params.band_radius, params.n_paa, ext)?;
        let mut values = vec![Vec::with_capacity(ds.len()); bounds.len()];
        let mut costs = Vec::with_capacity(ds.len());
        for c in &ds.sequences {
            for (k, &kind) in bounds.iter().enumerate() {
                values[k].push(qb.value(kind, c)?);
            }
            costs.push(dtw(q, c, band).cost());
        }
        Ok((values, costs))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut out = Vec::with_capacity(bounds.len() * epsilons.len());
    for (k, &kind) in bounds.iter().enumerate() {
        for &eps in epsilons {
            let (mut total, mut pruned, mut retrieved) = (0, 0, 0);
            for (values, costs) in &per_query {
                total += values[k].len();
                pruned += values[k].iter().filter(|&&b| b > eps).count();
                retrieved += costs.iter().filter(|&&d| d <= eps).count();
            }
            out.push((kind, eps, PruningStats::new(total, pruned, retrieved)));
        }
    }
    Ok(out)
}

/// Sequential scan that skips DTW whenever the bound exceeds `epsilon`.
/// Returns (DTW evaluations, matching positions).
pub fn bound_filtered_scan(
    ds: &Dataset,
    query: usize,
    bound: BoundKind,
    epsilon: f64,
    params: &BenchParams,
) -> Result<(usize, Vec<usize>)> {
    let lmax = params.resolve_lmax(ds)?;
    let ext = ExtensionParams::new(lmax, params.pad_value)?;
    let q = &ds.sequences[query];
    let mut qb = QueryBounds::new(q, params.band_radius, params.n_paa, ext)?;
    let band = BandConstraint::Radius(params.band_radius);
    let (mut evals, mut hits) = (0, Vec::new());
    for (ci, c) in ds.sequences.iter().enumerate() {
        if qb.value(bound, c)? > epsilon {
            continue;
        }
        evals += 1;
        if dtw(q, c, band).within(epsilon) {
            hits.push(ci);
        }
    }
    Ok((evals, hits))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    Epsilon,
    NPaa,
    Radius,
    Lmax,
}

impl SweepKind {
    pub fn name(self) -> &'static str {
        match self {
            SweepKind::Epsilon => "epsilon",
            SweepKind::NPaa => "n_paa",
            SweepKind::Radius => "r",
            SweepKind::Lmax => "lmax",
        }
    }
}

impl FromStr for SweepKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "epsilon" | "eps" => Ok(SweepKind::Epsilon),
            "n_paa" | "paa" => Ok(SweepKind::NPaa),
            "r" | "radius" => Ok(SweepKind::Radius),
            "lmax" => Ok(SweepKind::Lmax),
            other => Err(Error::InvalidParameter(format!("unknown sweep kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub kind: SweepKind,
    pub params: BenchParams,
    pub bounds: Vec<BoundKind>,
    pub epsilons: Vec<f64>,
    pub n_paa_grid: Vec<usize>,
    pub radius_grid: Vec<usize>,
    pub lmax_grid: Vec<usize>,
}

impl SweepConfig {
    pub fn new(kind: SweepKind, params: BenchParams) -> Self {
        Self {
            kind,
            params,
            bounds: vec![BoundKind::KeoghPlus],
            epsilons: Vec::new(),
            n_paa_grid: Vec::new(),
            radius_grid: Vec::new(),
            lmax_grid: Vec::new(),
        }
    }

    fn canonical(&self) -> String {
        let bounds: Vec<&str> = self.bounds.iter().map(|b| b.name()).collect();
        let eps: Vec<String> = self.epsilons.iter().map(|&e| full_precision(e)).collect();
        format!(
            "{};kind={};bounds={};eps={};n_paa={:?};r={:?};lmax={:?}",
            self.params.canonical(),
            self.kind.name(),
            bounds.join(","),
            eps.join(","),
            self.n_paa_grid,
            self.radius_grid,
            self.lmax_grid
        )
    }
}

/// One emitted measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub dataset: String,
    pub seed: u64,
    pub truncate_seed: Option<u64>,
    pub r: usize,
    pub n_paa: usize,
    pub lmax: usize,
    pub pad: f64,
    pub epsilon: Option<f64>,
    pub bound: String,
    pub metric: String,
    pub value: f64,
    pub count: usize,
    pub params_hash: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

struct RowTemplate<'a> {
    ds: &'a Dataset,
    params: &'a BenchParams,
    hash: String,
}

impl RowTemplate<'_> {
    #[allow(clippy::too_many_arguments)]
    fn row(&self, r: usize, n_paa: usize, lmax: usize, epsilon: Option<f64>, bound: &str, metric: &str, value: f64, count: usize) -> ResultRow {
        ResultRow {
            dataset: self.ds.name.clone(),
            seed: self.params.seed,
            truncate_seed: self.params.truncate_seed,
            r,
            n_paa,
            lmax,
            pad: self.params.pad_value,
            epsilon,
            bound: bound.to_string(),
            metric: metric.to_string(),
            value,
            count,
            params_hash: self.hash.clone(),
        }
    }
}

/// Mean tightness of each bound as a result table.
pub fn tightness_table(ds: &Dataset, bounds: &[BoundKind], params: &BenchParams) -> Result<ResultTable> {
    let lmax = params.resolve_lmax(ds)?;
    let names: Vec<&str> = bounds.iter().map(|b| b.name()).collect();
    let t = RowTemplate {
        ds,
        params,
        hash: params_hash(&format!("{};tightness;bounds={}", params.canonical(), names.join(","))),
    };
    let stats = measure_tightness(ds, bounds, params)?;
    let rows = stats
        .iter()
        .map(|s| t.row(params.band_radius, params.n_paa, lmax, None, s.bound.name(), "tightness", s.mean, s.count))
        .collect();
    Ok(ResultTable { rows })
}

/// Pruning power (and retrieved ratio) per bound and epsilon.
pub fn pruning_table(ds: &Dataset, bounds: &[BoundKind], epsilons: &[f64], params: &BenchParams) -> Result<ResultTable> {
    let mut cfg = SweepConfig::new(SweepKind::Epsilon, params.clone());
    cfg.bounds = bounds.to_vec();
    cfg.epsilons = epsilons.to_vec();
    run_sweep(ds, &cfg)
}

fn lcm(a: usize, b: usize) -> usize {
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 { a } else { gcd(b, a % b) }
    }
    a / gcd(a, b) * b
}

fn require_grid<T>(grid: &[T], what: &str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter(format!("{what} grid is empty")));
    }
    Ok(())
}

/// Runs one parameter sweep; one row per (grid point, bound, metric).
pub fn run_sweep(ds: &Dataset, cfg: &SweepConfig) -> Result<ResultTable> {
    let p = &cfg.params;
    if p.query_count == 0 {
        return Err(Error::InvalidParameter("query count must be at least 1".into()));
    }
    let t = RowTemplate {
        ds,
        params: p,
        hash: params_hash(&cfg.canonical()),
    };
    let queries = select_queries(ds.len(), p.query_count, p.seed);
    let mut rows = Vec::new();

    match cfg.kind {
        SweepKind::Epsilon => {
            require_grid(&cfg.epsilons, "epsilon")?;
            let lmax = p.resolve_lmax(ds)?;
            for (kind, eps, s) in measure_pruning(ds, &cfg.bounds, &cfg.epsilons, p)? {
                rows.push(t.row(p.band_radius, p.n_paa, lmax, Some(eps), kind.name(), "pruning_power", s.power, s.s_total));
                rows.push(t.row(p.band_radius, p.n_paa, lmax, Some(eps), kind.name(), "retrieved_ratio", s.retrieved_ratio(), s.s_total));
            }
        }
        SweepKind::NPaa => {
            require_grid(&cfg.n_paa_grid, "n_paa")?;
            if cfg.n_paa_grid.contains(&0) {
                return Err(Error::InvalidParameter("n_paa must be at least 1".into()));
            }
            let lmax = match p.lmax {
                Some(l) => l,
                None => smallest_lmax(ds.max_len(), cfg.n_paa_grid.iter().copied().fold(1, lcm)),
            };
            check_lmax(ds, lmax)?;
            let ext = ExtensionParams::new(lmax, p.pad_value)?;
            let distances = query_distances(ds, &queries, p.band_radius, p.exec);
            for &n_paa in &cfg.n_paa_grid {
                check_divisible(lmax, n_paa, &[BoundKind::Paa])?;
                let s = tightness_from_distances(ds, &queries, &distances, &[BoundKind::Paa], p.band_radius, n_paa, ext, p.exec)?;
                rows.push(t.row(p.band_radius, n_paa, lmax, None, "paa", "tightness", s[0].mean, s[0].count));
            }
        }
        SweepKind::Radius => {
            require_grid(&cfg.radius_grid, "r")?;
            let lmax = p.resolve_lmax(ds)?;
            let ext = ExtensionParams::new(lmax, p.pad_value)?;
            check_divisible(lmax, p.n_paa, &cfg.bounds)?;
            for &r in &cfg.radius_grid {
                let distances = query_distances(ds, &queries, r, p.exec);
                for s in tightness_from_distances(ds, &queries, &distances, &cfg.bounds, r, p.n_paa, ext, p.exec)? {
                    rows.push(t.row(r, p.n_paa, lmax, None, s.bound.name(), "tightness", s.mean, s.count));
                }
            }
        }
        SweepKind::Lmax => {
            require_grid(&cfg.lmax_grid, "lmax")?;
            let band = BandConstraint::Radius(p.band_radius);
            let original = query_distances(ds, &queries, p.band_radius, p.exec);
            let (orig_mean, orig_count) = mean_finite(original.iter().flatten().map(|&(_, d)| d));
            for &lmax in &cfg.lmax_grid {
                check_lmax(ds, lmax)?;
                let ext = ExtensionParams::new(lmax, p.pad_value)?;
                let extended = map_ordered(&queries, p.exec, |&qi| -> Result<Vec<DtwDistance>> {
                    let q_ext = extend_values(&ds.sequences[qi], ext)?;
                    ds.sequences
                        .iter()
                        .enumerate()
                        .filter(|&(ci, _)| ci != qi)
                        .map(|(_, c)| Ok(dtw(&q_ext, &extend_values(c, ext)?, band)))
                        .collect()
                })
                .into_iter()
                .collect::<Result<Vec<_>>>()?;
                let (ext_mean, ext_count) = mean_finite(extended.into_iter().flatten());
                rows.push(t.row(p.band_radius, p.n_paa, lmax, None, "none", "mean_dtw_extended", ext_mean, ext_count));
                rows.push(t.row(p.band_radius, p.n_paa, lmax, None, "none", "mean_dtw_original", orig_mean, orig_count));
                if lmax % p.n_paa == 0 {
                    let s = tightness_from_distances(ds, &queries, &original, &[BoundKind::Paa], p.band_radius, p.n_paa, ext, p.exec)?;
                    rows.push(t.row(p.band_radius, p.n_paa, lmax, None, "paa", "tightness", s[0].mean, s[0].count));
                }
            }
        }
    }
    Ok(ResultTable { rows })
}

fn mean_finite(ds: impl Iterator<Item = DtwDistance>) -> (f64, usize) {
    let (sum, n) = ds
        .filter_map(DtwDistance::value)
        .fold((0.0, 0usize), |(s, n), d| (s + d, n + 1));
    (if n == 0 { 0.0 } else { sum / n as f64 }, n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    JsonLines,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "csv" => Ok(OutputFormat::Csv),
            "jsonl" | "json-lines" => Ok(OutputFormat::JsonLines),
            other => Err(Error::InvalidParameter(format!("unknown format '{other}'"))),
        }
    }
}

pub const COLUMNS: [&str; 13] = [
    "dataset", "seed", "truncate_seed", "r", "n_paa", "lmax", "pad", "epsilon", "bound", "metric", "value",
    "count", "params_hash",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn row_fields(r: &ResultRow) -> [String; 13] {
    [
        r.dataset.clone(),
        r.seed.to_string(),
        opt(r.truncate_seed),
        r.r.to_string(),
        r.n_paa.to_string(),
        r.lmax.to_string(),
        full_precision(r.pad),
        r.epsilon.map(full_precision).unwrap_or_default(),
        r.bound.clone(),
        r.metric.clone(),
        full_precision(r.value),
        r.count.to_string(),
        r.params_hash.clone(),
    ]
}

fn parse_field<T: FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::InvalidParameter(format!("bad {what} field '{s}'")))
}

fn parse_opt<T: FromStr>(s: &str, what: &str) -> Result<Option<T>> {
    if s.is_empty() {
        Ok(None)
    } else {
        parse_field(s, what).map(Some)
    }
}

fn row_from_fields(f: &[&str]) -> Result<ResultRow> {
    if f.len() != COLUMNS.len() {
        return Err(Error::InvalidParameter(format!("expected {} fields, got {}", COLUMNS.len(), f.len())));
    }
    Ok(ResultRow {
        dataset: f[0].to_string(),
        seed: parse_field(f[1], "seed")?,
        truncate_seed: parse_opt(f[2], "truncate_seed")?,
        r: parse_field(f[3], "r")?,
        n_paa: parse_field(f[4], "n_paa")?,
        lmax: parse_field(f[5], "lmax")?,
        pad: parse_field(f[6], "pad")?,
        epsilon: parse_opt(f[7], "epsilon")?,
        bound: f[8].to_string(),
        metric: f[9].to_string(),
        value: parse_field(f[10], "value")?,
        count: parse_field(f[11], "count")?,
        params_hash: f[12].to_string(),
    })
}

/// Writes a header then one record per row. Floats carry 17 significant digits.
pub fn emit_results(table: &ResultTable, path: impl AsRef<Path>, format: OutputFormat) -> Result<()> {
    let file = BufWriter::new(fs::File::create(path)?);
    write_results(table, file, format)
}

pub fn write_results<W: Write>(table: &ResultTable, mut out: W, format: OutputFormat) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(COLUMNS)?;
            for r in &table.rows {
                w.write_record(row_fields(r))?;
            }
            w.flush()?;
        }
        OutputFormat::JsonLines => {
            writeln!(out, "{}", serde_json::json!({ "columns": COLUMNS }))?;
            for r in &table.rows {
                let f = row_fields(r);
                let num = |s: &str| if s.is_empty() { "null".to_string() } else { s.to_string() };
                let text = |s: &str| serde_json::Value::from(s).to_string();
                writeln!(
                    out,
                    "{{\"dataset\":{},\"seed\":{},\"truncate_seed\":{},\"r\":{},\"n_paa\":{},\"lmax\":{},\"pad\":{},\"epsilon\":{},\"bound\":{},\"metric\":{},\"value\":{},\"count\":{},\"params_hash\":{}}}",
                    text(&f[0]), f[1], num(&f[2]), f[3], f[4], f[5], f[6], num(&f[7]), text(&f[8]), text(&f[9]), f[10], f[11], text(&f[12])
                )?;
            }
            out.flush()?;
        }
    }
    Ok(())
}

/// Reads a file written by [`emit_results`].
pub fn read_results(path: impl AsRef<Path>, format: OutputFormat) -> Result<ResultTable> {
    let file = fs::File::open(path)?;
    let mut rows = Vec::new();
    match format {
        OutputFormat::Csv => {
            let mut rd = csv::Reader::from_reader(file);
            for rec in rd.records() {
                let rec = rec?;
                rows.push(row_from_fields(&rec.iter().collect::<Vec<_>>())?);
            }
        }
        OutputFormat::JsonLines => {
            for line in BufReader::new(file).lines().skip(1) {
                let v: serde_json::Value = serde_json::from_str(&line?)?;
                let fields: Vec<String> = COLUMNS
                    .iter()
                    .map(|&c| match &v[c] {
                        serde_json::Value::Null => String::new(),
                        serde_json::Value::String(s) => s.clone(),
                        other => other.to_string(),
                    })
                    .collect();
                rows.push(row_from_fields(&fields.iter().map(String::as_str).collect::<Vec<_>>())?);
            }
        }
    }
    Ok(ResultTable { rows })
}
