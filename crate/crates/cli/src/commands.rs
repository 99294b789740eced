use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use dtwidx::bench::{self, BenchParams, ResultTable, SweepConfig, SweepKind};
use dtwidx::ingest::{band_radius_for, parse_ucr};
use dtwidx::{
    linear_scan, load_index, load_ucr, save_index, truncate_random, Dataset, DtwIndex, Error,
    Execution, IndexConfig, LmaxPolicy, TimeSeries, TruncationSpec,
};
use log::info;

use crate::args::{BenchCommand, BuildArgs, CommonBenchArgs, QueryArgs, ShapeArgs};

/// A failed run, classified by exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(String),
    Invariant(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Invariant(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Data(m) => write!(f, "data error: {m}"),
            Failure::Invariant(m) => write!(f, "invariant violated: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::InvalidParameter(_) | Error::NotDivisible { .. } => Failure::Usage(msg),
            Error::Invariant(_) => Failure::Invariant(msg),
            _ => Failure::Data(msg),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn check_shape(shape: &ShapeArgs) -> Outcome {
    if shape.n_paa == 0 {
        return Err(Failure::Usage("--paa must be at least 1".into()));
    }
    if let Some(lmax) = shape.lmax.fixed() {
        if lmax % shape.n_paa != 0 {
            return Err(Failure::Usage(format!("--lmax {lmax} is not divisible by --paa {}", shape.n_paa)));
        }
    }
    if !(shape.r_frac > 0.0 && shape.r_frac.is_finite()) {
        return Err(Failure::Usage(format!("--r-frac must be positive, got {}", shape.r_frac)));
    }
    if !shape.pad.is_finite() {
        return Err(Failure::Usage("--pad must be finite".into()));
    }
    Ok(())
}

/// Loads the dataset, resolves the band radius and applies optional truncation.
fn load_shaped(input: &Path, shape: &ShapeArgs) -> Result<(Dataset, usize), Failure> {
    let ds = load_ucr(input)?;
    let r = shape.r.unwrap_or_else(|| band_radius_for(ds.max_len(), shape.r_frac));
    let ds = match shape.truncate_seed {
        Some(seed) => truncate_random(&ds, TruncationSpec { seed, band_radius: r })?,
        None => ds,
    };
    Ok((ds, r))
}

fn seed_text(seed: Option<u64>) -> String {
    seed.map_or_else(|| "none".to_string(), |s| s.to_string())
}

pub fn build(args: &BuildArgs) -> Outcome {
    check_shape(&args.shape)?;
    let (ds, r) = load_shaped(&args.input, &args.shape)?;
    let config = IndexConfig {
        band_radius: r,
        n_paa: args.shape.n_paa,
        pad_value: args.shape.pad,
        node_capacity: args.node_cap,
        lmax: args.shape.lmax.fixed().map_or(LmaxPolicy::Auto, LmaxPolicy::Fixed),
        keogh_filter: args.keogh_filter,
    };
    config.validate()?;
    let lmax = config.resolve_lmax(ds.max_len())?;
    info!(
        "resolved parameters: r={r} n_paa={} lmax={lmax} e={} seed={} node_cap={} dataset={} ({} sequences, lengths {}..={})",
        config.n_paa,
        config.pad_value,
        seed_text(args.shape.truncate_seed),
        config.node_capacity,
        ds.name,
        ds.len(),
        ds.min_len(),
        ds.max_len()
    );
    let index = DtwIndex::build(&ds.sequences, config)?;
    save_index(&index, &args.out)?;
    println!(
        "built {} entries: r={r} n_paa={} lmax={lmax} e={} height={} -> {}",
        index.len(),
        config.n_paa,
        config.pad_value,
        index.tree().height(),
        args.out.display()
    );
    Ok(())
}

/// A tab-separated line is a UCR row (label first); anything else is a plain
/// list of samples separated by commas or whitespace.
pub fn read_query(path: &Path) -> Result<TimeSeries, Failure> {
    let text = fs::read_to_string(path)?;
    if text.contains('\t') {
        let mut rows = parse_ucr(&text, path)?;
        if rows.len() != 1 {
            return Err(Failure::Data(format!("{}: expected one query line, found {}", path.display(), rows.len())));
        }
        return Ok(rows.remove(0));
    }
    let mut values = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        for (field, token) in line.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()).enumerate() {
            let v = token.parse::<f64>().map_err(|_| {
                Failure::Data(format!(
                    "{}: line {}, field {}: '{token}' is not a number",
                    path.display(),
                    line_no + 1,
                    field + 1
                ))
            })?;
            values.push(v);
        }
    }
    Ok(TimeSeries::new(values)?)
}

pub fn query(args: &QueryArgs) -> Outcome {
    if args.epsilon.is_nan() || args.epsilon < 0.0 {
        return Err(Failure::Usage(format!("--epsilon must be >= 0, got {}", args.epsilon)));
    }
    let index = load_index(&args.index)?;
    let q = read_query(&args.query)?;
    let cfg = index.config();
    info!(
        "resolved parameters: r={} n_paa={} lmax={} e={} seed=none epsilon={} query_len={}",
        cfg.band_radius,
        cfg.n_paa,
        index.lmax(),
        cfg.pad_value,
        args.epsilon,
        q.len()
    );
    let res = index.range_search(&q, args.epsilon)?;
    let s = &res.stats;
    info!(
        "{} matches; node visits {}, LB_MBR {}, LB_PAA {}, LB_Keogh {}, DTW evaluations {}; pruned {} by MBR, {} by PAA, {} by Keogh",
        res.matches.len(),
        s.node_visits,
        s.lb_mbr_evals,
        s.lb_paa_evals,
        s.lb_keogh_evals,
        s.dtw_evals,
        s.pruned_by_mbr,
        s.pruned_by_paa,
        s.pruned_by_keogh
    );

    if args.verify {
        let stored: Vec<TimeSeries> = index
            .entries()
            .iter()
            .map(|e| e.series().clone().with_id(e.id()))
            .collect();
        let scan = linear_scan(&stored, &q, args.epsilon, index.band())?;
        if scan.matches != res.matches {
            return Err(Failure::Invariant(format!(
                "index returned {:?} but linear scan returned {:?}",
                res.ids(),
                scan.ids()
            )));
        }
        info!("verified against linear scan ({} DTW evaluations)", scan.stats.dtw_evals);
    }

    let mut out = io::stdout().lock();
    for m in &res.matches {
        writeln!(out, "{}\t{}", m.id, m.distance)?;
    }
    Ok(())
}

struct Prepared {
    ds: Dataset,
    params: BenchParams,
}

fn prepare_bench(common: &CommonBenchArgs) -> Result<Prepared, Failure> {
    check_shape(&common.shape)?;
    if common.queries == 0 {
        return Err(Failure::Usage("--queries must be at least 1".into()));
    }
    if common.bounds.is_empty() {
        return Err(Failure::Usage("--bounds must name at least one bound".into()));
    }
    let (ds, r) = load_shaped(&common.input, &common.shape)?;
    let seed = common.seed.unwrap_or_else(|| {
        let s = rand::random::<u64>();
        eprintln!("no --seed given; using generated seed {s}");
        s
    });
    let params = BenchParams {
        band_radius: r,
        n_paa: common.shape.n_paa,
        lmax: common.shape.lmax.fixed(),
        pad_value: common.shape.pad,
        query_count: common.queries,
        seed,
        truncate_seed: common.shape.truncate_seed,
        exec: if common.serial { Execution::Serial } else { Execution::Parallel },
    };
    Ok(Prepared { ds, params })
}

fn log_bench(p: &Prepared, lmax: &str, extra: &str) {
    info!(
        "resolved parameters: r={} n_paa={} lmax={lmax} e={} seed={} truncate_seed={} queries={} dataset={} ({} sequences, lengths {}..={}){extra}",
        p.params.band_radius,
        p.params.n_paa,
        p.params.pad_value,
        p.params.seed,
        seed_text(p.params.truncate_seed),
        p.params.query_count,
        p.ds.name,
        p.ds.len(),
        p.ds.min_len(),
        p.ds.max_len()
    );
}

fn resolved_lmax(p: &Prepared) -> Result<String, Failure> {
    Ok(p.params.resolve_lmax(&p.ds)?.to_string())
}

fn write_table(table: &ResultTable, common: &CommonBenchArgs) -> Outcome {
    let format = common.format.into();
    match &common.out {
        Some(path) => {
            bench::emit_results(table, path, format)?;
            info!("wrote {} rows to {}", table.rows.len(), path.display());
        }
        None => bench::write_results(table, io::stdout().lock(), format)?,
    }
    Ok(())
}

pub fn bench(cmd: &BenchCommand) -> Outcome {
    match cmd {
        BenchCommand::Tightness(common) => {
            let p = prepare_bench(common)?;
            log_bench(&p, &resolved_lmax(&p)?, &format!(" bounds={}", names(&common.bounds)));
            let table = bench::tightness_table(&p.ds, &common.bounds, &p.params)?;
            write_table(&table, common)
        }
        BenchCommand::Pruning { common, epsilon } => {
            if let Some(e) = epsilon.iter().find(|e| e.is_nan() || **e < 0.0) {
                return Err(Failure::Usage(format!("--epsilon values must be >= 0, got {e}")));
            }
            let p = prepare_bench(common)?;
            log_bench(&p, &resolved_lmax(&p)?, &format!(" bounds={} epsilon={epsilon:?}", names(&common.bounds)));
            let table = bench::pruning_table(&p.ds, &common.bounds, epsilon, &p.params)?;
            write_table(&table, common)
        }
        BenchCommand::Sweep {
            common,
            kind,
            epsilon,
            paa_grid,
            r_grid,
            r_frac_grid,
            lmax_grid,
        } => {
            let p = prepare_bench(common)?;
            let mut cfg = SweepConfig::new(*kind, p.params.clone());
            cfg.bounds = common.bounds.clone();
            cfg.epsilons = epsilon.clone();
            cfg.n_paa_grid = paa_grid.clone();
            cfg.radius_grid = if r_grid.is_empty() {
                r_frac_grid.iter().map(|&f| band_radius_for(p.ds.max_len(), f)).collect()
            } else {
                r_grid.clone()
            };
            cfg.lmax_grid = lmax_grid.clone();
            let (lmax, grid) = match kind {
                SweepKind::Epsilon => (resolved_lmax(&p)?, format!("{epsilon:?}")),
                SweepKind::NPaa => (common.shape.lmax.to_string(), format!("{paa_grid:?}")),
                SweepKind::Radius => (resolved_lmax(&p)?, format!("{:?}", cfg.radius_grid)),
                SweepKind::Lmax => ("grid".to_string(), format!("{lmax_grid:?}")),
            };
            log_bench(&p, &lmax, &format!(" bounds={} sweep={} grid={grid}", names(&common.bounds), kind.name()));
            let table = bench::run_sweep(&p.ds, &cfg)?;
            write_table(&table, common)
        }
    }
}

fn names(bounds: &[bench::BoundKind]) -> String {
    bounds.iter().map(|b| b.name()).collect::<Vec<_>>().join(",")
}
