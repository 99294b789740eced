//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
//!
//! Set `DTWIDX_GUNPOINT` to a UCR GunPoint file (e.g. `GunPoint_TRAIN.tsv`)
//! to also run the real-data tightness range check.

use std::process::ExitCode;
use std::time::Instant;

use dtwidx::bench::{self, BenchParams, BoundKind, OutputFormat, SweepConfig, SweepKind};
use dtwidx::ingest::band_radius_for;
use dtwidx::persist::to_bytes;
use dtwidx::{
    brute_force_dtw, dtw, extend, lb_keogh, lb_mbr, lb_paa, linear_scan, load_index, load_ucr,
    paa_envelope, paa_transform, save_index, synth, truncate_random, BandConstraint, Dataset,
    DtwDistance, DtwIndex, Envelope, Error, Execution, ExtensionParams, IndexConfig, LmaxPolicy,
    Mbr, TruncationSpec,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const REL_SLACK: f64 = 1e-9;

fn le(a: f64, b: f64) -> bool {
    a <= b + REL_SLACK * b.abs().max(1.0)
}

fn walk(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let mut x = 0.0;
    (0..len)
        .map(|_| {
            x += rng.gen_range(-1.0..1.0);
            x
        })
        .collect()
}

fn truncated(ds: Dataset, r: usize, seed: u64) -> Dataset {
    truncate_random(&ds, TruncationSpec { seed, band_radius: r }).expect("truncation")
}

fn ac1_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xac1);
    let (mut trials, mut matches, mut empty) = (0usize, 0usize, 0usize);
    for round in 0..125u64 {
        let count = rng.gen_range(1..=500);
        let max_len = rng.gen_range(2..=64);
        let spread = rng.gen_range(0..=max_len / 3);
        let data = synth::random_walks(count, max_len, spread, round);
        let r = rng.gen_range(0..=8);
        let n_paa = *[1, 2, 3, 4, 8, 16].choose(&mut rng).unwrap();
        let mut config = IndexConfig::new(r);
        config.n_paa = n_paa;
        config.pad_value = *[0.0, -1.5, 3.0].choose(&mut rng).unwrap();
        config.node_capacity = rng.gen_range(2..=32);
        config.keogh_filter = rng.gen_bool(0.5);
        if rng.gen_bool(0.3) {
            config.lmax = LmaxPolicy::Fixed((max_len / n_paa + 1 + rng.gen_range(0..3)) * n_paa);
        }
        let index = DtwIndex::build(&data, config).map_err(|e| format!("build: {e}"))?;
        let band = BandConstraint::Radius(r);

        for _ in 0..8 {
            let q: Vec<f64> = if rng.gen_bool(0.5) {
                let mut q = data[rng.gen_range(0..count)].values().to_vec();
                for v in &mut q {
                    *v += rng.gen_range(-0.3..0.3);
                }
                q
            } else {
                let len = rng.gen_range(1..=max_len);
                walk(&mut rng, len)
            };
            let mut dists: Vec<f64> = data.iter().filter_map(|c| dtw(&q, c, band).value()).collect();
            dists.sort_by(f64::total_cmp);
            let eps = match (rng.gen_range(0..4), dists.is_empty()) {
                (_, true) | (0, _) => 0.0,
                (1, _) => dists[dists.len() / 20],
                (2, _) => dists[rng.gen_range(0..dists.len())],
                _ => dists[dists.len() - 1] * 1.5,
            };
            let got = index.range_search(&q, eps).map_err(|e| format!("search: {e}"))?;
            let want = linear_scan(&data, &q, eps, band).map_err(|e| format!("scan: {e}"))?;
            if got.matches != want.matches {
                return Err(format!(
                    "trial {trials}: index returned {:?}, scan {:?} (eps {eps}, r {r}, config {config:?})",
                    got.ids(),
                    want.ids()
                ));
            }
            trials += 1;
            matches += want.matches.len();
            empty += usize::from(want.matches.is_empty());
        }
    }
    Ok(format!("{trials} trials identical ({matches} matches, {empty} empty results)"))
}

fn for_each_grid_vector(len: usize, mut f: impl FnMut(&[f64])) {
    let mut v = vec![-2.0; len];
    loop {
        f(&v);
        let mut k = 0;
        while k < len && v[k] == 2.0 {
            v[k] = -2.0;
            k += 1;
        }
        if k == len {
            return;
        }
        v[k] += 1.0;
    }
}

fn ac2_oracle() -> Outcome {
    let bands = [
        BandConstraint::Unbounded,
        BandConstraint::Radius(0),
        BandConstraint::Radius(1),
        BandConstraint::Radius(2),
    ];
    let mut checked = 0u64;
    let mut failure = None;
    let mut compare = |q: &[f64], c: &[f64], checked: &mut u64| {
        for band in bands {
            let fast = dtw(q, c, band);
            let slow = brute_force_dtw(q, c, band).expect("within cap");
            let ok = match (fast, slow) {
                (DtwDistance::Finite(a), DtwDistance::Finite(b)) => (a - b).abs() <= 1e-12,
                (DtwDistance::Infeasible, DtwDistance::Infeasible) => true,
                _ => false,
            };
            if !ok && failure.is_none() {
                failure = Some(format!("{q:?} vs {c:?} under {band:?}: {fast:?} != {slow:?}"));
            }
            *checked += 1;
        }
    };

    // Every pair over the grid up to total length 9.
    const EXHAUSTIVE_TOTAL: usize = 9;
    for n in 1..EXHAUSTIVE_TOTAL {
        for m in 1..=EXHAUSTIVE_TOTAL - n {
            for_each_grid_vector(n, |q| for_each_grid_vector(m, |c| compare(q, c, &mut checked)));
        }
    }
    let exhaustive = checked;

    // Longer shapes up to n + m = 12: every (n, m) split, sampled grid values.
    let mut rng = ChaCha8Rng::seed_from_u64(0xac2);
    for total in EXHAUSTIVE_TOTAL + 1..=12 {
        for n in 1..total {
            for _ in 0..2_000 {
                let q: Vec<f64> = (0..n).map(|_| rng.gen_range(-2..=2) as f64).collect();
                let c: Vec<f64> = (0..total - n).map(|_| rng.gen_range(-2..=2) as f64).collect();
                compare(&q, &c, &mut checked);
            }
        }
    }
    match failure {
        Some(f) => Err(f),
        None => Ok(format!(
            "{checked} comparisons ({exhaustive} exhaustive for n+m <= {EXHAUSTIVE_TOTAL}, rest sampled up to 12)"
        )),
    }
}

fn ac3_bound_chain() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xac3);
    let pairs = 10_000;
    for t in 0..pairs {
        let r: usize = rng.gen_range(0..=6);
        let n_paa = *[1, 2, 4, 8].choose(&mut rng).unwrap();
        let n: usize = rng.gen_range(2..=40);
        let m = rng.gen_range(n.saturating_sub(r).max(1)..=n + r);
        let q = walk(&mut rng, n);
        let c = walk(&mut rng, m);
        let lmax = (n.max(m) / n_paa + 1 + rng.gen_range(0..2)) * n_paa;
        let ext = ExtensionParams::new(lmax, rng.gen_range(-2.0..2.0)).unwrap();
        let (qx, cx) = (extend(&q, ext).unwrap(), extend(&c, ext).unwrap());
        let band = BandConstraint::Radius(r);

        let env = Envelope::new(&qx, band).unwrap();
        let penv = paa_envelope(&env, n_paa).unwrap();
        let cbar = paa_transform(&cx, n_paa).unwrap();
        // Box around C's PAA vector plus a few random neighbours.
        let mut mbr = Mbr::of_point(cbar.coords());
        for _ in 0..rng.gen_range(0..4) {
            let p: Vec<f64> = cbar.coords().iter().map(|v| v + rng.gen_range(-3.0..3.0)).collect();
            mbr.expand_point(&p);
        }

        let chain = [
            ("lb_mbr", lb_mbr(&penv, &mbr).unwrap()),
            ("lb_paa", lb_paa(&penv, &cbar).unwrap()),
            ("lb_keogh(Q+,C+)", lb_keogh(&env, &cx).unwrap()),
            ("dtw(Q+,C+)", dtw(&qx, &cx, band).value().unwrap()),
            ("dtw(Q,C)", dtw(&q, &c, band).value().unwrap()),
        ];
        for w in chain.windows(2) {
            if !le(w[0].1, w[1].1) {
                return Err(format!("pair {t}: {} = {} > {} = {}", w[0].0, w[0].1, w[1].0, w[1].1));
            }
        }
    }
    Ok(format!("{pairs} pairs satisfy the full chain"))
}

fn ac4_extension_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xac4);
    let mut checked = 0;
    for _ in 0..2_000 {
        let r: usize = rng.gen_range(0..=6);
        let n: usize = rng.gen_range(1..=40);
        let m = rng.gen_range(n.saturating_sub(r).max(1)..=n + r);
        let (q, c) = (walk(&mut rng, n), walk(&mut rng, m));
        let base = n.max(m) + 1;
        let pad = rng.gen_range(-3.0..3.0);
        let band = BandConstraint::Radius(r);
        let measure = |lmax: usize| {
            let ext = ExtensionParams::new(lmax, pad).unwrap();
            let (qx, cx) = (extend(&q, ext).unwrap(), extend(&c, ext).unwrap());
            let d = dtw(&qx, &cx, band).value().unwrap();
            let lb = lb_keogh(&Envelope::new(&qx, band).unwrap(), &cx).unwrap();
            (d, lb)
        };
        let (d0, lb0) = measure(base);
        for t in 1..=5 {
            let (d, lb) = measure(base + t);
            if (d - d0).abs() > 1e-12 || (lb - lb0).abs() > 1e-12 {
                return Err(format!("t={t}: dtw {d} vs {d0}, lb_keogh {lb} vs {lb0} (r {r}, n {n}, m {m})"));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} (pair, t) cases unchanged"))
}

fn ac5_radius_monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xac5);
    for p in 0..1_000 {
        let n = rng.gen_range(1..=48);
        let q = walk(&mut rng, n);
        let c = walk(&mut rng, n);
        let mut prev = f64::INFINITY;
        for r in 0..=8 {
            let d = dtw(&q, &c, BandConstraint::Radius(r))
                .value()
                .ok_or_else(|| format!("pair {p} infeasible at r={r}"))?;
            if d > prev {
                return Err(format!("pair {p}: dtw rose from {prev} to {d} at r={r}"));
            }
            prev = d;
        }
    }
    Ok("1000 pairs nonincreasing over r = 0..8".into())
}

fn tightness_means(ds: &Dataset, r: usize, seed: u64) -> Result<[f64; 3], String> {
    let mut p = BenchParams::new(r, seed);
    p.query_count = 100;
    let s = bench::measure_tightness(ds, &[BoundKind::KeoghPlus, BoundKind::Yi, BoundKind::Kim], &p)
        .map_err(|e| e.to_string())?;
    Ok([s[0].mean, s[1].mean, s[2].mean])
}

fn ac6_table_ordering() -> Outcome {
    let mut lines = Vec::new();
    for seed in 1..=3u64 {
        let len = 128;
        let r = band_radius_for(len, 0.10);
        for ds in [synth::cylinder_bell_funnel(200, len, seed), synth::smooth_shapes(200, len, seed)] {
            let ds = truncated(ds, r, seed);
            let [keogh, yi, kim] = tightness_means(&ds, r, seed)?;
            let line = format!("{}#{seed}: keogh+ {keogh:.4} yi {yi:.4} kim {kim:.4}", ds.name);
            if !(keogh > yi && keogh > kim) {
                return Err(format!("ordering violated: {line}"));
            }
            lines.push(line);
        }
    }
    match std::env::var_os("DTWIDX_GUNPOINT") {
        Some(path) => {
            let ds = load_ucr(&path).map_err(|e| e.to_string())?;
            let r = band_radius_for(ds.max_len(), 0.10);
            let ds = truncated(ds, r, 1);
            let [keogh, _, _] = tightness_means(&ds, r, 1)?;
            if !(0.40..=0.75).contains(&keogh) {
                return Err(format!("GunPoint keogh+ tightness {keogh:.4} outside [0.40, 0.75]"));
            }
            lines.push(format!("GunPoint keogh+ {keogh:.4}"));
        }
        None => lines.push("GunPoint check skipped (DTWIDX_GUNPOINT unset)".into()),
    }
    Ok(lines.join("; "))
}

fn sweep(ds: &Dataset, cfg: &SweepConfig) -> Result<Vec<(String, f64)>, String> {
    let t = bench::run_sweep(ds, cfg).map_err(|e| e.to_string())?;
    Ok(t.rows.into_iter().map(|r| (r.bound, r.value)).collect())
}

fn nondecreasing(vals: &[f64], tol: f64) -> bool {
    vals.windows(2).all(|w| w[1] >= w[0] - tol)
}

fn ac7_paa_resolution() -> Outcome {
    let mut lines = Vec::new();
    for seed in 1..=2u64 {
        let len = 128;
        let r = band_radius_for(len, 0.10);
        let ds = truncated(synth::smooth_shapes(100, len, seed), r, seed);
        let mut p = BenchParams::new(r, seed);
        p.lmax = Some(144);
        let mut cfg = SweepConfig::new(SweepKind::NPaa, p);
        cfg.n_paa_grid = vec![2, 4, 8, 16];
        let vals: Vec<f64> = sweep(&ds, &cfg)?.into_iter().map(|(_, v)| v).collect();
        let line = format!("seed {seed}: {}", fmt_vals(&vals));
        if !nondecreasing(&vals, 0.01) {
            return Err(format!("T_PAA decreased: {line}"));
        }
        lines.push(line);
    }
    Ok(lines.join("; "))
}

fn fmt_vals(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(" -> ")
}

fn ac8_radius_trend() -> Outcome {
    let mut lines = Vec::new();
    let len = 128;
    for ds in [synth::cylinder_bell_funnel(100, len, 8), synth::smooth_shapes(100, len, 8)] {
        let ds = truncated(ds, band_radius_for(len, 0.10), 8);
        let mut cfg = SweepConfig::new(SweepKind::Radius, BenchParams::new(0, 8));
        cfg.bounds = vec![BoundKind::KeoghPlus, BoundKind::Paa];
        cfg.radius_grid = [0.10, 0.15, 0.20].iter().map(|&f| band_radius_for(len, f)).collect();
        let rows = sweep(&ds, &cfg)?;
        for bound in ["keogh_plus", "paa"] {
            let vals: Vec<f64> = rows.iter().filter(|(b, _)| b == bound).map(|(_, v)| *v).collect();
            let line = format!("{} {bound}: {}", ds.name, fmt_vals(&vals));
            if !vals.windows(2).all(|w| w[1] <= w[0] + 0.01) {
                return Err(format!("tightness rose with r: {line}"));
            }
            lines.push(line);
        }
    }
    Ok(lines.join("; "))
}

fn ac9_pruning_trend() -> Outcome {
    let len = 128;
    let r = band_radius_for(len, 0.10);
    let ds = truncated(synth::cylinder_bell_funnel(100, len, 9), r, 9);
    let params = BenchParams { query_count: 50, ..BenchParams::new(r, 9) };
    let band = BandConstraint::Radius(r);
    let mut dists: Vec<f64> = Vec::new();
    for qi in bench::select_queries(ds.len(), params.query_count, params.seed) {
        for (ci, c) in ds.sequences.iter().enumerate() {
            if ci != qi {
                dists.extend(dtw(&ds.sequences[qi], c, band).value());
            }
        }
    }
    dists.sort_by(f64::total_cmp);
    let pct = |p: f64| dists[((dists.len() - 1) as f64 * p).round() as usize];
    let (lo, hi) = (pct(0.05), pct(0.95));
    let s = bench::measure_pruning(&ds, &[BoundKind::KeoghPlus], &[lo, hi], &params).map_err(|e| e.to_string())?;
    let (p_lo, p_hi) = (s[0].2.power, s[1].2.power);
    let line = format!("power {p_lo:.4} at p5 = {lo:.3}, {p_hi:.4} at p95 = {hi:.3}");
    if p_lo > 0.0 && p_hi <= 0.05 {
        Ok(line)
    } else {
        Err(line)
    }
}

fn ac10_persistence() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let data = synth::random_walks(400, 60, 6, 10);
    let mut config = IndexConfig::new(6);
    config.n_paa = 8;
    let index = DtwIndex::build(&data, config).map_err(|e| e.to_string())?;
    let path = dir.path().join("walks.dtwi");
    save_index(&index, &path).map_err(|e| e.to_string())?;
    let loaded = load_index(&path).map_err(|e| e.to_string())?;

    let mut rng = ChaCha8Rng::seed_from_u64(0xa10);
    for k in 0..100 {
        let len = rng.gen_range(54..=60);
        let q = walk(&mut rng, len);
        let eps = rng.gen_range(0.0..60.0);
        let a = index.range_search(&q, eps).map_err(|e| e.to_string())?;
        let b = loaded.range_search(&q, eps).map_err(|e| e.to_string())?;
        if a.matches != b.matches {
            return Err(format!("query {k} differs after reload"));
        }
    }

    let mut bytes = to_bytes(&index);
    let last = bytes.len() - 1;
    bytes[last] ^= 0x5a;
    let bad = dir.path().join("bad.dtwi");
    std::fs::write(&bad, &bytes).map_err(|e| e.to_string())?;
    match load_index(&bad) {
        Err(Error::ChecksumMismatch { .. }) => {}
        other => return Err(format!("corrupted checksum accepted or misreported: {:?}", other.err())),
    }
    let mut bytes = to_bytes(&index);
    let mid = bytes.len() / 2;
    bytes[mid] ^= 0x01;
    std::fs::write(&bad, &bytes).map_err(|e| e.to_string())?;
    if load_index(&bad).is_ok() {
        return Err("corrupted payload accepted".into());
    }
    Ok("100 queries identical after reload; corrupted trailer and payload rejected".into())
}

fn bench_outputs(exec: Execution, dir: &std::path::Path, tag: &str) -> Result<Vec<Vec<u8>>, String> {
    let len = 64;
    let r = band_radius_for(len, 0.10);
    let ds = truncated(synth::cylinder_bell_funnel(30, len, 11), r, 11);
    let params = BenchParams { query_count: 20, truncate_seed: Some(11), exec, ..BenchParams::new(r, 11) };
    let all = BoundKind::ALL.to_vec();
    let mut tables = vec![
        bench::tightness_table(&ds, &all, &params).map_err(|e| e.to_string())?,
        bench::pruning_table(&ds, &all, &[0.5, 5.0, 50.0], &params).map_err(|e| e.to_string())?,
    ];
    for kind in [SweepKind::NPaa, SweepKind::Radius, SweepKind::Lmax] {
        let mut cfg = SweepConfig::new(kind, params.clone());
        cfg.bounds = all.clone();
        cfg.n_paa_grid = vec![2, 4, 8];
        cfg.radius_grid = vec![2, 6, 10];
        cfg.lmax_grid = vec![80, 96, 128];
        tables.push(bench::run_sweep(&ds, &cfg).map_err(|e| e.to_string())?);
    }
    let mut out = Vec::new();
    for (i, t) in tables.iter().enumerate() {
        for fmt in [OutputFormat::Csv, OutputFormat::JsonLines] {
            let p = dir.join(format!("{tag}-{i}-{fmt:?}"));
            bench::emit_results(t, &p, fmt).map_err(|e| e.to_string())?;
            out.push(std::fs::read(&p).map_err(|e| e.to_string())?);
        }
    }
    Ok(out)
}

fn ac11_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let reference = bench_outputs(Execution::Serial, dir.path(), "s1")?;
    for (tag, exec) in [("s2", Execution::Serial), ("p1", Execution::Parallel), ("p2", Execution::Parallel)] {
        if bench_outputs(exec, dir.path(), tag)? != reference {
            return Err(format!("run {tag} ({exec:?}) differs from the first serial run"));
        }
    }
    Ok(format!(
        "{} files byte-identical across 2 serial + 2 parallel runs (parallel available: {})",
        reference.len(),
        Execution::parallel_available()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("AC1 exactness", ac1_exactness),
        ("AC2 oracle equivalence", ac2_oracle),
        ("AC3 bound chain", ac3_bound_chain),
        ("AC4 extension invariance", ac4_extension_invariance),
        ("AC5 radius monotonicity", ac5_radius_monotonicity),
        ("AC6 tightness ordering", ac6_table_ordering),
        ("AC7 PAA resolution trend", ac7_paa_resolution),
        ("AC8 band radius trend", ac8_radius_trend),
        ("AC9 pruning power trend", ac9_pruning_trend),
        ("AC10 persistence", ac10_persistence),
        ("AC11 determinism", ac11_determinism),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name} ({secs:.1}s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name} ({secs:.1}s): {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
