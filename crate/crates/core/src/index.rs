//! Immutable PAA/R-tree index and exact epsilon-range search.
//!
//! Every candidate is padded to a common length `lmax` and reduced to its
//! segment means, which are packed into an R-tree. A query descends the tree
//! pruning subtrees by LB_MBR, then entries by LB_PAA (and optionally the full
//! resolution LB_Keogh of the padded pair), and finally confirms survivors with
//! banded DTW on the original, unpadded sequences. Each bound is below the next
//! stage, so nothing within `epsilon` is ever dismissed.

use std::collections::HashSet;

use crate::bounds::{extend_values, keogh_sum, smallest_lmax, Envelope, ExtensionParams};
use crate::dtw::{dtw, BandConstraint, DtwDistance};
use crate::error::{Error, Result};
use crate::exec::{map_ordered, Execution};
use crate::paa::{lb_mbr, lb_paa, paa_transform, PaaEnvelope, PaaVector};
use crate::rtree::{NodeChildren, RTree};
use crate::series::TimeSeries;

/// Relative slack applied when comparing a lower bound against `epsilon`.
/// Bounds that agree with the true distance in exact arithmetic may exceed it
/// by a few ulps; the final DTW stage is always compared exactly.
pub const PRUNE_SLACK: f64 = 1e-9;

#[inline]
pub(crate) fn exceeds(bound: f64, epsilon: f64) -> bool {
    bound > epsilon + PRUNE_SLACK * epsilon.max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LmaxPolicy {
    /// Smallest multiple of `n_paa` strictly above the longest sequence.
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexConfig {
    pub band_radius: usize,
    pub n_paa: usize,
    pub pad_value: f64,
    pub node_capacity: usize,
    pub lmax: LmaxPolicy,
    /// Adds a full-resolution LB_Keogh stage between LB_PAA and DTW.
    pub keogh_filter: bool,
}

impl IndexConfig {
    pub const DEFAULT_N_PAA: usize = 16;
    pub const DEFAULT_NODE_CAPACITY: usize = 16;

    pub fn new(band_radius: usize) -> Self {
        Self {
            band_radius,
            n_paa: Self::DEFAULT_N_PAA,
            pad_value: 0.0,
            node_capacity: Self::DEFAULT_NODE_CAPACITY,
            lmax: LmaxPolicy::Auto,
            keogh_filter: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_paa == 0 {
            return Err(Error::InvalidParameter("n_paa must be at least 1".into()));
        }
        if self.node_capacity < 2 {
            return Err(Error::InvalidParameter("node capacity must be at least 2".into()));
        }
        if !self.pad_value.is_finite() {
            return Err(Error::InvalidParameter("pad value must be finite".into()));
        }
        Ok(())
    }

    /// Resolves `lmax` for a dataset whose longest sequence has `max_len` samples.
    pub fn resolve_lmax(&self, max_len: usize) -> Result<usize> {
        match self.lmax {
            LmaxPolicy::Auto => Ok(smallest_lmax(max_len, self.n_paa)),
            LmaxPolicy::Fixed(lmax) => {
                if lmax <= max_len {
                    return Err(Error::InvalidParameter(format!(
                        "lmax {lmax} must exceed the longest sequence ({max_len})"
                    )));
                }
                if lmax % self.n_paa != 0 {
                    return Err(Error::NotDivisible {
                        length: lmax,
                        segments: self.n_paa,
                    });
                }
                Ok(lmax)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexEntry {
    pub(crate) id: u64,
    pub(crate) series: TimeSeries,
    pub(crate) paa: PaaVector,
}

impl IndexEntry {
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn series(&self) -> &TimeSeries {
        &self.series
    }

    pub fn paa(&self) -> &PaaVector {
        &self.paa
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Match {
    pub id: u64,
    pub distance: f64,
}

/// Work counters for one search. Every candidate ends up in exactly one of
/// the `pruned_*`, `rejected_by_dtw`, `infeasible` buckets or in the matches.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub node_visits: usize,
    pub lb_mbr_evals: usize,
    pub lb_paa_evals: usize,
    pub lb_keogh_evals: usize,
    pub dtw_evals: usize,
    /// Entries skipped because a whole subtree failed LB_MBR.
    pub pruned_by_mbr: usize,
    pub pruned_by_paa: usize,
    pub pruned_by_keogh: usize,
    pub rejected_by_dtw: usize,
    /// Candidates with no band-feasible alignment to the query.
    pub infeasible: usize,
}

impl SearchStats {
    pub fn pruned_total(&self) -> usize {
        self.pruned_by_mbr + self.pruned_by_paa + self.pruned_by_keogh
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RangeResult {
    /// Sorted by distance, then id.
    pub matches: Vec<Match>,
    pub stats: SearchStats,
}

impl RangeResult {
    pub fn ids(&self) -> Vec<u64> {
        let mut ids: Vec<u64> = self.matches.iter().map(|m| m.id).collect();
        ids.sort_unstable();
        ids
    }

    fn finish(mut matches: Vec<Match>, stats: SearchStats) -> Self {
        matches.sort_by(|a, b| a.distance.total_cmp(&b.distance).then(a.id.cmp(&b.id)));
        Self { matches, stats }
    }
}

/// Query-side precomputation shared by all candidates.
#[derive(Debug, Clone)]
pub struct PreparedQuery {
    pub(crate) series: Vec<f64>,
    pub(crate) extended: Vec<f64>,
    pub(crate) envelope: Envelope,
    pub(crate) paa_envelope: PaaEnvelope,
}

impl PreparedQuery {
    pub fn new(q: &[f64], radius: usize, ext: ExtensionParams, n_paa: usize) -> Result<Self> {
        let extended = extend_values(q, ext)?;
        let envelope = Envelope::new(&extended, BandConstraint::Radius(radius))?;
        let paa_envelope = PaaEnvelope::new(&envelope, n_paa)?;
        Ok(Self {
            series: q.to_vec(),
            extended,
            envelope,
            paa_envelope,
        })
    }

    pub fn extended(&self) -> &[f64] {
        &self.extended
    }

    pub fn envelope(&self) -> &Envelope {
        &self.envelope
    }

    pub fn paa_envelope(&self) -> &PaaEnvelope {
        &self.paa_envelope
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DtwIndex {
    pub(crate) config: IndexConfig,
    pub(crate) lmax: usize,
    pub(crate) entries: Vec<IndexEntry>,
    pub(crate) tree: RTree,
}

/// Id of the `position`-th sequence: its own id if set, else its position.
pub fn effective_id(series: &TimeSeries, position: usize) -> u64 {
    series.id().unwrap_or(position as u64)
}

impl DtwIndex {
    pub fn build(dataset: &[TimeSeries], config: IndexConfig) -> Result<Self> {
        config.validate()?;
        if dataset.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let max_len = dataset.iter().map(|s| s.len()).max().unwrap_or(0);
        let min_len = dataset.iter().map(|s| s.len()).min().unwrap_or(0);
        if max_len - min_len > config.band_radius {
            log::warn!(
                "sequence lengths span {min_len}..={max_len}, wider than band radius {}; \
                 some pairs can never match",
                config.band_radius
            );
        }
        let lmax = config.resolve_lmax(max_len)?;
        let ext = ExtensionParams::new(lmax, config.pad_value)?;

        let mut seen = HashSet::with_capacity(dataset.len());
        let entries = dataset
            .iter()
            .enumerate()
            .map(|(pos, s)| {
                let id = effective_id(s, pos);
                if !seen.insert(id) {
                    return Err(Error::DuplicateId(id));
                }
                let paa = paa_transform(&extend_values(s, ext)?, config.n_paa)?;
                Ok(IndexEntry {
                    id,
                    series: s.clone(),
                    paa,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let points: Vec<&[f64]> = entries.iter().map(|e| e.paa.coords()).collect();
        let tree = RTree::bulk_load(&points, config.node_capacity);
        Ok(Self {
            config,
            lmax,
            entries,
            tree,
        })
    }

    pub fn config(&self) -> &IndexConfig {
        &self.config
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    pub fn band(&self) -> BandConstraint {
        BandConstraint::Radius(self.config.band_radius)
    }

    pub fn extension(&self) -> ExtensionParams {
        ExtensionParams {
            lmax: self.lmax,
            pad_value: self.config.pad_value,
        }
    }

    pub fn entries(&self) -> &[IndexEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn tree(&self) -> &RTree {
        &self.tree
    }

    pub fn prepare(&self, q: &[f64]) -> Result<PreparedQuery> {
        PreparedQuery::new(q, self.config.band_radius, self.extension(), self.config.n_paa)
    }

    /// All stored sequences within banded DTW distance `epsilon` of `q`.
    pub fn range_search(&self, q: &[f64], epsilon: f64) -> Result<RangeResult> {
        check_epsilon(epsilon)?;
        if q.len() >= self.lmax {
            return Err(Error::ExtensionTooShort {
                length: q.len(),
                lmax: self.lmax,
            });
        }
        let prepared = self.prepare(q)?;
        Ok(self.search_prepared(&prepared, epsilon))
    }

    /// Runs [`Self::range_search`] for each query; results are in query order
    /// and identical to serial execution.
    pub fn range_search_batch(
        &self,
        queries: &[TimeSeries],
        epsilon: f64,
        exec: Execution,
    ) -> Result<Vec<RangeResult>> {
        map_ordered(queries, exec, |q| self.range_search(q, epsilon))
            .into_iter()
            .collect()
    }

    fn search_prepared(&self, pq: &PreparedQuery, epsilon: f64) -> RangeResult {
        let band = self.band();
        let penv = &pq.paa_envelope;
        let mut stats = SearchStats::default();
        let mut matches = Vec::new();
        let mut c_ext = Vec::with_capacity(self.lmax);

        let mut stack = vec![self.tree.root];
        while let Some(idx) = stack.pop() {
            let node = &self.tree.nodes[idx];
            stats.node_visits += 1;
            stats.lb_mbr_evals += 1;
            let bound = lb_mbr(penv, &node.mbr).expect("index dimensions are consistent");
            if exceeds(bound, epsilon) {
                stats.pruned_by_mbr += node.entry_count;
                continue;
            }
            match &node.children {
                NodeChildren::Internal(children) => stack.extend(children.iter().rev()),
                NodeChildren::Leaf(entries) => {
                    for &e in entries {
                        let entry = &self.entries[e];
                        stats.lb_paa_evals += 1;
                        let bound = lb_paa(penv, &entry.paa).expect("index dimensions are consistent");
                        if exceeds(bound, epsilon) {
                            stats.pruned_by_paa += 1;
                            continue;
                        }
                        if self.config.keogh_filter {
                            stats.lb_keogh_evals += 1;
                            c_ext.clear();
                            c_ext.extend_from_slice(&entry.series);
                            c_ext.resize(self.lmax, self.config.pad_value);
                            let bound = keogh_sum(pq.envelope.upper(), pq.envelope.lower(), &c_ext);
                            if exceeds(bound, epsilon) {
                                stats.pruned_by_keogh += 1;
                                continue;
                            }
                        }
                        stats.dtw_evals += 1;
                        match dtw(&pq.series, &entry.series, band) {
                            DtwDistance::Infeasible => stats.infeasible += 1,
                            DtwDistance::Finite(d) if d <= epsilon => matches.push(Match {
                                id: entry.id,
                                distance: d,
                            }),
                            DtwDistance::Finite(_) => stats.rejected_by_dtw += 1,
                        }
                    }
                }
            }
        }
        RangeResult::finish(matches, stats)
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon.is_nan() || epsilon < 0.0 {
        return Err(Error::InvalidParameter(format!("epsilon must be >= 0, got {epsilon}")));
    }
    Ok(())
}

/// Sequential-scan oracle: banded DTW against every sequence.
pub fn linear_scan(
    dataset: &[TimeSeries],
    q: &[f64],
    epsilon: f64,
    band: BandConstraint,
) -> Result<RangeResult> {
    check_epsilon(epsilon)?;
    let mut stats = SearchStats::default();
    let mut matches = Vec::new();
    for (pos, c) in dataset.iter().enumerate() {
        stats.dtw_evals += 1;
        match dtw(q, c, band) {
            DtwDistance::Infeasible => stats.infeasible += 1,
            DtwDistance::Finite(d) if d <= epsilon => matches.push(Match {
                id: effective_id(c, pos),
                distance: d,
            }),
            DtwDistance::Finite(_) => stats.rejected_by_dtw += 1,
        }
    }
    Ok(RangeResult::finish(matches, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    fn ts(v: &[f64]) -> TimeSeries {
        TimeSeries::from_slice(v).unwrap()
    }

    #[test]
    fn single_sequence_index() {
        let s = ts(&[1.0, 2.0, 3.0]);
        let idx = DtwIndex::build(std::slice::from_ref(&s), IndexConfig { n_paa: 2, ..IndexConfig::new(1) }).unwrap();
        assert_eq!(idx.lmax(), 4);
        assert!(idx.tree().root().is_leaf());
        assert_eq!(idx.tree().root().mbr().low(), idx.entries()[0].paa().coords());
        let r = idx.range_search(&s, 0.0).unwrap();
        assert_eq!(r.matches, vec![Match { id: 0, distance: 0.0 }]);
    }

    #[test]
    fn identical_sequences_share_a_point() {
        let data: Vec<TimeSeries> = (0..10).map(|_| ts(&[0.5, 1.5, -2.0, 4.0])).collect();
        let idx = DtwIndex::build(&data, IndexConfig { n_paa: 4, node_capacity: 3, ..IndexConfig::new(1) })
            .unwrap();
        let root = idx.tree().root().mbr();
        assert_eq!(root.low(), root.high());
        let r = idx.range_search(&data[0], 0.0).unwrap();
        assert_eq!(r.ids(), (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn random_tree_is_tight() {
        let data = synth::random_walks(100, 40, 4, 3);
        let idx = DtwIndex::build(&data, IndexConfig { node_capacity: 8, n_paa: 8, ..IndexConfig::new(4) })
            .unwrap();
        let pts: Vec<&[f64]> = idx.entries().iter().map(|e| e.paa().coords()).collect();
        idx.tree().check(&pts).unwrap();
    }

    #[test]
    fn root_pruning_skips_all_dtw() {
        let data: Vec<TimeSeries> = (0..20).map(|i| ts(&[10.0 + i as f64; 8])).collect();
        let idx = DtwIndex::build(&data, IndexConfig { n_paa: 3, ..IndexConfig::new(1) }).unwrap();
        let r = idx.range_search(&[0.0; 8], 1.0).unwrap();
        assert!(r.matches.is_empty());
        assert_eq!(r.stats.dtw_evals, 0);
        assert_eq!(r.stats.pruned_by_mbr, 20);
    }

    #[test]
    fn rejects_bad_epsilon_and_long_queries() {
        let idx = DtwIndex::build(&[ts(&[1.0, 2.0])], IndexConfig { n_paa: 1, ..IndexConfig::new(1) }).unwrap();
        assert!(idx.range_search(&[1.0], -0.1).is_err());
        assert!(idx.range_search(&[1.0], f64::NAN).is_err());
        assert!(matches!(
            idx.range_search(&[1.0, 2.0, 3.0], 1.0),
            Err(Error::ExtensionTooShort { length: 3, lmax: 3 })
        ));
    }

    #[test]
    fn config_validation() {
        let data = [ts(&[1.0; 10])];
        let bad_lmax = IndexConfig { n_paa: 7, lmax: LmaxPolicy::Fixed(100), ..IndexConfig::new(1) };
        assert!(matches!(DtwIndex::build(&data, bad_lmax), Err(Error::NotDivisible { .. })));
        let short = IndexConfig { n_paa: 2, lmax: LmaxPolicy::Fixed(10), ..IndexConfig::new(1) };
        assert!(DtwIndex::build(&data, short).is_err());
        let cap = IndexConfig { node_capacity: 1, ..IndexConfig::new(1) };
        assert!(DtwIndex::build(&data, cap).is_err());
        assert!(matches!(DtwIndex::build(&[], IndexConfig::new(1)), Err(Error::EmptyDataset)));
        let dup = [ts(&[1.0]).with_id(3), ts(&[2.0]).with_id(3)];
        assert!(matches!(DtwIndex::build(&dup, IndexConfig::new(1)), Err(Error::DuplicateId(3))));
    }

    #[test]
    fn linear_scan_toy() {
        // dtw to Q=(0,1,2) under r=1: (0,2) -> 1, (0,1,5) -> 3, (9) -> infeasible
        let data = [ts(&[0.0, 2.0]), ts(&[0.0, 1.0, 5.0]), ts(&[9.0])];
        let q = [0.0, 1.0, 2.0];
        let r = linear_scan(&data, &q, 2.0, BandConstraint::Radius(1)).unwrap();
        assert_eq!(r.matches, vec![Match { id: 0, distance: 1.0 }]);
        assert_eq!(r.stats.dtw_evals, 3);
        assert_eq!(r.stats.infeasible, 1);
        assert_eq!(r.stats.rejected_by_dtw, 1);
        assert!(linear_scan(&data, &q, -1.0, BandConstraint::Radius(1)).is_err());
        let disjoint = linear_scan(&data, &[100.0, 100.0], 0.0, BandConstraint::Radius(1)).unwrap();
        assert!(disjoint.matches.is_empty());
    }

    #[test]
    fn search_matches_scan_with_and_without_keogh_stage() {
        let data = synth::random_walks(200, 48, 5, 11);
        let queries = synth::random_walks(30, 48, 5, 12);
        for keogh_filter in [false, true] {
            let cfg = IndexConfig { n_paa: 8, node_capacity: 6, keogh_filter, ..IndexConfig::new(5) };
            let idx = DtwIndex::build(&data, cfg).unwrap();
            for (k, q) in queries.iter().enumerate() {
                let eps = 5.0 + k as f64 * 2.0;
                let got = idx.range_search(q, eps).unwrap();
                let want = linear_scan(&data, q, eps, idx.band()).unwrap();
                assert_eq!(got.matches, want.matches);
                let s = got.stats;
                assert_eq!(
                    s.pruned_total() + s.rejected_by_dtw + s.infeasible + got.matches.len(),
                    data.len()
                );
            }
        }
    }

    #[test]
    fn batch_equals_serial() {
        let data = synth::random_walks(150, 32, 3, 5);
        let queries = synth::random_walks(20, 32, 3, 6);
        let idx = DtwIndex::build(&data, IndexConfig { n_paa: 4, ..IndexConfig::new(3) }).unwrap();
        let a = idx.range_search_batch(&queries, 12.0, Execution::Serial).unwrap();
        let b = idx.range_search_batch(&queries, 12.0, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }
}
