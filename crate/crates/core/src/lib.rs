//! Exact epsilon-range search for variable-length time series under
//! Sakoe-Chiba banded dynamic time warping.
//!
//! Sequences of different lengths are padded with a shared constant to a
//! common length, which lets LB_Keogh (and its PAA/MBR relaxations) bound the
//! DTW distance of the original pair. The bounds drive an R-tree index whose
//! range search returns exactly the sequences a full DTW scan would.
//!
//! The `parallel` feature (on by default) runs query batches and benchmark
//! sweeps on rayon; without it the same entry points run serially and produce
//! identical results.

pub mod bench;
pub mod bounds;
pub mod dtw;
pub mod error;
pub mod exec;
pub mod index;
pub mod ingest;
pub mod paa;
pub mod persist;
pub mod rtree;
pub mod series;
pub mod synth;

pub use bounds::{extend, lb_keogh, lb_keogh_plus, lb_kim, lb_yi, Envelope, ExtensionParams};
pub use dtw::{
    base_distance, brute_force_dtw, dtw, dtw_with_path, path_cost, validate_path, BandConstraint,
    DtwDistance, WarpingPath,
};
pub use error::{Error, Result};
pub use exec::Execution;
pub use index::{linear_scan, DtwIndex, IndexConfig, LmaxPolicy, Match, RangeResult, SearchStats};
pub use ingest::{
    choose_lmax, default_band_radius, load_ucr, truncate_random, Dataset, TruncationSpec,
};
pub use paa::{d_paa, lb_mbr, lb_paa, paa_envelope, paa_transform, Mbr, PaaEnvelope, PaaVector};
pub use persist::{load_index, save_index};
pub use series::TimeSeries;
