//! UCR-layout loading, random-suffix truncation and parameter resolution.

use std::fs;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bounds::smallest_lmax;
use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// A named collection of labelled sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub sequences: Vec<TimeSeries>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, sequences: Vec<TimeSeries>) -> Result<Self> {
        if sequences.is_empty() {
            return Err(Error::EmptyDataset);
        }
        Ok(Self {
            name: name.into(),
            sequences,
        })
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    pub fn max_len(&self) -> usize {
        self.sequences.iter().map(|s| s.len()).max().unwrap_or(0)
    }

    pub fn min_len(&self) -> usize {
        self.sequences.iter().map(|s| s.len()).min().unwrap_or(0)
    }
}

/// Splits a UCR line on tabs, commas or runs of whitespace.
fn fields(line: &str) -> Vec<&str> {
    if line.contains('\t') {
        line.split('\t').map(str::trim).collect()
    } else if line.contains(',') {
        line.split(',').map(str::trim).collect()
    } else {
        line.split_whitespace().collect()
    }
}

fn parse_sample(path: &Path, line: usize, field: usize, text: &str) -> Result<f64> {
    let err = |message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        field,
        message,
    };
    let v: f64 = text
        .parse()
        .map_err(|_| err(format!("'{text}' is not a number")))?;
    if !v.is_finite() {
        return Err(err(format!("'{text}' is not finite")));
    }
    Ok(v)
}

/// Parses UCR-format text: one sequence per line, class label first.
/// Rows may be ragged. Ids follow line order among non-empty lines.
pub fn parse_ucr(text: &str, path: &Path) -> Result<Vec<TimeSeries>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate().map(|(i, l)| (i + 1, l)) {
        if line.trim().is_empty() {
            log::warn!("{}: skipping empty line {lineno}", path.display());
            continue;
        }
        let parts = fields(line.trim());
        let label = parts[0];
        let values = parts[1..]
            .iter()
            .enumerate()
            .filter(|(_, f)| !f.is_empty())
            .map(|(k, f)| parse_sample(path, lineno, k + 2, f))
            .collect::<Result<Vec<_>>>()?;
        let series = TimeSeries::new(values).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: lineno,
            field: 2,
            message: e.to_string(),
        })?;
        out.push(series.with_id(out.len() as u64).with_label(label));
    }
    Ok(out)
}

pub fn load_ucr(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let sequences = parse_ucr(&text, path)?;
    if sequences.is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            field: 0,
            message: "file contains no sequences".into(),
        });
    }
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    Dataset::new(name, sequences)
}

/// Writes tab-separated UCR text; samples use the shortest exact round-trip form.
pub fn write_ucr(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    for s in &ds.sequences {
        write!(out, "{}", s.label().unwrap_or("0"))?;
        for v in s.values() {
            write!(out, "\t{v:?}")?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruncationSpec {
    pub seed: u64,
    pub band_radius: usize,
}

/// Cuts a random-length suffix from every sequence so that any two resulting
/// lengths differ by at most `band_radius`.
///
/// Each sequence keeps a prefix whose length is uniform over
/// `[max_len - r, own_len]`; for equal-length input that is `[len - r, len]`.
pub fn truncate_random(ds: &Dataset, spec: TruncationSpec) -> Result<Dataset> {
    let r = spec.band_radius;
    let (min_len, max_len) = (ds.min_len(), ds.max_len());
    if r == 0 {
        return Ok(ds.clone());
    }
    if r >= min_len {
        return Err(Error::InvalidParameter(format!(
            "band radius {r} must be smaller than the shortest sequence ({min_len})"
        )));
    }
    let floor = max_len - r;
    if min_len < floor {
        return Err(Error::InvalidParameter(format!(
            "lengths {min_len}..={max_len} already differ by more than {r}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let sequences = ds
        .sequences
        .iter()
        .map(|s| s.truncated(rng.gen_range(floor..=s.len())))
        .collect();
    Dataset::new(ds.name.clone(), sequences)
}

/// Smallest multiple of `n_paa` strictly greater than the longest sequence.
pub fn choose_lmax(ds: &Dataset, n_paa: usize) -> usize {
    smallest_lmax(ds.max_len(), n_paa)
}

/// Band radius as a fraction of `max_len`, rounded half up, at least 1.
pub fn band_radius_for(max_len: usize, fraction: f64) -> usize {
    // The epsilon keeps e.g. 0.15 * 10 = 1.4999999999999998 rounding as 1.5 would.
    let r = (fraction * max_len as f64 + 0.5 + 1e-9).floor();
    (r.max(0.0) as usize).max(1)
}

/// Ten percent of the longest sequence, rounded half up, at least 1.
pub fn default_band_radius(ds: &Dataset) -> usize {
    ((ds.max_len() + 5) / 10).max(1)
}
