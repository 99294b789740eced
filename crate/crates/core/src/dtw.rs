//! Band-constrained dynamic time warping with an L1 base distance.
//!
//! The dynamic program visits only the cells inside the Sakoe-Chiba band, row
//! by row, treating everything outside the band as unreachable. When the two
//! lengths differ by more than the band radius no warping path can reach the
//! final cell and the distance is [`DtwDistance::Infeasible`].

use std::fmt;

use crate::error::{Error, Result};

/// Largest `n + m` accepted by [`brute_force_dtw`].
pub const BRUTE_FORCE_CAP: usize = 14;

/// Global warping constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BandConstraint {
    /// Sakoe-Chiba band: cell `(i, j)` is reachable iff `|i - j| <= radius`.
    Radius(usize),
    Unbounded,
}

impl BandConstraint {
    #[inline]
    pub fn allows(self, i: usize, j: usize) -> bool {
        match self {
            BandConstraint::Radius(r) => i.abs_diff(j) <= r,
            BandConstraint::Unbounded => true,
        }
    }

    /// Radius that covers the whole `n x m` matrix when unbounded.
    #[inline]
    pub fn effective_radius(self, n: usize, m: usize) -> usize {
        match self {
            BandConstraint::Radius(r) => r,
            BandConstraint::Unbounded => n.max(m),
        }
    }

    pub fn radius(self) -> Option<usize> {
        match self {
            BandConstraint::Radius(r) => Some(r),
            BandConstraint::Unbounded => None,
        }
    }
}

impl From<usize> for BandConstraint {
    fn from(r: usize) -> Self {
        BandConstraint::Radius(r)
    }
}

/// Outcome of a DTW evaluation.
///
/// `Infeasible` means no band-feasible warping path exists. It is not an
/// error; in pruning logic it ranks above every finite distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DtwDistance {
    Finite(f64),
    Infeasible,
}

impl DtwDistance {
    pub fn value(self) -> Option<f64> {
        match self {
            DtwDistance::Finite(d) => Some(d),
            DtwDistance::Infeasible => None,
        }
    }

    pub fn is_feasible(self) -> bool {
        matches!(self, DtwDistance::Finite(_))
    }

    /// The distance, or `+inf` for an infeasible pair.
    pub fn cost(self) -> f64 {
        self.value().unwrap_or(f64::INFINITY)
    }

    /// True iff feasible and `<= epsilon`.
    pub fn within(self, epsilon: f64) -> bool {
        matches!(self, DtwDistance::Finite(d) if d <= epsilon)
    }
}

impl fmt::Display for DtwDistance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DtwDistance::Finite(d) => write!(f, "{d}"),
            DtwDistance::Infeasible => f.write_str("infeasible"),
        }
    }
}

/// Ordered alignment steps `(i, j)`, 1-based.
///
/// Construction does not validate; validity depends on the sequence lengths
/// and is checked by [`validate_path`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WarpingPath {
    steps: Vec<(usize, usize)>,
}

impl WarpingPath {
    pub fn new(steps: Vec<(usize, usize)>) -> Self {
        Self { steps }
    }

    pub fn steps(&self) -> &[(usize, usize)] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

impl From<Vec<(usize, usize)>> for WarpingPath {
    fn from(steps: Vec<(usize, usize)>) -> Self {
        Self::new(steps)
    }
}

#[inline]
pub fn base_distance(a: f64, b: f64) -> f64 {
    (a - b).abs()
}

/// Band-constrained DTW distance between `q` and `c`.
pub fn dtw(q: &[f64], c: &[f64], band: BandConstraint) -> DtwDistance {
    let (n, m) = (q.len(), c.len());
    if n == 0 || m == 0 {
        return DtwDistance::Infeasible;
    }
    let r = band.effective_radius(n, m);
    if n.abs_diff(m) > r {
        return DtwDistance::Infeasible;
    }

    // Two rolling rows; the cells just outside each row's band are reset to
    // +inf so stale values from two rows back are never read.
    let mut prev = vec![f64::INFINITY; m];
    let mut curr = vec![f64::INFINITY; m];
    for (i, &qi) in q.iter().enumerate() {
        let lo = i.saturating_sub(r);
        let hi = (i + r).min(m - 1);
        if lo > 0 {
            curr[lo - 1] = f64::INFINITY;
        }
        for j in lo..=hi {
            let d = base_distance(qi, c[j]);
            let best = if i == 0 && j == 0 {
                0.0
            } else {
                let diag = if i > 0 && j > 0 { prev[j - 1] } else { f64::INFINITY };
                let up = if i > 0 { prev[j] } else { f64::INFINITY };
                let left = if j > lo { curr[j - 1] } else { f64::INFINITY };
                diag.min(up).min(left)
            };
            curr[j] = d + best;
        }
        if hi + 1 < m {
            curr[hi + 1] = f64::INFINITY;
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    let total = prev[m - 1];
    if total.is_finite() {
        DtwDistance::Finite(total)
    } else {
        DtwDistance::Infeasible
    }
}

/// DTW distance together with one optimal warping path.
///
/// Ties during traceback prefer the diagonal predecessor, then vertical
/// `(i-1, j)`, then horizontal `(i, j-1)`.
pub fn dtw_with_path(
    q: &[f64],
    c: &[f64],
    band: BandConstraint,
) -> Option<(f64, WarpingPath)> {
    let (n, m) = (q.len(), c.len());
    if n == 0 || m == 0 {
        return None;
    }
    let r = band.effective_radius(n, m);
    if n.abs_diff(m) > r {
        return None;
    }

    let idx = |i: usize, j: usize| i * m + j;
    let mut acc = vec![f64::INFINITY; n * m];
    for i in 0..n {
        let lo = i.saturating_sub(r);
        let hi = (i + r).min(m - 1);
        for j in lo..=hi {
            let d = base_distance(q[i], c[j]);
            let best = if i == 0 && j == 0 {
                0.0
            } else {
                let diag = if i > 0 && j > 0 { acc[idx(i - 1, j - 1)] } else { f64::INFINITY };
                let up = if i > 0 { acc[idx(i - 1, j)] } else { f64::INFINITY };
                let left = if j > 0 { acc[idx(i, j - 1)] } else { f64::INFINITY };
                diag.min(up).min(left)
            };
            acc[idx(i, j)] = d + best;
        }
    }
    let total = acc[idx(n - 1, m - 1)];
    if !total.is_finite() {
        return None;
    }

    let mut steps = vec![(n, m)];
    let (mut i, mut j) = (n - 1, m - 1);
    while i > 0 || j > 0 {
        let diag = if i > 0 && j > 0 { acc[idx(i - 1, j - 1)] } else { f64::INFINITY };
        let up = if i > 0 { acc[idx(i - 1, j)] } else { f64::INFINITY };
        let left = if j > 0 { acc[idx(i, j - 1)] } else { f64::INFINITY };
        if diag <= up && diag <= left {
            i -= 1;
            j -= 1;
        } else if up <= left {
            i -= 1;
        } else {
            j -= 1;
        }
        steps.push((i + 1, j + 1));
    }
    steps.reverse();
    Some((total, WarpingPath::new(steps)))
}

/// Checks boundary, monotonicity, continuity and band feasibility.
pub fn validate_path(path: &WarpingPath, n: usize, m: usize, band: BandConstraint) -> bool {
    path_violation(path, n, m, band).is_none()
}

fn path_violation(path: &WarpingPath, n: usize, m: usize, band: BandConstraint) -> Option<String> {
    let steps = path.steps();
    let (Some(&first), Some(&last)) = (steps.first(), steps.last()) else {
        return Some("path is empty".into());
    };
    if first != (1, 1) {
        return Some(format!("path starts at {first:?}, not (1, 1)"));
    }
    if last != (n, m) {
        return Some(format!("path ends at {last:?}, not ({n}, {m})"));
    }
    for (k, w) in steps.windows(2).enumerate() {
        let ((i0, j0), (i1, j1)) = (w[0], w[1]);
        if i1 < i0 || j1 < j0 {
            return Some(format!("monotonicity violated at step {}", k + 2));
        }
        if i1 - i0 > 1 || j1 - j0 > 1 || (i1 == i0 && j1 == j0) {
            return Some(format!("continuity violated at step {}", k + 2));
        }
    }
    if let Some(&(i, j)) = steps.iter().find(|&&(i, j)| !band.allows(i, j)) {
        return Some(format!("step ({i}, {j}) lies outside the band"));
    }
    None
}

/// Summed base distance along `path`. Rejects paths that are not valid for
/// the lengths of `q` and `c`.
pub fn path_cost(q: &[f64], c: &[f64], path: &WarpingPath) -> Result<f64> {
    if let Some(why) = path_violation(path, q.len(), c.len(), BandConstraint::Unbounded) {
        return Err(Error::InvalidPath(why));
    }
    Ok(path
        .steps()
        .iter()
        .fold(0.0, |acc, &(i, j)| acc + base_distance(q[i - 1], c[j - 1])))
}

/// Exhaustive enumeration of every band-feasible warping path; returns the
/// minimum path cost. Exponential, capped at `n + m <= BRUTE_FORCE_CAP`.
pub fn brute_force_dtw(q: &[f64], c: &[f64], band: BandConstraint) -> Result<DtwDistance> {
    let total = q.len() + c.len();
    if total > BRUTE_FORCE_CAP {
        return Err(Error::OracleTooLarge {
            total,
            cap: BRUTE_FORCE_CAP,
        });
    }
    if q.is_empty() || c.is_empty() {
        return Ok(DtwDistance::Infeasible);
    }

    fn walk(q: &[f64], c: &[f64], band: BandConstraint, i: usize, j: usize, acc: f64, best: &mut f64) {
        if !band.allows(i, j) {
            return;
        }
        let acc = acc + base_distance(q[i], c[j]);
        if i + 1 == q.len() && j + 1 == c.len() {
            if acc < *best {
                *best = acc;
            }
            return;
        }
        if i + 1 < q.len() && j + 1 < c.len() {
            walk(q, c, band, i + 1, j + 1, acc, best);
        }
        if i + 1 < q.len() {
            walk(q, c, band, i + 1, j, acc, best);
        }
        if j + 1 < c.len() {
            walk(q, c, band, i, j + 1, acc, best);
        }
    }

    let mut best = f64::INFINITY;
    walk(q, c, band, 0, 0, 0.0, &mut best);
    Ok(if best.is_finite() {
        DtwDistance::Finite(best)
    } else {
        DtwDistance::Infeasible
    })
}
