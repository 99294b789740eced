//! Sequence-level lower bounds of banded DTW.
//!
//! LB_Keogh needs equal-length inputs. Padding both sequences with the same
//! constant up to a common length `lmax` (see [`extend`]) never increases their
//! banded DTW distance, and the padded pair's LB_Keogh does not depend on how
//! far beyond the longer sequence the padding goes. [`lb_keogh_plus`] combines
//! the two.

use std::collections::VecDeque;

use crate::dtw::BandConstraint;
use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Upper and lower boundary sequences of a query under band radius `radius`.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    upper: Vec<f64>,
    lower: Vec<f64>,
    radius: usize,
}

impl Envelope {
    /// Windowed max/min over `[i - r, i + r]`, clipped to the sequence.
    pub fn new(q: &[f64], band: BandConstraint) -> Result<Self> {
        let radius = band.radius().ok_or(Error::UnboundedEnvelope)?;
        if q.is_empty() {
            return Err(Error::EmptySeries);
        }
        let upper = sliding_extreme(q, radius, |a, b| a >= b);
        let lower = sliding_extreme(q, radius, |a, b| a <= b);
        Ok(Self {
            upper,
            lower,
            radius,
        })
    }

    #[cfg(test)]
    pub(crate) fn from_parts(upper: Vec<f64>, lower: Vec<f64>, radius: usize) -> Self {
        Self {
            upper,
            lower,
            radius,
        }
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.upper.len()
    }

    pub fn is_empty(&self) -> bool {
        self.upper.is_empty()
    }
}

/// Monotone-deque sliding window extreme. `dominates(a, b)` is true when `a`
/// should evict `b` from the back of the deque.
fn sliding_extreme(x: &[f64], r: usize, dominates: impl Fn(f64, f64) -> bool) -> Vec<f64> {
    let n = x.len();
    let mut out = Vec::with_capacity(n);
    let mut window: VecDeque<usize> = VecDeque::new();
    let mut next = 0;
    for i in 0..n {
        let right = (i + r).min(n - 1);
        while next <= right {
            while window.back().is_some_and(|&b| dominates(x[next], x[b])) {
                window.pop_back();
            }
            window.push_back(next);
            next += 1;
        }
        let left = i.saturating_sub(r);
        while window.front().is_some_and(|&f| f < left) {
            window.pop_front();
        }
        out.push(x[window[0]]);
    }
    out
}

/// Target length and shared pad constant for sequence extension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtensionParams {
    pub lmax: usize,
    pub pad_value: f64,
}

impl ExtensionParams {
    pub fn new(lmax: usize, pad_value: f64) -> Result<Self> {
        if lmax == 0 {
            return Err(Error::InvalidParameter("lmax must be positive".into()));
        }
        if !pad_value.is_finite() {
            return Err(Error::InvalidParameter(format!("pad value {pad_value} is not finite")));
        }
        Ok(Self { lmax, pad_value })
    }
}

/// Sum of the distances from each point of `c` to the envelope.
pub fn lb_keogh(env: &Envelope, c: &[f64]) -> Result<f64> {
    if c.len() != env.len() {
        return Err(Error::LengthMismatch {
            expected: env.len(),
            actual: c.len(),
        });
    }
    Ok(keogh_sum(&env.upper, &env.lower, c))
}

#[inline]
pub(crate) fn keogh_sum(upper: &[f64], lower: &[f64], c: &[f64]) -> f64 {
    upper
        .iter()
        .zip(lower)
        .zip(c)
        .fold(0.0, |acc, ((&u, &l), &ci)| acc + outside(ci, l, u))
}

/// Distance from `x` to the interval `[lo, hi]`, exactly zero inside.
#[inline]
pub(crate) fn outside(x: f64, lo: f64, hi: f64) -> f64 {
    if x > hi {
        x - hi
    } else if x < lo {
        lo - x
    } else {
        0.0
    }
}

/// Pads `x` with `params.pad_value` up to length `params.lmax`.
pub fn extend(x: &[f64], params: ExtensionParams) -> Result<TimeSeries> {
    TimeSeries::new(extend_values(x, params)?)
}

pub(crate) fn extend_values(x: &[f64], params: ExtensionParams) -> Result<Vec<f64>> {
    if x.len() >= params.lmax {
        return Err(Error::ExtensionTooShort {
            length: x.len(),
            lmax: params.lmax,
        });
    }
    let mut out = Vec::with_capacity(params.lmax);
    out.extend_from_slice(x);
    out.resize(params.lmax, params.pad_value);
    Ok(out)
}

/// LB_Keogh between the extended query and the extended candidate.
pub fn lb_keogh_plus(q: &[f64], c: &[f64], radius: usize, params: ExtensionParams) -> Result<f64> {
    let q_ext = extend_values(q, params)?;
    let c_ext = extend_values(c, params)?;
    let env = Envelope::new(&q_ext, BandConstraint::Radius(radius))?;
    lb_keogh(&env, &c_ext)
}

/// Smallest multiple of `n_paa` strictly greater than `max_len`.
pub fn smallest_lmax(max_len: usize, n_paa: usize) -> usize {
    let n_paa = n_paa.max(1);
    (max_len / n_paa + 1) * n_paa
}

/// Four-feature bound: largest of the first, last, max and min differences.
pub fn lb_kim(q: &[f64], c: &[f64]) -> f64 {
    let (Some(&qf), Some(&cf), Some(&ql), Some(&cl)) = (q.first(), c.first(), q.last(), c.last())
    else {
        return 0.0;
    };
    let (qmin, qmax) = min_max(q);
    let (cmin, cmax) = min_max(c);
    (qf - cf)
        .abs()
        .max((ql - cl).abs())
        .max((qmax - cmax).abs())
        .max((qmin - cmin).abs())
}

/// Sum over points of `c` lying outside `[min(q), max(q)]` of their distance
/// to that range. `q` is the criterion sequence, so the bound is asymmetric.
pub fn lb_yi(q: &[f64], c: &[f64]) -> f64 {
    if q.is_empty() {
        return 0.0;
    }
    let (qmin, qmax) = min_max(q);
    c.iter().fold(0.0, |acc, &x| acc + outside(x, qmin, qmax))
}

fn min_max(x: &[f64]) -> (f64, f64) {
    x.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}
