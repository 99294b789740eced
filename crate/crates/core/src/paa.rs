//! Piecewise aggregate approximation of extended sequences, plus the
//! index-level bounds LB_PAA (envelope vs. point) and LB_MBR (envelope vs. box).
//!
//! All distances are scaled by `lmax / n_paa`, the segment width.

use crate::bounds::{outside, Envelope};
use crate::error::{Error, Result};

/// Segment means of an extended sequence of length `lmax`.
#[derive(Debug, Clone, PartialEq)]
pub struct PaaVector {
    coords: Vec<f64>,
    lmax: usize,
}

impl PaaVector {
    /// Wraps precomputed coordinates. `lmax` must be a multiple of `coords.len()`.
    pub fn from_coords(coords: Vec<f64>, lmax: usize) -> Result<Self> {
        if coords.is_empty() || !lmax.is_multiple_of(coords.len()) {
            return Err(Error::NotDivisible {
                length: lmax,
                segments: coords.len(),
            });
        }
        Ok(Self { coords, lmax })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn n_paa(&self) -> usize {
        self.coords.len()
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    /// Segment width `lmax / n_paa`.
    pub fn scale(&self) -> f64 {
        (self.lmax / self.coords.len()) as f64
    }

    fn check_compatible(&self, other: &PaaVector) -> Result<()> {
        if self.n_paa() != other.n_paa() {
            return Err(Error::DimensionMismatch {
                expected: self.n_paa(),
                actual: other.n_paa(),
            });
        }
        if self.lmax != other.lmax {
            return Err(Error::LengthMismatch {
                expected: self.lmax,
                actual: other.lmax,
            });
        }
        Ok(())
    }
}

/// Segment means of `x`; `x.len()` must be divisible by `n_paa`.
pub fn paa_transform(x: &[f64], n_paa: usize) -> Result<PaaVector> {
    if n_paa == 0 || x.is_empty() || !x.len().is_multiple_of(n_paa) {
        return Err(Error::NotDivisible {
            length: x.len(),
            segments: n_paa,
        });
    }
    let width = x.len() / n_paa;
    let coords = x
        .chunks_exact(width)
        .map(|seg| seg.iter().sum::<f64>() / width as f64)
        .collect();
    Ok(PaaVector {
        coords,
        lmax: x.len(),
    })
}

/// Scaled L1 distance between two PAA vectors. Lower-bounds the L1 distance
/// of the source sequences.
pub fn d_paa(a: &PaaVector, b: &PaaVector) -> Result<f64> {
    a.check_compatible(b)?;
    let sum = a
        .coords
        .iter()
        .zip(&b.coords)
        .fold(0.0, |acc, (x, y)| acc + (x - y).abs());
    Ok(a.scale() * sum)
}

/// PAA of an extended query's upper and lower boundary sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct PaaEnvelope {
    upper: PaaVector,
    lower: PaaVector,
}

impl PaaEnvelope {
    pub fn new(env: &Envelope, n_paa: usize) -> Result<Self> {
        Ok(Self {
            upper: paa_transform(env.upper(), n_paa)?,
            lower: paa_transform(env.lower(), n_paa)?,
        })
    }

    pub fn upper(&self) -> &PaaVector {
        &self.upper
    }

    pub fn lower(&self) -> &PaaVector {
        &self.lower
    }

    pub fn n_paa(&self) -> usize {
        self.upper.n_paa()
    }

    pub fn lmax(&self) -> usize {
        self.upper.lmax
    }
}

/// Alias for [`PaaEnvelope::new`].
pub fn paa_envelope(env: &Envelope, n_paa: usize) -> Result<PaaEnvelope> {
    PaaEnvelope::new(env, n_paa)
}

/// LB_PAA: scaled distance from each candidate segment mean to the
/// corresponding PAA envelope interval.
pub fn lb_paa(penv: &PaaEnvelope, cbar: &PaaVector) -> Result<f64> {
    penv.upper.check_compatible(cbar)?;
    let sum = penv
        .lower
        .coords
        .iter()
        .zip(&penv.upper.coords)
        .zip(&cbar.coords)
        .fold(0.0, |acc, ((&l, &u), &c)| acc + outside(c, l, u));
    Ok(cbar.scale() * sum)
}

/// Axis-aligned box over PAA vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Mbr {
    low: Vec<f64>,
    high: Vec<f64>,
}

impl Mbr {
    pub fn new(low: Vec<f64>, high: Vec<f64>) -> Result<Self> {
        if low.len() != high.len() {
            return Err(Error::DimensionMismatch {
                expected: low.len(),
                actual: high.len(),
            });
        }
        if low.iter().zip(&high).any(|(l, h)| l.is_nan() || h.is_nan() || l > h) {
            return Err(Error::InvalidParameter("box low exceeds high".into()));
        }
        Ok(Self { low, high })
    }

    /// Degenerate box around a single point.
    pub fn of_point(p: &[f64]) -> Self {
        Self {
            low: p.to_vec(),
            high: p.to_vec(),
        }
    }

    /// Tight box around `points`. `None` when empty.
    pub fn bounding<'a>(mut points: impl Iterator<Item = &'a [f64]>) -> Option<Self> {
        let mut mbr = Self::of_point(points.next()?);
        for p in points {
            mbr.expand_point(p);
        }
        Some(mbr)
    }

    pub fn expand_point(&mut self, p: &[f64]) {
        for ((l, h), &v) in self.low.iter_mut().zip(self.high.iter_mut()).zip(p) {
            *l = l.min(v);
            *h = h.max(v);
        }
    }

    pub fn expand(&mut self, other: &Mbr) {
        for (l, &o) in self.low.iter_mut().zip(&other.low) {
            *l = l.min(o);
        }
        for (h, &o) in self.high.iter_mut().zip(&other.high) {
            *h = h.max(o);
        }
    }

    pub fn contains_point(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && self
                .low
                .iter()
                .zip(&self.high)
                .zip(p)
                .all(|((&l, &h), &v)| l <= v && v <= h)
    }

    pub fn contains(&self, other: &Mbr) -> bool {
        self.contains_point(&other.low) && self.contains_point(&other.high)
    }

    pub fn low(&self) -> &[f64] {
        &self.low
    }

    pub fn high(&self) -> &[f64] {
        &self.high
    }

    pub fn dim(&self) -> usize {
        self.low.len()
    }

    pub fn center(&self, axis: usize) -> f64 {
        0.5 * (self.low[axis] + self.high[axis])
    }
}

/// LB_MBR: scaled per-dimension gap between the PAA envelope interval
/// `[l, u]` and the box slab `[b, h]`. Zero wherever they overlap, so it never
/// exceeds LB_PAA of any point inside the box.
pub fn lb_mbr(penv: &PaaEnvelope, mbr: &Mbr) -> Result<f64> {
    if mbr.dim() != penv.n_paa() {
        return Err(Error::DimensionMismatch {
            expected: penv.n_paa(),
            actual: mbr.dim(),
        });
    }
    let sum = penv
        .lower
        .coords
        .iter()
        .zip(&penv.upper.coords)
        .zip(mbr.low.iter().zip(&mbr.high))
        .fold(0.0, |acc, ((&l, &u), (&b, &h))| {
            acc + if l > h {
                l - h
            } else if b > u {
                b - u
            } else {
                0.0
            }
        });
    Ok(penv.upper.scale() * sum)
}
