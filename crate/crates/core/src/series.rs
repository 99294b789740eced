//! The universal input type: a finite, non-empty real-valued sequence.

use std::ops::Deref;

use crate::error::{Error, Result};

/// A finite, non-empty sequence of real samples with an optional id and class label.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    id: Option<u64>,
    label: Option<String>,
}

impl TimeSeries {
    /// Validates `values` (non-empty, all finite) and wraps them.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySeries);
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFiniteSample { index, value });
        }
        Ok(Self {
            values,
            id: None,
            label: None,
        })
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        Self::new(values.to_vec())
    }

    #[must_use]
    pub fn with_id(mut self, id: u64) -> Self {
        self.id = Some(id);
        self
    }

    #[must_use]
    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn id(&self) -> Option<u64> {
        self.id
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    /// Keeps the first `len` samples. `len` is clamped to `1..=self.len()`.
    #[must_use]
    pub fn truncated(&self, len: usize) -> Self {
        let len = len.clamp(1, self.values.len());
        Self {
            values: self.values[..len].to_vec(),
            id: self.id,
            label: self.label.clone(),
        }
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

impl Deref for TimeSeries {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.values
    }
}

impl AsRef<[f64]> for TimeSeries {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

impl TryFrom<Vec<f64>> for TimeSeries {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(matches!(TimeSeries::new(vec![]), Err(Error::EmptySeries)));
        assert!(matches!(
            TimeSeries::new(vec![1.0, f64::NAN]),
            Err(Error::NonFiniteSample { index: 1, .. })
        ));
        assert!(TimeSeries::new(vec![1.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn truncation_keeps_prefix_and_metadata() {
        let s = TimeSeries::from_slice(&[1.0, 2.0, 3.0])
            .unwrap()
            .with_id(7)
            .with_label("a");
        let t = s.truncated(2);
        assert_eq!(t.values(), &[1.0, 2.0]);
        assert_eq!(t.id(), Some(7));
        assert_eq!(t.label(), Some("a"));
        assert_eq!(s.truncated(0).len(), 1);
    }
}
