//! Head/tail breaks and related rank-size tools.
//!
//! Head/tail breaks split a series around its arithmetic mean: values
//! strictly above the mean form the head, the rest the tail. The split is
//! repeated on the head for as long as the head stays a minority (at most
//! `head_limit` of the values entering the level). The number of resulting
//! classes is the ht-index.

use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::math;

/// Head fraction above which a split is no longer accepted.
pub const DEFAULT_HEAD_LIMIT: f64 = 0.4;

/// ht-index from which a series is considered to have a scaling hierarchy.
pub const FRACTAL_HT_INDEX: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScalingError {
    #[error("series is empty")]
    Empty,
    #[error("value {value} at index {index} is not a positive finite number")]
    NonPositive { index: usize, value: f64 },
    #[error("head limit must lie strictly between 0 and 1, got {0}")]
    HeadLimit(f64),
    #[error("zipf series needs n >= 1")]
    ZeroCount,
}

/// Positive finite measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueSeries {
    values: Vec<f64>,
    label: Option<String>,
}

impl ValueSeries {
    pub fn new(values: Vec<f64>) -> Result<Self, ScalingError> {
        if values.is_empty() {
            return Err(ScalingError::Empty);
        }
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(ScalingError::NonPositive { index, value });
        }
        Ok(ValueSeries { values, label: None })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        math::sum(self.values.iter().copied()) / self.values.len() as f64
    }

    /// Multiplies every value by `c` (`c` must be positive and finite).
    pub fn scaled(&self, c: f64) -> Result<Self, ScalingError> {
        let s = ValueSeries::new(self.values.iter().map(|v| v * c).collect())?;
        Ok(ValueSeries { label: self.label.clone(), ..s })
    }
}

/// One class of a head/tail partition.
///
/// Each level records the split attempted on the values that entered it.
/// For every level but the last the split was accepted and its tail forms the
/// class. The last level keeps all of its values; its counts describe the
/// split that was attempted there and rejected (empty head, or head larger
/// than the limit), or a single remaining value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    pub mean: f64,
    pub head_count: usize,
    pub tail_count: usize,
    pub head_fraction: f64,
    /// Whether the head was split off and recursed into.
    pub accepted: bool,
}

impl Level {
    pub fn count(&self) -> usize {
        self.head_count + self.tail_count
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeadTailPartition {
    pub levels: Vec<Level>,
    /// Class (level index) of every input value, in input order.
    pub class_assignment: Vec<usize>,
    pub ht_index: usize,
    pub head_limit: f64,
}

impl HeadTailPartition {
    /// Sizes of the accepted heads, outermost first.
    pub fn head_sizes(&self) -> Vec<usize> {
        self.levels
            .iter()
            .filter(|l| l.accepted)
            .map(|l| l.head_count)
            .collect()
    }

    /// Indices of values in the head of level `k` (class greater than `k`).
    pub fn head_members(&self, k: usize) -> Vec<usize> {
        self.class_assignment
            .iter()
            .enumerate()
            .filter(|(_, c)| **c > k)
            .map(|(i, _)| i)
            .collect()
    }

    /// Whether the series shows a scaling hierarchy (ht-index of 3 or more).
    pub fn is_scaling(&self) -> bool {
        self.ht_index >= FRACTAL_HT_INDEX
    }
}

pub fn head_tail_breaks(s: &ValueSeries, head_limit: f64) -> Result<HeadTailPartition, ScalingError> {
    if !(head_limit > 0.0 && head_limit < 1.0) {
        return Err(ScalingError::HeadLimit(head_limit));
    }
    if s.is_empty() {
        return Err(ScalingError::Empty);
    }
    let values = s.values();
    let mut classes = alloc::vec![0usize; values.len()];
    let mut levels = Vec::new();
    let mut current: Vec<usize> = (0..values.len()).collect();

    loop {
        let class = levels.len();
        let n = current.len();
        let (lo, hi) = current
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| (lo.min(values[i]), hi.max(values[i])));
        // rounding must not push the mean of equal values below them
        let mean = (math::sum(current.iter().map(|&i| values[i])) / n as f64).clamp(lo, hi);
        let (head, tail): (Vec<usize>, Vec<usize>) =
            current.iter().partition(|&&i| values[i] > mean);
        let head_fraction = head.len() as f64 / n as f64;
        let accepted = n >= 2 && !head.is_empty() && head_fraction <= head_limit;
        levels.push(Level {
            mean,
            head_count: head.len(),
            tail_count: tail.len(),
            head_fraction,
            accepted,
        });
        if !accepted {
            for &i in &current {
                classes[i] = class;
            }
            break;
        }
        for &i in &tail {
            classes[i] = class;
        }
        current = head;
    }

    Ok(HeadTailPartition {
        ht_index: levels.len(),
        levels,
        class_assignment: classes,
        head_limit,
    })
}

pub fn ht_index(s: &ValueSeries, head_limit: f64) -> Result<usize, ScalingError> {
    head_tail_breaks(s, head_limit).map(|p| p.ht_index)
}

/// `[1, 1/2, ..., 1/n]`.
pub fn zipf_series(n: usize) -> Result<ValueSeries, ScalingError> {
    if n == 0 {
        return Err(ScalingError::ZeroCount);
    }
    ValueSeries::new((1..=n).map(|k| 1.0 / k as f64).collect())
}

/// Values sorted descending with ranks from 1; ties keep input order.
pub fn rank_size_table(s: &ValueSeries) -> Vec<(usize, f64)> {
    let mut v: Vec<f64> = s.values().to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v.into_iter().enumerate().map(|(i, x)| (i + 1, x)).collect()
}
