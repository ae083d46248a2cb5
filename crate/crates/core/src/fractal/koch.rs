use alloc::vec::Vec;

use super::MeasureError;
use crate::geometry::{Point, Polyline};
use crate::math;
use crate::scaling::ValueSeries;

/// Vertex-count guard: iteration 12 already has 16.7 million segments.
pub const MAX_KOCH_ITERATIONS: u32 = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KochSpec {
    pub iterations: u32,
    /// Length of the initiator segment.
    pub unit: f64,
}

impl KochSpec {
    pub fn new(iterations: u32) -> Self {
        KochSpec { iterations, unit: 1.0 }
    }

    pub fn with_unit(mut self, unit: f64) -> Self {
        self.unit = unit;
        self
    }

    fn check(&self) -> Result<(), MeasureError> {
        if self.iterations > MAX_KOCH_ITERATIONS {
            return Err(MeasureError::TooManyIterations(self.iterations));
        }
        if !(self.unit.is_finite() && self.unit > 0.0) {
            return Err(MeasureError::Unit(self.unit));
        }
        Ok(())
    }

    pub fn segment_length(&self) -> f64 {
        self.unit / math::powf(3.0, self.iterations as f64)
    }
}

/// Koch curve from `(0, 0)` to `(unit, 0)` with the bumps on the +y side.
pub fn koch_curve(spec: &KochSpec) -> Result<Polyline, MeasureError> {
    spec.check()?;
    let (sin60, cos60) = (math::sqrt(3.0) / 2.0, 0.5);
    let mut pts = alloc::vec![Point::new(0.0, 0.0), Point::new(spec.unit, 0.0)];
    for _ in 0..spec.iterations {
        let mut next = Vec::with_capacity((pts.len() - 1) * 4 + 1);
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let d = (b - a) * (1.0 / 3.0);
            let p1 = a + d;
            let p3 = a + d * 2.0;
            let apex = p1 + Point::new(d.x * cos60 - d.y * sin60, d.x * sin60 + d.y * cos60);
            next.extend_from_slice(&[a, p1, apex, p3]);
        }
        next.push(*pts.last().expect("non-empty"));
        pts = next;
    }
    Ok(Polyline::new(pts)?)
}

/// Segment lengths of every iteration `0..=n` taken together: `4^k` segments
/// of length `unit / 3^k` for each `k`.
pub fn koch_recursive_segments(spec: &KochSpec) -> Result<ValueSeries, MeasureError> {
    spec.check()?;
    let mut values = Vec::new();
    for k in 0..=spec.iterations {
        let len = spec.unit / math::powf(3.0, k as f64);
        values.extend(core::iter::repeat_n(len, 1usize << (2 * k)));
    }
    Ok(ValueSeries::new(values)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_iterations() {
        let c0 = koch_curve(&KochSpec::new(0)).unwrap();
        assert_eq!(c0.vertices().len(), 2);
        assert_eq!(c0.length(), 1.0);

        let c1 = koch_curve(&KochSpec::new(1)).unwrap();
        assert_eq!(c1.vertices().len(), 5);
        assert!((c1.length() - 4.0 / 3.0).abs() < 1e-12);

        let c2 = koch_curve(&KochSpec::new(2)).unwrap();
        assert!((c2.length() - 16.0 / 9.0).abs() < 1e-12);

        let c3 = koch_curve(&KochSpec::new(3)).unwrap();
        assert_eq!(c3.vertices().len(), 65);
        assert!((c3.length() - 64.0 / 27.0).abs() < 1e-12);
        assert!((c3.last().x - 1.0).abs() < 1e-12 && c3.last().y.abs() < 1e-12);
    }

    #[test]
    fn apex_points_up() {
        let c1 = koch_curve(&KochSpec::new(1)).unwrap();
        let apex = c1.vertices()[2];
        assert!((apex.x - 0.5).abs() < 1e-12);
        assert!((apex.y - 3f64.sqrt() / 6.0).abs() < 1e-12);
    }

    #[test]
    fn guard() {
        assert_eq!(
            koch_curve(&KochSpec::new(13)),
            Err(MeasureError::TooManyIterations(13))
        );
        assert!(koch_recursive_segments(&KochSpec::new(13)).is_err());
        assert_eq!(koch_curve(&KochSpec::new(1).with_unit(0.0)), Err(MeasureError::Unit(0.0)));
    }

    #[test]
    fn recursive_multiset() {
        let s = koch_recursive_segments(&KochSpec::new(0)).unwrap();
        assert_eq!(s.values(), &[1.0]);
        let s = koch_recursive_segments(&KochSpec::new(1)).unwrap();
        assert_eq!(s.values(), &[1.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]);
        let s = koch_recursive_segments(&KochSpec::new(3)).unwrap();
        assert_eq!(s.len(), 85);
        let count = |x: f64| s.values().iter().filter(|v| **v == x).count();
        assert_eq!(count(1.0), 1);
        assert_eq!(count(1.0 / 3.0), 4);
        assert_eq!(count(1.0 / 9.0), 16);
        assert_eq!(count(1.0 / 27.0), 64);
    }
}
