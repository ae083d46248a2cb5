use alloc::vec::Vec;

use super::fit::{loglog_fit, LogLogFit};
use super::{MeasureError, ScaleSeries};
use crate::geometry::{Point, Polyline};
use crate::math;

/// Relative tolerance for treating a vertex as lying on the yardstick circle.
const ON_CIRCLE: f64 = 1e-10;

/// Result of walking a curve with a fixed chord length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Walk {
    pub yardstick: f64,
    pub steps: usize,
    /// Straight-line distance from the last step to the curve's end.
    pub remainder: f64,
    pub measured_length: f64,
}

/// Divider walk: from the first vertex, repeatedly step to the earliest point
/// further along the curve at chord distance `yardstick`. The partial last
/// step is added as the straight-line remainder to the end point.
pub fn yardstick_walk(p: &Polyline, yardstick: f64) -> Result<Walk, MeasureError> {
    if !(yardstick.is_finite() && yardstick > 0.0) {
        return Err(MeasureError::Yardstick(yardstick));
    }
    let v = p.vertices();
    let nseg = v.len() - 1;
    // Current position: segment index and the point on it.
    let mut seg = 0usize;
    let mut pos = v[0];
    let mut steps = 0usize;

    'walk: loop {
        // Rest of the current segment; `pos` lies on it.
        let end = v[seg + 1];
        let rest = pos.distance(end);
        if rest >= yardstick * (1.0 - ON_CIRCLE) {
            pos = if math::abs(rest - yardstick) <= yardstick * ON_CIRCLE {
                end
            } else {
                pos.lerp(end, yardstick / rest)
            };
            steps += 1;
            continue;
        }
        // Later segments: the first one whose far end leaves the circle
        // holds the crossing; its near end is inside.
        for j in seg + 1..nseg {
            let (a, b) = (v[j], v[j + 1]);
            let db = pos.distance(b);
            if db < yardstick * (1.0 - ON_CIRCLE) {
                continue;
            }
            let next = if math::abs(db - yardstick) <= yardstick * ON_CIRCLE {
                b
            } else {
                a.lerp(b, exit_parameter(a, b, pos, yardstick))
            };
            seg = j;
            pos = next;
            steps += 1;
            continue 'walk;
        }
        break;
    }

    let remainder = pos.distance(v[nseg]);
    Ok(Walk {
        yardstick,
        steps,
        remainder,
        measured_length: steps as f64 * yardstick + remainder,
    })
}

/// Parameter in `[0, 1]` where segment `a -> b` leaves the circle of radius
/// `r` about `c`, given that `a` is inside.
fn exit_parameter(a: Point, b: Point, c: Point, r: f64) -> f64 {
    let d = b - a;
    let f = a - c;
    let qa = d.dot(d);
    let qb = 2.0 * f.dot(d);
    let qc = f.dot(f) - r * r;
    let s = math::sqrt((qb * qb - 4.0 * qa * qc).max(0.0));
    // qc < 0, so the roots have opposite signs and the positive one is the
    // exit. Pick the form without cancellation.
    let t = if qb > 0.0 {
        -2.0 * qc / (qb + s)
    } else {
        (s - qb) / (2.0 * qa)
    };
    t.clamp(0.0, 1.0)
}

/// Walks the curve at every scale.
pub fn divider_measurements(p: &Polyline, scales: &ScaleSeries) -> Result<Vec<Walk>, MeasureError> {
    scales.iter().map(|s| yardstick_walk(p, s)).collect()
}

/// Fits `ln L` against `ln eps` over `(yardstick, measured_length)` pairs;
/// the dimension is `1 - slope`.
pub fn divider_fit(points: &[(f64, f64)]) -> Result<LogLogFit, MeasureError> {
    if points.len() < 3 {
        return Err(MeasureError::TooFewPoints { needed: 3, got: points.len() });
    }
    let mut fit = loglog_fit(points)?;
    fit.dimension = 1.0 - fit.slope;
    Ok(fit)
}

/// Richardson-plot dimension of a curve from at least three yardsticks.
pub fn divider_dimension(p: &Polyline, scales: &ScaleSeries) -> Result<LogLogFit, MeasureError> {
    if scales.len() < 3 {
        return Err(MeasureError::TooFewPoints { needed: 3, got: scales.len() });
    }
    let walks = divider_measurements(p, scales)?;
    let pts: Vec<(f64, f64)> = walks.iter().map(|w| (w.yardstick, w.measured_length)).collect();
    divider_fit(&pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fractal::{koch_curve, KochSpec};
    use alloc::vec;

    fn line(len: f64) -> Polyline {
        Polyline::new(vec![Point::new(0.0, 0.0), Point::new(len, 0.0)]).unwrap()
    }

    #[test]
    fn straight_line() {
        let w = yardstick_walk(&line(10.0), 1.0).unwrap();
        assert_eq!(w.steps, 10);
        assert!((w.measured_length - 10.0).abs() < 1e-9);

        let w = yardstick_walk(&line(10.0), 100.0).unwrap();
        assert_eq!(w.steps, 0);
        assert_eq!(w.measured_length, 10.0);

        let w = yardstick_walk(&line(10.0), 3.0).unwrap();
        assert_eq!(w.steps, 3);
        assert!((w.remainder - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bent_line_chords() {
        // L-shape: 3 right then 4 up; chord 5 spans the corner exactly
        let p = Polyline::new(vec![
            Point::new(0.0, 0.0),
            Point::new(3.0, 0.0),
            Point::new(3.0, 4.0),
        ])
        .unwrap();
        let w = yardstick_walk(&p, 5.0).unwrap();
        assert_eq!(w.steps, 1);
        assert!(w.remainder < 1e-9);
    }

    #[test]
    fn koch_vertices_hit_exactly() {
        let c = koch_curve(&KochSpec::new(3)).unwrap();
        let w = yardstick_walk(&c, 1.0 / 27.0).unwrap();
        assert_eq!(w.steps, 64);
        assert!((w.measured_length - 64.0 / 27.0).abs() < 1e-9);
    }

    #[test]
    fn bad_yardstick() {
        assert_eq!(yardstick_walk(&line(1.0), 0.0), Err(MeasureError::Yardstick(0.0)));
        assert!(yardstick_walk(&line(1.0), f64::INFINITY).is_err());
    }

    #[test]
    fn straight_line_dimension() {
        let scales = ScaleSeries::new(vec![1.0, 0.5, 0.25]).unwrap();
        let fit = divider_dimension(&line(10.0), &scales).unwrap();
        assert!(fit.slope.abs() < 1e-9);
        assert!((fit.dimension - 1.0).abs() < 1e-9);
    }

    #[test]
    fn two_scales_rejected() {
        let scales = ScaleSeries::new(vec![1.0, 0.5]).unwrap();
        assert_eq!(
            divider_dimension(&line(10.0), &scales),
            Err(MeasureError::TooFewPoints { needed: 3, got: 2 })
        );
    }
}
