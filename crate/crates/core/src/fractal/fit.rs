use super::MeasureError;
use crate::math;

/// Least-squares line through `(ln x, ln y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Fractal dimension under the producing operation's convention:
    /// `slope` for a plain fit, `1 - slope` for divider walks and `-slope`
    /// for box counts.
    pub dimension: f64,
}

impl LogLogFit {
    /// Fitted `y` at `x` in the original (non-log) units.
    pub fn predict(&self, x: f64) -> f64 {
        math::exp(self.intercept + self.slope * math::ln(x))
    }
}

/// Ordinary least squares on natural logarithms of both coordinates.
pub fn loglog_fit(points: &[(f64, f64)]) -> Result<LogLogFit, MeasureError> {
    if points.len() < 2 {
        return Err(MeasureError::TooFewPoints { needed: 2, got: points.len() });
    }
    if let Some(&(x, y)) = points
        .iter()
        .find(|(x, y)| !(x.is_finite() && y.is_finite() && *x > 0.0 && *y > 0.0))
    {
        return Err(MeasureError::NonPositive(x, y));
    }
    let n = points.len() as f64;
    let lx = |p: &(f64, f64)| math::ln(p.0);
    let ly = |p: &(f64, f64)| math::ln(p.1);
    let mx = math::sum(points.iter().map(lx)) / n;
    let my = math::sum(points.iter().map(ly)) / n;
    let sxx = math::sum(points.iter().map(|p| (lx(p) - mx) * (lx(p) - mx)));
    let sxy = math::sum(points.iter().map(|p| (lx(p) - mx) * (ly(p) - my)));
    let syy = math::sum(points.iter().map(|p| (ly(p) - my) * (ly(p) - my)));
    if sxx <= 0.0 {
        return Err(MeasureError::ZeroVariance);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res = math::sum(points.iter().map(|p| {
        let r = ly(p) - (intercept + slope * lx(p));
        r * r
    }));
    // A constant response is fitted exactly by a flat line.
    let r_squared = if syy <= 0.0 { 1.0 } else { (1.0 - ss_res / syy).clamp(0.0, 1.0) };
    Ok(LogLogFit { slope, intercept, r_squared, dimension: slope })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let f = loglog_fit(&[(1.0, 1.0), (10.0, 100.0)]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!(f.intercept.abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        assert!((f.predict(3.0) - 9.0).abs() < 1e-9);
    }

    #[test]
    fn flat() {
        let f = loglog_fit(&[(1.0, 3.0), (10.0, 3.0), (100.0, 3.0)]).unwrap();
        assert!(f.slope.abs() < 1e-12);
        assert_eq!(f.r_squared, 1.0);
    }

    #[test]
    fn errors() {
        assert_eq!(loglog_fit(&[(1.0, 1.0), (1.0, 2.0)]), Err(MeasureError::ZeroVariance));
        assert_eq!(loglog_fit(&[(1.0, 1.0), (0.0, 2.0)]), Err(MeasureError::NonPositive(0.0, 2.0)));
        assert!(matches!(loglog_fit(&[(1.0, 1.0)]), Err(MeasureError::TooFewPoints { .. })));
    }
}
