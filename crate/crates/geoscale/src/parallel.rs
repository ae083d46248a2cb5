//! Per-scale measurements run on the rayon pool. Each scale is computed
//! independently and results are collected in scale order, so the output is
//! identical to the sequential functions in `geoscale_core::fractal`.

use geoscale_core::fractal::{box_count, rasterized_area, yardstick_walk, MeasureError, ScaleSeries, Walk};
use geoscale_core::terrain::{coarsen, slope_grid, SlopeGrid, TerrainError};
use geoscale_core::{Geometry, Point, Polygon, Polyline, RasterGrid};
use rayon::prelude::*;

pub fn divider_measurements_par(p: &Polyline, scales: &ScaleSeries) -> Result<Vec<Walk>, MeasureError> {
    scales.as_slice().par_iter().map(|&s| yardstick_walk(p, s)).collect()
}

fn single(s: f64) -> ScaleSeries {
    ScaleSeries::new(vec![s]).expect("scale came from a valid series")
}

pub fn box_count_par(geom: &Geometry, sizes: &ScaleSeries, offset: Point) -> Vec<(f64, usize)> {
    sizes.as_slice().par_iter().map(|&s| box_count(geom, &single(s), offset)[0]).collect()
}

pub fn rasterized_area_par(poly: &Polygon, sizes: &ScaleSeries, offset: Point) -> Vec<(f64, f64)> {
    sizes.as_slice().par_iter().map(|&s| rasterized_area(poly, &single(s), offset)[0]).collect()
}

/// Slope of a DEM at one resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeLevel {
    /// 1 for the original grid.
    pub factor: usize,
    pub slope: SlopeGrid,
    pub dropped_cols: usize,
    pub dropped_rows: usize,
}

/// Slope at each factor in the given order; factor 1 is the grid itself.
pub fn slope_levels_par(dem: &RasterGrid, factors: &[usize]) -> Result<Vec<SlopeLevel>, TerrainError> {
    factors
        .par_iter()
        .map(|&factor| {
            if factor == 1 {
                return Ok(SlopeLevel { factor, slope: slope_grid(dem)?, dropped_cols: 0, dropped_rows: 0 });
            }
            let c = coarsen(dem, factor)?;
            Ok(SlopeLevel {
                factor,
                slope: slope_grid(&c.grid)?,
                dropped_cols: c.dropped_cols,
                dropped_rows: c.dropped_rows,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use geoscale_core::fractal::{divider_measurements as sequential, koch_curve, KochSpec};

    #[test]
    fn matches_sequential() {
        let k = koch_curve(&KochSpec::new(5)).unwrap();
        let scales = ScaleSeries::geometric(0.3, 0.5, 6).unwrap();
        assert_eq!(divider_measurements_par(&k, &scales).unwrap(), sequential(&k, &scales).unwrap());
        let g = Geometry::Line(k);
        assert_eq!(box_count_par(&g, &scales, Point::default()), box_count(&g, &scales, Point::default()));
    }

    #[test]
    fn slope_levels_in_order() {
        let dem = RasterGrid::from_fn(20, 18, Point::default(), 1.0, |p| 0.3 * p.x * p.x + p.y).unwrap();
        let levels = slope_levels_par(&dem, &[1, 4, 2]).unwrap();
        assert_eq!(levels.iter().map(|l| l.factor).collect::<Vec<_>>(), vec![1, 4, 2]);
        assert_eq!(levels[0].slope, slope_grid(&dem).unwrap());
        assert_eq!(levels[1].slope, slope_grid(&coarsen(&dem, 4).unwrap().grid).unwrap());
        assert_eq!((levels[1].dropped_cols, levels[1].dropped_rows), (0, 2));
    }
}
