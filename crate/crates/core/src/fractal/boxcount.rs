use alloc::vec::Vec;

use super::fit::{loglog_fit, LogLogFit};
use super::{MeasureError, ScaleSeries};
use crate::geometry::{BBox, Geometry, Point, Polygon};
use crate::math;

/// Absorbs rounding when a coordinate sits on a grid line (in cell units).
const GRID_SNAP: f64 = 1e-9;

/// Square cells of side `size` covering a bounding box.
///
/// Cells are closed on their low edges and open on their high edges, except
/// that the grid's own far edges are closed so the bounding box is covered
/// by exactly `ncols x nrows` cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellGrid {
    pub origin: Point,
    pub size: f64,
    pub ncols: usize,
    pub nrows: usize,
}

impl CellGrid {
    /// Grid anchored at `bbox.min - offset`. Offsets are reduced modulo the
    /// cell size.
    pub fn covering(bbox: BBox, size: f64, offset: Point) -> CellGrid {
        let wrap = |o: f64| {
            let r = math::fmod(o, size);
            if r < 0.0 {
                r + size
            } else {
                r
            }
        };
        let origin = Point::new(bbox.min.x - wrap(offset.x), bbox.min.y - wrap(offset.y));
        let needed = |extent: f64| (math::ceil(extent / size - GRID_SNAP) as usize).max(1);
        CellGrid {
            origin,
            size,
            ncols: needed(bbox.max.x - origin.x),
            nrows: needed(bbox.max.y - origin.y),
        }
    }

    fn raw_index(&self, v: f64, o: f64) -> f64 {
        math::floor((v - o) / self.size + GRID_SNAP)
    }

    pub fn col(&self, x: f64) -> usize {
        clamp_index(self.raw_index(x, self.origin.x), self.ncols)
    }

    pub fn row(&self, y: f64) -> usize {
        clamp_index(self.raw_index(y, self.origin.y), self.nrows)
    }

    /// `(row, col)` of the cell holding `p`; row 0 is the southernmost.
    pub fn cell(&self, p: Point) -> (usize, usize) {
        (self.row(p.y), self.col(p.x))
    }

    pub fn cell_count(&self) -> usize {
        self.ncols * self.nrows
    }

    /// Cells touched by the closed segment `a-b`.
    fn segment_cells(&self, a: Point, b: Point, out: &mut Vec<(usize, usize)>) {
        let mut ts: Vec<f64> = alloc::vec![0.0, 1.0];
        let mut crossings = |a0: f64, b0: f64, o: f64| {
            if a0 == b0 {
                return;
            }
            let lo = self.raw_index(a0.min(b0), o) + 1.0;
            let hi = self.raw_index(a0.max(b0), o);
            let mut k = lo;
            while k <= hi {
                let t = (o + k * self.size - a0) / (b0 - a0);
                if t > 0.0 && t < 1.0 {
                    ts.push(t);
                }
                k += 1.0;
            }
        };
        crossings(a.x, b.x, self.origin.x);
        crossings(a.y, b.y, self.origin.y);
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        for (i, &t) in ts.iter().enumerate() {
            out.push(self.cell(a.lerp(b, t)));
            if let Some(&t1) = ts.get(i + 1) {
                out.push(self.cell(a.lerp(b, 0.5 * (t + t1))));
            }
        }
    }
}

fn clamp_index(raw: f64, n: usize) -> usize {
    if raw <= 0.0 {
        0
    } else {
        (raw as usize).min(n - 1)
    }
}

/// Sorted, de-duplicated cells touched by the boundary of `geom`.
fn boundary_cells(geom: &Geometry, grid: &CellGrid) -> Vec<(usize, usize)> {
    let mut cells = Vec::new();
    match geom {
        Geometry::Line(l) => {
            for (a, b) in l.segments() {
                grid.segment_cells(a, b, &mut cells);
            }
        }
        Geometry::Area(p) => {
            for ring in p.rings() {
                for w in ring.windows(2) {
                    grid.segment_cells(w[0], w[1], &mut cells);
                }
            }
        }
    }
    cells.sort_unstable();
    cells.dedup();
    cells
}

/// Number of cells of `grid` that intersect `geom` (the filled region for
/// polygons).
pub fn covered_cells(geom: &Geometry, grid: &CellGrid) -> usize {
    let boundary = boundary_cells(geom, grid);
    match geom {
        Geometry::Line(_) => boundary.len(),
        Geometry::Area(p) => boundary.len() + interior_only_cells(p, grid, &boundary),
    }
}

/// Cells whose center lies inside `poly` and that the boundary does not
/// touch; such cells lie entirely inside.
fn interior_only_cells(poly: &Polygon, grid: &CellGrid, boundary: &[(usize, usize)]) -> usize {
    let mut total = 0usize;
    let mut xs: Vec<f64> = Vec::new();
    for row in 0..grid.nrows {
        let yc = grid.origin.y + (row as f64 + 0.5) * grid.size;
        xs.clear();
        for ring in poly.rings() {
            for w in ring.windows(2) {
                let (p, q) = (w[0], w[1]);
                if (p.y > yc) != (q.y > yc) {
                    xs.push(p.x + (yc - p.y) * (q.x - p.x) / (q.y - p.y));
                }
            }
        }
        xs.sort_by(f64::total_cmp);
        let lo = boundary.partition_point(|c| c.0 < row);
        let hi = boundary.partition_point(|c| c.0 <= row);
        let row_boundary = &boundary[lo..hi];
        for pair in xs.chunks_exact(2) {
            let first = math::ceil((pair[0] - grid.origin.x) / grid.size - 0.5);
            let last = math::floor((pair[1] - grid.origin.x) / grid.size - 0.5);
            if last < first || last < 0.0 {
                continue;
            }
            let first = first.max(0.0) as usize;
            let last = (last as usize).min(grid.ncols - 1);
            if first > last {
                continue;
            }
            let a = row_boundary.partition_point(|c| c.1 < first);
            let b = row_boundary.partition_point(|c| c.1 <= last);
            total += (last - first + 1) - (b - a);
        }
    }
    total
}

/// Occupied-box counts at each size, with the grid anchored at the
/// geometry's bounding-box lower-left corner shifted by `offset`.
pub fn box_count(geom: &Geometry, sizes: &ScaleSeries, offset: Point) -> Vec<(f64, usize)> {
    let bbox = geom.bbox();
    sizes
        .iter()
        .map(|s| (s, covered_cells(geom, &CellGrid::covering(bbox, s, offset))))
        .collect()
}

/// Box-counting dimension `-slope` of `ln N` against `ln size`.
pub fn boxcount_dimension(counts: &[(f64, usize)]) -> Result<LogLogFit, MeasureError> {
    let mut sizes: Vec<f64> = counts.iter().map(|c| c.0).collect();
    sizes.sort_by(f64::total_cmp);
    sizes.dedup();
    if sizes.len() < 3 {
        return Err(MeasureError::TooFewPoints { needed: 3, got: sizes.len() });
    }
    if counts.iter().any(|c| c.1 == 0) {
        return Err(MeasureError::EmptyBox);
    }
    let pts: Vec<(f64, f64)> = counts.iter().map(|&(s, n)| (s, n as f64)).collect();
    let mut fit = loglog_fit(&pts)?;
    fit.dimension = -fit.slope;
    Ok(fit)
}

/// Area of the cells touching the filled polygon, per cell size.
pub fn rasterized_area(poly: &Polygon, cell_sizes: &ScaleSeries, offset: Point) -> Vec<(f64, f64)> {
    let geom = Geometry::Area(poly.clone());
    let bbox = poly.bbox();
    cell_sizes
        .iter()
        .map(|s| {
            let n = covered_cells(&geom, &CellGrid::covering(bbox, s, offset));
            (s, n as f64 * s * s)
        })
        .collect()
}
