//! Slope of elevation grids across resolutions.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use thiserror::Error;

use crate::geometry::{GeometryError, Point, RasterGrid, DEFAULT_NODATA};
use crate::math;

pub const DEFAULT_BIN_WIDTH: f64 = 1.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TerrainError {
    #[error("slope needs a grid of at least 3x3 cells, got {ncols}x{nrows}")]
    TooSmall { ncols: usize, nrows: usize },
    #[error("coarsening factor must be at least 2, got {0}")]
    Factor(usize),
    #[error("coarsening by {factor} leaves no cells of a {ncols}x{nrows} grid")]
    NothingLeft { factor: usize, ncols: usize, nrows: usize },
    #[error("bin width must be positive and finite, got {0}")]
    BinWidth(f64),
    #[error("size exponent must lie in 2..=12, got {0}")]
    SizeExponent(u32),
    #[error("roughness must lie strictly between 0 and 1, got {0}")]
    Roughness(f64),
    #[error("relief must be positive and finite, got {0}")]
    Relief(f64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Slope formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlopeMethod {
    /// Horn's 3x3 weighted finite differences.
    Horn,
}

impl SlopeMethod {
    pub fn name(&self) -> &'static str {
        match self {
            SlopeMethod::Horn => "horn",
        }
    }
}

/// Slope in degrees; border cells and cells next to no-data are no-data.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeGrid {
    pub grid: RasterGrid,
    pub method: SlopeMethod,
}

impl SlopeGrid {
    /// `(min, max)` over valid cells, `None` if every cell is no-data.
    pub fn range(&self) -> Option<(f64, f64)> {
        self.grid.valid_values().fold(None, |acc, v| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })
    }

    pub fn max(&self) -> Option<f64> {
        self.range().map(|r| r.1)
    }

    /// `max - min` over valid cells.
    pub fn range_width(&self) -> Option<f64> {
        self.range().map(|(lo, hi)| hi - lo)
    }
}

pub fn slope_grid(dem: &RasterGrid) -> Result<SlopeGrid, TerrainError> {
    let (nc, nr) = (dem.ncols, dem.nrows);
    if nc < 3 || nr < 3 {
        return Err(TerrainError::TooSmall { ncols: nc, nrows: nr });
    }
    let nodata = if dem.nodata.is_nan() { DEFAULT_NODATA } else { dem.nodata };
    let mut out = alloc::vec![nodata; nc * nr];
    let scale = 8.0 * dem.cell_size;
    for r in 1..nr - 1 {
        'cell: for c in 1..nc - 1 {
            let mut w = [0.0f64; 9];
            for dr in 0..3 {
                for dc in 0..3 {
                    match dem.valid(r + dr - 1, c + dc - 1) {
                        Some(v) => w[dr * 3 + dc] = v,
                        None => continue 'cell,
                    }
                }
            }
            // a b c / d e f / g h i with row 0 to the north
            let [a, b, cc, d, _, f, g, h, i] = w;
            let dzdx = ((cc + 2.0 * f + i) - (a + 2.0 * d + g)) / scale;
            let dzdy = ((a + 2.0 * b + cc) - (g + 2.0 * h + i)) / scale;
            out[r * nc + c] = math::to_degrees(math::atan(math::hypot(dzdx, dzdy)));
        }
    }
    let grid = RasterGrid::new(nc, nr, dem.origin, dem.cell_size, nodata, out)?;
    Ok(SlopeGrid { grid, method: SlopeMethod::Horn })
}

/// Output of [`coarsen`]: the grid plus how many trailing columns (east) and
/// rows (south) did not fill a whole block and were dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct Coarsened {
    pub grid: RasterGrid,
    pub dropped_cols: usize,
    pub dropped_rows: usize,
}

impl Coarsened {
    pub fn dropped_any(&self) -> bool {
        self.dropped_cols > 0 || self.dropped_rows > 0
    }
}

/// Block-mean resampling to `factor` times the cell size. Blocks average
/// their valid cells; all-no-data blocks stay no-data.
pub fn coarsen(dem: &RasterGrid, factor: usize) -> Result<Coarsened, TerrainError> {
    if factor < 2 {
        return Err(TerrainError::Factor(factor));
    }
    let (nc, nr) = (dem.ncols / factor, dem.nrows / factor);
    if nc == 0 || nr == 0 {
        return Err(TerrainError::NothingLeft { factor, ncols: dem.ncols, nrows: dem.nrows });
    }
    let dropped_cols = dem.ncols - nc * factor;
    let dropped_rows = dem.nrows - nr * factor;
    let mut values = Vec::with_capacity(nc * nr);
    for r in 0..nr {
        for c in 0..nc {
            let mut acc = Vec::with_capacity(factor * factor);
            for rr in r * factor..(r + 1) * factor {
                for cc in c * factor..(c + 1) * factor {
                    if let Some(v) = dem.valid(rr, cc) {
                        acc.push(v);
                    }
                }
            }
            values.push(if acc.is_empty() {
                dem.nodata
            } else {
                math::sum(acc.iter().copied()) / acc.len() as f64
            });
        }
    }
    // Dropped rows are at the bottom, so the lower-left corner moves up.
    let origin = Point::new(dem.origin.x, dem.origin.y + dropped_rows as f64 * dem.cell_size);
    let grid = RasterGrid::new(nc, nr, origin, dem.cell_size * factor as f64, dem.nodata, values)?;
    Ok(Coarsened { grid, dropped_cols, dropped_rows })
}

/// Area per slope class.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeHistogram {
    pub bin_width: f64,
    /// `(lower_edge, area)` for every class from 0 up to the steepest
    /// occupied one, including empty classes in between.
    pub bins: Vec<(f64, f64)>,
}

impl SlopeHistogram {
    pub fn total_area(&self) -> f64 {
        math::sum(self.bins.iter().map(|b| b.1))
    }
}

/// Absorbs rounding for slopes that sit on a bin edge (in bin units).
const BIN_SNAP: f64 = 1e-9;

pub fn slope_histogram(s: &SlopeGrid, bin_width: f64) -> Result<SlopeHistogram, TerrainError> {
    if !(bin_width.is_finite() && bin_width > 0.0) {
        return Err(TerrainError::BinWidth(bin_width));
    }
    let mut counts: Vec<usize> = Vec::new();
    for v in s.grid.valid_values() {
        let k = math::floor(v / bin_width + BIN_SNAP).max(0.0) as usize;
        if k >= counts.len() {
            counts.resize(k + 1, 0);
        }
        counts[k] += 1;
    }
    let cell_area = s.grid.cell_size * s.grid.cell_size;
    let bins = counts
        .iter()
        .enumerate()
        .map(|(k, n)| (k as f64 * bin_width, *n as f64 * cell_area))
        .collect();
    Ok(SlopeHistogram { bin_width, bins })
}

/// Parameters of a diamond-square surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceSpec {
    /// Grid side is `2^size_exponent + 1`.
    pub size_exponent: u32,
    /// Hurst-like roughness in (0, 1); displacement amplitude is divided by
    /// `2^roughness` at every level.
    pub roughness: f64,
    pub seed: u64,
    /// Displacement amplitude of the first (coarsest) level, in elevation
    /// units. Defaults to `2^size_exponent / 16`.
    pub relief: f64,
    pub cell_size: f64,
}

impl SurfaceSpec {
    pub fn new(size_exponent: u32, roughness: f64, seed: u64) -> Self {
        SurfaceSpec {
            size_exponent,
            roughness,
            seed,
            relief: (1u64 << size_exponent.min(62)) as f64 / 16.0,
            cell_size: 1.0,
        }
    }
}

/// Uniform draw in `[-1, 1)` from the top 53 bits.
fn signed_unit(rng: &mut ChaCha8Rng) -> f64 {
    let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    2.0 * u - 1.0
}

/// Diamond-square midpoint displacement seeded with ChaCha8 (`seed_from_u64`).
/// Draw order is fixed: four corners, then per level the diamond centers and
/// the square midpoints in row-major order.
pub fn synthetic_fractal_surface(spec: &SurfaceSpec) -> Result<RasterGrid, TerrainError> {
    let k = spec.size_exponent;
    if !(2..=12).contains(&k) {
        return Err(TerrainError::SizeExponent(k));
    }
    let h = spec.roughness;
    if !(h > 0.0 && h < 1.0) {
        return Err(TerrainError::Roughness(h));
    }
    if !(spec.relief.is_finite() && spec.relief > 0.0) {
        return Err(TerrainError::Relief(spec.relief));
    }
    let n = (1usize << k) + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut z = alloc::vec![0.0f64; n * n];
    let idx = |r: usize, c: usize| r * n + c;
    let last = n - 1;
    for &(r, c) in &[(0, 0), (0, last), (last, 0), (last, last)] {
        z[idx(r, c)] = spec.relief * signed_unit(&mut rng);
    }

    let decay = math::powf(2.0, -h);
    let mut amp = spec.relief;
    let mut step = n - 1;
    while step > 1 {
        let half = step / 2;
        amp *= decay;
        // diamond: square centers
        for r in (half..n).step_by(step) {
            for c in (half..n).step_by(step) {
                let mean = (z[idx(r - half, c - half)]
                    + z[idx(r - half, c + half)]
                    + z[idx(r + half, c - half)]
                    + z[idx(r + half, c + half)])
                    / 4.0;
                z[idx(r, c)] = mean + amp * signed_unit(&mut rng);
            }
        }
        // square: edge midpoints, averaging the 3 or 4 available neighbours
        for r in (0..n).step_by(half) {
            let start = if (r / half).is_multiple_of(2) { half } else { 0 };
            for c in (start..n).step_by(step) {
                let mut total = 0.0;
                let mut count = 0.0;
                if r >= half {
                    total += z[idx(r - half, c)];
                    count += 1.0;
                }
                if r + half < n {
                    total += z[idx(r + half, c)];
                    count += 1.0;
                }
                if c >= half {
                    total += z[idx(r, c - half)];
                    count += 1.0;
                }
                if c + half < n {
                    total += z[idx(r, c + half)];
                    count += 1.0;
                }
                z[idx(r, c)] = total / count + amp * signed_unit(&mut rng);
            }
        }
        step = half;
    }
    Ok(RasterGrid::new(n, n, Point::default(), spec.cell_size, DEFAULT_NODATA, z)?)
}
