//! Planar geometry primitives.
//!
//! Coordinates are planar Cartesian in arbitrary length units. Longitude and
//! latitude are accepted as plain numbers; project them first if metric
//! results are wanted.

use alloc::vec::Vec;
use core::ops::{Add, Mul, Sub};

use thiserror::Error;

use crate::math;

/// Relative factor applied to a bounding-box diagonal to obtain the default
/// snap tolerance.
pub const DEFAULT_SNAP_FACTOR: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("non-finite coordinate at vertex {0}")]
    NonFinite(usize),
    #[error("polyline needs at least 2 distinct vertices, got {0}")]
    TooFewVertices(usize),
    #[error("vertices {0} and {1} coincide")]
    DuplicateVertex(usize, usize),
    #[error("polyline has zero length")]
    ZeroLength,
    #[error("ring needs at least 3 distinct vertices, got {0}")]
    RingTooShort(usize),
    #[error("degenerate ring: zero area")]
    DegenerateRing,
    #[error("ring is self-intersecting (edges {0} and {1})")]
    SelfIntersecting(usize, usize),
    #[error("raster has {actual} values, expected {expected}")]
    RasterShape { expected: usize, actual: usize },
    #[error("raster must have at least one row and one column")]
    EmptyRaster,
    #[error("cell size must be positive and finite, got {0}")]
    CellSize(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(self, other: Point) -> f64 {
        math::hypot(self.x - other.x, self.y - other.y)
    }

    pub fn norm(self) -> f64 {
        math::hypot(self.x, self.y)
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    /// Rotates counterclockwise about the origin by `radians`.
    pub fn rotate(self, radians: f64) -> Point {
        let (s, c) = (math::sin(radians), math::cos(radians));
        Point::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn lerp(self, other: Point, t: f64) -> Point {
        Point::new(
            self.x + (other.x - self.x) * t,
            self.y + (other.y - self.y) * t,
        )
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub min: Point,
    pub max: Point,
}

impl BBox {
    /// Bounding box of a point set; `None` when empty.
    pub fn of<'a>(points: impl IntoIterator<Item = &'a Point>) -> Option<BBox> {
        let mut it = points.into_iter();
        let first = *it.next()?;
        let mut bb = BBox { min: first, max: first };
        for p in it {
            bb.include(*p);
        }
        Some(bb)
    }

    pub fn include(&mut self, p: Point) {
        self.min.x = self.min.x.min(p.x);
        self.min.y = self.min.y.min(p.y);
        self.max.x = self.max.x.max(p.x);
        self.max.y = self.max.y.max(p.y);
    }

    pub fn union(self, other: BBox) -> BBox {
        let mut bb = self;
        bb.include(other.min);
        bb.include(other.max);
        bb
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn diagonal(&self) -> f64 {
        self.min.distance(self.max)
    }

    /// Default snap tolerance for geometry inside this box.
    pub fn snap_tolerance(&self) -> f64 {
        let d = self.diagonal();
        if d > 0.0 {
            d * DEFAULT_SNAP_FACTOR
        } else {
            DEFAULT_SNAP_FACTOR
        }
    }
}

/// An open planar curve of at least two vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    vertices: Vec<Point>,
}

impl Polyline {
    /// Validates `vertices`. Consecutive vertices closer than the default snap
    /// tolerance are rejected; use [`Polyline::cleaned`] to drop them instead.
    pub fn new(vertices: Vec<Point>) -> Result<Self, GeometryError> {
        check_finite(&vertices)?;
        if vertices.len() < 2 {
            return Err(GeometryError::TooFewVertices(vertices.len()));
        }
        let tol = BBox::of(&vertices).map(|b| b.snap_tolerance()).unwrap_or(0.0);
        for i in 1..vertices.len() {
            if vertices[i - 1].distance(vertices[i]) <= tol && tol > 0.0 {
                return Err(GeometryError::DuplicateVertex(i - 1, i));
            }
            if vertices[i - 1] == vertices[i] {
                return Err(GeometryError::DuplicateVertex(i - 1, i));
            }
        }
        let line = Polyline { vertices };
        if line.length() <= 0.0 {
            return Err(GeometryError::ZeroLength);
        }
        Ok(line)
    }

    /// Drops consecutive near-duplicate vertices, then validates.
    pub fn cleaned(vertices: Vec<Point>) -> Result<Self, GeometryError> {
        check_finite(&vertices)?;
        let tol = BBox::of(&vertices).map(|b| b.snap_tolerance()).unwrap_or(0.0);
        let mut kept: Vec<Point> = Vec::with_capacity(vertices.len());
        for p in vertices {
            match kept.last() {
                Some(q) if q.distance(p) <= tol => {}
                _ => kept.push(p),
            }
        }
        if kept.len() < 2 {
            return Err(GeometryError::TooFewVertices(kept.len()));
        }
        Polyline::new(kept)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn into_vertices(self) -> Vec<Point> {
        self.vertices
    }

    pub fn first(&self) -> Point {
        self.vertices[0]
    }

    pub fn last(&self) -> Point {
        self.vertices[self.vertices.len() - 1]
    }

    pub fn segment_count(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn segments(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        self.vertices.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn length(&self) -> f64 {
        polyline_length(self)
    }

    pub fn bbox(&self) -> BBox {
        BBox::of(&self.vertices).expect("polyline has vertices")
    }

    /// Applies `f` to every vertex; fails if the image is degenerate.
    pub fn map_points(&self, f: impl Fn(Point) -> Point) -> Result<Polyline, GeometryError> {
        Polyline::new(self.vertices.iter().map(|p| f(*p)).collect())
    }
}

/// Sum of Euclidean distances between consecutive vertices.
pub fn polyline_length(p: &Polyline) -> f64 {
    math::sum(p.segments().map(|(a, b)| a.distance(b)))
}

/// A polygon with a counterclockwise exterior ring and clockwise holes.
/// Rings are stored closed (first vertex repeated at the end).
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    exterior: Vec<Point>,
    holes: Vec<Vec<Point>>,
}

impl Polygon {
    /// Builds a polygon, closing rings if needed and normalizing orientation.
    pub fn new(exterior: Vec<Point>, holes: Vec<Vec<Point>>) -> Result<Self, GeometryError> {
        let exterior = normalize_ring(exterior, true)?;
        let holes = holes
            .into_iter()
            .map(|h| normalize_ring(h, false))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Polygon { exterior, holes })
    }

    /// Axis-aligned rectangle.
    pub fn rectangle(min: Point, max: Point) -> Result<Self, GeometryError> {
        Polygon::new(
            alloc::vec![
                min,
                Point::new(max.x, min.y),
                max,
                Point::new(min.x, max.y)
            ],
            Vec::new(),
        )
    }

    pub fn exterior(&self) -> &[Point] {
        &self.exterior
    }

    pub fn holes(&self) -> &[Vec<Point>] {
        &self.holes
    }

    pub fn rings(&self) -> impl Iterator<Item = &[Point]> {
        core::iter::once(self.exterior.as_slice()).chain(self.holes.iter().map(|h| h.as_slice()))
    }

    pub fn area(&self) -> f64 {
        polygon_area(self)
    }

    pub fn bbox(&self) -> BBox {
        BBox::of(&self.exterior).expect("ring has vertices")
    }

    pub fn map_points(&self, f: impl Fn(Point) -> Point) -> Result<Polygon, GeometryError> {
        Polygon::new(
            self.exterior.iter().map(|p| f(*p)).collect(),
            self.holes
                .iter()
                .map(|h| h.iter().map(|p| f(*p)).collect())
                .collect(),
        )
    }
}

/// Exterior shoelace area minus hole areas.
pub fn polygon_area(poly: &Polygon) -> f64 {
    let outer = math::abs(ring_signed_area(&poly.exterior));
    let holes = math::sum(poly.holes.iter().map(|h| math::abs(ring_signed_area(h))));
    outer - holes
}

/// Shoelace signed area; positive for counterclockwise rings. Works on closed
/// or open vertex lists.
pub fn ring_signed_area(ring: &[Point]) -> f64 {
    if ring.len() < 3 {
        return 0.0;
    }
    // Shift to the first vertex to limit cancellation on large coordinates.
    let o = ring[0];
    let n = ring.len();
    let terms = (0..n).map(|i| {
        let a = ring[i] - o;
        let b = ring[(i + 1) % n] - o;
        a.cross(b)
    });
    0.5 * math::sum(terms)
}

fn check_finite(points: &[Point]) -> Result<(), GeometryError> {
    match points.iter().position(|p| !p.is_finite()) {
        Some(i) => Err(GeometryError::NonFinite(i)),
        None => Ok(()),
    }
}

fn normalize_ring(mut ring: Vec<Point>, ccw: bool) -> Result<Vec<Point>, GeometryError> {
    check_finite(&ring)?;
    if ring.len() >= 2 && ring.first() == ring.last() {
        ring.pop();
    }
    ring.dedup();
    while ring.len() >= 2 && ring.first() == ring.last() {
        ring.pop();
    }
    if ring.len() < 3 {
        return Err(GeometryError::RingTooShort(ring.len()));
    }
    if let Some((i, j)) = find_self_intersection(&ring) {
        return Err(GeometryError::SelfIntersecting(i, j));
    }
    let area = ring_signed_area(&ring);
    if area == 0.0 || !area.is_finite() {
        return Err(GeometryError::DegenerateRing);
    }
    if (area > 0.0) != ccw {
        ring.reverse();
    }
    ring.push(ring[0]);
    Ok(ring)
}

/// Finds a pair of non-adjacent edges of an open ring that touch or cross.
fn find_self_intersection(ring: &[Point]) -> Option<(usize, usize)> {
    let n = ring.len();
    let edge = |i: usize| (ring[i], ring[(i + 1) % n]);
    let mut order: Vec<usize> = (0..n).collect();
    let min_x = |i: usize| {
        let (a, b) = edge(i);
        a.x.min(b.x)
    };
    order.sort_by(|&a, &b| min_x(a).total_cmp(&min_x(b)));
    for (k, &i) in order.iter().enumerate() {
        let (a0, a1) = edge(i);
        let max_x = a0.x.max(a1.x);
        for &j in &order[k + 1..] {
            if min_x(j) > max_x {
                break;
            }
            let adjacent = (i + 1) % n == j || (j + 1) % n == i;
            if adjacent {
                // Adjacent edges may only share their common vertex; a
                // collinear fold-back is still an intersection.
                let (b0, b1) = edge(j);
                let folded = orient(a0, a1, b0) == 0.0
                    && orient(a0, a1, b1) == 0.0
                    && (a1 - a0).dot(b1 - b0) < 0.0
                    && n > 3;
                if folded {
                    return Some((i.min(j), i.max(j)));
                }
                continue;
            }
            let (b0, b1) = edge(j);
            if segments_touch(a0, a1, b0, b1) {
                return Some((i.min(j), i.max(j)));
            }
        }
    }
    None
}

pub(crate) fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed-segment intersection test (touching counts).
pub(crate) fn segments_touch(a0: Point, a1: Point, b0: Point, b1: Point) -> bool {
    let d1 = orient(b0, b1, a0);
    let d2 = orient(b0, b1, a1);
    let d3 = orient(a0, a1, b0);
    let d4 = orient(a0, a1, b1);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(b0, b1, a0))
        || (d2 == 0.0 && on_segment(b0, b1, a1))
        || (d3 == 0.0 && on_segment(a0, a1, b0))
        || (d4 == 0.0 && on_segment(a0, a1, b1))
}

/// A measured shape: an open curve or a filled polygon.
#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    Line(Polyline),
    Area(Polygon),
}

impl Geometry {
    pub fn bbox(&self) -> BBox {
        match self {
            Geometry::Line(l) => l.bbox(),
            Geometry::Area(p) => p.bbox(),
        }
    }
}

impl From<Polyline> for Geometry {
    fn from(p: Polyline) -> Self {
        Geometry::Line(p)
    }
}

impl From<Polygon> for Geometry {
    fn from(p: Polygon) -> Self {
        Geometry::Area(p)
    }
}

/// Default no-data sentinel for grids that do not declare one.
pub const DEFAULT_NODATA: f64 = -9999.0;

/// A regular grid of values.
///
/// `values` are row-major with row 0 the northernmost row, the same order as
/// an Esri ASCII grid body. `origin` is the lower-left corner of the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterGrid {
    pub ncols: usize,
    pub nrows: usize,
    pub origin: Point,
    pub cell_size: f64,
    pub nodata: f64,
    pub values: Vec<f64>,
}

impl RasterGrid {
    pub fn new(
        ncols: usize,
        nrows: usize,
        origin: Point,
        cell_size: f64,
        nodata: f64,
        values: Vec<f64>,
    ) -> Result<Self, GeometryError> {
        if ncols == 0 || nrows == 0 {
            return Err(GeometryError::EmptyRaster);
        }
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(GeometryError::CellSize(cell_size));
        }
        if !origin.is_finite() {
            return Err(GeometryError::NonFinite(0));
        }
        let expected = ncols * nrows;
        if values.len() != expected {
            return Err(GeometryError::RasterShape { expected, actual: values.len() });
        }
        Ok(RasterGrid { ncols, nrows, origin, cell_size, nodata, values })
    }

    /// Grid filled by evaluating `f` at every cell center.
    pub fn from_fn(
        ncols: usize,
        nrows: usize,
        origin: Point,
        cell_size: f64,
        f: impl Fn(Point) -> f64,
    ) -> Result<Self, GeometryError> {
        let mut values = Vec::with_capacity(ncols * nrows);
        for row in 0..nrows {
            for col in 0..ncols {
                values.push(f(cell_center(origin, cell_size, nrows, row, col)));
            }
        }
        RasterGrid::new(ncols, nrows, origin, cell_size, DEFAULT_NODATA, values)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.ncols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: f64) {
        self.values[row * self.ncols + col] = v;
    }

    #[inline]
    pub fn is_nodata(&self, v: f64) -> bool {
        v == self.nodata || v.is_nan()
    }

    /// Value at (row, col) unless it is no-data.
    pub fn valid(&self, row: usize, col: usize) -> Option<f64> {
        let v = self.get(row, col);
        (!self.is_nodata(v)).then_some(v)
    }

    pub fn cell_center(&self, row: usize, col: usize) -> Point {
        cell_center(self.origin, self.cell_size, self.nrows, row, col)
    }

    pub fn valid_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().copied().filter(|v| !self.is_nodata(*v))
    }

    pub fn valid_count(&self) -> usize {
        self.valid_values().count()
    }
}

fn cell_center(origin: Point, cell: f64, nrows: usize, row: usize, col: usize) -> Point {
    Point::new(
        origin.x + (col as f64 + 0.5) * cell,
        origin.y + ((nrows - 1 - row) as f64 + 0.5) * cell,
    )
}
