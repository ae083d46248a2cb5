//! Scale-dependence and scaling analysis for geographic features.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only pure
//! computation. File formats, plotting and the command-line front end live in
//! the `geoscale` crate.
//!
//! Modules:
//!
//! * [`geometry`]: planar points, polylines, polygons and raster grids.
//! * [`scaling`]: head/tail breaks, ht-index, Zipf series, rank-size tables.
//! * [`fractal`]: Koch curves, divider (yardstick) walks, box counting,
//!   rasterized area and log-log regression.
//! * [`terrain`]: Horn slope, block-mean coarsening, slope histograms and a
//!   seeded diamond-square surface generator.
//! * [`maup`]: zone aggregation of count grids and the scale/zoning effects.
//! * [`street`]: planar street arrangements, natural streets, connectivity
//!   graphs, street blocks, border numbers and natural cities.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod fractal;
pub mod geometry;
pub mod maup;
pub mod scaling;
pub mod street;
pub mod terrain;

mod math;

pub use geometry::{BBox, Geometry, GeometryError, Point, Polygon, Polyline, RasterGrid};
pub use scaling::{HeadTailPartition, ScalingError, ValueSeries};
