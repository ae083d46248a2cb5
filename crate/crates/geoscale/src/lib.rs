//! File formats, SVG plots and the `geoscale` command-line tool built on
//! [`geoscale_core`].
//!
//! * [`features`]: GeoJSON input (LineString, MultiLineString, Polygon) and
//!   FeatureCollection output for streets, blocks and cities.
//! * [`ascii_grid`]: Esri ASCII grid reading and writing.
//! * [`series`]: value series, MAUP cell and zoning CSV files, CSV output.
//! * [`plot`]: deterministic SVG plots on a fixed 800x600 canvas.
//! * [`config`]: `key=value` configuration files.
//! * [`parallel`]: per-scale measurements spread over a thread pool.
//! * [`cli`]: argument handling and the subcommands.

pub mod ascii_grid;
pub mod cli;
pub mod config;
pub mod features;
pub mod parallel;
pub mod plot;
pub mod series;
