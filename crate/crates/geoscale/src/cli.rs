//! The `geoscale` command line.
//!
//! Exit codes: 0 success, 2 bad usage or unreadable input, 3 numerical
//! failure (too few scales for a fit, a topology check that fails, ...).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Display;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use geoscale_core::fractal::{
    boxcount_dimension, divider_fit, koch_curve, KochSpec, LogLogFit, MeasureError, ScaleSeries,
};
use geoscale_core::maup::{
    aggregate_rates, check_nesting, demo, scale_effect_table, zoning_effect_spread, CountGrid,
    LevelSummary, MaupError, ZoneRate, Zoning,
};
use geoscale_core::scaling::{head_tail_breaks, rank_size_table, ScalingError, DEFAULT_HEAD_LIMIT};
use geoscale_core::street::{
    border_numbers, build_arrangement, city_hotspots, connectivity_graph, default_snap_tolerance,
    extract_blocks, natural_cities, topological_center, trace_natural_streets, Block, JoinStrategy,
    PlanarArrangement, TopologyError, DEFAULT_ANGLE_THRESHOLD,
};
use geoscale_core::terrain::{
    slope_histogram, synthetic_fractal_surface, SurfaceSpec, TerrainError, DEFAULT_BIN_WIDTH,
};
use geoscale_core::{Geometry, Point, Polygon, Polyline, RasterGrid, ValueSeries};
use serde_json::{json, Value};

use crate::ascii_grid::{parse_ascii_grid, write_ascii_grid, GridError};
use crate::config::{Config, ConfigError};
use crate::features::{self, parse_geojson, street_segments, FeatureError};
use crate::parallel;
use crate::plot::{self, PlotError, PlotSpec};
use crate::series::{self, SeriesError};

/// Default number of yardsticks, cell sizes and box sizes when none are given.
pub const DEFAULT_SCALE_COUNT: usize = 7;
pub const DEFAULT_KOCH_ITERATIONS: u32 = 3;
pub const DEFAULT_ROUGHNESS: f64 = 0.5;
pub const DEFAULT_SEED: u64 = 1;

/// Comma-separated list, as in `--yardsticks 0.5,0.25,0.125`.
#[derive(Debug, Clone, PartialEq)]
pub struct List<T>(pub Vec<T>);

impl<T: FromStr> FromStr for List<T> {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(',')
            .map(|p| p.trim().parse().map_err(|_| format!("bad list item '{}'", p.trim())))
            .collect::<Result<Vec<T>, String>>()
            .map(List)
    }
}

/// `dx,dy`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Offset(pub Point);

impl FromStr for Offset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let List(v) = s.parse::<List<f64>>()?;
        match v.as_slice() {
            [x, y] => Ok(Offset(Point::new(*x, *y))),
            _ => Err(format!("expected dx,dy, got '{s}'")),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "geoscale", version, about = "Scale-dependence and scaling analysis of geographic features")]
#[command(after_help = "Coordinates are planar; project longitude/latitude data before use.")]
struct Cli {
    /// key=value file supplying defaults for any flag (flags win)
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Log progress to stderr
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a Koch curve
    Koch(KochArgs),
    /// Measure a curve with several yardsticks
    Length(LengthArgs),
    /// Fractal dimension by the divider or box-counting method
    Dimension(DimensionArgs),
    /// Polygon area measured by counting cells of several sizes
    Area(AreaArgs),
    /// Head/tail breaks classification of a value series
    Htb(HtbArgs),
    /// ht-index of a value series
    Htindex(HtindexArgs),
    /// Slope of a DEM at several resolutions
    Slope(SlopeArgs),
    /// Zone rates under different areal units (`maup demo` for the bundled grid)
    Maup(MaupArgs),
    /// Natural streets and their connectivity graph
    Streets(StreetsArgs),
    /// Street blocks and border numbers
    Blocks(BlocksArgs),
    /// Natural cities from below-mean blocks
    Cities(CitiesArgs),
}

#[derive(Debug, Args)]
struct KochArgs {
    /// Number of iterations [default: 3]
    #[arg(long, short = 'n')]
    iterations: Option<u32>,
    /// Initiator length [default: 1]
    #[arg(long)]
    unit: Option<f64>,
    /// Write the curve as SVG
    #[arg(long, value_name = "FILE")]
    svg: Option<PathBuf>,
    /// Write the curve as a GeoJSON LineString feature
    #[arg(long, value_name = "FILE")]
    geojson: Option<PathBuf>,
    /// Print the result as JSON
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct LengthArgs {
    /// GeoJSON LineString
    input: PathBuf,
    /// Yardstick lengths [default: 7 sizes halving from diagonal/4]
    #[arg(long)]
    yardsticks: Option<List<f64>>,
    /// Richardson plot (SVG)
    #[arg(long, value_name = "FILE")]
    plot: Option<PathBuf>,
    /// (yardstick, length) pairs as CSV
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
    /// Print the result as JSON
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct DimensionArgs {
    /// GeoJSON LineString or Polygon
    input: PathBuf,
    /// divider or boxcount [default: divider]
    #[arg(long)]
    method: Option<String>,
    /// Yardsticks or box sizes [default: 7 sizes halving from diagonal/4]
    #[arg(long)]
    scales: Option<List<f64>>,
    /// Box grid offset from the bounding-box corner [default: 0,0]
    #[arg(long, allow_hyphen_values = true)]
    anchor: Option<Offset>,
    /// Log-log plot of the measurements (SVG)
    #[arg(long, value_name = "FILE")]
    plot: Option<PathBuf>,
    /// (scale, measurement) pairs as CSV
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
    /// Print the result as JSON
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct AreaArgs {
    /// GeoJSON Polygon
    input: PathBuf,
    /// Cell sizes [default: diagonal/8 halving down to diagonal/512]
    #[arg(long)]
    cells: Option<List<f64>>,
    /// Grid offset from the bounding-box corner [default: 0,0]
    #[arg(long, allow_hyphen_values = true)]
    anchor: Option<Offset>,
    /// (cell size, area) pairs as CSV
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
    /// Print the result as JSON
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct HtbArgs {
    /// Values, one per line
    input: PathBuf,
    /// Largest accepted head fraction [default: 0.4]
    #[arg(long)]
    head_limit: Option<f64>,
    /// Rank-size plot (SVG)
    #[arg(long, value_name = "FILE")]
    plot: Option<PathBuf>,
    /// Print the result as JSON
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct HtindexArgs {
    /// Values, one per line
    input: PathBuf,
    /// Largest accepted head fraction [default: 0.4]
    #[arg(long)]
    head_limit: Option<f64>,
    /// Print the result as JSON
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct SlopeArgs {
    /// Esri ASCII grid; omit when using --synthetic
    dem: Option<PathBuf>,
    /// Diamond-square surface of side 2^K + 1 instead of a DEM file
    #[arg(long, value_name = "K", conflicts_with = "dem")]
    synthetic: Option<u32>,
    /// Roughness of the synthetic surface [default: 0.5]
    #[arg(long)]
    roughness: Option<f64>,
    /// Seed of the synthetic surface [default: 1]
    #[arg(long)]
    seed: Option<u64>,
    /// Coarsening factors; the original resolution is always included
    #[arg(long)]
    coarsen: Option<List<usize>>,
    /// Slope class width in degrees [default: 1]
    #[arg(long)]
    hist_width: Option<f64>,
    /// Write PslopeX.asc, PhistX.csv and PhistX.svg per factor X
    #[arg(long, value_name = "P")]
    out_prefix: Option<String>,
    /// Print the result as JSON
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct MaupArgs {
    /// `demo` or a cell file with rows col,row,numerator,denominator
    input: String,
    /// Zoning files with rows col,row,zone_id
    #[arg(long)]
    zones: Option<List<PathBuf>>,
    /// Zonings are nested fine to coarse; report the scale effect
    #[arg(long)]
    nested: bool,
    /// Print the result as JSON
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct StreetsArgs {
    /// GeoJSON street segments
    input: PathBuf,
    /// every-best-fit, self-best-fit or same-name [default: every-best-fit]
    #[arg(long)]
    strategy: Option<String>,
    /// Largest deflection joined, in degrees [default: 45]
    #[arg(long)]
    angle: Option<f64>,
    /// Vertex snap tolerance [default: 1e-9 x bounding-box diagonal]
    #[arg(long)]
    snap: Option<f64>,
    /// Connectivity graph as JSON
    #[arg(long, value_name = "FILE")]
    graph: Option<PathBuf>,
    /// Natural streets as GeoJSON
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// (street, degree, length) rows as CSV
    #[arg(long, value_name = "FILE")]
    degrees: Option<PathBuf>,
    /// Print the result as JSON
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct BlocksArgs {
    /// GeoJSON street segments
    input: PathBuf,
    /// Compute border numbers and the topological center
    #[arg(long)]
    border_numbers: bool,
    /// Vertex snap tolerance [default: 1e-9 x bounding-box diagonal]
    #[arg(long)]
    snap: Option<f64>,
    /// Blocks as GeoJSON
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// (block, area) rows as CSV
    #[arg(long, value_name = "FILE")]
    areas: Option<PathBuf>,
    /// Print the result as JSON
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct CitiesArgs {
    /// GeoJSON street segments
    input: PathBuf,
    /// Nested below-mean hotspots inside each city
    #[arg(long)]
    hotspots: bool,
    /// Vertex snap tolerance [default: 1e-9 x bounding-box diagonal]
    #[arg(long)]
    snap: Option<f64>,
    /// Cities as GeoJSON
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Print the result as JSON
    #[arg(long)]
    json: bool,
}

/// A failed command and its exit code.
#[derive(Debug)]
pub enum Failure {
    Input(String),
    Numerical(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Input(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Numerical(m) => m,
        }
    }
}

fn input(e: impl Display) -> Failure {
    Failure::Input(e.to_string())
}

fn numerical(e: impl Display) -> Failure {
    Failure::Numerical(e.to_string())
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        input(e)
    }
}

impl From<FeatureError> for Failure {
    fn from(e: FeatureError) -> Self {
        input(e)
    }
}

impl From<GridError> for Failure {
    fn from(e: GridError) -> Self {
        input(e)
    }
}

impl From<SeriesError> for Failure {
    fn from(e: SeriesError) -> Self {
        input(e)
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        input(e)
    }
}

impl From<PlotError> for Failure {
    fn from(e: PlotError) -> Self {
        input(e)
    }
}

impl From<ScalingError> for Failure {
    fn from(e: ScalingError) -> Self {
        input(e)
    }
}

impl From<MaupError> for Failure {
    fn from(e: MaupError) -> Self {
        input(e)
    }
}

impl From<MeasureError> for Failure {
    fn from(e: MeasureError) -> Self {
        match e {
            MeasureError::TooFewPoints { .. }
            | MeasureError::ZeroVariance
            | MeasureError::NonPositive(..)
            | MeasureError::EmptyBox => numerical(e),
            _ => input(e),
        }
    }
}

impl From<TerrainError> for Failure {
    fn from(e: TerrainError) -> Self {
        input(e)
    }
}

impl From<TopologyError> for Failure {
    fn from(e: TopologyError) -> Self {
        match e {
            TopologyError::EulerViolation { .. }
            | TopologyError::NotPartition { .. }
            | TopologyError::NoBlocks
            | TopologyError::TooFewBlocks(_)
            | TopologyError::UnreachableBlock(_) => numerical(e),
            _ => input(e),
        }
    }
}

type Outcome = Result<(), Failure>;

struct Ctx<'a> {
    cfg: Config,
    out: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn json(&mut self, v: &Value) -> Outcome {
        writeln!(self.out, "{}", serde_json::to_string_pretty(v).expect("json serializes"))?;
        Ok(())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| input(format!("{}: {e}", path.display())))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn read_geometries(path: &Path) -> Result<Vec<features::Feature>, Failure> {
    let text = read(path)?;
    parse_geojson(&text).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn first_line(path: &Path) -> Result<Polyline, Failure> {
    let all = read_geometries(path)?;
    let mut lines = all.into_iter().filter_map(|f| match f.geometry {
        Geometry::Line(l) => Some(l),
        Geometry::Area(_) => None,
    });
    let first = lines.next().ok_or_else(|| input(format!("{}: no LineString found", path.display())))?;
    if lines.next().is_some() {
        log::warn!("{}: using the first of several lines", path.display());
    }
    Ok(first)
}

fn first_polygon(path: &Path) -> Result<Polygon, Failure> {
    let all = read_geometries(path)?;
    let mut polys = all.into_iter().filter_map(|f| match f.geometry {
        Geometry::Area(p) => Some(p),
        Geometry::Line(_) => None,
    });
    let first = polys.next().ok_or_else(|| input(format!("{}: no Polygon found", path.display())))?;
    if polys.next().is_some() {
        log::warn!("{}: using the first of several polygons", path.display());
    }
    Ok(first)
}

/// Explicit scales sorted large to small, or `count` scales halving from
/// `start`.
fn scales_or(given: Option<List<f64>>, start: f64, count: usize) -> Result<ScaleSeries, Failure> {
    Ok(match given {
        Some(List(v)) => ScaleSeries::from_unordered(v)?,
        None => ScaleSeries::geometric(start, 0.5, count)?,
    })
}

fn fit_json(fit: &LogLogFit) -> Value {
    json!({
        "dimension": fit.dimension,
        "slope": fit.slope,
        "intercept": fit.intercept,
        "r_squared": fit.r_squared,
    })
}

fn koch(a: KochArgs, cx: &mut Ctx) -> Outcome {
    let n = cx.cfg.pick_or(a.iterations, "iterations", DEFAULT_KOCH_ITERATIONS)?;
    let unit = cx.cfg.pick_or(a.unit, "unit", 1.0)?;
    let spec = KochSpec::new(n).with_unit(unit);
    let curve = koch_curve(&spec)?;
    let v = curve.vertices();
    if let Some(path) = cx.cfg.pick(a.svg, "svg")? {
        plot::emit_curve(&format!("Koch curve, {n} iterations"), v, &path)?;
    }
    if let Some(path) = cx.cfg.pick(a.geojson, "geojson")? {
        let f = features::Feature { geometry: Geometry::Line(curve.clone()), properties: BTreeMap::new(), source: 0 };
        write_file(&path, &features::write_features(&[f]))?;
    }
    if cx.cfg.switch(a.json, "json")? {
        return cx.json(&json!({
            "iterations": n,
            "unit": unit,
            "vertex_count": v.len(),
            "segment_count": curve.segment_count(),
            "segment_length": spec.segment_length(),
            "length": curve.length(),
            "vertices": v.iter().map(|p| [p.x, p.y]).collect::<Vec<_>>(),
        }));
    }
    writeln!(cx.out, "Koch curve, {n} iterations")?;
    writeln!(cx.out, "vertices        {}", v.len())?;
    writeln!(cx.out, "segments        {}", curve.segment_count())?;
    writeln!(cx.out, "segment length  {}", spec.segment_length())?;
    writeln!(cx.out, "length          {}", curve.length())?;
    Ok(())
}

fn length(a: LengthArgs, cx: &mut Ctx) -> Outcome {
    let curve = first_line(&a.input)?;
    let yardsticks = cx.cfg.pick(a.yardsticks, "yardsticks")?;
    let scales = scales_or(yardsticks, curve.bbox().diagonal() / 4.0, DEFAULT_SCALE_COUNT)?;
    let walks = parallel::divider_measurements_par(&curve, &scales)?;
    let pts: Vec<(f64, f64)> = walks.iter().map(|w| (w.yardstick, w.measured_length)).collect();
    let fit = if pts.len() >= 3 { Some(divider_fit(&pts)?) } else { None };
    if let Some(path) = cx.cfg.pick(a.csv, "csv")? {
        write_file(&path, &series::write_pairs(["yardstick", "length"], &pts))?;
    }
    if let Some(path) = cx.cfg.pick(a.plot, "plot")? {
        plot::emit_plot(&PlotSpec::richardson(pts.clone(), fit), &path)?;
    }
    if cx.cfg.switch(a.json, "json")? {
        let rows: Vec<Value> = walks
            .iter()
            .map(|w| {
                json!({
                    "yardstick": w.yardstick,
                    "steps": w.steps,
                    "remainder": w.remainder,
                    "length": w.measured_length,
                })
            })
            .collect();
        return cx.json(&json!({
            "euclidean_length": curve.length(),
            "walks": rows,
            "fit": fit.as_ref().map(fit_json),
        }));
    }
    writeln!(cx.out, "euclidean length {}", curve.length())?;
    writeln!(cx.out, "{:>14} {:>8} {:>14} {:>14}", "yardstick", "steps", "remainder", "length")?;
    for w in &walks {
        writeln!(
            cx.out,
            "{:>14.6e} {:>8} {:>14.6e} {:>14.8}",
            w.yardstick, w.steps, w.remainder, w.measured_length
        )?;
    }
    if let Some(f) = fit {
        writeln!(cx.out, "D = {:.6} (r^2 = {:.6})", f.dimension, f.r_squared)?;
    }
    Ok(())
}

fn dimension(a: DimensionArgs, cx: &mut Ctx) -> Outcome {
    let method = cx.cfg.pick_or(a.method, "method", "divider".to_string())?;
    let given = cx.cfg.pick(a.scales, "scales")?;
    let offset = cx.cfg.pick_or(a.anchor, "anchor", Offset(Point::default()))?.0;
    let (pts, fit, labels) = match method.as_str() {
        "divider" => {
            let curve = first_line(&a.input)?;
            let scales = scales_or(given, curve.bbox().diagonal() / 4.0, DEFAULT_SCALE_COUNT)?;
            let walks = parallel::divider_measurements_par(&curve, &scales)?;
            let pts: Vec<(f64, f64)> = walks.iter().map(|w| (w.yardstick, w.measured_length)).collect();
            let fit = divider_fit(&pts)?;
            (pts, fit, ("yardstick", "length"))
        }
        "boxcount" => {
            let all = read_geometries(&a.input)?;
            if all.len() > 1 {
                log::warn!("{}: using the first of several geometries", a.input.display());
            }
            let geom = all.into_iter().next().expect("parser rejects empty input").geometry;
            let scales = scales_or(given, geom.bbox().diagonal() / 4.0, DEFAULT_SCALE_COUNT)?;
            let counts = parallel::box_count_par(&geom, &scales, offset);
            let fit = boxcount_dimension(&counts)?;
            let pts = counts.iter().map(|&(s, n)| (s, n as f64)).collect();
            (pts, fit, ("size", "boxes"))
        }
        other => return Err(input(format!("unknown method '{other}' (expected divider or boxcount)"))),
    };
    if let Some(path) = cx.cfg.pick(a.csv, "csv")? {
        write_file(&path, &series::write_pairs([labels.0, labels.1], &pts))?;
    }
    if let Some(path) = cx.cfg.pick(a.plot, "plot")? {
        let mut spec = PlotSpec::richardson(pts.clone(), Some(fit));
        if method == "boxcount" {
            spec.title = "Box counts".into();
            spec.x_label = "box size".into();
            spec.y_label = "occupied boxes".into();
        }
        plot::emit_plot(&spec, &path)?;
    }
    if cx.cfg.switch(a.json, "json")? {
        let rows: Vec<Value> = pts.iter().map(|p| json!([p.0, p.1])).collect();
        return cx.json(&json!({
            "method": method,
            "measurements": rows,
            "fit": fit_json(&fit),
        }));
    }
    writeln!(cx.out, "method {method}")?;
    writeln!(cx.out, "{:>14} {:>14}", labels.0, labels.1)?;
    let digits = if method == "boxcount" { 0 } else { 8 };
    for (s, v) in &pts {
        writeln!(cx.out, "{s:>14.6e} {v:>14.digits$}")?;
    }
    writeln!(cx.out, "D = {:.6} (r^2 = {:.6})", fit.dimension, fit.r_squared)?;
    Ok(())
}

fn area(a: AreaArgs, cx: &mut Ctx) -> Outcome {
    let poly = first_polygon(&a.input)?;
    let d = poly.bbox().diagonal();
    let given = cx.cfg.pick(a.cells, "cells")?;
    let cells = scales_or(given, d / 8.0, DEFAULT_SCALE_COUNT)?;
    let offset = cx.cfg.pick_or(a.anchor, "anchor", Offset(Point::default()))?.0;
    let rows = parallel::rasterized_area_par(&poly, &cells, offset);
    let truth = poly.area();
    if let Some(path) = cx.cfg.pick(a.csv, "csv")? {
        write_file(&path, &series::write_pairs(["cell", "area"], &rows))?;
    }
    if cx.cfg.switch(a.json, "json")? {
        let r: Vec<Value> = rows.iter().map(|&(c, v)| json!({"cell": c, "area": v, "ratio": v / truth})).collect();
        return cx.json(&json!({"polygon_area": truth, "rasterized": r}));
    }
    writeln!(cx.out, "polygon area {truth}")?;
    writeln!(cx.out, "{:>14} {:>16} {:>10}", "cell", "area", "ratio")?;
    for (c, v) in &rows {
        writeln!(cx.out, "{c:>14.6e} {v:>16.8} {:>10.6}", v / truth)?;
    }
    Ok(())
}

fn read_series(path: &Path) -> Result<ValueSeries, Failure> {
    let values = series::parse_values(&read(path)?).map_err(|e| input(format!("{}: {e}", path.display())))?;
    Ok(ValueSeries::new(values)?)
}

fn htb(a: HtbArgs, cx: &mut Ctx) -> Outcome {
    let s = read_series(&a.input)?;
    let limit = cx.cfg.pick_or(a.head_limit, "head-limit", DEFAULT_HEAD_LIMIT)?;
    let p = head_tail_breaks(&s, limit)?;
    if let Some(path) = cx.cfg.pick(a.plot, "plot")? {
        plot::emit_plot(&PlotSpec::rank_size(&rank_size_table(&s)), &path)?;
    }
    if cx.cfg.switch(a.json, "json")? {
        let levels: Vec<Value> = p
            .levels
            .iter()
            .map(|l| {
                json!({
                    "mean": l.mean,
                    "count": l.count(),
                    "head_count": l.head_count,
                    "tail_count": l.tail_count,
                    "head_fraction": l.head_fraction,
                    "accepted": l.accepted,
                })
            })
            .collect();
        return cx.json(&json!({
            "count": s.len(),
            "head_limit": limit,
            "ht_index": p.ht_index,
            "head_sizes": p.head_sizes(),
            "levels": levels,
            "classes": p.class_assignment,
        }));
    }
    writeln!(cx.out, "{} values, head limit {limit}", s.len())?;
    writeln!(cx.out, "{:>5} {:>16} {:>8} {:>8} {:>8} {:>8}", "level", "mean", "count", "head", "head%", "split")?;
    for (k, l) in p.levels.iter().enumerate() {
        writeln!(
            cx.out,
            "{k:>5} {:>16.8} {:>8} {:>8} {:>8.2} {:>8}",
            l.mean,
            l.count(),
            l.head_count,
            100.0 * l.head_fraction,
            if l.accepted { "yes" } else { "no" }
        )?;
    }
    writeln!(cx.out, "ht-index {}", p.ht_index)?;
    Ok(())
}

fn htindex(a: HtindexArgs, cx: &mut Ctx) -> Outcome {
    let s = read_series(&a.input)?;
    let limit = cx.cfg.pick_or(a.head_limit, "head-limit", DEFAULT_HEAD_LIMIT)?;
    let p = head_tail_breaks(&s, limit)?;
    if cx.cfg.switch(a.json, "json")? {
        return cx.json(&json!({"ht_index": p.ht_index}));
    }
    writeln!(cx.out, "{}", p.ht_index)?;
    Ok(())
}

fn slope(a: SlopeArgs, cx: &mut Ctx) -> Outcome {
    let synthetic = cx.cfg.pick(a.synthetic, "synthetic")?;
    let prefix = cx.cfg.pick(a.out_prefix, "out-prefix")?;
    let dem: RasterGrid = match (a.dem, synthetic) {
        (Some(path), _) => parse_ascii_grid(&read(&path)?).map_err(|e| input(format!("{}: {e}", path.display())))?,
        (None, Some(k)) => {
            let h = cx.cfg.pick_or(a.roughness, "roughness", DEFAULT_ROUGHNESS)?;
            let seed = cx.cfg.pick_or(a.seed, "seed", DEFAULT_SEED)?;
            let g = synthetic_fractal_surface(&SurfaceSpec::new(k, h, seed))?;
            if let Some(p) = &prefix {
                write_file(Path::new(&format!("{p}dem.asc")), &write_ascii_grid(&g))?;
            }
            g
        }
        (None, None) => return Err(input("slope needs a DEM file or --synthetic K")),
    };
    let width = cx.cfg.pick_or(a.hist_width, "hist-width", DEFAULT_BIN_WIDTH)?;
    let mut factors = vec![1];
    for f in cx.cfg.pick(a.coarsen, "coarsen")?.map(|l| l.0).unwrap_or_default() {
        if !factors.contains(&f) {
            factors.push(f);
        }
    }
    let levels = parallel::slope_levels_par(&dem, &factors)?;
    let mut hists = Vec::with_capacity(levels.len());
    for l in &levels {
        let h = slope_histogram(&l.slope, width)?;
        if l.dropped_cols + l.dropped_rows > 0 {
            log::info!(
                "factor {}: dropped {} columns and {} rows that do not fill a block",
                l.factor,
                l.dropped_cols,
                l.dropped_rows
            );
        }
        if let Some(p) = &prefix {
            let f = l.factor;
            write_file(Path::new(&format!("{p}slope{f}.asc")), &write_ascii_grid(&l.slope.grid))?;
            write_file(Path::new(&format!("{p}hist{f}.csv")), &series::write_pairs(["bin_lower", "area"], &h.bins))?;
            let mut spec = PlotSpec::slope_histogram(&h);
            spec.title = format!("Slope histogram, cell size {}", l.slope.grid.cell_size);
            plot::emit_plot(&spec, Path::new(&format!("{p}hist{f}.svg")))?;
        }
        hists.push(h);
    }
    if cx.cfg.switch(a.json, "json")? {
        let rows: Vec<Value> = levels
            .iter()
            .zip(&hists)
            .map(|(l, h)| {
                let range = l.slope.range();
                json!({
                    "factor": l.factor,
                    "cell_size": l.slope.grid.cell_size,
                    "valid_cells": l.slope.grid.valid_count(),
                    "min": range.map(|r| r.0),
                    "max": range.map(|r| r.1),
                    "range_width": l.slope.range_width(),
                    "dropped_cols": l.dropped_cols,
                    "dropped_rows": l.dropped_rows,
                    "histogram": h.bins.iter().map(|b| [b.0, b.1]).collect::<Vec<_>>(),
                })
            })
            .collect();
        return cx.json(&json!({"method": "horn", "bin_width": width, "levels": rows}));
    }
    writeln!(cx.out, "{}x{} grid, cell size {}", dem.ncols, dem.nrows, dem.cell_size)?;
    writeln!(cx.out, "{:>6} {:>10} {:>8} {:>10} {:>10} {:>10}", "factor", "cell", "cells", "min", "max", "range")?;
    for l in &levels {
        let (lo, hi) = l.slope.range().unwrap_or((f64::NAN, f64::NAN));
        writeln!(
            cx.out,
            "{:>6} {:>10} {:>8} {:>10.4} {:>10.4} {:>10.4}",
            l.factor,
            l.slope.grid.cell_size,
            l.slope.grid.valid_count(),
            lo,
            hi,
            hi - lo
        )?;
    }
    Ok(())
}

fn percent_text(r: &ZoneRate) -> String {
    r.display_percent().map(|p| format!("{p}%")).unwrap_or_else(|| "-".into())
}

fn rate_json(r: &ZoneRate) -> Value {
    json!({"numerator": r.numerator, "denominator": r.denominator, "rate": r.rate})
}

fn summary_json(s: &LevelSummary) -> Value {
    json!({
        "zoning": s.zoning,
        "zones": s.zone_count,
        "min_rate": s.min_rate,
        "max_rate": s.max_rate,
        "spread": s.spread,
        "global_rate": s.global_rate,
    })
}

fn summary_line(out: &mut dyn Write, s: &LevelSummary) -> io::Result<()> {
    let p = |v: Option<f64>| v.map(|x| format!("{x:.2}%")).unwrap_or_else(|| "-".into());
    writeln!(
        out,
        "  {:<12} {:>5} zones  min {:>8}  max {:>8}  spread {:>8}",
        s.zoning,
        s.zone_count,
        p(s.min_rate),
        p(s.max_rate),
        p(s.spread)
    )
}

/// Rates of every zoning plus the scale and/or zoning effect summaries.
fn maup_report(
    cx: &mut Ctx,
    grid: &CountGrid,
    zonings: &[Zoning],
    nested: Option<&[Zoning]>,
    compared: Option<&[Zoning]>,
    json_out: bool,
) -> Outcome {
    let mut rates = Vec::new();
    for z in zonings {
        rates.push((z.name.clone(), aggregate_rates(grid, z)?));
    }
    let scale = nested.map(|n| scale_effect_table(grid, n)).transpose()?;
    let zoning = compared.map(|c| zoning_effect_spread(grid, c)).transpose()?;
    let (num, den) = grid.totals();
    if json_out {
        let per: Vec<Value> = rates
            .iter()
            .map(|(name, r)| {
                let zones: serde_json::Map<String, Value> = r.iter().map(|(k, v)| (k.clone(), rate_json(v))).collect();
                json!({"zoning": name, "zones": zones})
            })
            .collect();
        let mut v = json!({
            "numerator": num,
            "denominator": den,
            "global_rate": grid.global_rate(),
            "zonings": per,
            "scale_effect": scale.as_ref().map(|t| t.iter().map(summary_json).collect::<Vec<_>>()),
            "zoning_effect": zoning.as_ref().map(|z| json!({
                "summaries": z.summaries.iter().map(summary_json).collect::<Vec<_>>(),
                "max_rate_range": z.max_rate_range,
                "min_rate_range": z.min_rate_range,
                "spread_range": z.spread_range,
            })),
        });
        if grid == &demo::grid() && nested.is_some() {
            v["groupings"] = demo_groupings_json(&rates);
        }
        return cx.json(&v);
    }
    let global = grid.global_rate().map(|r| format!("{r}%")).unwrap_or_else(|| "-".into());
    writeln!(cx.out, "{}x{} grid, total {num}/{den} = {global}", grid.ncols(), grid.nrows())?;
    for (name, r) in &rates {
        writeln!(cx.out)?;
        let plural = if r.len() == 1 { "" } else { "s" };
        writeln!(cx.out, "zoning {name} ({} zone{plural})", r.len())?;
        for (zone, zr) in r {
            writeln!(
                cx.out,
                "  {zone:<8} {:>12} {:>5}",
                format!("{}/{}", zr.numerator, zr.denominator),
                percent_text(zr)
            )?;
        }
    }
    if let Some(t) = &scale {
        writeln!(cx.out)?;
        writeln!(cx.out, "scale effect (fine to coarse)")?;
        for s in t {
            summary_line(cx.out, s)?;
        }
    }
    if let Some(z) = &zoning {
        writeln!(cx.out)?;
        writeln!(cx.out, "zoning effect ({} zones each)", z.summaries[0].zone_count)?;
        for s in &z.summaries {
            summary_line(cx.out, s)?;
        }
        let p = |v: Option<f64>| v.map(|x| format!("{x:.2}")).unwrap_or_else(|| "-".into());
        writeln!(
            cx.out,
            "  ranges across zonings: max rate {}, min rate {}, spread {} (points)",
            p(z.max_rate_range),
            p(z.min_rate_range),
            p(z.spread_range)
        )?;
    }
    Ok(())
}

fn demo_groupings_json(rates: &[(String, BTreeMap<String, ZoneRate>)]) -> Value {
    let by_name: BTreeMap<&str, &BTreeMap<String, ZoneRate>> = rates.iter().map(|(n, r)| (n.as_str(), r)).collect();
    demo::GROUPINGS
        .iter()
        .map(|g| {
            let r = &by_name[g.zoning][g.zone];
            json!({"zoning": g.zoning, "zone": g.zone, "percent": r.display_percent(), "rate": rate_json(r)})
        })
        .collect()
}

fn maup(a: MaupArgs, cx: &mut Ctx) -> Outcome {
    let json_out = cx.cfg.switch(a.json, "json")?;
    if a.input == "demo" {
        let grid = demo::grid();
        let zonings = demo::all_zonings();
        maup_report(cx, &grid, &zonings, Some(&demo::hierarchy()), Some(&demo::configurations()), json_out)?;
        if !json_out {
            writeln!(cx.out)?;
            writeln!(cx.out, "documented groupings")?;
            for g in &demo::GROUPINGS {
                let z = zonings.iter().find(|z| z.name == g.zoning).expect("demo zoning");
                let r = &aggregate_rates(&grid, z)?[g.zone];
                writeln!(
                    cx.out,
                    "  {:<10} {:<5} {:>9} {:>5}",
                    g.zoning,
                    g.zone,
                    format!("{}/{}", r.numerator, r.denominator),
                    percent_text(r)
                )?;
            }
        }
        return Ok(());
    }
    let path = Path::new(&a.input);
    let grid = series::parse_cells(&read(path)?).map_err(|e| input(format!("{}: {e}", path.display())))?;
    let zone_files = cx
        .cfg
        .pick(a.zones, "zones")?
        .ok_or_else(|| input("maup needs --zones Z1.csv[,Z2.csv,...] (or `maup demo`)"))?;
    let mut zonings = Vec::new();
    for zp in &zone_files.0 {
        let text = read(zp)?;
        let z = series::parse_zoning(&series::zoning_name(zp), &text)
            .map_err(|e| input(format!("{}: {e}", zp.display())))?;
        zonings.push(z);
    }
    let nested = cx.cfg.switch(a.nested, "nested")?;
    if nested {
        for w in zonings.windows(2) {
            check_nesting(&w[0], &w[1])?;
        }
    }
    let same_count = zonings.len() >= 2 && zonings.iter().all(|z| z.zone_count() == zonings[0].zone_count());
    let nested_arg = nested.then_some(zonings.as_slice());
    let compared = (!nested && same_count).then_some(zonings.as_slice());
    maup_report(cx, &grid, &zonings, nested_arg, compared, json_out)
}

fn arrangement(path: &Path, snap: Option<f64>) -> Result<PlanarArrangement, Failure> {
    let segs = street_segments(&read_geometries(path)?);
    if segs.is_empty() {
        return Err(input(format!("{}: no LineString features", path.display())));
    }
    let tol = snap.unwrap_or_else(|| default_snap_tolerance(&segs));
    let arr = build_arrangement(&segs, tol)?;
    log::info!(
        "{} segments: {} nodes, {} edges, {} faces",
        segs.len(),
        arr.nodes.len(),
        arr.edges.len(),
        arr.faces.len()
    );
    Ok(arr)
}

fn streets(a: StreetsArgs, cx: &mut Ctx) -> Outcome {
    let snap = cx.cfg.pick(a.snap, "snap")?;
    let arr = arrangement(&a.input, snap)?;
    let strategy: JoinStrategy = cx.cfg.pick_or(a.strategy, "strategy", "every-best-fit".to_string())?.parse()?;
    let angle = cx.cfg.pick_or(a.angle, "angle", DEFAULT_ANGLE_THRESHOLD)?;
    let streets = trace_natural_streets(&arr, strategy, angle)?;
    let graph = connectivity_graph(&arr, &streets)?;
    let nodes: Vec<Value> = streets
        .iter()
        .map(|s| {
            json!({
                "id": s.id,
                "length": s.length,
                "edges": s.edges,
                "name": s.name,
                "closed": s.closed,
                "degree": graph.degrees[s.id],
            })
        })
        .collect();
    let graph_json = json!({
        "strategy": strategy.name(),
        "angle_threshold": angle,
        "nodes": nodes,
        "links": graph.links.iter().map(|l| [l.0, l.1]).collect::<Vec<_>>(),
    });
    if let Some(path) = cx.cfg.pick(a.graph, "graph")? {
        write_file(&path, &format!("{}\n", serde_json::to_string_pretty(&graph_json).expect("json")))?;
    }
    if let Some(path) = cx.cfg.pick(a.out, "out")? {
        write_file(&path, &features::streets_collection(&arr, &streets, Some(&graph.degrees)))?;
    }
    if let Some(path) = cx.cfg.pick(a.degrees, "degrees")? {
        let rows = streets
            .iter()
            .map(|s| vec![s.id.to_string(), graph.degrees[s.id].to_string(), s.length.to_string()]);
        write_file(&path, &series::write_table(&["street", "degree", "length"], rows))?;
    }
    if cx.cfg.switch(a.json, "json")? {
        return cx.json(&graph_json);
    }
    writeln!(cx.out, "nodes {}, edges {}", arr.nodes.len(), arr.edges.len())?;
    writeln!(cx.out, "natural streets {} ({}, {} degrees)", streets.len(), strategy.name(), angle)?;
    let links = graph.links.len();
    let plural = if links == 1 { "" } else { "s" };
    writeln!(cx.out, "connectivity graph: {} nodes, {links} link{plural}", graph.street_count)?;
    let positive: Vec<f64> = graph.degree_series().into_iter().filter(|d| *d > 0.0).collect();
    if let Ok(s) = ValueSeries::new(positive) {
        let p = head_tail_breaks(&s, DEFAULT_HEAD_LIMIT)?;
        writeln!(cx.out, "ht-index of connectivity {} (over {} connected streets)", p.ht_index, s.len())?;
    }
    Ok(())
}

fn blocks_of(path: &Path, snap: Option<f64>) -> Result<Vec<Block>, Failure> {
    Ok(extract_blocks(&arrangement(path, snap)?))
}

fn blocks(a: BlocksArgs, cx: &mut Ctx) -> Outcome {
    let snap = cx.cfg.pick(a.snap, "snap")?;
    let blocks = blocks_of(&a.input, snap)?;
    let with_border = cx.cfg.switch(a.border_numbers, "border-numbers")?;
    let border = if with_border { Some(border_numbers(&blocks)?) } else { None };
    let center = border.as_ref().map(topological_center);
    if let Some(path) = cx.cfg.pick(a.out, "out")? {
        write_file(&path, &features::blocks_collection(&blocks, border.as_ref()))?;
    }
    if let Some(path) = cx.cfg.pick(a.areas, "areas")? {
        let rows = blocks.iter().map(|b| vec![b.id.to_string(), b.area.to_string()]);
        write_file(&path, &series::write_table(&["block", "area"], rows))?;
    }
    if cx.cfg.switch(a.json, "json")? {
        let rows: Vec<Value> = blocks
            .iter()
            .map(|b| {
                let mut v = json!({"id": b.id, "area": b.area, "neighbors": b.neighbors});
                if let Some(m) = &border {
                    v["border_number"] = json!(m[&b.id]);
                }
                v
            })
            .collect();
        return cx.json(&json!({"blocks": rows, "topological_center": center}));
    }
    let total: f64 = blocks.iter().map(|b| b.area).sum();
    writeln!(cx.out, "blocks {}, total area {total}", blocks.len())?;
    if let (Some(m), Some(c)) = (&border, &center) {
        let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
        for n in m.values() {
            *counts.entry(*n).or_default() += 1;
        }
        for (n, k) in counts {
            writeln!(cx.out, "blocks with border number {n}: {k}")?;
        }
        let ids: Vec<String> = c.iter().map(|b| b.to_string()).collect();
        writeln!(cx.out, "topological center: block {}", ids.join(", "))?;
    }
    Ok(())
}

fn cities(a: CitiesArgs, cx: &mut Ctx) -> Outcome {
    let snap = cx.cfg.pick(a.snap, "snap")?;
    let blocks = blocks_of(&a.input, snap)?;
    let cities = natural_cities(&blocks)?;
    let hot = cx
        .cfg
        .switch(a.hotspots, "hotspots")?
        .then(|| cities.iter().map(|c| city_hotspots(c, &blocks)).collect::<Vec<_>>());
    if let Some(path) = cx.cfg.pick(a.out, "out")? {
        write_file(&path, &features::cities_collection(&cities, &blocks, hot.as_deref()))?;
    }
    let mean = blocks.iter().map(|b| b.area).sum::<f64>() / blocks.len() as f64;
    if cx.cfg.switch(a.json, "json")? {
        let rows: Vec<Value> = cities
            .iter()
            .map(|c| {
                let mut v = json!({"id": c.id, "blocks": c.blocks, "area": c.area});
                if let Some(h) = &hot {
                    v["hotspots"] = json!(h[c.id]);
                }
                v
            })
            .collect();
        return cx.json(&json!({"block_count": blocks.len(), "mean_block_area": mean, "cities": rows}));
    }
    writeln!(cx.out, "blocks {}, mean area {mean}", blocks.len())?;
    writeln!(cx.out, "natural cities {}", cities.len())?;
    for c in &cities {
        writeln!(cx.out, "city {}: {} blocks, area {}", c.id, c.blocks.len(), c.area)?;
        if let Some(h) = &hot {
            for (k, level) in h[c.id].iter().enumerate() {
                let ids: Vec<String> = level.iter().map(|b| b.to_string()).collect();
                writeln!(cx.out, "  hotspot level {}: {}", k + 1, ids.join(" "))?;
            }
        }
    }
    Ok(())
}

fn dispatch(cmd: Command, cx: &mut Ctx) -> Outcome {
    match cmd {
        Command::Koch(a) => koch(a, cx),
        Command::Length(a) => length(a, cx),
        Command::Dimension(a) => dimension(a, cx),
        Command::Area(a) => area(a, cx),
        Command::Htb(a) => htb(a, cx),
        Command::Htindex(a) => htindex(a, cx),
        Command::Slope(a) => slope(a, cx),
        Command::Maup(a) => maup(a, cx),
        Command::Streets(a) => streets(a, cx),
        Command::Blocks(a) => blocks(a, cx),
        Command::Cities(a) => cities(a, cx),
    }
}

/// Runs one command line, writing results to `out` and diagnostics to
/// `err`, and returns the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    2
                }
            };
        }
    };
    let level = if cli.verbose { log::LevelFilter::Debug } else { log::LevelFilter::Warn };
    let _ = env_logger::Builder::new().filter_level(level).parse_default_env().try_init();
    let cfg = match cli.config.as_deref().map(read).transpose() {
        Ok(text) => match Config::parse(text.as_deref().unwrap_or_default()) {
            Ok(c) => c,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                return 2;
            }
        },
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            return f.code();
        }
    };
    let mut cx = Ctx { cfg, out };
    match dispatch(cli.command, &mut cx) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            f.code()
        }
    }
}

/// Entry point of the binary.
pub fn run() -> i32 {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    run_with(std::env::args_os(), &mut out, &mut io::stderr())
}
