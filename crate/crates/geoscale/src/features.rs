//! GeoJSON subset: LineString, MultiLineString and Polygon geometries, bare
//! or wrapped in Features and FeatureCollections.
//!
//! Coordinates are taken as planar x/y; a third coordinate is ignored.
//! Longitude/latitude input is read as is and should be projected first.

use std::collections::BTreeMap;

use geojson::{GeoJson, GeometryValue, JsonObject, JsonValue, Position};
use geoscale_core::street::{Block, NaturalCity, NaturalStreet, PlanarArrangement, StreetSegment};
use geoscale_core::{Geometry, GeometryError, Point, Polygon, Polyline};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("unsupported geometry: {0}")]
    Unsupported(String),
    #[error("feature {0} has no geometry")]
    NoGeometry(usize),
    #[error("feature {index}: {source}")]
    Geometry { index: usize, source: GeometryError },
    #[error("input contains no geometries")]
    Empty,
}

/// One parsed geometry with its properties as strings.
#[derive(Debug, Clone, PartialEq)]
pub struct Feature {
    pub geometry: Geometry,
    pub properties: BTreeMap<String, String>,
    /// Position of the source feature in the input.
    pub source: usize,
}

impl Feature {
    pub fn name(&self) -> Option<&str> {
        self.properties.get("name").map(String::as_str)
    }
}

fn point(p: &Position) -> Point {
    Point::new(p[0], p[1])
}

fn ring(ps: &[Position]) -> Vec<Point> {
    ps.iter().map(point).collect()
}

fn property_text(v: &JsonValue) -> Option<String> {
    match v {
        JsonValue::Null => None,
        JsonValue::String(s) => Some(s.clone()),
        other => Some(other.to_string()),
    }
}

fn push_geometry(
    value: &GeometryValue,
    properties: &BTreeMap<String, String>,
    index: usize,
    out: &mut Vec<Feature>,
) -> Result<(), FeatureError> {
    let wrap = |source| FeatureError::Geometry { index, source };
    let mut push = |geometry| {
        out.push(Feature { geometry, properties: properties.clone(), source: index })
    };
    match value {
        GeometryValue::LineString { coordinates } => {
            push(Geometry::Line(Polyline::new(ring(coordinates)).map_err(wrap)?));
        }
        GeometryValue::MultiLineString { coordinates } => {
            for line in coordinates {
                push(Geometry::Line(Polyline::new(ring(line)).map_err(wrap)?));
            }
        }
        GeometryValue::Polygon { coordinates } => {
            let Some((exterior, holes)) = coordinates.split_first() else {
                return Err(wrap(GeometryError::RingTooShort(0)));
            };
            let holes = holes.iter().map(|h| ring(h)).collect();
            push(Geometry::Area(Polygon::new(ring(exterior), holes).map_err(wrap)?));
        }
        other => return Err(FeatureError::Unsupported(other.type_name().to_string())),
    }
    Ok(())
}

fn properties_of(props: Option<&JsonObject>) -> BTreeMap<String, String> {
    props
        .into_iter()
        .flatten()
        .filter_map(|(k, v)| property_text(v).map(|t| (k.clone(), t)))
        .collect()
}

/// Parses GeoJSON text into features. MultiLineStrings yield one feature per
/// part, all with the same `source`.
pub fn parse_geojson(text: &str) -> Result<Vec<Feature>, FeatureError> {
    let gj: GeoJson = serde_json::from_str(text).map_err(|e| FeatureError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut out = Vec::new();
    match gj {
        GeoJson::Geometry(g) => push_geometry(&g.value, &BTreeMap::new(), 0, &mut out)?,
        GeoJson::Feature(f) => {
            let g = f.geometry.as_ref().ok_or(FeatureError::NoGeometry(0))?;
            push_geometry(&g.value, &properties_of(f.properties.as_ref()), 0, &mut out)?;
        }
        GeoJson::FeatureCollection(fc) => {
            for (i, f) in fc.features.iter().enumerate() {
                let g = f.geometry.as_ref().ok_or(FeatureError::NoGeometry(i))?;
                push_geometry(&g.value, &properties_of(f.properties.as_ref()), i, &mut out)?;
            }
        }
    }
    if out.is_empty() {
        return Err(FeatureError::Empty);
    }
    Ok(out)
}

/// Line features as street segments, numbered in input order. Polygons are
/// skipped.
pub fn street_segments(features: &[Feature]) -> Vec<StreetSegment> {
    let mut out = Vec::new();
    for f in features {
        if let Geometry::Line(l) = &f.geometry {
            let id = out.len();
            out.push(match f.name() {
                Some(n) => StreetSegment::named(id, n, l.clone()),
                None => StreetSegment::new(id, l.clone()),
            });
        }
    }
    out
}

fn position(p: Point) -> Position {
    Position::from([p.x, p.y])
}

fn line_value(pts: &[Point]) -> GeometryValue {
    GeometryValue::new_line_string(pts.iter().map(|p| position(*p)))
}

fn polygon_rings(rings: &[&[Point]]) -> Vec<Vec<Position>> {
    rings.iter().map(|r| r.iter().map(|p| position(*p)).collect()).collect()
}

fn feature(value: GeometryValue, properties: JsonObject) -> geojson::Feature {
    geojson::Feature {
        bbox: None,
        geometry: Some(geojson::Geometry::new(value)),
        id: None,
        properties: Some(properties),
        foreign_members: None,
    }
}

fn collection(features: Vec<geojson::Feature>) -> String {
    let gj = GeoJson::FeatureCollection(geojson::FeatureCollection::new(features));
    // f64 values are written in shortest round-trip form
    serde_json::to_string_pretty(&gj).expect("geojson serializes")
}

fn object(pairs: Vec<(&str, JsonValue)>) -> JsonObject {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

/// Parsed features written back as a FeatureCollection.
pub fn write_features(features: &[Feature]) -> String {
    let out = features
        .iter()
        .map(|f| {
            let value = match &f.geometry {
                Geometry::Line(l) => line_value(l.vertices()),
                Geometry::Area(p) => {
                    let rings: Vec<&[Point]> = p.rings().collect();
                    GeometryValue::Polygon { coordinates: polygon_rings(&rings) }
                }
            };
            let props = f.properties.iter().map(|(k, v)| (k.clone(), JsonValue::from(v.clone()))).collect();
            feature(value, props)
        })
        .collect();
    collection(out)
}

/// Vertices of a natural street in travel order.
pub fn street_path(arr: &PlanarArrangement, street: &NaturalStreet) -> Vec<Point> {
    let first = &arr.edges[street.edges[0]];
    // leave the first edge through the node it shares with the second
    let mut at = match street.edges.get(1).map(|&e| &arr.edges[e]) {
        Some(next) if first.from == next.from || first.from == next.to => first.to,
        _ => first.from,
    };
    let mut pts: Vec<Point> = Vec::new();
    for &e in &street.edges {
        let edge = &arr.edges[e];
        let skip = usize::from(!pts.is_empty());
        if edge.from == at {
            pts.extend(edge.geometry.iter().skip(skip));
            at = edge.to;
        } else {
            pts.extend(edge.geometry.iter().rev().skip(skip));
            at = edge.from;
        }
    }
    pts
}

/// Natural streets as LineStrings with `id`, `length`, `edges`, `closed`,
/// the shared `name` if any, and `degree` when connectivity is known.
pub fn streets_collection(
    arr: &PlanarArrangement,
    streets: &[NaturalStreet],
    degrees: Option<&[usize]>,
) -> String {
    let out = streets
        .iter()
        .map(|s| {
            let mut props = object(vec![
                ("id", s.id.into()),
                ("length", s.length.into()),
                ("edges", s.edges.len().into()),
                ("closed", s.closed.into()),
            ]);
            if let Some(n) = &s.name {
                props.insert("name".into(), n.clone().into());
            }
            if let Some(d) = degrees {
                props.insert("degree".into(), d[s.id].into());
            }
            feature(line_value(&street_path(arr, s)), props)
        })
        .collect();
    collection(out)
}

/// Blocks as Polygons with `id`, `area`, and `border_number` when given.
pub fn blocks_collection(blocks: &[Block], border: Option<&BTreeMap<usize, u32>>) -> String {
    let out = blocks
        .iter()
        .map(|b| {
            let mut props = object(vec![("id", b.id.into()), ("area", b.area.into())]);
            if let Some(n) = border.and_then(|m| m.get(&b.id)) {
                props.insert("border_number".into(), (*n).into());
            }
            let value = GeometryValue::Polygon { coordinates: polygon_rings(&[&b.ring]) };
            feature(value, props)
        })
        .collect();
    collection(out)
}

/// Cities as MultiPolygons of their blocks with `id`, `area`, `blocks`, and
/// the hotspot levels (lists of block ids) when given.
pub fn cities_collection(
    cities: &[NaturalCity],
    blocks: &[Block],
    hotspots: Option<&[Vec<Vec<usize>>]>,
) -> String {
    let ring_of: BTreeMap<usize, &[Point]> = blocks.iter().map(|b| (b.id, b.ring.as_slice())).collect();
    let out = cities
        .iter()
        .map(|c| {
            let mut props = object(vec![
                ("id", c.id.into()),
                ("area", c.area.into()),
                ("blocks", c.blocks.clone().into()),
            ]);
            if let Some(h) = hotspots {
                props.insert("hotspots".into(), h[c.id].clone().into());
            }
            let parts = c.blocks.iter().map(|b| polygon_rings(&[ring_of[b]])).collect();
            feature(GeometryValue::MultiPolygon { coordinates: parts }, props)
        })
        .collect();
    collection(out)
}
