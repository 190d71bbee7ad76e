//! GeoJSON (RFC 7946) emission of resolved locations, footprints,
//! per-document mention markers, and optional possibility rasters, plus a
//! structural validator used by tests and the CLI.

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::fuzzy::GridSurface;
use crate::geo::GeoPoint;
use crate::retrieval::ResolvedLocation;

/// Emission options.
#[derive(Debug, Clone, Copy, Default)]
pub struct EmitOptions {
    /// Include one polygon feature per grid cell with positive
    /// possibility, carrying a `pi` property.
    pub raster: bool,
}

/// A map marker for one ranked document.
#[derive(Debug, Clone, PartialEq)]
pub struct MentionMarker {
    pub doc_id: String,
    pub score: f64,
    pub point: GeoPoint,
}

#[derive(Serialize)]
struct FeatureCollection {
    #[serde(rename = "type")]
    kind: &'static str,
    features: Vec<Feature>,
}

#[derive(Serialize)]
struct Feature {
    #[serde(rename = "type")]
    kind: &'static str,
    geometry: Geometry,
    properties: serde_json::Map<String, Value>,
}

#[derive(Serialize)]
#[serde(tag = "type")]
enum Geometry {
    Point { coordinates: [f64; 2] },
    Polygon { coordinates: Vec<Vec<[f64; 2]>> },
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

fn position(p: &GeoPoint) -> [f64; 2] {
    [round6(p.lon), round6(p.lat)]
}

fn props(entries: Vec<(&str, Value)>) -> serde_json::Map<String, Value> {
    entries
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
}

fn num(x: f64) -> Value {
    serde_json::Number::from_f64(round6(x))
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

/// Serialize a resolution to GeoJSON: one resolved-point feature, one
/// footprint polygon, one marker per ranked document, and (optionally)
/// the possibility raster. Output is deterministic: stable key order and
/// 6-decimal coordinates.
pub fn emit_geojson(
    location: &ResolvedLocation,
    markers: &[MentionMarker],
    grid: &GridSurface,
    options: &EmitOptions,
) -> Result<String> {
    let mut features = Vec::new();

    features.push(Feature {
        kind: "Feature",
        geometry: Geometry::Point {
            coordinates: position(&location.point),
        },
        properties: props(vec![
            ("role", Value::String("resolved_point".into())),
            ("pi", num(location.max_pi)),
        ]),
    });

    let primary = location
        .footprint
        .first()
        .ok_or_else(|| Error::Integrity("resolved location has no footprint".into()))?;
    let mut rings: Vec<Vec<[f64; 2]>> = Vec::new();
    rings.push(primary.exterior.iter().map(position).collect());
    for hole in &primary.holes {
        rings.push(hole.iter().map(position).collect());
    }
    features.push(Feature {
        kind: "Feature",
        geometry: Geometry::Polygon { coordinates: rings },
        properties: props(vec![
            ("role", Value::String("footprint".into())),
            ("cut_level", num(location.cut_level)),
        ]),
    });

    for marker in markers {
        features.push(Feature {
            kind: "Feature",
            geometry: Geometry::Point {
                coordinates: position(&marker.point),
            },
            properties: props(vec![
                ("role", Value::String("mention".into())),
                ("doc_id", Value::String(marker.doc_id.clone())),
                ("score", num(marker.score)),
            ]),
        });
    }

    if options.raster {
        for (ix, iy, v) in grid.cells() {
            if v <= 0.0 {
                continue;
            }
            let b = grid.cell_bbox(ix, iy);
            let ring = vec![
                [round6(b.min_lon), round6(b.min_lat)],
                [round6(b.max_lon), round6(b.min_lat)],
                [round6(b.max_lon), round6(b.max_lat)],
                [round6(b.min_lon), round6(b.max_lat)],
                [round6(b.min_lon), round6(b.min_lat)],
            ];
            features.push(Feature {
                kind: "Feature",
                geometry: Geometry::Polygon {
                    coordinates: vec![ring],
                },
                properties: props(vec![("pi", num(v))]),
            });
        }
    }

    let collection = FeatureCollection {
        kind: "FeatureCollection",
        features,
    };
    Ok(serde_json::to_string_pretty(&collection)?)
}

fn check_position(v: &Value, ctx: &str) -> Result<()> {
    let arr = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| Error::Integrity(format!("{ctx}: position must be [lon, lat]")))?;
    let lon = arr[0]
        .as_f64()
        .ok_or_else(|| Error::Integrity(format!("{ctx}: non-numeric longitude")))?;
    let lat = arr[1]
        .as_f64()
        .ok_or_else(|| Error::Integrity(format!("{ctx}: non-numeric latitude")))?;
    if !(-180.0..=180.0).contains(&lon) || !(-90.0..=90.0).contains(&lat) {
        return Err(Error::Integrity(format!(
            "{ctx}: coordinates out of range ({lon}, {lat})"
        )));
    }
    Ok(())
}

/// Structural GeoJSON validation: FeatureCollection shape, Point/Polygon
/// geometries, closed rings with at least 4 positions, lon/lat ranges,
/// and `pi`/`score` properties within [0, 1].
pub fn validate_geojson(text: &str) -> Result<()> {
    let root: Value = serde_json::from_str(text)?;
    if root["type"] != "FeatureCollection" {
        return Err(Error::Integrity("root type must be FeatureCollection".into()));
    }
    let features = root["features"]
        .as_array()
        .ok_or_else(|| Error::Integrity("features must be an array".into()))?;
    for (i, feature) in features.iter().enumerate() {
        let ctx = format!("feature {i}");
        if feature["type"] != "Feature" {
            return Err(Error::Integrity(format!("{ctx}: type must be Feature")));
        }
        let geometry = &feature["geometry"];
        match geometry["type"].as_str() {
            Some("Point") => check_position(&geometry["coordinates"], &ctx)?,
            Some("Polygon") => {
                let rings = geometry["coordinates"]
                    .as_array()
                    .ok_or_else(|| Error::Integrity(format!("{ctx}: polygon coordinates")))?;
                if rings.is_empty() {
                    return Err(Error::Integrity(format!("{ctx}: polygon with no rings")));
                }
                for ring in rings {
                    let pts = ring
                        .as_array()
                        .ok_or_else(|| Error::Integrity(format!("{ctx}: ring must be an array")))?;
                    if pts.len() < 4 {
                        return Err(Error::Integrity(format!("{ctx}: ring has {} < 4 positions", pts.len())));
                    }
                    if pts.first() != pts.last() {
                        return Err(Error::Integrity(format!("{ctx}: ring is not closed")));
                    }
                    for p in pts {
                        check_position(p, &ctx)?;
                    }
                }
            }
            other => {
                return Err(Error::Integrity(format!(
                    "{ctx}: unsupported geometry type {other:?}"
                )))
            }
        }
        if let Some(properties) = feature["properties"].as_object() {
            for key in ["pi", "score"] {
                if let Some(v) = properties.get(key) {
                    let x = v
                        .as_f64()
                        .ok_or_else(|| Error::Integrity(format!("{ctx}: {key} must be numeric")))?;
                    if !(0.0..=1.0).contains(&x) {
                        return Err(Error::Integrity(format!("{ctx}: {key} = {x} out of [0, 1]")));
                    }
                }
            }
        }
    }
    Ok(())
}
