//! Gazetteer of named places: footprints, alternate names, granularity
//! levels, and the place-area containment hierarchy.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{ring_centroid, ring_is_closed, BBox, GeoPoint};

/// Scale stratum of a place, finest first. The parent of an entry must sit
/// at a strictly coarser (numerically greater) level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GranularityLevel {
    Landmark = 0,
    Neighborhood = 1,
    City = 2,
    Region = 3,
    Country = 4,
}

impl GranularityLevel {
    pub const ALL: [GranularityLevel; 5] = [
        GranularityLevel::Landmark,
        GranularityLevel::Neighborhood,
        GranularityLevel::City,
        GranularityLevel::Region,
        GranularityLevel::Country,
    ];

    pub fn ordinal(self) -> u8 {
        self as u8
    }

    pub fn from_ordinal(n: u8) -> Option<Self> {
        Self::ALL.get(n as usize).copied()
    }

    /// |Δ ordinal| between two levels.
    pub fn distance(self, other: Self) -> u8 {
        self.ordinal().abs_diff(other.ordinal())
    }
}

impl fmt::Display for GranularityLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            GranularityLevel::Landmark => "landmark",
            GranularityLevel::Neighborhood => "neighborhood",
            GranularityLevel::City => "city",
            GranularityLevel::Region => "region",
            GranularityLevel::Country => "country",
        };
        f.write_str(name)
    }
}

impl FromStr for GranularityLevel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "landmark" => Ok(GranularityLevel::Landmark),
            "neighborhood" => Ok(GranularityLevel::Neighborhood),
            "city" => Ok(GranularityLevel::City),
            "region" => Ok(GranularityLevel::Region),
            "country" => Ok(GranularityLevel::Country),
            other => Err(format!("unknown granularity level: {other:?}")),
        }
    }
}

/// Geographic footprint: a point, or a closed polygon ring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Footprint {
    Point { point: GeoPoint },
    Polygon { ring: Vec<GeoPoint> },
}

impl Footprint {
    /// Representative point: the point itself, or the ring centroid.
    pub fn centroid(&self) -> GeoPoint {
        match self {
            Footprint::Point { point } => *point,
            Footprint::Polygon { ring } => ring_centroid(ring),
        }
    }

    /// Bounding box of the geometry alone (no synthesized extent).
    pub fn bbox(&self) -> BBox {
        match self {
            Footprint::Point { point } => BBox::from_point(*point),
            Footprint::Polygon { ring } => {
                BBox::from_points(ring).expect("validated ring is non-empty")
            }
        }
    }
}

/// One gazetteer entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaceEntry {
    pub place_id: String,
    pub primary_name: String,
    pub alt_names: Vec<String>,
    pub footprint: Footprint,
    pub level: GranularityLevel,
    pub parent_id: Option<String>,
    /// Disambiguation prior in [0, 1]; 0.5 when the column is empty.
    pub importance: f64,
}

fn normalize_name(name: &str) -> String {
    name.trim().to_lowercase()
}

/// Immutable place dictionary with a normalized-name index and a
/// containment forest.
#[derive(Debug, Clone, Default)]
pub struct Gazetteer {
    entries: BTreeMap<String, PlaceEntry>,
    name_index: BTreeMap<String, BTreeSet<String>>,
}

impl Gazetteer {
    /// Build from entries, validating every invariant. All violations are
    /// reported together.
    pub fn from_entries(entries: Vec<PlaceEntry>) -> Result<Self> {
        let mut violations = Vec::new();
        let mut map: BTreeMap<String, PlaceEntry> = BTreeMap::new();
        for e in entries {
            if e.place_id.is_empty() {
                violations.push("entry with empty place_id".to_string());
                continue;
            }
            if map.insert(e.place_id.clone(), e.clone()).is_some() {
                violations.push(format!("{}: duplicate place_id", e.place_id));
            }
        }

        for (id, e) in &map {
            match &e.footprint {
                Footprint::Point { point } => {
                    if !point.in_range() {
                        violations.push(format!(
                            "{id}: coordinate out of range ({}, {})",
                            point.lon, point.lat
                        ));
                    }
                }
                Footprint::Polygon { ring } => {
                    if !ring_is_closed(ring) {
                        violations.push(format!(
                            "{id}: polygon ring must be closed with at least 4 vertices"
                        ));
                    }
                    for p in ring {
                        if !p.in_range() {
                            violations.push(format!(
                                "{id}: coordinate out of range ({}, {})",
                                p.lon, p.lat
                            ));
                        }
                    }
                }
            }
            if !(0.0..=1.0).contains(&e.importance) {
                violations.push(format!("{id}: importance out of [0, 1]: {}", e.importance));
            }
            if let Some(parent) = &e.parent_id {
                match map.get(parent) {
                    None => violations.push(format!("{id}: unknown parent_id {parent:?}")),
                    Some(p) => {
                        if p.level <= e.level {
                            violations.push(format!(
                                "{id}: parent {parent} level {} is not coarser than {}",
                                p.level, e.level
                            ));
                        }
                    }
                }
            }
        }

        // Cycle check (covers self-loops; level ordering already forbids
        // longer cycles among valid rows, but broken rows may coexist).
        for id in map.keys() {
            let mut seen = BTreeSet::new();
            let mut cur = Some(id.clone());
            while let Some(c) = cur {
                if !seen.insert(c.clone()) {
                    violations.push(format!("{id}: cyclic containment through {c}"));
                    break;
                }
                cur = map.get(&c).and_then(|e| e.parent_id.clone());
            }
        }

        if !violations.is_empty() {
            violations.sort();
            violations.dedup();
            return Err(Error::GazetteerInvalid { violations });
        }

        let mut name_index: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (id, e) in &map {
            name_index
                .entry(normalize_name(&e.primary_name))
                .or_default()
                .insert(id.clone());
            for alt in &e.alt_names {
                name_index
                    .entry(normalize_name(alt))
                    .or_default()
                    .insert(id.clone());
            }
        }
        Ok(Self {
            entries: map,
            name_index,
        })
    }

    /// Load from TSV. Header row required; columns:
    /// `place_id  primary_name  alt_names(|-sep)  level  lon  lat
    ///  polygon("lon lat;lon lat;...")  parent_id  importance`,
    /// the last three optional.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_tsv(&text)
    }

    /// Parse gazetteer TSV content. See [`Gazetteer::load`].
    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut violations = Vec::new();
        let mut entries = Vec::new();
        let mut lines = text.lines().enumerate();

        match lines.next() {
            Some((_, header)) if header.starts_with("place_id") => {}
            _ => {
                return Err(Error::GazetteerInvalid {
                    violations: vec!["line 1: missing header row starting with place_id".into()],
                })
            }
        }

        for (idx, line) in lines {
            let lineno = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            match parse_row(line) {
                Ok(entry) => entries.push(entry),
                Err(msg) => violations.push(format!("line {lineno}: {msg}")),
            }
        }

        if !violations.is_empty() {
            return Err(Error::GazetteerInvalid { violations });
        }
        Self::from_entries(entries)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, place_id: &str) -> Option<&PlaceEntry> {
        self.entries.get(place_id)
    }

    pub fn entries(&self) -> impl Iterator<Item = &PlaceEntry> {
        self.entries.values()
    }

    /// True when the normalized name resolves to at least one entry.
    pub fn has_name(&self, name: &str) -> bool {
        self.name_index.contains_key(&normalize_name(name))
    }

    /// All entries whose primary or alternate name matches, descending
    /// importance, ties by place_id. Case and surrounding whitespace of the
    /// query are ignored.
    pub fn lookup(&self, name: &str) -> Vec<&PlaceEntry> {
        let Some(ids) = self.name_index.get(&normalize_name(name)) else {
            return Vec::new();
        };
        let mut found: Vec<&PlaceEntry> = ids.iter().filter_map(|id| self.entries.get(id)).collect();
        found.sort_by(|a, b| {
            b.importance
                .partial_cmp(&a.importance)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| a.place_id.cmp(&b.place_id))
        });
        found
    }

    /// True iff `ancestor` is on `descendant`'s parent chain (reflexive).
    pub fn contains(&self, ancestor: &str, descendant: &str) -> Result<bool> {
        if !self.entries.contains_key(ancestor) {
            return Err(Error::UnknownPlace(ancestor.to_string()));
        }
        if !self.entries.contains_key(descendant) {
            return Err(Error::UnknownPlace(descendant.to_string()));
        }
        let mut cur = Some(descendant.to_string());
        while let Some(id) = cur {
            if id == ancestor {
                return Ok(true);
            }
            cur = self.entries.get(&id).and_then(|e| e.parent_id.clone());
        }
        Ok(false)
    }

    /// Either direction of the place-area relation.
    pub fn related(&self, a: &str, b: &str) -> Result<bool> {
        Ok(self.contains(a, b)? || self.contains(b, a)?)
    }

    pub fn granularity_of(&self, place_id: &str) -> Result<GranularityLevel> {
        self.entries
            .get(place_id)
            .map(|e| e.level)
            .ok_or_else(|| Error::UnknownPlace(place_id.to_string()))
    }
}

fn parse_row(line: &str) -> std::result::Result<PlaceEntry, String> {
    let fields: Vec<&str> = line.split('\t').collect();
    if !(6..=9).contains(&fields.len()) {
        return Err(format!("expected 6..=9 tab-separated fields, got {}", fields.len()));
    }
    let get = |i: usize| fields.get(i).map(|s| s.trim()).unwrap_or("");

    let place_id = get(0);
    if place_id.is_empty() {
        return Err("empty place_id".into());
    }
    let primary_name = get(1);
    if primary_name.is_empty() {
        return Err("empty primary_name".into());
    }
    let alt_names: Vec<String> = get(2)
        .split('|')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect();
    let level: GranularityLevel = get(3).parse()?;
    let lon: f64 = get(4).parse().map_err(|_| format!("bad lon {:?}", get(4)))?;
    let lat: f64 = get(5).parse().map_err(|_| format!("bad lat {:?}", get(5)))?;

    let footprint = if get(6).is_empty() {
        Footprint::Point {
            point: GeoPoint::new(lon, lat),
        }
    } else {
        let mut ring = Vec::new();
        for pair in get(6).split(';') {
            let mut it = pair.split_whitespace();
            let (Some(x), Some(y)) = (it.next(), it.next()) else {
                return Err(format!("bad polygon vertex {pair:?}"));
            };
            let x: f64 = x.parse().map_err(|_| format!("bad polygon lon {x:?}"))?;
            let y: f64 = y.parse().map_err(|_| format!("bad polygon lat {y:?}"))?;
            ring.push(GeoPoint::new(x, y));
        }
        Footprint::Polygon { ring }
    };

    let parent_id = match get(7) {
        "" => None,
        p => Some(p.to_string()),
    };
    let importance = match get(8) {
        "" => 0.5,
        v => v.parse().map_err(|_| format!("bad importance {v:?}"))?,
    };

    Ok(PlaceEntry {
        place_id: place_id.to_string(),
        primary_name: primary_name.to_string(),
        alt_names,
        footprint,
        level,
        parent_id,
        importance,
    })
}
