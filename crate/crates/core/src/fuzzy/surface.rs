//! Parametric possibility surfaces over geographic space.
//!
//! A surface combines a distance set (km from the anchor's footprint
//! boundary, 0 inside) with an optional angular set around a preferred
//! bearing. Possibility at a point is the t-norm combination of the two
//! component memberships.

use serde::{Deserialize, Serialize};

use crate::config::FuzzyConfig;
use crate::error::{Error, Result};
use crate::extract::{MentionKind, RelationTerm};
use crate::gazetteer::{Footprint, Gazetteer, PlaceEntry};
use crate::geo::{distance_to_ring_km, point_in_ring, BBox, GeoPoint};

use super::set::{AngularSet, FuzzySet1D, Hedge, TNorm};

/// Anchor geometry for a surface: a footprint plus the synthesized extent
/// radius used when the footprint is a bare point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub footprint: Footprint,
    pub radius_km: f64,
}

impl Anchor {
    /// Distance in km from `p` to the anchor boundary; 0 inside the
    /// footprint (or within the synthesized radius of a point footprint).
    pub fn boundary_distance_km(&self, p: &GeoPoint) -> f64 {
        match &self.footprint {
            Footprint::Point { point } => (point.distance_km(p) - self.radius_km).max(0.0),
            Footprint::Polygon { ring } => {
                if point_in_ring(p, ring) {
                    0.0
                } else {
                    distance_to_ring_km(p, ring)
                }
            }
        }
    }

    pub fn centroid(&self) -> GeoPoint {
        self.footprint.centroid()
    }

    /// Bounding box of the anchor extent (point footprints are buffered by
    /// the synthesized radius).
    pub fn bbox(&self) -> BBox {
        match &self.footprint {
            Footprint::Point { .. } => self.footprint.bbox().buffer_km(self.radius_km),
            Footprint::Polygon { .. } => self.footprint.bbox(),
        }
    }
}

/// A possibility distribution over geographic space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Surface {
    pub anchor: Anchor,
    pub distance_set: FuzzySet1D,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction_set: Option<AngularSet>,
    pub combiner: TNorm,
}

impl Surface {
    /// Possibility at `p`. The direction component counts as 1 inside the
    /// anchor footprint (where a bearing is undefined) and when no
    /// direction set is present.
    pub fn possibility_at(&self, p: &GeoPoint) -> f64 {
        let d = self.anchor.boundary_distance_km(p);
        let mu_dist = self.distance_set.membership(d);
        let mu_dir = match &self.direction_set {
            Some(set) if d > 0.0 => set.membership(self.anchor.centroid().bearing_deg(p)),
            _ => 1.0,
        };
        self.combiner.apply(mu_dist, mu_dir)
    }

    /// Axis-aligned box containing the alpha-cut, from the distance set's
    /// inverse at `alpha` around the anchor box. Unbounded distance sets
    /// fall back to `horizon_km`. Boxes nest: lower alpha gives a larger
    /// (or equal) box.
    pub fn alpha_cut_bbox(&self, alpha: f64, horizon_km: f64) -> Result<BBox> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::AlphaRange(alpha));
        }
        let reach = match self.distance_set.cut_upper(alpha) {
            Some(d) => d.max(0.0).min(horizon_km),
            None => horizon_km,
        };
        Ok(self.anchor.bbox().buffer_km(reach))
    }

    /// Box containing the support (possibility > 0), capped at `horizon_km`.
    pub fn support_bbox(&self, horizon_km: f64) -> BBox {
        let reach = match self.distance_set.support_upper() {
            Some(d) => d.max(0.0).min(horizon_km),
            None => horizon_km,
        };
        self.anchor.bbox().buffer_km(reach)
    }

    /// Representative point of the maximum-possibility region: the anchor
    /// centroid. Exact for sets whose core touches distance 0; the center
    /// of symmetry otherwise.
    pub fn peak_point(&self) -> GeoPoint {
        self.anchor.centroid()
    }
}

/// Anchor for a gazetteer entry under the configured per-level radii.
pub fn anchor_for(entry: &PlaceEntry, cfg: &FuzzyConfig) -> Anchor {
    let radius_km = match entry.footprint {
        Footprint::Point { .. } => cfg.level_radius_km(entry.level),
        Footprint::Polygon { .. } => 0.0,
    };
    Anchor {
        footprint: entry.footprint.clone(),
        radius_km,
    }
}

/// Surface for an absolute reference to a place: the "at" distance set
/// anchored on its footprint.
pub fn surface_for_place(entry: &PlaceEntry, cfg: &FuzzyConfig) -> Surface {
    Surface {
        anchor: anchor_for(entry, cfg),
        distance_set: FuzzySet1D::new(cfg.terms.at),
        direction_set: None,
        combiner: cfg.combiner,
    }
}

/// Surface for a relative expression anchored on `anchor_entry`.
pub fn surface_for_relation(
    relation: &RelationTerm,
    hedge: Option<Hedge>,
    anchor_entry: &PlaceEntry,
    cfg: &FuzzyConfig,
) -> Surface {
    let anchor = anchor_for(anchor_entry, cfg);
    let (distance_shape, direction_set, combiner) = match relation {
        RelationTerm::At => (cfg.terms.at, None, cfg.combiner),
        RelationTerm::Near => (cfg.terms.near, None, cfg.combiner),
        RelationTerm::WithinWalkingDistance => {
            (cfg.terms.within_walking_distance, None, cfg.combiner)
        }
        RelationTerm::Far => (cfg.terms.far, None, cfg.combiner),
        RelationTerm::CardinalOf { direction } => (
            cfg.terms.cardinal.envelope,
            Some(AngularSet {
                bearing_deg: direction.bearing_deg(),
                core_half_deg: cfg.terms.cardinal.core_half_deg,
                support_half_deg: cfg.terms.cardinal.support_half_deg,
            }),
            cfg.terms.cardinal.combiner,
        ),
    };
    let mut distance_set = FuzzySet1D::new(distance_shape);
    if let Some(h) = hedge {
        distance_set = distance_set.with_hedge(h);
    }
    Surface {
        anchor,
        distance_set,
        direction_set,
        combiner,
    }
}

/// Surface for an extracted mention (absolute or relative).
pub fn surface_for_mention(
    kind: &MentionKind,
    gaz: &Gazetteer,
    cfg: &FuzzyConfig,
) -> Result<Surface> {
    match kind {
        MentionKind::Absolute { place_id } => {
            let entry = gaz
                .get(place_id)
                .ok_or_else(|| Error::UnknownPlace(place_id.clone()))?;
            Ok(surface_for_place(entry, cfg))
        }
        MentionKind::Relative {
            relation,
            hedge,
            anchor_place_id,
        } => {
            let entry = gaz
                .get(anchor_place_id)
                .ok_or_else(|| Error::UnknownPlace(anchor_place_id.clone()))?;
            Ok(surface_for_relation(relation, *hedge, entry, cfg))
        }
    }
}
