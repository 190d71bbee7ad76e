//! Gridded possibility surfaces: multi-source fusion, defuzzification,
//! and rectilinear footprint extraction.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{point_in_ring, BBox, GeoPoint, Ring};

use super::surface::Surface;

/// Grid construction parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Cell edge in degrees before any coarsening.
    pub cell_deg: f64,
    /// Alpha level whose cut boxes clip the grid extent.
    pub clip_alpha: f64,
    /// Cap on cells per axis; the grid coarsens uniformly beyond it.
    pub max_cells_per_axis: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            cell_deg: 0.01,
            clip_alpha: 0.05,
            max_cells_per_axis: 512,
        }
    }
}

/// How to combine several surfaces into one.
#[derive(Debug, Clone, PartialEq)]
pub enum FusionMode {
    Min,
    Max,
    WeightedAverage { weights: Vec<f64> },
}

/// A possibility surface sampled on a uniform lon/lat grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSurface {
    pub bbox: BBox,
    pub cell_deg: f64,
    pub nx: usize,
    pub ny: usize,
    /// Row-major cell values: index `iy * nx + ix`.
    pub values: Vec<f64>,
}

impl GridSurface {
    pub fn value(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.nx + ix]
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> GeoPoint {
        GeoPoint::new(
            self.bbox.min_lon + (ix as f64 + 0.5) * self.cell_deg,
            self.bbox.min_lat + (iy as f64 + 0.5) * self.cell_deg,
        )
    }

    pub fn cell_bbox(&self, ix: usize, iy: usize) -> BBox {
        BBox::new(
            self.bbox.min_lon + ix as f64 * self.cell_deg,
            self.bbox.min_lat + iy as f64 * self.cell_deg,
            self.bbox.min_lon + (ix + 1) as f64 * self.cell_deg,
            self.bbox.min_lat + (iy + 1) as f64 * self.cell_deg,
        )
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.ny).flat_map(move |iy| (0..self.nx).map(move |ix| (ix, iy, self.value(ix, iy))))
    }

    /// Count and joint bounding box of the cells satisfying `pred`.
    pub fn summarize_cells<F: Fn(f64) -> bool>(&self, pred: F) -> (usize, Option<BBox>) {
        let mut count = 0;
        let mut bbox: Option<BBox> = None;
        for (ix, iy, v) in self.cells() {
            if pred(v) {
                count += 1;
                let cb = self.cell_bbox(ix, iy);
                bbox = Some(match bbox {
                    Some(b) => b.union(&cb),
                    None => cb,
                });
            }
        }
        (count, bbox)
    }
}

/// Fuse possibility surfaces onto a shared grid.
///
/// The grid is clipped to the union of the inputs' `clip_alpha`-cut boxes
/// at `spec.cell_deg` resolution, coarsened uniformly when it would exceed
/// `spec.max_cells_per_axis` cells per axis.
pub fn fuse(
    surfaces: &[Surface],
    mode: &FusionMode,
    spec: &GridSpec,
    horizon_km: f64,
) -> Result<GridSurface> {
    if surfaces.is_empty() {
        return Err(Error::EmptyFusion);
    }
    if let FusionMode::WeightedAverage { weights } = mode {
        if weights.len() != surfaces.len() {
            return Err(Error::FusionWeights(format!(
                "{} weights for {} surfaces",
                weights.len(),
                surfaces.len()
            )));
        }
        if weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
            return Err(Error::FusionWeights("negative or non-finite weight".into()));
        }
        if weights.iter().sum::<f64>() <= 0.0 {
            return Err(Error::FusionWeights("weights sum to zero".into()));
        }
    }

    let mut bbox = surfaces[0].alpha_cut_bbox(spec.clip_alpha, horizon_km)?;
    for s in &surfaces[1..] {
        bbox = bbox.union(&s.alpha_cut_bbox(spec.clip_alpha, horizon_km)?);
    }

    let span_lon = (bbox.max_lon - bbox.min_lon).max(spec.cell_deg);
    let span_lat = (bbox.max_lat - bbox.min_lat).max(spec.cell_deg);
    let mut cell = spec.cell_deg;
    let need = |cell: f64| -> usize {
        ((span_lon / cell).ceil() as usize).max((span_lat / cell).ceil() as usize)
    };
    if need(cell) > spec.max_cells_per_axis {
        let mut factor = (need(cell) as f64 / spec.max_cells_per_axis as f64).ceil();
        while need(spec.cell_deg * factor) > spec.max_cells_per_axis {
            factor += 1.0;
        }
        cell = spec.cell_deg * factor;
    }
    let nx = ((span_lon / cell).ceil() as usize).max(1);
    let ny = ((span_lat / cell).ceil() as usize).max(1);

    let grid_bbox = BBox::new(
        bbox.min_lon,
        bbox.min_lat,
        bbox.min_lon + nx as f64 * cell,
        bbox.min_lat + ny as f64 * cell,
    );
    let mut out = GridSurface {
        bbox: grid_bbox,
        cell_deg: cell,
        nx,
        ny,
        values: vec![0.0; nx * ny],
    };

    for iy in 0..ny {
        for ix in 0..nx {
            let p = out.cell_center(ix, iy);
            let v = match mode {
                FusionMode::Min => surfaces
                    .iter()
                    .map(|s| s.possibility_at(&p))
                    .fold(f64::INFINITY, f64::min),
                FusionMode::Max => surfaces
                    .iter()
                    .map(|s| s.possibility_at(&p))
                    .fold(0.0, f64::max),
                FusionMode::WeightedAverage { weights } => {
                    let total: f64 = weights.iter().sum();
                    surfaces
                        .iter()
                        .zip(weights)
                        .map(|(s, w)| w * s.possibility_at(&p))
                        .sum::<f64>()
                        / total
                }
            };
            out.values[iy * nx + ix] = v;
        }
    }
    Ok(out)
}

/// A polygon as one exterior ring plus any holes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPolygon {
    pub exterior: Ring,
    pub holes: Vec<Ring>,
}

/// Crisp summary of a gridded surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    /// Centroid of the cells attaining the maximum possibility.
    pub point: GeoPoint,
    /// Rectilinear boundary of the footprint cut, primary polygon first.
    pub footprint: Vec<GridPolygon>,
    /// Maximum possibility on the grid.
    pub max_pi: f64,
    /// Cut level the footprint was traced at: min(0.5, max_pi).
    pub cut_level: f64,
}

/// Collapse a gridded surface to its most-possible point and a footprint
/// polygon at the 0.5 cut (or at the peak level when the peak is below
/// 0.5, so the footprint is never empty).
pub fn defuzzify(grid: &GridSurface) -> Result<Resolution> {
    let max_pi = grid.max_value();
    if max_pi <= 0.0 {
        return Err(Error::NoLocation);
    }

    let peak_tol = 1e-12;
    let mut sum_lon = 0.0;
    let mut sum_lat = 0.0;
    let mut n_peak = 0usize;
    for (ix, iy, v) in grid.cells() {
        if v >= max_pi - peak_tol {
            let c = grid.cell_center(ix, iy);
            sum_lon += c.lon;
            sum_lat += c.lat;
            n_peak += 1;
        }
    }
    let point = GeoPoint::new(sum_lon / n_peak as f64, sum_lat / n_peak as f64);

    let cut_level = max_pi.min(0.5);
    let mask: BTreeSet<(i64, i64)> = grid
        .cells()
        .filter(|&(_, _, v)| v >= cut_level - peak_tol)
        .map(|(ix, iy, _)| (ix as i64, iy as i64))
        .collect();
    let footprint = trace_polygons(&mask, grid, &point);

    Ok(Resolution {
        point,
        footprint,
        max_pi,
        cut_level,
    })
}

/// Trace the rectilinear boundary of a cell mask into polygons. The
/// primary polygon (containing `focus`, else the largest) comes first.
fn trace_polygons(
    mask: &BTreeSet<(i64, i64)>,
    grid: &GridSurface,
    focus: &GeoPoint,
) -> Vec<GridPolygon> {
    let loops = trace_loops(mask);

    let to_geo = |v: &(i64, i64)| -> GeoPoint {
        GeoPoint::new(
            grid.bbox.min_lon + v.0 as f64 * grid.cell_deg,
            grid.bbox.min_lat + v.1 as f64 * grid.cell_deg,
        )
    };

    // Signed area > 0 means counterclockwise: an exterior ring under the
    // mask-on-left walking convention; holes come out clockwise.
    let signed_area = |l: &[(i64, i64)]| -> f64 {
        l.windows(2)
            .map(|w| (w[0].0 * w[1].1 - w[1].0 * w[0].1) as f64)
            .sum::<f64>()
            / 2.0
    };

    let mut exteriors: Vec<(Ring, f64)> = Vec::new();
    let mut holes: Vec<(Ring, GeoPoint)> = Vec::new();
    for l in &loops {
        let area = signed_area(l);
        let ring: Ring = l.iter().map(&to_geo).collect();
        if area > 0.0 {
            exteriors.push((ring, area));
        } else {
            // A representative point strictly inside the hole: the center
            // of the unmasked cell on the right of the first edge.
            let (a, b) = (l[0], l[1]);
            let (dx, dy) = (b.0 - a.0, b.1 - a.1);
            // Right of direction (dx, dy) is (dy, -dx); the candidate cell
            // has its lower-left corner at the edge midpoint shifted right.
            let cell = if dx == 1 {
                (a.0, a.1 - 1)
            } else if dx == -1 {
                (b.0, a.1)
            } else if dy == 1 {
                (a.0, a.1)
            } else {
                (a.0 - 1, b.1)
            };
            let rep = GeoPoint::new(
                grid.bbox.min_lon + (cell.0 as f64 + 0.5) * grid.cell_deg,
                grid.bbox.min_lat + (cell.1 as f64 + 0.5) * grid.cell_deg,
            );
            holes.push((ring, rep));
        }
    }

    let mut polys: Vec<(GridPolygon, f64)> = exteriors
        .into_iter()
        .map(|(ring, area)| (GridPolygon { exterior: ring, holes: Vec::new() }, area))
        .collect();

    for (ring, rep) in holes {
        // Attach the hole to the smallest exterior that contains it.
        let mut best: Option<(usize, f64)> = None;
        for (i, (poly, area)) in polys.iter().enumerate() {
            if point_in_ring(&rep, &poly.exterior) && best.is_none_or(|(_, a)| *area < a) {
                best = Some((i, *area));
            }
        }
        if let Some((i, _)) = best {
            polys[i].0.holes.push(ring);
        }
    }

    // Primary polygon first: the one containing the focus point, else the
    // largest, ties broken by first vertex.
    polys.sort_by(|(pa, aa), (pb, ab)| {
        let fa = point_in_ring(focus, &pa.exterior);
        let fb = point_in_ring(focus, &pb.exterior);
        fb.cmp(&fa)
            .then_with(|| ab.partial_cmp(aa).unwrap_or(std::cmp::Ordering::Equal))
            .then_with(|| {
                let ka = pa.exterior.first().map(|p| (p.lon, p.lat));
                let kb = pb.exterior.first().map(|p| (p.lon, p.lat));
                ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
            })
    });
    polys.into_iter().map(|(p, _)| p).collect()
}

/// Walk the directed boundary edges of a cell mask into closed loops.
/// Edges keep the mask on their left; at ambiguous (diagonal) vertices the
/// walk prefers the left turn, which keeps each loop around one component.
fn trace_loops(mask: &BTreeSet<(i64, i64)>) -> Vec<Vec<(i64, i64)>> {
    type V = (i64, i64);
    let mut outgoing: BTreeMap<V, Vec<V>> = BTreeMap::new();
    let mut add = |from: V, to: V| outgoing.entry(from).or_default().push(to);

    for &(x, y) in mask {
        if !mask.contains(&(x, y - 1)) {
            add((x, y), (x + 1, y)); // bottom, +x
        }
        if !mask.contains(&(x + 1, y)) {
            add((x + 1, y), (x + 1, y + 1)); // right, +y
        }
        if !mask.contains(&(x, y + 1)) {
            add((x + 1, y + 1), (x, y + 1)); // top, -x
        }
        if !mask.contains(&(x - 1, y)) {
            add((x, y + 1), (x, y)); // left, -y
        }
    }
    for targets in outgoing.values_mut() {
        targets.sort();
    }

    let mut used: BTreeSet<(V, V)> = BTreeSet::new();
    let mut loops = Vec::new();

    loop {
        // Deterministic start: smallest unused edge.
        let start = outgoing.iter().find_map(|(from, tos)| {
            tos.iter()
                .find(|to| !used.contains(&(*from, **to)))
                .map(|to| (*from, *to))
        });
        let Some((start_v, first_to)) = start else { break };

        let mut path = vec![start_v, first_to];
        used.insert((start_v, first_to));
        let mut prev = start_v;
        let mut cur = first_to;
        while cur != start_v {
            let din = (cur.0 - prev.0, cur.1 - prev.1);
            let candidates = outgoing.get(&cur).expect("boundary edges form closed loops");
            // Prefer the left-most turn: left > straight > right.
            let next = candidates
                .iter()
                .filter(|to| !used.contains(&(cur, **to)))
                .max_by_key(|to| {
                    let dout = (to.0 - cur.0, to.1 - cur.1);
                    let cross = din.0 * dout.1 - din.1 * dout.0;
                    let dot = din.0 * dout.0 + din.1 * dout.1;
                    (cross, dot)
                })
                .copied()
                .expect("boundary walk must continue until the loop closes");
            used.insert((cur, next));
            path.push(next);
            prev = cur;
            cur = next;
        }
        loops.push(simplify_collinear(path));
    }
    loops
}

/// Drop intermediate vertices along straight runs; keeps the loop closed.
fn simplify_collinear(path: Vec<(i64, i64)>) -> Vec<(i64, i64)> {
    debug_assert!(path.len() >= 5 && path.first() == path.last());
    let closed = &path[..path.len() - 1];
    let n = closed.len();
    let mut kept: Vec<(i64, i64)> = Vec::with_capacity(n);
    for i in 0..n {
        let prev = closed[(i + n - 1) % n];
        let cur = closed[i];
        let next = closed[(i + 1) % n];
        let din = (cur.0 - prev.0, cur.1 - prev.1);
        let dout = (next.0 - cur.0, next.1 - cur.1);
        if din.0 * dout.1 - din.1 * dout.0 != 0 {
            kept.push(cur);
        }
    }
    let mut out = kept;
    if let Some(&first) = out.first() {
        out.push(first);
    }
    out
}
