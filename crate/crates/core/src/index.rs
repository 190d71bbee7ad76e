//! Weighted spatial term frequencies, the two-level textual/spatial
//! index, and inter-document spatial similarity.
//!
//! Level 1 is an inverted index from spatial term keys to raw-count
//! postings. Level 2 stratifies space per granularity level into square
//! lon/lat cells; a document lands in every cell its mention surfaces'
//! 0.5-cut boxes touch. Absolute mentions key on the place id; relative
//! mentions key on `relation@anchor` and also contribute their count to
//! the bare anchor key, preserving both readings of "the spatial term".

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::FuzzyConfig;
use crate::corpus::CorpusStore;
use crate::error::{Error, Result};
use crate::extract::SpatialMention;
use crate::fuzzy::surface_for_mention;
use crate::gazetteer::{Gazetteer, GranularityLevel};
use crate::geo::BBox;

/// Spatial term key: a place id, or `relation@place_id`.
pub type TermKey = String;

/// Cell edge in degrees per granularity level, finest first.
pub const LEVEL_CELL_DEG: [f64; 5] = [0.01, 0.05, 0.1, 0.5, 2.0];

/// A mention footprint covering more than this many cells at some level
/// is stored as a bbox posting at that level instead of being exploded
/// into cells (a country footprint would cover ~10^6 landmark cells).
pub const MAX_CELLS_PER_MENTION: usize = 4096;

/// Weighted spatial term frequency: `sf * (log2(N / n) + 1)`.
///
/// `n_docs` is the corpus size N and `df` the number of documents
/// containing the term. Exact IEEE double evaluation.
pub fn compute_swf(sf: u64, n_docs: u64, df: u64) -> Result<f64> {
    if sf == 0 {
        if df > n_docs {
            return Err(Error::Inconsistency(format!(
                "df {df} exceeds corpus size {n_docs}"
            )));
        }
        return Ok(0.0);
    }
    if df == 0 {
        return Err(Error::Inconsistency(
            "term occurs but document frequency is zero".into(),
        ));
    }
    if df > n_docs {
        return Err(Error::Inconsistency(format!(
            "df {df} exceeds corpus size {n_docs}"
        )));
    }
    Ok(sf as f64 * ((n_docs as f64 / df as f64).log2() + 1.0))
}

/// Per-document weighted spatial term frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialTermVector {
    pub doc_id: String,
    pub weights: BTreeMap<TermKey, f64>,
}

impl SpatialTermVector {
    pub fn weight(&self, key: &str) -> f64 {
        self.weights.get(key).copied().unwrap_or(0.0)
    }
}

/// Cosine similarity of two spatial term vectors over the union of their
/// keys; 0 when either vector is all-zero. Weights are non-negative, so
/// the result lies in [0, 1].
pub fn spatial_similarity(vi: &SpatialTermVector, vj: &SpatialTermVector) -> f64 {
    let mut dot = 0.0;
    for (key, wi) in &vi.weights {
        dot += wi * vj.weight(key);
    }
    let ni: f64 = vi.weights.values().map(|w| w * w).sum();
    let nj: f64 = vj.weights.values().map(|w| w * w).sum();
    if ni <= 0.0 || nj <= 0.0 {
        return 0.0;
    }
    dot / (ni * nj).sqrt()
}

/// One level-1 posting: a document and the raw spatial term count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    pub doc_id: String,
    pub sf: u64,
}

/// Cell coordinates at a given level: floor(lon / edge), floor(lat / edge).
pub type CellId = (i64, i64);

fn cells_covering(bbox: &BBox, edge: f64) -> impl Iterator<Item = CellId> {
    let x0 = (bbox.min_lon / edge).floor() as i64;
    let x1 = (bbox.max_lon / edge).floor() as i64;
    let y0 = (bbox.min_lat / edge).floor() as i64;
    let y1 = (bbox.max_lat / edge).floor() as i64;
    (x0..=x1).flat_map(move |x| (y0..=y1).map(move |y| (x, y)))
}

fn cell_count(bbox: &BBox, edge: f64) -> usize {
    let nx = (bbox.max_lon / edge).floor() as i64 - (bbox.min_lon / edge).floor() as i64 + 1;
    let ny = (bbox.max_lat / edge).floor() as i64 - (bbox.min_lat / edge).floor() as i64 + 1;
    (nx.max(0) as usize).saturating_mul(ny.max(0) as usize)
}

/// Per-level spatial postings: small footprints land in cells, oversized
/// ones are kept as bbox postings checked by direct intersection.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LevelGrid {
    pub cells: BTreeMap<CellId, BTreeSet<String>>,
    pub broad: Vec<(BBox, String)>,
}

impl LevelGrid {
    fn insert(&mut self, bbox: &BBox, edge: f64, doc_id: &str) {
        if cell_count(bbox, edge) > MAX_CELLS_PER_MENTION {
            let posting = (*bbox, doc_id.to_string());
            // Deduplicate; keep the list sorted for reproducible bytes.
            if let Err(pos) = self.broad.binary_search_by(|p| {
                p.1.cmp(&posting.1).then_with(|| {
                    (p.0.min_lon, p.0.min_lat, p.0.max_lon, p.0.max_lat)
                        .partial_cmp(&(bbox.min_lon, bbox.min_lat, bbox.max_lon, bbox.max_lat))
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
            }) {
                self.broad.insert(pos, posting);
            }
            return;
        }
        for cell in cells_covering(bbox, edge) {
            self.cells.entry(cell).or_default().insert(doc_id.to_string());
        }
    }
}

/// The two-level index plus the per-document term vectors.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SpatialIndex {
    /// Level 1: term key -> postings sorted by doc id.
    pub level1: BTreeMap<TermKey, Vec<Posting>>,
    /// Level 2: spatial postings per granularity level.
    pub level2: BTreeMap<GranularityLevel, LevelGrid>,
    /// Per-document weighted term vectors.
    pub vectors: BTreeMap<String, SpatialTermVector>,
    /// Corpus size the weights were computed against.
    pub n_docs: u64,
}

/// Which parts of the index a candidate lookup touched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateTrace {
    /// Granularity level whose cell grid was consulted.
    pub consulted_level: GranularityLevel,
    /// Cell edge in degrees at that level.
    pub cell_deg: f64,
    /// Number of grid cells probed.
    pub cells_probed: usize,
    /// Term keys looked up in level 1.
    pub terms_probed: usize,
}

impl SpatialIndex {
    /// Build the index from extracted mentions. Every mention must
    /// reference a known place. Deterministic for fixed inputs.
    pub fn build(
        corpus: &CorpusStore,
        mentions: &BTreeMap<String, Vec<SpatialMention>>,
        gaz: &Gazetteer,
        fuzzy: &FuzzyConfig,
    ) -> Result<Self> {
        let n_docs = corpus.n_docs() as u64;
        let mut level1: BTreeMap<TermKey, BTreeMap<String, u64>> = BTreeMap::new();
        let mut level2: BTreeMap<GranularityLevel, LevelGrid> = GranularityLevel::ALL
            .into_iter()
            .map(|l| (l, LevelGrid::default()))
            .collect();

        for (doc_id, doc_mentions) in mentions {
            if corpus.get(doc_id).is_none() {
                return Err(Error::Integrity(format!(
                    "mentions reference unknown document {doc_id:?}"
                )));
            }
            for mention in doc_mentions {
                let place_id = mention.kind.place_id();
                if gaz.get(place_id).is_none() {
                    return Err(Error::Integrity(format!(
                        "mention in {doc_id:?} references unknown place {place_id:?}"
                    )));
                }

                let key = mention.kind.term_key();
                *level1
                    .entry(key.clone())
                    .or_default()
                    .entry(doc_id.clone())
                    .or_insert(0) += 1;
                if key != place_id {
                    *level1
                        .entry(place_id.to_string())
                        .or_default()
                        .entry(doc_id.clone())
                        .or_insert(0) += 1;
                }

                let surface = surface_for_mention(&mention.kind, gaz, fuzzy)?;
                let bbox = surface.alpha_cut_bbox(0.5, fuzzy.reach_horizon_km)?;
                for (level, grid) in level2.iter_mut() {
                    let edge = LEVEL_CELL_DEG[level.ordinal() as usize];
                    grid.insert(&bbox, edge, doc_id);
                }
            }
        }

        let level1: BTreeMap<TermKey, Vec<Posting>> = level1
            .into_iter()
            .map(|(key, by_doc)| {
                let postings = by_doc
                    .into_iter()
                    .map(|(doc_id, sf)| Posting { doc_id, sf })
                    .collect();
                (key, postings)
            })
            .collect();

        let mut vectors: BTreeMap<String, SpatialTermVector> = corpus
            .doc_ids()
            .map(|id| {
                (
                    id.to_string(),
                    SpatialTermVector {
                        doc_id: id.to_string(),
                        weights: BTreeMap::new(),
                    },
                )
            })
            .collect();
        for (key, postings) in &level1 {
            let df = postings.len() as u64;
            for posting in postings {
                let swf = compute_swf(posting.sf, n_docs, df)?;
                if let Some(v) = vectors.get_mut(&posting.doc_id) {
                    v.weights.insert(key.clone(), swf);
                }
            }
        }

        Ok(Self {
            level1,
            level2,
            vectors,
            n_docs,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.level1.is_empty()
    }

    /// Documents containing any of `terms`.
    pub fn postings_for(&self, terms: &[TermKey]) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for term in terms {
            if let Some(postings) = self.level1.get(term) {
                out.extend(postings.iter().map(|p| p.doc_id.clone()));
            }
        }
        out
    }

    /// Largest weight any document carries for any of `terms`.
    pub fn max_weight_for(&self, terms: &[TermKey]) -> f64 {
        let mut best = 0.0_f64;
        for term in terms {
            if let Some(postings) = self.level1.get(term) {
                for p in postings {
                    if let Some(v) = self.vectors.get(&p.doc_id) {
                        best = best.max(v.weight(term));
                    }
                }
            }
        }
        best
    }

    /// Candidate documents for a query: the union of level-1 postings for
    /// `query_terms` and level-2 postings for cells at `level` resolution
    /// intersecting `query_region`. Superset-safe with respect to a full
    /// scan of mention surfaces.
    pub fn candidates(
        &self,
        query_region: Option<&BBox>,
        level: GranularityLevel,
        query_terms: &[TermKey],
    ) -> BTreeSet<String> {
        self.candidates_traced(query_region, level, query_terms).0
    }

    /// [`SpatialIndex::candidates`] plus a trace of what was consulted.
    pub fn candidates_traced(
        &self,
        query_region: Option<&BBox>,
        level: GranularityLevel,
        query_terms: &[TermKey],
    ) -> (BTreeSet<String>, CandidateTrace) {
        let mut out = self.postings_for(query_terms);
        let edge = LEVEL_CELL_DEG[level.ordinal() as usize];
        let mut cells_probed = 0;
        if let Some(region) = query_region {
            if let Some(grid) = self.level2.get(&level) {
                for cell in cells_covering(region, edge) {
                    cells_probed += 1;
                    if let Some(docs) = grid.cells.get(&cell) {
                        out.extend(docs.iter().cloned());
                    }
                }
                for (bbox, doc_id) in &grid.broad {
                    if bbox.intersects(region) {
                        out.insert(doc_id.clone());
                    }
                }
            }
        }
        (
            out,
            CandidateTrace {
                consulted_level: level,
                cell_deg: edge,
                cells_probed,
                terms_probed: query_terms.len(),
            },
        )
    }

    /// Persist as `level1.jsonl`, `level2.jsonl`, and `vectors.jsonl` with
    /// stable ordering, so identical inputs serialize byte-identically.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;

        #[derive(Serialize)]
        struct L1Line<'a> {
            term: &'a str,
            postings: &'a [Posting],
        }
        let mut f = std::fs::File::create(dir.join("level1.jsonl"))?;
        writeln!(f, "{}", serde_json::to_string(&serde_json::json!({"n_docs": self.n_docs}))?)?;
        for (term, postings) in &self.level1 {
            writeln!(f, "{}", serde_json::to_string(&L1Line { term, postings })?)?;
        }

        #[derive(Serialize)]
        struct L2Cell<'a> {
            level: GranularityLevel,
            cell: CellId,
            doc_ids: &'a BTreeSet<String>,
        }
        #[derive(Serialize)]
        struct L2Broad<'a> {
            level: GranularityLevel,
            bbox: &'a BBox,
            doc_id: &'a str,
        }
        let mut f = std::fs::File::create(dir.join("level2.jsonl"))?;
        for (level, grid) in &self.level2 {
            for (cell, doc_ids) in &grid.cells {
                writeln!(
                    f,
                    "{}",
                    serde_json::to_string(&L2Cell {
                        level: *level,
                        cell: *cell,
                        doc_ids,
                    })?
                )?;
            }
            for (bbox, doc_id) in &grid.broad {
                writeln!(
                    f,
                    "{}",
                    serde_json::to_string(&L2Broad {
                        level: *level,
                        bbox,
                        doc_id,
                    })?
                )?;
            }
        }

        let mut f = std::fs::File::create(dir.join("vectors.jsonl"))?;
        for vector in self.vectors.values() {
            writeln!(f, "{}", serde_json::to_string(vector)?)?;
        }
        Ok(())
    }

    /// Load an index saved with [`SpatialIndex::save`].
    pub fn load(dir: &Path) -> Result<Self> {
        let mut index = SpatialIndex::default();

        #[derive(Deserialize)]
        struct Header {
            n_docs: u64,
        }
        #[derive(Deserialize)]
        struct L1Line {
            term: String,
            postings: Vec<Posting>,
        }
        let path = dir.join("level1.jsonl");
        let reader = BufReader::new(std::fs::File::open(&path)?);
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            if lineno == 0 {
                let header: Header = serde_json::from_str(&line)
                    .map_err(|e| Error::Integrity(format!("{}:1: {e}", path.display())))?;
                index.n_docs = header.n_docs;
                continue;
            }
            let rec: L1Line = serde_json::from_str(&line)
                .map_err(|e| Error::Integrity(format!("{}:{}: {e}", path.display(), lineno + 1)))?;
            index.level1.insert(rec.term, rec.postings);
        }

        #[derive(Deserialize)]
        #[serde(untagged)]
        enum L2Line {
            Cell {
                level: GranularityLevel,
                cell: CellId,
                doc_ids: BTreeSet<String>,
            },
            Broad {
                level: GranularityLevel,
                bbox: BBox,
                doc_id: String,
            },
        }
        let path = dir.join("level2.jsonl");
        let reader = BufReader::new(std::fs::File::open(&path)?);
        index.level2 = GranularityLevel::ALL
            .into_iter()
            .map(|l| (l, LevelGrid::default()))
            .collect();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: L2Line = serde_json::from_str(&line)
                .map_err(|e| Error::Integrity(format!("{}:{}: {e}", path.display(), lineno + 1)))?;
            match rec {
                L2Line::Cell {
                    level,
                    cell,
                    doc_ids,
                } => {
                    index.level2.entry(level).or_default().cells.insert(cell, doc_ids);
                }
                L2Line::Broad {
                    level,
                    bbox,
                    doc_id,
                } => {
                    index.level2.entry(level).or_default().broad.push((bbox, doc_id));
                }
            }
        }

        let path = dir.join("vectors.jsonl");
        let reader = BufReader::new(std::fs::File::open(&path)?);
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: SpatialTermVector = serde_json::from_str(&line)
                .map_err(|e| Error::Integrity(format!("{}:{}: {e}", path.display(), lineno + 1)))?;
            index.vectors.insert(rec.doc_id.clone(), rec);
        }

        index.verify()?;
        Ok(index)
    }

    /// Cross-check level-1 postings against the stored vectors.
    pub fn verify(&self) -> Result<()> {
        for (term, postings) in &self.level1 {
            for p in postings {
                let Some(v) = self.vectors.get(&p.doc_id) else {
                    return Err(Error::Integrity(format!(
                        "posting for {term:?} references unknown document {:?}",
                        p.doc_id
                    )));
                };
                if v.weight(term) <= 0.0 {
                    return Err(Error::Integrity(format!(
                        "document {:?} has a posting for {term:?} but zero weight",
                        p.doc_id
                    )));
                }
            }
        }
        Ok(())
    }
}
