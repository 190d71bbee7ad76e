//! Query-time orchestration: parse the spatial event query, detect its
//! granulation level, select candidates, grade relevance with the fuzzy
//! rule base, rank, fuse the top documents' surfaces, and resolve the
//! event location.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::config::{EngineConfig, FusionOp};
use crate::corpus::{tokenize, CorpusStore, Document};
use crate::error::{Error, Result};
use crate::extract::{Extractor, MentionKind, SpatialMention};
use crate::fuzzy::{
    defuzzify, fuse, surface_for_mention, FusionMode, GridPolygon, GridSurface, RuleActivation,
    Surface,
};
use crate::gazetteer::{Gazetteer, GranularityLevel};
use crate::geo::{BBox, GeoPoint};
use crate::index::{CandidateTrace, SpatialIndex, TermKey};

/// A parsed spatial event query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryPlan {
    pub query_text: String,
    /// Normalized non-spatial tokens.
    pub event_terms: Vec<String>,
    /// The query's spatial expression, if any.
    pub spatial_part: Option<MentionKind>,
    /// Granulation level of the query.
    pub level: GranularityLevel,
    pub top_k: usize,
    pub fusion: FusionOp,
}

impl QueryPlan {
    /// Spatial term keys the query matches: the relation-qualified key and
    /// the bare place key for relative parts, the place key for absolute.
    pub fn query_keys(&self) -> Vec<TermKey> {
        match &self.spatial_part {
            None => Vec::new(),
            Some(kind @ MentionKind::Absolute { .. }) => vec![kind.term_key()],
            Some(kind @ MentionKind::Relative { anchor_place_id, .. }) => {
                vec![kind.term_key(), anchor_place_id.clone()]
            }
        }
    }
}

/// The fuzzy-graded relevance verdict for one document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelevanceJudgment {
    pub doc_id: String,
    /// Document's best SWF over the query keys, normalized by the corpus
    /// maximum for those keys.
    pub swf_norm: f64,
    /// Granularity agreement between the document's mentions and the query.
    pub gran_match: f64,
    /// Possibility of the query surface at the document's mention points.
    pub expr_overlap: f64,
    /// Mamdani-inferred spatial relevance grade.
    pub fuzzy_relevance: f64,
    /// tf-idf cosine of the event terms against the document body.
    pub thematic_cosine: f64,
    /// beta * fuzzy_relevance + (1 - beta) * thematic_cosine.
    pub final_score: f64,
    pub rule_trace: Vec<RuleActivation>,
}

/// Cell-count summary of a possibility band on the fused grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSummary {
    pub cells: usize,
    pub bbox: Option<BBox>,
}

/// Most- and least-certain regions of the fused surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertaintyReport {
    /// Cells with possibility >= the high threshold.
    pub most_certain: RegionSummary,
    /// Cells with 0 < possibility < the low threshold.
    pub least_certain: RegionSummary,
    pub high_threshold: f64,
    pub low_threshold: f64,
}

/// The resolved event location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedLocation {
    /// Most possible event location.
    pub point: GeoPoint,
    /// Rectilinear footprint of the fused surface cut, primary first.
    pub footprint: Vec<GridPolygon>,
    pub max_pi: f64,
    pub cut_level: f64,
    /// Documents whose mention surfaces were fused, in rank order.
    pub fused_docs: Vec<String>,
    pub certainty: CertaintyReport,
}

/// What retrieval consulted and whether pruning was bypassed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalTrace {
    pub candidate_trace: Option<CandidateTrace>,
    pub n_candidates: usize,
    pub full_scan: bool,
}

/// A sealed, queryable engine: corpus, gazetteer, extracted mentions,
/// index, and configuration.
#[derive(Debug, Clone)]
pub struct Engine {
    pub corpus: CorpusStore,
    pub gazetteer: Gazetteer,
    pub mentions: BTreeMap<String, Vec<SpatialMention>>,
    pub index: SpatialIndex,
    pub config: EngineConfig,
}

impl Engine {
    /// Extract mentions from every document and build the index. Seals the
    /// corpus.
    pub fn build(mut corpus: CorpusStore, gazetteer: Gazetteer, config: EngineConfig) -> Result<Self> {
        corpus.seal();
        let extractor = Extractor::new(&gazetteer, &config.extraction);
        let mut mentions: BTreeMap<String, Vec<SpatialMention>> = BTreeMap::new();
        for doc in corpus.docs() {
            let found = extractor.extract_mentions(doc);
            if !found.is_empty() {
                mentions.insert(doc.doc_id.clone(), found);
            }
        }
        let index = SpatialIndex::build(&corpus, &mentions, &gazetteer, &config.fuzzy)?;
        Ok(Self {
            corpus,
            gazetteer,
            mentions,
            index,
            config,
        })
    }

    /// Reassemble an engine from previously persisted parts.
    pub fn from_parts(
        corpus: CorpusStore,
        gazetteer: Gazetteer,
        mentions: BTreeMap<String, Vec<SpatialMention>>,
        index: SpatialIndex,
        config: EngineConfig,
    ) -> Self {
        Self {
            corpus,
            gazetteer,
            mentions,
            index,
            config,
        }
    }

    fn doc_mentions(&self, doc_id: &str) -> &[SpatialMention] {
        self.mentions.get(doc_id).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Parse a query string with the same extraction rules as documents.
    /// The first spatial mention becomes the spatial part; toponym and
    /// relation-pattern tokens of every mention are excluded from the
    /// event terms.
    pub fn parse_query(&self, text: &str) -> Result<QueryPlan> {
        let tokens = tokenize(text);
        if tokens.is_empty() {
            return Err(Error::Query("empty query text".into()));
        }
        let doc = Document {
            doc_id: "query".to_string(),
            raw_text: text.to_string(),
            length: tokens.len(),
            tokens,
        };
        let extractor = Extractor::new(&self.gazetteer, &self.config.extraction);
        let detailed = extractor.extract_detailed(&doc);

        let mut consumed: BTreeSet<usize> = BTreeSet::new();
        for d in &detailed {
            consumed.extend(d.name_tokens.clone());
            if let Some(r) = &d.pattern_tokens {
                consumed.extend(r.clone());
            }
        }
        let event_terms: Vec<String> = doc
            .tokens
            .iter()
            .enumerate()
            .filter(|(i, _)| !consumed.contains(i))
            .map(|(_, t)| t.normalized.clone())
            .collect();

        let spatial_part = detailed.first().map(|d| d.mention.kind.clone());
        if event_terms.is_empty() && spatial_part.is_none() {
            return Err(Error::Query(format!("query {text:?} has no usable terms")));
        }

        let mut plan = QueryPlan {
            query_text: text.to_string(),
            event_terms,
            spatial_part,
            level: self.config.retrieval.default_level,
            top_k: self.config.retrieval.top_k.max(1),
            fusion: self.config.retrieval.fusion,
        };
        plan.level = self.detect_granulation(&plan)?;
        Ok(plan)
    }

    /// Level of the query's resolved place (the anchor's level for
    /// relative expressions); the configured default when the query has no
    /// spatial part.
    pub fn detect_granulation(&self, plan: &QueryPlan) -> Result<GranularityLevel> {
        match &plan.spatial_part {
            Some(kind) => self.gazetteer.granularity_of(kind.place_id()),
            None => Ok(self.config.retrieval.default_level),
        }
    }

    fn query_surface(&self, plan: &QueryPlan) -> Result<Option<Surface>> {
        match &plan.spatial_part {
            Some(kind) => Ok(Some(surface_for_mention(
                kind,
                &self.gazetteer,
                &self.config.fuzzy,
            )?)),
            None => Ok(None),
        }
    }

    /// Grade one document against the plan.
    pub fn grade_document(&self, plan: &QueryPlan, doc_id: &str) -> Result<RelevanceJudgment> {
        let query_surface = self.query_surface(plan)?;
        self.grade_with_surface(plan, doc_id, query_surface.as_ref())
    }

    fn grade_with_surface(
        &self,
        plan: &QueryPlan,
        doc_id: &str,
        query_surface: Option<&Surface>,
    ) -> Result<RelevanceJudgment> {
        let doc = self
            .corpus
            .get(doc_id)
            .ok_or_else(|| Error::UnknownDocument(doc_id.to_string()))?;
        let mentions = self.doc_mentions(doc_id);
        let keys = plan.query_keys();
        let rcfg = &self.config.retrieval;

        let swf_norm = if keys.is_empty() {
            0.0
        } else {
            let corpus_max = self.index.max_weight_for(&keys);
            if corpus_max <= 0.0 {
                0.0
            } else {
                let doc_max = self
                    .index
                    .vectors
                    .get(doc_id)
                    .map(|v| keys.iter().map(|k| v.weight(k)).fold(0.0, f64::max))
                    .unwrap_or(0.0);
                doc_max / corpus_max
            }
        };

        let query_place = plan.spatial_part.as_ref().map(|k| k.place_id().to_string());
        let mut gran_match = 0.0_f64;
        for m in mentions {
            let mut g = rcfg.gran_for_distance(m.granularity.distance(plan.level));
            if let Some(qp) = &query_place {
                if self.gazetteer.related(qp, m.kind.place_id()).unwrap_or(false) {
                    g = g.max(rcfg.containment_floor);
                }
            }
            gran_match = gran_match.max(g);
        }

        let mut expr_overlap = 0.0_f64;
        if let Some(qs) = query_surface {
            for m in mentions {
                if keys.contains(&m.kind.term_key()) {
                    expr_overlap = 1.0;
                    break;
                }
                let ms = surface_for_mention(&m.kind, &self.gazetteer, &self.config.fuzzy)?;
                expr_overlap = expr_overlap.max(qs.possibility_at(&ms.peak_point()));
            }
        }

        let inputs: BTreeMap<String, f64> = [
            ("swf".to_string(), swf_norm),
            ("gran".to_string(), gran_match),
            ("overlap".to_string(), expr_overlap),
        ]
        .into_iter()
        .collect();
        let (fuzzy_relevance, rule_trace) = match self.config.fuzzy.rulebase.infer(&inputs) {
            Ok(inf) => (inf.value, inf.trace),
            Err(Error::NoRuleFired) => (0.0, Vec::new()),
            Err(e) => return Err(e),
        };

        let thematic_cosine = self.thematic_cosine(&plan.event_terms, doc);
        let beta = rcfg.beta;
        let final_score = beta * fuzzy_relevance + (1.0 - beta) * thematic_cosine;

        Ok(RelevanceJudgment {
            doc_id: doc_id.to_string(),
            swf_norm,
            gran_match,
            expr_overlap,
            fuzzy_relevance,
            thematic_cosine,
            final_score,
            rule_trace,
        })
    }

    /// Standard tf-idf cosine between the event terms and the document
    /// body, with idf = log2(N / n) + 1 over the corpus statistics.
    fn thematic_cosine(&self, event_terms: &[String], doc: &Document) -> f64 {
        if event_terms.is_empty() || doc.tokens.is_empty() {
            return 0.0;
        }
        let n_docs = self.corpus.n_docs() as f64;
        let idf = |term: &str| -> Option<f64> {
            let df = self.corpus.stats().document_frequency(term);
            if df == 0 {
                None
            } else {
                Some((n_docs / df as f64).log2() + 1.0)
            }
        };

        let mut q_tf: BTreeMap<&str, usize> = BTreeMap::new();
        for t in event_terms {
            *q_tf.entry(t.as_str()).or_insert(0) += 1;
        }
        let mut d_tf: BTreeMap<&str, usize> = BTreeMap::new();
        for t in &doc.tokens {
            *d_tf.entry(t.normalized.as_str()).or_insert(0) += 1;
        }

        let mut dot = 0.0;
        let mut q_norm2 = 0.0;
        for (term, tf) in &q_tf {
            let Some(w) = idf(term) else { continue };
            let qw = *tf as f64 * w;
            q_norm2 += qw * qw;
            if let Some(dtf) = d_tf.get(term) {
                dot += qw * (*dtf as f64 * w);
            }
        }
        let mut d_norm2 = 0.0;
        for (term, tf) in &d_tf {
            let Some(w) = idf(term) else { continue };
            let dw = *tf as f64 * w;
            d_norm2 += dw * dw;
        }
        if q_norm2 <= 0.0 || d_norm2 <= 0.0 {
            return 0.0;
        }
        dot / (q_norm2.sqrt() * d_norm2.sqrt())
    }

    /// Upper bound on the final score of a document with no query-key
    /// weight, no overlap, and no shared event terms: such documents can
    /// only vary in their granularity input.
    fn pruning_floor(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..=100 {
            let g = i as f64 / 100.0;
            let inputs: BTreeMap<String, f64> = [
                ("swf".to_string(), 0.0),
                ("gran".to_string(), g),
                ("overlap".to_string(), 0.0),
            ]
            .into_iter()
            .collect();
            if let Ok(inf) = self.config.fuzzy.rulebase.infer(&inputs) {
                worst = worst.max(inf.value);
            }
        }
        self.config.retrieval.beta * worst
    }

    /// Rank documents for a plan. Prunes through the index whenever that
    /// provably cannot change the ranking, and falls back to grading every
    /// document otherwise.
    pub fn retrieve(&self, plan: &QueryPlan) -> Result<Vec<RelevanceJudgment>> {
        Ok(self.retrieve_traced(plan)?.0)
    }

    /// [`Engine::retrieve`] plus a trace of index consultation.
    pub fn retrieve_traced(&self, plan: &QueryPlan) -> Result<(Vec<RelevanceJudgment>, RetrievalTrace)> {
        if self.corpus.n_docs() == 0 {
            return Ok((
                Vec::new(),
                RetrievalTrace {
                    candidate_trace: None,
                    n_candidates: 0,
                    full_scan: true,
                },
            ));
        }

        let query_surface = self.query_surface(plan)?;
        let keys = plan.query_keys();

        // A query surface with unbounded support ("far from X") can assign
        // positive possibility outside any indexable region, so pruning is
        // not sound for it.
        let prunable = match &query_surface {
            Some(s) => s.distance_set.support_upper().is_some(),
            None => false,
        };

        let mut candidate_trace = None;
        let mut full_scan = !prunable;
        let mut candidates: BTreeSet<String> = if prunable {
            let region = query_surface
                .as_ref()
                .expect("prunable implies a query surface")
                .support_bbox(self.config.fuzzy.reach_horizon_km);
            let (mut set, trace) = self.index.candidates_traced(Some(&region), plan.level, &keys);
            candidate_trace = Some(trace);
            // Thematic candidates: any document sharing an event term.
            for doc in self.corpus.docs() {
                if doc
                    .tokens
                    .iter()
                    .any(|t| plan.event_terms.contains(&t.normalized))
                {
                    set.insert(doc.doc_id.clone());
                }
            }
            set
        } else {
            self.corpus.doc_ids().map(str::to_string).collect()
        };

        let all_docs = self.corpus.n_docs();
        let mut judgments = self.grade_set(plan, query_surface.as_ref(), &candidates)?;

        if candidates.len() < all_docs {
            let kth = judgments.get(plan.top_k.saturating_sub(1)).map(|j| j.final_score);
            let safe = match kth {
                Some(score) if judgments.len() >= plan.top_k => {
                    score > self.pruning_floor() + 1e-3
                }
                _ => false,
            };
            if !safe {
                candidates = self.corpus.doc_ids().map(str::to_string).collect();
                judgments = self.grade_set(plan, self.query_surface(plan)?.as_ref(), &candidates)?;
                full_scan = true;
            }
        }

        let n_candidates = candidates.len();
        judgments.truncate(plan.top_k);
        Ok((
            judgments,
            RetrievalTrace {
                candidate_trace,
                n_candidates,
                full_scan,
            },
        ))
    }

    fn grade_set(
        &self,
        plan: &QueryPlan,
        query_surface: Option<&Surface>,
        doc_ids: &BTreeSet<String>,
    ) -> Result<Vec<RelevanceJudgment>> {
        let mut judgments = Vec::with_capacity(doc_ids.len());
        for doc_id in doc_ids {
            judgments.push(self.grade_with_surface(plan, doc_id, query_surface)?);
        }
        judgments.sort_by(|a, b| {
            b.final_score
                .partial_cmp(&a.final_score)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| a.doc_id.cmp(&b.doc_id))
        });
        Ok(judgments)
    }

    /// Brute-force ranking over every document; the pruning oracle.
    pub fn retrieve_exhaustive(&self, plan: &QueryPlan) -> Result<Vec<RelevanceJudgment>> {
        let all: BTreeSet<String> = self.corpus.doc_ids().map(str::to_string).collect();
        let qs = self.query_surface(plan)?;
        let mut judgments = self.grade_set(plan, qs.as_ref(), &all)?;
        judgments.truncate(plan.top_k);
        Ok(judgments)
    }

    /// Mentions of a judged document that carry evidence for the query: a
    /// query-key match, a containment relation with the query place, or
    /// (for keyword-only queries) any mention at all.
    fn evidence_mentions<'a>(
        &'a self,
        plan: &QueryPlan,
        judgment: &RelevanceJudgment,
    ) -> Vec<&'a SpatialMention> {
        let keys = plan.query_keys();
        let query_place = plan.spatial_part.as_ref().map(|k| k.place_id().to_string());
        self.mentions
            .get(&judgment.doc_id)
            .map(Vec::as_slice)
            .unwrap_or(&[])
            .iter()
            .filter(|m| match &query_place {
                None => true,
                Some(qp) => {
                    keys.contains(&m.kind.term_key())
                        || self.gazetteer.related(qp, m.kind.place_id()).unwrap_or(false)
                }
            })
            .collect()
    }

    /// Fuse the evidence surfaces of the ranked documents (weighted by
    /// final score under weighted-average fusion), defuzzify, and report
    /// certainty bands. The fused grid is returned alongside for raster
    /// export.
    pub fn resolve_event_location(
        &self,
        judgments: &[RelevanceJudgment],
        plan: &QueryPlan,
    ) -> Result<(ResolvedLocation, GridSurface)> {
        let mut surfaces = Vec::new();
        let mut weights = Vec::new();
        let mut fused_docs = Vec::new();
        for j in judgments {
            let evidence = self.evidence_mentions(plan, j);
            if evidence.is_empty() {
                continue;
            }
            for m in evidence {
                surfaces.push(surface_for_mention(&m.kind, &self.gazetteer, &self.config.fuzzy)?);
                weights.push(j.final_score);
            }
            fused_docs.push(j.doc_id.clone());
        }
        if surfaces.is_empty() {
            return Err(Error::NoLocation);
        }

        let mode = match plan.fusion {
            FusionOp::Min => FusionMode::Min,
            FusionOp::Max => FusionMode::Max,
            FusionOp::WeightedAverage => {
                if weights.iter().sum::<f64>() <= 0.0 {
                    weights = vec![1.0; surfaces.len()];
                }
                FusionMode::WeightedAverage { weights }
            }
        };

        let grid = fuse(
            &surfaces,
            &mode,
            &self.config.fuzzy.grid,
            self.config.fuzzy.reach_horizon_km,
        )?;
        let resolution = defuzzify(&grid)?;

        let rcfg = &self.config.retrieval;
        let (hi_cells, hi_bbox) = grid.summarize_cells(|v| v >= rcfg.certainty_high);
        let (lo_cells, lo_bbox) = grid.summarize_cells(|v| v > 0.0 && v < rcfg.certainty_low);

        Ok((
            ResolvedLocation {
                point: resolution.point,
                footprint: resolution.footprint,
                max_pi: resolution.max_pi,
                cut_level: resolution.cut_level,
                fused_docs,
                certainty: CertaintyReport {
                    most_certain: RegionSummary {
                        cells: hi_cells,
                        bbox: hi_bbox,
                    },
                    least_certain: RegionSummary {
                        cells: lo_cells,
                        bbox: lo_bbox,
                    },
                    high_threshold: rcfg.certainty_high,
                    low_threshold: rcfg.certainty_low,
                },
            },
            grid,
        ))
    }

    /// Representative point for a document's best evidence mention; used
    /// for map markers.
    pub fn marker_point(&self, plan: &QueryPlan, judgment: &RelevanceJudgment) -> Option<GeoPoint> {
        let evidence = self.evidence_mentions(plan, judgment);
        let mention = evidence
            .first()
            .copied()
            .or_else(|| self.doc_mentions(&judgment.doc_id).first())?;
        surface_for_mention(&mention.kind, &self.gazetteer, &self.config.fuzzy)
            .ok()
            .map(|s| s.peak_point())
    }
}
