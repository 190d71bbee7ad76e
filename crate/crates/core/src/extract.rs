//! Extraction of absolute and relative (vague) spatial expressions from
//! documents, toponym candidacy screening, and disambiguation of
//! ambiguous place names.
//!
//! Candidacy is a cheap deterministic screen: a token sequence must hit
//! the gazetteer name index, and must either be capitalized in the raw
//! text or be preceded within two tokens by a spatial cue word. A relative
//! mention is emitted only when a relation pattern ends within three
//! tokens of the toponym. "at"/"in" patterns ground the place directly and
//! yield an absolute mention.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::config::ExtractionConfig;
use crate::corpus::{Document, Token};
use crate::error::{Error, Result};
use crate::fuzzy::Hedge;
use crate::gazetteer::{Gazetteer, GranularityLevel};

/// Compass direction for cardinal relations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    N,
    S,
    E,
    W,
    NE,
    NW,
    SE,
    SW,
}

impl Direction {
    /// Preferred bearing in degrees (north = 0, clockwise).
    pub fn bearing_deg(self) -> f64 {
        match self {
            Direction::N => 0.0,
            Direction::NE => 45.0,
            Direction::E => 90.0,
            Direction::SE => 135.0,
            Direction::S => 180.0,
            Direction::SW => 225.0,
            Direction::W => 270.0,
            Direction::NW => 315.0,
        }
    }

    pub fn word(self) -> &'static str {
        match self {
            Direction::N => "north",
            Direction::S => "south",
            Direction::E => "east",
            Direction::W => "west",
            Direction::NE => "northeast",
            Direction::NW => "northwest",
            Direction::SE => "southeast",
            Direction::SW => "southwest",
        }
    }

    pub const ALL: [Direction; 8] = [
        Direction::N,
        Direction::S,
        Direction::E,
        Direction::W,
        Direction::NE,
        Direction::NW,
        Direction::SE,
        Direction::SW,
    ];
}

/// The relation expressed by a relative spatial expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RelationTerm {
    At,
    Near,
    WithinWalkingDistance,
    Far,
    CardinalOf { direction: Direction },
}

impl RelationTerm {
    /// Short stable fragment used in spatial term keys.
    pub fn key_fragment(&self) -> String {
        match self {
            RelationTerm::At => "at".to_string(),
            RelationTerm::Near => "near".to_string(),
            RelationTerm::WithinWalkingDistance => "wwd".to_string(),
            RelationTerm::Far => "far".to_string(),
            RelationTerm::CardinalOf { direction } => {
                format!("{}_of", format!("{direction:?}").to_lowercase())
            }
        }
    }

    /// Whether a hedge may modify this relation.
    pub fn accepts_hedge(&self) -> bool {
        matches!(self, RelationTerm::Near | RelationTerm::Far)
    }
}

/// What a mention refers to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MentionKind {
    Absolute {
        place_id: String,
    },
    Relative {
        relation: RelationTerm,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        hedge: Option<Hedge>,
        anchor_place_id: String,
    },
}

impl MentionKind {
    /// The place the mention is grounded on.
    pub fn place_id(&self) -> &str {
        match self {
            MentionKind::Absolute { place_id } => place_id,
            MentionKind::Relative { anchor_place_id, .. } => anchor_place_id,
        }
    }

    /// Spatial term key: the place id for absolute mentions,
    /// `relation@place_id` for relative ones.
    pub fn term_key(&self) -> String {
        match self {
            MentionKind::Absolute { place_id } => place_id.clone(),
            MentionKind::Relative {
                relation,
                anchor_place_id,
                ..
            } => format!("{}@{}", relation.key_fragment(), anchor_place_id),
        }
    }
}

/// One extracted spatial expression anchored in a document span.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialMention {
    pub doc_id: String,
    pub byte_start: usize,
    pub byte_end: usize,
    #[serde(flatten)]
    pub kind: MentionKind,
    pub confidence: f64,
    pub granularity: GranularityLevel,
}

/// A mention plus the token ranges it consumed; used by query parsing.
#[derive(Debug, Clone, PartialEq)]
pub struct DetailedMention {
    pub mention: SpatialMention,
    /// Token indices of the toponym.
    pub name_tokens: Range<usize>,
    /// Token indices of the relation pattern (hedge included), if any.
    pub pattern_tokens: Option<Range<usize>>,
}

/// An unresolved toponym candidate: its span and the set of places its
/// surface may refer to.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbiguousCandidate {
    pub byte_start: usize,
    pub byte_end: usize,
    /// Normalized surface form.
    pub surface: String,
    /// Candidate place ids (non-empty).
    pub options: Vec<String>,
}

/// A disambiguation outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedCandidate {
    pub place_id: String,
    pub confidence: f64,
}

/// Deterministic spatial-expression extractor over a fixed gazetteer and
/// configuration.
pub struct Extractor<'a> {
    gaz: &'a Gazetteer,
    config: &'a ExtractionConfig,
    /// Compiled lexicon: tokenized pattern plus relation, longest first.
    patterns: Vec<(Vec<String>, RelationTerm)>,
    cue_words: BTreeSet<String>,
    hedges: BTreeMap<String, Hedge>,
}

impl<'a> Extractor<'a> {
    pub fn new(gaz: &'a Gazetteer, config: &'a ExtractionConfig) -> Self {
        let mut patterns: Vec<(Vec<String>, RelationTerm)> = config
            .lexicon
            .iter()
            .map(|e| {
                (
                    e.pattern.split_whitespace().map(str::to_lowercase).collect(),
                    e.relation,
                )
            })
            .collect();
        patterns.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
        Self {
            gaz,
            config,
            patterns,
            cue_words: config.cue_words.iter().map(|w| w.to_lowercase()).collect(),
            hedges: config
                .hedge_words
                .iter()
                .map(|(w, h)| (w.to_lowercase(), *h))
                .collect(),
        }
    }

    /// Classify a token window as a relation pattern, optionally hedged.
    /// The entire window must consist of an optional leading hedge word
    /// followed by one lexicon pattern; the longest pattern wins.
    pub fn classify_expression(&self, window: &[Token]) -> Option<(RelationTerm, Option<Hedge>)> {
        if window.is_empty() || window.len() > 5 {
            return None;
        }
        let words: Vec<&str> = window.iter().map(|t| t.normalized.as_str()).collect();
        if let Some(relation) = self.match_pattern(&words) {
            return Some((relation, None));
        }
        if let Some(hedge) = self.hedges.get(words[0]) {
            if let Some(relation) = self.match_pattern(&words[1..]) {
                if relation.accepts_hedge() {
                    return Some((relation, Some(*hedge)));
                }
            }
        }
        None
    }

    fn match_pattern(&self, words: &[&str]) -> Option<RelationTerm> {
        if words.is_empty() {
            return None;
        }
        // Patterns are sorted longest first.
        self.patterns
            .iter()
            .find(|(pat, _)| pat.len() == words.len() && pat.iter().map(String::as_str).eq(words.iter().copied()))
            .map(|(_, rel)| *rel)
    }

    /// Extract all spatial mentions of a document, ordered by span start.
    pub fn extract_mentions(&self, doc: &Document) -> Vec<SpatialMention> {
        self.extract_detailed(doc)
            .into_iter()
            .map(|d| d.mention)
            .collect()
    }

    /// Extraction that also reports consumed token ranges.
    pub fn extract_detailed(&self, doc: &Document) -> Vec<DetailedMention> {
        let tokens = &doc.tokens;

        // Pass 1: find toponym candidates, longest name first.
        struct RawCandidate {
            name_tokens: Range<usize>,
            surface: String,
            options: Vec<String>,
            relation: Option<(RelationTerm, Option<Hedge>, Range<usize>)>,
        }
        let mut raw: Vec<RawCandidate> = Vec::new();
        let mut i = 0;
        while i < tokens.len() {
            let mut taken = false;
            let max_len = self.config.max_name_tokens.min(tokens.len() - i);
            for len in (1..=max_len).rev() {
                let window = &tokens[i..i + len];
                let joined = window
                    .iter()
                    .map(|t| t.normalized.as_str())
                    .collect::<Vec<_>>()
                    .join(" ");
                if !self.gaz.has_name(&joined) {
                    continue;
                }
                let capitalized = window.iter().all(|t| t.is_capitalized);
                let cued = (1..=2).any(|back| {
                    i.checked_sub(back)
                        .map(|j| self.cue_words.contains(&tokens[j].normalized))
                        .unwrap_or(false)
                });
                if !(capitalized || cued) {
                    continue;
                }
                let options: Vec<String> = self
                    .gaz
                    .lookup(&joined)
                    .into_iter()
                    .map(|e| e.place_id.clone())
                    .collect();
                let relation = self.find_relation_before(tokens, i);
                raw.push(RawCandidate {
                    name_tokens: i..i + len,
                    surface: joined,
                    options,
                    relation,
                });
                i += len;
                taken = true;
                break;
            }
            if !taken {
                i += 1;
            }
        }

        // Pass 2: resolve, unambiguous names first so they anchor the
        // containment bonus, then ambiguous ones in document order.
        let mut resolved: BTreeMap<String, ResolvedCandidate> = BTreeMap::new();
        let mut context: BTreeSet<String> = raw
            .iter()
            .filter(|c| c.options.len() == 1)
            .map(|c| c.options[0].clone())
            .collect();
        for cand in &raw {
            if cand.options.len() == 1 {
                resolved.insert(
                    cand.surface.clone(),
                    ResolvedCandidate {
                        place_id: cand.options[0].clone(),
                        confidence: 1.0,
                    },
                );
            }
        }
        for cand in &raw {
            if resolved.contains_key(&cand.surface) {
                continue;
            }
            let others: Vec<String> = context.iter().cloned().collect();
            let winner = self.score_and_pick(&cand.options, &others);
            context.insert(winner.place_id.clone());
            resolved.insert(cand.surface.clone(), winner);
        }

        // Pass 3: assemble mentions.
        let mut out: Vec<DetailedMention> = Vec::new();
        for cand in &raw {
            let res = &resolved[&cand.surface];
            let Some(entry) = self.gaz.get(&res.place_id) else {
                continue;
            };
            let (kind, span_start_tok, pattern_tokens) = match &cand.relation {
                Some((relation, hedge, range)) if *relation != RelationTerm::At => (
                    MentionKind::Relative {
                        relation: *relation,
                        hedge: *hedge,
                        anchor_place_id: res.place_id.clone(),
                    },
                    range.start,
                    Some(range.clone()),
                ),
                Some((_, _, range)) => (
                    // "at"/"in" grounds the place directly.
                    MentionKind::Absolute {
                        place_id: res.place_id.clone(),
                    },
                    cand.name_tokens.start,
                    Some(range.clone()),
                ),
                None => (
                    MentionKind::Absolute {
                        place_id: res.place_id.clone(),
                    },
                    cand.name_tokens.start,
                    None,
                ),
            };
            out.push(DetailedMention {
                mention: SpatialMention {
                    doc_id: doc.doc_id.clone(),
                    byte_start: tokens[span_start_tok].byte_start,
                    byte_end: tokens[cand.name_tokens.end - 1].byte_end,
                    kind,
                    confidence: res.confidence,
                    granularity: entry.level,
                },
                name_tokens: cand.name_tokens.clone(),
                pattern_tokens,
            });
        }
        out.sort_by_key(|d| (d.mention.byte_start, d.mention.byte_end));
        out
    }

    /// Search for a relation pattern ending within `relation_gap` tokens
    /// before token `name_start`. Closest pattern first, longest window
    /// first within the same end position.
    fn find_relation_before(
        &self,
        tokens: &[Token],
        name_start: usize,
    ) -> Option<(RelationTerm, Option<Hedge>, Range<usize>)> {
        for gap in 0..self.config.relation_gap {
            let Some(end) = name_start.checked_sub(1 + gap) else {
                break;
            };
            for len in (1..=5usize).rev() {
                let Some(start) = (end + 1).checked_sub(len) else {
                    continue;
                };
                if let Some((relation, hedge)) = self.classify_expression(&tokens[start..=end]) {
                    return Some((relation, hedge, start..end + 1));
                }
            }
        }
        None
    }

    /// Score options and pick a winner: weighted sum of the importance
    /// prior, a containment-consistency bonus against `context` places,
    /// and a coarseness prior. Ties go to the lexicographically smaller
    /// place id; confidence is the winner's share of the total score.
    fn score_and_pick(&self, options: &[String], context: &[String]) -> ResolvedCandidate {
        let w = &self.config.weights;
        let scores: Vec<f64> = options
            .iter()
            .map(|id| {
                let Some(entry) = self.gaz.get(id) else {
                    return 0.0;
                };
                let consistency = context.iter().any(|other| {
                    self.gaz.related(other, id).unwrap_or(false)
                });
                w.importance * entry.importance
                    + w.containment * if consistency { 1.0 } else { 0.0 }
                    + w.level_prior * (entry.level.ordinal() as f64 / 4.0)
            })
            .collect();
        let total: f64 = scores.iter().sum();
        let mut best = 0usize;
        for (i, s) in scores.iter().enumerate() {
            if *s > scores[best] + f64::EPSILON
                || ((*s - scores[best]).abs() <= f64::EPSILON && options[i] < options[best])
            {
                best = i;
            }
        }
        let confidence = if total > 0.0 {
            scores[best] / total
        } else {
            1.0 / options.len() as f64
        };
        ResolvedCandidate {
            place_id: options[best].clone(),
            confidence,
        }
    }

    /// Resolve a batch of ambiguous candidates sequentially. Identical
    /// surface forms resolve to the same place; each resolution joins the
    /// context for the following ones.
    pub fn disambiguate(
        &self,
        candidates: &[AmbiguousCandidate],
        doc_mentions_so_far: &[String],
    ) -> Vec<ResolvedCandidate> {
        let mut context: Vec<String> = doc_mentions_so_far.to_vec();
        let mut by_surface: BTreeMap<String, ResolvedCandidate> = BTreeMap::new();
        let mut out = Vec::with_capacity(candidates.len());
        for cand in candidates {
            let res = match by_surface.get(&cand.surface) {
                Some(r) => r.clone(),
                None => {
                    let r = self.score_and_pick(&cand.options, &context);
                    context.push(r.place_id.clone());
                    by_surface.insert(cand.surface.clone(), r.clone());
                    r
                }
            };
            out.push(res);
        }
        out
    }
}

/// Write mentions as line-delimited JSON.
pub fn write_mentions_jsonl<W: std::io::Write>(
    mut w: W,
    mentions: &BTreeMap<String, Vec<SpatialMention>>,
) -> Result<()> {
    for doc_mentions in mentions.values() {
        for m in doc_mentions {
            let line = serde_json::to_string(m)?;
            writeln!(w, "{line}")?;
        }
    }
    Ok(())
}

/// Read mentions from line-delimited JSON, grouped by doc id.
pub fn read_mentions_jsonl(path: &std::path::Path) -> Result<BTreeMap<String, Vec<SpatialMention>>> {
    use std::io::BufRead;
    let file = std::fs::File::open(path)?;
    let mut out: BTreeMap<String, Vec<SpatialMention>> = BTreeMap::new();
    for (lineno, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let m: SpatialMention = serde_json::from_str(&line).map_err(|e| {
            Error::Integrity(format!("{}:{}: {e}", path.display(), lineno + 1))
        })?;
        out.entry(m.doc_id.clone()).or_default().push(m);
    }
    Ok(out)
}
