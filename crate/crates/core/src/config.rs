//! Engine configuration: linguistic term parameters, the relation
//! lexicon, disambiguation weights, the relevance rule base, and
//! retrieval knobs. Everything tunable lives here and loads from a
//! directory of JSON files; defaults are the shipped baseline.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extract::{Direction, RelationTerm};
use crate::fuzzy::{
    FuzzyRule, FuzzyRuleBase, FuzzySet1D, FuzzyVariable, GridSpec, Hedge, RuleClause, Shape, TNorm,
};
use crate::gazetteer::GranularityLevel;

/// One relation lexicon entry: a lowercase token pattern and the relation
/// it expresses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LexiconEntry {
    pub pattern: String,
    pub relation: RelationTerm,
}

/// Disambiguation score weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisambiguationWeights {
    pub importance: f64,
    pub containment: f64,
    pub level_prior: f64,
}

impl Default for DisambiguationWeights {
    fn default() -> Self {
        Self {
            importance: 0.5,
            containment: 0.3,
            level_prior: 0.2,
        }
    }
}

/// Extraction configuration (`extraction.json`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionConfig {
    pub lexicon: Vec<LexiconEntry>,
    pub hedge_words: BTreeMap<String, Hedge>,
    pub cue_words: Vec<String>,
    pub max_name_tokens: usize,
    /// A relation pattern must end within this many tokens before the
    /// toponym it modifies.
    pub relation_gap: usize,
    pub weights: DisambiguationWeights,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        let mut lexicon = vec![
            ("at", RelationTerm::At),
            ("in", RelationTerm::At),
            ("near", RelationTerm::Near),
            ("near to", RelationTerm::Near),
            ("close to", RelationTerm::Near),
            ("beside", RelationTerm::Near),
            ("within walking distance of", RelationTerm::WithinWalkingDistance),
            ("far from", RelationTerm::Far),
        ]
        .into_iter()
        .map(|(pattern, relation)| LexiconEntry {
            pattern: pattern.to_string(),
            relation,
        })
        .collect::<Vec<_>>();
        for direction in Direction::ALL {
            let relation = RelationTerm::CardinalOf { direction };
            lexicon.push(LexiconEntry {
                pattern: format!("to the {} of", direction.word()),
                relation,
            });
            lexicon.push(LexiconEntry {
                pattern: format!("{} of", direction.word()),
                relation,
            });
        }
        Self {
            lexicon,
            hedge_words: [
                ("very".to_string(), Hedge::Very),
                ("somewhat".to_string(), Hedge::Somewhat),
                ("quite".to_string(), Hedge::Somewhat),
            ]
            .into_iter()
            .collect(),
            cue_words: ["in", "at", "near", "from", "of", "to"]
                .into_iter()
                .map(str::to_string)
                .collect(),
            max_name_tokens: 4,
            relation_gap: 3,
            weights: DisambiguationWeights::default(),
        }
    }
}

/// Parameters of the cardinal ("east of") term: a distance envelope
/// combined with an angular sector around the preferred bearing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CardinalTermConfig {
    pub envelope: Shape,
    pub core_half_deg: f64,
    pub support_half_deg: f64,
    pub combiner: TNorm,
}

/// Distance-set parameters per linguistic term, in km from the anchor
/// boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TermShapes {
    pub at: Shape,
    pub near: Shape,
    pub within_walking_distance: Shape,
    pub far: Shape,
    pub cardinal: CardinalTermConfig,
}

impl Default for TermShapes {
    fn default() -> Self {
        Self {
            at: Shape::Trapezoid {
                a: 0.0,
                b: 0.0,
                c: 0.0,
                d: 0.5,
            },
            near: Shape::Trapezoid {
                a: 0.0,
                b: 0.0,
                c: 2.0,
                d: 5.0,
            },
            within_walking_distance: Shape::Trapezoid {
                a: 0.0,
                b: 0.0,
                c: 1.5,
                d: 3.0,
            },
            far: Shape::RampUp { lo: 10.0, hi: 25.0 },
            cardinal: CardinalTermConfig {
                envelope: Shape::Trapezoid {
                    a: 0.0,
                    b: 0.0,
                    c: 10.0,
                    d: 50.0,
                },
                core_half_deg: 30.0,
                support_half_deg: 60.0,
                combiner: TNorm::Product,
            },
        }
    }
}

/// Fuzzy configuration (`fuzzy.json`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyConfig {
    pub terms: TermShapes,
    /// Synthesized extent radius per level for point footprints, km.
    pub level_radii_km: BTreeMap<GranularityLevel, f64>,
    /// Default conjunctive combiner for distance-only surfaces.
    pub combiner: TNorm,
    pub grid: GridSpec,
    /// Indexing and clipping reach for distance sets with unbounded
    /// support ("far"), km.
    pub reach_horizon_km: f64,
    pub rulebase: FuzzyRuleBase,
}

impl Default for FuzzyConfig {
    fn default() -> Self {
        Self {
            terms: TermShapes::default(),
            level_radii_km: [
                (GranularityLevel::Landmark, 0.5),
                (GranularityLevel::Neighborhood, 1.0),
                (GranularityLevel::City, 10.0),
                (GranularityLevel::Region, 100.0),
                (GranularityLevel::Country, 500.0),
            ]
            .into_iter()
            .collect(),
            combiner: TNorm::Min,
            grid: GridSpec::default(),
            reach_horizon_km: 100.0,
            rulebase: default_rulebase(),
        }
    }
}

impl FuzzyConfig {
    pub fn level_radius_km(&self, level: GranularityLevel) -> f64 {
        self.level_radii_km.get(&level).copied().unwrap_or(0.5)
    }
}

fn partition3(low: Shape, medium: Shape, high: Shape) -> BTreeMap<String, FuzzySet1D> {
    [
        ("low".to_string(), FuzzySet1D::new(low)),
        ("medium".to_string(), FuzzySet1D::new(medium)),
        ("high".to_string(), FuzzySet1D::new(high)),
    ]
    .into_iter()
    .collect()
}

fn partition2(names: (&str, &str)) -> BTreeMap<String, FuzzySet1D> {
    [
        (
            names.0.to_string(),
            FuzzySet1D::new(Shape::RampDown { lo: 0.3, hi: 0.7 }),
        ),
        (
            names.1.to_string(),
            FuzzySet1D::new(Shape::RampUp { lo: 0.3, hi: 0.7 }),
        ),
    ]
    .into_iter()
    .collect()
}

/// The shipped relevance rule base: graded output labels centered at 0.1
/// (not relevant), 0.5 (moderate), and 0.7 (high).
pub fn default_rulebase() -> FuzzyRuleBase {
    let swf = FuzzyVariable {
        name: "swf".to_string(),
        labels: partition3(
            Shape::RampDown { lo: 0.2, hi: 0.5 },
            Shape::Trapezoid {
                a: 0.2,
                b: 0.4,
                c: 0.6,
                d: 0.8,
            },
            Shape::RampUp { lo: 0.5, hi: 0.8 },
        ),
    };
    let gran = FuzzyVariable {
        name: "gran".to_string(),
        labels: partition2(("poor", "good")),
    };
    let overlap = FuzzyVariable {
        name: "overlap".to_string(),
        labels: partition2(("low", "high")),
    };
    let output = FuzzyVariable {
        name: "relevance".to_string(),
        labels: [
            (
                "not_relevant".to_string(),
                FuzzySet1D::new(Shape::triangle(-0.1, 0.1, 0.3)),
            ),
            (
                "moderate".to_string(),
                FuzzySet1D::new(Shape::triangle(0.3, 0.5, 0.7)),
            ),
            (
                "high".to_string(),
                FuzzySet1D::new(Shape::triangle(0.5, 0.7, 0.9)),
            ),
        ]
        .into_iter()
        .collect(),
    };

    let clause = |var: &str, label: &str| RuleClause {
        var: var.to_string(),
        label: label.to_string(),
    };
    let rule = |when: Vec<RuleClause>, then: &str| FuzzyRule {
        when,
        then: then.to_string(),
    };

    FuzzyRuleBase {
        inputs: [
            ("swf".to_string(), swf),
            ("gran".to_string(), gran),
            ("overlap".to_string(), overlap),
        ]
        .into_iter()
        .collect(),
        output,
        rules: vec![
            rule(vec![clause("swf", "high"), clause("gran", "good")], "high"),
            rule(vec![clause("swf", "high"), clause("gran", "poor")], "moderate"),
            rule(
                vec![
                    clause("swf", "medium"),
                    clause("gran", "good"),
                    clause("overlap", "high"),
                ],
                "high",
            ),
            rule(
                vec![
                    clause("swf", "medium"),
                    clause("gran", "good"),
                    clause("overlap", "low"),
                ],
                "moderate",
            ),
            rule(vec![clause("swf", "medium"), clause("gran", "poor")], "moderate"),
            rule(vec![clause("swf", "low"), clause("overlap", "high")], "moderate"),
            rule(
                vec![clause("swf", "low"), clause("overlap", "low")],
                "not_relevant",
            ),
            rule(
                vec![clause("swf", "low"), clause("gran", "poor")],
                "not_relevant",
            ),
            rule(vec![clause("overlap", "high"), clause("gran", "good")], "high"),
        ],
    }
}

/// Fusion operator selection (weights, when applicable, come from
/// document scores at query time).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FusionOp {
    Min,
    Max,
    #[serde(alias = "avg")]
    WeightedAverage,
}

/// Retrieval configuration (`retrieval.json`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalConfig {
    /// Blend between fuzzy spatial relevance and thematic cosine.
    pub beta: f64,
    pub top_k: usize,
    /// Granulation level assumed for queries without a spatial part.
    pub default_level: GranularityLevel,
    pub fusion: FusionOp,
    /// gran_match by level distance 0, 1, 2, >=3.
    pub gran_table: [f64; 4],
    /// gran_match floor when the document and query places are in a
    /// containment relation.
    pub containment_floor: f64,
    /// Possibility at or above which a cell counts as most certain.
    pub certainty_high: f64,
    /// Possibility below which a (non-zero) cell counts as least certain.
    pub certainty_low: f64,
}

impl Default for RetrievalConfig {
    fn default() -> Self {
        Self {
            beta: 0.6,
            top_k: 5,
            default_level: GranularityLevel::Country,
            fusion: FusionOp::WeightedAverage,
            gran_table: [1.0, 0.7, 0.4, 0.2],
            containment_floor: 0.7,
            certainty_high: 0.8,
            certainty_low: 0.3,
        }
    }
}

impl RetrievalConfig {
    pub fn gran_for_distance(&self, delta: u8) -> f64 {
        self.gran_table[(delta as usize).min(3)]
    }
}

/// The full engine configuration, loaded from a directory of JSON files.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EngineConfig {
    pub extraction: ExtractionConfig,
    pub fuzzy: FuzzyConfig,
    pub retrieval: RetrievalConfig,
}

const EXTRACTION_FILE: &str = "extraction.json";
const FUZZY_FILE: &str = "fuzzy.json";
const RETRIEVAL_FILE: &str = "retrieval.json";

fn load_part<T: serde::de::DeserializeOwned + Default>(dir: &Path, file: &str) -> Result<T> {
    let path = dir.join(file);
    if !path.exists() {
        return Ok(T::default());
    }
    let text = std::fs::read_to_string(&path)?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

impl EngineConfig {
    /// Read `extraction.json`, `fuzzy.json`, and `retrieval.json` from
    /// `dir`; missing files fall back to defaults. The rule base is
    /// validated after loading.
    pub fn load_dir(dir: &Path) -> Result<Self> {
        let cfg = Self {
            extraction: load_part(dir, EXTRACTION_FILE)?,
            fuzzy: load_part(dir, FUZZY_FILE)?,
            retrieval: load_part(dir, RETRIEVAL_FILE)?,
        };
        cfg.fuzzy.rulebase.validate()?;
        Ok(cfg)
    }

    /// Write the three config files into `dir`.
    pub fn save_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(
            dir.join(EXTRACTION_FILE),
            serde_json::to_string_pretty(&self.extraction)?,
        )?;
        std::fs::write(dir.join(FUZZY_FILE), serde_json::to_string_pretty(&self.fuzzy)?)?;
        std::fs::write(
            dir.join(RETRIEVAL_FILE),
            serde_json::to_string_pretty(&self.retrieval)?,
        )?;
        Ok(())
    }
}
