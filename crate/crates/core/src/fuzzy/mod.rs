//! Fuzzy machinery: 1-D sets and hedges, possibility surfaces over
//! geographic space, gridded fusion and defuzzification, and the Mamdani
//! rule engine used for relevance grading.

pub mod grid;
pub mod rules;
pub mod set;
pub mod surface;

pub use grid::{defuzzify, fuse, FusionMode, GridPolygon, GridSpec, GridSurface, Resolution};
pub use rules::{
    mamdani_infer, FuzzyRule, FuzzyRuleBase, FuzzyVariable, Inference, RuleActivation, RuleClause,
};
pub use set::{AngularSet, FuzzySet1D, Hedge, Shape, TNorm};
pub use surface::{
    anchor_for, surface_for_mention, surface_for_place, surface_for_relation, Anchor, Surface,
};
