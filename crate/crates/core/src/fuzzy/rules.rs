//! Mamdani-style fuzzy rule engine over [0, 1] variables.
//!
//! Antecedents conjoin by min, rule activation clips the output set,
//! clipped sets aggregate by max, and the aggregate defuzzifies by
//! centroid over 1001 evenly spaced samples of [0, 1].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::set::FuzzySet1D;

/// Number of evenly spaced samples of [0, 1] used for centroid
/// defuzzification (inclusive of both endpoints).
pub const CENTROID_SAMPLES: usize = 1001;

/// A named variable partitioned into labeled fuzzy sets over [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyVariable {
    pub name: String,
    pub labels: BTreeMap<String, FuzzySet1D>,
}

impl FuzzyVariable {
    pub fn membership(&self, label: &str, x: f64) -> Result<f64> {
        self.labels
            .get(label)
            .map(|s| s.membership(x))
            .ok_or_else(|| Error::RuleBase(format!("variable {} has no label {label:?}", self.name)))
    }
}

/// One antecedent clause: `var IS label`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleClause {
    pub var: String,
    pub label: String,
}

/// A rule: conjunction of clauses implying an output label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyRule {
    pub when: Vec<RuleClause>,
    pub then: String,
}

impl FuzzyRule {
    /// Human-readable form for rule traces.
    pub fn display(&self, output_var: &str) -> String {
        let ante = self
            .when
            .iter()
            .map(|c| format!("{} IS {}", c.var, c.label))
            .collect::<Vec<_>>()
            .join(" AND ");
        format!("IF {ante} THEN {output_var} IS {}", self.then)
    }
}

/// Activation of one rule during an inference call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleActivation {
    pub rule: String,
    pub activation: f64,
}

/// Result of one inference call: the crisp value and the rule trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inference {
    pub value: f64,
    pub trace: Vec<RuleActivation>,
}

/// An immutable Mamdani rule base.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyRuleBase {
    pub inputs: BTreeMap<String, FuzzyVariable>,
    pub output: FuzzyVariable,
    pub rules: Vec<FuzzyRule>,
}

impl FuzzyRuleBase {
    /// Validate label references and input coverage: every x in [0, 1]
    /// must belong to at least one label of every input variable.
    pub fn validate(&self) -> Result<()> {
        for rule in &self.rules {
            for clause in &rule.when {
                let var = self.inputs.get(&clause.var).ok_or_else(|| {
                    Error::RuleBase(format!("rule references unknown variable {:?}", clause.var))
                })?;
                if !var.labels.contains_key(&clause.label) {
                    return Err(Error::RuleBase(format!(
                        "variable {} has no label {:?}",
                        clause.var, clause.label
                    )));
                }
            }
            if !self.output.labels.contains_key(&rule.then) {
                return Err(Error::RuleBase(format!(
                    "output has no label {:?}",
                    rule.then
                )));
            }
        }
        for var in self.inputs.values() {
            for i in 0..CENTROID_SAMPLES {
                let x = i as f64 / (CENTROID_SAMPLES - 1) as f64;
                let covered = var.labels.values().any(|s| s.membership(x) > 0.0);
                if !covered {
                    return Err(Error::RuleBase(format!(
                        "variable {} does not cover x = {x}",
                        var.name
                    )));
                }
            }
        }
        Ok(())
    }

    /// Mamdani inference. Every input variable of the rule base must be
    /// present in `inputs`; fails with `NoRuleFired` when the aggregated
    /// output is zero everywhere.
    pub fn infer(&self, inputs: &BTreeMap<String, f64>) -> Result<Inference> {
        for name in self.inputs.keys() {
            if !inputs.contains_key(name) {
                return Err(Error::MissingInput(name.clone()));
            }
        }

        let mut activations = Vec::with_capacity(self.rules.len());
        for rule in &self.rules {
            let mut strength = 1.0_f64;
            for clause in &rule.when {
                let var = self
                    .inputs
                    .get(&clause.var)
                    .ok_or_else(|| Error::RuleBase(format!("unknown variable {:?}", clause.var)))?;
                let x = inputs[&clause.var];
                strength = strength.min(var.membership(&clause.label, x)?);
            }
            activations.push(strength);
        }

        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..CENTROID_SAMPLES {
            let x = i as f64 / (CENTROID_SAMPLES - 1) as f64;
            let mut mu = 0.0_f64;
            for (rule, &strength) in self.rules.iter().zip(&activations) {
                if strength > 0.0 {
                    let clipped = strength.min(self.output.membership(&rule.then, x)?);
                    mu = mu.max(clipped);
                }
            }
            num += x * mu;
            den += mu;
        }

        if den <= 0.0 {
            return Err(Error::NoRuleFired);
        }

        let trace = self
            .rules
            .iter()
            .zip(&activations)
            .map(|(rule, &activation)| RuleActivation {
                rule: rule.display(&self.output.name),
                activation,
            })
            .collect();

        Ok(Inference {
            value: num / den,
            trace,
        })
    }
}

/// Free-function form of [`FuzzyRuleBase::infer`].
pub fn mamdani_infer(rulebase: &FuzzyRuleBase, inputs: &BTreeMap<String, f64>) -> Result<Inference> {
    rulebase.infer(inputs)
}
