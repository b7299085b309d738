//! Equality saturation over access-pattern terms.

pub mod egraph;
pub mod extract;
pub mod pattern;
pub mod rules;
pub mod saturate;
pub mod soundness;

pub use egraph::{EClass, EGraph, EGraphError, ENode, Id};
pub use extract::{best_nodes, extract, extract_class, CostModel, CostParseError, ExtractError};
pub use pattern::{ematch, instantiate, instantiate_expr, Subst};
pub use rules::{
    build_rule_library, build_rule_library_with, Arm, Bound, Extras, Rewrite, RuleConfig, RuleError, RuleGroup,
    Sample, SystolicArrayLimits, Target,
};
pub use saturate::{saturate, EquivalenceState, SaturationConfig, SaturationError, StopReason};
pub use soundness::{check_rule_soundness, Counterexample, NoSatisfyingShapes, SoundnessReport};
