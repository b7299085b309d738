use std::fmt;
use std::time::{Duration, Instant};

use log::debug;

use super::egraph::{EGraph, EGraphError, Id};
use super::pattern::{ematch, instantiate, Subst};
use super::rules::{Bound, Extras, Rewrite};
use crate::ir::Expr;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SaturationConfig {
    pub iter_limit: usize,
    pub node_limit: usize,
    pub time_limit: Duration,
    /// Seeds randomized verification; saturation itself is deterministic.
    pub seed: u64,
}

impl Default for SaturationConfig {
    fn default() -> Self {
        Self {
            iter_limit: 30,
            node_limit: 100_000,
            time_limit: Duration::from_secs(60),
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    Saturated,
    IterationLimit,
    NodeLimit,
    TimeLimit,
}

impl StopReason {
    pub fn is_fixpoint(self) -> bool {
        self == StopReason::Saturated
    }

    pub fn name(self) -> &'static str {
        match self {
            StopReason::Saturated => "saturated",
            StopReason::IterationLimit => "iteration-limit",
            StopReason::NodeLimit => "node-limit",
            StopReason::TimeLimit => "time-limit",
        }
    }
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug)]
pub struct EquivalenceState {
    pub egraph: EGraph,
    pub root: Id,
    pub stop: StopReason,
    pub iterations: usize,
}

impl EquivalenceState {
    pub fn root(&self) -> Id {
        self.egraph.find(self.root)
    }

    /// Whether `e` is represented in the root class.
    pub fn contains(&self, e: &Expr) -> bool {
        self.egraph.lookup_expr(e).is_some_and(|id| id == self.root())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SaturationError {
    #[error("input is ill-typed: {0}")]
    Input(EGraphError),
    #[error("rule {rule} produced an inconsistent graph: {error}")]
    Rule { rule: String, error: EGraphError },
}

struct Match {
    rule: usize,
    arm: usize,
    class: Id,
    subst: Subst,
    extras: Extras,
}

fn bound(g: &EGraph, subst: &Subst) -> Bound {
    subst.iter().map(|(k, &id)| (k.clone(), g.ty(id).clone())).collect()
}

/// Grows the equivalence graph of `e` under `rules` until a fixed point or a limit.
pub fn saturate(e: &Expr, rules: &[Rewrite], cfg: &SaturationConfig) -> Result<EquivalenceState, SaturationError> {
    let start = Instant::now();
    let mut g = EGraph::new();
    let root = g.add_expr(e).map_err(SaturationError::Input)?;
    let mut iterations = 0;
    let stop = loop {
        if rules.is_empty() {
            break StopReason::Saturated;
        }
        if iterations >= cfg.iter_limit {
            break StopReason::IterationLimit;
        }
        if start.elapsed() >= cfg.time_limit {
            break StopReason::TimeLimit;
        }
        iterations += 1;
        let before = g.version();

        let mut matches = Vec::new();
        for (ri, rule) in rules.iter().enumerate() {
            for (ai, arm) in rule.arms.iter().enumerate() {
                for class in g.class_ids() {
                    for subst in ematch(&g, &arm.lhs, class) {
                        for extras in arm.instances(&bound(&g, &subst)) {
                            matches.push(Match {
                                rule: ri,
                                arm: ai,
                                class,
                                subst: subst.clone(),
                                extras,
                            });
                        }
                    }
                }
            }
        }

        let mut hit_node_limit = false;
        for m in &matches {
            let rule = &rules[m.rule];
            let err = |error| SaturationError::Rule {
                rule: rule.name.to_string(),
                error,
            };
            let new = instantiate(&mut g, &rule.arms[m.arm].rhs, &m.subst, &m.extras).map_err(err)?;
            g.union(m.class, new).map_err(err)?;
            if g.num_nodes() > cfg.node_limit {
                hit_node_limit = true;
                break;
            }
        }
        g.rebuild().map_err(|error| SaturationError::Rule {
            rule: "rebuild".into(),
            error,
        })?;
        debug!(
            "iteration {iterations}: {} matches, {} classes, {} nodes",
            matches.len(),
            g.num_classes(),
            g.num_nodes()
        );
        if hit_node_limit {
            break StopReason::NodeLimit;
        }
        if g.version() == before {
            break StopReason::Saturated;
        }
    };
    Ok(EquivalenceState {
        egraph: g,
        root,
        stop,
        iterations,
    })
}
