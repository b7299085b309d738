use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use super::egraph::{EGraph, ENode, Id};
use super::saturate::EquivalenceState;
use crate::ir::{ComputeOp, Expr, Op};

/// Per-node weights. A term costs the sum of its nodes' weights.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CostModel {
    pub var: u64,
    pub literal: u64,
    pub transformer: u64,
    pub dot_prod: u64,
    pub reduce_sum: u64,
    pub reduce_max: u64,
    pub named: u64,
    pub accel: u64,
}

impl Default for CostModel {
    /// Offload-favoring weights: an accelerator call is far cheaper than the
    /// host computation it replaces. Summing two partial results is cheap so
    /// that blocked multiplies can win.
    fn default() -> Self {
        Self {
            var: 0,
            literal: 0,
            transformer: 1,
            dot_prod: 1000,
            reduce_sum: 10,
            reduce_max: 1000,
            named: 1000,
            accel: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CostParseError {
    #[error("expected KEY=VALUE, found `{0}`")]
    Malformed(String),
    #[error("unknown cost key `{0}`")]
    UnknownKey(String),
    #[error("invalid weight for `{key}`: `{value}`")]
    BadValue { key: String, value: String },
}

impl CostModel {
    pub fn weight(&self, op: &Op) -> u64 {
        match op {
            Op::Var { .. } => self.var,
            op if op.is_literal() => self.literal,
            op if op.is_transformer() => self.transformer,
            Op::Compute(ComputeOp::DotProd) => self.dot_prod,
            Op::Compute(ComputeOp::ReduceSum) => self.reduce_sum,
            Op::Compute(ComputeOp::ReduceMax) => self.reduce_max,
            Op::Named(_) => self.named,
            Op::Accel(_) => self.accel,
            _ => unreachable!("every op kind is covered"),
        }
    }

    pub fn cost(&self, e: &Expr) -> u64 {
        e.args
            .iter()
            .fold(self.weight(&e.op), |acc, a| acc.saturating_add(self.cost(a)))
    }

    /// Applies `key=value,...` overrides. `compute` sets all three operator weights.
    pub fn with_overrides(mut self, spec: &str) -> Result<Self, CostParseError> {
        for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| CostParseError::Malformed(part.to_string()))?;
            let (key, value) = (key.trim(), value.trim());
            let v: u64 = value.parse().map_err(|_| CostParseError::BadValue {
                key: key.to_string(),
                value: value.to_string(),
            })?;
            match key {
                "var" => self.var = v,
                "literal" => self.literal = v,
                "transformer" => self.transformer = v,
                "compute" => {
                    self.dot_prod = v;
                    self.reduce_sum = v;
                    self.reduce_max = v;
                }
                "dot_prod" => self.dot_prod = v,
                "reduce_sum" => self.reduce_sum = v,
                "reduce_max" => self.reduce_max = v,
                "named" => self.named = v,
                "accel" => self.accel = v,
                _ => return Err(CostParseError::UnknownKey(key.to_string())),
            }
        }
        Ok(self)
    }
}

impl FromStr for CostModel {
    type Err = CostParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CostModel::default().with_overrides(s)
    }
}

impl fmt::Display for CostModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "var={},literal={},transformer={},dot_prod={},reduce_sum={},reduce_max={},named={},accel={}",
            self.var, self.literal, self.transformer, self.dot_prod, self.reduce_sum, self.reduce_max, self.named, self.accel
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ExtractError {
    #[error("class {0} has no finite term")]
    EmptyClass(Id),
}

/// Best (cost, size, node) for every class reachable bottom-up.
pub fn best_nodes(g: &EGraph, cost: &CostModel) -> HashMap<Id, (u64, usize, ENode)> {
    let mut best: HashMap<Id, (u64, usize, ENode)> = HashMap::new();
    loop {
        let mut changed = false;
        for class in g.classes() {
            for node in &class.nodes {
                let mut c = cost.weight(&node.op);
                let mut size = 1usize;
                let mut ok = true;
                for ch in &node.children {
                    match best.get(&g.find(*ch)) {
                        Some((cc, cs, _)) => {
                            c = c.saturating_add(*cc);
                            size = size.saturating_add(*cs);
                        }
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
                if !ok {
                    continue;
                }
                let better = match best.get(&class.id) {
                    None => true,
                    Some((bc, bs, bn)) => (c, size, node) < (*bc, *bs, bn),
                };
                if better {
                    best.insert(class.id, (c, size, node.clone()));
                    changed = true;
                }
            }
        }
        if !changed {
            return best;
        }
    }
}

/// Minimum-cost term of `id`. Ties go to fewer nodes, then the smaller node.
pub fn extract_class(g: &EGraph, id: Id, cost: &CostModel) -> Result<(Expr, u64), ExtractError> {
    let best = best_nodes(g, cost);
    fn build(g: &EGraph, best: &HashMap<Id, (u64, usize, ENode)>, id: Id) -> Result<Expr, ExtractError> {
        let id = g.find(id);
        let (_, _, node) = best.get(&id).ok_or(ExtractError::EmptyClass(id))?;
        Ok(Expr::new(
            node.op.clone(),
            node.children
                .iter()
                .map(|&c| build(g, best, c))
                .collect::<Result<Vec<_>, _>>()?,
        ))
    }
    let root = g.find(id);
    let e = build(g, &best, root)?;
    Ok((e, best[&root].0))
}

pub fn extract(state: &EquivalenceState, cost: &CostModel) -> Result<Expr, ExtractError> {
    extract_class(&state.egraph, state.root(), cost).map(|(e, _)| e)
}
