//! E-matching and instantiation of [`Pattern`]s.

use std::collections::BTreeMap;

use super::egraph::{EGraph, EGraphError, ENode, Id};
use crate::ir::Expr;
use crate::textio::Pattern;

/// Hole name to matched class.
pub type Subst = BTreeMap<String, Id>;

/// All substitutions under which `pat` matches some node of class `id`.
pub fn ematch(g: &EGraph, pat: &Pattern, id: Id) -> Vec<Subst> {
    let mut out = Vec::new();
    go(g, pat, id, Subst::new(), &mut out);
    out
}

fn go(g: &EGraph, pat: &Pattern, id: Id, subst: Subst, out: &mut Vec<Subst>) {
    let id = g.find(id);
    match pat {
        Pattern::Hole(h) => match subst.get(h) {
            Some(&bound) if g.find(bound) != id => {}
            Some(_) => out.push(subst),
            None => {
                let mut s = subst;
                s.insert(h.clone(), id);
                out.push(s);
            }
        },
        Pattern::Node(op, args) => {
            for node in &g.class(id).nodes {
                if &node.op != op || node.children.len() != args.len() {
                    continue;
                }
                let mut partial = vec![subst.clone()];
                for (a, &child) in args.iter().zip(&node.children) {
                    let mut next = Vec::new();
                    for s in partial {
                        go(g, a, child, s, &mut next);
                    }
                    partial = next;
                    if partial.is_empty() {
                        break;
                    }
                }
                out.extend(partial);
            }
        }
    }
}

/// Adds `pat` to the graph with holes taken from `subst` or, failing that, `extra`.
pub fn instantiate(
    g: &mut EGraph,
    pat: &Pattern,
    subst: &Subst,
    extra: &BTreeMap<String, Expr>,
) -> Result<Id, EGraphError> {
    match pat {
        Pattern::Hole(h) => match (subst.get(h), extra.get(h)) {
            (Some(&id), _) => Ok(id),
            (None, Some(e)) => g.add_expr(e),
            (None, None) => panic!("hole ?{h} is unbound; rule definitions bind every right-hand hole"),
        },
        Pattern::Node(op, args) => {
            let children = args
                .iter()
                .map(|a| instantiate(g, a, subst, extra))
                .collect::<Result<Vec<_>, _>>()?;
            g.add(ENode {
                op: op.clone(),
                children,
            })
        }
    }
}

/// Substitutes holes with concrete expressions.
pub fn instantiate_expr(pat: &Pattern, bindings: &BTreeMap<String, Expr>) -> Expr {
    match pat {
        Pattern::Hole(h) => bindings
            .get(h)
            .unwrap_or_else(|| panic!("hole ?{h} is unbound"))
            .clone(),
        Pattern::Node(op, args) => Expr::new(
            op.clone(),
            args.iter().map(|a| instantiate_expr(a, bindings)).collect(),
        ),
    }
}
