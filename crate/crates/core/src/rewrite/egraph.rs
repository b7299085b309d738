//! Hash-consed e-graph with a per-class type analysis.

use std::collections::HashMap;
use std::fmt;

use crate::ir::{infer_node, Expr, Op, ShapeError, Ty};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Id(pub u32);

impl fmt::Display for Id {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ENode {
    pub op: Op,
    pub children: Vec<Id>,
}

#[derive(Clone, Debug)]
pub struct EClass {
    pub id: Id,
    pub nodes: Vec<ENode>,
    pub ty: Ty,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EGraphError {
    #[error("ill-typed node `{head}`: {error}")]
    IllTyped { head: String, error: ShapeError },
    #[error("merging {a} and {b} joins different types: {ta:?} vs {tb:?}")]
    TypeConflict { a: Id, b: Id, ta: Ty, tb: Ty },
}

#[derive(Clone, Debug, Default)]
pub struct EGraph {
    parent: Vec<u32>,
    classes: Vec<Option<EClass>>,
    memo: HashMap<ENode, Id>,
    /// Bumped whenever a node is added or two distinct classes merge.
    version: u64,
    dirty: bool,
    nodes: usize,
}

impl EGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn find(&self, id: Id) -> Id {
        let mut x = id.0;
        while self.parent[x as usize] != x {
            x = self.parent[x as usize];
        }
        Id(x)
    }

    fn find_compress(&mut self, id: Id) -> Id {
        let root = self.find(id);
        let mut x = id.0;
        while self.parent[x as usize] != root.0 {
            let next = self.parent[x as usize];
            self.parent[x as usize] = root.0;
            x = next;
        }
        root
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    fn canonical(&self, node: &ENode) -> ENode {
        ENode {
            op: node.op.clone(),
            children: node.children.iter().map(|&c| self.find(c)).collect(),
        }
    }

    /// Looks up a node without inserting it.
    pub fn lookup(&self, node: &ENode) -> Option<Id> {
        self.memo.get(&self.canonical(node)).map(|&id| self.find(id))
    }

    pub fn add(&mut self, node: ENode) -> Result<Id, EGraphError> {
        let node = self.canonical(&node);
        if let Some(&id) = self.memo.get(&node) {
            return Ok(self.find(id));
        }
        let child_tys: Vec<Ty> = node.children.iter().map(|&c| self.ty(c).clone()).collect();
        let ty = infer_node(&node.op, &child_tys).map_err(|error| EGraphError::IllTyped {
            head: node.op.head().to_string(),
            error,
        })?;
        let id = Id(self.parent.len() as u32);
        self.parent.push(id.0);
        self.classes.push(Some(EClass {
            id,
            nodes: vec![node.clone()],
            ty,
        }));
        self.memo.insert(node, id);
        self.version += 1;
        self.nodes += 1;
        Ok(id)
    }

    pub fn add_expr(&mut self, e: &Expr) -> Result<Id, EGraphError> {
        let children = e
            .args
            .iter()
            .map(|a| self.add_expr(a))
            .collect::<Result<Vec<_>, _>>()?;
        self.add(ENode {
            op: e.op.clone(),
            children,
        })
    }

    /// The class holding `e`, if every node of `e` is already present.
    pub fn lookup_expr(&self, e: &Expr) -> Option<Id> {
        let children = e
            .args
            .iter()
            .map(|a| self.lookup_expr(a))
            .collect::<Option<Vec<_>>>()?;
        self.lookup(&ENode {
            op: e.op.clone(),
            children,
        })
    }

    /// Merges two classes. Returns whether anything changed.
    pub fn union(&mut self, a: Id, b: Id) -> Result<bool, EGraphError> {
        let (a, b) = (self.find_compress(a), self.find_compress(b));
        if a == b {
            return Ok(false);
        }
        let (ta, tb) = (self.ty(a).clone(), self.ty(b).clone());
        if ta != tb {
            return Err(EGraphError::TypeConflict { a, b, ta, tb });
        }
        // The lower id survives so that ids stay stable under permutation of merges.
        let (keep, gone) = if a < b { (a, b) } else { (b, a) };
        self.parent[gone.0 as usize] = keep.0;
        let moved = self.classes[gone.0 as usize].take().expect("live class");
        self.classes[keep.0 as usize]
            .as_mut()
            .expect("live class")
            .nodes
            .extend(moved.nodes);
        self.version += 1;
        self.dirty = true;
        Ok(true)
    }

    /// Restores congruence closure and canonical, deduplicated node lists.
    pub fn rebuild(&mut self) -> Result<(), EGraphError> {
        loop {
            let mut memo: HashMap<ENode, Id> = HashMap::with_capacity(self.memo.len());
            let mut merges = Vec::new();
            for i in 0..self.classes.len() {
                let Some(class) = &self.classes[i] else { continue };
                let id = class.id;
                let mut nodes: Vec<ENode> = class.nodes.iter().map(|n| self.canonical(n)).collect();
                nodes.sort();
                nodes.dedup();
                for n in &nodes {
                    match memo.get(n) {
                        Some(&other) if other != id => merges.push((other, id)),
                        Some(_) => {}
                        None => {
                            memo.insert(n.clone(), id);
                        }
                    }
                }
                self.classes[i].as_mut().unwrap().nodes = nodes;
            }
            self.memo = memo;
            if merges.is_empty() {
                break;
            }
            for (a, b) in merges {
                self.union(a, b)?;
            }
        }
        self.dirty = false;
        self.nodes = self.classes().map(|c| c.nodes.len()).sum();
        Ok(())
    }

    pub fn is_clean(&self) -> bool {
        !self.dirty
    }

    pub fn class(&self, id: Id) -> &EClass {
        self.classes[self.find(id).0 as usize].as_ref().expect("live class")
    }

    pub fn ty(&self, id: Id) -> &Ty {
        &self.class(id).ty
    }

    /// Live classes in ascending id order.
    pub fn classes(&self) -> impl Iterator<Item = &EClass> {
        self.classes.iter().flatten()
    }

    pub fn class_ids(&self) -> Vec<Id> {
        self.classes().map(|c| c.id).collect()
    }

    pub fn num_classes(&self) -> usize {
        self.classes().count()
    }

    /// Node count; exact after [`EGraph::rebuild`], an upper bound before.
    pub fn num_nodes(&self) -> usize {
        self.nodes
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{AccessPatternShape, Expr};

    #[test]
    fn hashconsing_shares_structure() {
        let mut g = EGraph::new();
        let x = Expr::access(Expr::var("x", [2, 3]), 1);
        let a = g.add_expr(&Expr::flatten(x.clone())).unwrap();
        let b = g.add_expr(&Expr::flatten(x.clone())).unwrap();
        assert_eq!(a, b);
        // var, int, access, flatten
        assert_eq!(g.num_classes(), 4);
        assert_eq!(g.lookup_expr(&x), Some(g.find(g.lookup_expr(&x).unwrap())));
        assert!(g.lookup_expr(&Expr::flatten(Expr::var("x", [2, 3]))).is_none());
    }

    #[test]
    fn union_propagates_congruence() {
        let mut g = EGraph::new();
        let x = Expr::access(Expr::var("x", [4, 4]), 1);
        let rs = Expr::reshape(Expr::flatten(x.clone()), AccessPatternShape::new(vec![4], vec![4]));
        let fx = g.add_expr(&Expr::flatten(x.clone())).unwrap();
        let frs = g.add_expr(&Expr::flatten(rs.clone())).unwrap();
        assert_ne!(g.find(fx), g.find(frs));
        let (ix, irs) = (g.lookup_expr(&x).unwrap(), g.lookup_expr(&rs).unwrap());
        assert!(g.union(ix, irs).unwrap());
        g.rebuild().unwrap();
        assert_eq!(g.find(fx), g.find(frs));
    }

    #[test]
    fn ill_typed_merges_are_rejected() {
        let mut g = EGraph::new();
        let a = g.add_expr(&Expr::access(Expr::var("x", [2, 3]), 1)).unwrap();
        let b = g.add_expr(&Expr::access(Expr::var("x", [2, 3]), 0)).unwrap();
        assert!(matches!(g.union(a, b), Err(EGraphError::TypeConflict { .. })));
        assert!(matches!(
            g.add_expr(&Expr::squeeze(Expr::var("x", [2, 3]), 0)),
            Err(EGraphError::IllTyped { .. })
        ));
    }
}
