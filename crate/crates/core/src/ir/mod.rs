//! The access-pattern expression language.
//!
//! Programs are trees of [`Expr`] nodes. Each node carries an [`Op`] head
//! and an ordered list of children. Attribute values (axis indices, window
//! shapes, permutations, reshape targets) are themselves leaf children, which
//! keeps the tree uniform for pattern matching and lets rewrite rules bind
//! attributes with the same variables they use for sub-expressions.

mod shape;

pub mod kernels;
pub mod random;

pub use shape::{
    check_well_formed, infer_node, infer_shape, infer_type, windows_output_dims, NodeError,
    ShapeEnv, ShapeError, Ty, WellFormedReport,
};

use std::fmt;

/// The pair `(access dims, compute dims)` describing an access pattern.
///
/// The underlying tensor has shape `access ++ compute`; the access dims are
/// iterated over and the compute dims are what operators consume.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AccessPatternShape {
    pub access: Vec<usize>,
    pub compute: Vec<usize>,
}

impl AccessPatternShape {
    pub fn new(access: impl Into<Vec<usize>>, compute: impl Into<Vec<usize>>) -> Self {
        Self {
            access: access.into(),
            compute: compute.into(),
        }
    }

    /// A fully computed view of a tensor: no access dims.
    pub fn tensor(dims: impl Into<Vec<usize>>) -> Self {
        Self::new(Vec::new(), dims)
    }

    /// Splits a concatenated dim list at `n_access`.
    pub fn split(dims: &[usize], n_access: usize) -> Self {
        Self::new(&dims[..n_access], &dims[n_access..])
    }

    /// The concatenated tensor shape.
    pub fn dims(&self) -> Vec<usize> {
        let mut dims = self.access.clone();
        dims.extend_from_slice(&self.compute);
        dims
    }

    pub fn rank(&self) -> usize {
        self.access.len() + self.compute.len()
    }

    pub fn num_elements(&self) -> usize {
        self.access.iter().product::<usize>() * self.compute.iter().product::<usize>()
    }

    /// True when flattening would not change the shape.
    pub fn is_flat(&self) -> bool {
        self.access.len() <= 1 && self.compute.len() <= 1
    }
}

fn fmt_tuple(f: &mut fmt::Formatter<'_>, dims: &[usize]) -> fmt::Result {
    write!(f, "(")?;
    for (i, d) in dims.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{d}")?;
    }
    write!(f, ")")
}

impl fmt::Display for AccessPatternShape {
    /// Renders as `((a, b), (c))`, the notation used in shape annotations.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        fmt_tuple(f, &self.access)?;
        write!(f, ", ")?;
        fmt_tuple(f, &self.compute)?;
        write!(f, ")")
    }
}

/// Operators that may be mapped over compute dims with `compute`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ComputeOp {
    ReduceSum,
    ReduceMax,
    DotProd,
}

impl ComputeOp {
    pub const ALL: [ComputeOp; 3] = [ComputeOp::ReduceSum, ComputeOp::ReduceMax, ComputeOp::DotProd];

    pub fn name(self) -> &'static str {
        match self {
            ComputeOp::ReduceSum => "reduceSum",
            ComputeOp::ReduceMax => "reduceMax",
            ComputeOp::DotProd => "dotProd",
        }
    }

    /// Accepts both the camelCase and the hyphenated spellings.
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "reduceSum" | "reduce-sum" => Some(ComputeOp::ReduceSum),
            "reduceMax" | "reduce-max" => Some(ComputeOp::ReduceMax),
            "dotProd" | "dot-product" => Some(ComputeOp::DotProd),
            _ => None,
        }
    }
}

/// Framework-level tensor operators, as they appear in imported programs.
///
/// These work on plain tensors (their result has no access dims). `dense`
/// follows the weight-transposed convention: `dense(a, b)[i, j] = Σ_k a[i, k]
/// · b[j, k]`, so a rank-1 bias lines up with the last output dim.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NamedOpKind {
    Dense,
    BiasAdd,
    Add,
    ReshapeOp,
    FlattenOp,
    Conv2d,
}

impl NamedOpKind {
    pub fn name(self) -> &'static str {
        match self {
            NamedOpKind::Dense => "dense",
            NamedOpKind::BiasAdd => "bias_add",
            NamedOpKind::Add => "add",
            NamedOpKind::ReshapeOp => "reshape_op",
            NamedOpKind::FlattenOp => "flatten_op",
            NamedOpKind::Conv2d => "conv2d",
        }
    }
}

/// Opaque accelerator invocations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AccelKind {
    SystolicArray,
    VtaDense,
    HlscnnConv2d,
}

impl AccelKind {
    pub const ALL: [AccelKind; 3] = [
        AccelKind::SystolicArray,
        AccelKind::VtaDense,
        AccelKind::HlscnnConv2d,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AccelKind::SystolicArray => "systolicArray",
            AccelKind::VtaDense => "vta-dense",
            AccelKind::HlscnnConv2d => "hlscnn-conv2d",
        }
    }
}

/// The head of an expression node.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    /// A program input. Its access pattern is fully computed: `((), shape)`.
    Var { name: String, shape: Vec<usize> },
    /// Integer attribute (axis index, bound, count).
    Int(usize),
    /// `(list i ...)`, used for permutations.
    List(Vec<usize>),
    /// `(shape d ...)`, used for window shapes, strides and tensor shapes.
    Shape(Vec<usize>),
    /// `(shape-pair (shape ...) (shape ...))`, an access-pattern shape literal.
    ShapePair(AccessPatternShape),
    Access,
    Transpose,
    CartProd,
    Windows,
    Slice,
    Squeeze,
    Flatten,
    Reshape,
    Pair,
    Concat,
    Compute(ComputeOp),
    Named(NamedOpKind),
    Accel(AccelKind),
}

/// What a child position holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Expr,
    Int,
    List,
    Shape,
    ShapePair,
}

impl Op {
    /// Child slots, in order. Leaves have none.
    pub fn signature(&self) -> &'static [Slot] {
        use Slot::*;
        match self {
            Op::Var { .. } | Op::Int(_) | Op::List(_) | Op::Shape(_) | Op::ShapePair(_) => &[],
            Op::Access => &[Expr, Int],
            Op::Transpose => &[Expr, List],
            Op::CartProd | Op::Pair => &[Expr, Expr],
            Op::Windows => &[Expr, Shape, Shape],
            Op::Slice => &[Expr, Int, Int, Int],
            Op::Squeeze => &[Expr, Int],
            Op::Flatten => &[Expr],
            Op::Reshape => &[Expr, ShapePair],
            Op::Concat => &[Expr, Expr, Int],
            Op::Compute(_) => &[Expr],
            Op::Named(kind) => match kind {
                NamedOpKind::Dense | NamedOpKind::BiasAdd | NamedOpKind::Add => &[Expr, Expr],
                NamedOpKind::ReshapeOp => &[Expr, Shape],
                NamedOpKind::FlattenOp => &[Expr],
                NamedOpKind::Conv2d => &[Expr, Expr, Int, Int, Int],
            },
            Op::Accel(kind) => match kind {
                AccelKind::SystolicArray => &[Int, Int, Expr, Expr],
                AccelKind::VtaDense => &[Expr, Expr, Expr],
                AccelKind::HlscnnConv2d => &[Expr, Expr, Int, Int, Int],
            },
        }
    }

    pub fn is_literal(&self) -> bool {
        matches!(
            self,
            Op::Int(_) | Op::List(_) | Op::Shape(_) | Op::ShapePair(_)
        )
    }

    pub fn is_transformer(&self) -> bool {
        matches!(
            self,
            Op::Access
                | Op::Transpose
                | Op::CartProd
                | Op::Windows
                | Op::Slice
                | Op::Squeeze
                | Op::Flatten
                | Op::Reshape
                | Op::Pair
                | Op::Concat
        )
    }

    /// The surface-syntax head symbol.
    pub fn head(&self) -> &str {
        match self {
            Op::Var { name, .. } => name,
            Op::Int(_) => "int",
            Op::List(_) => "list",
            Op::Shape(_) => "shape",
            Op::ShapePair(_) => "shape-pair",
            Op::Access => "access",
            Op::Transpose => "transpose",
            Op::CartProd => "cartProd",
            Op::Windows => "windows",
            Op::Slice => "slice",
            Op::Squeeze => "squeeze",
            Op::Flatten => "flatten",
            Op::Reshape => "reshape",
            Op::Pair => "pair",
            Op::Concat => "concat",
            Op::Compute(_) => "compute",
            Op::Named(kind) => kind.name(),
            Op::Accel(kind) => kind.name(),
        }
    }
}

/// An immutable expression tree.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Expr {
    pub op: Op,
    pub args: Vec<Expr>,
}

impl Expr {
    pub fn new(op: Op, args: Vec<Expr>) -> Self {
        Self { op, args }
    }

    pub fn leaf(op: Op) -> Self {
        Self::new(op, Vec::new())
    }

    pub fn var(name: impl Into<String>, shape: impl Into<Vec<usize>>) -> Self {
        Self::leaf(Op::Var {
            name: name.into(),
            shape: shape.into(),
        })
    }

    pub fn int(n: usize) -> Self {
        Self::leaf(Op::Int(n))
    }

    pub fn list(items: impl Into<Vec<usize>>) -> Self {
        Self::leaf(Op::List(items.into()))
    }

    pub fn shape(dims: impl Into<Vec<usize>>) -> Self {
        Self::leaf(Op::Shape(dims.into()))
    }

    pub fn shape_pair(shape: AccessPatternShape) -> Self {
        Self::leaf(Op::ShapePair(shape))
    }

    pub fn access(inner: Expr, n_access: usize) -> Self {
        Self::new(Op::Access, vec![inner, Self::int(n_access)])
    }

    pub fn transpose(inner: Expr, perm: impl Into<Vec<usize>>) -> Self {
        Self::new(Op::Transpose, vec![inner, Self::list(perm)])
    }

    pub fn cart_prod(left: Expr, right: Expr) -> Self {
        Self::new(Op::CartProd, vec![left, right])
    }

    pub fn windows(inner: Expr, window: impl Into<Vec<usize>>, strides: impl Into<Vec<usize>>) -> Self {
        Self::new(
            Op::Windows,
            vec![inner, Self::shape(window), Self::shape(strides)],
        )
    }

    pub fn slice(inner: Expr, dim: usize, lo: usize, hi: usize) -> Self {
        Self::new(
            Op::Slice,
            vec![inner, Self::int(dim), Self::int(lo), Self::int(hi)],
        )
    }

    pub fn squeeze(inner: Expr, dim: usize) -> Self {
        Self::new(Op::Squeeze, vec![inner, Self::int(dim)])
    }

    pub fn flatten(inner: Expr) -> Self {
        Self::new(Op::Flatten, vec![inner])
    }

    pub fn reshape(inner: Expr, target: AccessPatternShape) -> Self {
        Self::new(Op::Reshape, vec![inner, Self::shape_pair(target)])
    }

    pub fn pair(left: Expr, right: Expr) -> Self {
        Self::new(Op::Pair, vec![left, right])
    }

    pub fn concat(left: Expr, right: Expr, dim: usize) -> Self {
        Self::new(Op::Concat, vec![left, right, Self::int(dim)])
    }

    pub fn compute(op: ComputeOp, inner: Expr) -> Self {
        Self::new(Op::Compute(op), vec![inner])
    }

    pub fn named(kind: NamedOpKind, args: Vec<Expr>) -> Self {
        Self::new(Op::Named(kind), args)
    }

    pub fn dense(a: Expr, b: Expr) -> Self {
        Self::named(NamedOpKind::Dense, vec![a, b])
    }

    pub fn bias_add(x: Expr, bias: Expr) -> Self {
        Self::named(NamedOpKind::BiasAdd, vec![x, bias])
    }

    pub fn add(x: Expr, y: Expr) -> Self {
        Self::named(NamedOpKind::Add, vec![x, y])
    }

    pub fn reshape_op(x: Expr, shape: impl Into<Vec<usize>>) -> Self {
        Self::named(NamedOpKind::ReshapeOp, vec![x, Self::shape(shape)])
    }

    pub fn flatten_op(x: Expr) -> Self {
        Self::named(NamedOpKind::FlattenOp, vec![x])
    }

    pub fn conv2d(act: Expr, wgt: Expr, strides: (usize, usize), group: usize) -> Self {
        Self::named(
            NamedOpKind::Conv2d,
            vec![act, wgt, Self::int(strides.0), Self::int(strides.1), Self::int(group)],
        )
    }

    pub fn systolic_array(rows: usize, cols: usize, a0: Expr, a1: Expr) -> Self {
        Self::new(
            Op::Accel(AccelKind::SystolicArray),
            vec![Self::int(rows), Self::int(cols), a0, a1],
        )
    }

    pub fn vta_dense(x: Expr, w: Expr, bias: Expr) -> Self {
        Self::new(Op::Accel(AccelKind::VtaDense), vec![x, w, bias])
    }

    pub fn hlscnn_conv2d(act: Expr, wgt: Expr, strides: (usize, usize), group: usize) -> Self {
        Self::new(
            Op::Accel(AccelKind::HlscnnConv2d),
            vec![act, wgt, Self::int(strides.0), Self::int(strides.1), Self::int(group)],
        )
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        for arg in &self.args {
            arg.walk(f);
        }
    }

    /// Number of nodes, literal leaves included.
    pub fn size(&self) -> usize {
        1 + self.args.iter().map(Expr::size).sum::<usize>()
    }

    /// Counts nodes whose head satisfies `pred`.
    pub fn count(&self, pred: impl Fn(&Op) -> bool) -> usize {
        let mut n = 0;
        self.walk(&mut |e| {
            if pred(&e.op) {
                n += 1;
            }
        });
        n
    }

    /// Distinct free variables in first-occurrence order.
    pub fn free_vars(&self) -> Vec<(String, Vec<usize>)> {
        let mut out: Vec<(String, Vec<usize>)> = Vec::new();
        self.walk(&mut |e| {
            if let Op::Var { name, shape } = &e.op {
                if !out.iter().any(|(n, _)| n == name) {
                    out.push((name.clone(), shape.clone()));
                }
            }
        });
        out
    }

    pub fn as_int(&self) -> Option<usize> {
        match self.op {
            Op::Int(n) => Some(n),
            _ => None,
        }
    }
}
