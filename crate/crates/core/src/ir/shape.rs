use std::collections::HashMap;
use std::fmt;

use super::{AccelKind, AccessPatternShape, ComputeOp, Expr, NamedOpKind, Op, Slot};

/// Variable name to declared tensor shape.
pub type ShapeEnv = HashMap<String, Vec<usize>>;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ShapeError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("dimension index {index} out of range for rank {rank}")]
    DimIndexOutOfRange { index: usize, rank: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("arity error: {0}")]
    ArityError(String),
    #[error("window of size {window} does not fit in dimension of size {dim}")]
    WindowTooLarge { window: usize, dim: usize },
}

fn mismatch(msg: impl Into<String>) -> ShapeError {
    ShapeError::ShapeMismatch(msg.into())
}

/// The static type of a node: an access pattern, or one of the literal kinds.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Ty {
    Access(AccessPatternShape),
    Int(usize),
    List(Vec<usize>),
    Shape(Vec<usize>),
    ShapePair(AccessPatternShape),
}

impl Ty {
    pub fn access(&self) -> Option<&AccessPatternShape> {
        match self {
            Ty::Access(s) => Some(s),
            _ => None,
        }
    }

    pub fn int(&self) -> Option<usize> {
        match self {
            Ty::Int(n) => Some(*n),
            _ => None,
        }
    }

    fn slot(&self) -> Slot {
        match self {
            Ty::Access(_) => Slot::Expr,
            Ty::Int(_) => Slot::Int,
            Ty::List(_) => Slot::List,
            Ty::Shape(_) => Slot::Shape,
            Ty::ShapePair(_) => Slot::ShapePair,
        }
    }
}

/// Output extents of a strided window sweep: `⌈(b_i − (w_i − 1)) / s_i⌉`.
pub fn windows_output_dims(
    dims: &[usize],
    window: &[usize],
    strides: &[usize],
) -> Result<Vec<usize>, ShapeError> {
    if dims.len() != window.len() || dims.len() != strides.len() {
        return Err(mismatch(format!(
            "windows over {} dims given window of rank {} and strides of rank {}",
            dims.len(),
            window.len(),
            strides.len()
        )));
    }
    dims.iter()
        .zip(window)
        .zip(strides)
        .map(|((&b, &w), &s)| {
            if w == 0 || s == 0 {
                return Err(mismatch("window and stride extents must be positive"));
            }
            if w > b {
                return Err(ShapeError::WindowTooLarge { window: w, dim: b });
            }
            Ok((b - w) / s + 1)
        })
        .collect()
}

fn check_index(index: usize, rank: usize) -> Result<(), ShapeError> {
    if index < rank {
        Ok(())
    } else {
        Err(ShapeError::DimIndexOutOfRange { index, rank })
    }
}

fn check_positive(dims: &[usize], what: &str) -> Result<(), ShapeError> {
    if dims.contains(&0) {
        Err(mismatch(format!("{what} has a zero-sized dimension: {dims:?}")))
    } else {
        Ok(())
    }
}

fn broadcast(a: &[usize], b: &[usize]) -> Result<Vec<usize>, ShapeError> {
    let rank = a.len().max(b.len());
    let mut out = vec![0; rank];
    for i in 0..rank {
        let da = if i + a.len() >= rank { a[i + a.len() - rank] } else { 1 };
        let db = if i + b.len() >= rank { b[i + b.len() - rank] } else { 1 };
        out[i] = match (da, db) {
            (x, y) if x == y => x,
            (1, y) => y,
            (x, 1) => x,
            _ => return Err(mismatch(format!("cannot broadcast {a:?} with {b:?}"))),
        };
    }
    Ok(out)
}

fn conv2d_shape(
    act: &AccessPatternShape,
    wgt: &AccessPatternShape,
    sh: usize,
    sw: usize,
    group: usize,
) -> Result<Ty, ShapeError> {
    let (a, w) = (act.dims(), wgt.dims());
    if a.len() != 4 || w.len() != 4 {
        return Err(mismatch(format!(
            "conv2d expects 4-d activations and weights, got {a:?} and {w:?}"
        )));
    }
    if group != 1 {
        return Err(mismatch(format!("conv2d supports group 1 only, got {group}")));
    }
    if a[1] != w[1] {
        return Err(mismatch(format!(
            "conv2d channel mismatch: activations {a:?}, weights {w:?}"
        )));
    }
    let spatial = windows_output_dims(&a[2..], &w[2..], &[sh, sw])?;
    Ok(Ty::Access(AccessPatternShape::tensor(vec![
        a[0], w[0], spatial[0], spatial[1],
    ])))
}

fn dense_shape(a: &AccessPatternShape, b: &AccessPatternShape) -> Result<Vec<usize>, ShapeError> {
    match (a.dims().as_slice(), b.dims().as_slice()) {
        (&[m, k], &[n, k2]) if k == k2 => Ok(vec![m, n]),
        (x, y) => Err(mismatch(format!(
            "dense expects (m, k) and (n, k), got {x:?} and {y:?}"
        ))),
    }
}

fn bias_add_shape(x: &[usize], bias: &AccessPatternShape) -> Result<Vec<usize>, ShapeError> {
    match (x.last(), bias.dims().as_slice()) {
        (Some(&n), &[m]) if n == m => Ok(x.to_vec()),
        (_, c) => Err(mismatch(format!(
            "bias_add expects a rank-1 bias matching the last dim of {x:?}, got {c:?}"
        ))),
    }
}

/// Type of a single node given the types of its children.
///
/// Shared by tree-level inference and the e-graph analysis.
pub fn infer_node(op: &Op, args: &[Ty]) -> Result<Ty, ShapeError> {
    let sig = op.signature();
    if sig.len() != args.len() {
        return Err(ShapeError::ArityError(format!(
            "`{}` takes {} arguments, got {}",
            op.head(),
            sig.len(),
            args.len()
        )));
    }
    for (i, (slot, ty)) in sig.iter().zip(args).enumerate() {
        if *slot != ty.slot() {
            return Err(ShapeError::ArityError(format!(
                "argument {i} of `{}` should be {slot:?}, got {:?}",
                op.head(),
                ty.slot()
            )));
        }
    }
    let ap = |i: usize| args[i].access().expect("slot checked");
    let int = |i: usize| args[i].int().expect("slot checked");

    let out = match op {
        Op::Var { shape, .. } => {
            check_positive(shape, "variable shape")?;
            AccessPatternShape::tensor(shape.clone())
        }
        Op::Int(n) => return Ok(Ty::Int(*n)),
        Op::List(v) => return Ok(Ty::List(v.clone())),
        Op::Shape(v) => return Ok(Ty::Shape(v.clone())),
        Op::ShapePair(s) => return Ok(Ty::ShapePair(s.clone())),
        Op::Access => {
            let dims = ap(0).dims();
            let n = int(1);
            if n > dims.len() {
                return Err(ShapeError::DimIndexOutOfRange {
                    index: n,
                    rank: dims.len(),
                });
            }
            AccessPatternShape::split(&dims, n)
        }
        Op::Transpose => {
            let s = ap(0);
            let Ty::List(perm) = &args[1] else { unreachable!() };
            let dims = s.dims();
            if perm.len() != dims.len() {
                return Err(mismatch(format!(
                    "permutation {perm:?} does not cover rank {}",
                    dims.len()
                )));
            }
            let mut seen = vec![false; dims.len()];
            for &p in perm {
                check_index(p, dims.len())?;
                if std::mem::replace(&mut seen[p], true) {
                    return Err(mismatch(format!("{perm:?} is not a permutation")));
                }
            }
            let permuted: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
            AccessPatternShape::split(&permuted, s.access.len())
        }
        Op::CartProd => {
            let (l, r) = (ap(0), ap(1));
            if l.compute != r.compute {
                return Err(mismatch(format!(
                    "cartProd compute dims differ: {l} vs {r}"
                )));
            }
            let mut access = l.access.clone();
            access.extend_from_slice(&r.access);
            let mut compute = vec![2];
            compute.extend_from_slice(&l.compute);
            AccessPatternShape::new(access, compute)
        }
        Op::Windows => {
            let s = ap(0);
            let (Ty::Shape(window), Ty::Shape(strides)) = (&args[1], &args[2]) else {
                unreachable!()
            };
            let swept = windows_output_dims(&s.compute, window, strides)?;
            let mut access = s.access.clone();
            access.extend(swept);
            AccessPatternShape::new(access, window.clone())
        }
        Op::Slice => {
            let s = ap(0);
            let (d, lo, hi) = (int(1), int(2), int(3));
            let mut dims = s.dims();
            check_index(d, dims.len())?;
            if lo >= hi || hi > dims[d] {
                return Err(mismatch(format!(
                    "slice [{lo}, {hi}) out of bounds for dim {d} of size {}",
                    dims[d]
                )));
            }
            dims[d] = hi - lo;
            AccessPatternShape::split(&dims, s.access.len())
        }
        Op::Squeeze => {
            let s = ap(0);
            let d = int(1);
            let mut dims = s.dims();
            check_index(d, dims.len())?;
            if dims[d] != 1 {
                return Err(mismatch(format!(
                    "squeeze of non-1 dim {d} (size {})",
                    dims[d]
                )));
            }
            dims.remove(d);
            let n_access = if d < s.access.len() {
                s.access.len() - 1
            } else {
                s.access.len()
            };
            AccessPatternShape::split(&dims, n_access)
        }
        Op::Flatten => {
            let s = ap(0);
            let flat = |v: &[usize]| -> Vec<usize> {
                if v.is_empty() {
                    Vec::new()
                } else {
                    vec![v.iter().product()]
                }
            };
            AccessPatternShape::new(flat(&s.access), flat(&s.compute))
        }
        Op::Reshape => {
            let s = ap(0);
            let Ty::ShapePair(target) = &args[1] else { unreachable!() };
            check_positive(&target.dims(), "reshape target")?;
            let prod = |v: &[usize]| v.iter().product::<usize>();
            if prod(&s.access) != prod(&target.access) || prod(&s.compute) != prod(&target.compute)
            {
                return Err(mismatch(format!("cannot reshape {s} to {target}")));
            }
            target.clone()
        }
        Op::Pair => {
            let (l, r) = (ap(0), ap(1));
            if l != r {
                return Err(mismatch(format!("pair operands differ: {l} vs {r}")));
            }
            let mut compute = vec![2];
            compute.extend_from_slice(&l.compute);
            AccessPatternShape::new(l.access.clone(), compute)
        }
        Op::Concat => {
            let (l, r) = (ap(0), ap(1));
            let d = int(2);
            let (mut ld, rd) = (l.dims(), r.dims());
            check_index(d, ld.len())?;
            if ld.len() != rd.len() || l.access.len() != r.access.len() {
                return Err(mismatch(format!("concat operands differ in rank: {l} vs {r}")));
            }
            for (i, (a, b)) in ld.iter().zip(&rd).enumerate() {
                if i != d && a != b {
                    return Err(mismatch(format!(
                        "concat operands differ off-axis at dim {i}: {l} vs {r}"
                    )));
                }
            }
            ld[d] += rd[d];
            AccessPatternShape::split(&ld, l.access.len())
        }
        Op::Compute(cop) => {
            let s = ap(0);
            if *cop == ComputeOp::DotProd && s.compute.first().is_none_or(|&t| t < 2) {
                return Err(ShapeError::ArityError(format!(
                    "dotProd needs a leading tuple dim of at least 2, got {s}"
                )));
            }
            AccessPatternShape::new(s.access.clone(), Vec::new())
        }
        Op::Named(kind) => match kind {
            NamedOpKind::Dense => AccessPatternShape::tensor(dense_shape(ap(0), ap(1))?),
            NamedOpKind::BiasAdd => {
                AccessPatternShape::tensor(bias_add_shape(&ap(0).dims(), ap(1))?)
            }
            NamedOpKind::Add => AccessPatternShape::tensor(broadcast(&ap(0).dims(), &ap(1).dims())?),
            NamedOpKind::ReshapeOp => {
                let Ty::Shape(target) = &args[1] else { unreachable!() };
                check_positive(target, "reshape_op target")?;
                if target.iter().product::<usize>() != ap(0).num_elements() {
                    return Err(mismatch(format!(
                        "cannot reshape {:?} to {target:?}",
                        ap(0).dims()
                    )));
                }
                AccessPatternShape::tensor(target.clone())
            }
            NamedOpKind::FlattenOp => AccessPatternShape::tensor(vec![ap(0).num_elements()]),
            NamedOpKind::Conv2d => return conv2d_shape(ap(0), ap(1), int(2), int(3), int(4)),
        },
        Op::Accel(kind) => match kind {
            AccelKind::SystolicArray => {
                let (rows, cols) = (int(0), int(1));
                match (ap(2).dims().as_slice(), ap(3).dims().as_slice()) {
                    (&[batch, r0], &[r1, c]) if r0 == rows && r1 == rows && c == cols => {
                        AccessPatternShape::new(vec![batch, cols], Vec::new())
                    }
                    (a, b) => {
                        return Err(mismatch(format!(
                            "systolicArray {rows}x{cols} given operands {a:?} and {b:?}"
                        )))
                    }
                }
            }
            AccelKind::VtaDense => {
                let d = dense_shape(ap(0), ap(1))?;
                AccessPatternShape::tensor(bias_add_shape(&d, ap(2))?)
            }
            AccelKind::HlscnnConv2d => {
                return conv2d_shape(ap(0), ap(1), int(2), int(3), int(4))
            }
        },
    };
    Ok(Ty::Access(out))
}

/// Types any node, literal or access pattern.
pub fn infer_type(e: &Expr, env: &ShapeEnv) -> Result<Ty, ShapeError> {
    if let Op::Var { name, shape } = &e.op {
        match env.get(name) {
            None => return Err(ShapeError::UnboundVariable(name.clone())),
            Some(bound) if bound != shape => {
                return Err(mismatch(format!(
                    "variable `{name}` declared {shape:?} but bound to {bound:?}"
                )))
            }
            Some(_) => {}
        }
    }
    let args = e
        .args
        .iter()
        .map(|a| infer_type(a, env))
        .collect::<Result<Vec<_>, _>>()?;
    infer_node(&e.op, &args)
}

/// The access-pattern shape of `e`.
pub fn infer_shape(e: &Expr, env: &ShapeEnv) -> Result<AccessPatternShape, ShapeError> {
    match infer_type(e, env)? {
        Ty::Access(s) => Ok(s),
        other => Err(ShapeError::ArityError(format!(
            "expected an access pattern, found a {:?} literal",
            other.slot()
        ))),
    }
}

/// A node that failed to type, addressed by its child-index path from the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeError {
    pub path: Vec<usize>,
    pub head: String,
    pub error: ShapeError,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct WellFormedReport {
    pub errors: Vec<NodeError>,
}

impl fmt::Display for WellFormedReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.errors.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            let path: Vec<String> = e.path.iter().map(|p| p.to_string()).collect();
            write!(f, "at /{} ({}): {}", path.join("/"), e.head, e.error)?;
        }
        Ok(())
    }
}

/// Types every node and collects each failure whose children all typed.
///
/// Parents of a failing node are not reported again.
pub fn check_well_formed(e: &Expr, env: &ShapeEnv) -> Result<AccessPatternShape, WellFormedReport> {
    fn go(e: &Expr, env: &ShapeEnv, path: &mut Vec<usize>, errors: &mut Vec<NodeError>) -> Option<Ty> {
        let mut args = Vec::with_capacity(e.args.len());
        let mut ok = true;
        for (i, a) in e.args.iter().enumerate() {
            path.push(i);
            match go(a, env, path, errors) {
                Some(t) => args.push(t),
                None => ok = false,
            }
            path.pop();
        }
        if !ok {
            return None;
        }
        let result = match &e.op {
            Op::Var { name, .. } if !env.contains_key(name) => {
                Err(ShapeError::UnboundVariable(name.clone()))
            }
            Op::Var { .. } => infer_type(e, env),
            op => infer_node(op, &args),
        };
        match result {
            Ok(t) => Some(t),
            Err(error) => {
                errors.push(NodeError {
                    path: path.clone(),
                    head: e.op.head().to_string(),
                    error,
                });
                None
            }
        }
    }

    let mut errors = Vec::new();
    match go(e, env, &mut Vec::new(), &mut errors) {
        Some(Ty::Access(s)) => Ok(s),
        Some(_) => Err(WellFormedReport {
            errors: vec![NodeError {
                path: Vec::new(),
                head: e.op.head().to_string(),
                error: ShapeError::ArityError("program root is a literal".into()),
            }],
        }),
        None => Err(WellFormedReport { errors }),
    }
}
