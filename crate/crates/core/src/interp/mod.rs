//! Reference semantics for every node kind, brute-force kernel oracles and the
//! relative-error metric.
//!
//! Everything is dense and row-major. Values are evaluated alongside their
//! access-pattern shape, which decides how operators and transformers split
//! the concatenated dims.

mod oracle;

pub use oracle::{frobenius_relative_error, oracle_conv2d, oracle_matmul, oracle_maxpool, MetricError};

use std::collections::HashMap;
use std::fmt::Debug;
use std::iter::Sum;
use std::ops::{Add, Mul};

use ndarray::{ArrayD, Axis, IxDyn, Slice};
use num_traits::{ToPrimitive, Zero};
use rand::Rng;

use crate::ir::{
    infer_node, kernels, AccelKind, AccessPatternShape, ComputeOp, Expr, NamedOpKind, Op, ShapeError, Ty,
};

/// Scalar element type. `i64` gives exact arithmetic, `f64` floating point.
pub trait Scalar:
    Copy + Debug + PartialEq + PartialOrd + Zero + Add<Output = Self> + Mul<Output = Self> + Sum + ToPrimitive + Send + Sync + 'static
{
    fn from_i64(v: i64) -> Self;
}

impl Scalar for i64 {
    fn from_i64(v: i64) -> Self {
        v
    }
}

impl Scalar for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }
}

/// A dense n-dimensional array.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<T>(pub ArrayD<T>);

impl<T: Scalar> Tensor<T> {
    pub fn from_vec(shape: &[usize], data: Vec<T>) -> Result<Self, ShapeError> {
        let n = data.len();
        ArrayD::from_shape_vec(IxDyn(shape), data)
            .map(Tensor)
            .map_err(|_| ShapeError::ShapeMismatch(format!("{n} values do not fill shape {shape:?}")))
    }

    pub fn from_fn(shape: &[usize], f: impl FnMut(IxDyn) -> T) -> Self {
        Tensor(ArrayD::from_shape_fn(IxDyn(shape), f))
    }

    pub fn zeros(shape: &[usize]) -> Self {
        Tensor(ArrayD::zeros(IxDyn(shape)))
    }

    /// Uniform integers in `[lo, hi]`.
    pub fn random_int<R: Rng>(shape: &[usize], rng: &mut R, lo: i64, hi: i64) -> Self {
        Self::from_fn(shape, |_| T::from_i64(rng.gen_range(lo..=hi)))
    }

    pub fn shape(&self) -> &[usize] {
        self.0.shape()
    }

    /// Elements in row-major order.
    pub fn data(&self) -> Vec<T> {
        self.0.iter().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub type Bindings<T> = HashMap<String, Tensor<T>>;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error("binding for `{name}` has shape {found:?}, declared {expected:?}")]
    BindingMismatch {
        name: String,
        expected: Vec<usize>,
        found: Vec<usize>,
    },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
}

/// Evaluates `e` under `bindings`. The result's shape is the concatenation
/// of the inferred access and compute dims.
pub fn eval<T: Scalar>(e: &Expr, bindings: &Bindings<T>) -> Result<Tensor<T>, EvalError> {
    match eval_node(e, bindings)? {
        Value::Access(arr, _) => Ok(Tensor(arr)),
        Value::Lit(_) => Err(ShapeError::ArityError("expression is a literal".into()).into()),
    }
}

/// Evaluates `e` and returns its access-pattern shape along with the value.
pub fn eval_with_shape<T: Scalar>(
    e: &Expr,
    bindings: &Bindings<T>,
) -> Result<(Tensor<T>, AccessPatternShape), EvalError> {
    match eval_node(e, bindings)? {
        Value::Access(arr, s) => Ok((Tensor(arr), s)),
        Value::Lit(_) => Err(ShapeError::ArityError("expression is a literal".into()).into()),
    }
}

enum Value<T> {
    Access(ArrayD<T>, AccessPatternShape),
    Lit(Ty),
}

impl<T> Value<T> {
    fn ty(&self) -> Ty {
        match self {
            Value::Access(_, s) => Ty::Access(s.clone()),
            Value::Lit(t) => t.clone(),
        }
    }
}

fn reshape<T: Scalar>(arr: &ArrayD<T>, dims: &[usize]) -> ArrayD<T> {
    ArrayD::from_shape_vec(IxDyn(dims), arr.iter().copied().collect())
        .expect("element count checked by shape inference")
}

/// Row-major `(outer, inner)` matrix view of `arr` split after `n` dims, as a flat vec.
fn rows<T: Scalar>(arr: &ArrayD<T>, n: usize) -> (usize, usize, Vec<T>) {
    let outer: usize = arr.shape()[..n].iter().product();
    let inner: usize = arr.shape()[n..].iter().product();
    (outer, inner, arr.iter().copied().collect())
}

fn broadcast_to<T: Scalar>(arr: &ArrayD<T>, dims: &[usize]) -> ArrayD<T> {
    arr.broadcast(IxDyn(dims))
        .expect("broadcast checked by shape inference")
        .to_owned()
}

/// Evaluates a reference expression whose placeholders `%i` stand for `args[i]`.
fn eval_reference<T: Scalar>(
    build: impl FnOnce(Vec<Expr>) -> Expr,
    args: &[(&ArrayD<T>, &AccessPatternShape)],
) -> Result<ArrayD<T>, EvalError> {
    let mut bindings = Bindings::new();
    let mut placeholders = Vec::new();
    for (i, (arr, shape)) in args.iter().enumerate() {
        let name = format!("%{i}");
        bindings.insert(name.clone(), Tensor((*arr).clone()));
        placeholders.push(Expr::access(Expr::var(name, arr.shape()), shape.access.len()));
    }
    Ok(eval(&build(placeholders), &bindings)?.0)
}

fn eval_node<T: Scalar>(e: &Expr, bindings: &Bindings<T>) -> Result<Value<T>, EvalError> {
    if let Op::Var { name, shape } = &e.op {
        let t = bindings
            .get(name)
            .ok_or_else(|| EvalError::UnboundVariable(name.clone()))?;
        if t.shape() != shape.as_slice() {
            return Err(EvalError::BindingMismatch {
                name: name.clone(),
                expected: shape.clone(),
                found: t.shape().to_vec(),
            });
        }
        let out = infer_node(&e.op, &[])?;
        return Ok(Value::Access(t.0.clone(), out.access().unwrap().clone()));
    }

    let args = e
        .args
        .iter()
        .map(|a| eval_node(a, bindings))
        .collect::<Result<Vec<_>, _>>()?;
    let tys: Vec<Ty> = args.iter().map(Value::ty).collect();
    let out = match infer_node(&e.op, &tys)? {
        Ty::Access(s) => s,
        lit => return Ok(Value::Lit(lit)),
    };
    let arr = |i: usize| match &args[i] {
        Value::Access(a, _) => a,
        Value::Lit(_) => unreachable!("slot checked by inference"),
    };
    let shape = |i: usize| match &args[i] {
        Value::Access(_, s) => s,
        Value::Lit(_) => unreachable!("slot checked by inference"),
    };
    let int = |i: usize| tys[i].int().expect("slot checked by inference");
    let dims = out.dims();

    let value = match &e.op {
        Op::Var { .. } | Op::Int(_) | Op::List(_) | Op::Shape(_) | Op::ShapePair(_) => unreachable!(),
        Op::Access | Op::Flatten | Op::Reshape => reshape(arr(0), &dims),
        Op::Transpose => {
            let Ty::List(perm) = &tys[1] else { unreachable!() };
            arr(0).clone().permuted_axes(IxDyn(perm)).as_standard_layout().into_owned()
        }
        Op::CartProd => {
            let (a, c, l) = rows(arr(0), shape(0).access.len());
            let (b, _, r) = rows(arr(1), shape(1).access.len());
            let mut data = Vec::with_capacity(a * b * 2 * c);
            for i in 0..a {
                for j in 0..b {
                    data.extend_from_slice(&l[i * c..(i + 1) * c]);
                    data.extend_from_slice(&r[j * c..(j + 1) * c]);
                }
            }
            ArrayD::from_shape_vec(IxDyn(&dims), data).unwrap()
        }
        Op::Pair => {
            let (a, c, l) = rows(arr(0), shape(0).access.len());
            let (_, _, r) = rows(arr(1), shape(1).access.len());
            let mut data = Vec::with_capacity(a * 2 * c);
            for i in 0..a {
                data.extend_from_slice(&l[i * c..(i + 1) * c]);
                data.extend_from_slice(&r[i * c..(i + 1) * c]);
            }
            ArrayD::from_shape_vec(IxDyn(&dims), data).unwrap()
        }
        Op::Windows => {
            let Ty::Shape(strides) = &tys[2] else { unreachable!() };
            let input = arr(0);
            let n_a = shape(0).access.len();
            let n_w = strides.len();
            ArrayD::from_shape_fn(IxDyn(&dims), |idx| {
                let mut src: Vec<usize> = (0..n_a).map(|k| idx[k]).collect();
                for k in 0..n_w {
                    src.push(idx[n_a + k] * strides[k] + idx[n_a + n_w + k]);
                }
                input[IxDyn(&src)]
            })
        }
        Op::Slice => arr(0)
            .slice_axis(Axis(int(1)), Slice::from(int(2)..int(3)))
            .to_owned(),
        Op::Squeeze => arr(0).clone().remove_axis(Axis(int(1))),
        Op::Concat => {
            ndarray::concatenate(Axis(int(2)), &[arr(0).view(), arr(1).view()]).expect("concat checked")
        }
        Op::Compute(cop) => {
            let n_a = shape(0).access.len();
            let (outer, inner, data) = rows(arr(0), n_a);
            let out: Vec<T> = match cop {
                ComputeOp::ReduceSum => (0..outer)
                    .map(|i| data[i * inner..(i + 1) * inner].iter().copied().sum())
                    .collect(),
                ComputeOp::ReduceMax => (0..outer)
                    .map(|i| {
                        let row = &data[i * inner..(i + 1) * inner];
                        row.iter()
                            .copied()
                            .fold(row[0], |m, x| if x > m { x } else { m })
                    })
                    .collect(),
                ComputeOp::DotProd => {
                    let t = shape(0).compute[0];
                    let width = inner / t;
                    (0..outer)
                        .map(|i| {
                            let row = &data[i * inner..(i + 1) * inner];
                            (0..width)
                                .map(|r| (1..t).fold(row[r], |p, k| p * row[k * width + r]))
                                .sum()
                        })
                        .collect()
                }
            };
            ArrayD::from_shape_vec(IxDyn(&dims), out).unwrap()
        }
        Op::Named(kind) => match kind {
            NamedOpKind::Dense => dense(arr(0), arr(1)),
            NamedOpKind::BiasAdd | NamedOpKind::Add => {
                let (x, y) = (broadcast_to(arr(0), &dims), broadcast_to(arr(1), &dims));
                ndarray::Zip::from(&x).and(&y).map_collect(|&p, &q| p + q)
            }
            NamedOpKind::ReshapeOp | NamedOpKind::FlattenOp => reshape(arr(0), &dims),
            NamedOpKind::Conv2d => conv2d_reference(&args, int(2), int(3))?,
        },
        Op::Accel(kind) => match kind {
            AccelKind::SystolicArray => eval_reference(
                |p| {
                    let [a0, w]: [Expr; 2] = p.try_into().unwrap();
                    // Undo the weight-stationary layout wrapper to recover `?a1`.
                    let a1 = Expr::transpose(Expr::access(w, 1), [1, 0]);
                    Expr::compute(ComputeOp::DotProd, Expr::cart_prod(a0, a1))
                },
                &[(arr(2), shape(2)), (arr(3), shape(3))],
            )?,
            AccelKind::VtaDense => eval_reference(
                |p| {
                    let [x, w, c]: [Expr; 3] = p.try_into().unwrap();
                    Expr::bias_add(Expr::dense(x, w), c)
                },
                &[(arr(0), shape(0)), (arr(1), shape(1)), (arr(2), shape(2))],
            )?,
            AccelKind::HlscnnConv2d => conv2d_reference(&args, int(2), int(3))?,
        },
    };
    debug_assert_eq!(value.shape(), dims.as_slice());
    Ok(Value::Access(value, out))
}

fn dense<T: Scalar>(a: &ArrayD<T>, b: &ArrayD<T>) -> ArrayD<T> {
    let (m, k, n) = (a.shape()[0], a.shape()[1], b.shape()[0]);
    ArrayD::from_shape_fn(IxDyn(&[m, n]), |idx| {
        (0..k).map(|x| a[[idx[0], x]] * b[[idx[1], x]]).sum()
    })
}

fn conv2d_reference<T: Scalar>(args: &[Value<T>], sh: usize, sw: usize) -> Result<ArrayD<T>, EvalError> {
    let (Value::Access(act, sa), Value::Access(wgt, sw_)) = (&args[0], &args[1]) else {
        unreachable!()
    };
    let wgt_dims: [usize; 4] = wgt.shape().try_into().expect("4-d weights checked");
    eval_reference(
        |p| {
            let [a, w]: [Expr; 2] = p.try_into().unwrap();
            Expr::access(kernels::conv2d_term(a, w, wgt_dims, (sh, sw)), 0)
        },
        &[(act, sa), (wgt, sw_)],
    )
}

#[cfg(test)]
mod tests;
