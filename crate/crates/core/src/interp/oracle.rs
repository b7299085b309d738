//! Independent loop implementations of the standard kernels. They never call
//! `eval`, so they can check it.

use super::{Scalar, Tensor};
use crate::ir::{windows_output_dims, ShapeError};

fn require_rank<T: Scalar>(t: &Tensor<T>, rank: usize, what: &str) -> Result<(), ShapeError> {
    if t.shape().len() == rank {
        Ok(())
    } else {
        Err(ShapeError::ShapeMismatch(format!(
            "{what} must be {rank}-d, got {:?}",
            t.shape()
        )))
    }
}

/// `R[i, j] = Σ_k P[i, k] · Q[k, j]`.
pub fn oracle_matmul<T: Scalar>(p: &Tensor<T>, q: &Tensor<T>) -> Result<Tensor<T>, ShapeError> {
    require_rank(p, 2, "P")?;
    require_rank(q, 2, "Q")?;
    let (m, n, o) = (p.shape()[0], p.shape()[1], q.shape()[1]);
    if q.shape()[0] != n {
        return Err(ShapeError::ShapeMismatch(format!(
            "matmul of {:?} by {:?}",
            p.shape(),
            q.shape()
        )));
    }
    let mut out = vec![T::zero(); m * o];
    for i in 0..m {
        for j in 0..o {
            let mut acc = T::zero();
            for k in 0..n {
                acc = acc + p.0[[i, k]] * q.0[[k, j]];
            }
            out[i * o + j] = acc;
        }
    }
    Tensor::from_vec(&[m, o], out)
}

/// Valid-padding convolution of `act: (N, C, H, W)` by `wgt: (O, C, Kh, Kw)`.
pub fn oracle_conv2d<T: Scalar>(
    act: &Tensor<T>,
    wgt: &Tensor<T>,
    strides: (usize, usize),
) -> Result<Tensor<T>, ShapeError> {
    require_rank(act, 4, "activations")?;
    require_rank(wgt, 4, "weights")?;
    let (n, c, h, w) = (act.shape()[0], act.shape()[1], act.shape()[2], act.shape()[3]);
    let (o, c2, kh, kw) = (wgt.shape()[0], wgt.shape()[1], wgt.shape()[2], wgt.shape()[3]);
    if c != c2 {
        return Err(ShapeError::ShapeMismatch(format!(
            "channel count {c} vs {c2}"
        )));
    }
    let out_hw = windows_output_dims(&[h, w], &[kh, kw], &[strides.0, strides.1])?;
    let (oh, ow) = (out_hw[0], out_hw[1]);
    let mut out = Vec::with_capacity(n * o * oh * ow);
    for b in 0..n {
        for f in 0..o {
            for x in 0..oh {
                for y in 0..ow {
                    let mut acc = T::zero();
                    for dx in 0..kh {
                        for dy in 0..kw {
                            for ch in 0..c {
                                acc = acc
                                    + act.0[[b, ch, strides.0 * x + dx, strides.1 * y + dy]]
                                        * wgt.0[[f, ch, dx, dy]];
                            }
                        }
                    }
                    out.push(acc);
                }
            }
        }
    }
    Tensor::from_vec(&[n, o, oh, ow], out)
}

/// Windowed max over the trailing two dims of `act: (N, C, H, W)`.
pub fn oracle_maxpool<T: Scalar>(
    act: &Tensor<T>,
    window: (usize, usize),
    strides: (usize, usize),
) -> Result<Tensor<T>, ShapeError> {
    require_rank(act, 4, "activations")?;
    let (n, c, h, w) = (act.shape()[0], act.shape()[1], act.shape()[2], act.shape()[3]);
    let out_hw = windows_output_dims(&[h, w], &[window.0, window.1], &[strides.0, strides.1])?;
    let (oh, ow) = (out_hw[0], out_hw[1]);
    let mut out = Vec::with_capacity(n * c * oh * ow);
    for b in 0..n {
        for ch in 0..c {
            for x in 0..oh {
                for y in 0..ow {
                    let mut best = act.0[[b, ch, strides.0 * x, strides.1 * y]];
                    for dx in 0..window.0 {
                        for dy in 0..window.1 {
                            let v = act.0[[b, ch, strides.0 * x + dx, strides.1 * y + dy]];
                            if v > best {
                                best = v;
                            }
                        }
                    }
                    out.push(best);
                }
            }
        }
    }
    Tensor::from_vec(&[n, c, oh, ow], out)
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum MetricError {
    #[error("shape mismatch: reference {reference:?}, output {output:?}")]
    ShapeMismatch {
        reference: Vec<usize>,
        output: Vec<usize>,
    },
    #[error("reference tensor is all zeros; relative error is undefined")]
    DivisionByZero,
}

/// `‖ref − out‖_F / ‖ref‖_F`.
pub fn frobenius_relative_error<T: Scalar>(reference: &Tensor<T>, output: &Tensor<T>) -> Result<f64, MetricError> {
    if reference.shape() != output.shape() {
        return Err(MetricError::ShapeMismatch {
            reference: reference.shape().to_vec(),
            output: output.shape().to_vec(),
        });
    }
    let f = |v: T| v.to_f64().expect("scalar converts to f64");
    let (mut diff, mut norm) = (0.0f64, 0.0f64);
    for (&r, &o) in reference.0.iter().zip(output.0.iter()) {
        let (r, o) = (f(r), f(o));
        diff += (r - o) * (r - o);
        norm += r * r;
    }
    if norm == 0.0 {
        return Err(MetricError::DivisionByZero);
    }
    Ok(diff.sqrt() / norm.sqrt())
}
