//! Builders for the standard kernel encodings and the two linear-layer forms.

use super::{ComputeOp, Expr};

/// 2-D convolution over `act: (N, C, H, W)` and `wgt: (O, C, Kh, Kw)`, valid
/// padding. Result shape `((N, O, H', W'), ())`.
pub fn conv2d_term(act: Expr, wgt: Expr, wgt_dims: [usize; 4], strides: (usize, usize)) -> Expr {
    let [_, c, kh, kw] = wgt_dims;
    let windows = Expr::windows(Expr::access(act, 1), [c, kh, kw], [1, strides.0, strides.1]);
    let dot = Expr::compute(
        ComputeOp::DotProd,
        Expr::cart_prod(windows, Expr::access(wgt, 1)),
    );
    Expr::transpose(Expr::squeeze(dot, 1), [0, 3, 1, 2])
}

pub fn conv2d(
    act: &str,
    act_dims: [usize; 4],
    wgt: &str,
    wgt_dims: [usize; 4],
    strides: (usize, usize),
) -> Expr {
    conv2d_term(Expr::var(act, act_dims), Expr::var(wgt, wgt_dims), wgt_dims, strides)
}

/// `P · Q` for `p: (M, N)`, `q: (N, O)`. Result shape `((M, O), ())`.
pub fn matmul_term(p: Expr, q: Expr) -> Expr {
    Expr::compute(
        ComputeOp::DotProd,
        Expr::cart_prod(
            Expr::access(p, 1),
            Expr::transpose(Expr::access(q, 1), [1, 0]),
        ),
    )
}

pub fn matmul(p: &str, q: &str, m: usize, n: usize, o: usize) -> Expr {
    matmul_term(Expr::var(p, [m, n]), Expr::var(q, [n, o]))
}

/// Max pooling over the two trailing dims. Result shape `((N, C, H', W'), ())`.
pub fn maxpool_term(act: Expr, window: (usize, usize), strides: (usize, usize)) -> Expr {
    Expr::compute(
        ComputeOp::ReduceMax,
        Expr::windows(
            Expr::access(act, 2),
            [window.0, window.1],
            [strides.0, strides.1],
        ),
    )
}

pub fn maxpool(act: &str, act_dims: [usize; 4], window: (usize, usize), strides: (usize, usize)) -> Expr {
    maxpool_term(Expr::var(act, act_dims), window, strides)
}

/// `bias_add(dense(a, b), c)` with `a: (m, k)`, `b: (n, k)`, `c: (n)`.
pub fn linear_bias_add(m: usize, k: usize, n: usize) -> Expr {
    Expr::bias_add(
        Expr::dense(Expr::var("a", [m, k]), Expr::var("b", [n, k])),
        Expr::var("c", [n]),
    )
}

/// `add(reshape_op(dense(a, b), (m, n)), c)`, the same layer written with an
/// identity reshape and broadcasting add.
pub fn linear_add_reshape(m: usize, k: usize, n: usize) -> Expr {
    Expr::add(
        Expr::reshape_op(
            Expr::dense(Expr::var("a", [m, k]), Expr::var("b", [n, k])),
            [m, n],
        ),
        Expr::var("c", [n]),
    )
}
