//! Random structurally valid trees, for round-trip and fuzz testing.
//!
//! Arities and literal kinds follow each node's signature; shapes are not
//! checked, so most generated trees are ill-typed.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{AccelKind, AccessPatternShape, ComputeOp, Expr, NamedOpKind, Op, Slot};

const VARS: [(&str, &[usize]); 4] = [("x", &[2, 3]), ("w", &[4]), ("act", &[1, 2, 4, 4]), ("q_1", &[3, 3])];

fn dims<R: Rng>(rng: &mut R, max_len: usize) -> Vec<usize> {
    let n = rng.gen_range(0..=max_len);
    (0..n).map(|_| rng.gen_range(1..40)).collect()
}

fn interior_ops() -> Vec<Op> {
    let mut ops = vec![
        Op::Access,
        Op::Transpose,
        Op::CartProd,
        Op::Windows,
        Op::Slice,
        Op::Squeeze,
        Op::Flatten,
        Op::Reshape,
        Op::Pair,
        Op::Concat,
    ];
    ops.extend(ComputeOp::ALL.map(Op::Compute));
    ops.extend(
        [
            NamedOpKind::Dense,
            NamedOpKind::BiasAdd,
            NamedOpKind::Add,
            NamedOpKind::ReshapeOp,
            NamedOpKind::FlattenOp,
            NamedOpKind::Conv2d,
        ]
        .map(Op::Named),
    );
    ops.extend(AccelKind::ALL.map(Op::Accel));
    ops
}

/// A random tree at most `max_depth` expression levels deep.
pub fn random_expr<R: Rng>(rng: &mut R, max_depth: usize) -> Expr {
    if max_depth <= 1 || rng.gen_bool(0.2) {
        let (name, shape) = *VARS.choose(rng).unwrap();
        return Expr::var(name, shape);
    }
    let op = interior_ops().choose(rng).unwrap().clone();
    let args = op
        .signature()
        .iter()
        .map(|slot| match slot {
            Slot::Expr => random_expr(rng, max_depth - 1),
            Slot::Int => Expr::int(rng.gen_range(0..20)),
            Slot::List => Expr::list(dims(rng, 4)),
            Slot::Shape => Expr::shape(dims(rng, 4)),
            Slot::ShapePair => Expr::shape_pair(AccessPatternShape::new(dims(rng, 3), dims(rng, 3))),
        })
        .collect();
    Expr::new(op, args)
}

/// A random well-typed access-pattern term over fresh variables `t0`, `t1`, ...
/// with dims in 1..=4. Each level wraps the term in one randomly chosen
/// operator whose shape constraints hold.
pub fn random_typed_expr<R: Rng>(rng: &mut R, max_depth: usize) -> Expr {
    let mut fresh = 0usize;
    typed(rng, max_depth, &mut fresh)
}

fn fresh_leaf<R: Rng>(rng: &mut R, fresh: &mut usize, access: &[usize], compute: &[usize]) -> Expr {
    let name = format!("t{fresh}");
    *fresh += 1;
    let dims: Vec<usize> = access.iter().chain(compute).copied().collect();
    let _ = rng;
    Expr::access(Expr::var(name, dims), access.len())
}

fn typed<R: Rng>(rng: &mut R, depth: usize, fresh: &mut usize) -> Expr {
    if depth <= 1 || rng.gen_bool(0.15) {
        let n = rng.gen_range(1..=3);
        let d: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=4)).collect();
        let k = rng.gen_range(0..=n);
        return fresh_leaf(rng, fresh, &d[..k], &d[k..]);
    }
    let inner = typed(rng, depth - 1, fresh);
    let env: super::ShapeEnv = inner.free_vars().into_iter().collect();
    let s = super::infer_shape(&inner, &env).expect("generated terms are well typed");
    for _ in 0..16 {
        let cand = candidate(rng, &inner, &s, fresh);
        let Some(cand) = cand else { continue };
        let env: super::ShapeEnv = cand.free_vars().into_iter().collect();
        if super::infer_shape(&cand, &env).is_ok() {
            return cand;
        }
    }
    inner
}

fn candidate<R: Rng>(rng: &mut R, e: &Expr, s: &AccessPatternShape, fresh: &mut usize) -> Option<Expr> {
    let dims = s.dims();
    let rank = dims.len();
    let e = e.clone();
    Some(match rng.gen_range(0..12) {
        0 => Expr::access(e, rng.gen_range(0..=rank)),
        1 => {
            let mut perm: Vec<usize> = (0..rank).collect();
            perm.shuffle(rng);
            Expr::transpose(e, perm)
        }
        2 => Expr::flatten(e),
        3 => {
            let d = (0..rank).find(|&d| dims[d] == 1)?;
            Expr::squeeze(e, d)
        }
        4 => {
            let d = rng.gen_range(0..rank.max(1));
            let n = *dims.get(d)?;
            let lo = rng.gen_range(0..n);
            let hi = rng.gen_range(lo + 1..=n);
            Expr::slice(e, d, lo, hi)
        }
        5 => {
            let window: Vec<usize> = s.compute.iter().map(|&c| rng.gen_range(1..=c)).collect();
            let strides: Vec<usize> = s.compute.iter().map(|_| rng.gen_range(1..=2)).collect();
            Expr::windows(e, window, strides)
        }
        6 => Expr::compute(*ComputeOp::ALL.choose(rng).unwrap(), e),
        7 => {
            let a: Vec<usize> = (0..rng.gen_range(0..=2)).map(|_| rng.gen_range(1..=3)).collect();
            let other = fresh_leaf(rng, fresh, &a, &s.compute);
            if rng.gen_bool(0.5) {
                Expr::cart_prod(e, other)
            } else {
                Expr::cart_prod(other, e)
            }
        }
        8 => {
            let d = rng.gen_range(0..rank.max(1));
            let mut od = dims.clone();
            *od.get_mut(d)? = rng.gen_range(1..=3);
            let other = fresh_leaf(rng, fresh, &od[..s.access.len()], &od[s.access.len()..]);
            Expr::concat(e, other, d)
        }
        9 => {
            let other = fresh_leaf(rng, fresh, &s.access, &s.compute);
            Expr::pair(e, other)
        }
        10 => {
            let target = if rng.gen_bool(0.5) {
                AccessPatternShape::new(vec![s.access.iter().product()], vec![s.compute.iter().product()])
            } else {
                AccessPatternShape::new(s.access.iter().rev().copied().collect::<Vec<_>>(), s.compute.clone())
            };
            Expr::reshape(e, target)
        }
        _ => Expr::access(Expr::flatten(e), rng.gen_range(0..=1)),
    })
}
