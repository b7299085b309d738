//! The rule library.
//!
//! A rule has one or more arms. Each arm is a left pattern, a right pattern
//! and a condition over the types bound to the left pattern's holes. The
//! condition returns one map of computed literal holes (`?newShape`, `?rows`,
//! ...) per right-hand instance to add; an empty result means the arm does
//! not apply.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::ir::{AccessPatternShape, Expr, Ty};
use crate::textio::{parse_pattern, Pattern};

/// Computed literal holes for one right-hand instance.
pub type Extras = BTreeMap<String, Expr>;
/// Hole name to type, for every hole of the left pattern.
pub type Bound = BTreeMap<String, Ty>;

type Condition = Arc<dyn Fn(&Bound) -> Vec<Extras> + Send + Sync>;
type Sampler = Arc<dyn Fn(&mut ChaCha8Rng) -> Sample + Send + Sync>;

/// Concrete terms for the holes of one arm's left pattern.
#[derive(Clone, Debug)]
pub struct Sample {
    pub arm: usize,
    pub holes: BTreeMap<String, Expr>,
}

#[derive(Clone)]
pub struct Arm {
    pub lhs: Pattern,
    pub rhs: Pattern,
    condition: Condition,
}

impl Arm {
    fn new(lhs: &str, rhs: &str, condition: impl Fn(&Bound) -> Vec<Extras> + Send + Sync + 'static) -> Self {
        Self {
            lhs: parse_pattern(lhs).expect("rule pattern parses"),
            rhs: parse_pattern(rhs).expect("rule pattern parses"),
            condition: Arc::new(condition),
        }
    }

    /// Right-hand instances licensed by the bound hole types.
    pub fn instances(&self, bound: &Bound) -> Vec<Extras> {
        (self.condition)(bound)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleGroup {
    Generic,
    Im2col,
    Blocking,
    Mapping,
}

impl RuleGroup {
    pub const ALL: [RuleGroup; 4] = [RuleGroup::Generic, RuleGroup::Im2col, RuleGroup::Blocking, RuleGroup::Mapping];

    pub fn name(self) -> &'static str {
        match self {
            RuleGroup::Generic => "generic",
            RuleGroup::Im2col => "im2col",
            RuleGroup::Blocking => "blocking",
            RuleGroup::Mapping => "mapping",
        }
    }

    /// Parses a comma-separated list. Blank input yields no groups.
    pub fn parse_list(s: &str) -> Result<Vec<RuleGroup>, RuleError> {
        s.split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(str::parse)
            .collect()
    }
}

impl FromStr for RuleGroup {
    type Err = RuleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| RuleError::UnknownGroup(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Target {
    Systolic,
    Vta,
    Hlscnn,
}

impl Target {
    pub const ALL: [Target; 3] = [Target::Systolic, Target::Vta, Target::Hlscnn];

    pub fn name(self) -> &'static str {
        match self {
            Target::Systolic => "systolic",
            Target::Vta => "vta",
            Target::Hlscnn => "hlscnn",
        }
    }
}

impl FromStr for Target {
    type Err = RuleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| RuleError::UnknownTarget(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RuleError {
    #[error("unknown rule group `{0}` (expected generic, im2col, blocking or mapping)")]
    UnknownGroup(String),
    #[error("no rule groups selected")]
    NoGroups,
    #[error("unknown target `{0}` (expected systolic, vta or hlscnn)")]
    UnknownTarget(String),
}

/// Largest operand extents a systolic-array call may take.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SystolicArrayLimits {
    pub batch: usize,
    pub rows: usize,
    pub cols: usize,
}

impl Default for SystolicArrayLimits {
    fn default() -> Self {
        Self {
            batch: 16,
            rows: 16,
            cols: 16,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleConfig {
    /// The exploratory split halves even dims strictly larger than this.
    pub split_above: usize,
    pub systolic: SystolicArrayLimits,
    pub targets: BTreeSet<Target>,
}

impl Default for RuleConfig {
    fn default() -> Self {
        Self {
            split_above: 16,
            systolic: SystolicArrayLimits::default(),
            targets: Target::ALL.into_iter().collect(),
        }
    }
}

#[derive(Clone)]
pub struct Rewrite {
    pub name: &'static str,
    pub group: RuleGroup,
    pub arms: Vec<Arm>,
    sampler: Sampler,
}

impl Rewrite {
    /// Draws random concrete terms for the holes of one arm.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Sample {
        (self.sampler)(rng)
    }
}

impl fmt::Debug for Rewrite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Rewrite").field("name", &self.name).field("group", &self.group).finish()
    }
}

impl fmt::Display for Rewrite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, arm) in self.arms.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{}: {} => {}", self.name, arm.lhs, arm.rhs)?;
        }
        Ok(())
    }
}

pub fn build_rule_library(groups: &[RuleGroup]) -> Result<Vec<Rewrite>, RuleError> {
    build_rule_library_with(groups, &RuleConfig::default())
}

/// Rules of the selected groups, in group order then rule order.
pub fn build_rule_library_with(groups: &[RuleGroup], cfg: &RuleConfig) -> Result<Vec<Rewrite>, RuleError> {
    if groups.is_empty() {
        return Err(RuleError::NoGroups);
    }
    let selected: BTreeSet<RuleGroup> = groups.iter().copied().collect();
    let mut rules = Vec::new();
    for g in selected {
        match g {
            RuleGroup::Generic => rules.extend([
                reshape_past_dot_prod("G1", g),
                linear_layer_rearrangement(),
                flatten_reshape_identity("G3", g, false),
            ]),
            RuleGroup::Im2col => rules.extend([
                flatten_reshape_identity("I1", g, true),
                reshape_out_of_cart_prod(),
                reshape_past_dot_prod("I3", g),
            ]),
            RuleGroup::Blocking => rules.extend([
                exploratory_split(cfg.split_above),
                concat_out_of_cart_prod_one_sided(),
                concat_out_of_cart_prod_two_sided(),
                concat_out_of_dot_prod_access(),
                concat_out_of_dot_prod_compute(),
            ]),
            RuleGroup::Mapping => {
                if cfg.targets.contains(&Target::Systolic) {
                    rules.push(systolic_array(cfg.systolic));
                }
                if cfg.targets.contains(&Target::Vta) {
                    rules.push(vta_dense());
                }
                if cfg.targets.contains(&Target::Hlscnn) {
                    rules.push(hlscnn_conv2d());
                }
            }
        }
    }
    Ok(rules)
}

// ---- condition helpers ----

fn ap<'a>(b: &'a Bound, hole: &str) -> Option<&'a AccessPatternShape> {
    b.get(hole)?.access()
}

fn int(b: &Bound, hole: &str) -> Option<usize> {
    b.get(hole)?.int()
}

fn extras<const N: usize>(pairs: [(&str, Expr); N]) -> Extras {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn when(ok: bool, e: impl FnOnce() -> Extras) -> Vec<Extras> {
    if ok {
        vec![e()]
    } else {
        Vec::new()
    }
}

// ---- sampler helpers ----

fn dims(rng: &mut ChaCha8Rng, len: std::ops::RangeInclusive<usize>, hi: usize) -> Vec<usize> {
    let n = rng.gen_range(len);
    (0..n).map(|_| rng.gen_range(1..=hi)).collect()
}

fn cat(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().chain(b).copied().collect()
}

/// A fresh variable viewed with `access` dims split off.
fn leaf(name: &str, access: &[usize], compute: &[usize]) -> Expr {
    Expr::access(Expr::var(name, cat(access, compute)), access.len())
}

/// Random dims with the same product: contiguous runs are multiplied together
/// and unit dims may be inserted.
fn regroup(rng: &mut ChaCha8Rng, d: &[usize]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut run = 1;
    for (i, &x) in d.iter().enumerate() {
        run *= x;
        if i + 1 == d.len() || rng.gen_bool(0.5) {
            out.push(run);
            run = 1;
        }
    }
    if rng.gen_bool(0.25) {
        let at = rng.gen_range(0..=out.len());
        out.insert(at, 1);
    }
    out
}

fn with(d: &[usize], i: usize, v: usize) -> Vec<usize> {
    let mut d = d.to_vec();
    d[i] = v;
    d
}

fn holes<const N: usize>(arm: usize, pairs: [(&str, Expr); N]) -> Sample {
    Sample {
        arm,
        holes: extras(pairs),
    }
}

fn rule(
    name: &'static str,
    group: RuleGroup,
    arms: Vec<Arm>,
    sampler: impl Fn(&mut ChaCha8Rng) -> Sample + Send + Sync + 'static,
) -> Rewrite {
    Rewrite {
        name,
        group,
        arms,
        sampler: Arc::new(sampler),
    }
}

// ---- the rules ----

/// `(compute dotProd (reshape ?x ?s))` to `(reshape (compute dotProd ?x) ?newShape)`
/// when the reshape keeps the tuple dim.
fn reshape_past_dot_prod(name: &'static str, group: RuleGroup) -> Rewrite {
    let arm = Arm::new(
        "(compute dotProd (reshape ?x ?s))",
        "(reshape (compute dotProd ?x) ?newShape)",
        |b| {
            let (Some(x), Some(Ty::ShapePair(s))) = (ap(b, "x"), b.get("s")) else {
                return Vec::new();
            };
            when(!x.compute.is_empty() && x.compute.first() == s.compute.first(), || {
                extras([("newShape", Expr::shape_pair(AccessPatternShape::new(s.access.clone(), vec![])))])
            })
        },
    );
    rule(name, group, vec![arm], |rng| {
        let a = dims(rng, 0..=2, 4);
        let t = rng.gen_range(2..=3);
        let r = dims(rng, 0..=2, 4);
        let compute = cat(&[t], &r);
        let target = AccessPatternShape::new(regroup(rng, &a), cat(&[t], &regroup(rng, &r)));
        holes(0, [("x", leaf("x", &a, &compute)), ("s", Expr::shape_pair(target))])
    })
}

/// The broadcasting-add form of a linear layer becomes the bias-add form.
fn linear_layer_rearrangement() -> Rewrite {
    let arm = Arm::new(
        "(add (reshape_op (dense ?a ?b) ?s) ?c)",
        "(reshape_op (bias_add (dense ?a ?b) ?c) ?s)",
        |b| {
            let (Some(a), Some(w), Some(Ty::Shape(s)), Some(c)) = (ap(b, "a"), ap(b, "b"), b.get("s"), ap(b, "c")) else {
                return Vec::new();
            };
            let (a, w, c) = (a.dims(), w.dims(), c.dims());
            let ok = a.len() == 2 && w.len() == 2 && *s == [a[0], w[0]] && c == [w[0]];
            when(ok, Extras::new)
        },
    );
    rule("G2", RuleGroup::Generic, vec![arm], |rng| {
        let (m, k, n) = (rng.gen_range(1..=6), rng.gen_range(1..=6), rng.gen_range(1..=6));
        holes(
            0,
            [
                ("a", Expr::var("a", [m, k])),
                ("b", Expr::var("b", [n, k])),
                ("s", Expr::shape([m, n])),
                ("c", Expr::var("c", [n])),
            ],
        )
    })
}

/// `?x` to `(reshape (flatten ?x) ?shape)` for non-flat access patterns.
fn flatten_reshape_identity(name: &'static str, group: RuleGroup, needs_access_dims: bool) -> Rewrite {
    let arm = Arm::new("?x", "(reshape (flatten ?x) ?shape)", move |b| {
        let Some(x) = ap(b, "x") else {
            return Vec::new();
        };
        when(!x.is_flat() && (!needs_access_dims || !x.access.is_empty()), || {
            extras([("shape", Expr::shape_pair(x.clone()))])
        })
    });
    rule(name, group, vec![arm], move |rng| {
        let lo = usize::from(needs_access_dims);
        let a = dims(rng, lo..=2, 4);
        let mut c = dims(rng, 1..=3, 4);
        if a.len() <= 1 && c.len() <= 1 {
            c.push(rng.gen_range(1..=4));
        }
        holes(0, [("x", leaf("x", &a, &c))])
    })
}

/// Reshapes on both cartProd operands move above it.
fn reshape_out_of_cart_prod() -> Rewrite {
    let arm = Arm::new(
        "(cartProd (reshape ?a0 ?s0) (reshape ?a1 ?s1))",
        "(reshape (cartProd ?a0 ?a1) ?newShape)",
        |b| {
            let (Some(a0), Some(a1), Some(Ty::ShapePair(s0)), Some(Ty::ShapePair(s1))) =
                (ap(b, "a0"), ap(b, "a1"), b.get("s0"), b.get("s1"))
            else {
                return Vec::new();
            };
            when(a0.compute == a1.compute && s0.compute == s1.compute, || {
                let shape = AccessPatternShape::new(cat(&s0.access, &s1.access), cat(&[2], &s0.compute));
                extras([("newShape", Expr::shape_pair(shape))])
            })
        },
    );
    rule("I2", RuleGroup::Im2col, vec![arm], |rng| {
        let (a0, a1) = (dims(rng, 0..=2, 4), dims(rng, 0..=2, 4));
        let c = dims(rng, 1..=2, 4);
        let cr = regroup(rng, &c);
        let s0 = AccessPatternShape::new(regroup(rng, &a0), cr.clone());
        let s1 = AccessPatternShape::new(regroup(rng, &a1), cr);
        holes(
            0,
            [
                ("a0", leaf("a0", &a0, &c)),
                ("a1", leaf("a1", &a1, &c)),
                ("s0", Expr::shape_pair(s0)),
                ("s1", Expr::shape_pair(s1)),
            ],
        )
    })
}

/// `?a` to a concat of its two halves along each even dim above the threshold.
fn exploratory_split(split_above: usize) -> Rewrite {
    let arm = Arm::new(
        "?a",
        "(concat (slice ?a ?dim ?b0 ?b1) (slice ?a ?dim ?b1 ?b2) ?dim)",
        move |b| {
            let Some(a) = ap(b, "a") else {
                return Vec::new();
            };
            a.dims()
                .iter()
                .enumerate()
                .filter(|&(_, &n)| n >= 2 && n % 2 == 0 && n > split_above)
                .map(|(d, &n)| {
                    extras([
                        ("dim", Expr::int(d)),
                        ("b0", Expr::int(0)),
                        ("b1", Expr::int(n / 2)),
                        ("b2", Expr::int(n)),
                    ])
                })
                .collect()
        },
    );
    rule("B1", RuleGroup::Blocking, vec![arm], move |rng| {
        let mut d = dims(rng, 1..=3, 6);
        let half = rng.gen_range(1..=3).max(split_above / 2 + 1);
        let at = rng.gen_range(0..d.len());
        d[at] = 2 * half;
        let n_a = rng.gen_range(0..=d.len());
        holes(0, [("a", leaf("a", &d[..n_a], &d[n_a..]))])
    })
}

/// A concat on an access dim of one cartProd operand moves above the cartProd.
fn concat_out_of_cart_prod_one_sided() -> Rewrite {
    let right = Arm::new(
        "(cartProd ?a (concat ?b0 ?b1 ?dim))",
        "(concat (cartProd ?a ?b0) (cartProd ?a ?b1) ?newDim)",
        |b| {
            let (Some(a), Some(b0), Some(dim)) = (ap(b, "a"), ap(b, "b0"), int(b, "dim")) else {
                return Vec::new();
            };
            when(dim < b0.access.len(), || extras([("newDim", Expr::int(a.access.len() + dim))]))
        },
    );
    let left = Arm::new(
        "(cartProd (concat ?a0 ?a1 ?dim) ?b)",
        "(concat (cartProd ?a0 ?b) (cartProd ?a1 ?b) ?dim)",
        |b| {
            let (Some(a0), Some(dim)) = (ap(b, "a0"), int(b, "dim")) else {
                return Vec::new();
            };
            when(dim < a0.access.len(), Extras::new)
        },
    );
    rule("B2", RuleGroup::Blocking, vec![right, left], |rng| {
        let arm = rng.gen_range(0..2);
        let other = dims(rng, 0..=2, 4);
        let split = dims(rng, 1..=2, 4);
        let c = dims(rng, 1..=2, 4);
        let j = rng.gen_range(0..split.len());
        let (p, q) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let x0 = leaf("x0", &with(&split, j, p), &c);
        let x1 = leaf("x1", &with(&split, j, q), &c);
        let y = leaf("y", &other, &c);
        if arm == 0 {
            holes(0, [("a", y), ("b0", x0), ("b1", x1), ("dim", Expr::int(j))])
        } else {
            holes(1, [("a0", x0), ("a1", x1), ("b", y), ("dim", Expr::int(j))])
        }
    })
}

/// Concats on the same compute dim of both cartProd operands move above it.
fn concat_out_of_cart_prod_two_sided() -> Rewrite {
    let arm = Arm::new(
        "(cartProd (concat ?a0 ?a1 ?dim0) (concat ?a2 ?a3 ?dim1))",
        "(concat (cartProd ?a0 ?a2) (cartProd ?a1 ?a3) ?newDim)",
        |b| {
            let (Some(a0), Some(a2), Some(d0), Some(d1)) = (ap(b, "a0"), ap(b, "a2"), int(b, "dim0"), int(b, "dim1"))
            else {
                return Vec::new();
            };
            let (na, nb) = (a0.access.len(), a2.access.len());
            let ok = d0 >= na && d1 >= nb && d0 - na == d1 - nb && a0.compute == a2.compute;
            when(ok, || extras([("newDim", Expr::int(na + nb + 1 + (d0 - na)))]))
        },
    );
    rule("B3", RuleGroup::Blocking, vec![arm], |rng| {
        let (a, b) = (dims(rng, 0..=2, 4), dims(rng, 0..=2, 4));
        let c = dims(rng, 1..=2, 4);
        let k = rng.gen_range(0..c.len());
        let (p, q) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let (cp, cq) = (with(&c, k, p), with(&c, k, q));
        holes(
            0,
            [
                ("a0", leaf("a0", &a, &cp)),
                ("a1", leaf("a1", &a, &cq)),
                ("a2", leaf("a2", &b, &cp)),
                ("a3", leaf("a3", &b, &cq)),
                ("dim0", Expr::int(a.len() + k)),
                ("dim1", Expr::int(b.len() + k)),
            ],
        )
    })
}

fn dot_prod_concat_sample(rng: &mut ChaCha8Rng, on_access: bool) -> Sample {
    let t = rng.gen_range(2..=3);
    let (p, q) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
    if on_access {
        let a = dims(rng, 1..=2, 4);
        let compute = cat(&[t], &dims(rng, 0..=2, 4));
        let j = rng.gen_range(0..a.len());
        holes(
            0,
            [
                ("a0", leaf("a0", &with(&a, j, p), &compute)),
                ("a1", leaf("a1", &with(&a, j, q), &compute)),
                ("dim", Expr::int(j)),
            ],
        )
    } else {
        let a = dims(rng, 0..=2, 4);
        let r = dims(rng, 1..=2, 4);
        let k = rng.gen_range(0..r.len());
        holes(
            0,
            [
                ("a0", leaf("a0", &a, &cat(&[t], &with(&r, k, p)))),
                ("a1", leaf("a1", &a, &cat(&[t], &with(&r, k, q)))),
                ("dim", Expr::int(a.len() + 1 + k)),
            ],
        )
    }
}

/// dotProd over a concat along an access dim splits into two dotProds.
fn concat_out_of_dot_prod_access() -> Rewrite {
    let arm = Arm::new(
        "(compute dotProd (concat ?a0 ?a1 ?dim))",
        "(concat (compute dotProd ?a0) (compute dotProd ?a1) ?dim)",
        |b| {
            let (Some(a0), Some(dim)) = (ap(b, "a0"), int(b, "dim")) else {
                return Vec::new();
            };
            when(dim < a0.access.len(), Extras::new)
        },
    );
    rule("B4", RuleGroup::Blocking, vec![arm], |rng| dot_prod_concat_sample(rng, true))
}

/// dotProd over a concat along a reduced compute dim sums two partial dotProds.
fn concat_out_of_dot_prod_compute() -> Rewrite {
    let arm = Arm::new(
        "(compute dotProd (concat ?a0 ?a1 ?dim))",
        "(compute reduceSum (pair (compute dotProd ?a0) (compute dotProd ?a1)))",
        |b| {
            let (Some(a0), Some(dim)) = (ap(b, "a0"), int(b, "dim")) else {
                return Vec::new();
            };
            when(dim > a0.access.len(), Extras::new)
        },
    );
    rule("B5", RuleGroup::Blocking, vec![arm], |rng| dot_prod_concat_sample(rng, false))
}

fn systolic_array(limits: SystolicArrayLimits) -> Rewrite {
    let arm = Arm::new(
        "(compute dotProd (cartProd ?a0 ?a1))",
        "(systolicArray ?rows ?cols ?a0 (access (transpose ?a1 (list 1 0)) 0))",
        move |b| {
            let (Some(a0), Some(a1)) = (ap(b, "a0"), ap(b, "a1")) else {
                return Vec::new();
            };
            match (a0.access.as_slice(), a0.compute.as_slice(), a1.access.as_slice(), a1.compute.as_slice()) {
                (&[batch], &[rows], &[cols], &[rows1])
                    if rows == rows1 && batch <= limits.batch && rows <= limits.rows && cols <= limits.cols =>
                {
                    vec![extras([("rows", Expr::int(rows)), ("cols", Expr::int(cols))])]
                }
                _ => Vec::new(),
            }
        },
    );
    rule("M1", RuleGroup::Mapping, vec![arm], move |rng| {
        let batch = rng.gen_range(1..=6.min(limits.batch));
        let rows = rng.gen_range(1..=6.min(limits.rows));
        let cols = rng.gen_range(1..=6.min(limits.cols));
        holes(0, [("a0", leaf("a0", &[batch], &[rows])), ("a1", leaf("a1", &[cols], &[rows]))])
    })
}

fn vta_dense() -> Rewrite {
    let arm = Arm::new("(bias_add (dense ?x ?w) ?c)", "(vta-dense ?x ?w ?c)", |_| vec![Extras::new()]);
    rule("M2", RuleGroup::Mapping, vec![arm], |rng| {
        let (m, k, n) = (rng.gen_range(1..=6), rng.gen_range(1..=6), rng.gen_range(1..=6));
        holes(
            0,
            [
                ("x", Expr::var("x", [m, k])),
                ("w", Expr::var("w", [n, k])),
                ("c", Expr::var("c", [n])),
            ],
        )
    })
}

fn hlscnn_conv2d() -> Rewrite {
    let arm = Arm::new(
        "(conv2d ?act ?wgt ?sh ?sw ?group)",
        "(hlscnn-conv2d ?act ?wgt ?sh ?sw ?group)",
        |b| when(int(b, "group") == Some(1), Extras::new),
    );
    rule("M3", RuleGroup::Mapping, vec![arm], |rng| {
        let [n, c, o] = [(); 3].map(|_| rng.gen_range(1..=3));
        let (h, w) = (rng.gen_range(1..=6), rng.gen_range(1..=6));
        let (kh, kw) = (rng.gen_range(1..=h), rng.gen_range(1..=w));
        let strides = [1, 2, 3];
        holes(
            0,
            [
                ("act", Expr::var("act", [n, c, h, w])),
                ("wgt", Expr::var("wgt", [o, c, kh, kw])),
                ("sh", Expr::int(*strides.choose(rng).unwrap())),
                ("sw", Expr::int(*strides.choose(rng).unwrap())),
                ("group", Expr::int(1)),
            ],
        )
    })
}
