//! Randomized differential testing of rewrite rules.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::pattern::instantiate_expr;
use super::rules::{Bound, Rewrite};
use crate::interp::{eval, Bindings, EvalError, Tensor};
use crate::ir::{infer_type, Expr, ShapeEnv, ShapeError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub lhs: Expr,
    pub rhs: Expr,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SoundnessReport {
    pub trials: usize,
    /// Trials where the condition admitted at least one instance.
    pub applicable: usize,
    /// Left/right pairs evaluated and compared.
    pub checked: usize,
    pub failures: Vec<Counterexample>,
}

impl SoundnessReport {
    pub fn is_sound(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("rule {rule}: no sampled shapes satisfied its condition in {trials} trials")]
pub struct NoSatisfyingShapes {
    pub rule: String,
    pub trials: usize,
}

fn env_of(e: &Expr) -> ShapeEnv {
    e.free_vars().into_iter().collect()
}

fn hole_type(e: &Expr) -> Result<crate::ir::Ty, ShapeError> {
    infer_type(e, &env_of(e))
}

/// Samples hole shapes, builds both sides and compares them in exact integer
/// arithmetic on random inputs in [-5, 5].
pub fn check_rule_soundness(rule: &Rewrite, trials: usize, seed: u64) -> Result<SoundnessReport, NoSatisfyingShapes> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SoundnessReport {
        trials,
        ..Default::default()
    };
    for _ in 0..trials {
        let sample = rule.sample(&mut rng);
        let arm = &rule.arms[sample.arm];
        let bound: Result<Bound, _> = sample
            .holes
            .iter()
            .map(|(k, e)| hole_type(e).map(|t| (k.clone(), t)))
            .collect();
        let bound = match bound {
            Ok(b) => b,
            Err(e) => panic!("rule {} sampled an ill-typed hole: {e}", rule.name),
        };
        let instances = arm.instances(&bound);
        if instances.is_empty() {
            continue;
        }
        report.applicable += 1;
        let lhs = instantiate_expr(&arm.lhs, &sample.holes);
        let mut bindings: Bindings<i64> = Bindings::new();
        for (name, dims) in lhs.free_vars() {
            bindings.insert(name, Tensor::random_int(&dims, &mut rng, -5, 5));
        }
        let left = eval(&lhs, &bindings);
        for extras in instances {
            let mut all = sample.holes.clone();
            all.extend(extras);
            let rhs = instantiate_expr(&arm.rhs, &all);
            report.checked += 1;
            if let Some(detail) = compare(&left, eval(&rhs, &bindings)) {
                report.failures.push(Counterexample {
                    lhs: lhs.clone(),
                    rhs,
                    detail,
                });
            }
        }
    }
    if report.applicable == 0 {
        return Err(NoSatisfyingShapes {
            rule: rule.name.to_string(),
            trials,
        });
    }
    Ok(report)
}

fn compare(left: &Result<Tensor<i64>, EvalError>, right: Result<Tensor<i64>, EvalError>) -> Option<String> {
    match (left, right) {
        (Ok(l), Ok(r)) if l == &r => None,
        (Ok(l), Ok(r)) if l.shape() != r.shape() => {
            Some(format!("shape {:?} became {:?}", l.shape(), r.shape()))
        }
        (Ok(_), Ok(_)) => Some("values differ".into()),
        (Err(e), _) => Some(format!("left side fails to evaluate: {e}")),
        (_, Err(e)) => Some(format!("right side fails to evaluate: {e}")),
    }
}
