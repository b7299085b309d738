//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line.

use std::collections::BTreeMap;
use std::process::Command;
use std::time::{Duration, Instant};

use apex::interp::{eval, frobenius_relative_error, oracle_conv2d, oracle_matmul, oracle_maxpool, Bindings, Tensor};
use apex::ir::kernels::{conv2d, linear_add_reshape, linear_bias_add, matmul, maxpool};
use apex::ir::random::{random_expr, random_typed_expr};
use apex::ir::{infer_shape, AccelKind, ComputeOp, Expr, Op, ShapeEnv};
use apex::rewrite::{
    build_rule_library, build_rule_library_with, check_rule_soundness, ematch, extract, saturate, CostModel,
    RuleConfig, RuleGroup, SaturationConfig, SystolicArrayLimits,
};
use apex::textio::{parse, parse_pattern, print, print_program};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(), String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, budget: Duration) -> Outcome {
    let t = start.elapsed();
    ensure(t < budget, || format!("took {t:?}, budget {budget:?}"))
}

fn env_of(e: &Expr) -> ShapeEnv {
    e.free_vars().into_iter().collect()
}

fn bind(e: &Expr, rng: &mut ChaCha8Rng) -> Bindings<i64> {
    e.free_vars()
        .into_iter()
        .map(|(n, d)| {
            let t = Tensor::random_int(&d, rng, -5, 5);
            (n, t)
        })
        .collect()
}

fn count(e: &Expr, pred: impl Fn(&Op) -> bool) -> usize {
    e.count(pred)
}

/// Shapes of the subterms reached by `paths` (child indices from the root).
fn shapes_at(e: &Expr, paths: &[&[usize]]) -> Result<Vec<String>, String> {
    let env = env_of(e);
    paths
        .iter()
        .map(|p| {
            let sub = p.iter().fold(e, |t, &i| &t.args[i]);
            infer_shape(sub, &env).map(|s| s.to_string()).map_err(|err| err.to_string())
        })
        .collect()
}

fn c1_shape_goldens() -> Outcome {
    let start = Instant::now();
    // N=1, C=2, H=W=8, O=2, Kh=Kw=3, Sh=Sw=1, so H'=W'=6.
    let conv = conv2d("activations", [1, 2, 8, 8], "weights", [2, 2, 3, 3], (1, 1));
    let got = shapes_at(
        &conv,
        &[&[], &[0], &[0, 0], &[0, 0, 0], &[0, 0, 0, 0], &[0, 0, 0, 0, 0], &[0, 0, 0, 1]],
    )?;
    let want = [
        "((1, 2, 6, 6), ())",
        "((1, 6, 6, 2), ())",
        "((1, 1, 6, 6, 2), ())",
        "((1, 1, 6, 6, 2), (2, 2, 3, 3))",
        "((1, 1, 6, 6), (2, 3, 3))",
        "((1), (2, 8, 8))",
        "((2), (2, 3, 3))",
    ];
    ensure(got == want, || format!("conv2d: {got:?}"))?;

    let mm = matmul("activations", "weights", 4, 4, 4);
    let got = shapes_at(&mm, &[&[], &[0], &[0, 0], &[0, 1], &[0, 1, 0]])?;
    let want = ["((4, 4), ())", "((4, 4), (2, 4))", "((4), (4))", "((4), (4))", "((4), (4))"];
    ensure(got == want, || format!("matmul: {got:?}"))?;
    // Non-square dims tell the transpose apart from its input: M=2, N=3, O=5.
    let mm = matmul("activations", "weights", 2, 3, 5);
    let got = shapes_at(&mm, &[&[], &[0], &[0, 0], &[0, 1], &[0, 1, 0]])?;
    let want = ["((2, 5), ())", "((2, 5), (2, 3))", "((2), (3))", "((5), (3))", "((3), (5))"];
    ensure(got == want, || format!("matmul 2x3x5: {got:?}"))?;

    let pool = maxpool("activations", [1, 2, 8, 8], (3, 3), (1, 1));
    let got = shapes_at(&pool, &[&[], &[0], &[0, 0]])?;
    let want = ["((1, 2, 6, 6), ())", "((1, 2, 6, 6), (3, 3))", "((1, 2), (8, 8))"];
    ensure(got == want, || format!("maxpool: {got:?}"))?;
    within(start, Duration::from_secs(1))
}

fn c2_kernel_semantics() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let d = |rng: &mut ChaCha8Rng| rng.gen_range(1..=6usize);
    for i in 0..100 {
        let (n, c, o) = (d(&mut rng), d(&mut rng), d(&mut rng));
        let (h, w) = (d(&mut rng), d(&mut rng));
        let (kh, kw) = (rng.gen_range(1..=h), rng.gen_range(1..=w));
        let strides = (d(&mut rng), d(&mut rng));
        let e = conv2d("act", [n, c, h, w], "wgt", [o, c, kh, kw], strides);
        let b = bind(&e, &mut rng);
        let want = oracle_conv2d(&b["act"], &b["wgt"], strides).map_err(|e| e.to_string())?;
        ensure(eval(&e, &b).ok() == Some(want), || format!("conv2d trial {i}"))?;

        let (m, k, p) = (d(&mut rng), d(&mut rng), d(&mut rng));
        let e = matmul("P", "Q", m, k, p);
        let b = bind(&e, &mut rng);
        let want = oracle_matmul(&b["P"], &b["Q"]).map_err(|e| e.to_string())?;
        ensure(eval(&e, &b).ok() == Some(want), || format!("matmul trial {i}"))?;

        let (h, w) = (d(&mut rng), d(&mut rng));
        let window = (rng.gen_range(1..=h), rng.gen_range(1..=w));
        let strides = (d(&mut rng), d(&mut rng));
        let e = maxpool("act", [n, c, h, w], window, strides);
        let b = bind(&e, &mut rng);
        let want = oracle_maxpool(&b["act"], window, strides).map_err(|e| e.to_string())?;
        ensure(eval(&e, &b).ok() == Some(want), || format!("maxpool trial {i}"))?;
    }
    within(start, Duration::from_secs(30))
}

fn c3_rule_soundness() -> Outcome {
    let start = Instant::now();
    // Split threshold 1 so the exploratory split fires on the small sampled dims.
    let cfg = RuleConfig {
        split_above: 1,
        ..RuleConfig::default()
    };
    let rules = build_rule_library_with(&RuleGroup::ALL, &cfg).map_err(|e| e.to_string())?;
    let names: Vec<&str> = rules.iter().map(|r| r.name).collect();
    let want = ["G1", "G2", "G3", "I1", "I2", "I3", "B1", "B2", "B3", "B4", "B5", "M1", "M2", "M3"];
    ensure(names == want, || format!("rule list {names:?}"))?;
    for (i, r) in rules.iter().enumerate() {
        let report = check_rule_soundness(r, 100, 300 + i as u64).map_err(|e| e.to_string())?;
        ensure(report.is_sound(), || format!("{}: {:?}", r.name, report.failures[0]))?;
        ensure(report.applicable == 100, || {
            format!("{}: only {} of 100 trials applied", r.name, report.applicable)
        })?;
    }
    within(start, Duration::from_secs(60))
}

fn c4_emergent_im2col() -> Outcome {
    let start = Instant::now();
    let term = conv2d("act", [1, 2, 4, 4], "wgt", [2, 2, 3, 3], (1, 1));
    // The im2col'd reduction is C*Kh*Kw = 18 long, so the array must be wider than 16.
    let cfg = RuleConfig {
        systolic: SystolicArrayLimits {
            batch: 32,
            rows: 32,
            cols: 32,
        },
        ..RuleConfig::default()
    };
    let rules = build_rule_library_with(&[RuleGroup::Im2col, RuleGroup::Mapping], &cfg).map_err(|e| e.to_string())?;
    let st = saturate(&term, &rules, &SaturationConfig::default()).map_err(|e| e.to_string())?;
    let best = extract(&st, &CostModel::default()).map_err(|e| e.to_string())?;
    let n = count(&best, |op| *op == Op::Accel(AccelKind::SystolicArray));
    ensure(n >= 1, || format!("no systolicArray in\n{}", print(&best)))?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for i in 0..20 {
        let b = bind(&term, &mut rng);
        let want = oracle_conv2d(&b["act"], &b["wgt"], (1, 1)).map_err(|e| e.to_string())?;
        ensure(eval(&best, &b).ok() == Some(want), || format!("binding {i} differs"))?;
    }
    within(start, Duration::from_secs(120))
}

fn c5_matmul_blocking() -> Outcome {
    let start = Instant::now();
    let term = matmul("P", "Q", 32, 32, 32);
    let rules = build_rule_library(&[RuleGroup::Blocking, RuleGroup::Mapping]).map_err(|e| e.to_string())?;
    let st = saturate(&term, &rules, &SaturationConfig::default()).map_err(|e| e.to_string())?;
    let best = extract(&st, &CostModel::default()).map_err(|e| e.to_string())?;
    let env = env_of(&term);

    let mut mults = Vec::new();
    best.walk(&mut |n| match &n.op {
        Op::Accel(AccelKind::SystolicArray) => mults.push(n.args[0].as_int().unwrap_or(0)),
        Op::Compute(ComputeOp::DotProd) => {
            let s = infer_shape(&n.args[0], &env).expect("well typed");
            mults.push(s.compute.get(1).copied().unwrap_or(0));
        }
        _ => {}
    });
    ensure(mults.len() == 8, || format!("{} multiplications", mults.len()))?;
    ensure(mults.iter().all(|&r| r == 16), || format!("reduction lengths {mults:?}"))?;
    let concats = count(&best, |op| *op == Op::Concat);
    let mut sum_of_pairs = 0;
    best.walk(&mut |n| {
        if n.op == Op::Compute(ComputeOp::ReduceSum) && n.args[0].op == Op::Pair {
            sum_of_pairs += 1;
        }
    });
    ensure(concats > 0 && sum_of_pairs > 0, || {
        format!("{concats} concats, {sum_of_pairs} reduceSum-of-pair")
    })?;
    let text = print(&best);
    ensure(text.matches("(systolicArray").count() == 8, || "printed form lacks 8 calls".into())?;

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..5 {
        let b = bind(&term, &mut rng);
        let want = oracle_matmul(&b["P"], &b["Q"]).map_err(|e| e.to_string())?;
        ensure(eval(&best, &b).ok() == Some(want), || format!("binding {i} differs"))?;
    }
    within(start, Duration::from_secs(120))
}

fn c6_flexible_matching() -> Outcome {
    let forms = [linear_bias_add(4, 8, 6), linear_add_reshape(4, 8, 6)];
    let rules = build_rule_library(&[RuleGroup::Generic, RuleGroup::Mapping]).map_err(|e| e.to_string())?;
    let exact_pattern = parse_pattern("(bias_add (dense ?x ?w) ?c)").map_err(|e| e.to_string())?;
    let (mut flexible, mut exact) = (0, 0);
    for (i, e) in forms.iter().enumerate() {
        let st = saturate(e, &rules, &SaturationConfig::default()).map_err(|e| e.to_string())?;
        let best = extract(&st, &CostModel::default()).map_err(|e| e.to_string())?;
        let n = count(&best, |op| *op == Op::Accel(AccelKind::VtaDense));
        ensure(n == 1, || format!("form {i}: {n} vta-dense calls"))?;
        flexible += n;

        let plain = saturate(e, &[], &SaturationConfig::default()).map_err(|e| e.to_string())?;
        let hits: usize = plain
            .egraph
            .class_ids()
            .into_iter()
            .map(|c| ematch(&plain.egraph, &exact_pattern, c).len())
            .sum();
        ensure(hits == usize::from(i == 0), || format!("exact matcher hit form {i} {hits} times"))?;
        exact += hits;
    }
    ensure(flexible >= 2 * exact, || format!("flexible {flexible} vs exact {exact}"))
}

fn c7_frobenius() -> Outcome {
    let a = Tensor::<f64>::from_vec(&[2, 2], vec![1.0, -2.0, 3.5, 0.0]).map_err(|e| e.to_string())?;
    let r = frobenius_relative_error(&a, &a).map_err(|e| e.to_string())?;
    ensure(r == 0.0, || format!("identical inputs gave {r}"))?;
    let reference = Tensor::<f64>::from_vec(&[2], vec![3.0, 4.0]).map_err(|e| e.to_string())?;
    let out = Tensor::<f64>::from_vec(&[2], vec![0.0, 0.0]).map_err(|e| e.to_string())?;
    // ||ref - out|| / ||ref|| = 5 / 5.
    let r = frobenius_relative_error(&reference, &out).map_err(|e| e.to_string())?;
    ensure((r - 1.0).abs() < 1e-12, || format!("[3,4] vs [0,0] gave {r}"))
}

fn c8_determinism() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..1000 {
        let e = if i % 2 == 0 {
            random_expr(&mut rng, 6)
        } else {
            random_typed_expr(&mut rng, 6)
        };
        let text = print_program(&e);
        let back = parse(&text).map_err(|err| format!("{err}\n{text}"))?;
        ensure(back.expr == e, || format!("round trip changed\n{text}"))?;
    }

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let program = concat!(env!("CARGO_MANIFEST_DIR"), "/../../programs/matmul32.gls");
    let mut runs = Vec::new();
    for k in 0..2 {
        let stats = dir.path().join(format!("stats{k}.json"));
        let out = Command::new(env!("CARGO_BIN_EXE_apex"))
            .args([program, "--rules", "blocking,mapping", "--check", "3", "--emit", "json", "--stats"])
            .arg(&stats)
            .env("APEX_SEED", "17")
            .output()
            .map_err(|e| e.to_string())?;
        ensure(out.status.success(), || String::from_utf8_lossy(&out.stderr).into_owned())?;
        runs.push((out.stdout, std::fs::read(&stats).map_err(|e| e.to_string())?));
    }
    ensure(runs[0] == runs[1], || "two runs differ".into())
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 8] = [
        ("1 shape annotation goldens", c1_shape_goldens),
        ("2 kernel semantics vs oracles", c2_kernel_semantics),
        ("3 rule soundness", c3_rule_soundness),
        ("4 emergent im2col", c4_emergent_im2col),
        ("5 matmul blocking", c5_matmul_blocking),
        ("6 flexible vs exact matching", c6_flexible_matching),
        ("7 frobenius metric", c7_frobenius),
        ("8 determinism and round trip", c8_determinism),
    ];
    let mut failed = BTreeMap::new();
    for (name, check) in criteria {
        let start = Instant::now();
        match check() {
            Ok(()) => println!("PASS {name} ({:.2?})", start.elapsed()),
            Err(why) => {
                println!("FAIL {name}: {why}");
                failed.insert(name, why);
            }
        }
    }
    assert!(failed.is_empty(), "{} criteria failed: {failed:?}", failed.len());
}
