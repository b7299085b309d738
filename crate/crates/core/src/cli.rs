//! The `apex` command-line driver.
//!
//! Exit codes: 0 success, 1 compile error, 2 verification failure, 3 a
//! resource limit stopped saturation and the extracted cost did not improve.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use clap::{Parser, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::interp::{eval, frobenius_relative_error, Bindings, Tensor};
use crate::ir::{check_well_formed, infer_shape, Expr, Op, ShapeEnv};
use crate::rewrite::{
    build_rule_library_with, extract_class, saturate, CostModel, RuleConfig, RuleGroup, SaturationConfig,
    SystolicArrayLimits, Target,
};
use crate::textio::{parse, print_program};

pub const EXIT_OK: i32 = 0;
pub const EXIT_COMPILE: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;
pub const EXIT_LIMIT: i32 = 3;

/// Relative Frobenius error above which a floating-point check fails.
const FLOAT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Sexpr,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Numeric {
    /// Exact i64 arithmetic on inputs in [-5, 5].
    Int,
    /// f64 arithmetic on inputs in [-1, 1], compared by relative Frobenius error.
    Float,
}

#[derive(Debug, Parser)]
#[command(name = "apex", version, about = "Map tensor programs onto accelerators by equality saturation")]
pub struct Args {
    /// Program file (.gls); `-` reads standard input.
    pub input: PathBuf,
    /// Comma-separated rule groups: generic, im2col, blocking, mapping. Empty selects none.
    #[arg(long, default_value = "generic,im2col,blocking,mapping")]
    pub rules: String,
    /// Comma-separated accelerators the mapping rules may target.
    #[arg(long, default_value = "systolic,vta,hlscnn")]
    pub target: String,
    #[arg(long, default_value_t = 30)]
    pub iter_limit: usize,
    #[arg(long, default_value_t = 100_000)]
    pub node_limit: usize,
    /// Seconds.
    #[arg(long, default_value_t = 60.0)]
    pub time_limit: f64,
    /// Cost weight overrides, e.g. `accel=1,compute=1000`.
    #[arg(long, default_value = "")]
    pub cost: String,
    #[arg(long, value_enum, default_value_t = Emit::Sexpr)]
    pub emit: Emit,
    /// Write the run statistics as JSON to this file.
    #[arg(long)]
    pub stats: Option<PathBuf>,
    /// Compare the extracted program against the input on N random bindings.
    #[arg(long, default_value_t = 0)]
    pub check: usize,
    #[arg(long, value_enum, default_value_t = Numeric::Int)]
    pub numeric: Numeric,
    #[arg(long, env = "APEX_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Largest systolic-array call as BATCHxROWSxCOLS.
    #[arg(long, default_value = "16x16x16", value_parser = parse_limits)]
    pub systolic_limits: SystolicArrayLimits,
    /// The exploratory split only halves even dims larger than this.
    #[arg(long, default_value_t = 16)]
    pub split_above: usize,
}

fn parse_limits(s: &str) -> Result<SystolicArrayLimits, String> {
    let parts: Vec<usize> = s
        .split('x')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [batch, rows, cols] => Ok(SystolicArrayLimits { batch, rows, cols }),
        [rows, cols] => Ok(SystolicArrayLimits {
            batch: usize::MAX,
            rows,
            cols,
        }),
        _ => Err("expected BATCHxROWSxCOLS or ROWSxCOLS".into()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CostReport {
    pub input: u64,
    pub extracted: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SaturationReport {
    pub iterations: usize,
    pub nodes: usize,
    pub classes: usize,
    /// `fixpoint` or `limit`.
    pub stop: &'static str,
    pub reason: &'static str,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    /// `exact-equal`, `max-relative-error: R` or `skipped`.
    pub verdict: String,
    pub trials: usize,
    pub passed: bool,
}

/// Everything the stats file records. Wall time is left out so that repeated
/// runs produce identical files.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub offloads: BTreeMap<String, usize>,
    /// Calls grouped by kind and operand extents, e.g. `systolicArray 16x16`.
    pub calls: BTreeMap<String, usize>,
    pub cost: CostReport,
    pub saturation: SaturationReport,
    pub verify: VerifyReport,
    pub rules: Vec<&'static str>,
    pub seed: u64,
}

#[derive(Serialize)]
struct JsonOutput<'a> {
    program: String,
    #[serde(flatten)]
    report: &'a RunReport,
}

struct Failure(i32, String);

/// Parses `argv` (including the program name) and runs the driver.
pub fn main_with<W: Write, E: Write>(argv: &[String], out: &mut W, err: &mut E) -> i32 {
    match Args::try_parse_from(argv) {
        Ok(args) => run(&args, out, err),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_COMPILE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            code
        }
    }
}

pub fn run<W: Write, E: Write>(args: &Args, out: &mut W, err: &mut E) -> i32 {
    let start = Instant::now();
    match compile(args, out) {
        Ok((code, report)) => {
            let _ = writeln!(
                err,
                "apex: cost {} -> {}, {} offload(s), {} ({} iterations), check {}, {:.3}s",
                report.cost.input,
                report.cost.extracted,
                report.offloads.values().sum::<usize>(),
                report.saturation.reason,
                report.saturation.iterations,
                report.verify.verdict,
                start.elapsed().as_secs_f64()
            );
            code
        }
        Err(Failure(code, msg)) => {
            let _ = writeln!(err, "{msg}");
            code
        }
    }
}

fn compile_err(msg: impl Into<String>) -> Failure {
    Failure(EXIT_COMPILE, msg.into())
}

fn read_input(path: &PathBuf) -> Result<(String, String), Failure> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| compile_err(format!("<stdin>: error: {e}")))?;
        return Ok(("<stdin>".into(), s));
    }
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| compile_err(format!("{name}: error: {e}")))?;
    Ok((name, text))
}

fn compile<W: Write>(args: &Args, out: &mut W) -> Result<(i32, RunReport), Failure> {
    let (file, text) = read_input(&args.input)?;
    let program = parse(&text).map_err(|e| compile_err(e.diagnostic(&file)))?;
    let env = program.env();
    check_well_formed(&program.expr, &env).map_err(|r| {
        compile_err(
            r.to_string()
                .lines()
                .map(|l| format!("{file}: error: {l}"))
                .collect::<Vec<_>>()
                .join("\n"),
        )
    })?;

    let groups = RuleGroup::parse_list(&args.rules).map_err(|e| compile_err(format!("error: {e}")))?;
    let targets = args
        .target
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::parse::<Target>)
        .collect::<Result<_, _>>()
        .map_err(|e| compile_err(format!("error: {e}")))?;
    let cost: CostModel = args.cost.parse().map_err(|e| compile_err(format!("error: --cost: {e}")))?;
    if !args.time_limit.is_finite() || args.time_limit < 0.0 {
        return Err(compile_err("error: --time-limit must be a non-negative number of seconds"));
    }
    let rule_cfg = RuleConfig {
        split_above: args.split_above,
        systolic: args.systolic_limits,
        targets,
    };
    let rules = if groups.is_empty() {
        Vec::new()
    } else {
        build_rule_library_with(&groups, &rule_cfg).map_err(|e| compile_err(format!("error: {e}")))?
    };
    let sat_cfg = SaturationConfig {
        iter_limit: args.iter_limit,
        node_limit: args.node_limit,
        time_limit: Duration::from_secs_f64(args.time_limit),
        seed: args.seed,
    };

    let state = saturate(&program.expr, &rules, &sat_cfg).map_err(|e| compile_err(format!("error: {e}")))?;
    let input_cost = cost.cost(&program.expr);
    let (best, best_cost) =
        extract_class(&state.egraph, state.root(), &cost).map_err(|e| compile_err(format!("error: {e}")))?;
    // The input itself is always in the root class, so extraction never loses.
    debug_assert!(best_cost <= input_cost);

    let verify = verify(&program.expr, &best, &env, args);
    let report = RunReport {
        schema: 1,
        offloads: offload_counts(&best),
        calls: call_shapes(&best, &env),
        cost: CostReport {
            input: input_cost,
            extracted: best_cost,
        },
        saturation: SaturationReport {
            iterations: state.iterations,
            nodes: state.egraph.num_nodes(),
            classes: state.egraph.num_classes(),
            stop: if state.stop.is_fixpoint() { "fixpoint" } else { "limit" },
            reason: state.stop.name(),
        },
        verify,
        rules: rules.iter().map(|r| r.name).collect(),
        seed: args.seed,
    };

    let printed = print_program(&best);
    let body = match args.emit {
        Emit::Sexpr => printed,
        Emit::Json => {
            let mut s = serde_json::to_string_pretty(&JsonOutput {
                program: printed,
                report: &report,
            })
            .expect("report serializes");
            s.push('\n');
            s
        }
    };
    out.write_all(body.as_bytes())
        .map_err(|e| compile_err(format!("error: writing output: {e}")))?;
    if let Some(path) = &args.stats {
        let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
        s.push('\n');
        std::fs::write(path, s).map_err(|e| compile_err(format!("{}: error: {e}", path.display())))?;
    }

    let code = if !report.verify.passed {
        EXIT_VERIFY
    } else if !state.stop.is_fixpoint() && best_cost >= input_cost {
        EXIT_LIMIT
    } else {
        EXIT_OK
    };
    Ok((code, report))
}

fn offload_counts(e: &Expr) -> BTreeMap<String, usize> {
    let mut m: BTreeMap<String, usize> = crate::ir::AccelKind::ALL.iter().map(|k| (k.name().to_string(), 0)).collect();
    e.walk(&mut |n| {
        if let Op::Accel(k) = &n.op {
            *m.entry(k.name().to_string()).or_default() += 1;
        }
    });
    m
}

fn call_shapes(e: &Expr, env: &ShapeEnv) -> BTreeMap<String, usize> {
    let mut m = BTreeMap::new();
    e.walk(&mut |n| {
        let Op::Accel(k) = &n.op else { return };
        let dims: Vec<String> = match k {
            crate::ir::AccelKind::SystolicArray => n.args[..2]
                .iter()
                .filter_map(Expr::as_int)
                .map(|d| d.to_string())
                .collect(),
            _ => n
                .args
                .iter()
                .filter(|a| !a.op.is_literal())
                .filter_map(|a| infer_shape(a, env).ok())
                .map(|s| s.dims().iter().map(|d| d.to_string()).collect::<Vec<_>>().join("x"))
                .collect(),
        };
        let key = format!("{} {}", k.name(), dims.join(if k == &crate::ir::AccelKind::SystolicArray { "x" } else { "," }));
        *m.entry(key).or_default() += 1;
    });
    m
}

fn verify(input: &Expr, out: &Expr, env: &ShapeEnv, args: &Args) -> VerifyReport {
    if args.check == 0 {
        return VerifyReport {
            verdict: "skipped".into(),
            trials: 0,
            passed: true,
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut vars: Vec<(&String, &Vec<usize>)> = env.iter().collect();
    vars.sort();
    match args.numeric {
        Numeric::Int => {
            let mut passed = true;
            for _ in 0..args.check {
                let b: Bindings<i64> = vars
                    .iter()
                    .map(|(n, d)| ((*n).clone(), Tensor::random_int(d, &mut rng, -5, 5)))
                    .collect();
                match (eval(input, &b), eval(out, &b)) {
                    (Ok(x), Ok(y)) if x == y => {}
                    _ => {
                        passed = false;
                        break;
                    }
                }
            }
            VerifyReport {
                verdict: if passed { "exact-equal".into() } else { "mismatch".into() },
                trials: args.check,
                passed,
            }
        }
        Numeric::Float => {
            let mut worst = 0.0f64;
            let mut passed = true;
            for _ in 0..args.check {
                let b: Bindings<f64> = vars
                    .iter()
                    .map(|(n, d)| ((*n).clone(), Tensor::from_fn(d, |_| rng.gen_range(-1.0..=1.0))))
                    .collect();
                let r = match (eval(input, &b), eval(out, &b)) {
                    (Ok(x), Ok(y)) => match frobenius_relative_error(&x, &y) {
                        Ok(r) => r,
                        // An all-zero reference: equal only if the output is all zero too.
                        Err(_) if x == y => 0.0,
                        Err(_) => f64::INFINITY,
                    },
                    _ => f64::INFINITY,
                };
                worst = worst.max(r);
                passed &= r <= FLOAT_TOLERANCE;
            }
            VerifyReport {
                verdict: format!("max-relative-error: {worst:e}"),
                trials: args.check,
                passed,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::kernels::matmul;

    fn args(extra: &[&str]) -> Args {
        let mut v = vec!["apex", "x.gls"];
        v.extend_from_slice(extra);
        Args::try_parse_from(v).unwrap()
    }

    #[test]
    fn verify_flags_a_wrong_extraction() {
        let e = matmul("P", "Q", 3, 4, 3);
        let env = e.free_vars().into_iter().collect();
        let r = verify(&e, &e, &env, &args(&["--check", "4"]));
        assert!(r.passed);
        assert_eq!(r.verdict, "exact-equal");
        // Same shape, transposed values.
        let wrong = Expr::transpose(e.clone(), [1, 0]);
        assert!(!verify(&e, &wrong, &env, &args(&["--check", "4"])).passed);
        assert!(!verify(&e, &wrong, &env, &args(&["--check", "4", "--numeric", "float"])).passed);
        assert_eq!(verify(&e, &wrong, &env, &args(&[])).verdict, "skipped");
    }

    #[test]
    fn limits_parse() {
        assert_eq!(
            parse_limits("8x16x32"),
            Ok(SystolicArrayLimits {
                batch: 8,
                rows: 16,
                cols: 32
            })
        );
        assert_eq!(parse_limits("16x16").map(|l| l.batch), Ok(usize::MAX));
        assert!(parse_limits("16").is_err());
        assert!(parse_limits("ax2").is_err());
    }
}
