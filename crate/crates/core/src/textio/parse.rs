use std::collections::HashMap;

use super::sexp::{read_all, ParseError, ParseErrorKind, SExp, SourceSpan};
use super::Pattern;
use crate::ir::{
    infer_shape, AccelKind, AccessPatternShape, ComputeOp, Expr, NamedOpKind, Op, ShapeEnv, Slot,
};

/// A parsed `.gls` program: declared inputs in declaration order, and the body.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub vars: Vec<(String, Vec<usize>)>,
    pub expr: Expr,
}

impl Program {
    pub fn env(&self) -> ShapeEnv {
        self.vars.iter().cloned().collect()
    }
}

/// Maps a head symbol to its node kind. `compute` and literal forms are
/// handled separately.
pub fn head_op(name: &str) -> Option<Op> {
    Some(match name {
        "access" => Op::Access,
        "transpose" => Op::Transpose,
        "cartProd" | "cartesian-product" => Op::CartProd,
        "windows" => Op::Windows,
        "slice" => Op::Slice,
        "squeeze" => Op::Squeeze,
        "flatten" => Op::Flatten,
        "reshape" => Op::Reshape,
        "pair" => Op::Pair,
        "concat" => Op::Concat,
        "dense" | "nn_dense" => Op::Named(NamedOpKind::Dense),
        "bias_add" => Op::Named(NamedOpKind::BiasAdd),
        "add" => Op::Named(NamedOpKind::Add),
        "reshape_op" => Op::Named(NamedOpKind::ReshapeOp),
        "flatten_op" => Op::Named(NamedOpKind::FlattenOp),
        "conv2d" => Op::Named(NamedOpKind::Conv2d),
        "systolicArray" => Op::Accel(AccelKind::SystolicArray),
        "vta-dense" | "vta_dense" => Op::Accel(AccelKind::VtaDense),
        "hlscnn-conv2d" | "hlscnn_conv2d" => Op::Accel(AccelKind::HlscnnConv2d),
        _ => return None,
    })
}

struct Elab<'a> {
    vars: &'a HashMap<String, Vec<usize>>,
    patterns: bool,
}

fn err(kind: ParseErrorKind, span: SourceSpan, msg: impl Into<String>) -> ParseError {
    ParseError::new(kind, span, msg)
}

fn is_hole(s: &str) -> bool {
    s.len() > 1 && s.starts_with('?')
}

fn parse_uint(s: &SExp) -> Result<usize, ParseError> {
    match s {
        SExp::Atom(a, span) => a
            .parse::<usize>()
            .map_err(|_| err(ParseErrorKind::Syntax, *span, format!("expected a non-negative integer, found `{a}`"))),
        SExp::List(_, span) => Err(err(ParseErrorKind::Syntax, *span, "expected a non-negative integer, found a form")),
    }
}

fn list_parts<'s>(s: &'s SExp, head: &str) -> Option<(&'s [SExp], SourceSpan)> {
    match s {
        SExp::List(items, span) => match items.first() {
            Some(SExp::Atom(h, _)) if h == head => Some((&items[1..], *span)),
            _ => None,
        },
        _ => None,
    }
}

impl Elab<'_> {
    fn hole(&self, s: &SExp) -> Option<Pattern> {
        match s {
            SExp::Atom(a, _) if self.patterns && is_hole(a) => Some(Pattern::Hole(a[1..].to_string())),
            _ => None,
        }
    }

    fn uints(&self, items: &[SExp]) -> Result<Vec<usize>, ParseError> {
        items.iter().map(parse_uint).collect()
    }

    fn dims_form(&self, s: &SExp) -> Result<Vec<usize>, ParseError> {
        match list_parts(s, "shape") {
            Some((items, _)) => self.uints(items),
            None => Err(err(ParseErrorKind::Syntax, s.span(), "expected `(shape d ...)`")),
        }
    }

    fn shape_of(&self, items: &[SExp], span: SourceSpan) -> Result<AccessPatternShape, ParseError> {
        if items.len() != 1 {
            return Err(err(ParseErrorKind::Arity, span, "`shape-of` takes 1 argument"));
        }
        let p = self.expr(&items[0])?;
        let Some(e) = p.to_expr() else {
            return Err(err(ParseErrorKind::Syntax, span, "`shape-of` cannot be applied to a pattern"));
        };
        let env: ShapeEnv = self.vars.clone();
        infer_shape(&e, &env).map_err(|e| err(ParseErrorKind::Shape, span, e.to_string()))
    }

    fn slot(&self, slot: Slot, s: &SExp) -> Result<Pattern, ParseError> {
        if let Some(h) = self.hole(s) {
            return Ok(h);
        }
        let leaf = |op| Ok(Pattern::Node(op, Vec::new()));
        match slot {
            Slot::Expr => self.expr(s),
            Slot::Int => leaf(Op::Int(parse_uint(s)?)),
            Slot::List => match list_parts(s, "list") {
                Some((items, _)) => leaf(Op::List(self.uints(items)?)),
                None => Err(err(ParseErrorKind::Syntax, s.span(), "expected `(list i ...)`")),
            },
            Slot::Shape => {
                if let Some((items, span)) = list_parts(s, "shape-of") {
                    return leaf(Op::Shape(self.shape_of(items, span)?.dims()));
                }
                leaf(Op::Shape(self.dims_form(s)?))
            }
            Slot::ShapePair => {
                if let Some((items, span)) = list_parts(s, "shape-of") {
                    return leaf(Op::ShapePair(self.shape_of(items, span)?));
                }
                match list_parts(s, "shape-pair") {
                    Some(([a, c], _)) => leaf(Op::ShapePair(AccessPatternShape::new(
                        self.dims_form(a)?,
                        self.dims_form(c)?,
                    ))),
                    Some((_, span)) => Err(err(ParseErrorKind::Arity, span, "`shape-pair` takes 2 arguments")),
                    None => Err(err(
                        ParseErrorKind::Syntax,
                        s.span(),
                        "expected `(shape-pair (shape ...) (shape ...))` or `(shape-of e)`",
                    )),
                }
            }
        }
    }

    fn expr(&self, s: &SExp) -> Result<Pattern, ParseError> {
        if let Some(h) = self.hole(s) {
            return Ok(h);
        }
        let (items, span) = match s {
            SExp::Atom(a, span) => {
                if a.parse::<usize>().is_ok() {
                    return Err(err(ParseErrorKind::Syntax, *span, format!("expected an expression, found integer `{a}`")));
                }
                return match self.vars.get(a) {
                    Some(shape) => Ok(Pattern::Node(
                        Op::Var {
                            name: a.clone(),
                            shape: shape.clone(),
                        },
                        Vec::new(),
                    )),
                    None => Err(err(ParseErrorKind::UndeclaredVariable, *span, format!("undeclared variable `{a}`"))),
                };
            }
            SExp::List(items, span) => (items, *span),
        };
        let Some(first) = items.first() else {
            return Err(err(ParseErrorKind::Syntax, span, "empty form"));
        };
        let SExp::Atom(head, head_span) = first else {
            return Err(err(ParseErrorKind::Syntax, first.span(), "form head must be a symbol"));
        };
        let rest = &items[1..];
        let (op, rest) = if head == "compute" {
            let Some(SExp::Atom(name, name_span)) = rest.first() else {
                return Err(err(ParseErrorKind::Arity, span, "`compute` takes an operator name and an expression"));
            };
            let cop = ComputeOp::from_name(name).ok_or_else(|| {
                err(ParseErrorKind::UnknownForm, *name_span, format!("unknown operator `{name}`"))
            })?;
            (Op::Compute(cop), &rest[1..])
        } else if let Some(op) = head_op(head) {
            (op, rest)
        } else {
            let msg = match head.as_str() {
                "list" | "shape" | "shape-pair" | "shape-of" => format!("`{head}` literal where an expression is expected"),
                "var" => "declarations must precede the program body".to_string(),
                _ => format!("unknown form `{head}`"),
            };
            let kind = if matches!(head.as_str(), "list" | "shape" | "shape-pair" | "shape-of" | "var") {
                ParseErrorKind::Syntax
            } else {
                ParseErrorKind::UnknownForm
            };
            return Err(err(kind, *head_span, msg));
        };
        let sig = op.signature();
        if sig.len() != rest.len() {
            return Err(err(
                ParseErrorKind::Arity,
                span,
                format!("`{head}` takes {} arguments, got {}", sig.len(), rest.len()),
            ));
        }
        let args = sig
            .iter()
            .zip(rest)
            .map(|(slot, s)| self.slot(*slot, s))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Pattern::Node(op, args))
    }
}

fn declaration(s: &SExp) -> Result<Option<(String, Vec<usize>, SourceSpan)>, ParseError> {
    let Some((items, span)) = list_parts(s, "var") else {
        return Ok(None);
    };
    match items {
        [SExp::Atom(name, name_span), shape] => {
            if name.parse::<usize>().is_ok() || is_hole(name) || head_op(name).is_some() {
                return Err(err(ParseErrorKind::Syntax, *name_span, format!("`{name}` is not a valid variable name")));
            }
            let dims = match list_parts(shape, "shape") {
                Some((ds, _)) => ds.iter().map(parse_uint).collect::<Result<Vec<_>, _>>()?,
                None => return Err(err(ParseErrorKind::Syntax, shape.span(), "expected `(shape d ...)`")),
            };
            if dims.contains(&0) {
                return Err(err(ParseErrorKind::Shape, shape.span(), "dimensions must be positive"));
            }
            Ok(Some((name.clone(), dims, span)))
        }
        _ => Err(err(ParseErrorKind::Arity, span, "expected `(var NAME (shape d ...))`")),
    }
}

/// Parses a program: `(var NAME (shape d ...))` declarations followed by
/// exactly one body expression.
pub fn parse(text: &str) -> Result<Program, ParseError> {
    let forms = read_all(text)?;
    let mut vars = Vec::new();
    let mut map = HashMap::new();
    let mut body = None;
    for f in &forms {
        if let Some((name, dims, span)) = declaration(f)? {
            if body.is_some() {
                return Err(err(ParseErrorKind::Syntax, span, "declarations must precede the program body"));
            }
            if map.insert(name.clone(), dims.clone()).is_some() {
                return Err(err(ParseErrorKind::Syntax, span, format!("variable `{name}` declared twice")));
            }
            vars.push((name, dims));
        } else if body.is_some() {
            return Err(err(ParseErrorKind::Syntax, f.span(), "expected exactly one program body"));
        } else {
            body = Some(f);
        }
    }
    let Some(body) = body else {
        let end = text.len();
        let (line, col) = line_col(text, end);
        return Err(err(
            ParseErrorKind::Syntax,
            SourceSpan { start: end, end, line, col },
            "program has no body",
        ));
    };
    let elab = Elab { vars: &map, patterns: false };
    let expr = elab.expr(body)?.to_expr().expect("holes rejected outside pattern mode");
    Ok(Program { vars, expr })
}

/// Parses a single expression against an existing variable environment.
pub fn parse_expr(text: &str, vars: &ShapeEnv) -> Result<Expr, ParseError> {
    let p = parse_one(text, vars, false)?;
    Ok(p.to_expr().expect("holes rejected outside pattern mode"))
}

/// Parses a rewrite pattern. `?name` atoms are holes and may stand in any slot.
pub fn parse_pattern(text: &str) -> Result<Pattern, ParseError> {
    parse_one(text, &HashMap::new(), true)
}

fn parse_one(text: &str, vars: &ShapeEnv, patterns: bool) -> Result<Pattern, ParseError> {
    let forms = read_all(text)?;
    match forms.as_slice() {
        [one] => Elab { vars, patterns }.expr(one),
        [] => {
            let (line, col) = line_col(text, text.len());
            let end = text.len();
            Err(err(ParseErrorKind::Syntax, SourceSpan { start: end, end, line, col }, "empty input"))
        }
        [_, second, ..] => Err(err(ParseErrorKind::Syntax, second.span(), "expected a single expression")),
    }
}

fn line_col(text: &str, pos: usize) -> (usize, usize) {
    let before = &text[..pos];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}
