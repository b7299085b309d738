use super::Pattern;
use crate::ir::{Expr, Op};

/// Forms at most this deep print on one line.
const INLINE_DEPTH: usize = 3;

fn join(v: &[usize]) -> String {
    v.iter().map(|d| format!(" {d}")).collect()
}

fn literal(op: &Op) -> Option<String> {
    Some(match op {
        Op::Int(n) => n.to_string(),
        Op::List(v) => format!("(list{})", join(v)),
        Op::Shape(v) => format!("(shape{})", join(v)),
        Op::ShapePair(s) => format!("(shape-pair (shape{}) (shape{}))", join(&s.access), join(&s.compute)),
        _ => return None,
    })
}

fn depth(p: &Pattern) -> usize {
    match p {
        Pattern::Hole(_) => 1,
        Pattern::Node(op, _) if op.is_literal() => 0,
        Pattern::Node(_, args) => 1 + args.iter().map(depth).max().unwrap_or(0),
    }
}

fn head(op: &Op) -> String {
    match op {
        Op::Compute(c) => format!("compute {}", c.name()),
        other => other.head().to_string(),
    }
}

fn write(p: &Pattern, indent: usize, out: &mut String) {
    match p {
        Pattern::Hole(h) => {
            out.push('?');
            out.push_str(h);
        }
        Pattern::Node(op, args) => {
            if let Some(lit) = literal(op) {
                out.push_str(&lit);
                return;
            }
            if args.is_empty() {
                out.push_str(op.head());
                return;
            }
            out.push('(');
            out.push_str(&head(op));
            let inline = depth(p) <= INLINE_DEPTH;
            for a in args {
                if inline {
                    out.push(' ');
                } else {
                    out.push('\n');
                    out.extend(std::iter::repeat_n(' ', indent + 2));
                }
                write(a, indent + 2, out);
            }
            out.push(')');
        }
    }
}

pub fn print_pattern(p: &Pattern) -> String {
    let mut out = String::new();
    write(p, 0, &mut out);
    out
}

/// Canonical text of an expression.
pub fn print(e: &Expr) -> String {
    print_pattern(&Pattern::from(e))
}

/// Variable declarations followed by the body, newline-terminated.
pub fn print_program(e: &Expr) -> String {
    let mut out = String::new();
    for (name, shape) in e.free_vars() {
        out.push_str(&format!("(var {name} (shape{}))\n", join(&shape)));
    }
    out.push_str(&print(e));
    out.push('\n');
    out
}

impl std::fmt::Display for Expr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&print(self))
    }
}
