//! The `.gls` s-expression format: reader, elaborator and printer.
//!
//! ```text
//! ; matrix multiplication
//! (var P (shape 2 3))
//! (var Q (shape 3 2))
//! (compute dotProd
//!   (cartProd (access P 1) (transpose (access Q 1) (list 1 0))))
//! ```

mod parse;
mod print;
mod sexp;

pub use parse::{head_op, parse, parse_expr, parse_pattern, Program};
pub use print::{print, print_pattern, print_program};
pub use sexp::{read_all, ParseError, ParseErrorKind, SExp, SourceSpan};

use std::fmt;

use crate::ir::{Expr, Op};

/// An expression tree that may contain named holes (`?x`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pattern {
    Hole(String),
    Node(Op, Vec<Pattern>),
}

impl Pattern {
    /// The hole-free expression, if there are no holes.
    pub fn to_expr(&self) -> Option<Expr> {
        match self {
            Pattern::Hole(_) => None,
            Pattern::Node(op, args) => Some(Expr::new(
                op.clone(),
                args.iter().map(Pattern::to_expr).collect::<Option<Vec<_>>>()?,
            )),
        }
    }

    /// Hole names in first-occurrence order.
    pub fn holes(&self) -> Vec<String> {
        fn go(p: &Pattern, out: &mut Vec<String>) {
            match p {
                Pattern::Hole(h) => {
                    if !out.contains(h) {
                        out.push(h.clone());
                    }
                }
                Pattern::Node(_, args) => args.iter().for_each(|a| go(a, out)),
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }
}

impl From<&Expr> for Pattern {
    fn from(e: &Expr) -> Self {
        Pattern::Node(e.op.clone(), e.args.iter().map(Pattern::from).collect())
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_pattern(self))
    }
}

#[cfg(test)]
mod tests;
