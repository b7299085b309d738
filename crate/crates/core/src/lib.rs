//! Access-pattern tensor IR, reference interpreter, equality-saturation
//! rewriter and textual format.

pub mod cli;
pub mod interp;
pub mod ir;
pub mod rewrite;
pub mod textio;
