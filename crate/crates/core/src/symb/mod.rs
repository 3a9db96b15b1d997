//! Purpose-built immutable symbolic expression kernel: construction,
//! differentiation, substitution, canonical simplification, parsing,
//! printing and randomized numeric probing for zero-testing.

pub mod ast;
pub mod diff;
pub mod integrate;
pub mod numeric;
pub mod parse;
pub mod print;
pub mod probe;
pub mod simplify;
pub mod subst;

pub use ast::{Expr, FuncDecl, FuncNode, Name, Param, Var};
pub use diff::{diff, diff_multi, diff_n};
pub use integrate::integrate_closed_form;
pub use numeric::{eval, eval_with_scale, EvalError, FuncImpl, FuncTable, Point};
pub use parse::{parse, ParseError, SymbolEnv};
pub use probe::{equals_zero, ProbeConfig, ProbeError, Rng, Witness, ZeroVerdict};
pub use simplify::simplify;
pub use subst::{substitute, substitute_with_warnings, Bindings, SubstError};
