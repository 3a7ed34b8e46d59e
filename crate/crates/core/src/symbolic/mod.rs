//! Symbolic expressions over chart coordinates.
//!
//! Every partial derivative used elsewhere in the crate is produced by
//! [`Expr::diff`]; [`fd_check`] is the finite-difference oracle it is tested
//! against.

mod chart;
mod expr;
mod parse;

pub use chart::{Chart, Coord, CoordKind};
pub use expr::{fd_check, EvalError, Expr, ExprDisplay, FdCheck, Node, Point, Singularity, Valuation};
pub use parse::{parse, ParseError};
