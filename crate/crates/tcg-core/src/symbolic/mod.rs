pub mod cq;
pub mod filter;
pub mod freq;
pub mod parse;
pub mod scalar;
pub mod series;

pub use cq::CQ;
pub use filter::{FilterKind, FilterSpec, Tau};
pub use freq::{sym, FreqExpr, Symbol};
pub use parse::{parse_freq, parse_quantity, parse_real_quantity, parse_scalar, SymbolKind};
pub use scalar::{Assignment, Atom, Monomial, ScalarExpr, TAU, TIME};
