//! Signal temporal logic: predicates, formulas, the textual syntax, Boolean
//! and quantitative semantics, and compositional Lipschitz certificates.

mod certify;
mod eval;
mod formula;
mod parse;
mod predicate;

pub use certify::{certify, LipschitzCertificate};
pub use eval::{eval_boolean, eval_robustness, robustness_trace, until_witness};
pub use formula::{Formula, Interval};
pub use parse::parse;
pub use predicate::{predicate_margin, MarginFn, Predicate, PredicateDecl, PredicateKind, PredicateTable};
