//! Optimization primitives shared by the exact solver and the approximation:
//! maximum flow / minimum cut with exact rational capacities, minimum-weight
//! closure, and two-literal satisfiability.

pub mod closure;
pub mod flow;
pub mod twosat;

pub use closure::{min_weight_closure, ClosureError, ClosureInstance};
pub use flow::FlowNetwork;
pub use twosat::{two_sat, Lit, TwoLitSystem};
