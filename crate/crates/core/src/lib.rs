//! Stable roommates with incomplete strict preference lists.
//!
//! The library reduces an instance to its canonical subgraph `H` by repeated
//! elimination of redundant edges, decides whether the instance is bipartite
//! reducible, solves the weighted stable matching problem exactly on the
//! reducible class, and runs a factor-2 approximation on instances whose
//! stable partners form single edges and disjoint cycles.  A brute-force
//! oracle validates every component at desk scale.
//!
//! All weight and polytope arithmetic is exact rational ([`Rat`]); there is no
//! floating point anywhere in the crate.

pub mod approx;
pub mod instances;
pub mod irving;
pub mod model;
pub mod optcore;
pub mod oracle;
pub mod polytope;
pub mod reduction;
pub mod solver;

/// Exact rational scalar used for weights, capacities and polytope coordinates.
pub type Rat = num_rational::BigRational;

use num_bigint::BigInt;

/// Rational from an integer.
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Rational `p/q`.
pub fn ratio(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

pub use model::{Edge, EdgeWeights, Matching, PreferenceSystem};
