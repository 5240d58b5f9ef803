//! Exact counts and numerical checks around integers that have a divisor in
//! a window `(y, z]`.
//!
//! * [`primes`]: sieves, factorization, smooth squarefree enumeration.
//! * [`window`]: `H(x, y, z)`, the multiplication table count `A(x)`.
//! * [`cluster`]: the divisor clustering measures `L(a)` and `W(a)`.
//! * [`blocks`]: greedy partitions of the primes by reciprocal mass.
//! * [`order_stats`]: barrier probabilities for uniform order statistics.
//! * [`identities`]: exact rational combinatorial identities.

pub mod accum;
pub mod blocks;
pub mod cluster;
pub mod error;
pub mod identities;
pub mod order_stats;
pub mod parse;
pub mod primes;
pub mod window;

pub use error::{Error, Result};
pub use primes::{Factorization, PrimeBound, PrimeTable};
pub use window::WindowQuery;
