//! Quasi-valuations on `Q` and `Q(√d)` with exact arithmetic.
//!
//! * [`arith`]: rationals and quadratic field elements.
//! * [`valuation`]: `v_p` and its extensions to `Q(√d)`.
//! * [`quasival`]: quasi-valuations, their rings, and the axiom harness.
//! * [`topology`]: ultrametric balls and sampling checks of their properties.
//! * [`approx`]: constructive weak approximation.
//! * [`expr`], [`qvspec`]: text formats for elements and quasi-valuations.

pub mod approx;
pub mod arith;
pub mod error;
pub mod expr;
pub mod primes;
pub mod quasival;
pub mod qvspec;
pub mod lemmas;
pub mod report;
pub mod sample;
pub mod topology;
pub mod valuation;

pub use arith::{ExactRational, Field, FieldElem, QuadElem, Radicand};
pub use error::{Error, Result};
pub use valuation::{
    classify, hensel_sqrt, v_p, Branch, ExtendedValuation, ExtensionKind, PAdicValuation,
    Splitting, Valuation, Value,
};
