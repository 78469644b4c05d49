pub mod corpus;
pub mod diagnostic;
pub mod dsl;
pub mod expr;
pub mod graph;
pub mod impact;
pub mod interval;
pub mod model;
pub mod period;
pub mod pipeline;
pub mod render;
pub mod scalar;
pub mod validate;

#[cfg(feature = "testkit")]
pub mod testkit;

/// Default engine scalar: IEEE double precision.
pub type Real = f64;
/// Exact big-rational scalar used to cross-check float results.
pub type Exact = num_rational::BigRational;

pub type RealInterval = interval::Interval<Real>;
pub type ExactInterval = interval::Interval<Exact>;
pub type RealBindings = expr::Bindings<Real>;
pub type ExactBindings = expr::Bindings<Exact>;
