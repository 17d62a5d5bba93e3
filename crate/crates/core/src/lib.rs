//! Hausdorff-type integral operators
//!
//! ```text
//! (H f)(x) = ∫_Ω Φ(u, x) f(A(u) x) dμ(u)
//! ```
//!
//! acting from `L^q(S′, ν′)` to `L^p(S, ν)`. The crate evaluates such operators,
//! computes the mixed-norm upper bound on their norm, and produces empirical
//! lower bounds (exact matrix norms, ascent, parametric witness families) so
//! the two can be checked against each other.
//!
//! Module map:
//!
//! * [`measure`]: measure spaces, quadrature rules, integrals and `L^p` norms.
//! * [`maps`]: map families `A(u)`, the agreement factor `m(u)` and its
//!   empirical verification.
//! * [`kernel`]: kernels `Φ`, exponent pairs and the mixed norms.
//! * [`operator`]: pointwise/grid evaluation and finite matrix materialization.
//! * [`bounds`]: the theoretical bound and its specializations.
//! * [`estimator`]: empirical lower bounds and divergence probes.
//! * [`instances`]: seeded random finite instances.

pub mod bounds;
pub mod error;
pub mod estimator;
pub mod instances;
pub mod kernel;
pub mod maps;
pub mod measure;
pub mod operator;
pub mod sum;

pub use error::{Error, Result};
pub use kernel::{Exponent, Exponents, Kernel};
pub use maps::MapFamily;
pub use measure::{Carrier, Integral, MeasureKind, MeasureSpace, Point, QuadratureSpec};
pub use operator::{Function, OperatorInstance};
