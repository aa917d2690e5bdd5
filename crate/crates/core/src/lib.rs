//! Colligations, their ∘-product, characteristic functions, divisors and
//! invariants.

pub mod charfn;
pub mod colligation;
pub mod divisor;
pub mod error;
pub mod invariants;
pub mod io;
pub mod matrix;
pub mod poly;
pub mod scalar;
pub mod semigroup;
pub mod verify;

pub use colligation::{Colligation, Flavor, GroupKind, InnerGroupElement, Selector, Shape};
pub use error::{Error, Result};
pub use matrix::Mat;
pub use num_complex::Complex64;
pub use scalar::{Field, GaussRat, Mode, Scalar};
