//! Higher cluster tilting toolkit: (d+1)-cluster categories of type A as
//! orbit categories, ideal quotients by cluster tilting objects, and
//! d-extended module categories over the truncated endomorphism algebra,
//! with machinery to check the two sides against each other.

pub mod error;
pub mod field;
pub mod hereditary;
pub mod cluster;
pub mod bridge;
pub mod dem;
pub mod complex;
pub mod matrix;
pub mod quiver;
pub mod quotient;
pub mod report;

pub use error::{Error, Result};
