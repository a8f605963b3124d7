//! Exact-rational tools for the search-trees-on-trees LP relaxation.
//!
//! Every coordinate, coefficient and objective value is a [`Rational`];
//! nothing is ever rounded except for display.

pub mod analysis;
pub mod assignment;
pub mod error;
pub mod linalg;
pub mod lpmodel;
pub mod normals;
pub mod parallel;
pub mod polytope;
pub mod rational;
pub mod rounding;
pub mod simplex;
pub mod stt;
pub mod topology;

pub use error::{Error, Result};
pub use rational::Rational;
