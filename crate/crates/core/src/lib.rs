//! Regional gradient observability workbench for diffusion systems on intervals and rectangles.
//!
//! The crate decides whether a set of sensors is gradient strategic on a subregion ω, synthesizes
//! an output-injection observer for the unstable part, and simulates the plant/observer pair to
//! check that the gradient estimate converges on ω in the `(H¹(ω))ⁿ` norm.

pub mod error;
pub mod observer;
pub mod scenario;
pub mod sensors;
pub mod spectral;
pub mod strategic;

pub use error::{Error, Result};
