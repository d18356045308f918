//! Rough paths, controlled rough integration and a pathwise Picard solver
//! for Burgers-type equations on the circle driven by the stationary
//! stochastic heat equation.
//!
//! The modules build on each other:
//!
//! - [`tensor`]: truncated tensor algebra, tensor and shuffle products.
//! - [`rough_path`]: sampled paths, signature lifts, Chen and shuffle checks,
//!   Hölder norms.
//! - [`controlled`]: controlled paths, composition with smooth functions.
//! - [`integral`]: compensated Riemann sums and the rough integral.
//! - [`heat`]: heat kernel, semigroup and the stochastic heat driver.
//! - [`solver`]: the Picard solver with horizon control and restarts.
//! - [`verify`]: independent oracles used by the tests and the CLI.
//!
//! ```
//! use rough_burgers::rough_path::{signature_lift, GridPath};
//!
//! # fn main() -> rough_burgers::Result<()> {
//! let path = GridPath::from_fn(GridPath::uniform_times(0.0, 1.0, 16), |t| vec![t, t * t])?;
//! let x = signature_lift(&path, 2, 0.45)?;
//! // the area of (t, t²) over [0, 1] is 1/6
//! let area = 0.5 * (x.element(16).level(2)[1] - x.element(16).level(2)[2]);
//! assert!((area - 1.0 / 6.0).abs() < 1e-2);
//! # Ok(())
//! # }
//! ```

pub mod controlled;
pub mod error;
pub mod heat;
pub mod holder;
pub mod integral;
pub mod rough_path;
pub mod sampling;
pub mod solver;
pub mod tensor;
pub mod verify;

pub use error::{Error, Result};

// The book chapters are compiled as doc-tests so their snippets stay current.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/overview.md")]
    pub mod overview {}
    #[doc = include_str!("../../../book/src/tensor_algebra.md")]
    pub mod tensor_algebra {}
    #[doc = include_str!("../../../book/src/rough_paths.md")]
    pub mod rough_paths {}
    #[doc = include_str!("../../../book/src/integration.md")]
    pub mod integration {}
    #[doc = include_str!("../../../book/src/heat_driver.md")]
    pub mod heat_driver {}
    #[doc = include_str!("../../../book/src/solver.md")]
    pub mod solver {}
    #[doc = include_str!("../../../book/src/verification.md")]
    pub mod verification {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
