//! Numerical laboratory for sampling complexity on ReLU network
//! approximation spaces.
//!
//! The crate builds the explicit hat/bump ReLU networks behind the
//! approximation-space unit balls, evaluates the closed-form optimal-rate
//! formulas, runs deterministic and Monte Carlo sampling algorithms against
//! adversarial function families, and fits empirical convergence exponents
//! against the theory intervals.
//!
//! The numeric core (`relu_net`, `hats`, `pwl`) is generic over the scalar
//! type through [`real::Real`]; the experiment harness works with the `f64`
//! aliases below.

pub mod adversary;
pub mod algorithms;
pub mod approx_space;
pub mod checks;
pub mod cli;
pub mod complexity_checks;
pub mod error;
pub mod hats;
pub mod pwl;
pub mod rates;
pub mod real;
pub mod relu_net;

pub use error::{Error, Result};

/// `f64` network layer.
pub type Layer = relu_net::Layer<f64>;
/// `f64` dense matrix.
pub type Matrix = relu_net::Matrix<f64>;
/// `f64` ReLU network.
pub type Network = relu_net::Network<f64>;
/// `f64` triangular hat.
pub type Hat1D = hats::Hat1D<f64>;
/// `f64` plateau bump.
pub type BumpD = hats::BumpD<f64>;
/// `f64` hat-sum network specification.
pub type HatSumSpec = hats::HatSumSpec<f64>;
