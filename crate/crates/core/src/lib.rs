//! Random subspace homogenized trust-region methods.
//!
//! The crate is organized bottom-up:
//!
//! * [`operators`]: objectives with value, gradient and Hessian-vector
//!   product hooks, evaluation counters and derivative checks.
//! * [`sketch`]: seeded Gaussian sketches and restricted Hessian actions.
//! * [`homotrs`]: the homogenized subproblem, solved by Lanczos or densely.
//! * [`rshtr`]: the outer iteration and its variants.
//! * [`baselines`]: full-space HSODM, gradient descent and its random
//!   subspace counterpart.
//! * [`problems`]: benchmark objectives and dataset loaders.
//! * [`bench`]: configurable benchmark grids, CSV traces and convergence
//!   order estimates.
//!
//! ```
//! use rshtr::operators::Objective;
//! use rshtr::problems::QuadraticProblem;
//! use rshtr::rshtr::{OnSmallStep, Rshtr, SolverConfig};
//!
//! let obj = Objective::new(QuadraticProblem::ill_conditioned(0, 40, 10.0).unwrap());
//! let cfg = SolverConfig {
//!     subspace_dim: 10,
//!     on_small_step: OnSmallStep::EnterLocalMode,
//!     grad_tol: 1e-6,
//!     max_iter: 2000,
//!     ..Default::default()
//! };
//! let res = Rshtr::new(cfg, 40).unwrap().run(&obj, vec![0.0; 40]).unwrap();
//! assert!(res.gnorm <= 1e-6);
//! ```

pub mod baselines;
pub mod bench;
pub mod error;
pub mod homotrs;
pub mod linalg;
pub mod operators;
pub mod problems;
pub mod rng;
pub mod rshtr;
pub mod sketch;

pub use error::{Error, Result};
pub use operators::{Objective, SmoothFunction};
pub use rshtr::{Rshtr, RunResult, SolverConfig, TraceRecord};
