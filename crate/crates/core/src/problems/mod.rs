//! Benchmark objectives: quadratics, Rosenbrock and its low effective
//! dimensional variant, matrix factorization and cross-entropy
//! classification, plus dataset loaders.

mod classification;
mod dataset;
mod ler;
mod mf;
mod quadratic;
mod rosenbrock;

pub use classification::{LogisticRegression, SoftmaxRegression};
pub use dataset::{Dataset, LoadOptions, SparseRows};
pub use ler::LerProblem;
pub use mf::{MatrixFactorization, SyntheticMf};
pub use quadratic::QuadraticProblem;
pub use rosenbrock::Rosenbrock;
