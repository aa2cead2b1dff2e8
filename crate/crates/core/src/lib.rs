//! Recovery of sparse binary signals from noisy sparse linear measurements.
//!
//! The main decoder runs Glauber dynamics (single-site Gibbs sampling) on the
//! Bernoulli-prior posterior of `y = αAx + σz`, where `A` is drawn from the
//! Gallager LDPC ensemble. Non-negative least squares and approximate message
//! passing are provided as baselines, together with brute-force inference
//! for tiny instances and an unsourced random access energy model.
//!
//! Numerical kernels are generic over [`Scalar`] (`f32` or `f64`); the
//! simulation drivers work in `f64`.

pub mod amp;
pub mod channel;
pub mod edgelist;
pub mod error;
pub mod exact;
pub mod expansion;
pub mod experiment;
pub mod glauber;
pub mod nnls;
pub mod operator;
pub mod ppv;
pub mod rng;
pub mod scalar;
pub mod sparse;
pub mod special;
pub mod ura;

pub use channel::{BinarySignal, CountSignal, Measurements};
pub use error::{Error, Result};
pub use experiment::Decoder;
pub use glauber::{Glauber, GlauberConfig, GlauberOutput};
pub use operator::LinearOperator;
pub use scalar::Scalar;
pub use sparse::{LdpcParams, SparseBinaryMatrix};

pub type GlauberConfigF64 = glauber::GlauberConfig<f64>;
pub type GlauberConfigF32 = glauber::GlauberConfig<f32>;
pub type MeasurementsF64 = channel::Measurements<f64>;
pub type DenseGaussianF64 = amp::DenseGaussianMatrix<f64>;
pub type PosteriorTableF64 = exact::PosteriorTable<f64>;
