//! Analysis toolkit for multi-dimensional spatially-coupled LDPC ensembles on
//! the binary erasure channel.

pub mod de;
pub mod ensemble;
pub mod error;
pub mod exact;
pub mod optimizer;
pub mod reference;
pub mod scalar;
pub mod sim;
pub mod window;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Constellation64 = de::Constellation<f64>;
pub type Constellation32 = de::Constellation<f32>;
pub type WorstCase64 = window::WorstCase<f64>;
pub type WorstCase32 = window::WorstCase<f32>;
pub type Bracket64 = de::Bracket<f64>;
pub type Bracket32 = de::Bracket<f32>;
/// Exact rationals for rates and stopping-set probabilities.
pub type Rational = num_rational::BigRational;

/// Runs `f` on a dedicated pool of `workers` threads, or on the global pool.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        Some(n) => Ok(rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::PreconditionViolated(format!("cannot build worker pool: {e}")))?
            .install(f)),
        None => Ok(f()),
    }
}
