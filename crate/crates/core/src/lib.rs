//! Numerical rough paths.
//!
//! Truncated tensor algebra and signatures, the sewing integrator, Young and
//! rough integration, Brownian and fractional Brownian lifts, Lyons
//! extension, controlled paths and RDE solvers.

pub mod controlled;
pub mod error;
pub mod lift;
pub mod path;
pub mod rde;
pub mod picard;
pub mod sewing;
pub mod smooth;
pub mod stats;
pub mod tensor;
pub mod young;

pub use error::{Result, RoughError};
pub use lift::{canonical_lift, RoughPath};
pub use path::{PairFamily, SamplePath};
pub use smooth::{SmoothMap, VectorField};
pub use tensor::{exp_tensor, pairing, shuffle, tensor_mul, FormalWordSum, TruncatedTensor, Word};
