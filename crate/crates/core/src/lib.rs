//! Random doubly stochastic matrices and their spectra.
//!
//! The crate samples uniformly from the Birkhoff polytope, reduces samples to
//! the `(n-1) x (n-1)` form whose spectrum drives the circular law, and ships
//! the dense eigenvalue/SVD kernels plus the statistics used to compare
//! empirical spectra with their limits.
//!
//! ```
//! use birkhoff_spectra::{hit_and_run_chain, reduce_bar, ChainConfig, RngStream};
//!
//! let mut rng = RngStream::new(7);
//! let out = hit_and_run_chain(&ChainConfig::new(5), 3, &mut rng).unwrap();
//! let xbar = reduce_bar(&out.samples[0]);
//! assert_eq!(xbar.matrix().rows(), 4);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod birkhoff;
pub mod concentration;
pub mod error;
pub mod linalg;
pub mod littlewood_offord;
pub mod matrix;
pub mod rng;
pub mod samplers;
pub mod spectral;
pub mod stats;

pub use birkhoff::{
    augment_minus_f, center_and_scale, gamma_extend, hs_norm_sq_bar, log_volume_sn, membership_sn, phi_project,
    reduce_bar, shifted_bar, AugmentedMatrix, CornerBlock, DoublyStochasticMatrix, ReducedMatrix,
};
pub use error::{Error, Result};
pub use matrix::{ComplexMatrix, DenseMatrix};
pub use rng::{RngStream, SeedRecord};
pub use samplers::{hit_and_run_chain, ChainConfig, ChainOutput, Direction};
pub use spectral::{ComplexSpectrum, DistanceReport, SingularSpectrum, TruncationConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
