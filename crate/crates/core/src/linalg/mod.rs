//! In-repo dense linear algebra kernels.

pub mod eig;
pub mod lu;
pub mod svd;
pub mod symeig;

pub use lu::Lu;
