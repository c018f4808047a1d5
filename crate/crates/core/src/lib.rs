//! Multi-component tensor-network representations of dense tensors: dense
//! multilinear algebra, fully-connected tensor-network components with
//! adaptive topologies, closed-form network algebra, decomposition by
//! adaptive topology learning, and tensor completion (ALS and ADMM).

pub mod algebra;
pub mod atl;
pub mod completion;
mod contraction;
pub mod data;
pub mod error;
pub mod experiment;
pub mod io;
pub mod linalg;
pub mod mask;
pub mod metrics;
pub mod network;
pub mod ops;
pub mod tensor;

pub use error::{Error, Result};
pub use mask::{apply_mask, ObservationMask};
pub use network::{MtnrModel, RankMatrix, TnComponent};
pub use tensor::{DenseTensor, Grouping, Matricized};
