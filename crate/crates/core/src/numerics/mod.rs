//! Deterministic numeric kernel shared by every encoder and model.

mod gradcheck;
mod matrix;
pub mod rng;
mod svd;
mod vector;

pub use gradcheck::{check_gradient, finite_diff_grad, max_relative_error, relative_error};
pub use matrix::Matrix;
pub use rng::{cell_seed, label_hash, mix_seed, RngStream};
pub use svd::{symmetric_eigen, truncated_svd, Svd, RANDOMIZED_THRESHOLD};
pub use vector::{
    argmax, cosine_similarity, dot, norm, softmax, squared_distance, DenseVector, Features,
    SparseVector,
};
pub(crate) use vector::cosine_slices;
