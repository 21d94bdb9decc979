//! Diffusion operator on edge-weighted directed hypergraphs with stationary
//! vertices, with spectral and semi-supervised applications.

pub mod acceptance;
pub mod densest;
pub mod diffusion;
pub mod error;
pub mod flow;
pub mod hypergraph;
pub mod operator;
pub mod partition;
pub mod quadratic;
pub mod random;
pub mod spectral;
pub mod sssl;

pub use error::{Error, Result};
pub use hypergraph::{DirectedHypergraph, Hyperedge, WeightMode};
