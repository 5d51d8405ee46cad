//! Conformal blocks: descendant three-point coefficients, vertex tensors and
//! truncated block series.

mod descendant;
mod network;
mod series;
mod tensors;

pub use descendant::{three_point_descendant, DescendantCorrelator, InsertionPoints, LaurentExpr};
pub use network::{contract_network, Tensor};
pub use series::{
    chain_block, graph_block, graph_series_value, graph_tensors, torus_one_point_block,
    vertex_deltas, vertex_layout, BlockOptions, BlockSeries, ChainKind, GramInverses, TensorCache,
    VertexLayout,
};
pub use tensors::{
    annulus_tensor, block_coeff_tensor, disk_tensor, pant_tensor, BlockCoeffTensor, LevelBasis,
    VertexKind,
};
