//! AIFV-m codes: typed code trees, their validity rules, enumeration, the
//! conversion of trees into Markov chain states, and the encoder/decoder.

mod codec;
mod enumerate;
mod grammar;
mod problem;
mod source;
mod tree;

pub use codec::{decode, encode, pack_bits, unpack_bits, Bits};
pub use enumerate::{enumerate_trees, enumerate_trees_filtered};
pub use problem::{aifv_problem, default_max_nodes, AifvProblem};
pub use source::SourceDistribution;
pub use tree::{tree_to_state, validate_tree, AifvCode, AifvTree, Node, NodeKind};
