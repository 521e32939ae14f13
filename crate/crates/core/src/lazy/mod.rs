//! The epoch-based lazy evaluation engine.
//!
//! An exact object is a [`Node`]: a type tag, a kind naming its get-approx
//! function, a list of dependencies and a cache of approximations, one per
//! epoch. Epoch `n` works at base precision `2^n`.

mod graph;
mod node;

pub use graph::{
    epoch_precision, Config, Graph, Hook, DEFAULT_MAX_EPOCH, MAX_EPOCH_ENV, PROGRAM_KIND, USER_KIND,
};
pub use node::{
    Approx, Dep, DepRef, GetApproxFn, Instruction, KindId, KindSpec, Node, NodeId, Payload, Program, TypeTag,
    UserFn,
};
