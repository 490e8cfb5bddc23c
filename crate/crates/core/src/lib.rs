//! Independent-set stars in perfect r-ary trees and forests.
//!
//! A *star* at a vertex `v` is the family of independent sets of one size
//! that contain `v`. This crate provides:
//!
//! - rooted plane trees and forests with a parent-array text format and a
//!   `perfect:<r>:<h>` shorthand ([`tree`], [`forest`]);
//! - exact counting of independent sets and stars by a polynomial tree DP
//!   with arbitrary-precision coefficients, next to a brute-force
//!   enumeration oracle ([`count`]);
//! - the star-transfer injections that move a star member from any vertex
//!   to a leaf while preserving size and independence, with per-iteration
//!   invariant monitoring and structured step traces ([`inject`]);
//! - leaf-comparison maps and the maximizing-leaf selector for forests of
//!   perfect trees ([`forest`]);
//! - canonical codes, unlabeled tree enumeration, and desk-scale exhaustive
//!   verification sweeps ([`canon`], [`verify`]).

pub mod canon;
pub mod count;
pub mod error;
pub mod forest;
pub mod inject;
pub mod set;
pub mod tree;
pub mod verify;

pub use error::{Error, Result};
pub use forest::Forest;
pub use set::VertexSet;
pub use tree::{PerfectShape, RootedTree, Topology, VertexId};
