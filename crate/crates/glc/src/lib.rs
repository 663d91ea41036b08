//! Finite-depth inverse-system models of graph-like continua.
//!
//! A space is represented by a truncated inverse system of finite connected
//! multigraphs with onto, simplicial, monotone bonding maps and persistent
//! global edge ids. On top of that sit the Euler machinery (circuits, chains,
//! lifts, enumeration), cut-parity analysis, Menger-style duality between
//! edge-disjoint paths and cuts, odd-region chasing and contraction, and an
//! embedding construction into a standard subspace built from iterated line
//! graphs.

pub mod cli;
pub mod embed;
pub mod error;
pub mod euler;
pub mod generators;
pub mod menger;
pub mod multigraph;
pub mod parity;
pub mod prosys;
pub mod regions;

pub use error::{Error, Result};
