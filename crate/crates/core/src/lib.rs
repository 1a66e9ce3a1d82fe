//! Knot Floer complexes over F2[U,V]/(UV), bordered structures over the
//! torus algebra, and immersed curves in the punctured torus.

pub mod base_algebra;
pub mod bimodules;
pub mod bordered;
pub mod cable_family;
pub mod cfk;
pub mod corpus;
pub mod curves;
pub mod data;
pub mod error;
pub mod involution;
pub mod lot;
pub mod projections;
pub mod torus_algebra;

pub use error::{Error, Result};
