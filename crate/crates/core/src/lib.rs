//! Intersection numbers of group splittings.

pub mod automaton;
pub mod corpus;
pub mod crossing;
pub mod error;
pub mod factor;
pub mod finite;
pub mod group;
pub mod intersection;
pub mod sets;
pub mod scenario;
pub mod splitting;
pub mod stallings;
pub mod sweep;
pub mod tree;
pub mod word;

pub use error::{Error, Result};
