//! Free strict ω-groupoids over finite globular sets.

pub mod cylinder;
pub mod globset;
pub mod homotopy;
pub mod replay;
pub mod rewrite;
pub mod terms;
pub mod theta0;
pub mod tower;
pub mod config;
pub mod gen;
pub mod corpus;
