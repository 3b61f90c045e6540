//! Desk-scale toolkit for cofinitely equivariant lifts between shift spaces,
//! finite measured groupoids and cocycles.

pub mod cli;
pub mod cocycle;
pub mod experiment;
pub mod group;
pub mod groupoid;
pub mod lift;
pub mod shift;
