//! Braided, annular and planar semigroup diagrams with group-labelled wires.
//!
//! Modules, bottom up:
//! * [`presentation`]: semigroup presentations and the builtin fixtures
//! * [`coeff`]: wire coefficient groups and graph-product words
//! * [`picture`]: the diagram model, dipole reduction and canonical keys
//! * [`thompson`]: tree pairs for F, T and V and their diagram bridge
//! * [`embed`]: ladders, blocks, the embedding into a Thompson-like picture group, and the projection
//! * [`qmgraph`]: finite balls in the class graph and their verifiers

pub mod coeff;
pub mod embed;
pub mod picture;
pub mod presentation;
pub mod qmgraph;
pub mod thompson;
