//! Integer-feasibility tests for commensurability of right-angled Artin groups
//! defined by trees, plus the finite covers and splitting skeletons that
//! realize the positive case for a path and a diameter-4 tree.

pub mod cli;
pub mod covers;
pub mod exactlp;
pub mod product;
pub mod solver;
pub mod splitting;
pub mod system;
pub mod trees;
