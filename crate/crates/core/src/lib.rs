//! Stacking standard tableaux along Levi data, and the matching
//! decomposition of Springer fibres of induced nilpotent orbits.

pub mod exactlinalg;
pub mod harness;
pub mod partitions;
pub mod springer;
pub mod tableaux;
