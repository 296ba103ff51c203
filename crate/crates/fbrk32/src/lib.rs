//! Construction and optimization of forward-backward weights for the
//! FB-RK(3,2) shallow-water time-stepping scheme, with a planar C-grid
//! solver and an experiment harness for verifying the optimized schemes.

pub mod cli;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod numerics;
pub mod optimize;
pub mod scheme;
pub mod swe;
pub mod vn;
