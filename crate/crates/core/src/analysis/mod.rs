//! Closed-form bounds for the quadratic testbed and the Monte-Carlo checks
//! that hold simulated runs against them.

mod bounds;
mod verify;

pub use bounds::*;
pub use verify::*;
