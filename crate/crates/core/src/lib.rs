//! Probability of cascading failures in interdependent systems, modelled
//! as a multi-type branching process.

pub mod branching;
pub mod children;
pub mod model;
pub mod lp;
pub mod orders;
pub mod io;
pub mod simulate;
pub mod report;
