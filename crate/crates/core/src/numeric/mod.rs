//! Numerical building blocks shared by the solvers.

pub mod band;
pub mod ode;
pub mod pchip;
pub mod quad;
pub mod roots;
