//! Symbolic-numeric kernel for singular subalgebroids of trivialized Lie
//! algebroids with polynomial data, and for their holonomy groupoids over
//! concrete Lie groupoid models.

pub mod algebroid;
pub mod groupoid;
pub mod holonomy;
pub mod ode;
pub mod poly;
