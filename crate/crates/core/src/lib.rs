//! Graph burning on growing square grids `G_n = [-f(n), f(n)]^2`.

pub mod geometry;
pub mod growth;
pub mod analysis;
pub mod battery;
pub mod engine;
pub mod rational;
pub mod strategies;
