pub mod geometry;
pub mod model;
pub mod numeric;
pub mod solvers;
