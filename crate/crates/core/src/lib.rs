pub mod assembly;
pub mod disc;
pub mod error;
pub mod field;
pub mod geometry;
pub mod quadrature;
pub mod search;
pub mod special;
pub mod tension;
pub mod weight;
