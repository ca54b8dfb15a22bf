pub mod error;
pub mod groups;
pub mod lattice;
pub mod real;
pub mod values;
pub mod hahn;
pub mod hensel;
pub mod projective;
pub mod formula;
pub mod difference;
pub mod classifier;
pub mod sample;
