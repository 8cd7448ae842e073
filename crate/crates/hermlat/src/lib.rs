//! Exact arithmetic for Hermitian lattices over imaginary quadratic fields.
//!
//! Everything is computed over the rationals: positive definite Hermitian
//! forms on lattices with nontrivial coefficient ideals, their minima and
//! minimal vectors, perfection and eutaxy certificates, Voronoi neighbor
//! graphs, and generator sets for the lattice automorphism groups.

pub mod cones;
pub mod glgen;
pub mod hermforms;
pub mod ideals;
pub mod isometry;
pub mod jsonio;
pub mod kmat;
pub mod lattice;
pub mod linalg;
pub mod qfield;
#[doc(hidden)]
pub mod testkit;
pub mod voronoi;
