//! Exact verification of absorbing regions for a four-site coupled map
//! lattice reduced to the 3-torus.

pub mod dynamics;
pub mod explore;
pub mod geometry;
pub mod lorenz;
pub mod scalar;
pub mod symmetry;
pub mod verify;
