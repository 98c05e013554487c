//! Inverse shape reconstruction from images.
//!
//! The crate renders a scene that mixes known triangle geometry with a
//! stochastic surface described by an occupancy field, and propagates image
//! losses back into that field without any silhouette sampling. The pipeline
//! is: extract the mean surface from the field, render, compare to reference
//! images, scatter gradients into the field, step the optimizer, repeat.

pub mod adjoint;
pub mod error;
pub mod extraction;
pub mod fields;
pub mod geometry;
pub mod optimize;
pub mod transport;

pub use error::{Error, Result};
pub use fields::{AlbedoGrid, GradientBuffer, OccupancyField, ScalarGrid};
pub use geometry::{Aabb, Bvh, Intersection, Ray, TriangleMesh, Vec3};

