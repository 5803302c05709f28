//! Quaternion class sets, Gross points and special-fiber models over ℚ.

pub mod arith;
pub mod cmfields;
pub mod embeddings;
pub mod equidist;
pub mod error;
pub mod lattices;
pub mod localmod;
pub mod qalg;
pub mod render;
pub mod specialfiber;

pub use error::{Error, Result};
