//! Isogeometric free-vibration analysis of functionally graded, nonlocal
//! (Eringen differential form) Mindlin nanoplates.

pub mod analysis;
pub mod assembly;
pub mod error;
pub mod material;
pub mod modal;
pub mod navier;
pub mod nurbs;
pub mod quadrature;

pub use error::{Error, Result};
