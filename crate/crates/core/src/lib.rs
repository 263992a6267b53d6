//! Numerical evolution and verification harness for U(2)-invariant warped
//! Berger metrics on R^4 under Ricci flow. The crate evolves the radial
//! metric components (xi, b, c) on a staggered grid, tracks every
//! functional known to be controlled along such flows, detects and
//! classifies singularities, and compares rescaled blow-up profiles
//! against Bryant-soliton and shrinking-cylinder references.

pub mod config;
pub mod curvature;
pub mod error;
pub mod flow;
pub mod initial;
pub mod io;
pub mod mesh;
pub mod monitor;
pub mod oracles;
pub mod runner;
pub mod singularity;

pub use error::{FlowError, Result};
