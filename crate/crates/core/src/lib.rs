//! Dual formulation toolkit for Newton's minimal-resistance problem.

pub mod error;
pub mod geometry;
pub mod acceptance;
pub mod convex_core;
pub mod corpus;
pub mod heel_front;
pub mod hessian_measure;
pub mod hull3;
pub mod io;
pub mod maxwell_stratum;
pub mod newton_radial;
pub mod resistance;
pub mod quadrature;

pub use error::{Error, Result};
pub use geometry::{Mat2, Vec2};
