//! Integrable hierarchies on genus-zero Hurwitz spaces.
//!
//! A degree-`N` rational map `λ = R(γ)` is a branched covering of the
//! λ-sphere by the γ-sphere with `2N - 2` simple branch points `λ_m`. Moving
//! the branch points deforms the map; the modules here integrate those
//! deformations and the linear and nonlinear systems that live on top of
//! them.

pub mod covering;
pub mod deformation;
pub mod error;
pub mod fd;
pub mod fixtures;
pub mod geometry;
pub mod hydro;
pub mod isomonodromy;
pub mod ode;
pub mod poly;
pub mod quad;
pub mod rank1;
pub mod suite;
pub mod tolerances;

pub use covering::{BranchData, RationalCovering, SheetLabeling};
pub use error::{Error, Result};
pub use num_complex::Complex64 as C;
