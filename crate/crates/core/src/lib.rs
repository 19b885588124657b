//! Numerical toolkit for nonsingular actions of locally compact groups.
//!
//! The crate builds orbit tessellations from lacunary nets, nested compact
//! orbit equivalence relations and their Følner statistics, Radon–Nikodym
//! cocycles with the conditional-expectation ratio formula, Poisson
//! suspensions with their exact Radon–Nikodym derivative, and ratio ergodic
//! averages along random Følner sequences. Everything continuous is generic
//! over the [`Real`] scalar (`f32`/`f64`); finite oracles are generic over
//! exact number types.

pub mod cocycle;
pub mod cross_section;
pub mod ergodic;
pub mod error;
pub mod filtration;
pub mod group;
pub mod numerics;
pub mod poisson;
pub mod region;
pub mod scalar;

pub use error::{Error, Result};
pub use group::{Element, GroupKind, GroupModel, QuadMethod, QuadratureScheme, Window};
pub use region::{Fibered, Region};
pub use scalar::Real;

pub type GroupModelF64 = group::GroupModel<f64>;
pub type GroupModelF32 = group::GroupModel<f32>;
pub type ElementF64 = group::Element<f64>;
pub type ElementF32 = group::Element<f32>;
pub type WindowF64 = group::Window<f64>;
pub type RegionF64 = region::Region<f64>;
pub type NetF64 = cross_section::Net<f64>;
pub type FiltrationF64 = filtration::FiltrationStructure<f64>;
pub type DensityF64 = cocycle::DensitySpec<f64>;
pub type DensityF32 = cocycle::DensitySpec<f32>;
pub type ConfigurationF64 = poisson::PointConfiguration<f64>;
