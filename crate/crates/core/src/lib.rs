//! Exact computations with finitely presented A∞-categories: sign-correct
//! operations, augmentation, twisted complexes and cones, bar-construction
//! localization, nerves, functor complexes and Hochschild cochains.

pub mod coefficients;
pub mod ainfty;
pub mod cli;
pub mod complexes;
pub mod data;
pub mod functors;
pub mod localization;
pub mod nerve;
pub mod parallel;
pub mod suite;
pub mod twisted;
