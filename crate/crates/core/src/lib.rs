//! Planar Hausdorff contents and Wiener-type series for holomorphic
//! distributions in negative Lipschitz classes.
//!
//! The crate is `no_std` and only needs `alloc`. Everything here is a pure
//! function of its inputs; file formats and the command line live in the
//! `lipcap` companion crate.
//!
//! Module map:
//!
//! * [`geom`]: dyadic squares, annuli, scenes, parametric slit and
//!   road-runner domains, and quadtree rasterization.
//! * [`content`]: exact dyadic contents by quadtree dynamic programming,
//!   gauge contents, the lower-content ladder and ball-content brackets.
//! * [`measures`]: Frostman measures on raster sets and growth checks.
//! * [`transforms`]: Poisson and Cauchy transforms of discrete measures,
//!   `T_s` norm estimates, point evaluation by pairing and Vitushkin
//!   localization.
//! * [`smoothfn`]: grid-sampled test functions, `N_k` seminorms, standard
//!   pinchers and the tessellation partition of unity.
//! * [`partition`]: the multi-generation partition of unity subordinate to a
//!   dyadic cover.
//! * [`wiener`]: series evaluation, classifiers, divergence witnesses and
//!   annular test functions.
#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` style guards are how NaN gets rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod content;
pub mod error;
pub mod geom;
pub mod math;
pub mod measures;
pub mod partition;
pub mod smoothfn;
pub mod transforms;
pub mod wiener;

pub use error::{Error, Result};

/// Planar points are complex numbers.
pub type Point = num_complex::Complex64;

/// Largest quadtree depth any raster may use.
pub const MAX_DEPTH: u32 = 16;

/// Default depth cap for rasterization.
pub const DEFAULT_DEPTH_CAP: u32 = 14;
