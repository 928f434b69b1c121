//! Quadratic stochastic operators on the 1- and 2-simplex.
//!
//! The crate builds the cyclic mutation families `V_α` and `W_α` on S² and the
//! two-allele mutation model on S¹, locates and classifies their fixed points,
//! iterates trajectories with Cesàro means and Lyapunov-function monitors, and
//! analyses attractor point clouds (components, orientation, Lyapunov
//! exponents, Li-Yorke pair scans and parameter sweeps).

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod attractor;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod fixed_points;
pub mod io;
pub mod operators;
pub mod rng;
pub mod simplex;

pub use error::{QsoError, Result};
pub use fixed_points::{classify, find_fixed_points, nondegeneracy_det, FixedPointReport, NewtonOptions, Stability};
pub use operators::{apply, convex_combine, expand_family, jacobian, Family, HeredityTensor, Jacobian, OperatorSpec};
pub use rng::SeededRng;
pub use simplex::{classify_region, distance, permute, Permutation, Region, RegionLabel, SimplexPoint};
