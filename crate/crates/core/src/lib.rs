//! Discrete maximal-surface laboratory: Gauss-equation solver on a closed
//! hyperbolic genus-2 surface, quadratic-differential norms, curvature and
//! width diagnostics, volume entropy by orbit counting, and length spectra of
//! Fuchsian representations.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod entropy;
pub mod error;
pub mod field;
pub mod hyperbolic;
pub mod laplace;
pub mod linalg;
pub mod mesh;
pub mod qdiff;
pub mod solver;
pub mod spectrum;
pub mod surface;
pub mod tiling;

pub use error::{Error, Result};
pub use field::ScalarField;
