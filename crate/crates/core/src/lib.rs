//! Finite-dimensional representation theory of SU_q(2) and SL_q(2,ℂ):
//! q-deformed scalars, block operator matrices, relation checkers, the
//! Koornwinder matrix coefficients, Beurling-Fourier weighted norms and
//! character spectra of free quantum groups.

pub mod beurling;
pub mod corep;
pub mod error;
pub mod freeqg;
pub mod linalg;
pub mod qgmatrix;
pub mod qscalar;

pub use beurling::{CoeffFamily, Dual, Trend, Weight, WeightKind};
pub use corep::{CoeffWord, RepMatrix};
pub use error::{Error, Result};
pub use freeqg::{F2Word, FMatrix, Flavor, Letter};
pub use linalg::{BlockOpMat, CMat, IntertwinerSearch};
pub use nalgebra;
pub use num_complex::{self, Complex64};
pub use qgmatrix::{RelationReport, TwoByTwoOp};
pub use qscalar::{HalfInt, QParam, SignedHalfInt};
