//! Effective procedures for presented tracial von Neumann algebras and
//! finite-index subfactors, over exact Gaussian-rational arithmetic.

pub mod algebra;
pub mod backend;
pub mod basic;
pub mod cert;
pub mod error;
pub mod gallery;
pub mod job;
pub mod point;
pub mod presentation;
pub mod scalar;
pub mod search;
pub mod subfactor;
pub mod matrix;
pub mod numeric;
pub mod term;

pub use cert::{Certificate, Status};
pub use error::{Error, Result};
pub use job::{Command, JobConfig, JobOutput, Method, Outcome};
pub use scalar::{Gauss, Rational};
pub use term::{Enumerator, FlatBound, FlatMode, Signature, Term, Word};
