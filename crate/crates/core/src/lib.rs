//! Crouzeix-Raviart finite elements for the Poisson Dirichlet problem with
//! fully computable error bounds.

pub mod certify;
pub mod constants;
pub mod error;
pub mod femcore;
pub mod flux;
pub mod linalg;
pub mod par;
pub mod quadrature;
pub mod trimesh;

pub use error::{Error, Result};
