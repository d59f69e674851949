//! Two-stage stochastic integer programming with Benders decomposition.
//!
//! The crate bundles everything needed to run classic Benders decomposition
//! and its learning-enhanced variant, in which an RBF-kernel SVM decides
//! which optimality cuts enter the relaxed master problem:
//!
//! * [`lp`] and [`mip`]: a dense simplex LP solver with row duals and a
//!   best-bound branch-and-bound solver for binary programs.
//! * [`problems`]: the generic [`TwoStageProblem`] plus builders for
//!   capacitated facility location and multicommodity network design.
//! * [`benders`]: the classic decomposition loop and its building blocks.
//! * [`phase1`]: offline cut sampling and label transformation.
//! * [`svm`]: soft-margin kernel SVM trained with SMO.
//! * [`learnbd`]: the classifier-filtered decomposition loop.

pub mod benders;
pub mod error;
pub mod learnbd;
pub mod lp;
pub mod mip;
pub mod phase1;
pub mod problems;
pub mod seed;
pub mod svm;

pub use error::{Error, Result};
pub use problems::TwoStageProblem;
