//! Bandwidth selection on a κ-fold cross-validation loss.
//!
//! The loss for a bandwidth `h` is
//! `φ(h) = (1/κ) Σ_p Σ_{j ∈ F_p} (g_n(X_j) − Y_j)²`, where `g_n` on fold `F_p`
//! uses only the other folds as stored rows. Note the inner sums are not
//! averaged over fold size.
//!
//! Pairwise distances between normalized prediction rows are computed once
//! per [`CvProblem`], so evaluating the loss (and, for the Gaussian-type
//! kernels, its derivative) at a new `h` only costs kernel evaluations.

mod cv;
mod descent;
mod folds;
mod grid;
mod holdout;

pub use cv::{cv_error, cv_error_grad, CvProblem};
pub use descent::{gradient_descent, GdConfig, GdOutcome, GdStep, StepEvent};
pub use folds::CvPlan;
pub use grid::{grid_search, GridConfig, GridOutcome};
pub use holdout::{cobra_holdout_search, holdout_error};
