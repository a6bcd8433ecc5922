//! Domain types, link functions, log-densities, the SPx joint density and the
//! borrow-weight kernel.

pub mod density;
pub mod joint;
pub mod link;
pub mod types;
pub mod weights;

pub use joint::{joint_terms, log_joint, log_joint_with, JointTerms};
pub use link::{inv_logit, logit};
pub use types::{
    ColumnScaling, Dataset, Expert, LikelihoodMode, NewTrial, Outcome, ParameterState, SpxHyperParams,
    Standardization, TrialSummary,
};
pub use weights::{borrow_weights, weighted_mean, BorrowWeights};
